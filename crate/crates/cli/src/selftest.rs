use std::time::Instant;

use geomedian::estimators::{
    characterization_residual, solve_median_subgradient, BallContext, DiscreteMeasure,
    SolverOptions, StepSchedule,
};
use geomedian::radar::{detect_field, CellField, DetectorConfig};
use geomedian::robustness::{refined_ball_radius, ConcentrationContext};
use geomedian::toeplitz::{phi, phi_inv, ReflectionCoords};
use geomedian::{Manifold, Result};

use num_complex::Complex64;

use crate::CliError;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn fermat_point() -> Result<bool> {
    let e2 = Manifold::euclidean(2)?;
    let s3 = 3f64.sqrt();
    let pts = [[0.0, 0.0], [1.0, 0.0], [0.5, s3 / 2.0]]
        .iter()
        .map(|p| e2.point(p.to_vec()))
        .collect::<Result<Vec<_>>>()?;
    let mu = DiscreteMeasure::uniform(e2.clone(), pts)?;
    let ctx = BallContext::around_origin(&mu)?;
    let opts = SolverOptions {
        tol: 1e-5,
        ..SolverOptions::default()
    };
    let (x, trace) =
        solve_median_subgradient(&mu, &ctx, &StepSchedule::harmonic(1.0)?, None, &opts)?;
    let want = e2.point(vec![0.5, s3 / 6.0])?;
    Ok(trace.termination.is_converged()
        && e2.distance(&x, &want) < 1e-3
        && characterization_residual(&mu, &x)? < 1e-5)
}

fn reflection_round_trip() -> Result<bool> {
    let coords = ReflectionCoords::new(2.0, vec![c(0.3, -0.4), c(-0.5, 0.1), c(0.2, 0.2)])?;
    let back = phi(&phi_inv(&coords))?;
    Ok((back.p0() - 2.0).abs() < 1e-12
        && back
            .mu()
            .iter()
            .zip(coords.mu())
            .all(|(a, b)| (a - b).norm() < 1e-12))
}

fn flat_radius() -> Result<bool> {
    let ctx = ConcentrationContext::new(0.75, 1.0, 0.0, f64::INFINITY)?;
    Ok((refined_ball_radius(&ctx)? - 0.75 / 0.5f64.sqrt()).abs() < 1e-12)
}

fn detector_peak() -> Result<bool> {
    let base = ReflectionCoords::new(1.0, vec![c(0.4, 0.1), c(-0.1, 0.0)])?;
    let mut cells = vec![base; 40];
    cells[23] = ReflectionCoords::new(6.0, vec![c(-0.7, 0.2), c(0.3, 0.3)])?;
    let det = detect_field(CellField::new(cells)?, &DetectorConfig::default())?;
    Ok(det.report.declared == [23])
}

pub fn run() -> std::result::Result<(), CliError> {
    let checks: [(&str, fn() -> Result<bool>); 4] = [
        ("Fermat point of the unit triangle", fermat_point),
        ("reflection coordinates round trip", reflection_round_trip),
        ("flat robustness radius", flat_radius),
        ("detector isolates a perturbed cell", detector_peak),
    ];
    let mut failed = 0;
    for (name, check) in checks {
        let t = Instant::now();
        let outcome = check();
        let ok = matches!(outcome, Ok(true));
        failed += usize::from(!ok);
        let detail = match outcome {
            Err(e) => format!(" ({e})"),
            _ => String::new(),
        };
        println!(
            "{} {name} [{:.1} ms]{detail}",
            if ok { "PASS" } else { "FAIL" },
            t.elapsed().as_secs_f64() * 1e3
        );
    }
    if failed > 0 {
        return Err(CliError::not_converged(format!(
            "{failed} self-test check(s) failed"
        )));
    }
    Ok(())
}
