use clap::Args;
use serde::Serialize;

use geomedian::robustness::{
    coarse_ball_radius, refined_ball_radius_certified, Certificate, ConcentrationContext,
};

use crate::CliError;

#[derive(Debug, Args)]
pub struct BoundsArgs {
    /// Mass fraction(s) in the ball, each in (1/2, 1]; comma separated.
    #[arg(
        long,
        value_delimiter = ',',
        required = true,
        allow_negative_numbers = true
    )]
    pub alpha: Vec<f64>,
    /// Ball radius(es).
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "1",
        allow_negative_numbers = true
    )]
    pub rho: Vec<f64>,
    /// Upper sectional curvature bound(s).
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "0",
        allow_negative_numbers = true
    )]
    pub delta: Vec<f64>,
    /// Injectivity radius.
    #[arg(long, default_value_t = f64::INFINITY)]
    pub inj: f64,
    /// Print JSON instead of a table.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Serialize)]
struct Row {
    alpha: f64,
    rho: f64,
    delta: f64,
    inj: f64,
    coarse: f64,
    refined: Option<f64>,
    certificate: Option<Certificate>,
    note: Option<String>,
}

pub fn run(a: &BoundsArgs) -> Result<(), CliError> {
    let mut rows = Vec::new();
    for &alpha in &a.alpha {
        for &rho in &a.rho {
            for &delta in &a.delta {
                let ctx = ConcentrationContext::new(alpha, rho, delta, a.inj)?;
                let coarse = coarse_ball_radius(&ctx)?;
                let (refined, certificate, note) = match refined_ball_radius_certified(&ctx) {
                    Ok((r, c)) => (Some(r), Some(c), None),
                    Err(e) => (None, None, Some(e.to_string())),
                };
                rows.push(Row {
                    alpha,
                    rho,
                    delta,
                    inj: a.inj,
                    coarse,
                    refined,
                    certificate,
                    note,
                });
            }
        }
    }
    if a.json {
        println!("{}", serde_json::to_string_pretty(&rows)?);
        return Ok(());
    }
    println!(
        "{:>8} {:>8} {:>8} {:>8} {:>12} {:>12}  certificate",
        "alpha", "rho", "delta", "inj", "coarse", "refined"
    );
    for r in &rows {
        let refined = r.refined.map_or("-".to_string(), |v| format!("{v:.6}"));
        let cert = match (&r.certificate, &r.note) {
            (Some(c), _) => format!("{c:?}"),
            (None, Some(n)) => n.clone(),
            (None, None) => String::new(),
        };
        println!(
            "{:>8} {:>8} {:>8} {:>8} {:>12.6} {:>12}  {cert}",
            r.alpha, r.rho, r.delta, r.inj, r.coarse, refined
        );
    }
    Ok(())
}
