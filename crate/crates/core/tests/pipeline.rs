use geomedian::estimators::{
    characterization_residual, default_start, solve_median_subgradient, weiszfeld_warm_start,
    BallContext, SolverOptions, StepSchedule,
};
use geomedian::io::{read_measure_csv, read_measure_json, write_measure_csv, write_measure_json};
use geomedian::radar::io::{read_cell_field, read_pulse_cube, write_cell_field, write_pulse_cube};
use geomedian::radar::{
    detect, estimate_cells, simulate_scene, DetectorConfig, SceneConfig, ThresholdPolicy,
};
use geomedian::toeplitz::tn_manifold;
use geomedian::Manifold;

#[test]
fn measure_files_round_trip_and_solve() {
    let m: Manifold = "positive+disc".parse().unwrap();
    let csv = "p0,re,im,weight\n1.0,0.1,0.0,2\n2.0,-0.2,0.3,1\n0.5,0.0,-0.4,1\n";
    let mu = read_measure_csv(&m, csv.as_bytes()).unwrap();
    assert_eq!(mu.weights(), &[0.5, 0.25, 0.25]);

    let mut json = Vec::new();
    write_measure_json(&mu, &mut json).unwrap();
    assert_eq!(read_measure_json(json.as_slice()).unwrap(), mu);
    let mut out = Vec::new();
    write_measure_csv(&mu, &mut out).unwrap();
    assert_eq!(read_measure_csv(&m, out.as_slice()).unwrap(), mu);

    // the atom of weight 1/2 is a median, certified exactly
    let ctx = BallContext::enclosing(&mu, default_start(&mu, 1.0)).unwrap();
    let schedule = StepSchedule::harmonic(ctx.support_radius()).unwrap();
    let (x, trace) =
        solve_median_subgradient(&mu, &ctx, &schedule, None, &SolverOptions::default()).unwrap();
    assert!(trace.termination.is_converged());
    assert_eq!(characterization_residual(&mu, &x).unwrap(), 0.0);
}

#[test]
fn warm_start_agrees_with_cold_solve() {
    let m = tn_manifold(3);
    let rows = [
        [1.0, 0.2, 0.1, -0.3, 0.0],
        [1.5, -0.1, 0.4, 0.2, 0.2],
        [0.7, 0.5, -0.2, 0.0, -0.4],
        [2.2, 0.0, 0.0, 0.3, 0.1],
    ];
    let pts = rows.iter().map(|r| m.point(r.to_vec()).unwrap()).collect();
    let mu = geomedian::estimators::DiscreteMeasure::uniform(m.clone(), pts).unwrap();
    let opts = SolverOptions {
        tol: 1e-6,
        trace_stride: usize::MAX,
        ..SolverOptions::default()
    };

    let ctx = BallContext::enclosing(&mu, default_start(&mu, 1.0)).unwrap();
    let schedule = StepSchedule::harmonic(ctx.support_radius()).unwrap();
    let (cold, _) = solve_median_subgradient(&mu, &ctx, &schedule, None, &opts).unwrap();

    let warm = weiszfeld_warm_start(&mu, default_start(&mu, 1.0), 1000, 1e-9).unwrap();
    let ctx = BallContext::enclosing(&mu, warm.clone()).unwrap();
    let (hot, trace) = solve_median_subgradient(
        &mu,
        &ctx,
        &StepSchedule::harmonic(4e-6).unwrap(),
        Some(warm),
        &opts,
    )
    .unwrap();
    assert!(trace.iterations < 100);
    assert!(m.distance(&cold, &hot) < 1e-4);
}

#[test]
fn scenes_are_reproducible_and_serializable() {
    let cfg = SceneConfig::two_target(11);
    let a = simulate_scene(&cfg).unwrap();
    assert_eq!(a, simulate_scene(&cfg).unwrap());
    assert_ne!(a, simulate_scene(&SceneConfig::two_target(12)).unwrap());

    let mut buf = Vec::new();
    write_pulse_cube(&a, &mut buf).unwrap();
    assert_eq!(read_pulse_cube(buf.as_slice()).unwrap(), a);

    let field = estimate_cells(&a, cfg.model_order, 0.0).unwrap();
    let mut buf = Vec::new();
    write_cell_field(&field, &mut buf).unwrap();
    let back = read_cell_field(buf.as_slice()).unwrap();
    let m = tn_manifold(cfg.model_order);
    for (x, y) in field.cells().iter().zip(back.cells()) {
        assert!(m.dist_raw(&x.to_row(), &y.to_row()) < 1e-12);
    }

    let json = serde_json::to_string(&cfg).unwrap();
    assert_eq!(serde_json::from_str::<SceneConfig>(&json).unwrap(), cfg);
}

#[test]
fn targets_lead_under_every_threshold_policy() {
    let cfg = SceneConfig::two_target(0);
    let cube = simulate_scene(&cfg).unwrap();
    for policy in [
        ThresholdPolicy::MedianMad(5.0),
        ThresholdPolicy::Quantile(0.99),
    ] {
        let det = detect(
            &cube,
            cfg.model_order,
            &DetectorConfig {
                policy,
                ..DetectorConfig::default()
            },
        )
        .unwrap();
        assert!(det.report.top_ranks_are(&cfg.target_cells()));
        assert!(cfg
            .target_cells()
            .iter()
            .all(|c| det.report.declared.contains(c)));
    }
}
