use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::PathBuf;

use clap::{ArgAction, Args, Subcommand};

use geomedian::radar::io::{
    read_pulse_cube, write_cell_field, write_pulse_cube, write_spectra, write_statistic,
};
use geomedian::radar::{
    detect, estimate_cells, field_spectra, frequency_grid, simulate_scene, sliding_filter,
    DetectorConfig, FilterKind, FilterOptions, PulseCube, SceneConfig, ThresholdPolicy,
    DEFAULT_REGULARIZATION, DEFAULT_WINDOW,
};

use crate::{svg, CliError, OutputArgs};

#[derive(Debug, Subcommand)]
pub enum RadarCommand {
    /// Simulate a scene and write its pulse cube.
    Simulate(SimulateArgs),
    /// Run the detector on a pulse cube or a simulated scene.
    Detect(DetectArgs),
    /// Write autoregressive spectra of the raw and filtered cells.
    Spectra(SpectraArgs),
}

#[derive(Debug, Args)]
pub struct SceneArgs {
    /// Scene configuration JSON (default: the bundled two-target scene).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overrides the scene seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the model order (Toeplitz matrix order).
    #[arg(long)]
    pub order: Option<usize>,
}

impl SceneArgs {
    fn scene(&self) -> Result<SceneConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => {
                let file = File::open(path)
                    .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
                serde_json::from_reader(BufReader::new(file))?
            }
            None => SceneConfig::two_target(0),
        };
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(order) = self.order {
            cfg.model_order = order;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub scene: SceneArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Where the pulse cube comes from.
#[derive(Debug, Args)]
pub struct CubeArgs {
    /// Pulse cube CSV (`cell_id, pulse_index, re, im`); simulates the scene otherwise.
    #[arg(long, short)]
    pub input: Option<PathBuf>,
    #[command(flatten)]
    pub scene: SceneArgs,
}

impl CubeArgs {
    fn load(&self) -> Result<(PulseCube, usize), CliError> {
        match &self.input {
            Some(path) => {
                if self.scene.config.is_some() || self.scene.seed.is_some() {
                    return Err(CliError::usage(
                        "--input cannot be combined with --config or --seed",
                    ));
                }
                let file = File::open(path)
                    .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
                let cube = read_pulse_cube(BufReader::new(file))?;
                Ok((
                    cube,
                    self.scene
                        .order
                        .unwrap_or(SceneConfig::two_target(0).model_order),
                ))
            }
            None => {
                let cfg = self.scene.scene()?;
                Ok((simulate_scene(&cfg)?, cfg.model_order))
            }
        }
    }
}

#[derive(Debug, Args)]
pub struct FilterArgs {
    /// Odd window length in cells.
    #[arg(long, default_value_t = DEFAULT_WINDOW)]
    pub window: usize,
    /// Leave the cell under test out of its window (`--exclude-center false` keeps it).
    #[arg(long, default_value_t = true, action = ArgAction::Set)]
    pub exclude_center: bool,
    /// Burg regularization.
    #[arg(long, default_value_t = DEFAULT_REGULARIZATION)]
    pub regularization: f64,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
}

impl FilterArgs {
    fn options(&self, kind: FilterKind) -> FilterOptions {
        let mut opts = FilterOptions::new(self.window, kind);
        opts.exclude_center = self.exclude_center;
        if let Some(t) = self.tol {
            opts.tol = t;
        }
        if let Some(k) = self.max_iter {
            opts.max_iter = k;
        }
        opts
    }
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    #[command(flatten)]
    pub cube: CubeArgs,
    #[command(flatten)]
    pub filter: FilterArgs,
    /// `median` or `barycenter`.
    #[arg(long, default_value = "median")]
    pub filter_kind: String,
    /// `fixed:C`, `quantile:Q` or `mad:K` (median + K scaled MADs).
    #[arg(long, default_value = "mad:5")]
    pub threshold: String,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SpectraArgs {
    #[command(flatten)]
    pub cube: CubeArgs,
    #[command(flatten)]
    pub filter: FilterArgs,
    /// Frequencies on `[-1/2, 1/2)`.
    #[arg(long, default_value_t = 256)]
    pub n_freq: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

pub fn run(cmd: RadarCommand) -> Result<(), CliError> {
    match cmd {
        RadarCommand::Simulate(a) => simulate(&a),
        RadarCommand::Detect(a) => detect_cmd(&a),
        RadarCommand::Spectra(a) => spectra(&a),
    }
}

fn simulate(a: &SimulateArgs) -> Result<(), CliError> {
    let cfg = a.scene.scene()?;
    let cube = simulate_scene(&cfg)?;
    let Some(cube_path) = a.output.path("cube.csv")? else {
        return Err(CliError::usage("radar simulate needs --out-dir"));
    };
    write_pulse_cube(&cube, BufWriter::new(File::create(&cube_path)?))?;
    if let Some(path) = a.output.path("scene.json")? {
        serde_json::to_writer_pretty(BufWriter::new(File::create(path)?), &cfg)?;
    }
    println!(
        "wrote {} cells x {} pulses to {} (targets at {:?})",
        cube.n_cells(),
        cube.pulses_per_cell(),
        cube_path.display(),
        cfg.target_cells()
    );
    Ok(())
}

fn detect_cmd(a: &DetectArgs) -> Result<(), CliError> {
    let kind: FilterKind = a.filter_kind.parse()?;
    let policy: ThresholdPolicy = a.threshold.parse()?;
    let (cube, order) = a.cube.load()?;
    let cfg = DetectorConfig {
        regularization: a.filter.regularization,
        filter: a.filter.options(kind),
        policy,
    };
    let det = detect(&cube, order, &cfg)?;
    let report = &det.report;

    if let Some(path) = a.output.path("report.json")? {
        serde_json::to_writer_pretty(BufWriter::new(File::create(path)?), report)?;
    }
    if let Some(path) = a.output.path("statistic.csv")? {
        write_statistic(&report.statistic, BufWriter::new(File::create(path)?))?;
    }
    if let Some(path) = a.output.path("cells.csv")? {
        write_cell_field(&det.field, BufWriter::new(File::create(path)?))?;
    }
    if let Some(path) = a.output.path("filtered.csv")? {
        write_cell_field(&det.filtered.field, BufWriter::new(File::create(path)?))?;
    }
    if a.output.svg {
        if let Some(path) = a.output.path("statistic.svg")? {
            let pts: Vec<(f64, f64)> = report
                .statistic
                .iter()
                .enumerate()
                .map(|(i, s)| (i as f64, *s))
                .collect();
            let plot = svg::line_plot(
                &format!("distance to the {kind} of the window"),
                "range cell",
                "statistic",
                &[("statistic", &pts)],
                Some(("threshold", report.threshold)),
            );
            std::fs::write(path, plot)?;
        }
    }

    let top: Vec<usize> = report.ranking().into_iter().take(5).collect();
    println!(
        "filter: {kind}, window {}, exclude center {}",
        report.window_size, report.exclude_center
    );
    println!("threshold ({}): {:.6}", report.policy, report.threshold);
    println!("declared: {:?}", report.declared);
    println!("top cells: {top:?}");
    if !report.degenerate_cells.is_empty() {
        println!("degenerate cells: {:?}", report.degenerate_cells);
    }
    if !report.unconverged_cells.is_empty() {
        return Err(CliError::not_converged(format!(
            "window solver did not converge at cells {:?}",
            report.unconverged_cells
        )));
    }
    Ok(())
}

fn spectra(a: &SpectraArgs) -> Result<(), CliError> {
    if a.n_freq < 2 {
        return Err(CliError::usage("--n-freq must be at least 2"));
    }
    let (cube, order) = a.cube.load()?;
    let field = estimate_cells(&cube, order, a.filter.regularization)?;
    let freqs = frequency_grid(a.n_freq);
    let mut outputs = vec![("raw".to_string(), field_spectra(&field, a.n_freq))];
    let mut unconverged = Vec::new();
    for kind in [FilterKind::Median, FilterKind::Barycenter] {
        let filtered = sliding_filter(&field, &a.filter.options(kind))?;
        unconverged.extend(filtered.unconverged.iter().map(|i| (kind, *i)));
        outputs.push((kind.to_string(), field_spectra(&filtered.field, a.n_freq)));
    }
    if a.output.out_dir.is_none() {
        return Err(CliError::usage("radar spectra needs --out-dir"));
    }
    for (name, rows) in &outputs {
        if let Some(path) = a.output.path(&format!("spectra_{name}.csv"))? {
            write_spectra(&freqs, rows, BufWriter::new(File::create(path)?))?;
        }
        if a.output.svg {
            if let Some(path) = a.output.path(&format!("spectra_{name}.svg"))? {
                let plot = svg::heat_map(
                    &format!("{name} spectra"),
                    "normalized Doppler frequency",
                    "range cell",
                    rows,
                );
                std::fs::write(path, plot)?;
            }
        }
    }
    println!(
        "wrote {} spectra of {} cells x {} frequencies",
        outputs.len(),
        field.len(),
        a.n_freq
    );
    if !unconverged.is_empty() {
        return Err(CliError::not_converged(format!(
            "window solver did not converge at {unconverged:?}"
        )));
    }
    Ok(())
}
