use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::{Args, Subcommand};
use serde::Serialize;

use geomedian::estimators::{
    characterization_residual, cost, default_start, solve_median_subgradient, solve_pmean_gradient,
    solve_pmean_stochastic, weiszfeld_warm_start, BallContext, DiscreteMeasure, MeasureSampler,
    SolverOptions, SolverTrace, StepSchedule, StochasticOptions, Termination,
};
use geomedian::io::{read_measure_csv, read_measure_json, write_point_csv};
use geomedian::{Manifold, Point};

use crate::{CliError, OutputArgs};

#[derive(Debug, Subcommand)]
pub enum SolveCommand {
    /// Fréchet median by the subgradient method.
    Median(MedianArgs),
    /// Fréchet p-mean (p > 1) by gradient descent.
    Pmean(PmeanArgs),
    /// Fréchet p-mean by the stochastic gradient walk on draws from the measure.
    Stochastic(StochasticArgs),
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Measure file: CSV (coordinate columns plus optional `weight`) or JSON.
    #[arg(long, short)]
    pub input: PathBuf,
    /// Manifold, e.g. `euclidean:2`, `disc`, `positive`, `tn:4`, `disc+disc:2`.
    /// Required for CSV input; JSON files carry their own.
    #[arg(long)]
    pub manifold: Option<String>,
}

impl InputArgs {
    pub fn load(&self) -> Result<DiscreteMeasure, CliError> {
        load_measure(&self.input, self.manifold.as_deref())
    }
}

pub fn load_measure(path: &Path, manifold: Option<&str>) -> Result<DiscreteMeasure, CliError> {
    let file = File::open(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    let is_json = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"));
    let measure = if is_json {
        let mu = read_measure_json(file)?;
        if let Some(spec) = manifold {
            let m: Manifold = spec.parse()?;
            if &m != mu.manifold() {
                return Err(CliError::usage(format!(
                    "--manifold {m} disagrees with the file's {}",
                    mu.manifold()
                )));
            }
        }
        mu
    } else {
        let spec =
            manifold.ok_or_else(|| CliError::usage("--manifold is required for CSV input"))?;
        let m: Manifold = spec.parse()?;
        read_measure_csv(&m, file)?
    };
    Ok(measure)
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    /// Harmonic step scale `s` in `t_k = s/k` (default depends on the solver).
    #[arg(long)]
    pub step_scale: Option<f64>,
    #[arg(long, default_value_t = 2_000_000)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Record every n-th iterate in the trace.
    #[arg(long, default_value_t = 1)]
    pub trace_stride: usize,
}

impl SolverArgs {
    fn options(&self) -> SolverOptions {
        SolverOptions {
            max_iter: self.max_iter,
            tol: self.tol,
            trace_stride: self.trace_stride,
            snap_to_atoms: true,
        }
    }
}

#[derive(Debug, Args)]
pub struct MedianArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Start from a Weiszfeld estimate instead of the best atom.
    #[arg(long)]
    pub warm_start: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct PmeanArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct StochasticArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    /// Number of draws.
    #[arg(long, default_value_t = 10_000)]
    pub steps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Harmonic step scale (default `1/p`, which makes `p = 2` a running mean).
    #[arg(long)]
    pub step_scale: Option<f64>,
    #[arg(long, default_value_t = 1)]
    pub trace_stride: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Serialize)]
struct SolveSummary {
    manifold: String,
    atoms: usize,
    p: f64,
    point: Vec<f64>,
    cost: Option<f64>,
    residual: Option<f64>,
    termination: Termination,
    iterations: usize,
}

pub fn run(cmd: SolveCommand) -> Result<(), CliError> {
    match cmd {
        SolveCommand::Median(a) => median(&a),
        SolveCommand::Pmean(a) => pmean(&a),
        SolveCommand::Stochastic(a) => stochastic(&a),
    }
}

fn median(a: &MedianArgs) -> Result<(), CliError> {
    let mu = a.input.load()?;
    let mut start = default_start(&mu, 1.0);
    if a.warm_start {
        start = weiszfeld_warm_start(&mu, start, 10_000, 1e-3 * a.solver.tol)?;
    }
    let ctx = BallContext::enclosing(&mu, start.clone())?;
    let scale = a.solver.step_scale.unwrap_or(if a.warm_start {
        4.0 * a.solver.tol
    } else {
        ctx.support_radius().max(a.solver.tol)
    });
    let schedule = StepSchedule::harmonic(scale)?;
    let (x, trace) =
        solve_median_subgradient(&mu, &ctx, &schedule, Some(start), &a.solver.options())?;
    let residual = characterization_residual(&mu, &x)?;
    finish(&mu, 1.0, &x, Some(residual), &trace, &a.output)
}

fn pmean(a: &PmeanArgs) -> Result<(), CliError> {
    if !(a.p > 1.0) {
        return Err(CliError::usage(format!(
            "--p must exceed 1 for gradient descent (use `solve median` for p = 1), got {}",
            a.p
        )));
    }
    let mu = a.input.load()?;
    let scale = a.solver.step_scale.unwrap_or(1.0 / a.p);
    let schedule = StepSchedule::harmonic(f64::MAX)?.with_cap(scale)?;
    let (x, trace) = solve_pmean_gradient(&mu, None, a.p, &schedule, None, &a.solver.options())?;
    finish(&mu, a.p, &x, None, &trace, &a.output)
}

fn stochastic(a: &StochasticArgs) -> Result<(), CliError> {
    if !(a.p >= 1.0) {
        return Err(CliError::usage(format!(
            "--p must be at least 1, got {}",
            a.p
        )));
    }
    let mu = a.input.load()?;
    let schedule = StepSchedule::harmonic(a.step_scale.unwrap_or(1.0 / a.p))?;
    let mut sampler = MeasureSampler::new(&mu, a.seed);
    let x0 = default_start(&mu, a.p);
    let opts = StochasticOptions {
        steps: a.steps,
        c_pmuk: None,
        trace_stride: a.trace_stride,
    };
    let (x, trace) =
        solve_pmean_stochastic(mu.manifold(), &mut sampler, None, a.p, &schedule, x0, &opts)?;
    finish(&mu, a.p, &x, None, &trace, &a.output)
}

fn finish(
    mu: &DiscreteMeasure,
    p: f64,
    x: &Point,
    residual: Option<f64>,
    trace: &SolverTrace,
    output: &OutputArgs,
) -> Result<(), CliError> {
    let summary = SolveSummary {
        manifold: mu.manifold().to_string(),
        atoms: mu.len(),
        p,
        point: x.coords().to_vec(),
        cost: Some(cost(mu, x, p)?),
        residual,
        termination: trace.termination,
        iterations: trace.iterations,
    };
    println!("{}", serde_json::to_string_pretty(&summary)?);
    if let Some(path) = output.path("point.csv")? {
        write_point_csv(x, BufWriter::new(File::create(path)?))?;
    }
    if let Some(path) = output.path("trace.csv")? {
        trace.write_csv(BufWriter::new(File::create(path)?))?;
    }
    if let Some(path) = output.path("result.json")? {
        serde_json::to_writer_pretty(BufWriter::new(File::create(path)?), &summary)?;
    }
    if output.svg && !trace.costs.is_empty() {
        if let Some(path) = output.path("cost.svg")? {
            let pts: Vec<(f64, f64)> = trace
                .indices
                .iter()
                .zip(&trace.costs)
                .map(|(&k, &c)| (k as f64, c))
                .collect();
            std::fs::write(
                path,
                crate::svg::line_plot("cost per iteration", "k", "cost", &[("cost", &pts)], None),
            )?;
        }
    }
    match trace.termination {
        Termination::MaxIterations | Termination::ScheduleExhausted => {
            Err(CliError::not_converged(format!(
                "solver stopped without converging ({:?} after {} iterations)",
                trace.termination, trace.iterations
            )))
        }
        _ => Ok(()),
    }
}
