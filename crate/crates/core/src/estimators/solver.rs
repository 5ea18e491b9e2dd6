use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::manifold::{Manifold, Point, TangentVector};

use super::context::{gradient_step_cap, step_cap_t, stochastic_step_cap, BallContext};
use super::functional::{evaluate, residual_of, Evaluation, ATOM_EPS};
use super::measure::{DiscreteMeasure, PointSampler};
use super::schedule::StepSchedule;

/// Tolerance on `d(x_k, a) ≤ ρ` before a run is declared escaped.
pub const CONFINEMENT_SLACK: f64 = 1e-9;

/// Atoms scanned when picking a default starting point.
const START_CANDIDATES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// Step and residual both fell below the tolerance.
    Converged,
    /// The iterate sits on an atom whose mass dominates the subgradient.
    CertifiedAtom,
    /// The (sub)gradient vanished exactly.
    Stationary,
    MaxIterations,
    ScheduleExhausted,
    /// A fixed-length stochastic run finished.
    StepsCompleted,
}

impl Termination {
    pub fn is_converged(self) -> bool {
        matches!(
            self,
            Termination::Converged | Termination::CertifiedAtom | Termination::Stationary
        )
    }
}

/// Recorded history of a solver run. Entry `j` describes iterate
/// `indices[j]`; `steps[j]` is the step taken from it (`NaN` for the last).
/// `costs` is empty for stochastic runs, which never evaluate the objective.
#[derive(Debug, Clone)]
pub struct SolverTrace {
    pub indices: Vec<usize>,
    pub iterates: Vec<Point>,
    pub costs: Vec<f64>,
    pub subgradient_norms: Vec<f64>,
    pub steps: Vec<f64>,
    pub termination: Termination,
    /// Iterations performed.
    pub iterations: usize,
    /// Characterization residual at the returned point (`NaN` when not computed).
    pub residual: f64,
}

impl SolverTrace {
    fn new() -> Self {
        SolverTrace {
            indices: Vec::new(),
            iterates: Vec::new(),
            costs: Vec::new(),
            subgradient_norms: Vec::new(),
            steps: Vec::new(),
            termination: Termination::MaxIterations,
            iterations: 0,
            residual: f64::NAN,
        }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    fn push(&mut self, k: usize, x: &[f64], cost: Option<f64>, norm: f64, step: f64) {
        if self.indices.last() == Some(&k) {
            return;
        }
        self.indices.push(k);
        self.iterates.push(Point::from_raw(x.to_vec()));
        if let Some(c) = cost {
            self.costs.push(c);
        }
        self.subgradient_norms.push(norm);
        self.steps.push(step);
    }

    /// CSV with columns `k, step, cost, norm, x0, x1, …`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let dim = self.iterates.first().map_or(0, |p| p.coords().len());
        let mut header = vec!["k".to_string(), "step".into(), "cost".into(), "norm".into()];
        header.extend((0..dim).map(|i| format!("x{i}")));
        w.write_record(&header)?;
        for j in 0..self.len() {
            let mut row = vec![
                self.indices[j].to_string(),
                self.steps[j].to_string(),
                self.costs.get(j).map_or(String::new(), f64::to_string),
                self.subgradient_norms[j].to_string(),
            ];
            row.extend(self.iterates[j].coords().iter().map(f64::to_string));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SolverOptions {
    pub max_iter: usize,
    pub tol: f64,
    /// Record every `trace_stride`-th iterate (the final one always).
    pub trace_stride: usize,
    /// Jump onto a nearby atom once it is certified as the median.
    pub snap_to_atoms: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            max_iter: 2_000_000,
            tol: 1e-6,
            trace_stride: 1,
            snap_to_atoms: true,
        }
    }
}

impl SolverOptions {
    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::Argument(format!(
                "tolerance must be positive, got {}",
                self.tol
            )));
        }
        if self.trace_stride == 0 {
            return Err(Error::Argument("trace stride must be at least 1".into()));
        }
        Ok(())
    }
}

/// The lowest-cost atom among the first few, a cheap starting point.
pub fn default_start(measure: &DiscreteMeasure, p: f64) -> Point {
    measure
        .points()
        .iter()
        .take(START_CANDIDATES)
        .map(|y| (evaluate(measure, y.coords(), p).cost, y))
        .fold(None, |best: Option<(f64, &Point)>, (c, y)| match best {
            Some((bc, _)) if bc <= c => best,
            _ => Some((c, y)),
        })
        .map(|(_, y)| y.clone())
        .expect("measures are non-empty")
}

fn check_inside(m: &Manifold, ctx: &BallContext, x: &[f64], k: usize) -> Result<()> {
    let d = m.dist_raw(ctx.center().coords(), x);
    if d <= ctx.radius() + CONFINEMENT_SLACK {
        Ok(())
    } else {
        Err(Error::EscapedBall {
            iteration: k,
            distance: d,
            radius: ctx.radius(),
        })
    }
}

fn check_start(m: &Manifold, x0: &Point, ctx: Option<&BallContext>) -> Result<()> {
    m.validate(x0.coords())?;
    if let Some(ctx) = ctx {
        let d = m.distance(ctx.center(), x0);
        if d > ctx.radius() + CONFINEMENT_SLACK {
            return Err(Error::Argument(format!(
                "starting point is at distance {d} from the center, outside radius {}",
                ctx.radius()
            )));
        }
    }
    Ok(())
}

fn step_along(m: &Manifold, x: &[f64], dir: &[f64], scale: f64, out: &mut [f64]) -> Result<()> {
    let v: Vec<f64> = dir.iter().map(|d| scale * d).collect();
    m.exp_raw(x, &v, out)
}

/// Subgradient descent for the Fréchet median:
/// `x_{k+1} = exp_{x_k}(−t_k H(x_k)/|H(x_k)|)` with `t_k ≤ T`.
///
/// Stops when the step and the characterization residual both drop below
/// `tol`, on an exactly certified atom, or after `max_iter` iterations.
pub fn solve_median_subgradient(
    measure: &DiscreteMeasure,
    ctx: &BallContext,
    schedule: &StepSchedule,
    x0: Option<Point>,
    opts: &SolverOptions,
) -> Result<(Point, SolverTrace)> {
    opts.validate()?;
    let m = measure.manifold();
    let cap = step_cap_t(ctx)?;
    let x0 = x0.unwrap_or_else(|| default_start(measure, 1.0));
    check_start(m, &x0, Some(ctx))?;

    let mut trace = SolverTrace::new();
    let mut x = x0.into_coords();
    let mut next = vec![0.0; m.dim()];
    let mut k = 0usize;
    loop {
        let e = evaluate(measure, &x, 1.0);
        let norm = m.norm_raw(&x, &e.direction);
        let residual = (norm - e.atom_mass).max(0.0);
        let record = k % opts.trace_stride == 0;

        let stop = if e.atom_mass > 0.0 && residual == 0.0 {
            Some(Termination::CertifiedAtom)
        } else if norm == 0.0 {
            Some(Termination::Stationary)
        } else {
            None
        };
        let step = match (stop, schedule.step(k + 1)) {
            (Some(_), _) => None,
            (None, None) => {
                trace.termination = Termination::ScheduleExhausted;
                None
            }
            (None, Some(t)) => Some(t.min(cap)),
        };
        let done = match (stop, step) {
            (Some(reason), _) => Some(reason),
            (None, None) => Some(Termination::ScheduleExhausted),
            (None, Some(t)) if t < opts.tol && residual < opts.tol => Some(Termination::Converged),
            _ if k >= opts.max_iter => Some(Termination::MaxIterations),
            _ => None,
        };
        if let Some(reason) = done {
            trace.push(k, &x, Some(e.cost), norm, f64::NAN);
            trace.termination = reason;
            trace.iterations = k;
            trace.residual = residual;
            return Ok((Point::from_raw(x), trace));
        }
        let t = step.expect("step exists when not done");
        if record {
            trace.push(k, &x, Some(e.cost), norm, t);
        }

        if opts.snap_to_atoms {
            if let Some(atom) = certified_atom_within(measure, &e, t) {
                x.copy_from_slice(measure.points()[atom].coords());
                k += 1;
                continue;
            }
        }
        step_along(m, &x, &e.direction, -t / norm, &mut next)?;
        std::mem::swap(&mut x, &mut next);
        k += 1;
        check_inside(m, ctx, &x, k)?;
    }
}

fn certified_atom_within(measure: &DiscreteMeasure, e: &Evaluation, reach: f64) -> Option<usize> {
    let (i, d) = e.nearest?;
    if d > reach {
        return None;
    }
    let y = measure.points()[i].coords();
    let at = evaluate(measure, y, 1.0);
    (residual_of(measure.manifold(), y, &at) == 0.0).then_some(i)
}

/// Gradient descent for the `p`-mean, `p > 1`:
/// `x_{k+1} = exp_{x_k}(−t_k grad H_p(x_k))`.
///
/// With a context, steps are additionally capped by the admissible bound and
/// iterates are checked to stay in the ball. Stops when `|grad| < tol`.
pub fn solve_pmean_gradient(
    measure: &DiscreteMeasure,
    ctx: Option<&BallContext>,
    p: f64,
    schedule: &StepSchedule,
    x0: Option<Point>,
    opts: &SolverOptions,
) -> Result<(Point, SolverTrace)> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::Argument(format!(
            "gradient descent needs p > 1 (use the subgradient solver for p = 1), got {p}"
        )));
    }
    opts.validate()?;
    let m = measure.manifold();
    let cap = match ctx {
        Some(c) => gradient_step_cap(c, p)?,
        None => f64::INFINITY,
    };
    let x0 = x0.unwrap_or_else(|| default_start(measure, p));
    check_start(m, &x0, ctx)?;

    let mut trace = SolverTrace::new();
    let mut x = x0.into_coords();
    let mut next = vec![0.0; m.dim()];
    let mut k = 0usize;
    loop {
        let e = evaluate(measure, &x, p);
        let norm = m.norm_raw(&x, &e.direction);
        let step = schedule.step(k + 1).map(|t| t.min(cap));
        let done = if norm < opts.tol {
            Some(if norm == 0.0 {
                Termination::Stationary
            } else {
                Termination::Converged
            })
        } else if step.is_none() {
            Some(Termination::ScheduleExhausted)
        } else if k >= opts.max_iter {
            Some(Termination::MaxIterations)
        } else {
            None
        };
        if let Some(reason) = done {
            trace.push(k, &x, Some(e.cost), norm, f64::NAN);
            trace.termination = reason;
            trace.iterations = k;
            return Ok((Point::from_raw(x), trace));
        }
        let t = step.expect("step exists when not done");
        if k % opts.trace_stride == 0 {
            trace.push(k, &x, Some(e.cost), norm, t);
        }
        step_along(m, &x, &e.direction, -t, &mut next)?;
        std::mem::swap(&mut x, &mut next);
        k += 1;
        if let Some(c) = ctx {
            check_inside(m, c, &x, k)?;
        }
    }
}

#[derive(Debug, Clone)]
pub struct StochasticOptions {
    pub steps: usize,
    /// The constant bounding admissible steps from above through `1/C`, when known.
    pub c_pmuk: Option<f64>,
    pub trace_stride: usize,
}

impl Default for StochasticOptions {
    fn default() -> Self {
        StochasticOptions {
            steps: 10_000,
            c_pmuk: None,
            trace_stride: 1,
        }
    }
}

/// Stochastic gradient walk for the `p`-mean, `p ≥ 1`:
/// `X_{k+1} = exp_{X_k}(−t_{k+1} grad F_p(·, P_{k+1}))`, `F_p(x, y) = d(x, y)^p`,
/// with `P_k` drawn from `sampler` and the gradient at `x = P` taken as zero.
///
/// With a context, steps are capped by the admissible bound and iterates are
/// checked to stay in the ball.
pub fn solve_pmean_stochastic<S: PointSampler + ?Sized>(
    manifold: &Manifold,
    sampler: &mut S,
    ctx: Option<&BallContext>,
    p: f64,
    schedule: &StepSchedule,
    x0: Point,
    opts: &StochasticOptions,
) -> Result<(Point, SolverTrace)> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::Argument(format!("p must be at least 1, got {p}")));
    }
    if opts.trace_stride == 0 {
        return Err(Error::Argument("trace stride must be at least 1".into()));
    }
    let cap = match ctx {
        Some(c) => stochastic_step_cap(c, p, opts.c_pmuk)?,
        None => opts.c_pmuk.map_or(f64::INFINITY, |c| 1.0 / c),
    };
    check_start(manifold, &x0, ctx)?;

    let dim = manifold.dim();
    let mut trace = SolverTrace::new();
    let mut x = x0.into_coords();
    let mut next = vec![0.0; dim];
    let mut grad = vec![0.0; dim];
    for k in 0..opts.steps {
        let t = schedule
            .step(k + 1)
            .ok_or(Error::ScheduleExhausted(k))?
            .min(cap);
        let sample = sampler.draw().ok_or(Error::SamplerExhausted(k))?;
        manifold.validate(sample.coords())?;
        let d = manifold.log_raw(&x, sample.coords(), &mut grad);
        let scale = if d < super::functional::ATOM_EPS {
            0.0
        } else if p == 1.0 {
            1.0 / d
        } else if p == 2.0 {
            2.0
        } else {
            p * d.powf(p - 2.0)
        };
        for g in grad.iter_mut() {
            *g *= -scale;
        }
        if k % opts.trace_stride == 0 {
            let norm = manifold.norm_raw(&x, &grad);
            trace.push(k, &x, None, norm, t);
        }
        step_along(manifold, &x, &grad, -t, &mut next)?;
        std::mem::swap(&mut x, &mut next);
        if let Some(c) = ctx {
            check_inside(manifold, c, &x, k + 1)?;
        }
    }
    trace.push(opts.steps, &x, None, f64::NAN, f64::NAN);
    trace.termination = Termination::StepsCompleted;
    trace.iterations = opts.steps;
    Ok((Point::from_raw(x), trace))
}

/// Riemannian Weiszfeld iteration
/// `x ← exp_x(Σ (w/d) log_x y / Σ (w/d))`, with the step shortened by the
/// mass of an atom at `x`. Under strong negative curvature the full step can
/// overshoot into a two-cycle, so steps that fail to lower the cost are
/// halved. It moves fast towards the median but carries no certificate, so
/// its output is meant as a starting point for [`solve_median_subgradient`].
/// Stops once a step is shorter than `tol`.
pub fn weiszfeld_warm_start(
    measure: &DiscreteMeasure,
    x0: Point,
    max_iter: usize,
    tol: f64,
) -> Result<Point> {
    let m = measure.manifold();
    m.validate(x0.coords())?;
    let mut x = x0.into_coords();
    let mut next = vec![0.0; m.dim()];
    let mut buf = vec![0.0; m.dim()];
    let mut v = vec![0.0; m.dim()];
    let cost_at = |x: &[f64]| -> f64 {
        measure
            .points()
            .iter()
            .zip(measure.weights())
            .map(|(y, w)| w * m.dist_raw(x, y.coords()))
            .sum()
    };
    let mut f = cost_at(&x);
    'outer: for _ in 0..max_iter {
        v.iter_mut().for_each(|c| *c = 0.0);
        let (mut inv, mut mass) = (0.0, 0.0);
        for (y, &w) in measure.points().iter().zip(measure.weights()) {
            let d = m.log_raw(&x, y.coords(), &mut buf);
            if d < ATOM_EPS {
                mass += w;
                continue;
            }
            inv += w / d;
            for (a, b) in v.iter_mut().zip(&buf) {
                *a += w / d * b;
            }
        }
        if inv == 0.0 {
            break;
        }
        let pull = m.norm_raw(&x, &v);
        if pull <= mass {
            break;
        }
        let mut shrink = (1.0 - mass / pull) / inv;
        loop {
            if shrink * m.norm_raw(&x, &v) < tol {
                break 'outer;
            }
            let step: Vec<f64> = v.iter().map(|c| shrink * c).collect();
            m.exp_raw(&x, &step, &mut next)?;
            let f_next = cost_at(&next);
            if f_next <= f * (1.0 + 8.0 * f64::EPSILON) {
                f = f_next;
                break;
            }
            shrink *= 0.5;
        }
        std::mem::swap(&mut x, &mut next);
    }
    Ok(Point::from_raw(x))
}

/// Renormalized fluctuations `Y_k = (k/√n) log_{e_p} X_k` for the recorded
/// iterates of a stochastic run.
pub fn fluctuation_chain(
    manifold: &Manifold,
    trace: &SolverTrace,
    e_p: &Point,
    n: usize,
) -> Result<Vec<TangentVector>> {
    if n == 0 {
        return Err(Error::Argument("n must be positive".into()));
    }
    manifold.validate(e_p.coords())?;
    let root = (n as f64).sqrt();
    Ok(trace
        .indices
        .iter()
        .zip(&trace.iterates)
        .map(|(&k, x)| manifold.log(e_p, x).scaled(k as f64 / root))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::functional::characterization_residual;
    use crate::estimators::measure::{MeasureSampler, SequenceSampler};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn euclid(pts: &[&[f64]], ws: Option<&[f64]>) -> DiscreteMeasure {
        let m = Manifold::euclidean(pts[0].len()).unwrap();
        let ps: Vec<Point> = pts.iter().map(|c| m.point(c.to_vec()).unwrap()).collect();
        match ws {
            Some(w) => DiscreteMeasure::new(m, ps, w.to_vec()).unwrap(),
            None => DiscreteMeasure::uniform(m, ps).unwrap(),
        }
    }

    fn harmonic() -> StepSchedule {
        StepSchedule::harmonic(0.2).unwrap()
    }

    #[test]
    fn single_atom_median() {
        let mu = euclid(&[&[1.0, 2.0]], None);
        let ctx = BallContext::around_origin(&mu).unwrap();
        let start = mu.manifold().point(vec![0.0, 0.0]).unwrap();
        let (m, trace) =
            solve_median_subgradient(&mu, &ctx, &harmonic(), Some(start), &Default::default())
                .unwrap();
        assert_eq!(m.coords(), &[1.0, 2.0]);
        assert_eq!(trace.termination, Termination::CertifiedAtom);
    }

    #[test]
    fn heavy_atom_wins() {
        let mu = euclid(&[&[0.0], &[10.0]], Some(&[0.7, 0.3]));
        let ctx = BallContext::around_origin(&mu).unwrap();
        let start = mu.manifold().point(vec![6.0]).unwrap();
        let sched = StepSchedule::harmonic(5.0).unwrap();
        let (m, trace) =
            solve_median_subgradient(&mu, &ctx, &sched, Some(start), &Default::default()).unwrap();
        assert_eq!(m.coords(), &[0.0]);
        assert!(trace.termination.is_converged());
    }

    #[test]
    fn fermat_point_of_equilateral_triangle() {
        let s3 = 3f64.sqrt();
        let mu = euclid(&[&[0.0, 0.0], &[1.0, 0.0], &[0.5, s3 / 2.0]], None);
        let ctx = BallContext::around_origin(&mu).unwrap();
        let (m, trace) =
            solve_median_subgradient(&mu, &ctx, &harmonic(), None, &Default::default()).unwrap();
        assert!(trace.termination.is_converged());
        assert!((m.coords()[0] - 0.5).abs() < 1e-4 && (m.coords()[1] - s3 / 6.0).abs() < 1e-4);
        assert!(characterization_residual(&mu, &m).unwrap() < 1e-6);
        let best = trace.costs.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(best <= trace.costs[0]);
    }

    #[test]
    fn iterates_stay_in_the_ball() {
        let disc = Manifold::poincare_disc(1.0).unwrap();
        let pts = vec![
            disc.point(vec![0.5, 0.1]).unwrap(),
            disc.point(vec![-0.3, 0.4]).unwrap(),
            disc.point(vec![0.0, -0.6]).unwrap(),
        ];
        let mu = DiscreteMeasure::uniform(disc.clone(), pts).unwrap();
        let ctx = BallContext::around_origin(&mu).unwrap();
        let start = disc.point(vec![0.0, 0.0]).unwrap();
        let (_, trace) = solve_median_subgradient(
            &mu,
            &ctx,
            &StepSchedule::harmonic(5.0).unwrap(),
            Some(start),
            &Default::default(),
        )
        .unwrap();
        for x in &trace.iterates {
            assert!(disc.distance(ctx.center(), x) <= ctx.radius() + CONFINEMENT_SLACK);
        }
    }

    #[test]
    fn start_outside_ball_is_rejected() {
        let mu = euclid(&[&[0.0], &[1.0]], None);
        let ctx = BallContext::for_measure(&mu, mu.manifold().origin(), 2.0).unwrap();
        let far = mu.manifold().point(vec![5.0]).unwrap();
        let r = solve_median_subgradient(&mu, &ctx, &harmonic(), Some(far), &Default::default());
        assert!(matches!(r, Err(Error::Argument(_))));
    }

    #[test]
    fn pmean_examples() {
        let mu = euclid(
            &[&[0.0, 1.0], &[2.0, 5.0], &[4.0, 0.0]],
            Some(&[0.2, 0.3, 0.5]),
        );
        let opts = SolverOptions {
            tol: 1e-9,
            ..Default::default()
        };
        let sched = StepSchedule::harmonic(50.0)
            .unwrap()
            .with_cap(0.25)
            .unwrap();
        let (m, _) = solve_pmean_gradient(&mu, None, 2.0, &sched, None, &opts).unwrap();
        assert!((m.coords()[0] - 2.6).abs() < 1e-8 && (m.coords()[1] - 1.7).abs() < 1e-8);

        let single = euclid(&[&[3.0]], None);
        let (m, _) = solve_pmean_gradient(&single, None, 2.0, &sched, None, &opts).unwrap();
        assert_eq!(m.coords(), &[3.0]);

        let pair = euclid(&[&[0.0], &[1.0]], None);
        let start = pair.manifold().point(vec![0.9]).unwrap();
        let (m, _) = solve_pmean_gradient(&pair, None, 1.5, &sched, Some(start), &opts).unwrap();
        assert!((m.coords()[0] - 0.5).abs() < 1e-6);

        assert!(solve_pmean_gradient(&pair, None, 1.0, &sched, None, &opts).is_err());
    }

    #[test]
    fn pmean_with_context_respects_cap() {
        let disc = Manifold::poincare_disc(1.0).unwrap();
        let pts = vec![
            disc.point(vec![0.2, 0.1]).unwrap(),
            disc.point(vec![-0.1, 0.2]).unwrap(),
            disc.point(vec![0.0, -0.25]).unwrap(),
        ];
        let mu = DiscreteMeasure::uniform(disc.clone(), pts).unwrap();
        let ctx = BallContext::for_measure(&mu, disc.origin(), 0.6).unwrap();
        let cap = gradient_step_cap(&ctx, 2.0).unwrap();
        let opts = SolverOptions {
            tol: 1e-3,
            ..Default::default()
        };
        let (_, trace) = solve_pmean_gradient(
            &mu,
            Some(&ctx),
            2.0,
            &StepSchedule::harmonic(1.0).unwrap(),
            None,
            &opts,
        )
        .unwrap();
        assert!(trace
            .steps
            .iter()
            .filter(|t| t.is_finite())
            .all(|&t| t <= cap));
    }

    #[test]
    fn stochastic_mean_is_running_average() {
        let e2 = Manifold::euclidean(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let samples: Vec<Point> = (0..200)
            .map(|_| {
                e2.point(vec![rng.random::<f64>(), rng.random::<f64>() * 3.0])
                    .unwrap()
            })
            .collect();
        let sched = StepSchedule::custom((1..=200).map(|k| 0.5 / k as f64).collect()).unwrap();
        let mut sampler = SequenceSampler::new(samples.clone());
        let opts = StochasticOptions {
            steps: 200,
            ..Default::default()
        };
        let (_, trace) =
            solve_pmean_stochastic(&e2, &mut sampler, None, 2.0, &sched, e2.origin(), &opts)
                .unwrap();
        let mut sum = [0.0, 0.0];
        for (j, x) in trace.iterates.iter().enumerate().skip(1) {
            sum[0] += samples[j - 1].coords()[0];
            sum[1] += samples[j - 1].coords()[1];
            assert!((x.coords()[0] - sum[0] / j as f64).abs() < 1e-12);
            assert!((x.coords()[1] - sum[1] / j as f64).abs() < 1e-12);
        }
        let mut short = SequenceSampler::new(samples[..10].to_vec());
        let r = solve_pmean_stochastic(&e2, &mut short, None, 2.0, &sched, e2.origin(), &opts);
        assert!(matches!(r, Err(Error::SamplerExhausted(10))));
    }

    #[test]
    fn stochastic_single_atom_stays() {
        let mu = euclid(&[&[1.0, -1.0]], None);
        let mut sampler = MeasureSampler::new(&mu, 9);
        let opts = StochasticOptions {
            steps: 50,
            ..Default::default()
        };
        let (x, _) = solve_pmean_stochastic(
            mu.manifold(),
            &mut sampler,
            None,
            2.0,
            &StepSchedule::harmonic(0.5).unwrap(),
            mu.manifold().origin(),
            &opts,
        )
        .unwrap();
        assert_eq!(x.coords(), &[1.0, -1.0]);
    }

    #[test]
    fn fluctuation_chain_examples() {
        let e1 = Manifold::euclidean(1).unwrap();
        let mu = euclid(&[&[2.0]], None);
        let mut sampler = MeasureSampler::new(&mu, 1);
        let opts = StochasticOptions {
            steps: 20,
            ..Default::default()
        };
        let start = e1.point(vec![2.0]).unwrap();
        let (_, trace) = solve_pmean_stochastic(
            &e1,
            &mut sampler,
            None,
            2.0,
            &StepSchedule::harmonic(0.5).unwrap(),
            start.clone(),
            &opts,
        )
        .unwrap();
        let ys = fluctuation_chain(&e1, &trace, &start, 20).unwrap();
        assert!(ys.iter().all(|y| y.components()[0] == 0.0));
    }

    #[test]
    fn weiszfeld_does_not_cycle_under_strong_curvature() {
        let disc = Manifold::poincare_disc(1.0).unwrap();
        let pts = [[0.5954, -0.4477], [-0.6260, -0.0341], [-0.9482, -0.3164]]
            .iter()
            .map(|c| disc.point(c.to_vec()).unwrap())
            .collect();
        let mu = DiscreteMeasure::new(disc, pts, vec![0.4734, 0.1266, 0.4]).unwrap();
        let x = weiszfeld_warm_start(&mu, mu.points()[1].clone(), 2000, 1e-12).unwrap();
        let res = characterization_residual(&mu, &x).unwrap();
        assert!(res < 1e-6, "{res} at {:?}", x.coords());
    }
}
