//! Balls guaranteed to contain every Fréchet median when more than half of
//! the mass sits in a small ball, and an adversarial Monte-Carlo check.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimators::{
    default_start, solve_median_subgradient, weiszfeld_warm_start, BallContext, DiscreteMeasure,
    SolverOptions, StepSchedule,
};
use crate::manifold::{Manifold, Point};

/// Mass `α > 1/2` inside `B̄(a, ρ)`, with curvature and injectivity data for
/// the surrounding region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConcentrationContext {
    pub alpha: f64,
    pub rho: f64,
    pub curvature_upper: f64,
    pub injectivity_radius: f64,
}

impl ConcentrationContext {
    pub fn new(
        alpha: f64,
        rho: f64,
        curvature_upper: f64,
        injectivity_radius: f64,
    ) -> Result<Self> {
        if !(alpha > 0.5 && alpha <= 1.0) {
            return Err(Error::Argument(format!(
                "alpha must lie in (1/2, 1], got {alpha}"
            )));
        }
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::Argument(format!("rho must be positive, got {rho}")));
        }
        if curvature_upper.is_nan() {
            return Err(Error::Argument("curvature bound is NaN".into()));
        }
        if !(injectivity_radius > 0.0) {
            return Err(Error::Argument(
                "injectivity radius must be positive".into(),
            ));
        }
        Ok(ConcentrationContext {
            alpha,
            rho,
            curvature_upper,
            injectivity_radius,
        })
    }

    /// `r_* = min(π/√Δ, inj)`, with `π/√Δ = ∞` for `Δ ≤ 0`.
    pub fn r_star(&self) -> f64 {
        let conj = if self.curvature_upper > 0.0 {
            PI / self.curvature_upper.sqrt()
        } else {
            f64::INFINITY
        };
        conj.min(self.injectivity_radius)
    }

    /// Whether the coarse radius is below `r_*`.
    pub fn condition_six(&self) -> bool {
        coarse(self.alpha, self.rho) < self.r_star()
    }
}

fn coarse(alpha: f64, rho: f64) -> f64 {
    2.0 * alpha * rho / (2.0 * alpha - 1.0)
}

/// `2αρ/(2α−1)`.
pub fn coarse_ball_radius(ctx: &ConcentrationContext) -> Result<f64> {
    if !(ctx.alpha > 0.5) {
        return Err(Error::Argument(format!(
            "alpha must exceed 1/2, got {}",
            ctx.alpha
        )));
    }
    Ok(coarse(ctx.alpha, ctx.rho))
}

/// How a positive-curvature radius was certified.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Certificate {
    /// `Δ ≤ 0`: no extra hypothesis.
    NotNeeded,
    /// The coarse ball already lies within `r_*/2`.
    CoarseBallFits,
    /// The auxiliary function is non-positive at `r_*/2 − ρ`.
    AuxiliaryFunction,
}

/// `cot(√Δ(2α−1)t) − cot(√Δ t) − 2 cot(√Δ ρ)`.
pub fn auxiliary_f(alpha: f64, rho: f64, delta: f64, t: f64) -> f64 {
    let s = delta.sqrt();
    let cot = |x: f64| x.cos() / x.sin();
    cot(s * (2.0 * alpha - 1.0) * t) - cot(s * t) - 2.0 * cot(s * rho)
}

/// The refined radius and the certificate used when `Δ > 0`.
pub fn refined_ball_radius_certified(ctx: &ConcentrationContext) -> Result<(f64, Certificate)> {
    let (alpha, rho, delta) = (ctx.alpha, ctx.rho, ctx.curvature_upper);
    if !(alpha > 0.5) {
        return Err(Error::Argument(format!(
            "alpha must exceed 1/2, got {alpha}"
        )));
    }
    let r_star = ctx.r_star();
    let c = coarse(alpha, rho);
    if !(c < r_star) {
        return Err(Error::Precondition(format!(
            "coarse radius {c} is not below r_* = {r_star}"
        )));
    }
    let root = (2.0 * alpha - 1.0).sqrt();
    if delta == 0.0 {
        return Ok((alpha * rho / root, Certificate::NotNeeded));
    }
    if delta < 0.0 {
        let s = (-delta).sqrt();
        return Ok((
            (alpha * (s * rho).sinh() / root).asinh() / s,
            Certificate::NotNeeded,
        ));
    }

    let certificate = if c <= r_star / 2.0 {
        Certificate::CoarseBallFits
    } else {
        let t = r_star / 2.0 - rho;
        let t_max = rho / (2.0 * alpha - 1.0);
        if !(t > 0.0 && t <= t_max) {
            return Err(Error::NotCertified(format!(
                "condition a) fails and b) is inapplicable: t = {t} is outside (0, {t_max}]"
            )));
        }
        let f = auxiliary_f(alpha, rho, delta, t);
        if f > 0.0 {
            return Err(Error::NotCertified(format!(
                "condition a) fails and b) fails: F({t}) = {f} > 0"
            )));
        }
        Certificate::AuxiliaryFunction
    };
    let s = delta.sqrt();
    let arg = alpha * (s * rho).sin() / root;
    if arg > 1.0 {
        return Err(Error::NotCertified(format!(
            "arcsine argument {arg} exceeds 1"
        )));
    }
    Ok((arg.asin() / s, certificate))
}

/// The curvature-dependent radius refining [`coarse_ball_radius`].
pub fn refined_ball_radius(ctx: &ConcentrationContext) -> Result<f64> {
    refined_ball_radius_certified(ctx).map(|(r, _)| r)
}

/// Outcome of [`monte_carlo_robustness`].
#[derive(Debug, Clone, Serialize)]
pub struct RobustnessReport {
    /// Refined radius.
    pub bound: f64,
    pub coarse_bound: f64,
    /// Largest `d(median, a)` over all trials.
    pub max_observed: f64,
    pub trials: usize,
    /// Trials whose median fell outside the refined ball.
    pub violations: usize,
    pub coarse_violations: usize,
}

/// Absolute slack on containment, covering solver tolerance.
pub const CONTAINMENT_SLACK: f64 = 1e-4;

/// Largest distance from the center at which outliers are placed.
const OUTLIER_REACH: f64 = 6.0;

/// Builds adversarial measures with mass `α` in `B̄(o, ρ)` around the
/// manifold origin `o` and the rest outside, solves for the median of each,
/// and compares its distance to `o` with both radii.
///
/// Trials cycle through three families: two boundary atoms placed
/// symmetrically about the outlier direction (which nearly attains the flat
/// radius), random inner atoms against an outlier cluster, and random inner
/// atoms against scattered outliers.
pub fn monte_carlo_robustness(
    manifold: &Manifold,
    ctx: &ConcentrationContext,
    trials: usize,
    seed: u64,
) -> Result<RobustnessReport> {
    let (_, upper) = manifold.curvature_bounds();
    if upper > ctx.curvature_upper {
        return Err(Error::Precondition(format!(
            "manifold curvature reaches {upper}, above the context bound {}",
            ctx.curvature_upper
        )));
    }
    if manifold.injectivity_radius() < ctx.injectivity_radius {
        return Err(Error::Precondition(
            "context injectivity radius exceeds the manifold's".into(),
        ));
    }
    let bound = refined_ball_radius(ctx)?;
    let coarse_bound = coarse_ball_radius(ctx)?;
    let origin = manifold.origin();

    let distances: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mu = adversarial_measure(manifold, ctx, i, seed)?;
            let median = solve(&mu)?;
            Ok(manifold.distance(&origin, &median))
        })
        .collect::<Result<_>>()?;

    Ok(RobustnessReport {
        bound,
        coarse_bound,
        max_observed: distances.iter().cloned().fold(0.0, f64::max),
        trials,
        violations: distances
            .iter()
            .filter(|d| **d > bound + CONTAINMENT_SLACK)
            .count(),
        coarse_violations: distances
            .iter()
            .filter(|d| **d > coarse_bound + CONTAINMENT_SLACK)
            .count(),
    })
}

/// Budgets per trial. Containment needs the median's position rather than a
/// residual certificate. The admissible step cap collapses once far outliers
/// widen the ball under strong curvature, so a Weiszfeld start does the
/// travelling and the subgradient method only polishes it.
const WARM_START_ITERATIONS: usize = 10_000;
const TRIAL_ITERATIONS: usize = 50_000;
const REFINE_SCALE: f64 = 1e-4;

fn solve(mu: &DiscreteMeasure) -> Result<Point> {
    let start = weiszfeld_warm_start(mu, default_start(mu, 1.0), WARM_START_ITERATIONS, 1e-10)?;
    let ctx = BallContext::enclosing(mu, start.clone())?;
    let schedule = StepSchedule::harmonic(REFINE_SCALE)?;
    let opts = SolverOptions {
        tol: 1e-7,
        max_iter: TRIAL_ITERATIONS,
        trace_stride: usize::MAX,
        ..Default::default()
    };
    solve_median_subgradient(mu, &ctx, &schedule, Some(start), &opts).map(|(m, _)| m)
}

/// Orthonormal pair of tangent directions at `x`.
fn random_frame(m: &Manifold, x: &Point, rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<f64>) {
    let raw = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        (0..m.dim()).map(|_| rng.sample(StandardNormal)).collect()
    };
    let c = x.coords();
    let mut e1 = raw(rng);
    let n1 = m.norm_raw(c, &e1);
    e1.iter_mut().for_each(|v| *v /= n1);
    if m.dim() == 1 {
        let e2 = e1.iter().map(|v| -v).collect();
        return (e1, e2);
    }
    let mut e2 = raw(rng);
    let proj = m.inner_raw(c, &e1, &e2);
    e2.iter_mut().zip(&e1).for_each(|(v, u)| *v -= proj * u);
    let n2 = m.norm_raw(c, &e2);
    e2.iter_mut().for_each(|v| *v /= n2);
    (e1, e2)
}

fn shoot(m: &Manifold, x: &Point, dir: &[f64], len: f64) -> Result<Point> {
    let v = m.tangent(x, dir.iter().map(|d| d * len).collect())?;
    m.exp(x, &v)
}

fn unit_mix(m: &Manifold, x: &Point, a: &[f64], b: &[f64], ca: f64, cb: f64) -> Vec<f64> {
    let mut v: Vec<f64> = a.iter().zip(b).map(|(p, q)| ca * p + cb * q).collect();
    let n = m.norm_raw(x.coords(), &v);
    v.iter_mut().for_each(|c| *c /= n);
    v
}

fn split_mass(total: f64, parts: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let raw: Vec<f64> = (0..parts).map(|_| 0.2 + rng.random::<f64>()).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|w| total * w / s).collect()
}

/// The measure used by trial `trial` of [`monte_carlo_robustness`].
pub fn adversarial_measure(
    m: &Manifold,
    ctx: &ConcentrationContext,
    trial: usize,
    seed: u64,
) -> Result<DiscreteMeasure> {
    let mut rng =
        ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ trial as u64);
    let rng = &mut rng;
    let family = trial % 3;
    let origin = &m.origin();
    let (alpha, rho) = (ctx.alpha, ctx.rho);
    let (e1, e2) = random_frame(m, origin, rng);
    let mut points = Vec::new();
    let mut weights = Vec::new();

    let far = |rng: &mut ChaCha8Rng| {
        rho * (1.0 + 1e-6) + rng.random::<f64>() * (OUTLIER_REACH - rho).max(rho)
    };
    match family {
        0 => {
            let theta = rng.random::<f64>() * PI / 2.0;
            for sign in [1.0, -1.0] {
                let dir = unit_mix(m, origin, &e1, &e2, theta.cos(), sign * theta.sin());
                points.push(shoot(m, origin, &dir, rho)?);
                weights.push(alpha / 2.0);
            }
            if alpha < 1.0 {
                points.push(shoot(m, origin, &e1, far(rng))?);
                weights.push(1.0 - alpha);
            }
        }
        _ => {
            let n_in = rng.random_range(1..=4);
            for w in split_mass(alpha, n_in, rng) {
                let (a, b): (f64, f64) = (rng.sample(StandardNormal), rng.sample(StandardNormal));
                let dir = unit_mix(m, origin, &e1, &e2, a, b);
                let r = if rng.random::<bool>() {
                    rho
                } else {
                    rho * rng.random::<f64>()
                };
                points.push(shoot(m, origin, &dir, r)?);
                weights.push(w);
            }
            if alpha < 1.0 {
                let n_out = rng.random_range(1..=3);
                for w in split_mass(1.0 - alpha, n_out, rng) {
                    let dir = if family == 1 {
                        let spread = 0.2 * rng.sample::<f64, _>(StandardNormal);
                        unit_mix(m, origin, &e1, &e2, 1.0, spread)
                    } else {
                        let (a, b): (f64, f64) =
                            (rng.sample(StandardNormal), rng.sample(StandardNormal));
                        unit_mix(m, origin, &e1, &e2, a, b)
                    };
                    points.push(shoot(m, origin, &dir, far(rng))?);
                    weights.push(w);
                }
            }
        }
    }
    let total: f64 = weights.iter().sum();
    let weights = weights.into_iter().map(|w| w / total).collect();
    DiscreteMeasure::new(m.clone(), points, weights)
}
