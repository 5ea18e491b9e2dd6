use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::manifold::Point;

use super::context::{comparison_c, gd_bound_constant, gradient_step_cap, step_cap_t, BallContext};
use super::functional::cost;
use super::measure::DiscreteMeasure;
use super::schedule::StepSchedule;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// Bounds `d²(x_k, m)`.
    SquaredDistance,
    /// Bounds `H_p(x_k) − H_p(e_p)`.
    CostGap,
}

/// The sequence `b_{k+1} = (1 − c t_k) b_k + C t_k²` started at `b_N = initial`.
#[derive(Debug, Clone)]
pub struct ErrorEnvelope {
    pub kind: BoundKind,
    pub start: usize,
    pub initial: f64,
    pub contraction: f64,
    pub constant: f64,
    /// `t_N, t_{N+1}, …`.
    pub steps: Vec<f64>,
    /// `b_N, b_{N+1}, …`, one more entry than `steps`.
    pub values: Vec<f64>,
}

impl ErrorEnvelope {
    pub fn from_steps(
        kind: BoundKind,
        start: usize,
        initial: f64,
        contraction: f64,
        constant: f64,
        steps: Vec<f64>,
    ) -> Self {
        let mut values = Vec::with_capacity(steps.len() + 1);
        let mut b = initial;
        values.push(b);
        for &t in &steps {
            b = (1.0 - contraction * t) * b + constant * t * t;
            values.push(b);
        }
        ErrorEnvelope {
            kind,
            start,
            initial,
            contraction,
            constant,
            steps,
            values,
        }
    }

    /// `b_k` from the recursion.
    pub fn value(&self, k: usize) -> Option<f64> {
        self.values.get(k.checked_sub(self.start)?).copied()
    }

    /// `b_k` from the explicit product/sum formula, in `O(k − N)` operations.
    pub fn closed_form(&self, k: usize) -> Option<f64> {
        let n = k.checked_sub(self.start)?;
        if n > self.steps.len() {
            return None;
        }
        if n == 0 {
            return Some(self.initial);
        }
        let t = &self.steps[..n];
        let factors: Vec<f64> = t.iter().map(|ti| 1.0 - self.contraction * ti).collect();
        // tail[j] = Π_{i ≥ j} factors[i]
        let tail = if factors.iter().all(|f| *f > 0.0) {
            let mut logs = vec![0.0; n + 1];
            for j in (0..n).rev() {
                logs[j] = logs[j + 1] + factors[j].ln();
            }
            logs.into_iter().map(f64::exp).collect::<Vec<_>>()
        } else {
            let mut prods = vec![1.0; n + 1];
            for j in (0..n).rev() {
                prods[j] = prods[j + 1] * factors[j];
            }
            prods
        };
        let sum: f64 = (1..n).map(|j| t[j - 1] * t[j - 1] * tail[j]).sum();
        Some(self.initial * tail[0] + self.constant * (sum + t[n - 1] * t[n - 1]))
    }
}

/// Envelope `b_k ≥ d²(x_k, m)` for the subgradient median iterates from
/// index `n_start` on, given a strong-convexity constant `tau` with
/// `f(x) ≥ f_* + τ d²(x, m)` on the ball.
pub fn error_bound_sequence(
    ctx: &BallContext,
    schedule: &StepSchedule,
    tau: f64,
    n_start: usize,
    len: usize,
) -> Result<ErrorEnvelope> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::Argument(format!("tau must be positive, got {tau}")));
    }
    let cap = step_cap_t(ctx)?;
    let steps = (n_start..n_start + len)
        .map(|k| {
            schedule
                .step(k + 1)
                .map(|t| t.min(cap))
                .ok_or(Error::ScheduleExhausted(k))
        })
        .collect::<Result<Vec<_>>>()?;
    let reach = ctx.radius() + ctx.support_radius();
    Ok(ErrorEnvelope::from_steps(
        BoundKind::SquaredDistance,
        n_start,
        reach * reach,
        2.0 * tau,
        comparison_c(ctx.radius(), ctx.curvature_lower()),
        steps,
    ))
}

/// Error envelopes for gradient descent on the `p`-mean: `d²(x_k, e_p)` for
/// `1 < p < 2` and the cost gap for `p ≥ 2`. Steps are the solver's, capped by
/// the admissible bound, and must stay below `1/c_pmuk`.
pub fn gd_error_bounds(
    ctx: &BallContext,
    p: f64,
    schedule: &StepSchedule,
    c_pmuk: f64,
    len: usize,
) -> Result<ErrorEnvelope> {
    if !(c_pmuk > 0.0 && c_pmuk.is_finite()) {
        return Err(Error::Argument(format!(
            "constant must be positive, got {c_pmuk}"
        )));
    }
    let cap = gradient_step_cap(ctx, p)?;
    let steps = schedule.steps(len, cap)?;
    if let Some((k, t)) = steps.iter().enumerate().find(|(_, t)| **t * c_pmuk >= 1.0) {
        return Err(Error::Precondition(format!(
            "step t_{k} = {t} is not below 1/{c_pmuk}"
        )));
    }
    let r = ctx.radius();
    let (kind, initial) = if p < 2.0 {
        (BoundKind::SquaredDistance, 4.0 * r * r)
    } else {
        (BoundKind::CostGap, (2.0 * r).powf(p))
    };
    Ok(ErrorEnvelope::from_steps(
        kind,
        0,
        initial,
        c_pmuk,
        gd_bound_constant(ctx.beta(), r, p),
        steps,
    ))
}

/// Safety factor applied to the smallest sampled ratio.
pub const TAU_SAFETY: f64 = 0.5;

/// Empirical lower bound for `τ` in `f(x) ≥ f_* + τ d²(x, m)` over the ball:
/// the smallest ratio `(f(x) − f(m)) / d²(x, m)` over random points of the
/// ball (half of them on its boundary sphere), times [`TAU_SAFETY`].
pub fn estimate_tau(
    measure: &DiscreteMeasure,
    ctx: &BallContext,
    median: &Point,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    let m = measure.manifold();
    let f_star = cost(measure, median, 1.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let min_dist = 1e-3 * ctx.radius();
    let mut best = f64::INFINITY;
    for i in 0..samples {
        let comps: Vec<f64> = (0..m.dim()).map(|_| rng.sample(StandardNormal)).collect();
        let v = m.tangent(ctx.center(), comps)?;
        let len = m.norm(ctx.center(), &v)?;
        if len == 0.0 {
            continue;
        }
        let frac = if i % 2 == 0 {
            1.0
        } else {
            rng.random::<f64>().powf(1.0 / m.dim() as f64)
        };
        let x = m.exp(ctx.center(), &v.scaled(frac * ctx.radius() / len))?;
        let d = m.distance(&x, median);
        if d < min_dist {
            continue;
        }
        best = best.min((cost(measure, &x, 1.0)? - f_star) / (d * d));
    }
    if !(best > 0.0 && best.is_finite()) {
        return Err(Error::Precondition(format!(
            "no positive curvature ratio found (smallest {best}); is the median correct?"
        )));
    }
    Ok(TAU_SAFETY * best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::Manifold;

    #[test]
    fn zero_steps_keep_the_initial_value() {
        let env =
            ErrorEnvelope::from_steps(BoundKind::SquaredDistance, 3, 2.25, 1.0, 1.0, vec![0.0; 5]);
        assert!(env.values.iter().all(|b| *b == 2.25));
        assert_eq!(env.closed_form(8), Some(2.25));
        assert_eq!(env.value(2), None);
    }

    #[test]
    fn recursion_matches_closed_form() {
        let steps: Vec<f64> = (0..300).map(|k| 1.0 / (k as f64 + 1.0)).collect();
        let env = ErrorEnvelope::from_steps(BoundKind::SquaredDistance, 0, 1.0, 1.0, 1.0, steps);
        for k in 0..=300 {
            let (a, b) = (env.value(k).unwrap(), env.closed_form(k).unwrap());
            assert!(
                (a - b).abs() <= 1e-12 * a.abs().max(1.0),
                "k={k}: {a} vs {b}"
            );
        }
        assert!(env.values[300] < 0.05);
    }

    #[test]
    fn recursion_decreases_once_contraction_dominates() {
        let steps: Vec<f64> = (0..200).map(|k| 0.5 / (k as f64 + 1.0)).collect();
        let env =
            ErrorEnvelope::from_steps(BoundKind::SquaredDistance, 0, 4.0, 1.0, 1.0, steps.clone());
        for k in 0..200 {
            let b = env.values[k];
            if steps[k] * b > steps[k] * steps[k] {
                assert!(env.values[k + 1] < b);
            }
        }
    }

    #[test]
    fn gd_bounds_kinds_and_precondition() {
        let c = BallContext::new(
            Manifold::euclidean(1).unwrap().origin(),
            1.0,
            0.0,
            0.0,
            f64::INFINITY,
            0.5,
        )
        .unwrap();
        let s = StepSchedule::harmonic(1.0).unwrap();
        let b = gd_error_bounds(&c, 1.5, &s, 1.0, 50).unwrap();
        assert_eq!(b.kind, BoundKind::SquaredDistance);
        assert_eq!(b.initial, 4.0);
        let c2 = gd_error_bounds(&c, 3.0, &s, 1.0, 50).unwrap();
        assert_eq!(c2.kind, BoundKind::CostGap);
        assert_eq!(c2.initial, 8.0);
        let cap = gradient_step_cap(&c, 1.5).unwrap();
        assert!(matches!(
            gd_error_bounds(&c, 1.5, &s, 2.0 / cap, 5),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn tau_for_a_symmetric_pair_on_the_line() {
        let line = Manifold::euclidean(1).unwrap();
        let pts = vec![
            line.point(vec![-1.0]).unwrap(),
            line.point(vec![1.0]).unwrap(),
            line.point(vec![0.0]).unwrap(),
        ];
        let mu = DiscreteMeasure::uniform(line.clone(), pts).unwrap();
        let ctx = BallContext::for_measure(&mu, line.origin(), 2.0).unwrap();
        let tau = estimate_tau(&mu, &ctx, &line.origin(), 400, 1).unwrap();
        // The gap ratio (f(x) − f(0))/x² bottoms out at 1/3, attained at |x| = 1 and |x| = 2.
        assert!((tau - 1.0 / 6.0).abs() < 1e-12);
    }
}
