use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::manifold::Point;

use super::measure::DiscreteMeasure;

/// A closed ball `B̄(a, ρ)` containing the support of a measure, together with
/// the curvature data of the ambient manifold on that ball.
#[derive(Debug, Clone)]
pub struct BallContext {
    center: Point,
    radius: f64,
    curvature_lower: f64,
    curvature_upper: f64,
    injectivity_radius: f64,
    support_radius: f64,
}

impl BallContext {
    pub fn new(
        center: Point,
        radius: f64,
        curvature_lower: f64,
        curvature_upper: f64,
        injectivity_radius: f64,
        support_radius: f64,
    ) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Context(format!(
                "radius must be positive, got {radius}"
            )));
        }
        if !(support_radius >= 0.0 && support_radius <= radius) {
            return Err(Error::Context(format!(
                "support radius {support_radius} must lie in [0, {radius}]"
            )));
        }
        if !(curvature_lower <= curvature_upper) {
            return Err(Error::Context(format!(
                "curvature bounds out of order: {curvature_lower} > {curvature_upper}"
            )));
        }
        if !(injectivity_radius > 0.0) {
            return Err(Error::Context("injectivity radius must be positive".into()));
        }
        let limit = max_radius(curvature_upper, injectivity_radius);
        if !(radius < limit) {
            return Err(Error::Context(format!(
                "radius {radius} is not below the convexity limit {limit}"
            )));
        }
        Ok(BallContext {
            center,
            radius,
            curvature_lower,
            curvature_upper,
            injectivity_radius,
            support_radius,
        })
    }

    /// Context for `measure` in the ball `B̄(center, radius)`, with curvature
    /// data read off the manifold.
    pub fn for_measure(measure: &DiscreteMeasure, center: Point, radius: f64) -> Result<Self> {
        let m = measure.manifold();
        m.validate(center.coords())?;
        let sigma = measure.support_radius(&center);
        let (lower, upper) = m.curvature_bounds();
        Self::new(center, radius, lower, upper, m.injectivity_radius(), sigma)
    }

    /// Like [`BallContext::for_measure`], choosing the radius in `(σ, 2σ + 1]`
    /// that maximizes the subgradient step cap.
    pub fn enclosing(measure: &DiscreteMeasure, center: Point) -> Result<Self> {
        let m = measure.manifold();
        m.validate(center.coords())?;
        let sigma = measure.support_radius(&center);
        let (lower, upper) = m.curvature_bounds();
        let inj = m.injectivity_radius();
        let hi = (2.0 * sigma + 1.0).min(max_radius(upper, inj) * (1.0 - 1e-9));
        if !(hi > sigma) {
            return Err(Error::Context(format!(
                "support radius {sigma} leaves no admissible ball"
            )));
        }
        let cap = |rho: f64| cap_t(rho, sigma, lower, upper);
        let rho = golden_section_max(cap, sigma, hi, 1e-10);
        Self::new(center, rho, lower, upper, inj, sigma)
    }

    /// Centers the ball at the manifold origin.
    pub fn around_origin(measure: &DiscreteMeasure) -> Result<Self> {
        Self::enclosing(measure, measure.manifold().origin())
    }

    pub fn center(&self) -> &Point {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn curvature_lower(&self) -> f64 {
        self.curvature_lower
    }

    pub fn curvature_upper(&self) -> f64 {
        self.curvature_upper
    }

    pub fn injectivity_radius(&self) -> f64 {
        self.injectivity_radius
    }

    pub fn support_radius(&self) -> f64 {
        self.support_radius
    }

    /// `√−δ`, or zero for non-negative lower bounds.
    pub fn beta(&self) -> f64 {
        (-self.curvature_lower).max(0.0).sqrt()
    }
}

fn max_radius(upper: f64, inj: f64) -> f64 {
    let conv = if upper > 0.0 {
        PI / (4.0 * upper.sqrt())
    } else {
        f64::INFINITY
    };
    conv.min(inj / 2.0)
}

/// `x coth x`, continuous at 0.
pub(crate) fn x_coth_x(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 + x * x / 3.0
    } else {
        x / x.tanh()
    }
}

/// Lower-curvature comparison factor `C(ρ, δ)`.
pub fn comparison_c(rho: f64, delta: f64) -> f64 {
    if delta >= 0.0 {
        1.0
    } else {
        x_coth_x(2.0 * rho * (-delta).sqrt())
    }
}

/// Upper-curvature comparison factor `F(ρ, Δ)`.
pub fn comparison_f(rho: f64, upper: f64) -> f64 {
    if upper >= 0.0 {
        1.0
    } else {
        (2.0 * rho * (-upper).sqrt()).cosh()
    }
}

fn cap_t(rho: f64, sigma: f64, lower: f64, upper: f64) -> f64 {
    (rho - sigma) / (comparison_c(rho, lower) * comparison_f(rho, upper) + 1.0)
}

/// Largest admissible subgradient step `T = (ρ−σ)/(C(ρ,δ)F(ρ,Δ)+1)`.
pub fn step_cap_t(ctx: &BallContext) -> Result<f64> {
    if !(ctx.support_radius < ctx.radius) {
        return Err(Error::Context(format!(
            "support radius {} must be strictly inside radius {}",
            ctx.support_radius, ctx.radius
        )));
    }
    Ok(cap_t(
        ctx.radius,
        ctx.support_radius,
        ctx.curvature_lower,
        ctx.curvature_upper,
    ))
}

/// `β coth(2βr)` with its `β → 0` limit `1/(2r)`.
fn beta_coth(beta: f64, r: f64) -> f64 {
    x_coth_x(2.0 * beta * r) / (2.0 * r)
}

fn margin(ctx: &BallContext) -> Result<f64> {
    let eps = (ctx.radius - ctx.support_radius) / 2.0;
    if !(eps > 0.0) {
        return Err(Error::Context(
            "support must lie strictly inside the ball".into(),
        ));
    }
    Ok(eps)
}

/// Checks `r < r_{α,p}`: half the injectivity radius, and below `π/(4α)`
/// (`1 < p < 2`) or `π/(2α)` (`p ≥ 2`) when the upper bound is `α² > 0`.
pub fn check_mean_radius(ctx: &BallContext, p: f64) -> Result<()> {
    let alpha = ctx.curvature_upper.max(0.0).sqrt();
    let conv = if alpha > 0.0 {
        if p < 2.0 {
            PI / (2.0 * alpha)
        } else {
            PI / alpha
        }
    } else {
        f64::INFINITY
    };
    let limit = 0.5 * conv.min(ctx.injectivity_radius);
    if ctx.radius < limit {
        Ok(())
    } else {
        Err(Error::Context(format!(
            "radius {} is not below {limit} required for p = {p}",
            ctx.radius
        )))
    }
}

/// Largest admissible gradient-descent step for the `p`-mean,
/// `pε^{p+1} / (πp²(2r)^{2p−1} β coth(2βr) + pε^p)` with `ε = (r−σ)/2`.
pub fn gradient_step_cap(ctx: &BallContext, p: f64) -> Result<f64> {
    if !(p > 1.0) {
        return Err(Error::Argument(format!("p must exceed 1, got {p}")));
    }
    check_mean_radius(ctx, p)?;
    let eps = margin(ctx)?;
    let r = ctx.radius;
    let denom =
        PI * p * p * (2.0 * r).powf(2.0 * p - 1.0) * beta_coth(ctx.beta(), r) + p * eps.powf(p);
    Ok(p * eps.powf(p + 1.0) / denom)
}

/// Largest admissible stochastic step, `min(1/C, (r−σ)/(2p(2r)^{p−1}))`;
/// the first term is dropped when `c_pmuk` is unknown.
pub fn stochastic_step_cap(ctx: &BallContext, p: f64, c_pmuk: Option<f64>) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::Argument(format!("p must be at least 1, got {p}")));
    }
    let gap = 2.0 * margin(ctx)?;
    let r = ctx.radius;
    let geometric = gap / (2.0 * p * (2.0 * r).powf(p - 1.0));
    match c_pmuk {
        Some(c) if !(c > 0.0) => Err(Error::Argument(format!(
            "constant must be positive, got {c}"
        ))),
        Some(c) => Ok(geometric.min(1.0 / c)),
        None => Ok(geometric),
    }
}

/// The constant `C(β, r, p)` of the gradient-descent error estimates.
pub fn gd_bound_constant(beta: f64, r: f64, p: f64) -> f64 {
    if p < 2.0 {
        p * p * (2.0 * r).powf(2.0 * p - 1.0) * beta_coth(beta, r)
    } else {
        p.powi(3) * (2.0 * r).powf(3.0 * p - 4.0) * (x_coth_x(2.0 * beta * r) + p - 2.0)
    }
}

fn golden_section_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - g * (hi - lo);
    let mut b = lo + g * (hi - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    while hi - lo > tol * (1.0 + hi.abs()) {
        if fa < fb {
            lo = a;
            a = b;
            fa = fb;
            b = lo + g * (hi - lo);
            fb = f(b);
        } else {
            hi = b;
            b = a;
            fb = fa;
            a = hi - g * (hi - lo);
            fa = f(a);
        }
    }
    (lo + hi) / 2.0
}
