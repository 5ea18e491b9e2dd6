//! Metric geometry of the supported manifolds.
//!
//! Every manifold is described by a [`Manifold`] value and points are stored as
//! flat real coordinate vectors:
//!
//! * `euclidean(d)`: `d` Cartesian coordinates;
//! * `positive_reals(w)`: one positive coordinate `P`, metric `w dP²/P²`;
//! * `poincare_disc(w)`: `(re, im)` of a complex number of modulus `< 1`,
//!   metric `w |dz|²/(1 − |z|²)²` (curvature `−4/w`);
//! * `product(..)`: the concatenation of the factor coordinates with the
//!   product metric, so the squared distance is the sum of squared factor
//!   distances.
//!
//! Tangent vectors use the same layout as the coordinates of their base point.
//! All factors are either flat or Cartan-Hadamard, so `exp` and `log` are
//! globally defined and mutually inverse.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Disc points must satisfy `|z| ≤ 1 − DISC_BOUNDARY_MARGIN`.
pub const DISC_BOUNDARY_MARGIN: f64 = 1e-12;

/// The concrete geometry behind a [`Manifold`].
#[derive(Debug, Clone, PartialEq)]
pub enum ManifoldKind {
    Euclidean(usize),
    PositiveReals(f64),
    PoincareDisc(f64),
    Product(Vec<Manifold>),
}

/// A registered Riemannian manifold.
#[derive(Debug, Clone, PartialEq)]
pub struct Manifold {
    kind: ManifoldKind,
    dim: usize,
}

/// A validated point, stored as its flat coordinate vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Point(Vec<f64>);

impl Point {
    pub(crate) fn from_raw(coords: Vec<f64>) -> Self {
        Point(coords)
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.0
    }
}

/// A tangent vector together with the point it is attached to.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    base: Point,
    components: Vec<f64>,
}

impl TangentVector {
    pub fn base(&self) -> &Point {
        &self.base
    }

    pub fn components(&self) -> &[f64] {
        &self.components
    }

    pub fn scaled(&self, factor: f64) -> TangentVector {
        TangentVector {
            base: self.base.clone(),
            components: self.components.iter().map(|c| c * factor).collect(),
        }
    }
}

impl Manifold {
    pub fn euclidean(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Argument(
                "euclidean dimension must be positive".into(),
            ));
        }
        Ok(Manifold {
            kind: ManifoldKind::Euclidean(dim),
            dim,
        })
    }

    pub fn positive_reals(weight: f64) -> Result<Self> {
        check_weight(weight)?;
        Ok(Manifold {
            kind: ManifoldKind::PositiveReals(weight),
            dim: 1,
        })
    }

    pub fn poincare_disc(weight: f64) -> Result<Self> {
        check_weight(weight)?;
        Ok(Manifold {
            kind: ManifoldKind::PoincareDisc(weight),
            dim: 2,
        })
    }

    pub fn product(factors: Vec<Manifold>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::Argument("product needs at least one factor".into()));
        }
        let dim = factors.iter().map(|f| f.dim).sum();
        Ok(Manifold {
            kind: ManifoldKind::Product(factors),
            dim,
        })
    }

    pub fn kind(&self) -> &ManifoldKind {
        &self.kind
    }

    /// Number of real coordinates of a point.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Lower and upper bounds of the sectional curvature.
    pub fn curvature_bounds(&self) -> (f64, f64) {
        match &self.kind {
            ManifoldKind::Euclidean(_) | ManifoldKind::PositiveReals(_) => (0.0, 0.0),
            ManifoldKind::PoincareDisc(w) => (-4.0 / w, -4.0 / w),
            ManifoldKind::Product(factors) if factors.len() == 1 => factors[0].curvature_bounds(),
            ManifoldKind::Product(factors) => {
                // mixed planes are flat
                factors.iter().fold((0.0_f64, 0.0_f64), |(lo, hi), f| {
                    let (l, h) = f.curvature_bounds();
                    (lo.min(l), hi.max(h))
                })
            }
        }
    }

    /// Every supported factor is flat or Cartan-Hadamard.
    pub fn injectivity_radius(&self) -> f64 {
        f64::INFINITY
    }

    /// A canonical base point: the origin, `P = 1`, or the disc centre.
    pub fn origin(&self) -> Point {
        let mut coords = vec![0.0; self.dim];
        self.fill_origin(&mut coords);
        Point(coords)
    }

    fn fill_origin(&self, out: &mut [f64]) {
        match &self.kind {
            ManifoldKind::PositiveReals(_) => out[0] = 1.0,
            ManifoldKind::Product(factors) => {
                let mut off = 0;
                for f in factors {
                    f.fill_origin(&mut out[off..off + f.dim]);
                    off += f.dim;
                }
            }
            _ => out.iter_mut().for_each(|c| *c = 0.0),
        }
    }

    /// Checks that `coords` are the coordinates of a point of this manifold.
    pub fn validate(&self, coords: &[f64]) -> Result<()> {
        if coords.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: coords.len(),
            });
        }
        if let Some(c) = coords.iter().find(|c| !c.is_finite()) {
            return Err(Error::InvalidPoint(format!("non-finite coordinate {c}")));
        }
        match &self.kind {
            ManifoldKind::Euclidean(_) => Ok(()),
            ManifoldKind::PositiveReals(_) => {
                if coords[0] > 0.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidPoint(format!(
                        "positive coordinate required, got {}",
                        coords[0]
                    )))
                }
            }
            ManifoldKind::PoincareDisc(_) => {
                let modulus = coords[0].hypot(coords[1]);
                if modulus <= 1.0 - DISC_BOUNDARY_MARGIN {
                    Ok(())
                } else {
                    Err(Error::InvalidPoint(format!(
                        "disc point with modulus {modulus} is not inside the open disc"
                    )))
                }
            }
            ManifoldKind::Product(factors) => {
                let mut off = 0;
                for f in factors {
                    f.validate(&coords[off..off + f.dim])?;
                    off += f.dim;
                }
                Ok(())
            }
        }
    }

    pub fn point(&self, coords: Vec<f64>) -> Result<Point> {
        self.validate(&coords)?;
        Ok(Point(coords))
    }

    pub fn tangent(&self, base: &Point, components: Vec<f64>) -> Result<TangentVector> {
        self.check_point(base)?;
        if components.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: components.len(),
            });
        }
        if components.iter().any(|c| !c.is_finite()) {
            return Err(Error::Argument("tangent components must be finite".into()));
        }
        Ok(TangentVector {
            base: base.clone(),
            components,
        })
    }

    pub fn zero_tangent(&self, base: &Point) -> TangentVector {
        TangentVector {
            base: base.clone(),
            components: vec![0.0; self.dim],
        }
    }

    fn check_point(&self, x: &Point) -> Result<()> {
        if x.0.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.0.len(),
            });
        }
        Ok(())
    }

    fn check_base(&self, x: &Point, v: &TangentVector) -> Result<()> {
        self.check_point(x)?;
        if v.base != *x {
            return Err(Error::BaseMismatch);
        }
        Ok(())
    }

    /// Riemannian distance.
    pub fn distance(&self, x: &Point, y: &Point) -> f64 {
        assert_eq!(x.0.len(), self.dim, "point dimension mismatch");
        assert_eq!(y.0.len(), self.dim, "point dimension mismatch");
        self.sq_dist_raw(&x.0, &y.0).sqrt()
    }

    /// Exponential map `exp_x(v)`.
    pub fn exp(&self, x: &Point, v: &TangentVector) -> Result<Point> {
        self.check_base(x, v)?;
        let mut out = vec![0.0; self.dim];
        self.exp_raw(&x.0, &v.components, &mut out)?;
        Ok(Point(out))
    }

    /// Logarithm map `exp_x^{-1}(y)`; its norm equals `d(x, y)`.
    pub fn log(&self, x: &Point, y: &Point) -> TangentVector {
        assert_eq!(x.0.len(), self.dim, "point dimension mismatch");
        assert_eq!(y.0.len(), self.dim, "point dimension mismatch");
        let mut out = vec![0.0; self.dim];
        self.log_raw(&x.0, &y.0, &mut out);
        TangentVector {
            base: x.clone(),
            components: out,
        }
    }

    /// Point at arc length `s` along the minimizing geodesic from `x` to `y`.
    pub fn geodesic_point(&self, x: &Point, y: &Point, s: f64) -> Result<Point> {
        let d = self.distance(x, y);
        let slack = 1e-12 * d.max(1.0);
        if !(s >= -slack && s <= d + slack) {
            return Err(Error::Argument(format!("arc length {s} outside [0, {d}]")));
        }
        if d == 0.0 {
            return Ok(x.clone());
        }
        let s = s.clamp(0.0, d);
        let mut v = vec![0.0; self.dim];
        self.log_raw(&x.0, &y.0, &mut v);
        let frac = s / d;
        v.iter_mut().for_each(|c| *c *= frac);
        let mut out = vec![0.0; self.dim];
        self.exp_raw(&x.0, &v, &mut out)?;
        Ok(Point(out))
    }

    /// Riemannian inner product of two tangent vectors at `x`.
    pub fn inner(&self, x: &Point, u: &TangentVector, v: &TangentVector) -> Result<f64> {
        self.check_base(x, u)?;
        self.check_base(x, v)?;
        Ok(self.inner_raw(&x.0, &u.components, &v.components))
    }

    pub fn norm(&self, x: &Point, v: &TangentVector) -> Result<f64> {
        Ok(self.inner(x, v, v)?.max(0.0).sqrt())
    }

    // Unchecked slice-level primitives used by the solvers.

    /// Squared distance between raw coordinate slices.
    pub fn sq_dist_raw(&self, x: &[f64], y: &[f64]) -> f64 {
        match &self.kind {
            ManifoldKind::Euclidean(_) => x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum(),
            ManifoldKind::PositiveReals(w) => {
                let s = (y[0] / x[0]).ln();
                w * s * s
            }
            ManifoldKind::PoincareDisc(w) => {
                let t = disc_distance(cx(x), cx(y));
                w * t * t
            }
            ManifoldKind::Product(factors) => {
                let mut off = 0;
                let mut acc = 0.0;
                for f in factors {
                    acc += f.sq_dist_raw(&x[off..off + f.dim], &y[off..off + f.dim]);
                    off += f.dim;
                }
                acc
            }
        }
    }

    pub fn dist_raw(&self, x: &[f64], y: &[f64]) -> f64 {
        self.sq_dist_raw(x, y).sqrt()
    }

    /// Writes `exp_x^{-1}(y)` into `out` and returns `d(x, y)`.
    pub fn log_raw(&self, x: &[f64], y: &[f64], out: &mut [f64]) -> f64 {
        self.log_sq_raw(x, y, out).sqrt()
    }

    fn log_sq_raw(&self, x: &[f64], y: &[f64], out: &mut [f64]) -> f64 {
        match &self.kind {
            ManifoldKind::Euclidean(_) => {
                let mut acc = 0.0;
                for ((o, a), b) in out.iter_mut().zip(x).zip(y) {
                    *o = b - a;
                    acc += *o * *o;
                }
                acc
            }
            ManifoldKind::PositiveReals(w) => {
                let s = (y[0] / x[0]).ln();
                out[0] = x[0] * s;
                w * s * s
            }
            ManifoldKind::PoincareDisc(w) => {
                let mu = cx(x);
                let m = mobius_to_origin(mu, cx(y));
                let a = m.norm();
                if a == 0.0 {
                    out[0] = 0.0;
                    out[1] = 0.0;
                    return 0.0;
                }
                let tau = a.atanh();
                let v = m * ((1.0 - mu.norm_sqr()) * tau / a);
                out[0] = v.re;
                out[1] = v.im;
                w * tau * tau
            }
            ManifoldKind::Product(factors) => {
                let mut off = 0;
                let mut acc = 0.0;
                for f in factors {
                    let r = off..off + f.dim;
                    acc += f.log_sq_raw(&x[r.clone()], &y[r.clone()], &mut out[r]);
                    off += f.dim;
                }
                acc
            }
        }
    }

    /// Writes `exp_x(v)` into `out`.
    pub fn exp_raw(&self, x: &[f64], v: &[f64], out: &mut [f64]) -> Result<()> {
        match &self.kind {
            ManifoldKind::Euclidean(_) => {
                for ((o, a), b) in out.iter_mut().zip(x).zip(v) {
                    *o = a + b;
                }
                Ok(())
            }
            ManifoldKind::PositiveReals(_) => {
                let p = x[0] * (v[0] / x[0]).exp();
                if !(p > 0.0 && p.is_finite()) {
                    return Err(Error::LeftDomain(format!(
                        "positive factor overflowed (P = {}, v = {})",
                        x[0], v[0]
                    )));
                }
                out[0] = p;
                Ok(())
            }
            ManifoldKind::PoincareDisc(_) => {
                let mu = cx(x);
                let vel = cx(v);
                let z = disc_exp(mu, vel);
                if !(z.norm() <= 1.0 - DISC_BOUNDARY_MARGIN) {
                    return Err(Error::LeftDomain(format!(
                        "disc factor reached modulus {}",
                        z.norm()
                    )));
                }
                out[0] = z.re;
                out[1] = z.im;
                Ok(())
            }
            ManifoldKind::Product(factors) => {
                let mut off = 0;
                for f in factors {
                    let r = off..off + f.dim;
                    f.exp_raw(&x[r.clone()], &v[r.clone()], &mut out[r])?;
                    off += f.dim;
                }
                Ok(())
            }
        }
    }

    pub fn inner_raw(&self, x: &[f64], u: &[f64], v: &[f64]) -> f64 {
        match &self.kind {
            ManifoldKind::Euclidean(_) => u.iter().zip(v).map(|(a, b)| a * b).sum(),
            ManifoldKind::PositiveReals(w) => w * u[0] * v[0] / (x[0] * x[0]),
            ManifoldKind::PoincareDisc(w) => {
                let c = 1.0 - cx(x).norm_sqr();
                w * (u[0] * v[0] + u[1] * v[1]) / (c * c)
            }
            ManifoldKind::Product(factors) => {
                let mut off = 0;
                let mut acc = 0.0;
                for f in factors {
                    let r = off..off + f.dim;
                    acc += f.inner_raw(&x[r.clone()], &u[r.clone()], &v[r]);
                    off += f.dim;
                }
                acc
            }
        }
    }

    pub fn norm_raw(&self, x: &[f64], v: &[f64]) -> f64 {
        self.inner_raw(x, v, v).max(0.0).sqrt()
    }
}

fn check_weight(weight: f64) -> Result<()> {
    if weight > 0.0 && weight.is_finite() {
        Ok(())
    } else {
        Err(Error::Argument(format!(
            "metric weight must be positive, got {weight}"
        )))
    }
}

#[inline]
fn cx(c: &[f64]) -> Complex64 {
    Complex64::new(c[0], c[1])
}

/// Image of `z` under the disc automorphism sending `mu` to the origin.
#[inline]
fn mobius_to_origin(mu: Complex64, z: Complex64) -> Complex64 {
    (z - mu) / (Complex64::new(1.0, 0.0) - mu.conj() * z)
}

/// Distance in the unit-weight disc (curvature −4): `artanh |(ν−μ)/(1−μ̄ν)|`.
pub(crate) fn disc_distance(mu: Complex64, nu: Complex64) -> f64 {
    mobius_to_origin(mu, nu).norm().atanh()
}

/// Geodesic from `mu` with initial velocity `v`, evaluated at time 1.
fn disc_exp(mu: Complex64, v: Complex64) -> Complex64 {
    let speed = v.norm();
    if speed == 0.0 {
        return mu;
    }
    let c = 1.0 - mu.norm_sqr();
    let s = speed / c;
    // tanh(s) e^{i arg v}, pushed forward by the automorphism sending 0 to mu
    let u = v * (s.tanh() / s / c);
    (u + mu) / (Complex64::new(1.0, 0.0) + mu.conj() * u)
}

impl fmt::Display for Manifold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ManifoldKind::Euclidean(d) => write!(f, "euclidean:{d}"),
            ManifoldKind::PositiveReals(w) => write!(f, "positive:{w}"),
            ManifoldKind::PoincareDisc(w) => write!(f, "disc:{w}"),
            ManifoldKind::Product(factors) => {
                for (i, m) in factors.iter().enumerate() {
                    if i > 0 {
                        f.write_str("+")?;
                    }
                    write!(f, "{m}")?;
                }
                Ok(())
            }
        }
    }
}

/// Parses `euclidean:D`, `positive[:W]`, `disc[:W]`, `tn:N`, or a `+`-joined
/// product of those.
impl FromStr for Manifold {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split('+').map(str::trim).collect();
        if parts.len() > 1 {
            let factors = parts
                .into_iter()
                .map(parse_factor)
                .collect::<Result<Vec<_>>>()?;
            return Manifold::product(factors);
        }
        parse_factor(parts[0])
    }
}

fn parse_factor(s: &str) -> Result<Manifold> {
    let (name, arg) = match s.split_once(':') {
        Some((n, a)) => (n.trim(), Some(a.trim())),
        None => (s.trim(), None),
    };
    let num = |default: Option<f64>| -> Result<f64> {
        match arg {
            Some(a) => a
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad manifold parameter `{a}` in `{s}`"))),
            None => default.ok_or_else(|| Error::Parse(format!("`{s}` needs a parameter"))),
        }
    };
    let int = |v: f64| -> Result<usize> {
        if v >= 1.0 && v.fract() == 0.0 {
            Ok(v as usize)
        } else {
            Err(Error::Parse(format!("`{s}` needs a positive integer")))
        }
    };
    match name.to_ascii_lowercase().as_str() {
        "euclidean" | "r" => Manifold::euclidean(int(num(None)?)?),
        "positive" | "positive_reals" => Manifold::positive_reals(num(Some(1.0))?),
        "disc" | "poincare" | "poincare_disc" => Manifold::poincare_disc(num(Some(1.0))?),
        "tn" | "toeplitz" => Ok(crate::toeplitz::tn_manifold(int(num(None)?)?)),
        other => Err(Error::Parse(format!("unknown manifold `{other}`"))),
    }
}
