//! Toeplitz Hermitian positive-definite matrices and their reflection
//! coefficient coordinates.
//!
//! A matrix `R` of order `n` is stored by its first column `(r₀, …, r_{n−1})`,
//! with `R[i][j] = r_{i−j}` for `i ≥ j` and `conj(r_{j−i})` above the diagonal.
//! The coordinate map sends `R` to `(P₀, μ₁, …, μ_{n−1})` where `P₀ = r₀` and
//! `μ_k` is the last coefficient of the order-`k` prediction error filter
//! `1 + a₁z⁻¹ + … + a_k z⁻ᵏ` solving the Yule-Walker system.
//!
//! **Sign convention:** with this filter convention `r₁ = −P₀ μ₁`. Libraries
//! that write the predictor as `x̂_t = Σ a_j x_{t−j}` report `−μ_k`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::manifold::{Manifold, Point, DISC_BOUNDARY_MARGIN};

/// First column of a Toeplitz Hermitian positive-definite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ToeplitzHpd {
    first_column: Vec<Complex64>,
}

/// `(P₀, μ₁, …, μ_{n−1}) ∈ ℝ₊* × 𝔻^{n−1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReflectionCoords {
    p0: f64,
    mu: Vec<Complex64>,
}

impl ToeplitzHpd {
    /// Validates positive definiteness by running the Levinson recursion.
    pub fn new(first_column: Vec<Complex64>) -> Result<Self> {
        let r = ToeplitzHpd { first_column };
        phi(&r)?;
        Ok(r)
    }

    pub fn order(&self) -> usize {
        self.first_column.len()
    }

    pub fn first_column(&self) -> &[Complex64] {
        &self.first_column
    }

    /// Dense row-major matrix.
    pub fn to_dense(&self) -> Vec<Vec<Complex64>> {
        let n = self.order();
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        if i >= j {
                            self.first_column[i - j]
                        } else {
                            self.first_column[j - i].conj()
                        }
                    })
                    .collect()
            })
            .collect()
    }

    /// CSV row `re(r₀), 0, re(r₁), im(r₁), …`.
    pub fn to_row(&self) -> Vec<f64> {
        self.first_column
            .iter()
            .flat_map(|c| [c.re, c.im])
            .collect()
    }

    pub fn from_row(row: &[f64]) -> Result<Self> {
        if row.is_empty() || row.len() % 2 != 0 {
            return Err(Error::Parse(format!(
                "Toeplitz row needs an even, non-zero number of values, got {}",
                row.len()
            )));
        }
        if row[1] != 0.0 {
            return Err(Error::Parse("imaginary part of r0 must be 0".into()));
        }
        ToeplitzHpd::new(row.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect())
    }
}

impl ReflectionCoords {
    pub fn new(p0: f64, mu: Vec<Complex64>) -> Result<Self> {
        if !(p0 > 0.0 && p0.is_finite()) {
            return Err(Error::InvalidPoint(format!(
                "P0 must be positive, got {p0}"
            )));
        }
        for (k, m) in mu.iter().enumerate() {
            if !(m.norm() <= 1.0 - DISC_BOUNDARY_MARGIN) {
                return Err(Error::InvalidPoint(format!(
                    "reflection coefficient μ{} has modulus {} ≥ 1",
                    k + 1,
                    m.norm()
                )));
            }
        }
        Ok(ReflectionCoords { p0, mu })
    }

    /// Matrix order `n` (one more than the number of reflection coefficients).
    pub fn order(&self) -> usize {
        self.mu.len() + 1
    }

    pub fn p0(&self) -> f64 {
        self.p0
    }

    pub fn mu(&self) -> &[Complex64] {
        &self.mu
    }

    /// Prediction error powers `P₀, …, P_{n−1}`.
    pub fn prediction_errors(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.order());
        let mut p = self.p0;
        out.push(p);
        for m in &self.mu {
            p *= 1.0 - m.norm_sqr();
            out.push(p);
        }
        out
    }

    /// Coefficients `(1, a₁, …, a_{n−1})` of the order `n−1` prediction error
    /// filter, rebuilt from the reflection coefficients.
    pub fn prediction_filter(&self) -> Vec<Complex64> {
        let mut a = vec![Complex64::new(1.0, 0.0)];
        for &m in &self.mu {
            step_up(&mut a, m);
        }
        a
    }

    /// Coordinates on [`tn_manifold`]: `P₀, re μ₁, im μ₁, …`.
    pub fn to_row(&self) -> Vec<f64> {
        std::iter::once(self.p0)
            .chain(self.mu.iter().flat_map(|m| [m.re, m.im]))
            .collect()
    }

    pub fn from_row(row: &[f64]) -> Result<Self> {
        if row.is_empty() || row.len() % 2 != 1 {
            return Err(Error::Parse(format!(
                "reflection row needs an odd number of values, got {}",
                row.len()
            )));
        }
        ReflectionCoords::new(
            row[0],
            row[1..]
                .chunks(2)
                .map(|c| Complex64::new(c[0], c[1]))
                .collect(),
        )
    }

    pub fn to_point(&self) -> Point {
        Point::from_raw(self.to_row())
    }

    pub fn from_point(p: &Point) -> Result<Self> {
        Self::from_row(p.coords())
    }
}

/// One Levinson step: `a ← (a, 0) + μ · conj(reverse(a, 0))`.
fn step_up(a: &mut Vec<Complex64>, mu: Complex64) {
    let k = a.len();
    let old = a.clone();
    a.push(mu);
    for j in 1..k {
        a[j] = old[j] + mu * old[k - j].conj();
    }
}

/// The reflection-coefficient diffeomorphism, computed by the Levinson-Durbin
/// recursion.
pub fn phi(r: &ToeplitzHpd) -> Result<ReflectionCoords> {
    let col = r.first_column();
    let n = col.len();
    if n == 0 {
        return Err(Error::Argument("empty Toeplitz column".into()));
    }
    if col[0].im != 0.0 || !(col[0].re > 0.0) {
        return Err(Error::NotPositiveDefinite { order: 0 });
    }
    let mut p = col[0].re;
    let mut a = vec![Complex64::new(1.0, 0.0)];
    let mut mu = Vec::with_capacity(n - 1);
    for k in 1..n {
        let delta: Complex64 = (0..k).map(|j| a[j] * col[k - j]).sum();
        let m = -delta / p;
        let shrink = 1.0 - m.norm_sqr();
        if !(shrink > 0.0) || !m.is_finite() {
            return Err(Error::NotPositiveDefinite { order: k });
        }
        step_up(&mut a, m);
        p *= shrink;
        mu.push(m);
    }
    ReflectionCoords::new(col[0].re, mu).map_err(|_| Error::NotPositiveDefinite { order: n - 1 })
}

/// Inverse of [`phi`]: `r₀ = P₀`, `r_k = −μ_k P_{k−1} − Σ_{j<k} a_j^{(k−1)} r_{k−j}`.
pub fn phi_inv(c: &ReflectionCoords) -> ToeplitzHpd {
    let n = c.order();
    let mut r = Vec::with_capacity(n);
    r.push(Complex64::new(c.p0, 0.0));
    let mut a = vec![Complex64::new(1.0, 0.0)];
    let mut p = c.p0;
    for (idx, &m) in c.mu.iter().enumerate() {
        let k = idx + 1;
        let tail: Complex64 = (1..k).map(|j| a[j] * r[k - j]).sum();
        r.push(-m * p - tail);
        step_up(&mut a, m);
        p *= 1.0 - m.norm_sqr();
    }
    ToeplitzHpd { first_column: r }
}

/// `ln det R = n ln P₀ + Σ (n−k) ln(1 − |μ_k|²)`.
pub fn log_det(c: &ReflectionCoords) -> f64 {
    let n = c.order() as f64;
    n * c.p0.ln()
        + c.mu
            .iter()
            .enumerate()
            .map(|(i, m)| (n - (i + 1) as f64) * (-m.norm_sqr()).ln_1p())
            .sum::<f64>()
}

/// Kähler potential `Φ = −ln det R − n ln(πe)`.
pub fn kahler_potential(c: &ReflectionCoords) -> f64 {
    -log_det(c) - c.order() as f64 * (PI * std::f64::consts::E).ln()
}

/// The manifold `𝒯ₙ`: `ℝ₊*` with weight `n` times discs with weights `n−1, …, 1`.
pub fn tn_manifold(n: usize) -> Manifold {
    assert!(n >= 1, "matrix order must be at least 1");
    let pos = Manifold::positive_reals(n as f64).expect("positive weight");
    if n == 1 {
        return pos;
    }
    let factors = std::iter::once(pos)
        .chain((1..n).map(|k| Manifold::poincare_disc((n - k) as f64).expect("positive weight")))
        .collect();
    Manifold::product(factors).expect("non-empty product")
}

/// Regularized Burg estimate of the reflection coordinates of order `n`
/// (`P₀` and `n − 1` reflection coefficients) from a complex pulse train.
///
/// The reflection update is
/// `μ_k = −2 Σ f b̄ / (Σ|f|² + Σ|b|² + γ k ‖x‖²/N)`; `γ = 0` is plain Burg.
/// Coefficients are clamped radially to `1 − 1e−12`.
pub fn burg_reflection(
    signal: &[Complex64],
    n: usize,
    regularization: f64,
) -> Result<ReflectionCoords> {
    let len = signal.len();
    if n == 0 || len <= n {
        return Err(Error::Argument(format!(
            "Burg needs 1 <= order < signal length (order {n}, length {len})"
        )));
    }
    if !(regularization >= 0.0) {
        return Err(Error::Argument(
            "regularization must be non-negative".into(),
        ));
    }
    let energy: f64 = signal.iter().map(|z| z.norm_sqr()).sum();
    if !(energy > 0.0) || !energy.is_finite() {
        return Err(Error::DegenerateSignal("signal has zero energy".into()));
    }
    let p0 = energy / len as f64;
    let mut f = signal.to_vec();
    let mut b = signal.to_vec();
    let mut mu = Vec::with_capacity(n - 1);
    let limit = 1.0 - DISC_BOUNDARY_MARGIN;
    for k in 1..n {
        let mut num = Complex64::new(0.0, 0.0);
        let mut den = regularization * k as f64 * energy / len as f64;
        for t in k..len {
            num += f[t] * b[t - 1].conj();
            den += f[t].norm_sqr() + b[t - 1].norm_sqr();
        }
        let mut m = if den > 0.0 {
            -2.0 * num / den
        } else {
            Complex64::new(0.0, 0.0)
        };
        let modulus = m.norm();
        if modulus > limit {
            m *= limit / modulus;
            while m.norm() > limit {
                m *= 1.0 - f64::EPSILON;
            }
        }
        for t in (k..len).rev() {
            let ft = f[t];
            let bt = b[t - 1];
            f[t] = ft + m * bt;
            b[t] = bt + m.conj() * ft;
        }
        mu.push(m);
    }
    ReflectionCoords::new(p0, mu)
}
