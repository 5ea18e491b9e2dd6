use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::manifold::{Manifold, Point, TangentVector};

use super::measure::DiscreteMeasure;

/// Atoms closer than this to the evaluation point count as coinciding with it.
pub const ATOM_EPS: f64 = 1e-14;

const PAR_THRESHOLD: usize = 4096;
const PAR_CHUNK: usize = 1024;

/// One pass over the atoms at a point `x`.
#[derive(Debug, Clone)]
pub(crate) struct Evaluation {
    pub cost: f64,
    /// `Σ w p d^{p−2} (−log_x y)` over atoms away from `x`.
    pub direction: Vec<f64>,
    /// Total weight of atoms coinciding with `x`.
    pub atom_mass: f64,
    /// Nearest atom away from `x` and its distance.
    pub nearest: Option<(usize, f64)>,
}

impl Evaluation {
    fn zero(dim: usize) -> Self {
        Evaluation {
            cost: 0.0,
            direction: vec![0.0; dim],
            atom_mass: 0.0,
            nearest: None,
        }
    }

    fn merge(mut self, other: Evaluation) -> Self {
        self.cost += other.cost;
        for (a, b) in self.direction.iter_mut().zip(&other.direction) {
            *a += b;
        }
        self.atom_mass += other.atom_mass;
        self.nearest = match (self.nearest, other.nearest) {
            (Some(a), Some(b)) => Some(if b.1 < a.1 { b } else { a }),
            (a, b) => a.or(b),
        };
        self
    }
}

fn evaluate_range(
    m: &Manifold,
    x: &[f64],
    points: &[Point],
    weights: &[f64],
    offset: usize,
    p: f64,
) -> Evaluation {
    let mut acc = Evaluation::zero(m.dim());
    let mut buf = vec![0.0; m.dim()];
    for (i, (y, &w)) in points.iter().zip(weights).enumerate() {
        let d = m.log_raw(x, y.coords(), &mut buf);
        if d < ATOM_EPS {
            acc.atom_mass += w;
            continue;
        }
        let (dp, scale) = if p == 1.0 {
            (d, w / d)
        } else if p == 2.0 {
            (d * d, 2.0 * w)
        } else {
            let dp = d.powf(p);
            (dp, w * p * dp / (d * d))
        };
        acc.cost += w * dp;
        for (a, b) in acc.direction.iter_mut().zip(&buf) {
            *a -= scale * b;
        }
        if acc.nearest.is_none_or(|(_, best)| d < best) {
            acc.nearest = Some((offset + i, d));
        }
    }
    acc
}

/// Deterministic: chunk boundaries and the reduction order are fixed.
pub(crate) fn evaluate(measure: &DiscreteMeasure, x: &[f64], p: f64) -> Evaluation {
    let m = measure.manifold();
    let points = measure.points();
    let weights = measure.weights();
    if points.len() < PAR_THRESHOLD {
        return evaluate_range(m, x, points, weights, 0, p);
    }
    let parts: Vec<Evaluation> = points
        .par_chunks(PAR_CHUNK)
        .zip(weights.par_chunks(PAR_CHUNK))
        .enumerate()
        .map(|(c, (pts, ws))| evaluate_range(m, x, pts, ws, c * PAR_CHUNK, p))
        .collect();
    parts
        .into_iter()
        .fold(Evaluation::zero(m.dim()), Evaluation::merge)
}

fn check_on_manifold(measure: &DiscreteMeasure, x: &Point) -> Result<()> {
    measure.manifold().validate(x.coords())
}

/// `H_p(x) = Σ w_i d(x, p_i)^p`.
pub fn cost(measure: &DiscreteMeasure, x: &Point, p: f64) -> Result<f64> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::Argument(format!("p must be at least 1, got {p}")));
    }
    check_on_manifold(measure, x)?;
    Ok(evaluate(measure, x.coords(), p).cost)
}

/// The median subgradient `H(x) = Σ_{p_i ≠ x} w_i (−log_x p_i)/d(x, p_i)`.
pub fn median_subgradient(measure: &DiscreteMeasure, x: &Point) -> Result<TangentVector> {
    check_on_manifold(measure, x)?;
    let e = evaluate(measure, x.coords(), 1.0);
    measure.manifold().tangent(x, e.direction)
}

/// `grad H_p(x)` for `p > 1`.
pub fn pmean_gradient(measure: &DiscreteMeasure, x: &Point, p: f64) -> Result<TangentVector> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::Argument(format!("gradient needs p > 1, got {p}")));
    }
    check_on_manifold(measure, x)?;
    let e = evaluate(measure, x.coords(), p);
    measure.manifold().tangent(x, e.direction)
}

/// `max(0, |H(x)| − μ{x})`: zero exactly at medians.
pub fn characterization_residual(measure: &DiscreteMeasure, x: &Point) -> Result<f64> {
    check_on_manifold(measure, x)?;
    let e = evaluate(measure, x.coords(), 1.0);
    Ok(residual_of(measure.manifold(), x.coords(), &e))
}

pub(crate) fn residual_of(m: &Manifold, x: &[f64], e: &Evaluation) -> f64 {
    (m.norm_raw(x, &e.direction) - e.atom_mass).max(0.0)
}

/// A 1-Lipschitz test function for the dual median check.
#[derive(Debug, Clone)]
pub enum LipschitzTest {
    /// `±d(·, q)`.
    Distance { anchor: Point, sign: f64 },
}

impl LipschitzTest {
    pub fn distance_to(anchor: Point) -> Self {
        LipschitzTest::Distance { anchor, sign: 1.0 }
    }

    pub fn negated_distance_to(anchor: Point) -> Self {
        LipschitzTest::Distance { anchor, sign: -1.0 }
    }

    pub fn eval(&self, m: &Manifold, x: &Point) -> f64 {
        match self {
            LipschitzTest::Distance { anchor, sign } => sign * m.distance(anchor, x),
        }
    }
}

/// Necessary condition for `x` to be a median with minimal cost `f_star`:
/// `φ(x) ≤ f_star + ∫φ dμ` for every test `φ`, up to `tol`.
pub fn lipschitz_median_check(
    measure: &DiscreteMeasure,
    x: &Point,
    f_star: f64,
    tests: &[LipschitzTest],
    tol: f64,
) -> Result<bool> {
    check_on_manifold(measure, x)?;
    let m = measure.manifold();
    Ok(tests.iter().all(|phi| {
        let integral: f64 = measure
            .points()
            .iter()
            .zip(measure.weights())
            .map(|(y, w)| w * phi.eval(m, y))
            .sum();
        phi.eval(m, x) <= f_star + integral + tol
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_measure(xs: &[f64], ws: &[f64]) -> DiscreteMeasure {
        let m = Manifold::euclidean(1).unwrap();
        let pts = xs.iter().map(|&x| m.point(vec![x]).unwrap()).collect();
        DiscreteMeasure::new(m, pts, ws.to_vec()).unwrap()
    }

    fn at(x: f64) -> Point {
        Manifold::euclidean(1).unwrap().point(vec![x]).unwrap()
    }

    #[test]
    fn cost_examples() {
        let single = line_measure(&[3.0], &[1.0]);
        assert_eq!(cost(&single, &at(3.0), 1.0).unwrap(), 0.0);
        let pair = line_measure(&[-1.0, 1.0], &[0.5, 0.5]);
        assert!((cost(&pair, &at(0.0), 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(cost(&pair, &at(0.0), 0.5).is_err());

        let e2 = Manifold::euclidean(2).unwrap();
        let s3 = 3f64.sqrt();
        let tri: Vec<Point> = [[0.0, 0.0], [1.0, 0.0], [0.5, s3 / 2.0]]
            .iter()
            .map(|c| e2.point(c.to_vec()).unwrap())
            .collect();
        let mu = DiscreteMeasure::uniform(e2.clone(), tri).unwrap();
        let fermat = e2.point(vec![0.5, s3 / 6.0]).unwrap();
        assert!((cost(&mu, &fermat, 1.0).unwrap() - 1.0 / s3).abs() < 1e-12);
    }

    #[test]
    fn subgradient_examples() {
        let single = line_measure(&[3.0], &[1.0]);
        assert_eq!(
            median_subgradient(&single, &at(3.0)).unwrap().components(),
            &[0.0]
        );
        let pair = line_measure(&[-1.0, 1.0], &[0.5, 0.5]);
        assert_eq!(
            median_subgradient(&pair, &at(0.0)).unwrap().components(),
            &[0.0]
        );
        let skew = line_measure(&[0.0, 10.0], &[0.7, 0.3]);
        let h = median_subgradient(&skew, &at(1e-4)).unwrap();
        assert!((h.components()[0] - 0.4).abs() < 1e-15);
    }

    #[test]
    fn residual_examples() {
        let skew = line_measure(&[0.0, 10.0], &[0.7, 0.3]);
        assert_eq!(characterization_residual(&skew, &at(0.0)).unwrap(), 0.0);
        assert!((characterization_residual(&skew, &at(5.0)).unwrap() - 0.4).abs() < 1e-15);
        let pair = line_measure(&[-1.0, 1.0], &[0.5, 0.5]);
        assert_eq!(characterization_residual(&pair, &at(0.3)).unwrap(), 0.0);
    }

    #[test]
    fn lipschitz_check() {
        let pair = line_measure(&[-1.0, 1.0], &[0.5, 0.5]);
        let f_star = 1.0;
        let tests: Vec<_> = [-3.0, -1.0, 0.0, 0.5, 2.0]
            .iter()
            .flat_map(|&q| {
                [
                    LipschitzTest::distance_to(at(q)),
                    LipschitzTest::negated_distance_to(at(q)),
                ]
            })
            .collect();
        assert!(lipschitz_median_check(&pair, &at(0.2), f_star, &tests, 1e-12).unwrap());
        let far = [LipschitzTest::negated_distance_to(at(5.0))];
        assert!(!lipschitz_median_check(&pair, &at(5.0), f_star, &far, 1e-12).unwrap());
        let single = line_measure(&[2.0], &[1.0]);
        assert!(lipschitz_median_check(&single, &at(2.0), 0.0, &tests, 1e-12).unwrap());
    }

    #[test]
    fn parallel_and_serial_passes_agree() {
        let m = Manifold::poincare_disc(1.0).unwrap();
        let pts: Vec<Point> = (0..5000)
            .map(|i| {
                let a = i as f64 * 0.37;
                let r = 0.8 * ((i * 7919) % 1000) as f64 / 1000.0;
                m.point(vec![r * a.cos(), r * a.sin()]).unwrap()
            })
            .collect();
        let mu = DiscreteMeasure::uniform(m.clone(), pts.clone()).unwrap();
        let x = [0.1, -0.2];
        let par = evaluate(&mu, &x, 1.0);
        let ser = evaluate_range(&m, &x, mu.points(), mu.weights(), 0, 1.0);
        assert!((par.cost - ser.cost).abs() < 1e-12);
        assert!((par.direction[0] - ser.direction[0]).abs() < 1e-12);
        assert_eq!(par.nearest.unwrap().0, ser.nearest.unwrap().0);
        let again = evaluate(&mu, &x, 1.0);
        assert_eq!(par.cost.to_bits(), again.cost.to_bits());
    }
}
