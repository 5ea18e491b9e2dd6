use crate::error::{Error, Result};
use crate::manifold::Point;

use super::functional::evaluate;
use super::measure::DiscreteMeasure;

/// Upper limit on grid points per refinement level.
pub const MAX_GRID_POINTS: usize = 4_000_000;
/// Largest manifold dimension the grid search accepts.
pub const MAX_GRID_DIM: usize = 4;

const FINAL_HALF_WIDTH: f64 = 1e-12;
const MAX_LEVELS: usize = 80;

/// An axis-aligned coordinate box.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchRegion {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl SearchRegion {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                found: upper.len(),
            });
        }
        if lower
            .iter()
            .zip(&upper)
            .any(|(l, u)| !(l <= u && l.is_finite() && u.is_finite()))
        {
            return Err(Error::Argument(
                "region bounds must be finite and ordered".into(),
            ));
        }
        Ok(SearchRegion { lower, upper })
    }

    /// The coordinate bounding box of the atoms, widened by `margin` times its
    /// extent (plus a small absolute pad) on every side.
    pub fn around(measure: &DiscreteMeasure, margin: f64) -> Self {
        let dim = measure.manifold().dim();
        let mut lower = vec![f64::INFINITY; dim];
        let mut upper = vec![f64::NEG_INFINITY; dim];
        for p in measure.points() {
            for (i, c) in p.coords().iter().enumerate() {
                lower[i] = lower[i].min(*c);
                upper[i] = upper[i].max(*c);
            }
        }
        for i in 0..dim {
            let pad = margin * (upper[i] - lower[i]) + 1e-6;
            lower[i] -= pad;
            upper[i] += pad;
        }
        SearchRegion { lower, upper }
    }
}

/// Exhaustive grid minimization of `H_p` over `region`, refined by recentering
/// a shrinking grid on the best point until the cell size is negligible.
/// Atoms are also compared at the end, so atom medians are returned exactly.
///
/// Grid points outside the manifold's domain are skipped. Ties go to the
/// lexicographically smallest coordinates.
pub fn brute_force_median(
    measure: &DiscreteMeasure,
    region: &SearchRegion,
    resolution: usize,
    p: f64,
) -> Result<Point> {
    let m = measure.manifold();
    let dim = m.dim();
    if dim > MAX_GRID_DIM {
        return Err(Error::Budget(format!(
            "grid search supports dimension ≤ {MAX_GRID_DIM}, got {dim}"
        )));
    }
    if region.lower.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: region.lower.len(),
        });
    }
    if !(p >= 1.0) {
        return Err(Error::Argument(format!("p must be at least 1, got {p}")));
    }
    if resolution < 3 {
        return Err(Error::Argument("grid resolution must be at least 3".into()));
    }
    let total = (resolution as f64).powi(dim as i32);
    if total > MAX_GRID_POINTS as f64 {
        return Err(Error::Budget(format!(
            "{resolution}^{dim} grid points exceed the limit of {MAX_GRID_POINTS}"
        )));
    }

    let mut center: Vec<f64> = region
        .lower
        .iter()
        .zip(&region.upper)
        .map(|(l, u)| 0.5 * (l + u))
        .collect();
    let mut half: Vec<f64> = region
        .lower
        .iter()
        .zip(&region.upper)
        .map(|(l, u)| 0.5 * (u - l))
        .collect();
    let mut best: Option<(f64, Vec<f64>)> = None;

    for _ in 0..MAX_LEVELS {
        let mut level_best: Option<(f64, Vec<f64>)> = None;
        let mut idx = vec![0usize; dim];
        let mut x = vec![0.0; dim];
        loop {
            for i in 0..dim {
                let frac = idx[i] as f64 / (resolution - 1) as f64;
                x[i] = center[i] - half[i] + 2.0 * half[i] * frac;
            }
            if m.validate(&x).is_ok() {
                let c = evaluate(measure, &x, p).cost;
                if level_best.as_ref().is_none_or(|(bc, _)| c < *bc) {
                    level_best = Some((c, x.clone()));
                }
            }
            if !advance(&mut idx, resolution) {
                break;
            }
        }
        let Some((c, x)) = level_best else {
            break;
        };
        if best.as_ref().is_none_or(|(bc, _)| c < *bc) {
            best = Some((c, x.clone()));
        }
        center = best.as_ref().map(|(_, b)| b.clone()).expect("set above");
        for h in half.iter_mut() {
            *h = 2.0 * (2.0 * *h / (resolution - 1) as f64);
        }
        if half.iter().all(|h| *h < FINAL_HALF_WIDTH) {
            break;
        }
    }

    let (mut best_cost, mut best_x) = best
        .ok_or_else(|| Error::Argument("search region contains no point of the manifold".into()))?;
    for y in measure.points() {
        let c = evaluate(measure, y.coords(), p).cost;
        if c < best_cost || (c == best_cost && y.coords() < best_x.as_slice()) {
            best_cost = c;
            best_x = y.coords().to_vec();
        }
    }
    Ok(Point::from_raw(best_x))
}

/// Odometer increment, first coordinate slowest.
fn advance(idx: &mut [usize], resolution: usize) -> bool {
    for i in (0..idx.len()).rev() {
        idx[i] += 1;
        if idx[i] < resolution {
            return true;
        }
        idx[i] = 0;
    }
    false
}
