use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{
    comparison_c, default_start, solve_median_subgradient, solve_pmean_gradient,
    weiszfeld_warm_start, BallContext, DiscreteMeasure, SolverOptions, StepSchedule,
};
use crate::manifold::{Manifold, Point};
use crate::toeplitz::{tn_manifold, ReflectionCoords};

use super::cells::CellField;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterKind {
    /// Fréchet median, by the subgradient method.
    Median,
    /// Fréchet mean, by gradient descent with `p = 2`.
    Barycenter,
}

impl fmt::Display for FilterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FilterKind::Median => "median",
            FilterKind::Barycenter => "barycenter",
        })
    }
}

impl FromStr for FilterKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "median" => Ok(FilterKind::Median),
            "barycenter" | "mean" => Ok(FilterKind::Barycenter),
            other => Err(Error::Parse(format!("unknown filter kind {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterOptions {
    /// Odd number of cells in a full window.
    pub window: usize,
    pub kind: FilterKind,
    /// Leave the cell under test out of its own window.
    pub exclude_center: bool,
    pub tol: f64,
    pub max_iter: usize,
}

impl FilterOptions {
    pub fn new(window: usize, kind: FilterKind) -> Self {
        FilterOptions {
            window,
            kind,
            exclude_center: true,
            tol: 1e-4,
            max_iter: 20_000,
        }
    }
}

const WARM_START_ITERATIONS: usize = 2_000;
/// First subgradient step after the warm start, in units of the tolerance.
const REFINE_SCALE: f64 = 4.0;

/// Filtered field together with per-cell solver diagnostics.
#[derive(Debug, Clone)]
pub struct FilteredField {
    pub field: CellField,
    /// Final residual (median) or gradient norm (barycenter) per cell.
    pub residuals: Vec<f64>,
    pub iterations: Vec<usize>,
    /// Cells whose solve hit the iteration limit.
    pub unconverged: Vec<usize>,
}

/// Indices of the window around `i`, truncated at the edges.
pub fn window_indices(n_cells: usize, i: usize, window: usize, exclude_center: bool) -> Vec<usize> {
    let half = window / 2;
    let lo = i.saturating_sub(half);
    let hi = (i + half).min(n_cells - 1);
    (lo..=hi).filter(|&j| !(exclude_center && j == i)).collect()
}

/// Replaces each cell by the median or barycenter, in `𝒯ₙ`, of the cells in
/// the window around it, with uniform weights.
pub fn sliding_filter(field: &CellField, opts: &FilterOptions) -> Result<FilteredField> {
    let n = field.len();
    if opts.window % 2 == 0 || opts.window == 0 {
        return Err(Error::Argument(format!(
            "window must be odd, got {}",
            opts.window
        )));
    }
    if opts.window > n {
        return Err(Error::Argument(format!(
            "window {} exceeds the number of cells {n}",
            opts.window
        )));
    }
    if opts.window == 1 && opts.exclude_center {
        return Err(Error::Argument(
            "a one-cell window cannot exclude its center".into(),
        ));
    }
    let manifold = tn_manifold(field.order());
    let points: Vec<Point> = field
        .cells()
        .iter()
        .map(ReflectionCoords::to_point)
        .collect();
    let solved: Vec<(Point, f64, usize, bool)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let members = window_indices(n, i, opts.window, opts.exclude_center);
            let atoms = members.iter().map(|&j| points[j].clone()).collect();
            let measure = DiscreteMeasure::uniform(manifold.clone(), atoms)?;
            solve_window(&manifold, &measure, opts)
        })
        .collect::<Result<_>>()?;

    let mut cells = Vec::with_capacity(n);
    let mut residuals = Vec::with_capacity(n);
    let mut iterations = Vec::with_capacity(n);
    let mut unconverged = Vec::new();
    for (i, (x, r, k, ok)) in solved.into_iter().enumerate() {
        cells.push(ReflectionCoords::from_point(&x)?);
        residuals.push(r);
        iterations.push(k);
        if !ok {
            unconverged.push(i);
        }
    }
    Ok(FilteredField {
        field: CellField::with_flags(cells, field.degenerate().to_vec())?,
        residuals,
        iterations,
        unconverged,
    })
}

fn solve_window(
    manifold: &Manifold,
    measure: &DiscreteMeasure,
    opts: &FilterOptions,
) -> Result<(Point, f64, usize, bool)> {
    let solver = SolverOptions {
        max_iter: opts.max_iter,
        tol: opts.tol,
        trace_stride: usize::MAX,
        snap_to_atoms: true,
    };
    match opts.kind {
        FilterKind::Median => {
            let start = weiszfeld_warm_start(
                measure,
                default_start(measure, 1.0),
                WARM_START_ITERATIONS,
                1e-3 * opts.tol,
            )?;
            let ctx = BallContext::enclosing(measure, start.clone())?;
            let schedule = StepSchedule::harmonic(REFINE_SCALE * opts.tol)?;
            let (x, trace) =
                solve_median_subgradient(measure, &ctx, &schedule, Some(start), &solver)?;
            Ok((
                x,
                trace.residual,
                trace.iterations,
                trace.termination.is_converged(),
            ))
        }
        FilterKind::Barycenter => {
            // The energy's Hessian is at most 2 x coth x with x = √−δ · d, and
            // iterates stay within 2σ of every atom of the window.
            let start = default_start(measure, 2.0);
            let reach = 2.0 * measure.support_radius(&start);
            let (lower, _) = manifold.curvature_bounds();
            let step = 0.5 / comparison_c(0.5 * reach, lower);
            let schedule = StepSchedule::harmonic(f64::MAX)?.with_cap(step)?;
            let (x, trace) =
                solve_pmean_gradient(measure, None, 2.0, &schedule, Some(start), &solver)?;
            let norm = *trace.subgradient_norms.last().expect("final entry");
            Ok((x, norm, trace.iterations, trace.termination.is_converged()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn coords(p0: f64, mu: &[(f64, f64)]) -> ReflectionCoords {
        ReflectionCoords::new(p0, mu.iter().map(|&(a, b)| Complex64::new(a, b)).collect()).unwrap()
    }

    #[test]
    fn window_indices_truncate_at_edges() {
        assert_eq!(window_indices(10, 0, 5, true), vec![1, 2]);
        assert_eq!(window_indices(10, 5, 5, true), vec![3, 4, 6, 7]);
        assert_eq!(window_indices(10, 9, 5, false), vec![7, 8, 9]);
    }

    #[test]
    fn constant_field_is_fixed() {
        let c = coords(2.0, &[(0.3, -0.2), (0.1, 0.4)]);
        let field = CellField::new(vec![c; 12]).unwrap();
        for kind in [FilterKind::Median, FilterKind::Barycenter] {
            let out = sliding_filter(&field, &FilterOptions::new(5, kind)).unwrap();
            assert_eq!(out.field.cells(), field.cells());
            assert!(out.unconverged.is_empty());
        }
    }

    #[test]
    fn excluded_outlier_does_not_leak() {
        let common = coords(1.0, &[(0.5, 0.1)]);
        let mut cells = vec![common.clone(); 9];
        cells[4] = coords(30.0, &[(-0.9, 0.0)]);
        let field = CellField::new(cells).unwrap();
        let out = sliding_filter(&field, &FilterOptions::new(9, FilterKind::Median)).unwrap();
        assert_eq!(out.field.cells()[4], common);
    }

    #[test]
    fn single_cell_window_is_the_identity() {
        let cells = (0..6)
            .map(|i| coords(1.0 + i as f64, &[(0.1 * i as f64, 0.0)]))
            .collect();
        let field = CellField::new(cells).unwrap();
        let mut opts = FilterOptions::new(1, FilterKind::Median);
        opts.exclude_center = false;
        assert_eq!(sliding_filter(&field, &opts).unwrap().field, field);
        opts.exclude_center = true;
        assert!(sliding_filter(&field, &opts).is_err());
    }

    #[test]
    fn rejects_even_or_oversized_windows() {
        let field = CellField::new(vec![coords(1.0, &[]); 4]).unwrap();
        assert!(sliding_filter(&field, &FilterOptions::new(2, FilterKind::Median)).is_err());
        assert!(sliding_filter(&field, &FilterOptions::new(5, FilterKind::Median)).is_err());
    }
}
