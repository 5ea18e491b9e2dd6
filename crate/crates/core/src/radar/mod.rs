//! Range-cell target detection: simulate pulse trains, estimate reflection
//! coordinates per cell, filter them with sliding-window medians in `𝒯ₙ` and
//! flag cells far from their filtered reference.

mod cells;
mod detect;
mod filter;
pub mod io;
mod scene;
mod spectrum;

pub use cells::{estimate_cells, CellField};
pub use detect::{
    detection_statistic, threshold_and_declare, DetectionReport, ThresholdPolicy, MAD_SCALE,
};
pub use filter::{sliding_filter, window_indices, FilterKind, FilterOptions, FilteredField};
pub use scene::{periodogram, simulate_scene, ClutterConfig, PulseCube, SceneConfig, Target};
pub use spectrum::{ar_spectrum, field_spectra, frequency_grid};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::toeplitz::tn_manifold;

pub const DEFAULT_WINDOW: usize = 15;
pub const DEFAULT_REGULARIZATION: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorConfig {
    pub regularization: f64,
    pub filter: FilterOptions,
    pub policy: ThresholdPolicy,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig {
            regularization: DEFAULT_REGULARIZATION,
            filter: FilterOptions::new(DEFAULT_WINDOW, FilterKind::Median),
            policy: ThresholdPolicy::MedianMad(5.0),
        }
    }
}

/// Everything the pipeline computes for one cube.
#[derive(Debug, Clone)]
pub struct Detection {
    pub field: CellField,
    pub filtered: FilteredField,
    pub report: DetectionReport,
}

/// Estimate, filter, score and threshold.
pub fn detect(cube: &PulseCube, order: usize, cfg: &DetectorConfig) -> Result<Detection> {
    let field = estimate_cells(cube, order, cfg.regularization)?;
    detect_field(field, cfg)
}

/// [`detect`] starting from already estimated cells.
pub fn detect_field(field: CellField, cfg: &DetectorConfig) -> Result<Detection> {
    let filtered = sliding_filter(&field, &cfg.filter)?;
    let statistic = detection_statistic(&field, &filtered.field)?;
    let (threshold, declared) = threshold_and_declare(&statistic, cfg.policy)?;
    let report = DetectionReport {
        statistic,
        policy: cfg.policy,
        threshold,
        declared,
        window_size: cfg.filter.window,
        exclude_center: cfg.filter.exclude_center,
        filter_kind: cfg.filter.kind,
        degenerate_cells: field.degenerate_cells(),
        unconverged_cells: filtered.unconverged.clone(),
    };
    Ok(Detection {
        field,
        filtered,
        report,
    })
}

/// Cells within `reach` of a target, excluding the targets themselves.
pub fn cells_near_targets(n_cells: usize, targets: &[usize], reach: usize) -> Vec<usize> {
    (0..n_cells)
        .filter(|i| !targets.contains(i))
        .filter(|&i| targets.iter().any(|&t| i.abs_diff(t) <= reach))
        .collect()
}

/// Mean distance in `𝒯ₙ` between `filtered` and `reference` over `cells`.
pub fn mean_distortion(
    filtered: &CellField,
    reference: &CellField,
    cells: &[usize],
) -> Result<f64> {
    if filtered.len() != reference.len() || filtered.order() != reference.order() {
        return Err(Error::Argument("fields differ in size or order".into()));
    }
    if cells.is_empty() {
        return Err(Error::Argument("no cells to average over".into()));
    }
    let m = tn_manifold(filtered.order());
    let a = filtered.cells();
    let b = reference.cells();
    let mut sum = 0.0;
    for &i in cells {
        let (x, y) = (a.get(i), b.get(i));
        let (Some(x), Some(y)) = (x, y) else {
            return Err(Error::Argument(format!("cell {i} out of range")));
        };
        sum += m.dist_raw(&x.to_row(), &y.to_row());
    }
    Ok(sum / cells.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::toeplitz::ReflectionCoords;
    use num_complex::Complex64;

    #[test]
    fn near_target_cells() {
        assert_eq!(cells_near_targets(10, &[2, 8], 1), vec![1, 3, 7, 9]);
        assert_eq!(cells_near_targets(5, &[0], 2), vec![1, 2]);
    }

    #[test]
    fn uniform_scene_has_a_null_statistic() {
        let c = ReflectionCoords::new(
            1.2,
            vec![Complex64::new(0.3, 0.3), Complex64::new(-0.2, 0.0)],
        )
        .unwrap();
        let field = CellField::new(vec![c; 40]).unwrap();
        let d = detect_field(field, &DetectorConfig::default()).unwrap();
        assert!(d.report.statistic.iter().all(|s| *s < 1e-8));
        assert!(d.report.declared.is_empty());
    }

    #[test]
    fn single_perturbed_cell_peaks() {
        let base = ReflectionCoords::new(1.0, vec![Complex64::new(0.2, 0.0)]).unwrap();
        let mut cells = vec![base; 30];
        cells[17] = ReflectionCoords::new(4.0, vec![Complex64::new(-0.6, 0.3)]).unwrap();
        let d = detect_field(CellField::new(cells).unwrap(), &DetectorConfig::default()).unwrap();
        assert_eq!(d.report.ranking()[0], 17);
        assert!(d
            .report
            .statistic
            .iter()
            .enumerate()
            .all(|(i, s)| i == 17 || *s < 1e-8));
        assert_eq!(d.report.declared, vec![17]);
    }
}
