use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::toeplitz::{burg_reflection, ReflectionCoords};

use super::scene::PulseCube;

/// Reflection coordinates of every range cell, all of one order.
#[derive(Debug, Clone, PartialEq)]
pub struct CellField {
    cells: Vec<ReflectionCoords>,
    /// Cells whose coordinates were borrowed from a neighbor.
    degenerate: Vec<bool>,
}

impl CellField {
    pub fn new(cells: Vec<ReflectionCoords>) -> Result<Self> {
        let degenerate = vec![false; cells.len()];
        Self::with_flags(cells, degenerate)
    }

    pub fn with_flags(cells: Vec<ReflectionCoords>, degenerate: Vec<bool>) -> Result<Self> {
        let Some(first) = cells.first() else {
            return Err(Error::Argument("cell field is empty".into()));
        };
        let order = first.order();
        if let Some(c) = cells.iter().find(|c| c.order() != order) {
            return Err(Error::DimensionMismatch {
                expected: order,
                found: c.order(),
            });
        }
        if degenerate.len() != cells.len() {
            return Err(Error::DimensionMismatch {
                expected: cells.len(),
                found: degenerate.len(),
            });
        }
        Ok(CellField { cells, degenerate })
    }

    pub fn cells(&self) -> &[ReflectionCoords] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn order(&self) -> usize {
        self.cells[0].order()
    }

    pub fn degenerate(&self) -> &[bool] {
        &self.degenerate
    }

    pub fn degenerate_cells(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.degenerate[i]).collect()
    }
}

/// Regularized Burg estimate for every cell. Cells without usable returns
/// take the coordinates of the nearest valid cell (the lower one on ties)
/// and are flagged.
pub fn estimate_cells(cube: &PulseCube, order: usize, regularization: f64) -> Result<CellField> {
    let n = cube.pulses_per_cell();
    if order == 0 || n <= order {
        return Err(Error::Argument(format!(
            "order {order} needs more than {order} pulses per cell, got {n}"
        )));
    }
    let estimates: Vec<Result<ReflectionCoords>> = cube
        .cells
        .par_iter()
        .map(|x| burg_reflection(x, order, regularization))
        .collect();
    let mut estimates_ok = Vec::with_capacity(estimates.len());
    for e in estimates {
        match e {
            Ok(c) => estimates_ok.push(Some(c)),
            Err(Error::DegenerateSignal(_)) => estimates_ok.push(None),
            Err(other) => return Err(other),
        }
    }
    let valid: Vec<bool> = estimates_ok.iter().map(Option::is_some).collect();
    if !valid.iter().any(|v| *v) {
        return Err(Error::DegenerateSignal("every cell is degenerate".into()));
    }
    let cells = (0..valid.len())
        .map(|i| {
            estimates_ok[nearest_valid(&valid, i)]
                .clone()
                .expect("source is valid")
        })
        .collect();
    let degenerate = valid.iter().map(|v| !v).collect();
    CellField::with_flags(cells, degenerate)
}

fn nearest_valid(valid: &[bool], i: usize) -> usize {
    (0..valid.len())
        .flat_map(|d| [i.checked_sub(d), Some(i + d)])
        .flatten()
        .find(|&j| j < valid.len() && valid[j])
        .expect("at least one valid cell")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radar::scene::{simulate_scene, ClutterConfig, SceneConfig};
    use num_complex::Complex64;

    fn white(seed: u64, pulses: usize) -> SceneConfig {
        SceneConfig {
            n_cells: 20,
            pulses_per_cell: pulses,
            model_order: 4,
            clutter: ClutterConfig {
                coefficients: vec![],
                innovation_power: 0.0,
            },
            targets: vec![],
            noise_power: 1.0,
            seed,
        }
    }

    #[test]
    fn white_noise_gives_small_reflections() {
        let cube = simulate_scene(&white(3, 4096)).unwrap();
        let field = estimate_cells(&cube, 4, 0.0).unwrap();
        for c in field.cells() {
            assert!((c.p0() - 1.0).abs() < 0.1);
            // Reflection estimates of white noise scale like 1/√N.
            assert!(c.mu().iter().all(|m| m.norm() < 5.0 / 64.0));
        }
    }

    #[test]
    fn recovers_ar1_clutter() {
        let pole = Complex64::from_polar(0.8, 2.0 * std::f64::consts::PI * 0.15);
        let mut cfg = white(9, 8192);
        cfg.n_cells = 3;
        cfg.noise_power = 0.0;
        cfg.clutter = ClutterConfig {
            coefficients: vec![(-pole.re, -pole.im)],
            innovation_power: 1.0,
        };
        let field = estimate_cells(&simulate_scene(&cfg).unwrap(), 3, 0.0).unwrap();
        for c in field.cells() {
            assert!((c.mu()[0] + pole).norm() < 0.03);
            assert!(c.mu()[1].norm() < 0.05);
            assert!((c.p0() - 1.0 / (1.0 - 0.64)).abs() < 0.25);
        }
    }

    #[test]
    fn tone_is_near_the_boundary_and_order_one_is_power_only() {
        let tone: Vec<Complex64> = (0..64)
            .map(|t| Complex64::from_polar(1.0, 0.7 * t as f64))
            .collect();
        let cube = PulseCube::new(vec![tone]).unwrap();
        let field = estimate_cells(&cube, 2, 0.0).unwrap();
        assert!(field.cells()[0].mu()[0].norm() > 1.0 - 1e-9);
        let field = estimate_cells(&cube, 1, 0.0).unwrap();
        assert_eq!(field.order(), 1);
        assert!(field.cells()[0].mu().is_empty());
    }

    #[test]
    fn degenerate_cells_borrow_from_neighbors() {
        let mut cube = simulate_scene(&white(4, 64)).unwrap();
        let zero = vec![Complex64::new(0.0, 0.0); 64];
        cube.cells[0] = zero.clone();
        cube.cells[5] = zero.clone();
        cube.cells[6] = zero;
        let field = estimate_cells(&cube, 3, 0.0).unwrap();
        assert_eq!(field.degenerate_cells(), vec![0, 5, 6]);
        assert_eq!(field.cells()[0], field.cells()[1]);
        assert_eq!(field.cells()[5], field.cells()[4]);
        assert_eq!(field.cells()[6], field.cells()[7]);
    }

    #[test]
    fn rejects_orders_beyond_the_pulse_count() {
        let cube = simulate_scene(&white(1, 64)).unwrap();
        assert!(estimate_cells(&cube, 64, 0.0).is_err());
        assert!(estimate_cells(&cube, 0, 0.0).is_err());
    }
}
