use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Samples discarded before an AR clutter train is recorded.
const BURN_IN: usize = 256;

/// Complex AR clutter `x_t + Σ a_j x_{t−j} = e_t`, `e_t` white with the given
/// innovation power.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClutterConfig {
    /// `(re, im)` of `a_1, a_2, …`.
    pub coefficients: Vec<(f64, f64)>,
    pub innovation_power: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Target {
    pub cell: usize,
    /// Normalized Doppler frequency in `[−0.5, 0.5)`.
    pub doppler: f64,
    pub power: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneConfig {
    pub n_cells: usize,
    pub pulses_per_cell: usize,
    /// Matrix order `n` of the per-cell Toeplitz model.
    pub model_order: usize,
    pub clutter: ClutterConfig,
    pub targets: Vec<Target>,
    pub noise_power: f64,
    pub seed: u64,
}

impl SceneConfig {
    /// 200 range cells of 64 pulses, low-Doppler AR(2) clutter of power
    /// about 2.2 plus noise 0.1, and two 45-power targets (about 13 dB over
    /// clutter and noise) at cells 60 and 140.
    pub fn two_target(seed: u64) -> Self {
        let pole = |r: f64, f: f64| Complex64::from_polar(r, 2.0 * PI * f);
        let (p1, p2) = (pole(0.5, 0.05), pole(0.5, -0.1));
        let a1 = -(p1 + p2);
        let a2 = p1 * p2;
        SceneConfig {
            n_cells: 200,
            pulses_per_cell: 64,
            model_order: 8,
            clutter: ClutterConfig {
                coefficients: vec![(a1.re, a1.im), (a2.re, a2.im)],
                innovation_power: 1.0,
            },
            targets: vec![
                Target {
                    cell: 60,
                    doppler: 0.3,
                    power: 45.0,
                },
                Target {
                    cell: 140,
                    doppler: -0.3,
                    power: 45.0,
                },
            ],
            noise_power: 0.1,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_cells == 0 || self.pulses_per_cell == 0 {
            return Err(Error::Argument("scene needs cells and pulses".into()));
        }
        if self.model_order == 0 || self.model_order >= self.pulses_per_cell {
            return Err(Error::Argument(format!(
                "model order {} must lie in [1, {})",
                self.model_order, self.pulses_per_cell
            )));
        }
        if !(self.noise_power >= 0.0 && self.clutter.innovation_power >= 0.0) {
            return Err(Error::Argument("powers must be non-negative".into()));
        }
        for t in &self.targets {
            if t.cell >= self.n_cells {
                return Err(Error::Argument(format!(
                    "target cell {} out of range",
                    t.cell
                )));
            }
            if !(t.power > 0.0) {
                return Err(Error::Argument("target powers must be positive".into()));
            }
            if !(-0.5..0.5).contains(&t.doppler) {
                return Err(Error::Argument(format!(
                    "Doppler {} outside [-0.5, 0.5)",
                    t.doppler
                )));
            }
        }
        Ok(())
    }

    /// Same clutter and noise, no targets.
    pub fn without_targets(&self) -> Self {
        SceneConfig {
            targets: Vec::new(),
            ..self.clone()
        }
    }

    pub fn target_cells(&self) -> Vec<usize> {
        let mut cells: Vec<usize> = self.targets.iter().map(|t| t.cell).collect();
        cells.sort_unstable();
        cells.dedup();
        cells
    }
}

/// Complex returns, one pulse train per range cell.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseCube {
    pub cells: Vec<Vec<Complex64>>,
}

impl PulseCube {
    pub fn new(cells: Vec<Vec<Complex64>>) -> Result<Self> {
        let n = cells.first().map_or(0, Vec::len);
        if cells.is_empty() || n == 0 {
            return Err(Error::Argument("pulse cube is empty".into()));
        }
        if cells.iter().any(|c| c.len() != n) {
            return Err(Error::Argument("cells have differing pulse counts".into()));
        }
        Ok(PulseCube { cells })
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn pulses_per_cell(&self) -> usize {
        self.cells[0].len()
    }
}

fn complex_gaussian(rng: &mut ChaCha8Rng, power: f64) -> Complex64 {
    let s = (power / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(s * re, s * im)
}

fn stream(seed: u64, cell: usize, tag: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((cell as u64) << 8) | tag);
    rng
}

/// Simulates every cell. Clutter, noise and target phases come from separate
/// per-cell random streams, so a scene and its target-free copy share the
/// same clutter and noise.
pub fn simulate_scene(cfg: &SceneConfig) -> Result<PulseCube> {
    cfg.validate()?;
    let a: Vec<Complex64> = cfg
        .clutter
        .coefficients
        .iter()
        .map(|&(re, im)| Complex64::new(re, im))
        .collect();
    let n = cfg.pulses_per_cell;
    let cells = (0..cfg.n_cells)
        .map(|cell| {
            let mut clutter_rng = stream(cfg.seed, cell, 1);
            let mut noise_rng = stream(cfg.seed, cell, 2);
            let mut target_rng = stream(cfg.seed, cell, 3);
            let mut history = vec![Complex64::new(0.0, 0.0); a.len()];
            let mut out = Vec::with_capacity(n);
            for t in 0..BURN_IN + n {
                let e = complex_gaussian(&mut clutter_rng, cfg.clutter.innovation_power);
                let mut x = e;
                for (j, aj) in a.iter().enumerate() {
                    x -= aj * history[j];
                }
                if !history.is_empty() {
                    history.rotate_right(1);
                    history[0] = x;
                }
                if t >= BURN_IN {
                    out.push(x + complex_gaussian(&mut noise_rng, cfg.noise_power));
                }
            }
            for tgt in cfg.targets.iter().filter(|tg| tg.cell == cell) {
                let phase = 2.0 * PI * target_rng.random::<f64>();
                for (t, z) in out.iter_mut().enumerate() {
                    *z += Complex64::from_polar(
                        tgt.power.sqrt(),
                        2.0 * PI * tgt.doppler * t as f64 + phase,
                    );
                }
            }
            out
        })
        .collect();
    PulseCube::new(cells)
}

/// `|Σ_t x_t e^{−2πi f t}|² / N` at `n_freq` frequencies `−1/2 + j/n_freq`.
pub fn periodogram(signal: &[Complex64], n_freq: usize) -> Vec<f64> {
    let n = signal.len() as f64;
    (0..n_freq)
        .map(|j| {
            let f = -0.5 + j as f64 / n_freq as f64;
            let s: Complex64 = signal
                .iter()
                .enumerate()
                .map(|(t, x)| x * Complex64::from_polar(1.0, -2.0 * PI * f * t as f64))
                .sum();
            s.norm_sqr() / n
        })
        .collect()
}
