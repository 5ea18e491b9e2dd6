use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::manifold::{Manifold, Point};

/// Weights must sum to one within this tolerance.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Finitely many atoms on one manifold with positive weights summing to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    manifold: Manifold,
    points: Vec<Point>,
    weights: Vec<f64>,
}

impl DiscreteMeasure {
    pub fn new(manifold: Manifold, points: Vec<Point>, weights: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Argument("a measure needs at least one atom".into()));
        }
        if points.len() != weights.len() {
            return Err(Error::Argument(format!(
                "{} points but {} weights",
                points.len(),
                weights.len()
            )));
        }
        for p in &points {
            manifold.validate(p.coords())?;
        }
        if let Some(w) = weights.iter().find(|w| !(**w > 0.0 && w.is_finite())) {
            return Err(Error::Argument(format!(
                "weights must be positive, got {w}"
            )));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::Argument(format!("weights sum to {total}, not 1")));
        }
        Ok(DiscreteMeasure {
            manifold,
            points,
            weights,
        })
    }

    pub fn uniform(manifold: Manifold, points: Vec<Point>) -> Result<Self> {
        let n = points.len().max(1);
        Self::normalized(manifold, points, vec![1.0; n])
    }

    /// Rescales positive weights to sum to one.
    pub fn normalized(manifold: Manifold, points: Vec<Point>, weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::Argument(
                "weights must have a positive finite sum".into(),
            ));
        }
        let weights = weights.into_iter().map(|w| w / total).collect();
        Self::new(manifold, points, weights)
    }

    pub fn manifold(&self) -> &Manifold {
        &self.manifold
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `max_i d(center, p_i)`.
    pub fn support_radius(&self, center: &Point) -> f64 {
        self.points
            .iter()
            .map(|p| self.manifold.distance(center, p))
            .fold(0.0, f64::max)
    }
}

/// A source of i.i.d. draws for the stochastic solver.
pub trait PointSampler {
    fn draw(&mut self) -> Option<Point>;
}

impl<F: FnMut() -> Option<Point>> PointSampler for F {
    fn draw(&mut self) -> Option<Point> {
        self()
    }
}

/// Draws atoms of a [`DiscreteMeasure`] according to their weights.
pub struct MeasureSampler<'a> {
    measure: &'a DiscreteMeasure,
    index: WeightedIndex<f64>,
    rng: ChaCha8Rng,
    drawn: Vec<usize>,
}

impl<'a> MeasureSampler<'a> {
    pub fn new(measure: &'a DiscreteMeasure, seed: u64) -> Self {
        let index = WeightedIndex::new(measure.weights()).expect("validated weights");
        MeasureSampler {
            measure,
            index,
            rng: ChaCha8Rng::seed_from_u64(seed),
            drawn: Vec::new(),
        }
    }

    /// Indices of the atoms drawn so far.
    pub fn drawn(&self) -> &[usize] {
        &self.drawn
    }
}

impl PointSampler for MeasureSampler<'_> {
    fn draw(&mut self) -> Option<Point> {
        let i = self.index.sample(&mut self.rng);
        self.drawn.push(i);
        Some(self.measure.points()[i].clone())
    }
}

/// Replays a fixed finite sequence of points.
pub struct SequenceSampler {
    points: std::vec::IntoIter<Point>,
}

impl SequenceSampler {
    pub fn new(points: Vec<Point>) -> Self {
        SequenceSampler {
            points: points.into_iter(),
        }
    }
}

impl PointSampler for SequenceSampler {
    fn draw(&mut self) -> Option<Point> {
        self.points.next()
    }
}
