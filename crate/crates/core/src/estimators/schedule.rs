use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum StepKind {
    /// `t_k = scale / k`.
    Harmonic { scale: f64 },
    /// `t_k = seq[k − 1]`; the schedule ends with the sequence.
    Custom(Vec<f64>),
}

/// Step sizes `t_1, t_2, …`, each capped at `cap`.
///
/// Schedules are 1-indexed. Solvers whose iteration counter starts at 0 use
/// `step(k + 1)` for their `k`-th step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepSchedule {
    kind: StepKind,
    cap: f64,
}

impl StepSchedule {
    pub fn harmonic(scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::Argument(format!(
                "harmonic scale must be positive, got {scale}"
            )));
        }
        Ok(StepSchedule {
            kind: StepKind::Harmonic { scale },
            cap: f64::INFINITY,
        })
    }

    pub fn custom(steps: Vec<f64>) -> Result<Self> {
        if let Some(t) = steps.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
            return Err(Error::Argument(format!("steps must be positive, got {t}")));
        }
        Ok(StepSchedule {
            kind: StepKind::Custom(steps),
            cap: f64::INFINITY,
        })
    }

    pub fn with_cap(mut self, cap: f64) -> Result<Self> {
        if !(cap > 0.0) {
            return Err(Error::Argument(format!(
                "step cap must be positive, got {cap}"
            )));
        }
        self.cap = cap;
        Ok(self)
    }

    pub fn kind(&self) -> &StepKind {
        &self.kind
    }

    pub fn cap(&self) -> f64 {
        self.cap
    }

    /// `t_k` for `k ≥ 1`, or `None` once a custom sequence runs out.
    pub fn step(&self, k: usize) -> Option<f64> {
        assert!(k >= 1, "schedules are 1-indexed");
        let raw = match &self.kind {
            StepKind::Harmonic { scale } => scale / k as f64,
            StepKind::Custom(seq) => *seq.get(k - 1)?,
        };
        Some(raw.min(self.cap))
    }

    /// The first `count` steps `t_1..=t_count`, further capped at `extra_cap`.
    pub fn steps(&self, count: usize, extra_cap: f64) -> Result<Vec<f64>> {
        (1..=count)
            .map(|k| {
                self.step(k)
                    .map(|t| t.min(extra_cap))
                    .ok_or(Error::ScheduleExhausted(k - 1))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_with_cap() {
        let s = StepSchedule::harmonic(1.0).unwrap().with_cap(0.25).unwrap();
        assert_eq!(s.step(1), Some(0.25));
        assert_eq!(s.step(4), Some(0.25));
        assert_eq!(s.step(8), Some(0.125));
    }

    #[test]
    fn custom_runs_out() {
        let s = StepSchedule::custom(vec![0.5, 0.25]).unwrap();
        assert_eq!(s.step(2), Some(0.25));
        assert_eq!(s.step(3), None);
        assert!(matches!(s.steps(3, 1.0), Err(Error::ScheduleExhausted(2))));
        assert!(StepSchedule::custom(vec![0.5, 0.0]).is_err());
        assert!(StepSchedule::harmonic(-1.0).is_err());
    }
}
