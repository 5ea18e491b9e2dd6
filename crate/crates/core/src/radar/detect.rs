use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::toeplitz::tn_manifold;

use super::cells::CellField;
use super::filter::FilterKind;

/// Consistency constant turning a MAD into a Gaussian standard deviation.
pub const MAD_SCALE: f64 = 1.4826;

/// `D_i = d(cell_i, filtered_i)` in `𝒯ₙ`.
pub fn detection_statistic(field: &CellField, filtered: &CellField) -> Result<Vec<f64>> {
    if field.len() != filtered.len() {
        return Err(Error::DimensionMismatch {
            expected: field.len(),
            found: filtered.len(),
        });
    }
    if field.order() != filtered.order() {
        return Err(Error::DimensionMismatch {
            expected: field.order(),
            found: filtered.order(),
        });
    }
    let m = tn_manifold(field.order());
    Ok(field
        .cells()
        .iter()
        .zip(filtered.cells())
        .map(|(a, b)| m.dist_raw(&a.to_row(), &b.to_row()))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "policy", content = "value")]
pub enum ThresholdPolicy {
    Fixed(f64),
    /// Sample quantile (linear interpolation between order statistics).
    Quantile(f64),
    /// `median + k · 1.4826 · MAD`.
    MedianMad(f64),
}

impl ThresholdPolicy {
    pub fn threshold(&self, statistic: &[f64]) -> Result<f64> {
        if statistic.is_empty() {
            return Err(Error::Argument("empty statistic".into()));
        }
        if statistic.iter().any(|s| s.is_nan()) {
            return Err(Error::Argument("statistic contains NaN".into()));
        }
        match *self {
            ThresholdPolicy::Fixed(c) => Ok(c),
            ThresholdPolicy::Quantile(q) => {
                if !(0.0..=1.0).contains(&q) {
                    return Err(Error::Argument(format!("quantile {q} outside [0, 1]")));
                }
                Ok(quantile(statistic, q))
            }
            ThresholdPolicy::MedianMad(k) => {
                if !(k >= 0.0) {
                    return Err(Error::Argument(format!(
                        "MAD multiplier must be non-negative, got {k}"
                    )));
                }
                let med = quantile(statistic, 0.5);
                let dev: Vec<f64> = statistic.iter().map(|s| (s - med).abs()).collect();
                Ok(med + k * MAD_SCALE * quantile(&dev, 0.5))
            }
        }
    }
}

impl fmt::Display for ThresholdPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ThresholdPolicy::Fixed(c) => write!(f, "fixed:{c}"),
            ThresholdPolicy::Quantile(q) => write!(f, "quantile:{q}"),
            ThresholdPolicy::MedianMad(k) => write!(f, "mad:{k}"),
        }
    }
}

/// Parses `fixed:C`, `quantile:Q` or `mad:K`.
impl FromStr for ThresholdPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, value) = s.split_once(':').ok_or_else(|| {
            Error::Parse(format!("threshold {s:?} is not of the form kind:value"))
        })?;
        let v: f64 = value
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad threshold value {value:?}")))?;
        match kind.trim() {
            "fixed" => Ok(ThresholdPolicy::Fixed(v)),
            "quantile" => Ok(ThresholdPolicy::Quantile(v)),
            "mad" => Ok(ThresholdPolicy::MedianMad(v)),
            other => Err(Error::Parse(format!("unknown threshold kind {other:?}"))),
        }
    }
}

fn quantile(values: &[f64], q: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let h = q * (v.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionReport {
    pub statistic: Vec<f64>,
    pub policy: ThresholdPolicy,
    pub threshold: f64,
    /// Cells whose statistic strictly exceeds the threshold.
    pub declared: Vec<usize>,
    pub window_size: usize,
    pub exclude_center: bool,
    pub filter_kind: FilterKind,
    pub degenerate_cells: Vec<usize>,
    pub unconverged_cells: Vec<usize>,
}

impl DetectionReport {
    /// Cells ordered by decreasing statistic, ties by index.
    pub fn ranking(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.statistic.len()).collect();
        idx.sort_by(|&a, &b| {
            self.statistic[b]
                .total_cmp(&self.statistic[a])
                .then(a.cmp(&b))
        });
        idx
    }

    /// Whether `cells` are exactly the top `cells.len()` ranks.
    pub fn top_ranks_are(&self, cells: &[usize]) -> bool {
        let mut top = self.ranking()[..cells.len().min(self.statistic.len())].to_vec();
        let mut want = cells.to_vec();
        top.sort_unstable();
        want.sort_unstable();
        top == want
    }
}

/// Applies `policy` and lists the cells strictly above the threshold.
pub fn threshold_and_declare(
    statistic: &[f64],
    policy: ThresholdPolicy,
) -> Result<(f64, Vec<usize>)> {
    let threshold = policy.threshold(statistic)?;
    let declared = (0..statistic.len())
        .filter(|&i| statistic[i] > threshold)
        .collect();
    Ok((threshold, declared))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::toeplitz::ReflectionCoords;
    use num_complex::Complex64;

    #[test]
    fn identical_fields_give_zero() {
        let c = ReflectionCoords::new(1.5, vec![Complex64::new(0.2, 0.1)]).unwrap();
        let f = CellField::new(vec![c; 5]).unwrap();
        assert!(detection_statistic(&f, &f)
            .unwrap()
            .iter()
            .all(|d| *d == 0.0));
    }

    #[test]
    fn statistic_is_the_tn_distance() {
        // 𝒯₂: √2 |ln(P/Q)| ⊕ atanh of the disc's Möbius difference.
        let a = ReflectionCoords::new(1.0, vec![Complex64::new(0.0, 0.0)]).unwrap();
        let b = ReflectionCoords::new(2.0, vec![Complex64::new(0.5, 0.0)]).unwrap();
        let fa = CellField::new(vec![a]).unwrap();
        let fb = CellField::new(vec![b]).unwrap();
        let d = detection_statistic(&fa, &fb).unwrap()[0];
        let want = (2.0 * 2f64.ln().powi(2) + 0.5f64.atanh().powi(2)).sqrt();
        assert!((d - want).abs() < 1e-12);
    }

    #[test]
    fn quantiles_interpolate() {
        let s = [3.0, 1.0, 2.0, 4.0];
        assert_eq!(ThresholdPolicy::Quantile(0.5).threshold(&s).unwrap(), 2.5);
        assert_eq!(ThresholdPolicy::Quantile(1.0).threshold(&s).unwrap(), 4.0);
        let (_, declared) = threshold_and_declare(&s, ThresholdPolicy::Quantile(1.0)).unwrap();
        assert!(declared.is_empty());
    }

    #[test]
    fn median_mad_threshold() {
        let s = [1.0, 2.0, 3.0, 4.0, 100.0];
        // median 3, deviations 2 1 0 1 97 → MAD 1
        let t = ThresholdPolicy::MedianMad(5.0).threshold(&s).unwrap();
        assert!((t - (3.0 + 5.0 * MAD_SCALE)).abs() < 1e-12);
        assert_eq!(
            threshold_and_declare(&s, ThresholdPolicy::MedianMad(5.0))
                .unwrap()
                .1,
            vec![4]
        );
    }

    #[test]
    fn zero_statistic_declares_nothing() {
        let (_, d) = threshold_and_declare(&[0.0; 10], ThresholdPolicy::Fixed(1.0)).unwrap();
        assert!(d.is_empty());
        let (_, d) = threshold_and_declare(&[0.0; 10], ThresholdPolicy::MedianMad(5.0)).unwrap();
        assert!(d.is_empty());
    }

    #[test]
    fn policy_parsing_round_trips() {
        for p in [
            ThresholdPolicy::Fixed(1.5),
            ThresholdPolicy::Quantile(0.99),
            ThresholdPolicy::MedianMad(5.0),
        ] {
            assert_eq!(p.to_string().parse::<ThresholdPolicy>().unwrap(), p);
        }
        assert!("mad".parse::<ThresholdPolicy>().is_err());
        assert!("gauss:1".parse::<ThresholdPolicy>().is_err());
    }
}
