//! Reading and writing discrete measures and points.
//!
//! CSV measures have a header row. A column named `weight` holds the atom
//! weights (normalized on read); every other column is a coordinate, in
//! order. Without a weight column the atoms are weighted uniformly.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::DiscreteMeasure;
use crate::manifold::{Manifold, Point};

pub fn read_measure_csv<R: Read>(manifold: &Manifold, input: R) -> Result<DiscreteMeasure> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(input);
    let header = rdr.headers()?.clone();
    let weight_col = header.iter().position(|h| h.eq_ignore_ascii_case("weight"));
    let n_coords = header.len() - usize::from(weight_col.is_some());
    if n_coords != manifold.dim() {
        return Err(Error::Parse(format!(
            "{} has {} coordinates but the file has {n_coords} coordinate columns",
            manifold,
            manifold.dim()
        )));
    }
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let mut coords = Vec::with_capacity(n_coords);
        let mut weight = 1.0;
        for (j, field) in rec.iter().enumerate() {
            let v: f64 = field
                .parse()
                .map_err(|_| Error::Parse(format!("row {}: bad number {field:?}", line + 2)))?;
            if Some(j) == weight_col {
                weight = v;
            } else {
                coords.push(v);
            }
        }
        let p = manifold
            .point(coords)
            .map_err(|e| Error::Parse(format!("row {}: {e}", line + 2)))?;
        points.push(p);
        weights.push(weight);
    }
    if points.is_empty() {
        return Err(Error::Parse("measure file has no atoms".into()));
    }
    DiscreteMeasure::normalized(manifold.clone(), points, weights)
}

pub fn write_measure_csv<W: Write>(measure: &DiscreteMeasure, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = (0..measure.manifold().dim())
        .map(|i| format!("x{i}"))
        .collect();
    header.push("weight".into());
    w.write_record(&header)?;
    for (p, wt) in measure.points().iter().zip(measure.weights()) {
        let mut row: Vec<String> = p.coords().iter().map(f64::to_string).collect();
        row.push(wt.to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// JSON form of a measure, carrying its manifold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureFile {
    pub manifold: String,
    pub points: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

impl MeasureFile {
    pub fn from_measure(measure: &DiscreteMeasure) -> Self {
        MeasureFile {
            manifold: measure.manifold().to_string(),
            points: measure
                .points()
                .iter()
                .map(|p| p.coords().to_vec())
                .collect(),
            weights: Some(measure.weights().to_vec()),
        }
    }

    pub fn into_measure(self) -> Result<DiscreteMeasure> {
        let m: Manifold = self.manifold.parse()?;
        let points = self
            .points
            .into_iter()
            .map(|c| m.point(c))
            .collect::<Result<Vec<_>>>()?;
        if points.is_empty() {
            return Err(Error::Parse("measure file has no atoms".into()));
        }
        let weights = self.weights.unwrap_or_else(|| vec![1.0; points.len()]);
        DiscreteMeasure::normalized(m, points, weights)
    }
}

pub fn read_measure_json<R: Read>(input: R) -> Result<DiscreteMeasure> {
    let file: MeasureFile = serde_json::from_reader(input)?;
    file.into_measure()
}

pub fn write_measure_json<W: Write>(measure: &DiscreteMeasure, out: W) -> Result<()> {
    serde_json::to_writer_pretty(out, &MeasureFile::from_measure(measure))?;
    Ok(())
}

/// A single point as a one-row CSV with columns `x0, x1, …`.
pub fn write_point_csv<W: Write>(point: &Point, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let header: Vec<String> = (0..point.coords().len()).map(|i| format!("x{i}")).collect();
    w.write_record(&header)?;
    w.write_record(point.coords().iter().map(f64::to_string))?;
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_with_and_without_weights() {
        let m = Manifold::poincare_disc(1.0).unwrap();
        let text = "x,y,weight\n0.1,0.2,1\n-0.3,0.0,3\n";
        let mu = read_measure_csv(&m, text.as_bytes()).unwrap();
        assert_eq!(mu.weights(), &[0.25, 0.75]);
        let text = "x,y\n0.1,0.2\n-0.3,0.0\n";
        let mu = read_measure_csv(&m, text.as_bytes()).unwrap();
        assert_eq!(mu.weights(), &[0.5, 0.5]);

        let mut buf = Vec::new();
        write_measure_csv(&mu, &mut buf).unwrap();
        assert_eq!(read_measure_csv(&m, buf.as_slice()).unwrap(), mu);
    }

    #[test]
    fn csv_errors() {
        let m = Manifold::poincare_disc(1.0).unwrap();
        assert!(read_measure_csv(&m, "x\n0.1\n".as_bytes()).is_err());
        assert!(read_measure_csv(&m, "x,y\n0.1,abc\n".as_bytes()).is_err());
        assert!(read_measure_csv(&m, "x,y\n1.5,0\n".as_bytes()).is_err());
        assert!(read_measure_csv(&m, "x,y\n".as_bytes()).is_err());
    }

    #[test]
    fn json_round_trip() {
        let m: Manifold = "tn:2".parse().unwrap();
        let pts = vec![
            m.point(vec![1.0, 0.1, 0.2]).unwrap(),
            m.point(vec![2.0, -0.4, 0.0]).unwrap(),
        ];
        let mu = DiscreteMeasure::new(m, pts, vec![0.4, 0.6]).unwrap();
        let mut buf = Vec::new();
        write_measure_json(&mu, &mut buf).unwrap();
        assert_eq!(read_measure_json(buf.as_slice()).unwrap(), mu);
    }
}
