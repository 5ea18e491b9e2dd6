use std::io::{Read, Write};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::toeplitz::ReflectionCoords;

use super::cells::CellField;
use super::scene::PulseCube;

/// Writes `cell_id, pulse_index, re, im` rows. Floats use the shortest
/// representation that parses back to the same value.
pub fn write_pulse_cube<W: Write>(cube: &PulseCube, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["cell_id", "pulse_index", "re", "im"])?;
    for (i, cell) in cube.cells.iter().enumerate() {
        for (t, z) in cell.iter().enumerate() {
            w.write_record([
                i.to_string(),
                t.to_string(),
                z.re.to_string(),
                z.im.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads the format of [`write_pulse_cube`]. Rows may come in any order but
/// every `(cell, pulse)` pair must appear exactly once.
pub fn read_pulse_cube<R: Read>(input: R) -> Result<PulseCube> {
    let mut rdr = csv::Reader::from_reader(input);
    let mut entries = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.len() != 4 {
            return Err(Error::Parse(format!(
                "row {}: expected 4 fields, got {}",
                line + 2,
                rec.len()
            )));
        }
        let field = |k: usize| rec[k].trim().to_string();
        let bad = |what: &str| Error::Parse(format!("row {}: bad {what}", line + 2));
        let cell: usize = field(0).parse().map_err(|_| bad("cell_id"))?;
        let pulse: usize = field(1).parse().map_err(|_| bad("pulse_index"))?;
        let re: f64 = field(2).parse().map_err(|_| bad("re"))?;
        let im: f64 = field(3).parse().map_err(|_| bad("im"))?;
        if !(re.is_finite() && im.is_finite()) {
            return Err(bad("sample value"));
        }
        entries.push((cell, pulse, Complex64::new(re, im)));
    }
    let n_cells = entries.iter().map(|e| e.0 + 1).max().unwrap_or(0);
    let n_pulses = entries.iter().map(|e| e.1 + 1).max().unwrap_or(0);
    if entries.len() != n_cells * n_pulses {
        return Err(Error::Parse(format!(
            "expected {n_cells} x {n_pulses} samples, found {}",
            entries.len()
        )));
    }
    let mut cells = vec![vec![None; n_pulses]; n_cells];
    for (c, p, z) in entries {
        if cells[c][p].replace(z).is_some() {
            return Err(Error::Parse(format!(
                "duplicate sample for cell {c}, pulse {p}"
            )));
        }
    }
    let cells = cells
        .into_iter()
        .map(|row| row.into_iter().map(|z| z.expect("count matched")).collect())
        .collect();
    PulseCube::new(cells)
}

/// One row per cell: `cell, degenerate, p0, mu1_re, mu1_im, …`.
pub fn write_cell_field<W: Write>(field: &CellField, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["cell".to_string(), "degenerate".into(), "p0".into()];
    for k in 1..field.order() {
        header.push(format!("mu{k}_re"));
        header.push(format!("mu{k}_im"));
    }
    w.write_record(&header)?;
    for (i, c) in field.cells().iter().enumerate() {
        let mut row = vec![i.to_string(), field.degenerate()[i].to_string()];
        row.extend(c.to_row().iter().map(f64::to_string));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_cell_field<R: Read>(input: R) -> Result<CellField> {
    let mut rdr = csv::Reader::from_reader(input);
    let mut cells = Vec::new();
    let mut flags = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let bad = |what: &str| Error::Parse(format!("row {}: bad {what}", line + 2));
        if rec.len() < 3 {
            return Err(bad("row length"));
        }
        let cell: usize = rec[0].trim().parse().map_err(|_| bad("cell"))?;
        if cell != cells.len() {
            return Err(bad("cell index (rows must be in order)"));
        }
        flags.push(
            rec[1]
                .trim()
                .parse::<bool>()
                .map_err(|_| bad("degenerate flag"))?,
        );
        let row = rec
            .iter()
            .skip(2)
            .map(|v| v.trim().parse::<f64>().map_err(|_| bad("coordinate")))
            .collect::<Result<Vec<_>>>()?;
        cells.push(ReflectionCoords::from_row(&row)?);
    }
    CellField::with_flags(cells, flags)
}

/// Matrix of `rows × frequencies` with a header of frequencies.
pub fn write_spectra<W: Write>(freqs: &[f64], rows: &[Vec<f64>], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["cell".to_string()];
    header.extend(freqs.iter().map(f64::to_string));
    w.write_record(&header)?;
    for (i, row) in rows.iter().enumerate() {
        let mut rec = vec![i.to_string()];
        rec.extend(row.iter().map(f64::to_string));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// `cell, statistic` rows.
pub fn write_statistic<W: Write>(statistic: &[f64], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["cell", "statistic"])?;
    for (i, s) in statistic.iter().enumerate() {
        w.write_record([i.to_string(), s.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radar::cells::estimate_cells;
    use crate::radar::scene::{simulate_scene, SceneConfig};

    #[test]
    fn pulse_cube_round_trip_is_exact() {
        let mut cfg = SceneConfig::two_target(3);
        cfg.n_cells = 20;
        cfg.targets.retain(|t| t.cell < 20);
        let cube = simulate_scene(&cfg).unwrap();
        let mut buf = Vec::new();
        write_pulse_cube(&cube, &mut buf).unwrap();
        assert_eq!(read_pulse_cube(buf.as_slice()).unwrap(), cube);

        let field = estimate_cells(&cube, 4, 0.01).unwrap();
        let mut buf = Vec::new();
        write_cell_field(&field, &mut buf).unwrap();
        assert_eq!(read_cell_field(buf.as_slice()).unwrap(), field);
    }

    #[test]
    fn malformed_cubes_are_rejected() {
        let missing = "cell_id,pulse_index,re,im\n0,0,1,0\n0,1,1,0\n1,0,1,0\n";
        assert!(matches!(
            read_pulse_cube(missing.as_bytes()),
            Err(Error::Parse(_))
        ));
        let dup = "cell_id,pulse_index,re,im\n0,0,1,0\n0,0,1,0\n";
        assert!(read_pulse_cube(dup.as_bytes()).is_err());
        let text = "cell_id,pulse_index,re,im\n0,0,x,0\n";
        assert!(matches!(
            read_pulse_cube(text.as_bytes()),
            Err(Error::Parse(_))
        ));
    }
}
