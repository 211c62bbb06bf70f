use std::io::{Read, Write};

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Magic prefix of the binary matrix layout: the magic, then rows and columns
/// as little-endian `u64`, then row-major little-endian `f64` values.
pub const PPMC1_MAGIC: &[u8; 5] = b"PPMC1";

pub fn write_ppmc1<W: Write>(m: &DMatrix<f64>, mut w: W) -> Result<()> {
    w.write_all(PPMC1_MAGIC)?;
    w.write_all(&(m.nrows() as u64).to_le_bytes())?;
    w.write_all(&(m.ncols() as u64).to_le_bytes())?;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            w.write_all(&m[(i, j)].to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_ppmc1<R: Read>(mut r: R) -> Result<DMatrix<f64>> {
    let mut magic = [0u8; 5];
    r.read_exact(&mut magic)?;
    if &magic != PPMC1_MAGIC {
        return Err(Error::Format("missing PPMC1 magic".into()));
    }
    let mut word = [0u8; 8];
    r.read_exact(&mut word)?;
    let rows = u64::from_le_bytes(word) as usize;
    r.read_exact(&mut word)?;
    let cols = u64::from_le_bytes(word) as usize;
    let count = rows
        .checked_mul(cols)
        .ok_or_else(|| Error::Format("matrix dimensions overflow".into()))?;
    let mut values = Vec::with_capacity(count);
    for _ in 0..count {
        r.read_exact(&mut word)?;
        values.push(f64::from_le_bytes(word));
    }
    Ok(DMatrix::from_row_slice(rows, cols, &values))
}

/// Dense CSV, one matrix row per line, no header.
pub fn write_matrix_csv<W: Write>(m: &DMatrix<f64>, w: W) -> Result<()> {
    let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    for row in m.row_iter() {
        out.write_record(row.iter().map(|v| format!("{v:.17e}")))?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_matrix_csv<R: Read>(r: R) -> Result<DMatrix<f64>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).from_reader(r);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Format(format!("bad number {s:?}: {e}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Format("ragged matrix CSV".into()));
    }
    let flat: Vec<f64> = rows.concat();
    Ok(DMatrix::from_row_slice(rows.len(), ncols, &flat))
}

/// `index,probability` per line, with header.
pub fn write_distribution_csv<W: Write>(probs: &[f64], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["index", "probability"])?;
    for (i, p) in probs.iter().enumerate() {
        out.write_record([i.to_string(), format!("{p:.17e}")])?;
    }
    out.flush()?;
    Ok(())
}
