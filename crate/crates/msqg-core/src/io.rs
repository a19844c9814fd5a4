//! Binary field snapshots, kernel-table export and CSV writers.
//!
//! Snapshot format (little endian): magic `MSQG`, version u32, n u32,
//! rank u32, δ f64, then n×n complex f64 pairs per component, row-major in
//! FFT-wrapped wavenumber order.
//!
//! Kernel export: magic `MSQK`, q i32, q̂ i32, δ f64, n u32, sigma_order u32,
//! sample count u64, then per sample ζ (2×i64), η (2×i64) and the 2×2
//! complex matrix.

use crate::antidiv::KernelTable;
use crate::{Complex, Error, Grid, Rank, Result, SpectralField};
use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

const SNAPSHOT_MAGIC: &[u8; 4] = b"MSQG";
const KERNEL_MAGIC: &[u8; 4] = b"MSQK";
const SNAPSHOT_VERSION: u32 = 1;

fn rank_code(rank: Rank) -> u32 {
    match rank {
        Rank::Scalar => 1,
        Rank::Vector => 2,
        Rank::Tensor => 4,
    }
}

fn rank_from_code(code: u32) -> Result<Rank> {
    match code {
        1 => Ok(Rank::Scalar),
        2 => Ok(Rank::Vector),
        4 => Ok(Rank::Tensor),
        other => Err(Error::Format(format!("unknown rank code {other}"))),
    }
}

/// Write a field snapshot together with the δ it was produced under.
pub fn write_snapshot(path: &Path, field: &SpectralField, delta: f64) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(SNAPSHOT_MAGIC)?;
    w.write_u32::<LittleEndian>(SNAPSHOT_VERSION)?;
    w.write_u32::<LittleEndian>(field.grid().n() as u32)?;
    w.write_u32::<LittleEndian>(rank_code(field.rank()))?;
    w.write_f64::<LittleEndian>(delta)?;
    for c in field.coeffs() {
        w.write_f64::<LittleEndian>(c.re)?;
        w.write_f64::<LittleEndian>(c.im)?;
    }
    w.flush()?;
    Ok(())
}

/// Read a field snapshot; returns the field and its δ metadata.
pub fn read_snapshot(path: &Path) -> Result<(SpectralField, f64)> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != SNAPSHOT_MAGIC {
        return Err(Error::Format("bad snapshot magic".into()));
    }
    let version = r.read_u32::<LittleEndian>()?;
    if version != SNAPSHOT_VERSION {
        return Err(Error::Format(format!("unsupported snapshot version {version}")));
    }
    let n = r.read_u32::<LittleEndian>()? as usize;
    let rank = rank_from_code(r.read_u32::<LittleEndian>()?)?;
    let delta = r.read_f64::<LittleEndian>()?;
    let grid = Grid::new(n)?;
    let mut field = SpectralField::zeros(grid, rank);
    let mut hermitian = true;
    {
        let coeffs = field.coeffs_mut();
        for c in coeffs.iter_mut() {
            let re = r.read_f64::<LittleEndian>()?;
            let im = r.read_f64::<LittleEndian>()?;
            *c = Complex::new(re, im);
        }
    }
    // Flag complex-valued payloads (e.g. wave packets) as non-Hermitian.
    'outer: for c in 0..field.rank().components() {
        let comp = field.component(c);
        for i in 0..n {
            let k1 = grid.wavenumber(i);
            for j in 0..n {
                let k2 = grid.wavenumber(j);
                let (Some(mi), Some(mj)) = (grid.index_of(-k1), grid.index_of(-k2)) else { continue };
                if (comp[i * n + j] - comp[mi * n + mj].conj()).norm() > 1e-12 {
                    hermitian = false;
                    break 'outer;
                }
            }
        }
    }
    field.set_hermitian(hermitian);
    Ok((field, delta))
}

/// Export a kernel table in the MSQK binary format.
pub fn write_kernel_table(path: &Path, table: &KernelTable) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(KERNEL_MAGIC)?;
    w.write_i32::<LittleEndian>(table.q)?;
    w.write_i32::<LittleEndian>(table.qhat)?;
    w.write_f64::<LittleEndian>(table.m.delta)?;
    w.write_u32::<LittleEndian>(table.grid_n as u32)?;
    w.write_u32::<LittleEndian>(table.sigma_order as u32)?;
    w.write_u64::<LittleEndian>(table.entries.len() as u64)?;
    for e in &table.entries {
        for v in [e.zeta.0, e.zeta.1, e.eta.0, e.eta.1] {
            w.write_i64::<LittleEndian>(v)?;
        }
        for row in &e.value {
            for c in row {
                w.write_f64::<LittleEndian>(c.re)?;
                w.write_f64::<LittleEndian>(c.im)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Format a float for CSV output: round-trip precision, locale independent.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.17e}")
}

/// Minimal RFC-4180-style CSV writer for numeric tables: writes the header
/// once and then rows of preformatted cells.
pub struct CsvWriter<W: Write> {
    out: W,
}

impl<W: Write> CsvWriter<W> {
    pub fn new(mut out: W, header: &[&str]) -> Result<Self> {
        writeln!(out, "{}", header.join(","))?;
        Ok(CsvWriter { out })
    }

    pub fn row(&mut self, cells: &[String]) -> Result<()> {
        writeln!(self.out, "{}", cells.join(","))?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.out.flush()?;
        Ok(())
    }
}

pub fn csv_file(path: &Path, header: &[&str]) -> Result<CsvWriter<BufWriter<File>>> {
    CsvWriter::new(BufWriter::new(File::create(path)?), header)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snapshot_roundtrip() {
        let grid = Grid::new(32).unwrap();
        let field = SpectralField::from_fn(grid, |x, y| x.sin() * (2.0 * y).cos() + (3.0 * x).sin());
        let dir = std::env::temp_dir().join("msqg_io_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("snap.msqg");
        write_snapshot(&path, &field, 0.37).unwrap();
        let (back, delta) = read_snapshot(&path).unwrap();
        assert_eq!(delta, 0.37);
        assert!(back.is_hermitian());
        assert_eq!(field.coeff_distance(&back), 0.0);
        std::fs::remove_file(path).unwrap();
    }

    #[test]
    fn snapshot_rejects_garbage() {
        let dir = std::env::temp_dir().join("msqg_io_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("garbage.msqg");
        std::fs::write(&path, b"not a snapshot at all").unwrap();
        assert!(read_snapshot(&path).is_err());
        std::fs::remove_file(path).unwrap();
    }
}
