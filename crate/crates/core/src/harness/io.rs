//! Snapshots, CSV series and JSON summaries.
//!
//! Snapshot layout, little endian: magic `MLSNAP\0\0`, version u32, n u32, L f64,
//! field count u32, then per field the stored modes as 3 complex (re, im f64) each,
//! then q and P as 6 f64.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::sync::Arc;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::{FieldPair, FourierGrid, SolenoidalField, Vec3};
use crate::state::PhaseVector;

pub const SNAPSHOT_MAGIC: &[u8; 8] = b"MLSNAP\0\0";
pub const SNAPSHOT_VERSION: u32 = 1;

pub fn write_snapshot<W: Write>(mut w: W, y: &PhaseVector) -> Result<()> {
    let grid = y.grid();
    w.write_all(SNAPSHOT_MAGIC)?;
    w.write_u32::<LittleEndian>(SNAPSHOT_VERSION)?;
    w.write_u32::<LittleEndian>(grid.n() as u32)?;
    w.write_f64::<LittleEndian>(grid.half_length())?;
    w.write_u32::<LittleEndian>(2)?;
    for f in [&y.fields.e, &y.fields.a] {
        for c in f.coeffs() {
            for z in c {
                w.write_f64::<LittleEndian>(z.re)?;
                w.write_f64::<LittleEndian>(z.im)?;
            }
        }
    }
    for x in y.q.iter().chain(y.p.iter()) {
        w.write_f64::<LittleEndian>(*x)?;
    }
    Ok(())
}

pub fn read_snapshot<R: Read>(mut r: R) -> Result<PhaseVector> {
    let bad = |m: String| Error::Snapshot(m);
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic).map_err(|e| bad(format!("header: {e}")))?;
    if &magic != SNAPSHOT_MAGIC {
        return Err(bad("bad magic".into()));
    }
    let version = r.read_u32::<LittleEndian>()?;
    if version != SNAPSHOT_VERSION {
        return Err(bad(format!("unsupported version {version}")));
    }
    let n = r.read_u32::<LittleEndian>()? as usize;
    let l = r.read_f64::<LittleEndian>()?;
    let count = r.read_u32::<LittleEndian>()?;
    if count != 2 {
        return Err(bad(format!("expected 2 fields, found {count}")));
    }
    let grid: Arc<FourierGrid> = FourierGrid::new(n, l).map_err(|e| bad(e.to_string()))?;
    let mut read_field = || -> Result<SolenoidalField> {
        let mut coeffs = Vec::with_capacity(grid.len());
        for _ in 0..grid.len() {
            let mut c = [C64::new(0.0, 0.0); 3];
            for z in c.iter_mut() {
                let re = r.read_f64::<LittleEndian>().map_err(|e| bad(format!("truncated: {e}")))?;
                let im = r.read_f64::<LittleEndian>().map_err(|e| bad(format!("truncated: {e}")))?;
                *z = C64::new(re, im);
            }
            coeffs.push(c);
        }
        Ok(SolenoidalField::from_transversal(&grid, coeffs))
    };
    let e = read_field()?;
    let a = read_field()?;
    let mut particle = [0.0; 6];
    for x in particle.iter_mut() {
        *x = r.read_f64::<LittleEndian>().map_err(|e| bad(format!("truncated: {e}")))?;
    }
    Ok(PhaseVector {
        fields: FieldPair { e, a },
        q: Vec3::new(particle[0], particle[1], particle[2]),
        p: Vec3::new(particle[3], particle[4], particle[5]),
    })
}

pub fn save_snapshot(path: &Path, y: &PhaseVector) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_snapshot(&mut w, y)?;
    w.flush()?;
    Ok(())
}

pub fn load_snapshot(path: &Path) -> Result<PhaseVector> {
    read_snapshot(BufReader::new(File::open(path)?))
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// Writes a header row and numeric rows with full precision.
pub fn write_csv<W: Write>(w: W, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(header).map_err(csv_err)?;
    for row in rows {
        if row.len() != header.len() {
            return Err(Error::Io(format!("row has {} columns, header {}", row.len(), header.len())));
        }
        out.write_record(row.iter().map(|x| format!("{x:e}"))).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

pub fn save_csv(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    write_csv(File::create(path)?, header, rows)
}

/// Reads a numeric column pair from a CSV with a header row; columns are matched by
/// name up to an optional bracketed unit suffix.
pub fn read_csv_columns<R: Read>(r: R, x: &str, y: &str) -> Result<Vec<(f64, f64)>> {
    let mut rd = csv::Reader::from_reader(r);
    let headers = rd.headers().map_err(csv_err)?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name || h.split(" [").next() == Some(name))
            .ok_or_else(|| Error::Config(format!("column {name:?} not found")))
    };
    let (ix, iy) = (find(x)?, find(y)?);
    let mut out = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(csv_err)?;
        let parse = |i: usize| -> Result<f64> {
            rec[i].trim().parse::<f64>().map_err(|e| Error::Config(format!("bad number {:?}: {e}", &rec[i])))
        };
        out.push((parse(ix)?, parse(iy)?));
    }
    Ok(out)
}

pub fn save_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Error::Io(e.to_string()))?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}
