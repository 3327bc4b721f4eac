//! Binary model persistence.
//!
//! Layout (all integers and floats little-endian):
//!
//! ```text
//! offset  size        field
//! 0       4           magic "RCCA"
//! 4       4           version: u32 = 1
//! 8       8           d_a: u64
//! 16      8           d_b: u64
//! 24      8           k: u64
//! 32      1           hash flag: u8 (1 when the model was text-ingested)
//! [33     4           hash_bits: u32    — only when flag = 1]
//! [37     8           hash_seed: u64    — only when flag = 1]
//! ...     d_a·k·8     X_a, row-major f64
//! ...     d_b·k·8     X_b, row-major f64
//! ...     k·8         correlations, f64
//! ```
//!
//! Round-trips are bit-exact: values are stored with `f64::to_le_bytes`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use randcca::DenseMatrix;

pub const MAGIC: [u8; 4] = *b"RCCA";
pub const VERSION: u32 = 1;

#[derive(Clone, Debug)]
pub struct StoredModel {
    pub d_a: usize,
    pub d_b: usize,
    pub k: usize,
    /// (hash_bits, hash_seed) when the training data was text-ingested.
    pub hash: Option<(u32, u64)>,
    pub x_a: DenseMatrix,
    pub x_b: DenseMatrix,
    pub correlations: Vec<f64>,
}

pub fn save(path: &Path, model: &StoredModel) -> Result<()> {
    let file = File::create(path)
        .with_context(|| format!("failed to create model file {}", path.display()))?;
    let mut w = BufWriter::new(file);
    w.write_all(&MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(model.d_a as u64).to_le_bytes())?;
    w.write_all(&(model.d_b as u64).to_le_bytes())?;
    w.write_all(&(model.k as u64).to_le_bytes())?;
    match model.hash {
        Some((bits, seed)) => {
            w.write_all(&[1u8])?;
            w.write_all(&bits.to_le_bytes())?;
            w.write_all(&seed.to_le_bytes())?;
        }
        None => w.write_all(&[0u8])?,
    }
    write_row_major(&mut w, &model.x_a)?;
    write_row_major(&mut w, &model.x_b)?;
    for &c in &model.correlations {
        w.write_all(&c.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

fn write_row_major(w: &mut impl Write, m: &DenseMatrix) -> Result<()> {
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            w.write_all(&m.at(i, j).to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn load(path: &Path) -> Result<StoredModel> {
    let file = File::open(path)
        .with_context(|| format!("failed to open model file {}", path.display()))?;
    let file_len = file.metadata()?.len() as u128;
    let mut r = BufReader::new(file);

    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if magic != MAGIC {
        bail!("{} is not a model file (bad magic)", path.display());
    }
    let version = read_u32(&mut r)?;
    if version != VERSION {
        bail!("unsupported model file version {version}");
    }
    let d_a = read_u64(&mut r)? as usize;
    let d_b = read_u64(&mut r)? as usize;
    let k = read_u64(&mut r)? as usize;
    let mut flag = [0u8; 1];
    r.read_exact(&mut flag)?;
    let hash = match flag[0] {
        0 => None,
        1 => {
            let bits = read_u32(&mut r)?;
            let seed = read_u64(&mut r)?;
            Some((bits, seed))
        }
        other => bail!("bad hash flag {other} in model file"),
    };

    // header sanity before any dimension-sized allocation
    let hash_len: u128 = if hash.is_some() { 12 } else { 0 };
    let header: u128 = 4 + 4 + 24 + 1 + hash_len;
    let payload = 8u128 * (d_a as u128 * k as u128 + d_b as u128 * k as u128 + k as u128);
    if file_len != header + payload {
        bail!(
            "{} is truncated or corrupt: header declares {} payload bytes, file has {}",
            path.display(),
            payload,
            file_len.saturating_sub(header)
        );
    }

    let x_a = read_row_major(&mut r, d_a, k)?;
    let x_b = read_row_major(&mut r, d_b, k)?;
    let mut correlations = Vec::with_capacity(k);
    for _ in 0..k {
        correlations.push(read_f64(&mut r)?);
    }
    Ok(StoredModel {
        d_a,
        d_b,
        k,
        hash,
        x_a,
        x_b,
        correlations,
    })
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

fn read_u64(r: &mut impl Read) -> Result<u64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(u64::from_le_bytes(buf))
}

fn read_f64(r: &mut impl Read) -> Result<f64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(f64::from_le_bytes(buf))
}

fn read_row_major(r: &mut impl Read, rows: usize, cols: usize) -> Result<DenseMatrix> {
    let mut m = DenseMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m.set(i, j, read_f64(r)?);
        }
    }
    Ok(m)
}
