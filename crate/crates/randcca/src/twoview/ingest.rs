//! Dataset ingestion: hashed parallel text, sparse `idx:val` files, and
//! dense CSV for oracle-scale tests. Statistics are computed during
//! ingestion; none of these count as data passes.

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use super::{hashing, SparseVec, TwoViewDataset};
use crate::error::{Error, Result};

fn read_lines(path: &Path) -> Result<Vec<String>> {
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    BufReader::new(file)
        .lines()
        .collect::<std::io::Result<Vec<_>>>()
        .map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
}

fn require_aligned(lines_a: &[String], lines_b: &[String]) -> Result<()> {
    if lines_a.len() != lines_b.len() {
        return Err(Error::LineCountMismatch {
            lines_a: lines_a.len(),
            lines_b: lines_b.len(),
        });
    }
    Ok(())
}

/// Ingests two line-aligned UTF-8 text files via signed feature hashing.
///
/// Line `i` of each file is whitespace-tokenized into a bag of words; each
/// token contributes its hash sign to its hash slot (see
/// [`super::token_slot_sign`]). Both views end up with dimension `2^hash_bits`.
pub fn ingest_parallel_text(
    path_a: &Path,
    path_b: &Path,
    hash_bits: u32,
    hash_seed: u64,
) -> Result<TwoViewDataset> {
    if !(1..=30).contains(&hash_bits) {
        return Err(Error::InvalidArgument(format!(
            "hash_bits must be in 1..=30, got {hash_bits}"
        )));
    }
    let lines_a = read_lines(path_a)?;
    let lines_b = read_lines(path_b)?;
    require_aligned(&lines_a, &lines_b)?;

    let d = 1usize << hash_bits;
    let hash_view = |lines: &[String]| -> Vec<SparseVec> {
        lines
            .iter()
            .map(|l| hashing::hash_tokens(l.split_whitespace(), hash_bits, hash_seed))
            .collect()
    };
    let rows_a = hash_view(&lines_a);
    let rows_b = hash_view(&lines_b);
    Ok(TwoViewDataset::assemble(rows_a, rows_b, d, d))
}

fn parse_sparse_view(path: &Path, dim: usize) -> Result<Vec<SparseVec>> {
    if dim > u32::MAX as usize + 1 {
        return Err(Error::InvalidArgument(format!(
            "sparse dimension {dim} exceeds the 32-bit index range"
        )));
    }
    let lines = read_lines(path)?;
    let path_str = path.display().to_string();
    let mut rows = Vec::with_capacity(lines.len());
    for (lineno, line) in lines.iter().enumerate() {
        let mut pairs = Vec::new();
        for tok in line.split_whitespace() {
            let (idx_s, val_s) = tok.split_once(':').ok_or_else(|| Error::Parse {
                path: path_str.clone(),
                line: lineno + 1,
                message: format!("malformed token '{tok}' (expected idx:val)"),
            })?;
            let idx: u32 = idx_s.parse().map_err(|_| Error::Parse {
                path: path_str.clone(),
                line: lineno + 1,
                message: format!("invalid feature index '{idx_s}'"),
            })?;
            let val: f64 = val_s.parse().map_err(|_| Error::Parse {
                path: path_str.clone(),
                line: lineno + 1,
                message: format!("invalid value '{val_s}'"),
            })?;
            if (idx as usize) >= dim {
                return Err(Error::Parse {
                    path: path_str.clone(),
                    line: lineno + 1,
                    message: format!("feature index {idx} out of range for dimension {dim}"),
                });
            }
            if !val.is_finite() {
                return Err(Error::Parse {
                    path: path_str.clone(),
                    line: lineno + 1,
                    message: format!("non-finite value '{val_s}'"),
                });
            }
            pairs.push((idx, val));
        }
        // from_pairs sorts, sums duplicate indices, and drops exact zeros
        rows.push(SparseVec::from_pairs(pairs));
    }
    Ok(rows)
}

/// Ingests per-view sparse text files (`idx:val` pairs, 0-based indices,
/// one row per line) with declared dimensions.
pub fn ingest_sparse(
    path_a: &Path,
    path_b: &Path,
    d_a: usize,
    d_b: usize,
) -> Result<TwoViewDataset> {
    let rows_a = parse_sparse_view(path_a, d_a)?;
    let rows_b = parse_sparse_view(path_b, d_b)?;
    if rows_a.len() != rows_b.len() {
        return Err(Error::LineCountMismatch {
            lines_a: rows_a.len(),
            lines_b: rows_b.len(),
        });
    }
    Ok(TwoViewDataset::assemble(rows_a, rows_b, d_a, d_b))
}

fn scan_max_index(path: &Path) -> Result<Option<u32>> {
    let lines = read_lines(path)?;
    let mut max = None;
    for line in &lines {
        for tok in line.split_whitespace() {
            if let Some((idx_s, _)) = tok.split_once(':') {
                if let Ok(idx) = idx_s.parse::<u32>() {
                    max = Some(max.map_or(idx, |m: u32| m.max(idx)));
                }
            }
        }
    }
    Ok(max)
}

/// Like [`ingest_sparse`], inferring any missing dimension as
/// `max index + 1` (1 when the file holds no entries).
pub fn ingest_sparse_auto(
    path_a: &Path,
    path_b: &Path,
    d_a: Option<usize>,
    d_b: Option<usize>,
) -> Result<TwoViewDataset> {
    let d_a = match d_a {
        Some(d) => d,
        None => scan_max_index(path_a)?.map_or(1, |m| m as usize + 1),
    };
    let d_b = match d_b {
        Some(d) => d,
        None => scan_max_index(path_b)?.map_or(1, |m| m as usize + 1),
    };
    ingest_sparse(path_a, path_b, d_a, d_b)
}

fn parse_dense_view(path: &Path) -> Result<(Vec<SparseVec>, usize)> {
    let lines = read_lines(path)?;
    let path_str = path.display().to_string();
    let mut dim: Option<usize> = None;
    let mut rows = Vec::with_capacity(lines.len());
    for (lineno, line) in lines.iter().enumerate() {
        let mut pairs = Vec::new();
        let mut width = 0usize;
        for (col, field) in line.split(',').enumerate() {
            let val: f64 = field.trim().parse().map_err(|_| Error::Parse {
                path: path_str.clone(),
                line: lineno + 1,
                message: format!("invalid float '{}'", field.trim()),
            })?;
            if !val.is_finite() {
                return Err(Error::Parse {
                    path: path_str.clone(),
                    line: lineno + 1,
                    message: format!("non-finite value '{}'", field.trim()),
                });
            }
            if val != 0.0 {
                pairs.push((col as u32, val));
            }
            width = col + 1;
        }
        match dim {
            None => dim = Some(width),
            Some(d) if d != width => {
                return Err(Error::Parse {
                    path: path_str.clone(),
                    line: lineno + 1,
                    message: format!("row has {width} columns, expected {d}"),
                });
            }
            _ => {}
        }
        rows.push(SparseVec::from_pairs(pairs));
    }
    Ok((rows, dim.unwrap_or(0)))
}

/// Ingests a pair of dense CSV files (one row per line, comma-separated
/// floats). Dimensions come from the files themselves.
pub fn ingest_dense_csv(path_a: &Path, path_b: &Path) -> Result<TwoViewDataset> {
    let (rows_a, d_a) = parse_dense_view(path_a)?;
    let (rows_b, d_b) = parse_dense_view(path_b)?;
    if rows_a.len() != rows_b.len() {
        return Err(Error::LineCountMismatch {
            lines_a: rows_a.len(),
            lines_b: rows_b.len(),
        });
    }
    Ok(TwoViewDataset::assemble(rows_a, rows_b, d_a, d_b))
}
