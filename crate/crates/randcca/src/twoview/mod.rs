//! Row-aligned sparse two-view dataset with counted streaming passes.
//!
//! A [`TwoViewDataset`] holds both views of every sample as sorted sparse
//! vectors plus ingestion-time statistics ([`ViewStats`]). Solvers never see
//! the rows directly; they consume the dataset through the pass operations
//! in this module (`pass_crossprod`, `pass_final`, `pass_gram_apply`,
//! `objective`), each of which sweeps the rows exactly once and increments
//! the dataset's pass counter by one. Mean centering is applied inside the
//! passes as an analytic rank-one correction, so centered matrices are never
//! materialized and sparsity is preserved.
//!
//! Sweeps run in a fixed ascending row order with a deterministic chunked
//! reduction: chunk partials are merged in chunk order, so results are
//! bit-identical between runs and independent of worker count.

mod hashing;
mod ingest;
mod passes;

pub use hashing::{fnv1a64, hash_tokens, token_slot_sign};
pub use ingest::{ingest_dense_csv, ingest_parallel_text, ingest_sparse, ingest_sparse_auto};

use std::sync::atomic::{AtomicU64, Ordering};

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::rng::SeededRng;

/// Which view of the dataset an operation addresses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum View {
    A,
    B,
}

/// Sorted sparse vector: strictly increasing indices, finite nonzero values.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SparseVec {
    indices: Vec<u32>,
    values: Vec<f64>,
}

impl SparseVec {
    pub fn new() -> Self {
        Self::default()
    }

    /// Canonicalizes arbitrary `(index, value)` pairs: sorts by index, sums
    /// duplicates, and drops entries that are exactly zero.
    pub fn from_pairs(mut pairs: Vec<(u32, f64)>) -> Self {
        pairs.sort_by_key(|&(i, _)| i);
        let mut indices = Vec::with_capacity(pairs.len());
        let mut values = Vec::with_capacity(pairs.len());
        for (i, v) in pairs {
            match indices.last() {
                Some(&last) if last == i => {
                    let slot = values.last_mut().unwrap();
                    *slot += v;
                    if *slot == 0.0 {
                        indices.pop();
                        values.pop();
                    }
                }
                _ => {
                    if v != 0.0 {
                        indices.push(i);
                        values.push(v);
                    }
                }
            }
        }
        Self { indices, values }
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.indices
            .iter()
            .copied()
            .zip(self.values.iter().copied())
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Sparse-sparse inner product (merge join).
    pub fn dot(&self, other: &Self) -> f64 {
        let (mut i, mut j, mut acc) = (0, 0, 0.0);
        while i < self.indices.len() && j < other.indices.len() {
            match self.indices[i].cmp(&other.indices[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    acc += self.values[i] * other.values[j];
                    i += 1;
                    j += 1;
                }
            }
        }
        acc
    }

    fn validate(&self, dim: usize, what: &str) -> Result<()> {
        let mut prev: Option<u32> = None;
        for (i, v) in self.iter() {
            if (i as usize) >= dim {
                return Err(Error::DimensionMismatch(format!(
                    "{what}: index {i} out of range for dimension {dim}"
                )));
            }
            if let Some(p) = prev {
                if i <= p {
                    return Err(Error::InvalidArgument(format!(
                        "{what}: indices not strictly increasing at {i}"
                    )));
                }
            }
            if !v.is_finite() {
                return Err(Error::Numeric(format!("{what}: non-finite value at {i}")));
            }
            prev = Some(i);
        }
        Ok(())
    }
}

/// Per-view ingestion statistics.
///
/// `trace_*` is the squared Frobenius norm of the view accumulated over
/// stored entries in row order, so recomputation is bit-reproducible. Means
/// are nonzero only on active features, which lets the centering corrections
/// run over the active set instead of the full dimension.
#[derive(Clone, Debug)]
pub struct ViewStats {
    mu_a: Vec<f64>,
    mu_b: Vec<f64>,
    trace_a: f64,
    trace_b: f64,
    n: usize,
    active_a: Vec<u32>,
    active_b: Vec<u32>,
}

impl ViewStats {
    pub(crate) fn compute(
        rows_a: &[SparseVec],
        rows_b: &[SparseVec],
        d_a: usize,
        d_b: usize,
    ) -> Self {
        let n = rows_a.len();
        let (mu_a, trace_a, active_a) = Self::one_view(rows_a, d_a);
        let (mu_b, trace_b, active_b) = Self::one_view(rows_b, d_b);
        Self {
            mu_a,
            mu_b,
            trace_a,
            trace_b,
            n,
            active_a,
            active_b,
        }
    }

    fn one_view(rows: &[SparseVec], d: usize) -> (Vec<f64>, f64, Vec<u32>) {
        let mut sums = vec![0.0; d];
        let mut seen = vec![false; d];
        let mut trace = 0.0;
        for row in rows {
            for (i, v) in row.iter() {
                trace += v * v;
                sums[i as usize] += v;
                seen[i as usize] = true;
            }
        }
        let n = rows.len();
        if n > 0 {
            let inv = 1.0 / n as f64;
            for s in &mut sums {
                *s *= inv;
            }
        }
        let active = seen
            .iter()
            .enumerate()
            .filter_map(|(i, &s)| s.then_some(i as u32))
            .collect();
        (sums, trace, active)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mu(&self, view: View) -> &[f64] {
        match view {
            View::A => &self.mu_a,
            View::B => &self.mu_b,
        }
    }

    pub fn trace(&self, view: View) -> f64 {
        match view {
            View::A => self.trace_a,
            View::B => self.trace_b,
        }
    }

    pub fn active(&self, view: View) -> &[u32] {
        match view {
            View::A => &self.active_a,
            View::B => &self.active_b,
        }
    }
}

/// Counts full sweeps over the dataset rows. Shared by all pass operations;
/// updates are atomic so concurrent passes account correctly.
#[derive(Debug, Default)]
pub struct PassCounter(AtomicU64);

impl PassCounter {
    pub fn get(&self) -> u64 {
        self.0.load(Ordering::Relaxed)
    }

    fn bump(&self) {
        self.0.fetch_add(1, Ordering::Relaxed);
    }
}

/// Row-aligned sparse two-view matrix store supporting repeated streaming
/// passes. Immutable after construction; safe to share across threads.
#[derive(Debug)]
pub struct TwoViewDataset {
    d_a: usize,
    d_b: usize,
    rows_a: Vec<SparseVec>,
    rows_b: Vec<SparseVec>,
    stats: ViewStats,
    passes: PassCounter,
}

impl Clone for TwoViewDataset {
    fn clone(&self) -> Self {
        Self {
            d_a: self.d_a,
            d_b: self.d_b,
            rows_a: self.rows_a.clone(),
            rows_b: self.rows_b.clone(),
            stats: self.stats.clone(),
            passes: PassCounter(AtomicU64::new(self.passes.get())),
        }
    }
}

impl TwoViewDataset {
    /// Builds a dataset from aligned row lists, validating every row
    /// (indices strictly increasing and within bounds, values finite).
    pub fn from_rows(
        rows_a: Vec<SparseVec>,
        rows_b: Vec<SparseVec>,
        d_a: usize,
        d_b: usize,
    ) -> Result<Self> {
        if rows_a.len() != rows_b.len() {
            return Err(Error::LineCountMismatch {
                lines_a: rows_a.len(),
                lines_b: rows_b.len(),
            });
        }
        for (r, row) in rows_a.iter().enumerate() {
            row.validate(d_a, &format!("view A row {r}"))?;
        }
        for (r, row) in rows_b.iter().enumerate() {
            row.validate(d_b, &format!("view B row {r}"))?;
        }
        Ok(Self::assemble(rows_a, rows_b, d_a, d_b))
    }

    /// Construction path for rows that are already canonical.
    pub(crate) fn assemble(
        rows_a: Vec<SparseVec>,
        rows_b: Vec<SparseVec>,
        d_a: usize,
        d_b: usize,
    ) -> Self {
        let stats = ViewStats::compute(&rows_a, &rows_b, d_a, d_b);
        Self {
            d_a,
            d_b,
            rows_a,
            rows_b,
            stats,
            passes: PassCounter::default(),
        }
    }

    pub fn n(&self) -> usize {
        self.rows_a.len()
    }

    pub fn dim(&self, view: View) -> usize {
        match view {
            View::A => self.d_a,
            View::B => self.d_b,
        }
    }

    pub fn rows(&self, view: View) -> &[SparseVec] {
        match view {
            View::A => &self.rows_a,
            View::B => &self.rows_b,
        }
    }

    pub fn stats(&self) -> &ViewStats {
        &self.stats
    }

    /// Counted data passes performed on this dataset so far.
    pub fn passes(&self) -> u64 {
        self.passes.get()
    }

    pub(crate) fn count_pass(&self) {
        self.passes.bump();
    }

    /// Seeded random split: rows are permuted, then cut at
    /// `round(n · train_fraction)`. Both halves get freshly computed stats.
    pub fn split(&self, train_fraction: f64, seed: u64) -> Result<(Self, Self)> {
        if train_fraction.is_nan() || train_fraction <= 0.0 || train_fraction > 1.0 {
            return Err(Error::InvalidArgument(format!(
                "train_fraction must be in (0, 1], got {train_fraction}"
            )));
        }
        let n = self.n();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut rng = SeededRng::new(seed);
        rng.shuffle(&mut perm);
        let cut = ((n as f64 * train_fraction).round() as usize).min(n);
        if cut == 0 {
            return Err(Error::InvalidArgument(
                "resulting train set is empty; raise train_fraction".into(),
            ));
        }
        let take = |ix: &[usize]| -> (Vec<SparseVec>, Vec<SparseVec>) {
            (
                ix.iter().map(|&r| self.rows_a[r].clone()).collect(),
                ix.iter().map(|&r| self.rows_b[r].clone()).collect(),
            )
        };
        let (train_a, train_b) = take(&perm[..cut]);
        let (test_a, test_b) = take(&perm[cut..]);
        Ok((
            Self::assemble(train_a, train_b, self.d_a, self.d_b),
            Self::assemble(test_a, test_b, self.d_a, self.d_b),
        ))
    }

    /// Materializes both views as dense matrices (desk-scale helper for the
    /// oracle and for tests).
    pub fn to_dense(&self) -> (DenseMatrix, DenseMatrix) {
        let n = self.n();
        let mut a = DenseMatrix::zeros(n, self.d_a);
        let mut b = DenseMatrix::zeros(n, self.d_b);
        for (r, row) in self.rows_a.iter().enumerate() {
            for (i, v) in row.iter() {
                a.set(r, i as usize, v);
            }
        }
        for (r, row) in self.rows_b.iter().enumerate() {
            for (i, v) in row.iter() {
                b.set(r, i as usize, v);
            }
        }
        (a, b)
    }
}
