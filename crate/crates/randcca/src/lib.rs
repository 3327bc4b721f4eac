//! Randomized canonical correlation analysis over streaming two-view data.
//!
//! The solver finds paired linear projections of two row-aligned views that
//! maximize cross-correlation under per-view (regularized) whitening
//! constraints. The flagship path is a few-pass randomized algorithm: a
//! Gaussian-sketched range finder with optional power iterations over the
//! cross matrix AᵀB, followed by one final data pass and a small whitened
//! SVD. A Horst (block power) iteration baseline, an exact dense oracle for
//! desk-scale verification, and a two-pass spectrum estimator round out the
//! toolkit.
//!
//! Data never has to fit in memory as dense matrices: every solver consumes
//! the dataset exclusively through counted streaming passes
//! ([`twoview::TwoViewDataset`]), and mean centering is applied analytically
//! as a rank-one correction without materializing centered rows.
//!
//! Modules:
//! - [`twoview`] — dataset storage, ingestion (hashed parallel text, sparse,
//!   dense CSV), splitting, statistics, and the streaming pass primitives.
//! - [`matkernels`] — dense kernels for the small factors (QR, Cholesky,
//!   triangular solves, Jacobi SVD).
//! - [`rcca`] — the randomized solver, regularization helpers, range-finder
//!   diagnostics, and two-pass spectrum estimation.
//! - [`horst`] — Horst iteration with approximate (CG) least-squares inner
//!   solves and warm starting from a randomized solution.
//! - [`oracle`] — exact small-scale reference solutions.
//! - [`synth`] — seeded synthetic two-view generator with a power-law cross
//!   spectrum.

// index-based loops over column-major buffers are the house style for the
// dense kernels and pass accumulators
#![allow(clippy::needless_range_loop)]

pub mod dense;
pub mod error;
pub mod horst;
pub mod matkernels;
pub mod oracle;
pub mod rcca;
pub mod rng;
pub mod synth;
pub mod twoview;

pub use dense::DenseMatrix;
pub use error::{Error, Result};
