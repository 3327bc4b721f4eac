//! Streaming pass primitives.
//!
//! Every operation here sweeps the rows exactly once and bumps the pass
//! counter by one. Rows are visited in ascending order within fixed-size
//! chunks; chunk partials are merged in chunk order, so the floating-point
//! result is identical whether chunks run on one thread or many.
//!
//! Centering never touches the rows: for Ā = A − 1μᵀ the identities
//!   ĀᵀB̄Q = Aᵀ(BQ) − n·μa(μbᵀQ)
//!   QᵀĀᵀĀQ = QᵀAᵀAQ − n·(μᵀQ)ᵀ(μᵀQ)
//! turn the mean shift into a rank-one correction applied after the sweep.

use super::{SparseVec, TwoViewDataset, View};
use crate::dense::DenseMatrix;
use crate::error::{Error, Result};

const PASS_CHUNK_ROWS: usize = 1024;

// The per-row kernels work on transposed operands: a d×m projector Q is
// flipped once per pass into qt = Qᵀ (m×d, column-major), so feature j's
// sketch row qt.col(j) is one contiguous slice, and the d×m accumulators
// are kept in the same m-major layout until the pass completes. Flipping
// the layout costs two O(d·m) copies per pass and turns every per-nonzero
// access from a stride-d walk into a contiguous one.

/// `out = Qᵀ x` for a sparse row, with `qt = Qᵀ`.
#[inline]
fn project(row: &SparseVec, qt: &DenseMatrix, out: &mut [f64]) {
    out.fill(0.0);
    for (idx, v) in row.iter() {
        let col = qt.col(idx as usize);
        for (o, &q) in out.iter_mut().zip(col) {
            *o += v * q;
        }
    }
}

/// `acc += x ⊗ w` for a sparse row, accumulator in m-major (transposed)
/// layout: entry (feature j, column l) lives at `j·m + l`.
#[inline]
fn scatter(row: &SparseVec, w: &[f64], acc_t: &mut [f64], m: usize) {
    for (idx, v) in row.iter() {
        let j = idx as usize;
        let dst = &mut acc_t[j * m..(j + 1) * m];
        for (d, &wl) in dst.iter_mut().zip(w) {
            *d += v * wl;
        }
    }
}

fn add_into(dst: &mut [f64], src: &[f64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d += s;
    }
}

/// Wraps an m-major accumulator buffer back into a d×m matrix.
fn untranspose(m: usize, d: usize, acc_t: Vec<f64>) -> Result<DenseMatrix> {
    Ok(DenseMatrix::from_column_major(m, d, acc_t)?.transpose())
}

impl TwoViewDataset {
    /// Deterministic chunked sweep: `make` builds a zeroed accumulator,
    /// `step` folds one aligned row pair in, `combine` merges a chunk
    /// partial into the running total (called in ascending chunk order).
    fn sweep<A, Make, Step>(&self, make: Make, step: Step, mut combine: impl FnMut(&mut A, A)) -> A
    where
        A: Send,
        Make: Fn() -> A + Sync,
        Step: Fn(&mut A, &SparseVec, &SparseVec) + Sync,
    {
        let n = self.n();
        let rows_a = self.rows(View::A);
        let rows_b = self.rows(View::B);
        let run_chunk = |start: usize| {
            let end = (start + PASS_CHUNK_ROWS).min(n);
            let mut acc = make();
            for r in start..end {
                step(&mut acc, &rows_a[r], &rows_b[r]);
            }
            acc
        };

        let starts: Vec<usize> = (0..n).step_by(PASS_CHUNK_ROWS).collect();
        let mut total = make();
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            let width = rayon::current_num_threads().max(1);
            for group in starts.chunks(width) {
                let partials: Vec<A> = group.par_iter().map(|&s| run_chunk(s)).collect();
                for p in partials {
                    combine(&mut total, p);
                }
            }
        }
        #[cfg(not(feature = "parallel"))]
        {
            for &s in &starts {
                let p = run_chunk(s);
                combine(&mut total, p);
            }
        }
        self.count_pass();
        total
    }

    fn check_projector(&self, view: View, m: &DenseMatrix, what: &str) -> Result<()> {
        let d = self.dim(view);
        if m.rows() != d {
            return Err(Error::DimensionMismatch(format!(
                "{what}: matrix has {} rows, view dimension is {d}",
                m.rows()
            )));
        }
        m.check_finite()
    }

    /// `μᵀQ` over the view's active features (μ is zero elsewhere);
    /// `qt = Qᵀ`.
    fn project_mean(&self, view: View, qt: &DenseMatrix) -> Vec<f64> {
        let mu = self.stats().mu(view);
        let mut out = vec![0.0; qt.rows()];
        for &idx in self.stats().active(view) {
            let j = idx as usize;
            let w = mu[j];
            let col = qt.col(j);
            for (o, &q) in out.iter_mut().zip(col) {
                *o += w * q;
            }
        }
        out
    }

    /// `acc -= n · μ gᵀ` on an m-major accumulator, touching only the
    /// view's active feature slices.
    fn subtract_mean_outer(&self, view: View, acc_t: &mut [f64], m: usize, g: &[f64]) {
        let n = self.n() as f64;
        let mu = self.stats().mu(view);
        for &idx in self.stats().active(view) {
            let j = idx as usize;
            let w = n * mu[j];
            let dst = &mut acc_t[j * m..(j + 1) * m];
            for (d, &gl) in dst.iter_mut().zip(g) {
                *d -= w * gl;
            }
        }
    }

    /// One sweep computing `Y_a = ĀᵀB̄ Q_b` and `Y_b = B̄ᵀĀ Q_a` together.
    ///
    /// Either projector may have zero columns, which turns the corresponding
    /// output off; this is how single-sided products are taken without
    /// paying for the other side.
    pub fn pass_crossprod(
        &self,
        q_a: &DenseMatrix,
        q_b: &DenseMatrix,
        centered: bool,
    ) -> Result<(DenseMatrix, DenseMatrix)> {
        self.check_projector(View::A, q_a, "pass_crossprod Q_a")?;
        self.check_projector(View::B, q_b, "pass_crossprod Q_b")?;
        let (d_a, d_b) = (self.dim(View::A), self.dim(View::B));
        let (m_a, m_b) = (q_a.cols(), q_b.cols());
        let qa_t = q_a.transpose();
        let qb_t = q_b.transpose();

        struct Acc {
            ya: Vec<f64>,
            yb: Vec<f64>,
            wa: Vec<f64>,
            wb: Vec<f64>,
        }
        let acc = self.sweep(
            || Acc {
                ya: vec![0.0; d_a * m_b],
                yb: vec![0.0; d_b * m_a],
                wa: vec![0.0; m_a],
                wb: vec![0.0; m_b],
            },
            |acc, row_a, row_b| {
                project(row_b, &qb_t, &mut acc.wb);
                project(row_a, &qa_t, &mut acc.wa);
                scatter(row_a, &acc.wb, &mut acc.ya, m_b);
                scatter(row_b, &acc.wa, &mut acc.yb, m_a);
            },
            |total, part| {
                add_into(&mut total.ya, &part.ya);
                add_into(&mut total.yb, &part.yb);
            },
        );

        let (mut ya_t, mut yb_t) = (acc.ya, acc.yb);
        if centered {
            let gb = self.project_mean(View::B, &qb_t);
            let ga = self.project_mean(View::A, &qa_t);
            self.subtract_mean_outer(View::A, &mut ya_t, m_b, &gb);
            self.subtract_mean_outer(View::B, &mut yb_t, m_a, &ga);
        }
        Ok((untranspose(m_b, d_a, ya_t)?, untranspose(m_a, d_b, yb_t)?))
    }

    /// One sweep computing the three small final-pass products
    /// `C_a = QaᵀĀᵀĀQa`, `C_b = QbᵀB̄ᵀB̄Qb`, `F = QaᵀĀᵀB̄Qb`.
    pub fn pass_final(
        &self,
        q_a: &DenseMatrix,
        q_b: &DenseMatrix,
        centered: bool,
    ) -> Result<(DenseMatrix, DenseMatrix, DenseMatrix)> {
        self.check_projector(View::A, q_a, "pass_final Q_a")?;
        self.check_projector(View::B, q_b, "pass_final Q_b")?;
        let (m_a, m_b) = (q_a.cols(), q_b.cols());
        let qa_t = q_a.transpose();
        let qb_t = q_b.transpose();

        struct Acc {
            ca: Vec<f64>,
            cb: Vec<f64>,
            f: Vec<f64>,
            sa: Vec<f64>,
            sb: Vec<f64>,
        }
        let acc = self.sweep(
            || Acc {
                ca: vec![0.0; m_a * m_a],
                cb: vec![0.0; m_b * m_b],
                f: vec![0.0; m_a * m_b],
                sa: vec![0.0; m_a],
                sb: vec![0.0; m_b],
            },
            |acc, row_a, row_b| {
                project(row_a, &qa_t, &mut acc.sa);
                project(row_b, &qb_t, &mut acc.sb);
                for j in 0..m_a {
                    let w = acc.sa[j];
                    if w != 0.0 {
                        for i in 0..m_a {
                            acc.ca[i + j * m_a] += acc.sa[i] * w;
                        }
                    }
                }
                for j in 0..m_b {
                    let w = acc.sb[j];
                    if w != 0.0 {
                        for i in 0..m_b {
                            acc.cb[i + j * m_b] += acc.sb[i] * w;
                        }
                    }
                }
                for j in 0..m_b {
                    let w = acc.sb[j];
                    if w != 0.0 {
                        for i in 0..m_a {
                            acc.f[i + j * m_a] += acc.sa[i] * w;
                        }
                    }
                }
            },
            |total, part| {
                add_into(&mut total.ca, &part.ca);
                add_into(&mut total.cb, &part.cb);
                add_into(&mut total.f, &part.f);
            },
        );

        let mut ca = DenseMatrix::from_column_major(m_a, m_a, acc.ca)?;
        let mut cb = DenseMatrix::from_column_major(m_b, m_b, acc.cb)?;
        let mut f = DenseMatrix::from_column_major(m_a, m_b, acc.f)?;
        if centered {
            let n = self.n() as f64;
            let ga = self.project_mean(View::A, &qa_t);
            let gb = self.project_mean(View::B, &qb_t);
            for j in 0..m_a {
                for i in 0..m_a {
                    let cur = ca.at(i, j);
                    ca.set(i, j, cur - n * ga[i] * ga[j]);
                }
            }
            for j in 0..m_b {
                for i in 0..m_b {
                    let cur = cb.at(i, j);
                    cb.set(i, j, cur - n * gb[i] * gb[j]);
                }
            }
            for j in 0..m_b {
                for i in 0..m_a {
                    let cur = f.at(i, j);
                    f.set(i, j, cur - n * ga[i] * gb[j]);
                }
            }
        }
        Ok((ca, cb, f))
    }

    /// One sweep computing `(ĀᵀĀ + λI) P` for one view (the matrix-product
    /// step of the Horst inner least-squares solver).
    pub fn pass_gram_apply(
        &self,
        view: View,
        p: &DenseMatrix,
        lambda: f64,
        centered: bool,
    ) -> Result<DenseMatrix> {
        self.check_projector(view, p, "pass_gram_apply P")?;
        if lambda.is_nan() || lambda < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "lambda must be ≥ 0, got {lambda}"
            )));
        }
        let d = self.dim(view);
        let m = p.cols();
        let rows_view = view;
        let p_t = p.transpose();

        struct Acc {
            g: Vec<f64>,
            w: Vec<f64>,
        }
        let acc = self.sweep(
            || Acc {
                g: vec![0.0; d * m],
                w: vec![0.0; m],
            },
            |acc, row_a, row_b| {
                let row = match rows_view {
                    View::A => row_a,
                    View::B => row_b,
                };
                project(row, &p_t, &mut acc.w);
                scatter(row, &acc.w, &mut acc.g, m);
            },
            |total, part| add_into(&mut total.g, &part.g),
        );

        let mut g_t = acc.g;
        if centered {
            let gm = self.project_mean(view, &p_t);
            self.subtract_mean_outer(view, &mut g_t, m, &gm);
        }
        // + λP, in the same m-major layout
        for (dst, &src) in g_t.iter_mut().zip(p_t.data()) {
            *dst += lambda * src;
        }
        untranspose(m, d, g_t)
    }

    /// One sweep computing the CCA objective `(1/n) Tr(XaᵀĀᵀB̄Xb)`.
    pub fn objective(&self, x_a: &DenseMatrix, x_b: &DenseMatrix, centered: bool) -> Result<f64> {
        if self.n() == 0 {
            return Err(Error::InvalidArgument(
                "objective is undefined on an empty dataset".into(),
            ));
        }
        self.check_projector(View::A, x_a, "objective X_a")?;
        self.check_projector(View::B, x_b, "objective X_b")?;
        if x_a.cols() != x_b.cols() {
            return Err(Error::DimensionMismatch(format!(
                "objective: X_a has {} columns, X_b has {}",
                x_a.cols(),
                x_b.cols()
            )));
        }
        let k = x_a.cols();
        let xa_t = x_a.transpose();
        let xb_t = x_b.transpose();

        struct Acc {
            dot: f64,
            sa: Vec<f64>,
            sb: Vec<f64>,
        }
        let acc = self.sweep(
            || Acc {
                dot: 0.0,
                sa: vec![0.0; k],
                sb: vec![0.0; k],
            },
            |acc, row_a, row_b| {
                project(row_a, &xa_t, &mut acc.sa);
                project(row_b, &xb_t, &mut acc.sb);
                acc.dot += acc.sa.iter().zip(&acc.sb).map(|(x, y)| x * y).sum::<f64>();
            },
            |total, part| total.dot += part.dot,
        );

        let n = self.n() as f64;
        let mut raw = acc.dot;
        if centered {
            let ga = self.project_mean(View::A, &xa_t);
            let gb = self.project_mean(View::B, &xb_t);
            raw -= n * ga.iter().zip(&gb).map(|(x, y)| x * y).sum::<f64>();
        }
        Ok(raw / n)
    }
}
