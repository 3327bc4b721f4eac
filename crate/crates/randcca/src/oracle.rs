//! Exact small-scale reference solutions.
//!
//! Regularized CCA by explicit whitening: symmetric inverse square roots of
//! the regularized Grams (full eigendecomposition) followed by a truncated
//! SVD of the whitened cross matrix. Dense, O(nd² + d³), and deliberately
//! capped at desk scale — this module is the ground truth the streaming
//! solvers are tested against, backed by nalgebra so the reference path
//! shares no kernel code with the solver under test.

use nalgebra::DMatrix;

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::rcca::{finalize_correlations, CcaConfig, CcaModel, Regularization};
use crate::twoview::TwoViewDataset;

const MAX_ORACLE_ROWS: usize = 10_000;
const MAX_ORACLE_DIM: usize = 500;

/// Dense two-view pair, capped at oracle scale (n ≤ 10000, d ≤ 500).
#[derive(Clone, Debug)]
pub struct DenseTwoView {
    a: DenseMatrix,
    b: DenseMatrix,
}

impl DenseTwoView {
    pub fn new(a: DenseMatrix, b: DenseMatrix) -> Result<Self> {
        if a.rows() != b.rows() {
            return Err(Error::DimensionMismatch(format!(
                "views have {} and {} rows",
                a.rows(),
                b.rows()
            )));
        }
        if a.rows() == 0 {
            return Err(Error::InvalidArgument(
                "oracle needs at least one row".into(),
            ));
        }
        if a.rows() > MAX_ORACLE_ROWS || a.cols() > MAX_ORACLE_DIM || b.cols() > MAX_ORACLE_DIM {
            return Err(Error::InvalidArgument(format!(
                "oracle scale exceeded: {}x{} / {}x{} (caps: n ≤ {MAX_ORACLE_ROWS}, d ≤ {MAX_ORACLE_DIM})",
                a.rows(),
                a.cols(),
                b.rows(),
                b.cols()
            )));
        }
        Ok(Self { a, b })
    }

    pub fn from_dataset(ds: &TwoViewDataset) -> Result<Self> {
        let (a, b) = ds.to_dense();
        Self::new(a, b)
    }

    pub fn n(&self) -> usize {
        self.a.rows()
    }

    pub fn a(&self) -> &DenseMatrix {
        &self.a
    }

    pub fn b(&self) -> &DenseMatrix {
        &self.b
    }
}

fn to_na(m: &DenseMatrix) -> DMatrix<f64> {
    DMatrix::from_column_slice(m.rows(), m.cols(), m.data())
}

fn from_na(m: &DMatrix<f64>) -> Result<DenseMatrix> {
    DenseMatrix::from_column_major(m.nrows(), m.ncols(), m.as_slice().to_vec())
}

fn center_columns(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows() as f64;
    let mut out = m.clone();
    for mut col in out.column_iter_mut() {
        let mean = col.sum() / n;
        col.add_scalar_mut(-mean);
    }
    out
}

/// Symmetric inverse square root via full eigendecomposition. Errors if any
/// eigenvalue is not strictly positive.
fn inv_sqrt_sym(m: DMatrix<f64>) -> Result<DMatrix<f64>> {
    let eig = m.symmetric_eigen();
    if eig.eigenvalues.iter().any(|&w| w <= 0.0 || !w.is_finite()) {
        return Err(Error::NotPositiveDefinite);
    }
    let inv_sqrt = DMatrix::from_diagonal(&eig.eigenvalues.map(|w| 1.0 / w.sqrt()));
    Ok(&eig.eigenvectors * inv_sqrt * eig.eigenvectors.transpose())
}

/// Exact regularized CCA: whitens both Grams explicitly and takes the
/// k-truncated SVD of Ma^{-1/2}(ĀᵀB̄)Mb^{-1/2}.
pub fn exact_cca(
    dv: &DenseTwoView,
    lambda_a: f64,
    lambda_b: f64,
    k: usize,
    centered: bool,
) -> Result<CcaModel> {
    let (d_a, d_b) = (dv.a.cols(), dv.b.cols());
    if k == 0 || k > d_a.min(d_b) {
        return Err(Error::InvalidArgument(format!(
            "k = {k} outside 1..=min({d_a}, {d_b})"
        )));
    }
    if lambda_a < 0.0 || lambda_b < 0.0 {
        return Err(Error::InvalidArgument("lambda must be ≥ 0".into()));
    }
    let n = dv.n();
    let a = if centered {
        center_columns(&to_na(&dv.a))
    } else {
        to_na(&dv.a)
    };
    let b = if centered {
        center_columns(&to_na(&dv.b))
    } else {
        to_na(&dv.b)
    };

    let mut gram_a = a.transpose() * &a;
    let mut gram_b = b.transpose() * &b;
    for i in 0..d_a {
        gram_a[(i, i)] += lambda_a;
    }
    for i in 0..d_b {
        gram_b[(i, i)] += lambda_b;
    }
    let isa = inv_sqrt_sym(gram_a)?;
    let isb = inv_sqrt_sym(gram_b)?;

    let g = &isa * (a.transpose() * &b) * &isb;
    let svd = g.svd(true, true);
    let u = svd.u.expect("svd with compute_u");
    let vt = svd.v_t.expect("svd with compute_v");

    // sort triplets by singular value, descending
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&x, &y| {
        svd.singular_values[y]
            .partial_cmp(&svd.singular_values[x])
            .unwrap()
    });

    let sqrt_n = (n as f64).sqrt();
    let mut x_a = DMatrix::zeros(d_a, k);
    let mut x_b = DMatrix::zeros(d_b, k);
    let mut sigma = Vec::with_capacity(k);
    for (out_j, &src) in order.iter().take(k).enumerate() {
        sigma.push(svd.singular_values[src]);
        x_a.set_column(out_j, &(&isa * u.column(src) * sqrt_n));
        x_b.set_column(out_j, &(&isb * vt.row(src).transpose() * sqrt_n));
    }

    let correlations = finalize_correlations(sigma, lambda_a, lambda_b)?;
    Ok(CcaModel {
        x_a: from_na(&x_a)?,
        x_b: from_na(&x_b)?,
        correlations,
        lambda_a,
        lambda_b,
        n_train: n,
        passes_used: 0,
        config: CcaConfig {
            k,
            p: 0,
            q: 0,
            reg: Regularization::Explicit { lambda_a, lambda_b },
            seed: 0,
            centered,
        },
    })
}

/// All singular values of (1/n)ĀᵀB̄, descending.
pub fn exact_cross_spectrum(dv: &DenseTwoView, centered: bool) -> Vec<f64> {
    let a = if centered {
        center_columns(&to_na(&dv.a))
    } else {
        to_na(&dv.a)
    };
    let b = if centered {
        center_columns(&to_na(&dv.b))
    } else {
        to_na(&dv.b)
    };
    let cross = (a.transpose() * &b) / dv.n() as f64;
    let mut svs: Vec<f64> = cross.singular_values().iter().copied().collect();
    svs.sort_by(|x, y| y.partial_cmp(x).unwrap());
    svs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;

    fn gaussian_matrix(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
        let mut rng = SeededRng::new(seed);
        DenseMatrix::from_fn(rows, cols, |_, _| rng.next_gaussian())
    }

    #[test]
    fn identical_views_full_rank_unit_correlations() {
        let a = gaussian_matrix(60, 5, 1);
        let dv = DenseTwoView::new(a.clone(), a).unwrap();
        let model = exact_cca(&dv, 0.0, 0.0, 5, false).unwrap();
        for &c in &model.correlations {
            assert!((c - 1.0).abs() <= 1e-10, "correlation {c}");
        }
    }

    #[test]
    fn scalar_views_match_closed_form() {
        let a = gaussian_matrix(40, 1, 2);
        let b = gaussian_matrix(40, 1, 3);
        let (la, lb) = (0.4, 0.9);
        for centered in [false, true] {
            let dv = DenseTwoView::new(a.clone(), b.clone()).unwrap();
            let model = exact_cca(&dv, la, lb, 1, centered).unwrap();
            // closed form: |⟨ā, b̄⟩| / sqrt((‖ā‖² + λa)(‖b̄‖² + λb))
            let col = |m: &DenseMatrix| -> Vec<f64> {
                let v: Vec<f64> = m.col(0).to_vec();
                if centered {
                    let mean = v.iter().sum::<f64>() / v.len() as f64;
                    v.iter().map(|x| x - mean).collect()
                } else {
                    v
                }
            };
            let (av, bv) = (col(&a), col(&b));
            let dot: f64 = av.iter().zip(&bv).map(|(x, y)| x * y).sum();
            let na: f64 = av.iter().map(|x| x * x).sum();
            let nb: f64 = bv.iter().map(|x| x * x).sum();
            let want = dot.abs() / ((na + la) * (nb + lb)).sqrt();
            assert!(
                (model.correlations[0] - want).abs() <= 1e-12,
                "{} vs {want}",
                model.correlations[0]
            );
        }
    }

    #[test]
    fn orthogonal_views_have_no_correlation() {
        // a ⊥ b and both ⊥ 1
        let a = DenseMatrix::from_rows(&[vec![1.0], vec![1.0], vec![-1.0], vec![-1.0]]).unwrap();
        let b = DenseMatrix::from_rows(&[vec![1.0], vec![-1.0], vec![1.0], vec![-1.0]]).unwrap();
        for centered in [false, true] {
            let dv = DenseTwoView::new(a.clone(), b.clone()).unwrap();
            let model = exact_cca(&dv, 0.1, 0.1, 1, centered).unwrap();
            assert!(model.correlations[0] <= 1e-12);
        }
    }

    #[test]
    fn cross_spectrum_zero_view() {
        let a = gaussian_matrix(10, 3, 5);
        let b = DenseMatrix::zeros(10, 2);
        let dv = DenseTwoView::new(a, b).unwrap();
        for s in exact_cross_spectrum(&dv, false) {
            assert_eq!(s, 0.0);
        }
    }

    #[test]
    fn cross_spectrum_diagonal_construction() {
        // AᵀB = n·diag(3,2,1): three one-hot rows scaled by sqrt(n·σ)
        let n = 3.0f64;
        let vals = [3.0f64, 2.0, 1.0];
        let a = DenseMatrix::from_fn(3, 3, |i, j| if i == j { (n * vals[i]).sqrt() } else { 0.0 });
        let dv = DenseTwoView::new(a.clone(), a).unwrap();
        let got = exact_cross_spectrum(&dv, false);
        for (g, w) in got.iter().zip(vals) {
            assert!((g - w).abs() <= 1e-12);
        }
    }

    #[test]
    fn cross_spectrum_invariant_under_row_permutation() {
        let a = gaussian_matrix(12, 4, 7);
        let b = gaussian_matrix(12, 3, 8);
        let perm = [5usize, 2, 9, 0, 11, 7, 1, 10, 3, 8, 6, 4];
        let ap = DenseMatrix::from_fn(12, 4, |i, j| a.at(perm[i], j));
        let bp = DenseMatrix::from_fn(12, 3, |i, j| b.at(perm[i], j));
        let s1 = exact_cross_spectrum(&DenseTwoView::new(a, b).unwrap(), true);
        let s2 = exact_cross_spectrum(&DenseTwoView::new(ap, bp).unwrap(), true);
        for (x, y) in s1.iter().zip(&s2) {
            assert!((x - y).abs() <= 1e-12);
        }
    }

    #[test]
    fn oracle_scale_is_enforced() {
        let a = DenseMatrix::zeros(3, 501);
        let b = DenseMatrix::zeros(3, 2);
        assert!(DenseTwoView::new(a, b).is_err());
    }

    #[test]
    fn indefinite_gram_errors() {
        // one row, two columns, λ = 0: Gram is rank one, not PD
        let a = DenseMatrix::from_rows(&[vec![1.0, 2.0]]).unwrap();
        let b = DenseMatrix::from_rows(&[vec![1.0]]).unwrap();
        let dv = DenseTwoView::new(a, b).unwrap();
        assert!(matches!(
            exact_cca(&dv, 0.0, 0.0, 1, false).unwrap_err(),
            Error::NotPositiveDefinite
        ));
    }
}
