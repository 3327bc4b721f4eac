//! Dense kernels for the small (k+p)-sized factors of the randomized solver:
//! orthonormalization, Cholesky, triangular solves, and truncated SVD.
//!
//! Everything here runs on matrices no larger than a few thousand on a side,
//! in 64-bit floats. The large design matrices never enter this module; they
//! are only touched through streaming passes in [`crate::twoview`].
//!
//! Algorithm choices:
//! - `orthonormalize` is Householder QR with column pivoting. Columns whose
//!   R diagonal falls below `1e-10 ×` the largest diagonal are dropped, so
//!   the returned basis can be narrower than the input.
//! - `svd_truncated` is one-sided (Hestenes) Jacobi, which keeps small
//!   singular values accurate — the whitened cross matrix it factors is at
//!   most (k+p)×(k+p).

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};

/// Relative R-diagonal threshold below which a column is treated as
/// rank deficient and dropped.
const RANK_DROP_REL: f64 = 1e-10;

const JACOBI_TOL: f64 = 1e-14;
const JACOBI_MAX_SWEEPS: usize = 60;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm2(a: &[f64]) -> f64 {
    dot(a, a)
}

/// Orthonormal basis for the numerical column space of `m`.
///
/// Returns `Q` with `QᵀQ = I`; the number of columns equals the numerical
/// rank detected during the pivoted QR, which can be less than `m.cols()`.
/// A matrix with no numerically nonzero column is rejected.
pub fn orthonormalize(m: &DenseMatrix) -> Result<DenseMatrix> {
    let (n, k) = (m.rows(), m.cols());
    if n == 0 || k == 0 {
        return Err(Error::InvalidArgument(
            "orthonormalize needs a nonempty matrix".into(),
        ));
    }
    m.check_finite()?;

    let mut a = m.clone();
    // Householder vectors; vs[s] spans rows s.. of column s after pivoting.
    let mut vs: Vec<Vec<f64>> = Vec::new();
    // sign fixes that make the implied R diagonal positive, so an already
    // orthonormal input comes back unchanged
    let mut flips: Vec<bool> = Vec::new();
    let mut largest_diag = 0.0f64;

    // Tail norms ‖A[step.., j]‖² for pivot selection, maintained by
    // downdating (norm² loses R[step,j]² per step) with an exact recompute
    // whenever cancellation eats the tracked value. The pivot's own norm is
    // always recomputed exactly before it is used as the R diagonal.
    let mut norms2: Vec<f64> = (0..k).map(|j| norm2(a.col(j))).collect();
    let mut norms2_ref = norms2.clone();

    let steps = n.min(k);
    for step in 0..steps {
        // Pivot: bring the remaining column with the largest tail norm up front.
        let mut best = step;
        for j in step + 1..k {
            if norms2[j] > norms2[best] {
                best = j;
            }
        }
        if best != step {
            for i in 0..n {
                let (x, y) = (a.at(i, step), a.at(i, best));
                a.set(i, step, y);
                a.set(i, best, x);
            }
            norms2.swap(step, best);
            norms2_ref.swap(step, best);
        }

        let col_norm = norm2(&a.col(step)[step..]).sqrt();
        if step == 0 {
            if col_norm == 0.0 {
                return Err(Error::RankZeroInput);
            }
            largest_diag = col_norm;
        } else if col_norm < RANK_DROP_REL * largest_diag {
            break;
        }

        // Householder reflector for rows step.. of the pivot column.
        let mut v: Vec<f64> = a.col(step)[step..].to_vec();
        let shift = if v[0] >= 0.0 { col_norm } else { -col_norm };
        flips.push(v[0] >= 0.0); // reflector maps the column onto -shift·e₁
        v[0] += shift;
        let vnorm = norm2(&v).sqrt();
        for e in &mut v {
            *e /= vnorm;
        }
        for j in step..k {
            let c = &mut a.col_mut(j)[step..];
            let d = 2.0 * dot(&v, c);
            for (ci, vi) in c.iter_mut().zip(&v) {
                *ci -= d * vi;
            }
        }
        for j in step + 1..k {
            let r = a.at(step, j);
            norms2[j] -= r * r;
            if norms2[j] <= 0.05 * norms2_ref[j] {
                norms2[j] = norm2(&a.col(j)[step + 1..]);
                norms2_ref[j] = norms2[j];
            }
        }
        vs.push(v);
    }

    let rank = vs.len();
    if rank < k {
        log::warn!(
            "orthonormalize: dropped {} rank-deficient column(s) of {k}",
            k - rank
        );
    }

    // Q = H_0 … H_{rank-1} applied to the first `rank` identity columns.
    let mut q = DenseMatrix::zeros(n, rank);
    for j in 0..rank {
        q.set(j, j, 1.0);
    }
    for step in (0..rank).rev() {
        let v = &vs[step];
        for j in 0..rank {
            let c = &mut q.col_mut(j)[step..];
            let d = 2.0 * dot(v, c);
            for (ci, vi) in c.iter_mut().zip(v) {
                *ci -= d * vi;
            }
        }
    }
    for (j, &flip) in flips.iter().enumerate().take(rank) {
        if flip {
            for e in q.col_mut(j) {
                *e = -*e;
            }
        }
    }
    q.check_finite()?;
    Ok(q)
}

/// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
///
/// Only the lower triangle of `s` is read. Symmetry is validated up front;
/// a non-positive pivot reports the matrix as not positive definite.
pub fn cholesky(s: &DenseMatrix) -> Result<DenseMatrix> {
    let k = s.rows();
    if s.cols() != k {
        return Err(Error::DimensionMismatch(format!(
            "cholesky needs a square matrix, got {}x{}",
            s.rows(),
            s.cols()
        )));
    }
    let scale = s.max_abs();
    for j in 0..k {
        for i in j + 1..k {
            if (s.at(i, j) - s.at(j, i)).abs() > 1e-10 * scale.max(f64::MIN_POSITIVE) {
                return Err(Error::InvalidArgument(format!(
                    "cholesky input is not symmetric at ({i},{j})"
                )));
            }
        }
    }

    let mut l = DenseMatrix::zeros(k, k);
    for j in 0..k {
        let mut d = s.at(j, j);
        for t in 0..j {
            d -= l.at(j, t) * l.at(j, t);
        }
        if d <= 0.0 || !d.is_finite() {
            return Err(Error::NotPositiveDefinite);
        }
        let djj = d.sqrt();
        l.set(j, j, djj);
        for i in j + 1..k {
            let mut v = s.at(i, j);
            for t in 0..j {
                v -= l.at(i, t) * l.at(j, t);
            }
            l.set(i, j, v / djj);
        }
    }
    Ok(l)
}

fn require_lower_square(l: &DenseMatrix, side: usize, what: &str) -> Result<()> {
    if l.rows() != l.cols() || l.rows() != side {
        return Err(Error::DimensionMismatch(format!(
            "{what}: triangular factor is {}x{}, expected {side}x{side}",
            l.rows(),
            l.cols()
        )));
    }
    for j in 0..l.rows() {
        if l.at(j, j) == 0.0 {
            return Err(Error::SingularTriangularFactor);
        }
    }
    Ok(())
}

/// Solves `L X = RHS` by forward substitution (`L` lower triangular).
pub fn solve_lower(l: &DenseMatrix, rhs: &DenseMatrix) -> Result<DenseMatrix> {
    require_lower_square(l, rhs.rows(), "solve_lower")?;
    let (n, m) = (rhs.rows(), rhs.cols());
    let mut x = rhs.clone();
    for j in 0..m {
        let col = x.col_mut(j);
        for i in 0..n {
            let mut v = col[i];
            for t in 0..i {
                v -= l.at(i, t) * col[t];
            }
            col[i] = v / l.at(i, i);
        }
    }
    Ok(x)
}

/// Solves `Lᵀ X = RHS` by back substitution (`L` lower triangular).
pub fn solve_lower_transposed(l: &DenseMatrix, rhs: &DenseMatrix) -> Result<DenseMatrix> {
    require_lower_square(l, rhs.rows(), "solve_lower_transposed")?;
    let (n, m) = (rhs.rows(), rhs.cols());
    let mut x = rhs.clone();
    for j in 0..m {
        let col = x.col_mut(j);
        for i in (0..n).rev() {
            let mut v = col[i];
            for t in i + 1..n {
                v -= l.at(t, i) * col[t];
            }
            col[i] = v / l.at(i, i);
        }
    }
    Ok(x)
}

/// Solves `X L = RHS` (right division by a lower-triangular factor).
pub fn solve_right_lower(rhs: &DenseMatrix, l: &DenseMatrix) -> Result<DenseMatrix> {
    require_lower_square(l, rhs.cols(), "solve_right_lower")?;
    let (n, m) = (rhs.rows(), rhs.cols());
    let mut x = rhs.clone();
    // Column j of X depends on columns j+1.. : RHS[:,j] = Σ_{t≥j} X[:,t] L[t,j].
    for j in (0..m).rev() {
        for t in j + 1..m {
            let w = l.at(t, j);
            if w == 0.0 {
                continue;
            }
            let tcol: Vec<f64> = x.col(t).to_vec();
            let col_j = x.col_mut(j);
            for i in 0..n {
                col_j[i] -= w * tcol[i];
            }
        }
        let d = l.at(j, j);
        for v in x.col_mut(j) {
            *v /= d;
        }
    }
    Ok(x)
}

/// Solves `X Lᵀ = RHS` (right division by the transposed factor).
pub fn solve_right_lower_transposed(rhs: &DenseMatrix, l: &DenseMatrix) -> Result<DenseMatrix> {
    require_lower_square(l, rhs.cols(), "solve_right_lower_transposed")?;
    let (n, m) = (rhs.rows(), rhs.cols());
    let mut x = rhs.clone();
    // RHS[:,j] = Σ_{t≤j} X[:,t] Lᵀ[t,j] = Σ_{t≤j} X[:,t] L[j,t]; solve forward.
    for j in 0..m {
        for t in 0..j {
            let w = l.at(j, t);
            if w == 0.0 {
                continue;
            }
            let tcol: Vec<f64> = x.col(t).to_vec();
            let col_j = x.col_mut(j);
            for i in 0..n {
                col_j[i] -= w * tcol[i];
            }
        }
        let d = l.at(j, j);
        for v in x.col_mut(j) {
            *v /= d;
        }
    }
    Ok(x)
}

/// `La⁻ᵀ F Lb⁻¹` by two triangular solves; the factors are never inverted.
pub fn whiten_cross(f: &DenseMatrix, la: &DenseMatrix, lb: &DenseMatrix) -> Result<DenseMatrix> {
    let g = solve_lower_transposed(la, f)?;
    solve_right_lower(&g, lb)
}

/// Top-`k` singular triplets of `f`, by one-sided Jacobi.
///
/// Returns `(U, Σ, V)` with `UᵀU = VᵀV = I`, `Σ` descending, and
/// `F ≈ U diag(Σ) Vᵀ` on the retained subspace. Singular vectors for exact
/// zero singular values are completed deterministically from identity
/// columns so `U` stays orthonormal.
pub fn svd_truncated(f: &DenseMatrix, k: usize) -> Result<(DenseMatrix, Vec<f64>, DenseMatrix)> {
    let (m, n) = (f.rows(), f.cols());
    if k == 0 || k > m.min(n) {
        return Err(Error::InvalidArgument(format!(
            "svd_truncated: k={k} outside 1..=min({m},{n})"
        )));
    }
    if m < n {
        let (u, s, v) = svd_truncated(&f.transpose(), k)?;
        return Ok((v, s, u));
    }
    f.check_finite()?;

    let mut a = f.clone();
    let mut v = DenseMatrix::identity(n);

    for _sweep in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..n.saturating_sub(1) {
            for j in i + 1..n {
                let aii = norm2(a.col(i));
                let ajj = norm2(a.col(j));
                let aij = dot(a.col(i), a.col(j));
                if aij == 0.0 || aij.abs() <= JACOBI_TOL * (aii * ajj).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (ajj - aii) / (2.0 * aij);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_pair(&mut a, i, j, c, s);
                rotate_pair(&mut v, i, j, c, s);
            }
        }
        if !rotated {
            break;
        }
    }

    let sigmas: Vec<f64> = (0..n).map(|j| norm2(a.col(j)).sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| sigmas[y].partial_cmp(&sigmas[x]).unwrap());

    let mut u_out = DenseMatrix::zeros(m, k);
    let mut v_out = DenseMatrix::zeros(n, k);
    let mut s_out = Vec::with_capacity(k);
    for (out_j, &src) in order.iter().take(k).enumerate() {
        let sigma = sigmas[src];
        s_out.push(sigma);
        v_out.col_mut(out_j).copy_from_slice(v.col(src));
        if sigma > 0.0 {
            let (acol, ucol) = (a.col(src), u_out.col_mut(out_j));
            for i in 0..m {
                ucol[i] = acol[i] / sigma;
            }
        } else {
            fill_orthonormal_column(&mut u_out, out_j);
        }
    }
    u_out.check_finite()?;
    Ok((u_out, s_out, v_out))
}

fn rotate_pair(m: &mut DenseMatrix, i: usize, j: usize, c: f64, s: f64) {
    let rows = m.rows();
    for r in 0..rows {
        let (x, y) = (m.at(r, i), m.at(r, j));
        m.set(r, i, c * x - s * y);
        m.set(r, j, s * x + c * y);
    }
}

/// Writes into column `j` a unit vector orthogonal to columns `0..j`,
/// built by projecting identity columns (deterministic).
fn fill_orthonormal_column(u: &mut DenseMatrix, j: usize) {
    let m = u.rows();
    for cand in 0..m {
        let mut w = vec![0.0; m];
        w[cand] = 1.0;
        for prev in 0..j {
            let p = u.col(prev);
            let d = dot(&w, p);
            for (wi, pi) in w.iter_mut().zip(p) {
                *wi -= d * pi;
            }
        }
        let nrm = norm2(&w).sqrt();
        if nrm > 0.5 {
            for wi in &mut w {
                *wi /= nrm;
            }
            u.col_mut(j).copy_from_slice(&w);
            return;
        }
    }
    unreachable!("fewer orthonormal directions than matrix rows");
}
