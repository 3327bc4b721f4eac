//! Horst iteration: the block power method for CCA in the X coordinate
//! system, Gauss-Seidel variant with approximate least-squares inner solves.
//!
//! Each sweep updates view A then view B, using the freshly updated A block
//! for the B update. The inner solve runs a fixed number of conjugate
//! gradient steps on the regularized normal equations from a zero start;
//! each CG step costs one counted data pass. Blocks are re-whitened in the
//! (ĀᵀĀ + λI) metric after every solve, so every iterate is feasible.
//!
//! The per-sweep objective is computed from the already-available
//! RHS = B̄ᵀĀX_a small product, which is exact for the post-sweep iterate
//! and adds no data pass; a sweep therefore costs 2·inner_steps + 4 passes.
//!
//! After convergence the blocks are rotated by the SVD of the k×k whitened
//! cross matrix so the cross-covariance comes out diagonal with
//! correlations sorted descending — the same invariants the randomized
//! solver guarantees.

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::matkernels::{cholesky, solve_right_lower_transposed, svd_truncated};
use crate::rcca::{finalize_correlations, gaussian_on_active, CcaConfig, CcaModel, Regularization};
use crate::rng::SeededRng;
use crate::twoview::{TwoViewDataset, View};

/// Starting point for the iteration.
#[derive(Clone, Debug)]
pub enum HorstInit {
    /// Seeded Gaussian block, metric-whitened before the first sweep.
    Random,
    /// Warm start from a fitted model (typically the randomized solver's).
    Warm(Box<CcaModel>),
}

#[derive(Clone, Debug)]
pub struct HorstConfig {
    pub k: usize,
    pub reg: Regularization,
    pub max_sweeps: usize,
    /// CG iterations per least-squares solve (one data pass each).
    pub inner_steps: usize,
    /// Relative objective change below which the iteration stops.
    pub tol: f64,
    pub seed: u64,
    pub init: HorstInit,
    pub centered: bool,
}

impl HorstConfig {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            reg: Regularization::ScaleFree { nu: 0.01 },
            max_sweeps: 300,
            inner_steps: 3,
            tol: 1e-6,
            seed: 0,
            init: HorstInit::Random,
            centered: false,
        }
    }
}

/// Per-sweep objective values and cumulative counted passes (measured from
/// the start of the call).
#[derive(Clone, Debug, Default)]
pub struct HorstTrace {
    pub objectives: Vec<f64>,
    pub passes: Vec<u64>,
}

impl HorstTrace {
    pub fn sweeps(&self) -> usize {
        self.objectives.len()
    }
}

/// Whitens a block in the (ĀᵀĀ + λI) metric: returns X = √n·Xt·L⁻ᵀ with
/// L = chol(Xtᵀ(ĀᵀĀ + λI)Xt), so Xᵀ(ĀᵀĀ + λI)X = n·I. One data pass.
pub fn metric_whiten(
    ds: &TwoViewDataset,
    view: View,
    xt: &DenseMatrix,
    lambda: f64,
    centered: bool,
) -> Result<DenseMatrix> {
    let g = ds.pass_gram_apply(view, xt, lambda, centered)?;
    let c = xt.tr_mul(&g);
    let l = cholesky(&c).map_err(|e| match e {
        Error::NotPositiveDefinite => Error::RankDeficientBlock,
        other => other,
    })?;
    let x = solve_right_lower_transposed(xt, &l)?;
    Ok(x.scaled((ds.n() as f64).sqrt()))
}

/// `inner_steps` conjugate-gradient iterations on
/// (ĀᵀĀ + λI) X = RHS from a zero start, all right-hand-side columns in
/// lockstep. Exactly one counted data pass per iteration; no exactness
/// promise.
pub fn approx_ls(
    ds: &TwoViewDataset,
    view: View,
    rhs: &DenseMatrix,
    lambda: f64,
    inner_steps: usize,
    centered: bool,
) -> Result<DenseMatrix> {
    if inner_steps == 0 {
        return Err(Error::InvalidArgument("inner_steps must be ≥ 1".into()));
    }
    rhs.check_finite()?;
    let (d, k) = (rhs.rows(), rhs.cols());
    let mut x = DenseMatrix::zeros(d, k);
    let mut r = rhs.clone();
    let mut p = rhs.clone();
    let col_norm2 = |m: &DenseMatrix, j: usize| m.col(j).iter().map(|v| v * v).sum::<f64>();
    let mut rho: Vec<f64> = (0..k).map(|j| col_norm2(&r, j)).collect();

    for _ in 0..inner_steps {
        let ap = ds.pass_gram_apply(view, &p, lambda, centered)?;
        for j in 0..k {
            if rho[j] == 0.0 {
                continue;
            }
            let denom: f64 = p.col(j).iter().zip(ap.col(j)).map(|(a, b)| a * b).sum();
            if denom.is_nan() || denom <= 0.0 {
                // breakdown: direction lies in the metric's null space
                rho[j] = 0.0;
                p.col_mut(j).fill(0.0);
                continue;
            }
            let alpha = rho[j] / denom;
            for (xi, &pi) in x.col_mut(j).iter_mut().zip(p.col(j)) {
                *xi += alpha * pi;
            }
            for (ri, &api) in r.col_mut(j).iter_mut().zip(ap.col(j)) {
                *ri -= alpha * api;
            }
            let rho_new = col_norm2(&r, j);
            let beta = rho_new / rho[j];
            for (pi, &ri) in p.col_mut(j).iter_mut().zip(r.col(j)) {
                *pi = ri + beta * *pi;
            }
            rho[j] = rho_new;
        }
    }
    Ok(x)
}

/// Runs the Horst iteration to convergence (relative objective change below
/// `tol`) or `max_sweeps`. Returns the canonicalized model together with
/// the per-sweep trace.
pub fn horst_iterate(ds: &TwoViewDataset, cfg: &HorstConfig) -> Result<(CcaModel, HorstTrace)> {
    if cfg.k == 0 {
        return Err(Error::InvalidArgument("k must be ≥ 1".into()));
    }
    if cfg.max_sweeps == 0 {
        return Err(Error::InvalidArgument("max_sweeps must be ≥ 1".into()));
    }
    if cfg.tol.is_nan() || cfg.tol <= 0.0 {
        return Err(Error::InvalidArgument("tol must be > 0".into()));
    }
    let n = ds.n();
    if n == 0 {
        return Err(Error::InvalidArgument(
            "cannot fit a model on an empty dataset".into(),
        ));
    }
    let (d_a, d_b) = (ds.dim(View::A), ds.dim(View::B));
    let (lambda_a, lambda_b) = cfg.reg.resolve(ds.stats(), d_a, d_b);
    let pass_start = ds.passes();

    let xb_seed = match &cfg.init {
        HorstInit::Random => {
            let mut rng = SeededRng::new(cfg.seed);
            gaussian_on_active(d_b, cfg.k, ds.stats().active(View::B), &mut rng)
        }
        HorstInit::Warm(model) => {
            if model.x_b.rows() != d_b || model.x_b.cols() != cfg.k {
                return Err(Error::DimensionMismatch(format!(
                    "warm-start model is {}x{}, expected {d_b}x{}",
                    model.x_b.rows(),
                    model.x_b.cols(),
                    cfg.k
                )));
            }
            model.x_b.clone()
        }
    };
    let mut x_b = metric_whiten(ds, View::B, &xb_seed, lambda_b, cfg.centered)?;

    let mut trace = HorstTrace::default();
    let mut prev_obj = f64::NEG_INFINITY;
    let mut x_a: Option<DenseMatrix> = None;
    let mut cross_t: Option<DenseMatrix> = None; // XbᵀB̄ᵀĀXa of the final sweep

    for sweep in 0..cfg.max_sweeps {
        let (rhs_a, _) = ds.pass_crossprod(&DenseMatrix::zeros(d_a, 0), &x_b, cfg.centered)?;
        let xt_a = approx_ls(ds, View::A, &rhs_a, lambda_a, cfg.inner_steps, cfg.centered)?;
        let new_x_a = metric_whiten(ds, View::A, &xt_a, lambda_a, cfg.centered)?;

        let (_, rhs_b) = ds.pass_crossprod(&new_x_a, &DenseMatrix::zeros(d_b, 0), cfg.centered)?;
        let xt_b = approx_ls(ds, View::B, &rhs_b, lambda_b, cfg.inner_steps, cfg.centered)?;
        x_b = metric_whiten(ds, View::B, &xt_b, lambda_b, cfg.centered)?;

        // exact objective of the post-sweep iterate, no extra pass:
        // (1/n)Tr(XaᵀĀᵀB̄Xb) = (1/n)Tr(Xbᵀ·RHS_b)
        let w_t = x_b.tr_mul(&rhs_b);
        let obj = (0..cfg.k).map(|i| w_t.at(i, i)).sum::<f64>() / n as f64;
        if !obj.is_finite() {
            return Err(Error::Numeric(format!(
                "objective became non-finite at sweep {sweep}"
            )));
        }
        trace.objectives.push(obj);
        trace.passes.push(ds.passes() - pass_start);
        x_a = Some(new_x_a);
        cross_t = Some(w_t);

        let rel = (obj - prev_obj).abs() / obj.abs().max(prev_obj.abs()).max(f64::MIN_POSITIVE);
        if sweep > 0 && rel < cfg.tol {
            break;
        }
        prev_obj = obj;
    }

    let x_a = x_a.expect("max_sweeps ≥ 1 guarantees at least one sweep");
    // Canonicalize: rotate both blocks by the SVD of W = XaᵀĀᵀB̄Xb/n so the
    // cross-covariance is diagonal, correlations descending.
    let w = cross_t
        .expect("set alongside x_a")
        .transpose()
        .scaled(1.0 / n as f64);
    let (u, sigma, v) = svd_truncated(&w, cfg.k)?;
    let x_a = x_a.mul(&u);
    let x_b = x_b.mul(&v);
    let correlations = finalize_correlations(sigma, lambda_a, lambda_b)?;

    let model = CcaModel {
        x_a,
        x_b,
        correlations,
        lambda_a,
        lambda_b,
        n_train: n,
        passes_used: ds.passes() - pass_start,
        config: CcaConfig {
            k: cfg.k,
            p: 0,
            q: 0,
            reg: cfg.reg.clone(),
            seed: cfg.seed,
            centered: cfg.centered,
        },
    };
    Ok((model, trace))
}
