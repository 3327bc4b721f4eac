//! The randomized few-pass CCA solver.
//!
//! The solver sketches the cross matrix ĀᵀB̄ with seeded Gaussian test
//! matrices, optionally sharpens both bases with `q` power-iteration passes
//! (each pass computes ĀᵀB̄Qb and B̄ᵀĀQa together, then re-orthonormalizes),
//! and finishes with a single pass that reduces the problem to small
//! (k+p)-sized factors: Cholesky whitening of the projected Grams, a
//! whitened cross SVD, and triangular solves back to feature space. Total
//! cost is exactly `q + 1` counted data passes.
//!
//! Gaussian rows are drawn only for features that actually occur in the
//! data; inactive features have identically zero rows in ĀᵀB̄, so their
//! sketch rows are implicit zeros.
//!
//! Reported correlations are the singular values of the whitened cross
//! matrix (regularized canonical correlations). With λ > 0 these slightly
//! understate the unregularized correlations.

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::matkernels::{
    cholesky, orthonormalize, solve_lower, solve_lower_transposed, solve_right_lower_transposed,
    svd_truncated,
};
use crate::rng::SeededRng;
use crate::twoview::{TwoViewDataset, View, ViewStats};

/// Ridge strength, either explicit per view or scale-free:
/// λ = ν·Tr(Gram)/d, invariant to global rescaling of the data.
#[derive(Clone, Debug, PartialEq)]
pub enum Regularization {
    Explicit { lambda_a: f64, lambda_b: f64 },
    ScaleFree { nu: f64 },
}

impl Regularization {
    /// Resolves to concrete (λa, λb) against a dataset's statistics.
    pub fn resolve(&self, stats: &ViewStats, d_a: usize, d_b: usize) -> (f64, f64) {
        match *self {
            Regularization::Explicit { lambda_a, lambda_b } => (lambda_a, lambda_b),
            Regularization::ScaleFree { nu } => (
                reg_from_nu(nu, stats.trace(View::A), d_a),
                reg_from_nu(nu, stats.trace(View::B), d_b),
            ),
        }
    }
}

/// λ = ν · trace / d — the scale-free ridge parameterization.
pub fn reg_from_nu(nu: f64, trace: f64, d: usize) -> f64 {
    assert!(d >= 1, "reg_from_nu requires d ≥ 1");
    nu * trace / d as f64
}

/// Solver hyperparameters.
#[derive(Clone, Debug, PartialEq)]
pub struct CcaConfig {
    /// Embedding dimension.
    pub k: usize,
    /// Oversampling: the sketch has k+p columns.
    pub p: usize,
    /// Power-iteration (range-finder) passes.
    pub q: usize,
    pub reg: Regularization,
    pub seed: u64,
    pub centered: bool,
}

impl CcaConfig {
    /// Defaults chosen so that two data passes is the default behavior:
    /// q = 1, ν = 0.01, p = max(10k, 100).
    pub fn new(k: usize) -> Self {
        Self {
            k,
            p: (10 * k).max(100),
            q: 1,
            reg: Regularization::ScaleFree { nu: 0.01 },
            seed: 0,
            centered: false,
        }
    }
}

/// A fitted CCA model: projections, correlations and provenance.
#[derive(Clone, Debug)]
pub struct CcaModel {
    pub x_a: DenseMatrix,
    pub x_b: DenseMatrix,
    /// Descending, in [0, 1 + 1e-8].
    pub correlations: Vec<f64>,
    pub lambda_a: f64,
    pub lambda_b: f64,
    pub n_train: usize,
    pub passes_used: u64,
    pub config: CcaConfig,
}

impl CcaModel {
    pub fn k(&self) -> usize {
        self.correlations.len()
    }

    /// Sum of reported correlations; equals the data-pass objective
    /// (1/n)Tr(XaᵀĀᵀB̄Xb) by construction.
    pub fn objective(&self) -> f64 {
        self.correlations.iter().sum()
    }
}

/// Residuals of the model invariants, measured on a dataset in one pass:
/// per-view whitening ‖(XᵀĀᵀĀX + λXᵀX)/n − I‖_max and the largest
/// off-diagonal of XaᵀĀᵀB̄Xb/n relative to the top correlation.
#[derive(Clone, Copy, Debug)]
pub struct FeasibilityResiduals {
    pub whitening_a: f64,
    pub whitening_b: f64,
    pub cross_offdiag_rel: f64,
}

pub fn feasibility_residuals(
    ds: &TwoViewDataset,
    model: &CcaModel,
) -> Result<FeasibilityResiduals> {
    let centered = model.config.centered;
    let (ca, cb, f) = ds.pass_final(&model.x_a, &model.x_b, centered)?;
    let n = ds.n() as f64;
    let k = model.x_a.cols();

    let whitening = |c: DenseMatrix, x: &DenseMatrix, lambda: f64| {
        let mut w = c;
        w.add_assign_scaled(&x.tr_mul(x), lambda);
        w.scaled(1.0 / n).sub(&DenseMatrix::identity(k)).max_abs()
    };
    let whitening_a = whitening(ca, &model.x_a, model.lambda_a);
    let whitening_b = whitening(cb, &model.x_b, model.lambda_b);

    let off = f.scaled(1.0 / n).max_abs_offdiag();
    let top = model.correlations.first().copied().unwrap_or(0.0);
    let cross_offdiag_rel = if top > 1e-12 { off / top } else { off };
    Ok(FeasibilityResiduals {
        whitening_a,
        whitening_b,
        cross_offdiag_rel,
    })
}

/// Seeded Gaussian sketch with rows drawn only for active features.
pub(crate) fn gaussian_on_active(
    d: usize,
    m: usize,
    active: &[u32],
    rng: &mut SeededRng,
) -> DenseMatrix {
    let mut q = DenseMatrix::zeros(d, m);
    for &idx in active {
        let j = idx as usize;
        for l in 0..m {
            q.set(j, l, rng.next_gaussian());
        }
    }
    q
}

/// Orthonormalizes a matrix whose nonzero rows all lie within `support`
/// (sorted feature indices): the QR runs on the compacted rows and the
/// basis is scattered back to full height. Spans the same subspace as a
/// full-height QR at a fraction of the cost when most features are
/// inactive; the basis itself may differ from the full-height one by
/// roundoff and column signs.
fn orthonormalize_on_support(m: &DenseMatrix, support: &[u32]) -> Result<DenseMatrix> {
    if support.is_empty() {
        return Err(Error::RankZeroInput);
    }
    if support.len() >= m.rows() {
        return orthonormalize(m);
    }
    let q = orthonormalize(&compact_rows(m, support))?;
    let mut full = DenseMatrix::zeros(m.rows(), q.cols());
    for (i, &row) in support.iter().enumerate() {
        let j = row as usize;
        for l in 0..q.cols() {
            full.set(j, l, q.at(i, l));
        }
    }
    Ok(full)
}

fn compact_rows(m: &DenseMatrix, support: &[u32]) -> DenseMatrix {
    DenseMatrix::from_fn(support.len(), m.cols(), |i, j| m.at(support[i] as usize, j))
}

/// `QᵀQ` over the support rows only; bit-identical to the full product
/// because the skipped rows contribute exact zeros.
fn gram_on_support(q: &DenseMatrix, support: &[u32]) -> DenseMatrix {
    if support.len() >= q.rows() {
        return q.tr_mul(q);
    }
    let compact = compact_rows(q, support);
    compact.tr_mul(&compact)
}

/// `Q·Z` where Q's nonzero rows lie within `support`; rows off the support
/// stay zero.
fn mul_on_support(q: &DenseMatrix, z: &DenseMatrix, support: &[u32]) -> DenseMatrix {
    if support.len() >= q.rows() {
        return q.mul(z);
    }
    let compact = compact_rows(q, support).mul(z);
    let mut full = DenseMatrix::zeros(q.rows(), z.cols());
    for (i, &row) in support.iter().enumerate() {
        let j = row as usize;
        for l in 0..z.cols() {
            full.set(j, l, compact.at(i, l));
        }
    }
    full
}

/// Caps correlations at 1 + 1e-8. Exceeding that with positive
/// regularization on both views indicates a numerical failure.
pub(crate) fn finalize_correlations(
    mut sigma: Vec<f64>,
    lambda_a: f64,
    lambda_b: f64,
) -> Result<Vec<f64>> {
    const SLACK: f64 = 1e-8;
    for s in &mut sigma {
        if *s > 1.0 + SLACK {
            if lambda_a > 0.0 && lambda_b > 0.0 {
                return Err(Error::Numeric(format!(
                    "correlation {s} exceeds 1 + 1e-8 despite positive regularization"
                )));
            }
            *s = 1.0 + SLACK;
        }
    }
    Ok(sigma)
}

/// Runs the randomized solver end to end. Uses exactly `q + 1` counted
/// data passes on `ds`.
pub fn randomized_cca(ds: &TwoViewDataset, cfg: &CcaConfig) -> Result<CcaModel> {
    if cfg.k == 0 {
        return Err(Error::InvalidArgument("k must be ≥ 1".into()));
    }
    let n = ds.n();
    if n == 0 {
        return Err(Error::InvalidArgument(
            "cannot fit a model on an empty dataset".into(),
        ));
    }
    let (d_a, d_b) = (ds.dim(View::A), ds.dim(View::B));
    let (lambda_a, lambda_b) = cfg.reg.resolve(ds.stats(), d_a, d_b);
    let m = cfg.k + cfg.p;
    if m > d_a.min(d_b).min(n) {
        log::warn!(
            "k+p = {m} exceeds min(d_a, d_b, n) = {}; the sketch cannot be overcomplete",
            d_a.min(d_b).min(n)
        );
    }

    let mut rng = SeededRng::new(cfg.seed);
    let mut q_a = gaussian_on_active(d_a, m, ds.stats().active(View::A), &mut rng);
    let mut q_b = gaussian_on_active(d_b, m, ds.stats().active(View::B), &mut rng);

    for _ in 0..cfg.q {
        let (ya, yb) = ds.pass_crossprod(&q_a, &q_b, cfg.centered)?;
        q_a = orthonormalize_on_support(&ya, ds.stats().active(View::A))?;
        q_b = orthonormalize_on_support(&yb, ds.stats().active(View::B))?;
        for q in [&q_a, &q_b] {
            if q.cols() < cfg.k {
                return Err(Error::RankCollapse {
                    achieved: q.cols(),
                    needed: cfg.k,
                });
            }
        }
    }

    let (ca, cb, f) = ds.pass_final(&q_a, &q_b, cfg.centered)?;

    // QᵀQ is computed explicitly: when q = 0 the sketch is raw Gaussian,
    // not orthonormal, and the λQᵀQ term must account for that.
    let chol_reg = |c: DenseMatrix, q: &DenseMatrix, active: &[u32], lambda: f64| {
        let mut g = c;
        g.add_assign_scaled(&gram_on_support(q, active), lambda);
        cholesky(&g).map_err(|e| match e {
            Error::NotPositiveDefinite => Error::IncreaseRegularization,
            other => other,
        })
    };
    let la = chol_reg(ca, &q_a, ds.stats().active(View::A), lambda_a)?;
    let lb = chol_reg(cb, &q_b, ds.stats().active(View::B), lambda_b)?;

    // Whiten with the lower factors: F ← La⁻¹ F Lb⁻ᵀ, so that
    // (ĀQaLa⁻ᵀ)ᵀ(B̄QbLb⁻ᵀ) is the whitened cross matrix and its singular
    // values are the (regularized) correlations.
    let f_whitened = solve_right_lower_transposed(&solve_lower(&la, &f)?, &lb)?;
    let (u, sigma, v) = svd_truncated(&f_whitened, cfg.k)?;

    // X = √n Q L⁻ᵀ U via a triangular solve; L is never inverted.
    let sqrt_n = (n as f64).sqrt();
    let za = solve_lower_transposed(&la, &u)?;
    let zb = solve_lower_transposed(&lb, &v)?;
    let x_a = mul_on_support(&q_a, &za, ds.stats().active(View::A)).scaled(sqrt_n);
    let x_b = mul_on_support(&q_b, &zb, ds.stats().active(View::B)).scaled(sqrt_n);

    let correlations = finalize_correlations(sigma, lambda_a, lambda_b)?;
    Ok(CcaModel {
        x_a,
        x_b,
        correlations,
        lambda_a,
        lambda_b,
        n_train: n,
        passes_used: cfg.q as u64 + 1,
        config: cfg.clone(),
    })
}

/// Expected range-finder error bound
/// `[1 + 4√(k+p)/(p − k̃ − 1) · √n]^{1/q} · σ_k̃` — a diagnostic for sizing
/// p and q; never used inside the solver.
pub fn rangefinder_bound(
    k: usize,
    p: usize,
    q: usize,
    n: usize,
    sigma_ktilde: f64,
    ktilde: usize,
) -> Result<f64> {
    if p <= ktilde + 1 {
        return Err(Error::OversamplingTooSmall);
    }
    if q == 0 {
        return Err(Error::InvalidArgument(
            "the range-finder bound requires q ≥ 1".into(),
        ));
    }
    if sigma_ktilde < 0.0 {
        return Err(Error::InvalidArgument(
            "sigma_ktilde must be nonnegative".into(),
        ));
    }
    let factor = 1.0 + 4.0 * ((k + p) as f64).sqrt() / (p - ktilde - 1) as f64 * (n as f64).sqrt();
    Ok(factor.powf(1.0 / q as f64) * sigma_ktilde)
}

/// Largest canonical correlation attainable outside the top-k̃ range of
/// ĀᵀB̄: σ_k̃ / √(λa·λb). When this is below the k-th correlation, rank k̃
/// suffices.
pub fn residual_correlation_cap(sigma_ktilde: f64, lambda_a: f64, lambda_b: f64) -> Result<f64> {
    if lambda_a <= 0.0 || lambda_b <= 0.0 {
        return Err(Error::InvalidArgument(
            "residual correlation cap requires positive regularization".into(),
        ));
    }
    Ok(sigma_ktilde / (lambda_a * lambda_b).sqrt())
}

/// Result of two-pass spectrum estimation. `values.len() < requested`
/// signals rank collapse of the sketch.
#[derive(Clone, Debug)]
pub struct SpectrumEstimate {
    /// Estimated singular values of (1/n)ĀᵀB̄, descending.
    pub values: Vec<f64>,
    pub requested: usize,
}

impl SpectrumEstimate {
    pub fn rank_collapsed(&self) -> bool {
        self.values.len() < self.requested
    }
}

/// Estimates the top-`ell` singular values of (1/n)ĀᵀB̄ with a two-pass
/// randomized SVD: pass one sketches Y = ĀᵀB̄Ω and orthonormalizes, pass
/// two forms T = B̄ᵀĀQ; the estimates are σ(T)/n.
pub fn estimate_spectrum(
    ds: &TwoViewDataset,
    ell: usize,
    seed: u64,
    centered: bool,
) -> Result<SpectrumEstimate> {
    let (d_a, d_b) = (ds.dim(View::A), ds.dim(View::B));
    if ell == 0 || ell > d_a.min(d_b) {
        return Err(Error::InvalidArgument(format!(
            "ell = {ell} outside 1..=min(d_a, d_b) = {}",
            d_a.min(d_b)
        )));
    }
    if ds.n() == 0 {
        return Err(Error::InvalidArgument(
            "cannot estimate a spectrum from an empty dataset".into(),
        ));
    }

    let mut rng = SeededRng::new(seed);
    let omega = gaussian_on_active(d_b, ell, ds.stats().active(View::B), &mut rng);
    let (y, _) = ds.pass_crossprod(&DenseMatrix::zeros(d_a, 0), &omega, centered)?;

    let q = match orthonormalize_on_support(&y, ds.stats().active(View::A)) {
        Ok(q) => q,
        // The sketch of an exactly-zero cross matrix is zero: the spectrum
        // is exactly zero everywhere. The second pass still runs (empty) so
        // the two-pass accounting is unconditional.
        Err(Error::RankZeroInput) => DenseMatrix::zeros(d_a, 0),
        Err(e) => return Err(e),
    };
    if q.cols() < ell {
        log::warn!(
            "spectrum sketch rank collapsed: {} of {ell} directions survived",
            q.cols()
        );
    }

    let (_, t) = ds.pass_crossprod(&q, &DenseMatrix::zeros(d_b, 0), centered)?;
    let r = q.cols();
    if r == 0 {
        return Ok(SpectrumEstimate {
            values: vec![0.0; ell],
            requested: ell,
        });
    }
    let (_, sigma, _) = svd_truncated(&t, r)?;
    let n = ds.n() as f64;
    Ok(SpectrumEstimate {
        values: sigma.into_iter().map(|s| s / n).collect(),
        requested: ell,
    })
}
