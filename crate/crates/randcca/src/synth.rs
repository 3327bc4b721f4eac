//! Seeded synthetic two-view generator with a power-law cross spectrum.
//!
//! Both views share a latent Gaussian factor z per row:
//!   a = Ua·diag(√w)·z + noise·εa,   b = Ub·diag(√w)·z + noise·εb,
//! with Ua, Ub random orthonormal and w_i = i^(-alpha). In expectation the
//! cross matrix `E[abᵀ] = Ua·diag(w)·Ubᵀ` has singular values w_i, so the
//! sample cross spectrum decays like a power law — the regime the
//! randomized range finder is built for.
//!
//! The spec string format is `power-law:key=value,...` with keys
//! n, da, db, rank, alpha, noise, seed; omitted keys take the defaults
//! below. Example: `power-law:n=2000,da=40,db=40,rank=20,alpha=1.0`.

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::matkernels::orthonormalize;
use crate::rng::SeededRng;
use crate::twoview::{SparseVec, TwoViewDataset};

#[derive(Clone, Debug, PartialEq)]
pub struct PowerLawSpec {
    pub n: usize,
    pub d_a: usize,
    pub d_b: usize,
    /// Latent factor count (number of correlated directions).
    pub rank: usize,
    /// Spectrum decay exponent: the i-th cross singular value is i^(-alpha).
    pub alpha: f64,
    /// Standard deviation of the per-view isotropic noise.
    pub noise: f64,
    pub seed: u64,
}

impl Default for PowerLawSpec {
    fn default() -> Self {
        Self {
            n: 2000,
            d_a: 40,
            d_b: 40,
            rank: 20,
            alpha: 1.0,
            noise: 0.5,
            seed: 20240601,
        }
    }
}

impl PowerLawSpec {
    /// Parses a `power-law:key=value,...` spec string.
    pub fn parse(s: &str) -> Result<Self> {
        let body = s
            .strip_prefix("power-law:")
            .or_else(|| (s == "power-law").then_some(""))
            .ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "unknown synthetic spec '{s}' (expected power-law:key=value,...)"
                ))
            })?;
        let mut spec = Self::default();
        for kv in body.split(',').filter(|kv| !kv.is_empty()) {
            let (key, value) = kv.split_once('=').ok_or_else(|| {
                Error::InvalidArgument(format!("malformed spec entry '{kv}' (expected key=value)"))
            })?;
            let bad = |what: &str| {
                Error::InvalidArgument(format!("invalid {what} '{value}' in synthetic spec"))
            };
            match key {
                "n" => spec.n = value.parse().map_err(|_| bad("n"))?,
                "da" => spec.d_a = value.parse().map_err(|_| bad("da"))?,
                "db" => spec.d_b = value.parse().map_err(|_| bad("db"))?,
                "rank" => spec.rank = value.parse().map_err(|_| bad("rank"))?,
                "alpha" => spec.alpha = value.parse().map_err(|_| bad("alpha"))?,
                "noise" => spec.noise = value.parse().map_err(|_| bad("noise"))?,
                "seed" => spec.seed = value.parse().map_err(|_| bad("seed"))?,
                other => {
                    return Err(Error::InvalidArgument(format!(
                        "unknown synthetic spec key '{other}'"
                    )));
                }
            }
        }
        Ok(spec)
    }

    pub fn generate(&self) -> Result<TwoViewDataset> {
        if self.n == 0 {
            return Err(Error::InvalidArgument("synthetic n must be ≥ 1".into()));
        }
        if self.rank == 0 || self.rank > self.d_a.min(self.d_b) {
            return Err(Error::InvalidArgument(format!(
                "synthetic rank {} outside 1..=min(da, db) = {}",
                self.rank,
                self.d_a.min(self.d_b)
            )));
        }
        if self.alpha < 0.0 || self.noise < 0.0 {
            return Err(Error::InvalidArgument(
                "alpha and noise must be nonnegative".into(),
            ));
        }

        let mut rng = SeededRng::new(self.seed);
        let gaussian = |rows: usize, cols: usize, rng: &mut SeededRng| -> DenseMatrix {
            DenseMatrix::from_fn(rows, cols, |_, _| rng.next_gaussian())
        };
        let u_a = orthonormalize(&gaussian(self.d_a, self.rank, &mut rng))?;
        let u_b = orthonormalize(&gaussian(self.d_b, self.rank, &mut rng))?;
        let sqrt_w: Vec<f64> = (0..self.rank)
            .map(|i| ((i + 1) as f64).powf(-self.alpha).sqrt())
            .collect();

        let mut rows_a = Vec::with_capacity(self.n);
        let mut rows_b = Vec::with_capacity(self.n);
        let mut z = vec![0.0; self.rank];
        for _ in 0..self.n {
            for (zt, sw) in z.iter_mut().zip(&sqrt_w) {
                *zt = sw * rng.next_gaussian();
            }
            let make_row = |u: &DenseMatrix, d: usize, rng: &mut SeededRng| -> SparseVec {
                let mut vals = vec![0.0; d];
                for (t, &zt) in z.iter().enumerate() {
                    if zt == 0.0 {
                        continue;
                    }
                    for (j, v) in vals.iter_mut().enumerate() {
                        *v += u.at(j, t) * zt;
                    }
                }
                if self.noise > 0.0 {
                    for v in vals.iter_mut() {
                        *v += self.noise * rng.next_gaussian();
                    }
                }
                SparseVec::from_pairs(
                    vals.into_iter()
                        .enumerate()
                        .map(|(j, v)| (j as u32, v))
                        .collect(),
                )
            };
            rows_a.push(make_row(&u_a, self.d_a, &mut rng));
            rows_b.push(make_row(&u_b, self.d_b, &mut rng));
        }
        Ok(TwoViewDataset::assemble(rows_a, rows_b, self.d_a, self.d_b))
    }
}
