//! Seeded ensembles of random positive definite matrices.
//!
//! A matrix is `U diag(λ) U*` with `U` Haar distributed (QR of a Gaussian matrix
//! with the phases of `R` divided out) and `λ` log-uniform between endpoints that
//! realize a condition number drawn log-uniformly from the configured range.
//! Every matrix comes from its own [`Substream`], so the output does not depend
//! on generation order.

use nalgebra::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::matrix::{CMatrix, SpdMatrix, C64};
use super::ScalarField;
use crate::error::{Error, Result};

/// Child index reserved for the shared eigenbasis of a commuting ensemble.
const COMMUTING_BASIS: u64 = 1 << 40;

/// Node in a tree of independent random streams, addressed by a 256-bit key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Substream([u8; 32]);

impl Substream {
    pub fn root(seed: u64) -> Self {
        let mut h = Sha256::new();
        h.update(b"spdmeans.root");
        h.update(seed.to_le_bytes());
        Substream(h.finalize().into())
    }

    pub fn child(&self, index: u64) -> Self {
        let mut h = Sha256::new();
        h.update(self.0);
        h.update(index.to_le_bytes());
        Substream(h.finalize().into())
    }

    pub fn rng(&self) -> ChaCha20Rng {
        ChaCha20Rng::from_seed(self.0)
    }

    /// First eight key bytes, for digests.
    pub fn tag(&self) -> u64 {
        u64::from_le_bytes(self.0[..8].try_into().expect("8 bytes"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomEnsembleConfig {
    pub n: usize,
    pub m: usize,
    /// Inclusive bounds on the condition number of each matrix.
    pub cond_range: [f64; 2],
    pub field: ScalarField,
    pub seed: u64,
    /// Draw all matrices in one shared eigenbasis.
    #[serde(default)]
    pub commuting: bool,
}

impl RandomEnsembleConfig {
    pub fn new(n: usize, m: usize, cond_range: [f64; 2], field: ScalarField, seed: u64) -> Self {
        RandomEnsembleConfig { n, m, cond_range, field, seed, commuting: false }
    }

    pub fn commuting(mut self, yes: bool) -> Self {
        self.commuting = yes;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let [low, high] = self.cond_range;
        if self.n == 0 || self.m == 0 {
            return Err(Error::BadParameter("ensemble needs n >= 1 and m >= 1".into()));
        }
        if !(low >= 1.0 && low <= high && high.is_finite()) {
            return Err(Error::BadParameter(format!("condition range [{low}, {high}] must satisfy 1 <= low <= high")));
        }
        Ok(())
    }
}

pub fn standard_normal(rng: &mut impl Rng, field: ScalarField) -> C64 {
    match field {
        ScalarField::Real => C64::from(rng.sample::<f64, _>(StandardNormal)),
        ScalarField::Complex => {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
        }
    }
}

/// Haar-distributed orthogonal (real field) or unitary (complex field) matrix.
pub fn haar_unitary(rng: &mut impl Rng, n: usize, field: ScalarField) -> CMatrix {
    let g = CMatrix::from_fn(n, n, |_, _| standard_normal(rng, field));
    let (mut q, r) = g.qr().unpack();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::from(1.0) };
        q.column_mut(j).iter_mut().for_each(|z| *z *= phase);
    }
    q
}

/// Log-uniform spectrum whose extreme ratio is drawn log-uniformly from `cond_range`,
/// at a random overall scale in `[e^-1, e]`.
pub fn random_spectrum(rng: &mut impl Rng, n: usize, cond_range: [f64; 2]) -> Vec<f64> {
    let scale = rng.random_range(-1.0..=1.0f64).exp();
    if n == 1 {
        return vec![scale];
    }
    let [low, high] = cond_range;
    let log_kappa = if high > low { rng.random_range(low.ln()..=high.ln()) } else { low.ln() };
    let mut values = Vec::with_capacity(n);
    values.push(scale);
    values.push(scale * log_kappa.exp());
    for _ in 2..n {
        let u: f64 = rng.random();
        values.push(scale * (u * log_kappa).exp());
    }
    values
}

pub fn random_spd(config: &RandomEnsembleConfig) -> Result<Vec<SpdMatrix>> {
    random_spd_from(&Substream::root(config.seed), config)
}

/// Ensemble drawn from `stream` instead of the root stream of `config.seed`.
pub fn random_spd_from(stream: &Substream, config: &RandomEnsembleConfig) -> Result<Vec<SpdMatrix>> {
    config.validate()?;
    let shared = config.commuting.then(|| haar_unitary(&mut stream.child(COMMUTING_BASIS).rng(), config.n, config.field));
    (0..config.m)
        .map(|j| {
            let mut rng = stream.child(j as u64).rng();
            let u = match &shared {
                Some(u) => u.clone(),
                None => haar_unitary(&mut rng, config.n, config.field),
            };
            let values = random_spectrum(&mut rng, config.n, config.cond_range);
            SpdMatrix::from_spectrum(u, &values)
        })
        .collect()
}

/// Uniform point on the probability simplex.
pub fn random_weights(rng: &mut impl Rng, m: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..m).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|x| x / total).collect()
}

/// Random invertible matrix with Gaussian entries shifted towards the identity.
pub fn random_invertible(rng: &mut impl Rng, n: usize, field: ScalarField) -> CMatrix {
    CMatrix::from_fn(n, n, |i, j| standard_normal(rng, field) + if i == j { C64::from(2.0) } else { C64::from(0.0) })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(n: usize, m: usize, cond: [f64; 2], seed: u64) -> RandomEnsembleConfig {
        RandomEnsembleConfig::new(n, m, cond, ScalarField::Complex, seed)
    }

    #[test]
    fn scalar_case() {
        let mats = random_spd(&cfg(1, 4, [1.0, 100.0], 3)).unwrap();
        assert_eq!(mats.len(), 4);
        assert!(mats.iter().all(|a| a.dim() == 1 && a.matrix()[(0, 0)].re > 0.0));
    }

    #[test]
    fn same_seed_is_bitwise_identical() {
        let a = random_spd(&cfg(4, 3, [1.0, 1e4], 11)).unwrap();
        let b = random_spd(&cfg(4, 3, [1.0, 1e4], 11)).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.matrix(), y.matrix());
        }
        let c = random_spd(&cfg(4, 3, [1.0, 1e4], 12)).unwrap();
        assert_ne!(a[0].matrix(), c[0].matrix());
    }

    #[test]
    fn prescribed_condition_number_is_realized() {
        for seed in 0..5 {
            for a in random_spd(&cfg(4, 3, [10.0, 10.0], seed)).unwrap() {
                assert!((a.condition_number() - 10.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn condition_numbers_within_range() {
        let mats = random_spd(&cfg(5, 20, [2.0, 1e3], 5)).unwrap();
        for a in mats {
            let k = a.condition_number();
            assert!((2.0 * (1.0 - 1e-9)..=1e3 * (1.0 + 1e-9)).contains(&k), "{k}");
        }
    }

    #[test]
    fn haar_matrix_is_unitary() {
        let mut rng = Substream::root(9).rng();
        for field in [ScalarField::Real, ScalarField::Complex] {
            let u = haar_unitary(&mut rng, 5, field);
            assert!((u.adjoint() * &u - CMatrix::identity(5, 5)).norm() < 1e-13);
            if field == ScalarField::Real {
                assert!(u.iter().all(|z| z.im == 0.0));
            }
        }
    }

    #[test]
    fn commuting_ensemble_commutes() {
        let mats = random_spd(&cfg(3, 3, [1.0, 100.0], 2).commuting(true)).unwrap();
        let ab = mats[0].matrix() * mats[1].matrix();
        let ba = mats[1].matrix() * mats[0].matrix();
        assert!((ab - ba).norm() < 1e-10 * mats[0].frobenius_norm() * mats[1].frobenius_norm());
    }

    #[test]
    fn substreams_are_independent_of_order() {
        let root = Substream::root(1);
        let late = root.child(7).rng().random::<u64>();
        let _ = root.child(3).rng().random::<u64>();
        assert_eq!(late, root.child(7).rng().random::<u64>());
        assert_ne!(root.child(7), root.child(8));
    }

    #[test]
    fn invalid_configs_rejected() {
        assert!(random_spd(&cfg(0, 1, [1.0, 2.0], 0)).is_err());
        assert!(random_spd(&cfg(2, 1, [0.5, 2.0], 0)).is_err());
        assert!(random_spd(&cfg(2, 1, [3.0, 2.0], 0)).is_err());
    }

    #[test]
    fn weights_on_simplex() {
        let mut rng = Substream::root(4).rng();
        let w = random_weights(&mut rng, 5);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        assert!(w.iter().all(|&x| x >= 0.0));
    }
}
