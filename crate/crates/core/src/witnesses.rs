//! Witness families for the optimality of the growth exponents: the
//! diagonal form, lifts of k-linear forms along a block pattern, and random
//! sign (Kahane–Salem–Zygmund) forms.

use num::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exponent::ExtendedExponent;
use crate::forms::{BlockPattern, MultilinearForm};

/// `r_j = p/n_j` for each block, so that `Σ 1/r_j = m/p`. Requires `p > m`.
pub fn block_duals(pattern: &BlockPattern, p: &ExtendedExponent) -> Result<Vec<ExtendedExponent>> {
    if !p.exceeds(pattern.m()) {
        return Err(Error::domain(format!(
            "block exponents need p > m = {}, got p = {p}",
            pattern.m()
        )));
    }
    pattern
        .blocks()
        .iter()
        .map(|&b| match p {
            ExtendedExponent::Infinite => Ok(ExtendedExponent::Infinite),
            ExtendedExponent::Finite(q) => {
                ExtendedExponent::finite(q / BigRational::from_integer(b.into()))
            }
        })
        .collect()
}

/// `S(x⁽¹⁾,…,x⁽ᵏ⁾) = Σ_j x_j⁽¹⁾⋯x_j⁽ᵏ⁾`.
pub fn diagonal_kform(k: usize, n: usize) -> Result<MultilinearForm> {
    MultilinearForm::diagonal(k, n)
}

/// The m-linear form whose coefficient at a block-constant index (block `l`
/// identically `i_l`) is `A(e_{i₁},…,e_{i_k})`, and 0 elsewhere.
pub fn lift_kform(a: &MultilinearForm, pattern: &BlockPattern) -> Result<MultilinearForm> {
    MultilinearForm::lifted(a.clone(), pattern.clone())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Distribution {
    Gaussian,
    Sign,
}

impl std::str::FromStr for Distribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(Distribution::Gaussian),
            "sign" => Ok(Distribution::Sign),
            other => Err(Error::domain(format!(
                "unknown distribution `{other}` (gaussian|sign)"
            ))),
        }
    }
}

/// Dense m-linear form with i.i.d. coefficients.
pub fn random_dense(
    m: usize,
    n: usize,
    distribution: Distribution,
    seed: u64,
) -> Result<MultilinearForm> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    MultilinearForm::from_fn(m, n, |_| match distribution {
        Distribution::Gaussian => rng.sample(StandardNormal),
        Distribution::Sign => {
            if rng.random::<bool>() {
                1.0
            } else {
                -1.0
            }
        }
    })
}

/// Dense k-linear form with independent uniform ±1 coefficients.
pub fn ksz_sample(k: usize, n: usize, seed: u64) -> Result<MultilinearForm> {
    random_dense(k, n, Distribution::Sign, seed)
}

/// `(k+1)/2 − Σ 1/r_j`, the growth exponent of `‖A‖` for random sign forms
/// on `ℓ_{r₁}×⋯×ℓ_{r_k}`. Only applicable when every `1/r_j ≤ 1/2`.
pub fn ksz_norm_exponent(k: usize, duals: &[ExtendedExponent]) -> Result<BigRational> {
    if duals.len() != k {
        return Err(Error::domain(format!(
            "need {k} exponents, got {}",
            duals.len()
        )));
    }
    let half = BigRational::new(1.into(), 2.into());
    if let Some(bad) = duals.iter().find(|r| r.reciprocal() > half) {
        return Err(Error::domain(format!(
            "random-sign growth bound needs every r_j >= 2, got {bad}"
        )));
    }
    let reciprocals: BigRational = duals.iter().map(ExtendedExponent::reciprocal).sum();
    Ok(BigRational::new((k as i64 + 1).into(), 2.into()) - reciprocals)
}

/// Deterministic generator description for a witness form.
#[derive(Clone, Debug, PartialEq)]
pub enum WitnessFamily {
    Diagonal {
        k: usize,
        n: usize,
    },
    Ksz {
        k: usize,
        n: usize,
        seed: u64,
    },
    Lifted {
        inner: Box<WitnessFamily>,
        pattern: BlockPattern,
    },
}

impl WitnessFamily {
    pub fn tag(&self) -> &'static str {
        match self {
            WitnessFamily::Diagonal { .. } => "diagonal",
            WitnessFamily::Ksz { .. } => "ksz",
            WitnessFamily::Lifted { .. } => "lifted",
        }
    }

    pub fn build(&self) -> Result<MultilinearForm> {
        match self {
            WitnessFamily::Diagonal { k, n } => diagonal_kform(*k, *n),
            WitnessFamily::Ksz { k, n, seed } => ksz_sample(*k, *n, *seed),
            WitnessFamily::Lifted { inner, pattern } => lift_kform(&inner.build()?, pattern),
        }
    }
}

/// Uniform vector `n^{−1/r}·(1,…,1)` on the unit sphere of ℓ_rⁿ.
pub fn uniform_unit_vector(n: usize, r: &ExtendedExponent) -> Vec<f64> {
    let scale = (n as f64).powf(-crate::exponent::rational_to_f64(&r.reciprocal()));
    vec![scale; n]
}
