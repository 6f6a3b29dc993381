//! Operator norms of multilinear forms over products of ℓ_q^n unit balls.
//!
//! Three routes with different certification:
//!
//! * [`estimate_norm`]: multistart alternating maximisation. Each inner step
//!   maximises a linear functional over one ball exactly, so the objective
//!   never decreases, but the result is only a lower bound.
//! * [`exact_norm_sup`]: all exponents `∞`. The maximum over a product of
//!   cubes sits at sign vertices, and the last argument is resolved in closed
//!   form by ℓ₁ duality; the remaining vertices are walked in Gray-code order.
//! * [`interpolation_upper_bound`]: bilinear interpolation between the
//!   spectral norm and the sup norm.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exponent::{rational_to_f64, ExtendedExponent};
use crate::forms::MultilinearForm;
use crate::seed::derive_seed;

/// Largest `n·(m−1)` accepted by [`exact_norm_sup`].
pub const SUP_ENUMERATION_LIMIT: usize = 24;

/// Constant in front of the interpolated bilinear bound.
pub const INTERPOLATION_KAPPA: f64 = 2.0;

/// Relative tolerance of the spectral-norm power iteration.
pub const POWER_ITERATION_TOL: f64 = 1e-10;

const SPECTRAL_INFLATION: f64 = 1.0 + 1e-8;
const POWER_ITERATION_MAX: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NormKind {
    Exact,
    LowerBound,
    UpperBound,
}

impl NormKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NormKind::Exact => "exact",
            NormKind::LowerBound => "lower_bound",
            NormKind::UpperBound => "upper_bound",
        }
    }
}

#[derive(Clone, Debug)]
pub struct NormEstimate {
    pub value: f64,
    pub kind: NormKind,
    /// One unit vector per argument attaining `value` (exact and lower bounds).
    pub witness: Option<Vec<Vec<f64>>>,
    /// Sweeps (ascent) or iterations (power method) behind the value.
    pub iterations: usize,
    pub restarts_used: usize,
    /// Objective after each sweep of the winning restart.
    pub sweep_values: Vec<f64>,
}

impl NormEstimate {
    fn zero() -> Self {
        NormEstimate {
            value: 0.0,
            kind: NormKind::Exact,
            witness: None,
            iterations: 0,
            restarts_used: 0,
            sweep_values: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AscentConfig {
    pub restarts: usize,
    pub max_sweeps: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for AscentConfig {
    fn default() -> Self {
        AscentConfig {
            restarts: 16,
            max_sweeps: 500,
            tol: 1e-10,
            seed: 0,
        }
    }
}

/// `‖x‖_q` for `q ∈ [1, ∞]`, scaled to avoid overflow.
pub fn lp_norm(x: &[f64], q: f64) -> f64 {
    let max = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if q.is_infinite() || max == 0.0 {
        return max;
    }
    if q == 1.0 {
        return x.iter().map(|v| v.abs()).sum();
    }
    let s: f64 = x.iter().map(|v| (v.abs() / max).powf(q)).sum();
    max * s.powf(q.recip())
}

fn sign(v: f64) -> f64 {
    if v < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// Maximiser of `⟨c, x⟩` over the unit ball of ℓ_q and the maximum `‖c‖_{q*}`.
/// `None` when `c = 0`.
pub fn dual_maximizer(c: &[f64], q: f64) -> Option<(Vec<f64>, f64)> {
    if c.iter().all(|&v| v == 0.0) {
        return None;
    }
    if q.is_infinite() {
        let x = c.iter().map(|&v| sign(v)).collect();
        return Some((x, c.iter().map(|v| v.abs()).sum()));
    }
    if q == 1.0 {
        let (best, _) = c.iter().enumerate().fold((0, -1.0), |(bi, bv), (i, &v)| {
            if v.abs() > bv {
                (i, v.abs())
            } else {
                (bi, bv)
            }
        });
        let mut x = vec![0.0; c.len()];
        x[best] = sign(c[best]);
        return Some((x, c[best].abs()));
    }
    let q_dual = q / (q - 1.0);
    let norm = lp_norm(c, q_dual);
    let x = c
        .iter()
        .map(|&v| sign(v) * (v.abs() / norm).powf(q_dual - 1.0))
        .collect();
    Some((x, norm))
}

fn random_unit_vector(rng: &mut ChaCha8Rng, n: usize, q: f64) -> Vec<f64> {
    loop {
        let v: Vec<f64> = if q.is_infinite() {
            (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect()
        } else {
            (0..n).map(|_| rng.sample(StandardNormal)).collect()
        };
        let norm = lp_norm(&v, q);
        if norm > 0.0 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

fn others(args: &[Vec<f64>], skip: usize) -> Vec<&[f64]> {
    args.iter()
        .enumerate()
        .filter(|(a, _)| *a != skip)
        .map(|(_, v)| v.as_slice())
        .collect()
}

struct AscentRun {
    args: Vec<Vec<f64>>,
    sweep_values: Vec<f64>,
}

fn ascend(t: &MultilinearForm, q: &[f64], config: &AscentConfig, restart: usize) -> AscentRun {
    let seed = derive_seed(config.seed, restart as u64, 0, "ascent-restart");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = t.dim();
    let mut args: Vec<Vec<f64>> = q
        .iter()
        .map(|&qj| random_unit_vector(&mut rng, n, qj))
        .collect();
    let mut sweep_values = Vec::new();
    for _ in 0..config.max_sweeps {
        let mut current = 0.0;
        for j in 0..args.len() {
            let c = t.slice_unchecked(j, &others(&args, j));
            match dual_maximizer(&c, q[j]) {
                Some((x, v)) => {
                    args[j] = x;
                    current = v;
                }
                None => current = 0.0,
            }
        }
        let converged = sweep_values
            .last()
            .is_some_and(|&prev: &f64| current - prev <= config.tol * current.abs());
        sweep_values.push(current);
        if converged {
            break;
        }
    }
    AscentRun { args, sweep_values }
}

/// Lower bound on `‖T‖` over `ℓ_{q₁}×⋯×ℓ_{q_m}` by multistart alternating
/// maximisation. Deterministic given `config.seed`.
pub fn estimate_norm(
    t: &MultilinearForm,
    exponents: &[ExtendedExponent],
    config: &AscentConfig,
) -> Result<NormEstimate> {
    if exponents.len() != t.degree() {
        return Err(Error::domain(format!(
            "need {} exponents, got {}",
            t.degree(),
            exponents.len()
        )));
    }
    if config.restarts == 0 || config.max_sweeps == 0 {
        return Err(Error::domain("restarts and max_sweeps must be at least 1"));
    }
    if !(config.tol > 0.0) {
        return Err(Error::domain("tolerance must be positive"));
    }
    if t.is_zero() {
        return Ok(NormEstimate::zero());
    }
    let q: Vec<f64> = exponents.iter().map(ExtendedExponent::to_f64).collect();
    let runs: Vec<AscentRun> = (0..config.restarts)
        .into_par_iter()
        .map(|restart| ascend(t, &q, config, restart))
        .collect();

    let mut best: Option<(f64, AscentRun)> = None;
    for run in runs {
        let refs: Vec<&[f64]> = run.args.iter().map(Vec::as_slice).collect();
        let value = t.evaluate(&refs)?.abs();
        if best.as_ref().is_none_or(|(bv, _)| value > *bv) {
            best = Some((value, run));
        }
    }
    let (value, run) = best.expect("at least one restart");
    Ok(NormEstimate {
        value,
        kind: NormKind::LowerBound,
        iterations: run.sweep_values.len(),
        restarts_used: config.restarts,
        sweep_values: run.sweep_values,
        witness: Some(run.args),
    })
}

/// Exact `‖T‖` when every argument ranges over the ℓ_∞ unit ball.
pub fn exact_norm_sup(t: &MultilinearForm) -> Result<NormEstimate> {
    let m = t.degree();
    let n = t.dim();
    let bits = n * (m - 1);
    if bits > SUP_ENUMERATION_LIMIT {
        return Err(Error::Resource(format!(
            "exact sup norm enumerates 2^(n(m-1)) vertices; n(m-1) = {bits} exceeds {SUP_ENUMERATION_LIMIT}"
        )));
    }
    if t.is_zero() {
        return Ok(NormEstimate::zero());
    }
    let dense = t.to_dense()?;
    let data = dense.dense_coefficients().expect("dense storage");

    let mut signs: Vec<Vec<f64>> = vec![vec![1.0; n]; m - 1];
    let refresh = |signs: &[Vec<f64>]| {
        let refs: Vec<&[f64]> = signs.iter().map(Vec::as_slice).collect();
        dense.slice_unchecked(m - 1, &refs)
    };
    let mut slice = refresh(&signs);
    let mut best_value = l1(&slice);
    let mut best_signs = signs.clone();

    // Bit 0 stays +1: negating a whole argument only flips the sign of T.
    let steps: u64 = if bits > 1 { 1u64 << (bits - 1) } else { 1 };
    for step in 1..steps {
        let bit = step.trailing_zeros() as usize + 1;
        let (arg, i) = (bit / n, bit % n);
        let old = signs[arg][i];
        signs[arg][i] = -old;
        if step % 4096 == 0 {
            slice = refresh(&signs);
        } else {
            let delta = unit_slice(data, n, m, arg, i, &signs);
            let scale = -2.0 * old;
            slice
                .iter_mut()
                .zip(&delta)
                .for_each(|(s, d)| *s += scale * d);
        }
        let value = l1(&slice);
        if value > best_value {
            best_value = value;
            best_signs.clone_from(&signs);
        }
    }

    let last = refresh(&best_signs);
    let mut witness = best_signs;
    witness.push(last.iter().map(|&v| sign(v)).collect());
    let refs: Vec<&[f64]> = witness.iter().map(Vec::as_slice).collect();
    let value = dense.evaluate(&refs)?.abs();
    Ok(NormEstimate {
        value,
        kind: NormKind::Exact,
        witness: Some(witness),
        iterations: steps as usize,
        restarts_used: 0,
        sweep_values: Vec::new(),
    })
}

fn l1(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

/// Slice of the last argument with `e_i` in slot `arg` and `signs` elsewhere.
fn unit_slice(
    data: &[f64],
    n: usize,
    m: usize,
    arg: usize,
    i: usize,
    signs: &[Vec<f64>],
) -> Vec<f64> {
    let inner: usize = n.pow((m - 1 - arg) as u32);
    let outer: usize = n.pow(arg as u32);
    let mut sub = Vec::with_capacity(outer * inner);
    for o in 0..outer {
        let start = (o * n + i) * inner;
        sub.extend_from_slice(&data[start..start + inner]);
    }
    for (a, s) in signs.iter().enumerate() {
        if a == arg {
            continue;
        }
        let stride = sub.len() / n;
        let mut next = vec![0.0; stride];
        for (block, &w) in sub.chunks_exact(stride).zip(s) {
            next.iter_mut().zip(block).for_each(|(o, b)| *o += w * b);
        }
        sub = next;
    }
    sub
}

/// `n^{1 − Σ 1/r_j}`: the norm of `Σ_j x_j⁽¹⁾⋯x_j⁽ᵏ⁾` on `ℓ_{r₁}ⁿ×⋯×ℓ_{r_k}ⁿ`,
/// attained at the uniform unit vectors.
pub fn diagonal_norm_analytic(k: usize, duals: &[ExtendedExponent], n: usize) -> Result<f64> {
    if duals.len() != k {
        return Err(Error::domain(format!(
            "need {k} exponents, got {}",
            duals.len()
        )));
    }
    let total: num::BigRational = duals.iter().map(ExtendedExponent::reciprocal).sum();
    let exponent = num::BigRational::from_integer(1.into()) - total;
    if exponent < num::BigRational::from_integer(0.into()) {
        return Err(Error::domain("sum of reciprocal exponents exceeds 1"));
    }
    Ok((n as f64).powf(rational_to_f64(&exponent)))
}

/// Largest singular value of a bilinear form by power iteration on `AᵀA`,
/// inflated by `1 + 1e−8`. Returns `(σ, iterations)`.
pub fn spectral_norm(t: &MultilinearForm) -> Result<(f64, usize)> {
    if t.degree() != 2 {
        return Err(Error::Unsupported(format!(
            "spectral norm needs a bilinear form, got degree {}",
            t.degree()
        )));
    }
    if t.is_zero() {
        return Ok((0.0, 0));
    }
    let a = t.to_dense()?;
    let n = a.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    let mut sigma = 0.0;
    let mut iterations = 0;
    while iterations < POWER_ITERATION_MAX {
        iterations += 1;
        let norm = lp_norm(&v, 2.0);
        v.iter_mut().for_each(|x| *x /= norm);
        let av = a.slice_unchecked(0, &[&v]);
        let next_sigma = lp_norm(&av, 2.0);
        v = a.slice_unchecked(1, &[&av]);
        let done = (next_sigma - sigma).abs() <= POWER_ITERATION_TOL * next_sigma;
        sigma = next_sigma;
        if done || v.iter().all(|&x| x == 0.0) {
            break;
        }
    }
    Ok((sigma * SPECTRAL_INFLATION, iterations))
}

/// Upper bound `κ·σ^θ·S^{1−θ}` on the bilinear norm over `ℓ_pⁿ×ℓ_pⁿ`, `p ≥ 2`,
/// with `θ = 2/p`, `σ` the spectral norm and `S` the sup norm. `S` is computed
/// exactly when the vertex enumeration fits the guard and bounded by `n·σ`
/// otherwise.
pub fn interpolation_upper_bound(
    t: &MultilinearForm,
    p: &ExtendedExponent,
) -> Result<NormEstimate> {
    if t.degree() != 2 {
        return Err(Error::Unsupported(format!(
            "interpolation bound is implemented for bilinear forms only (degree {})",
            t.degree()
        )));
    }
    if *p < ExtendedExponent::integer(2)? {
        return Err(Error::domain(format!(
            "interpolation bound needs p >= 2, got {p}"
        )));
    }
    if t.is_zero() {
        return Ok(NormEstimate::zero());
    }
    let theta = 2.0 * rational_to_f64(&p.reciprocal());
    let (sigma, iterations) = spectral_norm(t)?;
    let sup = if theta == 1.0 {
        1.0
    } else if t.dim() <= SUP_ENUMERATION_LIMIT {
        exact_norm_sup(t)?.value
    } else {
        t.dim() as f64 * sigma
    };
    let value = INTERPOLATION_KAPPA * sigma.powf(theta) * sup.powf(1.0 - theta);
    Ok(NormEstimate {
        value,
        kind: NormKind::UpperBound,
        witness: None,
        iterations,
        restarts_used: 0,
        sweep_values: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::BlockPattern;

    fn inf() -> ExtendedExponent {
        ExtendedExponent::Infinite
    }

    fn int(q: i64) -> ExtendedExponent {
        ExtendedExponent::integer(q).unwrap()
    }

    fn identity(n: usize) -> MultilinearForm {
        MultilinearForm::from_fn(2, n, |i| if i[0] == i[1] { 1.0 } else { 0.0 }).unwrap()
    }

    #[test]
    fn dual_maximizer_attains_dual_norm() {
        let c = [3.0, -4.0, 0.0];
        for q in [1.0, 1.5, 2.0, 3.0, f64::INFINITY] {
            let (x, v) = dual_maximizer(&c, q).unwrap();
            assert!((lp_norm(&x, q) - 1.0).abs() < 1e-12, "q={q}");
            let dot: f64 = x.iter().zip(&c).map(|(a, b)| a * b).sum();
            assert!((dot - v).abs() < 1e-12 * v);
        }
        assert_eq!(dual_maximizer(&c, 2.0).unwrap().1, 5.0);
        assert_eq!(
            dual_maximizer(&c, f64::INFINITY).unwrap().0,
            vec![1.0, -1.0, 1.0]
        );
        assert!(dual_maximizer(&[0.0, 0.0], 2.0).is_none());
    }

    #[test]
    fn ascent_identity_is_one() {
        let est = estimate_norm(&identity(2), &[int(2), int(2)], &AscentConfig::default()).unwrap();
        assert!((est.value - 1.0).abs() < 1e-9);
        assert_eq!(est.kind, NormKind::LowerBound);
    }

    #[test]
    fn ascent_diagonal_l4() {
        let est =
            estimate_norm(&identity(16), &[int(4), int(4)], &AscentConfig::default()).unwrap();
        assert!((est.value - 4.0).abs() < 1e-8, "{}", est.value);
    }

    #[test]
    fn ascent_and_exact_on_hadamard() {
        let t = MultilinearForm::dense(2, 2, vec![1.0, 1.0, 1.0, -1.0]).unwrap();
        let est = estimate_norm(&t, &[inf(), inf()], &AscentConfig::default()).unwrap();
        assert_eq!(est.value, 2.0);
        assert_eq!(exact_norm_sup(&t).unwrap().value, 2.0);
    }

    #[test]
    fn zero_form_is_exact_zero() {
        let t = MultilinearForm::dense(2, 3, vec![0.0; 9]).unwrap();
        let est = estimate_norm(&t, &[int(2), int(2)], &AscentConfig::default()).unwrap();
        assert_eq!((est.value, est.kind), (0.0, NormKind::Exact));
        assert!(est.witness.is_none());
        assert_eq!(exact_norm_sup(&t).unwrap().kind, NormKind::Exact);
    }

    #[test]
    fn estimate_rejects_bad_config() {
        let t = identity(2);
        assert!(estimate_norm(&t, &[int(2)], &AscentConfig::default()).is_err());
        let cfg = AscentConfig {
            restarts: 0,
            ..AscentConfig::default()
        };
        assert!(estimate_norm(&t, &[int(2), int(2)], &cfg).is_err());
        let cfg = AscentConfig {
            tol: 0.0,
            ..AscentConfig::default()
        };
        assert!(estimate_norm(&t, &[int(2), int(2)], &cfg).is_err());
    }

    #[test]
    fn exact_sup_examples() {
        let c = MultilinearForm::dense(1, 3, vec![1.0, -2.0, 3.0]).unwrap();
        let est = exact_norm_sup(&c).unwrap();
        assert_eq!(est.value, 6.0);
        assert_eq!(est.witness.unwrap(), vec![vec![1.0, -1.0, 1.0]]);
        assert_eq!(exact_norm_sup(&identity(2)).unwrap().value, 2.0);
        assert_eq!(exact_norm_sup(&identity(4)).unwrap().value, 4.0);
    }

    #[test]
    fn exact_sup_guard() {
        let t = MultilinearForm::from_fn(2, 25, |_| 1.0).unwrap();
        match exact_norm_sup(&t) {
            Err(Error::Resource(msg)) => assert!(msg.contains("24")),
            other => panic!("expected resource error, got {other:?}"),
        }
    }

    #[test]
    fn exact_sup_matches_brute_force_trilinear() {
        // Independent route: enumerate all sign vertices of all three arguments.
        let vals = [0.3, -1.2, 0.7, 2.0, -0.4, 1.1, -0.9, 0.5];
        let t = MultilinearForm::dense(3, 2, vals.to_vec()).unwrap();
        let mut brute: f64 = 0.0;
        for mask in 0..64u32 {
            let s = |b: u32| if mask >> b & 1 == 1 { -1.0 } else { 1.0 };
            let x = [s(0), s(1)];
            let y = [s(2), s(3)];
            let z = [s(4), s(5)];
            brute = brute.max(t.evaluate(&[&x, &y, &z]).unwrap().abs());
        }
        assert!((exact_norm_sup(&t).unwrap().value - brute).abs() < 1e-12);
    }

    #[test]
    fn diagonal_analytic_examples() {
        assert_eq!(
            diagonal_norm_analytic(2, &[int(4), int(4)], 16).unwrap(),
            4.0
        );
        assert_eq!(
            diagonal_norm_analytic(3, &[inf(), inf(), inf()], 7).unwrap(),
            7.0
        );
        let r1 = ExtendedExponent::ratio(5, 2).unwrap();
        let v = diagonal_norm_analytic(1, &[r1], 10).unwrap();
        assert!((v - 10f64.powf(0.6)).abs() < 1e-12);
        assert!(diagonal_norm_analytic(2, &[int(1), int(2)], 4).is_err());
        assert!(diagonal_norm_analytic(2, &[int(2)], 4).is_err());
    }

    #[test]
    fn interpolation_examples() {
        let n = 5;
        let at_inf = interpolation_upper_bound(&identity(n), &inf()).unwrap();
        assert!((at_inf.value - INTERPOLATION_KAPPA * n as f64).abs() < 1e-9);
        let at_two = interpolation_upper_bound(&identity(n), &int(2)).unwrap();
        assert!((at_two.value - INTERPOLATION_KAPPA).abs() < 1e-7);
        let at_four = interpolation_upper_bound(&identity(4), &int(4)).unwrap();
        assert!((at_four.value - 2.0 * INTERPOLATION_KAPPA).abs() < 1e-7);
        let lower =
            estimate_norm(&identity(4), &[int(4), int(4)], &AscentConfig::default()).unwrap();
        assert!((lower.value - 2.0).abs() < 1e-8);
        assert!(lower.value <= at_four.value);
        assert_eq!(at_four.kind, NormKind::UpperBound);
    }

    #[test]
    fn interpolation_rejects_unsupported() {
        let t = MultilinearForm::diagonal(3, 2).unwrap();
        assert!(matches!(
            interpolation_upper_bound(&t, &inf()),
            Err(Error::Unsupported(_))
        ));
        let r = ExtendedExponent::ratio(3, 2).unwrap();
        assert!(matches!(
            interpolation_upper_bound(&identity(2), &r),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn exact_sup_on_lifted_form() {
        let a = MultilinearForm::dense(2, 2, vec![1.0, -2.0, 0.5, 3.0]).unwrap();
        let lifted = MultilinearForm::lifted(a, BlockPattern::new(vec![1, 2]).unwrap()).unwrap();
        let est = exact_norm_sup(&lifted).unwrap();
        assert_eq!(est.witness.as_ref().unwrap().len(), 3);
        assert!(est.value > 0.0);
    }
}
