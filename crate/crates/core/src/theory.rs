//! Growth exponents in exact rational arithmetic.
//!
//! Everything here is exact: `p = ∞` is handled by taking limits
//! symbolically, never by floating point.

use num::{BigRational, One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exponent::{serialize_opt_rational, serialize_rational, ExtendedExponent};

fn int(v: usize) -> BigRational {
    BigRational::from_integer(v.into())
}

fn max0(q: BigRational) -> BigRational {
    if q.is_negative() {
        BigRational::zero()
    } else {
        q
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `p > 2m`.
    CaseA,
    /// `m < p < 2m`.
    CaseB,
    /// `p = 2m`, where both formulas claim the exponent.
    BoundaryPEq2m,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::CaseA => "case_a",
            Regime::CaseB => "case_b",
            Regime::BoundaryPEq2m => "boundary_p_eq_2m",
        }
    }
}

fn require_p_above_m(m: usize, p: &ExtendedExponent) -> Result<()> {
    if m == 0 {
        return Err(Error::domain("m must be positive"));
    }
    if !p.exceeds(m) {
        return Err(Error::domain(format!("requires p > m (m = {m}, p = {p})")));
    }
    Ok(())
}

pub fn classify_regime(m: usize, p: &ExtendedExponent) -> Result<Regime> {
    require_p_above_m(m, p)?;
    Ok(match p {
        ExtendedExponent::Infinite => Regime::CaseA,
        ExtendedExponent::Finite(q) => match q.cmp(&int(2 * m)) {
            std::cmp::Ordering::Greater => Regime::CaseA,
            std::cmp::Ordering::Less => Regime::CaseB,
            std::cmp::Ordering::Equal => Regime::BoundaryPEq2m,
        },
    })
}

/// Smallest summability exponent ρ with the blocked sum bounded uniformly in n:
/// `p/(p−m)` for `m < p ≤ 2m`, `2kp/(kp+p−2m)` for `p ≥ 2m`, `2k/(k+1)` at `∞`.
pub fn critical_rho(m: usize, k: usize, p: &ExtendedExponent) -> Result<BigRational> {
    check_mk(m, k)?;
    require_p_above_m(m, p)?;
    Ok(match p {
        ExtendedExponent::Infinite => BigRational::new((2 * k).into(), (k + 1).into()),
        ExtendedExponent::Finite(q) => {
            if *q <= int(2 * m) {
                q / (q - int(m))
            } else {
                let kp = int(k) * q;
                int(2) * &kp / (&kp + q - int(2 * m))
            }
        }
    })
}

fn check_mk(m: usize, k: usize) -> Result<()> {
    if k == 0 || k > m {
        return Err(Error::domain(format!(
            "need 1 <= k <= m, got k = {k}, m = {m}"
        )));
    }
    Ok(())
}

/// `(2kp − kpr − pr + 2rm)/(2pr)` before flooring; `(2k − kr − r)/(2r)` at `p = ∞`.
pub fn case_a_exponent(m: usize, k: usize, p: &ExtendedExponent, r: &BigRational) -> BigRational {
    let (m, k) = (int(m), int(k));
    match p {
        ExtendedExponent::Infinite => (int(2) * &k - &k * r - r) / (int(2) * r),
        ExtendedExponent::Finite(p) => {
            let num = int(2) * &k * p - &k * p * r - p * r + int(2) * r * m;
            num / (int(2) * p * r)
        }
    }
}

/// `(p − rp + rm)/(pr)` before flooring; `(1 − r)/r` at `p = ∞`.
pub fn case_b_exponent(m: usize, p: &ExtendedExponent, r: &BigRational) -> BigRational {
    match p {
        ExtendedExponent::Infinite => (BigRational::one() - r) / r,
        ExtendedExponent::Finite(p) => (p - r * p + r * int(m)) / (p * r),
    }
}

/// Random-sign lower bound `m/p + (2k − kr − r)/(2r)`.
pub fn ksz_lower_lambda(m: usize, k: usize, p: &ExtendedExponent, r: &BigRational) -> BigRational {
    let k = int(k);
    int(m) * p.reciprocal() + (int(2) * &k - &k * r - r) / (int(2) * r)
}

/// Diagonal-form lower bound `1/r − 1 + m/p`.
pub fn diagonal_lower_lambda(m: usize, p: &ExtendedExponent, r: &BigRational) -> BigRational {
    r.recip() - BigRational::one() + int(m) * p.reciprocal()
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegimeParams {
    pub m: usize,
    pub k: usize,
    pub p: ExtendedExponent,
    pub r: BigRational,
}

impl RegimeParams {
    pub fn new(m: usize, k: usize, p: ExtendedExponent, r: BigRational) -> Result<Self> {
        check_mk(m, k)?;
        require_p_above_m(m, &p)?;
        if !r.is_positive() {
            return Err(Error::domain(format!("r must be positive, got {r}")));
        }
        Ok(RegimeParams { m, k, p, r })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LowerBounds {
    #[serde(serialize_with = "serialize_rational")]
    pub ksz: BigRational,
    #[serde(serialize_with = "serialize_rational")]
    pub diagonal: BigRational,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExponentReport {
    pub m: usize,
    pub k: usize,
    pub p: ExtendedExponent,
    #[serde(serialize_with = "serialize_rational")]
    pub r: BigRational,
    #[serde(serialize_with = "serialize_rational")]
    pub lambda: BigRational,
    pub regime: Regime,
    #[serde(serialize_with = "serialize_opt_rational")]
    pub lambda_alt: Option<BigRational>,
    #[serde(serialize_with = "serialize_rational")]
    pub critical_rho: BigRational,
    pub lower_bounds: LowerBounds,
    pub warnings: Vec<String>,
}

/// Predicted growth exponent λ of the blocked power sum relative to `‖T‖`.
pub fn predicted_lambda(params: &RegimeParams) -> Result<ExponentReport> {
    let RegimeParams { m, k, p, r } = params;
    let (m, k) = (*m, *k);
    let regime = classify_regime(m, p)?;
    let case_a = max0(case_a_exponent(m, k, p, r));
    let case_b = max0(case_b_exponent(m, p, r));
    let mut warnings = Vec::new();
    let (lambda, lambda_alt) = match regime {
        Regime::CaseA => (case_a, None),
        Regime::CaseB => (case_b, None),
        Regime::BoundaryPEq2m => {
            if case_a == case_b {
                warnings.push(format!(
                    "p = 2m lies in both cases; both formulas give {case_a}"
                ));
            } else {
                warnings.push(format!(
                    "p = 2m lies in both cases and the formulas disagree: case (a) gives {case_a}, case (b) gives {case_b}; reporting case (a)"
                ));
            }
            (case_a, Some(case_b))
        }
    };
    Ok(ExponentReport {
        m,
        k,
        p: p.clone(),
        r: r.clone(),
        lambda,
        regime,
        lambda_alt,
        critical_rho: critical_rho(m, k, p)?,
        lower_bounds: LowerBounds {
            ksz: ksz_lower_lambda(m, k, p, r),
            diagonal: diagonal_lower_lambda(m, p, r),
        },
        warnings,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassicalEntry {
    pub item: u8,
    pub name: &'static str,
    pub condition: &'static str,
    pub applicable: bool,
    #[serde(serialize_with = "serialize_opt_rational")]
    pub value: Option<BigRational>,
    /// Block count whose critical exponent reproduces this entry (`m` or `1`).
    pub k: usize,
    #[serde(serialize_with = "serialize_opt_rational")]
    pub critical_rho: Option<BigRational>,
    pub agrees: Option<bool>,
}

/// The classical catalogue of optimal exponents for `m`-linear forms on
/// `ℓ_p × ⋯ × ℓ_p`, each cross-checked against [`critical_rho`]: full sums
/// correspond to `k = m`, diagonal sums to `k = 1`.
pub fn classical_exponents(m: usize, p: &ExtendedExponent) -> Result<Vec<ClassicalEntry>> {
    if m == 0 {
        return Err(Error::domain("m must be positive"));
    }
    let mp = int(m) * p.reciprocal(); // |1/p| = m/p
    let half = BigRational::new(1.into(), 2.into());
    let one = BigRational::one();
    let hl = |applicable: bool| applicable.then(|| (&one - &mp).recip());

    let rows: [(u8, &str, &str, bool, Option<BigRational>, usize); 5] = [
        (
            1,
            "Bohnenblust-Hille",
            "p = inf",
            p.is_infinite(),
            p.is_infinite()
                .then(|| BigRational::new((2 * m).into(), (m + 1).into())),
            m,
        ),
        (
            2,
            "Hardy-Littlewood / Praciano-Pereira",
            "m/p <= 1/2",
            mp <= half,
            (mp <= half).then(|| int(2 * m) / (int(m + 1) - int(2) * &mp)),
            m,
        ),
        (
            3,
            "Hardy-Littlewood / Dimant-Sevilla-Peris",
            "1/2 <= m/p < 1",
            mp >= half && mp < one,
            hl(mp >= half && mp < one),
            m,
        ),
        (
            4,
            "Aron-Globevnik (diagonal)",
            "p = inf, j1 = ... = jm",
            p.is_infinite(),
            p.is_infinite().then(BigRational::one),
            1,
        ),
        (
            5,
            "Zalduendo (diagonal)",
            "m/p < 1, j1 = ... = jm",
            mp < one,
            hl(mp < one),
            1,
        ),
    ];

    Ok(rows
        .into_iter()
        .map(|(item, name, condition, applicable, value, k)| {
            let rho = if applicable {
                critical_rho(m, k, p).ok()
            } else {
                None
            };
            let agrees = match (&value, &rho) {
                (Some(v), Some(c)) => Some(v == c),
                _ => None,
            };
            ClassicalEntry {
                item,
                name,
                condition,
                applicable,
                value,
                k,
                critical_rho: rho,
                agrees,
            }
        })
        .collect())
}
