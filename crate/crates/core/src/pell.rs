//! Fundamental solutions of v² − du² = 4 and the units ε_d = (v₀ + u₀√d)/2,
//! exactly and with high-precision logarithms.
//!
//! The production path traverses the reduction cycle of the principal form of
//! discriminant d once; the accumulated transformation is the fundamental
//! automorph and carries (v₀, u₀). This is the continued-fraction expansion
//! of the associated quadratic surd in form language, and it stays polynomial
//! in log u₀ where a direct scan would be exponential (u₀ grows like e^√d).
//! The plain u-scan is kept as the independent test oracle.

use crate::arith::Discriminant;
use crate::qforms;
use astro_float::{BigFloat, Consts, Radix, RoundingMode};
use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PellError {
    #[error("u_max must be >= 1")]
    UMaxZero,
}

/// Default working precision for log ε_d, in decimal digits.
pub const DEFAULT_LOG_DIGITS: u32 = 50;

/// Natural logarithm stored at a configurable decimal precision, with a
/// cached f64 view for the floating-point consumers.
#[derive(Debug, Clone, PartialEq)]
pub struct LogEps {
    approx: f64,
    decimal: String,
    digits: u32,
}

impl LogEps {
    pub fn to_f64(&self) -> f64 {
        self.approx
    }

    pub fn decimal_str(&self) -> &str {
        &self.decimal
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }
}

/// The minimal solution (v₀, u₀) of v² − du² = 4 with u₀ ≥ 1, together with
/// log ε_d = log((v₀ + u₀√d)/2).
#[derive(Debug, Clone, PartialEq)]
pub struct PellFundamental {
    pub d: Discriminant,
    pub v0: BigInt,
    pub u0: BigInt,
    pub log_eps: LogEps,
}

/// Fundamental solution at the default log precision.
pub fn pell_fundamental(d: Discriminant) -> PellFundamental {
    pell_fundamental_with_digits(d, DEFAULT_LOG_DIGITS)
}

/// Fundamental solution with log ε_d carried to `digits` decimal digits.
pub fn pell_fundamental_with_digits(d: Discriminant, digits: u32) -> PellFundamental {
    let f0 = qforms::principal_form(d);
    let (fr, _, _) = qforms::reduce_with_transform(&f0);
    let mut acc = crate::mat2::Mat2::identity();
    let mut cur = fr.clone();
    loop {
        let (next, step) = qforms::rho_with_transform(&cur);
        acc = acc.mul(&step);
        cur = next;
        if cur == fr {
            break;
        }
    }
    // acc is ± the fundamental automorph of fr = [a, b, c]:
    // [[(v−bu)/2, −cu], [au, (v+bu)/2]] up to sign, so u = c-entry / a.
    let u = (&acc.c / fr.a()).abs();
    let v = acc.trace().abs();
    debug_assert!((&acc.c % fr.a()).is_zero());
    let dv = BigInt::from(d.value());
    assert_eq!(&v * &v - &dv * &u * &u, BigInt::from(4), "cycle traversal lost the Pell equation at d = {d}");
    assert!(u.is_positive());
    let log_eps = log_eps_from_parts(&v, &u, d.value(), digits);
    PellFundamental { d, v0: v, u0: u, log_eps }
}

/// log((v + u√d)/2) at the requested decimal precision.
pub fn log_eps_from_parts(v: &BigInt, u: &BigInt, d: u64, digits: u32) -> LogEps {
    let prec = ((digits as usize) + 12) * 10 / 3 + 64; // bits
    let rm = RoundingMode::ToEven;
    let mut cc = Consts::new().expect("constants cache");
    let vf = BigFloat::parse(&v.to_string(), Radix::Dec, prec, rm, &mut cc);
    let uf = BigFloat::parse(&u.to_string(), Radix::Dec, prec, rm, &mut cc);
    let df = BigFloat::from_u64(d, prec);
    let sq = df.sqrt(prec, rm);
    let t = vf.add(&uf.mul(&sq, prec, rm), prec, rm);
    let half = t.div(&BigFloat::from_u64(2, prec), prec, rm);
    let l = half.ln(prec, rm, &mut cc);
    let decimal = format!("{l}");
    let approx: f64 = decimal.parse().expect("log_eps fits f64");
    LogEps { approx, decimal, digits }
}

/// Brute-force oracle: the minimal solution with u ≤ u_cap, if one exists in
/// that range. Independent of the cycle machinery.
pub fn scan_minimal_solution(d: Discriminant, u_cap: u64) -> Option<(u128, u64)> {
    let dv = d.value() as u128;
    for u in 1..=u_cap {
        let q = 4u128 + dv.checked_mul((u as u128) * (u as u128)).expect("overflow in pell scan");
        if let Some(v) = crate::arith::integer_sqrt_exact(q) {
            return Some((v, u));
        }
    }
    None
}

/// All solutions of v² − d·u² = rhs with 1 ≤ u ≤ u_max and v > 0, ascending
/// in u. The list may be empty.
pub fn pell_general(d: Discriminant, rhs: u64, u_max: u64) -> Result<Vec<(BigInt, BigInt)>, PellError> {
    if u_max == 0 {
        return Err(PellError::UMaxZero);
    }
    let dv = d.value() as u128;
    let mut out = Vec::new();
    for u in 1..=u_max {
        let q = (rhs as u128)
            .checked_add(dv.checked_mul((u as u128) * (u as u128)).expect("overflow"))
            .expect("overflow");
        if let Some(v) = crate::arith::integer_sqrt_exact(q) {
            if v > 0 {
                out.push((BigInt::from(v), BigInt::from(u)));
            }
        }
    }
    Ok(out)
}

/// (v_k, u_k) with (v_k + u_k √d)/2 = ε_d^k, by the exact integer recurrence
/// v' = (v₀v + d u₀u)/2, u' = (v₀u + u₀v)/2.
pub fn power_of_fundamental(pf: &PellFundamental, k: u32) -> (BigInt, BigInt) {
    assert!(k >= 1, "power_of_fundamental needs k >= 1");
    let d = BigInt::from(pf.d.value());
    let (mut v, mut u) = (pf.v0.clone(), pf.u0.clone());
    for _ in 1..k {
        let nv = (&pf.v0 * &v + &d * &pf.u0 * &u) / 2;
        let nu = (&pf.v0 * &u + &pf.u0 * &v) / 2;
        debug_assert!(((&pf.v0 * &v + &d * &pf.u0 * &u) % 2) == BigInt::zero());
        v = nv;
        u = nu;
    }
    (v, u)
}

/// Fundamental solution of v² − (d·k²)u² = 4: the generator of the
/// congruence-constrained subgroup picked out by k | u.
pub fn scaled_fundamental(d: Discriminant, scale_k: u64) -> PellFundamental {
    assert!(scale_k >= 1);
    let scaled = d
        .value()
        .checked_mul(scale_k)
        .and_then(|x| x.checked_mul(scale_k))
        .expect("overflow in scaled discriminant");
    let sd = Discriminant::new(scaled as i64).expect("scaling preserves the discriminant conditions");
    pell_fundamental(sd)
}
