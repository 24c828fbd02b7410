//! Lower and upper bounds on the expected codeword length of
//! `(r, d, n)`-locally decodable codes.
//!
//! Everything that compares counts against `C(n, r)` is exact; closed-form
//! bounds are evaluated in log space in the scalar type `F`.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

use crate::combinatorics::{big_ln, binom_exact, ln_factorial, log_binom, BigCount};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Largest `C(n, r)` (in bits) for which `M(n, r, d)` is computed exactly.
pub const EXACT_COUNT_MAX_BITS: u64 = 10_000;

/// Largest `M(n, r, d)` the partial-sum scan will walk to.
pub const LYM_SCAN_LIMIT: u64 = 10_000_000;

fn check_lower_domain<F: Real>(n: u64, r: u32, d: u32, eps: F) -> Result<()> {
    if r == 0 || r as u64 > n {
        return Err(Error::Domain(format!("lower bounds require 1 <= r <= n, got r={r}, n={n}")));
    }
    if d == 0 {
        return Err(Error::Domain("d must be at least 1".into()));
    }
    if !(eps >= F::zero() && eps < F::one()) {
        return Err(Error::Domain(format!("block error rate must lie in [0, 1), got {eps}")));
    }
    Ok(())
}

/// Lower bound on `E[ℓ]` valid for every adaptive code with block error
/// rate `eps`:
///
/// `((rd+1)/(4e)) * (((1-eps) C(n,r))^(1/(rd+1)) - 1) - 1`.
pub fn lower_bound_adaptive<F: Real>(n: u64, r: u32, d: u32, eps: F) -> Result<F> {
    check_lower_domain(n, r, d, eps)?;
    Ok(adaptive_product_term(n, r, d, eps)? - F::one())
}

/// `((rd+1)/(4e)) * (((1-eps) C(n,r))^(1/(rd+1)) - 1)`; tends to
/// `ln C(n,r) / (4e)` as `d` grows.
pub fn adaptive_product_term<F: Real>(n: u64, r: u32, d: u32, eps: F) -> Result<F> {
    check_lower_domain(n, r, d, eps)?;
    let m = F::from_count(r as u64 * d as u64 + 1);
    let ln_target = log_binom::<F>(n, r as i64)? + (-eps).ln_1p();
    Ok(m / (F::lit(4.0) * F::E()) * (ln_target / m).exp_m1())
}

/// `max_{v <= rd} C(2k, v) = C(2k, min(k, rd))`, the most codewords of
/// length `k` any code can use.
pub fn max_codewords_of_length(k: u64, rd: u64) -> BigCount {
    binom_exact(2 * k, k.min(rd) as i64)
}

/// Result of the exact LYM counting bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LymBound<F> {
    /// Largest `M` with `sum_{k=1..M} max_codewords_of_length(k, rd) <= floor((1-eps) C(n,r))`.
    pub m: u64,
    /// `(M + 1) / 2`.
    pub bound: F,
}

/// `floor((1 - eps) * count)`, treating `eps` as the exact binary fraction it holds.
fn scaled_target<F: Real>(count: &BigUint, eps: F) -> Result<BigUint> {
    if eps.is_zero() {
        return Ok(count.clone());
    }
    let eps = eps.to_f64().and_then(BigRational::from_float).ok_or_else(|| Error::Domain("non-finite eps".into()))?;
    let keep = BigRational::from_integer(1.into()) - eps;
    let scaled = keep * BigRational::from_integer(count.clone().into());
    Ok(scaled.floor().to_integer().to_biguint().unwrap_or_default())
}

/// Exact LYM counting lower bound `(M(n,r,d) + 1) / 2` on `E[ℓ]`.
pub fn lym_lower_bound<F: Real>(n: u64, r: u32, d: u32, eps: F) -> Result<LymBound<F>> {
    check_lower_domain(n, r, d, eps)?;
    let count = binom_exact(n, r as i64);
    if count.bits() > EXACT_COUNT_MAX_BITS {
        return Err(Error::ExactCountUnavailable(format!(
            "C({n}, {r}) has {} bits, above the {EXACT_COUNT_MAX_BITS}-bit exact limit",
            count.bits()
        )));
    }
    let target = scaled_target(&count, eps)?;
    let rd = r as u64 * d as u64;
    let mut sum = BigUint::zero();
    let mut m = 0u64;
    loop {
        if m >= LYM_SCAN_LIMIT {
            return Err(Error::ExactCountUnavailable(format!("M({n}, {r}, {d}) exceeds the scan limit {LYM_SCAN_LIMIT}")));
        }
        sum += max_codewords_of_length(m + 1, rd);
        if sum > target {
            break;
        }
        m += 1;
    }
    Ok(LymBound { m, bound: (F::from_count(m) + F::one()) / F::lit(2.0) })
}

/// Expected-length upper bound achieved by the random non-adaptive code:
/// `30 (rd+1) ((r+1)^(r+1) C(n,r))^(1/(rd+1))`.
///
/// Also defined at `r = 0`, where it evaluates to 30.
pub fn upper_bound_nonadaptive<F: Real>(n: u64, r: u32, d: u32) -> Result<F> {
    if r as u64 > n || d == 0 {
        return Err(Error::Domain(format!("upper bound requires r <= n and d >= 1, got n={n}, r={r}, d={d}")));
    }
    let m = F::from_count(r as u64 * d as u64 + 1);
    let r1 = F::from_count(r as u64 + 1);
    let ln_inner = r1 * r1.ln() + log_binom::<F>(n, r as i64)?;
    Ok(F::lit(30.0) * m * (ln_inner / m).exp())
}

/// Tests `sum_{k=1..M} max_{i<=v} C(2k,i) <= 2^v (M + 2 + (v+1)/(2e))^(v+1) / (v+1)!`
/// with an exact left side and `1e-9` relative slack on the right.
pub fn count_bound_holds<F: Real>(m: u64, v: u64) -> bool {
    if m == 0 || v == 0 {
        return false;
    }
    let lhs: BigUint = (1..=m).map(|k| max_codewords_of_length(k, v)).sum();
    let vf = F::from_count(v);
    let v1 = vf + F::one();
    let base = F::from_count(m) + F::lit(2.0) + v1 / (F::lit(2.0) * F::E());
    let ln_rhs = vf * F::LN_2() + v1 * base.ln() - ln_factorial::<F>(v + 1);
    big_ln::<F>(&lhs) <= ln_rhs + F::lit(1e-9).ln_1p()
}

/// Bound values for one `(n, r, d, eps)` instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsReport<F> {
    pub n: u64,
    pub r: u32,
    pub d: u32,
    pub block_error_eps: F,
    /// `log2 C(n, r)`, also the competitive-ratio denominator.
    pub entropy_bits: F,
    /// Adaptive lower bound on `E[ℓ]` (already shifted by the `+1`).
    pub lower_thm1: F,
    /// `M(n, r, d)`; `None` when the exact count is out of reach.
    #[serde(rename = "M")]
    pub m: Option<u64>,
    pub lower_lym: Option<F>,
    pub upper_thm2: F,
    /// `r d C(n,r)^(1/(rd+1))`, the order of the optimal expected length.
    pub reference_scale: F,
    /// `upper_thm2 / entropy_bits`.
    pub upper_over_entropy: F,
}

pub fn bounds_report<F: Real>(n: u64, r: u32, d: u32, eps: F) -> Result<BoundsReport<F>> {
    let lower_thm1 = lower_bound_adaptive(n, r, d, eps)?;
    let upper_thm2 = upper_bound_nonadaptive(n, r, d)?;
    let ln_count = log_binom::<F>(n, r as i64)?;
    let entropy_bits = ln_count / F::LN_2();
    let (m, lower_lym) = match lym_lower_bound(n, r, d, eps) {
        Ok(l) => (Some(l.m), Some(l.bound)),
        Err(Error::ExactCountUnavailable(_)) => (None, None),
        Err(e) => return Err(e),
    };
    let rd = F::from_count(r as u64 * d as u64);
    let reference_scale = rd * (ln_count / (rd + F::one())).exp();
    Ok(BoundsReport {
        n,
        r,
        d,
        block_error_eps: eps,
        entropy_bits,
        lower_thm1,
        m,
        lower_lym,
        upper_thm2,
        reference_scale,
        upper_over_entropy: upper_thm2 / entropy_bits,
    })
}
