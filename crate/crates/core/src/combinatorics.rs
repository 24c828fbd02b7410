//! Exact and log-space binomial arithmetic, and the keyed randomness that
//! every codebook and experiment draws from.
//!
//! All randomness in the crate flows through [`prf64`]: a counter-based
//! generator keyed by a [`SampleKey`]. Two parties holding the same master
//! seed therefore derive bit-identical codebooks on any platform.

use std::collections::HashSet;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Arbitrary-precision non-negative count.
pub type BigCount = BigUint;

/// Exact binomial coefficient `C(n, k)`; zero when `k < 0` or `k > n`.
pub fn binom_exact(n: u64, k: i64) -> BigCount {
    if k < 0 || k as u64 > n {
        return BigUint::zero();
    }
    let k = (k as u64).min(n - k as u64);
    let mut acc = BigUint::one();
    for i in 1..=k {
        // acc * (n - k + i) is always divisible by i at this point.
        acc *= n - k + i;
        acc /= i;
    }
    acc
}

/// Natural logarithm of a big integer. Returns `-inf` for zero.
pub fn big_ln<F: Real>(x: &BigUint) -> F {
    if x.is_zero() {
        return F::neg_infinity();
    }
    let bits = x.bits();
    if bits <= 64 {
        return F::from_count(x.to_u64().unwrap()).ln();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_u64().unwrap();
    F::from_count(top).ln() + F::from_count(shift) * F::LN_2()
}

/// `ln(n!)`.
///
/// Direct summation below 32, Stirling's series with four correction terms
/// above (truncation error below 1e-17 there).
pub fn ln_factorial<F: Real>(n: u64) -> F {
    if n < 32 {
        let mut acc = F::zero();
        for i in 2..=n {
            acc = acc + F::from_count(i).ln();
        }
        return acc;
    }
    let x = F::from_count(n);
    x * x.ln() - x + F::lit(0.5) * (F::lit(2.0) * F::PI() * x).ln() + stirling_tail(x)
}

// ln(x!) - (x ln x - x + ln(2 pi x)/2)
fn stirling_tail<F: Real>(x: F) -> F {
    let inv = x.recip();
    let inv2 = inv * inv;
    inv * (F::lit(1.0 / 12.0)
        - inv2 * (F::lit(1.0 / 360.0) - inv2 * (F::lit(1.0 / 1260.0) - inv2 * F::lit(1.0 / 1680.0))))
}

const LOG_BINOM_DIRECT_MAX: u64 = 64;

/// `ln C(n, k)` in floating point.
///
/// Short products are summed term by term; otherwise the Stirling form is
/// regrouped as `k ln(n/k) + m ln(n/m) + ...` (with `m = n - k`) so that no
/// large log-gamma values are subtracted from each other.
pub fn log_binom<F: Real>(n: u64, k: i64) -> Result<F> {
    if k < 0 || k as u64 > n {
        return Err(Error::Domain(format!("log_binom requires 0 <= k <= n, got n={n}, k={k}")));
    }
    let k = (k as u64).min(n - k as u64);
    let m = n - k;
    if k <= LOG_BINOM_DIRECT_MAX {
        let mut acc = F::zero();
        for i in 1..=k {
            acc = acc + (F::from_count(m + i) / F::from_count(i)).ln();
        }
        return Ok(acc);
    }
    let (nf, kf, mf) = (F::from_count(n), F::from_count(k), F::from_count(m));
    let main = kf * (nf / kf).ln() - mf * (-(kf / nf)).ln_1p();
    let half = F::lit(0.5) * (nf / (F::lit(2.0) * F::PI() * kf * mf)).ln();
    Ok(main + half + stirling_tail(nf) - stirling_tail(kf) - stirling_tail(mf))
}

/// Which codebook or experiment component a random stream feeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    LevelSet,
    ProbeSet,
    Trial,
}

impl Role {
    fn tag(self) -> u64 {
        match self {
            Role::LevelSet => 1,
            Role::ProbeSet => 2,
            Role::Trial => 3,
        }
    }
}

/// Domain-separated key for one random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SampleKey {
    pub master_seed: u64,
    pub level: u64,
    pub role: Role,
    /// The query index for probe sets, the trial number for trials, 0 otherwise.
    pub index: u64,
}

impl SampleKey {
    pub fn level_set(master_seed: u64, level: u64) -> Self {
        Self { master_seed, level, role: Role::LevelSet, index: 0 }
    }

    pub fn probe_set(master_seed: u64, level: u64, j: u64) -> Self {
        Self { master_seed, level, role: Role::ProbeSet, index: j }
    }

    pub fn trial(master_seed: u64, trial: u64) -> Self {
        Self { master_seed, level: 0, role: Role::Trial, index: trial }
    }

    /// Packs the key into one 64-bit state by chained finalizer rounds.
    fn digest(&self) -> u64 {
        let mut h = mix64(self.master_seed ^ KEY_DOMAIN);
        for word in [self.level, self.role.tag(), self.index] {
            h = mix64((h ^ word).wrapping_add(GOLDEN_GAMMA));
        }
        h
    }
}

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;
const KEY_DOMAIN: u64 = 0x534c_4443_0000_0001; // "SLDC", scheme 1

/// SplitMix64 finalizer; a bijection on `u64`.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Counter-based keyed generator (scheme version 1).
///
/// `prf64(key, c) = mix64(digest(key) + (c + 1) * GOLDEN_GAMMA)`, i.e. the
/// SplitMix64 output sequence started from the key digest. Changing this map
/// breaks decodability of existing containers and requires a new scheme
/// version.
#[inline]
pub fn prf64(key: &SampleKey, counter: u64) -> u64 {
    mix64(key.digest().wrapping_add(counter.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

/// Sequential reader over the stream of one key.
#[derive(Debug, Clone)]
pub struct KeyStream {
    digest: u64,
    counter: u64,
}

impl KeyStream {
    pub fn new(key: &SampleKey) -> Self {
        Self { digest: key.digest(), counter: 0 }
    }

    pub fn next_u64(&mut self) -> u64 {
        let out = mix64(self.digest.wrapping_add(self.counter.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)));
        self.counter += 1;
        out
    }

    /// Uniform integer in `[1..=bound]`, by rejection of words at or above
    /// `bound * floor(2^64 / bound)`.
    pub fn uniform_1_to(&mut self, bound: u64) -> u64 {
        assert!(bound >= 1);
        let zone = (1u128 << 64) / bound as u128 * bound as u128;
        loop {
            let x = self.next_u64();
            if (x as u128) < zone {
                return x % bound + 1;
            }
        }
    }
}

/// Uniformly random `m`-subset of `[1..=universe]`, sorted ascending.
///
/// Floyd's algorithm: for `J = N-m+1 ..= N`, draw `t` uniform in `[1..=J]`
/// and insert `t`, or `J` if `t` is already taken.
pub fn sample_subset(universe: u64, m: u64, key: &SampleKey) -> Result<Vec<u64>> {
    if m > universe {
        return Err(Error::InvalidSize { universe, m });
    }
    if m == universe {
        return Ok((1..=universe).collect());
    }
    let mut stream = KeyStream::new(key);
    let mut chosen = HashSet::with_capacity(m as usize);
    for j in (universe - m + 1)..=universe {
        let t = stream.uniform_1_to(j);
        if !chosen.insert(t) {
            chosen.insert(j);
        }
    }
    let mut out: Vec<u64> = chosen.into_iter().collect();
    out.sort_unstable();
    Ok(out)
}
