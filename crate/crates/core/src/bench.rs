//! Monte Carlo and exhaustive experiments over a codebook.
//!
//! Trials are keyed by `(master_seed, trial#)` and run in parallel; totals
//! are accumulated as exact integers so results do not depend on scheduling.

use std::collections::{BTreeMap, HashSet};

use rayon::prelude::*;
use serde::Serialize;

use crate::codebook::{CodeParams, Codebook, ProbePlan};
use crate::codec::{level_accepts, Codeword, SparseSeq};
use crate::combinatorics::{binom_exact, sample_subset, SampleKey};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Largest `C(n, r)` [`exhaustive_verify`] will enumerate.
pub const EXHAUSTIVE_LIMIT: u64 = 1_000_000;

/// z-value for the two-sided 95% normal interval.
const Z95: f64 = 1.959_963_984_540_054;

/// Exact integer moments of a sample of non-negative integers.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub(crate) struct Moments {
    pub count: u64,
    pub sum: u128,
    pub sum_sq: u128,
    pub min: Option<u64>,
    pub max: Option<u64>,
}

impl Moments {
    pub fn push(&mut self, v: u64) {
        self.count += 1;
        self.sum += v as u128;
        self.sum_sq += v as u128 * v as u128;
        self.min = Some(self.min.map_or(v, |m| m.min(v)));
        self.max = Some(self.max.map_or(v, |m| m.max(v)));
    }

    pub fn merge(mut self, other: Self) -> Self {
        self.count += other.count;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
        self.min = match (self.min, other.min) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        self.max = self.max.max(other.max);
        self
    }

    pub fn mean<F: Real>(&self) -> F {
        F::from_u128(self.sum).unwrap() / F::from_count(self.count)
    }

    /// Sample standard deviation (`n - 1` denominator; 0 for one sample).
    pub fn stddev<F: Real>(&self) -> F {
        if self.count < 2 {
            return F::zero();
        }
        let n = self.count as u128;
        // n * sum_sq - sum^2 is exact and non-negative
        let num = n * self.sum_sq - self.sum * self.sum;
        let var = F::from_u128(num).unwrap() / (F::from_u128(n).unwrap() * F::from_u128(n - 1).unwrap());
        var.sqrt()
    }

    pub fn ci95<F: Real>(&self) -> F {
        F::lit(Z95) * self.stddev::<F>() / F::from_count(self.count).sqrt()
    }
}

/// Distribution of codeword lengths over a batch of trials.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LengthStats<F> {
    pub trials: u64,
    /// Sum of all lengths; `mean = total_bits / trials` exactly.
    pub total_bits: u128,
    pub mean: F,
    pub stddev: F,
    pub ci95_halfwidth: F,
    pub min: u64,
    pub max: u64,
    pub histogram: BTreeMap<u64, u64>,
}

impl<F: Real> LengthStats<F> {
    /// Standard error of the mean.
    pub fn std_error(&self) -> F {
        self.stddev / F::from_count(self.trials).sqrt()
    }
}

/// The source word drawn for trial `t`: uniform over all `C(n, r)` supports.
pub fn trial_source(params: &CodeParams, master_seed: u64, t: u64) -> Result<SparseSeq> {
    let support = sample_subset(params.n, params.r as u64, &SampleKey::trial(master_seed, t))?;
    SparseSeq::new(params.n, support)
}

#[derive(Default)]
struct LengthAcc {
    moments: Moments,
    histogram: BTreeMap<u64, u64>,
    overflows: u64,
}

impl LengthAcc {
    fn merge(mut self, other: Self) -> Self {
        self.moments = self.moments.merge(other.moments);
        for (k, v) in other.histogram {
            *self.histogram.entry(k).or_default() += v;
        }
        self.overflows += other.overflows;
        self
    }
}

/// Monte Carlo estimate of the expected codeword length under the uniform
/// source, against the codebook `cb`.
pub fn mc_expected_length_with<F: Real>(cb: &Codebook, trials: u64, master_seed: u64) -> Result<LengthStats<F>> {
    if trials == 0 {
        return Err(Error::InvalidParams("trials must be at least 1".into()));
    }
    let params = *cb.params();
    let acc = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<LengthAcc> {
            let mut acc = LengthAcc::default();
            let x = trial_source(&params, master_seed, t)?;
            match cb.encode(&x) {
                Ok(c) => {
                    acc.moments.push(c.len());
                    acc.histogram.insert(c.len(), 1);
                }
                Err(Error::SearchCapExceeded { .. }) => acc.overflows = 1,
                Err(e) => return Err(e),
            }
            Ok(acc)
        })
        .try_reduce(LengthAcc::default, |a, b| Ok(a.merge(b)))?;
    if acc.overflows > 0 {
        return Err(Error::TrialsOverflowed { count: acc.overflows, trials, k_max: params.k_max });
    }
    let m = &acc.moments;
    Ok(LengthStats {
        trials,
        total_bits: m.sum,
        mean: m.mean(),
        stddev: m.stddev(),
        ci95_halfwidth: m.ci95(),
        min: m.min.unwrap_or(0),
        max: m.max.unwrap_or(0),
        histogram: acc.histogram,
    })
}

/// [`mc_expected_length_with`] on a fresh codebook for `params`.
pub fn mc_expected_length<F: Real>(params: &CodeParams, trials: u64, master_seed: u64) -> Result<LengthStats<F>> {
    mc_expected_length_with(&Codebook::new(*params), trials, master_seed)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingPoint<F> {
    pub n: u64,
    pub mean: F,
    pub ci95_halfwidth: F,
    pub log2_n: F,
    pub log2_mean: F,
}

/// Least-squares fit of `log2 E[ℓ]` against `log2 n` for fixed `(r, d)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingFit<F> {
    pub r: u32,
    pub d: u32,
    pub trials: u64,
    pub slope: F,
    pub intercept: F,
    /// `r / (rd + 1)`.
    pub target_exponent: F,
    pub points: Vec<ScalingPoint<F>>,
}

/// Ordinary least squares `y = a + b x`; returns `(b, a)`.
pub fn least_squares<F: Real>(xs: &[F], ys: &[F]) -> Result<(F, F)> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::InvalidParams("regression needs at least two points".into()));
    }
    let n = F::from_usize(xs.len()).unwrap();
    let mx = xs.iter().fold(F::zero(), |a, &b| a + b) / n;
    let my = ys.iter().fold(F::zero(), |a, &b| a + b) / n;
    let (mut sxy, mut sxx) = (F::zero(), F::zero());
    for (&x, &y) in xs.iter().zip(ys) {
        sxy = sxy + (x - mx) * (y - my);
        sxx = sxx + (x - mx) * (x - mx);
    }
    if sxx.is_zero() {
        return Err(Error::InvalidParams("regression needs at least two distinct abscissae".into()));
    }
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

/// Measures the growth exponent of the expected length in `n`.
///
/// Each grid point gets its own codebook seeded with `master_seed`; trial
/// sources use the same seed under the trial role. At least four ascending
/// points are recommended; fewer than two is an error.
pub fn scaling_experiment<F: Real>(r: u32, d: u32, n_grid: &[u64], trials: u64, master_seed: u64) -> Result<ScalingFit<F>> {
    if n_grid.len() < 2 {
        return Err(Error::InvalidParams("scaling needs at least two grid points".into()));
    }
    if !n_grid.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::InvalidParams("n grid must be strictly ascending".into()));
    }
    let mut points = Vec::with_capacity(n_grid.len());
    for &n in n_grid {
        let params = CodeParams::new(n, r, d, master_seed)?;
        let stats: LengthStats<F> = mc_expected_length(&params, trials, master_seed)?;
        points.push(ScalingPoint {
            n,
            mean: stats.mean,
            ci95_halfwidth: stats.ci95_halfwidth,
            log2_n: F::from_count(n).log2(),
            log2_mean: stats.mean.log2(),
        });
    }
    let xs: Vec<F> = points.iter().map(|p| p.log2_n).collect();
    let ys: Vec<F> = points.iter().map(|p| p.log2_mean).collect();
    let (slope, intercept) = least_squares(&xs, &ys)?;
    let rf = F::from_count(r as u64);
    Ok(ScalingFit {
        r,
        d,
        trials,
        slope,
        intercept,
        target_exponent: rf / (rf * F::from_count(d as u64) + F::one()),
        points,
    })
}

/// Outcome of checking every source word of an instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExhaustiveReport<F> {
    pub n: u64,
    pub r: u32,
    pub d: u32,
    pub master_seed: u64,
    pub sequences: u64,
    pub queries: u64,
    /// Queries that decoded to the wrong bit, plus full decodes that failed.
    pub errors: u64,
    pub max_probes: usize,
    /// Every trace read exactly `d` bits inside `S_ℓ` and none outside.
    pub probe_budget_ok: bool,
    /// Every trace read exactly the positions planned from `(j, ℓ)` alone.
    pub nonadaptive_ok: bool,
    pub injective: bool,
    /// No smaller level accepted any source word.
    pub min_level_checked: bool,
    /// Exact average codeword length over all source words.
    pub mean_length: F,
    pub max_length: u64,
}

impl<F> ExhaustiveReport<F> {
    pub fn passed(&self) -> bool {
        self.errors == 0 && self.probe_budget_ok && self.nonadaptive_ok && self.injective && self.min_level_checked
    }
}

/// Lexicographic `r`-subsets of `[1..=n]`.
pub struct Combinations {
    n: u64,
    current: Option<Vec<u64>>,
}

impl Combinations {
    pub fn new(n: u64, r: usize) -> Self {
        let current = (r as u64 <= n).then(|| (1..=r as u64).collect());
        Self { n, current }
    }
}

impl Iterator for Combinations {
    type Item = Vec<u64>;

    fn next(&mut self) -> Option<Vec<u64>> {
        let out = self.current.clone()?;
        let cur = self.current.as_mut().unwrap();
        let r = cur.len();
        let mut i = r;
        loop {
            if i == 0 {
                self.current = None;
                break;
            }
            i -= 1;
            if cur[i] < self.n - (r - 1 - i) as u64 {
                cur[i] += 1;
                for t in i + 1..r {
                    cur[t] = cur[t - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    }
}

/// Encodes every source word of the instance and decodes every bit of each.
pub fn exhaustive_verify<F: Real>(params: &CodeParams) -> Result<ExhaustiveReport<F>> {
    let count = binom_exact(params.n, params.r as i64);
    if count > EXHAUSTIVE_LIMIT.into() {
        return Err(Error::GuardViolation { count: count.to_string(), limit: EXHAUSTIVE_LIMIT });
    }
    let cb = Codebook::new(*params);
    let d = params.d as usize;
    let mut report = ExhaustiveReport {
        n: params.n,
        r: params.r,
        d: params.d,
        master_seed: params.master_seed,
        sequences: 0,
        queries: 0,
        errors: 0,
        max_probes: 0,
        probe_budget_ok: true,
        nonadaptive_ok: true,
        injective: true,
        min_level_checked: true,
        mean_length: F::zero(),
        max_length: 0,
    };
    let mut seen: HashSet<Codeword> = HashSet::new();
    let mut total_len: u128 = 0;
    for support in Combinations::new(params.n, params.r as usize) {
        let x = SparseSeq::new(params.n, support)?;
        let c = cb.encode(&x)?;
        report.sequences += 1;
        total_len += c.len() as u128;
        report.max_length = report.max_length.max(c.len());
        if !seen.insert(c.clone()) {
            report.injective = false;
        }
        for k in params.k_min()..c.len() {
            if level_accepts(&*cb.level(k)?, x.support()) {
                report.min_level_checked = false;
            }
        }
        let level = cb.level(c.len())?;
        for j in 1..=params.n {
            report.queries += 1;
            let planned = cb.probe_plan(j, c.len())?;
            let mut reads = Vec::new();
            let trace = cb.decode_bit_with(c.len(), j, |q| {
                reads.push(q);
                c.bit(q)
            })?;
            if trace.decoded != x.bit(j) {
                report.errors += 1;
            }
            report.max_probes = report.max_probes.max(reads.len());
            let expected_probes = if level.position_of(j).is_some() { d } else { 0 };
            if reads.len() != expected_probes {
                report.probe_budget_ok = false;
            }
            let planned = match planned {
                ProbePlan::Outside => Vec::new(),
                ProbePlan::Probe(t) => t,
            };
            if reads != planned || trace.positions != planned {
                report.nonadaptive_ok = false;
            }
        }
        if cb.decode_full(&c).ok().as_ref() != Some(&x) {
            report.errors += 1;
        }
    }
    report.mean_length = F::from_u128(total_len).unwrap() / F::from_count(report.sequences.max(1));
    Ok(report)
}
