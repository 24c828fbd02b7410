//! Per-length codebook material shared by encoder and decoder.
//!
//! For every candidate codeword length `k >= r*d + 1` the codebook fixes a
//! level set `S_k` of source positions and, for each `j` in `S_k`, a probe
//! set `T_{j,k}` of `d` codeword positions. Both are drawn from the keyed
//! generator, so they depend only on [`CodeParams`].

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use crate::bounds::upper_bound_nonadaptive;
use crate::combinatorics::{binom_exact, sample_subset, SampleKey};
use crate::error::{Error, Result};

/// Version of the keyed sampler and level construction.
pub const SCHEME_VERSION: u8 = 1;

/// Identifies a codebook: the tuple `(n, r, d)`, the master seed, the level
/// search cap and the sampler version.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub struct CodeParams {
    pub n: u64,
    pub r: u32,
    pub d: u32,
    pub master_seed: u64,
    pub k_max: u64,
    pub scheme_version: u8,
}

impl CodeParams {
    /// Parameters with the default search cap, see [`default_k_max`].
    pub fn new(n: u64, r: u32, d: u32, master_seed: u64) -> Result<Self> {
        Self::validate_core(n, r, d)?;
        Self::with_k_max(n, r, d, master_seed, default_k_max(n, r, d))
    }

    pub fn with_k_max(n: u64, r: u32, d: u32, master_seed: u64, k_max: u64) -> Result<Self> {
        Self::validate_core(n, r, d)?;
        let p = Self { n, r, d, master_seed, k_max, scheme_version: SCHEME_VERSION };
        if k_max < p.k_min() {
            return Err(Error::InvalidParams(format!("k_max = {k_max} is below r*d + 1 = {}", p.k_min())));
        }
        Ok(p)
    }

    fn validate_core(n: u64, r: u32, d: u32) -> Result<()> {
        if r as u64 > n {
            return Err(Error::InvalidParams(format!("r = {r} exceeds n = {n}")));
        }
        if d == 0 {
            return Err(Error::InvalidParams("d must be at least 1".into()));
        }
        Ok(())
    }

    /// `r*d`, the number of probes spent over the whole support.
    pub fn rd(&self) -> u64 {
        self.r as u64 * self.d as u64
    }

    /// Smallest candidate length, `r*d + 1`.
    pub fn k_min(&self) -> u64 {
        self.rd() + 1
    }
}

/// `max(64, 8 * ceil(U))` where `U` is the non-adaptive expected-length upper
/// bound; 64 when `r = 0`.
pub fn default_k_max(n: u64, r: u32, d: u32) -> u64 {
    let floor = 64u64.max(r as u64 * d as u64 + 1);
    if r == 0 {
        return floor;
    }
    match upper_bound_nonadaptive::<f64>(n, r, d) {
        Ok(u) if u.is_finite() && u < 1e18 => floor.max(8 * u.ceil() as u64),
        _ => u64::MAX,
    }
}

/// `min(n, floor(r/(r+1) * C(k,d) / C(rd,d)))`, exact before the floor.
pub fn level_size(n: u64, r: u32, d: u32, k: u64) -> Result<u64> {
    if d == 0 {
        return Err(Error::Domain("level_size requires d >= 1".into()));
    }
    let rd = r as u64 * d as u64;
    if k < rd + 1 {
        return Err(Error::Domain(format!("level_size requires k >= r*d + 1 = {}, got {k}", rd + 1)));
    }
    if r == 0 {
        return Ok(0);
    }
    let num = binom_exact(k, d as i64) * r;
    let den = binom_exact(rd, d as i64) * (r + 1);
    let q: BigUint = num / den;
    Ok(q.to_u64().map_or(n, |v| v.min(n)))
}

/// Codebook material for one candidate length `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelPlan {
    k: u64,
    d: u32,
    level_set: Vec<u64>,
    // probe set of level_set[i] lives at probes[i*d .. (i+1)*d], sorted
    probes: Vec<u64>,
}

impl LevelPlan {
    /// Assembles a plan from explicit parts (fixtures, golden tests).
    ///
    /// Entries may come in any order; each probe set must have exactly `d`
    /// distinct positions in `[1..=k]`.
    pub fn from_parts(k: u64, d: u32, entries: impl IntoIterator<Item = (u64, Vec<u64>)>) -> Result<Self> {
        let mut entries: Vec<(u64, Vec<u64>)> = entries.into_iter().collect();
        entries.sort_by_key(|e| e.0);
        if entries.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidParams("duplicate index in level set".into()));
        }
        let mut level_set = Vec::with_capacity(entries.len());
        let mut probes = Vec::with_capacity(entries.len() * d as usize);
        for (j, mut t) in entries {
            t.sort_unstable();
            t.dedup();
            if j == 0 || t.len() != d as usize || t.iter().any(|&p| p == 0 || p > k) {
                return Err(Error::InvalidParams(format!("probe set of {j} must hold {d} distinct positions in [1..{k}]")));
            }
            level_set.push(j);
            probes.extend(t);
        }
        Ok(Self { k, d, level_set, probes })
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    /// `S_k`, sorted ascending.
    pub fn level_set(&self) -> &[u64] {
        &self.level_set
    }

    pub fn len(&self) -> usize {
        self.level_set.len()
    }

    pub fn is_empty(&self) -> bool {
        self.level_set.is_empty()
    }

    /// Slot of `j` within `S_k`.
    pub fn position_of(&self, j: u64) -> Option<usize> {
        self.level_set.binary_search(&j).ok()
    }

    /// Probe set of the `slot`-th element of `S_k`.
    pub fn probes_at(&self, slot: usize) -> &[u64] {
        let d = self.d as usize;
        &self.probes[slot * d..(slot + 1) * d]
    }

    /// `T_{j,k}`, or `None` when `j` is not in `S_k`.
    pub fn probe_set(&self, j: u64) -> Option<&[u64]> {
        self.position_of(j).map(|slot| self.probes_at(slot))
    }

    /// `(j, T_{j,k})` in ascending `j`.
    pub fn iter(&self) -> impl Iterator<Item = (u64, &[u64])> + '_ {
        self.level_set.iter().enumerate().map(move |(slot, &j)| (j, self.probes_at(slot)))
    }
}

/// Draws the seed-derived plan for level `k`.
pub fn build_level(params: &CodeParams, k: u64) -> Result<LevelPlan> {
    if k > params.k_max {
        return Err(Error::LengthOutOfRange { len: k, min: params.k_min(), max: params.k_max });
    }
    let size = level_size(params.n, params.r, params.d, k)?;
    let level_set = sample_subset(params.n, size, &SampleKey::level_set(params.master_seed, k))?;
    let mut probes = Vec::with_capacity(level_set.len() * params.d as usize);
    for &j in &level_set {
        probes.extend(sample_subset(k, params.d as u64, &SampleKey::probe_set(params.master_seed, k, j))?);
    }
    Ok(LevelPlan { k, d: params.d, level_set, probes })
}

/// Outcome of planning one query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProbePlan {
    /// `j` is not in `S_ℓ`; the bit is 0 and nothing is read.
    Outside,
    /// The `d` positions to read, ascending.
    Probe(Vec<u64>),
}

/// The probe positions for query `j` against a codeword of length `len`.
///
/// Takes no codeword: the read set is fixed before any bit is seen.
pub fn probe_plan(params: &CodeParams, j: u64, len: u64) -> Result<ProbePlan> {
    check_query(params, j, len)?;
    let plan = build_level(params, len)?;
    Ok(plan_for(&plan, j))
}

fn plan_for(plan: &LevelPlan, j: u64) -> ProbePlan {
    match plan.probe_set(j) {
        Some(t) => ProbePlan::Probe(t.to_vec()),
        None => ProbePlan::Outside,
    }
}

pub(crate) fn check_length(params: &CodeParams, len: u64) -> Result<()> {
    if len < params.k_min() || len > params.k_max {
        return Err(Error::LengthOutOfRange { len, min: params.k_min(), max: params.k_max });
    }
    Ok(())
}

fn check_query(params: &CodeParams, j: u64, len: u64) -> Result<()> {
    if j == 0 || j > params.n {
        return Err(Error::QueryOutOfRange { j, n: params.n });
    }
    check_length(params, len)
}

type LevelCell = Arc<OnceLock<Arc<LevelPlan>>>;

/// Lazily built, shareable codebook.
///
/// Each level is built at most once even under concurrent access. Plans can
/// be pinned per level with [`Codebook::with_override`]; an override replaces
/// the seed-derived plan for both encoding and decoding.
#[derive(Debug)]
pub struct Codebook {
    params: CodeParams,
    overrides: HashMap<u64, Arc<LevelPlan>>,
    cache: RwLock<HashMap<u64, LevelCell>>,
}

impl Codebook {
    pub fn new(params: CodeParams) -> Self {
        Self { params, overrides: HashMap::new(), cache: RwLock::new(HashMap::new()) }
    }

    /// Pins the plan used at level `plan.k()`.
    pub fn with_override(mut self, plan: LevelPlan) -> Result<Self> {
        let k = plan.k();
        check_length(&self.params, k)?;
        if plan.d() != self.params.d {
            return Err(Error::InvalidParams(format!("override has d = {}, codebook has d = {}", plan.d(), self.params.d)));
        }
        if plan.level_set().last().is_some_and(|&j| j > self.params.n) {
            return Err(Error::InvalidParams(format!("override level set exceeds n = {}", self.params.n)));
        }
        self.overrides.insert(k, Arc::new(plan));
        Ok(self)
    }

    pub fn params(&self) -> &CodeParams {
        &self.params
    }

    /// The plan for level `k`, building it on first use.
    pub fn level(&self, k: u64) -> Result<Arc<LevelPlan>> {
        check_length(&self.params, k)?;
        if let Some(plan) = self.overrides.get(&k) {
            return Ok(Arc::clone(plan));
        }
        let cell = {
            let read = self.cache.read().expect("level cache poisoned");
            read.get(&k).cloned()
        };
        let cell = match cell {
            Some(c) => c,
            None => {
                let mut write = self.cache.write().expect("level cache poisoned");
                Arc::clone(write.entry(k).or_default())
            }
        };
        if let Some(plan) = cell.get() {
            return Ok(Arc::clone(plan));
        }
        let built = build_level(&self.params, k)?;
        Ok(Arc::clone(cell.get_or_init(|| Arc::new(built))))
    }

    /// Cached counterpart of [`probe_plan`].
    pub fn probe_plan(&self, j: u64, len: u64) -> Result<ProbePlan> {
        check_query(&self.params, j, len)?;
        Ok(plan_for(&*self.level(len)?, j))
    }
}
