//! Encoder and non-adaptive local decoder.
//!
//! A source word is sent to the first level `k` whose plan accepts its
//! support; the codeword is the union of the support's probe sets at that
//! level. Decoding bit `j` reads nothing when `j` is outside `S_ℓ`, and
//! otherwise returns the AND of the `d` bits of `T_{j,ℓ}`.

use serde::Serialize;

use crate::codebook::{check_length, CodeParams, Codebook, LevelPlan, ProbePlan};
use crate::error::{Error, Result};

/// A length-`n` binary word with sorted 1-based support.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SparseSeq {
    n: u64,
    support: Vec<u64>,
}

impl SparseSeq {
    /// `support` must be strictly increasing and inside `[1..=n]`.
    pub fn new(n: u64, support: Vec<u64>) -> Result<Self> {
        if !support.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidSequence("support must be strictly increasing".into()));
        }
        if support.first().is_some_and(|&i| i == 0) || support.last().is_some_and(|&i| i > n) {
            return Err(Error::InvalidSequence(format!("support must lie in [1..{n}]")));
        }
        Ok(Self { n, support })
    }

    /// Sorts and validates an arbitrary index list; duplicates are rejected.
    pub fn from_unsorted(n: u64, mut support: Vec<u64>) -> Result<Self> {
        support.sort_unstable();
        Self::new(n, support)
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn support(&self) -> &[u64] {
        &self.support
    }

    pub fn weight(&self) -> usize {
        self.support.len()
    }

    pub fn bit(&self, j: u64) -> bool {
        self.support.binary_search(&j).is_ok()
    }
}

/// Variable-length bit string stored by its set positions.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Codeword {
    len: u64,
    ones: Vec<u64>,
}

impl Codeword {
    pub fn new(len: u64, ones: Vec<u64>) -> Result<Self> {
        if !ones.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidCodeword("set positions must be strictly increasing".into()));
        }
        if ones.first().is_some_and(|&i| i == 0) || ones.last().is_some_and(|&i| i > len) {
            return Err(Error::InvalidCodeword(format!("set positions must lie in [1..{len}]")));
        }
        Ok(Self { len, ones })
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn ones(&self) -> &[u64] {
        &self.ones
    }

    /// Bit at 1-based position `pos`.
    pub fn bit(&self, pos: u64) -> bool {
        self.ones.binary_search(&pos).is_ok()
    }
}

/// Record of one local decode.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProbeTrace {
    pub query: u64,
    pub level: u64,
    pub positions: Vec<u64>,
    pub values: Vec<bool>,
    pub decoded: bool,
}

impl ProbeTrace {
    pub fn probes(&self) -> usize {
        self.positions.len()
    }
}

/// Dense bit mask over `[1..=len]`.
struct PositionMask {
    words: Vec<u64>,
}

impl PositionMask {
    fn new(len: u64) -> Self {
        Self { words: vec![0; (len as usize).div_ceil(64)] }
    }

    fn set(&mut self, pos: u64) {
        let i = (pos - 1) as usize;
        self.words[i / 64] |= 1 << (i % 64);
    }

    fn get(&self, pos: u64) -> bool {
        let i = (pos - 1) as usize;
        self.words[i / 64] >> (i % 64) & 1 == 1
    }
}

/// Whether level `plan` accepts `support`:
/// the support lies inside `S_k`, and no other `j` in `S_k` has its probe set
/// covered by the union of the support's probe sets.
pub fn level_accepts(plan: &LevelPlan, support: &[u64]) -> bool {
    if plan.len() < support.len() {
        return false;
    }
    let mut slots = Vec::with_capacity(support.len());
    for &i in support {
        match plan.position_of(i) {
            Some(s) => slots.push(s),
            None => return false,
        }
    }
    let mut mask = PositionMask::new(plan.k());
    for &s in &slots {
        for &q in plan.probes_at(s) {
            mask.set(q);
        }
    }
    // slots are ascending because support and S_k both are
    let mut next_support = slots.iter().peekable();
    for slot in 0..plan.len() {
        if next_support.peek() == Some(&&slot) {
            next_support.next();
            continue;
        }
        if plan.probes_at(slot).iter().all(|&q| mask.get(q)) {
            return false;
        }
    }
    true
}

fn union_codeword(plan: &LevelPlan, support: &[u64]) -> Codeword {
    let mut ones: Vec<u64> = support.iter().flat_map(|&i| plan.probe_set(i).unwrap().iter().copied()).collect();
    ones.sort_unstable();
    ones.dedup();
    Codeword { len: plan.k(), ones }
}

impl Codebook {
    fn check_source(&self, x: &SparseSeq) -> Result<()> {
        let p = self.params();
        if x.n() != p.n {
            return Err(Error::InvalidSequence(format!("sequence length {} does not match n = {}", x.n(), p.n)));
        }
        if x.weight() != p.r as usize {
            return Err(Error::InvalidSequence(format!("sequence weight {} does not match r = {}", x.weight(), p.r)));
        }
        Ok(())
    }

    /// Codeword of `x` at its smallest accepting level.
    pub fn encode(&self, x: &SparseSeq) -> Result<Codeword> {
        self.check_source(x)?;
        let p = *self.params();
        for k in p.k_min()..=p.k_max {
            let plan = self.level(k)?;
            if plan.len() < x.weight() {
                continue;
            }
            if level_accepts(&plan, x.support()) {
                return Ok(union_codeword(&plan, x.support()));
            }
        }
        Err(Error::SearchCapExceeded { k_max: p.k_max })
    }

    /// Codeword of `x` at level `k` if that level accepts it, regardless of
    /// whether a smaller level would.
    pub fn encode_at_level(&self, x: &SparseSeq, k: u64) -> Result<Option<Codeword>> {
        self.check_source(x)?;
        let plan = self.level(k)?;
        Ok(level_accepts(&plan, x.support()).then(|| union_codeword(&plan, x.support())))
    }

    /// Decodes bit `j` of a codeword of length `len` through a read callback.
    ///
    /// The positions passed to `read` are fixed by `(params, j, len)` before
    /// the first call; no read result influences which position comes next.
    pub fn decode_bit_with(&self, len: u64, j: u64, mut read: impl FnMut(u64) -> bool) -> Result<ProbeTrace> {
        let positions = match self.probe_plan(j, len)? {
            ProbePlan::Outside => Vec::new(),
            ProbePlan::Probe(t) => t,
        };
        let values: Vec<bool> = positions.iter().map(|&q| read(q)).collect();
        let decoded = !positions.is_empty() && values.iter().all(|&b| b);
        Ok(ProbeTrace { query: j, level: len, positions, values, decoded })
    }

    pub fn decode_bit(&self, c: &Codeword, j: u64) -> Result<(bool, ProbeTrace)> {
        let trace = self.decode_bit_with(c.len(), j, |q| c.bit(q))?;
        Ok((trace.decoded, trace))
    }

    /// Recovers the whole source word; only indices in `S_ℓ` are probed.
    pub fn decode_full(&self, c: &Codeword) -> Result<SparseSeq> {
        let p = self.params();
        check_length(p, c.len())?;
        let plan = self.level(c.len())?;
        let support: Vec<u64> =
            plan.iter().filter(|(_, t)| t.iter().all(|&q| c.bit(q))).map(|(j, _)| j).collect();
        if support.len() != p.r as usize {
            return Err(Error::InconsistentCodeword { found: support.len(), expected: p.r });
        }
        SparseSeq::new(p.n, support)
    }
}

/// One-shot encode with a fresh codebook.
pub fn encode(params: &CodeParams, x: &SparseSeq) -> Result<Codeword> {
    Codebook::new(*params).encode(x)
}

pub fn decode_bit(params: &CodeParams, c: &Codeword, j: u64) -> Result<(bool, ProbeTrace)> {
    Codebook::new(*params).decode_bit(c, j)
}

pub fn decode_full(params: &CodeParams, c: &Codeword) -> Result<SparseSeq> {
    Codebook::new(*params).decode_full(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codebook::fixtures::*;
    use crate::codebook::{build_level, LevelPlan};
    use proptest::prelude::*;

    fn seq(n: u64, s: &[u64]) -> SparseSeq {
        SparseSeq::new(n, s.to_vec()).unwrap()
    }

    #[test]
    fn toy_acceptance() {
        let plan = toy_plan();
        assert!(!level_accepts(&plan, &[2, 3]));
        assert!(level_accepts(&plan, &[2, 6]));
        assert!(level_accepts(&plan, &[3, 6]));
        assert!(level_accepts(&plan, &[5, 6]));
        // the three other C1-satisfying supports fail C2
        assert!(!level_accepts(&plan, &[2, 5]));
        assert!(!level_accepts(&plan, &[3, 5]));
        // C1 failure
        assert!(!level_accepts(&plan, &[1, 2]));
    }

    #[test]
    fn empty_support_acceptance() {
        let empty = LevelPlan::from_parts(4, 2, []).unwrap();
        assert!(level_accepts(&empty, &[]));
        let nonempty = LevelPlan::from_parts(4, 2, [(1, vec![1, 2])]).unwrap();
        assert!(level_accepts(&nonempty, &[]));
    }

    #[test]
    fn toy_codewords() {
        let cb = toy_codebook();
        let c3 = cb.encode_at_level(&seq(12, &[2, 6]), 10).unwrap().unwrap();
        assert_eq!((c3.len(), c3.ones()), (10, &[2, 3, 4, 6, 7, 8][..]));
        let c5 = cb.encode_at_level(&seq(12, &[3, 6]), 10).unwrap().unwrap();
        assert_eq!(c5.ones(), &[2, 4, 5, 6, 7, 8]);
        let c6 = cb.encode_at_level(&seq(12, &[5, 6]), 10).unwrap().unwrap();
        assert_eq!(c6.ones(), &[3, 4, 5, 6, 7, 8]);
        assert_eq!(cb.encode_at_level(&seq(12, &[2, 3]), 10).unwrap(), None);
    }

    #[test]
    fn toy_local_decodes() {
        let cb = toy_codebook();
        let c = Codeword::new(10, vec![2, 3, 4, 6, 7, 8]).unwrap();
        let (bit, t) = cb.decode_bit(&c, 4).unwrap();
        assert!(!bit);
        assert_eq!(t.probes(), 0);
        let (bit, t) = cb.decode_bit(&c, 2).unwrap();
        assert!(bit);
        assert_eq!(t.positions, vec![2, 3, 4]);
        assert_eq!(t.values, vec![true, true, true]);
        let (bit, t) = cb.decode_bit(&c, 3).unwrap();
        assert!(!bit);
        assert_eq!(t.positions, vec![2, 4, 5]);
        assert_eq!(t.values, vec![true, true, false]);
        assert_eq!(cb.decode_full(&c).unwrap().support(), &[2, 6]);
        let c6 = Codeword::new(10, vec![3, 4, 5, 6, 7, 8]).unwrap();
        assert_eq!(cb.decode_full(&c6).unwrap().support(), &[5, 6]);
    }

    #[test]
    fn decode_errors() {
        let cb = toy_codebook();
        let c = Codeword::new(10, vec![2, 3, 4, 6, 7, 8]).unwrap();
        assert!(matches!(cb.decode_bit(&c, 0), Err(Error::QueryOutOfRange { .. })));
        assert!(matches!(cb.decode_bit(&c, 13), Err(Error::QueryOutOfRange { .. })));
        let short = Codeword::new(5, vec![]).unwrap();
        assert!(matches!(cb.decode_bit(&short, 1), Err(Error::LengthOutOfRange { .. })));
        let all = Codeword::new(10, (1..=10).collect()).unwrap();
        assert_eq!(cb.decode_full(&all), Err(Error::InconsistentCodeword { found: 4, expected: 2 }));
    }

    #[test]
    fn zero_sparsity_codeword() {
        let p = CodeParams::new(9, 0, 2, 17).unwrap();
        let x = seq(9, &[]);
        let c = encode(&p, &x).unwrap();
        assert_eq!((c.len(), c.ones()), (1, &[][..]));
        assert_eq!(decode_full(&p, &c).unwrap(), x);
        for j in 1..=9 {
            assert_eq!(decode_bit(&p, &c, j).unwrap().0, false);
        }
    }

    #[test]
    fn encode_rejects_mismatched_sources() {
        let cb = Codebook::new(CodeParams::new(12, 2, 3, 0).unwrap());
        assert!(matches!(cb.encode(&seq(11, &[1, 2])), Err(Error::InvalidSequence(_))));
        assert!(matches!(cb.encode(&seq(12, &[1])), Err(Error::InvalidSequence(_))));
    }

    #[test]
    fn search_cap_is_reported() {
        let p = CodeParams::with_k_max(40, 3, 3, 0, 10).unwrap();
        let cb = Codebook::new(p);
        assert_eq!(cb.encode(&seq(40, &[1, 2, 3])), Err(Error::SearchCapExceeded { k_max: 10 }));
    }

    #[test]
    fn sequence_and_codeword_validation() {
        assert!(SparseSeq::new(5, vec![2, 2]).is_err());
        assert!(SparseSeq::new(5, vec![3, 1]).is_err());
        assert!(SparseSeq::new(5, vec![0]).is_err());
        assert!(SparseSeq::new(5, vec![6]).is_err());
        assert_eq!(SparseSeq::from_unsorted(5, vec![4, 1]).unwrap().support(), &[1, 4]);
        assert!(Codeword::new(3, vec![4]).is_err());
        assert!(Codeword::new(3, vec![2, 1]).is_err());
    }

    #[test]
    fn exhaustive_round_trip_n8_r2_d2() {
        let p = CodeParams::new(8, 2, 2, 0).unwrap();
        let cb = Codebook::new(p);
        for a in 1..=8u64 {
            for b in a + 1..=8 {
                let x = seq(8, &[a, b]);
                let c = cb.encode(&x).unwrap();
                assert!(c.len() >= p.k_min());
                assert_eq!(cb.decode_full(&c).unwrap(), x);
                for j in 1..=8 {
                    let (bit, t) = cb.decode_bit(&c, j).unwrap();
                    assert_eq!(bit, x.bit(j));
                    assert!(t.probes() == 0 || t.probes() == 2);
                }
                for k in p.k_min()..c.len() {
                    assert!(!level_accepts(&build_level(&p, k).unwrap(), x.support()));
                }
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn random_instances_decode_exactly(n in 4u64..60, r in 1u32..4, d in 1u32..4, seed: u64, pick: u64) {
            prop_assume!(r as u64 <= n);
            let p = CodeParams::new(n, r, d, seed).unwrap();
            let support = crate::combinatorics::sample_subset(n, r as u64, &crate::combinatorics::SampleKey::trial(pick, 0)).unwrap();
            let x = SparseSeq::new(n, support).unwrap();
            let cb = Codebook::new(p);
            let c = cb.encode(&x).unwrap();
            for j in 1..=n {
                let (bit, t) = cb.decode_bit(&c, j).unwrap();
                prop_assert_eq!(bit, x.bit(j));
                prop_assert!(t.probes() <= d as usize);
            }
            prop_assert_eq!(cb.decode_full(&c).unwrap(), x);
        }
    }
}
