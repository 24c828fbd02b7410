//! Membership queries as a two-party protocol under a speed limit.
//!
//! Bob holds a size-`r` set `S` and stores its indicator word as a codeword.
//! He opens by announcing the codeword length `ℓ` in `z` bits, which caps
//! the size of every message Alice may send. Alice, holding `i`, then asks
//! for at most `d` codeword positions (one per round) and answers the AND of
//! the replies.

use std::collections::VecDeque;
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::bench::{trial_source, Moments};
use crate::bounds::upper_bound_nonadaptive;
use crate::codebook::{CodeParams, Codebook, ProbePlan};
use crate::codec::{Codeword, SparseSeq};
use crate::combinatorics::{KeyStream, SampleKey};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Bit width needed to write `len`: `ceil(log2(len + 1))`.
pub fn speed_limit_bits(len: u64) -> u32 {
    64 - len.leading_zeros()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Message {
    /// Bob → Alice: the codeword length, written in `z` bits.
    SpeedLimit { z: u32, len: u64 },
    /// Alice → Bob: a codeword position.
    Query(u64),
    /// Bob → Alice: one codeword bit.
    Reply(bool),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Round {
    pub alice_message: u64,
    pub bob_reply: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Transcript {
    pub query: u64,
    pub z: u32,
    /// `ℓ`, as carried by the opening message.
    pub initial_message: u64,
    pub rounds: Vec<Round>,
    pub answer: bool,
    pub alice_bits_sent: u64,
    pub bob_bits_sent: u64,
}

impl fmt::Display for Transcript {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "bob -> alice  speed limit z={} len={}", self.z, self.initial_message)?;
        for (n, r) in self.rounds.iter().enumerate() {
            writeln!(f, "round {}: alice -> bob  pos={}  |  bob -> alice  bit={}", n + 1, r.alice_message, r.bob_reply as u8)?;
        }
        write!(
            f,
            "answer f({}, S) = {}  (alice sent {} bits, bob sent {} bits)",
            self.query, self.answer as u8, self.alice_bits_sent, self.bob_bits_sent
        )
    }
}

struct Bob {
    codeword: Codeword,
}

impl Bob {
    fn open(&self) -> Message {
        let len = self.codeword.len();
        Message::SpeedLimit { z: speed_limit_bits(len), len }
    }

    fn respond(&self, msg: Message) -> Option<Message> {
        match msg {
            Message::Query(pos) => Some(Message::Reply(self.codeword.bit(pos))),
            _ => None,
        }
    }
}

struct Alice<'a> {
    codebook: &'a Codebook,
    query: u64,
    z: u32,
    pending: VecDeque<u64>,
    outstanding: Option<u64>,
    acc: bool,
    answer: Option<bool>,
}

impl Alice<'_> {
    /// Reacts to a message from Bob; returns her next message, if any.
    fn receive(&mut self, msg: Message, rounds: &mut Vec<Round>) -> Result<Option<Message>> {
        match msg {
            Message::SpeedLimit { z, len } => {
                self.z = z;
                match self.codebook.probe_plan(self.query, len)? {
                    ProbePlan::Outside => self.answer = Some(false),
                    ProbePlan::Probe(t) => self.pending = t.into(),
                }
            }
            Message::Reply(bit) => {
                let pos = self.outstanding.take().expect("reply without a query");
                rounds.push(Round { alice_message: pos, bob_reply: bit });
                self.acc &= bit;
            }
            Message::Query(_) => unreachable!("alice never receives queries"),
        }
        if self.answer.is_some() {
            return Ok(None);
        }
        match self.pending.pop_front() {
            Some(pos) => {
                debug_assert!(pos < 1u64 << self.z);
                self.outstanding = Some(pos);
                Ok(Some(Message::Query(pos)))
            }
            None => {
                self.answer = Some(self.acc);
                Ok(None)
            }
        }
    }
}

/// Runs one membership query `i ∈ S` to completion.
pub fn run_protocol_with(cb: &Codebook, set: &SparseSeq, i: u64) -> Result<Transcript> {
    let params = cb.params();
    if i == 0 || i > params.n {
        return Err(Error::QueryOutOfRange { j: i, n: params.n });
    }
    let bob = Bob { codeword: cb.encode(set)? };
    let mut alice =
        Alice { codebook: cb, query: i, z: 0, pending: VecDeque::new(), outstanding: None, acc: true, answer: None };

    let mut rounds = Vec::new();
    let (mut alice_bits, mut bob_bits) = (0u64, 0u64);
    let mut to_alice: VecDeque<Message> = VecDeque::new();
    let mut to_bob: VecDeque<Message> = VecDeque::new();
    let opening = bob.open();
    let (z, len) = match opening {
        Message::SpeedLimit { z, len } => (z, len),
        _ => unreachable!(),
    };
    bob_bits += z as u64;
    to_alice.push_back(opening);

    while let Some(msg) = to_alice.pop_front() {
        if let Some(reply) = alice.receive(msg, &mut rounds)? {
            alice_bits += z as u64;
            to_bob.push_back(reply);
        }
        while let Some(msg) = to_bob.pop_front() {
            if let Some(reply) = bob.respond(msg) {
                bob_bits += 1;
                to_alice.push_back(reply);
            }
        }
    }
    Ok(Transcript {
        query: i,
        z,
        initial_message: len,
        rounds,
        answer: alice.answer.expect("protocol ended without an answer"),
        alice_bits_sent: alice_bits,
        bob_bits_sent: bob_bits,
    })
}

pub fn run_protocol(params: &CodeParams, set: &SparseSeq, i: u64) -> Result<Transcript> {
    run_protocol_with(&Codebook::new(*params), set, i)
}

/// Averages over random `(S, i)` pairs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProtocolCost<F> {
    pub trials: u64,
    pub mean_pow2z: F,
    pub ci95_pow2z: F,
    pub mean_len: F,
    pub ci95_len: F,
    pub mean_rounds: F,
    pub max_rounds: u64,
    /// Trials whose answer differed from `[i ∈ S]`.
    pub wrong_answers: u64,
    /// Expected-length upper bound for `(n, r, d)`.
    pub bound: F,
    /// `2^z <= 2ℓ + 2` per trial, so the bound on `E[2^z]` carries this factor.
    pub pow2z_bound: F,
    pub mean_len_within_bound: bool,
    pub mean_pow2z_within_bound: bool,
}

/// The query index drawn for trial `t`.
fn trial_query(n: u64, master_seed: u64, t: u64) -> u64 {
    let key = SampleKey { level: 1, ..SampleKey::trial(master_seed, t) };
    KeyStream::new(&key).uniform_1_to(n)
}

pub fn protocol_cost_experiment_with<F: Real>(cb: &Codebook, trials: u64, master_seed: u64) -> Result<ProtocolCost<F>> {
    if trials == 0 {
        return Err(Error::InvalidParams("trials must be at least 1".into()));
    }
    let params = *cb.params();
    let (pow2z, lens, rounds, wrong) = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<(Moments, Moments, Moments, u64)> {
            let set = trial_source(&params, master_seed, t)?;
            let i = trial_query(params.n, master_seed, t);
            let tr = run_protocol_with(cb, &set, i)?;
            let (mut a, mut b, mut c) = (Moments::default(), Moments::default(), Moments::default());
            a.push(1u64 << tr.z);
            b.push(tr.initial_message);
            c.push(tr.rounds.len() as u64);
            Ok((a, b, c, (tr.answer != set.bit(i)) as u64))
        })
        .try_reduce(
            || (Moments::default(), Moments::default(), Moments::default(), 0),
            |x, y| Ok((x.0.merge(y.0), x.1.merge(y.1), x.2.merge(y.2), x.3 + y.3)),
        )?;
    let bound: F = upper_bound_nonadaptive(params.n, params.r, params.d)?;
    let pow2z_bound = F::lit(2.0) * bound + F::lit(2.0);
    let mean_pow2z: F = pow2z.mean();
    let mean_len: F = lens.mean();
    Ok(ProtocolCost {
        trials,
        mean_pow2z,
        ci95_pow2z: pow2z.ci95(),
        mean_len,
        ci95_len: lens.ci95(),
        mean_rounds: rounds.mean(),
        max_rounds: rounds.max.unwrap_or(0),
        wrong_answers: wrong,
        bound,
        pow2z_bound,
        mean_len_within_bound: mean_len <= bound,
        mean_pow2z_within_bound: mean_pow2z <= pow2z_bound,
    })
}

pub fn protocol_cost_experiment<F: Real>(params: &CodeParams, trials: u64, master_seed: u64) -> Result<ProtocolCost<F>> {
    protocol_cost_experiment_with(&Codebook::new(*params), trials, master_seed)
}
