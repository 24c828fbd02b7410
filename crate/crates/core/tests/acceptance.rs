//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

use std::collections::HashSet;
use std::time::{Duration, Instant};

use sldc::bench::{exhaustive_verify, mc_expected_length, scaling_experiment, Combinations};
use sldc::bounds::{adaptive_product_term, count_bound_holds, lower_bound_adaptive, lym_lower_bound, upper_bound_nonadaptive};
use sldc::codebook::probe_plan;
use sldc::combinatorics::{binom_exact, KeyStream, SampleKey};
use sldc::speedlimit::{protocol_cost_experiment, run_protocol_with};
use sldc::{
    parse_codeword, serialize_codeword, CodeParams, Codebook, Codeword, ExhaustiveReport, LengthStats, LevelPlan,
    ProbePlan, ProtocolCost, ScalingFit, SparseSeq,
};

const GRID: [(u64, u32, u32); 4] = [(6, 1, 1), (8, 2, 2), (12, 2, 3), (10, 3, 2)];
const SEEDS: [u64; 3] = [0, 1, 2];

fn grid_params() -> impl Iterator<Item = CodeParams> {
    GRID.iter().flat_map(|&(n, r, d)| SEEDS.iter().map(move |&s| CodeParams::new(n, r, d, s).unwrap()))
}

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome { ok, detail: detail.into() }
}

fn criterion_1() -> Outcome {
    let mut detail = Vec::new();
    let mut ok = true;
    for p in grid_params() {
        let rep: ExhaustiveReport = exhaustive_verify(&p).unwrap();
        ok &= rep.passed() && rep.max_probes <= p.d as usize;
        detail.push(format!("({},{},{},s{}) seq={} err={} inj={} min={}", p.n, p.r, p.d, p.master_seed, rep.sequences, rep.errors, rep.injective, rep.min_level_checked));
    }
    outcome(ok, detail.join("; "))
}

fn criterion_2() -> Outcome {
    let mut checked = 0u64;
    for p in grid_params() {
        let cb = Codebook::new(p);
        for support in Combinations::new(p.n, p.r as usize) {
            let x = SparseSeq::new(p.n, support).unwrap();
            let c = cb.encode(&x).unwrap();
            for j in 1..=p.n {
                // planned from (params, j, ℓ) on a fresh build, no codeword in scope
                let planned = match probe_plan(&p, j, c.len()).unwrap() {
                    ProbePlan::Outside => Vec::new(),
                    ProbePlan::Probe(t) => t,
                };
                let mut reads = Vec::new();
                let trace = cb
                    .decode_bit_with(c.len(), j, |q| {
                        reads.push(q);
                        c.bit(q)
                    })
                    .unwrap();
                // the same reads must happen whatever the bits are
                let mut reads_inverted = Vec::new();
                cb.decode_bit_with(c.len(), j, |q| {
                    reads_inverted.push(q);
                    !c.bit(q)
                })
                .unwrap();
                if reads != planned || reads_inverted != planned || trace.positions != planned {
                    return outcome(false, format!("({},{},{}) x={:?} j={j}: planned {planned:?} read {reads:?}", p.n, p.r, p.d, x.support()));
                }
                checked += 1;
            }
        }
    }
    outcome(true, format!("{checked} queries read exactly their precomputed plan"))
}

fn criterion_3() -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();
    for p in grid_params() {
        let s: LengthStats = mc_expected_length(&p, 10_000, 1000 + p.master_seed).unwrap();
        let slack = 3.0 * s.std_error();
        let lym = lym_lower_bound::<f64>(p.n, p.r, p.d, 0.0).unwrap().bound;
        let adaptive = lower_bound_adaptive::<f64>(p.n, p.r, p.d, 0.0).unwrap();
        let up = upper_bound_nonadaptive::<f64>(p.n, p.r, p.d).unwrap();
        let pass = s.mean + slack > lym && s.mean - slack < up && s.mean + slack > adaptive;
        ok &= pass;
        detail.push(format!("({},{},{},s{}) {lym:.2} <= {:.3}±{slack:.3} <= {up:.1}", p.n, p.r, p.d, p.master_seed, s.mean));
    }
    outcome(ok, detail.join("; "))
}

fn criterion_4() -> Outcome {
    let grid = [256, 1024, 4096, 16384];
    let a: ScalingFit = scaling_experiment(1, 1, &grid, 2000, 0).unwrap();
    let b: ScalingFit = scaling_experiment(1, 2, &grid, 2000, 0).unwrap();
    let ok_a = (0.35..=0.65).contains(&a.slope);
    let ok_b = (1.0 / 3.0 - 0.15..=1.0 / 3.0 + 0.15).contains(&b.slope);
    let means = |f: &ScalingFit| f.points.iter().map(|p| format!("{:.1}", p.mean)).collect::<Vec<_>>().join(",");
    outcome(
        ok_a && ok_b,
        format!("d=1 slope {:.4} (means {}), d=2 slope {:.4} (means {})", a.slope, means(&a), b.slope, means(&b)),
    )
}

fn criterion_5() -> Outcome {
    let failures: Vec<(u64, u64)> =
        (1..=50).flat_map(|m| (1..=50).map(move |v| (m, v))).filter(|&(m, v)| !count_bound_holds::<f64>(m, v)).collect();
    outcome(failures.is_empty(), format!("2500 pairs, failures: {failures:?}"))
}

fn criterion_6() -> Outcome {
    let term = adaptive_product_term::<f64>(20, 3, 1_000_000, 0.0).unwrap();
    let limit = binom_exact(20, 3).to_string().parse::<f64>().unwrap().ln() / (4.0 * std::f64::consts::E);
    let rel = ((term - limit) / limit).abs();
    outcome(rel < 1e-3, format!("term {term:.6} vs limit {limit:.6}, rel err {rel:.2e}"))
}

fn criterion_7() -> Outcome {
    let mut queries = 0u64;
    for p in grid_params() {
        let cb = Codebook::new(p);
        for support in Combinations::new(p.n, p.r as usize) {
            let s = SparseSeq::new(p.n, support).unwrap();
            for i in 1..=p.n {
                let tr = run_protocol_with(&cb, &s, i).unwrap();
                if tr.answer != s.bit(i) || tr.rounds.len() > p.d as usize {
                    return outcome(false, format!("wrong answer for S={:?} i={i}", s.support()));
                }
                queries += 1;
            }
        }
    }
    let p = CodeParams::new(12, 2, 3, 0).unwrap();
    let cost: ProtocolCost = protocol_cost_experiment(&p, 10_000, 77).unwrap();
    let ok = cost.wrong_answers == 0 && cost.mean_pow2z <= 2.0 * cost.bound + 2.0 && cost.mean_len <= cost.bound;
    outcome(
        ok,
        format!(
            "{queries} exhaustive queries correct; E[2^z]={:.3} <= {:.1}, E[len]={:.3} <= {:.1}",
            cost.mean_pow2z, cost.pow2z_bound, cost.mean_len, cost.bound
        ),
    )
}

fn criterion_8() -> Outcome {
    // determinism across independent codebooks
    let p = CodeParams::new(40, 3, 2, 123).unwrap();
    let mut same = true;
    for t in 0..200u64 {
        let x = sldc::bench::trial_source(&p, 5, t).unwrap();
        let a = serialize_codeword(&p, &Codebook::new(p).encode(&x).unwrap());
        let b = serialize_codeword(&p, &Codebook::new(p).encode(&x).unwrap());
        same &= a == b;
    }
    // round trip on random codewords
    let mut stream = KeyStream::new(&SampleKey::trial(0xC0DE, 0));
    let mut lossless = true;
    for _ in 0..10_000 {
        let len = stream.uniform_1_to(200);
        let ones: Vec<u64> = (1..=len).filter(|_| stream.next_u64() & 1 == 1).collect();
        let c = Codeword::new(len, ones).unwrap();
        let (_, back) = parse_codeword(&serialize_codeword(&p, &c)).unwrap();
        lossless &= back == c;
    }
    // fixture payload
    let fp = CodeParams::new(12, 2, 3, 0).unwrap();
    let plan = LevelPlan::from_parts(10, 3, [(2, vec![2, 3, 4]), (3, vec![2, 4, 5]), (5, vec![3, 4, 5]), (6, vec![6, 7, 8])]).unwrap();
    let cb = Codebook::new(fp).with_override(plan).unwrap();
    let c = cb.encode_at_level(&SparseSeq::new(12, vec![2, 6]).unwrap(), 10).unwrap().unwrap();
    let bytes = serialize_codeword(&fp, &c);
    let payload_ok = bytes[38..] == [0xEE, 0x00];
    outcome(same && lossless && payload_ok, format!("deterministic={same} lossless={lossless} fixture payload {:02X?}", &bytes[38..]))
}

fn criterion_9() -> Outcome {
    let mut ok = true;
    let mut checked = 0;
    for &(n, r, d) in GRID.iter().chain(&[(100, 2, 2), (1000, 3, 1), (64, 1, 5)]) {
        let mut prev_a = f64::INFINITY;
        let mut prev_m = u64::MAX;
        for step in 0..10 {
            let eps = step as f64 / 10.0;
            let a = lower_bound_adaptive::<f64>(n, r, d, eps).unwrap();
            let m = lym_lower_bound::<f64>(n, r, d, eps).unwrap().m;
            ok &= a <= prev_a && m <= prev_m;
            prev_a = a;
            prev_m = m;
            checked += 1;
        }
    }
    outcome(ok, format!("{checked} (instance, eps) points"))
}

fn main() {
    let criteria: [(&str, Duration, fn() -> Outcome); 9] = [
        ("1 zero-error exhaustive sweep", Duration::from_secs(60), criterion_1),
        ("2 non-adaptivity", Duration::from_secs(60), criterion_2),
        ("3 bound sandwich", Duration::from_secs(120), criterion_3),
        ("4 scaling exponent", Duration::from_secs(300), criterion_4),
        ("5 codeword-count inequality", Duration::from_secs(5), criterion_5),
        ("6 large-d limit", Duration::from_secs(5), criterion_6),
        ("7 speed-limit protocol", Duration::from_secs(120), criterion_7),
        ("8 determinism and format", Duration::from_secs(60), criterion_8),
        ("9 block-error monotonicity", Duration::from_secs(5), criterion_9),
    ];
    let mut failed = 0;
    let mut seen = HashSet::new();
    for (name, budget, run) in criteria {
        assert!(seen.insert(name));
        let start = Instant::now();
        let out = run();
        let elapsed = start.elapsed();
        let ok = out.ok && elapsed <= budget;
        if !ok {
            failed += 1;
        }
        println!(
            "[{}] criterion {name} ({:.2}s, budget {}s): {}",
            if ok { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            budget.as_secs(),
            out.detail
        );
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
