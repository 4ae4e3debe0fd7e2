//! Acceptance suite: one test per criterion, each printing a single
//! pass/fail line (visible with --nocapture; a FAIL also fails the test).

use std::collections::BTreeSet;

use primel_core::arith;
use primel_core::charsum;
use primel_core::field::{Elt, FieldCtx};
use primel_core::fixtures;
use primel_core::search::{
    self, Algorithm, Problem, RunOptions, Status, Verdict,
};
use primel_core::sieve;

fn report(criterion: u32, name: &str, pass: bool) {
    println!(
        "criterion {criterion:2} ({name}): {}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {criterion} ({name}) failed");
}

fn cubic(q: u64) -> FieldCtx {
    let (p, alpha) = arith::split_prime_power(q).unwrap();
    FieldCtx::build(p, alpha, 3).unwrap()
}

fn quartic(q: u64) -> FieldCtx {
    let (p, alpha) = arith::split_prime_power(q).unwrap();
    FieldCtx::build(p, alpha, 4).unwrap()
}

fn parallel() -> RunOptions {
    RunOptions {
        workers: std::thread::available_parallelism().map_or(4, |n| n.get()),
        ..RunOptions::default()
    }
}

fn decide_line_cubic(q: u64) -> Verdict {
    let ctx = cubic(q);
    search::run_algorithm(&ctx, Algorithm::CubicAlg2, &parallel(), None)
        .unwrap()
        .unwrap()
}

#[test]
fn criterion_01_cubic_genuine_exceptions() {
    let mut pass = true;
    for &q in &fixtures::CUBIC_EXCEPTIONS {
        let ctx = cubic(q);
        let v = search::check_line_alg2(&ctx);
        let ok = v.status == Status::NonMember
            && v.witness
                .as_ref()
                .is_some_and(|w| search::verify_witness(&ctx, w));
        if !ok {
            eprintln!("q={q}: expected a re-verified NonMember, got {v:?}");
            pass = false;
        }
    }
    report(1, "cubic genuine exceptions", pass);
}

#[test]
fn criterion_02_cubic_memberships() {
    let exceptions: BTreeSet<u64> = fixtures::CUBIC_EXCEPTIONS.iter().copied().collect();
    let mut targets: Vec<u64> = arith::prime_powers_between(2, 100)
        .into_iter()
        .map(|(_, _, q)| q)
        .filter(|q| !exceptions.contains(q))
        .collect();
    targets.extend(
        fixtures::CUBIC_146
            .values()
            .unwrap()
            .into_iter()
            .filter(|&q| q > 100)
            .take(10),
    );
    let mut pass = true;
    for q in targets {
        let v = decide_line_cubic(q);
        if v.status != Status::Member {
            eprintln!("q={q}: expected Member, got {:?}", v.status);
            pass = false;
        }
    }
    report(2, "cubic memberships", pass);
}

#[test]
fn criterion_03_sieve_reproduction() {
    let part = |q: u64, t: u32, r: u32| -> sieve::SievePartition {
        let factors = arith::factorize((q as u128).pow(3) - 1).unwrap();
        let primes: Vec<u64> = factors.primes().map(|p| p as u64).collect();
        let total = primes.len() as u32;
        sieve::SievePartition {
            q,
            n: 3,
            k_primes: primes[..t as usize].to_vec(),
            sieving: primes[t as usize..(total - r) as usize].to_vec(),
            special: primes[(total - r) as usize..].to_vec(),
        }
    };
    let mut pass = sieve::lemma1_criterion(&part(809, 1, 0))
        && sieve::lemma1_criterion(&part(1951, 2, 2))
        && sieve::lemma1_criterion(&part(5791, 2, 2));
    let f4096 = arith::factorize(4096u128.pow(3) - 1).unwrap();
    pass &= sieve::best_partition(4096, 3, &f4096, 1, 6).is_some_and(|p| p.t() == 1);
    let input = fixtures::CUBIC_146.values().unwrap();
    let want = fixtures::CUBIC_82.values().unwrap();
    let out = sieve::cubic_pipeline(&input).unwrap();
    pass &= out.survivors == want && *want.iter().next_back().unwrap() == 4951;
    report(3, "sieve reproduction", pass);
}

#[test]
fn criterion_04_quartic_e4_reproduction() {
    let want = fixtures::QUARTIC_E4.values().unwrap();
    let out = sieve::quartic_pipeline(14, 4, 4).unwrap();
    let mut pass = out.survivors == want;
    pass &= want.len() == 1514 && *want.iter().next_back().unwrap() == 102_829;
    let above_200 = want.iter().filter(|&&q| q > 200).count();
    pass &= above_200 - 6 == 1448;
    pass &= want.iter().filter(|&&q| q > 23_000).count() == 124;
    report(4, "quartic E_4 reproduction", pass);
}

#[test]
fn criterion_05_quartic_exceptions() {
    let mut pass = true;
    for q in [2u64, 3, 4, 5, 7, 8, 9, 11, 13] {
        let ctx = quartic(q);
        let v = search::run_algorithm(&ctx, Algorithm::QuarticAlg4, &parallel(), None)
            .unwrap()
            .unwrap();
        let ok = v.status == Status::NonMember
            && v.witness
                .as_ref()
                .is_some_and(|w| search::verify_witness(&ctx, w));
        if !ok {
            eprintln!("line q={q}: expected NonMember");
            pass = false;
        }
    }
    for (q, expect) in [
        (3u64, Status::NonMember),
        (5, Status::NonMember),
        (7, Status::NonMember),
        (11, Status::NonMember),
        (13, Status::NonMember),
        (2, Status::Member),
        (4, Status::Member),
        (8, Status::Member),
        (9, Status::Member),
        (27, Status::Member),
        (37, Status::Member),
        (47, Status::Member),
        (73, Status::Member),
    ] {
        let ctx = quartic(q);
        let v = search::run_algorithm(&ctx, Algorithm::Translate, &parallel(), None)
            .unwrap()
            .unwrap();
        if v.status != expect {
            eprintln!("translate q={q}: expected {expect:?}, got {:?}", v.status);
            pass = false;
        }
    }
    report(5, "quartic exceptions", pass);
}

#[test]
fn criterion_06_character_bounds() {
    let mut pass = true;
    for q in [3u64, 4, 5, 7, 8, 9] {
        let ctx = cubic(q);
        let katz = charsum::verify_katz(&ctx).unwrap();
        let refined = charsum::verify_cubic_bound(&ctx).unwrap();
        if !(katz.pass && refined.pass) {
            eprintln!("q={q} n=3: katz={katz:?} refined={refined:?}");
            pass = false;
        }
    }
    for q in [2u64, 3] {
        let ctx = quartic(q);
        let katz = charsum::verify_katz(&ctx).unwrap();
        if !katz.pass {
            eprintln!("q={q} n=4: {katz:?}");
            pass = false;
        }
    }
    report(6, "character bounds", pass);
}

#[test]
fn criterion_07_tu_structure() {
    let mut pass = true;
    for q in [3u64, 4, 5, 7] {
        let ctx = cubic(q);
        let gamma = ctx
            .coset_reps()
            .into_iter()
            .find(|&g| ctx.generates(g))
            .unwrap();
        let d = charsum::tu_decomposition(&ctx, gamma).unwrap();
        let ok = d.t_distinct == (q - 1) * (q * q - q + 1)
            && d.u_size == 2 * q * (q - 1)
            && d.u1_size == q * (q - 1)
            && d.u1_uinv_disjoint
            && d.union_is_u
            && d.offdiag_distinct == (q - 1) * (q - 1) * q
            && d.offdiag_in_fq == 0;
        if !ok {
            eprintln!("q={q}: {d:?}");
            pass = false;
        }
    }
    report(7, "T/U structure", pass);
}

#[test]
fn criterion_08_reduction_oracle_equivalence() {
    let mut pass = true;
    for q in [3u64, 4, 5] {
        let ctx = cubic(q);
        let brute = search::brute_force_line(&ctx, search::DEFAULT_BRUTE_CAP).unwrap();
        let a1 = search::check_line_alg1(&ctx);
        let a2 = search::check_line_alg2(&ctx);
        if !(brute.status == a1.status && a1.status == a2.status) {
            eprintln!("q={q}: statuses diverge");
            pass = false;
        }
        // a brute-force bad pair must stay bad after both reductions
        if let Some(w) = &brute.witness {
            let pair_bad = |beta: Elt, gamma: Elt| {
                ctx.fq_elements()
                    .iter()
                    .all(|&a| !ctx.is_primitive(ctx.mul(beta, ctx.add(gamma, a))))
            };
            // shift gamma into its zero-constant coset representative
            let reps: BTreeSet<u64> = ctx.coset_reps_packed().into_iter().collect();
            let shifted = ctx
                .fq_elements()
                .into_iter()
                .map(|c| ctx.add(w.gamma, ctx.neg(c)))
                .find(|&s| reps.contains(&ctx.packed(s)))
                .unwrap();
            let mut ok = pair_bad(w.beta, shifted);
            for &lam in &ctx.fq_elements() {
                if !lam.is_zero() {
                    ok &= pair_bad(ctx.mul(lam, w.beta), ctx.mul(ctx.inv(lam).unwrap(), shifted));
                }
            }
            if !ok {
                eprintln!("q={q}: reduced pair is not bad");
                pass = false;
            }
        }
    }
    report(8, "reduction/oracle equivalence", pass);
}

#[test]
fn criterion_09_sieve_inequality_oracle() {
    let mut pass = true;
    for q in [5u64, 7] {
        let ctx = cubic(q);
        let primes: Vec<u64> = ctx.factors.primes().map(|p| p as u64).collect();
        let total = primes.len() as u32;
        let mut partitions = Vec::new();
        for t in 1..=total {
            for r in 0..=total - t {
                partitions.push(sieve::SievePartition {
                    q,
                    n: 3,
                    k_primes: primes[..t as usize].to_vec(),
                    sieving: primes[t as usize..(total - r) as usize].to_vec(),
                    special: primes[(total - r) as usize..].to_vec(),
                });
            }
        }
        let gammas: Vec<Elt> = ctx
            .coset_reps()
            .into_iter()
            .filter(|&g| ctx.generates(g))
            .collect();
        let mut pairs = Vec::new();
        let mut k = 1u64;
        while pairs.len() < 20 {
            pairs.push((Elt::Log(k * 13 % (ctx.order - 1)), gammas[pairs.len() % gammas.len()]));
            k += 3;
        }
        for (beta, gamma) in pairs {
            for part in &partitions {
                let rep = charsum::verify_sieve_inequalities(&ctx, beta, gamma, part).unwrap();
                if !rep.pass {
                    eprintln!("q={q} beta={beta:?} gamma={gamma:?}: {rep:?}");
                    pass = false;
                }
            }
        }
    }
    report(9, "sieve inequality oracle", pass);
}

#[test]
fn criterion_10_determinism() {
    let mut pass = true;
    // worker-count invariance over the full set of cubic exceptions
    let mut baseline: Option<Vec<Verdict>> = None;
    for workers in [1usize, 4, 8] {
        let mut verdicts: Vec<Verdict> = fixtures::CUBIC_EXCEPTIONS
            .iter()
            .map(|&q| {
                let ctx = cubic(q);
                let opts = RunOptions {
                    workers,
                    stride: 64,
                    ..RunOptions::default()
                };
                let mut v = search::run_algorithm(&ctx, Algorithm::CubicAlg2, &opts, None)
                    .unwrap()
                    .unwrap();
                v.elapsed_ms = 0; // wall time is the one nondeterministic field
                v
            })
            .collect();
        verdicts.sort_by_key(|v| (v.q, v.n));
        let bytes = serde_json::to_string(&verdicts).unwrap();
        match &baseline {
            None => baseline = Some(verdicts),
            Some(b) => {
                if serde_json::to_string(b).unwrap() != bytes {
                    eprintln!("workers={workers}: verdicts differ from single-worker run");
                    pass = false;
                }
            }
        }
    }
    // kill-and-resume on q=103
    let ctx = cubic(103);
    let mut full = search::run_algorithm(&ctx, Algorithm::CubicAlg2, &parallel(), None)
        .unwrap()
        .unwrap();
    let dir = std::env::temp_dir().join("primel-acceptance-ckpt");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("103_3_line.json");
    let _ = std::fs::remove_file(&path);
    let opts = RunOptions {
        block_limit: Some(2),
        ..parallel()
    };
    let mut resumed = None;
    for _ in 0..10_000 {
        match search::run_algorithm(&ctx, Algorithm::CubicAlg2, &opts, Some(&path)).unwrap() {
            Some(v) => {
                resumed = Some(v);
                break;
            }
            None => assert!(path.exists(), "suspension must leave a checkpoint"),
        }
    }
    let mut resumed = resumed.expect("resume loop did not finish");
    full.elapsed_ms = 0;
    resumed.elapsed_ms = 0;
    if full != resumed {
        eprintln!("resumed verdict differs from uninterrupted verdict");
        pass = false;
    }
    assert_eq!(full.q, 103);
    assert_eq!(full.problem, Problem::Line);
    report(10, "determinism", pass);
}
