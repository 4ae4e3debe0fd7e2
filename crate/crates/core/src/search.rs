//! Exhaustive deciders for the line and translate problems.
//!
//! A potentially bad pair is (beta, gamma) with beta nonzero and gamma
//! generating the extension; it is good if some a in F_q makes
//! beta(gamma + a) primitive. q is a member iff every pair is good. The
//! deciders here run over reduced class families (additive translation of
//! gamma, multiplicative F_q* scaling), so each class stands for q(q-1)
//! unreduced pairs; a brute-force oracle over the full space is kept for
//! cross-checking on tiny fields.
//!
//! The outer loop of every decider is an index range, which is what gets
//! parallelized and checkpointed: blocks of `stride * workers` outer indices
//! are split across scoped threads, a collector merges per-index results in
//! canonical order, and a JSON checkpoint is written after each clean block.
//! Verdicts (status, witness, stats) are invariant under worker count.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::arith;
use crate::error::{Error, Result};
use crate::field::{Elt, FieldCtx, DEFAULT_TABLE_BUDGET};

/// Largest field order brute_force_line will touch by default.
pub const DEFAULT_BRUTE_CAP: u64 = 1_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Problem {
    Line,
    Translate,
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Problem::Line => write!(f, "line"),
            Problem::Translate => write!(f, "translate"),
        }
    }
}

impl std::str::FromStr for Problem {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Problem, String> {
        match s {
            "line" => Ok(Problem::Line),
            "translate" => Ok(Problem::Translate),
            other => Err(format!("unknown problem {other:?} (expected line or translate)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Member,
    NonMember,
}

/// One bad pair, with every failing value of a recorded (all of F_q).
/// Translate verdicts use beta = 1 so that re-verification is uniform:
/// beta(gamma + a) is non-primitive for every a.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub beta: Elt,
    pub gamma: Elt,
    pub failing_a: Vec<Elt>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stats {
    pub classes_checked: u64,
    pub primitivity_tests: u64,
}

impl std::ops::AddAssign for Stats {
    fn add_assign(&mut self, rhs: Stats) {
        self.classes_checked += rhs.classes_checked;
        self.primitivity_tests += rhs.primitivity_tests;
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub q: u64,
    pub n: u32,
    pub problem: Problem,
    pub status: Status,
    pub witness: Option<Witness>,
    pub stats: Stats,
    pub elapsed_ms: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    /// Cubic line check over (beta = omega^k, gamma) classes.
    CubicAlg1,
    /// Cubic line check over (beta', gamma^-1) classes, skipping primitive
    /// beta'.
    CubicAlg2,
    /// Quartic analogue of CubicAlg2.
    QuarticAlg4,
    /// Translate check over generating coset representatives.
    Translate,
}

impl Algorithm {
    pub fn problem(self) -> Problem {
        match self {
            Algorithm::Translate => Problem::Translate,
            _ => Problem::Line,
        }
    }
}

/// On-disk resume state, written after every clean block.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Checkpoint {
    pub q: u64,
    pub n: u32,
    pub problem: Problem,
    pub algorithm: Algorithm,
    /// First unprocessed outer index.
    pub next_k: u64,
    pub stats: Stats,
    /// Hash binding the checkpoint to the exact field and algorithm.
    pub fixture_sha: String,
}

pub fn fixture_sha(ctx: &FieldCtx, algorithm: Algorithm) -> String {
    let mut h = Sha256::new();
    h.update(format!(
        "p={} alpha={} n={} modulus={:?} algorithm={algorithm:?}",
        ctx.p, ctx.alpha, ctx.n, ctx.modulus
    ));
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    pub workers: usize,
    /// Outer indices per worker per block.
    pub stride: u64,
    pub skip_primitive_beta: bool,
    pub block_limit: Option<u64>,
}

impl Default for RunOptions {
    fn default() -> RunOptions {
        RunOptions {
            workers: 1,
            stride: 1 << 12,
            skip_primitive_beta: true,
            block_limit: None,
        }
    }
}

/// One reduced-gamma family of Algorithms 2 and 4: the logs of 1 + a
/// gamma^-1 for a in F_q*, precomputed once per run.
struct InverseFamily {
    gamma: Elt,
    gamma_inv: Elt,
    /// log of 1 + a gamma^-1, ascending a (these are never zero: gamma^-1
    /// is outside F_q).
    shift_logs: Vec<u64>,
}

enum Plan {
    /// Outer index = gamma; inner loop over beta = omega^k, k < tau.
    Direct { gammas: Vec<Elt> },
    /// Outer index = log of beta'; inner loop over families and a.
    Inverse { families: Vec<InverseFamily> },
    /// Outer index = one generating coset representative.
    Translate { betas: Vec<Elt>, fq_logs: Vec<u64> },
}

fn inverse_family(ctx: &FieldCtx, gamma_inv: Elt) -> Result<InverseFamily> {
    let one = Elt::Log(0);
    let mut shift_logs = Vec::with_capacity(ctx.q as usize - 1);
    for &a in &ctx.fq_elements() {
        if a.is_zero() {
            continue;
        }
        match ctx.add(one, ctx.mul(a, gamma_inv)) {
            Elt::Zero => unreachable!("1 + a/gamma = 0 forces gamma into F_q"),
            Elt::Log(s) => shift_logs.push(s),
        }
    }
    Ok(InverseFamily {
        gamma: ctx.inv(gamma_inv)?,
        gamma_inv,
        shift_logs,
    })
}

fn build_plan(ctx: &FieldCtx, algorithm: Algorithm) -> Result<Plan> {
    let omega = Elt::Log(1);
    match algorithm {
        Algorithm::CubicAlg1 => {
            assert_eq!(ctx.n, 3);
            // omega^{1+k tau}, omega^{2+k tau} interleaved, then
            // omega^{2+k2 tau} + omega^{1+k1 tau}
            let mut gammas = Vec::new();
            for k in 0..ctx.q - 1 {
                gammas.push(ctx.omega_pow(1 + k * ctx.tau));
                gammas.push(ctx.omega_pow(2 + k * ctx.tau));
            }
            for k1 in 0..ctx.q - 1 {
                for k2 in 0..ctx.q - 1 {
                    gammas.push(ctx.add(
                        ctx.omega_pow(2 + k2 * ctx.tau),
                        ctx.omega_pow(1 + k1 * ctx.tau),
                    ));
                }
            }
            Ok(Plan::Direct { gammas })
        }
        Algorithm::CubicAlg2 => {
            assert_eq!(ctx.n, 3);
            // gamma^-1 in {1/omega} then {omega + u : u in F_q}; every
            // represented gamma is outside F_q, hence generates
            let mut families = vec![inverse_family(ctx, ctx.inv(omega)?)?];
            for &u in &ctx.fq_elements() {
                families.push(inverse_family(ctx, ctx.add(omega, u))?);
            }
            Ok(Plan::Inverse { families })
        }
        Algorithm::QuarticAlg4 => {
            assert_eq!(ctx.n, 4);
            // monic reps omega, omega^2 + u omega, omega^3 + t omega^2 +
            // u omega; drop those inside F_{q^2} (generation is a class
            // property, so nothing is lost)
            let omega2 = Elt::Log(2);
            let omega3 = Elt::Log(3);
            let fq = ctx.fq_elements();
            let mut candidates = vec![omega];
            for &u in &fq {
                candidates.push(ctx.add(omega2, ctx.mul(u, omega)));
            }
            for &t in &fq {
                for &u in &fq {
                    candidates.push(ctx.add(
                        omega3,
                        ctx.add(ctx.mul(t, omega2), ctx.mul(u, omega)),
                    ));
                }
            }
            let mut families = Vec::new();
            for gamma in candidates {
                if ctx.generates(gamma) {
                    families.push(inverse_family(ctx, ctx.inv(gamma)?)?);
                }
            }
            Ok(Plan::Inverse { families })
        }
        Algorithm::Translate => {
            assert!(ctx.n == 3 || ctx.n == 4);
            let betas = ctx
                .coset_reps()
                .into_iter()
                .filter(|&b| ctx.generates(b))
                .collect();
            let fq_logs = ctx
                .fq_elements()
                .iter()
                .map(|&a| ctx.packed(a))
                .collect();
            Ok(Plan::Translate {
                betas,
                fq_logs,
            })
        }
    }
}

impl Plan {
    fn outer_count(&self, ctx: &FieldCtx) -> u64 {
        match self {
            Plan::Direct { gammas } => gammas.len() as u64,
            Plan::Inverse { .. } => ctx.radical,
            Plan::Translate { betas, .. } => betas.len() as u64,
        }
    }
}

#[derive(Debug, Clone, Default)]
struct OuterOut {
    witness: Option<Witness>,
    stats: Stats,
}

fn all_fq(ctx: &FieldCtx) -> Vec<Elt> {
    ctx.fq_elements()
}

fn check_outer(ctx: &FieldCtx, plan: &Plan, k: u64, skip_primitive: bool) -> OuterOut {
    let group = ctx.order - 1;
    let mut out = OuterOut::default();
    match plan {
        Plan::Direct { gammas } => {
            let gamma = gammas[k as usize];
            // log of gamma + a for each a; gamma is outside F_q so the sum
            // is never zero
            let shifted: Vec<u64> = ctx
                .fq_elements()
                .iter()
                .map(|&a| match ctx.add(gamma, a) {
                    Elt::Zero => unreachable!(),
                    Elt::Log(s) => s,
                })
                .collect();
            for b in 0..ctx.tau {
                out.stats.classes_checked += 1;
                let mut good = false;
                for &s in &shifted {
                    out.stats.primitivity_tests += 1;
                    let mut idx = b + s;
                    if idx >= group {
                        idx -= group;
                    }
                    if ctx.is_primitive_idx(idx) {
                        good = true;
                        break;
                    }
                }
                if !good {
                    out.witness = Some(Witness {
                        beta: Elt::Log(b),
                        gamma,
                        failing_a: all_fq(ctx),
                    });
                    return out;
                }
            }
        }
        Plan::Inverse { families } => {
            out.stats.primitivity_tests += 1;
            if skip_primitive && ctx.is_primitive_idx(k) {
                return out;
            }
            for fam in families {
                out.stats.classes_checked += 1;
                // a = 0 yields beta' itself; with the skip in force it is
                // known non-primitive, otherwise test it explicitly
                let mut good = !skip_primitive && {
                    out.stats.primitivity_tests += 1;
                    ctx.is_primitive_idx(k)
                };
                if !good {
                    for &s in &fam.shift_logs {
                        out.stats.primitivity_tests += 1;
                        let mut idx = k + s;
                        if idx >= group {
                            idx -= group;
                        }
                        if ctx.is_primitive_idx(idx) {
                            good = true;
                            break;
                        }
                    }
                }
                if !good {
                    // the class (beta' = omega^k, gamma) reduces to the
                    // original bad pair (beta' gamma^-1, gamma)
                    out.witness = Some(Witness {
                        beta: ctx.mul(Elt::Log(k), fam.gamma_inv),
                        gamma: fam.gamma,
                        failing_a: all_fq(ctx),
                    });
                    return out;
                }
            }
        }
        Plan::Translate { betas, fq_logs } => {
            let beta = betas[k as usize];
            out.stats.classes_checked += 1;
            let packed = ctx.packed(beta);
            let mut good = false;
            for &a in fq_logs {
                out.stats.primitivity_tests += 1;
                let sum = ctx.elt_from_packed(ctx.add_packed(packed, a));
                if ctx.is_primitive(sum) {
                    good = true;
                    break;
                }
            }
            if !good {
                out.witness = Some(Witness {
                    beta: Elt::Log(0),
                    gamma: beta,
                    failing_a: all_fq(ctx),
                });
                return out;
            }
        }
    }
    out
}

fn load_checkpoint(
    path: &Path,
    ctx: &FieldCtx,
    algorithm: Algorithm,
) -> Result<Option<Checkpoint>> {
    if !path.exists() {
        return Ok(None);
    }
    let cp: Checkpoint = serde_json::from_str(&fs::read_to_string(path)?)?;
    let expect = fixture_sha(ctx, algorithm);
    if cp.q != ctx.q || cp.n != ctx.n || cp.algorithm != algorithm || cp.fixture_sha != expect {
        return Err(Error::CheckpointMismatch {
            reason: format!(
                "checkpoint {} is for q={} n={} algorithm={:?} sha={}, expected q={} n={} \
                 algorithm={algorithm:?} sha={expect}",
                path.display(),
                cp.q,
                cp.n,
                cp.algorithm,
                cp.fixture_sha,
                ctx.q,
                ctx.n
            ),
        });
    }
    Ok(Some(cp))
}

fn store_checkpoint(path: &Path, cp: &Checkpoint) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, serde_json::to_string_pretty(cp)?)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Run one decider with block-parallel scheduling and optional
/// checkpointing. Returns None when `block_limit` suspended the run before a
/// verdict was reached (state is in the checkpoint file).
pub fn run_algorithm(
    ctx: &FieldCtx,
    algorithm: Algorithm,
    opts: &RunOptions,
    checkpoint: Option<&Path>,
) -> Result<Option<Verdict>> {
    assert!(opts.workers >= 1 && opts.stride >= 1);
    let start = Instant::now();
    let plan = build_plan(ctx, algorithm)?;
    let total = plan.outer_count(ctx);

    let (mut next_k, mut stats) = match checkpoint {
        Some(path) => match load_checkpoint(path, ctx, algorithm)? {
            Some(cp) => (cp.next_k, cp.stats),
            None => (0, Stats::default()),
        },
        None => (0, Stats::default()),
    };

    let mut blocks_done = 0u64;
    let mut verdict_witness: Option<Witness> = None;
    while next_k < total && verdict_witness.is_none() {
        if let Some(limit) = opts.block_limit {
            if blocks_done >= limit {
                return Ok(None);
            }
        }
        let block_end = (next_k + opts.stride * opts.workers as u64).min(total);
        let chunks: Vec<(u64, u64)> = (0..opts.workers as u64)
            .map(|w| {
                let lo = (next_k + w * opts.stride).min(block_end);
                let hi = (lo + opts.stride).min(block_end);
                (lo, hi)
            })
            .collect();
        let results: Vec<Vec<OuterOut>> = std::thread::scope(|scope| {
            let handles: Vec<_> = chunks
                .iter()
                .map(|&(lo, hi)| {
                    let plan = &plan;
                    scope.spawn(move || {
                        (lo..hi)
                            .map(|k| check_outer(ctx, plan, k, opts.skip_primitive_beta))
                            .collect::<Vec<_>>()
                    })
                })
                .collect();
            handles.into_iter().map(|h| h.join().unwrap()).collect()
        });
        // merge in canonical outer order; on a bad class, count only the
        // work up to and including it so stats are worker-count invariant
        let per_k: Vec<OuterOut> = results.into_iter().flatten().collect();
        for out in per_k {
            stats += out.stats;
            if out.witness.is_some() {
                verdict_witness = out.witness;
                break;
            }
        }
        next_k = block_end;
        blocks_done += 1;
        if verdict_witness.is_none() && next_k < total {
            if let Some(path) = checkpoint {
                store_checkpoint(
                    path,
                    &Checkpoint {
                        q: ctx.q,
                        n: ctx.n,
                        problem: algorithm.problem(),
                        algorithm,
                        next_k,
                        stats,
                        fixture_sha: fixture_sha(ctx, algorithm),
                    },
                )?;
            }
        }
    }
    if let Some(path) = checkpoint {
        if path.exists() {
            fs::remove_file(path)?;
        }
    }
    let status = if verdict_witness.is_some() {
        Status::NonMember
    } else {
        Status::Member
    };
    Ok(Some(Verdict {
        q: ctx.q,
        n: ctx.n,
        problem: algorithm.problem(),
        status,
        witness: verdict_witness,
        stats,
        elapsed_ms: start.elapsed().as_millis() as u64,
    }))
}

fn run_to_verdict(ctx: &FieldCtx, algorithm: Algorithm) -> Verdict {
    run_algorithm(ctx, algorithm, &RunOptions::default(), None)
        .expect("no checkpoint involved")
        .expect("no block limit involved")
}

/// Cubic line decider over (beta = omega^k, gamma) classes.
pub fn check_line_alg1(ctx: &FieldCtx) -> Verdict {
    run_to_verdict(ctx, Algorithm::CubicAlg1)
}

/// Cubic line decider over (beta', gamma^-1) classes with the primitive-
/// beta' skip.
pub fn check_line_alg2(ctx: &FieldCtx) -> Verdict {
    run_to_verdict(ctx, Algorithm::CubicAlg2)
}

/// check_line_alg2 without skipping primitive beta' (the a = 0 test is run
/// explicitly instead); the verdict must be identical.
pub fn check_line_alg2_no_skip(ctx: &FieldCtx) -> Verdict {
    let opts = RunOptions {
        skip_primitive_beta: false,
        ..RunOptions::default()
    };
    run_algorithm(ctx, Algorithm::CubicAlg2, &opts, None)
        .unwrap()
        .unwrap()
}

/// Quartic line decider over (beta', gamma^-1) classes.
pub fn check_line_quartic(ctx: &FieldCtx) -> Verdict {
    run_to_verdict(ctx, Algorithm::QuarticAlg4)
}

/// Translate decider: every generating coset representative beta must have
/// some a in F_q with beta + a primitive.
pub fn check_translate(ctx: &FieldCtx) -> Verdict {
    run_to_verdict(ctx, Algorithm::Translate)
}

/// Unreduced oracle over every (beta, gamma) with beta nonzero and gamma
/// generating; tiny fields only.
pub fn brute_force_line(ctx: &FieldCtx, cap: u64) -> Result<Verdict> {
    if ctx.order > cap {
        return Err(Error::ExhaustiveCapExceeded {
            order: ctx.order,
            cap,
        });
    }
    let start = Instant::now();
    let group = ctx.order - 1;
    let fq = ctx.fq_elements();
    let mut stats = Stats::default();
    let mut witness = None;
    'outer: for b in 0..group {
        let beta = Elt::Log(b);
        for g in 0..group {
            let gamma = Elt::Log(g);
            if !ctx.generates(gamma) {
                continue;
            }
            stats.classes_checked += 1;
            let mut good = false;
            for &a in &fq {
                stats.primitivity_tests += 1;
                if ctx.is_primitive(ctx.mul(beta, ctx.add(gamma, a))) {
                    good = true;
                    break;
                }
            }
            if !good {
                witness = Some(Witness {
                    beta,
                    gamma,
                    failing_a: fq.clone(),
                });
                break 'outer;
            }
        }
    }
    let status = if witness.is_some() {
        Status::NonMember
    } else {
        Status::Member
    };
    Ok(Verdict {
        q: ctx.q,
        n: ctx.n,
        problem: Problem::Line,
        status,
        witness,
        stats,
        elapsed_ms: start.elapsed().as_millis() as u64,
    })
}

/// The first bad class in canonical order, if any.
pub fn find_bad_pair(ctx: &FieldCtx, problem: Problem) -> Option<Witness> {
    let verdict = match (problem, ctx.n) {
        (Problem::Line, 3) => check_line_alg2(ctx),
        (Problem::Line, 4) => check_line_quartic(ctx),
        (Problem::Translate, _) => check_translate(ctx),
        _ => panic!("line problem deciders cover n in {{3, 4}} only"),
    };
    verdict.witness
}

/// Independent re-check of a claimed bad pair: beta nonzero, gamma
/// generating, and beta(gamma + a) non-primitive for every a in F_q.
pub fn verify_witness(ctx: &FieldCtx, w: &Witness) -> bool {
    if w.beta.is_zero() || !ctx.generates(w.gamma) {
        return false;
    }
    if w.failing_a != ctx.fq_elements() {
        return false;
    }
    w.failing_a
        .iter()
        .all(|&a| !ctx.is_primitive(ctx.mul(w.beta, ctx.add(w.gamma, a))))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Target {
    pub q: u64,
    pub n: u32,
    pub problem: Problem,
}

#[derive(Debug, Clone)]
pub struct CampaignConfig {
    pub targets: Vec<Target>,
    pub workers: usize,
    pub stride: u64,
    pub checkpoint_dir: Option<PathBuf>,
    pub mem_budget: u64,
}

impl Default for CampaignConfig {
    fn default() -> CampaignConfig {
        CampaignConfig {
            targets: Vec::new(),
            workers: 1,
            stride: RunOptions::default().stride,
            checkpoint_dir: None,
            mem_budget: DEFAULT_TABLE_BUDGET,
        }
    }
}

pub fn campaign_algorithm(target: &Target) -> Algorithm {
    match (target.problem, target.n) {
        (Problem::Line, 3) => Algorithm::CubicAlg2,
        (Problem::Line, 4) => Algorithm::QuarticAlg4,
        (Problem::Translate, _) => Algorithm::Translate,
        _ => panic!("unsupported target degree {}", target.n),
    }
}

/// Run one campaign target to completion (building the field, resuming from
/// its checkpoint when one exists).
pub fn run_target(target: &Target, cfg: &CampaignConfig) -> Result<Verdict> {
    let (p, alpha) = arith::split_prime_power(target.q).ok_or(Error::NotAPrimePower(target.q))?;
    let ctx = FieldCtx::build_with_budget(p, alpha, target.n, cfg.mem_budget)?;
    let algorithm = campaign_algorithm(target);
    let path = cfg
        .checkpoint_dir
        .as_ref()
        .map(|d| d.join(format!("{}_{}_{}.json", target.q, target.n, target.problem)));
    let opts = RunOptions {
        workers: cfg.workers,
        stride: cfg.stride,
        ..RunOptions::default()
    };
    let verdict = run_algorithm(&ctx, algorithm, &opts, path.as_deref())?
        .expect("no block limit on campaign runs");
    Ok(verdict)
}

/// Run every target, yielding one result per target in order.
pub fn run_campaign(cfg: &CampaignConfig) -> Vec<(Target, Result<Verdict>)> {
    cfg.targets
        .iter()
        .map(|t| (*t, run_target(t, cfg)))
        .collect()
}
