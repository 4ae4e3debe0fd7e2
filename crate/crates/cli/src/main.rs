//! Command-line surface: sieve pipelines with fixture diffs, line/translate
//! verification with JSON verdict streams, character-bound checks, and CSV
//! summaries of verdict files.
//!
//! Exit codes: 0 success, 1 determination/diff/bound failure, 2 usage error.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use primel_core::arith;
use primel_core::charsum;
use primel_core::field::{Elt, FieldCtx, DEFAULT_TABLE_BUDGET};
use primel_core::fixtures;
use primel_core::search::{self, CampaignConfig, Problem, Target};
use primel_core::sieve;

#[derive(Parser)]
#[command(name = "primel", version, about, max_term_width = 100)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the sieve pipelines and diff them against the pinned fixtures.
    Sieve(SieveArgs),
    /// Decide line/translate membership for prime powers, emitting JSON
    /// verdict lines.
    Verify(VerifyArgs),
    /// Numerically check the character-sum bounds and sieve inequalities.
    Bounds(BoundsArgs),
    /// Summarize verdict files as CSV.
    Report(ReportArgs),
}

#[derive(Args)]
struct SieveArgs {
    #[command(subcommand)]
    pipeline: SievePipeline,
}

#[derive(Subcommand)]
enum SievePipeline {
    /// Refine the 146-element cubic list with the k=2 / k=6 criteria and
    /// diff against the 82-element fixture.
    CubicRefine(SieveCommon),
    /// Scan prime powers for quartic sieve survivors and diff against the
    /// E_4 fixture.
    Quartic(SieveCommon),
}

#[derive(Args)]
struct SieveCommon {
    /// Largest core-prime count tried per partition (default 4).
    #[arg(long, default_value_t = 4)]
    t_max: u32,
    /// Largest specially-treated prime count tried (default: 2 cubic, 4
    /// quartic).
    #[arg(long)]
    r_max: Option<u32>,
    /// Read fixtures from this directory instead of the embedded copies.
    #[arg(long)]
    fixtures: Option<PathBuf>,
    /// Also write the survivor list here, one integer per line.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// line or translate.
    #[arg(long)]
    problem: Problem,
    /// Extension degree, 3 or 4.
    #[arg(long, value_parser = clap::value_parser!(u32).range(3..=4))]
    degree: u32,
    /// Single prime power target.
    #[arg(long, conflicts_with = "range")]
    q: Option<u64>,
    /// Half-open range A..B of prime powers.
    #[arg(long)]
    range: Option<String>,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Directory for resumable checkpoints.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Also append verdict lines to this file.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Exp/log table budget in entries.
    #[arg(long, default_value_t = DEFAULT_TABLE_BUDGET)]
    mem_budget: u64,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long)]
    q: u64,
    #[arg(long, value_parser = clap::value_parser!(u32).range(3..=4), default_value_t = 3)]
    degree: u32,
    /// Largest field order accepted for exhaustive iteration.
    #[arg(long, default_value_t = charsum::DEFAULT_EXHAUSTIVE_CAP)]
    cap: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// Verdict files (JSON lines).
    inputs: Vec<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Sieve(args) => cmd_sieve(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Bounds(args) => cmd_bounds(args),
        Command::Report(args) => cmd_report(args),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

type CmdResult = Result<ExitCode, Box<dyn std::error::Error>>;

fn load_fixture(f: &fixtures::Fixture, dir: &Option<PathBuf>) -> Result<BTreeSet<u64>, primel_core::Error> {
    let values = match dir {
        Some(d) => f.values_from_dir(d)?,
        None => f.values()?,
    };
    eprintln!("fixture {} sha256={}", f.name, f.sha256);
    Ok(values)
}

fn write_list(path: &PathBuf, values: &BTreeSet<u64>) -> std::io::Result<()> {
    let mut out = File::create(path)?;
    for v in values {
        writeln!(out, "{v}")?;
    }
    Ok(())
}

fn diff_exit(name: &str, got: &BTreeSet<u64>, want: &BTreeSet<u64>) -> ExitCode {
    let extra: Vec<&u64> = got.difference(want).collect();
    let missing: Vec<&u64> = want.difference(got).collect();
    println!(
        "{name}: {} survivors, {} extra, {} missing vs fixture",
        got.len(),
        extra.len(),
        missing.len()
    );
    if extra.is_empty() && missing.is_empty() {
        ExitCode::SUCCESS
    } else {
        if !extra.is_empty() {
            println!("extra: {extra:?}");
        }
        if !missing.is_empty() {
            println!("missing: {missing:?}");
        }
        ExitCode::from(1)
    }
}

fn cmd_sieve(args: SieveArgs) -> CmdResult {
    match args.pipeline {
        SievePipeline::CubicRefine(c) => {
            let input = load_fixture(&fixtures::CUBIC_146, &c.fixtures)?;
            let want = load_fixture(&fixtures::CUBIC_82, &c.fixtures)?;
            let out = sieve::cubic_pipeline_with(&input, c.r_max.unwrap_or(2))?;
            println!("after k=2 criterion: {} remain", out.after_k2);
            if let Some(path) = &c.out {
                write_list(path, &out.survivors)?;
            }
            Ok(diff_exit("cubic-refine", &out.survivors, &want))
        }
        SievePipeline::Quartic(c) => {
            let want = load_fixture(&fixtures::QUARTIC_E4, &c.fixtures)?;
            let out = sieve::quartic_pipeline(14, c.t_max, c.r_max.unwrap_or(4))?;
            println!(
                "scan cutoff {} (first pass kept {})",
                out.cutoff, out.first_pass_count
            );
            if let Some(path) = &c.out {
                write_list(path, &out.survivors)?;
            }
            Ok(diff_exit("quartic", &out.survivors, &want))
        }
    }
}

fn parse_range(spec: &str) -> Result<(u64, u64), String> {
    let (lo, hi) = spec
        .split_once("..")
        .ok_or_else(|| format!("range {spec:?} is not of the form A..B"))?;
    let lo = lo.trim().parse().map_err(|e| format!("bad range start: {e}"))?;
    let hi = hi.trim().parse().map_err(|e| format!("bad range end: {e}"))?;
    if lo >= hi {
        return Err(format!("empty range {spec:?}"));
    }
    Ok((lo, hi))
}

fn cmd_verify(args: VerifyArgs) -> CmdResult {
    let qs: Vec<u64> = match (&args.q, &args.range) {
        (Some(q), None) => vec![*q],
        (None, Some(spec)) => {
            let (lo, hi) = parse_range(spec)?;
            arith::prime_powers_between(lo.max(2), hi.saturating_sub(1))
                .into_iter()
                .map(|(_, _, q)| q)
                .collect()
        }
        _ => return Err("exactly one of --q and --range is required".into()),
    };
    let cfg = CampaignConfig {
        targets: qs
            .iter()
            .map(|&q| Target {
                q,
                n: args.degree,
                problem: args.problem,
            })
            .collect(),
        workers: args.workers.max(1),
        checkpoint_dir: args.checkpoint.clone(),
        mem_budget: args.mem_budget,
        ..CampaignConfig::default()
    };
    let mut out_file = match &args.out {
        Some(p) => Some(File::options().create(true).append(true).open(p)?),
        None => None,
    };
    let mut failures = 0usize;
    for (target, result) in search::run_campaign(&cfg) {
        match result {
            Ok(verdict) => {
                let line = serde_json::to_string(&verdict)?;
                println!("{line}");
                if let Some(f) = &mut out_file {
                    writeln!(f, "{line}")?;
                }
            }
            Err(e) => {
                eprintln!("q={} n={} {}: skipped: {e}", target.q, target.n, target.problem);
                failures += 1;
            }
        }
    }
    Ok(if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cmd_bounds(args: BoundsArgs) -> CmdResult {
    let (p, alpha) =
        arith::split_prime_power(args.q).ok_or(primel_core::Error::NotAPrimePower(args.q))?;
    let ctx = FieldCtx::build(p, alpha, args.degree)?;
    let mut reports: Vec<serde_json::Value> = Vec::new();
    let mut all_pass = true;

    let katz = charsum::verify_katz_with_cap(&ctx, args.cap)?;
    all_pass &= katz.pass;
    reports.push(serde_json::to_value(&katz)?);

    if args.degree == 3 {
        let cubic = charsum::verify_cubic_bound(&ctx)?;
        all_pass &= cubic.pass;
        reports.push(serde_json::to_value(&cubic)?);

        let gamma = ctx
            .coset_reps()
            .into_iter()
            .find(|&g| ctx.generates(g))
            .expect("a cubic extension has generating representatives");
        let tu = charsum::tu_decomposition(&ctx, gamma)?;
        let q = ctx.q;
        all_pass &= tu.t_distinct == (q - 1) * (q * q - q + 1)
            && tu.u_size == 2 * q * (q - 1)
            && tu.offdiag_distinct == (q - 1) * (q - 1) * q
            && tu.offdiag_in_fq == 0
            && tu.u1_uinv_disjoint
            && tu.union_is_u;
        reports.push(serde_json::to_value(&tu)?);

        let beta = Elt::Log(1);
        let primes: Vec<u64> = ctx.factors.primes().map(|p| p as u64).collect();
        let total = primes.len() as u32;
        for t in 1..=2u32.min(total) {
            for r in 0..=2u32.min(total - t) {
                let part = sieve::SievePartition {
                    q: ctx.q,
                    n: ctx.n,
                    k_primes: primes[..t as usize].to_vec(),
                    sieving: primes[t as usize..(total - r) as usize].to_vec(),
                    special: primes[(total - r) as usize..].to_vec(),
                };
                let rep = charsum::verify_sieve_inequalities(&ctx, beta, gamma, &part)?;
                all_pass &= rep.pass;
                reports.push(serde_json::to_value(&rep)?);
            }
        }
    }

    let mut out_file = match &args.out {
        Some(p) => Some(File::create(p)?),
        None => None,
    };
    for rep in &reports {
        println!("{rep}");
        if let Some(f) = &mut out_file {
            writeln!(f, "{rep}")?;
        }
    }
    Ok(if all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cmd_report(args: ReportArgs) -> CmdResult {
    // dedup by (q, n, problem), first occurrence wins
    let mut verdicts: BTreeMap<(u64, u32, String), search::Verdict> = BTreeMap::new();
    for path in &args.inputs {
        let reader = BufReader::new(File::open(path)?);
        for line in reader.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let v: search::Verdict = serde_json::from_str(&line)
                .map_err(|e| format!("{}: malformed verdict line: {e}", path.display()))?;
            verdicts
                .entry((v.q, v.n, v.problem.to_string()))
                .or_insert(v);
        }
    }
    // bucket q into bands of 100 per (n, problem)
    let mut rows: BTreeMap<(u32, String, u64), Vec<&search::Verdict>> = BTreeMap::new();
    for v in verdicts.values() {
        rows.entry((v.n, v.problem.to_string(), v.q / 100 * 100))
            .or_default()
            .push(v);
    }
    let mut csv = String::from("n,problem,q_range,count,member,nonmember,min_ms,avg_ms,max_ms\n");
    for ((n, problem, lo), vs) in rows {
        let member = vs.iter().filter(|v| v.status == search::Status::Member).count();
        let times: Vec<u64> = vs.iter().map(|v| v.elapsed_ms).collect();
        csv.push_str(&format!(
            "{n},{problem},{lo}..{hi},{count},{member},{nonmember},{min},{avg:.1},{max}\n",
            hi = lo + 100,
            count = vs.len(),
            nonmember = vs.len() - member,
            min = times.iter().min().unwrap(),
            avg = times.iter().sum::<u64>() as f64 / times.len() as f64,
            max = times.iter().max().unwrap(),
        ));
    }
    print!("{csv}");
    if let Some(path) = &args.out {
        std::fs::write(path, csv)?;
    }
    Ok(ExitCode::SUCCESS)
}
