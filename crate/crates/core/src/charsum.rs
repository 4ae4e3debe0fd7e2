//! Multiplicative characters over the log representation, the translate sum
//! S_gamma(chi) = sum over a in F_q of chi(gamma + a), the e-free counting
//! function N(e), and numerical verification of the character-sum bounds and
//! sieve inequalities the exception lists rest on.
//!
//! Everything here runs on small fields (exhaustive iteration), so sums are
//! evaluated in f64 complex arithmetic with a 1e-9 tolerance on every bound;
//! the N(e) side of each inequality stays in exact integers/rationals.

use std::collections::BTreeSet;
use std::f64::consts::TAU;

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use serde::Serialize;

use crate::arith::{self, gcd};
use crate::error::{Error, Result};
use crate::field::{Elt, FieldCtx};
use crate::sieve::SievePartition;

/// Tolerance on every comparison that involves sqrt(q).
pub const BOUND_SLACK: f64 = 1e-9;

/// Largest field order the exhaustive verifiers accept by default.
pub const DEFAULT_EXHAUSTIVE_CAP: u64 = 1 << 16;

/// A multiplicative character of F_{q^n}* of exact order d, evaluated as
/// chi(omega^k) = exp(2*pi*i*u*k/d) with gcd(u, d) = 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Character {
    pub d: u64,
    pub u: u64,
}

impl Character {
    pub fn principal() -> Character {
        Character { d: 1, u: 1 }
    }

    pub fn is_principal(&self) -> bool {
        self.d == 1
    }

    pub fn eval(&self, x: Elt) -> Complex64 {
        match x {
            Elt::Zero => Complex64::new(0.0, 0.0),
            Elt::Log(k) => {
                let t = (self.u as u128 * k as u128 % self.d as u128) as f64;
                Complex64::cis(TAU * t / self.d as f64)
            }
        }
    }
}

/// Every character of order dividing `group`, which must divide q^n - 1;
/// the principal character comes first.
pub fn characters_of_order_dividing(ctx: &FieldCtx, group: u64) -> Result<Vec<Character>> {
    if !(ctx.order - 1).is_multiple_of(group) {
        return Err(Error::InconsistentPartition {
            reason: format!("{group} does not divide {}", ctx.order - 1),
        });
    }
    let factors = arith::factorize(group as u128)?;
    let mut out = Vec::new();
    for d in factors.divisors() {
        let d = d as u64;
        for u in 1..=d {
            if gcd(u as u128, d as u128) == 1 {
                out.push(Character { d, u });
            }
        }
    }
    out.sort_by_key(|c| (c.d, c.u));
    Ok(out)
}

/// S_gamma(chi) = sum over a in the embedded F_q of chi(gamma + a).
pub fn char_sum(ctx: &FieldCtx, gamma: Elt, chi: Character) -> Complex64 {
    ctx.fq_elements()
        .iter()
        .map(|&a| chi.eval(ctx.add(gamma, a)))
        .sum()
}

/// The extremal (gamma, chi) pair behind a reported ratio.
#[derive(Debug, Clone, Serialize)]
pub struct BoundWitness {
    pub gamma: Elt,
    pub chi: Character,
    pub abs_sum: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub q: u64,
    pub n: u32,
    pub check_name: String,
    /// Largest |S|/bound observed; the check passes iff this is at most
    /// 1 + 1e-9.
    pub max_ratio: f64,
    pub pass: bool,
    pub witness: Option<BoundWitness>,
}

fn max_ratio_report(
    ctx: &FieldCtx,
    name: &str,
    bound: f64,
    chars: &[Character],
) -> BoundReport {
    let mut max_ratio = 0.0f64;
    let mut witness = None;
    for gamma in ctx.coset_reps() {
        if !ctx.generates(gamma) {
            continue;
        }
        for &chi in chars {
            let s = char_sum(ctx, gamma, chi).norm();
            if s / bound > max_ratio {
                max_ratio = s / bound;
                witness = Some(BoundWitness {
                    gamma,
                    chi,
                    abs_sum: s,
                });
            }
        }
    }
    BoundReport {
        q: ctx.q,
        n: ctx.n,
        check_name: name.to_string(),
        max_ratio,
        pass: max_ratio <= 1.0 + BOUND_SLACK,
        witness,
    }
}

/// |S_gamma(chi)| <= (n-1) sqrt(q) for every non-principal chi and every
/// generating coset representative gamma.
pub fn verify_katz(ctx: &FieldCtx) -> Result<BoundReport> {
    verify_katz_with_cap(ctx, DEFAULT_EXHAUSTIVE_CAP)
}

pub fn verify_katz_with_cap(ctx: &FieldCtx, cap: u64) -> Result<BoundReport> {
    if ctx.order > cap {
        return Err(Error::ExhaustiveCapExceeded {
            order: ctx.order,
            cap,
        });
    }
    let chars: Vec<Character> = characters_of_order_dividing(ctx, ctx.order - 1)?
        .into_iter()
        .filter(|c| !c.is_principal())
        .collect();
    let bound = (ctx.n - 1) as f64 * (ctx.q as f64).sqrt();
    Ok(max_ratio_report(ctx, "katz", bound, &chars))
}

/// For n = 3 and non-principal chi of order dividing q^2 + q + 1:
/// |S_gamma(chi)| <= sqrt(q) + 1, and the sum with beta folded in has the
/// same absolute value (it equals chi(beta) S_gamma(chi)).
pub fn verify_cubic_bound(ctx: &FieldCtx) -> Result<BoundReport> {
    assert_eq!(ctx.n, 3, "the refined bound is specific to cubic extensions");
    let chars: Vec<Character> = characters_of_order_dividing(ctx, ctx.tau)?
        .into_iter()
        .filter(|c| !c.is_principal())
        .collect();
    let bound = (ctx.q as f64).sqrt() + 1.0;
    let mut report = max_ratio_report(ctx, "cubic_bound", bound, &chars);
    // beta only rotates the sum: spot-check |sum_a chi(beta(gamma+a))| =
    // |S_gamma(chi)| on a few beta
    let betas: Vec<Elt> = (0..4).map(|j| ctx.omega_pow(j * 7 + 1)).collect();
    'outer: for gamma in ctx.coset_reps() {
        if !ctx.generates(gamma) {
            continue;
        }
        for &chi in &chars {
            let base = char_sum(ctx, gamma, chi).norm();
            for &beta in &betas {
                let folded: Complex64 = ctx
                    .fq_elements()
                    .iter()
                    .map(|&a| chi.eval(ctx.mul(beta, ctx.add(gamma, a))))
                    .sum();
                if (folded.norm() - base).abs() > BOUND_SLACK {
                    report.pass = false;
                    break 'outer;
                }
            }
        }
    }
    Ok(report)
}

/// Cardinalities of the ratio set T = {c(gamma+a)/(gamma+b)} and its
/// complement U in F_{q^3}*.
#[derive(Debug, Clone, Serialize)]
pub struct TuDecomposition {
    pub q: u64,
    /// Distinct elements of T.
    pub t_distinct: u64,
    /// Distinct elements of the a != b subset of T.
    pub offdiag_distinct: u64,
    /// How many of those land in F_q (must be 0).
    pub offdiag_in_fq: u64,
    /// |U| where U is the complement of T in F_{q^3}*.
    pub u_size: u64,
    /// |U_1| for U_1 = {u(gamma+v) : u != 0}.
    pub u1_size: u64,
    pub u1_uinv_disjoint: bool,
    /// U_1 together with its reciprocals is exactly U.
    pub union_is_u: bool,
}

/// Build T and U exhaustively for a generating gamma in a cubic extension.
pub fn tu_decomposition(ctx: &FieldCtx, gamma: Elt) -> Result<TuDecomposition> {
    assert_eq!(ctx.n, 3);
    assert!(ctx.generates(gamma), "gamma must generate the extension");
    let fq = ctx.fq_elements();
    let mut t_set = BTreeSet::new();
    let mut offdiag = BTreeSet::new();
    let mut offdiag_in_fq = 0u64;
    for &a in &fq {
        for &b in &fq {
            let num = ctx.add(gamma, a);
            let den = ctx.inv(ctx.add(gamma, b))?;
            let ratio = ctx.mul(num, den);
            for &c in &fq {
                if c.is_zero() {
                    continue;
                }
                let x = ctx.mul(c, ratio);
                t_set.insert(x);
                if a != b && offdiag.insert(x) {
                    if let Elt::Log(k) = x {
                        if k % ctx.tau == 0 {
                            offdiag_in_fq += 1;
                        }
                    }
                }
            }
        }
    }
    let mut u1 = BTreeSet::new();
    let mut u1_inv = BTreeSet::new();
    for &u in &fq {
        if u.is_zero() {
            continue;
        }
        for &v in &fq {
            let x = ctx.mul(u, ctx.add(gamma, v));
            u1.insert(x);
            u1_inv.insert(ctx.inv(x)?);
        }
    }
    let mut complement = BTreeSet::new();
    for k in 0..ctx.order - 1 {
        let x = Elt::Log(k);
        if !t_set.contains(&x) {
            complement.insert(x);
        }
    }
    let union: BTreeSet<Elt> = u1.union(&u1_inv).copied().collect();
    Ok(TuDecomposition {
        q: ctx.q,
        t_distinct: t_set.len() as u64,
        offdiag_distinct: offdiag.len() as u64,
        offdiag_in_fq,
        u_size: complement.len() as u64,
        u1_size: u1.len() as u64,
        u1_uinv_disjoint: u1.is_disjoint(&u1_inv),
        union_is_u: union == complement,
    })
}

/// x is e-free iff no prime of e divides its log index.
pub fn is_efree(ctx: &FieldCtx, x: Elt, e: u64) -> Result<bool> {
    let k = match x {
        Elt::Zero => return Err(Error::ZeroNotEfree),
        Elt::Log(k) => k,
    };
    debug_assert_eq!((ctx.order - 1) % e, 0, "e must divide the group order");
    let factors = arith::factorize(e as u128)?;
    let free = factors.primes().all(|l| k % l as u64 != 0);
    Ok(free)
}

/// N(e) for one (beta, gamma) pair.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FreeCount {
    pub e: u64,
    pub value: u64,
}

/// N(e) = #{a in F_q : beta(gamma + a) is e-free}.
pub fn count_n(ctx: &FieldCtx, beta: Elt, gamma: Elt, e: u64) -> Result<FreeCount> {
    assert!(!beta.is_zero());
    assert_eq!((ctx.order - 1) % e, 0, "e must divide the group order");
    let primes: Vec<u64> = arith::factorize(e as u128)?
        .primes()
        .map(|l| l as u64)
        .collect();
    let mut value = 0;
    for &a in &ctx.fq_elements() {
        match ctx.mul(beta, ctx.add(gamma, a)) {
            Elt::Zero => {}
            Elt::Log(k) => {
                if primes.iter().all(|&l| k % l != 0) {
                    value += 1;
                }
            }
        }
    }
    Ok(FreeCount { e, value })
}

#[derive(Debug, Clone, Serialize)]
pub struct SieveIneqReport {
    pub q: u64,
    pub n: u32,
    pub check_name: String,
    /// N(q^n-1) >= N(k p_1..p_s) + sum N(l_j) - r N(1), exact.
    pub eq1: bool,
    /// N(k p_1..p_s) >= delta N(k) + sum (N(k p_i) - (1 - 1/p_i) N(k)),
    /// exact rationals.
    pub eq2: bool,
    /// N(k) >= theta(k)(q - (n-1)(2^t - 1) sqrt(q)).
    pub nk: bool,
    /// |N(k p_i) - (1 - 1/p_i) N(k)| <= (1 - 1/p_i) theta(k)(n-1) 2^t
    /// sqrt(q), for every i.
    pub nkpi: bool,
    /// |N(l_j) - (1 - 1/l_j) N(1)| <= (1 - 1/l_j)(n-1) sqrt(q), for every j.
    pub nlj: bool,
    pub pass: bool,
}

/// Check the five numerical relations the sieve criterion is assembled from,
/// for one concrete (beta, gamma) pair.
pub fn verify_sieve_inequalities(
    ctx: &FieldCtx,
    beta: Elt,
    gamma: Elt,
    part: &SievePartition,
) -> Result<SieveIneqReport> {
    part.validate(&ctx.factors)?;
    let n = |e: u64| -> Result<i128> { Ok(count_n(ctx, beta, gamma, e)?.value as i128) };
    let rat = |v: i128| BigRational::from_integer(v.into());
    let q = ctx.q;
    let sqrt_q = (q as f64).sqrt();
    let nm1 = (ctx.n - 1) as f64;
    let k = part.k() as u64;
    let theta_k = part
        .m()
        .to_f64()
        .expect("theta(k) fits in f64");

    let n_full = n(ctx.order - 1)?;
    let kp: u64 = k * part.sieving.iter().product::<u64>();
    let n_kp = n(kp)?;
    let n_k = n(k)?;
    let n_kpi: Vec<i128> = part.sieving.iter().map(|&p| n(k * p)).collect::<Result<_>>()?;
    let n_lj: Vec<i128> = part.special.iter().map(|&l| n(l)).collect::<Result<_>>()?;

    let eq1 = n_full >= n_kp + n_lj.iter().sum::<i128>() - part.r() as i128 * q as i128;

    let mut rhs2 = part.delta() * rat(n_k);
    for (&p, &v) in part.sieving.iter().zip(&n_kpi) {
        rhs2 += rat(v) - (BigRational::one() - ratio1(p)) * rat(n_k);
    }
    let eq2 = rat(n_kp) >= rhs2;

    let two_t = (1u64 << part.t()) as f64;
    let nk = n_k as f64 >= theta_k * (q as f64 - nm1 * (two_t - 1.0) * sqrt_q) - BOUND_SLACK;

    let nkpi = part.sieving.iter().zip(&n_kpi).all(|(&p, &v)| {
        let dev = (rat(v) - (BigRational::one() - ratio1(p)) * rat(n_k))
            .abs()
            .to_f64()
            .unwrap();
        dev <= (1.0 - 1.0 / p as f64) * theta_k * nm1 * two_t * sqrt_q + BOUND_SLACK
    });

    let nlj = part.special.iter().zip(&n_lj).all(|(&l, &v)| {
        let dev = (v as f64) - (1.0 - 1.0 / l as f64) * q as f64;
        dev.abs() <= (1.0 - 1.0 / l as f64) * nm1 * sqrt_q + BOUND_SLACK
    });

    let pass = eq1 && eq2 && nk && nkpi && nlj;
    Ok(SieveIneqReport {
        q,
        n: ctx.n,
        check_name: "sieve_inequalities".to_string(),
        eq1,
        eq2,
        nk,
        nkpi,
        nlj,
        pass,
    })
}

fn ratio1(p: u64) -> BigRational {
    BigRational::new(1.into(), (p as i64).into())
}
