//! Sieve criteria over the prime partition of q^n - 1, evaluated in exact
//! rational arithmetic, plus the pipelines that regenerate the cubic and
//! quartic exception lists.
//!
//! A partition splits the distinct primes of q^n - 1 into a core k (t
//! primes), sieving primes p_1..p_s, and specially-treated primes l_1..l_r.
//! Every comparison against sqrt(q) is resolved by sign-aware squaring in
//! rationals; no floating point enters any accept/reject decision.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{self, Factorization};
use crate::error::{Error, Result};

fn ratio(num: u128, den: u128) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn int(v: u128) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// The (k, t, {p_i}, {l_j}) data of the sieve criterion for one q.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SievePartition {
    pub q: u64,
    pub n: u32,
    /// Primes whose product is k, ascending.
    pub k_primes: Vec<u64>,
    /// Sieving primes p_1..p_s.
    pub sieving: Vec<u64>,
    /// Specially treated primes l_1..l_r.
    pub special: Vec<u64>,
}

impl SievePartition {
    pub fn t(&self) -> u32 {
        self.k_primes.len() as u32
    }

    pub fn s(&self) -> u32 {
        self.sieving.len() as u32
    }

    pub fn r(&self) -> u32 {
        self.special.len() as u32
    }

    pub fn k(&self) -> u128 {
        self.k_primes.iter().map(|&p| p as u128).product()
    }

    /// m = theta(k) = prod over primes of k of (1 - 1/p).
    pub fn m(&self) -> BigRational {
        self.k_primes
            .iter()
            .map(|&p| ratio(p as u128 - 1, p as u128))
            .product()
    }

    /// delta = 1 - sum 1/p_i (1 when s = 0, by convention).
    pub fn delta(&self) -> BigRational {
        BigRational::one()
            - self
                .sieving
                .iter()
                .map(|&p| ratio(1, p as u128))
                .sum::<BigRational>()
    }

    /// epsilon = sum 1/l_j (0 when r = 0, by convention).
    pub fn epsilon(&self) -> BigRational {
        self.special
            .iter()
            .map(|&l| ratio(1, l as u128))
            .sum::<BigRational>()
    }

    /// The three prime groups must be pairwise disjoint and cover exactly
    /// the distinct primes of q^n - 1.
    pub fn validate(&self, factors: &Factorization) -> Result<()> {
        let mut all: Vec<u64> = self
            .k_primes
            .iter()
            .chain(&self.sieving)
            .chain(&self.special)
            .copied()
            .collect();
        all.sort_unstable();
        let expect: Vec<u64> = factors.primes().map(|p| p as u64).collect();
        if all.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InconsistentPartition {
                reason: format!("duplicate prime in partition for q={}", self.q),
            });
        }
        if all != expect {
            return Err(Error::InconsistentPartition {
                reason: format!(
                    "partition primes {all:?} do not cover the primes of q^{}-1",
                    self.n
                ),
            });
        }
        Ok(())
    }
}

/// True iff lhs > sqrt(q) * b, decided exactly by sign analysis and squaring.
fn gt_sqrt_q_times(lhs: &BigRational, q: u64, b: &BigRational) -> bool {
    let q = int(q as u128);
    if !b.is_negative() {
        lhs.is_positive() && lhs * lhs > &q * b * b
    } else {
        !lhs.is_negative() || lhs * lhs < &q * b * b
    }
}

/// The main sieve criterion: with m*delta > epsilon,
/// q > (n-1)^2 * ((2^t m (s - 1 + 2 delta) - m delta + r - epsilon)
///               / (m delta - epsilon))^2
/// certifies q in L_n.
pub fn lemma1_criterion(part: &SievePartition) -> bool {
    let m = part.m();
    let delta = part.delta();
    let eps = part.epsilon();
    let margin = &m * &delta - &eps;
    if !margin.is_positive() {
        return false;
    }
    let two_t = int(1u128 << part.t());
    let s_term = int(part.s() as u128) - BigRational::one() + int(2) * &delta;
    let numer = two_t * &m * s_term - &m * &delta + int(part.r() as u128) - &eps;
    let nm1 = int((part.n - 1) as u128);
    // q * (m delta - eps)^2 > (n-1)^2 * numer^2, both sides exact
    int(part.q as u128) * &margin * &margin > &nm1 * &nm1 * &numer * &numer
}

/// Enumerate partitions in (t ascending, r ascending) order with k the
/// product of the t smallest primes and the l_j the r largest, returning the
/// first one that passes the criterion.
pub fn best_partition(
    q: u64,
    n: u32,
    factors: &Factorization,
    t_max: u32,
    r_max: u32,
) -> Option<SievePartition> {
    let primes: Vec<u64> = factors.primes().map(|p| p as u64).collect();
    let total = primes.len() as u32;
    for t in 1..=t_max.min(total) {
        for r in 0..=r_max.min(total - t) {
            let part = SievePartition {
                q,
                n,
                k_primes: primes[..t as usize].to_vec(),
                sieving: primes[t as usize..(total - r) as usize].to_vec(),
                special: primes[(total - r) as usize..].to_vec(),
            };
            if lemma1_criterion(&part) {
                return Some(part);
            }
        }
    }
    None
}

/// Refined cubic criterion variant: which core k is in play.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LemCVariant {
    /// k = 2 (odd q), m = 1/2.
    K2,
    /// k = 6 (q = 1 mod 6), m = 1/3.
    K6,
}

/// Partition data for the refined cubic criterion, with the sieving primes
/// split by divisibility of q^2 + q + 1.
#[derive(Debug, Clone)]
pub struct LemCData {
    pub partition: SievePartition,
    pub variant: LemCVariant,
    /// sum of (p_i - 1)/p_i over sieving primes not dividing q^2 + q + 1.
    pub nu1: BigRational,
    /// same sum over sieving primes dividing q^2 + q + 1.
    pub nu2: BigRational,
}

/// Build the refined-criterion data for q with r specially-treated primes.
///
/// The l_j must divide q^2 + q + 1; they are chosen as the r largest such
/// primes outside the core. Returns None when the variant's congruence
/// precondition fails or fewer than r eligible primes exist.
pub fn lemc_data(
    q: u64,
    factors: &Factorization,
    variant: LemCVariant,
    r: u32,
) -> Option<LemCData> {
    let core: &[u64] = match variant {
        LemCVariant::K2 => {
            if q.is_multiple_of(2) {
                return None;
            }
            &[2]
        }
        LemCVariant::K6 => {
            if q % 6 != 1 {
                return None;
            }
            &[2, 3]
        }
    };
    let tau = q as u128 * q as u128 + q as u128 + 1;
    let rest: Vec<u64> = factors
        .primes()
        .map(|p| p as u64)
        .filter(|p| !core.contains(p))
        .collect();
    let eligible: Vec<u64> = rest
        .iter()
        .copied()
        .filter(|&p| tau.is_multiple_of(p as u128))
        .collect();
    if (eligible.len() as u32) < r {
        return None;
    }
    let special: Vec<u64> = eligible[eligible.len() - r as usize..].to_vec();
    let sieving: Vec<u64> = rest
        .iter()
        .copied()
        .filter(|p| !special.contains(p))
        .collect();
    let mut nu1 = BigRational::zero();
    let mut nu2 = BigRational::zero();
    for &p in &sieving {
        let term = ratio(p as u128 - 1, p as u128);
        if tau.is_multiple_of(p as u128) {
            nu2 += term;
        } else {
            nu1 += term;
        }
    }
    Some(LemCData {
        partition: SievePartition {
            q,
            n: 3,
            k_primes: core.to_vec(),
            sieving,
            special,
        },
        variant,
        nu1,
        nu2,
    })
}

/// The refined cubic criterion: for k = 2,
///   q(m delta - eps) - sqrt(q)(m(2 delta + 4 nu1 + 3 nu2) + r - eps)
///     - (m nu2 + r - eps) > 0,
/// and for k = 6 the analogue with coefficients (5 delta + 8 nu1 + 6 nu2)
/// and constant m(delta + 2 nu2) + r - eps.
pub fn lemc_criterion(data: &LemCData) -> bool {
    let part = &data.partition;
    let m = part.m();
    let delta = part.delta();
    let eps = part.epsilon();
    let r = int(part.r() as u128);
    let (sqrt_coeff, constant) = match data.variant {
        LemCVariant::K2 => (
            &m * (int(2) * &delta + int(4) * &data.nu1 + int(3) * &data.nu2) + &r - &eps,
            &m * &data.nu2 + &r - &eps,
        ),
        LemCVariant::K6 => (
            &m * (int(5) * &delta + int(8) * &data.nu1 + int(6) * &data.nu2) + &r - &eps,
            &m * (&delta + int(2) * &data.nu2) + &r - &eps,
        ),
    };
    let lhs = int(part.q as u128) * (&m * &delta - &eps) - constant;
    gt_sqrt_q_times(&lhs, part.q, &sqrt_coeff)
}

/// Outcome of the cubic refinement pass over the 146-element list.
#[derive(Debug, Clone)]
pub struct CubicPipelineOutput {
    pub survivors: BTreeSet<u64>,
    /// Survivor count after the k = 2 phase alone.
    pub after_k2: usize,
}

/// Apply the k = 2 criterion for r = 0..=r_max, then the k = 6 criterion
/// on what remains, removing every q that passes.
pub fn cubic_pipeline(input: &BTreeSet<u64>) -> Result<CubicPipelineOutput> {
    cubic_pipeline_with(input, 2)
}

pub fn cubic_pipeline_with(input: &BTreeSet<u64>, r_max: u32) -> Result<CubicPipelineOutput> {
    let passes = |q: u64, variant: LemCVariant, factors: &Factorization| -> bool {
        (0..=r_max).any(|r| {
            lemc_data(q, factors, variant, r)
                .map(|d| lemc_criterion(&d))
                .unwrap_or(false)
        })
    };
    let mut after_k2 = BTreeSet::new();
    for &q in input {
        let q3 = q as u128 * q as u128 * q as u128;
        let factors = arith::factorize(q3 - 1)?;
        if !passes(q, LemCVariant::K2, &factors) {
            after_k2.insert(q);
        }
    }
    let k2_count = after_k2.len();
    let mut survivors = BTreeSet::new();
    for &q in &after_k2 {
        let q3 = q as u128 * q as u128 * q as u128;
        let factors = arith::factorize(q3 - 1)?;
        if !passes(q, LemCVariant::K6, &factors) {
            survivors.insert(q);
        }
    }
    Ok(CubicPipelineOutput {
        survivors,
        after_k2: k2_count,
    })
}

/// Smallest-prime prefix shapes used to bound the quartic scan.
fn shape_prefixes(max_omega: u32) -> Vec<Vec<u64>> {
    let primes = arith::sieve_primes(200);
    let mut shapes = Vec::new();
    for omega in 1..=max_omega as usize {
        shapes.push(primes[..omega].to_vec()); // odd q: 2 divides q^4 - 1
        shapes.push(primes[1..=omega].to_vec()); // even q: odd primes only
    }
    shapes
}

/// Exact right-hand side of the criterion for one concrete partition shape:
/// (n-1)^2 ((2^t m (s-1+2 delta) - m delta + r - eps)/(m delta - eps))^2,
/// or None when m delta <= eps.
fn criterion_rhs(part: &SievePartition) -> Option<BigRational> {
    let m = part.m();
    let delta = part.delta();
    let eps = part.epsilon();
    let margin = &m * &delta - &eps;
    if !margin.is_positive() {
        return None;
    }
    let two_t = int(1u128 << part.t());
    let s_term = int(part.s() as u128) - BigRational::one() + int(2) * &delta;
    let numer = two_t * &m * s_term - &m * &delta + int(part.r() as u128) - &eps;
    let nm1 = int((part.n - 1) as u128);
    Some(&nm1 * &nm1 * &numer * &numer / (&margin * &margin))
}

/// A scan bound B for the quartic pipeline: any q > B whose q^4 - 1 has at
/// most `max_omega` distinct prime factors passes the criterion for some
/// enumerated partition. Computed by taking, for each worst-case prefix of
/// smallest primes, the best (smallest) RHS over partitions, and then the
/// max over prefixes.
pub fn quartic_cutoff(max_omega: u32, t_max: u32, r_max: u32) -> u64 {
    let mut bound = BigRational::zero();
    for shape in shape_prefixes(max_omega) {
        let factors = Factorization {
            n: shape.iter().map(|&p| p as u128).product(),
            factors: shape.iter().map(|&p| (p as u128, 1)).collect(),
        };
        let best = best_rhs_for_shape(&factors, 4, t_max, r_max)
            .expect("every worst-case shape must admit a passing partition");
        if best > bound {
            bound = best;
        }
    }
    bound.floor().to_integer().to_u64().expect("cutoff fits u64") + 1
}

fn best_rhs_for_shape(
    factors: &Factorization,
    n: u32,
    t_max: u32,
    r_max: u32,
) -> Option<BigRational> {
    let primes: Vec<u64> = factors.primes().map(|p| p as u64).collect();
    let total = primes.len() as u32;
    let mut best: Option<BigRational> = None;
    for t in 1..=t_max.min(total) {
        for r in 0..=r_max.min(total - t) {
            let part = SievePartition {
                q: 0,
                n,
                k_primes: primes[..t as usize].to_vec(),
                sieving: primes[t as usize..(total - r) as usize].to_vec(),
                special: primes[(total - r) as usize..].to_vec(),
            };
            if let Some(rhs) = criterion_rhs(&part) {
                if best.as_ref().map(|b| &rhs < b).unwrap_or(true) {
                    best = Some(rhs);
                }
            }
        }
    }
    best
}

/// Floating-point version of the same maximization, used as an independent
/// cross-check of the exact computation.
pub fn quartic_cutoff_f64(max_omega: u32, t_max: u32, r_max: u32) -> f64 {
    let mut bound = 0f64;
    for shape in shape_prefixes(max_omega) {
        let total = shape.len() as u32;
        let mut best = f64::INFINITY;
        for t in 1..=t_max.min(total) {
            for r in 0..=r_max.min(total - t) {
                let ks = &shape[..t as usize];
                let ps = &shape[t as usize..(total - r) as usize];
                let ls = &shape[(total - r) as usize..];
                let m: f64 = ks.iter().map(|&p| 1.0 - 1.0 / p as f64).product();
                let delta: f64 = 1.0 - ps.iter().map(|&p| 1.0 / p as f64).sum::<f64>();
                let eps: f64 = ls.iter().map(|&l| 1.0 / l as f64).sum();
                if m * delta <= eps {
                    continue;
                }
                let s = ps.len() as f64;
                let numer =
                    (1u64 << t) as f64 * m * (s - 1.0 + 2.0 * delta) - m * delta + r as f64 - eps;
                let rhs = 9.0 * (numer / (m * delta - eps)).powi(2);
                if rhs < best {
                    best = rhs;
                }
            }
        }
        if best > bound {
            bound = best;
        }
    }
    bound
}

/// Result of the quartic exception scan.
#[derive(Debug, Clone)]
pub struct QuarticPipelineOutput {
    pub survivors: BTreeSet<u64>,
    pub cutoff: u64,
    /// Survivors of the r = 0 first pass (reported for comparison, not
    /// contractual).
    pub first_pass_count: usize,
}

/// Scan all prime powers up to the cutoff; q survives (is a possible
/// exception) when no enumerated partition passes the criterion for q^4 - 1.
/// q with more than `max_omega` distinct prime factors in q^4 - 1 are
/// covered by the pair-counting reduction and never survive.
pub fn quartic_pipeline(max_omega: u32, t_max: u32, r_max: u32) -> Result<QuarticPipelineOutput> {
    let cutoff = quartic_cutoff(max_omega, t_max, r_max);
    let qs = arith::prime_powers_between(2, cutoff);
    // per q: None on factorization failure, otherwise
    // (survives the r = 0 pass, survives the full pass)
    let classified: Vec<(u64, Option<(bool, bool)>)> = qs
        .par_iter()
        .map(|&(_, _, q64)| {
            let q = q64 as u128;
            let factors = match arith::factorize_product(&[q - 1, q + 1, q * q + 1]) {
                Ok(f) => f,
                Err(_) => return (q64, None),
            };
            if factors.factors.len() as u32 > max_omega {
                return (q64, Some((false, false))); // eliminated without sieving
            }
            if best_partition(q64, 4, &factors, t_max, 0).is_some() {
                return (q64, Some((false, false)));
            }
            let survives = best_partition(q64, 4, &factors, t_max, r_max).is_none();
            (q64, Some((true, survives)))
        })
        .collect();
    let mut survivors = BTreeSet::new();
    let mut first_pass_count = 0usize;
    for (q, outcome) in classified {
        match outcome {
            None => {
                return Err(Error::FactorEffortExceeded {
                    n: (q as u128).pow(4) - 1,
                })
            }
            Some((first, full)) => {
                if first {
                    first_pass_count += 1;
                }
                if full {
                    survivors.insert(q);
                }
            }
        }
    }
    Ok(QuarticPipelineOutput {
        survivors,
        cutoff,
        first_pass_count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn partition_for(q: u64, n: u32, t: u32, r: u32) -> SievePartition {
        let qn = (q as u128).pow(n);
        let factors = arith::factorize(qn - 1).unwrap();
        let primes: Vec<u64> = factors.primes().map(|p| p as u64).collect();
        let total = primes.len() as u32;
        let part = SievePartition {
            q,
            n,
            k_primes: primes[..t as usize].to_vec(),
            sieving: primes[t as usize..(total - r) as usize].to_vec(),
            special: primes[(total - r) as usize..].to_vec(),
        };
        part.validate(&factors).unwrap();
        part
    }

    #[test]
    fn lemma1_known_eliminations() {
        assert!(lemma1_criterion(&partition_for(809, 3, 1, 0)));
        assert!(lemma1_criterion(&partition_for(1951, 3, 2, 2)));
        assert!(lemma1_criterion(&partition_for(5791, 3, 2, 2)));
    }

    #[test]
    fn lemma1_survivors_fail_everything() {
        for q in [9811u64, 103] {
            let factors = arith::factorize((q as u128).pow(3) - 1).unwrap();
            assert!(best_partition(q, 3, &factors, 4, 6).is_none(), "q={q}");
        }
    }

    #[test]
    fn q4096_removed_with_t1() {
        let factors = arith::factorize(4096u128.pow(3) - 1).unwrap();
        let part = best_partition(4096, 3, &factors, 1, 6).unwrap();
        assert_eq!(part.t(), 1);
    }

    #[test]
    fn the_146_list_is_a_fixed_point_of_the_plain_sieve() {
        for &q in &fixtures::CUBIC_146.values().unwrap() {
            let factors = arith::factorize((q as u128).pow(3) - 1).unwrap();
            assert!(best_partition(q, 3, &factors, 4, 6).is_none(), "q={q}");
        }
    }

    #[test]
    fn refined_criterion_spot_checks() {
        let removes = |q: u64| -> bool {
            let factors = arith::factorize((q as u128).pow(3) - 1).unwrap();
            [LemCVariant::K2, LemCVariant::K6].iter().any(|&v| {
                (0..=2).any(|r| {
                    lemc_data(q, &factors, v, r)
                        .map(|d| lemc_criterion(&d))
                        .unwrap_or(false)
                })
            })
        };
        assert!(removes(101));
        assert!(!removes(103));
        assert!(!removes(4951));
    }

    #[test]
    fn cubic_pipeline_reproduces_the_82_list() {
        let out = cubic_pipeline(&fixtures::CUBIC_146.values().unwrap()).unwrap();
        assert_eq!(out.after_k2, 96);
        assert_eq!(out.survivors, fixtures::CUBIC_82.values().unwrap());
    }

    #[test]
    fn criterion_is_monotone_in_q_for_a_fixed_shape() {
        // same prime-partition shape, growing q: the RHS does not move, so a
        // pass stays a pass
        let shapes = [
            (vec![2u64], vec![3u64, 5], vec![31u64]),
            (vec![2, 3], vec![5, 7, 11], vec![]),
            (vec![2], vec![], vec![]),
        ];
        for (k_primes, sieving, special) in shapes {
            let mut passed = false;
            for q in [50u64, 500, 5_000, 50_000, 500_000] {
                let part = SievePartition {
                    q,
                    n: 3,
                    k_primes: k_primes.clone(),
                    sieving: sieving.clone(),
                    special: special.clone(),
                };
                let pass = lemma1_criterion(&part);
                assert!(!passed || pass, "pass must be monotone in q");
                passed = pass;
            }
            assert!(passed, "largest q must pass for these small shapes");
        }
    }

    #[test]
    fn decisions_are_exact_under_precision_stress() {
        // cross-multiplied integer comparison with both sides scaled by
        // 10^10 must agree with the production path everywhere
        let scale = BigRational::from_integer(BigInt::from(10u64.pow(10)));
        for &q in &fixtures::CUBIC_146.values().unwrap() {
            let factors = arith::factorize((q as u128).pow(3) - 1).unwrap();
            let primes: Vec<u64> = factors.primes().map(|p| p as u64).collect();
            let total = primes.len() as u32;
            for t in 1..=4u32.min(total) {
                for r in 0..=4u32.min(total - t) {
                    let part = SievePartition {
                        q,
                        n: 3,
                        k_primes: primes[..t as usize].to_vec(),
                        sieving: primes[t as usize..(total - r) as usize].to_vec(),
                        special: primes[(total - r) as usize..].to_vec(),
                    };
                    let direct = lemma1_criterion(&part);
                    let stressed = match criterion_rhs(&part) {
                        None => false,
                        Some(rhs) => int(q as u128) * &scale > rhs * &scale,
                    };
                    assert_eq!(direct, stressed, "q={q} t={t} r={r}");
                }
            }
        }
    }

    #[test]
    fn partition_validation_rejects_bad_covers() {
        let factors = arith::factorize(26).unwrap();
        let bad = SievePartition {
            q: 3,
            n: 3,
            k_primes: vec![2],
            sieving: vec![],
            special: vec![],
        };
        assert!(bad.validate(&factors).is_err());
    }

    #[test]
    fn cutoff_covers_the_largest_survivor_and_matches_float() {
        let exact = quartic_cutoff(14, 4, 4);
        assert!(exact >= 102_829);
        let float = quartic_cutoff_f64(14, 4, 4);
        assert!((exact as f64 - 1.0 - float).abs() < 1.0, "{exact} vs {float}");
    }
}
