//! Exact integer number theory on values up to 2^127: primality testing,
//! factorization, radical, Euler phi and prime power enumeration.
//!
//! Everything downstream (field construction, sieve criteria, primitivity
//! tests) keys off the factorization of q^n - 1, so a wrong factor here
//! corrupts every result. Factorization therefore refuses to return partial
//! decompositions: if a cofactor resists the rho stage within the iteration
//! budget, the call fails loudly.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use once_cell::sync::Lazy;

use crate::error::Error;

/// Trial division bound used before switching to Pollard rho.
const TRIAL_BOUND: u64 = 100_000;

/// Rho iteration budget per (polynomial, cofactor) attempt.
const RHO_ITERATIONS: u64 = 1 << 24;

/// Number of distinct rho polynomials x^2 + c tried before giving up.
const RHO_RETRIES: u64 = 32;

static SMALL_PRIMES: Lazy<Vec<u64>> = Lazy::new(|| sieve_primes(TRIAL_BOUND));

/// Primes up to `bound` inclusive, by sieve of Eratosthenes.
pub fn sieve_primes(bound: u64) -> Vec<u64> {
    let bound = bound as usize;
    let mut composite = vec![false; bound + 1];
    let mut primes = Vec::new();
    for i in 2..=bound {
        if !composite[i] {
            primes.push(i as u64);
            let mut j = i * i;
            while j <= bound {
                composite[j] = true;
                j += i;
            }
        }
    }
    primes
}

fn mod_mul(a: u128, b: u128, m: u128) -> u128 {
    if m <= u64::MAX as u128 {
        (a * b) % m
    } else {
        // Rare path: only reachable for inputs beyond 64 bits.
        let big = (BigUint::from(a) * BigUint::from(b)) % BigUint::from(m);
        big.to_u128().unwrap()
    }
}

fn mod_pow(mut base: u128, mut exp: u128, m: u128) -> u128 {
    let mut acc: u128 = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mod_mul(acc, base, m);
        }
        base = mod_mul(base, base, m);
        exp >>= 1;
    }
    acc
}

fn strong_probable_prime(n: u128, base: u128) -> bool {
    let base = base % n;
    if base == 0 {
        return true;
    }
    let d = n - 1;
    let s = d.trailing_zeros();
    let odd = d >> s;
    let mut x = mod_pow(base, odd, n);
    if x == 1 || x == n - 1 {
        return true;
    }
    for _ in 1..s {
        x = mod_mul(x, x, n);
        if x == n - 1 {
            return true;
        }
    }
    false
}

/// Strong Lucas probable prime test with Selfridge's parameter choice.
fn strong_lucas_probable_prime(n: u128) -> bool {
    // Find D = 5, -7, 9, -11, ... with Jacobi(D, n) = -1.
    let mut d: i64 = 5;
    loop {
        let j = jacobi(d, n);
        if j == -1 {
            break;
        }
        if j == 0 {
            return false;
        }
        d = if d > 0 { -(d + 2) } else { -(d - 2) };
        if d.unsigned_abs() as u128 >= n {
            return false;
        }
    }
    let p: u128 = 1;
    let q_signed: i64 = (1 - d) / 4;
    let q_mod = if q_signed >= 0 {
        (q_signed as u128) % n
    } else {
        n - ((q_signed.unsigned_abs() as u128) % n)
    };
    let d_mod = if d >= 0 {
        (d as u128) % n
    } else {
        n - ((d.unsigned_abs() as u128) % n)
    };

    let delta = n + 1;
    let s = delta.trailing_zeros();
    let odd = delta >> s;

    // Compute U_odd, V_odd by binary ladder.
    let mut u: u128 = 1;
    let mut v: u128 = p;
    let mut qk = q_mod;
    let inv2 = n.div_ceil(2); // n odd, so this is 2^{-1} mod n
    let bits = 128 - odd.leading_zeros();
    for i in (0..bits - 1).rev() {
        // double
        u = mod_mul(u, v, n);
        v = mod_mul(v, v, n);
        v = (v + n - mod_mul(2, qk, n) % n) % n;
        qk = mod_mul(qk, qk, n);
        if (odd >> i) & 1 == 1 {
            // increment
            let u2 = mod_mul(mod_mul(p, u, n) + v, inv2, n);
            let v2 = mod_mul(mod_mul(d_mod, u, n) + mod_mul(p, v, n), inv2, n);
            u = u2;
            v = v2;
            qk = mod_mul(qk, q_mod, n);
        }
    }
    if u == 0 || v == 0 {
        return true;
    }
    for _ in 1..s {
        u = mod_mul(u, v, n);
        v = mod_mul(v, v, n);
        v = (v + n - mod_mul(2, qk, n) % n) % n;
        qk = mod_mul(qk, qk, n);
        if v == 0 {
            return true;
        }
    }
    false
}

fn jacobi(mut a: i64, n: u128) -> i32 {
    let mut n = n;
    let mut a_mod = if a >= 0 {
        (a as u128) % n
    } else {
        a = -a;
        n - ((a as u128) % n)
    };
    let mut result: i32 = 1;
    while a_mod != 0 {
        while a_mod % 2 == 0 {
            a_mod /= 2;
            let r = n % 8;
            if r == 3 || r == 5 {
                result = -result;
            }
        }
        std::mem::swap(&mut a_mod, &mut n);
        if a_mod % 4 == 3 && n % 4 == 3 {
            result = -result;
        }
        a_mod %= n;
    }
    if n == 1 {
        result
    } else {
        0
    }
}

/// Deterministic primality test for the 128-bit range.
///
/// Below 3.317e24 the fixed 13-base Miller-Rabin witness set is a proven
/// decision procedure; above that we additionally require a strong Lucas
/// test (Baillie-PSW), for which no 128-bit counterexample exists.
pub fn is_prime(n: u128) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &[2u128, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n.is_multiple_of(p) {
            return false;
        }
    }
    const MR_PROVEN_BOUND: u128 = 3_317_044_064_679_887_385_961_981;
    let bases: &[u128] = &[2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if !bases.iter().all(|&b| strong_probable_prime(n, b)) {
        return false;
    }
    if n < MR_PROVEN_BOUND {
        return true;
    }
    strong_lucas_probable_prime(n)
}

/// Exact prime-power decomposition of a 128-bit integer.
///
/// Primes are strictly increasing and each listed prime is certified by
/// [`is_prime`]; the product of prime^exponent reconstructs `n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    pub n: u128,
    pub factors: Vec<(u128, u32)>,
}

impl Factorization {
    /// Distinct primes, ascending.
    pub fn primes(&self) -> impl Iterator<Item = u128> + '_ {
        self.factors.iter().map(|&(p, _)| p)
    }

    /// Product of the distinct primes of n.
    pub fn radical(&self) -> u128 {
        self.primes().product()
    }

    /// Euler's totient of n.
    pub fn euler_phi(&self) -> u128 {
        let mut phi: u128 = 1;
        for &(p, e) in &self.factors {
            phi *= p.pow(e - 1) * (p - 1);
        }
        phi
    }

    /// All divisors of n, ascending.
    pub fn divisors(&self) -> Vec<u128> {
        let mut divs = vec![1u128];
        for &(p, e) in &self.factors {
            let prev = divs.clone();
            let mut pe = 1u128;
            for _ in 0..e {
                pe *= p;
                divs.extend(prev.iter().map(|d| d * pe));
            }
        }
        divs.sort_unstable();
        divs
    }

    /// theta(n) = phi(n)/n as an exact rational, i.e. prod (1 - 1/p).
    pub fn theta(&self) -> BigRational {
        let mut t = BigRational::one();
        for p in self.primes() {
            t *= BigRational::new(BigUint::from(p - 1).into(), BigUint::from(p).into());
        }
        t
    }
}

fn pollard_rho_brent(n: u128) -> Result<u128, Error> {
    // Brent's cycle variant with batched gcds.
    debug_assert!(n % 2 == 1 && n > 1 && !is_prime(n));
    for c in 1..=RHO_RETRIES {
        let c = c as u128;
        let mut y: u128 = 2;
        let mut spent: u64 = 0;
        let m: u64 = 128;
        let mut g: u128 = 1;
        let mut r: u64 = 1;
        let mut q: u128 = 1;
        let mut x = y;
        let mut ys = y;
        while g == 1 && spent < RHO_ITERATIONS {
            x = y;
            for _ in 0..r {
                y = (mod_mul(y, y, n) + c) % n;
            }
            let mut k: u64 = 0;
            while k < r && g == 1 {
                ys = y;
                let lim = m.min(r - k);
                for _ in 0..lim {
                    y = (mod_mul(y, y, n) + c) % n;
                    let diff = x.abs_diff(y);
                    q = mod_mul(q, diff, n);
                }
                g = gcd(q, n);
                k += lim;
                spent += lim;
            }
            r *= 2;
        }
        if g == n {
            // Backtrack one step at a time.
            g = 1;
            while g == 1 {
                ys = (mod_mul(ys, ys, n) + c) % n;
                let diff = x.abs_diff(ys);
                g = gcd(diff, n);
            }
        }
        if g != n && g != 1 {
            return Ok(g);
        }
    }
    Err(Error::FactorEffortExceeded { n })
}

pub fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Complete factorization: trial division by primes below 10^5, then
/// Pollard rho (Brent) on the remaining cofactors.
pub fn factorize(n: u128) -> Result<Factorization, Error> {
    assert!(n >= 1, "factorize requires n >= 1");
    if n <= u64::MAX as u128 {
        return factorize_u64(n as u64);
    }
    let input = n;
    let mut n = n;
    let mut factors: Vec<(u128, u32)> = Vec::new();
    for &p in SMALL_PRIMES.iter() {
        let p = p as u128;
        if p * p > n {
            break;
        }
        if n.is_multiple_of(p) {
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            factors.push((p, e));
        }
    }
    if n > 1 {
        let mut stack = vec![n];
        while let Some(m) = stack.pop() {
            if is_prime(m) {
                push_prime(&mut factors, m);
            } else if let Some(root) = exact_root(m) {
                // rho can stall on perfect powers; peel them first
                let (b, k) = root;
                for _ in 0..k {
                    stack.push(b);
                }
            } else {
                let d = pollard_rho_brent(m)?;
                stack.push(d);
                stack.push(m / d);
            }
        }
    }
    factors.sort_unstable();
    // merge duplicates produced by the stack
    let mut merged: Vec<(u128, u32)> = Vec::new();
    for (p, e) in factors {
        match merged.last_mut() {
            Some(last) if last.0 == p => last.1 += e,
            _ => merged.push((p, e)),
        }
    }
    debug_assert_eq!(
        merged
            .iter()
            .fold(1u128, |acc, &(p, e)| acc * p.pow(e)),
        input
    );
    Ok(Factorization {
        n: input,
        factors: merged,
    })
}

fn push_prime(factors: &mut Vec<(u128, u32)>, p: u128) {
    factors.push((p, 1));
}

/// 64-bit fast path: same strategy, native-width divisions, with primality
/// checkpoints so a prime cofactor exits trial division early.
fn factorize_u64(n: u64) -> Result<Factorization, Error> {
    let input = n;
    let mut n = n;
    let mut factors: Vec<(u128, u32)> = Vec::new();
    let mut checkpoint = 1usize << 8;
    for (i, &p) in SMALL_PRIMES.iter().enumerate() {
        if p * p > n {
            break;
        }
        if n.is_multiple_of(p) {
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            factors.push((p as u128, e));
        }
        if i >= checkpoint {
            checkpoint *= 8;
            if n == 1 || is_prime(n as u128) {
                break;
            }
        }
    }
    if n > 1 {
        let mut stack = vec![n as u128];
        while let Some(m) = stack.pop() {
            if is_prime(m) {
                push_prime(&mut factors, m);
            } else if let Some((b, k)) = exact_root(m) {
                for _ in 0..k {
                    stack.push(b);
                }
            } else {
                let d = pollard_rho_brent(m)?;
                stack.push(d);
                stack.push(m / d);
            }
        }
    }
    factors.sort_unstable();
    let mut merged: Vec<(u128, u32)> = Vec::new();
    for (p, e) in factors {
        match merged.last_mut() {
            Some(last) if last.0 == p => last.1 += e,
            _ => merged.push((p, e)),
        }
    }
    debug_assert_eq!(
        merged.iter().fold(1u128, |acc, &(p, e)| acc * p.pow(e)),
        input as u128
    );
    Ok(Factorization {
        n: input as u128,
        factors: merged,
    })
}

/// Factor a product given as its (pairwise not necessarily coprime) parts,
/// merging the per-part factorizations. Cheaper than factoring the product
/// when the parts are small, e.g. q^4 - 1 = (q-1)(q+1)(q^2+1).
pub fn factorize_product(parts: &[u128]) -> Result<Factorization, Error> {
    let mut merged: std::collections::BTreeMap<u128, u32> = std::collections::BTreeMap::new();
    let mut n: u128 = 1;
    for &part in parts {
        n *= part;
        for (p, e) in factorize(part)?.factors {
            *merged.entry(p).or_insert(0) += e;
        }
    }
    Ok(Factorization {
        n,
        factors: merged.into_iter().collect(),
    })
}

/// If m = b^k with k >= 2, return (b, k) for the largest such k.
fn exact_root(m: u128) -> Option<(u128, u32)> {
    for k in (2..=127u32).rev() {
        if (m >> k) == 0 && m > 1 {
            continue;
        }
        let b = integer_kth_root(m, k);
        if b >= 2 && b.checked_pow(k) == Some(m) {
            return Some((b, k));
        }
    }
    None
}

fn integer_kth_root(m: u128, k: u32) -> u128 {
    if m == 0 {
        return 0;
    }
    let mut lo: u128 = 1;
    let mut hi: u128 = 1u128 << (128 / k + 1).min(127);
    while lo < hi {
        let mid = lo + (hi - lo).div_ceil(2);
        match mid.checked_pow(k) {
            Some(v) if v <= m => lo = mid,
            _ => hi = mid - 1,
        }
    }
    lo
}

/// All prime powers p^a in [lo, hi], ascending, each exactly once.
/// Decompose q as p^alpha for prime p, if possible.
pub fn split_prime_power(q: u64) -> Option<(u64, u32)> {
    if q < 2 {
        return None;
    }
    let f = factorize(q as u128).ok()?;
    match f.factors.as_slice() {
        [(p, e)] => Some((*p as u64, *e)),
        _ => None,
    }
}

pub fn prime_powers_between(lo: u64, hi: u64) -> Vec<(u64, u32, u64)> {
    assert!(2 <= lo && lo <= hi);
    let primes = if hi <= TRIAL_BOUND {
        SMALL_PRIMES.clone()
    } else {
        sieve_primes(hi)
    };
    let mut out = Vec::new();
    for &p in &primes {
        if p > hi {
            break;
        }
        let mut v = p;
        let mut a = 1u32;
        loop {
            if v >= lo {
                out.push((p, a, v));
            }
            match v.checked_mul(p) {
                Some(next) if next <= hi => {
                    v = next;
                    a += 1;
                }
                _ => break,
            }
        }
    }
    out.sort_unstable_by_key(|&(_, _, q)| q);
    out
}
