//! Construction of F_{q^n} for a prime power q = p^alpha, with a primitive
//! element omega and full exponential/logarithm tables.
//!
//! The field is built over the prime field F_p with degree alpha*n; F_q is
//! embedded as the set of indices that are multiples of
//! tau = (q^n - 1)/(q - 1). Multiplication is index addition mod q^n - 1 and
//! primitivity of omega^k is gcd(k, radical(q^n - 1)) = 1, so the searches
//! never have to touch polynomial arithmetic in their inner loops.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::arith::{self, Factorization};
use crate::error::{Error, Result};

/// Default cap on the number of table entries.
pub const DEFAULT_TABLE_BUDGET: u64 = 1 << 28;

/// A field element: zero, or a discrete-log index relative to omega.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Elt {
    Zero,
    Log(u64),
}

impl Elt {
    pub fn is_zero(self) -> bool {
        matches!(self, Elt::Zero)
    }
}

pub struct FieldCtx {
    pub p: u64,
    pub alpha: u32,
    /// Extension degree n over F_q.
    pub n: u32,
    /// q = p^alpha.
    pub q: u64,
    /// q^n = p^(alpha*n).
    pub order: u64,
    /// Monic modulus polynomial over F_p, constant term first, length d+1.
    pub modulus: Vec<u64>,
    /// (q^n - 1)/(q - 1).
    pub tau: u64,
    /// radical(q^n - 1).
    pub radical: u64,
    pub factors: Factorization,
    /// exp[k] = packed polynomial representation of omega^k.
    exp: Vec<u32>,
    /// log[packed] = k for nonzero packed values.
    log: Vec<u32>,
    /// prim[k] = gcd(k, radical) == 1.
    prim: Vec<bool>,
}

fn pow_u64(b: u64, e: u32) -> u64 {
    b.checked_pow(e).expect("field order overflows u64")
}

// ---- polynomial helpers over F_p, constant term first ----

fn poly_mulmod(a: &[u64], b: &[u64], modulus: &[u64], p: u64) -> Vec<u64> {
    let d = modulus.len() - 1;
    let mut prod = vec![0u64; 2 * d];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + ai * bj) % p;
        }
    }
    for i in (d..2 * d).rev() {
        let c = prod[i];
        if c != 0 {
            prod[i] = 0;
            for j in 0..d {
                let sub = (c * modulus[j]) % p;
                prod[i - d + j] = (prod[i - d + j] + p * p - sub) % p;
            }
        }
    }
    prod.truncate(d);
    prod
}

fn poly_powmod(base: &[u64], mut e: u64, modulus: &[u64], p: u64) -> Vec<u64> {
    let d = modulus.len() - 1;
    let mut acc = vec![0u64; d];
    acc[0] = 1;
    let mut base = base.to_vec();
    while e > 0 {
        if e & 1 == 1 {
            acc = poly_mulmod(&acc, &base, modulus, p);
        }
        base = poly_mulmod(&base, &base, modulus, p);
        e >>= 1;
    }
    acc
}

fn is_one(poly: &[u64]) -> bool {
    poly[0] == 1 && poly[1..].iter().all(|&c| c == 0)
}

impl FieldCtx {
    pub fn build(p: u64, alpha: u32, n: u32) -> Result<FieldCtx> {
        Self::build_with_budget(p, alpha, n, DEFAULT_TABLE_BUDGET)
    }

    pub fn build_with_budget(p: u64, alpha: u32, n: u32, budget: u64) -> Result<FieldCtx> {
        assert!(arith::is_prime(p as u128), "p must be prime");
        assert!(alpha >= 1 && n >= 2);
        let d = alpha * n;
        let q = pow_u64(p, alpha);
        let order = pow_u64(p, d);
        if order as u128 > budget as u128 || order - 1 > u32::MAX as u64 {
            return Err(Error::MemoryBudgetExceeded {
                order: order as u128,
                budget,
            });
        }
        let factors128 = arith::factorize(order as u128 - 1)?;
        let modulus = find_primitive_modulus(p, d, &factors128)?;
        let factors = factors128;
        let radical = factors.radical() as u64;
        let tau = (order - 1) / (q - 1);

        let exp = build_exp_table(&modulus, p, order);
        let (log, prim) = derive_tables(&exp, order, &factors);

        Ok(FieldCtx {
            p,
            alpha,
            n,
            q,
            order,
            modulus,
            tau,
            radical,
            factors,
            exp,
            log,
            prim,
        })
    }

    /// Packed base-p representation of an element (0 for zero).
    pub fn packed(&self, x: Elt) -> u64 {
        match x {
            Elt::Zero => 0,
            Elt::Log(k) => self.exp[(k % (self.order - 1)) as usize] as u64,
        }
    }

    pub fn elt_from_packed(&self, v: u64) -> Elt {
        if v == 0 {
            Elt::Zero
        } else {
            Elt::Log(self.log[v as usize] as u64)
        }
    }

    pub fn omega_pow(&self, k: u64) -> Elt {
        Elt::Log(k % (self.order - 1))
    }

    /// Digit-wise base-p addition of packed values (no cross-digit carries).
    pub fn add_packed(&self, mut a: u64, mut b: u64) -> u64 {
        if self.p == 2 {
            return a ^ b;
        }
        let p = self.p;
        let mut out = 0u64;
        let mut scale = 1u64;
        while a != 0 || b != 0 {
            let da = a % p;
            let db = b % p;
            out += ((da + db) % p) * scale;
            a /= p;
            b /= p;
            scale *= p;
        }
        out
    }

    pub fn add(&self, x: Elt, y: Elt) -> Elt {
        self.elt_from_packed(self.add_packed(self.packed(x), self.packed(y)))
    }

    pub fn mul(&self, x: Elt, y: Elt) -> Elt {
        match (x, y) {
            (Elt::Zero, _) | (_, Elt::Zero) => Elt::Zero,
            (Elt::Log(a), Elt::Log(b)) => Elt::Log((a + b) % (self.order - 1)),
        }
    }

    pub fn inv(&self, x: Elt) -> Result<Elt> {
        match x {
            Elt::Zero => Err(Error::ZeroInverse),
            Elt::Log(k) => {
                let n1 = self.order - 1;
                Ok(Elt::Log((n1 - k % n1) % n1))
            }
        }
    }

    pub fn neg(&self, x: Elt) -> Elt {
        if self.p == 2 {
            return x;
        }
        // -1 = omega^{(order-1)/2}
        self.mul(x, Elt::Log((self.order - 1) / 2))
    }

    /// Coefficients in the basis {omega^{d-1}, ..., omega, 1} over F_p.
    pub fn to_affine(&self, x: Elt) -> Vec<u64> {
        let d = (self.alpha * self.n) as usize;
        let mut v = self.packed(x);
        let mut low_first = Vec::with_capacity(d);
        for _ in 0..d {
            low_first.push(v % self.p);
            v /= self.p;
        }
        low_first.reverse();
        low_first
    }

    pub fn from_affine(&self, coeffs: &[u64]) -> Elt {
        let d = (self.alpha * self.n) as usize;
        assert_eq!(coeffs.len(), d, "coefficient list length must be alpha*n");
        let mut packed = 0u64;
        for &c in coeffs {
            packed = packed * self.p + (c % self.p);
        }
        self.elt_from_packed(packed)
    }

    pub fn is_primitive(&self, x: Elt) -> bool {
        match x {
            Elt::Zero => false,
            Elt::Log(k) => self.prim[(k % (self.order - 1)) as usize],
        }
    }

    /// Primitivity of omega^k by index alone.
    #[inline]
    pub fn is_primitive_idx(&self, k: u64) -> bool {
        self.prim[k as usize]
    }

    /// True iff x lies in no proper subfield of F_{q^n} containing F_q.
    pub fn generates(&self, x: Elt) -> bool {
        let k = match x {
            Elt::Zero => return false,
            Elt::Log(k) => k % (self.order - 1),
        };
        for div in 1..self.n {
            if !self.n.is_multiple_of(div) {
                continue;
            }
            let sub_order = pow_u64(self.q, div);
            let stride = (self.order - 1) / (sub_order - 1);
            if k % stride == 0 {
                return false;
            }
        }
        true
    }

    /// The embedded F_q in a fixed order: zero first, then omega^{k*tau}
    /// for k = 0 .. q-2.
    pub fn fq_elements(&self) -> Vec<Elt> {
        let mut out = Vec::with_capacity(self.q as usize);
        out.push(Elt::Zero);
        for k in 0..self.q - 1 {
            out.push(Elt::Log(k * self.tau));
        }
        out
    }

    /// Additive-coset representatives with zero constant coordinate:
    /// all sums c_{n-1} omega^{n-1} + ... + c_1 omega with c_i in F_q, not
    /// all zero, as packed values in lexicographic tuple order.
    pub fn coset_reps_packed(&self) -> Vec<u64> {
        let fq = self.fq_elements();
        let n = self.n as usize;
        // packed value of c * omega^i for each subfield element and power
        let mut scaled = vec![vec![0u64; fq.len()]; n];
        for (i, scaled_i) in scaled.iter_mut().enumerate().skip(1) {
            for (j, &c) in fq.iter().enumerate() {
                scaled_i[j] = self.packed(self.mul(c, Elt::Log(i as u64)));
            }
        }
        let mut out = Vec::new();
        let qn = fq.len();
        let total = qn.pow((n - 1) as u32);
        for mut idx in 1..total {
            let mut packed = 0u64;
            for scaled_i in scaled.iter().take(n).skip(1) {
                packed = self.add_packed(packed, scaled_i[idx % qn]);
                idx /= qn;
            }
            out.push(packed);
        }
        out
    }

    pub fn coset_reps(&self) -> Vec<Elt> {
        self.coset_reps_packed()
            .into_iter()
            .map(|v| self.elt_from_packed(v))
            .collect()
    }

    // ---- binary cache ----

    /// Serialize (header, modulus, exp table) so reconstruction can be
    /// skipped across runs.
    pub fn save_cache<W: Write>(&self, w: &mut W) -> Result<()> {
        w.write_all(b"ZLOG1\0")?;
        for v in [self.p, self.alpha as u64, self.n as u64, self.order] {
            w.write_all(&v.to_le_bytes())?;
        }
        for &c in &self.modulus {
            w.write_all(&c.to_le_bytes())?;
        }
        for &e in &self.exp {
            w.write_all(&e.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn save_cache_file(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.save_cache(&mut f)
    }

    /// Load a cached field, re-verifying that omega has full order before
    /// trusting the table.
    pub fn load_cache<R: Read>(r: &mut R) -> Result<FieldCtx> {
        let bad = |reason: &str| Error::CheckpointMismatch {
            reason: format!("field cache: {reason}"),
        };
        let mut magic = [0u8; 6];
        r.read_exact(&mut magic)?;
        if &magic != b"ZLOG1\0" {
            return Err(bad("bad magic"));
        }
        let mut buf8 = [0u8; 8];
        let mut next_u64 = |r: &mut R| -> Result<u64> {
            r.read_exact(&mut buf8)?;
            Ok(u64::from_le_bytes(buf8))
        };
        let p = next_u64(r)?;
        let alpha = next_u64(r)? as u32;
        let n = next_u64(r)? as u32;
        let order = next_u64(r)?;
        if pow_u64(p, alpha * n) != order {
            return Err(bad("order disagrees with (p, alpha, n)"));
        }
        let d = (alpha * n) as usize;
        let mut modulus = Vec::with_capacity(d + 1);
        for _ in 0..=d {
            modulus.push(next_u64(r)?);
        }
        let mut exp = Vec::with_capacity(order as usize - 1);
        let mut buf4 = [0u8; 4];
        for _ in 0..order - 1 {
            r.read_exact(&mut buf4)?;
            exp.push(u32::from_le_bytes(buf4));
        }
        // the table must be a permutation of the nonzero packed values
        let mut seen = vec![false; order as usize];
        for &v in &exp {
            if v == 0 || v as u64 >= order || seen[v as usize] {
                return Err(bad("exp table is not a permutation of the nonzero values"));
            }
            seen[v as usize] = true;
        }
        let factors = arith::factorize(order as u128 - 1)?;
        // omega must have exact order q^n - 1
        for prime in factors.primes() {
            let idx = (order as u128 - 1) / prime;
            if exp[idx as usize] == 1 {
                return Err(bad("omega order is not q^n - 1"));
            }
        }
        let (log, prim) = derive_tables(&exp, order, &factors);
        let q = pow_u64(p, alpha);
        Ok(FieldCtx {
            p,
            alpha,
            n,
            q,
            order,
            modulus,
            tau: (order - 1) / (q - 1),
            radical: factors.radical() as u64,
            factors,
            exp,
            log,
            prim,
        })
    }

    pub fn load_cache_file(path: &Path) -> Result<FieldCtx> {
        let mut f = std::io::BufReader::new(std::fs::File::open(path)?);
        Self::load_cache(&mut f)
    }
}

/// Lexicographic search over monic degree-d polynomials for one whose root
/// x has multiplicative order exactly p^d - 1. An element of full order
/// forces the quotient ring to be a field, so irreducibility comes for free.
fn find_primitive_modulus(p: u64, d: u32, factors: &Factorization) -> Result<Vec<u64>> {
    let d = d as usize;
    let count = pow_u64(p, d as u32);
    let group = count - 1;
    let x: Vec<u64> = (0..d).map(|i| u64::from(i == 1)).collect();
    for packed in 0..count {
        if packed % p == 0 {
            continue; // zero constant term: x is not a unit
        }
        let mut modulus = Vec::with_capacity(d + 1);
        let mut v = packed;
        for _ in 0..d {
            modulus.push(v % p);
            v /= p;
        }
        modulus.push(1);
        if !is_one(&poly_powmod(&x, group, &modulus, p)) {
            continue;
        }
        if factors
            .primes()
            .all(|l| !is_one(&poly_powmod(&x, (group as u128 / l) as u64, &modulus, p)))
        {
            return Ok(modulus);
        }
    }
    Err(Error::NoPrimitivePolynomial { p, degree: d as u32 })
}

fn build_exp_table(modulus: &[u64], p: u64, order: u64) -> Vec<u32> {
    let d = modulus.len() - 1;
    let mut exp = Vec::with_capacity(order as usize - 1);
    let mut cur = vec![0u64; d];
    cur[0] = 1;
    for _ in 0..order - 1 {
        let mut packed = 0u64;
        for &c in cur.iter().rev() {
            packed = packed * p + c;
        }
        exp.push(packed as u32);
        // multiply by x and reduce
        let lead = cur[d - 1];
        for i in (1..d).rev() {
            cur[i] = cur[i - 1];
        }
        cur[0] = 0;
        if lead != 0 {
            for i in 0..d {
                cur[i] = (cur[i] + p * p - lead * modulus[i] % p) % p;
            }
        }
    }
    debug_assert!(is_one(&cur), "omega does not return to 1 after q^n - 1 steps");
    exp
}

fn derive_tables(exp: &[u32], order: u64, factors: &Factorization) -> (Vec<u32>, Vec<bool>) {
    let mut log = vec![u32::MAX; order as usize];
    for (k, &v) in exp.iter().enumerate() {
        debug_assert!(log[v as usize] == u32::MAX, "exp table is not a permutation");
        log[v as usize] = k as u32;
    }
    let group = order - 1;
    let mut prim = vec![true; group as usize];
    prim[0] = group == 1;
    for l in factors.primes() {
        let l = l as u64;
        let mut i = 0u64;
        while i < group {
            prim[i as usize] = false;
            i += l;
        }
    }
    // identity omega^0 is never primitive unless the group is trivial
    if group > 1 {
        prim[0] = false;
    }
    (log, prim)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_field_examples() {
        let f27 = FieldCtx::build(3, 1, 3).unwrap();
        assert_eq!(f27.order, 27);
        assert_eq!(f27.tau, 13);
        assert_eq!(f27.radical, 26);

        let f16 = FieldCtx::build(2, 1, 4).unwrap();
        assert_eq!(f16.order, 16);
        assert_eq!(f16.radical, 15);
    }

    #[test]
    fn q121_field() {
        let ctx = FieldCtx::build(11, 2, 3).unwrap();
        assert_eq!(ctx.q, 121);
        assert_eq!(ctx.order, 121u64.pow(3));
        assert_eq!(ctx.tau, (ctx.order - 1) / 120);
        // the embedded F_q really has q elements closed under the operations
        let fq = ctx.fq_elements();
        assert_eq!(fq.len(), 121);
    }

    #[test]
    fn f8_addition_matches_polynomials() {
        let ctx = FieldCtx::build(2, 1, 3).unwrap();
        // lexicographic search settles on x^3 + x + 1, so omega^3 = omega + 1
        assert_eq!(ctx.modulus, vec![1, 1, 0, 1]);
        assert_eq!(ctx.add(Elt::Log(1), Elt::Log(0)), Elt::Log(3));
        assert_eq!(ctx.add(Elt::Log(1), Elt::Zero), Elt::Log(1));
    }

    #[test]
    fn mul_is_index_addition() {
        let ctx = FieldCtx::build(5, 1, 3).unwrap();
        let n1 = ctx.order - 1;
        for (a, b) in [(3u64, 7u64), (100, 60), (n1 - 1, 1)] {
            assert_eq!(ctx.mul(Elt::Log(a), Elt::Log(b)), Elt::Log((a + b) % n1));
        }
    }

    #[test]
    fn primitivity_examples() {
        let ctx = FieldCtx::build(3, 1, 3).unwrap();
        assert!(!ctx.is_primitive(Elt::Log(0)));
        assert!(ctx.is_primitive(Elt::Log(1)));
        assert!(!ctx.is_primitive(Elt::Log(13))); // gcd(13, 26) = 13
        assert!(!ctx.is_primitive(Elt::Zero));
    }

    #[test]
    fn generates_examples() {
        let ctx = FieldCtx::build(3, 1, 3).unwrap();
        assert!(!ctx.generates(Elt::Zero));
        assert!(ctx.generates(Elt::Log(1)));
        assert!(!ctx.generates(Elt::Log(13))); // omega^13 is in F_3
    }

    #[test]
    fn primitive_count_is_phi() {
        for (p, alpha, n) in [(2u64, 1u32, 3u32), (3, 1, 3), (5, 1, 3), (2, 2, 3), (3, 1, 4)] {
            let ctx = FieldCtx::build(p, alpha, n).unwrap();
            let count = (0..ctx.order - 1)
                .filter(|&k| ctx.is_primitive(Elt::Log(k)))
                .count() as u128;
            assert_eq!(count, ctx.factors.euler_phi(), "q={} n={}", ctx.q, n);
        }
    }

    #[test]
    fn subfield_is_closed() {
        for (p, alpha, n) in [(3u64, 1u32, 3u32), (2, 2, 3), (5, 1, 4)] {
            let ctx = FieldCtx::build(p, alpha, n).unwrap();
            let fq = ctx.fq_elements();
            assert_eq!(fq.len() as u64, ctx.q);
            let set: std::collections::HashSet<Elt> = fq.iter().copied().collect();
            for &x in &fq {
                for &y in &fq {
                    assert!(set.contains(&ctx.add(x, y)));
                    assert!(set.contains(&ctx.mul(x, y)));
                }
                if !x.is_zero() {
                    assert!(set.contains(&ctx.inv(x).unwrap()));
                }
            }
        }
    }

    #[test]
    fn generator_failures_count() {
        // n=3: exactly the q elements of F_q fail; n=4: the q^2 of F_{q^2}.
        for q in [2u64, 3, 4, 5] {
            let (p, alpha) = if q == 4 { (2, 2) } else { (q, 1) };
            let ctx3 = FieldCtx::build(p, alpha, 3).unwrap();
            let fails3 = std::iter::once(Elt::Zero)
                .chain((0..ctx3.order - 1).map(Elt::Log))
                .filter(|&x| !ctx3.generates(x))
                .count() as u64;
            assert_eq!(fails3, q, "n=3 q={q}");
            let ctx4 = FieldCtx::build(p, alpha, 4).unwrap();
            let fails4 = std::iter::once(Elt::Zero)
                .chain((0..ctx4.order - 1).map(Elt::Log))
                .filter(|&x| !ctx4.generates(x))
                .count() as u64;
            assert_eq!(fails4, q * q, "n=4 q={q}");
        }
    }

    #[test]
    fn affine_round_trip() {
        let ctx = FieldCtx::build(5, 1, 3).unwrap();
        assert_eq!(ctx.from_affine(&[0, 0, 0]), Elt::Zero);
        assert_eq!(ctx.from_affine(&[0, 1, 0]), Elt::Log(1));
        for k in 0..ctx.order - 1 {
            let x = Elt::Log(k);
            assert_eq!(ctx.from_affine(&ctx.to_affine(x)), x);
        }
    }

    #[test]
    fn distributivity_sampled() {
        use rand::{Rng, SeedableRng};
        let ctx = FieldCtx::build(5, 1, 3).unwrap();
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        let random_elt = |rng: &mut rand::rngs::StdRng| -> Elt {
            let v = rng.gen_range(0..ctx.order);
            if v == 0 {
                Elt::Zero
            } else {
                Elt::Log(v - 1)
            }
        };
        for _ in 0..10_000 {
            let a = random_elt(&mut rng);
            let b = random_elt(&mut rng);
            let c = random_elt(&mut rng);
            let lhs = ctx.mul(a, ctx.add(b, c));
            let rhs = ctx.add(ctx.mul(a, b), ctx.mul(a, c));
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn coset_reps_cover_expected_count() {
        for (p, alpha, n) in [(3u64, 1u32, 3u32), (2, 2, 3), (3, 1, 4)] {
            let ctx = FieldCtx::build(p, alpha, n).unwrap();
            let reps = ctx.coset_reps();
            assert_eq!(reps.len() as u64, ctx.q.pow(n - 1) - 1);
            let uniq: std::collections::HashSet<Elt> = reps.iter().copied().collect();
            assert_eq!(uniq.len(), reps.len());
        }
    }

    #[test]
    fn cache_round_trip() {
        let ctx = FieldCtx::build(3, 1, 3).unwrap();
        let mut buf = Vec::new();
        ctx.save_cache(&mut buf).unwrap();
        let loaded = FieldCtx::load_cache(&mut buf.as_slice()).unwrap();
        assert_eq!(loaded.modulus, ctx.modulus);
        assert_eq!(loaded.tau, ctx.tau);
        assert_eq!(loaded.radical, ctx.radical);
        for k in 0..ctx.order - 1 {
            assert_eq!(loaded.packed(Elt::Log(k)), ctx.packed(Elt::Log(k)));
        }
        // a corrupted table must be rejected
        let mut bad = buf.clone();
        let last = bad.len() - 1;
        bad[last] ^= 1;
        assert!(FieldCtx::load_cache(&mut bad.as_slice()).is_err());
    }

    #[test]
    fn budget_is_enforced() {
        match FieldCtx::build_with_budget(2, 1, 4, 8) {
            Err(Error::MemoryBudgetExceeded { .. }) => {}
            Err(other) => panic!("expected budget error, got {other:?}"),
            Ok(_) => panic!("expected budget error, got a field"),
        }
    }
}
