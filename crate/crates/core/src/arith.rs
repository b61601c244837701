//! Exact integer and rational helpers: square detection, primality,
//! factorization of the integers that show up as ideal norms.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;

/// Floor of the square root of a non-negative integer.
pub fn isqrt(n: &BigInt) -> BigInt {
    assert!(!n.is_negative(), "isqrt of negative integer");
    n.sqrt()
}

/// Returns `Some(r)` with `r*r == n`, `r >= 0`, when `n` is a perfect square.
pub fn perfect_square(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let r = n.sqrt();
    if &r * &r == *n {
        Some(r)
    } else {
        None
    }
}

/// Rational square root in lowest terms, when one exists.
pub fn rational_sqrt(q: &BigRational) -> Option<BigRational> {
    if q.is_negative() {
        return None;
    }
    let n = perfect_square(q.numer())?;
    let d = perfect_square(q.denom())?;
    Some(BigRational::new(n, d))
}

/// Splits a positive rational as `s^2 * f` with `f` squarefree; returns `(s, f)`.
/// For negative input the sign goes into `f`.
pub fn split_square_part(q: &BigRational) -> (BigRational, BigRational) {
    assert!(!q.is_zero());
    let sign: BigInt = if q.is_negative() {
        BigInt::from(-1)
    } else {
        BigInt::one()
    };
    let (sn, fn_) = split_square_int(&q.numer().abs());
    let (sd, fd) = split_square_int(&q.denom().abs());
    // n/d = (sn^2 fn)/(sd^2 fd) = (sn/(sd*fd))^2 * fn*fd
    let s = BigRational::new(sn, &sd * &fd);
    let f = BigRational::from(sign * fn_ * fd);
    (s, f)
}

fn split_square_int(n: &BigInt) -> (BigInt, BigInt) {
    let mut s = BigInt::one();
    let mut f = BigInt::one();
    for (p, e) in factor(n) {
        if e % 2 == 1 {
            f *= &p;
        }
        s *= p.pow(e / 2);
    }
    (s, f)
}

pub fn is_squarefree(n: &BigInt) -> bool {
    let n = n.abs();
    if n.is_zero() {
        return false;
    }
    factor(&n).iter().all(|(_, e)| *e == 1)
}

/// Deterministic Miller-Rabin below 3.3e24, probabilistic with extra bases above.
pub fn is_prime(n: &BigInt) -> bool {
    if n <= &BigInt::one() {
        return false;
    }
    let n = n.to_biguint().unwrap();
    let small: [u32; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for p in small {
        let p = BigUint::from(p);
        if n == p {
            return true;
        }
        if (&n % &p).is_zero() {
            return false;
        }
    }
    let one = BigUint::one();
    let two = BigUint::from(2u32);
    let nm1 = &n - &one;
    let s = nm1.trailing_zeros().unwrap();
    let d = &nm1 >> s;
    let mut bases: Vec<BigUint> = small.iter().map(|&p| BigUint::from(p)).collect();
    if n.bits() > 82 {
        // beyond the proven range, add fixed pseudo-random bases
        for b in [41u32, 61, 73, 1662803, 9780504, 1795265022] {
            bases.push(BigUint::from(b));
        }
    }
    'witness: for a in bases {
        let mut x = a.modpow(&d, &n);
        if x == one || x == nm1 {
            continue;
        }
        for _ in 1..s {
            x = x.modpow(&two, &n);
            if x == nm1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Factors `|n|` into primes with multiplicity. `n` must be nonzero.
/// Results are memoized: the pipeline revisits the same ideal norms many
/// times while recomputing supports.
pub fn factor(n: &BigInt) -> BTreeMap<BigInt, u32> {
    use std::sync::Mutex;
    static CACHE: Mutex<Option<std::collections::HashMap<BigInt, BTreeMap<BigInt, u32>>>> =
        Mutex::new(None);
    let key = n.abs();
    assert!(!key.is_zero(), "factor(0)");
    if key.bits() > 24 {
        if let Some(hit) = CACHE
            .lock()
            .unwrap()
            .get_or_insert_with(Default::default)
            .get(&key)
        {
            return hit.clone();
        }
    }
    let out = factor_uncached(&key);
    if key.bits() > 24 {
        let mut guard = CACHE.lock().unwrap();
        let map = guard.get_or_insert_with(Default::default);
        if map.len() > 100_000 {
            map.clear();
        }
        map.insert(key, out.clone());
    }
    out
}

fn factor_uncached(n: &BigInt) -> BTreeMap<BigInt, u32> {
    let mut out = BTreeMap::new();
    let mut m = n.abs();
    // trial division by small primes
    let mut p = BigInt::from(2);
    while &(&p * &p) <= &m && p < BigInt::from(100_000) {
        while (&m % &p).is_zero() {
            *out.entry(p.clone()).or_insert(0) += 1;
            m /= &p;
        }
        p += if p == BigInt::from(2) { 1 } else { 2 };
    }
    if m.is_one() {
        return out;
    }
    let mut stack = vec![m];
    while let Some(c) = stack.pop() {
        if c.is_one() {
            continue;
        }
        if is_prime(&c) {
            *out.entry(c).or_insert(0) += 1;
            continue;
        }
        let d = pollard_brent(&c);
        stack.push(&c / &d);
        stack.push(d);
    }
    out
}

/// Brent's variant of Pollard's rho with batched gcds; cofactors that fit
/// 126 bits run in u128 Montgomery arithmetic.
fn pollard_brent(n: &BigInt) -> BigInt {
    if n.bits() <= 126 {
        let m = u128::try_from(n.to_biguint().unwrap()).unwrap();
        let mut c: u128 = 1;
        loop {
            if let Some(d) = brent_round_u128(m, c) {
                if d != 1 && d != m {
                    return BigInt::from(d);
                }
            }
            c += 1;
        }
    }
    let nu = n.to_biguint().unwrap();
    let one = BigUint::one();
    let mut c = BigUint::from(1u32);
    loop {
        if let Some(d) = brent_round(&nu, &c) {
            if d != one && d != nu {
                return BigInt::from(d);
            }
        }
        c += 1u32;
    }
}

/// 256-bit product of two u128 values as (hi, lo).
#[inline]
fn mul_wide(a: u128, b: u128) -> (u128, u128) {
    let (a1, a0) = (a >> 64, a & u64::MAX as u128);
    let (b1, b0) = (b >> 64, b & u64::MAX as u128);
    let ll = a0 * b0;
    let lh = a0 * b1;
    let hl = a1 * b0;
    let hh = a1 * b1;
    let (mid, c1) = lh.overflowing_add(hl);
    let (lo, c2) = ll.overflowing_add(mid << 64);
    let hi = hh + (mid >> 64) + ((c1 as u128) << 64) + c2 as u128;
    (hi, lo)
}

/// Montgomery context for odd m < 2^126.
struct Mont {
    m: u128,
    neg_inv: u128, // -m^{-1} mod 2^128
    r: u128,       // 2^128 mod m
}

impl Mont {
    fn new(m: u128) -> Mont {
        debug_assert!(m & 1 == 1);
        // Newton iteration for m^{-1} mod 2^128
        let mut inv: u128 = m; // correct mod 2^3
        for _ in 0..6 {
            inv = inv.wrapping_mul(2u128.wrapping_sub(m.wrapping_mul(inv)));
        }
        debug_assert_eq!(m.wrapping_mul(inv), 1);
        let r = (u128::MAX % m + 1) % m;
        Mont {
            m,
            neg_inv: inv.wrapping_neg(),
            r,
        }
    }

    /// REDC of a 256-bit value (hi, lo): returns hi_lo * 2^-128 mod m.
    #[inline]
    fn redc(&self, hi: u128, lo: u128) -> u128 {
        let u = lo.wrapping_mul(self.neg_inv);
        let (um_hi, um_lo) = mul_wide(u, self.m);
        let carry = (lo != 0 || um_lo != 0) as u128;
        debug_assert_eq!(lo.wrapping_add(um_lo), 0);
        let mut t = hi + um_hi + carry;
        if t >= self.m {
            t -= self.m;
        }
        t
    }

    #[inline]
    fn mul(&self, a: u128, b: u128) -> u128 {
        let (hi, lo) = mul_wide(a, b);
        self.redc(hi, lo)
    }

    /// Converts into the Montgomery domain.
    fn enter(&self, a: u128) -> u128 {
        // a * 2^128 mod m by repeated doubling of a * (2^128 mod m) is wrong;
        // do it with 128 doublings of a mod m instead (setup-only cost)
        let mut acc = a % self.m;
        for _ in 0..128 {
            acc <<= 1;
            if acc >= self.m {
                acc -= self.m;
            }
        }
        acc
    }
}

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

fn brent_round_u128(m: u128, c: u128) -> Option<u128> {
    let ctx = Mont::new(m);
    let c_dom = ctx.enter(c);
    let f = |v: u128| {
        let sq = ctx.mul(v, v);
        let s = sq + c_dom;
        if s >= m {
            s - m
        } else {
            s
        }
    };
    let batch = 256u64;
    let mut y = ctx.enter(2);
    let mut x = y;
    let mut ys = y;
    let mut r = 1u64;
    let mut q = ctx.r; // 1 in the Montgomery domain
    let mut g = 1u128;
    let budget = 2_000_000_000u64;
    let mut used = 0u64;
    while g == 1 {
        x = y;
        for _ in 0..r {
            y = f(y);
        }
        let mut k = 0u64;
        while k < r && g == 1 {
            ys = y;
            let steps = batch.min(r - k);
            for _ in 0..steps {
                y = f(y);
                let diff = if x > y { x - y } else { y - x };
                q = ctx.mul(q, diff);
            }
            // q is defined in-domain; gcd with m is unaffected by the 2^-128 factors
            g = gcd_u128(q, m);
            if q == 0 {
                g = m;
            }
            k += steps;
            used += steps;
            if used > budget {
                return None;
            }
        }
        r *= 2;
    }
    if g == m {
        loop {
            ys = f(ys);
            let diff = if x > ys { x - ys } else { ys - x };
            let d = gcd_u128(diff, m);
            if d != 1 {
                return Some(d);
            }
        }
    }
    Some(g)
}

fn brent_round(n: &BigUint, c: &BigUint) -> Option<BigUint> {
    let one = BigUint::one();
    let f = |v: &BigUint| (v * v + c) % n;
    let batch = 128u64;
    let mut y = BigUint::from(2u32);
    let mut x = y.clone();
    let mut ys = y.clone();
    let mut r = 1u64;
    let mut q = BigUint::one();
    let mut g = BigUint::one();
    let budget = 400_000_000u64;
    let mut used = 0u64;
    while g == one {
        x = y.clone();
        for _ in 0..r {
            y = f(&y);
        }
        let mut k = 0u64;
        while k < r && g == one {
            ys = y.clone();
            let steps = batch.min(r - k);
            for _ in 0..steps {
                y = f(&y);
                let diff = if x > y { &x - &y } else { &y - &x };
                q = (&q * &diff) % n;
            }
            g = q.gcd(n);
            k += steps;
            used += steps;
            if used > budget {
                return None;
            }
        }
        r *= 2;
    }
    if &g == n {
        // the batch overshot a factor: backtrack one step at a time
        loop {
            ys = f(&ys);
            let diff = if x > ys { &x - &ys } else { &ys - &x };
            let d = diff.gcd(n);
            if d != one {
                return Some(d);
            }
        }
    }
    Some(g)
}

/// Iterator over the rational primes 2, 3, 5, ... via an extendable sieve.
pub struct RationalPrimes {
    found: Vec<u64>,
    cursor: usize,
}

impl RationalPrimes {
    pub fn new() -> Self {
        RationalPrimes {
            found: vec![2, 3],
            cursor: 0,
        }
    }
}

impl Default for RationalPrimes {
    fn default() -> Self {
        Self::new()
    }
}

impl Iterator for RationalPrimes {
    type Item = u64;
    fn next(&mut self) -> Option<u64> {
        if self.cursor < self.found.len() {
            let p = self.found[self.cursor];
            self.cursor += 1;
            return Some(p);
        }
        let mut cand = self.found.last().unwrap() + 2;
        loop {
            if self.found.iter().take_while(|&&q| q * q <= cand).all(|&q| cand % q != 0) {
                self.found.push(cand);
                self.cursor += 1;
                return Some(cand);
            }
            cand += 2;
        }
    }
}

pub fn rat(n: i64) -> BigRational {
    BigRational::from(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}
