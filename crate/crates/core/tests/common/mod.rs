//! Shared helpers for the integration suites: an independent brute-force
//! isotropy oracle over completions, random element generators, and the
//! F_2-linear fingerprint used to certify independence of square classes.

use num_bigint::BigInt;
use rand::rngs::StdRng;
use rand::Rng;
use std::sync::Arc;
use wittdec::arith::rat;
use wittdec::field::{FieldElt, NumberField};
use wittdec::ideals::{ord_at, PrimeCursor, PrimeIdeal};
use wittdec::local::{self, Place};
use wittdec::residue::ResidueRing;

/// Exhaustive primitive-zero search for a diagonal form modulo P^N with
/// N = 2 ord_P(2) + 1 + (max coefficient valuation) + 1. Independent of the
/// invariant-based classification: it enumerates value sets of a_i x_i^2 in
/// the additive group of O/P^N and convolves them.
pub fn isotropy_oracle(
    field: &Arc<NumberField>,
    coeffs: &[FieldElt],
    prime: &PrimeIdeal,
) -> bool {
    let n = coeffs.len();
    assert!(n >= 1);
    let maxval = coeffs
        .iter()
        .map(|c| ord_at(c, prime).expect("nonzero coefficient"))
        .max()
        .unwrap();
    assert!(maxval >= 0, "oracle needs integral-at-P coefficients");
    let e = if prime.is_dyadic() { prime.ram_index } else { 0 };
    let power = 2 * e + 1 + maxval as u32 + 1;
    let ring = ResidueRing::new(prime, power);
    let moduli = ring.snf_moduli();
    let (d1, d2) = match moduli.len() {
        1 => (moduli[0], 1),
        2 => (moduli[0], moduli[1]),
        _ => panic!("oracle supports degree <= 2"),
    };
    let size = (d1 * d2) as usize;
    let idx = |s: &[u64]| -> usize {
        let a = s[0];
        let b = if s.len() > 1 { s[1] } else { 0 };
        (a * d2 + b) as usize
    };
    // value sets of a_i x^2 over all x and over units x
    let elements = ring.elements();
    let mut full: Vec<Vec<bool>> = vec![vec![false; size]; n];
    let mut unit: Vec<Vec<bool>> = vec![vec![false; size]; n];
    for (i, c) in coeffs.iter().enumerate() {
        let cr = ring.from_field_elt(c);
        for x in &elements {
            let v = ring.mul(&cr, &ring.mul(x, x));
            let j = idx(&ring.to_snf(&v));
            full[i][j] = true;
            if ring.is_unit(x) {
                unit[i][j] = true;
            }
        }
    }
    let sumset = |a: &[bool], b: &[bool]| -> Vec<bool> {
        let mut out = vec![false; size];
        let a_bits: Vec<usize> = a.iter().enumerate().filter(|(_, &v)| v).map(|(i, _)| i).collect();
        let b_bits: Vec<usize> = b.iter().enumerate().filter(|(_, &v)| v).map(|(i, _)| i).collect();
        for &ai in &a_bits {
            let (a1, a2) = (ai as u64 / d2, ai as u64 % d2);
            for &bi in &b_bits {
                let (b1, b2) = (bi as u64 / d2, bi as u64 % d2);
                let s1 = (a1 + b1) % d1;
                let s2 = (a2 + b2) % d2;
                out[(s1 * d2 + s2) as usize] = true;
            }
        }
        out
    };
    let mut zero_only = vec![false; size];
    zero_only[0] = true;
    // prefix[i] = value sumset of coordinates < i, suffix[i] = of coordinates > i
    let mut prefix: Vec<Vec<bool>> = Vec::with_capacity(n + 1);
    prefix.push(zero_only.clone());
    for i in 0..n {
        let next = sumset(&prefix[i], &full[i]);
        prefix.push(next);
    }
    let mut suffix: Vec<Vec<bool>> = vec![zero_only.clone(); n + 1];
    for i in (0..n).rev() {
        suffix[i] = sumset(&suffix[i + 1], &full[i]);
    }
    // a primitive zero has some unit coordinate i
    for i in 0..n {
        let around = sumset(&prefix[i], &suffix[i + 1]);
        for (j, &present) in unit[i].iter().enumerate() {
            if !present {
                continue;
            }
            // need -value(j) in around
            let (a1, a2) = (j as u64 / d2, j as u64 % d2);
            let neg = (((d1 - a1) % d1) * d2 + (d2 - a2) % d2) as usize;
            if around[neg] {
                return true;
            }
        }
    }
    false
}

/// Library-side isotropy verdict for the same local form.
pub fn library_isotropic(
    field: &Arc<NumberField>,
    coeffs: &[FieldElt],
    prime: &PrimeIdeal,
) -> bool {
    let a = local::local_adim(field, coeffs, &Place::Finite(prime.clone())).unwrap();
    a < coeffs.len()
}

/// A random nonzero element with coefficients bounded by `height`.
pub fn random_elt(field: &Arc<NumberField>, rng: &mut StdRng, height: i64) -> FieldElt {
    loop {
        let coeffs: Vec<_> = (0..field.degree())
            .map(|_| rat(rng.gen_range(-height..=height)))
            .collect();
        let x = field.from_coeffs(coeffs);
        if !x.is_zero() {
            return x;
        }
    }
}

/// A random element with exact valuation `v` at the prime.
pub fn random_elt_with_ord(
    field: &Arc<NumberField>,
    rng: &mut StdRng,
    prime: &PrimeIdeal,
    v: u32,
) -> FieldElt {
    loop {
        let x = random_elt(field, rng, 9);
        if ord_at(&x, prime).unwrap() == 0 {
            let mut out = x;
            for _ in 0..v {
                out = field.mul(&out, &prime.uniformizer);
            }
            return out;
        }
    }
}

/// The 2-adic style F_2 fingerprint of a square class: sign bits at the real
/// places, then per prime either (ord parity, residue character) for
/// non-dyadic primes or Hilbert bits against fixed reference elements for
/// dyadic ones. Every bit is a homomorphism on square classes, so full rank
/// of the fingerprint matrix certifies F_2-independence.
pub fn fingerprint(
    field: &Arc<NumberField>,
    x: &FieldElt,
    primes: &[PrimeIdeal],
) -> Vec<bool> {
    let mut bits = Vec::new();
    for i in 0..field.real_place_count() {
        bits.push(field.sign_at(x, i).unwrap() < 0);
    }
    for p in primes {
        if p.is_dyadic() {
            let place = Place::Finite(p.clone());
            let refs = [
                field.from_i64(-1),
                p.uniformizer.clone(),
                field.from_i64(5),
                field.from_i64(-5),
            ];
            for r in refs {
                bits.push(local::hilbert(field, x, &r, &place).unwrap() == -1);
            }
        } else {
            let v = ord_at(x, p).unwrap();
            bits.push(v % 2 != 0);
            // character of the unit part x / pi^v
            let pi_v = if v >= 0 {
                field.pow(&p.uniformizer, v as u32)
            } else {
                field.inv(&field.pow(&p.uniformizer, (-v) as u32)).unwrap()
            };
            let u = field.div(x, &pi_v).unwrap();
            bits.push(local::residue_char(&u, p) == -1);
        }
    }
    bits
}

/// The first `count` primes outside a skip set, in the canonical order.
pub fn probe_primes(
    field: &Arc<NumberField>,
    skip: &[PrimeIdeal],
    count: usize,
) -> Vec<PrimeIdeal> {
    PrimeCursor::new(field.clone(), skip).take(count).collect()
}

pub fn the_four_fields() -> Vec<Arc<NumberField>> {
    vec![
        NumberField::rationals(),
        NumberField::quadratic(BigInt::from(-7)).unwrap(),
        NumberField::quadratic(BigInt::from(2)).unwrap(),
        NumberField::quadratic(BigInt::from(-5)).unwrap(),
    ]
}
