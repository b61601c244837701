//! Elements with prescribed signs at the real embeddings: ordering
//! separation, totally positive congruence solutions, and sign-prescribed
//! elements that are local squares on a given prime set.

use crate::arith;
use crate::field::{FieldElt, NumberField};
use crate::ideals::{crt, ord_at, IdealError, PrimeIdeal};
use crate::local::{is_local_square, ord_of_four};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeSet;
use std::sync::Arc;

/// Subset of real-place indices where the constructed element must be negative.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SignPattern {
    pub negatives: BTreeSet<usize>,
}

impl SignPattern {
    pub fn empty() -> Self {
        SignPattern {
            negatives: BTreeSet::new(),
        }
    }

    pub fn from_indices(idx: &[usize]) -> Self {
        SignPattern {
            negatives: idx.iter().copied().collect(),
        }
    }
}

/// The cached eta elements (theta - a_i)(theta - b_i), one per real place,
/// built once from the isolating intervals.
fn eta_elements(field: &Arc<NumberField>) -> Vec<FieldElt> {
    let mut guard = field.eta_cache.lock().unwrap();
    if let Some(etas) = guard.as_ref() {
        return etas.clone();
    }
    let places = field.real_places();
    let theta = field.theta();
    let etas: Vec<FieldElt> = places
        .iter()
        .map(|pl| {
            let (a, b) = pl.isolating_interval.clone();
            let fa = field.sub(&theta, &field.from_rational(a));
            let fb = field.sub(&theta, &field.from_rational(b));
            field.mul(&fa, &fb)
        })
        .collect();
    // verify the sign matrix before caching: eta_i < 0 exactly at place i
    for (i, eta) in etas.iter().enumerate() {
        for j in 0..places.len() {
            let want = if i == j { -1 } else { 1 };
            assert_eq!(
                field.sign_at(eta, j).unwrap(),
                want,
                "eta sign verification failed"
            );
        }
    }
    *guard = Some(etas.clone());
    etas
}

/// An element negative exactly at the places in the pattern, positive at the
/// rest. The empty pattern yields 1.
pub fn ordering_separation(field: &Arc<NumberField>, pattern: &SignPattern) -> FieldElt {
    let r = field.real_place_count();
    assert!(
        pattern.negatives.iter().all(|&i| i < r),
        "sign pattern index out of range"
    );
    if pattern.negatives.is_empty() {
        return field.one();
    }
    let etas = eta_elements(field);
    let mut rho = field.one();
    for &i in &pattern.negatives {
        rho = field.mul(&rho, &etas[i]);
    }
    debug_assert!({
        (0..r).all(|j| {
            let want = if pattern.negatives.contains(&j) { -1 } else { 1 };
            field.sign_at(&rho, j).unwrap() == want
        })
    });
    rho
}

/// A totally positive element of O_K meeting every congruence
/// `alpha = lambda_i mod P_i^(k_i)`.
pub fn positive_approximation(
    field: &Arc<NumberField>,
    data: &[(PrimeIdeal, u32, FieldElt)],
) -> Result<FieldElt, IdealError> {
    if data.is_empty() {
        return Ok(field.one());
    }
    let beta = crt(field, data)?;
    if field.real_place_count() == 0 {
        return Ok(shrink(field, beta, data));
    }
    // every element of beta + M satisfies the congruences, where M is the
    // modulus lattice; scan the reduced coset for a small totally positive
    // representative before falling back to the guaranteed beta + t*s shift
    let all_positive: Vec<i8> = vec![1; field.real_place_count()];
    if let Some(alpha) = sign_coset_search(field, &beta, data, &all_positive) {
        return Ok(shrink(field, alpha, data));
    }
    // s = prod over dominated rational primes p of p^(max k_i)
    let mut by_p: std::collections::BTreeMap<BigInt, u32> = Default::default();
    for (prime, k, _) in data {
        let e = by_p.entry(prime.under.clone()).or_insert(0);
        *e = (*e).max(*k);
    }
    let mut s = BigInt::one();
    for (p, m) in by_p {
        s *= p.pow(m);
    }
    // t: the least power of two with t*s above every sigma_j(-beta), doubled once
    let neg_beta = field.neg(&beta);
    let mut need = BigRational::zero();
    for j in 0..field.real_place_count() {
        let (_, hi) = field.embed_bounds(&neg_beta, j, &BigRational::one());
        if hi > need {
            need = hi;
        }
    }
    let s_rat = BigRational::from(s.clone());
    let mut t = BigInt::one();
    while BigRational::from(&t * &s) <= need {
        t *= 2;
    }
    t *= 2;
    let alpha = field.add(&beta, &field.from_rational(BigRational::from(t) * s_rat));
    debug_assert!(field.is_totally_positive(&alpha).unwrap());
    Ok(shrink(field, alpha, data))
}

/// Looks for a small element of beta + M with the prescribed sign vector.
/// Every element of the coset satisfies the congruences of `data`. For each
/// small multiple of the long basis vector the sign constraints are linear
/// in the short-vector multiplier, so the admissible integer window is
/// solved directly; this copes with the badly skewed lattices that CRT
/// moduli produce.
pub fn sign_coset_search(
    field: &Arc<NumberField>,
    beta: &FieldElt,
    data: &[(PrimeIdeal, u32, FieldElt)],
    signs: &[i8],
) -> Option<FieldElt> {
    let r = field.real_place_count();
    assert_eq!(signs.len(), r);
    if r == 0 {
        return Some(beta.clone());
    }
    let mut modulus = data[0].0.power(data[0].1);
    for (prime, k, _) in &data[1..] {
        modulus = modulus.mul(field, &prime.power(*k));
    }
    let basis = crate::ideals::lagrange_reduced_basis(field, &modulus.rows);
    let vecs: Vec<FieldElt> = basis.iter().map(|row| field.from_integer_coords(row)).collect();
    let short = &vecs[0];
    // sign-definite rational bounds for the short vector's embeddings
    let short_bounds: Vec<(BigRational, BigRational)> = (0..r)
        .map(|j| refine_sign_definite(field, short, j))
        .collect();
    let m2_range: Vec<i64> = {
        let mut v = vec![0i64];
        for i in 1..=64i64 {
            v.push(i);
            v.push(-i);
        }
        v
    };
    for &m2 in &m2_range {
        let base = if vecs.len() > 1 {
            field.add(beta, &field.mul_rat(&vecs[1], &arith::rat(m2)))
        } else if m2 != 0 {
            continue;
        } else {
            beta.clone()
        };
        // intersect the per-place windows for the short-vector multiplier
        let mut lo: Option<BigInt> = None; // m1 >= lo
        let mut hi: Option<BigInt> = None; // m1 <= hi
        let mut feasible = true;
        for j in 0..r {
            let (g_lo, g_hi) = &short_bounds[j];
            let g_positive = g_lo.is_positive();
            let (c_lo, c_hi) = field.embed_bounds(&base, j, &interval_width(g_lo));
            // want s * (c + m1 g) > 0
            let want_positive = signs[j] > 0;
            // conservative threshold: use the worst ends of both intervals
            if want_positive == g_positive {
                // m1 strictly above -c/g: bound with the largest magnitude
                let t1 = -&c_lo / g_lo;
                let t2 = -&c_lo / g_hi;
                let t3 = -&c_hi / g_lo;
                let t4 = -&c_hi / g_hi;
                let worst = [&t1, &t2, &t3, &t4].iter().map(|x| (*x).clone()).fold(t1.clone(), |a, b| if b > a { b } else { a });
                let bound = worst.floor().to_integer() + BigInt::one();
                lo = Some(match lo {
                    Some(old) => old.max(bound),
                    None => bound,
                });
            } else {
                let t1 = -&c_lo / g_lo;
                let t2 = -&c_lo / g_hi;
                let t3 = -&c_hi / g_lo;
                let t4 = -&c_hi / g_hi;
                let worst = [&t1, &t2, &t3, &t4].iter().map(|x| (*x).clone()).fold(t1.clone(), |a, b| if b < a { b } else { a });
                let bound = worst.ceil().to_integer() - BigInt::one();
                hi = Some(match hi {
                    Some(old) => old.min(bound),
                    None => bound,
                });
            }
            if let (Some(l), Some(h)) = (&lo, &hi) {
                if l > h {
                    feasible = false;
                    break;
                }
            }
        }
        if !feasible {
            continue;
        }
        // the integer of least magnitude in the window
        let m1 = match (&lo, &hi) {
            (Some(l), Some(h)) => {
                if l > &BigInt::zero() {
                    l.clone()
                } else if h < &BigInt::zero() {
                    h.clone()
                } else {
                    BigInt::zero()
                }
            }
            (Some(l), None) => l.clone().max(BigInt::zero()),
            (None, Some(h)) => h.clone().min(BigInt::zero()),
            (None, None) => BigInt::zero(),
        };
        if m1.abs() > BigInt::from(100_000_000i64) {
            continue;
        }
        let cand = field.add(&base, &field.mul_rat(short, &BigRational::from(m1)));
        if cand.is_zero() {
            continue;
        }
        if (0..r).all(|j| field.sign_at(&cand, j).unwrap() == signs[j]) {
            return Some(cand);
        }
    }
    None
}

/// Bounds for sigma_j(x) refined until they exclude zero.
fn refine_sign_definite(
    field: &Arc<NumberField>,
    x: &FieldElt,
    place: usize,
) -> (BigRational, BigRational) {
    let mut width = BigRational::one();
    loop {
        let (lo, hi) = field.embed_bounds(x, place, &width);
        if lo.is_positive() || hi.is_negative() {
            return (lo, hi);
        }
        width /= arith::rat(1024);
    }
}

fn interval_width(scale: &BigRational) -> BigRational {
    let s = scale.abs();
    if s < BigRational::one() {
        s / arith::rat(1024)
    } else {
        BigRational::one()
    }
}

/// Divides by squares of small rational primes while the congruences, the
/// integrality and total positivity survive; keeps later factorizations small.
fn shrink(field: &Arc<NumberField>, mut alpha: FieldElt, data: &[(PrimeIdeal, u32, FieldElt)]) -> FieldElt {
    let still_good = |cand: &FieldElt| -> bool {
        if cand.is_zero() || !field.is_integral(cand) {
            return false;
        }
        if field.real_place_count() > 0 && !field.is_totally_positive(cand).unwrap() {
            return false;
        }
        data.iter().all(|(prime, k, lambda)| {
            let diff = field.sub(cand, lambda);
            diff.is_zero() || ord_at(&diff, prime).unwrap() >= *k as i64
        })
    };
    for p in [2i64, 3, 5, 7, 11, 13] {
        let inv_p2 = BigRational::new(BigInt::one(), BigInt::from(p * p));
        loop {
            let cand = field.mul_rat(&alpha, &inv_p2);
            if still_good(&cand) {
                alpha = cand;
            } else {
                break;
            }
        }
    }
    alpha
}

/// An element with the prescribed sign pattern that is moreover a local
/// square at every prime of S.
pub fn strong_ordering_separation(
    field: &Arc<NumberField>,
    pattern: &SignPattern,
    s_primes: &[PrimeIdeal],
) -> Result<FieldElt, IdealError> {
    let alpha1 = ordering_separation(field, pattern);
    // rescale by a rational square to land in O_K
    let den = field.denominator(&alpha1);
    let den2 = BigRational::from(&den * &den);
    let alpha1 = field.mul_rat(&alpha1, &den2);
    if s_primes.is_empty() {
        return Ok(field.strip_rational_squares(&alpha1));
    }
    // alpha2 = alpha1 mod P^(v + 1 + ord_P 4) with v = ord_P(alpha1), so that
    // rho / alpha1^2 lands in 1 + 4 P, a square by the Local Square Theorem
    let data: Vec<(PrimeIdeal, u32, FieldElt)> = s_primes
        .iter()
        .map(|p| {
            let v = ord_at(&alpha1, p).unwrap();
            debug_assert!(v >= 0);
            (p.clone(), v as u32 + 1 + ord_of_four(p), alpha1.clone())
        })
        .collect();
    let alpha2 = positive_approximation(field, &data)?;
    let rho = field.mul(&alpha1, &alpha2);
    let rho = field.strip_rational_squares(&rho);
    debug_assert!(s_primes.iter().all(|p| is_local_square(&rho, p).unwrap()));
    Ok(rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ideals::{dyadic_primes, primes_above};
    use num_traits::Signed;

    #[test]
    fn separation_q_sqrt2() {
        let k = NumberField::quadratic(BigInt::from(2)).unwrap();
        // index 0 is the embedding sending theta to -sqrt(2)
        let pat = SignPattern::from_indices(&[0]);
        let rho = ordering_separation(&k, &pat);
        assert_eq!(k.sign_at(&rho, 0).unwrap(), -1);
        assert_eq!(k.sign_at(&rho, 1).unwrap(), 1);

        let empty = ordering_separation(&k, &SignPattern::empty());
        assert!(empty.is_one());
    }

    #[test]
    fn separation_cubic_all_patterns() {
        let k = NumberField::cubic_sign_field();
        // the middle root: sign vector (+, -, +)
        let pat = SignPattern::from_indices(&[1]);
        let rho = ordering_separation(&k, &pat);
        assert_eq!(k.sign_vector(&rho).unwrap(), vec![1, -1, 1]);
        for bits in 0u32..8 {
            let idx: Vec<usize> = (0..3).filter(|i| bits >> i & 1 == 1).collect();
            let pat = SignPattern::from_indices(&idx);
            let rho = ordering_separation(&k, &pat);
            for j in 0..3 {
                let want = if idx.contains(&j) { -1 } else { 1 };
                assert_eq!(k.sign_at(&rho, j).unwrap(), want, "bits {bits} place {j}");
            }
        }
    }

    #[test]
    fn positive_approximation_examples() {
        // over Q with a single congruence mod 3
        let q = NumberField::rationals();
        let p3 = primes_above(&q, &BigInt::from(3)).unwrap().remove(0);
        let alpha = positive_approximation(&q, &[(p3.clone(), 1, q.from_i64(2))]).unwrap();
        assert!(alpha.coeffs[0].is_positive());
        let diff = q.sub(&alpha, &q.from_i64(2));
        assert!(diff.is_zero() || ord_at(&diff, &p3).unwrap() >= 1);

        // non-real field: congruences only
        let km7 = NumberField::quadratic(BigInt::from(-7)).unwrap();
        let d = dyadic_primes(&km7);
        let target = km7.parse_elt("1+t").unwrap();
        let alpha = positive_approximation(&km7, &[(d[0].clone(), 2, target.clone())]).unwrap();
        let diff = km7.sub(&alpha, &target);
        assert!(diff.is_zero() || ord_at(&diff, &d[0]).unwrap() >= 2);

        // real quadratic with a congruence mod a split prime squared
        let k2 = NumberField::quadratic(BigInt::from(2)).unwrap();
        let p7 = primes_above(&k2, &BigInt::from(7)).unwrap().remove(0);
        let alpha = positive_approximation(&k2, &[(p7.clone(), 2, k2.from_i64(-1))]).unwrap();
        assert!(k2.is_totally_positive(&alpha).unwrap());
        let diff = k2.sub(&alpha, &k2.from_i64(-1));
        assert!(ord_at(&diff, &p7).unwrap() >= 2);
    }

    #[test]
    fn strong_separation_examples() {
        // negative rational that is a square in Q_3 and Q_5
        let q = NumberField::rationals();
        let p3 = primes_above(&q, &BigInt::from(3)).unwrap().remove(0);
        let p5 = primes_above(&q, &BigInt::from(5)).unwrap().remove(0);
        let rho = strong_ordering_separation(
            &q,
            &SignPattern::from_indices(&[0]),
            &[p3.clone(), p5.clone()],
        )
        .unwrap();
        assert!(rho.coeffs[0].is_negative());
        assert!(is_local_square(&rho, &p3).unwrap());
        assert!(is_local_square(&rho, &p5).unwrap());

        // over Q(sqrt 2): one negative place, local square at the dyadic prime
        let k2 = NumberField::quadratic(BigInt::from(2)).unwrap();
        let dy = dyadic_primes(&k2);
        for pat in [SignPattern::from_indices(&[0]), SignPattern::from_indices(&[1])] {
            let rho = strong_ordering_separation(&k2, &pat, &dy).unwrap();
            for j in 0..2 {
                let want = if pat.negatives.contains(&j) { -1 } else { 1 };
                assert_eq!(k2.sign_at(&rho, j).unwrap(), want);
            }
            assert!(is_local_square(&rho, &dy[0]).unwrap());
        }

        // empty pattern, all dyadic primes of Q(sqrt -7): totally positive square
        let km7 = NumberField::quadratic(BigInt::from(-7)).unwrap();
        let dy7 = dyadic_primes(&km7);
        let rho = strong_ordering_separation(&km7, &SignPattern::empty(), &dy7).unwrap();
        for p in &dy7 {
            assert!(is_local_square(&rho, p).unwrap());
        }
    }
}
