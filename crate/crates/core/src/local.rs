//! Local machinery at each place: local square tests, Hilbert symbols,
//! Hasse invariants and the anisotropic dimension over completions.
//!
//! Non-dyadic symbols use the tame formula through the residue quadratic
//! character. Dyadic symbols are decided by a bounded primitive-solution
//! search in O/P^N, with N chosen so that Hensel lifting applies above it.

use crate::field::{FieldElt, NumberField};
use crate::ideals::{mod_inverse, ord_at, PrimeIdeal};
use crate::residue::{ResidueRing, RingElt};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LocalError {
    ZeroArgument,
    DegenerateForm,
}

impl fmt::Display for LocalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LocalError::ZeroArgument => write!(f, "zero argument to a local invariant"),
            LocalError::DegenerateForm => write!(f, "degenerate form"),
        }
    }
}

impl std::error::Error for LocalError {}

/// A place of K: real embedding, the complex pair, or a prime ideal.
#[derive(Clone, Debug)]
pub enum Place {
    Real(usize),
    Complex,
    Finite(PrimeIdeal),
}

impl Place {
    pub fn display(&self) -> String {
        match self {
            Place::Real(i) => format!("sigma_{}", i + 1),
            Place::Complex => "complex".to_string(),
            Place::Finite(p) => p.display(),
        }
    }
}

/// Legendre symbol a^((p-1)/2) for odd p, a coprime to p.
pub fn legendre(a: &BigInt, p: &BigInt) -> i8 {
    let am = a.mod_floor(p);
    assert!(!am.is_zero());
    let e = (p - BigInt::one()) / BigInt::from(2);
    if am.modpow(&e, p).is_one() {
        1
    } else {
        -1
    }
}

/// Image in the residue field F_p of an element with ord_P >= 0 (f_P = 1).
fn fp_image(x: &FieldElt, prime: &PrimeIdeal) -> BigInt {
    let field = &prime.field;
    let p = &prime.under;
    let omega_img = match &prime.residue {
        crate::ideals::ResidueRepr::Fp { omega_img } => omega_img.clone(),
        _ => unreachable!("fp_image on a prime of residue degree > 1"),
    };
    let image_of_integral = |z: &FieldElt| -> BigInt {
        let c = field.integral_coords(z).expect("integral element");
        (&c[0] + &c[1 % c.len()] * &omega_img).mod_floor(p)
    };
    let den = field.denominator(x);
    let y = field.mul_rat(x, &BigRational::from(den.clone()));
    let mut k = 0u32;
    let mut m = den.clone();
    while (&m % p).is_zero() {
        m /= p;
        k += 1;
    }
    if k == 0 {
        let yi = image_of_integral(&y);
        return (yi * mod_inverse(&m.mod_floor(p), p)).mod_floor(p);
    }
    let split = prime.ram_index == 1 && field.degree() == 2 && prime.gens_second.is_some();
    let (z, extra_inv) = if split {
        let pibar = field.conj(&prime.uniformizer);
        let twist = field.pow(&pibar, k);
        let y2 = field.mul(&y, &twist);
        (div_coords(field, &y2, &p.pow(k)), image_of_integral(&twist))
    } else {
        (div_coords(field, &y, &p.pow(k)), BigInt::one())
    };
    let zi = image_of_integral(&z);
    let minv = mod_inverse(&m.mod_floor(p), p);
    let einv = mod_inverse(&extra_inv.mod_floor(p), p);
    (zi * minv * einv).mod_floor(p)
}

fn div_coords(field: &NumberField, x: &FieldElt, m: &BigInt) -> FieldElt {
    let coords = field.integral_coords(x).expect("integral element");
    let out: Vec<BigInt> = coords
        .iter()
        .map(|c| {
            let (q, r) = c.div_rem(m);
            assert!(r.is_zero(), "inexact division while reducing");
            q
        })
        .collect();
    field.from_integer_coords(&out)
}

/// Quadratic character of the residue field at a non-dyadic prime, applied
/// to the reduction of a P-unit.
pub fn residue_char(x: &FieldElt, prime: &PrimeIdeal) -> i8 {
    debug_assert!(!prime.is_dyadic());
    debug_assert_eq!(ord_at(x, prime).unwrap(), 0, "residue_char needs a unit");
    match &prime.residue {
        crate::ideals::ResidueRepr::Fp { .. } => {
            let img = fp_image(x, prime);
            legendre(&img, &prime.under)
        }
        crate::ideals::ResidueRepr::Fp2 { c0, c1 } => {
            // inert prime: denominators are automatically coprime to p
            let p = &prime.under;
            let field = &prime.field;
            let ic = field.to_integral_coords(x);
            let coo: Vec<BigInt> = ic
                .iter()
                .map(|c| {
                    (c.numer() * mod_inverse(&c.denom().mod_floor(p), p)).mod_floor(p)
                })
                .collect();
            fp2_char(&coo[0], &coo[1], c0, c1, p)
        }
        crate::ideals::ResidueRepr::Opaque => {
            panic!("residue characters are not materialized for this field")
        }
    }
}

/// Character z^((p^2-1)/2) in F_{p^2} = F_p[w]/(w^2 + c1 w + c0).
fn fp2_char(a: &BigInt, b: &BigInt, c0: &BigInt, c1: &BigInt, p: &BigInt) -> i8 {
    let e = (p * p - BigInt::one()) / BigInt::from(2);
    let mut base = (a.mod_floor(p), b.mod_floor(p));
    let mut acc = (BigInt::one(), BigInt::zero());
    let mul = |x: &(BigInt, BigInt), y: &(BigInt, BigInt)| -> (BigInt, BigInt) {
        // (x0 + x1 w)(y0 + y1 w) with w^2 = -c1 w - c0
        let cross = (&x.1 * &y.1).mod_floor(p);
        let r0 = (&x.0 * &y.0 - &cross * c0).mod_floor(p);
        let r1 = (&x.0 * &y.1 + &x.1 * &y.0 - &cross * c1).mod_floor(p);
        (r0, r1)
    };
    let mut bits = e.clone();
    let two = BigInt::from(2);
    while bits.is_positive() {
        if (&bits % &two).is_one() {
            acc = mul(&acc, &base);
        }
        base = mul(&base, &base);
        bits /= &two;
    }
    assert!(acc.1.is_zero(), "character power landed outside F_p^*");
    if acc.0.is_one() {
        1
    } else {
        -1
    }
}

/// The chosen unit non-residue u_P at a non-dyadic prime: the lift of the
/// first non-square of the residue field in a fixed enumeration.
pub fn unit_nonresidue(prime: &PrimeIdeal) -> FieldElt {
    assert!(!prime.is_dyadic());
    let field = &prime.field;
    match &prime.residue {
        crate::ideals::ResidueRepr::Fp { .. } => {
            let mut n = BigInt::from(2);
            while legendre(&n, &prime.under) == 1 {
                n += 1;
            }
            field.from_rational(BigRational::from(n))
        }
        crate::ideals::ResidueRepr::Fp2 { c0, c1 } => {
            // elements of F_p are all squares in F_{p^2}; scan c1 >= 1
            let p = &prime.under;
            let mut c1i = BigInt::one();
            loop {
                let mut c0i = BigInt::zero();
                while &c0i < p {
                    if fp2_char(&c0i, &c1i, c0, c1, p) == -1 {
                        let coords = vec![
                            BigRational::from(c0i.clone()),
                            BigRational::from(c1i.clone()),
                        ];
                        return field.from_integral_coords(&coords);
                    }
                    c0i += 1;
                }
                c1i += 1;
            }
        }
        crate::ideals::ResidueRepr::Opaque => panic!("unsupported field degree"),
    }
}

/// ord_P(4) = 2 * ord_P(2), zero away from the dyadic primes.
pub fn ord_of_four(prime: &PrimeIdeal) -> u32 {
    if prime.is_dyadic() {
        2 * prime.ram_index
    } else {
        0
    }
}

/// True iff x is a square in the completion K_P.
pub fn is_local_square(x: &FieldElt, prime: &PrimeIdeal) -> Result<bool, LocalError> {
    if x.is_zero() {
        return Err(LocalError::ZeroArgument);
    }
    let v = ord_at(x, prime).unwrap();
    if v % 2 != 0 {
        return Ok(false);
    }
    let field = &prime.field;
    let unit = scale_to_ord(field, x, prime, v, 0);
    if !prime.is_dyadic() {
        return Ok(residue_char(&unit, prime) == 1);
    }
    // dyadic: unit square iff a square mod P^(2e+1), by the Local Square Theorem
    let e = prime.ram_index;
    let ring = ResidueRing::new(prime, 2 * e + 1);
    let target = ring.from_field_elt(&unit);
    for z in ring.elements() {
        if ring.mul(&z, &z) == target {
            return Ok(true);
        }
    }
    Ok(false)
}

/// The P-unit x * pi^(-v); changes the square class when v is odd.
fn unit_part(field: &NumberField, x: &FieldElt, prime: &PrimeIdeal, v: i64) -> FieldElt {
    if v == 0 {
        return x.clone();
    }
    let factor = if v > 0 {
        field
            .inv(&field.pow(&prime.uniformizer, v as u32))
            .expect("uniformizer is nonzero")
    } else {
        field.pow(&prime.uniformizer, (-v) as u32)
    };
    field.mul(x, &factor)
}

/// Multiplies by an even power of the uniformizer so ord becomes `want`.
fn scale_to_ord(
    field: &NumberField,
    x: &FieldElt,
    prime: &PrimeIdeal,
    current: i64,
    want: i64,
) -> FieldElt {
    debug_assert_eq!((current - want) % 2, 0);
    let shift = (want - current) / 2;
    if shift == 0 {
        return x.clone();
    }
    let pi2 = field.mul(&prime.uniformizer, &prime.uniformizer);
    let factor = if shift > 0 {
        field.pow(&pi2, shift as u32)
    } else {
        field
            .inv(&field.pow(&pi2, (-shift) as u32))
            .expect("uniformizer is nonzero")
    };
    field.mul(x, &factor)
}

/// Hilbert symbol (a, b)_v.
pub fn hilbert(
    field: &Arc<NumberField>,
    a: &FieldElt,
    b: &FieldElt,
    place: &Place,
) -> Result<i8, LocalError> {
    if a.is_zero() || b.is_zero() {
        return Err(LocalError::ZeroArgument);
    }
    match place {
        Place::Complex => Ok(1),
        Place::Real(i) => {
            let sa = field.sign_at(a, *i).unwrap();
            let sb = field.sign_at(b, *i).unwrap();
            Ok(if sa < 0 && sb < 0 { -1 } else { 1 })
        }
        Place::Finite(p) if !p.is_dyadic() => Ok(tame_symbol(field, a, b, p)),
        Place::Finite(p) => Ok(dyadic_symbol(field, a, b, p)),
    }
}

fn tame_symbol(field: &NumberField, a: &FieldElt, b: &FieldElt, prime: &PrimeIdeal) -> i8 {
    let alpha = ord_at(a, prime).unwrap();
    let beta = ord_at(b, prime).unwrap();
    let u = unit_part(field, a, prime, alpha);
    let v = unit_part(field, b, prime, beta);
    let mut s: i8 = 1;
    if alpha % 2 != 0 && beta % 2 != 0 {
        // chi(-1) = (-1)^((q-1)/2)
        let q = prime.norm();
        let par = ((q - BigInt::one()) / BigInt::from(2)).mod_floor(&BigInt::from(2));
        if par.is_one() {
            s = -s;
        }
    }
    if beta % 2 != 0 {
        s *= residue_char(&u, prime);
    }
    if alpha % 2 != 0 {
        s *= residue_char(&v, prime);
    }
    s
}

fn dyadic_symbol(field: &NumberField, a: &FieldElt, b: &FieldElt, prime: &PrimeIdeal) -> i8 {
    // normalize valuations into {0, 1} by square factors of the uniformizer
    let va = ord_at(a, prime).unwrap();
    let vb = ord_at(b, prime).unwrap();
    let ta = va.rem_euclid(2);
    let tb = vb.rem_euclid(2);
    let an = scale_to_ord(field, a, prime, va, ta);
    let bn = scale_to_ord(field, b, prime, vb, tb);
    // e = ord_P(2); a primitive zero mod P^(2e+1+ta+tb) certifies one in K_P
    let e = if prime.is_dyadic() { prime.ram_index } else { 0 };
    let n = 2 * e + 1 + ta as u32 + tb as u32;
    let ring = ResidueRing::new(prime, n);
    let ar = ring.from_field_elt(&an);
    let br = ring.from_field_elt(&bn);
    // primitive solution search for z^2 = a x^2 + b y^2 over O/P^n
    let elements = ring.elements();
    let mut squares: HashMap<RingElt, ()> = HashMap::new();
    for z in &elements {
        squares.insert(ring.mul(z, z), ());
    }
    let units: Vec<bool> = elements.iter().map(|x| ring.is_unit(x)).collect();
    for (ix, x) in elements.iter().enumerate() {
        let ax2 = ring.mul(&ar, &ring.mul(x, x));
        for (iy, y) in elements.iter().enumerate() {
            if !units[ix] && !units[iy] {
                continue;
            }
            let target = ring.add(&ax2, &ring.mul(&br, &ring.mul(y, y)));
            if squares.contains_key(&target) {
                return 1;
            }
        }
    }
    -1
}

/// Hasse invariant of a diagonal form at a place: the ordered product of the
/// pairwise Hilbert symbols of its coefficients.
pub fn hasse(
    field: &Arc<NumberField>,
    coeffs: &[FieldElt],
    place: &Place,
) -> Result<i8, LocalError> {
    if coeffs.iter().any(|c| c.is_zero()) {
        return Err(LocalError::DegenerateForm);
    }
    let mut s: i8 = 1;
    for i in 0..coeffs.len() {
        for j in (i + 1)..coeffs.len() {
            s *= hilbert(field, &coeffs[i], &coeffs[j], place)?;
        }
    }
    Ok(s)
}

/// Signed discriminant (-1)^(n(n-1)/2) * prod a_i, as a raw field element.
pub fn signed_disc_raw(field: &NumberField, coeffs: &[FieldElt]) -> FieldElt {
    let n = coeffs.len();
    let mut prod = field.one();
    for c in coeffs {
        prod = field.mul(&prod, c);
    }
    if (n * n.saturating_sub(1) / 2) % 2 == 1 {
        prod = field.neg(&prod);
    }
    prod
}

/// Anisotropic dimension of the completion of a diagonal form at a place.
pub fn local_adim(
    field: &Arc<NumberField>,
    coeffs: &[FieldElt],
    place: &Place,
) -> Result<usize, LocalError> {
    if coeffs.iter().any(|c| c.is_zero()) {
        return Err(LocalError::DegenerateForm);
    }
    let n = coeffs.len();
    match place {
        Place::Complex => Ok(n % 2),
        Place::Real(i) => {
            let mut sig = 0i64;
            for c in coeffs {
                sig += field.sign_at(c, *i).unwrap() as i64;
            }
            Ok(sig.unsigned_abs() as usize)
        }
        Place::Finite(p) => {
            if n == 0 {
                return Ok(0);
            }
            let disc = signed_disc_raw(field, coeffs);
            let mut s = hasse(field, coeffs, place)?;
            let mut m = n;
            let disc_square = is_local_square(&disc, p)?;
            let minus_one = field.from_i64(-1);
            loop {
                let isotropic = match m {
                    0 | 1 => false,
                    2 => disc_square,
                    3 => {
                        // <a,b,c> is isotropic iff s = (-1, d)_P for the signed disc d
                        s == hilbert(field, &minus_one, &disc, place)?
                    }
                    4 => {
                        !disc_square
                            || s == hilbert(field, &minus_one, &minus_one, place)?
                    }
                    _ => true,
                };
                if !isotropic {
                    return Ok(m);
                }
                // split a hyperbolic plane: signed disc is unchanged, the Hasse
                // invariant picks up (det q', -1) with det q' = +-d
                let m2 = m - 2;
                let mut det_rest = disc.clone();
                if (m2 * m2.saturating_sub(1) / 2) % 2 == 1 {
                    det_rest = field.neg(&det_rest);
                }
                s *= hilbert(field, &det_rest, &minus_one, place)?;
                m = m2;
                if m == 0 {
                    return Ok(0);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ideals::primes_above;

    fn q() -> Arc<NumberField> {
        NumberField::rationals()
    }

    fn prime_of(field: &Arc<NumberField>, p: i64) -> PrimeIdeal {
        primes_above(field, &BigInt::from(p)).unwrap().remove(0)
    }

    #[test]
    fn local_square_examples() {
        let f = q();
        let p5 = prime_of(&f, 5);
        assert!(is_local_square(&f.from_i64(9), &p5).unwrap());
        let p7 = prime_of(&f, 7);
        assert!(is_local_square(&f.from_i64(2), &p7).unwrap());
        assert!(!is_local_square(&f.from_i64(3), &p7).unwrap());
        let p2 = prime_of(&f, 2);
        assert!(is_local_square(&f.from_i64(17), &p2).unwrap());
        assert!(!is_local_square(&f.from_i64(3), &p2).unwrap());
        assert!(!is_local_square(&f.from_i64(2), &p2).unwrap());
        assert!(is_local_square(&f.parse_elt("25/49").unwrap(), &p5).unwrap());
        assert!(is_local_square(&f.from_i64(0), &p5).is_err());
    }

    #[test]
    fn local_square_theorem_guarantee() {
        // alpha2 = alpha1 mod P^(1+ord 4) with alpha1 a unit forces
        // alpha1 * alpha2 to be a local square
        let k = NumberField::quadratic(BigInt::from(-7)).unwrap();
        let d1 = prime_of(&k, 2);
        let a1 = k.parse_elt("3+2*t").unwrap(); // norm 37, a unit at both dyadic primes
        assert_eq!(ord_at(&a1, &d1).unwrap(), 0);
        let shift = k.mul_rat(&k.from_i64(8), &BigRational::from(BigInt::from(1)));
        let a2 = k.add(&a1, &shift); // = a1 mod P^3, ord_P(8) = 3 = 1 + ord(4)
        let rho = k.mul(&a1, &a2);
        assert!(is_local_square(&rho, &d1).unwrap());
    }

    #[test]
    fn hilbert_examples() {
        let f = q();
        let p2 = prime_of(&f, 2);
        let m1 = f.from_i64(-1);
        assert_eq!(
            hilbert(&f, &m1, &m1, &Place::Finite(p2.clone())).unwrap(),
            -1
        );
        assert_eq!(hilbert(&f, &m1, &m1, &Place::Real(0)).unwrap(), -1);
        assert_eq!(
            hilbert(&f, &f.one(), &m1, &Place::Finite(p2.clone())).unwrap(),
            1
        );
        // (u, pi) = -1 at odd primes
        for p in [3i64, 5, 7, 11] {
            let pr = prime_of(&f, p);
            let u = unit_nonresidue(&pr);
            let pi = pr.uniformizer.clone();
            assert_eq!(
                hilbert(&f, &u, &pi, &Place::Finite(pr.clone())).unwrap(),
                -1,
                "p = {p}"
            );
        }
    }

    #[test]
    fn hilbert_symmetry_bimultiplicativity() {
        let f = q();
        let places: Vec<Place> = vec![
            Place::Real(0),
            Place::Finite(prime_of(&f, 2)),
            Place::Finite(prime_of(&f, 3)),
            Place::Finite(prime_of(&f, 5)),
        ];
        let vals: Vec<FieldElt> = [-10i64, -5, -3, -2, -1, 1, 2, 3, 5, 6, 15]
            .iter()
            .map(|&v| f.from_i64(v))
            .collect();
        for v in &places {
            for a in &vals {
                for b in &vals {
                    let ab = hilbert(&f, a, b, v).unwrap();
                    assert_eq!(ab, hilbert(&f, b, a, v).unwrap());
                    let na = f.neg(a);
                    assert_eq!(hilbert(&f, a, &na, v).unwrap(), 1);
                    for c in &vals {
                        let ac = f.mul(a, c);
                        assert_eq!(
                            hilbert(&f, &ac, b, v).unwrap(),
                            ab * hilbert(&f, c, b, v).unwrap()
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn tame_symbol_matches_search_on_quadratic_field() {
        // cross-check the tame formula against the dyadic-style search oracle
        let k = NumberField::quadratic(BigInt::from(-7)).unwrap();
        let p3 = prime_of(&k, 3);
        let samples: Vec<FieldElt> = vec![
            k.from_i64(3),
            k.from_i64(-1),
            k.parse_elt("1+t").unwrap(),
            k.parse_elt("2-t").unwrap(),
            k.from_i64(6),
            k.parse_elt("3*t").unwrap(),
        ];
        for a in &samples {
            for b in &samples {
                let tame = tame_symbol(&k, a, b, &p3);
                let search = dyadic_symbol(&k, a, b, &p3);
                assert_eq!(tame, search, "a={:?} b={:?}", a, b);
            }
        }
    }

    #[test]
    fn hasse_examples() {
        let f = q();
        let p2 = Place::Finite(prime_of(&f, 2));
        let ones: Vec<FieldElt> = (0..4).map(|_| f.one()).collect();
        assert_eq!(hasse(&f, &ones, &p2).unwrap(), 1);
        let alt = vec![f.one(), f.from_i64(-1), f.one(), f.from_i64(-1)];
        assert_eq!(hasse(&f, &alt, &p2).unwrap(), -1);
        assert!(hasse(&f, &[f.zero()], &p2).is_err());
    }

    #[test]
    fn local_adim_examples() {
        let f = q();
        let p2 = Place::Finite(prime_of(&f, 2));
        let hyp = vec![f.one(), f.from_i64(-1)];
        assert_eq!(local_adim(&f, &hyp, &p2).unwrap(), 0);
        assert_eq!(local_adim(&f, &hyp, &Place::Real(0)).unwrap(), 0);

        let ones3 = vec![f.one(), f.one(), f.one()];
        assert_eq!(local_adim(&f, &ones3, &Place::Real(0)).unwrap(), 3);

        // the quaternionic form <1, -u, -pi, u pi> is anisotropic at odd p
        for p in [3i64, 5, 7] {
            let pr = prime_of(&f, p);
            let u = unit_nonresidue(&pr);
            let pi = pr.uniformizer.clone();
            let qf = vec![
                f.one(),
                f.neg(&u),
                f.neg(&pi),
                f.mul(&u, &pi),
            ];
            assert_eq!(
                local_adim(&f, &qf, &Place::Finite(pr.clone())).unwrap(),
                4,
                "p = {p}"
            );
            // and stays the unique anisotropic class after adding 1: dim 5 drops to 3
            let mut qf5 = qf.clone();
            qf5.push(f.one());
            assert_eq!(local_adim(&f, &qf5, &Place::Finite(pr)).unwrap(), 3);
        }

        // x^2+y^2+z^2+w^2 is anisotropic over Q_2
        let ones4 = vec![f.one(), f.one(), f.one(), f.one()];
        assert_eq!(local_adim(&f, &ones4, &p2).unwrap(), 4);
        assert_eq!(local_adim(&f, &ones4, &Place::Complex).unwrap(), 0);
    }
}
