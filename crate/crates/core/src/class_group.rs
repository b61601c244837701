//! Class groups and S-class groups of quadratic fields at desk scale,
//! principality tests with generator extraction, S-units modulo squares and
//! the basis of the group of S-singular elements.

use crate::arith;
use crate::field::{FieldElt, NumberField};
use crate::ideals::{IdealLat, PrimeCursor, PrimeIdeal};
use crate::linalg::{self, Mat};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClassGroupError {
    UnsupportedDegree,
    SearchBudgetExceeded,
    UnitPeriodExceeded,
    ProbeBudgetExceeded,
}

impl fmt::Display for ClassGroupError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassGroupError::UnsupportedDegree => write!(f, "class groups need degree <= 2"),
            ClassGroupError::SearchBudgetExceeded => write!(f, "lattice search budget exceeded"),
            ClassGroupError::UnitPeriodExceeded => write!(f, "continued fraction period too long"),
            ClassGroupError::ProbeBudgetExceeded => write!(f, "prime probe budget exceeded"),
        }
    }
}

impl std::error::Error for ClassGroupError {}

/// Presentation of a finite abelian group on prime-ideal generators.
#[derive(Clone, Debug)]
pub struct AbelianGroupPresentation {
    pub field: Arc<NumberField>,
    pub generators: Vec<PrimeIdeal>,
    pub relation_matrix: Mat,
    /// elementary divisors (1s kept), one per generator
    pub elementary_divisors: Vec<BigInt>,
    /// column transform of the Smith form: coords(w) = w * v mod divisors
    v: Mat,
    pub order: BigInt,
}

impl AbelianGroupPresentation {
    /// SNF coordinates of an exponent vector over the generators.
    pub fn coords(&self, w: &[BigInt]) -> Vec<BigInt> {
        let n = self.generators.len();
        assert_eq!(w.len(), n);
        (0..n)
            .map(|j| {
                let mut acc = BigInt::zero();
                for i in 0..n {
                    acc += &w[i] * &self.v[i][j];
                }
                acc.mod_floor(&self.elementary_divisors[j])
            })
            .collect()
    }

    pub fn is_trivial_class(&self, w: &[BigInt]) -> bool {
        self.coords(w).iter().all(|c| c.is_zero())
    }

    pub fn order_of_class(&self, w: &[BigInt]) -> BigInt {
        let c = self.coords(w);
        let mut ord = BigInt::one();
        for (ci, di) in c.iter().zip(&self.elementary_divisors) {
            if ci.is_zero() {
                continue;
            }
            let g = ci.gcd(di);
            ord = ord.lcm(&(di / g));
        }
        ord
    }

    pub fn two_torsion_dim(&self) -> usize {
        self.elementary_divisors
            .iter()
            .filter(|d| d.is_even())
            .count()
    }

    /// For a 2-torsion class, its coordinates in the F_2 space of even divisors.
    pub fn two_torsion_bits(&self, w: &[BigInt]) -> Option<Vec<bool>> {
        let c = self.coords(w);
        let mut bits = Vec::new();
        for (ci, di) in c.iter().zip(&self.elementary_divisors) {
            if di.is_even() {
                let half = di / BigInt::from(2);
                if ci.is_zero() {
                    bits.push(false);
                } else if *ci == half {
                    bits.push(true);
                } else {
                    return None;
                }
            } else if !ci.is_zero() {
                return None;
            }
        }
        Some(bits)
    }
}

fn minkowski_bound(field: &NumberField) -> BigInt {
    match field.degree() {
        1 => BigInt::one(),
        2 => {
            let disc = field.disc_k().abs();
            let s = arith::isqrt(&disc) + BigInt::one();
            if field.real_place_count() == 2 {
                s / BigInt::from(2) + BigInt::one()
            } else {
                // 2 sqrt(|disc|) / pi < 2 (isqrt+1) / 3 + 1
                BigInt::from(2) * s / BigInt::from(3) + BigInt::one()
            }
        }
        _ => BigInt::one(),
    }
}

/// Fundamental unit of the real quadratic field, through the continued
/// fraction expansion of sqrt(d) plus an index-3 correction for d = 1 mod 4.
pub fn fundamental_unit(field: &Arc<NumberField>) -> Result<FieldElt, ClassGroupError> {
    assert_eq!(field.degree(), 2);
    assert_eq!(field.real_place_count(), 2, "fundamental unit needs a real field");
    if let Some(u) = field.fund_unit_cache.lock().unwrap().clone() {
        return Ok(u);
    }
    let d = field.d().unwrap().clone();
    let sq = arith::isqrt(&d);
    // continued fraction of sqrt(d): stop when Q returns to 1
    let mut p_cf = BigInt::zero();
    let mut q_cf = BigInt::one();
    let mut a = sq.clone();
    let (mut h_prev, mut h) = (BigInt::one(), a.clone());
    let (mut k_prev, mut k) = (BigInt::zero(), BigInt::one());
    let mut steps = 0u32;
    loop {
        p_cf = &a * &q_cf - &p_cf;
        q_cf = (&d - &p_cf * &p_cf) / &q_cf;
        if q_cf.is_one() {
            break;
        }
        a = (&p_cf + &sq).div_floor(&q_cf);
        let h_new = &a * &h + &h_prev;
        let k_new = &a * &k + &k_prev;
        h_prev = std::mem::replace(&mut h, h_new);
        k_prev = std::mem::replace(&mut k, k_new);
        steps += 1;
        if steps > 10_000 {
            return Err(ClassGroupError::UnitPeriodExceeded);
        }
    }
    // h + k sqrt(d) solves h^2 - d k^2 = +-1
    debug_assert!((&h * &h - &d * &k * &k).abs().is_one());
    let eps0 = field.from_coeffs(vec![
        BigRational::from(h.clone()),
        BigRational::from(k.clone()),
    ]);
    let unit = if field.omega_is_half() {
        // the fundamental unit of O_K may be a cube root (x + y sqrt d)/2
        let cap = num_integer::Roots::nth_root(&(BigInt::from(2) * (&h + &k)), 3) + BigInt::from(4);
        let mut found = None;
        let mut y = BigInt::one();
        'outer: while y <= cap {
            for sign in [-4i64, 4] {
                let x2 = &d * &y * &y + BigInt::from(sign);
                if let Some(x) = arith::perfect_square(&x2) {
                    if (&x - &y).is_even() {
                        let half = arith::ratio(1, 2);
                        let cand = field.from_coeffs(vec![
                            BigRational::from(x.clone()) * &half,
                            BigRational::from(y.clone()) * &half,
                        ]);
                        if !cand.is_one() && cand != field.from_i64(-1) {
                            found = Some(cand);
                            break 'outer;
                        }
                    }
                }
            }
            y += 1;
        }
        found.unwrap_or(eps0)
    } else {
        eps0
    };
    debug_assert!(field.norm(&unit).abs().is_one());
    *field.fund_unit_cache.lock().unwrap() = Some(unit.clone());
    Ok(unit)
}

/// A rational upper bound for max(|sigma_1(eps)|, |sigma_2(eps)|).
fn unit_height_bound(field: &Arc<NumberField>) -> Result<BigRational, ClassGroupError> {
    let eps = fundamental_unit(field)?;
    let mut best = BigRational::one();
    for j in 0..2 {
        let (lo, hi) = field.embed_bounds(&eps, j, &BigRational::one());
        let m = if lo.abs() > hi.abs() { lo.abs() } else { hi.abs() };
        if m > best {
            best = m;
        }
    }
    Ok(best + BigRational::one())
}

/// Enumerates lattice elements g with |N(g)| equal to the target, in a
/// deterministic order; returns the first.
fn norm_search(
    field: &Arc<NumberField>,
    lat: &IdealLat,
    target: &BigInt,
) -> Result<Option<FieldElt>, ClassGroupError> {
    if field.degree() == 1 {
        return Ok(Some(field.from_rational(BigRational::from(lat.rows[0][0].clone()))));
    }
    let reduced = crate::ideals::lagrange_reduced_basis(field, &lat.rows);
    let v1 = field.from_integer_coords(&reduced[0]);
    let v2 = field.from_integer_coords(&reduced[1]);
    // positive definite bound form: T2 = 2|N| (imaginary) or trace form (real)
    let t2 = |x: &FieldElt| -> BigRational {
        if field.real_place_count() == 2 {
            let sq = field.mul(x, x);
            &sq.coeffs[0] + &sq.coeffs[0]
        } else {
            let n = field.norm(x);
            &n + &n
        }
    };
    let bound: BigRational = if field.real_place_count() == 2 {
        let e = unit_height_bound(field)?;
        BigRational::from(target.clone()) * (&e + BigRational::one())
    } else {
        BigRational::from(target.clone()) * arith::rat(2)
    };
    let a = t2(&v1);
    let c = t2(&v2);
    let b = t2(&field.add(&v1, &v2)) - &a - &c;
    let det4 = arith::rat(4) * &a * &c - &b * &b;
    assert!(det4.is_positive());
    let smax = rational_sqrt_upper(&(arith::rat(4) * &c * &bound / &det4));
    let tmax = rational_sqrt_upper(&(arith::rat(4) * &a * &bound / &det4));
    let budget: i64 = 20_000_000;
    let (Some(si), Some(ti)) = (smax.to_i64(), tmax.to_i64()) else {
        return Err(ClassGroupError::SearchBudgetExceeded);
    };
    if (2 * si + 1).saturating_mul(2 * ti + 1) > budget {
        return Err(ClassGroupError::SearchBudgetExceeded);
    }
    for s in -si..=si {
        for t in -ti..=ti {
            if s == 0 && t == 0 {
                continue;
            }
            let g = field.add(
                &field.mul_rat(&v1, &arith::rat(s)),
                &field.mul_rat(&v2, &arith::rat(t)),
            );
            if field.norm(&g).abs() == BigRational::from(target.clone()) {
                return Ok(Some(g));
            }
        }
    }
    Ok(None)
}

fn rational_sqrt_upper(q: &BigRational) -> BigInt {
    assert!(!q.is_negative());
    let c = q.ceil().to_integer();
    arith::isqrt(&c) + BigInt::one()
}

/// Tests principality of an integral ideal; returns a generator when found.
pub fn is_principal(
    field: &Arc<NumberField>,
    lat: &IdealLat,
) -> Result<Option<FieldElt>, ClassGroupError> {
    if field.degree() > 2 {
        return Err(ClassGroupError::UnsupportedDegree);
    }
    let target = lat.norm();
    match norm_search(field, lat, &target)? {
        Some(g) => {
            debug_assert!(lat.contains_elt(field, &g));
            Ok(Some(g))
        }
        None => Ok(None),
    }
}

/// The ideal class group of K, presented on the primes below the Minkowski
/// bound with the complete relation lattice found by enumeration.
pub fn class_group(field: &Arc<NumberField>) -> Result<AbelianGroupPresentation, ClassGroupError> {
    if field.degree() > 2 {
        return Err(ClassGroupError::UnsupportedDegree);
    }
    let bound = minkowski_bound(field);
    let mut base: Vec<PrimeIdeal> = Vec::new();
    for p in arith::RationalPrimes::new() {
        if BigInt::from(p) > bound {
            break;
        }
        for q in crate::ideals::primes_above(field, &BigInt::from(p)).unwrap_or_default() {
            if q.norm() <= bound {
                base.push(q);
            }
        }
    }
    base.sort();
    let g = base.len();
    if g == 0 {
        return Ok(AbelianGroupPresentation {
            field: field.clone(),
            generators: vec![],
            relation_matrix: vec![],
            elementary_divisors: vec![],
            v: vec![],
            order: BigInt::one(),
        });
    }
    // orders of the individual generators
    let mut orders = Vec::with_capacity(g);
    for q in &base {
        let mut o = 0u32;
        for k in 1..=64u32 {
            if is_principal(field, &q.power(k))?.is_some() {
                o = k;
                break;
            }
        }
        assert!(o > 0, "class order exceeded the search cap");
        orders.push(o);
    }
    let total: u64 = orders.iter().map(|&o| o as u64).product();
    assert!(total <= 1 << 14, "class group enumeration too large");
    // the complete relation lattice: every principal product of generators
    let mut relations: Vec<Vec<BigInt>> = Vec::new();
    for (i, &o) in orders.iter().enumerate() {
        let mut row = vec![BigInt::zero(); g];
        row[i] = BigInt::from(o);
        relations.push(row);
    }
    let mut exps = vec![0u32; g];
    loop {
        // advance the mixed-radix counter
        let mut i = 0;
        loop {
            if i == g {
                // presentation complete
                return finish_presentation(field, base, relations);
            }
            exps[i] += 1;
            if exps[i] < orders[i] {
                break;
            }
            exps[i] = 0;
            i += 1;
        }
        if exps.iter().filter(|&&e| e > 0).count() < 2 {
            continue;
        }
        let mut lat = IdealLat::whole_ring(field);
        for (q, &e) in base.iter().zip(&exps) {
            if e > 0 {
                lat = lat.mul(field, &q.power(e));
            }
        }
        if is_principal(field, &lat)?.is_some() {
            relations.push(exps.iter().map(|&e| BigInt::from(e)).collect());
        }
    }
}

fn finish_presentation(
    field: &Arc<NumberField>,
    base: Vec<PrimeIdeal>,
    relations: Vec<Vec<BigInt>>,
) -> Result<AbelianGroupPresentation, ClassGroupError> {
    let g = base.len();
    let (_, s, v) = linalg::snf_with_transforms(&relations);
    let mut divisors = vec![BigInt::one(); g];
    for (j, d) in divisors.iter_mut().enumerate() {
        if j < s.len() && j < s[j].len() && !s[j][j].is_zero() {
            *d = s[j][j].clone();
        } else {
            // the relation lattice always has full rank for a class group
            panic!("relation lattice not of full rank");
        }
    }
    let order: BigInt = divisors.iter().product();
    Ok(AbelianGroupPresentation {
        field: field.clone(),
        generators: base,
        relation_matrix: relations,
        elementary_divisors: divisors,
        v,
        order,
    })
}

/// Expresses the class of an integral ideal as an exponent vector over the
/// class-group generators (primes below the Minkowski bound).
pub fn class_vector(
    field: &Arc<NumberField>,
    cg: &AbelianGroupPresentation,
    lat: &IdealLat,
) -> Result<Vec<BigInt>, ClassGroupError> {
    let g = cg.generators.len();
    if g == 0 {
        return Ok(vec![]);
    }
    let n_i = lat.norm();
    // find g in I with small norm: Minkowski guarantees |N| <= bound * N(I),
    // and |N| is a multiple of N(I) for elements of I
    let mut best: Option<(BigInt, FieldElt)> = None;
    let mut mult = BigInt::one();
    let mink = minkowski_bound(field);
    while mult <= mink {
        let target = &mult * &n_i;
        if let Some(el) = norm_search(field, lat, &target)? {
            best = Some((target, el));
            break;
        }
        mult += 1;
    }
    let (_, short) = best.expect("Minkowski bound violated in class reduction");
    // (short) = I * J with J integral of norm <= Minkowski bound
    let short_lat = IdealLat::principal(field, &short);
    let j_lat = short_lat.mul(field, &lat.conj(field)).div_rational(&n_i);
    let mut w = vec![BigInt::zero(); g];
    for (i, q) in cg.generators.iter().enumerate() {
        let e = ideal_ord(&j_lat, q);
        w[i] = BigInt::from(-(e as i64));
    }
    // sanity: the factorization accounts for the whole norm of J
    debug_assert_eq!(
        cg.generators
            .iter()
            .zip(&w)
            .map(|(q, e)| q.norm().pow(u32::try_from(-e.clone()).unwrap_or(0)))
            .product::<BigInt>(),
        j_lat.norm()
    );
    Ok(w)
}

fn ideal_ord(lat: &IdealLat, prime: &PrimeIdeal) -> u32 {
    let mut k = 0u32;
    'outer: loop {
        let pk = prime.power(k + 1);
        for row in &lat.rows {
            if !pk.contains(row) {
                break 'outer;
            }
        }
        k += 1;
    }
    k
}

/// The S-class group: quotient of the class group by the classes of the
/// finite primes in S.
pub fn s_class_group(
    field: &Arc<NumberField>,
    s_primes: &[PrimeIdeal],
) -> Result<AbelianGroupPresentation, ClassGroupError> {
    let cg = class_group(field)?;
    if cg.generators.is_empty() {
        return Ok(cg);
    }
    let mut rel = cg.relation_matrix.clone();
    for q in s_primes {
        rel.push(class_vector(field, &cg, &q.lattice)?);
    }
    finish_presentation(field, cg.generators.clone(), rel)
}

/// Generator of the fractional ideal prod P_i^(m_i); requires its class to
/// vanish. Mixed-sign exponents go through the conjugate-ideal identity
/// B * conj(B) = (N(B)).
fn generator_of_power_product(
    field: &Arc<NumberField>,
    primes: &[PrimeIdeal],
    exps: &[BigInt],
) -> Result<FieldElt, ClassGroupError> {
    let mut num = IdealLat::whole_ring(field);
    let mut den = IdealLat::whole_ring(field);
    for (q, e) in primes.iter().zip(exps) {
        let k = e.abs().to_u32().expect("exponent too large");
        if k == 0 {
            continue;
        }
        if e.is_positive() {
            num = num.mul(field, &q.power(k));
        } else {
            den = den.mul(field, &q.power(k));
        }
    }
    let den_norm = den.norm();
    let combined = if field.degree() == 2 {
        num.mul(field, &den.conj(field))
    } else {
        num.clone()
    };
    let g = is_principal(field, &combined)?
        .expect("power product was not principal despite vanishing class");
    if den_norm.is_one() {
        Ok(g)
    } else if field.degree() == 1 {
        Ok(field.div(&g, &field.from_rational(BigRational::from(den_norm))).unwrap())
    } else {
        Ok(field
            .mul_rat(&g, &BigRational::new(BigInt::one(), den_norm))
            .clone())
    }
}

/// F_2-basis of U_S / U_S^2: torsion, the fundamental unit for real
/// quadratic fields, and generators attached to a basis of the lattice of
/// principal valuation vectors supported on S.
pub fn s_units_mod_squares(
    field: &Arc<NumberField>,
    s_primes: &[PrimeIdeal],
) -> Result<Vec<FieldElt>, ClassGroupError> {
    if field.degree() > 2 {
        return Err(ClassGroupError::UnsupportedDegree);
    }
    let mut s: Vec<PrimeIdeal> = s_primes.to_vec();
    s.sort();
    s.dedup();
    let mut basis: Vec<FieldElt> = Vec::new();
    // torsion generator: -1 except in Q(i) where -1 is already a square
    if field.degree() == 2 && field.d() == Some(&BigInt::from(-1)) {
        basis.push(field.theta());
    } else {
        basis.push(field.from_i64(-1));
    }
    if field.degree() == 2 && field.real_place_count() == 2 {
        basis.push(fundamental_unit(field)?);
    }
    if s.is_empty() {
        return Ok(basis);
    }
    let cg = class_group(field)?;
    let g = cg.generators.len();
    // L = { m : sum m_j [P_j] = 0 in C_K }, via the left kernel of [W; R]
    let lattice_basis: Vec<Vec<BigInt>> = if g == 0 {
        linalg::identity(s.len())
    } else {
        let mut stacked: Vec<Vec<BigInt>> = Vec::new();
        for q in &s {
            stacked.push(class_vector(field, &cg, &q.lattice)?);
        }
        stacked.extend(cg.relation_matrix.iter().cloned());
        let kernel = linalg::left_kernel(&stacked);
        let projected: Vec<Vec<BigInt>> = kernel
            .iter()
            .map(|row| row[..s.len()].to_vec())
            .collect();
        let (h, _) = linalg::hnf_with_transform(&projected);
        let rows: Vec<Vec<BigInt>> = h
            .into_iter()
            .filter(|r| r.iter().any(|x| !x.is_zero()))
            .collect();
        assert_eq!(rows.len(), s.len(), "valuation lattice must have full rank");
        rows
    };
    for m in &lattice_basis {
        basis.push(generator_of_power_product(field, &s, m)?);
    }
    Ok(basis)
}

/// Basis of Sing_S over F_2 as produced by the singular-group algorithm:
/// the U_S part plus one generator lambda_b for each prime ideal class in a
/// basis of the 2-torsion of the S-class group.
#[derive(Clone, Debug)]
pub struct SingularBasis {
    pub field: Arc<NumberField>,
    pub s_primes: Vec<PrimeIdeal>,
    pub basis: Vec<FieldElt>,
    pub unit_part_size: usize,
    pub class_part_size: usize,
}

pub fn singular_group_basis(
    field: &Arc<NumberField>,
    s_primes: &[PrimeIdeal],
) -> Result<SingularBasis, ClassGroupError> {
    let mut s: Vec<PrimeIdeal> = s_primes.to_vec();
    s.sort();
    s.dedup();
    for dy in crate::ideals::dyadic_primes(field) {
        assert!(s.contains(&dy), "S must contain every dyadic prime");
    }
    let unit_basis = s_units_mod_squares(field, &s)?;
    let unit_part_size = unit_basis.len();
    let mut basis = unit_basis;

    let cs = s_class_group(field, &s)?;
    let t = cs.two_torsion_dim();
    let mut class_part_size = 0;
    if t > 0 {
        let cg = class_group(field)?;
        // find primes whose S-classes form a basis of the 2-torsion subgroup
        let mut found_bits: Vec<Vec<bool>> = Vec::new();
        let mut found_primes: Vec<PrimeIdeal> = Vec::new();
        let mut cursor = PrimeCursor::new(field.clone(), &s);
        let mut probes = 0u32;
        while found_primes.len() < t {
            probes += 1;
            if probes > 10_000 {
                return Err(ClassGroupError::ProbeBudgetExceeded);
            }
            let q = cursor.next().unwrap();
            let w = class_vector(field, &cg, &q.lattice)?;
            let Some(bits) = cs.two_torsion_bits(&w) else {
                continue;
            };
            if bits.iter().all(|&b| !b) {
                continue;
            }
            let mut trial = found_bits.clone();
            trial.push(bits.clone());
            if linalg::F2Matrix::new(trial.clone()).rank() == trial.len() {
                found_bits.push(bits);
                found_primes.push(q);
            }
        }
        // lambda_b generates b^2 times a product of S-primes
        for b in &found_primes {
            let w2: Vec<BigInt> = class_vector(field, &cg, &b.lattice)?
                .iter()
                .map(|x| x * BigInt::from(2))
                .collect();
            // solve m * W + n * R = -w2 for integer m over the S-primes
            let mut stacked: Vec<Vec<BigInt>> = Vec::new();
            for q in &s {
                stacked.push(class_vector(field, &cg, &q.lattice)?);
            }
            stacked.extend(cg.relation_matrix.iter().cloned());
            let target: Vec<BigInt> = w2.iter().map(|x| -x).collect();
            let sol = solve_left(&stacked, &target).expect("2-torsion class is S-trivial");
            let m = &sol[..s.len()];
            // lambda generates b^2 * prod P^m
            let mut primes = vec![b.clone()];
            let mut exps = vec![BigInt::from(2)];
            for (q, e) in s.iter().zip(m) {
                primes.push(q.clone());
                exps.push(e.clone());
            }
            basis.push(generator_of_power_product(field, &primes, &exps)?);
            class_part_size += 1;
        }
    }
    Ok(SingularBasis {
        field: field.clone(),
        s_primes: s,
        basis,
        unit_part_size,
        class_part_size,
    })
}

/// Integer solution x of x * a = b, when one exists.
fn solve_left(a: &Mat, b: &[BigInt]) -> Option<Vec<BigInt>> {
    let (h, t) = linalg::hnf_with_transform(a);
    let cols = b.len();
    let mut residual = b.to_vec();
    let mut y = vec![BigInt::zero(); h.len()];
    for (r, hr) in h.iter().enumerate() {
        let Some(pivot_col) = hr.iter().position(|x| !x.is_zero()) else {
            continue;
        };
        let (q, rem) = residual[pivot_col].div_rem(&hr[pivot_col]);
        if !rem.is_zero() {
            continue;
        }
        if q.is_zero() {
            continue;
        }
        y[r] = q.clone();
        for c in 0..cols {
            residual[c] -= &q * &hr[c];
        }
    }
    if residual.iter().any(|x| !x.is_zero()) {
        return None;
    }
    // x = y * t
    let n = a.len();
    let mut x = vec![BigInt::zero(); n];
    for (r, yr) in y.iter().enumerate() {
        if yr.is_zero() {
            continue;
        }
        for c in 0..n {
            x[c] += yr * &t[r][c];
        }
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ideals::{dyadic_primes, factor_principal, primes_above};

    fn kd(d: i64) -> Arc<NumberField> {
        NumberField::quadratic(BigInt::from(d)).unwrap()
    }

    /// Independent class-number oracle for imaginary quadratic fields: count
    /// of reduced positive binary quadratic forms of the field discriminant.
    fn reduced_form_count(disc: i64) -> usize {
        assert!(disc < 0);
        let mut count = 0;
        let mut b = if disc % 2 == 0 { 0i64 } else { 1 };
        while b * b <= -disc / 3 {
            let ac4 = b * b - disc;
            if ac4 % 4 == 0 {
                let ac = ac4 / 4;
                let mut a = b.max(1);
                while a * a <= ac {
                    if a >= b && ac % a == 0 {
                        let c = ac / a;
                        if a <= c {
                            count += 1;
                            // forms (a, -b, c) are distinct unless ambiguous
                            if b > 0 && a != b && a != c {
                                count += 1;
                            }
                        }
                    }
                    a += 1;
                }
            }
            b += 2;
        }
        count
    }

    #[test]
    fn class_numbers_match_form_count() {
        for (d, disc) in [(-7i64, -7i64), (-5, -20), (-1, -4), (-14, -56), (-23, -23)] {
            let k = kd(d);
            let cg = class_group(&k).unwrap();
            assert_eq!(
                cg.order,
                BigInt::from(reduced_form_count(disc) as i64),
                "d = {d}"
            );
        }
        let q = NumberField::rationals();
        assert!(class_group(&q).unwrap().order.is_one());
        assert!(class_group(&kd(2)).unwrap().order.is_one());
    }

    #[test]
    fn fundamental_units() {
        let k2 = kd(2);
        let u = fundamental_unit(&k2).unwrap();
        assert_eq!(u, k2.parse_elt("1+t").unwrap());
        let k5 = kd(5);
        let golden = fundamental_unit(&k5).unwrap();
        assert_eq!(golden, k5.parse_elt("(1+t)/2").unwrap());
        let k10 = kd(10);
        assert_eq!(fundamental_unit(&k10).unwrap(), k10.parse_elt("3+t").unwrap());
    }

    #[test]
    fn principality_examples() {
        let k = kd(-7);
        let five = IdealLat::principal(&k, &k.from_i64(5));
        let g = is_principal(&k, &five).unwrap().unwrap();
        assert_eq!(k.norm(&g).abs(), arith::rat(25));

        // d1^2 in Q(sqrt -7) is principal (h = 1); verify through factorization
        let d1 = dyadic_primes(&k).remove(0);
        let sq = d1.power(2);
        let lam = is_principal(&k, &sq).unwrap().unwrap();
        let fact = factor_principal(&k, &lam).unwrap();
        assert_eq!(fact.factors.len(), 1);
        assert_eq!(fact.factors[0].0, d1);
        assert_eq!(fact.factors[0].1, 2);

        // (2, 1 + sqrt(-5)) is not principal
        let k5 = kd(-5);
        let d2 = dyadic_primes(&k5).remove(0);
        assert!(is_principal(&k5, &d2.lattice).unwrap().is_none());
    }

    #[test]
    fn s_class_group_examples() {
        let k5 = kd(-5);
        // quotient by the non-principal dyadic class kills the group
        let d2 = dyadic_primes(&k5).remove(0);
        let cs = s_class_group(&k5, &[d2]).unwrap();
        assert!(cs.order.is_one());
        // the ramified prime over 5 is principal, so the quotient keeps order 2
        let p5 = primes_above(&k5, &BigInt::from(5)).unwrap().remove(0);
        assert!(is_principal(&k5, &p5.lattice).unwrap().is_some());
        let cs5 = s_class_group(&k5, &[p5]).unwrap();
        assert_eq!(cs5.order, BigInt::from(2));
    }

    #[test]
    fn s_units_examples() {
        let q = NumberField::rationals();
        let s: Vec<PrimeIdeal> = [2i64, 3]
            .iter()
            .map(|&p| primes_above(&q, &BigInt::from(p)).unwrap().remove(0))
            .collect();
        let us = s_units_mod_squares(&q, &s).unwrap();
        assert_eq!(us.len(), 3);
        assert_eq!(us[0], q.from_i64(-1));
        let vals: Vec<BigRational> = us[1..].iter().map(|u| u.coeffs[0].clone()).collect();
        assert!(vals.contains(&arith::rat(2)) && vals.contains(&arith::rat(3)));

        let k2 = kd(2);
        let us2 = s_units_mod_squares(&k2, &[]).unwrap();
        assert_eq!(us2.len(), 2);
        assert_eq!(us2[1], k2.parse_elt("1+t").unwrap());

        let k7 = kd(-7);
        let d1 = dyadic_primes(&k7).remove(0);
        let us7 = s_units_mod_squares(&k7, &[d1.clone()]).unwrap();
        assert_eq!(us7.len(), 2);
        let lam = &us7[1];
        let f = factor_principal(&k7, lam).unwrap();
        assert_eq!(f.factors.len(), 1);
        assert_eq!(f.factors[0].0, d1);
    }

    #[test]
    fn dependent_classes_still_give_a_basis() {
        // two primes over 3 and 2 of Q(sqrt -5) share the nontrivial class;
        // the naive per-prime generators would be F_2-dependent
        let k = kd(-5);
        let d2 = dyadic_primes(&k).remove(0);
        let p3 = primes_above(&k, &BigInt::from(3)).unwrap().remove(0);
        let us = s_units_mod_squares(&k, &[d2.clone(), p3.clone()]).unwrap();
        assert_eq!(us.len(), 3);
        // independence: no nonempty product may be a global square
        for mask in 1u32..8 {
            let mut prod = k.one();
            for (i, u) in us.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    prod = k.mul(&prod, u);
                }
            }
            assert!(
                k.is_global_square(&prod).is_none(),
                "dependent subset {mask:b}"
            );
        }
    }

    #[test]
    fn singular_basis_examples() {
        // Q with S = {(2)}: basis {-1, 2}
        let q = NumberField::rationals();
        let s2 = primes_above(&q, &BigInt::from(2)).unwrap();
        let sb = singular_group_basis(&q, &s2).unwrap();
        assert_eq!(sb.basis.len(), 2);
        assert_eq!(sb.class_part_size, 0);

        // Q(sqrt -7), S = the four primes of the worked example: size 5
        let k = kd(-7);
        let mut s: Vec<PrimeIdeal> = dyadic_primes(&k);
        s.push(primes_above(&k, &BigInt::from(3)).unwrap().remove(0));
        let p37 = primes_above(&k, &BigInt::from(37)).unwrap();
        s.push(p37.into_iter().next().unwrap());
        let sb = singular_group_basis(&k, &s).unwrap();
        assert_eq!(sb.basis.len(), 5); // r1 + r2 + |S| + dim 2C_S = 0 + 1 + 4 + 0
        assert_eq!(sb.class_part_size, 0);
        // every basis element is S-singular
        for e in &sb.basis {
            let f = factor_principal(&k, e).unwrap();
            for (p, v) in &f.factors {
                if !sb.s_primes.contains(p) {
                    assert!(v % 2 == 0, "odd valuation outside S");
                }
            }
        }

        // Q(sqrt -5) with only the dyadic prime: 2C_S is trivial since the
        // dyadic class generates the whole group
        let k5 = kd(-5);
        let sb5 = singular_group_basis(&k5, &dyadic_primes(&k5)).unwrap();
        assert_eq!(sb5.basis.len(), 2);
        assert_eq!(sb5.class_part_size, 0);

        // Q(sqrt -14): C = Z/4, the dyadic class has order 2, so C_S = Z/2
        // and one lambda_b appears
        let k14 = kd(-14);
        let sb14 = singular_group_basis(&k14, &dyadic_primes(&k14)).unwrap();
        assert_eq!(sb14.class_part_size, 1);
        assert_eq!(sb14.basis.len(), 3); // 0 + 1 + 1 + 1
        for e in &sb14.basis {
            let f = factor_principal(&k14, e).unwrap();
            for (p, v) in &f.factors {
                if !sb14.s_primes.contains(p) {
                    assert!(v % 2 == 0, "odd valuation outside S for {:?}", e);
                }
            }
        }
    }
}
