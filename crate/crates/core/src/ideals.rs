//! Prime ideals of O_K, valuations, factorization of principal ideals and the
//! Chinese Remainder Theorem, all through explicit Z-lattices in the integral
//! basis. Fully supported for degrees 1 and 2; the test cubic only sees
//! ideals generated by rational integers.

use crate::arith;
use crate::field::{FieldElt, NumberField};
use crate::linalg;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::cmp::Ordering;
use std::fmt;
use std::sync::{Arc, Mutex};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IdealError {
    NotPrime(BigInt),
    InfiniteValuation,
    DuplicateModulus,
    NonIntegralTarget,
    EmptyData,
    UnsupportedDegree,
}

impl fmt::Display for IdealError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IdealError::NotPrime(p) => write!(f, "{p} is not a rational prime"),
            IdealError::InfiniteValuation => write!(f, "valuation of zero is infinite"),
            IdealError::DuplicateModulus => write!(f, "duplicate prime modulus"),
            IdealError::NonIntegralTarget => write!(f, "congruence target is not integral"),
            IdealError::EmptyData => write!(f, "empty congruence data"),
            IdealError::UnsupportedDegree => write!(f, "ideal operation unsupported for this degree"),
        }
    }
}

impl std::error::Error for IdealError {}

/// Full-rank sublattice of O_K in row-echelon Hermite form over the integral
/// basis; the canonical representation of an integral ideal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdealLat {
    pub rows: Vec<Vec<BigInt>>,
}

impl IdealLat {
    pub fn from_generators(field: &NumberField, gens: &[Vec<BigInt>]) -> IdealLat {
        let n = field.degree();
        // close under multiplication by the integral basis
        let mut rows: Vec<Vec<BigInt>> = Vec::new();
        for g in gens {
            for b in 0..n {
                let mut basis_vec = vec![BigInt::zero(); n];
                basis_vec[b] = BigInt::one();
                rows.push(field.integral_mul(g, &basis_vec));
            }
        }
        let (h, _) = linalg::hnf_with_transform(&rows);
        let basis: Vec<Vec<BigInt>> = h.into_iter().take(n).collect();
        assert!(
            basis.len() == n && (0..n).all(|i| !basis[i][i].is_zero()),
            "ideal lattice is not full rank"
        );
        IdealLat { rows: basis }
    }

    pub fn principal(field: &NumberField, x: &FieldElt) -> IdealLat {
        let coords = field
            .integral_coords(x)
            .expect("principal ideal of a non-integral element");
        IdealLat::from_generators(field, &[coords])
    }

    pub fn whole_ring(field: &NumberField) -> IdealLat {
        IdealLat {
            rows: linalg::identity(field.degree()),
        }
    }

    pub fn of_rational(field: &NumberField, m: &BigInt) -> IdealLat {
        let n = field.degree();
        let mut rows = linalg::identity(n);
        for (i, row) in rows.iter_mut().enumerate() {
            row[i] = m.abs();
        }
        IdealLat { rows }
    }

    pub fn norm(&self) -> BigInt {
        (0..self.rows.len()).map(|i| self.rows[i][i].clone()).product()
    }

    /// Reduces integer coordinates modulo the lattice into the canonical box.
    pub fn reduce(&self, coords: &[BigInt]) -> Vec<BigInt> {
        let mut v = coords.to_vec();
        for i in 0..self.rows.len() {
            let q = v[i].div_floor(&self.rows[i][i]);
            if !q.is_zero() {
                for j in 0..v.len() {
                    v[j] -= &q * &self.rows[i][j];
                }
            }
        }
        v
    }

    pub fn contains(&self, coords: &[BigInt]) -> bool {
        self.reduce(coords).iter().all(|c| c.is_zero())
    }

    pub fn contains_elt(&self, field: &NumberField, x: &FieldElt) -> bool {
        match field.integral_coords(x) {
            Some(c) => self.contains(&c),
            None => false,
        }
    }

    pub fn mul(&self, field: &NumberField, other: &IdealLat) -> IdealLat {
        let mut gens = Vec::new();
        for a in &self.rows {
            for b in &other.rows {
                gens.push(field.integral_mul(a, b));
            }
        }
        IdealLat::from_generators(field, &gens)
    }

    /// Exact division of every entry by a positive integer; valid when the
    /// lattice is m times an integral ideal.
    pub fn div_rational(&self, m: &BigInt) -> IdealLat {
        IdealLat {
            rows: self
                .rows
                .iter()
                .map(|r| {
                    r.iter()
                        .map(|x| {
                            let (q, rem) = x.div_rem(m);
                            assert!(rem.is_zero(), "inexact lattice division");
                            q
                        })
                        .collect()
                })
                .collect(),
        }
    }

    pub fn conj(&self, field: &NumberField) -> IdealLat {
        let gens: Vec<Vec<BigInt>> = self
            .rows
            .iter()
            .map(|r| {
                let x = field.from_integer_coords(r);
                field.integral_coords(&field.conj(&x)).unwrap()
            })
            .collect();
        IdealLat::from_generators(field, &gens)
    }

    /// Is this the extension (m) of a rational integer ideal?
    pub fn is_rational(&self) -> Option<BigInt> {
        let m = self.rows[0][0].clone();
        let n = self.rows.len();
        let diag_ok = (0..n).all(|i| self.rows[i][i] == m);
        let off_ok = (0..n).all(|i| (0..n).all(|j| i == j || self.rows[i][j].is_zero()));
        if diag_ok && off_ok {
            Some(m)
        } else {
            None
        }
    }
}

/// A non-archimedean place of K.
#[derive(Clone)]
pub struct PrimeIdeal {
    pub field: Arc<NumberField>,
    /// rational prime below
    pub under: BigInt,
    /// second generator in the two-element representation (p, g), if any
    pub gens_second: Option<FieldElt>,
    pub residue_degree: u32,
    pub ram_index: u32,
    pub lattice: IdealLat,
    pub uniformizer: FieldElt,
    pub residue: ResidueRepr,
    power_cache: Arc<Mutex<Vec<IdealLat>>>,
}

#[derive(Clone, Debug)]
pub enum ResidueRepr {
    /// residue field F_p with the image of the integral basis element omega
    Fp { omega_img: BigInt },
    /// residue field F_{p^2}; omega satisfies x^2 + c1 x + c0 = 0 mod p
    Fp2 { c0: BigInt, c1: BigInt },
    /// residue data not materialized (dyadic-only use in the test cubic)
    Opaque,
}

impl fmt::Debug for PrimeIdeal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PrimeIdeal({})", self.display())
    }
}

impl PartialEq for PrimeIdeal {
    fn eq(&self, other: &Self) -> bool {
        self.under == other.under && self.lattice == other.lattice
    }
}
impl Eq for PrimeIdeal {}

impl std::hash::Hash for PrimeIdeal {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.under.hash(state);
        for r in &self.lattice.rows {
            for x in r {
                x.hash(state);
            }
        }
    }
}

impl PartialOrd for PrimeIdeal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for PrimeIdeal {
    fn cmp(&self, other: &Self) -> Ordering {
        self.sort_key().cmp(&other.sort_key())
    }
}

impl PrimeIdeal {
    pub fn norm(&self) -> BigInt {
        self.under.pow(self.residue_degree)
    }

    pub fn is_dyadic(&self) -> bool {
        self.under == BigInt::from(2)
    }

    fn sort_key(&self) -> (BigInt, BigInt, Vec<BigInt>) {
        let flat: Vec<BigInt> = self.lattice.rows.iter().flatten().cloned().collect();
        (self.norm(), self.under.clone(), flat)
    }

    /// `(p)` or `(p, g)`, parseable back by [`parse_prime`].
    pub fn display(&self) -> String {
        match &self.gens_second {
            None => format!("({})", self.under),
            Some(g) => format!("({}, {})", self.under, self.field.print_elt(g)),
        }
    }

    /// Lattice of the k-th power, cached.
    pub fn power(&self, k: u32) -> IdealLat {
        assert!(k >= 1);
        let mut cache = self.power_cache.lock().unwrap();
        if cache.is_empty() {
            cache.push(self.lattice.clone());
        }
        while cache.len() < k as usize {
            let next = cache.last().unwrap().mul(&self.field, &self.lattice);
            cache.push(next);
        }
        cache[k as usize - 1].clone()
    }
}

/// The primes of O_K over a rational prime p, ordered deterministically
/// (split primes by ascending residue of the second generator).
pub fn primes_above(field: &Arc<NumberField>, p: &BigInt) -> Result<Vec<PrimeIdeal>, IdealError> {
    if !arith::is_prime(p) {
        return Err(IdealError::NotPrime(p.clone()));
    }
    match field.degree() {
        1 => Ok(vec![rational_prime(field, p)]),
        2 => Ok(quadratic_primes_above(field, p)),
        _ => cubic_primes_above(field, p),
    }
}

fn rational_prime(field: &Arc<NumberField>, p: &BigInt) -> PrimeIdeal {
    PrimeIdeal {
        field: field.clone(),
        under: p.clone(),
        gens_second: None,
        residue_degree: 1,
        ram_index: 1,
        lattice: IdealLat::of_rational(field, p),
        uniformizer: field.from_rational(BigRational::from(p.clone())),
        residue: ResidueRepr::Fp {
            omega_img: BigInt::zero(),
        },
        power_cache: Arc::new(Mutex::new(Vec::new())),
    }
}

fn quadratic_primes_above(field: &Arc<NumberField>, p: &BigInt) -> Vec<PrimeIdeal> {
    let d = field.d().unwrap().clone();
    let two = BigInt::from(2);
    let make = |second: Option<FieldElt>, f_deg: u32, e: u32, residue: ResidueRepr| {
        let mut gens: Vec<Vec<BigInt>> = vec![vec![p.clone(), BigInt::zero()]];
        if let Some(g) = &second {
            gens.push(field.integral_coords(g).expect("two-element generator is integral"));
        }
        let lattice = IdealLat::from_generators(field, &gens);
        let mut prime = PrimeIdeal {
            field: field.clone(),
            under: p.clone(),
            gens_second: second,
            residue_degree: f_deg,
            ram_index: e,
            lattice,
            uniformizer: field.one(), // fixed below
            residue,
            power_cache: Arc::new(Mutex::new(Vec::new())),
        };
        prime.uniformizer = choose_uniformizer(&prime);
        prime
    };

    if p == &two {
        let m8 = d.mod_floor(&BigInt::from(8));
        let m4 = d.mod_floor(&BigInt::from(4));
        if m8 == BigInt::one() {
            // 2 splits: omega has minimal polynomial x^2 - x + (1-d)/4 = x(x-1) mod 2
            let omega = field.from_integral_coords(&[BigRational::zero(), BigRational::one()]);
            let omega1 = field.add(&omega, &field.one());
            let p0 = make(Some(omega.clone()), 1, 1, ResidueRepr::Fp { omega_img: BigInt::zero() });
            let p1 = make(Some(omega1), 1, 1, ResidueRepr::Fp { omega_img: BigInt::one() });
            vec![p0, p1]
        } else if m4 == BigInt::one() {
            // d = 5 mod 8: inert
            let c0 = (BigInt::one() - &d) / BigInt::from(4);
            vec![make(None, 2, 1, ResidueRepr::Fp2 { c0, c1: BigInt::from(-1) })]
        } else if m4 == BigInt::from(3) {
            let g = field.add(&field.one(), &field.theta());
            vec![make(Some(g), 1, 2, ResidueRepr::Fp { omega_img: BigInt::one() })]
        } else {
            // d even
            let g = field.theta();
            vec![make(Some(g), 1, 2, ResidueRepr::Fp { omega_img: BigInt::zero() })]
        }
    } else {
        let dm = d.mod_floor(p);
        if dm.is_zero() {
            // ramified
            let g = field.theta();
            let omega_img = omega_image_from_theta(field, &BigInt::zero(), p);
            vec![make(Some(g), 1, 2, ResidueRepr::Fp { omega_img })]
        } else {
            match sqrt_mod_p(&dm, p) {
                Some(r) => {
                    let mut roots = [r.clone(), p - &r];
                    roots.sort();
                    roots
                        .iter()
                        .map(|r| {
                            let g = field.sub(&field.theta(), &field.from_rational(BigRational::from(r.clone())));
                            let omega_img = omega_image_from_theta(field, r, p);
                            make(Some(g), 1, 1, ResidueRepr::Fp { omega_img })
                        })
                        .collect()
                }
                None => {
                    // inert: minimal polynomial of omega mod p
                    let (c0, c1) = if field.omega_is_half() {
                        ((BigInt::one() - &d) / BigInt::from(4), BigInt::from(-1))
                    } else {
                        (-d.clone(), BigInt::zero())
                    };
                    vec![make(None, 2, 1, ResidueRepr::Fp2 { c0, c1 })]
                }
            }
        }
    }
}

/// omega = (1+theta)/2 or theta; its image mod p given the image of theta.
fn omega_image_from_theta(field: &NumberField, theta_img: &BigInt, p: &BigInt) -> BigInt {
    if field.omega_is_half() {
        // (1 + theta)/2 mod p, p odd here
        let inv2 = mod_inverse(&BigInt::from(2), p);
        ((BigInt::one() + theta_img) * inv2).mod_floor(p)
    } else {
        theta_img.mod_floor(p)
    }
}

fn cubic_primes_above(field: &Arc<NumberField>, p: &BigInt) -> Result<Vec<PrimeIdeal>, IdealError> {
    // only inert rational primes are supported in the test cubic; 2 is one
    // (x^3 + x + 1 is irreducible over F_2)
    let fp: Vec<BigInt> = field.def_poly().iter().map(|c| c.mod_floor(p)).collect();
    let has_root = int_range(p).any(|r| {
        let mut acc = BigInt::zero();
        for c in fp.iter().rev() {
            acc = (acc * &r + c).mod_floor(p);
        }
        acc.is_zero()
    });
    if has_root {
        return Err(IdealError::UnsupportedDegree);
    }
    // irreducible cubic mod p (no roots means no linear factor; a quadratic
    // factor would force a linear one too for degree 3): p is inert
    Ok(vec![PrimeIdeal {
        field: field.clone(),
        under: p.clone(),
        gens_second: None,
        residue_degree: 3,
        ram_index: 1,
        lattice: IdealLat::of_rational(field, p),
        uniformizer: field.from_rational(BigRational::from(p.clone())),
        residue: ResidueRepr::Opaque,
        power_cache: Arc::new(Mutex::new(Vec::new())),
    }])
}

fn int_range(p: &BigInt) -> impl Iterator<Item = BigInt> {
    let mut cur = BigInt::zero();
    let end = p.clone();
    std::iter::from_fn(move || {
        if cur < end {
            let v = cur.clone();
            cur += 1;
            Some(v)
        } else {
            None
        }
    })
}

fn choose_uniformizer(prime: &PrimeIdeal) -> FieldElt {
    let field = &prime.field;
    if prime.gens_second.is_none() {
        return field.from_rational(BigRational::from(prime.under.clone()));
    }
    let g = prime.gens_second.clone().unwrap();
    if ord_at(&g, prime).unwrap() == 1 {
        return g;
    }
    let gp = field.add(&g, &field.from_rational(BigRational::from(prime.under.clone())));
    debug_assert_eq!(ord_at(&gp, prime).unwrap(), 1);
    gp
}

/// Tonelli-Shanks square root mod an odd prime.
fn sqrt_mod_p(a: &BigInt, p: &BigInt) -> Option<BigInt> {
    let a = a.mod_floor(p);
    if a.is_zero() {
        return Some(BigInt::zero());
    }
    let one = BigInt::one();
    let pm1 = p - &one;
    let half = &pm1 / BigInt::from(2);
    if a.modpow(&half, p) != one {
        return None;
    }
    if p.mod_floor(&BigInt::from(4)) == BigInt::from(3) {
        let e = (p + &one) / BigInt::from(4);
        return Some(a.modpow(&e, p));
    }
    // Tonelli-Shanks
    let mut q = pm1.clone();
    let mut s = 0u32;
    while q.is_even() {
        q /= 2;
        s += 1;
    }
    let mut z = BigInt::from(2);
    while z.modpow(&half, p) == one {
        z += 1;
    }
    let mut m = s;
    let mut c = z.modpow(&q, p);
    let mut t = a.modpow(&q, p);
    let mut r = a.modpow(&((&q + &one) / BigInt::from(2)), p);
    while t != one {
        let mut i = 0u32;
        let mut t2 = t.clone();
        while t2 != one {
            t2 = (&t2 * &t2).mod_floor(p);
            i += 1;
        }
        let b = c.modpow(&BigInt::from(2).pow(m - i - 1), p);
        m = i;
        c = (&b * &b).mod_floor(p);
        t = (&t * &c).mod_floor(p);
        r = (&r * &b).mod_floor(p);
    }
    Some(r)
}

pub fn mod_inverse(a: &BigInt, m: &BigInt) -> BigInt {
    let e = a.extended_gcd(m);
    assert!(e.gcd.is_one(), "not invertible");
    e.x.mod_floor(m)
}

/// The exact valuation ord_P(x) for nonzero x.
pub fn ord_at(x: &FieldElt, prime: &PrimeIdeal) -> Result<i64, IdealError> {
    if x.is_zero() {
        return Err(IdealError::InfiniteValuation);
    }
    let field = &prime.field;
    let den = field.denominator(x);
    let y = field.mul_rat(x, &BigRational::from(den.clone()));
    let ycoords = field.integral_coords(&y).unwrap();
    let vden = ord_rational_int(&den, &prime.under) * prime.ram_index as i64;
    Ok(ord_integral(&ycoords, prime) - vden)
}

fn ord_rational_int(n: &BigInt, p: &BigInt) -> i64 {
    let mut v = 0i64;
    let mut m = n.abs();
    while !m.is_zero() && (&m % p).is_zero() {
        m /= p;
        v += 1;
    }
    v
}

fn ord_integral(coords: &[BigInt], prime: &PrimeIdeal) -> i64 {
    // fast path for ideals generated by a rational prime
    if prime.gens_second.is_none() {
        let v = coords
            .iter()
            .filter(|c| !c.is_zero())
            .map(|c| ord_rational_int(c, &prime.under))
            .min()
            .unwrap();
        return v * prime.ram_index as i64;
    }
    let mut k = 0u32;
    loop {
        let lat = prime.power(k + 1);
        if lat.contains(coords) {
            k += 1;
        } else {
            return k as i64;
        }
    }
}

/// Factorization of the fractional ideal (x) into primes with exponents.
#[derive(Clone, Debug)]
pub struct IdealFactorization {
    pub element: FieldElt,
    pub factors: Vec<(PrimeIdeal, i64)>,
}

pub fn factor_principal(
    field: &Arc<NumberField>,
    x: &FieldElt,
) -> Result<IdealFactorization, IdealError> {
    if x.is_zero() {
        return Err(IdealError::InfiniteValuation);
    }
    let den = field.denominator(x);
    let y = field.mul_rat(x, &BigRational::from(den.clone()));
    let nrm = field.norm(&y).to_integer().abs();
    let mut rational_primes: std::collections::BTreeSet<BigInt> =
        arith::factor(&nrm).into_keys().collect();
    for (p, _) in arith::factor(&den) {
        rational_primes.insert(p);
    }
    let mut factors = Vec::new();
    for p in rational_primes {
        for prime in primes_above(field, &p)? {
            let v = ord_at(x, &prime)?;
            if v != 0 {
                factors.push((prime, v));
            }
        }
    }
    factors.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(IdealFactorization {
        element: x.clone(),
        factors,
    })
}

/// beta in O_K with ord_{P_i}(beta - lambda_i) >= k_i for every datum.
pub fn crt(
    field: &Arc<NumberField>,
    data: &[(PrimeIdeal, u32, FieldElt)],
) -> Result<FieldElt, IdealError> {
    if data.is_empty() {
        return Err(IdealError::EmptyData);
    }
    for i in 0..data.len() {
        for j in (i + 1)..data.len() {
            if data[i].0 == data[j].0 {
                return Err(IdealError::DuplicateModulus);
            }
        }
        if !field.is_integral(&data[i].2) {
            return Err(IdealError::NonIntegralTarget);
        }
        assert!(data[i].1 >= 1, "crt exponent must be positive");
    }
    let mut beta = field
        .integral_coords(&data[0].2)
        .ok_or(IdealError::NonIntegralTarget)?;
    let mut modulus = data[0].0.power(data[0].1);
    beta = modulus.reduce(&beta);
    for (prime, k, lambda) in &data[1..] {
        let m2 = prime.power(*k);
        let lam = field.integral_coords(lambda).unwrap();
        // find x in modulus, y in m2 with x + y = 1
        let (x, _y) = coprime_split(field, &modulus, &m2);
        // beta' = lambda * x + beta * (1 - x)
        let xel = field.from_integer_coords(&x);
        let beta_el = field.from_integer_coords(&beta);
        let lam_el = field.from_integer_coords(&lam);
        let new = field.add(
            &field.mul(&lam_el, &xel),
            &field.mul(&beta_el, &field.sub(&field.one(), &xel)),
        );
        modulus = modulus.mul(field, &m2);
        beta = modulus.reduce(&field.integral_coords(&new).unwrap());
    }
    // shrink the representative with a reduced basis of the modulus
    let beta = small_residue(field, &beta, &modulus);
    let out = field.from_integer_coords(&beta);
    for (prime, k, lambda) in data {
        debug_assert!({
            let diff = field.sub(&out, lambda);
            diff.is_zero() || ord_at(&diff, prime).unwrap() >= *k as i64
        });
    }
    Ok(out)
}

/// For coprime full lattices M, N: finds x in M, y in N with x + y = 1.
fn coprime_split(field: &NumberField, m: &IdealLat, n: &IdealLat) -> (Vec<BigInt>, Vec<BigInt>) {
    let deg = field.degree();
    let mut stacked: Vec<Vec<BigInt>> = Vec::new();
    stacked.extend(m.rows.iter().cloned());
    stacked.extend(n.rows.iter().cloned());
    let (h, t) = linalg::hnf_with_transform(&stacked);
    // coprimality means the HNF of the sum is the identity
    let is_identity = (0..deg).all(|i| {
        (0..deg).all(|j| h[i][j] == if i == j { BigInt::one() } else { BigInt::zero() })
    });
    assert!(is_identity, "moduli are not coprime");
    // row 0 of t expresses e_0 = 1 as a combination of the stacked rows
    let mut x = vec![BigInt::zero(); deg];
    for (idx, coef) in t[0].iter().enumerate() {
        if coef.is_zero() {
            continue;
        }
        let row = &stacked[idx];
        let contrib: Vec<BigInt> = row.iter().map(|v| v * coef).collect();
        if idx < deg {
            for j in 0..deg {
                x[j] += &contrib[j];
            }
        }
    }
    let mut y = vec![BigInt::zero(); deg];
    y[0] = BigInt::one();
    for j in 0..deg {
        y[j] -= &x[j];
    }
    debug_assert!(m.contains(&x) && n.contains(&y));
    (x, y)
}

/// Positive definite integer form used for lattice reduction: the trace form
/// Tr(x^2) for totally real fields, twice the norm otherwise.
pub(crate) fn pos_def_q(field: &NumberField, coords: &[BigInt]) -> BigRational {
    let x = field.from_integer_coords(coords);
    if field.real_place_count() == field.degree() {
        // Tr(x^2): sum over embeddings of sigma(x)^2
        let sq = field.mul(&x, &x);
        trace(field, &sq)
    } else {
        let n = field.norm(&x);
        &n + &n
    }
}

fn trace(field: &NumberField, x: &FieldElt) -> BigRational {
    match field.degree() {
        1 => x.coeffs[0].clone(),
        2 => &x.coeffs[0] + &x.coeffs[0],
        _ => {
            // trace of multiplication matrix on the power basis
            let n = field.degree();
            let mut tr = BigRational::zero();
            let mut pw = field.one();
            for i in 0..n {
                let prod = field.mul(x, &pw);
                // coefficient of theta^i in x * theta^i contributes to the trace
                tr += &prod.coeffs[i];
                pw = field.mul(&pw, &field.theta());
            }
            tr
        }
    }
}

/// Lagrange-reduced basis of a rank-2 lattice under the positive definite
/// form: near-orthogonal short vectors, first shortest.
pub(crate) fn lagrange_reduced_basis(field: &NumberField, rows: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let mut basis: Vec<Vec<BigInt>> = rows.to_vec();
    if basis.len() != 2 {
        return basis;
    }
    loop {
        let q0 = pos_def_q(field, &basis[0]);
        let q1 = pos_def_q(field, &basis[1]);
        if q1 < q0 {
            basis.swap(0, 1);
            continue;
        }
        // polar form B(b0, b1) = (Q(b0+b1) - Q(b0) - Q(b1)) / 2
        let sum: Vec<BigInt> = basis[0].iter().zip(&basis[1]).map(|(a, b)| a + b).collect();
        let cross0 = (pos_def_q(field, &sum) - pos_def_q(field, &basis[0]) - pos_def_q(field, &basis[1]))
            / arith::rat(2);
        let mu = round_rational(&(&cross0 / &pos_def_q(field, &basis[0])));
        if mu.is_zero() {
            break;
        }
        for j in 0..basis[0].len() {
            let t = &basis[0][j] * &mu;
            basis[1][j] -= t;
        }
    }
    basis
}

/// Reduces a residue to a short representative modulo the lattice using
/// Lagrange-reduced basis vectors (degree <= 2; higher degrees fall back to
/// the box representative).
fn small_residue(field: &NumberField, coords: &[BigInt], lat: &IdealLat) -> Vec<BigInt> {
    if field.degree() > 2 {
        return lat.reduce(coords);
    }
    let basis = lagrange_reduced_basis(field, &lat.rows);
    // Babai nearest-plane style size reduction of the representative
    let mut v = coords.to_vec();
    for _ in 0..3 {
        for b in basis.iter().rev() {
            let qb = pos_def_q(field, b);
            let sum: Vec<BigInt> = v.iter().zip(b).map(|(a, x)| a + x).collect();
            let cross = (pos_def_q(field, &sum) - pos_def_q(field, &v) - &qb) / arith::rat(2);
            let mu = round_rational(&(&cross / &qb));
            if !mu.is_zero() {
                for j in 0..v.len() {
                    let t = &b[j] * &mu;
                    v[j] -= t;
                }
            }
        }
    }
    v
}

fn round_rational(q: &BigRational) -> BigInt {
    let half = arith::ratio(1, 2);
    (q + half).floor().to_integer()
}

/// Deterministic enumeration of the primes of O_K in nondecreasing norm,
/// split primes ordered by their second generator.
pub struct PrimeCursor {
    field: Arc<NumberField>,
    skip: Vec<PrimeIdeal>,
    emitted: Vec<PrimeIdeal>,
    horizon: u64,
}

impl PrimeCursor {
    pub fn new(field: Arc<NumberField>, skip: &[PrimeIdeal]) -> Self {
        PrimeCursor {
            field,
            skip: skip.to_vec(),
            emitted: Vec::new(),
            horizon: 8,
        }
    }

    fn complete_up_to(&self, bound: u64) -> Vec<PrimeIdeal> {
        let mut all = Vec::new();
        for p in arith::RationalPrimes::new().take_while(|&p| p <= bound) {
            if let Ok(ps) = primes_above(&self.field, &BigInt::from(p)) {
                all.extend(ps);
            }
        }
        all.retain(|q| q.norm() <= BigInt::from(bound));
        all.sort();
        all
    }
}

impl Iterator for PrimeCursor {
    type Item = PrimeIdeal;
    fn next(&mut self) -> Option<PrimeIdeal> {
        loop {
            let list = self.complete_up_to(self.horizon);
            for q in list {
                if self.skip.contains(&q) || self.emitted.contains(&q) {
                    continue;
                }
                self.emitted.push(q.clone());
                return Some(q);
            }
            self.horizon *= 2;
        }
    }
}

/// First prime outside S in the canonical enumeration starting from a cursor.
pub fn next_prime_outside(cursor: &mut PrimeCursor, extra_skip: &[PrimeIdeal]) -> PrimeIdeal {
    loop {
        let q = cursor.next().expect("prime supply is infinite");
        if !extra_skip.contains(&q) {
            return q;
        }
    }
}

pub fn dyadic_primes(field: &Arc<NumberField>) -> Vec<PrimeIdeal> {
    primes_above(field, &BigInt::from(2)).expect("2 is prime")
}

/// Parses the display format `(p)` or `(p, g)` back into a prime ideal.
pub fn parse_prime(field: &Arc<NumberField>, s: &str) -> Result<PrimeIdeal, IdealError> {
    let t = s.trim();
    let inner = t
        .strip_prefix('(')
        .and_then(|x| x.strip_suffix(')'))
        .ok_or_else(|| IdealError::NotPrime(BigInt::zero()))?;
    let (pstr, gstr) = match inner.find(',') {
        Some(i) => (&inner[..i], Some(inner[i + 1..].trim())),
        None => (inner, None),
    };
    let p: BigInt = pstr
        .trim()
        .parse()
        .map_err(|_| IdealError::NotPrime(BigInt::zero()))?;
    let candidates = primes_above(field, &p)?;
    match gstr {
        None => {
            if candidates.len() == 1 && candidates[0].gens_second.is_none() {
                Ok(candidates.into_iter().next().unwrap())
            } else if candidates.len() == 1 {
                Ok(candidates.into_iter().next().unwrap())
            } else {
                Err(IdealError::NotPrime(p))
            }
        }
        Some(g) => {
            let gel = field
                .parse_elt(g)
                .map_err(|_| IdealError::NotPrime(p.clone()))?;
            let matching: Vec<PrimeIdeal> = candidates
                .into_iter()
                .filter(|q| q.lattice.contains_elt(field, &gel))
                .collect();
            if matching.len() == 1 {
                Ok(matching.into_iter().next().unwrap())
            } else {
                Err(IdealError::NotPrime(p))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    fn qm7() -> Arc<NumberField> {
        NumberField::quadratic(BigInt::from(-7)).unwrap()
    }

    #[test]
    fn primes_above_qm7() {
        let k = qm7();
        let dy = primes_above(&k, &BigInt::from(2)).unwrap();
        assert_eq!(dy.len(), 2);
        // the paper's d1 = (2, (1+sqrt(-7))/2) and d2 = (2, (7+sqrt(-7))/2)
        let d1g = k.parse_elt("(1+t)/2").unwrap();
        let d2g = k.parse_elt("(7+t)/2").unwrap();
        assert!(dy[0].lattice.contains_elt(&k, &d1g));
        assert!(dy[1].lattice.contains_elt(&k, &d2g));
        assert!(!dy[0].lattice.contains_elt(&k, &d2g));
        for p in &dy {
            assert_eq!((p.ram_index, p.residue_degree), (1, 1));
            assert_eq!(ord_at(&p.uniformizer, p).unwrap(), 1);
        }

        let p3 = primes_above(&k, &BigInt::from(3)).unwrap();
        assert_eq!(p3.len(), 1);
        assert_eq!(p3[0].residue_degree, 2);
        assert_eq!(p3[0].display(), "(3)");

        let p7 = primes_above(&k, &BigInt::from(7)).unwrap();
        assert_eq!(p7.len(), 1);
        assert_eq!(p7[0].ram_index, 2);
        assert!(p7[0].lattice.contains_elt(&k, &k.theta()));

        assert!(primes_above(&k, &BigInt::from(6)).is_err());
    }

    #[test]
    fn norm_product_over_p() {
        let k = qm7();
        for p in [2i64, 3, 5, 7, 11, 13, 37] {
            let ps = primes_above(&k, &BigInt::from(p)).unwrap();
            let total: BigInt = ps
                .iter()
                .map(|q| q.norm().pow(q.ram_index))
                .product();
            assert_eq!(total, BigInt::from(p * p), "p = {p}");
        }
    }

    #[test]
    fn ord_examples() {
        let k = qm7();
        let dy = primes_above(&k, &BigInt::from(2)).unwrap();
        assert_eq!(ord_at(&k.from_i64(8), &dy[0]).unwrap(), 3);
        assert_eq!(ord_at(&k.from_i64(8), &dy[1]).unwrap(), 3);

        let p7 = &primes_above(&k, &BigInt::from(7)).unwrap()[0];
        assert_eq!(ord_at(&k.theta(), p7).unwrap(), 1);

        let p3 = &primes_above(&k, &BigInt::from(3)).unwrap()[0];
        assert_eq!(ord_at(&k.from_i64(5), p3).unwrap(), 0);
        assert_eq!(ord_at(&k.parse_elt("1/3").unwrap(), p3).unwrap(), -1);
        assert!(ord_at(&k.zero(), p3).is_err());
    }

    #[test]
    fn factor_examples() {
        let k = qm7();
        let x = k.parse_elt("1-t").unwrap();
        let f = factor_principal(&k, &x).unwrap();
        let dy_total: i64 = f
            .factors
            .iter()
            .filter(|(p, _)| p.is_dyadic())
            .map(|(_, e)| *e)
            .sum();
        assert_eq!(dy_total, 3);
        assert!(f.factors.iter().all(|(p, _)| p.is_dyadic()));

        let one = factor_principal(&k, &k.one()).unwrap();
        assert!(one.factors.is_empty());

        // exact norm identity: sum of e_i * f_i * log p = log |N(x)|
        let y = k.parse_elt("-6+4*t").unwrap();
        let fy = factor_principal(&k, &y).unwrap();
        let mut norm_from_factors = BigRational::one();
        for (p, e) in &fy.factors {
            let pn = BigRational::from(p.norm());
            if *e >= 0 {
                norm_from_factors *= pn.pow(*e as i32);
            } else {
                norm_from_factors /= pn.pow((-e) as i32);
            }
        }
        assert_eq!(norm_from_factors, k.norm(&y).abs());
    }

    #[test]
    fn crt_examples() {
        let k = qm7();
        let p3 = primes_above(&k, &BigInt::from(3)).unwrap().remove(0);
        let beta = crt(&k, &[(p3.clone(), 1, k.from_i64(5))]).unwrap();
        let diff = k.sub(&beta, &k.from_i64(5));
        assert!(diff.is_zero() || ord_at(&diff, &p3).unwrap() >= 1);

        // duplicate moduli rejected
        let again = crt(
            &k,
            &[(p3.clone(), 1, k.one()), (p3.clone(), 2, k.one())],
        );
        assert_eq!(again, Err(IdealError::DuplicateModulus));

        // multi-prime system with equal targets
        let dy = primes_above(&k, &BigInt::from(2)).unwrap();
        let target = k.parse_elt("3+t").unwrap();
        let beta = crt(
            &k,
            &[
                (dy[0].clone(), 2, target.clone()),
                (dy[1].clone(), 1, target.clone()),
                (p3.clone(), 1, target.clone()),
            ],
        )
        .unwrap();
        for (pr, kk) in [(&dy[0], 2i64), (&dy[1], 1), (&p3, 1)] {
            let diff = k.sub(&beta, &target);
            assert!(diff.is_zero() || ord_at(&diff, pr).unwrap() >= kk);
        }

        // non-integral target rejected
        let bad = crt(&k, &[(p3.clone(), 1, k.parse_elt("t/2").unwrap())]);
        assert_eq!(bad, Err(IdealError::NonIntegralTarget));
    }

    #[test]
    fn cursor_enumeration() {
        let k = qm7();
        let mut c = PrimeCursor::new(k.clone(), &[]);
        let first = c.next().unwrap();
        assert_eq!(first.norm().to_i64(), Some(2));
        // skipping all primes of norm < 9 gives the inert (3)
        let small: Vec<PrimeIdeal> = PrimeCursor::new(k.clone(), &[])
            .take_while(|p| p.norm() < BigInt::from(9))
            .collect();
        let mut c2 = PrimeCursor::new(k.clone(), &small);
        let next = c2.next().unwrap();
        assert_eq!(next.norm(), BigInt::from(9));
        assert_eq!(next.display(), "(3)");

        let q = NumberField::rationals();
        let skip: Vec<PrimeIdeal> = [2i64, 3]
            .iter()
            .map(|&p| primes_above(&q, &BigInt::from(p)).unwrap().remove(0))
            .collect();
        let mut c3 = PrimeCursor::new(q, &skip);
        assert_eq!(c3.next().unwrap().under, BigInt::from(5));
    }

    #[test]
    fn display_parse_roundtrip() {
        let k = qm7();
        for p in [2i64, 3, 7, 11, 37] {
            for prime in primes_above(&k, &BigInt::from(p)).unwrap() {
                let shown = prime.display();
                let back = parse_prime(&k, &shown).unwrap();
                assert_eq!(back, prime, "{shown}");
            }
        }
    }

    #[test]
    fn cubic_rational_primes() {
        let k = NumberField::cubic_sign_field();
        let dy = primes_above(&k, &BigInt::from(2)).unwrap();
        assert_eq!(dy.len(), 1);
        assert_eq!(dy[0].residue_degree, 3);
        let x = k.parse_elt("2+2*t+4*t^2").unwrap();
        assert_eq!(ord_at(&x, &dy[0]).unwrap(), 1);
        let beta = crt(&k, &[(dy[0].clone(), 3, k.parse_elt("1+t").unwrap())]).unwrap();
        let diff = k.sub(&beta, &k.parse_elt("1+t").unwrap());
        assert!(diff.is_zero() || ord_at(&diff, &dy[0]).unwrap() >= 3);
    }
}
