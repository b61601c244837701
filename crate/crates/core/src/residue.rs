//! Finite quotient rings O/P^N with machine-word coordinates, used for the
//! dyadic square and Hilbert-symbol searches and for congruence lifting.
//!
//! Any x in K with ord_P(x) >= 0 can be reduced into the ring even when its
//! denominator meets other primes: the prime-to-P part of the denominator is
//! inverted inside the ring, and for split primes a conjugate-uniformizer
//! twist removes the contribution of the conjugate place.

use crate::field::{FieldElt, NumberField};
use crate::ideals::{ord_at, IdealLat, PrimeIdeal};
use crate::linalg;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use std::sync::Arc;

/// Element of a residue ring: canonical box coordinates over the integral basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RingElt(pub Vec<i64>);

pub struct ResidueRing {
    pub field: Arc<NumberField>,
    pub prime: PrimeIdeal,
    pub power: u32,
    deg: usize,
    /// HNF rows of the lattice P^power
    lat: Vec<Vec<i64>>,
    /// HNF rows of P itself
    prime_lat: Vec<Vec<i64>>,
    /// negated defining polynomial tail for power-basis reduction
    red: Vec<i64>,
    omega_is_half: bool,
    d: i64,
    pub size: u64,
    unit_count: u64,
    snf_div: Vec<u64>,
    snf_v: Vec<Vec<i64>>,
    snf_v_inv: Vec<Vec<i64>>,
}

fn to_i64_mat(m: &[Vec<BigInt>]) -> Option<Vec<Vec<i64>>> {
    m.iter()
        .map(|r| r.iter().map(|x| x.to_i64()).collect::<Option<Vec<i64>>>())
        .collect()
}

impl ResidueRing {
    /// Builds O/P^power. Panics when the quotient would exceed ~2^24 elements.
    pub fn new(prime: &PrimeIdeal, power: u32) -> ResidueRing {
        let field = prime.field.clone();
        let deg = field.degree();
        let lat_big = prime.power(power);
        let size_big = lat_big.norm();
        let size = size_big
            .to_u64()
            .filter(|&s| s <= (1 << 24))
            .expect("residue ring too large");
        let lat = to_i64_mat(&lat_big.rows).expect("lattice entries exceed i64");
        let prime_lat = to_i64_mat(&prime.lattice.rows).unwrap();
        let np = prime.norm().to_u64().unwrap();
        let unit_count = size - size / np;
        // additive structure via Smith normal form
        let (_, s, v) = linalg::snf_with_transforms(&lat_big.rows);
        let snf_div: Vec<u64> = (0..deg).map(|i| s[i][i].to_u64().unwrap()).collect();
        let snf_v = to_i64_mat(&v).unwrap();
        let v_inv_big = invert_unimodular(&v);
        let snf_v_inv = to_i64_mat(&v_inv_big).unwrap();
        let d = field
            .d()
            .map(|x| x.to_i64().expect("|d| too large for residue rings"))
            .unwrap_or(0);
        let red: Vec<i64> = field.def_poly()[..deg]
            .iter()
            .map(|c| (-c).to_i64().expect("defining polynomial too large"))
            .collect();
        ResidueRing {
            field,
            prime: prime.clone(),
            power,
            deg,
            lat,
            prime_lat,
            red,
            omega_is_half: prime.field.omega_is_half(),
            d,
            size,
            unit_count,
            snf_div,
            snf_v,
            snf_v_inv,
        }
    }

    fn reduce_vec(&self, v: &mut [i128], lat: &[Vec<i64>]) {
        for i in 0..self.deg {
            let q = num_integer::Integer::div_floor(&v[i], &(lat[i][i] as i128));
            if q != 0 {
                for j in 0..self.deg {
                    v[j] -= q * lat[i][j] as i128;
                }
            }
        }
    }

    pub fn reduce_coords(&self, coords: &[i128]) -> RingElt {
        let mut v = coords.to_vec();
        self.reduce_vec(&mut v, &self.lat);
        RingElt(v.iter().map(|&x| x as i64).collect())
    }

    /// Reduction of arbitrarily large integer coordinates.
    pub fn reduce_coords_big(&self, coords: &[BigInt]) -> RingElt {
        let mut v = coords.to_vec();
        for i in 0..self.deg {
            let q = num_integer::Integer::div_floor(&v[i], &BigInt::from(self.lat[i][i]));
            if !q.is_zero() {
                for j in 0..self.deg {
                    v[j] -= &q * BigInt::from(self.lat[i][j]);
                }
            }
        }
        RingElt(v.iter().map(|x| x.to_i64().unwrap()).collect())
    }

    pub fn zero(&self) -> RingElt {
        RingElt(vec![0; self.deg])
    }

    pub fn one(&self) -> RingElt {
        let mut v = vec![0i128; self.deg];
        v[0] = 1;
        self.reduce_coords(&v)
    }

    pub fn add(&self, a: &RingElt, b: &RingElt) -> RingElt {
        let v: Vec<i128> = a.0.iter().zip(&b.0).map(|(&x, &y)| x as i128 + y as i128).collect();
        self.reduce_coords(&v)
    }

    pub fn sub(&self, a: &RingElt, b: &RingElt) -> RingElt {
        let v: Vec<i128> = a.0.iter().zip(&b.0).map(|(&x, &y)| x as i128 - y as i128).collect();
        self.reduce_coords(&v)
    }

    pub fn neg(&self, a: &RingElt) -> RingElt {
        let v: Vec<i128> = a.0.iter().map(|&x| -(x as i128)).collect();
        self.reduce_coords(&v)
    }

    /// Product over the integral basis.
    pub fn mul(&self, a: &RingElt, b: &RingElt) -> RingElt {
        match self.deg {
            1 => self.reduce_coords(&[a.0[0] as i128 * b.0[0] as i128]),
            2 => {
                let (a0, a1) = (a.0[0] as i128, a.0[1] as i128);
                let (b0, b1) = (b.0[0] as i128, b.0[1] as i128);
                let d = self.d as i128;
                // omega^2 = (d-1)/4 + omega  when omega = (1+theta)/2
                // omega^2 = d               when omega = theta
                let (s0, s1) = if self.omega_is_half {
                    ((d - 1) / 4, 1i128)
                } else {
                    (d, 0i128)
                };
                let cross = a1 * b1;
                let v = [a0 * b0 + cross * s0, a0 * b1 + a1 * b0 + cross * s1];
                self.reduce_coords(&v)
            }
            _ => {
                // power basis with theta^deg reduced by the defining polynomial
                let n = self.deg;
                let mut prod = vec![0i128; 2 * n - 1];
                for i in 0..n {
                    for j in 0..n {
                        prod[i + j] += a.0[i] as i128 * b.0[j] as i128;
                    }
                }
                for k in (n..(2 * n - 1)).rev() {
                    let c = prod[k];
                    prod[k] = 0;
                    if c != 0 {
                        for j in 0..n {
                            prod[k - n + j] += c * self.red[j] as i128;
                        }
                    }
                }
                prod.truncate(n);
                self.reduce_coords(&prod)
            }
        }
    }

    pub fn pow(&self, a: &RingElt, mut e: u64) -> RingElt {
        let mut base = a.clone();
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    pub fn is_unit(&self, a: &RingElt) -> bool {
        let mut v: Vec<i128> = a.0.iter().map(|&x| x as i128).collect();
        self.reduce_vec(&mut v, &self.prime_lat);
        v.iter().any(|&x| x != 0)
    }

    pub fn inv(&self, a: &RingElt) -> RingElt {
        assert!(self.is_unit(a), "inverting a non-unit");
        let r = self.pow(a, self.unit_count - 1);
        debug_assert_eq!(self.mul(&r, a), self.one());
        r
    }

    /// All residues, in box order.
    pub fn elements(&self) -> Vec<RingElt> {
        let mut out = Vec::with_capacity(self.size as usize);
        let mut cur = vec![0i64; self.deg];
        loop {
            out.push(RingElt(cur.clone()));
            let mut i = 0;
            loop {
                if i == self.deg {
                    return out;
                }
                cur[i] += 1;
                if cur[i] < self.lat[i][i] {
                    break;
                }
                cur[i] = 0;
                i += 1;
            }
        }
    }

    /// Reduction of x into the ring; requires ord_P(x) >= 0.
    pub fn from_field_elt(&self, x: &FieldElt) -> RingElt {
        let field = &self.field;
        if x.is_zero() {
            return self.zero();
        }
        debug_assert!(ord_at(x, &self.prime).unwrap() >= 0, "negative valuation at P");
        let den = field.denominator(x);
        let y = field.mul_rat(x, &BigRational::from(den.clone()));
        let p = &self.prime.under;
        let mut k = 0u32;
        let mut m = den.clone();
        while (&m % p).is_zero() {
            m /= p;
            k += 1;
        }
        let split = self.prime.ram_index == 1
            && self.prime.residue_degree == 1
            && self.prime.gens_second.is_some()
            && field.degree() == 2;
        let (z, u) = if k == 0 {
            (y, field.from_rational(BigRational::from(m.clone())))
        } else if split {
            let pibar = field.conj(&self.prime.uniformizer);
            let twist = field.pow(&pibar, k);
            let y2 = field.mul(&y, &twist);
            let z = exact_div_by_int(field, &y2, &p.pow(k));
            let u = field.mul_rat(&twist, &BigRational::from(m.clone()));
            (z, u)
        } else {
            let z = exact_div_by_int(field, &y, &p.pow(k));
            (z, field.from_rational(BigRational::from(m.clone())))
        };
        let zc = field
            .integral_coords(&z)
            .expect("reduction produced a non-integral element");
        let zring = self.reduce_coords_big(&zc);
        let uc = field.integral_coords(&u).expect("unit part integral");
        let uring = self.reduce_coords_big(&uc);
        self.mul(&zring, &self.inv(&uring))
    }

    pub fn lift(&self, a: &RingElt) -> FieldElt {
        let coords: Vec<BigInt> = a.0.iter().map(|&x| BigInt::from(x)).collect();
        self.field.from_integer_coords(&coords)
    }

    // ---- additive structure (Z/d1 x Z/d2 ...) for the bitmap searches ----

    pub fn snf_moduli(&self) -> Vec<u64> {
        self.snf_div.clone()
    }

    pub fn to_snf(&self, a: &RingElt) -> Vec<u64> {
        (0..self.deg)
            .map(|j| {
                let mut acc: i128 = 0;
                for i in 0..self.deg {
                    acc += a.0[i] as i128 * self.snf_v[i][j] as i128;
                }
                acc.mod_floor(&(self.snf_div[j] as i128)) as u64
            })
            .collect()
    }

    pub fn from_snf(&self, y: &[u64]) -> RingElt {
        let v: Vec<i128> = (0..self.deg)
            .map(|j| {
                let mut acc: i128 = 0;
                for i in 0..self.deg {
                    acc += y[i] as i128 * self.snf_v_inv[i][j] as i128;
                }
                acc
            })
            .collect();
        self.reduce_coords(&v)
    }
}

fn exact_div_by_int(field: &NumberField, x: &FieldElt, m: &BigInt) -> FieldElt {
    let coords = field.integral_coords(x).expect("integral element");
    let out: Vec<BigInt> = coords
        .iter()
        .map(|c| {
            let (q, r) = c.div_rem(m);
            assert!(r.is_zero(), "inexact division in residue reduction");
            q
        })
        .collect();
    field.from_integer_coords(&out)
}

fn invert_unimodular(v: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let n = v.len();
    let mut a: Vec<Vec<BigInt>> = v.to_vec();
    let mut inv = linalg::identity(n);
    // Gauss-Jordan over the rationals would do; entries stay integral since
    // det = +-1, so run fraction-free elimination with exact divisions
    let mut arat: Vec<Vec<BigRational>> = a
        .iter()
        .map(|r| r.iter().map(|x| BigRational::from(x.clone())).collect())
        .collect();
    let mut irat: Vec<Vec<BigRational>> = inv
        .iter()
        .map(|r| r.iter().map(|x| BigRational::from(x.clone())).collect())
        .collect();
    for c in 0..n {
        let p = (c..n).find(|&r| !arat[r][c].is_zero()).expect("singular");
        arat.swap(c, p);
        irat.swap(c, p);
        let piv = arat[c][c].clone();
        for j in 0..n {
            arat[c][j] /= &piv;
            irat[c][j] /= &piv;
        }
        for r in 0..n {
            if r != c && !arat[r][c].is_zero() {
                let f = arat[r][c].clone();
                for j in 0..n {
                    let t1 = &f * &arat[c][j];
                    arat[r][j] -= t1;
                    let t2 = &f * &irat[c][j];
                    irat[r][j] -= t2;
                }
            }
        }
    }
    a = arat
        .iter()
        .map(|r| r.iter().map(|x| x.to_integer()).collect())
        .collect();
    let _ = a;
    inv = irat
        .iter()
        .map(|r| {
            r.iter()
                .map(|x| {
                    assert!(x.is_integer(), "transform not unimodular");
                    x.to_integer()
                })
                .collect()
        })
        .collect();
    inv
}

/// The lattice of P^k exposed for tests.
pub fn power_lattice(prime: &PrimeIdeal, k: u32) -> IdealLat {
    prime.power(k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ideals::primes_above;

    #[test]
    fn ring_arithmetic_split_dyadic() {
        let k = NumberField::quadratic(BigInt::from(-7)).unwrap();
        let d1 = primes_above(&k, &BigInt::from(2)).unwrap().remove(0);
        let r = ResidueRing::new(&d1, 5);
        assert_eq!(r.size, 32);
        let a = r.from_field_elt(&k.parse_elt("3+t").unwrap());
        let b = r.from_field_elt(&k.parse_elt("1-2*t").unwrap());
        let ab = r.mul(&a, &b);
        let direct = r.from_field_elt(&k.mul(
            &k.parse_elt("3+t").unwrap(),
            &k.parse_elt("1-2*t").unwrap(),
        ));
        assert_eq!(ab, direct);
        // reduction handles denominators prime to P and at the conjugate
        let half = k.parse_elt("(1+t)/2").unwrap(); // omega, a unit times power at d1? ord >= 0 anyway
        let _ = r.from_field_elt(&half);
    }

    #[test]
    fn unit_inverse_roundtrip() {
        let k = NumberField::quadratic(BigInt::from(2)).unwrap();
        let p = primes_above(&k, &BigInt::from(2)).unwrap().remove(0); // ramified (sqrt 2)
        let r = ResidueRing::new(&p, 5);
        for e in r.elements() {
            if r.is_unit(&e) {
                assert_eq!(r.mul(&e, &r.inv(&e)), r.one());
            }
        }
    }

    #[test]
    fn snf_roundtrip() {
        let k = NumberField::quadratic(BigInt::from(-5)).unwrap();
        let p3 = primes_above(&k, &BigInt::from(3)).unwrap().remove(0);
        let r = ResidueRing::new(&p3, 3);
        let moduli = r.snf_moduli();
        let total: u64 = moduli.iter().product();
        assert_eq!(total, r.size);
        for e in r.elements() {
            let s = r.to_snf(&e);
            assert_eq!(r.from_snf(&s), e);
        }
    }

    #[test]
    fn counts_elements() {
        let k = NumberField::rationals();
        let p = primes_above(&k, &BigInt::from(3)).unwrap().remove(0);
        let r = ResidueRing::new(&p, 4);
        assert_eq!(r.elements().len(), 81);
        let units = r.elements().iter().filter(|e| r.is_unit(e)).count();
        assert_eq!(units, 54);
    }
}
