//! Diagonal quadratic forms and their global invariants: signed
//! discriminant, odd-valuation prime support, signatures, the complete
//! invariant certificate, global anisotropic dimension and Witt index.

use crate::field::{FieldElt, NumberField};
use crate::ideals::{dyadic_primes, factor_principal, PrimeIdeal};
use crate::local::{self, Place};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FormError {
    DegenerateForm,
    MissingPrimes,
    FieldMismatch,
    UnsupportedDegree,
}

impl fmt::Display for FormError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FormError::DegenerateForm => write!(f, "degenerate form (zero coefficient)"),
            FormError::MissingPrimes => write!(f, "certificate prime set misses required primes"),
            FormError::FieldMismatch => write!(f, "forms live over different fields"),
            FormError::UnsupportedDegree => write!(f, "forms require a field of degree <= 2"),
        }
    }
}

impl std::error::Error for FormError {}

/// A non-degenerate diagonal quadratic form <a_1, ..., a_n>.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiagonalForm {
    pub field: Arc<NumberField>,
    pub coeffs: Vec<FieldElt>,
}

impl DiagonalForm {
    pub fn new(field: &Arc<NumberField>, coeffs: Vec<FieldElt>) -> Result<Self, FormError> {
        if field.degree() > 2 {
            return Err(FormError::UnsupportedDegree);
        }
        if coeffs.iter().any(|c| c.is_zero()) {
            return Err(FormError::DegenerateForm);
        }
        Ok(DiagonalForm {
            field: field.clone(),
            coeffs,
        })
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    /// q extended by one coefficient.
    pub fn extend(&self, c: &FieldElt) -> DiagonalForm {
        let mut coeffs = self.coeffs.clone();
        coeffs.push(c.clone());
        DiagonalForm {
            field: self.field.clone(),
            coeffs,
        }
    }

    /// q padded with w hyperbolic planes <1, -1>.
    pub fn pad_hyperbolic(&self, w: usize) -> DiagonalForm {
        let mut coeffs = self.coeffs.clone();
        for _ in 0..w {
            coeffs.push(self.field.one());
            coeffs.push(self.field.from_i64(-1));
        }
        DiagonalForm {
            field: self.field.clone(),
            coeffs,
        }
    }

    pub fn display(&self) -> String {
        let parts: Vec<String> = self.coeffs.iter().map(|c| self.field.print_elt(c)).collect();
        format!("<{}>", parts.join(", "))
    }
}

/// Signed discriminant as a canonical square-class representative.
pub fn disc(q: &DiagonalForm) -> Result<FieldElt, FormError> {
    if q.coeffs.is_empty() {
        return Ok(q.field.one());
    }
    let raw = local::signed_disc_raw(&q.field, &q.coeffs);
    Ok(q.field.square_class_rep(&raw))
}

/// The set P(q): primes at which some coefficient has odd valuation,
/// united with nothing else (dyadic primes are the caller's business).
pub fn prime_support(q: &DiagonalForm) -> Result<BTreeSet<PrimeIdeal>, FormError> {
    let mut out = BTreeSet::new();
    for c in &q.coeffs {
        let f = factor_principal(&q.field, c).map_err(|_| FormError::DegenerateForm)?;
        for (p, e) in f.factors {
            if e % 2 != 0 {
                out.insert(p);
            }
        }
    }
    Ok(out)
}

/// Signature (#positive - #negative) under the given real place.
pub fn signature(q: &DiagonalForm, place: usize) -> Result<i64, FormError> {
    let mut s = 0i64;
    for c in &q.coeffs {
        if c.is_zero() {
            return Err(FormError::DegenerateForm);
        }
        s += q.field.sign_at(c, place).unwrap() as i64;
    }
    Ok(s)
}

/// The places where a local invariant of q can be nontrivial: all real
/// places, one complex representative, and the dyadic primes united with the
/// odd-valuation support.
pub fn relevant_places(q: &DiagonalForm) -> Result<Vec<Place>, FormError> {
    let mut places: Vec<Place> = (0..q.field.real_place_count()).map(Place::Real).collect();
    if q.field.complex_place_count() > 0 {
        places.push(Place::Complex);
    }
    let mut primes = prime_support(q)?;
    for d in dyadic_primes(&q.field) {
        primes.insert(d);
    }
    places.extend(primes.into_iter().map(Place::Finite));
    Ok(places)
}

/// Global anisotropic dimension: the maximum of the local anisotropic
/// dimensions over the relevant places, with the binary discriminant test
/// covering the case where every listed place looks hyperbolic.
pub fn adim(q: &DiagonalForm) -> Result<usize, FormError> {
    if q.coeffs.iter().any(|c| c.is_zero()) {
        return Err(FormError::DegenerateForm);
    }
    let n = q.dim();
    if n == 0 {
        return Ok(0);
    }
    let mut m = 0usize;
    for place in relevant_places(q)? {
        let a = local::local_adim(&q.field, &q.coeffs, &place)
            .map_err(|_| FormError::DegenerateForm)?;
        m = m.max(a);
    }
    // at any unlisted prime the coefficients have even valuation, so the
    // local anisotropic dimension there is at most 2; the only gap left is
    // a binary anisotropic part detected by a nontrivial discriminant
    if m == 0 && n % 2 == 0 {
        let d = disc(q)?;
        if q.field.is_global_square(&d).is_none() {
            m = 2;
        }
    }
    Ok(m)
}

pub fn witt_index(q: &DiagonalForm) -> Result<usize, FormError> {
    Ok((q.dim() - adim(q)?) / 2)
}

pub fn is_isotropic(q: &DiagonalForm) -> Result<bool, FormError> {
    Ok(adim(q)? < q.dim())
}

/// The complete invariant tuple of a form over a stated prime set.
#[derive(Clone, Debug)]
pub struct WittCertificate {
    pub dim: usize,
    pub signed_disc: FieldElt,
    pub signatures: Vec<i64>,
    pub hasse_bits: BTreeMap<PrimeIdeal, i8>,
    pub adim: usize,
    pub witt_index: usize,
}

impl WittCertificate {
    pub fn to_json(&self, field: &NumberField) -> serde_json::Value {
        let hasse: serde_json::Map<String, serde_json::Value> = self
            .hasse_bits
            .iter()
            .map(|(p, s)| (p.display(), serde_json::json!(*s)))
            .collect();
        serde_json::json!({
            "dim": self.dim,
            "disc": field.print_elt(&self.signed_disc),
            "signatures": self.signatures,
            "hasse": hasse,
            "adim": self.adim,
            "witt_index": self.witt_index,
        })
    }
}

/// Certificate over a prime set, which must contain the dyadic primes and
/// the odd-valuation support of q.
pub fn certificate(
    q: &DiagonalForm,
    prime_set: &BTreeSet<PrimeIdeal>,
) -> Result<WittCertificate, FormError> {
    let mut required = prime_support(q)?;
    for d in dyadic_primes(&q.field) {
        required.insert(d);
    }
    if !required.iter().all(|p| prime_set.contains(p)) {
        return Err(FormError::MissingPrimes);
    }
    let signatures: Result<Vec<i64>, FormError> = (0..q.field.real_place_count())
        .map(|i| signature(q, i))
        .collect();
    let mut hasse_bits = BTreeMap::new();
    for p in prime_set {
        let s = local::hasse(&q.field, &q.coeffs, &Place::Finite(p.clone()))
            .map_err(|_| FormError::DegenerateForm)?;
        hasse_bits.insert(p.clone(), s);
    }
    let a = adim(q)?;
    Ok(WittCertificate {
        dim: q.dim(),
        signed_disc: disc(q)?,
        signatures: signatures?,
        hasse_bits,
        adim: a,
        witt_index: (q.dim() - a) / 2,
    })
}

/// Union of the odd-valuation supports of two forms with the dyadic primes:
/// a prime set large enough for comparing their certificates.
pub fn dyadic_union(
    q1: &DiagonalForm,
    q2: &DiagonalForm,
) -> Result<BTreeSet<PrimeIdeal>, FormError> {
    let mut primes = prime_support(q1)?;
    primes.extend(prime_support(q2)?);
    for d in dyadic_primes(&q1.field) {
        primes.insert(d);
    }
    Ok(primes)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EquivalenceMode {
    Isometric,
    Similar,
}

/// Classification by the complete set of invariants: equal dimension, equal
/// signed discriminant as square classes, equal signatures and equal Hasse
/// invariants at every place where either can be nontrivial.
pub fn forms_equivalent(
    q1: &DiagonalForm,
    q2: &DiagonalForm,
    mode: EquivalenceMode,
) -> Result<bool, FormError> {
    if q1.field != q2.field {
        return Err(FormError::FieldMismatch);
    }
    match mode {
        EquivalenceMode::Isometric => {
            if q1.dim() != q2.dim() {
                return Ok(false);
            }
            isometric_same_dim(q1, q2)
        }
        EquivalenceMode::Similar => {
            if (q1.dim() % 2) != (q2.dim() % 2) {
                return Ok(false);
            }
            let (small, big) = if q1.dim() <= q2.dim() { (q1, q2) } else { (q2, q1) };
            let padded = small.pad_hyperbolic((big.dim() - small.dim()) / 2);
            isometric_same_dim(&padded, big)
        }
    }
}

fn isometric_same_dim(q1: &DiagonalForm, q2: &DiagonalForm) -> Result<bool, FormError> {
    debug_assert_eq!(q1.dim(), q2.dim());
    if q1.dim() == 0 {
        return Ok(true);
    }
    // signatures
    for i in 0..q1.field.real_place_count() {
        if signature(q1, i)? != signature(q2, i)? {
            return Ok(false);
        }
    }
    // discriminants as square classes
    let d1 = local::signed_disc_raw(&q1.field, &q1.coeffs);
    let d2 = local::signed_disc_raw(&q2.field, &q2.coeffs);
    if !q1.field.same_square_class(&d1, &d2) {
        return Ok(false);
    }
    // Hasse invariants over the union of the relevant prime sets
    let mut primes = prime_support(q1)?;
    primes.extend(prime_support(q2)?);
    for d in dyadic_primes(&q1.field) {
        primes.insert(d);
    }
    for p in primes {
        let place = Place::Finite(p);
        let s1 = local::hasse(&q1.field, &q1.coeffs, &place)
            .map_err(|_| FormError::DegenerateForm)?;
        let s2 = local::hasse(&q2.field, &q2.coeffs, &place)
            .map_err(|_| FormError::DegenerateForm)?;
        if s1 != s2 {
            return Ok(false);
        }
    }
    Ok(true)
}
