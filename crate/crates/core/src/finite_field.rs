//! Exact arithmetic in GF(p^r).
//!
//! Elements are stored as polynomial-basis coordinate vectors over Z_p,
//! packed into a single index `c0 + c1 p + ... + c_{r-1} p^{r-1}`. The
//! field order used everywhere in the crate is the order of that index.
//! Addition, multiplication, negation, inversion and trace tables are
//! built once from the polynomial arithmetic when a [`FieldSpec`] is
//! created and shared behind an `Arc`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest supported field order.
pub const MAX_ORDER: u32 = 256;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("{0} is not prime")]
    NonPrime(u32),
    #[error("modulus {0:?} is reducible")]
    ReduciblePolynomial(Vec<u32>),
    #[error("modulus has degree {found}, expected {expected}")]
    DegreeMismatch { expected: usize, found: usize },
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("element does not belong to this field")]
    FieldMismatch,
    #[error("field order {0} exceeds the supported maximum of 256")]
    TooLarge(u64),
    #[error("extension degree must be at least 1")]
    ZeroDegree,
    #[error("operation requires characteristic 2")]
    OddCharacteristic,
    #[error("scale factor must be nonzero")]
    ZeroScale,
    #[error("invalid field descriptor `{0}`")]
    InvalidDescriptor(String),
    #[error("coefficient vector of length {found} does not fit a degree-{degree} field")]
    BadCoefficients { degree: usize, found: usize },
}

/// An element of a finite field, identified by its packed coordinate index.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct FieldElement(u16);

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement(0);
    pub const ONE: FieldElement = FieldElement(1);

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

/// Arithmetic operation selector for [`FieldSpec::arith`].
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Mul,
    Neg,
    Inv,
    Pow(i64),
}

/// Serializable field descriptor, `{"p":2,"r":2,"modulus":[1,1,1]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldDescriptor {
    pub p: u32,
    pub r: u32,
    pub modulus: Vec<u32>,
}

struct Tables {
    p: u32,
    r: u32,
    q: usize,
    modulus: Vec<u32>,
    add: Vec<u16>,
    mul: Vec<u16>,
    neg: Vec<u16>,
    inv: Vec<u16>,
    trace: Vec<u8>,
    generator: u16,
}

/// A validated finite field GF(p^r) together with its arithmetic tables.
///
/// Cloning is cheap; all clones share the same tables.
#[derive(Clone)]
pub struct FieldSpec(Arc<Tables>);

impl PartialEq for FieldSpec {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || (self.0.p == other.0.p && self.0.modulus == other.0.modulus)
    }
}

impl Eq for FieldSpec {}

impl fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({}^{}; modulus {:?})", self.0.p, self.0.r, self.0.modulus)
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}^{}", self.0.p, self.0.r)
    }
}

pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

// Polynomials over Z_p, coefficient vectors low degree first.

fn trim(mut a: Vec<u32>) -> Vec<u32> {
    while a.len() > 1 && *a.last().unwrap() == 0 {
        a.pop();
    }
    a
}

fn poly_rem(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let b = trim(b.to_vec());
    let db = b.len() - 1;
    let lead_inv = mod_inv(b[db], p);
    let mut a = a.to_vec();
    if a.len() <= db {
        return trim(a);
    }
    for i in (db..a.len()).rev() {
        let c = a[i] % p * lead_inv % p;
        if c != 0 {
            for (j, &bj) in b.iter().enumerate() {
                let k = i - db + j;
                a[k] = (a[k] + p - c * bj % p) % p;
            }
        }
    }
    a.truncate(db.max(1));
    if db == 0 {
        a[0] = 0;
    }
    trim(a)
}

fn mod_inv(a: u32, p: u32) -> u32 {
    let a = a % p;
    (1..p).find(|&x| a * x % p == 1).expect("nonzero residue mod a prime")
}

/// Monic polynomials of degree `d` over Z_p, in lexicographic order of
/// `(c0, c1, ..., c_{d-1})` with `c0` most significant.
fn monic_polys(p: u32, d: usize) -> impl Iterator<Item = Vec<u32>> {
    let count = (p as usize).pow(d as u32);
    (0..count).map(move |mut n| {
        let mut lower = vec![0u32; d];
        for i in (0..d).rev() {
            lower[i] = (n % p as usize) as u32;
            n /= p as usize;
        }
        lower.push(1);
        lower
    })
}

/// Irreducibility test by trial division over all monic polynomials of
/// degree at most half the degree.
pub fn is_irreducible(poly: &[u32], p: u32) -> bool {
    let poly = trim(poly.iter().map(|c| c % p).collect());
    let deg = poly.len() - 1;
    if deg == 0 {
        return false;
    }
    if deg == 1 {
        return true;
    }
    for d in 1..=deg / 2 {
        for cand in monic_polys(p, d) {
            let rem = poly_rem(&poly, &cand, p);
            if rem.iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

impl FieldSpec {
    /// Builds GF(p^r). When `modulus` is omitted the lexicographically first
    /// monic irreducible polynomial of degree `r` is used.
    pub fn new(p: u32, r: u32, modulus: Option<&[u32]>) -> Result<Self, FieldError> {
        if !is_prime(p) {
            return Err(FieldError::NonPrime(p));
        }
        if r == 0 {
            return Err(FieldError::ZeroDegree);
        }
        let q = (p as u64).checked_pow(r).unwrap_or(u64::MAX);
        if q > MAX_ORDER as u64 {
            return Err(FieldError::TooLarge(q));
        }
        let modulus = match modulus {
            Some(m) => {
                let reduced = trim(m.iter().map(|c| c % p).collect());
                let deg = reduced.len() - 1;
                if deg != r as usize {
                    return Err(FieldError::DegreeMismatch { expected: r as usize, found: deg });
                }
                let lead_inv = mod_inv(reduced[deg], p);
                let monic: Vec<u32> = reduced.iter().map(|c| c * lead_inv % p).collect();
                if !is_irreducible(&monic, p) {
                    return Err(FieldError::ReduciblePolynomial(m.to_vec()));
                }
                monic
            }
            None => monic_polys(p, r as usize)
                .find(|m| is_irreducible(m, p))
                .expect("irreducible polynomials exist in every degree"),
        };
        Ok(FieldSpec(Arc::new(Tables::build(p, r, q as usize, modulus))))
    }

    /// The prime field Z_p.
    pub fn prime(p: u32) -> Result<Self, FieldError> {
        Self::new(p, 1, None)
    }

    pub fn from_descriptor(d: &FieldDescriptor) -> Result<Self, FieldError> {
        Self::new(d.p, d.r, Some(&d.modulus))
    }

    pub fn descriptor(&self) -> FieldDescriptor {
        FieldDescriptor { p: self.0.p, r: self.0.r, modulus: self.0.modulus.clone() }
    }

    /// Parses `"p"` or `"p^r"`, with an optional comma-separated modulus
    /// `"c0,c1,...,cr"`.
    pub fn parse(desc: &str, poly: Option<&str>) -> Result<Self, FieldError> {
        let bad = || FieldError::InvalidDescriptor(desc.to_string());
        let (p, r) = match desc.trim().split_once('^') {
            Some((p, r)) => (p.trim().parse::<u32>().map_err(|_| bad())?, r.trim().parse::<u32>().map_err(|_| bad())?),
            None => (desc.trim().parse::<u32>().map_err(|_| bad())?, 1),
        };
        let modulus = match poly {
            Some(s) => Some(
                s.split(',')
                    .map(|c| c.trim().parse::<u32>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|_| FieldError::InvalidDescriptor(s.to_string()))?,
            ),
            None => None,
        };
        Self::new(p, r, modulus.as_deref())
    }

    pub fn characteristic(&self) -> u32 {
        self.0.p
    }

    pub fn degree(&self) -> u32 {
        self.0.r
    }

    /// Number of elements q = p^r.
    pub fn order(&self) -> usize {
        self.0.q
    }

    /// Monic modulus, low degree first.
    pub fn modulus(&self) -> &[u32] {
        &self.0.modulus
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement::ZERO
    }

    pub fn one(&self) -> FieldElement {
        FieldElement::ONE
    }

    /// All elements in field order.
    pub fn elements(&self) -> impl Iterator<Item = FieldElement> + Clone {
        (0..self.0.q as u16).map(FieldElement)
    }

    /// Nonzero elements in field order.
    pub fn units(&self) -> impl Iterator<Item = FieldElement> + Clone {
        (1..self.0.q as u16).map(FieldElement)
    }

    pub fn from_index(&self, idx: usize) -> Result<FieldElement, FieldError> {
        if idx < self.0.q {
            Ok(FieldElement(idx as u16))
        } else {
            Err(FieldError::FieldMismatch)
        }
    }

    /// Element with the given polynomial-basis coordinates (missing
    /// high-degree coordinates are zero).
    pub fn element(&self, coeffs: &[u32]) -> Result<FieldElement, FieldError> {
        let r = self.0.r as usize;
        if coeffs.len() > r {
            return Err(FieldError::BadCoefficients { degree: r, found: coeffs.len() });
        }
        let p = self.0.p as usize;
        let idx = coeffs.iter().rev().fold(0usize, |acc, &c| acc * p + (c as usize % p));
        Ok(FieldElement(idx as u16))
    }

    /// Polynomial-basis coordinates, length r.
    pub fn coeffs(&self, a: FieldElement) -> Vec<u32> {
        let p = self.0.p as usize;
        let mut n = a.index();
        (0..self.0.r)
            .map(|_| {
                let c = (n % p) as u32;
                n /= p;
                c
            })
            .collect()
    }

    /// Image of an integer under Z -> Z_p -> F.
    pub fn from_int(&self, n: i64) -> FieldElement {
        FieldElement(n.rem_euclid(self.0.p as i64) as u16)
    }

    pub fn contains(&self, a: FieldElement) -> bool {
        a.index() < self.0.q
    }

    #[inline]
    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        FieldElement(self.0.add[a.index() * self.0.q + b.index()])
    }

    #[inline]
    pub fn sub(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        FieldElement(self.0.mul[a.index() * self.0.q + b.index()])
    }

    #[inline]
    pub fn neg(&self, a: FieldElement) -> FieldElement {
        FieldElement(self.0.neg[a.index()])
    }

    pub fn inv(&self, a: FieldElement) -> Result<FieldElement, FieldError> {
        if a.is_zero() {
            Err(FieldError::ZeroInverse)
        } else {
            Ok(FieldElement(self.0.inv[a.index()]))
        }
    }

    pub fn div(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement, FieldError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// `a^n`; negative exponents require `a != 0`. `0^0 = 1`.
    pub fn pow(&self, a: FieldElement, n: i64) -> Result<FieldElement, FieldError> {
        let base = if n < 0 { self.inv(a)? } else { a };
        let mut e = n.unsigned_abs();
        let mut acc = FieldElement::ONE;
        let mut b = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, b);
            }
            b = self.mul(b, b);
            e >>= 1;
        }
        Ok(acc)
    }

    /// Checked arithmetic entry point. `b` is ignored for unary operations.
    pub fn arith(&self, a: FieldElement, b: FieldElement, op: ArithOp) -> Result<FieldElement, FieldError> {
        if !self.contains(a) || !self.contains(b) {
            return Err(FieldError::FieldMismatch);
        }
        match op {
            ArithOp::Add => Ok(self.add(a, b)),
            ArithOp::Mul => Ok(self.mul(a, b)),
            ArithOp::Neg => Ok(self.neg(a)),
            ArithOp::Inv => self.inv(a),
            ArithOp::Pow(n) => self.pow(a, n),
        }
    }

    /// Absolute trace onto Z_p.
    #[inline]
    pub fn trace(&self, a: FieldElement) -> u32 {
        self.0.trace[a.index()] as u32
    }

    /// The fixed primitive element (smallest index of order q - 1).
    pub fn generator(&self) -> FieldElement {
        FieldElement(self.0.generator)
    }

    /// Multiplicative order of a nonzero element.
    pub fn mult_order(&self, a: FieldElement) -> Option<usize> {
        if a.is_zero() {
            return None;
        }
        let mut x = a;
        let mut k = 1;
        while x != FieldElement::ONE {
            x = self.mul(x, a);
            k += 1;
        }
        Some(k)
    }

    /// Square root in characteristic 2, computed as `x^(2^(r-1))`.
    pub fn sqrt_char2(&self, a: FieldElement) -> Result<FieldElement, FieldError> {
        if self.0.p != 2 {
            return Err(FieldError::OddCharacteristic);
        }
        let mut x = a;
        for _ in 1..self.0.r {
            x = self.mul(x, x);
        }
        Ok(x)
    }

    /// A Z_2-basis `e_1..e_r` of the field with `Tr(alpha e_i e_j) = delta_ij`.
    ///
    /// A trace-orthonormal basis is found by depth-first search over
    /// increasing element indices and rescaled by the inverse square root
    /// of `alpha`.
    pub fn self_dual_basis(&self, alpha: FieldElement) -> Result<Vec<FieldElement>, FieldError> {
        if self.0.p != 2 {
            return Err(FieldError::OddCharacteristic);
        }
        if alpha.is_zero() {
            return Err(FieldError::ZeroScale);
        }
        let r = self.0.r as usize;
        let candidates: Vec<FieldElement> = self.units().filter(|&x| self.trace(self.mul(x, x)) == 1).collect();
        let mut chosen = Vec::with_capacity(r);
        if !self.orthonormal_search(&candidates, 0, r, &mut chosen) {
            unreachable!("trace-orthonormal bases exist in characteristic 2");
        }
        let gamma = self.sqrt_char2(alpha)?;
        let gamma_inv = self.inv(gamma)?;
        Ok(chosen.into_iter().map(|w| self.mul(gamma_inv, w)).collect())
    }

    fn orthonormal_search(
        &self,
        candidates: &[FieldElement],
        start: usize,
        r: usize,
        chosen: &mut Vec<FieldElement>,
    ) -> bool {
        if chosen.len() == r {
            return true;
        }
        for i in start..candidates.len() {
            let c = candidates[i];
            if chosen.iter().all(|&w| self.trace(self.mul(w, c)) == 0) {
                chosen.push(c);
                if self.orthonormal_search(candidates, i + 1, r, chosen) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }

    /// Coordinates `Tr(scale a e_i)` of `a` in a basis that is orthonormal
    /// under `(x, y) -> Tr(scale x y)`.
    pub fn coordinates_in_dual_basis(&self, a: FieldElement, basis: &[FieldElement], scale: FieldElement) -> Vec<u32> {
        basis.iter().map(|&e| self.trace(self.mul(scale, self.mul(a, e)))).collect()
    }
}

impl Tables {
    fn build(p: u32, r: u32, q: usize, modulus: Vec<u32>) -> Tables {
        let pu = p as usize;
        let ru = r as usize;
        let coeffs_of = |mut n: usize| -> Vec<u32> {
            (0..ru)
                .map(|_| {
                    let c = (n % pu) as u32;
                    n /= pu;
                    c
                })
                .collect()
        };
        let index_of = |c: &[u32]| -> u16 { c.iter().rev().fold(0usize, |acc, &x| acc * pu + x as usize) as u16 };
        let all: Vec<Vec<u32>> = (0..q).map(coeffs_of).collect();

        let mut add = vec![0u16; q * q];
        let mut mul = vec![0u16; q * q];
        for a in 0..q {
            for b in 0..q {
                let s: Vec<u32> = (0..ru).map(|i| (all[a][i] + all[b][i]) % p).collect();
                add[a * q + b] = index_of(&s);

                let mut prod = vec![0u32; 2 * ru - 1];
                for i in 0..ru {
                    for j in 0..ru {
                        prod[i + j] = (prod[i + j] + all[a][i] * all[b][j]) % p;
                    }
                }
                let mut rem = poly_rem(&prod, &modulus, p);
                rem.resize(ru, 0);
                mul[a * q + b] = index_of(&rem);
            }
        }
        let neg: Vec<u16> = (0..q)
            .map(|a| {
                let c: Vec<u32> = all[a].iter().map(|&x| (p - x) % p).collect();
                index_of(&c)
            })
            .collect();
        let mut inv = vec![0u16; q];
        for a in 1..q {
            inv[a] = (1..q).find(|&b| mul[a * q + b] == 1).unwrap() as u16;
        }
        let order = |a: usize| -> usize {
            let mut x = a;
            let mut k = 1;
            while x != 1 {
                x = mul[x * q + a] as usize;
                k += 1;
            }
            k
        };
        let generator = if q == 2 { 1 } else { (2..q).find(|&g| order(g) == q - 1).unwrap() as u16 };
        let trace = (0..q)
            .map(|a| {
                let mut x = a;
                let mut t = 0usize;
                for _ in 0..r {
                    t = add[t * q + x] as usize;
                    let mut y = x;
                    for _ in 1..p {
                        y = mul[y * q + x] as usize;
                    }
                    x = y;
                }
                debug_assert!(t < pu, "trace lands in the prime field");
                t as u8
            })
            .collect();
        Tables { p, r, q, modulus, add, mul, neg, inv, trace, generator }
    }
}

/// An element `a + b θ` of the quadratic extension.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExtFieldElement {
    pub a: FieldElement,
    pub b: FieldElement,
}

/// The degree-2 extension of a base field, presented as `F[θ]` with
/// `θ² + c1 θ + c0 = 0` for the lexicographically first irreducible
/// `(c0, c1)`.
#[derive(Clone, Debug)]
pub struct QuadraticExtension {
    base: FieldSpec,
    c0: FieldElement,
    c1: FieldElement,
}

impl QuadraticExtension {
    pub fn new(base: &FieldSpec) -> Self {
        let (c0, c1) = base
            .elements()
            .flat_map(|c0| base.elements().map(move |c1| (c0, c1)))
            .find(|&(c0, c1)| {
                base.elements().all(|x| !base.add(base.add(base.mul(x, x), base.mul(c1, x)), c0).is_zero())
            })
            .expect("irreducible quadratics exist");
        QuadraticExtension { base: base.clone(), c0, c1 }
    }

    pub fn base(&self) -> &FieldSpec {
        &self.base
    }

    /// `(c0, c1)` of the defining polynomial `θ² + c1 θ + c0`.
    pub fn defining_coeffs(&self) -> (FieldElement, FieldElement) {
        (self.c0, self.c1)
    }

    /// Number of elements, q².
    pub fn order(&self) -> usize {
        self.base.order() * self.base.order()
    }

    pub fn embed(&self, a: FieldElement) -> ExtFieldElement {
        ExtFieldElement { a, b: FieldElement::ZERO }
    }

    pub fn theta(&self) -> ExtFieldElement {
        ExtFieldElement { a: FieldElement::ZERO, b: FieldElement::ONE }
    }

    pub fn one(&self) -> ExtFieldElement {
        self.embed(FieldElement::ONE)
    }

    /// All elements, ordered by `a + b q`.
    pub fn elements(&self) -> impl Iterator<Item = ExtFieldElement> + '_ {
        self.base.elements().flat_map(move |b| self.base.elements().map(move |a| ExtFieldElement { a, b }))
    }

    pub fn add(&self, x: ExtFieldElement, y: ExtFieldElement) -> ExtFieldElement {
        let f = &self.base;
        ExtFieldElement { a: f.add(x.a, y.a), b: f.add(x.b, y.b) }
    }

    pub fn mul(&self, x: ExtFieldElement, y: ExtFieldElement) -> ExtFieldElement {
        let f = &self.base;
        let bb = f.mul(x.b, y.b);
        let a = f.sub(f.mul(x.a, y.a), f.mul(bb, self.c0));
        let b = f.sub(f.add(f.mul(x.a, y.b), f.mul(x.b, y.a)), f.mul(bb, self.c1));
        ExtFieldElement { a, b }
    }

    pub fn pow(&self, x: ExtFieldElement, mut n: u64) -> ExtFieldElement {
        let mut acc = self.one();
        let mut b = x;
        while n > 0 {
            if n & 1 == 1 {
                acc = self.mul(acc, b);
            }
            b = self.mul(b, b);
            n >>= 1;
        }
        acc
    }

    pub fn is_zero(&self, x: ExtFieldElement) -> bool {
        x.a.is_zero() && x.b.is_zero()
    }

    pub fn inv(&self, x: ExtFieldElement) -> Result<ExtFieldElement, FieldError> {
        if self.is_zero(x) {
            return Err(FieldError::ZeroInverse);
        }
        Ok(self.pow(x, self.order() as u64 - 2))
    }

    /// Frobenius conjugate `z -> z^q`.
    pub fn conj(&self, x: ExtFieldElement) -> ExtFieldElement {
        self.pow(x, self.base.order() as u64)
    }

    /// `z z̄`, which lies in the base field.
    pub fn norm(&self, x: ExtFieldElement) -> FieldElement {
        let n = self.mul(x, self.conj(x));
        debug_assert!(n.b.is_zero());
        n.a
    }

    /// `z + z̄`, which lies in the base field.
    pub fn ext_trace(&self, x: ExtFieldElement) -> FieldElement {
        let t = self.add(x, self.conj(x));
        debug_assert!(t.b.is_zero());
        t.a
    }

    pub fn mult_order(&self, x: ExtFieldElement) -> Option<usize> {
        if self.is_zero(x) {
            return None;
        }
        let one = self.one();
        let mut y = x;
        let mut k = 1;
        while y != one {
            y = self.mul(y, x);
            k += 1;
        }
        Some(k)
    }

    /// First primitive element of the extension in element order.
    pub fn generator(&self) -> ExtFieldElement {
        let target = self.order() - 1;
        self.elements()
            .find(|&x| self.mult_order(x) == Some(target))
            .expect("multiplicative group of a finite field is cyclic")
    }

    /// `g^(q-1)` for the fixed generator `g`; generates the norm-one
    /// subgroup, which has order q + 1.
    pub fn norm_one_generator(&self) -> ExtFieldElement {
        self.pow(self.generator(), self.base.order() as u64 - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf(p: u32, r: u32) -> FieldSpec {
        FieldSpec::new(p, r, None).unwrap()
    }

    #[test]
    fn canonical_moduli() {
        assert_eq!(gf(2, 1).modulus(), &[0, 1]);
        assert_eq!(gf(2, 2).modulus(), &[1, 1, 1]);
        assert_eq!(gf(3, 2).modulus(), &[1, 0, 1]);
        assert_eq!(gf(2, 3).modulus(), &[1, 0, 1, 1]);
    }

    #[test]
    fn gf4_modulus_is_unique_irreducible_quadratic() {
        let irreducible: Vec<_> = monic_polys(2, 2).filter(|m| is_irreducible(m, 2)).collect();
        assert_eq!(irreducible, vec![vec![1, 1, 1]]);
    }

    #[test]
    fn constructor_errors() {
        assert_eq!(FieldSpec::new(4, 1, None).unwrap_err(), FieldError::NonPrime(4));
        assert_eq!(FieldSpec::new(2, 2, Some(&[1, 0, 1])).unwrap_err(), FieldError::ReduciblePolynomial(vec![1, 0, 1]));
        assert_eq!(
            FieldSpec::new(3, 2, Some(&[1, 1])).unwrap_err(),
            FieldError::DegreeMismatch { expected: 2, found: 1 }
        );
        assert!(matches!(FieldSpec::new(2, 9, None), Err(FieldError::TooLarge(512))));
        // Linear polynomials are irreducible.
        assert!(FieldSpec::new(3, 1, Some(&[1, 1])).is_ok());
        // x^2 + 1 has no root mod 3; x^2 + 2 = (x+1)(x+2) does.
        assert!(FieldSpec::new(3, 2, Some(&[1, 0, 1])).is_ok());
        assert!(FieldSpec::new(3, 2, Some(&[2, 0, 1])).is_err());
    }

    #[test]
    fn gf4_arithmetic() {
        let f = gf(2, 2);
        let w = f.element(&[0, 1]).unwrap();
        let w2 = f.mul(w, w);
        assert_eq!(w2, f.element(&[1, 1]).unwrap());
        assert_eq!(f.mul(w, w2), f.one());
        assert_eq!(f.arith(w, w2, ArithOp::Mul).unwrap(), f.one());
        assert_eq!(f.arith(w, f.zero(), ArithOp::Add).unwrap(), w);
        assert_eq!(f.pow(w, 3).unwrap(), f.one());
        assert_eq!(f.pow(w, -1).unwrap(), w2);
    }

    #[test]
    fn gf3_inverse() {
        let f = gf(3, 1);
        let two = f.from_int(2);
        assert_eq!(f.arith(two, two, ArithOp::Inv).unwrap(), two);
        assert_eq!(f.arith(f.zero(), f.zero(), ArithOp::Inv), Err(FieldError::ZeroInverse));
        let alien = FieldElement(7);
        assert_eq!(f.arith(alien, two, ArithOp::Add), Err(FieldError::FieldMismatch));
    }

    #[test]
    fn trace_values() {
        let f3 = gf(3, 1);
        assert_eq!(f3.trace(f3.from_int(2)), 2);
        let f4 = gf(2, 2);
        assert_eq!(f4.trace(f4.one()), 0);
        let w = f4.element(&[0, 1]).unwrap();
        assert_eq!(f4.trace(w), 1);
    }

    #[test]
    fn coefficient_roundtrip() {
        let f = gf(3, 2);
        for a in f.elements() {
            assert_eq!(f.element(&f.coeffs(a)).unwrap(), a);
        }
    }

    #[test]
    fn self_dual_basis_examples() {
        let f2 = gf(2, 1);
        assert_eq!(f2.self_dual_basis(f2.one()).unwrap(), vec![f2.one()]);

        let f4 = gf(2, 2);
        let w = f4.element(&[0, 1]).unwrap();
        let w2 = f4.mul(w, w);
        assert_eq!(f4.self_dual_basis(f4.one()).unwrap(), vec![w, w2]);

        // alpha = w: gamma = w^2, basis gamma^{-1} {w, w^2}.
        let gamma = f4.sqrt_char2(w).unwrap();
        assert_eq!(gamma, w2);
        let gi = f4.inv(gamma).unwrap();
        let basis = f4.self_dual_basis(w).unwrap();
        assert_eq!(basis, vec![f4.mul(gi, w), f4.mul(gi, w2)]);
        for (i, &x) in basis.iter().enumerate() {
            for (j, &y) in basis.iter().enumerate() {
                assert_eq!(f4.trace(f4.mul(w, f4.mul(x, y))), (i == j) as u32);
            }
        }

        assert_eq!(gf(3, 1).self_dual_basis(FieldElement::ONE), Err(FieldError::OddCharacteristic));
        assert_eq!(f4.self_dual_basis(f4.zero()), Err(FieldError::ZeroScale));
    }

    #[test]
    fn quadratic_extensions() {
        let e2 = QuadraticExtension::new(&gf(2, 1));
        assert_eq!(e2.order(), 4);
        // Conjugation squares in GF(4).
        for z in e2.elements() {
            assert_eq!(e2.conj(z), e2.mul(z, z));
        }

        let f3 = gf(3, 1);
        let e3 = QuadraticExtension::new(&f3);
        let fixed = e3.elements().filter(|&z| e3.conj(z) == z).count();
        assert_eq!(fixed, 3);

        let f4 = gf(2, 2);
        let e4 = QuadraticExtension::new(&f4);
        assert_eq!(e4.elements().count(), 16);
        for z in e4.elements() {
            let n = e4.mul(z, e4.conj(z));
            assert!(n.b.is_zero());
        }
    }

    #[test]
    fn norm_one_generators() {
        let e2 = QuadraticExtension::new(&gf(2, 1));
        let z0 = e2.norm_one_generator();
        // Over GF(2) the extension is GF(4) = {0, 1, θ, θ + 1} with θ = ω.
        assert_eq!(z0, e2.theta());
        assert_eq!(e2.mult_order(z0), Some(3));
        assert_eq!(e2.mult_order(e2.norm_one_generator()), Some(3));
        for (p, r) in [(3, 1), (2, 2), (5, 1), (7, 1), (2, 3), (3, 2)] {
            let f = gf(p, r);
            let e = QuadraticExtension::new(&f);
            let z0 = e.norm_one_generator();
            assert_eq!(e.mult_order(z0), Some(f.order() + 1), "GF({p}^{r})");
            assert_eq!(e.norm(z0), f.one());
        }
    }

    #[test]
    fn parse_descriptors() {
        let f = FieldSpec::parse("2^2", None).unwrap();
        assert_eq!(f.order(), 4);
        let f = FieldSpec::parse("3", None).unwrap();
        assert_eq!(f.order(), 3);
        let f = FieldSpec::parse("3^2", Some("2,2,1")).unwrap();
        assert_eq!(f.modulus(), &[2, 2, 1]);
        assert!(FieldSpec::parse("two", None).is_err());
        assert!(FieldSpec::parse("2^", None).is_err());
        let d = f.descriptor();
        assert_eq!(FieldSpec::from_descriptor(&d).unwrap(), f);
        let json = serde_json::to_string(&d).unwrap();
        assert_eq!(json, r#"{"p":3,"r":2,"modulus":[2,2,1]}"#);
    }
}
