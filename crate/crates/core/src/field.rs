//! Arithmetic in GF(p^n), elements in the polynomial basis over a fixed
//! irreducible modulus.
//!
//! The modulus is chosen as the lexicographically smallest monic irreducible
//! polynomial (coefficients compared from the constant term upward), so every
//! table derived from a field is reproducible.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use crate::dimension::is_prime;
use crate::error::{Error, Result};

/// Polynomials over GF(p) as coefficient vectors, constant term first.
mod poly {
    pub fn trim(mut a: Vec<u32>) -> Vec<u32> {
        while a.last() == Some(&0) {
            a.pop();
        }
        a
    }

    pub fn mul(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![0u64; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                out[i + j] = (out[i + j] + x as u64 * y as u64) % p as u64;
            }
        }
        trim(out.into_iter().map(|c| c as u32).collect())
    }

    /// Remainder of `a` modulo the monic polynomial `m`.
    pub fn rem_monic(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
        let mut r = trim(a.to_vec());
        let dm = m.len() - 1;
        while r.len() > dm {
            let lead = *r.last().unwrap();
            let shift = r.len() - 1 - dm;
            for (k, &c) in m.iter().enumerate() {
                let sub = (lead as u64 * c as u64 % p as u64) as u32;
                r[shift + k] = (r[shift + k] + p - sub) % p;
            }
            r = trim(r);
        }
        r
    }

    /// All monic polynomials of the given degree, in lexicographic order of
    /// their coefficients read from the constant term upward.
    pub fn monic_of_degree(p: u32, degree: usize) -> impl Iterator<Item = Vec<u32>> {
        let count = (p as usize).pow(degree as u32);
        (0..count).map(move |idx| {
            // constant term is the most significant digit
            let mut coeffs = vec![0u32; degree + 1];
            let mut rest = idx;
            for k in (0..degree).rev() {
                coeffs[k] = (rest % p as usize) as u32;
                rest /= p as usize;
            }
            coeffs[degree] = 1;
            coeffs
        })
    }

    pub fn is_irreducible(m: &[u32], p: u32) -> bool {
        let n = m.len() - 1;
        (1..=n / 2).all(|deg| monic_of_degree(p, deg).all(|f| !rem_monic(m, &f, p).is_empty()))
    }
}

/// Lexicographically smallest monic irreducible polynomial of degree `n` over GF(p).
pub fn find_irreducible(p: u32, n: u32) -> Result<Vec<u32>> {
    if !is_prime(p as u64) {
        return Err(Error::NotPrime(p as u64));
    }
    if n == 0 {
        return Err(Error::ZeroDegree);
    }
    Ok(poly::monic_of_degree(p, n as usize)
        .find(|m| poly::is_irreducible(m, p))
        .expect("irreducible polynomials exist in every degree"))
}

/// The field GF(p^n) together with its modulus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldSpec {
    p: u32,
    n: u32,
    modulus: Vec<u32>,
}

impl FieldSpec {
    pub fn new(p: u32, n: u32) -> Result<Arc<Self>> {
        let modulus = find_irreducible(p, n)?;
        Ok(Arc::new(Self { p, n, modulus }))
    }

    pub fn with_modulus(p: u32, modulus: Vec<u32>) -> Result<Arc<Self>> {
        if !is_prime(p as u64) {
            return Err(Error::NotPrime(p as u64));
        }
        let degree = modulus.len().saturating_sub(1);
        if degree == 0 || modulus[degree] != 1 || modulus.iter().any(|&c| c >= p) {
            return Err(Error::NotIrreducible { p, degree });
        }
        if !poly::is_irreducible(&modulus, p) {
            return Err(Error::NotIrreducible { p, degree });
        }
        Ok(Arc::new(Self { p, n: degree as u32, modulus }))
    }

    pub fn characteristic(&self) -> u32 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.n
    }

    pub fn order(&self) -> usize {
        (self.p as usize).pow(self.n)
    }

    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }
}

/// Element of GF(p^n); `coeffs[k]` multiplies `x^k`.
#[derive(Clone, PartialEq, Eq)]
pub struct FieldElement {
    field: Arc<FieldSpec>,
    coeffs: Vec<u32>,
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({}^{}){:?}", self.field.p, self.field.n, self.coeffs)
    }
}

impl FieldElement {
    pub fn new(field: &Arc<FieldSpec>, coeffs: &[u32]) -> Self {
        let n = field.n as usize;
        let mut c: Vec<u32> = coeffs.iter().map(|&v| v % field.p).collect();
        c = poly::rem_monic(&c, &field.modulus, field.p);
        c.resize(n, 0);
        Self { field: Arc::clone(field), coeffs: c }
    }

    pub fn zero(field: &Arc<FieldSpec>) -> Self {
        Self::new(field, &[])
    }

    pub fn one(field: &Arc<FieldSpec>) -> Self {
        Self::new(field, &[1])
    }

    /// Element whose base-p digits (constant term least significant) spell `index`.
    pub fn from_index(field: &Arc<FieldSpec>, index: usize) -> Self {
        let p = field.p as usize;
        let mut rest = index % field.order();
        let coeffs: Vec<u32> = (0..field.n)
            .map(|_| {
                let c = (rest % p) as u32;
                rest /= p;
                c
            })
            .collect();
        Self { field: Arc::clone(field), coeffs }
    }

    pub fn index(&self) -> usize {
        let p = self.field.p as usize;
        self.coeffs.iter().rev().fold(0, |acc, &c| acc * p + c as usize)
    }

    /// Every element of the field, ordered by [`FieldElement::index`].
    pub fn all(field: &Arc<FieldSpec>) -> Vec<Self> {
        (0..field.order()).map(|i| Self::from_index(field, i)).collect()
    }

    pub fn field(&self) -> &Arc<FieldSpec> {
        &self.field
    }

    pub fn coeffs(&self) -> &[u32] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.field, &other.field) || self.field == other.field {
            Ok(())
        } else {
            Err(Error::FieldMismatch)
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let p = self.field.p;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| (a + b) % p).collect();
        Ok(Self { field: Arc::clone(&self.field), coeffs })
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let f = &self.field;
        let prod = poly::mul(&self.coeffs, &other.coeffs, f.p);
        let mut coeffs = poly::rem_monic(&prod, &f.modulus, f.p);
        coeffs.resize(f.n as usize, 0);
        Ok(Self { field: Arc::clone(f), coeffs })
    }

    pub fn neg(&self) -> Self {
        let p = self.field.p;
        let coeffs = self.coeffs.iter().map(|&c| (p - c) % p).collect();
        Self { field: Arc::clone(&self.field), coeffs }
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one(&self.field);
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(self.pow(self.field.order() as u64 - 2))
    }

    /// Absolute trace `Σ_{k<n} a^{p^k}`, an element of the prime subfield.
    pub fn trace(&self) -> u32 {
        let p = self.field.p as u64;
        let mut acc = Self::zero(&self.field);
        let mut term = self.clone();
        for _ in 0..self.field.n {
            acc = &acc + &term;
            term = term.pow(p);
        }
        debug_assert!(acc.coeffs[1..].iter().all(|&c| c == 0), "trace left the prime field");
        acc.coeffs[0]
    }
}

impl Add for &FieldElement {
    type Output = FieldElement;
    fn add(self, rhs: Self) -> FieldElement {
        self.checked_add(rhs).expect("operands belong to different fields")
    }
}

impl Sub for &FieldElement {
    type Output = FieldElement;
    fn sub(self, rhs: Self) -> FieldElement {
        self.checked_add(&rhs.neg()).expect("operands belong to different fields")
    }
}

impl Mul for &FieldElement {
    type Output = FieldElement;
    fn mul(self, rhs: Self) -> FieldElement {
        self.checked_mul(rhs).expect("operands belong to different fields")
    }
}

impl Neg for &FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        FieldElement::neg(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Brute-force irreducibility: no root-free factorization, checked by
    /// multiplying every pair of monic polynomials whose degrees sum to n.
    fn brute_irreducible(m: &[u32], p: u32) -> bool {
        let n = m.len() - 1;
        for d1 in 1..n {
            for a in poly::monic_of_degree(p, d1) {
                for b in poly::monic_of_degree(p, n - d1) {
                    if poly::mul(&a, &b, p) == m {
                        return false;
                    }
                }
            }
        }
        true
    }

    #[test]
    fn irreducible_examples() {
        assert_eq!(find_irreducible(2, 1).unwrap(), vec![0, 1]);
        assert_eq!(find_irreducible(2, 2).unwrap(), vec![1, 1, 1]);
        assert_eq!(find_irreducible(3, 2).unwrap(), vec![1, 0, 1]);
        assert_eq!(find_irreducible(4, 2), Err(Error::NotPrime(4)));
        assert_eq!(find_irreducible(2, 0), Err(Error::ZeroDegree));
    }

    #[test]
    fn irreducible_outputs_pass_brute_force() {
        for (p, n) in [(2, 2), (2, 3), (2, 4), (2, 5), (3, 2), (3, 3), (5, 2), (7, 2)] {
            let m = find_irreducible(p, n).unwrap();
            assert!(brute_irreducible(&m, p), "p={p} n={n} m={m:?}");
            // every lexicographically smaller candidate factors
            for cand in poly::monic_of_degree(p, n as usize).take_while(|c| *c != m) {
                assert!(!brute_irreducible(&cand, p));
            }
        }
    }

    #[test]
    fn with_modulus_rejects_reducible() {
        assert!(FieldSpec::with_modulus(2, vec![1, 0, 1]).is_err());
        assert!(FieldSpec::with_modulus(3, vec![1, 0, 1]).is_ok());
    }

    #[test]
    fn arithmetic_examples() {
        let gf4 = FieldSpec::new(2, 2).unwrap();
        let x = FieldElement::new(&gf4, &[0, 1]);
        assert_eq!(&x * &x, FieldElement::new(&gf4, &[1, 1]));
        let zero = FieldElement::zero(&gf4);
        assert_eq!(&x + &zero, x);

        let gf3 = FieldSpec::new(3, 1).unwrap();
        let two = FieldElement::new(&gf3, &[2]);
        assert_eq!(&two * &two, FieldElement::one(&gf3));
    }

    #[test]
    fn mismatched_fields_rejected() {
        let a = FieldElement::one(&FieldSpec::new(2, 2).unwrap());
        let b = FieldElement::one(&FieldSpec::new(3, 2).unwrap());
        assert_eq!(a.checked_add(&b), Err(Error::FieldMismatch));
        assert_eq!(a.checked_mul(&b), Err(Error::FieldMismatch));
    }

    #[test]
    fn trace_examples() {
        let gf5 = FieldSpec::new(5, 1).unwrap();
        for a in FieldElement::all(&gf5) {
            assert_eq!(a.trace() as usize, a.index());
        }
        let gf4 = FieldSpec::new(2, 2).unwrap();
        assert_eq!(FieldElement::new(&gf4, &[0, 1]).trace(), 1);
        let gf9 = FieldSpec::new(3, 2).unwrap();
        assert_eq!(gf9.modulus(), &[1, 0, 1]);
        assert_eq!(FieldElement::new(&gf9, &[0, 1]).trace(), 0);
    }

    fn small_fields() -> Vec<Arc<FieldSpec>> {
        [(2, 1), (3, 1), (2, 2), (5, 1), (7, 1), (2, 3), (3, 2), (11, 1), (13, 1), (2, 4)]
            .into_iter()
            .map(|(p, n)| FieldSpec::new(p, n).unwrap())
            .collect()
    }

    #[test]
    fn field_axioms_exhaustive() {
        for f in small_fields() {
            let els = FieldElement::all(&f);
            let one = FieldElement::one(&f);
            for a in &els {
                assert_eq!(&(a + &a.neg()), &FieldElement::zero(&f));
                if !a.is_zero() {
                    assert_eq!(&(a * &a.inv().unwrap()), &one);
                }
                for b in &els {
                    assert_eq!(a * b, b * a);
                    assert_eq!((a + b).trace(), (a.trace() + b.trace()) % f.characteristic());
                    for c in &els {
                        assert_eq!(&(a * b) * c, a * &(b * c));
                        assert_eq!(a * &(b + c), &(a * b) + &(a * c));
                    }
                }
            }
        }
    }

    #[test]
    fn index_round_trip() {
        let f = FieldSpec::new(3, 2).unwrap();
        for i in 0..9 {
            assert_eq!(FieldElement::from_index(&f, i).index(), i);
        }
        assert!(FieldElement::zero(&f).inv().is_err());
    }
}
