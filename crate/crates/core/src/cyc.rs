//! Exact arithmetic in Q(ζ_p) and Z[ζ_p].
//!
//! Elements are stored in the power basis 1, ζ, ..., ζ^(p-2); anything of
//! higher degree is folded back with ζ^(p-1) = -(1 + ζ + ... + ζ^(p-2)).
//! The prime above p is λ = 1 - ζ, totally ramified of index p - 1, so
//! v_p = v_λ / (p - 1) on Z[ζ_p].

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{ExactScalar, Scalar};
use crate::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CycError {
    #[error("conjugation index {j} is divisible by p = {p}")]
    BadConjugationIndex { j: i64, p: u32 },
    #[error("element is not in Z[ζ_p]")]
    NonIntegral,
    #[error("malformed cyclotomic encoding: {0}")]
    Malformed(String),
}

/// An element Σ c_i ζ^i of Q(ζ_p) over the scalar type `T`.
#[derive(Clone, PartialEq)]
pub struct Cyclotomic<T> {
    p: u32,
    coeffs: Vec<T>,
}

impl<T: Scalar> Cyclotomic<T> {
    /// Builds an element from coefficients on ζ^0, ζ^1, ...; any length is
    /// accepted and reduced (exponents are read mod p).
    pub fn new(p: u32, coeffs: Vec<T>) -> Self {
        let mut full = vec![T::zero(); p as usize];
        for (i, c) in coeffs.into_iter().enumerate() {
            let slot = i % p as usize;
            full[slot] = full[slot].clone() + c;
        }
        Self::from_full(p, full)
    }

    /// Reduces a length-p vector on ζ^0..ζ^(p-1).
    fn from_full(p: u32, mut full: Vec<T>) -> Self {
        debug_assert_eq!(full.len(), p as usize);
        let top = full.pop().expect("p ≥ 3");
        for c in full.iter_mut() {
            *c = c.clone() - top.clone();
        }
        Cyclotomic { p, coeffs: full }
    }

    pub fn zero(p: u32) -> Self {
        Cyclotomic {
            p,
            coeffs: vec![T::zero(); p as usize - 1],
        }
    }

    pub fn one(p: u32) -> Self {
        Self::from_scalar(p, T::one())
    }

    pub fn from_scalar(p: u32, c: T) -> Self {
        let mut z = Self::zero(p);
        z.coeffs[0] = c;
        z
    }

    pub fn from_i64(p: u32, n: i64) -> Self {
        Self::from_scalar(p, T::from_i64(n).expect("integer scalar"))
    }

    /// ζ^j for any integer j.
    pub fn zeta_pow(p: u32, j: i64) -> Self {
        let mut full = vec![T::zero(); p as usize];
        full[j.rem_euclid(p as i64) as usize] = T::one();
        Self::from_full(p, full)
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// The rational value when all ζ-components vanish.
    pub fn as_scalar(&self) -> Option<T> {
        self.coeffs[1..]
            .iter()
            .all(|c| c.is_zero())
            .then(|| self.coeffs[0].clone())
    }

    pub fn scale(&self, c: &T) -> Self {
        Cyclotomic {
            p: self.p,
            coeffs: self.coeffs.iter().map(|x| x.clone() * c.clone()).collect(),
        }
    }

    /// The automorphism ζ ↦ ζ^j.
    pub fn conjugate(&self, j: i64) -> Result<Self, CycError> {
        let p = self.p as i64;
        if j.rem_euclid(p) == 0 {
            return Err(CycError::BadConjugationIndex { j, p: self.p });
        }
        let mut full = vec![T::zero(); self.p as usize];
        for (i, c) in self.coeffs.iter().enumerate() {
            let slot = (i as i64 * j).rem_euclid(p) as usize;
            full[slot] = full[slot].clone() + c.clone();
        }
        Ok(Self::from_full(self.p, full))
    }

    /// Complex conjugation ζ ↦ ζ^(-1).
    pub fn complex_conjugate(&self) -> Self {
        self.conjugate(-1).expect("-1 is a unit mod p")
    }

    /// N(α) = Π_{j=1}^{p-1} σ_j(α), a scalar.
    pub fn norm(&self) -> T {
        let mut acc = Self::one(self.p);
        for j in 1..self.p as i64 {
            acc = &acc * &self.conjugate(j).expect("unit index");
        }
        acc.as_scalar()
            .expect("a norm is fixed by every automorphism")
    }

    /// 1/α = (Π_{j=2}^{p-1} σ_j(α)) / N(α); `None` for α = 0.
    pub fn inv(&self) -> Option<Self> {
        let mut cof = Self::one(self.p);
        for j in 2..self.p as i64 {
            cof = &cof * &self.conjugate(j).expect("unit index");
        }
        let n = (self * &cof).as_scalar().expect("norm is rational");
        if n.is_zero() {
            return None;
        }
        Some(cof.scale(&(T::one() / n)))
    }

    fn assert_same_field(&self, other: &Self) {
        assert_eq!(self.p, other.p, "elements of different cyclotomic fields");
    }
}

impl<T: ExactScalar> Cyclotomic<T> {
    /// Membership in Z[ζ_p].
    pub fn is_integral(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_integral())
    }

    /// Image in Z[ζ]/λ ≅ F_p (ζ ≡ 1), for integral elements.
    fn residue_at_lambda(&self) -> Option<u32> {
        let p = self.p as u64;
        let mut acc = 0u64;
        for c in &self.coeffs {
            acc = (acc + c.residue_mod(self.p)? as u64) % p;
        }
        Some(acc as u32)
    }

    /// α / λ if it stays in Z[ζ_p].
    ///
    /// Uses λ · Π_{j=2}^{p-1} (1 - ζ^j) = Φ_p(1) = p.
    pub fn div_lambda(&self) -> Option<Self> {
        if self.residue_at_lambda()? != 0 {
            return None;
        }
        let one = Self::one(self.p);
        let mut cofactor = one.clone();
        for j in 2..self.p as i64 {
            cofactor = &cofactor * &(&one - &Self::zeta_pow(self.p, j));
        }
        let prod = self * &cofactor;
        let coeffs: Option<Vec<T>> = prod.coeffs.iter().map(|c| c.div_exact(self.p)).collect();
        let q = Cyclotomic {
            p: self.p,
            coeffs: coeffs?,
        };
        assert!(q.is_integral(), "λ-division left Z[ζ_p]");
        Some(q)
    }

    /// v_λ(α), or `None` for α = 0.
    pub fn lambda_valuation(&self) -> Result<Option<u64>, CycError> {
        if !self.is_integral() {
            return Err(CycError::NonIntegral);
        }
        if self.is_zero() {
            return Ok(None);
        }
        let mut v = 0;
        let mut cur = self.clone();
        while let Some(next) = cur.div_lambda() {
            cur = next;
            v += 1;
        }
        Ok(Some(v))
    }

    /// v_p(α) = v_λ(α)/(p-1), or `None` for α = 0.
    pub fn p_adic_valuation(&self) -> Result<Option<Rational>, CycError> {
        Ok(self.lambda_valuation()?.map(|v| {
            BigRational::new(BigInt::from(v), BigInt::from(self.p - 1))
        }))
    }

    pub fn to_rational(&self) -> Cyclotomic<Rational> {
        Cyclotomic {
            p: self.p,
            coeffs: self.coeffs.iter().map(|c| c.to_rational()).collect(),
        }
    }
}

impl Cyclotomic<Rational> {
    /// JSON encoding: p-1 strings "num/den", ζ^0 first.
    pub fn to_strings(&self) -> Vec<String> {
        self.coeffs.iter().map(rational_string).collect()
    }

    pub fn from_strings(p: u32, items: &[String]) -> Result<Self, CycError> {
        if items.len() != p as usize - 1 {
            return Err(CycError::Malformed(format!(
                "expected {} coefficients, got {}",
                p - 1,
                items.len()
            )));
        }
        let coeffs = items
            .iter()
            .map(|s| parse_rational(s).ok_or_else(|| CycError::Malformed(s.clone())))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Cyclotomic { p, coeffs })
    }
}

/// "num/den" in lowest terms (den = 1 is still written).
pub fn rational_string(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses "num/den" or a bare integer.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d == BigInt::from(0) {
                return None;
            }
            Some(BigRational::new(n, d))
        }
        None => Some(BigRational::from_integer(s.parse().ok()?)),
    }
}

impl Serialize for Cyclotomic<Rational> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_strings().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Cyclotomic<Rational> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let items = Vec::<String>::deserialize(d)?;
        let p = items.len() as u32 + 1;
        Self::from_strings(p, &items).map_err(serde::de::Error::custom)
    }
}

impl<T: Scalar + fmt::Display> fmt::Display for Cyclotomic<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "{c}")?,
                1 => write!(f, "({c})ζ")?,
                _ => write!(f, "({c})ζ^{i}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl<T: Scalar> fmt::Debug for Cyclotomic<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Cyc{}{:?}", self.p, self.coeffs)
    }
}

impl<T: Scalar> Add for &Cyclotomic<T> {
    type Output = Cyclotomic<T>;
    fn add(self, rhs: &Cyclotomic<T>) -> Cyclotomic<T> {
        self.assert_same_field(rhs);
        Cyclotomic {
            p: self.p,
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        }
    }
}

impl<T: Scalar> Sub for &Cyclotomic<T> {
    type Output = Cyclotomic<T>;
    fn sub(self, rhs: &Cyclotomic<T>) -> Cyclotomic<T> {
        self.assert_same_field(rhs);
        Cyclotomic {
            p: self.p,
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| a.clone() - b.clone())
                .collect(),
        }
    }
}

impl<T: Scalar> Neg for &Cyclotomic<T> {
    type Output = Cyclotomic<T>;
    fn neg(self) -> Cyclotomic<T> {
        Cyclotomic {
            p: self.p,
            coeffs: self.coeffs.iter().map(|a| -a.clone()).collect(),
        }
    }
}

impl<T: Scalar> Mul for &Cyclotomic<T> {
    type Output = Cyclotomic<T>;
    fn mul(self, rhs: &Cyclotomic<T>) -> Cyclotomic<T> {
        self.assert_same_field(rhs);
        let p = self.p as usize;
        let mut full = vec![T::zero(); p];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                let slot = (i + j) % p;
                full[slot] = full[slot].clone() + a.clone() * b.clone();
            }
        }
        Cyclotomic::from_full(self.p, full)
    }
}

macro_rules! owned_ops {
    ($($tr:ident $m:ident),*) => {$(
        impl<T: Scalar> $tr for Cyclotomic<T> {
            type Output = Cyclotomic<T>;
            fn $m(self, rhs: Cyclotomic<T>) -> Cyclotomic<T> {
                (&self).$m(&rhs)
            }
        }
    )*};
}

owned_ops!(Add add, Sub sub, Mul mul);

impl<T: Scalar> std::iter::Sum for Cyclotomic<T> {
    /// Panics on an empty iterator (the field is unknown).
    fn sum<I: Iterator<Item = Self>>(mut iter: I) -> Self {
        let first = iter.next().expect("sum of an empty cyclotomic sequence");
        iter.fold(first, |acc, x| &acc + &x)
    }
}
