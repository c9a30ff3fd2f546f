//! Finite-field towers F_p ⊆ F_q ⊆ F_{q^k}.
//!
//! F_q = F_p[x]/(m_1) and F_{q^k} = F_q[y]/(m_2), where m_1 and m_2 are the
//! smallest monic irreducibles of their degree (candidates ordered by the
//! integer whose digits are the low coefficients). The construction is a
//! pure function of (p, a, k), so two towers with the same parameters are
//! interchangeable and F_q-data embeds into every F_{q^k} as the constant
//! coefficient block.

pub(crate) mod poly;
mod table;

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use thiserror::Error;

use poly::{ExtField, FieldOps, PrimeField};
pub use table::{LogTable, ZERO_LOG};

/// Default cap on the number of field elements a single enumeration may visit.
pub const DEFAULT_BUDGET: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FfError {
    #[error("characteristic {0} rejected: p must be an odd prime")]
    RejectEvenChar(u32),
    #[error("division by zero in a finite field")]
    DivisionByZero,
    #[error("elements belong to different field towers")]
    TowerMismatch,
    #[error("enumeration of {size} elements exceeds the budget of {budget}")]
    BudgetExceeded { size: u128, budget: u64 },
    #[error("extension degrees must be positive")]
    ZeroDegree,
    #[error("{0} has no root in the target field")]
    NoEmbedding(String),
}

/// The tower F_p ⊆ F_q ⊆ F_{q^k} with q = p^a.
#[derive(Clone, PartialEq, Eq)]
pub struct FieldTower {
    p: u32,
    a: usize,
    k: usize,
    base: ExtField,
    /// Monic, length k+1, each coefficient an F_q element of length a.
    top: Vec<Vec<u32>>,
}

impl fmt::Debug for FieldTower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FieldTower(p={}, a={}, k={})", self.p, self.a, self.k)
    }
}

/// Builds F_p ⊆ F_{p^a} ⊆ F_{p^{ak}} with deterministic moduli.
pub fn build_tower(p: u32, a: usize, k: usize) -> Result<Arc<FieldTower>, FfError> {
    if p < 3 || !poly::is_prime(p as u64) {
        return Err(FfError::RejectEvenChar(p));
    }
    if a == 0 || k == 0 {
        return Err(FfError::ZeroDegree);
    }
    let prime = PrimeField { p };
    let base = ExtField {
        p,
        modulus: poly::smallest_irreducible(&prime, a),
    };
    let top = poly::smallest_irreducible(&base, k);
    Ok(Arc::new(FieldTower { p, a, k, base, top }))
}

impl FieldTower {
    pub fn p(&self) -> u32 {
        self.p
    }

    /// Degree of F_q over F_p.
    pub fn a(&self) -> usize {
        self.a
    }

    /// Degree of the top field over F_q.
    pub fn k(&self) -> usize {
        self.k
    }

    /// q = p^a.
    pub fn q(&self) -> u64 {
        (self.p as u64).pow(self.a as u32)
    }

    /// Number of elements of the top field, p^(ak).
    pub fn size(&self) -> u128 {
        (self.p as u128).pow((self.a * self.k) as u32)
    }

    /// Absolute degree ak.
    pub fn degree(&self) -> usize {
        self.a * self.k
    }

    pub fn base_modulus(&self) -> &[u32] {
        &self.base.modulus
    }

    pub fn top_modulus(&self) -> &[Vec<u32>] {
        &self.top
    }

    /// The tower with the same F_q and top degree 1.
    pub fn base_tower(&self) -> Arc<FieldTower> {
        build_tower(self.p, self.a, 1).expect("parameters already validated")
    }

    pub fn zero(self: &Arc<Self>) -> FFElement {
        FFElement {
            tower: Arc::clone(self),
            coeffs: vec![0; self.degree()],
        }
    }

    pub fn one(self: &Arc<Self>) -> FFElement {
        self.from_u32(1)
    }

    /// The prime-field element n mod p.
    pub fn from_u32(self: &Arc<Self>, n: u32) -> FFElement {
        let mut e = self.zero();
        e.coeffs[0] = n % self.p;
        e
    }

    /// The element with flat coordinates `coeffs` (k blocks of a digits),
    /// reduced mod p and zero-padded.
    pub fn element(self: &Arc<Self>, coeffs: &[u32]) -> FFElement {
        let mut e = self.zero();
        for (slot, c) in e.coeffs.iter_mut().zip(coeffs) {
            *slot = c % self.p;
        }
        e
    }

    /// Embeds an F_q element (coordinates over F_p, length ≤ a) as the
    /// constant block.
    pub fn from_base(self: &Arc<Self>, base_coeffs: &[u32]) -> FFElement {
        assert!(base_coeffs.len() <= self.a, "base element too long");
        self.element(base_coeffs)
    }

    /// Element whose base-p digits (low coordinate first) spell `index`.
    pub fn from_index(self: &Arc<Self>, mut index: u128) -> FFElement {
        let p = self.p as u128;
        let coeffs = (0..self.degree())
            .map(|_| {
                let d = (index % p) as u32;
                index /= p;
                d
            })
            .collect();
        FFElement {
            tower: Arc::clone(self),
            coeffs,
        }
    }

    /// All elements in index order, within `budget`.
    pub fn enumerate(self: &Arc<Self>, budget: u64) -> Result<Enumeration, FfError> {
        let size = self.size();
        if size > budget as u128 {
            return Err(FfError::BudgetExceeded { size, budget });
        }
        Ok(Enumeration {
            tower: Arc::clone(self),
            len: size as u64,
        })
    }

    fn block<'a>(&self, coeffs: &'a [u32], i: usize) -> &'a [u32] {
        &coeffs[i * self.a..(i + 1) * self.a]
    }

    fn mul_flat(&self, x: &[u32], y: &[u32]) -> Vec<u32> {
        let k = self.k;
        let a = self.a;
        let b = &self.base;
        let mut prod: Vec<Vec<u32>> = vec![b.zero(); 2 * k - 1];
        for i in 0..k {
            let xi = self.block(x, i).to_vec();
            if b.is_zero(&xi) {
                continue;
            }
            for j in 0..k {
                let yj = self.block(y, j).to_vec();
                if b.is_zero(&yj) {
                    continue;
                }
                prod[i + j] = b.add(&prod[i + j], &b.mul(&xi, &yj));
            }
        }
        for i in (k..2 * k - 1).rev() {
            let c = std::mem::replace(&mut prod[i], b.zero());
            if b.is_zero(&c) {
                continue;
            }
            for j in 0..k {
                let t = b.mul(&c, &self.top[j]);
                prod[i - k + j] = b.sub(&prod[i - k + j], &t);
            }
        }
        let mut out = Vec::with_capacity(k * a);
        for blk in prod.into_iter().take(k) {
            out.extend(blk);
        }
        out
    }
}

/// Ordered enumeration of F_{q^k}; supports contiguous chunks.
#[derive(Clone, Debug)]
pub struct Enumeration {
    tower: Arc<FieldTower>,
    len: u64,
}

impl Enumeration {
    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = FFElement> + '_ {
        self.chunk(0..self.len)
    }

    /// Elements with indices in `range` (clamped to the field size).
    pub fn chunk(&self, range: std::ops::Range<u64>) -> impl Iterator<Item = FFElement> + '_ {
        let end = range.end.min(self.len);
        (range.start.min(end)..end).map(move |i| self.tower.from_index(i as u128))
    }
}

/// An element of the top field of a tower, in canonical reduced form.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FFElement {
    tower: Arc<FieldTower>,
    coeffs: Vec<u32>,
}

impl fmt::Debug for FFElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FF{:?}", self.coeffs)
    }
}

impl std::hash::Hash for FieldTower {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        (self.p, self.a, self.k).hash(state);
    }
}

impl FFElement {
    pub fn tower(&self) -> &Arc<FieldTower> {
        &self.tower
    }

    /// Flat coordinates over F_p: k blocks of a digits.
    pub fn coeffs(&self) -> &[u32] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    pub fn is_one(&self) -> bool {
        self.coeffs[0] == 1 && self.coeffs[1..].iter().all(|&c| c == 0)
    }

    /// Position in the canonical enumeration.
    pub fn index(&self) -> u128 {
        let p = self.tower.p as u128;
        self.coeffs
            .iter()
            .rev()
            .fold(0u128, |acc, &d| acc * p + d as u128)
    }

    /// True when the element lies in F_q (only the constant block is used).
    pub fn in_base(&self) -> bool {
        self.coeffs[self.tower.a..].iter().all(|&c| c == 0)
    }

    /// True when the element lies in F_p.
    pub fn in_prime_field(&self) -> bool {
        self.coeffs[1..].iter().all(|&c| c == 0)
    }

    /// The constant block as an F_q coordinate vector.
    pub fn base_coeffs(&self) -> &[u32] {
        &self.coeffs[..self.tower.a]
    }

    fn check(&self, other: &FFElement) -> Result<(), FfError> {
        if Arc::ptr_eq(&self.tower, &other.tower) || self.tower == other.tower {
            Ok(())
        } else {
            Err(FfError::TowerMismatch)
        }
    }

    fn with(&self, coeffs: Vec<u32>) -> FFElement {
        FFElement {
            tower: Arc::clone(&self.tower),
            coeffs,
        }
    }

    pub fn try_add(&self, other: &FFElement) -> Result<FFElement, FfError> {
        self.check(other)?;
        let p = self.tower.p;
        Ok(self.with(
            self.coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(x, y)| (x + y) % p)
                .collect(),
        ))
    }

    pub fn try_sub(&self, other: &FFElement) -> Result<FFElement, FfError> {
        self.check(other)?;
        let p = self.tower.p;
        Ok(self.with(
            self.coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(x, y)| (x + p - y) % p)
                .collect(),
        ))
    }

    pub fn try_mul(&self, other: &FFElement) -> Result<FFElement, FfError> {
        self.check(other)?;
        Ok(self.with(self.tower.mul_flat(&self.coeffs, &other.coeffs)))
    }

    pub fn scale(&self, n: u32) -> FFElement {
        let p = self.tower.p as u64;
        let n = n as u64 % p;
        self.with(
            self.coeffs
                .iter()
                .map(|&c| ((c as u64 * n) % p) as u32)
                .collect(),
        )
    }

    pub fn pow(&self, mut e: u128) -> FFElement {
        let mut base = self.clone();
        let mut acc = self.tower.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    /// Signed exponent; negative powers need a nonzero base.
    pub fn powi(&self, e: i64) -> Result<FFElement, FfError> {
        if e >= 0 {
            Ok(self.pow(e as u128))
        } else {
            Ok(self.inv()?.pow(e.unsigned_abs() as u128))
        }
    }

    pub fn inv(&self) -> Result<FFElement, FfError> {
        if self.is_zero() {
            return Err(FfError::DivisionByZero);
        }
        Ok(self.pow(self.tower.size() - 2))
    }

    pub fn try_div(&self, other: &FFElement) -> Result<FFElement, FfError> {
        self.try_mul(&other.inv()?)
    }

    /// x ↦ x^p.
    pub fn frobenius(&self) -> FFElement {
        self.pow(self.tower.p as u128)
    }

    /// Tr_{F_{q^k}/F_p}(x) = Σ_{i<ak} x^{p^i}, as a residue mod p.
    pub fn absolute_trace(&self) -> u32 {
        let mut acc = self.tower.zero();
        let mut cur = self.clone();
        for _ in 0..self.tower.degree() {
            acc = &acc + &cur;
            cur = cur.frobenius();
        }
        debug_assert!(acc.in_prime_field());
        acc.coeffs[0]
    }

    /// Tr_{F_{q^k}/F_q}(x) = Σ_{i<k} x^{q^i}; lands in the constant block.
    pub fn relative_trace(&self) -> FFElement {
        let q = self.tower.q() as u128;
        let mut acc = self.tower.zero();
        let mut cur = self.clone();
        for _ in 0..self.tower.k {
            acc = &acc + &cur;
            cur = cur.pow(q);
        }
        debug_assert!(acc.in_base());
        acc
    }

    /// Tr_{F_q/F_p} of an element of F_q; panics outside F_q.
    pub fn base_trace(&self) -> u32 {
        assert!(self.in_base(), "base_trace needs an element of F_q");
        let mut acc = self.tower.zero();
        let mut cur = self.clone();
        for _ in 0..self.tower.a {
            acc = &acc + &cur;
            cur = cur.frobenius();
        }
        debug_assert!(acc.in_prime_field());
        acc.coeffs[0]
    }

    /// The unique y with y^p = x, namely x^(p^(ak-1)).
    pub fn pth_root(&self) -> FFElement {
        let mut cur = self.clone();
        for _ in 1..self.tower.degree() {
            cur = cur.frobenius();
        }
        cur
    }

    /// Quadratic character: true for nonzero squares.
    pub fn is_square(&self) -> bool {
        if self.is_zero() {
            return true;
        }
        self.pow((self.tower.size() - 1) / 2).is_one()
    }

    /// Square root by Tonelli–Shanks, normalised to the root with the smaller
    /// enumeration index. `None` for non-squares.
    pub fn sqrt(&self) -> Option<FFElement> {
        if self.is_zero() {
            return Some(self.clone());
        }
        if !self.is_square() {
            return None;
        }
        let order = self.tower.size() - 1;
        let s = order.trailing_zeros();
        let t = order >> s;
        let z = (1..)
            .map(|i| self.tower.from_index(i))
            .find(|c| !c.is_square())
            .expect("odd-characteristic fields have non-squares");
        let mut m = s;
        let mut c = z.pow(t);
        let mut tt = self.pow(t);
        let mut r = self.pow(t.div_ceil(2));
        while !tt.is_one() {
            let mut i = 0;
            let mut probe = tt.clone();
            while !probe.is_one() {
                probe = &probe * &probe;
                i += 1;
            }
            let mut b = c.clone();
            for _ in 0..(m - i - 1) {
                b = &b * &b;
            }
            m = i;
            c = &b * &b;
            tt = &tt * &c;
            r = &r * &b;
        }
        let other = -&r;
        Some(if other.index() < r.index() { other } else { r })
    }

    /// Multiplicative order of a nonzero element.
    pub fn order(&self) -> u128 {
        assert!(!self.is_zero());
        let n = self.tower.size() - 1;
        let mut ord = n;
        for r in poly::prime_factors(n as u64) {
            let r = r as u128;
            while ord % r == 0 && self.pow(ord / r).is_one() {
                ord /= r;
            }
        }
        ord
    }

    /// Re-expresses an element of this tower in another tower with the same
    /// F_q (same p and a); the element must lie in F_q.
    pub fn to_tower(&self, target: &Arc<FieldTower>) -> Result<FFElement, FfError> {
        if target.p != self.tower.p || target.a != self.tower.a || !self.in_base() {
            return Err(FfError::TowerMismatch);
        }
        Ok(target.from_base(self.base_coeffs()))
    }
}

macro_rules! forward_op {
    ($tr:ident, $method:ident, $try:ident) => {
        impl $tr<&FFElement> for &FFElement {
            type Output = FFElement;
            /// Panics when the operands live in different towers.
            fn $method(self, rhs: &FFElement) -> FFElement {
                self.$try(rhs).expect("finite-field tower mismatch")
            }
        }
        impl $tr<FFElement> for FFElement {
            type Output = FFElement;
            fn $method(self, rhs: FFElement) -> FFElement {
                (&self).$method(&rhs)
            }
        }
    };
}

forward_op!(Add, add, try_add);
forward_op!(Sub, sub, try_sub);
forward_op!(Mul, mul, try_mul);

impl Neg for &FFElement {
    type Output = FFElement;
    fn neg(self) -> FFElement {
        let p = self.tower.p;
        self.with(self.coeffs.iter().map(|&c| (p - c) % p).collect())
    }
}

impl Neg for FFElement {
    type Output = FFElement;
    fn neg(self) -> FFElement {
        -&self
    }
}

/// A field embedding F_q → F_{q'} for towers over the same p with a | a'.
/// Only the constant blocks (F_q and F_{q'}) take part.
#[derive(Clone, Debug)]
pub struct Embedding {
    source: Arc<FieldTower>,
    target: Arc<FieldTower>,
    /// Image of the generator x of F_q.
    image_of_x: FFElement,
}

impl Embedding {
    /// The embedding sending x to the smallest-index root of the source base
    /// modulus among the elements of the target base field.
    pub fn new(source: &Arc<FieldTower>, target: &Arc<FieldTower>) -> Result<Self, FfError> {
        if source.p != target.p || target.a % source.a != 0 {
            return Err(FfError::TowerMismatch);
        }
        let tb = target.base_tower();
        let q_target = tb.q() as u128;
        let modulus = &source.base.modulus;
        let root = (0..q_target)
            .map(|i| tb.from_index(i))
            .find(|r| {
                let mut acc = tb.zero();
                for &c in modulus.iter().rev() {
                    acc = &(&acc * r) + &tb.from_u32(c);
                }
                acc.is_zero()
            })
            .ok_or_else(|| FfError::NoEmbedding(format!("{:?}", modulus)))?;
        Ok(Embedding {
            source: Arc::clone(source),
            target: Arc::clone(target),
            image_of_x: root.to_tower(target)?,
        })
    }

    pub fn apply(&self, x: &FFElement) -> Result<FFElement, FfError> {
        if x.tower.p != self.source.p || x.tower.a != self.source.a || !x.in_base() {
            return Err(FfError::TowerMismatch);
        }
        let mut acc = self.target.zero();
        let mut pw = self.target.one();
        for &c in x.base_coeffs() {
            acc = &acc + &pw.scale(c);
            pw = &pw * &self.image_of_x;
        }
        Ok(acc)
    }
}
