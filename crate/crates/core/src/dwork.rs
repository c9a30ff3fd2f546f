//! Dwork trace-formula oracle for slopes below one, over F_p with base A¹
//! or G_m.
//!
//! The Frobenius operator ψ = U_p ∘ E_f acts on Laurent series by
//! ψ(t^n) = Σ_m e_{pm−n} t^m, where E_f is the Artin–Hasse splitting
//! function of f. Its Fredholm determinant is Π_i L(f,V,p^i s) (times
//! Π_i (1 − p^{i+1} ζ^{f(0)} s) on A¹), so the slopes below one of the
//! truncated determinant are the slopes below one of L(f,V,s).

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::curve::{Case, CurveModel, Place};
use crate::lfun::{compute_l, newton_polygon_q, LfunError, Options, SumEngine};
use crate::{NewtonPolygon, Rational};

/// Largest D(p−1) the fixed-size scratch buffers accept.
const MAX_E: usize = 128;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DworkError {
    #[error("outside the oracle's scope: {0}")]
    OutOfScope(String),
    #[error("pole order {order} is divisible by p = {p}")]
    BadConductor { order: u64, p: u32 },
    #[error("Artin-Hasse coefficient {0} is not p-integral")]
    IntegralityFailure(usize),
    #[error("Newton iteration for γ did not converge at precision {0}")]
    NoConvergence(u32),
    #[error("splitting function known to |exponent| ≤ {have}, need {need}")]
    TruncationTooSmall { need: i64, have: i64 },
    #[error("requested cut {cut} exceeds the certified threshold {threshold}")]
    ValidityTooLow { cut: String, threshold: String },
    #[error("precision p^{n} with p = {p} does not fit 63 bits")]
    PrecisionTooHigh { p: u32, n: u32 },
    #[error("bad ring parameters: {0}")]
    BadRing(String),
    #[error("oracle mismatch: {0}")]
    OracleMismatch(String),
    #[error(transparent)]
    Lfun(#[from] LfunError),
}

/// Z_p[π_D]/(p^N) with π_D a root of X^{D(p−1)} + p, so π = π_D^D
/// satisfies π^{p−1} = −p.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PadicRing {
    p: u32,
    d: u32,
    n: u32,
    e: usize,
    modulus: u64,
}

impl PadicRing {
    pub fn new(p: u32, d: u32, n: u32) -> Result<Self, DworkError> {
        if p < 3 || d == 0 || n == 0 {
            return Err(DworkError::BadRing(format!("p = {p}, D = {d}, N = {n}")));
        }
        let e = d as usize * (p as usize - 1);
        if e > MAX_E {
            return Err(DworkError::BadRing(format!("D(p−1) = {e} exceeds {MAX_E}")));
        }
        let modulus = (p as u64)
            .checked_pow(n)
            .filter(|&m| m < 1 << 63)
            .ok_or(DworkError::PrecisionTooHigh { p, n })?;
        Ok(PadicRing { p, d, n, e, modulus })
    }

    /// Largest N with p^N < 2^63.
    pub fn max_precision(p: u32) -> u32 {
        let mut n = 0;
        let mut m: u64 = 1;
        while let Some(next) = m.checked_mul(p as u64).filter(|&x| x < 1 << 63) {
            m = next;
            n += 1;
        }
        n
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn precision(&self) -> u32 {
        self.n
    }

    /// Degree D(p−1) of the Eisenstein modulus.
    pub fn e(&self) -> usize {
        self.e
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    fn mulmod(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.modulus as u128) as u64
    }

    fn addmod(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.modulus {
            s - self.modulus
        } else {
            s
        }
    }

    fn negmod(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.modulus - a
        }
    }

    fn residue(&self, x: &BigInt) -> u64 {
        x.mod_floor(&BigInt::from(self.modulus)).to_u64().expect("reduced")
    }

    /// Residue of a p-integral rational.
    fn rational_residue(&self, r: &Rational) -> Option<u64> {
        let m = BigInt::from(self.modulus);
        let den = r.denom().mod_floor(&m);
        let g = den.extended_gcd(&m);
        if !g.gcd.is_one() {
            return None;
        }
        let inv = g.x.mod_floor(&m);
        Some(self.residue(&(r.numer() * inv)))
    }

    /// out += a·b on raw coordinate slices.
    fn mul_acc(&self, out: &mut [u64], a: &[u64], b: &[u64]) {
        if a.iter().all(|&x| x == 0) || b.iter().all(|&x| x == 0) {
            return;
        }
        let e = self.e;
        let mut lo = [0u128; MAX_E];
        let mut hi = [0u128; MAX_E];
        for (i, &ai) in a.iter().enumerate() {
            if ai == 0 {
                continue;
            }
            for (j, &bj) in b.iter().enumerate() {
                if bj == 0 {
                    continue;
                }
                let t = self.mulmod(ai, bj) as u128;
                if i + j < e {
                    lo[i + j] += t;
                } else {
                    hi[i + j - e] += t;
                }
            }
        }
        let m = self.modulus as u128;
        for k in 0..e {
            let l = lo[k] % m;
            let h = (hi[k] % m) * self.p as u128 % m;
            let v = (l + m - h) % m;
            out[k] = self.addmod(out[k], v as u64);
        }
    }
}

/// An element Σ c_i π_D^i of Z_p[π_D] known modulo p^N.
#[derive(Clone, PartialEq, Eq)]
pub struct PadicRamified {
    ring: PadicRing,
    coeffs: Vec<u64>,
}

impl std::fmt::Debug for PadicRamified {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:?} mod {}^{}", self.coeffs, self.ring.p, self.ring.n)
    }
}

/// Valuation of a truncated element: exact when below the precision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Valuation {
    Exact(Rational),
    AtLeast(u32),
}

impl PadicRamified {
    pub fn zero(ring: PadicRing) -> Self {
        PadicRamified {
            ring,
            coeffs: vec![0; ring.e],
        }
    }

    pub fn one(ring: PadicRing) -> Self {
        Self::from_u64(ring, 1)
    }

    pub fn from_u64(ring: PadicRing, c: u64) -> Self {
        let mut x = Self::zero(ring);
        x.coeffs[0] = c % ring.modulus;
        x
    }

    pub fn from_bigint(ring: PadicRing, c: &BigInt) -> Self {
        let mut x = Self::zero(ring);
        x.coeffs[0] = ring.residue(c);
        x
    }

    /// None if the rational is not p-integral.
    pub fn from_rational(ring: PadicRing, r: &Rational) -> Option<Self> {
        let mut x = Self::zero(ring);
        x.coeffs[0] = ring.rational_residue(r)?;
        Some(x)
    }

    /// Coefficients reduced modulo p^N; entries past D(p−1) wrap through
    /// π_D^{D(p−1)} = −p.
    pub fn from_coeffs(ring: PadicRing, coeffs: &[i64]) -> Self {
        let mut x = Self::zero(ring);
        let mut pow = Self::one(ring);
        let uni = Self::pi_d(ring);
        for &c in coeffs {
            let term = pow.scale_i64(c);
            x = &x + &term;
            pow = &pow * &uni;
        }
        x
    }

    /// π_D.
    pub fn pi_d(ring: PadicRing) -> Self {
        let mut x = Self::zero(ring);
        if ring.e == 1 {
            x.coeffs[0] = ring.negmod(ring.p as u64 % ring.modulus);
        } else {
            x.coeffs[1] = 1;
        }
        x
    }

    /// π = π_D^D, with π^{p−1} = −p.
    pub fn pi(ring: PadicRing) -> Self {
        Self::pi_d(ring).pow(ring.d as u64)
    }

    pub fn ring(&self) -> PadicRing {
        self.ring
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    pub fn scale_i64(&self, c: i64) -> Self {
        let r = &self.ring;
        let m = r.modulus as i128;
        let c = (c as i128).rem_euclid(m) as u64;
        PadicRamified {
            ring: self.ring,
            coeffs: self.coeffs.iter().map(|&x| r.mulmod(x, c)).collect(),
        }
    }

    pub fn pow(&self, mut n: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one(self.ring);
        while n > 0 {
            if n & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            n >>= 1;
        }
        acc
    }

    /// Inverse of a unit; None when the element lies in the maximal ideal.
    pub fn inv(&self) -> Option<Self> {
        let r = &self.ring;
        let c0 = self.coeffs[0];
        if c0 % r.p as u64 == 0 {
            return None;
        }
        let m = BigInt::from(r.modulus);
        let g = BigInt::from(c0).extended_gcd(&m);
        let mut x = Self::from_bigint(self.ring, &g.x);
        let two = Self::from_u64(self.ring, 2);
        // Each step doubles the number of correct π_D-digits.
        for _ in 0..64 {
            let next = &x * &(&two - &(self * &x));
            if next == x {
                return Some(x);
            }
            x = next;
        }
        Some(x)
    }

    /// min_i (i/(D(p−1)) + v_p(c_i)), or AtLeast(N) if zero mod p^N.
    pub fn valuation(&self) -> Valuation {
        let r = &self.ring;
        let best = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(i, &c)| {
                let mut v = 0usize;
                let mut c = c;
                while c % r.p as u64 == 0 {
                    c /= r.p as u64;
                    v += 1;
                }
                i + r.e * v
            })
            .min();
        match best {
            Some(num) => Valuation::Exact(Rational::new(BigInt::from(num), BigInt::from(r.e))),
            None => Valuation::AtLeast(r.n),
        }
    }

    /// Exact valuation, if known.
    pub fn exact_valuation(&self) -> Option<Rational> {
        match self.valuation() {
            Valuation::Exact(v) => Some(v),
            Valuation::AtLeast(_) => None,
        }
    }
}

impl std::ops::Add for &PadicRamified {
    type Output = PadicRamified;
    fn add(self, o: &PadicRamified) -> PadicRamified {
        assert_eq!(self.ring, o.ring, "ring mismatch");
        let r = &self.ring;
        PadicRamified {
            ring: self.ring,
            coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(&a, &b)| r.addmod(a, b)).collect(),
        }
    }
}

impl std::ops::Sub for &PadicRamified {
    type Output = PadicRamified;
    fn sub(self, o: &PadicRamified) -> PadicRamified {
        self + &(-o)
    }
}

impl std::ops::Neg for &PadicRamified {
    type Output = PadicRamified;
    fn neg(self) -> PadicRamified {
        let r = &self.ring;
        PadicRamified {
            ring: self.ring,
            coeffs: self.coeffs.iter().map(|&a| r.negmod(a)).collect(),
        }
    }
}

impl std::ops::Mul for &PadicRamified {
    type Output = PadicRamified;
    fn mul(self, o: &PadicRamified) -> PadicRamified {
        assert_eq!(self.ring, o.ring, "ring mismatch");
        let mut out = PadicRamified::zero(self.ring);
        self.ring.mul_acc(&mut out.coeffs, &self.coeffs, &o.coeffs);
        out
    }
}

/// Teichmüller lift of c ∈ F_p: the fixed point of x ↦ x^p.
pub fn teichmuller(ring: PadicRing, c: u32) -> PadicRamified {
    let mut x = PadicRamified::from_u64(ring, (c % ring.p) as u64);
    loop {
        let next = x.pow(ring.p as u64);
        if next == x {
            return x;
        }
        x = next;
    }
}

/// First `m` coefficients of E(x) = exp(Σ_i x^{p^i}/p^i), from
/// n·a_n = Σ_{p^i ≤ n} a_{n−p^i}.
pub fn artin_hasse_coeffs(p: u32, m: usize) -> Result<Vec<Rational>, DworkError> {
    let mut a: Vec<Rational> = Vec::with_capacity(m);
    let pb = BigInt::from(p);
    for n in 0..m {
        if n == 0 {
            a.push(Rational::one());
            continue;
        }
        let mut acc = Rational::zero();
        let mut pi = 1usize;
        while pi <= n {
            acc += &a[n - pi];
            pi *= p as usize;
        }
        let c = acc / Rational::from_integer(BigInt::from(n));
        if c.denom().is_multiple_of(&pb) {
            return Err(DworkError::IntegralityFailure(n));
        }
        a.push(c);
    }
    Ok(a)
}

fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// ζ_p = exp(π − π^p) = Σ λ_n in Z_p[π]/(p^N), D = 1.
pub fn dwork_zeta(ring: PadicRing) -> Result<PadicRamified, DworkError> {
    if ring.d != 1 {
        return Err(DworkError::BadRing("ζ_p is computed in the D = 1 ring".into()));
    }
    let p = ring.p as usize;
    let pm1 = p - 1;
    // λ_n = Σ_j (−1)^j π^{n−(p−1)j} / ((n−pj)! j!), and ord λ_n ≥ n(p−1)/p².
    let terms = (ring.n as usize * p * p).div_ceil(pm1) + p;
    let mut by_power: Vec<Rational> = vec![Rational::zero(); pm1];
    for n in 0..=terms {
        for j in 0..=n / p {
            let ex = n - pm1 * j;
            let (q, r) = (ex / pm1, ex % pm1);
            // π^ex = (−p)^q π^r
            let mut num = BigInt::from(p).pow(q as u32);
            if (q + j) % 2 == 1 {
                num = -num;
            }
            let den = factorial(n - p * j) * factorial(j);
            by_power[r] += Rational::new(num, den);
        }
    }
    let mut z = PadicRamified::zero(ring);
    let pi = PadicRamified::pi(ring);
    let mut pw = PadicRamified::one(ring);
    for c in &by_power {
        let c = PadicRamified::from_rational(ring, c).ok_or(DworkError::IntegralityFailure(0))?;
        z = &z + &(&c * &pw);
        pw = &pw * &pi;
    }
    Ok(z)
}

/// Number of Artin–Hasse terms that survive modulo p^N: a_n x^n with
/// v(x) ≥ 1/(p−1) vanishes once n ≥ N(p−1).
fn ah_terms(ring: PadicRing) -> usize {
    ring.n as usize * (ring.p as usize - 1)
}

fn ah_residues(ring: PadicRing) -> Result<Vec<PadicRamified>, DworkError> {
    artin_hasse_coeffs(ring.p, ah_terms(ring) + 1)?
        .iter()
        .enumerate()
        .map(|(i, c)| PadicRamified::from_rational(ring, c).ok_or(DworkError::IntegralityFailure(i)))
        .collect()
}

fn eval_series(coeffs: &[PadicRamified], x: &PadicRamified) -> PadicRamified {
    coeffs
        .iter()
        .rev()
        .fold(PadicRamified::zero(x.ring), |acc, c| &(&acc * x) + c)
}

/// γ with E(γ) = ζ_p and v(γ) = 1/(p−1), by Newton iteration from π.
pub fn solve_gamma(p: u32, n: u32) -> Result<PadicRamified, DworkError> {
    let ring = PadicRing::new(p, 1, n)?;
    let zeta = dwork_zeta(ring)?;
    let one = PadicRamified::one(ring);
    if zeta.pow(p as u64) != one || zeta == one {
        return Err(DworkError::NoConvergence(n));
    }
    let e = ah_residues(ring)?;
    let de: Vec<PadicRamified> = e
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c.scale_i64(i as i64))
        .collect();
    let mut g = PadicRamified::pi(ring);
    for _ in 0..64 {
        let f = &eval_series(&e, &g) - &zeta;
        if f.is_zero() {
            let expected = Rational::new(BigInt::one(), BigInt::from(p - 1));
            let ok = g.exact_valuation() == Some(expected);
            return if ok { Ok(g) } else { Err(DworkError::NoConvergence(n)) };
        }
        let deriv = eval_series(&de, &g).inv().ok_or(DworkError::NoConvergence(n))?;
        g = &g - &(&f * &deriv);
    }
    Err(DworkError::NoConvergence(n))
}

/// A Laurent polynomial with coefficients in Z_p[π_D]/(p^N).
#[derive(Debug, Clone, PartialEq)]
pub struct PadicLaurent {
    ring: PadicRing,
    low: i64,
    coeffs: Vec<PadicRamified>,
}

impl PadicLaurent {
    pub fn one(ring: PadicRing) -> Self {
        PadicLaurent {
            ring,
            low: 0,
            coeffs: vec![PadicRamified::one(ring)],
        }
    }

    pub fn low(&self) -> i64 {
        self.low
    }

    pub fn high(&self) -> i64 {
        self.low + self.coeffs.len() as i64 - 1
    }

    pub fn coeff(&self, k: i64) -> PadicRamified {
        let i = k - self.low;
        if i < 0 || i >= self.coeffs.len() as i64 {
            PadicRamified::zero(self.ring)
        } else {
            self.coeffs[i as usize].clone()
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut out = vec![PadicRamified::zero(self.ring); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                self.ring.mul_acc(&mut out[i + j].coeffs, &a.coeffs, &b.coeffs);
            }
        }
        PadicLaurent {
            ring: self.ring,
            low: self.low + o.low,
            coeffs: out,
        }
    }

    /// Drops exponents outside [−bound, bound].
    pub fn truncate(&self, bound: i64) -> Self {
        let lo = self.low.max(-bound);
        let hi = self.high().min(bound);
        if lo > hi {
            return PadicLaurent {
                ring: self.ring,
                low: 0,
                coeffs: vec![PadicRamified::zero(self.ring)],
            };
        }
        PadicLaurent {
            ring: self.ring,
            low: lo,
            coeffs: (lo..=hi).map(|k| self.coeff(k)).collect(),
        }
    }
}

/// Base of the oracle: A¹ (pole at ∞ only) or G_m.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Base {
    AffineLine,
    Torus,
}

/// A Laurent polynomial Σ c_j x^j over F_p, stored as (j, c_j).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LaurentFp {
    pub p: u32,
    pub terms: BTreeMap<i64, u32>,
}

impl LaurentFp {
    pub fn new(p: u32, terms: &[(i64, u32)]) -> Self {
        let mut map = BTreeMap::new();
        for &(e, c) in terms {
            let v = map.entry(e).or_insert(0u32);
            *v = (*v + c) % p;
        }
        map.retain(|_, c| *c != 0);
        LaurentFp { p, terms: map }
    }

    /// (pole order at 0, pole order at ∞).
    pub fn pole_orders(&self) -> (u64, u64) {
        let lo = self.terms.keys().next().copied().unwrap_or(0);
        let hi = self.terms.keys().last().copied().unwrap_or(0);
        ((-lo).max(0) as u64, hi.max(0) as u64)
    }
}

/// E_f = Π_j E(γ·[f_j]·t^j), exact modulo p^N, truncated to |k| ≤ t_trunc.
/// Asserts v(e_k) ≥ |k|/(d(p−1)) with d the pole order on that side.
pub fn splitting_function(
    f: &LaurentFp,
    gamma: &PadicRamified,
    t_trunc: i64,
) -> Result<PadicLaurent, DworkError> {
    let ring = gamma.ring;
    let p = ring.p;
    let (d0, dinf) = f.pole_orders();
    for d in [d0, dinf] {
        if d != 0 && d % p as u64 == 0 {
            return Err(DworkError::BadConductor { order: d, p });
        }
    }
    let ah = ah_residues(ring)?;
    let mut out = PadicLaurent::one(ring);
    for (&j, &c) in &f.terms {
        let x = gamma * &teichmuller(ring, c);
        let mut powx = PadicRamified::one(ring);
        let mut series: Vec<PadicRamified> = Vec::with_capacity(ah.len());
        for a in &ah {
            series.push(a * &powx);
            powx = &powx * &x;
        }
        let factor = if j == 0 {
            PadicLaurent {
                ring,
                low: 0,
                coeffs: vec![eval_series(&ah, &x)],
            }
        } else {
            let step = j.unsigned_abs() as usize;
            let len = (series.len() - 1) * step + 1;
            let mut coeffs = vec![PadicRamified::zero(ring); len];
            for (n, s) in series.into_iter().enumerate() {
                coeffs[n * step] = s;
            }
            if j < 0 {
                coeffs.reverse();
                PadicLaurent {
                    ring,
                    low: -(len as i64 - 1),
                    coeffs,
                }
            } else {
                PadicLaurent { ring, low: 0, coeffs }
            }
        };
        out = out.mul(&factor);
    }
    let out = out.truncate(t_trunc);
    for k in out.low()..=out.high() {
        let d = if k < 0 { d0 } else { dinf };
        if k == 0 || d == 0 {
            continue;
        }
        if let Some(v) = out.coeff(k).exact_valuation() {
            let bound = Rational::new(BigInt::from(k.abs()), BigInt::from(d * (p as u64 - 1)));
            if v < bound {
                return Err(DworkError::OracleMismatch(format!(
                    "splitting coefficient t^{k} has valuation {v} below the growth bound {bound}"
                )));
            }
        }
    }
    Ok(out)
}

/// Matrix of U_p ∘ E_f on the monomials t^n, n in `basis`:
/// entry (m, n) is the t^{pm−n} coefficient of E_f.
#[derive(Debug, Clone)]
pub struct UpMatrix {
    ring: PadicRing,
    basis: Vec<i64>,
    entries: Vec<PadicRamified>,
}

impl UpMatrix {
    pub fn basis(&self) -> &[i64] {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn entry(&self, row: usize, col: usize) -> &PadicRamified {
        &self.entries[row * self.basis.len() + col]
    }
}

/// `t_trunc` is the exponent range E_f was computed on; it must cover
/// |pm − n| for every basis pair.
pub fn up_matrix(
    ef: &PadicLaurent,
    basis: &[i64],
    t_trunc: i64,
) -> Result<UpMatrix, DworkError> {
    let p = ef.ring.p as i64;
    let need = basis
        .iter()
        .flat_map(|&m| basis.iter().map(move |&n| (p * m - n).abs()))
        .max()
        .unwrap_or(0);
    if need > t_trunc {
        return Err(DworkError::TruncationTooSmall { need, have: t_trunc });
    }
    let dim = basis.len();
    let cols: Vec<Vec<PadicRamified>> = basis
        .par_iter()
        .map(|&n| basis.iter().map(|&m| ef.coeff(p * m - n)).collect())
        .collect();
    let mut entries = vec![PadicRamified::zero(ef.ring); dim * dim];
    for (c, col) in cols.into_iter().enumerate() {
        for (r, v) in col.into_iter().enumerate() {
            entries[r * dim + c] = v;
        }
    }
    Ok(UpMatrix {
        ring: ef.ring,
        basis: basis.to_vec(),
        entries,
    })
}

/// Coefficients c_0..c_n of det(1 − sM), by Berkowitz's division-free
/// algorithm (exact modulo p^N).
pub fn fredholm_coefficients(mat: &UpMatrix) -> Vec<PadicRamified> {
    let ring = mat.ring;
    let e = ring.e;
    let n = mat.dim();
    let a = |r: usize, c: usize| &mat.entries[r * n + c].coeffs[..];
    let neg = |v: &mut [u64]| v.iter_mut().for_each(|x| *x = ring.negmod(*x));

    let mut vect: Vec<u64> = vec![0; e];
    vect[0] = 1;
    for r in 0..n {
        // Toeplitz column: 1, −a_rr, −R·C, −R·A·C, …, −R·A^{r−1}·C.
        let mut t = vec![0u64; (r + 2) * e];
        t[0] = 1;
        t[e..2 * e].copy_from_slice(a(r, r));
        neg(&mut t[e..2 * e]);
        let mut v: Vec<u64> = (0..r).flat_map(|i| a(i, r).to_vec()).collect();
        for k in 0..r {
            let slot = &mut t[(k + 2) * e..(k + 3) * e];
            for j in 0..r {
                ring.mul_acc(slot, a(r, j), &v[j * e..(j + 1) * e]);
            }
            neg(slot);
            if k + 1 < r {
                let mut w = vec![0u64; r * e];
                for i in 0..r {
                    let out = &mut w[i * e..(i + 1) * e];
                    for j in 0..r {
                        ring.mul_acc(out, a(i, j), &v[j * e..(j + 1) * e]);
                    }
                }
                v = w;
            }
        }
        let mut next = vec![0u64; (r + 2) * e];
        for i in 0..r + 2 {
            let out = &mut next[i * e..(i + 1) * e];
            for j in 0..=i.min(r) {
                ring.mul_acc(out, &t[(i - j) * e..(i - j + 1) * e], &vect[j * e..(j + 1) * e]);
            }
        }
        vect = next;
    }
    vect.chunks(e)
        .map(|c| PadicRamified {
            ring,
            coeffs: c.to_vec(),
        })
        .collect()
}

/// a priori lower bounds for v(c_k): entry (m, n) has valuation at least
/// |pm − n|/(d(p−1)), and Σ_m |pm − σ(m)| ≥ (p−1)Σ_m |m| for any
/// permutation σ, so every k×k principal minor has valuation at least the
/// sum of the k smallest |m| in the basis, divided by d.
pub fn coefficient_floor(basis: &[i64], d: u64) -> Vec<Rational> {
    let mut abs: Vec<i64> = basis.iter().map(|m| m.abs()).collect();
    abs.sort_unstable();
    let mut out = vec![Rational::zero()];
    let mut acc = 0i64;
    for a in abs {
        acc += a;
        out.push(Rational::new(BigInt::from(acc), BigInt::from(d.max(1))));
    }
    out
}

/// Lower hull of the known coefficient valuations. A coefficient that
/// vanishes modulo p^N is only known to have valuation at least
/// max(N, floor); the returned limit is the slope of the first hull
/// segment ending on such a point once it is placed there (None if none).
pub fn fredholm_hull(
    coeffs: &[PadicRamified],
    floor: &[Rational],
) -> Result<(NewtonPolygon, Option<Rational>), DworkError> {
    let n = coeffs.first().map_or(1, |c| c.ring.n);
    let cap = Rational::from_integer(BigInt::from(n));
    let mut flagged = Vec::new();
    let mut known = Vec::new();
    let mut bounded = Vec::new();
    for (i, c) in coeffs.iter().enumerate() {
        let lower = floor.get(i).cloned().unwrap_or_else(Rational::zero);
        match c.valuation() {
            Valuation::Exact(v) => {
                if v < lower {
                    return Err(DworkError::OracleMismatch(format!(
                        "coefficient {i} has valuation {v} below the a priori bound {lower}"
                    )));
                }
                known.push((i as i64, Some(v.clone())));
                bounded.push((i as i64, Some(v)));
            }
            Valuation::AtLeast(_) => {
                flagged.push(i);
                known.push((i as i64, None));
                bounded.push((i as i64, Some(if lower > cap { lower } else { cap.clone() })));
            }
        }
    }
    let poly = NewtonPolygon::lower_hull(&known).map_err(LfunError::from)?;
    let with_bounds = NewtonPolygon::lower_hull(&bounded).map_err(LfunError::from)?;
    let mut limit = None;
    let mut prev = (0usize, Rational::zero());
    for (x, y) in with_bounds.vertices().into_iter().skip(1) {
        if flagged.contains(&x) {
            let slope = (&y - &prev.1) / Rational::from_integer(BigInt::from(x - prev.0));
            limit = Some(slope);
            break;
        }
        prev = (x, y);
    }
    Ok((poly, limit))
}

/// Parameters of one oracle run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct OracleParams {
    /// p-adic precision N (digits).
    pub precision: u32,
    /// Basis half-width N_basis.
    pub basis: i64,
    /// Ramification index D of the coefficient ring.
    pub ring_d: u32,
    pub t_trunc: i64,
}

impl OracleParams {
    /// N = 12 and N_basis = 12·lcm(d₀, d∞).
    pub fn defaults(f: &LaurentFp) -> Self {
        let (d0, dinf) = f.pole_orders();
        let l = d0.max(1).lcm(&dinf.max(1)) as i64;
        let basis = 12 * l;
        OracleParams {
            precision: 12,
            basis,
            ring_d: 1,
            t_trunc: (f.p as i64 + 1) * basis,
        }
    }

    /// Doubles N (capped at the 63-bit limit) and N_basis.
    pub fn doubled(&self, p: u32) -> Self {
        let basis = self.basis * 2;
        OracleParams {
            precision: (self.precision * 2).min(PadicRing::max_precision(p)),
            basis,
            ring_d: self.ring_d,
            t_trunc: (p as i64 + 1) * basis,
        }
    }

    fn with_basis(&self, basis: i64, p: u32) -> Self {
        OracleParams {
            basis,
            t_trunc: (p as i64 + 1) * basis,
            ..*self
        }
    }
}

fn basis_range(base: Base, width: i64) -> Vec<i64> {
    match base {
        Base::AffineLine => (1..=width).collect(),
        Base::Torus => (-width..=width).collect(),
    }
}

/// Truncated Fredholm polygon at one parameter set.
#[derive(Debug, Clone)]
pub struct FredholmRun {
    pub params: OracleParams,
    pub polygon: NewtonPolygon,
    pub precision_limit: Option<Rational>,
}

pub fn fredholm_run(
    f: &LaurentFp,
    base: Base,
    params: OracleParams,
) -> Result<FredholmRun, DworkError> {
    if base == Base::AffineLine && f.pole_orders().0 > 0 {
        return Err(DworkError::OutOfScope("A¹ needs f regular at 0".into()));
    }
    let gamma = solve_gamma(f.p, params.precision)?;
    let ef = splitting_function(f, &gamma, params.t_trunc)?;
    let basis = basis_range(base, params.basis);
    let mat = up_matrix(&ef, &basis, params.t_trunc)?;
    let coeffs = fredholm_coefficients(&mat);
    let (d0, dinf) = f.pole_orders();
    let floor = coefficient_floor(&basis, d0.max(dinf));
    let (polygon, precision_limit) = fredholm_hull(&coeffs, &floor)?;
    Ok(FredholmRun {
        params,
        polygon,
        precision_limit,
    })
}

fn min_opt(a: Option<Rational>, b: Option<Rational>) -> Option<Rational> {
    match (a, b) {
        (Some(x), Some(y)) => Some(if x < y { x } else { y }),
        (x, None) => x,
        (None, y) => y,
    }
}

/// Slope of the first disagreement between two sorted slope lists. When
/// one list is a prefix of the other, the first extra slope; when equal,
/// the last slope (None for two empty lists).
fn first_disagreement(a: &[Rational], b: &[Rational]) -> Option<Rational> {
    let common = a.iter().zip(b).take_while(|(x, y)| x == y).count();
    match (a.get(common), b.get(common)) {
        (Some(x), Some(y)) => Some(if x < y { x.clone() } else { y.clone() }),
        (Some(x), None) | (None, Some(x)) => Some(x.clone()),
        (None, None) => a.last().cloned(),
    }
}

/// Fredholm polygon with a validity threshold: slopes strictly below it
/// are unaffected by halving the basis and by precision loss.
#[derive(Debug, Clone)]
pub struct FredholmResult {
    pub params: OracleParams,
    pub polygon: NewtonPolygon,
    /// None means no limit was detected.
    pub validity: Option<Rational>,
    pub retries: u32,
}

impl FredholmResult {
    pub fn certified_slopes(&self, cut: &Rational) -> Vec<Rational> {
        let bound = match &self.validity {
            Some(v) if v < cut => v.clone(),
            _ => cut.clone(),
        };
        self.polygon.slopes().iter().filter(|s| *s < &bound).cloned().collect()
    }
}

pub fn fredholm_np_at(
    f: &LaurentFp,
    base: Base,
    params: OracleParams,
) -> Result<FredholmResult, DworkError> {
    let full = fredholm_run(f, base, params)?;
    let half = fredholm_run(f, base, params.with_basis((params.basis / 2).max(1), f.p))?;
    let basis_limit = first_disagreement(full.polygon.slopes(), half.polygon.slopes());
    let validity = min_opt(
        min_opt(full.precision_limit.clone(), half.precision_limit.clone()),
        basis_limit,
    );
    Ok(FredholmResult {
        params,
        polygon: full.polygon,
        validity,
        retries: 0,
    })
}

/// Fredholm polygon certified at least up to `cut`, doubling N and
/// N_basis up to twice when needed.
pub fn fredholm_np(
    f: &LaurentFp,
    base: Base,
    params: OracleParams,
    cut: &Rational,
) -> Result<FredholmResult, DworkError> {
    let mut params = params;
    let mut last = None;
    for retries in 0..=2 {
        let mut r = fredholm_np_at(f, base, params)?;
        r.retries = retries;
        if r.validity.as_ref().is_none_or(|v| v >= cut) {
            return Ok(r);
        }
        last = r.validity;
        params = params.doubled(f.p);
    }
    Err(DworkError::ValidityTooLow {
        cut: crate::cyc::rational_string(cut),
        threshold: last.map_or("none".into(), |v| crate::cyc::rational_string(&v)),
    })
}

/// Reads a case over F_p with base A¹ or G_m and a Laurent-polynomial f.
pub fn laurent_from_case(case: &Case) -> Result<(LaurentFp, Base), DworkError> {
    let tower = case.tower();
    let scope = |m: &str| DworkError::OutOfScope(m.to_string());
    if tower.a() != 1 {
        return Err(scope("the oracle needs q = p"));
    }
    if !matches!(case.model(), CurveModel::P1) {
        return Err(scope("the oracle needs X = P¹"));
    }
    let mut zero = false;
    let mut inf = false;
    for place in case.boundary() {
        match place {
            Place::Infinite { .. } => inf = true,
            Place::Finite { x, .. } if x.is_zero() => zero = true,
            _ => return Err(scope("boundary must be {∞} or {0, ∞}")),
        }
    }
    if !inf {
        return Err(scope("boundary must contain ∞"));
    }
    let base = if zero { Base::Torus } else { Base::AffineLine };
    let f = case.function();
    let den: Vec<(usize, u32)> = f
        .u_den
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(i, c)| (i, c.coeffs()[0]))
        .collect();
    if den.len() != 1 || f.v_num.iter().any(|c| !c.is_zero()) {
        return Err(scope("f must be a Laurent polynomial in x"));
    }
    let (shift, lead) = den[0];
    let p = tower.p();
    let lead_inv = (1..p).find(|&c| (c as u64 * lead as u64) % p as u64 == 1).expect("unit");
    let terms: Vec<(i64, u32)> = f
        .u_num
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(i, c)| (i as i64 - shift as i64, (c.coeffs()[0] as u64 * lead_inv as u64 % p as u64) as u32))
        .collect();
    Ok((LaurentFp::new(p, &terms), base))
}

/// Slopes from both sides and whether they agree.
#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub base: Base,
    /// Certified part of the Fredholm hull: [x, "y"] pairs.
    pub fredholm_vertices: Vec<(usize, String)>,
    /// "inf" when no limit was detected.
    pub validity_threshold: String,
    /// Vertices of NP_q(L(f,V,s)) up to its last slope below one.
    pub lfun_vertices: Vec<(usize, String)>,
    pub fredholm_slopes_below_one: Vec<String>,
    pub lfun_slopes_below_one: Vec<String>,
    /// Fredholm slopes below min(2, threshold) against those of
    /// Π_i L(p^i s) (with the extra Π(1 − p^{i+1}s) on A¹).
    pub below_two_ok: bool,
    /// Vertices below the threshold unchanged after doubling N and N_basis.
    pub stable: Option<bool>,
    #[serde(rename = "match")]
    pub matches: bool,
    pub parameters: OracleParams,
    pub retries: u32,
}

#[derive(Debug, Clone)]
pub struct OracleOptions {
    pub params: Option<OracleParams>,
    pub check_stability: bool,
    pub lfun: Options,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            params: None,
            check_stability: true,
            lfun: Options::default(),
        }
    }
}

fn vertices_json(np: &NewtonPolygon) -> Vec<(usize, String)> {
    np.vertices()
        .into_iter()
        .map(|(x, y)| (x, crate::cyc::rational_string(&y)))
        .collect()
}

fn strings(v: &[Rational]) -> Vec<String> {
    v.iter().map(crate::cyc::rational_string).collect()
}

/// Runs both sides. A disagreement is reported with `matches = false`;
/// callers treat that as a red alert.
pub fn oracle_compare(
    engine: &SumEngine,
    case: &Case,
    opts: &OracleOptions,
) -> Result<OracleReport, DworkError> {
    let (f, base) = laurent_from_case(case)?;
    let one = Rational::one();
    let two = Rational::from_integer(BigInt::from(2));

    let data = compute_l(engine, case, &opts.lfun)?;
    let np_l = newton_polygon_q(&data.l_f, 1)?;
    let l_slopes = np_l.slopes().to_vec();
    let l_below_one: Vec<Rational> = l_slopes.iter().filter(|s| *s < &one).cloned().collect();

    let params = opts.params.unwrap_or_else(|| OracleParams::defaults(&f));
    let fr = fredholm_np(&f, base, params, &one)?;
    let fred_below_one = fr.certified_slopes(&one);

    // Π_i L(p^i s): slopes of L, then 1 + slopes of L; on A¹ also 1, 2, ….
    let cut2 = match &fr.validity {
        Some(v) if v < &two => v.clone(),
        _ => two.clone(),
    };
    let mut expected: Vec<Rational> = l_slopes.clone();
    expected.extend(l_slopes.iter().map(|s| s + &one));
    if base == Base::AffineLine {
        expected.push(one.clone());
    }
    expected.retain(|s| s < &cut2);
    expected.sort();
    let below_two_ok = fr.certified_slopes(&cut2) == expected;

    let stable = if opts.check_stability {
        let doubled = fredholm_np_at(&f, base, fr.params.doubled(f.p))?;
        let bound = fr.validity.clone().unwrap_or_else(|| two.clone());
        let a: Vec<_> = fr.polygon.slopes().iter().filter(|s| *s < &bound).collect();
        let b: Vec<_> = doubled.polygon.slopes().iter().filter(|s| *s < &bound).collect();
        Some(a == b)
    } else {
        None
    };

    let certified = {
        let bound = fr.validity.clone();
        let slopes: Vec<Rational> = fr
            .polygon
            .slopes()
            .iter()
            .filter(|s| bound.as_ref().is_none_or(|b| *s < b))
            .cloned()
            .collect();
        NewtonPolygon::from_slopes(slopes).map_err(LfunError::from)?
    };
    let l_trunc = NewtonPolygon::from_slopes(l_below_one.clone()).map_err(LfunError::from)?;

    Ok(OracleReport {
        base,
        fredholm_vertices: vertices_json(&certified),
        validity_threshold: fr
            .validity
            .as_ref()
            .map_or("inf".into(), crate::cyc::rational_string),
        lfun_vertices: vertices_json(&l_trunc),
        fredholm_slopes_below_one: strings(&fred_below_one),
        lfun_slopes_below_one: strings(&l_below_one),
        below_two_ok,
        stable,
        matches: fred_below_one == l_below_one && below_two_ok && stable != Some(false),
        parameters: fr.params,
        retries: fr.retries,
    })
}
