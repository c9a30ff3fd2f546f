//! Truncated Laurent series over a finite field, Artin–Schreier reduction
//! and Swan conductors.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::ff::{FFElement, FfError, FieldTower};
use crate::CycRat;

/// Precision marker for exactly known Laurent polynomials.
pub const EXACT: i64 = i64::MAX / 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LocalError {
    #[error("precision exhausted: {0}")]
    PrecisionLoss(String),
    #[error("leading coefficient is not a square in the base field")]
    NotASquare,
    #[error("place is ramified (swan conductor {0}); no Frobenius value")]
    RamifiedPlace(u64),
    #[error("series leading exponent {0} is odd; no square root")]
    OddValuation(i64),
    #[error(transparent)]
    Field(#[from] FfError),
}

/// Σ_{n=low}^{prec-1} c_n t^n + O(t^prec).
#[derive(Clone)]
pub struct LaurentFq {
    tower: Arc<FieldTower>,
    low: i64,
    coeffs: Vec<FFElement>,
    prec: i64,
}

impl fmt::Debug for LaurentFq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms = Vec::new();
        for (i, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                terms.push(format!("{:?}t^{}", c.coeffs(), self.low + i as i64));
            }
        }
        write!(f, "[{}] + O(t^{})", terms.join(" + "), self.prec)
    }
}

impl LaurentFq {
    /// Coefficients for exponents low, low+1, ...; known up to `prec`.
    /// Coefficients past `prec` are dropped; missing ones are zero.
    pub fn new(tower: &Arc<FieldTower>, low: i64, coeffs: Vec<FFElement>, prec: i64) -> Self {
        let prec = if prec > EXACT / 2 { EXACT } else { prec };
        let low = low.min(prec);
        let mut coeffs = coeffs;
        coeffs.truncate((prec - low) as usize);
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        LaurentFq {
            tower: Arc::clone(tower),
            low,
            coeffs,
            prec,
        }
    }

    /// An exactly known Laurent polynomial.
    pub fn exact(tower: &Arc<FieldTower>, low: i64, coeffs: Vec<FFElement>) -> Self {
        Self::new(tower, low, coeffs, EXACT)
    }

    pub fn is_exact(&self) -> bool {
        self.prec > EXACT / 2
    }

    /// O(t^prec).
    pub fn zero(tower: &Arc<FieldTower>, prec: i64) -> Self {
        Self::new(tower, prec, Vec::new(), prec)
    }

    /// c·t^e + O(t^prec).
    pub fn monomial(c: FFElement, e: i64, prec: i64) -> Self {
        let tower = Arc::clone(c.tower());
        if e >= prec {
            return Self::zero(&tower, prec);
        }
        Self::new(&tower, e, vec![c], prec)
    }

    pub fn constant(c: FFElement, prec: i64) -> Self {
        Self::monomial(c, 0, prec)
    }

    /// A polynomial Σ c_i t^i known to precision `prec`.
    pub fn from_poly(tower: &Arc<FieldTower>, coeffs: &[FFElement], prec: i64) -> Self {
        Self::new(tower, 0, coeffs.to_vec(), prec)
    }

    pub fn tower(&self) -> &Arc<FieldTower> {
        &self.tower
    }

    pub fn prec(&self) -> i64 {
        self.prec
    }

    pub fn low(&self) -> i64 {
        self.low
    }

    /// Coefficient of t^e, or `None` past the precision.
    pub fn coeff(&self, e: i64) -> Option<FFElement> {
        if e >= self.prec {
            None
        } else if e < self.low {
            Some(self.tower.zero())
        } else {
            Some(
                self.coeffs
                    .get((e - self.low) as usize)
                    .cloned()
                    .unwrap_or_else(|| self.tower.zero()),
            )
        }
    }

    /// Exponent of the first nonzero known coefficient.
    pub fn valuation(&self) -> Option<i64> {
        self.coeffs
            .iter()
            .position(|c| !c.is_zero())
            .map(|i| self.low + i as i64)
    }

    /// One past the last stored coefficient.
    fn stored_end(&self) -> i64 {
        if self.coeffs.is_empty() {
            i64::MIN / 4
        } else {
            self.low + self.coeffs.len() as i64
        }
    }

    /// Valuation, or the precision when nothing nonzero is known.
    fn val_or_prec(&self) -> i64 {
        self.valuation().unwrap_or(self.prec)
    }

    fn check(&self, other: &Self) -> Result<(), LocalError> {
        if self.tower == other.tower {
            Ok(())
        } else {
            Err(FfError::TowerMismatch.into())
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, LocalError> {
        self.check(other)?;
        let prec = self.prec.min(other.prec);
        let low = self.low.min(other.low).min(prec);
        let end = prec.min(self.stored_end().max(other.stored_end()));
        let coeffs = (low..end)
            .map(|e| self.coeff(e).unwrap() + other.coeff(e).unwrap())
            .collect();
        Ok(Self::new(&self.tower, low, coeffs, prec))
    }

    pub fn neg(&self) -> Self {
        LaurentFq {
            tower: Arc::clone(&self.tower),
            low: self.low,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
            prec: self.prec,
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self, LocalError> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Result<Self, LocalError> {
        self.check(other)?;
        let (va, vb) = (self.val_or_prec(), other.val_or_prec());
        let prec = (va.saturating_add(other.prec))
            .min(vb.saturating_add(self.prec))
            .min(EXACT);
        let low = (va + vb).min(prec);
        let end = prec.min(self.stored_end() + other.stored_end());
        let mut coeffs = vec![self.tower.zero(); (end - low).max(0) as usize];
        for i in va..self.stored_end() {
            let a = self.coeff(i).unwrap();
            if a.is_zero() {
                continue;
            }
            for j in vb..other.stored_end() {
                let e = i + j;
                if e >= end {
                    break;
                }
                let b = other.coeff(j).unwrap();
                if !b.is_zero() {
                    let slot = (e - low) as usize;
                    coeffs[slot] = &coeffs[slot] + &(&a * &b);
                }
            }
        }
        Ok(Self::new(&self.tower, low, coeffs, prec))
    }

    pub fn scale(&self, c: &FFElement) -> Self {
        LaurentFq {
            tower: Arc::clone(&self.tower),
            low: self.low,
            coeffs: self.coeffs.iter().map(|x| x * c).collect(),
            prec: self.prec,
        }
    }

    /// Multiplication by t^e.
    pub fn shift(&self, e: i64) -> Self {
        LaurentFq {
            tower: Arc::clone(&self.tower),
            low: self.low + e,
            coeffs: self.coeffs.clone(),
            prec: if self.is_exact() { EXACT } else { self.prec + e },
        }
    }

    /// Drops everything from t^prec on.
    pub fn truncate(&self, prec: i64) -> Self {
        if prec >= self.prec {
            return self.clone();
        }
        Self::new(&self.tower, self.low, self.coeffs.clone(), prec)
    }

    /// (leading exponent v, unit coefficients u_0..u_{r-1}).
    fn unit_part(&self) -> Result<(i64, Vec<FFElement>), LocalError> {
        if self.is_exact() {
            return Err(LocalError::PrecisionLoss(
                "truncate an exact series before inverting or taking roots".to_string(),
            ));
        }
        let v = self.valuation().ok_or_else(|| {
            LocalError::PrecisionLoss(format!("no nonzero coefficient below t^{}", self.prec))
        })?;
        let r = (self.prec - v) as usize;
        let mut u: Vec<FFElement> = self.coeffs[(v - self.low) as usize..].to_vec();
        u.resize(r, self.tower.zero());
        Ok((v, u))
    }

    /// 1/x, keeping the relative precision.
    pub fn invert(&self) -> Result<Self, LocalError> {
        let (v, u) = self.unit_part()?;
        let inv0 = u[0].inv()?;
        let mut w: Vec<FFElement> = vec![inv0.clone()];
        for n in 1..u.len() {
            let mut acc = self.tower.zero();
            for i in 1..=n {
                acc = &acc + &(&u[i] * &w[n - i]);
            }
            w.push(-(&acc * &inv0));
        }
        let r = u.len() as i64;
        Ok(Self::new(&self.tower, -v, w, -v + r))
    }

    pub fn div(&self, other: &Self) -> Result<Self, LocalError> {
        self.mul(&other.invert()?)
    }

    /// x^n for n ≥ 0 (negative n inverts first).
    pub fn pow(&self, n: i64) -> Result<Self, LocalError> {
        let base = if n < 0 { self.invert()? } else { self.clone() };
        let mut e = n.unsigned_abs();
        let mut acc = Self::constant(self.tower.one(), EXACT);
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&sq)?;
            }
            e >>= 1;
            if e > 0 {
                sq = sq.mul(&sq)?;
            }
        }
        Ok(acc)
    }

    /// The square root whose leading coefficient is `root`, which must
    /// square to the leading coefficient of self.
    pub fn sqrt_with_root(&self, root: &FFElement) -> Result<Self, LocalError> {
        let (v, u) = self.unit_part()?;
        if v % 2 != 0 {
            return Err(LocalError::OddValuation(v));
        }
        if &(root * root) != &u[0] {
            return Err(LocalError::NotASquare);
        }
        let inv2s0 = (root + root).inv()?;
        let mut s: Vec<FFElement> = vec![root.clone()];
        for n in 1..u.len() {
            let mut acc = u[n].clone();
            for i in 1..n {
                acc = &acc - &(&s[i] * &s[n - i]);
            }
            s.push(&acc * &inv2s0);
        }
        let r = u.len() as i64;
        Ok(Self::new(&self.tower, v / 2, s, v / 2 + r))
    }

    /// A square root; `branch` 0 takes the canonical root of the leading
    /// coefficient, 1 its negative.
    pub fn sqrt(&self, branch: u32) -> Result<Self, LocalError> {
        let (_, u) = self.unit_part()?;
        let r0 = u[0].sqrt().ok_or(LocalError::NotASquare)?;
        let r0 = if branch == 0 { r0 } else { -r0 };
        self.sqrt_with_root(&r0)
    }

    /// Evaluates the polynomial Σ c_i X^i at this series.
    pub fn eval_poly(&self, coeffs: &[FFElement]) -> Result<Self, LocalError> {
        let mut acc = Self::zero(&self.tower, EXACT);
        for c in coeffs.iter().rev() {
            acc = acc.mul(self)?.add(&Self::constant(c.clone(), EXACT))?;
        }
        Ok(acc)
    }

    /// True when every known coefficient vanishes.
    pub fn is_zero_known(&self) -> bool {
        self.valuation().is_none()
    }
}

/// Result of normalizing y^p − y = g to a pole order prime to p.
#[derive(Debug, Clone)]
pub struct SwanReport {
    pub swan: u64,
    pub reduced: LaurentFq,
    /// Constant term of the reduced series when there is no pole.
    pub constant_term: Option<FFElement>,
}

/// Removes pole terms c·t^{-d} with p | d by subtracting h^p − h,
/// h = c^{1/p} t^{-d/p}, until the pole order is prime to p or gone.
pub fn artin_schreier_reduce(g: &LaurentFq) -> Result<SwanReport, LocalError> {
    let p = g.tower.p() as i64;
    let mut cur = g.clone();
    loop {
        let v = match cur.valuation() {
            Some(v) => v,
            None if cur.prec >= 1 => cur.prec,
            None => {
                return Err(LocalError::PrecisionLoss(format!(
                    "series known only below t^{}",
                    cur.prec
                )))
            }
        };
        if v >= 0 {
            let c = cur.coeff(0).ok_or_else(|| {
                LocalError::PrecisionLoss("constant term is not known".to_string())
            })?;
            return Ok(SwanReport {
                swan: 0,
                reduced: cur,
                constant_term: Some(c),
            });
        }
        let d = -v;
        if d % p != 0 {
            return Ok(SwanReport {
                swan: d as u64,
                reduced: cur,
                constant_term: None,
            });
        }
        let c = cur.coeff(v).expect("below precision");
        let h = LaurentFq::monomial(c.pth_root(), v / p, cur.prec);
        let hp = LaurentFq::monomial(c, v, cur.prec);
        cur = cur.sub(&hp.sub(&h)?)?;
    }
}

pub fn swan_conductor(g: &LaurentFq) -> Result<u64, LocalError> {
    Ok(artin_schreier_reduce(g)?.swan)
}

/// ρ(Frob) at an unramified F_q-rational place: ζ^{Tr(constant term)}.
pub fn unramified_frobenius_value(report: &SwanReport) -> Result<CycRat, LocalError> {
    match (&report.constant_term, report.swan) {
        (Some(c), 0) => Ok(CycRat::zeta_pow(c.tower().p(), c.absolute_trace() as i64)),
        _ => Err(LocalError::RamifiedPlace(report.swan)),
    }
}
