//! Exponential sums, L-polynomials, the Hodge bound and Artin–Schreier
//! cover zeta functions.
//!
//! L(f,V,s) = exp(Σ S_k s^k / k) is assembled from point sums by the Newton
//! recurrence. When the field F_{q^{D+slack}} is too large to enumerate, the
//! top half of L(ρ,s) is recovered from the bottom half with the functional
//! equation b_{D-n} = b_D·conj(b_n)/q^n, which holds because L(ρ,s) is pure
//! of weight 1.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::curve::{Case, CaseSummary, CurveError, CurveModel, Place};
use crate::ff::{build_tower, FfError, LogTable, DEFAULT_BUDGET, ZERO_LOG};
use crate::polygon::PolygonError;
use crate::{CycRat, NewtonPolygon, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LfunError {
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Field(#[from] FfError),
    #[error(transparent)]
    Polygon(#[from] PolygonError),
    #[error("coefficient b_{n} = {value} is not in Z[ζ_p]")]
    IntegralityFailure { n: usize, value: String },
    #[error("coefficient b_{n} is nonzero past the expected degree")]
    DegreeOverflow { n: usize },
    #[error("expected degree {expected}, observed {observed}")]
    DegreeMismatch { expected: usize, observed: usize },
    #[error("need {need} sums, have {have}")]
    NotEnoughSums { need: usize, have: usize },
    #[error("boundary factor does not divide: {0}")]
    NonDivisible(String),
    #[error("functional equation check failed: {0}")]
    FunctionalEquation(String),
    #[error("cover consistency check failed: {0}")]
    ConsistencyFailure(String),
}

impl LfunError {
    /// Errors that signal an internal contradiction rather than bad input.
    pub fn is_red_alert(&self) -> bool {
        matches!(
            self,
            LfunError::IntegralityFailure { .. }
                | LfunError::DegreeOverflow { .. }
                | LfunError::DegreeMismatch { .. }
                | LfunError::NonDivisible(_)
                | LfunError::FunctionalEquation(_)
                | LfunError::ConsistencyFailure(_)
        )
    }
}

/// A polynomial Σ b_n s^n with coefficients in Q(ζ_p).
#[derive(Clone, PartialEq)]
pub struct CycPoly {
    p: u32,
    coeffs: Vec<CycRat>,
}

impl std::fmt::Debug for CycPoly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_list().entries(self.coeffs.iter()).finish()
    }
}

impl CycPoly {
    pub fn new(p: u32, mut coeffs: Vec<CycRat>) -> Self {
        while coeffs.len() > 1 && coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(CycRat::zero(p));
        }
        CycPoly { p, coeffs }
    }

    pub fn one(p: u32) -> Self {
        CycPoly::new(p, vec![CycRat::one(p)])
    }

    /// 1 − u·s.
    pub fn linear(u: &CycRat) -> Self {
        CycPoly::new(u.p(), vec![CycRat::one(u.p()), -u])
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn coeffs(&self) -> &[CycRat] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, n: usize) -> CycRat {
        self.coeffs.get(n).cloned().unwrap_or_else(|| CycRat::zero(self.p))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = vec![CycRat::zero(self.p); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] = &out[i + j] + &(a * b);
            }
        }
        CycPoly::new(self.p, out)
    }

    /// Applies ζ ↦ ζ^j to every coefficient.
    pub fn conjugate(&self, j: i64) -> Self {
        CycPoly::new(
            self.p,
            self.coeffs
                .iter()
                .map(|c| c.conjugate(j).expect("unit conjugation index"))
                .collect(),
        )
    }

    pub fn is_integral(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_integral())
    }

    /// Rational-integer coefficients, if every coefficient is one.
    pub fn to_integers(&self) -> Option<Vec<BigInt>> {
        self.coeffs
            .iter()
            .map(|c| c.as_scalar().filter(|r| r.is_integer()).map(|r| r.to_integer()))
            .collect()
    }

    /// Quotient by Π (1 − u·s), asserting exact divisibility.
    pub fn strip_linear_factors(&self, values: &[CycRat]) -> Result<Self, LfunError> {
        let mut cur = self.coeffs.clone();
        for u in values {
            let n = cur.len() - 1;
            if n == 0 {
                return Err(LfunError::NonDivisible("degree exhausted".into()));
            }
            // P = (1 − u s)Q: q_0 = b_0, q_i = b_i + u q_{i-1}.
            let mut q = Vec::with_capacity(n);
            q.push(cur[0].clone());
            for i in 1..n {
                let next = &cur[i] + &(u * &q[i - 1]);
                q.push(next);
            }
            let rem = &cur[n] + &(u * &q[n - 1]);
            if !rem.is_zero() {
                return Err(LfunError::NonDivisible(format!("remainder {rem}")));
            }
            cur = q;
        }
        Ok(CycPoly::new(self.p, cur))
    }

    pub fn to_strings(&self) -> Vec<Vec<String>> {
        self.coeffs.iter().map(|c| c.to_strings()).collect()
    }
}

/// b_0..b_n of exp(Σ S_k s^k / k) from S_1..S_n.
pub fn exp_coefficients(sums: &[CycRat], n: usize) -> Result<Vec<CycRat>, LfunError> {
    if sums.len() < n {
        return Err(LfunError::NotEnoughSums { need: n, have: sums.len() });
    }
    let p = sums.first().map_or(3, |s| s.p());
    let mut b = vec![CycRat::one(p)];
    for m in 1..=n {
        let mut acc = CycRat::zero(p);
        for k in 1..=m {
            acc = &acc + &(&sums[k - 1] * &b[m - k]);
        }
        b.push(acc.scale(&Rational::new(BigInt::one(), BigInt::from(m))));
    }
    Ok(b)
}

/// Assembles a polynomial of degree D from D + slack sums, checking
/// integrality up to D and vanishing from D+1 to D+slack.
pub fn assemble_l(sums: &[CycRat], d: usize, slack: usize) -> Result<CycPoly, LfunError> {
    let n = d + slack;
    let b = exp_coefficients(sums, n)?;
    for (i, c) in b.iter().enumerate().take(d + 1) {
        if !c.is_integral() {
            return Err(LfunError::IntegralityFailure { n: i, value: c.to_string() });
        }
    }
    if let Some(i) = (d + 1..=n).find(|&i| !b[i].is_zero()) {
        return Err(LfunError::DegreeOverflow { n: i });
    }
    let poly = CycPoly::new(sums.first().map_or(3, |s| s.p()), b[..=d].to_vec());
    if poly.degree() != d {
        return Err(LfunError::DegreeMismatch { expected: d, observed: poly.degree() });
    }
    Ok(poly)
}

/// Completes L(ρ,s) of degree D from b_0..b_K (K ≥ ⌊D/2⌋ + 1) with the
/// functional equation, verifying every overlapping pair.
pub fn complete_by_functional_equation(
    low: &[CycRat],
    d: usize,
    q: u64,
) -> Result<CycPoly, LfunError> {
    let p = low[0].p();
    let k = low.len() - 1;
    if k >= d {
        let poly = CycPoly::new(p, low[..=d].to_vec());
        return Ok(poly);
    }
    if 2 * k < d + 1 {
        return Err(LfunError::NotEnoughSums { need: d / 2 + 1, have: k });
    }
    let conj = |x: &CycRat| x.complex_conjugate();
    let qpow = |n: usize| CycRat::from_scalar(p, Rational::from_integer(BigInt::from(q).pow(n as u32)));
    let n0 = (d - k..=k)
        .find(|&n| !low[n].is_zero())
        .ok_or_else(|| LfunError::FunctionalEquation("no usable overlap coefficient".into()))?;
    let inv = conj(&low[n0])
        .inv()
        .ok_or_else(|| LfunError::FunctionalEquation("zero pivot".into()))?;
    let top = &(&low[d - n0] * &qpow(n0)) * &inv;
    let mut full = low.to_vec();
    for n in k + 1..=d {
        let m = d - n;
        let val = &(&top * &conj(&low[m])) * &qpow(m).inv().expect("q^m ≠ 0");
        full.push(val);
    }
    for n in d - k..=k {
        let rhs = &(&top * &conj(&full[n])) * &qpow(n).inv().expect("q^n ≠ 0");
        if full[d - n] != rhs {
            return Err(LfunError::FunctionalEquation(format!(
                "b_{} disagrees with the reflection of b_{n}",
                d - n
            )));
        }
    }
    if &top * &conj(&top) != qpow(d) {
        return Err(LfunError::FunctionalEquation("|b_D|² ≠ q^D".into()));
    }
    for (i, c) in full.iter().enumerate() {
        if !c.is_integral() {
            return Err(LfunError::IntegralityFailure { n: i, value: c.to_string() });
        }
    }
    Ok(CycPoly::new(p, full))
}

/// Degrees of L(ρ,s) and L(f,V,s): 2(g−1+m) + Σ(d_i − 1), plus c.
pub fn l_poly_degree(summary: &CaseSummary) -> (usize, usize) {
    degree_formula(summary.genus, summary.m, &summary.swans(), summary.c)
}

pub fn degree_formula(g: u64, m: u64, swans: &[u64], c: u64) -> (usize, usize) {
    let rho = 2 * (g + m) as i64 - 2 + swans.iter().map(|&d| d as i64 - 1).sum::<i64>();
    let rho = rho.max(0) as usize;
    (rho, rho + c as usize)
}

/// Zeros ×(g+m+c−1), ones ×(g+m−1), and j/d_i for 1 ≤ j < d_i.
/// With c = 0 this is the bound for L(ρ,s).
pub fn hodge_polygon(g: u64, m: u64, swans: &[u64], c: u64) -> NewtonPolygon {
    let mut slopes = Vec::new();
    let zeros = (g + m + c).saturating_sub(1);
    let ones = (g + m).saturating_sub(1);
    slopes.extend((0..zeros).map(|_| Rational::zero()));
    slopes.extend((0..ones).map(|_| Rational::one()));
    for &d in swans {
        for j in 1..d {
            slopes.push(Rational::new(BigInt::from(j), BigInt::from(d)));
        }
    }
    NewtonPolygon::from_slopes(slopes).expect("nonnegative slopes")
}

/// q-adic Newton polygon: hull of (n, v_p(b_n)/a).
pub fn newton_polygon_q(l: &CycPoly, a: usize) -> Result<NewtonPolygon, LfunError> {
    let a = Rational::from_integer(BigInt::from(a));
    let points = l
        .coeffs()
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let v = c.p_adic_valuation().map_err(|_| LfunError::IntegralityFailure {
                n: i,
                value: c.to_string(),
            })?;
            Ok((i as i64, v.map(|v| v / &a)))
        })
        .collect::<Result<Vec<_>, LfunError>>()?;
    Ok(NewtonPolygon::lower_hull(&points)?)
}

/// q-adic Newton polygon of an integer polynomial.
pub fn newton_polygon_int(coeffs: &[BigInt], p: u32, a: usize) -> Result<NewtonPolygon, LfunError> {
    let pb = BigInt::from(p);
    let points: Vec<_> = coeffs
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let v = if c.is_zero() {
                None
            } else {
                let mut v = 0i64;
                let mut x = c.clone();
                while x.is_multiple_of(&pb) {
                    x /= &pb;
                    v += 1;
                }
                Some(Rational::new(BigInt::from(v), BigInt::from(a)))
            };
            (i as i64, v)
        })
        .collect();
    Ok(NewtonPolygon::lower_hull(&points)?)
}

/// Exponential-sum engine: Zech-log tables cached per (p, a, k), point
/// loops split across the rayon pool.
pub struct SumEngine {
    budget: u64,
    tables: Mutex<HashMap<(u32, usize, usize), Arc<LogTable>>>,
}

impl Default for SumEngine {
    fn default() -> Self {
        SumEngine::new(DEFAULT_BUDGET)
    }
}

/// Coefficient logs of f and h over one F_{q^k}.
struct Prepared {
    tab: Arc<LogTable>,
    un: Vec<u32>,
    ud: Vec<u32>,
    vn: Vec<u32>,
    vd: Vec<u32>,
    h: Option<Vec<u32>>,
    /// Boundary finite places as (x, y) logs; y = None on P¹.
    boundary: Vec<(u32, Option<u32>)>,
    /// Traces of f at the open infinite places.
    inf_traces: Vec<u32>,
}

impl SumEngine {
    pub fn new(budget: u64) -> Self {
        SumEngine {
            budget,
            tables: Mutex::new(HashMap::new()),
        }
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    /// Whether F_{q^k} fits the enumeration budget.
    pub fn affordable(&self, q: u64, k: usize) -> bool {
        (q as u128).checked_pow(k as u32).is_some_and(|n| n <= self.budget as u128)
    }

    fn table(&self, p: u32, a: usize, k: usize) -> Result<Arc<LogTable>, LfunError> {
        if let Some(t) = self.tables.lock().unwrap().get(&(p, a, k)) {
            return Ok(Arc::clone(t));
        }
        let tower = build_tower(p, a, k)?;
        let t = Arc::new(LogTable::build(&tower, self.budget)?);
        self.tables
            .lock()
            .unwrap()
            .insert((p, a, k), Arc::clone(&t));
        Ok(t)
    }

    fn prepare(&self, case: &Case, k: usize) -> Result<Prepared, LfunError> {
        let base = case.tower();
        let tab = self.table(base.p(), base.a(), k)?;
        let logs = |poly: &[crate::ff::FFElement]| -> Result<Vec<u32>, LfunError> {
            Ok(poly.iter().map(|c| tab.log_of(c)).collect::<Result<_, _>>()?)
        };
        let f = case.function();
        let h = match case.model() {
            CurveModel::P1 => None,
            CurveModel::Hyperelliptic { h } => Some(logs(h)?),
        };
        let mut boundary = Vec::new();
        for place in case.boundary() {
            if let Place::Finite { x, y } = place {
                let yl = y.as_ref().map(|y| tab.log_of(y)).transpose()?;
                boundary.push((tab.log_of(x)?, yl));
            }
        }
        let inf_traces = case
            .infinite_values()?
            .iter()
            .map(|c| Ok(tab.trace(tab.log_of(c)?)))
            .collect::<Result<_, LfunError>>()?;
        Ok(Prepared {
            un: logs(&f.u_num)?,
            ud: logs(&f.u_den)?,
            vn: logs(&f.v_num)?,
            vd: logs(&f.v_den)?,
            h,
            boundary,
            inf_traces,
            tab,
        })
    }

    /// #{P ∈ V(F_{q^k}) : Tr(f(P)) = c} for c = 0..p−1.
    pub fn trace_counts(&self, case: &Case, k: usize) -> Result<Vec<u64>, LfunError> {
        let pr = self.prepare(case, k)?;
        let p = case.tower().p() as usize;
        let tab = &pr.tab;
        let total = tab.order() as u64 + 1;
        let chunk = 1u64 << 14;
        let nchunks = total.div_ceil(chunk);
        let has_v = pr.vn.iter().any(|&c| c != ZERO_LOG);

        let value = |x: u32, y: u32| -> Result<u32, LfunError> {
            let d = tab.eval(&pr.ud, x);
            let inv = tab.inv(d).ok_or_else(|| pole(tab, x))?;
            let mut val = tab.mul(tab.eval(&pr.un, x), inv);
            if has_v {
                let vd = tab.eval(&pr.vd, x);
                let vinv = tab.inv(vd).ok_or_else(|| pole(tab, x))?;
                val = tab.add(val, tab.mul(tab.mul(tab.eval(&pr.vn, x), vinv), y));
            }
            Ok(val)
        };
        let is_boundary = |x: u32, y: Option<u32>| pr.boundary.iter().any(|&(bx, by)| bx == x && by == y);

        let mut counts = (0..nchunks)
            .into_par_iter()
            .map(|ci| -> Result<Vec<u64>, LfunError> {
                let mut local = vec![0u64; p];
                let end = ((ci + 1) * chunk).min(total);
                for idx in ci * chunk..end {
                    let x = if idx == total - 1 { ZERO_LOG } else { idx as u32 };
                    match &pr.h {
                        None => {
                            if is_boundary(x, None) {
                                continue;
                            }
                            local[tab.trace(value(x, ZERO_LOG)?) as usize] += 1;
                        }
                        Some(h) => {
                            let hx = tab.eval(h, x);
                            let Some(y) = tab.sqrt(hx) else { continue };
                            let ys = if y == ZERO_LOG { vec![y] } else { vec![y, tab.neg(y)] };
                            for y in ys {
                                if is_boundary(x, Some(y)) {
                                    continue;
                                }
                                local[tab.trace(value(x, y)?) as usize] += 1;
                            }
                        }
                    }
                }
                Ok(local)
            })
            .try_reduce(
                || vec![0u64; p],
                |a, b| Ok(a.iter().zip(&b).map(|(x, y)| x + y).collect()),
            )?;
        for &t in &pr.inf_traces {
            counts[t as usize] += 1;
        }
        Ok(counts)
    }

    /// S_k = Σ_{P ∈ V(F_{q^k})} ζ^{Tr f(P)}.
    pub fn exp_sum(&self, case: &Case, k: usize) -> Result<CycRat, LfunError> {
        let counts = self.trace_counts(case, k)?;
        Ok(sum_from_counts(case.tower().p(), &counts))
    }

    /// |X(F_{q^k})|.
    pub fn count_x(&self, case: &Case, k: usize) -> Result<u64, LfunError> {
        let base = case.tower();
        match case.model() {
            CurveModel::P1 => Ok(base.q().pow(k as u32) + 1),
            CurveModel::Hyperelliptic { h } => {
                let tab = self.table(base.p(), base.a(), k)?;
                let hl: Vec<u32> = h.iter().map(|c| tab.log_of(c)).collect::<Result<_, _>>()?;
                let total = tab.order() as u64 + 1;
                let n: u64 = (0..total)
                    .into_par_iter()
                    .map(|idx| {
                        let x = if idx == total - 1 { ZERO_LOG } else { idx as u32 };
                        let hx = tab.eval(&hl, x);
                        if hx == ZERO_LOG {
                            1
                        } else if tab.is_square(hx) {
                            2
                        } else {
                            0
                        }
                    })
                    .sum();
                let deg = h.len() - 1;
                let lead = tab.log_of(&h[deg])?;
                let inf = if deg % 2 == 1 {
                    1
                } else if tab.is_square(lead) {
                    2
                } else {
                    0
                };
                Ok(n + inf)
            }
        }
    }
}

fn pole(tab: &LogTable, x: u32) -> LfunError {
    CurveError::PoleOnV(format!("denominator vanishes at x = {:?}", tab.element(x).coeffs())).into()
}

/// Σ_c counts[c]·ζ^c.
pub fn sum_from_counts(p: u32, counts: &[u64]) -> CycRat {
    let full: Vec<Rational> = counts
        .iter()
        .map(|&n| Rational::from_integer(BigInt::from(n)))
        .collect();
    CycRat::new(p, full)
}

/// How L(ρ,s) was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Assembly {
    Direct,
    FunctionalEquation,
}

#[derive(Debug, Clone)]
pub struct Options {
    pub budget: u64,
    pub slack: usize,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            budget: DEFAULT_BUDGET,
            slack: 3,
        }
    }
}

/// Everything computed about one case's L-functions.
#[derive(Debug, Clone)]
pub struct LData {
    pub case: Case,
    /// True when the case was moved to F_{q²} because a place at ∞ needed
    /// a square root that does not exist over F_q.
    pub extended: bool,
    pub summary: CaseSummary,
    pub degree_rho: usize,
    pub degree_f: usize,
    pub l_f: CycPoly,
    pub l_rho: CycPoly,
    pub assembly: Assembly,
    /// Largest k for which S_k was computed.
    pub sums_used: usize,
}

/// Summary, with the automatic move to F_{q²} on NotASquare.
pub fn summarize(case: &Case) -> Result<(Case, CaseSummary, bool), LfunError> {
    match case.summary() {
        Ok(s) => Ok((case.clone(), s, false)),
        Err(e) if e.needs_quadratic_extension() => {
            let lifted = case.lift_quadratic()?;
            let s = lifted.summary()?;
            Ok((lifted, s, true))
        }
        Err(e) => Err(e.into()),
    }
}

pub fn compute_l(engine: &SumEngine, case: &Case, opts: &Options) -> Result<LData, LfunError> {
    let (case, summary, extended) = summarize(case)?;
    let (d_rho, d_f) = l_poly_degree(&summary);
    let q = case.tower().q();
    let units = summary.unramified_values();

    let direct_k = d_f + opts.slack;
    if engine.affordable(q, direct_k) {
        let sums = (1..=direct_k)
            .map(|k| engine.exp_sum(&case, k))
            .collect::<Result<Vec<_>, _>>()?;
        let l_f = assemble_l(&sums, d_f, opts.slack)?;
        let l_rho = l_f.strip_linear_factors(&units)?;
        return Ok(LData {
            case,
            extended,
            summary,
            degree_rho: d_rho,
            degree_f: d_f,
            l_f,
            l_rho,
            assembly: Assembly::Direct,
            sums_used: direct_k,
        });
    }

    let need = d_rho / 2 + 1;
    let mut k_max = need;
    while k_max < d_rho / 2 + 2 && engine.affordable(q, k_max + 1) {
        k_max += 1;
    }
    if !engine.affordable(q, need) {
        return Err(FfError::BudgetExceeded {
            size: (q as u128).saturating_pow(need as u32),
            budget: engine.budget(),
        }
        .into());
    }
    let sums = (1..=k_max)
        .map(|k| {
            let s = engine.exp_sum(&case, k)?;
            // S_k(ρ) = S_k(f,V) + Σ u^k over unramified boundary places.
            Ok(units
                .iter()
                .fold(s, |acc, u| &acc + &pow_cyc(u, k)))
        })
        .collect::<Result<Vec<_>, LfunError>>()?;
    let low = exp_coefficients(&sums, k_max)?;
    for (i, c) in low.iter().enumerate() {
        if !c.is_integral() {
            return Err(LfunError::IntegralityFailure { n: i, value: c.to_string() });
        }
    }
    let l_rho = complete_by_functional_equation(&low, d_rho, q)?;
    if l_rho.degree() != d_rho {
        return Err(LfunError::DegreeMismatch { expected: d_rho, observed: l_rho.degree() });
    }
    let l_f = units
        .iter()
        .fold(l_rho.clone(), |acc, u| acc.mul(&CycPoly::linear(u)));
    Ok(LData {
        case,
        extended,
        summary,
        degree_rho: d_rho,
        degree_f: d_f,
        l_f,
        l_rho,
        assembly: Assembly::FunctionalEquation,
        sums_used: k_max,
    })
}

fn pow_cyc(u: &CycRat, k: usize) -> CycRat {
    (0..k).fold(CycRat::one(u.p()), |acc, _| &acc * u)
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundaryReport {
    pub place: String,
    pub swan: u64,
    pub frobenius: Option<Vec<String>>,
}

/// End-to-end comparison of Newton and Hodge polygons for one case.
#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub p: u32,
    pub a: usize,
    pub q: u64,
    pub field_extended: bool,
    pub genus: u64,
    pub m: u64,
    pub c: u64,
    pub swans: Vec<u64>,
    pub boundary: Vec<BoundaryReport>,
    pub degree_rho: usize,
    pub degree_f: usize,
    pub assembly: Assembly,
    pub sums_used: usize,
    pub l_f: Vec<Vec<String>>,
    pub l_rho: Vec<Vec<String>>,
    pub newton_f: serde_json::Value,
    pub hodge_f: serde_json::Value,
    pub newton_rho: serde_json::Value,
    pub hodge_rho: serde_json::Value,
    pub lies_above: bool,
    pub lies_above_rho: bool,
    pub attained: bool,
    pub slope_zero_count: usize,
    pub slope_zero_expected: Option<u64>,
    pub vertex_denominator_ok: bool,
    pub endpoint_ok: bool,
    /// Names of failed consistency checks; empty on a clean run.
    pub alerts: Vec<String>,
    #[serde(skip)]
    pub polygons: Polygons,
}

/// The polygons behind a report, for programmatic use.
#[derive(Debug, Clone, Default)]
pub struct Polygons {
    pub newton_f: NewtonPolygon,
    pub hodge_f: NewtonPolygon,
    pub newton_rho: NewtonPolygon,
    pub hodge_rho: NewtonPolygon,
}

impl Default for NewtonPolygon {
    fn default() -> Self {
        NewtonPolygon::empty()
    }
}

pub fn verify_bound(
    engine: &SumEngine,
    case: &Case,
    opts: &Options,
) -> Result<(VerificationReport, LData), LfunError> {
    let data = compute_l(engine, case, opts)?;
    let report = report_for(&data)?;
    Ok((report, data))
}

pub fn report_for(data: &LData) -> Result<VerificationReport, LfunError> {
    let s = &data.summary;
    let tower = data.case.tower();
    let (p, a) = (tower.p(), tower.a());
    let swans = s.swans();
    let newton_f = newton_polygon_q(&data.l_f, a)?;
    let newton_rho = newton_polygon_q(&data.l_rho, a)?;
    let hodge_f = hodge_polygon(s.genus, s.m, &swans, s.c);
    let hodge_rho = hodge_polygon(s.genus, s.m, &swans, 0);

    let lies_above = newton_f.lies_above(&hodge_f);
    let lies_above_rho = newton_rho.lies_above(&hodge_rho);
    let den = a as u64 * (p as u64 - 1);
    let vertex_denominator_ok =
        newton_f.vertex_heights_in(den) && newton_rho.vertex_heights_in(den);
    let slope_zero_count = newton_rho.zero_slopes();
    let slope_zero_expected = matches!(data.case.model(), CurveModel::P1).then(|| s.m - 1);
    let endpoint_ok = newton_rho.len() == data.degree_rho
        && newton_rho.height() * Rational::from_integer(2.into())
            == Rational::from_integer(data.degree_rho.into());

    let mut alerts = Vec::new();
    if !lies_above {
        alerts.push("newton_below_hodge_f".to_string());
    }
    if !lies_above_rho {
        alerts.push("newton_below_hodge_rho".to_string());
    }
    if !vertex_denominator_ok {
        alerts.push("vertex_denominator".to_string());
    }
    if slope_zero_expected.is_some_and(|e| e as usize != slope_zero_count) {
        alerts.push("slope_zero_count".to_string());
    }
    if !endpoint_ok {
        alerts.push("endpoint_height".to_string());
    }

    Ok(VerificationReport {
        p,
        a,
        q: tower.q(),
        field_extended: data.extended,
        genus: s.genus,
        m: s.m,
        c: s.c,
        swans,
        boundary: s
            .boundary
            .iter()
            .map(|b| BoundaryReport {
                place: b.place.to_string(),
                swan: b.swan,
                frobenius: b.frobenius.as_ref().map(|f| f.to_strings()),
            })
            .collect(),
        degree_rho: data.degree_rho,
        degree_f: data.degree_f,
        assembly: data.assembly,
        sums_used: data.sums_used,
        l_f: data.l_f.to_strings(),
        l_rho: data.l_rho.to_strings(),
        newton_f: newton_f.to_json(),
        hodge_f: hodge_f.to_json(),
        newton_rho: newton_rho.to_json(),
        hodge_rho: hodge_rho.to_json(),
        lies_above,
        lies_above_rho,
        attained: newton_rho == hodge_rho,
        slope_zero_count,
        slope_zero_expected,
        vertex_denominator_ok,
        endpoint_ok,
        alerts,
        polygons: Polygons {
            newton_f,
            hodge_f,
            newton_rho,
            hodge_rho,
        },
    })
}

/// Zeta data of the Artin–Schreier cover C: y^p − y = f over X.
#[derive(Debug, Clone, Serialize)]
pub struct CoverReport {
    pub genus_c: u64,
    /// Numerator of Z(X,s).
    pub p_x: Vec<String>,
    /// Numerator of Z(C,s) = P_X · Π_j σ_j(L(ρ,s)).
    pub p_c: Vec<String>,
    pub functional_equation_ok: bool,
    /// (k, direct count of C(F_{q^k}), count predicted by P_C).
    pub counts: Vec<(usize, u64, String)>,
    pub counts_match: bool,
    pub corollary_holds: bool,
    pub newton_c: serde_json::Value,
    pub corollary_bound: serde_json::Value,
    #[serde(skip)]
    pub p_c_int: Vec<BigInt>,
    #[serde(skip)]
    pub p_x_int: Vec<BigInt>,
}

/// Numerator of Z(X,s) from |X(F_{q^k})|, k ≤ g, and a_{2g−i} = q^{g−i}a_i.
pub fn p_x(engine: &SumEngine, case: &Case) -> Result<Vec<BigInt>, LfunError> {
    let g = case.genus() as usize;
    let q = BigInt::from(case.tower().q());
    if g == 0 {
        return Ok(vec![BigInt::one()]);
    }
    let mut power_sums: Vec<BigInt> = Vec::new();
    for k in 1..=g {
        let n = BigInt::from(engine.count_x(case, k)?);
        power_sums.push(q.pow(k as u32) + 1 - n);
    }
    // Π(1 − ω s) = exp(−Σ s_k s^k / k).
    let mut a: Vec<Rational> = vec![Rational::one()];
    for n in 1..=g {
        let mut acc = Rational::zero();
        for k in 1..=n {
            acc += Rational::from_integer(power_sums[k - 1].clone()) * &a[n - k];
        }
        a.push(-acc / Rational::from_integer(BigInt::from(n)));
    }
    let mut out: Vec<BigInt> = a
        .iter()
        .map(|r| {
            if r.is_integer() {
                Ok(r.to_integer())
            } else {
                Err(LfunError::ConsistencyFailure(format!("P_X coefficient {r} not integral")))
            }
        })
        .collect::<Result<_, _>>()?;
    for i in (0..g).rev() {
        let v = q.pow((g - i) as u32) * &out[i];
        out.push(v);
    }
    Ok(out)
}

/// Power sums Σ ω^k (k = 1..n) of the reciprocal roots of 1 + c_1 s + ⋯.
pub fn power_sums(coeffs: &[BigInt], n: usize) -> Vec<BigInt> {
    let c = |i: usize| coeffs.get(i).cloned().unwrap_or_default();
    let mut ps: Vec<BigInt> = Vec::new();
    for k in 1..=n {
        let mut v = -BigInt::from(k) * c(k);
        for i in 1..k {
            v -= c(i) * &ps[k - i - 1];
        }
        ps.push(v);
    }
    ps
}

pub fn as_cover_zeta(engine: &SumEngine, data: &LData) -> Result<CoverReport, LfunError> {
    let case = &data.case;
    let tower = case.tower();
    let (p, a, q) = (tower.p(), tower.a(), tower.q());
    let g = case.genus();
    let px = p_x(engine, case)?;

    let mut prod = CycPoly::new(p, px.iter().map(|c| CycRat::from_scalar(p, Rational::from_integer(c.clone()))).collect());
    for j in 1..p as i64 {
        prod = prod.mul(&data.l_rho.conjugate(j));
    }
    let pc = prod
        .to_integers()
        .ok_or_else(|| LfunError::ConsistencyFailure("P_C has non-integer coefficients".into()))?;
    let deg_c = pc.len() - 1;
    let expected_deg = 2 * g as usize + (p as usize - 1) * data.degree_rho;
    if deg_c != expected_deg || deg_c % 2 != 0 {
        return Err(LfunError::ConsistencyFailure(format!(
            "deg P_C = {deg_c}, expected {expected_deg}"
        )));
    }
    let genus_c = (deg_c / 2) as u64;
    let qb = BigInt::from(q);
    let functional_equation_ok = (0..=deg_c).all(|i| {
        let j = deg_c - i;
        if i > j {
            return true;
        }
        pc[j] == qb.pow((genus_c as usize - i) as u32) * &pc[i]
    });

    // Direct counts: p points over each x ∈ V with Tr f(x) = 0, one over each
    // ramified place, p over an unramified place when Tr(k·c) = 0.
    let kmax = (genus_c as usize).clamp(2, 4);
    let ps = power_sums(&pc, kmax);
    let mut counts = Vec::new();
    let mut counts_match = true;
    for k in 1..=kmax {
        if !engine.affordable(q, k) {
            break;
        }
        let tc = engine.trace_counts(case, k)?;
        let mut n = p as u64 * tc[0];
        for b in &data.summary.boundary {
            n += match &b.frobenius {
                None => 1,
                Some(u) => {
                    // u = ζ^t with t = Tr_{F_q/F_p}(c); the fibre is split iff k·t ≡ 0.
                    let t = (0..p as i64)
                        .find(|&t| &CycRat::zeta_pow(p, t) == u)
                        .expect("Frobenius values are p-th roots of unity");
                    if (k as i64 * t) % p as i64 == 0 {
                        p as u64
                    } else {
                        0
                    }
                }
            };
        }
        let predicted: BigInt = qb.pow(k as u32) + 1 - &ps[k - 1];
        counts_match &= predicted == BigInt::from(n);
        counts.push((k, n, predicted.to_string()));
    }

    let newton_c = newton_polygon_int(&pc, p, a)?;
    let np_x = newton_polygon_int(&px, p, a)?;
    let corollary = corollary_check(&newton_c, &np_x, &data.summary);

    Ok(CoverReport {
        genus_c,
        p_x: px.iter().map(|c| c.to_string()).collect(),
        p_c: pc.iter().map(|c| c.to_string()).collect(),
        functional_equation_ok,
        counts,
        counts_match,
        corollary_holds: corollary.0,
        newton_c: newton_c.to_json(),
        corollary_bound: corollary.1.to_json(),
        p_c_int: pc,
        p_x_int: px,
    })
}

/// NP(P_C) ⪰ NP(P_X) ⊔ (p−1 copies of the Hodge polygon of L(ρ)).
pub fn corollary_check(
    newton_c: &NewtonPolygon,
    newton_x: &NewtonPolygon,
    summary: &CaseSummary,
) -> (bool, NewtonPolygon) {
    let hodge = hodge_polygon(summary.genus, summary.m, &summary.swans(), 0);
    let copies = newton_c.len().saturating_sub(newton_x.len()) / hodge.len().max(1);
    let mut bound = newton_x.clone();
    for _ in 0..copies {
        bound = bound.concat(&hodge);
    }
    (newton_c.lies_above(&bound) && newton_c.len() == bound.len(), bound)
}

/// Whether every slope of `newton` is attained by `hodge` (equal polygons).
pub fn attained(newton: &NewtonPolygon, hodge: &NewtonPolygon) -> bool {
    newton == hodge
}

/// Largest vertex-height denominator of a polygon, for reports.
pub fn max_vertex_denominator(np: &NewtonPolygon) -> u64 {
    np.vertices()
        .iter()
        .map(|(_, y)| y.denom().to_u64().unwrap_or(u64::MAX))
        .max()
        .unwrap_or(1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::RegularFunction;
    use crate::ff::FieldTower;

    fn fq(t: &Arc<FieldTower>, v: &[u32]) -> Vec<crate::ff::FFElement> {
        v.iter().map(|&c| t.from_u32(c)).collect()
    }

    fn a1_case(p: u32, a: usize, f: &[u32]) -> Case {
        let t = build_tower(p, a, 1).unwrap();
        let f = RegularFunction::rational(&t, fq(&t, f), fq(&t, &[1]));
        Case::new(&t, CurveModel::P1, vec![Place::Infinite { branch: 0 }], f).unwrap()
    }

    fn kloosterman(p: u32) -> Case {
        let t = build_tower(p, 1, 1).unwrap();
        let gm = vec![Place::Finite { x: t.zero(), y: None }, Place::Infinite { branch: 0 }];
        let f = RegularFunction::laurent(&t, &[(1, t.one()), (-1, t.one())]);
        Case::new(&t, CurveModel::P1, gm, f).unwrap()
    }

    fn genus2_case() -> Case {
        let t = build_tower(3, 1, 1).unwrap();
        let model = CurveModel::Hyperelliptic { h: fq(&t, &[1, 2, 0, 0, 0, 1]) };
        let f = RegularFunction::rational(&t, fq(&t, &[0, 1]), fq(&t, &[1]));
        Case::new(&t, model, vec![Place::Infinite { branch: 0 }], f).unwrap()
    }

    /// Sum by plain enumeration of points, without log tables.
    fn slow_sum(case: &Case, k: usize) -> CycRat {
        let p = case.tower().p();
        let mut counts = vec![0u64; p as usize];
        for pt in case.points(k, 1 << 20).unwrap() {
            let v = case.eval_point(&pt).unwrap();
            counts[v.absolute_trace() as usize] += 1;
        }
        sum_from_counts(p, &counts)
    }

    fn int(n: i64) -> Rational {
        Rational::from_integer(BigInt::from(n))
    }

    #[test]
    fn linear_function_has_trivial_l() {
        let engine = SumEngine::default();
        let case = a1_case(5, 1, &[0, 1]);
        for k in 1..=3 {
            assert!(engine.exp_sum(&case, k).unwrap().is_zero());
        }
        let d = compute_l(&engine, &case, &Options::default()).unwrap();
        assert_eq!(d.degree_rho, 0);
        assert_eq!(d.l_rho, CycPoly::one(5));
    }

    #[test]
    fn quadratic_gauss_sum() {
        let engine = SumEngine::default();
        for p in [3u32, 5, 7] {
            let case = a1_case(p, 1, &[0, 0, 1]);
            let d = compute_l(&engine, &case, &Options::default()).unwrap();
            assert_eq!(d.degree_rho, 1);
            let g = -&d.l_rho.coeff(1);
            assert_eq!(&g * &g.complex_conjugate(), CycRat::from_scalar(p, int(p as i64)));
            let np = newton_polygon_q(&d.l_rho, 1).unwrap();
            assert_eq!(np.slopes(), &[Rational::new(1.into(), 2.into())]);
        }
    }

    #[test]
    fn kloosterman_degree_and_constant_term() {
        let engine = SumEngine::default();
        for p in [3u32, 5, 7] {
            let case = kloosterman(p);
            let d = compute_l(&engine, &case, &Options::default()).unwrap();
            assert_eq!(d.degree_rho, 2);
            let top = d.l_rho.coeff(2);
            assert_eq!(top, CycRat::from_scalar(p, int(p as i64)));
            let (r, _) = verify_bound(&engine, &case, &Options::default()).unwrap();
            assert!(r.alerts.is_empty(), "{:?}", r.alerts);
            assert!(r.lies_above);
        }
    }

    #[test]
    fn log_table_sums_match_plain_enumeration() {
        let engine = SumEngine::default();
        for case in [genus2_case(), kloosterman(5), a1_case(3, 2, &[1, 1, 0, 0, 1])] {
            for k in 1..=3 {
                assert_eq!(engine.exp_sum(&case, k).unwrap(), slow_sum(&case, k), "k = {k}");
            }
        }
    }

    #[test]
    fn genus2_weil_bound() {
        let engine = SumEngine::default();
        let case = genus2_case();
        let (r, d) = verify_bound(&engine, &case, &Options::default()).unwrap();
        assert_eq!(r.genus, 2);
        assert_eq!(d.degree_rho, 5);
        assert!(r.alerts.is_empty(), "{:?}", r.alerts);
        let hodge = hodge_polygon(2, 1, &[2], 0);
        assert_eq!(r.polygons.hodge_rho, hodge);
    }

    #[test]
    fn functional_equation_path_matches_direct() {
        let big = SumEngine::default();
        let case = a1_case(3, 1, &[0, 1, 0, 0, 0, 1]);
        let direct = compute_l(&big, &case, &Options::default()).unwrap();
        assert_eq!(direct.assembly, Assembly::Direct);
        let small = SumEngine::new(3u64.pow(4));
        let fe = compute_l(&small, &case, &Options::default()).unwrap();
        assert_eq!(fe.assembly, Assembly::FunctionalEquation);
        assert_eq!(direct.l_rho, fe.l_rho);
        assert_eq!(direct.l_f, fe.l_f);
    }

    #[test]
    fn fe_path_needs_half_the_degree() {
        let small = SumEngine::new(3);
        let case = a1_case(3, 1, &[0, 1, 0, 0, 0, 1]);
        let err = compute_l(&small, &case, &Options::default()).unwrap_err();
        assert!(matches!(err, LfunError::Field(FfError::BudgetExceeded { .. })));
    }

    #[test]
    fn scaling_f_conjugates_l() {
        let engine = SumEngine::default();
        let l1 = compute_l(&engine, &a1_case(5, 1, &[0, 1, 0, 1]), &Options::default()).unwrap();
        let l2 = compute_l(&engine, &a1_case(5, 1, &[0, 2, 0, 2]), &Options::default()).unwrap();
        assert_eq!(l1.l_rho.conjugate(2), l2.l_rho);
    }

    #[test]
    fn unramified_boundary_factor() {
        let engine = SumEngine::default();
        let t = build_tower(3, 1, 1).unwrap();
        let gm = vec![Place::Finite { x: t.zero(), y: None }, Place::Infinite { branch: 0 }];
        let f = RegularFunction::laurent(&t, &[(2, t.one())]);
        let case = Case::new(&t, CurveModel::P1, gm, f).unwrap();
        let d = compute_l(&engine, &case, &Options::default()).unwrap();
        assert_eq!((d.degree_rho, d.degree_f), (1, 2));
        let u = d.summary.unramified_values();
        assert_eq!(d.l_rho.mul(&CycPoly::linear(&u[0])), d.l_f);
    }

    #[test]
    fn assembly_rejects_inconsistent_sums() {
        let s = vec![CycRat::from_i64(3, 1); 4];
        assert!(matches!(assemble_l(&s, 1, 3), Err(LfunError::IntegralityFailure { .. }) | Err(LfunError::DegreeOverflow { .. })));
    }

    #[test]
    fn cover_zeta_counts_agree() {
        let engine = SumEngine::default();
        for case in [genus2_case(), kloosterman(3), a1_case(5, 1, &[0, 0, 0, 1])] {
            let d = compute_l(&engine, &case, &Options::default()).unwrap();
            let c = as_cover_zeta(&engine, &d).unwrap();
            assert!(c.functional_equation_ok);
            assert!(c.counts_match, "{:?}", c.counts);
            assert!(c.corollary_holds);
            let expected = case.genus() + (case.tower().p() as u64 - 1) * d.degree_rho as u64 / 2;
            assert_eq!(c.genus_c, expected);
        }
    }

    #[test]
    fn elliptic_curve_numerator() {
        let engine = SumEngine::default();
        let t = build_tower(5, 1, 1).unwrap();
        let model = CurveModel::Hyperelliptic { h: fq(&t, &[1, 1, 0, 1]) };
        let f = RegularFunction::rational(&t, fq(&t, &[0, 1]), fq(&t, &[1]));
        let case = Case::new(&t, model, vec![Place::Infinite { branch: 0 }], f).unwrap();
        let n1 = engine.count_x(&case, 1).unwrap() as i64;
        let px = p_x(&engine, &case).unwrap();
        assert_eq!(px, vec![BigInt::one(), BigInt::from(n1 - 6), BigInt::from(5)]);
    }
}
