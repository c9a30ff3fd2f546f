//! Curve models (P¹ and y² = h(x)), their places, point sets and local
//! expansions of regular functions.

use std::sync::Arc;

use thiserror::Error;

use crate::ff::{build_tower, Embedding, FFElement, FfError, FieldTower};
use crate::localseries::{
    artin_schreier_reduce, unramified_frobenius_value, LaurentFq, LocalError,
};
use crate::CycRat;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CurveError {
    #[error("V must be affine: list at least one boundary place")]
    NotAffine,
    #[error("h is not squarefree (gcd(h, h') has degree {0})")]
    NotSquarefree(usize),
    #[error("h must have degree at least 3, got {0}")]
    DegreeTooSmall(usize),
    #[error("boundary point {0} does not lie on the curve")]
    PointNotOnCurve(String),
    #[error("bad boundary place: {0}")]
    BadPlace(String),
    #[error("boundary place listed twice: {0}")]
    DuplicatePlace(String),
    #[error("f has a pole on V: {0}")]
    PoleOnV(String),
    #[error("degenerate character: {0}")]
    DegenerateCharacter(String),
    #[error("bad function: {0}")]
    BadFunction(String),
    #[error(transparent)]
    Local(#[from] LocalError),
    #[error(transparent)]
    Field(#[from] FfError),
}

impl CurveError {
    /// Whether the case should be retried over F_{q²}.
    pub fn needs_quadratic_extension(&self) -> bool {
        matches!(self, CurveError::Local(LocalError::NotASquare))
    }
}

/// A polynomial over F_q, constant term first.
pub type Poly = Vec<FFElement>;

#[derive(Debug, Clone, PartialEq)]
pub enum CurveModel {
    P1,
    /// y² = h(x).
    Hyperelliptic { h: Poly },
}

impl CurveModel {
    pub fn genus(&self) -> u64 {
        match self {
            CurveModel::P1 => 0,
            CurveModel::Hyperelliptic { h } => ((degree(h).unwrap_or(0) as u64).saturating_sub(1)) / 2,
        }
    }
}

/// An F_q-rational place of X.
#[derive(Debug, Clone, PartialEq)]
pub enum Place {
    /// x = x₀ (P¹), or the point (x₀, y₀) on a hyperelliptic curve.
    Finite { x: FFElement, y: Option<FFElement> },
    /// A place over x = ∞. Branch 0 on P¹ and odd-degree models; on even
    /// degree, branch 0 has y/x^{g+1} → the canonical root of lc(h), branch
    /// 1 its negative.
    Infinite { branch: u32 },
}

impl std::fmt::Display for Place {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Place::Finite { x, y: None } => write!(f, "x={:?}", x.coeffs()),
            Place::Finite { x, y: Some(y) } => write!(f, "(x,y)=({:?},{:?})", x.coeffs(), y.coeffs()),
            Place::Infinite { branch } => write!(f, "∞{branch}"),
        }
    }
}

/// u(x) + v(x)·y with u = u_num/u_den and v = v_num/v_den. On P¹, v = 0.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularFunction {
    pub u_num: Poly,
    pub u_den: Poly,
    pub v_num: Poly,
    pub v_den: Poly,
}

impl RegularFunction {
    pub fn rational(tower: &Arc<FieldTower>, num: Poly, den: Poly) -> Self {
        RegularFunction {
            u_num: num,
            u_den: den,
            v_num: Vec::new(),
            v_den: vec![tower.one()],
        }
    }

    /// Σ c_e x^e over integer exponents e (negative allowed).
    pub fn laurent(tower: &Arc<FieldTower>, terms: &[(i64, FFElement)]) -> Self {
        let shift = terms.iter().map(|(e, _)| (-e).max(0)).max().unwrap_or(0);
        let top = terms.iter().map(|(e, _)| e + shift).max().unwrap_or(0);
        let mut num = vec![tower.zero(); top as usize + 1];
        for (e, c) in terms {
            let i = (e + shift) as usize;
            num[i] = &num[i] + c;
        }
        let mut den = vec![tower.zero(); shift as usize + 1];
        den[shift as usize] = tower.one();
        Self::rational(tower, num, den)
    }

    fn has_y_part(&self) -> bool {
        degree(&self.v_num).is_some()
    }

    fn map(&self, m: impl Fn(&FFElement) -> Result<FFElement, FfError>) -> Result<Self, FfError> {
        let mp = |p: &Poly| p.iter().map(&m).collect::<Result<Poly, _>>();
        Ok(RegularFunction {
            u_num: mp(&self.u_num)?,
            u_den: mp(&self.u_den)?,
            v_num: mp(&self.v_num)?,
            v_den: mp(&self.v_den)?,
        })
    }
}

/// Local data at one boundary place.
#[derive(Debug, Clone)]
pub struct BoundaryInfo {
    pub place: Place,
    pub swan: u64,
    /// ρ(Frob) when the place is unramified.
    pub frobenius: Option<CycRat>,
    /// Pole order of f itself before reduction (0 if regular).
    pub pole_order: u64,
}

#[derive(Debug, Clone)]
pub struct CaseSummary {
    pub genus: u64,
    pub boundary: Vec<BoundaryInfo>,
    /// Number of ramified boundary places.
    pub m: u64,
    /// Number of unramified boundary places.
    pub c: u64,
}

impl CaseSummary {
    /// Swan conductors of the ramified places, in boundary order.
    pub fn swans(&self) -> Vec<u64> {
        self.boundary.iter().filter(|b| b.swan > 0).map(|b| b.swan).collect()
    }

    pub fn unramified_values(&self) -> Vec<CycRat> {
        self.boundary.iter().filter_map(|b| b.frobenius.clone()).collect()
    }
}

/// A point of X over F_{q^k}.
#[derive(Debug, Clone, PartialEq)]
pub enum Point {
    Affine { x: FFElement, y: Option<FFElement> },
    Infinite { branch: u32 },
}

/// A curve over F_q with a boundary and a function regular off it.
#[derive(Debug, Clone)]
pub struct Case {
    tower: Arc<FieldTower>,
    model: CurveModel,
    boundary: Vec<Place>,
    f: RegularFunction,
}

const MAX_DOUBLINGS: u32 = 6;

impl Case {
    /// Validates the model, the boundary list and the shape of f. Pole
    /// placement is checked by [`Case::summary`].
    pub fn new(
        tower: &Arc<FieldTower>,
        model: CurveModel,
        boundary: Vec<Place>,
        f: RegularFunction,
    ) -> Result<Self, CurveError> {
        if tower.k() != 1 {
            return Err(CurveError::BadFunction("curve data must live over F_q".into()));
        }
        let all: Vec<&FFElement> = f
            .u_num
            .iter()
            .chain(&f.u_den)
            .chain(&f.v_num)
            .chain(&f.v_den)
            .collect();
        if all.iter().any(|c| c.tower() != tower) {
            return Err(FfError::TowerMismatch.into());
        }
        if boundary.is_empty() {
            return Err(CurveError::NotAffine);
        }
        if degree(&f.u_den).is_none() || degree(&f.v_den).is_none() {
            return Err(CurveError::BadFunction("zero denominator".into()));
        }
        if let CurveModel::Hyperelliptic { h } = &model {
            let d = degree(h).unwrap_or(0);
            if d < 3 {
                return Err(CurveError::DegreeTooSmall(d));
            }
            let g = poly_gcd(h, &derivative(h));
            if degree(&g) != Some(0) {
                return Err(CurveError::NotSquarefree(degree(&g).unwrap_or(0)));
            }
        } else if f.has_y_part() {
            return Err(CurveError::BadFunction("y-part given on P¹".into()));
        }
        for (i, place) in boundary.iter().enumerate() {
            if boundary[..i].contains(place) {
                return Err(CurveError::DuplicatePlace(place.to_string()));
            }
            match (place, &model) {
                (Place::Finite { y: Some(_), .. }, CurveModel::P1) => {
                    return Err(CurveError::BadPlace("P¹ places take no y".into()))
                }
                (Place::Finite { y: None, .. }, CurveModel::Hyperelliptic { .. }) => {
                    return Err(CurveError::BadPlace(
                        "hyperelliptic finite places need y".into(),
                    ))
                }
                (Place::Finite { x, y: Some(y) }, CurveModel::Hyperelliptic { h }) => {
                    if x.tower() != tower || y.tower() != tower {
                        return Err(FfError::TowerMismatch.into());
                    }
                    if &(y * y) != &eval(h, x) {
                        return Err(CurveError::PointNotOnCurve(place.to_string()));
                    }
                }
                (Place::Finite { x, .. }, _) => {
                    if x.tower() != tower {
                        return Err(FfError::TowerMismatch.into());
                    }
                }
                (Place::Infinite { branch }, m) => {
                    let ok = match m {
                        CurveModel::Hyperelliptic { h } if degree(h).unwrap() % 2 == 0 => {
                            *branch <= 1
                        }
                        _ => *branch == 0,
                    };
                    if !ok {
                        return Err(CurveError::BadPlace(format!("no branch {branch} at ∞")));
                    }
                }
            }
        }
        Ok(Case {
            tower: Arc::clone(tower),
            model,
            boundary,
            f,
        })
    }

    pub fn tower(&self) -> &Arc<FieldTower> {
        &self.tower
    }

    pub fn model(&self) -> &CurveModel {
        &self.model
    }

    pub fn boundary(&self) -> &[Place] {
        &self.boundary
    }

    pub fn function(&self) -> &RegularFunction {
        &self.f
    }

    pub fn genus(&self) -> u64 {
        self.model.genus()
    }

    /// The same case over F_{q²}, coefficients moved by the standard
    /// embedding F_q → F_{q²}. Infinite branches are renamed so they refer
    /// to the same geometric places where that makes sense.
    pub fn lift_quadratic(&self) -> Result<Case, CurveError> {
        let big = build_tower(self.tower.p(), 2 * self.tower.a(), 1)?;
        let emb = Embedding::new(&self.tower, &big)?;
        let mp = |x: &FFElement| emb.apply(x);
        let model = match &self.model {
            CurveModel::P1 => CurveModel::P1,
            CurveModel::Hyperelliptic { h } => CurveModel::Hyperelliptic {
                h: h.iter().map(mp).collect::<Result<_, _>>()?,
            },
        };
        let boundary = self
            .boundary
            .iter()
            .map(|pl| {
                Ok(match pl {
                    Place::Finite { x, y } => Place::Finite {
                        x: mp(x)?,
                        y: y.as_ref().map(mp).transpose()?,
                    },
                    Place::Infinite { branch } => Place::Infinite { branch: *branch },
                })
            })
            .collect::<Result<Vec<_>, FfError>>()?;
        Case::new(&big, model, boundary, self.f.map(mp)?)
    }

    /// The rational places at infinity of X.
    pub fn infinite_places(&self) -> Result<Vec<u32>, CurveError> {
        match &self.model {
            CurveModel::Hyperelliptic { h } if degree(h).unwrap() % 2 == 0 => {
                if lead(h).is_square() {
                    Ok(vec![0, 1])
                } else {
                    Err(LocalError::NotASquare.into())
                }
            }
            _ => Ok(vec![0]),
        }
    }

    /// Infinite places of X that belong to V.
    pub fn open_infinite_places(&self) -> Result<Vec<u32>, CurveError> {
        Ok(self
            .infinite_places()?
            .into_iter()
            .filter(|b| !self.boundary.contains(&Place::Infinite { branch: *b }))
            .collect())
    }

    /// Rough bound on pole orders of f anywhere, used for working precision.
    fn pole_bound(&self) -> i64 {
        let d = |p: &Poly| degree(p).unwrap_or(0) as i64;
        let f = &self.f;
        let g = self.genus() as i64;
        2 * (d(&f.u_num) + d(&f.u_den) + d(&f.v_num) + d(&f.v_den) + g + 2)
    }

    /// Expansions of x and y (hyperelliptic) at a place, known to roughly
    /// `work` relative terms.
    fn coordinates(
        &self,
        place: &Place,
        work: i64,
    ) -> Result<(LaurentFq, Option<LaurentFq>), CurveError> {
        let t = &self.tower;
        match (&self.model, place) {
            (CurveModel::P1, Place::Finite { x, .. }) => Ok((
                LaurentFq::exact(t, 0, vec![x.clone(), t.one()]),
                None,
            )),
            (CurveModel::P1, Place::Infinite { .. }) => {
                Ok((LaurentFq::exact(t, -1, vec![t.one()]), None))
            }
            (CurveModel::Hyperelliptic { h }, Place::Finite { x, y: Some(y0) }) => {
                if y0.is_zero() {
                    // Weierstrass point: t = y, x = x₀ + δ with h(x₀+δ) = t².
                    let shifted = LaurentFq::exact(t, 0, vec![x.clone(), t.one()]).eval_poly(h)?;
                    let c: Vec<FFElement> = (0..=degree(h).unwrap() as i64)
                        .map(|i| shifted.coeff(i).unwrap())
                        .collect();
                    let c1_inv = c[1].inv()?;
                    let t2 = LaurentFq::exact(t, 2, vec![t.one()]).truncate(work);
                    let higher: Poly = {
                        let mut v = c.clone();
                        v[0] = t.zero();
                        v[1] = t.zero();
                        v
                    };
                    let mut delta = LaurentFq::zero(t, work);
                    for _ in 0..=(work / 2 + 1) {
                        let rest = delta.eval_poly(&higher)?;
                        delta = t2.sub(&rest)?.scale(&c1_inv).truncate(work);
                    }
                    let xs = LaurentFq::constant(x.clone(), work).add(&delta)?;
                    Ok((xs, Some(LaurentFq::exact(t, 1, vec![t.one()]))))
                } else {
                    let xs = LaurentFq::exact(t, 0, vec![x.clone(), t.one()]);
                    let hx = xs.eval_poly(h)?.truncate(work);
                    let ys = hx.sqrt_with_root(y0)?;
                    Ok((xs, Some(ys)))
                }
            }
            (CurveModel::Hyperelliptic { h }, Place::Infinite { branch }) => {
                let d = degree(h).unwrap();
                let g = self.genus() as i64;
                let rev: Poly = h.iter().rev().cloned().collect();
                if d % 2 == 1 {
                    // s = x^g/y and w = 1/x satisfy w = s²·H(w), H = reversed h.
                    let s2 = LaurentFq::exact(t, 2, vec![t.one()]);
                    let mut w = LaurentFq::zero(t, work);
                    for _ in 0..=(work / 2 + 1) {
                        w = s2.mul(&w.eval_poly(&rev)?.truncate(work))?.truncate(work);
                    }
                    let xs = w.invert()?;
                    let s_inv = LaurentFq::exact(t, -1, vec![t.one()]);
                    let ys = xs.pow(g)?.mul(&s_inv)?;
                    Ok((xs, Some(ys)))
                } else {
                    // x = 1/t, y = ±x^{g+1}·sqrt(H(t)).
                    let xs = LaurentFq::exact(t, -1, vec![t.one()]);
                    let big_h = LaurentFq::exact(t, 0, rev).truncate(work);
                    let root = big_h.sqrt(*branch)?;
                    let ys = xs.pow(g + 1)?.mul(&root)?;
                    Ok((xs, Some(ys)))
                }
            }
            (CurveModel::Hyperelliptic { .. }, Place::Finite { y: None, .. }) => {
                Err(CurveError::BadPlace("hyperelliptic finite places need y".into()))
            }
        }
    }

    fn expand_once(&self, place: &Place, work: i64) -> Result<LaurentFq, CurveError> {
        let (xs, ys) = self.coordinates(place, work)?;
        let ratio = |num: &Poly, den: &Poly| -> Result<LaurentFq, CurveError> {
            let n = xs.eval_poly(num)?;
            if degree(den) == Some(0) {
                return Ok(n.scale(&den[0].inv()?));
            }
            let d = xs.eval_poly(den)?;
            let d = if d.is_exact() {
                let v = d.valuation().unwrap_or(0);
                d.truncate(v + work)
            } else {
                d
            };
            Ok(n.mul(&d.invert()?)?)
        };
        let mut out = ratio(&self.f.u_num, &self.f.u_den)?;
        if let Some(ys) = ys {
            if self.f.has_y_part() {
                out = out.add(&ratio(&self.f.v_num, &self.f.v_den)?.mul(&ys)?)?;
            }
        }
        Ok(out)
    }

    /// Laurent expansion of f at a place in its standard uniformizer,
    /// known at least below t^prec.
    pub fn local_expansion(&self, place: &Place, prec: i64) -> Result<LaurentFq, CurveError> {
        let mut work = prec.max(1) + self.pole_bound() + 8;
        for _ in 0..=MAX_DOUBLINGS {
            match self.expand_once(place, work) {
                Ok(s) if s.prec() >= prec => return Ok(s.truncate(prec)),
                Ok(_) | Err(CurveError::Local(LocalError::PrecisionLoss(_))) => work *= 2,
                Err(e) => return Err(e),
            }
        }
        Err(LocalError::PrecisionLoss(format!("expansion at {place} did not reach t^{prec}")).into())
    }

    /// Checks that f is regular on V and collects swan conductors and
    /// Frobenius values at the boundary.
    pub fn summary(&self) -> Result<CaseSummary, CurveError> {
        self.check_finite_poles()?;
        for b in self.open_infinite_places()? {
            let e = self.local_expansion(&Place::Infinite { branch: b }, 1)?;
            if e.valuation().is_some_and(|v| v < 0) {
                return Err(CurveError::PoleOnV(format!("at ∞{b}, which is not in the boundary")));
            }
        }
        let mut infos = Vec::new();
        for place in &self.boundary {
            if let Place::Infinite { .. } = place {
                self.infinite_places()?;
            }
            let e = self.local_expansion(place, 1)?;
            let pole_order = e.valuation().map_or(0, |v| (-v).max(0) as u64);
            let rep = artin_schreier_reduce(&e)?;
            let frobenius = if rep.swan == 0 {
                Some(unramified_frobenius_value(&rep)?)
            } else {
                None
            };
            infos.push(BoundaryInfo {
                place: place.clone(),
                swan: rep.swan,
                frobenius,
                pole_order,
            });
        }
        let m = infos.iter().filter(|b| b.swan > 0).count() as u64;
        let c = infos.len() as u64 - m;
        if m == 0 {
            return Err(CurveError::DegenerateCharacter(
                "no boundary place is ramified (f is Artin–Schreier equivalent to a function without poles)".into(),
            ));
        }
        Ok(CaseSummary {
            genus: self.genus(),
            boundary: infos,
            m,
            c,
        })
    }

    /// Every root of a denominator must be an F_q-rational x-value whose
    /// points are all boundary places.
    fn check_finite_poles(&self) -> Result<(), CurveError> {
        let t = &self.tower;
        for (num, den) in [(&self.f.u_num, &self.f.u_den), (&self.f.v_num, &self.f.v_den)] {
            if degree(num).is_none() {
                continue;
            }
            let g = poly_gcd(num, den);
            let (den, _) = divrem(den, &g);
            let mut rest = den.clone();
            for i in 0..t.q() as u128 {
                let x0 = t.from_index(i);
                let lin = vec![-&x0, t.one()];
                let mut hit = false;
                loop {
                    let (q, r) = divrem(&rest, &lin);
                    if degree(&r).is_some() {
                        break;
                    }
                    rest = q;
                    hit = true;
                }
                if hit {
                    for pt in self.points_over(&x0) {
                        if !self.boundary.contains(&pt) {
                            return Err(CurveError::PoleOnV(format!("at {pt}")));
                        }
                    }
                    if let CurveModel::Hyperelliptic { h } = &self.model {
                        if !eval(h, &x0).is_square() {
                            return Err(CurveError::PoleOnV(format!(
                                "over x={:?}, a place that is not F_q-rational",
                                x0.coeffs()
                            )));
                        }
                    }
                }
            }
            if degree(&rest).unwrap_or(0) > 0 {
                return Err(CurveError::PoleOnV(
                    "a denominator has roots outside F_q".into(),
                ));
            }
        }
        Ok(())
    }

    /// F_q-rational places of X with the given x-coordinate.
    fn points_over(&self, x0: &FFElement) -> Vec<Place> {
        match &self.model {
            CurveModel::P1 => vec![Place::Finite { x: x0.clone(), y: None }],
            CurveModel::Hyperelliptic { h } => {
                let hx = eval(h, x0);
                match hx.sqrt() {
                    Some(y) if y.is_zero() => vec![Place::Finite { x: x0.clone(), y: Some(y) }],
                    Some(y) => vec![
                        Place::Finite { x: x0.clone(), y: Some(y.clone()) },
                        Place::Finite { x: x0.clone(), y: Some(-y) },
                    ],
                    None => Vec::new(),
                }
            }
        }
    }

    /// Whether a point over F_{q^k} is one of the boundary places.
    fn is_boundary(&self, pt: &Point) -> bool {
        self.boundary.iter().any(|b| match (b, pt) {
            (Place::Infinite { branch }, Point::Infinite { branch: c }) => branch == c,
            (Place::Finite { x, y }, Point::Affine { x: px, y: py }) => {
                let same_x = x.to_tower(px.tower()).is_ok_and(|v| &v == px);
                let same_y = match (y, py) {
                    (None, None) => true,
                    (Some(y), Some(py)) => y.to_tower(py.tower()).is_ok_and(|v| &v == py),
                    _ => false,
                };
                same_x && same_y
            }
            _ => false,
        })
    }

    /// V(F_{q^k}), by direct enumeration (reference implementation).
    pub fn points(&self, k: usize, budget: u64) -> Result<Vec<Point>, CurveError> {
        let big = build_tower(self.tower.p(), self.tower.a(), k)?;
        let elems = big.enumerate(budget)?;
        let mut out = Vec::new();
        let h_big = match &self.model {
            CurveModel::Hyperelliptic { h } => Some(to_tower_poly(h, &big)?),
            CurveModel::P1 => None,
        };
        for x in elems.iter() {
            match &h_big {
                None => out.push(Point::Affine { x, y: None }),
                Some(h) => {
                    let hx = eval(h, &x);
                    if let Some(y) = hx.sqrt() {
                        if y.is_zero() {
                            out.push(Point::Affine { x, y: Some(y) });
                        } else {
                            out.push(Point::Affine { x: x.clone(), y: Some(y.clone()) });
                            out.push(Point::Affine { x, y: Some(-y) });
                        }
                    }
                }
            }
        }
        for b in self.infinite_places()? {
            out.push(Point::Infinite { branch: b });
        }
        out.retain(|pt| !self.is_boundary(pt));
        Ok(out)
    }

    /// f at a point of V over F_{q^k} (reference implementation).
    pub fn eval_point(&self, pt: &Point) -> Result<FFElement, CurveError> {
        match pt {
            Point::Infinite { branch } => {
                let e = self.local_expansion(&Place::Infinite { branch: *branch }, 1)?;
                if e.valuation().is_some_and(|v| v < 0) {
                    return Err(CurveError::PoleOnV(format!("at ∞{branch}")));
                }
                Ok(e.coeff(0).unwrap())
            }
            Point::Affine { x, y } => {
                let big = x.tower();
                let part = |num: &Poly, den: &Poly| -> Result<FFElement, CurveError> {
                    let n = eval(&to_tower_poly(num, big)?, x);
                    let d = eval(&to_tower_poly(den, big)?, x);
                    if d.is_zero() {
                        return Err(CurveError::PoleOnV(format!("at x={:?}", x.coeffs())));
                    }
                    Ok(n.try_div(&d)?)
                };
                let mut val = part(&self.f.u_num, &self.f.u_den)?;
                if let (Some(y), true) = (y, self.f.has_y_part()) {
                    val = &val + &(&part(&self.f.v_num, &self.f.v_den)? * y);
                }
                Ok(val)
            }
        }
    }

    /// Value of f at each open infinite place (they are F_q-rational).
    pub fn infinite_values(&self) -> Result<Vec<FFElement>, CurveError> {
        self.open_infinite_places()?
            .into_iter()
            .map(|b| self.eval_point(&Point::Infinite { branch: b }))
            .collect()
    }

    /// |X(F_{q^k})| by direct enumeration.
    pub fn count_x(&self, k: usize, budget: u64) -> Result<u64, CurveError> {
        let big = build_tower(self.tower.p(), self.tower.a(), k)?;
        let qk = big.size() as u64;
        match &self.model {
            CurveModel::P1 => Ok(qk + 1),
            CurveModel::Hyperelliptic { h } => {
                let hb = to_tower_poly(h, &big)?;
                let mut n = 0u64;
                for x in big.enumerate(budget)?.iter() {
                    let hx = eval(&hb, &x);
                    n += if hx.is_zero() { 1 } else if hx.is_square() { 2 } else { 0 };
                }
                let d = degree(h).unwrap();
                let inf = if d % 2 == 1 {
                    1
                } else {
                    let lc = lead(h).to_tower(&big)?;
                    if lc.is_square() { 2 } else { 0 }
                };
                Ok(n + inf)
            }
        }
    }
}

pub fn degree(p: &[FFElement]) -> Option<usize> {
    p.iter().rposition(|c| !c.is_zero())
}

fn lead(p: &[FFElement]) -> FFElement {
    p[degree(p).expect("nonzero polynomial")].clone()
}

fn trimmed(p: &[FFElement]) -> Poly {
    p[..degree(p).map_or(0, |d| d + 1)].to_vec()
}

/// Horner evaluation.
pub fn eval(p: &[FFElement], x: &FFElement) -> FFElement {
    let mut acc = x.tower().zero();
    for c in p.iter().rev() {
        acc = &(&acc * x) + c;
    }
    acc
}

pub fn derivative(p: &[FFElement]) -> Poly {
    p.iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c.scale((i % c.tower().p() as usize) as u32))
        .collect()
}

/// (quotient, remainder) for a nonzero divisor.
pub fn divrem(a: &[FFElement], b: &[FFElement]) -> (Poly, Poly) {
    let b = trimmed(b);
    let db = b.len() - 1;
    let inv = b[db].inv().expect("nonzero divisor");
    let mut r = trimmed(a);
    let zero = b[0].tower().zero();
    if r.len() <= db || degree(&r).is_none() {
        return (vec![zero], r);
    }
    let mut q = vec![zero; r.len() - db];
    for i in (db..r.len()).rev() {
        let c = &r[i] * &inv;
        if c.is_zero() {
            continue;
        }
        for j in 0..=db {
            r[i - db + j] = &r[i - db + j] - &(&c * &b[j]);
        }
        q[i - db] = c;
    }
    (q, trimmed(&r))
}

/// Monic gcd.
pub fn poly_gcd(a: &[FFElement], b: &[FFElement]) -> Poly {
    let (mut a, mut b) = (trimmed(a), trimmed(b));
    while degree(&b).is_some() {
        let (_, r) = divrem(&a, &b);
        a = b;
        b = r;
    }
    match degree(&a) {
        Some(_) => {
            let inv = lead(&a).inv().unwrap();
            a.iter().map(|c| c * &inv).collect()
        }
        None => a,
    }
}

fn to_tower_poly(p: &[FFElement], big: &Arc<FieldTower>) -> Result<Poly, FfError> {
    p.iter().map(|c| c.to_tower(big)).collect()
}
