//! Newton polygons as sorted slope multisets.
//!
//! A polygon of length n starts at (0,0) and has one unit-width edge per
//! slope, so every vertex sits at an integer abscissa. Comparisons therefore
//! only need the partial sums at integer points.

use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;
use thiserror::Error;

use crate::cyc::{parse_rational, rational_string};
use crate::scalar::OrderedScalar;
use crate::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolygonError {
    #[error("constant term must have valuation 0, got {0}")]
    UnnormalizedConstant(String),
    #[error("point indices must be 0, 1, 2, ... in order")]
    NonContiguous,
    #[error("hull has a negative slope {0}")]
    NegativeSlope(String),
    #[error("truncation threshold must be positive, got {0}")]
    BadThreshold(String),
    #[error("slope {slope} has multiplicity {mult}, not divisible by {den}")]
    NonIntegralScaling { slope: String, mult: usize, den: u64 },
    #[error("malformed polygon data: {0}")]
    Malformed(String),
}

/// A nondecreasing multiset of nonnegative slopes.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Polygon<T> {
    slopes: Vec<T>,
}

impl<T: OrderedScalar> Polygon<T> {
    pub fn empty() -> Self {
        Polygon { slopes: Vec::new() }
    }

    pub fn from_slopes(mut slopes: Vec<T>) -> Result<Self, PolygonError> {
        if let Some(s) = slopes.iter().find(|s| s.is_negative()) {
            return Err(PolygonError::NegativeSlope(format!("{s:?}")));
        }
        sort(&mut slopes);
        Ok(Polygon { slopes })
    }

    /// Lower convex hull of (i, v_i) for i = 0..; `None` marks v = ∞.
    /// Trailing infinite entries shorten the polygon.
    pub fn lower_hull(points: &[(i64, Option<T>)]) -> Result<Self, PolygonError> {
        let verts = hull_vertices(points)?;
        let mut slopes = Vec::new();
        for w in verts.windows(2) {
            let (x0, y0) = &w[0];
            let (x1, y1) = &w[1];
            let width = x1 - x0;
            let s = (y1.clone() - y0.clone()) / T::from_i64(width).expect("small width");
            if s.is_negative() {
                return Err(PolygonError::NegativeSlope(format!("{s:?}")));
            }
            slopes.extend(std::iter::repeat(s).take(width as usize));
        }
        Ok(Polygon { slopes })
    }

    pub fn slopes(&self) -> &[T] {
        &self.slopes
    }

    pub fn len(&self) -> usize {
        self.slopes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slopes.is_empty()
    }

    /// Heights at x = 0, 1, ..., len.
    pub fn heights(&self) -> Vec<T> {
        let mut out = Vec::with_capacity(self.slopes.len() + 1);
        let mut acc = T::zero();
        out.push(acc.clone());
        for s in &self.slopes {
            acc = acc + s.clone();
            out.push(acc.clone());
        }
        out
    }

    /// Break points (including both endpoints).
    pub fn vertices(&self) -> Vec<(usize, T)> {
        let h = self.heights();
        let n = self.slopes.len();
        (0..=n)
            .filter(|&i| i == 0 || i == n || self.slopes[i - 1] != self.slopes[i])
            .map(|i| (i, h[i].clone()))
            .collect()
    }

    /// Distinct slopes with their multiplicities, in increasing order.
    pub fn segments(&self) -> Vec<(T, usize)> {
        let mut out: Vec<(T, usize)> = Vec::new();
        for s in &self.slopes {
            match out.last_mut() {
                Some((v, m)) if v == s => *m += 1,
                _ => out.push((s.clone(), 1)),
            }
        }
        out
    }

    pub fn multiplicity(&self, slope: &T) -> usize {
        self.slopes.iter().filter(|s| *s == slope).count()
    }

    /// Multiset union.
    pub fn concat(&self, other: &Self) -> Self {
        let mut slopes = self.slopes.clone();
        slopes.extend(other.slopes.iter().cloned());
        sort(&mut slopes);
        Polygon { slopes }
    }

    /// The slopes strictly below r.
    pub fn truncate_below(&self, r: &T) -> Result<Self, PolygonError> {
        if !r.is_positive() {
            return Err(PolygonError::BadThreshold(format!("{r:?}")));
        }
        Ok(Polygon {
            slopes: self.slopes.iter().filter(|s| *s < r).cloned().collect(),
        })
    }

    /// The homothety (x, y) ↦ (cx, cy) with c = num/den: slopes stay, every
    /// multiplicity is multiplied by c.
    pub fn scale(&self, num: u64, den: u64) -> Result<Self, PolygonError> {
        assert!(num > 0 && den > 0, "scale factor must be positive");
        let g = num_integer::gcd(num, den);
        let (num, den) = (num / g, den / g);
        let mut slopes = Vec::new();
        for (s, m) in self.segments() {
            if m as u64 % den != 0 {
                return Err(PolygonError::NonIntegralScaling {
                    slope: format!("{s:?}"),
                    mult: m,
                    den,
                });
            }
            let count = (m as u64 / den * num) as usize;
            slopes.extend(std::iter::repeat(s).take(count));
        }
        Ok(Polygon { slopes })
    }

    /// y-dilation by a: the polygon of the same polynomial measured with
    /// v_p instead of v_q (q = p^a).
    pub fn rescale_q_to_p(&self, a: u32) -> Self {
        let f = T::from_u32(a).expect("small factor");
        Polygon {
            slopes: self.slopes.iter().map(|s| s.clone() * f.clone()).collect(),
        }
    }

    /// Inverse of [`rescale_q_to_p`](Self::rescale_q_to_p).
    pub fn rescale_p_to_q(&self, a: u32) -> Self {
        let f = T::from_u32(a).expect("small factor");
        Polygon {
            slopes: self.slopes.iter().map(|s| s.clone() / f.clone()).collect(),
        }
    }

    /// x-dilation by a: Q(s) ↦ Q(s^a). Slopes are divided by a and every
    /// multiplicity is multiplied by a.
    pub fn rescale_variable(&self, a: u32) -> Self {
        let f = T::from_u32(a).expect("small factor");
        let mut slopes = Vec::with_capacity(self.slopes.len() * a as usize);
        for s in &self.slopes {
            let t = s.clone() / f.clone();
            slopes.extend(std::iter::repeat(t).take(a as usize));
        }
        Polygon { slopes }
    }

    /// Inverse of [`rescale_variable`](Self::rescale_variable).
    pub fn unscale_variable(&self, a: u32) -> Result<Self, PolygonError> {
        let f = T::from_u32(a).expect("small factor");
        let mut slopes = Vec::new();
        for (s, m) in self.segments() {
            if m % a as usize != 0 {
                return Err(PolygonError::NonIntegralScaling {
                    slope: format!("{s:?}"),
                    mult: m,
                    den: a as u64,
                });
            }
            slopes.extend(std::iter::repeat(s * f.clone()).take(m / a as usize));
        }
        Ok(Polygon { slopes })
    }

    /// self(x) ≥ other(x) on the common domain 0 ≤ x ≤ min(len).
    pub fn lies_above(&self, other: &Self) -> bool {
        let n = self.len().min(other.len());
        let mut a = T::zero();
        let mut b = T::zero();
        for i in 0..n {
            a = a + self.slopes[i].clone();
            b = b + other.slopes[i].clone();
            if a < b {
                return false;
            }
        }
        true
    }

    /// Final height (sum of slopes).
    pub fn height(&self) -> T {
        self.slopes.iter().cloned().fold(T::zero(), |a, b| a + b)
    }
}

/// Vertices of the lower convex hull of the finite points, from index 0 to
/// the last finite index.
pub fn hull_vertices<T: OrderedScalar>(
    points: &[(i64, Option<T>)],
) -> Result<Vec<(i64, T)>, PolygonError> {
    if points.iter().enumerate().any(|(i, (x, _))| *x != i as i64) {
        return Err(PolygonError::NonContiguous);
    }
    match points.first() {
        None => return Ok(vec![(0, T::zero())]),
        Some((_, Some(v))) if v.is_zero() => {}
        Some((_, v)) => return Err(PolygonError::UnnormalizedConstant(format!("{v:?}"))),
    }
    let mut hull: Vec<(i64, T)> = Vec::new();
    for (x, v) in points {
        let Some(y) = v else { continue };
        while hull.len() >= 2 {
            let (x1, y1) = &hull[hull.len() - 2];
            let (x2, y2) = &hull[hull.len() - 1];
            // Drop the middle point unless it lies strictly below the chord.
            let lhs = (y2.clone() - y1.clone()) * T::from_i64(x - x1).expect("small");
            let rhs = (y.clone() - y1.clone()) * T::from_i64(x2 - x1).expect("small");
            if lhs >= rhs {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push((*x, y.clone()));
    }
    Ok(hull)
}

fn sort<T: PartialOrd>(v: &mut [T]) {
    v.sort_by(|a, b| a.partial_cmp(b).expect("slopes are comparable"));
}

impl<T: OrderedScalar> fmt::Debug for Polygon<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Polygon{:?}", self.slopes)
    }
}

/// The exact-rational polygon used throughout.
pub type NewtonPolygon = Polygon<Rational>;

impl Polygon<Rational> {
    /// Parses slope strings "num/den" (or integers).
    pub fn parse_slopes(items: &[&str]) -> Result<Self, PolygonError> {
        let slopes = items
            .iter()
            .map(|s| parse_rational(s).ok_or_else(|| PolygonError::Malformed(s.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_slopes(slopes)
    }

    /// `[[num, den, multiplicity], ...]`.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.segments()
                .into_iter()
                .map(|(s, m)| serde_json::json!([bigint_json(s.numer()), bigint_json(s.denom()), m]))
                .collect(),
        )
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self, PolygonError> {
        let bad = || PolygonError::Malformed(value.to_string());
        let rows = value.as_array().ok_or_else(bad)?;
        let mut slopes = Vec::new();
        for row in rows {
            let r = row.as_array().filter(|r| r.len() == 3).ok_or_else(bad)?;
            let num = json_bigint(&r[0]).ok_or_else(bad)?;
            let den = json_bigint(&r[1]).ok_or_else(bad)?;
            let mult = r[2].as_u64().ok_or_else(bad)?;
            if den.is_zero() {
                return Err(bad());
            }
            let s = Rational::new(num, den);
            slopes.extend(std::iter::repeat(s).take(mult as usize));
        }
        Self::from_slopes(slopes)
    }

    /// Vertex rows `x,y_num,y_den` with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y_num,y_den\n");
        for (x, y) in self.vertices() {
            out.push_str(&format!("{x},{},{}\n", y.numer(), y.denom()));
        }
        out
    }

    /// Slopes rendered as "num/den" strings.
    pub fn slope_strings(&self) -> Vec<String> {
        self.slopes.iter().map(rational_string).collect()
    }

    /// Whether every vertex height is a multiple of 1/den.
    pub fn vertex_heights_in(&self, den: u64) -> bool {
        let d = BigInt::from(den);
        self.vertices()
            .iter()
            .all(|(_, y)| (y * Rational::from_integer(d.clone())).is_integer())
    }

    pub fn count_slope(&self, slope: i64) -> usize {
        self.multiplicity(&Rational::from_integer(slope.into()))
    }

    pub fn zero_slopes(&self) -> usize {
        self.slopes.iter().take_while(|s| s.is_zero()).count()
    }
}

fn bigint_json(n: &BigInt) -> serde_json::Value {
    use num_traits::ToPrimitive;
    match n.to_i64() {
        Some(v) => serde_json::json!(v),
        None => serde_json::json!(n.to_string()),
    }
}

fn json_bigint(v: &serde_json::Value) -> Option<BigInt> {
    match v {
        serde_json::Value::Number(n) => n.as_i64().map(BigInt::from),
        serde_json::Value::String(s) => s.parse().ok(),
        _ => None,
    }
}

/// Parses "index,valuation" lines; valuation is "num/den", an integer, or
/// "inf". Blank lines and lines starting with '#' are skipped.
pub fn parse_points(text: &str) -> Result<Vec<(i64, Option<Rational>)>, PolygonError> {
    let mut out = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("index") {
            continue;
        }
        let bad = || PolygonError::Malformed(line.to_string());
        let (i, v) = line.split_once(',').ok_or_else(bad)?;
        let i: i64 = i.trim().parse().map_err(|_| bad())?;
        let v = match v.trim() {
            "inf" | "∞" => None,
            s => Some(parse_rational(s).ok_or_else(bad)?),
        };
        out.push((i, v));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    fn poly(s: &[(i64, i64)]) -> NewtonPolygon {
        NewtonPolygon::from_slopes(s.iter().map(|&(n, d)| r(n, d)).collect()).unwrap()
    }

    #[test]
    fn hull_examples() {
        let h = NewtonPolygon::lower_hull(&[(0, Some(r(0, 1))), (1, Some(r(0, 1))), (2, Some(r(1, 1)))]);
        assert_eq!(h.unwrap(), poly(&[(0, 1), (1, 1)]));
        let h = NewtonPolygon::lower_hull(&[(0, Some(r(0, 1))), (1, Some(r(1, 1))), (2, Some(r(1, 1)))]);
        assert_eq!(h.unwrap(), poly(&[(1, 2), (1, 2)]));
        let h = NewtonPolygon::lower_hull(&[(0, Some(r(0, 1))), (1, None), (2, Some(r(1, 1)))]);
        assert_eq!(h.unwrap(), poly(&[(1, 2), (1, 2)]));
        let h = NewtonPolygon::lower_hull(&[(0, Some(r(0, 1))), (1, Some(r(1, 3))), (2, None)]);
        assert_eq!(h.unwrap(), poly(&[(1, 3)]));
        assert!(matches!(
            NewtonPolygon::lower_hull(&[(0, Some(r(1, 1)))]),
            Err(PolygonError::UnnormalizedConstant(_))
        ));
    }

    #[test]
    fn truncation_and_scaling() {
        let p = poly(&[(0, 1), (1, 2), (1, 1)]);
        assert_eq!(p.truncate_below(&r(1, 1)).unwrap(), poly(&[(0, 1), (1, 2)]));
        assert_eq!(poly(&[(1, 1)]).truncate_below(&r(1, 1)).unwrap(), poly(&[]));
        assert!(p.truncate_below(&r(0, 1)).is_err());
        assert_eq!(poly(&[(1, 2), (1, 2)]).scale(1, 2).unwrap(), poly(&[(1, 2)]));
        assert_eq!(p.scale(1, 1).unwrap(), p);
        assert!(matches!(
            poly(&[(0, 1), (1, 1)]).scale(1, 2),
            Err(PolygonError::NonIntegralScaling { .. })
        ));
    }

    #[test]
    fn comparisons() {
        let a = poly(&[(1, 2), (1, 2)]);
        let b = poly(&[(0, 1), (1, 1)]);
        assert!(a.lies_above(&a));
        assert!(a.lies_above(&b));
        assert!(!b.lies_above(&a));
    }

    #[test]
    fn rescaling() {
        assert_eq!(poly(&[(1, 2)]).rescale_q_to_p(2), poly(&[(1, 1)]));
        assert_eq!(poly(&[(1, 1)]).rescale_variable(2), poly(&[(1, 2), (1, 2)]));
        let p = poly(&[(0, 1), (1, 3), (2, 3)]);
        assert_eq!(p.rescale_variable(3).unscale_variable(3).unwrap(), p);
        assert_eq!(p.rescale_q_to_p(3).rescale_p_to_q(3), p);
    }

    #[test]
    fn exports() {
        let p = poly(&[(0, 1), (1, 2), (1, 2), (1, 1)]);
        assert_eq!(p.to_json().to_string(), "[[0,1,1],[1,2,2],[1,1,1]]");
        assert_eq!(NewtonPolygon::from_json(&p.to_json()).unwrap(), p);
        assert_eq!(p.to_csv(), "x,y_num,y_den\n0,0,1\n1,0,1\n3,1,1\n4,2,1\n");
        let pts = parse_points("0,0\n1,inf\n2,1/1\n").unwrap();
        assert_eq!(NewtonPolygon::lower_hull(&pts).unwrap(), poly(&[(1, 2), (1, 2)]));
        assert!(p.vertex_heights_in(1));
        assert!(!poly(&[(1, 3)]).vertex_heights_in(2));
    }

    #[test]
    fn float_polygons_work() {
        let p = Polygon::<f64>::lower_hull(&[(0, Some(0.0)), (1, Some(1.0)), (2, Some(1.0))]).unwrap();
        assert_eq!(p.slopes(), &[0.5, 0.5]);
    }
}
