//! Case configuration files.

use std::sync::Arc;

use expsum::curve::{Case, CurveModel, Place, RegularFunction};
use expsum::ff::{build_tower, FFElement, FieldTower};
use serde::Deserialize;

use crate::failure::Failure;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseConfig {
    pub p: u32,
    #[serde(default = "one")]
    pub a: usize,
    pub curve: CurveConfig,
    pub boundary: Vec<PlaceConfig>,
    pub f: FunctionConfig,
    #[serde(default)]
    pub options: CaseOptions,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum CurveConfig {
    P1,
    Hyperelliptic { h: Vec<Elem> },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PlaceConfig {
    Finite {
        x: Elem,
        #[serde(default)]
        y: Option<Elem>,
    },
    Infinite {
        #[serde(default)]
        branch: u32,
    },
}

/// An integer (read modulo p, in the prime field) or a coordinate vector
/// over F_p of length at most a.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Elem {
    Int(i64),
    Coords(Vec<i64>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RationalConfig {
    pub num: Vec<Elem>,
    #[serde(default)]
    pub den: Option<Vec<Elem>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaurentConfig {
    pub laurent: Vec<(i64, Elem)>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitConfig {
    pub u: RationalConfig,
    pub v: RationalConfig,
}

/// f as u_num/u_den, as a Laurent polynomial in x, or as u + v·y.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum FunctionConfig {
    Laurent(LaurentConfig),
    Rational(RationalConfig),
    Split(SplitConfig),
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseOptions {
    pub budget: Option<u64>,
    pub slack: Option<usize>,
    #[serde(default)]
    pub oracle: bool,
    #[serde(default)]
    pub cover: bool,
    /// p-adic digits for the oracle.
    pub precision: Option<u32>,
    /// Oracle basis half-width.
    pub basis: Option<i64>,
    pub stability: Option<bool>,
}

pub fn parse_case(value: serde_json::Value) -> Result<CaseConfig, Failure> {
    serde_json::from_value(value).map_err(|e| Failure::input("Schema", e.to_string()))
}

fn elem(t: &Arc<FieldTower>, e: &Elem) -> Result<FFElement, Failure> {
    let p = t.p() as i64;
    match e {
        Elem::Int(n) => Ok(t.from_u32(n.rem_euclid(p) as u32)),
        Elem::Coords(v) => {
            if v.len() > t.a() {
                return Err(Failure::input(
                    "Schema",
                    format!("field element {v:?} has more than a = {} coordinates", t.a()),
                ));
            }
            let c: Vec<u32> = v.iter().map(|x| x.rem_euclid(p) as u32).collect();
            Ok(t.from_base(&c))
        }
    }
}

fn poly(t: &Arc<FieldTower>, v: &[Elem]) -> Result<Vec<FFElement>, Failure> {
    v.iter().map(|e| elem(t, e)).collect()
}

fn rational(t: &Arc<FieldTower>, r: &RationalConfig) -> Result<(Vec<FFElement>, Vec<FFElement>), Failure> {
    let num = poly(t, &r.num)?;
    let den = match &r.den {
        Some(d) => poly(t, d)?,
        None => vec![t.one()],
    };
    Ok((num, den))
}

impl CaseConfig {
    pub fn build(&self) -> Result<Case, Failure> {
        let t = build_tower(self.p, self.a, 1).map_err(Failure::from_field)?;
        let model = match &self.curve {
            CurveConfig::P1 => CurveModel::P1,
            CurveConfig::Hyperelliptic { h } => CurveModel::Hyperelliptic { h: poly(&t, h)? },
        };
        let boundary = self
            .boundary
            .iter()
            .map(|pl| {
                Ok(match pl {
                    PlaceConfig::Finite { x, y } => Place::Finite {
                        x: elem(&t, x)?,
                        y: y.as_ref().map(|y| elem(&t, y)).transpose()?,
                    },
                    PlaceConfig::Infinite { branch } => Place::Infinite { branch: *branch },
                })
            })
            .collect::<Result<Vec<_>, Failure>>()?;
        let f = match &self.f {
            FunctionConfig::Laurent(l) => {
                let terms = l
                    .laurent
                    .iter()
                    .map(|(e, c)| Ok((*e, elem(&t, c)?)))
                    .collect::<Result<Vec<_>, Failure>>()?;
                RegularFunction::laurent(&t, &terms)
            }
            FunctionConfig::Rational(r) => {
                let (num, den) = rational(&t, r)?;
                RegularFunction::rational(&t, num, den)
            }
            FunctionConfig::Split(s) => {
                let (u_num, u_den) = rational(&t, &s.u)?;
                let (v_num, v_den) = rational(&t, &s.v)?;
                RegularFunction {
                    u_num,
                    u_den,
                    v_num,
                    v_den,
                }
            }
        };
        Case::new(&t, model, boundary, f).map_err(Failure::from_curve)
    }
}
