//! Polygon utilities on user-supplied files.
//!
//! A polygon file is JSON: either `[[num, den, multiplicity], ...]` or a
//! list of slopes (`["1/2", "1", 0]`). A points file has `index,valuation`
//! lines.

use expsum::cyc::parse_rational;
use expsum::polygon::parse_points;
use expsum::NewtonPolygon;
use serde_json::{json, Value};

use crate::failure::Failure;
use crate::run::Outcome;

fn malformed(msg: impl Into<String>) -> Failure {
    Failure::input("Malformed", msg)
}

pub fn parse_polygon(text: &str) -> Result<NewtonPolygon, Failure> {
    let v: Value = serde_json::from_str(text).map_err(|e| malformed(e.to_string()))?;
    let rows = v.as_array().ok_or_else(|| malformed("polygon must be a JSON array"))?;
    if rows.iter().all(Value::is_array) {
        return NewtonPolygon::from_json(&v).map_err(|e| malformed(e.to_string()));
    }
    let slopes = rows
        .iter()
        .map(|r| {
            let s = match r {
                Value::String(s) => s.clone(),
                Value::Number(n) => n.to_string(),
                _ => return Err(malformed(format!("bad slope {r}"))),
            };
            parse_rational(&s).ok_or_else(|| malformed(format!("bad slope {s}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    NewtonPolygon::from_slopes(slopes).map_err(|e| malformed(e.to_string()))
}

fn describe(np: &NewtonPolygon) -> Value {
    json!({
        "polygon": np.to_json(),
        "slopes": np.slope_strings(),
        "vertices": np
            .vertices()
            .into_iter()
            .map(|(x, y)| json!([x, expsum::cyc::rational_string(&y)]))
            .collect::<Vec<_>>(),
    })
}

fn polygon_outcome(np: &NewtonPolygon) -> Outcome {
    let mut body = serde_json::to_string_pretty(&describe(np)).expect("serializes");
    body.push('\n');
    Outcome {
        body,
        csv: Some(np.to_csv()),
        code: 0,
    }
}

pub fn hull(points: &str) -> Result<Outcome, Failure> {
    let pts = parse_points(points).map_err(|e| malformed(e.to_string()))?;
    let np = NewtonPolygon::lower_hull(&pts).map_err(|e| malformed(e.to_string()))?;
    Ok(polygon_outcome(&np))
}

pub fn concat(a: &str, b: &str) -> Result<Outcome, Failure> {
    Ok(polygon_outcome(&parse_polygon(a)?.concat(&parse_polygon(b)?)))
}

pub fn truncate(a: &str, below: &str) -> Result<Outcome, Failure> {
    let r = parse_rational(below).ok_or_else(|| malformed(format!("bad threshold {below}")))?;
    let np = parse_polygon(a)?
        .truncate_below(&r)
        .map_err(|e| malformed(e.to_string()))?;
    Ok(polygon_outcome(&np))
}

pub fn scale(a: &str, factor: &str) -> Result<Outcome, Failure> {
    let r = parse_rational(factor).ok_or_else(|| malformed(format!("bad factor {factor}")))?;
    let (num, den) = (r.numer(), r.denom());
    let to_u = |x: &num_bigint::BigInt| {
        u64::try_from(x.clone()).map_err(|_| malformed(format!("factor {factor} must be positive")))
    };
    let (num, den) = (to_u(num)?, to_u(den)?);
    if num == 0 {
        return Err(malformed("factor must be positive"));
    }
    let np = parse_polygon(a)?
        .scale(num, den)
        .map_err(|e| Failure::input("NonIntegralScaling", e.to_string()))?;
    Ok(polygon_outcome(&np))
}

pub fn lies_above(a: &str, b: &str) -> Result<Outcome, Failure> {
    let (pa, pb) = (parse_polygon(a)?, parse_polygon(b)?);
    let mut body = serde_json::to_string_pretty(&json!({ "lies_above": pa.lies_above(&pb) }))
        .expect("serializes");
    body.push('\n');
    Ok(Outcome {
        body,
        csv: None,
        code: 0,
    })
}
