//! verify, oracle and sweep.

use std::collections::BTreeMap;

use expsum::dwork::{laurent_from_case, oracle_compare, OracleOptions, OracleParams};
use expsum::ff::DEFAULT_BUDGET;
use expsum::lfun::{as_cover_zeta, verify_bound, Options, SumEngine};
use rayon::prelude::*;
use serde::Deserialize;
use serde_json::{json, Map, Value};

use crate::config::{parse_case, CaseConfig};
use crate::failure::{Failure, EXIT_ALERT, EXIT_INPUT, EXIT_OK};

/// Command-line overrides; they take precedence over config options.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub budget: Option<u64>,
    pub slack: Option<usize>,
}

/// Output of one command: body for stdout (or --out), optional CSV, and
/// the exit code.
pub struct Outcome {
    pub body: String,
    pub csv: Option<String>,
    pub code: u8,
}

fn lfun_options(cfg: &CaseConfig, ov: Overrides) -> Options {
    let d = Options::default();
    Options {
        budget: ov.budget.or(cfg.options.budget).unwrap_or(d.budget),
        slack: ov.slack.or(cfg.options.slack).unwrap_or(d.slack),
    }
}

fn oracle_options(cfg: &CaseConfig, case: &expsum::curve::Case, ov: Overrides) -> Result<OracleOptions, Failure> {
    let (f, _) = laurent_from_case(case).map_err(Failure::from_dwork)?;
    let mut params = OracleParams::defaults(&f);
    if let Some(n) = cfg.options.precision {
        params.precision = n;
    }
    if let Some(b) = cfg.options.basis {
        if b < 1 {
            return Err(Failure::input("Schema", "options.basis must be positive"));
        }
        params.basis = b;
        params.t_trunc = (cfg.p as i64 + 1) * b;
    }
    Ok(OracleOptions {
        params: Some(params),
        check_stability: cfg.options.stability.unwrap_or(true),
        lfun: lfun_options(cfg, ov),
    })
}

/// One verification as a JSON report plus the Newton polygon CSV.
pub fn run_case(cfg: &CaseConfig, engine: &SumEngine, ov: Overrides) -> Result<(Value, String), Failure> {
    let case = cfg.build()?;
    let opts = lfun_options(cfg, ov);
    let (report, data) = verify_bound(engine, &case, &opts).map_err(Failure::from_lfun)?;
    let csv = report.polygons.newton_rho.to_csv();
    let mut alerts = report.alerts.clone();
    let mut value = serde_json::to_value(&report).expect("report serializes");
    let obj = value.as_object_mut().expect("report is an object");

    if cfg.options.cover {
        let cover = as_cover_zeta(engine, &data).map_err(Failure::from_lfun)?;
        if !cover.functional_equation_ok {
            alerts.push("cover_functional_equation".into());
        }
        if !cover.counts_match {
            alerts.push("cover_point_counts".into());
        }
        if !cover.corollary_holds {
            alerts.push("cover_corollary".into());
        }
        obj.insert("cover".into(), serde_json::to_value(&cover).expect("serializes"));
    }
    if cfg.options.oracle {
        let oo = oracle_options(cfg, &case, ov)?;
        let rep = oracle_compare(engine, &case, &oo).map_err(Failure::from_dwork)?;
        if !rep.matches {
            alerts.push("oracle_mismatch".into());
        }
        obj.insert("oracle".into(), serde_json::to_value(&rep).expect("serializes"));
    }
    obj.insert("alert".into(), json!(!alerts.is_empty()));
    obj.insert("alerts".into(), json!(alerts));
    Ok((value, csv))
}

fn engine_for(cfg: &CaseConfig, ov: Overrides) -> SumEngine {
    SumEngine::new(ov.budget.or(cfg.options.budget).unwrap_or(DEFAULT_BUDGET))
}

fn failure_outcome(f: Failure) -> Outcome {
    Outcome {
        body: pretty(&f.to_json()),
        csv: None,
        code: f.code,
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializes");
    s.push('\n');
    s
}

pub fn verify(config: Value, ov: Overrides) -> Outcome {
    let cfg = match parse_case(config) {
        Ok(c) => c,
        Err(f) => return failure_outcome(f),
    };
    let engine = engine_for(&cfg, ov);
    match run_case(&cfg, &engine, ov) {
        Ok((report, csv)) => {
            let alert = report["alert"].as_bool().unwrap_or(false);
            let ok = report["lies_above"].as_bool().unwrap_or(false);
            Outcome {
                body: pretty(&report),
                csv: Some(csv),
                code: if alert || !ok { EXIT_ALERT } else { EXIT_OK },
            }
        }
        Err(f) => failure_outcome(f),
    }
}

pub fn oracle(config: Value, ov: Overrides) -> Outcome {
    let run = || -> Result<(Value, String, bool), Failure> {
        let cfg = parse_case(config)?;
        let case = cfg.build()?;
        let oo = oracle_options(&cfg, &case, ov)?;
        let engine = engine_for(&cfg, ov);
        let rep = oracle_compare(&engine, &case, &oo).map_err(Failure::from_dwork)?;
        let mut csv = String::from("x,y\n");
        for (x, y) in &rep.fredholm_vertices {
            csv.push_str(&format!("{x},{y}\n"));
        }
        Ok((serde_json::to_value(&rep).expect("serializes"), csv, rep.matches))
    };
    match run() {
        Ok((v, csv, matches)) => Outcome {
            body: pretty(&v),
            csv: Some(csv),
            code: if matches { EXIT_OK } else { EXIT_ALERT },
        },
        Err(f) => failure_outcome(f),
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepConfig {
    template: Value,
    #[serde(default)]
    params: BTreeMap<String, Vec<Value>>,
    /// Parameters whose value must be prime to p; other combinations are
    /// skipped.
    #[serde(default)]
    coprime_to_p: Vec<String>,
}

/// Replaces "$name" by the parameter value and "-$name" by its negation.
fn substitute(v: &Value, binding: &BTreeMap<String, Value>) -> Value {
    match v {
        Value::String(s) => {
            if let Some(name) = s.strip_prefix('$') {
                if let Some(x) = binding.get(name) {
                    return x.clone();
                }
            }
            if let Some(name) = s.strip_prefix("-$") {
                if let Some(n) = binding.get(name).and_then(Value::as_i64) {
                    return json!(-n);
                }
            }
            v.clone()
        }
        Value::Array(a) => Value::Array(a.iter().map(|x| substitute(x, binding)).collect()),
        Value::Object(o) => Value::Object(
            o.iter()
                .map(|(k, x)| (k.clone(), substitute(x, binding)))
                .collect::<Map<_, _>>(),
        ),
        _ => v.clone(),
    }
}

fn combinations(params: &BTreeMap<String, Vec<Value>>) -> Vec<BTreeMap<String, Value>> {
    let mut out = vec![BTreeMap::new()];
    for (name, values) in params {
        out = out
            .into_iter()
            .flat_map(|b| {
                values.iter().map(move |v| {
                    let mut b = b.clone();
                    b.insert(name.clone(), v.clone());
                    b
                })
            })
            .collect();
    }
    out
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

enum CaseResult {
    Report(Value),
    Failed(Failure),
}

/// Attainment tally for one (p, [d_i, p mod d_i]) group.
#[derive(Default)]
struct Group {
    attained: u64,
    total: u64,
}

pub fn sweep(config: Value, ov: Overrides) -> Outcome {
    let sc: SweepConfig = match serde_json::from_value(config) {
        Ok(s) => s,
        Err(e) => return failure_outcome(Failure::input("Schema", e.to_string())),
    };
    let mut skipped = 0u64;
    let mut cases = Vec::new();
    for binding in combinations(&sc.params) {
        let value = substitute(&sc.template, &binding);
        if let Some(p) = value.get("p").and_then(Value::as_u64) {
            let prime_to_p = sc.coprime_to_p.iter().all(|name| {
                binding
                    .get(name)
                    .and_then(Value::as_i64)
                    .is_none_or(|d| gcd(d.unsigned_abs(), p) == 1)
            });
            if !prime_to_p {
                skipped += 1;
                continue;
            }
        }
        cases.push((binding, value));
    }

    let budget = ov
        .budget
        .or_else(|| sc.template.pointer("/options/budget").and_then(Value::as_u64))
        .unwrap_or(DEFAULT_BUDGET);
    let engine = SumEngine::new(budget);
    let results: Vec<CaseResult> = cases
        .par_iter()
        .map(|(_, value)| match parse_case(value.clone()) {
            Ok(cfg) => match run_case(&cfg, &engine, ov) {
                Ok((r, _)) => CaseResult::Report(r),
                Err(f) => CaseResult::Failed(f),
            },
            Err(f) => CaseResult::Failed(f),
        })
        .collect();

    let mut body = String::new();
    let mut csv = String::from("case,p,swans,degree_rho,lies_above,attained,newton_rho,hodge_rho\n");
    let (mut ok, mut alerts, mut errors) = (0u64, 0u64, 0u64);
    let mut code = EXIT_OK;
    let mut all_above = true;
    let mut groups: BTreeMap<(u64, Vec<(u64, u64)>), Group> = BTreeMap::new();
    let (mut robba_agree, mut robba_disagree) = (0u64, 0u64);

    for (i, ((binding, _), res)) in cases.iter().zip(&results).enumerate() {
        let mut line = json!({ "case": i, "params": binding });
        match res {
            CaseResult::Report(r) => {
                let alert = r["alert"].as_bool().unwrap_or(false);
                let above = r["lies_above"].as_bool().unwrap_or(false);
                all_above &= above;
                if alert || !above {
                    alerts += 1;
                    code = EXIT_ALERT;
                } else {
                    ok += 1;
                }
                let p = r["p"].as_u64().unwrap_or(0);
                let swans: Vec<u64> = r["swans"]
                    .as_array()
                    .map(|a| a.iter().filter_map(Value::as_u64).collect())
                    .unwrap_or_default();
                let attained = r["attained"].as_bool().unwrap_or(false);
                let mut key: Vec<(u64, u64)> = swans.iter().map(|&d| (d, p % d)).collect();
                key.sort_unstable();
                let g = groups.entry((p, key)).or_default();
                g.total += 1;
                g.attained += attained as u64;
                let predicted = swans.iter().all(|&d| (p - 1) % d == 0);
                if predicted == attained {
                    robba_agree += 1;
                } else {
                    robba_disagree += 1;
                }
                csv.push_str(&format!(
                    "{i},{p},{},{},{above},{attained},{},{}\n",
                    swans.iter().map(u64::to_string).collect::<Vec<_>>().join(" "),
                    r["degree_rho"],
                    slope_cell(&r["newton_rho"]),
                    slope_cell(&r["hodge_rho"]),
                ));
                line["report"] = r.clone();
            }
            CaseResult::Failed(f) => {
                errors += 1;
                if f.code == EXIT_ALERT {
                    alerts += 1;
                    code = EXIT_ALERT;
                } else if code == EXIT_OK {
                    code = EXIT_INPUT;
                }
                line["error"] = json!(f.kind);
                line["message"] = json!(f.message);
                line["alert"] = json!(f.code == EXIT_ALERT);
            }
        }
        body.push_str(&serde_json::to_string(&line).expect("serializes"));
        body.push('\n');
    }

    let attainment: Vec<Value> = groups
        .into_iter()
        .map(|((p, key), g)| {
            json!({
                "p": p,
                "residues": key.iter().map(|(d, r)| json!([d, r])).collect::<Vec<_>>(),
                "robba_predicts_attained": key.iter().all(|(d, _)| (p - 1) % d == 0),
                "attained": g.attained,
                "total": g.total,
            })
        })
        .collect();
    let summary = json!({
        "summary": {
            "cases": cases.len(),
            "ok": ok,
            "alerts": alerts,
            "errors": errors,
            "skipped": skipped,
            "lies_above_all": all_above,
            "attainment": attainment,
            "robba_agreement": robba_agree,
            "robba_disagreement": robba_disagree,
        }
    });
    body.push_str(&serde_json::to_string(&summary).expect("serializes"));
    body.push('\n');
    Outcome {
        body,
        csv: Some(csv),
        code,
    }
}

/// Space-separated slopes of a polygon in report JSON.
fn slope_cell(v: &Value) -> String {
    let mut out = Vec::new();
    for row in v.as_array().into_iter().flatten() {
        let (n, d, m) = (&row[0], &row[1], row[2].as_u64().unwrap_or(0));
        for _ in 0..m {
            out.push(format!("{n}/{d}"));
        }
    }
    out.join(" ")
}
