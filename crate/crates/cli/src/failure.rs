//! Errors mapped onto the exit-code contract.

use expsum::curve::CurveError;
use expsum::dwork::DworkError;
use expsum::ff::FfError;
use expsum::lfun::LfunError;
use serde_json::json;

pub const EXIT_OK: u8 = 0;
pub const EXIT_ALERT: u8 = 1;
pub const EXIT_INPUT: u8 = 2;

/// A case that could not be completed: an input error (exit 2) or a
/// failed internal cross-check (exit 1).
#[derive(Debug, Clone)]
pub struct Failure {
    pub code: u8,
    pub kind: String,
    pub message: String,
}

/// Variant name of an error, looking through wrapper variants.
fn kind_of<E: std::fmt::Debug>(e: &E) -> String {
    const WRAPPERS: [&str; 5] = ["Curve", "Field", "Local", "Lfun", "Polygon"];
    let dbg = format!("{e:?}");
    let mut rest = dbg.as_str();
    loop {
        let end = rest
            .find(|c: char| !c.is_alphanumeric() && c != '_')
            .unwrap_or(rest.len());
        let name = &rest[..end];
        if WRAPPERS.contains(&name) && rest[end..].starts_with('(') {
            rest = &rest[end + 1..];
            continue;
        }
        return name.to_string();
    }
}

impl Failure {
    pub fn input(kind: &str, message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_INPUT,
            kind: kind.to_string(),
            message: message.into(),
        }
    }

    pub fn alert(kind: &str, message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_ALERT,
            kind: kind.to_string(),
            message: message.into(),
        }
    }

    pub fn from_field(e: FfError) -> Self {
        Failure::input(&kind_of(&e), e.to_string())
    }

    pub fn from_curve(e: CurveError) -> Self {
        Failure::input(&kind_of(&e), e.to_string())
    }

    pub fn from_lfun(e: LfunError) -> Self {
        let code = if e.is_red_alert() { EXIT_ALERT } else { EXIT_INPUT };
        Failure {
            code,
            kind: kind_of(&e),
            message: e.to_string(),
        }
    }

    pub fn from_dwork(e: DworkError) -> Self {
        match e {
            DworkError::Lfun(e) => Failure::from_lfun(e),
            DworkError::OracleMismatch(_)
            | DworkError::IntegralityFailure(_)
            | DworkError::NoConvergence(_) => Failure::alert(&kind_of(&e), e.to_string()),
            _ => Failure::input(&kind_of(&e), e.to_string()),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "error": self.kind,
            "message": self.message,
            "alert": self.code == EXIT_ALERT,
        })
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.kind, self.message)
    }
}
