//! JSON reports.
//!
//! Field order is fixed by the struct definitions and floats print in
//! shortest round-trip form, so equal inputs give byte-identical output.
//! Wall time is the one non-deterministic field and is opt-in.

use serde::Serialize;
use serde_json::Value;

use bifindex_core::construct::FitReport;
use bifindex_core::degree::{Budget, DegreeResult};
use bifindex_core::error::{Error, Location};
use bifindex_core::jtheory::{JGroupInfo, Verdict};
use bifindex_core::manifold::QuadratureRule;
use bifindex_core::multiplicity::{Certificate, HypothesisReport, MultiplicityReport};

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const FAILURE: i32 = 1;
    pub const INCONCLUSIVE: i32 = 2;
    pub const HYPOTHESIS: i32 = 3;
    pub const CONFIG: i32 = 4;
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Envelope {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub seed: u64,
    pub inputs: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_seconds: Option<f64>,
}

impl Envelope {
    pub fn new(command: &str, seed: u64, inputs: Value) -> Self {
        Envelope {
            tool: "bifindex",
            version: env!("CARGO_PKG_VERSION"),
            command: command.into(),
            seed,
            inputs,
            result: None,
            error: None,
            wall_seconds: None,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ErrorJson {
    pub code: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub location: Option<LocationJson>,
    /// The partial degree behind an inconclusive outcome.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degree: Option<DegreeJson>,
}

/// Stable machine-readable code for each error kind.
pub fn error_code(e: &Error) -> &'static str {
    match e {
        Error::Dimension(_) => "dimension",
        Error::Invalid(_) => "invalid",
        Error::Singular { .. } => "singular",
        Error::NotNormal(_) => "not-normal",
        Error::RootOnAxis { .. } => "root-on-axis",
        Error::StableDimension { .. } => "stable-dimension",
        Error::ShapiroLopatinskij { .. } => "shapiro-lopatinskij",
        Error::CollarDependence { .. } => "collar-dependence",
        Error::NonFinite(_) => "non-finite",
        Error::Quadrature(_) => "quadrature",
        Error::Inconclusive(_) => "inconclusive",
        Error::NotUnitary { .. } => "not-unitary",
        Error::NotDivisible { .. } => "not-divisible",
        Error::NotPrime(_) => "not-prime",
        Error::InadmissibleQ(_) => "inadmissible-q",
    }
}

impl From<&Error> for ErrorJson {
    fn from(e: &Error) -> Self {
        let location = match e {
            Error::Singular { location, .. }
            | Error::RootOnAxis { location, .. }
            | Error::StableDimension { location, .. }
            | Error::ShapiroLopatinskij { location, .. }
            | Error::CollarDependence { location, .. }
            | Error::NotUnitary { location, .. } => Some(location.into()),
            Error::NotNormal(location) => Some(location.into()),
            _ => None,
        };
        let degree = match e {
            Error::Inconclusive(d) => Some(d.as_ref().into()),
            _ => None,
        };
        ErrorJson { code: error_code(e), message: e.to_string(), location, degree }
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct LocationJson {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Vec<f64>>,
    pub at_infinity: bool,
    pub point: Vec<f64>,
    pub covector: Vec<f64>,
}

impl From<&Location> for LocationJson {
    fn from(l: &Location) -> Self {
        LocationJson { lambda: l.lambda.clone(), at_infinity: l.at_infinity, point: l.point.clone(), covector: l.covector.clone() }
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase", rename_all_fields = "camelCase", tag = "kind")]
pub enum RuleJson {
    Product { nodes_per_dim: usize },
    Qmc { points: usize, batches: usize, seed: u64 },
}

impl From<&QuadratureRule> for RuleJson {
    fn from(r: &QuadratureRule) -> Self {
        match *r {
            QuadratureRule::Product { nodes_per_dim } => RuleJson::Product { nodes_per_dim },
            QuadratureRule::QuasiMonteCarlo { points, batches, seed } => RuleJson::Qmc { points, batches, seed },
        }
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BudgetJson {
    pub nodes: usize,
    pub doublings: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rule: Option<RuleJson>,
}

impl From<&Budget> for BudgetJson {
    fn from(b: &Budget) -> Self {
        BudgetJson { nodes: b.nodes, doublings: b.doublings, rule: b.rule.as_ref().map(Into::into) }
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DegreeJson {
    pub raw_re: f64,
    pub raw_im: f64,
    pub rounded: i64,
    pub residual: f64,
    pub error_estimate: f64,
    pub exact: bool,
    pub verdict_grade: bool,
    pub budget: BudgetJson,
}

impl From<&DegreeResult> for DegreeJson {
    fn from(d: &DegreeResult) -> Self {
        DegreeJson {
            raw_re: d.raw.re,
            raw_im: d.raw.im,
            rounded: d.rounded,
            residual: d.residual,
            error_estimate: d.error_estimate,
            exact: d.exact,
            verdict_grade: d.is_verdict_grade(),
            budget: (&d.budget).into(),
        }
    }
}

impl DegreeJson {
    /// Verdict grade under a tolerance tighter than the built-in one.
    pub fn with_tolerance(d: &DegreeResult, residual: f64) -> Self {
        let mut j = DegreeJson::from(d);
        j.verdict_grade &= d.residual < residual;
        j
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CertificateJson {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub threshold: f64,
    pub samples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst: Option<LocationJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl From<&Certificate> for CertificateJson {
    fn from(c: &Certificate) -> Self {
        CertificateJson {
            name: c.name.clone(),
            passed: c.passed,
            value: c.value,
            threshold: c.threshold,
            samples: c.samples,
            worst: c.worst.as_ref().map(Into::into),
            note: c.note.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct HypothesesJson {
    pub passed: bool,
    pub h1: Vec<CertificateJson>,
    pub h2: Vec<CertificateJson>,
    pub h3: Vec<CertificateJson>,
    pub reality_skipped: bool,
    pub gaps: Vec<String>,
}

impl From<&HypothesisReport> for HypothesesJson {
    fn from(h: &HypothesisReport) -> Self {
        let conv = |v: &[Certificate]| v.iter().map(Into::into).collect();
        HypothesesJson {
            passed: h.passed(),
            h1: conv(&h.h1),
            h2: conv(&h.h2),
            h3: conv(&h.h3),
            reality_skipped: h.reality.skipped_complex,
            gaps: h.gaps.clone(),
        }
    }
}

/// A big integer as a JSON number when it fits, else as a decimal string.
fn big(v: &impl ToString) -> Value {
    let s = v.to_string();
    s.parse::<u64>().map(Value::from).unwrap_or(Value::String(s))
}

pub fn jgroup_json(info: &JGroupInfo) -> Value {
    serde_json::json!({
        "q": info.q,
        "s": info.s,
        "m": big(&info.m),
        "n": big(&info.n),
        "jOrder": big(&info.j_order),
    })
}

pub fn verdict_json(v: &Verdict) -> Value {
    serde_json::json!({
        "bifurcates": v.bifurcates,
        "conclusion": if v.bifurcates { "bifurcates" } else { "no conclusion" },
        "mu": v.mu,
        "n": big(&v.n),
        "residue": big(&v.residue),
    })
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct FitJson {
    pub degree: usize,
    pub achieved_error: f64,
    pub target_error: f64,
    pub passed: bool,
    pub min_singular_source: f64,
    pub min_singular_fit: f64,
    pub grid_points: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst: Option<LocationJson>,
}

impl From<&FitReport> for FitJson {
    fn from(f: &FitReport) -> Self {
        FitJson {
            degree: f.degree,
            achieved_error: f.achieved_error,
            target_error: f.target_error,
            passed: f.passed,
            min_singular_source: f.min_singular_source,
            min_singular_fit: f.min_singular_fit,
            grid_points: f.grid_points,
            worst: f.worst.as_ref().map(Into::into),
        }
    }
}

pub fn multiplicity_json(r: &MultiplicityReport, residual: f64) -> Value {
    serde_json::json!({
        "family": r.family,
        "q": r.q,
        "hypotheses": r.hypotheses.as_ref().map(HypothesesJson::from),
        "muInterior": DegreeJson::with_tolerance(&r.mu_interior, residual),
        "muBoundary": DegreeJson::with_tolerance(&r.mu_boundary, residual),
        "muTotal": r.mu_total,
        "realified": r.realified,
        "realificationFactor": r.realification_factor,
        "muVerdict": r.mu_verdict,
        "inconclusive": r.inconclusive,
        "jGroup": r.jgroup.as_ref().map(jgroup_json),
        "verdict": r.verdict.as_ref().map(verdict_json),
        "notes": r.notes,
    })
}
