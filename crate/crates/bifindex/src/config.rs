//! TOML problem configuration.
//!
//! A config names a family either by builtin name or by coefficient tables
//! whose entries are expression strings (see [`crate::expr`]). Unknown keys
//! are rejected, and dimensions are checked when the file is loaded.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use bifindex_core::catalog::{builtin_family, BuiltFamily, FamilyOptions, MapOptions};
use bifindex_core::degree::DegreeOptions;
use bifindex_core::geometry::Domain;
use bifindex_core::manifold::QuadratureRule;
use bifindex_core::multiplicity::SamplingPlan;
use bifindex_core::symbol::{
    BoundaryCoefficient, BoundaryRow, BoundarySymbol, CoefficientField, InteriorSymbol, MultiIndex, Param,
    RowBoundary, SymbolFamily, Term,
};
use bifindex_core::{CMat, C64};

use crate::expr::{self, Env, Expr, Var};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub problem: Option<Problem>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geometry: Option<Geometry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symbol: Option<SymbolSource>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<MapConfig>,
    #[serde(default)]
    pub quadrature: Quadrature,
    #[serde(default)]
    pub sampling: Sampling,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub fit: Fit,
}

/// Dimensions and flags. `m`, `k`, `r` are optional cross-checks for
/// explicit symbols and size parameters for builtins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Problem {
    pub q: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// The family is the realification of a complex one.
    #[serde(default)]
    pub realified: bool,
    /// Coefficients are complex; the reality condition is not required.
    #[serde(default)]
    pub complex: bool,
    /// `τ` compares `[symbol.boundary]` with `[symbol.alt_boundary]`.
    #[serde(default)]
    pub two_family: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Geometry {
    Ball { radius: f64 },
    /// Radii default to `1/2, 1/4, …`.
    Torus {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        radii: Option<Vec<f64>>,
    },
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymbolSource {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builtin: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub interior: Vec<InteriorTerm>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub boundary: Vec<BoundaryRowConfig>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub alt_boundary: Vec<BoundaryRowConfig>,
}

/// `a_α(λ, x) ξ^α`; `at_infinity` is required when the matrix uses `lambda`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InteriorTerm {
    pub index: Vec<u32>,
    pub matrix: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub at_infinity: Option<Vec<Vec<String>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryRowConfig {
    pub order: usize,
    pub terms: Vec<BoundaryTerm>,
}

/// The `ν^power` coefficient of a row: `1×m` entries in `lambda`, `x`, `xi`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryTerm {
    pub power: usize,
    pub row: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub at_infinity: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapConfig {
    pub builtin: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<i32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleKind {
    #[default]
    Auto,
    Product,
    Qmc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Quadrature {
    pub rule: RuleKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nodes_per_dim: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    pub batches: usize,
    pub seed: u64,
    /// Total node budget for `rule = "auto"`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budget: Option<usize>,
    pub auto_double: bool,
    pub fd_step: f64,
}

impl Default for Quadrature {
    fn default() -> Self {
        let d = DegreeOptions::default();
        Quadrature {
            rule: RuleKind::Auto,
            nodes_per_dim: None,
            points: None,
            batches: 8,
            seed: 0,
            budget: None,
            auto_double: d.auto_double,
            fd_step: d.fd_step,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Sampling {
    pub interior: usize,
    pub boundary: usize,
    pub lambda_radius: f64,
    pub decay_radius: f64,
    pub seed: u64,
}

impl Default for Sampling {
    fn default() -> Self {
        let p = SamplingPlan::default();
        Sampling {
            interior: p.interior,
            boundary: p.boundary,
            lambda_radius: p.lambda_radius,
            decay_radius: p.decay_radius,
            seed: p.seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// A degree is verdict grade when its residual is below this; at most 0.25.
    pub residual: f64,
    pub ellipticity: f64,
    pub reality: f64,
    pub decay: f64,
    pub commutator: f64,
    /// Sup-grid error allowed for the fitted boundary symbol.
    pub fit_error: f64,
}

/// Ceiling for [`Tolerances::residual`].
pub const MAX_RESIDUAL: f64 = 0.25;

impl Default for Tolerances {
    fn default() -> Self {
        let p = SamplingPlan::default();
        Tolerances {
            residual: MAX_RESIDUAL,
            ellipticity: p.ellipticity_threshold,
            reality: p.reality_tolerance,
            decay: p.decay_tolerance,
            commutator: p.commutator_tolerance,
            fit_error: bifindex_core::construct::ExampleParams::default().target_error,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Fit {
    pub degree: usize,
    pub base_points: usize,
    pub seed: u64,
}

impl Default for Fit {
    fn default() -> Self {
        let e = bifindex_core::construct::ExampleParams::default();
        Fit { degree: e.fit_degree, base_points: e.fit_base, seed: e.seed }
    }
}

/// Load or validation failure, located in the file where possible.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub struct ConfigError {
    /// Dotted key path, e.g. `symbol.interior[1].matrix[0][0]`.
    pub path: String,
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub message: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match (self.line, self.column) {
            (Some(l), Some(c)) => write!(f, "line {l}, column {c}: ")?,
            (Some(l), None) => write!(f, "line {l}: ")?,
            _ => {}
        }
        if !self.path.is_empty() {
            write!(f, "{}: ", self.path)?;
        }
        f.write_str(&self.message)
    }
}

impl ConfigError {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError { path: path.into(), line: None, column: None, message: message.into() }
    }

    fn locate(mut self, text: Option<&str>, needle: &str, offset: usize) -> Self {
        if let Some(text) = text {
            if let Some(at) = text.find(&format!("\"{needle}\"")) {
                let (line, column) = line_column(text, at + 1);
                self.line = Some(line);
                self.column = Some(column + offset);
            }
        }
        self
    }
}

fn line_column(text: &str, byte: usize) -> (usize, usize) {
    let before = &text[..byte.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

/// Parse and validate.
pub fn parse_config(text: &str) -> Result<ProblemConfig, ConfigError> {
    let cfg: ProblemConfig = toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map(|s| line_column(text, s.start)).unzip();
        ConfigError { path: String::new(), line, column, message: e.message().trim().to_string() }
    })?;
    cfg.validate_in(Some(text))?;
    Ok(cfg)
}

pub fn to_toml(cfg: &ProblemConfig) -> String {
    toml::to_string(cfg).expect("config types serialize to TOML")
}

/// An entry compiled together with its location for error messages.
struct Compiled {
    expr: Expr,
}

fn compile(src: &str, path: &str, dims: &[(Var, usize)], text: Option<&str>) -> Result<Compiled, ConfigError> {
    let expr = expr::parse(src).map_err(|e| {
        ConfigError::new(path, format!("{} (column {} of {src:?})", e.message, e.column)).locate(text, src, e.column - 1)
    })?;
    expr.check_indices(dims).map_err(|m| ConfigError::new(path, m).locate(text, src, 0))?;
    Ok(Compiled { expr })
}

fn compile_matrix(
    rows: &[Vec<String>],
    size: (usize, usize),
    path: &str,
    dims: &[(Var, usize)],
    text: Option<&str>,
) -> Result<Vec<Compiled>, ConfigError> {
    if rows.len() != size.0 || rows.iter().any(|r| r.len() != size.1) {
        let shape: Vec<usize> = rows.iter().map(Vec::len).collect();
        return Err(ConfigError::new(
            path,
            format!("expected a {}×{} matrix, got rows of lengths {shape:?}", size.0, size.1),
        ));
    }
    let mut out = Vec::with_capacity(size.0 * size.1);
    for (i, row) in rows.iter().enumerate() {
        for (j, src) in row.iter().enumerate() {
            out.push(compile(src, &format!("{path}[{i}][{j}]"), dims, text)?);
        }
    }
    Ok(out)
}

impl ProblemConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.validate_in(None)
    }

    fn validate_in(&self, text: Option<&str>) -> Result<(), ConfigError> {
        if !(self.tolerances.residual > 0.0 && self.tolerances.residual <= MAX_RESIDUAL) {
            return Err(ConfigError::new(
                "tolerances.residual",
                format!("must lie in (0, {MAX_RESIDUAL}], got {}", self.tolerances.residual),
            ));
        }
        match self.quadrature.rule {
            RuleKind::Product if self.quadrature.nodes_per_dim.is_none() => {
                return Err(ConfigError::new("quadrature.nodes_per_dim", "required for rule = \"product\""))
            }
            RuleKind::Qmc if self.quadrature.points.is_none() => {
                return Err(ConfigError::new("quadrature.points", "required for rule = \"qmc\""))
            }
            _ => {}
        }
        if self.quadrature.batches < 2 {
            return Err(ConfigError::new("quadrature.batches", "at least 2 batches are needed for an error estimate"));
        }
        let Some(symbol) = &self.symbol else { return Ok(()) };
        let problem = self
            .problem
            .as_ref()
            .ok_or_else(|| ConfigError::new("problem", "a [symbol] section needs a [problem] section with q"))?;
        if problem.q == 0 {
            return Err(ConfigError::new("problem.q", "the parameter dimension must be positive"));
        }
        match &symbol.builtin {
            Some(_) => {
                if !symbol.interior.is_empty() || !symbol.boundary.is_empty() || !symbol.alt_boundary.is_empty() {
                    return Err(ConfigError::new("symbol", "give either builtin or coefficient tables, not both"));
                }
                if self.geometry.is_some() {
                    return Err(ConfigError::new("geometry", "builtin families fix their own geometry"));
                }
                if let (Some(k), Some(m), Some(r)) = (problem.k, problem.m, problem.r) {
                    check_arithmetic(k, m, r)?;
                }
                Ok(())
            }
            None => self.explicit_parts(problem, symbol, text).map(|_| ()),
        }
    }

    fn explicit_parts(
        &self,
        problem: &Problem,
        symbol: &SymbolSource,
        text: Option<&str>,
    ) -> Result<ExplicitParts, ConfigError> {
        let n = problem.n.ok_or_else(|| ConfigError::new("problem.n", "required for explicit symbols"))?;
        let q = problem.q;
        let geometry = self
            .geometry
            .as_ref()
            .ok_or_else(|| ConfigError::new("geometry", "required for explicit symbols"))?;
        let domain = match geometry {
            Geometry::Ball { radius } => Domain::ball(n, *radius),
            Geometry::Torus { radii: None } => Domain::torus(n),
            Geometry::Torus { radii: Some(r) } => {
                if r.len() + 1 != n {
                    return Err(ConfigError::new(
                        "geometry.radii",
                        format!("a solid torus in ℝ^{n} needs {} radii, got {}", n - 1, r.len()),
                    ));
                }
                Domain::torus_with_radii(r.clone())
            }
        }
        .map_err(|e| ConfigError::new("geometry", e.to_string()))?;

        let first = symbol.interior.first().ok_or_else(|| ConfigError::new("symbol.interior", "no terms"))?;
        let m = first.matrix.len();
        let k = first.index.iter().sum::<u32>() as usize;
        let lx = [(Var::Lambda, q), (Var::X, n)];
        let x_only = [(Var::X, n)];
        let mut interior = Vec::new();
        for (t, term) in symbol.interior.iter().enumerate() {
            let path = format!("symbol.interior[{t}]");
            if term.index.len() != n {
                return Err(ConfigError::new(
                    format!("{path}.index"),
                    format!("multi-index of length {} for n = {n}", term.index.len()),
                ));
            }
            let order = term.index.iter().sum::<u32>() as usize;
            if order != k {
                return Err(ConfigError::new(
                    format!("{path}.index"),
                    format!("principal part must be homogeneous: order {order}, first term has order {k}"),
                ));
            }
            let matrix = compile_matrix(&term.matrix, (m, m), &format!("{path}.matrix"), &lx, text)?;
            let uses_lambda = matrix.iter().any(|c| c.expr.uses(Var::Lambda));
            let at_infinity = match (&term.at_infinity, uses_lambda) {
                (Some(inf), _) => Some(compile_matrix(inf, (m, m), &format!("{path}.at_infinity"), &x_only, text)?),
                (None, true) => {
                    return Err(ConfigError::new(
                        format!("{path}.at_infinity"),
                        "the matrix depends on lambda, so its value at λ = ∞ must be given",
                    ))
                }
                (None, false) => None,
            };
            interior.push((MultiIndex::new(term.index.clone()), ExprMatrix::new(matrix, at_infinity, m, m)));
        }
        let boundary = compile_rows(&symbol.boundary, "symbol.boundary", m, q, n, text)?;
        let r = boundary.len();
        let alt = if symbol.alt_boundary.is_empty() {
            None
        } else {
            Some(compile_rows(&symbol.alt_boundary, "symbol.alt_boundary", m, q, n, text)?)
        };
        if problem.two_family != alt.is_some() {
            return Err(ConfigError::new(
                "problem.two_family",
                "two_family = true exactly when [[symbol.alt_boundary]] rows are given",
            ));
        }
        if let Some(a) = &alt {
            if a.len() != r {
                return Err(ConfigError::new("symbol.alt_boundary", format!("{} rows, expected {r}", a.len())));
            }
        }
        for (name, given, actual) in [("m", problem.m, m), ("k", problem.k, k), ("r", problem.r, r)] {
            if let Some(g) = given {
                if g != actual {
                    return Err(ConfigError::new(format!("problem.{name}"), format!("declared {g}, symbol tables give {actual}")));
                }
            }
        }
        check_arithmetic(k, m, r)?;
        Ok(ExplicitParts { domain, interior, boundary, alt, k, m })
    }

    /// Degree options for the `[quadrature]` section.
    pub fn degree_options(&self) -> DegreeOptions {
        let q = &self.quadrature;
        let rule = match q.rule {
            RuleKind::Auto => None,
            RuleKind::Product => Some(QuadratureRule::Product { nodes_per_dim: q.nodes_per_dim.unwrap_or(64) }),
            RuleKind::Qmc => Some(QuadratureRule::QuasiMonteCarlo {
                points: q.points.unwrap_or(1 << 20),
                batches: q.batches,
                seed: q.seed,
            }),
        };
        DegreeOptions { rule, auto_double: q.auto_double, fd_step: q.fd_step, budget: q.budget, seed: q.seed }
    }

    pub fn sampling_plan(&self) -> SamplingPlan {
        let (s, t) = (&self.sampling, &self.tolerances);
        SamplingPlan {
            interior: s.interior,
            boundary: s.boundary,
            lambda_radius: s.lambda_radius,
            decay_radius: s.decay_radius,
            seed: s.seed,
            ellipticity_threshold: t.ellipticity,
            reality_tolerance: t.reality,
            decay_tolerance: t.decay,
            commutator_tolerance: t.commutator,
        }
    }

    pub fn family_options(&self) -> FamilyOptions {
        let d = FamilyOptions::default();
        let p = self.problem.as_ref();
        let builtin = self.symbol.as_ref().and_then(|s| s.builtin.as_deref());
        let default_m = if builtin == Some("clutched-example") { 8 } else { d.m };
        FamilyOptions {
            q: p.map_or(d.q, |p| p.q),
            n: p.and_then(|p| p.n).unwrap_or(d.n),
            m: p.and_then(|p| p.m).unwrap_or(default_m),
            l: p.and_then(|p| p.k).map_or(d.l, |k| (k / 2).max(1)),
            fit_degree: self.fit.degree,
            fit_base: self.fit.base_points,
            target_error: self.tolerances.fit_error,
            seed: self.fit.seed,
        }
    }

    pub fn map_options(&self) -> MapOptions {
        let d = MapOptions::default();
        let p = self.problem.as_ref();
        let m = self.map.as_ref();
        MapOptions {
            k: m.and_then(|m| m.k).unwrap_or(d.k),
            v: m.and_then(|m| m.v).unwrap_or(d.v),
            q: p.map_or(d.q, |p| p.q),
            n: p.and_then(|p| p.n).unwrap_or(d.n),
        }
    }

    /// Build the configured family.
    pub fn build_family(&self) -> Result<BuiltFamily, ConfigError> {
        let symbol = self.symbol.as_ref().ok_or_else(|| ConfigError::new("symbol", "no [symbol] section"))?;
        let problem = self.problem.as_ref().ok_or_else(|| ConfigError::new("problem", "no [problem] section"))?;
        if let Some(name) = &symbol.builtin {
            let mut built = builtin_family(name, &self.family_options())
                .map_err(|e| ConfigError::new("symbol.builtin", e.to_string()))?;
            if problem.realified {
                built.family.realified = true;
            }
            if problem.complex {
                built.family.complex = true;
            }
            if let Some(k) = problem.k {
                if built.family.interior.order() != k {
                    return Err(ConfigError::new(
                        "problem.k",
                        format!("builtin {name} has order {}, declared {k}", built.family.interior.order()),
                    ));
                }
            }
            check_arithmetic(built.family.interior.order(), built.family.interior.size(), built.family.r())?;
            return Ok(built);
        }
        let parts = self.explicit_parts(problem, symbol, None)?;
        let terms = parts
            .interior
            .into_iter()
            .map(|(index, field)| Term { index, coefficient: Arc::new(field) as Arc<dyn CoefficientField> })
            .collect();
        let n = parts.domain.dim();
        let interior = InteriorSymbol::new(parts.k, parts.m, n, terms).map_err(|e| ConfigError::new("symbol.interior", e.to_string()))?;
        let boundary = BoundarySymbol::new(
            RowBoundary::new(parts.m, parts.boundary).map_err(|e| ConfigError::new("symbol.boundary", e.to_string()))?,
        );
        let mut family = SymbolFamily::new(interior, boundary, problem.q, parts.domain)
            .map_err(|e| ConfigError::new("symbol", e.to_string()))?;
        if let Some(alt) = parts.alt {
            family.alt_boundary = Some(BoundarySymbol::new(
                RowBoundary::new(parts.m, alt).map_err(|e| ConfigError::new("symbol.alt_boundary", e.to_string()))?,
            ));
            family.validate().map_err(|e| ConfigError::new("symbol.alt_boundary", e.to_string()))?;
        }
        family.complex = problem.complex;
        family.realified = problem.realified;
        family.name = problem.name.clone().unwrap_or_else(|| "configured".into());
        Ok(family.into())
    }
}

fn check_arithmetic(k: usize, m: usize, r: usize) -> Result<(), ConfigError> {
    if k * m != 2 * r {
        return Err(ConfigError::new(
            "problem",
            format!("proper ellipticity needs k·m = 2r (order × size = twice the number of boundary rows), got k={k}, m={m}, r={r}"),
        ));
    }
    Ok(())
}

struct ExplicitParts {
    domain: Domain,
    interior: Vec<(MultiIndex, ExprMatrix)>,
    boundary: Vec<BoundaryRow>,
    alt: Option<Vec<BoundaryRow>>,
    k: usize,
    m: usize,
}

fn compile_rows(
    rows: &[BoundaryRowConfig],
    path: &str,
    m: usize,
    q: usize,
    n: usize,
    text: Option<&str>,
) -> Result<Vec<BoundaryRow>, ConfigError> {
    let dims = [(Var::Lambda, q), (Var::X, n), (Var::Xi, n)];
    let no_lambda = [(Var::X, n), (Var::Xi, n)];
    let mut out = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        let mut coefficients: Vec<Option<Arc<dyn BoundaryCoefficient>>> = vec![None; row.order + 1];
        for (j, term) in row.terms.iter().enumerate() {
            let tp = format!("{path}[{i}].terms[{j}]");
            if term.power > row.order {
                return Err(ConfigError::new(
                    format!("{tp}.power"),
                    format!("ν^{} in a row of order {}", term.power, row.order),
                ));
            }
            if coefficients[term.power].is_some() {
                return Err(ConfigError::new(format!("{tp}.power"), format!("ν^{} given twice", term.power)));
            }
            let entries = compile_matrix(std::slice::from_ref(&term.row), (1, m), &format!("{tp}.row"), &dims, text)?;
            let uses_lambda = entries.iter().any(|c| c.expr.uses(Var::Lambda));
            let at_infinity = match (&term.at_infinity, uses_lambda) {
                (Some(inf), _) => Some(compile_matrix(
                    std::slice::from_ref(inf),
                    (1, m),
                    &format!("{tp}.at_infinity"),
                    &no_lambda,
                    text,
                )?),
                (None, true) => {
                    return Err(ConfigError::new(
                        format!("{tp}.at_infinity"),
                        "the row depends on lambda, so its value at λ = ∞ must be given",
                    ))
                }
                (None, false) => None,
            };
            coefficients[term.power] = Some(Arc::new(ExprMatrix::new(entries, at_infinity, 1, m)));
        }
        out.push(BoundaryRow { order: row.order, coefficients });
    }
    Ok(out)
}

/// A matrix of expressions with an optional separate value at `λ = ∞`.
struct ExprMatrix {
    entries: Vec<Expr>,
    at_infinity: Option<Vec<Expr>>,
    rows: usize,
    cols: usize,
    lambda_dependent: bool,
}

impl ExprMatrix {
    fn new(entries: Vec<Compiled>, at_infinity: Option<Vec<Compiled>>, rows: usize, cols: usize) -> Self {
        let entries: Vec<Expr> = entries.into_iter().map(|c| c.expr).collect();
        let lambda_dependent = entries.iter().any(|e| e.uses(Var::Lambda));
        ExprMatrix {
            entries,
            at_infinity: at_infinity.map(|v| v.into_iter().map(|c| c.expr).collect()),
            rows,
            cols,
            lambda_dependent,
        }
    }

    fn eval(&self, lambda: &Param, x: &[f64], xi: &[f64]) -> bifindex_core::Result<CMat> {
        let (exprs, lam): (&[Expr], &[f64]) = match lambda {
            Param::Infinity => (self.at_infinity.as_deref().unwrap_or(&self.entries), &[]),
            Param::Finite(l) => (&self.entries, l),
        };
        let env = Env { lambda: lam, x, xi };
        let mut values = Vec::with_capacity(exprs.len());
        for e in exprs {
            values.push(e.eval(&env).map_err(bifindex_core::Error::Invalid)?);
        }
        Ok(CMat::from_row_iterator(self.rows, self.cols, values.into_iter().map(|v: C64| v)))
    }
}

impl CoefficientField for ExprMatrix {
    fn eval(&self, lambda: &Param, x: &[f64]) -> bifindex_core::Result<CMat> {
        ExprMatrix::eval(self, lambda, x, &[])
    }
    fn depends_on_lambda(&self) -> bool {
        self.lambda_dependent
    }
}

impl BoundaryCoefficient for ExprMatrix {
    fn eval(&self, lambda: &Param, x: &[f64], xi_t: &[f64]) -> bifindex_core::Result<CMat> {
        ExprMatrix::eval(self, lambda, x, xi_t)
    }
    fn depends_on_lambda(&self) -> bool {
        self.lambda_dependent
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[problem]
q = 1

[symbol]
builtin = "laplacian-dirichlet"
"#;

    const EXPLICIT: &str = r#"
[problem]
q = 2
n = 3
name = "scaled-laplacian"

[geometry]
kind = "torus"

[[symbol.interior]]
index = [2, 0, 0]
matrix = [["1 + 0.5*exp(-lambda[1]^2)"]]
at_infinity = [["1"]]

[[symbol.interior]]
index = [0, 2, 0]
matrix = [["1"]]

[[symbol.interior]]
index = [0, 0, 2]
matrix = [["1"]]

[[symbol.boundary]]
order = 0
terms = [{ power = 0, row = ["1"] }]
"#;

    #[test]
    fn minimal_builtin_config() {
        let cfg = parse_config(MINIMAL).unwrap();
        let f = cfg.build_family().unwrap().family;
        assert_eq!((f.interior.size(), f.interior.order(), f.r()), (1, 2, 1));
    }

    #[test]
    fn explicit_config_builds_and_evaluates() {
        let cfg = parse_config(EXPLICIT).unwrap();
        let f = cfg.build_family().unwrap().family;
        assert_eq!(f.name, "scaled-laplacian");
        assert!(f.interior.depends_on_lambda());
        let p = f.interior.eval(&Param::Finite(vec![0.0, 0.0]), &[0.5, 0.0, 0.0], &[1.0, 0.0, 0.0]).unwrap();
        assert!((p[(0, 0)].re - 1.5).abs() < 1e-15);
        let p = f.interior.eval(&Param::Infinity, &[0.5, 0.0, 0.0], &[1.0, 0.0, 0.0]).unwrap();
        assert!((p[(0, 0)].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn round_trip() {
        for text in [MINIMAL, EXPLICIT] {
            let cfg = parse_config(text).unwrap();
            let again = parse_config(&to_toml(&cfg)).unwrap();
            assert_eq!(cfg, again);
        }
    }

    #[test]
    fn arithmetic_mismatch_names_proper_ellipticity() {
        let text = EXPLICIT.replace("order = 0\nterms = [{ power = 0, row = [\"1\"] }]", "order = 0\nterms = [{ power = 0, row = [\"1\"] }]\n\n[[symbol.boundary]]\norder = 1\nterms = [{ power = 1, row = [\"1\"] }]");
        let err = parse_config(&text).unwrap_err();
        assert!(err.message.contains("k·m = 2r"), "{err}");
        let err = parse_config("[problem]\nq = 1\nk = 2\nm = 1\nr = 2\n[symbol]\nbuiltin = \"laplacian-dirichlet\"\n").unwrap_err();
        assert!(err.message.contains("proper ellipticity"), "{err}");
    }

    #[test]
    fn unknown_keys_are_rejected_with_a_line() {
        let err = parse_config("[problem]\nq = 1\nbogus = 3\n").unwrap_err();
        assert_eq!(err.line, Some(3));
        assert!(err.message.contains("bogus"), "{err}");
        let err = parse_config("[quadrature]\nrule = \"simpson\"\n").unwrap_err();
        assert_eq!(err.line, Some(2));
    }

    #[test]
    fn malformed_expression_is_located() {
        let text = EXPLICIT.replace("1 + 0.5*exp(-lambda[1]^2)", "1 + 0.5*exp(-lambda[1]^2");
        let err = parse_config(&text).unwrap_err();
        assert_eq!(err.path, "symbol.interior[0].matrix[0][0]");
        let line = text.lines().position(|l| l.contains("0.5*exp")).unwrap() + 1;
        assert_eq!(err.line, Some(line));
        assert!(err.column.is_some());
    }

    #[test]
    fn lambda_dependence_needs_a_value_at_infinity() {
        let text = EXPLICIT.replace("at_infinity = [[\"1\"]]\n", "");
        let err = parse_config(&text).unwrap_err();
        assert_eq!(err.path, "symbol.interior[0].at_infinity");
    }

    #[test]
    fn out_of_range_variables() {
        let text = EXPLICIT.replace("lambda[1]", "lambda[3]");
        assert!(parse_config(&text).unwrap_err().message.contains("lambda[3]"));
        let text = EXPLICIT.replace("lambda[1]", "xi[1]");
        assert!(parse_config(&text).unwrap_err().message.contains("xi"));
    }

    #[test]
    fn residual_tolerance_cannot_be_loosened() {
        let err = parse_config("[tolerances]\nresidual = 0.4\n").unwrap_err();
        assert_eq!(err.path, "tolerances.residual");
        assert!(parse_config("[tolerances]\nresidual = 0.1\n").is_ok());
    }
}
