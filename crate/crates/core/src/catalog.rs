//! Named families and maps shipped with the toolkit.

use crate::prelude::*;

use core::f64::consts::PI;

use crate::construct::{
    build_f, clifford_generator, compose_phi, construct_example, CircleCover, ExampleParams, FitReport,
};
use crate::degree::{MatrixMap, PowerMap, SphereMap};
use crate::error::{Error, Result};
use crate::geometry::Domain;
use crate::linalg::{identity, CMat, C64, I};
use crate::manifold::Manifold;
use crate::symbol::{
    BoundaryCoefficient, BoundaryRow, BoundarySymbol, ConstantRow, FnField, InteriorSymbol, MultiIndex, Param,
    RowBoundary, SymbolFamily, Term,
};

pub const FAMILY_NAMES: &[&str] = &[
    "laplacian-dirichlet",
    "laplacian-neumann",
    "polyharmonic-dirichlet",
    "clutched-example",
    "interior-placebo",
];

pub const MAP_NAMES: &[&str] = &["winding", "clifford", "clifford-power", "clifford-doubling", "collapse"];

/// Sizes and fit knobs; each family reads the fields it needs.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyOptions {
    pub q: usize,
    pub n: usize,
    pub m: usize,
    pub l: usize,
    pub fit_degree: usize,
    pub fit_base: usize,
    pub target_error: f64,
    pub seed: u64,
}

impl Default for FamilyOptions {
    fn default() -> Self {
        let e = ExampleParams::default();
        FamilyOptions {
            q: e.q,
            n: e.n,
            m: 1,
            l: 1,
            fit_degree: e.fit_degree,
            fit_base: e.fit_base,
            target_error: e.target_error,
            seed: e.seed,
        }
    }
}

/// A family with what is known about it beyond its symbols.
pub struct BuiltFamily {
    pub family: SymbolFamily,
    pub fit: Option<FitReport>,
    pub unverifiable: Vec<String>,
}

impl From<SymbolFamily> for BuiltFamily {
    fn from(family: SymbolFamily) -> Self {
        BuiltFamily { family, fit: None, unverifiable: Vec::new() }
    }
}

pub fn builtin_family(name: &str, opts: &FamilyOptions) -> Result<BuiltFamily> {
    let family = match name {
        "laplacian-dirichlet" => polyharmonic_dirichlet(opts.q, opts.n, 1, 1)?,
        "polyharmonic-dirichlet" => polyharmonic_dirichlet(opts.q, opts.n, opts.m, opts.l)?,
        "laplacian-neumann" => laplacian_neumann(opts.q, opts.n)?,
        "interior-placebo" => interior_placebo(opts.q)?,
        "clutched-example" => {
            let ex = construct_example(&ExampleParams {
                q: opts.q,
                n: opts.n,
                m: opts.m,
                l: opts.l,
                fit_degree: opts.fit_degree,
                fit_base: opts.fit_base,
                target_error: opts.target_error,
                seed: opts.seed,
                ..ExampleParams::default()
            })?;
            return Ok(BuiltFamily { family: ex.family, fit: Some(ex.fit), unverifiable: ex.unverifiable });
        }
        other => {
            return Err(Error::Invalid(format!(
                "unknown builtin family {other:?}; known: {}",
                FAMILY_NAMES.join(", ")
            )))
        }
    };
    Ok(family.into())
}

/// `Δ^l Id_m` with the Dirichlet system on the solid torus in `ℝ^n`.
pub fn polyharmonic_dirichlet(q: usize, n: usize, m: usize, l: usize) -> Result<SymbolFamily> {
    let mut f = SymbolFamily::new(
        InteriorSymbol::polyharmonic(n, l, m),
        BoundarySymbol::new(RowBoundary::dirichlet_system(m, l)),
        q,
        Domain::torus(n)?,
    )?;
    f.name = if (m, l) == (1, 1) { "laplacian-dirichlet".into() } else { "polyharmonic-dirichlet".into() };
    Ok(f)
}

/// Scalar Laplacian with the normal derivative as boundary row.
pub fn laplacian_neumann(q: usize, n: usize) -> Result<SymbolFamily> {
    let one: Arc<dyn BoundaryCoefficient> = Arc::new(ConstantRow(identity(1)));
    let row = BoundaryRow { order: 1, coefficients: vec![None, Some(one)] };
    let mut f = SymbolFamily::new(
        InteriorSymbol::polyharmonic(n, 1, 1),
        BoundarySymbol::new(RowBoundary::new(1, vec![row])?),
        q,
        Domain::torus(n)?,
    )?;
    f.name = "laplacian-neumann".into();
    Ok(f)
}

/// Radius of the disc carrying the placebo's `λ`-dependence.
const PLACEBO_SUPPORT: f64 = 0.25;

fn bump(x: &[f64]) -> f64 {
    let t = x.iter().map(|v| v * v).sum::<f64>() / (PLACEBO_SUPPORT * PLACEBO_SUPPORT);
    if t >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - t)).exp()
    }
}

/// `exp(i(a σ₁ + b σ₂))` in closed form.
fn su2_exp(a: f64, b: f64) -> CMat {
    let t = (a * a + b * b).sqrt();
    let (c, s) = (t.cos(), if t > 0.0 { t.sin() / t } else { 1.0 });
    CMat::from_row_slice(2, 2, &[C64::from(c), I * (a - I * b) * s, I * (a + I * b) * s, C64::from(c)])
}

/// `|ξ|² E(λ, x)` with `E = exp(2π b(x)(λ₁ X + λ₂ Y)/(1 + |λ|²))`, `X = iσ₁`,
/// `Y = iσ₂`, `b` a bump inside the disc of radius 1/4, on the disc of radius
/// 1/2 with Dirichlet rows. Its `λ`-dependence never reaches the collar, and
/// `σ` is null-homotopic, so both multiplicities vanish.
pub fn interior_placebo(q: usize) -> Result<SymbolFamily> {
    if q < 2 {
        return Err(Error::Invalid("the placebo needs q ≥ 2".into()));
    }
    let e = Arc::new(FnField::new(
        |lambda: &Param, x: &[f64]| {
            Ok(match lambda {
                Param::Infinity => identity(2),
                Param::Finite(l) => {
                    let s = 2.0 * PI * bump(x) / (1.0 + l.iter().map(|v| v * v).sum::<f64>());
                    su2_exp(s * l[0], s * l[1])
                }
            })
        },
        true,
    ));
    let terms = (0..2)
        .map(|i| {
            let mut idx = vec![0; 2];
            idx[i] = 2;
            Term { index: MultiIndex::new(idx), coefficient: e.clone() }
        })
        .collect();
    let mut f = SymbolFamily::new(
        InteriorSymbol::new(2, 2, 2, terms)?,
        BoundarySymbol::new(RowBoundary::dirichlet_system(2, 1)),
        q,
        Domain::ball(2, 0.5)?,
    )?;
    f.complex = true;
    f.name = "interior-placebo".into();
    Ok(f)
}

/// `θ ↦ e^{ikθ}` on the circle, with its analytic derivative.
pub struct Winding {
    k: i32,
    manifold: Manifold,
}

impl Winding {
    pub fn new(k: i32) -> Self {
        Winding { k, manifold: Manifold::circle() }
    }
}

impl MatrixMap for Winding {
    fn manifold(&self) -> &Manifold {
        &self.manifold
    }
    fn size(&self) -> usize {
        1
    }
    fn eval(&self, u: &[f64]) -> Result<CMat> {
        Ok(CMat::from_element(1, 1, C64::from_polar(1.0, self.k as f64 * u[0])))
    }
    fn partials(&self, u: &[f64]) -> Option<Result<Vec<CMat>>> {
        let z = C64::from_polar(1.0, self.k as f64 * u[0]) * I * self.k as f64;
        Some(Ok(vec![CMat::from_element(1, 1, z)]))
    }
    fn is_constant(&self) -> bool {
        self.k == 0
    }
}

/// Parameters a named map may read.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapOptions {
    /// Winding number or exponent.
    pub k: i32,
    /// Generator index, `π_{2v-1}`.
    pub v: usize,
    pub q: usize,
    pub n: usize,
}

impl Default for MapOptions {
    fn default() -> Self {
        MapOptions { k: 1, v: 1, q: 4, n: 3 }
    }
}

pub enum BuiltinMap {
    /// Unitary-valued map, measured by the Bott-Fedosov integral.
    Matrix(Box<dyn MatrixMap + Send>),
    /// Sphere-valued map, measured by the Brouwer integral.
    Sphere(Box<dyn SphereMap + Send>),
}

/// `name` may carry a trailing integer, `winding-3`, `winding--2`, `clifford-2`;
/// it sets `k` for winding maps and `v` otherwise.
pub fn builtin_map(name: &str, opts: &MapOptions) -> Result<BuiltinMap> {
    let (base, suffix) = split_suffix(name);
    let mut opts = *opts;
    if let Some(s) = suffix {
        if base == "winding" {
            opts.k = s as i32;
        } else {
            opts.v = usize::try_from(s).map_err(|_| Error::Invalid(format!("negative index in {name:?}")))?;
        }
    }
    Ok(match base {
        "winding" => BuiltinMap::Matrix(Box::new(Winding::new(opts.k))),
        "clifford" => BuiltinMap::Matrix(Box::new(clifford_generator(opts.v)?)),
        "clifford-power" => {
            let exponent = u32::try_from(opts.k)
                .map_err(|_| Error::Invalid(format!("clifford-power needs k ≥ 0, got {}", opts.k)))?;
            BuiltinMap::Matrix(Box::new(PowerMap { inner: clifford_generator(opts.v)?, exponent }))
        }
        "clifford-doubling" => {
            BuiltinMap::Matrix(Box::new(compose_phi(clifford_generator(1)?, CircleCover::new(2))?))
        }
        "collapse" => BuiltinMap::Sphere(Box::new(build_f(opts.q, opts.n)?)),
        other => {
            return Err(Error::Invalid(format!("unknown builtin map {other:?}; known: {}", MAP_NAMES.join(", "))))
        }
    })
}

fn split_suffix(name: &str) -> (&str, Option<i64>) {
    if let Some((head, tail)) = name.rsplit_once('-') {
        if let Ok(v) = tail.parse::<i64>() {
            return match head.strip_suffix('-') {
                Some(h) => (h, Some(-v)),
                None => (head, Some(v)),
            };
        }
    }
    (name, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::degree::{bott_fedosov_degree, DegreeOptions};
    use crate::exec::Serial;
    use crate::linalg::ZERO;
    use crate::manifold::QuadratureRule;

    #[test]
    fn names_resolve() {
        for name in FAMILY_NAMES.iter().filter(|n| **n != "clutched-example") {
            assert!(builtin_family(name, &FamilyOptions { q: 2, ..Default::default() }).is_ok(), "{name}");
        }
        assert!(builtin_family("nope", &FamilyOptions::default()).is_err());
        for name in MAP_NAMES {
            assert!(builtin_map(name, &MapOptions::default()).is_ok(), "{name}");
        }
        assert!(builtin_map("nope", &MapOptions::default()).is_err());
    }

    #[test]
    fn suffix_parsing() {
        assert_eq!(split_suffix("winding-3"), ("winding", Some(3)));
        assert_eq!(split_suffix("winding--2"), ("winding", Some(-2)));
        assert_eq!(split_suffix("clifford-power"), ("clifford-power", None));
        assert_eq!(split_suffix("clifford-power-2"), ("clifford-power", Some(2)));
    }

    #[test]
    fn laplacian_dirichlet_shape() {
        let f = builtin_family("laplacian-dirichlet", &FamilyOptions::default()).unwrap().family;
        assert_eq!((f.interior.size(), f.interior.order(), f.r()), (1, 2, 1));
    }

    #[test]
    fn su2_exp_is_the_series() {
        let (a, b) = (0.7, -0.4);
        let x = CMat::from_row_slice(2, 2, &[ZERO, I * a + b, I * a - b, ZERO]);
        let mut term = identity(2);
        let mut sum = identity(2);
        for j in 1..30 {
            term = &term * &x / C64::from(j as f64);
            sum += &term;
        }
        assert!((su2_exp(a, b) - sum).norm() < 1e-13);
    }

    #[test]
    fn winding_map_degrees() {
        let opts = DegreeOptions::with_rule(QuadratureRule::Product { nodes_per_dim: 512 });
        for k in -3..=3 {
            let BuiltinMap::Matrix(m) = builtin_map(&format!("winding-{k}"), &MapOptions::default()).unwrap() else {
                panic!("winding is a matrix map")
            };
            let d = bott_fedosov_degree(m.as_ref(), &opts, &Serial).unwrap();
            assert_eq!(d.rounded, k as i64);
            assert!(d.residual < 1e-10);
        }
    }
}
