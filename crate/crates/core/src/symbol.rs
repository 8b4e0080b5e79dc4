//! Principal symbols of parametrized boundary value problems.
//!
//! The parameter sphere `S^q` is handled through the chart `ℝ^q` plus the
//! point at infinity; every coefficient must be evaluable at [`Param::Infinity`].

use crate::prelude::*;


use crate::degree::MatrixMap;
use crate::error::{Error, Location, Result};
use crate::geometry::Domain;
use crate::linalg::{identity, min_singular_value, right_divide, CMat, C64};
use crate::manifold::{sphere_embed, sphere_jacobian, Factor, Manifold};

/// A point of the parameter sphere.
#[derive(Debug, Clone, PartialEq)]
pub enum Param {
    Finite(Vec<f64>),
    Infinity,
}

impl Param {
    pub fn is_infinity(&self) -> bool {
        matches!(self, Param::Infinity)
    }

    /// Stereographic projection from the pole `z_0 = 1` of `S^q ⊂ ℝ^{q+1}`.
    pub fn from_sphere_point(z: &[f64]) -> Param {
        let denom = 1.0 - z[0];
        if denom <= 0.0 {
            return Param::Infinity;
        }
        Param::Finite(z[1..].iter().map(|v| v / denom).collect())
    }

    /// Parameter at hyperspherical chart angles; the first angle `0` is `∞`.
    pub fn from_chart(angles: &[f64]) -> Param {
        Param::from_sphere_point(&sphere_embed(angles))
    }

    /// Inverse stereographic projection.
    pub fn to_sphere_point(&self, q: usize) -> Vec<f64> {
        match self {
            Param::Infinity => {
                let mut z = vec![0.0; q + 1];
                z[0] = 1.0;
                z
            }
            Param::Finite(l) => {
                let s: f64 = l.iter().map(|v| v * v).sum();
                let mut z = Vec::with_capacity(q + 1);
                z.push((s - 1.0) / (s + 1.0));
                z.extend(l.iter().map(|v| 2.0 * v / (s + 1.0)));
                z
            }
        }
    }

    pub fn norm(&self) -> f64 {
        match self {
            Param::Infinity => f64::INFINITY,
            Param::Finite(l) => l.iter().map(|v| v * v).sum::<f64>().sqrt(),
        }
    }
}

/// `λ` as a function of `S^q` chart angles, with its chart derivative.
pub fn stereographic_with_jacobian(angles: &[f64]) -> Option<(Vec<f64>, Vec<Vec<f64>>)> {
    let z = sphere_embed(angles);
    let dz = sphere_jacobian(angles);
    let denom = 1.0 - z[0];
    if denom <= 0.0 {
        return None;
    }
    let q = angles.len();
    let lambda: Vec<f64> = z[1..].iter().map(|v| v / denom).collect();
    let jac = (0..q)
        .map(|i| (0..q).map(|c| dz[i + 1][c] / denom + z[i + 1] * dz[0][c] / (denom * denom)).collect())
        .collect();
    Some((lambda, jac))
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        MultiIndex(exponents)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn order(&self) -> usize {
        self.0.iter().map(|&e| e as usize).sum()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn monomial(&self, xi: &[f64]) -> f64 {
        self.0.iter().zip(xi).map(|(&e, &x)| x.powi(e as i32)).product()
    }

    /// All multi-indices of length `n` and order exactly `k`, lexicographically decreasing.
    pub fn all_of_order(n: usize, k: usize) -> Vec<MultiIndex> {
        fn rec(n: usize, k: usize, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
            if prefix.len() + 1 == n {
                prefix.push(k as u32);
                out.push(MultiIndex(prefix.clone()));
                prefix.pop();
                return;
            }
            for e in (0..=k).rev() {
                prefix.push(e as u32);
                rec(n, k - e, prefix, out);
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        if n > 0 {
            rec(n, k, &mut Vec::new(), &mut out);
        }
        out
    }

    /// Multinomial coefficient `k! / Π α_i!`.
    pub fn multinomial(&self) -> f64 {
        let fact = |n: u32| (1..=n).map(f64::from).product::<f64>();
        fact(self.order() as u32) / self.0.iter().map(|&e| fact(e)).product::<f64>()
    }
}

/// Interior coefficient `a_α(λ, x)`, an `m×m` complex matrix.
pub trait CoefficientField: Send + Sync {
    fn eval(&self, lambda: &Param, x: &[f64]) -> Result<CMat>;

    fn depends_on_lambda(&self) -> bool {
        true
    }
}

/// A `λ`- and `x`-independent coefficient.
#[derive(Debug, Clone)]
pub struct ConstantField(pub CMat);

impl CoefficientField for ConstantField {
    fn eval(&self, _lambda: &Param, _x: &[f64]) -> Result<CMat> {
        Ok(self.0.clone())
    }
    fn depends_on_lambda(&self) -> bool {
        false
    }
}

/// Coefficient given by a closure.
pub struct FnField<F> {
    f: F,
    lambda_dependent: bool,
}

impl<F: Fn(&Param, &[f64]) -> Result<CMat> + Send + Sync> FnField<F> {
    pub fn new(f: F, lambda_dependent: bool) -> Self {
        FnField { f, lambda_dependent }
    }
}

impl<F: Fn(&Param, &[f64]) -> Result<CMat> + Send + Sync> CoefficientField for FnField<F> {
    fn eval(&self, lambda: &Param, x: &[f64]) -> Result<CMat> {
        (self.f)(lambda, x)
    }
    fn depends_on_lambda(&self) -> bool {
        self.lambda_dependent
    }
}

#[derive(Clone)]
pub struct Term {
    pub index: MultiIndex,
    pub coefficient: Arc<dyn CoefficientField>,
}

/// `p(λ, x, ξ) = Σ_{|α|=k} a_α(λ, x) ξ^α`.
#[derive(Clone)]
pub struct InteriorSymbol {
    order: usize,
    size: usize,
    dim: usize,
    terms: Vec<Term>,
}

impl InteriorSymbol {
    pub fn new(order: usize, size: usize, dim: usize, terms: Vec<Term>) -> Result<Self> {
        for t in &terms {
            if t.index.len() != dim {
                return Err(Error::Dimension(format!(
                    "multi-index of length {} in a symbol on ℝ^{dim}",
                    t.index.len()
                )));
            }
            if t.index.order() != order {
                return Err(Error::Invalid(format!(
                    "principal symbol of order {order} has a term of order {}",
                    t.index.order()
                )));
            }
        }
        Ok(InteriorSymbol { order, size, dim, terms })
    }

    /// `|ξ|^{2l} Id_m`, expanded into multinomial terms.
    pub fn polyharmonic(dim: usize, l: usize, m: usize) -> Self {
        let terms = MultiIndex::all_of_order(dim, l)
            .into_iter()
            .map(|beta| {
                let alpha = MultiIndex(beta.0.iter().map(|e| 2 * e).collect());
                let c = beta.multinomial();
                Term { index: alpha, coefficient: Arc::new(ConstantField(identity(m) * C64::from(c))) }
            })
            .collect();
        InteriorSymbol { order: 2 * l, size: m, dim, terms }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn depends_on_lambda(&self) -> bool {
        self.terms.iter().any(|t| t.coefficient.depends_on_lambda())
    }

    fn coefficient(&self, t: &Term, lambda: &Param, x: &[f64]) -> Result<CMat> {
        let a = t.coefficient.eval(lambda, x)?;
        if a.nrows() != self.size || a.ncols() != self.size {
            return Err(Error::Dimension(format!(
                "coefficient of ξ^{:?} is {}×{}, expected {}×{}",
                t.index.0,
                a.nrows(),
                a.ncols(),
                self.size,
                self.size
            )));
        }
        Ok(a)
    }

    pub fn eval(&self, lambda: &Param, x: &[f64], xi: &[f64]) -> Result<CMat> {
        if xi.len() != self.dim || x.len() != self.dim {
            return Err(Error::Dimension(format!(
                "symbol on ℝ^{} evaluated at x ∈ ℝ^{}, ξ ∈ ℝ^{}",
                self.dim,
                x.len(),
                xi.len()
            )));
        }
        let mut p = CMat::zeros(self.size, self.size);
        for t in &self.terms {
            p += self.coefficient(t, lambda, x)? * C64::from(t.index.monomial(xi));
        }
        Ok(p)
    }

    /// Coefficients `P_0, …, P_k` of `p(λ, x, ξ′ + ν η)` as a polynomial in `ν`.
    pub fn conormal_polynomial(&self, lambda: &Param, x: &[f64], xi_t: &[f64], normal: &[f64]) -> Result<Vec<CMat>> {
        let k = self.order;
        let mut out = vec![CMat::zeros(self.size, self.size); k + 1];
        for t in &self.terms {
            let a = self.coefficient(t, lambda, x)?;
            // Π_i (ξ′_i + ν η_i)^{α_i}
            let mut poly = vec![1.0];
            for (i, &e) in t.index.0.iter().enumerate() {
                for _ in 0..e {
                    let mut next = vec![0.0; poly.len() + 1];
                    for (d, c) in poly.iter().enumerate() {
                        next[d] += c * xi_t[i];
                        next[d + 1] += c * normal[i];
                    }
                    poly = next;
                }
            }
            for (j, c) in poly.iter().enumerate() {
                if *c != 0.0 {
                    out[j] += &a * C64::from(*c);
                }
            }
        }
        Ok(out)
    }
}

/// Boundary symbol `Σ_j p_b^{(j)}(λ, x′, ξ′) ν^j`, one row per boundary condition.
pub trait BoundaryField: Send + Sync {
    /// Number of boundary conditions `r`.
    fn rows(&self) -> usize;

    /// Number of unknowns `m`.
    fn size(&self) -> usize;

    /// Orders `k_i` of the rows.
    fn orders(&self) -> Vec<usize>;

    /// The `ν`-coefficients, each `r×m`, at a boundary point `x` with
    /// tangential covector `ξ′` (ambient coordinates).
    fn coefficients(&self, lambda: &Param, x: &[f64], xi_t: &[f64]) -> Result<Vec<CMat>>;

    fn depends_on_lambda(&self) -> bool;
}

/// One coefficient `p_b^{ij}(λ, x′, ξ′)`, a `1×m` row.
pub trait BoundaryCoefficient: Send + Sync {
    fn eval(&self, lambda: &Param, x: &[f64], xi_t: &[f64]) -> Result<CMat>;

    fn depends_on_lambda(&self) -> bool {
        true
    }
}

#[derive(Debug, Clone)]
pub struct ConstantRow(pub CMat);

impl BoundaryCoefficient for ConstantRow {
    fn eval(&self, _lambda: &Param, _x: &[f64], _xi_t: &[f64]) -> Result<CMat> {
        Ok(self.0.clone())
    }
    fn depends_on_lambda(&self) -> bool {
        false
    }
}

pub struct FnRow<F> {
    f: F,
    lambda_dependent: bool,
}

impl<F: Fn(&Param, &[f64], &[f64]) -> Result<CMat> + Send + Sync> FnRow<F> {
    pub fn new(f: F, lambda_dependent: bool) -> Self {
        FnRow { f, lambda_dependent }
    }
}

impl<F: Fn(&Param, &[f64], &[f64]) -> Result<CMat> + Send + Sync> BoundaryCoefficient for FnRow<F> {
    fn eval(&self, lambda: &Param, x: &[f64], xi_t: &[f64]) -> Result<CMat> {
        (self.f)(lambda, x, xi_t)
    }
    fn depends_on_lambda(&self) -> bool {
        self.lambda_dependent
    }
}

#[derive(Clone)]
pub struct BoundaryRow {
    pub order: usize,
    /// `coefficients[j]` multiplies `ν^j`, `j = 0..=order`; missing entries are zero.
    pub coefficients: Vec<Option<Arc<dyn BoundaryCoefficient>>>,
}

/// Boundary symbol given row by row.
#[derive(Clone)]
pub struct RowBoundary {
    size: usize,
    rows: Vec<BoundaryRow>,
}

impl RowBoundary {
    pub fn new(size: usize, rows: Vec<BoundaryRow>) -> Result<Self> {
        for (i, r) in rows.iter().enumerate() {
            if r.coefficients.len() > r.order + 1 {
                return Err(Error::Invalid(format!(
                    "boundary row {i} of order {} has a ν^{} coefficient",
                    r.order,
                    r.coefficients.len() - 1
                )));
            }
        }
        Ok(RowBoundary { size, rows })
    }

    /// Dirichlet system `(γ_0, …, γ_{l-1})` for `m` unknowns: row `jm + c` is `ν^j e_c`.
    pub fn dirichlet_system(m: usize, l: usize) -> Self {
        let mut rows = Vec::with_capacity(m * l);
        for j in 0..l {
            for c in 0..m {
                let mut e = CMat::zeros(1, m);
                e[(0, c)] = C64::from(1.0);
                let mut coefficients: Vec<Option<Arc<dyn BoundaryCoefficient>>> = vec![None; j + 1];
                coefficients[j] = Some(Arc::new(ConstantRow(e)));
                rows.push(BoundaryRow { order: j, coefficients });
            }
        }
        RowBoundary { size: m, rows }
    }
}

impl BoundaryField for RowBoundary {
    fn rows(&self) -> usize {
        self.rows.len()
    }
    fn size(&self) -> usize {
        self.size
    }
    fn orders(&self) -> Vec<usize> {
        self.rows.iter().map(|r| r.order).collect()
    }
    fn coefficients(&self, lambda: &Param, x: &[f64], xi_t: &[f64]) -> Result<Vec<CMat>> {
        let max = self.rows.iter().map(|r| r.coefficients.len()).max().unwrap_or(0);
        let mut out = vec![CMat::zeros(self.rows.len(), self.size); max];
        for (i, row) in self.rows.iter().enumerate() {
            for (j, c) in row.coefficients.iter().enumerate() {
                if let Some(c) = c {
                    let v = c.eval(lambda, x, xi_t)?;
                    if v.nrows() != 1 || v.ncols() != self.size {
                        return Err(Error::Dimension(format!(
                            "boundary coefficient ({i}, ν^{j}) is {}×{}, expected 1×{}",
                            v.nrows(),
                            v.ncols(),
                            self.size
                        )));
                    }
                    out[j].row_mut(i).copy_from(&v.row(0));
                }
            }
        }
        Ok(out)
    }
    fn depends_on_lambda(&self) -> bool {
        self.rows.iter().flat_map(|r| r.coefficients.iter().flatten()).any(|c| c.depends_on_lambda())
    }
}

#[derive(Clone)]
pub struct BoundarySymbol(pub Arc<dyn BoundaryField>);

impl BoundarySymbol {
    pub fn new(field: impl BoundaryField + 'static) -> Self {
        BoundarySymbol(Arc::new(field))
    }

    pub fn rows(&self) -> usize {
        self.0.rows()
    }

    pub fn orders(&self) -> Vec<usize> {
        self.0.orders()
    }

    pub fn depends_on_lambda(&self) -> bool {
        self.0.depends_on_lambda()
    }

    pub fn coefficients(&self, lambda: &Param, x: &[f64], xi_t: &[f64]) -> Result<Vec<CMat>> {
        self.0.coefficients(lambda, x, xi_t)
    }
}

/// A parametrized elliptic boundary value problem, through its principal symbols.
#[derive(Clone)]
pub struct SymbolFamily {
    pub interior: InteriorSymbol,
    pub boundary: BoundarySymbol,
    /// Second boundary family for `τ = b_+ b_-⁻¹`.
    pub alt_boundary: Option<BoundarySymbol>,
    pub q: usize,
    pub domain: Domain,
    /// Complex coefficients: the reality condition is not checked.
    pub complex: bool,
    /// The family is the realification of a complex family.
    pub realified: bool,
    pub name: String,
}

impl SymbolFamily {
    pub fn new(interior: InteriorSymbol, boundary: BoundarySymbol, q: usize, domain: Domain) -> Result<Self> {
        let family = SymbolFamily {
            interior,
            boundary,
            alt_boundary: None,
            q,
            domain,
            complex: false,
            realified: false,
            name: String::new(),
        };
        family.validate()?;
        Ok(family)
    }

    pub fn validate(&self) -> Result<()> {
        let (k, m, r) = (self.interior.order(), self.interior.size(), self.boundary.rows());
        if k * m != 2 * r {
            return Err(Error::Dimension(format!(
                "proper ellipticity needs k·m = 2r, got k={k}, m={m}, r={r}"
            )));
        }
        if self.boundary.0.size() != m {
            return Err(Error::Dimension(format!(
                "boundary rows act on {} unknowns, interior on {m}",
                self.boundary.0.size()
            )));
        }
        if let Some(alt) = &self.alt_boundary {
            if alt.rows() != r || alt.0.size() != m {
                return Err(Error::Dimension("second boundary family has a different shape".into()));
            }
        }
        if self.domain.dim() != self.interior.dim() {
            return Err(Error::Dimension(format!(
                "domain in ℝ^{} for a symbol on ℝ^{}",
                self.domain.dim(),
                self.interior.dim()
            )));
        }
        if self.q == 0 {
            return Err(Error::Dimension("parameter dimension q must be positive".into()));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.interior.dim()
    }

    pub fn r(&self) -> usize {
        self.boundary.rows()
    }
}

/// One `(λ, x, ξ)` sample.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolSample {
    pub lambda: Param,
    pub x: Vec<f64>,
    pub xi: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RealityReport {
    pub max_violation: f64,
    pub passed: bool,
    /// The family is declared complex, so no check was run.
    pub skipped_complex: bool,
    pub samples: usize,
}

/// `max ‖p(λ, x, −ξ) − conj p(λ, x, ξ)‖` over the samples.
pub fn check_reality(sym: &InteriorSymbol, samples: &[SymbolSample], tolerance: f64) -> Result<RealityReport> {
    let mut max_violation: f64 = 0.0;
    for s in samples {
        let neg: Vec<f64> = s.xi.iter().map(|v| -v).collect();
        let a = sym.eval(&s.lambda, &s.x, &neg)?;
        let b = sym.eval(&s.lambda, &s.x, &s.xi)?.map(|z| z.conj());
        max_violation = max_violation.max((a - b).norm());
    }
    Ok(RealityReport { max_violation, passed: max_violation <= tolerance, skipped_complex: false, samples: samples.len() })
}

/// Family-level reality check; complex families are skipped with a flag.
pub fn check_family_reality(family: &SymbolFamily, samples: &[SymbolSample], tolerance: f64) -> Result<RealityReport> {
    if family.complex {
        return Ok(RealityReport { max_violation: 0.0, passed: true, skipped_complex: true, samples: 0 });
    }
    check_reality(&family.interior, samples, tolerance)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EllipticityReport {
    pub min_singular_value: f64,
    pub worst: Option<Location>,
    pub passed: bool,
    pub samples: usize,
}

/// Smallest singular value of `p(λ, x, ξ/|ξ|)` over the samples.
pub fn check_ellipticity(sym: &InteriorSymbol, samples: &[SymbolSample], threshold: f64) -> Result<EllipticityReport> {
    let mut min = f64::INFINITY;
    let mut worst = None;
    for s in samples {
        let norm = s.xi.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::Invalid(format!(
                "ellipticity sample with ξ = 0 at {}",
                Location::new(&s.lambda, &s.x, &s.xi)
            )));
        }
        let unit: Vec<f64> = s.xi.iter().map(|v| v / norm).collect();
        let sv = min_singular_value(&sym.eval(&s.lambda, &s.x, &unit)?);
        if sv < min {
            min = sv;
            worst = Some(Location::new(&s.lambda, &s.x, &unit));
        }
    }
    Ok(EllipticityReport { min_singular_value: min, worst, passed: min > threshold, samples: samples.len() })
}

/// `σ(λ, x, ξ) = p(λ, x, ξ) p(∞, x, ξ)⁻¹` on `S^q × S^{2n-1}`, `Id` off `Ω`.
pub struct SigmaMap {
    family: SymbolFamily,
    manifold: Manifold,
}

pub fn build_sigma(family: &SymbolFamily) -> Result<SigmaMap> {
    let n = family.n();
    if family.domain.bounding_radius() >= 1.0 {
        return Err(Error::Invalid(format!(
            "domain must lie inside the unit ball, bounding radius is {}",
            family.domain.bounding_radius()
        )));
    }
    let manifold = Manifold::new(vec![Factor::Sphere(family.q), Factor::Sphere(2 * n - 1)])?;
    Ok(SigmaMap { family: family.clone(), manifold })
}

impl SigmaMap {
    /// `σ` at an explicit parameter and a point of the unit sphere in `(x, ξ)`-space.
    pub fn value(&self, lambda: &Param, x: &[f64], xi: &[f64]) -> Result<CMat> {
        let m = self.family.interior.size();
        if lambda.is_infinity() || !self.family.domain.contains(x) {
            return Ok(identity(m));
        }
        let p = self.family.interior.eval(lambda, x, xi)?;
        let p_inf = self.family.interior.eval(&Param::Infinity, x, xi)?;
        right_divide(&p, &p_inf).filter(crate::linalg::is_finite).ok_or_else(|| Error::Singular {
            what: "p(∞, x, ξ)".into(),
            location: Location::new(&Param::Infinity, x, xi),
        })
    }
}

impl MatrixMap for SigmaMap {
    fn manifold(&self) -> &Manifold {
        &self.manifold
    }
    fn size(&self) -> usize {
        self.family.interior.size()
    }
    fn eval(&self, u: &[f64]) -> Result<CMat> {
        let q = self.family.q;
        let n = self.family.n();
        let lambda = Param::from_chart(&u[..q]);
        let w = sphere_embed(&u[q..]);
        self.value(&lambda, &w[..n], &w[n..])
    }
    fn is_constant(&self) -> bool {
        !self.family.interior.depends_on_lambda()
    }
}
