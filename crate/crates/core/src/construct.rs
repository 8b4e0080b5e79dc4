//! The clutched example family: Clifford generators, the collapse map onto
//! `S^{q+2n-3}`, the even-in-`ξ′` composite `φ = ψ ∘ f`, its homogeneous
//! polynomial approximation, and the boundary value problem built from it.

use crate::prelude::*;

use core::f64::consts::PI;

use nalgebra::DMatrix;

use crate::degree::{
    bott_fedosov_constant, bott_fedosov_integrand, brouwer_degree, brouwer_integrand, Budget, DegreeOptions,
    DegreeResult, MatrixMap, SphereMap,
};
use crate::exec::Executor;
use crate::error::{Error, Location, Result};
use crate::geometry::Domain;
use crate::linalg::{min_singular_value, spectral_norm, stabilize, CMat, C64, I, ONE, ZERO};
use crate::manifold::{sphere_angles, sphere_embed, sphere_jacobian, Factor, Manifold};
use crate::symbol::{
    stereographic_with_jacobian, BoundaryField, BoundarySymbol, InteriorSymbol, MultiIndex, Param, SymbolFamily,
};

fn pauli() -> [CMat; 3] {
    let m = |a: [C64; 4]| CMat::from_row_slice(2, 2, &a);
    [m([ZERO, ONE, ONE, ZERO]), m([ZERO, -I, I, ZERO]), m([ONE, ZERO, ZERO, -ONE])]
}

/// `2v − 1` pairwise anticommuting Hermitian involutions of size `2^{v-1}`.
fn gammas(v: usize) -> Vec<CMat> {
    let mut g = vec![CMat::from_element(1, 1, ONE)];
    let [s1, s2, s3] = pauli();
    for _ in 1..v {
        let size = g[0].nrows();
        let id = CMat::identity(size, size);
        let mut next: Vec<CMat> = g.iter().map(|gj| s1.kronecker(gj)).collect();
        next.push(s2.kronecker(&id));
        next.push(s3.kronecker(&id));
        g = next;
    }
    g
}

/// `max_{i,j} ‖Γ_iΓ_j + Γ_jΓ_i − 2δ_{ij}‖`; exactly zero for the built gammas.
pub fn clifford_defect(g: &[CMat]) -> f64 {
    let n = g.first().map_or(0, |m| m.nrows());
    let mut worst: f64 = 0.0;
    for i in 0..g.len() {
        for j in 0..g.len() {
            let mut a = &g[i] * &g[j] + &g[j] * &g[i];
            if i == j {
                a -= CMat::identity(n, n) * C64::from(2.0);
            }
            worst = worst.max(a.iter().map(|z| z.norm()).fold(0.0, f64::max));
        }
    }
    worst
}

/// `ψ(x) = x_0 Id + i Σ_j x_j Γ_j` on `S^{2v-1}`, with values in `U(2^{v-1})`.
#[derive(Debug, Clone)]
pub struct CliffordGenerator {
    v: usize,
    gammas: Vec<CMat>,
    manifold: Manifold,
}

pub fn clifford_generator(v: usize) -> Result<CliffordGenerator> {
    if !(1..=4).contains(&v) {
        return Err(Error::Invalid(format!("Clifford generators are built for v ∈ 1..=4, got {v}")));
    }
    let gammas = gammas(v);
    let defect = clifford_defect(&gammas);
    if defect != 0.0 {
        return Err(Error::Invalid(format!("Clifford relations fail by {defect:e}")));
    }
    Ok(CliffordGenerator { v, gammas, manifold: Manifold::sphere(2 * v - 1) })
}

impl CliffordGenerator {
    pub fn v(&self) -> usize {
        self.v
    }

    pub fn gammas(&self) -> &[CMat] {
        &self.gammas
    }

    /// The linear extension to `ℝ^{2v}`; unitary on the unit sphere.
    pub fn value(&self, x: &[f64]) -> CMat {
        let n = self.gammas[0].nrows();
        let mut out = CMat::identity(n, n) * C64::from(x[0]);
        for (g, c) in self.gammas.iter().zip(&x[1..]) {
            out += g * C64::new(0.0, *c);
        }
        out
    }
}

impl MatrixMap for CliffordGenerator {
    fn manifold(&self) -> &Manifold {
        &self.manifold
    }
    fn size(&self) -> usize {
        self.gammas[0].nrows()
    }
    fn eval(&self, u: &[f64]) -> Result<CMat> {
        Ok(self.value(&sphere_embed(u)))
    }
    fn partials(&self, u: &[f64]) -> Option<Result<Vec<CMat>>> {
        let jac = sphere_jacobian(u);
        Some(Ok((0..u.len()).map(|c| self.value(&jac.iter().map(|r| r[c]).collect::<Vec<_>>())).collect()))
    }
}

/// Degree of a map whose Bott-Fedosov form is invariant, hence a constant
/// multiple of the volume form: the density ratio at a few probe points times
/// the volume. The error estimate is the spread of the ratio across probes.
pub fn degree_by_invariance(map: &dyn MatrixMap, probes: &[Vec<f64>], fd_step: f64) -> Result<DegreeResult> {
    let manifold = map.manifold();
    let d = manifold.dim();
    if d % 2 == 0 || probes.is_empty() {
        return Err(Error::Dimension(format!("invariance degree needs probes on an odd manifold, got dim {d}")));
    }
    let mut ratios = Vec::with_capacity(probes.len());
    for u in probes {
        ratios.push(bott_fedosov_integrand(map, u, fd_step)? / manifold.density(u));
    }
    let mean = ratios.iter().sum::<C64>() / probes.len() as f64;
    let spread = ratios.iter().map(|r| (r - mean).norm()).fold(0.0, f64::max);
    let scale = bott_fedosov_constant(d.div_ceil(2)) * manifold.orientation() * manifold.volume();
    let budget = Budget { nodes: probes.len(), doublings: 0, wall_seconds: None, rule: None };
    Ok(DegreeResult::from_integral(mean * scale, spread * scale.norm(), budget))
}

/// `S(r) = r − sin(2πr)/(2π)` for `r ∈ [0, 1]`, with `S′ = 2 sin²(πr)`;
/// `S` is flat to second order at both ends.
fn profile(r: f64) -> (f64, f64) {
    if r >= 1.0 {
        return (1.0, 0.0);
    }
    let d = 2.0 * (PI * r).sin().powi(2);
    if r < 0.1 {
        // Alternating series of r − sin(2πr)/(2π), free of cancellation.
        let a = 2.0 * PI * r;
        let mut term = a * a * r / 6.0;
        let mut sum = term;
        for k in 2..12 {
            term *= -a * a / ((2 * k) as f64 * (2 * k + 1) as f64);
            sum += term;
        }
        return (sum, d);
    }
    (r - (2.0 * PI * r).sin() / (2.0 * PI), d)
}

/// `f = g ∘ (Id × π)`: `S^q × T^{n-1} × S^{n-2} → S^{q+2n-3}`.
///
/// The collapse `g` maps the cell `|Y| < 1`, with
/// `Y = (λ, wrap(θ)/2, sign(w_0) w_{1..}/0.9)`, onto the sphere minus its
/// south pole and everything else (in particular `λ = ∞` and the equator
/// `w_0 = 0` of `S^{n-2}`) to the south pole. `Y` is even in `w`, so `f`
/// factors through `ℝP^{n-2}`; each hemisphere of `S^{n-2}` covers the target
/// once, and for odd `n` both with the same sign. The last output coordinate
/// is negated when needed so that the Brouwer degree is `+2`.
#[derive(Debug, Clone)]
pub struct CollapseMap {
    q: usize,
    n: usize,
    manifold: Manifold,
    flip: bool,
}

const ANGLE_SCALE: f64 = 2.0;
const DIRECTION_SCALE: f64 = 0.9;

pub fn build_f(q: usize, n: usize) -> Result<CollapseMap> {
    if n < 3 || n % 2 == 0 {
        return Err(Error::Invalid(format!(
            "the collapse map needs odd n ≥ 3 so that ℝP^{{n-2}} is orientable, got n = {n}"
        )));
    }
    if q == 0 {
        return Err(Error::Invalid("parameter dimension q must be positive".into()));
    }
    let manifold = Manifold::new(vec![Factor::Sphere(q), Factor::Torus(n - 1), Factor::Sphere(n - 2)])?;
    let mut f = CollapseMap { q, n, manifold, flip: false };
    // The map is a local diffeomorphism of constant sign on the cell; read the
    // sign off one interior point.
    // Generic point: no chart angle at a coordinate singularity.
    let lambda: Vec<f64> = (0..q).map(|i| 0.17 + 0.05 * i as f64).collect();
    let mut w: Vec<f64> = (0..n - 1).map(|i| 0.1 + 0.03 * i as f64).collect();
    w[0] = 1.0;
    let mut u = sphere_angles(&Param::Finite(lambda).to_sphere_point(q));
    u.extend(core::iter::repeat(0.2).take(n - 1));
    u.extend(sphere_angles(&w));
    let sign = brouwer_integrand(&f, &u, 1e-4)? * f.manifold.orientation();
    f.flip = sign < 0.0;
    Ok(f)
}

fn wrap(a: f64) -> f64 {
    let t = num_traits::Euclid::rem_euclid(&a, &(2.0 * PI));
    if t > PI {
        t - 2.0 * PI
    } else {
        t
    }
}

fn south_pole(dim: usize) -> Vec<f64> {
    let mut p = vec![0.0; dim + 1];
    p[0] = -1.0;
    p
}

impl CollapseMap {
    pub fn q(&self) -> usize {
        self.q
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn cell(&self, lambda: &[f64], theta: &[f64], w: &[f64]) -> Vec<f64> {
        let sign = if w[0] < 0.0 { -1.0 } else { 1.0 };
        let mut y = lambda.to_vec();
        y.extend(theta.iter().map(|t| wrap(*t) / ANGLE_SCALE));
        y.extend(w[1..].iter().map(|v| sign * v / DIRECTION_SCALE));
        y
    }

    /// `(cos β, sin β · Y/|Y|)` with `β = π S(|Y|)`, and `∂F/∂Y` when asked.
    fn onto_sphere(y: &[f64], want_jacobian: bool) -> (Vec<f64>, Option<Vec<Vec<f64>>>) {
        let d = y.len();
        let r = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        let zero_jac = || vec![vec![0.0; d]; d + 1];
        if r >= 1.0 {
            return (south_pole(d), want_jacobian.then(zero_jac));
        }
        if r == 0.0 {
            let mut p = vec![0.0; d + 1];
            p[0] = 1.0;
            return (p, want_jacobian.then(zero_jac));
        }
        let (s, ds) = profile(r);
        let (beta, dbeta) = (PI * s, PI * ds);
        let (sb, cb) = (beta.sin(), beta.cos());
        let g = sb / r;
        let mut out = Vec::with_capacity(d + 1);
        out.push(cb);
        out.extend(y.iter().map(|v| g * v));
        if !want_jacobian {
            return (out, None);
        }
        let dg = (cb * dbeta * r - sb) / (r * r);
        let mut jac = zero_jac();
        for j in 0..d {
            jac[0][j] = -sb * dbeta * y[j] / r;
            for i in 0..d {
                jac[i + 1][j] = dg * y[i] * y[j] / r + if i == j { g } else { 0.0 };
            }
        }
        (out, Some(jac))
    }

    /// `f(λ, θ, w)` for a boundary covector direction `w ∈ S^{n-2} ⊂ ℝ^{n-1}`.
    pub fn value(&self, lambda: &Param, theta: &[f64], w: &[f64]) -> Vec<f64> {
        let d = self.q + 2 * self.n - 3;
        let mut y = match lambda {
            Param::Infinity => south_pole(d),
            Param::Finite(l) => Self::onto_sphere(&self.cell(l, theta, w), false).0,
        };
        if self.flip {
            y[d] = -y[d];
        }
        y
    }

    fn split<'a>(&self, u: &'a [f64]) -> (&'a [f64], &'a [f64], &'a [f64]) {
        let (a, rest) = u.split_at(self.q);
        let (t, b) = rest.split_at(self.n - 1);
        (a, t, b)
    }
}

impl SphereMap for CollapseMap {
    fn manifold(&self) -> &Manifold {
        &self.manifold
    }
    fn target_dim(&self) -> usize {
        self.q + 2 * self.n - 3
    }
    fn eval(&self, u: &[f64]) -> Result<Vec<f64>> {
        let (a, t, b) = self.split(u);
        Ok(self.value(&Param::from_chart(a), t, &sphere_embed(b)))
    }
    fn jacobian(&self, u: &[f64]) -> Option<Result<Vec<Vec<f64>>>> {
        let (a, t, b) = self.split(u);
        let d = self.target_dim();
        let Some((lambda, dl)) = stereographic_with_jacobian(a) else {
            return Some(Ok(vec![vec![0.0; d]; d + 1]));
        };
        let w = sphere_embed(b);
        let dw = sphere_jacobian(b);
        let y = self.cell(&lambda, t, &w);
        let (_, dfy) = Self::onto_sphere(&y, true);
        let dfy = dfy.expect("jacobian requested");
        // ∂Y/∂u is block diagonal.
        let sign = if w[0] < 0.0 { -1.0 } else { 1.0 };
        let mut dy = vec![vec![0.0; d]; d];
        for i in 0..self.q {
            dy[i][..self.q].copy_from_slice(&dl[i]);
        }
        for i in 0..self.n - 1 {
            dy[self.q + i][self.q + i] = 1.0 / ANGLE_SCALE;
        }
        let off = self.q + self.n - 1;
        for i in 0..self.n - 2 {
            for c in 0..self.n - 2 {
                dy[off + i][off + c] = sign * dw[i + 1][c] / DIRECTION_SCALE;
            }
        }
        let mut jac: Vec<Vec<f64>> =
            (0..=d).map(|r| (0..d).map(|c| (0..d).map(|k| dfy[r][k] * dy[k][c]).sum()).collect()).collect();
        if self.flip {
            jac[d].iter_mut().for_each(|v| *v = -*v);
        }
        Some(Ok(jac))
    }
}

/// The covering `θ ↦ kθ` of the circle, the one-dimensional stand-in for `f`.
#[derive(Debug, Clone)]
pub struct CircleCover {
    pub k: i32,
    manifold: Manifold,
}

impl CircleCover {
    pub fn new(k: i32) -> Self {
        CircleCover { k, manifold: Manifold::circle() }
    }
}

impl SphereMap for CircleCover {
    fn manifold(&self) -> &Manifold {
        &self.manifold
    }
    fn target_dim(&self) -> usize {
        1
    }
    fn eval(&self, u: &[f64]) -> Result<Vec<f64>> {
        let a = self.k as f64 * u[0];
        Ok(vec![a.cos(), a.sin()])
    }
    fn jacobian(&self, u: &[f64]) -> Option<Result<Vec<Vec<f64>>>> {
        let k = self.k as f64;
        let a = k * u[0];
        Some(Ok(vec![vec![-k * a.sin()], vec![k * a.cos()]]))
    }
}

/// `φ = ψ ∘ f`; `ψ` is linear, so `dφ = ψ(df)`.
#[derive(Debug, Clone)]
pub struct Composite<F> {
    pub psi: CliffordGenerator,
    pub f: F,
}

pub fn compose_phi<F: SphereMap>(psi: CliffordGenerator, f: F) -> Result<Composite<F>> {
    if f.target_dim() != 2 * psi.v - 1 {
        return Err(Error::Dimension(format!(
            "ψ lives on S^{} but f maps into S^{}",
            2 * psi.v - 1,
            f.target_dim()
        )));
    }
    Ok(Composite { psi, f })
}

impl<F: SphereMap> MatrixMap for Composite<F> {
    fn manifold(&self) -> &Manifold {
        self.f.manifold()
    }
    fn size(&self) -> usize {
        self.psi.size()
    }
    fn eval(&self, u: &[f64]) -> Result<CMat> {
        Ok(self.psi.value(&self.f.eval(u)?))
    }
    fn partials(&self, u: &[f64]) -> Option<Result<Vec<CMat>>> {
        let jac = self.f.jacobian(u)?;
        Some(jac.map(|j| (0..u.len()).map(|c| self.psi.value(&j.iter().map(|r| r[c]).collect::<Vec<_>>())).collect()))
    }
}

/// A matrix map on `S^q × T^{n-1} × S^{n-2}` in natural coordinates:
/// parameter, boundary angles, and a unit covector direction in frame
/// coordinates.
pub trait CosphereMap: Send + Sync {
    fn q(&self) -> usize;

    /// `n − 1`.
    fn boundary_dim(&self) -> usize;

    fn size(&self) -> usize;

    fn value(&self, lambda: &Param, angles: &[f64], direction: &[f64]) -> Result<CMat>;
}

impl CosphereMap for Composite<CollapseMap> {
    fn q(&self) -> usize {
        self.f.q
    }
    fn boundary_dim(&self) -> usize {
        self.f.n - 1
    }
    fn size(&self) -> usize {
        self.psi.size()
    }
    fn value(&self, lambda: &Param, angles: &[f64], direction: &[f64]) -> Result<CMat> {
        Ok(self.psi.value(&self.f.value(lambda, angles, direction)))
    }
}

/// Sample grid for [`even_polynomial_fit`]: the fit directions on `S^{n-2}`,
/// and the `(λ, θ)` points and directions on which the sup error is measured.
#[derive(Debug, Clone)]
pub struct FitGrid {
    pub directions: Vec<Vec<f64>>,
    pub base_points: Vec<(Param, Vec<f64>)>,
    pub check_directions: Vec<Vec<f64>>,
}

/// Points of `S^{dim-1} ⊂ ℝ^dim`; equally spaced on the circle, Sobol-based otherwise.
pub fn sphere_directions(dim: usize, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if dim == 2 {
        let offset = 0.5 + (seed % 7) as f64 / 16.0;
        return Ok((0..count)
            .map(|k| {
                let a = 2.0 * PI * (k as f64 + offset) / count as f64;
                vec![a.cos(), a.sin()]
            })
            .collect());
    }
    let pts = crate::qmc::sample_unit_cube(dim - 1, count, seed)?;
    Ok(pts
        .into_iter()
        .map(|p| {
            let angles: Vec<f64> = p
                .iter()
                .enumerate()
                .map(|(i, v)| if i + 2 < dim { PI * v } else { 2.0 * PI * v })
                .collect();
            sphere_embed(&angles)
        })
        .collect())
}

impl FitGrid {
    /// Fit directions oversampling the degree, QMC base points including `λ = ∞`.
    pub fn standard(q: usize, boundary_dim: usize, degree: usize, base: usize, seed: u64) -> Result<Self> {
        let monomials = (0..=degree).map(|d| binomial(d + boundary_dim - 1, d)).sum::<usize>();
        let directions = sphere_directions(boundary_dim, 2 * monomials + 8, seed)?;
        let check_directions = sphere_directions(boundary_dim, 3 * monomials + 5, seed + 1)?;
        let pts = crate::qmc::sample_unit_cube(q + boundary_dim, base, seed ^ 0xf17)?;
        let mut base_points = vec![(Param::Infinity, vec![0.3; boundary_dim])];
        for p in pts {
            // The collapse map is non-constant only for |λ| < 1; most points go there.
            let lambda = Param::Finite(p[..q].iter().map(|v| 2.1 * (v - 0.5)).collect());
            base_points.push((lambda, p[q..].iter().map(|v| 2.0 * PI * v).collect()));
        }
        Ok(FitGrid { directions, base_points, check_directions })
    }
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Homogeneous even matrix polynomial `h(λ, x′, ξ′) = Σ_{|α| even} |ξ′|^{2s−|α|} a_α(λ, x′) ξ′^α`.
///
/// The coefficients are fixed linear combinations of the source map at the
/// fit directions, `a_α = Σ_k P_{αk} φ(λ, x′, w_k)`, so they are as smooth in
/// `(λ, x′)` as `φ`.
pub struct EvenPolySymbol {
    source: Arc<dyn CosphereMap>,
    degree: usize,
    directions: Vec<Vec<f64>>,
    /// Even monomials with their rows of the pseudo-inverse.
    weights: Vec<(MultiIndex, Vec<f64>)>,
    report: FitReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub degree: usize,
    /// Sup over the check grid of `‖h − φ‖₂` on `|ξ′| = 1`.
    pub achieved_error: f64,
    pub target_error: f64,
    pub passed: bool,
    /// Smallest singular value of `φ` and of `h` over the check grid.
    pub min_singular_source: f64,
    pub min_singular_fit: f64,
    pub worst: Option<Location>,
    pub grid_points: usize,
}

impl EvenPolySymbol {
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn size(&self) -> usize {
        self.source.size()
    }

    pub fn q(&self) -> usize {
        self.source.q()
    }

    pub fn boundary_dim(&self) -> usize {
        self.source.boundary_dim()
    }

    pub fn report(&self) -> &FitReport {
        &self.report
    }

    fn samples(&self, lambda: &Param, angles: &[f64]) -> Result<Vec<CMat>> {
        self.directions.iter().map(|w| self.source.value(lambda, angles, w)).collect()
    }

    fn combine(&self, samples: &[CMat], xi_t: &[f64]) -> CMat {
        let size = self.source.size();
        let norm = xi_t.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut out = CMat::zeros(size, size);
        if norm == 0.0 {
            return out;
        }
        let unit: Vec<f64> = xi_t.iter().map(|v| v / norm).collect();
        let scale = norm.powi(self.degree as i32);
        let mut lk = vec![0.0; samples.len()];
        for (alpha, row) in &self.weights {
            let mono = alpha.monomial(&unit);
            for (l, p) in lk.iter_mut().zip(row) {
                *l += p * mono;
            }
        }
        for (l, s) in lk.iter().zip(samples) {
            out += s * C64::from(l * scale);
        }
        out
    }

    /// `h(λ, x′, ξ′)` with `ξ′` in boundary frame coordinates.
    pub fn eval(&self, lambda: &Param, angles: &[f64], xi_t: &[f64]) -> Result<CMat> {
        Ok(self.combine(&self.samples(lambda, angles)?, xi_t))
    }
}

/// Least-squares fit of `ξ′ ↦ φ(λ, x′, ξ′)` by matrix polynomials of degree
/// `≤ degree`, reduced to the even part and homogenized to degree `degree`.
/// An unreachable `target_error` is reported through [`FitReport::passed`].
pub fn even_polynomial_fit(
    source: Arc<dyn CosphereMap>,
    degree: usize,
    grid: &FitGrid,
    target_error: f64,
) -> Result<EvenPolySymbol> {
    if degree % 2 != 0 {
        return Err(Error::Invalid(format!("the homogenized symbol must have even degree, got {degree}")));
    }
    let dim = source.boundary_dim();
    if grid.directions.iter().chain(&grid.check_directions).any(|w| w.len() != dim) {
        return Err(Error::Dimension(format!("fit directions must lie in ℝ^{dim}")));
    }
    let monomials: Vec<MultiIndex> = (0..=degree).flat_map(|d| MultiIndex::all_of_order(dim, d)).collect();
    let k = grid.directions.len();
    if k < monomials.len() {
        return Err(Error::Invalid(format!("{k} fit directions for {} monomials", monomials.len())));
    }
    let design = DMatrix::from_fn(k, monomials.len(), |i, j| monomials[j].monomial(&grid.directions[i]));
    let pinv = design
        .svd(true, true)
        .pseudo_inverse(1e-10 * k as f64)
        .map_err(|e| Error::Invalid(format!("fit design matrix: {e}")))?;
    let weights = monomials
        .into_iter()
        .enumerate()
        .filter(|(_, a)| a.order() % 2 == 0)
        .map(|(j, a)| (a, pinv.row(j).iter().copied().collect()))
        .collect();
    let mut symbol = EvenPolySymbol {
        source,
        degree,
        directions: grid.directions.clone(),
        weights,
        report: FitReport {
            degree,
            achieved_error: 0.0,
            target_error,
            passed: false,
            min_singular_source: f64::INFINITY,
            min_singular_fit: f64::INFINITY,
            worst: None,
            grid_points: 0,
        },
    };
    let mut report = symbol.report.clone();
    for (lambda, angles) in &grid.base_points {
        let samples = symbol.samples(lambda, angles)?;
        for w in &grid.check_directions {
            let phi = symbol.source.value(lambda, angles, w)?;
            let h = symbol.combine(&samples, w);
            let err = spectral_norm(&(&h - &phi));
            if err > report.achieved_error || report.worst.is_none() {
                report.achieved_error = report.achieved_error.max(err);
                report.worst = Some(Location::new(lambda, angles, w));
            }
            report.min_singular_source = report.min_singular_source.min(min_singular_value(&phi));
            report.min_singular_fit = report.min_singular_fit.min(min_singular_value(&h));
            report.grid_points += 1;
        }
    }
    report.passed = report.achieved_error <= target_error;
    symbol.report = report;
    Ok(symbol)
}

/// Boundary rows `ℬ = ℋ ∘ (γ_0, …, γ_{l-1})`: row `i` applies
/// `h_{i, jm+c} |ξ′|^{l-1-j}` to the `j`-th normal jet of component `c`.
pub struct ClutchedBoundary {
    h: Arc<EvenPolySymbol>,
    domain: Domain,
    m: usize,
    l: usize,
}

impl BoundaryField for ClutchedBoundary {
    fn rows(&self) -> usize {
        self.m * self.l
    }
    fn size(&self) -> usize {
        self.m
    }
    fn orders(&self) -> Vec<usize> {
        vec![self.h.degree() + self.l - 1; self.m * self.l]
    }
    fn coefficients(&self, lambda: &Param, x: &[f64], xi_t: &[f64]) -> Result<Vec<CMat>> {
        let r = self.m * self.l;
        let angles = self.domain.boundary_angles(x);
        let frame = self.domain.boundary_frame(&angles);
        let s = frame.tangent_coords(xi_t);
        let norm = s.iter().map(|v| v * v).sum::<f64>().sqrt();
        let h = self.h.eval(lambda, &angles, &s)?;
        let h = stabilize(&h, r - h.nrows());
        Ok((0..self.l)
            .map(|j| {
                let scale = C64::from(norm.powi((self.l - 1 - j) as i32));
                CMat::from_fn(r, self.m, |i, c| h[(i, j * self.m + c)] * scale)
            })
            .collect())
    }
    fn depends_on_lambda(&self) -> bool {
        true
    }
}

/// The assembled model problem and the facts about it that live outside the
/// symbol data.
pub struct AssembledExample {
    pub family: SymbolFamily,
    /// Zeroth-order shift of `(Δ^l + μ) Id_m`; invisible to principal symbols.
    pub mu_shift: f64,
    pub fit: FitReport,
    /// Operator-level hypotheses that symbol data cannot certify.
    pub unverifiable: Vec<String>,
}

/// `(ℒ, ℬ) = ((Δ^l + μ) Id_m, ℋ ∘ (γ_0, …, γ_{l-1}))` on the solid torus in `ℝ^n`.
pub fn assemble_example(
    q: usize,
    n: usize,
    m: usize,
    l: usize,
    mu_shift: f64,
    h: Arc<EvenPolySymbol>,
) -> Result<AssembledExample> {
    let r = m * l;
    if m == 0 || l == 0 {
        return Err(Error::Dimension("m and l must be positive".into()));
    }
    if r < q + 2 * n - 3 {
        return Err(Error::Dimension(format!("need r = ml ≥ q + 2n − 3 = {}, got r = {r}", q + 2 * n - 3)));
    }
    if h.q() != q || h.boundary_dim() + 1 != n {
        return Err(Error::Dimension(format!(
            "boundary symbol built for q = {}, n = {}; asked for q = {q}, n = {n}",
            h.q(),
            h.boundary_dim() + 1
        )));
    }
    if h.size() > r {
        return Err(Error::Dimension(format!("boundary symbol of size {} exceeds r = {r}", h.size())));
    }
    let domain = Domain::torus(n)?;
    let interior = InteriorSymbol::polyharmonic(n, l, m);
    let fit = h.report().clone();
    let boundary = BoundarySymbol::new(ClutchedBoundary { h, domain: domain.clone(), m, l });
    let mut family = SymbolFamily::new(interior, boundary, q, domain)?;
    family.complex = true;
    family.realified = true;
    family.name = "clutched-example".into();
    let unverifiable = vec![
        "ind H_∞ = 0 and invertibility of H_∞ (after a lower-order perturbation) are operator-level statements".into(),
        format!("unique solvability of the problem at λ = ∞ relies on the shift μ = {mu_shift} being large"),
    ];
    Ok(AssembledExample { family, mu_shift, fit, unverifiable })
}

/// Knobs of the full example pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct ExampleParams {
    pub q: usize,
    pub n: usize,
    pub m: usize,
    pub l: usize,
    pub fit_degree: usize,
    /// Number of `(λ, x′)` base points in the fit certificate grid.
    pub fit_base: usize,
    pub target_error: f64,
    pub mu_shift: f64,
    pub seed: u64,
}

impl Default for ExampleParams {
    fn default() -> Self {
        ExampleParams { q: 4, n: 3, m: 8, l: 1, fit_degree: 6, fit_base: 256, target_error: 0.25, mu_shift: 1.0, seed: 3 }
    }
}

/// Generator for `π_{q+2n-3}(U)`, collapse map, fit and assembly in one go.
pub fn construct_example(p: &ExampleParams) -> Result<AssembledExample> {
    let dim = p.q + 2 * p.n - 3;
    if dim % 2 == 0 {
        return Err(Error::Invalid(format!("q + 2n − 3 = {dim} must be odd; q must be even")));
    }
    let psi = clifford_generator(dim.div_ceil(2))?;
    let phi = Arc::new(compose_phi(psi, build_f(p.q, p.n)?)?);
    let grid = FitGrid::standard(p.q, p.n - 1, p.fit_degree, p.fit_base, p.seed)?;
    let h = even_polynomial_fit(phi, p.fit_degree, &grid, p.target_error)?;
    assemble_example(p.q, p.n, p.m, p.l, p.mu_shift, Arc::new(h))
}

/// Chart points of `S^dim` away from the polar singularities, for
/// [`degree_by_invariance`].
pub fn invariance_probes(dim: usize, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    Ok(crate::qmc::sample_unit_cube(dim, count, seed)?
        .into_iter()
        .map(|p| {
            p.iter()
                .enumerate()
                .map(|(i, v)| if i + 1 < dim { 0.3 + 2.5 * v } else { 2.0 * PI * v })
                .collect()
        })
        .collect())
}

/// The degrees behind `deg φ = deg_B f · deg ψ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainReport {
    /// Brouwer degree of the collapse map.
    pub collapse: DegreeResult,
    /// Degree of the generator `ψ`, from its invariant form.
    pub generator: DegreeResult,
    /// `rounded(collapse) · rounded(generator)`, the complex degree of `φ`.
    pub composite: i64,
    /// `2 · composite`, the degree seen by the realified family.
    pub realified: i64,
}

impl ChainReport {
    pub fn is_verdict_grade(&self) -> bool {
        self.collapse.is_verdict_grade() && self.generator.is_verdict_grade()
    }
}

/// `deg φ` for `φ = ψ ∘ f` through the chain property: the generator's form is
/// `SO(2v)`-invariant, so pulling it back through `f` multiplies its integral
/// by the Brouwer degree of `f`.
pub fn chain_degrees(q: usize, n: usize, options: &DegreeOptions, exec: &dyn Executor) -> Result<ChainReport> {
    let f = build_f(q, n)?;
    let dim = q + 2 * n - 3;
    let psi = clifford_generator(dim.div_ceil(2))?;
    let collapse = brouwer_degree(&f, options, exec)?;
    let generator = degree_by_invariance(&psi, &invariance_probes(dim, 16, 3)?, options.fd_step)?;
    let composite = collapse.rounded * generator.rounded;
    Ok(ChainReport { collapse, generator, composite, realified: 2 * composite })
}
