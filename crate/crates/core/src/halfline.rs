//! The conormal half-line problem at a boundary covector: roots, the stable
//! subspace of decaying solutions, the boundary map, and `τ`.
//!
//! With `D_t = -i d/dt` along the inner normal, `p(λ, x′, ξ′, D_t) v = 0` is
//! written as `D_t y = A y` for the jet `y = (v, D_t v, …, D_t^{k-1} v)`. A
//! solution `e^{iνt}` decays exactly when `Im ν > 0`.

use crate::prelude::*;


use crate::degree::{finite_difference_partials, MatrixMap};
use crate::error::{Error, Location, Result};
use crate::geometry::BoundaryFrame;
use crate::linalg::{condition_number, identity, right_divide, CMat, C64, ZERO};
use crate::manifold::{sphere_embed, Factor, Manifold};
use crate::symbol::{BoundarySymbol, Param, SymbolFamily};

/// Jet-space form of the conormal ODE.
#[derive(Debug, Clone, PartialEq)]
pub struct CompanionSystem {
    /// `km × km`.
    pub a: CMat,
    pub order: usize,
    pub size: usize,
    /// `p(λ, x′, η)`, the coefficient of `ν^k`.
    pub leading: CMat,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootSplit {
    pub upper: usize,
    pub lower: usize,
    pub min_abs_im: f64,
}

/// Orthonormal basis of the decaying-solution jets.
#[derive(Debug, Clone, PartialEq)]
pub struct StableSubspace {
    /// `km × r`.
    pub basis: CMat,
}

/// Default root-axis tolerance `1e-8 (1 + |ξ′|)^k`.
pub fn root_tolerance(xi_t: &[f64], order: usize) -> f64 {
    let norm = xi_t.iter().map(|v| v * v).sum::<f64>().sqrt();
    1e-8 * (1.0 + norm).powi(order as i32)
}

/// Condition number above which the boundary map counts as singular.
pub const SL_CONDITION_LIMIT: f64 = 1e8;

pub fn build_companion(
    family: &SymbolFamily,
    lambda: &Param,
    frame: &BoundaryFrame,
    xi_t: &[f64],
) -> Result<CompanionSystem> {
    let eta = frame.inner_normal();
    let polys = family.interior.conormal_polynomial(lambda, &frame.point, xi_t, &eta)?;
    let (k, m) = (family.interior.order(), family.interior.size());
    let leading = polys[k].clone();
    let lu = leading.clone().lu();
    let not_normal = || Error::NotNormal(Location::new(lambda, &frame.point, xi_t));
    if !lu.is_invertible() || condition_number(&leading) > 1e12 {
        return Err(not_normal());
    }
    let mut a = CMat::zeros(k * m, k * m);
    for i in 0..k - 1 {
        for c in 0..m {
            a[(i * m + c, (i + 1) * m + c)] = C64::from(1.0);
        }
    }
    for j in 0..k {
        let block = -lu.solve(&polys[j]).ok_or_else(not_normal)?;
        a.view_mut(((k - 1) * m, j * m), (m, m)).copy_from(&block);
    }
    Ok(CompanionSystem { a, order: k, size: m, leading })
}

/// Complex Schur form `A = Q T Qᴴ` with eigenvalues of positive imaginary part first.
fn ordered_schur(a: &CMat) -> (CMat, CMat) {
    let (mut q, mut t) = a.clone().schur().unpack();
    let n = t.nrows();
    for r in 1..n {
        for c in 0..r {
            t[(r, c)] = ZERO;
        }
    }
    let upper = |z: C64| z.im > 0.0;
    // Bubble the selected eigenvalues to the top with adjacent Givens swaps.
    let mut changed = true;
    while changed {
        changed = false;
        for k in 0..n.saturating_sub(1) {
            if !upper(t[(k, k)]) && upper(t[(k + 1, k + 1)]) {
                swap_adjacent(&mut t, &mut q, k);
                changed = true;
            }
        }
    }
    (q, t)
}

fn swap_adjacent(t: &mut CMat, q: &mut CMat, k: usize) {
    let n = t.nrows();
    let (a, b, c) = (t[(k, k)], t[(k, k + 1)], t[(k + 1, k + 1)]);
    // Eigenvector of [[a, b], [0, c]] for c.
    let (u0, u1) = (b, c - a);
    let norm = (u0.norm_sqr() + u1.norm_sqr()).sqrt();
    if norm == 0.0 {
        return;
    }
    let (u0, u1) = (u0 / norm, u1 / norm);
    let g = [[u0, -u1.conj()], [u1, u0.conj()]];
    for r in 0..n {
        let (x, y) = (t[(r, k)], t[(r, k + 1)]);
        t[(r, k)] = x * g[0][0] + y * g[1][0];
        t[(r, k + 1)] = x * g[0][1] + y * g[1][1];
        let (x, y) = (q[(r, k)], q[(r, k + 1)]);
        q[(r, k)] = x * g[0][0] + y * g[1][0];
        q[(r, k + 1)] = x * g[0][1] + y * g[1][1];
    }
    for col in 0..n {
        let (x, y) = (t[(k, col)], t[(k + 1, col)]);
        t[(k, col)] = g[0][0].conj() * x + g[1][0].conj() * y;
        t[(k + 1, col)] = g[0][1].conj() * x + g[1][1].conj() * y;
    }
    t[(k + 1, k)] = ZERO;
}

fn eigenvalues(a: &CMat) -> Vec<C64> {
    let (_, t) = a.clone().schur().unpack();
    (0..t.nrows()).map(|i| t[(i, i)]).collect()
}

pub fn split_roots(cs: &CompanionSystem, tol: f64) -> Result<RootSplit> {
    let ev = eigenvalues(&cs.a);
    let upper = ev.iter().filter(|z| z.im > 0.0).count();
    let min_abs_im = ev.iter().map(|z| z.im.abs()).fold(f64::INFINITY, f64::min);
    if min_abs_im < tol {
        return Err(Error::RootOnAxis {
            min_abs_im,
            location: Location { lambda: None, at_infinity: false, point: Vec::new(), covector: Vec::new() },
        });
    }
    Ok(RootSplit { upper, lower: ev.len() - upper, min_abs_im })
}

/// Invariant subspace for `Im ν > 0` by ordered Schur form; `expected` is `r`.
pub fn stable_subspace(cs: &CompanionSystem, expected: usize, tol: f64) -> Result<StableSubspace> {
    let (q, t) = ordered_schur(&cs.a);
    let n = t.nrows();
    let diag: Vec<C64> = (0..n).map(|i| t[(i, i)]).collect();
    let min_abs_im = diag.iter().map(|z| z.im.abs()).fold(f64::INFINITY, f64::min);
    let empty = Location { lambda: None, at_infinity: false, point: Vec::new(), covector: Vec::new() };
    if min_abs_im < tol {
        return Err(Error::RootOnAxis { min_abs_im, location: empty });
    }
    let found = diag.iter().filter(|z| z.im > 0.0).count();
    if found != expected {
        return Err(Error::StableDimension { found, expected, location: empty });
    }
    Ok(StableSubspace { basis: q.columns(0, found).into_owned() })
}

/// `‖(I − VVᴴ) A V‖`.
pub fn invariance_residual(cs: &CompanionSystem, m: &StableSubspace) -> f64 {
    let v = &m.basis;
    let av = &cs.a * v;
    crate::linalg::spectral_norm(&(&av - v * (v.adjoint() * &av)))
}

/// `Σ_j P^{(j)} E_0 A^j`, the boundary rows acting on Cauchy data (`r × km`).
pub fn boundary_rows(cs: &CompanionSystem, coeffs: &[CMat]) -> CMat {
    let (k, m) = (cs.order, cs.size);
    let r = coeffs.first().map_or(0, |c| c.nrows());
    let mut out = CMat::zeros(r, k * m);
    let mut jet_row = CMat::zeros(m, k * m);
    for (j, p) in coeffs.iter().enumerate() {
        if j < k {
            // E_0 A^j = E_j exactly.
            jet_row.fill(ZERO);
            for c in 0..m {
                jet_row[(c, j * m + c)] = C64::from(1.0);
            }
        } else {
            jet_row = &jet_row * &cs.a;
        }
        if p.iter().any(|z| *z != ZERO) {
            out += p * &jet_row;
        }
    }
    out
}

/// `b = B V`, the boundary symbol on the stable basis (`r × r`).
pub fn apply_boundary_map(cs: &CompanionSystem, coeffs: &[CMat], stable: &StableSubspace) -> CMat {
    boundary_rows(cs, coeffs) * &stable.basis
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlReport {
    pub condition: f64,
    pub split: RootSplit,
}

/// Everything computed at one boundary covector.
pub struct HalfLinePoint {
    pub companion: CompanionSystem,
    pub stable: StableSubspace,
}

fn with_location(e: Error, lambda: &Param, frame: &BoundaryFrame, xi_t: &[f64]) -> Error {
    let location = Location::new(lambda, &frame.point, xi_t);
    match e {
        Error::RootOnAxis { min_abs_im, .. } => Error::RootOnAxis { min_abs_im, location },
        Error::StableDimension { found, expected, .. } => Error::StableDimension { found, expected, location },
        other => other,
    }
}

/// Companion system and stable subspace at `(λ, x′, ξ′)`.
pub fn half_line(family: &SymbolFamily, lambda: &Param, frame: &BoundaryFrame, xi_t: &[f64]) -> Result<HalfLinePoint> {
    let companion = build_companion(family, lambda, frame, xi_t)?;
    let tol = root_tolerance(xi_t, companion.order);
    let stable =
        stable_subspace(&companion, family.r(), tol).map_err(|e| with_location(e, lambda, frame, xi_t))?;
    Ok(HalfLinePoint { companion, stable })
}

/// Proper ellipticity and the Shapiro-Lopatinskij condition at one covector.
pub fn check_shapiro_lopatinskij(
    family: &SymbolFamily,
    boundary: &BoundarySymbol,
    lambda: &Param,
    frame: &BoundaryFrame,
    xi_t: &[f64],
) -> Result<SlReport> {
    let hl = half_line(family, lambda, frame, xi_t)?;
    let tol = root_tolerance(xi_t, hl.companion.order);
    let split = split_roots(&hl.companion, tol).map_err(|e| with_location(e, lambda, frame, xi_t))?;
    let coeffs = boundary.coefficients(lambda, &frame.point, xi_t)?;
    let b = apply_boundary_map(&hl.companion, &coeffs, &hl.stable);
    let condition = condition_number(&b);
    if !(condition < SL_CONDITION_LIMIT) {
        return Err(Error::ShapiroLopatinskij { condition, location: Location::new(lambda, &frame.point, xi_t) });
    }
    Ok(SlReport { condition, split })
}

/// `τ = (B(λ)V)(B(∞)V)⁻¹`, or `(B_+(λ)V)(B_-(λ)V)⁻¹` for two boundary families,
/// on `S^q × Γ × S^{n-2}`.
pub struct TauMap {
    family: SymbolFamily,
    manifold: Manifold,
    fd_step: f64,
}

/// Collar samples `(angles, depth)` used to certify `λ`-independence of the interior.
pub fn collar_samples(boundary_dim: usize, count: usize, seed: u64) -> Result<Vec<(Vec<f64>, f64)>> {
    let pts = crate::qmc::sample_unit_cube(boundary_dim + 1, count, seed)?;
    Ok(pts
        .into_iter()
        .map(|p| (p[..boundary_dim].iter().map(|v| 2.0 * core::f64::consts::PI * v).collect(), p[boundary_dim]))
        .collect())
}

/// `max ‖p(λ, x, ξ) − p(∞, x, ξ)‖` over collar samples with random `λ` and unit `ξ`.
pub fn collar_deviation(family: &SymbolFamily, samples: usize, seed: u64) -> Result<(f64, Option<Location>)> {
    if !family.interior.depends_on_lambda() {
        return Ok((0.0, None));
    }
    let n = family.n();
    let q = family.q;
    let collar = collar_samples(n - 1, samples, seed)?;
    let extra = crate::qmc::sample_unit_cube(q + n, samples, seed ^ 0x5eed)?;
    let mut worst = (0.0, None);
    for ((angles, t), e) in collar.iter().zip(&extra) {
        let x = family.domain.collar_point(angles, *t);
        let lambda = Param::Finite(e[..q].iter().map(|v| 8.0 * (v - 0.5)).collect());
        let mut xi: Vec<f64> = e[q..].iter().map(|v| v - 0.5).collect();
        let norm = xi.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-12);
        xi.iter_mut().for_each(|v| *v /= norm);
        let a = family.interior.eval(&lambda, &x, &xi)?;
        let b = family.interior.eval(&Param::Infinity, &x, &xi)?;
        let d = (a - b).norm();
        if d > worst.0 {
            worst = (d, Some(Location::new(&lambda, &x, &xi)));
        }
    }
    Ok(worst)
}

/// Tolerance for the collar `λ`-independence check.
pub const COLLAR_TOLERANCE: f64 = 1e-12;

pub fn build_tau(family: &SymbolFamily, fd_step: f64) -> Result<TauMap> {
    let cosphere = family.domain.cosphere_factors()?;
    let (deviation, location) = collar_deviation(family, 256, 17)?;
    if deviation > COLLAR_TOLERANCE {
        return Err(Error::CollarDependence { deviation, location: location.expect("nonzero deviation has a sample") });
    }
    let mut factors = vec![Factor::Sphere(family.q)];
    factors.extend(cosphere);
    Ok(TauMap { family: family.clone(), manifold: Manifold::new(factors)?, fd_step })
}

struct TauPoint {
    lambda: Param,
    frame: BoundaryFrame,
    xi_t: Vec<f64>,
}

impl TauMap {
    pub fn family(&self) -> &SymbolFamily {
        &self.family
    }

    fn point(&self, u: &[f64]) -> TauPoint {
        let q = self.family.q;
        let n = self.family.n();
        let lambda = Param::from_chart(&u[..q]);
        let frame = self.family.domain.boundary_frame(&u[q..q + n - 1]);
        let s = sphere_embed(&u[q + n - 1..]);
        let xi_t = frame.tangent_vector(&s);
        TauPoint { lambda, frame, xi_t }
    }

    /// `τ` at explicit `(λ, x′, ξ′)`.
    pub fn value(&self, lambda: &Param, frame: &BoundaryFrame, xi_t: &[f64]) -> Result<CMat> {
        let r = self.family.r();
        if self.family.alt_boundary.is_none() && lambda.is_infinity() {
            return Ok(identity(r));
        }
        // The interior is λ-independent on the collar, so M⁺ is computed at ∞.
        let hl = half_line(&self.family, &Param::Infinity, frame, xi_t)?;
        let (num, den) = self.numerator_denominator(&hl, lambda, frame, xi_t)?;
        self.divide(&num, &den, lambda, frame, xi_t)
    }

    fn numerator_denominator(
        &self,
        hl: &HalfLinePoint,
        lambda: &Param,
        frame: &BoundaryFrame,
        xi_t: &[f64],
    ) -> Result<(CMat, CMat)> {
        let b = |sym: &BoundarySymbol, at: &Param| -> Result<CMat> {
            let coeffs = sym.coefficients(at, &frame.point, xi_t)?;
            Ok(apply_boundary_map(&hl.companion, &coeffs, &hl.stable))
        };
        match &self.family.alt_boundary {
            None => Ok((b(&self.family.boundary, lambda)?, b(&self.family.boundary, &Param::Infinity)?)),
            Some(minus) => Ok((b(&self.family.boundary, lambda)?, b(minus, lambda)?)),
        }
    }

    fn divide(&self, num: &CMat, den: &CMat, lambda: &Param, frame: &BoundaryFrame, xi_t: &[f64]) -> Result<CMat> {
        let condition = condition_number(den);
        if !(condition < SL_CONDITION_LIMIT) {
            return Err(Error::ShapiroLopatinskij { condition, location: Location::new(lambda, &frame.point, xi_t) });
        }
        right_divide(num, den).filter(crate::linalg::is_finite).ok_or_else(|| Error::Singular {
            what: format!("boundary map (condition {condition:.3e})"),
            location: Location::new(lambda, &frame.point, xi_t),
        })
    }
}

impl MatrixMap for TauMap {
    fn manifold(&self) -> &Manifold {
        &self.manifold
    }

    fn size(&self) -> usize {
        self.family.r()
    }

    fn eval(&self, u: &[f64]) -> Result<CMat> {
        let p = self.point(u);
        self.value(&p.lambda, &p.frame, &p.xi_t)
    }

    /// Differences in the `λ`-directions reuse the stable basis and `b(∞)`;
    /// the others go through full re-evaluation.
    fn partials(&self, u: &[f64]) -> Option<Result<Vec<CMat>>> {
        Some((|| {
            let q = self.family.q;
            let p = self.point(u);
            let h = self.fd_step;
            let mut out = finite_difference_partials(&RestOfChart { tau: self, base: u, q }, &u[q..], h)?;
            let hl = half_line(&self.family, &Param::Infinity, &p.frame, &p.xi_t)?;
            let fixed_den = match self.family.alt_boundary {
                None => Some(self.numerator_denominator(&hl, &Param::Infinity, &p.frame, &p.xi_t)?.1),
                Some(_) => None,
            };
            let at = |angles: &[f64]| -> Result<CMat> {
                let lambda = Param::from_chart(angles);
                if fixed_den.is_some() && lambda.is_infinity() {
                    return Ok(identity(self.family.r()));
                }
                let (num, den) = self.numerator_denominator(&hl, &lambda, &p.frame, &p.xi_t)?;
                self.divide(&num, fixed_den.as_ref().unwrap_or(&den), &lambda, &p.frame, &p.xi_t)
            };
            let lambda_map = crate::degree::FnMap::new(Manifold::sphere(q), self.family.r(), at);
            let mut lambda_partials = finite_difference_partials(&lambda_map, &u[..q], h)?;
            lambda_partials.append(&mut out);
            Ok(lambda_partials)
        })())
    }

    fn is_constant(&self) -> bool {
        self.family.alt_boundary.is_none() && !self.family.boundary.depends_on_lambda()
    }
}

/// `τ` as a function of the non-`λ` chart coordinates with `λ` frozen.
struct RestOfChart<'a> {
    tau: &'a TauMap,
    base: &'a [f64],
    q: usize,
}

impl MatrixMap for RestOfChart<'_> {
    fn manifold(&self) -> &Manifold {
        &self.tau.manifold
    }
    fn size(&self) -> usize {
        self.tau.size()
    }
    fn eval(&self, rest: &[f64]) -> Result<CMat> {
        let mut u = self.base.to_vec();
        u[self.q..].copy_from_slice(rest);
        self.tau.eval(&u)
    }
}
