//! Bott-Fedosov degree of matrix-valued maps, Brouwer degree of sphere-valued
//! maps, and the first-column degree of unitary maps.
//!
//! Orientation convention: the normalizing constant is chosen so that the
//! winding map `θ ↦ e^{iθ}` on the counterclockwise circle has degree `+1`,
//! and the Brouwer degree of the identity of `S^d` is `+1`.

use crate::prelude::*;
use core::f64::consts::PI;


use crate::error::{Error, Location, Result};
use crate::exec::Executor;
use crate::linalg::{identity, inverse, real_determinant, unitarity_defect, CMat, C64, ZERO};
use crate::manifold::{integrate_top_form, sphere_volume, Integral, Manifold, QuadratureRule};

/// A smooth map from a chart-parametrized manifold into `GL(l; ℂ)`.
pub trait MatrixMap: Sync {
    fn manifold(&self) -> &Manifold;

    /// Matrix size `l`.
    fn size(&self) -> usize;

    fn eval(&self, u: &[f64]) -> Result<CMat>;

    /// Analytic chart partials `∂φ/∂u_j`, when the map knows them.
    fn partials(&self, _u: &[f64]) -> Option<Result<Vec<CMat>>> {
        None
    }

    /// True when the map is known to be constant; its degree is then exactly zero.
    fn is_constant(&self) -> bool {
        false
    }
}

impl<M: MatrixMap + ?Sized> MatrixMap for &M {
    fn manifold(&self) -> &Manifold {
        (**self).manifold()
    }
    fn size(&self) -> usize {
        (**self).size()
    }
    fn eval(&self, u: &[f64]) -> Result<CMat> {
        (**self).eval(u)
    }
    fn partials(&self, u: &[f64]) -> Option<Result<Vec<CMat>>> {
        (**self).partials(u)
    }
    fn is_constant(&self) -> bool {
        (**self).is_constant()
    }
}

impl<M: MatrixMap + ?Sized> MatrixMap for Box<M> {
    fn manifold(&self) -> &Manifold {
        (**self).manifold()
    }
    fn size(&self) -> usize {
        (**self).size()
    }
    fn eval(&self, u: &[f64]) -> Result<CMat> {
        (**self).eval(u)
    }
    fn partials(&self, u: &[f64]) -> Option<Result<Vec<CMat>>> {
        (**self).partials(u)
    }
    fn is_constant(&self) -> bool {
        (**self).is_constant()
    }
}

/// Matrix map given by a closure, differentiated numerically.
pub struct FnMap<F> {
    manifold: Manifold,
    size: usize,
    f: F,
}

impl<F: Fn(&[f64]) -> Result<CMat> + Sync> FnMap<F> {
    pub fn new(manifold: Manifold, size: usize, f: F) -> Self {
        FnMap { manifold, size, f }
    }
}

impl<F: Fn(&[f64]) -> Result<CMat> + Sync> MatrixMap for FnMap<F> {
    fn manifold(&self) -> &Manifold {
        &self.manifold
    }
    fn size(&self) -> usize {
        self.size
    }
    fn eval(&self, u: &[f64]) -> Result<CMat> {
        (self.f)(u)
    }
}

/// Constant map onto a fixed invertible matrix.
pub struct ConstantMap {
    manifold: Manifold,
    value: CMat,
}

impl ConstantMap {
    pub fn new(manifold: Manifold, value: CMat) -> Self {
        ConstantMap { manifold, value }
    }
}

impl MatrixMap for ConstantMap {
    fn manifold(&self) -> &Manifold {
        &self.manifold
    }
    fn size(&self) -> usize {
        self.value.nrows()
    }
    fn eval(&self, _u: &[f64]) -> Result<CMat> {
        Ok(self.value.clone())
    }
    fn partials(&self, _u: &[f64]) -> Option<Result<Vec<CMat>>> {
        let z = CMat::zeros(self.value.nrows(), self.value.ncols());
        Some(Ok(vec![z; self.manifold.dim()]))
    }
    fn is_constant(&self) -> bool {
        true
    }
}

/// `diag(φ, Id_extra)`.
pub struct Stabilized<M> {
    pub inner: M,
    pub extra: usize,
}

impl<M: MatrixMap> MatrixMap for Stabilized<M> {
    fn manifold(&self) -> &Manifold {
        self.inner.manifold()
    }
    fn size(&self) -> usize {
        self.inner.size() + self.extra
    }
    fn eval(&self, u: &[f64]) -> Result<CMat> {
        Ok(crate::linalg::stabilize(&self.inner.eval(u)?, self.extra))
    }
    fn partials(&self, u: &[f64]) -> Option<Result<Vec<CMat>>> {
        let n = self.inner.size();
        let embed = |d: CMat| {
            let mut out = CMat::zeros(n + self.extra, n + self.extra);
            out.view_mut((0, 0), (n, n)).copy_from(&d);
            out
        };
        Some(self.inner.partials(u)?.map(|ps| ps.into_iter().map(embed).collect()))
    }
    fn is_constant(&self) -> bool {
        self.inner.is_constant()
    }
}

/// Pointwise product `φ·ψ` of two maps on the same manifold.
pub struct PointwiseProduct<A, B> {
    pub left: A,
    pub right: B,
}

impl<A: MatrixMap, B: MatrixMap> PointwiseProduct<A, B> {
    pub fn new(left: A, right: B) -> Result<Self> {
        if left.manifold() != right.manifold() || left.size() != right.size() {
            return Err(Error::Dimension("pointwise product needs equal manifolds and sizes".into()));
        }
        Ok(PointwiseProduct { left, right })
    }
}

impl<A: MatrixMap, B: MatrixMap> MatrixMap for PointwiseProduct<A, B> {
    fn manifold(&self) -> &Manifold {
        self.left.manifold()
    }
    fn size(&self) -> usize {
        self.left.size()
    }
    fn eval(&self, u: &[f64]) -> Result<CMat> {
        Ok(self.left.eval(u)? * self.right.eval(u)?)
    }
    fn partials(&self, u: &[f64]) -> Option<Result<Vec<CMat>>> {
        let (pl, pr) = (self.left.partials(u)?, self.right.partials(u)?);
        Some((|| {
            let (a, b) = (self.left.eval(u)?, self.right.eval(u)?);
            Ok(pl?.iter().zip(pr?.iter()).map(|(da, db)| da * &b + &a * db).collect())
        })())
    }
    fn is_constant(&self) -> bool {
        self.left.is_constant() && self.right.is_constant()
    }
}

/// `g φ h` for constant matrices `g`, `h`; conjugation when `h = g⁻¹`.
pub struct Sandwiched<M> {
    pub inner: M,
    pub left: CMat,
    pub right: CMat,
}

impl<M: MatrixMap> Sandwiched<M> {
    pub fn conjugate(inner: M, g: CMat) -> Result<Self> {
        let g_inv = inverse(&g).ok_or_else(|| Error::Invalid("conjugating matrix is singular".into()))?;
        Ok(Sandwiched { inner, left: g, right: g_inv })
    }

    /// `φ · c` for a constant invertible `c`.
    pub fn right_multiplied(inner: M, c: CMat) -> Self {
        let n = inner.size();
        Sandwiched { inner, left: identity(n), right: c }
    }
}

impl<M: MatrixMap> MatrixMap for Sandwiched<M> {
    fn manifold(&self) -> &Manifold {
        self.inner.manifold()
    }
    fn size(&self) -> usize {
        self.inner.size()
    }
    fn eval(&self, u: &[f64]) -> Result<CMat> {
        Ok(&self.left * self.inner.eval(u)? * &self.right)
    }
    fn partials(&self, u: &[f64]) -> Option<Result<Vec<CMat>>> {
        Some(self.inner.partials(u)?.map(|ps| ps.iter().map(|d| &self.left * d * &self.right).collect()))
    }
    fn is_constant(&self) -> bool {
        self.inner.is_constant()
    }
}

/// Pointwise power `φ^k`, `k ≥ 1`.
pub struct PowerMap<M> {
    pub inner: M,
    pub exponent: u32,
}

impl<M: MatrixMap> MatrixMap for PowerMap<M> {
    fn manifold(&self) -> &Manifold {
        self.inner.manifold()
    }
    fn size(&self) -> usize {
        self.inner.size()
    }
    fn eval(&self, u: &[f64]) -> Result<CMat> {
        let a = self.inner.eval(u)?;
        let mut out = identity(a.nrows());
        for _ in 0..self.exponent {
            out *= &a;
        }
        Ok(out)
    }
    fn partials(&self, u: &[f64]) -> Option<Result<Vec<CMat>>> {
        let ps = self.inner.partials(u)?;
        Some((|| {
            let a = self.inner.eval(u)?;
            let k = self.exponent as usize;
            let mut powers = vec![identity(a.nrows())];
            for i in 0..k {
                let next = &powers[i] * &a;
                powers.push(next);
            }
            Ok(ps?
                .iter()
                .map(|d| {
                    let mut acc = CMat::zeros(a.nrows(), a.ncols());
                    for i in 0..k {
                        acc += &powers[i] * d * &powers[k - 1 - i];
                    }
                    acc
                })
                .collect())
        })())
    }
    fn is_constant(&self) -> bool {
        self.inner.is_constant() || self.exponent == 0
    }
}

/// Default relative step for finite-difference partials.
pub const DEFAULT_FD_STEP: f64 = 1e-3;

/// Five-point central differences in each chart direction.
pub fn finite_difference_partials(map: &dyn MatrixMap, u: &[f64], step: f64) -> Result<Vec<CMat>> {
    let mut probe = u.to_vec();
    let mut out = Vec::with_capacity(u.len());
    for j in 0..u.len() {
        let mut at = |offset: f64| -> Result<CMat> {
            probe[j] = u[j] + offset;
            let v = map.eval(&probe);
            probe[j] = u[j];
            v
        };
        let (p2, p1, m1, m2) = (at(2.0 * step)?, at(step)?, at(-step)?, at(-2.0 * step)?);
        out.push((p1 - m1) * C64::from(8.0 / (12.0 * step)) - (p2 - m2) * C64::from(1.0 / (12.0 * step)));
    }
    Ok(out)
}

fn partials_of(map: &dyn MatrixMap, u: &[f64], step: f64) -> Result<Vec<CMat>> {
    match map.partials(u) {
        Some(p) => p,
        None => finite_difference_partials(map, u, step),
    }
}

/// `A_j = φ⁻¹ ∂_j φ` at a chart point.
pub fn maurer_cartan_coeffs(map: &dyn MatrixMap, u: &[f64], step: f64) -> Result<Vec<CMat>> {
    let phi = map.eval(u)?;
    let lu = phi.lu();
    let singular = || Error::Singular { what: "map value".into(), location: Location::chart(u) };
    if !lu.is_invertible() {
        return Err(singular());
    }
    partials_of(map, u, step)?
        .iter()
        .map(|d| lu.solve(d).filter(crate::linalg::is_finite).ok_or_else(singular))
        .collect()
}

/// Top exterior coefficient `Σ_π sgn(π) tr(A_{π(1)} ⋯ A_{π(d)})` of
/// `tr(ω^d)` for `ω = Σ_j A_j du_j`, `d` odd.
///
/// Successive powers `ω^t` are kept as coefficient matrices indexed by
/// increasing index sets; the last multiplication only forms traces. For odd
/// `d` a cyclic rotation of the word is an even permutation and leaves the
/// trace unchanged, so only words starting with `A_1` are expanded and the
/// sum is multiplied by `d`.
pub fn trace_odd_power(coeffs: &[CMat]) -> Result<C64> {
    let d = coeffs.len();
    if d % 2 == 0 {
        return Err(Error::Dimension(format!("tr(ω^d) needs odd d, got {d}")));
    }
    if d > 15 {
        return Err(Error::Dimension(format!("form degree {d} exceeds 15")));
    }
    let l = coeffs[0].nrows();
    if coeffs.iter().any(|a| a.nrows() != l || a.ncols() != l) {
        return Err(Error::Dimension("coefficients must be square of equal size".into()));
    }
    if d == 1 {
        return Ok(coeffs[0].trace());
    }
    // e_S ∧ e_j = (-1)^{#{s ∈ S : s > j}} e_{S ∪ {j}}
    let sign = |mask: usize, j: usize| if (mask >> (j + 1)).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
    let mut level: Vec<(usize, CMat)> = vec![(1, coeffs[0].clone())];
    for _ in 2..d {
        let mut next: Vec<Option<CMat>> = vec![None; 1 << d];
        for (mask, m) in &level {
            for (j, a) in coeffs.iter().enumerate() {
                if mask & (1 << j) != 0 {
                    continue;
                }
                let prod = m * a;
                let slot = &mut next[mask | (1 << j)];
                match slot {
                    Some(acc) => {
                        if sign(*mask, j) > 0.0 {
                            *acc += prod
                        } else {
                            *acc -= prod
                        }
                    }
                    None => *slot = Some(if sign(*mask, j) > 0.0 { prod } else { -prod }),
                }
            }
        }
        level = next.into_iter().enumerate().filter_map(|(mask, m)| m.map(|m| (mask, m))).collect();
    }
    let full = (1usize << d) - 1;
    let mut total = ZERO;
    for (mask, m) in &level {
        let j = (full ^ mask).trailing_zeros() as usize;
        let a = &coeffs[j];
        // tr(M A) = Σ_{ab} M_ab A_ba
        let mut t = ZERO;
        for r in 0..l {
            for c in 0..l {
                t += m[(r, c)] * a[(c, r)];
            }
        }
        total += t * sign(*mask, j);
    }
    Ok(total * d as f64)
}

/// `−(i/2π)^v (v-1)! / (2v-1)!`.
///
/// Normalized so that `θ ↦ e^{iθ}` has degree `+1` and the degree agrees with
/// the first-column degree on `SU(2)`; this is `(−1)^v` times the constant
/// with `(2πi)^v` in the denominator and an overall minus sign.
pub fn bott_fedosov_constant(v: usize) -> C64 {
    let fact = |n: usize| (1..=n).map(|k| k as f64).product::<f64>();
    let i_over_two_pi = C64::new(0.0, 1.0 / (2.0 * PI)).powu(v as u32);
    -i_over_two_pi * (fact(v - 1) / fact(2 * v - 1))
}

/// Unnormalized integrand `tr(φ⁻¹dφ)^{2v-1}` as a chart-coordinate density.
pub fn bott_fedosov_integrand(map: &dyn MatrixMap, u: &[f64], step: f64) -> Result<C64> {
    trace_odd_power(&maurer_cartan_coeffs(map, u, step)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Budget {
    pub nodes: usize,
    pub doublings: u32,
    /// Filled in by callers that own a clock.
    pub wall_seconds: Option<f64>,
    pub rule: Option<QuadratureRule>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DegreeResult {
    pub raw: C64,
    pub rounded: i64,
    /// `|raw − rounded|`.
    pub residual: f64,
    pub error_estimate: f64,
    pub budget: Budget,
    /// Known exactly without quadrature (constant maps).
    pub exact: bool,
}

/// Residual threshold below which a degree counts as an integer.
pub const VERDICT_RESIDUAL: f64 = 0.25;

impl DegreeResult {
    pub fn from_integral(value: C64, error: f64, budget: Budget) -> Self {
        let rounded = value.re.round() as i64;
        let residual = (value - C64::from(rounded as f64)).norm();
        DegreeResult { raw: value, rounded, residual, error_estimate: error, budget, exact: false }
    }

    pub fn exact(value: i64) -> Self {
        DegreeResult {
            raw: C64::from(value as f64),
            rounded: value,
            residual: 0.0,
            error_estimate: 0.0,
            budget: Budget { nodes: 0, doublings: 0, wall_seconds: None, rule: None },
            exact: true,
        }
    }

    pub fn imaginary_ok(&self) -> bool {
        self.raw.im.abs() < 1e-6 * (1.0 + self.raw.norm())
    }

    /// Integer to within the verdict threshold with negligible imaginary part.
    pub fn is_verdict_grade(&self) -> bool {
        self.residual < VERDICT_RESIDUAL && self.imaginary_ok()
    }

    fn scaled(mut self, factor: f64) -> Self {
        let r = DegreeResult::from_integral(self.raw * factor, self.error_estimate * factor.abs(), self.budget.clone());
        self.raw = r.raw;
        self.rounded = r.rounded;
        self.residual = r.residual;
        self.error_estimate = r.error_estimate;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DegreeOptions {
    /// `None` picks [`QuadratureRule::default_for`] the manifold dimension.
    pub rule: Option<QuadratureRule>,
    /// Retry once at double resolution when the residual reaches the verdict threshold.
    pub auto_double: bool,
    pub fd_step: f64,
    /// Node budget used when `rule` is `None`.
    pub budget: Option<usize>,
    /// Scrambling seed for quasi-Monte Carlo rules chosen here.
    pub seed: u64,
}

impl Default for DegreeOptions {
    fn default() -> Self {
        DegreeOptions { rule: None, auto_double: true, fd_step: DEFAULT_FD_STEP, budget: None, seed: 0 }
    }
}

impl DegreeOptions {
    pub fn with_rule(rule: QuadratureRule) -> Self {
        DegreeOptions { rule: Some(rule), ..Default::default() }
    }

    /// The rule for a manifold of dimension `dim`: the explicit one, else the
    /// default kind sized to the budget.
    pub fn rule_for(&self, dim: usize) -> QuadratureRule {
        if let Some(rule) = &self.rule {
            return rule.clone();
        }
        let rule = match self.budget {
            Some(nodes) => QuadratureRule::with_budget(dim, nodes),
            None => QuadratureRule::default_for(dim),
        };
        match rule {
            QuadratureRule::QuasiMonteCarlo { points, batches, .. } => {
                QuadratureRule::QuasiMonteCarlo { points, batches, seed: self.seed }
            }
            other => other,
        }
    }
}

fn with_doubling(
    manifold: &Manifold,
    options: &DegreeOptions,
    mut integrate: impl FnMut(&QuadratureRule) -> Result<Integral>,
    scale: C64,
) -> Result<DegreeResult> {
    let mut rule = options.rule_for(manifold.dim());
    let mut spent = 0;
    let mut doublings = 0;
    loop {
        let integral = integrate(&rule)?;
        spent += integral.nodes;
        let budget = Budget { nodes: spent, doublings, wall_seconds: None, rule: Some(rule.clone()) };
        let result = DegreeResult::from_integral(integral.value * scale, integral.error * scale.norm(), budget);
        if result.residual >= VERDICT_RESIDUAL && options.auto_double && doublings == 0 {
            rule = rule.doubled();
            doublings += 1;
            continue;
        }
        if result.residual >= 0.5 || result.raw.im.abs() >= VERDICT_RESIDUAL {
            return Err(Error::Inconclusive(Box::new(result)));
        }
        return Ok(result);
    }
}

/// Agreement of the differential with step-halved finite differences at a
/// generic chart point, relative to the size of the differential.
pub fn differential_check(map: &dyn MatrixMap, step: f64) -> Result<f64> {
    let u = map.manifold().generic_point();
    let coarse = finite_difference_partials(map, &u, step)?;
    let reference = match map.partials(&u) {
        Some(p) => p?,
        None => finite_difference_partials(map, &u, step / 2.0)?,
    };
    let mut dev: f64 = 0.0;
    let mut size: f64 = 0.0;
    for (a, b) in coarse.iter().zip(&reference) {
        dev = dev.max((a - b).norm());
        size = size.max(b.norm());
    }
    Ok(dev / (1.0 + size))
}

const DIFFERENTIAL_TOLERANCE: f64 = 1e-5;

fn ensure_differentiable(map: &dyn MatrixMap, step: f64) -> Result<()> {
    let dev = differential_check(map, step)?;
    if dev > DIFFERENTIAL_TOLERANCE {
        return Err(Error::Invalid(format!(
            "differential check failed: finite differences disagree by {dev:.3e} at a generic point"
        )));
    }
    Ok(())
}

/// `deg φ = c_v ∫_V tr(φ⁻¹dφ)^{2v-1}` over an odd-dimensional `V`.
pub fn bott_fedosov_degree(map: &dyn MatrixMap, options: &DegreeOptions, exec: &dyn Executor) -> Result<DegreeResult> {
    let manifold = map.manifold();
    let dim = manifold.dim();
    if dim % 2 == 0 {
        return Err(Error::Dimension(format!("Bott-Fedosov degree needs an odd-dimensional manifold, got {dim}")));
    }
    if map.is_constant() {
        return Ok(DegreeResult::exact(0));
    }
    ensure_differentiable(map, options.fd_step)?;
    let v = dim.div_ceil(2);
    let step = options.fd_step;
    let form = |u: &[f64]| bott_fedosov_integrand(map, u, step);
    with_doubling(manifold, options, |rule| integrate_top_form(manifold, rule, exec, &form), bott_fedosov_constant(v))
}

/// A smooth map from a chart-parametrized manifold into the unit sphere `S^d`.
pub trait SphereMap: Sync {
    fn manifold(&self) -> &Manifold;

    /// `d`; values live in `ℝ^{d+1}`.
    fn target_dim(&self) -> usize;

    fn eval(&self, u: &[f64]) -> Result<Vec<f64>>;

    /// `∂f/∂u` as `d+1` rows of chart-direction entries.
    fn jacobian(&self, _u: &[f64]) -> Option<Result<Vec<Vec<f64>>>> {
        None
    }
}

fn sphere_map_jacobian(map: &dyn SphereMap, u: &[f64], step: f64) -> Result<Vec<Vec<f64>>> {
    if let Some(j) = map.jacobian(u) {
        return j;
    }
    let n = map.target_dim() + 1;
    let mut jac = vec![vec![0.0; u.len()]; n];
    let mut probe = u.to_vec();
    for c in 0..u.len() {
        let mut at = |offset: f64| -> Result<Vec<f64>> {
            probe[c] = u[c] + offset;
            let v = map.eval(&probe);
            probe[c] = u[c];
            v
        };
        let (p2, p1, m1, m2) = (at(2.0 * step)?, at(step)?, at(-step)?, at(-2.0 * step)?);
        for r in 0..n {
            jac[r][c] = (8.0 * (p1[r] - m1[r]) - (p2[r] - m2[r])) / (12.0 * step);
        }
    }
    Ok(jac)
}

/// `det[f, ∂_1 f, …, ∂_d f]`, the pullback of the `S^d` volume form.
pub fn brouwer_integrand(map: &dyn SphereMap, u: &[f64], step: f64) -> Result<f64> {
    let f = map.eval(u)?;
    let jac = sphere_map_jacobian(map, u, step)?;
    let n = f.len();
    let mut entries = Vec::with_capacity(n * n);
    for r in 0..n {
        entries.push(f[r]);
        entries.extend_from_slice(&jac[r]);
    }
    Ok(real_determinant(n, entries))
}

/// `(1 / vol S^d) ∫_V f^* dvol`.
pub fn brouwer_degree(map: &dyn SphereMap, options: &DegreeOptions, exec: &dyn Executor) -> Result<DegreeResult> {
    let manifold = map.manifold();
    let d = map.target_dim();
    if manifold.dim() != d {
        return Err(Error::Dimension(format!(
            "Brouwer degree needs equal dimensions, source {} vs target {d}",
            manifold.dim()
        )));
    }
    let step = options.fd_step;
    let form = |u: &[f64]| brouwer_integrand(map, u, step).map(C64::from);
    let scale = C64::from(1.0 / sphere_volume(d));
    with_doubling(manifold, options, |rule| integrate_top_form(manifold, rule, exec, &form), scale)
}

/// Unitarity tolerance for maps fed to [`degree_prime`].
pub const UNITARY_TOLERANCE: f64 = 1e-8;

/// First column of a `U(v)`-valued map, read as a map into `S^{2v-1} ⊂ ℂ^v = ℝ^{2v}`
/// with coordinates `(Re z_1, Im z_1, Re z_2, …)`.
pub struct FirstColumn<'a> {
    map: &'a dyn MatrixMap,
    step: f64,
}

impl<'a> FirstColumn<'a> {
    pub fn new(map: &'a dyn MatrixMap, step: f64) -> Self {
        FirstColumn { map, step }
    }

    fn column(m: &CMat) -> Vec<f64> {
        (0..m.nrows()).flat_map(|r| [m[(r, 0)].re, m[(r, 0)].im]).collect()
    }
}

impl SphereMap for FirstColumn<'_> {
    fn manifold(&self) -> &Manifold {
        self.map.manifold()
    }
    fn target_dim(&self) -> usize {
        2 * self.map.size() - 1
    }
    fn eval(&self, u: &[f64]) -> Result<Vec<f64>> {
        let m = self.map.eval(u)?;
        let deviation = unitarity_defect(&m);
        if deviation > UNITARY_TOLERANCE {
            return Err(Error::NotUnitary { deviation, location: Location::chart(u) });
        }
        Ok(Self::column(&m))
    }
    fn jacobian(&self, u: &[f64]) -> Option<Result<Vec<Vec<f64>>>> {
        Some(partials_of(self.map, u, self.step).map(|ps| {
            let cols: Vec<Vec<f64>> = ps.iter().map(Self::column).collect();
            (0..2 * self.map.size()).map(|r| cols.iter().map(|c| c[r]).collect()).collect()
        }))
    }
}

/// `deg′ φ = deg_B(first column) / (v-1)!` for `U(v)`-valued `φ` on a `(2v-1)`-manifold.
pub fn degree_prime(map: &dyn MatrixMap, options: &DegreeOptions, exec: &dyn Executor) -> Result<DegreeResult> {
    let v = map.size();
    if map.manifold().dim() != 2 * v - 1 {
        return Err(Error::Dimension(format!(
            "first-column degree needs a {}-dimensional manifold for U({v}), got {}",
            2 * v - 1,
            map.manifold().dim()
        )));
    }
    if map.is_constant() {
        let u = map.manifold().generic_point();
        let deviation = unitarity_defect(&map.eval(&u)?);
        if deviation > UNITARY_TOLERANCE {
            return Err(Error::NotUnitary { deviation, location: Location::chart(&u) });
        }
        return Ok(DegreeResult::exact(0));
    }
    let column = FirstColumn::new(map, options.fd_step);
    let brouwer = brouwer_degree(&column, options, exec)?;
    let divisor: i64 = (1..v as i64).product();
    if brouwer.rounded % divisor != 0 {
        return Err(Error::NotDivisible { degree: brouwer.rounded, divisor });
    }
    Ok(brouwer.scaled(1.0 / divisor as f64))
}
