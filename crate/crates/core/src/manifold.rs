//! Integration manifolds and quadrature of top-degree forms.
//!
//! Every manifold is a product of round spheres and flat tori, charted by
//! hyperspherical angles and torus angles. Chart coordinates are concatenated
//! in factor order; the product orientation is the ordered product of the
//! factor orientations, where spheres carry the outward-normal orientation
//! (so `S¹` is counterclockwise) and tori the orientation of their angles.

use crate::prelude::*;
use core::f64::consts::PI;


use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::linalg::{CompensatedSum, C64};
use crate::qmc::{digital_shifts, Sobol};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Factor {
    /// Unit sphere `S^d ⊂ ℝ^{d+1}`, `d ≥ 1`.
    Sphere(usize),
    /// Flat torus `(S¹)^d` with angle coordinates.
    Torus(usize),
}

impl Factor {
    pub fn dim(&self) -> usize {
        match *self {
            Factor::Sphere(d) | Factor::Torus(d) => d,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Manifold {
    factors: Vec<Factor>,
    flipped: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Coord {
    Polar,
    Periodic,
}

impl Manifold {
    pub fn new(factors: Vec<Factor>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::Dimension("manifold needs at least one factor".into()));
        }
        if factors.iter().any(|f| f.dim() == 0) {
            return Err(Error::Dimension("zero-dimensional factors are not supported".into()));
        }
        Ok(Manifold { factors, flipped: false })
    }

    pub fn sphere(d: usize) -> Self {
        Manifold::new(vec![Factor::Sphere(d)]).expect("sphere dimension must be positive")
    }

    pub fn circle() -> Self {
        Manifold::sphere(1)
    }

    pub fn torus(d: usize) -> Self {
        Manifold::new(vec![Factor::Torus(d)]).expect("torus dimension must be positive")
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn dim(&self) -> usize {
        self.factors.iter().map(Factor::dim).sum()
    }

    /// Same manifold with the opposite orientation.
    pub fn flipped(&self) -> Self {
        Manifold { factors: self.factors.clone(), flipped: !self.flipped }
    }

    /// Sign relating `du_1 ∧ … ∧ du_d` in chart coordinates to the orientation.
    pub fn orientation(&self) -> f64 {
        let mut s = if self.flipped { -1.0 } else { 1.0 };
        for f in &self.factors {
            if let Factor::Sphere(d) = *f {
                s *= sphere_chart_orientation(d);
            }
        }
        s
    }

    pub fn volume(&self) -> f64 {
        self.factors
            .iter()
            .map(|f| match *f {
                Factor::Sphere(d) => sphere_volume(d),
                Factor::Torus(d) => (2.0 * PI).powi(d as i32),
            })
            .product()
    }

    /// Offsets of each factor's coordinates in a chart point.
    pub fn offsets(&self) -> Vec<usize> {
        let mut acc = 0;
        self.factors
            .iter()
            .map(|f| {
                let o = acc;
                acc += f.dim();
                o
            })
            .collect()
    }

    fn coords(&self) -> Vec<Coord> {
        let mut out = Vec::with_capacity(self.dim());
        for f in &self.factors {
            match *f {
                Factor::Sphere(d) => {
                    out.extend(core::iter::repeat(Coord::Polar).take(d - 1));
                    out.push(Coord::Periodic);
                }
                Factor::Torus(d) => out.extend(core::iter::repeat(Coord::Periodic).take(d)),
            }
        }
        out
    }

    /// Riemannian volume density in chart coordinates.
    pub fn density(&self, u: &[f64]) -> f64 {
        let mut rho = 1.0;
        for (f, o) in self.factors.iter().zip(self.offsets()) {
            if let Factor::Sphere(d) = *f {
                for i in 0..d - 1 {
                    rho *= u[o + i].sin().powi((d - 1 - i) as i32);
                }
            }
        }
        rho
    }

    /// Reference chart point away from all coordinate singularities.
    pub fn generic_point(&self) -> Vec<f64> {
        self.coords()
            .iter()
            .enumerate()
            .map(|(i, c)| match c {
                Coord::Polar => 1.1 + 0.07 * i as f64,
                Coord::Periodic => 0.4 + 0.31 * i as f64,
            })
            .collect()
    }

    /// Wrap a chart point into the coordinate box, used for probes.
    pub fn chart_box(&self) -> Vec<(f64, f64)> {
        self.coords()
            .iter()
            .map(|c| match c {
                Coord::Polar => (0.0, PI),
                Coord::Periodic => (0.0, 2.0 * PI),
            })
            .collect()
    }
}

/// `2π^{(d+1)/2} / Γ((d+1)/2)`.
pub fn sphere_volume(d: usize) -> f64 {
    match d {
        0 => 2.0,
        1 => 2.0 * PI,
        _ => 2.0 * PI / (d as f64 - 1.0) * sphere_volume(d - 2),
    }
}

/// Hyperspherical embedding `S^d → ℝ^{d+1}`; angles `φ_1..φ_{d-1} ∈ [0,π]`,
/// azimuth `φ_d ∈ [0,2π)`.
pub fn sphere_embed(angles: &[f64]) -> Vec<f64> {
    let d = angles.len();
    let mut x = vec![0.0; d + 1];
    let mut prod = 1.0;
    for k in 0..d {
        x[k] = prod * angles[k].cos();
        prod *= angles[k].sin();
    }
    x[d] = prod;
    x
}

fn wrap_positive(a: f64) -> f64 {
    if a < 0.0 {
        a + 2.0 * PI
    } else {
        a
    }
}

/// Hyperspherical angles of a nonzero `x ∈ ℝ^{d+1}`; inverse of [`sphere_embed`] on `x/|x|`.
pub fn sphere_angles(x: &[f64]) -> Vec<f64> {
    let d = x.len() - 1;
    let mut angles = vec![0.0; d];
    let mut tail: f64 = x.iter().map(|v| v * v).sum();
    for k in 0..d {
        tail -= x[k] * x[k];
        let rest = tail.max(0.0).sqrt();
        angles[k] = if k + 1 < d { rest.atan2(x[k]) } else { wrap_positive(x[d].atan2(x[k])) };
    }
    angles
}

/// `∂x/∂φ` as `d+1` rows of `d` entries.
pub fn sphere_jacobian(angles: &[f64]) -> Vec<Vec<f64>> {
    let d = angles.len();
    let (s, c): (Vec<f64>, Vec<f64>) = angles.iter().map(|a| (a.sin(), a.cos())).unzip();
    let mut jac = vec![vec![0.0; d]; d + 1];
    for k in 0..=d {
        // x_k = (Π_{i<k} s_i) · (k < d ? c_k : 1)
        for j in 0..d {
            if j < k {
                let mut v = 1.0;
                for i in 0..k {
                    v *= if i == j { c[i] } else { s[i] };
                }
                if k < d {
                    v *= c[k];
                }
                jac[k][j] = v;
            } else if j == k && k < d {
                let mut v = -s[k];
                for i in 0..k {
                    v *= s[i];
                }
                jac[k][j] = v;
            }
        }
    }
    jac
}

/// Sign of `det[x, ∂x/∂φ]` for the hyperspherical chart of `S^d`.
pub fn sphere_chart_orientation(d: usize) -> f64 {
    let angles: Vec<f64> = (0..d).map(|i| if i + 1 < d { 1.1 + 0.07 * i as f64 } else { 0.4 }).collect();
    let x = sphere_embed(&angles);
    let jac = sphere_jacobian(&angles);
    let mut entries = Vec::with_capacity((d + 1) * (d + 1));
    for r in 0..=d {
        entries.push(x[r]);
        entries.extend_from_slice(&jac[r]);
    }
    let det = crate::linalg::real_determinant(d + 1, entries);
    if det > 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

#[derive(Debug, Clone, PartialEq)]
pub enum QuadratureRule {
    /// Tensor rule: Gauss-Legendre on polar angles, trapezoid on periodic ones.
    Product { nodes_per_dim: usize },
    /// Randomized Sobol points in the chart box; `points` is the total budget.
    QuasiMonteCarlo { points: usize, batches: usize, seed: u64 },
}

impl QuadratureRule {
    /// Product rules up to dimension 5, QMC beyond.
    pub fn default_for(dim: usize) -> Self {
        match dim {
            0..=2 => QuadratureRule::Product { nodes_per_dim: 64 },
            3 => QuadratureRule::Product { nodes_per_dim: 32 },
            4 => QuadratureRule::Product { nodes_per_dim: 20 },
            5 => QuadratureRule::Product { nodes_per_dim: 14 },
            _ => QuadratureRule::QuasiMonteCarlo { points: 1 << 20, batches: 8, seed: 0 },
        }
    }

    /// The default kind for `dim`, with about `nodes` nodes in total.
    pub fn with_budget(dim: usize, nodes: usize) -> Self {
        match QuadratureRule::default_for(dim) {
            QuadratureRule::Product { .. } => {
                let per_dim = ((nodes.max(1) as f64).powf(1.0 / dim.max(1) as f64) + 1e-9).floor() as usize;
                QuadratureRule::Product { nodes_per_dim: per_dim.max(2) }
            }
            QuadratureRule::QuasiMonteCarlo { batches, seed, .. } => {
                QuadratureRule::QuasiMonteCarlo { points: nodes.max(batches), batches, seed }
            }
        }
    }

    /// The same rule with twice the resolution (per dimension for product rules).
    pub fn doubled(&self) -> Self {
        match *self {
            QuadratureRule::Product { nodes_per_dim } => {
                QuadratureRule::Product { nodes_per_dim: 2 * nodes_per_dim }
            }
            QuadratureRule::QuasiMonteCarlo { points, batches, seed } => {
                QuadratureRule::QuasiMonteCarlo { points: 2 * points, batches, seed }
            }
        }
    }

    pub fn node_count(&self, dim: usize) -> usize {
        match *self {
            QuadratureRule::Product { nodes_per_dim } => nodes_per_dim.pow(dim as u32),
            QuadratureRule::QuasiMonteCarlo { points, batches, .. } => (points / batches) * batches,
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match *self {
            QuadratureRule::QuasiMonteCarlo { seed, .. } => Some(seed),
            _ => None,
        }
    }
}

/// One quadrature node.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePoint {
    pub coords: Vec<f64>,
    /// Weight for the coordinate measure `du_1 … du_d`.
    pub weight: f64,
    /// Riemannian density at the node; `weight · density` integrates volume.
    pub density: f64,
}

impl SamplePoint {
    pub fn volume_weight(&self) -> f64 {
        self.weight * self.density
    }
}

struct ProductGrid {
    per_coord: Vec<(Vec<f64>, Vec<f64>)>,
}

impl ProductGrid {
    fn new(manifold: &Manifold, n: usize) -> Self {
        let (gx, gw) = gauss_legendre(n);
        let polar: (Vec<f64>, Vec<f64>) =
            (gx.iter().map(|x| 0.5 * PI * (x + 1.0)).collect(), gw.iter().map(|w| 0.5 * PI * w).collect());
        let h = 2.0 * PI / n as f64;
        let periodic: (Vec<f64>, Vec<f64>) = ((0..n).map(|i| (i as f64 + 0.5) * h).collect(), vec![h; n]);
        let per_coord = manifold
            .coords()
            .into_iter()
            .map(|c| match c {
                Coord::Polar => polar.clone(),
                Coord::Periodic => periodic.clone(),
            })
            .collect();
        ProductGrid { per_coord }
    }

    fn len(&self) -> usize {
        self.per_coord.iter().map(|(x, _)| x.len()).product()
    }

    fn node(&self, mut index: usize, u: &mut [f64]) -> f64 {
        let mut w = 1.0;
        for (d, (xs, ws)) in self.per_coord.iter().enumerate().rev() {
            let i = index % xs.len();
            index /= xs.len();
            u[d] = xs[i];
            w *= ws[i];
        }
        w
    }
}

/// Enumerate the nodes of `rule` on `manifold` (first batch only for QMC).
pub fn sample_points(manifold: &Manifold, rule: &QuadratureRule) -> Result<Vec<SamplePoint>> {
    let dim = manifold.dim();
    match *rule {
        QuadratureRule::Product { nodes_per_dim } => {
            if nodes_per_dim == 0 {
                return Err(Error::Quadrature("product rule needs at least one node per dimension".into()));
            }
            let grid = ProductGrid::new(manifold, nodes_per_dim);
            let mut u = vec![0.0; dim];
            Ok((0..grid.len())
                .map(|i| {
                    let weight = grid.node(i, &mut u);
                    SamplePoint { coords: u.clone(), weight, density: manifold.density(&u) }
                })
                .collect())
        }
        QuadratureRule::QuasiMonteCarlo { points, batches, seed } => {
            let qmc = QmcPlan::new(manifold, points, batches, seed)?;
            let mut u = vec![0.0; dim];
            Ok((0..qmc.per_batch)
                .map(|i| {
                    qmc.node(0, i, &mut u);
                    SamplePoint { coords: u.clone(), weight: qmc.box_volume / qmc.per_batch as f64, density: manifold.density(&u) }
                })
                .collect())
        }
    }
}

struct QmcPlan {
    sobol: Sobol,
    shifts: Vec<Vec<u32>>,
    scale: Vec<f64>,
    per_batch: usize,
    box_volume: f64,
}

impl QmcPlan {
    fn new(manifold: &Manifold, points: usize, batches: usize, seed: u64) -> Result<Self> {
        let dim = manifold.dim();
        if batches < 2 {
            return Err(Error::Quadrature("QMC needs at least two batches for an error estimate".into()));
        }
        let per_batch = points / batches;
        if per_batch == 0 || per_batch > u32::MAX as usize {
            return Err(Error::Quadrature(format!("QMC batch size {per_batch} out of range")));
        }
        let sobol = Sobol::new(dim)?;
        let scale: Vec<f64> = manifold.chart_box().iter().map(|(a, b)| b - a).collect();
        let box_volume = scale.iter().product();
        Ok(QmcPlan { sobol, shifts: digital_shifts(seed, batches, dim), scale, per_batch, box_volume })
    }

    fn node(&self, batch: usize, index: usize, u: &mut [f64]) {
        self.sobol.point(index as u32, &self.shifts[batch], u);
        for (x, s) in u.iter_mut().zip(&self.scale) {
            *x *= s;
        }
    }
}

/// Value of an integral with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: C64,
    pub error: f64,
    pub nodes: usize,
}

const CHUNK: usize = 2048;

/// Pointwise form coefficient: `u ↦ c(u)` with `form = c du_1 ∧ … ∧ du_d`.
pub type FormCoefficient<'a> = dyn Fn(&[f64]) -> Result<C64> + Sync + 'a;

/// `∫_M form`, orientation-aware.
///
/// Product rules estimate the error by comparison with the rule at half the
/// resolution; QMC rules by the spread of the independently shifted batches.
pub fn integrate_top_form(
    manifold: &Manifold,
    rule: &QuadratureRule,
    exec: &dyn Executor,
    form: &FormCoefficient<'_>,
) -> Result<Integral> {
    let dim = manifold.dim();
    let sign = manifold.orientation();
    match *rule {
        QuadratureRule::Product { nodes_per_dim } => {
            if nodes_per_dim == 0 {
                return Err(Error::Quadrature("product rule needs at least one node per dimension".into()));
            }
            let fine = product_sum(manifold, nodes_per_dim, exec, form)?;
            let coarse_n = (nodes_per_dim / 2).max(1);
            let coarse = product_sum(manifold, coarse_n, exec, form)?;
            let value = fine.value() * sign;
            let floor = 64.0 * f64::EPSILON * fine.absolute_mass();
            let error = ((fine.value() - coarse.value()).norm()).max(floor);
            let nodes = nodes_per_dim.pow(dim as u32) + coarse_n.pow(dim as u32);
            Ok(Integral { value, error, nodes })
        }
        QuadratureRule::QuasiMonteCarlo { points, batches, seed } => {
            let plan = QmcPlan::new(manifold, points, batches, seed)?;
            let chunks_per_batch = plan.per_batch.div_ceil(CHUNK);
            let job = |c: usize| -> Result<CompensatedSum> {
                let batch = c / chunks_per_batch;
                let start = (c % chunks_per_batch) * CHUNK;
                let end = (start + CHUNK).min(plan.per_batch);
                let mut u = vec![0.0; dim];
                let mut acc = CompensatedSum::default();
                for i in start..end {
                    plan.node(batch, i, &mut u);
                    acc.add(checked(form, &u)?);
                }
                Ok(acc)
            };
            let results = exec.run(chunks_per_batch * batches, &job);
            let mut estimates = Vec::with_capacity(batches);
            let mut mass = 0.0;
            let mut iter = results.into_iter();
            for _ in 0..batches {
                let mut acc = CompensatedSum::default();
                for _ in 0..chunks_per_batch {
                    let part = iter.next().expect("executor returned too few chunks")?;
                    acc.merge(&part);
                }
                mass += acc.absolute_mass();
                estimates.push(acc.value() * (plan.box_volume / plan.per_batch as f64));
            }
            let b = batches as f64;
            let mean = estimates.iter().fold(C64::new(0.0, 0.0), |a, z| a + z) / b;
            let var = estimates.iter().map(|z| (z - mean).norm_sqr()).sum::<f64>() / (b - 1.0);
            let floor = 64.0 * f64::EPSILON * mass * plan.box_volume / (plan.per_batch as f64 * b);
            Ok(Integral { value: mean * sign, error: (var / b).sqrt().max(floor), nodes: plan.per_batch * batches })
        }
    }
}

fn checked(form: &FormCoefficient<'_>, u: &[f64]) -> Result<C64> {
    let v = form(u)?;
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite(u.to_vec()))
    }
}

fn product_sum(
    manifold: &Manifold,
    n: usize,
    exec: &dyn Executor,
    form: &FormCoefficient<'_>,
) -> Result<CompensatedSum> {
    let grid = ProductGrid::new(manifold, n);
    let total = grid.len();
    let dim = manifold.dim();
    let job = |c: usize| -> Result<CompensatedSum> {
        let start = c * CHUNK;
        let end = (start + CHUNK).min(total);
        let mut u = vec![0.0; dim];
        let mut acc = CompensatedSum::default();
        for i in start..end {
            let w = grid.node(i, &mut u);
            acc.add(checked(form, &u)? * w);
        }
        Ok(acc)
    };
    let mut acc = CompensatedSum::default();
    for part in exec.run(total.div_ceil(CHUNK), &job) {
        acc.merge(&part?);
    }
    Ok(acc)
}
