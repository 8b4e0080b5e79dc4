//! Hypothesis certificates, the interior and boundary multiplicities, and the
//! divisibility verdict.
//!
//! Every certificate is a statement about its sample set only.

use crate::prelude::*;


use crate::degree::{bott_fedosov_degree, DegreeOptions, DegreeResult};
use crate::error::{Error, Location, Result};
use crate::exec::Executor;
use crate::halfline::{
    build_tau, check_shapiro_lopatinskij, collar_deviation, half_line, root_tolerance, split_roots, COLLAR_TOLERANCE,
    SL_CONDITION_LIMIT,
};
use crate::jtheory::{jgroup_info, verdict, JGroupInfo, Verdict};
use crate::linalg::{commutator_norm, spectral_norm};
use crate::qmc::sample_unit_cube;
use crate::symbol::{
    build_sigma, check_ellipticity, check_family_reality, BoundarySymbol, Param, RealityReport, SymbolFamily,
    SymbolSample,
};

/// Where and how densely hypotheses are probed.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingPlan {
    pub interior: usize,
    pub boundary: usize,
    /// Finite parameters are drawn from the ball of this radius.
    pub lambda_radius: f64,
    /// `|λ|` used to probe the approach to `λ = ∞`.
    pub decay_radius: f64,
    pub seed: u64,
    pub ellipticity_threshold: f64,
    pub reality_tolerance: f64,
    /// Relative bound for `‖p(λ) − p(∞)‖` at the decay radius.
    pub decay_tolerance: f64,
    /// Relative bound for `‖[p(∞), p(λ)]‖`.
    pub commutator_tolerance: f64,
}

impl Default for SamplingPlan {
    fn default() -> Self {
        SamplingPlan {
            interior: 256,
            boundary: 96,
            lambda_radius: 3.0,
            decay_radius: 1e6,
            seed: 7,
            ellipticity_threshold: 1e-6,
            reality_tolerance: 1e-12,
            decay_tolerance: 1e-3,
            commutator_tolerance: 1e-10,
        }
    }
}

/// Outcome of one sampled check.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub name: String,
    pub passed: bool,
    /// The measured extreme value, compared against `threshold`.
    pub value: f64,
    pub threshold: f64,
    pub samples: usize,
    pub worst: Option<Location>,
    pub note: Option<String>,
}

impl Certificate {
    fn below(name: &str, value: f64, threshold: f64, samples: usize, worst: Option<Location>) -> Self {
        Certificate { name: name.into(), passed: value <= threshold, value, threshold, samples, worst, note: None }
    }

    fn above(name: &str, value: f64, threshold: f64, samples: usize, worst: Option<Location>) -> Self {
        Certificate { name: name.into(), passed: value > threshold, value, threshold, samples, worst, note: None }
    }

    fn failed(name: &str, error: &Error) -> Self {
        Certificate {
            name: name.into(),
            passed: false,
            value: f64::NAN,
            threshold: f64::NAN,
            samples: 0,
            worst: None,
            note: Some(error.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisReport {
    pub h1: Vec<Certificate>,
    pub h2: Vec<Certificate>,
    pub h3: Vec<Certificate>,
    pub reality: RealityReport,
    /// Parts of the hypotheses that symbol samples cannot decide.
    pub gaps: Vec<String>,
}

impl HypothesisReport {
    pub fn passed(&self) -> bool {
        self.certificates().all(|c| c.passed)
    }

    pub fn certificates(&self) -> impl Iterator<Item = &Certificate> {
        self.h1.iter().chain(&self.h2).chain(&self.h3)
    }

    pub fn failures(&self) -> Vec<&Certificate> {
        self.certificates().filter(|c| !c.passed).collect()
    }
}

fn unit(v: Vec<f64>) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
    v.into_iter().map(|x| x / n).collect()
}

/// Interior samples: every fourth at `λ = ∞`, the rest in the parameter ball;
/// points drawn uniformly from the domain's bounding box and kept if inside.
pub fn interior_samples(family: &SymbolFamily, plan: &SamplingPlan) -> Result<Vec<SymbolSample>> {
    let (q, n) = (family.q, family.n());
    let radius = family.domain.bounding_radius();
    let mut out = Vec::with_capacity(plan.interior);
    let mut draw = 0u64;
    while out.len() < plan.interior {
        let batch = sample_unit_cube(q + 2 * n, 4 * plan.interior, plan.seed.wrapping_add(draw))?;
        draw += 1;
        for p in batch {
            let x: Vec<f64> = p[q..q + n].iter().map(|v| radius * (2.0 * v - 1.0)).collect();
            if !family.domain.contains(&x) {
                continue;
            }
            let lambda = if out.len() % 4 == 3 {
                Param::Infinity
            } else {
                Param::Finite(p[..q].iter().map(|v| plan.lambda_radius * (2.0 * v - 1.0)).collect())
            };
            let xi = unit(p[q + n..].iter().map(|v| v - 0.5).collect());
            out.push(SymbolSample { lambda, x, xi });
            if out.len() == plan.interior {
                break;
            }
        }
        if draw > 64 {
            return Err(Error::Invalid("could not draw interior samples: domain too thin in its bounding box".into()));
        }
    }
    Ok(out)
}

/// `(λ, boundary angles, s)` with `s` a unit vector in frame coordinates.
pub type BoundarySample = (Param, Vec<f64>, Vec<f64>);

pub fn boundary_samples(family: &SymbolFamily, plan: &SamplingPlan) -> Result<Vec<BoundarySample>> {
    let (q, n) = (family.q, family.n());
    let chart = family.domain.boundary_manifold().chart_box();
    let pts = sample_unit_cube(q + 2 * n - 2, plan.boundary, plan.seed ^ 0xb0)?;
    Ok(pts
        .into_iter()
        .enumerate()
        .map(|(i, p)| {
            let lambda = if i % 4 == 3 {
                Param::Infinity
            } else {
                Param::Finite(p[..q].iter().map(|v| plan.lambda_radius * (2.0 * v - 1.0)).collect())
            };
            let angles = p[q..q + n - 1].iter().zip(&chart).map(|(v, (a, b))| a + (b - a) * v).collect();
            let s = if n == 2 {
                vec![if p[q + n - 1] < 0.5 { -1.0 } else { 1.0 }]
            } else {
                unit(p[q + n - 1..].iter().map(|v| v - 0.5).collect())
            };
            (lambda, angles, s)
        })
        .collect())
}

fn far_parameter(sample: &Param, q: usize, radius: f64) -> Param {
    match sample {
        Param::Finite(l) if l.iter().any(|v| *v != 0.0) => {
            Param::Finite(unit(l.clone()).into_iter().map(|v| radius * v).collect())
        }
        _ => {
            let mut v = vec![0.0; q];
            v[0] = radius;
            Param::Finite(v)
        }
    }
}

fn ellipticity_certificates(family: &SymbolFamily, samples: &[SymbolSample], plan: &SamplingPlan) -> Result<[Certificate; 2]> {
    let report = check_ellipticity(&family.interior, samples, plan.ellipticity_threshold)?;
    let at_inf: Vec<SymbolSample> = samples.iter().filter(|s| s.lambda.is_infinity()).cloned().collect();
    let inf = check_ellipticity(&family.interior, &at_inf, plan.ellipticity_threshold)?;
    Ok([
        Certificate::above("ellipticity", report.min_singular_value, plan.ellipticity_threshold, report.samples, report.worst),
        Certificate::above("ellipticity at ∞", inf.min_singular_value, plan.ellipticity_threshold, inf.samples, inf.worst),
    ])
}

fn boundary_certificates(
    family: &SymbolFamily,
    boundary: &BoundarySymbol,
    label: &str,
    samples: &[(Param, Vec<f64>, Vec<f64>)],
) -> (Certificate, Certificate, Certificate) {
    let r = family.r();
    let mut min_gap = f64::INFINITY;
    let mut gap_worst = None;
    let mut worst_cond: f64 = 0.0;
    let mut cond_worst = None;
    let mut worst_cond_inf: f64 = 0.0;
    let mut inf_worst = None;
    let mut failure: Option<(bool, Error)> = None;
    let mut inf_count = 0;
    for (lambda, angles, s) in samples {
        let frame = family.domain.boundary_frame(angles);
        let xi_t = frame.tangent_vector(s);
        let loc = || Some(Location::new(lambda, &frame.point, &xi_t));
        let proper = half_line(family, lambda, &frame, &xi_t).and_then(|hl| {
            let tol = root_tolerance(&xi_t, hl.companion.order);
            split_roots(&hl.companion, tol)
        });
        match proper {
            Ok(split) if split.upper == r => {
                if split.min_abs_im < min_gap {
                    min_gap = split.min_abs_im;
                    gap_worst = loc();
                }
            }
            Ok(split) => {
                failure.get_or_insert((
                    true,
                    Error::StableDimension {
                        found: split.upper,
                        expected: r,
                        location: Location::new(lambda, &frame.point, &xi_t),
                    },
                ));
                min_gap = 0.0;
                gap_worst = loc();
                continue;
            }
            Err(e) => {
                failure.get_or_insert((true, e));
                min_gap = 0.0;
                gap_worst = loc();
                continue;
            }
        }
        match check_shapiro_lopatinskij(family, boundary, lambda, &frame, &xi_t) {
            Ok(rep) => {
                if lambda.is_infinity() {
                    inf_count += 1;
                    if rep.condition > worst_cond_inf {
                        worst_cond_inf = rep.condition;
                        inf_worst = loc();
                    }
                }
                if rep.condition > worst_cond {
                    worst_cond = rep.condition;
                    cond_worst = loc();
                }
            }
            Err(e) => {
                if lambda.is_infinity() {
                    worst_cond_inf = f64::INFINITY;
                    inf_worst = loc();
                }
                worst_cond = f64::INFINITY;
                cond_worst = loc();
                failure.get_or_insert((false, e));
            }
        }
    }
    let mut proper = Certificate::above("proper ellipticity", min_gap, 0.0, samples.len(), gap_worst);
    let mut sl = Certificate::below(
        &format!("Shapiro-Lopatinskij ({label})"),
        worst_cond,
        SL_CONDITION_LIMIT,
        samples.len(),
        cond_worst,
    );
    let binf = Certificate::below(
        &format!("b(∞) invertible ({label})"),
        worst_cond_inf,
        SL_CONDITION_LIMIT,
        inf_count,
        inf_worst,
    );
    if let Some((root_side, e)) = failure {
        if root_side {
            proper.note = Some(e.to_string());
        } else {
            sl.note = Some(e.to_string());
        }
    }
    (proper, sl, binf)
}

fn decay_certificate(family: &SymbolFamily, interior: &[SymbolSample], boundary: &[(Param, Vec<f64>, Vec<f64>)], plan: &SamplingPlan) -> Result<Certificate> {
    let q = family.q;
    let mut worst: f64 = 0.0;
    let mut at = None;
    for s in interior.iter().filter(|s| !s.lambda.is_infinity()) {
        let far = far_parameter(&s.lambda, q, plan.decay_radius);
        let a = family.interior.eval(&far, &s.x, &s.xi)?;
        let b = family.interior.eval(&Param::Infinity, &s.x, &s.xi)?;
        let d = spectral_norm(&(a - &b)) / (1.0 + spectral_norm(&b));
        if d > worst {
            worst = d;
            at = Some(Location::new(&far, &s.x, &s.xi));
        }
    }
    for (lambda, angles, s) in boundary.iter().filter(|b| !b.0.is_infinity()) {
        let frame = family.domain.boundary_frame(angles);
        let xi_t = frame.tangent_vector(s);
        let far = far_parameter(lambda, q, plan.decay_radius);
        let mut sets = vec![&family.boundary];
        sets.extend(family.alt_boundary.as_ref());
        for sym in sets {
            let a = sym.coefficients(&far, &frame.point, &xi_t)?;
            let b = sym.coefficients(&Param::Infinity, &frame.point, &xi_t)?;
            for (x, y) in a.iter().zip(&b) {
                let d = spectral_norm(&(x - y)) / (1.0 + spectral_norm(y));
                if d > worst {
                    worst = d;
                    at = Some(Location::new(&far, &frame.point, &xi_t));
                }
            }
        }
    }
    let mut c = Certificate::below("approach to λ = ∞", worst, plan.decay_tolerance, interior.len() + boundary.len(), at);
    c.note = Some(format!("coefficients compared at |λ| = {:e}", plan.decay_radius));
    Ok(c)
}

fn commutator_certificate(family: &SymbolFamily, samples: &[SymbolSample], plan: &SamplingPlan) -> Result<Certificate> {
    let mut worst: f64 = 0.0;
    let mut at = None;
    for s in samples {
        let p = family.interior.eval(&s.lambda, &s.x, &s.xi)?;
        let p_inf = family.interior.eval(&Param::Infinity, &s.x, &s.xi)?;
        let c = commutator_norm(&p_inf, &p) / (1.0 + spectral_norm(&p) * spectral_norm(&p_inf));
        if c > worst {
            worst = c;
            at = Some(Location::new(&s.lambda, &s.x, &s.xi));
        }
    }
    Ok(Certificate::below("[p(∞), p(λ)] = 0", worst, plan.commutator_tolerance, samples.len(), at))
}

/// Sampled certificates for H1 (ellipticity, proper ellipticity,
/// Shapiro-Lopatinskij), H2 (values at `∞`, their approach, invertibility of
/// `b(∞)`) and H3 (collar `λ`-independence, commuting symbols).
pub fn check_hypotheses(family: &SymbolFamily, plan: &SamplingPlan) -> Result<HypothesisReport> {
    let interior = interior_samples(family, plan)?;
    let boundary = boundary_samples(family, plan)?;
    let reality = check_family_reality(family, &interior, plan.reality_tolerance)?;
    let [ell, ell_inf] = ellipticity_certificates(family, &interior, plan)?;
    let (proper, sl, binf) = boundary_certificates(family, &family.boundary, "B", &boundary);
    let mut reality_cert = Certificate::below("reality", reality.max_violation, plan.reality_tolerance, reality.samples, None);
    if reality.skipped_complex {
        reality_cert.note = Some("complex family: reality condition not required".into());
    }
    let mut h1 = vec![ell, proper, sl, reality_cert];
    let mut h2 = vec![ell_inf, binf];
    if let Some(alt) = &family.alt_boundary {
        let (_, sl_alt, binf_alt) = boundary_certificates(family, alt, "B₋", &boundary);
        h1.push(sl_alt);
        h2.push(binf_alt);
    }
    match decay_certificate(family, &interior, &boundary, plan) {
        Ok(c) => h2.push(c),
        Err(e) => h2.push(Certificate::failed("approach to λ = ∞", &e)),
    }
    let (deviation, location) = collar_deviation(family, 256, plan.seed)?;
    let mut collar = Certificate::below("collar λ-independence", deviation, COLLAR_TOLERANCE, 256, location);
    if !family.interior.depends_on_lambda() {
        collar.note = Some("interior coefficients are declared λ-independent".into());
    }
    let h3 = vec![collar, commutator_certificate(family, &interior, plan)?];
    let gaps = vec![
        "H2: unique solvability of the problem at λ = ∞ is an operator-level property; only ellipticity and \
         invertibility of b(∞) are checked"
            .into(),
    ];
    Ok(HypothesisReport { h1, h2, h3, reality, gaps })
}

/// A degree that may have come back inconclusive.
fn settle(result: Result<DegreeResult>) -> Result<(DegreeResult, bool)> {
    match result {
        Ok(d) => Ok((d, false)),
        Err(Error::Inconclusive(d)) => Ok((*d, true)),
        Err(e) => Err(e),
    }
}

/// `μ_i = deg σ` over `S^q × S^{2n-1}`; exactly zero for a `λ`-independent interior.
pub fn interior_multiplicity(family: &SymbolFamily, options: &DegreeOptions, exec: &dyn Executor) -> Result<DegreeResult> {
    if !family.interior.depends_on_lambda() {
        // σ ≡ Id whatever the domain.
        return Ok(DegreeResult::exact(0));
    }
    let sigma = build_sigma(family)?;
    bott_fedosov_degree(&sigma, options, exec)
}

/// `μ_b = deg τ` over `S^q × S(Γ)`; exactly zero for `λ`-independent boundary rows.
pub fn boundary_multiplicity(family: &SymbolFamily, options: &DegreeOptions, exec: &dyn Executor) -> Result<DegreeResult> {
    if family.alt_boundary.is_none() && !family.boundary.depends_on_lambda() {
        // τ ≡ Id once M⁺ is λ-independent on the collar, on any domain.
        let (deviation, location) = collar_deviation(family, 256, 17)?;
        if deviation > COLLAR_TOLERANCE {
            return Err(Error::CollarDependence {
                deviation,
                location: location.expect("nonzero deviation has a sample"),
            });
        }
        return Ok(DegreeResult::exact(0));
    }
    let tau = build_tau(family, options.fd_step)?;
    bott_fedosov_degree(&tau, options, exec)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiplicityReport {
    pub family: String,
    pub q: usize,
    pub hypotheses: Option<HypothesisReport>,
    pub mu_interior: DegreeResult,
    pub mu_boundary: DegreeResult,
    /// `rounded(μ_i) + rounded(μ_b)`.
    pub mu_total: i64,
    pub realified: bool,
    /// `2` for a realified complex family, else `1`.
    pub realification_factor: i64,
    /// The multiplicity the verdict is computed from, `factor · μ_total`.
    pub mu_verdict: i64,
    /// Some degree failed the integrality threshold even after doubling.
    pub inconclusive: bool,
    pub jgroup: Option<JGroupInfo>,
    pub verdict: Option<Verdict>,
    pub notes: Vec<String>,
}

impl MultiplicityReport {
    /// Combine two degrees into a report; the verdict needs both to be verdict grade.
    pub fn assemble(
        family: &str,
        q: usize,
        mu_interior: DegreeResult,
        mu_boundary: DegreeResult,
        realified: bool,
    ) -> Result<Self> {
        let mu_total = mu_interior.rounded + mu_boundary.rounded;
        let factor = if realified { 2 } else { 1 };
        let inconclusive = !(mu_interior.is_verdict_grade() && mu_boundary.is_verdict_grade());
        let mut notes = Vec::new();
        let (jgroup, verdict) = match jgroup_info(q as u64) {
            Ok(info) if !inconclusive => (Some(info), Some(verdict(factor * mu_total, q as u64)?)),
            Ok(info) => {
                notes.push("a degree is not verdict grade; no verdict".into());
                (Some(info), None)
            }
            Err(e) => {
                notes.push(e.to_string());
                (None, None)
            }
        };
        if realified {
            notes.push("realified multiplicity is ±2 times the complex one; only |μ| mod n(q) is convention-free".into());
        }
        Ok(MultiplicityReport {
            family: family.into(),
            q,
            hypotheses: None,
            mu_interior,
            mu_boundary,
            mu_total,
            realified,
            realification_factor: factor,
            mu_verdict: factor * mu_total,
            inconclusive,
            jgroup,
            verdict,
            notes,
        })
    }
}

/// Full pipeline: hypotheses (when a plan is given), `μ_i`, `μ_b`, their sum,
/// the realification factor and the verdict.
pub fn total_multiplicity(
    family: &SymbolFamily,
    options: &DegreeOptions,
    exec: &dyn Executor,
    plan: Option<&SamplingPlan>,
    realify: bool,
) -> Result<MultiplicityReport> {
    let hypotheses = plan.map(|p| check_hypotheses(family, p)).transpose()?;
    let (mu_i, inc_i) = settle(interior_multiplicity(family, options, exec))?;
    let (mu_b, inc_b) = settle(boundary_multiplicity(family, options, exec))?;
    let mut report = MultiplicityReport::assemble(&family.name, family.q, mu_i, mu_b, realify)?;
    report.inconclusive |= inc_i || inc_b;
    if report.inconclusive {
        report.verdict = None;
    }
    report.hypotheses = hypotheses;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{builtin_family, interior_placebo, laplacian_neumann, polyharmonic_dirichlet, FamilyOptions, Winding};
    use crate::degree::PowerMap;
    use crate::exec::Serial;
    use crate::geometry::Domain;
    use crate::linalg::{identity, C64};
    use crate::manifold::QuadratureRule;
    use crate::symbol::{BoundarySymbol, FnField, InteriorSymbol, MultiIndex, RowBoundary, Term};

    fn small_plan() -> SamplingPlan {
        SamplingPlan { interior: 64, boundary: 32, ..SamplingPlan::default() }
    }

    /// `(1 + λ₁/(2(1+|λ|²))) |ξ|²` on the solid torus: λ-dependent right up to the boundary.
    fn collar_violator() -> SymbolFamily {
        let c = Arc::new(FnField::new(
            |lambda: &Param, _x: &[f64]| {
                let s = match lambda {
                    Param::Infinity => 1.0,
                    Param::Finite(l) => 1.0 + 0.5 * l[0] / (1.0 + l.iter().map(|v| v * v).sum::<f64>()),
                };
                Ok(identity(1) * C64::from(s))
            },
            true,
        ));
        let terms = (0..3)
            .map(|i| {
                let mut idx = vec![0; 3];
                idx[i] = 2;
                Term { index: MultiIndex::new(idx), coefficient: c.clone() }
            })
            .collect();
        SymbolFamily::new(
            InteriorSymbol::new(2, 1, 3, terms).unwrap(),
            BoundarySymbol::new(RowBoundary::dirichlet_system(1, 1)),
            2,
            Domain::torus(3).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn lambda_independent_families_pass_everything() {
        for f in [
            polyharmonic_dirichlet(4, 3, 1, 1).unwrap(),
            polyharmonic_dirichlet(4, 3, 2, 2).unwrap(),
            laplacian_neumann(4, 3).unwrap(),
        ] {
            let rep = check_hypotheses(&f, &small_plan()).unwrap();
            assert!(rep.passed(), "{}: {:?}", f.name, rep.failures());
            let comm = rep.h3.iter().find(|c| c.name.starts_with('[')).unwrap();
            assert_eq!(comm.value, 0.0);
            assert!(!rep.gaps.is_empty());
        }
    }

    #[test]
    fn lambda_independent_family_has_zero_multiplicity_and_no_verdict() {
        let f = polyharmonic_dirichlet(4, 3, 1, 1).unwrap();
        let rep = total_multiplicity(&f, &DegreeOptions::default(), &Serial, None, false).unwrap();
        assert!(rep.mu_interior.exact && rep.mu_boundary.exact);
        assert_eq!(rep.mu_total, 0);
        assert!(!rep.inconclusive);
        assert!(!rep.verdict.unwrap().bifurcates);
    }

    #[test]
    fn collar_violation_is_located() {
        let f = collar_violator();
        let rep = check_hypotheses(&f, &small_plan()).unwrap();
        let collar = &rep.h3[0];
        assert!(!collar.passed);
        let at = collar.worst.as_ref().unwrap();
        assert!(!f.domain.contains(&at.point) || f.domain.signed_distance(&at.point) > -f.domain.collar_depth() - 1e-12);
        assert!(matches!(boundary_multiplicity(&f, &DegreeOptions::default(), &Serial), Err(Error::CollarDependence { .. })));
        // A scalar symbol still commutes with its value at ∞.
        assert!(rep.h3[1].passed);
    }

    #[test]
    fn placebo_is_diagonal_at_infinity_and_has_zero_interior_degree() {
        let f = interior_placebo(2).unwrap();
        let rep = check_hypotheses(&f, &small_plan()).unwrap();
        assert!(rep.passed(), "{:?}", rep.failures());
        assert!(rep.reality.skipped_complex);
        // p(∞) = |ξ|² Id commutes with everything.
        assert!(rep.h3[1].value < 1e-15);
        // σ is not constant, so this goes through quadrature.
        let opts = DegreeOptions::with_rule(QuadratureRule::Product { nodes_per_dim: 12 });
        let mu = interior_multiplicity(&f, &opts, &Serial).unwrap();
        assert!(!mu.exact);
        assert_eq!(mu.rounded, 0);
        assert!(mu.residual < 0.25, "{mu:?}");
        assert!(boundary_multiplicity(&f, &opts, &Serial).unwrap().exact);
    }

    #[test]
    fn sigma_is_identity_at_infinity_and_off_the_domain() {
        let f = interior_placebo(2).unwrap();
        let sigma = build_sigma(&f).unwrap();
        let xi = [0.6, 0.8];
        let lam = Param::Finite(vec![0.4, -0.3]);
        assert_eq!(sigma.value(&Param::Infinity, &[0.05, 0.0], &xi).unwrap(), identity(2));
        assert_eq!(sigma.value(&lam, &[0.45, 0.2], &xi).unwrap(), identity(2));
        // Inside Ω but outside the bump, E = Id.
        assert!((sigma.value(&lam, &[0.3, 0.0], &xi).unwrap() - identity(2)).norm() < 1e-15);
        let inside = sigma.value(&lam, &[0.05, 0.0], &xi).unwrap();
        assert!((inside - identity(2)).norm() > 0.1);
        let flat = build_sigma(&polyharmonic_dirichlet(2, 3, 2, 1).unwrap()).unwrap();
        assert!(crate::degree::MatrixMap::is_constant(&flat));
    }

    #[test]
    fn indefinite_family_fails_h1() {
        // ξ₁² − ξ₂² + ξ₃² vanishes on a cone, so the conormal roots hit the real axis.
        let plus = Arc::new(crate::symbol::ConstantField(identity(1)));
        let minus = Arc::new(crate::symbol::ConstantField(-identity(1)));
        let terms = vec![
            Term { index: MultiIndex::new(vec![2, 0, 0]), coefficient: plus.clone() },
            Term { index: MultiIndex::new(vec![0, 2, 0]), coefficient: minus },
            Term { index: MultiIndex::new(vec![0, 0, 2]), coefficient: plus },
        ];
        let f = SymbolFamily::new(
            InteriorSymbol::new(2, 1, 3, terms).unwrap(),
            BoundarySymbol::new(RowBoundary::dirichlet_system(1, 1)),
            1,
            Domain::torus(3).unwrap(),
        )
        .unwrap();
        let rep = check_hypotheses(&f, &small_plan()).unwrap();
        assert!(!rep.passed());
        assert!(rep.h1.iter().any(|c| !c.passed && c.worst.is_some()));
    }

    #[test]
    fn synthetic_degree_48_gives_no_conclusion_at_q4() {
        let tau = PowerMap { inner: Winding::new(1), exponent: 48 };
        let opts = DegreeOptions::with_rule(QuadratureRule::Product { nodes_per_dim: 512 });
        let mu_b = bott_fedosov_degree(&tau, &opts, &Serial).unwrap();
        assert_eq!(mu_b.rounded, 48);
        let rep = MultiplicityReport::assemble("synthetic", 4, DegreeResult::exact(0), mu_b.clone(), false).unwrap();
        assert_eq!(rep.mu_total, 48);
        assert!(!rep.verdict.unwrap().bifurcates);
        let rep = MultiplicityReport::assemble("synthetic", 4, DegreeResult::exact(0), DegreeResult::exact(4), false).unwrap();
        assert!(rep.verdict.unwrap().bifurcates);
    }

    #[test]
    fn realified_example_numbers_bifurcate() {
        let rep = MultiplicityReport::assemble("example", 4, DegreeResult::exact(0), DegreeResult::exact(2), true).unwrap();
        assert_eq!(rep.mu_verdict, 4);
        let v = rep.verdict.unwrap();
        assert!(v.bifurcates);
        assert_eq!(v.n.to_string(), "48");
    }

    #[test]
    fn inadmissible_q_reports_without_verdict() {
        let rep = MultiplicityReport::assemble("x", 3, DegreeResult::exact(0), DegreeResult::exact(1), false).unwrap();
        assert!(rep.verdict.is_none() && rep.jgroup.is_none());
        assert!(!rep.notes.is_empty());
    }

    #[test]
    fn unsettled_degree_blocks_the_verdict() {
        let mut d = DegreeResult::exact(1);
        d.raw = C64::new(1.4, 0.0);
        d.residual = 0.4;
        d.exact = false;
        let rep = MultiplicityReport::assemble("x", 4, DegreeResult::exact(0), d, false).unwrap();
        assert!(rep.inconclusive && rep.verdict.is_none());
    }

    #[test]
    fn example_family_hypotheses() {
        let built = builtin_family("clutched-example", &FamilyOptions { m: 8, ..FamilyOptions::default() }).unwrap();
        assert!(built.fit.as_ref().unwrap().passed);
        let rep = check_hypotheses(&built.family, &small_plan()).unwrap();
        assert!(rep.passed(), "{:?}", rep.failures());
        // The constant interior gives μ_i = 0 with no quadrature.
        assert!(interior_multiplicity(&built.family, &DegreeOptions::default(), &Serial).unwrap().exact);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn total_is_the_sum_and_verdict_ignores_sign(a in -200i64..200, b in -200i64..200, realified: bool) {
                let r = MultiplicityReport::assemble("p", 8, DegreeResult::exact(a), DegreeResult::exact(b), realified).unwrap();
                prop_assert_eq!(r.mu_total, a + b);
                let s = MultiplicityReport::assemble("p", 8, DegreeResult::exact(-a), DegreeResult::exact(-b), realified).unwrap();
                prop_assert_eq!(r.verdict.unwrap().bifurcates, s.verdict.unwrap().bifurcates);
            }
        }
    }
}
