//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p bifindex --test acceptance`. Set
//! `BIFINDEX_EXTENDED=1` to also run the full boundary-multiplicity integral
//! of the clutched example, which is not gating.

use std::cell::RefCell;
use std::time::Instant;

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use rand::{Rng, SeedableRng};

use bifindex::exec::RayonExecutor;
use bifindex_core::catalog::{builtin_family, builtin_map, polyharmonic_dirichlet, BuiltinMap, FamilyOptions, MapOptions, Winding};
use bifindex_core::construct::{chain_degrees, clifford_generator, construct_example, ExampleParams};
use bifindex_core::degree::{
    bott_fedosov_degree, bott_fedosov_integrand, degree_prime, trace_odd_power, DegreeOptions,
    DegreeResult, MatrixMap, PointwiseProduct, Sandwiched, Stabilized, DEFAULT_FD_STEP,
};
use bifindex_core::halfline::{build_tau, check_shapiro_lopatinskij, half_line, root_tolerance, split_roots};
use bifindex_core::jtheory::{adams_m, n_of_q, verdict};
use bifindex_core::linalg::{identity, CMat, C64};
use bifindex_core::manifold::{sample_points, QuadratureRule};
use bifindex_core::multiplicity::{boundary_multiplicity, check_hypotheses, interior_multiplicity, SamplingPlan};
use bifindex_core::symbol::{Param, SymbolFamily};

// Tolerances, each as stated by its criterion.
const WINDING_RESIDUAL: f64 = 1e-10;
const WINDING_NODES: usize = 512;
const SU2_RESIDUAL: f64 = 1e-6;
/// Product Gauss nodes per dimension on `S³`; the cap is 64.
const SU2_NODES_PER_DIM: usize = 32;
const TRACE_AGREEMENT: f64 = 1e-12;
const TRACE_CASES: usize = 100;
const SL_SAMPLES: usize = 100;
const CHAIN_RESIDUAL: f64 = 1e-10;
const COLLAPSE_RESIDUAL: f64 = 0.25;
const COLLAPSE_NODE_CAP: usize = 20_000_000;
const EXTENDED_RESIDUAL: f64 = 0.4;
const AUDIT_RESIDUAL: f64 = 0.25;
const AUDIT_IMAGINARY: f64 = 1e-6;

thread_local! {
    /// Every degree computed by quadrature in this run, for the integrality audit.
    static LEDGER: RefCell<Vec<(String, DegreeResult)>> = const { RefCell::new(Vec::new()) };
}

fn audited(label: &str, d: DegreeResult) -> DegreeResult {
    LEDGER.with(|l| l.borrow_mut().push((label.to_owned(), d.clone())));
    d
}

type Check = Result<String, String>;

/// Prefix of an `Ok` detail for a criterion that did not run.
const SKIPPED: &str = "\u{0}skip";

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn product(n: usize) -> DegreeOptions {
    DegreeOptions::with_rule(QuadratureRule::Product { nodes_per_dim: n })
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

// 1. Number theory.

fn is_prime(p: u64) -> bool {
    p >= 2 && (2..p).take_while(|d| d * d <= p).all(|d| p % d != 0)
}

fn valuation(p: u64, mut n: u64) -> u32 {
    let mut e = 0;
    while n % p == 0 {
        n /= p;
        e += 1;
    }
    e
}

/// The definition read literally, prime by prime.
fn m_by_definition(s: u64) -> u128 {
    let mut m: u128 = 1;
    for p in (2..=s + 1).filter(|&p| is_prime(p)) {
        let e = match p {
            2 if s % 2 == 0 => 2 + valuation(2, s),
            2 => 1,
            _ if s % (p - 1) == 0 => 1 + valuation(p, s),
            _ => 0,
        };
        m *= (p as u128).pow(e);
    }
    m
}

/// `ν_p` of `gcd_k k^N (k^s − 1)` for large `N`: only `k` prime to `p` matter,
/// and `k` up to 500 already realize the minimum. An independent
/// characterization of the same function.
fn gcd_valuation(p: u64, s: u64) -> u32 {
    let mut modulus: u128 = 1;
    let mut cap = 0;
    while modulus * (p as u128) < (1u128 << 60) {
        modulus *= p as u128;
        cap += 1;
    }
    (2..=500u128)
        .filter(|k| k % p as u128 != 0)
        .map(|k| {
            let mut acc: u128 = 1;
            for _ in 0..s {
                acc = acc * k % modulus;
            }
            let r = (acc + modulus - 1) % modulus;
            if r == 0 {
                cap
            } else {
                let mut r = r;
                let mut e = 0;
                while r % p as u128 == 0 {
                    r /= p as u128;
                    e += 1;
                }
                e
            }
        })
        .min()
        .expect("nonempty range")
}

fn m_by_gcd(s: u64) -> u128 {
    (2..=61u64).filter(|&p| is_prime(p)).map(|p| (p as u128).pow(gcd_valuation(p, s))).product()
}

fn criterion_number_theory() -> Check {
    for s in 1..=12u64 {
        let got: u128 = adams_m(s).map_err(err)?.to_string().parse().map_err(err)?;
        let (a, b) = (m_by_definition(s), m_by_gcd(s));
        ensure(got == a && got == b, || format!("m({s}) = {got}, definition {a}, gcd {b}"))?;
    }
    let pins = [(2, 24u32), (4, 240), (6, 504)];
    for (s, v) in pins {
        ensure(adams_m(s).map_err(err)? == v.into(), || format!("m({s}) ≠ {v}"))?;
    }
    let pins = [(4, 48u32), (8, 240), (12, 1008)];
    for (q, v) in pins {
        ensure(n_of_q(q).map_err(err)? == v.into(), || format!("n({q}) ≠ {v}"))?;
    }
    Ok("m(s), s=1..12, agrees with the definition and the gcd characterization; m(2,4,6)=24,240,504; n(4,8,12)=48,240,1008".into())
}

// 2. Winding maps.

fn criterion_winding() -> Check {
    let mut worst: f64 = 0.0;
    for k in -3..=3 {
        let d = audited("winding", bott_fedosov_degree(&Winding::new(k), &product(WINDING_NODES), &bifindex_core::exec::Serial).map_err(err)?);
        ensure(d.rounded == k as i64, || format!("k={k}: got {}", d.rounded))?;
        worst = worst.max(d.residual);
    }
    ensure(worst < WINDING_RESIDUAL, || format!("worst residual {worst:e}"))?;
    Ok(format!("k=-3..3 exact, worst residual {worst:.1e} < {WINDING_RESIDUAL:e}"))
}

// 3. SU(2).

fn criterion_su2(exec: &RayonExecutor) -> Check {
    let psi = clifford_generator(2).map_err(err)?;
    let opts = DegreeOptions { auto_double: false, ..product(SU2_NODES_PER_DIM) };
    let bf = audited("su2 bott-fedosov", bott_fedosov_degree(&psi, &opts, exec).map_err(err)?);
    let dp = audited("su2 degree-prime", degree_prime(&psi, &opts, exec).map_err(err)?);
    ensure(bf.rounded.abs() == 1, || format!("|deg| = {}", bf.rounded.abs()))?;
    ensure(bf.rounded == dp.rounded, || format!("methods disagree: {} vs {}", bf.rounded, dp.rounded))?;
    ensure(bf.residual < SU2_RESIDUAL && dp.residual < SU2_RESIDUAL, || {
        format!("residuals {:e}, {:e}", bf.residual, dp.residual)
    })?;
    Ok(format!(
        "deg = deg' = {} on {SU2_NODES_PER_DIM}^3 Gauss nodes; residuals {:.1e}, {:.1e}",
        bf.rounded, bf.residual, dp.residual
    ))
}

// 4. Exterior algebra.

/// `Σ_π sgn(π) tr(A_π(1) ⋯ A_π(d))` over all permutations, sign by inversion count.
fn permutation_sum(a: &[CMat]) -> C64 {
    fn permutations(items: Vec<usize>) -> Vec<Vec<usize>> {
        if items.len() <= 1 {
            return vec![items];
        }
        let mut out = Vec::new();
        for i in 0..items.len() {
            let mut rest = items.clone();
            let head = rest.remove(i);
            for mut tail in permutations(rest) {
                tail.insert(0, head);
                out.push(tail);
            }
        }
        out
    }
    let l = a[0].nrows();
    permutations((0..a.len()).collect())
        .into_iter()
        .map(|p| {
            let inversions = (0..p.len()).flat_map(|i| (i + 1..p.len()).map(move |j| (i, j))).filter(|&(i, j)| p[i] > p[j]).count();
            let sign = if inversions % 2 == 0 { 1.0 } else { -1.0 };
            let prod = p.iter().fold(identity(l), |acc, &i| acc * &a[i]);
            prod.trace() * sign
        })
        .sum()
}

fn criterion_trace() -> Check {
    let mut rng = rand::rngs::StdRng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for case in 0..TRACE_CASES {
        let d = if case % 2 == 0 { 3 } else { 5 };
        let l = rng.gen_range(1..=4);
        let a: Vec<CMat> = (0..d)
            .map(|_| CMat::from_fn(l, l, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))))
            .collect();
        let (x, y) = (trace_odd_power(&a).map_err(err)?, permutation_sum(&a));
        let rel = (x - y).norm() / (1.0 + y.norm());
        worst = worst.max(rel);
    }
    ensure(worst < TRACE_AGREEMENT, || format!("worst relative gap {worst:e}"))?;
    Ok(format!("{TRACE_CASES} random inputs, 2v-1 ∈ {{3,5}}, sizes ≤ 4; worst gap {worst:.1e}·(1+|oracle|)"))
}

// 5. Half-line machinery.

fn boundary_points(family: &SymbolFamily, count: usize, seed: u64) -> Vec<(Vec<f64>, Vec<f64>)> {
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    let n = family.n();
    (0..count)
        .map(|_| {
            let angles: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(0.0..std::f64::consts::TAU)).collect();
            let mut s: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let norm = s.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-9);
            s.iter_mut().for_each(|v| *v /= norm);
            (angles, s)
        })
        .collect()
}

fn criterion_half_line(exec: &RayonExecutor) -> Check {
    let lap = polyharmonic_dirichlet(4, 3, 1, 1).map_err(err)?;
    let tau = build_tau(&lap, DEFAULT_FD_STEP).map_err(err)?;
    let mut tau_gap: f64 = 0.0;
    for (angles, s) in boundary_points(&lap, 32, 5) {
        let frame = lap.domain.boundary_frame(&angles);
        let xi_t = frame.tangent_vector(&s);
        let hl = half_line(&lap, &Param::Infinity, &frame, &xi_t).map_err(err)?;
        let split = split_roots(&hl.companion, root_tolerance(&xi_t, hl.companion.order)).map_err(err)?;
        ensure(split.upper == 1 && split.lower == 1, || format!("root split {}/{}", split.upper, split.lower))?;
        ensure(hl.stable.basis.ncols() == 1, || format!("stable dimension {}", hl.stable.basis.ncols()))?;
        check_shapiro_lopatinskij(&lap, &lap.boundary, &Param::Infinity, &frame, &xi_t).map_err(err)?;
        let t = tau.value(&Param::Finite(vec![0.3, -1.2, 0.7, 2.0]), &frame, &xi_t).map_err(err)?;
        tau_gap = tau_gap.max((t - identity(1)).norm());
    }
    ensure(tau_gap == 0.0, || format!("τ deviates from Id by {tau_gap:e}"))?;
    let mu_b = boundary_multiplicity(&lap, &DegreeOptions::default(), exec).map_err(err)?;
    ensure(mu_b.exact && mu_b.rounded == 0, || format!("μ_b = {:?}", mu_b.raw))?;

    for (m, l) in [(1, 2), (2, 1), (2, 2)] {
        let f = polyharmonic_dirichlet(4, 3, m, l).map_err(err)?;
        for (angles, s) in boundary_points(&f, SL_SAMPLES, 9) {
            let frame = f.domain.boundary_frame(&angles);
            let xi_t = frame.tangent_vector(&s);
            check_shapiro_lopatinskij(&f, &f.boundary, &Param::Infinity, &frame, &xi_t)
                .map_err(|e| format!("(m,l)=({m},{l}): {e}"))?;
        }
    }
    Ok(format!(
        "Laplacian-Dirichlet: 1 upper root, stable dim 1, SL pass, τ ≡ Id, μ_b = 0 exact; polyharmonic SL at {SL_SAMPLES} collar samples for (1,2),(2,1),(2,2)"
    ))
}

// 6. Exact zeros.

fn criterion_exact_zeros(exec: &RayonExecutor) -> Check {
    let opts = FamilyOptions { q: 4, ..FamilyOptions::default() };
    let mut seen = Vec::new();
    for name in ["laplacian-dirichlet", "laplacian-neumann", "polyharmonic-dirichlet", "interior-placebo"] {
        let f = builtin_family(name, &FamilyOptions { m: 2, l: 2, ..opts.clone() }).map_err(err)?.family;
        let b = boundary_multiplicity(&f, &DegreeOptions::default(), exec).map_err(|e| format!("{name}: {e}"))?;
        ensure(b.exact && b.rounded == 0 && b.budget.nodes == 0, || format!("{name}: μ_b not an exact zero"))?;
        if !f.interior.depends_on_lambda() {
            let i = interior_multiplicity(&f, &DegreeOptions::default(), exec).map_err(err)?;
            ensure(i.exact && i.rounded == 0 && i.budget.nodes == 0, || format!("{name}: μ_i not an exact zero"))?;
        }
        seen.push(name);
    }
    let ex = construct_example(&ExampleParams::default()).map_err(err)?;
    let i = interior_multiplicity(&ex.family, &DegreeOptions::default(), exec).map_err(err)?;
    ensure(i.exact && i.rounded == 0, || "clutched example: μ_i not an exact zero".into())?;
    Ok(format!("μ_b = 0 exactly for {}; μ_i = 0 exactly for the λ-independent interiors incl. the clutched example", seen.join(", ")))
}

// 7. Degree properties.

fn criterion_properties(exec: &RayonExecutor) -> Check {
    let psi = clifford_generator(2).map_err(err)?;
    let stab = Stabilized { inner: psi.clone(), extra: 2 };
    for node in sample_points(psi.manifold(), &QuadratureRule::Product { nodes_per_dim: 6 }).map_err(err)? {
        let a = bott_fedosov_integrand(&psi, &node.coords, DEFAULT_FD_STEP).map_err(err)?;
        let b = bott_fedosov_integrand(&stab, &node.coords, DEFAULT_FD_STEP).map_err(err)?;
        ensure(a == b, || format!("stabilized integrand differs at {:?}", node.coords))?;
    }

    let s3 = product(24);
    let square = PointwiseProduct::new(psi.clone(), psi.clone()).map_err(err)?;
    let d = audited("S3 additivity", bott_fedosov_degree(&square, &s3, exec).map_err(err)?);
    ensure(d.rounded == 2, || format!("deg ψ² = {}", d.rounded))?;

    let failures = RefCell::new(Vec::<String>::new());
    let mut runner = TestRunner::new_with_rng(Config { cases: 16, failure_persistence: None, ..Config::default() }, proptest::test_runner::TestRng::deterministic_rng(proptest::test_runner::RngAlgorithm::ChaCha));
    let strategy = (-3i32..=3, -3i32..=3, proptest::collection::vec(-1.0f64..1.0, 8), 0.0f64..0.1);
    let outcome = runner.run(&strategy, |(a, b, g, eps)| {
        let circle = product(256);
        let sum = PointwiseProduct::new(Winding::new(a), Winding::new(b)).unwrap();
        let r = audited("S1 additivity", bott_fedosov_degree(&sum, &circle, exec).unwrap());
        prop_assert_eq!(r.rounded, (a + b) as i64);

        let g = CMat::from_fn(2, 2, |r, c| C64::new(g[2 * r + c], g[4 + 2 * r + c])) + identity(2) * C64::from(2.5);
        let conj = Sandwiched::conjugate(Stabilized { inner: Winding::new(a), extra: 1 }, g.clone()).unwrap();
        let r = audited("conjugation", bott_fedosov_degree(&conj, &circle, exec).unwrap());
        prop_assert_eq!(r.rounded, a as i64);

        // Right multiplication by I + εG stays in GL and is homotopic to the identity.
        let near = identity(2) + (&g - identity(2) * C64::from(2.5)) * C64::from(eps);
        let moved = Sandwiched::right_multiplied(Stabilized { inner: Winding::new(b), extra: 1 }, near);
        let r = audited("small homotopy", bott_fedosov_degree(&moved, &circle, exec).unwrap());
        prop_assert_eq!(r.rounded, b as i64);
        Ok(())
    });
    if let Err(e) = outcome {
        failures.borrow_mut().push(e.to_string());
    }
    let f = failures.into_inner();
    ensure(f.is_empty(), || f.join("; "))?;
    Ok("stabilization bit-identical at every node; deg ψ² = 2 on S³; additivity, conjugation, small homotopy hold over 16 generated cases on S¹".into())
}

// 8. Miniature chain check.

fn criterion_chain() -> Check {
    let BuiltinMap::Matrix(map) = builtin_map("clifford-doubling", &MapOptions::default()).map_err(err)? else {
        return Err("clifford-doubling is not a matrix map".into());
    };
    let d = audited("psi∘doubling", bott_fedosov_degree(map.as_ref(), &product(WINDING_NODES), &bifindex_core::exec::Serial).map_err(err)?);
    let psi = audited("psi", bott_fedosov_degree(&clifford_generator(1).map_err(err)?, &product(WINDING_NODES), &bifindex_core::exec::Serial).map_err(err)?);
    ensure(d.rounded == 2 * psi.rounded && psi.rounded.abs() == 1, || format!("deg(ψ∘2) = {}, deg ψ = {}", d.rounded, psi.rounded))?;
    ensure(d.residual < CHAIN_RESIDUAL, || format!("residual {:e}", d.residual))?;
    Ok(format!("deg(ψ∘doubling) = {} = 2·deg ψ, residual {:.1e}", d.rounded, d.residual))
}

// 9. Clutched example, staged.

type Timed = (Check, f64);

fn criterion_example(exec: &RayonExecutor) -> (Timed, Timed, Timed, Timed) {
    let opts = DegreeOptions::default();
    let t = Instant::now();
    let chain = chain_degrees(4, 3, &opts, exec);
    let stage_a = match &chain {
        Ok(c) => {
            let d = audited("collapse", c.collapse.clone());
            audited("generator", c.generator.clone());
            let nodes = d.budget.nodes;
            ensure(d.rounded == 2, || format!("deg f = {}", d.rounded))
                .and_then(|_| ensure(d.residual < COLLAPSE_RESIDUAL, || format!("residual {}", d.residual)))
                .and_then(|_| ensure(nodes <= COLLAPSE_NODE_CAP, || format!("{nodes} nodes")))
                .map(|_| format!("deg f = 2 (raw {:.5}) with {nodes} QMC nodes, residual {:.1e}", d.raw.re, d.residual))
        }
        Err(e) => Err(err(e)),
    };
    let stage_a = (stage_a, t.elapsed().as_secs_f64());

    let t = Instant::now();
    let stage_b = construct_example(&ExampleParams::default()).map_err(err).and_then(|ex| {
        ensure(ex.fit.passed, || format!("fit error {}", ex.fit.achieved_error))?;
        let rep = check_hypotheses(&ex.family, &SamplingPlan::default()).map_err(err)?;
        ensure(rep.passed(), || format!("{:?}", rep.failures().iter().map(|c| &c.name).collect::<Vec<_>>()))?;
        let n = rep.certificates().count();
        Ok(format!("all {n} sampled certificates pass; fit error {:.3} ≤ {}", ex.fit.achieved_error, ex.fit.target_error))
    });
    let stage_b = (stage_b, t.elapsed().as_secs_f64());

    let t = Instant::now();

    let stage_c = match std::env::var("BIFINDEX_EXTENDED") {
        Ok(v) if v == "1" => construct_example(&ExampleParams::default()).map_err(err).and_then(|ex| {
            let budget = std::env::var("BIFINDEX_EXTENDED_NODES").ok().and_then(|s| s.parse().ok()).unwrap_or(1 << 16);
            let o = DegreeOptions { budget: Some(budget), ..DegreeOptions::default() };
            let d = boundary_multiplicity(&ex.family, &o, exec).map_err(err)?;
            ensure(d.rounded.abs() == 2 && d.residual < EXTENDED_RESIDUAL, || {
                format!("complex degree {} (raw {:.4}), residual {:.3}", d.rounded, d.raw, d.residual)
            })?;
            Ok(format!("μ_b = {} complex (realified {}) at {budget} nodes, residual {:.3}", d.rounded, 2 * d.rounded, d.residual))
        }),
        _ => Ok(format!("{SKIPPED} extended, not gating; set BIFINDEX_EXTENDED=1")),
    };
    let stage_c = (stage_c, t.elapsed().as_secs_f64());

    let verdict_line = chain.map_err(err).and_then(|c| {
        ensure(c.is_verdict_grade(), || "chain degrees are not verdict grade".into())?;
        let v = verdict(c.realified, 4).map_err(err)?;
        ensure(c.realified.abs() == 4 && v.bifurcates, || format!("realified {} → {:?}", c.realified, v))?;
        Ok(format!(
            "deg φ = deg f · deg ψ = {}·{} = {}; realified |μ_b| = {}, n(4) = {}, residue {} → bifurcates",
            c.collapse.rounded, c.generator.rounded, c.composite, c.realified.abs(), v.n, v.residue
        ))
    });
    (stage_a, stage_b, stage_c, (verdict_line, 0.0))
}

// 10. Integrality audit.

fn criterion_audit() -> Check {
    let ledger = LEDGER.with(|l| l.borrow().clone());
    let grade: Vec<_> = ledger.iter().filter(|(_, d)| d.is_verdict_grade()).collect();
    for (label, d) in &grade {
        ensure(d.raw.im.abs() < AUDIT_IMAGINARY * (1.0 + d.raw.norm()), || format!("{label}: Im {:e}", d.raw.im))?;
        ensure(d.residual < AUDIT_RESIDUAL, || format!("{label}: residual {}", d.residual))?;
    }
    ensure(!grade.is_empty(), || "no degrees were recorded".into())?;
    Ok(format!("{} of {} recorded degrees are verdict grade; all have |Im| < 1e-6(1+|raw|) and residual < 0.25", grade.len(), ledger.len()))
}

fn timed(f: impl FnOnce() -> Check) -> Timed {
    let t = Instant::now();
    let out = f();
    (out, t.elapsed().as_secs_f64())
}

fn main() {
    // The harness takes libtest's flags; listing mode must stay silent.
    let args: Vec<String> = std::env::args().collect();
    if args.iter().any(|a| a == "--list") {
        return;
    }
    let exec = RayonExecutor::new(0).expect("thread pool");
    let mut failed = 0;
    let mut report = |id: &str, title: &str, secs: f64, outcome: Check| {
        match outcome {
            Ok(detail) => match detail.strip_prefix(SKIPPED) {
                Some(why) => println!("SKIP  {id:<4} {title}:{why}"),
                None => println!("PASS  {id:<4} {title}: {detail} [{secs:.2}s]"),
            },
            Err(why) => {
                failed += 1;
                println!("FAIL  {id:<4} {title}: {why} [{secs:.2}s]");
            }
        }
    };

    let (o, secs) = timed(criterion_number_theory);
    report("1", "number theory", secs, o);
    let (o, secs) = timed(criterion_winding);
    report("2", "winding degrees", secs, o);
    let (o, secs) = timed(|| criterion_su2(&exec));
    report("3", "SU(2) generator", secs, o);
    let (o, secs) = timed(criterion_trace);
    report("4", "exterior algebra", secs, o);
    let (o, secs) = timed(|| criterion_half_line(&exec));
    report("5", "half-line machinery", secs, o);
    let (o, secs) = timed(|| criterion_exact_zeros(&exec));
    report("6", "exact zeros", secs, o);
    let (o, secs) = timed(|| criterion_properties(&exec));
    report("7", "degree properties", secs, o);
    let (o, secs) = timed(criterion_chain);
    report("8", "miniature chain", secs, o);
    let (a, b, c, v) = criterion_example(&exec);
    report("9a", "collapse map degree", a.1, a.0);
    report("9b", "example hypotheses", b.1, b.0);
    report("9c", "full boundary multiplicity", c.1, c.0);
    report("9", "example verdict", v.1, v.0);
    let (o, secs) = timed(criterion_audit);
    report("10", "integrality audit", secs, o);

    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all criteria pass");
}
