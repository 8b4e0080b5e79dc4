//! Subcommand dispatch.

use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use bifindex_core::catalog::{builtin_map, BuiltinMap};
use bifindex_core::construct::{chain_degrees, construct_example, ExampleParams};
use bifindex_core::degree::{bott_fedosov_degree, brouwer_degree, DegreeResult};
use bifindex_core::error::Error;
use bifindex_core::jtheory::{jgroup_info, verdict};
use bifindex_core::multiplicity::{
    boundary_multiplicity, check_hypotheses, interior_multiplicity, MultiplicityReport,
};

use crate::config::{self, ConfigError, MapConfig, ProblemConfig, Problem, RuleKind, SymbolSource};
use crate::exec::RayonExecutor;
use crate::report::{
    exit, jgroup_json, multiplicity_json, verdict_json, DegreeJson, Envelope, ErrorJson, FitJson, HypothesesJson,
};

#[derive(Debug, Parser)]
#[command(name = "bifindex", version, about = "Bifurcation multiplicities of parametrized elliptic boundary problems")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOptions,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct GlobalOptions {
    /// Problem configuration (TOML).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Seed for quasi-Monte Carlo scrambling and hypothesis sampling.
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// Total quadrature nodes; picks the default rule kind sized to this.
    #[arg(long, global = true, value_name = "NODES")]
    pub budget: Option<usize>,
    /// Residual below which a degree is verdict grade (at most 0.25).
    #[arg(long, global = true, value_name = "X")]
    pub tolerance: Option<f64>,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Worker threads for quadrature; 0 means all cores.
    #[arg(long, global = true, value_name = "N", default_value_t = 0)]
    pub threads: usize,
    /// Include wall time in the report (breaks byte-for-byte reproducibility).
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Sample the hypotheses of the configured family.
    Check,
    /// Degree of a builtin map.
    Degree {
        /// Map name, e.g. `winding-3`, `clifford-2`, `collapse`; overrides [map].
        #[arg(long)]
        map: Option<String>,
    },
    /// Hypotheses, interior and boundary multiplicities, and the verdict.
    Multiplicity,
    /// Divisibility verdict for a given multiplicity.
    Verdict {
        #[arg(long, allow_hyphen_values = true)]
        mu: i64,
        #[arg(long)]
        q: u64,
        /// `mu` is a complex degree; the verdict uses `2·mu`.
        #[arg(long)]
        realified: bool,
    },
    /// `m(s)`, `n(q)` and `|J(S^q)|`.
    Jgroup { q: u64 },
    /// Build the clutched example and report its provenance.
    ConstructExample {
        /// Write a config reproducing the family here.
        #[arg(long, value_name = "PATH")]
        emit_config: Option<PathBuf>,
        /// Also compute the chain-property degrees and the verdict.
        #[arg(long)]
        degrees: bool,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Check => "check",
            Command::Degree { .. } => "degree",
            Command::Multiplicity => "multiplicity",
            Command::Verdict { .. } => "verdict",
            Command::Jgroup { .. } => "jgroup",
            Command::ConstructExample { .. } => "construct-example",
        }
    }
}

/// A finished command: the report and the process exit code.
pub struct Outcome {
    pub envelope: Envelope,
    pub code: i32,
    /// Extra files to write, `(path, contents)`.
    pub files: Vec<(PathBuf, String)>,
}

fn config_failure(mut env: Envelope, e: &ConfigError) -> Outcome {
    env.error = Some(ErrorJson { code: "config", message: e.to_string(), location: None, degree: None });
    Outcome { envelope: env, code: exit::CONFIG, files: Vec::new() }
}

fn core_failure(mut env: Envelope, e: &Error) -> Outcome {
    let code = match e {
        Error::Inconclusive(_) => exit::INCONCLUSIVE,
        Error::CollarDependence { .. } | Error::ShapiroLopatinskij { .. } | Error::StableDimension { .. } | Error::RootOnAxis { .. } => {
            exit::HYPOTHESIS
        }
        Error::InadmissibleQ(_) => exit::CONFIG,
        _ => exit::FAILURE,
    };
    env.error = Some(e.into());
    Outcome { envelope: env, code, files: Vec::new() }
}

/// The config after command-line overrides.
pub fn effective_config(global: &GlobalOptions) -> Result<ProblemConfig, ConfigError> {
    let mut cfg = match &global.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| ConfigError::new("", format!("cannot read {}: {e}", path.display())))?;
            config::parse_config(&text)?
        }
        None => ProblemConfig::default(),
    };
    if let Some(seed) = global.seed {
        cfg.quadrature.seed = seed;
        cfg.sampling.seed = seed;
    }
    if let Some(budget) = global.budget {
        cfg.quadrature.rule = RuleKind::Auto;
        cfg.quadrature.budget = Some(budget);
    }
    if let Some(t) = global.tolerance {
        cfg.tolerances.residual = t;
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn run(global: &GlobalOptions, command: &Command) -> Outcome {
    let start = Instant::now();
    let cfg = effective_config(global);
    let seed = cfg.as_ref().map_or(0, |c| c.quadrature.seed);
    let inputs = match (&cfg, command) {
        (Ok(c), _) => serde_json::to_value(c).expect("configs serialize"),
        (Err(_), _) => Value::Null,
    };
    let mut env = Envelope::new(command.name(), seed, inputs);
    if let Command::Verdict { mu, q, realified } = command {
        env.inputs = json!({ "mu": mu, "q": q, "realified": realified });
    }
    if let Command::Jgroup { q } = command {
        env.inputs = json!({ "q": q });
    }
    let mut out = match cfg {
        Err(e) => config_failure(env, &e),
        Ok(cfg) => match RayonExecutor::new(global.threads) {
            Err(e) => config_failure(env, &ConfigError::new("--threads", e.to_string())),
            Ok(exec) => dispatch(&cfg, command, env, &exec),
        },
    };
    if global.timing {
        out.envelope.wall_seconds = Some(start.elapsed().as_secs_f64());
    }
    out
}

fn ok(mut env: Envelope, result: Value, code: i32) -> Outcome {
    env.result = Some(result);
    Outcome { envelope: env, code, files: Vec::new() }
}

fn dispatch(cfg: &ProblemConfig, command: &Command, env: Envelope, exec: &RayonExecutor) -> Outcome {
    let residual = cfg.tolerances.residual;
    match command {
        Command::Jgroup { q } => match jgroup_info(*q) {
            Ok(info) => ok(env, jgroup_json(&info), exit::OK),
            Err(e) => core_failure(env, &e),
        },
        Command::Verdict { mu, q, realified } => {
            let m = if *realified { 2 * mu } else { *mu };
            match verdict(m, *q) {
                Ok(v) => ok(env, verdict_json(&v), exit::OK),
                Err(e) => core_failure(env, &e),
            }
        }
        Command::Degree { map } => {
            let name = match (map, &cfg.map) {
                (Some(n), _) => n.clone(),
                (None, Some(MapConfig { builtin, .. })) => builtin.clone(),
                (None, None) => {
                    return config_failure(env, &ConfigError::new("map", "name a map with --map or a [map] section"))
                }
            };
            let built = match builtin_map(&name, &cfg.map_options()) {
                Ok(m) => m,
                Err(e) => return config_failure(env, &ConfigError::new("map.builtin", e.to_string())),
            };
            let opts = cfg.degree_options();
            let (method, result) = match &built {
                BuiltinMap::Matrix(m) => ("bott-fedosov", bott_fedosov_degree(m.as_ref(), &opts, exec)),
                BuiltinMap::Sphere(m) => ("brouwer", brouwer_degree(m.as_ref(), &opts, exec)),
            };
            match result {
                Ok(d) => {
                    let code = if d.is_verdict_grade() && d.residual < residual { exit::OK } else { exit::INCONCLUSIVE };
                    ok(env, json!({ "map": name, "method": method, "degree": DegreeJson::with_tolerance(&d, residual) }), code)
                }
                Err(e) => core_failure(env, &e),
            }
        }
        Command::Check => {
            let built = match cfg.build_family() {
                Ok(b) => b,
                Err(e) => return config_failure(env, &e),
            };
            match check_hypotheses(&built.family, &cfg.sampling_plan()) {
                Ok(rep) => {
                    let code = if rep.passed() { exit::OK } else { exit::HYPOTHESIS };
                    ok(
                        env,
                        json!({
                            "family": built.family.name,
                            "dimensions": dimensions(&built.family),
                            "hypotheses": HypothesesJson::from(&rep),
                            "fit": built.fit.as_ref().map(FitJson::from),
                            "unverifiable": built.unverifiable,
                        }),
                        code,
                    )
                }
                Err(e) => core_failure(env, &e),
            }
        }
        Command::Multiplicity => {
            let built = match cfg.build_family() {
                Ok(b) => b,
                Err(e) => return config_failure(env, &e),
            };
            let family = &built.family;
            let hypotheses = match check_hypotheses(family, &cfg.sampling_plan()) {
                Ok(h) => h,
                Err(e) => return core_failure(env, &e),
            };
            if !hypotheses.passed() {
                let result = json!({ "family": family.name, "hypotheses": HypothesesJson::from(&hypotheses) });
                return ok(env, result, exit::HYPOTHESIS);
            }
            let opts = cfg.degree_options();
            let settle = |r: bifindex_core::Result<DegreeResult>| match r {
                Ok(d) => Ok((d, false)),
                Err(Error::Inconclusive(d)) => Ok((*d, true)),
                Err(e) => Err(e),
            };
            let parts = settle(interior_multiplicity(family, &opts, exec))
                .and_then(|i| settle(boundary_multiplicity(family, &opts, exec)).map(|b| (i, b)));
            let ((mu_i, inc_i), (mu_b, inc_b)) = match parts {
                Ok(p) => p,
                Err(e) => return core_failure(env, &e),
            };
            let tight = mu_i.residual >= residual || mu_b.residual >= residual;
            let mut report = match MultiplicityReport::assemble(&family.name, family.q, mu_i, mu_b, family.realified) {
                Ok(r) => r,
                Err(e) => return core_failure(env, &e),
            };
            report.hypotheses = Some(hypotheses);
            if inc_i || inc_b || tight {
                report.inconclusive = true;
                report.verdict = None;
            }
            let code = if report.inconclusive { exit::INCONCLUSIVE } else { exit::OK };
            ok(env, multiplicity_json(&report, residual), code)
        }
        Command::ConstructExample { emit_config, degrees } => construct(cfg, env, exec, emit_config.as_ref(), *degrees),
    }
}

fn dimensions(f: &bifindex_core::symbol::SymbolFamily) -> Value {
    json!({
        "q": f.q,
        "n": f.n(),
        "m": f.interior.size(),
        "k": f.interior.order(),
        "r": f.r(),
        "boundaryOrders": f.boundary.orders(),
        "complex": f.complex,
        "realified": f.realified,
    })
}

fn construct(
    cfg: &ProblemConfig,
    env: Envelope,
    exec: &RayonExecutor,
    emit: Option<&PathBuf>,
    degrees: bool,
) -> Outcome {
    let p = cfg.problem.as_ref();
    let d = ExampleParams::default();
    let params = ExampleParams {
        q: p.map_or(d.q, |p| p.q),
        n: p.and_then(|p| p.n).unwrap_or(d.n),
        m: p.and_then(|p| p.m).unwrap_or(d.m),
        l: p.and_then(|p| p.k).map_or(d.l, |k| (k / 2).max(1)),
        fit_degree: cfg.fit.degree,
        fit_base: cfg.fit.base_points,
        target_error: cfg.tolerances.fit_error,
        seed: cfg.fit.seed,
        ..d
    };
    let ex = match construct_example(&params) {
        Ok(ex) => ex,
        Err(e) => return core_failure(env, &e),
    };
    // A config that rebuilds exactly this family.
    let reproduce = ProblemConfig {
        problem: Some(Problem {
            q: params.q,
            n: Some(params.n),
            m: Some(params.m),
            k: Some(2 * params.l),
            r: Some(params.m * params.l),
            name: None,
            realified: true,
            complex: true,
            two_family: false,
        }),
        symbol: Some(SymbolSource { builtin: Some("clutched-example".into()), ..SymbolSource::default() }),
        quadrature: cfg.quadrature.clone(),
        sampling: cfg.sampling.clone(),
        tolerances: cfg.tolerances.clone(),
        fit: cfg.fit.clone(),
        ..ProblemConfig::default()
    };
    let toml_text = config::to_toml(&reproduce);
    let mut result = json!({
        "family": ex.family.name,
        "dimensions": dimensions(&ex.family),
        "muShift": ex.mu_shift,
        "fit": FitJson::from(&ex.fit),
        "unverifiable": ex.unverifiable,
        "config": toml_text,
    });
    let mut code = if ex.fit.passed { exit::OK } else { exit::HYPOTHESIS };
    if degrees {
        match chain_degrees(params.q, params.n, &cfg.degree_options(), exec) {
            Ok(chain) => {
                let grade = chain.is_verdict_grade()
                    && chain.collapse.residual < cfg.tolerances.residual
                    && chain.generator.residual < cfg.tolerances.residual;
                let v = if grade { verdict(chain.realified, params.q as u64).ok() } else { None };
                result["degrees"] = json!({
                    "collapse": DegreeJson::with_tolerance(&chain.collapse, cfg.tolerances.residual),
                    "generator": DegreeJson::with_tolerance(&chain.generator, cfg.tolerances.residual),
                    "composite": chain.composite,
                    "realified": chain.realified,
                    "interior": 0,
                    "verdict": v.as_ref().map(verdict_json),
                });
                if !grade && code == exit::OK {
                    code = exit::INCONCLUSIVE;
                }
            }
            Err(e) => return core_failure(env, &e),
        }
    }
    let mut out = ok(env, result, code);
    if let Some(path) = emit {
        out.files.push((path.clone(), toml_text));
    }
    out
}

/// Parse arguments, run, write outputs; returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { exit::CONFIG } else { exit::OK };
            let _ = e.print();
            return code;
        }
    };
    let out = run(&cli.global, &cli.command);
    let json = out.envelope.to_json();
    let mut code = out.code;
    for (path, text) in &out.files {
        if let Err(e) = std::fs::write(path, text) {
            eprintln!("cannot write {}: {e}", path.display());
            code = exit::FAILURE;
        }
    }
    match &cli.global.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &json) {
                eprintln!("cannot write {}: {e}", path.display());
                return exit::FAILURE;
            }
        }
        None => print!("{json}"),
    }
    code
}
