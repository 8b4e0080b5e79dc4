use std::path::Path;
use std::process::Command;

use serde_json::Value;

fn bifindex(args: &[&str]) -> (Value, i32) {
    let out = Command::new(env!("CARGO_BIN_EXE_bifindex")).args(args).output().expect("binary runs");
    let code = out.status.code().expect("exit code");
    let text = String::from_utf8(out.stdout).expect("utf-8 report");
    let json = serde_json::from_str(&text).unwrap_or(Value::Null);
    (json, code)
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn jgroup_8() {
    let (j, code) = bifindex(&["jgroup", "8"]);
    assert_eq!(code, 0);
    assert_eq!(j["result"]["n"], 240);
    assert_eq!(j["result"]["jOrder"], 240);
    assert_eq!(j["command"], "jgroup");
}

#[test]
fn inadmissible_q_is_an_input_error() {
    let (j, code) = bifindex(&["jgroup", "3"]);
    assert_eq!(code, 4);
    assert_eq!(j["error"]["code"], "inadmissible-q");
}

#[test]
fn realified_four_bifurcates_at_q4() {
    let (j, code) = bifindex(&["verdict", "--mu", "2", "--q", "4", "--realified"]);
    assert_eq!(code, 0);
    assert_eq!(j["result"]["mu"], 4);
    assert_eq!(j["result"]["n"], 48);
    assert_eq!(j["result"]["bifurcates"], true);

    let (j, _) = bifindex(&["verdict", "--mu", "-96", "--q", "4"]);
    assert_eq!(j["result"]["bifurcates"], false);
    assert_eq!(j["result"]["conclusion"], "no conclusion");
}

#[test]
fn winding_degree() {
    let (j, code) = bifindex(&["degree", "--map", "winding-3"]);
    assert_eq!(code, 0, "{j}");
    let d = &j["result"]["degree"];
    assert_eq!(d["rounded"], 3);
    assert!(d["residual"].as_f64().unwrap() < 1e-10);
    assert_eq!(j["result"]["method"], "bott-fedosov");
}

#[test]
fn reports_are_byte_identical() {
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_bifindex"))
            .args(["degree", "--map", "clifford", "--budget", "4096", "--seed", "11"])
            .output()
            .unwrap()
            .stdout
    };
    let a = run();
    assert!(!a.is_empty());
    assert_eq!(a, run());
}

#[test]
fn timing_is_opt_in() {
    let (j, _) = bifindex(&["jgroup", "4"]);
    assert!(j.get("wallSeconds").is_none());
    let (j, _) = bifindex(&["jgroup", "4", "--timing"]);
    assert!(j["wallSeconds"].is_f64());
}

#[test]
fn config_errors_exit_4_with_a_location() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.toml", "[problem]\nq = 2\n\n[symbol]\nbuiltin = \"laplacian-dirichlet\"\ncolour = 3\n");
    let (j, code) = bifindex(&["check", "--config", &bad]);
    assert_eq!(code, 4);
    assert_eq!(j["error"]["code"], "config");
    assert!(j["error"]["message"].as_str().unwrap().contains("line 6"), "{j}");

    let (_, code) = bifindex(&["check", "--config", "/nonexistent/x.toml"]);
    assert_eq!(code, 4);

    let ok = write(dir.path(), "ok.toml", "[problem]\nq = 2\n\n[symbol]\nbuiltin = \"laplacian-dirichlet\"\n");
    let (_, code) = bifindex(&["check", "--config", &ok, "--tolerance", "0.3"]);
    assert_eq!(code, 4, "a residual cap above 0.25 is refused");
}

#[test]
fn laplacian_dirichlet_checks_and_has_zero_multiplicity() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "lap.toml", "[problem]\nq = 2\n\n[symbol]\nbuiltin = \"laplacian-dirichlet\"\n");
    let (j, code) = bifindex(&["check", "--config", &cfg]);
    assert_eq!(code, 0, "{j}");
    assert_eq!(j["result"]["hypotheses"]["passed"], true);

    let (j, code) = bifindex(&["multiplicity", "--config", &cfg]);
    assert_eq!(code, 0, "{j}");
    assert_eq!(j["result"]["muTotal"], 0);
    assert_eq!(j["result"]["muInterior"]["exact"], true);
    assert_eq!(j["result"]["muBoundary"]["exact"], true);
}

#[test]
fn hypothesis_failure_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    // ξ₁² − ξ₂² + ξ₃² is not elliptic.
    let cfg = write(
        dir.path(),
        "indef.toml",
        r#"
[problem]
q = 2
n = 3

[geometry]
kind = "torus"

[[symbol.interior]]
index = [2, 0, 0]
matrix = [["1"]]

[[symbol.interior]]
index = [0, 2, 0]
matrix = [["-1"]]

[[symbol.interior]]
index = [0, 0, 2]
matrix = [["1"]]

[[symbol.boundary]]
order = 0
terms = [{ power = 0, row = ["1"] }]
"#,
    );
    let (j, code) = bifindex(&["multiplicity", "--config", &cfg]);
    assert_eq!(code, 3, "{j}");
    assert_eq!(j["result"]["hypotheses"]["passed"], false);
    assert!(j["result"].get("muTotal").is_none());
}

#[test]
fn construct_example_emits_a_reproducing_config() {
    let dir = tempfile::tempdir().unwrap();
    let emitted = dir.path().join("example.toml");
    let emitted = emitted.to_str().unwrap();
    let (j, code) = bifindex(&["construct-example", "--emit-config", emitted]);
    assert_eq!(code, 0, "{j}");
    assert_eq!(j["result"]["fit"]["passed"], true);
    assert!(!j["result"]["unverifiable"].as_array().unwrap().is_empty());
    let text = std::fs::read_to_string(emitted).unwrap();
    assert!(text.contains("clutched-example"));
    assert_eq!(text, j["result"]["config"].as_str().unwrap());
}

#[test]
fn out_flag_writes_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let status = Command::new(env!("CARGO_BIN_EXE_bifindex"))
        .args(["jgroup", "12", "--out", out.to_str().unwrap()])
        .status()
        .unwrap();
    assert!(status.success());
    let j: Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(j["result"]["n"], 1008);
}
