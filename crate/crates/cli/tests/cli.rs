use std::path::PathBuf;
use std::process::{Command, Output};

use homaloidal::catalog;
use homaloidal::graphs::UGraph;
use homaloidal::mldeg::{homaloidal_degree, TrialConfig};
use homaloidal::models::chordal_phi;
use homaloidal::numeric::random_pd_seeded;
use homaloidal::poly::{parse, render_rational, VarTable};
use serde_json::Value;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_homaloidal")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("JSON on stdout")
}

fn file(name: &str, contents: &str) -> String {
    let p = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::write(&p, contents).unwrap();
    p.to_string_lossy().into_owned()
}

const PATH_PHI: &str = "s22/((s11*s22 - s12^2)*(s22*s33 - s23^2))";

#[test]
fn check_pde_path_holds() {
    let o = bin(&["check-pde", "--sym", "3", "--F", "det", "--phi", PATH_PHI]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["holds"], true);
    assert_eq!(json(&o)["residual"], "0");
}

#[test]
fn check_pde_four_cycle_fails() {
    let phi = catalog::four_cycle_phi();
    let text = render_rational(&phi, &VarTable::symmetric("s", 4));
    let o = bin(&["check-pde", "--sym", "4", "--F", "det", "--phi", &text]);
    assert_eq!(code(&o), 1);
    assert_eq!(json(&o)["holds"], false);
    assert_ne!(json(&o)["residual"], "0");
}

#[test]
fn check_pde_generic() {
    let o = bin(&["check-pde", "--F", "x1*x2*x3", "--phi", "1/(u1*u2*u3)"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let o = bin(&["check-pde", "--F", "x1*x2*x3", "--phi", "-1/(u1*u2*u3)"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn malformed_expression() {
    let o = bin(&["check-pde", "--sym", "3", "--F", "det", "--phi", "s11 +* s22"]);
    assert_eq!(code(&o), 2);
    assert!(o.stdout.is_empty());
}

#[test]
fn usage_errors() {
    assert_eq!(code(&bin(&["no-such-command"])), 2);
    assert_eq!(code(&bin(&["check-pde", "--F", "x1"])), 2);
}

#[test]
fn mle_path_matches_library() {
    let g = file("path.json", r#"{"m": 3, "edges": [[1, 2], [2, 3]]}"#);
    let o = bin(&["mle", "--graph", &g]);
    assert_eq!(code(&o), 0);
    let mf = chordal_phi(&UGraph::path(3)).unwrap();
    let js = json(&o);
    assert_eq!(js["phi"], render_rational(&mf.phi, &mf.dual_vars));
    assert_eq!(js["psi"].as_array().unwrap().len(), 6);
    assert_eq!(js["equations"], serde_json::json!(["k13"]));
    let printed = homaloidal::poly::parse_rational(js["phi"].as_str().unwrap(), &VarTable::symmetric("s", 3)).unwrap();
    let expected = homaloidal::poly::parse_rational(PATH_PHI, &VarTable::symmetric("s", 3)).unwrap();
    assert_eq!(printed, expected);
}

#[test]
fn mle_collider() {
    let g = file("collider.json", r#"{"m": 3, "edges": [[1, 3], [2, 3]]}"#);
    let o = bin(&["mle", "--graph", &g, "--directed"]);
    assert_eq!(code(&o), 0);
    let js = json(&o);
    assert_eq!(js["kind"], "dag");
    let printed = homaloidal::poly::parse_rational(js["phi"].as_str().unwrap(), &VarTable::symmetric("s", 3)).unwrap();
    assert_eq!(printed, catalog::collider_model().unwrap().phi);
}

#[test]
fn mle_four_cycle_is_not_chordal() {
    let g = file("c4.json", r#"{"m": 4, "edges": [[1, 2], [2, 3], [3, 4], [1, 4]]}"#);
    let o = bin(&["mle", "--graph", &g]);
    assert_eq!(code(&o), 1);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("induced cycle"), "{err}");
    for v in ["1", "2", "3", "4"] {
        assert!(err.contains(v));
    }
}

#[test]
fn homaloidal_degree_matches_library() {
    let o = bin(&["homaloidal-degree", "--F", "x1^2 + x2^2 + x3^2"]);
    assert_eq!(code(&o), 0);
    let f = parse("x1^2 + x2^2 + x3^2", &VarTable::indexed("x", 3)).unwrap();
    assert_eq!(json(&o), homaloidal_degree(&f, &TrialConfig::default()).unwrap().to_json());
}

#[test]
fn homaloidal_degree_cases() {
    for f in ["x1*x2*x3", "x1*(x1*x3 - x2^2)", "x1^2 + x2^2 + x3^2 + x4^2"] {
        let o = bin(&["homaloidal-degree", "--F", f]);
        assert_eq!(code(&o), 0, "{f}");
        assert_eq!(json(&o)["degree"], 1);
    }
    let o = bin(&["homaloidal-degree", "--F", "x1*x2*(x1 + x2)", "--n", "3"]);
    assert_eq!(code(&o), 1);
    assert_eq!(json(&o)["degree"], 0);
}

#[test]
fn homaloidal_degree_flags() {
    let o = bin(&["homaloidal-degree", "--F", "x1*x2*x3", "--primes", "1000003,1000033", "--trials", "2", "--seed", "7"]);
    assert_eq!(code(&o), 0);
    let js = json(&o);
    assert_eq!(js["primes"], serde_json::json!([1000003, 1000033]));
    assert_eq!(js["seeds"], serde_json::json!([7, 8]));
    assert_eq!(js["trials"].as_array().unwrap().len(), 4);
    assert_eq!(code(&bin(&["homaloidal-degree", "--F", "x1*x2", "--primes", "1000001"])), 2);
}

#[test]
fn ml_degree_cases() {
    let o = bin(&["ml-degree", "--h", "k11 - k22", "--m", "3"]);
    assert_eq!(code(&o), 0);
    let o = bin(&["ml-degree", "--h", "k13*k23 - k12*k33", "--m", "3"]);
    assert_eq!(code(&o), 0);
}

#[test]
fn ed_degree_cases() {
    let o = bin(&["ed-degree", "--basis", "[[1, 2, 3], [-2, 1, 5]]"]);
    assert_eq!(code(&o), 0);
    let o = bin(&["ed-degree", "--basis", r#"[["1", "i", 0], [0, 0, 1]]"#]);
    assert_eq!(code(&o), 1);
    assert_eq!(json(&o)["degree"], 0);
    assert_eq!(code(&bin(&["ed-degree", "--basis", "[[1, 2], [2, 4]]"])), 2);
}

fn rows_json(s: &homaloidal::numeric::NumSymMatrix) -> String {
    serde_json::to_string(&s.rows()).unwrap()
}

#[test]
fn estimate_path_identity() {
    let m = file("path_model.json", r#"{"m": 3, "edges": [[1, 2], [2, 3]]}"#);
    let c = file("identity.json", "[[1, 0, 0], [0, 1, 0], [0, 0, 1]]");
    let o = bin(&["estimate", "--model", &m, "--cov", &c, "--verify"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let js = json(&o);
    assert_eq!(js["k_hat"], serde_json::json!([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]));
    assert!(js["distance"].as_f64().unwrap() < 1e-7);
}

#[test]
fn estimate_collider_gradient() {
    let m = file("collider_model.json", r#"{"row": "collider"}"#);
    let c = file("collider_cov.json", &rows_json(&random_pd_seeded(3, 4)));
    let o = bin(&["estimate", "--model", &m, "--cov", &c]);
    assert_eq!(code(&o), 0);
    let js = json(&o);
    assert_eq!(js["pd"], true);
    assert!(js["gradient_norm"].as_f64().unwrap() < 1e-8);
}

#[test]
fn estimate_explicit_model_from_csv() {
    let m = file(
        "explicit.json",
        r#"{"m": 3, "F": "det", "phi": "s22/((s11*s22 - s12^2)*(s22*s33 - s23^2))", "equations": ["k13"]}"#,
    );
    let d = file("samples.csv", "1,0.5,0\n-1,0.2,1\n0.3,-1,0.4\n2,1,-1\n");
    let o = bin(&["estimate", "--model", &m, "--data", &d, "--verify"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let js = json(&o);
    assert!(js["k_hat"][0][2].as_f64().unwrap().abs() < 1e-12);
    assert!(js["distance"].as_f64().unwrap() < 1e-7);
}

#[test]
fn estimate_rank_deficient() {
    let m = file("complete.json", r#"{"m": 3, "edges": [[1, 2], [1, 3], [2, 3]]}"#);
    let d = file("two_samples.csv", "1,2,3\n0,1,1\n");
    let o = bin(&["estimate", "--model", &m, "--data", &d]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("det(S_123)"));
}

#[test]
fn examples_all_pass() {
    let o = bin(&["examples"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8_lossy(&o.stdout);
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), catalog::ROWS.len());
}

#[test]
fn examples_rows() {
    let o = bin(&["examples", "--row", "four-cycle", "--json"]);
    assert_eq!(code(&o), 0);
    let js = json(&o);
    assert_eq!(js[0]["passed"], true);
    assert_eq!(js[0]["pde_holds"], false);
    assert_eq!(code(&bin(&["examples", "--row", "no-such-row"])), 2);
}

#[test]
fn output_is_deterministic() {
    let args = ["homaloidal-degree", "--F", "x1*x2*x3", "--seed", "3"];
    assert_eq!(bin(&args).stdout, bin(&args).stdout);
    let g = file("det_path.json", r#"{"m": 3, "edges": [[1, 2], [2, 3]]}"#);
    assert_eq!(bin(&["mle", "--graph", &g]).stdout, bin(&["mle", "--graph", &g]).stdout);
}

#[test]
fn output_flag_writes_file() {
    let out = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("report.json");
    let o = bin(&["check-pde", "--sym", "3", "--F", "det", "--phi", PATH_PHI, "--output", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    let js: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(js["holds"], true);
}

#[test]
fn inline_json_arguments() {
    let o = bin(&["mle", "--graph", r#"{"m": 3, "edges": [[1, 3], [2, 3]], "directed": true}"#]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["kind"], "dag");
    let o = bin(&["estimate", "--model", r#"{"row": "path"}"#, "--cov", "[[1, 0, 0], [0, 1, 0], [0, 0, 1]]"]);
    assert_eq!(code(&o), 0);
    let o = bin(&["mle", "--graph", "{not json"]);
    assert_eq!(code(&o), 2);
}
