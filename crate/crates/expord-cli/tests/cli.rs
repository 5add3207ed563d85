//! End-to-end tests of the command-line front end.
//!
//! Oracles: hand-solved instances. The three-state revealing-with-noise vs
//! cyclic-elimination pair has a known boundary margin of 0 and a kernel
//! deviation of 1/6; the quadratic contracting instance with target 0.5 has
//! cheapest scheme (0, 0.5) at expected disutility 1/4; the single-type
//! screening instance prices its participation constraint at 1/2; ex ante
//! decision values and transform outputs are recomputed from first
//! principles in the assertions.

use std::fs;
use std::path::Path;

fn run_cli(args: &[&str]) -> (i32, String, String) {
    let args: Vec<String> = args.iter().map(|s| s.to_string()).collect();
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = expord_cli::run(&args, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).expect("stdout is UTF-8"),
        String::from_utf8(err).expect("stderr is UTF-8"),
    )
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).expect("fixture write succeeds");
    p.to_str().expect("path is UTF-8").to_string()
}

fn json_line(s: &str) -> serde_json::Value {
    serde_json::from_str(s.trim()).expect("stdout is one JSON document")
}

fn as_f64(v: &serde_json::Value) -> f64 {
    v.as_f64().expect("numeric field")
}

/// Three states, signals i revealed with probability 1/2, common signal
/// otherwise.
const F_HALF: &str = r#"{"matrix": [[0.5,0,0,0.5],[0,0.5,0,0.5],[0,0,0.5,0.5]]}"#;
/// Three states, zero diagonal, 1/2 off it: eliminates the true state.
const G_CYCLE: &str = r#"{"matrix": [[0,0.5,0.5],[0.5,0,0.5],[0.5,0.5,0]]}"#;
const IDENT2: &str = r#"{"matrix": [[1,0],[0,1]]}"#;
const FLAT2: &str = r#"{"matrix": [[0.5,0.5],[0.5,0.5]]}"#;

#[test]
fn compare_lb_accepts_the_boundary_pair() {
    let dir = tempfile::tempdir().expect("tempdir");
    let a = write(dir.path(), "a.json", F_HALF);
    let b = write(dir.path(), "b.json", G_CYCLE);
    let (code, out, _err) = run_cli(&["compare", "--order", "lb", &a, &b]);
    assert_eq!(code, 0);
    let v = json_line(&out);
    assert_eq!(v["holds"], serde_json::Value::Bool(true));
    assert_eq!(v["method"], "exact-rays");
    // the pair sits exactly on the order's boundary
    assert!(as_f64(&v["margin"]).abs() <= 1e-9);
}

#[test]
fn compare_blackwell_rejects_the_boundary_pair() {
    let dir = tempfile::tempdir().expect("tempdir");
    let a = write(dir.path(), "a.json", F_HALF);
    let b = write(dir.path(), "b.json", G_CYCLE);
    let (code, out, _err) = run_cli(&["compare", "--order", "blackwell", &a, &b]);
    assert_eq!(code, 1);
    let v = json_line(&out);
    assert_eq!(v["holds"], serde_json::Value::Bool(false));
    assert_eq!(v["method"], "garbling-lp");
    // best kernel misses by 1/6 per entry
    assert!((as_f64(&v["margin"]) + 1.0 / 6.0).abs() <= 1e-6);
}

#[test]
fn compare_mpe_accepts_the_boundary_pair() {
    let dir = tempfile::tempdir().expect("tempdir");
    let a = write(dir.path(), "a.json", F_HALF);
    let b = write(dir.path(), "b.json", G_CYCLE);
    let (code, out, _err) = run_cli(&["compare", "--order", "mpe", &a, &b]);
    assert_eq!(code, 0);
    assert_eq!(json_line(&out)["holds"], serde_json::Value::Bool(true));
}

#[test]
fn compare_equiv_detects_signal_relabeling() {
    let dir = tempfile::tempdir().expect("tempdir");
    let a = write(dir.path(), "a.json", r#"{"matrix": [[0.7,0.3],[0.2,0.8]]}"#);
    let b = write(dir.path(), "b.json", r#"{"matrix": [[0.3,0.7],[0.8,0.2]]}"#);
    let (code, out, _err) = run_cli(&["compare", "--order", "equiv", &a, &b]);
    assert_eq!(code, 0);
    let v = json_line(&out);
    assert_eq!(v["holds"], serde_json::Value::Bool(true));
    assert_eq!(v["method"], "equiv");
}

#[test]
fn compare_equiv_fails_with_a_witness_when_one_side_loses() {
    let dir = tempfile::tempdir().expect("tempdir");
    let a = write(dir.path(), "a.json", IDENT2);
    let b = write(dir.path(), "b.json", FLAT2);
    let (code, out, _err) = run_cli(&["compare", "--order", "equiv", &a, &b]);
    assert_eq!(code, 1);
    let v = json_line(&out);
    assert_eq!(v["holds"], serde_json::Value::Bool(false));
    assert!(v["witness"].is_array(), "failing side supplies a witness");
    assert!(as_f64(&v["margin"]) < -1e-6);
}

#[test]
fn compare_exit_one_carries_a_recheckable_witness() {
    let dir = tempfile::tempdir().expect("tempdir");
    let a = write(dir.path(), "a.json", FLAT2);
    let b = write(dir.path(), "b.json", IDENT2);
    let (code, out, _err) = run_cli(&["compare", "--order", "lb", &a, &b]);
    assert_eq!(code, 1);
    let v = json_line(&out);
    let w: Vec<f64> = v["witness"]
        .as_array()
        .expect("witness present")
        .iter()
        .map(as_f64)
        .collect();
    // recompute the margin at the witness: flat columns contribute
    // (sum w)/2 each, identity columns w_i single-handedly
    let flat: f64 = 2.0 * (w.iter().sum::<f64>() / 2.0).max(0.0);
    let ident: f64 = w.iter().map(|x| x.max(0.0)).sum();
    assert!((flat - ident - as_f64(&v["margin"])).abs() <= 1e-9);
}

#[test]
fn compare_sampled_is_deterministic_per_seed() {
    let dir = tempfile::tempdir().expect("tempdir");
    let a = write(dir.path(), "a.json", F_HALF);
    let b = write(dir.path(), "b.json", G_CYCLE);
    let args = ["compare", "--order", "lb-sampled", "--seed", "5", &a, &b];
    let (code1, out1, _) = run_cli(&args);
    let (code2, out2, _) = run_cli(&args);
    assert_eq!(code1, 0);
    assert_eq!(code1, code2);
    assert_eq!(out1, out2, "same seed, same bytes");
    let (code3, out3, _) = run_cli(&["compare", "--order", "lb-sampled", "--seed", "12", &a, &b]);
    assert_eq!(code3, 0, "sampling never falsifies a true dominance");
    assert_eq!(json_line(&out3)["holds"], serde_json::Value::Bool(true));
}

#[test]
fn compare_errors_exit_two_and_name_the_problem() {
    let dir = tempfile::tempdir().expect("tempdir");
    let good = write(dir.path(), "good.json", IDENT2);
    let missing = dir.path().join("missing.json");
    let missing = missing.to_str().expect("path");

    let (code, _out, err) = run_cli(&["compare", missing, &good]);
    assert_eq!(code, 2);
    assert!(err.contains("missing.json"), "stderr names the file: {err}");

    let empty = write(dir.path(), "empty.json", r#"{"signals": ["a","b"]}"#);
    let (code, _out, err) = run_cli(&["compare", &empty, &good]);
    assert_eq!(code, 2);
    assert!(err.contains("matrix"), "stderr names the field: {err}");

    let (code, _out, err) = run_cli(&["compare", "--order", "bogus", &good, &good]);
    assert_eq!(code, 2);
    assert!(err.contains("--order"), "stderr names the flag: {err}");

    let typo = write(dir.path(), "typo.json", r#"{"matrox": [[1,0],[0,1]]}"#);
    let (code, _out, err) = run_cli(&["compare", &typo, &good]);
    assert_eq!(code, 2);
    assert!(err.contains("matrox"), "unknown fields are rejected: {err}");
}

#[test]
fn zonoid_samples_match_direct_support_recomputation() {
    let dir = tempfile::tempdir().expect("tempdir");
    let a = write(dir.path(), "a.json", IDENT2);
    let args = ["zonoid", "--directions", "16", "--seed", "3", &a];
    let (code, out, _err) = run_cli(&args);
    assert_eq!(code, 0);
    let samples = json_line(&out)["samples"]
        .as_array()
        .expect("samples array")
        .clone();
    assert_eq!(samples.len(), 16);
    for s in &samples {
        let b: Vec<f64> = s["direction"]
            .as_array()
            .expect("direction")
            .iter()
            .map(as_f64)
            .collect();
        let norm: f64 = b.iter().map(|x| x * x).sum::<f64>();
        assert!((norm - 1.0).abs() <= 1e-9, "directions are unit vectors");
        let first = b.iter().find(|x| **x != 0.0).expect("nonzero direction");
        assert!(*first > 0.0, "one representative per antipodal pair");
        // identity columns are coordinate vectors, so the support is the
        // sum of positive parts
        let expect: f64 = b.iter().map(|x| x.max(0.0)).sum();
        assert!((as_f64(&s["support"]) - expect).abs() <= 1e-9);
    }
    let (_, out2, _) = run_cli(&args);
    assert_eq!(out, out2, "seeded sampling is reproducible");
}

#[test]
fn value_matches_hand_computed_posteriors() {
    let dir = tempfile::tempdir().expect("tempdir");
    let dp = write(dir.path(), "dp.json", r#"{"payoff": [[1,0],[0,1]]}"#);
    let ident = write(dir.path(), "ident.json", IDENT2);
    let blind = write(dir.path(), "blind.json", r#"{"matrix": [[1],[1]]}"#);

    // perfect information earns the top payoff in every state
    let (code, out, _) = run_cli(&["value", &dp, &ident]);
    assert_eq!(code, 0);
    assert!((as_f64(&json_line(&out)["value"]) - 1.0).abs() <= 1e-12);

    // no information: act on the prior alone
    let (code, out, _) = run_cli(&["value", &dp, &blind]);
    assert_eq!(code, 0);
    assert!((as_f64(&json_line(&out)["value"]) - 0.5).abs() <= 1e-12);

    let (code, out, _) = run_cli(&["value", &dp, &blind, "--prior", "0.25,0.75"]);
    assert_eq!(code, 0);
    assert!((as_f64(&json_line(&out)["value"]) - 0.75).abs() <= 1e-12);
}

#[test]
fn value_rejects_bad_priors() {
    let dir = tempfile::tempdir().expect("tempdir");
    let dp = write(dir.path(), "dp.json", r#"{"payoff": [[1,0],[0,1]]}"#);
    let ident = write(dir.path(), "ident.json", IDENT2);

    let (code, _out, err) = run_cli(&["value", &dp, &ident, "--prior", "0.2,0.2"]);
    assert_eq!(code, 2);
    assert!(err.contains("--prior"), "stderr names the flag: {err}");

    let (code, _out, err) = run_cli(&["value", &dp, &ident, "--prior", "0.2,0.3,0.5"]);
    assert_eq!(code, 2);
    assert!(err.contains("--prior"), "stderr names the flag: {err}");
}

#[test]
fn qcc_flags_a_dipping_middle_action() {
    let dir = tempfile::tempdir().expect("tempdir");
    let dp = write(dir.path(), "dip.json", r#"{"payoff": [[1,0],[0,0],[0,1]]}"#);
    let (code, out, _) = run_cli(&["qcc", &dp]);
    assert_eq!(code, 0);
    let v = json_line(&out);
    assert_eq!(v["qcc"], serde_json::Value::Bool(false));
    assert_eq!(v["violation"]["triple"], serde_json::json!([0, 1, 2]));
    assert!(v["lsc"].is_boolean());

    let dp = write(dir.path(), "flat.json", r#"{"payoff": [[1,0],[0.6,0.6],[0,1]]}"#);
    let (code, out, _) = run_cli(&["qcc", &dp]);
    assert_eq!(code, 0);
    let v = json_line(&out);
    assert_eq!(v["qcc"], serde_json::Value::Bool(true));
    assert!(v["violation"].is_null());
}

const MH_ENV: &str = r#"{
    "u_bounds": [0, 1],
    "cost": {"Q": [[1.0]], "l": [0.0], "c0": 0.0},
    "gamma": {"breakpoints": [0, 1], "values": [0, 1]}
}"#;

#[test]
fn mh_reports_the_hand_solved_contract() {
    let dir = tempfile::tempdir().expect("tempdir");
    let env = write(dir.path(), "env.json", MH_ENV);
    let ident = write(dir.path(), "ident.json", IDENT2);
    let (code, out, _) = run_cli(&["mh", &env, &ident, "--target", "0.5"]);
    assert_eq!(code, 0);
    let v = json_line(&out);
    assert_eq!(v["implementable"], serde_json::Value::Bool(true));
    // quadratic effort cost, marginal cost 1/2 at the target, so the
    // cheapest scheme pays 1/2 on the high signal only
    assert!((as_f64(&v["disutility"]) - 0.25).abs() <= 1e-8);
    let w: Vec<f64> = v["scheme"]
        .as_array()
        .expect("scheme")
        .iter()
        .map(as_f64)
        .collect();
    assert!((w[0] - 0.0).abs() <= 1e-8);
    assert!((w[1] - 0.5).abs() <= 1e-8);
    assert!((as_f64(&v["dual"]["value"]) - 0.25).abs() <= 1e-6);
}

#[test]
fn mh_unimplementable_reports_nulls_and_exits_zero() {
    let dir = tempfile::tempdir().expect("tempdir");
    let env = write(
        dir.path(),
        "tight.json",
        r#"{
            "u_bounds": [0, 0.1],
            "cost": {"Q": [[1.0]], "l": [0.0], "c0": 0.0},
            "gamma": {"breakpoints": [0, 0.1], "values": [0, 0.1]}
        }"#,
    );
    let ident = write(dir.path(), "ident.json", IDENT2);
    let (code, out, _) = run_cli(&["mh", &env, &ident, "--target", "0.5"]);
    assert_eq!(code, 0, "infeasibility is an answer, not an error");
    let v = json_line(&out);
    assert_eq!(v["implementable"], serde_json::Value::Bool(false));
    assert!(v["disutility"].is_null());
    assert!(v["scheme"].is_null());
    assert!(v["dual"]["value"].is_null(), "diverging bound prints null");
}

#[test]
fn mh_errors_name_the_bad_input() {
    let dir = tempfile::tempdir().expect("tempdir");
    let ident = write(dir.path(), "ident.json", IDENT2);
    let noc0 = write(
        dir.path(),
        "noc0.json",
        r#"{"u_bounds": [0,1], "cost": {"Q": [[1.0]], "l": [0.0]},
            "gamma": {"breakpoints": [0,1], "values": [0,1]}}"#,
    );
    let (code, _out, err) = run_cli(&["mh", &noc0, &ident, "--target", "0.5"]);
    assert_eq!(code, 2);
    assert!(err.contains("c0"), "stderr names the field: {err}");

    let env = write(dir.path(), "env.json", MH_ENV);
    let (code, _out, err) = run_cli(&["mh", &env, &ident, "--target", "0.5,oops"]);
    assert_eq!(code, 2);
    assert!(err.contains("--target"), "stderr names the flag: {err}");
}

const SCREEN_ENV: &str = r#"{
    "types": [[1, 0]],
    "type_probs": [1.0],
    "psi": [1.0, 1.0],
    "v1": [[0, 0], [1, 1]],
    "v2": {"breakpoints": [0, 1], "values": [0, 1]},
    "u1": [[0, 0], [-0.5, -0.5]],
    "m_bounds": [0, 2]
}"#;

#[test]
fn screen_reports_the_hand_solved_mechanism() {
    let dir = tempfile::tempdir().expect("tempdir");
    let env = write(dir.path(), "env.json", SCREEN_ENV);
    let ident = write(dir.path(), "ident.json", IDENT2);
    let (code, out, _) = run_cli(&["screen", &env, &ident]);
    assert_eq!(code, 0);
    let v = json_line(&out);
    assert_eq!(v["feasible"], serde_json::Value::Bool(true));
    // the productive alternative pays 1 and costs the 0.5 participation
    // transfer, beating the free idle alternative's 0
    assert!((as_f64(&v["value"]) - 0.5).abs() <= 1e-8);
    assert_eq!(v["rule"], serde_json::json!([1]));
    assert!((as_f64(&v["transfers"][0][1][0]) - 0.5).abs() <= 1e-8);
}

#[test]
fn screen_infeasibility_reports_gracefully() {
    let dir = tempfile::tempdir().expect("tempdir");
    let env = write(
        dir.path(),
        "hopeless.json",
        r#"{
            "types": [[1, 0]],
            "type_probs": [1.0],
            "psi": [1.0, 1.0],
            "v1": [[0, 0], [1, 1]],
            "v2": {"breakpoints": [0, 1], "values": [0, 1]},
            "u1": [[-5, -5], [-5, -5]],
            "m_bounds": [0, 1]
        }"#,
    );
    let ident = write(dir.path(), "ident.json", IDENT2);
    let (code, out, _) = run_cli(&["screen", &env, &ident]);
    assert_eq!(code, 0, "infeasibility is an answer, not an error");
    let v = json_line(&out);
    assert_eq!(v["feasible"], serde_json::Value::Bool(false));
    assert!(v["value"].is_null());
    assert!(v["rule"].is_null());
}

#[test]
fn screen_errors_name_the_missing_field() {
    let dir = tempfile::tempdir().expect("tempdir");
    let ident = write(dir.path(), "ident.json", IDENT2);
    let nopsi = write(
        dir.path(),
        "nopsi.json",
        r#"{"types": [[1,0]], "type_probs": [1.0], "v1": [[0,0]],
            "v2": {"breakpoints":[0],"values":[0]}, "u1": [[0,0]], "m_bounds": [0,1]}"#,
    );
    let (code, _out, err) = run_cli(&["screen", &nopsi, &ident]);
    assert_eq!(code, 2);
    assert!(err.contains("psi"), "stderr names the field: {err}");
}

fn read_matrix(path: &str) -> (Vec<String>, Vec<String>, Vec<Vec<f64>>) {
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(path).expect("output file exists"))
            .expect("output file is JSON");
    let strings = |key: &str| -> Vec<String> {
        v[key].as_array()
            .expect("label array")
            .iter()
            .map(|s| s.as_str().expect("label").to_string())
            .collect()
    };
    let matrix = v["matrix"]
        .as_array()
        .expect("matrix")
        .iter()
        .map(|row| row.as_array().expect("row").iter().map(as_f64).collect())
        .collect();
    (strings("states"), strings("signals"), matrix)
}

fn assert_matrix_close(actual: &[Vec<f64>], expected: &[Vec<f64>]) {
    assert_eq!(actual.len(), expected.len());
    for (a, e) in actual.iter().zip(expected) {
        assert_eq!(a.len(), e.len());
        for (x, y) in a.iter().zip(e) {
            assert!((x - y).abs() <= 1e-12, "matrix entry {x} vs {y}");
        }
    }
}

#[test]
fn transform_garble_writes_the_pushed_forward_matrix() {
    let dir = tempfile::tempdir().expect("tempdir");
    let a = write(dir.path(), "a.json", IDENT2);
    let k = write(dir.path(), "k.json", r#"{"kernel": [[0.5,0.5],[0.5,0.5]]}"#);
    let out_path = dir.path().join("out.json");
    let out_path = out_path.to_str().expect("path");
    let (code, out, _) = run_cli(&["transform", "--garble", &k, &a, "--out", out_path]);
    assert_eq!(code, 0);
    assert_eq!(json_line(&out)["states"], serde_json::json!(2));
    let (_, _, m) = read_matrix(out_path);
    assert_matrix_close(&m, &[vec![0.5, 0.5], vec![0.5, 0.5]]);

    // the original dominates its garbling, never the reverse
    let (code, _, _) = run_cli(&["compare", "--order", "lb", &a, out_path]);
    assert_eq!(code, 0);
    let (code, _, _) = run_cli(&["compare", "--order", "lb", out_path, &a]);
    assert_eq!(code, 1);
}

#[test]
fn transform_product_pairs_the_signals() {
    let dir = tempfile::tempdir().expect("tempdir");
    let a = write(dir.path(), "a.json", IDENT2);
    let b = write(dir.path(), "b.json", FLAT2);
    let out_path = dir.path().join("out.json");
    let out_path = out_path.to_str().expect("path");
    let (code, _, _) = run_cli(&["transform", "--product", &a, &b, "--out", out_path]);
    assert_eq!(code, 0);
    let (_, signals, m) = read_matrix(out_path);
    assert_eq!(signals.len(), 4);
    assert_matrix_close(
        &m,
        &[vec![0.5, 0.5, 0.0, 0.0], vec![0.0, 0.0, 0.5, 0.5]],
    );
}

#[test]
fn transform_mix_blends_the_signal_sets() {
    let dir = tempfile::tempdir().expect("tempdir");
    let a = write(dir.path(), "a.json", IDENT2);
    let b = write(dir.path(), "b.json", FLAT2);
    let out_path = dir.path().join("out.json");
    let out_path = out_path.to_str().expect("path");
    let (code, _, _) = run_cli(&["transform", "--mix", "0.3", &a, &b, "--out", out_path]);
    assert_eq!(code, 0);
    let (_, signals, m) = read_matrix(out_path);
    assert_eq!(signals.len(), 4);
    assert_matrix_close(
        &m,
        &[vec![0.3, 0.0, 0.35, 0.35], vec![0.0, 0.3, 0.35, 0.35]],
    );
}

#[test]
fn transform_dichotomy_collapses_to_two_weighted_events() {
    let dir = tempfile::tempdir().expect("tempdir");
    let a = write(dir.path(), "a.json", F_HALF);
    let d = write(
        dir.path(),
        "d.json",
        r#"{"omega0": [0], "omega1": [1,2], "w0": [1.0], "w1": [0.5,0.5]}"#,
    );
    let out_path = dir.path().join("out.json");
    let out_path = out_path.to_str().expect("path");
    let (code, _, _) = run_cli(&["transform", "--dichotomy", &d, &a, "--out", out_path]);
    assert_eq!(code, 0);
    let (states, _, m) = read_matrix(out_path);
    assert_eq!(states.len(), 2);
    assert_matrix_close(
        &m,
        &[vec![0.5, 0.0, 0.0, 0.5], vec![0.0, 0.25, 0.25, 0.5]],
    );

    // round trip: the written file loads back into every verb
    let (code, out, _) = run_cli(&["compare", "--order", "equiv", out_path, out_path]);
    assert_eq!(code, 0);
    assert_eq!(json_line(&out)["holds"], serde_json::Value::Bool(true));
}

#[test]
fn transform_modes_are_exclusive_and_arity_checked() {
    let dir = tempfile::tempdir().expect("tempdir");
    let a = write(dir.path(), "a.json", IDENT2);
    let b = write(dir.path(), "b.json", FLAT2);
    let out_path = dir.path().join("out.json");
    let out_path = out_path.to_str().expect("path");

    let (code, _, _) = run_cli(&["transform", &a, &b, "--out", out_path]);
    assert_eq!(code, 2, "a mode flag is required");

    let (code, _, _) = run_cli(&[
        "transform", "--product", "--mix", "0.3", &a, &b, "--out", out_path,
    ]);
    assert_eq!(code, 2, "modes are mutually exclusive");

    let (code, _, err) = run_cli(&["transform", "--product", &a, "--out", out_path]);
    assert_eq!(code, 2, "product needs two inputs");
    assert!(err.contains("2"), "stderr states the arity: {err}");
}

#[test]
fn grid_experiments_load_and_compare() {
    let dir = tempfile::tempdir().expect("tempdir");
    // trapezoid weights (1/2, 1, 1/2) make both rows integrate to 1
    let g = write(
        dir.path(),
        "grid.json",
        r#"{"grid": [0,1,2], "densities": [[0.5,0.5,0.5],[0.25,0.5,0.75]]}"#,
    );
    let ident = write(dir.path(), "ident.json", IDENT2);
    let (code, out, _) = run_cli(&["compare", "--order", "lb", &ident, &g]);
    assert_eq!(code, 0, "full revelation dominates any experiment");
    assert_eq!(json_line(&out)["holds"], serde_json::Value::Bool(true));

    let broken = write(dir.path(), "broken.json", r#"{"grid": [0,1,2]}"#);
    let (code, _, err) = run_cli(&["compare", &broken, &ident]);
    assert_eq!(code, 2);
    assert!(err.contains("densities"), "stderr names the field: {err}");
}

#[test]
fn help_and_version_exit_zero() {
    let (code, out, _) = run_cli(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("compare"));
    let (code, _, _) = run_cli(&["--version"]);
    assert_eq!(code, 0);
    let (code, _, _) = run_cli(&[]);
    assert_eq!(code, 2, "a verb is required");
}

#[test]
fn blackwell_tolerance_flag_widens_acceptance() {
    let dir = tempfile::tempdir().expect("tempdir");
    let a = write(dir.path(), "a.json", F_HALF);
    let b = write(dir.path(), "b.json", G_CYCLE);
    // deviation is 1/6, so a 0.2 tolerance flips the verdict
    let (code, out, _) = run_cli(&["compare", "--order", "blackwell", "--tol", "0.2", &a, &b]);
    assert_eq!(code, 0);
    assert_eq!(json_line(&out)["holds"], serde_json::Value::Bool(true));
    let (code, _, _) = run_cli(&["compare", "--order", "blackwell", &a, &b]);
    assert_eq!(code, 1);
}
