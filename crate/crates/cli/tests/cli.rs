use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shearflow")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn verify_identity_cor_al() {
    let o = run(&["verify-identity", "cor-al", "--f1", "x2", "--f2", "x1", "-n", "2"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "established\n");
}

#[test]
fn verify_identity_precondition_is_an_error() {
    let o = run(&["verify-identity", "cor-al", "--f1", "x1", "--f2", "x1", "-n", "2"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("f1 depends on x1"));
}

#[test]
fn verify_identity_from_operand_file() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "ops.json", r#"{"n": 3, "f1": "x2*x3", "h1": "x2", "f2": "x1 + x3^2", "h2": "x1"}"#);
    let o = run(&["verify-identity", "codim2", "--file", &f]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let f = write(dir.path(), "local.json", r#"{"n": 3, "r": "x2^2 + x3", "h": "x3 + 1", "s": 2, "f": "x2", "g": "3*x2*x3"}"#);
    let o = run(&["verify-identity", "local", "--file", &f]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().count(), 4);
    let o = run(&["verify-identity", "compat", "--d1", "[1;0]", "--d2", "[0;1]", "--a", "x1", "--f1", "x2", "--f2", "x1^2"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

#[test]
fn verify_identity_missing_operand() {
    let o = run(&["verify-identity", "cor-al", "--f1", "x2", "-n", "2"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("--f2"));
}

#[test]
fn compat_exit_codes() {
    let o = run(&["compat", "--d1", "[1;0]", "--d2", "[0;1]", "-d", "4"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["condition_i"]["status"], "full_span_up_to_degree");
    assert_eq!(v["condition_i"]["degree"], 4);
    assert_eq!(v["condition_ii"]["a"], "x1");
    assert_eq!(v["schema_version"], 1);
    let o = run(&["compat", "--d1", "[1;0]", "--d2", "[1;0]", "-d", "3"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn closure_shear_family() {
    let o = run(&["closure", "--shear-family", "2", "-D", "2"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["span_dimension"], 12);
}

#[test]
fn closure_files_and_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "gens.txt", "# translations\n[1; 0]\n\n[0; 1]\n");
    let t = write(dir.path(), "targets.txt", "[2; 3]\n");
    let o = run(&["closure", "--generators", &g, "--targets", &t, "-D", "1"]);
    assert_eq!(code(&o), 0);
    let t = write(dir.path(), "miss.txt", "[x1; 0]\n");
    let o = run(&["closure", "--generators", &g, "--targets", &t, "-D", "1"]);
    assert_eq!(code(&o), 1);
    let bad = write(dir.path(), "bad.txt", "[1; 0]\n[x1 + ; 0]\n");
    let o = run(&["closure", "--generators", &bad, "-D", "1"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("bad.txt:2:"), "{}", stderr(&o));
}

#[test]
fn codim2_line_in_three_space() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "line.json", r#"{"nvars": 3, "generators": ["x1", "x2"]}"#);
    let o = run(&["codim2", "--ideal", &f, "-d", "2"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["h"], serde_json::json!(["x2", "x1"]));
    let f = write(dir.path(), "plane.json", r#"{"nvars": 2, "generators": ["x1"]}"#);
    assert_eq!(code(&run(&["codim2", "--ideal", &f, "-d", "2"])), 2);
    let f = write(dir.path(), "broken.json", "{\"nvars\": 3,\n \"generators\": [\"x1\",\n");
    let o = run(&["codim2", "--ideal", &f, "-d", "2"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("broken.json") && stderr(&o).contains("line 3"), "{}", stderr(&o));
}

#[test]
fn sl_demo_is_seed_reproducible() {
    let a = run(&["sl-demo", "-n", "2", "--trials", "10", "--seed", "7"]);
    let b = run(&["sl-demo", "-n", "2", "--trials", "10", "--seed", "7"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let c = run(&["sl-demo", "-n", "2", "--trials", "10", "--seed", "8"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn decompose_listing() {
    let o = run(&["decompose", "[x2^2; x1*x2]"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert!(out.starts_with("1: shear (x2^2)*d1\n2: bracket"));
    assert!(out.ends_with("sum of targets equals input: true\n"));
    let o = run(&["decompose", "[x1]"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn approx_reports_convergence() {
    let o = run(&["approx", "--field", "[0; x2^2]", "-T", "0.5", "--substeps", "4,8,16", "--points", "5"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["report"]["monotone"], true);
    assert_eq!(v["report"]["errors"].as_array().unwrap().len(), 3);
    assert_eq!(v["finest"]["overshears"], 64);
    let o = run(&["approx", "--field", "[0; x2^2]", "--substeps", "4,8"]);
    assert_eq!(code(&o), 2);
    let o = run(&["approx", "--field", "[0; x2^2]", "-T", "-1"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn approx_isotopy_file() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "vt.txt", "[0; 1]\n[x2; 0]\n");
    let o = run(&["approx", "--isotopy", &f, "-T", "0.5", "--steps", "2", "--substeps", "2,4,8", "--points", "4"]);
    assert!(code(&o) <= 1, "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["steps"], 2);
}

#[test]
fn basin_outputs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let grid = write(
        dir.path(),
        "grid.json",
        r#"{"origin": [[0,0],[0,0]], "u": [[1,0],[0,0]], "v": [[0,0],[1,0]],
            "a_range": [-2, 2], "b_range": [-2, 2], "rows": 40, "cols": 40}"#,
    );
    let pgm1 = dir.path().join("a.pgm");
    let pgm2 = dir.path().join("b.pgm");
    let a = run(&["basin", "--grid", &grid, "--pgm", pgm1.to_str().unwrap()]);
    let b = run(&["basin", "--grid", &grid, "--pgm", pgm2.to_str().unwrap()]);
    assert_eq!(code(&a), 0, "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(fs::read(&pgm1).unwrap(), fs::read(&pgm2).unwrap());
    let csv = stdout(&a);
    assert_eq!(csv.lines().count(), 1 + 40 * 40);
    assert!(csv.contains(",attracted,") && csv.contains(",escaped,"));
    assert!(fs::read(&pgm1).unwrap().starts_with(b"P5\n40 40\n255\n"));
}

#[test]
fn basin_rejects_non_fixed_point() {
    let o = run(&["basin", "--fixed", "1,0", "-o", "/dev/null"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("not fixed"));
}

#[test]
fn basin_map_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let map = write(
        dir.path(),
        "map.json",
        r#"{"nvars": 2, "factors": [
            {"kind": "scaling", "weights": [1, 1], "lambda": "1/3"},
            {"kind": "shear", "direction": 2, "coeff": "x1^2", "time": "1"}]}"#,
    );
    let grid = write(
        dir.path(),
        "grid.json",
        r#"{"origin": [[0,0],[0,0]], "u": [[1,0],[0,0]], "v": [[0,0],[1,0]],
            "a_range": [-1, 1], "b_range": [-1, 1], "rows": 5, "cols": 5}"#,
    );
    let o = run(&["basin", "--map", &map, "--grid", &grid]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let bad = write(dir.path(), "bad.json", r#"{"nvars": 2, "factors": [{"kind": "shear", "direction": 2, "coeff": "x2", "time": "1"}]}"#);
    let o = run(&["basin", "--map", &bad, "--grid", &grid]);
    assert_eq!(code(&o), 2);
}

#[test]
fn usage_errors() {
    assert_eq!(code(&run(&[])), 2);
    assert_eq!(code(&run(&["compat", "--d1", "[1;0]", "--d2", "[0;1]", "-d", "0"])), 2);
    assert_eq!(code(&run(&["sl-demo", "-n", "1"])), 2);
    let o = run(&["compat", "--d1", "[1;0", "--d2", "[0;1]", "-d", "2"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("--d1"));
}

#[test]
fn output_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("v.json");
    let o = run(&["compat", "--d1", "[1;0]", "--d2", "[0;1]", "-d", "2", "-o", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    let direct = run(&["compat", "--d1", "[1;0]", "--d2", "[0;1]", "-d", "2"]);
    assert_eq!(fs::read(&out).unwrap(), direct.stdout);
}
