use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn cpack(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cpack"))
        .args(args)
        .output()
        .expect("cpack runs")
}

fn cpack_stdin(args: &[&str], stdin: &[u8]) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_cpack"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("cpack runs");
    child.stdin.take().unwrap().write_all(stdin).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// The single JSON report line on stderr.
fn report(o: &Output) -> Value {
    let err = String::from_utf8_lossy(&o.stderr);
    let lines: Vec<&str> = err.lines().filter(|l| l.starts_with("{\"command\"")).collect();
    assert_eq!(lines.len(), 1, "stderr: {err}");
    serde_json::from_str(lines[0]).unwrap()
}

fn assert_outcome(o: &Output, outcome: &str, code: i32) -> Value {
    let r = report(o);
    assert_eq!(r["outcome"], outcome, "{r}\nstdout: {}", stdout(o));
    assert_eq!(o.status.code(), Some(code), "{r}");
    r
}

fn first_number(o: &Output) -> f64 {
    stdout(o).lines().next().unwrap().trim().parse().unwrap()
}

#[test]
fn angles_eval_examples() {
    let o = cpack(&["angles", "eval", "--c", "0", "--a", "1", "--b", "1", "--rho", "0.41421356,1"]);
    assert_outcome(&o, "info", 0);
    assert!((first_number(&o) - std::f64::consts::FRAC_PI_2).abs() < 1e-7);
    let o = cpack(&["angles", "eval", "--c", "0", "--a", "0", "--b", "0", "--rho", "1"]);
    assert!((first_number(&o) - std::f64::consts::FRAC_PI_3).abs() < 1e-14);
}

#[test]
fn angles_grad_checks_finite_differences() {
    let o = cpack(&["angles", "grad", "--c", "2", "--a", "0", "--b", "1", "--rho", "0.3,0.6,1", "--check-fd"]);
    let r = assert_outcome(&o, "pass", 0);
    assert!(r["metrics"]["max_relative_error"].as_f64().unwrap() < 1e-5);
    assert_eq!(r["metrics"]["gradient"].as_array().unwrap().len(), 3);
    let o = cpack(&["angles", "grad", "--c", "2", "--a", "0", "--b", "1", "--rho", "0.3,0.6,1"]);
    assert_outcome(&o, "info", 0);
    assert_eq!(stdout(&o).lines().count(), 3);
}

#[test]
fn bad_arguments_are_usage_errors() {
    assert_outcome(&cpack(&["angles", "eval", "--c", "0"]), "error", 2);
    assert_outcome(&cpack(&["angles", "eval", "--c", "0", "--a", "0", "--b", "3", "--rho", "1,2"]), "error", 2);
    assert_outcome(&cpack(&["angles", "eval", "--c", "0", "--a", "0", "--b", "0", "--rho", "x"]), "error", 2);
    assert_outcome(&cpack(&["frobnicate"]), "error", 2);
    assert_outcome(&cpack(&["--help"]), "info", 0);
}

#[test]
fn codes_check_fundamental_on_fixtures() {
    let o = cpack(&["codes", "check-fundamental", "fig4"]);
    let r = assert_outcome(&o, "pass", 0);
    assert_eq!(r["metrics"]["set_aside"], 1);
    let o = cpack(&["codes", "check-fundamental", "fig4-mutated"]);
    assert_outcome(&o, "fail", 1);
    assert!(stdout(&o).contains("K = {2,3}"), "{}", stdout(&o));
}

#[test]
fn codes_down_to_two_sizes() {
    let o = cpack(&["codes", "down", "--k", "2", "fig4.codes"]);
    assert_outcome(&o, "info", 0);
    assert!(stdout(&o).lines().any(|l| l == "{0:11111}"), "{}", stdout(&o));
}

#[test]
fn codes_from_files_and_stdin() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("square.codes");
    std::fs::write(&path, "dim=2 n=2\n0:1111\n").unwrap();
    assert_outcome(&cpack(&["codes", "check-fundamental", path.to_str().unwrap()]), "pass", 0);
    assert_outcome(&cpack_stdin(&["codes", "check-fundamental", "-"], b"0:111\n"), "pass", 0);
    let o = cpack_stdin(&["codes", "check-fundamental", "-"], b"0:4x1\n");
    let r = assert_outcome(&o, "error", 2);
    assert!(r["error"].as_str().unwrap().contains("line 1"), "{r}");
}

#[test]
fn packing_verify_and_codes_on_the_square_lattice() {
    assert_outcome(&cpack(&["packing", "verify", "square"]), "pass", 0);
    let o = cpack(&["packing", "codes", "square"]);
    assert_outcome(&o, "info", 0);
    assert!(stdout(&o).contains("codes: {0:1111, 1:01010101}"), "{}", stdout(&o));
}

#[test]
fn packing_codes_of_the_five_size_packing() {
    let o = cpack(&["packing", "codes", "five-size"]);
    let r = assert_outcome(&o, "info", 0);
    assert_eq!(r["metrics"]["codes"], "{0:13424, 1:032124, 2:041134, 3:012434, 4:0120332}");
}

#[test]
fn corrupted_packing_fails_verification_naming_the_fan() {
    let mut p = compact_packing::fixtures::load_packing("two-size-0.280776").unwrap();
    let l = p.lattice.clone().unwrap();
    let det = l[0][0] * l[1][1] - l[0][1] * l[1][0];
    // Move a disc well inside the cell so the document stays valid.
    let target = p
        .spheres
        .iter()
        .position(|s| {
            let u = (s.center[0] * l[1][1] - s.center[1] * l[1][0]) / det;
            let v = (l[0][0] * s.center[1] - l[0][1] * s.center[0]) / det;
            [u, v].iter().all(|t| (0.05..0.95).contains(t))
        })
        .unwrap();
    let id = p.spheres[target].id;
    p.spheres[target].center[0] += 1e-3;
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("moved.json");
    std::fs::write(&path, p.to_json()).unwrap();
    let o = cpack(&["packing", "verify", path.to_str().unwrap()]);
    let r = assert_outcome(&o, "fail", 1);
    assert!(stdout(&o).contains(&format!("sphere {id}")), "{}", stdout(&o));
    assert!(!r["metrics"]["failures"].as_array().unwrap().is_empty());
}

#[test]
fn packing_svg_is_valid_xml_with_one_disc_per_sphere() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["square", "five-size", "hexagonal"] {
        let out = dir.path().join(format!("{name}.svg"));
        let o = cpack(&["packing", "svg", name, "--out", out.to_str().unwrap()]);
        let r = assert_outcome(&o, "info", 0);
        assert_eq!(r["artifacts"][0], out.to_str().unwrap());
        let text = std::fs::read_to_string(&out).unwrap();
        let doc = roxmltree::Document::parse(&text).expect("valid XML");
        let p = compact_packing::fixtures::load_packing(name).unwrap();
        let circles = doc.descendants().filter(|n| n.has_tag_name("circle")).count();
        assert_eq!(circles, p.spheres.len(), "{name}");
        let lines = doc.descendants().filter(|n| n.has_tag_name("line")).count();
        assert!(lines >= r["metrics"]["edges"].as_u64().unwrap() as usize && lines > 0, "{name}");
    }
    let o = cpack(&["packing", "svg", "octahedral-corona", "--out", dir.path().join("x.svg").to_str().unwrap()]);
    assert_outcome(&o, "error", 2);
}

#[test]
fn solve_corona_roots() {
    let o = cpack(&["solve", "corona", "--word", "1111"]);
    assert_outcome(&o, "info", 0);
    assert!((first_number(&o) - (2f64.sqrt() - 1.0)).abs() < 1e-10);
    let o = cpack(&["solve", "corona", "--word", "111"]);
    assert!((first_number(&o) - (2.0 / 3f64.sqrt() - 1.0)).abs() < 1e-10);
    assert_outcome(&cpack(&["solve", "corona", "--word", "12"]), "error", 2);
}

#[test]
fn solve_system_on_the_five_size_codes() {
    let o = cpack(&["solve", "system", "--file", "fig4.codes", "--starts", "20"]);
    let r = assert_outcome(&o, "pass", 0);
    assert!(r["metrics"]["residual"].as_f64().unwrap() <= 1e-8);
    assert!(r["metrics"]["top_residual"].as_f64().unwrap().abs() <= 1e-8);
    assert_eq!(r["metrics"]["successes"], 20);
    assert_eq!(r["seed"], 0);
}

#[test]
fn solve_enumerate_has_nine_verified_rows() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("candidates.csv");
    let o = cpack(&["solve", "enumerate", "--max-len", "12", "--csv", csv.to_str().unwrap()]);
    let r = assert_outcome(&o, "pass", 0);
    assert_eq!(r["metrics"]["verified"], 9);
    let table = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(table, stdout(&o));
    assert_eq!(table.lines().next().unwrap(), "word,root,residual,tier");
    assert_eq!(table.lines().filter(|l| l.ends_with(",VERIFIED")).count(), 9);
    // Short words miss most fixtures.
    assert_outcome(&cpack(&["solve", "enumerate", "--max-len", "3"]), "fail", 1);
}

#[test]
fn sphere_check_w_examples() {
    assert_outcome(&cpack(&["sphere", "check-w", "octahedron"]), "pass", 0);
    let demo = cpack(&["sphere", "demo-splitmeridian", "--delta", "0.1"]);
    assert_outcome(&demo, "info", 0);
    let o = cpack_stdin(&["sphere", "check-w"], &demo.stdout);
    assert_outcome(&o, "fail", 1);
    assert!(stdout(&o).contains("not in W"));
    assert_outcome(&cpack(&["sphere", "demo-splitmeridian", "--delta", "2"]), "error", 2);
}

#[test]
fn sphere_check_q_on_the_octahedron() {
    // Six unit spheres around a unit sphere sit at distance π/2 > π/3.
    assert_outcome(&cpack(&["sphere", "check-q", "--rho", "1,1", "octahedron"]), "fail", 1);
    // Vertex labels outside the realizer are an input error.
    assert_outcome(&cpack(&["sphere", "check-q", "--rho", "1", "octahedron"]), "error", 2);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("square.json");
    let t = compact_packing::spherical::circle_triangulation(
        0,
        &[0.0, 1.0 * std::f64::consts::FRAC_PI_2, std::f64::consts::PI, 3.0 * std::f64::consts::FRAC_PI_2],
        vec![1; 4],
    )
    .unwrap();
    std::fs::write(&path, t.to_json()).unwrap();
    let rho = format!("{},1", 2f64.sqrt() - 1.0);
    assert_outcome(&cpack(&["sphere", "check-q", "--rho", &rho, path.to_str().unwrap()]), "pass", 0);
    assert_outcome(&cpack(&["sphere", "check-q", "--rho", "0.5,1", path.to_str().unwrap()]), "fail", 1);
}

#[test]
fn sphere_demo_darts_only_grows() {
    let o = cpack(&["sphere", "demo-darts", "--k", "6", "--phi", "0.05"]);
    let r = assert_outcome(&o, "pass", 0);
    assert!(r["metrics"]["grow"].as_u64().unwrap() > 0);
    assert_eq!(r["metrics"]["shrink"], 0);
    assert_outcome(&cpack(&["sphere", "demo-darts", "--k", "6", "--phi", "0"]), "fail", 1);
}

#[test]
fn harness_bootstrap_runs() {
    let o = cpack(&["harness", "bootstrap", "--seed", "1", "--count", "10000"]);
    let r = assert_outcome(&o, "pass", 0);
    assert_eq!(r["metrics"]["checked"], 10_000);
    assert_eq!(r["metrics"]["failures"], 0);
    assert_eq!(r["seed"], 1);
    assert_outcome(&cpack(&["harness", "bootstrap", "--count", "0"]), "info", 0);
}

#[test]
fn harness_uniqueness_on_square_codes() {
    let o = cpack(&["harness", "uniqueness", "--file", "square.codes"]);
    assert_outcome(&o, "pass", 0);
    let body: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let sol = body["solution"].as_array().unwrap();
    assert!((sol[0].as_f64().unwrap() - (2f64.sqrt() - 1.0)).abs() < 1e-8);
    assert_eq!(sol[1].as_f64().unwrap(), 1.0);
    assert_eq!(body["agree"], true);
}

#[test]
fn reports_are_deterministic_and_digest_inputs() {
    let a = report(&cpack(&["harness", "bootstrap", "--seed", "5", "--count", "200"]));
    let b = report(&cpack(&["harness", "bootstrap", "--seed", "5", "--count", "200"]));
    let c = report(&cpack(&["harness", "bootstrap", "--seed", "6", "--count", "200"]));
    assert_eq!(a["inputs_digest"], b["inputs_digest"]);
    assert_eq!(a["metrics"], b["metrics"]);
    assert_ne!(a["inputs_digest"], c["inputs_digest"]);
    let digest = a["inputs_digest"].as_str().unwrap();
    assert_eq!(digest.len(), 64);
    assert!(digest.chars().all(|ch| ch.is_ascii_hexdigit()));
}

#[test]
fn fixture_directory_override() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::create_dir(dir.path().join("codes")).unwrap();
    std::fs::write(dir.path().join("codes").join("custom.codes"), "0:111\n").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_cpack"))
        .args(["codes", "check-fundamental", "custom"])
        .env(compact_packing::fixtures::FIXTURES_DIR_ENV, dir.path())
        .output()
        .unwrap();
    assert_outcome(&o, "pass", 0);
}
