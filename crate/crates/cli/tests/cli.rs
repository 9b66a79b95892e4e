use std::path::PathBuf;
use std::process::{Command, Output};

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name).display().to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hermsurg")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn witt_group_of_f3() {
    let o = run(&["witt", "--ring", "F3", "--flavor", "symmetric", "--cap", "4"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).lines().next().unwrap().ends_with(": Z/4"));
}

#[test]
fn gw_of_the_integers_quadratic() {
    let o = run(&["gw", "--ring", "Z", "--flavor", "quadratic"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("8Z (+) Z inside Z (+) Z"));
}

#[test]
fn check_accepts_the_hyperbolic_plane() {
    let o = run(&["check", "--in", &data("hyperbolic.json")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("OK"));
}

#[test]
fn malformed_json_reports_position_and_exits_2() {
    let o = run(&["check", "--in", &data("malformed.json")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2 column"));
}

#[test]
fn non_unimodular_form_is_a_validation_error() {
    let o = run(&["check", "--in", &data("degenerate.json")]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn cap_exceeded_exits_3() {
    let o = run(&["qcat", "--ring", "F3", "--cap", "4"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn qcat_components_over_f2() {
    let o = run(&["qcat", "--ring", "F2", "--flavor", "symmetric", "--cap", "2", "--components"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("\n2 components\n"));
}

#[test]
fn classify_writes_the_invariant_csv() {
    let dir = std::env::temp_dir().join(format!("hermsurg-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let csv = dir.join("classes.csv");
    let o = run(&["classify", "--ring", "F2", "--flavor", "quadratic", "--cap", "2", "--csv", csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next(), Some("rank,signature,parity,det-class,witt-class"));
    // zero form, hyperbolic plane, Arf-one plane
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn arf_one_plane_is_not_witt_trivial() {
    let o = run(&["classify", "--in", &data("arf_one_f2.json")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).lines().nth(1).unwrap().ends_with("(1)"));
}

#[test]
fn normalize_is_reproducible_for_a_fixed_seed() {
    let args = ["normalize", "--in", &data("hyperbolic.json"), "--fatten", "3", "--seed", "11"];
    let (a, b) = (run(&args), run(&args));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).contains("recovered form"));
}
