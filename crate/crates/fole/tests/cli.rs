//! End-to-end runs of the `fole` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use fole::frontend::{parse_workspace, run_command};
use serde_json::{json, Value};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn core() -> String {
    fixture("core.fole").display().to_string()
}

fn fole(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fole"))
        .args(args)
        .env_remove("FOLE_BUDGET")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// Drops the `//` commentary lines the CLI prints around DSL output.
fn dsl_only(text: &str) -> String {
    text.lines()
        .filter(|l| !l.starts_with("//"))
        .skip_while(|l| !l.starts_with("structure") && !l.starts_with("domain") && !l.starts_with("spec"))
        .map(|l| format!("{l}\n"))
        .collect()
}

#[test]
fn check_accepts_the_fixtures() {
    let o = fole(&["check", &core()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "ok: 15 items\n");
    let o = fole(&["check", &fixture("corpus.fole").display().to_string()]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn eval_prints_the_relation() {
    let o = fole(&["eval", &core(), "-f", "Q", "-s", "M1"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v, json!([{"i": "a"}]));
    let oracle = fole(&["eval", &core(), "-f", "Q", "-s", "M1", "--oracle"]);
    assert_eq!(oracle.status.code(), Some(0));
    assert_eq!(stdout(&oracle), stdout(&o));
}

#[test]
fn eval_accepts_inline_formulas() {
    let o = fole(&["eval", &core(), "-f", "Salaried \\ Married", "-s", "M1"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v, json!([{"i": "b"}]));
}

#[test]
fn entails_follows_transitivity() {
    let o = fole(&["entails", &core(), "-t", "T", "-c", "MgrStaff", "--domain", "D2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("entailed: Mgr |- Staff"));
}

#[test]
fn derivation_is_printed_on_request() {
    let o = fole(&["entails", &core(), "-t", "T", "-c", "MgrStaff", "--domain", "D2", "--derive"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.lines().filter(|l| l.starts_with("//")).count() > 1, "{text}");
}

#[test]
fn non_entailment_prints_a_countermodel_that_refutes_it() {
    let o = fole(&["entails", &core(), "-t", "T", "-c", "StaffMgr", "--domain", "D2"]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    assert!(text.starts_with("not entailed: Staff |- Mgr"));

    let dir = tempfile::tempdir().unwrap();
    let ws = dir.path().join("cm.fole");
    let source = fs::read_to_string(fixture("core.fole")).unwrap();
    fs::write(&ws, format!("{source}\n{}", dsl_only(&text))).unwrap();
    let ws = ws.display().to_string();
    let spec = fole(&["sat", &ws, "-t", "T", "-s", "countermodel"]);
    assert_eq!(spec.status.code(), Some(0), "{}", stderr(&spec));
    let goal = fole(&["sat", &ws, "-c", "StaffMgr", "-s", "countermodel"]);
    assert_eq!(goal.status.code(), Some(1));
}

#[test]
fn consistency_prints_a_witness() {
    let o = fole(&["consistent", &core(), "-t", "T", "--domain", "D2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("consistent\n"));
    assert!(parse_workspace(&format!(
        "sort N;\nentity Emp : (i: N);\nentity Mgr : (i: N);\nentity Staff : (i: N);\nentity Salaried : (i: N);\nentity Married : (i: N);\ndomain D2 {{ N = {{\"a\", \"b\"}}; }}\n{}",
        dsl_only(&stdout(&o))
    ))
    .is_ok());
}

#[test]
fn sat_reports_escaping_rows_as_json() {
    let era = fixture("era");
    let ws = era.join("era.fole").display().to_string();
    let table = format!("Company:Manager={}", era.join("manager.csv").display());
    let o = fole(&["sat", &ws, "-c", "MgrDept", "-s", "Company", "--table", &table]);
    assert_eq!(o.status.code(), Some(1));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["satisfied"], json!(false));
    assert_eq!(v["constraints"][0]["escaping"], json!([{"dept": "ops"}]));
}

#[test]
fn tables_populate_a_structure_that_satisfies_its_spec() {
    let era = fixture("era");
    let ws = era.join("era.fole").display().to_string();
    let mut args = vec!["sat".to_string(), ws, "-t".into(), "Staff".into(), "-s".into(), "Company".into()];
    for (entity, file) in [("Employee", "employee.csv"), ("Manager", "manager.csv"), ("Department", "department.csv")] {
        args.push("--table".into());
        args.push(format!("Company:{entity}={}", era.join(file).display()));
    }
    let args: Vec<&str> = args.iter().map(String::as_str).collect();
    let o = fole(&args);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn bad_table_value_is_reported_with_its_row() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("e.csv");
    fs::write(&csv, "name,dept\nann,ops\nann,sales\n").unwrap();
    let ws = fixture("era/era.fole").display().to_string();
    let table = format!("Company:Employee={}", csv.display());
    let o = fole(&["sat", &ws, "-t", "Staff", "-s", "Company", "--table", &table]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("row 2") && err.contains("sales"), "{err}");
}

#[test]
fn dangling_reference_is_one_scoped_error() {
    let dir = tempfile::tempdir().unwrap();
    let ws = dir.path().join("bad.fole");
    fs::write(&ws, "sort N;\nentity A : (i: N);\nformula F = A /\\ Ghost;\n").unwrap();
    let o = fole(&["check", &ws.display().to_string()]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    let lines: Vec<&str> = err.lines().collect();
    assert_eq!(lines.len(), 1, "{err}");
    assert!(lines[0].contains("bad.fole:3:"), "{err}");
    assert!(lines[0].contains("Ghost"), "{err}");
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(fole(&[]).status.code(), Some(2));
    assert_eq!(fole(&["bogus"]).status.code(), Some(2));
    assert_eq!(fole(&["eval", &core(), "-s", "M1"]).status.code(), Some(2));
    let both = fole(&["flow", &core(), "--morphism", "grow", "--direct", "--inverse", "-t", "SmallT"]);
    assert_eq!(both.status.code(), Some(2));
}

#[test]
fn budget_overflow_exits_with_three() {
    let o = Command::new(env!("CARGO_BIN_EXE_fole"))
        .args(["entails", &core(), "-t", "T", "-c", "MgrStaff", "--domain", "D2"])
        .env("FOLE_BUDGET", "3")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("budget"));
    let flag = fole(&["consistent", &core(), "-t", "T", "--domain", "D2", "--budget", "3"]);
    assert_eq!(flag.status.code(), Some(3));
}

#[test]
fn unsound_logic_lists_violated_axioms() {
    let o = fole(&["logic", &core(), "-l", "L"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("seq top(i: N) |- Emp;"));
}

#[test]
fn flows_print_specifications_over_the_other_schema() {
    let o = fole(&["flow", &core(), "--morphism", "grow", "--direct", "-t", "SmallT"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("spec SmallT_direct : Big {"));
    let o = fole(&["flow", &core(), "--morphism", "grow", "--inverse", "-t", "BigTheorem", "--domain", "D2"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("spec BigTheorem_inverse : Small {"));
    assert!(text.contains("seq Emp |- Mgr;"));
}

#[test]
fn conservative_extension_verdicts() {
    let fresh = fole(&["conservative", &core(), "--morphism", "grow", "-t2", "SmallT", "-t1", "BigFresh", "--domain", "D2"]);
    assert_eq!(fresh.status.code(), Some(0), "{}", stderr(&fresh));
    assert!(stdout(&fresh).starts_with("conservative\n"));

    let theorem = fole(&["conservative", &core(), "--morphism", "grow", "--t2", "SmallT", "--t1", "BigTheorem", "--domain", "D2"]);
    assert_eq!(theorem.status.code(), Some(1));
    let text = stdout(&theorem);
    assert!(text.starts_with("not conservative: Emp |- Mgr"), "{text}");
    assert!(text.contains("structure countermodel : Small"));
}

#[test]
fn institution_check_finds_no_violations() {
    let o = fole(&["institution-check", &core(), "--morphism", "grow", "-s", "B1", "--depth", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["checked"].as_u64().unwrap() > 0);
    assert_eq!(v["violations"], json!([]));
}

#[test]
fn output_is_deterministic() {
    for args in [
        vec!["intent", &core(), "-s", "M1", "--depth", "2"],
        vec!["entails", &core(), "-t", "T", "-c", "StaffMgr", "--domain", "D2"],
        vec!["logic", &core(), "-l", "L", "--natural"],
    ] {
        let a = fole(&args);
        let b = fole(&args);
        assert_eq!(stdout(&a), stdout(&b));
        let args: Vec<String> = std::iter::once("fole".to_string()).chain(args.iter().map(|s| s.to_string())).collect();
        let lib = run_command(&args);
        assert_eq!(lib.stdout, stdout(&a));
        assert_eq!(Some(lib.code), a.status.code());
    }
}
