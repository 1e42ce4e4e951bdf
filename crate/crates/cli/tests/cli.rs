use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn psai(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_psai")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = psai(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn small_cohort() -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().to_str().unwrap();
    ok(&["generate", "--students", "300", "--courses", "12", "--terms", "3", "--courses-per-term", "2", "--seed", "5", "--fail-threshold", "2.0", "--out", path]);
    dir
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn generate_is_repeatable_and_checks_schedule() {
    let a = small_cohort();
    let b = small_cohort();
    for name in ["enrollments.csv", "profiles.csv", "truth.json"] {
        assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap());
    }
    let out = psai(&["generate", "--courses", "3", "--courses-per-term", "4", "--out", p(&a.path().join("x"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!a.path().join("x").exists());
}

#[test]
fn ingest_check_reports_counts() {
    let dir = small_cohort();
    let json: serde_json::Value = serde_json::from_str(&ok(&["ingest-check", "--in", p(dir.path())])).unwrap();
    let e = &json["enrollments"];
    assert_eq!(e["accepted"], 300 * 6);
    assert_eq!(e["dropped"], 0);
    assert_eq!(e["courses"], 12);
    assert_eq!(e["students"], 300);
}

#[test]
fn build_features_contract() {
    let dir = small_cohort();
    let psai_csv = dir.path().join("psai.csv");
    let naive_csv = dir.path().join("naive.csv");
    let a = ok(&["build-features", "--method", "psai", "--course", "C007", "--in", p(dir.path()), "--out", p(&psai_csv)]);
    let b = ok(&["build-features", "--method", "naive", "--course", "C007", "--in", p(dir.path()), "--out", p(&naive_csv)]);
    let header = fs::read_to_string(&psai_csv).unwrap();
    assert_eq!(header.lines().next().unwrap(), "student_id,score,course_weight,course_success_rate,label");
    let counts = |s: &str| s.split(':').nth(1).unwrap().split(',').take(2).map(str::trim).collect::<Vec<_>>().join(",");
    assert_eq!(counts(&a), counts(&b));

    let explicit = dir.path().join("explicit.csv");
    ok(&[
        "build-features", "--method", "psai", "--course", "C007", "--in", p(dir.path()), "--out", p(&explicit),
        "--easy-anchor", "4.15:0.5", "--hard-anchor", "1.15:2.0",
    ]);
    assert_eq!(fs::read(&explicit).unwrap(), fs::read(&psai_csv).unwrap());

    let out = psai(&["build-features", "--method", "psai", "--course", "NOPE", "--in", p(dir.path()), "--out", p(&explicit)]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn build_features_rejects_thin_courses() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("enrollments.csv"),
        "student_id,course_id,term_index,mark,passed\ns1,X,0,3.0,true\ns1,A,1,0.5,false\ns2,A,0,3.0,true\n",
    )
    .unwrap();
    fs::write(
        dir.path().join("profiles.csv"),
        "student_id,admission_base,citizenship,previous_program,legal_status,college_program,age,gender\n",
    )
    .unwrap();
    let out = psai(&["build-features", "--method", "psai", "--course", "A", "--in", p(dir.path()), "--out", p(&dir.path().join("f.csv"))]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn evaluate_is_deterministic_and_validates_kind() {
    let dir = small_cohort();
    let csv = dir.path().join("psai.csv");
    ok(&["build-features", "--method", "psai", "--course", "C007", "--in", p(dir.path()), "--out", p(&csv)]);
    let args = ["evaluate", "--features", p(&csv), "--classifier", "adaboost", "--k", "10", "--seed", "7"];
    let first = ok(&args);
    assert_eq!(first, ok(&args));

    let report: serde_json::Value = serde_json::from_str(&first).unwrap();
    let rows = fs::read_to_string(&csv).unwrap().lines().count() - 1;
    let total: u64 = report["folds"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| ["tp", "fp", "fn", "tn"].iter().map(|k| f[k].as_u64().unwrap()).sum::<u64>())
        .sum();
    assert_eq!(total as usize, rows);

    let out = psai(&["evaluate", "--features", p(&csv), "--classifier", "qda"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    for kind in ["decision_tree", "knn", "linear_svm", "random_forest", "adaboost", "neural_net"] {
        assert!(err.contains(kind), "{err}");
    }

    let out = psai(&["evaluate", "--features", p(&csv), "--classifier", "knn", "--k", "500"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn compare_writes_table_and_sidecar() {
    let dir = small_cohort();
    let out = dir.path().join("cmp");
    let table = ok(&["compare", "--in", p(dir.path()), "--course", "C007", "--k", "5", "--seed", "1", "--out", p(&out)]);
    let rows: Vec<&str> = table.lines().filter(|l| l.starts_with("| ") && !l.contains("Algorithm")).collect();
    assert_eq!(rows.len(), 6);
    assert!(table.contains("Naive F-measure (%)") && table.contains("PSAI F-measure (%)"));
    assert_eq!(fs::read_to_string(out.join("compare.txt")).unwrap(), table);
    let json: serde_json::Value = serde_json::from_slice(&fs::read(out.join("compare.json")).unwrap()).unwrap();
    assert_eq!(json["reports"].as_array().unwrap().len(), 12);
}
