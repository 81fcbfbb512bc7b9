use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

fn smallworld() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/smallworld.csv")
}

fn mhq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mhq"))
        .args(args)
        .output()
        .expect("spawn mhq")
}

fn mhq_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_mhq"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("spawn mhq");
    child
        .stdin
        .take()
        .unwrap()
        .write_all(input.as_bytes())
        .unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn without_meta(mut v: serde_json::Value) -> serde_json::Value {
    v.as_object_mut().unwrap().remove("meta");
    v
}

#[test]
fn json_report_matches_golden() {
    let out = mhq(&[
        "analyze",
        smallworld().to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let got: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let golden: serde_json::Value =
        serde_json::from_str(include_str!("golden/smallworld.json")).unwrap();
    assert_eq!(without_meta(got), without_meta(golden));
}

#[test]
fn text_report_shows_table_values() {
    let out = mhq(&["analyze", smallworld().to_str().unwrap()]);
    assert!(out.status.success());
    let text = stdout(&out);
    for needle in [
        "MHRR    1.18  [0.91, 1.53]",
        "MHCR    1.32  [0.85, 2.04]",
        "MHOR    1.63  [0.78, 3.39]",
        "MHq     1.30  [0.84, 2.00]",
        "excluded cat4: no mentioned articles",
        "undefined",
    ] {
        assert!(text.contains(needle), "missing {needle:?} in\n{text}");
    }
    assert!(!text.contains("BH"));
}

#[test]
fn default_level_is_ninety_five_percent() {
    let path = smallworld();
    let path = path.to_str().unwrap();
    assert_eq!(
        mhq(&["analyze", path]).stdout,
        mhq(&["analyze", path, "--level", "0.95"]).stdout
    );
}

#[test]
fn bh_is_opt_in_and_annotated() {
    let out = mhq(&[
        "analyze",
        smallworld().to_str().unwrap(),
        "--methods",
        "skm,bh",
    ]);
    let text = stdout(&out);
    assert!(
        text.contains("BH  (deprecated: overestimates variance)"),
        "{text}"
    );
    let json = mhq(&[
        "analyze",
        smallworld().to_str().unwrap(),
        "--methods",
        "skm,bh",
        "--format",
        "json",
    ]);
    let v: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    let bh = &v["estimates"][4];
    assert_eq!(bh["method"], "BH");
    assert_eq!(bh["note"], "deprecated: overestimates variance");
}

#[test]
fn csv_report_and_stdin_input() {
    let csv = std::fs::read_to_string(smallworld()).unwrap();
    let out = mhq_stdin(&["analyze", "-", "--format", "csv"], &csv);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("section,label,quantity,value\n"));
    assert!(text.contains("stratum,cat4,col_rr,undefined\n"));
    assert!(text.contains("estimate,MHq SKM,value,1.29625093825307"));
}

#[test]
fn json_input() {
    let input = r#"[{"stratum":"x","a":26,"b":7,"c":18,"d":13}]"#;
    let out = mhq_stdin(
        &["analyze", "-", "--input-format", "json", "--format", "json"],
        input,
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["estimates"][3]["kind"], "MHq");
}

#[test]
fn report_written_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("report.txt");
    let out = mhq(&[
        "analyze",
        smallworld().to_str().unwrap(),
        "--out",
        target.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    assert!(std::fs::read_to_string(target).unwrap().contains("MHq"));
}

#[test]
fn no_informative_strata_exits_undefined() {
    let out = mhq_stdin(&["analyze", "-"], "stratum,a,b,c,d\ncat4,0,10,0,10\n");
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("no informative strata"));
}

#[test]
fn parse_errors_name_line_and_field() {
    let out = mhq_stdin(&["analyze", "-"], "stratum,a,b,c,d\ncat1,26,7,-1,13\n");
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("line 2") && err.contains("field c"), "{err}");

    let dup = mhq_stdin(&["analyze", "-"], "stratum,a,b,c,d\nx,1,2,3,4\nx,1,2,3,4\n");
    assert_eq!(dup.status.code(), Some(2));
    assert!(stderr(&dup).contains("`x`"));
}

#[test]
fn bad_level_names_flag() {
    let out = mhq(&["analyze", smallworld().to_str().unwrap(), "--level", "1.5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--level"));
}

#[test]
fn missing_file_is_io_error() {
    let out = mhq(&["analyze", "/nonexistent/strata.csv"]);
    assert_eq!(out.status.code(), Some(5));
    assert!(stderr(&out).contains("/nonexistent/strata.csv"));
}

#[test]
fn invalid_design_names_flag() {
    let out = mhq(&["simulate", "bias", "--psi", "0.15", "--p1-high", "0.2"]);
    assert_eq!(out.status.code(), Some(4));
    let err = stderr(&out);
    assert!(err.contains("--psi") && err.contains("exceed 1"), "{err}");

    let out = mhq(&["simulate", "coverage", "--k", "0"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(stderr(&out).contains("--k"));
}

#[test]
fn repeated_bias_runs_are_byte_identical() {
    let args = [
        "simulate",
        "bias",
        "--psi",
        "1",
        "--reps",
        "5",
        "--datasets",
        "2000",
        "--seed",
        "7",
    ];
    let first = mhq(&args);
    assert!(first.status.success(), "{}", stderr(&first));
    assert_eq!(first.stdout, mhq(&args).stdout);
    assert_eq!(stdout(&first).lines().count(), 6);
    assert!(stderr(&first).starts_with("bias: psi=1 reps=5"));
}

#[test]
fn out_directory_holds_csv_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = mhq(&[
        "simulate",
        "width",
        "--k",
        "5",
        "--reps",
        "2",
        "--datasets",
        "300",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).starts_with("width: "));
    let csv = std::fs::read_to_string(dir.path().join("width.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("width.json")).unwrap())
            .unwrap();
    assert_eq!(json["design"]["datasets_per_rep"], 300);
}

#[test]
fn threads_env_var_is_honoured() {
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_mhq"))
            .args(["simulate", "convergence", "--replicates", "200"])
            .env("MHQ_THREADS", threads)
            .output()
            .unwrap()
    };
    let a = run("1");
    assert!(a.status.success());
    assert_eq!(a.stdout, run("3").stdout);
}

#[test]
fn version_mentions_rng() {
    let out = mhq(&["version"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("mhq 0.1.0\n"));
    assert!(text.contains("ChaCha8"));
}
