//! End-to-end tests of the `ssmp` binary: spawn it like a user would and
//! check files, stdout, and exit codes.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn ssmp(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ssmp"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

const SUITE: &str = r#"
time_limit = 60.0

[[solvers]]
name = "greedy-search"

[[solvers]]
name = "greedy-dp"

[[configs]]
m = 3
n = 4
epsilon = "0"
seed = 11
count = 2

[configs.family]
kind = "integer"
gamma = 9
"#;

fn write_suite(dir: &Path) {
    fs::write(dir.join("suite.toml"), SUITE).unwrap();
}

#[test]
fn gen_is_deterministic_and_names_files_by_config() {
    let tmp = tempfile::tempdir().unwrap();
    write_suite(tmp.path());
    for out_dir in ["first", "second"] {
        let out = ssmp(&["gen", "--config", "suite.toml", "--out-dir", out_dir], tmp.path());
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        assert!(stdout(&out).contains("wrote 2 instances"));
    }
    for i in 0..2 {
        let name = format!("int_M3_N4_g9_s11_{i}.json");
        let first = fs::read(tmp.path().join("first").join(&name)).unwrap();
        let second = fs::read(tmp.path().join("second").join(&name)).unwrap();
        assert_eq!(first, second, "{name} differs between runs");
        let parsed: serde_json::Value = serde_json::from_slice(&first).unwrap();
        assert_eq!(parsed["a"].as_array().unwrap().len(), 3);
        assert_eq!(parsed["b"].as_array().unwrap().len(), 4);
        assert_eq!(parsed["digits"], 0);
    }
}

#[test]
fn solve_prints_a_record_and_writes_the_solution() {
    let tmp = tempfile::tempdir().unwrap();
    write_suite(tmp.path());
    ssmp(&["gen", "--config", "suite.toml", "--out-dir", "inst"], tmp.path());
    let out = ssmp(
        &[
            "solve",
            "--instance",
            "inst/int_M3_N4_g9_s11_0.json",
            "--solver",
            "greedy-dp",
            "--solution-out",
            "sol.json",
        ],
        tmp.path(),
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let record: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert_eq!(record["instance"], "int_M3_N4_g9_s11_0");
    assert_eq!(record["family"], "int");
    assert_eq!(record["m"], 3);
    assert_eq!(record["n"], 4);
    assert_eq!(record["param"], "g9");
    assert_eq!(record["epsilon"], "0");
    assert_eq!(record["seed"], 11);
    assert_eq!(record["solver"], "greedy-dp");
    assert_eq!(record["status"], "completed");
    assert!(record["measure"].is_i64());
    assert!(record["runtime_s"].is_f64());
    assert!(record["solution"]["matches"].is_array());

    // the solution file it wrote verifies against the instance
    let verify = ssmp(
        &["verify", "--instance", "inst/int_M3_N4_g9_s11_0.json", "--solution", "sol.json"],
        tmp.path(),
    );
    assert_eq!(code(&verify), 0);
    assert!(stdout(&verify).starts_with("ok:"), "{}", stdout(&verify));
}

#[test]
fn verify_rejects_bad_solutions_with_exit_one() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(
        tmp.path().join("inst.json"),
        r#"{"a": ["2", "2"], "b": ["2", "7"], "epsilon": "0", "digits": 0}"#,
    )
    .unwrap();

    // both matches claim b[0]
    fs::write(
        tmp.path().join("overlap.json"),
        r#"{"matches": [{"w": [0], "v": [0]}, {"w": [1], "v": [0]}]}"#,
    )
    .unwrap();
    let out =
        ssmp(&["verify", "--instance", "inst.json", "--solution", "overlap.json"], tmp.path());
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("overlap"), "{}", stdout(&out));

    // sums 2 and 7 are further apart than epsilon
    fs::write(tmp.path().join("off.json"), r#"{"matches": [{"w": [0], "v": [1]}]}"#).unwrap();
    let out = ssmp(&["verify", "--instance", "inst.json", "--solution", "off.json"], tmp.path());
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("deviate"), "{}", stdout(&out));

    // a good solution passes and reports the objective
    fs::write(tmp.path().join("good.json"), r#"{"matches": [{"w": [0], "v": [0]}]}"#).unwrap();
    let out = ssmp(&["verify", "--instance", "inst.json", "--solution", "good.json"], tmp.path());
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out).trim(), "ok: 1 matches, objective 3");
}

#[test]
fn malformed_input_exits_with_code_two() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("junk.json"), "not json").unwrap();
    fs::write(
        tmp.path().join("inst.json"),
        r#"{"a": ["1"], "b": ["1"], "epsilon": "0", "digits": 0}"#,
    )
    .unwrap();

    let missing = ssmp(&["solve", "--instance", "nope.json", "--solver", "exact"], tmp.path());
    assert_eq!(code(&missing), 2);

    let junk = ssmp(&["solve", "--instance", "junk.json", "--solver", "exact"], tmp.path());
    assert_eq!(code(&junk), 2);

    let solver = ssmp(&["solve", "--instance", "inst.json", "--solver", "simplex"], tmp.path());
    assert_eq!(code(&solver), 2);
    assert!(String::from_utf8_lossy(&solver.stderr).contains("unknown solver"));

    let sol = ssmp(&["verify", "--instance", "inst.json", "--solution", "junk.json"], tmp.path());
    assert_eq!(code(&sol), 2);
}

#[test]
fn bench_writes_records_and_both_tables() {
    let tmp = tempfile::tempdir().unwrap();
    write_suite(tmp.path());
    let out = ssmp(&["bench", "--config", "suite.toml", "--out-dir", "results"], tmp.path());
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("4 runs (0 timed out, 0 failed)"), "{}", stdout(&out));

    let results = tmp.path().join("results");
    let jsonl = fs::read_to_string(results.join("records.jsonl")).unwrap();
    let records: Vec<serde_json::Value> =
        jsonl.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(records.len(), 4, "2 instances x 2 solvers");
    assert!(records.iter().all(|r| r["status"] == "completed"));

    let runs = fs::read_to_string(results.join("runs.csv")).unwrap();
    let mut lines = runs.lines();
    assert_eq!(
        lines.next().unwrap(),
        "family,M,N,param,epsilon,solver,seed,measure,runtime_s,status"
    );
    assert_eq!(lines.count(), 4);

    let agg = fs::read_to_string(results.join("aggregate.csv")).unwrap();
    let mut lines = agg.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("family,M,N,param,epsilon,greedy-search_runs,"));
    assert!(header.contains("greedy-dp_mean_measure"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 1, "one config, one aggregate row");
    assert!(rows[0].starts_with("int,3,4,g9,0,2,"), "{}", rows[0]);

    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(results.join("meta.json")).unwrap()).unwrap();
    assert_eq!(meta["jobs"], 4);
    assert_eq!(meta["workers"], 1);
    assert_eq!(meta["solvers"], serde_json::json!(["greedy-search", "greedy-dp"]));
}

#[test]
fn parallel_bench_matches_sequential_output() {
    let tmp = tempfile::tempdir().unwrap();
    write_suite(tmp.path());
    ssmp(&["bench", "--config", "suite.toml", "--out-dir", "seq"], tmp.path());
    let out = ssmp(
        &["bench", "--config", "suite.toml", "--out-dir", "par", "--parallel", "3"],
        tmp.path(),
    );
    assert_eq!(code(&out), 0);

    let read = |dir: &str, file: &str| fs::read_to_string(tmp.path().join(dir).join(file)).unwrap();
    // measures and statuses agree line by line; runtimes may not
    let strip = |text: String| -> Vec<String> {
        text.lines()
            .map(|l| {
                let mut v: serde_json::Value = serde_json::from_str(l).unwrap();
                v.as_object_mut().unwrap().remove("runtime_s");
                v.to_string()
            })
            .collect()
    };
    assert_eq!(strip(read("seq", "records.jsonl")), strip(read("par", "records.jsonl")));
    let meta: serde_json::Value = serde_json::from_str(&read("par", "meta.json")).unwrap();
    assert_eq!(meta["workers"], 3);
}

#[test]
fn external_backend_failures_map_to_timeout_and_success_codes() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(
        tmp.path().join("inst.json"),
        r#"{"a": ["4", "1"], "b": ["4", "1"], "epsilon": "0", "digits": 0}"#,
    )
    .unwrap();
    // a backend that exits cleanly without producing a solution file: the
    // run times out with nothing in hand unless a warm start floors it
    let script = tmp.path().join("noop.sh");
    fs::write(&script, "#!/bin/sh\nexit 0\n").unwrap();
    let mut perms = fs::metadata(&script).unwrap().permissions();
    use std::os::unix::fs::PermissionsExt;
    perms.set_mode(0o755);
    fs::set_permissions(&script, perms).unwrap();

    let run = |extra: &[&str]| {
        Command::new(env!("CARGO_BIN_EXE_ssmp"))
            .args(["solve", "--instance", "inst.json", "--solver", "exact"])
            .args(extra)
            .env("SSMP_MILP_BACKEND", &script)
            .current_dir(tmp.path())
            .output()
            .unwrap()
    };

    let bare = run(&[]);
    assert_eq!(code(&bare), 3, "timed out with no incumbent");
    let record: serde_json::Value = serde_json::from_str(stdout(&bare).trim()).unwrap();
    assert_eq!(record["status"], "timed_out");
    assert!(record.get("measure").is_none());

    let warmed = run(&["--warm-start", "dp"]);
    assert_eq!(code(&warmed), 0, "the dp warm start is a usable incumbent");
    let record: serde_json::Value = serde_json::from_str(stdout(&warmed).trim()).unwrap();
    assert_eq!(record["status"], "timed_out");
    assert_eq!(record["measure"], 6);
    assert_eq!(record["warm_start"], "dp");
}
