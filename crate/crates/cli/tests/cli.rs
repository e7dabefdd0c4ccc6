use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use formavg_core::extremal::{convergence_experiment, ConvergenceOptions, ConvergenceTable, TorusSearchOptions};
use formavg_core::linsys::LinearFormSystem;

fn formavg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_formavg")).args(args).env_remove("FORMAVG_THREADS").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn leibman_prints_hnf_basis() {
    let o = formavg(&["leibman", "--system", "ap:4", "--degree", "2"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "rank 3 in Z^4\n(1,0,0,1)\n(0,1,0,-3)\n(0,0,1,3)\n");
}

#[test]
fn gowers_of_quadratic_phase() {
    let o = formavg(&["gowers", "--N", "13", "--d", "3", "--f", "quadphase"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).trim(), "1.0");
    let o = formavg(&["gowers", "--N", "13", "--d", "2", "--f", "quadphase"]);
    let u2: f64 = stdout(&o).trim().parse().unwrap();
    assert!((u2 - 1.0 / 13.0).abs() < 1e-11);
}

#[test]
fn exit_codes_by_error_kind() {
    assert_eq!(code(&formavg(&["leibman", "--system", "heptagon"])), 2);
    assert_eq!(code(&formavg(&["gowers", "--N", "12", "--d", "3", "--f", "quadphase"])), 2);
    assert_eq!(code(&formavg(&["m-discrete", "--system", "ap:3", "--p", "11", "--alpha", "3/2"])), 2);
    assert_eq!(code(&formavg(&["leibman"])), 2, "missing flag is a usage error");
    let o = formavg(&["sol-discrete", "--system", "cube:3", "--N", "199", "--f", "quadphase"]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("gowers"));
}

#[test]
fn malformed_system_file_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let sys = dir.path().join("bad.sys");
    fs::write(&sys, "2 2\n1 0\n1\n").unwrap();
    let out = dir.path().join("out.csv");
    let o = formavg(&[
        "leibman",
        "--system",
        &format!("@{}", sys.display()),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 2);
    assert!(!out.exists());
    assert!(!dir.path().join("out.csv.meta.json").exists());
}

#[test]
fn system_file_matches_shorthand() {
    let dir = tempfile::tempdir().unwrap();
    let sys = dir.path().join("ap4.sys");
    fs::write(&sys, LinearFormSystem::ap(4).unwrap().to_text()).unwrap();
    let a = formavg(&["leibman", "--system", &format!("@{}", sys.display()), "--degree", "2"]);
    let b = formavg(&["leibman", "--system", "ap:4", "--degree", "2"]);
    assert_eq!(stdout(&a), stdout(&b));
}

#[test]
fn counterexamples_all_pass() {
    let o = formavg(&["counterexamples"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 7);
    assert!(text.lines().all(|l| l.starts_with("pass")), "{text}");
    let o = formavg(&["counterexamples", "--p", "2"]);
    assert!(stdout(&o).lines().next().unwrap().starts_with("skipped"));
}

fn converge_args(out: &Path) -> Vec<String> {
    [
        "converge", "--system", "ap:3", "--alpha", "2/5", "--primes", "5,11", "--samples", "2000", "--seed", "3",
        "--out",
    ]
    .iter()
    .map(|s| s.to_string())
    .chain([out.display().to_string()])
    .collect()
}

#[test]
fn converge_csv_round_trips_and_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("conv.csv");
    let args = converge_args(&out);
    let o = formavg(&args.iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(code(&o), 0);
    let table = ConvergenceTable::from_csv(&fs::read_to_string(&out).unwrap()).unwrap();

    let opts = ConvergenceOptions {
        search: formavg_core::extremal::SearchOptions { seed: 3, ..Default::default() },
        torus: TorusSearchOptions { samples: 2000, seed: 3, ..Default::default() },
    };
    let direct = convergence_experiment(
        &LinearFormSystem::ap(3).unwrap(),
        0.4,
        &[5, 11],
        &"1".parse().unwrap(),
        &opts,
    )
    .unwrap();
    assert!(table.same_results(&direct));

    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("conv.csv.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["command"], "converge");
    assert_eq!(meta["config_hash"].as_str().unwrap().len(), 64);
    assert_eq!(meta["payload"].as_array().unwrap().len(), 3);
}

#[test]
fn config_round_trip_reproduces_run() {
    let dir = tempfile::tempdir().unwrap();
    let direct_out = dir.path().join("direct.csv");
    let args = converge_args(&direct_out);
    let args: Vec<&str> = args.iter().map(String::as_str).collect();
    assert_eq!(code(&formavg(&args)), 0);

    let mut print = args.clone();
    print.push("--print-config");
    let toml = stdout(&formavg(&print));
    let cfg = dir.path().join("exp.toml");
    fs::write(&cfg, &toml).unwrap();
    let replay_out = dir.path().join("replay.csv");
    let o = formavg(&["run", "--config", cfg.to_str().unwrap(), "--out", replay_out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);

    let a = ConvergenceTable::from_csv(&fs::read_to_string(&direct_out).unwrap()).unwrap();
    let b = ConvergenceTable::from_csv(&fs::read_to_string(&replay_out).unwrap()).unwrap();
    assert!(a.same_results(&b));

    let hash = |p: &Path| {
        let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap();
        m["config_hash"].as_str().unwrap().to_string()
    };
    assert_eq!(hash(&dir.path().join("direct.csv.meta.json")), hash(&dir.path().join("replay.csv.meta.json")));
}

#[test]
fn config_rejects_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    for body in [
        "[command.leibman]\nsystem = \"ap:3\"\ncolour = 1\n",
        "[command.m-torus]\nsystem = \"ap:3\"\nspec = \"1\"\nalpha = \"0.4\"\ntemperature = 3\n",
        "[global]\nseeds = 1\n[command.leibman]\nsystem = \"ap:3\"\n",
        "[command.teleport]\n",
    ] {
        let cfg = dir.path().join("bad.toml");
        fs::write(&cfg, body).unwrap();
        let o = formavg(&["run", "--config", cfg.to_str().unwrap()]);
        assert_eq!(code(&o), 2, "{body}");
    }
}

#[test]
fn thread_count_does_not_change_results() {
    let run = |threads: &str| {
        let o = Command::new(env!("CARGO_BIN_EXE_formavg"))
            .args(["sol-torus", "--system", "ap:4", "--spec", "2", "--f", "raised-cosine:0", "--samples", "50000"])
            .env("FORMAVG_THREADS", threads)
            .output()
            .unwrap();
        assert_eq!(code(&o), 0);
        stdout(&o)
    };
    assert_eq!(run("1"), run("3"));
}

#[test]
fn json_format_is_array_of_records() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("m.json");
    let o = formavg(&[
        "m-discrete", "--system", "ap:3", "--p", "11", "--alpha", "2/5", "--format", "json", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v[0]["method"], "exhaustive");
    assert!((v[0]["value"].as_f64().unwrap() - 9.0 / 121.0).abs() < 1e-12);
}
