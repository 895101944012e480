use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn gptdf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gptdf")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn generate(dir: &Path, seed: &str, n: &str) -> String {
    let out = gptdf(&[
        "--seed",
        seed,
        "generate",
        "--sigma-f",
        "0.8215",
        "--sigma-l",
        "2.0752",
        "--sigma-n",
        "0.1001",
        "-n",
        n,
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let path = dir.join(format!("series-{seed}-{n}.csv"));
    fs::write(&path, stdout(&out)).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn generate_is_seeded() {
    let a = gptdf(&[
        "--seed",
        "4",
        "generate",
        "--sigma-f",
        "1",
        "--sigma-l",
        "2",
        "--sigma-n",
        "0.1",
        "-n",
        "20",
    ]);
    let b = gptdf(&[
        "--seed",
        "4",
        "generate",
        "--sigma-f",
        "1",
        "--sigma-l",
        "2",
        "--sigma-n",
        "0.1",
        "-n",
        "20",
    ]);
    let c = gptdf(&[
        "--seed",
        "5",
        "generate",
        "--sigma-f",
        "1",
        "--sigma-l",
        "2",
        "--sigma-n",
        "0.1",
        "-n",
        "20",
    ]);
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
    assert!(stdout(&a).starts_with("t,value\n"));
    assert_eq!(stdout(&a).lines().count(), 21);
}

#[test]
fn fit_prints_a_feature() {
    let dir = tempfile::tempdir().unwrap();
    let data = generate(dir.path(), "1", "60");
    let out_dir = dir.path().join("fit");
    let out = gptdf(&["fit", &data, "--restarts", "2", "--out-dir", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert_eq!(v["n_points"], 60);
    assert!(v["sigma_l"].as_f64().unwrap() > 0.0);
    let saved: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("feature.json")).unwrap()).unwrap();
    assert_eq!(saved, v);

    // the saved fit feeds straight into predict
    let out = gptdf(&[
        "predict",
        &data,
        "--features-file",
        out_dir.join("feature.json").to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).starts_with("step,t,y,mean,var,lo,hi\n"));
    assert_eq!(stdout(&out).lines().count(), 61);
}

#[test]
fn missing_file_is_a_usage_error_naming_the_path() {
    let out = gptdf(&["fit", "/no/such/segment.csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("/no/such/segment.csv"));
}

#[test]
fn constant_series_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("flat.csv");
    fs::write(&path, "flow\n".to_string() + &"5\n".repeat(20)).unwrap();
    let out = gptdf(&["fit", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("zero variance"));
}

#[test]
fn bad_flags_exit_two() {
    assert_eq!(gptdf(&["fit"]).status.code(), Some(2));
    assert_eq!(gptdf(&["--tau", "x", "fit", "a.csv"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let data = generate(dir.path(), "2", "20");
    let out = gptdf(&["--alpha", "1.5", "predict", &data, "--feature", "1,1,0.1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn predict_without_features_uses_the_default_prior() {
    let dir = tempfile::tempdir().unwrap();
    let data = generate(dir.path(), "3", "30");
    let out = gptdf(&["--tau", "10", "predict", &data]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stderr(&out).contains("default prior"));
    assert!(stderr(&out).contains("delay 0"));
}

fn write_bench(dir: &Path, methods: &str) -> String {
    let path = dir.join("bench.toml");
    fs::write(
        &path,
        format!(
            "data = {{ type = \"synthetic\", sigma_f = 0.8215, sigma_l = 2.0752, sigma_n = 0.1001, n = 90 }}\n\
             [fit]\nrestarts = 1\nmax_evaluations = 200\n{methods}"
        ),
    )
    .unwrap();
    path.to_str().unwrap().to_string()
}

const NEAR: &str =
    "[{ sigma_f = 0.8215, sigma_l = 2.0752, sigma_n = 0.1001 }, { sigma_f = 0.8069, sigma_l = 2.4335, sigma_n = 0.1 }]";
const FAR: &str =
    "[{ sigma_f = 0.7773, sigma_l = 7.3899, sigma_n = 0.1 }, { sigma_f = 0.7778, sigma_l = 4.5846, sigma_n = 0.1007 }]";

#[test]
fn bench_prints_one_row_per_method() {
    let dir = tempfile::tempdir().unwrap();
    let all = format!("{}, {}", &NEAR[..NEAR.len() - 1], &FAR[1..]);
    let mut methods = format!(
        "[[methods]]\nkind = \"gptdf\"\nname = \"GPTDF-All\"\nfeatures = {all}\n\
         [[methods]]\nkind = \"gptdf\"\nname = \"GPTDF-I\"\nfeatures = {NEAR}\n\
         [[methods]]\nkind = \"gptdf\"\nname = \"GPTDF-II\"\nfeatures = {FAR}\n"
    );
    for n in [20, 30, 40] {
        methods += &format!("[[methods]]\nkind = \"gp\"\nname = \"GP-{n}\"\nn_train = {n}\n");
    }
    let config = write_bench(dir.path(), &methods);
    let out = gptdf(&["--seed", "1", "bench", &config]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "method,nll,mae,mse,delay");
    assert_eq!(lines.len(), 7);
    let delays: Vec<&str> = lines[1..].iter().map(|l| l.rsplit(',').next().unwrap()).collect();
    assert_eq!(delays, ["0", "0", "0", "20", "30", "40"]);
    assert_eq!(gptdf(&["--seed", "1", "bench", &config]).stdout, out.stdout);
}

#[test]
fn bench_single_method_and_empty_list() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_bench(
        dir.path(),
        &format!("[[methods]]\nkind = \"gptdf\"\nname = \"GPTDF-All\"\nfeatures = {NEAR}\n"),
    );
    let out = gptdf(&["bench", &config]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 2);
    assert!(text.lines().nth(1).unwrap().starts_with("GPTDF-All,") && text.trim_end().ends_with(",0"));

    let empty = write_bench(dir.path(), "");
    assert_eq!(gptdf(&["bench", &empty]).status.code(), Some(2));
}

#[test]
fn bench_with_a_failing_method_is_partial() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_bench(
        dir.path(),
        &format!(
            "[[methods]]\nkind = \"gptdf\"\nname = \"ok\"\nfeatures = {NEAR}\n\
             [[methods]]\nkind = \"gp\"\nname = \"too-long\"\nn_train = 500\n"
        ),
    );
    let out = gptdf(&["bench", &config]);
    assert_eq!(out.status.code(), Some(5));
    let text = stdout(&out);
    assert!(text.starts_with("method,nll,mae,mse,delay,error\n"));
    assert!(stderr(&out).contains("too-long"));
}

#[test]
fn simulate_writes_a_result_directory() {
    let dir = tempfile::tempdir().unwrap();
    let target_csv = generate(dir.path(), "9", "80");
    fs::rename(&target_csv, dir.path().join("target.csv")).unwrap();
    let scenario = dir.path().join("scenario.toml");
    fs::write(
        &scenario,
        r#"
seed = 5
baselines = [20]

[fit]
restarts = 1
max_evaluations = 200

[[historical]]
id = "a"
source = { type = "synthetic", sigma_f = 0.8, sigma_l = 2.0, sigma_n = 0.1, n = 40 }

[[historical]]
id = "b"
source = { type = "feature", sigma_f = 0.8, sigma_l = 7.4, sigma_n = 0.1, n_points = 288 }

[[historical]]
id = "c"
source = { type = "synthetic", sigma_f = 0.8, sigma_l = 3.0, sigma_n = 0.1, n = 40 }

[target]
id = "t"
source = { type = "csv", path = "target.csv" }
"#,
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let run = |limit: &str| {
        gptdf(&[
            "--limit",
            limit,
            "simulate",
            scenario.to_str().unwrap(),
            "--out-dir",
            out_dir.to_str().unwrap(),
        ])
    };
    let out = run("2");
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).starts_with("method,nll,mae,mse,delay\nGPTDF,"));

    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["nodes"].as_array().unwrap().len(), 4);
    assert_eq!(manifest["fused_features"], serde_json::json!(["c", "b"]));
    assert_eq!(manifest["errors"].as_array().unwrap().len(), 0);
    let registry = fs::read_to_string(out_dir.join("registry.jsonl")).unwrap();
    assert_eq!(registry.lines().count(), 3);
    assert!(out_dir.join("transcript.jsonl").exists());
    assert!(out_dir.join("metrics.csv").exists());
    assert!(out_dir.join("series-0-gptdf.csv").exists());
    assert!(out_dir.join("series-1-gp-n-20.csv").exists());

    let first = fs::read(out_dir.join("series-0-gptdf.csv")).unwrap();
    assert!(run("2").status.success());
    assert_eq!(fs::read(out_dir.join("series-0-gptdf.csv")).unwrap(), first);
}

#[test]
fn simulate_with_a_broken_node_is_partial() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("scenario.toml");
    fs::write(
        &scenario,
        r#"
[[historical]]
id = "broken"
source = { type = "csv", path = "missing.csv" }

[target]
id = "t"
source = { type = "synthetic", sigma_f = 0.8, sigma_l = 2.0, sigma_n = 0.1, n = 40 }
"#,
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let out = gptdf(&[
        "simulate",
        scenario.to_str().unwrap(),
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(5));
    assert!(stderr(&out).contains("missing.csv"));
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["used_default_prior"], true);
}

#[test]
fn unknown_scenario_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("scenario.toml");
    let target = "[target]\nid = \"t\"\nsource = { type = \"synthetic\", sigma_f = 1.0, sigma_l = 2.0, sigma_n = 0.1, n = 30 }\n";
    fs::write(&scenario, format!("tua = 5\n{target}")).unwrap();
    let out = gptdf(&[
        "simulate",
        scenario.to_str().unwrap(),
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("tua"));
    fs::write(&scenario, target).unwrap();
    let out = gptdf(&[
        "simulate",
        scenario.to_str().unwrap(),
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
}
