use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn eccentric(args: &[&str]) -> Output {
    eccentric_env(args, &[])
}

fn eccentric_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_eccentric"));
    cmd.args(args).env_remove("ECCENTRIC_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn solve_radius_d64_auto_n() {
    let o = eccentric(&["solve-radius", "--dim", "64"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json(&o);
    let rho = v["rho"].as_f64().unwrap();
    assert!((rho - 8.0).abs() / 8.0 < 1e-4, "rho {rho}");
}

#[test]
fn solve_radius_rejects_d2() {
    let o = eccentric(&["solve-radius", "--dim", "2"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("d >= 3"), "{}", stderr(&o));
}

#[test]
fn sweep_csv_header_and_thresholds() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let o = eccentric(&["sweep-radius", "--dims", "12,38", "--mu-step", "0.25", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("d,max_percent_diff"));
    for (line, (d, limit)) in lines.zip([("12", 0.1), ("38", 0.01)]) {
        let row: Vec<&str> = line.split(',').collect();
        assert_eq!(row[0], d);
        assert!(row[1].parse::<f64>().unwrap() < limit, "{line}");
    }
    assert!(dir.path().join("sweep.csv.manifest.json").exists());
}

#[test]
fn empty_config_with_complete_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("empty.cfg");
    fs::write(&cfg, "").unwrap();
    let with_file = eccentric(&["solve-radius", "--config", cfg.to_str().unwrap(), "--dim", "38"]);
    assert_eq!(code(&with_file), 0, "{}", stderr(&with_file));
    assert_eq!(stdout(&with_file), stdout(&eccentric(&["solve-radius", "--dim", "38"])));
}

#[test]
fn usage_errors_exit_one_and_name_the_key() {
    let cases: [(&[&str], &str, bool); 4] = [
        (&["no-such-command"], "no-such-command", true),
        (&["solve-radius", "--dim", "64", "--bogus", "1"], "--bogus", true),
        (&["solve-radius", "--dim", "sixty"], "--dim", false),
        (&["solve-radius"], "--dim", true),
    ];
    for (args, key, usage) in cases {
        let o = eccentric(args);
        assert_eq!(code(&o), 1, "{args:?}");
        let err = stderr(&o);
        assert!(err.contains(key), "{args:?}: {err}");
        assert_eq!(err.contains("Usage"), usage, "{args:?}: {err}");
    }
}

#[test]
fn config_file_errors_name_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "dim=64\nwidth=3\n").unwrap();
    let o = eccentric(&["solve-radius", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("--width"), "{}", stderr(&o));

    fs::write(&cfg, "dim=abc\n").unwrap();
    let o = eccentric(&["solve-radius", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("--dim"), "{}", stderr(&o));
}

#[test]
fn flags_override_config_and_duplicates_warn() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# radius run\ndim=12\nmu=2\nmu=3\n").unwrap();
    let path = cfg.to_str().unwrap();

    let from_file = eccentric(&["solve-radius", "--config", path]);
    assert_eq!(code(&from_file), 0, "{}", stderr(&from_file));
    assert!(stderr(&from_file).contains("`mu`"));
    assert_eq!(json(&from_file)["mu"].as_f64(), Some(3.0));
    assert_eq!(json(&from_file)["dim"].as_u64(), Some(12));

    let overridden = eccentric(&["solve-radius", "--config", path, "--mu", "5"]);
    assert_eq!(json(&overridden)["mu"].as_f64(), Some(5.0));

    let direct = eccentric(&["solve-radius", "--dim", "12", "--mu", "5"]);
    assert_eq!(stdout(&overridden), stdout(&direct));
}

#[test]
fn repeated_flag_warns_and_last_wins() {
    let o = eccentric(&["solve-radius", "--dim", "12", "--dim", "64"]);
    assert_eq!(code(&o), 0);
    assert!(stderr(&o).contains("--dim"));
    assert_eq!(json(&o)["dim"].as_u64(), Some(64));
}

#[test]
fn diverging_simulation_exits_two() {
    let o = eccentric(&["simulate", "--dim", "4", "--count", "16", "--step-size", "1e6"]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
}

#[test]
fn invalid_input_exits_one() {
    let o = eccentric(&["lemma-check", "--a-values", "2.5"]);
    assert_eq!(code(&o), 1);
    let o = eccentric(&["simulate", "--dim", "3", "--count", "1"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn help_exits_zero() {
    let o = eccentric(&["--help"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("solve-radius"));
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn outputs_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["simulate", "--dim", "3", "--count", "40", "--steps", "200", "--seed", "9"];
    let mut runs = Vec::new();
    for threads in ["1", "3"] {
        let out = dir.path().join(threads);
        let mut full = args.to_vec();
        full.extend(["--out-dir", out.to_str().unwrap()]);
        let o = eccentric_env(&full, &[("ECCENTRIC_THREADS", threads)]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        runs.push(read_dir_sorted(&out));
    }
    assert_eq!(runs[0], runs[1]);
    assert!(runs[0].iter().any(|(n, _)| n == "manifest.json"));
}

#[test]
fn manifest_records_config_and_hashes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("force.csv");
    let o = eccentric(&["force-profile", "--mu", "2", "--format", "csv", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("force.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["command"], "force-profile");
    assert_eq!(manifest["config"]["mu"].as_f64(), Some(2.0));
    let bytes = fs::read(&out).unwrap();
    let digest = manifest["files"][0]["sha256"].as_str().unwrap();
    assert_eq!(digest.len(), 64);
    assert_eq!(manifest["files"][0]["bytes"].as_u64(), Some(bytes.len() as u64));
}

#[test]
fn verify_accepts_rerun_and_rejects_changes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let base = ["train", "--data", "gaussian-mixture", "--n", "200", "--epochs", "2", "--seed", "4"];
    let with_out = |extra: &[&str]| {
        let mut v: Vec<&str> = base.to_vec();
        v.extend(extra);
        v.extend(["--out-dir", out.to_str().unwrap()]);
        eccentric(&v.iter().map(|s| &**s).collect::<Vec<_>>())
    };
    assert_eq!(code(&with_out(&[])), 0);

    let ok = with_out(&["--verify"]);
    assert_eq!(code(&ok), 0, "{}", stderr(&ok));

    let changed = with_out(&["--lambda", "0.2", "--verify"]);
    assert_eq!(code(&changed), 1);
    assert!(stderr(&changed).contains("config"), "{}", stderr(&changed));

    fs::write(out.join("latent.csv"), "tampered\n").unwrap();
    let tampered = with_out(&["--verify"]);
    assert_eq!(code(&tampered), 1);
    assert!(stderr(&tampered).contains("latent.csv"), "{}", stderr(&tampered));
}

#[test]
fn train_encode_spectrum_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run");
    let o = eccentric(&[
        "train", "--data", "noisy-ring", "--n", "300", "--epochs", "2", "--out-dir", run.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let model = run.join("model.eae");
    let latent = dir.path().join("latent.csv");
    let o = eccentric(&[
        "encode", "--model", model.to_str().unwrap(), "--data", "noisy-ring", "--n", "300",
        "--out", latent.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(fs::read(&latent).unwrap(), fs::read(run.join("latent.csv")).unwrap());

    let o = eccentric(&["spectrum", "--input", latent.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(json(&o)["eigenvalues"].as_array().unwrap().len(), 2);
}

#[test]
fn train_csv_goes_to_stdout() {
    let o = eccentric(&["train", "--data", "noisy-ring", "--n", "200", "--epochs", "1", "--format", "csv"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).starts_with("epoch"), "{}", stdout(&o));
}
