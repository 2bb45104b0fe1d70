use std::process::{Command, Output};

fn stochgeo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stochgeo"))
        .args(args)
        .env_remove("STOCHGEO_SEED")
        .output()
        .unwrap()
}

fn csv_rows(out: &Output) -> Vec<csv::StringRecord> {
    csv::Reader::from_reader(out.stdout.as_slice())
        .records()
        .collect::<Result<_, _>>()
        .unwrap()
}

#[test]
fn deficit_rows_carry_seed_and_fingerprint() {
    let out = stochgeo(&["deficit", "--body", "ball:d=2,r=1", "--ns", "10,20", "--trials", "4", "--seed", "11"]);
    assert_eq!(out.status.code(), Some(0));
    let mut rdr = csv::Reader::from_reader(out.stdout.as_slice());
    let header: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(
        header,
        [
            "body_id", "d", "n", "trials", "probes", "seed", "deficit_mean", "deficit_stderr", "scaled", "scaled_stderr",
            "predicted_limit", "fingerprint"
        ]
    );
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 2);
    assert_eq!(&rows[0][5], "11");
    assert_eq!(rows[0][11].len(), 16);
    assert_eq!(&rows[0][11], &rows[1][11]);
}

#[test]
fn seed_comes_from_environment_when_not_given() {
    let base = ["deficit", "--body", "box:d=2", "--n", "10", "--trials", "3"];
    let env = Command::new(env!("CARGO_BIN_EXE_stochgeo"))
        .args(base)
        .env("STOCHGEO_SEED", "42")
        .output()
        .unwrap();
    let mut flag: Vec<&str> = base.to_vec();
    flag.extend(["--seed", "42"]);
    assert_eq!(env.stdout, stochgeo(&flag).stdout);
    let default = stochgeo(&base);
    assert_eq!(&csv_rows(&default)[0][5], "1");
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "body = box:d=2\nns = 10\ntrials = 3\nseed = 5\n").unwrap();
    let c = cfg.to_str().unwrap();
    let from_file = stochgeo(&["deficit", "--config", c]);
    assert_eq!(from_file.status.code(), Some(0));
    assert_eq!(&csv_rows(&from_file)[0][5], "5");
    let overridden = stochgeo(&["deficit", "--config", c, "--seed", "6"]);
    assert_eq!(&csv_rows(&overridden)[0][5], "6");
}

#[test]
fn bad_input_exits_with_two() {
    assert_eq!(stochgeo(&["deficit", "--body", "ball:d=1,r=1", "--n", "10"]).status.code(), Some(2));
    assert_eq!(stochgeo(&["deficit", "--body", "ball:d=2,r=1", "--n", "0"]).status.code(), Some(2));
    assert_eq!(stochgeo(&["deficit", "--body", "ball:d=2,r=1"]).status.code(), Some(2));
    assert_eq!(stochgeo(&["verify", "--suite", "nonsense"]).status.code(), Some(2));
    assert_eq!(stochgeo(&["frobnicate"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "trials = -3\n").unwrap();
    let out = stochgeo(&["deficit", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));
}

#[test]
fn verify_suite_passes_and_writes_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = stochgeo(&["verify", "--suite", "lemma4", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("lemma4.csv").exists());
    assert!(dir.path().join("lemma4-data.csv").exists());
}

#[test]
fn constants_table() {
    let out = stochgeo(&["constants", "--dmax", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 3);
    let c2: f64 = rows[0][1].parse().unwrap();
    assert!((c2 - 1.268_036_788_994_423_318).abs() < 1e-12);
}

#[test]
fn cap_and_hpoly_commands() {
    let out = stochgeo(&["cap", "--body", "ball:d=3,r=1", "--delta", "0.3"]);
    assert_eq!(out.status.code(), Some(0));
    let exact: f64 = csv_rows(&out)[0][3].parse().unwrap();
    assert!((exact - std::f64::consts::PI * 0.09 * 2.7 / 3.0).abs() < 1e-14);

    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("tri.txt");
    std::fs::write(&p, "-1 0 0\n0 -1 0\n1 1 1\ninterior 0.2 0.2\n").unwrap();
    let spec = format!("hpoly:file={}", p.display());
    let out = stochgeo(&["asa", "--body", &spec]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let vol: f64 = csv_rows(&out)[0][2].parse().unwrap();
    assert!((vol - 0.5).abs() < 1e-12);
}
