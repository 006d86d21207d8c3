use std::f64::consts::SQRT_2;
use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use dimwit_core::bellfmt::serialize_functional;
use dimwit_core::catalog::by_name;
use dimwit_core::localbound::{local_bound, table_of_strategy};
use serde_json::Value;

fn dimwit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dimwit"))
        .args(args)
        .env_remove("DIMWIT_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("dimwit-cli");
    fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn write(name: &str, text: &str) -> String {
    let path = scratch(name);
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

fn uniform_table(outcomes: usize, settings: usize) -> String {
    let mut text = String::from("x,y,a,b,p\n");
    let p = 1.0 / (outcomes * outcomes) as f64;
    for x in 0..settings {
        for y in 0..settings {
            for a in 0..outcomes {
                for b in 0..outcomes {
                    text.push_str(&format!("{x},{y},{a},{b},{p}\n"));
                }
            }
        }
    }
    text
}

#[test]
fn eval_uniform_table_on_cglmp() {
    let bell = scratch("c.bell");
    let out = dimwit(&[
        "catalog",
        "emit",
        "cglmp-c",
        "--out",
        bell.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let table = write("uniform3.csv", &uniform_table(3, 2));
    let out = dimwit(&["eval", bell.to_str().unwrap(), &table]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).trim(), "-0.666666666667");
}

#[test]
fn eval_on_the_optimal_strategy_table_gives_the_local_bound() {
    let f = by_name("E").unwrap();
    let (bound, strategy) = local_bound(&f).unwrap();
    let bell = write("e.bell", &serialize_functional(&f));
    let table = write(
        "e-strategy.csv",
        &table_of_strategy(f.scenario(), &strategy).to_csv(),
    );
    let out = dimwit(&["eval", &bell, &table, "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    assert_eq!(doc["schema"], 1);
    assert_eq!(doc["eval"]["value"].as_f64().unwrap(), bound);
}

#[test]
fn eval_errors_map_to_exit_codes() {
    let table = write("bad-row.csv", "x,y,a,b,p\n0,0,0,0,0.25\n0,0,oops,1,0.25\n");
    let out = dimwit(&["eval", "chsh", &table]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 3"), "{}", stderr(&out));

    let bell = write("broken.bell", "scenario A:2,2 B:2,2\n+1 P(0 0|0 0\n");
    let table = write("uniform2.csv", &uniform_table(2, 2));
    let out = dimwit(&["eval", &bell, &table]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 2"));

    let qutrits = write("uniform3b.csv", &uniform_table(3, 2));
    let out = dimwit(&["eval", "chsh", &qutrits]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
}

#[test]
fn local_bound_reports() {
    let out = dimwit(&["local-bound", "E"]);
    assert!(stdout(&out).starts_with("local bound: 0.000000000000\n"));
    let out = dimwit(&["local-bound", "chsh", "--json"]);
    let doc = json(&out);
    assert_eq!(doc["local_bound"]["value"].as_f64(), Some(2.0));
    assert_eq!(doc["schema"], 1);
    let phi = format!("iphi:{}", 3.0 * std::f64::consts::FRAC_PI_4);
    let out = dimwit(&["local-bound", &phi]);
    assert!(
        stdout(&out).starts_with("local bound: 1.414213562373\n"),
        "{}",
        stdout(&out)
    );
    let out = dimwit(&["local-bound", "cglmp-c", "--max-strategies", "10"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn seesaw_fixed_theta_and_invalid_dimensions() {
    const THETA: &str = "0.3927";
    let out = dimwit(&[
        "seesaw",
        "E",
        "--da",
        "2",
        "--db",
        "2",
        "--fixed-theta",
        "0.3927",
        "--restarts",
        "10",
        "--json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out)["seesaw"]["best_value"].as_f64().unwrap();
    let expected = ((1.0 + (2.0 * THETA.parse::<f64>().unwrap()).sin().powi(2)).sqrt() - 1.0) / 2.0;
    assert!((v - expected).abs() < 1e-5, "{v}");

    let out = dimwit(&["seesaw", "E", "--da", "1", "--db", "2"]);
    assert_eq!(out.status.code(), Some(5));
    let out = dimwit(&[
        "seesaw",
        "E",
        "--da",
        "3",
        "--db",
        "3",
        "--fixed-theta",
        "0.3",
    ]);
    assert_eq!(out.status.code(), Some(5));
}

#[test]
fn seesaw_output_is_reproducible_across_job_counts() {
    let run = |jobs: &str| {
        let out = dimwit(&[
            "--jobs",
            jobs,
            "seesaw",
            "cglmp-c",
            "--da",
            "3",
            "--db",
            "3",
            "--restarts",
            "12",
            "--seed",
            "5",
            "--json",
        ]);
        assert!(out.status.success());
        json(&out)["seesaw"].to_string()
    };
    let one = run("1");
    assert_eq!(one, run("4"));
    assert_eq!(one, run("1"));
}

#[test]
fn seed_falls_back_to_environment() {
    let base = [
        "seesaw",
        "chsh",
        "--da",
        "2",
        "--db",
        "2",
        "--restarts",
        "3",
        "--json",
    ];
    let with_env = Command::new(env!("CARGO_BIN_EXE_dimwit"))
        .args(base)
        .env("DIMWIT_SEED", "9")
        .output()
        .unwrap();
    let doc = json(&with_env);
    assert_eq!(doc["manifest"]["seed"], 9);
    let mut explicit: Vec<&str> = base.to_vec();
    explicit.extend(["--seed", "9"]);
    assert_eq!(doc["seesaw"], json(&dimwit(&explicit))["seesaw"]);
}

#[test]
fn witness_verdicts_set_the_exit_code() {
    let out = dimwit(&["witness", "E", "--d", "2", "--restarts", "20"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let doc = json(&out);
    assert_eq!(doc["report"]["verdict"], "Witnessed");
    assert!((doc["report"]["gap"].as_f64().unwrap() - 0.046).abs() < 1e-3);

    let out = dimwit(&["witness", "chsh", "--restarts", "20"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["report"]["verdict"], "NotWitnessed");

    let out = dimwit(&["witness", "iphi:0.785398163397", "--restarts", "20"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn curve_writes_csv_and_manifest() {
    let path = scratch("curve.csv");
    let out = dimwit(&[
        "curve",
        "--family",
        "iphi",
        "--steps",
        "5",
        "--restarts",
        "20",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("phi,local_bound,value_d2,value_d3"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 5);
    assert_eq!(rows[0][0], 0.0);
    assert!(rows[0][3] >= 0.3049);
    assert!(rows[1][2] <= 1e-6 && rows[1][3] > rows[1][2]);
    for r in &rows {
        assert!(r[3] >= r[2] - 1e-9 && r[2] >= r[1] - 1e-9);
    }
    let manifest: Value =
        serde_json::from_str(&fs::read_to_string(scratch("curve.csv.manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["schema"], 1);
    assert_eq!(manifest["manifest"]["config"]["steps"], 5);

    let out = dimwit(&["curve", "--steps", "1"]);
    assert_eq!(out.status.code(), Some(5));
    let out = dimwit(&["curve", "--dims", "3,4"]);
    assert_eq!(out.status.code(), Some(5));
}

#[test]
fn grothendieck_on_chsh() {
    let m = write("chsh.csv", "1,1\n1,-1\n");
    let out = dimwit(&[
        "grothendieck",
        "-m",
        &m,
        "--n",
        "3",
        "--restarts",
        "20",
        "--json",
    ]);
    assert!(out.status.success());
    let doc = json(&out);
    assert_eq!(doc["grothendieck"]["local_norm"].as_f64(), Some(2.0));
    let v = doc["grothendieck"]["normalized_value"].as_f64().unwrap();
    assert!((v - SQRT_2).abs() < 1e-8);

    let ragged = write("ragged.csv", "1,1\n1\n");
    let out = dimwit(&["grothendieck", "-m", &ragged]);
    assert_eq!(out.status.code(), Some(2));
    let zero = write("zero.csv", "0,0\n0,0\n");
    let out = dimwit(&["grothendieck", "-m", &zero]);
    assert_eq!(out.status.code(), Some(5));
}

#[test]
fn unknown_inputs_fail_cleanly() {
    let out = dimwit(&["local-bound", "nonesuch"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).starts_with("error: "));
    let out = dimwit(&["local-bound", "missing/file.bell"]);
    assert_eq!(out.status.code(), Some(6));
    assert!(!stderr(&out).contains("panicked"));
}

#[test]
fn catalog_emit_round_trips() {
    for name in dimwit_core::catalog::NAMES {
        let out = dimwit(&["catalog", "emit", name]);
        assert!(out.status.success());
        let parsed = dimwit_core::bellfmt::parse_functional(&stdout(&out)).unwrap();
        assert_eq!(parsed, by_name(name).unwrap());
    }
}
