use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};
use tempfile::TempDir;

use selector_core::objective::evaluate_cost;
use selector_core::{DistanceMatrix, QuboModel, SelectorProblem};

fn selector(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_selector"))
        .args(args)
        .output()
        .expect("failed to launch selector")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("terminated by signal")
}

fn run_ok(args: &[&str]) -> Output {
    let o = selector(args);
    assert_eq!(
        code(&o),
        0,
        "stderr: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    o
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

fn json(file: PathBuf) -> Value {
    serde_json::from_str(&fs::read_to_string(file).unwrap()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    fs::write(dir.join(name), text).unwrap();
    path(dir, name)
}

fn gen_prices(dir: &Path, realizations: &str) -> String {
    let out = path(dir, "gen");
    run_ok(&[
        "gen",
        "sde",
        "--dims",
        "2",
        "--realizations",
        realizations,
        "--sampler",
        "uniform:-1:1",
        "--seed",
        "9",
        "--out",
        &out,
    ]);
    path(&dir.join("gen"), "prices.csv")
}

#[test]
fn blob_select_picks_one_point_per_blob() {
    let tmp = TempDir::new().unwrap();
    let gen = path(tmp.path(), "gen");
    run_ok(&["gen", "blobs", "--seed", "3", "--out", &gen]);
    let sel = path(tmp.path(), "sel");
    run_ok(&[
        "select",
        "--data",
        &path(&tmp.path().join("gen"), "data.csv"),
        "--k",
        "2",
        "--sense",
        "dispersed",
        "--out",
        &sel,
    ]);
    let report = json(tmp.path().join("sel/report.json"));
    let picked: Vec<usize> = report["selection"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_u64().unwrap() as usize)
        .collect();
    let classes = fs::read_to_string(tmp.path().join("gen/classes.csv")).unwrap();
    let class_of: Vec<String> = classes
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().to_string())
        .collect();
    assert_eq!(picked.len(), 2);
    assert_ne!(class_of[picked[0]], class_of[picked[1]]);
    assert_eq!(report["report"]["constraint_satisfied"], true);
}

#[test]
fn zero_k_is_a_usage_error() {
    let tmp = TempDir::new().unwrap();
    let data = write(tmp.path(), "d.csv", "0,0\n3,4\n");
    let o = selector(&[
        "select",
        "--data",
        &data,
        "--k",
        "0",
        "--out",
        &path(tmp.path(), "o"),
    ]);
    assert_eq!(code(&o), 64);
    assert!(!tmp.path().join("o").exists());
}

#[test]
fn error_classes_have_distinct_codes() {
    let tmp = TempDir::new().unwrap();
    let out = path(tmp.path(), "o");
    let missing = path(tmp.path(), "missing.csv");
    let io = selector(&["select", "--data", &missing, "--k", "1", "--out", &out]);
    let bad = write(tmp.path(), "bad.csv", "1,2\n3,x\n");
    let parse = selector(&["select", "--data", &bad, "--k", "1", "--out", &out]);
    let big = write(tmp.path(), "big.csv", &"1\n".repeat(25));
    let limit = selector(&[
        "enumerate",
        "--data",
        &big,
        "--k",
        "2",
        "--target",
        "0,1",
        "--out",
        &out,
    ]);
    assert_eq!(code(&io), 74);
    assert_eq!(code(&parse), 65);
    assert_eq!(code(&limit), 70);
    assert!(String::from_utf8_lossy(&limit.stderr).contains("limit"));
}

#[test]
fn violated_constraint_exits_2_and_still_writes_the_report() {
    let tmp = TempDir::new().unwrap();
    let data = write(tmp.path(), "d.csv", "0,0\n1,0\n0,1\n1,1\n");
    let out = path(tmp.path(), "o");
    let o = selector(&[
        "select",
        "--data",
        &data,
        "--k",
        "1",
        "--penalty",
        "0",
        "--sense",
        "dispersed",
        "--solver",
        "sa",
        "--out",
        &out,
    ]);
    assert_eq!(code(&o), 2);
    let report = json(tmp.path().join("o/report.json"));
    assert_eq!(report["report"]["constraint_satisfied"], false);
    assert_eq!(json(tmp.path().join("o/manifest.json"))["exit_code"], 2);
}

#[test]
fn manifest_hashes_match_artifacts() {
    let tmp = TempDir::new().unwrap();
    let out = path(tmp.path(), "g");
    run_ok(&[
        "gen",
        "trig",
        "--curves",
        "3",
        "--samples",
        "8",
        "--seed",
        "11",
        "--out",
        &out,
    ]);
    let manifest = json(tmp.path().join("g/manifest.json"));
    assert_eq!(manifest["command"], "gen trig");
    assert_eq!(manifest["config"]["seed"], 11);
    let artifacts = manifest["artifacts"].as_array().unwrap();
    assert_eq!(artifacts.len(), 2);
    for a in artifacts {
        let bytes = fs::read(tmp.path().join("g").join(a["file"].as_str().unwrap())).unwrap();
        assert_eq!(
            a["sha256"].as_str().unwrap(),
            hex::encode(Sha256::digest(&bytes))
        );
        assert_eq!(a["bytes"].as_u64().unwrap() as usize, bytes.len());
    }
}

#[test]
fn sweep_noise_free_is_exact() {
    let tmp = TempDir::new().unwrap();
    let out = path(tmp.path(), "s");
    run_ok(&[
        "sweep-sigma",
        "--sigmas",
        "0.0",
        "--trials",
        "10",
        "--curves",
        "5",
        "--samples",
        "20",
        "--sense",
        "dispersed",
        "--format",
        "csv",
        "--out",
        &out,
    ]);
    let text = fs::read_to_string(tmp.path().join("s/sweep.csv")).unwrap();
    assert_eq!(text, "sigma,trials,accuracy,wrong_size\n0,10,1,0\n");
}

#[test]
fn sweep_single_trial_is_all_or_nothing() {
    let tmp = TempDir::new().unwrap();
    let out = path(tmp.path(), "s");
    run_ok(&[
        "sweep-sigma",
        "--sigmas",
        "0.5,1,2",
        "--trials",
        "1",
        "--curves",
        "4",
        "--samples",
        "16",
        "--sense",
        "dispersed",
        "--out",
        &out,
    ]);
    let points = json(tmp.path().join("s/sweep.json"));
    assert_eq!(points.as_array().unwrap().len(), 3);
    for p in points.as_array().unwrap() {
        let acc = p["accuracy"].as_f64().unwrap();
        assert!(acc == 0.0 || acc == 1.0);
    }
}

#[test]
fn reconstruct_full_selection_tracks_exactly() {
    let tmp = TempDir::new().unwrap();
    let prices = gen_prices(tmp.path(), "6");
    let out = path(tmp.path(), "r");
    run_ok(&[
        "reconstruct",
        "--prices",
        &prices,
        "--ks",
        "2,6,12",
        "--format",
        "csv",
        "--out",
        &out,
    ]);
    let mse = fs::read_to_string(tmp.path().join("r/mse.csv")).unwrap();
    let last = mse.lines().last().unwrap();
    assert!(last.starts_with("12,0,"), "{last}");
    let series = fs::read_to_string(tmp.path().join("r/series.csv")).unwrap();
    let header = series.lines().next().unwrap();
    assert!(header.starts_with("date,proxy,proxy_cum,subset_k2,subset_k2_cum"));
    assert_eq!(series.lines().count(), 1 + 253);

    let too_big = selector(&[
        "reconstruct",
        "--prices",
        &prices,
        "--ks",
        "13",
        "--out",
        &out,
    ]);
    assert_eq!(code(&too_big), 64);
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = TempDir::new().unwrap();
    let prices = gen_prices(tmp.path(), "4");
    let mut outputs = Vec::new();
    for (run, threads) in [("a", "1"), ("b", "3")] {
        let out = path(tmp.path(), run);
        run_ok(&[
            "reconstruct",
            "--prices",
            &prices,
            "--ks",
            "2,3",
            "--solver",
            "sa",
            "--reads",
            "50",
            "--seed",
            "5",
            "--threads",
            threads,
            "--out",
            &out,
        ]);
        outputs.push((
            fs::read(tmp.path().join(run).join("mse.json")).unwrap(),
            fs::read(tmp.path().join(run).join("series.csv")).unwrap(),
        ));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn enumerate_reports_every_state_and_places_the_optimum_first() {
    let tmp = TempDir::new().unwrap();
    let gen = path(tmp.path(), "gen");
    run_ok(&[
        "gen",
        "sde",
        "--dims",
        "3",
        "--realizations",
        "6",
        "--sampler",
        "uniform:-1:1",
        "--out",
        &gen,
    ]);
    let data = path(&tmp.path().join("gen"), "data.csv");
    let out = path(tmp.path(), "e");
    run_ok(&[
        "enumerate",
        "--data",
        &data,
        "--k",
        "3",
        "--metric",
        "euclidean",
        "--out",
        &out,
    ]);
    let all = json(tmp.path().join("e/enumerate.json"));
    assert_eq!(all["evaluated"], 262_144);

    run_ok(&[
        "enumerate",
        "--data",
        &data,
        "--k",
        "3",
        "--k-filter",
        "3",
        "--out",
        &out,
    ]);
    let filtered = json(tmp.path().join("e/enumerate.json"));
    assert_eq!(filtered["evaluated"], 816);
    assert_eq!(filtered["target_percentile"], 0.0);
}

#[test]
fn enumerate_refuses_25_rows_unfiltered() {
    let tmp = TempDir::new().unwrap();
    let rows: String = (0..25).map(|i| format!("{i},{}\n", i * i)).collect();
    let data = write(tmp.path(), "d.csv", &rows);
    let o = selector(&[
        "enumerate",
        "--data",
        &data,
        "--k",
        "2",
        "--target",
        "0,1",
        "--out",
        &path(tmp.path(), "e"),
    ]);
    assert_eq!(code(&o), 70);
}

#[test]
fn compiled_model_matches_the_direct_objective() {
    let tmp = TempDir::new().unwrap();
    let data = write(tmp.path(), "d.csv", "0,0\n3,4\n");
    let out = path(tmp.path(), "c");
    run_ok(&[
        "compile",
        "--data",
        &data,
        "--k",
        "1",
        "--penalty",
        "2",
        "--out",
        &out,
    ]);
    let model =
        QuboModel::from_json(&fs::read_to_string(tmp.path().join("c/qubo.json")).unwrap()).unwrap();
    let coo =
        QuboModel::read_coordinate(fs::read(tmp.path().join("c/qubo.coo")).unwrap().as_slice())
            .unwrap();
    let d = DistanceMatrix::from_full(&[vec![0.0, 5.0], vec![5.0, 0.0]]).unwrap();
    let problem = SelectorProblem::new(d, 1, 2.0).unwrap();
    for bits in [[false, false], [true, false], [false, true], [true, true]] {
        let direct = evaluate_cost(&problem, &bits).unwrap();
        assert!((model.energy(&bits) - direct).abs() < 1e-12);
        assert!((coo.energy(&bits) - direct).abs() < 1e-12);
    }
    assert_eq!(model.cardinality(), Some(1));
}

#[test]
fn weighted_compile_agrees_with_merged_penalty() {
    let tmp = TempDir::new().unwrap();
    let data = write(tmp.path(), "d.csv", "0,0\n0.2,0.9\n0.7,0.1\n0.5,0.5\n");
    let (w, u) = (path(tmp.path(), "w"), path(tmp.path(), "u"));
    let args = ["--data", &data, "--k", "2", "--sense", "dispersed"];
    run_ok(
        &[
            &["compile"],
            &args[..],
            &["--penalty", "2", "--weight-digits", "1", "--out", &w],
        ]
        .concat(),
    );
    run_ok(&[&["compile"], &args[..], &["--penalty", "4", "--out", &u]].concat());
    let solve = |dir: &str| {
        let out = format!("{dir}/s");
        run_ok(&[
            "solve",
            "--qubo",
            &format!("{dir}/qubo.json"),
            "--out",
            &out,
        ]);
        let r = json(PathBuf::from(out).join("report.json"));
        r["best_bits"].as_str().unwrap()[..4].to_string()
    };
    assert_eq!(solve(&w), solve(&u));
}

#[test]
fn solve_reads_coordinate_files_with_explicit_k() {
    let tmp = TempDir::new().unwrap();
    let qubo = write(
        tmp.path(),
        "m.coo",
        "# offset 0\n# num_vars 3\n0 0 -1\n1 1 -1\n2 2 -1\n",
    );
    let out = path(tmp.path(), "o");
    let o = selector(&[
        "solve", "--qubo", &qubo, "--k", "1", "--format", "csv", "--out", &out,
    ]);
    assert_eq!(code(&o), 2);
    let text = fs::read_to_string(tmp.path().join("o/report.csv")).unwrap();
    assert!(
        text.lines().nth(1).unwrap().ends_with(",0;1;2,111"),
        "{text}"
    );
}

#[test]
fn trials_write_one_row_per_trial() {
    let tmp = TempDir::new().unwrap();
    let data = write(tmp.path(), "d.csv", "0,0\n1,0\n0,1\n1,1\n2,2\n");
    let c = path(tmp.path(), "c");
    run_ok(&["compile", "--data", &data, "--k", "2", "--out", &c]);
    let qubo = format!("{c}/qubo.json");
    let mut files = Vec::new();
    for threads in ["1", "4"] {
        let out = path(tmp.path(), &format!("t{threads}"));
        run_ok(&[
            "trials",
            "--qubo",
            &qubo,
            "--trials",
            "7",
            "--solver",
            "tabu",
            "--threads",
            threads,
            "--format",
            "csv",
            "--out",
            &out,
        ]);
        files.push(fs::read_to_string(PathBuf::from(out).join("trials.csv")).unwrap());
    }
    assert_eq!(files[0], files[1]);
    assert_eq!(files[0].lines().count(), 8);
}
