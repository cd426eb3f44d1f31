use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn mixmc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mixmc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = mixmc(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn read_csv(path: &Path) -> Vec<Vec<String>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_path(path).unwrap();
    rdr.records().map(|r| r.unwrap().iter().map(String::from).collect()).collect()
}

#[test]
fn same_seed_gives_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("x.csv");
    ok(&["synth", "--family", "gaussian", "--k", "3", "--n", "300", "--seed", "4", "--out", p(&data)]);
    let mut runs = Vec::new();
    for name in ["a", "b"] {
        let out = dir.path().join(name);
        ok(&[
            "fit", p(&data), "--out", p(&out), "--model", "gaussian", "--sigma2", "1", "--burnin", "50",
            "--sweeps", "200", "--seed", "17", "--chains", "2", "--record-assignments", "--consensus",
        ]);
        runs.push(out);
    }
    let mut compared = 0;
    for entry in fs::read_dir(&runs[0]).unwrap() {
        let name = entry.unwrap().file_name();
        if Path::new(&name).extension().is_some_and(|e| e == "csv") {
            assert_eq!(fs::read(runs[0].join(&name)).unwrap(), fs::read(runs[1].join(&name)).unwrap(), "{name:?}");
            compared += 1;
        }
    }
    assert!(compared >= 6);

    let other = dir.path().join("c");
    ok(&[
        "fit", p(&data), "--out", p(&other), "--model", "gaussian", "--sigma2", "1", "--burnin", "50",
        "--sweeps", "200", "--seed", "18",
    ]);
    assert_ne!(fs::read(runs[0].join("trace.csv")).unwrap(), fs::read(other.join("trace.csv")).unwrap());
}

#[test]
fn exit_codes_separate_config_and_data_errors() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("x.csv");
    fs::write(&data, "x\n1\n2\n3\n").unwrap();
    let out = dir.path().join("o");
    let code = |args: &[&str]| mixmc(args).status.code();

    assert_eq!(code(&["fit", p(&data), "--out", p(&out), "--model", "gaussian"]), Some(2));
    assert_eq!(code(&["fit", p(&data), "--out", p(&out), "--model", "poisson", "--sigma2", "1"]), Some(2));
    assert_eq!(code(&["fit", p(&data), "--out", p(&out), "--model", "null", "--eta", "-1"]), Some(2));
    assert_eq!(code(&["fit", p(&data), "--out", p(&out), "--model", "poisson", "--sweeps", "0"]), Some(2));

    let missing = dir.path().join("nope.csv");
    assert_eq!(code(&["fit", p(&missing), "--out", p(&out), "--model", "poisson"]), Some(3));
    let negative = dir.path().join("neg.csv");
    fs::write(&negative, "x\n1\n-2\n").unwrap();
    assert_eq!(code(&["fit", p(&negative), "--out", p(&out), "--model", "poisson"]), Some(3));
    let ragged = dir.path().join("ragged.csv");
    fs::write(&ragged, "a,b\nx,y\nz\n").unwrap();
    assert_eq!(code(&["fit", p(&ragged), "--out", p(&out), "--model", "categorical"]), Some(3));

    // Downstream commands on a directory that holds no fit.
    assert_eq!(code(&["diagnose", p(dir.path())]), Some(3));
    assert_eq!(code(&["mi", p(dir.path())]), Some(3));
}

#[test]
fn null_model_recovers_uniform_k_prior() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("six.csv");
    fs::write(&data, "a\nb\nc\nd\ne\nf\n").unwrap();
    let out = dir.path().join("o");
    ok(&["fit", p(&data), "--out", p(&out), "--model", "null", "--no-header", "--burnin", "100", "--sweeps", "40000"]);
    let rows = read_csv(&out.join("k_posterior.csv"));
    assert_eq!(rows[0], ["k", "probability", "weight"]);
    assert_eq!(rows.len(), 7);
    // 240000 near-independent steps; binomial sd of each share is below 0.001.
    for row in &rows[1..] {
        let prob: f64 = row[1].parse().unwrap();
        assert!((prob - 1.0 / 6.0).abs() < 0.01, "{row:?}");
    }
}

#[test]
fn categorical_levels_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("survey.csv");
    fs::write(&data, "colour,size\nred,big\nblue,big\nred,small\ngreen,big\n").unwrap();
    let out = dir.path().join("o");
    ok(&["fit", p(&data), "--out", p(&out), "--model", "categorical", "--sweeps", "100", "--record-assignments"]);
    let levels = read_csv(&out.join("levels.csv"));
    assert_eq!(levels[0], ["question", "name", "code", "level"]);
    let expected = [
        ["1", "colour", "0", "red"],
        ["1", "colour", "1", "blue"],
        ["1", "colour", "2", "green"],
        ["2", "size", "0", "big"],
        ["2", "size", "1", "small"],
    ];
    assert_eq!(levels[1..], expected.map(|r| r.map(String::from).to_vec()));

    let meta: serde_json::Value = serde_json::from_slice(&fs::read(out.join("metadata.json")).unwrap()).unwrap();
    assert_eq!(meta["data"]["cardinalities"], serde_json::json!([3, 2]));
    assert_eq!(meta["data"]["n_obs"], 4);
    assert_eq!(meta["run"]["seed"], 0);

    let stdout = ok(&["mi", p(&out)]);
    assert!(stdout.contains("colour") && stdout.contains("size"));
    let mi = read_csv(&out.join("mi.csv"));
    assert_eq!(mi[0], ["question", "name", "mi_bits"]);
    let bits: Vec<f64> = mi[1..].iter().map(|r| r[2].parse().unwrap()).collect();
    assert!(bits.windows(2).all(|w| w[0] >= w[1]));
}

#[test]
fn missing_cells_need_the_flag() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("gaps.csv");
    fs::write(&data, "q1,q2\na,x\nb,\na,y\n").unwrap();
    let out = dir.path().join("o");
    let rejected = mixmc(&["fit", p(&data), "--out", p(&out), "--model", "categorical"]);
    assert_eq!(rejected.status.code(), Some(3));

    ok(&["fit", p(&data), "--out", p(&out), "--model", "categorical", "--sweeps", "50", "--missing-as-category"]);
    let meta: serde_json::Value = serde_json::from_slice(&fs::read(out.join("metadata.json")).unwrap()).unwrap();
    assert_eq!(meta["data"]["cardinalities"], serde_json::json!([2, 3]));

    let sentinel = dir.path().join("na.csv");
    fs::write(&sentinel, "q1\na\nNA\nb\n").unwrap();
    let out2 = dir.path().join("o2");
    ok(&[
        "fit", p(&sentinel), "--out", p(&out2), "--model", "categorical", "--sweeps", "50",
        "--missing-as-category", "--missing-sentinel", "NA",
    ]);
    let meta: serde_json::Value = serde_json::from_slice(&fs::read(out2.join("metadata.json")).unwrap()).unwrap();
    assert_eq!(meta["data"]["cardinalities"], serde_json::json!([3]));
}

#[test]
fn poisson_fit_writes_plot_data() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("counts.csv");
    let labels = dir.path().join("labels.csv");
    ok(&[
        "synth", "--family", "poisson", "--means", "2,20", "--n", "400", "--seed", "5", "--out", p(&data),
        "--labels", p(&labels),
    ]);
    assert!(dir.path().join("counts.csv.json").exists());
    assert_eq!(read_csv(&labels).len(), 401);
    let out = dir.path().join("o");
    ok(&["fit", p(&data), "--out", p(&out), "--model", "poisson", "--burnin", "200", "--sweeps", "1000"]);
    let meta: serde_json::Value = serde_json::from_slice(&fs::read(out.join("metadata.json")).unwrap()).unwrap();
    assert_eq!(meta["map_k"], 2);

    let pmf = read_csv(&out.join("fitted_pmf.csv"));
    assert_eq!(pmf[0], ["x", "empirical", "fitted"]);
    let total_emp: f64 = pmf[1..].iter().map(|r| r[1].parse::<f64>().unwrap()).sum();
    assert!((total_emp - 1.0).abs() < 1e-12);

    let comps = read_csv(&out.join("components.csv"));
    assert_eq!(comps.len(), 3);
    let mut means: Vec<f64> = comps[1..].iter().map(|r| r[3].parse().unwrap()).collect();
    means.sort_by(f64::total_cmp);
    assert!((means[0] - 2.0).abs() < 0.5 && (means[1] - 20.0).abs() < 1.5, "{means:?}");

    let map = read_csv(&out.join("map_assignment.csv"));
    assert_eq!(map.len(), 401);
    assert_eq!(map[1][1], "1");
}

#[test]
fn downstream_commands_read_a_fit() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("x.csv");
    ok(&["synth", "--family", "gaussian", "--k", "2", "--n", "80", "--spacing", "10", "--seed", "1", "--out", p(&data)]);
    let out = dir.path().join("o");
    ok(&[
        "fit", p(&data), "--out", p(&out), "--model", "gaussian", "--sigma2", "1", "--burnin", "100",
        "--sweeps", "400", "--record-assignments",
    ]);
    let stdout = ok(&["diagnose", p(&out)]);
    assert!(stdout.contains("MAP k 2"), "{stdout}");
    assert!(out.join("diagnostics.json").exists());

    ok(&["consensus", p(&out), "--k", "2"]);
    let c = read_csv(&out.join("consensus.csv"));
    assert_eq!(c.len(), 80);
    for (i, row) in c.iter().enumerate() {
        assert_eq!(row[i], "1");
    }
    let spectral = read_csv(&out.join("spectral.csv"));
    assert_eq!(spectral[0], ["observation", "label", "v1", "v2"]);
    let mut labels: Vec<&str> = spectral[1..].iter().map(|r| r[1].as_str()).collect();
    labels.sort();
    labels.dedup();
    assert_eq!(labels, ["1", "2"]);

    // mi is for categorical fits only.
    assert_eq!(mixmc(&["mi", p(&out)]).status.code(), Some(2));
}

#[test]
fn large_consensus_is_refused_without_opt_in() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("big.csv");
    let body: String = (0..20_001).map(|i| format!("{}\n", i % 7)).collect();
    fs::write(&data, format!("x\n{body}")).unwrap();
    let out = dir.path().join("o");
    let res = mixmc(&["fit", p(&data), "--out", p(&out), "--model", "poisson", "--sweeps", "1", "--consensus"]);
    assert_eq!(res.status.code(), Some(2));
}
