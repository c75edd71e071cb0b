use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn toy(name: &str) -> String {
    root().join("data/toy").join(name).display().to_string()
}

fn phylolink(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_phylolink"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn fit(out: &Path, extra: &[&str]) -> Output {
    let edges = toy("edges.csv");
    let tree = toy("tree.nwk");
    let out = out.display().to_string();
    let mut args = vec![
        "fit", "--edges", &edges, "--tree", &tree, "--out", &out, "--seed", "11", "--iterations", "300",
        "--burn-in", "300", "--jobs", "1",
    ];
    args.extend_from_slice(extra);
    phylolink(&args)
}

#[test]
fn fit_writes_artifacts_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let o = fit(&a, &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(code(&fit(&b, &[])), 0);
    for f in ["trace.csv", "predictive.csv", "diagnostics.csv", "train_matrix.csv", "truth_matrix.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f} differs");
    }
    let trace = fs::read_to_string(a.join("trace.csv")).unwrap();
    assert!(trace.starts_with("sweep,eta,g,gamma:"));
    assert_eq!(trace.lines().count(), 301);
    assert!(!trace.contains('\r'));
    let manifest: serde_json::Value = serde_json::from_slice(&fs::read(a.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 11);
    assert_eq!(manifest["inputs"].as_array().unwrap().len(), 2);
    assert_eq!(manifest["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn fit_with_temporal_holdout() {
    let dir = tempfile::tempdir().unwrap();
    let o = fit(dir.path(), &["--with-g", "--set", "temporal_cutoff=1975"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let s = fs::read_to_string(dir.path().join("holdout_summary.csv")).unwrap();
    assert!(s.starts_with("auc,pct_ones_recovered,"));
    assert!(dir.path().join("holdout_roc.csv").is_file());
}

#[test]
fn missing_tree_for_phylogeny_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let edges = toy("edges.csv");
    let out = dir.path().display().to_string();
    let o = phylolink(&["fit", "--edges", &edges, "--out", &out, "--model", "full"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("tree"));
    let o = phylolink(&["fit", "--edges", &edges, "--tree", "/no/such/tree.nwk", "--out", &out]);
    assert_eq!(code(&o), 2);
}

#[test]
fn phylogeny_only_rejects_single_host_columns() {
    let dir = tempfile::tempdir().unwrap();
    let o = fit(dir.path(), &["--model", "phylo"]);
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
    let o = fit(dir.path(), &["--model", "phylo", "--drop-single-host"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    fs::write(
        &conf,
        format!(
            "edges = {}\ntree = {}\nmodel = affinity\niterations = 100\nburn_in = 100\nseed = 3\n",
            toy("edges.csv"),
            toy("tree.nwk")
        ),
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = phylolink(&[
        "fit",
        "--config",
        conf.to_str().unwrap(),
        "--iterations",
        "50",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let m: serde_json::Value = serde_json::from_slice(&fs::read(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["config"]["iterations"], "50");
    assert_eq!(m["config"]["model"], "affinity");

    fs::write(&conf, "edgez = x\n").unwrap();
    let o = phylolink(&["fit", "--config", conf.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("edgez"));
}

#[test]
fn bad_edges_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let edges = dir.path().join("edges.csv");
    fs::write(&edges, "host,parasite,year\na,x,1200\n").unwrap();
    let o = phylolink(&[
        "fit",
        "--edges",
        edges.to_str().unwrap(),
        "--model",
        "affinity",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 3);
}

#[test]
fn crossval_outputs_and_k1() {
    let dir = tempfile::tempdir().unwrap();
    let edges = toy("edges.csv");
    let tree = toy("tree.nwk");
    let out = dir.path().display().to_string();
    let base = [
        "crossval", "--edges", &edges, "--tree", &tree, "--out", &out, "--iterations", "200", "--burn-in", "200",
        "--models", "full,affinity,nn",
    ];
    let mut args = base.to_vec();
    args.extend(["--folds", "1"]);
    assert_eq!(code(&phylolink(&args)), 2);

    let mut args = base.to_vec();
    args.extend(["--folds", "2", "--set", "thresholds=exact"]);
    let o = phylolink(&args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let summary = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 4);
    for m in ["full", "affinity", "nn"] {
        assert!(dir.path().join(format!("roc_{m}.csv")).is_file());
        assert!(dir.path().join(format!("murphy_{m}.csv")).is_file());
    }
    let w = fs::read_to_string(dir.path().join("wilcoxon.csv")).unwrap();
    assert_eq!(w.lines().count(), 1 + 6);
    // Two folds are too few pairs for the signed-rank test.
    assert!(w.lines().skip(1).all(|l| l.ends_with(",NA")));
    assert!(dir.path().join("folds.csv").is_file());
}

#[test]
fn scan_row_count_and_empty_grid() {
    let dir = tempfile::tempdir().unwrap();
    let edges = toy("edges.csv");
    let tree = toy("tree.nwk");
    let out = dir.path().display().to_string();
    let run = |grid: &str| {
        phylolink(&[
            "scan", "--edges", &edges, "--tree", &tree, "--out", &out, "--set", "folds=2", "--set", grid,
        ])
    };
    assert_eq!(code(&run("grid=")), 2);
    let o = run("grid=identity");
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read_to_string(dir.path().join("scan.csv")).unwrap().lines().count(), 2);
    assert_eq!(code(&run("grid=identity,eb:-1,lambda:0.5")), 0);
    assert_eq!(fs::read_to_string(dir.path().join("scan.csv")).unwrap().lines().count(), 4);
    assert_eq!(code(&run("grid=lambda:2")), 2);
}

#[test]
fn simulate_is_seeded_and_fits() {
    let dir = tempfile::tempdir().unwrap();
    let sim = |name: &str, seed: &str| {
        let out = dir.path().join(name);
        let o = phylolink(&[
            "simulate",
            "--seed",
            seed,
            "--out",
            out.to_str().unwrap(),
            "--set",
            "sim_hosts=8",
            "--set",
            "sim_parasites=12",
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        out
    };
    let (a, b, c) = (sim("a", "5"), sim("b", "5"), sim("c", "6"));
    for f in ["edges.csv", "truth.csv", "tree.nwk"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap());
    }
    assert_ne!(fs::read(a.join("edges.csv")).unwrap(), fs::read(c.join("edges.csv")).unwrap());
    let truth = fs::read_to_string(a.join("truth.csv")).unwrap();
    assert_eq!(truth.lines().filter(|l| l.starts_with("gamma,")).count(), 8);
    assert_eq!(truth.lines().filter(|l| l.starts_with("rho,")).count(), 12);

    let out = dir.path().join("fit");
    let o = phylolink(&[
        "fit",
        "--edges",
        a.join("edges.csv").to_str().unwrap(),
        "--tree",
        a.join("tree.nwk").to_str().unwrap(),
        "--iterations",
        "100",
        "--burn-in",
        "100",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn report_on_fit_and_missing_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run");
    assert_eq!(code(&fit(&run, &["--set", "temporal_cutoff=1970"])), 0);
    let r1 = dir.path().join("r1");
    let r2 = dir.path().join("r2");
    for r in [&r1, &r2] {
        let o = phylolink(&["report", run.to_str().unwrap(), "--out", r.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    for f in [
        "degrees.csv",
        "degree_histogram.csv",
        "top_x.csv",
        "left_ordered_train.csv",
        "left_ordered_predictive.csv",
        "posterior_summary.csv",
    ] {
        assert_eq!(fs::read(r1.join(f)).unwrap(), fs::read(r2.join(f)).unwrap(), "{f}");
    }
    let top: Vec<usize> = fs::read_to_string(r1.join("top_x.csv"))
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert!(top.windows(2).all(|w| w[0] <= w[1]));

    fs::remove_file(run.join("trace.csv")).unwrap();
    let o = phylolink(&["report", run.to_str().unwrap(), "--out", r1.to_str().unwrap()]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("trace.csv"));
}
