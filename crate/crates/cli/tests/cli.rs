use std::fmt::Write as _;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sthawkes"))
        .args(args)
        .env("STHAWKES_LOG", "off")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn data_rows(path: &Path) -> usize {
    std::fs::read_to_string(path).unwrap().lines().count() - 1
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// 40 separated events outside the July holiday, 10 near-duplicates of the
/// first ten, and 5 events on July 2. The window starts 2011-06-25.
fn raw_planar(dir: &Path) -> std::path::PathBuf {
    let mut csv = String::from("x_km,y_km,t_days\n");
    for i in 0..40 {
        let t = if i < 20 {
            0.25 * i as f64
        } else {
            12.0 + 0.25 * (i - 20) as f64
        };
        let (x, y) = (0.5 + (i % 8) as f64, 0.5 + (i / 8) as f64);
        writeln!(csv, "{x},{y},{t}").unwrap();
        if i < 10 {
            // 20 m and 10 s away
            writeln!(csv, "{},{y},{}", x + 0.02, t + 10.0 / 86_400.0).unwrap();
        }
    }
    for k in 0..5 {
        writeln!(csv, "{},9.0,{}", 1.0 + k as f64, 7.2 + 0.1 * k as f64).unwrap();
    }
    let path = dir.join("raw.csv");
    std::fs::write(&path, csv).unwrap();
    path
}

fn simulated(dir: &Path) -> std::path::PathBuf {
    let out = dir.join("sim");
    let o = run(&[
        "simulate",
        "--out",
        p(&out),
        "--side-km",
        "4",
        "--window-days",
        "20",
        "--seed",
        "5",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    out.join("catalog.csv")
}

#[test]
fn ingest_merges_duplicates_and_removes_holidays() {
    let dir = TempDir::new().unwrap();
    let raw = raw_planar(dir.path());
    let out = dir.path().join("ingested");
    let o = run(&[
        "ingest",
        "--input",
        p(&raw),
        "--out",
        p(&out),
        "--window-start",
        "2011-06-25",
        "--window-days",
        "30",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(data_rows(&out.join("catalog.csv")), 40);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("filter_report.json")).unwrap())
            .unwrap();
    assert_eq!(report[0]["removed_count"], 10);
    assert_eq!(report[1]["removed_count"], 5);
    let manifest = std::fs::read_to_string(out.join("manifest.txt")).unwrap();
    assert!(manifest.contains("merge_minutes = 1"));
}

#[test]
fn ingest_without_holiday_filter_keeps_holiday_events() {
    let dir = TempDir::new().unwrap();
    let raw = raw_planar(dir.path());
    let out = dir.path().join("ingested");
    let o = run(&[
        "ingest",
        "--input",
        p(&raw),
        "--out",
        p(&out),
        "--window-days",
        "30",
        "--no-holiday-filter",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(data_rows(&out.join("catalog.csv")), 45);
}

#[test]
fn ingest_without_anchor_needs_opt_out() {
    let dir = TempDir::new().unwrap();
    let raw = raw_planar(dir.path());
    let o = run(&[
        "ingest",
        "--input",
        p(&raw),
        "--out",
        p(&dir.path().join("x")),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--no-holiday-filter"));
}

#[test]
fn missing_input_names_the_path() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("no_such_catalog.csv");
    let o = run(&[
        "ingest",
        "--input",
        p(&missing),
        "--out",
        p(&dir.path().join("x")),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error[data]:"));
    assert!(stderr(&o).contains("no_such_catalog.csv"));
}

#[test]
fn bad_flag_is_a_usage_error() {
    let o = run(&["fit", "--no-such-flag"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(run(&["--help"]).status.success());
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let dir = TempDir::new().unwrap();
    let config = dir.path().join("run.conf");
    std::fs::write(
        &config,
        "# test config\nside_km = 3\nwindow_days = 10\nseed = 9\n",
    )
    .unwrap();
    let out = dir.path().join("sim");
    let o = run(&[
        "--config",
        p(&config),
        "simulate",
        "--out",
        p(&out),
        "--window-days",
        "5",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let manifest = std::fs::read_to_string(out.join("manifest.txt")).unwrap();
    assert!(manifest.contains("side_km = 3"));
    assert!(manifest.contains("window_days = 5"));
    assert!(manifest.contains("seed = 9"));
}

#[test]
fn simulate_without_excitation_has_no_offspring() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("sim");
    let o = run(&[
        "simulate",
        "--out",
        p(&out),
        "--theta",
        "0",
        "--side-km",
        "3",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(data_rows(&out.join("parentage.csv")), 0);
    assert!(data_rows(&out.join("catalog.csv")) > 0);
}

#[test]
fn simulate_rejects_supercritical_theta() {
    let dir = TempDir::new().unwrap();
    let o = run(&[
        "simulate",
        "--out",
        p(&dir.path().join("s")),
        "--theta",
        "1.2",
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn fit_writes_summary_and_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let catalog = simulated(dir.path());
    let fit = |name: &str| {
        let out = dir.path().join(name);
        let o = run(&[
            "fit",
            "--catalog",
            p(&catalog),
            "--out",
            p(&out),
            "--chains",
            "2",
            "--iterations",
            "60",
            "--warmup",
            "30",
            "--seed",
            "11",
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        assert!(stdout(&o).contains("theta"));
        out
    };
    let a = fit("fit_a");
    let b = fit("fit_b");
    for file in ["summary.csv", "traceplot.csv", "decomposition.csv"] {
        assert_eq!(
            std::fs::read(a.join(file)).unwrap(),
            std::fs::read(b.join(file)).unwrap(),
            "{file}"
        );
    }
    assert_eq!(data_rows(&a.join("summary.csv")), 4);
    assert_eq!(data_rows(&a.join("traceplot.csv")), 2 * 30 * 4);
    assert!(a.join("background_spatial.csv").exists());
}

#[test]
fn fit_with_nuts_reports_tree_depth_hits() {
    let dir = TempDir::new().unwrap();
    let catalog = simulated(dir.path());
    let out = dir.path().join("nuts");
    let o = run(&[
        "fit",
        "--catalog",
        p(&catalog),
        "--out",
        p(&out),
        "--sampler",
        "nuts",
        "--max-tree-depth",
        "6",
        "--chains",
        "2",
        "--iterations",
        "60",
        "--warmup",
        "30",
        "--seed",
        "4",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let chains = std::fs::read_to_string(out.join("chains.csv")).unwrap();
    assert!(chains.starts_with("chain,acceptance,divergences,max_depth_hits,step_size\n"));
    assert_eq!(data_rows(&out.join("chains.csv")), 2);
    let bad = run(&[
        "fit",
        "--catalog",
        p(&catalog),
        "--out",
        p(&out),
        "--sampler",
        "gibbs",
    ]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn fit_bandwidth_sweep_writes_one_row_per_pair() {
    let dir = TempDir::new().unwrap();
    let catalog = simulated(dir.path());
    let out = dir.path().join("sweep");
    let o = run(&[
        "fit",
        "--catalog",
        p(&catalog),
        "--out",
        p(&out),
        "--bandwidth-sweep",
        "--chains",
        "1",
        "--iterations",
        "20",
        "--warmup",
        "10",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(
        data_rows(&out.join("sweep.csv")),
        sthawkes::background::bandwidth_sweep().len()
    );
}

#[test]
fn knox_prints_the_contingency_table() {
    let dir = TempDir::new().unwrap();
    let catalog = simulated(dir.path());
    let out = dir.path().join("knox");
    let o = run(&[
        "knox",
        "--catalog",
        p(&catalog),
        "--out",
        p(&out),
        "--permutations",
        "99",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("close in space"));
    assert!(text.contains("far in time"));
    assert!(text.contains("p = "));
    assert_eq!(data_rows(&out.join("knox.csv")), 1);
}

#[test]
fn knox_with_too_few_permutations_fails() {
    let dir = TempDir::new().unwrap();
    let catalog = simulated(dir.path());
    let out = dir.path().join("knox");
    let o = run(&[
        "knox",
        "--catalog",
        p(&catalog),
        "--out",
        p(&out),
        "--permutations",
        "10",
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn kfun_writes_grid() {
    let dir = TempDir::new().unwrap();
    let catalog = simulated(dir.path());
    let out = dir.path().join("kf");
    let o = run(&[
        "kfun",
        "--catalog",
        p(&catalog),
        "--out",
        p(&out),
        "--s-grid",
        "0.1,0.5",
        "--t-grid",
        "0.1,1,2",
        "--replicates",
        "9",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(data_rows(&out.join("kfunction.csv")), 6);
}

#[test]
fn classify_and_predict_from_flags() {
    let dir = TempDir::new().unwrap();
    let catalog = simulated(dir.path());
    let params = [
        "--m0", "0.87", "--theta", "0.13", "--omega", "144", "--sigma", "0.126",
    ];

    let out = dir.path().join("cls");
    let mut args = vec!["classify", "--catalog", p(&catalog), "--out", p(&out)];
    args.extend(params);
    let o = run(&args);
    assert!(o.status.success(), "{}", stderr(&o));
    let decomposition = std::fs::read_to_string(out.join("decomposition.csv")).unwrap();
    assert!(decomposition.starts_with("x,y,t,endemic,excitatory,ratio_r,label"));

    let out = dir.path().join("pred");
    let mut args = vec![
        "predict",
        "--catalog",
        p(&catalog),
        "--out",
        p(&out),
        "--cell-km",
        "1",
        "--step-hours",
        "24",
    ];
    args.extend(params);
    let o = run(&args);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("correlation = "));
    // 4 x 4 cells x 20 days
    assert_eq!(data_rows(&out.join("prediction.csv")), 320);
}

#[test]
fn predict_requires_parameters() {
    let dir = TempDir::new().unwrap();
    let catalog = simulated(dir.path());
    let o = run(&[
        "predict",
        "--catalog",
        p(&catalog),
        "--out",
        p(&dir.path().join("p")),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--summary"));
}
