use std::fs;
use std::process::{Command, Output};

use nk_core::output::{read_csv, read_json, CSV_HEADER};

fn nk_sim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nk-sim"))
        .args(args)
        .output()
        .expect("binary runs")
}

#[test]
fn default_study_csv_has_one_row_per_k_and_peaks_at_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("results.csv");
    let plot = dir.path().join("fig1.svg");
    let o = nk_sim(&[
        "simulate",
        "--n",
        "5",
        "--k",
        "0,1,2,3,4",
        "--runs",
        "5",
        "--sims",
        "10000",
        "--weights",
        "itdc",
        "--seed",
        "42",
        "--out",
        out.to_str().unwrap(),
        "--plot",
        plot.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().next().unwrap(), CSV_HEADER.join(","));
    let rows = read_csv(text.as_bytes()).unwrap();
    assert_eq!(rows.len(), 5);
    let best = rows
        .iter()
        .max_by(|a, b| a.mean_fitness.total_cmp(&b.mean_fitness))
        .unwrap();
    assert_eq!(best.k, 2);
    assert!(rows
        .iter()
        .all(|r| r.simulations == 50_000 && r.weights == "itdc"));

    let svg = fs::read_to_string(&plot).unwrap();
    assert!(svg.contains(r#"class="marker peak" data-k="2""#));
    let sidecar = fs::read_to_string(dir.path().join("fig1.tsv")).unwrap();
    assert_eq!(sidecar.lines().count(), 5);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let args = [
        "simulate", "--n", "5", "--k", "0", "--runs", "1", "--sims", "1", "--seed", "7",
    ];
    let a = nk_sim(&args);
    let b = nk_sim(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(String::from_utf8(a.stdout).unwrap().lines().count(), 2);

    let c = nk_sim(&[
        "simulate",
        "--k",
        "2,3",
        "--sims",
        "500",
        "--threads",
        "1",
        "--seed",
        "3",
    ]);
    let d = nk_sim(&[
        "simulate",
        "--k",
        "2,3",
        "--sims",
        "500",
        "--threads",
        "4",
        "--seed",
        "3",
    ]);
    assert_eq!(c.stdout, d.stdout);
}

#[test]
fn json_output_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("r.json");
    let csv = dir.path().join("r.csv");
    let common = [
        "simulate",
        "--k",
        "0,2",
        "--runs",
        "2",
        "--sims",
        "200",
        "--seed",
        "5",
        "--weights",
        "3,1,1,1,2",
    ];
    let o = nk_sim(
        &[
            &common[..],
            &["--format", "json", "--out", json.to_str().unwrap()],
        ]
        .concat(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = nk_sim(&[&common[..], &["--out", csv.to_str().unwrap()]].concat());
    assert!(o.status.success());

    let doc = read_json(fs::File::open(&json).unwrap()).unwrap();
    let rows = read_csv(fs::File::open(&csv).unwrap()).unwrap();
    assert_eq!(doc.results, rows);
    assert_eq!(doc.config.k_values, vec![0, 2]);
    assert_eq!(doc.config.weights, "betas:3;1;1;1;2");
    assert_eq!(doc.results[0].simulations, 400);
}

#[test]
fn records_file_lists_every_simulation() {
    let dir = tempfile::tempdir().unwrap();
    let rec = dir.path().join("records.csv");
    let o = nk_sim(&[
        "simulate",
        "--k",
        "1",
        "--runs",
        "2",
        "--sims",
        "3",
        "--records",
        rec.to_str().unwrap(),
        "--landscape-mode",
        "fixed-per-run",
        "--strategy",
        "steepest",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(rec).unwrap();
    assert_eq!(text.lines().count(), 7);
    assert!(text.starts_with("k,run,sim,start,endpoint,fitness,moves,evaluations,terminated"));
}

#[test]
fn census_reports_optima_count() {
    let o = nk_sim(&[
        "census",
        "--n",
        "4",
        "--k",
        "3",
        "--samples",
        "1000",
        "--seed",
        "9",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let mean = v["summary"]["mean_optima_count"].as_f64().unwrap();
    let se = v["summary"]["optima_count_stderr"].as_f64().unwrap();
    assert!((mean - 3.2).abs() < 4.0 * se, "{mean} ± {se}");
    assert_eq!(
        v["random_landscape_optima_expectation"].as_f64().unwrap(),
        3.2
    );
    assert!(v.get("landscape").is_none());

    let one = nk_sim(&["census", "--n", "3", "--k", "1", "--samples", "1"]);
    let v: serde_json::Value = serde_json::from_slice(&one.stdout).unwrap();
    let optima = v["landscape"]["local_optima"].as_array().unwrap();
    let basins: u64 = optima
        .iter()
        .map(|o| o["basin_size"].as_u64().unwrap())
        .sum();
    assert_eq!(basins, 8);
}

#[test]
fn walk_prints_a_trace() {
    let o = nk_sim(&["walk", "--k", "2", "--start", "00000", "--seed", "1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let steps = v["trace"]["steps"].as_array().unwrap();
    assert_eq!(steps[0]["genotype"], "00000");
    assert_eq!(v["trace"]["terminated_at_local_optimum"], true);
    let fits: Vec<f64> = steps
        .iter()
        .map(|s| s["fitness"].as_f64().unwrap())
        .collect();
    assert!(fits.windows(2).all(|w| w[1] > w[0]));

    let lj = nk_sim(&[
        "walk",
        "--strategy",
        "longjump",
        "--jump-width",
        "5",
        "--max-evals",
        "20",
    ]);
    assert!(lj.status.success());
    let v: serde_json::Value = serde_json::from_slice(&lj.stdout).unwrap();
    assert_eq!(v["strategy"], "long_jump(w=5)");
    assert_eq!(v["trace"]["evaluations_used"], 20);
}

#[test]
fn bad_input_exits_with_code_2() {
    for args in [
        &["simulate", "--bogus"][..],
        &["simulate", "--k", "5"],
        &["simulate", "--n", "4"],
        &["simulate", "--weights", "1,-1,1,1,1"],
        &["simulate", "--runs", "0"],
        &["simulate", "--strategy", "longjump", "--jump-width", "9"],
        &["simulate", "--max-evals", "2"],
        &["census", "--n", "30", "--k", "1", "--weights", "equal"],
        &["walk", "--start", "0101"],
        &["walk", "--start", "01x01"],
        &["frobnicate"],
        &[],
    ] {
        let o = nk_sim(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!o.stderr.is_empty(), "{args:?}");
    }
}

#[test]
fn unwritable_output_is_a_runtime_failure() {
    let o = nk_sim(&[
        "simulate",
        "--k",
        "0",
        "--sims",
        "10",
        "--out",
        "/nonexistent-dir/x.csv",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nonexistent-dir"));
}

#[test]
fn cli_matches_library() {
    use nk_core::experiment::{run_experiment, ExperimentConfig};
    let o = nk_sim(&[
        "simulate", "--k", "1,3", "--runs", "2", "--sims", "300", "--seed", "11",
    ]);
    let rows = read_csv(&o.stdout[..]).unwrap();
    let lib = run_experiment(&ExperimentConfig {
        k_values: vec![1, 3],
        runs: 2,
        sims_per_run: 300,
        master_seed: 11,
        ..ExperimentConfig::default()
    })
    .unwrap();
    let from_cli: Vec<_> = rows.iter().map(|r| r.summary()).collect();
    assert_eq!(from_cli, lib);
}

#[test]
fn help_exits_zero() {
    let o = nk_sim(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("simulate"));
}
