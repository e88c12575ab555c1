use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use superbunch::analysis::{mean_and_sd, visibility_from_g2};
use superbunch::imaging::default_double_slit;

/// Runs the binary with a whitespace-separated command line.
fn superbunch(line: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_superbunch")).args(line.split_whitespace()).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn write_object(dir: &Path, json: &str) -> PathBuf {
    let path = dir.join("obj.json");
    std::fs::write(&path, json).unwrap();
    path
}

const DOUBLE_SLIT: &str = r#"{"period_bins": 100, "segments": [
    {"start": 20, "width": 10, "height": 0.5},
    {"start": 60, "width": 5, "height": 1.0}]}"#;

fn read_table(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(str::to_owned).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(str::to_owned).collect()).collect();
    (header, rows)
}

fn column(path: &Path, name: &str) -> Vec<f64> {
    let (header, rows) = read_table(path);
    let i = header.iter().position(|h| h == name).unwrap();
    rows.iter().map(|r| r[i].parse().unwrap()).collect()
}

#[test]
fn simulate_thermal_example() {
    let tmp = tempfile::tempdir().unwrap();
    let obj = write_object(tmp.path(), DOUBLE_SLIT);
    let out = tmp.path().join("img.csv");
    let run = |path: &Path| {
        superbunch(&format!(
            "simulate --rg-count 1 --periods 100000 --bins 100 --object {} --seed 7 --out {}",
            obj.display(),
            path.display()
        ))
    };
    let res = run(&out);
    assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stderr));
    let (header, _) = read_table(&out);
    assert_eq!(header, ["bin", "g2", "stderr", "object_amplitude"]);
    let g2 = column(&out, "g2");
    let slit2 = g2[60..65].iter().sum::<f64>() / 5.0;
    assert!((slit2 - 1.1).abs() < 0.005, "slit-2 mean {slit2}");
    assert_eq!(column(&out, "object_amplitude")[62], 1.0);

    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.with_extension("json")).unwrap()).unwrap();
    assert_eq!(meta["rg_count"], 1);
    assert_eq!(meta["seed"], 7);
    assert_eq!(meta["periods"], 100000);
    assert!(meta["workers"].as_u64().unwrap() >= 1);
    assert_eq!(meta["version"], env!("CARGO_PKG_VERSION"));

    let again = tmp.path().join("again.csv");
    assert_eq!(code(&run(&again)), 0);
    assert_eq!(std::fs::read(&out).unwrap(), std::fs::read(&again).unwrap());
}

#[test]
fn worker_count_does_not_change_image() {
    let tmp = tempfile::tempdir().unwrap();
    let paths: Vec<PathBuf> = ["1", "3"]
        .iter()
        .map(|w| {
            let out = tmp.path().join(format!("w{w}.csv"));
            let res = superbunch(&format!(
                "simulate --rg-count 3 --periods 5000 --seed 2 --workers {} --out {}",
                w,
                out.display()
            ));
            assert_eq!(code(&res), 0);
            out
        })
        .collect();
    assert_eq!(std::fs::read(&paths[0]).unwrap(), std::fs::read(&paths[1]).unwrap());
}

#[test]
fn usage_errors_exit_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("x.csv");
    let out = out.to_str().unwrap();
    assert_eq!(code(&superbunch(&format!("simulate --periods 0 --out {}", out))), 2);
    assert_eq!(code(&superbunch(&format!("simulate --rg-count 0 --out {}", out))), 2);
    assert_eq!(code(&superbunch(&format!("simulate --bins 50 --out {}", out))), 2);
    assert_eq!(code(&superbunch(&format!("simulate --object /nonexistent/obj.json --out {}", out))), 2);
    assert_eq!(code(&superbunch("simulate --no-such-flag")), 2);
    assert_eq!(code(&superbunch(&format!("theory --bands 1.0 --rg-count 2 --out {}", out))), 2);
    assert_eq!(code(&superbunch(&format!("histogram --bins 1 --out {}", out))), 2);
    assert_eq!(code(&superbunch(&format!("stats --runs 0 --out {}", out))), 2);
    let bad = write_object(tmp.path(), r#"{"period_bins": 10, "segments": [{"start": 8, "width": 5, "height": 1.0}]}"#);
    assert_eq!(code(&superbunch(&format!("simulate --object {} --out {}", bad.display(), out))), 2);
    std::fs::write(&bad, "not json").unwrap();
    assert_eq!(code(&superbunch(&format!("simulate --object {} --out {}", bad.display(), out))), 2);
}

#[test]
fn degenerate_object_exits_with_three() {
    let tmp = tempfile::tempdir().unwrap();
    let opaque = write_object(tmp.path(), r#"{"period_bins": 20, "segments": []}"#);
    let out = tmp.path().join("x.csv");
    let res = superbunch(&format!("simulate --object {} --periods 10 --out {}", opaque.display(), out.display()));
    assert_eq!(code(&res), 3, "{}", String::from_utf8_lossy(&res.stderr));
    let res = superbunch(&format!("theory --object {} --out {}", opaque.display(), out.display()));
    assert_eq!(code(&res), 3);
}

#[test]
fn white_noise_theory_examples() {
    let tmp = tempfile::tempdir().unwrap();
    let obj = write_object(tmp.path(), DOUBLE_SLIT);
    let out = tmp.path().join("theory.csv");
    let res =
        superbunch(&format!("theory --white-noise --rg-count 6 --object {} --out {}", obj.display(), out.display()));
    assert_eq!(code(&res), 0);
    let g2 = column(&out, "g2");
    assert!(g2[60..65].iter().all(|&g| (g - 7.3).abs() < 1e-12), "{:?}", &g2[60..65]);
    assert!(g2[20..30].iter().all(|&g| (g - 4.15).abs() < 1e-12));
    let meta = std::fs::read_to_string(out.with_extension("json")).unwrap();
    assert!(meta.contains("white-noise"), "{meta}");

    let flat =
        write_object(tmp.path(), r#"{"period_bins": 10, "segments": [{"start": 0, "width": 10, "height": 1.0}]}"#);
    let res =
        superbunch(&format!("theory --white-noise --rg-count 1 --object {} --out {}", flat.display(), out.display()));
    assert_eq!(code(&res), 0);
    let g2 = column(&out, "g2");
    assert!(g2.iter().all(|&g| g == g2[0]));
}

#[test]
fn kernel_theory_records_bands() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("theory.csv");
    let res = superbunch(&format!(
        "theory --rg-count 2 --bands 3.0,4.0 --model piecewise-constant --step 0.25 --boundary truncated --out {}",
        out.display()
    ));
    assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stderr));
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.with_extension("json")).unwrap()).unwrap();
    assert_eq!(meta["curve"]["bands"], serde_json::json!([3.0, 4.0]));
    assert_eq!(meta["curve"]["options"]["boundary"], "truncated");
    assert_eq!(meta["curve"]["options"]["model"], "piecewise-constant");
    assert_eq!(column(&out, "g2").len(), 100);
}

#[test]
fn stats_single_run_grid() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("stats.csv");
    let res = superbunch(&format!("stats --rg-counts 1,2 --samples-per-run 100,1000 --runs 1 --out {}", out.display()));
    assert_eq!(code(&res), 0);
    let (header, rows) = read_table(&out);
    assert_eq!(header, ["rg_count", "samples_per_run", "mean_g2", "sd_g2", "runs", "theory_g2"]);
    assert_eq!(rows.len(), 4);
    assert_eq!(column(&out, "theory_g2"), [2.0, 2.0, 4.0, 4.0]);
    assert_eq!(column(&out, "sd_g2"), [0.0; 4]);
}

#[test]
fn thermal_histogram_decreases() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("hist.csv");
    let res =
        superbunch(&format!("histogram --rg-count 1 --mean-intensity 5000 --samples 50000 --out {}", out.display()));
    assert_eq!(code(&res), 0);
    let (header, rows) = read_table(&out);
    assert_eq!(header, ["bin_low", "bin_high", "probability"]);
    assert_eq!(rows.len(), 51);
    assert_eq!(rows[50][1], "inf");
    let p = column(&out, "probability");
    assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    // Counts are large enough for a strict decrease over the first bins.
    assert!(p[..10].windows(2).all(|w| w[1] < w[0]), "{:?}", &p[..10]);
    assert_eq!(column(&out, "bin_high")[49], 50_000.0);

    let res = superbunch(&format!("histogram --rg-count 6 --range-max auto --bins 10 --out {}", out.display()));
    assert_eq!(code(&res), 0);
    assert!(column(&out, "probability")[0] > 0.9);
}

#[test]
fn default_output_directory_follows_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let res = Command::new(env!("CARGO_BIN_EXE_superbunch"))
        .args(["theory", "--white-noise"])
        .env("SUPERBUNCH_OUT_DIR", tmp.path())
        .output()
        .unwrap();
    assert_eq!(code(&res), 0);
    assert!(tmp.path().join("theory.csv").exists());
    assert!(tmp.path().join("theory.json").exists());
}

/// Re-reading the reproduce tables and recomputing derived values gives the
/// summary numbers bit-for-bit; a rerun gives identical files.
#[test]
fn reproduce_tables_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let dir = tmp.path().join(name);
        let res = superbunch(&format!("reproduce --seed 5 --workers 1 --periods 3000 --seeds 3 --stage-study-runs 4 --block-study-runs 4 --out-dir {}", dir.display()));
        assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stderr));
        dir
    };
    let dir = run("a");
    let object = default_double_slit();
    let (peak, background) = (object.peak_bins(), object.background_bins());

    let runs = dir.join("visibility_runs.csv");
    let (_, run_rows) = read_table(&runs);
    let run_vis = column(&runs, "visibility");
    let table_vis = column(&dir.join("visibility.csv"), "visibility");
    for n in 1..=6usize {
        let g2 = column(&dir.join(format!("images/image_N{n}.csv")), "g2");
        let v = visibility_from_g2(&g2, &peak, &background).unwrap().visibility;
        let first = run_rows.iter().position(|r| r[0] == n.to_string()).unwrap();
        assert_eq!(run_rows[first][1], "5");
        assert_eq!(v, run_vis[first], "N={n}");
        let (mean, _) = mean_and_sd(&run_vis[first..first + 3]);
        assert_eq!(mean, table_vis[n - 1]);
    }

    let (_, summary) = read_table(&dir.join("summary.csv"));
    let measured = |name: &str| -> f64 { summary.iter().find(|r| r[0] == name).unwrap()[1].parse().unwrap() };
    assert_eq!(measured("visibility_N1"), table_vis[0]);
    assert_eq!(measured("visibility_N6"), table_vis[5]);
    let stage = dir.join("sd_vs_rg_count.csv");
    assert_eq!(measured("g2_zero_N3"), column(&stage, "mean_g2")[2]);
    let first_bin: f64 = read_table(&dir.join("histograms/histogram_N6.csv")).1[0][2].parse().unwrap();
    assert_eq!(measured("histogram_first_bin_N6"), first_bin);

    let again = run("b");
    for file in [
        "summary.csv",
        "summary.json",
        "metadata.json",
        "visibility.csv",
        "images/image_N4.csv",
        "sd_vs_block_size.csv",
    ] {
        assert_eq!(std::fs::read(dir.join(file)).unwrap(), std::fs::read(again.join(file)).unwrap(), "{file}");
    }
}
