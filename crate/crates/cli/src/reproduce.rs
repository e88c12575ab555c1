//! The full battery of studies in one timestamp-free directory.
//!
//! Layout:
//!
//! ```text
//! images/image_N{n}.csv          one seed's image per stage count
//! images/theory_N{n}.csv         independent-bin closed form
//! visibility.csv                 mean over seeds with spreads and prediction
//! visibility_runs.csv            one row per (stage count, seed)
//! sd_vs_rg_count.csv             g²(0) estimator, n = 20000
//! histograms/histogram_N{n}.csv  μ = 5000, 5·10⁴ samples
//! sd_vs_block_size.csv           g²(0) estimator over block sizes
//! summary.csv, summary.json      checks with pass/fail flags
//! metadata.json                  parameters
//! ```
//!
//! A failed check is reported in the summary and does not change the exit
//! status; a stage that errors stops the run and leaves earlier files.

use std::path::{Path, PathBuf};

use serde::Serialize;
use superbunch::analysis::{
    default_bin_sets, default_histogram, sd_vs_n_study, visibility_study, StudyConfig, StudyResult,
};
use superbunch::imaging::{default_double_slit, SimulationConfig};
use superbunch::source::{sample_block, SourceConfig};
use superbunch::theory::{predicted_visibility, white_noise_image};

use crate::args::ReproduceArgs;
use crate::cells;
use crate::commands::{default_workers, histogram_table, image_table, init_pool, study_table, theory_table};
use crate::error::Result;
use crate::output::{self, Provenance, Table};

pub const RG_COUNTS: [u32; 6] = [1, 2, 3, 4, 5, 6];
pub const STAGE_STUDY_SAMPLES: usize = 20_000;
pub const BLOCK_SIZES: [usize; 8] = [100, 200, 500, 1_000, 2_000, 5_000, 10_000, 20_000];
pub const HISTOGRAM_MEAN: f64 = 5000.0;
pub const HISTOGRAM_SAMPLES: usize = 50_000;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub check: String,
    pub measured: f64,
    pub target: String,
    pub pass: bool,
}

impl Check {
    fn within(check: impl Into<String>, measured: f64, lo: f64, hi: f64) -> Self {
        Self { check: check.into(), measured, target: format!("[{lo}, {hi}]"), pass: measured >= lo && measured <= hi }
    }

    /// `measured` is the smallest step of a sequence that must rise.
    fn rising(check: impl Into<String>, values: &[f64]) -> Self {
        let step = values.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
        Self { check: check.into(), measured: step, target: "> 0".into(), pass: step > 0.0 }
    }

    /// `measured` is the largest step of a sequence that must fall.
    fn falling(check: impl Into<String>, values: &[f64]) -> Self {
        let step = values.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
        Self { check: check.into(), measured: step, target: "< 0".into(), pass: step < 0.0 }
    }
}

#[derive(Serialize)]
struct Metadata {
    #[serde(flatten)]
    provenance: Provenance,
    seed: u64,
    workers: usize,
    periods: u64,
    seeds: usize,
    rg_counts: Vec<u32>,
    stage_study: StudyConfig,
    block_study: StudyConfig,
    histogram_mean_intensity: f64,
    histogram_samples: usize,
}

#[derive(Serialize)]
struct Summary<'a> {
    seed: u64,
    workers: usize,
    passed: usize,
    failed: usize,
    checks: &'a [Check],
}

pub fn default_dir(seed: u64) -> PathBuf {
    output::default_out_dir().join(format!("reproduce-seed{seed}"))
}

pub fn run(args: ReproduceArgs) -> Result<()> {
    let workers = args.workers.unwrap_or_else(default_workers);
    init_pool(workers)?;
    let dir = args.out_dir.clone().unwrap_or_else(|| default_dir(args.seed));
    let stage_study =
        StudyConfig::new(RG_COUNTS.to_vec(), vec![STAGE_STUDY_SAMPLES], args.stage_study_runs, args.seed)?;
    let block_study =
        StudyConfig::new(RG_COUNTS.to_vec(), BLOCK_SIZES.to_vec(), args.block_study_runs, args.seed.wrapping_add(1))?;

    output::write_json(
        &dir.join("metadata.json"),
        &Metadata {
            provenance: Provenance::new("reproduce"),
            seed: args.seed,
            workers,
            periods: args.periods,
            seeds: args.seeds,
            rg_counts: RG_COUNTS.to_vec(),
            stage_study: stage_study.clone(),
            block_study: block_study.clone(),
            histogram_mean_intensity: HISTOGRAM_MEAN,
            histogram_samples: HISTOGRAM_SAMPLES,
        },
    )?;

    let mut checks = imaging_stage(&dir, &args, workers)?;
    eprintln!("imaging done");

    let stage = sd_vs_n_study(&stage_study, 1.0)?;
    study_table(&stage).write(&dir.join("sd_vs_rg_count.csv"))?;
    checks.extend(stage_checks(&stage));
    eprintln!("stage-count study done");

    checks.extend(histogram_stage(&dir, args.seed)?);
    eprintln!("histograms done");

    let block = sd_vs_n_study(&block_study, 1.0)?;
    study_table(&block).write(&dir.join("sd_vs_block_size.csv"))?;
    checks.extend(block_checks(&block));

    write_summary(&dir, args.seed, workers, &checks)?;
    let failed = checks.iter().filter(|c| !c.pass).count();
    eprintln!("wrote {} ({} checks, {failed} failed)", dir.display(), checks.len());
    Ok(())
}

fn imaging_stage(dir: &Path, args: &ReproduceArgs, workers: usize) -> Result<Vec<Check>> {
    let object = default_double_slit();
    let (peak, background) = default_bin_sets(&object);
    let mut table = Table::new(&[
        "rg_count",
        "g2_max",
        "g2_min",
        "visibility",
        "spread",
        "bin_spread",
        "seeds_used",
        "predicted_visibility",
    ]);
    let mut runs = Table::new(&["rg_count", "seed", "g2_max", "g2_min", "visibility"]);
    let mut means = Vec::new();
    for n in RG_COUNTS {
        let base = SimulationConfig::new(SourceConfig::unit(n)?, object.clone(), args.periods, args.seed, workers)?;
        let study = visibility_study(&base, args.seeds, &peak, &background)?;
        image_table(&study.images[0], &object).write(&dir.join(format!("images/image_N{n}.csv")))?;
        theory_table(&white_noise_image(&object, n)?).write(&dir.join(format!("images/theory_N{n}.csv")))?;
        for (i, r) in study.per_seed.iter().enumerate() {
            runs.row(cells![n, args.seed.wrapping_add(i as u64), r.g2_max, r.g2_min, r.visibility]);
        }
        let s = &study.summary;
        let predicted = predicted_visibility(&object, n, &peak)?;
        table.row(cells![n, s.g2_max, s.g2_min, s.visibility, s.spread, s.bin_spread, s.seeds_used, predicted]);
        means.push(s.visibility);
        eprintln!("  N={n}: visibility {:.4} ± {:.4}", s.visibility, s.spread);
    }
    table.write(&dir.join("visibility.csv"))?;
    runs.write(&dir.join("visibility_runs.csv"))?;
    Ok(vec![
        Check::within("visibility_N1", means[0], 0.042, 0.052),
        Check::within("visibility_N6", means[5], 0.67, 0.83),
        Check::rising("visibility_rising", &means),
    ])
}

/// `2^N` inside mean ± 3·SEM for N ≤ 3, inside mean ± 3·SD beyond.
fn stage_checks(study: &StudyResult) -> Vec<Check> {
    let mut checks: Vec<Check> = study
        .rows
        .iter()
        .map(|r| {
            let half = if r.rg_count <= 3 { 3.0 * r.sd_g2 / (r.runs as f64).sqrt() } else { 3.0 * r.sd_g2 };
            Check {
                check: format!("g2_zero_N{}", r.rg_count),
                measured: r.mean_g2,
                target: format!("{} ± {half}", r.theory_g2),
                pass: (r.mean_g2 - r.theory_g2).abs() <= half,
            }
        })
        .collect();
    let sds: Vec<f64> = study.rows.iter().map(|r| r.sd_g2).collect();
    checks.push(Check::rising("sd_rising_with_rg_count", &sds));
    checks
}

fn block_checks(study: &StudyResult) -> Vec<Check> {
    let sd = |n: u32, size: usize| {
        study.rows.iter().find(|r| r.rg_count == n && r.samples_per_run == size).map(|r| r.sd_g2).unwrap_or(f64::NAN)
    };
    let mut checks = Vec::new();
    for n in [1, 2] {
        let sds: Vec<f64> = BLOCK_SIZES.iter().map(|&s| sd(n, s)).collect();
        checks.push(Check::falling(format!("sd_falling_with_block_size_N{n}"), &sds));
    }
    for n in [5, 6] {
        let ratio = sd(n, 5_000) / sd(n, 100);
        checks.push(Check {
            check: format!("sd_ratio_5000_over_100_N{n}"),
            measured: ratio,
            target: "> 1".into(),
            pass: ratio > 1.0,
        });
    }
    checks
}

fn histogram_stage(dir: &Path, seed: u64) -> Result<Vec<Check>> {
    let mut first = Vec::new();
    for n in RG_COUNTS {
        let source = SourceConfig::new(n, HISTOGRAM_MEAN)?;
        let block = sample_block(&source, HISTOGRAM_SAMPLES, seed.wrapping_add(u64::from(n)))?;
        let h = default_histogram(&block)?;
        histogram_table(&h).write(&dir.join(format!("histograms/histogram_N{n}.csv")))?;
        first.push(h.probabilities[0]);
    }
    Ok(vec![
        Check::within("histogram_first_bin_N6", first[5], 0.9, 1.0),
        Check::rising("histogram_first_bin_rising", &first),
    ])
}

fn write_summary(dir: &Path, seed: u64, workers: usize, checks: &[Check]) -> Result<()> {
    let mut table = Table::new(&["check", "measured", "target", "pass"]);
    for c in checks {
        table.row(cells![c.check, c.measured, c.target, c.pass]);
    }
    table.write(&dir.join("summary.csv"))?;
    let failed = checks.iter().filter(|c| !c.pass).count();
    output::write_json(
        &dir.join("summary.json"),
        &Summary { seed, workers, passed: checks.len() - failed, failed, checks },
    )
}
