use serde::Serialize;
use superbunch::analysis::{histogram, sample_max, sd_vs_n_study, HistogramResult, StudyConfig, StudyResult};
use superbunch::imaging::{GhostImage, SimulationConfig, TemporalObject};
use superbunch::source::{sample_block, SourceConfig};
use superbunch::theory::{theoretical_image, white_noise_image, BandwidthSet, TheoryCurve, TheoryOptions};

use crate::args::{HistogramArgs, RangeMax, SimulateArgs, StatsArgs, TheoryArgs};
use crate::cells;
use crate::error::{CliError, Result};
use crate::object_file::{self, ObjectFile};
use crate::output::{self, Provenance, Table};

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

pub fn image_table(image: &GhostImage, object: &TemporalObject) -> Table {
    let mut t = Table::new(&["bin", "g2", "stderr", "object_amplitude"]);
    for (bin, ((g, s), o)) in image.g2.iter().zip(&image.stderr).zip(object.amplitude()).enumerate() {
        t.row(cells![bin, g, s, o]);
    }
    t
}

pub fn theory_table(curve: &TheoryCurve) -> Table {
    let mut t = Table::new(&["bin", "g2"]);
    for (bin, g) in curve.g2.iter().enumerate() {
        t.row(cells![bin, g]);
    }
    t
}

pub fn study_table(study: &StudyResult) -> Table {
    let mut t = Table::new(&["rg_count", "samples_per_run", "mean_g2", "sd_g2", "runs", "theory_g2"]);
    for r in &study.rows {
        t.row(cells![r.rg_count, r.samples_per_run, r.mean_g2, r.sd_g2, r.runs, r.theory_g2]);
    }
    t
}

/// One row per bin, then an `overflow` row from `range_max` to infinity.
pub fn histogram_table(h: &HistogramResult) -> Table {
    let mut t = Table::new(&["bin_low", "bin_high", "probability"]);
    for (w, p) in h.bin_edges.windows(2).zip(&h.probabilities) {
        t.row(cells![w[0], w[1], p]);
    }
    t.row(cells![h.bin_edges[h.bin_edges.len() - 1], f64::INFINITY, h.overflow_probability()]);
    t
}

#[derive(Serialize)]
struct SimulateMeta<'a> {
    #[serde(flatten)]
    provenance: Provenance,
    rg_count: u32,
    mean_intensity: f64,
    periods: u64,
    seed: u64,
    workers: usize,
    object: &'a ObjectFile,
}

pub fn simulate(args: SimulateArgs) -> Result<()> {
    let (file, object) = object_file::load(args.object.object.as_deref(), args.object.bins)?;
    let source = SourceConfig::new(args.source.rg_count, args.source.mean_intensity)?;
    let workers = args.workers.unwrap_or_else(default_workers);
    let config = SimulationConfig::new(source, object.clone(), args.periods, args.seed, workers)?;
    let image = superbunch::imaging::retrieve_image(&config)?;

    let path = output::resolve(args.out.as_deref(), "simulate.csv");
    image_table(&image, &object).write(&path)?;
    output::write_json(
        &output::sidecar_path(&path),
        &SimulateMeta {
            provenance: Provenance::new("simulate"),
            rg_count: source.rg_count(),
            mean_intensity: source.mean_intensity(),
            periods: args.periods,
            seed: args.seed,
            workers,
            object: &file,
        },
    )?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

pub fn bands_for(args: &TheoryArgs) -> Result<BandwidthSet> {
    match (&args.bands, args.fwhm) {
        (Some(bands), _) => {
            if bands.len() != args.rg_count as usize {
                return Err(CliError::Usage(format!(
                    "--bands has {} entries but --rg-count is {}",
                    bands.len(),
                    args.rg_count
                )));
            }
            Ok(BandwidthSet::new(bands.clone())?)
        }
        (None, fwhm) => Ok(BandwidthSet::fwhm_matched(args.rg_count, fwhm.unwrap_or(1.0))?),
    }
}

#[derive(Serialize)]
struct TheoryMeta<'a> {
    #[serde(flatten)]
    provenance: Provenance,
    rg_count: u32,
    curve: &'a superbunch::theory::Provenance,
    object: &'a ObjectFile,
}

pub fn theory(args: TheoryArgs) -> Result<()> {
    if args.rg_count < 1 {
        return Err(CliError::Usage("--rg-count must be at least 1".into()));
    }
    let (file, object) = object_file::load(args.object.object.as_deref(), args.object.bins)?;
    let curve = if args.white_noise {
        white_noise_image(&object, args.rg_count)?
    } else {
        let options = TheoryOptions { step: args.step, boundary: args.boundary.into(), model: args.model.into() };
        theoretical_image(&object, &bands_for(&args)?, &options)?
    };
    let path = output::resolve(args.out.as_deref(), "theory.csv");
    theory_table(&curve).write(&path)?;
    output::write_json(
        &output::sidecar_path(&path),
        &TheoryMeta {
            provenance: Provenance::new("theory"),
            rg_count: args.rg_count,
            curve: &curve.provenance,
            object: &file,
        },
    )?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

#[derive(Serialize)]
struct StatsMeta<'a> {
    #[serde(flatten)]
    provenance: Provenance,
    #[serde(flatten)]
    config: &'a StudyConfig,
    mean_intensity: f64,
    workers: usize,
}

pub fn stats(args: StatsArgs) -> Result<()> {
    let workers = args.workers.unwrap_or_else(default_workers);
    init_pool(workers)?;
    let config = StudyConfig::new(args.rg_counts, args.samples_per_run, args.runs, args.seed)?;
    let study = sd_vs_n_study(&config, args.mean_intensity)?;
    let path = output::resolve(args.out.as_deref(), "stats.csv");
    study_table(&study).write(&path)?;
    output::write_json(
        &output::sidecar_path(&path),
        &StatsMeta {
            provenance: Provenance::new("stats"),
            config: &config,
            mean_intensity: args.mean_intensity,
            workers,
        },
    )?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

#[derive(Serialize)]
struct HistogramMeta {
    #[serde(flatten)]
    provenance: Provenance,
    rg_count: u32,
    mean_intensity: f64,
    samples: usize,
    seed: u64,
    bins: usize,
    range_max: f64,
    overflow_count: usize,
}

pub fn histogram_cmd(args: HistogramArgs) -> Result<()> {
    let source = SourceConfig::new(args.rg_count, args.mean_intensity)?;
    let block = sample_block(&source, args.samples, args.seed)?;
    let h = match args.range_max {
        None => histogram(&block, args.bins, superbunch::analysis::DEFAULT_RANGE_FACTOR * args.mean_intensity)?,
        Some(RangeMax::Auto) => histogram(&block, args.bins, sample_max(&block))?,
        Some(RangeMax::Value(r)) => histogram(&block, args.bins, r)?,
    };
    let path = output::resolve(args.out.as_deref(), "histogram.csv");
    histogram_table(&h).write(&path)?;
    output::write_json(
        &output::sidecar_path(&path),
        &HistogramMeta {
            provenance: Provenance::new("histogram"),
            rg_count: args.rg_count,
            mean_intensity: args.mean_intensity,
            samples: args.samples,
            seed: args.seed,
            bins: args.bins,
            range_max: h.bin_edges[h.bin_edges.len() - 1],
            overflow_count: h.overflow_count,
        },
    )?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

/// Sizes the global pool used by the study drivers. Results do not depend
/// on it; it only bounds CPU use.
pub fn init_pool(workers: usize) -> Result<()> {
    if workers < 1 {
        return Err(CliError::Usage("--workers must be at least 1".into()));
    }
    // A second initialization in the same process is harmless.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(workers).build_global();
    Ok(())
}
