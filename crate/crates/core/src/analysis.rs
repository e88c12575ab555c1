//! Estimators and study drivers.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{retrieve_image, GhostImage, SimulationConfig, TemporalObject};
use crate::rng::{self, Purpose};
use crate::source::{sample_intensity, theoretical_g2_zero, IntensityBlock, SourceConfig};

pub const DEFAULT_HISTOGRAM_BINS: usize = 50;
/// Default histogram range is `[0, DEFAULT_RANGE_FACTOR · μ]`.
pub const DEFAULT_RANGE_FACTOR: f64 = 10.0;

/// Sample mean and standard deviation (n − 1 denominator; 0 for one value).
pub fn mean_and_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

/// `⟨I²⟩ / ⟨I⟩²` over the samples.
pub fn g2_zero_estimate(samples: &[f64]) -> Result<f64> {
    if samples.len() < 2 {
        return Err(Error::DegenerateSamples("at least two samples are required"));
    }
    let (sum, sum_sq) = samples.iter().fold((0.0, 0.0), |(s, q), &x| (s + x, q + x * x));
    g2_from_sums(sum, sum_sq, samples.len())
}

fn g2_from_sums(sum: f64, sum_sq: f64, n: usize) -> Result<f64> {
    if !(sum > 0.0) {
        return Err(Error::DegenerateSamples("samples have zero mean"));
    }
    let n = n as f64;
    let mean = sum / n;
    Ok((sum_sq / n) / (mean * mean))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisibilityResult {
    pub g2_max: f64,
    pub g2_min: f64,
    pub visibility: f64,
    /// Standard deviation of the visibility across seeds.
    pub spread: f64,
    /// Visibility uncertainty propagated from the scatter of the bins inside
    /// each bin set (mean over seeds for a study).
    pub bin_spread: f64,
    pub seeds_used: usize,
}

fn check_bins(bins: &[usize], len: usize, name: &str) -> Result<()> {
    if bins.is_empty() {
        return Err(Error::Selection(format!("{name} bin set is empty")));
    }
    if let Some(t) = bins.iter().find(|&&t| t >= len) {
        return Err(Error::Selection(format!("{name} bin {t} outside image of {len} bins")));
    }
    Ok(())
}

fn sem(values: &[f64]) -> f64 {
    let (_, sd) = mean_and_sd(values);
    sd / (values.len() as f64).sqrt()
}

/// `V = (g2_max − g2_min)/(g2_max + g2_min)` with each level averaged over
/// its bin set.
pub fn visibility_from_g2(g2: &[f64], peak_bins: &[usize], background_bins: &[usize]) -> Result<VisibilityResult> {
    check_bins(peak_bins, g2.len(), "peak")?;
    check_bins(background_bins, g2.len(), "background")?;
    if let Some(t) = peak_bins.iter().find(|t| background_bins.contains(t)) {
        return Err(Error::Selection(format!("bin {t} is in both peak and background sets")));
    }
    let peak: Vec<f64> = peak_bins.iter().map(|&t| g2[t]).collect();
    let background: Vec<f64> = background_bins.iter().map(|&t| g2[t]).collect();
    let g2_max = peak.iter().sum::<f64>() / peak.len() as f64;
    let g2_min = background.iter().sum::<f64>() / background.len() as f64;
    let total = g2_max + g2_min;
    if !(total > 0.0) {
        return Err(Error::Normalization("peak plus background level".into()));
    }
    let visibility = (g2_max - g2_min) / total;
    let (d_max, d_min) = (2.0 * g2_min / (total * total), 2.0 * g2_max / (total * total));
    let bin_spread = (d_max * sem(&peak)).hypot(d_min * sem(&background));
    Ok(VisibilityResult { g2_max, g2_min, visibility, spread: 0.0, bin_spread, seeds_used: 1 })
}

pub fn visibility(image: &GhostImage, peak_bins: &[usize], background_bins: &[usize]) -> Result<VisibilityResult> {
    visibility_from_g2(&image.g2, peak_bins, background_bins)
}

/// Images and visibilities for a run of consecutive seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisibilityStudy {
    pub images: Vec<GhostImage>,
    pub per_seed: Vec<VisibilityResult>,
    pub summary: VisibilityResult,
}

/// Repeats the imaging run for seeds `base.seed, base.seed + 1, …` and
/// summarizes the visibility with its spread across seeds.
pub fn visibility_study(
    base: &SimulationConfig,
    seeds: usize,
    peak_bins: &[usize],
    background_bins: &[usize],
) -> Result<VisibilityStudy> {
    if seeds < 1 {
        return Err(Error::Config("at least one seed is required".into()));
    }
    let mut images = Vec::with_capacity(seeds);
    let mut per_seed = Vec::with_capacity(seeds);
    for i in 0..seeds as u64 {
        let config = SimulationConfig { seed: base.seed.wrapping_add(i), ..base.clone() };
        let image = retrieve_image(&config)?;
        per_seed.push(visibility(&image, peak_bins, background_bins)?);
        images.push(image);
    }
    Ok(VisibilityStudy { summary: summarize_visibility(&per_seed), images, per_seed })
}

/// Mean levels and visibility over seeds with the across-seed SD.
pub fn summarize_visibility(per_seed: &[VisibilityResult]) -> VisibilityResult {
    let n = per_seed.len() as f64;
    let vis: Vec<f64> = per_seed.iter().map(|r| r.visibility).collect();
    let (visibility, spread) = mean_and_sd(&vis);
    VisibilityResult {
        g2_max: per_seed.iter().map(|r| r.g2_max).sum::<f64>() / n,
        g2_min: per_seed.iter().map(|r| r.g2_min).sum::<f64>() / n,
        visibility,
        spread,
        bin_spread: per_seed.iter().map(|r| r.bin_spread).sum::<f64>() / n,
        seeds_used: per_seed.len(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub rg_counts: Vec<u32>,
    pub samples_per_run: Vec<usize>,
    pub runs: usize,
    pub seed: u64,
}

impl StudyConfig {
    pub fn new(rg_counts: Vec<u32>, samples_per_run: Vec<usize>, runs: usize, seed: u64) -> Result<Self> {
        if rg_counts.is_empty() || rg_counts.contains(&0) {
            return Err(Error::Config("rg_counts must be non-empty with entries ≥ 1".into()));
        }
        if samples_per_run.is_empty() || samples_per_run.iter().any(|&n| n < 2) {
            return Err(Error::Config("samples_per_run must be non-empty with entries ≥ 2".into()));
        }
        if runs < 1 {
            return Err(Error::Config("runs must be at least 1".into()));
        }
        Ok(Self { rg_counts, samples_per_run, runs, seed })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    pub rg_count: u32,
    pub samples_per_run: usize,
    pub mean_g2: f64,
    pub sd_g2: f64,
    pub runs: usize,
    pub theory_g2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyResult {
    pub mean_intensity: f64,
    pub rows: Vec<StudyRow>,
}

/// One `g²(0)` estimate per run, each on a fresh block of `n` intensities.
///
/// Run `r` of cell `(N, n)` reads its own stream, so the estimates depend
/// only on the seed and not on thread scheduling.
pub fn run_estimates(source: &SourceConfig, samples_per_run: usize, runs: usize, seed: u64) -> Result<Vec<f64>> {
    let coords = [u64::from(source.rg_count()), samples_per_run as u64];
    (0..runs as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = rng::stream(seed, Purpose::Study, coords, r);
            let (mut sum, mut sum_sq) = (0.0, 0.0);
            for _ in 0..samples_per_run {
                let x = sample_intensity(source, &mut rng);
                sum += x;
                sum_sq += x * x;
            }
            g2_from_sums(sum, sum_sq, samples_per_run)
        })
        .collect()
}

/// Mean and SD of the `g²(0)` estimator over `runs` independent runs for
/// every `(N, n)` cell of the grid.
pub fn sd_vs_n_study(config: &StudyConfig, mean_intensity: f64) -> Result<StudyResult> {
    let mut rows = Vec::with_capacity(config.rg_counts.len() * config.samples_per_run.len());
    for &rg_count in &config.rg_counts {
        let source = SourceConfig::new(rg_count, mean_intensity)?;
        for &n in &config.samples_per_run {
            let estimates = run_estimates(&source, n, config.runs, config.seed)?;
            let (mean_g2, sd_g2) = mean_and_sd(&estimates);
            rows.push(StudyRow {
                rg_count,
                samples_per_run: n,
                mean_g2,
                sd_g2,
                runs: config.runs,
                theory_g2: theoretical_g2_zero(rg_count)?,
            });
        }
    }
    Ok(StudyResult { mean_intensity, rows })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramResult {
    /// `bin_count + 1` strictly increasing edges from 0 to `range_max`.
    pub bin_edges: Vec<f64>,
    /// Fraction of *all* samples in each bin.
    pub probabilities: Vec<f64>,
    pub overflow_count: usize,
    pub sample_count: usize,
    pub config: SourceConfig,
}

impl HistogramResult {
    pub fn overflow_probability(&self) -> f64 {
        self.overflow_count as f64 / self.sample_count as f64
    }
}

/// Uniform bins over `[0, range_max]` (last bin closed) plus an overflow
/// count for samples above `range_max`.
pub fn histogram(block: &IntensityBlock, bin_count: usize, range_max: f64) -> Result<HistogramResult> {
    if block.is_empty() {
        return Err(Error::DegenerateSamples("no samples to histogram"));
    }
    if bin_count < 2 {
        return Err(Error::Config("histogram needs at least two bins".into()));
    }
    if !(range_max > 0.0 && range_max.is_finite()) {
        return Err(Error::Config(format!("range_max {range_max} must be positive and finite")));
    }
    let width = range_max / bin_count as f64;
    let mut counts = vec![0usize; bin_count];
    let mut overflow_count = 0;
    for &x in block.samples() {
        if x > range_max {
            overflow_count += 1;
        } else {
            let k = ((x / width) as usize).min(bin_count - 1);
            counts[k] += 1;
        }
    }
    let n = block.len();
    Ok(HistogramResult {
        bin_edges: (0..=bin_count).map(|k| k as f64 * width).collect(),
        probabilities: counts.iter().map(|&c| c as f64 / n as f64).collect(),
        overflow_count,
        sample_count: n,
        config: *block.config(),
    })
}

/// 50 bins over `[0, 10μ]`.
pub fn default_histogram(block: &IntensityBlock) -> Result<HistogramResult> {
    histogram(block, DEFAULT_HISTOGRAM_BINS, DEFAULT_RANGE_FACTOR * block.config().mean_intensity())
}

/// Largest sample, for histograms spanning the observed range.
pub fn sample_max(block: &IntensityBlock) -> f64 {
    block.samples().iter().copied().fold(0.0, f64::max)
}

/// Helper for the object-derived bin sets: peak = highest-amplitude bins,
/// background = opaque bins.
pub fn default_bin_sets(object: &TemporalObject) -> (Vec<usize>, Vec<usize>) {
    (object.peak_bins(), object.background_bins())
}

/// Draws `n` intensities from an explicit stream; used by tests and docs.
pub fn draw<R: Rng + ?Sized>(source: &SourceConfig, n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| sample_intensity(source, rng)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::ImageMeta;
    use crate::source::sample_block;

    #[test]
    fn g2_of_constant_and_two_level_samples() {
        assert_eq!(g2_zero_estimate(&[3.0; 10]).unwrap(), 1.0);
        let mu = 2.5;
        let two_level: Vec<f64> = (0..100).map(|i| if i % 2 == 0 { 0.0 } else { 2.0 * mu }).collect();
        assert_eq!(g2_zero_estimate(&two_level).unwrap(), 2.0);
    }

    #[test]
    fn g2_degenerate_inputs() {
        assert!(matches!(g2_zero_estimate(&[0.0; 5]), Err(Error::DegenerateSamples(_))));
        assert!(matches!(g2_zero_estimate(&[1.0]), Err(Error::DegenerateSamples(_))));
    }

    #[test]
    fn thermal_g2_over_fifty_runs() {
        let est = run_estimates(&SourceConfig::unit(1).unwrap(), 20_000, 50, 3).unwrap();
        let (mean, sd) = mean_and_sd(&est);
        assert!((mean - 2.0).abs() < 3.0 * sd / 50f64.sqrt(), "mean {mean} sd {sd}");
    }

    #[test]
    fn thermal_block_g2_near_two() {
        let block = sample_block(&SourceConfig::unit(1).unwrap(), 20_000, 8).unwrap();
        let g = g2_zero_estimate(block.samples()).unwrap();
        assert!((g - 2.0).abs() < 0.1, "g2 {g}");
    }

    fn image(g2: Vec<f64>) -> GhostImage {
        let stderr = vec![0.0; g2.len()];
        GhostImage { g2, stderr, meta: ImageMeta { source: SourceConfig::unit(1).unwrap(), periods: 1, seed: 0 } }
    }

    #[test]
    fn flat_image_has_zero_visibility() {
        let v = visibility(&image(vec![1.0; 10]), &[2, 3], &[5, 6, 7]).unwrap();
        assert_eq!(v.visibility, 0.0);
        assert_eq!(v.bin_spread, 0.0);
    }

    #[test]
    fn visibility_of_known_levels() {
        let mut g2 = vec![1.0; 10];
        g2[2] = 3.0;
        g2[3] = 3.0;
        let v = visibility(&image(g2), &[2, 3], &[5, 6, 7]).unwrap();
        assert_eq!((v.g2_max, v.g2_min), (3.0, 1.0));
        assert_eq!(v.visibility, 0.5);
    }

    #[test]
    fn visibility_selection_errors() {
        let img = image(vec![1.0; 10]);
        assert!(matches!(visibility(&img, &[], &[1]), Err(Error::Selection(_))));
        assert!(matches!(visibility(&img, &[1], &[]), Err(Error::Selection(_))));
        assert!(matches!(visibility(&img, &[1, 2], &[2, 3]), Err(Error::Selection(_))));
        assert!(matches!(visibility(&img, &[11], &[2]), Err(Error::Selection(_))));
    }

    #[test]
    fn study_config_invariants() {
        assert!(StudyConfig::new(vec![], vec![10], 1, 0).is_err());
        assert!(StudyConfig::new(vec![0], vec![10], 1, 0).is_err());
        assert!(StudyConfig::new(vec![1], vec![1], 1, 0).is_err());
        assert!(StudyConfig::new(vec![1], vec![10], 0, 0).is_err());
    }

    #[test]
    fn single_run_grid() {
        let cfg = StudyConfig::new(vec![1, 2], vec![100, 200], 1, 4).unwrap();
        let result = sd_vs_n_study(&cfg, 1.0).unwrap();
        assert_eq!(result.rows.len(), 4);
        assert!(result.rows.iter().all(|r| r.sd_g2 == 0.0 && r.runs == 1));
        assert_eq!(result.rows[3].theory_g2, 4.0);
        assert_eq!(result, sd_vs_n_study(&cfg, 1.0).unwrap());
    }

    #[test]
    fn histogram_of_constant_samples() {
        let block = IntensityBlock::from_samples(vec![3.0; 40], SourceConfig::unit(1).unwrap(), 0).unwrap();
        let h = histogram(&block, 8, 10.0).unwrap();
        assert_eq!(h.probabilities.iter().filter(|&&p| p == 1.0).count(), 1);
        assert_eq!(h.probabilities.iter().sum::<f64>(), 1.0);
        assert_eq!(h.overflow_count, 0);
        let empty = IntensityBlock::from_samples(vec![], SourceConfig::unit(1).unwrap(), 0).unwrap();
        assert!(matches!(histogram(&empty, 8, 10.0), Err(Error::DegenerateSamples(_))));
    }

    #[test]
    fn histogram_rejects_bad_parameters() {
        let block = sample_block(&SourceConfig::unit(1).unwrap(), 10, 1).unwrap();
        assert!(histogram(&block, 1, 10.0).is_err());
        assert!(histogram(&block, 5, 0.0).is_err());
        assert!(histogram(&block, 5, f64::NAN).is_err());
    }

    #[test]
    fn histogram_conserves_probability() {
        let block = sample_block(&SourceConfig::new(3, 5000.0).unwrap(), 50_000, 2).unwrap();
        let h = default_histogram(&block).unwrap();
        let total: f64 = h.probabilities.iter().sum::<f64>() + h.overflow_probability();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(h.overflow_count > 0);
        assert_eq!(h.bin_edges.len(), 51);
        assert!(h.bin_edges.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(*h.bin_edges.last().unwrap(), 50_000.0);
    }

    #[test]
    fn thermal_histogram_decreases() {
        let block = sample_block(&SourceConfig::new(1, 5000.0).unwrap(), 50_000, 6).unwrap();
        let h = default_histogram(&block).unwrap();
        // Strict on the well-populated head; the tail holds a handful of
        // counts, so there a bin may exceed its predecessor only by noise.
        assert!(h.probabilities[..10].windows(2).all(|w| w[0] > w[1]));
        let n = h.sample_count as f64;
        for w in h.probabilities.windows(2) {
            let noise = 3.0 * ((w[0] + w[1]) * n + 1.0).sqrt() / n;
            assert!(w[1] <= w[0] + noise);
        }
    }
}
