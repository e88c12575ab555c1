//! Temporal ghost imaging by intensity correlation.
//!
//! Each period draws `T` fresh intensities. Signal and reference beams carry
//! identical copies. The bucket detector sees `B = Σ_t I(t)·O(t)` and the
//! correlator accumulates `B·I(t)` per reference bin. After `M` periods the
//! background-normalized image is
//!
//! ```text
//! g2[t] = ⟨B·I(t)⟩ / (⟨B⟩·⟨I(t)⟩)
//! ```
//!
//! which is 1 in expectation wherever `O(t) = 0`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::StagedSum;
use crate::rng::{self, Purpose};
use crate::source::{CascadeStream, IntensityStream, SourceConfig};

/// Periods per random stream. Streams are keyed by chunk index, so the
/// result does not depend on how chunks are spread over workers.
pub const PERIODS_PER_STREAM: u64 = 1000;

pub const DEFAULT_PERIOD_BINS: usize = 100;

/// Default double slit: width 10 at height 0.5, then width 5 at height 1.
pub const DEFAULT_SLITS: [Slit; 2] =
    [Slit { start: 20, width: 10, height: 0.5 }, Slit { start: 60, width: 5, height: 1.0 }];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Slit {
    pub start: usize,
    pub width: usize,
    pub height: f64,
}

/// A periodic transmission profile on `period_bins` bins, values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemporalObject {
    amplitude: Vec<f64>,
}

impl TemporalObject {
    pub fn new(amplitude: Vec<f64>) -> Result<Self> {
        if amplitude.is_empty() {
            return Err(Error::Geometry("period must contain at least one bin".into()));
        }
        if let Some((t, a)) = amplitude.iter().enumerate().find(|(_, a)| !(0.0..=1.0).contains(*a)) {
            return Err(Error::Geometry(format!("amplitude {a} at bin {t} is outside [0, 1]")));
        }
        Ok(Self { amplitude })
    }

    /// Builds an object from non-overlapping rectangular segments.
    pub fn from_slits(period_bins: usize, slits: &[Slit]) -> Result<Self> {
        let mut amplitude = vec![0.0; period_bins];
        let mut covered = vec![false; period_bins];
        for (k, s) in slits.iter().enumerate() {
            if s.width == 0 {
                return Err(Error::Geometry(format!("slit {} has zero width", k + 1)));
            }
            if !(0.0..=1.0).contains(&s.height) {
                return Err(Error::Geometry(format!("slit {} height {} outside [0, 1]", k + 1, s.height)));
            }
            let end = s.start.checked_add(s.width).filter(|&e| e <= period_bins).ok_or_else(|| {
                Error::Geometry(format!(
                    "slit {} [{}, {}+{}) does not fit in {} bins",
                    k + 1,
                    s.start,
                    s.start,
                    s.width,
                    period_bins
                ))
            })?;
            for t in s.start..end {
                if covered[t] {
                    return Err(Error::Geometry(format!("slit {} overlaps another slit at bin {t}", k + 1)));
                }
                covered[t] = true;
                amplitude[t] = s.height;
            }
        }
        Self::new(amplitude)
    }

    pub fn period_bins(&self) -> usize {
        self.amplitude.len()
    }

    pub fn amplitude(&self) -> &[f64] {
        &self.amplitude
    }

    pub fn object_sum(&self) -> f64 {
        self.amplitude.iter().sum()
    }

    pub fn max_amplitude(&self) -> f64 {
        self.amplitude.iter().copied().fold(0.0, f64::max)
    }

    /// Bins holding the largest amplitude; empty for an all-zero object.
    pub fn peak_bins(&self) -> Vec<usize> {
        let max = self.max_amplitude();
        if max == 0.0 {
            return Vec::new();
        }
        (0..self.period_bins()).filter(|&t| self.amplitude[t] == max).collect()
    }

    /// Bins where the object is opaque.
    pub fn background_bins(&self) -> Vec<usize> {
        (0..self.period_bins()).filter(|&t| self.amplitude[t] == 0.0).collect()
    }

    /// The same object delayed by `k` bins, wrapping around the period.
    pub fn shifted(&self, k: usize) -> Self {
        let n = self.period_bins();
        let mut amplitude = vec![0.0; n];
        for (t, &a) in self.amplitude.iter().enumerate() {
            amplitude[(t + k) % n] = a;
        }
        Self { amplitude }
    }
}

pub fn make_double_slit(period_bins: usize, first: Slit, second: Slit) -> Result<TemporalObject> {
    TemporalObject::from_slits(period_bins, &[first, second])
}

/// The 100-bin double slit used throughout the examples.
pub fn default_double_slit() -> TemporalObject {
    make_double_slit(DEFAULT_PERIOD_BINS, DEFAULT_SLITS[0], DEFAULT_SLITS[1])
        .expect("default slits fit the default period")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub source: SourceConfig,
    pub object: TemporalObject,
    pub periods: u64,
    pub seed: u64,
    pub workers: usize,
}

impl SimulationConfig {
    pub fn new(source: SourceConfig, object: TemporalObject, periods: u64, seed: u64, workers: usize) -> Result<Self> {
        if periods < 1 {
            return Err(Error::Config("periods must be at least 1".into()));
        }
        if workers < 1 {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        Ok(Self { source, object, periods, seed, workers })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
struct BinSums {
    reference: StagedSum,      // Σ I
    bucket_ref: StagedSum,     // Σ B·I
    ref_sq: StagedSum,         // Σ I²
    bucket_ref_sq: StagedSum,  // Σ (B·I)²
    bucket_sq_ref: StagedSum,  // Σ B²·I
    bucket_ref_ref: StagedSum, // Σ B·I²
}

impl BinSums {
    fn merge(&self, o: &Self) -> Self {
        Self {
            reference: self.reference.merge(&o.reference),
            bucket_ref: self.bucket_ref.merge(&o.bucket_ref),
            ref_sq: self.ref_sq.merge(&o.ref_sq),
            bucket_ref_sq: self.bucket_ref_sq.merge(&o.bucket_ref_sq),
            bucket_sq_ref: self.bucket_sq_ref.merge(&o.bucket_sq_ref),
            bucket_ref_ref: self.bucket_ref_ref.merge(&o.bucket_ref_ref),
        }
    }
}

/// Running correlation sums over periods.
///
/// Besides the three sums that define the image it keeps the second moments
/// needed for per-bin standard errors. All sums are exact, so
/// [`merge`](Self::merge) is associative and commutative bit-for-bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationAccumulator {
    bins: Vec<BinSums>,
    bucket: StagedSum,
    bucket_sq: StagedSum,
    periods: u64,
}

impl CorrelationAccumulator {
    pub fn new(period_bins: usize) -> Self {
        Self {
            bins: vec![BinSums::default(); period_bins],
            bucket: StagedSum::default(),
            bucket_sq: StagedSum::default(),
            periods: 0,
        }
    }

    pub fn period_bins(&self) -> usize {
        self.bins.len()
    }

    pub fn period_count(&self) -> u64 {
        self.periods
    }

    /// Σ B
    pub fn sum_bucket(&self) -> f64 {
        self.bucket.value()
    }

    /// Σ B·I(t)
    pub fn sum_bucket_ref(&self) -> Vec<f64> {
        self.bins.iter().map(|b| b.bucket_ref.value()).collect()
    }

    /// Σ I(t)
    pub fn sum_ref(&self) -> Vec<f64> {
        self.bins.iter().map(|b| b.reference.value()).collect()
    }

    pub fn merge(&self, other: &Self) -> Result<Self> {
        if self.period_bins() != other.period_bins() {
            return Err(Error::Config(format!(
                "cannot merge accumulators of {} and {} bins",
                self.period_bins(),
                other.period_bins()
            )));
        }
        Ok(Self {
            bins: self.bins.iter().zip(&other.bins).map(|(a, b)| a.merge(b)).collect(),
            bucket: self.bucket.merge(&other.bucket),
            bucket_sq: self.bucket_sq.merge(&other.bucket_sq),
            periods: self.periods + other.periods,
        })
    }

    fn record(&mut self, intensities: &[f64], amplitude: &[f64]) {
        let bucket: f64 = intensities.iter().zip(amplitude).map(|(i, o)| i * o).sum();
        let bucket_sq = bucket * bucket;
        self.bucket.add(bucket);
        self.bucket_sq.add(bucket_sq);
        for (sums, &i) in self.bins.iter_mut().zip(intensities) {
            let bi = bucket * i;
            sums.reference.add(i);
            sums.bucket_ref.add(bi);
            sums.ref_sq.add(i * i);
            sums.bucket_ref_sq.add(bi * bi);
            sums.bucket_sq_ref.add(bucket_sq * i);
            sums.bucket_ref_ref.add(bi * i);
        }
        self.periods += 1;
    }
}

/// One period: draw `T` intensities, form the bucket value, correlate.
pub fn run_period<S: IntensityStream + ?Sized>(
    object: &TemporalObject,
    stream: &mut S,
    acc: &mut CorrelationAccumulator,
) -> Result<()> {
    let mut scratch = Vec::with_capacity(object.period_bins());
    run_period_with(object, stream, acc, &mut scratch)
}

fn run_period_with<S: IntensityStream + ?Sized>(
    object: &TemporalObject,
    stream: &mut S,
    acc: &mut CorrelationAccumulator,
    scratch: &mut Vec<f64>,
) -> Result<()> {
    if acc.period_bins() != object.period_bins() {
        return Err(Error::Config(format!(
            "accumulator has {} bins but object has {}",
            acc.period_bins(),
            object.period_bins()
        )));
    }
    scratch.clear();
    scratch.extend((0..object.period_bins()).map(|_| stream.next_intensity()));
    acc.record(scratch, object.amplitude());
    Ok(())
}

fn simulate_chunk(config: &SimulationConfig, chunk: u64) -> CorrelationAccumulator {
    let first = chunk * PERIODS_PER_STREAM;
    let last = (first + PERIODS_PER_STREAM).min(config.periods);
    let rng = rng::stream(config.seed, Purpose::Imaging, [0, 0], chunk);
    let mut stream = CascadeStream::new(config.source, rng);
    let mut acc = CorrelationAccumulator::new(config.object.period_bins());
    let mut scratch = Vec::with_capacity(config.object.period_bins());
    for _ in first..last {
        run_period_with(&config.object, &mut stream, &mut acc, &mut scratch).expect("chunk accumulator matches object");
    }
    acc
}

/// Runs all periods and returns the merged accumulator.
///
/// Periods are grouped in chunks of [`PERIODS_PER_STREAM`], each with its
/// own derived stream. Workers take contiguous runs of chunks and the
/// partial accumulators merge exactly, so the result is bit-identical for
/// any worker count.
pub fn simulate(config: &SimulationConfig) -> Result<CorrelationAccumulator> {
    if config.object.object_sum() <= 0.0 {
        return Err(Error::DegenerateObject);
    }
    let chunks = config.periods.div_ceil(PERIODS_PER_STREAM);
    let workers = (config.workers as u64).min(chunks).max(1);
    let per_worker = chunks.div_ceil(workers);

    let run_worker = |w: u64| -> Result<CorrelationAccumulator> {
        let start = w * per_worker;
        let end = (start + per_worker).min(chunks);
        let mut acc = CorrelationAccumulator::new(config.object.period_bins());
        for chunk in start..end {
            acc = acc.merge(&simulate_chunk(config, chunk))?;
        }
        Ok(acc)
    };

    let partials: Vec<CorrelationAccumulator> = if workers == 1 {
        vec![run_worker(0)?]
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers as usize)
            .build()
            .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
        pool.install(|| (0..workers).into_par_iter().map(run_worker).collect::<Result<Vec<_>>>())?
    };

    let mut total = CorrelationAccumulator::new(config.object.period_bins());
    for p in &partials {
        total = total.merge(p)?;
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageMeta {
    pub source: SourceConfig,
    pub periods: u64,
    pub seed: u64,
}

/// A background-normalized correlation image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GhostImage {
    pub g2: Vec<f64>,
    /// Delta-method standard error of each `g2` value; NaN for a single period.
    pub stderr: Vec<f64>,
    pub meta: ImageMeta,
}

impl GhostImage {
    pub fn mean_over(&self, bins: &[usize]) -> f64 {
        bins.iter().map(|&t| self.g2[t]).sum::<f64>() / bins.len() as f64
    }
}

/// Normalizes accumulated sums into `g2[t] = ⟨B·I(t)⟩ / (⟨B⟩⟨I(t)⟩)`.
pub fn normalize(acc: &CorrelationAccumulator, meta: ImageMeta) -> Result<GhostImage> {
    if acc.periods == 0 {
        return Err(Error::Normalization("period count".into()));
    }
    let m = acc.periods as f64;
    let sum_b = acc.sum_bucket();
    if sum_b <= 0.0 {
        return Err(Error::Normalization("bucket sum".into()));
    }
    let mean_b = sum_b / m;
    let var_b = acc.bucket_sq.value() / m - mean_b * mean_b;

    let mut g2 = Vec::with_capacity(acc.period_bins());
    let mut stderr = Vec::with_capacity(acc.period_bins());
    for (t, sums) in acc.bins.iter().enumerate() {
        let sum_i = sums.reference.value();
        if sum_i <= 0.0 {
            return Err(Error::Normalization(format!("reference sum at bin {t}")));
        }
        let x = sums.bucket_ref.value() / m;
        let z = sum_i / m;
        let g = x / (mean_b * z);
        g2.push(g);

        if acc.periods < 2 || x == 0.0 {
            stderr.push(if acc.periods < 2 { f64::NAN } else { 0.0 });
            continue;
        }
        // Delta method for the ratio x / (y z) with x = B·I, y = B, z = I.
        let var_x = sums.bucket_ref_sq.value() / m - x * x;
        let var_z = sums.ref_sq.value() / m - z * z;
        let cov_xy = sums.bucket_sq_ref.value() / m - x * mean_b;
        let cov_xz = sums.bucket_ref_ref.value() / m - x * z;
        let cov_yz = x - mean_b * z;
        let rel_var = var_x / (x * x) + var_b / (mean_b * mean_b) + var_z / (z * z)
            - 2.0 * cov_xy / (x * mean_b)
            - 2.0 * cov_xz / (x * z)
            + 2.0 * cov_yz / (mean_b * z);
        stderr.push(g * (rel_var.max(0.0) / (m - 1.0)).sqrt());
    }
    Ok(GhostImage { g2, stderr, meta })
}

/// [`simulate`] followed by [`normalize`].
pub fn retrieve_image(config: &SimulationConfig) -> Result<GhostImage> {
    let acc = simulate(config)?;
    normalize(&acc, ImageMeta { source: config.source, periods: config.periods, seed: config.seed })
}
