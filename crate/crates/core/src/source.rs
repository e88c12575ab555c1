//! Intensity statistics of superbunching pseudothermal light.
//!
//! Light passing `N` cascaded rotating ground glasses has an intensity whose
//! distribution, conditioned on the intensity `x` entering a stage, is
//! negative exponential with mean `x`. The output of stage `N` is therefore
//! `μ · E₁ · E₂ ⋯ E_N` with `E_j` independent unit exponentials, which gives
//! `⟨Iᵏ⟩ = (k!)^N μᵏ` and a zero-delay degree of coherence of `2^N`.

use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate, Tolerance};
use crate::rng::{self, Purpose};

/// Default relative tolerance of [`pdf`] and [`cdf`].
pub const PDF_REL_TOL: f64 = 1e-6;

// Log-intensity window used by the density quadrature: [1e-12 μ, 1e3 μ N].
const WINDOW_LOW: f64 = 1e-12;
const WINDOW_HIGH: f64 = 1e3;

/// Number of cascade stages and mean output intensity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceConfig {
    rg_count: u32,
    mean_intensity: f64,
}

impl SourceConfig {
    pub fn new(rg_count: u32, mean_intensity: f64) -> Result<Self> {
        if rg_count < 1 {
            return Err(Error::InvalidSource("rg_count must be at least 1".into()));
        }
        if !(mean_intensity > 0.0 && mean_intensity.is_finite()) {
            return Err(Error::InvalidSource(format!(
                "mean_intensity must be positive and finite, got {mean_intensity}"
            )));
        }
        Ok(Self { rg_count, mean_intensity })
    }

    /// Unit-mean source with `rg_count` stages.
    pub fn unit(rg_count: u32) -> Result<Self> {
        Self::new(rg_count, 1.0)
    }

    pub fn rg_count(&self) -> u32 {
        self.rg_count
    }

    pub fn mean_intensity(&self) -> f64 {
        self.mean_intensity
    }

    /// `⟨Iᵏ⟩ / ⟨I⟩ᵏ = (k!)^N`.
    pub fn moment_ratio(&self, k: u32) -> f64 {
        let factorial: f64 = (1..=k).map(f64::from).product();
        factorial.powi(self.rg_count as i32)
    }
}

/// Draws one intensity by running the cascade: stage 1 is exponential with
/// mean μ, stage `j` is exponential with mean equal to the stage `j-1` draw.
pub fn sample_intensity<R: Rng + ?Sized>(config: &SourceConfig, rng: &mut R) -> f64 {
    let mut x = config.mean_intensity;
    for _ in 0..config.rg_count {
        let e: f64 = rng.sample(Exp1);
        x *= e;
    }
    x
}

/// A source of per-bin intensities for the imaging loop.
///
/// Closures `FnMut() -> f64` implement it, which is handy for deterministic
/// stub streams in tests.
pub trait IntensityStream {
    fn next_intensity(&mut self) -> f64;
}

impl<F: FnMut() -> f64> IntensityStream for F {
    fn next_intensity(&mut self) -> f64 {
        self()
    }
}

/// Cascade samples drawn from a random generator.
#[derive(Debug, Clone)]
pub struct CascadeStream<R> {
    config: SourceConfig,
    rng: R,
}

impl<R: Rng> CascadeStream<R> {
    pub fn new(config: SourceConfig, rng: R) -> Self {
        Self { config, rng }
    }
}

impl<R: Rng> IntensityStream for CascadeStream<R> {
    #[inline]
    fn next_intensity(&mut self) -> f64 {
        sample_intensity(&self.config, &mut self.rng)
    }
}

/// A reproducible block of intensities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntensityBlock {
    samples: Vec<f64>,
    config: SourceConfig,
    seed: u64,
}

impl IntensityBlock {
    /// Wraps externally produced intensities, e.g. a recorded detector trace.
    pub fn from_samples(samples: Vec<f64>, config: SourceConfig, seed: u64) -> Result<Self> {
        if let Some(x) = samples.iter().find(|x| !(**x >= 0.0 && x.is_finite())) {
            return Err(Error::Domain { what: "intensity sample", value: *x });
        }
        Ok(Self { samples, config, seed })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn config(&self) -> &SourceConfig {
        &self.config
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// `count` cascade samples, a pure function of `(config, seed, count)`.
pub fn sample_block(config: &SourceConfig, count: usize, seed: u64) -> Result<IntensityBlock> {
    if count == 0 {
        return Err(Error::EmptyRequest);
    }
    let mut rng = rng::stream(seed, Purpose::Block, [0, 0], 0);
    let samples = (0..count).map(|_| sample_intensity(config, &mut rng)).collect();
    Ok(IntensityBlock { samples, config: *config, seed })
}

fn log_window(stages: u32, mean: f64) -> (f64, f64) {
    ((WINDOW_LOW * mean).ln(), (WINDOW_HIGH * mean * f64::from(stages)).ln())
}

/// Density of `s = ln I` for `I = mean · E₁⋯E_stages`.
///
/// For more than one stage the density is the convolution (in log space) of
/// a `head`-stage factor with mean `mean` and a `tail`-stage unit factor.
/// With `tail = 1` this is exactly the conditional-exponential recursion;
/// larger cascades split in half so the nesting depth grows as `log₂ N`.
fn log_density(stages: u32, mean: f64, s: f64, rel_tol: f64) -> Result<f64> {
    if stages == 1 {
        let z = (s - mean.ln()).exp();
        return Ok(z * (-z).exp());
    }
    let tail = stages / 2;
    let head = stages - tail;
    let (head_lo, head_hi) = log_window(head, mean);
    let (tail_lo, tail_hi) = log_window(tail, 1.0);
    let lo = head_lo.max(s - tail_hi);
    let hi = head_hi.min(s - tail_lo);
    if lo >= hi {
        return Ok(0.0);
    }
    // Inner levels run one decade tighter so their noise stays below the
    // outer error target.
    let inner = rel_tol * 0.1;
    let tol = Tolerance { relative: rel_tol, absolute: f64::MIN_POSITIVE };
    let r = integrate(|u| Ok(log_density(head, mean, u, inner)? * log_density(tail, 1.0, s - u, inner)?), lo, hi, tol)?;
    Ok(r.value)
}

/// Probability density of the cascade intensity at `intensity`.
///
/// Closed form for one stage; otherwise the recursive conditional integral
/// evaluated by adaptive quadrature in log-intensity coordinates at relative
/// tolerance [`PDF_REL_TOL`].
pub fn pdf(config: &SourceConfig, intensity: f64) -> Result<f64> {
    pdf_with_tolerance(config, intensity, PDF_REL_TOL)
}

pub fn pdf_with_tolerance(config: &SourceConfig, intensity: f64, rel_tol: f64) -> Result<f64> {
    if !(intensity > 0.0) || !intensity.is_finite() {
        return Err(Error::Domain { what: "intensity", value: intensity });
    }
    let mu = config.mean_intensity;
    if config.rg_count == 1 {
        return Ok((-intensity / mu).exp() / mu);
    }
    Ok(log_density(config.rg_count, mu, intensity.ln(), rel_tol)? / intensity)
}

/// Cumulative distribution `P(I ≤ intensity)`.
///
/// Conditioning on the next-to-last stage gives
/// `∫ P_{N-1}(x) (1 − e^{−I/x}) dx`, one quadrature level shallower than
/// integrating the density.
pub fn cdf(config: &SourceConfig, intensity: f64) -> Result<f64> {
    if intensity.is_nan() {
        return Err(Error::Domain { what: "intensity", value: intensity });
    }
    if intensity <= 0.0 {
        return Ok(0.0);
    }
    if intensity == f64::INFINITY {
        return Ok(1.0);
    }
    let mu = config.mean_intensity;
    if config.rg_count == 1 {
        return Ok(-(-intensity / mu).exp_m1());
    }
    let stages = config.rg_count - 1;
    let (lo, hi) = log_window(stages, mu);
    let ln_i = intensity.ln();
    let inner = PDF_REL_TOL * 0.1;
    let tol = Tolerance { relative: PDF_REL_TOL, absolute: f64::MIN_POSITIVE };
    let r = integrate(|u| Ok(log_density(stages, mu, u, inner)? * -(-(ln_i - u).exp()).exp_m1()), lo, hi, tol)?;
    Ok(r.value.min(1.0))
}

/// Zero-delay degree of second-order coherence, `2^N`.
pub fn theoretical_g2_zero(rg_count: u32) -> Result<f64> {
    if rg_count < 1 {
        return Err(Error::Domain { what: "rg_count", value: f64::from(rg_count) });
    }
    Ok(2f64.powi(rg_count as i32))
}
