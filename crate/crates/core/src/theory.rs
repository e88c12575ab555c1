//! Theoretical ghost images.
//!
//! The correlation image is the object convolved with the intensity
//! correlation kernel of the cascaded source,
//!
//! ```text
//! G(t₂) = ∫₀ᵀ K(t₂ − t₁) O(t₁) dt₁,   K(τ) = Π_j [1 + sinc²(Δω_j τ / 2)]
//! ```
//!
//! normalized by its far-from-object baseline `∫O = ΣO`. Two object models
//! are supported:
//!
//! * [`ObjectModel::BinSampled`] treats `O` as samples at the bin instants,
//!   exactly like the simulated bucket detector. The integral collapses to a
//!   sum over bins and is exact.
//! * [`ObjectModel::PiecewiseConstant`] holds `O` constant across each bin
//!   and integrates with composite Simpson at `step`.
//!
//! Only the bin-sampled model reduces to the independent-bin closed form
//! [`white_noise_image`] when the kernel is narrower than a bin. The
//! piecewise-constant integral tends to 1 in that limit because the kernel's
//! excess area vanishes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::TemporalObject;

/// Bandwidths `Δω_j` of the cascade stages, in radians per bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandwidthSet {
    bands: Vec<f64>,
}

impl BandwidthSet {
    pub fn new(bands: Vec<f64>) -> Result<Self> {
        if bands.is_empty() {
            return Err(Error::Bandwidth("at least one bandwidth is required".into()));
        }
        if let Some(b) = bands.iter().find(|b| !(**b > 0.0 && b.is_finite())) {
            return Err(Error::Bandwidth(format!("bandwidth {b} is not positive and finite")));
        }
        Ok(Self { bands })
    }

    pub fn uniform(rg_count: u32, bandwidth: f64) -> Result<Self> {
        Self::new(vec![bandwidth; rg_count as usize])
    }

    /// Equal bandwidths chosen so the kernel's excess over 1 has full width
    /// at half maximum `fwhm` (in bins).
    pub fn fwhm_matched(rg_count: u32, fwhm: f64) -> Result<Self> {
        if rg_count < 1 {
            return Err(Error::Bandwidth("rg_count must be at least 1".into()));
        }
        if !(fwhm > 0.0 && fwhm.is_finite()) {
            return Err(Error::Bandwidth(format!("fwhm {fwhm} must be positive")));
        }
        // Each factor must sit at s = sinc²(x) where (1+s)^N = (2^N + 1)/2.
        let n = f64::from(rg_count);
        let s = ((2f64.powi(rg_count as i32) + 1.0) / 2.0).powf(1.0 / n) - 1.0;
        // sinc² decreases monotonically on (0, π).
        let (mut lo, mut hi) = (0.0, std::f64::consts::PI);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if sinc(mid).powi(2) > s {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Self::uniform(rg_count, 4.0 * 0.5 * (lo + hi) / fwhm)
    }

    pub fn bands(&self) -> &[f64] {
        &self.bands
    }

    pub fn rg_count(&self) -> u32 {
        self.bands.len() as u32
    }
}

/// `sin(x)/x` with `sinc(0) = 1`.
pub fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        x.sin() / x
    }
}

/// `K(τ) = Π_j [1 + sinc²(Δω_j τ / 2)]`.
pub fn g2_kernel(tau: f64, bands: &BandwidthSet) -> f64 {
    bands.bands.iter().map(|w| 1.0 + sinc(w * tau / 2.0).powi(2)).product()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    /// Lags wrap to the nearest periodic image, `τ ∈ (−T/2, T/2]`.
    Periodic,
    /// Lags are taken within one period only.
    Truncated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObjectModel {
    BinSampled,
    PiecewiseConstant,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoryOptions {
    /// Quadrature step in bins; must divide the bin width.
    pub step: f64,
    pub boundary: Boundary,
    pub model: ObjectModel,
}

impl Default for TheoryOptions {
    fn default() -> Self {
        Self { step: 0.1, boundary: Boundary::Periodic, model: ObjectModel::BinSampled }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Provenance {
    Kernel { bands: Vec<f64>, options: TheoryOptions },
    WhiteNoise { rg_count: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoryCurve {
    /// Normalized image, background 1.
    pub g2: Vec<f64>,
    /// `G(t₂)` before normalization.
    pub raw: Vec<f64>,
    /// Per-bin quadrature error estimate in normalized units.
    pub error_estimate: Vec<f64>,
    pub provenance: Provenance,
}

fn wrap_lag(tau: f64, period: f64, boundary: Boundary) -> f64 {
    match boundary {
        Boundary::Truncated => tau,
        Boundary::Periodic => {
            let w = tau - period * (tau / period).round();
            if w <= -period / 2.0 {
                w + period
            } else {
                w
            }
        }
    }
}

fn subintervals(step: f64) -> Result<usize> {
    let m = 1.0 / step;
    if !(step > 0.0 && step <= 1.0) || (m - m.round()).abs() > 1e-9 {
        return Err(Error::Config(format!("quadrature step {step} must divide the bin width")));
    }
    Ok(m.round() as usize)
}

/// `G(t₂)` at every bin with its absolute error estimate, unnormalized.
///
/// An all-zero object yields all zeros.
pub fn unnormalized_image(
    object: &TemporalObject,
    bands: &BandwidthSet,
    options: &TheoryOptions,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let m = subintervals(options.step)?;
    let t = object.period_bins();
    let period = t as f64;
    let amp = object.amplitude();
    let kernel = |tau: f64| g2_kernel(wrap_lag(tau, period, options.boundary), bands);

    let mut raw = vec![0.0; t];
    let mut err = vec![0.0; t];
    for k in 0..t {
        let t2 = k as f64 + 0.5;
        for (j, &o) in amp.iter().enumerate().filter(|(_, o)| **o != 0.0) {
            match options.model {
                ObjectModel::BinSampled => {
                    raw[k] += o * kernel(k as f64 - j as f64);
                }
                ObjectModel::PiecewiseConstant => {
                    let h = 1.0 / m as f64;
                    let (mut simpson, mut trapezoid) = (0.0, 0.0);
                    for i in 0..m {
                        let a = j as f64 + i as f64 * h;
                        let fa = kernel(t2 - a);
                        let fm = kernel(t2 - (a + 0.5 * h));
                        let fb = kernel(t2 - (a + h));
                        simpson += h / 6.0 * (fa + 4.0 * fm + fb);
                        trapezoid += h / 2.0 * (fa + fb);
                    }
                    raw[k] += o * simpson;
                    err[k] += o * (simpson - trapezoid).abs();
                }
            }
        }
    }
    Ok((raw, err))
}

/// The normalized theoretical image for the given bandwidths.
pub fn theoretical_image(
    object: &TemporalObject,
    bands: &BandwidthSet,
    options: &TheoryOptions,
) -> Result<TheoryCurve> {
    let sum = object.object_sum();
    if sum <= 0.0 {
        return Err(Error::Normalization("object sum".into()));
    }
    let (raw, err) = unnormalized_image(object, bands, options)?;
    let g2 = raw.iter().map(|g| g / sum).collect::<Vec<_>>();
    let error_estimate = err.iter().zip(&g2).map(|(e, g)| (e / sum).max(4.0 * f64::EPSILON * g)).collect();
    Ok(TheoryCurve {
        g2,
        raw,
        error_estimate,
        provenance: Provenance::Kernel { bands: bands.bands.clone(), options: *options },
    })
}

/// Closed form for independent time bins: `g2[t] = 1 + (2^N − 1)·O(t)/ΣO`.
///
/// With bins independent, `⟨I(t₂)I(t₁)⟩ = μ²` off the diagonal and
/// `2^N μ²` on it, so `⟨B·I(t)⟩ = μ²(ΣO + (2^N − 1) O(t))` while
/// `⟨B⟩⟨I(t)⟩ = μ² ΣO`.
pub fn white_noise_image(object: &TemporalObject, rg_count: u32) -> Result<TheoryCurve> {
    let sum = object.object_sum();
    if !(sum > 0.0) {
        return Err(Error::Domain { what: "object sum", value: sum });
    }
    if rg_count < 1 {
        return Err(Error::Domain { what: "rg_count", value: f64::from(rg_count) });
    }
    let excess = 2f64.powi(rg_count as i32) - 1.0;
    let g2: Vec<f64> = object.amplitude().iter().map(|o| 1.0 + excess * o / sum).collect();
    Ok(TheoryCurve {
        raw: g2.iter().map(|g| g * sum).collect(),
        error_estimate: vec![0.0; g2.len()],
        g2,
        provenance: Provenance::WhiteNoise { rg_count },
    })
}

/// Visibility `Δ/(2 + Δ)` of the white-noise image at bins of equal
/// amplitude, with `Δ = (2^N − 1)·O_peak/ΣO`.
pub fn predicted_visibility(object: &TemporalObject, rg_count: u32, peak_bins: &[usize]) -> Result<f64> {
    let first = *peak_bins.first().ok_or_else(|| Error::Selection("peak bin set is empty".into()))?;
    let amp = object.amplitude();
    if let Some(&t) = peak_bins.iter().find(|&&t| t >= amp.len()) {
        return Err(Error::Selection(format!("bin {t} outside period of {} bins", amp.len())));
    }
    let peak = amp[first];
    if let Some(&t) = peak_bins.iter().find(|&&t| amp[t] != peak) {
        return Err(Error::AmbiguousPeak { first: peak, other: amp[t] });
    }
    let sum = object.object_sum();
    if !(sum > 0.0) {
        return Err(Error::Domain { what: "object sum", value: sum });
    }
    let delta = (2f64.powi(rg_count as i32) - 1.0) * peak / sum;
    Ok(delta / (2.0 + delta))
}
