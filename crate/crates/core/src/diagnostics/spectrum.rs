//! Hann-windowed time spectra of oscillator traces.
//!
//! Frequencies are reported with the sign convention of the solitary ansatz:
//! a trace behaving like `e^{-iωt}` produces a peak at `+ω`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};

pub const MIN_WINDOW_SAMPLES: usize = 1024;

/// Peaks below this fraction of the largest magnitude are ignored.
pub const PEAK_FLOOR: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Peak {
    pub frequency: f64,
    /// Interpolated amplitude, normalised so that `a e^{-iωt}` reports `≈ |a|`.
    pub magnitude: f64,
    /// Fraction of total spectral power in this peak's lobe.
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumReport {
    pub window: (f64, f64),
    pub bin_width: f64,
    /// Sorted by magnitude, largest first.
    pub peaks: Vec<Peak>,
    /// Power with `|ω| ≤ m` over total power (1 for a zero trace).
    pub in_band_fraction: f64,
    /// Largest peak mass over total power.
    pub dominance: f64,
}

impl SpectrumReport {
    /// Total mass of peaks within `tol` of `frequency`.
    pub fn mass_near(&self, frequency: f64, tol: f64) -> f64 {
        self.peaks.iter().filter(|p| (p.frequency - frequency).abs() <= tol).map(|p| p.mass).sum()
    }

    pub fn dominant(&self) -> Option<&Peak> {
        self.peaks.iter().max_by(|a, b| a.mass.total_cmp(&b.mass))
    }
}

/// Windowed power spectrum on ascending reported frequencies.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub frequencies: Vec<f64>,
    pub amplitude: Vec<f64>,
    pub bin_width: f64,
}

/// Sample indices `[ia, ib]` covering `window` for a trace starting at `t = 0`.
fn window_indices(len: usize, dt: f64, window: (f64, f64)) -> Result<(usize, usize)> {
    let (ta, tb) = window;
    if !(dt > 0.0 && ta.is_finite() && tb.is_finite() && ta >= 0.0 && tb > ta) {
        return Err(Error::Spectrum(format!("invalid window [{ta}, {tb}] with dt = {dt}")));
    }
    if len == 0 {
        return Err(Error::Spectrum("empty trace".into()));
    }
    let extent = (len - 1) as f64 * dt;
    if tb > extent * (1.0 + 1e-12) + 1e-12 {
        return Err(Error::Spectrum(format!("window end {tb} lies beyond the trace extent {extent}")));
    }
    let ia = (ta / dt - 1e-9).ceil() as usize;
    let ib = ((tb / dt + 1e-9).floor() as usize).min(len - 1);
    let count = ib + 1 - ia.min(ib + 1);
    if count < MIN_WINDOW_SAMPLES {
        return Err(Error::Spectrum(format!(
            "window holds {count} samples, at least {MIN_WINDOW_SAMPLES} are required"
        )));
    }
    Ok((ia, ib))
}

pub fn windowed_spectrum(trace: &[Complex64], dt: f64, window: (f64, f64)) -> Result<Spectrum> {
    let (ia, ib) = window_indices(trace.len(), dt, window)?;
    let n = ib - ia + 1;
    let hann = |k: usize| 0.5 - 0.5 * (TAU * k as f64 / n as f64).cos();
    let norm: f64 = (0..n).map(hann).sum();
    let mut buf: Vec<Complex64> = trace[ia..=ib].iter().enumerate().map(|(k, z)| z * hann(k)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);

    let bin_width = TAU / (n as f64 * dt);
    // DFT bin k has angular frequency 2πk/(n dt); reported ω is its negative.
    let signed = |k: usize| if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
    let mut bins: Vec<(f64, f64)> = (0..n).map(|k| (-signed(k) * bin_width, buf[k].norm() / norm)).collect();
    bins.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(Spectrum {
        frequencies: bins.iter().map(|b| b.0).collect(),
        amplitude: bins.iter().map(|b| b.1).collect(),
        bin_width,
    })
}

pub fn time_spectrum(trace: &[Complex64], dt: f64, window: (f64, f64), mass: f64) -> Result<SpectrumReport> {
    let spec = windowed_spectrum(trace, dt, window)?;
    Ok(report(&spec, window, mass))
}

pub fn report(spec: &Spectrum, window: (f64, f64), mass: f64) -> SpectrumReport {
    let amp = &spec.amplitude;
    let power: Vec<f64> = amp.iter().map(|a| a * a).collect();
    let total: f64 = power.iter().sum();
    if total == 0.0 {
        return SpectrumReport {
            window,
            bin_width: spec.bin_width,
            peaks: Vec::new(),
            in_band_fraction: 1.0,
            dominance: 0.0,
        };
    }
    let in_band: f64 = spec
        .frequencies
        .iter()
        .zip(&power)
        .filter(|(w, _)| w.abs() <= mass)
        .map(|(_, p)| p)
        .sum();

    let n = amp.len();
    let max = amp.iter().cloned().fold(0.0, f64::max);
    let mut peaks = Vec::new();
    for k in 0..n {
        let left = if k > 0 { amp[k - 1] } else { 0.0 };
        let right = if k + 1 < n { amp[k + 1] } else { 0.0 };
        if !(amp[k] > left && amp[k] >= right && amp[k] >= PEAK_FLOOR * max) {
            continue;
        }
        let (mut offset, mut magnitude) = (0.0, amp[k]);
        if left > 0.0 && right > 0.0 {
            let (l, c, r) = (left.ln(), amp[k].ln(), right.ln());
            let denom = l - 2.0 * c + r;
            if denom < 0.0 {
                offset = (0.5 * (l - r) / denom).clamp(-0.5, 0.5);
                magnitude = (c - 0.25 * (l - r) * offset).exp();
            }
        }
        let mut lo = k;
        while lo > 0 && power[lo - 1] <= power[lo] {
            lo -= 1;
        }
        let mut hi = k;
        while hi + 1 < n && power[hi + 1] <= power[hi] {
            hi += 1;
        }
        let lobe: f64 = power[lo..=hi].iter().sum();
        peaks.push(Peak {
            frequency: spec.frequencies[k] + offset * spec.bin_width,
            magnitude,
            mass: lobe / total,
        });
    }
    peaks.sort_by(|a, b| b.magnitude.total_cmp(&a.magnitude));
    let dominance = peaks.iter().map(|p| p.mass).fold(0.0, f64::max);
    SpectrumReport {
        window,
        bin_width: spec.bin_width,
        peaks,
        in_band_fraction: in_band / total,
        dominance,
    }
}
