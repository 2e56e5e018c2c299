//! Per-sample diagnostic records and the end-of-run attraction summary.
//!
//! The verdict thresholds are operational reporting cutoffs for finite runs.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::spectrum::{time_spectrum, SpectrumReport};
use crate::solitary::ManifoldDistanceReport;

/// Late-window dominance required for "attracting".
pub const DOMINANCE_ATTRACTING: f64 = 0.99;
/// Required ratio between the largest and the final manifold distance.
pub const DISTANCE_REDUCTION: f64 = 10.0;
/// Dominance at or below which two lines may indicate a multifrequency state.
pub const DOMINANCE_MULTI: f64 = 0.9;
/// Minimal spectral mass of a line.
pub const LINE_MASS: f64 = 1e-2;
/// A run whose distance never exceeds this fraction of the state's own size
/// is already on the manifold.
pub const ON_MANIFOLD: f64 = 1e-2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagRecord {
    pub time: f64,
    pub energy: f64,
    pub charge: f64,
    /// `(R, ‖·‖_{E,R})`, ascending in `R`.
    pub seminorms: Vec<(f64, f64)>,
    /// Weighted local metric to the zero state.
    pub ef_norm: f64,
    pub ef_metric_to_s: Option<f64>,
    #[serde(skip_deserializing)]
    pub nearest: Option<ManifoldDistanceReport>,
    #[serde(skip)]
    pub spectral: Option<SpectrumReport>,
}

impl DiagRecord {
    /// A record carrying only its time stamp.
    pub fn bare(time: f64) -> Self {
        Self {
            time,
            energy: f64::NAN,
            charge: f64::NAN,
            seminorms: Vec::new(),
            ef_norm: f64::NAN,
            ef_metric_to_s: None,
            nearest: None,
            spectral: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Attracting,
    Multifrequency,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Attracting => "attracting",
            Self::Multifrequency => "multifrequency",
            Self::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttractionReport {
    pub verdict: Verdict,
    /// Least-squares slope of `ln dist` against `t` over the second half of the run.
    pub distance_slope: Option<f64>,
    pub distance_max: Option<f64>,
    pub distance_final: Option<f64>,
    /// Spectra of each trace over the first and the second half of the run.
    pub early_spectra: Vec<SpectrumReport>,
    pub late_spectra: Vec<SpectrumReport>,
    /// Frequencies of lines present with mass `≥ LINE_MASS` in both halves, per trace.
    pub stable_lines: Vec<Vec<f64>>,
    pub best_omega: Option<f64>,
    pub best_amplitude: Option<f64>,
}

fn slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let (mx, my) = points.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0 / n, a.1 + p.1 / n));
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn lines(report: &SpectrumReport) -> Vec<f64> {
    report.peaks.iter().filter(|p| p.mass >= LINE_MASS).map(|p| p.frequency).collect()
}

/// Summarizes a completed run. `dt` is the trace sampling interval.
pub fn attraction_report(records: &[DiagRecord], traces: &[Vec<Complex64>], dt: f64, mass: f64) -> AttractionReport {
    let distances: Vec<(f64, f64)> =
        records.iter().filter_map(|r| r.ef_metric_to_s.map(|d| (r.time, d))).collect();
    let t_end = records.last().map(|r| r.time).unwrap_or(0.0);
    let late: Vec<(f64, f64)> =
        distances.iter().filter(|p| p.0 >= 0.5 * t_end && p.1 > 0.0).map(|p| (p.0, p.1.ln())).collect();
    let distance_max = distances.iter().map(|p| p.1).reduce(f64::max);
    let distance_final = distances.last().map(|p| p.1);
    let nearest = records.iter().rev().find_map(|r| r.nearest);
    let size_max = records.iter().map(|r| r.ef_norm).filter(|v| v.is_finite()).fold(0.0, f64::max);

    let mut early_spectra = Vec::new();
    let mut late_spectra = Vec::new();
    for trace in traces {
        let extent = trace.len().saturating_sub(1) as f64 * dt;
        let half = 0.5 * extent;
        if let (Ok(a), Ok(b)) =
            (time_spectrum(trace, dt, (0.0, half), mass), time_spectrum(trace, dt, (half, extent), mass))
        {
            early_spectra.push(a);
            late_spectra.push(b);
        }
    }
    let spectra_ok = !traces.is_empty() && late_spectra.len() == traces.len();

    let stable_lines: Vec<Vec<f64>> = early_spectra
        .iter()
        .zip(&late_spectra)
        .map(|(a, b)| {
            let tol = 2.0 * a.bin_width.max(b.bin_width);
            let early = lines(a);
            lines(b).into_iter().filter(|w| early.iter().any(|e| (e - w).abs() <= tol)).collect()
        })
        .collect();

    let dominant = spectra_ok && late_spectra.iter().all(|s| s.dominance >= DOMINANCE_ATTRACTING);
    let reduced = match (distance_max, distance_final) {
        (Some(max), Some(last)) => {
            max >= DISTANCE_REDUCTION * last || (size_max > 0.0 && max <= ON_MANIFOLD * size_max)
        }
        _ => false,
    };
    let multi = spectra_ok
        && late_spectra.iter().zip(&stable_lines).any(|(s, l)| s.dominance <= DOMINANCE_MULTI && l.len() >= 2);

    let verdict = if dominant && reduced {
        Verdict::Attracting
    } else if multi {
        Verdict::Multifrequency
    } else {
        Verdict::Inconclusive
    };
    AttractionReport {
        verdict,
        distance_slope: slope(&late),
        distance_max,
        distance_final,
        early_spectra,
        late_spectra,
        stable_lines,
        best_omega: nearest.filter(|n| !n.zero_wave).map(|n| n.best_omega),
        best_amplitude: nearest.filter(|n| !n.zero_wave).map(|n| n.best_amplitude),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(t: f64, d: f64) -> DiagRecord {
        DiagRecord { ef_metric_to_s: Some(d), ef_norm: 1.0, ..DiagRecord::bare(t) }
    }

    fn tone(n: usize, dt: f64, parts: &[(f64, f64)]) -> Vec<Complex64> {
        (0..n)
            .map(|k| parts.iter().map(|&(a, w)| Complex64::from_polar(a, -w * k as f64 * dt)).sum())
            .collect()
    }

    #[test]
    fn decaying_distance_and_single_line_attracts() {
        let records: Vec<_> = (0..50).map(|k| record(k as f64, 0.5 * (-0.1 * k as f64).exp())).collect();
        let trace = tone(8192, 0.05, &[(1.0, 0.8)]);
        let r = attraction_report(&records, &[trace], 0.05, 1.0);
        assert_eq!(r.verdict, Verdict::Attracting);
        assert!((r.distance_slope.unwrap() + 0.1).abs() < 1e-12);
    }

    #[test]
    fn two_persistent_lines_are_multifrequency() {
        let records: Vec<_> = (0..20).map(|k| record(k as f64, 0.3)).collect();
        let trace = tone(8192, 0.05, &[(1.0, 0.47), (0.5, 1.41)]);
        let r = attraction_report(&records, &[trace], 0.05, 1.0);
        assert_eq!(r.verdict, Verdict::Multifrequency);
        assert_eq!(r.stable_lines[0].len(), 2);
    }

    #[test]
    fn short_run_is_inconclusive() {
        let records = vec![record(0.0, 0.3), record(1.0, 0.29)];
        let trace = tone(100, 0.01, &[(1.0, 0.8)]);
        assert_eq!(attraction_report(&records, &[trace], 0.01, 1.0).verdict, Verdict::Inconclusive);
    }
}
