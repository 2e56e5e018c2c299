//! Distance from a state to the solitary manifold in the weighted local metric.

use rayon::prelude::*;
use serde::Serialize;

use super::{amplitudes_for_kappa, kappa, meanfield_solitary, solitary_profiles_multi, stationary_state};
use crate::diagnostics::norms::{metric_e_f, PhaseMetric};
use crate::model::{Coupling, FieldState, GridSpec, ModelSpec};
use crate::numerics::optimize::{golden_section, minimize_periodic};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DistanceOptions {
    /// Uniform frequencies in `(−m, m)`.
    pub omega_samples: usize,
    pub refine_passes: usize,
    pub refine_factor: usize,
    /// Golden-section polish in `ω` after the refinement passes.
    pub polish_omega: bool,
    pub phase_tol: f64,
}

impl Default for DistanceOptions {
    fn default() -> Self {
        Self { omega_samples: 257, refine_passes: 2, refine_factor: 8, polish_omega: true, phase_tol: 1e-10 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ManifoldDistanceReport {
    pub distance: f64,
    pub best_omega: f64,
    pub best_amplitude: f64,
    /// In `[0, 2π)`.
    pub best_phase: f64,
    pub candidates_examined: usize,
    /// The closest point is the zero solitary wave.
    pub zero_wave: bool,
}

/// Nonzero solitary profiles at `omega`, as `(amplitude, ψ)`.
fn profiles_at(model: &ModelSpec, grid: &GridSpec, omega: f64) -> Vec<(f64, FieldState)> {
    let Ok(k) = kappa(omega, model.mass) else {
        return Vec::new();
    };
    if k == 0.0 {
        return Vec::new();
    }
    match &model.coupling {
        Coupling::Oscillators(osc) if osc.len() == 1 => {
            let centre = osc[0].position;
            amplitudes_for_kappa(&osc[0].potential, k)
                .into_iter()
                .map(|c| {
                    let psi = grid.xs().iter().map(|&x| (c * (-k * (x - centre).abs()).exp()).into()).collect();
                    (c, stationary_state(psi, omega))
                })
                .collect()
        }
        Coupling::Oscillators(osc) if osc.is_empty() => Vec::new(),
        Coupling::Oscillators(_) => solitary_profiles_multi(model, omega)
            .map(|res| {
                res.profiles
                    .into_iter()
                    .filter(|p| !p.is_zero())
                    .map(|p| (p.amplitude(), p.sample(grid, 0.0)))
                    .collect()
            })
            .unwrap_or_default(),
        Coupling::MeanField(mf) => meanfield_solitary(mf, omega, model.mass, grid)
            .map(|sol| sol.profiles.into_iter().map(|p| (p.pairing, p.state(0.0))).collect())
            .unwrap_or_default(),
    }
}

#[derive(Debug, Clone, Copy)]
struct Best {
    value: f64,
    omega: f64,
    phase: f64,
    branch: usize,
    amplitude: f64,
}

fn better(a: Best, b: Best) -> Best {
    match a.value.total_cmp(&b.value) {
        std::cmp::Ordering::Less => a,
        std::cmp::Ordering::Greater => b,
        std::cmp::Ordering::Equal => {
            if a.omega <= b.omega {
                a
            } else {
                b
            }
        }
    }
}

fn best_phase(pm: &PhaseMetric, tol: f64) -> (f64, f64) {
    let scan = minimize_periodic(|t| pm.at(t), 16, tol);
    let r = pm.reference_phase();
    let (t, v) = golden_section(|t| pm.at(t), r - 0.3, r + 0.3, tol);
    if v < scan.1 {
        (t.rem_euclid(std::f64::consts::TAU), v)
    } else {
        scan
    }
}

/// Best nonzero candidate at one frequency and the number of profiles examined.
fn at_omega(state: &FieldState, model: &ModelSpec, grid: &GridSpec, omega: f64, tol: f64) -> (Option<Best>, usize) {
    let profiles = profiles_at(model, grid, omega);
    let count = profiles.len();
    let best = profiles
        .iter()
        .enumerate()
        .map(|(branch, (amplitude, cand))| {
            let pm = PhaseMetric::new(state, cand, grid, model.mass);
            let (phase, value) = best_phase(&pm, tol);
            Best { value, omega, phase, branch, amplitude: *amplitude }
        })
        .reduce(better);
    (best, count)
}

/// Minimizes the weighted local metric over frequency, branch and phase.
///
/// The zero solitary wave is always a candidate, so the result is finite.
pub fn manifold_distance(state: &FieldState, model: &ModelSpec, grid: &GridSpec) -> ManifoldDistanceReport {
    manifold_distance_with(state, model, grid, &DistanceOptions::default())
}

pub fn manifold_distance_with(
    state: &FieldState,
    model: &ModelSpec,
    grid: &GridSpec,
    opts: &DistanceOptions,
) -> ManifoldDistanceReport {
    let m = model.mass;
    let zero = FieldState::zeros(state.len());
    let zero_distance = metric_e_f(state, &zero, grid, m);
    let mut examined = 1;

    let n = opts.omega_samples.max(1);
    let h = 2.0 * m / (n + 1) as f64;
    let coarse: Vec<(Option<Best>, usize)> = (0..n)
        .into_par_iter()
        .map(|i| at_omega(state, model, grid, -m + (i + 1) as f64 * h, opts.phase_tol))
        .collect();
    examined += coarse.iter().map(|c| c.1).sum::<usize>();
    let mut best = coarse.into_iter().filter_map(|c| c.0).reduce(better);

    let inside = |w: f64| w.abs() < m;
    let mut spacing = h;
    if let Some(mut b) = best {
        for _ in 0..opts.refine_passes {
            spacing /= opts.refine_factor as f64;
            let r = opts.refine_factor as i64;
            let local: Vec<(Option<Best>, usize)> = (-r..=r)
                .filter(|&j| j != 0)
                .map(|j| b.omega + j as f64 * spacing)
                .filter(|&w| inside(w))
                .collect::<Vec<_>>()
                .into_par_iter()
                .map(|w| at_omega(state, model, grid, w, opts.phase_tol))
                .collect();
            examined += local.iter().map(|c| c.1).sum::<usize>();
            b = local.into_iter().filter_map(|c| c.0).fold(b, better);
        }
        if opts.polish_omega {
            let lo = (b.omega - spacing).max(-m * (1.0 - 1e-12));
            let hi = (b.omega + spacing).min(m * (1.0 - 1e-12));
            let mut polished = b;
            golden_section(
                |w| {
                    let (cand, count) = at_omega(state, model, grid, w, opts.phase_tol);
                    examined += count;
                    match cand {
                        Some(c) => {
                            polished = better(polished, c);
                            c.value
                        }
                        None => f64::INFINITY,
                    }
                },
                lo,
                hi,
                1e-13 * m,
            );
            b = polished;
        }
        best = Some(b);
    }

    // Recompute the winner directly rather than through the phase expansion.
    let recomputed = best.and_then(|b| {
        let profiles = profiles_at(model, grid, b.omega);
        profiles.get(b.branch).map(|(amp, cand)| {
            let d = metric_e_f(state, &cand.rotated(b.phase), grid, m);
            Best { value: d, amplitude: *amp, ..b }
        })
    });
    match recomputed {
        Some(b) if b.value < zero_distance => ManifoldDistanceReport {
            distance: b.value,
            best_omega: b.omega,
            best_amplitude: b.amplitude,
            best_phase: b.phase.rem_euclid(std::f64::consts::TAU),
            candidates_examined: examined,
            zero_wave: false,
        },
        _ => ManifoldDistanceReport {
            distance: zero_distance,
            best_omega: 0.0,
            best_amplitude: 0.0,
            best_phase: 0.0,
            candidates_examined: examined,
            zero_wave: true,
        },
    }
}

/// The manifold point a report refers to, sampled on `grid`.
pub fn closest_point(report: &ManifoldDistanceReport, model: &ModelSpec, grid: &GridSpec) -> FieldState {
    if report.zero_wave {
        return FieldState::zeros(grid.n_points);
    }
    profiles_at(model, grid, report.best_omega)
        .into_iter()
        .min_by(|a, b| (a.0 - report.best_amplitude).abs().total_cmp(&(b.0 - report.best_amplitude).abs()))
        .map(|(_, s)| s.rotated(report.best_phase))
        .unwrap_or_else(|| FieldState::zeros(grid.n_points))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::OscillatorSpec;
    use crate::solitary::{sample_solitary, SolitaryWave};
    use num_complex::Complex64;

    fn setup() -> (ModelSpec, GridSpec, SolitaryWave) {
        let grid = GridSpec::new(10.0, 0.02).unwrap();
        let osc = OscillatorSpec::new(0.0, vec![0.0, -1.0, 0.25]).unwrap();
        let wave = SolitaryWave::all_at(&osc.potential, 0.8, 1.0, 0.0).unwrap().remove(0);
        (ModelSpec::oscillators(1.0, vec![osc]).unwrap(), grid, wave)
    }

    #[test]
    fn member_of_manifold_is_at_distance_zero() {
        let (model, grid, wave) = setup();
        let state = sample_solitary(&wave, &grid, 1.3);
        let r = manifold_distance(&state, &model, &grid);
        assert!(r.distance <= 1e-8, "{r:?}");
        assert!((r.best_omega - 0.8).abs() < 2.0 / 258.0 / 64.0);
        assert!(!r.zero_wave);
        let direct = metric_e_f(&state, &closest_point(&r, &model, &grid), &grid, 1.0);
        assert!((direct - r.distance).abs() <= 1e-10);
    }

    #[test]
    fn zero_state_uses_zero_wave() {
        let (model, grid, _) = setup();
        let r = manifold_distance(&FieldState::zeros(grid.n_points), &model, &grid);
        assert_eq!(r.distance, 0.0);
        assert!(r.zero_wave);
    }

    #[test]
    fn perturbation_bounds_distance_and_phase_does_not_matter() {
        let (model, grid, wave) = setup();
        let base = sample_solitary(&wave, &grid, 0.0);
        let mut bumped = base.clone();
        for (j, x) in grid.xs().into_iter().enumerate() {
            if (x - 2.0).abs() < 0.5 {
                bumped.psi[j] += Complex64::new(0.01 * (1.0 - 4.0 * (x - 2.0).powi(2)).powi(2), 0.0);
            }
        }
        let delta = metric_e_f(&bumped, &base, &grid, 1.0);
        let r = manifold_distance(&bumped, &model, &grid);
        assert!(r.distance <= delta * (1.0 + 1e-9), "{} > {delta}", r.distance);
        let rot = manifold_distance(&bumped.rotated(2.0), &model, &grid);
        assert!((rot.distance - r.distance).abs() <= 1e-9);
    }

    #[test]
    fn free_model_has_only_the_zero_wave() {
        let (_, grid, wave) = setup();
        let state = sample_solitary(&wave, &grid, 0.0);
        let r = manifold_distance(&state, &ModelSpec::free(1.0).unwrap(), &grid);
        assert!(r.zero_wave);
        assert_eq!(r.candidates_examined, 1);
    }
}
