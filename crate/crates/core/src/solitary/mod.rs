//! Solitary waves `φ_ω(x) e^{-iωt}` and the distance to the solitary manifold.
//!
//! For a single oscillator at `X` the profile is `C e^{-κ(ω)|x-X|}` with
//! `κ(ω) = √(m² − ω²)`, and the jump of `φ'` at `X` forces `2κ(ω) = F(C)/C`.
//! Several oscillators and the mean-field coupling are handled in the
//! submodules.

mod distance;
mod meanfield;
mod multi;

pub use distance::{closest_point, manifold_distance, manifold_distance_with, DistanceOptions, ManifoldDistanceReport};
pub use meanfield::{meanfield_solitary, sigma_of_samples, stationary_residual, MeanFieldProfile, MeanFieldSolutions};
pub use multi::{nodal_newton, solitary_profiles_multi, MultiProfiles, NodalProfile};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{FieldState, GridSpec, Potential};
use crate::numerics::poly;

/// `κ(ω) = √(m² − ω²)`; zero at the band edge.
pub fn kappa(omega: f64, mass: f64) -> Result<f64> {
    if !(omega.is_finite() && mass.is_finite()) {
        return Err(Error::NonFinite("kappa"));
    }
    if omega.abs() > mass {
        return Err(Error::OutsideBand { omega, mass });
    }
    Ok(((mass - omega) * (mass + omega)).sqrt())
}

/// Residual of `2κ = F(C)/C` for the potential `coeffs`.
pub fn amplitude_residual(potential: &Potential, kappa: f64, amplitude: f64) -> f64 {
    2.0 * kappa - potential.gain(amplitude * amplitude)
}

/// All `C > 0` with `2κ(ω) = F(C)/C = g(C²)`, ascending.
///
/// `g(s) − 2κ` is a polynomial of degree `p − 1` in `s = C²`; its positive
/// real roots are found from the companion matrix and polished by Newton.
pub fn amplitude_roots(coeffs: &[f64], omega: f64, mass: f64) -> Result<Vec<f64>> {
    let k = kappa(omega, mass)?;
    if k == 0.0 {
        return Err(Error::OutsideBand { omega, mass });
    }
    let potential = Potential::new(coeffs.to_vec())?;
    Ok(amplitudes_for_kappa(&potential, k))
}

pub(crate) fn amplitudes_for_kappa(potential: &Potential, kappa: f64) -> Vec<f64> {
    let u = potential.coeffs();
    // g(s) - 2κ = -2κ - Σ_{k≥0} 2(k+1) u_{k+1} s^k
    let mut a: Vec<f64> = (1..u.len()).map(|l| -2.0 * l as f64 * u[l]).collect();
    if a.is_empty() {
        a.push(0.0);
    }
    a[0] -= 2.0 * kappa;
    poly::positive_real_roots(&a).into_iter().map(f64::sqrt).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelTag {
    /// One oscillator; the profile is an exact exponential.
    SingleOscillator,
}

/// A nonzero single-oscillator solitary wave.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolitaryWave {
    pub omega: f64,
    pub amplitude: f64,
    pub kappa: f64,
    pub mass: f64,
    /// Oscillator position `X`.
    pub center: f64,
    pub potential: Potential,
    pub model_tag: ModelTag,
}

impl SolitaryWave {
    /// Validates `κ² + ω² = m²`, `C > 0` and the amplitude equation.
    pub fn new(omega: f64, amplitude: f64, mass: f64, center: f64, potential: Potential) -> Result<Self> {
        let kappa = kappa(omega, mass)?;
        if !(amplitude > 0.0 && amplitude.is_finite()) {
            return Err(Error::Construction(format!("amplitude must be positive, got {amplitude}")));
        }
        let wave = Self {
            omega,
            amplitude,
            kappa,
            mass,
            center,
            potential,
            model_tag: ModelTag::SingleOscillator,
        };
        let r = wave.residual();
        if r.abs() > 1e-10 * (1.0 + 2.0 * kappa) {
            return Err(Error::Construction(format!(
                "amplitude {amplitude} does not satisfy 2κ = F(C)/C at ω = {omega} (residual {r:e})"
            )));
        }
        Ok(wave)
    }

    /// Every nonzero wave of the potential at frequency `omega`, one per amplitude root.
    pub fn all_at(potential: &Potential, omega: f64, mass: f64, center: f64) -> Result<Vec<Self>> {
        amplitude_roots(potential.coeffs(), omega, mass)?
            .into_iter()
            .map(|c| Self::new(omega, c, mass, center, potential.clone()))
            .collect()
    }

    /// `2κ − F(C)/C`.
    pub fn residual(&self) -> f64 {
        amplitude_residual(&self.potential, self.kappa, self.amplitude)
    }

    /// Jump condition `φ'(X+) − φ'(X−) + F(φ(X))` evaluated on the exact profile.
    pub fn jump_residual(&self) -> f64 {
        let c = self.amplitude;
        let right = -self.kappa * c;
        let left = self.kappa * c;
        right - left + self.potential.force(Complex64::new(c, 0.0)).re
    }

    pub fn profile(&self, x: f64) -> f64 {
        self.amplitude * (-self.kappa * (x - self.center).abs()).exp()
    }

    /// `∫ |φ|² = C²/κ`.
    pub fn l2_norm_sq(&self) -> f64 {
        self.amplitude * self.amplitude / self.kappa
    }

    /// `m² C²/κ + U(C)`.
    pub fn energy(&self) -> f64 {
        self.mass * self.mass * self.l2_norm_sq() + self.potential.value_sq(self.amplitude * self.amplitude)
    }

    /// `ω C²/κ`.
    pub fn charge(&self) -> f64 {
        self.omega * self.l2_norm_sq()
    }
}

/// `(e^{iθ}φ_ω, −iω e^{iθ}φ_ω)` on the grid at `time = 0`.
pub fn sample_solitary(wave: &SolitaryWave, grid: &GridSpec, phase: f64) -> FieldState {
    let rot = Complex64::from_polar(1.0, phase);
    let psi: Vec<Complex64> = grid.xs().iter().map(|&x| rot * wave.profile(x)).collect();
    let pi = psi.iter().map(|z| Complex64::new(0.0, -wave.omega) * z).collect();
    FieldState { psi, pi, time: 0.0 }
}

/// `(φ, −iωφ)` for an arbitrary sampled profile.
pub(crate) fn stationary_state(psi: Vec<Complex64>, omega: f64) -> FieldState {
    let pi = psi.iter().map(|z| Complex64::new(0.0, -omega) * z).collect();
    FieldState { psi, pi, time: 0.0 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn quartic() -> Potential {
        Potential::new(vec![0.0, -1.0, 0.25]).unwrap()
    }

    #[test]
    fn kappa_examples() {
        assert_eq!(kappa(0.0, 1.0).unwrap(), 1.0);
        assert_relative_eq!(kappa(0.6, 1.0).unwrap(), 0.8, epsilon = 1e-15);
        assert_eq!(kappa(1.0, 1.0).unwrap(), 0.0);
        assert!(matches!(kappa(1.2, 1.0), Err(Error::OutsideBand { .. })));
        let msg = kappa(-1.2, 1.0).unwrap_err().to_string();
        assert!(msg.contains("no nonzero solitary waves for |ω|≥m"));
    }

    #[test]
    fn amplitude_roots_examples() {
        let r = amplitude_roots(&[0.0, -1.0, 0.25], 0.8, 1.0).unwrap();
        assert_eq!(r.len(), 1);
        assert_relative_eq!(r[0], 0.8f64.sqrt(), epsilon = 1e-14);
        // Substituting back: 2κ = 1.2 = 2 − C².
        assert!((1.2 - (2.0 - r[0] * r[0])).abs() < 1e-14);

        assert!(amplitude_roots(&[0.0, -1.0, 0.25], 0.0, 1.0).unwrap().is_empty());
        for w in [-0.9, 0.0, 0.3, 0.99] {
            assert!(amplitude_roots(&[0.0, 0.0, 1.0], w, 1.0).unwrap().is_empty());
        }
        assert!(amplitude_roots(&[0.0, -1.0, 0.25], 1.0, 1.0).is_err());
    }

    #[test]
    fn amplitude_roots_two_branches() {
        // g(s) = 2 - 6s + 3s² (u = 0, -1, 1.5, -0.5): roots where g(s) = 2κ.
        let coeffs = [0.0, -1.0, 1.5, -0.5];
        let r = amplitude_roots(&coeffs, 0.6, 1.0).unwrap();
        let k = 0.8;
        assert_eq!(r.len(), 2);
        for c in r {
            let p = Potential::new(coeffs.to_vec()).unwrap();
            assert!(amplitude_residual(&p, k, c).abs() < 1e-12);
        }
    }

    #[test]
    fn wave_invariants_and_jump() {
        let w = &SolitaryWave::all_at(&quartic(), 0.8, 1.0, 0.0).unwrap()[0];
        assert!((w.kappa * w.kappa + w.omega * w.omega - 1.0).abs() < 1e-12);
        assert!(w.jump_residual().abs() < 1e-10);
        assert!(SolitaryWave::new(0.8, 0.9, 1.0, 0.0, quartic()).is_err());
    }

    #[test]
    fn sampling_examples() {
        let g = GridSpec::new(10.0, 0.05).unwrap();
        let p = Potential::new(vec![0.0, -1.0, 0.25]).unwrap();
        // ω = 0 needs 2 = 2 - C²: pick a potential with a static wave instead.
        let static_pot = Potential::new(vec![0.0, -1.5, 0.25]).unwrap();
        let w0 = &SolitaryWave::all_at(&static_pot, 0.0, 1.0, 0.0).unwrap()[0];
        let s = sample_solitary(w0, &g, 0.0);
        assert!(s.pi.iter().all(|z| z.norm() == 0.0));

        let w = &SolitaryWave::all_at(&p, 0.8, 1.0, 0.0).unwrap()[0];
        let a = sample_solitary(w, &g, 0.0);
        let b = sample_solitary(w, &g, std::f64::consts::PI);
        for j in 0..g.n_points {
            assert!((a.psi[j] + b.psi[j]).norm() < 1e-15);
            assert!((a.pi[j] + b.pi[j]).norm() < 1e-15);
        }
        assert_eq!(a.time, 0.0);
    }
}
