//! Stationary states of the mean-field model `ψ̈ = ψ'' − m²ψ + ρ F(⟨ρ, ψ⟩)`.
//!
//! Writing `φ = F(s) G_ω ρ` with `G_ω = (−∂² + m² − ω²)^{-1}` and `s = ⟨ρ, φ⟩`
//! reduces the profile equation to the scalar condition `s = σ(ω) F(s)`,
//! i.e. `g(s²) = 1/σ(ω)` for `s > 0`. The resolvent is applied on the grid
//! (second differences, zero edge values), so `σ` here is its discrete
//! counterpart and the grid residual of the stationary equation vanishes to
//! rounding.

use num_complex::Complex64;
use serde::Serialize;

use super::{kappa, stationary_state};
use crate::diagnostics::meanfield::{rho_hat_from_samples, sigma, solve_helmholtz};
use crate::error::{Error, Result};
use crate::model::{FieldState, GridSpec, MeanFieldSpec};
use crate::numerics::poly;

#[derive(Debug, Clone, Serialize)]
pub struct MeanFieldProfile {
    pub omega: f64,
    /// `s = ⟨ρ, φ⟩ > 0`.
    pub pairing: f64,
    pub psi: Vec<Complex64>,
    /// Grid norm of `(−D₂ + m² − ω²)φ − ρ F(⟨ρ,φ⟩)` over interior nodes.
    pub residual: f64,
}

impl MeanFieldProfile {
    pub fn state(&self, phase: f64) -> FieldState {
        let rot = Complex64::from_polar(1.0, phase);
        stationary_state(self.psi.iter().map(|z| z * rot).collect(), self.omega)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MeanFieldSolutions {
    /// `⟨ρ, G_ω ρ⟩` on the grid.
    pub sigma_grid: f64,
    pub profiles: Vec<MeanFieldProfile>,
    /// `F` is linear with slope `1/σ`: every `s` solves, and one representative (`s = 1`) is returned.
    pub degenerate: bool,
}

/// Grid residual of the stationary mean-field equation.
pub fn stationary_residual(spec: &MeanFieldSpec, grid: &GridSpec, omega: f64, mass: f64, psi: &[Complex64]) -> f64 {
    let n = grid.n_points;
    let k2 = mass * mass - omega * omega;
    let s = spec.pairing(grid, psi);
    let f = spec.potential.force(s);
    let h2 = grid.dx * grid.dx;
    let sum: f64 = (1..n - 1)
        .map(|j| {
            let lap = (psi[j + 1] - psi[j] * 2.0 + psi[j - 1]) / h2;
            let r = -lap + psi[j] * k2 - f * spec.rho[j];
            r.norm_sqr() * grid.dx
        })
        .sum();
    sum.sqrt()
}

/// `σ(ω)` from the continuous transform of the sampled coupling.
pub fn sigma_of_samples(spec: &MeanFieldSpec, grid: &GridSpec, omega: f64, mass: f64) -> Result<f64> {
    let hat = rho_hat_from_samples(&spec.rho, grid);
    sigma(&hat, omega, mass)
}

pub fn meanfield_solitary(spec: &MeanFieldSpec, omega: f64, mass: f64, grid: &GridSpec) -> Result<MeanFieldSolutions> {
    if spec.rho.len() != grid.n_points {
        return Err(Error::Grid(format!("rho has {} samples, grid has {}", spec.rho.len(), grid.n_points)));
    }
    let k = kappa(omega, mass)?;
    if k == 0.0 {
        return Err(Error::OutsideBand { omega, mass });
    }
    let g_rho = solve_helmholtz(&spec.rho, grid.dx, k * k);
    let sigma_grid: f64 = spec.rho.iter().zip(&g_rho).enumerate().map(|(j, (r, v))| r * v * grid.weight(j)).sum();

    // g(t) − 1/σ as a polynomial in t = s².
    let u = spec.potential.coeffs();
    let mut a: Vec<f64> = (1..u.len()).map(|l| -2.0 * l as f64 * u[l]).collect();
    if a.is_empty() {
        a.push(0.0);
    }
    a[0] -= 1.0 / sigma_grid;

    let nonconstant = a[1..].iter().any(|&c| c != 0.0);
    let degenerate = !nonconstant && a[0].abs() <= 1e-12 * (1.0 / sigma_grid);
    let pairings: Vec<f64> = if degenerate {
        vec![1.0]
    } else {
        poly::positive_real_roots(&a).into_iter().map(f64::sqrt).collect()
    };

    let profiles = pairings
        .into_iter()
        .map(|s| {
            let f = spec.potential.force(Complex64::new(s, 0.0)).re;
            let psi: Vec<Complex64> = g_rho.iter().map(|&v| Complex64::new(f * v, 0.0)).collect();
            let residual = stationary_residual(spec, grid, omega, mass, &psi);
            MeanFieldProfile { omega, pairing: s, psi, residual }
        })
        .collect();
    Ok(MeanFieldSolutions { sigma_grid, profiles, degenerate })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian_spec(grid: &GridSpec, coeffs: Vec<f64>) -> MeanFieldSpec {
        MeanFieldSpec::from_fn(grid, |x| (-x * x / 2.0).exp(), coeffs).unwrap()
    }

    #[test]
    fn gaussian_quartic_profiles_are_stationary() {
        let g = GridSpec::new(20.0, 0.02).unwrap();
        let spec = gaussian_spec(&g, vec![0.0, -1.0, 0.25]);
        let sol = meanfield_solitary(&spec, 0.5, 1.0, &g).unwrap();
        assert!(!sol.degenerate);
        assert_eq!(sol.profiles.len(), 1);
        let p = &sol.profiles[0];
        // s = σ (2 − s²) s  ⇒  s² = 2 − 1/σ
        assert!((p.pairing * p.pairing - (2.0 - 1.0 / sol.sigma_grid)).abs() < 1e-12);
        assert!(p.residual <= 1e-6, "{}", p.residual);
        let s = spec.pairing(&g, &p.psi);
        assert!((s.re - p.pairing).abs() < 1e-10 && s.im.abs() < 1e-14);
        // The grid σ approaches the continuous one at second order.
        let cont = sigma_of_samples(&spec, &g, 0.5, 1.0).unwrap();
        assert!((cont - sol.sigma_grid).abs() < 1e-3 * cont);
    }

    #[test]
    fn linear_force_with_critical_slope_is_degenerate() {
        let g = GridSpec::new(15.0, 0.05).unwrap();
        let probe = gaussian_spec(&g, vec![0.0, 1.0]);
        let sigma = meanfield_solitary(&probe, 0.3, 1.0, &g).unwrap().sigma_grid;
        // F(s) = s/σ  ⇔  g ≡ 1/σ  ⇔  u_1 = −1/(2σ)
        let spec = gaussian_spec(&g, vec![0.0, -0.5 / sigma]);
        let sol = meanfield_solitary(&spec, 0.3, 1.0, &g).unwrap();
        assert!(sol.degenerate);
        assert!(sol.profiles[0].residual < 1e-9);
    }

    #[test]
    fn no_positive_root() {
        let g = GridSpec::new(15.0, 0.05).unwrap();
        let spec = gaussian_spec(&g, vec![0.0, 0.0, 1.0]);
        let sol = meanfield_solitary(&spec, 0.3, 1.0, &g).unwrap();
        assert!(sol.profiles.is_empty() && !sol.degenerate);
    }
}
