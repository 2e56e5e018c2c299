//! Resonance integral `σ(ω)` and the exceptional set `Z_ρ` of the mean-field model (n = 1).
//!
//! ```text
//! σ(ω) = (1/2π) ∫ |ρ̂(ξ)|² / (ξ² + m² − ω²) dξ,     ρ̂(ξ) = ∫ ρ(x) e^{-iξx} dx
//! Z_ρ  = { ω : |ω| > m, ρ̂(±√(ω² − m²)) = 0 }
//! ```

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::GridSpec;
use crate::numerics::quad::{integrate, integrate_to_infinity, Tolerance};

/// Relative tolerance used for every σ evaluation.
pub const SIGMA_RTOL: f64 = 1e-10;

fn tolerance(rtol: f64) -> Tolerance {
    Tolerance { abs: 1e-300, rel: rtol, max_intervals: 20_000 }
}

/// `ρ̂` of a grid-sampled coupling by trapezoid sums, zero beyond the Nyquist frequency.
pub fn rho_hat_from_samples<'a>(rho: &'a [f64], grid: &'a GridSpec) -> impl Fn(f64) -> Complex64 + 'a {
    let nyquist = PI / grid.dx;
    move |xi: f64| {
        if xi.abs() > nyquist {
            return Complex64::new(0.0, 0.0);
        }
        rho.iter()
            .enumerate()
            .filter(|(_, &r)| r != 0.0)
            .map(|(j, &r)| Complex64::from_polar(r * grid.weight(j), -xi * grid.x(j)))
            .sum()
    }
}

/// `σ(ω)` at relative tolerance `rtol`.
pub fn sigma_with(rho_hat: &dyn Fn(f64) -> Complex64, omega: f64, mass: f64, rtol: f64) -> Result<f64> {
    let kappa2 = mass * mass - omega * omega;
    let tol = tolerance(rtol);
    if kappa2 > 0.0 {
        let f = |xi: f64| (rho_hat(xi).norm_sqr() + rho_hat(-xi).norm_sqr()) / (xi * xi + kappa2);
        return Ok(integrate_to_infinity(f, 0.0, tol)?.value / (2.0 * PI));
    }
    let xi0 = (-kappa2).sqrt();
    let scale = [0.0, 0.5 * xi0, xi0, 2.0 * xi0]
        .iter()
        .map(|&x| rho_hat(x).norm().max(rho_hat(-x).norm()))
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    if xi0 == 0.0 || rho_hat(xi0).norm() > 1e-8 * scale || rho_hat(-xi0).norm() > 1e-8 * scale {
        return Err(Error::Resonant { omega, xi: xi0 });
    }
    // The zero of ρ̂ at ±ξ₀ makes the singularity removable; the integrand is
    // odd about ξ₀ to leading order, so excluding (ξ₀-η, ξ₀+η) costs O(η³).
    let f = |xi: f64| {
        let d = (xi - xi0) * (xi + xi0);
        (rho_hat(xi).norm_sqr() + rho_hat(-xi).norm_sqr()) / d
    };
    let excluded = |eta: f64| -> Result<f64> {
        let inner = integrate(f, 0.0, xi0 - eta, tol)?.value;
        let outer = integrate_to_infinity(f, xi0 + eta, tol)?.value;
        Ok(inner + outer)
    };
    let eta0 = (0.25 * xi0).min(0.05);
    let levels = [eta0, eta0 / 2.0, eta0 / 4.0];
    let i: Vec<f64> = levels.iter().map(|&e| excluded(e)).collect::<Result<_>>()?;
    let r1 = [(8.0 * i[1] - i[0]) / 7.0, (8.0 * i[2] - i[1]) / 7.0];
    let r2 = (32.0 * r1[1] - r1[0]) / 31.0;
    Ok(r2 / (2.0 * PI))
}

pub fn sigma(rho_hat: &dyn Fn(f64) -> Complex64, omega: f64, mass: f64) -> Result<f64> {
    sigma_with(rho_hat, omega, mass, SIGMA_RTOL)
}

/// Discrete analogue on the grid: `⟨ρ, (−D₂ + m² − ω²)^{-1} ρ⟩` with zero
/// boundary values. Agrees with `σ(ω)` up to `O(dx²)` for smooth `ρ`.
pub fn sigma_discrete(rho: &[f64], grid: &GridSpec, omega: f64, mass: f64) -> Result<f64> {
    let kappa2 = mass * mass - omega * omega;
    if kappa2 <= 0.0 {
        return Err(Error::OutsideBand { omega, mass });
    }
    let g = solve_helmholtz(rho, grid.dx, kappa2);
    Ok(rho.iter().zip(&g).enumerate().map(|(j, (r, v))| r * v * grid.weight(j)).sum())
}

/// Solves `(−D₂ + κ²) u = f` on interior nodes with `u = 0` at both edges (Thomas algorithm).
pub fn solve_helmholtz(f: &[f64], dx: f64, kappa2: f64) -> Vec<f64> {
    let n = f.len();
    let mut u = vec![0.0; n];
    if n < 3 {
        return u;
    }
    let off = -1.0 / (dx * dx);
    let diag = 2.0 / (dx * dx) + kappa2;
    let m = n - 2;
    let mut c = vec![0.0; m];
    let mut d = vec![0.0; m];
    c[0] = off / diag;
    d[0] = f[1] / diag;
    for i in 1..m {
        let denom = diag - off * c[i - 1];
        c[i] = off / denom;
        d[i] = (f[i + 1] - off * d[i - 1]) / denom;
    }
    u[m] = d[m - 1];
    for i in (0..m - 1).rev() {
        u[i + 1] = d[i] - c[i] * u[i + 2];
    }
    u
}

/// Frequencies `ω ∈ (m, omega_max]` with `ρ̂(±√(ω² − m²)) = 0`, located by
/// sign changes of the real and imaginary parts of `ρ̂` followed by bisection.
/// Tangential zeros without a sign change are not detected.
pub fn find_z_rho(rho_hat: &dyn Fn(f64) -> Complex64, mass: f64, omega_max: f64) -> Vec<f64> {
    if omega_max <= mass {
        return Vec::new();
    }
    let xi_max = (omega_max * omega_max - mass * mass).sqrt();
    let samples = 4000;
    let h = xi_max / samples as f64;
    let xs: Vec<f64> = (1..=samples).map(|k| k as f64 * h).collect();
    let values: Vec<Complex64> = xs.iter().map(|&x| rho_hat(x)).collect();
    let scale = values.iter().map(|z| z.norm()).fold(rho_hat(0.0).norm(), f64::max).max(f64::MIN_POSITIVE);

    let mut zeros: Vec<f64> = Vec::new();
    let parts: [fn(Complex64) -> f64; 2] = [|z| z.re, |z| z.im];
    for part in parts {
        for k in 0..samples {
            let a = part(values[k]);
            if a == 0.0 {
                zeros.push(xs[k]);
                continue;
            }
            if k + 1 < samples && a * part(values[k + 1]) < 0.0 {
                let (mut lo, mut hi) = (xs[k], xs[k + 1]);
                let flo = a;
                while hi - lo > 4.0 * f64::EPSILON * hi {
                    let mid = 0.5 * (lo + hi);
                    let fm = part(rho_hat(mid));
                    if fm == 0.0 {
                        lo = mid;
                        hi = mid;
                        break;
                    }
                    if (fm < 0.0) == (flo < 0.0) {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                zeros.push(0.5 * (lo + hi));
            }
        }
    }
    zeros.sort_by(|a, b| a.total_cmp(b));
    zeros.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * b.abs().max(1.0));
    zeros
        .into_iter()
        .filter(|&xi| rho_hat(xi).norm() <= 1e-8 * scale && rho_hat(-xi).norm() <= 1e-8 * scale)
        .map(|xi| (mass * mass + xi * xi).sqrt())
        .filter(|&w| w <= omega_max)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian_hat(xi: f64) -> Complex64 {
        // ρ(x) = e^{-x²/2}  ⇒  ρ̂(ξ) = √(2π) e^{-ξ²/2}
        Complex64::new((2.0 * PI).sqrt() * (-xi * xi / 2.0).exp(), 0.0)
    }

    #[test]
    fn sigma_positive_in_band() {
        for w in [0.0, 0.5, 0.9, -0.7] {
            assert!(sigma(&gaussian_hat, w, 1.0).unwrap() > 0.0);
        }
    }

    #[test]
    fn sigma_at_zero_frequency_matches_closed_form() {
        // ω = 0, m = 1: σ = (1/2π) ∫ 2π e^{-ξ²}/(ξ²+1) dξ = π e erfc(1).
        let erfc1 = 0.157_299_207_050_285_13;
        let expected = PI * std::f64::consts::E * erfc1;
        let s = sigma(&gaussian_hat, 0.0, 1.0).unwrap();
        assert!((s - expected).abs() < 1e-9 * expected, "{s} vs {expected}");
    }

    #[test]
    fn sigma_resonant_without_zero_is_an_error() {
        assert!(matches!(sigma(&gaussian_hat, 1.5, 1.0), Err(Error::Resonant { .. })));
    }

    #[test]
    fn z_rho_none_for_gaussian() {
        assert!(find_z_rho(&gaussian_hat, 1.0, 3.0).is_empty());
        assert!(find_z_rho(&gaussian_hat, 1.0, 1.0).is_empty());
    }

    #[test]
    fn helmholtz_solve_residual() {
        let g = GridSpec::new(5.0, 0.05).unwrap();
        let f: Vec<f64> = g.xs().iter().map(|x| (-x * x).exp()).collect();
        let u = solve_helmholtz(&f, g.dx, 0.75);
        for j in 1..g.n_points - 1 {
            let lhs = -(u[j + 1] - 2.0 * u[j] + u[j - 1]) / (g.dx * g.dx) + 0.75 * u[j];
            assert!((lhs - f[j]).abs() < 1e-12);
        }
    }
}
