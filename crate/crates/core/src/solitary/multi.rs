//! Solitary profiles for several point oscillators.
//!
//! Between neighbouring oscillators the profile solves `φ'' = κ²φ`, so it is
//! fixed by its nodal values `φ_J = φ(X_J)`:
//!
//! ```text
//! φ(x) = [φ_J sinh κ(X_{J+1} − x) + φ_{J+1} sinh κ(x − X_J)] / sinh κ(X_{J+1} − X_J)
//! ```
//!
//! with exponential decay outside `[X_1, X_N]`. The jump conditions
//! `−φ'(X_J+) + φ'(X_J−) = F_J(φ_J)` form `N` complex equations for the nodal
//! values, solved by Newton from deterministic seeds.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use super::{amplitudes_for_kappa, kappa, stationary_state};
use crate::error::{Error, Result};
use crate::model::{FieldState, GridSpec, ModelSpec, OscillatorSpec};
use crate::numerics::optimize::{newton, NewtonOutcome};

/// Accepted jump-condition residual.
pub const JUMP_TOL: f64 = 1e-9;
const MAX_SEEDS: usize = 4096;

/// A solitary profile determined by its values at the oscillator positions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodalProfile {
    pub omega: f64,
    pub kappa: f64,
    pub positions: Vec<f64>,
    pub values: Vec<Complex64>,
}

/// `sinh(a)/sinh(l)` for `0 ≤ a ≤ l` without overflow.
fn sinh_ratio(a: f64, l: f64) -> f64 {
    ((a - l).exp() - (-a - l).exp()) / (1.0 - (-2.0 * l).exp())
}

/// `(coth(l), 1/sinh(l))` without overflow.
fn coth_csch(l: f64) -> (f64, f64) {
    let q = (-2.0 * l).exp();
    ((1.0 + q) / (1.0 - q), 2.0 * (-l).exp() / (1.0 - q))
}

impl NodalProfile {
    pub fn eval(&self, x: f64) -> Complex64 {
        let n = self.positions.len();
        let k = self.kappa;
        if x <= self.positions[0] {
            return self.values[0] * (k * (x - self.positions[0])).exp();
        }
        if x >= self.positions[n - 1] {
            return self.values[n - 1] * (-k * (x - self.positions[n - 1])).exp();
        }
        let j = self.positions.partition_point(|&p| p <= x) - 1;
        let (a, b) = (self.positions[j], self.positions[j + 1]);
        let l = k * (b - a);
        self.values[j] * sinh_ratio(k * (b - x), l) + self.values[j + 1] * sinh_ratio(k * (x - a), l)
    }

    /// `−φ'(X_J+) + φ'(X_J−)` at every oscillator.
    pub fn jumps(&self) -> Vec<Complex64> {
        let m = jump_matrix(&self.positions, self.kappa);
        (0..self.values.len())
            .map(|j| (0..self.values.len()).map(|k| self.values[k] * m[(j, k)]).sum())
            .collect()
    }

    /// Max over oscillators of `|−φ'(X_J+) + φ'(X_J−) − F_J(φ_J)|`.
    pub fn jump_residual(&self, oscillators: &[OscillatorSpec]) -> f64 {
        self.jumps()
            .iter()
            .zip(&self.values)
            .zip(oscillators)
            .map(|((jump, &v), o)| (jump - o.potential.force(v)).norm())
            .fold(0.0, f64::max)
    }

    pub fn amplitude(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.amplitude() == 0.0
    }

    pub fn sample(&self, grid: &GridSpec, phase: f64) -> FieldState {
        let rot = Complex64::from_polar(1.0, phase);
        stationary_state(grid.xs().iter().map(|&x| rot * self.eval(x)).collect(), self.omega)
    }

    /// Rotates so that the first non-negligible nodal value is real positive.
    fn normalized(mut self) -> Self {
        let scale = self.amplitude();
        if let Some(v) = self.values.iter().find(|v| v.norm() > 1e-8 * scale).copied() {
            let rot = v.conj() / v.norm();
            for z in &mut self.values {
                *z *= rot;
            }
        }
        self
    }
}

/// Real matrix `M` with `(−φ'(X_J+) + φ'(X_J−))_J = Σ_K M_{JK} φ_K`.
fn jump_matrix(positions: &[f64], kappa: f64) -> DMatrix<f64> {
    let n = positions.len();
    let mut m = DMatrix::zeros(n, n);
    for j in 0..n {
        // φ'(X_J−)
        if j == 0 {
            m[(j, j)] += kappa;
        } else {
            let (coth, csch) = coth_csch(kappa * (positions[j] - positions[j - 1]));
            m[(j, j - 1)] -= kappa * csch;
            m[(j, j)] += kappa * coth;
        }
        // −φ'(X_J+)
        if j + 1 == n {
            m[(j, j)] += kappa;
        } else {
            let (coth, csch) = coth_csch(kappa * (positions[j + 1] - positions[j]));
            m[(j, j)] += kappa * coth;
            m[(j, j + 1)] -= kappa * csch;
        }
    }
    m
}

/// Newton on the `2N` real unknowns `(Re φ_J, Im φ_J)` from one seed.
pub fn nodal_newton(
    oscillators: &[OscillatorSpec],
    kappa: f64,
    seed: &[Complex64],
) -> (NodalProfile, NewtonOutcome) {
    let n = oscillators.len();
    let positions: Vec<f64> = oscillators.iter().map(|o| o.position).collect();
    let m = jump_matrix(&positions, kappa);
    let residual = |v: &DVector<f64>| {
        let mut r = DVector::zeros(2 * n);
        for j in 0..n {
            let z = Complex64::new(v[j], v[n + j]);
            let f = oscillators[j].potential.force(z);
            let mut lin = Complex64::new(0.0, 0.0);
            for k in 0..n {
                lin += Complex64::new(v[k], v[n + k]) * m[(j, k)];
            }
            r[j] = lin.re - f.re;
            r[n + j] = lin.im - f.im;
        }
        r
    };
    let jacobian = |v: &DVector<f64>| {
        let mut jac = DMatrix::zeros(2 * n, 2 * n);
        for j in 0..n {
            for k in 0..n {
                jac[(j, k)] = m[(j, k)];
                jac[(n + j, n + k)] = m[(j, k)];
            }
            let (x, y) = (v[j], v[n + j]);
            let s = x * x + y * y;
            let pot = &oscillators[j].potential;
            let (g, dg) = (pot.gain(s), pot.gain_derivative(s));
            jac[(j, j)] -= g + 2.0 * x * x * dg;
            jac[(j, n + j)] -= 2.0 * x * y * dg;
            jac[(n + j, j)] -= 2.0 * x * y * dg;
            jac[(n + j, n + j)] -= g + 2.0 * y * y * dg;
        }
        jac
    };
    let x0 = DVector::from_iterator(2 * n, seed.iter().map(|z| z.re).chain(seed.iter().map(|z| z.im)));
    let out = newton(residual, jacobian, x0, 1e-13, 100);
    let values = (0..n).map(|j| Complex64::new(out.x[j], out.x[n + j])).collect();
    (NodalProfile { omega: 0.0, kappa, positions, values }, out)
}

#[derive(Debug, Clone, Serialize)]
pub struct MultiProfiles {
    /// Distinct profiles up to a global phase; includes the zero profile.
    pub profiles: Vec<NodalProfile>,
    pub seeds_tried: usize,
    pub seeds_failed: usize,
    /// Every seed failed to converge.
    pub no_convergence: bool,
}

/// Seeds: at each node `0` or `±C` for every single-oscillator amplitude `C`.
fn seeds(oscillators: &[OscillatorSpec], kappa: f64) -> Vec<Vec<Complex64>> {
    let options: Vec<Vec<f64>> = oscillators
        .iter()
        .map(|o| {
            let mut v = vec![0.0];
            for c in amplitudes_for_kappa(&o.potential, kappa) {
                v.push(c);
                v.push(-c);
            }
            v
        })
        .collect();
    cartesian(&options, MAX_SEEDS)
        .into_iter()
        .map(|s| s.into_iter().map(|x| Complex64::new(x, 0.0)).collect())
        .collect()
}

/// Solitary profiles of an oscillator model at frequency `omega` (`|ω| < m`).
pub fn solitary_profiles_multi(model: &ModelSpec, omega: f64) -> Result<MultiProfiles> {
    let oscillators = model.oscillator_list();
    if oscillators.is_empty() {
        return Err(Error::Model("solitary profiles need at least one oscillator".into()));
    }
    let k = kappa(omega, model.mass)?;
    if k == 0.0 {
        return Err(Error::OutsideBand { omega, mass: model.mass });
    }
    let seeds = seeds(oscillators, k);
    let mut profiles: Vec<NodalProfile> = Vec::new();
    let mut failed = 0;
    for seed in &seeds {
        let (mut p, out) = nodal_newton(oscillators, k, seed);
        p.omega = omega;
        let scale = 1.0 + p.amplitude();
        if !(out.converged || p.jump_residual(oscillators) <= JUMP_TOL * scale) {
            failed += 1;
            continue;
        }
        let p = p.normalized();
        let duplicate = profiles.iter().any(|q| {
            q.values.iter().zip(&p.values).all(|(a, b)| (a - b).norm() <= 1e-8 * scale)
        });
        if !duplicate {
            profiles.push(p);
        }
    }
    Ok(MultiProfiles {
        no_convergence: failed == seeds.len(),
        profiles,
        seeds_tried: seeds.len(),
        seeds_failed: failed,
    })
}

/// Cartesian product of option lists, truncated to `cap` entries.
fn cartesian(options: &[Vec<f64>], cap: usize) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = vec![Vec::new()];
    for opts in options {
        let mut next = Vec::with_capacity((out.len() * opts.len()).min(cap));
        'outer: for prefix in &out {
            for &o in opts {
                if next.len() == cap {
                    break 'outer;
                }
                let mut v = prefix.clone();
                v.push(o);
                next.push(v);
            }
        }
        out = next;
    }
    out
}
