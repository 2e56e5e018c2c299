//! Energy, charge, local energy seminorms and the weighted local metric.
//!
//! The local seminorm over `|x| ≤ R` is
//! `‖(ψ,π)‖²_R = ∫_{-R}^{R} |π|² + |ψ'|² + m²|ψ|² dx` (trapezoid rule),
//! and the metric is `Σ_{R≥1} 2^{-R} ‖·‖_R`, truncated at `R_max = ⌊half_width⌋`
//! with the tail `Σ_{R>R_max} 2^{-R} ‖·‖_full = 2^{-R_max} ‖·‖_full`.

use num_complex::Complex64;

use crate::model::{Coupling, FieldState, GridSpec, ModelSpec};

/// Centered first difference, one-sided at the two edges.
pub fn gradient(psi: &[Complex64], dx: f64) -> Vec<Complex64> {
    let n = psi.len();
    if n < 2 {
        return vec![Complex64::new(0.0, 0.0); n];
    }
    (0..n)
        .map(|j| {
            if j == 0 {
                (psi[1] - psi[0]) / dx
            } else if j + 1 == n {
                (psi[n - 1] - psi[n - 2]) / dx
            } else {
                (psi[j + 1] - psi[j - 1]) / (2.0 * dx)
            }
        })
        .collect()
}

/// `|π|² + |Dψ|² + m²|ψ|²` at each node.
pub fn energy_density(state: &FieldState, grid: &GridSpec, mass: f64) -> Vec<f64> {
    let d = gradient(&state.psi, grid.dx);
    let m2 = mass * mass;
    (0..state.len())
        .map(|j| state.pi[j].norm_sqr() + d[j].norm_sqr() + m2 * state.psi[j].norm_sqr())
        .collect()
}

pub fn energy(state: &FieldState, model: &ModelSpec, grid: &GridSpec) -> f64 {
    let field = 0.5 * grid.trapezoid(&energy_density(state, grid, model.mass));
    let coupling = match &model.coupling {
        Coupling::Oscillators(osc) => osc
            .iter()
            .filter_map(|o| grid.nearest_node(o.position))
            .zip(osc)
            .map(|(j, o)| o.potential.value(state.psi[j]))
            .sum(),
        Coupling::MeanField(mf) => mf.potential.value(mf.pairing(grid, &state.psi)),
    };
    field + coupling
}

/// `Q = (i/2) ∫ (ψ̄π − π̄ψ) dx = −∫ Im(ψ̄π) dx`.
pub fn charge(state: &FieldState, grid: &GridSpec) -> f64 {
    state
        .psi
        .iter()
        .zip(&state.pi)
        .enumerate()
        .map(|(j, (p, q))| -(p.conj() * q).im * grid.weight(j))
        .sum()
}

/// Position of the ball `|x| ≤ R` on the grid: `k` nodes each side of the
/// centre, and whether `±R` are nodes themselves (half trapezoid weight).
#[derive(Debug, Clone, Copy)]
struct Ball {
    k: usize,
    edge_on_node: bool,
}

fn ball(grid: &GridSpec, radius: f64) -> Ball {
    let n_half = grid.n_half();
    let r = radius / grid.dx;
    if r >= n_half as f64 - GridSpec::NODE_TOL * n_half as f64 {
        return Ball { k: n_half, edge_on_node: true };
    }
    let nearest = r.round();
    if (r - nearest).abs() <= GridSpec::NODE_TOL * nearest.max(1.0) {
        Ball { k: nearest as usize, edge_on_node: true }
    } else {
        Ball { k: r.floor().max(0.0) as usize, edge_on_node: false }
    }
}

/// Symmetric cumulative sums `Σ_{|i|≤k} v[c+i]`.
fn symmetric_cumsum<T: Copy + std::ops::Add<Output = T>>(v: &[T], n_half: usize) -> Vec<T> {
    let c = n_half;
    let mut out = Vec::with_capacity(n_half + 1);
    let mut acc = v[c];
    out.push(acc);
    for i in 1..=n_half {
        acc = acc + v[c - i] + v[c + i];
        out.push(acc);
    }
    out
}

/// Integrals of a nodal density over every ball `|x| ≤ R`.
#[derive(Debug, Clone)]
pub struct LocalIntegrals {
    grid: GridSpec,
    density: Vec<f64>,
    cum: Vec<f64>,
}

impl LocalIntegrals {
    pub fn new(density: Vec<f64>, grid: &GridSpec) -> Self {
        let cum = symmetric_cumsum(&density, grid.n_half());
        Self { grid: *grid, density, cum }
    }

    /// `∫_{|x|≤R} density`, clamped to the domain.
    pub fn within(&self, radius: f64) -> f64 {
        let b = ball(&self.grid, radius);
        let c = self.grid.n_half();
        let mut s = self.cum[b.k];
        if b.edge_on_node {
            s -= 0.5 * (self.density[c - b.k] + self.density[c + b.k]);
        }
        (s * self.grid.dx).max(0.0)
    }

    pub fn total(&self) -> f64 {
        self.within(self.grid.half_width)
    }
}

/// `‖(ψ,π)‖_{E,R}`; radii beyond the domain are clamped to `half_width`.
pub fn seminorm_e_r(state: &FieldState, grid: &GridSpec, mass: f64, radius: f64) -> f64 {
    LocalIntegrals::new(energy_density(state, grid, mass), grid).within(radius).sqrt()
}

/// Global `‖(ψ,π)‖_E`.
pub fn energy_norm(state: &FieldState, grid: &GridSpec, mass: f64) -> f64 {
    seminorm_e_r(state, grid, mass, grid.half_width)
}

pub fn r_max(grid: &GridSpec) -> usize {
    grid.half_width.floor() as usize
}

/// `Σ_{R=1}^{R_max} 2^{-R} s(R) + 2^{-R_max} s(full)` for a seminorm profile `s`.
pub fn weighted_sum(grid: &GridSpec, mut seminorm: impl FnMut(f64) -> f64) -> f64 {
    let rmax = r_max(grid);
    let mut w = 1.0;
    let mut total = 0.0;
    for r in 1..=rmax {
        w *= 0.5;
        total += w * seminorm(r as f64);
    }
    total + w * seminorm(grid.half_width)
}

/// Weighted local metric between two states on the same grid.
pub fn metric_e_f(a: &FieldState, b: &FieldState, grid: &GridSpec, mass: f64) -> f64 {
    let local = LocalIntegrals::new(energy_density(&a.minus(b), grid, mass), grid);
    weighted_sum(grid, |r| local.within(r).sqrt())
}

/// Local energy inner products between a fixed state and a candidate, so that
/// `metric(state, e^{iθ} candidate)` costs `O(R_max)` per phase.
///
/// The squared seminorms are expanded around the phase `θ_r` that is optimal
/// for the full-domain norm, `|a - e^{iθ}b|² = |a - e^{iθ_r}b|² + 2 Re((e^{iθ_r} - e^{iθ})⟨a,b⟩)`,
/// with the first term summed pointwise so that near-coincident states keep
/// full relative precision.
#[derive(Debug, Clone)]
pub struct PhaseMetric {
    /// Per radius (1..=R_max, then full): `(‖a - e^{iθ_r} b‖², ⟨a, b⟩)`.
    terms: Vec<(f64, Complex64)>,
    weights: Vec<f64>,
    reference: f64,
}

impl PhaseMetric {
    pub fn new(a: &FieldState, b: &FieldState, grid: &GridSpec, mass: f64) -> Self {
        let m2 = mass * mass;
        let da = gradient(&a.psi, grid.dx);
        let db = gradient(&b.psi, grid.dx);
        let n = a.len();
        let ab: Vec<Complex64> = (0..n)
            .map(|j| a.pi[j].conj() * b.pi[j] + da[j].conj() * db[j] + a.psi[j].conj() * b.psi[j] * m2)
            .collect();
        let cum = symmetric_cumsum(&ab, grid.n_half());
        let c = grid.n_half();
        let cross = |radius: f64| {
            let bl = ball(grid, radius);
            let mut s = cum[bl.k];
            if bl.edge_on_node {
                s -= (ab[c - bl.k] + ab[c + bl.k]) * 0.5;
            }
            s * grid.dx
        };
        let full = cross(grid.half_width);
        let reference = if full.norm() > 0.0 { (-full.arg()).rem_euclid(std::f64::consts::TAU) } else { 0.0 };
        let rot = Complex64::from_polar(1.0, reference);
        let diff: Vec<f64> = (0..n)
            .map(|j| {
                (a.pi[j] - rot * b.pi[j]).norm_sqr()
                    + (da[j] - rot * db[j]).norm_sqr()
                    + m2 * (a.psi[j] - rot * b.psi[j]).norm_sqr()
            })
            .collect();
        let local = LocalIntegrals::new(diff, grid);
        let rmax = r_max(grid);
        let mut terms = Vec::with_capacity(rmax + 1);
        let mut weights = Vec::with_capacity(rmax + 1);
        let mut w = 1.0;
        for r in 1..=rmax {
            w *= 0.5;
            let r = r as f64;
            terms.push((local.within(r), cross(r)));
            weights.push(w);
        }
        terms.push((local.total(), full));
        weights.push(w);
        Self { terms, weights, reference }
    }

    /// Phase minimizing the full-domain seminorm; a good starting bracket.
    pub fn reference_phase(&self) -> f64 {
        self.reference
    }

    /// Metric between `a` and `e^{iθ} b`.
    pub fn at(&self, theta: f64) -> f64 {
        // e^{iθ_r} - e^{iθ} without cancellation near θ_r.
        let half = 0.5 * (self.reference - theta);
        let shift = Complex64::from_polar(2.0 * half.sin(), 0.5 * (self.reference + theta)) * Complex64::i();
        self.terms
            .iter()
            .zip(&self.weights)
            .map(|(&(d, ab), &w)| w * (d + 2.0 * (shift * ab).re).max(0.0).sqrt())
            .sum()
    }
}
