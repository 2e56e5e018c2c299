//! Explicit, time-reversible evolution of `ψ̈ = ψ'' − m²ψ + coupling`.
//!
//! One step is the kick–drift–kick (velocity Verlet) form of leapfrog:
//!
//! ```text
//! π ← π + (dt/2) a(ψ);   ψ ← ψ + dt π;   boundary;   π ← π + (dt/2) a(ψ)
//! ```
//!
//! with `a(ψ) = D₂ψ − m²ψ + coupling`. A point oscillator at node `j` adds
//! `F(ψ_j)/dx` there; the mean field adds `ρ_j F(⟨ρ, ψ⟩)` with the trapezoid
//! pairing. Both kicks are U(1)-equivariant and `Im(ψ̄ a(ψ))` sums to zero, so
//! the discrete charge is conserved to rounding under dirichlet and periodic
//! boundaries.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::diagnostics::attraction::DiagRecord;
use crate::diagnostics::norms::{charge, energy, energy_density, gradient, metric_e_f, LocalIntegrals};
use crate::error::{Error, Result};
use crate::model::{Coupling, FieldState, GridSpec, ModelSpec, Potential};
use crate::solitary::{manifold_distance, ManifoldDistanceReport};

pub const DEFAULT_CFL: f64 = 0.5;
pub const DEFAULT_OVERFLOW_GUARD: f64 = 1e12;
/// Reflection level, relative to the outgoing amplitude, that marks a run as contaminated.
pub const REFLECTION_TOL: f64 = 1e-3;
/// Change of the edge moduli, relative to the initial maximum, that marks a run as
/// contaminated under reflecting or wrapping boundaries. Moduli are compared so that
/// a stationary rotating tail touching the edge does not count.
pub const EDGE_TOL: f64 = 1e-3;
/// Nodes next to each edge inspected by the contamination monitor.
const EDGE_BAND: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    /// First-order outgoing conditions `∂ₜψ = ∂ₓψ` (left) and `∂ₜψ = −∂ₓψ` (right).
    Transparent,
    Dirichlet,
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchemeParams {
    pub dt: f64,
    pub bc: Boundary,
    pub buffer_check: bool,
    pub overflow_guard: f64,
}

impl SchemeParams {
    pub fn new(dt: f64, bc: Boundary) -> Self {
        Self { dt, bc, buffer_check: false, overflow_guard: DEFAULT_OVERFLOW_GUARD }
    }

    pub fn from_cfl(cfl: f64, grid: &GridSpec, bc: Boundary) -> Self {
        Self::new(cfl * grid.dx, bc)
    }

    pub fn with_buffer_check(mut self, on: bool) -> Self {
        self.buffer_check = on;
        self
    }

    pub fn cfl(&self, grid: &GridSpec) -> f64 {
        self.dt / grid.dx
    }

    pub fn validate(&self, grid: &GridSpec) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::Grid(format!("dt must be finite and positive, got {}", self.dt)));
        }
        if !(self.cfl(grid) < 1.0) {
            return Err(Error::Grid(format!("cfl = dt/dx = {} must be below 1", self.cfl(grid))));
        }
        if !(self.overflow_guard > 0.0) {
            return Err(Error::Grid("overflow guard must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Completed,
    BoundaryContaminated,
    BlownUp,
}

/// Whether signals from the initial data can reach the domain edge within the run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// The light cone of the data's support stays inside the domain for the whole run.
    CausalityBuffer,
    /// The light cone reaches an edge; the boundary condition matters.
    BoundaryInfluenced,
}

/// Diagnostics sampled along a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagConfig {
    /// Radii of the local seminorms.
    pub radii: Vec<f64>,
    /// Manifold distance every this many records (0 disables it).
    pub distance_every: usize,
}

impl Default for DiagConfig {
    fn default() -> Self {
        Self { radii: vec![1.0, 2.0, 5.0, 10.0], distance_every: 20 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EvolveResult {
    pub final_state: FieldState,
    pub records: Vec<DiagRecord>,
    /// `ψ(X_J, t_n)` per oscillator (or `⟨ρ, ψ⟩` for the mean field) at every step.
    pub traces: Vec<Vec<Complex64>>,
    pub status: RunStatus,
    pub steps: usize,
    pub dt: f64,
    pub regime: Regime,
    /// Largest contamination indicator seen, relative to its threshold scale.
    pub boundary_level: f64,
}

enum Coupler {
    Free,
    Points(Vec<(usize, Potential)>),
    Mean { rho: Vec<f64>, weights: Vec<f64>, potential: Potential },
}

/// Owns a state and advances it; the acceleration of the current state is cached.
pub struct Stepper {
    pub state: FieldState,
    grid: GridSpec,
    mass: f64,
    scheme: SchemeParams,
    coupler: Coupler,
    acc: Vec<Complex64>,
    fresh: bool,
}

impl Stepper {
    pub fn new(state: FieldState, model: &ModelSpec, grid: &GridSpec, scheme: SchemeParams) -> Result<Self> {
        scheme.validate(grid)?;
        state.check(grid)?;
        if grid.n_points < 3 {
            return Err(Error::Grid("need at least three nodes".into()));
        }
        let coupler = match &model.coupling {
            Coupling::Oscillators(osc) if osc.is_empty() => Coupler::Free,
            Coupling::Oscillators(osc) => Coupler::Points(
                osc.iter()
                    .map(|o| {
                        grid.node_of(o.position)
                            .map(|j| (j, o.potential.clone()))
                            .ok_or_else(|| Error::Grid(format!("off-grid oscillator at {}", o.position)))
                    })
                    .collect::<Result<_>>()?,
            ),
            Coupling::MeanField(mf) => {
                if mf.rho.len() != grid.n_points {
                    return Err(Error::Grid("rho does not match the grid".into()));
                }
                Coupler::Mean {
                    rho: mf.rho.clone(),
                    weights: (0..grid.n_points).map(|j| grid.weight(j)).collect(),
                    potential: mf.potential.clone(),
                }
            }
        };
        let n = grid.n_points;
        Ok(Self {
            state,
            grid: *grid,
            mass: model.mass,
            scheme,
            coupler,
            acc: vec![Complex64::new(0.0, 0.0); n],
            fresh: false,
        })
    }

    /// Oscillator nodes, or an empty list.
    fn trace_value(&self) -> Vec<Complex64> {
        match &self.coupler {
            Coupler::Free => Vec::new(),
            Coupler::Points(p) => p.iter().map(|(j, _)| self.state.psi[*j]).collect(),
            Coupler::Mean { rho, weights, .. } => {
                vec![self.state.psi.iter().zip(rho).zip(weights).map(|((z, r), w)| z * (r * w)).sum()]
            }
        }
    }

    fn compute_acc(&mut self) {
        let psi = &self.state.psi;
        let n = psi.len();
        let inv_dx2 = 1.0 / (self.grid.dx * self.grid.dx);
        let m2 = self.mass * self.mass;
        let acc = &mut self.acc;
        match self.scheme.bc {
            Boundary::Periodic => {
                let p = n - 1;
                for j in 0..p {
                    let l = if j == 0 { p - 1 } else { j - 1 };
                    let r = if j + 1 == p { 0 } else { j + 1 };
                    acc[j] = (psi[l] + psi[r] - psi[j] * 2.0) * inv_dx2 - psi[j] * m2;
                }
            }
            Boundary::Dirichlet | Boundary::Transparent => {
                acc[0] = Complex64::new(0.0, 0.0);
                for j in 1..n - 1 {
                    acc[j] = (psi[j - 1] + psi[j + 1] - psi[j] * 2.0) * inv_dx2 - psi[j] * m2;
                }
            }
        }
        acc[n - 1] = Complex64::new(0.0, 0.0);
        match &self.coupler {
            Coupler::Free => {}
            Coupler::Points(points) => {
                let inv_dx = 1.0 / self.grid.dx;
                for (j, pot) in points {
                    acc[*j] += pot.force(psi[*j]) * inv_dx;
                }
            }
            Coupler::Mean { rho, weights, potential } => {
                let s: Complex64 = psi.iter().zip(rho).zip(weights).map(|((z, r), w)| z * (r * w)).sum();
                let f = potential.force(s);
                for (a, r) in acc.iter_mut().zip(rho) {
                    *a += f * *r;
                }
            }
        }
        if self.scheme.bc == Boundary::Periodic {
            acc[n - 1] = acc[0];
        }
        self.fresh = true;
    }

    fn kick(&mut self, h: f64) {
        let n = self.state.len();
        let (lo, hi) = match self.scheme.bc {
            Boundary::Periodic => (0, n),
            _ => (1, n - 1),
        };
        for j in lo..hi {
            self.state.pi[j] += self.acc[j] * h;
        }
    }

    /// Energy invariant of the scheme itself: forward-difference gradient
    /// energy with the kinetic term paired across half steps,
    /// `½⟨π_{n+½}, π_{n−½}⟩ = ½|π_n|² − (dt²/8)|a_n|²`.
    ///
    /// Exact for the linear part; the centered-difference `energy` differs from
    /// it by `O(dx)` at oscillator kinks and `O(dx²)` elsewhere.
    pub fn scheme_energy(&mut self) -> f64 {
        if !self.fresh {
            self.compute_acc();
        }
        let (psi, pi) = (&self.state.psi, &self.state.pi);
        let n = psi.len();
        let dx = self.grid.dx;
        let dt = self.scheme.dt;
        let m2 = self.mass * self.mass;
        let mut total = 0.0;
        for j in 0..n {
            let w = self.grid.weight(j);
            total += 0.5 * w * (pi[j].norm_sqr() - 0.25 * dt * dt * self.acc[j].norm_sqr() + m2 * psi[j].norm_sqr());
        }
        for j in 0..n - 1 {
            total += 0.5 * dx * ((psi[j + 1] - psi[j]) / dx).norm_sqr();
        }
        total
            + match &self.coupler {
                Coupler::Free => 0.0,
                Coupler::Points(points) => points.iter().map(|(j, pot)| pot.value(psi[*j])).sum(),
                Coupler::Mean { rho, weights, potential } => {
                    potential.value(psi.iter().zip(rho).zip(weights).map(|((z, r), w)| z * (r * w)).sum())
                }
            }
    }

    /// Advances by one step of size `dt`.
    pub fn advance(&mut self) {
        if !self.fresh {
            self.compute_acc();
        }
        let dt = self.scheme.dt;
        let n = self.state.len();
        self.kick(0.5 * dt);
        let before = EdgeMemory::of(&self.state);
        let (lo, hi) = match self.scheme.bc {
            Boundary::Periodic => (0, n),
            _ => (1, n - 1),
        };
        for j in lo..hi {
            let p = self.state.pi[j];
            self.state.psi[j] += p * dt;
        }
        apply_boundary(&mut self.state, &before, &self.grid, &self.scheme);
        self.compute_acc();
        self.kick(0.5 * dt);
        if self.scheme.bc == Boundary::Transparent {
            set_transparent_pi(&mut self.state, self.grid.dx);
        }
        self.state.time += dt;
    }
}

/// Edge values before the drift, needed by the transparent update.
#[derive(Debug, Clone, Copy)]
pub struct EdgeMemory {
    /// `(ψ_0, ψ_1)`.
    pub left: [Complex64; 2],
    /// `(ψ_{n−1}, ψ_{n−2})`.
    pub right: [Complex64; 2],
}

impl EdgeMemory {
    pub fn of(state: &FieldState) -> Self {
        let n = state.len();
        Self { left: [state.psi[0], state.psi[1]], right: [state.psi[n - 1], state.psi[n - 2]] }
    }
}

fn set_transparent_pi(state: &mut FieldState, dx: f64) {
    let n = state.len();
    state.pi[0] = (state.psi[1] - state.psi[0]) / dx;
    state.pi[n - 1] = -(state.psi[n - 1] - state.psi[n - 2]) / dx;
}

/// Imposes the boundary condition on `ψ` after the drift.
///
/// Transparent edges use the one-sided (Mur) discretisation of the outgoing
/// relations, `ψ₀⁺ = ψ₁ + (dt − dx)/(dt + dx)·(ψ₁⁺ − ψ₀)`, which transports
/// `m = 0` waves out of the domain; the edge `π` is set from the same relation.
pub fn apply_boundary(state: &mut FieldState, before: &EdgeMemory, grid: &GridSpec, scheme: &SchemeParams) {
    let n = state.len();
    let zero = Complex64::new(0.0, 0.0);
    match scheme.bc {
        Boundary::Dirichlet => {
            state.psi[0] = zero;
            state.psi[n - 1] = zero;
            state.pi[0] = zero;
            state.pi[n - 1] = zero;
        }
        Boundary::Periodic => {
            state.psi[n - 1] = state.psi[0];
            state.pi[n - 1] = state.pi[0];
        }
        Boundary::Transparent => {
            let c = (scheme.dt - grid.dx) / (scheme.dt + grid.dx);
            state.psi[0] = before.left[1] + (state.psi[1] - before.left[0]) * c;
            state.psi[n - 1] = before.right[1] + (state.psi[n - 2] - before.right[0]) * c;
            set_transparent_pi(state, grid.dx);
        }
    }
}

/// One step from `state`.
pub fn step(state: &FieldState, model: &ModelSpec, grid: &GridSpec, scheme: &SchemeParams) -> Result<FieldState> {
    let mut s = Stepper::new(state.clone(), model, grid, *scheme)?;
    s.advance();
    Ok(s.state)
}

/// Radius beyond which the state is negligible (`≤ 10⁻¹²` of its maximum).
pub fn support_radius(state: &FieldState, grid: &GridSpec) -> f64 {
    let max = state.max_abs();
    if max == 0.0 {
        return 0.0;
    }
    (0..state.len())
        .filter(|&j| state.psi[j].norm().max(state.pi[j].norm()) > 1e-12 * max)
        .map(|j| grid.x(j).abs())
        .fold(0.0, f64::max)
}

pub fn regime(state: &FieldState, model: &ModelSpec, grid: &GridSpec, t: f64) -> Regime {
    let mut reach = support_radius(state, grid);
    for o in model.oscillator_list() {
        reach = reach.max(o.position.abs());
    }
    if let Coupling::MeanField(mf) = &model.coupling {
        let max = mf.rho.iter().fold(0.0f64, |m, r| m.max(r.abs()));
        for (j, r) in mf.rho.iter().enumerate() {
            if r.abs() > 1e-12 * max {
                reach = reach.max(grid.x(j).abs());
            }
        }
    }
    if reach + t < grid.half_width {
        Regime::CausalityBuffer
    } else {
        Regime::BoundaryInfluenced
    }
}

/// Tracks boundary contamination; returns the level relative to its threshold.
struct Monitor {
    bc: Boundary,
    scale: f64,
    outgoing: f64,
    /// `(|ψ_j|, |π_j|)` at the start, for the edge bands.
    edge0: Vec<(f64, f64)>,
}

fn edge_nodes(n: usize) -> impl Iterator<Item = usize> {
    let band = EDGE_BAND.min(n / 2);
    (0..band).chain(n - band..n)
}

impl Monitor {
    fn new(bc: Boundary, state0: &FieldState) -> Self {
        Self {
            bc,
            scale: state0.max_abs().max(f64::MIN_POSITIVE),
            outgoing: 0.0,
            edge0: edge_nodes(state0.len()).map(|j| (state0.psi[j].norm(), state0.pi[j].norm())).collect(),
        }
    }

    fn level(&mut self, state: &FieldState, dx: f64) -> f64 {
        let n = state.len();
        let band = EDGE_BAND.min(n / 2);
        match self.bc {
            Boundary::Dirichlet | Boundary::Periodic => {
                let edge = edge_nodes(n)
                    .zip(&self.edge0)
                    .map(|(j, &(a, b))| (state.psi[j].norm() - a).abs().max((state.pi[j].norm() - b).abs()))
                    .fold(0.0, f64::max);
                edge / (EDGE_TOL * self.scale)
            }
            Boundary::Transparent => {
                let d = |j: usize| (state.psi[j + 1] - state.psi[j - 1]) / (2.0 * dx);
                // Left edge: outgoing waves have π = +ψ', incoming ones π = −ψ'.
                let jl = band.max(2);
                let jr = n - 1 - band.max(2);
                let (pl, dl) = (state.pi[jl], d(jl));
                let (pr, dr) = (state.pi[jr], d(jr));
                let out = (pl + dl).norm().max((pr - dr).norm()) * 0.5;
                let inc = (pl - dl).norm().max((pr + dr).norm()) * 0.5;
                self.outgoing = self.outgoing.max(out);
                if self.outgoing <= 1e-8 * self.scale {
                    return 0.0;
                }
                inc / (REFLECTION_TOL * self.outgoing)
            }
        }
    }
}

fn record(
    state: &FieldState,
    model: &ModelSpec,
    grid: &GridSpec,
    diag: &DiagConfig,
    with_distance: bool,
) -> DiagRecord {
    let local = LocalIntegrals::new(energy_density(state, grid, model.mass), grid);
    let seminorms = diag.radii.iter().map(|&r| (r, local.within(r).sqrt())).collect();
    let nearest: Option<ManifoldDistanceReport> = with_distance.then(|| manifold_distance(state, model, grid));
    DiagRecord {
        time: state.time,
        energy: energy(state, model, grid),
        charge: charge(state, grid),
        seminorms,
        ef_norm: metric_e_f(state, &FieldState::zeros(state.len()), grid, model.mass),
        ef_metric_to_s: nearest.map(|r| r.distance),
        nearest,
        spectral: None,
    }
}

/// Evolves `state0` to time `t_end`, recording diagnostics every `sample_every` steps.
pub fn evolve(
    state0: &FieldState,
    model: &ModelSpec,
    grid: &GridSpec,
    scheme: &SchemeParams,
    t_end: f64,
    sample_every: usize,
    diag: &DiagConfig,
) -> Result<EvolveResult> {
    evolve_observed(state0, model, grid, scheme, t_end, sample_every, diag, &mut |_, _| {})
}

/// As [`evolve`], calling `observer(record, state)` each time a record is taken.
#[allow(clippy::too_many_arguments)]
pub fn evolve_observed(
    state0: &FieldState,
    model: &ModelSpec,
    grid: &GridSpec,
    scheme: &SchemeParams,
    t_end: f64,
    sample_every: usize,
    diag: &DiagConfig,
    observer: &mut dyn FnMut(&DiagRecord, &FieldState),
) -> Result<EvolveResult> {
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::Grid(format!("final time must be finite and nonnegative, got {t_end}")));
    }
    let sample_every = sample_every.max(1);
    let steps = if t_end == 0.0 { 0 } else { (t_end / scheme.dt - 1e-9).ceil() as usize };
    let mut stepper = Stepper::new(state0.clone(), model, grid, *scheme)?;
    let regime = regime(state0, model, grid, steps as f64 * scheme.dt);
    let mut monitor = Monitor::new(scheme.bc, state0);

    let mut traces: Vec<Vec<Complex64>> = stepper.trace_value().into_iter().map(|v| vec![v]).collect();
    for t in &mut traces {
        t.reserve(steps);
    }
    let mut records = Vec::new();
    let mut samples = 0usize;
    let wants_distance = |k: usize| diag.distance_every > 0 && k % diag.distance_every == 0;
    records.push(record(&stepper.state, model, grid, diag, wants_distance(0)));
    observer(records.last().expect("just pushed"), &stepper.state);
    samples += 1;

    let mut status = RunStatus::Completed;
    let mut boundary_level: f64 = 0.0;
    let mut done = 0;
    for n in 1..=steps {
        stepper.advance();
        done = n;
        for (trace, v) in traces.iter_mut().zip(stepper.trace_value()) {
            trace.push(v);
        }
        let max = stepper.state.max_abs();
        if !(max <= scheme.overflow_guard) {
            status = RunStatus::BlownUp;
            break;
        }
        if scheme.buffer_check {
            let level = monitor.level(&stepper.state, grid.dx);
            boundary_level = boundary_level.max(level);
            if level > 1.0 {
                status = RunStatus::BoundaryContaminated;
                records.push(record(&stepper.state, model, grid, diag, false));
                observer(records.last().expect("just pushed"), &stepper.state);
                break;
            }
        }
        if n % sample_every == 0 || n == steps {
            let with_distance = wants_distance(samples) || (n == steps && diag.distance_every > 0);
            records.push(record(&stepper.state, model, grid, diag, with_distance));
            observer(records.last().expect("just pushed"), &stepper.state);
            samples += 1;
        }
    }
    if status == RunStatus::BlownUp {
        // The state is not finite or meaningless; keep it for inspection but skip diagnostics.
        records.push(DiagRecord::bare(stepper.state.time));
    }
    Ok(EvolveResult {
        final_state: stepper.state,
        records,
        traces,
        status,
        steps: done,
        dt: scheme.dt,
        regime,
        boundary_level,
    })
}

/// Free evolution `χ̈ = χ'' − m²χ` with the same scheme.
pub fn evolve_free(
    state0: &FieldState,
    mass: f64,
    grid: &GridSpec,
    scheme: &SchemeParams,
    t_end: f64,
    sample_every: usize,
    diag: &DiagConfig,
) -> Result<EvolveResult> {
    if !(mass >= 0.0 && mass.is_finite()) {
        return Err(Error::Model(format!("mass must be finite and nonnegative, got {mass}")));
    }
    // The massless free equation is allowed here for transport checks.
    let model = ModelSpec { mass, coupling: Coupling::Oscillators(Vec::new()) };
    let diag = DiagConfig { distance_every: 0, ..diag.clone() };
    evolve(state0, &model, grid, scheme, t_end, sample_every, &diag)
}

/// `Dψ` at every node; exposed for boundary diagnostics.
pub fn field_gradient(state: &FieldState, grid: &GridSpec) -> Vec<Complex64> {
    gradient(&state.psi, grid.dx)
}
