//! Physical models, polynomial potentials, grids and field states.
//!
//! Every nonlinearity is the gradient of a polynomial potential in `|ψ|²`,
//!
//! ```text
//! U(ψ) = Σ_l u_l |ψ|^{2l},      F(ψ) = -∇U(ψ) = g(|ψ|²) ψ,
//! g(s) = -Σ_{l≥1} 2 l u_l s^{l-1},
//! ```
//!
//! so that `F(e^{iθ}ψ) = e^{iθ}F(ψ)` holds to rounding: the phase never
//! enters `g`.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coefficients `u_0..u_p` of `U(ψ) = Σ u_l |ψ|^{2l}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Potential {
    coeffs: Vec<f64>,
}

impl Potential {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Model("potential needs at least one coefficient".into()));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("potential coefficients"));
        }
        Ok(Self { coeffs })
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Index of the last nonzero coefficient (0 for a constant or zero potential).
    pub fn degree(&self) -> usize {
        self.coeffs.iter().rposition(|&c| c != 0.0).unwrap_or(0)
    }

    pub fn leading(&self) -> f64 {
        self.coeffs[self.degree()]
    }

    /// `U` as a polynomial in `s = |ψ|²`.
    pub fn value_sq(&self, s: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &u| acc * s + u)
    }

    pub fn value(&self, z: Complex64) -> f64 {
        self.value_sq(z.norm_sqr())
    }

    /// The real gain `g(s)` with `F(ψ) = g(|ψ|²) ψ`.
    pub fn gain(&self, s: f64) -> f64 {
        let mut acc = 0.0;
        for l in (1..self.coeffs.len()).rev() {
            acc = acc * s + 2.0 * l as f64 * self.coeffs[l];
        }
        -acc
    }

    /// `g'(s)`.
    pub fn gain_derivative(&self, s: f64) -> f64 {
        let mut acc = 0.0;
        for l in (2..self.coeffs.len()).rev() {
            acc = acc * s + 2.0 * (l * (l - 1)) as f64 * self.coeffs[l];
        }
        -acc
    }

    #[inline]
    pub fn force(&self, z: Complex64) -> Complex64 {
        z * self.gain(z.norm_sqr())
    }

    /// `u_p > 0` and `p ≥ 2`.
    pub fn is_strictly_nonlinear(&self) -> bool {
        self.degree() >= 2 && self.leading() > 0.0
    }

    pub fn is_bounded_below(&self) -> bool {
        self.degree() == 0 || self.leading() > 0.0
    }
}

/// `F(z) = -∇U(z)` for `U = Σ coeffs[l] |z|^{2l}`.
pub fn force(coeffs: &[f64], z: Complex64) -> Result<Complex64> {
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::NonFinite("force argument"));
    }
    let f = Potential::new(coeffs.to_vec())?.force(z);
    if !f.re.is_finite() || !f.im.is_finite() {
        return Err(Error::NonFinite("force value"));
    }
    Ok(f)
}

/// `U(z) = Σ coeffs[l] |z|^{2l}`.
pub fn potential(coeffs: &[f64], z: Complex64) -> Result<f64> {
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::NonFinite("potential argument"));
    }
    let u = Potential::new(coeffs.to_vec())?.value(z);
    if !u.is_finite() {
        return Err(Error::NonFinite("potential value"));
    }
    Ok(u)
}

/// A point oscillator `δ(x - X_J) F_J(ψ(X_J))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OscillatorSpec {
    pub position: f64,
    pub potential: Potential,
}

impl OscillatorSpec {
    pub fn new(position: f64, coeffs: Vec<f64>) -> Result<Self> {
        if !position.is_finite() {
            return Err(Error::NonFinite("oscillator position"));
        }
        let potential = Potential::new(coeffs)?;
        let p = potential.coeffs().len() - 1;
        if p == 0 || potential.coeffs()[p] == 0.0 {
            return Err(Error::Model(format!(
                "oscillator at {position}: the leading coefficient u_p (p = {p}) must be nonzero and p ≥ 1"
            )));
        }
        Ok(Self { position, potential })
    }

    pub fn degree(&self) -> usize {
        self.potential.coeffs().len() - 1
    }

    pub fn is_strictly_nonlinear(&self) -> bool {
        self.potential.is_strictly_nonlinear()
    }
}

/// Mean-field coupling `ρ(x) F(⟨ρ, ψ⟩)`, with `ρ` sampled on the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldSpec {
    pub rho: Vec<f64>,
    pub potential: Potential,
}

impl MeanFieldSpec {
    pub fn new(rho: Vec<f64>, coeffs: Vec<f64>) -> Result<Self> {
        if rho.iter().any(|r| !r.is_finite()) {
            return Err(Error::NonFinite("mean-field rho"));
        }
        if rho.iter().all(|&r| r == 0.0) {
            return Err(Error::Model("mean-field rho is identically zero".into()));
        }
        Ok(Self { rho, potential: Potential::new(coeffs)? })
    }

    /// Samples `rho` on `grid`.
    pub fn from_fn(grid: &GridSpec, rho: impl Fn(f64) -> f64, coeffs: Vec<f64>) -> Result<Self> {
        Self::new((0..grid.n_points).map(|j| rho(grid.x(j))).collect(), coeffs)
    }

    /// Trapezoid `⟨ρ, ψ⟩ = ∫ ρ ψ dx`.
    pub fn pairing(&self, grid: &GridSpec, psi: &[Complex64]) -> Complex64 {
        let w = grid.weights_fn();
        self.rho
            .iter()
            .zip(psi)
            .enumerate()
            .map(|(j, (&r, &p))| p * (r * w(j)))
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Coupling {
    Oscillators(Vec<OscillatorSpec>),
    MeanField(MeanFieldSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub mass: f64,
    pub coupling: Coupling,
}

impl ModelSpec {
    pub fn new(mass: f64, coupling: Coupling) -> Result<Self> {
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::Model(format!("mass must be positive, got {mass}")));
        }
        if let Coupling::Oscillators(osc) = &coupling {
            if osc.windows(2).any(|w| w[1].position <= w[0].position) {
                return Err(Error::Model("oscillator positions must be strictly increasing".into()));
            }
        }
        Ok(Self { mass, coupling })
    }

    pub fn oscillators(mass: f64, oscillators: Vec<OscillatorSpec>) -> Result<Self> {
        Self::new(mass, Coupling::Oscillators(oscillators))
    }

    /// Free Klein-Gordon field.
    pub fn free(mass: f64) -> Result<Self> {
        Self::oscillators(mass, Vec::new())
    }

    pub fn oscillator_list(&self) -> &[OscillatorSpec] {
        match &self.coupling {
            Coupling::Oscillators(o) => o,
            Coupling::MeanField(_) => &[],
        }
    }

    /// Moves each oscillator to its nearest grid node.
    pub fn snapped_to(&self, grid: &GridSpec) -> Result<(ModelSpec, Vec<Snap>)> {
        let mut snaps = Vec::new();
        let coupling = match &self.coupling {
            Coupling::Oscillators(osc) => {
                let mut out = Vec::with_capacity(osc.len());
                for (index, o) in osc.iter().enumerate() {
                    let node = grid.nearest_node(o.position).ok_or_else(|| {
                        Error::Grid(format!("oscillator {index} at {} lies outside the grid", o.position))
                    })?;
                    let snapped = grid.x(node);
                    if (snapped - o.position).abs() > grid.dx / 2.0 + 1e-12 * grid.dx {
                        return Err(Error::Grid(format!(
                            "oscillator {index} at {} is more than dx/2 from the nearest node",
                            o.position
                        )));
                    }
                    if (snapped - o.position).abs() > GridSpec::NODE_TOL * grid.dx {
                        snaps.push(Snap { index, from: o.position, to: snapped });
                    }
                    out.push(OscillatorSpec { position: snapped, potential: o.potential.clone() });
                }
                Coupling::Oscillators(out)
            }
            Coupling::MeanField(mf) => Coupling::MeanField(mf.clone()),
        };
        Ok((ModelSpec::new(self.mass, coupling)?, snaps))
    }
}

/// An oscillator position moved onto the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Snap {
    pub index: usize,
    pub from: f64,
    pub to: f64,
}

/// Uniform grid on `[-half_width, half_width]` with an odd number of nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub half_width: f64,
    pub dx: f64,
    pub n_points: usize,
}

impl GridSpec {
    /// Relative tolerance (in units of `dx`) for "lies on a node".
    pub const NODE_TOL: f64 = 1e-9;

    pub fn new(half_width: f64, dx: f64) -> Result<Self> {
        if !(half_width.is_finite() && dx.is_finite() && half_width > 0.0 && dx > 0.0) {
            return Err(Error::Grid(format!(
                "half_width and dx must be finite and positive (got {half_width}, {dx})"
            )));
        }
        let ratio = half_width / dx;
        let n_half = ratio.round();
        if (ratio - n_half).abs() > Self::NODE_TOL * n_half.max(1.0) || n_half < 1.0 {
            return Err(Error::Grid(format!(
                "half_width / dx = {ratio} is not a positive integer"
            )));
        }
        Ok(Self::from_nodes(n_half as usize, dx))
    }

    /// Grid with `2 n_half + 1` nodes, `half_width = n_half dx`.
    pub fn from_nodes(n_half: usize, dx: f64) -> Self {
        Self { half_width: n_half as f64 * dx, dx, n_points: 2 * n_half + 1 }
    }

    pub fn n_half(&self) -> usize {
        self.n_points / 2
    }

    #[inline]
    pub fn x(&self, j: usize) -> f64 {
        (j as f64 - self.n_half() as f64) * self.dx
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.x(j)).collect()
    }

    pub fn nearest_node(&self, x: f64) -> Option<usize> {
        let k = (x / self.dx).round() + self.n_half() as f64;
        (k >= 0.0 && k < self.n_points as f64).then_some(k as usize)
    }

    /// Node index if `x` lies on a node.
    pub fn node_of(&self, x: f64) -> Option<usize> {
        self.nearest_node(x)
            .filter(|&j| (self.x(j) - x).abs() <= Self::NODE_TOL * self.dx)
    }

    /// Trapezoid weight of node `j`.
    #[inline]
    pub fn weight(&self, j: usize) -> f64 {
        if j == 0 || j + 1 == self.n_points {
            0.5 * self.dx
        } else {
            self.dx
        }
    }

    pub(crate) fn weights_fn(&self) -> impl Fn(usize) -> f64 + '_ {
        move |j| self.weight(j)
    }

    pub fn trapezoid(&self, values: &[f64]) -> f64 {
        values.iter().enumerate().map(|(j, v)| v * self.weight(j)).sum()
    }
}

/// Sampled `(ψ, π = ψ̇)` at a time stamp.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldState {
    pub psi: Vec<Complex64>,
    pub pi: Vec<Complex64>,
    pub time: f64,
}

impl FieldState {
    pub fn zeros(n: usize) -> Self {
        Self { psi: vec![Complex64::new(0.0, 0.0); n], pi: vec![Complex64::new(0.0, 0.0); n], time: 0.0 }
    }

    pub fn from_fns(
        grid: &GridSpec,
        psi: impl Fn(f64) -> Complex64,
        pi: impl Fn(f64) -> Complex64,
    ) -> Self {
        let xs = grid.xs();
        Self {
            psi: xs.iter().map(|&x| psi(x)).collect(),
            pi: xs.iter().map(|&x| pi(x)).collect(),
            time: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.psi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.psi.is_empty()
    }

    pub fn check(&self, grid: &GridSpec) -> Result<()> {
        if self.psi.len() != grid.n_points || self.pi.len() != grid.n_points {
            return Err(Error::Grid(format!(
                "state has {}/{} samples, grid has {}",
                self.psi.len(),
                self.pi.len(),
                grid.n_points
            )));
        }
        if !self.is_finite() {
            return Err(Error::NonFinite("field state"));
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.time.is_finite()
            && self.psi.iter().chain(&self.pi).all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// `e^{iθ}(ψ, π)`.
    pub fn rotated(&self, theta: f64) -> Self {
        let r = Complex64::from_polar(1.0, theta);
        Self {
            psi: self.psi.iter().map(|z| z * r).collect(),
            pi: self.pi.iter().map(|z| z * r).collect(),
            time: self.time,
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            psi: self.psi.iter().map(|z| z * s).collect(),
            pi: self.pi.iter().map(|z| z * s).collect(),
            time: self.time,
        }
    }

    /// Pointwise difference; time of `self` is kept.
    pub fn minus(&self, other: &FieldState) -> Self {
        Self {
            psi: self.psi.iter().zip(&other.psi).map(|(a, b)| a - b).collect(),
            pi: self.pi.iter().zip(&other.pi).map(|(a, b)| a - b).collect(),
            time: self.time,
        }
    }

    /// `max(|ψ|, |π|)` over all nodes.
    pub fn max_abs(&self) -> f64 {
        self.psi.iter().chain(&self.pi).map(|z| z.norm()).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapReport {
    pub holds: bool,
    pub lhs: f64,
    pub rhs: f64,
    /// Fewer than two oscillators: nothing to check.
    pub vacuous: bool,
}

/// Evaluates the spacing condition that excludes trapped multifrequency modes:
///
/// ```text
/// min_J (π²/|X_{J+1}-X_J|² + m²)^{1/2}  >  m max_J min(Π_{l≤J}(2p_l-1), Π_{l≥J}(2p_l-1))
/// ```
pub fn check_gap_condition(model: &ModelSpec) -> Result<GapReport> {
    let osc = match &model.coupling {
        Coupling::Oscillators(o) => o,
        Coupling::MeanField(_) => {
            return Err(Error::Model("the gap condition applies to oscillator couplings only".into()))
        }
    };
    if let Some((j, _)) = osc.iter().enumerate().find(|(_, o)| !o.is_strictly_nonlinear()) {
        return Err(Error::Hypothesis(format!(
            "oscillator {j} is not strictly nonlinear (need u_p > 0 and p ≥ 2)"
        )));
    }
    let m = model.mass;
    let factors: Vec<f64> = osc.iter().map(|o| (2 * o.degree() - 1) as f64).collect();
    let rhs = (0..factors.len())
        .map(|j| {
            let left: f64 = factors[..=j].iter().product();
            let right: f64 = factors[j..].iter().product();
            left.min(right)
        })
        .fold(0.0, f64::max)
        * m;
    if osc.len() < 2 {
        return Ok(GapReport { holds: true, lhs: f64::INFINITY, rhs, vacuous: true });
    }
    let lhs = osc
        .windows(2)
        .map(|w| {
            let gap = w[1].position - w[0].position;
            (PI * PI / (gap * gap) + m * m).sqrt()
        })
        .fold(f64::INFINITY, f64::min);
    Ok(GapReport { holds: lhs > rhs, lhs, rhs, vacuous: false })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Finding {
    OffGrid { index: usize, position: f64, nearest: Option<f64> },
    NotStrictlyNonlinear { index: Option<usize> },
    UnboundedBelow { index: Option<usize> },
    RhoLength { expected: usize, found: usize },
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let which = |i: &Option<usize>| match i {
            Some(i) => format!("oscillator {i}"),
            None => "mean-field potential".to_string(),
        };
        match self {
            Finding::OffGrid { index, position, nearest } => match nearest {
                Some(n) => write!(f, "off-grid oscillator {index} at {position} (nearest node {n})"),
                None => write!(f, "off-grid oscillator {index} at {position} (outside the domain)"),
            },
            Finding::NotStrictlyNonlinear { index } => {
                write!(f, "{} is not strictly nonlinear (need u_p > 0, p ≥ 2)", which(index))
            }
            Finding::UnboundedBelow { index } => {
                write!(f, "{} is not bounded below", which(index))
            }
            Finding::RhoLength { expected, found } => {
                write!(f, "rho has {found} samples, grid has {expected}")
            }
        }
    }
}

/// Checks grid alignment, strict nonlinearity and lower boundedness.
/// An empty list means the model satisfies every hypothesis.
pub fn validate_model(model: &ModelSpec, grid: &GridSpec) -> Vec<Finding> {
    let mut out = Vec::new();
    match &model.coupling {
        Coupling::Oscillators(osc) => {
            for (index, o) in osc.iter().enumerate() {
                if grid.node_of(o.position).is_none() {
                    out.push(Finding::OffGrid {
                        index,
                        position: o.position,
                        nearest: grid.nearest_node(o.position).map(|j| grid.x(j)),
                    });
                }
                if !o.is_strictly_nonlinear() {
                    out.push(Finding::NotStrictlyNonlinear { index: Some(index) });
                }
                if !o.potential.is_bounded_below() {
                    out.push(Finding::UnboundedBelow { index: Some(index) });
                }
            }
        }
        Coupling::MeanField(mf) => {
            if mf.rho.len() != grid.n_points {
                out.push(Finding::RhoLength { expected: grid.n_points, found: mf.rho.len() });
            }
            if !mf.potential.is_strictly_nonlinear() {
                out.push(Finding::NotStrictlyNonlinear { index: None });
            }
            if !mf.potential.is_bounded_below() {
                out.push(Finding::UnboundedBelow { index: None });
            }
        }
    }
    out
}
