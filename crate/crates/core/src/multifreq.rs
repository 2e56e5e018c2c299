//! Two-frequency solitary waves with spectral lines at `ω` and `3ω`.
//!
//! Both constructions place oscillators at `0` and `L` and use the cubic force
//! `F(ψ) = αψ + β|ψ|²ψ`, for which `sin³θ = ¾ sin θ − ¼ sin 3θ` turns the jump
//! conditions into separate algebraic equations for each harmonic.
//!
//! * Linear degeneration: the second oscillator is linear, `F₂(ψ) = γψ`, and
//!   `3ω < m`, so both harmonics decay away from the pair.
//! * Wide gap: identical cubic oscillators and `m < 3ω`, with the `3ω`
//!   harmonic a standing wave `sin(k(3ω)x)` trapped in `[0, L]` by `k(3ω) = π/L`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{FieldState, GridSpec, ModelSpec, OscillatorSpec};
use crate::numerics::optimize::newton;
use crate::solitary::kappa;

/// Certification threshold relative to `max(|A|, |B|, 1)³`.
pub const CERT_TOL: f64 = 1e-10;
/// Time samples per period in [`MultiFreqParams::residual_report`].
pub const RESIDUAL_SAMPLES: usize = 64;

/// `k(ω) = √(ω² − m²)` for `|ω| > m`.
pub fn k_of(omega: f64, mass: f64) -> Result<f64> {
    if omega.abs() <= mass {
        return Err(Error::Construction(format!("k(ω) needs |ω| > m, got ω = {omega}, m = {mass}")));
    }
    Ok(((omega - mass) * (omega + mass)).sqrt())
}

/// How `α` enters the linear-degeneration construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaMode {
    /// `α` is fixed and `(A, B)` are solved for.
    Given(f64),
    /// `A` is fixed and `α` is solved for.
    FromAmplitude(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearDegenerateParams {
    pub m: f64,
    pub omega: f64,
    pub l: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WideGapParams {
    pub m: f64,
    pub l: f64,
    pub omega: f64,
    pub alpha: f64,
    pub beta: f64,
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MultiFreqParams {
    LinearDegenerate(LinearDegenerateParams),
    WideGap(WideGapParams),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    /// Max over sampled times of the jump mismatch at `0` and at `L`.
    pub jumps: [f64; 2],
    /// Named algebraic conditions and their absolute residuals.
    pub algebraic: Vec<(&'static str, f64)>,
    /// `max(|A|, |B|, 1)³`.
    pub scale: f64,
}

impl ResidualReport {
    pub fn max(&self) -> f64 {
        self.algebraic.iter().map(|r| r.1).chain(self.jumps).fold(0.0, f64::max)
    }

    pub fn certified(&self) -> bool {
        self.max() <= CERT_TOL * self.scale
    }
}

fn cubic(alpha: f64, beta: f64, z: f64) -> f64 {
    alpha * z + beta * z * z * z
}

fn certify(p: MultiFreqParams) -> Result<MultiFreqParams> {
    let report = p.residual_report();
    if !report.certified() {
        return Err(Error::Construction(format!(
            "residuals {:?} exceed {:e}",
            report.algebraic,
            CERT_TOL * report.scale
        )));
    }
    Ok(p)
}

impl LinearDegenerateParams {
    fn kappas(&self) -> (f64, f64) {
        let k1 = ((self.m - self.omega) * (self.m + self.omega)).sqrt();
        let k3 = ((self.m - 3.0 * self.omega) * (self.m + 3.0 * self.omega)).sqrt();
        (k1, k3)
    }

    fn algebraic(&self) -> Vec<(&'static str, f64)> {
        let (k1, k3) = self.kappas();
        let (a, b, c) = (self.a, self.b, self.c);
        let s = a + b;
        let el = (k1 * self.l).exp();
        let (sh, ch) = ((k3 * self.l).sinh(), (k3 * self.l).cosh());
        vec![
            ("c01", 2.0 * k1 * a - (self.alpha * s + 0.75 * self.beta * s.powi(3))),
            ("c03", -k3 * c + 0.25 * self.beta * s.powi(3)),
            ("cl1", (2.0 * b * k1 * el - self.gamma * (a / el + b * el)) / el),
            ("cl3", k3 * c * sh + k3 * c * ch - self.gamma * c * sh),
        ]
    }

    /// `(region value, ∂ₓ)` with the `ω` and `3ω` parts separated.
    fn parts(&self, x: f64, right: bool) -> ([f64; 2], [f64; 2]) {
        let (k1, k3) = self.kappas();
        let (a, b, c, l) = (self.a, self.b, self.c, self.l);
        if x < 0.0 || (x == 0.0 && !right) {
            let e = (k1 * x).exp();
            ([(a + b) * e, 0.0], [k1 * (a + b) * e, 0.0])
        } else if x < l || (x == l && !right) {
            let (em, ep) = ((-k1 * x).exp(), (k1 * x).exp());
            (
                [a * em + b * ep, c * (k3 * x).sinh()],
                [-k1 * a * em + k1 * b * ep, c * k3 * (k3 * x).cosh()],
            )
        } else {
            let (em, ef) = ((-k1 * x).exp(), (k1 * (2.0 * l - x)).exp());
            let e3 = c * (k3 * l).sinh() * (-k3 * (x - l)).exp();
            ([a * em + b * ef, e3], [-k1 * (a * em + b * ef), -k3 * e3])
        }
    }

    pub fn model(&self) -> Result<ModelSpec> {
        ModelSpec::oscillators(
            self.m,
            vec![
                OscillatorSpec::new(0.0, vec![0.0, -self.alpha / 2.0, -self.beta / 4.0])?,
                OscillatorSpec::new(self.l, vec![0.0, -self.gamma / 2.0])?,
            ],
        )
    }
}

impl WideGapParams {
    fn kappa_k(&self) -> (f64, f64) {
        let k1 = ((self.m - self.omega) * (self.m + self.omega)).sqrt();
        let k3 = ((3.0 * self.omega - self.m) * (3.0 * self.omega + self.m)).sqrt();
        (k1, k3)
    }

    fn algebraic(&self) -> Vec<(&'static str, f64)> {
        let (k1, k3) = self.kappa_k();
        let q1 = 1.0 + (-k1 * self.l).exp();
        let cube = self.beta * self.a.powi(3) * q1.powi(3);
        vec![
            ("k-d", (k3 - PI / self.l) * self.l),
            ("c-e/1", 2.0 * self.a * k1 - (self.alpha * self.a * q1 + 0.75 * cube)),
            ("c-e/3", self.b * k3 - 0.25 * cube),
        ]
    }

    fn parts(&self, x: f64, right: bool) -> ([f64; 2], [f64; 2]) {
        let (k1, k3) = self.kappa_k();
        let (a, b, l) = (self.a, self.b, self.l);
        let side = |d: f64| {
            if d > 0.0 || (d == 0.0 && right) {
                1.0
            } else {
                -1.0
            }
        };
        let (e0, el) = ((-k1 * x.abs()).exp(), (-k1 * (x - l).abs()).exp());
        let w1 = a * (e0 + el);
        let d1 = -k1 * a * (side(x) * e0 + side(x - l) * el);
        let inside = (x > 0.0 || (x == 0.0 && right)) && (x < l || (x == l && !right));
        let (w3, d3) = if inside { (b * (k3 * x).sin(), b * k3 * (k3 * x).cos()) } else { (0.0, 0.0) };
        ([w1, w3], [d1, d3])
    }

    pub fn model(&self) -> Result<ModelSpec> {
        let coeffs = vec![0.0, -self.alpha / 2.0, -self.beta / 4.0];
        ModelSpec::oscillators(
            self.m,
            vec![OscillatorSpec::new(0.0, coeffs.clone())?, OscillatorSpec::new(self.l, coeffs)?],
        )
    }
}

/// Solves the linear-degeneration system for `(ω, L, β)` and the chosen `α` mode.
///
/// `γ` follows from the `3ω` condition at `L`, `(A, B)` from the `ω`
/// conditions by Newton, and `C` from the `3ω` condition at `0`.
pub fn build_linear_degenerate(m: f64, omega: f64, l: f64, beta: f64, alpha: AlphaMode) -> Result<MultiFreqParams> {
    if !(m > 0.0 && omega > 0.0 && l > 0.0) || [m, omega, l, beta].iter().any(|v| !v.is_finite()) {
        return Err(Error::Construction("need m > 0, ω > 0, L > 0 and finite β".into()));
    }
    if 3.0 * omega >= m {
        return Err(Error::Construction(format!("κ(3ω) is not real: 3ω = {} ≥ m = {m}", 3.0 * omega)));
    }
    if beta == 0.0 {
        return Err(Error::Construction("β must be nonzero".into()));
    }
    let k1 = kappa(omega, m)?;
    let k3 = kappa(3.0 * omega, m)?;
    let gamma = k3 * (1.0 + 1.0 / (k3 * l).tanh());
    if (2.0 * k1 - gamma).abs() <= 1e-12 * k1 {
        return Err(Error::Construction("γ = 2κ(ω): the ω condition at L forces A = 0".into()));
    }
    // B = r A from the linear ω condition at L.
    let r = gamma * (-2.0 * k1 * l).exp() / (2.0 * k1 - gamma);
    let q = 1.0 + r;
    if q == 0.0 {
        return Err(Error::Construction("A + B vanishes identically".into()));
    }

    let (alpha, a_seed) = match alpha {
        AlphaMode::Given(alpha) => {
            let a2 = (2.0 * k1 - alpha * q) * 4.0 / (3.0 * beta * q.powi(3));
            if !(a2 > 0.0) {
                return Err(Error::Construction(format!(
                    "no real A for α = {alpha}, β = {beta}: A² = {a2:e}"
                )));
            }
            (alpha, a2.sqrt())
        }
        AlphaMode::FromAmplitude(a) => {
            if !(a > 0.0 && a.is_finite()) {
                return Err(Error::Construction(format!("A must be positive, got {a}")));
            }
            ((2.0 * k1 - 0.75 * beta * q.powi(3) * a * a) / q, a)
        }
    };

    let el = (k1 * l).exp();
    let residual = |v: &DVector<f64>| {
        let (a, b) = (v[0], v[1]);
        let s = a + b;
        DVector::from_vec(vec![
            2.0 * k1 * a - alpha * s - 0.75 * beta * s.powi(3),
            2.0 * b * k1 - gamma * (a / (el * el) + b),
        ])
    };
    let jacobian = |v: &DVector<f64>| {
        let s = v[0] + v[1];
        let ds = -alpha - 2.25 * beta * s * s;
        DMatrix::from_row_slice(2, 2, &[2.0 * k1 + ds, ds, -gamma / (el * el), 2.0 * k1 - gamma])
    };
    let seed = DVector::from_vec(vec![a_seed, r * a_seed]);
    let out = newton(residual, jacobian, seed, 1e-14 * a_seed.max(1.0).powi(3), 50);
    if !out.converged && out.residual > 1e-11 * a_seed.max(1.0).powi(3) {
        return Err(Error::Construction(format!("Newton for (A, B) did not converge, residual trace {:?}", out.trace)));
    }
    let (a, b) = (out.x[0], out.x[1]);
    let c = beta * (a + b).powi(3) / (4.0 * k3);
    certify(MultiFreqParams::LinearDegenerate(LinearDegenerateParams { m, omega, l, alpha, beta, gamma, a, b, c }))
}

/// Builds the wide-gap solution for oscillators at `0` and `L`.
pub fn build_wide_gap(m: f64, l: f64, alpha: f64, beta: f64) -> Result<MultiFreqParams> {
    if !(m > 0.0 && l.is_finite() && alpha.is_finite() && beta.is_finite()) {
        return Err(Error::Construction("need m > 0 and finite L, α, β".into()));
    }
    let threshold = PI / (2f64.powf(1.5) * m);
    if !(l > threshold) {
        return Err(Error::Construction(format!(
            "L = {l} must exceed π/(2^(3/2) m) = {threshold} so that 3ω < 3m (m-pi)"
        )));
    }
    let omega = (PI * PI / (l * l) + m * m).sqrt() / 3.0;
    let k1 = kappa(omega, m)?;
    let k3 = PI / l;
    let q1 = 1.0 + (-k1 * l).exp();
    let a2 = (2.0 * k1 - alpha * q1) * 4.0 / (3.0 * beta * q1.powi(3));
    if !(a2 > 0.0) {
        return Err(Error::Construction(format!(
            "(2κ(ω)/(1+e^(-κ(ω)L)) - α)β = {} must be positive (2k-alpha)",
            (2.0 * k1 / q1 - alpha) * beta
        )));
    }
    let a = a2.sqrt();
    let b = beta * a2 * a * q1.powi(3) / (4.0 * k3);
    certify(MultiFreqParams::WideGap(WideGapParams { m, l, omega, alpha, beta, a, b }))
}

impl MultiFreqParams {
    pub fn omega(&self) -> f64 {
        match self {
            Self::LinearDegenerate(p) => p.omega,
            Self::WideGap(p) => p.omega,
        }
    }

    pub fn mass(&self) -> f64 {
        match self {
            Self::LinearDegenerate(p) => p.m,
            Self::WideGap(p) => p.m,
        }
    }

    /// Oscillator separation `L`.
    pub fn gap(&self) -> f64 {
        match self {
            Self::LinearDegenerate(p) => p.l,
            Self::WideGap(p) => p.l,
        }
    }

    /// Time-independent spatial amplitudes of the `ω` and `3ω` parts and their
    /// `x`-derivatives, taking one-sided limits at the oscillators.
    fn parts(&self, x: f64, right: bool) -> ([f64; 2], [f64; 2]) {
        match self {
            Self::LinearDegenerate(p) => p.parts(x, right),
            Self::WideGap(p) => p.parts(x, right),
        }
    }

    fn scale(&self) -> f64 {
        let (a, b) = match self {
            Self::LinearDegenerate(p) => (p.a, p.b),
            Self::WideGap(p) => (p.a, p.b),
        };
        a.abs().max(b.abs()).max(1.0).powi(3)
    }

    /// `ψ(x, t)`.
    pub fn eval(&self, x: f64, t: f64) -> f64 {
        let w = self.omega();
        let ([u1, u3], _) = self.parts(x, true);
        u1 * (w * t).sin() + u3 * (3.0 * w * t).sin()
    }

    /// `∂ₜψ(x, t)`.
    pub fn eval_dt(&self, x: f64, t: f64) -> f64 {
        let w = self.omega();
        let ([u1, u3], _) = self.parts(x, true);
        w * u1 * (w * t).cos() + 3.0 * w * u3 * (3.0 * w * t).cos()
    }

    /// The exact solution sampled at time `t`, stamped with that time.
    pub fn state(&self, grid: &GridSpec, t: f64) -> FieldState {
        let xs = grid.xs();
        FieldState {
            psi: xs.iter().map(|&x| Complex64::new(self.eval(x, t), 0.0)).collect(),
            pi: xs.iter().map(|&x| Complex64::new(self.eval_dt(x, t), 0.0)).collect(),
            time: t,
        }
    }

    /// Initial data at `t = 0`: `ψ = 0` and `π = ∂ₜψ(·, 0)`.
    pub fn initial_state(&self, grid: &GridSpec) -> FieldState {
        self.state(grid, 0.0)
    }

    pub fn model(&self) -> Result<ModelSpec> {
        match self {
            Self::LinearDegenerate(p) => p.model(),
            Self::WideGap(p) => p.model(),
        }
    }

    /// Jump mismatches sampled over one period `2π/ω` and the algebraic residuals.
    pub fn residual_report(&self) -> ResidualReport {
        let (algebraic, forces): (_, [Box<dyn Fn(f64) -> f64>; 2]) = match *self {
            Self::LinearDegenerate(p) => (
                p.algebraic(),
                [Box::new(move |z| cubic(p.alpha, p.beta, z)), Box::new(move |z| p.gamma * z)],
            ),
            Self::WideGap(p) => (
                p.algebraic(),
                [Box::new(move |z| cubic(p.alpha, p.beta, z)), Box::new(move |z| cubic(p.alpha, p.beta, z))],
            ),
        };
        let w = self.omega();
        let period = 2.0 * PI / w;
        let mut jumps = [0.0; 2];
        for (i, &x) in [0.0, self.gap()].iter().enumerate() {
            let (value, right) = self.parts(x, true);
            let (_, left) = self.parts(x, false);
            for n in 0..RESIDUAL_SAMPLES {
                let t = period * n as f64 / RESIDUAL_SAMPLES as f64;
                let (s1, s3) = ((w * t).sin(), (3.0 * w * t).sin());
                let psi = value[0] * s1 + value[1] * s3;
                let jump = -(right[0] * s1 + right[1] * s3) + (left[0] * s1 + left[1] * s3);
                jumps[i] = f64::max(jumps[i], (jump - forces[i](psi)).abs());
            }
        }
        ResidualReport { jumps, algebraic, scale: self.scale() }
    }
}
