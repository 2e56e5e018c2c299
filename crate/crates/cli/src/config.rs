//! Run configuration: a sectioned TOML file resolved into core types.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use kgsim::diagnostics::norms::energy_norm;
use kgsim::integrator::{Boundary, DiagConfig, SchemeParams};
use kgsim::multifreq::{build_linear_degenerate, build_wide_gap, AlphaMode, MultiFreqParams};
use kgsim::solitary::{meanfield_solitary, solitary_profiles_multi};
use kgsim::{
    validate_model, Coupling, FieldState, Finding, GridSpec, MeanFieldSpec, ModelSpec, OscillatorSpec, SolitaryWave,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSection,
    pub grid: GridSection,
    pub time: TimeSection,
    pub initial: InitialSection,
    #[serde(default)]
    pub diagnostics: DiagnosticsSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub mass: f64,
    #[serde(default)]
    pub oscillators: Vec<OscillatorEntry>,
    pub mean_field: Option<MeanFieldEntry>,
    /// Accept potentials that are not bounded below.
    #[serde(default)]
    pub allow_unbounded_below: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OscillatorEntry {
    pub position_x: f64,
    pub coeffs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeanFieldEntry {
    pub coeffs: Vec<f64>,
    /// `ρ(x) = amplitude · e^{−x²/width²}`.
    #[serde(default = "one")]
    pub rho_amplitude: f64,
    #[serde(default = "one")]
    pub rho_width_x: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub half_width_x: f64,
    pub dx: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryName {
    Transparent,
    Dirichlet,
    Periodic,
}

impl From<BoundaryName> for Boundary {
    fn from(b: BoundaryName) -> Self {
        match b {
            BoundaryName::Transparent => Boundary::Transparent,
            BoundaryName::Dirichlet => Boundary::Dirichlet,
            BoundaryName::Periodic => Boundary::Periodic,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    pub dt: Option<f64>,
    pub cfl: Option<f64>,
    pub t_end: f64,
    #[serde(default = "default_sample_every")]
    pub sample_every: usize,
    #[serde(default = "default_boundary")]
    pub boundary: BoundaryName,
    #[serde(default = "yes")]
    pub buffer_check: bool,
}

fn default_sample_every() -> usize {
    100
}

fn default_boundary() -> BoundaryName {
    BoundaryName::Dirichlet
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSection {
    Solitary {
        omega: f64,
        #[serde(default)]
        branch: usize,
        #[serde(default)]
        phase: f64,
    },
    MultifreqLindeg {
        omega: f64,
        l_x: f64,
        beta: f64,
        alpha: Option<f64>,
        amplitude: Option<f64>,
    },
    MultifreqWidegap {
        l_x: f64,
        alpha: f64,
        beta: f64,
    },
    Gaussian {
        seed: u64,
        #[serde(default)]
        center_x: f64,
        #[serde(default = "one")]
        width_x: f64,
        /// Energy norm of the generated data.
        #[serde(default = "one")]
        norm: f64,
    },
    File {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticsSection {
    #[serde(default = "default_radii")]
    pub radii: Vec<f64>,
    /// Manifold distance every this many records; 0 disables it.
    #[serde(default = "default_distance_every")]
    pub distance_every: usize,
    /// Extra spectrum windows `[t_a, t_b]` reported for every trace.
    #[serde(default)]
    pub spectrum_windows: Vec<[f64; 2]>,
}

fn default_radii() -> Vec<f64> {
    DiagConfig::default().radii
}

fn default_distance_every() -> usize {
    DiagConfig::default().distance_every
}

impl Default for DiagnosticsSection {
    fn default() -> Self {
        Self { radii: default_radii(), distance_every: default_distance_every(), spectrum_windows: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_directory")]
    pub directory: PathBuf,
    /// Snapshot every this many records; 0 keeps only the first and last.
    #[serde(default)]
    pub snapshot_every: usize,
    #[serde(default = "yes")]
    pub traces: bool,
}

fn default_directory() -> PathBuf {
    PathBuf::from("out")
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { directory: default_directory(), snapshot_every: 0, traces: true }
    }
}

/// A configuration resolved against the core types, ready to run.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub config: RunConfig,
    pub hash: String,
    pub model: ModelSpec,
    pub grid: GridSpec,
    pub scheme: SchemeParams,
    pub t_end: f64,
    pub sample_every: usize,
    pub diag: DiagConfig,
    pub initial: FieldState,
    pub snaps: Vec<kgsim::model::Snap>,
    pub findings: Vec<Finding>,
    pub multifreq: Option<MultiFreqParams>,
    /// Output directory, relative paths taken from the config file's directory.
    pub directory: PathBuf,
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// Parses a config text; errors carry the line and field.
pub fn parse(text: &str) -> Result<RunConfig, CliError> {
    toml::from_str(text).map_err(|e| bad(e.to_string()))
}

pub fn load(path: &Path) -> Result<Prepared, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let config = parse(&text).map_err(|e| bad(format!("{}: {e}", path.display())))?;
    prepare(config, path.parent().unwrap_or(Path::new(".")))
}

fn rho_gaussian(entry: &MeanFieldEntry) -> impl Fn(f64) -> f64 + '_ {
    move |x: f64| entry.rho_amplitude * (-(x / entry.rho_width_x).powi(2)).exp()
}

fn core_err(context: &str) -> impl Fn(kgsim::Error) -> CliError + '_ {
    move |e| bad(format!("{context}: {e}"))
}

fn build_model(section: &ModelSection, grid: &GridSpec) -> Result<ModelSpec, CliError> {
    let coupling = match (&section.mean_field, section.oscillators.is_empty()) {
        (Some(_), false) => return Err(bad("[model]: give oscillators or mean_field, not both")),
        (Some(mf), true) => {
            if !(mf.rho_width_x > 0.0) {
                return Err(bad("[model.mean_field] rho_width_x must be positive"));
            }
            Coupling::MeanField(
                MeanFieldSpec::from_fn(grid, rho_gaussian(mf), mf.coeffs.clone()).map_err(core_err("[model.mean_field]"))?,
            )
        }
        (None, _) => Coupling::Oscillators(
            section
                .oscillators
                .iter()
                .enumerate()
                .map(|(i, o)| {
                    OscillatorSpec::new(o.position_x, o.coeffs.clone())
                        .map_err(|e| bad(format!("[[model.oscillators]] entry {i}: {e}")))
                })
                .collect::<Result<_, _>>()?,
        ),
    };
    ModelSpec::new(section.mass, coupling).map_err(core_err("[model]"))
}

fn build_multifreq(initial: &InitialSection, mass: f64) -> Result<Option<MultiFreqParams>, CliError> {
    let params = match *initial {
        InitialSection::MultifreqLindeg { omega, l_x, beta, alpha, amplitude } => {
            let mode = match (alpha, amplitude) {
                (Some(a), None) => AlphaMode::Given(a),
                (None, Some(a)) => AlphaMode::FromAmplitude(a),
                _ => return Err(bad("[initial] multifreq_lindeg needs exactly one of alpha, amplitude")),
            };
            build_linear_degenerate(mass, omega, l_x, beta, mode).map_err(core_err("[initial] multifreq_lindeg"))?
        }
        InitialSection::MultifreqWidegap { l_x, alpha, beta } => {
            build_wide_gap(mass, l_x, alpha, beta).map_err(core_err("[initial] multifreq_widegap"))?
        }
        _ => return Ok(None),
    };
    Ok(Some(params))
}

/// `ψ = a e^{−(x−c)²/w²}`, `π = b e^{−(x−c)²/w²}` with complex `a, b` drawn
/// from a seeded stream, rescaled to the requested energy norm.
pub fn gaussian_state(grid: &GridSpec, mass: f64, seed: u64, center: f64, width: f64, norm: f64) -> FieldState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    let (a, b) = (draw(), draw());
    let bump = |x: f64| (-((x - center) / width).powi(2)).exp();
    let state = FieldState::from_fns(grid, |x| a * bump(x), |x| b * bump(x));
    let size = energy_norm(&state, grid, mass);
    if size > 0.0 {
        state.scaled(norm / size)
    } else {
        state
    }
}

/// Reads `x,psi_re,psi_im,pi_re,pi_im` rows; `#` lines and a header row are skipped.
pub fn read_state_csv(path: &Path, grid: &GridSpec) -> Result<FieldState, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let mut state = FieldState::zeros(grid.n_points);
    let mut row = 0;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with('x') {
            continue;
        }
        let vals: Vec<f64> = line
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| bad(format!("{} line {}: {e}", path.display(), lineno + 1)))?;
        if vals.len() != 5 {
            return Err(bad(format!("{} line {}: expected 5 columns", path.display(), lineno + 1)));
        }
        if row >= grid.n_points || (vals[0] - grid.x(row)).abs() > 1e-9 * grid.dx.max(grid.x(row).abs()) {
            return Err(bad(format!("{} line {}: x = {} is not grid node {row}", path.display(), lineno + 1, vals[0])));
        }
        state.psi[row] = Complex64::new(vals[1], vals[2]);
        state.pi[row] = Complex64::new(vals[3], vals[4]);
        row += 1;
    }
    if row != grid.n_points {
        return Err(bad(format!("{}: {row} rows for {} grid nodes", path.display(), grid.n_points)));
    }
    Ok(state)
}

fn solitary_state(model: &ModelSpec, grid: &GridSpec, omega: f64, branch: usize, phase: f64) -> Result<FieldState, CliError> {
    let ctx = "[initial] solitary";
    match &model.coupling {
        Coupling::Oscillators(osc) if osc.len() == 1 => {
            let waves = SolitaryWave::all_at(&osc[0].potential, omega, model.mass, osc[0].position)
                .map_err(core_err(ctx))?;
            let w = waves
                .get(branch)
                .ok_or_else(|| bad(format!("{ctx}: branch {branch} requested, {} amplitudes exist", waves.len())))?;
            Ok(kgsim::sample_solitary(w, grid, phase))
        }
        Coupling::Oscillators(osc) if osc.is_empty() => Err(bad(format!("{ctx}: the free field has no solitary waves"))),
        Coupling::Oscillators(_) => {
            let found = solitary_profiles_multi(model, omega).map_err(core_err(ctx))?;
            let nonzero: Vec<_> = found.profiles.iter().filter(|p| !p.is_zero()).collect();
            let p = nonzero
                .get(branch)
                .ok_or_else(|| bad(format!("{ctx}: branch {branch} requested, {} profiles exist", nonzero.len())))?;
            Ok(p.sample(grid, phase))
        }
        Coupling::MeanField(mf) => {
            let found = meanfield_solitary(mf, omega, model.mass, grid).map_err(core_err(ctx))?;
            let p = found
                .profiles
                .get(branch)
                .ok_or_else(|| bad(format!("{ctx}: branch {branch} requested, {} profiles exist", found.profiles.len())))?;
            Ok(p.state(phase))
        }
    }
}

/// Hash of the canonical form of the config, plus the bytes of any input file.
fn config_hash(config: &RunConfig, base: &Path) -> Result<String, CliError> {
    let mut h = Sha256::new();
    h.update(serde_json::to_vec(config).map_err(|e| bad(e.to_string()))?);
    if let InitialSection::File { path } = &config.initial {
        let p = base.join(path);
        h.update(fs::read(&p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?);
    }
    Ok(h.finalize().iter().map(|b| format!("{b:02x}")).collect())
}

/// Resolves a parsed config. Nothing is written.
pub fn prepare(config: RunConfig, base: &Path) -> Result<Prepared, CliError> {
    let grid = GridSpec::new(config.grid.half_width_x, config.grid.dx).map_err(core_err("[grid]"))?;
    let multifreq = build_multifreq(&config.initial, config.model.mass)?;
    let requested = match &multifreq {
        Some(p) => {
            if !config.model.oscillators.is_empty() || config.model.mean_field.is_some() {
                return Err(bad("[model]: multifrequency data fixes its own oscillators; give only mass"));
            }
            p.model().map_err(core_err("[initial]"))?
        }
        None => build_model(&config.model, &grid)?,
    };
    let (model, snaps) = requested.snapped_to(&grid).map_err(core_err("[model]"))?;
    let findings = validate_model(&model, &grid);
    for f in &findings {
        match f {
            Finding::UnboundedBelow { .. } if config.model.allow_unbounded_below => {}
            // Linear and sub-quadratic couplings are legitimate models; the finding is only reported.
            Finding::NotStrictlyNonlinear { .. } => {}
            _ => {
                return Err(bad(format!(
                    "[model]: {f}{}",
                    if matches!(f, Finding::UnboundedBelow { .. }) { " (set allow_unbounded_below to force)" } else { "" }
                )))
            }
        }
    }

    let t = &config.time;
    let bc: Boundary = t.boundary.into();
    let scheme = match (t.dt, t.cfl) {
        (Some(dt), None) => SchemeParams::new(dt, bc),
        (None, Some(cfl)) => SchemeParams::from_cfl(cfl, &grid, bc),
        _ => return Err(bad("[time]: give exactly one of dt, cfl")),
    }
    .with_buffer_check(t.buffer_check);
    scheme.validate(&grid).map_err(core_err("[time]"))?;
    if !(t.t_end >= 0.0 && t.t_end.is_finite()) {
        return Err(bad("[time] t_end must be finite and nonnegative"));
    }
    if t.sample_every == 0 {
        return Err(bad("[time] sample_every must be positive"));
    }
    let d = &config.diagnostics;
    if d.radii.iter().any(|r| !(*r > 0.0)) {
        return Err(bad("[diagnostics] radii must be positive"));
    }
    for w in &d.spectrum_windows {
        if !(w[0] >= 0.0 && w[1] > w[0] && w[1] <= t.t_end) {
            return Err(bad(format!("[diagnostics] spectrum window {w:?} is not inside [0, t_end]")));
        }
    }

    let initial = match &config.initial {
        InitialSection::Solitary { omega, branch, phase } => solitary_state(&model, &grid, *omega, *branch, *phase)?,
        InitialSection::MultifreqLindeg { .. } | InitialSection::MultifreqWidegap { .. } => {
            multifreq.as_ref().expect("built above").initial_state(&grid)
        }
        InitialSection::Gaussian { seed, center_x, width_x, norm } => {
            if !(*width_x > 0.0 && *norm >= 0.0) {
                return Err(bad("[initial] gaussian needs width_x > 0 and norm ≥ 0"));
            }
            gaussian_state(&grid, model.mass, *seed, *center_x, *width_x, *norm)
        }
        InitialSection::File { path } => read_state_csv(&base.join(path), &grid)?,
    };
    let hash = config_hash(&config, base)?;
    let directory = base.join(&config.output.directory);
    Ok(Prepared {
        hash,
        model,
        grid,
        scheme,
        t_end: t.t_end,
        sample_every: t.sample_every,
        diag: DiagConfig { radii: d.radii.clone(), distance_every: d.distance_every },
        initial,
        snaps,
        findings,
        multifreq,
        directory,
        config,
    })
}

/// A ready-to-run config for a multifrequency construction.
pub fn multifreq_stub(params: &MultiFreqParams) -> RunConfig {
    let initial = match params {
        MultiFreqParams::LinearDegenerate(p) => InitialSection::MultifreqLindeg {
            omega: p.omega,
            l_x: p.l,
            beta: p.beta,
            alpha: Some(p.alpha),
            amplitude: None,
        },
        MultiFreqParams::WideGap(p) => InitialSection::MultifreqWidegap { l_x: p.l, alpha: p.alpha, beta: p.beta },
    };
    // Long enough to separate ω and 3ω in each half of the run.
    let t_end = (40.0 * PI / params.omega()).ceil().max(100.0);
    RunConfig {
        model: ModelSection { mass: params.mass(), oscillators: Vec::new(), mean_field: None, allow_unbounded_below: true },
        grid: GridSection { half_width_x: 40.0_f64.max(2.0 * params.gap()).ceil(), dx: 0.01 },
        time: TimeSection {
            dt: None,
            cfl: Some(0.5),
            t_end,
            sample_every: 200,
            boundary: BoundaryName::Dirichlet,
            buffer_check: true,
        },
        initial,
        diagnostics: DiagnosticsSection::default(),
        output: OutputSection::default(),
    }
}
