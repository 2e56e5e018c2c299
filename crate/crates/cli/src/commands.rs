//! The subcommands. Each writes human-readable output to `out` and returns
//! its result so that tests can inspect it.

use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use kgsim::diagnostics::attraction::{attraction_report, AttractionReport};
use kgsim::diagnostics::norms::seminorm_e_r;
use kgsim::diagnostics::spectrum::windowed_spectrum;
use kgsim::diagnostics::{charge, energy, time_spectrum, SpectrumReport};
use kgsim::integrator::{evolve_free, evolve_observed, Boundary, DiagConfig, Regime, RunStatus, SchemeParams};
use kgsim::multifreq::{build_linear_degenerate, build_wide_gap, AlphaMode, MultiFreqParams, ResidualReport};
use kgsim::{
    amplitude_roots, check_gap_condition, kappa, sample_solitary, FieldState, GapReport, GridSpec, ModelSpec,
    OscillatorSpec, Potential, SolitaryWave,
};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{self, Prepared};
use crate::output::{self, RunManifest};
use crate::{exit, CliError};

fn say(out: &mut dyn Write, text: impl AsRef<str>) -> Result<(), CliError> {
    writeln!(out, "{}", text.as_ref()).map_err(|e| CliError::Io(e.to_string()))
}

fn json<T: Serialize>(value: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))
}

#[derive(Debug, Clone, Serialize)]
struct SimReport<'a> {
    config_hash: &'a str,
    status: RunStatus,
    regime: Regime,
    steps: usize,
    dt: f64,
    boundary_level: f64,
    snaps: &'a [kgsim::model::Snap],
    findings: Vec<String>,
    gap: Option<GapReport>,
    multifreq: Option<MultiFreqParams>,
    initial_energy: f64,
    initial_charge: f64,
    attraction: &'a AttractionReport,
    windows: Vec<SpectrumReport>,
}

#[derive(Debug, Clone)]
pub struct SimulateOutcome {
    pub status: RunStatus,
    pub exit_code: i32,
    pub attraction: AttractionReport,
    pub directory: PathBuf,
    pub files: Vec<String>,
}

fn status_code(status: RunStatus) -> i32 {
    match status {
        RunStatus::Completed => exit::COMPLETED,
        RunStatus::BlownUp => exit::BLOWN_UP,
        RunStatus::BoundaryContaminated => exit::CONTAMINATED,
    }
}

fn prepare_directory(dir: &Path, hash: &str, force: bool) -> Result<(), CliError> {
    if let Some(old) = output::read_manifest(dir)? {
        if old.config_hash != hash && !force {
            return Err(CliError::Refused(dir.display().to_string()));
        }
        for f in &old.files {
            let _ = fs::remove_file(dir.join(f));
        }
    }
    fs::create_dir_all(dir.join("snapshots")).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))
}

/// Runs a prepared config and writes its outputs.
pub fn run_prepared(p: &Prepared, force: bool, out: &mut dyn Write) -> Result<SimulateOutcome, CliError> {
    let start = output::wall_time();
    for s in &p.snaps {
        say(out, format!("snapped oscillator {} from x = {} to node x = {}", s.index, s.from, s.to))?;
    }
    for f in &p.findings {
        say(out, format!("finding: {f}"))?;
    }
    prepare_directory(&p.directory, &p.hash, force)?;
    let dir = &p.directory;
    let mut files: BTreeSet<String> = BTreeSet::new();

    let every = p.config.output.snapshot_every;
    let mut index = 0usize;
    let mut write_error: Option<CliError> = None;
    let mut observer = |_: &kgsim::diagnostics::DiagRecord, state: &FieldState| {
        if index == 0 || (every > 0 && index % every == 0) {
            let name = format!("snapshots/snap_{index:06}.csv");
            match output::write_file(&dir.join(&name), &output::snapshot_csv(state, &p.grid, &p.hash)) {
                Ok(()) => {
                    files.insert(name);
                }
                Err(e) => {
                    write_error.get_or_insert(e);
                }
            }
        }
        index += 1;
    };
    let mut result =
        evolve_observed(&p.initial, &p.model, &p.grid, &p.scheme, p.t_end, p.sample_every, &p.diag, &mut observer)?;
    if let Some(e) = write_error {
        return Err(e);
    }
    let last = format!("snapshots/snap_{:06}.csv", result.records.len().saturating_sub(1));
    output::write_file(&dir.join(&last), &output::snapshot_csv(&result.final_state, &p.grid, &p.hash))?;
    files.insert(last);

    let attraction = attraction_report(&result.records, &result.traces, result.dt, p.model.mass);
    if let (Some(rec), Some(spec)) = (result.records.last_mut(), attraction.late_spectra.first()) {
        rec.spectral = Some(spec.clone());
    }
    let windows = p
        .config
        .diagnostics
        .spectrum_windows
        .iter()
        .flat_map(|w| result.traces.iter().filter_map(|t| time_spectrum(t, result.dt, (w[0], w[1]), p.model.mass).ok()))
        .collect();
    let gap = (p.model.oscillator_list().len() >= 2)
        .then(|| check_gap_condition(&p.model).ok())
        .flatten();

    output::write_file(&dir.join("records.ndjson"), &output::ndjson(&result.records, &p.hash))?;
    files.insert("records.ndjson".into());
    if p.config.output.traces {
        output::write_file(&dir.join("traces.csv"), &output::traces_csv(&result.traces, result.dt, &p.hash))?;
        files.insert("traces.csv".into());
    }
    let report = SimReport {
        config_hash: &p.hash,
        status: result.status,
        regime: result.regime,
        steps: result.steps,
        dt: result.dt,
        boundary_level: result.boundary_level,
        snaps: &p.snaps,
        findings: p.findings.iter().map(|f| f.to_string()).collect(),
        gap,
        multifreq: p.multifreq,
        initial_energy: energy(&p.initial, &p.model, &p.grid),
        initial_charge: charge(&p.initial, &p.grid),
        attraction: &attraction,
        windows,
    };
    output::write_file(&dir.join("report.json"), &(json(&report)? + "\n"))?;
    files.insert("report.json".into());
    let echoed = toml::to_string(&p.config).map_err(|e| CliError::Io(e.to_string()))?;
    output::write_file(&dir.join("config.toml"), &format!("# config_hash={}\n{echoed}", p.hash))?;
    files.insert("config.toml".into());

    let status = result.status;
    let status_name = serde_json::to_value(status).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
    let files: Vec<String> = files.into_iter().collect();
    output::write_manifest(
        dir,
        &RunManifest {
            config_hash: p.hash.clone(),
            artifact_version: output::ARTIFACT_VERSION.into(),
            start_wall_time: start,
            end_wall_time: output::wall_time(),
            status: status_name.clone(),
            files: files.clone(),
        },
    )?;
    say(out, format!("status: {status_name}"))?;
    say(out, format!("regime: {:?}", result.regime))?;
    say(out, format!("verdict: {}", attraction.verdict.as_str()))?;
    if let (Some(max), Some(last)) = (attraction.distance_max, attraction.distance_final) {
        say(out, format!("distance to solitary manifold: max {max:.6e}, final {last:.6e}"))?;
    }
    say(out, format!("outputs in {}", dir.display()))?;
    Ok(SimulateOutcome { status, exit_code: status_code(status), attraction, directory: dir.clone(), files })
}

pub fn cmd_simulate(path: &Path, force: bool, out: &mut dyn Write) -> Result<SimulateOutcome, CliError> {
    let p = config::load(path)?;
    run_prepared(&p, force, out)
}

/// Runs independent configs concurrently; every config needs its own output directory.
/// Returns the largest exit code.
pub fn cmd_batch(paths: &[PathBuf], force: bool, out: &mut dyn Write) -> Result<i32, CliError> {
    let prepared: Vec<Prepared> = paths.iter().map(|p| config::load(p)).collect::<Result<_, _>>()?;
    let mut seen = BTreeSet::new();
    for p in &prepared {
        let key = p.directory.canonicalize().unwrap_or_else(|_| p.directory.clone());
        if !seen.insert(key) {
            return Err(CliError::Config(format!("output directory {} is shared by two configs", p.directory.display())));
        }
    }
    let results: Vec<(Vec<u8>, Result<SimulateOutcome, CliError>)> = prepared
        .par_iter()
        .map(|p| {
            let mut buf = Vec::new();
            let r = run_prepared(p, force, &mut buf);
            (buf, r)
        })
        .collect();
    let mut code = exit::COMPLETED;
    for ((buf, r), path) in results.into_iter().zip(paths) {
        say(out, format!("== {}", path.display()))?;
        out.write_all(&buf).map_err(|e| CliError::Io(e.to_string()))?;
        code = code.max(match r {
            Ok(o) => o.exit_code,
            Err(e) => {
                say(out, format!("error: {e}"))?;
                e.exit_code()
            }
        });
    }
    Ok(code)
}

#[derive(Debug, Clone, Serialize)]
pub struct SolitaryRow {
    pub amplitude: f64,
    pub kappa: f64,
    pub residual: f64,
    pub jump_residual: f64,
    pub energy: f64,
    pub charge: f64,
}

/// Lists the solitary amplitudes at `omega`; optionally writes the first profile.
pub fn cmd_solitary(
    mass: f64,
    omega: f64,
    coeffs: &[f64],
    profile: Option<(&Path, f64, f64)>,
    out: &mut dyn Write,
) -> Result<Vec<SolitaryRow>, CliError> {
    let roots = amplitude_roots(coeffs, omega, mass)?;
    let k = kappa(omega, mass)?;
    let potential = Potential::new(coeffs.to_vec())?;
    let mut rows = Vec::new();
    for c in roots {
        let w = SolitaryWave::new(omega, c, mass, 0.0, potential.clone())?;
        rows.push(SolitaryRow {
            amplitude: c,
            kappa: k,
            residual: w.residual(),
            jump_residual: w.jump_residual(),
            energy: w.energy(),
            charge: w.charge(),
        });
    }
    if rows.is_empty() {
        say(out, "no nonzero solitary waves at this frequency (empty set)")?;
    }
    for r in &rows {
        say(
            out,
            format!(
                "C = {:.15}  kappa = {:.15}  residual = {:.3e}  jump residual = {:.3e}  energy = {:.12}  charge = {:.12}",
                r.amplitude, r.kappa, r.residual, r.jump_residual, r.energy, r.charge
            ),
        )?;
    }
    if let Some((path, half_width, dx)) = profile {
        let first = rows.first().ok_or_else(|| CliError::Config("no profile to write: the root set is empty".into()))?;
        let grid = GridSpec::new(half_width, dx)?;
        let w = SolitaryWave::new(omega, first.amplitude, mass, 0.0, potential)?;
        let hash = format!("solitary m={mass} omega={omega} coeffs={coeffs:?}");
        output::write_file(path, &output::snapshot_csv(&sample_solitary(&w, &grid, 0.0), &grid, &hash))?;
        say(out, format!("profile written to {}", path.display()))?;
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy)]
pub enum MultiFreqArgs {
    Lindeg { mass: f64, omega: f64, l: f64, beta: f64, alpha: Option<f64>, amplitude: Option<f64> },
    Widegap { mass: f64, l: f64, alpha: f64, beta: f64 },
}

/// Builds a multifrequency solution, prints it with its residuals and emits a config stub.
pub fn cmd_multifreq(
    args: MultiFreqArgs,
    config_out: Option<&Path>,
    out: &mut dyn Write,
) -> Result<(MultiFreqParams, ResidualReport), CliError> {
    let params = match args {
        MultiFreqArgs::Lindeg { mass, omega, l, beta, alpha, amplitude } => {
            let mode = match (alpha, amplitude) {
                (Some(a), None) => AlphaMode::Given(a),
                (None, Some(a)) => AlphaMode::FromAmplitude(a),
                _ => return Err(CliError::Config("give exactly one of --alpha, --amplitude".into())),
            };
            build_linear_degenerate(mass, omega, l, beta, mode)?
        }
        MultiFreqArgs::Widegap { mass, l, alpha, beta } => build_wide_gap(mass, l, alpha, beta)?,
    };
    let residuals = params.residual_report();
    say(out, json(&params)?)?;
    say(out, format!("jump residuals: {:.3e} {:.3e}", residuals.jumps[0], residuals.jumps[1]))?;
    for (name, v) in &residuals.algebraic {
        say(out, format!("{name}: {v:.3e}"))?;
    }
    say(out, format!("certified: {}", residuals.certified()))?;
    let stub = toml::to_string(&config::multifreq_stub(&params)).map_err(|e| CliError::Io(e.to_string()))?;
    match config_out {
        Some(path) => {
            output::write_file(path, &stub)?;
            say(out, format!("config written to {}", path.display()))?;
        }
        None => {
            say(out, "# config stub")?;
            say(out, stub)?;
        }
    }
    Ok((params, residuals))
}

/// Gap condition for oscillators of degree `p_J` (unit leading coefficient) at `positions`.
pub fn cmd_gapcheck(mass: f64, positions: &[f64], degrees: &[usize], out: &mut dyn Write) -> Result<GapReport, CliError> {
    if positions.len() != degrees.len() {
        return Err(CliError::Config("positions and degrees differ in length".into()));
    }
    let osc = positions
        .iter()
        .zip(degrees)
        .map(|(&x, &p)| {
            let mut c = vec![0.0; p + 1];
            c[p] = 1.0;
            OscillatorSpec::new(x, c)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let r = check_gap_condition(&ModelSpec::oscillators(mass, osc)?)?;
    if r.vacuous {
        say(out, "vacuous: fewer than two oscillators")?;
    } else {
        say(out, format!("lhs = {:.12}  rhs = {:.12}  {}", r.lhs, r.rhs, if r.holds { "holds" } else { "fails" }))?;
    }
    Ok(r)
}

/// Reads a trace CSV: a `t` column then `re,im` pairs; `#` lines and a header row are skipped.
pub fn read_trace(path: &Path, column: usize) -> Result<(Vec<Complex64>, f64), CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let mut t = Vec::new();
    let mut z = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        let vals: Result<Vec<f64>, _> = cells.iter().map(|c| c.parse::<f64>()).collect();
        let vals = match vals {
            Ok(v) => v,
            Err(_) if t.is_empty() => continue,
            Err(e) => return Err(CliError::Config(format!("{} line {}: {e}", path.display(), lineno + 1))),
        };
        let (re, im) = (1 + 2 * column, 2 + 2 * column);
        if vals.len() <= im {
            return Err(CliError::Config(format!("{} line {}: no trace column {column}", path.display(), lineno + 1)));
        }
        t.push(vals[0]);
        z.push(Complex64::new(vals[re], vals[im]));
    }
    if t.len() < 2 {
        return Err(CliError::Config(format!("{}: trace has fewer than two samples", path.display())));
    }
    let dt = t[1] - t[0];
    if !(dt > 0.0) || t.windows(2).any(|w| ((w[1] - w[0]) - dt).abs() > 1e-6 * dt) {
        return Err(CliError::Config(format!("{}: times are not uniformly spaced", path.display())));
    }
    Ok((z, dt))
}

pub fn cmd_spectrum(
    path: &Path,
    column: usize,
    window: Option<(f64, f64)>,
    mass: f64,
    csv_out: Option<&Path>,
    out: &mut dyn Write,
) -> Result<SpectrumReport, CliError> {
    let (trace, dt) = read_trace(path, column)?;
    let window = window.unwrap_or((0.0, (trace.len() - 1) as f64 * dt));
    let report = time_spectrum(&trace, dt, window, mass)?;
    say(out, json(&report)?)?;
    if let Some(csv) = csv_out {
        let spec = windowed_spectrum(&trace, dt, window)?;
        let mut text = String::from("frequency,amplitude\n");
        for (f, a) in spec.frequencies.iter().zip(&spec.amplitude) {
            text.push_str(&format!("{},{}\n", output::csv_num(*f), output::csv_num(*a)));
        }
        output::write_file(csv, &text)?;
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy)]
pub struct FreeDecayArgs {
    pub mass: f64,
    pub half_width: f64,
    pub dx: f64,
    pub cfl: f64,
    pub t_end: f64,
    pub radius: f64,
    /// Gaussian `ψ₀ = e^{−x²/w²}`, `π₀ = 0`.
    pub width: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct FreeDecayReport {
    pub initial: f64,
    pub final_value: f64,
    pub ratio: f64,
    pub regime: Regime,
    pub status: RunStatus,
}

/// Free evolution of a Gaussian; reports the local energy seminorm at `radius`.
pub fn cmd_free_decay(a: FreeDecayArgs, out: &mut dyn Write) -> Result<FreeDecayReport, CliError> {
    let grid = GridSpec::new(a.half_width, a.dx)?;
    let state = FieldState::from_fns(
        &grid,
        |x| Complex64::new((-(x / a.width).powi(2)).exp(), 0.0),
        |_| Complex64::new(0.0, 0.0),
    );
    let scheme = SchemeParams::from_cfl(a.cfl, &grid, Boundary::Dirichlet);
    let diag = DiagConfig { radii: vec![a.radius], distance_every: 0 };
    let steps = (a.t_end / scheme.dt).ceil() as usize;
    let r = evolve_free(&state, a.mass, &grid, &scheme, a.t_end, steps.max(1), &diag)?;
    let initial = seminorm_e_r(&state, &grid, a.mass, a.radius);
    let final_value = seminorm_e_r(&r.final_state, &grid, a.mass, a.radius);
    let report = FreeDecayReport { initial, final_value, ratio: final_value / initial, regime: r.regime, status: r.status };
    say(out, json(&report)?)?;
    Ok(report)
}
