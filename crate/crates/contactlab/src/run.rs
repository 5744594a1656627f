use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};
use std::path::{Path, PathBuf};
use std::time::Instant;
use thiserror::Error;

use contactlab_core::contact::{
    build_model_operator, critical_constants, efimov_sequence, fit_all, refinement_family, ContactError,
    CriticalOptions, MIN_FIT_POINTS,
};
use contactlab_core::convergence::{
    bs_crossing, bs_kernel, cross_term_norm, epsilon_sweep, free_hamiltonian, weight_from_potential,
    ConvergenceError,
};
use contactlab_core::meanfield::{ground_state, MeanFieldError, MeanFieldSystem, Trajectory};
use contactlab_core::numerics::{
    tridiagonal_eigenvalue, BoxGrid3D, EigenError, RadialGrid, SymmetricOperator, WaveField,
};
use contactlab_core::twobody::{
    bound_states_radial_with, extension_norms, realize_potential, scattering_length, tune_to_resonance,
    OuterBoundary, RadialHamiltonian, TwobodyError,
};

use crate::config::{
    BsKernelParams, CommandParams, ContactSpectrumParams, CriticalParams, CrossTermParams, ExperimentConfig,
    GpParams, InitialField, ResonanceParams, SweepParams, TwobodyParams,
};
use crate::field_io::{read_field, write_field, FieldIoError};
use crate::report::{emit_report, to_value, write_timing, Provenance, ReportError, RunReport, Table};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Everything a command produced, before anything touches the disk.
#[derive(Debug, Default)]
struct Output {
    results: Map<String, Value>,
    tables: Vec<Table>,
    fields: Vec<(String, WaveField)>,
    warnings: Vec<String>,
    grid: Value,
}

impl Output {
    fn set(&mut self, key: &str, v: Value) {
        self.results.insert(key.to_string(), v);
    }
}

/// How a command stopped short.
enum Failure {
    Validation(String),
    Numerical { message: String, partial: Box<Output> },
}

impl Failure {
    fn numerical(message: impl ToString, partial: Output) -> Self {
        Failure::Numerical {
            message: message.to_string(),
            partial: Box::new(partial),
        }
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("invalid experiment: {0}")]
    Validation(String),
    #[error("numerical failure: {message}")]
    Numerical { message: String, report: Box<RunReport> },
    #[error(transparent)]
    Report(#[from] ReportError),
    #[error("cannot write field file {path}: {source}")]
    Field { path: PathBuf, source: FieldIoError },
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Validation(_) => EXIT_VALIDATION,
            RunError::Numerical { .. } => EXIT_NUMERICAL,
            RunError::Report(_) | RunError::Field { .. } => EXIT_IO,
        }
    }
}

fn eigen_failure(e: &EigenError) -> bool {
    matches!(e, EigenError::NoConvergence { .. })
}

fn twobody_failure(e: TwobodyError, partial: Output) -> Failure {
    match e {
        TwobodyError::Eigen(ref inner) if eigen_failure(inner) => Failure::numerical(e, partial),
        other => Failure::Validation(other.to_string()),
    }
}

fn contact_failure(e: ContactError, partial: Output) -> Failure {
    match e {
        ContactError::NonMonotone { .. }
        | ContactError::NoOnset { .. }
        | ContactError::NoDivergence { .. }
        | ContactError::FitFailed(_) => Failure::numerical(e, partial),
        ContactError::Eigen(ref inner) if eigen_failure(inner) => Failure::numerical(e, partial),
        other => Failure::Validation(other.to_string()),
    }
}

fn convergence_failure(e: ConvergenceError, partial: Output) -> Failure {
    match e {
        ConvergenceError::NotInvertible { .. } | ConvergenceError::NoCrossing { .. } => {
            Failure::numerical(e, partial)
        }
        ConvergenceError::Eigen(ref inner) if eigen_failure(inner) => Failure::numerical(e, partial),
        ConvergenceError::Twobody(inner) => twobody_failure(inner, partial),
        other => Failure::Validation(other.to_string()),
    }
}

fn meanfield_failure(e: MeanFieldError, mut partial: Output) -> Failure {
    match e {
        MeanFieldError::Collapse { iterations, energy, width_squared } => {
            partial.set(
                "collapse",
                json!({ "iterations": iterations, "energy": energy, "width_squared": width_squared }),
            );
            Failure::numerical(e, partial)
        }
        MeanFieldError::NoConvergence { iterations, residual } => {
            partial.set("iterations", json!(iterations));
            partial.set("gradient_residual", json!(residual));
            Failure::numerical(e, partial)
        }
        other => Failure::Validation(other.to_string()),
    }
}

fn radial_grid(spec: &crate::config::GridSpec) -> Result<RadialGrid, Failure> {
    spec.build().map_err(|e| Failure::Validation(format!("grid: {e}")))
}

fn grid_value(grid: &RadialGrid) -> Value {
    json!({
        "n": grid.len(),
        "r_min": grid.r_min(),
        "r_max": grid.r_max(),
        "spacing_law": grid.law(),
        "inner_boundary": grid.inner_boundary(),
    })
}

fn eigen_table(values: &[f64], residuals: &[f64]) -> Table {
    let mut t = Table::new("eigenvalues", &["n", "lambda", "residual"]);
    for (i, (v, r)) in values.iter().zip(residuals).enumerate() {
        t.push(vec![(i + 1).into(), (*v).into(), (*r).into()]);
    }
    t
}

fn run_twobody(p: &TwobodyParams, seed: u64) -> Result<Output, Failure> {
    let mut out = Output::default();
    let grid = radial_grid(&p.grid)?;
    out.grid = grid_value(&grid);
    let pot = realize_potential(&p.potential, &grid).map_err(|e| Failure::Validation(e.to_string()))?;
    let norms = extension_norms(&p.potential).map_err(|e| Failure::Validation(e.to_string()))?;
    out.set("extension_norms", to_value(&norms));
    if p.scattering_length {
        match scattering_length(&pot) {
            Ok(a) => out.set("scattering_length", json!(a)),
            Err(e) => {
                out.warnings.push(format!("scattering length not computed: {e}"));
                out.set("scattering_length", Value::Null);
            }
        }
    }
    let spec = match bound_states_radial_with(&pot, &p.eigen.request(seed), p.outer_boundary) {
        Ok(s) => s,
        Err(e) => return Err(twobody_failure(e, out)),
    };
    out.set("negative_count", json!(spec.negative_count));
    out.set("truncated", json!(spec.truncated));
    out.set("eigenvalues", json!(spec.eigenvalues));
    out.set("residuals", json!(spec.residuals));
    out.set("method", json!(spec.method));
    out.set("grid_meta", to_value(&spec.grid_meta));
    out.tables.push(eigen_table(&spec.eigenvalues, &spec.residuals));
    Ok(out)
}

fn run_resonance(p: &ResonanceParams) -> Result<Output, Failure> {
    let mut out = Output::default();
    let grid = radial_grid(&p.grid)?;
    out.grid = grid_value(&grid);
    let r = tune_to_resonance(&p.potential, (p.bracket[0], p.bracket[1]), &grid)
        .map_err(|e| Failure::Validation(e.to_string()))?;
    out.set("coupling", json!(r.coupling));
    out.set("scattering_length", json!(r.scattering_length));
    out.set("inverse_scattering_length", json!(r.inverse_scattering_length));
    out.set("iterations", json!(r.iterations));
    // the zero-energy resonance is a zero mode of the Neumann problem
    let count = |g: f64| -> Result<usize, Failure> {
        let pot = realize_potential(&p.potential.with_coupling(g), &grid).map_err(|e| Failure::Validation(e.to_string()))?;
        let h = RadialHamiltonian::new(&pot, OuterBoundary::Neumann).map_err(|e| Failure::Validation(e.to_string()))?;
        Ok(h.count_below(0.0))
    };
    let width = 1e-6;
    let below = count((r.coupling - width).max(0.0))?;
    let above = count(r.coupling + width)?;
    out.set(
        "bound_state_onset",
        json!({ "width": width, "count_below": below, "count_above": above }),
    );
    if !(above == below + 1) {
        out.warnings.push(format!(
            "negative count goes from {below} to {above} across the resonance; the grid may not resolve it"
        ));
    }
    Ok(out)
}

fn run_contact_spectrum(p: &ContactSpectrumParams, seed: u64) -> Result<Output, Failure> {
    let mut out = Output::default();
    let grid = radial_grid(&p.grid)?;
    out.grid = grid_value(&grid);
    let op = build_model_operator(p.kind, p.c, &grid, None).map_err(|e| contact_failure(e, Output::default()))?;
    let spec = match efimov_sequence(&op, &p.eigen.request(seed)) {
        Ok(s) => s,
        Err(e) => return Err(contact_failure(e, out)),
    };
    out.set("negative_count", json!(spec.negative_count));
    out.set("truncated", json!(spec.truncated));
    out.set("eigenvalues", json!(spec.eigenvalues));
    out.set("residuals", json!(spec.residuals));
    out.set("method", json!(spec.method));
    out.tables.push(eigen_table(&spec.eigenvalues, &spec.residuals));
    if p.fit {
        if spec.eigenvalues.len() >= MIN_FIT_POINTS {
            match fit_all(&spec.eigenvalues) {
                Ok(fits) => {
                    out.set("best_fit", json!(fits[0].model.name()));
                    out.set("fits", to_value(&fits));
                }
                Err(e) => out.warnings.push(format!("asymptotic fit failed: {e}")),
            }
        } else {
            out.warnings.push(format!(
                "{} negative eigenvalues computed, the fit needs {MIN_FIT_POINTS}",
                spec.eigenvalues.len()
            ));
        }
    }
    Ok(out)
}

fn run_critical(p: &CriticalParams) -> Result<Output, Failure> {
    let mut out = Output::default();
    let grids = refinement_family(p.r_max, p.r_min0, p.levels).map_err(|e| contact_failure(e, Output::default()))?;
    out.grid = Value::Array(grids.iter().map(grid_value).collect());
    let opts = CriticalOptions {
        c_max: p.c_max,
        scan_step: p.scan_step,
        probe_c: p.probe_c,
    };
    let cc = critical_constants(p.kind, &grids, p.probe_tol, &opts).map_err(|e| contact_failure(e, Output::default()))?;
    let two_over_pi = 2.0 / std::f64::consts::PI;
    out.set("c1", json!(cc.c1));
    out.set("c2", json!(cc.c2));
    out.set("c1_bracket", json!([cc.c1_bracket.0, cc.c1_bracket.1]));
    out.set("c1_relative_spread", json!(cc.c1_relative_spread));
    out.set(
        "brackets_two_over_pi",
        json!(cc.c1_bracket.0 <= two_over_pi && two_over_pi <= cc.c1_bracket.1),
    );
    out.set("level_estimates", to_value(&cc.level_estimates));
    out.set("refinement_trace", to_value(&cc.refinement_trace));
    let mut levels = Table::new("levels", &["r_min", "first_threshold", "second_threshold", "onset_estimate"]);
    for l in &cc.level_estimates {
        levels.push(vec![l.r_min.into(), l.first_threshold.into(), l.second_threshold.into(), l.onset_estimate.into()]);
    }
    let mut trace = Table::new("refinement", &["r_min", "n", "probe_c", "negative_count"]);
    for t in &cc.refinement_trace {
        trace.push(vec![t.r_min.into(), t.n.into(), t.probe_c.into(), t.negative_count.into()]);
    }
    out.tables.push(levels);
    out.tables.push(trace);
    Ok(out)
}

fn box_grid(p: &GpParams) -> Result<BoxGrid3D, Failure> {
    BoxGrid3D::new(p.m, p.side).map_err(|e| Failure::Validation(format!("box: {e}")))
}

fn initial_field(p: &GpParams, grid: BoxGrid3D, seed: u64) -> Result<WaveField, Failure> {
    let mut f = match &p.init {
        InitialField::Gaussian { width, center, velocity, noise } => {
            if !(*width > 0.0 && width.is_finite() && *noise >= 0.0) {
                return Err(Failure::Validation("initial width must be positive and noise nonnegative".into()));
            }
            let w2 = 2.0 * width * width;
            let mut f = WaveField::from_fn(grid, |x, y, z| {
                let (dx, dy, dz) = (x - center[0], y - center[1], z - center[2]);
                let phase = velocity[0] * x + velocity[1] * y + velocity[2] * z;
                Complex64::from_polar((-(dx * dx + dy * dy + dz * dz) / w2).exp(), phase)
            });
            if *noise > 0.0 {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let peak = f.values.iter().fold(0.0_f64, |m, v| m.max(v.norm()));
                for v in f.values.iter_mut() {
                    let dn = Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
                    *v += dn * (noise * peak);
                }
            }
            f
        }
        InitialField::File { path } => {
            let f = read_field(path).map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))?;
            if f.grid != grid {
                return Err(Failure::Validation(format!(
                    "{} holds a {}^3 box of side {}, the config asks for {}^3 of side {}",
                    path.display(),
                    f.grid.m(),
                    f.grid.side(),
                    grid.m(),
                    grid.side()
                )));
            }
            f
        }
    };
    if f.norm() == 0.0 {
        return Err(Failure::Validation("initial field is zero".into()));
    }
    f.normalize_to(p.system.mass);
    Ok(f)
}

fn gp_common(p: &GpParams, seed: u64) -> Result<(BoxGrid3D, WaveField, Output), Failure> {
    p.system.validate().map_err(|e| Failure::Validation(e.to_string()))?;
    let grid = box_grid(p)?;
    let init = initial_field(p, grid, seed)?;
    let out = Output {
        grid: json!({ "m": grid.m(), "side": grid.side(), "dx": grid.dx() }),
        ..Output::default()
    };
    Ok((grid, init, out))
}

fn run_gp_groundstate(p: &GpParams, seed: u64) -> Result<Output, Failure> {
    let (_, init, mut out) = gp_common(p, seed)?;
    let state = match ground_state(&p.system, &init) {
        Ok(s) => s,
        Err(e) => return Err(meanfield_failure(e, out)),
    };
    out.set("energy", to_value(&state.energy));
    out.set("chemical_potential", json!(state.chemical_potential));
    out.set("gradient_residual", json!(state.gradient_residual));
    out.set("iterations", json!(state.iterations));
    out.set("mass", json!(state.field.mass()));
    let mut hist = Table::new("energy_history", &["iteration", "energy"]);
    for (i, e) in state.energy_history.iter().enumerate() {
        hist.push(vec![i.into(), (*e).into()]);
    }
    out.tables.push(hist);
    if p.write_field {
        out.fields.push(("ground_state.fld".into(), state.field));
    }
    Ok(out)
}

fn trajectory_output(traj: &Trajectory, p: &GpParams, out: &mut Output) {
    let mut t = Table::new("trajectory", &["step", "time", "mass", "kinetic", "trap", "interaction", "total"]);
    for s in &traj.samples {
        t.push(vec![
            s.step.into(),
            s.time.into(),
            s.mass.into(),
            s.energy.kinetic.into(),
            s.energy.trap.into(),
            s.energy.interaction.into(),
            s.energy.total.into(),
        ]);
    }
    out.tables.push(t);
    if let (Some(first), Some(last)) = (traj.samples.first(), traj.samples.last()) {
        let dm = traj.samples.iter().map(|s| (s.mass - first.mass).abs()).fold(0.0, f64::max);
        let de = traj
            .samples
            .iter()
            .map(|s| (s.energy.total - first.energy.total).abs())
            .fold(0.0, f64::max);
        out.set("samples", json!(traj.samples.len()));
        out.set("final_time", json!(last.time));
        out.set("mass_drift", json!(dm));
        out.set("energy_drift", json!(de));
        out.set("initial_energy", to_value(&first.energy));
        out.set("final_energy", to_value(&last.energy));
    }
    let mut snaps = Table::new("snapshots", &["index", "time", "file"]);
    for (i, (time, field)) in traj.snapshots.iter().enumerate() {
        let name = format!("snapshot_{i:04}.fld");
        snaps.push(vec![i.into(), (*time).into(), name.as_str().into()]);
        out.fields.push((name, field.clone()));
    }
    if !traj.snapshots.is_empty() {
        out.tables.push(snaps);
    }
    if p.write_field {
        out.fields.push(("final.fld".into(), traj.final_field.clone()));
    }
}

fn run_gp_evolve(p: &GpParams, seed: u64) -> Result<Output, Failure> {
    let (grid, init, mut out) = gp_common(p, seed)?;
    let sys = MeanFieldSystem::new(&p.system, grid).map_err(|e| Failure::Validation(e.to_string()))?;
    out.set("stability_number", json!(sys.stability_number()));
    match sys.evolve(&init) {
        Ok(traj) => {
            trajectory_output(&traj, p, &mut out);
            Ok(out)
        }
        Err(MeanFieldError::Blowup { step, time, partial }) => {
            trajectory_output(&partial, p, &mut out);
            out.set("blowup", json!({ "step": step, "time": time }));
            Err(Failure::numerical(
                format!("field became non-finite at step {step} (t = {time})"),
                out,
            ))
        }
        Err(e) => Err(meanfield_failure(e, out)),
    }
}

fn run_sweep(p: &SweepParams) -> Result<Output, Failure> {
    let mut out = Output::default();
    let grid = radial_grid(&p.grid)?;
    out.grid = grid_value(&grid);
    let rep = epsilon_sweep(&p.composite, &p.epsilons, &grid, &p.observables)
        .map_err(|e| convergence_failure(e, Output::default()))?;
    out.set("cauchy_gaps", json!(rep.cauchy_gaps));
    out.set("monotone_flag", json!(rep.monotone_flag));
    out.set("gaps_decreasing", json!(rep.gaps_decreasing));
    out.set("per_epsilon", to_value(&rep.per_epsilon));
    let mut t = Table::new("sweep", &["epsilon", "ground_eigenvalue", "negative_count", "cross_term_norm"]);
    for r in &rep.per_epsilon {
        t.push(vec![
            r.epsilon.into(),
            r.ground_eigenvalue.into(),
            r.negative_count.into(),
            r.cross_term_norm.into(),
        ]);
    }
    out.tables.push(t);
    if !rep.monotone_flag {
        out.warnings.push("ground eigenvalue increases somewhere along the ladder".into());
    }
    if !rep.gaps_decreasing {
        out.warnings.push("Cauchy gaps do not decrease along the ladder".into());
    }
    Ok(out)
}

fn run_bs_kernel(p: &BsKernelParams) -> Result<Output, Failure> {
    let mut out = Output::default();
    let grid = radial_grid(&p.grid)?;
    out.grid = grid_value(&grid);
    let pot = realize_potential(&p.potential, &grid).map_err(|e| Failure::Validation(e.to_string()))?;
    let u = weight_from_potential(&pot);
    let h0 = free_hamiltonian(&grid);
    let h = RadialHamiltonian::new(&pot, OuterBoundary::Dirichlet).map_err(|e| Failure::Validation(e.to_string()))?;
    let mut t = Table::new("bs_kernel", &["z", "max_eigenvalue", "count_above_one", "count_below_minus_z"]);
    let mut per_z = Vec::new();
    for &z in &p.z {
        let k = bs_kernel(&h0, &u, z).map_err(|e| convergence_failure(e, Output::default()))?;
        let eig = k.eigenvalues();
        let above = eig.iter().filter(|v| **v > 1.0).count();
        let below = h.count_below(-z);
        if above != below {
            out.warnings.push(format!("counting identity fails at z = {z}: {above} vs {below}"));
        }
        per_z.push(json!({
            "z": z,
            "max_eigenvalue": k.max_eigenvalue(),
            "leading_eigenvalues": eig.iter().take(p.top).collect::<Vec<_>>(),
            "count_above_one": above,
            "count_below_minus_z": below,
            "support_size": k.support.len(),
        }));
        t.push(vec![z.into(), k.max_eigenvalue().into(), above.into(), below.into()]);
    }
    out.set("per_z", Value::Array(per_z));
    out.tables.push(t);
    if p.crossing {
        let (d, o) = h.tridiagonal().expect("radial operator is tridiagonal");
        let direct = tridiagonal_eigenvalue(d, o, 0);
        out.set("direct_ground_eigenvalue", json!(direct));
        match bs_crossing(&h0, &u, p.crossing_tol) {
            Ok(z_star) => {
                out.set("crossing_z", json!(z_star));
                out.set("crossing_energy", json!(-z_star));
                out.set("crossing_difference", json!((-z_star - direct).abs()));
            }
            Err(ConvergenceError::NoCrossing { z_lo }) => {
                out.warnings.push(format!("no bound state: lambda_max(K(z)) < 1 from z = {z_lo}"));
                out.set("crossing_z", Value::Null);
            }
            Err(e) => return Err(convergence_failure(e, out)),
        }
    }
    Ok(out)
}

fn run_cross_term(p: &CrossTermParams) -> Result<Output, Failure> {
    let mut out = Output::default();
    p.composite.validate().map_err(|e| Failure::Validation(e.to_string()))?;
    if p.epsilons.is_empty() {
        return Err(Failure::Validation("epsilon list is empty".into()));
    }
    let mut t = Table::new("cross_term", &["epsilon", "cross_term_norm"]);
    let mut values = Vec::new();
    for &e in &p.epsilons {
        let v = cross_term_norm(&p.composite, e).map_err(|e| convergence_failure(e, Output::default()))?;
        values.push(v);
        t.push(vec![e.into(), v.into()]);
    }
    out.set("epsilons", json!(p.epsilons));
    out.set("cross_term_norms", json!(values));
    let monotone = p
        .epsilons
        .windows(2)
        .zip(values.windows(2))
        .all(|(e, v)| (e[1] < e[0]) == (v[1] < v[0]) || v[1] == v[0]);
    out.set("monotone_in_epsilon", json!(monotone));
    let pts: Vec<(f64, f64)> = p
        .epsilons
        .iter()
        .zip(&values)
        .filter(|(_, v)| **v > 0.0)
        .map(|(e, v)| (e.ln(), v.ln()))
        .collect();
    if pts.len() >= 2 {
        let n = pts.len() as f64;
        let xb = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let yb = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - xb) * (p.1 - yb)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - xb).powi(2)).sum();
        out.set("log_log_slope", json!(sxy / sxx));
    } else {
        out.set("log_log_slope", Value::Null);
        out.warnings.push("fewer than two positive values, no slope fitted".into());
    }
    out.tables.push(t);
    Ok(out)
}

fn execute(cfg: &ExperimentConfig) -> Result<Output, Failure> {
    let seed = cfg.seed;
    match &cfg.params {
        CommandParams::Twobody(p) => run_twobody(p, seed),
        CommandParams::Resonance(p) => run_resonance(p),
        CommandParams::ContactSpectrum(p) => run_contact_spectrum(p, seed),
        CommandParams::Critical(p) => run_critical(p),
        CommandParams::GpGroundstate(p) => run_gp_groundstate(p, seed),
        CommandParams::GpEvolve(p) => run_gp_evolve(p, seed),
        CommandParams::Sweep(p) => run_sweep(p),
        CommandParams::BsKernel(p) => run_bs_kernel(p),
        CommandParams::CrossTerm(p) => run_cross_term(p),
    }
}

fn build_report(cfg: &ExperimentConfig, out: &mut Output, error: Option<String>) -> RunReport {
    let mut config_echo = to_value(cfg);
    // where the outputs go is not part of the experiment
    if let Value::Object(m) = &mut config_echo {
        m.remove("output_dir");
    }
    RunReport {
        config_echo,
        results: std::mem::take(&mut out.results),
        provenance: Provenance {
            package: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: cfg.command().name().to_string(),
            seed: cfg.seed,
            grid: std::mem::take(&mut out.grid),
        },
        warnings: std::mem::take(&mut out.warnings),
        status: if error.is_some() { "numerical_failure" } else { "ok" }.to_string(),
        error,
        tables: std::mem::take(&mut out.tables),
    }
}

fn persist(report: &RunReport, fields: &[(String, WaveField)], dir: &Path, started: Instant) -> Result<(), RunError> {
    emit_report(report, dir)?;
    for (name, field) in fields {
        let path = dir.join(name);
        write_field(field, &path).map_err(|source| RunError::Field { path, source })?;
    }
    write_timing(dir, started.elapsed().as_secs_f64(), rayon::current_num_threads())?;
    Ok(())
}

/// Runs the experiment and writes its outputs into `cfg.output_dir`.
///
/// Validation failures write nothing. Numerical failures write the partial report
/// and come back as [`RunError::Numerical`].
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunReport, RunError> {
    let started = Instant::now();
    match execute(cfg) {
        Ok(mut out) => {
            let report = build_report(cfg, &mut out, None);
            persist(&report, &out.fields, &cfg.output_dir, started)?;
            Ok(report)
        }
        Err(Failure::Validation(msg)) => Err(RunError::Validation(msg)),
        Err(Failure::Numerical { message, mut partial }) => {
            let report = build_report(cfg, &mut partial, Some(message.clone()));
            persist(&report, &partial.fields, &cfg.output_dir, started)?;
            Err(RunError::Numerical {
                message,
                report: Box::new(report),
            })
        }
    }
}
