//! Batch simulation and its CSV/JSON outputs.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_complex::Complex64;
use serde_json::json;

use super::config::{ConfigError, SimConfig};
use crate::dynamics::{
    continuity_residual, eq19_residual, evolve_partial, hydro_fields, orders_of, stability_bound, DynamicsError,
    EvolveOptions, Grid, HydroOptions, PhiEquation, PsiEquation, Trajectory, DEFAULT_STABILITY_FACTOR,
    REGULARIZATION_EPS,
};
use crate::expr::{parse_expr, CompiledExpr, Expr, Params};
use crate::models::PotentialModel;
use crate::variational::{derive_system, DerivedSystem};

#[derive(Debug)]
pub enum SimError {
    Config(ConfigError),
    /// The run stopped early; whatever was computed has been written.
    Runtime(DynamicsError),
    Io(io::Error),
}

impl std::fmt::Display for SimError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SimError::Config(e) => write!(f, "{e}"),
            SimError::Runtime(e) => write!(f, "run aborted: {e}"),
            SimError::Io(e) => write!(f, "output error: {e}"),
        }
    }
}

impl From<io::Error> for SimError {
    fn from(e: io::Error) -> Self {
        SimError::Io(e)
    }
}

pub struct RunSummary {
    pub files: Vec<PathBuf>,
    pub snapshots: usize,
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

/// Records the first failure and keeps going with what can still be written.
#[derive(Default)]
struct Failure(Option<DynamicsError>);

impl Failure {
    fn note(&mut self, e: DynamicsError) {
        if self.0.is_none() {
            self.0 = Some(e);
        }
    }

    /// `None` for missing data, as when a run is too short for centered
    /// differences.
    fn keep<T>(&mut self, r: Result<T, DynamicsError>) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(DynamicsError::InsufficientSnapshots { .. }) => None,
            Err(e) => {
                self.note(e);
                None
            }
        }
    }
}

/// Per-row values for interior snapshots; residuals skip the endpoints.
fn by_row(len: usize, interior: Option<Vec<(f64, f64)>>) -> Vec<Option<f64>> {
    let mut out = vec![None; len];
    if let Some(values) = interior {
        for (i, (_, v)) in values.into_iter().enumerate() {
            if i + 1 < len {
                out[i + 1] = Some(v);
            }
        }
    }
    out
}

fn write_snapshots(path: &Path, grid: &Grid, traj: &Trajectory, hbar: f64, floor: f64) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "t,x,rho,S1,re_psi,im_psi")?;
    for s in &traj.snapshots {
        let d1 = grid.twisted_deriv_from_spectrum(&grid.fft(&s.psi), 1, s.twist);
        let full = s.field(grid);
        for (j, &x) in grid.x().iter().enumerate() {
            let rho = s.psi[j].norm_sqr();
            let s1 = (rho >= floor && rho > 0.0).then(|| hbar * (s.psi[j].conj() * d1[j]).im / rho);
            writeln!(
                w,
                "{},{},{},{},{},{}",
                num(s.t),
                num(x),
                num(rho),
                opt_num(s1),
                num(full[j].re),
                num(full[j].im)
            )?;
        }
    }
    w.flush()
}

fn energy_rows(
    grid: &Grid,
    traj: &Trajectory,
    u: &Expr,
    params: &Params,
    opts: &HydroOptions,
    failure: &mut Failure,
) -> Vec<(f64, f64, Option<f64>)> {
    let compiled = failure.keep(CompiledExpr::new(u, params).map_err(DynamicsError::from));
    let kinetic_scale = params.hbar() * params.hbar() / (2.0 * params.m());
    let mut rows = Vec::with_capacity(traj.len());
    for s in &traj.snapshots {
        let d1 = grid.deriv_from_spectrum(&grid.fft(&s.psi), 1);
        let kinetic = kinetic_scale * grid.integrate(&d1.iter().map(Complex64::norm_sqr).collect::<Vec<_>>());
        let potential = compiled.as_ref().and_then(|c| {
            if c.is_zero() {
                return Some(0.0);
            }
            let f = failure.keep(hydro_fields(grid, s, params.hbar(), orders_of(c.symbols()), opts))?;
            let v = failure.keep(c.eval(&f, None).map_err(DynamicsError::from))?;
            Some(grid.integrate(&v))
        });
        rows.push((s.t, kinetic, potential));
    }
    rows
}

struct Runs {
    psi: Option<Trajectory>,
    phi: Option<Trajectory>,
}

fn run_equations(
    cfg: &SimConfig,
    grid: &Grid,
    model: &PotentialModel,
    ds: &DerivedSystem,
    params: &Params,
    opts: &HydroOptions,
    failure: &mut Failure,
) -> Runs {
    let init = cfg.initial_data().sample(grid);
    let evolve_opts = EvolveOptions::new(
        cfg.time.dt,
        EvolveOptions::steps_for(cfg.time.t_final, cfg.time.dt),
        cfg.time.snapshot_every,
    )
    .with_max_dt(stability_bound(grid, params.hbar(), params.m(), DEFAULT_STABILITY_FACTOR));
    let mut runs = Runs { psi: None, phi: None };
    if cfg.output.equation.runs_psi() {
        let eq = PsiEquation::new(grid, ds, params, *opts).and_then(|e| e.with_guards(&model.positivity, params));
        if let Some(eq) = failure.keep(eq) {
            let (traj, err) = evolve_partial(&eq, &init, &evolve_opts);
            if let Some(e) = err {
                failure.note(e);
            }
            runs.psi = Some(traj);
        }
    }
    if cfg.output.equation.runs_phi() {
        let start = crate::dynamics::apply_gauge(grid, &init, ds, params, opts);
        let eq = PhiEquation::new(grid, model, params, *opts);
        if let (Some(start), Some(eq)) = (failure.keep(start), failure.keep(eq)) {
            let (traj, err) = evolve_partial(&eq, &start, &evolve_opts);
            if let Some(e) = err {
                failure.note(e);
            }
            runs.phi = Some(traj);
        }
    }
    runs
}

/// Runs the configured simulation and writes every output into `out`.
/// Output is byte-identical for identical configs, the manifest's wall time
/// aside.
pub fn simulate(cfg: &SimConfig, out: &Path) -> Result<RunSummary, SimError> {
    let started = Instant::now();
    cfg.validate().map_err(SimError::Config)?;
    let grid = Grid::new(cfg.grid.length, cfg.grid.points).map_err(SimError::Runtime)?;
    let params = cfg.params();
    let model = cfg.potential_model().map_err(SimError::Config)?;
    let ds = derive_system(&model.u).map_err(|e| SimError::Runtime(e.into()))?;
    let opts = HydroOptions {
        rho_floor: cfg.model.rho_floor,
        regularization: cfg.model.regularize.then_some(REGULARIZATION_EPS),
    };
    let mut failure = Failure::default();
    let runs = run_equations(cfg, &grid, &model, &ds, &params, &opts, &mut failure);

    fs::create_dir_all(out)?;
    let mut files = Vec::new();
    let hbar = params.hbar();
    for (label, traj) in [("psi", &runs.psi), ("phi", &runs.phi)] {
        if let Some(traj) = traj {
            let path = out.join(format!("snapshots_{label}.csv"));
            write_snapshots(&path, &grid, traj, hbar, opts.rho_floor)?;
            files.push(path);
        }
    }

    let primary = runs.psi.as_ref().or(runs.phi.as_ref());
    let mut checks = Vec::new();
    if let Some(primary) = primary {
        let rows = primary.len();
        let norms: Vec<f64> = primary.snapshots.iter().map(|s| s.norm(&grid)).collect();
        let continuity = match &runs.psi {
            Some(psi) => failure.keep(continuity_residual(&grid, psi, &ds.j_psi, &params, &opts)),
            None => {
                let drift = parse_expr("S_1*rho/m").expect("valid drift current");
                failure.keep(continuity_residual(&grid, primary, &drift, &params, &opts))
            }
        };
        let continuity = by_row(rows, continuity);
        let residual = by_row(
            rows,
            runs.psi.as_ref().and_then(|psi| failure.keep(eq19_residual(&grid, psi, &ds, &params, &opts))),
        );
        let gauge: Vec<Option<f64>> = (0..rows)
            .map(|i| match (&runs.psi, &runs.phi) {
                (Some(psi), Some(phi)) => phi.snapshots.get(i).map(|p| {
                    psi.snapshots[i]
                        .psi
                        .iter()
                        .zip(&p.psi)
                        .map(|(a, b)| (a.norm_sqr() - b.norm_sqr()).abs())
                        .fold(0.0, f64::max)
                }),
                _ => None,
            })
            .collect();

        let path = out.join("diagnostics.csv");
        let mut w = BufWriter::new(File::create(&path)?);
        writeln!(w, "t,norm,continuity_residual,eq19_residual,gauge_density_error")?;
        for i in 0..rows {
            writeln!(
                w,
                "{},{},{},{},{}",
                num(primary.snapshots[i].t),
                num(norms[i]),
                opt_num(continuity[i]),
                opt_num(residual[i]),
                opt_num(gauge[i])
            )?;
        }
        w.flush()?;
        files.push(path);

        let drift = norms.iter().map(|n| ((n - norms[0]) / norms[0]).abs()).fold(0.0, f64::max);
        checks.push(json!({
            "name": "norm_drift",
            "measured": drift,
            "tolerance": cfg.output.norm_tolerance,
            "pass": drift <= cfg.output.norm_tolerance,
        }));
        if runs.psi.is_some() && runs.phi.is_some() {
            let worst = gauge.iter().flatten().copied().fold(0.0, f64::max);
            checks.push(json!({
                "name": "gauge_density_error",
                "measured": worst,
                "tolerance": cfg.output.gauge_density_tolerance,
                "pass": worst <= cfg.output.gauge_density_tolerance,
            }));
        }
    }

    if let Some(psi) = &runs.psi {
        let path = out.join("energy.csv");
        let mut w = BufWriter::new(File::create(&path)?);
        writeln!(w, "t,kinetic,potential")?;
        for (t, kinetic, potential) in energy_rows(&grid, psi, &model.u, &params, &opts, &mut failure) {
            writeln!(w, "{},{},{}", num(t), num(kinetic), opt_num(potential))?;
        }
        w.flush()?;
        files.push(path);
    }

    let manifest_path = out.join("manifest.json");
    files.push(manifest_path.clone());
    let manifest = json!({
        "config": cfg,
        "versions": { "gaugeflow": env!("CARGO_PKG_VERSION"), "manifest_format": 1 },
        "seed": std::env::var("GAUGEFLOW_SEED").ok(),
        "wall_time_seconds": started.elapsed().as_secs_f64(),
        "status": if failure.0.is_some() { "aborted" } else { "completed" },
        "error": failure.0.as_ref().map(|e| e.to_string()),
        "steps": EvolveOptions::steps_for(cfg.time.t_final, cfg.time.dt),
        "snapshots": {
            "psi": runs.psi.as_ref().map(Trajectory::len),
            "phi": runs.phi.as_ref().map(Trajectory::len),
        },
        "files": files.iter().map(|p| p.file_name().expect("file").to_string_lossy().into_owned()).collect::<Vec<_>>(),
        "checks": checks,
    });
    fs::write(&manifest_path, serde_json::to_string_pretty(&manifest).expect("serializable") + "\n")?;

    match failure.0 {
        Some(e) => Err(SimError::Runtime(e)),
        None => Ok(RunSummary { snapshots: primary.map_or(0, Trajectory::len), files }),
    }
}
