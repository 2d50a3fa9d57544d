use std::f64::consts::PI;

use num_complex::Complex64;

use super::random::{mild_first_order_potential, rng};
use super::{tolerances as tol, Check};
use crate::dynamics::{
    apply_gauge, continuity_residual, density_error, eq19_residual, evolve, phase_error, stability_bound,
    DynamicsError, EvolveOptions, Grid, GridState, HydroOptions, InitialData, PhiEquation, PsiEquation, Trajectory,
    DEFAULT_STABILITY_FACTOR,
};
use crate::expr::{parse_expr, Params};
use crate::models::{dg_rescale_phase, ModelKind, PotentialModel, RescaleDirection};
use crate::variational::derive_system;

fn grid() -> Grid {
    Grid::new(tol::LENGTH, tol::POINTS).expect("valid grid")
}

fn packet_on_background() -> InitialData {
    InitialData::GaussianOnBackground {
        background: tol::BACKGROUND,
        amplitude: tol::AMPLITUDE,
        width: tol::WIDTH,
        momentum: tol::MOMENTUM,
        center: tol::LENGTH / 2.0,
    }
}

struct Case {
    label: String,
    model: PotentialModel,
    params: Params,
}

fn builtin_cases() -> Vec<Case> {
    let p = Params::default();
    vec![
        Case { label: "dg".into(), model: PotentialModel::new(ModelKind::Dg), params: p.clone().with("D", tol::DG_D) },
        Case {
            label: "jackiw".into(),
            model: PotentialModel::new(ModelKind::Jackiw),
            params: p.clone().with("lambda", tol::JACKIW_LAMBDA),
        },
        Case {
            label: format!("eip kappa={}", tol::EIP_KAPPA),
            model: PotentialModel::new(ModelKind::Eip),
            params: p.clone().with("kappa", tol::EIP_KAPPA),
        },
        Case {
            label: format!("eip kappa={}", -tol::EIP_KAPPA),
            model: PotentialModel::new(ModelKind::Eip),
            params: p.with("kappa", -tol::EIP_KAPPA),
        },
    ]
}

fn opts(grid: &Grid, params: &Params, dt: f64, t_final: f64, every: usize) -> EvolveOptions {
    EvolveOptions::new(dt, EvolveOptions::steps_for(t_final, dt), every)
        .with_max_dt(stability_bound(grid, params.hbar(), params.m(), DEFAULT_STABILITY_FACTOR))
}

fn run_psi(
    grid: &Grid,
    case: &Case,
    init: &GridState,
    t_final: f64,
    every: usize,
) -> Result<Trajectory, DynamicsError> {
    let ds = derive_system(&case.model.u)?;
    let eq = PsiEquation::new(grid, &ds, &case.params, HydroOptions::default())?
        .with_guards(&case.model.positivity, &case.params)?;
    evolve(&eq, init, &opts(grid, &case.params, tol::DT, t_final, every))
}

fn run_phi(
    grid: &Grid,
    case: &Case,
    init: &GridState,
    t_final: f64,
    every: usize,
) -> Result<Trajectory, DynamicsError> {
    let eq = PhiEquation::new(grid, &case.model, &case.params, HydroOptions::default())?;
    evolve(&eq, init, &opts(grid, &case.params, tol::DT, t_final, every))
}

/// Analytic free evolution of `exp(−(x−c)²/(2w²) + ik₀(x−c))` on the line.
pub fn free_gaussian(x: f64, t: f64, width: f64, k0: f64, center: f64, hbar: f64, m: f64) -> Complex64 {
    let a = width * width;
    let tau = hbar * t / m;
    let y = x - center;
    let denom = Complex64::new(a, tau);
    let exponent = Complex64::new(-y * y, 2.0 * a * k0 * y - a * k0 * k0 * tau) / (2.0 * denom);
    (Complex64::new(a, 0.0) / denom).sqrt() * exponent.exp()
}

fn sample_free_gaussian(grid: &Grid, t: f64, hbar: f64, m: f64, k0: f64) -> Vec<Complex64> {
    grid.x().iter().map(|&x| free_gaussian(x, t, tol::WIDTH, k0, tol::LENGTH / 2.0, hbar, m)).collect()
}

/// RK4 free evolution against the analytic dispersing Gaussian.
pub fn free_particle_fidelity() -> Vec<Check> {
    let g = grid();
    let case = Case { label: "free".into(), model: PotentialModel::new(ModelKind::Free), params: Params::default() };
    let init = GridState::new(0.0, sample_free_gaussian(&g, 0.0, 1.0, 1.0, tol::MOMENTUM));
    let name = "free gaussian L2 error at T=1";
    match run_psi(&g, &case, &init, 1.0, usize::MAX) {
        Ok(traj) => {
            let last = traj.last().expect("initial state kept");
            let exact = sample_free_gaussian(&g, last.t, 1.0, 1.0, tol::MOMENTUM);
            let diff: Vec<Complex64> = last.psi.iter().zip(&exact).map(|(a, b)| a - b).collect();
            vec![Check::at_most(name, g.l2_norm(&diff), tol::FREE_L2)]
        }
        Err(e) => vec![Check::failed(name, &e.to_string())],
    }
}

/// Relative norm drift over `T = 1`.
pub fn conservation() -> Vec<Check> {
    let g = grid();
    let init = packet_on_background().sample(&g);
    let n0 = init.norm(&g);
    builtin_cases()
        .iter()
        .map(|case| {
            let name = format!("norm drift {} over T=1", case.label);
            match run_psi(&g, case, &init, 1.0, usize::MAX) {
                Ok(traj) => {
                    let n1 = traj.last().expect("initial state kept").norm(&g);
                    Check::at_most(name, ((n1 - n0) / n0).abs(), tol::NORM_DRIFT)
                }
                Err(e) => Check::failed(name, &e.to_string()),
            }
        })
        .collect()
}

/// Directly evolved φ against the gauge image of the ψ-run at `T = 0.5`.
pub fn gauge_equivalence() -> Vec<Check> {
    let g = grid();
    let init = packet_on_background().sample(&g);
    let mut out = Vec::new();
    for case in builtin_cases() {
        let result = (|| -> Result<(f64, f64), DynamicsError> {
            let ds = derive_system(&case.model.u)?;
            let h = HydroOptions::default();
            let psi = run_psi(&g, &case, &init, 0.5, usize::MAX)?;
            let phi0 = apply_gauge(&g, &init, &ds, &case.params, &h)?;
            let phi = run_phi(&g, &case, &phi0, 0.5, usize::MAX)?;
            let mapped = apply_gauge(&g, psi.last().expect("kept"), &ds, &case.params, &h)?;
            let direct = phi.last().expect("kept");
            let mapped_field = mapped.field(&g);
            let direct_field = direct.field(&g);
            Ok((density_error(&mapped_field, &direct_field), phase_error(&mapped_field, &direct_field)))
        })();
        match result {
            Ok((d, p)) => {
                out.push(Check::at_most(format!("gauge equivalence {} density", case.label), d, tol::GAUGE_DENSITY));
                out.push(Check::at_most(format!("gauge equivalence {} phase", case.label), p, tol::GAUGE_PHASE));
            }
            Err(e) => out.push(Check::failed(format!("gauge equivalence {}", case.label), &e.to_string())),
        }
    }
    out
}

fn max_residual(r: &[(f64, f64)]) -> f64 {
    r.iter().map(|&(_, v)| v).fold(0.0, f64::max)
}

/// Continuity with the drift current along a DG φ-run, and the same run
/// against the nonlinear current as a negative control.
pub fn current_linearization() -> Vec<Check> {
    let g = grid();
    let case = Case {
        label: "dg".into(),
        model: PotentialModel::new(ModelKind::Dg),
        params: Params::default().with("D", tol::DG_D),
    };
    let init = packet_on_background().sample(&g);
    let h = HydroOptions::default();
    let result = (|| -> Result<(f64, f64, f64), DynamicsError> {
        let ds = derive_system(&case.model.u)?;
        let phi0 = apply_gauge(&g, &init, &ds, &case.params, &h)?;
        let phi = run_phi(&g, &case, &phi0, 0.5, 1)?;
        let drift = parse_expr("S_1*rho/m")?;
        let linear = max_residual(&continuity_residual(&g, &phi, &drift, &case.params, &h)?);
        let wrong = max_residual(&continuity_residual(&g, &phi, &ds.j_psi, &case.params, &h)?);
        let psi = run_psi(&g, &case, &init, 0.5, 1)?;
        let psi_full = max_residual(&continuity_residual(&g, &psi, &ds.j_psi, &case.params, &h)?);
        Ok((linear, wrong, psi_full))
    })();
    match result {
        Ok((linear, wrong, psi_full)) => vec![
            Check::at_most("dg phi-run continuity with drift current", linear, tol::LINEAR_CURRENT),
            Check::at_least("dg phi-run nonlinear-current residual ratio", wrong / linear, tol::NEGATIVE_CONTROL_RATIO),
            Check::at_most("dg psi-run continuity with full current", psi_full, tol::LINEAR_CURRENT),
        ],
        Err(e) => vec![Check::failed("dg current linearization", &e.to_string())],
    }
}

/// DG φ-run from a rescaled analytic linear solution, compared after the
/// inverse rescaling.
pub fn dg_linearization() -> Vec<Check> {
    let g = grid();
    let (hbar, m) = (1.0, 1.0);
    let d = tol::DG_LINEAR_RATIO * hbar / (2.0 * m);
    let params = Params::new(hbar, m).expect("valid").with("D", d);
    let alpha = (1.0 - tol::DG_LINEAR_RATIO * tol::DG_LINEAR_RATIO).sqrt();
    let m_linear = m / alpha;
    let linear = |t: f64| -> GridState {
        let bump = sample_free_gaussian(&g, t, hbar, m_linear, tol::MOMENTUM);
        let psi = bump.iter().map(|b| Complex64::new(tol::BACKGROUND.sqrt(), 0.0) + tol::AMPLITUDE * b).collect();
        GridState::new(t, psi)
    };
    let case = Case { label: "dg".into(), model: PotentialModel::new(ModelKind::Dg), params: params.clone() };
    let h = HydroOptions::default();
    let name = "dg linearization density error at T=0.5";
    let result = (|| -> Result<f64, DynamicsError> {
        let phi0 = dg_rescale_phase(&g, &linear(0.0), d, &params, RescaleDirection::FromLinear, &h)?;
        let phi = run_phi(&g, &case, &phi0, 0.5, usize::MAX)?;
        let last = phi.last().expect("kept");
        let back = dg_rescale_phase(&g, last, d, &params, RescaleDirection::ToLinear, &h)?;
        Ok(density_error(&back.psi, &linear(last.t).psi))
    })();
    match result {
        Ok(err) => vec![Check::at_most(name, err, tol::DG_LINEAR_DENSITY)],
        Err(e) => vec![Check::failed(name, &e.to_string())],
    }
}

/// Observed order of the transformed-equation residual in the snapshot
/// spacing, on thinned copies of one fine ψ-run.
pub fn transformed_residual_order(seed: u64) -> Vec<Check> {
    let g = grid();
    let init = packet_on_background().sample(&g);
    let mut cases = vec![Case {
        label: "free".into(),
        model: PotentialModel::new(ModelKind::Free),
        params: Params::default(),
    }];
    cases.extend(builtin_cases().into_iter().take(3));
    let custom = mild_first_order_potential(&mut rng(seed));
    cases.push(Case { label: format!("custom U = {custom}"), model: PotentialModel::custom(custom), params: Params::default() });

    let every = 20;
    let strides = [4usize, 2, 1];
    let t_final = tol::DT * (every * strides[0] * 6) as f64;
    let h = HydroOptions::default();
    let mut out = Vec::new();
    for case in cases {
        let name = format!("transformed residual order {}", case.label);
        let result = (|| -> Result<f64, DynamicsError> {
            let ds = derive_system(&case.model.u)?;
            let fine = run_psi(&g, &case, &init, t_final, every)?;
            let common: Vec<f64> = fine.thinned(strides[0]).times();
            let common = &common[1..common.len() - 1];
            let mut levels = Vec::new();
            for stride in strides {
                let r = eq19_residual(&g, &fine.thinned(stride), &ds, &case.params, &h)?;
                let worst = r
                    .iter()
                    .filter(|(t, _)| common.iter().any(|c| (c - t).abs() < 1e-12))
                    .map(|&(_, v)| v)
                    .fold(0.0, f64::max);
                levels.push(worst);
            }
            Ok(levels.windows(2).map(|w| (w[0] / w[1]).log2()).fold(f64::INFINITY, f64::min))
        })();
        out.push(match result {
            Ok(order) => Check::at_least(name, order, tol::RESIDUAL_ORDER),
            Err(e) => Check::failed(name, &e.to_string()),
        });
    }
    out
}

/// Temporal order of RK4 from dt-halving against the exact semi-discrete
/// free propagator.
pub fn rk4_order() -> Vec<Check> {
    let g = Grid::new(tol::LENGTH, 128).expect("valid grid");
    let (hbar, m, k0, t_final) = (1.0, 1.0, 2.0, 1.0);
    let init = GridState::new(0.0, sample_free_gaussian(&g, 0.0, hbar, m, k0));
    let spectrum = g.fft(&init.psi);
    let exact_spec: Vec<Complex64> = spectrum
        .iter()
        .zip(g.wavenumbers())
        .map(|(v, &k)| v * Complex64::from_polar(1.0, -hbar * k * k * t_final / (2.0 * m)))
        .collect();
    let exact = g.ifft(&exact_spec);
    let case = Case { label: "free".into(), model: PotentialModel::new(ModelKind::Free), params: Params::default() };
    let name = "rk4 observed temporal order (free problem)";
    let result = (|| -> Result<f64, DynamicsError> {
        let ds = derive_system(&case.model.u)?;
        let eq = PsiEquation::new(&g, &ds, &case.params, HydroOptions::default())?;
        let mut errors = Vec::new();
        for dt in [0.016, 0.008, 0.004] {
            let o = opts(&g, &case.params, dt, t_final, usize::MAX);
            let traj = evolve(&eq, &init, &o)?;
            let diff: Vec<Complex64> =
                traj.last().expect("kept").psi.iter().zip(&exact).map(|(a, b)| a - b).collect();
            errors.push(g.l2_norm(&diff));
        }
        Ok(errors.windows(2).map(|w| (w[0] / w[1]).log2()).fold(f64::INFINITY, f64::min))
    })();
    vec![match result {
        Ok(order) => Check::at_least(name, order, tol::RK4_ORDER),
        Err(e) => Check::failed(name, &e.to_string()),
    }]
}

/// Second spectral derivative of `exp(cos x)` against Richardson-refined
/// fourth-order central differences.
pub fn spectral_accuracy() -> Vec<Check> {
    let g = Grid::new(2.0 * PI, 128).expect("valid grid");
    let f = |x: f64| x.cos().exp();
    let fd = |x: f64, h: f64| {
        (-f(x + 2.0 * h) + 16.0 * f(x + h) - 30.0 * f(x) + 16.0 * f(x - h) - f(x - 2.0 * h)) / (12.0 * h * h)
    };
    let samples: Vec<f64> = g.x().iter().map(|&x| f(x)).collect();
    let d2 = g.spectral_deriv(&samples, 2);
    let h = 1e-2;
    let err = g
        .x()
        .iter()
        .zip(&d2)
        .map(|(&x, d)| (d - (16.0 * fd(x, h / 2.0) - fd(x, h)) / 15.0).abs())
        .fold(0.0, f64::max);
    vec![Check::at_most("spectral second derivative vs finite differences", err, tol::SPECTRAL_FD)]
}
