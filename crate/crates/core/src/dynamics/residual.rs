use num_complex::Complex64;

use super::fields::orders_of;
use super::gauge::{gauge_phase_on_grid, multiply_phase};
use super::{hydro_fields, DynamicsError, Grid, GridState, HydroOptions, Trajectory};
use crate::expr::{CompiledExpr, Expr, Params};
use crate::variational::DerivedSystem;

fn require_three(traj: &Trajectory) -> Result<(), DynamicsError> {
    if traj.len() < 3 {
        Err(DynamicsError::InsufficientSnapshots { have: traj.len() })
    } else {
        Ok(())
    }
}

/// `max |∂ₜρ + ∂ₓj|` at every interior snapshot, with `∂ₜρ` from centered
/// differences and `j` evaluated from `current` on the snapshot.
pub fn continuity_residual(
    grid: &Grid,
    traj: &Trajectory,
    current: &Expr,
    params: &Params,
    opts: &HydroOptions,
) -> Result<Vec<(f64, f64)>, DynamicsError> {
    require_three(traj)?;
    let j = CompiledExpr::new(current, params)?;
    let orders = orders_of(j.symbols());
    let snaps = &traj.snapshots;
    let mut out = Vec::with_capacity(snaps.len() - 2);
    for i in 1..snaps.len() - 1 {
        let dt = snaps[i + 1].t - snaps[i - 1].t;
        let before = snaps[i - 1].density();
        let after = snaps[i + 1].density();
        let f = hydro_fields(grid, &snaps[i], params.hbar(), orders, opts)?;
        let flux = grid.spectral_deriv(&j.eval(&f, Some(grid))?, 1);
        let r = (0..grid.len())
            .map(|x| ((after[x] - before[x]) / dt + flux[x]).abs())
            .fold(0.0, f64::max);
        out.push((snaps[i].t, r));
    }
    Ok(out)
}

/// `W − (m/2)G² − S₁G` on the hydrodynamic fields of ψ.
pub fn local_multiplier(
    grid: &Grid,
    state: &GridState,
    ds: &DerivedSystem,
    params: &Params,
    opts: &HydroOptions,
) -> Result<Vec<f64>, DynamicsError> {
    let terms = ds.transformed_terms.as_ref().ok_or(DynamicsError::NonConservingPotential)?;
    let total: Expr = terms.iter().cloned().sum();
    let c = CompiledExpr::new(&total, params)?;
    let f = hydro_fields(grid, state, params.hbar(), orders_of(c.symbols()), opts)?;
    Ok(c.eval(&f, Some(grid))?)
}

/// Residual of the transformed φ-equation along the gauge image of a
/// ψ-trajectory:
/// `iħφₜ − [−(ħ²/2m)φₓₓ + (W − (m/2)G² − S₁G − m∂ₜΘ)φ]`,
/// with the real global-phase mode `c(t)φ` projected out before taking the
/// max norm. It is assembled on the periodic part `u` of `φ = e^{iqx}u`,
/// where the secular terms of `∂ₜφ` and `∂ₜΘ` cancel.
pub fn eq19_residual(
    grid: &Grid,
    psi_traj: &Trajectory,
    ds: &DerivedSystem,
    params: &Params,
    opts: &HydroOptions,
) -> Result<Vec<(f64, f64)>, DynamicsError> {
    require_three(psi_traj)?;
    let theta_form = ds.theta.as_ref().ok_or(DynamicsError::NonConservingPotential)?;
    let (hbar, m) = (params.hbar(), params.m());
    let snaps = &psi_traj.snapshots;
    let mut thetas = Vec::with_capacity(snaps.len());
    let mut phis = Vec::with_capacity(snaps.len());
    for s in snaps {
        let th = gauge_phase_on_grid(grid, s, theta_form, params, opts)?;
        phis.push(multiply_phase(s, &th, params));
        thetas.push(th.periodic);
    }
    let kinetic = -hbar * hbar / (2.0 * m);
    let mut out = Vec::with_capacity(snaps.len() - 2);
    for i in 1..snaps.len() - 1 {
        let dt = snaps[i + 1].t - snaps[i - 1].t;
        let local = local_multiplier(grid, &snaps[i], ds, params, opts)?;
        let phi = &phis[i].psi;
        let phi_xx = grid.twisted_deriv_from_spectrum(&grid.fft(phi), 2, phis[i].twist);
        let mut r: Vec<Complex64> = (0..grid.len())
            .map(|x| {
                let phi_t = (phis[i + 1].psi[x] - phis[i - 1].psi[x]) / dt;
                let theta_t = (thetas[i + 1][x] - thetas[i - 1][x]) / dt;
                Complex64::new(0.0, hbar) * phi_t
                    - (kinetic * phi_xx[x] + (local[x] - m * theta_t) * phi[x])
            })
            .collect();
        let weight: f64 = phi.iter().map(|v| v.norm_sqr()).sum();
        if weight > 0.0 {
            let c = phi.iter().zip(&r).map(|(p, v)| (p.conj() * v).re).sum::<f64>() / weight;
            r.iter_mut().zip(phi).for_each(|(v, p)| *v -= c * p);
        }
        out.push((snaps[i].t, r.iter().map(|v| v.norm()).fold(0.0, f64::max)));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{evolve, EvolveOptions, InitialData, PsiEquation};
    use crate::expr::parse_potential;
    use crate::variational::derive_system;

    #[test]
    fn needs_three_snapshots() {
        let g = Grid::new(10.0, 16).unwrap();
        let traj = Trajectory { snapshots: vec![GridState::new(0.0, vec![Complex64::new(1.0, 0.0); 16])], spacing: 0.1 };
        assert!(matches!(
            continuity_residual(&g, &traj, &Expr::zero(), &Params::default(), &HydroOptions::default()),
            Err(DynamicsError::InsufficientSnapshots { have: 1 })
        ));
    }

    #[test]
    fn free_plane_wave_is_stationary() {
        let g = Grid::new(20.0, 64).unwrap();
        let p = Params::default();
        let ds = derive_system(&parse_potential("0").unwrap()).unwrap();
        let eq = PsiEquation::new(&g, &ds, &p, HydroOptions::default()).unwrap();
        let init = InitialData::PlaneWave { background: 0.5, momentum: 1.0 }.sample(&g);
        let traj = evolve(&eq, &init, &EvolveOptions::new(1e-3, 40, 10)).unwrap();
        let res = continuity_residual(&g, &traj, &ds.j_psi, &p, &HydroOptions::default()).unwrap();
        assert!(res.iter().all(|&(_, r)| r <= 1e-10), "{res:?}");
        let r19 = eq19_residual(&g, &traj, &ds, &p, &HydroOptions::default()).unwrap();
        assert!(r19.iter().all(|&(_, r)| r <= 1e-6), "{r19:?}");
    }
}
