use std::f64::consts::PI;

use num_complex::Complex64;

use super::fields::{check_floor, orders_of};
use super::{hydro_fields, DynamicsError, Grid, GridState, HydroOptions};
use crate::expr::{CompiledExpr, Params};
use crate::variational::{DerivedSystem, PhaseForm};

/// `Θ = mean_gradient·x + periodic` on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugePhase {
    pub periodic: Vec<f64>,
    pub mean_gradient: f64,
}

/// `Θ` sampled on the grid: the closed form when known, otherwise the
/// mean-zero spectral antiderivative of the integrand plus its secular part.
pub fn gauge_phase_on_grid(
    grid: &Grid,
    state: &GridState,
    theta: &PhaseForm,
    params: &Params,
    opts: &HydroOptions,
) -> Result<GaugePhase, DynamicsError> {
    let (expr, integrate) = match &theta.closed {
        Some(c) => (c, false),
        None => (&theta.integrand, true),
    };
    let compiled = CompiledExpr::new(expr, params)?;
    if compiled.is_zero() {
        return Ok(GaugePhase { periodic: vec![0.0; grid.len()], mean_gradient: 0.0 });
    }
    let f = hydro_fields(grid, state, params.hbar(), orders_of(compiled.symbols()), opts)?;
    check_floor(f.get(crate::expr::FieldSymbol::rho(0)).unwrap_or(&[]), opts.rho_floor)?;
    let values = compiled.eval(&f, Some(grid))?;
    Ok(if integrate {
        let (periodic, mean_gradient) = grid.cumint(&values);
        GaugePhase { periodic, mean_gradient }
    } else {
        GaugePhase { periodic: values, mean_gradient: 0.0 }
    })
}

/// `φ = ψ·exp(i m Θ/ħ)`. The secular part of `Θ` goes into the twist.
pub fn apply_gauge(
    grid: &Grid,
    state: &GridState,
    ds: &DerivedSystem,
    params: &Params,
    opts: &HydroOptions,
) -> Result<GridState, DynamicsError> {
    let theta = ds.theta.as_ref().ok_or(DynamicsError::NonConservingPotential)?;
    let phase = gauge_phase_on_grid(grid, state, theta, params, opts)?;
    Ok(multiply_phase(state, &phase, params))
}

pub(crate) fn multiply_phase(state: &GridState, phase: &GaugePhase, params: &Params) -> GridState {
    let scale = params.m() / params.hbar();
    let psi = state
        .psi
        .iter()
        .zip(&phase.periodic)
        .map(|(p, th)| p * Complex64::from_polar(1.0, scale * th))
        .collect();
    GridState::new(state.t, psi).with_twist(state.twist + scale * phase.mean_gradient)
}

/// `max |ρ_a − ρ_b|`.
pub fn density_error(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x.norm_sqr() - y.norm_sqr()).abs()).fold(0.0, f64::max)
}

fn wrap(angle: f64) -> f64 {
    let a = (angle + PI).rem_euclid(2.0 * PI) - PI;
    if a <= -PI {
        a + 2.0 * PI
    } else {
        a
    }
}

/// Largest pointwise phase difference after removing the best single
/// global phase (the argument of `⟨b, a⟩`).
pub fn phase_error(a: &[Complex64], b: &[Complex64]) -> f64 {
    let overlap: Complex64 = a.iter().zip(b).map(|(x, y)| x * y.conj()).sum();
    let c = overlap.arg();
    a.iter()
        .zip(b)
        .map(|(x, y)| wrap((x * y.conj()).arg() - c).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_potential;
    use crate::models::builtin;
    use crate::variational::derive_system;

    fn packet(g: &Grid) -> GridState {
        let psi = g
            .x()
            .iter()
            .map(|&x| {
                let bump = 0.3 * (-(x - 20.0).powi(2) / 2.0).exp();
                Complex64::new(0.5f64.sqrt(), 0.0) + Complex64::from_polar(bump, 0.7 * (x - 20.0))
            })
            .collect();
        GridState::new(0.0, psi)
    }

    #[test]
    fn free_gauge_is_identity() {
        let g = Grid::new(40.0, 128).unwrap();
        let s = packet(&g);
        let ds = derive_system(&parse_potential("0").unwrap()).unwrap();
        let phi = apply_gauge(&g, &s, &ds, &Params::default(), &HydroOptions::default()).unwrap();
        assert_eq!(phi, s);
    }

    #[test]
    fn dg_gauge_factor_is_power_of_density() {
        let g = Grid::new(40.0, 128).unwrap();
        let s = packet(&g);
        let (d, hbar, m) = (0.05, 0.9, 1.3);
        let p = Params::new(hbar, m).unwrap().with("D", d);
        let ds = derive_system(&builtin("dg", &p).unwrap().u).unwrap();
        let phi = apply_gauge(&g, &s, &ds, &p, &HydroOptions::default()).unwrap();
        for (a, b) in phi.psi.iter().zip(&s.psi) {
            let expected = b * Complex64::from_polar(1.0, m * d * b.norm_sqr().ln() / hbar);
            assert!((a - expected).norm() < 1e-14);
        }
    }

    #[test]
    fn eip_phase_shift_matches_closed_antiderivative() {
        // Oracle: ρ = 1/2 + a·e^{-x²/2}, S = b·e^{-x²/3} give
        // ∫ρS₁ dx = (b/2)e^{-x²/3} + (2ab/5)e^{-5x²/6} in closed form.
        let (a, b, kappa, c) = (0.3, 0.4, 0.2, 20.0);
        let g = Grid::new(40.0, 512).unwrap();
        let psi = g
            .x()
            .iter()
            .map(|&x| {
                let y = x - c;
                let rho = 0.5 + a * (-y * y / 2.0).exp();
                Complex64::from_polar(rho.sqrt(), b * (-y * y / 3.0).exp())
            })
            .collect();
        let s = GridState::new(0.0, psi);
        let p = Params::default().with("kappa", kappa);
        let ds = derive_system(&builtin("eip", &p).unwrap().u).unwrap();
        let phi = apply_gauge(&g, &s, &ds, &p, &HydroOptions::default()).unwrap();
        let shift: Vec<f64> =
            phi.field(&g).iter().zip(&s.psi).map(|(u, v)| (u * v.conj()).arg()).collect();
        let anti: Vec<f64> = g
            .x()
            .iter()
            .map(|&x| {
                let y = x - c;
                kappa * (b / 2.0 * (-y * y / 3.0).exp() + 2.0 * a * b / 5.0 * (-5.0 * y * y / 6.0).exp())
            })
            .collect();
        let mean = anti.iter().sum::<f64>() / anti.len() as f64;
        // The closed antiderivative is periodic here, so no twist is expected.
        assert!(phi.twist.abs() < 1e-14);
        let err = shift.iter().zip(&anti).map(|(u, v)| (u - (v - mean)).abs()).fold(0.0, f64::max);
        assert!(err <= 1e-10, "{err}");
    }

    #[test]
    fn modulus_is_preserved() {
        let g = Grid::new(40.0, 128).unwrap();
        let s = packet(&g);
        let p = Params::default().with("lambda", 0.3);
        let ds = derive_system(&builtin("jackiw", &p).unwrap().u).unwrap();
        let phi = apply_gauge(&g, &s, &ds, &p, &HydroOptions::default()).unwrap();
        for (a, b) in phi.psi.iter().zip(&s.psi) {
            assert!((a.norm() - b.norm()).abs() <= 4.0 * f64::EPSILON * b.norm());
        }
    }

    #[test]
    fn jackiw_phase_has_secular_part() {
        let g = Grid::new(40.0, 128).unwrap();
        let s = packet(&g);
        let lambda = 0.3;
        let p = Params::default().with("lambda", lambda);
        let ds = derive_system(&builtin("jackiw", &p).unwrap().u).unwrap();
        let phi = apply_gauge(&g, &s, &ds, &p, &HydroOptions::default()).unwrap();
        let mean_rho = s.norm(&g) / g.length();
        assert!((phi.twist + lambda * mean_rho / 2.0).abs() < 1e-14);
    }

    #[test]
    fn phase_error_ignores_global_phase() {
        let a = vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 2.0)];
        let rot = Complex64::from_polar(1.0, 2.5);
        let b: Vec<Complex64> = a.iter().map(|v| v * rot).collect();
        assert!(phase_error(&a, &b) < 1e-15);
        assert!(density_error(&a, &b) < 1e-15);
    }
}
