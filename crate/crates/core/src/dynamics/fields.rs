use num_complex::Complex64;

use super::{DynamicsError, Grid, GridState};
use crate::expr::{Base, FieldSamples, FieldSymbol, RHO_FLOOR};

pub const REGULARIZATION_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HydroOptions {
    pub rho_floor: f64,
    /// When set, `ρ ← ρ + ε` before any field is formed.
    pub regularization: Option<f64>,
}

impl Default for HydroOptions {
    fn default() -> Self {
        HydroOptions { rho_floor: RHO_FLOOR, regularization: None }
    }
}

/// `(highest ρ order, highest S order)` over a symbol list.
pub fn orders_of(symbols: &[FieldSymbol]) -> (u8, u8) {
    symbols.iter().fold((0, 0), |(r, s), sym| match sym.base {
        Base::Rho => (r.max(sym.order), s),
        Base::S => (r, s.max(sym.order)),
    })
}

pub(crate) fn check_floor(rho: &[f64], floor: f64) -> Result<(), DynamicsError> {
    let min = rho.iter().copied().fold(f64::INFINITY, f64::min);
    if min >= floor {
        Ok(())
    } else {
        Err(DynamicsError::VacuumDensity { min, floor })
    }
}

/// Hydrodynamic samples `ρ_0..ρ_r` and `S_1..S_s` of `state`.
///
/// `S₁ = ħ Im(ψ* ψₓ)/ρ` (the twist included); higher `S` orders differentiate `S₁` spectrally.
/// `S₀` is never produced.
pub fn hydro_fields(
    grid: &Grid,
    state: &GridState,
    hbar: f64,
    orders: (u8, u8),
    opts: &HydroOptions,
) -> Result<FieldSamples, DynamicsError> {
    let spectrum = grid.fft(&state.psi);
    fields_from_spectrum(grid, &state.psi, &spectrum, state.twist, hbar, orders, opts)
}

pub(crate) fn fields_from_spectrum(
    grid: &Grid,
    psi: &[Complex64],
    spectrum: &[Complex64],
    twist: f64,
    hbar: f64,
    (rho_order, s_order): (u8, u8),
    opts: &HydroOptions,
) -> Result<FieldSamples, DynamicsError> {
    let eps = opts.regularization.unwrap_or(0.0);
    let rho: Vec<f64> = psi.iter().map(|v| v.norm_sqr() + eps).collect();
    let mut out = FieldSamples::new(psi.len());
    out.rho_floor = opts.rho_floor;
    for n in 1..=rho_order {
        out.insert(FieldSymbol::rho(n), grid.spectral_deriv(&rho, n as usize))?;
    }
    if s_order >= 1 {
        check_floor(&rho, opts.rho_floor)?;
        let psi_x = grid.twisted_deriv_from_spectrum(spectrum, 1, twist);
        let s1: Vec<f64> = psi
            .iter()
            .zip(&psi_x)
            .zip(&rho)
            .map(|((p, px), r)| hbar * (p.conj() * px).im / r)
            .collect();
        for n in 2..=s_order {
            out.insert(FieldSymbol::s(n), grid.spectral_deriv(&s1, (n - 1) as usize))?;
        }
        out.insert(FieldSymbol::s(1), s1)?;
    }
    out.insert(FieldSymbol::rho(0), rho)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_abs(a: &[f64], f: impl Fn(usize) -> f64) -> f64 {
        a.iter().enumerate().map(|(j, v)| (v - f(j)).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn plane_wave() {
        let g = Grid::new(10.0, 64).unwrap();
        let k = g.wavenumbers()[3];
        let psi = g.x().iter().map(|&x| Complex64::from_polar(0.7, k * x)).collect();
        let f = hydro_fields(&g, &GridState::new(0.0, psi), 1.3, (1, 2), &HydroOptions::default())
            .unwrap();
        assert!(max_abs(f.get(FieldSymbol::s(1)).unwrap(), |_| 1.3 * k) < 1e-12);
        assert!(max_abs(f.get(FieldSymbol::rho(1)).unwrap(), |_| 0.0) < 1e-12);
        assert!(max_abs(f.get(FieldSymbol::s(2)).unwrap(), |_| 0.0) < 1e-11);
    }

    #[test]
    fn real_field_has_no_phase_gradient() {
        let g = Grid::new(10.0, 64).unwrap();
        let psi = g.x().iter().map(|&x| Complex64::new(1.0 + 0.3 * (x * 0.6283).cos(), 0.0)).collect();
        let f = hydro_fields(&g, &GridState::new(0.0, psi), 1.0, (0, 1), &HydroOptions::default())
            .unwrap();
        assert!(max_abs(f.get(FieldSymbol::s(1)).unwrap(), |_| 0.0) < 1e-14);
    }

    #[test]
    fn gaussian_on_background_inverts_construction() {
        // Oracle: pick ρ and S analytically, build ψ, recover S₁ = S'(x).
        let l = 40.0;
        let g = Grid::new(l, 512).unwrap();
        let hbar = 0.8;
        let rho = |x: f64| 0.5 + 0.3 * (-(x - 20.0).powi(2) / 2.0).exp();
        let s = |x: f64| 0.4 * (-(x - 20.0).powi(2) / 3.0).exp();
        let s1 = |x: f64| -0.4 * 2.0 * (x - 20.0) / 3.0 * (-(x - 20.0).powi(2) / 3.0).exp();
        let psi = g.x().iter().map(|&x| Complex64::from_polar(rho(x).sqrt(), s(x) / hbar)).collect();
        let f = hydro_fields(&g, &GridState::new(0.0, psi), hbar, (0, 1), &HydroOptions::default())
            .unwrap();
        let x = g.x().to_vec();
        assert!(max_abs(f.get(FieldSymbol::s(1)).unwrap(), |j| s1(x[j])) <= 1e-9);
    }

    #[test]
    fn vacuum_is_rejected_only_when_dividing() {
        let g = Grid::new(1.0, 16).unwrap();
        let state = GridState::new(0.0, vec![Complex64::new(0.0, 0.0); 16]);
        let opts = HydroOptions::default();
        assert!(hydro_fields(&g, &state, 1.0, (2, 0), &opts).is_ok());
        assert!(matches!(
            hydro_fields(&g, &state, 1.0, (0, 1), &opts),
            Err(DynamicsError::VacuumDensity { .. })
        ));
        let reg = HydroOptions { rho_floor: 1e-13, regularization: Some(REGULARIZATION_EPS) };
        assert!(hydro_fields(&g, &state, 1.0, (0, 1), &reg).is_ok());
    }
}
