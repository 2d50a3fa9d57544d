use num_complex::Complex64;

use super::fields::{fields_from_spectrum, orders_of};
use super::{DynamicsError, Grid, GridState, HydroOptions};
use crate::expr::{CompiledExpr, Expr, FieldSamples, Params};
use crate::models::PotentialModel;
use crate::variational::DerivedSystem;

/// Autonomous right-hand side `∂ₜψ = F(ψ)` for the periodic part of a field
/// with the given twist (see [`GridState`]).
pub trait Rhs {
    fn rhs(&self, psi: &[Complex64], twist: f64) -> Result<Vec<Complex64>, DynamicsError>;
}

fn max_orders(exprs: &[&CompiledExpr]) -> (u8, u8) {
    exprs.iter().fold((0, 0), |(r, s), e| {
        let (er, es) = orders_of(e.symbols());
        (r.max(er), s.max(es))
    })
}

fn check_positive(guards: &[CompiledExpr], f: &FieldSamples) -> Result<(), DynamicsError> {
    for g in guards {
        let v = g.eval(f, None)?;
        let min = v.iter().copied().fold(f64::INFINITY, f64::min);
        if !(min > 0.0) {
            return Err(DynamicsError::EipDegenerate { min });
        }
    }
    Ok(())
}

/// `(1/iħ)[−(ħ²/2m)ψₓₓ + V ψ]` given the spectrum of ψ and a multiplier `V`.
fn schrodinger(
    grid: &Grid,
    psi: &[Complex64],
    spectrum: &[Complex64],
    twist: f64,
    hbar: f64,
    m: f64,
    potential: Option<&[Complex64]>,
) -> Vec<Complex64> {
    let psi_xx = grid.twisted_deriv_from_spectrum(spectrum, 2, twist);
    let kinetic = -hbar * hbar / (2.0 * m);
    let factor = Complex64::new(0.0, -1.0 / hbar);
    match potential {
        Some(v) => {
            let mut out: Vec<Complex64> = psi
                .iter()
                .zip(&psi_xx)
                .zip(v)
                .map(|((p, pxx), v)| factor * (kinetic * pxx + v * p))
                .collect();
            // Odd derivatives carry no Nyquist mode, so a nonlinearity that
            // mixes them with even ones has no restoring coupling there.
            grid.drop_nyquist(&mut out);
            out
        }
        None => psi_xx.iter().map(|pxx| factor * kinetic * pxx).collect(),
    }
}

/// ψ-equation with complex nonlinearity `W + i𝒲`.
#[derive(Debug, Clone)]
pub struct PsiEquation {
    grid: Grid,
    hbar: f64,
    m: f64,
    w: CompiledExpr,
    cal_w: CompiledExpr,
    guards: Vec<CompiledExpr>,
    orders: (u8, u8),
    opts: HydroOptions,
}

impl PsiEquation {
    pub fn new(
        grid: &Grid,
        ds: &DerivedSystem,
        params: &Params,
        opts: HydroOptions,
    ) -> Result<Self, DynamicsError> {
        if !ds.conserves_n {
            return Err(DynamicsError::NonConservingPotential);
        }
        params.validate()?;
        let w = CompiledExpr::new(&ds.w, params)?;
        let cal_w = CompiledExpr::new(&ds.cal_w, params)?;
        let orders = max_orders(&[&w, &cal_w]);
        Ok(PsiEquation {
            grid: grid.clone(),
            hbar: params.hbar(),
            m: params.m(),
            w,
            cal_w,
            guards: Vec::new(),
            orders,
            opts,
        })
    }

    /// Adds pointwise positivity constraints checked at every evaluation.
    pub fn with_guards(mut self, guards: &[Expr], params: &Params) -> Result<Self, DynamicsError> {
        for g in guards {
            let c = CompiledExpr::new(g, params)?;
            let (r, s) = orders_of(c.symbols());
            self.orders = (self.orders.0.max(r), self.orders.1.max(s));
            self.guards.push(c);
        }
        Ok(self)
    }

    /// `W` and `𝒲` sampled on the grid.
    pub fn nonlinearity(&self, psi: &[Complex64], twist: f64) -> Result<(Vec<f64>, Vec<f64>), DynamicsError> {
        let spectrum = self.grid.fft(psi);
        let f = fields_from_spectrum(&self.grid, psi, &spectrum, twist, self.hbar, self.orders, &self.opts)?;
        check_positive(&self.guards, &f)?;
        Ok((self.w.eval(&f, None)?, self.cal_w.eval(&f, None)?))
    }
}

impl Rhs for PsiEquation {
    fn rhs(&self, psi: &[Complex64], twist: f64) -> Result<Vec<Complex64>, DynamicsError> {
        let spectrum = self.grid.fft(psi);
        if self.w.is_zero() && self.cal_w.is_zero() && self.guards.is_empty() {
            return Ok(schrodinger(&self.grid, psi, &spectrum, twist, self.hbar, self.m, None));
        }
        let f = fields_from_spectrum(&self.grid, psi, &spectrum, twist, self.hbar, self.orders, &self.opts)?;
        check_positive(&self.guards, &f)?;
        let w = self.w.eval(&f, None)?;
        let cw = self.cal_w.eval(&f, None)?;
        let v: Vec<Complex64> = w.iter().zip(&cw).map(|(a, b)| Complex64::new(*a, *b)).collect();
        Ok(schrodinger(&self.grid, psi, &spectrum, twist, self.hbar, self.m, Some(&v)))
    }
}

/// φ-equation with a model's closed-form real nonlinearity
/// `Σ numerator/denominator`, evaluated on the hydrodynamic fields of φ
/// (so `S_n` there stands for the derivatives of `σ`).
#[derive(Debug, Clone)]
pub struct PhiEquation {
    grid: Grid,
    hbar: f64,
    m: f64,
    terms: Vec<(CompiledExpr, CompiledExpr)>,
    guards: Vec<CompiledExpr>,
    orders: (u8, u8),
    opts: HydroOptions,
}

impl PhiEquation {
    pub fn new(
        grid: &Grid,
        model: &PotentialModel,
        params: &Params,
        opts: HydroOptions,
    ) -> Result<Self, DynamicsError> {
        let phi_terms = model.phi_rhs.as_ref().ok_or(DynamicsError::NoClosedForm)?;
        params.validate()?;
        let mut terms = Vec::with_capacity(phi_terms.len());
        for t in phi_terms {
            terms.push((CompiledExpr::new(&t.numerator, params)?, CompiledExpr::new(&t.denominator, params)?));
        }
        let guards = model
            .positivity
            .iter()
            .map(|g| CompiledExpr::new(g, params))
            .collect::<Result<Vec<_>, _>>()?;
        let all: Vec<&CompiledExpr> =
            terms.iter().flat_map(|(a, b)| [a, b]).chain(guards.iter()).collect();
        let orders = max_orders(&all);
        Ok(PhiEquation { grid: grid.clone(), hbar: params.hbar(), m: params.m(), terms, guards, orders, opts })
    }

    fn multiplier_from(&self, f: &FieldSamples) -> Result<Vec<f64>, DynamicsError> {
        check_positive(&self.guards, f)?;
        let mut out = vec![0.0; f.len()];
        for (num, den) in &self.terms {
            let n = num.eval(f, None)?;
            let d = den.eval(f, None)?;
            let min = d.iter().copied().fold(f64::INFINITY, f64::min);
            if !(min > 0.0) {
                return Err(DynamicsError::EipDegenerate { min });
            }
            out.iter_mut().zip(n.iter().zip(&d)).for_each(|(o, (a, b))| *o += a / b);
        }
        Ok(out)
    }

    /// The real nonlinearity sampled on the grid.
    pub fn nonlinearity(&self, phi: &[Complex64], twist: f64) -> Result<Vec<f64>, DynamicsError> {
        let spectrum = self.grid.fft(phi);
        let f = fields_from_spectrum(&self.grid, phi, &spectrum, twist, self.hbar, self.orders, &self.opts)?;
        self.multiplier_from(&f)
    }
}

impl Rhs for PhiEquation {
    fn rhs(&self, phi: &[Complex64], twist: f64) -> Result<Vec<Complex64>, DynamicsError> {
        let spectrum = self.grid.fft(phi);
        if self.terms.is_empty() && self.guards.is_empty() {
            return Ok(schrodinger(&self.grid, phi, &spectrum, twist, self.hbar, self.m, None));
        }
        let f = fields_from_spectrum(&self.grid, phi, &spectrum, twist, self.hbar, self.orders, &self.opts)?;
        let v: Vec<Complex64> =
            self.multiplier_from(&f)?.into_iter().map(|a| Complex64::new(a, 0.0)).collect();
        Ok(schrodinger(&self.grid, phi, &spectrum, twist, self.hbar, self.m, Some(&v)))
    }
}

/// One-shot ψ right-hand side.
pub fn psi_rhs(
    grid: &Grid,
    ds: &DerivedSystem,
    state: &GridState,
    params: &Params,
) -> Result<Vec<Complex64>, DynamicsError> {
    PsiEquation::new(grid, ds, params, HydroOptions::default())?.rhs(&state.psi, state.twist)
}

/// One-shot φ right-hand side.
pub fn phi_rhs(
    grid: &Grid,
    model: &PotentialModel,
    state: &GridState,
    params: &Params,
) -> Result<Vec<Complex64>, DynamicsError> {
    PhiEquation::new(grid, model, params, HydroOptions::default())?.rhs(&state.psi, state.twist)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_potential;
    use crate::models::builtin;
    use crate::variational::derive_system;

    fn plane_wave(g: &Grid, amp: f64, k: f64) -> GridState {
        GridState::new(0.0, g.x().iter().map(|&x| Complex64::from_polar(amp, k * x)).collect())
    }

    fn max_dev(a: &[Complex64], b: impl Fn(usize) -> Complex64) -> f64 {
        a.iter().enumerate().map(|(j, v)| (v - b(j)).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn nonlinear_rhs_has_no_nyquist_component() {
        let g = Grid::new(10.0, 32).unwrap();
        let p = Params::default().with("D", 0.1);
        let ds = derive_system(&builtin("dg", &p).unwrap().u).unwrap();
        let psi: Vec<Complex64> = g
            .x()
            .iter()
            .enumerate()
            .map(|(j, &x)| Complex64::new(1.0 + 0.2 * (0.6 * x).cos() + 1e-3 * if j % 2 == 0 { 1.0 } else { -1.0 }, 0.1))
            .collect();
        let r = PsiEquation::new(&g, &ds, &p, HydroOptions::default()).unwrap().rhs(&psi, 0.0).unwrap();
        assert!(g.fft(&r)[16].norm() < 1e-12);
    }

    #[test]
    fn free_dispersion() {
        let g = Grid::new(20.0, 64).unwrap();
        let k = g.wavenumbers()[2];
        let s = plane_wave(&g, 1.0, k);
        let p = Params::default();
        let ds = derive_system(&parse_potential("0").unwrap()).unwrap();
        let r = psi_rhs(&g, &ds, &s, &p).unwrap();
        let e = Complex64::new(0.0, -k * k / 2.0);
        assert!(max_dev(&r, |j| e * s.psi[j]) < 1e-12);
    }

    #[test]
    fn eip_plane_wave_multiplier() {
        let g = Grid::new(20.0, 64).unwrap();
        let (hbar, m, kappa, rho0): (f64, f64, f64, f64) = (0.9, 1.7, 0.2, 0.5);
        let k = g.wavenumbers()[3];
        let p = Params::new(hbar, m).unwrap().with("kappa", kappa);
        let model = builtin("eip", &p).unwrap();
        let ds = derive_system(&model.u).unwrap();
        let eq = PsiEquation::new(&g, &ds, &p, HydroOptions::default()).unwrap();
        let (w, cw) = eq.nonlinearity(&plane_wave(&g, rho0.sqrt(), k).psi, 0.0).unwrap();
        let expected = kappa * rho0 * (hbar * k).powi(2) / m;
        assert!(w.iter().all(|v| (v - expected).abs() < 1e-12));
        assert!(cw.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn non_conserving_refused() {
        let g = Grid::new(20.0, 64).unwrap();
        let ds = derive_system(&parse_potential("rho*S").unwrap()).unwrap();
        assert!(matches!(
            PsiEquation::new(&g, &ds, &Params::default(), HydroOptions::default()),
            Err(DynamicsError::NonConservingPotential)
        ));
    }

    #[test]
    fn dg_without_diffusion_is_free() {
        let g = Grid::new(20.0, 64).unwrap();
        let p = Params::default().with("D", 0.0);
        let model = builtin("dg", &p).unwrap();
        let s = GridState::new(
            0.0,
            g.x().iter().map(|&x| Complex64::new(1.0 + 0.2 * (x * 0.314).sin(), 0.1)).collect(),
        );
        let eq = PhiEquation::new(&g, &model, &p, HydroOptions::default()).unwrap();
        assert!(eq.nonlinearity(&s.psi, 0.0).unwrap().iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn jackiw_plane_wave_multiplier() {
        let g = Grid::new(20.0, 64).unwrap();
        let (hbar, m, lambda, rho0): (f64, f64, f64, f64) = (1.1, 0.8, 0.3, 0.5);
        let k = g.wavenumbers()[2];
        let p = Params::new(hbar, m).unwrap().with("lambda", lambda);
        let model = builtin("jackiw", &p).unwrap();
        let eq = PhiEquation::new(&g, &model, &p, HydroOptions::default()).unwrap();
        let v = eq.nonlinearity(&plane_wave(&g, rho0.sqrt(), k).psi, 0.0).unwrap();
        let j_phi = hbar * k * rho0 / m;
        assert!(v.iter().all(|x| (x + lambda * hbar * j_phi).abs() < 1e-12));
    }

    #[test]
    fn eip_uniform_density_drops_gradient_bracket() {
        let g = Grid::new(20.0, 64).unwrap();
        let (kappa, rho0): (f64, f64) = (-0.2, 0.5);
        let k = g.wavenumbers()[1];
        let p = Params::default().with("kappa", kappa);
        let model = builtin("eip", &p).unwrap();
        let eq = PhiEquation::new(&g, &model, &p, HydroOptions::default()).unwrap();
        let v = eq.nonlinearity(&plane_wave(&g, rho0.sqrt(), k).psi, 0.0).unwrap();
        let expected = kappa * k * k * rho0 / (1.0 + kappa * rho0);
        assert!(v.iter().all(|x| (x - expected).abs() < 1e-12));
    }

    #[test]
    fn eip_degenerate_density() {
        let g = Grid::new(20.0, 64).unwrap();
        let p = Params::default().with("kappa", -1.0);
        let model = builtin("eip", &p).unwrap();
        let eq = PhiEquation::new(&g, &model, &p, HydroOptions::default()).unwrap();
        let s = plane_wave(&g, 2.0, 0.0);
        assert!(matches!(eq.rhs(&s.psi, 0.0), Err(DynamicsError::EipDegenerate { .. })));
    }

    #[test]
    fn custom_potential_has_no_phi_equation() {
        let g = Grid::new(20.0, 64).unwrap();
        let model = PotentialModel::custom(parse_potential("rho^2").unwrap());
        assert!(matches!(
            PhiEquation::new(&g, &model, &Params::default(), HydroOptions::default()),
            Err(DynamicsError::NoClosedForm)
        ));
    }
}
