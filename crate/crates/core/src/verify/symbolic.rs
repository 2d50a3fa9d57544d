use std::f64::consts::PI;

use super::random::{conserving_potential, rng};
use super::{tolerances as tol, Check};
use crate::dynamics::Grid;
use crate::expr::{Base, CompiledExpr, Expr, FieldSamples, FieldSymbol, Params};
use crate::models::{regression_checks, ModelKind, PotentialModel};
use crate::variational::{derive_system, functional_derivative};

/// Stored model expressions against the derivation, structurally.
pub fn symbolic_regressions() -> Vec<Check> {
    let mut out = Vec::new();
    for kind in [ModelKind::Dg, ModelKind::Jackiw, ModelKind::Eip] {
        match regression_checks(&PotentialModel::new(kind)) {
            Ok(checks) => {
                for c in checks {
                    out.push(Check::mismatches(format!("regression {kind} {}", c.key), usize::from(!c.pass)));
                }
            }
            Err(e) => out.push(Check::failed(format!("regression {kind}"), &e.to_string())),
        }
    }
    out
}

fn identities_hold(u: &Expr) -> (bool, bool) {
    let Ok(ds) = derive_system(u) else { return (false, false) };
    let Ok(fd) = functional_derivative(u, Base::S) else { return (false, false) };
    let drift = &(&Expr::s(1) * &Expr::rho(0)) * &Expr::param_pow("m", -1);
    let rho_g = &ds.j_psi - &drift;
    let first = rho_g.dx().map(|d| -d == fd).unwrap_or(false);
    let scale = &(&Expr::int(2) * &Expr::rho(0)) * &Expr::param_pow("hbar", -1);
    let second = &ds.cal_w * &scale == fd;
    (first, second)
}

/// `δU/δS ≡ −∂ₓ(ρG)` and `𝒲·2ρ/ħ ≡ δU/δS` on random conserving potentials.
pub fn structural_identities(cases: usize, seed: u64) -> Vec<Check> {
    let mut r = rng(seed);
    let (mut bad_current, mut bad_cal_w) = (0, 0);
    for _ in 0..cases {
        let u = conserving_potential(&mut r, 3, 3, 4);
        let (a, b) = identities_hold(&u);
        bad_current += usize::from(!a);
        bad_cal_w += usize::from(!b);
    }
    vec![
        Check::mismatches(format!("identity dS-derivative = -dx(rho*G), {cases} potentials"), bad_current),
        Check::mismatches(format!("identity calW*2rho/hbar = dS-derivative, {cases} potentials"), bad_cal_w),
    ]
}

fn samples(grid: &Grid, rho: &[f64], s: &[f64], orders: (u8, u8)) -> FieldSamples {
    let mut f = FieldSamples::new(grid.len());
    for n in 0..=orders.0 {
        f.insert(FieldSymbol::rho(n), grid.spectral_deriv(rho, n as usize)).expect("length");
    }
    for n in 1..=orders.1.max(1) {
        f.insert(FieldSymbol::s(n), grid.spectral_deriv(s, n as usize)).expect("length");
    }
    f
}

/// Symbolic `W = δU/δρ` against the centered perturbation quotient
/// `(∫U[ρ+εη] − ∫U[ρ−εη])/2ε`, relative to `∫Wη dx`.
pub fn functional_derivative_oracle(cases: usize, seed: u64) -> Vec<Check> {
    let grid = Grid::new(2.0 * PI, 64).expect("valid grid");
    let xs = grid.x();
    let rho: Vec<f64> = xs.iter().map(|&x| 1.5 + 0.3 * x.cos() + 0.2 * (2.0 * x).sin()).collect();
    let s: Vec<f64> = xs.iter().map(|&x| 0.5 * x.sin() + 0.2 * (3.0 * x).cos()).collect();
    let eta: Vec<f64> = xs.iter().map(|&x| x.cos() + 0.5 * (3.0 * x).sin()).collect();
    let params = Params::default();
    let mut r = rng(seed ^ 0x9e37_79b9);
    let mut worst: f64 = 0.0;
    for _ in 0..cases {
        let u = conserving_potential(&mut r, 2, 3, 3);
        let result = (|| -> Option<f64> {
            let w = functional_derivative(&u, Base::Rho).ok()?;
            let cu = CompiledExpr::new(&u, &params).ok()?;
            let cw = CompiledExpr::new(&w, &params).ok()?;
            let (r0, s0) = u.max_order();
            let (r1, s1) = w.max_order();
            let orders = (r0.max(r1), s0.max(s1));
            let base = samples(&grid, &rho, &s, orders);
            let wv = cw.eval(&base, None).ok()?;
            let reference = grid.integrate(&wv.iter().zip(&eta).map(|(a, b)| a * b).collect::<Vec<_>>());
            let scale = grid.integrate(&wv.iter().zip(&eta).map(|(a, b)| (a * b).abs()).collect::<Vec<_>>());
            let denom = if reference.abs() >= 1e-3 * scale { reference.abs() } else { scale };
            if denom == 0.0 {
                return Some(0.0);
            }
            let integral = |sign: f64, eps: f64| -> Option<f64> {
                let shifted: Vec<f64> = rho.iter().zip(&eta).map(|(a, b)| a + sign * eps * b).collect();
                Some(grid.integrate(&cu.eval(&samples(&grid, &shifted, &s, orders), None).ok()?))
            };
            let mut best = f64::INFINITY;
            for eps in tol::ORACLE_EPSILONS {
                let q = (integral(1.0, eps)? - integral(-1.0, eps)?) / (2.0 * eps);
                best = best.min((q - reference).abs() / denom);
            }
            Some(best)
        })();
        worst = worst.max(result.unwrap_or(f64::INFINITY));
    }
    vec![Check::at_most(
        format!("functional derivative vs perturbation quotient, {cases} potentials"),
        worst,
        tol::ORACLE_REL,
    )]
}
