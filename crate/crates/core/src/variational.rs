//! Euler–Lagrange machinery applied to a hydrodynamic potential `U[ρ, S]`.
//!
//! From one potential we derive the real and imaginary nonlinearities of the
//! ψ-equation, the quantum current, the gauge velocity `G = j_ψ/ρ − S₁/m`,
//! its antiderivative (the gauge phase `Θ`, with `σ = S + mΘ`) and the local
//! multiplier terms of the transformed φ-equation.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{parse_expr, Base, Expr, ExprError, FieldSymbol};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VariationalError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("potential depends on S itself (∂U/∂S ≠ 0); the number of particles is not conserved")]
    NonConservingPotential,
    #[error("potential must be a Laurent polynomial in the field symbols")]
    NotLaurent,
}

fn hbar() -> Expr {
    Expr::param("hbar")
}

fn mass() -> Expr {
    Expr::param("m")
}

fn inv_rho() -> Expr {
    Expr::field_pow(FieldSymbol::rho(0), -1)
}

fn highest_order(u: &Expr, base: Base) -> u8 {
    let (r, s) = u.max_order();
    match base {
        Base::Rho => r,
        Base::S => s,
    }
}

/// `δ/δa ∫U dx = Σ_n (−1)ⁿ ∂ₓⁿ (∂U/∂a_n)`.
pub fn functional_derivative(u: &Expr, base: Base) -> Result<Expr, VariationalError> {
    if !u.is_laurent() {
        return Err(VariationalError::NotLaurent);
    }
    let mut out = Expr::zero();
    for n in 0..=highest_order(u, base) {
        let d = u.partial(FieldSymbol { base, order: n })?;
        if d.is_zero() {
            continue;
        }
        let term = d.dx_n(n as usize)?;
        out = if n % 2 == 0 { &out + &term } else { &out - &term };
    }
    Ok(out)
}

/// `ρ·G = Σ_n (−1)ⁿ ∂ₓⁿ (∂U/∂S_{n+1})`: the potential-induced part of the
/// current.
fn induced_current(u: &Expr) -> Result<Expr, VariationalError> {
    let top = highest_order(u, Base::S);
    let mut out = Expr::zero();
    for n in 0..top {
        let d = u.partial(FieldSymbol::s(n + 1))?;
        if d.is_zero() {
            continue;
        }
        let term = d.dx_n(n as usize)?;
        out = if n % 2 == 0 { &out + &term } else { &out - &term };
    }
    Ok(out)
}

/// True iff `∂U/∂S₀ ≡ 0`.
pub fn check_conservation(u: &Expr) -> bool {
    u.partial(FieldSymbol::s(0)).map(|d| d.is_zero()).unwrap_or(false)
}

/// Gauge phase `Θ`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseForm {
    /// Closed-form antiderivative, when one was recognized.
    pub closed: Option<Expr>,
    /// `Σ (−1)ⁿ ρ⁻¹ ∂ₓⁿ (∂U/∂S_{n+1})`, always present.
    pub integrand: Expr,
}

impl PhaseForm {
    pub fn identity() -> Self {
        PhaseForm { closed: Some(Expr::zero()), integrand: Expr::zero() }
    }

    /// `Θ` as an expression: the closed form, or `int(integrand)`.
    pub fn as_expr(&self) -> Expr {
        match &self.closed {
            Some(c) => c.clone(),
            None => Expr::integral(self.integrand.clone()),
        }
    }
}

/// Antiderivative of `c·ρ₁·ρᵏ` monomials (parameters allowed in `c`).
/// Returns `None` as soon as any monomial does not match.
fn antiderivative_in_rho(integrand: &Expr) -> Option<Expr> {
    let rho = FieldSymbol::rho(0);
    let rho1 = FieldSymbol::rho(1);
    let mut out = Expr::zero();
    for mono in integrand.monomials() {
        let key = &mono.key;
        if !key.logs.is_empty() || !key.integrals.is_empty() {
            return None;
        }
        if key.fields.get(&rho1) != Some(&1) {
            return None;
        }
        if key.fields.keys().any(|s| *s != rho && *s != rho1) {
            return None;
        }
        let k = key.fields.get(&rho).copied().unwrap_or(0);
        let mut coeff_key = key.clone();
        coeff_key.fields.clear();
        let c = Expr::monomial(mono.coeff.clone(), coeff_key);
        let anti = if k == -1 {
            Expr::log(rho)
        } else {
            &Expr::ratio(1, (k + 1) as i64) * &Expr::field_pow(rho, k + 1)
        };
        out = &out + &(&c * &anti);
    }
    Some(out)
}

/// Generator phase of the nonlinear gauge transformation.
pub fn gauge_phase(u: &Expr) -> Result<PhaseForm, VariationalError> {
    if !check_conservation(u) {
        return Err(VariationalError::NonConservingPotential);
    }
    let integrand = &inv_rho() * &induced_current(u)?;
    let closed = antiderivative_in_rho(&integrand);
    Ok(PhaseForm { closed, integrand })
}

/// The three local multiplier terms of the φ-equation:
/// `[W, −(m/2)G², −S₁G]`. The nonlocal `−m ∂ₜΘ` term is left to numerics.
pub fn transformed_terms(u: &Expr) -> Result<Vec<Expr>, VariationalError> {
    if !check_conservation(u) {
        return Err(VariationalError::NonConservingPotential);
    }
    let w = functional_derivative(u, Base::Rho)?;
    let g = &inv_rho() * &induced_current(u)?;
    Ok(local_terms(&w, &g))
}

fn local_terms(w: &Expr, g: &Expr) -> Vec<Expr> {
    let half_m = &Expr::ratio(1, 2) * &mass();
    vec![w.clone(), -(&half_m * &(g * g)), -(&Expr::s(1) * g)]
}

/// `σ = S + m·Θ` symbolically, available when `Θ` has a closed form.
pub fn sigma_from(theta: &PhaseForm) -> Option<Expr> {
    theta.closed.as_ref().map(|c| &Expr::s(0) + &(&mass() * c))
}

/// Everything derived from one potential.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedSystem {
    pub u: Expr,
    pub w: Expr,
    pub cal_w: Expr,
    pub j_psi: Expr,
    pub g: Expr,
    pub source: Expr,
    /// Absent for non-conserving potentials.
    pub theta: Option<PhaseForm>,
    pub transformed_terms: Option<Vec<Expr>>,
    pub conserves_n: bool,
}

/// Runs the full derivation for `u`.
pub fn derive_system(u: &Expr) -> Result<DerivedSystem, VariationalError> {
    if !u.is_laurent() {
        return Err(VariationalError::NotLaurent);
    }
    let w = functional_derivative(u, Base::Rho)?;
    let ds = functional_derivative(u, Base::S)?;
    let cal_w = &(&(&Expr::ratio(1, 2) * &hbar()) * &inv_rho()) * &ds;
    let induced = induced_current(u)?;
    let drift = &(&Expr::s(1) * &Expr::rho(0)) * &mass().reciprocal()?;
    let j_psi = &drift + &induced;
    let g = &inv_rho() * &induced;
    let source = u.partial(FieldSymbol::s(0))?;
    let conserves_n = source.is_zero();
    let (theta, transformed) = if conserves_n {
        let integrand = g.clone();
        let closed = antiderivative_in_rho(&integrand);
        (Some(PhaseForm { closed, integrand }), Some(local_terms(&w, &g)))
    } else {
        (None, None)
    };
    Ok(DerivedSystem {
        u: u.clone(),
        w,
        cal_w,
        j_psi,
        g,
        source,
        theta,
        transformed_terms: transformed,
        conserves_n,
    })
}

/// Wire form of a [`DerivedSystem`]; every expression is a canonical DSL
/// string.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivedSystemJson {
    #[serde(rename = "U")]
    pub u: String,
    #[serde(rename = "W")]
    pub w: String,
    #[serde(rename = "calW")]
    pub cal_w: String,
    pub j_psi: String,
    #[serde(rename = "G")]
    pub g: String,
    pub source: String,
    pub theta_closed: Option<String>,
    pub theta_integrand: Option<String>,
    pub transformed_terms: Option<Vec<String>>,
    #[serde(rename = "conserves_N")]
    pub conserves_n: bool,
}

impl DerivedSystem {
    pub fn to_json(&self) -> DerivedSystemJson {
        DerivedSystemJson {
            u: self.u.to_string(),
            w: self.w.to_string(),
            cal_w: self.cal_w.to_string(),
            j_psi: self.j_psi.to_string(),
            g: self.g.to_string(),
            source: self.source.to_string(),
            theta_closed: self.theta.as_ref().and_then(|t| t.closed.as_ref()).map(Expr::to_string),
            theta_integrand: self.theta.as_ref().map(|t| t.integrand.to_string()),
            transformed_terms: self
                .transformed_terms
                .as_ref()
                .map(|ts| ts.iter().map(Expr::to_string).collect()),
            conserves_n: self.conserves_n,
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("serializable")
    }
}

impl DerivedSystemJson {
    /// Re-parses every expression string.
    pub fn parse(&self) -> Result<DerivedSystem, ExprError> {
        let theta = match &self.theta_integrand {
            Some(i) => Some(PhaseForm {
                closed: self.theta_closed.as_deref().map(parse_expr).transpose()?,
                integrand: parse_expr(i)?,
            }),
            None => None,
        };
        Ok(DerivedSystem {
            u: parse_expr(&self.u)?,
            w: parse_expr(&self.w)?,
            cal_w: parse_expr(&self.cal_w)?,
            j_psi: parse_expr(&self.j_psi)?,
            g: parse_expr(&self.g)?,
            source: parse_expr(&self.source)?,
            theta,
            transformed_terms: self
                .transformed_terms
                .as_ref()
                .map(|ts| ts.iter().map(|t| parse_expr(t)).collect::<Result<Vec<_>, _>>())
                .transpose()?,
            conserves_n: self.conserves_n,
        })
    }
}
