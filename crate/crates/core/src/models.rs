//! Built-in potentials with their regression expressions and closed-form
//! transformed nonlinearities.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use thiserror::Error;

use crate::dynamics::{hydro_fields, DynamicsError, Grid, GridState, HydroOptions};
use crate::expr::{parse_expr, parse_potential, Expr, ExprError, FieldSymbol, Params};
use crate::variational::{derive_system, DerivedSystem, VariationalError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("unknown model `{0}` (expected free, dg, jackiw or eip)")]
    UnknownModel(String),
    #[error("missing parameter `{0}`")]
    MissingParameter(String),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Variational(#[from] VariationalError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    Free,
    Dg,
    Jackiw,
    Eip,
    Custom,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Free => "free",
            ModelKind::Dg => "dg",
            ModelKind::Jackiw => "jackiw",
            ModelKind::Eip => "eip",
            ModelKind::Custom => "custom",
        }
    }

    pub const BUILTIN: [ModelKind; 4] = [ModelKind::Free, ModelKind::Dg, ModelKind::Jackiw, ModelKind::Eip];
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "free" => Ok(ModelKind::Free),
            "dg" => Ok(ModelKind::Dg),
            "jackiw" => Ok(ModelKind::Jackiw),
            "eip" => Ok(ModelKind::Eip),
            other => Err(ModelError::UnknownModel(other.to_string())),
        }
    }
}

/// One additive piece `numerator/denominator` of a real φ-nonlinearity.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiTerm {
    pub numerator: Expr,
    pub denominator: Expr,
}

impl PhiTerm {
    fn local(numerator: Expr) -> Self {
        PhiTerm { numerator, denominator: Expr::one() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PotentialModel {
    pub kind: ModelKind,
    pub u: Expr,
    /// Parameter names besides `hbar` and `m`.
    pub params: Vec<String>,
    /// Regression keys `W`, `calW`, `j_psi`, `gauge` (and `gauge_closed`).
    pub expected: BTreeMap<String, Expr>,
    /// Real nonlinearity of the φ-equation in `ρ` and `σ` derivatives
    /// (`S_n` stands for `σ_n` there).
    pub phi_rhs: Option<Vec<PhiTerm>>,
    /// Expressions that must stay pointwise positive during evolution.
    pub positivity: Vec<Expr>,
}

const DG_U: &str = "D/2*(rho_1*S_1 - rho*S_2)";
const DG_W: &str = "-D*S_2";
const DG_CAL_W: &str = "-hbar*D*rho_2/(2*rho)";
// Printed alternates: W = -m*D*dx(j_psi/rho) and calW = hbar*D*rho_2/(2*rho).
// The first matches only with the drift part of j_psi, the second has the
// opposite sign of the Euler-Lagrange result.
// const DG_W_PRINTED: &str = "-D*S_2 - m*D^2*(rho_2/rho - rho_1^2/rho^2)";
// const DG_CAL_W_PRINTED: &str = "hbar*D*rho_2/(2*rho)";
const DG_J: &str = "S_1/m*rho + D*rho_1";
const DG_GAUGE: &str = "D*rho_1/rho";
const DG_GAUGE_CLOSED: &str = "D*log(rho)";
const DG_PHI: &str = "m*D^2*(rho_2/rho - rho_1^2/(2*rho^2))";

const JACKIW_U: &str = "hbar^2*lambda^2/(8*m)*rho^3 - hbar*lambda/(2*m)*rho^2*S_1";
const JACKIW_W: &str = "3*hbar^2*lambda^2/(8*m)*rho^2 - hbar*lambda/m*rho*S_1";
const JACKIW_CAL_W: &str = "hbar^2*lambda/(2*m)*rho_1";
const JACKIW_J: &str = "S_1/m*rho - hbar*lambda/(2*m)*rho^2";
const JACKIW_GAUGE: &str = "-hbar*lambda/(2*m)*rho";
const JACKIW_PHI: &str = "-lambda*hbar*S_1*rho/m";

const EIP_U: &str = "kappa*(S_1*rho)^2/(2*m)";
const EIP_W: &str = "kappa*rho*S_1^2/m";
const EIP_CAL_W: &str = "-kappa*hbar/(2*m*rho)*(S_2*rho^2 + 2*rho*rho_1*S_1)";
const EIP_J: &str = "S_1/m*rho*(1 + kappa*rho)";
const EIP_GAUGE: &str = "kappa/m*rho*S_1";
const EIP_PHI_CURRENT: &str = "kappa*rho*S_1^2/m";
const EIP_PHI_DEN: &str = "1 + kappa*rho";
const EIP_PHI_GRADIENT: &str = "-kappa*hbar^2/(4*m)*(rho_2 - rho_1^2/rho)";

fn parsed(s: &str) -> Expr {
    parse_expr(s).unwrap_or_else(|e| panic!("built-in expression `{s}` does not parse: {e}"))
}

fn expected(entries: &[(&str, &str)]) -> BTreeMap<String, Expr> {
    entries.iter().map(|(k, v)| (k.to_string(), parsed(v))).collect()
}

fn user_params(u: &Expr) -> Vec<String> {
    u.parameters().into_iter().filter(|p| p != "hbar" && p != "m").collect()
}

impl PotentialModel {
    pub fn new(kind: ModelKind) -> Self {
        match kind {
            ModelKind::Free => PotentialModel {
                kind,
                u: Expr::zero(),
                params: Vec::new(),
                expected: expected(&[("W", "0"), ("calW", "0"), ("j_psi", "S_1*rho/m"), ("gauge", "0")]),
                phi_rhs: Some(Vec::new()),
                positivity: Vec::new(),
            },
            ModelKind::Dg => PotentialModel {
                kind,
                u: parsed(DG_U),
                params: vec!["D".into()],
                expected: expected(&[
                    ("W", DG_W),
                    ("calW", DG_CAL_W),
                    ("j_psi", DG_J),
                    ("gauge", DG_GAUGE),
                    ("gauge_closed", DG_GAUGE_CLOSED),
                ]),
                phi_rhs: Some(vec![PhiTerm::local(parsed(DG_PHI))]),
                positivity: Vec::new(),
            },
            ModelKind::Jackiw => PotentialModel {
                kind,
                u: parsed(JACKIW_U),
                params: vec!["lambda".into()],
                expected: expected(&[
                    ("W", JACKIW_W),
                    ("calW", JACKIW_CAL_W),
                    ("j_psi", JACKIW_J),
                    ("gauge", JACKIW_GAUGE),
                ]),
                phi_rhs: Some(vec![PhiTerm::local(parsed(JACKIW_PHI))]),
                positivity: Vec::new(),
            },
            ModelKind::Eip => PotentialModel {
                kind,
                u: parsed(EIP_U),
                params: vec!["kappa".into()],
                expected: expected(&[
                    ("W", EIP_W),
                    ("calW", EIP_CAL_W),
                    ("j_psi", EIP_J),
                    ("gauge", EIP_GAUGE),
                ]),
                phi_rhs: Some(vec![
                    PhiTerm { numerator: parsed(EIP_PHI_CURRENT), denominator: parsed(EIP_PHI_DEN) },
                    PhiTerm::local(parsed(EIP_PHI_GRADIENT)),
                ]),
                positivity: vec![parsed(EIP_PHI_DEN)],
            },
            ModelKind::Custom => PotentialModel::custom(Expr::zero()),
        }
    }

    /// A user potential: no regression entries and no closed φ-equation.
    pub fn custom(u: Expr) -> Self {
        PotentialModel {
            kind: ModelKind::Custom,
            params: user_params(&u),
            u,
            expected: BTreeMap::new(),
            phi_rhs: None,
            positivity: Vec::new(),
        }
    }

    pub fn from_dsl(text: &str) -> Result<Self, ModelError> {
        Ok(PotentialModel::custom(parse_potential(text)?))
    }

    pub fn missing_parameter(&self, params: &Params) -> Option<&str> {
        self.params.iter().find(|p| params.get(p).is_none()).map(String::as_str)
    }

    /// The φ-nonlinearity summed into a single expression when every piece
    /// has a unit denominator.
    pub fn phi_polynomial(&self) -> Option<Expr> {
        let terms = self.phi_rhs.as_ref()?;
        terms
            .iter()
            .map(|t| (t.denominator == Expr::one()).then(|| t.numerator.clone()))
            .sum::<Option<Expr>>()
    }
}

/// Looks up a built-in model by name and checks its parameters are bound.
pub fn builtin(name: &str, params: &Params) -> Result<PotentialModel, ModelError> {
    let model = PotentialModel::new(name.parse()?);
    if let Some(p) = model.missing_parameter(params) {
        return Err(ModelError::MissingParameter(p.to_string()));
    }
    Ok(model)
}

/// Outcome of comparing one derived entry against its stored form.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionCheck {
    pub key: String,
    pub expected: Expr,
    pub derived: Option<Expr>,
    pub pass: bool,
}

fn derived_entry(ds: &DerivedSystem, key: &str) -> Option<Expr> {
    match key {
        "W" => Some(ds.w.clone()),
        "calW" => Some(ds.cal_w.clone()),
        "j_psi" => Some(ds.j_psi.clone()),
        "gauge" => ds.theta.as_ref().map(|t| t.integrand.clone()),
        "gauge_closed" => ds.theta.as_ref().and_then(|t| t.closed.clone()),
        _ => None,
    }
}

/// Structural comparison of every `expected` entry against the derivation.
pub fn regression_checks(model: &PotentialModel) -> Result<Vec<RegressionCheck>, ModelError> {
    let ds = derive_system(&model.u)?;
    Ok(model
        .expected
        .iter()
        .map(|(key, exp)| {
            let derived = derived_entry(&ds, key);
            let pass = derived.as_ref().is_some_and(|d| d.equivalent(exp));
            RegressionCheck { key: key.clone(), expected: exp.clone(), derived, pass }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RescaleDirection {
    /// Towards the linear Schrödinger solution.
    ToLinear,
    /// Back to the Doebner–Goldin φ-field.
    FromLinear,
}

/// `α = √(1 − (2mD/ħ)²)`.
pub fn dg_alpha(d: f64, params: &Params) -> Result<f64, DynamicsError> {
    let ratio = 2.0 * params.m() * d / params.hbar();
    if !(ratio.abs() < 1.0) {
        return Err(DynamicsError::RescaleOutOfRange { ratio: ratio.abs() });
    }
    Ok((1.0 - ratio * ratio).sqrt())
}

/// Rescales the phase of a φ-field, keeping its modulus.
///
/// `ToLinear` maps `σ → σ/α`; after it the field solves the free equation
/// with mass `m/α`. `FromLinear` maps `σ → ασ`. The phase is rebuilt from
/// `σ₁ = ħ Im(φ*φₓ)/ρ` relative to grid point 0, so it needs zero winding.
pub fn dg_rescale_phase(
    grid: &Grid,
    state: &GridState,
    d: f64,
    params: &Params,
    direction: RescaleDirection,
    opts: &HydroOptions,
) -> Result<GridState, DynamicsError> {
    let alpha = dg_alpha(d, params)?;
    if alpha == 1.0 {
        return Ok(state.clone());
    }
    let factor = match direction {
        RescaleDirection::ToLinear => 1.0 / alpha,
        RescaleDirection::FromLinear => alpha,
    };
    let hbar = params.hbar();
    let f = hydro_fields(grid, state, hbar, (0, 1), opts)?;
    let s1 = f.get(FieldSymbol::s(1)).expect("S_1 requested");
    let (anti, mean) = grid.cumint(s1);
    let scale = s1.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1.0);
    if mean.abs() > 1e-9 * scale {
        return Err(DynamicsError::NonzeroWinding { mean });
    }
    let origin = state.psi[0].arg() * hbar;
    let psi = state
        .psi
        .iter()
        .zip(&anti)
        .map(|(p, a)| {
            let sigma = origin + (a - anti[0]);
            p.norm() * Complex64::from_polar(1.0, factor * sigma / hbar)
        })
        .collect();
    Ok(GridState::new(state.t, psi))
}
