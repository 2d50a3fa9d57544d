//! Periodic pseudospectral simulation of the ψ- and φ-equations, the gauge
//! map between them, and residual diagnostics.

mod equations;
mod fields;
mod gauge;
mod grid;
mod initial;
mod integrate;
mod residual;

pub use equations::{phi_rhs, psi_rhs, PhiEquation, PsiEquation, Rhs};
pub use fields::{hydro_fields, orders_of, HydroOptions, REGULARIZATION_EPS};
pub use gauge::{apply_gauge, density_error, gauge_phase_on_grid, phase_error, GaugePhase};
pub use grid::{Grid, MIN_POINTS};
pub use initial::{snap_wavenumber, InitialData};
pub use integrate::{
    evolve, evolve_partial, stability_bound, step_rk4, EvolveOptions, Trajectory, DEFAULT_STABILITY_FACTOR,
};
pub use residual::{continuity_residual, eq19_residual, local_multiplier};

use num_complex::Complex64;
use thiserror::Error;

use crate::expr::ExprError;
use crate::variational::VariationalError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("density below floor: min rho = {min:e} < {floor:e}")]
    VacuumDensity { min: f64, floor: f64 },
    #[error(transparent)]
    Expr(ExprError),
    #[error(transparent)]
    Variational(#[from] VariationalError),
    #[error("potential does not conserve the number of particles; refusing to evolve")]
    NonConservingPotential,
    #[error("model has no closed-form phi nonlinearity; only residual checks are available")]
    NoClosedForm,
    #[error("1 + kappa*rho must stay positive, min = {min:e}")]
    EipDegenerate { min: f64 },
    #[error("dt = {dt:e} exceeds the stability bound {bound:e}")]
    StabilityBoundViolated { dt: f64, bound: f64 },
    #[error("non-finite value at t = {t}")]
    NaNDetected { t: f64, last_good: Box<GridState> },
    #[error("need at least 3 snapshots, have {have}")]
    InsufficientSnapshots { have: usize },
    #[error("|2mD/hbar| = {ratio} must be < 1 for the phase rescaling")]
    RescaleOutOfRange { ratio: f64 },
    #[error("phase has nonzero winding (mean S_1 = {mean:e}); rescaling breaks periodicity")]
    NonzeroWinding { mean: f64 },
    #[error("invalid time step: {0}")]
    InvalidTimeStep(String),
}

impl From<ExprError> for DynamicsError {
    fn from(e: ExprError) -> Self {
        match e {
            ExprError::VacuumDensity { min, floor } => DynamicsError::VacuumDensity { min, floor },
            other => DynamicsError::Expr(other),
        }
    }
}

/// A sampled wave function at time `t`.
///
/// The field is `e^{i·twist·x}·psi(x)` with `psi` periodic. A nonzero twist
/// appears when a gauge phase has a nonzero spatial mean gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct GridState {
    pub t: f64,
    pub psi: Vec<Complex64>,
    pub twist: f64,
}

impl GridState {
    pub fn new(t: f64, psi: Vec<Complex64>) -> Self {
        GridState { t, psi, twist: 0.0 }
    }

    pub fn with_twist(mut self, twist: f64) -> Self {
        self.twist = twist;
        self
    }

    /// Samples of the full field `e^{i·twist·x}·psi`.
    pub fn field(&self, grid: &Grid) -> Vec<Complex64> {
        if self.twist == 0.0 {
            return self.psi.clone();
        }
        self.psi.iter().zip(grid.x()).map(|(p, &x)| p * Complex64::from_polar(1.0, self.twist * x)).collect()
    }

    pub fn density(&self) -> Vec<f64> {
        self.psi.iter().map(|v| v.norm_sqr()).collect()
    }

    /// `∫ρ dx`.
    pub fn norm(&self, grid: &Grid) -> f64 {
        grid.integrate(&self.density())
    }

    pub fn is_finite(&self) -> bool {
        self.psi.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }
}
