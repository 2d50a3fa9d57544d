//! Acceptance tolerances and run parameters.

pub const STRUCTURAL_CASES: usize = 128;
pub const ORACLE_CASES: usize = 24;
pub const ORACLE_REL: f64 = 1e-6;
pub const ORACLE_EPSILONS: [f64; 4] = [1e-3, 1e-4, 1e-5, 1e-6];

pub const FREE_L2: f64 = 1e-8;
pub const NORM_DRIFT: f64 = 1e-10;
pub const GAUGE_DENSITY: f64 = 1e-6;
pub const GAUGE_PHASE: f64 = 1e-5;
pub const LINEAR_CURRENT: f64 = 1e-6;
pub const NEGATIVE_CONTROL_RATIO: f64 = 1e2;
pub const DG_LINEAR_DENSITY: f64 = 1e-6;
pub const RESIDUAL_ORDER: f64 = 1.8;
pub const RK4_ORDER: f64 = 3.8;
pub const SPECTRAL_FD: f64 = 1e-8;

pub const LENGTH: f64 = 40.0;
pub const POINTS: usize = 512;
pub const DT: f64 = 1e-4;
pub const BACKGROUND: f64 = 0.5;
pub const AMPLITUDE: f64 = 0.3;
pub const WIDTH: f64 = 1.0;
pub const MOMENTUM: f64 = 1.0;

pub const DG_D: f64 = 0.05;
pub const JACKIW_LAMBDA: f64 = 0.3;
pub const EIP_KAPPA: f64 = 0.2;
/// `2mD/ħ` for the linearization check.
pub const DG_LINEAR_RATIO: f64 = 0.5;
