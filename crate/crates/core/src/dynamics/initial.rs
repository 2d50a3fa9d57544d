use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Grid, GridState};

/// Initial data families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialData {
    /// `ψ₀ = √background + amplitude·exp(−(x−c)²/(2w²) + ik(x−c))`.
    GaussianOnBackground { background: f64, amplitude: f64, width: f64, momentum: f64, center: f64 },
    /// `ψ₀ = √background·e^{ikx}` with `k` snapped to the nearest grid wavenumber.
    PlaneWave { background: f64, momentum: f64 },
}

impl InitialData {
    pub fn sample(&self, grid: &Grid) -> GridState {
        let psi = match *self {
            InitialData::GaussianOnBackground { background, amplitude, width, momentum, center } => grid
                .x()
                .iter()
                .map(|&x| {
                    let y = x - center;
                    let envelope = amplitude * (-y * y / (2.0 * width * width)).exp();
                    Complex64::new(background.sqrt(), 0.0) + Complex64::from_polar(envelope, momentum * y)
                })
                .collect(),
            InitialData::PlaneWave { background, momentum } => {
                let k = snap_wavenumber(grid, momentum);
                grid.x().iter().map(|&x| Complex64::from_polar(background.sqrt(), k * x)).collect()
            }
        };
        GridState::new(0.0, psi)
    }

    pub fn background(&self) -> f64 {
        match *self {
            InitialData::GaussianOnBackground { background, .. } | InitialData::PlaneWave { background, .. } => {
                background
            }
        }
    }
}

/// Nearest wavenumber `2πn/L` representable on the grid.
pub fn snap_wavenumber(grid: &Grid, k: f64) -> f64 {
    let unit = 2.0 * PI / grid.length();
    let n = (k / unit).round().clamp(-(grid.len() as f64) / 2.0 + 1.0, grid.len() as f64 / 2.0 - 1.0);
    n * unit
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plane_wave_momentum_is_snapped() {
        let g = Grid::new(10.0, 32).unwrap();
        let k = snap_wavenumber(&g, 1.0);
        assert!((k - 2.0 * PI * 2.0 / 10.0).abs() < 1e-15);
        let s = InitialData::PlaneWave { background: 0.25, momentum: 1.0 }.sample(&g);
        assert!(s.psi.iter().all(|v| (v.norm() - 0.5).abs() < 1e-15));
    }

    #[test]
    fn background_far_from_packet() {
        let g = Grid::new(40.0, 256).unwrap();
        let d = InitialData::GaussianOnBackground {
            background: 0.5,
            amplitude: 0.3,
            width: 1.0,
            momentum: 1.0,
            center: 20.0,
        };
        let s = d.sample(&g);
        assert!((s.psi[0].norm_sqr() - 0.5).abs() < 1e-15);
        assert!(s.density().iter().all(|&r| r > 0.15));
    }
}
