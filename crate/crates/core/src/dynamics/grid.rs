//! Uniform periodic grid with FFT-based differentiation and antiderivatives.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::DynamicsError;
use crate::expr::{Antiderivative, MAX_ORDER};

pub const MIN_POINTS: usize = 16;

/// `x_j = jL/N`, `j = 0..N`, periodic.
#[derive(Clone)]
pub struct Grid {
    length: f64,
    n: usize,
    x: Vec<f64>,
    k: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid").field("length", &self.length).field("n", &self.n).finish()
    }
}

impl Grid {
    pub fn new(length: f64, n: usize) -> Result<Self, DynamicsError> {
        if !(length.is_finite() && length > 0.0) {
            return Err(DynamicsError::InvalidGrid(format!("length must be finite and > 0, got {length}")));
        }
        if n < MIN_POINTS || !n.is_power_of_two() {
            return Err(DynamicsError::InvalidGrid(format!(
                "N must be a power of two and at least {MIN_POINTS}, got {n}"
            )));
        }
        let dx = length / n as f64;
        let x = (0..n).map(|j| j as f64 * dx).collect();
        let k = (0..n)
            .map(|j| {
                let m = if j < n / 2 { j as f64 } else { j as f64 - n as f64 };
                2.0 * PI * m / length
            })
            .collect();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        Ok(Grid { length, n, x, k, forward, inverse })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn dx(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn wavenumbers(&self) -> &[f64] {
        &self.k
    }

    pub fn fft(&self, f: &[Complex64]) -> Vec<Complex64> {
        let mut buf = f.to_vec();
        self.forward.process(&mut buf);
        buf
    }

    /// Normalized inverse transform.
    pub fn ifft(&self, spectrum: &[Complex64]) -> Vec<Complex64> {
        let mut buf = spectrum.to_vec();
        self.inverse.process(&mut buf);
        let scale = 1.0 / self.n as f64;
        buf.iter_mut().for_each(|v| *v *= scale);
        buf
    }

    /// Multiplier `(i(k+q))^order`; the Nyquist mode is dropped for odd
    /// orders so real data stays real.
    fn multiplier(&self, j: usize, order: usize, twist: f64) -> Complex64 {
        if order % 2 == 1 && j == self.n / 2 {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::new(0.0, self.k[j] + twist).powu(order as u32)
    }

    /// Applies `∂ₓ^order` to a spectrum in place.
    pub fn differentiate_spectrum(&self, spectrum: &mut [Complex64], order: usize) {
        for (j, v) in spectrum.iter_mut().enumerate() {
            *v *= self.multiplier(j, order, 0.0);
        }
    }

    /// Derivative of complex samples from their spectrum.
    pub fn deriv_from_spectrum(&self, spectrum: &[Complex64], order: usize) -> Vec<Complex64> {
        self.twisted_deriv_from_spectrum(spectrum, order, 0.0)
    }

    /// For a field `e^{iqx}u(x)` with periodic `u`, returns `e^{−iqx}∂ₓⁿ(e^{iqx}u)`
    /// from the spectrum of `u`.
    pub fn twisted_deriv_from_spectrum(&self, spectrum: &[Complex64], order: usize, twist: f64) -> Vec<Complex64> {
        let s: Vec<Complex64> =
            spectrum.iter().enumerate().map(|(j, v)| v * self.multiplier(j, order, twist)).collect();
        self.ifft(&s)
    }

    /// Removes the Nyquist component of complex samples.
    pub fn drop_nyquist(&self, f: &mut [Complex64]) {
        let mut spectrum = self.fft(f);
        spectrum[self.n / 2] = Complex64::new(0.0, 0.0);
        f.copy_from_slice(&self.ifft(&spectrum));
    }

    pub fn spectral_deriv_complex(&self, f: &[Complex64], order: usize) -> Vec<Complex64> {
        assert!(order <= MAX_ORDER as usize, "derivative order {order} above MAX_ORDER");
        if order == 0 {
            return f.to_vec();
        }
        self.deriv_from_spectrum(&self.fft(f), order)
    }

    pub fn spectral_deriv(&self, f: &[f64], order: usize) -> Vec<f64> {
        assert!(order <= MAX_ORDER as usize, "derivative order {order} above MAX_ORDER");
        if order == 0 {
            return f.to_vec();
        }
        let c: Vec<Complex64> = f.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.spectral_deriv_complex(&c, order).into_iter().map(|v| v.re).collect()
    }

    /// Mean-zero antiderivative of `f − mean(f)`, together with `mean(f)`.
    pub fn cumint(&self, f: &[f64]) -> (Vec<f64>, f64) {
        let c: Vec<Complex64> = f.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let mut s = self.fft(&c);
        let mean = s[0].re / self.n as f64;
        s[0] = Complex64::new(0.0, 0.0);
        s[self.n / 2] = Complex64::new(0.0, 0.0);
        for j in 1..self.n {
            if j != self.n / 2 {
                s[j] /= Complex64::new(0.0, self.k[j]);
            }
        }
        (self.ifft(&s).into_iter().map(|v| v.re).collect(), mean)
    }

    /// `∫ f dx` over the period (trapezoid rule, spectrally accurate).
    pub fn integrate(&self, f: &[f64]) -> f64 {
        f.iter().sum::<f64>() * self.dx()
    }

    pub fn l2_norm(&self, f: &[Complex64]) -> f64 {
        (f.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.dx()).sqrt()
    }
}

impl Antiderivative for Grid {
    fn antiderivative(&self, f: &[f64]) -> Vec<f64> {
        self.cumint(f).0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(Grid::new(1.0, 100).is_err());
        assert!(Grid::new(1.0, 8).is_err());
        assert!(Grid::new(0.0, 64).is_err());
        assert!(Grid::new(1.0, 64).is_ok());
    }

    #[test]
    fn sine_eigenfunction() {
        let l = 3.0;
        let g = Grid::new(l, 64).unwrap();
        let w = 2.0 * PI / l;
        let f: Vec<f64> = g.x().iter().map(|&x| (w * x).sin()).collect();
        let exact: Vec<f64> = g.x().iter().map(|&x| w * (w * x).cos()).collect();
        assert!(max_abs_diff(&g.spectral_deriv(&f, 1), &exact) <= 1e-12);
    }

    #[test]
    fn constant_has_zero_derivatives() {
        let g = Grid::new(5.0, 32).unwrap();
        let f = vec![2.5; 32];
        for order in 1..=4 {
            assert!(g.spectral_deriv(&f, order).iter().all(|v| v.abs() < 1e-13));
        }
    }

    #[test]
    fn exp_cos_second_derivative_against_finite_differences() {
        // Oracle: fourth-order central differences of the analytic function,
        // Richardson-refined in h.
        let g = Grid::new(2.0 * PI, 128).unwrap();
        let f = |x: f64| x.cos().exp();
        let fd = |x: f64, h: f64| {
            (-f(x + 2.0 * h) + 16.0 * f(x + h) - 30.0 * f(x) + 16.0 * f(x - h) - f(x - 2.0 * h))
                / (12.0 * h * h)
        };
        let samples: Vec<f64> = g.x().iter().map(|&x| f(x)).collect();
        let d2 = g.spectral_deriv(&samples, 2);
        let h = 1e-2;
        let oracle: Vec<f64> =
            g.x().iter().map(|&x| (16.0 * fd(x, h / 2.0) - fd(x, h)) / 15.0).collect();
        assert!(max_abs_diff(&d2, &oracle) <= 1e-8, "{}", max_abs_diff(&d2, &oracle));
    }

    #[test]
    fn cumint_cosine() {
        let l = 7.0;
        let g = Grid::new(l, 64).unwrap();
        let w = 2.0 * PI / l;
        let f: Vec<f64> = g.x().iter().map(|&x| (w * x).cos()).collect();
        let (anti, mean) = g.cumint(&f);
        let exact: Vec<f64> = g.x().iter().map(|&x| (w * x).sin() / w).collect();
        assert!(max_abs_diff(&anti, &exact) <= 1e-12);
        assert!(mean.abs() < 1e-15);
    }

    #[test]
    fn cumint_constant_reports_mean() {
        let g = Grid::new(1.0, 32).unwrap();
        let (anti, mean) = g.cumint(&[3.0; 32]);
        assert!(anti.iter().all(|v| v.abs() < 1e-14));
        assert!((mean - 3.0).abs() < 1e-14);
    }

    #[test]
    fn cumint_log_derivative() {
        let g = Grid::new(2.0 * PI, 128).unwrap();
        let rho: Vec<f64> = g.x().iter().map(|&x| 2.0 + x.cos()).collect();
        let f: Vec<f64> = g.x().iter().map(|&x| -x.sin() / (2.0 + x.cos())).collect();
        let (anti, _) = g.cumint(&f);
        let logs: Vec<f64> = rho.iter().map(|r| r.ln()).collect();
        let mean = logs.iter().sum::<f64>() / logs.len() as f64;
        let oracle: Vec<f64> = logs.iter().map(|v| v - mean).collect();
        assert!(max_abs_diff(&anti, &oracle) <= 1e-10);
    }
}
