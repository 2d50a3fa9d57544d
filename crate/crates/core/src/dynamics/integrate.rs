use num_complex::Complex64;

use super::{DynamicsError, Grid, GridState, Rhs};

pub const DEFAULT_STABILITY_FACTOR: f64 = 0.2;

/// `c·m·Δx²/ħ`, the explicit-scheme limit set by dispersion.
pub fn stability_bound(grid: &Grid, hbar: f64, m: f64, factor: f64) -> f64 {
    factor * m * grid.dx() * grid.dx() / hbar
}

fn axpy(base: &[Complex64], k: &[Complex64], h: f64) -> Vec<Complex64> {
    base.iter().zip(k).map(|(b, k)| b + k * h).collect()
}

/// Classical fourth-order Runge–Kutta step.
pub fn step_rk4(rhs: &dyn Rhs, state: &GridState, dt: f64) -> Result<GridState, DynamicsError> {
    let y = &state.psi;
    let q = state.twist;
    let k1 = rhs.rhs(y, q)?;
    let k2 = rhs.rhs(&axpy(y, &k1, dt / 2.0), q)?;
    let k3 = rhs.rhs(&axpy(y, &k2, dt / 2.0), q)?;
    let k4 = rhs.rhs(&axpy(y, &k3, dt), q)?;
    let psi = (0..y.len())
        .map(|j| y[j] + (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]) * (dt / 6.0))
        .collect();
    Ok(GridState::new(state.t + dt, psi).with_twist(q))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions {
    pub dt: f64,
    pub steps: usize,
    pub snapshot_every: usize,
    /// Largest admissible `dt`; `None` skips the check.
    pub max_dt: Option<f64>,
}

impl EvolveOptions {
    pub fn new(dt: f64, steps: usize, snapshot_every: usize) -> Self {
        EvolveOptions { dt, steps, snapshot_every, max_dt: None }
    }

    pub fn with_max_dt(mut self, bound: f64) -> Self {
        self.max_dt = Some(bound);
        self
    }

    /// Step count reaching `t_final` with time step `dt` (rounded).
    pub fn steps_for(t_final: f64, dt: f64) -> usize {
        (t_final / dt).round() as usize
    }
}

/// Snapshots taken every `snapshot_every` steps, the initial and final states
/// included.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub snapshots: Vec<GridState>,
    /// Time between consecutive snapshots, except possibly the final one.
    pub spacing: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn last(&self) -> Option<&GridState> {
        self.snapshots.last()
    }

    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.t).collect()
    }

    /// Keeps every `stride`-th snapshot.
    pub fn thinned(&self, stride: usize) -> Trajectory {
        Trajectory {
            snapshots: self.snapshots.iter().step_by(stride).cloned().collect(),
            spacing: self.spacing * stride as f64,
        }
    }
}

/// Runs the loop and returns whatever was collected, plus the error that
/// stopped it early, if any. The final state is always kept, even when it
/// falls between snapshot times.
pub fn evolve_partial(
    rhs: &dyn Rhs,
    initial: &GridState,
    opts: &EvolveOptions,
) -> (Trajectory, Option<DynamicsError>) {
    let every = opts.snapshot_every.max(1);
    let mut traj = Trajectory { snapshots: vec![initial.clone()], spacing: opts.dt * every as f64 };
    if !(opts.dt.is_finite() && opts.dt > 0.0) {
        return (traj, Some(DynamicsError::InvalidTimeStep(format!("dt must be > 0, got {}", opts.dt))));
    }
    if let Some(bound) = opts.max_dt {
        if opts.dt > bound {
            return (traj, Some(DynamicsError::StabilityBoundViolated { dt: opts.dt, bound }));
        }
    }
    let mut state = initial.clone();
    for step in 1..=opts.steps {
        let mut next = match step_rk4(rhs, &state, opts.dt) {
            Ok(s) => s,
            Err(e) => return (traj, Some(e)),
        };
        next.t = initial.t + step as f64 * opts.dt;
        if !next.is_finite() {
            let t = next.t;
            return (traj, Some(DynamicsError::NaNDetected { t, last_good: Box::new(state) }));
        }
        state = next;
        if step % every == 0 {
            traj.snapshots.push(state.clone());
        }
    }
    if !opts.steps.is_multiple_of(every) {
        traj.snapshots.push(state);
    }
    (traj, None)
}

pub fn evolve(
    rhs: &dyn Rhs,
    initial: &GridState,
    opts: &EvolveOptions,
) -> Result<Trajectory, DynamicsError> {
    match evolve_partial(rhs, initial, opts) {
        (traj, None) => Ok(traj),
        (_, Some(e)) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Decay(f64);
    impl Rhs for Decay {
        fn rhs(&self, psi: &[Complex64], _twist: f64) -> Result<Vec<Complex64>, DynamicsError> {
            Ok(psi.iter().map(|p| p * self.0).collect())
        }
    }

    #[test]
    fn rk4_scalar_exponential() {
        let s = GridState::new(0.0, vec![Complex64::new(1.0, 0.0)]);
        let traj = evolve(&Decay(-1.0), &s, &EvolveOptions::new(0.01, 100, 10)).unwrap();
        assert_eq!(traj.len(), 11);
        assert!((traj.last().unwrap().psi[0].re - (-1.0f64).exp()).abs() < 1e-9);
        assert!((traj.last().unwrap().t - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_field_stays_zero() {
        let s = GridState::new(0.0, vec![Complex64::new(0.0, 0.0); 4]);
        let traj = evolve(&Decay(3.0), &s, &EvolveOptions::new(0.1, 5, 1)).unwrap();
        assert!(traj.snapshots.iter().all(|st| st.psi.iter().all(|v| v.norm() == 0.0)));
    }

    #[test]
    fn stability_and_nan() {
        let s = GridState::new(0.0, vec![Complex64::new(1.0, 0.0)]);
        let opts = EvolveOptions::new(0.1, 5, 1).with_max_dt(0.05);
        assert!(matches!(evolve(&Decay(1.0), &s, &opts), Err(DynamicsError::StabilityBoundViolated { .. })));
        let (partial, err) = evolve_partial(&Decay(1e300), &s, &EvolveOptions::new(1.0, 5, 1));
        match err {
            Some(DynamicsError::NaNDetected { last_good, .. }) => assert!(last_good.is_finite()),
            other => panic!("unexpected {other:?}"),
        }
        assert!(!partial.is_empty());
    }
}
