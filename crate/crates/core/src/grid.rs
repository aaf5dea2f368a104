//! Space-time discretization of `[x_min, x_max] × [0, 2T + dt]`.

use log::warn;

use crate::error::{Error, Result};

/// Uniform grid on an interval with a CFL-limited time step.
///
/// `n_t` nodes cover `[0, T]`. The extended axis used by the hyperbolic map
/// has `2 n_t` nodes and ends at `2T + dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub x_min: f64,
    pub x_max: f64,
    pub n_x: usize,
    pub dx: f64,
    pub horizon: f64,
    pub n_t: usize,
    pub dt: f64,
    pub x_nodes: Vec<f64>,
    pub t_nodes: Vec<f64>,
    /// Travel time across the interval, `∫ 1/c dx`.
    pub tau_max: f64,
    /// Largest nodal wave speed, used for the CFL bound.
    pub max_speed: f64,
}

/// Number of time steps for a horizon `t` and a candidate step `dt0`.
///
/// Ratios within a few ulps of an integer are not rounded up, so that
/// `4 / 0.004` gives 1000 intervals rather than 1001.
fn interval_count(t: f64, dt0: f64) -> usize {
    let r = t / dt0;
    let nearest = r.round();
    if nearest >= 1.0 && (r - nearest).abs() <= 1e-12 * r {
        nearest as usize
    } else {
        r.ceil() as usize
    }
}

pub fn build_grid(x_min: f64, x_max: f64, n_x: usize, horizon: f64, c: impl Fn(f64) -> f64) -> Result<Grid> {
    if n_x < 3 {
        return Err(Error::DegenerateGrid(format!("need at least 3 spatial nodes, got {n_x}")));
    }
    if !(x_max > x_min) || !x_min.is_finite() || !x_max.is_finite() {
        return Err(Error::DegenerateGrid(format!("empty interval [{x_min}, {x_max}]")));
    }
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(Error::DegenerateGrid(format!("horizon must be positive, got {horizon}")));
    }
    let dx = (x_max - x_min) / (n_x - 1) as f64;
    let x_nodes: Vec<f64> = (0..n_x).map(|j| x_min + j as f64 * dx).collect();
    let speeds: Vec<f64> = x_nodes.iter().map(|&x| c(x)).collect();
    let min_speed = speeds.iter().copied().fold(f64::INFINITY, f64::min);
    if !(min_speed > 0.0) || speeds.iter().any(|s| !s.is_finite()) {
        return Err(Error::NonPositiveSpeed(min_speed));
    }
    let max_speed = speeds.iter().copied().fold(0.0, f64::max);

    let dt0 = 4.0 * dx / (5.0 * max_speed);
    // At least two intervals so that n_t >= 3.
    let intervals = interval_count(horizon, dt0).max(2);
    let n_t = intervals + 1;
    let dt = horizon / intervals as f64;
    let t_nodes: Vec<f64> = (0..n_t).map(|k| k as f64 * dt).collect();

    let inv: Vec<f64> = speeds.iter().map(|s| 1.0 / s).collect();
    let tau_max = dx * (inv.iter().sum::<f64>() - 0.5 * (inv[0] + inv[n_x - 1]));

    Ok(Grid { x_min, x_max, n_x, dx, horizon, n_t, dt, x_nodes, t_nodes, tau_max, max_speed })
}

impl Grid {
    /// `max_x d(x, ∂M)`, half the crossing time in 1D.
    pub fn t_star(&self) -> f64 {
        0.5 * self.tau_max
    }

    pub fn cfl_bound(&self) -> f64 {
        4.0 * self.dx / (5.0 * self.max_speed)
    }

    /// Node count per boundary side on the extended axis.
    pub fn extended_len(&self) -> usize {
        2 * self.n_t
    }

    /// Times `0, dt, …, 2T + dt`.
    pub fn extended_t_nodes(&self) -> Vec<f64> {
        (0..self.extended_len()).map(|k| k as f64 * self.dt).collect()
    }

    /// Gate for reconstruction runs: the crossing time must be below `T`.
    /// Within 1% of `T` only a warning is issued.
    pub fn check_controllable(&self) -> Result<()> {
        if self.tau_max < self.horizon {
            return Ok(());
        }
        if self.tau_max < 1.01 * self.horizon {
            warn!("travel time {} is within 1% of the horizon {}", self.tau_max, self.horizon);
            return Ok(());
        }
        Err(Error::NotControllable { tau_max: self.tau_max, horizon: self.horizon })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn default_experiment_grid() {
        let g = build_grid(-1.0, 1.0, 401, 4.0, |_| 1.0).unwrap();
        assert!((g.dx - 0.005).abs() < 1e-15);
        assert_eq!(g.n_t, 1001);
        assert!((g.dt - 0.004).abs() < 1e-15);
        assert_eq!(g.extended_len(), 2002);
        assert_eq!(g.t_nodes[g.n_t - 1], 4.0);
        assert!((g.tau_max - 2.0).abs() < 1e-12);
        assert_eq!(g.t_star(), g.tau_max / 2.0);
        assert!(g.check_controllable().is_ok());
    }

    #[test]
    fn conformal_speed_grid() {
        let g = build_grid(-1.0, 1.0, 401, 4.0, |x| ((x + 1.0) / 2.0).cos()).unwrap();
        assert_eq!(g.n_t, 1001);
        assert!((g.dt - 0.004).abs() < 1e-15);
        // ∫ sec((x+1)/2) dx over [-1, 1].
        let exact = 2.0 * (1.0 / 1f64.cos() + 1f64.tan()).ln();
        assert!((g.tau_max - exact).abs() < 1e-4, "{}", g.tau_max);
        assert!((g.tau_max - 2.45).abs() < 0.01);
    }

    #[test]
    fn coarse_grid_rounds_up() {
        let g = build_grid(-1.0, 1.0, 3, 1.0, |_| 1.0).unwrap();
        assert_eq!(g.dx, 1.0);
        assert_eq!(g.n_t, 3);
        assert_eq!(g.dt, 0.5);
        assert!(g.dt <= g.cfl_bound());
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(build_grid(-1.0, 1.0, 2, 4.0, |_| 1.0), Err(Error::DegenerateGrid(_))));
        assert!(matches!(build_grid(-1.0, 1.0, 11, 4.0, |x| x), Err(Error::NonPositiveSpeed(_))));
        assert!(matches!(build_grid(1.0, 1.0, 11, 4.0, |_| 1.0), Err(Error::DegenerateGrid(_))));
        assert!(matches!(build_grid(-1.0, 1.0, 11, 0.0, |_| 1.0), Err(Error::DegenerateGrid(_))));
    }

    #[test]
    fn slow_medium_is_not_controllable() {
        let g = build_grid(-1.0, 1.0, 41, 4.0, |_| 0.25).unwrap();
        assert!(matches!(g.check_controllable(), Err(Error::NotControllable { .. })));
        // Crossing time 4.02: warn only.
        let g = build_grid(-1.0, 1.0, 41, 4.0, |_| 2.0 / 4.02).unwrap();
        assert!(g.check_controllable().is_ok());
    }

    proptest! {
        #[test]
        fn rounding_never_violates_cfl(
            n_x in 3usize..600,
            horizon in 0.05f64..20.0,
            speed in 0.1f64..5.0,
        ) {
            let g = build_grid(-1.0, 1.0, n_x, horizon, |_| speed).unwrap();
            prop_assert!(g.dt <= g.cfl_bound() * (1.0 + 1e-12));
            prop_assert!(g.n_t >= 3);
            prop_assert!(((g.n_t - 1) as f64 * g.dt - horizon).abs() <= 1e-12 * horizon);
            let again = build_grid(-1.0, 1.0, n_x, horizon, |_| speed).unwrap();
            prop_assert_eq!(g, again);
        }
    }
}
