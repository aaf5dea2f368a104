//! Leapfrog solver for `u_tt - c² u_xx + q u = 0` with Neumann boundary
//! sources, and the hyperbolic Neumann-to-Dirichlet map built from it.
//!
//! Boundary data use the outward normal: `-u_x(-1) = f_left`, `u_x(1) = f_right`,
//! imposed through ghost nodes. Initial data are zero, so the first two time
//! levels vanish and the source sample at time index 0 is never used.

use std::fs;
use std::path::{Path, PathBuf};

use log::{debug, info, warn};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::matrix::{read_binary, write_binary, RealMatrix};
use crate::operators::{BoundarySignal, SignalAxis};

/// Coefficients sampled at the spatial nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct Coefficients {
    pub speed: Vec<f64>,
    pub potential: Vec<f64>,
}

impl Coefficients {
    pub fn sample(grid: &Grid, c: impl Fn(f64) -> f64, q: impl Fn(f64) -> f64) -> Result<Self> {
        Self::from_samples(grid, grid.x_nodes.iter().map(|&x| c(x)).collect(), grid.x_nodes.iter().map(|&x| q(x)).collect())
    }

    pub fn from_samples(grid: &Grid, speed: Vec<f64>, potential: Vec<f64>) -> Result<Self> {
        if speed.len() != grid.n_x || potential.len() != grid.n_x {
            return Err(Error::ShapeMismatch(format!(
                "coefficients need {} samples, got {} and {}",
                grid.n_x,
                speed.len(),
                potential.len()
            )));
        }
        let min = speed.iter().copied().fold(f64::INFINITY, f64::min);
        if !(min > 0.0) || speed.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonPositiveSpeed(min));
        }
        if potential.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("potential has non-finite samples".into()));
        }
        Ok(Self { speed, potential })
    }
}

/// Interior solution, one row per time level.
#[derive(Clone, Debug)]
pub struct WaveField {
    pub u: RealMatrix,
    pub dt: f64,
    n_t: usize,
}

impl WaveField {
    pub fn n_steps(&self) -> usize {
        self.u.rows()
    }

    pub fn at_step(&self, k: usize) -> &[f64] {
        self.u.row(k)
    }

    /// `u(T, ·)`, if the solve reached `T`.
    pub fn snapshot_at_horizon(&self) -> Option<&[f64]> {
        (self.n_t <= self.n_steps()).then(|| self.u.row(self.n_t - 1))
    }
}

/// Runs the leapfrog scheme for `n_steps` time levels and hands each level to `visit`.
fn march(grid: &Grid, coeff: &Coefficients, f: &BoundarySignal<f64>, n_steps: usize, mut visit: impl FnMut(usize, &[f64])) -> Result<()> {
    if f.axis() != SignalAxis::Extended || f.block_len() != grid.extended_len() {
        return Err(Error::ShapeMismatch("wave source must live on the extended time axis".into()));
    }
    if coeff.speed.len() != grid.n_x || coeff.potential.len() != grid.n_x {
        return Err(Error::ShapeMismatch("coefficients do not match the grid".into()));
    }
    if n_steps == 0 || n_steps > grid.extended_len() {
        return Err(Error::InvalidInput(format!("n_steps must be in 1..={}, got {n_steps}", grid.extended_len())));
    }
    let cmax = coeff.speed.iter().copied().fold(0.0, f64::max);
    let bound = 4.0 * grid.dx / (5.0 * cmax);
    if grid.dt > bound * (1.0 + 1e-12) {
        return Err(Error::CflViolation { dt: grid.dt, bound });
    }

    let nx = grid.n_x;
    let last = nx - 1;
    let r2 = (grid.dt / grid.dx).powi(2);
    let dt2 = grid.dt * grid.dt;
    let c2r2: Vec<f64> = coeff.speed.iter().map(|c| c * c * r2).collect();
    let (left, right) = (f.left(), f.right());

    let mut prev = vec![0.0; nx];
    let mut cur = vec![0.0; nx];
    let mut next = vec![0.0; nx];
    visit(0, &prev);
    if n_steps > 1 {
        visit(1, &cur);
    }
    for n in 1..n_steps.saturating_sub(1) {
        let q = &coeff.potential;
        for j in 1..last {
            let lap = cur[j + 1] - 2.0 * cur[j] + cur[j - 1];
            next[j] = 2.0 * cur[j] - prev[j] + c2r2[j] * lap - dt2 * q[j] * cur[j];
        }
        // Ghost nodes u_{-1} = u_1 + 2dx f_left and u_{N} = u_{N-2} + 2dx f_right.
        let lap0 = 2.0 * (cur[1] - cur[0]) + 2.0 * grid.dx * left[n];
        next[0] = 2.0 * cur[0] - prev[0] + c2r2[0] * lap0 - dt2 * q[0] * cur[0];
        let lapn = 2.0 * (cur[last - 1] - cur[last]) + 2.0 * grid.dx * right[n];
        next[last] = 2.0 * cur[last] - prev[last] + c2r2[last] * lapn - dt2 * q[last] * cur[last];
        visit(n + 1, &next);
        std::mem::swap(&mut prev, &mut cur);
        std::mem::swap(&mut cur, &mut next);
    }
    Ok(())
}

pub fn wave_solve(grid: &Grid, coeff: &Coefficients, f: &BoundarySignal<f64>, n_steps: usize) -> Result<WaveField> {
    let mut u = RealMatrix::zeros(n_steps, grid.n_x);
    march(grid, coeff, f, n_steps, |k, level| u.row_mut(k).copy_from_slice(level))?;
    Ok(WaveField { u, dt: grid.dt, n_t: grid.n_t })
}

/// Boundary values `(u(t_k, -1), u(t_k, 1))` for `k < n_steps`, without storing the interior.
pub fn boundary_traces(grid: &Grid, coeff: &Coefficients, f: &BoundarySignal<f64>, n_steps: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut left = vec![0.0; n_steps];
    let mut right = vec![0.0; n_steps];
    march(grid, coeff, f, n_steps, |k, level| {
        left[k] = level[0];
        right[k] = level[level.len() - 1];
    })?;
    Ok((left, right))
}

/// The discretized hyperbolic map on the extended axis and its restriction to `[0, T]`.
#[derive(Clone, Debug)]
pub struct HyperbolicNdMap {
    pub lambda: RealMatrix,
    pub lambda_t: RealMatrix,
}

impl HyperbolicNdMap {
    pub fn from_lambda(lambda: RealMatrix, n_t: usize) -> Result<Self> {
        if lambda.shape() != (4 * n_t, 4 * n_t) {
            return Err(Error::ShapeMismatch(format!(
                "hyperbolic map must be {0}x{0}, got {1}x{2}",
                4 * n_t,
                lambda.rows(),
                lambda.cols()
            )));
        }
        let keep: Vec<usize> = (0..n_t).chain(2 * n_t..3 * n_t).collect();
        let lambda_t = lambda.select_rows(&keep).select_columns(&keep);
        Ok(Self { lambda, lambda_t })
    }

    pub fn n_t(&self) -> usize {
        self.lambda.rows() / 4
    }
}

/// Two impulse solves, one per side, and time shifts fill every column.
pub fn assemble_hyperbolic_nd_map(grid: &Grid, coeff: &Coefficients) -> Result<HyperbolicNdMap> {
    let m = grid.extended_len();
    let mut responses = Vec::with_capacity(2);
    for side in 0..2 {
        let impulse = BoundarySignal::from_fn(SignalAxis::Extended, grid.n_t, |s, k| {
            if s == side && k == 1 {
                1.0
            } else {
                0.0
            }
        });
        responses.push(boundary_traces(grid, coeff, &impulse, m)?);
    }
    let mut lambda = RealMatrix::zeros(2 * m, 2 * m);
    for (b, (to_left, to_right)) in responses.iter().enumerate() {
        for (a, r) in [to_left, to_right].into_iter().enumerate() {
            // Column j >= 1 is the response to an impulse at t_j, i.e. r shifted by j - 1.
            // An impulse at t_0 is never read by the scheme, so column 0 stays zero.
            for j in 1..m {
                for i in j - 1..m {
                    lambda[(a * m + i, b * m + j)] = r[i + 1 - j];
                }
            }
        }
    }
    HyperbolicNdMap::from_lambda(lambda, grid.n_t)
}

fn cache_key(grid: &Grid, coeff: &Coefficients) -> String {
    let mut h = Sha256::new();
    for v in [grid.x_min, grid.x_max, grid.dx, grid.horizon, grid.dt] {
        h.update(v.to_le_bytes());
    }
    h.update((grid.n_x as u64).to_le_bytes());
    h.update((grid.n_t as u64).to_le_bytes());
    for v in coeff.speed.iter().chain(&coeff.potential) {
        h.update(v.to_le_bytes());
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Paths of the cached matrix and its metadata sidecar.
pub fn cache_paths(dir: &Path, grid: &Grid, coeff: &Coefficients) -> (PathBuf, PathBuf) {
    let key = cache_key(grid, coeff);
    (dir.join(format!("lambda_{key}.bin")), dir.join(format!("lambda_{key}.meta")))
}

/// [`assemble_hyperbolic_nd_map`] with an on-disk cache keyed by grid and coefficients.
pub fn assemble_hyperbolic_nd_map_cached(grid: &Grid, coeff: &Coefficients, dir: &Path) -> Result<HyperbolicNdMap> {
    let key = cache_key(grid, coeff);
    let (bin, meta) = cache_paths(dir, grid, coeff);
    if bin.exists() && meta.exists() {
        let recorded = fs::read_to_string(&meta)?;
        if recorded.lines().any(|l| l == format!("key={key}")) {
            match read_binary::<f64>(&bin).and_then(|l| HyperbolicNdMap::from_lambda(l, grid.n_t)) {
                Ok(map) => {
                    info!("loaded hyperbolic map from {}", bin.display());
                    return Ok(map);
                }
                Err(e) => warn!("ignoring unreadable cache {}: {e}", bin.display()),
            }
        }
    }
    let map = assemble_hyperbolic_nd_map(grid, coeff)?;
    fs::create_dir_all(dir)?;
    write_binary(&map.lambda, &bin)?;
    fs::write(
        &meta,
        format!(
            "key={key}\nx_min={}\nx_max={}\nn_x={}\nhorizon={}\nn_t={}\ndt={}\n",
            grid.x_min, grid.x_max, grid.n_x, grid.horizon, grid.n_t, grid.dt
        ),
    )?;
    debug!("cached hyperbolic map at {}", bin.display());
    Ok(map)
}
