//! Pipelines and independent oracles shared by the integration tests.
#![allow(dead_code)]

use bcm_core::harness::{add_noise, CoefficientSpec};
use bcm_core::reconstruction::{k_perturbation_bound, stability_probe, weighted_adjoint_defect, weighted_asymmetry};
use bcm_core::{
    assemble_hyperbolic_nd_map, assemble_k, build_grid, build_operators, wave_solve, BoundarySignal, Coefficients,
    ConnectingOperator, Grid, HyperbolicNdMap, OperatorSet, SignalAxis, SystemForm,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Pipeline {
    pub grid: Grid,
    pub coeff: Coefficients,
    pub ops: OperatorSet,
    pub nd: HyperbolicNdMap,
    pub k: ConnectingOperator,
}

pub fn pipeline(spec: &CoefficientSpec, n_x: usize) -> Pipeline {
    let grid = build_grid(-1.0, 1.0, n_x, 4.0, |x| spec.speed(x)).unwrap();
    let coeff = Coefficients::sample(&grid, |x| spec.speed(x), |x| spec.potential(x)).unwrap();
    let ops = build_operators(&grid);
    let nd = assemble_hyperbolic_nd_map(&grid, &coeff).unwrap();
    let k = assemble_k(&nd, &ops).unwrap();
    Pipeline { grid, coeff, ops, nd, k }
}

/// `exp(-1/(1-r²))` on `(a, b)`, zero outside.
pub fn bump(t: f64, a: f64, b: f64) -> f64 {
    let r = (2.0 * t - a - b) / (b - a);
    if r.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - r * r)).exp()
    }
}

/// A random smooth pulse on each side, supported inside `(0, T)`.
pub fn random_pulse(p: &Pipeline, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = p.grid.n_t;
    let t_end = p.grid.horizon;
    let mut sides = Vec::new();
    for _ in 0..2 {
        let a = rng.random_range(0.05..0.6 * t_end);
        let b = rng.random_range(a + 0.3..0.98 * t_end);
        let amp = rng.random_range(-1.0..1.0);
        sides.push((a, b, amp));
    }
    (0..2 * n)
        .map(|k| {
            let (a, b, amp) = sides[k / n];
            amp * bump(p.grid.t_nodes[k % n], a, b)
        })
        .collect()
}

/// `u^f(T)` from an interior wave solve.
pub fn snapshot(p: &Pipeline, f: &[f64]) -> Vec<f64> {
    let sig = BoundarySignal::new(f.to_vec(), SignalAxis::Horizon, p.grid.n_t).unwrap().zero_extend();
    wave_solve(&p.grid, &p.coeff, &sig, p.grid.n_t).unwrap().snapshot_at_horizon().unwrap().to_vec()
}

/// Relative gap between `fᵀ W K h` and `∫ u^f(T) u^h(T) c⁻² dx`.
pub fn blagoveshchenskii_gap(p: &Pipeline, f: &[f64], h: &[f64]) -> f64 {
    let w = p.ops.quadrature_weights();
    let kh = p.k.k.matvec(h).unwrap();
    let boundary: f64 = f.iter().zip(&kh).zip(&w).map(|((a, b), c)| a * b * c).sum();
    let (uf, uh) = (snapshot(p, f), snapshot(p, h));
    let last = p.grid.n_x - 1;
    let interior: f64 = (0..=last)
        .map(|j| {
            let wj = if j == 0 || j == last { 0.5 } else { 1.0 };
            wj * p.grid.dx * uf[j] * uh[j] / p.coeff.speed[j].powi(2)
        })
        .sum();
    (boundary - interior).abs() / interior.abs()
}

/// `‖Λ_T ∂⁻² f - ∂⁻² Λ_T f‖₂` against `10 (dt + dx²) ‖f‖₂` for a random `f`.
pub fn commutativity(p: &Pipeline, seed: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f: Vec<f64> = (0..2 * p.grid.n_t).map(|_| rng.random_range(-1.0..1.0)).collect();
    let a = p.nd.lambda_t.matvec(&p.ops.int2.matvec(&f).unwrap()).unwrap();
    let b = p.ops.int2.matvec(&p.nd.lambda_t.matvec(&f).unwrap()).unwrap();
    let res = a.iter().zip(&b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let norm = f.iter().map(|x| x * x).sum::<f64>().sqrt();
    (res, 10.0 * (p.grid.dt + p.grid.dx * p.grid.dx) * norm)
}

/// Largest `|Λ_ij| / max_i |Λ_ij|` over the cross-boundary blocks at times
/// more than `margin` before the signal can cross the interval.
pub fn finite_band_ratio(p: &Pipeline, margin: f64) -> f64 {
    let m = p.grid.extended_len();
    let lam = &p.nd.lambda;
    let arrival = p.grid.tau_max - margin;
    let mut worst: f64 = 0.0;
    for (row0, col0) in [(m, 0), (0, m)] {
        for j in 1..m {
            let col: Vec<f64> = (0..m).map(|i| lam[(row0 + i, col0 + j)].abs()).collect();
            // The arrival must lie inside the matrix for the column maximum to mean anything.
            let last_quiet = j as f64 + arrival / p.grid.dt;
            if last_quiet + (margin + 0.5) / p.grid.dt >= m as f64 {
                continue;
            }
            let max = col.iter().copied().fold(0.0, f64::max);
            if max == 0.0 {
                continue;
            }
            for (i, v) in col.iter().enumerate() {
                if (i as f64) < last_quiet {
                    worst = worst.max(v / max);
                }
            }
        }
    }
    worst
}

/// Weighted departures of `K` from self-adjointness and of `R Λ_T R` from the adjoint of `Λ_T`.
pub fn symmetry_defects(p: &Pipeline) -> (f64, f64) {
    let w = p.ops.quadrature_weights();
    let k = weighted_asymmetry(&p.k.k, &w);
    let lt = weighted_adjoint_defect(&p.nd.lambda_t, &p.ops.reflect(&p.nd.lambda_t), &w);
    (k, lt)
}

/// `(lhs, rhs)` of the K-perturbation bound for `count` random 1% perturbations of `Λ`.
pub fn k_bounds(p: &Pipeline, count: u64) -> Vec<(f64, f64)> {
    (0..count)
        .map(|s| {
            let noisy = add_noise(&p.nd.lambda, 0.01, Some(1000 + s)).unwrap();
            let nd2 = HyperbolicNdMap::from_lambda(noisy, p.grid.n_t).unwrap();
            k_perturbation_bound(&p.nd, &nd2, &p.ops).unwrap()
        })
        .collect()
}

/// `dL/dΛ` at `α` for each noise level, all from the same seed.
pub fn lipschitz_ratios(p: &Pipeline, levels: &[f64], alpha: f64, seed: u64) -> Vec<f64> {
    levels
        .iter()
        .map(|&level| {
            let noisy = add_noise(&p.nd.lambda, level, Some(seed)).unwrap();
            let nd2 = HyperbolicNdMap::from_lambda(noisy, p.grid.n_t).unwrap();
            stability_probe(&p.nd, &nd2, &p.ops, Complex64::new(0.0, 0.0), alpha, SystemForm::default())
                .unwrap()
                .ratio
                .unwrap()
        })
        .collect()
}
