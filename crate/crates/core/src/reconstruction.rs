//! Elliptic map reconstruction from the hyperbolic map.
//!
//! `K = J Λ P_Tᵀ - R Λ_T R J P_Tᵀ` is computed from boundary data alone. For a
//! frequency `λ` and regularization `α` the normal system
//!
//! ```text
//! N = (I + conj(λ) Z²) K (I + λ ∂⁻²) + SᵀS + α I
//! ```
//!
//! is solved for the two unit boundary inputs, giving `f̈`. The reconstructed
//! map is `S Λ_T f̈` and the boundary control is `∂⁻² f̈`.
//!
//! `SᵀS` and `Sᵀ` carry trapezoid weights while `K` does not. [`SystemForm`]
//! selects whether the `K` part is weighted to match.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::matrix::{lu_factor, ComplexMatrix, DenseMatrix, LuFactors, RealMatrix};
use crate::operators::{weight_rows, BoundarySignal, OperatorSet, SignalAxis};
use crate::wave::{wave_solve, Coefficients, HyperbolicNdMap};

/// The connecting operator on `[0, T]`, `2n_t × 2n_t`.
#[derive(Clone, Debug)]
pub struct ConnectingOperator {
    pub k: RealMatrix,
}

pub fn assemble_k(nd: &HyperbolicNdMap, ops: &OperatorSet) -> Result<ConnectingOperator> {
    let n = 2 * ops.n_t;
    if nd.lambda.shape() != (2 * n, 2 * n) || nd.lambda_t.shape() != (n, n) {
        return Err(Error::ShapeMismatch(format!(
            "hyperbolic map {:?} does not match operators for n_t = {}",
            nd.lambda.shape(),
            ops.n_t
        )));
    }
    // P_T only selects columns, and R only reverses indices.
    let forward = ops.j.matmul(&ops.restrict_columns(&nd.lambda))?;
    let backward = ops.reflect(&nd.lambda_t).matmul(&ops.restrict_columns(&ops.j))?;
    Ok(ConnectingOperator { k: forward.sub(&backward)? })
}

/// How the `K` part of the normal matrix is scaled against `SᵀS`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SystemForm {
    /// `K` as assembled, next to `SᵀS`.
    Printed,
    /// Rows of the `K` part scaled by the trapezoid weights, so that both
    /// terms discretize the same inner product. Consistent as `dt → 0` for
    /// every `λ`.
    #[default]
    Weighted,
}

/// Pieces of the normal matrix that do not depend on `λ` or `α`.
#[derive(Clone, Debug)]
pub struct NormalTerms {
    k: RealMatrix,
    z2_k: RealMatrix,
    k_int2: RealMatrix,
    z2_k_int2: RealMatrix,
    sts: RealMatrix,
}

impl NormalTerms {
    pub fn new(k: &ConnectingOperator, ops: &OperatorSet, form: SystemForm) -> Result<Self> {
        let kk = match form {
            SystemForm::Printed => k.k.clone(),
            SystemForm::Weighted => weight_rows(&ops.quadrature_weights(), &k.k),
        };
        // Z² is not diagonal, so weighting happens after it is applied.
        let z2 = ops.z.matmul(&ops.z)?;
        let mut z2_k = z2.matmul(&k.k)?;
        if form == SystemForm::Weighted {
            z2_k = weight_rows(&ops.quadrature_weights(), &z2_k);
        }
        let k_int2 = kk.matmul(&ops.int2)?;
        let z2_k_int2 = z2_k.matmul(&ops.int2)?;
        let sts = ops.s.transpose().matmul(&ops.s)?;
        Ok(Self { k: kk, z2_k, k_int2, z2_k_int2, sts })
    }

    pub fn dim(&self) -> usize {
        self.k.rows()
    }

    fn combine<T: crate::matrix::Scalar>(&self, lambda: T, alpha: f64) -> DenseMatrix<T> {
        let n = self.dim();
        let lc = lambda.conj();
        let ll = lc * lambda;
        let mut out = DenseMatrix::<T>::zeros(n, n);
        let parts = (
            self.k.as_slice(),
            self.z2_k.as_slice(),
            self.k_int2.as_slice(),
            self.z2_k_int2.as_slice(),
            self.sts.as_slice(),
        );
        for (idx, o) in out.as_mut_slice().iter_mut().enumerate() {
            *o = T::from_real(parts.0[idx] + parts.4[idx])
                + lc * T::from_real(parts.1[idx])
                + lambda * T::from_real(parts.2[idx])
                + ll * T::from_real(parts.3[idx]);
        }
        out.add_to_diagonal(T::from_real(alpha));
        out
    }
}

/// `W (I + conj(λ) Z²) K (I + λ ∂⁻²) + SᵀS + α I`, with `W = I` for the printed form.
pub fn normal_matrix(terms: &NormalTerms, lambda: Complex64, alpha: f64) -> ComplexMatrix {
    terms.combine(lambda, alpha)
}

#[derive(Clone, Debug)]
enum Factors {
    Real(LuFactors<f64>),
    Complex(LuFactors<Complex64>),
}

/// A factorized normal system for one `(λ, α)`.
#[derive(Clone, Debug)]
pub struct RegularizedSystem {
    pub lambda: Complex64,
    pub alpha: f64,
    /// 1-norm condition estimate of the normal matrix.
    pub condition: f64,
    factors: Factors,
}

pub fn build_regularized_system(terms: &NormalTerms, lambda: Complex64, alpha: f64) -> Result<RegularizedSystem> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidInput(format!("alpha must be positive, got {alpha}")));
    }
    if !lambda.re.is_finite() || !lambda.im.is_finite() {
        return Err(Error::InvalidInput(format!("lambda must be finite, got {lambda}")));
    }
    // A real frequency keeps the whole system real, at a quarter of the cost.
    let (factors, condition) = if lambda.im == 0.0 {
        let n = terms.combine(lambda.re, alpha);
        let norm = n.norm1();
        let lu = lu_factor(&n)?;
        let c = lu.condition_estimate(norm)?;
        (Factors::Real(lu), c)
    } else {
        let n = terms.combine(lambda, alpha);
        let norm = n.norm1();
        let lu = lu_factor(&n)?;
        let c = lu.condition_estimate(norm)?;
        (Factors::Complex(lu), c)
    };
    Ok(RegularizedSystem { lambda, alpha, condition, factors })
}

impl RegularizedSystem {
    /// Solves the normal system for each column of a real right-hand side.
    pub fn solve(&self, rhs: &RealMatrix) -> Result<ComplexMatrix> {
        match &self.factors {
            Factors::Real(lu) => Ok(lu.solve(rhs)?.to_complex()),
            Factors::Complex(lu) => lu.solve(&rhs.to_complex()),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ReconstructionResult {
    /// Reconstructed 2×2 elliptic map; column `k` is the response to unit flux on side `k`.
    pub l: ComplexMatrix,
    /// Solutions `f̈` of the normal system, one column per unit input.
    pub f_ddot: ComplexMatrix,
    /// Boundary controls `∂⁻² f̈` on `[0, T]`.
    pub controls: [BoundarySignal<Complex64>; 2],
    /// `u(T, ·)` driven by each control, when requested.
    pub snapshots: Option<[Vec<Complex64>; 2]>,
}

impl ReconstructionResult {
    /// Reconstructed boundary values for general Neumann data `𝔣`.
    pub fn apply(&self, f: [Complex64; 2]) -> [Complex64; 2] {
        [
            self.l[(0, 0)] * f[0] + self.l[(0, 1)] * f[1],
            self.l[(1, 0)] * f[0] + self.l[(1, 1)] * f[1],
        ]
    }

    /// Control for general Neumann data `𝔣`.
    pub fn control_for(&self, f: [Complex64; 2]) -> Vec<Complex64> {
        combine(self.controls[0].values(), self.controls[1].values(), f)
    }

    /// Wave snapshot for general Neumann data `𝔣`.
    pub fn snapshot_for(&self, f: [Complex64; 2]) -> Option<Vec<Complex64>> {
        self.snapshots.as_ref().map(|[a, b]| combine(a, b, f))
    }
}

fn combine(a: &[Complex64], b: &[Complex64], f: [Complex64; 2]) -> Vec<Complex64> {
    a.iter().zip(b).map(|(&x, &y)| f[0] * x + f[1] * y).collect()
}

/// Runs the wave solver with a complex control zero-extended past `T` and returns `u(T, ·)`.
pub fn control_snapshot(grid: &Grid, coeff: &Coefficients, control: &BoundarySignal<Complex64>) -> Result<Vec<Complex64>> {
    let ext = control.zero_extend();
    let part = |pick: fn(&Complex64) -> f64| -> Result<Vec<f64>> {
        let values: Vec<f64> = ext.values().iter().map(pick).collect();
        let f = BoundarySignal::new(values, SignalAxis::Extended, grid.n_t)?;
        let field = wave_solve(grid, coeff, &f, grid.n_t)?;
        Ok(field.snapshot_at_horizon().expect("solved up to T").to_vec())
    };
    let re = part(|z| z.re)?;
    let im = if ext.values().iter().any(|z| z.im != 0.0) { part(|z| z.im)? } else { vec![0.0; grid.n_x] };
    Ok(re.into_iter().zip(im).map(|(a, b)| Complex64::new(a, b)).collect())
}

/// Reconstructs the elliptic map from a factorized system. With `snapshot`
/// set, each control is also fed back through the wave solver.
pub fn reconstruct(
    sys: &RegularizedSystem,
    nd: &HyperbolicNdMap,
    ops: &OperatorSet,
    snapshot: Option<(&Grid, &Coefficients)>,
) -> Result<ReconstructionResult> {
    let n = 2 * ops.n_t;
    if nd.lambda_t.shape() != (n, n) {
        return Err(Error::ShapeMismatch("hyperbolic map does not match the operators".into()));
    }
    // Right-hand sides Sᵀ e_k for the unit inputs.
    let rhs = ops.s.transpose();
    let f_ddot = sys.solve(&rhs)?;
    let lambda_t = nd.lambda_t.to_complex();
    let l = ops.s.to_complex().matmul(&lambda_t.matmul(&f_ddot)?)?;
    let controls_m = ops.int2.to_complex().matmul(&f_ddot)?;
    let controls = [0, 1].map(|k| {
        BoundarySignal::new(controls_m.column(k), SignalAxis::Horizon, ops.n_t).expect("length 2n_t")
    });
    let snapshots = match snapshot {
        None => None,
        Some((grid, coeff)) => {
            if grid.n_t != ops.n_t {
                return Err(Error::ShapeMismatch("grid does not match the operators".into()));
            }
            Some([control_snapshot(grid, coeff, &controls[0])?, control_snapshot(grid, coeff, &controls[1])?])
        }
    };
    Ok(ReconstructionResult { l, f_ddot, controls, snapshots })
}

/// Sensitivity of the reconstruction to a change in the hyperbolic map.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StabilityProbe {
    /// `‖L̃ - L‖_F`.
    pub d_l: f64,
    /// `‖Λ̃ - Λ‖_F`.
    pub d_lambda: f64,
    /// `d_l / d_lambda`, undefined when the maps coincide.
    pub ratio: Option<f64>,
}

pub fn stability_probe(
    nd: &HyperbolicNdMap,
    nd_perturbed: &HyperbolicNdMap,
    ops: &OperatorSet,
    lambda: Complex64,
    alpha: f64,
    form: SystemForm,
) -> Result<StabilityProbe> {
    if nd.lambda.shape() != nd_perturbed.lambda.shape() {
        return Err(Error::ShapeMismatch("perturbed map has a different shape".into()));
    }
    let d_lambda = nd_perturbed.lambda.sub(&nd.lambda)?.frobenius_norm();
    let run = |m: &HyperbolicNdMap| -> Result<ComplexMatrix> {
        let k = assemble_k(m, ops)?;
        let sys = build_regularized_system(&NormalTerms::new(&k, ops, form)?, lambda, alpha)?;
        Ok(reconstruct(&sys, m, ops, None)?.l)
    };
    let base = run(nd)?;
    let d_l = if d_lambda == 0.0 { 0.0 } else { run(nd_perturbed)?.sub(&base)?.frobenius_norm() };
    let ratio = (d_lambda > 0.0).then(|| d_l / d_lambda);
    Ok(StabilityProbe { d_l, d_lambda, ratio })
}

/// `‖W^{1/2} M W'^{-1/2}‖_F` for diagonal quadrature weights on rows and columns.
pub fn weighted_frobenius(m: &RealMatrix, row_w: &[f64], col_w: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 0..m.rows() {
        for (j, &v) in m.row(i).iter().enumerate() {
            acc += row_w[i] / col_w[j] * v * v;
        }
    }
    acc.sqrt()
}

/// Both sides of `‖K̃ - K‖ ≤ √2 T ‖Λ̃ - Λ‖` in quadrature-weighted Frobenius norms.
pub fn k_perturbation_bound(nd: &HyperbolicNdMap, nd_perturbed: &HyperbolicNdMap, ops: &OperatorSet) -> Result<(f64, f64)> {
    let dk = assemble_k(nd_perturbed, ops)?.k.sub(&assemble_k(nd, ops)?.k)?;
    let dl = nd_perturbed.lambda.sub(&nd.lambda)?;
    let w = ops.quadrature_weights();
    let we = ops.extended_quadrature_weights();
    let lhs = weighted_frobenius(&dk, &w, &w);
    let rhs = std::f64::consts::SQRT_2 * ops.horizon * weighted_frobenius(&dl, &we, &we);
    Ok((lhs, rhs))
}

/// `‖W M - Mᵀ W‖_F / ‖W M‖_F`, the departure from self-adjointness in the weighted inner product.
pub fn weighted_asymmetry(m: &RealMatrix, w: &[f64]) -> f64 {
    weighted_adjoint_defect(m, m, w)
}

/// `‖W M - Aᵀ W‖_F / ‖W M‖_F`: how far `A` is from the weighted adjoint of `M`.
pub fn weighted_adjoint_defect(m: &RealMatrix, adjoint: &RealMatrix, w: &[f64]) -> f64 {
    let n = m.rows();
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            let a = w[i] * m[(i, j)];
            let b = adjoint[(j, i)] * w[j];
            num += (a - b) * (a - b);
            den += a * a;
        }
    }
    (num / den).sqrt()
}
