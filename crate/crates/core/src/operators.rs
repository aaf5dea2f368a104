//! Boundary-time operators as dense matrices on stacked boundary signals.
//!
//! A signal on `(0, T) × {-1, 1}` is the vector of its left-boundary samples
//! at `t_0, …, t_{n_t-1}` followed by the right-boundary samples. On the
//! extended axis each block has `2 n_t` samples instead. Every operator here
//! acts on the two blocks independently with the same block matrix.

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::matrix::{DenseMatrix, RealMatrix, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SignalAxis {
    /// `n_t` samples per side on `[0, T]`.
    Horizon,
    /// `2 n_t` samples per side on `[0, 2T + dt]`.
    Extended,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundarySignal<T: Scalar> {
    values: Vec<T>,
    axis: SignalAxis,
    block: usize,
}

impl<T: Scalar> BoundarySignal<T> {
    pub fn new(values: Vec<T>, axis: SignalAxis, n_t: usize) -> Result<Self> {
        let block = match axis {
            SignalAxis::Horizon => n_t,
            SignalAxis::Extended => 2 * n_t,
        };
        if values.len() != 2 * block {
            return Err(Error::ShapeMismatch(format!(
                "{axis:?} signal for n_t = {n_t} needs {} values, got {}",
                2 * block,
                values.len()
            )));
        }
        Ok(Self { values, axis, block })
    }

    pub fn zeros(axis: SignalAxis, n_t: usize) -> Self {
        let len = match axis {
            SignalAxis::Horizon => 2 * n_t,
            SignalAxis::Extended => 4 * n_t,
        };
        Self::new(vec![T::zero(); len], axis, n_t).expect("length matches axis")
    }

    /// Signal built from per-side sample functions `f(side, k)`, side 0 being `x = -1`.
    pub fn from_fn(axis: SignalAxis, n_t: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut s = Self::zeros(axis, n_t);
        let block = s.block;
        for side in 0..2 {
            for k in 0..block {
                s.values[side * block + k] = f(side, k);
            }
        }
        s
    }

    pub fn axis(&self) -> SignalAxis {
        self.axis
    }

    pub fn block_len(&self) -> usize {
        self.block
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn left(&self) -> &[T] {
        &self.values[..self.block]
    }

    pub fn right(&self) -> &[T] {
        &self.values[self.block..]
    }

    /// Extension by zero from `[0, T]` to the extended axis.
    pub fn zero_extend(&self) -> Self {
        match self.axis {
            SignalAxis::Extended => self.clone(),
            SignalAxis::Horizon => {
                let n_t = self.block;
                let mut out = Self::zeros(SignalAxis::Extended, n_t);
                out.values[..n_t].copy_from_slice(self.left());
                out.values[2 * n_t..3 * n_t].copy_from_slice(self.right());
                out
            }
        }
    }
}

/// Block-diagonal matrix `diag(b, b)`.
fn block_diag(b: &RealMatrix) -> RealMatrix {
    let (r, c) = b.shape();
    let mut m = RealMatrix::zeros(2 * r, 2 * c);
    for i in 0..r {
        for j in 0..c {
            m[(i, j)] = b[(i, j)];
            m[(r + i, c + j)] = b[(i, j)];
        }
    }
    m
}

/// The discretized boundary operators for one grid.
#[derive(Clone, Debug)]
pub struct OperatorSet {
    pub n_t: usize,
    pub dt: f64,
    pub horizon: f64,
    /// Restriction from the extended axis to `[0, T]`, `2n_t × 4n_t`.
    pub p_t: RealMatrix,
    /// Evaluation at `t = T`, `2 × 2n_t`.
    pub trace: RealMatrix,
    /// Time reversal `t ↦ T - t`, `2n_t × 2n_t`.
    pub reversal: RealMatrix,
    /// `∫_0^t`, trapezoid rule.
    pub int1: RealMatrix,
    /// `int1²`.
    pub int2: RealMatrix,
    /// `∫_t^T`, equal to `R int1 R`.
    pub z: RealMatrix,
    /// `½ ∫_t^{2T-t}` from the extended axis to `[0, T]`, `2n_t × 4n_t`.
    pub j: RealMatrix,
    /// `trace · int2`, `2 × 2n_t`.
    pub s: RealMatrix,
}

pub fn build_operators(grid: &Grid) -> OperatorSet {
    let n = grid.n_t;
    let dt = grid.dt;
    let half = 0.5 * dt;

    let mut p_block = RealMatrix::zeros(n, 2 * n);
    for k in 0..n {
        p_block[(k, k)] = 1.0;
    }

    let mut trace = RealMatrix::zeros(2, 2 * n);
    trace[(0, n - 1)] = 1.0;
    trace[(1, 2 * n - 1)] = 1.0;

    let r_block = RealMatrix::from_fn(n, n, |i, j| if i + j == n - 1 { 1.0 } else { 0.0 });

    let mut i1_block = RealMatrix::zeros(n, n);
    for k in 1..n {
        i1_block[(k, 0)] = half;
        for m in 1..k {
            i1_block[(k, m)] = dt;
        }
        i1_block[(k, k)] = half;
    }

    // Row i integrates from t_i to t_{2n-2-i} = 2T - t_i; the last row is empty.
    let mut j_block = RealMatrix::zeros(n, 2 * n);
    for i in 0..n {
        let hi = 2 * n - 2 - i;
        if hi > i {
            j_block[(i, i)] = 0.5 * half;
            for m in i + 1..hi {
                j_block[(i, m)] = half;
            }
            j_block[(i, hi)] = 0.5 * half;
        }
    }

    let reversal = block_diag(&r_block);
    let int1 = block_diag(&i1_block);
    let int2 = int1.matmul(&int1).expect("square");
    let z = block_diag(&RealMatrix::from_fn(n, n, |i, j| i1_block[(n - 1 - i, n - 1 - j)]));
    let s = trace.matmul(&int2).expect("conformable");

    OperatorSet {
        n_t: n,
        dt,
        horizon: grid.horizon,
        p_t: block_diag(&p_block),
        trace,
        reversal,
        int1,
        int2,
        z,
        j: block_diag(&j_block),
        s,
    }
}

/// `S* 𝔣 = (T - t) 𝔣` in closed form.
pub fn apply_s_star<T: Scalar>(ops: &OperatorSet, f: [T; 2]) -> BoundarySignal<T> {
    BoundarySignal::from_fn(SignalAxis::Horizon, ops.n_t, |side, k| {
        f[side] * T::from_real(ops.horizon - k as f64 * ops.dt)
    })
}

impl OperatorSet {
    /// Columns of the extended axis kept by `P_T`.
    pub fn horizon_indices(&self) -> Vec<usize> {
        let n = self.n_t;
        (0..n).chain(2 * n..3 * n).collect()
    }

    /// Index map of the time reversal on `[0, T]`.
    pub fn reversal_indices(&self) -> Vec<usize> {
        let n = self.n_t;
        (0..2 * n).map(|k| if k < n { n - 1 - k } else { 3 * n - 1 - k }).collect()
    }

    /// Trapezoid weights `dt · (½, 1, …, 1, ½)` per block on `[0, T]`.
    pub fn quadrature_weights(&self) -> Vec<f64> {
        let n = self.n_t;
        (0..2 * n)
            .map(|k| if k % n == 0 || k % n == n - 1 { 0.5 * self.dt } else { self.dt })
            .collect()
    }

    /// Trapezoid weights per block on the extended axis.
    pub fn extended_quadrature_weights(&self) -> Vec<f64> {
        let m = 2 * self.n_t;
        (0..2 * m)
            .map(|k| if k % m == 0 || k % m == m - 1 { 0.5 * self.dt } else { self.dt })
            .collect()
    }

    /// `R M R` for a `2n_t × 2n_t` matrix, by index reversal.
    pub fn reflect<T: Scalar>(&self, m: &DenseMatrix<T>) -> DenseMatrix<T> {
        let idx = self.reversal_indices();
        DenseMatrix::from_fn(m.rows(), m.cols(), |i, j| m[(idx[i], idx[j])])
    }

    /// `M P_T^T` for a matrix acting on the extended axis, by column selection.
    pub fn restrict_columns<T: Scalar>(&self, m: &DenseMatrix<T>) -> DenseMatrix<T> {
        m.select_columns(&self.horizon_indices())
    }

    /// `P_T M` for a matrix with extended-axis rows, by row selection.
    pub fn restrict_rows<T: Scalar>(&self, m: &DenseMatrix<T>) -> DenseMatrix<T> {
        m.select_rows(&self.horizon_indices())
    }
}

/// `W M` with `W` the diagonal quadrature weights.
pub fn weight_rows(w: &[f64], m: &RealMatrix) -> RealMatrix {
    RealMatrix::from_fn(m.rows(), m.cols(), |i, j| w[i] * m[(i, j)])
}
