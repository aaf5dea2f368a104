//! Finite-difference solver for `-c² u'' + q u - λ u = 0` with Neumann data,
//! and the 2×2 elliptic Neumann-to-Dirichlet map it induces.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::matrix::{lu_factor, ComplexMatrix};
use crate::wave::Coefficients;

/// Condition estimates above this mean `λ` sits on a Neumann eigenvalue.
pub const EIGEN_CONDITION_LIMIT: f64 = 1e12;

/// How the Neumann rows of the discrete system are closed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum NeumannClosure {
    /// `(u_0 - u_1)/dx = f_left`, `(u_N - u_{N-1})/dx = f_right`.
    #[default]
    OneSided,
    /// Ghost node mirrored across each end, as in the wave solver. Second order.
    GhostNode,
}

fn assemble(grid: &Grid, coeff: &Coefficients, lambda: Complex64, closure: NeumannClosure) -> ComplexMatrix {
    let n = grid.n_x;
    let last = n - 1;
    let inv_dx2 = 1.0 / (grid.dx * grid.dx);
    let c2 = |j: usize| coeff.speed[j] * coeff.speed[j] * inv_dx2;
    let diag = |j: usize| Complex64::new(coeff.potential[j], 0.0) - lambda;
    let mut a = ComplexMatrix::zeros(n, n);
    for j in 1..last {
        a[(j, j - 1)] = (-c2(j)).into();
        a[(j, j)] = 2.0 * c2(j) + diag(j);
        a[(j, j + 1)] = (-c2(j)).into();
    }
    match closure {
        NeumannClosure::OneSided => {
            // Scaled like the interior rows so that the condition estimate stays meaningful.
            a[(0, 0)] = c2(0).into();
            a[(0, 1)] = (-c2(0)).into();
            a[(last, last)] = c2(last).into();
            a[(last, last - 1)] = (-c2(last)).into();
        }
        NeumannClosure::GhostNode => {
            a[(0, 0)] = 2.0 * c2(0) + diag(0);
            a[(0, 1)] = (-2.0 * c2(0)).into();
            a[(last, last)] = 2.0 * c2(last) + diag(last);
            a[(last, last - 1)] = (-2.0 * c2(last)).into();
        }
    }
    a
}

fn rhs(grid: &Grid, coeff: &Coefficients, f: [Complex64; 2], closure: NeumannClosure) -> Vec<Complex64> {
    let n = grid.n_x;
    let mut b = vec![Complex64::new(0.0, 0.0); n];
    let scale = |j: usize| coeff.speed[j] * coeff.speed[j] / grid.dx;
    let factor = match closure {
        NeumannClosure::OneSided => 1.0,
        NeumannClosure::GhostNode => 2.0,
    };
    b[0] = f[0] * factor * scale(0);
    b[n - 1] = f[1] * factor * scale(n - 1);
    b
}

/// LU factors of the system at `λ`, rejecting (near-)eigenvalues.
fn factor(grid: &Grid, coeff: &Coefficients, lambda: Complex64, closure: NeumannClosure) -> Result<crate::matrix::LuFactors<Complex64>> {
    if coeff.speed.len() != grid.n_x || coeff.potential.len() != grid.n_x {
        return Err(Error::ShapeMismatch("coefficients do not match the grid".into()));
    }
    let a = assemble(grid, coeff, lambda, closure);
    let lu = match lu_factor(&a) {
        Ok(lu) => lu,
        Err(Error::SingularMatrix { .. }) => return Err(Error::NearSingularSystem { condition: f64::INFINITY }),
        Err(e) => return Err(e),
    };
    let condition = lu.condition_estimate(a.norm1())?;
    if !(condition <= EIGEN_CONDITION_LIMIT) {
        return Err(Error::NearSingularSystem { condition });
    }
    Ok(lu)
}

/// Estimated 1-norm condition number of the elliptic system at `λ`.
pub fn elliptic_condition(grid: &Grid, coeff: &Coefficients, lambda: Complex64, closure: NeumannClosure) -> Result<f64> {
    let a = assemble(grid, coeff, lambda, closure);
    match lu_factor(&a) {
        Ok(lu) => lu.condition_estimate(a.norm1()),
        Err(Error::SingularMatrix { .. }) => Ok(f64::INFINITY),
        Err(e) => Err(e),
    }
}

/// Nodal solution for outward Neumann data `f = (f_left, f_right)`.
pub fn elliptic_solve(
    grid: &Grid,
    coeff: &Coefficients,
    lambda: Complex64,
    f: [Complex64; 2],
    closure: NeumannClosure,
) -> Result<Vec<Complex64>> {
    let lu = factor(grid, coeff, lambda, closure)?;
    lu.solve_vec(&rhs(grid, coeff, f, closure))
}

#[derive(Clone, Debug, PartialEq)]
pub struct EllipticNdMap {
    pub l: ComplexMatrix,
    pub lambda: Complex64,
}

impl EllipticNdMap {
    /// Boundary value at side `i` for unit flux on side `j`.
    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.l[(i, j)]
    }
}

/// Column `k` holds the boundary values for unit flux on side `k`.
pub fn elliptic_nd_map(grid: &Grid, coeff: &Coefficients, lambda: Complex64, closure: NeumannClosure) -> Result<EllipticNdMap> {
    let lu = factor(grid, coeff, lambda, closure)?;
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let mut l = ComplexMatrix::zeros(2, 2);
    for (k, f) in [[one, zero], [zero, one]].into_iter().enumerate() {
        let u = lu.solve_vec(&rhs(grid, coeff, f, closure))?;
        l[(0, k)] = u[0];
        l[(1, k)] = u[grid.n_x - 1];
    }
    Ok(EllipticNdMap { l, lambda })
}
