use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::{singular_values, ComplexMatrix};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorMetrics {
    pub rel_frobenius: f64,
    pub rel_2norm: f64,
}

/// Relative Frobenius and spectral-norm errors of a reconstructed map.
pub fn error_metrics(reconstructed: &ComplexMatrix, truth: &ComplexMatrix) -> Result<ErrorMetrics> {
    if reconstructed.shape() != truth.shape() {
        return Err(Error::ShapeMismatch(format!("{:?} vs {:?}", reconstructed.shape(), truth.shape())));
    }
    let tf = truth.frobenius_norm();
    if tf == 0.0 {
        return Err(Error::ZeroTruth);
    }
    let diff = reconstructed.sub(truth)?;
    let spectral = |m: &ComplexMatrix| -> Result<f64> { Ok(singular_values(m, 1)?.first().copied().unwrap_or(0.0)) };
    Ok(ErrorMetrics { rel_frobenius: diff.frobenius_norm() / tf, rel_2norm: spectral(&diff)? / spectral(truth)? })
}

/// `‖a - b‖₂ / ‖b‖₂` for nodal vectors.
pub fn relative_l2(a: &[Complex64], b: &[Complex64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::ShapeMismatch(format!("{} vs {}", a.len(), b.len())));
    }
    let den: f64 = b.iter().map(|z| z.norm_sqr()).sum();
    if den == 0.0 {
        return Err(Error::ZeroTruth);
    }
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    Ok((num / den).sqrt())
}
