use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::matrix::RealMatrix;

/// Adds i.i.d. Gaussian noise of standard deviation `level · rms(Λ)` to every entry.
///
/// With this scaling `level` is, up to sampling error, the relative Frobenius
/// size of the perturbation.
pub fn add_noise(lambda: &RealMatrix, level: f64, seed: Option<u64>) -> Result<RealMatrix> {
    if !(level >= 0.0) || !level.is_finite() {
        return Err(Error::InvalidInput(format!("noise level must be nonnegative, got {level}")));
    }
    if level == 0.0 {
        return Ok(lambda.clone());
    }
    let seed = seed.ok_or(Error::MissingSeed(level))?;
    let count = (lambda.rows() * lambda.cols()) as f64;
    let sigma = level * lambda.frobenius_norm() / count.sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = lambda.clone();
    for v in out.as_mut_slice() {
        let g: f64 = StandardNormal.sample(&mut rng);
        *v += sigma * g;
    }
    Ok(out)
}
