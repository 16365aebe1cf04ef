//! Fixtures shared by the benchmarks.

use alasso_core::DesignMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Gaussian design with unit-norm columns and a response drawn from a
/// sparse positive signal plus unit noise.
pub fn gaussian_problem(n: usize, p: usize, k: usize, seed: u64) -> (DesignMatrix, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..n * p).map(|_| rng.sample(StandardNormal)).collect();
    let mut x0 = DesignMatrix::from_column_major(n, p, data).expect("valid dimensions");
    x0.normalize_columns();
    let mut beta = vec![0.0; p];
    beta[..k.min(p)].iter_mut().for_each(|b| *b = 10.0);
    let mut y = x0.mul_vec(&beta);
    y.iter_mut().for_each(|v| *v += rng.sample::<f64, _>(StandardNormal));
    (x0, y)
}
