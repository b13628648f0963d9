//! Fixed inputs shared by the benchmarks.

use affclan::{random_gl, MatrixF};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// `count` random invertible `n x n` matrices with entry valuations in `[-2, 2]`.
pub fn sample_matrices(n: usize, count: usize, seed: u64) -> Vec<MatrixF> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_gl(&mut rng, n, -2..=2)).collect()
}
