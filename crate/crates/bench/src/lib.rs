//! Seeded inputs shared by the benchmarks.

use ownconc_core::{Marginals, Matrix, OwnershipMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Dense `n × m` holdings with roughly `density` of the cells nonzero and
/// every row and column active.
pub fn holdings(n: usize, m: usize, density: f64, seed: u64) -> OwnershipMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw = Matrix::from_fn(n, m, |i, j| {
        if j == i % m || i == j % n || rng.gen_bool(density) {
            rng.gen_range(0.01..1.0)
        } else {
            0.0
        }
    });
    OwnershipMatrix::from_raw(&raw).expect("random holdings are valid")
}

pub fn marginals(n: usize, m: usize, seed: u64) -> Marginals {
    holdings(n, m, 1.0, seed).marginals()
}
