//! Seeded randomness shared by data generators, solvers and tests.
//!
//! Everything stochastic in the crate flows from a `u64` seed through
//! ChaCha8 streams, so a run is reproducible bit-for-bit.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finalizer; used to derive independent child seeds.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed
        .wrapping_add(stream.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn gaussian_vector<R: Rng + ?Sized>(rng: &mut R, d: usize) -> DVector<f64> {
    DVector::from_fn(d, |_, _| rng.sample(StandardNormal))
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<f64> {
    // column-major fill order, fixed so that streams replay identically
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// Haar-distributed `rows × cols` matrix with orthonormal columns (`rows ≥ cols`).
///
/// QR of a Gaussian matrix, with the signs of `R`'s diagonal folded back into
/// `Q` so the distribution is exactly uniform on the Stiefel manifold.
pub fn haar_orthonormal<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<f64> {
    assert!(rows >= cols, "haar_orthonormal needs rows >= cols");
    let g = gaussian_matrix(rng, rows, cols);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..cols {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Counter-addressed uniform index source.
///
/// The draw for `(stream, step)` depends only on the seed and those two
/// counters, so any branch of a run can be replayed in isolation.
#[derive(Clone, Debug)]
pub struct IndexStream {
    rng: ChaCha8Rng,
}

impl IndexStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        IndexStream { rng }
    }

    /// Uniform draw from `0..n` for the given step.
    pub fn index(&mut self, step: u64, n: usize) -> usize {
        self.rng.set_word_pos(u128::from(step) * 16);
        self.rng.random_range(0..n)
    }

    /// Uniform draw from `[0, 1)` for the given step.
    pub fn unit(&mut self, step: u64) -> f64 {
        self.rng.set_word_pos(u128::from(step) * 16);
        self.rng.random::<f64>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_stream_replays() {
        let mut a = IndexStream::new(7, 3);
        let mut b = IndexStream::new(7, 3);
        let fwd: Vec<usize> = (0..50).map(|t| a.index(t, 13)).collect();
        let rev: Vec<usize> = (0..50).rev().map(|t| b.index(t, 13)).collect();
        let rev: Vec<usize> = rev.into_iter().rev().collect();
        assert_eq!(fwd, rev);
        assert!(fwd.iter().all(|&i| i < 13));
    }

    #[test]
    fn index_stream_covers_range() {
        let mut s = IndexStream::new(1, 0);
        let mut seen = [false; 5];
        for t in 0..200 {
            seen[s.index(t, 5)] = true;
        }
        assert!(seen.iter().all(|&b| b));
    }

    #[test]
    fn haar_columns_are_orthonormal() {
        let mut rng = seeded(11);
        let q = haar_orthonormal(&mut rng, 30, 7);
        let gram = q.transpose() * &q;
        assert!((gram - DMatrix::<f64>::identity(7, 7)).norm() < 1e-12);
    }

    #[test]
    fn derived_seeds_differ() {
        assert_ne!(derive_seed(1, 0), derive_seed(1, 1));
        assert_ne!(derive_seed(1, 0), derive_seed(2, 0));
        assert_eq!(derive_seed(5, 9), derive_seed(5, 9));
    }
}
