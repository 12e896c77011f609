//! Seed derivation and the few sampling helpers the solvers need.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type SolverRng = ChaCha8Rng;

/// One splitmix64 step: a well-mixed 64-bit value from `seed + stream`.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed.wrapping_add(stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn rng_from_seed(seed: u64) -> SolverRng {
    SolverRng::seed_from_u64(seed)
}

/// Uniform sample from the probability simplex (flat Dirichlet), written into `out`.
pub fn fill_flat_simplex<R: Rng + ?Sized>(rng: &mut R, out: &mut [f64]) {
    let mut total = 0.0;
    for v in out.iter_mut() {
        // 1 - u lies in (0, 1], so the log is finite
        let u: f64 = rng.random();
        *v = -(1.0 - u).ln();
        total += *v;
    }
    if total <= 0.0 {
        let n = out.len() as f64;
        out.iter_mut().for_each(|v| *v = 1.0 / n);
    } else {
        out.iter_mut().for_each(|v| *v /= total);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_seeds_differ_per_stream() {
        let a: Vec<u64> = (0..100).map(|s| derive_seed(7, s)).collect();
        let mut b = a.clone();
        b.sort_unstable();
        b.dedup();
        assert_eq!(a.len(), b.len());
        assert_eq!(derive_seed(7, 3), derive_seed(7, 3));
        assert_ne!(derive_seed(7, 3), derive_seed(8, 3));
    }

    #[test]
    fn simplex_samples_are_normalized() {
        let mut rng = rng_from_seed(1);
        let mut buf = [0.0; 6];
        for _ in 0..100 {
            fill_flat_simplex(&mut rng, &mut buf);
            assert!((buf.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(buf.iter().all(|&v| v >= 0.0));
        }
    }
}
