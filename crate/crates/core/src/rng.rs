//! Deterministic, splittable randomness.
//!
//! Every randomized routine in this crate takes an explicit 64-bit seed and
//! derives independent child seeds through [`derive_seed`], so parallel and
//! serial executions of the same configuration see bit-identical streams.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer: a well-mixed bijection on u64.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the `index`-th child seed of `base`.
///
/// Children of one base are pairwise distinct, and nested derivation
/// (`derive_seed(derive_seed(base, a), b)`) yields streams independent of
/// sibling branches for all practical purposes.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    splitmix64(base ^ splitmix64(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15)))
}

/// The PRNG used throughout the crate, constructed from a bare seed.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A uniformly random direction on the unit sphere in `dim` dimensions.
pub fn unit_vector(dim: usize, rng: &mut impl Rng) -> Vec<f64> {
    assert!(dim > 0, "unit_vector needs a positive dimension");
    loop {
        let v: Vec<f64> = (0..dim)
            .map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal))
            .collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// A random orthogonal matrix (rows are an orthonormal basis), sampled by
/// Gram-Schmidt orthonormalization of a Gaussian matrix. Determinant is ±1;
/// both signs are valid rigid motions here.
pub fn random_rotation(dim: usize, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    assert!(dim > 0, "random_rotation needs a positive dimension");
    'retry: loop {
        let mut rows: Vec<Vec<f64>> = Vec::with_capacity(dim);
        for _ in 0..dim {
            let mut v: Vec<f64> = (0..dim)
                .map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal))
                .collect();
            for prev in &rows {
                let dot: f64 = v.iter().zip(prev).map(|(a, b)| a * b).sum();
                for (x, p) in v.iter_mut().zip(prev) {
                    *x -= dot * p;
                }
            }
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm < 1e-9 {
                // Degenerate draw; start over rather than renormalizing noise.
                continue 'retry;
            }
            for x in v.iter_mut() {
                *x /= norm;
            }
            rows.push(v);
        }
        return rows;
    }
}
