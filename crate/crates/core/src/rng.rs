//! Seeded random sampling used by property suites and the CLI.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::Vector;

pub const DEFAULT_SEED: u64 = 20070101;

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Vector with independent standard normal entries.
pub fn gaussian_vector<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vector {
    Vector::from_fn(dim, |_, _| rng.sample(StandardNormal))
}

pub fn unit_vector<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vector {
    loop {
        let v = gaussian_vector(rng, dim);
        let norm = v.norm();
        if norm > 1e-6 {
            return v / norm;
        }
    }
}

/// Random unit vector in the span of an orthonormal family.
pub fn unit_in_span<R: Rng + ?Sized>(rng: &mut R, basis: &[Vector]) -> Vector {
    let coeffs = unit_vector(rng, basis.len());
    basis
        .iter()
        .zip(coeffs.iter())
        .fold(Vector::zeros(basis[0].len()), |acc, (b, c)| acc + b * *c)
}
