//! Seeded random instances for property suites. Every generator takes the
//! caller's RNG so a single seed reproduces a whole suite.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::problem::PositiveLP;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Shape of generated instances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InstanceShape {
    pub max_n: usize,
    pub max_m: usize,
    /// Entries of `A` are integers in `[-entry_bound, entry_bound]`.
    pub entry_bound: i32,
}

impl Default for InstanceShape {
    fn default() -> Self {
        InstanceShape {
            max_n: 4,
            max_m: 7,
            entry_bound: 2,
        }
    }
}

/// Integer constraint matrix with a planted positive feasible point, so the
/// instance is feasible by construction. Costs lie in `[1, 5]` and
/// reactivities in `[0.5, 2]`.
pub fn planted_instance<R: Rng>(rng: &mut R, shape: InstanceShape, name: &str) -> PositiveLP {
    let n = rng.gen_range(1..=shape.max_n);
    let m = rng.gen_range((n + 1).min(shape.max_m)..=shape.max_m);
    let mut a = DMatrix::zeros(n, m);
    for j in 0..m {
        loop {
            for i in 0..n {
                a[(i, j)] = f64::from(rng.gen_range(-shape.entry_bound..=shape.entry_bound));
            }
            if a.column(j).iter().any(|&v| v != 0.0) {
                break;
            }
        }
    }
    let planted = DVector::from_fn(m, |_, _| rng.gen_range(0.5..2.0));
    let b = &a * planted;
    let c: Vec<f64> = (0..m).map(|_| rng.gen_range(1.0..5.0)).collect();
    let d: Vec<f64> = (0..m).map(|_| rng.gen_range(0.5..2.0)).collect();
    PositiveLP::new(name, a, b.as_slice().to_vec(), c, d).expect("generated instance is valid")
}

/// Strictly positive state with log-uniform entries in `[lo, hi]`.
pub fn positive_state<R: Rng>(rng: &mut R, m: usize, lo: f64, hi: f64) -> DVector<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    DVector::from_fn(m, |_, _| rng.gen_range(a..b).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_generation_is_reproducible() {
        let a = planted_instance(&mut rng(7), InstanceShape::default(), "r");
        let b = planted_instance(&mut rng(7), InstanceShape::default(), "r");
        assert_eq!(a, b);
        assert!(a.n() <= 4 && a.m() <= 7 && a.m() > a.n().min(6));
    }
}
