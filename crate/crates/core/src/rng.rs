//! Seeded randomness: every stochastic operation in this crate takes an
//! explicit 64-bit seed and derives any sub-streams through [`derive_seed`].

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

/// The single generator type used throughout the crate.
pub type CrateRng = ChaCha8Rng;

/// Create the crate's generator from a seed.
pub fn seeded_rng(seed: u64) -> CrateRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derive an independent sub-seed for a named stream.
///
/// The rule is fixed so that runs fan out reproducibly:
/// `splitmix64(base XOR stream * 0x9E3779B97F4A7C15)`.
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    splitmix64(base ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Draw one categorical state by inverse CDF over states in declared order.
///
/// `probs` must be nonnegative; it is treated as unnormalized weights.
pub fn sample_categorical(rng: &mut CrateRng, probs: &[f64]) -> usize {
    let total: f64 = probs.iter().sum();
    debug_assert!(total > 0.0, "categorical weights sum to zero");
    let u: f64 = rng.random::<f64>() * total;
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}

/// Draw a Dirichlet vector with the given concentration parameters by
/// normalizing independent Gamma(alpha, 1) variates.
pub fn sample_dirichlet(rng: &mut CrateRng, alphas: &[f64], out: &mut [f64]) {
    debug_assert_eq!(alphas.len(), out.len());
    let mut total = 0.0;
    for (slot, &a) in out.iter_mut().zip(alphas) {
        let g = Gamma::new(a, 1.0).expect("positive concentration");
        let draw = g.sample(rng);
        *slot = draw;
        total += draw;
    }
    if total <= 0.0 {
        // All gamma draws underflowed; fall back to the mean direction.
        let alpha_sum: f64 = alphas.iter().sum();
        for (slot, &a) in out.iter_mut().zip(alphas) {
            *slot = a / alpha_sum;
        }
        return;
    }
    for slot in out.iter_mut() {
        *slot /= total;
    }
}
