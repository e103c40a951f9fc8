//! Synthetic corpora, noise models and micro-F1 scoring for desk-scale
//! fusion experiments.
//!
//! Every document gets its own random stream derived from the run seed and
//! the document's identity, so results do not depend on thread scheduling.

mod corpus;
mod eval;
mod experiment;
mod noise;

pub use corpus::{generate_corpus, LayoutProfile};
pub use eval::{evaluate, parse_label_pairs, ClassScore, EvalReport};
pub use experiment::{fusion_samples, run_fusion_experiment, ExperimentConfig, ExperimentResult};
pub use noise::{apply_noise, ConfusionTable, NoiseModel};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

fn fnv1a(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3)
    })
}

/// Random stream for one unit of work under `seed`.
pub(crate) fn stream(seed: u64, key: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(fnv1a(key))))
}

pub(crate) fn map_docs<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(usize, &T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter().enumerate().map(|(i, t)| f(i, t)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().enumerate().map(|(i, t)| f(i, t)).collect()
    }
}
