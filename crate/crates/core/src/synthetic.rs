//! Generated datasets with labels planted in node features.
//!
//! Each fine label `k` (fake, hate, defamation, offensive) is switched on
//! independently; when it is on, node-feature dimension `k - 1` of one random
//! token is set to `marker`. Hostile is on iff any fine label is. All other
//! features, and the whole context embedding, are uniform noise.

use ndarray::{Array1, Array2};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{Sentence, Token};
use crate::model::{ExampleRecord, LabelVector, NUM_LABELS};

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticSpec {
    pub d_ctx: usize,
    /// At least 4; the first four dimensions carry the markers.
    pub d_node: usize,
    pub min_tokens: usize,
    pub max_tokens: usize,
    /// Probability of each fine label.
    pub label_rate: f64,
    pub marker: f64,
    /// Half-width of the uniform noise.
    pub noise: f64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            d_ctx: 8,
            d_node: 8,
            min_tokens: 3,
            max_tokens: 10,
            label_rate: 0.3,
            marker: 2.0,
            noise: 0.1,
        }
    }
}

/// A random dependency tree over `n` tokens.
fn random_tree<R: Rng>(n: usize, rng: &mut R) -> Vec<usize> {
    let mut order: Vec<usize> = (1..=n).collect();
    order.shuffle(rng);
    let mut heads = vec![0; n];
    for k in 1..n {
        let parent = order[rng.random_range(0..k)];
        heads[order[k] - 1] = parent;
    }
    heads
}

pub fn synthetic_dataset(spec: &SyntheticSpec, count: usize, seed: u64) -> Vec<ExampleRecord> {
    assert!(spec.d_node >= NUM_LABELS - 1, "d_node must hold the four markers");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = spec.noise;
    (0..count)
        .map(|i| {
            let n = rng.random_range(spec.min_tokens..=spec.max_tokens);
            let heads = random_tree(n, &mut rng);
            let tokens: Vec<Token> = heads
                .iter()
                .enumerate()
                .map(|(t, &head)| Token {
                    index: t + 1,
                    surface: format!("w{}", rng.random_range(0..50)),
                    head,
                    deprel: if head == 0 { "root".into() } else { "dep".into() },
                })
                .collect();
            let id = format!("syn-{i}");
            let words = tokens.iter().map(|t| t.surface.clone()).collect();
            let parse = Sentence::new(id.clone(), tokens).expect("generated trees are valid");

            let mut nodes =
                Array2::from_shape_simple_fn((n, spec.d_node), || rng.random_range(-noise..=noise));
            let mut bits = [false; NUM_LABELS];
            for k in 1..NUM_LABELS {
                if rng.random_bool(spec.label_rate) {
                    bits[k] = true;
                    let t = rng.random_range(0..n);
                    nodes[[t, k - 1]] = spec.marker;
                }
            }
            bits[0] = bits[1..].iter().any(|&b| b);
            let context = Array1::from_shape_simple_fn(spec.d_ctx, || rng.random_range(-noise..=noise));
            ExampleRecord::new(id, words, parse, context, nodes, Some(LabelVector::from_array(bits)))
                .expect("generated records are consistent")
        })
        .collect()
}
