#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use domainbal::corpus::{synthesize_corpora, ContextResponsePair, SyntheticSpec, Vocabulary};
use domainbal::model::{encode_corpora, EncodedPair, LossWeights, ModelDims, ModelParams};

/// Exact (f, df, DF) per corpus and word, straight from the definitions:
///
/// f(w)_d  = max(0, freq(w)_d - min_v freq(v)_d), min over words present in d
/// df(w)_d = f(w)_d / Σ_d' f(w)_d'               (0 when the sum is 0)
/// DF(w)_d = df(w)_d / max_v df(v)_d             (0 when the max is 0)
pub fn oracle_df(corpora: &[Vec<String>]) -> Vec<BTreeMap<String, [f64; 3]>> {
    let vocab: BTreeSet<&String> = corpora.iter().flatten().collect();
    let freq: Vec<BTreeMap<&String, BigRational>> = corpora
        .iter()
        .map(|tokens| {
            let mut counts: BTreeMap<&String, i64> = BTreeMap::new();
            for t in tokens {
                *counts.entry(t).or_default() += 1;
            }
            let total = BigInt::from(tokens.len() as i64);
            counts
                .into_iter()
                .map(|(w, c)| (w, BigRational::new(BigInt::from(c), total.clone())))
                .collect()
        })
        .collect();
    let f: Vec<BTreeMap<&String, BigRational>> = freq
        .iter()
        .map(|fr| {
            let min = fr.values().min().cloned().unwrap();
            vocab
                .iter()
                .map(|w| {
                    let v = fr.get(w).cloned().unwrap_or_else(BigRational::zero) - &min;
                    (*w, if v > BigRational::zero() { v } else { BigRational::zero() })
                })
                .collect()
        })
        .collect();
    let df: Vec<BTreeMap<&String, BigRational>> = (0..corpora.len())
        .map(|d| {
            vocab
                .iter()
                .map(|w| {
                    let sum: BigRational = f.iter().map(|fd| fd[w].clone()).sum();
                    let v = if sum.is_zero() { BigRational::zero() } else { f[d][w].clone() / sum };
                    (*w, v)
                })
                .collect()
        })
        .collect();
    (0..corpora.len())
        .map(|d| {
            let max = df[d].values().max().cloned().unwrap();
            vocab
                .iter()
                .map(|w| {
                    let big_df = if max.is_zero() { BigRational::zero() } else { df[d][w].clone() / &max };
                    (
                        (*w).clone(),
                        [
                            f[d][w].to_f64().unwrap(),
                            df[d][w].to_f64().unwrap(),
                            big_df.to_f64().unwrap(),
                        ],
                    )
                })
                .collect()
        })
        .collect()
}

/// 2-5 corpora over at most 50 words, 1-500 tokens each, with skewed word
/// choice so that exclusive words, shared words and ties all occur.
pub fn random_collection(rng: &mut ChaCha8Rng) -> Vec<Vec<String>> {
    let n = rng.random_range(2..=5);
    let vocab = rng.random_range(1..=50);
    (0..n)
        .map(|_| {
            let subset: Vec<usize> = (0..vocab).filter(|_| rng.random_bool(0.6)).collect();
            let subset = if subset.is_empty() { vec![rng.random_range(0..vocab)] } else { subset };
            let len = rng.random_range(1..=500);
            (0..len)
                .map(|_| {
                    // Square the draw to favour the head of the subset.
                    let u: f64 = rng.random();
                    let i = ((u * u) * subset.len() as f64) as usize;
                    format!("w{}", subset[i.min(subset.len() - 1)])
                })
                .collect()
        })
        .collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub const TINY_VOCAB: usize = 20;
pub const TINY_CORPORA: usize = 3;
pub const TINY_DIM: usize = 8;

pub fn tiny_params(seed: u64) -> ModelParams {
    ModelParams::random(ModelDims::new(TINY_VOCAB, TINY_CORPORA, TINY_DIM), seed, 0.5)
}

/// Non-reserved token ids of the tiny vocabulary.
pub fn random_tokens(rng: &mut ChaCha8Rng, len: usize) -> Vec<u32> {
    (0..len).map(|_| rng.random_range(4..TINY_VOCAB as u32)).collect()
}

pub fn random_weights(rng: &mut ChaCha8Rng) -> LossWeights {
    let per_corpus = (0..TINY_CORPORA)
        .map(|_| (0..TINY_VOCAB).map(|_| rng.random_range(0.0..=1.0)).collect())
        .collect();
    LossWeights::new(per_corpus, 0.7)
}

/// The bundled desk-scale fixture: `train` training pairs and a quarter as
/// many held-out pairs per domain, split from one synthetic draw.
pub struct Fixture {
    pub vocab: Vocabulary,
    pub train: Vec<Vec<ContextResponsePair>>,
    pub test: Vec<Vec<ContextResponsePair>>,
    pub train_ids: Vec<Vec<EncodedPair>>,
    pub test_ids: Vec<Vec<EncodedPair>>,
}

pub fn fixture(domains: usize, train: usize, seed: u64) -> Fixture {
    let held = (train / 4).max(1);
    let all = synthesize_corpora(&SyntheticSpec::standard(domains, train + held, seed)).unwrap();
    let (train, test): (Vec<_>, Vec<_>) = all
        .into_iter()
        .map(|mut c| {
            let t = c.split_off(train);
            (c, t)
        })
        .unzip();
    let vocab = Vocabulary::build(train.iter().flatten().chain(test.iter().flatten()), None);
    let train_ids = encode_corpora(&vocab, &train);
    let test_ids = encode_corpora(&vocab, &test);
    Fixture {
        vocab,
        train,
        test,
        train_ids,
        test_ids,
    }
}
