use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellKind {
    /// Gated recurrent unit; the production cell.
    Gru,
    /// `h' = W x + U h + b` with identity activation. Only useful for
    /// hand-checkable tests and ablations.
    Linear,
}

impl CellKind {
    /// Number of stacked gate blocks in the input and recurrent matrices.
    pub fn gates(self) -> usize {
        match self {
            CellKind::Gru => 3,
            CellKind::Linear => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelDims {
    pub vocab: usize,
    pub corpora: usize,
    /// Hidden size, also the word-embedding size.
    pub dim: usize,
    pub corpus_dim: usize,
    pub cell: CellKind,
}

impl ModelDims {
    /// Corpus embeddings default to half the hidden size.
    pub fn new(vocab: usize, corpora: usize, dim: usize) -> Self {
        Self {
            vocab,
            corpora,
            dim,
            corpus_dim: (dim / 2).max(1),
            cell: CellKind::Gru,
        }
    }

    pub fn decoder_input(&self) -> usize {
        2 * self.dim + self.corpus_dim
    }

    pub fn validate(&self) -> Result<()> {
        if self.vocab == 0 || self.corpora == 0 || self.dim == 0 || self.corpus_dim == 0 {
            return Err(Error::InvalidArgument(format!("degenerate model dimensions {self:?}")));
        }
        Ok(())
    }

    /// Expected `(name, shape)` of every parameter group, in storage order.
    pub fn shapes(&self) -> Vec<(&'static str, Vec<usize>)> {
        let g = self.cell.gates() * self.dim;
        let (v, d, h, c) = (self.vocab, self.corpora, self.dim, self.corpus_dim);
        vec![
            ("word_embeddings", vec![v, h]),
            ("corpus_embeddings", vec![d, c]),
            ("encoder_input", vec![g, h]),
            ("encoder_recurrent", vec![g, h]),
            ("encoder_bias", vec![g]),
            ("decoder_input", vec![g, self.decoder_input()]),
            ("decoder_recurrent", vec![g, h]),
            ("decoder_bias", vec![g]),
            ("combine_weight", vec![h, 2 * h]),
            ("combine_bias", vec![h]),
            ("output_weight", vec![v, h]),
            ("output_bias", vec![v]),
            ("classifier", vec![d, h]),
        ]
    }
}

/// Every trainable array. Gradients use the same type.
///
/// The decoder input is `[E(y_prev); c_prev; E_c]`: previous word embedding,
/// previous attention context, then the corpus embedding (zeros for methods
/// that do not condition on a corpus).
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub dims: ModelDims,
    pub word_emb: Array2<f64>,
    pub corpus_emb: Array2<f64>,
    pub enc_w: Array2<f64>,
    pub enc_u: Array2<f64>,
    pub enc_b: Array1<f64>,
    pub dec_w: Array2<f64>,
    pub dec_u: Array2<f64>,
    pub dec_b: Array1<f64>,
    pub comb_w: Array2<f64>,
    pub comb_b: Array1<f64>,
    pub out_w: Array2<f64>,
    pub out_b: Array1<f64>,
    pub cls_w: Array2<f64>,
}

impl ModelParams {
    pub fn zeros(dims: ModelDims) -> Self {
        let g = dims.cell.gates() * dims.dim;
        let (v, d, h, c) = (dims.vocab, dims.corpora, dims.dim, dims.corpus_dim);
        Self {
            dims,
            word_emb: Array2::zeros((v, h)),
            corpus_emb: Array2::zeros((d, c)),
            enc_w: Array2::zeros((g, h)),
            enc_u: Array2::zeros((g, h)),
            enc_b: Array1::zeros(g),
            dec_w: Array2::zeros((g, dims.decoder_input())),
            dec_u: Array2::zeros((g, h)),
            dec_b: Array1::zeros(g),
            comb_w: Array2::zeros((h, 2 * h)),
            comb_b: Array1::zeros(h),
            out_w: Array2::zeros((v, h)),
            out_b: Array1::zeros(v),
            cls_w: Array2::zeros((d, h)),
        }
    }

    /// Every value uniform in `[-scale, scale]`, drawn in group order from a
    /// ChaCha8 stream seeded with `seed`.
    pub fn random(dims: ModelDims, seed: u64, scale: f64) -> Self {
        let mut p = Self::zeros(dims);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for group in p.groups_mut() {
            for v in group.iter_mut() {
                *v = rng.random_range(-scale..=scale);
            }
        }
        p
    }

    pub fn group_names(&self) -> Vec<&'static str> {
        self.dims.shapes().into_iter().map(|(n, _)| n).collect()
    }

    pub fn groups(&self) -> [&[f64]; 13] {
        [
            self.word_emb.as_slice().expect("standard layout"),
            self.corpus_emb.as_slice().expect("standard layout"),
            self.enc_w.as_slice().expect("standard layout"),
            self.enc_u.as_slice().expect("standard layout"),
            self.enc_b.as_slice().expect("standard layout"),
            self.dec_w.as_slice().expect("standard layout"),
            self.dec_u.as_slice().expect("standard layout"),
            self.dec_b.as_slice().expect("standard layout"),
            self.comb_w.as_slice().expect("standard layout"),
            self.comb_b.as_slice().expect("standard layout"),
            self.out_w.as_slice().expect("standard layout"),
            self.out_b.as_slice().expect("standard layout"),
            self.cls_w.as_slice().expect("standard layout"),
        ]
    }

    pub fn groups_mut(&mut self) -> [&mut [f64]; 13] {
        [
            self.word_emb.as_slice_mut().expect("standard layout"),
            self.corpus_emb.as_slice_mut().expect("standard layout"),
            self.enc_w.as_slice_mut().expect("standard layout"),
            self.enc_u.as_slice_mut().expect("standard layout"),
            self.enc_b.as_slice_mut().expect("standard layout"),
            self.dec_w.as_slice_mut().expect("standard layout"),
            self.dec_u.as_slice_mut().expect("standard layout"),
            self.dec_b.as_slice_mut().expect("standard layout"),
            self.comb_w.as_slice_mut().expect("standard layout"),
            self.comb_b.as_slice_mut().expect("standard layout"),
            self.out_w.as_slice_mut().expect("standard layout"),
            self.out_b.as_slice_mut().expect("standard layout"),
            self.cls_w.as_slice_mut().expect("standard layout"),
        ]
    }

    pub fn num_values(&self) -> usize {
        self.groups().iter().map(|g| g.len()).sum()
    }

    pub fn fill(&mut self, value: f64) {
        for g in self.groups_mut() {
            g.fill(value);
        }
    }

    pub fn l2_norm(&self) -> f64 {
        self.groups()
            .iter()
            .flat_map(|g| g.iter())
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt()
    }

    pub fn scale(&mut self, factor: f64) {
        for g in self.groups_mut() {
            g.iter_mut().for_each(|v| *v *= factor);
        }
    }

    /// `self += factor * other`.
    pub fn add_scaled(&mut self, factor: f64, other: &ModelParams) {
        for (dst, src) in self.groups_mut().into_iter().zip(other.groups()) {
            dst.iter_mut().zip(src).for_each(|(d, s)| *d += factor * s);
        }
    }

    /// Rescales so the global L2 norm is at most `threshold`. Returns the
    /// norm before clipping.
    pub fn clip_global_norm(&mut self, threshold: f64) -> f64 {
        let norm = self.l2_norm();
        if norm > threshold {
            self.scale(threshold / norm);
        }
        norm
    }

    pub fn all_finite(&self) -> bool {
        self.groups().iter().all(|g| g.iter().all(|v| v.is_finite()))
    }

    /// Checks array shapes against `dims`.
    pub fn validate(&self) -> Result<()> {
        self.dims.validate()?;
        let actual = [
            self.word_emb.shape(),
            self.corpus_emb.shape(),
            self.enc_w.shape(),
            self.enc_u.shape(),
            self.enc_b.shape(),
            self.dec_w.shape(),
            self.dec_u.shape(),
            self.dec_b.shape(),
            self.comb_w.shape(),
            self.comb_b.shape(),
            self.out_w.shape(),
            self.out_b.shape(),
            self.cls_w.shape(),
        ];
        for ((name, want), got) in self.dims.shapes().into_iter().zip(actual) {
            if want != got {
                return Err(Error::InvalidArgument(format!(
                    "{name} has shape {got:?}, expected {want:?}"
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes_match_dims() {
        let dims = ModelDims::new(20, 3, 8);
        let p = ModelParams::random(dims, 1, 0.08);
        p.validate().unwrap();
        assert_eq!(dims.corpus_dim, 4);
        assert!(p.groups().iter().flat_map(|g| g.iter()).all(|v| v.abs() <= 0.08));
        let expected: usize = dims.shapes().iter().map(|(_, s)| s.iter().product::<usize>()).sum();
        assert_eq!(p.num_values(), expected);
    }

    #[test]
    fn random_is_seeded() {
        let dims = ModelDims::new(10, 2, 4);
        assert_eq!(ModelParams::random(dims, 5, 0.1), ModelParams::random(dims, 5, 0.1));
        assert_ne!(ModelParams::random(dims, 5, 0.1), ModelParams::random(dims, 6, 0.1));
    }

    #[test]
    fn clipping_caps_norm() {
        let mut p = ModelParams::zeros(ModelDims::new(4, 2, 2));
        p.fill(1.0);
        let before = p.clip_global_norm(1.0);
        assert!(before > 1.0);
        assert!((p.l2_norm() - 1.0).abs() < 1e-12);
        let again = p.clip_global_norm(5.0);
        assert!((again - 1.0).abs() < 1e-12);
    }
}
