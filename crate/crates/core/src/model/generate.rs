use super::network::{argmax, classify, corpus_choice, decode_step, encode, DecoderState};
use super::{Method, ModelParams};
use crate::corpus::{BOS, EOS, PAD, UNK};
use crate::{Error, Result};

/// Tokens greedy decoding never emits.
pub const GENERATION_MASK: [u32; 3] = [PAD, UNK, BOS];

/// Greedy decoding: the highest-scoring token each step until `</s>` or
/// `max_len` tokens. The end token is not part of the output.
///
/// Labeled learning needs `corpus`; multi-task learning predicts its own; all
/// other methods reject a label.
pub fn generate(
    params: &ModelParams,
    context: &[u32],
    method: Method,
    corpus: Option<usize>,
    max_len: usize,
) -> Result<Vec<u32>> {
    if method.needs_label_at_generation() && corpus.is_none() {
        return Err(Error::MissingCorpusEmbedding);
    }
    if !method.needs_label_at_generation() && corpus.is_some() {
        return Err(Error::InvalidArgument(format!(
            "{method} models take no corpus label at generation"
        )));
    }
    if let Some(c) = corpus {
        if c >= params.dims.corpora {
            return Err(Error::OutOfRange {
                what: "corpus",
                index: c,
                limit: params.dims.corpora,
            });
        }
    }
    let states = encode(params, context)?;
    let classifier = method.has_classifier().then(|| classify(params, states.view()));
    let chosen = corpus_choice(method, corpus, classifier.as_ref())?;
    let embedding = chosen.map(|c| params.corpus_emb.row(c));

    let mut state = DecoderState::initial(states.view());
    let mut prev = BOS;
    let mut out = Vec::new();
    while out.len() < max_len {
        let (next, logits) = decode_step(params, states.view(), &state, prev, embedding, method)?;
        let tok = argmax(logits.view(), |i| !GENERATION_MASK.contains(&(i as u32))) as u32;
        if tok == EOS {
            break;
        }
        out.push(tok);
        prev = tok;
        state = next;
    }
    Ok(out)
}
