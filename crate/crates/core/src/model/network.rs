//! Encoder, attention decoder, classifier head and their gradients.
//!
//! A pair `(x_1..x_m, y_1..y_n)` is scored as follows. The encoder runs the
//! cell over the context embeddings, producing one state per token (rows of
//! `H`). The decoder starts from the last encoder state and a zero attention
//! context, and at step `t` consumes `[E(y_{t-1}); c_{t-1}; E_c]` with
//! `y_0 = <s>`. Its state `h_t` attends over `H` to give `c_t`, and
//! `tanh(W_c [h_t; c_t] + b_c)` feeds the output projection. Targets are
//! `y_1..y_n, </s>`.

use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2};

use super::attention::{attend, attend_backward, log_sum_exp, softmax};
use super::cell::{add_outer, CellCache, CellGrads, CellWeights};
use super::{LossWeights, Method, ModelParams};
use crate::corpus::{BOS, EOS};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct Example<'a> {
    pub context: &'a [u32],
    pub response: &'a [u32],
    pub corpus: usize,
}

impl ModelParams {
    fn encoder_cell(&self) -> CellWeights<'_> {
        CellWeights {
            kind: self.dims.cell,
            w: self.enc_w.view(),
            u: self.enc_u.view(),
            b: self.enc_b.view(),
        }
    }

    fn decoder_cell(&self) -> CellWeights<'_> {
        CellWeights {
            kind: self.dims.cell,
            w: self.dec_w.view(),
            u: self.dec_u.view(),
            b: self.dec_b.view(),
        }
    }

    fn check_tokens(&self, tokens: &[u32]) -> Result<()> {
        match tokens.iter().find(|&&t| t as usize >= self.dims.vocab) {
            Some(&t) => Err(Error::OutOfRange {
                what: "token",
                index: t as usize,
                limit: self.dims.vocab,
            }),
            None => Ok(()),
        }
    }

    fn check_corpus(&self, corpus: usize) -> Result<()> {
        if corpus >= self.dims.corpora {
            return Err(Error::OutOfRange {
                what: "corpus",
                index: corpus,
                limit: self.dims.corpora,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct EncoderTrace {
    pub tokens: Vec<u32>,
    /// One row per context token.
    pub states: Array2<f64>,
    caches: Vec<CellCache>,
}

pub(crate) fn encode_trace(params: &ModelParams, tokens: &[u32]) -> Result<EncoderTrace> {
    if tokens.is_empty() {
        return Err(Error::InvalidArgument("cannot encode an empty context".into()));
    }
    params.check_tokens(tokens)?;
    let cell = params.encoder_cell();
    let mut h = Array1::zeros(params.dims.dim);
    let mut states = Array2::zeros((tokens.len(), params.dims.dim));
    let mut caches = Vec::with_capacity(tokens.len());
    for (t, &tok) in tokens.iter().enumerate() {
        let (h_new, cache) = cell.forward(params.word_emb.row(tok as usize).to_owned(), &h);
        states.row_mut(t).assign(&h_new);
        caches.push(cache);
        h = h_new;
    }
    Ok(EncoderTrace {
        tokens: tokens.to_vec(),
        states,
        caches,
    })
}

/// Encoder states `H`, one row per context token.
pub fn encode(params: &ModelParams, tokens: &[u32]) -> Result<Array2<f64>> {
    encode_trace(params, tokens).map(|t| t.states)
}

#[derive(Debug, Clone)]
pub struct ClassifierOutput {
    pub summed: Array1<f64>,
    pub logits: Array1<f64>,
    pub predicted: usize,
}

/// Corpus logits `W (Σ_t H_t)`; the prediction is the first argmax.
pub fn classify(params: &ModelParams, states: ArrayView2<f64>) -> ClassifierOutput {
    let summed = states.sum_axis(ndarray::Axis(0));
    let logits = params.cls_w.dot(&summed);
    let predicted = argmax(logits.view(), |_| true);
    ClassifierOutput {
        summed,
        logits,
        predicted,
    }
}

/// `-log softmax((Σ H) · W)[target]`.
pub fn classifier_loss(states: ArrayView2<f64>, target: usize, classifier: ArrayView2<f64>) -> Result<f64> {
    if states.nrows() == 0 {
        return Err(Error::InvalidArgument("classifier over zero states".into()));
    }
    if target >= classifier.nrows() {
        return Err(Error::OutOfRange {
            what: "corpus",
            index: target,
            limit: classifier.nrows(),
        });
    }
    let logits = classifier.dot(&states.sum_axis(ndarray::Axis(0)));
    Ok(cross_entropy(logits.view(), target))
}

pub fn cross_entropy(logits: ArrayView1<f64>, target: usize) -> f64 {
    log_sum_exp(logits) - logits[target]
}

/// Index of the first maximal logit among positions where `allowed` holds.
pub fn argmax(logits: ArrayView1<f64>, allowed: impl Fn(usize) -> bool) -> usize {
    let mut best = None;
    for (i, &v) in logits.iter().enumerate() {
        if allowed(i) && best.is_none_or(|(_, b)| v > b) {
            best = Some((i, v));
        }
    }
    best.map_or(0, |(i, _)| i)
}

/// `Σ_t w_t · CE_t / T`.
pub fn sequence_loss(step_logits: &[Array1<f64>], targets: &[u32], weights: &[f64]) -> Result<f64> {
    if step_logits.len() != targets.len() || weights.len() != targets.len() {
        return Err(Error::InvalidArgument(format!(
            "{} steps, {} targets, {} weights",
            step_logits.len(),
            targets.len(),
            weights.len()
        )));
    }
    if targets.is_empty() {
        return Err(Error::InvalidArgument("empty target sequence".into()));
    }
    let sum: f64 = step_logits
        .iter()
        .zip(targets)
        .zip(weights)
        .map(|((l, &y), &w)| w * cross_entropy(l.view(), y as usize))
        .sum();
    Ok(sum / targets.len() as f64)
}

/// Per-step weights for `targets`: all ones, or DF of the gold corpus in
/// weighted mode.
pub fn step_weights(
    method: Method,
    targets: &[u32],
    corpus: usize,
    weights: Option<&LossWeights>,
) -> Result<Vec<f64>> {
    if method != Method::Weighted {
        return Ok(vec![1.0; targets.len()]);
    }
    let table = weights.ok_or(Error::MissingDfTable)?;
    targets.iter().map(|&t| table.weight(corpus, t)).collect()
}

#[derive(Debug, Clone)]
pub struct DecoderState {
    pub h: Array1<f64>,
    /// Attention context from the previous step.
    pub context: Array1<f64>,
}

impl DecoderState {
    pub fn initial(states: ArrayView2<f64>) -> Self {
        Self {
            h: states.row(states.nrows() - 1).to_owned(),
            context: Array1::zeros(states.ncols()),
        }
    }
}

#[derive(Debug, Clone)]
struct StepTrace {
    prev_token: u32,
    cell: CellCache,
    h: Array1<f64>,
    weights: Array1<f64>,
    hc: Array1<f64>,
    o: Array1<f64>,
    logits: Array1<f64>,
}

fn step(
    params: &ModelParams,
    states: ArrayView2<f64>,
    state: &DecoderState,
    prev_token: u32,
    corpus_embedding: Option<ArrayView1<f64>>,
) -> Result<(DecoderState, StepTrace)> {
    let d = params.dims.dim;
    let mut x = Array1::zeros(params.dims.decoder_input());
    x.slice_mut(s![..d]).assign(&params.word_emb.row(prev_token as usize));
    x.slice_mut(s![d..2 * d]).assign(&state.context);
    if let Some(e) = corpus_embedding {
        if e.len() != params.dims.corpus_dim {
            return Err(Error::InvalidArgument(format!(
                "corpus embedding has {} dims, expected {}",
                e.len(),
                params.dims.corpus_dim
            )));
        }
        x.slice_mut(s![2 * d..]).assign(&e);
    }
    let (h, cell) = params.decoder_cell().forward(x, &state.h);
    let (context, weights) = attend(states, h.view())?;
    let mut hc = Array1::zeros(2 * d);
    hc.slice_mut(s![..d]).assign(&h);
    hc.slice_mut(s![d..]).assign(&context);
    let o = (params.comb_w.dot(&hc) + &params.comb_b).mapv(f64::tanh);
    let logits = params.out_w.dot(&o) + &params.out_b;
    let next = DecoderState {
        h: h.clone(),
        context,
    };
    Ok((
        next,
        StepTrace {
            prev_token,
            cell,
            h,
            weights,
            hc,
            o,
            logits,
        },
    ))
}

/// One decoder step. Methods that condition on a corpus require
/// `corpus_embedding`; other methods ignore it only if it is `None`, and a
/// zero vector behaves exactly like `None`.
pub fn decode_step(
    params: &ModelParams,
    states: ArrayView2<f64>,
    state: &DecoderState,
    prev_token: u32,
    corpus_embedding: Option<ArrayView1<f64>>,
    method: Method,
) -> Result<(DecoderState, Array1<f64>)> {
    if method.uses_corpus_embedding() && corpus_embedding.is_none() {
        return Err(Error::MissingCorpusEmbedding);
    }
    params.check_tokens(&[prev_token])?;
    let (next, trace) = step(params, states, state, prev_token, corpus_embedding)?;
    Ok((next, trace.logits))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossBreakdown {
    pub sequence: f64,
    pub classifier: f64,
    pub total: f64,
}

#[derive(Debug, Clone)]
pub struct ForwardTrace {
    pub encoder: EncoderTrace,
    steps: Vec<StepTrace>,
    pub targets: Vec<u32>,
    pub step_weights: Vec<f64>,
    /// Corpus whose embedding fed the decoder, if any.
    pub corpus_used: Option<usize>,
    pub classifier: Option<ClassifierOutput>,
    pub gold_corpus: usize,
    pub loss: LossBreakdown,
}

impl ForwardTrace {
    pub fn step_logits(&self) -> Vec<Array1<f64>> {
        self.steps.iter().map(|s| s.logits.clone()).collect()
    }

    pub fn decoder_states(&self) -> Vec<Array1<f64>> {
        self.steps.iter().map(|s| s.h.clone()).collect()
    }
}

/// Which corpus embedding the decoder sees. `gold` is the label available to
/// the caller; only labeled learning consumes it.
pub(crate) fn corpus_choice(
    method: Method,
    gold: Option<usize>,
    classifier: Option<&ClassifierOutput>,
) -> Result<Option<usize>> {
    match method {
        Method::Labeled => gold.map(Some).ok_or(Error::MissingCorpusEmbedding),
        Method::MultitaskLabeled => Ok(classifier.map(|c| c.predicted)),
        _ => Ok(None),
    }
}

fn run_decoder(
    params: &ModelParams,
    states: ArrayView2<f64>,
    response: &[u32],
    corpus_used: Option<usize>,
) -> Result<Vec<StepTrace>> {
    let mut state = DecoderState::initial(states);
    let embedding = corpus_used.map(|c| params.corpus_emb.row(c));
    let mut traces = Vec::with_capacity(response.len() + 1);
    for &prev in std::iter::once(&BOS).chain(response) {
        let (next, trace) = step(params, states, &state, prev, embedding)?;
        traces.push(trace);
        state = next;
    }
    Ok(traces)
}

/// Teacher-forced forward pass with the training loss of `method`.
pub fn forward(
    params: &ModelParams,
    example: Example,
    method: Method,
    weights: Option<&LossWeights>,
) -> Result<ForwardTrace> {
    params.check_tokens(example.response)?;
    params.check_corpus(example.corpus)?;
    let encoder = encode_trace(params, example.context)?;
    let classifier = method
        .has_classifier()
        .then(|| classify(params, encoder.states.view()));
    let corpus_used = corpus_choice(method, Some(example.corpus), classifier.as_ref())?;
    let steps = run_decoder(params, encoder.states.view(), example.response, corpus_used)?;

    let targets: Vec<u32> = example.response.iter().copied().chain([EOS]).collect();
    let step_weights = step_weights(method, &targets, example.corpus, weights)?;
    let sequence = steps
        .iter()
        .zip(&targets)
        .zip(&step_weights)
        .map(|((s, &y), &w)| w * cross_entropy(s.logits.view(), y as usize))
        .sum::<f64>()
        / targets.len() as f64;
    let classifier_loss = classifier
        .as_ref()
        .map_or(0.0, |c| cross_entropy(c.logits.view(), example.corpus));
    Ok(ForwardTrace {
        encoder,
        steps,
        targets,
        step_weights,
        corpus_used,
        classifier,
        gold_corpus: example.corpus,
        loss: LossBreakdown {
            sequence,
            classifier: classifier_loss,
            total: sequence + classifier_loss,
        },
    })
}

/// Negative log-likelihood (natural log) of `response + </s>` summed over
/// steps, with the label policy of generation: labeled learning gets the
/// gold corpus, multi-task learning its own prediction, others nothing.
pub fn response_nll(params: &ModelParams, example: Example, method: Method) -> Result<(f64, usize)> {
    params.check_tokens(example.response)?;
    params.check_corpus(example.corpus)?;
    let encoder = encode_trace(params, example.context)?;
    let classifier = method
        .has_classifier()
        .then(|| classify(params, encoder.states.view()));
    let corpus_used = corpus_choice(method, Some(example.corpus), classifier.as_ref())?;
    let steps = run_decoder(params, encoder.states.view(), example.response, corpus_used)?;
    let nll = steps
        .iter()
        .zip(example.response.iter().chain([&EOS]))
        .map(|(s, &y)| cross_entropy(s.logits.view(), y as usize))
        .sum();
    Ok((nll, steps.len()))
}

/// Accumulates the gradient of `trace.loss.total` into `grads`.
pub fn backward(params: &ModelParams, trace: &ForwardTrace, grads: &mut ModelParams) {
    let d = params.dims.dim;
    let states = trace.encoder.states.view();
    let m = states.nrows();
    let mut dstates = Array2::<f64>::zeros((m, d));
    let mut dh_next = Array1::<f64>::zeros(d);
    let mut dc_next = Array1::<f64>::zeros(d);
    let steps_n = trace.targets.len() as f64;
    let dec_cell = params.decoder_cell();

    for ((st, &y), &w) in trace
        .steps
        .iter()
        .zip(&trace.targets)
        .zip(&trace.step_weights)
        .rev()
    {
        let mut dlogits = softmax(st.logits.view());
        dlogits[y as usize] -= 1.0;
        dlogits *= w / steps_n;

        add_outer(grads.out_w.view_mut(), dlogits.view(), st.o.view());
        grads.out_b += &dlogits;
        let dao = params.out_w.t().dot(&dlogits) * st.o.mapv(|v| 1.0 - v * v);
        add_outer(grads.comb_w.view_mut(), dao.view(), st.hc.view());
        grads.comb_b += &dao;
        let dhc = params.comb_w.t().dot(&dao);

        let mut dh = &dhc.slice(s![..d]) + &dh_next;
        let dc = &dhc.slice(s![d..]) + &dc_next;
        dh += &attend_backward(states, st.h.view(), &st.weights, &dc, dstates.view_mut());

        let mut cg = CellGrads {
            w: grads.dec_w.view_mut(),
            u: grads.dec_u.view_mut(),
            b: grads.dec_b.view_mut(),
        };
        let (dx, dh_prev) = dec_cell.backward(&st.cell, &dh, &mut cg);
        grads
            .word_emb
            .row_mut(st.prev_token as usize)
            .scaled_add(1.0, &dx.slice(s![..d]));
        dc_next = dx.slice(s![d..2 * d]).to_owned();
        if let Some(c) = trace.corpus_used {
            grads.corpus_emb.row_mut(c).scaled_add(1.0, &dx.slice(s![2 * d..]));
        }
        dh_next = dh_prev;
    }
    dstates.row_mut(m - 1).scaled_add(1.0, &dh_next);

    if let Some(cls) = &trace.classifier {
        let mut dlogits = softmax(cls.logits.view());
        dlogits[trace.gold_corpus] -= 1.0;
        add_outer(grads.cls_w.view_mut(), dlogits.view(), cls.summed.view());
        let dsum = params.cls_w.t().dot(&dlogits);
        for mut row in dstates.rows_mut() {
            row += &dsum;
        }
    }

    let enc_cell = params.encoder_cell();
    let mut dh_carry = Array1::<f64>::zeros(d);
    for (t, cache) in trace.encoder.caches.iter().enumerate().rev() {
        let dh = &dstates.row(t) + &dh_carry;
        let mut cg = CellGrads {
            w: grads.enc_w.view_mut(),
            u: grads.enc_u.view_mut(),
            b: grads.enc_b.view_mut(),
        };
        let (dx, dh_prev) = enc_cell.backward(cache, &dh, &mut cg);
        grads
            .word_emb
            .row_mut(trace.encoder.tokens[t] as usize)
            .scaled_add(1.0, &dx);
        dh_carry = dh_prev;
    }
}

/// Forward and backward in one call; gradients are added to `grads`.
pub fn loss_and_gradient(
    params: &ModelParams,
    example: Example,
    method: Method,
    weights: Option<&LossWeights>,
    grads: &mut ModelParams,
) -> Result<LossBreakdown> {
    let trace = forward(params, example, method, weights)?;
    backward(params, &trace, grads);
    Ok(trace.loss)
}
