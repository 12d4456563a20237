use ndarray::{Array1, ArrayView1, ArrayView2, ArrayViewMut2};

use super::cell::add_outer;
use crate::{Error, Result};

pub fn softmax(logits: ArrayView1<f64>) -> Array1<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut e = logits.mapv(|v| (v - max).exp());
    let s = e.sum();
    e /= s;
    e
}

/// `log Σ exp(logits)`, computed stably.
pub fn log_sum_exp(logits: ArrayView1<f64>) -> f64 {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + logits.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Dot-product attention over encoder states stored one per row:
/// `weights = softmax(H h)`, `context = Hᵀ weights`.
pub fn attend(states: ArrayView2<f64>, h: ArrayView1<f64>) -> Result<(Array1<f64>, Array1<f64>)> {
    if states.nrows() == 0 {
        return Err(Error::InvalidArgument("attention over zero states".into()));
    }
    if states.ncols() != h.len() {
        return Err(Error::InvalidArgument(format!(
            "query has {} dims, states have {}",
            h.len(),
            states.ncols()
        )));
    }
    let weights = softmax(states.dot(&h).view());
    let context = states.t().dot(&weights);
    Ok((context, weights))
}

/// Backward of [`attend`] given `dcontext`. Accumulates into `dstates` and
/// returns the gradient with respect to the query `h`.
pub fn attend_backward(
    states: ArrayView2<f64>,
    h: ArrayView1<f64>,
    weights: &Array1<f64>,
    dcontext: &Array1<f64>,
    mut dstates: ArrayViewMut2<f64>,
) -> Array1<f64> {
    add_outer(dstates.view_mut(), weights.view(), dcontext.view());
    let dweights = states.dot(dcontext);
    let mean = weights.dot(&dweights);
    let dscores = weights * &(dweights - mean);
    add_outer(dstates, dscores.view(), h);
    states.t().dot(&dscores)
}
