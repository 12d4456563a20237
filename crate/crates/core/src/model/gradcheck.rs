use super::network::{forward, loss_and_gradient, Example};
use super::{LossWeights, Method, ModelParams};
use crate::{Error, Result};

/// Elements whose analytic and numeric gradients are both below this are
/// compared on an absolute scale of `REL_FLOOR`.
pub const REL_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct GroupError {
    pub name: &'static str,
    /// `max |a - n| / max(|a|, |n|, REL_FLOOR)` over the group.
    pub max_rel_error: f64,
    pub max_abs_error: f64,
    pub max_abs_gradient: f64,
}

/// Compares the analytic gradient of the training loss of `method` with
/// central finite differences on every parameter of every group.
pub fn gradient_check(
    params: &ModelParams,
    example: Example,
    method: Method,
    weights: Option<&LossWeights>,
    epsilon: f64,
) -> Result<Vec<GroupError>> {
    if !(1e-6..=1e-4).contains(&epsilon) {
        return Err(Error::InvalidArgument(format!(
            "epsilon {epsilon} outside [1e-6, 1e-4]"
        )));
    }
    let mut analytic = ModelParams::zeros(params.dims);
    loss_and_gradient(params, example, method, weights, &mut analytic)?;

    let mut probe = params.clone();
    let names = params.group_names();
    let mut out = Vec::with_capacity(names.len());
    for (g, name) in names.into_iter().enumerate() {
        let mut worst = GroupError {
            name,
            max_rel_error: 0.0,
            max_abs_error: 0.0,
            max_abs_gradient: 0.0,
        };
        for i in 0..params.groups()[g].len() {
            let orig = params.groups()[g][i];
            probe.groups_mut()[g][i] = orig + epsilon;
            let plus = forward(&probe, example, method, weights)?.loss.total;
            probe.groups_mut()[g][i] = orig - epsilon;
            let minus = forward(&probe, example, method, weights)?.loss.total;
            probe.groups_mut()[g][i] = orig;

            let numeric = (plus - minus) / (2.0 * epsilon);
            let a = analytic.groups()[g][i];
            let abs = (a - numeric).abs();
            let rel = abs / a.abs().max(numeric.abs()).max(REL_FLOOR);
            worst.max_rel_error = worst.max_rel_error.max(rel);
            worst.max_abs_error = worst.max_abs_error.max(abs);
            worst.max_abs_gradient = worst.max_abs_gradient.max(a.abs());
        }
        out.push(worst);
    }
    Ok(out)
}
