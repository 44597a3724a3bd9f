//! Finite-difference check of the analytic parameter gradient.

use ambisep_core::Result;
use rayon::prelude::*;
use serde::Serialize;

use crate::model::{backward, forward_cached, relu_signature, ModelParams};
use crate::ops::Tensor;
use crate::train::{loss_l1, loss_l1_grad};

/// Gradient-check outcome. The relative error of one parameter is
/// `|a − n| / max(|a|, |n|, 1e-6)` for analytic `a` and numeric `n`.
#[derive(Debug, Clone, Serialize)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    pub worst_param: Option<String>,
    pub checked: usize,
    /// Parameters whose ±ε evaluations fall on different sides of a ReLU or
    /// L1 kink, where a central difference does not estimate the derivative.
    pub skipped_kinks: usize,
    pub analytic: Vec<f64>,
    pub numeric: Vec<f64>,
}

const REL_FLOOR: f64 = 1e-6;

fn loss_and_signature(p: &ModelParams<f64>, tracks: &Tensor<f64>, theta: Option<[f64; 2]>, truth: &[f64]) -> Result<(f64, Vec<bool>)> {
    let (est, cache) = forward_cached(p, tracks, theta)?;
    let mut sig = relu_signature(&cache);
    sig.extend(est.iter().zip(truth).map(|(e, t)| e > t));
    Ok((loss_l1(&est, truth), sig))
}

/// Compares the backward pass of the L1 loss against central differences
/// with step `epsilon` for every parameter, in `f64`.
pub fn gradient_check(
    p: &ModelParams<f64>,
    tracks: &Tensor<f64>,
    theta: Option<[f64; 2]>,
    truth: &[f64],
    epsilon: f64,
) -> Result<GradCheckReport> {
    let (est, cache) = forward_cached(p, tracks, theta)?;
    let analytic = backward(p, &cache, &loss_l1_grad(&est, truth));
    let numeric = (0..p.values.len())
        .into_par_iter()
        .map_init(
            || p.clone(),
            |q, i| {
                q.values[i] = p.values[i] + epsilon;
                let plus = loss_and_signature(q, tracks, theta, truth);
                q.values[i] = p.values[i] - epsilon;
                let minus = loss_and_signature(q, tracks, theta, truth);
                q.values[i] = p.values[i];
                let ((lp, sp), (lm, sm)) = (plus?, minus?);
                Ok(((lp - lm) / (2.0 * epsilon), sp != sm))
            },
        )
        .collect::<Result<Vec<_>>>()?;
    let mut report = GradCheckReport {
        max_rel_error: 0.0,
        worst_param: None,
        checked: 0,
        skipped_kinks: 0,
        analytic: analytic.clone(),
        numeric: numeric.iter().map(|&(n, _)| n).collect(),
    };
    for (i, (&a, &(n, kink))) in analytic.iter().zip(&numeric).enumerate() {
        if kink {
            report.skipped_kinks += 1;
            continue;
        }
        report.checked += 1;
        let err = (a - n).abs() / a.abs().max(n.abs()).max(REL_FLOOR);
        if err > report.max_rel_error {
            report.max_rel_error = err;
            report.worst_param = p.layout.entries.iter().find(|s| s.range().contains(&i)).map(|s| format!("{}[{}]", s.name, i - s.offset));
        }
    }
    Ok(report)
}
