//! Fidelity statistics: per-item averages over random reduced datasets and
//! ensemble mean and spread.

use ndarray::{Array2, ArrayView2};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::datasets::Task;
use crate::error::{check_dim, Error, Result};
use crate::ffnn::{predict_batch, Head, NetworkParams};
use crate::measurement::Reduction;
use crate::rng::stream;

/// Fidelity `|Tr(A B†)| / √(Tr A A† · Tr B B†)` evaluated on
/// coordinates in an orthogonal basis whose elements all share one norm
/// (Pauli coefficients, or any real vector).
pub fn vector_fidelity(a: &[f64], b: &[f64]) -> Result<f64> {
    check_dim(a.len(), b.len())?;
    let ab: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let aa: f64 = a.iter().map(|x| x * x).sum();
    let bb: f64 = b.iter().map(|y| y * y).sum();
    if aa == 0.0 || bb == 0.0 {
        return Err(Error::UndefinedFidelity);
    }
    Ok(ab.abs() / (aa * bb).sqrt())
}

/// Fidelity between two χ matrices given in compact form. Each
/// off-diagonal slot stands for a conjugate pair and so counts twice.
pub fn compact_chi_fidelity(a: &[f64], b: &[f64]) -> Result<f64> {
    check_dim(a.len(), b.len())?;
    let d = (a.len() as f64).sqrt() as usize;
    check_dim(a.len(), d * d)?;
    let (mut ab, mut aa, mut bb) = (0.0, 0.0, 0.0);
    for (k, (x, y)) in a.iter().zip(b).enumerate() {
        let w = if k / d == k % d { 1.0 } else { 2.0 };
        ab += w * x * y;
        aa += w * x * x;
        bb += w * y * y;
    }
    if aa == 0.0 || bb == 0.0 {
        return Err(Error::UndefinedFidelity);
    }
    Ok(ab.abs() / (aa * bb).sqrt())
}

/// The fidelity that matches a network head's output representation.
pub fn head_fidelity(head: Head, a: &[f64], b: &[f64]) -> Result<f64> {
    match head {
        Head::Process { .. } => compact_chi_fidelity(a, b),
        Head::Raw | Head::State { .. } => vector_fidelity(a, b),
    }
}

/// The reduction rule that matches a network head's input.
pub fn head_reduction(head: Head) -> Reduction {
    match head {
        Head::State { .. } => Task::Qst.reduction(),
        Head::Process { .. } | Head::Raw => Task::Qpt.reduction(),
    }
}

/// Mean fidelity between predictions from `repeats` independently reduced
/// copies of `full_input` and `reference`.
///
/// `predict` maps a batch of reduced inputs (one per row) to a batch of
/// outputs; `fidelity` compares one output row with the reference.
#[allow(clippy::too_many_arguments)]
pub fn repeated_mask_fidelity<R, P, F>(
    full_input: &[f64],
    reference: &[f64],
    reduction: Reduction,
    m_data: usize,
    repeats: usize,
    rng: &mut R,
    predict: P,
    fidelity: F,
) -> Result<f64>
where
    R: Rng + ?Sized,
    P: Fn(ArrayView2<f64>) -> Result<Array2<f64>>,
    F: Fn(&[f64], &[f64]) -> Result<f64>,
{
    if repeats == 0 {
        return Err(Error::InvalidConfig("repeats must be at least 1".into()));
    }
    let len = full_input.len();
    let mut batch = Array2::zeros((repeats, len));
    for mut row in batch.rows_mut() {
        let reduced = reduction.apply(full_input, m_data, rng)?;
        row.assign(&ndarray::ArrayView1::from(&reduced.values));
    }
    let out = predict(batch.view())?;
    check_dim(repeats, out.nrows())?;
    let mut total = 0.0;
    for row in out.rows() {
        total += fidelity(&row.to_vec(), reference)?;
    }
    Ok(total / repeats as f64)
}

/// Mean and sample standard deviation of per-item fidelities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityStats {
    pub mean: f64,
    /// Uses the `N − 1` denominator; 0 for a single item.
    pub std: f64,
    pub count: usize,
    pub per_item: Vec<f64>,
}

pub fn ensemble_stats(per_item: &[f64]) -> Result<FidelityStats> {
    if per_item.is_empty() {
        return Err(Error::Empty("fidelity list"));
    }
    let n = per_item.len() as f64;
    let mean = per_item.iter().sum::<f64>() / n;
    let std = if per_item.len() > 1 {
        (per_item.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    Ok(FidelityStats { mean, std, count: per_item.len(), per_item: per_item.to_vec() })
}

/// Evaluates a trained network on a test set. Row `i` of `full_inputs` is
/// reduced `repeats` times to `m_data` entries using stream `(seed, i)`, and
/// the predictions are compared with row `i` of `references`.
pub fn evaluate_network(
    params: &NetworkParams,
    full_inputs: ArrayView2<f64>,
    references: ArrayView2<f64>,
    m_data: usize,
    repeats: usize,
    seed: u64,
) -> Result<FidelityStats> {
    check_dim(full_inputs.nrows(), references.nrows())?;
    let head = params.config.head;
    let reduction = head_reduction(head);
    let max_m = reduction.max_m(full_inputs.ncols());
    if m_data > max_m {
        return Err(Error::OutOfRange(format!("M_data {m_data} exceeds {max_m}")));
    }
    let per_item = (0..full_inputs.nrows())
        .into_par_iter()
        .map(|i| {
            repeated_mask_fidelity(
                &full_inputs.row(i).to_vec(),
                &references.row(i).to_vec(),
                reduction,
                m_data,
                repeats,
                &mut stream(seed, i as u64),
                |x| predict_batch(params, x),
                |a, b| head_fidelity(head, a, b),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    ensemble_stats(&per_item)
}
