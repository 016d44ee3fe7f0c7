//! Exhaustive enumeration oracle. Defines ground truth for the solver on
//! small boxes; never used in the pipeline itself.

use num::{BigRational, Zero};

use crate::error::IlpError;

use super::{IlpModel, QuantStatus, Quantization};

/// Enumerates every assignment in `0..=box_hi` per variable and returns the
/// exact optimum, lexicographically smallest among ties. The box defaults to
/// the initial lengths: with positive weights and rows the initial point
/// satisfies, no optimum needs to exceed it.
pub fn brute_force_solve(model: &IlpModel, box_hi: Option<&[i64]>) -> Result<Quantization, IlpError> {
    let bounds: Vec<i64> = match box_hi {
        Some(b) => b.to_vec(),
        None => model.initial.clone(),
    };
    assert_eq!(bounds.len(), model.vars(), "box does not match variable count");
    let states: f64 = bounds.iter().map(|&b| b as f64 + 1.0).product();
    if states > 1e7 {
        return Err(IlpError::TooLarge { states });
    }

    let n = model.vars();
    let mut q = vec![0i64; n];
    let mut best: Option<(BigRational, Vec<i64>)> = None;
    'search: loop {
        if model.is_feasible(&q) {
            let obj = model.objective(&q);
            // Strict improvement only: enumeration is lexicographically
            // ascending, so the first optimum seen is the smallest.
            if best.as_ref().map_or(true, |(b, _)| obj < *b) {
                best = Some((obj, q.clone()));
            }
        }
        let mut i = n;
        loop {
            if i == 0 {
                break 'search;
            }
            i -= 1;
            if q[i] < bounds[i] {
                q[i] += 1;
                break;
            }
            q[i] = 0;
        }
    }

    Ok(match best {
        Some((obj, qv)) => Quantization {
            q: model.q_per_arc(&qv),
            objective_value: obj,
            status: QuantStatus::Optimal,
        },
        None => Quantization {
            q: Vec::new(),
            objective_value: BigRational::zero(),
            status: QuantStatus::Infeasible,
        },
    })
}
