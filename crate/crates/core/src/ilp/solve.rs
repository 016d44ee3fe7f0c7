//! Branch-and-bound over the exact LP relaxation. All comparisons are
//! rational, so the optimum certificate is exact, and the incumbent
//! tie-break (lexicographically smallest assignment) makes the answer a
//! pure function of the model.

use std::time::{Duration, Instant};

use num::{BigRational, Signed, ToPrimitive, Zero};

use super::presolve::{presolve, Presolve};
use super::simplex::{solve_lp, LpOutcome, LpRow, Rel};
use super::{IlpModel, QuantStatus, Quantization, Sense};

#[derive(Clone, Copy, Debug)]
pub struct SolveBudget {
    pub max_nodes: usize,
    pub max_time: Duration,
}

impl Default for SolveBudget {
    fn default() -> Self {
        SolveBudget { max_nodes: 100_000, max_time: Duration::from_secs(30) }
    }
}

#[derive(Clone)]
struct Node {
    lo: Vec<i64>,
    hi: Vec<Option<i64>>,
}

pub fn solve(model: &IlpModel, budget: &SolveBudget) -> Quantization {
    // Shrink the program first; the branch-and-bound then runs entirely on
    // the reduced variables and the answer expands back at the end.
    let red = match presolve(model) {
        Presolve::Infeasible => {
            return Quantization {
                q: Vec::new(),
                objective_value: BigRational::zero(),
                status: QuantStatus::Infeasible,
            }
        }
        Presolve::Reduced(r) => r,
    };
    log::debug!(
        "presolve: {} vars / {} rows -> {} vars / {} rows",
        model.vars(),
        model.rows.len(),
        red.n,
        red.rows.len()
    );
    let n = red.n;
    let reduced_objective = |q: &[i64]| -> BigRational {
        q.iter().zip(&red.weights).map(|(&x, w)| w * BigRational::from_integer(x.into())).sum()
    };
    let base: Vec<LpRow> = red
        .rows
        .iter()
        .map(|row| LpRow {
            terms: row.terms.iter().map(|&(v, c)| (v, BigRational::from_integer(c.into()))).collect(),
            rel: match row.sense {
                Sense::Eq => Rel::Eq,
                Sense::Ge => Rel::Ge,
            },
            rhs: BigRational::from_integer(row.rhs.into()),
        })
        .collect();

    // The initial lengths seed the incumbent whenever they are feasible, so
    // budget exhaustion still returns a usable point.
    let mut incumbent: Option<(BigRational, Vec<i64>)> = (model.initial.len() == model.vars()
        && model.is_feasible(&model.initial))
    .then(|| (reduced_objective(&red.initial), red.initial.clone()));

    let start = Instant::now();
    let mut nodes_used = 0usize;
    let mut exhausted = false;
    let mut stack = vec![Node { lo: vec![0; n], hi: vec![None; n] }];

    while let Some(node) = stack.pop() {
        if nodes_used >= budget.max_nodes || start.elapsed() >= budget.max_time {
            exhausted = true;
            break;
        }
        nodes_used += 1;

        let mut rows = base.clone();
        for v in 0..n {
            if node.lo[v] > 0 {
                rows.push(bound_row(v, Rel::Ge, node.lo[v]));
            }
            if let Some(h) = node.hi[v] {
                rows.push(bound_row(v, Rel::Le, h));
            }
        }

        let (x, lp_obj) = match solve_lp(n, &rows, &red.weights) {
            LpOutcome::Infeasible => continue,
            LpOutcome::Unbounded => {
                // Positive weights keep every relaxation bounded; reaching
                // this means the model broke its own invariant.
                log::error!("LP relaxation unbounded; pruning node");
                continue;
            }
            LpOutcome::Optimal { x, objective } => (x, objective),
        };

        if let Some((best_obj, _)) = &incumbent {
            // Equal bounds stay open: a subtree at the incumbent objective
            // may still hold a lexicographically smaller assignment.
            if lp_obj > *best_obj {
                continue;
            }
        }

        if let Some(qv) = integral(&x) {
            let obj = reduced_objective(&qv);
            let better = match &incumbent {
                None => true,
                Some((b, qb)) => obj < *b || (obj == *b && qv < *qb),
            };
            if better {
                incumbent = Some((obj, qv));
            }
            continue;
        }

        // Most fractional variable, ties to the lowest id; floor branch is
        // pushed last so depth-first search dives toward small values.
        let v = branch_var(&x);
        let fl = x[v].floor().to_integer().to_i64().expect("branch value fits i64");
        let mut up = node.clone();
        up.lo[v] = up.lo[v].max(fl + 1);
        let mut down = node;
        down.hi[v] = Some(down.hi[v].map_or(fl, |h| h.min(fl)));
        stack.push(up);
        stack.push(down);
    }

    log::debug!("branch and bound: {nodes_used} nodes in {:?}", start.elapsed());
    match incumbent {
        Some((_, qv)) => {
            let q = red.expand(&qv);
            Quantization {
                objective_value: model.objective(&q),
                q: model.q_per_arc(&q),
                status: if exhausted {
                    QuantStatus::FeasibleBudgetHit
                } else {
                    QuantStatus::Optimal
                },
            }
        }
        None => Quantization {
            q: Vec::new(),
            objective_value: BigRational::zero(),
            // Without an incumbent, exhaustion proves nothing either way.
            status: if exhausted {
                QuantStatus::FeasibleBudgetHit
            } else {
                QuantStatus::Infeasible
            },
        },
    }
}

fn bound_row(v: usize, rel: Rel, rhs: i64) -> LpRow {
    LpRow {
        terms: vec![(v, BigRational::from_integer(1.into()))],
        rel,
        rhs: BigRational::from_integer(rhs.into()),
    }
}

fn integral(x: &[BigRational]) -> Option<Vec<i64>> {
    x.iter()
        .map(|v| if v.is_integer() { v.to_integer().to_i64() } else { None })
        .collect()
}

fn branch_var(x: &[BigRational]) -> usize {
    let mut best = 0usize;
    let mut best_score = BigRational::zero();
    for (v, val) in x.iter().enumerate() {
        let frac = val - val.floor();
        let score = (&frac).min(&(BigRational::from_integer(1.into()) - &frac)).clone();
        debug_assert!(!score.is_negative());
        if score > best_score {
            best_score = score;
            best = v;
        }
    }
    best
}
