//! Exact model shrinking ahead of the rational simplex. Equality rows that
//! pin a variable fix it, two-term cancellation rows merge their variables,
//! same-sign zero-sum rows zero theirs, and rows that become trivial or
//! duplicated are dropped. Every reduction is an exact rewrite of the
//! solution set, so the reduced program's optima map back bijectively.

use std::collections::{BTreeMap, BTreeSet};

use num::BigRational;

use super::{IlpModel, LinRow, Sense};
use crate::extraction::UnionFind;

/// Where an original variable went.
#[derive(Clone, Copy, Debug)]
pub(super) enum VarState {
    /// Reduced variable index.
    Free(usize),
    Fixed(i64),
}

pub(super) struct Reduced {
    pub n: usize,
    pub rows: Vec<LinRow>,
    pub weights: Vec<BigRational>,
    /// Initial point projected onto the reduced variables. Only meaningful
    /// when the original initial point is feasible.
    pub initial: Vec<i64>,
    back: Vec<VarState>,
}

impl Reduced {
    /// Expands a reduced assignment to the original variables.
    pub fn expand(&self, q: &[i64]) -> Vec<i64> {
        self.back
            .iter()
            .map(|s| match *s {
                VarState::Free(r) => q[r],
                VarState::Fixed(c) => c,
            })
            .collect()
    }
}

pub(super) enum Presolve {
    Infeasible,
    Reduced(Reduced),
}

pub(super) fn presolve(model: &IlpModel) -> Presolve {
    let n = model.vars();
    let mut uf = UnionFind::new(n);
    let mut fixed: Vec<Option<i64>> = vec![None; n];

    // Fixing the root keeps the class consistent even when members merge
    // after one of them was fixed.
    fn fix(uf: &mut UnionFind, fixed: &mut [Option<i64>], v: usize, c: i64) -> bool {
        if c < 0 {
            return false;
        }
        let r = uf.find(v);
        match fixed[r] {
            Some(prev) => prev == c,
            None => {
                fixed[r] = Some(c);
                true
            }
        }
    }

    let mut rows: Vec<LinRow> = model.rows.clone();
    loop {
        let mut changed = false;
        let mut kept: Vec<LinRow> = Vec::with_capacity(rows.len());
        let mut seen: BTreeSet<(Vec<(usize, i64)>, Sense, i64)> = BTreeSet::new();

        for row in &rows {
            // Rewrite onto class representatives and fold in fixed values.
            let mut acc: BTreeMap<usize, i64> = BTreeMap::new();
            let mut rhs = row.rhs;
            for &(v, c) in &row.terms {
                let r = uf.find(v);
                match fixed[r] {
                    Some(val) => rhs -= c * val,
                    None => {
                        let e = acc.entry(r).or_insert(0);
                        *e += c;
                        if *e == 0 {
                            acc.remove(&r);
                        }
                    }
                }
            }
            let terms: Vec<(usize, i64)> = acc.into_iter().collect();

            match (row.sense, terms.len()) {
                (Sense::Eq, 0) => {
                    if rhs != 0 {
                        return Presolve::Infeasible;
                    }
                    changed = true;
                    continue;
                }
                (Sense::Ge, 0) => {
                    if rhs > 0 {
                        return Presolve::Infeasible;
                    }
                    changed = true;
                    continue;
                }
                (Sense::Eq, 1) => {
                    let (v, c) = terms[0];
                    if rhs % c != 0 || !fix(&mut uf, &mut fixed, v, rhs / c) {
                        return Presolve::Infeasible;
                    }
                    changed = true;
                    continue;
                }
                (Sense::Eq, 2) if rhs == 0 && terms[0].1 == -terms[1].1 => {
                    // Both roots are unfixed here: fixed ones were folded
                    // into the right-hand side above, so no fix can be
                    // orphaned by the union.
                    uf.union(terms[0].0, terms[1].0);
                    changed = true;
                    continue;
                }
                (Sense::Eq, _) if rhs == 0 && same_sign(&terms) => {
                    for &(v, _) in &terms {
                        if !fix(&mut uf, &mut fixed, v, 0) {
                            return Presolve::Infeasible;
                        }
                    }
                    changed = true;
                    continue;
                }
                (Sense::Ge, _) if rhs <= 0 && terms.iter().all(|&(_, c)| c > 0) => {
                    // Non-negative variables satisfy it unconditionally.
                    changed = true;
                    continue;
                }
                _ => {}
            }

            if seen.insert((terms.clone(), row.sense, rhs)) {
                kept.push(LinRow { terms, sense: row.sense, rhs, tag: row.tag });
            } else {
                changed = true;
            }
        }

        rows = kept;
        if !changed {
            break;
        }
    }

    // Reduced ids in ascending representative order, so the reduced
    // lexicographic order agrees with the original one.
    let mut rid: Vec<Option<usize>> = vec![None; n];
    let mut weights: Vec<BigRational> = Vec::new();
    let mut initial: Vec<i64> = Vec::new();
    for v in 0..n {
        if uf.find(v) == v && fixed[v].is_none() {
            rid[v] = Some(weights.len());
            weights.push(BigRational::from_integer(0.into()));
            initial.push(model.initial[v]);
        }
    }
    let mut back = Vec::with_capacity(n);
    for v in 0..n {
        let r = uf.find(v);
        match fixed[r] {
            Some(c) => back.push(VarState::Fixed(c)),
            None => {
                let id = rid[r].expect("unfixed root has a reduced id");
                weights[id] += &model.weights[v];
                back.push(VarState::Free(id));
            }
        }
    }

    let rows = rows
        .into_iter()
        .map(|row| LinRow {
            terms: row
                .terms
                .iter()
                .map(|&(v, c)| (rid[v].expect("kept rows touch only free variables"), c))
                .collect(),
            ..row
        })
        .collect();

    Presolve::Reduced(Reduced { n: weights.len(), rows, weights, initial, back })
}

fn same_sign(terms: &[(usize, i64)]) -> bool {
    terms.iter().all(|&(_, c)| c > 0) || terms.iter().all(|&(_, c)| c < 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ilp::RowTag;

    fn model(n: usize, rows: Vec<LinRow>) -> IlpModel {
        IlpModel {
            var_of_arc: (0..n).collect(),
            weights: (0..n).map(|k| BigRational::from_integer((k as i64 + 1).into())).collect(),
            initial: vec![1; n],
            rows,
        }
    }

    fn eq(terms: &[(usize, i64)], rhs: i64) -> LinRow {
        LinRow { terms: terms.to_vec(), sense: Sense::Eq, rhs, tag: RowTag::Consistency }
    }

    fn ge(terms: &[(usize, i64)], rhs: i64) -> LinRow {
        LinRow { terms: terms.to_vec(), sense: Sense::Ge, rhs, tag: RowTag::Validity }
    }

    #[test]
    fn merges_chains_and_sums_weights() {
        // x0 == x1 == x2, one validity row over the class.
        let m = model(
            3,
            vec![eq(&[(0, 1), (1, -1)], 0), eq(&[(1, 2), (2, -2)], 0), ge(&[(0, 1)], 1)],
        );
        let red = match presolve(&m) {
            Presolve::Reduced(r) => r,
            Presolve::Infeasible => panic!("feasible"),
        };
        assert_eq!(red.n, 1);
        assert_eq!(red.rows, vec![ge(&[(0, 1)], 1)]);
        assert_eq!(red.weights[0], BigRational::from_integer(6.into()));
        assert_eq!(red.expand(&[7]), vec![7, 7, 7]);
    }

    #[test]
    fn fixes_singletons_and_propagates() {
        // 2*x1 == 4 pins x1 = 2; then x0 + x1 == 5 pins x0 = 3.
        let m = model(2, vec![eq(&[(1, 2)], 4), eq(&[(0, 1), (1, 1)], 5)]);
        let red = match presolve(&m) {
            Presolve::Reduced(r) => r,
            Presolve::Infeasible => panic!("feasible"),
        };
        assert_eq!(red.n, 0);
        assert!(red.rows.is_empty());
        assert_eq!(red.expand(&[]), vec![3, 2]);
    }

    #[test]
    fn zero_sum_rows_zero_their_variables() {
        let m = model(3, vec![eq(&[(0, 1), (1, 3)], 0), ge(&[(2, 1)], 1)]);
        let red = match presolve(&m) {
            Presolve::Reduced(r) => r,
            Presolve::Infeasible => panic!("feasible"),
        };
        assert_eq!(red.n, 1);
        assert_eq!(red.expand(&[4]), vec![0, 0, 4]);
    }

    #[test]
    fn detects_conflicts() {
        for rows in [
            vec![eq(&[(0, 1)], 3), eq(&[(0, 1)], 4)],
            vec![eq(&[(0, 2)], 3)],
            vec![eq(&[(0, 1)], -1)],
            vec![eq(&[(0, 1), (1, -1)], 0), eq(&[(0, 1)], 1), eq(&[(1, 1)], 2)],
            vec![ge(&[], 1)],
        ] {
            assert!(matches!(presolve(&model(2, rows)), Presolve::Infeasible));
        }
    }

    #[test]
    fn trivial_ge_rows_are_dropped_and_duplicates_collapse() {
        let m = model(
            2,
            vec![ge(&[(0, 1), (1, 1)], 0), ge(&[(0, 1), (1, 1)], 2), ge(&[(0, 1), (1, 1)], 2)],
        );
        let red = match presolve(&m) {
            Presolve::Reduced(r) => r,
            Presolve::Infeasible => panic!("feasible"),
        };
        assert_eq!(red.n, 2);
        assert_eq!(red.rows.len(), 1);
        assert_eq!(red.rows[0].rhs, 2);
    }
}
