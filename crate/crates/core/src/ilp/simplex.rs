//! Two-phase primal simplex over exact rationals. Dense tableau, Bland's
//! rule throughout, so no cycling and no tolerance constants anywhere.

use num::{BigRational, One, Zero};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub(super) enum Rel {
    Eq,
    Ge,
    Le,
}

#[derive(Clone, Debug)]
pub(super) struct LpRow {
    pub terms: Vec<(usize, BigRational)>,
    pub rel: Rel,
    pub rhs: BigRational,
}

pub(super) enum LpOutcome {
    Optimal { x: Vec<BigRational>, objective: BigRational },
    Infeasible,
    Unbounded,
}

struct Tableau {
    t: Vec<Vec<BigRational>>,
    b: Vec<BigRational>,
    basis: Vec<usize>,
}

impl Tableau {
    fn pivot(&mut self, r: &mut [BigRational], r_rhs: &mut BigRational, pr: usize, pc: usize) {
        let piv = self.t[pr][pc].clone();
        for x in &mut self.t[pr] {
            *x /= &piv;
        }
        self.b[pr] /= &piv;
        let (pivot_row, pivot_b) = (self.t[pr].clone(), self.b[pr].clone());
        for i in 0..self.t.len() {
            if i == pr || self.t[i][pc].is_zero() {
                continue;
            }
            let f = self.t[i][pc].clone();
            for (x, p) in self.t[i].iter_mut().zip(&pivot_row) {
                *x -= &f * p;
            }
            self.b[i] -= &f * &pivot_b;
        }
        if !r[pc].is_zero() {
            let f = r[pc].clone();
            for (x, p) in r.iter_mut().zip(&pivot_row) {
                *x -= &f * p;
            }
            *r_rhs -= &f * &pivot_b;
        }
        self.basis[pr] = pc;
    }

    /// Runs Bland-rule iterations to optimality. Err means unbounded.
    fn optimize(&mut self, r: &mut [BigRational], r_rhs: &mut BigRational) -> Result<(), ()> {
        let zero = BigRational::zero();
        loop {
            let Some(pc) = r.iter().position(|x| *x < zero) else {
                return Ok(());
            };
            let mut leave: Option<(BigRational, usize, usize)> = None;
            for i in 0..self.t.len() {
                if self.t[i][pc] <= zero {
                    continue;
                }
                let ratio = &self.b[i] / &self.t[i][pc];
                let better = match &leave {
                    None => true,
                    Some((lr, lb, _)) => ratio < *lr || (ratio == *lr && self.basis[i] < *lb),
                };
                if better {
                    leave = Some((ratio, self.basis[i], i));
                }
            }
            let Some((_, _, pr)) = leave else {
                return Err(());
            };
            self.pivot(r, r_rhs, pr, pc);
        }
    }
}

/// Minimizes `cost . x` over `x >= 0` subject to `rows`.
pub(super) fn solve_lp(n: usize, rows: &[LpRow], cost: &[BigRational]) -> LpOutcome {
    let zero = BigRational::zero();
    let one = BigRational::one();

    // Densify with non-negative right-hand sides.
    let mut dense: Vec<(Vec<BigRational>, Rel, BigRational)> = Vec::with_capacity(rows.len());
    for row in rows {
        let mut acc = vec![zero.clone(); n];
        for (v, c) in &row.terms {
            acc[*v] += c;
        }
        let mut rhs = row.rhs.clone();
        let mut rel = row.rel;
        if rhs < zero {
            for x in &mut acc {
                *x = -x.clone();
            }
            rhs = -rhs;
            rel = match rel {
                Rel::Ge => Rel::Le,
                Rel::Le => Rel::Ge,
                Rel::Eq => Rel::Eq,
            };
        }
        dense.push((acc, rel, rhs));
    }

    let m = dense.len();
    let aux = dense.iter().filter(|(_, rel, _)| *rel != Rel::Eq).count();
    let art = dense.iter().filter(|(_, rel, _)| *rel != Rel::Le).count();
    let art_start = n + aux;
    let ncols = art_start + art;

    let mut tab = Tableau {
        t: Vec::with_capacity(m),
        b: Vec::with_capacity(m),
        basis: Vec::with_capacity(m),
    };
    let (mut next_aux, mut next_art) = (n, art_start);
    for (acc, rel, rhs) in dense {
        let mut full = vec![zero.clone(); ncols];
        full[..n].clone_from_slice(&acc);
        let basic = match rel {
            Rel::Le => {
                full[next_aux] = one.clone();
                next_aux += 1;
                next_aux - 1
            }
            Rel::Ge => {
                full[next_aux] = -one.clone();
                next_aux += 1;
                full[next_art] = one.clone();
                next_art += 1;
                next_art - 1
            }
            Rel::Eq => {
                full[next_art] = one.clone();
                next_art += 1;
                next_art - 1
            }
        };
        tab.t.push(full);
        tab.b.push(rhs);
        tab.basis.push(basic);
    }

    if art > 0 {
        // Phase 1: minimize the artificial sum, starting from the basis of
        // artificials (reduced costs = 1 on artificials, eliminated).
        let mut r = vec![zero.clone(); ncols];
        for c in art_start..ncols {
            r[c] = one.clone();
        }
        let mut r_rhs = zero.clone();
        for i in 0..m {
            if tab.basis[i] >= art_start {
                let row = tab.t[i].clone();
                for (x, p) in r.iter_mut().zip(&row) {
                    *x -= p;
                }
                r_rhs -= &tab.b[i];
            }
        }
        if tab.optimize(&mut r, &mut r_rhs).is_err() {
            unreachable!("phase-1 objective is bounded below by zero");
        }
        if -&r_rhs > zero {
            return LpOutcome::Infeasible;
        }
        // Kick leftover artificials out of the basis; rows that cannot
        // pivot are redundant and dropped.
        let mut drop_rows = Vec::new();
        for i in 0..m {
            if tab.basis[i] < art_start {
                continue;
            }
            match (0..art_start).find(|&j| !tab.t[i][j].is_zero()) {
                Some(j) => tab.pivot(&mut r, &mut r_rhs, i, j),
                None => drop_rows.push(i),
            }
        }
        if !drop_rows.is_empty() {
            let keep = |i: &usize| !drop_rows.contains(i);
            tab.t = tab.t.iter().enumerate().filter(|(i, _)| keep(i)).map(|(_, r)| r.clone()).collect();
            tab.b = tab.b.iter().enumerate().filter(|(i, _)| keep(i)).map(|(_, x)| x.clone()).collect();
            tab.basis =
                tab.basis.iter().enumerate().filter(|(i, _)| keep(i)).map(|(_, &x)| x).collect();
        }
        for row in &mut tab.t {
            row.truncate(art_start);
        }
    }

    // Phase 2 on the real objective.
    let ncols = art_start;
    let mut ext = vec![zero.clone(); ncols];
    ext[..n].clone_from_slice(&cost[..n]);
    let mut r = ext.clone();
    let mut r_rhs = zero.clone();
    for i in 0..tab.t.len() {
        let cb = ext[tab.basis[i]].clone();
        if cb.is_zero() {
            continue;
        }
        let row = tab.t[i].clone();
        for (x, p) in r.iter_mut().zip(&row) {
            *x -= &cb * p;
        }
        r_rhs -= &cb * &tab.b[i];
    }
    if tab.optimize(&mut r, &mut r_rhs).is_err() {
        return LpOutcome::Unbounded;
    }

    let mut x = vec![zero.clone(); n];
    for (i, &bv) in tab.basis.iter().enumerate() {
        if bv < n {
            x[bv] = tab.b[i].clone();
        }
    }
    let objective = cost.iter().zip(&x).map(|(c, v)| c * v).sum();
    LpOutcome::Optimal { x, objective }
}
