//! Quantization of T-mesh arc lengths as an exact integer program.
//!
//! One non-negative integer per arc (optionally one per unified arc class),
//! weighted 1/l_a so long arcs are cheap to keep and short ones cheap to
//! drop. Four row families: non-negativity, per-patch opposite-side
//! consistency, validity separation of each trace from its first cone
//! contact, and geometric separation at out-of-cone crossings.
//!
//! `solve` runs branch-and-bound over an exact rational simplex;
//! `brute_force_solve` is the enumeration oracle the solver is audited
//! against.

mod brute;
mod presolve;
mod simplex;
mod solve;

#[cfg(test)]
mod tests;

pub use brute::brute_force_solve;
pub use solve::{solve, SolveBudget};

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num::{BigInt, BigRational, One, Zero};

use crate::mesh::{classify_vertices, expected_valence, QuadMesh, VertexClass, VertexSite};
use crate::tmesh::{TMesh, Trace, TraceIntersections};

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum Sense {
    Eq,
    Ge,
}

impl Sense {
    pub fn label(self) -> &'static str {
        match self {
            Sense::Eq => "=",
            Sense::Ge => ">=",
        }
    }
}

/// Which family a row came from. Every row carries exactly one tag.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum RowTag {
    Nonneg,
    Consistency,
    Validity,
    Geometric,
}

impl RowTag {
    pub fn label(self) -> &'static str {
        match self {
            RowTag::Nonneg => "nonneg",
            RowTag::Consistency => "consistency",
            RowTag::Validity => "validity",
            RowTag::Geometric => "geometric",
        }
    }
}

/// Sparse integer row: terms sorted by variable, coefficients combined and
/// non-zero.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LinRow {
    pub terms: Vec<(usize, i64)>,
    pub sense: Sense,
    pub rhs: i64,
    pub tag: RowTag,
}

impl LinRow {
    pub fn satisfied(&self, q: &[i64]) -> bool {
        let lhs: i64 = self.terms.iter().map(|&(v, c)| c * q[v]).sum();
        match self.sense {
            Sense::Eq => lhs == self.rhs,
            Sense::Ge => lhs >= self.rhs,
        }
    }
}

#[derive(Clone, Debug)]
pub struct IlpModel {
    /// Arc index to variable index; identity unless opposite single-arc
    /// sides were unified.
    pub var_of_arc: Vec<usize>,
    /// Per variable: sum of 1/l_a over the arcs it stands for.
    pub weights: Vec<BigRational>,
    /// Per variable: the arc length before quantization, a feasible point.
    pub initial: Vec<i64>,
    pub rows: Vec<LinRow>,
}

impl IlpModel {
    pub fn vars(&self) -> usize {
        self.weights.len()
    }

    pub fn objective(&self, q: &[i64]) -> BigRational {
        let mut total = BigRational::zero();
        for (v, w) in self.weights.iter().enumerate() {
            if q[v] != 0 {
                total += w * BigRational::from(BigInt::from(q[v]));
            }
        }
        total
    }

    pub fn is_feasible(&self, q: &[i64]) -> bool {
        q.iter().all(|&x| x >= 0) && self.rows.iter().all(|r| r.satisfied(q))
    }

    /// Expands a per-variable assignment to the per-arc map.
    pub fn q_per_arc(&self, q: &[i64]) -> Vec<i64> {
        self.var_of_arc.iter().map(|&v| q[v]).collect()
    }

    /// Row counts by tag, in tag order.
    pub fn tag_counts(&self) -> [usize; 4] {
        let mut counts = [0usize; 4];
        for row in &self.rows {
            counts[row.tag as usize] += 1;
        }
        counts
    }

    pub fn check_invariants(&self, tmesh: &TMesh) -> Result<(), String> {
        if self.var_of_arc.len() != tmesh.arcs.len() {
            return Err("variable map does not cover the arcs".into());
        }
        for (v, w) in self.weights.iter().enumerate() {
            if *w <= BigRational::zero() {
                return Err(format!("variable {v} has non-positive weight"));
            }
        }
        if !self.is_feasible(&self.initial) {
            return Err("initial lengths violate a constraint".into());
        }
        // A variable must be tied down by a consistency row or sit on a
        // single-arc side; anything else would float free of the layout.
        let mut anchored = vec![false; self.vars()];
        for row in &self.rows {
            if row.tag == RowTag::Consistency {
                for &(v, _) in &row.terms {
                    anchored[v] = true;
                }
            }
        }
        for patch in &tmesh.patches {
            for side in &patch.sides {
                if let [sa] = side.as_slice() {
                    anchored[self.var_of_arc[sa.arc]] = true;
                }
            }
        }
        if let Some(v) = anchored.iter().position(|&a| !a) {
            return Err(format!("variable {v} is unanchored"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum QuantStatus {
    Optimal,
    FeasibleBudgetHit,
    Infeasible,
}

impl QuantStatus {
    pub fn label(self) -> &'static str {
        match self {
            QuantStatus::Optimal => "optimal",
            QuantStatus::FeasibleBudgetHit => "feasible_budget_hit",
            QuantStatus::Infeasible => "infeasible",
        }
    }
}

/// Integer lengths per arc. `q` is empty when the model is infeasible.
#[derive(Clone, Debug)]
pub struct Quantization {
    pub q: Vec<i64>,
    pub objective_value: BigRational,
    pub status: QuantStatus,
}

#[derive(Clone, Copy, Debug)]
pub struct QuantConfig {
    /// Waive the validity row of a trace whose first cone contact comes
    /// from the other half of a 3-5 dislocation pair, letting the pair
    /// merge into one regular vertex.
    pub collapse_35: bool,
    /// Patches whose opposite sides are single arcs let both arcs share a
    /// variable instead of carrying an equality row.
    pub unify_opposite_singles: bool,
}

impl Default for QuantConfig {
    fn default() -> Self {
        QuantConfig { collapse_35: true, unify_opposite_singles: false }
    }
}

/// Assembles the quantization program from the T-mesh and its intersection
/// records, one variable per arc.
pub fn build_constraints(
    mesh: &QuadMesh,
    tmesh: &TMesh,
    traces: &[Trace],
    ints: &TraceIntersections,
    collapse_35: bool,
) -> IlpModel {
    build_constraints_with(
        mesh,
        tmesh,
        traces,
        ints,
        &QuantConfig { collapse_35, unify_opposite_singles: false },
    )
}

pub fn build_constraints_with(
    mesh: &QuadMesh,
    tmesh: &TMesh,
    traces: &[Trace],
    ints: &TraceIntersections,
    cfg: &QuantConfig,
) -> IlpModel {
    let classes = classify_vertices(mesh);
    let arcs = tmesh.arcs.len();

    let var_of_arc = if cfg.unify_opposite_singles {
        unify_singles(tmesh)
    } else {
        (0..arcs).collect()
    };
    let nvars = var_of_arc.iter().copied().max().map_or(0, |m| m + 1);

    let mut weights = vec![BigRational::zero(); nvars];
    let mut initial = vec![0i64; nvars];
    for (a, arc) in tmesh.arcs.iter().enumerate() {
        let v = var_of_arc[a];
        let len = arc.len() as i64;
        weights[v] += BigRational::new(BigInt::one(), BigInt::from(len));
        debug_assert!(initial[v] == 0 || initial[v] == len, "unified arcs of unequal length");
        initial[v] = len;
    }

    let mut rows = Vec::new();
    let mut seen: std::collections::BTreeSet<(Vec<(usize, i64)>, bool, i64, RowTag)> =
        std::collections::BTreeSet::new();
    let mut push = |terms: Vec<(usize, i64)>, sense: Sense, rhs: i64, tag: RowTag| {
        if terms.is_empty() {
            return;
        }
        if seen.insert((terms.clone(), sense == Sense::Ge, rhs, tag)) {
            rows.push(LinRow { terms, sense, rhs, tag });
        }
    };

    for v in 0..nvars {
        push(vec![(v, 1)], Sense::Ge, 0, RowTag::Nonneg);
    }

    for patch in &tmesh.patches {
        for (a, b) in [(0usize, 2usize), (1, 3)] {
            let mut terms: BTreeMap<usize, i64> = BTreeMap::new();
            for sa in &patch.sides[a] {
                *terms.entry(var_of_arc[sa.arc]).or_default() += 1;
            }
            for sb in &patch.sides[b] {
                *terms.entry(var_of_arc[sb.arc]).or_default() -= 1;
            }
            terms.retain(|_, c| *c != 0);
            push(terms.into_iter().collect(), Sense::Eq, 0, RowTag::Consistency);
        }
    }

    for (t, tr) in traces.iter().enumerate() {
        let Some(pick) = &ints.validity[t] else { continue };
        if cfg.collapse_35 {
            let star_v = tmesh.nodes[pick.star].vertex;
            if is_35_pair(mesh, &classes, tr.origin, star_v) {
                continue;
            }
        }
        push(sum_row(&var_of_arc, &pick.arcs), Sense::Ge, 1, RowTag::Validity);
    }

    for rec in &ints.records {
        if rec.in_cone_of_i || rec.i == rec.j {
            continue;
        }
        push(sum_row(&var_of_arc, &rec.s_ji), Sense::Ge, 1, RowTag::Geometric);
    }

    IlpModel { var_of_arc, weights, initial, rows }
}

fn sum_row(var_of_arc: &[usize], arcs: &[usize]) -> Vec<(usize, i64)> {
    let mut terms: BTreeMap<usize, i64> = BTreeMap::new();
    for &a in arcs {
        *terms.entry(var_of_arc[a]).or_default() += 1;
    }
    terms.into_iter().collect()
}

/// Cancelling irregular pair off any corner: deviations sum to zero and both
/// sit in the same stratum (interior or on one curve).
fn is_35_pair(mesh: &QuadMesh, classes: &[VertexClass], va: usize, vb: usize) -> bool {
    if va == vb {
        return false;
    }
    let (ca, cb) = (&classes[va], &classes[vb]);
    if !ca.is_irregular() || !cb.is_irregular() {
        return false;
    }
    if ca.site != cb.site || ca.site == VertexSite::Corner {
        return false;
    }
    let da = ca.deviation(expected_valence(mesh, va));
    let db = cb.deviation(expected_valence(mesh, vb));
    da + db == 0 && da != 0
}

fn unify_singles(tmesh: &TMesh) -> Vec<usize> {
    let arcs = tmesh.arcs.len();
    let mut parent: Vec<usize> = (0..arcs).collect();
    fn root(parent: &mut Vec<usize>, mut a: usize) -> usize {
        while parent[a] != a {
            parent[a] = parent[parent[a]];
            a = parent[a];
        }
        a
    }
    for patch in &tmesh.patches {
        for (a, b) in [(0usize, 2usize), (1, 3)] {
            if let ([sa], [sb]) = (patch.sides[a].as_slice(), patch.sides[b].as_slice()) {
                let (ra, rb) = (root(&mut parent, sa.arc), root(&mut parent, sb.arc));
                // Lower root wins so variable ids follow first arc occurrence.
                let (lo, hi) = (ra.min(rb), ra.max(rb));
                parent[hi] = lo;
            }
        }
    }
    let mut ids: BTreeMap<usize, usize> = BTreeMap::new();
    (0..arcs)
        .map(|a| {
            let r = root(&mut parent, a);
            let next = ids.len();
            *ids.entry(r).or_insert(next)
        })
        .collect()
}

/// Total integer area of the quantized layout: per patch, the product of the
/// two adjacent side sums. Diagnostic only.
pub fn integer_area(tmesh: &TMesh, quant: &Quantization) -> i64 {
    tmesh
        .patches
        .iter()
        .map(|p| {
            let sum = |k: usize| -> i64 { p.sides[k].iter().map(|sa| quant.q[sa.arc]).sum() };
            sum(0) * sum(1)
        })
        .sum()
}

/// Plain-text model listing.
///
/// Header `quadcoarse-ilp v1`, then `vars N` with one line per variable
/// (`v{i} w {num}/{den} init {l} arcs {a...}`), then `rows M` with one row
/// per line: `{tag} {sense} {rhs} {+c*v{i}...}`, terms by variable id.
pub fn dump_model(model: &IlpModel) -> String {
    let mut out = String::from("quadcoarse-ilp v1\n");
    let _ = writeln!(out, "vars {}", model.vars());
    for v in 0..model.vars() {
        let w = &model.weights[v];
        let arcs: Vec<String> = model
            .var_of_arc
            .iter()
            .enumerate()
            .filter(|&(_, &x)| x == v)
            .map(|(a, _)| a.to_string())
            .collect();
        let _ = writeln!(
            out,
            "v{v} w {}/{} init {} arcs {}",
            w.numer(),
            w.denom(),
            model.initial[v],
            arcs.join(" ")
        );
    }
    let _ = writeln!(out, "rows {}", model.rows.len());
    for row in &model.rows {
        let _ = write!(out, "{} {} {}", row.tag.label(), row.sense.label(), row.rhs);
        for &(v, c) in &row.terms {
            let _ = write!(out, " {c:+}*v{v}");
        }
        out.push('\n');
    }
    out
}

/// Plain-text quantization listing: status, exact objective, one `a{i} {q}`
/// line per arc.
pub fn dump_quantization(quant: &Quantization) -> String {
    let mut out = String::from("quadcoarse-quant v1\n");
    let _ = writeln!(out, "status {}", quant.status.label());
    let _ = writeln!(
        out,
        "objective {}/{}",
        quant.objective_value.numer(),
        quant.objective_value.denom()
    );
    let _ = writeln!(out, "arcs {}", quant.q.len());
    for (a, q) in quant.q.iter().enumerate() {
        let _ = writeln!(out, "a{a} {q}");
    }
    out
}
