//! Winslow smoothing on the block-structured mesh with projection back onto
//! the geometry proxy after every move.
//!
//! Regular interior vertices take the 9-point finite-difference stencil of
//! the Winslow equations; irregular interior vertices fall back to a uniform
//! Laplacian; curve vertices relax in arc-length parameter space and stay on
//! their polyline by construction; corners never move. Every displacement is
//! under-relaxed by 0.7.

use crate::extraction::{BlockStructuredMesh, FineKind};
use crate::geom::Vec3;
use crate::mesh::QuadMesh;

use super::proxy::GeometryProxy;
use super::quality;

const RELAX: f64 = 0.7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmoothMode {
    /// Reads the previous iterate only. Deterministic regardless of update
    /// order, so safe to parallelize.
    Jacobi,
    /// In-place sweeps in vertex order. Single threaded.
    GaussSeidel,
}

#[derive(Debug)]
pub struct SmoothResult {
    pub block: BlockStructuredMesh,
    pub iters: usize,
    pub converged: bool,
    /// Largest vertex move of the last iteration.
    pub max_displacement: f64,
}

enum Plan {
    Fixed,
    /// Relax along curve arc length. A neighbor with a cached parameter is
    /// pinned there (corner or foreign-curve junction); otherwise its
    /// parameter is read live.
    OnCurve { curve: usize, nbrs: [usize; 2], pinned: [Option<f64>; 2] },
    /// Edge neighbors n0..n3 then diagonals d0..d3, d_i between n_i and
    /// n_{i+1}. The stencil is invariant to where the cycle starts and to
    /// its handedness.
    Stencil { ring: [usize; 8] },
    Laplacian { nbrs: Vec<usize> },
}

pub fn winslow_smooth(
    block: BlockStructuredMesh,
    proxy: &GeometryProxy,
    max_iters: usize,
    tol: f64,
) -> SmoothResult {
    winslow_smooth_with(block, proxy, max_iters, tol, SmoothMode::Jacobi)
}

pub fn winslow_smooth_with(
    mut block: BlockStructuredMesh,
    proxy: &GeometryProxy,
    max_iters: usize,
    tol: f64,
    mode: SmoothMode,
) -> SmoothResult {
    let fine = block.to_quad_mesh().expect("smoothing input round-trips as a quad mesh");
    let plans = build_plans(&block, &fine, proxy);

    let mut pos = block.vertices.clone();
    let mut params = vec![0.0f64; pos.len()];
    for (v, kind) in block.vertex_kind.iter().enumerate() {
        if let FineKind::Curve(c) = *kind {
            let (t, q) = proxy.curve(c).project(pos[v]);
            params[v] = t;
            pos[v] = q;
        }
    }

    let mut iters = 0;
    let mut converged = false;
    let mut max_disp = 0.0f64;
    let mut next_pos = pos.clone();
    let mut next_params = params.clone();
    while iters < max_iters {
        iters += 1;
        max_disp = 0.0;
        match mode {
            SmoothMode::Jacobi => {
                for v in 0..pos.len() {
                    let (p, t) = step(v, &plans[v], &pos, &params, proxy);
                    max_disp = max_disp.max(pos[v].dist(p));
                    next_pos[v] = p;
                    next_params[v] = t;
                }
                std::mem::swap(&mut pos, &mut next_pos);
                std::mem::swap(&mut params, &mut next_params);
            }
            SmoothMode::GaussSeidel => {
                for v in 0..pos.len() {
                    let (p, t) = step(v, &plans[v], &pos, &params, proxy);
                    max_disp = max_disp.max(pos[v].dist(p));
                    pos[v] = p;
                    params[v] = t;
                }
            }
        }
        if log::log_enabled!(log::Level::Debug) {
            let report = quality(&pos, fine.quads());
            log::debug!(
                "winslow iter {iters}: max disp {max_disp:.3e}, min jacobian {:.4}",
                report.min
            );
        }
        if max_disp < tol {
            converged = true;
            break;
        }
    }

    block.vertices = pos;
    SmoothResult { block, iters, converged, max_displacement: max_disp }
}

fn step(
    v: usize,
    plan: &Plan,
    pos: &[Vec3],
    params: &[f64],
    proxy: &GeometryProxy,
) -> (Vec3, f64) {
    let here = pos[v];
    match plan {
        Plan::Fixed => (here, params[v]),
        Plan::OnCurve { curve, nbrs, pinned } => {
            let geom = proxy.curve(*curve);
            let t = params[v];
            let ta = pinned[0].unwrap_or_else(|| params[nbrs[0]]);
            let tb = pinned[1].unwrap_or_else(|| params[nbrs[1]]);
            let pull = (geom.delta(t, ta) + geom.delta(t, tb)) / 2.0;
            let tn = geom.canon(t + RELAX * pull);
            (geom.point_at(tn), tn)
        }
        Plan::Stencil { ring } => {
            let [e, n, w, s] = [pos[ring[0]], pos[ring[1]], pos[ring[2]], pos[ring[3]]];
            let [ne, nw, sw, se] = [pos[ring[4]], pos[ring[5]], pos[ring[6]], pos[ring[7]]];
            let xi = (e - w) * 0.5;
            let eta = (n - s) * 0.5;
            let alpha = eta.dot(eta);
            let beta = xi.dot(eta);
            let gamma = xi.dot(xi);
            let denom = 2.0 * (alpha + gamma);
            if denom <= 0.0 {
                return (here, params[v]);
            }
            let target =
                ((e + w) * alpha + (n + s) * gamma - (ne + sw - nw - se) * (beta / 2.0)) / denom;
            (proxy.project_surface(here + (target - here) * RELAX), params[v])
        }
        Plan::Laplacian { nbrs } => {
            let mut target = Vec3::ZERO;
            for &n in nbrs {
                target += pos[n];
            }
            let target = target / nbrs.len() as f64;
            (proxy.project_surface(here + (target - here) * RELAX), params[v])
        }
    }
}

fn build_plans(block: &BlockStructuredMesh, fine: &QuadMesh, proxy: &GeometryProxy) -> Vec<Plan> {
    let mut curve_nbrs: Vec<Vec<usize>> = vec![Vec::new(); block.vertices.len()];
    for &(a, b, c) in &block.feature_segments {
        if block.vertex_kind[a] == FineKind::Curve(c) {
            curve_nbrs[a].push(b);
        }
        if block.vertex_kind[b] == FineKind::Curve(c) {
            curve_nbrs[b].push(a);
        }
    }

    block
        .vertex_kind
        .iter()
        .enumerate()
        .map(|(v, kind)| match *kind {
            FineKind::Corner => Plan::Fixed,
            FineKind::Curve(c) => {
                let nbrs = &curve_nbrs[v];
                if nbrs.len() != 2 {
                    log::debug!(
                        "curve vertex {v} has {} neighbors along curve {c}, pinning it",
                        nbrs.len()
                    );
                    return Plan::Fixed;
                }
                // A neighbor that lives on the same curve moves too, so its
                // parameter is read live. Anything else (corner, junction
                // vertex of another curve) is pinned where it projects.
                let pin = |n: usize| match block.vertex_kind[n] {
                    FineKind::Curve(cn) if cn == c => None,
                    _ => Some(proxy.curve(c).project(block.vertices[n]).0),
                };
                Plan::OnCurve { curve: c, nbrs: [nbrs[0], nbrs[1]], pinned: [pin(nbrs[0]), pin(nbrs[1])] }
            }
            FineKind::Surface => {
                let star = fine.star(v);
                if !star.closed {
                    log::warn!("surface vertex {v} sits on the mesh boundary, pinning it");
                    return Plan::Fixed;
                }
                let nbrs: Vec<usize> =
                    star.edges.iter().map(|&e| fine.edge_other(e, v)).collect();
                if nbrs.len() == 4 {
                    let mut ring = [0usize; 8];
                    ring[..4].copy_from_slice(&nbrs);
                    for (i, &q) in star.quads.iter().enumerate() {
                        let (a, b) = (nbrs[i], nbrs[(i + 1) % 4]);
                        let d = fine
                            .quad(q)
                            .into_iter()
                            .find(|&u| u != v && u != a && u != b)
                            .expect("quad has a vertex across the diagonal");
                        ring[4 + i] = d;
                    }
                    Plan::Stencil { ring }
                } else {
                    Plan::Laplacian { nbrs }
                }
            }
        })
        .collect()
}
