//! Mesh quality and Winslow smoothing against a geometry proxy.

mod proxy;
mod winslow;


pub use proxy::{CurveGeom, GeometryProxy};
pub use winslow::{winslow_smooth, winslow_smooth_with, SmoothMode, SmoothResult};

use std::fmt::Write as _;

use crate::extraction::{BlockStructuredMesh, CoarseLayout};
use crate::geom::Vec3;

/// Scaled-Jacobian quality of a quad set. `min` over an empty set is 1.
#[derive(Debug, Clone)]
pub struct QualityReport {
    /// Worst corner value per quad, in [-1, 1].
    pub per_quad: Vec<f64>,
    pub min: f64,
    /// Quads whose value is <= 0.
    pub invalid: usize,
}

/// Minimum scaled Jacobian per quad. Each corner contributes the cross
/// product of its two edges measured against the quad's dominant
/// orientation, normalized by the edge lengths, so a flat corner scores 0
/// and a fold scores negative. Quads need not be planar.
pub fn quality(vertices: &[Vec3], quads: &[[usize; 4]]) -> QualityReport {
    let mut per_quad = Vec::with_capacity(quads.len());
    for q in quads {
        let p = [vertices[q[0]], vertices[q[1]], vertices[q[2]], vertices[q[3]]];
        let mut crosses = [Vec3::ZERO; 4];
        let mut axis = Vec3::ZERO;
        for k in 0..4 {
            let a = p[(k + 1) % 4] - p[k];
            let b = p[(k + 3) % 4] - p[k];
            crosses[k] = a.cross(b);
            axis += crosses[k];
        }
        // A bowtie cancels its own corner normals; fall back to the first
        // corner that has one, so the fold still shows up as a sign change.
        if axis.norm() == 0.0 {
            axis = *crosses.iter().find(|c| c.norm() > 0.0).unwrap_or(&Vec3::ZERO);
        }
        let axis = axis.normalized();
        let mut worst = 1.0f64;
        for k in 0..4 {
            let la = p[(k + 1) % 4].dist(p[k]);
            let lb = p[(k + 3) % 4].dist(p[k]);
            let s = if la > 0.0 && lb > 0.0 { crosses[k].dot(axis) / (la * lb) } else { 0.0 };
            worst = worst.min(s);
        }
        per_quad.push(worst);
    }
    let min = per_quad.iter().fold(1.0f64, |m, &v| m.min(v));
    let invalid = per_quad.iter().filter(|&&v| v <= 0.0).count();
    QualityReport { per_quad, min, invalid }
}

pub fn quality_of(block: &BlockStructuredMesh) -> QualityReport {
    quality(&block.vertices, &block.quads)
}

/// Human summary followed by one machine-readable row per quad.
pub fn dump_quality(report: &QualityReport) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "quads {}  min scaled jacobian {:.6}  invalid {}",
        report.per_quad.len(),
        report.min,
        report.invalid
    )
    .unwrap();
    writeln!(out, "quad,min_scaled_jacobian").unwrap();
    for (q, v) in report.per_quad.iter().enumerate() {
        writeln!(out, "{q},{v:.6}").unwrap();
    }
    out
}

/// Diameter of the patch adjacency graph (patches sharing a layout edge),
/// maximized over connected components. Sets the iteration budget scale.
pub fn patch_diameter(layout: &CoarseLayout) -> usize {
    let np = layout.patches.len();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); np];
    let mut by_edge: Vec<Vec<usize>> = vec![Vec::new(); layout.edges.len()];
    for (pi, patch) in layout.patches.iter().enumerate() {
        for &e in &patch.sides {
            by_edge[e].push(pi);
        }
    }
    for users in &by_edge {
        for i in 0..users.len() {
            for j in i + 1..users.len() {
                if users[i] != users[j] {
                    adj[users[i]].push(users[j]);
                    adj[users[j]].push(users[i]);
                }
            }
        }
    }
    let mut diameter = 0;
    let mut dist = vec![usize::MAX; np];
    for start in 0..np {
        dist.fill(usize::MAX);
        dist[start] = 0;
        let mut queue = std::collections::VecDeque::from([start]);
        while let Some(p) = queue.pop_front() {
            for &n in &adj[p] {
                if dist[n] == usize::MAX {
                    dist[n] = dist[p] + 1;
                    diameter = diameter.max(dist[n]);
                    queue.push_back(n);
                }
            }
        }
    }
    diameter
}

pub fn default_max_iters(layout: &CoarseLayout) -> usize {
    100 * patch_diameter(layout).max(1)
}

/// One thousandth of the mean edge length of the fine mesh.
pub fn default_tol(block: &BlockStructuredMesh) -> f64 {
    let mut total = 0.0;
    let mut count = 0usize;
    for q in &block.quads {
        for k in 0..4 {
            total += block.vertices[q[k]].dist(block.vertices[q[(k + 1) % 4]]);
            count += 1;
        }
    }
    if count == 0 {
        return 1e-3;
    }
    // Interior edges are visited from both sides, which does not change the
    // mean enough to matter for a tolerance.
    1e-3 * total / count as f64
}
