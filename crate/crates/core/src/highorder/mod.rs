//! Order-N Lagrange elements on top of the smoothed block-structured mesh:
//! one node per layout vertex, N-1 arc-length nodes per layout edge, and
//! (N-1)^2 transfinite interior nodes per patch, everything projected onto
//! the geometry proxy.

mod gl;
mod io;

#[cfg(test)]
mod tests;

pub use gl::gauss_lobatto_points;
pub use io::{export_high_order, import_high_order, parse_high_order, write_high_order, HoFormat};

use crate::error::HighOrderError;
use crate::extraction::{BlockStructuredMesh, CoarseLayout};
use crate::geom::Vec3;
use crate::smoothing::{CurveGeom, GeometryProxy};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Equidistant,
    GaussLobatto,
}

impl Spacing {
    pub fn label(self) -> &'static str {
        match self {
            Spacing::Equidistant => "equidistant",
            Spacing::GaussLobatto => "gauss-lobatto",
        }
    }

    pub fn parse(s: &str) -> Option<Spacing> {
        match s {
            "equidistant" => Some(Spacing::Equidistant),
            "gauss-lobatto" => Some(Spacing::GaussLobatto),
            _ => None,
        }
    }
}

/// Lagrange mesh of a fixed order. Elements index into the shared node
/// list as (order+1)^2 lattices, v-major: the node at (u, v) sits at
/// element[v * (order + 1) + u]. Corner and edge nodes are shared between
/// incident elements by id, so conformity is structural.
#[derive(Debug, Clone, PartialEq)]
pub struct HighOrderMesh {
    pub order: usize,
    pub spacing: Spacing,
    pub nodes: Vec<Vec3>,
    pub elements: Vec<Vec<usize>>,
}

/// Unit-interval lattice parameters for the given order and spacing.
fn lattice_params(n: usize, spacing: Spacing) -> Vec<f64> {
    match spacing {
        Spacing::Equidistant => (0..=n).map(|k| k as f64 / n as f64).collect(),
        Spacing::GaussLobatto => {
            gauss_lobatto_points(n).into_iter().map(|x| (x + 1.0) / 2.0).collect()
        }
    }
}

pub fn build_high_order(
    block: &BlockStructuredMesh,
    layout: &CoarseLayout,
    proxy: &GeometryProxy,
    n: usize,
    spacing: Spacing,
) -> Result<HighOrderMesh, HighOrderError> {
    assert!(n >= 1, "element order must be at least 1");
    let fracs = lattice_params(n, spacing);

    // Layout vertices map to their fine vertex through the edge chains.
    let mut vfid = vec![usize::MAX; layout.vertices.len()];
    for (e, edge) in layout.edges.iter().enumerate() {
        let chain = &block.edge_fids[e];
        vfid[edge.v[0]] = chain[0];
        vfid[edge.v[1]] = *chain.last().unwrap();
    }

    let mut nodes: Vec<Vec3> = Vec::new();
    for (v, &fid) in vfid.iter().enumerate() {
        assert!(fid != usize::MAX, "layout vertex {v} bounds no edge");
        nodes.push(block.vertices[fid]);
    }

    // Edge nodes, ordered along each edge's own direction.
    let mut edge_nodes: Vec<Vec<usize>> = Vec::with_capacity(layout.edges.len());
    for (e, edge) in layout.edges.iter().enumerate() {
        let pts: Vec<Vec3> = block.edge_fids[e].iter().map(|&f| block.vertices[f]).collect();
        let geom = CurveGeom::from_points(pts, false);
        let total = geom.total();
        if total <= 0.0 {
            return Err(HighOrderError::DegenerateEdge { edge: e });
        }
        let mut ids = Vec::with_capacity(n.saturating_sub(1));
        for &f in &fracs[1..n] {
            let p = geom.point_at(total * f);
            let p = match edge.feature {
                Some(c) => proxy.curve(c).project(p).1,
                None => proxy.project_surface(p),
            };
            ids.push(nodes.len());
            nodes.push(p);
        }
        edge_nodes.push(ids);
    }

    let mut elements = Vec::with_capacity(layout.patches.len());
    for patch in &layout.patches {
        // Full chain of side k in the patch's cycle direction, corners
        // included: corners[k] ... corners[k+1].
        let side = |k: usize| -> Vec<usize> {
            let e = patch.sides[k];
            let mut chain = vec![patch.corners[k]];
            if patch.forward[k] {
                chain.extend(edge_nodes[e].iter().copied());
            } else {
                chain.extend(edge_nodes[e].iter().rev().copied());
            }
            chain.push(patch.corners[(k + 1) % 4]);
            chain
        };
        let (bot, right, top, left) = (side(0), side(1), side(2), side(3));

        let mut lattice = vec![vec![usize::MAX; n + 1]; n + 1];
        for i in 0..=n {
            lattice[i][0] = bot[i];
            lattice[i][n] = top[n - i];
        }
        for j in 0..=n {
            lattice[n][j] = right[j];
            lattice[0][j] = left[n - j];
        }
        for i in 1..n {
            for j in 1..n {
                let (xi, eta) = (fracs[i], fracs[j]);
                let p = nodes[lattice[i][0]] * (1.0 - eta)
                    + nodes[lattice[i][n]] * eta
                    + nodes[lattice[0][j]] * (1.0 - xi)
                    + nodes[lattice[n][j]] * xi
                    - (nodes[lattice[0][0]] * ((1.0 - xi) * (1.0 - eta))
                        + nodes[lattice[n][0]] * (xi * (1.0 - eta))
                        + nodes[lattice[n][n]] * (xi * eta)
                        + nodes[lattice[0][n]] * ((1.0 - xi) * eta));
                lattice[i][j] = nodes.len();
                nodes.push(proxy.project_surface(p));
            }
        }

        let mut element = Vec::with_capacity((n + 1) * (n + 1));
        for row in 0..=n {
            element.extend(lattice.iter().map(|col| col[row]));
        }
        elements.push(element);
    }

    debug_assert_eq!(
        nodes.len(),
        layout.vertices.len()
            + layout.edges.len() * (n - 1)
            + layout.patches.len() * (n - 1) * (n - 1)
    );
    Ok(HighOrderMesh { order: n, spacing, nodes, elements })
}
