//! Vertex classification: regular vs irregular per site.

use super::QuadMesh;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VertexKind {
    Regular,
    Irregular,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VertexSite {
    Interior,
    OnCurve,
    Corner,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VertexClass {
    pub kind: VertexKind,
    pub site: VertexSite,
    /// Number of incident quads.
    pub valence: usize,
}

impl VertexClass {
    pub fn is_irregular(&self) -> bool {
        self.kind == VertexKind::Irregular
    }

    /// Expected valence minus actual valence. Cancelling deviations are what
    /// make a 3-5 pair collapsible.
    pub fn deviation(&self, expected: usize) -> i64 {
        expected as i64 - self.valence as i64
    }
}

/// Expected quad count for a vertex: 4 in the interior, the nominal valence
/// at corners, 2 per adjacent surface side on curves (2 on a boundary curve,
/// 4 on a two-sided curve).
pub fn expected_valence(mesh: &QuadMesh, v: usize) -> usize {
    if let Some(nominal) = mesh.corner_nominal(v) {
        return nominal;
    }
    let star = mesh.star(v);
    let feature: Vec<usize> = star
        .edges
        .iter()
        .copied()
        .filter(|&e| mesh.is_feature_edge(e))
        .collect();
    if feature.is_empty() {
        4
    } else if feature.iter().all(|&e| mesh.is_boundary_edge(e)) {
        2
    } else {
        4
    }
}

/// Classifies every vertex. Pure function of connectivity and tags.
pub fn classify_vertices(mesh: &QuadMesh) -> Vec<VertexClass> {
    (0..mesh.vertex_count())
        .map(|v| {
            let site = if mesh.corner_nominal(v).is_some() {
                VertexSite::Corner
            } else if mesh.is_on_feature(v) {
                VertexSite::OnCurve
            } else {
                VertexSite::Interior
            };
            let valence = mesh.quad_valence(v);
            let kind = if valence == expected_valence(mesh, v) {
                VertexKind::Regular
            } else {
                VertexKind::Irregular
            };
            VertexClass { kind, site, valence }
        })
        .collect()
}
