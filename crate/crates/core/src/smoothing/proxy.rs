//! Geometry proxy standing in for the CAD model: the input quads
//! triangulated for closest-point queries, feature polylines with arc-length
//! parametrization, and the fixed corner points.

use std::collections::BTreeMap;

use crate::geom::Vec3;
use crate::mesh::{Curve, QuadMesh};

/// Feature polyline with cumulative arc length. Closed curves wrap; `cum`
/// then carries one extra entry for the wrap segment.
#[derive(Debug, Clone)]
pub struct CurveGeom {
    pts: Vec<Vec3>,
    cum: Vec<f64>,
    pub closed: bool,
}

impl CurveGeom {
    pub(crate) fn from_points(pts: Vec<Vec3>, closed: bool) -> CurveGeom {
        let n = pts.len();
        let segs = if closed { n } else { n - 1 };
        let mut cum = vec![0.0];
        for k in 0..segs {
            cum.push(cum[k] + pts[k].dist(pts[(k + 1) % n]));
        }
        CurveGeom { pts, cum, closed }
    }

    fn from_curve(mesh: &QuadMesh, curve: &Curve) -> CurveGeom {
        let pts = curve.vertices.iter().map(|&v| mesh.position(v)).collect();
        CurveGeom::from_points(pts, curve.closed)
    }

    pub fn total(&self) -> f64 {
        *self.cum.last().unwrap()
    }

    /// Signed move from parameter `from` toward `to`, the short way around
    /// on closed curves.
    pub fn delta(&self, from: f64, to: f64) -> f64 {
        if !self.closed {
            return to - from;
        }
        let total = self.total();
        if total <= 0.0 {
            return 0.0;
        }
        let mut d = (to - from).rem_euclid(total);
        if d > total / 2.0 {
            d -= total;
        }
        d
    }

    /// Wraps (closed) or clamps (open) a parameter into range.
    pub fn canon(&self, t: f64) -> f64 {
        let total = self.total();
        if total <= 0.0 {
            return 0.0;
        }
        if self.closed {
            t.rem_euclid(total)
        } else {
            t.clamp(0.0, total)
        }
    }

    /// Point at arc-length parameter t. Exact at the polyline's own points.
    pub fn point_at(&self, t: f64) -> Vec3 {
        if self.total() <= 0.0 {
            return self.pts[0];
        }
        let t = self.canon(t);
        let k = self.cum.partition_point(|&c| c <= t).min(self.cum.len() - 1);
        let (c0, c1) = (self.cum[k - 1], self.cum[k]);
        let f = if c1 > c0 { (t - c0) / (c1 - c0) } else { 0.0 };
        let a = self.pts[k - 1];
        let b = self.pts[k % self.pts.len()];
        a.lerp(b, f)
    }

    /// Closest point on the polyline with its parameter. Ties keep the
    /// earliest segment. Parameters at segment ends are exact so projecting
    /// a polyline point round-trips bit for bit.
    pub fn project(&self, p: Vec3) -> (f64, Vec3) {
        let n = self.pts.len();
        let segs = if self.closed { n } else { n - 1 };
        let mut best = (f64::INFINITY, 0.0, self.pts[0]);
        for k in 0..segs {
            let (a, b) = (self.pts[k], self.pts[(k + 1) % n]);
            let ab = b - a;
            let len2 = ab.dot(ab);
            let f = if len2 > 0.0 { ((p - a).dot(ab) / len2).clamp(0.0, 1.0) } else { 0.0 };
            let (t, q) = if f <= 0.0 {
                (self.cum[k], a)
            } else if f >= 1.0 {
                (self.cum[k + 1], b)
            } else {
                (self.cum[k] + f * (self.cum[k + 1] - self.cum[k]), a.lerp(b, f))
            };
            let d = p.dist(q);
            if d < best.0 {
                best = (d, t, q);
            }
        }
        (self.canon(best.1), best.2)
    }
}

struct BvhNode {
    lo: Vec3,
    hi: Vec3,
    left: usize,
    right: usize,
    start: usize,
    count: usize,
}

const LEAF_SIZE: usize = 4;

pub struct GeometryProxy {
    tris: Vec<[Vec3; 3]>,
    order: Vec<usize>,
    nodes: Vec<BvhNode>,
    curves: BTreeMap<usize, CurveGeom>,
    corners: BTreeMap<usize, Vec3>,
}

impl GeometryProxy {
    /// Builds the proxy from the original input mesh: two triangles per
    /// quad, one polyline per feature curve, one fixed point per corner.
    pub fn build(mesh: &QuadMesh) -> GeometryProxy {
        let mut tris = Vec::with_capacity(2 * mesh.quad_count());
        for q in 0..mesh.quad_count() {
            let [a, b, c, d] = mesh.quad(q);
            let (pa, pb, pc, pd) =
                (mesh.position(a), mesh.position(b), mesh.position(c), mesh.position(d));
            tris.push([pa, pb, pc]);
            tris.push([pa, pc, pd]);
        }
        let mut order: Vec<usize> = (0..tris.len()).collect();
        let mut nodes = Vec::new();
        if !tris.is_empty() {
            build_bvh(&tris, &mut order, 0, &mut nodes);
        }
        let curves = mesh
            .curves()
            .iter()
            .map(|(&c, curve)| (c, CurveGeom::from_curve(mesh, curve)))
            .collect();
        let corners = mesh.corners().keys().map(|&v| (v, mesh.position(v))).collect();
        GeometryProxy { tris, order, nodes, curves, corners }
    }

    pub fn curve(&self, c: usize) -> &CurveGeom {
        &self.curves[&c]
    }

    pub fn corners(&self) -> &BTreeMap<usize, Vec3> {
        &self.corners
    }

    /// Closest point on the triangulated surface.
    pub fn project_surface(&self, p: Vec3) -> Vec3 {
        if self.nodes.is_empty() {
            return p;
        }
        let mut best_d2 = f64::INFINITY;
        let mut best = p;
        let mut stack = vec![self.nodes.len() - 1];
        while let Some(ni) = stack.pop() {
            let node = &self.nodes[ni];
            if aabb_dist2(p, node.lo, node.hi) >= best_d2 {
                continue;
            }
            if node.count > 0 {
                for &t in &self.order[node.start..node.start + node.count] {
                    let q = closest_point_triangle(p, self.tris[t]);
                    let d2 = (p - q).dot(p - q);
                    if d2 < best_d2 {
                        best_d2 = d2;
                        best = q;
                    }
                }
            } else {
                // Nearer child explored first; the stack pops last-pushed.
                let (l, r) = (node.left, node.right);
                let dl = aabb_dist2(p, self.nodes[l].lo, self.nodes[l].hi);
                let dr = aabb_dist2(p, self.nodes[r].lo, self.nodes[r].hi);
                if dl <= dr {
                    stack.push(r);
                    stack.push(l);
                } else {
                    stack.push(l);
                    stack.push(r);
                }
            }
        }
        best
    }
}

fn aabb_dist2(p: Vec3, lo: Vec3, hi: Vec3) -> f64 {
    let dx = (lo.x - p.x).max(0.0).max(p.x - hi.x);
    let dy = (lo.y - p.y).max(0.0).max(p.y - hi.y);
    let dz = (lo.z - p.z).max(0.0).max(p.z - hi.z);
    dx * dx + dy * dy + dz * dz
}

fn tri_centroid(t: &[Vec3; 3]) -> Vec3 {
    (t[0] + t[1] + t[2]) / 3.0
}

/// Builds the subtree over order[start..start+len], returns its node index.
/// The root ends up last in `nodes`.
fn build_bvh(tris: &[[Vec3; 3]], order: &mut [usize], offset: usize, nodes: &mut Vec<BvhNode>) -> usize {
    let mut lo = Vec3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY);
    let mut hi = -lo;
    for &t in order.iter() {
        for p in &tris[t] {
            lo = Vec3::new(lo.x.min(p.x), lo.y.min(p.y), lo.z.min(p.z));
            hi = Vec3::new(hi.x.max(p.x), hi.y.max(p.y), hi.z.max(p.z));
        }
    }
    if order.len() <= LEAF_SIZE {
        nodes.push(BvhNode { lo, hi, left: 0, right: 0, start: offset, count: order.len() });
        return nodes.len() - 1;
    }
    let spread = hi - lo;
    let axis = if spread.x >= spread.y && spread.x >= spread.z {
        0
    } else if spread.y >= spread.z {
        1
    } else {
        2
    };
    let key = |t: usize| -> f64 {
        let c = tri_centroid(&tris[t]);
        match axis {
            0 => c.x,
            1 => c.y,
            _ => c.z,
        }
    };
    order.sort_unstable_by(|&a, &b| key(a).total_cmp(&key(b)).then(a.cmp(&b)));
    let mid = order.len() / 2;
    let (left_ids, right_ids) = order.split_at_mut(mid);
    let left = build_bvh(tris, left_ids, offset, nodes);
    let right = build_bvh(tris, right_ids, offset + mid, nodes);
    nodes.push(BvhNode { lo, hi, left, right, start: 0, count: 0 });
    nodes.len() - 1
}

/// Closest point on a triangle (Voronoi region walk). Returns vertices and
/// edge points exactly when the query lies there.
pub(crate) fn closest_point_triangle(p: Vec3, t: [Vec3; 3]) -> Vec3 {
    let [a, b, c] = t;
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(ap);
    let d2 = ac.dot(ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return a;
    }
    let bp = p - b;
    let d3 = ab.dot(bp);
    let d4 = ac.dot(bp);
    if d3 >= 0.0 && d4 <= d3 {
        return b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return a + ab * v;
    }
    let cp = p - c;
    let d5 = ab.dot(cp);
    let d6 = ac.dot(cp);
    if d6 >= 0.0 && d5 <= d6 {
        return c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return a + ac * w;
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return b + (c - b) * w;
    }
    let denom = va + vb + vc;
    if denom <= 0.0 {
        // Degenerate triangle; nearest vertex is good enough.
        let da = p.dist(a);
        let db = p.dist(b);
        let dc = p.dist(c);
        if da <= db && da <= dc {
            return a;
        }
        return if db <= dc { b } else { c };
    }
    let v = vb / denom;
    let w = vc / denom;
    a + ab * v + ac * w
}
