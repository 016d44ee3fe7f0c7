//! Mesh file I/O.
//!
//! Native format `quadcoarse-mesh v1`: a versioned header line followed by
//! sections, each a name and a count on one line and one record per line.
//!
//! ```text
//! quadcoarse-mesh v1
//! vertices <n>        # index x y z
//! quads <n>           # four 0-based vertex indices, counter-clockwise
//! feature_edges <n>   # v0 v1 curve_id
//! corners <n>         # vertex_id nominal_valence
//! ```
//!
//! Whitespace separated, `#` starts a comment. Coordinates are written with
//! shortest round-trip formatting, so save/load is bit-exact.
//!
//! OBJ files (quads only) can be imported too. Tags come from a `.tags`
//! sidecar in the native section syntax when present, otherwise features are
//! detected from dihedral angles and boundary loops.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::MeshError;
use crate::geom::Vec3;
use crate::mesh::QuadMesh;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Native,
    Obj,
}

pub fn save_mesh(mesh: &QuadMesh, path: &Path, format: MeshFormat) -> Result<(), MeshError> {
    let text = match format {
        MeshFormat::Native => write_native(mesh),
        MeshFormat::Obj => write_obj(mesh),
    };
    std::fs::write(path, text)?;
    Ok(())
}

/// Loads a mesh, picking the format from the file extension (`.obj` or
/// native). OBJ meshes without a `.tags` sidecar get detected features.
pub fn load_mesh(path: &Path) -> Result<QuadMesh, MeshError> {
    let text = std::fs::read_to_string(path)?;
    if path.extension().and_then(|e| e.to_str()) == Some("obj") {
        let (vs, qs) = parse_obj(&text)?;
        let sidecar = path.with_extension("obj.tags");
        if sidecar.exists() {
            let tag_text = std::fs::read_to_string(&sidecar)?;
            let (features, corners) = parse_tags(&tag_text)?;
            QuadMesh::from_parts(vs, qs, features, corners)
        } else {
            let untagged = QuadMesh::from_parts(vs.clone(), qs.clone(), vec![], vec![])?;
            let (features, corners) = detect_features(&untagged);
            QuadMesh::from_parts(vs, qs, features, corners)
        }
    } else {
        parse_native(&text)
    }
}

pub fn write_native(mesh: &QuadMesh) -> String {
    let mut s = String::new();
    s.push_str("quadcoarse-mesh v1\n");
    let _ = writeln!(s, "vertices {}", mesh.vertex_count());
    for v in 0..mesh.vertex_count() {
        let p = mesh.position(v);
        let _ = writeln!(s, "{v} {} {} {}", p.x, p.y, p.z);
    }
    let _ = writeln!(s, "quads {}", mesh.quad_count());
    for q in 0..mesh.quad_count() {
        let vs = mesh.quad(q);
        let _ = writeln!(s, "{} {} {} {}", vs[0], vs[1], vs[2], vs[3]);
    }
    let tagged: Vec<(usize, usize, usize)> = (0..mesh.edge_count())
        .filter_map(|e| {
            mesh.feature_curve_of(e).map(|c| {
                let ev = mesh.edge(e).v;
                (ev[0].min(ev[1]), ev[0].max(ev[1]), c)
            })
        })
        .collect();
    let _ = writeln!(s, "feature_edges {}", tagged.len());
    for (a, b, c) in tagged {
        let _ = writeln!(s, "{a} {b} {c}");
    }
    let _ = writeln!(s, "corners {}", mesh.corners().len());
    for (&v, &nominal) in mesh.corners() {
        let _ = writeln!(s, "{v} {nominal}");
    }
    s
}

fn write_obj(mesh: &QuadMesh) -> String {
    let mut s = String::new();
    for v in 0..mesh.vertex_count() {
        let p = mesh.position(v);
        let _ = writeln!(s, "v {} {} {}", p.x, p.y, p.z);
    }
    for q in 0..mesh.quad_count() {
        let vs = mesh.quad(q);
        let _ = writeln!(s, "f {} {} {} {}", vs[0] + 1, vs[1] + 1, vs[2] + 1, vs[3] + 1);
    }
    s
}

/// Comment-stripped, non-empty lines with their 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            None
        } else {
            Some((i + 1, line))
        }
    })
}

fn parse_err(line: usize, msg: impl Into<String>) -> MeshError {
    MeshError::Parse { line, msg: msg.into() }
}

fn parse_usize(tok: &str, line: usize) -> Result<usize, MeshError> {
    tok.parse().map_err(|_| parse_err(line, format!("expected integer, got {tok:?}")))
}

fn parse_f64(tok: &str, line: usize) -> Result<f64, MeshError> {
    tok.parse().map_err(|_| parse_err(line, format!("expected number, got {tok:?}")))
}

fn parse_native(text: &str) -> Result<QuadMesh, MeshError> {
    let mut lines = content_lines(text);
    let (hline, header) = lines.next().ok_or_else(|| parse_err(0, "empty file"))?;
    if header != "quadcoarse-mesh v1" {
        return Err(parse_err(hline, format!("bad header {header:?}")));
    }
    let mut vs: Vec<Vec3> = Vec::new();
    let mut qs: Vec<[usize; 4]> = Vec::new();
    let mut features: Vec<(usize, usize, usize)> = Vec::new();
    let mut corners: Vec<(usize, usize)> = Vec::new();
    while let Some((ln, line)) = lines.next() {
        let mut toks = line.split_whitespace();
        let section = toks.next().unwrap();
        let count = parse_usize(
            toks.next().ok_or_else(|| parse_err(ln, "missing section count"))?,
            ln,
        )?;
        for _ in 0..count {
            let (ln, line) =
                lines.next().ok_or_else(|| parse_err(ln, "section ends before its count"))?;
            let toks: Vec<&str> = line.split_whitespace().collect();
            match section {
                "vertices" => {
                    if toks.len() != 4 {
                        return Err(parse_err(ln, "vertex line needs: index x y z"));
                    }
                    let idx = parse_usize(toks[0], ln)?;
                    if idx != vs.len() {
                        return Err(parse_err(ln, format!("vertex index {idx} out of order")));
                    }
                    vs.push(Vec3::new(
                        parse_f64(toks[1], ln)?,
                        parse_f64(toks[2], ln)?,
                        parse_f64(toks[3], ln)?,
                    ));
                }
                "quads" => {
                    if toks.len() != 4 {
                        return Err(parse_err(ln, "quad line needs 4 vertex indices"));
                    }
                    qs.push([
                        parse_usize(toks[0], ln)?,
                        parse_usize(toks[1], ln)?,
                        parse_usize(toks[2], ln)?,
                        parse_usize(toks[3], ln)?,
                    ]);
                }
                "feature_edges" => {
                    if toks.len() != 3 {
                        return Err(parse_err(ln, "feature edge line needs: v0 v1 curve_id"));
                    }
                    features.push((
                        parse_usize(toks[0], ln)?,
                        parse_usize(toks[1], ln)?,
                        parse_usize(toks[2], ln)?,
                    ));
                }
                "corners" => {
                    if toks.len() != 2 {
                        return Err(parse_err(ln, "corner line needs: vertex nominal"));
                    }
                    corners.push((parse_usize(toks[0], ln)?, parse_usize(toks[1], ln)?));
                }
                other => return Err(parse_err(ln, format!("unknown section {other:?}"))),
            }
        }
    }
    QuadMesh::from_parts(vs, qs, features, corners)
}

fn parse_obj(text: &str) -> Result<(Vec<Vec3>, Vec<[usize; 4]>), MeshError> {
    let mut vs = Vec::new();
    let mut qs = Vec::new();
    for (ln, line) in content_lines(text) {
        let mut toks = line.split_whitespace();
        match toks.next().unwrap() {
            "v" => {
                let xyz: Vec<&str> = toks.collect();
                if xyz.len() < 3 {
                    return Err(parse_err(ln, "vertex needs 3 coordinates"));
                }
                vs.push(Vec3::new(
                    parse_f64(xyz[0], ln)?,
                    parse_f64(xyz[1], ln)?,
                    parse_f64(xyz[2], ln)?,
                ));
            }
            "f" => {
                let idx: Result<Vec<usize>, MeshError> = toks
                    .map(|t| {
                        // "v", "v/vt", "v/vt/vn" forms; only v is used.
                        let v = t.split('/').next().unwrap();
                        let i = parse_usize(v, ln)?;
                        if i == 0 {
                            return Err(parse_err(ln, "OBJ indices are 1-based"));
                        }
                        Ok(i - 1)
                    })
                    .collect();
                let idx = idx?;
                if idx.len() != 4 {
                    return Err(MeshError::NonQuad { arity: idx.len() });
                }
                qs.push([idx[0], idx[1], idx[2], idx[3]]);
            }
            // Normals, texcoords, groups, materials: ignored.
            _ => {}
        }
    }
    Ok((vs, qs))
}

fn parse_tags(text: &str) -> Result<(Vec<(usize, usize, usize)>, Vec<(usize, usize)>), MeshError> {
    let mut features = Vec::new();
    let mut corners = Vec::new();
    let mut lines = content_lines(text);
    while let Some((ln, line)) = lines.next() {
        let mut toks = line.split_whitespace();
        let section = toks.next().unwrap();
        let count = parse_usize(
            toks.next().ok_or_else(|| parse_err(ln, "missing section count"))?,
            ln,
        )?;
        for _ in 0..count {
            let (ln, line) =
                lines.next().ok_or_else(|| parse_err(ln, "section ends before its count"))?;
            let toks: Vec<&str> = line.split_whitespace().collect();
            match section {
                "feature_edges" => {
                    if toks.len() != 3 {
                        return Err(parse_err(ln, "feature edge line needs: v0 v1 curve_id"));
                    }
                    features.push((
                        parse_usize(toks[0], ln)?,
                        parse_usize(toks[1], ln)?,
                        parse_usize(toks[2], ln)?,
                    ));
                }
                "corners" => {
                    if toks.len() != 2 {
                        return Err(parse_err(ln, "corner line needs: vertex nominal"));
                    }
                    corners.push((parse_usize(toks[0], ln)?, parse_usize(toks[1], ln)?));
                }
                other => return Err(parse_err(ln, format!("unknown section {other:?}"))),
            }
        }
    }
    Ok((features, corners))
}

/// Detects feature edges and corners on an untagged mesh: interior edges
/// whose quads meet at a dihedral above 45 degrees, plus all boundary edges.
/// Corners are chain vertices that branch, end, or turn by more than 45
/// degrees; nominal valence is the rounded interior angle in right angles.
pub fn detect_features(mesh: &QuadMesh) -> (Vec<(usize, usize, usize)>, Vec<(usize, usize)>) {
    let threshold = std::f64::consts::FRAC_PI_4;
    let mut is_feature = vec![false; mesh.edge_count()];
    for e in 0..mesh.edge_count() {
        if mesh.is_boundary_edge(e) {
            is_feature[e] = true;
            continue;
        }
        let he = mesh.edge(e).he;
        let twin = mesh.edge(e).twin.unwrap();
        let n0 = mesh.quad_normal(he.quad).normalized();
        let n1 = mesh.quad_normal(twin.quad).normalized();
        let dihedral = n0.dot(n1).clamp(-1.0, 1.0).acos();
        if dihedral > threshold {
            is_feature[e] = true;
        }
    }

    // Vertices where chains must break.
    let vdeg: Vec<Vec<usize>> = (0..mesh.vertex_count())
        .map(|v| {
            mesh.star(v)
                .edges
                .iter()
                .copied()
                .filter(|&e| is_feature[e])
                .collect::<Vec<usize>>()
        })
        .collect();
    let mut is_corner = vec![false; mesh.vertex_count()];
    for v in 0..mesh.vertex_count() {
        let deg = vdeg[v].len();
        if deg == 0 {
            continue;
        }
        if deg != 2 {
            is_corner[v] = true;
            continue;
        }
        let dir = |e: usize| (mesh.position(mesh.edge_other(e, v)) - mesh.position(v)).normalized();
        // Straight continuation means the two chain edges point apart.
        if dir(vdeg[v][0]).dot(dir(vdeg[v][1])) > -(threshold.cos()) {
            is_corner[v] = true;
        }
    }

    // Chain feature edges into curves, breaking at corners.
    let mut curve_of = vec![None::<usize>; mesh.edge_count()];
    let mut next_curve = 0;
    for e0 in 0..mesh.edge_count() {
        if !is_feature[e0] || curve_of[e0].is_some() {
            continue;
        }
        let mut chain = vec![e0];
        // Extend in both directions until a corner, an end, or a loop.
        for start_end in 0..2 {
            let mut at = mesh.edge(e0).v[start_end];
            let mut via = e0;
            loop {
                if is_corner[at] {
                    break;
                }
                let Some(&next) = vdeg[at].iter().find(|&&e| e != via) else { break };
                if curve_of[next].is_some() || chain.contains(&next) {
                    break;
                }
                chain.push(next);
                via = next;
                at = mesh.edge_other(next, at);
            }
        }
        for &e in &chain {
            curve_of[e] = Some(next_curve);
        }
        next_curve += 1;
    }

    let features: Vec<(usize, usize, usize)> = (0..mesh.edge_count())
        .filter_map(|e| {
            curve_of[e].map(|c| {
                let ev = mesh.edge(e).v;
                (ev[0].min(ev[1]), ev[0].max(ev[1]), c)
            })
        })
        .collect();
    let corners: Vec<(usize, usize)> = (0..mesh.vertex_count())
        .filter(|&v| is_corner[v])
        .map(|v| {
            let mut angle = 0.0;
            for &q in &mesh.star(v).quads {
                let vs = mesh.quad(q);
                let k = vs.iter().position(|&x| x == v).unwrap();
                let a = (mesh.position(vs[(k + 1) % 4]) - mesh.position(v)).normalized();
                let b = (mesh.position(vs[(k + 3) % 4]) - mesh.position(v)).normalized();
                angle += a.dot(b).clamp(-1.0, 1.0).acos();
            }
            let nominal = ((angle / std::f64::consts::FRAC_PI_2).round() as usize).max(1);
            (v, nominal)
        })
        .collect();
    (features, corners)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_test_mesh, MeshSpec};

    #[test]
    fn native_round_trip_is_bit_exact() {
        let mesh = generate_test_mesh(&MeshSpec::parse("ellipse_fig2").unwrap()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("mesh.txt");
        save_mesh(&mesh, &path, MeshFormat::Native).unwrap();
        let back = load_mesh(&path).unwrap();
        assert_eq!(mesh.vertex_count(), back.vertex_count());
        for v in 0..mesh.vertex_count() {
            assert_eq!(mesh.position(v), back.position(v));
        }
        assert_eq!(mesh.quads(), back.quads());
        assert_eq!(mesh.corners(), back.corners());
        for e in 0..mesh.edge_count() {
            assert_eq!(mesh.feature_curve_of(e), back.feature_curve_of(e));
        }
        // Saving the reloaded mesh reproduces the file byte for byte.
        let again = write_native(&back);
        assert_eq!(std::fs::read_to_string(&path).unwrap(), again);
    }

    #[test]
    fn obj_rejects_non_quads() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("tri.obj");
        std::fs::write(&path, "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n").unwrap();
        let err = load_mesh(&path).unwrap_err();
        assert!(matches!(err, MeshError::NonQuad { arity: 3 }));
    }

    #[test]
    fn obj_import_detects_grid_corners() {
        let mesh = generate_test_mesh(&MeshSpec::parse("grid(3,2)").unwrap()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("grid.obj");
        save_mesh(&mesh, &path, MeshFormat::Obj).unwrap();
        let back = load_mesh(&path).unwrap();
        assert_eq!(back.vertex_count(), 12);
        assert_eq!(back.corners().len(), 4);
        assert!(back.corners().values().all(|&n| n == 1));
        assert_eq!(back.curves().len(), 4);
    }

    #[test]
    fn obj_sidecar_tags_win_over_detection() {
        let mesh = generate_test_mesh(&MeshSpec::parse("grid(2,2)").unwrap()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("grid.obj");
        save_mesh(&mesh, &path, MeshFormat::Obj).unwrap();
        std::fs::write(dir.path().join("grid.obj.tags"), "corners 1\n8 3\n").unwrap();
        let back = load_mesh(&path).unwrap();
        assert_eq!(back.corners().get(&8), Some(&3));
        // Untagged boundary still gets implicit curves.
        assert_eq!(back.curves().len(), 1);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.txt");
        std::fs::write(&path, "quadcoarse-mesh v1\nvertices 1\n0 1.0 oops 0\n").unwrap();
        match load_mesh(&path).unwrap_err() {
            MeshError::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn dihedral_detection_finds_a_crease() {
        // Two unit quads folded 90 degrees along their shared edge.
        let vs = vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(1.0, 1.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(1.0, 0.0, 1.0),
            Vec3::new(1.0, 1.0, 1.0),
        ];
        let qs = vec![[0, 1, 2, 3], [1, 4, 5, 2]];
        let mesh = QuadMesh::from_parts(vs, qs, vec![], vec![]).unwrap();
        let (features, corners) = detect_features(&mesh);
        let crease = features.iter().find(|&&(a, b, _)| (a, b) == (1, 2));
        assert!(crease.is_some());
        // The fold endpoints join three chains each, so they become corners.
        assert!(corners.iter().any(|&(v, _)| v == 1));
        assert!(corners.iter().any(|&(v, _)| v == 2));
    }
}
