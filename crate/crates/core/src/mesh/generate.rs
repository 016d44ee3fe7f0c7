//! Synthetic test meshes with controlled irregular vertices.
//!
//! The interesting generators inject quad-lattice dislocations: a wedge quad
//! whose diagonal holds a valence-5 / valence-3 vertex pair. Rows below the
//! wedge have two vertices fewer than rows above it, like an edge dislocation
//! in a crystal.

use crate::error::MeshError;
use crate::geom::Vec3;
use crate::mesh::QuadMesh;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MeshSpec {
    /// Planar n x m quad grid with four nominal-valence-1 corners.
    Grid { n: usize, m: usize },
    /// Structured annulus: n quads around, m rings. Two feature loops.
    Annulus { n: usize, m: usize },
    /// Unit disk with `pairs` interior 3-5 dislocation pairs and four
    /// misaligned boundary irregular vertices (images of the square corners).
    DiskWithPair { n: usize, m: usize, pairs: usize },
    /// 2:1 ellipse with two corner vertices at the tips, interior 3-5 pairs
    /// above the midline, and misaligned boundary irregular vertices.
    EllipseFig2 { n: usize, m: usize, pairs: usize },
    /// Annulus with `pairs` dislocation pairs spread over rings and angles.
    AnnulusWithPairs { n: usize, m: usize, pairs: usize },
}

impl MeshSpec {
    /// Parses `name` or `name(args...)`. Bare names take canonical sizes.
    pub fn parse(s: &str) -> Result<MeshSpec, MeshError> {
        let s = s.trim();
        let (name, args) = match s.find('(') {
            None => (s, Vec::new()),
            Some(i) => {
                let rest = s[i + 1..]
                    .strip_suffix(')')
                    .ok_or_else(|| MeshError::InvalidSpec(format!("unclosed '(' in {s:?}")))?;
                let args: Result<Vec<usize>, _> =
                    rest.split(',').map(|a| a.trim().parse::<usize>()).collect();
                let args = args
                    .map_err(|e| MeshError::InvalidSpec(format!("bad argument in {s:?}: {e}")))?;
                (&s[..i], args)
            }
        };
        let take = |k: usize, defaults: &[usize]| -> Result<Vec<usize>, MeshError> {
            if args.is_empty() {
                Ok(defaults.to_vec())
            } else if args.len() == k {
                Ok(args.clone())
            } else {
                Err(MeshError::InvalidSpec(format!(
                    "{name} takes {k} arguments, got {}",
                    args.len()
                )))
            }
        };
        match name {
            "grid" => {
                let a = take(2, &[4, 4])?;
                Ok(MeshSpec::Grid { n: a[0], m: a[1] })
            }
            "annulus" => {
                let a = take(2, &[8, 3])?;
                Ok(MeshSpec::Annulus { n: a[0], m: a[1] })
            }
            "disk_with_pair" => {
                let a = take(3, &[8, 8, 1])?;
                Ok(MeshSpec::DiskWithPair { n: a[0], m: a[1], pairs: a[2] })
            }
            "ellipse_fig2" => {
                let a = take(3, &[12, 8, 1])?;
                Ok(MeshSpec::EllipseFig2 { n: a[0], m: a[1], pairs: a[2] })
            }
            "annulus_with_pairs" => {
                let a = take(3, &[12, 6, 2])?;
                Ok(MeshSpec::AnnulusWithPairs { n: a[0], m: a[1], pairs: a[2] })
            }
            _ => Err(MeshError::InvalidSpec(format!("unknown generator {name:?}"))),
        }
    }

    pub fn name(&self) -> String {
        match self {
            MeshSpec::Grid { n, m } => format!("grid({n},{m})"),
            MeshSpec::Annulus { n, m } => format!("annulus({n},{m})"),
            MeshSpec::DiskWithPair { n, m, pairs } => format!("disk_with_pair({n},{m},{pairs})"),
            MeshSpec::EllipseFig2 { n, m, pairs } => format!("ellipse_fig2({n},{m},{pairs})"),
            MeshSpec::AnnulusWithPairs { n, m, pairs } => {
                format!("annulus_with_pairs({n},{m},{pairs})")
            }
        }
    }
}

pub fn generate_test_mesh(spec: &MeshSpec) -> Result<QuadMesh, MeshError> {
    match *spec {
        MeshSpec::Grid { n, m } => grid(n, m),
        MeshSpec::Annulus { n, m } => annulus(n, m),
        MeshSpec::DiskWithPair { n, m, pairs } => mapped_lattice(n, m, pairs, 1.0, 1.0, false),
        MeshSpec::EllipseFig2 { n, m, pairs } => mapped_lattice(n, m, pairs, 2.0, 1.0, true),
        MeshSpec::AnnulusWithPairs { n, m, pairs } => annulus_with_pairs(n, m, pairs),
    }
}

fn grid(n: usize, m: usize) -> Result<QuadMesh, MeshError> {
    if n < 1 || m < 1 {
        return Err(MeshError::InvalidSpec("grid needs n, m >= 1".into()));
    }
    let mut vs = Vec::with_capacity((n + 1) * (m + 1));
    for j in 0..=m {
        for i in 0..=n {
            vs.push(Vec3::new(i as f64, j as f64, 0.0));
        }
    }
    let at = |i: usize, j: usize| j * (n + 1) + i;
    let mut qs = Vec::with_capacity(n * m);
    for j in 0..m {
        for i in 0..n {
            qs.push([at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)]);
        }
    }
    // Four CAD curves (one per side) meeting at four nominal-valence-1 corners.
    let mut features = Vec::new();
    for i in 0..n {
        features.push((at(i, 0), at(i + 1, 0), 0));
        features.push((at(i, m), at(i + 1, m), 2));
    }
    for j in 0..m {
        features.push((at(n, j), at(n, j + 1), 1));
        features.push((at(0, j), at(0, j + 1), 3));
    }
    let corners = vec![(at(0, 0), 1), (at(n, 0), 1), (at(n, m), 1), (at(0, m), 1)];
    QuadMesh::from_parts(vs, qs, features, corners)
}

fn annulus(n: usize, m: usize) -> Result<QuadMesh, MeshError> {
    if n < 3 || m < 1 {
        return Err(MeshError::InvalidSpec("annulus needs n >= 3, m >= 1".into()));
    }
    let mut vs = Vec::with_capacity(n * (m + 1));
    for k in 0..=m {
        let r = 1.0 + k as f64 / m as f64;
        for i in 0..n {
            let th = std::f64::consts::TAU * i as f64 / n as f64;
            vs.push(Vec3::new(r * th.cos(), r * th.sin(), 0.0));
        }
    }
    let at = |i: usize, k: usize| k * n + (i % n);
    let mut qs = Vec::with_capacity(n * m);
    // (angle, radius) is left-handed in the plane, so wind radius first.
    for k in 0..m {
        for i in 0..n {
            qs.push([at(i, k), at(i, k + 1), at(i + 1, k + 1), at(i + 1, k)]);
        }
    }
    QuadMesh::from_parts(vs, qs, vec![], vec![])
}

/// Open dislocated lattice in normalized (t, s) coordinates. Row `j` of
/// `rows` lists vertex ids left to right.
struct Lattice {
    rows: Vec<Vec<usize>>,
    coords: Vec<(f64, f64)>,
    quads: Vec<[usize; 4]>,
}

/// Builds `m + 1` vertex rows over a base of `n + 1` columns, inserting a
/// wedge at each (interface, center) in `wedges`. Interfaces are row indices
/// J: the wedge sits between rows J and J+1 and rows above J gain 2 vertices.
fn dislocated_lattice(n: usize, m: usize, wedges: &[(usize, usize)]) -> Result<Lattice, MeshError> {
    let mut rows: Vec<Vec<usize>> = Vec::with_capacity(m + 1);
    let mut coords = Vec::new();
    let mut quads = Vec::new();
    let mut width = n + 1;
    let mut next = 0usize;
    let push_row = |width: usize, j: usize, coords: &mut Vec<(f64, f64)>, next: &mut usize| {
        let s = j as f64 / m as f64;
        let row: Vec<usize> = (0..width)
            .map(|i| {
                coords.push((i as f64 / (width - 1) as f64, s));
                let id = *next;
                *next += 1;
                id
            })
            .collect();
        row
    };
    rows.push(push_row(width, 0, &mut coords, &mut next));
    for j in 0..m {
        let wedge = wedges.iter().find(|&&(iface, _)| iface == j).copied();
        let upper_width = if wedge.is_some() { width + 2 } else { width };
        let upper = push_row(upper_width, j + 1, &mut coords, &mut next);
        let lower = rows.last().unwrap();
        match wedge {
            None => {
                for k in 0..width - 1 {
                    quads.push([lower[k], lower[k + 1], upper[k + 1], upper[k]]);
                }
            }
            Some((_, c)) => {
                if c < 1 || c > width - 2 {
                    return Err(MeshError::InvalidSpec(format!(
                        "wedge center {c} outside [1, {}]",
                        width - 2
                    )));
                }
                for k in 0..c {
                    quads.push([lower[k], lower[k + 1], upper[k + 1], upper[k]]);
                }
                quads.push([lower[c], upper[c + 2], upper[c + 1], upper[c]]);
                for k in c..width - 1 {
                    quads.push([lower[k], lower[k + 1], upper[k + 3], upper[k + 2]]);
                }
            }
        }
        width = upper_width;
        rows.push(upper);
    }
    Ok(Lattice { rows, coords, quads })
}

/// Maps the unit square onto an (a, b)-scaled disk; corners of the square
/// land on the boundary as valence-1 vertices.
fn square_to_disk(t: f64, s: f64, a: f64, b: f64) -> Vec3 {
    let u = 2.0 * t - 1.0;
    let v = 2.0 * s - 1.0;
    Vec3::new(
        a * u * (1.0 - v * v / 2.0).sqrt(),
        b * v * (1.0 - u * u / 2.0).sqrt(),
        0.0,
    )
}

/// Wedge placement shared by the disk and ellipse generators: interfaces
/// strictly above the midline row, centers spread across the width.
fn disk_wedges(n: usize, m: usize, pairs: usize) -> Result<Vec<(usize, usize)>, MeshError> {
    if n < 4 || m < 4 || m % 2 != 0 {
        return Err(MeshError::InvalidSpec("disk lattice needs n >= 4 and even m >= 4".into()));
    }
    if pairs < 1 {
        return Err(MeshError::InvalidSpec("need at least one 3-5 pair".into()));
    }
    let lo = m / 2 + 1;
    let hi = m - 2;
    // Two-row spacing keeps each dislocation's valence footprint isolated.
    if lo > hi || (hi - lo + 1) < 2 * pairs {
        return Err(MeshError::InvalidSpec(format!(
            "cannot place {pairs} pairs in rows {lo}..={hi}; increase m"
        )));
    }
    let span = hi - lo + 1;
    let mut wedges = Vec::with_capacity(pairs);
    for p in 0..pairs {
        let iface = lo + p * span / pairs;
        // Width of the lower wedge row: p wedges already inserted below.
        let width = n + 1 + 2 * p;
        let c = ((p + 1) * width / (pairs + 1)).clamp(1, width - 2);
        wedges.push((iface, c));
    }
    Ok(wedges)
}

fn mapped_lattice(
    n: usize,
    m: usize,
    pairs: usize,
    a: f64,
    b: f64,
    tip_corners: bool,
) -> Result<QuadMesh, MeshError> {
    let wedges = disk_wedges(n, m, pairs)?;
    let lat = dislocated_lattice(n, m, &wedges)?;
    let vs: Vec<Vec3> = lat.coords.iter().map(|&(t, s)| square_to_disk(t, s, a, b)).collect();
    let mut corners = Vec::new();
    if tip_corners {
        let mid = &lat.rows[m / 2];
        corners.push((mid[0], 2));
        corners.push((*mid.last().unwrap(), 2));
    }
    QuadMesh::from_parts(vs, lat.quads, vec![], corners)
}

fn annulus_with_pairs(n: usize, m: usize, pairs: usize) -> Result<QuadMesh, MeshError> {
    if n < 6 || m < 4 {
        return Err(MeshError::InvalidSpec("annulus_with_pairs needs n >= 6, m >= 4".into()));
    }
    if pairs < 1 || 2 * pairs > m - 2 {
        return Err(MeshError::InvalidSpec(format!(
            "cannot place {pairs} pairs over {m} rings; increase m"
        )));
    }
    // Closed dislocated lattice: ring j has width[j] vertices; a wedge at
    // interface J adds 2 vertices to every ring above J.
    let span = m - 2;
    let mut wedges: Vec<(usize, usize)> = Vec::with_capacity(pairs);
    for p in 0..pairs {
        let iface = 1 + p * span / pairs;
        let width = n + 2 * p;
        let c = ((2 * p + 1) * width / (2 * pairs)).min(width - 1);
        wedges.push((iface, c));
    }
    let mut vs: Vec<Vec3> = Vec::new();
    let mut rings: Vec<Vec<usize>> = Vec::with_capacity(m + 1);
    // Rings inherit their angles so columns stay radially aligned; a wedge
    // inserts two extra angles bunched around its center column.
    let tau = std::f64::consts::TAU;
    let mut angles: Vec<f64> = (0..n).map(|i| tau * i as f64 / n as f64).collect();
    for j in 0..=m {
        if j > 0 {
            if let Some(&(_, c)) = wedges.iter().find(|&&(iface, _)| iface == j - 1) {
                let w = angles.len();
                let th = angles[c];
                let gap_prev = (th - angles[(c + w - 1) % w]).rem_euclid(tau);
                let gap_next = (angles[(c + 1) % w] - th).rem_euclid(tau);
                angles.splice(c..=c, [th - gap_prev / 3.0, th, th + gap_next / 3.0]);
            }
        }
        let r = 1.0 + j as f64 / m as f64;
        let ring: Vec<usize> = angles
            .iter()
            .map(|&th| {
                vs.push(Vec3::new(r * th.cos(), r * th.sin(), 0.0));
                vs.len() - 1
            })
            .collect();
        rings.push(ring);
    }
    let mut qs = Vec::new();
    for j in 0..m {
        let lower = &rings[j];
        let upper = &rings[j + 1];
        let w = lower.len();
        // Same left-handed (angle, radius) winding flip as in `annulus`.
        match wedges.iter().find(|&&(iface, _)| iface == j).copied() {
            None => {
                for k in 0..w {
                    qs.push([lower[k], upper[k], upper[(k + 1) % w], lower[(k + 1) % w]]);
                }
            }
            Some((_, c)) => {
                let uw = upper.len();
                for k in 0..c {
                    qs.push([lower[k], upper[k], upper[k + 1], lower[k + 1]]);
                }
                qs.push([lower[c], upper[c], upper[c + 1], upper[(c + 2) % uw]]);
                for k in c..w {
                    qs.push([
                        lower[k],
                        upper[(k + 2) % uw],
                        upper[(k + 3) % uw],
                        lower[(k + 1) % w],
                    ]);
                }
            }
        }
    }
    QuadMesh::from_parts(vs, qs, vec![], vec![])
}
