//! Text formats for high-order meshes.
//!
//! Native format, one field per line, whitespace separated:
//!
//! ```text
//! quadcoarse-ho v1
//! representation lagrange
//! order 2
//! spacing equidistant
//! nodes 9
//! <x> <y> <z>            (one line per node, full round-trip precision)
//! elements 1
//! e <i0> ... <i8>        ((order+1)^2 indices, v-major, u fastest)
//! ```
//!
//! The representation tag is reserved for future encodings; only
//! "lagrange" is understood today. Coordinates are written with the
//! shortest decimal that parses back to the identical bits.
//!
//! OBJ export exists for order-1 meshes only, since OBJ quads cannot carry
//! higher-order nodes.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::HighOrderError;
use crate::geom::Vec3;

use super::{HighOrderMesh, Spacing};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HoFormat {
    Native,
    Obj,
}

pub fn write_high_order(mesh: &HighOrderMesh) -> String {
    let mut out = String::new();
    writeln!(out, "quadcoarse-ho v1").unwrap();
    writeln!(out, "representation lagrange").unwrap();
    writeln!(out, "order {}", mesh.order).unwrap();
    writeln!(out, "spacing {}", mesh.spacing.label()).unwrap();
    writeln!(out, "nodes {}", mesh.nodes.len()).unwrap();
    for p in &mesh.nodes {
        writeln!(out, "{} {} {}", p.x, p.y, p.z).unwrap();
    }
    writeln!(out, "elements {}", mesh.elements.len()).unwrap();
    for e in &mesh.elements {
        out.push('e');
        for id in e {
            write!(out, " {id}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn write_obj(mesh: &HighOrderMesh) -> Result<String, HighOrderError> {
    if mesh.order != 1 {
        return Err(HighOrderError::Unsupported(format!(
            "obj export is linear only, mesh has order {}",
            mesh.order
        )));
    }
    let mut out = String::new();
    for p in &mesh.nodes {
        writeln!(out, "v {} {} {}", p.x, p.y, p.z).unwrap();
    }
    for e in &mesh.elements {
        // Lattice [c00, c10, c01, c11] to the cyclic quad, 1-based.
        writeln!(out, "f {} {} {} {}", e[0] + 1, e[1] + 1, e[3] + 1, e[2] + 1).unwrap();
    }
    Ok(out)
}

pub fn export_high_order(
    mesh: &HighOrderMesh,
    path: &Path,
    format: HoFormat,
) -> Result<(), HighOrderError> {
    let text = match format {
        HoFormat::Native => write_high_order(mesh),
        HoFormat::Obj => write_obj(mesh)?,
    };
    std::fs::write(path, text)?;
    Ok(())
}

pub fn import_high_order(path: &Path) -> Result<HighOrderMesh, HighOrderError> {
    parse_high_order(&std::fs::read_to_string(path)?)
}

struct Lines<'a> {
    inner: std::str::Lines<'a>,
    no: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Result<&'a str, HighOrderError> {
        loop {
            self.no += 1;
            match self.inner.next() {
                Some(l) if l.trim().is_empty() => continue,
                Some(l) => return Ok(l.trim()),
                None => return Err(err(self.no, "unexpected end of file")),
            }
        }
    }
}

fn err(line: usize, msg: impl Into<String>) -> HighOrderError {
    HighOrderError::Parse { line, msg: msg.into() }
}

fn field<'a>(line: &'a str, no: usize, key: &str) -> Result<&'a str, HighOrderError> {
    line.strip_prefix(key)
        .and_then(|r| r.strip_prefix(' '))
        .map(str::trim)
        .ok_or_else(|| err(no, format!("expected `{key} ...`")))
}

pub fn parse_high_order(text: &str) -> Result<HighOrderMesh, HighOrderError> {
    let mut lines = Lines { inner: text.lines(), no: 0 };

    if lines.next()? != "quadcoarse-ho v1" {
        return Err(err(lines.no, "expected header `quadcoarse-ho v1`"));
    }
    let repr = field(lines.next()?, lines.no, "representation")?;
    if repr != "lagrange" {
        return Err(err(lines.no, format!("unsupported representation `{repr}`")));
    }
    let order: usize = field(lines.next()?, lines.no, "order")?
        .parse()
        .map_err(|_| err(lines.no, "bad order"))?;
    if order == 0 {
        return Err(err(lines.no, "order must be at least 1"));
    }
    let spacing_label = field(lines.next()?, lines.no, "spacing")?;
    let spacing = Spacing::parse(spacing_label)
        .ok_or_else(|| err(lines.no, format!("unknown spacing `{spacing_label}`")))?;

    let node_count: usize = field(lines.next()?, lines.no, "nodes")?
        .parse()
        .map_err(|_| err(lines.no, "bad node count"))?;
    let mut nodes = Vec::with_capacity(node_count);
    for _ in 0..node_count {
        let line = lines.next()?;
        let mut it = line.split_whitespace().map(|t| t.parse::<f64>());
        let (x, y, z) = (it.next(), it.next(), it.next());
        match (x, y, z, it.next()) {
            (Some(Ok(x)), Some(Ok(y)), Some(Ok(z)), None) => nodes.push(Vec3::new(x, y, z)),
            _ => return Err(err(lines.no, "expected three coordinates")),
        }
    }

    let element_count: usize = field(lines.next()?, lines.no, "elements")?
        .parse()
        .map_err(|_| err(lines.no, "bad element count"))?;
    let lattice = (order + 1) * (order + 1);
    let mut elements = Vec::with_capacity(element_count);
    for _ in 0..element_count {
        let line = lines.next()?;
        let rest = line
            .strip_prefix('e')
            .ok_or_else(|| err(lines.no, "expected `e <indices>`"))?;
        let ids: Vec<usize> = rest
            .split_whitespace()
            .map(|t| t.parse::<usize>())
            .collect::<Result<_, _>>()
            .map_err(|_| err(lines.no, "bad node index"))?;
        if ids.len() != lattice {
            return Err(err(
                lines.no,
                format!("element has {} indices, expected {lattice}", ids.len()),
            ));
        }
        if let Some(&bad) = ids.iter().find(|&&i| i >= nodes.len()) {
            return Err(err(lines.no, format!("node index {bad} out of range")));
        }
        elements.push(ids);
    }

    Ok(HighOrderMesh { order, spacing, nodes, elements })
}
