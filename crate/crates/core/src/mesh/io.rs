//! ASCII mesh file format.
//!
//! ```text
//! MCIRC-MESH 1
//! nodes <N>
//! x y z          (N lines)
//! tets <M>
//! i0 i1 i2 i3 label   (M lines)
//! btris <K>
//! i0 i1 i2 patch      (K lines)
//! ```
//!
//! Indices are zero-based. Floats are written with enough digits to
//! round-trip bit-exactly.

use super::{BoundaryTri, CompartmentId, TetMesh};
use crate::error::{Error, Result};
use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

const MAGIC: &str = "MCIRC-MESH 1";

pub fn write_mesh(mesh: &TetMesh, path: &Path) -> Result<()> {
    crate::output::write_atomic(path, |w| write_mesh_to(mesh, w))
}

pub fn write_mesh_to(mesh: &TetMesh, w: &mut dyn Write) -> Result<()> {
    let mut buf = String::new();
    writeln!(buf, "{MAGIC}").unwrap();
    writeln!(buf, "nodes {}", mesh.node_count()).unwrap();
    for p in &mesh.nodes {
        writeln!(buf, "{} {} {}", p[0], p[1], p[2]).unwrap();
    }
    writeln!(buf, "tets {}", mesh.tet_count()).unwrap();
    for (t, l) in mesh.tets.iter().zip(&mesh.tet_labels) {
        writeln!(buf, "{} {} {} {} {}", t[0], t[1], t[2], t[3], l.0).unwrap();
    }
    writeln!(buf, "btris {}", mesh.boundary_tris.len()).unwrap();
    for bt in &mesh.boundary_tris {
        writeln!(
            buf,
            "{} {} {} {}",
            bt.nodes[0], bt.nodes[1], bt.nodes[2], bt.patch
        )
        .unwrap();
    }
    w.write_all(buf.as_bytes())?;
    Ok(())
}

pub fn read_mesh(path: &Path) -> Result<TetMesh> {
    let file = std::fs::File::open(path)?;
    read_mesh_from(BufReader::new(file), &path.display().to_string())
}

struct Lines<R> {
    reader: R,
    path: String,
    line_no: usize,
}

impl<R: BufRead> Lines<R> {
    fn next_line(&mut self) -> Result<Option<String>> {
        let mut line = String::new();
        loop {
            line.clear();
            let n = self.reader.read_line(&mut line)?;
            if n == 0 {
                return Ok(None);
            }
            self.line_no += 1;
            let trimmed = line.trim();
            if !trimmed.is_empty() {
                return Ok(Some(trimmed.to_string()));
            }
        }
    }

    fn err(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            path: self.path.clone(),
            line: self.line_no,
            message: message.into(),
        }
    }

    fn expect_line(&mut self, what: &str) -> Result<String> {
        self.next_line()?
            .ok_or_else(|| self.err(format!("unexpected end of file, expected {what}")))
    }
}

pub fn read_mesh_from<R: Read>(reader: R, path: &str) -> Result<TetMesh> {
    let mut lines = Lines {
        reader: BufReader::new(reader),
        path: path.to_string(),
        line_no: 0,
    };

    let header = lines.expect_line("header")?;
    if header != MAGIC {
        return Err(lines.err(format!("bad header `{header}`, expected `{MAGIC}`")));
    }

    let (name, n_nodes) = section_header(&mut lines)?;
    if name != "nodes" {
        return Err(lines.err(format!("unknown section `{name}`, expected `nodes`")));
    }
    let mut nodes = Vec::with_capacity(n_nodes);
    for _ in 0..n_nodes {
        let line = lines.expect_line("node coordinates")?;
        let vals = parse_floats(&lines, &line, 3)?;
        nodes.push([vals[0], vals[1], vals[2]]);
    }

    let (name, n_tets) = section_header(&mut lines)?;
    if name != "tets" {
        return Err(lines.err(format!("unknown section `{name}`, expected `tets`")));
    }
    let mut tets = Vec::with_capacity(n_tets);
    let mut tet_labels = Vec::with_capacity(n_tets);
    for _ in 0..n_tets {
        let line = lines.expect_line("tetrahedron")?;
        let vals = parse_ints(&lines, &line, 5)?;
        let t = [vals[0], vals[1], vals[2], vals[3]];
        for &i in &t {
            if i >= nodes.len() {
                return Err(lines.err(format!(
                    "node index {i} out of range (node count {})",
                    nodes.len()
                )));
            }
        }
        tets.push(t);
        tet_labels.push(CompartmentId(vals[4] as u32));
    }

    let (name, n_tris) = section_header(&mut lines)?;
    if name != "btris" {
        return Err(lines.err(format!("unknown section `{name}`, expected `btris`")));
    }
    let mut boundary_tris = Vec::with_capacity(n_tris);
    for _ in 0..n_tris {
        let line = lines.expect_line("boundary triangle")?;
        let vals = parse_ints(&lines, &line, 4)?;
        let t = [vals[0], vals[1], vals[2]];
        for &i in &t {
            if i >= nodes.len() {
                return Err(lines.err(format!(
                    "node index {i} out of range (node count {})",
                    nodes.len()
                )));
            }
        }
        boundary_tris.push(BoundaryTri {
            nodes: t,
            patch: vals[3] as u32,
        });
    }

    if let Some(extra) = lines.next_line()? {
        return Err(lines.err(format!("unexpected trailing content `{extra}`")));
    }

    Ok(TetMesh {
        nodes,
        tets,
        tet_labels,
        boundary_tris,
    })
}

fn section_header<R: BufRead>(lines: &mut Lines<R>) -> Result<(String, usize)> {
    let line = lines.expect_line("section header")?;
    let mut parts = line.split_whitespace();
    let name = parts
        .next()
        .ok_or_else(|| lines.err("empty section header"))?
        .to_string();
    let count: usize = parts
        .next()
        .ok_or_else(|| lines.err("section header missing count"))?
        .parse()
        .map_err(|_| lines.err(format!("bad count in section `{name}`")))?;
    if parts.next().is_some() {
        return Err(lines.err(format!("trailing tokens in section header `{line}`")));
    }
    Ok((name, count))
}

fn parse_floats<R: BufRead>(lines: &Lines<R>, line: &str, n: usize) -> Result<Vec<f64>> {
    let vals: std::result::Result<Vec<f64>, _> = line.split_whitespace().map(str::parse).collect();
    let vals = vals.map_err(|_| lines.err(format!("expected {n} floats, got `{line}`")))?;
    if vals.len() != n {
        return Err(lines.err(format!("expected {n} floats, got {}", vals.len())));
    }
    Ok(vals)
}

fn parse_ints<R: BufRead>(lines: &Lines<R>, line: &str, n: usize) -> Result<Vec<usize>> {
    let vals: std::result::Result<Vec<usize>, _> =
        line.split_whitespace().map(str::parse).collect();
    let vals = vals.map_err(|_| lines.err(format!("expected {n} integers, got `{line}`")))?;
    if vals.len() != n {
        return Err(lines.err(format!("expected {n} integers, got {}", vals.len())));
    }
    Ok(vals)
}
