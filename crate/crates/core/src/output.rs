//! Output writers: atomic file writes, CSV series, field snapshots with
//! a matching reader, legacy VTK unstructured grids, and the run
//! manifest.

use crate::error::{Error, Result};
use crate::mesh::TetMesh;
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

/// Writes a file atomically: the content goes to a temporary sibling
/// which is renamed over the target once complete.
pub fn write_atomic(path: &Path, write: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    if let Some(d) = dir {
        std::fs::create_dir_all(d)?;
    }
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::invalid("path", "output path has no file name"))?;
    let tmp = path.with_file_name(format!(".{}.tmp", file_name.to_string_lossy()));
    let mut file = std::fs::File::create(&tmp)?;
    let result = write(&mut file).and_then(|()| file.flush().map_err(Error::from));
    drop(file);
    match result {
        Ok(()) => {
            std::fs::rename(&tmp, path)?;
            Ok(())
        }
        Err(e) => {
            let _ = std::fs::remove_file(&tmp);
            Err(e)
        }
    }
}

/// Writes a CSV with a header line and float rows.
pub fn write_csv(path: &Path, header: &str, rows: &[Vec<f64>]) -> Result<()> {
    write_atomic(path, |w| {
        let mut buf = String::new();
        writeln!(buf, "{header}").unwrap();
        for row in rows {
            let line: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            writeln!(buf, "{}", line.join(",")).unwrap();
        }
        w.write_all(buf.as_bytes())?;
        Ok(())
    })
}

/// Reads a CSV written by [`write_csv`], returning (header, rows).
/// Comment lines starting with `#` are skipped.
pub fn read_csv(path: &Path) -> Result<(String, Vec<Vec<f64>>)> {
    let file = std::fs::File::open(path)?;
    let reader = BufReader::new(file);
    let mut header = String::new();
    let mut rows = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if header.is_empty() {
            header = trimmed.to_string();
            continue;
        }
        let row: std::result::Result<Vec<f64>, _> =
            trimmed.split(',').map(|v| v.trim().parse()).collect();
        rows.push(row.map_err(|_| Error::Parse {
            path: path.display().to_string(),
            line: idx + 1,
            message: format!("bad numeric row `{trimmed}`"),
        })?);
    }
    if header.is_empty() {
        return Err(Error::Parse {
            path: path.display().to_string(),
            line: 0,
            message: "empty csv".to_string(),
        });
    }
    Ok((header, rows))
}

/// Field snapshot: three nodal fields at one instant.
#[derive(Debug, Clone)]
pub struct FieldSnapshot {
    pub step: usize,
    pub time: f64,
    pub tbv: Vec<f64>,
    pub dbv: Vec<f64>,
    pub obv: Vec<f64>,
}

pub fn snapshot_file_name(step: usize) -> String {
    format!("fields_{step:05}.csv")
}

pub fn write_snapshot(dir: &Path, snap: &FieldSnapshot) -> Result<()> {
    let path = dir.join(snapshot_file_name(snap.step));
    write_atomic(&path, |w| {
        let mut buf = String::new();
        writeln!(buf, "# step {} time {}", snap.step, snap.time).unwrap();
        writeln!(buf, "node,tbv,dbv,obv").unwrap();
        for i in 0..snap.tbv.len() {
            writeln!(buf, "{i},{},{},{}", snap.tbv[i], snap.dbv[i], snap.obv[i]).unwrap();
        }
        w.write_all(buf.as_bytes())?;
        Ok(())
    })
}

pub fn read_snapshot(path: &Path) -> Result<FieldSnapshot> {
    let file = std::fs::File::open(path)?;
    let reader = BufReader::new(file);
    let mut step = None;
    let mut time = 0.0;
    let mut tbv = Vec::new();
    let mut dbv = Vec::new();
    let mut obv = Vec::new();
    let mut saw_header = false;
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('#') {
            let parts: Vec<&str> = rest.split_whitespace().collect();
            if parts.len() == 4 && parts[0] == "step" && parts[2] == "time" {
                step = parts[1].parse().ok();
                time = parts[3].parse().unwrap_or(0.0);
            }
            continue;
        }
        if !saw_header {
            if trimmed != "node,tbv,dbv,obv" {
                return Err(Error::Parse {
                    path: path.display().to_string(),
                    line: idx + 1,
                    message: format!("unexpected snapshot header `{trimmed}`"),
                });
            }
            saw_header = true;
            continue;
        }
        let cols: Vec<&str> = trimmed.split(',').collect();
        if cols.len() != 4 {
            return Err(Error::Parse {
                path: path.display().to_string(),
                line: idx + 1,
                message: "expected 4 columns".to_string(),
            });
        }
        let parse = |s: &str| -> Result<f64> {
            s.trim().parse().map_err(|_| Error::Parse {
                path: path.display().to_string(),
                line: idx + 1,
                message: format!("bad number `{s}`"),
            })
        };
        tbv.push(parse(cols[1])?);
        dbv.push(parse(cols[2])?);
        obv.push(parse(cols[3])?);
    }
    let step = step.ok_or_else(|| Error::Parse {
        path: path.display().to_string(),
        line: 0,
        message: "snapshot is missing the `# step k time t` line".to_string(),
    })?;
    Ok(FieldSnapshot {
        step,
        time,
        tbv,
        dbv,
        obv,
    })
}

/// Writes a legacy ASCII VTK unstructured grid with named point scalars.
pub fn write_vtk(
    path: &Path,
    mesh: &TetMesh,
    point_fields: &[(&str, &[f64])],
    cell_fields: &[(&str, &[f64])],
) -> Result<()> {
    write_atomic(path, |w| {
        let mut buf = String::new();
        writeln!(buf, "# vtk DataFile Version 2.0").unwrap();
        writeln!(buf, "mcirc fields").unwrap();
        writeln!(buf, "ASCII").unwrap();
        writeln!(buf, "DATASET UNSTRUCTURED_GRID").unwrap();
        writeln!(buf, "POINTS {} double", mesh.node_count()).unwrap();
        for p in &mesh.nodes {
            writeln!(buf, "{} {} {}", p[0], p[1], p[2]).unwrap();
        }
        writeln!(buf, "CELLS {} {}", mesh.tet_count(), 5 * mesh.tet_count()).unwrap();
        for t in &mesh.tets {
            writeln!(buf, "4 {} {} {} {}", t[0], t[1], t[2], t[3]).unwrap();
        }
        writeln!(buf, "CELL_TYPES {}", mesh.tet_count()).unwrap();
        for _ in 0..mesh.tet_count() {
            writeln!(buf, "10").unwrap();
        }
        if !point_fields.is_empty() {
            writeln!(buf, "POINT_DATA {}", mesh.node_count()).unwrap();
            for (name, values) in point_fields {
                writeln!(buf, "SCALARS {name} double 1").unwrap();
                writeln!(buf, "LOOKUP_TABLE default").unwrap();
                for v in *values {
                    writeln!(buf, "{v}").unwrap();
                }
            }
        }
        if !cell_fields.is_empty() {
            writeln!(buf, "CELL_DATA {}", mesh.tet_count()).unwrap();
            for (name, values) in cell_fields {
                writeln!(buf, "SCALARS {name} double 1").unwrap();
                writeln!(buf, "LOOKUP_TABLE default").unwrap();
                for v in *values {
                    writeln!(buf, "{v}").unwrap();
                }
            }
        }
        w.write_all(buf.as_bytes())?;
        Ok(())
    })
}

/// Writes the run manifest: version, config hash, derived parameters as
/// comments, then the full resolved configuration (itself parseable as a
/// config file).
pub fn write_manifest(
    path: &Path,
    resolved_config: &str,
    derived_lines: &[String],
    created_unix: u64,
) -> Result<()> {
    let mut hasher = Sha256::new();
    hasher.update(resolved_config.as_bytes());
    let hash = hasher.finalize();
    let hash_hex: String = hash.iter().map(|b| format!("{b:02x}")).collect();
    write_atomic(path, |w| {
        let mut buf = String::new();
        writeln!(buf, "# mcirc manifest").unwrap();
        writeln!(buf, "# version = {}", env!("CARGO_PKG_VERSION")).unwrap();
        writeln!(buf, "# created_unix = {created_unix}").unwrap();
        writeln!(buf, "# config_sha256 = {hash_hex}").unwrap();
        for line in derived_lines {
            writeln!(buf, "# derived: {line}").unwrap();
        }
        buf.push_str(resolved_config);
        w.write_all(buf.as_bytes())?;
        Ok(())
    })
}
