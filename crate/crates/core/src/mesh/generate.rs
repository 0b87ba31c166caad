//! Structured box meshes and predicate-based compartment labeling.
//!
//! Boxes are meshed as a grid of hexahedral cells, each split into the
//! same six tetrahedra along the cell diagonal so neighboring cells share
//! matching faces.

use super::{sub, BoundaryTri, CompartmentId, TetMesh, PATCH_ARTERIAL, PATCH_OUTER};
use crate::error::{Error, Result};
use std::collections::HashMap;

/// Spatial selection used for labeling and patch marking. Predicates are
/// evaluated at tetrahedron centroids (for labels) or facet centroids
/// (for surface patches).
#[derive(Debug, Clone)]
pub enum Region {
    /// Entire domain.
    All,
    /// Ball of radius `radius` around `center`.
    Sphere { center: [f64; 3], radius: f64 },
    /// Half space `normal . (x - origin) < 0`.
    HalfSpace { origin: [f64; 3], normal: [f64; 3] },
    /// Axis-aligned box with inclusive corners.
    Box { min: [f64; 3], max: [f64; 3] },
}

impl Region {
    pub fn contains(&self, p: [f64; 3]) -> bool {
        match self {
            Region::All => true,
            Region::Sphere { center, radius } => super::dist(p, *center) < *radius,
            Region::HalfSpace { origin, normal } => super::dot(sub(p, *origin), *normal) < 0.0,
            Region::Box { min, max } => (0..3).all(|d| p[d] >= min[d] && p[d] <= max[d]),
        }
    }
}

/// One labeling rule: tetrahedra whose centroid falls in `region` get
/// `label`. Later rules override earlier ones.
#[derive(Debug, Clone)]
pub struct LabelRule {
    pub region: Region,
    pub label: CompartmentId,
}

/// How the arterial patch is marked on the mesh.
#[derive(Debug, Clone)]
pub enum ArterialMarking {
    /// Leave patches untouched.
    None,
    /// Tag outer-surface facets whose centroid falls in the region.
    Surface(Region),
    /// Tag facets between artery-labeled and non-artery tetrahedra;
    /// interface facets are appended to the boundary list.
    Adjacency { artery: CompartmentId },
}

/// Generates a structured box mesh of `nx * ny * nz` cells over
/// `[origin, origin + extents]`, six tetrahedra per cell, with all outer
/// faces extracted as boundary triangles tagged [`PATCH_OUTER`] and a
/// single compartment label.
pub fn generate_box_mesh(
    nx: usize,
    ny: usize,
    nz: usize,
    extents: [f64; 3],
    origin: [f64; 3],
    label: CompartmentId,
) -> Result<TetMesh> {
    if nx == 0 || ny == 0 || nz == 0 {
        return Err(Error::invalid(
            "subdivisions",
            "cell counts must be at least 1",
        ));
    }
    for (d, &e) in extents.iter().enumerate() {
        if !(e > 0.0) {
            return Err(Error::invalid(
                "extents",
                format!("extent along axis {d} must be positive, got {e}"),
            ));
        }
    }

    let h = [
        extents[0] / nx as f64,
        extents[1] / ny as f64,
        extents[2] / nz as f64,
    ];
    let node_id = |i: usize, j: usize, k: usize| (k * (ny + 1) + j) * (nx + 1) + i;

    let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1) * (nz + 1));
    for k in 0..=nz {
        for j in 0..=ny {
            for i in 0..=nx {
                nodes.push([
                    origin[0] + i as f64 * h[0],
                    origin[1] + j as f64 * h[1],
                    origin[2] + k as f64 * h[2],
                ]);
            }
        }
    }

    // Six tetrahedra per cell, every path of axis steps from corner 000
    // to corner 111; a shared diagonal direction keeps cells conforming.
    const PATHS: [[usize; 3]; 6] = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];

    let mut tets = Vec::with_capacity(6 * nx * ny * nz);
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                let corner = |b: [usize; 3]| node_id(i + b[0], j + b[1], k + b[2]);
                for path in PATHS {
                    let mut b = [0usize; 3];
                    let v0 = corner(b);
                    b[path[0]] = 1;
                    let v1 = corner(b);
                    b[path[1]] = 1;
                    let v2 = corner(b);
                    b[path[2]] = 1;
                    let v3 = corner(b);
                    let mut t = [v0, v1, v2, v3];
                    let vol = super::tet_volume(nodes[t[0]], nodes[t[1]], nodes[t[2]], nodes[t[3]]);
                    if vol < 0.0 {
                        t.swap(1, 2);
                    }
                    tets.push(t);
                }
            }
        }
    }

    let tet_labels = vec![label; tets.len()];
    let mut mesh = TetMesh {
        nodes,
        tets,
        tet_labels,
        boundary_tris: Vec::new(),
    };
    mesh.boundary_tris = extract_boundary(&mesh);
    Ok(mesh)
}

/// Faces belonging to exactly one tetrahedron, tagged [`PATCH_OUTER`].
fn extract_boundary(mesh: &TetMesh) -> Vec<BoundaryTri> {
    let mut counts: HashMap<[usize; 3], ([usize; 3], usize)> = HashMap::new();
    for t in &mesh.tets {
        for f in [
            [t[0], t[1], t[2]],
            [t[0], t[1], t[3]],
            [t[0], t[2], t[3]],
            [t[1], t[2], t[3]],
        ] {
            let mut key = f;
            key.sort_unstable();
            let entry = counts.entry(key).or_insert((f, 0));
            entry.1 += 1;
        }
    }
    let mut tris: Vec<BoundaryTri> = counts
        .into_iter()
        .filter(|(_, (_, c))| *c == 1)
        .map(|(_, (f, _))| BoundaryTri {
            nodes: f,
            patch: PATCH_OUTER,
        })
        .collect();
    tris.sort_by_key(|bt| {
        let mut k = bt.nodes;
        k.sort_unstable();
        k
    });
    tris
}

/// Applies labeling rules at tetrahedron centroids (later rules win) and
/// marks the arterial patch. Unmatched tetrahedra keep their prior label.
pub fn label_by_predicate(
    mesh: &TetMesh,
    rules: &[LabelRule],
    marking: &ArterialMarking,
) -> TetMesh {
    let mut out = mesh.clone();
    for rule in rules {
        for e in 0..out.tet_count() {
            if rule.region.contains(out.tet_centroid(e)) {
                out.tet_labels[e] = rule.label;
            }
        }
    }
    match marking {
        ArterialMarking::None => {}
        ArterialMarking::Surface(region) => {
            for i in 0..out.boundary_tris.len() {
                if region.contains(out.facet_centroid(i)) {
                    out.boundary_tris[i].patch = PATCH_ARTERIAL;
                }
            }
        }
        ArterialMarking::Adjacency { artery } => {
            let owners = out.face_owners();
            let mut interface = Vec::new();
            for (key, own) in owners {
                if own.len() == 2 {
                    let a = out.tet_labels[own[0]] == *artery;
                    let b = out.tet_labels[own[1]] == *artery;
                    if a != b {
                        interface.push(BoundaryTri {
                            nodes: key,
                            patch: PATCH_ARTERIAL,
                        });
                    }
                }
            }
            interface.sort_by_key(|bt| bt.nodes);
            out.boundary_tris.extend(interface);
        }
    }
    out
}
