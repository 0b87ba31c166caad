//! Labeled tetrahedral meshes.
//!
//! A [`TetMesh`] carries node positions in meters, tetrahedra with one
//! compartment label each, and boundary triangles tagged by patch. The
//! arterial interface patch (tag [`PATCH_ARTERIAL`]) marks where blood
//! enters the microcirculation domain.

mod generate;
mod io;

pub use generate::{generate_box_mesh, label_by_predicate, ArterialMarking, LabelRule, Region};
pub use io::{read_mesh, read_mesh_from, write_mesh, write_mesh_to};

use crate::error::{Error, Result};
use std::collections::HashMap;

/// Outer surface patch tag (no prescribed influx).
pub const PATCH_OUTER: u32 = 0;
/// Arterial interface patch tag: the surface through which blood enters
/// the microcirculation domain.
pub const PATCH_ARTERIAL: u32 = 1;

/// Compartment identifier, resolved by a [`crate::config::CompartmentTable`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CompartmentId(pub u32);

/// Boundary triangle with its patch tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryTri {
    pub nodes: [usize; 3],
    pub patch: u32,
}

/// Labeled tetrahedral mesh.
///
/// Immutable after construction; all operations that change labels or
/// patches return a new mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct TetMesh {
    /// Node positions in meters.
    pub nodes: Vec<[f64; 3]>,
    /// Tetrahedra as 4-tuples of node indices, positively oriented.
    pub tets: Vec<[usize; 4]>,
    /// Compartment label per tetrahedron.
    pub tet_labels: Vec<CompartmentId>,
    /// Boundary triangles with patch tags.
    pub boundary_tris: Vec<BoundaryTri>,
}

/// Signed volume of the tetrahedron (p0, p1, p2, p3): det([p1-p0, p2-p0, p3-p0]) / 6.
pub fn tet_volume(p0: [f64; 3], p1: [f64; 3], p2: [f64; 3], p3: [f64; 3]) -> f64 {
    let a = sub(p1, p0);
    let b = sub(p2, p0);
    let c = sub(p3, p0);
    dot(a, cross(b, c)) / 6.0
}

/// Area of the triangle (p0, p1, p2).
pub fn tri_area(p0: [f64; 3], p1: [f64; 3], p2: [f64; 3]) -> f64 {
    norm(cross(sub(p1, p0), sub(p2, p0))) / 2.0
}

pub(crate) fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    norm(sub(a, b))
}

/// Canonical key for a triangular face (sorted node indices).
fn face_key(a: usize, b: usize, c: usize) -> [usize; 3] {
    let mut k = [a, b, c];
    k.sort_unstable();
    k
}

/// The four faces of a tetrahedron.
fn tet_faces(t: &[usize; 4]) -> [[usize; 3]; 4] {
    [
        [t[0], t[1], t[2]],
        [t[0], t[1], t[3]],
        [t[0], t[2], t[3]],
        [t[1], t[2], t[3]],
    ]
}

impl TetMesh {
    /// Number of nodes.
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Number of tetrahedra.
    pub fn tet_count(&self) -> usize {
        self.tets.len()
    }

    /// Signed volume of tetrahedron `e`.
    pub fn tet_volume(&self, e: usize) -> f64 {
        let t = self.tets[e];
        tet_volume(
            self.nodes[t[0]],
            self.nodes[t[1]],
            self.nodes[t[2]],
            self.nodes[t[3]],
        )
    }

    /// Centroid of tetrahedron `e`.
    pub fn tet_centroid(&self, e: usize) -> [f64; 3] {
        let t = self.tets[e];
        let mut c = [0.0; 3];
        for &n in &t {
            for d in 0..3 {
                c[d] += self.nodes[n][d];
            }
        }
        [c[0] / 4.0, c[1] / 4.0, c[2] / 4.0]
    }

    /// Sum of all tetrahedron volumes.
    pub fn total_volume(&self) -> f64 {
        (0..self.tet_count()).map(|e| self.tet_volume(e)).sum()
    }

    /// Area of boundary triangle `i`.
    pub fn facet_area(&self, i: usize) -> f64 {
        let t = self.boundary_tris[i].nodes;
        tri_area(self.nodes[t[0]], self.nodes[t[1]], self.nodes[t[2]])
    }

    /// Centroid of boundary triangle `i`.
    pub fn facet_centroid(&self, i: usize) -> [f64; 3] {
        let t = self.boundary_tris[i].nodes;
        let mut c = [0.0; 3];
        for &n in &t {
            for d in 0..3 {
                c[d] += self.nodes[n][d];
            }
        }
        [c[0] / 3.0, c[1] / 3.0, c[2] / 3.0]
    }

    /// Indices of boundary triangles carrying `patch`.
    pub fn facets_with_patch(&self, patch: u32) -> Vec<usize> {
        (0..self.boundary_tris.len())
            .filter(|&i| self.boundary_tris[i].patch == patch)
            .collect()
    }

    /// Total area of the facets carrying `patch`.
    pub fn patch_area(&self, patch: u32) -> f64 {
        self.facets_with_patch(patch)
            .iter()
            .map(|&i| self.facet_area(i))
            .sum()
    }

    /// Index of the node nearest to `point`.
    pub fn nearest_node(&self, point: [f64; 3]) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, &p) in self.nodes.iter().enumerate() {
            let d = dist(p, point);
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }

    /// Map from canonical face key to the tetrahedra owning that face.
    pub(crate) fn face_owners(&self) -> HashMap<[usize; 3], Vec<usize>> {
        let mut owners: HashMap<[usize; 3], Vec<usize>> = HashMap::new();
        for (e, t) in self.tets.iter().enumerate() {
            for f in tet_faces(t) {
                owners
                    .entry(face_key(f[0], f[1], f[2]))
                    .or_default()
                    .push(e);
            }
        }
        owners
    }

    /// For each boundary triangle, the tetrahedra it is a face of.
    /// Errors if a triangle matches no tetrahedron face.
    pub fn facet_owner_lists(&self) -> Result<Vec<Vec<usize>>> {
        let owners = self.face_owners();
        let mut out = Vec::with_capacity(self.boundary_tris.len());
        for (i, bt) in self.boundary_tris.iter().enumerate() {
            let key = face_key(bt.nodes[0], bt.nodes[1], bt.nodes[2]);
            let own = owners.get(&key).ok_or_else(|| {
                Error::degenerate(format!(
                    "boundary triangle {i} is not a face of any tetrahedron"
                ))
            })?;
            out.push(own.clone());
        }
        Ok(out)
    }

    /// Structural validation: index ranges, orientation, label count, and
    /// the boundary-face property. A boundary triangle must be a face of
    /// exactly one tetrahedron, except for an arterial-interface triangle
    /// which may separate an artery tetrahedron from a tissue tetrahedron.
    pub fn validate(&self, is_artery: impl Fn(CompartmentId) -> bool) -> Result<()> {
        let n = self.node_count();
        if self.tet_labels.len() != self.tets.len() {
            return Err(Error::degenerate(format!(
                "{} labels for {} tetrahedra",
                self.tet_labels.len(),
                self.tets.len()
            )));
        }
        for (e, t) in self.tets.iter().enumerate() {
            for &i in t {
                if i >= n {
                    return Err(Error::degenerate(format!(
                        "tetrahedron {e} references node {i} (node count {n})"
                    )));
                }
            }
            let v = self.tet_volume(e);
            if v <= 0.0 {
                return Err(Error::degenerate(format!(
                    "tetrahedron {e} has non-positive volume {v:.3e}"
                )));
            }
        }
        let owners = self.face_owners();
        for (i, bt) in self.boundary_tris.iter().enumerate() {
            for &n_idx in &bt.nodes {
                if n_idx >= n {
                    return Err(Error::degenerate(format!(
                        "boundary triangle {i} references node {n_idx} (node count {n})"
                    )));
                }
            }
            let key = face_key(bt.nodes[0], bt.nodes[1], bt.nodes[2]);
            let count = owners.get(&key).map_or(0, |v| v.len());
            let ok = match count {
                1 => true,
                // interface facet between artery and tissue
                2 => {
                    bt.patch == PATCH_ARTERIAL && {
                        let own = &owners[&key];
                        is_artery(self.tet_labels[own[0]]) != is_artery(self.tet_labels[own[1]])
                    }
                }
                _ => false,
            };
            if !ok {
                return Err(Error::degenerate(format!(
                    "boundary triangle {i} is a face of {count} tetrahedra"
                )));
            }
        }
        Ok(())
    }

    /// Extracts the submesh of tetrahedra selected by `keep`, with a
    /// node renumbering. Boundary triangles whose nodes all survive are
    /// carried over.
    pub fn submesh(&self, keep: impl Fn(usize) -> bool) -> Submesh {
        let mut node_map = vec![usize::MAX; self.node_count()];
        let mut nodes = Vec::new();
        let mut tets = Vec::new();
        let mut tet_labels = Vec::new();
        let mut parent_tets = Vec::new();
        for (e, t) in self.tets.iter().enumerate() {
            if !keep(e) {
                continue;
            }
            let mut local = [0usize; 4];
            for (slot, &g) in local.iter_mut().zip(t.iter()) {
                if node_map[g] == usize::MAX {
                    node_map[g] = nodes.len();
                    nodes.push(self.nodes[g]);
                }
                *slot = node_map[g];
            }
            tets.push(local);
            tet_labels.push(self.tet_labels[e]);
            parent_tets.push(e);
        }
        let mut boundary_tris = Vec::new();
        let mut parent_facets = Vec::new();
        for (i, bt) in self.boundary_tris.iter().enumerate() {
            let mapped: Vec<usize> = bt.nodes.iter().map(|&g| node_map[g]).collect();
            if mapped.iter().all(|&m| m != usize::MAX) {
                boundary_tris.push(BoundaryTri {
                    nodes: [mapped[0], mapped[1], mapped[2]],
                    patch: bt.patch,
                });
                parent_facets.push(i);
            }
        }
        let parent_nodes: Vec<usize> = {
            let mut inv = vec![0usize; nodes.len()];
            for (g, &l) in node_map.iter().enumerate() {
                if l != usize::MAX {
                    inv[l] = g;
                }
            }
            inv
        };
        Submesh {
            mesh: TetMesh {
                nodes,
                tets,
                tet_labels,
                boundary_tris,
            },
            parent_nodes,
            parent_tets,
            parent_facets,
            node_map,
        }
    }
}

/// A renumbered piece of a parent mesh with index maps in both directions.
#[derive(Debug, Clone)]
pub struct Submesh {
    pub mesh: TetMesh,
    /// Local node index -> parent node index.
    pub parent_nodes: Vec<usize>,
    /// Local tet index -> parent tet index.
    pub parent_tets: Vec<usize>,
    /// Local boundary-triangle index -> parent boundary-triangle index.
    pub parent_facets: Vec<usize>,
    /// Parent node index -> local node index (`usize::MAX` when absent).
    pub node_map: Vec<usize>,
}

impl Submesh {
    /// Local index of a parent node, or an error naming the node.
    pub fn local_node(&self, parent: usize) -> Result<usize> {
        match self.node_map.get(parent) {
            Some(&l) if l != usize::MAX => Ok(l),
            _ => Err(Error::degenerate(format!(
                "node {parent} does not belong to the submesh"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const REF: [[f64; 3]; 4] = [
        [0.0, 0.0, 0.0],
        [1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, 0.0, 1.0],
    ];

    #[test]
    fn reference_tet_volume_is_one_sixth() {
        assert_eq!(tet_volume(REF[0], REF[1], REF[2], REF[3]), 1.0 / 6.0);
    }

    #[test]
    fn coplanar_points_have_zero_volume() {
        let v = tet_volume(
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [1.0, 1.0, 0.0],
        );
        assert_eq!(v, 0.0);
    }

    #[test]
    fn swapping_vertices_flips_sign() {
        assert_eq!(tet_volume(REF[0], REF[2], REF[1], REF[3]), -1.0 / 6.0);
    }

    #[test]
    fn unit_right_triangle_area() {
        let a = tri_area([0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]);
        assert!((a - 0.5).abs() < 1e-15);
    }
}
