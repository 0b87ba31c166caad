//! P1 tetrahedral finite-element assembly.
//!
//! All integrals of linear basis products have closed forms, so no
//! numerical quadrature is involved:
//!
//! * mass: `V/10` diagonal, `V/20` off-diagonal per element
//! * weighted mass: the element mass block scaled by a per-element rate
//! * stiffness: `coeff * V * grad(phi_a) . grad(phi_b)` with the
//!   constant P1 gradients
//! * boundary load: a facet of area `A` and density `w` contributes
//!   `w A / 3` to each of its three nodes
//!
//! Element blocks are symmetric by construction and accumulated in a
//! fixed element order, so assembled operators are entry-wise symmetric.

use crate::error::{Error, Result};
use crate::mesh::{sub, TetMesh};
use crate::sparse::{SparseMatrix, TripletAccumulator};

/// Dense nodal vector (load or solution coefficients).
pub type LoadVector = Vec<f64>;

/// Constant gradients of the four P1 basis functions on a tetrahedron,
/// plus its volume.
fn p1_gradients(mesh: &TetMesh, e: usize) -> Result<([[f64; 3]; 4], f64)> {
    let t = mesh.tets[e];
    let p0 = mesh.nodes[t[0]];
    let a = sub(mesh.nodes[t[1]], p0);
    let b = sub(mesh.nodes[t[2]], p0);
    let c = sub(mesh.nodes[t[3]], p0);
    let det = a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0])
        + a[2] * (b[0] * c[1] - b[1] * c[0]);
    if det <= 0.0 {
        return Err(Error::degenerate(format!(
            "tetrahedron {e} has non-positive volume {:.3e}",
            det / 6.0
        )));
    }
    // rows of inv([a b c]^T) scaled by det
    let inv_t = [
        [
            b[1] * c[2] - b[2] * c[1],
            c[1] * a[2] - c[2] * a[1],
            a[1] * b[2] - a[2] * b[1],
        ],
        [
            b[2] * c[0] - b[0] * c[2],
            c[2] * a[0] - c[0] * a[2],
            a[2] * b[0] - a[0] * b[2],
        ],
        [
            b[0] * c[1] - b[1] * c[0],
            c[0] * a[1] - c[1] * a[0],
            a[0] * b[1] - a[1] * b[0],
        ],
    ];
    let mut grads = [[0.0; 3]; 4];
    for i in 0..3 {
        for d in 0..3 {
            grads[i + 1][d] = inv_t[d][i] / det;
        }
    }
    for d in 0..3 {
        grads[0][d] = -(grads[1][d] + grads[2][d] + grads[3][d]);
    }
    Ok((grads, det / 6.0))
}

/// Consistent mass matrix `M_ab = integral(phi_a phi_b)`.
pub fn assemble_mass(mesh: &TetMesh) -> Result<SparseMatrix> {
    assemble_weighted_mass(mesh, &vec![1.0; mesh.tet_count()])
}

/// Mass matrix with a constant per-element weight (reaction rate).
pub fn assemble_weighted_mass(mesh: &TetMesh, weight: &[f64]) -> Result<SparseMatrix> {
    assert_eq!(weight.len(), mesh.tet_count());
    let mut acc = TripletAccumulator::new(mesh.node_count());
    for (e, t) in mesh.tets.iter().enumerate() {
        let v = mesh.tet_volume(e);
        if v <= 0.0 {
            return Err(Error::degenerate(format!(
                "tetrahedron {e} has non-positive volume {v:.3e}"
            )));
        }
        if weight[e] == 0.0 {
            continue;
        }
        let diag = weight[e] * v / 10.0;
        let off = weight[e] * v / 20.0;
        for a in 0..4 {
            for b in 0..4 {
                acc.push(t[a], t[b], if a == b { diag } else { off });
            }
        }
    }
    Ok(acc.build())
}

/// Stiffness matrix `G_ab = integral(coeff grad(phi_a) . grad(phi_b))`
/// with a constant per-element coefficient.
pub fn assemble_stiffness(mesh: &TetMesh, coeff: &[f64]) -> Result<SparseMatrix> {
    assert_eq!(coeff.len(), mesh.tet_count());
    let mut acc = TripletAccumulator::new(mesh.node_count());
    for (e, t) in mesh.tets.iter().enumerate() {
        if coeff[e] == 0.0 {
            // still validate geometry so degenerate elements are caught
            let _ = p1_gradients(mesh, e)?;
            continue;
        }
        let (grads, v) = p1_gradients(mesh, e)?;
        let s = coeff[e] * v;
        // compute the upper triangle once and mirror it exactly
        let mut block = [[0.0; 4]; 4];
        for a in 0..4 {
            for b in a..4 {
                let g = s * crate::mesh::dot(grads[a], grads[b]);
                block[a][b] = g;
                block[b][a] = g;
            }
        }
        for a in 0..4 {
            for b in 0..4 {
                acc.push(t[a], t[b], block[a][b]);
            }
        }
    }
    Ok(acc.build())
}

/// Boundary load `L_i = integral over the patch of (w phi_i)` for
/// facet-constant densities `w`. `facet_values` pairs boundary-triangle
/// indices with densities and must cover every facet tagged `patch`.
pub fn assemble_boundary_load(
    mesh: &TetMesh,
    patch: u32,
    facet_values: &[(usize, f64)],
) -> Result<LoadVector> {
    let mut load = vec![0.0; mesh.node_count()];
    let mut covered = vec![false; mesh.boundary_tris.len()];
    for &(facet, w) in facet_values {
        let bt = mesh
            .boundary_tris
            .get(facet)
            .ok_or_else(|| Error::degenerate(format!("facet index {facet} out of range")))?;
        covered[facet] = true;
        let contrib = w * mesh.facet_area(facet) / 3.0;
        for &n in &bt.nodes {
            load[n] += contrib;
        }
    }
    for (i, bt) in mesh.boundary_tris.iter().enumerate() {
        if bt.patch == patch && !covered[i] {
            return Err(Error::degenerate(format!(
                "facet {i} of patch {patch} has no prescribed value"
            )));
        }
    }
    Ok(load)
}
