//! Arterial boundary influx.
//!
//! The influx density `f` on the arterial patch is produced either as a
//! uniform distribution of a configured total, or shaped by a static
//! pressure solve on the artery compartment: Laplace's equation with a
//! Robin condition `dp/dn = -zeta lambda (p - p_external)` on every
//! artery-surface facet and a gravity boundary term `rho g.n`. The
//! pressure drop across the patch then sets the relative facet weights,
//! rescaled so the integral of `f` over the patch matches the configured
//! total.

use crate::assembly;
use crate::error::{Error, Result};
use crate::mesh::{dot, Submesh, TetMesh, PATCH_ARTERIAL};
use crate::sparse::{cg_solve, SparseMatrix, TripletAccumulator};
use crate::vasculature::VesselParams;

/// Robin transfer coefficients and the external reference pressure.
#[derive(Debug, Clone, Copy)]
pub struct RobinSpec {
    /// First transfer coefficient \[1/m\].
    pub zeta_r: f64,
    /// Second transfer coefficient (dimensionless lump).
    pub lambda_r: f64,
    /// External reference pressure \[Pa\].
    pub p_external: f64,
}

impl Default for RobinSpec {
    fn default() -> Self {
        RobinSpec {
            zeta_r: 1.0,
            lambda_r: 1.0,
            p_external: 75.0 * crate::vasculature::PA_PER_MMHG,
        }
    }
}

/// Influx density per arterial facet, plus the configured total influx.
#[derive(Debug, Clone)]
pub struct BoundaryFlux {
    /// Boundary-triangle indices of the arterial patch, in mesh order.
    pub facets: Vec<usize>,
    /// Flux density per facet, parallel to `facets`.
    pub values: Vec<f64>,
    /// Integral of the density over the patch.
    pub total: f64,
}

impl BoundaryFlux {
    /// Facet/value pairs for boundary-load assembly.
    pub fn facet_values(&self) -> Vec<(usize, f64)> {
        self.facets
            .iter()
            .copied()
            .zip(self.values.iter().copied())
            .collect()
    }
}

/// Nodal pressure on the artery submesh.
#[derive(Debug, Clone)]
pub struct PressureField {
    /// Artery submesh with node maps back to the parent mesh.
    pub submesh: Submesh,
    /// Nodal pressures \[Pa\], indexed by submesh-local node.
    pub pressures: Vec<f64>,
    pub robin: RobinSpec,
}

/// Uniform influx density `total / area(B)` on every arterial facet.
pub fn prescribed_flux(mesh: &TetMesh, total: f64) -> Result<BoundaryFlux> {
    let facets = mesh.facets_with_patch(PATCH_ARTERIAL);
    if facets.is_empty() {
        return Err(Error::degenerate("arterial patch is empty"));
    }
    let area: f64 = facets.iter().map(|&i| mesh.facet_area(i)).sum();
    if !(area > 0.0) {
        return Err(Error::degenerate("arterial patch has zero area"));
    }
    let density = total / area;
    Ok(BoundaryFlux {
        values: vec![density; facets.len()],
        facets,
        total,
    })
}

/// Boundary mass matrix over a facet set: `R_ab = integral(phi_a phi_b)`
/// on the triangles, with the exact P1 surface element block
/// `A/6` diagonal, `A/12` off-diagonal.
fn boundary_mass(n: usize, mesh: &TetMesh, facets: &[usize]) -> SparseMatrix {
    let mut acc = TripletAccumulator::new(n);
    for &f in facets {
        let tri = mesh.boundary_tris[f].nodes;
        let area = mesh.facet_area(f);
        for a in 0..3 {
            for b in 0..3 {
                let v = if a == b { area / 6.0 } else { area / 12.0 };
                acc.push(tri[a], tri[b], v);
            }
        }
    }
    acc.build()
}

/// Outward unit normal of boundary triangle `f` (away from the owning
/// tetrahedron).
fn outward_normal(mesh: &TetMesh, f: usize, owner: usize) -> [f64; 3] {
    let tri = mesh.boundary_tris[f].nodes;
    let p0 = mesh.nodes[tri[0]];
    let p1 = mesh.nodes[tri[1]];
    let p2 = mesh.nodes[tri[2]];
    let mut n = crate::mesh::cross(crate::mesh::sub(p1, p0), crate::mesh::sub(p2, p0));
    let len = crate::mesh::norm(n);
    for d in 0..3 {
        n[d] /= len;
    }
    // flip toward the outside: the owner centroid must be behind the face
    let c = mesh.tet_centroid(owner);
    if dot(crate::mesh::sub(c, p0), n) > 0.0 {
        for d in 0..3 {
            n[d] = -n[d];
        }
    }
    n
}

/// Static pressure solve on the artery compartment with per-facet
/// external pressures (one entry per artery-submesh boundary facet).
pub fn solve_ppe_with_facet_pressure(
    mesh: &TetMesh,
    params: &VesselParams,
    robin: RobinSpec,
    p_external: &[f64],
    is_artery: impl Fn(crate::mesh::CompartmentId) -> bool,
    tol: f64,
) -> Result<PressureField> {
    if !(robin.zeta_r > 0.0 && robin.lambda_r > 0.0) {
        return Err(Error::invalid(
            "zeta_r/lambda_r",
            "Robin coefficients must be positive",
        ));
    }
    let sub = mesh.submesh(|e| is_artery(mesh.tet_labels[e]));
    if sub.mesh.tet_count() == 0 {
        return Err(Error::degenerate("artery compartment is empty"));
    }
    // Robin condition sits on the full boundary of the artery submesh.
    let owner_lists = sub.mesh.facet_owner_lists()?;
    let owners: Vec<usize> = owner_lists.iter().map(|l| l[0]).collect();
    let facets: Vec<usize> = (0..sub.mesh.boundary_tris.len()).collect();
    if facets.is_empty() {
        return Err(Error::degenerate("artery submesh has no boundary facets"));
    }
    if p_external.len() != facets.len() {
        return Err(Error::invalid(
            "p_external",
            format!(
                "expected {} facet pressures, got {}",
                facets.len(),
                p_external.len()
            ),
        ));
    }

    let n = sub.mesh.node_count();
    let coeff = robin.zeta_r * robin.lambda_r;
    let laplace = assembly::assemble_stiffness(&sub.mesh, &vec![1.0; sub.mesh.tet_count()])?;
    let mut robin_mass = boundary_mass(n, &sub.mesh, &facets);
    robin_mass.scale(coeff);
    let system = laplace.add_scaled(&robin_mass, 1.0);

    // load: Robin reference pressure plus the gravity boundary term
    let gravity = [0.0, 0.0, params.gravity_z];
    let mut load = vec![0.0; n];
    for (k, &f) in facets.iter().enumerate() {
        let tri = sub.mesh.boundary_tris[f].nodes;
        let area = sub.mesh.facet_area(f);
        let normal = outward_normal(&sub.mesh, f, owners[f]);
        let w = coeff * p_external[k] + params.density * dot(gravity, normal);
        for &node in &tri {
            load[node] += w * area / 3.0;
        }
    }

    let pressures = cg_solve(&system, &load, tol, 20 * n.max(50))?;
    Ok(PressureField {
        submesh: sub,
        pressures,
        robin,
    })
}

/// Static pressure solve with a uniform external pressure taken from the
/// Robin specification.
pub fn solve_ppe(
    mesh: &TetMesh,
    params: &VesselParams,
    robin: RobinSpec,
    is_artery: impl Fn(crate::mesh::CompartmentId) -> bool,
    tol: f64,
) -> Result<PressureField> {
    let sub = mesh.submesh(|e| is_artery(mesh.tet_labels[e]));
    let count = sub.mesh.boundary_tris.len();
    drop(sub);
    solve_ppe_with_facet_pressure(
        mesh,
        params,
        robin,
        &vec![robin.p_external; count],
        is_artery,
        tol,
    )
}

/// Shapes the arterial influx from the pressure drop across the patch:
/// raw density `zeta lambda (p_external - mean facet pressure)`, negative
/// values clamped to zero, then rescaled so the patch integral equals
/// `total`.
pub fn flux_from_pressure(
    field: &PressureField,
    mesh: &TetMesh,
    total: f64,
) -> Result<BoundaryFlux> {
    let facets = mesh.facets_with_patch(PATCH_ARTERIAL);
    if facets.is_empty() {
        return Err(Error::degenerate("arterial patch is empty"));
    }
    let mut raw = Vec::with_capacity(facets.len());
    for &f in &facets {
        let tri = mesh.boundary_tris[f].nodes;
        let mut mean = 0.0;
        for &g in &tri {
            let local = field.submesh.local_node(g).map_err(|_| {
                Error::degenerate(format!(
                    "arterial facet {f} has node {g} outside the artery compartment"
                ))
            })?;
            mean += field.pressures[local];
        }
        mean /= 3.0;
        let value = field.robin.zeta_r * field.robin.lambda_r * (field.robin.p_external - mean);
        raw.push(value.max(0.0));
    }
    let integral: f64 = facets
        .iter()
        .zip(&raw)
        .map(|(&f, &v)| v * mesh.facet_area(f))
        .sum();
    if !(integral > 0.0) {
        return Err(Error::degenerate(
            "pressure drop produced an all-zero influx; cannot normalize to the configured total",
        ));
    }
    let scale = total / integral;
    Ok(BoundaryFlux {
        values: raw.iter().map(|&v| v * scale).collect(),
        facets,
        total,
    })
}
