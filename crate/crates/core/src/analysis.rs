//! Post-processing: region-of-interest means, volume-fraction splits,
//! radial profiles, perturbation diameters and decibel-scale fields.

use crate::error::{Error, Result};
use crate::mesh::{dist, TetMesh};
use crate::sparse::SparseMatrix;

/// Spherical region of interest.
#[derive(Debug, Clone, Copy)]
pub struct RoiSpec {
    /// Center \[m\].
    pub center: [f64; 3],
    /// Diameter \[m\].
    pub diameter: f64,
}

impl RoiSpec {
    pub fn new(center: [f64; 3], diameter: f64) -> Result<Self> {
        if !(diameter > 0.0) {
            return Err(Error::invalid("roi diameter", "must be positive"));
        }
        Ok(RoiSpec { center, diameter })
    }

    pub fn radius(&self) -> f64 {
        self.diameter / 2.0
    }
}

/// Time series of region means.
#[derive(Debug, Clone, Default)]
pub struct RoiTimeSeries {
    pub times: Vec<f64>,
    pub tbv_mean: Vec<f64>,
    pub dbv_mean: Vec<f64>,
    pub obv_mean: Vec<f64>,
    /// dbv / tbv where tbv is positive, NaN otherwise.
    pub ratio: Vec<f64>,
}

impl RoiTimeSeries {
    pub fn push(&mut self, time: f64, tbv: f64, dbv: f64) {
        self.times.push(time);
        self.tbv_mean.push(tbv);
        self.dbv_mean.push(dbv);
        self.obv_mean.push(tbv - dbv);
        self.ratio
            .push(if tbv > 0.0 { dbv / tbv } else { f64::NAN });
    }
}

/// Node selector of a region: nodes of elements whose centroid lies in
/// the ball.
pub fn roi_nodes(mesh: &TetMesh, roi: &RoiSpec) -> Vec<bool> {
    let mut selected = vec![false; mesh.node_count()];
    for e in 0..mesh.tet_count() {
        if dist(mesh.tet_centroid(e), roi.center) < roi.radius() {
            for &n in &mesh.tets[e] {
                selected[n] = true;
            }
        }
    }
    selected
}

/// Mass-weighted integral mean of a nodal field over the region:
/// `(chi' M f) / (chi' M 1)` with `chi` the region node selector.
pub fn roi_mean(field: &[f64], roi: &RoiSpec, mesh: &TetMesh, mass: &SparseMatrix) -> Result<f64> {
    if field.len() != mesh.node_count() {
        return Err(Error::invalid(
            "field",
            format!(
                "field length {} does not match node count {}",
                field.len(),
                mesh.node_count()
            ),
        ));
    }
    let selected = roi_nodes(mesh, roi);
    if !selected.iter().any(|&s| s) {
        return Err(Error::degenerate("region of interest selects no elements"));
    }
    let mf = mass.mul_vec(field);
    let m1 = mass.mul_vec(&vec![1.0; field.len()]);
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..field.len() {
        if selected[i] {
            num += mf[i];
            den += m1[i];
        }
    }
    Ok(num / den)
}

/// Splits the state fields into (total, oxygenated, deoxygenated)
/// fractions: `tbv = excess + background`, `obv = tbv - dbv`.
pub fn obv_dbv_split(excess: &[f64], dbv: &[f64], c_bar: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let tbv: Vec<f64> = excess.iter().zip(c_bar).map(|(c, cb)| c + cb).collect();
    let obv: Vec<f64> = tbv.iter().zip(dbv).map(|(t, q)| t - q).collect();
    (tbv, obv, dbv.to_vec())
}

/// Radial bin means: bin `b` collects nodes at distance
/// `[b r_max / n, (b+1) r_max / n)` from the center, averaged with the
/// mass-matrix diagonal as weights. Empty bins are `None`.
pub fn radial_profile(
    field: &[f64],
    center: [f64; 3],
    n_bins: usize,
    r_max: f64,
    mesh: &TetMesh,
    mass: &SparseMatrix,
) -> Result<Vec<Option<f64>>> {
    if n_bins == 0 {
        return Err(Error::invalid("n_bins", "must be at least 1"));
    }
    if !(r_max > 0.0) {
        return Err(Error::invalid("r_max", "must be positive"));
    }
    let weights = mass.diagonal();
    let mut sums = vec![0.0; n_bins];
    let mut totals = vec![0.0; n_bins];
    for (i, &p) in mesh.nodes.iter().enumerate() {
        let r = dist(p, center);
        let b = (r / (r_max / n_bins as f64)).floor() as usize;
        if r < r_max && b < n_bins {
            sums[b] += weights[i] * field[i];
            totals[b] += weights[i];
        }
    }
    Ok(sums
        .into_iter()
        .zip(totals)
        .map(|(s, t)| if t > 0.0 { Some(s / t) } else { None })
        .collect())
}

/// Diameter of the perturbed region: twice the largest distance from the
/// region center among nodes inside the region where
/// `(field - reference) / background > 1` (strict). Zero when no node
/// qualifies.
pub fn perturbation_diameter(
    field: &[f64],
    reference: &[f64],
    background: f64,
    roi: &RoiSpec,
    mesh: &TetMesh,
) -> Result<f64> {
    if !(background > 0.0) {
        return Err(Error::invalid("background", "must be positive"));
    }
    if field.len() != reference.len() || field.len() != mesh.node_count() {
        return Err(Error::invalid(
            "field",
            "field lengths must match the node count",
        ));
    }
    let mut max_r: f64 = -1.0;
    for (i, &p) in mesh.nodes.iter().enumerate() {
        let r = dist(p, roi.center);
        if r <= roi.radius() && (field[i] - reference[i]) / background > 1.0 {
            max_r = max_r.max(r);
        }
    }
    Ok(if max_r < 0.0 { 0.0 } else { 2.0 * max_r })
}

/// Converts a non-negative field to decibels relative to its maximum:
/// `clamp(80 + 20 log10(x / max), 0, 80)`, with non-positive values
/// mapped to 0. Errors when the field has no positive entry.
pub fn db_scale(field: &[f64]) -> Result<Vec<f64>> {
    let max = field.iter().fold(0.0_f64, |m, &v| m.max(v));
    if !(max > 0.0) {
        return Err(Error::degenerate("decibel scale needs a positive maximum"));
    }
    Ok(field
        .iter()
        .map(|&x| {
            if x <= 0.0 {
                0.0
            } else {
                (80.0 + 20.0 * (x / max).log10()).clamp(0.0, 80.0)
            }
        })
        .collect())
}
