//! Microvascular transport parameters.
//!
//! Everything the transport model needs is derived from a small set of
//! physical constants and per-compartment microvessel length densities:
//! the arteriole/capillary/venule split of the length density, the
//! background total blood volume fraction, the Hagen-Poiseuille diffusion
//! coefficient, arteriole length and single-arteriole flow rate, the
//! venous outflow rate and the fractional oxygen consumption rate.

use crate::config::CompartmentTable;
use crate::error::{Error, Result};
use crate::mesh::{CompartmentId, TetMesh, PATCH_ARTERIAL};
use std::collections::BTreeMap;

/// Pa per mmHg.
pub const PA_PER_MMHG: f64 = 133.322;
/// m^3/s per ml/min.
pub const M3S_PER_ML_MIN: f64 = 1e-6 / 60.0;

/// Physical parameters of the transport model (SI units).
#[derive(Debug, Clone)]
pub struct VesselParams {
    /// Arteriole diameter \[m\].
    pub d_arteriole: f64,
    /// Capillary diameter \[m\].
    pub d_capillary: f64,
    /// Venule diameter \[m\].
    pub d_venule: f64,
    /// Arteriole cross-sectional area fraction.
    pub area_frac_arteriole: f64,
    /// Capillary cross-sectional area fraction.
    pub area_frac_capillary: f64,
    /// Venule cross-sectional area fraction.
    pub area_frac_venule: f64,
    /// Relative cross-sectional expansion due to vessel upregulation.
    pub expansion: f64,
    /// Relative pressure drop along arterioles.
    pub pressure_drop_frac: f64,
    /// Reference oxygenated blood volume fraction.
    pub oxygenated_frac: f64,
    /// Blood viscosity \[Pa s\].
    pub viscosity: f64,
    /// Blood density \[kg/m^3\].
    pub density: f64,
    /// Total cerebral blood flow \[m^3/s\].
    pub total_flow: f64,
    /// Average (diastolic) pressure \[Pa\].
    pub mean_pressure: f64,
    /// Coupling constant between deoxygenated and total volume gradients.
    pub gradient_coupling: f64,
    /// Molecular oxygen consumption rate \[1/s\].
    pub consumption_rate: f64,
    /// Hemoglobin molality in blood \[mol/kg\].
    pub hemoglobin_molality: f64,
    /// Simulated time interval \[s\].
    pub t_end: f64,
    /// Time step \[s\].
    pub dt: f64,
    /// Oscillator signal decay rate \[1/s\].
    pub signal_decay: f64,
    /// Oscillator flow-dependent elimination constant \[1/s^2\].
    pub flow_elimination: f64,
    /// Oscillator neural drive \[1/s^2\].
    pub neural_drive: f64,
    /// Gravitational acceleration, z component \[m/s^2\].
    pub gravity_z: f64,
}

impl Default for VesselParams {
    /// Textbook parameter set used throughout: diameters and area
    /// fractions of the three microvessel classes, blood constants,
    /// oscillator constants and the 21 s / 0.25 s time grid.
    fn default() -> Self {
        VesselParams {
            d_arteriole: 1.0e-5,
            d_capillary: 7.0e-6,
            d_venule: 1.8e-5,
            area_frac_arteriole: 0.3,
            area_frac_capillary: 0.4,
            area_frac_venule: 0.3,
            expansion: 0.21,
            pressure_drop_frac: 0.7,
            oxygenated_frac: 0.85,
            viscosity: 4.0e-3,
            density: 1050.0,
            total_flow: 750.0 * M3S_PER_ML_MIN,
            mean_pressure: 75.0 * PA_PER_MMHG,
            gradient_coupling: 1.0,
            consumption_rate: 0.4,
            hemoglobin_molality: 0.0018,
            t_end: 21.0,
            dt: 0.25,
            signal_decay: 0.65,
            flow_elimination: 0.41,
            neural_drive: 1.0,
            gravity_z: -9.81,
        }
    }
}

impl VesselParams {
    /// Checks the documented invariants, naming the offending field.
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("D_a", self.d_arteriole),
            ("D_c", self.d_capillary),
            ("D_v", self.d_venule),
            ("mu", self.viscosity),
            ("rho", self.density),
            ("Q", self.total_flow),
            ("p_bar", self.mean_pressure),
            ("psi", self.hemoglobin_molality),
            ("dt", self.dt),
            ("kappa", self.signal_decay),
            ("gamma", self.flow_elimination),
        ];
        for (name, v) in positive {
            if !(v > 0.0) {
                return Err(Error::invalid(name, format!("must be positive, got {v}")));
            }
        }
        let gsum = self.area_frac_arteriole + self.area_frac_capillary + self.area_frac_venule;
        if (gsum - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(
                "gamma_a+gamma_c+gamma_v",
                format!("area fractions must sum to 1, got {gsum}"),
            ));
        }
        if !(self.oxygenated_frac > 0.0 && self.oxygenated_frac < 1.0) {
            return Err(Error::invalid(
                "h",
                format!("must lie in (0, 1), got {}", self.oxygenated_frac),
            ));
        }
        if !(self.pressure_drop_frac > 0.0 && self.pressure_drop_frac <= 1.0) {
            return Err(Error::invalid(
                "vartheta",
                format!("must lie in (0, 1], got {}", self.pressure_drop_frac),
            ));
        }
        if self.t_end < 0.0 {
            return Err(Error::invalid("T", "must be non-negative"));
        }
        if self.gradient_coupling < 0.0 {
            return Err(Error::invalid("tau", "must be non-negative"));
        }
        if self.expansion < 0.0 {
            return Err(Error::invalid("theta", "must be non-negative"));
        }
        if self.consumption_rate < 0.0 {
            return Err(Error::invalid("eta", "must be non-negative"));
        }
        Ok(())
    }

    fn area_arteriole(&self) -> f64 {
        cross_section_area(self.d_arteriole).unwrap()
    }
}

/// Circular cross-sectional area `pi D^2 / 4`.
pub fn cross_section_area(diameter: f64) -> Result<f64> {
    if !(diameter > 0.0) {
        return Err(Error::invalid(
            "diameter",
            format!("must be positive, got {diameter}"),
        ));
    }
    Ok(std::f64::consts::PI * diameter * diameter / 4.0)
}

/// Arteriole share of a total microvessel length density:
/// `xi_a = xi / (1 + A_a g_c / (A_c g_a) + A_a g_v / (A_v g_a))`.
pub fn arteriole_length_density(xi: f64, p: &VesselParams) -> Result<f64> {
    if !(xi > 0.0) {
        return Err(Error::invalid(
            "xi",
            format!("length density must be positive, got {xi}"),
        ));
    }
    let a_a = cross_section_area(p.d_arteriole)?;
    let a_c = cross_section_area(p.d_capillary)?;
    let a_v = cross_section_area(p.d_venule)?;
    let bracket = 1.0
        + a_a * p.area_frac_capillary / (a_c * p.area_frac_arteriole)
        + a_a * p.area_frac_venule / (a_v * p.area_frac_arteriole);
    Ok(xi / bracket)
}

/// Capillary and venule length densities implied by the arteriole one.
pub fn capillary_venule_densities(xi_a: f64, p: &VesselParams) -> Result<(f64, f64)> {
    if !(xi_a > 0.0) {
        return Err(Error::invalid("xi_a", "must be positive"));
    }
    let a_a = cross_section_area(p.d_arteriole)?;
    let a_c = cross_section_area(p.d_capillary)?;
    let a_v = cross_section_area(p.d_venule)?;
    let xi_c = a_a * xi_a * p.area_frac_capillary / (a_c * p.area_frac_arteriole);
    let xi_v = a_a * xi_a * p.area_frac_venule / (a_v * p.area_frac_arteriole);
    Ok((xi_c, xi_v))
}

/// Background total blood volume fraction:
/// `expansion * (xi_a A_a + xi_c A_c + xi_v A_v)`, which collapses to
/// `expansion * xi_a A_a / g_a`.
pub fn background_tbv(xi_a: f64, p: &VesselParams) -> Result<f64> {
    if !(xi_a > 0.0) {
        return Err(Error::invalid("xi_a", "must be positive"));
    }
    Ok(p.expansion * xi_a * p.area_arteriole() / p.area_frac_arteriole)
}

/// Hagen-Poiseuille diffusion coefficient
/// `delta = lambda A_a p_bar / (8 pi mu)` where `lambda` is the ratio of
/// the local arteriole density to its boundary average.
pub fn diffusion_coefficient(lambda_ratio: f64, p: &VesselParams) -> Result<f64> {
    if !(lambda_ratio > 0.0) {
        return Err(Error::invalid("lambda", "must be positive"));
    }
    Ok(lambda_ratio * p.area_arteriole() * p.mean_pressure
        / (8.0 * std::f64::consts::PI * p.viscosity))
}

/// Flow rate of a single arteriole from the total flow, the arterial
/// patch area and the average arteriole density: `Q / (|B| xi_a_mean)`.
pub fn arteriole_flow_rate(total_flow: f64, patch_area: f64, xi_a_mean: f64) -> Result<f64> {
    if !(patch_area > 0.0) {
        return Err(Error::invalid("patch_area", "must be positive"));
    }
    if !(xi_a_mean > 0.0) {
        return Err(Error::invalid("xi_a_mean", "must be positive"));
    }
    if !(total_flow > 0.0) {
        return Err(Error::invalid("Q", "must be positive"));
    }
    Ok(total_flow / (patch_area * xi_a_mean))
}

/// Arteriole length from the Hagen-Poiseuille pressure drop:
/// `L = vartheta p_bar A_a^2 / (8 pi mu Q_a)`.
pub fn arteriole_length(q_arteriole: f64, p: &VesselParams) -> Result<f64> {
    if !(q_arteriole > 0.0) {
        return Err(Error::invalid("Q_a", "must be positive"));
    }
    let a_a = p.area_arteriole();
    let len = p.pressure_drop_frac * p.mean_pressure * a_a * a_a
        / (8.0 * std::f64::consts::PI * p.viscosity * q_arteriole);
    if !(len > 0.0) {
        return Err(Error::invalid(
            "L",
            "derived arteriole length is degenerate",
        ));
    }
    Ok(len)
}

/// Venous outflow rate calibrated so the sink over the largest element
/// (treated as a sphere) matches the arteriole flux on its surface:
/// `eps = delta tau (vartheta c / L) (36 pi / V_max)^(1/3)`.
pub fn outflow_rate(
    delta: f64,
    c_tilde: f64,
    arteriole_len: f64,
    v_max: f64,
    p: &VesselParams,
) -> Result<f64> {
    if !(v_max > 0.0) {
        return Err(Error::invalid("V_max", "must be positive"));
    }
    if !(arteriole_len > 0.0) {
        return Err(Error::invalid("L", "must be positive"));
    }
    let shape = (36.0 * std::f64::consts::PI / v_max).cbrt();
    Ok(delta * p.gradient_coupling * p.pressure_drop_frac * c_tilde / arteriole_len * shape)
}

/// Fractional oxygen consumption rate `eta / (rho psi)`.
pub fn oxygen_consumption_rate(p: &VesselParams) -> f64 {
    p.consumption_rate / (p.density * p.hemoglobin_molality)
}

/// Per-compartment derived quantities.
#[derive(Debug, Clone, Copy)]
pub struct CompartmentFields {
    /// Arteriole length density \[1/m^2\].
    pub xi_arteriole: f64,
    /// Capillary length density \[1/m^2\].
    pub xi_capillary: f64,
    /// Venule length density \[1/m^2\].
    pub xi_venule: f64,
    /// Local-to-average arteriole density ratio.
    pub lambda_ratio: f64,
    /// Diffusion coefficient \[m^2/s\].
    pub delta: f64,
    /// Background total blood volume fraction.
    pub c_bar: f64,
    /// Venous outflow rate \[1/s\], frozen at the resting state.
    pub epsilon: f64,
}

/// All transport fields derived from a labeled mesh and a compartment
/// table. The outflow rate is evaluated per compartment with that
/// compartment's diffusion coefficient and resting volume fraction, and
/// frozen at initialization so system matrices stay constant in time.
#[derive(Debug, Clone)]
pub struct DerivedVesselFields {
    pub compartments: BTreeMap<CompartmentId, CompartmentFields>,
    /// Area-weighted average arteriole density over the arterial patch \[1/m^2\].
    pub xi_arteriole_mean: f64,
    /// Arterial patch area \[m^2\].
    pub patch_area: f64,
    /// Single-arteriole flow rate \[m^3/s\].
    pub q_arteriole: f64,
    /// Arteriole length \[m\].
    pub arteriole_len: f64,
    /// Fractional oxygen consumption rate \[1/s\].
    pub upsilon: f64,
    /// Largest tissue element volume \[m^3\].
    pub v_max: f64,
}

impl DerivedVesselFields {
    /// Derives every field from the mesh, the compartment table and the
    /// physical parameters. The arterial patch must be non-empty and
    /// every tissue facet owner must have a tabulated length density.
    pub fn derive(mesh: &TetMesh, table: &CompartmentTable, p: &VesselParams) -> Result<Self> {
        p.validate()?;
        let b_facets = mesh.facets_with_patch(PATCH_ARTERIAL);
        if b_facets.is_empty() {
            return Err(Error::degenerate(
                "arterial patch is empty; mark at least one facet",
            ));
        }

        // area-weighted mean arteriole density over the patch, taken from
        // the tissue-side owner of each facet
        let owners = mesh.facet_owner_lists()?;
        let mut area_sum = 0.0;
        let mut weighted = 0.0;
        for &f in &b_facets {
            let tissue_owner = owners[f]
                .iter()
                .copied()
                .find(|&e| !table.is_artery(mesh.tet_labels[e]))
                .ok_or_else(|| {
                    Error::degenerate(format!("arterial facet {f} touches no tissue tetrahedron"))
                })?;
            let label = mesh.tet_labels[tissue_owner];
            let xi = table.density(label)?;
            let xi_a = arteriole_length_density(xi, p)?;
            let area = mesh.facet_area(f);
            area_sum += area;
            weighted += area * xi_a;
        }
        if !(area_sum > 0.0) {
            return Err(Error::degenerate("arterial patch has zero area"));
        }
        let xi_arteriole_mean = weighted / area_sum;

        let q_arteriole = arteriole_flow_rate(p.total_flow, area_sum, xi_arteriole_mean)?;
        let arteriole_len = arteriole_length(q_arteriole, p)?;
        let upsilon = oxygen_consumption_rate(p);

        let mut v_max: f64 = 0.0;
        for e in 0..mesh.tet_count() {
            if !table.is_artery(mesh.tet_labels[e]) {
                v_max = v_max.max(mesh.tet_volume(e));
            }
        }
        if !(v_max > 0.0) {
            return Err(Error::degenerate("no tissue elements in the mesh"));
        }

        let mut compartments = BTreeMap::new();
        for e in 0..mesh.tet_count() {
            let label = mesh.tet_labels[e];
            if table.is_artery(label) || compartments.contains_key(&label) {
                continue;
            }
            let xi = table.density(label)?;
            let xi_arteriole = arteriole_length_density(xi, p)?;
            let (xi_capillary, xi_venule) = capillary_venule_densities(xi_arteriole, p)?;
            let lambda_ratio = xi_arteriole / xi_arteriole_mean;
            let delta = diffusion_coefficient(lambda_ratio, p)?;
            let c_bar = background_tbv(xi_arteriole, p)?;
            let epsilon = outflow_rate(delta, c_bar, arteriole_len, v_max, p)?;
            compartments.insert(
                label,
                CompartmentFields {
                    xi_arteriole,
                    xi_capillary,
                    xi_venule,
                    lambda_ratio,
                    delta,
                    c_bar,
                    epsilon,
                },
            );
        }

        Ok(DerivedVesselFields {
            compartments,
            xi_arteriole_mean,
            patch_area: area_sum,
            q_arteriole,
            arteriole_len,
            upsilon,
            v_max,
        })
    }

    pub fn fields(&self, label: CompartmentId) -> Result<&CompartmentFields> {
        self.compartments.get(&label).ok_or_else(|| {
            Error::degenerate(format!("no derived fields for compartment {}", label.0))
        })
    }

    /// Per-element vector of a compartment field over a tissue mesh.
    pub fn per_element(
        &self,
        mesh: &TetMesh,
        pick: impl Fn(&CompartmentFields) -> f64,
    ) -> Result<Vec<f64>> {
        mesh.tet_labels
            .iter()
            .map(|&l| self.fields(l).map(&pick))
            .collect()
    }
}
