//! Run configuration: a flat `key = value` text format with `[section]`
//! headers, hash comments, and built-in defaults for every key. Unknown
//! keys are rejected by name. Keys outside any section belong to
//! `[params]`.

use crate::analysis::RoiSpec;
use crate::error::{Error, Result};
use crate::mesh::{ArterialMarking, CompartmentId, LabelRule, Region, TetMesh};
use crate::ppe::RobinSpec;
use crate::solver::{SolverOptions, SourcePlacement};
use crate::vasculature::VesselParams;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Compartment registry: name, microvessel length density, and whether
/// the compartment is arterial (excluded from the tissue domain).
#[derive(Debug, Clone)]
pub struct CompartmentTable {
    entries: Vec<CompartmentEntry>,
}

#[derive(Debug, Clone)]
pub struct CompartmentEntry {
    pub name: String,
    /// Microvessel length density \[1/m^2\]; arterial compartments have none.
    pub density: Option<f64>,
    pub artery: bool,
}

impl CompartmentTable {
    /// Built-in median length densities per tissue compartment, plus the
    /// arterial compartment.
    pub fn builtin() -> Self {
        let tissue = [
            ("cerebral_gm", 2.4e8),
            ("cerebral_wm", 1.4e8),
            ("cerebellar_gm", 3.0e8),
            ("cerebellar_wm", 1.0e8),
            ("subcortical_gm", 3.3e8),
            ("subcortical_wm", 1.5e8),
            ("brainstem", 2.9e8),
        ];
        let mut entries: Vec<CompartmentEntry> = tissue
            .iter()
            .map(|&(name, xi)| CompartmentEntry {
                name: name.to_string(),
                density: Some(xi),
                artery: false,
            })
            .collect();
        entries.push(CompartmentEntry {
            name: "artery".to_string(),
            density: None,
            artery: true,
        });
        CompartmentTable { entries }
    }

    pub fn entries(&self) -> &[CompartmentEntry] {
        &self.entries
    }

    pub fn id(&self, name: &str) -> Option<CompartmentId> {
        self.entries
            .iter()
            .position(|e| e.name == name)
            .map(|i| CompartmentId(i as u32))
    }

    /// Id for `name`, registering a new tissue compartment when absent.
    pub fn ensure(&mut self, name: &str) -> CompartmentId {
        if let Some(id) = self.id(name) {
            return id;
        }
        self.entries.push(CompartmentEntry {
            name: name.to_string(),
            density: None,
            artery: false,
        });
        CompartmentId((self.entries.len() - 1) as u32)
    }

    /// Sets or overrides a density; densities must be positive.
    pub fn set_density(&mut self, name: &str, xi: f64) -> Result<()> {
        if !(xi > 0.0) {
            return Err(Error::config(
                name,
                format!("length density must be positive, got {xi}"),
            ));
        }
        let id = self.ensure(name);
        let entry = &mut self.entries[id.0 as usize];
        if entry.artery {
            return Err(Error::config(
                name,
                "the arterial compartment carries no density",
            ));
        }
        entry.density = Some(xi);
        Ok(())
    }

    pub fn name(&self, id: CompartmentId) -> &str {
        self.entries
            .get(id.0 as usize)
            .map_or("<unknown>", |e| &e.name)
    }

    pub fn is_artery(&self, id: CompartmentId) -> bool {
        self.entries.get(id.0 as usize).is_some_and(|e| e.artery)
    }

    pub fn density(&self, id: CompartmentId) -> Result<f64> {
        let entry = self
            .entries
            .get(id.0 as usize)
            .ok_or_else(|| Error::degenerate(format!("unknown compartment id {}", id.0)))?;
        entry.density.ok_or_else(|| {
            Error::config(&entry.name, "compartment has no microvessel length density")
        })
    }
}

/// Mesh source: generated box or a mesh file.
#[derive(Debug, Clone)]
pub enum MeshSource {
    Generate {
        n: [usize; 3],
        extents: [f64; 3],
        origin: [f64; 3],
        base: String,
    },
    File(PathBuf),
}

/// Labeling rule in name form (resolved against the table at build time).
#[derive(Debug, Clone)]
pub struct LabelSpec {
    pub region: Region,
    pub compartment: String,
}

/// Arterial patch marking in name form.
#[derive(Debug, Clone)]
pub enum PatchSpec {
    SurfaceAll,
    Surface(Region),
    Adjacency { artery: String },
}

#[derive(Debug, Clone)]
pub struct MeshConfig {
    pub source: MeshSource,
    pub labels: Vec<LabelSpec>,
    pub patch: PatchSpec,
}

#[derive(Debug, Clone)]
pub struct HrfConfig {
    /// Peak regulation amplitude; `None` leaves the oscillator unscaled.
    pub amplitude: Option<f64>,
    pub source_point: [f64; 3],
    /// Source volume \[m^3\]; `None` uses the node's element patch volume.
    pub v_src: Option<f64>,
    pub placement: SourcePlacement,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FluxMode {
    Prescribed,
    Ppe,
}

#[derive(Debug, Clone)]
pub struct FluxConfig {
    pub mode: FluxMode,
    /// Total influx through the arterial patch (patch integral of f).
    pub total: f64,
    pub robin: RobinSpec,
}

#[derive(Debug, Clone)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// Full-field snapshot cadence in steps.
    pub field_cadence: usize,
    /// Region-series cadence in steps.
    pub roi_cadence: usize,
}

/// Fully resolved run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub mesh: MeshConfig,
    pub table: CompartmentTable,
    pub params: VesselParams,
    pub hrf: HrfConfig,
    pub flux: FluxConfig,
    pub rois: Vec<(String, RoiSpec)>,
    pub output: OutputConfig,
    pub solver: SolverOptions,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mesh: MeshConfig {
                source: MeshSource::Generate {
                    n: [16, 16, 16],
                    extents: [0.084; 3],
                    origin: [-0.042; 3],
                    base: "cerebral_gm".to_string(),
                },
                labels: Vec::new(),
                patch: PatchSpec::SurfaceAll,
            },
            table: CompartmentTable::builtin(),
            params: VesselParams::default(),
            hrf: HrfConfig {
                amplitude: Some(0.2),
                source_point: [0.0; 3],
                v_src: None,
                placement: SourcePlacement::Node,
            },
            flux: FluxConfig {
                mode: FluxMode::Prescribed,
                total: 0.0,
                robin: RobinSpec::default(),
            },
            rois: vec![(
                "center".to_string(),
                RoiSpec {
                    center: [0.0; 3],
                    diameter: 0.014,
                },
            )],
            output: OutputConfig {
                dir: PathBuf::from("out"),
                field_cadence: 20,
                roi_cadence: 1,
            },
            solver: SolverOptions::default(),
        }
    }
}

pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config_str(&text)
}

pub fn parse_config_str(text: &str) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    let mut explicit_rois = false;
    let mut section = "params".to_string();

    for raw in text.lines() {
        let line = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('[') {
            if !line.ends_with(']') {
                return Err(Error::config(line, "malformed section header"));
            }
            section = line[1..line.len() - 1].trim().to_string();
            match section.as_str() {
                "mesh" | "params" | "compartments" | "hrf" | "flux" | "rois" | "output"
                | "solver" => {}
                other => return Err(Error::config(other, "unknown section")),
            }
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::config(line, "expected `key = value`"))?;
        let key = key.trim();
        let value = value.trim();
        if value.is_empty() {
            return Err(Error::config(key, "empty value"));
        }
        match section.as_str() {
            "params" => apply_param(&mut cfg.params, key, value)?,
            "mesh" => apply_mesh(&mut cfg.mesh, key, value)?,
            "compartments" => cfg.table.set_density(key, parse_f64(key, value)?)?,
            "hrf" => apply_hrf(&mut cfg.hrf, key, value)?,
            "flux" => apply_flux(&mut cfg.flux, key, value)?,
            "rois" => {
                if key != "roi" {
                    return Err(Error::config(key, "only `roi` entries are allowed here"));
                }
                if !explicit_rois {
                    cfg.rois.clear();
                    explicit_rois = true;
                }
                cfg.rois.push(parse_roi(value)?);
            }
            "output" => apply_output(&mut cfg.output, key, value)?,
            "solver" => apply_solver(&mut cfg.solver, key, value)?,
            _ => unreachable!(),
        }
    }

    validate_config(&cfg)?;
    Ok(cfg)
}

fn parse_f64(key: &str, value: &str) -> Result<f64> {
    value
        .parse()
        .map_err(|_| Error::config(key, format!("expected a number, got `{value}`")))
}

fn parse_usize(key: &str, value: &str) -> Result<usize> {
    value.parse().map_err(|_| {
        Error::config(
            key,
            format!("expected a non-negative integer, got `{value}`"),
        )
    })
}

fn floats(key: &str, parts: &[&str]) -> Result<Vec<f64>> {
    parts.iter().map(|p| parse_f64(key, p)).collect()
}

fn apply_param(p: &mut VesselParams, key: &str, value: &str) -> Result<()> {
    let v = parse_f64(key, value)?;
    match key {
        "T" => p.t_end = v,
        "dt" => p.dt = v,
        "h" => p.oxygenated_frac = v,
        "theta" => p.expansion = v,
        "vartheta" => p.pressure_drop_frac = v,
        "mu" => p.viscosity = v,
        "rho" => p.density = v,
        "Q" => p.total_flow = v,
        "p_bar" => p.mean_pressure = v,
        "tau" => p.gradient_coupling = v,
        "eta" => p.consumption_rate = v,
        "psi" => p.hemoglobin_molality = v,
        "kappa" => p.signal_decay = v,
        "gamma" => p.flow_elimination = v,
        "zeta" => p.neural_drive = v,
        "g_z" => p.gravity_z = v,
        "D_a" => p.d_arteriole = v,
        "D_c" => p.d_capillary = v,
        "D_v" => p.d_venule = v,
        "gamma_a" => p.area_frac_arteriole = v,
        "gamma_c" => p.area_frac_capillary = v,
        "gamma_v" => p.area_frac_venule = v,
        _ => return Err(Error::config(key, "unknown parameter key")),
    }
    Ok(())
}

fn parse_region(key: &str, kind: &str, args: &[&str]) -> Result<Region> {
    match kind {
        "all" => Ok(Region::All),
        "sphere" => {
            let v = floats(key, args)?;
            if v.len() != 4 {
                return Err(Error::config(key, "sphere needs `cx cy cz radius`"));
            }
            Ok(Region::Sphere {
                center: [v[0], v[1], v[2]],
                radius: v[3],
            })
        }
        "halfspace" => {
            let v = floats(key, args)?;
            if v.len() != 6 {
                return Err(Error::config(key, "halfspace needs `ox oy oz nx ny nz`"));
            }
            Ok(Region::HalfSpace {
                origin: [v[0], v[1], v[2]],
                normal: [v[3], v[4], v[5]],
            })
        }
        "box" => {
            let v = floats(key, args)?;
            if v.len() != 6 {
                return Err(Error::config(
                    key,
                    "box needs `minx miny minz maxx maxy maxz`",
                ));
            }
            Ok(Region::Box {
                min: [v[0], v[1], v[2]],
                max: [v[3], v[4], v[5]],
            })
        }
        other => Err(Error::config(key, format!("unknown region kind `{other}`"))),
    }
}

fn apply_mesh(m: &mut MeshConfig, key: &str, value: &str) -> Result<()> {
    match key {
        "source" => match value {
            "generate" => {
                if !matches!(m.source, MeshSource::Generate { .. }) {
                    m.source = match RunConfig::default().mesh.source {
                        MeshSource::Generate {
                            n,
                            extents,
                            origin,
                            base,
                        } => MeshSource::Generate {
                            n,
                            extents,
                            origin,
                            base,
                        },
                        _ => unreachable!(),
                    };
                }
            }
            "file" => m.source = MeshSource::File(PathBuf::new()),
            other => return Err(Error::config(key, format!("unknown mesh source `{other}`"))),
        },
        "path" => m.source = MeshSource::File(PathBuf::from(value)),
        "nx" | "ny" | "nz" => {
            let v = parse_usize(key, value)?;
            if let MeshSource::Generate { n, .. } = &mut m.source {
                n[match key {
                    "nx" => 0,
                    "ny" => 1,
                    _ => 2,
                }] = v;
            } else {
                return Err(Error::config(
                    key,
                    "subdivisions apply to generated meshes only",
                ));
            }
        }
        "extent_x" | "extent_y" | "extent_z" => {
            let v = parse_f64(key, value)?;
            if let MeshSource::Generate { extents, .. } = &mut m.source {
                extents[match key {
                    "extent_x" => 0,
                    "extent_y" => 1,
                    _ => 2,
                }] = v;
            } else {
                return Err(Error::config(key, "extents apply to generated meshes only"));
            }
        }
        "origin_x" | "origin_y" | "origin_z" => {
            let v = parse_f64(key, value)?;
            if let MeshSource::Generate { origin, .. } = &mut m.source {
                origin[match key {
                    "origin_x" => 0,
                    "origin_y" => 1,
                    _ => 2,
                }] = v;
            } else {
                return Err(Error::config(key, "origins apply to generated meshes only"));
            }
        }
        "compartment" => {
            if let MeshSource::Generate { base, .. } = &mut m.source {
                *base = value.to_string();
            } else {
                return Err(Error::config(
                    key,
                    "base compartment applies to generated meshes only",
                ));
            }
        }
        "label" => {
            let parts: Vec<&str> = value.split_whitespace().collect();
            if parts.len() < 2 {
                return Err(Error::config(
                    key,
                    "label needs `<region...> <compartment>`",
                ));
            }
            let compartment = parts.last().unwrap().to_string();
            let region = parse_region(key, parts[0], &parts[1..parts.len() - 1])?;
            m.labels.push(LabelSpec {
                region,
                compartment,
            });
        }
        "patch" => {
            let parts: Vec<&str> = value.split_whitespace().collect();
            m.patch = match parts[0] {
                "surface_all" => PatchSpec::SurfaceAll,
                "surface" => PatchSpec::Surface(parse_region(key, parts[1], &parts[2..])?),
                "adjacency" => {
                    if parts.len() != 2 {
                        return Err(Error::config(
                            key,
                            "adjacency needs the artery compartment name",
                        ));
                    }
                    PatchSpec::Adjacency {
                        artery: parts[1].to_string(),
                    }
                }
                other => return Err(Error::config(key, format!("unknown patch mode `{other}`"))),
            };
        }
        _ => return Err(Error::config(key, "unknown mesh key")),
    }
    Ok(())
}

fn apply_hrf(h: &mut HrfConfig, key: &str, value: &str) -> Result<()> {
    match key {
        "amplitude" => {
            h.amplitude = if value == "none" {
                None
            } else {
                Some(parse_f64(key, value)?)
            };
        }
        "source_x" => h.source_point[0] = parse_f64(key, value)?,
        "source_y" => h.source_point[1] = parse_f64(key, value)?,
        "source_z" => h.source_point[2] = parse_f64(key, value)?,
        "v_src" => {
            h.v_src = if value == "auto" {
                None
            } else {
                Some(parse_f64(key, value)?)
            };
        }
        "placement" => {
            let parts: Vec<&str> = value.split_whitespace().collect();
            h.placement = match parts[0] {
                "node" => SourcePlacement::Node,
                "gaussian" => {
                    if parts.len() != 2 {
                        return Err(Error::config(key, "gaussian placement needs a radius"));
                    }
                    SourcePlacement::GaussianBall {
                        sigma: parse_f64(key, parts[1])?,
                    }
                }
                other => return Err(Error::config(key, format!("unknown placement `{other}`"))),
            };
        }
        _ => return Err(Error::config(key, "unknown hrf key")),
    }
    Ok(())
}

fn apply_flux(f: &mut FluxConfig, key: &str, value: &str) -> Result<()> {
    match key {
        "mode" => {
            f.mode = match value {
                "prescribed" => FluxMode::Prescribed,
                "ppe" => FluxMode::Ppe,
                other => return Err(Error::config(key, format!("unknown flux mode `{other}`"))),
            };
        }
        "total" => f.total = parse_f64(key, value)?,
        "zeta_r" => f.robin.zeta_r = parse_f64(key, value)?,
        "lambda_r" => f.robin.lambda_r = parse_f64(key, value)?,
        "p_external" => f.robin.p_external = parse_f64(key, value)?,
        _ => return Err(Error::config(key, "unknown flux key")),
    }
    Ok(())
}

fn parse_roi(value: &str) -> Result<(String, RoiSpec)> {
    let parts: Vec<&str> = value.split_whitespace().collect();
    if parts.len() != 4 && parts.len() != 5 {
        return Err(Error::config("roi", "expected `name cx cy cz [diameter]`"));
    }
    let name = parts[0].to_string();
    let v = floats("roi", &parts[1..])?;
    let diameter = if v.len() == 4 { v[3] } else { 0.014 };
    Ok((
        name,
        RoiSpec::new([v[0], v[1], v[2]], diameter).map_err(|e| match e {
            Error::InvalidParameter { reason, .. } => Error::config("roi", reason),
            other => other,
        })?,
    ))
}

fn apply_output(o: &mut OutputConfig, key: &str, value: &str) -> Result<()> {
    match key {
        "dir" => o.dir = PathBuf::from(value),
        "field_cadence" => o.field_cadence = parse_usize(key, value)?.max(1),
        "roi_cadence" => o.roi_cadence = parse_usize(key, value)?.max(1),
        _ => return Err(Error::config(key, "unknown output key")),
    }
    Ok(())
}

fn apply_solver(s: &mut SolverOptions, key: &str, value: &str) -> Result<()> {
    match key {
        "tol" => s.tolerance = parse_f64(key, value)?,
        "max_iter_factor" => s.max_iter_factor = parse_usize(key, value)?,
        _ => return Err(Error::config(key, "unknown solver key")),
    }
    Ok(())
}

fn validate_config(cfg: &RunConfig) -> Result<()> {
    cfg.params.validate().map_err(|e| match e {
        Error::InvalidParameter { name, reason } => Error::config(&name, reason),
        other => other,
    })?;
    if let Some(a) = cfg.hrf.amplitude {
        if !(a > 0.0) {
            return Err(Error::config("amplitude", "must be positive or `none`"));
        }
    }
    if let Some(v) = cfg.hrf.v_src {
        if !(v > 0.0) {
            return Err(Error::config("v_src", "must be positive or `auto`"));
        }
    }
    if cfg.flux.total < 0.0 {
        return Err(Error::config("total", "influx total must be non-negative"));
    }
    if !(cfg.solver.tolerance > 0.0) {
        return Err(Error::config("tol", "solver tolerance must be positive"));
    }
    if cfg.solver.max_iter_factor == 0 {
        return Err(Error::config("max_iter_factor", "must be at least 1"));
    }
    if let MeshSource::Generate { n, extents, .. } = &cfg.mesh.source {
        if n.contains(&0) {
            return Err(Error::config("nx/ny/nz", "subdivisions must be at least 1"));
        }
        if extents.iter().any(|&e| !(e > 0.0)) {
            return Err(Error::config("extent_x/y/z", "extents must be positive"));
        }
    }
    if let MeshSource::File(p) = &cfg.mesh.source {
        if p.as_os_str().is_empty() {
            return Err(Error::config("path", "mesh source `file` needs a path"));
        }
    }
    Ok(())
}

/// Builds the labeled mesh described by the configuration.
pub fn build_mesh(cfg: &mut RunConfig) -> Result<TetMesh> {
    let mesh = match &cfg.mesh.source {
        MeshSource::Generate {
            n,
            extents,
            origin,
            base,
        } => {
            let label = cfg.table.ensure(base);
            crate::mesh::generate_box_mesh(n[0], n[1], n[2], *extents, *origin, label)?
        }
        MeshSource::File(path) => crate::mesh::read_mesh(path)?,
    };
    let rules: Vec<LabelRule> = cfg
        .mesh
        .labels
        .iter()
        .map(|spec| LabelRule {
            region: spec.region.clone(),
            label: cfg.table.ensure(&spec.compartment),
        })
        .collect();
    let marking = match &cfg.mesh.patch {
        PatchSpec::SurfaceAll => ArterialMarking::Surface(Region::All),
        PatchSpec::Surface(region) => ArterialMarking::Surface(region.clone()),
        PatchSpec::Adjacency { artery } => ArterialMarking::Adjacency {
            artery: cfg.table.ensure(artery),
        },
    };
    let labeled = crate::mesh::label_by_predicate(&mesh, &rules, &marking);
    let table = cfg.table.clone();
    labeled.validate(|l| table.is_artery(l))?;
    Ok(labeled)
}

/// Canonical dump of the fully resolved configuration; parsing the dump
/// reproduces the configuration.
pub fn resolved_text(cfg: &RunConfig) -> String {
    let mut s = String::new();
    let p = &cfg.params;
    writeln!(s, "[mesh]").unwrap();
    match &cfg.mesh.source {
        MeshSource::Generate {
            n,
            extents,
            origin,
            base,
        } => {
            writeln!(s, "source = generate").unwrap();
            writeln!(s, "nx = {}", n[0]).unwrap();
            writeln!(s, "ny = {}", n[1]).unwrap();
            writeln!(s, "nz = {}", n[2]).unwrap();
            writeln!(s, "extent_x = {}", extents[0]).unwrap();
            writeln!(s, "extent_y = {}", extents[1]).unwrap();
            writeln!(s, "extent_z = {}", extents[2]).unwrap();
            writeln!(s, "origin_x = {}", origin[0]).unwrap();
            writeln!(s, "origin_y = {}", origin[1]).unwrap();
            writeln!(s, "origin_z = {}", origin[2]).unwrap();
            writeln!(s, "compartment = {base}").unwrap();
        }
        MeshSource::File(path) => {
            writeln!(s, "source = file").unwrap();
            writeln!(s, "path = {}", path.display()).unwrap();
        }
    }
    for l in &cfg.mesh.labels {
        writeln!(s, "label = {} {}", region_text(&l.region), l.compartment).unwrap();
    }
    match &cfg.mesh.patch {
        PatchSpec::SurfaceAll => writeln!(s, "patch = surface_all").unwrap(),
        PatchSpec::Surface(r) => writeln!(s, "patch = surface {}", region_text(r)).unwrap(),
        PatchSpec::Adjacency { artery } => writeln!(s, "patch = adjacency {artery}").unwrap(),
    }

    writeln!(s, "\n[compartments]").unwrap();
    for e in cfg.table.entries() {
        if let Some(xi) = e.density {
            writeln!(s, "{} = {}", e.name, xi).unwrap();
        }
    }

    writeln!(s, "\n[params]").unwrap();
    let pairs: [(&str, f64); 22] = [
        ("T", p.t_end),
        ("dt", p.dt),
        ("h", p.oxygenated_frac),
        ("theta", p.expansion),
        ("vartheta", p.pressure_drop_frac),
        ("mu", p.viscosity),
        ("rho", p.density),
        ("Q", p.total_flow),
        ("p_bar", p.mean_pressure),
        ("tau", p.gradient_coupling),
        ("eta", p.consumption_rate),
        ("psi", p.hemoglobin_molality),
        ("kappa", p.signal_decay),
        ("gamma", p.flow_elimination),
        ("zeta", p.neural_drive),
        ("g_z", p.gravity_z),
        ("D_a", p.d_arteriole),
        ("D_c", p.d_capillary),
        ("D_v", p.d_venule),
        ("gamma_a", p.area_frac_arteriole),
        ("gamma_c", p.area_frac_capillary),
        ("gamma_v", p.area_frac_venule),
    ];
    for (k, v) in pairs {
        writeln!(s, "{k} = {v}").unwrap();
    }

    writeln!(s, "\n[hrf]").unwrap();
    match cfg.hrf.amplitude {
        Some(a) => writeln!(s, "amplitude = {a}").unwrap(),
        None => writeln!(s, "amplitude = none").unwrap(),
    }
    writeln!(s, "source_x = {}", cfg.hrf.source_point[0]).unwrap();
    writeln!(s, "source_y = {}", cfg.hrf.source_point[1]).unwrap();
    writeln!(s, "source_z = {}", cfg.hrf.source_point[2]).unwrap();
    match cfg.hrf.v_src {
        Some(v) => writeln!(s, "v_src = {v}").unwrap(),
        None => writeln!(s, "v_src = auto").unwrap(),
    }
    match cfg.hrf.placement {
        SourcePlacement::Node => writeln!(s, "placement = node").unwrap(),
        SourcePlacement::GaussianBall { sigma } => {
            writeln!(s, "placement = gaussian {sigma}").unwrap()
        }
    }

    writeln!(s, "\n[flux]").unwrap();
    writeln!(
        s,
        "mode = {}",
        match cfg.flux.mode {
            FluxMode::Prescribed => "prescribed",
            FluxMode::Ppe => "ppe",
        }
    )
    .unwrap();
    writeln!(s, "total = {}", cfg.flux.total).unwrap();
    writeln!(s, "zeta_r = {}", cfg.flux.robin.zeta_r).unwrap();
    writeln!(s, "lambda_r = {}", cfg.flux.robin.lambda_r).unwrap();
    writeln!(s, "p_external = {}", cfg.flux.robin.p_external).unwrap();

    writeln!(s, "\n[rois]").unwrap();
    for (name, roi) in &cfg.rois {
        writeln!(
            s,
            "roi = {name} {} {} {} {}",
            roi.center[0], roi.center[1], roi.center[2], roi.diameter
        )
        .unwrap();
    }

    writeln!(s, "\n[output]").unwrap();
    writeln!(s, "dir = {}", cfg.output.dir.display()).unwrap();
    writeln!(s, "field_cadence = {}", cfg.output.field_cadence).unwrap();
    writeln!(s, "roi_cadence = {}", cfg.output.roi_cadence).unwrap();

    writeln!(s, "\n[solver]").unwrap();
    writeln!(s, "tol = {}", cfg.solver.tolerance).unwrap();
    writeln!(s, "max_iter_factor = {}", cfg.solver.max_iter_factor).unwrap();
    s
}

fn region_text(r: &Region) -> String {
    match r {
        Region::All => "all".to_string(),
        Region::Sphere { center, radius } => {
            format!(
                "sphere {} {} {} {}",
                center[0], center[1], center[2], radius
            )
        }
        Region::HalfSpace { origin, normal } => format!(
            "halfspace {} {} {} {} {} {}",
            origin[0], origin[1], origin[2], normal[0], normal[1], normal[2]
        ),
        Region::Box { min, max } => format!(
            "box {} {} {} {} {} {}",
            min[0], min[1], min[2], max[0], max[1], max[2]
        ),
    }
}
