//! Run orchestration: builds every stage from a configuration, drives
//! the time stepping, and writes the output tree.
//!
//! Output layout under the configured directory:
//!
//! ```text
//! manifest.txt            resolved config + hash + derived parameters
//! mesh.txt                the labeled mesh (ASCII format)
//! roi_<name>.csv          t,tbv,dbv,obv,ratio per region
//! fields_<step>.csv       nodal tbv/dbv/obv snapshots
//! fields_<step>.vtk       the same snapshot for viewers (plus dB fields)
//! profile_<name>_<t>.csv  r,tbv,dbv,ratio radial profiles
//! summary.csv             per-region background, means, ratios, diameters
//! hrf.csv / hrf_dot.csv   regulation term and derivative
//! pressure.vtk, flux.csv  (ppe flux mode only)
//! ```

use crate::analysis::{
    obv_dbv_split, perturbation_diameter, radial_profile, roi_mean, RoiTimeSeries,
};
use crate::config::{build_mesh, resolved_text, FluxMode, RunConfig};
use crate::error::{Error, Result};
use crate::hrf::build_series;
use crate::mesh::{write_mesh, TetMesh};
use crate::output::{
    snapshot_file_name, write_csv, write_manifest, write_snapshot, write_vtk, FieldSnapshot,
};
use crate::ppe::{flux_from_pressure, prescribed_flux, solve_ppe, BoundaryFlux, PressureField};
use crate::solver::{CoupledSystem, SimState, SourceSpec};
use crate::vasculature::DerivedVesselFields;
use std::path::Path;

/// Everything needed to run a simulation, built from a configuration.
pub struct Prepared {
    pub config: RunConfig,
    pub mesh: TetMesh,
    pub derived: DerivedVesselFields,
    pub flux: BoundaryFlux,
    pub pressure: Option<PressureField>,
    pub system: CoupledSystem,
    pub source: SourceSpec,
}

/// Builds mesh, derived fields, influx, system matrices and the source
/// from a configuration.
pub fn prepare(mut config: RunConfig) -> Result<Prepared> {
    let mesh = build_mesh(&mut config)?;
    let derived = DerivedVesselFields::derive(&mesh, &config.table, &config.params)?;

    let (flux, pressure) = match config.flux.mode {
        FluxMode::Prescribed => (prescribed_flux(&mesh, config.flux.total)?, None),
        FluxMode::Ppe => {
            let table = config.table.clone();
            let field = solve_ppe(
                &mesh,
                &config.params,
                config.flux.robin,
                |l| table.is_artery(l),
                config.solver.tolerance,
            )?;
            let flux = flux_from_pressure(&field, &mesh, config.flux.total)?;
            (flux, Some(field))
        }
    };

    let system = CoupledSystem::from_derived(
        &mesh,
        &config.table,
        &derived,
        &config.params,
        &flux,
        config.solver,
    )?;

    let series = build_series(&config.params, config.hrf.amplitude)?;
    let source = SourceSpec::place(
        &system,
        series,
        config.hrf.source_point,
        config.hrf.placement.clone(),
        config.hrf.v_src,
    )?;

    Ok(Prepared {
        config,
        mesh,
        derived,
        flux,
        pressure,
        system,
        source,
    })
}

fn derived_lines(p: &Prepared) -> Vec<String> {
    let mut lines = vec![
        format!("patch_area = {}", p.derived.patch_area),
        format!("xi_arteriole_mean = {}", p.derived.xi_arteriole_mean),
        format!("q_arteriole = {}", p.derived.q_arteriole),
        format!("arteriole_length = {}", p.derived.arteriole_len),
        format!("upsilon = {}", p.derived.upsilon),
        format!("v_max = {}", p.derived.v_max),
        format!("v_src = {}", p.source.v_src),
    ];
    for (id, f) in &p.derived.compartments {
        lines.push(format!(
            "compartment {} : delta = {} , c_bar = {} , epsilon = {} , lambda = {}",
            p.config.table.name(*id),
            f.delta,
            f.c_bar,
            f.epsilon,
            f.lambda_ratio
        ));
    }
    lines
}

fn unix_now() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Writes the manifest for a prepared run.
pub fn emit_manifest(p: &Prepared, dir: &Path) -> Result<()> {
    write_manifest(
        &dir.join("manifest.txt"),
        &resolved_text(&p.config),
        &derived_lines(p),
        unix_now(),
    )
}

/// Writes the regulation-term series as two-column CSVs.
pub fn emit_hrf(p: &Prepared, dir: &Path) -> Result<()> {
    let s = &p.source.series;
    let rows: Vec<Vec<f64>> = s
        .times
        .iter()
        .zip(&s.alpha)
        .map(|(&t, &a)| vec![t, a])
        .collect();
    write_csv(&dir.join("hrf.csv"), "t,alpha", &rows)?;
    let rows_dot: Vec<Vec<f64>> = s
        .times
        .iter()
        .zip(&s.alpha_dot)
        .map(|(&t, &a)| vec![t, a])
        .collect();
    write_csv(&dir.join("hrf_dot.csv"), "t,alpha_dot", &rows_dot)
}

/// Writes the pressure field (VTK) and per-facet flux (CSV).
pub fn emit_ppe(p: &Prepared, dir: &Path) -> Result<()> {
    if let Some(field) = &p.pressure {
        write_vtk(
            &dir.join("pressure.vtk"),
            &field.submesh.mesh,
            &[("pressure", &field.pressures)],
            &[],
        )?;
    }
    let rows: Vec<Vec<f64>> = p
        .flux
        .facets
        .iter()
        .zip(&p.flux.values)
        .map(|(&f, &v)| vec![f as f64, p.mesh.facet_area(f), v])
        .collect();
    write_csv(&dir.join("flux.csv"), "facet,area,value", &rows)
}

/// Step indices that get a full-field snapshot: the initial state, the
/// first step, the step nearest 5 s, every cadence multiple, and the
/// final step.
fn snapshot_steps(steps: usize, dt: f64, cadence: usize) -> Vec<usize> {
    let mut set = std::collections::BTreeSet::new();
    set.insert(0);
    if steps >= 1 {
        set.insert(1);
    }
    let near5 = (5.0 / dt).round() as usize;
    if near5 <= steps {
        set.insert(near5);
    }
    let mut k = 0;
    while k <= steps {
        set.insert(k);
        k += cadence;
    }
    set.insert(steps);
    set.into_iter().collect()
}

/// Result of a full simulation run.
pub struct RunOutput {
    pub final_state: SimState,
    pub roi_series: Vec<(String, RoiTimeSeries)>,
    pub snapshots: Vec<FieldSnapshot>,
}

/// Runs the prepared simulation, writing outputs under `dir`.
pub fn run_to_dir(p: &Prepared, dir: &Path) -> Result<RunOutput> {
    std::fs::create_dir_all(dir)?;
    emit_manifest(p, dir)?;
    emit_hrf(p, dir)?;
    if p.config.flux.mode == FluxMode::Ppe {
        emit_ppe(p, dir)?;
    }
    write_mesh(&p.mesh, &dir.join("mesh.txt"))?;

    let tissue = &p.system.domain.mesh;
    let steps = (p.config.params.t_end / p.config.params.dt).round() as usize;
    let snap_at = snapshot_steps(steps, p.config.params.dt, p.config.output.field_cadence);
    let roi_cadence = p.config.output.roi_cadence;

    let mut roi_series: Vec<(String, RoiTimeSeries)> = p
        .config
        .rois
        .iter()
        .map(|(name, _)| (name.clone(), RoiTimeSeries::default()))
        .collect();
    let mut snapshots: Vec<FieldSnapshot> = Vec::new();

    let state = p.system.init_state();
    let final_state = p.system.run(state, &p.source, p.config.params.t_end, |s| {
        let (tbv, obv, dbv) = obv_dbv_split(&s.excess_tbv, &s.dbv, &p.system.c_bar);
        if s.step % roi_cadence == 0 || s.step == steps {
            for ((_, series), (_, roi)) in roi_series.iter_mut().zip(&p.config.rois) {
                let t_mean = roi_mean(&tbv, roi, tissue, &p.system.mass)?;
                let q_mean = roi_mean(&dbv, roi, tissue, &p.system.mass)?;
                series.push(s.time, t_mean, q_mean);
            }
        }
        if snap_at.binary_search(&s.step).is_ok() {
            let snap = FieldSnapshot {
                step: s.step,
                time: s.time,
                tbv: tbv.clone(),
                dbv: dbv.clone(),
                obv,
            };
            write_snapshot(dir, &snap)?;
            let mut point_fields: Vec<(&str, &[f64])> = vec![
                ("tbv", &snap.tbv[..]),
                ("dbv", &snap.dbv[..]),
                ("obv", &snap.obv[..]),
            ];
            let tbv_db = crate::analysis::db_scale(&snap.tbv).ok();
            let dbv_db = crate::analysis::db_scale(&snap.dbv).ok();
            if let Some(f) = &tbv_db {
                point_fields.push(("tbv_db", &f[..]));
            }
            if let Some(f) = &dbv_db {
                point_fields.push(("dbv_db", &f[..]));
            }
            let labels: Vec<f64> = tissue.tet_labels.iter().map(|l| l.0 as f64).collect();
            write_vtk(
                &dir.join(format!("fields_{:05}.vtk", s.step)),
                tissue,
                &point_fields,
                &[("compartment", &labels)],
            )?;
            snapshots.push(snap);
        }
        Ok(())
    })?;

    for (name, series) in &roi_series {
        let rows: Vec<Vec<f64>> = (0..series.times.len())
            .map(|i| {
                vec![
                    series.times[i],
                    series.tbv_mean[i],
                    series.dbv_mean[i],
                    series.obv_mean[i],
                    series.ratio[i],
                ]
            })
            .collect();
        write_csv(
            &dir.join(format!("roi_{name}.csv")),
            "t,tbv,dbv,obv,ratio",
            &rows,
        )?;

        // relative curves (value over its initial value) plus the
        // alternative oxygenated reading h * tbv
        let h = p.config.params.oxygenated_frac;
        let rel = |v: f64, v0: f64| if v0 != 0.0 { v / v0 } else { f64::NAN };
        let rel_rows: Vec<Vec<f64>> = (0..series.times.len())
            .map(|i| {
                vec![
                    series.times[i],
                    rel(series.tbv_mean[i], series.tbv_mean[0]),
                    rel(series.dbv_mean[i], series.dbv_mean[0]),
                    rel(series.obv_mean[i], series.obv_mean[0]),
                    rel(h * series.tbv_mean[i], h * series.tbv_mean[0]),
                ]
            })
            .collect();
        write_csv(
            &dir.join(format!("roi_{name}_relative.csv")),
            "t,tbv_rel,dbv_rel,obv_rel,obv_ref_rel",
            &rel_rows,
        )?;
    }

    analyze_snapshots(p, dir, &snapshots)?;

    Ok(RunOutput {
        final_state,
        roi_series,
        snapshots,
    })
}

fn find_snapshot(snaps: &[FieldSnapshot], time: f64) -> Option<&FieldSnapshot> {
    snaps
        .iter()
        .min_by(|a, b| (a.time - time).abs().total_cmp(&(b.time - time).abs()))
}

/// Radial profiles at the early and 5 s instants plus the per-region
/// summary table with perturbation diameters.
pub fn analyze_snapshots(p: &Prepared, dir: &Path, snaps: &[FieldSnapshot]) -> Result<()> {
    if snaps.is_empty() {
        return Err(Error::degenerate("no field snapshots to analyze"));
    }
    let tissue = &p.system.domain.mesh;
    let dt = p.config.params.dt;
    let early = find_snapshot(snaps, dt).unwrap();
    let late = find_snapshot(snaps, 5.0).unwrap();

    let n_bins = 14;
    for (name, roi) in &p.config.rois {
        for snap in [early, late] {
            let tag = format!("{:.2}", snap.time).replace('.', "p");
            let tbv_bins = radial_profile(
                &snap.tbv,
                roi.center,
                n_bins,
                roi.radius(),
                tissue,
                &p.system.mass,
            )?;
            let dbv_bins = radial_profile(
                &snap.dbv,
                roi.center,
                n_bins,
                roi.radius(),
                tissue,
                &p.system.mass,
            )?;
            let mut rows = Vec::new();
            for b in 0..n_bins {
                if let (Some(t), Some(q)) = (tbv_bins[b], dbv_bins[b]) {
                    let rc = (b as f64 + 0.5) * roi.radius() / n_bins as f64;
                    rows.push(vec![rc, t, q, if t > 0.0 { q / t } else { f64::NAN }]);
                }
            }
            write_csv(
                &dir.join(format!("profile_{name}_t{tag}.csv")),
                "r,tbv,dbv,ratio",
                &rows,
            )?;
        }
    }

    let background_field: Vec<f64> = p.system.c_bar.clone();
    let mut rows = Vec::new();
    for (_, roi) in &p.config.rois {
        let background = roi_mean(&background_field, roi, tissue, &p.system.mass)?;
        let tbv_early = roi_mean(&early.tbv, roi, tissue, &p.system.mass)?;
        let tbv_late = roi_mean(&late.tbv, roi, tissue, &p.system.mass)?;
        let dbv_early = roi_mean(&early.dbv, roi, tissue, &p.system.mass)?;
        let dbv_late = roi_mean(&late.dbv, roi, tissue, &p.system.mass)?;
        let diam_tbv = perturbation_diameter(&late.tbv, &early.tbv, background, roi, tissue)?;
        let diam_dbv = perturbation_diameter(&late.dbv, &early.dbv, background, roi, tissue)?;
        rows.push(vec![
            background,
            tbv_early,
            tbv_late,
            dbv_early,
            dbv_late,
            if tbv_early > 0.0 {
                dbv_early / tbv_early
            } else {
                f64::NAN
            },
            if tbv_late > 0.0 {
                dbv_late / tbv_late
            } else {
                f64::NAN
            },
            diam_tbv,
            diam_dbv,
        ]);
    }
    // region names head each row; emit them through a text table since
    // the csv writer is numeric
    crate::output::write_atomic(&dir.join("summary.csv"), |w| {
        use std::fmt::Write as _;
        let mut buf = String::new();
        writeln!(
            buf,
            "roi,background,tbv_025,tbv_5,dbv_025,dbv_5,ratio_025,ratio_5,diam_tbv,diam_dbv"
        )
        .unwrap();
        for ((name, _), row) in p.config.rois.iter().zip(&rows) {
            let values: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            writeln!(buf, "{name},{}", values.join(",")).unwrap();
        }
        w.write_all(buf.as_bytes())?;
        Ok(())
    })
}

/// Re-runs the analysis stage from snapshots stored in `dir`.
pub fn analyze_dir(config: RunConfig, dir: &Path) -> Result<()> {
    let p = prepare(config)?;
    let mut snaps = Vec::new();
    for entry in std::fs::read_dir(dir)? {
        let entry = entry?;
        let name = entry.file_name().to_string_lossy().to_string();
        if name.starts_with("fields_") && name.ends_with(".csv") {
            snaps.push(crate::output::read_snapshot(&entry.path())?);
        }
    }
    if snaps.is_empty() {
        return Err(Error::degenerate(format!(
            "no {} files found in {}",
            snapshot_file_name(0).replace("00000", "<step>"),
            dir.display()
        )));
    }
    snaps.sort_by_key(|s| s.step);
    for snap in &snaps {
        if snap.tbv.len() != p.system.domain.mesh.node_count() {
            return Err(Error::degenerate(
                "snapshot node count does not match the configured mesh",
            ));
        }
    }
    analyze_snapshots(&p, dir, &snaps)
}

/// Derivation report for the `derive` subcommand.
pub fn derive_report(p: &Prepared) -> String {
    let mut s = String::new();
    use std::fmt::Write as _;
    for line in derived_lines(p) {
        writeln!(s, "{line}").unwrap();
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config_str;

    fn tmp_dir(tag: &str) -> std::path::PathBuf {
        let dir = std::env::temp_dir().join(format!("mcirc-pipeline-{tag}-{}", std::process::id()));
        let _ = std::fs::remove_dir_all(&dir);
        std::fs::create_dir_all(&dir).unwrap();
        dir
    }

    fn small_config() -> RunConfig {
        parse_config_str(
            "
            [mesh]
            nx = 4
            ny = 4
            nz = 4
            [params]
            T = 2.0
            [rois]
            roi = center 0 0 0 0.05
            [output]
            field_cadence = 4
            ",
        )
        .unwrap()
    }

    #[test]
    fn prepare_and_run_small_case() {
        let dir = tmp_dir("run");
        let p = prepare(small_config()).unwrap();
        let out = run_to_dir(&p, &dir).unwrap();
        assert_eq!(out.final_state.step, 8);
        assert!(dir.join("manifest.txt").exists());
        assert!(dir.join("mesh.txt").exists());
        assert!(dir.join("roi_center.csv").exists());
        assert!(dir.join("summary.csv").exists());
        assert!(dir.join("hrf.csv").exists());
        assert!(dir.join(snapshot_file_name(0)).exists());
        assert!(dir.join(snapshot_file_name(1)).exists());
        assert!(dir.join(snapshot_file_name(8)).exists());
        // roi series has one row per step plus the initial state
        let (_, rows) = crate::output::read_csv(&dir.join("roi_center.csv")).unwrap();
        assert_eq!(rows.len(), 9);
        // relative curves start at 1 by construction
        let (header, rel) =
            crate::output::read_csv(&dir.join("roi_center_relative.csv")).unwrap();
        assert_eq!(header, "t,tbv_rel,dbv_rel,obv_rel,obv_ref_rel");
        for v in &rel[0][1..] {
            assert!((v - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn runs_are_deterministic() {
        let d1 = tmp_dir("det1");
        let d2 = tmp_dir("det2");
        let p1 = prepare(small_config()).unwrap();
        let p2 = prepare(small_config()).unwrap();
        run_to_dir(&p1, &d1).unwrap();
        run_to_dir(&p2, &d2).unwrap();
        for name in ["roi_center.csv", "summary.csv", &snapshot_file_name(8)] {
            let a = std::fs::read_to_string(d1.join(name)).unwrap();
            let b = std::fs::read_to_string(d2.join(name)).unwrap();
            assert_eq!(a, b, "{name} differs");
        }
        // manifests agree except the creation stamp
        let ma = std::fs::read_to_string(d1.join("manifest.txt")).unwrap();
        let mb = std::fs::read_to_string(d2.join("manifest.txt")).unwrap();
        let strip = |s: &str| -> String {
            s.lines()
                .filter(|l| !l.starts_with("# created_unix"))
                .collect::<Vec<_>>()
                .join("\n")
        };
        assert_eq!(strip(&ma), strip(&mb));
    }

    #[test]
    fn analyze_reuses_stored_snapshots() {
        let dir = tmp_dir("analyze");
        let p = prepare(small_config()).unwrap();
        run_to_dir(&p, &dir).unwrap();
        let before = std::fs::read_to_string(dir.join("summary.csv")).unwrap();
        std::fs::remove_file(dir.join("summary.csv")).unwrap();
        analyze_dir(small_config(), &dir).unwrap();
        let after = std::fs::read_to_string(dir.join("summary.csv")).unwrap();
        assert_eq!(before, after);
    }

    #[test]
    fn ppe_mode_emits_pressure_and_flux() {
        let dir = tmp_dir("ppe");
        let cfg = parse_config_str(
            "
            [mesh]
            nx = 4
            ny = 2
            nz = 2
            extent_x = 0.04
            extent_y = 0.02
            extent_z = 0.02
            origin_x = 0
            origin_y = 0
            origin_z = 0
            compartment = cerebral_gm
            label = halfspace 0.01 0 0 1 0 0 artery
            patch = adjacency artery
            [params]
            T = 0.5
            [rois]
            roi = mid 0.02 0.01 0.01 0.02
            [flux]
            mode = ppe
            total = 1e-7
            p_external = 11000
            ",
        )
        .unwrap();
        let p = prepare(cfg).unwrap();
        assert!(p.pressure.is_some());
        let total: f64 = p
            .flux
            .facets
            .iter()
            .zip(&p.flux.values)
            .map(|(&f, &v)| v * p.mesh.facet_area(f))
            .sum();
        assert!((total - 1e-7).abs() <= 1e-19);
        run_to_dir(&p, &dir).unwrap();
        assert!(dir.join("pressure.vtk").exists());
        assert!(dir.join("flux.csv").exists());
    }
}
