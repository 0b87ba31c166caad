//! `mcirc` command line: mesh generation, parameter derivation,
//! hemodynamic response export, pressure/influx solves, full simulation
//! runs and post-hoc analysis.
//!
//! Exit codes: 0 success, 1 validation or usage error, 2 numerical
//! failure.

use clap::{Parser, Subcommand};
use mcirc_core::config::{parse_config, RunConfig};
use mcirc_core::error::Error;
use mcirc_core::pipeline;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "mcirc",
    version,
    about = "Finite-element simulator for cerebral microcirculation",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct CommonArgs {
    /// Configuration file (key = value sections); defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides the configured one).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Full-field snapshot cadence in steps (overrides the configured one).
    #[arg(long)]
    cadence: Option<usize>,
    /// Suppress progress messages.
    #[arg(long)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the configured mesh and write it as mesh.txt.
    MeshGen(CommonArgs),
    /// Derive and print the microvascular transport parameters.
    Derive(CommonArgs),
    /// Export the hemodynamic regulation term as CSV series.
    Hrf(CommonArgs),
    /// Solve the arterial pressure field and influx (requires flux mode ppe).
    Ppe(CommonArgs),
    /// Run the coupled simulation end to end.
    Run(RunArgs),
    /// Recompute profiles and the summary table from stored snapshots.
    Analyze(CommonArgs),
}

#[derive(clap::Args)]
struct RunArgs {
    /// Configuration file; required for runs.
    #[arg(long, required = true)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    cadence: Option<usize>,
    #[arg(long)]
    quiet: bool,
}

fn load_config(args: &CommonArgs) -> Result<RunConfig, Error> {
    let mut cfg = match &args.config {
        Some(path) => parse_config(path)?,
        None => RunConfig::default(),
    };
    if let Some(out) = &args.out {
        cfg.output.dir = out.clone();
    }
    if let Some(c) = args.cadence {
        cfg.output.field_cadence = c.max(1);
    }
    Ok(cfg)
}

fn execute(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::MeshGen(args) => {
            let quiet = args.quiet;
            let mut cfg = load_config(&args)?;
            let mesh = mcirc_core::config::build_mesh(&mut cfg)?;
            let path = cfg.output.dir.join("mesh.txt");
            mcirc_core::mesh::write_mesh(&mesh, &path)?;
            if !quiet {
                println!(
                    "wrote {} ({} nodes, {} tets, {} boundary triangles)",
                    path.display(),
                    mesh.node_count(),
                    mesh.tet_count(),
                    mesh.boundary_tris.len()
                );
            }
        }
        Command::Derive(args) => {
            let quiet = args.quiet;
            let cfg = load_config(&args)?;
            let prepared = pipeline::prepare(cfg)?;
            let report = pipeline::derive_report(&prepared);
            let path = prepared.config.output.dir.join("derived.txt");
            mcirc_core::output::write_atomic(&path, |w| {
                w.write_all(report.as_bytes())?;
                Ok(())
            })?;
            print!("{report}");
            if !quiet {
                println!("wrote {}", path.display());
            }
        }
        Command::Hrf(args) => {
            let quiet = args.quiet;
            let cfg = load_config(&args)?;
            let prepared = pipeline::prepare(cfg)?;
            std::fs::create_dir_all(&prepared.config.output.dir)?;
            pipeline::emit_hrf(&prepared, &prepared.config.output.dir)?;
            if !quiet {
                println!(
                    "wrote {}/hrf.csv and hrf_dot.csv ({} samples)",
                    prepared.config.output.dir.display(),
                    prepared.source.series.times.len()
                );
            }
        }
        Command::Ppe(args) => {
            let quiet = args.quiet;
            let mut cfg = load_config(&args)?;
            cfg.flux.mode = mcirc_core::config::FluxMode::Ppe;
            let prepared = pipeline::prepare(cfg)?;
            std::fs::create_dir_all(&prepared.config.output.dir)?;
            pipeline::emit_ppe(&prepared, &prepared.config.output.dir)?;
            if !quiet {
                println!(
                    "wrote {}/pressure.vtk and flux.csv",
                    prepared.config.output.dir.display()
                );
            }
        }
        Command::Run(args) => {
            let common = CommonArgs {
                config: Some(args.config),
                out: args.out,
                cadence: args.cadence,
                quiet: args.quiet,
            };
            let cfg = load_config(&common)?;
            let prepared = pipeline::prepare(cfg)?;
            let dir = prepared.config.output.dir.clone();
            let out = pipeline::run_to_dir(&prepared, &dir)?;
            if !common.quiet {
                println!(
                    "run complete: {} steps, {} snapshots, outputs in {}",
                    out.final_state.step,
                    out.snapshots.len(),
                    dir.display()
                );
            }
        }
        Command::Analyze(args) => {
            let quiet = args.quiet;
            let cfg = load_config(&args)?;
            let dir = cfg.output.dir.clone();
            pipeline::analyze_dir(cfg, &dir)?;
            if !quiet {
                println!("analysis written to {}", dir.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // usage problems exit 1; --help/--version print and exit 0
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
