//! Subcommand implementations.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use anisobec::{
    anisotropy_scan, build_trap, collapse_export, multistep_flags, phase_point, sweep, temperature_set, Regime,
    TrapGeometry, Zetas, DEFAULT_COMMENSURABILITY_TOL,
};
use serde::Serialize;

use crate::config::{resolve, Defaults, Format, RunConfig, STANDARD_DEFAULTS};
use crate::output::{emit, json, real, sidecar, sweep_csv};
use crate::verify::run_verify;
use crate::{Cli, Command, Failure, PhaseDiagramArgs, ScanArgs};

/// Everything needed to reproduce an output file.
#[derive(Debug, Serialize)]
pub struct Metadata<'a> {
    pub version: &'static str,
    pub command: &'static str,
    pub config: &'a RunConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trap: Option<TrapGeometry>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub extra: BTreeMap<&'static str, serde_json::Value>,
}

impl<'a> Metadata<'a> {
    fn new(command: &'static str, config: &'a RunConfig, trap: Option<TrapGeometry>) -> Self {
        Metadata {
            version: env!("CARGO_PKG_VERSION"),
            command,
            config,
            trap,
            extra: BTreeMap::new(),
        }
    }
}

pub fn dispatch(cli: Cli) -> Result<(), Failure> {
    let file = cli.config.as_deref();
    match &cli.command {
        Command::Temps => cmd_temps(&resolve(cli.common.clone(), file, STANDARD_DEFAULTS)?),
        Command::Sweep => cmd_sweep(&resolve(cli.common.clone(), file, STANDARD_DEFAULTS)?),
        Command::Similarity => cmd_similarity(&resolve(cli.common.clone(), file, STANDARD_DEFAULTS)?),
        Command::Verify(args) => run_verify(&resolve(cli.common.clone(), file, STANDARD_DEFAULTS)?, args),
        Command::PhaseDiagram(args) => {
            let defaults = Defaults {
                natoms: 1e4,
                ..STANDARD_DEFAULTS
            };
            cmd_phase_diagram(&resolve(cli.common.clone(), file, defaults)?, args)
        }
        Command::ScanK3(args) => {
            let defaults = Defaults {
                omega: [0.5, 0.5, 0.5],
                natoms: 1e4,
                ..STANDARD_DEFAULTS
            };
            cmd_scan_k3(&resolve(cli.common.clone(), file, defaults)?, args)
        }
    }
}

pub fn make_trap(cfg: &RunConfig) -> Result<TrapGeometry, Failure> {
    let [w1, w2, w3] = cfg.omega;
    let trap = build_trap(w1, w2, w3, DEFAULT_COMMENSURABILITY_TOL)?;
    Ok(trap.with_isotropic_split(cfg.isotropic_split))
}

fn warn(lines: &[String]) {
    for l in lines {
        eprintln!("warning: {l}");
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(real).unwrap_or_default()
}

pub fn cmd_temps(cfg: &RunConfig) -> Result<(), Failure> {
    let trap = make_trap(cfg)?;
    let temps = temperature_set(&trap, cfg.natoms, &cfg.temp_options())?;
    let report = multistep_flags(&trap, cfg.natoms);
    warn(&temps.warnings);

    let text = match cfg.format {
        Format::Json => {
            #[derive(Serialize)]
            struct Doc<'a> {
                metadata: Metadata<'a>,
                regime: Regime,
                temperatures: &'a anisobec::TemperatureSet,
                multistep: &'a anisobec::MultistepReport,
            }
            json(&Doc {
                metadata: Metadata::new("temps", cfg, Some(trap)),
                regime: trap.regime,
                temperatures: &temps,
                multistep: &report,
            })?
        }
        Format::Csv => {
            let mut s = String::from("quantity,value\n");
            let mut row = |k: &str, v: String| {
                let _ = writeln!(s, "{k},{v}");
            };
            row("regime", trap.regime.to_string());
            row("t1d", real(temps.t1d));
            row("t2d", real(temps.t2d));
            row("t3d", real(temps.t3d));
            row("t1d_star", opt(temps.t1d_star));
            row("t2d_star", opt(temps.t2d_star));
            row("t3d_star", opt(temps.t3d_star));
            for (name, c) in [
                ("cond_a", report.cond_a),
                ("cond_b", report.cond_b),
                ("cond_c", report.cond_c),
                ("three_step_k3", report.three_step_k3),
                ("reduction_2d", report.reduction_2d),
            ] {
                row(&format!("{name}_margin"), real(c.margin));
                row(&format!("{name}_holds"), c.holds.to_string());
            }
            row("two_step_window_lower", real(report.two_step_window.0));
            row("two_step_window_upper", real(report.two_step_window.1));
            row("in_window", report.in_window.to_string());
            row("predicted_label", report.predicted_label.to_string());
            s
        }
    };
    emit(cfg.out.as_deref(), &text)
}

pub fn cmd_sweep(cfg: &RunConfig) -> Result<(), Failure> {
    let trap = make_trap(cfg)?;
    let table = sweep(&trap, cfg.natoms, &cfg.grid, &cfg.ctrl)?;
    let metadata = Metadata::new("sweep", cfg, Some(trap));
    match cfg.format {
        Format::Json => {
            #[derive(Serialize)]
            struct Doc<'a> {
                metadata: Metadata<'a>,
                records: &'a [anisobec::SweepRecord],
            }
            emit(
                cfg.out.as_deref(),
                &json(&Doc {
                    metadata,
                    records: &table.records,
                })?,
            )
        }
        Format::Csv => {
            emit(cfg.out.as_deref(), &sweep_csv(&table.records))?;
            if let Some(path) = &cfg.out {
                emit(Some(&sidecar(path)), &json(&metadata)?)?;
            }
            Ok(())
        }
    }
}

pub fn cmd_similarity(cfg: &RunConfig) -> Result<(), Failure> {
    let trap = make_trap(cfg)?;
    let table = sweep(&trap, cfg.natoms, &cfg.grid, &cfg.ctrl)?;
    let temps = temperature_set(&trap, cfg.natoms, &cfg.temp_options())?;
    warn(&temps.warnings);
    let dataset = collapse_export(&table, &temps);
    for note in &dataset.notes {
        eprintln!("note: {note}");
    }
    match dataset.spread {
        Some(s) => eprintln!("spread: {}", real(s)),
        None => eprintln!("spread: unavailable"),
    }
    let mut metadata = Metadata::new("similarity", cfg, Some(trap));
    metadata
        .extra
        .insert("spread", serde_json::to_value(dataset.spread).unwrap_or_default());
    match cfg.format {
        Format::Json => {
            #[derive(Serialize)]
            struct Doc<'a> {
                metadata: Metadata<'a>,
                dataset: &'a anisobec::CollapseDataset,
            }
            emit(
                cfg.out.as_deref(),
                &json(&Doc {
                    metadata,
                    dataset: &dataset,
                })?,
            )
        }
        Format::Csv => {
            let mut s = String::from("d,t_star,reduced_T,fraction\n");
            for c in &dataset.curves {
                for (x, y) in c.reduced_t.iter().zip(&c.fraction) {
                    let _ = writeln!(s, "{},{},{},{}", c.d, real(c.t_star), real(*x), real(*y));
                }
            }
            emit(cfg.out.as_deref(), &s)?;
            if let Some(path) = &cfg.out {
                emit(Some(&sidecar(path)), &json(&metadata)?)?;
            }
            Ok(())
        }
    }
}

fn log_axis(max: f64, points: usize, name: &str) -> Result<Vec<f64>, Failure> {
    if !(max >= 1.0 && max.is_finite()) {
        return Err(Failure::Validation(format!("--{name}-max must be >= 1, got {max}")));
    }
    if points == 0 {
        return Err(Failure::Validation(format!("--{name}-points must be >= 1")));
    }
    if points == 1 {
        return Ok(vec![max]);
    }
    let last = (points - 1) as f64;
    Ok((0..points).map(|i| max.powf(i as f64 / last)).collect())
}

pub fn cmd_phase_diagram(cfg: &RunConfig, args: &PhaseDiagramArgs) -> Result<(), Failure> {
    let r12s = log_axis(args.r12_max, args.r12_points, "r12")?;
    let r23s = log_axis(args.r23_max, args.r23_points, "r23")?;
    let mut cells = Vec::with_capacity(r12s.len() * r23s.len());
    let mut rounded = 0usize;
    for &r12 in &r12s {
        for &r23 in &r23s {
            let p = phase_point(r12, r23, cfg.natoms, cfg.zeta_as_one)?;
            rounded += usize::from(p.warning.is_some());
            cells.push(p);
        }
    }
    if rounded > 0 {
        eprintln!("warning: {rounded} cell(s) had frequency ratios rounded to integers");
    }
    let text = match cfg.format {
        Format::Json => {
            #[derive(Serialize)]
            struct Doc<'a> {
                metadata: Metadata<'a>,
                cells: &'a [anisobec::PhasePoint],
            }
            let mut metadata = Metadata::new("phase-diagram", cfg, None);
            metadata.extra.insert("r12_max", args.r12_max.into());
            metadata.extra.insert("r23_max", args.r23_max.into());
            json(&Doc {
                metadata,
                cells: &cells,
            })?
        }
        Format::Csv => {
            let mut s = String::from("log10_r12,log10_r23,k2,k3,label\n");
            for p in &cells {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{}",
                    real(p.ratio12.log10()),
                    real(p.ratio23.log10()),
                    p.k2,
                    p.k3,
                    p.label
                );
            }
            s
        }
    };
    emit(cfg.out.as_deref(), &text)
}

pub fn cmd_scan_k3(cfg: &RunConfig, args: &ScanArgs) -> Result<(), Failure> {
    let rows = anisotropy_scan(
        cfg.omega[0],
        cfg.natoms,
        args.k3_max,
        args.k3_points,
        &Zetas::select(cfg.zeta_as_one),
        cfg.t2d_norm,
    )?;
    let text = match cfg.format {
        Format::Json => {
            #[derive(Serialize)]
            struct Doc<'a> {
                metadata: Metadata<'a>,
                rows: &'a [anisobec::AnisotropyRow],
            }
            json(&Doc {
                metadata: Metadata::new("scan-k3", cfg, None),
                rows: &rows,
            })?
        }
        Format::Csv => {
            let mut s = String::from("k3,t1d,t2d,t3d\n");
            for r in &rows {
                let _ = writeln!(s, "{},{},{},{}", real(r.k3), real(r.t1d), real(r.t2d), real(r.t3d));
            }
            s
        }
    };
    emit(cfg.out.as_deref(), &text)
}
