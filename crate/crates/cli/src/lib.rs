//! Command-line front end: configuration, dispatch and serialization of
//! the figure-reproduction datasets.

// Domain guards are written `!(x > 0.0)` on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod output;
pub mod verify;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::config::CommonArgs;

#[derive(Debug, Parser)]
#[command(name = "anisobec", version, about = "Ideal Bose gas in anisotropic harmonic traps")]
pub struct Cli {
    /// Flat JSON file with default values for any flag.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(flatten)]
    pub common: CommonArgs,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Bulk and crossover temperatures with the multistep conditions.
    Temps,
    /// Condensation fractions over a temperature grid.
    Sweep,
    /// Scenario labels over a grid of frequency ratios.
    PhaseDiagram(PhaseDiagramArgs),
    /// Fractions against reduced temperature T/T*, with a spread metric.
    Similarity,
    /// Oracle, identity and sweep property suites.
    Verify(VerifyArgs),
    /// Bulk temperatures along omega = (omega1, omega1/sqrt(k3), omega1/k3).
    ScanK3(ScanArgs),
}

#[derive(Debug, Clone, clap::Args)]
pub struct PhaseDiagramArgs {
    /// Largest omega1/omega2.
    #[arg(long = "r12-max", default_value_t = 1e4)]
    pub r12_max: f64,
    /// Largest omega2/omega3.
    #[arg(long = "r23-max", default_value_t = 1e4)]
    pub r23_max: f64,
    /// Log-spaced samples of omega1/omega2 in [1, r12-max].
    #[arg(long = "r12-points", default_value_t = 50)]
    pub r12_points: usize,
    /// Log-spaced samples of omega2/omega3 in [1, r23-max].
    #[arg(long = "r23-points", default_value_t = 50)]
    pub r23_points: usize,
}

#[derive(Debug, Clone, clap::Args)]
pub struct VerifyArgs {
    /// Relative tolerance of the resummed-vs-enumerated comparison.
    #[arg(long = "oracle-tol", default_value_t = 1e-5)]
    pub oracle_tol: f64,
    /// Temperatures for the oracle and ladder suites (default: 0.5, 1 and
    /// 1.5 times the bulk 3-D temperature).
    #[arg(long = "oracle-temps", value_delimiter = ',')]
    pub oracle_temps: Option<Vec<f64>>,
}

#[derive(Debug, Clone, clap::Args)]
pub struct ScanArgs {
    /// Largest k3.
    #[arg(long = "k3-max", default_value_t = 1e6)]
    pub k3_max: f64,
    /// Log-spaced samples of k3 in [1, k3-max].
    #[arg(long = "k3-points", default_value_t = 61)]
    pub k3_points: usize,
}

/// Failure classes and their process exit codes.
#[derive(Debug, Clone, PartialEq)]
pub enum Failure {
    /// A property suite failed (exit 1).
    Verify(String),
    /// A numerical routine failed unexpectedly (exit 1).
    Numerical(String),
    /// Invalid configuration (exit 2).
    Validation(String),
    /// The requested formula does not apply (exit 3).
    Inapplicable(String),
    /// Output could not be written (exit 4).
    Io(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Verify(_) | Failure::Numerical(_) => 1,
            Failure::Validation(_) => 2,
            Failure::Inapplicable(_) => 3,
            Failure::Io(_) => 4,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Verify(m)
            | Failure::Numerical(m)
            | Failure::Validation(m)
            | Failure::Inapplicable(m)
            | Failure::Io(m) => m,
        }
    }
}

impl From<anisobec::Error> for Failure {
    fn from(e: anisobec::Error) -> Self {
        use anisobec::Error as E;
        let mut root = &e;
        while let E::AtTemperature { source, .. } = root {
            root = source;
        }
        let msg = e.to_string();
        match root {
            E::Domain(_) | E::Commensurability { .. } | E::UnsupportedOrder(_) => Failure::Validation(msg),
            E::InapplicableFormula(_) => Failure::Inapplicable(msg),
            _ => Failure::Numerical(msg),
        }
    }
}

/// Runs a parsed command line.
pub fn run(cli: Cli) -> Result<(), Failure> {
    commands::dispatch(cli)
}
