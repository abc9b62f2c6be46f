//! Run configuration: command-line flags over a flat JSON file over
//! per-command defaults.

use std::fs;
use std::path::{Path, PathBuf};

use anisobec::{
    CrossoverMode, GridSpacing, IsotropicSplit, SeriesControl, T2dNorm, TempGrid, TempOptions, Zetas,
};
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum T2dNormArg {
    Zeta2,
    TwoZeta2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum IsoSplitArg {
    Maximal,
    Symmetric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum ModeArg {
    ClosedForm,
    FullSolve,
}

/// Flags shared by every subcommand. All are optional so that a config
/// file can fill the gaps.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommonArgs {
    /// Trap frequency along the first axis.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub omega1: Option<f64>,
    /// Trap frequency along the second axis.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub omega2: Option<f64>,
    /// Trap frequency along the third axis.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub omega3: Option<f64>,
    /// Number of atoms N (real, >= 1).
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub natoms: Option<f64>,
    /// Lowest temperature of the grid.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub tmin: Option<f64>,
    /// Highest temperature of the grid.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub tmax: Option<f64>,
    /// Number of grid points.
    #[arg(long, global = true)]
    pub points: Option<usize>,
    /// Logarithmic temperature spacing.
    #[arg(long, global = true, num_args = 0..=1, default_missing_value = "true")]
    pub log: Option<bool>,
    /// Crossover constant c1.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub c1: Option<f64>,
    /// Crossover constant c2.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub c2: Option<f64>,
    /// Crossover constant c3.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub c3: Option<f64>,
    /// Relative truncation tolerance of all series.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub tol: Option<f64>,
    /// Maximum number of series terms.
    #[arg(long = "max-terms", global = true)]
    #[serde(alias = "max-terms")]
    pub max_terms: Option<usize>,
    /// Output format.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Output file (stdout when absent).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Approximate zeta(2) and zeta(3) by one.
    #[arg(long = "zeta-as-one", global = true, num_args = 0..=1, default_missing_value = "true")]
    #[serde(alias = "zeta-as-one")]
    pub zeta_as_one: Option<bool>,
    /// Normalization of the two-dimensional bulk temperature.
    #[arg(long = "t2d-norm", global = true, value_enum)]
    #[serde(alias = "t2d-norm")]
    pub t2d_norm: Option<T2dNormArg>,
    /// Split convention for isotropic traps.
    #[arg(long = "iso-split", global = true, value_enum)]
    #[serde(alias = "iso-split")]
    pub iso_split: Option<IsoSplitArg>,
    /// Two-dimensional crossover evaluation.
    #[arg(long, global = true, value_enum)]
    pub mode: Option<ModeArg>,
}

impl CommonArgs {
    /// Field-by-field `self` if set, otherwise `other`.
    fn or(self, other: CommonArgs) -> CommonArgs {
        CommonArgs {
            omega1: self.omega1.or(other.omega1),
            omega2: self.omega2.or(other.omega2),
            omega3: self.omega3.or(other.omega3),
            natoms: self.natoms.or(other.natoms),
            tmin: self.tmin.or(other.tmin),
            tmax: self.tmax.or(other.tmax),
            points: self.points.or(other.points),
            log: self.log.or(other.log),
            c1: self.c1.or(other.c1),
            c2: self.c2.or(other.c2),
            c3: self.c3.or(other.c3),
            tol: self.tol.or(other.tol),
            max_terms: self.max_terms.or(other.max_terms),
            format: self.format.or(other.format),
            out: self.out.or(other.out),
            zeta_as_one: self.zeta_as_one.or(other.zeta_as_one),
            t2d_norm: self.t2d_norm.or(other.t2d_norm),
            iso_split: self.iso_split.or(other.iso_split),
            mode: self.mode.or(other.mode),
        }
    }
}

/// Per-command defaults for the physical parameters.
#[derive(Debug, Clone, Copy)]
pub struct Defaults {
    pub omega: [f64; 3],
    pub natoms: f64,
    pub grid: (f64, f64, usize),
}

/// The isotropic trap with `N = 1000` on `[0.05, 2]`.
pub const STANDARD_DEFAULTS: Defaults = Defaults {
    omega: [0.1, 0.1, 0.1],
    natoms: 1000.0,
    grid: (0.05, 2.0, 200),
};

/// Fully resolved and validated configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub omega: [f64; 3],
    pub natoms: f64,
    pub c: [f64; 3],
    pub grid: TempGrid,
    pub ctrl: SeriesControl,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub zeta_as_one: bool,
    pub t2d_norm: T2dNorm,
    pub isotropic_split: IsotropicSplit,
    pub mode: CrossoverMode,
}

impl RunConfig {
    pub fn temp_options(&self) -> TempOptions {
        TempOptions {
            zetas: Zetas::select(self.zeta_as_one),
            t2d_norm: self.t2d_norm,
            c: self.c,
            mode: self.mode,
        }
    }
}

fn load_file(path: &Path) -> Result<CommonArgs, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Validation(format!("cannot read config file {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Failure::Validation(format!("invalid config file {}: {e}", path.display())))
}

fn positive(name: &str, v: f64) -> Result<f64, Failure> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Failure::Validation(format!("--{name} must be a positive finite number, got {v}")))
    }
}

fn nonnegative(name: &str, v: f64) -> Result<f64, Failure> {
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err(Failure::Validation(format!("--{name} must be a finite number >= 0, got {v}")))
    }
}

/// Merges command line, optional config file and defaults, then validates.
pub fn resolve(cli: CommonArgs, file: Option<&Path>, defaults: Defaults) -> Result<RunConfig, Failure> {
    let file_args = match file {
        Some(p) => load_file(p)?,
        None => CommonArgs::default(),
    };
    let a = cli.or(file_args);

    let omega = [
        positive("omega1", a.omega1.unwrap_or(defaults.omega[0]))?,
        positive("omega2", a.omega2.unwrap_or(defaults.omega[1]))?,
        positive("omega3", a.omega3.unwrap_or(defaults.omega[2]))?,
    ];
    let natoms = a.natoms.unwrap_or(defaults.natoms);
    if !(natoms.is_finite() && natoms >= 1.0) {
        return Err(Failure::Validation(format!("--natoms must be >= 1, got {natoms}")));
    }
    let c = [
        nonnegative("c1", a.c1.unwrap_or(1.0))?,
        nonnegative("c2", a.c2.unwrap_or(1.0))?,
        nonnegative("c3", a.c3.unwrap_or(1.0))?,
    ];

    let tmin = positive("tmin", a.tmin.unwrap_or(defaults.grid.0))?;
    let tmax = positive("tmax", a.tmax.unwrap_or(defaults.grid.1))?;
    let points = a.points.unwrap_or(defaults.grid.2);
    if points == 0 {
        return Err(Failure::Validation("--points must be >= 1".into()));
    }
    if tmax < tmin || (points > 1 && tmax == tmin) {
        return Err(Failure::Validation(format!("--tmax ({tmax}) must exceed --tmin ({tmin})")));
    }
    let spacing = if a.log.unwrap_or(false) {
        GridSpacing::Logarithmic
    } else {
        GridSpacing::Linear
    };
    let grid = TempGrid::new(tmin, tmax, points, spacing).map_err(|e| Failure::Validation(e.to_string()))?;

    let defaults_ctrl = SeriesControl::default();
    let tol = a.tol.unwrap_or(defaults_ctrl.rel_tol);
    if !(tol.is_finite() && tol > 0.0 && tol < 1.0) {
        return Err(Failure::Validation(format!("--tol must lie in (0, 1), got {tol}")));
    }
    let max_terms = a.max_terms.unwrap_or(defaults_ctrl.max_terms);
    let ctrl = SeriesControl::new(tol, defaults_ctrl.abs_tol, max_terms)
        .map_err(|e| Failure::Validation(format!("--max-terms/--tol: {e}")))?;

    Ok(RunConfig {
        omega,
        natoms,
        c,
        grid,
        ctrl,
        format: a.format.unwrap_or_default(),
        out: a.out,
        zeta_as_one: a.zeta_as_one.unwrap_or(false),
        t2d_norm: match a.t2d_norm {
            Some(T2dNormArg::TwoZeta2) => T2dNorm::TwoZeta2,
            _ => T2dNorm::Zeta2,
        },
        isotropic_split: match a.iso_split {
            Some(IsoSplitArg::Symmetric) => IsotropicSplit::Symmetric,
            _ => IsotropicSplit::Maximal,
        },
        mode: match a.mode {
            Some(ModeArg::FullSolve) => CrossoverMode::FullSolve,
            _ => CrossoverMode::ClosedForm,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn defaults_apply() {
        let cfg = resolve(CommonArgs::default(), None, STANDARD_DEFAULTS).unwrap();
        assert_eq!(cfg.omega, [0.1, 0.1, 0.1]);
        assert_eq!(cfg.natoms, 1000.0);
        assert_eq!(cfg.grid.points, 200);
        assert_eq!(cfg.c, [1.0; 3]);
        assert_eq!(cfg.format, Format::Csv);
    }

    #[test]
    fn command_line_beats_file_beats_default() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        write!(f, r#"{{"natoms": 5000, "omega1": 0.3, "zeta-as-one": true, "t2d_norm": "two_zeta2"}}"#).unwrap();
        let cli = CommonArgs {
            natoms: Some(42.0),
            ..Default::default()
        };
        let cfg = resolve(cli, Some(f.path()), STANDARD_DEFAULTS).unwrap();
        assert_eq!(cfg.natoms, 42.0);
        assert_eq!(cfg.omega[0], 0.3);
        assert_eq!(cfg.omega[1], 0.1);
        assert!(cfg.zeta_as_one);
        assert_eq!(cfg.t2d_norm, T2dNorm::TwoZeta2);
    }

    #[test]
    fn validation_names_the_field() {
        let cli = CommonArgs {
            omega2: Some(-0.1),
            ..Default::default()
        };
        match resolve(cli, None, STANDARD_DEFAULTS) {
            Err(Failure::Validation(msg)) => assert!(msg.contains("--omega2"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
        let cli = CommonArgs {
            tmin: Some(1.0),
            tmax: Some(0.5),
            ..Default::default()
        };
        assert!(matches!(resolve(cli, None, STANDARD_DEFAULTS), Err(Failure::Validation(_))));
    }

    #[test]
    fn unknown_file_keys_are_rejected() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        write!(f, r#"{{"natom": 5000}}"#).unwrap();
        assert!(matches!(
            resolve(CommonArgs::default(), Some(f.path()), STANDARD_DEFAULTS),
            Err(Failure::Validation(_))
        ));
    }
}
