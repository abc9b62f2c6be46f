//! Particle-number constraint `N = N₀ + N₁ + N₂ + N₃`: root finding for the
//! reduced chemical potential and temperature sweeps built on top of it.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::occupation::{occupations_exact, OccupationSplit, ThermoPoint};
use crate::special::SeriesControl;
use crate::trap::{eird, TrapGeometry};

/// Relative bracket width at which the root search stops.
pub const BRACKET_REL_WIDTH: f64 = 1e-12;
/// Relative particle-number residual accepted as an exact hit.
pub const TARGET_RESIDUAL: f64 = 1e-13;
/// Worst relative residual a returned solution may have.
pub const MAX_RESIDUAL: f64 = 1e-10;
const MAX_ITERATIONS: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridSpacing {
    #[default]
    Linear,
    Logarithmic,
}

/// Temperature grid `{t_min, t_max, points, spacing}`; both ends included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TempGrid {
    pub t_min: f64,
    pub t_max: f64,
    pub points: usize,
    pub spacing: GridSpacing,
}

impl TempGrid {
    pub fn new(t_min: f64, t_max: f64, points: usize, spacing: GridSpacing) -> Result<Self> {
        let grid = TempGrid {
            t_min,
            t_max,
            points,
            spacing,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if self.points == 0 {
            return Err(Error::domain("grid needs at least one point"));
        }
        if !(self.t_min > 0.0) || !self.t_min.is_finite() {
            return Err(Error::domain(format!("tmin must be > 0, got {}", self.t_min)));
        }
        if !self.t_max.is_finite() || self.t_max < self.t_min || (self.points > 1 && self.t_max == self.t_min) {
            return Err(Error::domain(format!(
                "tmax must exceed tmin ({}), got {}",
                self.t_min, self.t_max
            )));
        }
        Ok(())
    }

    /// The grid temperatures in increasing order.
    pub fn temperatures(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.t_min];
        }
        let last = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                if i == self.points - 1 {
                    return self.t_max;
                }
                let s = i as f64 / last;
                match self.spacing {
                    GridSpacing::Linear => self.t_min + s * (self.t_max - self.t_min),
                    GridSpacing::Logarithmic => (self.t_min.ln() + s * (self.t_max / self.t_min).ln()).exp(),
                }
            })
            .collect()
    }
}

/// Solution of the number constraint at one temperature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub point: ThermoPoint,
    pub split: OccupationSplit,
    /// `|Σ Nᵢ − N| / N` at the returned `phi`.
    pub residual: f64,
}

fn check_inputs(temperature: f64, n_atoms: f64) -> Result<()> {
    if !(temperature > 0.0) || !temperature.is_finite() {
        return Err(Error::domain(format!("temperature must be > 0, got {temperature}")));
    }
    if !(n_atoms >= 1.0) || !n_atoms.is_finite() {
        return Err(Error::domain(format!("natoms must be >= 1, got {n_atoms}")));
    }
    Ok(())
}

/// Solves the number constraint and returns the full state at the root.
///
/// The total occupation is strictly decreasing in `phi`, so the root is
/// bracketed between `ln(1 + 1/N)` (where `N₀` alone equals `N`) and a
/// geometrically grown upper end. The bracket is then narrowed in `ln phi`
/// with the Illinois variant of regula falsi on `ln(total/N)`, falling back
/// to bisection whenever the interpolant stalls.
pub fn solve_equilibrium(trap: &TrapGeometry, temperature: f64, n_atoms: f64, ctrl: &SeriesControl) -> Result<Equilibrium> {
    check_inputs(temperature, n_atoms)?;
    ctrl.validate()?;
    let eval = |phi: f64| -> Result<(OccupationSplit, f64)> {
        let point = ThermoPoint::new(trap, temperature, phi)?;
        let split = occupations_exact(trap, &point, ctrl)?;
        Ok((split, (split.total / n_atoms).ln()))
    };

    let phi_min = (1.0 / n_atoms).ln_1p();
    let (lo_split, f_lo_raw) = eval(phi_min)?;
    if f_lo_raw <= 0.0 {
        // Only possible when every excited state is negligible.
        return finish(trap, temperature, n_atoms, phi_min, lo_split);
    }

    // Classical estimate z ≈ N Π ηᵢ as the first probe for the upper end.
    let eta = trap.eta(temperature);
    let classical = -(n_atoms * eta.iter().product::<f64>()).ln();
    let mut hi = if classical > 2.0 * phi_min { classical } else { 2.0 * phi_min };
    let mut lo = phi_min;
    let mut f_lo = f_lo_raw;
    let mut f_hi;
    let hi_split;
    loop {
        let (s, f) = eval(hi)?;
        if f <= 0.0 {
            f_hi = f;
            hi_split = s;
            break;
        }
        lo = hi;
        f_lo = f;
        hi *= 2.0;
        if !hi.is_finite() || hi > 1e6 {
            return Err(Error::Bracket(format!(
                "total occupation stays above N = {n_atoms} for phi up to {hi}"
            )));
        }
    }
    if f_hi == 0.0 {
        return finish(trap, temperature, n_atoms, hi, hi_split);
    }

    let (mut u_lo, mut u_hi) = (lo.ln(), hi.ln());
    let mut best = (hi, hi_split, f_hi.abs());
    let mut side = 0i8;
    for _ in 0..MAX_ITERATIONS {
        let width = u_hi - u_lo;
        let mut u = u_lo + f_lo / (f_lo - f_hi) * width;
        if !(u > u_lo + 0.01 * width && u < u_hi - 0.01 * width) {
            u = 0.5 * (u_lo + u_hi);
        }
        let phi = u.exp();
        let (split, f) = eval(phi)?;
        if f.abs() < best.2 {
            best = (phi, split, f.abs());
        }
        if f.abs() <= TARGET_RESIDUAL {
            break;
        }
        if f > 0.0 {
            u_lo = u;
            f_lo = f;
            if side == 1 {
                f_hi *= 0.5;
            }
            side = 1;
        } else {
            u_hi = u;
            f_hi = f;
            if side == -1 {
                f_lo *= 0.5;
            }
            side = -1;
        }
        if u_hi - u_lo <= BRACKET_REL_WIDTH {
            break;
        }
    }
    let (phi, split, _) = best;
    finish(trap, temperature, n_atoms, phi, split)
}

fn finish(trap: &TrapGeometry, temperature: f64, n_atoms: f64, phi: f64, split: OccupationSplit) -> Result<Equilibrium> {
    let residual = ((split.total - n_atoms) / n_atoms).abs();
    if residual > MAX_RESIDUAL {
        return Err(Error::Bracket(format!(
            "number constraint residual {residual:e} at phi = {phi}"
        )));
    }
    Ok(Equilibrium {
        point: ThermoPoint::new(trap, temperature, phi)?.with_target(n_atoms),
        split,
        residual,
    })
}

/// Reduced chemical potential `phi*` satisfying the number constraint.
pub fn solve_phi(trap: &TrapGeometry, temperature: f64, n_atoms: f64, ctrl: &SeriesControl) -> Result<f64> {
    solve_equilibrium(trap, temperature, n_atoms, ctrl).map(|e| e.point.phi)
}

/// Scaling parameters `xᵢ = φ/ηᵢ`.
pub fn scaling_params(trap: &TrapGeometry, temperature: f64, phi: f64) -> Result<[f64; 3]> {
    if !(temperature > 0.0) {
        return Err(Error::domain(format!("temperature must be > 0, got {temperature}")));
    }
    if !(phi > 0.0) {
        return Err(Error::domain(format!("phi must be > 0, got {phi}")));
    }
    Ok(trap.eta(temperature).map(|e| phi / e))
}

/// Correlation length in units of the thermal wavelength, `1/(2√(πφ))`.
pub fn correlation_proxy(phi: f64) -> Result<f64> {
    if !(phi > 0.0) {
        return Err(Error::domain(format!("phi must be > 0, got {phi}")));
    }
    Ok(0.5 / (PI * phi).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    #[serde(rename = "T")]
    pub temperature: f64,
    pub phi: f64,
    pub z: f64,
    pub frac0: f64,
    pub frac1: f64,
    pub frac2: f64,
    pub frac3: f64,
    pub eird: u8,
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
    pub xi_ratio: f64,
}

impl SweepRecord {
    pub fn fractions(&self) -> [f64; 4] {
        [self.frac0, self.frac1, self.frac2, self.frac3]
    }

    fn from_equilibrium(trap: &TrapGeometry, n_atoms: f64, eq: &Equilibrium) -> Result<Self> {
        let t = eq.point.temperature;
        let phi = eq.point.phi;
        let x = scaling_params(trap, t, phi)?;
        let f = eq.split.components().map(|c| c / n_atoms);
        Ok(SweepRecord {
            temperature: t,
            phi,
            z: eq.point.z,
            frac0: f[0],
            frac1: f[1],
            frac2: f[2],
            frac3: f[3],
            eird: eird(trap, t)?,
            x1: x[0],
            x2: x[1],
            x3: x[2],
            xi_ratio: correlation_proxy(phi)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepMetadata {
    pub trap: TrapGeometry,
    pub n_atoms: f64,
    pub grid: TempGrid,
    pub ctrl: SeriesControl,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub metadata: SweepMetadata,
    pub records: Vec<SweepRecord>,
}

/// Solves every grid temperature independently (no warm starts), in
/// parallel; the records come back in grid order regardless of the pool.
pub fn sweep(trap: &TrapGeometry, n_atoms: f64, grid: &TempGrid, ctrl: &SeriesControl) -> Result<SweepTable> {
    grid.validate()?;
    check_inputs(grid.t_min, n_atoms)?;
    let records = grid
        .temperatures()
        .into_par_iter()
        .map(|t| {
            solve_equilibrium(trap, t, n_atoms, ctrl)
                .and_then(|eq| SweepRecord::from_equilibrium(trap, n_atoms, &eq))
                .map_err(|e| Error::AtTemperature {
                    temperature: t,
                    source: Box::new(e),
                })
        })
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepTable {
        metadata: SweepMetadata {
            trap: *trap,
            n_atoms,
            grid: *grid,
            ctrl: *ctrl,
            version: env!("CARGO_PKG_VERSION").to_string(),
        },
        records,
    })
}
