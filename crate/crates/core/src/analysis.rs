//! Similarity structure of the occupation numbers: the λ-derivative ladder
//! linking the leading terms `N₃(λ) → N₂, N₁, N₀`, the reduced-temperature
//! collapse of the fractions, and the stage temperatures of a sweep.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::occupation::ThermoPoint;
use crate::solver::SweepTable;
use crate::special::{bose_g_exp, SeriesControl};
use crate::temperatures::TemperatureSet;

/// Leading-term occupation `N_d(λ)`: `g₃(e^{λφ})/(η₁η₂η₃)`,
/// `g₂(e^{λφ})/(η₂η₃)`, `g₁(e^{λφ})/η₃` or `g₀(e^{λφ})` for `d = 3, 2, 1, 0`.
pub fn n_lambda(point: &ThermoPoint, lam: f64, d: u32, ctrl: &SeriesControl) -> Result<f64> {
    if d > 3 {
        return Err(Error::domain(format!("dimension index must be 0..=3, got {d}")));
    }
    if !(point.phi > 0.0) {
        return Err(Error::domain("phi must be > 0"));
    }
    let alpha = -lam * point.phi;
    if !(alpha > 0.0) {
        return Err(Error::domain(format!("lambda * phi = {} must be < 0", -alpha)));
    }
    let g = bose_g_exp(d, alpha, ctrl)?;
    let denom: f64 = point.eta[(3 - d as usize)..].iter().product();
    Ok(g / denom)
}

/// Relative residuals of the three ladder identities
/// `N₂ = x₁⁻¹ dN₃/dλ`, `N₁ = (x₁x₂)⁻¹ d²N₃/dλ²`, `N₀ = (x₁x₂x₃)⁻¹ d³N₃/dλ³`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LadderResiduals {
    pub r2: f64,
    pub r1: f64,
    pub r0: f64,
}

impl LadderResiduals {
    pub fn max(&self) -> f64 {
        self.r2.max(self.r1).max(self.r0)
    }

    fn as_array(&self) -> [f64; 3] {
        [self.r2, self.r1, self.r0]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LadderReport {
    pub lambda: f64,
    pub fd_step: f64,
    /// Derivatives from `d/dλ g_p(e^{λφ}) = φ g_{p−1}(e^{λφ})`.
    pub analytic: LadderResiduals,
    /// Derivatives from central finite differences in `λ`.
    pub finite_difference: LadderResiduals,
}

/// Point at which the ladder is checked.
pub const LADDER_LAMBDA: f64 = -1.0;
pub const DEFAULT_FD_STEP: f64 = 1e-4;

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs()
    }
}

/// Central finite-difference derivatives of `g₃(e^{λφ})` in `λ` of orders
/// 1–3 with step `h`.
///
/// The stencils are applied to each term `e^{nλφ}/n³` of the series, where
/// they reduce to exact kernels — `sinh(x)/h`, `4sinh²(x/2)/h²` and
/// `4sinh(x)sinh²(x/2)/h³` with `x = nhφ` — so the result carries the
/// stencil's truncation error without the cancellation of differencing
/// rounded function values.
fn g3_stencil_derivatives(alpha: f64, phi: f64, h: f64, ctrl: &SeriesControl) -> Result<[f64; 3]> {
    let ratio = (-(alpha - 2.0 * h * phi)).exp();
    let tail_factor = ratio / (1.0 - ratio);
    let mut acc = [0.0f64; 3];
    for n in 1..=ctrl.max_terms {
        let nf = n as f64;
        let x = nf * h * phi;
        let base = (-nf * alpha).exp() / (nf * nf * nf);
        let s = x.sinh();
        let s_half = (0.5 * x).sinh();
        let k = [s / h, 4.0 * s_half * s_half / (h * h), 4.0 * s * s_half * s_half / (h * h * h)];
        let mut done = true;
        for (a, kk) in acc.iter_mut().zip(k) {
            let term = base * kk;
            *a += term;
            if term * tail_factor >= ctrl.threshold(*a) {
                done = false;
            }
        }
        if done {
            return Ok(acc);
        }
    }
    Err(Error::Convergence {
        terms: ctrl.max_terms,
        bound: f64::NAN,
    })
}

/// Residuals of the ladder identities at `λ = −1`, with derivatives taken
/// analytically and by central differences of step `fd_step`.
pub fn ladder_residuals(point: &ThermoPoint, fd_step: f64, ctrl: &SeriesControl) -> Result<LadderReport> {
    if !(point.phi > 0.0) {
        return Err(Error::domain("phi must be > 0"));
    }
    // The widest stencil reaches λ ± 2h; keep e^{λφ} below one.
    if !(fd_step > 0.0 && 2.0 * fd_step < -LADDER_LAMBDA) {
        return Err(Error::domain(format!("fd_step must lie in (0, 0.5), got {fd_step}")));
    }
    let phi = point.phi;
    let alpha = -LADDER_LAMBDA * phi;
    let [e1, e2, e3] = point.eta;
    let prod = e1 * e2 * e3;
    let x = point.eta.map(|e| phi / e);
    let scales = [x[0], x[0] * x[1], x[0] * x[1] * x[2]];

    let targets = [
        n_lambda(point, LADDER_LAMBDA, 2, ctrl)?,
        n_lambda(point, LADDER_LAMBDA, 1, ctrl)?,
        n_lambda(point, LADDER_LAMBDA, 0, ctrl)?,
    ];
    let mut analytic = [0.0; 3];
    for (k, slot) in analytic.iter_mut().enumerate() {
        let order = k as i32 + 1;
        let derivative = phi.powi(order) * bose_g_exp(2 - k as u32, alpha, ctrl)? / prod;
        *slot = rel(derivative / scales[k], targets[k]);
    }
    let fd = g3_stencil_derivatives(alpha, phi, fd_step, ctrl)?;
    let mut finite = [0.0; 3];
    for k in 0..3 {
        finite[k] = rel(fd[k] / prod / scales[k], targets[k]);
    }
    let pack = |r: [f64; 3]| LadderResiduals {
        r2: r[0],
        r1: r[1],
        r0: r[2],
    };
    Ok(LadderReport {
        lambda: LADDER_LAMBDA,
        fd_step,
        analytic: pack(analytic),
        finite_difference: pack(finite),
    })
}

/// Observed order of the finite-difference residuals between two steps,
/// `ln(r(h_coarse)/r(h_fine)) / ln(h_coarse/h_fine)` per identity.
pub fn fd_convergence_order(point: &ThermoPoint, h_coarse: f64, h_fine: f64, ctrl: &SeriesControl) -> Result<[f64; 3]> {
    let coarse = ladder_residuals(point, h_coarse, ctrl)?.finite_difference.as_array();
    let fine = ladder_residuals(point, h_fine, ctrl)?.finite_difference.as_array();
    let span = (h_coarse / h_fine).ln();
    Ok([0, 1, 2].map(|k| (coarse[k] / fine[k]).ln() / span))
}

/// The total number twice: the ladder form
/// `Σ_k (x₁…x_k)⁻¹ dᵏN₃/dλᵏ` at `λ = −1` and the direct sum
/// `N₀ + N₁ + N₂ + N₃` of the leading terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LadderTotal {
    pub ladder: f64,
    pub direct: f64,
    pub relative_difference: f64,
}

pub fn ladder_total(point: &ThermoPoint, ctrl: &SeriesControl) -> Result<LadderTotal> {
    if !(point.phi > 0.0) {
        return Err(Error::domain("phi must be > 0"));
    }
    let phi = point.phi;
    let prod: f64 = point.eta.iter().product();
    let x = point.eta.map(|e| phi / e);
    let scales = [1.0, x[0], x[0] * x[1], x[0] * x[1] * x[2]];
    let mut ladder = 0.0;
    for k in (0..4).rev() {
        let derivative = phi.powi(k as i32) * bose_g_exp(3 - k as u32, phi, ctrl)? / prod;
        ladder += derivative / scales[k];
    }
    let mut direct = 0.0;
    for d in 0..4 {
        direct += n_lambda(point, LADDER_LAMBDA, d, ctrl)?;
    }
    Ok(LadderTotal {
        ladder,
        direct,
        relative_difference: rel(ladder, direct),
    })
}

/// One reduced curve `(T/T_dD*, N_d/N)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollapseCurve {
    pub d: u8,
    pub t_star: f64,
    pub reduced_t: Vec<f64>,
    pub fraction: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollapseDataset {
    pub curves: Vec<CollapseCurve>,
    /// Largest pairwise difference of the peak-normalized curves on their
    /// common reduced-temperature range (log-interpolated). This metric is
    /// defined here for inspection only; no threshold is implied.
    pub spread: Option<f64>,
    pub notes: Vec<String>,
}

/// Samples on the common range for the spread metric.
const SPREAD_SAMPLES: usize = 200;

/// Reduced curves for `d = 1, 2, 3`; a curve is omitted (with a note) when
/// its crossover temperature is unavailable.
pub fn collapse_export(table: &SweepTable, temps: &TemperatureSet) -> CollapseDataset {
    let mut curves = Vec::new();
    let mut notes = Vec::new();
    let stars = [(1u8, temps.t1d_star), (2, temps.t2d_star), (3, temps.t3d_star)];
    for (d, star) in stars {
        let Some(t_star) = star else {
            notes.push(format!("d = {d}: no crossover temperature for this trap; curve omitted"));
            continue;
        };
        let reduced_t = table.records.iter().map(|r| r.temperature / t_star).collect();
        let fraction = table.records.iter().map(|r| r.fractions()[d as usize]).collect();
        curves.push(CollapseCurve {
            d,
            t_star,
            reduced_t,
            fraction,
        });
    }
    let spread = spread_metric(&curves);
    if spread.is_none() {
        notes.push("spread metric unavailable: fewer than two curves with overlapping range".into());
    }
    notes.push("spread = max pairwise |F_i - F_j| of peak-normalized curves over the shared T/T* range".into());
    CollapseDataset { curves, spread, notes }
}

fn interp_log(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let i = xs.partition_point(|&v| v < x).clamp(1, xs.len() - 1);
    let (x0, x1) = (xs[i - 1].ln(), xs[i].ln());
    let w = if x1 == x0 { 0.0 } else { (x.ln() - x0) / (x1 - x0) };
    ys[i - 1] + w * (ys[i] - ys[i - 1])
}

fn spread_metric(curves: &[CollapseCurve]) -> Option<f64> {
    let mut worst: Option<f64> = None;
    for (i, a) in curves.iter().enumerate() {
        for b in &curves[i + 1..] {
            if a.reduced_t.len() < 2 || b.reduced_t.len() < 2 {
                continue;
            }
            let lo = a.reduced_t[0].max(b.reduced_t[0]);
            let hi = a.reduced_t.last()?.min(*b.reduced_t.last()?);
            if !(hi > lo) {
                continue;
            }
            let peak_a = a.fraction.iter().cloned().fold(0.0, f64::max);
            let peak_b = b.fraction.iter().cloned().fold(0.0, f64::max);
            if !(peak_a > 0.0 && peak_b > 0.0) {
                continue;
            }
            for s in 0..SPREAD_SAMPLES {
                let x = (lo.ln() + (hi / lo).ln() * s as f64 / (SPREAD_SAMPLES - 1) as f64).exp();
                let fa = interp_log(&a.reduced_t, &a.fraction, x) / peak_a;
                let fb = interp_log(&b.reduced_t, &b.fraction, x) / peak_b;
                let diff = (fa - fb).abs();
                worst = Some(worst.map_or(diff, |w| w.max(diff)));
            }
        }
    }
    worst
}

/// Characteristic temperatures of a multistage sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StageTemperatures {
    /// Highest temperature at which the effective dimension drops below 3,
    /// and the ground-state fraction there.
    pub eird_drop: Option<(f64, f64)>,
    /// Temperature where `frac3` falls through half its sweep maximum.
    pub frac3_half: Option<f64>,
    /// Temperature where `frac1` rises through half its sweep maximum.
    pub frac1_half: Option<f64>,
    /// Temperature where `frac0` rises through half its sweep maximum.
    pub frac0_half: Option<f64>,
}

/// Highest-temperature crossing of `level` by `frac_d`, linearly
/// interpolated between records.
fn crossing(table: &SweepTable, d: usize, level: f64) -> Option<f64> {
    table.records.windows(2).rev().find_map(|w| {
        let (a, b) = (w[0].fractions()[d], w[1].fractions()[d]);
        if (a - level) * (b - level) <= 0.0 && a != b {
            let s = (level - a) / (b - a);
            Some(w[0].temperature + s * (w[1].temperature - w[0].temperature))
        } else {
            None
        }
    })
}

pub fn stage_temperatures(table: &SweepTable) -> StageTemperatures {
    let half_max = |d: usize| {
        let peak = table.records.iter().map(|r| r.fractions()[d]).fold(0.0, f64::max);
        crossing(table, d, 0.5 * peak)
    };
    let eird_drop = table
        .records
        .windows(2)
        .rev()
        .find(|w| w[0].eird < 3 && w[1].eird == 3)
        .map(|w| (w[0].temperature, w[0].frac0));
    StageTemperatures {
        eird_drop,
        frac3_half: half_max(3),
        frac1_half: half_max(1),
        frac0_half: half_max(0),
    }
}

/// Temperature of the largest `frac_d` in a sweep.
pub fn fraction_peak(table: &SweepTable, d: usize) -> Option<(f64, f64)> {
    table
        .records
        .iter()
        .map(|r| (r.temperature, r.fractions()[d]))
        .max_by(|a, b| a.1.total_cmp(&b.1))
}
