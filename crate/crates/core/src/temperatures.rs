//! Bulk and finite-size crossover condensation temperatures, the multistep
//! conditions that compare them, and the anisotropy phase diagram.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::Zetas;
use crate::trap::{build_trap, Regime, TrapGeometry};

/// Normalization of the two-dimensional bulk temperature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum T2dNorm {
    /// `T₂D = (Nω₂ω₃/ζ(2))^{1/2}`.
    #[default]
    Zeta2,
    /// `T₂D = (Nω₂ω₃/(2ζ(2)))^{1/2}`.
    TwoZeta2,
}

impl T2dNorm {
    fn factor(self) -> f64 {
        match self {
            T2dNorm::Zeta2 => 1.0,
            T2dNorm::TwoZeta2 => 2.0,
        }
    }
}

/// How the two-dimensional crossover temperature is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrossoverMode {
    /// Large-`N` closed form (valid for `c₂ = 1`).
    #[default]
    ClosedForm,
    /// Root of the full relation quadratic in `T` (with logarithms).
    FullSolve,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TempOptions {
    pub zetas: Zetas,
    pub t2d_norm: T2dNorm,
    /// Crossover constants `(c₁, c₂, c₃)`.
    pub c: [f64; 3],
    pub mode: CrossoverMode,
}

impl Default for TempOptions {
    fn default() -> Self {
        TempOptions {
            zetas: Zetas::EXACT,
            t2d_norm: T2dNorm::Zeta2,
            c: [1.0; 3],
            mode: CrossoverMode::ClosedForm,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BulkTemps {
    pub t1d: f64,
    pub t2d: f64,
    pub t3d: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemperatureSet {
    pub t1d: f64,
    pub t2d: f64,
    pub t3d: f64,
    pub t1d_star: Option<f64>,
    pub t2d_star: Option<f64>,
    pub t3d_star: Option<f64>,
    pub c: [f64; 3],
    pub warnings: Vec<String>,
}

/// A crossover temperature together with a reliability warning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Crossover {
    pub value: f64,
    pub warning: Option<String>,
}

fn check_n(n_atoms: f64, min: f64) -> Result<()> {
    if !(n_atoms >= min) || !n_atoms.is_finite() {
        return Err(Error::domain(format!("natoms must be >= {min}, got {n_atoms}")));
    }
    Ok(())
}

/// Bulk temperatures from a raw, descending frequency triple (no
/// commensurability needed).
pub fn bulk_temps_raw(omega: [f64; 3], n_atoms: f64, zetas: &Zetas, norm: T2dNorm) -> Result<BulkTemps> {
    check_n(n_atoms, 2.0)?;
    if omega.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
        return Err(Error::domain(format!("frequencies must be positive, got {omega:?}")));
    }
    let [w1, w2, w3] = omega;
    Ok(BulkTemps {
        t1d: n_atoms * w3 / (2.0 * n_atoms).ln(),
        t2d: (n_atoms * w2 * w3 / (norm.factor() * zetas.zeta2)).sqrt(),
        t3d: (n_atoms * w1 * w2 * w3 / zetas.zeta3).cbrt(),
    })
}

/// `T₁D = Nω₃/ln(2N)`, `T₂D = (Nω₂ω₃/ζ(2))^{1/2}`, `T₃D = (Nω₁ω₂ω₃/ζ(3))^{1/3}`.
pub fn bulk_temps(trap: &TrapGeometry, n_atoms: f64) -> Result<BulkTemps> {
    bulk_temps_raw(trap.omega, n_atoms, &Zetas::EXACT, T2dNorm::Zeta2)
}

fn ratios(trap: &TrapGeometry) -> (f64, f64) {
    let k = trap.k_f64();
    (k[1] / k[0], k[2] / k[0])
}

fn t3_correction(trap: &TrapGeometry, n_atoms: f64, c1: f64, zetas: &Zetas) -> Result<f64> {
    let (k2, k3) = ratios(trap);
    let (offset, aniso) = match trap.regime {
        Regime::Prolate | Regime::Isotropic => (1.0, k3),
        Regime::Maximal => (0.5, k2 * k3),
        Regime::Oblate => {
            return Err(Error::InapplicableFormula(
                "the three-dimensional crossover temperature is not defined for an oblate trap".into(),
            ))
        }
    };
    Ok((c1 - offset) / 3.0 * zetas.zeta2 / zetas.zeta3.powf(2.0 / 3.0) * (aniso / n_atoms).cbrt())
}

fn crossover_t3_z(trap: &TrapGeometry, n_atoms: f64, c1: f64, zetas: &Zetas) -> Result<f64> {
    check_n(n_atoms, 2.0)?;
    let correction = t3_correction(trap, n_atoms, c1, zetas)?;
    let t3d = bulk_temps_raw(trap.omega, n_atoms, zetas, T2dNorm::Zeta2)?.t3d;
    Ok(t3d * (1.0 + correction))
}

/// Finite-size onset of condensation out of the three-dimensional states.
///
/// Prolate/isotropic: `T₃D (1 + ((c₁−1)/3) ζ(2)/ζ(3)^{2/3} (k₃/N)^{1/3})`;
/// maximal: the same with `c₁ − 1/2` and `k₂k₃`.
pub fn crossover_t3(trap: &TrapGeometry, n_atoms: f64, c1: f64) -> Result<f64> {
    crossover_t3_z(trap, n_atoms, c1, &Zetas::EXACT)
}

fn crossover_t2_z(trap: &TrapGeometry, n_atoms: f64, c2: f64, mode: CrossoverMode, zetas: &Zetas, norm: T2dNorm) -> Result<Crossover> {
    check_n(n_atoms, 2.0)?;
    let prefactor = match trap.regime {
        Regime::Oblate => 1.0,
        Regime::Maximal => 5.0 / 8.0,
        r => {
            return Err(Error::InapplicableFormula(format!(
                "the two-dimensional crossover temperature is not defined for a {r} trap"
            )))
        }
    };
    let t2d = bulk_temps_raw(trap.omega, n_atoms, zetas, norm)?.t2d;
    match mode {
        CrossoverMode::ClosedForm => {
            if c2 != 1.0 {
                return Err(Error::InapplicableFormula(format!(
                    "the closed-form two-dimensional crossover assumes c2 = 1 (got {c2}); use full_solve"
                )));
            }
            let arg = n_atoms / (trap.kappa * zetas.zeta2);
            let warning = (arg <= 1.0).then(|| {
                format!("N/(kappa zeta(2)) = {arg:.4} <= 1: the logarithmic correction is unreliable")
            });
            let value = t2d * (1.0 + prefactor * (trap.kappa / (n_atoms * zetas.zeta2)).sqrt() * arg.ln());
            Ok(Crossover { value, warning })
        }
        CrossoverMode::FullSolve => {
            if !(c2 > 0.0) {
                return Err(Error::domain(format!("c2 must be > 0 for the full relation, got {c2}")));
            }
            let [_, w2, w3] = trap.omega;
            let z2 = zetas.zeta2;
            let f = |t: f64| -> f64 {
                match trap.regime {
                    Regime::Oblate => {
                        let a = 1.0 + c2;
                        z2 * t * t / (w2 * w2)
                            - t / w2 * (a + a * (t / (w2 * a)).ln() + 2.0 * (t / (w2 * c2)).ln())
                            - n_atoms
                    }
                    _ => {
                        let a = 0.5 + c2;
                        z2 * t * t / (w2 * w3) - t / w3 * (a + a * (t / (w2 * a)).ln() + (t / (w2 * c2)).ln())
                            - n_atoms
                    }
                }
            };
            let value = bracket_root(f, t2d)?;
            Ok(Crossover { value, warning: None })
        }
    }
}

/// Positive root of `f` nearest above/below `guess`, by expanding a bracket
/// geometrically and bisecting it to machine precision.
fn bracket_root(f: impl Fn(f64) -> f64, guess: f64) -> Result<f64> {
    let (mut lo, mut hi) = (guess, guess);
    let mut steps = 0;
    while f(lo) > 0.0 {
        lo *= 0.8;
        steps += 1;
        if steps > 200 {
            return Err(Error::Bracket("no sign change below the bulk temperature".into()));
        }
    }
    while f(hi) <= 0.0 {
        hi *= 1.25;
        steps += 1;
        if steps > 400 {
            return Err(Error::Bracket("no sign change above the bulk temperature".into()));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Two-dimensional crossover temperature (oblate and maximal traps).
///
/// Closed form: `T₂D (1 + p (κ/(Nζ(2)))^{1/2} ln(N/(κζ(2))))` with `p = 1`
/// (oblate) or `5/8` (maximal); a warning is attached when the logarithm's
/// argument is at most one. `FullSolve` finds the root of the relation
/// `ζ(2)T²/(ω₂ω₃) − (T/ω₃)[…] = N` instead and accepts any `c₂ > 0`.
pub fn crossover_t2(trap: &TrapGeometry, n_atoms: f64, c2: f64, mode: CrossoverMode) -> Result<Crossover> {
    crossover_t2_z(trap, n_atoms, c2, mode, &Zetas::EXACT, T2dNorm::Zeta2)
}

/// `T₁D* = Nω₃ / ln(2N/(1 + 2c₃))`.
pub fn crossover_t1(trap: &TrapGeometry, n_atoms: f64, c3: f64) -> Result<f64> {
    check_n(n_atoms, 1.0)?;
    let arg = 2.0 * n_atoms / (1.0 + 2.0 * c3);
    if !(arg > 1.0) {
        return Err(Error::domain(format!(
            "2N/(1 + 2 c3) = {arg} must exceed 1 for the one-dimensional crossover"
        )));
    }
    Ok(n_atoms * trap.omega[2] / arg.ln())
}

/// Bulk and crossover temperatures for a trap. Crossover formulas that do
/// not apply to the trap's regime are left out.
pub fn temperature_set(trap: &TrapGeometry, n_atoms: f64, opts: &TempOptions) -> Result<TemperatureSet> {
    let bulk = bulk_temps_raw(trap.omega, n_atoms, &opts.zetas, opts.t2d_norm)?;
    let [c1, c2, c3] = opts.c;
    let mut warnings = Vec::new();
    let t3d_star = match trap.regime {
        Regime::Oblate => None,
        _ => Some(crossover_t3_z(trap, n_atoms, c1, &opts.zetas)?),
    };
    let t2d_star = match trap.regime {
        Regime::Oblate | Regime::Maximal => {
            let x = crossover_t2_z(trap, n_atoms, c2, opts.mode, &opts.zetas, opts.t2d_norm)?;
            warnings.extend(x.warning);
            Some(x.value)
        }
        _ => None,
    };
    let t1d_star = Some(crossover_t1(trap, n_atoms, c3)?);
    Ok(TemperatureSet {
        t1d: bulk.t1d,
        t2d: bulk.t2d,
        t3d: bulk.t3d,
        t1d_star,
        t2d_star,
        t3d_star,
        c: opts.c,
        warnings,
    })
}

/// `ΔT/T₃D = (c₁/3) ζ(2)/ζ(3)^{2/3} (k₃/N)^{1/3}`.
#[allow(non_snake_case)]
pub fn delta_T_correction(trap: &TrapGeometry, n_atoms: f64, c1: f64) -> Result<f64> {
    check_n(n_atoms, 1.0)?;
    let (_, k3) = ratios(trap);
    Ok(c1 / 3.0 * Zetas::EXACT.zeta2 / Zetas::EXACT.zeta3.powf(2.0 / 3.0) * (k3 / n_atoms).cbrt())
}

/// Order-of-magnitude interaction shift `ΔT/T₃D ∼ (a/L) N^{1/6}`.
pub fn interaction_shift(a_over_l: f64, n_atoms: f64) -> Result<f64> {
    if !(a_over_l >= 0.0) {
        return Err(Error::domain(format!("a/L must be >= 0, got {a_over_l}")));
    }
    check_n(n_atoms, 1.0)?;
    Ok(a_over_l * n_atoms.powf(1.0 / 6.0))
}

/// Predicted condensation scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PhaseLabel {
    DirectBEC,
    TwoStep,
    TwoDimensionalBEC,
    ThreeStepReduction,
}

impl PhaseLabel {
    pub const ALL: [PhaseLabel; 4] = [
        PhaseLabel::DirectBEC,
        PhaseLabel::TwoStep,
        PhaseLabel::TwoDimensionalBEC,
        PhaseLabel::ThreeStepReduction,
    ];
}

impl std::fmt::Display for PhaseLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            PhaseLabel::DirectBEC => "DirectBEC",
            PhaseLabel::TwoStep => "TwoStep",
            PhaseLabel::TwoDimensionalBEC => "TwoDimensionalBEC",
            PhaseLabel::ThreeStepReduction => "ThreeStepReduction",
        };
        f.write_str(s)
    }
}

/// An inequality `lhs > rhs`, reported with its margin `lhs/rhs`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub holds: bool,
}

impl Condition {
    fn new(lhs: f64, rhs: f64) -> Self {
        Condition {
            lhs,
            rhs,
            margin: lhs / rhs,
            holds: lhs > rhs,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MultistepReport {
    /// `κ > Nζ(2)/(ln 2N)²` (`T₁D < T₂D`).
    pub cond_a: Condition,
    /// `k₃²/κ > Nζ(3)²/ζ(2)³` (`T₂D < T₃D`).
    pub cond_b: Condition,
    /// `k₃κ > N²/(ln 2N)³` (`T₁D < T₃D`).
    pub cond_c: Condition,
    /// `(N/(ln 2N)^{3/2}, N/ln 2N)`.
    pub two_step_window: (f64, f64),
    pub in_window: bool,
    /// `κ > Nζ(2)/(ln 2N)²`, identical to condition A.
    pub three_step_kappa: Condition,
    /// `k₃ > (ζ(3)/ζ(2)) N/ln 2N`.
    pub three_step_k3: Condition,
    /// `k₂k₃ > N/ζ(2)`: the two softest axes hold all particles below `ω₁`
    /// (for oblate traps `k₃ > (N/ζ(2))^{1/2}`).
    pub reduction_2d: Condition,
    pub predicted_label: PhaseLabel,
}

fn multistep_flags_z(trap: &TrapGeometry, n_atoms: f64, zetas: &Zetas) -> MultistepReport {
    let (k2, k3) = ratios(trap);
    let kappa = trap.kappa;
    let (z2, z3) = (zetas.zeta2, zetas.zeta3);
    let log2n = (2.0 * n_atoms).ln();

    let cond_a = Condition::new(kappa, n_atoms * z2 / (log2n * log2n));
    let cond_b = Condition::new(k3 * k3 / kappa, n_atoms * z3 * z3 / (z2 * z2 * z2));
    let cond_c = Condition::new(k3 * kappa, n_atoms * n_atoms / log2n.powi(3));
    let window = (n_atoms / log2n.powf(1.5), n_atoms / log2n);
    let in_window = window.0 < k3 && k3 < window.1;
    let three_step_k3 = Condition::new(k3, z3 / z2 * n_atoms / log2n);
    let reduction_2d = Condition::new(k2 * k3, n_atoms / z2);

    let predicted_label = match trap.regime {
        Regime::Isotropic => PhaseLabel::DirectBEC,
        Regime::Maximal if cond_a.holds && three_step_k3.holds => PhaseLabel::ThreeStepReduction,
        Regime::Oblate | Regime::Maximal if reduction_2d.holds => PhaseLabel::TwoDimensionalBEC,
        Regime::Prolate | Regime::Maximal if cond_c.holds && k3 < window.1 => PhaseLabel::TwoStep,
        _ => PhaseLabel::DirectBEC,
    };
    MultistepReport {
        cond_a,
        cond_b,
        cond_c,
        two_step_window: window,
        in_window,
        three_step_kappa: cond_a,
        three_step_k3,
        reduction_2d,
        predicted_label,
    }
}

/// Evaluates the multistep conditions for a trap and predicts the scenario.
///
/// Precedence of the label: isotropic traps condense directly; a maximal
/// trap meeting both three-step conditions reduces dimension twice; oblate
/// or maximal traps whose two soft axes can hold all particles become
/// two-dimensional; prolate or maximal traps with `T₁D < T₃D` and
/// `ω₁ < T₁D` condense in two steps; anything else condenses directly.
pub fn multistep_flags(trap: &TrapGeometry, n_atoms: f64) -> MultistepReport {
    multistep_flags_z(trap, n_atoms, &Zetas::EXACT)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub ratio12: f64,
    pub ratio23: f64,
    pub k2: u64,
    pub k3: u64,
    pub label: PhaseLabel,
    pub report: MultistepReport,
    pub warning: Option<String>,
}

/// Relative change of a frequency ratio under rounding above which
/// [`phase_point`] attaches a warning.
pub const PHASE_ROUNDING_TOL: f64 = 1e-6;

/// Classifies the trap `ω = (1, 1/k₂, 1/k₃)` with `k₂ = round(r₁₂)` and
/// `k₃ = round(r₁₂ r₂₃)`.
pub fn phase_point(ratio12: f64, ratio23: f64, n_atoms: f64, zeta_as_one: bool) -> Result<PhasePoint> {
    if !(ratio12 >= 1.0) || !(ratio23 >= 1.0) || !ratio12.is_finite() || !ratio23.is_finite() {
        return Err(Error::domain(format!(
            "frequency ratios must be >= 1, got ({ratio12}, {ratio23})"
        )));
    }
    check_n(n_atoms, 1.0)?;
    let k2 = ratio12.round();
    let k3 = (ratio12 * ratio23).round();
    let r12 = k2;
    let r23 = k3 / k2;
    let off = ((r12 - ratio12) / ratio12).abs().max(((r23 - ratio23) / ratio23).abs());
    let warning = (off > PHASE_ROUNDING_TOL).then(|| {
        format!("ratios ({ratio12}, {ratio23}) rounded to k2 = {k2}, k3 = {k3} (relative change {off:.2e})")
    });
    let trap = build_trap(1.0, 1.0 / k2, 1.0 / k3, 1e-9)?;
    let report = multistep_flags_z(&trap, n_atoms, &Zetas::select(zeta_as_one));
    Ok(PhasePoint {
        ratio12,
        ratio23,
        k2: k2 as u64,
        k3: k3 as u64,
        label: report.predicted_label,
        report,
        warning,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnisotropyRow {
    pub k3: f64,
    pub t1d: f64,
    pub t2d: f64,
    pub t3d: f64,
}

/// Bulk temperatures along `ω = (ω₁, ω₁/√k₃, ω₁/k₃)` (i.e. `k₂² = k₃`) for
/// log-spaced `k₃ ∈ [1, k3_max]`.
pub fn anisotropy_scan(omega1: f64, n_atoms: f64, k3_max: f64, points: usize, zetas: &Zetas, norm: T2dNorm) -> Result<Vec<AnisotropyRow>> {
    if !(k3_max >= 1.0) || points == 0 {
        return Err(Error::domain("scan needs k3_max >= 1 and at least one point"));
    }
    let last = (points.max(2) - 1) as f64;
    (0..points)
        .map(|i| {
            let k3 = if points == 1 { 1.0 } else { k3_max.powf(i as f64 / last) };
            let b = bulk_temps_raw([omega1, omega1 / k3.sqrt(), omega1 / k3], n_atoms, zetas, norm)?;
            Ok(AnisotropyRow {
                k3,
                t1d: b.t1d,
                t2d: b.t2d,
                t3d: b.t3d,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn trap(w: [f64; 3]) -> TrapGeometry {
        build_trap(w[0], w[1], w[2], 1e-9).unwrap()
    }

    #[test]
    fn bulk_examples() {
        let b = bulk_temps(&trap([0.1, 0.1, 0.1]), 1000.0).unwrap();
        assert!((b.t3d - 0.9406).abs() < 1e-3, "{}", b.t3d);
        let b = bulk_temps(&trap([0.3, 0.3, 0.0003]), 1e4).unwrap();
        assert!((b.t3d - 0.6079).abs() < 1e-4, "{}", b.t3d);
        let b = bulk_temps(&trap([0.3, 0.002, 0.002]), 1e3).unwrap();
        assert!((b.t2d - 0.04931).abs() < 1e-5, "{}", b.t2d);
        assert!(bulk_temps(&trap([0.1, 0.1, 0.1]), 1.5).is_err());
    }

    #[test]
    fn t2d_normalization_switch() {
        let t = trap([0.3, 0.002, 0.002]);
        let a = bulk_temps_raw(t.omega, 1e3, &Zetas::EXACT, T2dNorm::Zeta2).unwrap();
        let b = bulk_temps_raw(t.omega, 1e3, &Zetas::EXACT, T2dNorm::TwoZeta2).unwrap();
        assert_relative_eq!(a.t2d / b.t2d, 2f64.sqrt(), max_relative = 1e-14);
    }

    #[test]
    fn crossover_t3_examples() {
        let t = trap([0.3, 0.3, 0.0003]);
        let bulk = bulk_temps(&t, 1e4).unwrap();
        assert_eq!(crossover_t3(&t, 1e4, 1.0).unwrap(), bulk.t3d);
        let by_hand = bulk.t3d * (1.0 + (1.0 / 3.0) * 1.644_934_066_848_226_4 / 1.202_056_903_159_594_3f64.powf(2.0 / 3.0) * 0.1f64.cbrt());
        assert_relative_eq!(crossover_t3(&t, 1e4, 2.0).unwrap(), by_hand, max_relative = 1e-14);
        assert!((by_hand - 0.745).abs() < 1e-3);

        let fig6 = crossover_t3(&trap([0.3, 0.02, 0.0004]), 5000.0, 1.0).unwrap();
        assert!((fig6 - 0.284).abs() < 1e-3, "{fig6}");
        assert!(matches!(
            crossover_t3(&trap([0.3, 0.002, 0.002]), 1e3, 1.0),
            Err(Error::InapplicableFormula(_))
        ));
    }

    #[test]
    fn crossover_t2_examples() {
        let t = trap([0.3, 0.002, 0.002]);
        let x = crossover_t2(&t, 1e3, 1.0, CrossoverMode::ClosedForm).unwrap();
        assert!((x.value - 0.0571).abs() < 1e-4, "{}", x.value);
        assert!(x.warning.is_none());

        let fig6 = crossover_t2(&trap([0.3, 0.02, 0.0004]), 5000.0, 1.0, CrossoverMode::ClosedForm).unwrap();
        assert!((fig6.value - 0.187).abs() < 1e-3, "{}", fig6.value);

        // N = κ ζ(2): the correction vanishes and a warning is raised.
        let m = trap([0.3, 0.02, 0.01]);
        assert_eq!(m.kappa, 2.0);
        let n = Zetas::EXACT.zeta2 * 2.0;
        let x = crossover_t2(&m, n, 1.0, CrossoverMode::ClosedForm).unwrap();
        assert_relative_eq!(x.value, bulk_temps(&m, n).unwrap().t2d, max_relative = 1e-15);
        assert!(x.warning.is_some());

        assert!(matches!(
            crossover_t2(&trap([0.3, 0.3, 0.0003]), 1e4, 1.0, CrossoverMode::ClosedForm),
            Err(Error::InapplicableFormula(_))
        ));
        assert!(matches!(
            crossover_t2(&t, 1e3, 2.0, CrossoverMode::ClosedForm),
            Err(Error::InapplicableFormula(_))
        ));
    }

    #[test]
    fn full_solve_satisfies_relation() {
        let t = trap([0.3, 0.002, 0.002]);
        let full = crossover_t2(&t, 1e3, 1.0, CrossoverMode::FullSolve).unwrap().value;
        let w = 0.002;
        let lhs = Zetas::EXACT.zeta2 * full * full / (w * w)
            - full / w * (2.0 + 2.0 * (full / (2.0 * w)).ln() + 2.0 * (full / w).ln());
        assert_relative_eq!(lhs, 1e3, max_relative = 1e-9);
        // The closed form is the large-N limit of the same relation.
        let closed = crossover_t2(&t, 1e3, 1.0, CrossoverMode::ClosedForm).unwrap().value;
        assert!((full - closed).abs() / closed < 0.1, "{full} vs {closed}");
        let big_full = crossover_t2(&t, 1e7, 1.0, CrossoverMode::FullSolve).unwrap().value;
        let big_closed = crossover_t2(&t, 1e7, 1.0, CrossoverMode::ClosedForm).unwrap().value;
        assert!((big_full - big_closed).abs() / big_closed < 0.01, "{big_full} vs {big_closed}");

        let m = trap([0.3, 0.02, 0.0004]);
        assert!(crossover_t2(&m, 5000.0, 2.0, CrossoverMode::FullSolve).unwrap().value > 0.0);
    }

    #[test]
    fn crossover_t1_examples() {
        let t = trap([0.3, 0.3, 0.0003]);
        assert!((crossover_t1(&t, 1e4, 1.0).unwrap() - 0.3407).abs() < 1e-4);
        assert_eq!(crossover_t1(&t, 1e4, 0.0).unwrap(), bulk_temps(&t, 1e4).unwrap().t1d);
        let fig6 = crossover_t1(&trap([0.3, 0.02, 0.0004]), 5000.0, 1.0).unwrap();
        assert!((fig6 - 0.2466).abs() < 1e-4, "{fig6}");
        assert!(matches!(crossover_t1(&t, 1.0, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn temperature_set_per_regime() {
        let opts = TempOptions::default();
        let prolate = temperature_set(&trap([0.3, 0.3, 0.0003]), 1e4, &opts).unwrap();
        assert!(prolate.t2d_star.is_none() && prolate.t3d_star.is_some());
        let oblate = temperature_set(&trap([0.3, 0.002, 0.002]), 1e3, &opts).unwrap();
        assert!(oblate.t3d_star.is_none() && oblate.t2d_star.is_some());
        let maximal = temperature_set(&trap([0.3, 0.02, 0.0004]), 5000.0, &opts).unwrap();
        assert!(maximal.t1d_star.is_some() && maximal.t2d_star.is_some() && maximal.t3d_star.is_some());
    }

    #[test]
    fn multistep_examples() {
        let r = multistep_flags(&trap([0.3, 0.3, 0.0003]), 1e4);
        assert!((r.two_step_window.0 - 320.9).abs() < 0.1, "{:?}", r.two_step_window);
        assert!((r.two_step_window.1 - 1009.8).abs() < 0.1, "{:?}", r.two_step_window);
        assert!(r.in_window);
        assert_eq!(r.predicted_label, PhaseLabel::TwoStep);
        assert_eq!(r.cond_a.margin, r.cond_a.lhs / r.cond_a.rhs);

        assert_eq!(multistep_flags(&trap([0.1, 0.1, 0.1]), 1000.0).predicted_label, PhaseLabel::DirectBEC);

        let r = multistep_flags(&trap([0.3, 0.002, 0.002]), 1e3);
        assert!(r.reduction_2d.holds);
        assert_eq!(r.predicted_label, PhaseLabel::TwoDimensionalBEC);

        // Condition A fails for the maximal trap (κ = 50 against ≈ 97).
        let r = multistep_flags(&trap([0.3, 0.02, 0.0004]), 5000.0);
        assert!(!r.cond_a.holds);
        assert!((r.cond_a.rhs - 97.0).abs() < 1.0, "{}", r.cond_a.rhs);
    }

    #[test]
    fn delta_and_interaction() {
        let iso = trap([0.1, 0.1, 0.1]);
        let d1 = delta_T_correction(&iso, 1e4, 1.0).unwrap();
        assert!((d1 - 0.0225).abs() < 1e-4, "{d1}");
        let d3 = delta_T_correction(&trap([0.3, 0.3, 0.0003]), 1e4, 1.0).unwrap();
        assert!((d3 - 0.225).abs() < 1e-3, "{d3}");
        assert_eq!(delta_T_correction(&iso, 1e4, 0.0).unwrap(), 0.0);

        assert!((interaction_shift(0.001, 5000.0).unwrap() - 4.1e-3).abs() < 1e-4);
        assert_eq!(interaction_shift(0.0, 123.0).unwrap(), 0.0);
        assert_eq!(interaction_shift(0.001, 1.0).unwrap(), 0.001);
        assert!(interaction_shift(-1.0, 1.0).is_err());
    }

    #[test]
    fn phase_point_examples() {
        assert_eq!(phase_point(1.0, 1.0, 1e4, true).unwrap().label, PhaseLabel::DirectBEC);
        assert_eq!(phase_point(1.0, 1000.0, 1e4, true).unwrap().label, PhaseLabel::TwoStep);
        assert_eq!(phase_point(150.0, 1.0, 1e3, true).unwrap().label, PhaseLabel::TwoDimensionalBEC);
        assert_eq!(phase_point(10.0, 1000.0, 1e4, true).unwrap().label, PhaseLabel::ThreeStepReduction);

        let p = phase_point(1.5, 1.0, 1e4, true).unwrap();
        assert!(p.warning.is_some());
        assert!(phase_point(2.0, 3.0, 1e4, true).unwrap().warning.is_none());
        assert!(phase_point(0.5, 1.0, 1e4, true).is_err());
    }

    #[test]
    fn figure1_ordering_reversal() {
        let rows = anisotropy_scan(0.5, 1e4, 1e6, 7, &Zetas::EXACT, T2dNorm::Zeta2).unwrap();
        let first = rows[0];
        assert!(first.t3d < first.t2d && first.t2d < first.t1d);
        assert!((first.t3d - 10.1).abs() < 0.1 && (first.t2d - 39.0).abs() < 0.1 && (first.t1d - 505.0).abs() < 1.0);
        let last = rows[6];
        assert_relative_eq!(last.k3, 1e6, max_relative = 1e-12);
        assert!(last.t1d < last.t2d && last.t2d < last.t3d);
        assert!((last.t1d - 5.05e-4).abs() < 1e-6 && (last.t2d - 1.23e-3).abs() < 1e-5 && (last.t3d - 1.01e-2).abs() < 1e-4);
    }
}
