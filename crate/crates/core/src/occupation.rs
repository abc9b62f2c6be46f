//! Occupation numbers N₀..N₃ of the zero- to three-dimensionally excited
//! states, by three independent routes:
//!
//! * [`occupations_exact`]: the fugacity (`l`-indexed) resummation, where
//!   every geometric sum over the oscillator quanta is done in closed form;
//! * [`occupations_enumerated`]: brute-force summation of the Bose factor
//!   over a box of quantum numbers (the test oracle);
//! * [`occupations_asymptotic`]: the leading small-η expansions in terms of
//!   Bose–Einstein functions.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{bose_factor, bose_g_exp, SeriesControl};
use crate::trap::{classify_excitation, SplitRule, TrapGeometry};

/// Grand-canonical state point. `phi = (E₀ − μ)/T` is the reduced chemical
/// potential and `z = e^{-phi}` the fugacity measured from the ground state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermoPoint {
    pub temperature: f64,
    pub phi: f64,
    pub z: f64,
    pub eta: [f64; 3],
    pub n_target: Option<f64>,
}

impl ThermoPoint {
    pub fn new(trap: &TrapGeometry, temperature: f64, phi: f64) -> Result<Self> {
        if !(temperature > 0.0) || !temperature.is_finite() {
            return Err(Error::domain(format!("temperature must be > 0, got {temperature}")));
        }
        if !(phi > 0.0) {
            return Err(Error::domain(format!(
                "above condensation point: phi must be > 0, got {phi}"
            )));
        }
        Ok(ThermoPoint {
            temperature,
            phi,
            z: (-phi).exp(),
            eta: trap.eta(temperature),
            n_target: None,
        })
    }

    pub fn with_target(mut self, n: f64) -> Self {
        self.n_target = Some(n);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct OccupationSplit {
    pub n0: f64,
    pub n1: f64,
    pub n2: f64,
    pub n3: f64,
    pub total: f64,
}

impl OccupationSplit {
    pub fn from_parts(parts: [f64; 4]) -> Self {
        let [n0, n1, n2, n3] = parts;
        OccupationSplit {
            n0,
            n1,
            n2,
            n3,
            total: n0 + n1 + n2 + n3,
        }
    }

    pub fn components(&self) -> [f64; 4] {
        [self.n0, self.n1, self.n2, self.n3]
    }

    pub fn excited(&self) -> f64 {
        self.n1 + self.n2 + self.n3
    }
}

/// Per-dimension occupations from the resummed fugacity series.
///
/// For each `l ≥ 1` the sums over quantum numbers are geometric, e.g. for
/// the maximal split `N₃ = Σ_l zˡ e^{-lη₁} / Π(1 − e^{-lηᵢ})`. The series is
/// cut once the geometric tail bound `t_l q/(1−q)`, `q = e^{-(φ+η₃)}`, falls
/// below the tolerance.
pub fn occupations_exact(trap: &TrapGeometry, point: &ThermoPoint, ctrl: &SeriesControl) -> Result<OccupationSplit> {
    if !(point.phi > 0.0) {
        return Err(Error::domain("above condensation point: phi must be > 0"));
    }
    let rule = trap.split_rule();
    let [e1, e2, e3] = point.eta;
    let phi = point.phi;
    let q = (-(phi + e3)).exp();
    let tail_factor = q / (1.0 - q);

    let mut acc = [0.0f64; 3];
    let mut last = f64::INFINITY;
    for l in 1..=ctrl.max_terms {
        let lf = l as f64;
        let fug = (-lf * phi).exp();
        let b = [bose_factor(lf * e1), bose_factor(lf * e2), bose_factor(lf * e3)];
        let d = [1.0 + b[0], 1.0 + b[1], 1.0 + b[2]];
        let t = match rule {
            SplitRule::Maximal => [b[2], b[1] * d[2], b[0] * d[1] * d[2]],
            SplitRule::Prolate => [b[2], (b[0] + b[1]) * d[2], b[0] * b[1] * d[2]],
            SplitRule::Oblate => [b[1] + b[2], b[1] * b[2], b[0] * d[1] * d[2]],
        };
        let mut step = 0.0;
        for (a, ti) in acc.iter_mut().zip(t) {
            *a += fug * ti;
            step += fug * ti;
        }
        last = step;
        if step * tail_factor < ctrl.threshold(acc[0] + acc[1] + acc[2]) {
            return Ok(OccupationSplit::from_parts([bose_factor(phi), acc[0], acc[1], acc[2]]));
        }
    }
    Err(Error::Convergence {
        terms: ctrl.max_terms,
        bound: last * tail_factor,
    })
}

/// Default enumeration box: `ceil(40/ηᵢ)` quanta per axis, capped at 10⁴.
pub fn default_cutoffs(trap: &TrapGeometry, temperature: f64) -> [u64; 3] {
    trap.eta(temperature)
        .map(|e| ((40.0 / e).ceil() as u64).min(10_000))
}

/// Uncapped box `ceil(depth/ηᵢ)`: the neglected states beyond each face are
/// suppressed by at least `e^{-depth}` relative to the face.
pub fn cutoffs_with_depth(trap: &TrapGeometry, temperature: f64, depth: f64) -> [u64; 3] {
    trap.eta(temperature).map(|e| (depth / e).ceil() as u64)
}

/// Relative weight of the outermost shell above which an enumeration is
/// flagged as truncated.
pub const ENUMERATION_SHELL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnumeratedOccupation {
    pub split: OccupationSplit,
    /// Summed occupation of the states on the faces `nᵢ = cutoffᵢ` (axes
    /// with a zero cutoff are excluded).
    pub boundary_weight: f64,
    /// Set when the boundary weight exceeds [`ENUMERATION_SHELL_TOL`] of
    /// the total, i.e. the box is likely too small.
    pub truncated: bool,
}

/// `Σ_{n=1}^{last} 1/(e^{base + n·step} − 1)`, summed term by term.
///
/// Arguments below one use `exp_m1`; beyond that the exponential is
/// advanced by repeated multiplication in four interleaved lanes,
/// re-anchored with a fresh `exp` every block to bound the rounding drift.
fn row_sum(base: f64, step: f64, last: u64) -> f64 {
    const BLOCK: u64 = 512;
    let mut n = 1u64;
    let mut sum = 0.0;
    while n <= last && base + n as f64 * step < 1.0 {
        sum += bose_factor(base + n as f64 * step);
        n += 1;
    }
    let ratio = step.exp();
    let ratio4 = ratio * ratio * ratio * ratio;
    let mut acc = [0.0f64; 4];
    while n <= last {
        let x0 = (base + n as f64 * step).exp();
        if x0.is_infinite() {
            break;
        }
        let end = (n + BLOCK - 1).min(last);
        let mut x = [x0, x0 * ratio, x0 * ratio * ratio, x0 * ratio * ratio * ratio];
        while n + 3 <= end {
            for k in 0..4 {
                acc[k] += 1.0 / (x[k] - 1.0);
                x[k] *= ratio4;
            }
            n += 4;
        }
        // Lane 0 holds the exponential of index `n`.
        let mut xr = x[0];
        while n <= end {
            acc[0] += 1.0 / (xr - 1.0);
            xr *= ratio;
            n += 1;
        }
    }
    sum + (acc[0] + acc[1]) + (acc[2] + acc[3])
}

/// Brute-force occupations: every state in `[0, c₁]×[0, c₂]×[0, c₃]`
/// contributes `1/(e^{φ + Σ nᵢηᵢ} − 1)` to the bucket chosen by
/// [`classify_excitation`].
///
/// The lattice is split over `n₁` for parallel evaluation; the per-slab
/// partial sums are reduced in index order, so results do not depend on the
/// number of workers.
pub fn occupations_enumerated(trap: &TrapGeometry, point: &ThermoPoint, cutoff: [u64; 3]) -> Result<EnumeratedOccupation> {
    if !(point.phi > 0.0) {
        return Err(Error::domain("above condensation point: phi must be > 0"));
    }
    let rule = trap.split_rule();
    let [e1, e2, e3] = point.eta;
    let phi = point.phi;

    let slab = |n1: u64| -> ([f64; 4], f64) {
        let mut buckets = [0.0f64; 4];
        let mut boundary = 0.0;
        for n2 in 0..=cutoff[1] {
            let base = phi + n1 as f64 * e1 + n2 as f64 * e2;
            let first = classify_excitation(rule, [n1, n2, 0]) as usize;
            let rest = classify_excitation(rule, [n1, n2, 1]) as usize;
            let head = bose_factor(base);
            let tail = row_sum(base, e3, cutoff[2]);
            buckets[first] += head;
            buckets[rest] += tail;
            let on_face = (cutoff[0] > 0 && n1 == cutoff[0]) || (cutoff[1] > 0 && n2 == cutoff[1]);
            if on_face {
                boundary += head + tail;
            } else if cutoff[2] > 0 {
                boundary += bose_factor(base + cutoff[2] as f64 * e3);
            }
        }
        (buckets, boundary)
    };

    let slabs: Vec<([f64; 4], f64)> = (0..=cutoff[0]).into_par_iter().map(slab).collect();
    let mut buckets = [0.0f64; 4];
    let mut boundary_weight = 0.0;
    for (b, w) in slabs {
        for i in 0..4 {
            buckets[i] += b[i];
        }
        boundary_weight += w;
    }
    let split = OccupationSplit::from_parts(buckets);
    Ok(EnumeratedOccupation {
        split,
        boundary_weight,
        truncated: boundary_weight > ENUMERATION_SHELL_TOL * split.total.max(1.0),
    })
}

/// Leading-order closed forms in Bose–Einstein functions with their first
/// correction terms. Only meaningful for small `η₂, η₃`; components may
/// come out negative far outside that range.
///
/// Fails when a shifted fugacity reaches one (e.g. nearly isotropic traps
/// at small `φ`), where the expansion has no meaning.
pub fn occupations_asymptotic(trap: &TrapGeometry, point: &ThermoPoint, ctrl: &SeriesControl) -> Result<OccupationSplit> {
    if !(point.phi > 0.0) {
        return Err(Error::domain("above condensation point: phi must be > 0"));
    }
    let [e1, e2, e3] = point.eta;
    let phi = point.phi;
    let g = |p: u32, shift: f64| bose_g_exp(p, phi + shift, ctrl);
    let n0 = bose_factor(phi);

    let (n1, n2, n3) = match trap.split_rule() {
        SplitRule::Prolate => {
            let k3 = trap.k[2] as f64 / trap.k[0] as f64;
            let s2 = (e1 - e3) / 2.0;
            let s3 = e1 - e3 / 2.0;
            (
                g(1, e3 / 2.0)? / e3,
                2.0 * g(2, s2)? / (e1 * e3) - k3 * g(0, s2)? / 12.0,
                g(3, s3)? / (e1 * e1 * e3) - g(1, s3)? / (12.0 * e3),
            )
        }
        SplitRule::Oblate => {
            let s3 = e1 / 2.0 - e2;
            (
                2.0 * g(1, e2 / 2.0)? / e2,
                g(2, e2)? / (e2 * e2),
                g(3, s3)? / (e1 * e2 * e2) - g(1, s3)? / 24.0 * (e1 * e1 + 2.0 * e2 * e2) / (e1 * e2 * e2),
            )
        }
        SplitRule::Maximal => {
            let prod = e1 * e2 * e3;
            let s3 = (e1 - e2 - e3) / 2.0;
            (
                g(1, e3 / 2.0)? / e3,
                g(2, e2 / 2.0)? / (e2 * e3) - trap.kappa * g(0, e2 / 2.0)? / 24.0,
                g(3, s3)? / prod - g(1, s3)? / 24.0 * (e1 * e1 + e2 * e2 + e3 * e3) / prod,
            )
        }
    };
    Ok(OccupationSplit::from_parts([n0, n1, n2, n3]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trap::{build_trap, IsotropicSplit};

    fn trap(w: [f64; 3]) -> TrapGeometry {
        build_trap(w[0], w[1], w[2], 1e-9).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn ground_state_only() {
        let t = trap([0.3, 0.02, 0.0004]);
        let p = ThermoPoint::new(&t, 0.1, 2f64.ln()).unwrap();
        let ex = occupations_exact(&t, &p, &SeriesControl::default()).unwrap();
        assert!((ex.n0 - 1.0).abs() < 1e-15);
        let en = occupations_enumerated(&t, &p, [0, 0, 0]).unwrap();
        assert!((en.split.n0 - 1.0).abs() < 1e-15);
        assert_eq!(en.split.excited(), 0.0);
        assert!(!en.truncated);
    }

    #[test]
    fn dilute_limit() {
        let t = trap([0.3, 0.3, 0.0003]);
        // The soft axis contributes roughly e^-phi / eta3, so phi must
        // outgrow ln(1/eta3) before every component is negligible.
        let p = ThermoPoint::new(&t, 0.5, 60.0).unwrap();
        let ex = occupations_exact(&t, &p, &SeriesControl::default()).unwrap();
        for c in ex.components() {
            assert!(c < 1e-20, "{c}");
        }
        let p = ThermoPoint::new(&t, 0.5, 50.0).unwrap();
        let ex = occupations_exact(&t, &p, &SeriesControl::default()).unwrap();
        // Boltzmann limit: e^-phi * (prod_i 1/(1 - e^-eta_i) - 1).
        let prod: f64 = p.eta.iter().map(|e| 1.0 / -(-e).exp_m1()).product();
        let boltzmann = (-50.0f64).exp() * (prod - 1.0);
        approx::assert_relative_eq!(ex.excited(), boltzmann, max_relative = 1e-9);
    }

    #[test]
    fn rejects_nonpositive_phi() {
        let t = trap([0.1, 0.1, 0.1]);
        assert!(ThermoPoint::new(&t, 1.0, 0.0).is_err());
        let mut p = ThermoPoint::new(&t, 1.0, 0.1).unwrap();
        p.phi = -1.0;
        assert!(occupations_exact(&t, &p, &SeriesControl::default()).is_err());
    }

    #[test]
    fn convergence_error_reports_bound() {
        let t = trap([0.3, 0.3, 0.0003]);
        let p = ThermoPoint::new(&t, 0.5, 1e-4).unwrap();
        let ctrl = SeriesControl::new(1e-12, 1e-15, 10).unwrap();
        match occupations_exact(&t, &p, &ctrl) {
            Err(Error::Convergence { terms, bound }) => {
                assert_eq!(terms, 10);
                assert!(bound > 0.0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn prolate_matches_enumeration() {
        let t = trap([0.3, 0.3, 0.0003]);
        let p = ThermoPoint::new(&t, 0.5, 0.01).unwrap();
        let ex = occupations_exact(&t, &p, &SeriesControl::default()).unwrap();
        let en = occupations_enumerated(&t, &p, [60, 60, 50_000]).unwrap();
        for (a, b) in ex.components().iter().zip(en.split.components()) {
            assert!(close(*a, b, 1e-6), "{a} vs {b}");
        }
    }

    #[test]
    fn oblate_matches_enumeration() {
        let t = trap([0.3, 0.002, 0.002]);
        let p = ThermoPoint::new(&t, 0.05, 0.05).unwrap();
        let ex = occupations_exact(&t, &p, &SeriesControl::default()).unwrap();
        let en = occupations_enumerated(&t, &p, [20, 2000, 2000]).unwrap();
        for (a, b) in ex.components().iter().zip(en.split.components()) {
            assert!(close(*a, b, 1e-5), "{a} vs {b}");
        }
    }

    #[test]
    fn isotropic_conventions_share_the_total() {
        let base = trap([0.1, 0.1, 0.1]);
        let sym = base.with_isotropic_split(IsotropicSplit::Symmetric);
        let p = ThermoPoint::new(&base, 1.0, 0.1).unwrap();
        let c = SeriesControl::default();
        let a = occupations_exact(&base, &p, &c).unwrap();
        let b = occupations_exact(&sym, &p, &c).unwrap();
        assert!(close(a.total, b.total, 1e-12));
        assert!((a.n1 - b.n1).abs() < 1e-9 * a.total);
        assert!(a.n2 != b.n2);
    }

    #[test]
    fn prolate_factor_two_symmetry() {
        let t = trap([0.3, 0.3, 0.0003]);
        let p = ThermoPoint::new(&t, 0.4, 0.2).unwrap();
        let [e1, e2, e3] = p.eta;
        // Sum over (n1>=1, n2=0) and (n1=0, n2>=1) separately.
        let mut a = 0.0;
        let mut b = 0.0;
        for m in 1..200u64 {
            for n3 in 0..40_000u64 {
                a += 1.0 / (p.phi + m as f64 * e1 + n3 as f64 * e3).exp_m1();
                b += 1.0 / (p.phi + m as f64 * e2 + n3 as f64 * e3).exp_m1();
            }
        }
        assert!((a - b).abs() <= 1e-12 * a);
    }

    #[test]
    fn asymptotic_n1_prolate() {
        let t = trap([0.3, 0.3, 0.0003]);
        let c = SeriesControl::default();
        let p = ThermoPoint::new(&t, 0.5, 0.05).unwrap();
        let ex = occupations_exact(&t, &p, &c).unwrap();
        let asy = occupations_asymptotic(&t, &p, &c).unwrap();
        assert!(((asy.n1 - ex.n1) / ex.n1).abs() < 0.01);

        let p = ThermoPoint::new(&t, 0.5, 2f64.ln()).unwrap();
        let asy = occupations_asymptotic(&t, &p, &c).unwrap();
        assert_eq!(asy.n0, occupations_exact(&t, &p, &c).unwrap().n0);
    }

    #[test]
    fn asymptotic_n2_maximal() {
        let t = trap([0.3, 0.02, 0.0004]);
        let c = SeriesControl::default();
        let p = ThermoPoint::new(&t, 0.1, 0.02).unwrap();
        let ex = occupations_exact(&t, &p, &c).unwrap();
        let asy = occupations_asymptotic(&t, &p, &c).unwrap();
        assert!(((asy.n2 - ex.n2) / ex.n2).abs() < 0.02, "{} vs {}", asy.n2, ex.n2);
    }

    #[test]
    fn asymptotic_rejects_shift_past_one() {
        let t = trap([0.1, 0.1, 0.1]);
        let p = ThermoPoint::new(&t, 1.0, 0.01).unwrap();
        assert!(occupations_asymptotic(&t, &p, &SeriesControl::default()).is_err());
    }
}
