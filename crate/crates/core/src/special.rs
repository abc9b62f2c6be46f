//! Bose–Einstein functions and geometric-series identities.
//!
//! `g_p(z) = Σ_{n≥1} zⁿ / nᵖ` for integer `p ≥ 0` and real `z ∈ [0, 1)`,
//! plus the closed forms of the geometric moment sums that the occupation
//! series are built from.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// ζ(2) = π²/6.
pub const ZETA2: f64 = PI * PI / 6.0;
/// ζ(3), Apéry's constant.
pub const ZETA3: f64 = 1.202_056_903_159_594_3;

/// Below this value of `α = -ln z` the polylogarithm is evaluated from its
/// expansion in `α` instead of the defining power series.
const NEAR_ONE_ALPHA: f64 = 1.0;

/// Truncation control for the infinite sums.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesControl {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_terms: usize,
}

impl Default for SeriesControl {
    fn default() -> Self {
        SeriesControl {
            rel_tol: 1e-12,
            abs_tol: 1e-15,
            max_terms: 1_000_000,
        }
    }
}

impl SeriesControl {
    pub fn new(rel_tol: f64, abs_tol: f64, max_terms: usize) -> Result<Self> {
        let ctrl = SeriesControl {
            rel_tol,
            abs_tol,
            max_terms,
        };
        ctrl.validate()?;
        Ok(ctrl)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || !(self.abs_tol > 0.0) {
            return Err(Error::domain("series tolerances must be positive"));
        }
        if self.max_terms == 0 {
            return Err(Error::domain("max_terms must be at least 1"));
        }
        Ok(())
    }

    /// Tolerance a truncated tail must fall below, given the partial sum.
    #[inline]
    pub fn threshold(&self, partial: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * partial.abs())
    }
}

/// Values substituted for ζ(2) and ζ(3) in the temperature formulas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Zetas {
    pub zeta2: f64,
    pub zeta3: f64,
}

impl Zetas {
    pub const EXACT: Zetas = Zetas {
        zeta2: ZETA2,
        zeta3: ZETA3,
    };
    /// Both constants replaced by one, the crude setting used for
    /// order-of-magnitude phase diagrams.
    pub const UNITY: Zetas = Zetas {
        zeta2: 1.0,
        zeta3: 1.0,
    };

    pub fn select(zeta_as_one: bool) -> Zetas {
        if zeta_as_one {
            Zetas::UNITY
        } else {
            Zetas::EXACT
        }
    }
}

impl Default for Zetas {
    fn default() -> Self {
        Zetas::EXACT
    }
}

/// `e^{-x} / (1 - e^{-x}) = 1 / (eˣ - 1)`, accurate for small `x`.
#[inline]
pub fn bose_factor(x: f64) -> f64 {
    1.0 / x.exp_m1()
}

/// `1 - e^{-x}` without cancellation.
#[inline]
pub fn one_minus_exp_neg(x: f64) -> f64 {
    -(-x).exp_m1()
}

/// Bose–Einstein function `g_p(z)`.
///
/// `p = 0` and `p = 1` use the closed forms `z/(1-z)` and `-ln(1-z)`.
/// For `p ≥ 2` the power series is summed directly when `z ≤ e^{-1}`;
/// closer to one the expansion in `α = -ln z` (convergent for `α < 2π`)
/// is used so that the result stays accurate as `z → 1`.
pub fn bose_g(p: u32, z: f64, ctrl: &SeriesControl) -> Result<f64> {
    if !z.is_finite() || z < 0.0 {
        return Err(Error::domain(format!("fugacity {z} must be a finite value >= 0")));
    }
    if z >= 1.0 {
        return Err(Error::domain(format!(
            "fugacity at or above condensation point (z = {z})"
        )));
    }
    if z == 0.0 {
        return Ok(0.0);
    }
    match p {
        0 => Ok(z / (1.0 - z)),
        1 => Ok(-(-z).ln_1p()),
        _ => {
            let alpha = -z.ln();
            if alpha < NEAR_ONE_ALPHA {
                Ok(polylog_alpha_series(p, alpha))
            } else {
                polylog_power_series(p, z, ctrl)
            }
        }
    }
}

/// `g_p(e^{-α})` for `α > 0`, i.e. the same function parameterised by the
/// reduced chemical potential.
pub fn bose_g_exp(p: u32, alpha: f64, ctrl: &SeriesControl) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::domain(format!(
            "fugacity at or above condensation point (alpha = {alpha})"
        )));
    }
    match p {
        0 => Ok(bose_factor(alpha)),
        1 => Ok(-one_minus_exp_neg(alpha).ln()),
        _ if alpha < NEAR_ONE_ALPHA => Ok(polylog_alpha_series(p, alpha)),
        _ => polylog_power_series(p, (-alpha).exp(), ctrl),
    }
}

fn polylog_power_series(p: u32, z: f64, ctrl: &SeriesControl) -> Result<f64> {
    // Term ratio is bounded by z, so the tail after term t is below t·z/(1-z).
    let tail_factor = z / (1.0 - z);
    let mut sum = 0.0;
    let mut zn = 1.0;
    for n in 1..=ctrl.max_terms {
        zn *= z;
        let term = zn / (n as f64).powi(p as i32);
        sum += term;
        if term * tail_factor < ctrl.threshold(sum) {
            return Ok(sum);
        }
    }
    Err(Error::Convergence {
        terms: ctrl.max_terms,
        bound: zn / (ctrl.max_terms as f64).powi(p as i32) * tail_factor,
    })
}

/// Expansion of `Li_p(e^{-α})` about `α = 0` for integer `p ≥ 2`:
/// `Σ_{k≠p-1} ζ(p-k)(-α)^k/k! + (-α)^{p-1}/(p-1)! · (H_{p-1} - ln α)`.
fn polylog_alpha_series(p: u32, alpha: f64) -> f64 {
    let p = p as i32;
    let ln_alpha = alpha.ln();
    let two_pi = 2.0 * PI;
    let mut sum = 0.0;
    // (-α)^k / k!
    let mut power = 1.0;
    for k in 0..400 {
        if k > 0 {
            power *= -alpha / k as f64;
        }
        let term = if k == p - 1 {
            power * (harmonic(p - 1) - ln_alpha)
        } else {
            power * zeta_int(p - k)
        };
        sum += term;
        if k > p + 1 {
            // |ζ(1-2m)| α^k / k! <= 2 α^k (2π)^{p-1-k} for α < 2π.
            let bound = 2.0 * (alpha / two_pi).powi(k) * two_pi.powi(p - 1);
            if bound < 1e-17 * sum.abs() {
                break;
            }
        }
    }
    sum
}

fn harmonic(n: i32) -> f64 {
    (1..=n).map(|k| 1.0 / k as f64).sum()
}

/// Riemann zeta at an integer argument other than one.
pub fn zeta_int(s: i32) -> f64 {
    match s {
        1 => f64::INFINITY,
        2 => ZETA2,
        3 => ZETA3,
        0 => -0.5,
        s if s > 3 => zeta_euler_maclaurin(s as f64),
        s => {
            let n = -s;
            if n % 2 == 0 {
                0.0
            } else {
                // ζ(1-2m) = (-1)^m 2 (2m-1)! ζ(2m) / (2π)^{2m}
                let m = (n + 1) / 2;
                let two_m = 2 * m;
                let mut value = 2.0 * zeta_int(two_m);
                for j in 1..two_m {
                    value *= j as f64 / (2.0 * PI);
                }
                value /= 2.0 * PI;
                if m % 2 == 1 {
                    -value
                } else {
                    value
                }
            }
        }
    }
}

fn zeta_euler_maclaurin(s: f64) -> f64 {
    const N: f64 = 30.0;
    let head: f64 = (1..30).map(|n| (n as f64).powf(-s)).sum();
    let n_s = N.powf(-s);
    head + N * n_s / (s - 1.0) + 0.5 * n_s + s * n_s / (12.0 * N)
        - s * (s + 1.0) * (s + 2.0) * n_s / (720.0 * N.powi(3))
        + s * (s + 1.0) * (s + 2.0) * (s + 3.0) * (s + 4.0) * n_s / (30240.0 * N.powi(5))
}

/// Leading small-`α` behaviour of `g_3(e^{-α})` and `g_2(e^{-α})`:
///
/// * `g₃ ≈ ζ(3) − ζ(2)α + ½(3/2 − ln α)α²`
/// * `g₂ ≈ ζ(2) + (ln α − 1)α`
///
/// Returned exactly as truncated; callers decide when it is adequate.
pub fn bose_g_near_one(p: u32, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::domain(format!("alpha must be > 0, got {alpha}")));
    }
    let ln_a = alpha.ln();
    match p {
        3 => Ok(ZETA3 - ZETA2 * alpha + 0.5 * (1.5 - ln_a) * alpha * alpha),
        2 => Ok(ZETA2 + (ln_a - 1.0) * alpha),
        _ => Err(Error::UnsupportedOrder(p)),
    }
}

/// Closed form of `Σ_M M^r e^{-Mη}` for `r ∈ {0, 1, 2}` (the `r = 0` sum
/// starts at `M = 0`, the others at `M = 1`).
pub fn geometric_moment_sum(r: u32, eta: f64) -> Result<f64> {
    if !(eta > 0.0) {
        return Err(Error::domain(format!(
            "geometric sum diverges for eta = {eta}"
        )));
    }
    let q = (-eta).exp();
    let d = one_minus_exp_neg(eta);
    match r {
        0 => Ok(1.0 / d),
        1 => Ok(q / (d * d)),
        2 => Ok(q * (1.0 + q) / (d * d * d)),
        _ => Err(Error::UnsupportedOrder(r)),
    }
}

/// Small-`η` expansion of `e^{-η}/(1 - e^{-η})`:
/// order 1 is `e^{-η/2}/η`, order 2 adds `-η e^{-η/2}/24`.
///
/// Accuracy degrades once `η` is of order one; no error is raised for that.
pub fn small_eta_expansion(eta: f64, order: u32) -> Result<f64> {
    if !(eta > 0.0) {
        return Err(Error::domain(format!("eta must be > 0, got {eta}")));
    }
    let half = (-0.5 * eta).exp();
    match order {
        1 => Ok(half / eta),
        2 => Ok(half / eta - eta * half / 24.0),
        _ => Err(Error::UnsupportedOrder(order)),
    }
}

/// `e^{-kη} / ((1 - e^{-kη})(1 - e^{-η}))`.
pub fn pair_product(k: f64, eta: f64) -> f64 {
    bose_factor(k * eta) / one_minus_exp_neg(eta)
}

/// Two-term small-`η` expansion of [`pair_product`]:
/// `e^{-(k-1)η/2}/(kη²) - (k + 1/k) e^{-(k-1)η/2}/24`.
pub fn pair_product_expansion(k: f64, eta: f64) -> f64 {
    let shift = (-(k - 1.0) * eta / 2.0).exp();
    shift / (k * eta * eta) - (k + 1.0 / k) * shift / 24.0
}

/// `e^{-η₁} / ((1 - e^{-η₁})(1 - e^{-η₂})(1 - e^{-η₃}))`.
pub fn triple_product(eta: [f64; 3]) -> f64 {
    bose_factor(eta[0]) / (one_minus_exp_neg(eta[1]) * one_minus_exp_neg(eta[2]))
}

/// Two-term small-`η` expansion of [`triple_product`].
pub fn triple_product_expansion(eta: [f64; 3]) -> f64 {
    let [a, b, c] = eta;
    let shift = (-(a - b - c) / 2.0).exp();
    let prod = a * b * c;
    shift / prod - shift / 24.0 * (a * a + b * b + c * c) / prod
}
