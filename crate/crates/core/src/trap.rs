//! Anisotropic harmonic trap: commensurability integers, level
//! decomposition, and the effective infrared dimension.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default relative tolerance for accepting `ω₁/ωᵢ` as an integer.
pub const DEFAULT_COMMENSURABILITY_TOL: f64 = 1e-9;

/// Shape class of the trap, decided by the commensurability integers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    /// `k₁ = k₂ = k₃`
    Isotropic,
    /// `k₁ = k₂ < k₃` (cigar)
    Prolate,
    /// `k₁ < k₂ = k₃` (pancake)
    Oblate,
    /// `k₁ < k₂ < k₃`
    Maximal,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Regime::Isotropic => "isotropic",
            Regime::Prolate => "prolate",
            Regime::Oblate => "oblate",
            Regime::Maximal => "maximal",
        };
        f.write_str(s)
    }
}

/// Summation-domain convention used to split the spectrum into
/// zero-, one-, two- and three-dimensional excitations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SplitRule {
    Prolate,
    Oblate,
    Maximal,
}

impl From<Regime> for SplitRule {
    /// Isotropic traps default to the maximal rule.
    fn from(regime: Regime) -> Self {
        match regime {
            Regime::Prolate => SplitRule::Prolate,
            Regime::Oblate => SplitRule::Oblate,
            Regime::Maximal | Regime::Isotropic => SplitRule::Maximal,
        }
    }
}

/// How an isotropic trap's spectrum is split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IsotropicSplit {
    /// Axes treated as ordered; same domains as the maximal trap.
    #[default]
    Maximal,
    /// First two axes treated symmetrically; same domains as the prolate trap.
    Symmetric,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrapGeometry {
    /// Frequencies ordered `ω₁ ≥ ω₂ ≥ ω₃ > 0`.
    pub omega: [f64; 3],
    /// Commensurability integers, `kᵢ ωᵢ = ω`.
    pub k: [u64; 3],
    pub omega_common: f64,
    /// Geometric mean `(ω₁ω₂ω₃)^{1/3}`.
    pub omega_geo: f64,
    /// `k₃ / k₂`.
    pub kappa: f64,
    /// Ground-state energy `(ω₁ + ω₂ + ω₃) / 2`.
    pub e0: f64,
    pub regime: Regime,
    pub isotropic_split: IsotropicSplit,
}

impl TrapGeometry {
    pub fn split_rule(&self) -> SplitRule {
        match (self.regime, self.isotropic_split) {
            (Regime::Isotropic, IsotropicSplit::Symmetric) => SplitRule::Prolate,
            (regime, _) => regime.into(),
        }
    }

    pub fn with_isotropic_split(mut self, split: IsotropicSplit) -> Self {
        self.isotropic_split = split;
        self
    }

    /// `ηᵢ = ωᵢ / T`.
    pub fn eta(&self, temperature: f64) -> [f64; 3] {
        self.omega.map(|w| w / temperature)
    }

    pub fn k_f64(&self) -> [f64; 3] {
        self.k.map(|k| k as f64)
    }
}

/// Builds a trap from three frequencies given in any order.
pub fn build_trap(omega1: f64, omega2: f64, omega3: f64, commensurability_tol: f64) -> Result<TrapGeometry> {
    let mut omega = [omega1, omega2, omega3];
    for (i, &w) in omega.iter().enumerate() {
        if !w.is_finite() || w <= 0.0 {
            return Err(Error::domain(format!(
                "omega{} must be a positive finite frequency, got {w}",
                i + 1
            )));
        }
    }
    if !(commensurability_tol >= 0.0) {
        return Err(Error::domain("commensurability tolerance must be >= 0"));
    }
    omega.sort_by(|a, b| b.total_cmp(a));

    let mut k = [1u64; 3];
    for axis in 1..3 {
        let ratio = omega[0] / omega[axis];
        let rounded = ratio.round();
        if (ratio - rounded).abs() > commensurability_tol * ratio || rounded > u64::MAX as f64 {
            return Err(Error::Commensurability {
                axis: axis + 1,
                ratio,
                tol: commensurability_tol,
            });
        }
        k[axis] = rounded as u64;
    }

    let regime = match (k[0] == k[1], k[1] == k[2]) {
        (true, true) => Regime::Isotropic,
        (true, false) => Regime::Prolate,
        (false, true) => Regime::Oblate,
        (false, false) => Regime::Maximal,
    };

    Ok(TrapGeometry {
        omega,
        k,
        omega_common: omega[0] * k[0] as f64,
        omega_geo: (omega[0] * omega[1] * omega[2]).cbrt(),
        kappa: k[2] as f64 / k[1] as f64,
        e0: 0.5 * (omega[0] + omega[1] + omega[2]),
        regime,
        isotropic_split: IsotropicSplit::default(),
    })
}

/// `nᵢ = kᵢνᵢ + λᵢ` with `0 ≤ λᵢ < kᵢ`, and `M = ν₁ + ν₂ + ν₃`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LevelDecomposition {
    pub m: u64,
    pub nu: [u64; 3],
    pub lambda: [u64; 3],
}

/// `E_n = Σ ωᵢ (nᵢ + ½)`.
pub fn energy_level(trap: &TrapGeometry, n: [u64; 3]) -> f64 {
    trap.omega
        .iter()
        .zip(n)
        .map(|(w, ni)| w * (ni as f64 + 0.5))
        .sum()
}

pub fn decompose(trap: &TrapGeometry, n: [u64; 3]) -> LevelDecomposition {
    let mut nu = [0; 3];
    let mut lambda = [0; 3];
    for i in 0..3 {
        nu[i] = n[i] / trap.k[i];
        lambda[i] = n[i] % trap.k[i];
    }
    LevelDecomposition {
        m: nu.iter().sum(),
        nu,
        lambda,
    }
}

/// `ω M + Σ ωᵢ λᵢ + E₀`.
pub fn energy_from_decomposition(trap: &TrapGeometry, d: &LevelDecomposition) -> f64 {
    let shift: f64 = trap
        .omega
        .iter()
        .zip(d.lambda)
        .map(|(w, l)| w * l as f64)
        .sum();
    trap.omega_common * d.m as f64 + shift + trap.e0
}

/// Eigenvalue in the many-boson (isotropic-cluster) form
/// `ω (M + 3/2) − ½ Σ ωᵢ (kᵢ − 2λᵢ − 1)`.
pub fn energy_cluster_form(trap: &TrapGeometry, d: &LevelDecomposition) -> f64 {
    let offset: f64 = (0..3)
        .map(|i| trap.omega[i] * (trap.k[i] as f64 - 2.0 * d.lambda[i] as f64 - 1.0))
        .sum();
    trap.omega_common * (d.m as f64 + 1.5) - 0.5 * offset
}

/// Effective infrared dimension: the number of axes with `ωᵢ/T < 1`.
pub fn eird(trap: &TrapGeometry, temperature: f64) -> Result<u8> {
    if !(temperature > 0.0) || !temperature.is_finite() {
        return Err(Error::domain(format!("temperature must be > 0, got {temperature}")));
    }
    Ok(trap.eta(temperature).iter().filter(|&&e| e < 1.0).count() as u8)
}

/// Which excitation class (0..=3) the state `n` belongs to.
pub fn classify_excitation(rule: SplitRule, n: [u64; 3]) -> u8 {
    let [a, b, c] = n.map(|x| x >= 1);
    match rule {
        SplitRule::Prolate => match (a, b) {
            (true, true) => 3,
            (true, false) | (false, true) => 2,
            (false, false) => u8::from(c),
        },
        SplitRule::Oblate => {
            if a {
                3
            } else if b && c {
                2
            } else {
                u8::from(b || c)
            }
        }
        SplitRule::Maximal => {
            if a {
                3
            } else if b {
                2
            } else {
                u8::from(c)
            }
        }
    }
}
