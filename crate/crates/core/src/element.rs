//! Reactive elements, angular frequency and the T-model of a coupled coil pair.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{positive, Error, Result};

/// Angular frequency in rad/s.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Frequency(f64);

impl Frequency {
    pub fn new(rad_per_s: f64) -> Result<Self> {
        positive("angular frequency", rad_per_s).map(Self)
    }

    pub fn from_hz(hz: f64) -> Result<Self> {
        positive("frequency", hz).and_then(|f| Self::new(2.0 * PI * f))
    }

    #[inline]
    pub fn rad_per_s(self) -> f64 {
        self.0
    }

    #[inline]
    pub fn hz(self) -> f64 {
        self.0 / (2.0 * PI)
    }

    /// Scales the frequency by a positive factor.
    pub fn scaled(self, factor: f64) -> Result<Self> {
        Self::new(self.0 * factor)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ElementKind {
    Inductor,
    Capacitor,
}

/// A single ideal inductor (henries) or capacitor (farads).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReactiveElement {
    kind: ElementKind,
    value: f64,
}

impl ReactiveElement {
    pub fn inductor(henries: f64) -> Result<Self> {
        Ok(Self {
            kind: ElementKind::Inductor,
            value: positive("inductance", henries)?,
        })
    }

    pub fn capacitor(farads: f64) -> Result<Self> {
        Ok(Self {
            kind: ElementKind::Capacitor,
            value: positive("capacitance", farads)?,
        })
    }

    /// The element that presents reactance `x` (ohms, non-zero) at `omega`.
    pub fn with_reactance(x: f64, omega: Frequency) -> Result<Self> {
        let w = omega.rad_per_s();
        if !x.is_finite() || x == 0.0 {
            return Err(Error::InvalidParameter {
                name: "reactance",
                value: x,
                reason: "must be finite and non-zero",
            });
        }
        if x > 0.0 {
            Self::inductor(x / w)
        } else {
            Self::capacitor(-1.0 / (w * x))
        }
    }

    pub fn kind(&self) -> ElementKind {
        self.kind
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    /// Signed reactance in ohms: `ωL` for an inductor, `-1/(ωC)` for a capacitor.
    /// The impedance is `j` times this value.
    #[inline]
    pub fn reactance(&self, omega: Frequency) -> f64 {
        let w = omega.rad_per_s();
        match self.kind {
            ElementKind::Inductor => w * self.value,
            ElementKind::Capacitor => -1.0 / (w * self.value),
        }
    }
}

/// Coupled coil pair in T-model form: two leakage inductances and the
/// magnetizing inductance, all in henries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoupledCoils {
    l_lp: f64,
    l_ls: f64,
    l_m: f64,
}

impl CoupledCoils {
    pub fn new(l_lp: f64, l_ls: f64, l_m: f64) -> Result<Self> {
        Ok(Self {
            l_lp: positive("l_lp", l_lp)?,
            l_ls: positive("l_ls", l_ls)?,
            l_m: positive("l_m", l_m)?,
        })
    }

    /// T-model from self inductances and coupling coefficient:
    /// `L_M = k·sqrt(L1·L2)`, `L_lp = L1 - L_M`, `L_ls = L2 - L_M`.
    ///
    /// Both leakages must come out positive, which bounds the coupling at
    /// `k < sqrt(min(L1, L2) / max(L1, L2))`.
    pub fn from_self_inductances(l1: f64, l2: f64, k: f64) -> Result<Self> {
        positive("l1", l1)?;
        positive("l2", l2)?;
        if !(k.is_finite() && k > 0.0 && k < 1.0) {
            return Err(Error::InvalidCoupling(format!(
                "coupling coefficient k = {k} must satisfy 0 < k < 1"
            )));
        }
        let l_m = k * (l1 * l2).sqrt();
        let l_lp = l1 - l_m;
        let l_ls = l2 - l_m;
        if !(l_lp > 0.0 && l_ls > 0.0) {
            let k_max = (l1.min(l2) / l1.max(l2)).sqrt();
            let which = if l_lp <= 0.0 { "l_lp" } else { "l_ls" };
            return Err(Error::InvalidCoupling(format!(
                "leakage inductance {which} would be non-positive; coupling k = {k} must be below sqrt(min(L1,L2)/max(L1,L2)) = {k_max}"
            )));
        }
        Self::new(l_lp, l_ls, l_m)
    }

    pub fn l_lp(&self) -> f64 {
        self.l_lp
    }

    pub fn l_ls(&self) -> f64 {
        self.l_ls
    }

    pub fn l_m(&self) -> f64 {
        self.l_m
    }

    /// Primary self inductance `L_lp + L_M`.
    pub fn l1(&self) -> f64 {
        self.l_lp + self.l_m
    }

    /// Secondary self inductance `L_ls + L_M`.
    pub fn l2(&self) -> f64 {
        self.l_ls + self.l_m
    }

    pub fn coupling(&self) -> f64 {
        self.l_m / (self.l1() * self.l2()).sqrt()
    }

    /// All three inductances multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.l_lp * factor, self.l_ls * factor, self.l_m * factor)
    }
}

/// Equivalent AC resistance of a full-bridge rectifier with capacitive
/// filter feeding a DC load, using the fundamental-harmonic approximation
/// `R_ac = 8/π² · R_dc`.
///
/// This is an external convention; nothing in the toolkit applies it
/// implicitly. Loads elsewhere are always taken as AC resistances.
pub fn fha_ac_resistance(r_dc: f64) -> Result<f64> {
    Ok(8.0 / (PI * PI) * positive("r_dc", r_dc)?)
}
