//! Chain-matrix (ABCD) analysis of reactive ladders.
//!
//! Phasors use the `e^{+jωt}` convention, so an inductor has impedance `+jωL`.
//! The chain matrix relates input to output quantities as
//!
//! ```text
//! [V_in]   [a b] [V_o]
//! [I_in] = [c d] [I_o]
//! ```
//!
//! with `I_o` flowing out of the output port into the load.

use std::ops::Mul;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::element::Frequency;
use crate::error::{positive, Error, Result};
use crate::network::{CompensationNetwork, LadderStage, Orientation};

/// Threshold on `|c·R_ac + d|` (voltage drive) or `|a·R_ac + b|` (current
/// drive) below which the port is treated as exactly resonant.
pub const RESONANCE_THRESHOLD: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransferMatrix {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl TransferMatrix {
    pub const IDENTITY: Self = Self {
        a: Complex64::new(1.0, 0.0),
        b: Complex64::new(0.0, 0.0),
        c: Complex64::new(0.0, 0.0),
        d: Complex64::new(1.0, 0.0),
    };

    pub fn series(z: Complex64) -> Self {
        Self { b: z, ..Self::IDENTITY }
    }

    pub fn shunt_admittance(y: Complex64) -> Self {
        Self { c: y, ..Self::IDENTITY }
    }

    pub fn determinant(&self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }

    /// `|a·d| + |b·c|`. Rounding error in the determinant, and in any port
    /// power computed from the entries, scales with this rather than with the
    /// determinant itself, so it grows large for high-Q ladders.
    pub fn magnitude_product(&self) -> f64 {
        (self.a * self.d).norm() + (self.b * self.c).norm()
    }
}

impl Mul for TransferMatrix {
    type Output = Self;

    fn mul(self, r: Self) -> Self {
        Self {
            a: self.a * r.a + self.b * r.c,
            b: self.a * r.b + self.b * r.d,
            c: self.c * r.a + self.d * r.c,
            d: self.c * r.b + self.d * r.d,
        }
    }
}

/// Chain matrix of one ladder arm. `index` is only used to label errors.
pub fn stage_matrix(stage: &LadderStage, index: usize, omega: Frequency) -> Result<TransferMatrix> {
    let z = Complex64::new(0.0, stage.reactance(omega));
    match stage.orientation() {
        Orientation::Series => Ok(TransferMatrix::series(z)),
        Orientation::Shunt => {
            let y = z.inv();
            if z.im == 0.0 || !y.is_finite() {
                return Err(Error::SingularStage {
                    index,
                    omega: omega.rad_per_s(),
                });
            }
            Ok(TransferMatrix::shunt_admittance(y))
        }
    }
}

/// Product of the matrices in source-to-load order.
pub fn compose(matrices: &[TransferMatrix]) -> Result<TransferMatrix> {
    let (first, rest) = matrices.split_first().ok_or(Error::EmptyNetwork)?;
    Ok(rest.iter().fold(*first, |acc, m| acc * *m))
}

impl CompensationNetwork {
    pub fn transfer_matrix(&self, omega: Frequency) -> Result<TransferMatrix> {
        let matrices = self
            .stages()
            .iter()
            .enumerate()
            .map(|(i, s)| stage_matrix(s, i, omega))
            .collect::<Result<Vec<_>>>()?;
        compose(&matrices)
    }

    pub fn solve(&self, omega: Frequency, drive: Drive) -> Result<PortSolution> {
        solve_ports(&self.transfer_matrix(omega)?, self.r_ac(), drive, omega)
    }
}

/// Source normalisation: unit voltage or unit current at zero phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Drive {
    Voltage,
    Current,
}

/// Port phasors of a loaded two-port. Angles are in degrees, `(-180, 180]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PortSolution {
    pub v_in: Complex64,
    pub i_in: Complex64,
    pub v_o: Complex64,
    pub i_o: Complex64,
    pub z_in: Complex64,
    pub r_ac: f64,
    pub theta_in: f64,
    pub theta_out: f64,
}

/// Wraps an angle in degrees into `(-180, 180]`.
pub fn wrap_degrees(deg: f64) -> f64 {
    let w = deg.rem_euclid(360.0);
    if w > 180.0 {
        w - 360.0
    } else {
        w
    }
}

/// `arg(num) - arg(den)` in degrees, wrapped.
pub fn phase_difference(num: Complex64, den: Complex64) -> f64 {
    wrap_degrees((num.arg() - den.arg()).to_degrees())
}

/// Terminates `m` in `r_ac` and solves the port phasors for the given drive.
///
/// `omega` only labels resonance errors.
pub fn solve_ports(m: &TransferMatrix, r_ac: f64, drive: Drive, omega: Frequency) -> Result<PortSolution> {
    let r = positive("r_ac", r_ac)?;
    let num = m.a * r + m.b;
    let den = m.c * r + m.d;
    if den.norm() < RESONANCE_THRESHOLD {
        return Err(Error::OpenCircuitResonance {
            omega: omega.rad_per_s(),
        });
    }
    if num.norm() < RESONANCE_THRESHOLD {
        return Err(Error::ShortCircuitResonance {
            omega: omega.rad_per_s(),
        });
    }
    // Unit output current gives V_in = a·R + b and I_in = c·R + d; rescale
    // so the driven quantity is 1∠0.
    let scale = match drive {
        Drive::Voltage => num.inv(),
        Drive::Current => den.inv(),
    };
    let v_in = num * scale;
    let i_in = den * scale;
    let i_o = scale;
    let v_o = scale * r;
    let z_in = num / den;
    Ok(PortSolution {
        v_in,
        i_in,
        v_o,
        i_o,
        z_in,
        r_ac: r,
        theta_in: phase_difference(v_in, i_in),
        // V_o = R_ac·I_o with real positive R_ac.
        theta_out: 0.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerBalance {
    pub p_in: f64,
    pub p_out: f64,
    pub relative_mismatch: f64,
}

pub fn power_balance(p: &PortSolution) -> PowerBalance {
    let p_in = 0.5 * (p.v_in * p.i_in.conj()).re;
    let p_out = 0.5 * p.i_o.norm_sqr() * p.r_ac;
    let relative_mismatch = (p_in - p_out).abs() / p_in.max(f64::MIN_POSITIVE);
    PowerBalance {
        p_in,
        p_out,
        relative_mismatch,
    }
}
