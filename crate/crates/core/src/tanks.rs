//! Basic resonant tanks and the port phase relations they impose.
//!
//! Each L-section shifts the converted quantity by ±90°, so a cascade with an
//! even count of resonant L-sections gives 0°/180° (V-V, C-C) and an odd
//! count gives ±90° (V-C, C-V). A network that is V-V and C-C at once has
//! `θ_in = θ_out`; one that is V-C and C-V at once has `θ_in = -θ_out`.
//! With a resistive load either case pins `θ_in` to zero.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::twoport::{phase_difference, PortSolution};
use crate::Mode;

/// Input-to-output quantity conversion of a resonant tank.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConversionKind {
    /// Voltage in, load-independent voltage out (T-network).
    VV,
    /// Voltage in, load-independent current out (reversed L).
    VC,
    /// Current in, load-independent voltage out (normal L).
    CV,
    /// Current in, load-independent current out (π-network).
    CC,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TankShape {
    NormalL,
    ReversedL,
    Tee,
    Pi,
}

/// A tank with its arm reactances (ohms) at one frequency, listed from the
/// source side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Tank {
    /// Shunt arm at the input, then a series arm.
    NormalL {
        shunt: f64,
        series: f64,
    },
    /// Series arm, then a shunt arm across the output.
    ReversedL {
        series: f64,
        shunt: f64,
    },
    Tee {
        series_in: f64,
        shunt: f64,
        series_out: f64,
    },
    Pi {
        shunt_in: f64,
        series: f64,
        shunt_out: f64,
    },
}

impl Tank {
    pub fn shape(&self) -> TankShape {
        match self {
            Tank::NormalL { .. } => TankShape::NormalL,
            Tank::ReversedL { .. } => TankShape::ReversedL,
            Tank::Tee { .. } => TankShape::Tee,
            Tank::Pi { .. } => TankShape::Pi,
        }
    }

    /// The only conversion this shape realises.
    pub fn conversion(&self) -> ConversionKind {
        match self {
            Tank::NormalL { .. } => ConversionKind::CV,
            Tank::ReversedL { .. } => ConversionKind::VC,
            Tank::Tee { .. } => ConversionKind::VV,
            Tank::Pi { .. } => ConversionKind::CC,
        }
    }
}

/// Resonance residual in ohms; zero means the tank realises `target`.
///
/// - L sections: `X_s + X_p`
/// - T: `X_1s·X_p/(X_1s + X_p) + X_2s`
/// - π: `X_1p + X_s + X_2p`
pub fn residual(tank: &Tank, target: ConversionKind) -> Result<f64> {
    if tank.conversion() != target {
        return Err(Error::TankMismatch {
            shape: tank.shape(),
            target,
        });
    }
    match *tank {
        Tank::NormalL { shunt, series } => Ok(shunt + series),
        Tank::ReversedL { series, shunt } => Ok(series + shunt),
        Tank::Tee {
            series_in,
            shunt,
            series_out,
        } => {
            let den = series_in + shunt;
            if den == 0.0 || den.abs() < 1e-12 * series_in.abs().max(shunt.abs()) {
                return Err(Error::DegenerateTee);
            }
            Ok(series_in * shunt / den + series_out)
        }
        Tank::Pi {
            shunt_in,
            series,
            shunt_out,
        } => Ok(shunt_in + series + shunt_out),
    }
}

pub const DEFAULT_ANGLE_TOLERANCE_DEG: f64 = 0.01;

/// Target of a port phase relation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseTarget {
    /// 0° or 180°.
    InPhaseOrOpposed,
    /// +90° or -90°.
    Quadrature,
}

impl PhaseTarget {
    /// Distance in degrees from `angle` to the nearest admissible value.
    pub fn deviation(self, angle: f64) -> f64 {
        let a = angle.abs();
        match self {
            PhaseTarget::InPhaseOrOpposed => a.min(180.0 - a),
            PhaseTarget::Quadrature => (a - 90.0).abs(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseRelation {
    /// e.g. `arg(I_o) - arg(V_in)`.
    pub name: String,
    pub measured_deg: f64,
    pub target: PhaseTarget,
    pub deviation_deg: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseRelationReport {
    pub mode: Mode,
    pub relations: Vec<PhaseRelation>,
    pub theta_in_deg: f64,
    pub theta_out_deg: f64,
    /// `θ_in = θ_out` (CV) or `θ_in = -θ_out` (CC) within tolerance.
    pub theta_relation_pass: bool,
    pub pass: bool,
}

/// Checks the port phase relations a CC-ZPA or CV-ZPA design must exhibit.
///
/// CV: `arg V_o - arg V_in` and `arg I_o - arg I_in` in {0°, 180°}.
/// CC: `arg I_o - arg V_in` and `arg V_o - arg I_in` equal to ±90°.
pub fn phase_relation_check(p: &PortSolution, mode: Mode, tol_deg: f64) -> PhaseRelationReport {
    let relation = |name: &str, measured_deg: f64, target: PhaseTarget| {
        let deviation_deg = target.deviation(measured_deg);
        PhaseRelation {
            name: name.to_owned(),
            measured_deg,
            target,
            deviation_deg,
            pass: deviation_deg <= tol_deg,
        }
    };
    let (relations, theta_gap) = match mode {
        Mode::Cv => (
            vec![
                relation(
                    "arg(V_o) - arg(V_in)",
                    phase_difference(p.v_o, p.v_in),
                    PhaseTarget::InPhaseOrOpposed,
                ),
                relation(
                    "arg(I_o) - arg(I_in)",
                    phase_difference(p.i_o, p.i_in),
                    PhaseTarget::InPhaseOrOpposed,
                ),
            ],
            p.theta_in - p.theta_out,
        ),
        Mode::Cc => (
            vec![
                relation(
                    "arg(I_o) - arg(V_in)",
                    phase_difference(p.i_o, p.v_in),
                    PhaseTarget::Quadrature,
                ),
                relation(
                    "arg(V_o) - arg(I_in)",
                    phase_difference(p.v_o, p.i_in),
                    PhaseTarget::Quadrature,
                ),
            ],
            p.theta_in + p.theta_out,
        ),
    };
    let theta_relation_pass = crate::twoport::wrap_degrees(theta_gap).abs() <= tol_deg;
    let pass = theta_relation_pass && relations.iter().all(|r| r.pass);
    PhaseRelationReport {
        mode,
        relations,
        theta_in_deg: p.theta_in,
        theta_out_deg: p.theta_out,
        theta_relation_pass,
        pass,
    }
}
