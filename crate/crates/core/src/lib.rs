//! Design and verification of resonant compensation networks for inductive
//! power transfer.
//!
//! The toolkit derives the constant-current (CC), constant-voltage (CV) and
//! zero-phase-angle (ZPA) conditions of reactive ladders from basic resonant
//! tanks, solves them for the series / series-parallel (S-SP) topology, and
//! checks every claim independently through chain-matrix analysis.
//!
//! Module map:
//! - [`element`], [`network`]: reactive elements, coupled-coil T-model, ladders.
//! - [`twoport`]: ABCD matrices, port phasors, power balance.
//! - [`tanks`]: L/T/π resonance residuals and the port phase-relation check.
//! - [`ssp`]: S-SP condition generators, unified-model conditions and their equivalence.
//! - [`solver`]: component/frequency solver and the sweep-based oracle.
//! - [`harness`]: frequency/load sweeps and CC/CV verification reports.

use serde::{Deserialize, Serialize};

pub mod element;
pub mod error;
pub mod harness;
pub mod network;
pub mod solver;
pub mod ssp;
pub mod tanks;
pub mod twoport;

pub use element::{fha_ac_resistance, CoupledCoils, ElementKind, Frequency, ReactiveElement};
pub use error::{Error, Result};
pub use harness::{sweep, verify_cc, verify_cv, NetworkFamily, SweepRow, Tolerances, VerificationReport};
pub use network::{build_ssp, CompensationNetwork, LadderStage, Orientation, SspDesign};
pub use solver::{oracle_verify, solve_css, solve_design, DesignSolution, DesignSpec};
pub use ssp::SspReactances;
pub use tanks::{phase_relation_check, ConversionKind, Tank};
pub use twoport::{power_balance, solve_ports, Drive, PortSolution, TransferMatrix};

/// Operating mode of a CC/CV charger.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Mode {
    /// Load-independent output current.
    Cc,
    /// Load-independent output voltage.
    Cv,
}
