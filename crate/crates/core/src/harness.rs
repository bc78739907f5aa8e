//! Frequency/load sweeps and pass/fail verification of CC-ZPA and CV-ZPA
//! operating points.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::element::Frequency;
use crate::error::{positive, Error, Result};
use crate::network::{CompensationNetwork, SspDesign};
use crate::ssp::mode_residuals;
use crate::tanks::{phase_relation_check, PhaseRelationReport};
use crate::twoport::{phase_difference, power_balance, solve_ports, Drive, PortSolution, TransferMatrix};
use crate::Mode;

/// A ladder whose load is varied by the caller.
pub trait NetworkFamily: Sync {
    fn transfer_matrix(&self, omega: Frequency) -> Result<TransferMatrix>;

    /// Output-condition and ZPA residuals at `omega`, normalised to a
    /// dimensionless scale. `None` when the family has no condition generator.
    fn condition_residuals(&self, _omega: Frequency, _mode: Mode) -> Option<Result<ModeResiduals>> {
        None
    }
}

/// Residuals of the output condition (CC or CV) and the ZPA condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeResiduals {
    pub condition: f64,
    pub zpa: f64,
}

impl NetworkFamily for CompensationNetwork {
    fn transfer_matrix(&self, omega: Frequency) -> Result<TransferMatrix> {
        CompensationNetwork::transfer_matrix(self, omega)
    }
}

impl NetworkFamily for TransferMatrix {
    fn transfer_matrix(&self, _omega: Frequency) -> Result<TransferMatrix> {
        Ok(*self)
    }
}

impl NetworkFamily for SspDesign {
    fn transfer_matrix(&self, omega: Frequency) -> Result<TransferMatrix> {
        // The ladder does not depend on the load.
        self.network(1.0)?.transfer_matrix(omega)
    }

    /// Residuals divided by `X2 = ωL_M` at the evaluated frequency.
    fn condition_residuals(&self, omega: Frequency, mode: Mode) -> Option<Result<ModeResiduals>> {
        let x = self.reactances(omega, mode);
        Some(mode_residuals(&x).map(|(c, z)| ModeResiduals {
            condition: c / x.x2,
            zpa: z / x.x2,
        }))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Relative load spread of the regulated output magnitude.
    pub spread: f64,
    /// Degrees.
    pub angle_deg: f64,
    /// Normalised condition residual.
    pub residual: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            spread: 1e-6,
            angle_deg: 0.01,
            residual: 1e-9,
        }
    }
}

/// One analysed (ω, R_ac) point under unit voltage drive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub omega: f64,
    pub r_ac: f64,
    pub z_in_re: f64,
    pub z_in_im: f64,
    pub theta_in_deg: f64,
    pub mag_vo_vin: f64,
    /// Transconductance magnitude |I_o/V_in| in siemens.
    pub mag_io_vin: f64,
    pub arg_io_vin_deg: f64,
    pub arg_vo_vin_deg: f64,
    pub p_in: f64,
    pub p_out: f64,
}

impl SweepRecord {
    pub fn from_solution(omega: Frequency, p: &PortSolution) -> Self {
        let pb = power_balance(p);
        Self {
            omega: omega.rad_per_s(),
            r_ac: p.r_ac,
            z_in_re: p.z_in.re,
            z_in_im: p.z_in.im,
            theta_in_deg: p.theta_in,
            mag_vo_vin: (p.v_o / p.v_in).norm(),
            mag_io_vin: (p.i_o / p.v_in).norm(),
            arg_io_vin_deg: phase_difference(p.i_o, p.v_in),
            arg_vo_vin_deg: phase_difference(p.v_o, p.v_in),
            p_in: pb.p_in,
            p_out: pb.p_out,
        }
    }

    pub fn power_mismatch(&self) -> f64 {
        (self.p_in - self.p_out).abs() / self.p_in.max(f64::MIN_POSITIVE)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SweepRow {
    Record(SweepRecord),
    /// Exact resonance at this point; no phasors exist.
    Singular {
        omega: f64,
        r_ac: f64,
        reason: String,
    },
}

impl SweepRow {
    pub fn omega(&self) -> f64 {
        match self {
            SweepRow::Record(r) => r.omega,
            SweepRow::Singular { omega, .. } => *omega,
        }
    }

    pub fn r_ac(&self) -> f64 {
        match self {
            SweepRow::Record(r) => r.r_ac,
            SweepRow::Singular { r_ac, .. } => *r_ac,
        }
    }

    pub fn record(&self) -> Option<&SweepRecord> {
        match self {
            SweepRow::Record(r) => Some(r),
            SweepRow::Singular { .. } => None,
        }
    }
}

fn check_loads(loads: &[f64]) -> Result<()> {
    if loads.is_empty() {
        return Err(Error::NoLoads);
    }
    loads.iter().try_for_each(|&r| positive("r_ac", r).map(drop))
}

/// Log-spaced grid of `points` angular frequencies over `[lo, hi]`.
pub fn log_grid(lo: Frequency, hi: Frequency, points: usize) -> Result<Vec<Frequency>> {
    if lo > hi {
        return Err(Error::InvalidBounds {
            name: "frequency grid",
            lower: lo.rad_per_s(),
            upper: hi.rad_per_s(),
        });
    }
    let (a, b) = (lo.rad_per_s().ln(), hi.rad_per_s().ln());
    match points {
        0 => Err(Error::EmptyGrid),
        1 => Ok(vec![lo]),
        n => (0..n)
            .map(|i| {
                let w = if i == 0 {
                    lo.rad_per_s()
                } else if i == n - 1 {
                    hi.rad_per_s()
                } else {
                    (a + (b - a) * i as f64 / (n - 1) as f64).exp()
                };
                Frequency::new(w)
            })
            .collect(),
    }
}

/// Analyses every (ω, R_ac) pair, ordered by ω then R_ac.
pub fn sweep<F: NetworkFamily + ?Sized>(family: &F, omegas: &[Frequency], loads: &[f64]) -> Result<Vec<SweepRow>> {
    if omegas.is_empty() {
        return Err(Error::EmptyGrid);
    }
    check_loads(loads)?;
    let mut omegas = omegas.to_vec();
    omegas.sort_by(|a, b| a.rad_per_s().total_cmp(&b.rad_per_s()));
    let mut loads = loads.to_vec();
    loads.sort_by(f64::total_cmp);

    let rows = omegas
        .par_iter()
        .flat_map_iter(|&omega| {
            let m = family.transfer_matrix(omega);
            loads
                .iter()
                .map(|&r| {
                    let solved = m.clone().and_then(|m| solve_ports(&m, r, Drive::Voltage, omega));
                    match solved {
                        Ok(p) => SweepRow::Record(SweepRecord::from_solution(omega, &p)),
                        Err(e) => SweepRow::Singular {
                            omega: omega.rad_per_s(),
                            r_ac: r,
                            reason: e.to_string(),
                        },
                    }
                })
                .collect::<Vec<_>>()
        })
        .collect();
    Ok(rows)
}

/// Port solutions under unit voltage drive, one per load.
pub fn load_response<F: NetworkFamily + ?Sized>(
    family: &F,
    omega: Frequency,
    loads: &[f64],
) -> Result<Vec<PortSolution>> {
    check_loads(loads)?;
    let m = family.transfer_matrix(omega)?;
    loads
        .iter()
        .map(|&r| solve_ports(&m, r, Drive::Voltage, omega))
        .collect()
}

/// `(max - min) / mean`; zero for fewer than two values.
pub fn relative_spread(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let (lo, hi, sum) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY, 0.0), |(lo, hi, s), &v| {
            (lo.min(v), hi.max(v), s + v)
        });
    (hi - lo) / (sum / values.len() as f64)
}

/// Load-independence and phase metrics at one frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoadMetrics {
    /// Spread of |I_o/V_in| over the loads.
    pub current_spread: f64,
    /// Spread of |V_o/V_in| over the loads.
    pub voltage_spread: f64,
    pub max_abs_theta_in_deg: f64,
}

pub fn load_metrics<F: NetworkFamily + ?Sized>(family: &F, omega: Frequency, loads: &[f64]) -> Result<LoadMetrics> {
    let sols = load_response(family, omega, loads)?;
    Ok(metrics_of(&sols))
}

fn metrics_of(sols: &[PortSolution]) -> LoadMetrics {
    let current: Vec<f64> = sols.iter().map(|p| (p.i_o / p.v_in).norm()).collect();
    let voltage: Vec<f64> = sols.iter().map(|p| (p.v_o / p.v_in).norm()).collect();
    LoadMetrics {
        current_spread: relative_spread(&current),
        voltage_spread: relative_spread(&voltage),
        max_abs_theta_in_deg: sols.iter().fold(0.0, |m, p| m.max(p.theta_in.abs())),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    fn at_most(name: &str, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.to_owned(),
            value,
            tolerance,
            // NaN never passes.
            pass: value <= tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub mode: Mode,
    pub omega_rad_s: f64,
    pub f_hz: f64,
    pub loads: Vec<f64>,
    /// Spread of |I_o/V_in| (CC) or |V_o/V_in| (CV) over the loads.
    pub spread: Option<f64>,
    pub max_abs_theta_in_deg: Option<f64>,
    pub phase_relations: Vec<PhaseRelationReport>,
    pub residuals: Option<ModeResiduals>,
    pub checks: Vec<Check>,
    pub warnings: Vec<String>,
    pub pass: bool,
}

impl VerificationReport {
    pub fn failing_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Verifies a CC-ZPA operating point: load-independent |I_o/V_in|, zero
/// input phase for every load, `arg I_o - arg V_in = ±90°` and vanishing CC
/// and ZPA_CC residuals.
pub fn verify_cc<F: NetworkFamily + ?Sized>(
    family: &F,
    omega: Frequency,
    loads: &[f64],
    tol: &Tolerances,
) -> Result<VerificationReport> {
    verify(family, omega, loads, tol, Mode::Cc)
}

/// Verifies a CV-ZPA operating point: load-independent |V_o/V_in|, zero
/// input phase, `arg V_o - arg V_in ∈ {0°, 180°}` and vanishing CV and
/// ZPA_CV residuals.
pub fn verify_cv<F: NetworkFamily + ?Sized>(
    family: &F,
    omega: Frequency,
    loads: &[f64],
    tol: &Tolerances,
) -> Result<VerificationReport> {
    verify(family, omega, loads, tol, Mode::Cv)
}

fn verify<F: NetworkFamily + ?Sized>(
    family: &F,
    omega: Frequency,
    loads: &[f64],
    tol: &Tolerances,
    mode: Mode,
) -> Result<VerificationReport> {
    check_loads(loads)?;
    let mut checks = Vec::new();
    let mut warnings = Vec::new();
    let (mut spread, mut max_theta) = (None, None);
    let mut phase_relations = Vec::new();

    match load_response(family, omega, loads) {
        Ok(sols) => {
            let m = metrics_of(&sols);
            let (name, s) = match mode {
                Mode::Cc => ("current_spread", m.current_spread),
                Mode::Cv => ("voltage_spread", m.voltage_spread),
            };
            if loads.len() < 2 {
                warnings.push(format!("{name} check is vacuous with a single load"));
            }
            checks.push(Check::at_most(name, s, tol.spread));
            checks.push(Check::at_most("zpa_theta_in", m.max_abs_theta_in_deg, tol.angle_deg));
            phase_relations = sols
                .iter()
                .map(|p| phase_relation_check(p, mode, tol.angle_deg))
                .collect();
            let worst = phase_relations
                .iter()
                .flat_map(|r| r.relations.iter())
                .fold(0.0f64, |w, r| w.max(r.deviation_deg));
            checks.push(Check::at_most("phase_relations", worst, tol.angle_deg));
            spread = Some(s);
            max_theta = Some(m.max_abs_theta_in_deg);
        }
        Err(e) => {
            warnings.push(format!("port analysis failed: {e}"));
            checks.push(Check::at_most("port_analysis", f64::NAN, 0.0));
        }
    }

    let mut residuals = None;
    match family.condition_residuals(omega, mode) {
        Some(Ok(r)) => {
            let (c, z) = match mode {
                Mode::Cc => ("cc_residual", "zpa_cc_residual"),
                Mode::Cv => ("cv_residual", "zpa_cv_residual"),
            };
            checks.push(Check::at_most(c, r.condition.abs(), tol.residual));
            checks.push(Check::at_most(z, r.zpa.abs(), tol.residual));
            residuals = Some(r);
        }
        Some(Err(e)) => {
            warnings.push(format!("condition residuals undefined: {e}"));
            checks.push(Check::at_most("condition_residuals", f64::NAN, tol.residual));
        }
        None => warnings.push("no condition generator for this network; residual checks skipped".into()),
    }

    let pass = checks.iter().all(|c| c.pass);
    Ok(VerificationReport {
        mode,
        omega_rad_s: omega.rad_per_s(),
        f_hz: omega.hz(),
        loads: loads.to_vec(),
        spread,
        max_abs_theta_in_deg: max_theta,
        phase_relations,
        residuals,
        checks,
        warnings,
        pass,
    })
}
