//! Resonance conditions of the S-SP topology.
//!
//! With `jX_k = Z_k(jω)` for the four arms
//!
//! ```text
//! X1 = ωL_lp - 1/(ωC_p)   series
//! X2 = ωL_M               shunt
//! X3 = ωL_ls - 1/(ωC_ss)  series
//! X4 = -1/(ωC_sp)         shunt, across the load
//! ```
//!
//! the tank view gives, at the CC frequency,
//! `CC: X1·X2/(X1+X2) + X3 + X4 = 0` (V-V into V-C) and
//! `ZPA_CC: X2 + X3 = 0` (normal L, C-V); at the CV frequency
//! `CV: X1·X2/(X1+X2) + X3 = 0` (T, V-V) and
//! `ZPA_CV: X2 + X3 + X4 = 0` (π, C-C).
//!
//! The unified-model route splits the arms into alternating L-sections
//! (`X2a ∥ X2b = X2`, `X3a + X3b = X3`) and states the same conditions on the
//! split reactances. [`equivalence_check`] evaluates both routes and the
//! algebra linking them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::element::{CoupledCoils, Frequency};
use crate::error::{Error, Result};
use crate::network::SspDesign;
use crate::Mode;

/// Arm reactances of an S-SP network at one frequency, in ohms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SspReactances {
    pub mode: Mode,
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
    pub x4: f64,
}

impl SspReactances {
    pub fn new(mode: Mode, x1: f64, x2: f64, x3: f64, x4: f64) -> Self {
        Self { mode, x1, x2, x3, x4 }
    }

    /// Every reactance multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self::new(
            self.mode,
            self.x1 * factor,
            self.x2 * factor,
            self.x3 * factor,
            self.x4 * factor,
        )
    }

    /// Largest arm reactance magnitude, used to make discrepancies relative.
    pub fn magnitude(&self) -> f64 {
        [self.x1, self.x2, self.x3, self.x4]
            .into_iter()
            .fold(0.0, |m, x| m.max(x.abs()))
    }

    fn expect(&self, mode: Mode) -> Result<()> {
        if self.mode == mode {
            Ok(())
        } else {
            Err(Error::ModeMismatch {
                expected: mode,
                found: self.mode,
            })
        }
    }
}

pub fn eval_ssp_reactances(
    coils: &CoupledCoils,
    c_p: f64,
    c_ss: f64,
    c_sp: f64,
    omega: Frequency,
    mode: Mode,
) -> SspReactances {
    let w = omega.rad_per_s();
    SspReactances {
        mode,
        x1: w * coils.l_lp() - 1.0 / (w * c_p),
        x2: w * coils.l_m(),
        x3: w * coils.l_ls() - 1.0 / (w * c_ss),
        x4: -1.0 / (w * c_sp),
    }
}

impl SspDesign {
    pub fn reactances(&self, omega: Frequency, mode: Mode) -> SspReactances {
        eval_ssp_reactances(&self.coils, self.c_p, self.c_ss, self.c_sp, omega, mode)
    }
}

const DEGENERATE_RATIO: f64 = 1e-12;

/// `a·b/(a+b)`, rejecting a vanishing denominator.
fn parallel(a: f64, b: f64, what: &'static str) -> Result<f64> {
    let den = a + b;
    if den == 0.0 || den.abs() < DEGENERATE_RATIO * a.abs().max(b.abs()) {
        return Err(Error::DegenerateParallel { what });
    }
    Ok(a * b / den)
}

fn nonzero(den: f64, scale: f64, what: &'static str) -> Result<f64> {
    if den == 0.0 || den.abs() < DEGENERATE_RATIO * scale {
        Err(Error::DegenerateParallel { what })
    } else {
        Ok(den)
    }
}

/// `X1·X2/(X1+X2) + X3 + X4`
pub fn cc_residual(x: &SspReactances) -> Result<f64> {
    x.expect(Mode::Cc)?;
    Ok(parallel(x.x1, x.x2, "X1 || X2")? + x.x3 + x.x4)
}

/// `X2 + X3`
pub fn zpa_cc_residual(x: &SspReactances) -> Result<f64> {
    x.expect(Mode::Cc)?;
    Ok(x.x2 + x.x3)
}

/// `X1'·X2'/(X1'+X2') + X3'`
pub fn cv_residual(x: &SspReactances) -> Result<f64> {
    x.expect(Mode::Cv)?;
    Ok(parallel(x.x1, x.x2, "X1' || X2'")? + x.x3)
}

/// `X2' + X3' + X4'`
pub fn zpa_cv_residual(x: &SspReactances) -> Result<f64> {
    x.expect(Mode::Cv)?;
    Ok(x.x2 + x.x3 + x.x4)
}

/// Output-condition and ZPA residuals of `x` for its own mode.
pub fn mode_residuals(x: &SspReactances) -> Result<(f64, f64)> {
    match x.mode {
        Mode::Cc => Ok((cc_residual(x)?, zpa_cc_residual(x)?)),
        Mode::Cv => Ok((cv_residual(x)?, zpa_cv_residual(x)?)),
    }
}

/// Split reactances of the unified model in CC mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnifiedCc {
    pub x2a: f64,
    pub x2b: f64,
    pub x3a: f64,
    pub x3b: f64,
}

/// Split reactances of the unified model in CV mode; X3' is not split.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnifiedCv {
    pub x2a: f64,
    pub x2b: f64,
}

impl UnifiedCc {
    /// `X2a ∥ X2b`, which the model equates with X2.
    pub fn x2(&self) -> Result<f64> {
        parallel(self.x2a, self.x2b, "X2a || X2b")
    }

    /// `X3a + X3b`, which the model equates with X3.
    pub fn x3(&self) -> f64 {
        self.x3a + self.x3b
    }
}

impl UnifiedCv {
    pub fn x2(&self) -> Result<f64> {
        parallel(self.x2a, self.x2b, "X2a' || X2b'")
    }
}

/// Splits from the unified CC conditions:
/// `X2a = -X1`, `X2b = -(X3+X4)`, `X3a = X3+X4`, `X3b = -X4`.
pub fn unified_from_cc(x: &SspReactances) -> Result<UnifiedCc> {
    x.expect(Mode::Cc)?;
    let u = UnifiedCc {
        x2a: -x.x1,
        x2b: -(x.x3 + x.x4),
        x3a: x.x3 + x.x4,
        x3b: -x.x4,
    };
    u.x2()?;
    Ok(u)
}

/// Splits from the unified CV conditions: `X2a' = -X1'`, `X2b' = -X3'`.
pub fn unified_from_cv(x: &SspReactances) -> Result<UnifiedCv> {
    x.expect(Mode::Cv)?;
    let u = UnifiedCv { x2a: -x.x1, x2b: -x.x3 };
    u.x2()?;
    Ok(u)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnifiedCcResiduals {
    /// `X1 + X2a`
    pub x1_x2a: f64,
    /// `X2b + X3a`
    pub x2b_x3a: f64,
    /// `X3b + X4`
    pub x3b_x4: f64,
    /// `X2b·X3a + (X2a + X2b)·X3b`
    pub zpa: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnifiedCvResiduals {
    /// `X1' + X2a'`
    pub x1_x2a: f64,
    /// `X2b' + X3'`
    pub x2b_x3: f64,
    /// `X2b'·X3' + (X2a' + X2b')·X4'`
    pub zpa: f64,
}

impl UnifiedCcResiduals {
    pub fn max_condition(&self) -> f64 {
        self.x1_x2a.abs().max(self.x2b_x3a.abs()).max(self.x3b_x4.abs())
    }
}

pub fn unified_cc_residuals(u: &UnifiedCc, x: &SspReactances) -> Result<UnifiedCcResiduals> {
    x.expect(Mode::Cc)?;
    Ok(UnifiedCcResiduals {
        x1_x2a: x.x1 + u.x2a,
        x2b_x3a: u.x2b + u.x3a,
        x3b_x4: u.x3b + x.x4,
        zpa: u.x2b * u.x3a + (u.x2a + u.x2b) * u.x3b,
    })
}

pub fn unified_cv_residuals(u: &UnifiedCv, x: &SspReactances) -> Result<UnifiedCvResiduals> {
    x.expect(Mode::Cv)?;
    Ok(UnifiedCvResiduals {
        x1_x2a: x.x1 + u.x2a,
        x2b_x3: u.x2b + x.x3,
        zpa: u.x2b * x.x3 + (u.x2a + u.x2b) * x.x4,
    })
}

/// Both routes' residuals at one operating point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub mode: Mode,
    /// Output condition (CC or CV) from the tank route.
    pub condition_tank: f64,
    /// Output condition recovered from the unified split: the split
    /// definition of X2 cleared of fractions and divided by `(X1 + X2)`.
    pub condition_unified: f64,
    pub zpa_tank: f64,
    /// Unified ZPA condition plus the vanishing term `X2a·(X3a + X2b)`
    /// (or `X2a'·(X3' + X2b')`), divided by `(X2a + X2b)`.
    pub zpa_unified: f64,
    /// `|X2a ∥ X2b - X2|` relative to [`SspReactances::magnitude`]. Zero
    /// exactly when the split is a valid unified model, i.e. when the
    /// output condition holds.
    pub split_inconsistency: f64,
    pub condition_discrepancy: f64,
    pub zpa_discrepancy: f64,
}

impl EquivalenceReport {
    pub fn max_discrepancy(&self) -> f64 {
        self.condition_discrepancy.max(self.zpa_discrepancy)
    }
}

/// Evaluates the tank-route and unified-route conditions of `x` and the
/// relative discrepancy between them.
///
/// The ZPA comparison is meaningful when the unified output conditions hold
/// (then `split_inconsistency` is zero); otherwise the ZPA discrepancy equals
/// the split inconsistency.
pub fn equivalence_check(x: &SspReactances) -> Result<EquivalenceReport> {
    let scale = x.magnitude();
    let rel = |a: f64, b: f64| (a - b).abs() / scale;
    match x.mode {
        Mode::Cc => {
            let u = unified_from_cc(x)?;
            let r = unified_cc_residuals(&u, x)?;
            let p = u.x2()?;
            let x1_x2 = nonzero(x.x1 + x.x2, scale, "X1 + X2")?;
            let condition_unified = (x.x2 - p) * (x.x1 + x.x3 + x.x4) / x1_x2;
            let sum = nonzero(u.x2a + u.x2b, scale, "X2a + X2b")?;
            let zpa_unified = (r.zpa + u.x2a * (u.x3a + u.x2b)) / sum;
            let condition_tank = cc_residual(x)?;
            let zpa_tank = zpa_cc_residual(x)?;
            Ok(EquivalenceReport {
                mode: Mode::Cc,
                condition_tank,
                condition_unified,
                zpa_tank,
                zpa_unified,
                split_inconsistency: rel(p, x.x2),
                condition_discrepancy: rel(condition_unified, condition_tank),
                zpa_discrepancy: rel(zpa_unified, zpa_tank),
            })
        }
        Mode::Cv => {
            let u = unified_from_cv(x)?;
            let r = unified_cv_residuals(&u, x)?;
            let p = u.x2()?;
            let x1_x2 = nonzero(x.x1 + x.x2, scale, "X1' + X2'")?;
            let condition_unified = (x.x2 - p) * (x.x1 + x.x3) / x1_x2;
            let sum = nonzero(u.x2a + u.x2b, scale, "X2a' + X2b'")?;
            let zpa_unified = (r.zpa + u.x2a * (x.x3 + u.x2b)) / sum;
            let condition_tank = cv_residual(x)?;
            let zpa_tank = zpa_cv_residual(x)?;
            Ok(EquivalenceReport {
                mode: Mode::Cv,
                condition_tank,
                condition_unified,
                zpa_tank,
                zpa_unified,
                split_inconsistency: rel(p, x.x2),
                condition_discrepancy: rel(condition_unified, condition_tank),
                zpa_discrepancy: rel(zpa_unified, zpa_tank),
            })
        }
    }
}

/// Ranges of the random draws used by [`equivalence_monte_carlo`].
pub const DRAW_INDUCTANCE_RANGE: (f64, f64) = (1e-6, 1e-3);
pub const DRAW_CAPACITANCE_RANGE: (f64, f64) = (1e-9, 1e-6);
pub const DRAW_FREQUENCY_RANGE_HZ: (f64, f64) = (1e4, 1e6);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceDraw {
    pub design: SspDesign,
    pub omega: Frequency,
    pub mode: Mode,
    /// Arm reactances with the adjusted arm set to the exact value that
    /// satisfies the output condition. Re-deriving them from `design` adds
    /// the rounding of `ωL - 1/(ωC)`, which can cancel heavily.
    pub reactances: SspReactances,
}

fn log_uniform<R: Rng>(rng: &mut R, (lo, hi): (f64, f64)) -> f64 {
    (rng.gen_range(lo.ln()..hi.ln())).exp()
}

/// Random S-SP operating point satisfying the output condition of `mode`.
///
/// Inductances, capacitances and frequency are log-uniform over the
/// `DRAW_*` ranges. The output condition is then imposed exactly by
/// recomputing X4 and C_sp (CC) or X1' and C_p (CV); draws where that needs
/// a non-positive capacitance are rejected and redrawn.
pub fn conditioned_draw<R: Rng>(rng: &mut R, mode: Mode) -> EquivalenceDraw {
    loop {
        let l_lp = log_uniform(rng, DRAW_INDUCTANCE_RANGE);
        let l_ls = log_uniform(rng, DRAW_INDUCTANCE_RANGE);
        let l_m = log_uniform(rng, DRAW_INDUCTANCE_RANGE);
        let c_p = log_uniform(rng, DRAW_CAPACITANCE_RANGE);
        let c_ss = log_uniform(rng, DRAW_CAPACITANCE_RANGE);
        let c_sp = log_uniform(rng, DRAW_CAPACITANCE_RANGE);
        let f = log_uniform(rng, DRAW_FREQUENCY_RANGE_HZ);
        let Ok(coils) = CoupledCoils::new(l_lp, l_ls, l_m) else {
            continue;
        };
        let Ok(omega) = Frequency::from_hz(f) else {
            continue;
        };
        let w = omega.rad_per_s();
        let x = eval_ssp_reactances(&coils, c_p, c_ss, c_sp, omega, mode);
        let Ok(p) = parallel(x.x1, x.x2, "draw") else {
            continue;
        };
        let (c_p, c_sp, exact) = match mode {
            Mode::Cc => {
                let x4 = -(p + x.x3);
                if x4.is_nan() || x4 >= 0.0 {
                    continue;
                }
                (c_p, -1.0 / (w * x4), SspReactances { x4, ..x })
            }
            Mode::Cv => {
                let Ok(p23) = parallel(x.x2, x.x3, "draw") else {
                    continue;
                };
                // X1' = -X2'X3'/(X2'+X3') and X1' = ωL_lp - 1/(ωC_p).
                let cap_reactance = w * l_lp + p23;
                if cap_reactance.is_nan() || cap_reactance <= 0.0 {
                    continue;
                }
                (1.0 / (w * cap_reactance), c_sp, SspReactances { x1: -p23, ..x })
            }
        };
        if let Ok(design) = SspDesign::new(coils, c_p, c_ss, c_sp) {
            return EquivalenceDraw {
                design,
                omega,
                mode,
                reactances: exact,
            };
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloReport {
    pub draws: usize,
    pub seed: u64,
    /// Checks evaluated (one CC and one CV per draw, minus skipped).
    pub checked: usize,
    /// Checks skipped because a division in either route degenerated.
    pub skipped: usize,
    pub max_discrepancy: f64,
    pub max_split_inconsistency: f64,
    pub worst: Option<EquivalenceDraw>,
}

/// Runs [`equivalence_check`] in both modes on `draws` seeded random
/// operating points that satisfy the respective output condition.
pub fn equivalence_monte_carlo(draws: usize, seed: u64) -> MonteCarloReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = MonteCarloReport {
        draws,
        seed,
        checked: 0,
        skipped: 0,
        max_discrepancy: 0.0,
        max_split_inconsistency: 0.0,
        worst: None,
    };
    for _ in 0..draws {
        for mode in [Mode::Cc, Mode::Cv] {
            let draw = conditioned_draw(&mut rng, mode);
            match equivalence_check(&draw.reactances) {
                Ok(r) => {
                    report.checked += 1;
                    let d = r.max_discrepancy().max(r.split_inconsistency);
                    if d > report.max_discrepancy || report.worst.is_none() {
                        report.max_discrepancy = report.max_discrepancy.max(d);
                        report.worst = Some(draw);
                    }
                    report.max_split_inconsistency = report.max_split_inconsistency.max(r.split_inconsistency);
                }
                Err(_) => report.skipped += 1,
            }
        }
    }
    report
}
