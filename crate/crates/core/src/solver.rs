//! S-SP component solver and an independent sweep-based oracle.
//!
//! The CC frequency is a design input. ZPA_CC fixes C_ss in closed form;
//! the remaining unknowns (C_p, C_sp, ω_cv) are the roots of
//!
//! ```text
//! CC@ω_cc:  X1·X2/(X1+X2) + X3 + X4 = 0
//! CV@ω_cv:  X1'·X2'/(X1'+X2') + X3' = 0
//! ZPA_CV@ω_cv:  X2' + X3' + X4' = 0
//! ```
//!
//! solved by damped Newton iteration in log coordinates from a grid of
//! starting points. Residuals are divided by `ω_cc·L_M`.

use nalgebra::{Matrix3, Vector3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::element::{CoupledCoils, Frequency};
use crate::error::{positive, Error, Result};
use crate::harness::{load_metrics, load_response, log_grid, relative_spread, NetworkFamily, Tolerances};
use crate::network::SspDesign;
use crate::ssp::{cc_residual, cv_residual, eval_ssp_reactances, zpa_cc_residual, zpa_cv_residual};
use crate::Mode;

/// C_ss from `X2 + X3 = 0` at the CC frequency: `1/(ω_cc²·(L_M + L_ls))`.
pub fn solve_css(coils: &CoupledCoils, omega_cc: Frequency) -> f64 {
    let w = omega_cc.rad_per_s();
    1.0 / (w * w * (coils.l_m() + coils.l_ls()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignSpec {
    pub coils: CoupledCoils,
    pub omega_cc: Frequency,
    /// Loads used only for the verification metrics of each solution.
    pub loads: Vec<f64>,
    pub c_p_bounds: (f64, f64),
    pub c_sp_bounds: (f64, f64),
    /// Bounds on ω_cv / ω_cc for the starting grid.
    pub omega_cv_ratio_bounds: (f64, f64),
    /// Relative half-width of the band around ω_cc excluded from ω_cv.
    pub excluded_band: f64,
    pub starts_per_axis: usize,
}

impl DesignSpec {
    /// Spec with default search bounds: capacitors within two decades of
    /// `1/(ω_cc²·L_M)`, ω_cv within `[0.3, 3]·ω_cc` outside a ±1% band, and
    /// an 8×8×8 starting grid.
    pub fn new(coils: CoupledCoils, omega_cc: Frequency, loads: Vec<f64>) -> Self {
        let w = omega_cc.rad_per_s();
        let c_nat = 1.0 / (w * w * coils.l_m());
        let bounds = (c_nat / 100.0, c_nat * 100.0);
        Self {
            coils,
            omega_cc,
            loads,
            c_p_bounds: bounds,
            c_sp_bounds: bounds,
            omega_cv_ratio_bounds: (0.3, 3.0),
            excluded_band: 0.01,
            starts_per_axis: 8,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bound = |name: &'static str, (lower, upper): (f64, f64)| {
            if lower > 0.0 && lower < upper && upper.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidBounds { name, lower, upper })
            }
        };
        bound("c_p", self.c_p_bounds)?;
        bound("c_sp", self.c_sp_bounds)?;
        bound("omega_cv_ratio", self.omega_cv_ratio_bounds)?;
        if !(self.excluded_band >= 0.0 && self.excluded_band < 1.0) {
            return Err(Error::InvalidParameter {
                name: "excluded_band",
                value: self.excluded_band,
                reason: "must lie in [0, 1)",
            });
        }
        if self.starts_per_axis == 0 {
            return Err(Error::InvalidParameter {
                name: "starts_per_axis",
                value: 0.0,
                reason: "must be at least 1",
            });
        }
        if self.loads.is_empty() {
            return Err(Error::NoLoads);
        }
        for &r in &self.loads {
            positive("r_ac", r)?;
        }
        Ok(())
    }

    fn norm(&self) -> f64 {
        self.omega_cc.rad_per_s() * self.coils.l_m()
    }

    fn in_excluded_band(&self, omega_cv: f64) -> bool {
        ((omega_cv / self.omega_cc.rad_per_s()) - 1.0).abs() <= self.excluded_band
    }
}

/// The four condition residuals, each divided by `ω_cc·L_M`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignResiduals {
    pub cc: f64,
    pub zpa_cc: f64,
    pub cv: f64,
    pub zpa_cv: f64,
}

impl DesignResiduals {
    pub fn max_abs(&self) -> f64 {
        [self.cc, self.zpa_cc, self.cv, self.zpa_cv]
            .into_iter()
            .fold(0.0, |m, r| m.max(r.abs()))
    }
}

/// Load-independence and ZPA figures of a solved design.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignMetrics {
    pub max_abs_theta_in_cc_deg: f64,
    pub max_abs_theta_in_cv_deg: f64,
    /// Spread of |I_o/V_in| over the loads at ω_cc.
    pub current_spread_cc: f64,
    /// Spread of |V_o/V_in| over the loads at ω_cv.
    pub voltage_spread_cv: f64,
    /// |I_o/V_in| at ω_cc (siemens), first load.
    pub transconductance_cc: f64,
    /// |V_o/V_in| at ω_cv, first load.
    pub voltage_gain_cv: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignSolution {
    pub design: SspDesign,
    pub omega_cc: Frequency,
    pub omega_cv: Frequency,
    pub residuals: DesignResiduals,
    pub metrics: DesignMetrics,
}

impl DesignSolution {
    /// Evaluates residuals and metrics of a given design.
    pub fn evaluate(design: SspDesign, omega_cc: Frequency, omega_cv: Frequency, loads: &[f64]) -> Result<Self> {
        let norm = omega_cc.rad_per_s() * design.coils.l_m();
        let x_cc = design.reactances(omega_cc, Mode::Cc);
        let x_cv = design.reactances(omega_cv, Mode::Cv);
        let residuals = DesignResiduals {
            cc: cc_residual(&x_cc)? / norm,
            zpa_cc: zpa_cc_residual(&x_cc)? / norm,
            cv: cv_residual(&x_cv)? / norm,
            zpa_cv: zpa_cv_residual(&x_cv)? / norm,
        };
        let cc = load_metrics(&design, omega_cc, loads)?;
        let cv = load_metrics(&design, omega_cv, loads)?;
        let first = |omega| -> Result<_> {
            let p = load_response(&design, omega, &loads[..1])?[0];
            Ok(p)
        };
        let p_cc = first(omega_cc)?;
        let p_cv = first(omega_cv)?;
        Ok(Self {
            design,
            omega_cc,
            omega_cv,
            residuals,
            metrics: DesignMetrics {
                max_abs_theta_in_cc_deg: cc.max_abs_theta_in_deg,
                max_abs_theta_in_cv_deg: cv.max_abs_theta_in_deg,
                current_spread_cc: cc.current_spread,
                voltage_spread_cv: cv.voltage_spread,
                transconductance_cc: (p_cc.i_o / p_cc.v_in).norm(),
                voltage_gain_cv: (p_cv.v_o / p_cv.v_in).norm(),
            },
        })
    }

    pub fn passes(&self, tol: &Tolerances) -> bool {
        let m = &self.metrics;
        self.residuals.max_abs() <= tol.residual
            && m.max_abs_theta_in_cc_deg <= tol.angle_deg
            && m.max_abs_theta_in_cv_deg <= tol.angle_deg
            && m.current_spread_cc <= tol.spread
            && m.voltage_spread_cv <= tol.spread
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOutcome {
    /// Distinct solutions sorted by ω_cv.
    pub solutions: Vec<DesignSolution>,
    pub starts: usize,
    pub converged_starts: usize,
    /// Smallest normalised residual norm reached by any start.
    pub best_residual: f64,
}

const NEWTON_MAX_ITER: usize = 100;
const NEWTON_TARGET: f64 = 1e-12;
const ACCEPT_RESIDUAL: f64 = 1e-9;
const FD_STEP: f64 = 1e-6;
const MAX_LOG_STEP: f64 = 1.0;
const DEDUP_RELATIVE: f64 = 1e-6;

struct Problem<'a> {
    spec: &'a DesignSpec,
    c_ss: f64,
    norm: f64,
}

impl Problem<'_> {
    /// Unknowns are `(ln C_p, ln C_sp, ln ω_cv)`.
    fn residual(&self, y: &Vector3<f64>) -> Option<Vector3<f64>> {
        let (c_p, c_sp, w_cv) = (y[0].exp(), y[1].exp(), y[2].exp());
        if !(c_p.is_finite() && c_sp.is_finite() && w_cv.is_finite()) || c_p == 0.0 || c_sp == 0.0 || w_cv == 0.0 {
            return None;
        }
        let coils = &self.spec.coils;
        let omega_cv = Frequency::new(w_cv).ok()?;
        let x_cc = eval_ssp_reactances(coils, c_p, self.c_ss, c_sp, self.spec.omega_cc, Mode::Cc);
        let x_cv = eval_ssp_reactances(coils, c_p, self.c_ss, c_sp, omega_cv, Mode::Cv);
        let r = Vector3::new(
            cc_residual(&x_cc).ok()?,
            cv_residual(&x_cv).ok()?,
            zpa_cv_residual(&x_cv).ok()?,
        ) / self.norm;
        r.iter().all(|v| v.is_finite()).then_some(r)
    }

    fn jacobian(&self, y: &Vector3<f64>) -> Option<Matrix3<f64>> {
        let mut j = Matrix3::zeros();
        for k in 0..3 {
            let mut yp = *y;
            let mut ym = *y;
            yp[k] += FD_STEP;
            ym[k] -= FD_STEP;
            let col = (self.residual(&yp)? - self.residual(&ym)?) / (2.0 * FD_STEP);
            j.set_column(k, &col);
        }
        Some(j)
    }

    /// Damped Newton from `y0`. Returns the final iterate and its residual
    /// norm, restarting from a perturbed point on a singular Jacobian.
    fn newton(&self, y0: Vector3<f64>) -> Option<(Vector3<f64>, f64)> {
        let mut y = y0;
        let mut r = self.residual(&y)?;
        let mut norm = r.amax();
        let mut restarts = 0;
        let mut iter = 0;
        while iter < NEWTON_MAX_ITER && norm >= NEWTON_TARGET {
            iter += 1;
            let step = self.jacobian(&y).and_then(|j| j.lu().solve(&(-r)));
            let Some(mut step) = step.filter(|s| s.iter().all(|v| v.is_finite())) else {
                if restarts == 3 {
                    break;
                }
                restarts += 1;
                y += Vector3::new(0.05, -0.07, 0.03) * restarts as f64;
                r = self.residual(&y)?;
                norm = r.amax();
                continue;
            };
            let longest = step.amax();
            if longest > MAX_LOG_STEP {
                step *= MAX_LOG_STEP / longest;
            }
            let mut damping = 1.0;
            let mut accepted = false;
            while damping > 1e-6 {
                let trial = y + step * damping;
                if let Some(rt) = self.residual(&trial) {
                    if rt.amax() < norm {
                        y = trial;
                        r = rt;
                        norm = rt.amax();
                        accepted = true;
                        break;
                    }
                }
                damping *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        Some((y, norm))
    }
}

fn log_points((lo, hi): (f64, f64), n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![(lo * hi).sqrt().ln()];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

fn starting_grid(spec: &DesignSpec) -> Vec<Vector3<f64>> {
    let n = spec.starts_per_axis;
    let w_cc = spec.omega_cc.rad_per_s();
    let (r_lo, r_hi) = spec.omega_cv_ratio_bounds;
    // Half the ω_cv starts below the excluded band, half above (when the
    // bounds straddle ω_cc).
    let below = (r_lo, (1.0 - spec.excluded_band).min(r_hi));
    let above = ((1.0 + spec.excluded_band).max(r_lo), r_hi);
    let mut ratios = Vec::new();
    let split = |range: (f64, f64)| range.0 < range.1;
    match (split(below), split(above)) {
        (true, true) => {
            let nb = n / 2;
            ratios.extend(log_points(below, nb.max(1)));
            ratios.extend(log_points(above, (n - nb).max(1)));
        }
        (true, false) => ratios.extend(log_points(below, n)),
        _ => ratios.extend(log_points(above, n)),
    }
    let c_p = log_points(spec.c_p_bounds, n);
    let c_sp = log_points(spec.c_sp_bounds, n);
    let mut starts = Vec::with_capacity(n * n * ratios.len());
    for &a in &c_p {
        for &b in &c_sp {
            for &r in &ratios {
                starts.push(Vector3::new(a, b, r + w_cc.ln()));
            }
        }
    }
    starts
}

fn same_solution(a: &DesignSolution, b: &DesignSolution) -> bool {
    let close = |x: f64, y: f64| (x - y).abs() <= DEDUP_RELATIVE * x.abs().max(y.abs());
    close(a.design.c_p, b.design.c_p)
        && close(a.design.c_sp, b.design.c_sp)
        && close(a.omega_cv.rad_per_s(), b.omega_cv.rad_per_s())
}

/// Solves all four S-SP conditions from the multi-start grid.
///
/// Returns every distinct physical root whose normalised residual is below
/// `1e-9`, sorted by ω_cv; an empty list carries the best residual reached.
pub fn solve_design(spec: &DesignSpec) -> Result<SolveOutcome> {
    spec.validate()?;
    let c_ss = solve_css(&spec.coils, spec.omega_cc);
    let problem = Problem {
        spec,
        c_ss,
        norm: spec.norm(),
    };
    let starts = starting_grid(spec);
    let results: Vec<Option<(Vector3<f64>, f64)>> = starts.par_iter().map(|y0| problem.newton(*y0)).collect();

    let best_residual = results.iter().flatten().fold(f64::INFINITY, |m, (_, n)| m.min(*n));
    let mut converged_starts = 0;
    let mut solutions: Vec<DesignSolution> = Vec::new();
    for (y, norm) in results.into_iter().flatten() {
        if norm >= ACCEPT_RESIDUAL {
            continue;
        }
        let w_cv = y[2].exp();
        if spec.in_excluded_band(w_cv) {
            continue;
        }
        let Ok(design) = SspDesign::new(spec.coils, y[0].exp(), c_ss, y[1].exp()) else {
            continue;
        };
        let Ok(omega_cv) = Frequency::new(w_cv) else {
            continue;
        };
        let Ok(sol) = DesignSolution::evaluate(design, spec.omega_cc, omega_cv, &spec.loads) else {
            continue;
        };
        if sol.residuals.max_abs() >= ACCEPT_RESIDUAL {
            continue;
        }
        converged_starts += 1;
        if !solutions.iter().any(|s| same_solution(s, &sol)) {
            solutions.push(sol);
        }
    }
    solutions.sort_by(|a, b| a.omega_cv.rad_per_s().total_cmp(&b.omega_cv.rad_per_s()));
    Ok(SolveOutcome {
        solutions,
        starts: starts.len(),
        converged_starts,
        best_residual,
    })
}

/// Sweep settings of [`oracle_verify`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub omega_min: Frequency,
    pub omega_max: Frequency,
    pub points: usize,
    /// Relative distance within which a ZPA root and a spread minimum coincide.
    pub coincidence: f64,
    /// Relative bracket width at which bisection stops.
    pub bisection_tol: f64,
}

impl OracleConfig {
    /// 4000 log-spaced points over `[0.2, 5]·omega`.
    pub fn around(omega: Frequency) -> Result<Self> {
        Ok(Self {
            omega_min: omega.scaled(0.2)?,
            omega_max: omega.scaled(5.0)?,
            points: 4000,
            coincidence: 1e-4,
            bisection_tol: 1e-13,
        })
    }
}

/// A refined local minimum of a load-spread metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpreadMinimum {
    pub omega: f64,
    pub spread: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    /// Roots of Im(Z_in) shared by every load (within the coincidence
    /// tolerance), taken from the first load.
    pub zpa_roots: Vec<f64>,
    /// Refined roots of Im(Z_in) for each load.
    pub roots_per_load: Vec<Vec<f64>>,
    pub current_minima: Vec<SpreadMinimum>,
    pub voltage_minima: Vec<SpreadMinimum>,
    /// ZPA roots coinciding with a minimum of the |I_o/V_in| spread.
    pub cc_frequencies: Vec<f64>,
    /// ZPA roots coinciding with a minimum of the |V_o/V_in| spread.
    pub cv_frequencies: Vec<f64>,
}

impl OracleReport {
    fn confirms(found: &[f64], omega: Frequency, tol: f64) -> bool {
        let w = omega.rad_per_s();
        found.iter().any(|f| ((f - w) / w).abs() <= tol)
    }

    pub fn confirms_cc(&self, omega: Frequency, tol: f64) -> bool {
        Self::confirms(&self.cc_frequencies, omega, tol)
    }

    pub fn confirms_cv(&self, omega: Frequency, tol: f64) -> bool {
        Self::confirms(&self.cv_frequencies, omega, tol)
    }
}

fn im_z_in<F: NetworkFamily + ?Sized>(family: &F, w: f64, r_ac: f64) -> Option<(f64, f64)> {
    let omega = Frequency::new(w).ok()?;
    let p = load_response(family, omega, &[r_ac]).ok()?;
    Some((p[0].z_in.im, p[0].z_in.norm()))
}

/// Sign changes of Im(Z_in) on the grid, refined by bisection. Poles of
/// Z_in also change sign; they are rejected by requiring a small final
/// |Im(Z_in)|/|Z_in|.
fn zpa_roots<F: NetworkFamily + ?Sized>(family: &F, grid: &[f64], r_ac: f64, tol: f64) -> Vec<f64> {
    let values: Vec<Option<f64>> = grid.iter().map(|&w| im_z_in(family, w, r_ac).map(|v| v.0)).collect();
    let mut roots = Vec::new();
    for i in 1..grid.len() {
        let (Some(fa), Some(fb)) = (values[i - 1], values[i]) else {
            continue;
        };
        if fa == 0.0 {
            roots.push(grid[i - 1]);
            continue;
        }
        if fa.signum() == fb.signum() || fb == 0.0 {
            continue;
        }
        let (mut lo, mut hi, mut f_lo) = (grid[i - 1], grid[i], fa);
        let mut ok = true;
        while (hi - lo) > tol * lo {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            match im_z_in(family, mid, r_ac) {
                Some((0.0, _)) => {
                    lo = mid;
                    hi = mid;
                }
                Some((f, _)) if f.signum() == f_lo.signum() => {
                    lo = mid;
                    f_lo = f;
                }
                Some(_) => hi = mid,
                None => {
                    ok = false;
                    break;
                }
            }
        }
        let root = 0.5 * (lo + hi);
        if let (true, Some((im, mag))) = (ok, im_z_in(family, root, r_ac)) {
            if im.abs() <= 1e-6 * mag {
                roots.push(root);
            }
        }
    }
    roots
}

fn spread_at<F: NetworkFamily + ?Sized>(family: &F, w: f64, loads: &[f64], mode: Mode) -> f64 {
    let Ok(omega) = Frequency::new(w) else {
        return f64::INFINITY;
    };
    match load_response(family, omega, loads) {
        Ok(sols) => {
            let v: Vec<f64> = sols
                .iter()
                .map(|p| match mode {
                    Mode::Cc => (p.i_o / p.v_in).norm(),
                    Mode::Cv => (p.v_o / p.v_in).norm(),
                })
                .collect();
            relative_spread(&v)
        }
        Err(_) => f64::INFINITY,
    }
}

/// Local minima of the spread over the grid, refined by golden-section
/// search in log ω between the neighbouring grid points.
fn spread_minima<F: NetworkFamily + ?Sized>(family: &F, grid: &[f64], loads: &[f64], mode: Mode) -> Vec<SpreadMinimum> {
    let s: Vec<f64> = grid.iter().map(|&w| spread_at(family, w, loads, mode)).collect();
    let mut minima = Vec::new();
    for i in 1..grid.len().saturating_sub(1) {
        if !(s[i].is_finite() && s[i] <= s[i - 1] && s[i] < s[i + 1]) {
            continue;
        }
        let f = |x: f64| spread_at(family, x.exp(), loads, mode);
        let (mut a, mut b) = (grid[i - 1].ln(), grid[i + 1].ln());
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let mut c = b - g * (b - a);
        let mut d = a + g * (b - a);
        let (mut fc, mut fd) = (f(c), f(d));
        for _ in 0..200 {
            if (b - a) < 1e-14 {
                break;
            }
            if fc < fd {
                b = d;
                d = c;
                fd = fc;
                c = b - g * (b - a);
                fc = f(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + g * (b - a);
                fd = f(d);
            }
        }
        let x = 0.5 * (a + b);
        minima.push(SpreadMinimum {
            omega: x.exp(),
            spread: f(x),
        });
    }
    minima
}

/// Locates CC-ZPA and CV-ZPA frequencies of a design without using any
/// condition formula: load-independent zeros of Im(Z_in) that coincide with
/// minima of the output-current or output-voltage load spread.
pub fn oracle_verify(design: &SspDesign, loads: &[f64], config: &OracleConfig) -> Result<OracleReport> {
    if loads.len() < 2 {
        return Err(Error::InvalidParameter {
            name: "loads",
            value: loads.len() as f64,
            reason: "the oracle needs at least two loads",
        });
    }
    for &r in loads {
        positive("r_ac", r)?;
    }
    let grid: Vec<f64> = log_grid(config.omega_min, config.omega_max, config.points)?
        .into_iter()
        .map(Frequency::rad_per_s)
        .collect();

    let roots_per_load: Vec<Vec<f64>> = loads
        .par_iter()
        .map(|&r| zpa_roots(design, &grid, r, config.bisection_tol))
        .collect();
    let near = |a: f64, b: f64| ((a - b) / b).abs() <= config.coincidence;
    let zpa_roots: Vec<f64> = roots_per_load[0]
        .iter()
        .copied()
        .filter(|&r| roots_per_load[1..].iter().all(|rs| rs.iter().any(|&o| near(o, r))))
        .collect();

    let (current_minima, voltage_minima) = rayon::join(
        || spread_minima(design, &grid, loads, Mode::Cc),
        || spread_minima(design, &grid, loads, Mode::Cv),
    );
    let matches = |minima: &[SpreadMinimum]| -> Vec<f64> {
        zpa_roots
            .iter()
            .copied()
            .filter(|&r| minima.iter().any(|m| near(r, m.omega)))
            .collect()
    };
    Ok(OracleReport {
        cc_frequencies: matches(&current_minima),
        cv_frequencies: matches(&voltage_minima),
        zpa_roots,
        roots_per_load,
        current_minima,
        voltage_minima,
    })
}
