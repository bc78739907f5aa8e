//! Project configuration and design files.
//!
//! Both are single JSON documents with snake_case keys and SI base units
//! (H, F, Hz, Ω). Unknown keys are rejected so that typos surface as errors.

use std::path::{Path, PathBuf};

use ipt_tank::harness::Tolerances;
use ipt_tank::{CoupledCoils, DesignSpec, Frequency, SspDesign};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Coil block in either self-inductance or T-model form. Exactly one form
/// must be complete; mixing keys of both is an error.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoilBlock {
    pub l1: Option<f64>,
    pub l2: Option<f64>,
    pub k: Option<f64>,
    pub l_lp: Option<f64>,
    pub l_ls: Option<f64>,
    pub l_m: Option<f64>,
}

impl CoilBlock {
    pub fn resolve(&self, field: &str) -> Result<CoupledCoils, CliError> {
        let self_form = [self.l1, self.l2, self.k];
        let t_form = [self.l_lp, self.l_ls, self.l_m];
        let any = |xs: &[Option<f64>]| xs.iter().any(Option::is_some);
        match (any(&self_form), any(&t_form)) {
            (true, true) => Err(CliError::invalid(format!(
                "{field}: give either {{l1, l2, k}} or {{l_lp, l_ls, l_m}}, not both"
            ))),
            (false, false) => Err(CliError::invalid(format!(
                "{field}: missing; give {{l1, l2, k}} or {{l_lp, l_ls, l_m}}"
            ))),
            (true, false) => {
                let l1 = required(self.l1, &format!("{field}.l1"))?;
                let l2 = required(self.l2, &format!("{field}.l2"))?;
                let k = required(self.k, &format!("{field}.k"))?;
                CoupledCoils::from_self_inductances(l1, l2, k).map_err(|e| CliError::invalid(format!("{field}: {e}")))
            }
            (false, true) => {
                let l_lp = required(self.l_lp, &format!("{field}.l_lp"))?;
                let l_ls = required(self.l_ls, &format!("{field}.l_ls"))?;
                let l_m = required(self.l_m, &format!("{field}.l_m"))?;
                CoupledCoils::new(l_lp, l_ls, l_m).map_err(|e| CliError::invalid(format!("{field}: {e}")))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Capacitors {
    pub c_p: Option<f64>,
    pub c_ss: Option<f64>,
    pub c_sp: Option<f64>,
}

/// Optional overrides of the solver search space.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSettings {
    pub c_p_bounds: Option<[f64; 2]>,
    pub c_sp_bounds: Option<[f64; 2]>,
    pub omega_cv_ratio_bounds: Option<[f64; 2]>,
    pub excluded_band: Option<f64>,
    pub starts_per_axis: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceSettings {
    pub spread: Option<f64>,
    pub angle_deg: Option<f64>,
    pub residual: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectConfig {
    pub coils: CoilBlock,
    /// CC operating frequency in Hz.
    pub f_cc: f64,
    pub loads: Vec<f64>,
    #[serde(default)]
    pub capacitors: Option<Capacitors>,
    /// CV operating frequency in Hz, used with fixed capacitors.
    #[serde(default)]
    pub f_cv: Option<f64>,
    #[serde(default)]
    pub solver: SolverSettings,
    #[serde(default)]
    pub tolerances: ToleranceSettings,
    /// Output directory when `--out` is not given.
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

/// A fully validated configuration.
#[derive(Debug, Clone)]
pub struct Project {
    pub coils: CoupledCoils,
    pub omega_cc: Frequency,
    pub loads: Vec<f64>,
    pub fixed: Option<DesignPoint>,
    pub spec: DesignSpec,
    pub tolerances: Tolerances,
    pub output_dir: Option<PathBuf>,
}

/// Component values plus operating frequencies.
#[derive(Debug, Clone, Copy)]
pub struct DesignPoint {
    pub design: SspDesign,
    pub omega_cc: Frequency,
    /// Absent when only the CC side is known.
    pub omega_cv: Option<Frequency>,
}

fn required(value: Option<f64>, field: &str) -> Result<f64, CliError> {
    value.ok_or_else(|| CliError::invalid(format!("{field}: missing")))
}

fn positive(value: f64, field: &str) -> Result<f64, CliError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(CliError::invalid(format!(
            "{field}: must be positive and finite, got {value}"
        )))
    }
}

fn bounds(value: Option<[f64; 2]>, default: (f64, f64), field: &str) -> Result<(f64, f64), CliError> {
    let Some([lo, hi]) = value else {
        return Ok(default);
    };
    positive(lo, &format!("{field}[0]"))?;
    positive(hi, &format!("{field}[1]"))?;
    if lo >= hi {
        return Err(CliError::invalid(format!(
            "{field}: lower bound {lo} is not below upper bound {hi}"
        )));
    }
    Ok((lo, hi))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::invalid(format!("{}: cannot read: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))
}

impl ProjectConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        read_json(path)
    }

    pub fn validate(&self) -> Result<Project, CliError> {
        let coils = self.coils.resolve("coils")?;
        let omega_cc =
            Frequency::from_hz(positive(self.f_cc, "f_cc")?).map_err(|e| CliError::invalid(format!("f_cc: {e}")))?;
        if self.loads.is_empty() {
            return Err(CliError::invalid("loads: must contain at least one load"));
        }
        for (i, &r) in self.loads.iter().enumerate() {
            positive(r, &format!("loads[{i}]"))?;
        }

        let mut spec = DesignSpec::new(coils, omega_cc, self.loads.clone());
        let s = &self.solver;
        spec.c_p_bounds = bounds(s.c_p_bounds, spec.c_p_bounds, "solver.c_p_bounds")?;
        spec.c_sp_bounds = bounds(s.c_sp_bounds, spec.c_sp_bounds, "solver.c_sp_bounds")?;
        spec.omega_cv_ratio_bounds = bounds(
            s.omega_cv_ratio_bounds,
            spec.omega_cv_ratio_bounds,
            "solver.omega_cv_ratio_bounds",
        )?;
        if let Some(b) = s.excluded_band {
            if !(0.0..1.0).contains(&b) {
                return Err(CliError::invalid(format!(
                    "solver.excluded_band: must lie in [0, 1), got {b}"
                )));
            }
            spec.excluded_band = b;
        }
        if let Some(n) = s.starts_per_axis {
            if n == 0 {
                return Err(CliError::invalid("solver.starts_per_axis: must be at least 1"));
            }
            spec.starts_per_axis = n;
        }

        let defaults = Tolerances::default();
        let t = &self.tolerances;
        let tolerances = Tolerances {
            spread: positive(t.spread.unwrap_or(defaults.spread), "tolerances.spread")?,
            angle_deg: positive(t.angle_deg.unwrap_or(defaults.angle_deg), "tolerances.angle_deg")?,
            residual: positive(t.residual.unwrap_or(defaults.residual), "tolerances.residual")?,
        };

        let fixed = match self.capacitors {
            Some(c) => Some(design_point(
                coils,
                [c.c_p, c.c_ss, c.c_sp],
                "capacitors",
                omega_cc,
                self.f_cv,
                "f_cv",
            )?),
            None => {
                if let Some(f) = self.f_cv {
                    positive(f, "f_cv")?;
                }
                None
            }
        };

        Ok(Project {
            coils,
            omega_cc,
            loads: self.loads.clone(),
            fixed,
            spec,
            tolerances,
            output_dir: self.output_dir.clone(),
        })
    }
}

fn design_point(
    coils: CoupledCoils,
    [c_p, c_ss, c_sp]: [Option<f64>; 3],
    prefix: &str,
    omega_cc: Frequency,
    f_cv: Option<f64>,
    f_cv_field: &str,
) -> Result<DesignPoint, CliError> {
    let c_p = positive(required(c_p, &format!("{prefix}.c_p"))?, &format!("{prefix}.c_p"))?;
    let c_ss = positive(required(c_ss, &format!("{prefix}.c_ss"))?, &format!("{prefix}.c_ss"))?;
    let c_sp = positive(required(c_sp, &format!("{prefix}.c_sp"))?, &format!("{prefix}.c_sp"))?;
    let design = SspDesign::new(coils, c_p, c_ss, c_sp).map_err(|e| CliError::invalid(format!("{prefix}: {e}")))?;
    let omega_cv = f_cv
        .map(|f| {
            positive(f, f_cv_field)?;
            Frequency::from_hz(f).map_err(|e| CliError::invalid(format!("{f_cv_field}: {e}")))
        })
        .transpose()?;
    Ok(DesignPoint {
        design,
        omega_cc,
        omega_cv,
    })
}

/// Design block as written by `solve` and read by `verify`, `sweep` and
/// `equiv`. Coils and `f_cc` fall back to the project configuration.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l_lp: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l_ls: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l_m: Option<f64>,
    pub c_p: Option<f64>,
    pub c_ss: Option<f64>,
    pub c_sp: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_cc: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_cv: Option<f64>,
}

impl DesignFile {
    pub fn from_point(p: &DesignPoint) -> Self {
        let d = &p.design;
        Self {
            l_lp: Some(d.coils.l_lp()),
            l_ls: Some(d.coils.l_ls()),
            l_m: Some(d.coils.l_m()),
            c_p: Some(d.c_p),
            c_ss: Some(d.c_ss),
            c_sp: Some(d.c_sp),
            f_cc: Some(p.omega_cc.hz()),
            f_cv: p.omega_cv.map(Frequency::hz),
        }
    }

    /// Reads either a bare design block or a document with a `design` key
    /// (the `solve` output).
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let value: serde_json::Value = read_json(path)?;
        let block = match value.get("design") {
            Some(inner) => inner.clone(),
            None => value,
        };
        serde_json::from_value(block).map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))
    }

    pub fn resolve(&self, project: &Project) -> Result<DesignPoint, CliError> {
        let coils = if [self.l_lp, self.l_ls, self.l_m].iter().any(Option::is_some) {
            CoilBlock {
                l_lp: self.l_lp,
                l_ls: self.l_ls,
                l_m: self.l_m,
                ..CoilBlock::default()
            }
            .resolve("design")?
        } else {
            project.coils
        };
        let omega_cc = match self.f_cc {
            Some(f) => Frequency::from_hz(positive(f, "design.f_cc")?)
                .map_err(|e| CliError::invalid(format!("design.f_cc: {e}")))?,
            None => project.omega_cc,
        };
        design_point(
            coils,
            [self.c_p, self.c_ss, self.c_sp],
            "design",
            omega_cc,
            self.f_cv,
            "design.f_cv",
        )
    }
}
