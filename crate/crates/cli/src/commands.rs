use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use ipt_tank::harness::{log_grid, Tolerances, VerificationReport};
use ipt_tank::solver::{DesignMetrics, DesignResiduals, OracleConfig};
use ipt_tank::ssp::{equivalence_check, equivalence_monte_carlo, EquivalenceReport, MonteCarloReport};
use ipt_tank::{oracle_verify, solve_design, sweep, verify_cc, verify_cv, Frequency, Mode};
use serde::Serialize;

use crate::config::{DesignFile, DesignPoint, Project, ProjectConfig};
use crate::output::{sweep_csv, write_atomic, write_json};
use crate::CliError;

/// Agreement required between the two equivalence routes.
pub const EQUIVALENCE_TOLERANCE: f64 = 1e-9;

/// Result of a command that ran to completion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    /// 0 on success, 1 when the design or check failed.
    pub code: i32,
    /// Human-readable summary for stdout.
    pub summary: String,
    pub files: Vec<PathBuf>,
}

fn load_project(config: &Path) -> Result<Project, CliError> {
    ProjectConfig::load(config)?.validate()
}

/// `--out` wins; otherwise `output_dir` from the config, taken relative to
/// the config file; otherwise the working directory.
fn output_dir(out: Option<&Path>, project: &Project, config: &Path) -> PathBuf {
    if let Some(o) = out {
        return o.to_path_buf();
    }
    match &project.output_dir {
        Some(d) if d.is_absolute() => d.clone(),
        Some(d) => config.parent().unwrap_or(Path::new(".")).join(d),
        None => PathBuf::from("."),
    }
}

fn design_point(project: &Project, design: Option<&Path>) -> Result<DesignPoint, CliError> {
    match design {
        Some(p) => DesignFile::load(p)?.resolve(project),
        None => project
            .fixed
            .ok_or_else(|| CliError::invalid("no design: pass --design or set capacitors in the config")),
    }
}

fn core_err(context: &str) -> impl Fn(ipt_tank::Error) -> CliError + '_ {
    move |e| CliError::invalid(format!("{context}: {e}"))
}

#[derive(Debug, Clone, Serialize)]
struct OracleSummary {
    cc_confirmed: bool,
    cv_confirmed: bool,
    zpa_roots_rad_s: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
struct SolutionEntry {
    design: DesignFile,
    omega_cc_rad_s: f64,
    omega_cv_rad_s: f64,
    residuals: DesignResiduals,
    metrics: DesignMetrics,
    cc_pass: bool,
    cv_pass: bool,
    verified: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle: Option<OracleSummary>,
}

#[derive(Debug, Clone, Serialize)]
struct SolveFile {
    /// First verified solution, if any.
    design: Option<DesignFile>,
    solutions: Vec<SolutionEntry>,
    starts: usize,
    converged_starts: usize,
    best_residual: f64,
}

/// Solves the S-SP design and writes `solution.json`.
pub fn cmd_solve(config: &Path, out: Option<&Path>) -> Result<Outcome, CliError> {
    let project = load_project(config)?;
    let dir = output_dir(out, &project, config);
    let outcome = solve_design(&project.spec).map_err(core_err("solver"))?;
    let tol = project.tolerances;

    let mut entries = Vec::new();
    for s in &outcome.solutions {
        let cc = verify_cc(&s.design, s.omega_cc, &project.loads, &tol).map_err(core_err("verify"))?;
        let cv = verify_cv(&s.design, s.omega_cv, &project.loads, &tol).map_err(core_err("verify"))?;
        let oracle = if project.loads.len() >= 2 {
            let cfg = OracleConfig::around(s.omega_cc).map_err(core_err("oracle"))?;
            let r = oracle_verify(&s.design, &project.loads, &cfg).map_err(core_err("oracle"))?;
            Some(OracleSummary {
                cc_confirmed: r.confirms_cc(s.omega_cc, cfg.coincidence),
                cv_confirmed: r.confirms_cv(s.omega_cv, cfg.coincidence),
                zpa_roots_rad_s: r.zpa_roots,
            })
        } else {
            None
        };
        let point = DesignPoint {
            design: s.design,
            omega_cc: s.omega_cc,
            omega_cv: Some(s.omega_cv),
        };
        entries.push(SolutionEntry {
            design: DesignFile::from_point(&point),
            omega_cc_rad_s: s.omega_cc.rad_per_s(),
            omega_cv_rad_s: s.omega_cv.rad_per_s(),
            residuals: s.residuals,
            metrics: s.metrics,
            cc_pass: cc.pass,
            cv_pass: cv.pass,
            verified: cc.pass && cv.pass,
            oracle,
        });
    }

    let file = SolveFile {
        design: entries.iter().find(|e| e.verified).map(|e| e.design.clone()),
        solutions: entries,
        starts: outcome.starts,
        converged_starts: outcome.converged_starts,
        best_residual: outcome.best_residual,
    };
    let path = dir.join("solution.json");
    write_json(&path, &file)?;

    let mut summary = String::new();
    let _ = writeln!(
        summary,
        "{} solution(s) from {} starts ({} converged)",
        file.solutions.len(),
        file.starts,
        file.converged_starts
    );
    for e in &file.solutions {
        let d = &e.design;
        let _ = writeln!(
            summary,
            "  C_p = {:.6e} F, C_ss = {:.6e} F, C_sp = {:.6e} F, f_cv = {:.3} Hz, max residual {:.2e}: {}",
            d.c_p.unwrap_or(f64::NAN),
            d.c_ss.unwrap_or(f64::NAN),
            d.c_sp.unwrap_or(f64::NAN),
            d.f_cv.unwrap_or(f64::NAN),
            e.residuals.max_abs(),
            if e.verified { "verified" } else { "FAILED verification" }
        );
    }
    if file.solutions.is_empty() {
        let _ = writeln!(summary, "  best residual reached: {:.3e}", file.best_residual);
    }
    let _ = write!(summary, "wrote {}", path.display());
    Ok(Outcome {
        code: if file.design.is_some() { 0 } else { 1 },
        summary,
        files: vec![path],
    })
}

fn failing(report: &VerificationReport) -> String {
    let names: Vec<&str> = report.failing_checks().map(|c| c.name.as_str()).collect();
    if names.is_empty() {
        "pass".into()
    } else {
        format!("FAIL ({})", names.join(", "))
    }
}

/// Verifies a design in both modes and writes `report_cc.json` and
/// `report_cv.json`.
pub fn cmd_verify(config: &Path, design: Option<&Path>, out: Option<&Path>) -> Result<Outcome, CliError> {
    let project = load_project(config)?;
    let point = design_point(&project, design)?;
    let omega_cv = point
        .omega_cv
        .ok_or_else(|| CliError::invalid("design.f_cv: missing"))?;
    let dir = output_dir(out, &project, config);
    let tol: Tolerances = project.tolerances;
    let cc = verify_cc(&point.design, point.omega_cc, &project.loads, &tol).map_err(core_err("verify"))?;
    let cv = verify_cv(&point.design, omega_cv, &project.loads, &tol).map_err(core_err("verify"))?;
    let (p_cc, p_cv) = (dir.join("report_cc.json"), dir.join("report_cv.json"));
    write_json(&p_cc, &cc)?;
    write_json(&p_cv, &cv)?;

    let mut summary = String::new();
    for (r, label) in [(&cc, "CC"), (&cv, "CV")] {
        let _ = writeln!(summary, "{label} at {:.3} Hz: {}", r.f_hz, failing(r));
        for w in &r.warnings {
            let _ = writeln!(summary, "  warning: {w}");
        }
    }
    let _ = write!(summary, "wrote {} and {}", p_cc.display(), p_cv.display());
    Ok(Outcome {
        code: if cc.pass && cv.pass { 0 } else { 1 },
        summary,
        files: vec![p_cc, p_cv],
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepArgs {
    /// Hz; defaults to `0.2·f_cc`.
    pub fmin: Option<f64>,
    /// Hz; defaults to `5·f_cc`.
    pub fmax: Option<f64>,
    pub points: usize,
}

impl Default for SweepArgs {
    fn default() -> Self {
        Self {
            fmin: None,
            fmax: None,
            points: 2000,
        }
    }
}

/// Sweeps the design over a log-spaced grid for every configured load and
/// writes `sweep.csv`.
pub fn cmd_sweep(
    config: &Path,
    design: Option<&Path>,
    args: SweepArgs,
    out: Option<&Path>,
) -> Result<Outcome, CliError> {
    let project = load_project(config)?;
    let point = design_point(&project, design)?;
    let f_cc = point.omega_cc.hz();
    let fmin = args.fmin.unwrap_or(0.2 * f_cc);
    let fmax = args.fmax.unwrap_or(5.0 * f_cc);
    let lo = Frequency::from_hz(fmin).map_err(|e| CliError::invalid(format!("--fmin: {e}")))?;
    let hi = Frequency::from_hz(fmax).map_err(|e| CliError::invalid(format!("--fmax: {e}")))?;
    if args.points == 0 {
        return Err(CliError::invalid("--points: must be at least 1"));
    }
    let grid = log_grid(lo, hi, args.points).map_err(|e| CliError::invalid(format!("--fmin/--fmax: {e}")))?;
    let rows = sweep(&point.design, &grid, &project.loads).map_err(core_err("sweep"))?;
    let singular = rows.iter().filter(|r| r.record().is_none()).count();
    let path = output_dir(out, &project, config).join("sweep.csv");
    write_atomic(&path, &sweep_csv(&rows)?)?;
    Ok(Outcome {
        code: 0,
        summary: format!(
            "{} rows ({} singular) over {fmin} to {fmax} Hz; wrote {}",
            rows.len(),
            singular,
            path.display()
        ),
        files: vec![path],
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum EquivSource {
    /// Operating points of a configured design: the fixed capacitors (or a
    /// design file) when present, otherwise every solver solution.
    Config { config: PathBuf, design: Option<PathBuf> },
    /// Seeded random draws.
    Random { draws: usize, seed: u64 },
}

#[derive(Debug, Clone, Serialize)]
struct EquivPoint {
    mode: Mode,
    omega_rad_s: f64,
    report: EquivalenceReport,
}

#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
enum EquivFile {
    Points {
        points: Vec<EquivPoint>,
        max_discrepancy: f64,
        pass: bool,
    },
    Random {
        #[serde(flatten)]
        report: MonteCarloReport,
        pass: bool,
    },
}

/// Compares the tank-route and unified-route conditions. Writes
/// `equiv.json` only when `out` is given.
pub fn cmd_equiv(source: &EquivSource, out: Option<&Path>) -> Result<Outcome, CliError> {
    let (file, max, checked) = match source {
        EquivSource::Random { draws, seed } => {
            if *draws == 0 {
                return Err(CliError::invalid("--random: need at least one draw"));
            }
            let report = equivalence_monte_carlo(*draws, *seed);
            let max = report.max_discrepancy;
            let checked = report.checked;
            let pass = checked > 0 && max < EQUIVALENCE_TOLERANCE;
            (EquivFile::Random { report, pass }, max, checked)
        }
        EquivSource::Config { config, design } => {
            let project = load_project(config)?;
            let points: Vec<(Mode, Frequency, ipt_tank::SspDesign)> = match (design.as_deref(), project.fixed) {
                (None, None) => {
                    let out = solve_design(&project.spec).map_err(core_err("solver"))?;
                    out.solutions
                        .iter()
                        .flat_map(|s| [(Mode::Cc, s.omega_cc, s.design), (Mode::Cv, s.omega_cv, s.design)])
                        .collect()
                }
                (d, _) => {
                    let p = design_point(&project, d)?;
                    let mut v = vec![(Mode::Cc, p.omega_cc, p.design)];
                    v.extend(p.omega_cv.map(|w| (Mode::Cv, w, p.design)));
                    v
                }
            };
            let mut entries = Vec::new();
            for (mode, omega, d) in points {
                let report = equivalence_check(&d.reactances(omega, mode)).map_err(core_err("equivalence"))?;
                entries.push(EquivPoint {
                    mode,
                    omega_rad_s: omega.rad_per_s(),
                    report,
                });
            }
            let max = entries.iter().fold(0.0f64, |m, e| {
                m.max(e.report.max_discrepancy()).max(e.report.split_inconsistency)
            });
            let checked = entries.len();
            let pass = checked > 0 && max < EQUIVALENCE_TOLERANCE;
            (
                EquivFile::Points {
                    points: entries,
                    max_discrepancy: max,
                    pass,
                },
                max,
                checked,
            )
        }
    };
    let pass = checked > 0 && max < EQUIVALENCE_TOLERANCE;
    let mut summary = format!(
        "{checked} operating point(s) checked, max relative discrepancy {max:.3e}: {}",
        if pass { "pass" } else { "FAIL" }
    );
    let mut files = Vec::new();
    if let Some(dir) = out {
        let path = dir.join("equiv.json");
        write_json(&path, &file)?;
        let _ = write!(summary, "\nwrote {}", path.display());
        files.push(path);
    }
    Ok(Outcome {
        code: if pass { 0 } else { 1 },
        summary,
        files,
    })
}
