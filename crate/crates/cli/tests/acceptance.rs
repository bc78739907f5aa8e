//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Run with `cargo test -p ipt-tank-cli --test acceptance`.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use ipt_tank::harness::{log_grid, Tolerances};
use ipt_tank::solver::{OracleConfig, SolveOutcome};
use ipt_tank::ssp::{cc_residual, cv_residual, equivalence_monte_carlo, zpa_cc_residual, zpa_cv_residual};
use ipt_tank::twoport::power_balance;
use ipt_tank::{
    oracle_verify, phase_relation_check, solve_css, solve_design, sweep, verify_cc, verify_cv, CompensationNetwork,
    CoupledCoils, DesignSpec, Drive, Frequency, LadderStage, Mode, Orientation, SspDesign, SspReactances,
};
use ipt_tank_cli::output::sweep_csv;
use ipt_tank_testkit::{f1, input_impedance, solve as nodal_solve, Arm, Termination};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ANGLE_TOL_DEG: f64 = 0.01;
const SPREAD_TOL: f64 = 1e-6;

struct Suite {
    failures: usize,
}

impl Suite {
    fn report(&mut self, id: u32, name: &str, pass: bool, detail: String) {
        if !pass {
            self.failures += 1;
        }
        println!("{} {id}. {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    }
}

fn coils() -> CoupledCoils {
    CoupledCoils::from_self_inductances(f1::L1, f1::L2, f1::K).unwrap()
}

fn omega_cc() -> Frequency {
    Frequency::from_hz(f1::F_CC_HZ).unwrap()
}

fn f1_spec() -> DesignSpec {
    DesignSpec::new(coils(), omega_cc(), f1::LOADS.to_vec())
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn arms(net: &CompensationNetwork, omega: Frequency) -> Vec<Arm> {
    net.stages()
        .iter()
        .map(|s| match s.orientation() {
            Orientation::Series => Arm::Series(s.reactance(omega)),
            Orientation::Shunt => Arm::Shunt(s.reactance(omega)),
        })
        .collect()
}

fn ms(d: Duration) -> String {
    format!("{:.1} ms", d.as_secs_f64() * 1e3)
}

fn criterion_1(suite: &mut Suite) -> Option<SolveOutcome> {
    let start = Instant::now();
    let out = match solve_design(&f1_spec()) {
        Ok(o) => o,
        Err(e) => {
            suite.report(1, "F1 end-to-end design", false, format!("solver error: {e}"));
            return None;
        }
    };
    let elapsed = start.elapsed();
    let Some(s) = out.solutions.first() else {
        suite.report(
            1,
            "F1 end-to-end design",
            false,
            format!("no solution, best residual {:e}", out.best_residual),
        );
        return None;
    };
    let tol = Tolerances::default();
    let cc = verify_cc(&s.design, s.omega_cc, &f1::LOADS, &tol).unwrap();
    let cv = verify_cv(&s.design, s.omega_cv, &f1::LOADS, &tol).unwrap();
    let c_ss_err = rel(s.design.c_ss, f1::C_SS);
    let closed = rel(s.design.c_ss, solve_css(&coils(), omega_cc()));
    let (sc, tc) = (
        cc.spread.unwrap_or(f64::NAN),
        cc.max_abs_theta_in_deg.unwrap_or(f64::NAN),
    );
    let (sv, tv) = (
        cv.spread.unwrap_or(f64::NAN),
        cv.max_abs_theta_in_deg.unwrap_or(f64::NAN),
    );
    let pass = c_ss_err <= 1e-4
        && closed <= 1e-12
        && sc < SPREAD_TOL
        && tc < ANGLE_TOL_DEG
        && sv < SPREAD_TOL
        && tv < ANGLE_TOL_DEG
        && elapsed < Duration::from_secs(10);
    suite.report(
        1,
        "F1 end-to-end design",
        pass,
        format!(
            "{} solution(s); C_ss = {:.6e} F (off 14.608 nF by {:.2e}); CC spread {sc:.1e}, |θ_in| {tc:.1e}°; \
             CV at {:.3} Hz spread {sv:.1e}, |θ_in| {tv:.1e}°; {}",
            out.solutions.len(),
            s.design.c_ss,
            c_ss_err,
            s.omega_cv.hz(),
            ms(elapsed)
        ),
    );
    Some(out)
}

/// Worst deviation from the target set, computed from nodal port quantities.
fn nodal_phase_deviation(design: &SspDesign, omega: Frequency, mode: Mode) -> f64 {
    let mut worst = 0.0f64;
    for r in f1::LOADS {
        let net = design.network(r).unwrap();
        let n = nodal_solve(&arms(&net, omega), Termination::Resistor(r));
        let v_in = Complex64::new(1.0, 0.0);
        let dev = |deg: f64, targets: &[f64]| {
            targets
                .iter()
                .map(|t| {
                    let d = (deg - t).rem_euclid(360.0);
                    d.min(360.0 - d)
                })
                .fold(f64::INFINITY, f64::min)
        };
        let (a, b, targets): (f64, f64, &[f64]) = match mode {
            Mode::Cc => (
                (n.i_out / v_in).arg().to_degrees(),
                (n.v_out / n.i_in).arg().to_degrees(),
                &[90.0, -90.0],
            ),
            Mode::Cv => (
                (n.v_out / v_in).arg().to_degrees(),
                (n.i_out / n.i_in).arg().to_degrees(),
                &[0.0, 180.0],
            ),
        };
        worst = worst.max(dev(a, targets)).max(dev(b, targets));
    }
    worst
}

fn criterion_2(suite: &mut Suite, out: &SolveOutcome) {
    let s = &out.solutions[0];
    let mut worst_lib = 0.0f64;
    let mut all_pass = true;
    for (omega, mode) in [(s.omega_cc, Mode::Cc), (s.omega_cv, Mode::Cv)] {
        for r in f1::LOADS {
            let p = s.design.network(r).unwrap().solve(omega, Drive::Voltage).unwrap();
            let rep = phase_relation_check(&p, mode, ANGLE_TOL_DEG);
            all_pass &= rep.pass && rep.relations.len() == 2;
            for rel in &rep.relations {
                worst_lib = worst_lib.max(rel.deviation_deg);
            }
        }
    }
    let nodal_cc = nodal_phase_deviation(&s.design, s.omega_cc, Mode::Cc);
    let nodal_cv = nodal_phase_deviation(&s.design, s.omega_cv, Mode::Cv);
    let pass = all_pass && worst_lib <= ANGLE_TOL_DEG && nodal_cc <= ANGLE_TOL_DEG && nodal_cv <= ANGLE_TOL_DEG;
    suite.report(
        2,
        "phase relations",
        pass,
        format!(
            "chain-matrix worst deviation {worst_lib:.1e}°; nodal oracle worst {nodal_cc:.1e}° at ω_cc, \
             {nodal_cv:.1e}° at ω_cv (tolerance {ANGLE_TOL_DEG}°)"
        ),
    );
}

fn criterion_3(suite: &mut Suite) {
    let start = Instant::now();
    let r = equivalence_monte_carlo(1000, 42);
    let elapsed = start.elapsed();
    let pass = r.checked == 2 * r.draws && r.max_discrepancy < 1e-9 && elapsed < Duration::from_secs(5);
    suite.report(
        3,
        "unified-model equivalence",
        pass,
        format!(
            "1000 draws (seed 42), {} mode checks, {} skipped, max relative discrepancy {:.2e}; {}",
            r.checked,
            r.skipped,
            r.max_discrepancy,
            ms(elapsed)
        ),
    );
}

fn criterion_4(suite: &mut Suite, out: &SolveOutcome) {
    let mut ok = true;
    let mut detail = Vec::new();
    for s in &out.solutions {
        let cfg = OracleConfig::around(s.omega_cc).unwrap();
        let r = oracle_verify(&s.design, &f1::LOADS, &cfg).unwrap();
        let cc = r.confirms_cc(s.omega_cc, 1e-4);
        let cv = r.confirms_cv(s.omega_cv, 1e-4);
        let detuned = SspDesign::new(s.design.coils, s.design.c_p, s.design.c_ss * 1.05, s.design.c_sp).unwrap();
        let d = oracle_verify(&detuned, &f1::LOADS, &cfg).unwrap();
        let broken = d.cc_frequencies.is_empty() && d.cv_frequencies.is_empty();
        ok &= cc && cv && broken;
        detail.push(format!(
            "solved: CC {}, CV {} ({} common ZPA roots); +5% C_ss: {} CC and {} CV coincidences",
            if cc { "confirmed" } else { "not confirmed" },
            if cv { "confirmed" } else { "not confirmed" },
            r.zpa_roots.len(),
            d.cc_frequencies.len(),
            d.cv_frequencies.len()
        ));
    }
    suite.report(
        4,
        "oracle coincidence",
        ok && !out.solutions.is_empty(),
        detail.join("; "),
    );
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo.ln()..hi.ln()).exp()
}

fn criterion_5(suite: &mut Suite, out: &SolveOutcome) {
    // Random ladders: 1 to 8 arms, reactances within a decade of R_ac.
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let omega = Frequency::new(1e5).unwrap();
    let (mut worst_z, mut worst_det) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let r_ac = log_uniform(&mut rng, 1.0, 1000.0);
        let n = rng.gen_range(1..=8);
        let stages: Vec<LadderStage> = (0..n)
            .map(|_| {
                let x = log_uniform(&mut rng, 0.1, 10.0) * r_ac * if rng.gen::<bool>() { 1.0 } else { -1.0 };
                let o = if rng.gen::<bool>() {
                    Orientation::Series
                } else {
                    Orientation::Shunt
                };
                LadderStage::with_reactance(o, x, omega).unwrap()
            })
            .collect();
        let net = CompensationNetwork::new(stages, r_ac).unwrap();
        let z = net.solve(omega, Drive::Voltage).unwrap().z_in;
        let z_nodal = input_impedance(&arms(&net, omega), r_ac);
        worst_z = worst_z.max((z - z_nodal).norm() / z_nodal.norm());
        worst_det = worst_det.max((net.transfer_matrix(omega).unwrap().determinant() - 1.0).norm());
    }

    // Every record of the F1 sweep, and the chain matrices behind it.
    let s = &out.solutions[0];
    let grid = log_grid(s.omega_cc.scaled(0.2).unwrap(), s.omega_cc.scaled(5.0).unwrap(), 2000).unwrap();
    let rows = sweep(&s.design, &grid, &f1::LOADS).unwrap();
    let records: Vec<_> = rows.iter().filter_map(|r| r.record()).collect();
    let passive = records.iter().all(|r| r.z_in_re >= 0.0);
    let worst_power = records.iter().fold(0.0f64, |m, r| m.max(r.power_mismatch()));
    let mut worst_sweep_det = 0.0f64;
    let mut worst_port_power = 0.0f64;
    for &w in &grid {
        let net = s.design.network(f1::LOADS[0]).unwrap();
        worst_sweep_det = worst_sweep_det.max((net.transfer_matrix(w).unwrap().determinant() - 1.0).norm());
        let p = net.solve(w, Drive::Current).unwrap();
        worst_port_power = worst_port_power.max(power_balance(&p).relative_mismatch);
    }
    let pass = worst_z < 1e-12
        && worst_det < 1e-9
        && worst_sweep_det < 1e-9
        && passive
        && worst_power < 1e-9
        && worst_port_power < 1e-9
        && records.len() == rows.len();
    suite.report(
        5,
        "analysis-core correctness",
        pass,
        format!(
            "100 random ladders: Z_in vs nodal {worst_z:.1e}, |det - 1| {worst_det:.1e}; F1 sweep {} records: \
             passive {passive}, power mismatch {worst_power:.1e} (current drive {worst_port_power:.1e}), \
             |det - 1| {worst_sweep_det:.1e}",
            records.len()
        ),
    );
}

fn criterion_6(suite: &mut Suite, out: &SolveOutcome) {
    let base = &out.solutions[0];
    let mut worst_freq = 0.0f64;
    let mut all_found = true;
    for lambda in [0.25, 3.0, 40.0] {
        let spec = DesignSpec::new(coils().scaled(lambda).unwrap(), omega_cc(), f1::LOADS.to_vec());
        match solve_design(&spec).ok().and_then(|o| o.solutions.first().cloned()) {
            Some(s) => {
                worst_freq = worst_freq
                    .max(rel(s.omega_cv.rad_per_s(), base.omega_cv.rad_per_s()))
                    .max(rel(s.omega_cc.rad_per_s(), base.omega_cc.rad_per_s()));
            }
            None => all_found = false,
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst_h = 0.0f64;
    for _ in 0..1000 {
        let x: [f64; 4] =
            std::array::from_fn(|_| log_uniform(&mut rng, 1.0, 1e3) * if rng.gen::<bool>() { 1.0 } else { -1.0 });
        let lambda = log_uniform(&mut rng, 1e-3, 1e3);
        for mode in [Mode::Cc, Mode::Cv] {
            let r = SspReactances::new(mode, x[0], x[1], x[2], x[3]);
            let scaled = r.scaled(lambda);
            let fs: [fn(&SspReactances) -> ipt_tank::Result<f64>; 2] = match mode {
                Mode::Cc => [cc_residual, zpa_cc_residual],
                Mode::Cv => [cv_residual, zpa_cv_residual],
            };
            for f in fs {
                let (Ok(a), Ok(b)) = (f(&r), f(&scaled)) else { continue };
                // Relative to the residual's own scale.
                let scale = lambda * a.abs().max(r.magnitude());
                worst_h = worst_h.max((b - lambda * a).abs() / scale);
            }
        }
    }
    let pass = all_found && worst_freq < 1e-9 && worst_h < 1e-12;
    suite.report(
        6,
        "scaling properties",
        pass,
        format!(
            "(λL, C/λ) for λ ∈ {{0.25, 3, 40}}: worst frequency change {worst_freq:.1e}; \
             residual homogeneity over 1000 draws: {worst_h:.1e}"
        ),
    );
}

fn criterion_7(suite: &mut Suite, out: &SolveOutcome) {
    let s = &out.solutions[0];
    let grid = log_grid(s.omega_cc.scaled(0.2).unwrap(), s.omega_cc.scaled(5.0).unwrap(), 2000).unwrap();
    let start = Instant::now();
    let rows = sweep(&s.design, &grid, &f1::LOADS).unwrap();
    let csv = sweep_csv(&rows).unwrap();
    let elapsed = start.elapsed();
    let again = sweep_csv(&sweep(&s.design, &grid, &f1::LOADS).unwrap()).unwrap();

    // Two runs of the binary must also produce identical files.
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("f1.json");
    let d = &s.design;
    let config = serde_json::json!({
        "coils": {"l1": f1::L1, "l2": f1::L2, "k": f1::K},
        "f_cc": f1::F_CC_HZ,
        "loads": f1::LOADS,
        "capacitors": {"c_p": d.c_p, "c_ss": d.c_ss, "c_sp": d.c_sp},
    });
    std::fs::write(&cfg, config.to_string()).unwrap();
    let run = |out: &str| {
        let o = dir.path().join(out);
        let status = Command::new(env!("CARGO_BIN_EXE_ipt-tank"))
            .args([
                "sweep",
                "--config",
                cfg.to_str().unwrap(),
                "--points",
                "2000",
                "--out",
                o.to_str().unwrap(),
            ])
            .output()
            .unwrap()
            .status;
        (status.success(), std::fs::read(o.join("sweep.csv")).unwrap_or_default())
    };
    let (ok_a, a) = run("a");
    let (ok_b, b) = run("b");
    let lines = csv.iter().filter(|&&c| c == b'\n').count();
    let pass = rows.len() == 10_000
        && lines == 10_001
        && csv == again
        && ok_a
        && ok_b
        && !a.is_empty()
        && a == b
        && elapsed < Duration::from_secs(1);
    suite.report(
        7,
        "sweep performance and determinism",
        pass,
        format!(
            "2000 × 5 sweep plus CSV in {}; in-process repeat identical: {}; CLI runs identical: {} ({} bytes)",
            ms(elapsed),
            csv == again,
            ok_a && ok_b && a == b,
            a.len()
        ),
    );
}

fn main() -> ExitCode {
    let mut suite = Suite { failures: 0 };
    let solved = criterion_1(&mut suite);
    match &solved {
        Some(out) => {
            criterion_2(&mut suite, out);
            criterion_3(&mut suite);
            criterion_4(&mut suite, out);
            criterion_5(&mut suite, out);
            criterion_6(&mut suite, out);
            criterion_7(&mut suite, out);
        }
        None => {
            criterion_3(&mut suite);
            for (id, name) in [
                (2, "phase relations"),
                (4, "oracle coincidence"),
                (5, "analysis-core correctness"),
                (6, "scaling properties"),
                (7, "sweep performance and determinism"),
            ] {
                suite.report(id, name, false, "skipped: no F1 solution".into());
            }
        }
    }
    if suite.failures == 0 {
        println!("acceptance: all criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {} criterion/criteria failed", suite.failures);
        ExitCode::FAILURE
    }
}
