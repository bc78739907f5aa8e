//! Test support: a nodal-analysis solver for reactive ladders that shares no
//! code with the chain-matrix path, plus the reference S-SP fixture.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Fixture F1: equal 240 µH coils, k = 1/6, CC frequency 85 kHz.
pub mod f1 {
    pub const L1: f64 = 240e-6;
    pub const L2: f64 = 240e-6;
    pub const K: f64 = 1.0 / 6.0;
    pub const F_CC_HZ: f64 = 85e3;
    pub const LOADS: [f64; 5] = [5.0, 10.0, 20.0, 50.0, 100.0];
    /// 1/(ω_cc²·(L_M + L_ls)) with L_M = 40 µH, L_ls = 200 µH.
    pub const C_SS: f64 = 14.608e-9;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Arm {
    /// Series arm with the given reactance (ohms).
    Series(f64),
    /// Shunt arm to ground with the given reactance (ohms).
    Shunt(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Termination {
    Open,
    Short,
    Resistor(f64),
}

/// Port quantities for a 1 V source at the input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodalSolution {
    pub i_in: Complex64,
    pub v_out: Complex64,
    /// Current leaving the output node through the termination.
    pub i_out: Complex64,
}

struct Branch {
    a: usize,
    /// `None` is ground.
    b: Option<usize>,
    y: Complex64,
}

/// Solves the ladder by nodal analysis with node 0 held at 1 V.
///
/// Each series arm opens a new node; shunt arms and the termination hang
/// from the most recent node.
pub fn solve(arms: &[Arm], termination: Termination) -> NodalSolution {
    let mut branches = Vec::new();
    let mut node = 0usize;
    for arm in arms {
        match *arm {
            Arm::Series(x) => {
                branches.push(Branch {
                    a: node,
                    b: Some(node + 1),
                    y: Complex64::new(0.0, x).inv(),
                });
                node += 1;
            }
            Arm::Shunt(x) => branches.push(Branch {
                a: node,
                b: None,
                y: Complex64::new(0.0, x).inv(),
            }),
        }
    }
    let out = node;
    if let Termination::Resistor(r) = termination {
        branches.push(Branch {
            a: out,
            b: None,
            y: Complex64::new(1.0 / r, 0.0),
        });
    }
    let grounded_out = matches!(termination, Termination::Short);
    assert!(!(grounded_out && out == 0), "shorting the output shorts the source");

    // Unknown node voltages: 1..=out, except a shorted output.
    let unknowns = if grounded_out { out - 1 } else { out };
    let idx = |n: usize| -> Option<usize> {
        if n == 0 || (grounded_out && n == out) {
            None
        } else {
            Some(n - 1)
        }
    };
    let known = |n: usize| -> Complex64 {
        if n == 0 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    };

    let mut v = vec![Complex64::new(1.0, 0.0); out + 1];
    if grounded_out {
        v[out] = Complex64::new(0.0, 0.0);
    }
    if unknowns > 0 {
        let mut y = DMatrix::<Complex64>::zeros(unknowns, unknowns);
        let mut rhs = DVector::<Complex64>::zeros(unknowns);
        for br in &branches {
            let ends = [Some(br.a), br.b];
            for (k, end) in ends.iter().enumerate() {
                let Some(n) = *end else { continue };
                let Some(i) = idx(n) else { continue };
                y[(i, i)] += br.y;
                if let Some(m) = ends[1 - k] {
                    match idx(m) {
                        Some(j) => y[(i, j)] -= br.y,
                        None => rhs[i] += br.y * known(m),
                    }
                }
            }
        }
        let sol = y.lu().solve(&rhs).expect("nodal matrix is singular");
        for (n, slot) in v.iter_mut().enumerate().skip(1) {
            if let Some(i) = idx(n) {
                *slot = sol[i];
            }
        }
    }

    let current_from = |n: usize| -> Complex64 {
        branches
            .iter()
            .filter_map(|br| {
                let vb = |b: Option<usize>| b.map_or(Complex64::new(0.0, 0.0), |m| v[m]);
                if br.a == n {
                    Some(br.y * (v[n] - vb(br.b)))
                } else if br.b == Some(n) {
                    Some(br.y * (v[n] - v[br.a]))
                } else {
                    None
                }
            })
            .sum()
    };
    let i_in = current_from(0);
    let i_out = match termination {
        Termination::Open => Complex64::new(0.0, 0.0),
        Termination::Resistor(r) => v[out] / r,
        // Current arriving through the series arm into the grounded node.
        Termination::Short => -current_from(out),
    };
    NodalSolution {
        i_in,
        v_out: v[out],
        i_out,
    }
}

/// Input impedance with a resistive termination.
pub fn input_impedance(arms: &[Arm], r_ac: f64) -> Complex64 {
    solve(arms, Termination::Resistor(r_ac)).i_in.inv()
}

/// Chain-matrix entries recovered from open- and short-circuit solves:
/// `a = V_in/V_out|open`, `c = I_in/V_out|open`, `b = V_in/I_out|short`,
/// `d = I_in/I_out|short`.
pub fn chain_entries(arms: &[Arm]) -> [Complex64; 4] {
    let open = solve(arms, Termination::Open);
    let short = solve(arms, Termination::Short);
    let one = Complex64::new(1.0, 0.0);
    [
        one / open.v_out,
        one / short.i_out,
        open.i_in / open.v_out,
        short.i_in / short.i_out,
    ]
}
