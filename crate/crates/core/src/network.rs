//! Reactive ladder networks between a source port and a resistive AC load.

use serde::{Deserialize, Serialize};

use crate::element::{CoupledCoils, Frequency, ReactiveElement};
use crate::error::{positive, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    Series,
    Shunt,
}

/// One arm of a ladder. The arm is the series connection of its elements,
/// which are kept individually so conditions can refer to single symbols.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderStage {
    orientation: Orientation,
    elements: Vec<ReactiveElement>,
}

impl LadderStage {
    pub fn new(orientation: Orientation, elements: Vec<ReactiveElement>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::InvalidParameter {
                name: "stage elements",
                value: 0.0,
                reason: "an arm needs at least one element",
            });
        }
        Ok(Self { orientation, elements })
    }

    pub fn series(elements: Vec<ReactiveElement>) -> Result<Self> {
        Self::new(Orientation::Series, elements)
    }

    pub fn shunt(elements: Vec<ReactiveElement>) -> Result<Self> {
        Self::new(Orientation::Shunt, elements)
    }

    /// Single-element arm presenting reactance `x` at `omega`.
    pub fn with_reactance(orientation: Orientation, x: f64, omega: Frequency) -> Result<Self> {
        Self::new(orientation, vec![ReactiveElement::with_reactance(x, omega)?])
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn elements(&self) -> &[ReactiveElement] {
        &self.elements
    }

    /// Net arm reactance in ohms; the arm impedance is `j` times this.
    pub fn reactance(&self, omega: Frequency) -> f64 {
        self.elements.iter().map(|e| e.reactance(omega)).sum()
    }
}

/// Ordered ladder from source port to load port, terminated by `r_ac`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompensationNetwork {
    stages: Vec<LadderStage>,
    r_ac: f64,
}

impl CompensationNetwork {
    pub fn new(stages: Vec<LadderStage>, r_ac: f64) -> Result<Self> {
        if stages.is_empty() {
            return Err(Error::EmptyNetwork);
        }
        Ok(Self {
            stages,
            r_ac: positive("r_ac", r_ac)?,
        })
    }

    pub fn stages(&self) -> &[LadderStage] {
        &self.stages
    }

    pub fn r_ac(&self) -> f64 {
        self.r_ac
    }

    /// Same ladder with a different load resistance.
    pub fn with_load(&self, r_ac: f64) -> Result<Self> {
        Self::new(self.stages.clone(), r_ac)
    }
}

/// Component values of a series / series-parallel (S-SP) compensated link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SspDesign {
    pub coils: CoupledCoils,
    /// Primary series capacitor (F).
    pub c_p: f64,
    /// Secondary series capacitor (F).
    pub c_ss: f64,
    /// Secondary parallel capacitor (F).
    pub c_sp: f64,
}

impl SspDesign {
    pub fn new(coils: CoupledCoils, c_p: f64, c_ss: f64, c_sp: f64) -> Result<Self> {
        Ok(Self {
            coils,
            c_p: positive("c_p", c_p)?,
            c_ss: positive("c_ss", c_ss)?,
            c_sp: positive("c_sp", c_sp)?,
        })
    }

    pub fn network(&self, r_ac: f64) -> Result<CompensationNetwork> {
        build_ssp(&self.coils, self.c_p, self.c_ss, self.c_sp, r_ac)
    }
}

/// S-SP ladder: series {C_p, L_lp}, shunt {L_M}, series {L_ls, C_ss},
/// shunt {C_sp}, with the load across the last shunt arm.
pub fn build_ssp(coils: &CoupledCoils, c_p: f64, c_ss: f64, c_sp: f64, r_ac: f64) -> Result<CompensationNetwork> {
    let stages = vec![
        LadderStage::series(vec![
            ReactiveElement::capacitor(c_p)?,
            ReactiveElement::inductor(coils.l_lp())?,
        ])?,
        LadderStage::shunt(vec![ReactiveElement::inductor(coils.l_m())?])?,
        LadderStage::series(vec![
            ReactiveElement::inductor(coils.l_ls())?,
            ReactiveElement::capacitor(c_ss)?,
        ])?,
        LadderStage::shunt(vec![ReactiveElement::capacitor(c_sp)?])?,
    ];
    CompensationNetwork::new(stages, r_ac)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn f1_coils() -> CoupledCoils {
        CoupledCoils::from_self_inductances(240e-6, 240e-6, 1.0 / 6.0).unwrap()
    }

    #[test]
    fn ssp_structure() {
        let net = build_ssp(&f1_coils(), 13e-9, 14.6e-9, 54e-9, 20.0).unwrap();
        let orientations: Vec<_> = net.stages().iter().map(|s| s.orientation()).collect();
        assert_eq!(
            orientations,
            [
                Orientation::Series,
                Orientation::Shunt,
                Orientation::Series,
                Orientation::Shunt
            ]
        );
        assert_eq!(net.r_ac(), 20.0);
    }

    #[test]
    fn ssp_stage_reactances_match_closed_forms() {
        let coils = f1_coils();
        let (c_p, c_ss, c_sp) = (13.2e-9, 14.608e-9, 54.2e-9);
        let net = build_ssp(&coils, c_p, c_ss, c_sp, 10.0).unwrap();
        for w in [1e4, 3.3e5, 534_070.75, 2e6] {
            let omega = Frequency::new(w).unwrap();
            let expected = [
                w * coils.l_lp() - 1.0 / (w * c_p),
                w * coils.l_m(),
                w * coils.l_ls() - 1.0 / (w * c_ss),
                -1.0 / (w * c_sp),
            ];
            for (stage, x) in net.stages().iter().zip(expected) {
                assert_relative_eq!(stage.reactance(omega), x, max_relative = 1e-14);
            }
        }
    }

    #[test]
    fn secondary_series_arm_at_cc_frequency() {
        // ωL - 1/(ωC) evaluated directly: 106.8142 - 128.1771 Ω.
        let arm = LadderStage::series(vec![
            ReactiveElement::inductor(200e-6).unwrap(),
            ReactiveElement::capacitor(14.608e-9).unwrap(),
        ])
        .unwrap();
        let x = arm.reactance(Frequency::new(534_070.75).unwrap());
        assert!((x - (-21.362_951_5)).abs() < 1e-6, "{x}");
    }

    #[test]
    fn rejects_empty_and_bad_load() {
        assert_eq!(CompensationNetwork::new(vec![], 10.0).unwrap_err(), Error::EmptyNetwork);
        let stage = LadderStage::series(vec![ReactiveElement::inductor(1e-6).unwrap()]).unwrap();
        assert!(CompensationNetwork::new(vec![stage], 0.0).is_err());
        assert!(LadderStage::series(vec![]).is_err());
    }
}
