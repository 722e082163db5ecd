//! Exhaustive grid search over the full constrained problem, used to check
//! the closed-form solvers.
//!
//! Only the physics primitives are used here (SINR, rate bound, DC current,
//! harvested power). No closed-form data-phase length or amplitude enters.

use serde::{Deserialize, Serialize};

use super::{PolicySolution, PolicyTag, Rejection};
use crate::error::{Error, Result};
use crate::harvest::{dc_component, harvested_power, EnergyReport};
use crate::linkmodel::{at_least, at_most, rate_lower_bound, sinr, OperatingPoint};
use crate::scenario::{FovLink, Scenario};

/// Number of uniformly spaced samples per searched axis, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleGrid {
    /// Data-phase length over `[0, 1]`.
    pub time_points: usize,
    /// Data-phase DC bias over `[I_L, I_H]`.
    pub bias_points: usize,
    /// Peak amplitude over `[0, (I_H − I_L)/2]`.
    pub amplitude_points: usize,
}

impl OracleGrid {
    pub fn uniform(points: usize) -> Self {
        OracleGrid {
            time_points: points,
            bias_points: points,
            amplitude_points: points,
        }
    }

    fn validate(&self) -> Result<()> {
        for (name, n) in [
            ("time_points", self.time_points),
            ("bias_points", self.bias_points),
            ("amplitude_points", self.amplitude_points),
        ] {
            if n < 2 {
                return Err(Error::invalid(
                    name,
                    "grid needs at least 2 points per axis",
                ));
            }
        }
        Ok(())
    }

    /// Spacing of the bias axis.
    pub fn bias_step(&self, scenario: &Scenario) -> f64 {
        let b = scenario.bias();
        (b.high - b.low) / (self.bias_points - 1) as f64
    }
}

/// Which problem the oracle searches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OracleShape {
    /// Data phase fixed at the midpoint bias with the largest clip-free
    /// amplitude; searches `T` and both FOVs.
    Ts,
    /// Searches `T`, bias, amplitude and both FOVs.
    Tsbo,
}

fn linspace(lo: f64, hi: f64, n: usize, i: usize) -> f64 {
    if i == n - 1 {
        hi
    } else {
        lo + (hi - lo) * i as f64 / (n - 1) as f64
    }
}

struct Best {
    op: OperatingPoint,
    energy: EnergyReport,
    rate: f64,
    sinr: f64,
}

struct Phase1 {
    rate: f64,
    sinr: f64,
    power: f64,
}

/// Checks every constraint of the bias-optimized problem at one point and,
/// if all hold, returns the data-phase figures.
fn phase1_if_feasible(
    scenario: &Scenario,
    link: &FovLink,
    t: f64,
    amplitude: f64,
    bias: f64,
) -> Option<Phase1> {
    let range = scenario.bias();
    let qos = scenario.qos();
    let within_frame = (0.0..=1.0).contains(&t);
    let non_negative = amplitude >= 0.0;
    let bias_in_range = at_least(bias, range.low) && at_most(bias, range.high);
    let no_clipping = at_most(amplitude, (bias - range.low).min(range.high - bias));
    if !(within_frame && non_negative && bias_in_range && no_clipping) {
        return None;
    }
    let gamma = sinr(
        amplitude,
        link.gain,
        scenario.led(),
        scenario.rx(),
        link.interference.electrical_power,
        scenario.noise(),
    );
    let rate = rate_lower_bound(t, gamma);
    if !(at_least(rate, qos.rate_threshold) && at_least(gamma, qos.sinr_threshold_linear)) {
        return None;
    }
    let dc = dc_component(
        link.gain,
        bias,
        scenario.led(),
        scenario.rx(),
        link.interference.dc_current,
    );
    Some(Phase1 {
        rate,
        sinr: gamma,
        power: harvested_power(dc, scenario.cell()),
    })
}

/// Best feasible grid point over all `(phase-1 FOV, phase-2 FOV)` pairs.
/// Ties keep the first point in scan order: narrowest FOVs, then lowest `T`,
/// then lowest bias.
pub fn brute_force_oracle(
    scenario: &Scenario,
    grid: OracleGrid,
    shape: OracleShape,
) -> Result<PolicySolution> {
    grid.validate()?;
    let range = *scenario.bias();
    let a_max = range.max_amplitude();
    let a_step = a_max / (grid.amplitude_points - 1) as f64;
    let policy = match shape {
        OracleShape::Ts => PolicyTag::Ts,
        OracleShape::Tsbo => PolicyTag::Tsbo,
    };

    let phase2_power: Vec<f64> = scenario
        .links()
        .iter()
        .map(|l| {
            let dc = dc_component(
                l.gain,
                range.high,
                scenario.led(),
                scenario.rx(),
                l.interference.dc_current,
            );
            harvested_power(dc, scenario.cell())
        })
        .collect();

    let mut best: Option<Best> = None;
    let mut consider = |op: OperatingPoint, p1: &Phase1| {
        let t = op.time_fraction;
        let energy = EnergyReport {
            phase1_energy: t * p1.power,
            phase2_energy: (1.0 - t) * phase2_power[op.fov_phase2],
            total_energy: t * p1.power + (1.0 - t) * phase2_power[op.fov_phase2],
        };
        if best
            .as_ref()
            .is_none_or(|b| energy.total_energy > b.energy.total_energy)
        {
            best = Some(Best {
                op,
                energy,
                rate: p1.rate,
                sinr: p1.sinr,
            });
        }
    };

    for link1 in scenario.links() {
        for fov2 in 0..phase2_power.len() {
            for i in 0..grid.time_points {
                let t = linspace(0.0, 1.0, grid.time_points, i);
                match shape {
                    OracleShape::Ts => {
                        let (a, b) = (a_max, range.midpoint());
                        if let Some(p1) = phase1_if_feasible(scenario, link1, t, a, b) {
                            let op = point(a, b, t, link1.fov_index, fov2);
                            consider(op, &p1);
                        }
                    }
                    OracleShape::Tsbo => {
                        for j in 0..grid.bias_points {
                            let b = linspace(range.low, range.high, grid.bias_points, j);
                            // Rate and SINR grow with amplitude, so the largest
                            // grid amplitude passing the clipping test decides
                            // feasibility for the whole amplitude axis.
                            let cap = (b - range.low).min(range.high - b).max(0.0);
                            let n_a = grid.amplitude_points;
                            let mut k = ((cap / a_step).floor() as usize + 1).min(n_a - 1);
                            while k > 0 && !at_most(linspace(0.0, a_max, n_a, k), cap) {
                                k -= 1;
                            }
                            let a = linspace(0.0, a_max, n_a, k);
                            if let Some(p1) = phase1_if_feasible(scenario, link1, t, a, b) {
                                consider(point(a, b, t, link1.fov_index, fov2), &p1);
                            }
                        }
                    }
                }
            }
        }
    }

    Ok(match best {
        Some(b) => PolicySolution {
            policy,
            feasible: true,
            operating_point: Some(b.op),
            energy: b.energy,
            achieved_rate: b.rate,
            achieved_sinr: b.sinr,
            rejections: Vec::new(),
        },
        None => PolicySolution::infeasible(policy, vec![Rejection::NoFeasibleGridPoint]),
    })
}

fn point(a: f64, b: f64, t: f64, fov1: usize, fov2: usize) -> OperatingPoint {
    OperatingPoint {
        peak_amplitude: a,
        dc_bias: b,
        time_fraction: t,
        fov_phase1: fov1,
        fov_phase2: fov2,
    }
}
