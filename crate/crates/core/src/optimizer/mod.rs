//! Harvested-energy maximization under rate and SINR constraints.
//!
//! Two coordinated policies are solved, both over a frame split into a data
//! phase of length `T` and a harvest-only phase of length `1 − T`, with a
//! receiver FOV chosen per phase from the discrete settings:
//!
//! - **TS**: the data phase uses the largest clip-free amplitude at the
//!   midpoint bias. Energy falls with `T`, so the rate constraint is active
//!   and `T* = R_th / log₂(1 + e γ_max / 2π)`.
//! - **TSBO**: the data phase bias is free. At the optimum the bias lies in
//!   the upper half of the drive range, the rate constraint and the upper
//!   clipping constraint are both tight, and the problem collapses to a
//!   scalar search over `T ∈ [K1, K2]`.
//!
//! In both policies the harvest-only phase drives the LED at `I_H` with no
//! AC component and uses the FOV setting that maximizes harvested power.
//! Phase-1 FOV candidates are enumerated; ties go to the narrowest setting.

mod oracle;
mod search;

use std::f64::consts::{E, LN_2, PI};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harvest::{
    dc_component, energy_ts, energy_tsbo, harvested_power, EnergyReport, PhaseLink,
};
use crate::linkmodel::{
    at_least, at_most, current_gain, rate_lower_bound, sinr, spectral_efficiency, OperatingPoint,
};
use crate::scenario::{FovLink, Scenario};

pub use oracle::{brute_force_oracle, OracleGrid, OracleShape};
pub use search::maximize_bounded;

/// Grid density of the TSBO time-fraction scan before golden refinement.
pub const TSBO_GRID_POINTS: usize = 2048;
/// Bracket width at which golden-section refinement stops.
pub const TSBO_TIME_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QosConstraints {
    /// `R_th`, bit/s/Hz.
    pub rate_threshold: f64,
    /// `γ_th`, linear.
    pub sinr_threshold_linear: f64,
}

impl QosConstraints {
    pub fn validate(&self) -> Result<()> {
        if !(self.rate_threshold >= 0.0 && self.rate_threshold.is_finite()) {
            return Err(Error::invalid("rate_threshold", "must be finite and >= 0"));
        }
        if !(self.sinr_threshold_linear >= 0.0 && self.sinr_threshold_linear.is_finite()) {
            return Err(Error::invalid(
                "sinr_threshold_linear",
                "must be finite and >= 0",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum PolicyTag {
    Ts,
    Tsbo,
    Baseline,
}

impl fmt::Display for PolicyTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PolicyTag::Ts => "TS",
            PolicyTag::Tsbo => "TSBO",
            PolicyTag::Baseline => "BASELINE",
        })
    }
}

/// Admissible data-phase lengths `[K1, K2]` for TSBO under one FOV setting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TBounds {
    pub lower: f64,
    pub upper: f64,
}

impl TBounds {
    pub fn is_empty(&self) -> bool {
        !at_most(self.lower, self.upper)
    }
}

/// Why a phase-1 FOV candidate (or a fixed point) was infeasible.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Rejection {
    /// Even the largest clip-free amplitude misses the SINR threshold.
    SinrBelowThreshold {
        fov_index: usize,
        sinr: f64,
        threshold: f64,
    },
    /// Meeting the rate threshold would need a data phase longer than the frame.
    RateNeedsLongerFrame {
        fov_index: usize,
        time_fraction: f64,
    },
    /// Rate and SINR thresholds leave no admissible data-phase length.
    EmptyTimeInterval {
        fov_index: usize,
        bounds: TBounds,
    },
    /// Fixed operating point falls short of the rate threshold.
    RateBelowThreshold {
        fov_index: usize,
        rate: f64,
        threshold: f64,
    },
    NoFeasibleGridPoint,
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Rejection::SinrBelowThreshold {
                fov_index,
                sinr,
                threshold,
            } => write!(
                f,
                "FOV #{fov_index}: SINR constraint binds (SINR {sinr:.6e} < threshold {threshold:.6e})"
            ),
            Rejection::RateNeedsLongerFrame {
                fov_index,
                time_fraction,
            } => write!(
                f,
                "FOV #{fov_index}: rate constraint binds (needs data-phase fraction {time_fraction:.6} > 1)"
            ),
            Rejection::EmptyTimeInterval { fov_index, bounds } => write!(
                f,
                "FOV #{fov_index}: rate and SINR constraints conflict (data-phase fraction must be >= {:.6} and <= {:.6})",
                bounds.lower, bounds.upper
            ),
            Rejection::RateBelowThreshold {
                fov_index,
                rate,
                threshold,
            } => write!(
                f,
                "FOV #{fov_index}: rate constraint binds (rate {rate:.6} < threshold {threshold:.6})"
            ),
            Rejection::NoFeasibleGridPoint => f.write_str("no grid point satisfies every constraint"),
        }
    }
}

/// Rate, SINR and energy of an operating point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointEvaluation {
    pub energy: EnergyReport,
    pub rate: f64,
    pub sinr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicySolution {
    pub policy: PolicyTag,
    pub feasible: bool,
    /// Absent when infeasible.
    pub operating_point: Option<OperatingPoint>,
    /// All zero when infeasible.
    pub energy: EnergyReport,
    pub achieved_rate: f64,
    pub achieved_sinr: f64,
    /// Reasons each rejected candidate failed; empty for a feasible fixed point.
    pub rejections: Vec<Rejection>,
}

impl PolicySolution {
    pub fn harvested_energy(&self) -> f64 {
        self.energy.total_energy
    }

    fn infeasible(policy: PolicyTag, rejections: Vec<Rejection>) -> Self {
        PolicySolution {
            policy,
            feasible: false,
            operating_point: None,
            energy: EnergyReport::default(),
            achieved_rate: 0.0,
            achieved_sinr: 0.0,
            rejections,
        }
    }

    fn at(
        policy: PolicyTag,
        op: OperatingPoint,
        eval: PointEvaluation,
        rejections: Vec<Rejection>,
    ) -> Self {
        PolicySolution {
            policy,
            feasible: true,
            operating_point: Some(op),
            energy: eval.energy,
            achieved_rate: eval.rate,
            achieved_sinr: eval.sinr,
            rejections,
        }
    }
}

/// Evaluates SINR, rate and harvested energy of `op`. Phase 2 always runs
/// at bias `I_H` without modulation.
pub fn evaluate_point(scenario: &Scenario, op: &OperatingPoint) -> Result<PointEvaluation> {
    let (led, rx) = (scenario.led(), scenario.rx());
    let p1 = scenario.link(op.fov_phase1)?;
    let p2 = scenario.link(op.fov_phase2)?;
    let gamma = sinr(
        op.peak_amplitude,
        p1.gain,
        led,
        rx,
        p1.interference.electrical_power,
        scenario.noise(),
    );
    let phase1_dc = dc_component(p1.gain, op.dc_bias, led, rx, p1.interference.dc_current);
    let energy = energy_ts(
        op.time_fraction,
        phase1_dc,
        phase2_dc(scenario, p2),
        scenario.cell(),
    );
    Ok(PointEvaluation {
        energy,
        rate: rate_lower_bound(op.time_fraction, gamma),
        sinr: gamma,
    })
}

fn phase2_dc(scenario: &Scenario, link: &FovLink) -> f64 {
    dc_component(
        link.gain,
        scenario.bias().high,
        scenario.led(),
        scenario.rx(),
        link.interference.dc_current,
    )
}

fn max_amplitude_sinr(scenario: &Scenario, link: &FovLink) -> f64 {
    sinr(
        scenario.bias().max_amplitude(),
        link.gain,
        scenario.led(),
        scenario.rx(),
        link.interference.electrical_power,
        scenario.noise(),
    )
}

/// FOV setting that maximizes harvested power with the LED held at `I_H`.
pub fn select_phase2_fov(scenario: &Scenario) -> usize {
    let mut best = 0;
    let mut best_power = f64::NEG_INFINITY;
    for link in scenario.links() {
        let power = harvested_power(phase2_dc(scenario, link), scenario.cell());
        if power > best_power {
            best = link.fov_index;
            best_power = power;
        }
    }
    best
}

/// Shortest data phase meeting `R_th` at the largest clip-free amplitude:
/// `R_th / log₂(1 + e (η h P_LED (I_H − I_L))² / (8π (P_I + σ²)))`.
fn shortest_data_phase(scenario: &Scenario, link: &FovLink) -> f64 {
    let rate = scenario.qos().rate_threshold;
    if rate == 0.0 {
        return 0.0;
    }
    let bias = scenario.bias();
    let swing = current_gain(link.gain, scenario.led(), scenario.rx()) * (bias.high - bias.low);
    let x = E * swing * swing
        / (8.0 * PI * (link.interference.electrical_power + scenario.noise().noise_power));
    rate / (x.ln_1p() / LN_2)
}

/// `[K1, K2]` for one FOV setting. `K1` is where the rate-tight amplitude
/// reaches its clipping cap, `K2 = min(R_th / log₂(1 + e γ_th / 2π), 1)`.
/// A zero rate threshold gives `[0, 0]`; a zero SINR threshold leaves only
/// the frame-length limit, `K2 = 1`.
pub fn t_bounds(scenario: &Scenario, link: &FovLink) -> TBounds {
    let qos = scenario.qos();
    if qos.rate_threshold == 0.0 {
        return TBounds {
            lower: 0.0,
            upper: 0.0,
        };
    }
    let upper = if qos.sinr_threshold_linear == 0.0 {
        1.0
    } else {
        (qos.rate_threshold / spectral_efficiency(qos.sinr_threshold_linear)).min(1.0)
    };
    TBounds {
        lower: shortest_data_phase(scenario, link),
        upper,
    }
}

/// Peak amplitude that meets the rate threshold with equality in a data
/// phase of length `t`:
/// `A1(T) = √(2π (P_I + σ²)(2^{R_th/T} − 1) / e) / (η h P_LED)`.
pub fn amplitude_for_rate(scenario: &Scenario, link: &FovLink, t: f64) -> Result<f64> {
    let rate = scenario.qos().rate_threshold;
    if rate == 0.0 {
        return Ok(0.0);
    }
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::domain(
            "time_fraction",
            t,
            "(0, 1] when the rate threshold is positive",
        ));
    }
    let g = current_gain(link.gain, scenario.led(), scenario.rx());
    if !(g > 0.0) {
        return Err(Error::domain("channel_gain", link.gain, "> 0"));
    }
    let noise = link.interference.electrical_power + scenario.noise().noise_power;
    let excess = (rate / t * LN_2).exp_m1();
    Ok((2.0 * PI * noise * excess / E).sqrt() / g)
}

/// With no rate demand the data phase is skipped; the policy is feasible iff
/// some FOV still meets the SINR threshold at full amplitude.
fn zero_rate_solution(scenario: &Scenario, policy: PolicyTag) -> PolicySolution {
    let threshold = scenario.qos().sinr_threshold_linear;
    let phase2 = select_phase2_fov(scenario);
    let mut rejections = Vec::new();
    for link in scenario.links() {
        let gamma = max_amplitude_sinr(scenario, link);
        if !at_least(gamma, threshold) {
            rejections.push(Rejection::SinrBelowThreshold {
                fov_index: link.fov_index,
                sinr: gamma,
                threshold,
            });
            continue;
        }
        let bias = scenario.bias();
        let op = OperatingPoint {
            peak_amplitude: bias.max_amplitude(),
            dc_bias: bias.midpoint(),
            time_fraction: 0.0,
            fov_phase1: link.fov_index,
            fov_phase2: phase2,
        };
        let eval = evaluate_point(scenario, &op).expect("FOV indices come from the scenario");
        return PolicySolution::at(policy, op, eval, rejections);
    }
    PolicySolution::infeasible(policy, rejections)
}

/// Picks the highest-energy candidate; the first (narrowest FOV) wins ties.
fn best_candidate(
    scenario: &Scenario,
    policy: PolicyTag,
    candidates: Vec<std::result::Result<OperatingPoint, Rejection>>,
) -> PolicySolution {
    let mut rejections = Vec::new();
    let mut best: Option<(OperatingPoint, PointEvaluation)> = None;
    for candidate in candidates {
        match candidate {
            Ok(op) => {
                let eval =
                    evaluate_point(scenario, &op).expect("FOV indices come from the scenario");
                let better = best
                    .as_ref()
                    .is_none_or(|(_, b)| eval.energy.total_energy > b.energy.total_energy);
                if better {
                    best = Some((op, eval));
                }
            }
            Err(r) => rejections.push(r),
        }
    }
    match best {
        Some((op, eval)) => PolicySolution::at(policy, op, eval, rejections),
        None => PolicySolution::infeasible(policy, rejections),
    }
}

/// Time-splitting with tunable FOV.
pub fn solve_ts(scenario: &Scenario) -> PolicySolution {
    if scenario.qos().rate_threshold == 0.0 {
        return zero_rate_solution(scenario, PolicyTag::Ts);
    }
    let phase2 = select_phase2_fov(scenario);
    let bias = scenario.bias();
    let threshold = scenario.qos().sinr_threshold_linear;

    let candidates = scenario
        .links()
        .iter()
        .map(|link| {
            let gamma = max_amplitude_sinr(scenario, link);
            if !at_least(gamma, threshold) {
                return Err(Rejection::SinrBelowThreshold {
                    fov_index: link.fov_index,
                    sinr: gamma,
                    threshold,
                });
            }
            let t = shortest_data_phase(scenario, link);
            if !at_most(t, 1.0) {
                return Err(Rejection::RateNeedsLongerFrame {
                    fov_index: link.fov_index,
                    time_fraction: t,
                });
            }
            Ok(OperatingPoint {
                peak_amplitude: bias.max_amplitude(),
                dc_bias: bias.midpoint(),
                time_fraction: t.min(1.0),
                fov_phase1: link.fov_index,
                fov_phase2: phase2,
            })
        })
        .collect();
    best_candidate(scenario, PolicyTag::Ts, candidates)
}

/// Harvested energy as a function of the data-phase length alone, with the
/// amplitude set by [`amplitude_for_rate`] and the bias pushed to
/// `I_H − A1(T)`.
fn tsbo_energy_of_t(scenario: &Scenario, link: &FovLink, phase2_dc: f64, t: f64) -> f64 {
    let bias = scenario.bias();
    let amplitude = amplitude_for_rate(scenario, link, t)
        .map(|a| a.min(bias.max_amplitude()))
        .unwrap_or(bias.max_amplitude());
    energy_tsbo(
        t,
        bias.high - amplitude,
        PhaseLink {
            gain: link.gain,
            interference_dc: link.interference.dc_current,
        },
        phase2_dc,
        scenario.led(),
        scenario.rx(),
        scenario.cell(),
    )
    .total_energy
}

/// Time-splitting with DC-bias optimization and tunable FOV.
pub fn solve_tsbo(scenario: &Scenario) -> PolicySolution {
    if scenario.qos().rate_threshold == 0.0 {
        return zero_rate_solution(scenario, PolicyTag::Tsbo);
    }
    let phase2 = select_phase2_fov(scenario);
    let p2_dc = phase2_dc(scenario, &scenario.links()[phase2]);
    let bias = scenario.bias();

    let candidates = scenario
        .links()
        .iter()
        .map(|link| {
            let bounds = t_bounds(scenario, link);
            let threshold = scenario.qos().sinr_threshold_linear;
            let gamma = max_amplitude_sinr(scenario, link);
            if !at_least(gamma, threshold) {
                return Err(Rejection::SinrBelowThreshold {
                    fov_index: link.fov_index,
                    sinr: gamma,
                    threshold,
                });
            }
            if !at_most(bounds.lower, 1.0) {
                return Err(Rejection::RateNeedsLongerFrame {
                    fov_index: link.fov_index,
                    time_fraction: bounds.lower,
                });
            }
            if bounds.is_empty() || link.gain <= 0.0 {
                return Err(Rejection::EmptyTimeInterval {
                    fov_index: link.fov_index,
                    bounds,
                });
            }
            let (lo, hi) = (bounds.lower, bounds.upper.max(bounds.lower).min(1.0));
            let (t, _) = maximize_bounded(
                |t| tsbo_energy_of_t(scenario, link, p2_dc, t),
                lo,
                hi,
                TSBO_GRID_POINTS,
                TSBO_TIME_TOLERANCE,
            );
            let amplitude = amplitude_for_rate(scenario, link, t)
                .expect("t >= K1 > 0")
                .min(bias.max_amplitude());
            Ok(OperatingPoint {
                peak_amplitude: amplitude,
                dc_bias: bias.high - amplitude,
                time_fraction: t,
                fov_phase1: link.fov_index,
                fov_phase2: phase2,
            })
        })
        .collect();
    best_candidate(scenario, PolicyTag::Tsbo, candidates)
}

/// Evaluates a fixed operating point; feasible iff it meets both the rate
/// and SINR thresholds. Fails if the point clips or names an unknown FOV.
pub fn evaluate_baseline(scenario: &Scenario, fixed: &OperatingPoint) -> Result<PolicySolution> {
    fixed.check(scenario.bias())?;
    let eval = evaluate_point(scenario, fixed)?;
    let qos = scenario.qos();
    let mut rejections = Vec::new();
    if !at_least(eval.rate, qos.rate_threshold) {
        rejections.push(Rejection::RateBelowThreshold {
            fov_index: fixed.fov_phase1,
            rate: eval.rate,
            threshold: qos.rate_threshold,
        });
    }
    if !at_least(eval.sinr, qos.sinr_threshold_linear) {
        rejections.push(Rejection::SinrBelowThreshold {
            fov_index: fixed.fov_phase1,
            sinr: eval.sinr,
            threshold: qos.sinr_threshold_linear,
        });
    }
    if rejections.is_empty() {
        Ok(PolicySolution::at(
            PolicyTag::Baseline,
            *fixed,
            eval,
            rejections,
        ))
    } else {
        Ok(PolicySolution::infeasible(PolicyTag::Baseline, rejections))
    }
}
