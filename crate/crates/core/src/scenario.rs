//! Scenario construction and parameter sweeps.
//!
//! A scenario is one dedicated LED directly above the receiver plus `N`
//! neighbor LEDs on the same ceiling, all at the same horizontal offset.
//! Under the parallel-plane model only the offset magnitude matters, so the
//! neighbors are identical links.

use serde::{Deserialize, Serialize};

use crate::channel::{
    channel_gain, geometry_from_ceiling_layout, LedOptics, LinkGeometry, ReceiverOptics,
};
use crate::error::{Error, Result};
use crate::harvest::{BiasRange, HarvesterParams};
use crate::linkmodel::{
    aggregate_interference, InterferenceAggregate, InterfererLink, NoiseModel, OperatingPoint,
};
use crate::optimizer::{evaluate_baseline, solve_ts, solve_tsbo, PolicySolution, QosConstraints};

/// A neighboring LED sharing the frequency band with the dedicated one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeighborLed {
    pub geometry: LinkGeometry,
    pub peak_amplitude: f64,
    pub dc_bias: f64,
}

/// Dedicated-link gain and interference seen under one FOV setting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FovLink {
    pub fov_index: usize,
    pub gain: f64,
    pub interference: InterferenceAggregate,
}

/// A complete single-user link description. Per-FOV link quantities are
/// computed once at construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    led: LedOptics,
    rx: ReceiverOptics,
    dedicated: LinkGeometry,
    neighbors: Vec<NeighborLed>,
    noise: NoiseModel,
    cell: HarvesterParams,
    qos: QosConstraints,
    links: Vec<FovLink>,
}

impl Scenario {
    pub fn new(
        led: LedOptics,
        rx: ReceiverOptics,
        dedicated: LinkGeometry,
        neighbors: Vec<NeighborLed>,
        noise: NoiseModel,
        cell: HarvesterParams,
        qos: QosConstraints,
    ) -> Result<Self> {
        led.validate()?;
        rx.validate()?;
        dedicated.validate()?;
        noise.validate()?;
        cell.validate()?;
        qos.validate()?;
        for (i, n) in neighbors.iter().enumerate() {
            n.geometry.validate()?;
            if !(n.peak_amplitude >= 0.0 && n.dc_bias >= 0.0) {
                return Err(Error::invalid(
                    format!("neighbors[{i}]"),
                    "amplitude and bias must be >= 0",
                ));
            }
        }

        let mut links = Vec::with_capacity(rx.fov_count());
        for k in 0..rx.fov_count() {
            let interferers = neighbors
                .iter()
                .map(|n| {
                    Ok(InterfererLink {
                        gain: channel_gain(&n.geometry, &rx, &led, k)?,
                        peak_amplitude: n.peak_amplitude,
                        dc_bias: n.dc_bias,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            links.push(FovLink {
                fov_index: k,
                gain: channel_gain(&dedicated, &rx, &led, k)?,
                interference: aggregate_interference(&interferers, &rx, &led, k),
            });
        }

        Ok(Scenario {
            led,
            rx,
            dedicated,
            neighbors,
            noise,
            cell,
            qos,
            links,
        })
    }

    pub fn led(&self) -> &LedOptics {
        &self.led
    }

    pub fn rx(&self) -> &ReceiverOptics {
        &self.rx
    }

    pub fn dedicated(&self) -> &LinkGeometry {
        &self.dedicated
    }

    pub fn neighbors(&self) -> &[NeighborLed] {
        &self.neighbors
    }

    pub fn noise(&self) -> &NoiseModel {
        &self.noise
    }

    pub fn cell(&self) -> &HarvesterParams {
        &self.cell
    }

    pub fn bias(&self) -> &BiasRange {
        &self.cell.bias_range
    }

    pub fn qos(&self) -> &QosConstraints {
        &self.qos
    }

    pub fn links(&self) -> &[FovLink] {
        &self.links
    }

    pub fn link(&self, fov_index: usize) -> Result<&FovLink> {
        self.links.get(fov_index).ok_or(Error::FovIndex {
            index: fov_index,
            count: self.links.len(),
        })
    }

    pub fn fov_degrees(&self, fov_index: usize) -> Result<f64> {
        Ok(self.rx.fov(fov_index)?.to_degrees())
    }

    /// Index of the FOV setting closest to `degrees`.
    pub fn fov_index_near(&self, degrees: f64) -> usize {
        let mut best = 0;
        for (k, fov) in self.rx.fov_settings.iter().enumerate() {
            let d = (fov.to_degrees() - degrees).abs();
            if d < (self.rx.fov_settings[best].to_degrees() - degrees).abs() {
                best = k;
            }
        }
        best
    }

    pub fn with_qos(&self, qos: QosConstraints) -> Result<Self> {
        qos.validate()?;
        Ok(Scenario {
            qos,
            ..self.clone()
        })
    }
}

/// Fixed operating point of the baseline policy. The FOV applies to both
/// phases.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaselinePoint {
    pub peak_amplitude: f64,
    pub dc_bias: f64,
    pub time_fraction: f64,
    pub fov_index: usize,
}

impl BaselinePoint {
    pub fn operating_point(&self, fov_index: usize) -> OperatingPoint {
        OperatingPoint {
            peak_amplitude: self.peak_amplitude,
            dc_bias: self.dc_bias,
            time_fraction: self.time_fraction,
            fov_phase1: fov_index,
            fov_phase2: fov_index,
        }
    }
}

/// Physical and layout parameters in SI units, from which a [`Scenario`]
/// is built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioParams {
    pub led: LedOptics,
    pub rx: ReceiverOptics,
    pub noise: NoiseModel,
    pub cell: HarvesterParams,
    pub qos: QosConstraints,
    /// Vertical LED-to-receiver distance, meters.
    pub link_distance: f64,
    /// Horizontal offset of every neighbor LED from the dedicated one, meters.
    pub neighbor_offset: f64,
    pub neighbor_count: usize,
    pub neighbor_amplitude: f64,
    pub neighbor_bias: f64,
    pub baseline: BaselinePoint,
}

impl ScenarioParams {
    /// Reference indoor setup: 1.5 m link, neighbors 1.5 m apart, 30°/50°
    /// FOV settings, 12 mA maximum drive, R_th = 7 bit/s/Hz, one neighbor.
    pub fn reference() -> Self {
        let bias_range = BiasRange {
            low: 0.0,
            high: 12e-3,
        };
        ScenarioParams {
            led: LedOptics {
                half_luminance_angle: 60f64.to_radians(),
                conversion_gain: 20.0,
            },
            rx: ReceiverOptics {
                detector_area: 0.04,
                optical_filter_gain: 1.0,
                refractive_index: 1.5,
                fov_settings: vec![30f64.to_radians(), 50f64.to_radians()],
                responsivity: 0.4,
            },
            noise: NoiseModel { noise_power: 1e-15 },
            cell: HarvesterParams {
                fill_factor: 0.75,
                thermal_voltage: 0.025,
                dark_saturation_current: 1e-9,
                bias_range,
            },
            qos: QosConstraints {
                rate_threshold: 7.0,
                sinr_threshold_linear: 10.0,
            },
            link_distance: 1.5,
            neighbor_offset: 1.5,
            neighbor_count: 1,
            neighbor_amplitude: 6e-3,
            neighbor_bias: 6e-3,
            baseline: BaselinePoint {
                peak_amplitude: bias_range.max_amplitude(),
                dc_bias: bias_range.midpoint(),
                time_fraction: 0.5,
                fov_index: 0,
            },
        }
    }
}

/// Places the dedicated LED at nadir and every neighbor at the configured
/// horizontal offset.
pub fn build_scenario(params: &ScenarioParams) -> Result<Scenario> {
    let dedicated = geometry_from_ceiling_layout(params.link_distance, 0.0)?;
    let neighbor = NeighborLed {
        geometry: geometry_from_ceiling_layout(params.link_distance, params.neighbor_offset)?,
        peak_amplitude: params.neighbor_amplitude,
        dc_bias: params.neighbor_bias,
    };
    Scenario::new(
        params.led,
        params.rx.clone(),
        dedicated,
        vec![neighbor; params.neighbor_count],
        params.noise,
        params.cell,
        params.qos,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Policy {
    Ts,
    Tsbo,
    /// Fixed baseline point evaluated under the given FOV setting.
    Baseline {
        fov_index: usize,
    },
}

impl Policy {
    /// Short label used in tables, e.g. `ts`, `tsbo`, `baseline-30`.
    pub fn label(&self, rx: &ReceiverOptics) -> Result<String> {
        Ok(match self {
            Policy::Ts => "ts".to_owned(),
            Policy::Tsbo => "tsbo".to_owned(),
            Policy::Baseline { fov_index } => {
                format!("baseline-{}", fmt_degrees(rx.fov(*fov_index)?.to_degrees()))
            }
        })
    }

    pub fn solve(&self, scenario: &Scenario, baseline: &BaselinePoint) -> Result<PolicySolution> {
        match self {
            Policy::Ts => Ok(solve_ts(scenario)),
            Policy::Tsbo => Ok(solve_tsbo(scenario)),
            Policy::Baseline { fov_index } => {
                evaluate_baseline(scenario, &baseline.operating_point(*fov_index))
            }
        }
    }
}

fn fmt_degrees(deg: f64) -> String {
    let rounded = deg.round();
    if (deg - rounded).abs() < 1e-9 {
        format!("{rounded}")
    } else {
        format!("{deg:.3}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepAxis {
    RateThreshold,
    NeighborCount,
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::RateThreshold => "rth",
            SweepAxis::NeighborCount => "n",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "rth" => Some(SweepAxis::RateThreshold),
            "n" => Some(SweepAxis::NeighborCount),
            _ => None,
        }
    }
}

/// Solution summary stored for a feasible sweep point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecordOutcome {
    pub harvested_energy: f64,
    pub time_fraction: f64,
    pub peak_amplitude: f64,
    pub dc_bias: f64,
    pub fov1_deg: f64,
    pub fov2_deg: f64,
    pub rate: f64,
    pub sinr: f64,
}

/// One row of a sweep; `outcome` is present iff the point is feasible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub policy: String,
    pub axis: SweepAxis,
    pub axis_value: f64,
    pub outcome: Option<RecordOutcome>,
}

impl SweepRecord {
    pub fn feasible(&self) -> bool {
        self.outcome.is_some()
    }

    pub fn harvested_energy(&self) -> Option<f64> {
        self.outcome.map(|o| o.harvested_energy)
    }

    fn from_solution(
        policy: String,
        axis: SweepAxis,
        axis_value: f64,
        scenario: &Scenario,
        solution: &PolicySolution,
    ) -> Result<Self> {
        let outcome = match (solution.feasible, solution.operating_point) {
            (true, Some(op)) => Some(RecordOutcome {
                harvested_energy: solution.harvested_energy(),
                time_fraction: op.time_fraction,
                peak_amplitude: op.peak_amplitude,
                dc_bias: op.dc_bias,
                fov1_deg: scenario.fov_degrees(op.fov_phase1)?,
                fov2_deg: scenario.fov_degrees(op.fov_phase2)?,
                rate: solution.achieved_rate,
                sinr: solution.achieved_sinr,
            }),
            _ => None,
        };
        Ok(SweepRecord {
            policy,
            axis,
            axis_value,
            outcome,
        })
    }

    /// Reconstructs the stored operating point against `scenario`'s FOV
    /// settings.
    pub fn operating_point(&self, scenario: &Scenario) -> Option<OperatingPoint> {
        self.outcome.map(|o| OperatingPoint {
            peak_amplitude: o.peak_amplitude,
            dc_bias: o.dc_bias,
            time_fraction: o.time_fraction,
            fov_phase1: scenario.fov_index_near(o.fov1_deg),
            fov_phase2: scenario.fov_index_near(o.fov2_deg),
        })
    }
}

fn sweep<T: Copy>(
    template: &ScenarioParams,
    values: &[T],
    policies: &[Policy],
    axis: SweepAxis,
    apply: impl Fn(&mut ScenarioParams, T) -> f64,
) -> Result<Vec<SweepRecord>> {
    let mut records = Vec::with_capacity(values.len() * policies.len());
    for policy in policies {
        let label = policy.label(&template.rx)?;
        for &value in values {
            let mut params = template.clone();
            let axis_value = apply(&mut params, value);
            let scenario = build_scenario(&params)?;
            let solution = policy.solve(&scenario, &params.baseline)?;
            records.push(SweepRecord::from_solution(
                label.clone(),
                axis,
                axis_value,
                &scenario,
                &solution,
            )?);
        }
    }
    Ok(records)
}

/// Harvested energy versus rate threshold; records ordered by policy, then
/// by the order of `r_values`.
pub fn sweep_rate_threshold(
    template: &ScenarioParams,
    r_values: &[f64],
    policies: &[Policy],
) -> Result<Vec<SweepRecord>> {
    if r_values.is_empty() {
        return Err(Error::invalid("r_values", "sweep needs at least one value"));
    }
    if let Some(r) = r_values.iter().find(|r| !(**r >= 0.0 && r.is_finite())) {
        return Err(Error::invalid(
            "r_values",
            format!("{r} is not a valid rate threshold"),
        ));
    }
    sweep(
        template,
        r_values,
        policies,
        SweepAxis::RateThreshold,
        |p, r| {
            p.qos.rate_threshold = r;
            r
        },
    )
}

/// Harvested energy versus number of neighbor LEDs.
pub fn sweep_neighbor_count(
    template: &ScenarioParams,
    n_values: &[usize],
    policies: &[Policy],
) -> Result<Vec<SweepRecord>> {
    if n_values.is_empty() {
        return Err(Error::invalid("n_values", "sweep needs at least one value"));
    }
    sweep(
        template,
        n_values,
        policies,
        SweepAxis::NeighborCount,
        |p, n| {
            p.neighbor_count = n;
            n as f64
        },
    )
}
