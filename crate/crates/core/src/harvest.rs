//! Solar-panel harvesting of the received DC photocurrent.
//!
//! The cell is modeled by the diode law `V_oc = V_t ln(1 + I_DC / I_0)` and a
//! constant fill factor, giving harvested power `f · I_DC · V_oc`. Energies
//! are per frame of unit duration.

use serde::{Deserialize, Serialize};

use crate::channel::{LedOptics, ReceiverOptics};
use crate::error::{Error, Result};
use crate::linkmodel::current_gain;

/// LED drive-current limits `[I_L, I_H]` of the linear region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiasRange {
    pub low: f64,
    pub high: f64,
}

impl BiasRange {
    /// `(I_H + I_L) / 2`
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.high + self.low)
    }

    /// `(I_H − I_L) / 2`, the largest clip-free peak amplitude.
    pub fn max_amplitude(&self) -> f64 {
        0.5 * (self.high - self.low)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarvesterParams {
    pub fill_factor: f64,
    /// `V_t`, volts.
    pub thermal_voltage: f64,
    /// `I_0`, amperes.
    pub dark_saturation_current: f64,
    pub bias_range: BiasRange,
}

impl HarvesterParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.fill_factor > 0.0 && self.fill_factor <= 1.0) {
            return Err(Error::invalid("fill_factor", "must lie in (0, 1]"));
        }
        if !(self.thermal_voltage > 0.0) {
            return Err(Error::invalid("thermal_voltage", "must be > 0"));
        }
        if !(self.dark_saturation_current > 0.0) {
            return Err(Error::invalid("dark_saturation_current", "must be > 0"));
        }
        let b = self.bias_range;
        if !(b.low >= 0.0 && b.low < b.high && b.high.is_finite()) {
            return Err(Error::invalid("bias_range", "requires 0 <= I_L < I_H"));
        }
        Ok(())
    }
}

/// Harvested energy of one unit-duration frame, split by phase.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EnergyReport {
    pub phase1_energy: f64,
    pub phase2_energy: f64,
    pub total_energy: f64,
}

impl EnergyReport {
    fn new(phase1_energy: f64, phase2_energy: f64) -> Self {
        EnergyReport {
            phase1_energy,
            phase2_energy,
            total_energy: phase1_energy + phase2_energy,
        }
    }
}

/// Open-circuit voltage of the cell for a DC photocurrent.
pub fn open_circuit_voltage(dc_current: f64, cell: &HarvesterParams) -> Result<f64> {
    if !(dc_current >= 0.0) {
        return Err(Error::domain("dc_current", dc_current, ">= 0"));
    }
    Ok(voc(dc_current, cell))
}

fn voc(dc_current: f64, cell: &HarvesterParams) -> f64 {
    cell.thermal_voltage * (dc_current / cell.dark_saturation_current).ln_1p()
}

/// `I_DC = η h P_LED B + I_2`.
pub fn dc_component(
    h: f64,
    dc_bias: f64,
    led: &LedOptics,
    rx: &ReceiverOptics,
    interference_dc: f64,
) -> f64 {
    current_gain(h, led, rx) * dc_bias + interference_dc
}

/// Harvested power `f · I_DC · V_oc(I_DC)` in watts. Negative currents
/// harvest nothing.
pub fn harvested_power(dc_current: f64, cell: &HarvesterParams) -> f64 {
    if dc_current <= 0.0 {
        return 0.0;
    }
    cell.fill_factor * dc_current * voc(dc_current, cell)
}

/// Energy of a time-splitting frame: data phase of length `t` at
/// `phase1_dc`, harvest-only phase of length `1 − t` at `phase2_dc`.
pub fn energy_ts(t: f64, phase1_dc: f64, phase2_dc: f64, cell: &HarvesterParams) -> EnergyReport {
    debug_assert!((0.0..=1.0).contains(&t));
    EnergyReport::new(
        t * harvested_power(phase1_dc, cell),
        (1.0 - t) * harvested_power(phase2_dc, cell),
    )
}

/// Data-phase link seen by the harvester: dedicated gain and interference DC.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseLink {
    pub gain: f64,
    pub interference_dc: f64,
}

/// Energy of a frame whose data phase uses DC bias `b1` instead of the
/// midpoint bias.
pub fn energy_tsbo(
    t: f64,
    b1: f64,
    phase1: PhaseLink,
    phase2_dc: f64,
    led: &LedOptics,
    rx: &ReceiverOptics,
    cell: &HarvesterParams,
) -> EnergyReport {
    let phase1_dc = dc_component(phase1.gain, b1, led, rx, phase1.interference_dc);
    energy_ts(t, phase1_dc, phase2_dc, cell)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn cell() -> HarvesterParams {
        HarvesterParams {
            fill_factor: 0.75,
            thermal_voltage: 0.025,
            dark_saturation_current: 1e-9,
            bias_range: BiasRange {
                low: 0.0,
                high: 12e-3,
            },
        }
    }

    fn rx() -> ReceiverOptics {
        ReceiverOptics {
            detector_area: 0.04,
            optical_filter_gain: 1.0,
            refractive_index: 1.5,
            fov_settings: vec![30f64.to_radians(), 50f64.to_radians()],
            responsivity: 0.4,
        }
    }

    fn led() -> LedOptics {
        LedOptics {
            half_luminance_angle: 60f64.to_radians(),
            conversion_gain: 20.0,
        }
    }

    // dedicated-link gains at 30° and 50°, neighbor DC at 50° (N = 1)
    const H30: f64 = 0.050_929_581_789_406_51;
    const H50: f64 = 0.021_697_124_725_506_89;
    const I2_50: f64 = 2.603_654_967_060_826e-4;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn open_circuit_voltage_values() {
        let c = cell();
        assert_eq!(open_circuit_voltage(0.0, &c).unwrap(), 0.0);
        let v = open_circuit_voltage(1e-9 * (E - 1.0), &c).unwrap();
        assert!(rel(v, 0.025) < 1e-12);
        let v = open_circuit_voltage(4.8892e-3, &c).unwrap();
        assert!((v - 0.3851).abs() < 1e-3);
        assert!(open_circuit_voltage(-1e-6, &c).is_err());
    }

    #[test]
    fn dc_component_values() {
        let (rx, led) = (rx(), led());
        let i = dc_component(H30, 12e-3, &led, &rx, 0.0);
        assert!(rel(i, 4.8892e-3) < 1e-3, "{i}");
        assert_eq!(dc_component(H30, 0.0, &led, &rx, 0.0), 0.0);
        let i = dc_component(H50, 12e-3, &led, &rx, I2_50);
        assert!(rel(i, 2.343e-3) < 0.01, "{i}");
    }

    #[test]
    fn harvested_power_values() {
        let c = cell();
        assert_eq!(harvested_power(0.0, &c), 0.0);
        assert!(rel(harvested_power(4.8892e-3, &c), 1.412e-3) < 0.01);
    }

    #[test]
    fn doubling_current_bound() {
        // P(2x) = 2 f x V_t ln(1 + 2x/I_0) and ln(1 + 2u) <= ln 2 + ln(1 + u)
        let c = cell();
        for x in [1e-9, 1e-6, 1e-4, 4.8892e-3, 0.1] {
            let bound = 2.0 * harvested_power(x, &c)
                + 2.0 * c.fill_factor * x * c.thermal_voltage * std::f64::consts::LN_2;
            assert!(harvested_power(2.0 * x, &c) <= bound * (1.0 + 1e-12));
            assert!(harvested_power(2.0 * x, &c) > 2.0 * harvested_power(x, &c));
        }
    }

    #[test]
    fn ts_phase_edges() {
        let c = cell();
        let r = energy_ts(1.0, 2e-3, 5e-3, &c);
        assert_eq!(r.phase2_energy, 0.0);
        let r = energy_ts(0.0, 2e-3, 5e-3, &c);
        assert_eq!(r.phase1_energy, 0.0);
        assert_eq!(r.total_energy, r.phase1_energy + r.phase2_energy);
    }

    #[test]
    fn ts_reference_frame() {
        let (rx, led, c) = (rx(), led(), cell());
        let p1 = dc_component(H30, 6e-3, &led, &rx, 0.0);
        let p2 = dc_component(H30, 12e-3, &led, &rx, 0.0);
        let r = energy_ts(0.2239, p1, p2, &c);
        assert!(rel(r.total_energy, 1.247e-3) < 0.01, "{}", r.total_energy);
    }

    #[test]
    fn tsbo_reduces_to_ts_at_midpoint() {
        let (rx, led, c) = (rx(), led(), cell());
        let link = PhaseLink {
            gain: H30,
            interference_dc: 0.0,
        };
        let p2 = dc_component(H30, 12e-3, &led, &rx, 0.0);
        let mid = c.bias_range.midpoint();
        let a = energy_tsbo(0.4, mid, link, p2, &led, &rx, &c);
        let b = energy_ts(0.4, dc_component(H30, mid, &led, &rx, 0.0), p2, &c);
        assert_eq!(a, b);
        assert_eq!(
            energy_tsbo(0.0, mid, link, p2, &led, &rx, &c).phase1_energy,
            0.0
        );
        let r = energy_tsbo(1.0, 0.011_998_7, link, p2, &led, &rx, &c);
        assert!(rel(r.total_energy, 1.412e-3) < 0.01);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn power_strictly_increasing(i in 1e-12f64..0.1, di in 1e-12f64..0.1) {
                let c = cell();
                prop_assert!(harvested_power(i + di, &c) > harvested_power(i, &c));
            }

            #[test]
            fn voc_concave(a in 1e-9f64..0.05, b in 1e-9f64..0.05) {
                let c = cell();
                let mid = open_circuit_voltage(0.5 * (a + b), &c).unwrap();
                let chord = 0.5 * (open_circuit_voltage(a, &c).unwrap() + open_circuit_voltage(b, &c).unwrap());
                prop_assert!(mid >= chord - 1e-15);
            }

            #[test]
            fn ts_energy_decreasing_in_t(p1 in 1e-6f64..5e-3, extra in 1e-6f64..5e-3, t in 0.0f64..0.99, dt in 1e-3f64..0.01) {
                let c = cell();
                let a = energy_ts(t, p1, p1 + extra, &c);
                let b = energy_ts((t + dt).min(1.0), p1, p1 + extra, &c);
                prop_assert!(b.total_energy < a.total_energy);
            }

            #[test]
            fn tsbo_dominates_ts_above_midpoint(t in 0.0f64..1.0, b1 in 6e-3f64..12e-3) {
                let (rx, led, c) = (rx(), led(), cell());
                let link = PhaseLink { gain: H30, interference_dc: 0.0 };
                let p2 = dc_component(H30, 12e-3, &led, &rx, 0.0);
                let ts = energy_tsbo(t, c.bias_range.midpoint(), link, p2, &led, &rx, &c);
                let bo = energy_tsbo(t, b1, link, p2, &led, &rx, &c);
                prop_assert!(bo.total_energy >= ts.total_energy);
            }
        }
    }
}
