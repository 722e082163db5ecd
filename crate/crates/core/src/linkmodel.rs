//! Electrical-domain link quantities: interference aggregates, SINR and the
//! achievable-rate lower bound.
//!
//! Everything here works on peak amplitudes, DC biases and aggregate
//! powers; no time-domain waveform is ever synthesized.

use std::f64::consts::{E, PI};

use serde::{Deserialize, Serialize};

use crate::channel::{LedOptics, ReceiverOptics};
use crate::error::{Error, Result};
use crate::harvest::BiasRange;

/// Relative slack applied when checking inequality constraints, so that
/// solutions sitting exactly on a constraint survive rounding.
pub const CONSTRAINT_SLACK: f64 = 1e-9;

/// `value >= threshold` up to [`CONSTRAINT_SLACK`] relative to the threshold.
pub fn at_least(value: f64, threshold: f64) -> bool {
    value >= threshold - CONSTRAINT_SLACK * threshold.abs()
}

/// `value <= limit` up to [`CONSTRAINT_SLACK`] relative to the limit.
pub fn at_most(value: f64, limit: f64) -> bool {
    value <= limit + CONSTRAINT_SLACK * limit.abs()
}

/// Receiver noise, aggregated into a single electrical power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// `σ²` in A².
    pub noise_power: f64,
}

impl NoiseModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.noise_power > 0.0) {
            return Err(Error::invalid("noise_power", "must be > 0"));
        }
        Ok(())
    }
}

/// One interfering LED as seen by the receiver under a given FOV setting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterfererLink {
    pub gain: f64,
    pub peak_amplitude: f64,
    pub dc_bias: f64,
}

/// AC power and DC current that all interferers contribute under one FOV
/// setting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterferenceAggregate {
    /// `P_I`, A².
    pub electrical_power: f64,
    /// `I_2`, A.
    pub dc_current: f64,
    pub fov_index: usize,
}

/// Transmit/receive settings of a two-phase frame.
///
/// Phase 1 (duration `time_fraction`) carries data with the given peak
/// amplitude and DC bias; phase 2 harvests only, at the maximum bias.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    pub peak_amplitude: f64,
    pub dc_bias: f64,
    pub time_fraction: f64,
    pub fov_phase1: usize,
    pub fov_phase2: usize,
}

impl OperatingPoint {
    /// Checks the LED linear-region (no clipping) constraint
    /// `0 ≤ A ≤ min(B − I_L, I_H − B)` with `B ∈ [I_L, I_H]`, and `T ∈ [0, 1]`.
    pub fn check(&self, bias: &BiasRange) -> Result<()> {
        let span = bias.high - bias.low;
        let slack = CONSTRAINT_SLACK * span;
        if !(self.dc_bias >= bias.low - slack && self.dc_bias <= bias.high + slack) {
            return Err(Error::domain("dc_bias", self.dc_bias, "within [I_L, I_H]"));
        }
        if !(self.peak_amplitude >= 0.0) {
            return Err(Error::domain("peak_amplitude", self.peak_amplitude, ">= 0"));
        }
        let headroom = (self.dc_bias - bias.low).min(bias.high - self.dc_bias);
        if self.peak_amplitude > headroom + slack {
            return Err(Error::domain(
                "peak_amplitude",
                self.peak_amplitude,
                "<= min(B - I_L, I_H - B) to avoid clipping",
            ));
        }
        if !(0.0..=1.0).contains(&self.time_fraction) {
            return Err(Error::domain("time_fraction", self.time_fraction, "[0, 1]"));
        }
        Ok(())
    }
}

/// Photocurrent per ampere of LED drive for a link of gain `h`: `η h P_LED`.
pub fn current_gain(h: f64, led: &LedOptics, rx: &ReceiverOptics) -> f64 {
    rx.responsivity * h * led.conversion_gain
}

/// `P_I = Σ (η h_n P_LED A_n')²`.
pub fn interference_power(
    interferers: &[InterfererLink],
    rx: &ReceiverOptics,
    led: &LedOptics,
) -> f64 {
    interferers
        .iter()
        .map(|n| {
            let i = current_gain(n.gain, led, rx) * n.peak_amplitude;
            i * i
        })
        .sum()
}

/// `I_2 = Σ η h_n P_LED B_n'`.
pub fn interference_dc(
    interferers: &[InterfererLink],
    rx: &ReceiverOptics,
    led: &LedOptics,
) -> f64 {
    interferers
        .iter()
        .map(|n| current_gain(n.gain, led, rx) * n.dc_bias)
        .sum()
}

pub fn aggregate_interference(
    interferers: &[InterfererLink],
    rx: &ReceiverOptics,
    led: &LedOptics,
    fov_index: usize,
) -> InterferenceAggregate {
    InterferenceAggregate {
        electrical_power: interference_power(interferers, rx, led),
        dc_current: interference_dc(interferers, rx, led),
        fov_index,
    }
}

/// Electrical SINR `γ = (η h P_LED A)² / (P_I + σ²)`.
pub fn sinr(
    amplitude: f64,
    h: f64,
    led: &LedOptics,
    rx: &ReceiverOptics,
    interference_power: f64,
    noise: &NoiseModel,
) -> f64 {
    let signal = current_gain(h, led, rx) * amplitude;
    signal * signal / (interference_power + noise.noise_power)
}

/// Spectral efficiency `log₂(1 + e γ / 2π)` of a frame spent entirely on data.
pub fn spectral_efficiency(sinr: f64) -> f64 {
    (E / (2.0 * PI) * sinr).ln_1p() / std::f64::consts::LN_2
}

/// Rate lower bound `R = T log₂(1 + e γ / 2π)` in bit/s/Hz.
pub fn rate_lower_bound(time_fraction: f64, sinr: f64) -> f64 {
    time_fraction * spectral_efficiency(sinr)
}
