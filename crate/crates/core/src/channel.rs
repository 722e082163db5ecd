//! Line-of-sight optical channel between one LED and one photodetector.
//!
//! The channel power gain follows the Lambertian emission model
//!
//! ```text
//! h = (L_r / d²) · R₀(φ) · T_s · g(ψ) · cos ψ
//! R₀(φ) = (ξ + 1) / 2π · cos^ξ φ,      ξ = −1 / log₂ cos Φ½
//! g(ψ)  = ρ² / sin² Ψ_fov  if ψ ≤ Ψ_fov, else 0
//! ```
//!
//! The receiver exposes a finite, ordered list of FOV settings; every gain is
//! evaluated for one of them by index. Transmitter and receiver planes are
//! assumed parallel, so the irradiance and incidence angles coincide for the
//! ceiling layouts built here.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Distance and angles between one LED and one receiver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkGeometry {
    /// Transmission distance `d` in meters.
    pub distance: f64,
    /// Irradiance angle `φ` at the LED, radians.
    pub irradiance_angle: f64,
    /// Incidence angle `ψ` at the detector, radians.
    pub incidence_angle: f64,
}

impl LinkGeometry {
    pub fn new(distance: f64, irradiance_angle: f64, incidence_angle: f64) -> Result<Self> {
        let geometry = LinkGeometry {
            distance,
            irradiance_angle,
            incidence_angle,
        };
        geometry.validate()?;
        Ok(geometry)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.distance > 0.0 && self.distance.is_finite()) {
            return Err(Error::domain("distance", self.distance, "> 0"));
        }
        if !(0.0..FRAC_PI_2).contains(&self.irradiance_angle) {
            return Err(Error::domain(
                "irradiance_angle",
                self.irradiance_angle,
                "[0, π/2)",
            ));
        }
        if !(0.0..FRAC_PI_2).contains(&self.incidence_angle) {
            return Err(Error::domain(
                "incidence_angle",
                self.incidence_angle,
                "[0, π/2)",
            ));
        }
        Ok(())
    }
}

/// Photodetector front end: area, optical filter, concentrator and the
/// selectable FOV settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReceiverOptics {
    /// Physical detector area `L_r`, m².
    pub detector_area: f64,
    /// Optical filter gain `T_s`, constant over incidence angle.
    pub optical_filter_gain: f64,
    /// Concentrator refractive index `ρ`.
    pub refractive_index: f64,
    /// Selectable FOV half-angles in radians, narrowest first.
    pub fov_settings: Vec<f64>,
    /// Responsivity `η`, A/W.
    pub responsivity: f64,
}

impl ReceiverOptics {
    pub fn validate(&self) -> Result<()> {
        if !(self.detector_area > 0.0) {
            return Err(Error::invalid("detector_area", "must be > 0"));
        }
        if !(self.optical_filter_gain >= 0.0) {
            return Err(Error::invalid("optical_filter_gain", "must be >= 0"));
        }
        if !(self.refractive_index >= 1.0) {
            return Err(Error::invalid("refractive_index", "must be >= 1"));
        }
        if !(self.responsivity > 0.0) {
            return Err(Error::invalid("responsivity", "must be > 0"));
        }
        if self.fov_settings.is_empty() {
            return Err(Error::invalid(
                "fov_settings",
                "at least one setting is required",
            ));
        }
        for (i, &fov) in self.fov_settings.iter().enumerate() {
            if !(fov > 0.0 && fov <= FRAC_PI_2) {
                return Err(Error::invalid(
                    format!("fov_settings[{i}]"),
                    format!("{fov} rad is outside (0, π/2]"),
                ));
            }
        }
        if self.fov_settings.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid(
                "fov_settings",
                "must be strictly increasing",
            ));
        }
        Ok(())
    }

    pub fn fov(&self, index: usize) -> Result<f64> {
        self.fov_settings
            .get(index)
            .copied()
            .ok_or(Error::FovIndex {
                index,
                count: self.fov_settings.len(),
            })
    }

    pub fn fov_count(&self) -> usize {
        self.fov_settings.len()
    }
}

/// LED emission pattern and electrical-to-optical conversion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LedOptics {
    /// Semi-angle at half luminance `Φ½`, radians.
    pub half_luminance_angle: f64,
    /// LED conversion gain `P_LED`, W/A.
    pub conversion_gain: f64,
}

impl LedOptics {
    pub fn validate(&self) -> Result<()> {
        if !(self.half_luminance_angle > 0.0 && self.half_luminance_angle < FRAC_PI_2) {
            return Err(Error::invalid(
                "half_luminance_angle",
                "must lie in (0, π/2)",
            ));
        }
        if !(self.conversion_gain > 0.0) {
            return Err(Error::invalid("conversion_gain", "must be > 0"));
        }
        Ok(())
    }
}

/// Lambertian order `ξ = −1 / log₂ cos Φ½`.
///
/// Orders within a few ulps of an integer are returned as that integer, so
/// the usual 60° and 45° emitters give exactly 1 and 2.
pub fn lambertian_order(half_luminance_angle: f64) -> Result<f64> {
    if !(half_luminance_angle > 0.0 && half_luminance_angle < FRAC_PI_2) {
        return Err(Error::domain(
            "half_luminance_angle",
            half_luminance_angle,
            "(0, π/2)",
        ));
    }
    let order = -1.0 / half_luminance_angle.cos().log2();
    let nearest = order.round();
    if (order - nearest).abs() <= 8.0 * f64::EPSILON * nearest {
        Ok(nearest)
    } else {
        Ok(order)
    }
}

/// Lambertian radiant intensity `R₀(φ) = (ξ+1)/2π · cos^ξ φ`, per steradian.
pub fn radiant_intensity(order: f64, irradiance_angle: f64) -> f64 {
    debug_assert!(order > 0.0);
    // cos(π/2) is ~6e-17 in floating point, not 0
    let c = irradiance_angle.cos().max(0.0);
    (order + 1.0) / (2.0 * PI) * c.powf(order)
}

/// Optical concentrator gain. The FOV boundary itself is inside the cone.
pub fn concentrator_gain(fov: f64, incidence_angle: f64, refractive_index: f64) -> f64 {
    if (0.0..=fov).contains(&incidence_angle) {
        let s = fov.sin();
        refractive_index * refractive_index / (s * s)
    } else {
        0.0
    }
}

/// Channel power gain `h` of one link under the receiver's `fov_index` setting.
pub fn channel_gain(
    geometry: &LinkGeometry,
    rx: &ReceiverOptics,
    led: &LedOptics,
    fov_index: usize,
) -> Result<f64> {
    let fov = rx.fov(fov_index)?;
    let order = lambertian_order(led.half_luminance_angle)?;
    let psi = geometry.incidence_angle;
    let gain = rx.detector_area / (geometry.distance * geometry.distance)
        * radiant_intensity(order, geometry.irradiance_angle)
        * rx.optical_filter_gain
        * concentrator_gain(fov, psi, rx.refractive_index)
        * psi.cos().max(0.0);
    Ok(gain)
}

/// Geometry of a ceiling LED seen by a receiver on a parallel plane,
/// `vertical_drop` below and `horizontal_offset` to the side.
pub fn geometry_from_ceiling_layout(
    vertical_drop: f64,
    horizontal_offset: f64,
) -> Result<LinkGeometry> {
    if !(vertical_drop > 0.0 && vertical_drop.is_finite()) {
        return Err(Error::domain("vertical_drop", vertical_drop, "> 0"));
    }
    if !(horizontal_offset >= 0.0 && horizontal_offset.is_finite()) {
        return Err(Error::domain(
            "horizontal_offset",
            horizontal_offset,
            ">= 0",
        ));
    }
    let angle = horizontal_offset.atan2(vertical_drop);
    LinkGeometry::new(vertical_drop.hypot(horizontal_offset), angle, angle)
}
