//! Scenario configuration files and named presets.
//!
//! A config file is a JSON object. If it names a `preset`, the preset is
//! loaded first and the file's fields override it (objects merge key by key,
//! everything else replaces). Units are carried in the field names (`_deg`,
//! `_dB`, `_mA`, ...) and converted to SI exactly once, in
//! [`ScenarioConfig::to_params`].

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use thiserror::Error;

use slipt::channel::{LedOptics, ReceiverOptics};
use slipt::harvest::{BiasRange, HarvesterParams};
use slipt::linkmodel::NoiseModel;
use slipt::optimizer::QosConstraints;
use slipt::scenario::{BaselinePoint, Policy, ScenarioParams, SweepAxis};

/// Environment variable naming a directory searched for `<name>.json`
/// presets before the built-in ones.
pub const PRESET_DIR_ENV: &str = "SLIPT_PRESET_DIR";

pub const DEFAULT_PRESET: &str = "paper-sec5";

const BUILTIN_PRESETS: &[(&str, &str)] =
    &[(DEFAULT_PRESET, include_str!("../presets/paper-sec5.json"))];

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{origin}: malformed JSON: {message}")]
    Syntax { origin: String, message: String },

    #[error("config field `{path}`: {message}")]
    Field { path: String, message: String },

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
}

impl ConfigError {
    fn field(path: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError::Field {
            path: path.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaselineConfig {
    #[serde(rename = "amplitude_mA")]
    pub amplitude_ma: f64,
    #[serde(rename = "bias_mA")]
    pub bias_ma: f64,
    pub time_fraction: f64,
    pub fov_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub axis: String,
    pub rth_values: Vec<f64>,
    pub n_values: Vec<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub json: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plot_data_dir: Option<PathBuf>,
}

/// Fully resolved configuration in human units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    pub fill_factor: f64,
    pub thermal_voltage_v: f64,
    pub dark_saturation_current_a: f64,
    #[serde(rename = "bias_low_mA")]
    pub bias_low_ma: f64,
    #[serde(rename = "bias_high_mA")]
    pub bias_high_ma: f64,
    pub led_conversion_gain_w_per_a: f64,
    pub half_luminance_angle_deg: f64,
    pub detector_area_m2: f64,
    pub optical_filter_gain: f64,
    pub refractive_index: f64,
    pub responsivity_a_per_w: f64,
    pub fov_settings_deg: Vec<f64>,
    pub noise_power_a2: f64,
    pub link_distance_m: f64,
    pub neighbor_offset_m: f64,
    pub neighbor_count: usize,
    #[serde(rename = "neighbor_amplitude_mA")]
    pub neighbor_amplitude_ma: f64,
    #[serde(rename = "neighbor_bias_mA")]
    pub neighbor_bias_ma: f64,
    pub rate_threshold_bpshz: f64,
    #[serde(rename = "sinr_threshold_dB")]
    pub sinr_threshold_db: f64,
    pub baseline: BaselineConfig,
    pub policies: Vec<String>,
    pub sweep: SweepConfig,
    pub oracle_grid: usize,
    #[serde(default)]
    pub output: OutputConfig,
}

fn parse_json(text: &str, origin: &str) -> Result<Value, ConfigError> {
    serde_json::from_str(text).map_err(|e| ConfigError::Syntax {
        origin: origin.to_owned(),
        message: e.to_string(),
    })
}

/// Raw JSON of a preset: `$SLIPT_PRESET_DIR/<name>.json` if present,
/// otherwise a built-in preset.
pub fn preset_value(name: &str) -> Result<Value, ConfigError> {
    if let Some(dir) = std::env::var_os(PRESET_DIR_ENV) {
        let path = Path::new(&dir).join(format!("{name}.json"));
        if path.is_file() {
            let text = fs::read_to_string(&path).map_err(|source| ConfigError::Io {
                path: path.clone(),
                source,
            })?;
            return parse_json(&text, &path.display().to_string());
        }
    }
    BUILTIN_PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| parse_json(text, name))
        .unwrap_or_else(|| Err(ConfigError::UnknownPreset(name.to_owned())))
}

fn merge(base: &mut Value, overlay: Value) {
    match (base, overlay) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

/// Resolves a config value, applying its preset (or `preset_override`,
/// which wins) underneath it.
pub fn resolve(user: Value, preset_override: Option<&str>) -> Result<ScenarioConfig, ConfigError> {
    if !user.is_object() {
        return Err(ConfigError::field("$", "config must be a JSON object"));
    }
    let preset = match preset_override {
        Some(p) => Some(p.to_owned()),
        None => match user.get("preset") {
            None | Some(Value::Null) => None,
            Some(Value::String(s)) => Some(s.clone()),
            Some(_) => return Err(ConfigError::field("preset", "must be a string")),
        },
    };
    let mut value = match &preset {
        Some(name) => preset_value(name)?,
        None => Value::Object(Default::default()),
    };
    merge(&mut value, user);
    if let (Some(name), Value::Object(map)) = (&preset, &mut value) {
        map.insert("preset".into(), Value::String(name.clone()));
    }

    let config: ScenarioConfig = serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        ConfigError::field(path, e.into_inner().to_string())
    })?;
    config.to_params()?;
    config.sweep_axis()?;
    config.policy_list()?;
    Ok(config)
}

/// Loads and resolves a config file. With no file, the preset alone is used.
pub fn load(path: Option<&Path>, preset: Option<&str>) -> Result<ScenarioConfig, ConfigError> {
    let user = match path {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|source| ConfigError::Io {
                path: p.to_path_buf(),
                source,
            })?;
            parse_json(&text, &p.display().to_string())?
        }
        None => Value::Object(Default::default()),
    };
    let preset = preset.or(if path.is_none() {
        Some(DEFAULT_PRESET)
    } else {
        None
    });
    resolve(user, preset)
}

fn milli(x: f64) -> f64 {
    x * 1e-3
}

fn positive(path: &str, x: f64) -> Result<f64, ConfigError> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(ConfigError::field(
            path,
            format!("must be a positive number, got {x}"),
        ))
    }
}

fn non_negative(path: &str, x: f64) -> Result<f64, ConfigError> {
    if x >= 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(ConfigError::field(path, format!("must be >= 0, got {x}")))
    }
}

impl ScenarioConfig {
    /// Index of the FOV setting equal to `degrees`.
    fn fov_index(&self, path: &str, degrees: f64) -> Result<usize, ConfigError> {
        self.fov_settings_deg
            .iter()
            .position(|&d| (d - degrees).abs() < 1e-9)
            .ok_or_else(|| {
                ConfigError::field(
                    path,
                    format!(
                        "{degrees}° is not one of fov_settings_deg {:?}",
                        self.fov_settings_deg
                    ),
                )
            })
    }

    /// Converts to SI units and validates every physical invariant.
    pub fn to_params(&self) -> Result<ScenarioParams, ConfigError> {
        if self.fov_settings_deg.is_empty() {
            return Err(ConfigError::field(
                "fov_settings_deg",
                "needs at least one setting",
            ));
        }
        for (i, &d) in self.fov_settings_deg.iter().enumerate() {
            if !(d > 0.0 && d <= 90.0) {
                return Err(ConfigError::field(
                    format!("fov_settings_deg[{i}]"),
                    format!("{d} is outside (0, 90]"),
                ));
            }
        }
        if self.fov_settings_deg.windows(2).any(|w| w[1] <= w[0]) {
            return Err(ConfigError::field(
                "fov_settings_deg",
                "must be strictly increasing",
            ));
        }
        let half = self.half_luminance_angle_deg;
        if !(half > 0.0 && half < 90.0) {
            return Err(ConfigError::field(
                "half_luminance_angle_deg",
                "must lie in (0, 90)",
            ));
        }
        if !(self.fill_factor > 0.0 && self.fill_factor <= 1.0) {
            return Err(ConfigError::field("fill_factor", "must lie in (0, 1]"));
        }
        if self.refractive_index.is_nan() || self.refractive_index < 1.0 {
            return Err(ConfigError::field("refractive_index", "must be >= 1"));
        }
        let low = non_negative("bias_low_mA", self.bias_low_ma)?;
        let high = positive("bias_high_mA", self.bias_high_ma)?;
        if low >= high {
            return Err(ConfigError::field(
                "bias_high_mA",
                "must exceed bias_low_mA",
            ));
        }
        if !self.sinr_threshold_db.is_finite() {
            return Err(ConfigError::field("sinr_threshold_dB", "must be finite"));
        }
        let bias_range = BiasRange {
            low: milli(low),
            high: milli(high),
        };
        let base = &self.baseline;
        let fov_index = self.fov_index("baseline.fov_deg", base.fov_deg)?;
        if !(0.0..=1.0).contains(&base.time_fraction) {
            return Err(ConfigError::field(
                "baseline.time_fraction",
                "must lie in [0, 1]",
            ));
        }
        let baseline = BaselinePoint {
            peak_amplitude: milli(non_negative("baseline.amplitude_mA", base.amplitude_ma)?),
            dc_bias: milli(non_negative("baseline.bias_mA", base.bias_ma)?),
            time_fraction: base.time_fraction,
            fov_index,
        };
        let headroom = (baseline.dc_bias - bias_range.low).min(bias_range.high - baseline.dc_bias);
        if baseline.dc_bias > bias_range.high || baseline.peak_amplitude > headroom * (1.0 + 1e-12)
        {
            return Err(ConfigError::field(
                "baseline",
                "amplitude/bias pair clips the LED (need amplitude <= min(bias - low, high - bias))",
            ));
        }

        Ok(ScenarioParams {
            led: LedOptics {
                half_luminance_angle: half.to_radians(),
                conversion_gain: positive(
                    "led_conversion_gain_w_per_a",
                    self.led_conversion_gain_w_per_a,
                )?,
            },
            rx: ReceiverOptics {
                detector_area: positive("detector_area_m2", self.detector_area_m2)?,
                optical_filter_gain: non_negative("optical_filter_gain", self.optical_filter_gain)?,
                refractive_index: self.refractive_index,
                fov_settings: self
                    .fov_settings_deg
                    .iter()
                    .map(|d| d.to_radians())
                    .collect(),
                responsivity: positive("responsivity_a_per_w", self.responsivity_a_per_w)?,
            },
            noise: NoiseModel {
                noise_power: positive("noise_power_a2", self.noise_power_a2)?,
            },
            cell: HarvesterParams {
                fill_factor: self.fill_factor,
                thermal_voltage: positive("thermal_voltage_v", self.thermal_voltage_v)?,
                dark_saturation_current: positive(
                    "dark_saturation_current_a",
                    self.dark_saturation_current_a,
                )?,
                bias_range,
            },
            qos: QosConstraints {
                rate_threshold: non_negative("rate_threshold_bpshz", self.rate_threshold_bpshz)?,
                sinr_threshold_linear: 10f64.powf(self.sinr_threshold_db / 10.0),
            },
            link_distance: positive("link_distance_m", self.link_distance_m)?,
            neighbor_offset: non_negative("neighbor_offset_m", self.neighbor_offset_m)?,
            neighbor_count: self.neighbor_count,
            neighbor_amplitude: milli(non_negative(
                "neighbor_amplitude_mA",
                self.neighbor_amplitude_ma,
            )?),
            neighbor_bias: milli(non_negative("neighbor_bias_mA", self.neighbor_bias_ma)?),
            baseline,
        })
    }

    pub fn sweep_axis(&self) -> Result<SweepAxis, ConfigError> {
        SweepAxis::from_name(&self.sweep.axis)
            .ok_or_else(|| ConfigError::field("sweep.axis", "must be \"rth\" or \"n\""))
    }

    /// Parses `policies`: `ts`, `tsbo`, `baseline` (configured FOV) or
    /// `baseline-<deg>`.
    pub fn policy_list(&self) -> Result<Vec<Policy>, ConfigError> {
        self.policies
            .iter()
            .enumerate()
            .map(|(i, name)| self.parse_policy(&format!("policies[{i}]"), name))
            .collect()
    }

    pub fn parse_policy(&self, path: &str, name: &str) -> Result<Policy, ConfigError> {
        match name {
            "ts" => Ok(Policy::Ts),
            "tsbo" => Ok(Policy::Tsbo),
            "baseline" => Ok(Policy::Baseline {
                fov_index: self.fov_index("baseline.fov_deg", self.baseline.fov_deg)?,
            }),
            other => {
                let deg = other
                    .strip_prefix("baseline-")
                    .and_then(|d| d.parse::<f64>().ok())
                    .ok_or_else(|| ConfigError::field(path, format!("unknown policy `{other}`")))?;
                Ok(Policy::Baseline {
                    fov_index: self.fov_index(path, deg)?,
                })
            }
        }
    }

    /// SHA-256 of the canonical JSON form of the resolved config.
    pub fn digest(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }

    pub fn preset_name(&self) -> &str {
        self.preset.as_deref().unwrap_or("none")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn preset() -> ScenarioConfig {
        resolve(json!({}), Some(DEFAULT_PRESET)).unwrap()
    }

    #[test]
    fn builtin_preset_matches_reference_params() {
        assert_eq!(preset().to_params().unwrap(), ScenarioParams::reference());
    }

    #[test]
    fn overrides_merge_over_preset() {
        let cfg = resolve(
            json!({"preset": "paper-sec5", "neighbor_count": 4, "baseline": {"fov_deg": 50.0}}),
            None,
        )
        .unwrap();
        assert_eq!(cfg.neighbor_count, 4);
        assert_eq!(cfg.baseline.fov_deg, 50.0);
        assert_eq!(cfg.baseline.time_fraction, 0.5);
        assert_eq!(cfg.to_params().unwrap().baseline.fov_index, 1);
    }

    #[test]
    fn units_converted_once() {
        let p = preset().to_params().unwrap();
        assert_eq!(p.qos.sinr_threshold_linear, 10.0);
        assert_eq!(p.cell.bias_range.high, 0.012);
        assert_eq!(p.rx.fov_settings[0], 30f64.to_radians());
        assert_eq!(p.neighbor_amplitude, 0.006);
    }

    #[test]
    fn type_errors_carry_field_path() {
        let err = resolve(
            json!({"baseline": {"bias_mA": "six"}}),
            Some(DEFAULT_PRESET),
        )
        .unwrap_err();
        match err {
            ConfigError::Field { path, .. } => assert_eq!(path, "baseline.bias_mA"),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn unknown_fields_rejected() {
        let err = resolve(json!({"fil_factor": 0.5}), Some(DEFAULT_PRESET)).unwrap_err();
        assert!(err.to_string().contains("fil_factor"), "{err}");
    }

    #[test]
    fn invariant_errors_carry_field_path() {
        for (patch, field) in [
            (
                json!({"fov_settings_deg": [50.0, 30.0]}),
                "fov_settings_deg",
            ),
            (json!({"baseline": {"fov_deg": 40.0}}), "baseline.fov_deg"),
            (json!({"fill_factor": 0.0}), "fill_factor"),
            (json!({"baseline": {"bias_mA": 9.0}}), "baseline"),
            (json!({"sweep": {"axis": "x"}}), "sweep.axis"),
            (json!({"policies": ["ts", "magic"]}), "policies[1]"),
        ] {
            match resolve(patch.clone(), Some(DEFAULT_PRESET)).unwrap_err() {
                ConfigError::Field { path, .. } => assert_eq!(path, field, "{patch}"),
                other => panic!("{patch}: {other}"),
            }
        }
    }

    #[test]
    fn incomplete_config_without_preset() {
        let err = resolve(json!({"fill_factor": 0.75}), None).unwrap_err();
        assert!(matches!(err, ConfigError::Field { .. }));
    }

    #[test]
    fn unknown_preset() {
        assert!(matches!(
            resolve(json!({"preset": "nope"}), None),
            Err(ConfigError::UnknownPreset(_))
        ));
    }

    #[test]
    fn policies_parse() {
        let cfg = preset();
        assert_eq!(
            cfg.policy_list().unwrap(),
            vec![
                Policy::Ts,
                Policy::Tsbo,
                Policy::Baseline { fov_index: 0 },
                Policy::Baseline { fov_index: 1 }
            ]
        );
        assert_eq!(
            cfg.parse_policy("p", "baseline").unwrap(),
            Policy::Baseline { fov_index: 0 }
        );
    }

    #[test]
    fn digest_is_stable_and_sensitive() {
        let a = preset();
        assert_eq!(a.digest(), preset().digest());
        let b = resolve(json!({"neighbor_count": 2}), Some(DEFAULT_PRESET)).unwrap();
        assert_ne!(a.digest(), b.digest());
    }
}
