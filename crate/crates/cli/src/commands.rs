//! Subcommand implementations. Each returns an [`Outcome`] on success;
//! any error is a usage/config problem (exit code 1).

use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Serialize;

use slipt::optimizer::{
    brute_force_oracle, solve_ts, solve_tsbo, OracleGrid, OracleShape, PolicySolution,
};
use slipt::scenario::{
    build_scenario, sweep_neighbor_count, sweep_rate_threshold, Policy, Scenario, SweepAxis,
    SweepRecord,
};

use crate::config::{self, ScenarioConfig};
use crate::table::{self, Metadata};

/// Largest relative energy gap accepted by `oracle-check`.
pub const ORACLE_GAP_LIMIT: f64 = 5e-3;

pub const EXIT_CONFIG_ERROR: u8 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    Infeasible,
    OracleMismatch,
}

impl Outcome {
    pub fn code(self) -> u8 {
        match self {
            Outcome::Success => 0,
            Outcome::Infeasible => 2,
            Outcome::OracleMismatch => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum PolicyChoice {
    Ts,
    Tsbo,
    Baseline,
}

fn scenario_of(cfg: &ScenarioConfig) -> Result<Scenario> {
    let params = cfg.to_params()?;
    Ok(build_scenario(&params)?)
}

pub fn metadata(cfg: &ScenarioConfig) -> Metadata {
    Metadata {
        preset: cfg.preset_name().to_owned(),
        version: env!("CARGO_PKG_VERSION").to_owned(),
        config_sha256: cfg.digest(),
    }
}

fn write_solution(out: &mut dyn Write, scenario: &Scenario, sol: &PolicySolution) -> Result<()> {
    writeln!(out, "policy: {}", sol.policy)?;
    writeln!(out, "feasible: {}", sol.feasible)?;
    if let Some(op) = sol.operating_point {
        writeln!(
            out,
            "fov_phase1_deg: {}",
            table::format_number(scenario.fov_degrees(op.fov_phase1)?)
        )?;
        writeln!(
            out,
            "fov_phase2_deg: {}",
            table::format_number(scenario.fov_degrees(op.fov_phase2)?)
        )?;
        writeln!(
            out,
            "time_fraction: {}",
            table::format_number(op.time_fraction)
        )?;
        writeln!(
            out,
            "peak_amplitude_a: {}",
            table::format_number(op.peak_amplitude)
        )?;
        writeln!(out, "dc_bias_a: {}", table::format_number(op.dc_bias))?;
        writeln!(
            out,
            "harvested_energy_j: {}",
            table::format_number(sol.harvested_energy())
        )?;
        writeln!(
            out,
            "phase1_energy_j: {}",
            table::format_number(sol.energy.phase1_energy)
        )?;
        writeln!(
            out,
            "phase2_energy_j: {}",
            table::format_number(sol.energy.phase2_energy)
        )?;
        writeln!(
            out,
            "rate_bpshz: {}",
            table::format_number(sol.achieved_rate)
        )?;
        writeln!(
            out,
            "sinr_linear: {}",
            table::format_number(sol.achieved_sinr)
        )?;
    }
    for r in &sol.rejections {
        writeln!(out, "rejected: {r}")?;
    }
    Ok(())
}

/// Solves one policy on the configured scenario.
pub fn cmd_solve(
    cfg: &ScenarioConfig,
    policy: PolicyChoice,
    out: &mut dyn Write,
) -> Result<Outcome> {
    let params = cfg.to_params()?;
    let scenario = build_scenario(&params)?;
    let solution = match policy {
        PolicyChoice::Ts => Policy::Ts,
        PolicyChoice::Tsbo => Policy::Tsbo,
        PolicyChoice::Baseline => Policy::Baseline {
            fov_index: params.baseline.fov_index,
        },
    }
    .solve(&scenario, &params.baseline)?;
    write_solution(out, &scenario, &solution)?;
    Ok(if solution.feasible {
        Outcome::Success
    } else {
        Outcome::Infeasible
    })
}

/// Runs the configured sweep along `axis` (or the config's own axis).
pub fn run_sweep(
    cfg: &ScenarioConfig,
    axis: Option<SweepAxis>,
) -> Result<(SweepAxis, Vec<SweepRecord>)> {
    let axis = match axis {
        Some(a) => a,
        None => cfg.sweep_axis()?,
    };
    let params = cfg.to_params()?;
    let policies = cfg.policy_list()?;
    if policies.is_empty() {
        bail!("config field `policies`: no policies to sweep");
    }
    let records = match axis {
        SweepAxis::RateThreshold => {
            if cfg.sweep.rth_values.is_empty() {
                bail!("config field `sweep.rth_values`: sweep list is empty");
            }
            sweep_rate_threshold(&params, &cfg.sweep.rth_values, &policies)?
        }
        SweepAxis::NeighborCount => {
            if cfg.sweep.n_values.is_empty() {
                bail!("config field `sweep.n_values`: sweep list is empty");
            }
            sweep_neighbor_count(&params, &cfg.sweep.n_values, &policies)?
        }
    };
    Ok((axis, records))
}

#[derive(Serialize)]
struct JsonMirror<'a> {
    metadata: &'a Metadata,
    columns: &'a [&'a str],
    records: &'a [SweepRecord],
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

pub struct SweepOutputs<'a> {
    pub csv: Option<&'a Path>,
    pub json: Option<&'a Path>,
    pub plot_data_dir: Option<&'a Path>,
}

/// Runs a sweep and writes the CSV table to `outputs.csv` (stdout if unset),
/// plus the optional JSON mirror and `fig3.csv` / `fig4.csv` plot files.
pub fn cmd_sweep(
    cfg: &ScenarioConfig,
    axis: Option<SweepAxis>,
    outputs: SweepOutputs<'_>,
    stdout: &mut dyn Write,
) -> Result<Outcome> {
    let (axis, records) = run_sweep(cfg, axis)?;
    let meta = metadata(cfg);
    let text = table::write_table(&records, &meta);
    match outputs.csv {
        Some(path) => write_file(path, &text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    if let Some(path) = outputs.json {
        let mirror = JsonMirror {
            metadata: &meta,
            columns: &table::COLUMNS,
            records: &records,
        };
        write_file(path, &(serde_json::to_string_pretty(&mirror)? + "\n"))?;
    }
    if let Some(dir) = outputs.plot_data_dir {
        let name = match axis {
            SweepAxis::RateThreshold => "fig3.csv",
            SweepAxis::NeighborCount => "fig4.csv",
        };
        write_file(&dir.join(name), &text)?;
    }
    Ok(Outcome::Success)
}

/// Closed-form versus brute-force comparison for one policy.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleComparison {
    pub shape: OracleShape,
    pub closed_form: PolicySolution,
    pub oracle: PolicySolution,
    /// `|E_closed − E_oracle| / E_oracle`, or `None` when either side is
    /// infeasible.
    pub gap: Option<f64>,
    /// Oracle bias minus (midpoint − one bias step); negative means the
    /// upper-half-bias property failed. Only for TSBO.
    pub bias_margin: Option<f64>,
}

impl OracleComparison {
    pub fn agrees(&self) -> bool {
        match (self.closed_form.feasible, self.oracle.feasible) {
            (false, false) => true,
            (true, true) => {
                self.gap.is_some_and(|g| g <= ORACLE_GAP_LIMIT)
                    && self.bias_margin.is_none_or(|m| m >= 0.0)
            }
            _ => false,
        }
    }
}

pub fn compare_with_oracle(scenario: &Scenario, grid: OracleGrid) -> Result<Vec<OracleComparison>> {
    let mut out = Vec::with_capacity(2);
    for shape in [OracleShape::Ts, OracleShape::Tsbo] {
        let closed_form = match shape {
            OracleShape::Ts => solve_ts(scenario),
            OracleShape::Tsbo => solve_tsbo(scenario),
        };
        let oracle = brute_force_oracle(scenario, grid, shape)?;
        let gap = (closed_form.feasible && oracle.feasible).then(|| {
            let e = oracle.harvested_energy();
            (closed_form.harvested_energy() - e).abs() / e
        });
        let bias_margin = match (shape, oracle.operating_point) {
            (OracleShape::Tsbo, Some(op)) => {
                Some(op.dc_bias - (scenario.bias().midpoint() - grid.bias_step(scenario)))
            }
            _ => None,
        };
        out.push(OracleComparison {
            shape,
            closed_form,
            oracle,
            gap,
            bias_margin,
        });
    }
    Ok(out)
}

pub fn cmd_oracle_check(
    cfg: &ScenarioConfig,
    grid: Option<usize>,
    out: &mut dyn Write,
) -> Result<Outcome> {
    let points = grid.unwrap_or(cfg.oracle_grid);
    if points < 2 {
        bail!("oracle grid needs at least 2 points per axis, got {points}");
    }
    let scenario = scenario_of(cfg)?;
    let comparisons = compare_with_oracle(&scenario, OracleGrid::uniform(points))?;
    writeln!(out, "grid_points_per_axis: {points}")?;
    let mut all_ok = true;
    for c in &comparisons {
        let name = match c.shape {
            OracleShape::Ts => "ts",
            OracleShape::Tsbo => "tsbo",
        };
        let verdict = if c.agrees() { "ok" } else { "MISMATCH" };
        all_ok &= c.agrees();
        match c.gap {
            Some(gap) => writeln!(
                out,
                "{name}: closed_form_j={} oracle_j={} relative_gap={} limit={} {verdict}",
                table::format_number(c.closed_form.harvested_energy()),
                table::format_number(c.oracle.harvested_energy()),
                table::format_number(gap),
                table::format_number(ORACLE_GAP_LIMIT),
            )?,
            None => writeln!(
                out,
                "{name}: closed_form_feasible={} oracle_feasible={} {verdict}",
                c.closed_form.feasible, c.oracle.feasible
            )?,
        }
        if let Some(m) = c.bias_margin {
            let status = if m >= 0.0 { "ok" } else { "VIOLATED" };
            writeln!(
                out,
                "{name}: oracle bias in upper half of drive range (within one step): {status}"
            )?;
        }
    }
    Ok(if all_ok {
        Outcome::Success
    } else {
        Outcome::OracleMismatch
    })
}

/// Pretty-printed JSON of a resolved preset.
pub fn cmd_preset_dump(name: &str, out: &mut dyn Write) -> Result<Outcome> {
    let cfg = config::resolve(serde_json::json!({}), Some(name))?;
    writeln!(out, "{}", serde_json::to_string_pretty(&cfg)?)?;
    Ok(Outcome::Success)
}
