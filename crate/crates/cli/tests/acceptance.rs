//! Acceptance suite. Prints one `[PASS]` / `[FAIL]` line per criterion and
//! exits nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use serde_json::json;

use slipt::channel::{concentrator_gain, lambertian_order};
use slipt::harvest::{energy_ts, harvested_power, open_circuit_voltage};
use slipt::linkmodel::rate_lower_bound;
use slipt::optimizer::{solve_ts, solve_tsbo, OracleGrid, PolicySolution, PolicyTag};
use slipt::scenario::{build_scenario, ScenarioParams, SweepAxis, SweepRecord};
use slipt_cli::commands::{cmd_sweep, compare_with_oracle, run_sweep, SweepOutputs};
use slipt_cli::config::{resolve, ScenarioConfig, DEFAULT_PRESET};
use slipt_cli::table::strip_metadata;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

const NEIGHBOR_COUNTS: [usize; 5] = [0, 1, 2, 4, 8];
const RATE_THRESHOLDS: [f64; 5] = [1.0, 3.0, 5.0, 7.0, 9.0];
const ORACLE_POINTS: usize = 400;
const ORACLE_BUDGET: Duration = Duration::from_secs(60);

fn preset() -> ScenarioConfig {
    resolve(json!({}), Some(DEFAULT_PRESET)).expect("built-in preset resolves")
}

fn params_at(n: usize, rth: f64) -> ScenarioParams {
    let mut p = preset().to_params().expect("preset converts");
    p.neighbor_count = n;
    p.qos.rate_threshold = rth;
    p
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn same_fov(a_deg: f64, b_deg: f64) -> bool {
    (a_deg - b_deg).abs() < 1e-9
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn sweep(axis: SweepAxis) -> Result<Vec<SweepRecord>, String> {
    run_sweep(&preset(), Some(axis))
        .map(|(_, r)| r)
        .map_err(|e| format!("{e:#}"))
}

fn energy_of<'a>(records: &'a [SweepRecord], policy: &str, value: f64) -> Option<&'a SweepRecord> {
    records
        .iter()
        .find(|r| r.policy == policy && r.axis_value == value)
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut worst_gap: f64 = 0.0;
    let mut compared = 0;
    for n in NEIGHBOR_COUNTS {
        for rth in RATE_THRESHOLDS {
            let scenario = build_scenario(&params_at(n, rth)).map_err(|e| e.to_string())?;
            let cmps = compare_with_oracle(&scenario, OracleGrid::uniform(ORACLE_POINTS))
                .map_err(|e| e.to_string())?;
            for c in cmps {
                ensure(c.closed_form.feasible && c.oracle.feasible, || {
                    format!(
                        "N={n} R_th={rth} {:?}: expected both sides feasible",
                        c.shape
                    )
                })?;
                let gap = c.gap.unwrap_or(f64::INFINITY);
                ensure(c.agrees(), || {
                    format!(
                        "N={n} R_th={rth} {:?}: gap {gap:.3e}, bias margin {:?}",
                        c.shape, c.bias_margin
                    )
                })?;
                worst_gap = worst_gap.max(gap);
                compared += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < ORACLE_BUDGET, || {
        format!("took {elapsed:.1?}, budget {ORACLE_BUDGET:?}")
    })?;
    Ok(format!(
        "{compared} comparisons at {ORACLE_POINTS} points/axis, worst gap {:.3}%, {elapsed:.1?}",
        worst_gap * 100.0
    ))
}

fn check_tight(sol: &PolicySolution, rth: f64, i_high: f64, at: &str) -> Result<(), String> {
    if !sol.feasible {
        return Ok(());
    }
    ensure(rel(sol.achieved_rate, rth) <= 1e-6, || {
        format!(
            "{at} {}: rate {} vs R_th {rth}",
            sol.policy, sol.achieved_rate
        )
    })?;
    if sol.policy == PolicyTag::Tsbo {
        let op = sol
            .operating_point
            .ok_or_else(|| format!("{at}: feasible TSBO without operating point"))?;
        ensure(rel(op.peak_amplitude + op.dc_bias, i_high) <= 1e-6, || {
            format!(
                "{at}: A1 + B1 = {} vs I_H = {i_high}",
                op.peak_amplitude + op.dc_bias
            )
        })?;
    }
    Ok(())
}

fn constraint_tightness() -> Outcome {
    let mut checked = 0;
    let ns = NEIGHBOR_COUNTS.into_iter().chain(0..=15);
    let grid: Vec<(usize, f64)> = ns
        .flat_map(|n| {
            RATE_THRESHOLDS
                .into_iter()
                .chain((1..=10).map(f64::from))
                .map(move |r| (n, r))
        })
        .collect();
    for (n, rth) in grid {
        let scenario = build_scenario(&params_at(n, rth)).map_err(|e| e.to_string())?;
        let i_high = scenario.bias().high;
        for sol in [solve_ts(&scenario), solve_tsbo(&scenario)] {
            check_tight(&sol, rth, i_high, &format!("N={n} R_th={rth}"))?;
            checked += usize::from(sol.feasible);
        }
    }
    Ok(format!("{checked} feasible optimized solutions are tight"))
}

fn dominance_ordering() -> Outcome {
    let mut points = 0;
    for axis in [SweepAxis::RateThreshold, SweepAxis::NeighborCount] {
        let records = sweep(axis)?;
        let mut values: Vec<f64> = records.iter().map(|r| r.axis_value).collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        for v in values {
            let e = |p: &str| energy_of(&records, p, v).and_then(SweepRecord::harvested_energy);
            let (tsbo, ts) = (e("tsbo"), e("ts"));
            let at = format!("{}={v}", axis.name());
            if let (Some(tsbo), Some(ts)) = (tsbo, ts) {
                ensure(tsbo >= ts * (1.0 - 1e-12), || {
                    format!("{at}: TSBO {tsbo:.6e} < TS {ts:.6e}")
                })?;
            }
            for base in ["baseline-30", "baseline-50"] {
                if let (Some(b), Some(ts)) = (e(base), ts) {
                    ensure(ts >= b * (1.0 - 1e-12), || {
                        format!("{at}: TS {ts:.6e} < {base} {b:.6e}")
                    })?;
                }
            }
            points += 1;
        }
    }
    let records = sweep(SweepAxis::RateThreshold)?;
    let pick = |p: &str| {
        energy_of(&records, p, 7.0)
            .and_then(SweepRecord::harvested_energy)
            .ok_or_else(|| format!("{p} infeasible at R_th=7"))
    };
    let (tsbo, ts) = (pick("tsbo")?, pick("ts")?);
    ensure(tsbo > ts, || {
        format!("no strict gap: TSBO {tsbo:.6e}, TS {ts:.6e}")
    })?;
    ensure(rel(tsbo, 1.412e-3) <= 0.01, || {
        format!("TSBO {tsbo:.6e} J not within 1% of 1.412e-3")
    })?;
    ensure(rel(ts, 1.247e-3) <= 0.01, || {
        format!("TS {ts:.6e} J not within 1% of 1.247e-3")
    })?;
    Ok(format!(
        "{points} sweep points ordered; at R_th=7, N=1: TSBO {tsbo:.4e} J > TS {ts:.4e} J"
    ))
}

fn baseline_infeasibility() -> Outcome {
    let records = sweep(SweepAxis::RateThreshold)?;
    let base: Vec<&SweepRecord> = records
        .iter()
        .filter(|r| r.policy == "baseline-50")
        .collect();
    ensure(!base.is_empty(), || "no baseline-50 rows in sweep".into())?;
    let first_infeasible = base
        .iter()
        .find(|r| !r.feasible())
        .map(|r| r.axis_value)
        .ok_or_else(|| "baseline-50 never becomes infeasible".to_string())?;
    for r in &base {
        ensure(r.feasible() == (r.axis_value < first_infeasible), || {
            format!(
                "baseline-50 feasibility not a threshold in R_th (R_th={})",
                r.axis_value
            )
        })?;
    }
    for r in records
        .iter()
        .filter(|r| r.policy == "ts" || r.policy == "tsbo")
    {
        ensure(r.feasible(), || {
            format!("{} infeasible at R_th={}", r.policy, r.axis_value)
        })?;
    }
    Ok(format!(
        "baseline-50 infeasible from R_th={first_infeasible} on; ts and tsbo feasible throughout"
    ))
}

fn fov_crossover() -> Outcome {
    let records = sweep(SweepAxis::NeighborCount)?;
    let mut report = Vec::new();
    for policy in ["ts", "tsbo"] {
        let rows: Vec<(f64, f64, f64)> = records
            .iter()
            .filter(|r| r.policy == policy)
            .map(|r| {
                r.outcome
                    .map(|o| (r.axis_value, o.fov2_deg, o.harvested_energy))
                    .ok_or_else(|| format!("{policy} infeasible at N={}", r.axis_value))
            })
            .collect::<Result<_, _>>()?;
        ensure(rows.first().is_some_and(|r| r.0 == 0.0), || {
            format!("{policy}: sweep must start at N=0")
        })?;
        let cross = rows
            .iter()
            .position(|r| !same_fov(r.1, 30.0))
            .ok_or_else(|| format!("{policy}: phase-2 FOV never leaves 30 deg"))?;
        ensure(cross > 0, || {
            format!("{policy}: 50 deg already chosen at N=0")
        })?;
        let e0 = rows[0].2;
        for &(n, _, e) in &rows[..cross] {
            ensure(rel(e, e0) <= 1e-12, || {
                format!("{policy}: energy changes below crossover (N={n})")
            })?;
        }
        for w in rows[cross..].windows(2) {
            ensure(same_fov(w[1].1, 50.0), || {
                format!("{policy}: phase-2 FOV {} at N={}", w[1].1, w[1].0)
            })?;
            ensure(w[1].2 > w[0].2, || {
                format!("{policy}: energy not increasing at N={}", w[1].0)
            })?;
        }
        ensure(same_fov(rows[cross].1, 50.0) && rows[cross].2 > e0, || {
            format!("{policy}: no energy gain at crossover")
        })?;
        report.push(format!(
            "{policy} switches to 50 deg at N={}",
            rows[cross].0
        ));
    }
    Ok(report.join(", "))
}

fn unit_invariants() -> Outcome {
    let xi = lambertian_order(60f64.to_radians()).map_err(|e| e.to_string())?;
    ensure(xi == 1.0, || format!("lambertian_order(60 deg) = {xi:?}"))?;

    let fov = 30f64.to_radians();
    for psi in [fov + 1e-9, 45f64.to_radians(), 89f64.to_radians()] {
        ensure(concentrator_gain(fov, psi, 1.5) == 0.0, || {
            format!("gain nonzero outside FOV at psi={psi}")
        })?;
    }
    ensure(concentrator_gain(fov, fov, 1.5) > 0.0, || {
        "gain zero at FOV boundary".into()
    })?;

    let cell = preset().to_params().map_err(|e| e.to_string())?.cell;
    let voc0 = open_circuit_voltage(0.0, &cell).map_err(|e| e.to_string())?;
    ensure(voc0 == 0.0, || format!("V_oc(0) = {voc0}"))?;
    let i = cell.dark_saturation_current * (std::f64::consts::E - 1.0);
    let v = open_circuit_voltage(i, &cell).map_err(|e| e.to_string())?;
    ensure(rel(v, cell.thermal_voltage) <= 1e-12, || {
        format!("V_oc(I0(e-1)) = {v}")
    })?;

    let (hi, lo) = (4.9e-3, 2.4e-3);
    ensure(
        harvested_power(hi, &cell) > harvested_power(lo, &cell),
        || "power not increasing".into(),
    )?;
    let energies: Vec<f64> = (0..=100)
        .map(|k| energy_ts(k as f64 / 100.0, lo, hi, &cell).total_energy)
        .collect();
    ensure(energies.windows(2).all(|w| w[1] < w[0]), || {
        "E_TS not decreasing in T".into()
    })?;

    let r = rate_lower_bound(1.0, 2.0 * std::f64::consts::PI / std::f64::consts::E);
    ensure(rel(r, 1.0) <= 1e-12, || {
        format!("rate_lower_bound(1, 2pi/e) = {r}")
    })?;
    Ok(
        "Lambertian order, concentrator cut-off, V_oc anchors, E_TS monotonicity, rate anchor"
            .into(),
    )
}

fn determinism() -> Outcome {
    let cfg = preset();
    let mut sizes = Vec::new();
    for axis in [SweepAxis::RateThreshold, SweepAxis::NeighborCount] {
        let mut runs = Vec::new();
        for _ in 0..2 {
            let mut buf = Vec::new();
            let outputs = SweepOutputs {
                csv: None,
                json: None,
                plot_data_dir: None,
            };
            cmd_sweep(&cfg, Some(axis), outputs, &mut buf).map_err(|e| format!("{e:#}"))?;
            runs.push(String::from_utf8(buf).map_err(|e| e.to_string())?);
        }
        let (a, b) = (strip_metadata(&runs[0]), strip_metadata(&runs[1]));
        ensure(!a.is_empty() && a.as_bytes() == b.as_bytes(), || {
            format!("{} sweep data sections differ", axis.name())
        })?;
        sizes.push(format!("{}: {} bytes", axis.name(), a.len()));
    }
    Ok(format!("identical data sections ({})", sizes.join(", ")))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("oracle equivalence", oracle_equivalence),
        ("constraint tightness", constraint_tightness),
        ("dominance ordering", dominance_ordering),
        ("baseline infeasibility", baseline_infeasibility),
        ("FOV crossover", fov_crossover),
        ("unit invariants", unit_invariants),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("[PASS] criterion {}: {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("[FAIL] criterion {}: {name}: {why}", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
