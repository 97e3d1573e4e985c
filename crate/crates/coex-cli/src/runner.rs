//! Sweep evaluation: turns a parsed request into table rows.
//!
//! Points are evaluated in parallel (the engine's execution strategy) and
//! collected in sweep order, so the output is identical however many threads
//! run. Each point derives its Monte-Carlo seed as `seed + point index`,
//! which the engine's counter-based substreams turn into independent trial
//! streams — the sweep stays reproducible point by point, and estimation
//! noise is independent across points.

use coex_core::analytic::{analytic_kpis, success_probability_avg};
use coex_core::exec::map_collect;
use coex_core::joint::{mrc_success_probability, JointReceptionConfig};
use coex_core::montecarlo::{
    simulate_session, snapshot_mrc_success, snapshot_success, InterferenceCorrelation, SimConfig,
};
use coex_core::units::db_to_linear;
use coex_core::{Scenario, TruncationMode};

use crate::error::{CliError, CliResult};
use crate::sweep::{MrcSpec, SweepSpec, SweepVar};
use crate::table::Row;

/// Which engine(s) fill the table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Mode {
    /// Closed forms only; Monte-Carlo columns stay empty.
    Analytic,
    /// Monte-Carlo only; the analytic column stays empty and the KPI columns
    /// come from simulated sessions.
    Mc,
    /// Closed-form KPIs plus a Monte-Carlo success estimate per point.
    Both,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Analytic => "analytic",
            Mode::Mc => "mc",
            Mode::Both => "both",
        }
    }

    pub fn wants_analytic(self) -> bool {
        matches!(self, Mode::Analytic | Mode::Both)
    }

    pub fn wants_mc(self) -> bool {
        matches!(self, Mode::Mc | Mode::Both)
    }
}

/// Everything one `run` invocation needs.
#[derive(Debug, Clone)]
pub struct RunRequest {
    pub scenario: Scenario,
    /// Index of the reference (device under study) class.
    pub class_index: usize,
    pub spec: SweepSpec,
    pub mode: Mode,
    pub sim: SimConfig,
    /// Joint-reception geometry; adds the `p_sc_mrc` column.
    pub mrc: Option<MrcSpec>,
    /// Serving-AP distance (m) used when the sweep variable is not distance.
    pub base_distance: f64,
}

/// One sweep point, fully resolved.
struct Point {
    scenario: Scenario,
    distance: f64,
    jr: Option<JointReceptionConfig>,
    sim: SimConfig,
}

fn resolve_point(req: &RunRequest, index: usize, value: f64) -> CliResult<Point> {
    let mut scenario = req.scenario.clone();
    let mut distance = req.base_distance;
    // Default to the full geometry; ap_count sweeps shrink it below.
    let mut jr = match &req.mrc {
        Some(mrc) => Some(mrc.config_for(mrc.distances.len())?),
        None => None,
    };
    match req.spec.var {
        SweepVar::Distance => distance = value,
        SweepVar::DeviceDensity => {
            for (k, class) in scenario.classes.iter_mut().enumerate() {
                if k != req.class_index {
                    class.device_density = value;
                }
            }
        }
        SweepVar::SinrThreshold => scenario.sinr_threshold = db_to_linear(value),
        SweepVar::ApCount => {
            let mrc = req.mrc.as_ref().expect("checked before the sweep runs");
            jr = Some(mrc.config_for(value.round() as usize)?);
        }
    }
    let mut sim = req.sim.clone();
    sim.seed = req.sim.seed.wrapping_add(index as u64);
    Ok(Point {
        scenario,
        distance,
        jr,
        sim,
    })
}

fn evaluate_point(req: &RunRequest, index: usize, value: f64) -> CliResult<Row> {
    let point = resolve_point(req, index, value)?;
    let s = &point.scenario;
    let j = req.class_index;
    let d = point.distance;
    let gamma = s.sinr_threshold;

    let mut row = Row {
        sweep_value: value,
        p_sc_analytic: None,
        p_sc_mc: None,
        mc_ci: None,
        n_tx_mean: None,
        delay_s: None,
        energy_j: None,
        lifetime_s: None,
        p_sc_mrc: None,
    };

    if req.mode.wants_analytic() {
        row.p_sc_analytic = Some(success_probability_avg(s, j, d, gamma)?);
        let kpis = analytic_kpis(s, j, d)?;
        row.n_tx_mean = Some(kpis.mean_transmissions);
        row.delay_s = Some(kpis.expected_delay);
        row.energy_j = Some(kpis.energy_per_report);
        row.lifetime_s = Some(kpis.battery_lifetime);
    }

    if req.mode.wants_mc() {
        let est = snapshot_success(s, j, d, gamma, &point.sim)?;
        row.p_sc_mc = Some(est.mean);
        row.mc_ci = Some(est.std_error);
        if req.mode == Mode::Mc {
            let stats = simulate_session(s, j, d, &point.sim)?;
            let (attempts, delay) = match s.retransmission.truncation {
                TruncationMode::Truncated => (stats.attempts_truncated, stats.delay_truncated),
                TruncationMode::Conditional => {
                    (stats.attempts_conditional, stats.delay_conditional)
                }
                TruncationMode::FailureTail => (stats.attempts_all, stats.delay_all),
            };
            row.n_tx_mean = Some(attempts.mean);
            row.delay_s = Some(delay.mean);
            row.energy_j = Some(stats.energy_per_report.mean);
            row.lifetime_s = Some(stats.battery_lifetime.mean);
        }
    }

    if let Some(jr) = &point.jr {
        row.p_sc_mrc = Some(if req.mode.wants_analytic() {
            mrc_success_probability(s, jr, j, gamma)?
        } else {
            snapshot_mrc_success(s, jr, j, gamma, &point.sim, InterferenceCorrelation::Shared)?
                .mean
        });
    }

    Ok(row)
}

/// Runs the sweep; rows come back in sweep order.
pub fn evaluate(req: &RunRequest) -> CliResult<Vec<Row>> {
    req.scenario.validated().map_err(CliError::from)?;
    req.sim.validate().map_err(CliError::from)?;
    if req.class_index >= req.scenario.classes.len() {
        return Err(CliError::Input(format!(
            "class index {} outside the scenario's {} classes",
            req.class_index,
            req.scenario.classes.len()
        )));
    }
    if req.spec.var == SweepVar::DeviceDensity && req.scenario.classes.len() < 2 {
        return Err(CliError::Input(
            "device_density sweeps scale the interfering classes; the scenario only has the \
             reference class"
                .to_string(),
        ));
    }
    if req.spec.var == SweepVar::ApCount {
        let Some(mrc) = &req.mrc else {
            return Err(CliError::Input(
                "ap_count sweeps need --mrc to provide the AP geometry".to_string(),
            ));
        };
        let deepest = req.spec.max.round() as usize;
        if deepest > mrc.distances.len() {
            return Err(CliError::Input(format!(
                "ap_count sweep reaches {} APs but --mrc lists only {} distances",
                deepest,
                mrc.distances.len()
            )));
        }
    }
    if !req.base_distance.is_finite() || req.base_distance < 0.0 {
        return Err(CliError::Input(format!(
            "distance must be finite and non-negative (got {})",
            req.base_distance
        )));
    }

    let points = req.spec.points();
    let results = map_collect(points.len(), |k| evaluate_point(req, k, points[k]));
    results.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use coex_core::profiles::reference_scenario;

    fn quick_sim() -> SimConfig {
        SimConfig {
            trials: 2_000,
            ..SimConfig::default()
        }
    }

    fn request(spec: &str, mode: Mode) -> RunRequest {
        RunRequest {
            scenario: reference_scenario(),
            class_index: 0,
            spec: spec.parse().unwrap(),
            mode,
            sim: quick_sim(),
            mrc: None,
            base_distance: 100.0,
        }
    }

    #[test]
    fn analytic_distance_sweep_fills_deterministic_columns() {
        let rows = evaluate(&request("distance:10:100:4", Mode::Analytic)).unwrap();
        assert_eq!(rows.len(), 4);
        for pair in rows.windows(2) {
            assert!(pair[0].p_sc_analytic.unwrap() > pair[1].p_sc_analytic.unwrap());
        }
        assert!(rows[0].p_sc_mc.is_none());
        assert!(rows[0].mc_ci.is_none());
        assert!(rows[0].p_sc_mrc.is_none());
        assert!(rows[0].n_tx_mean.unwrap() > 0.0);
        assert!(rows[0].lifetime_s.unwrap() > 0.0);
    }

    #[test]
    fn both_mode_agrees_with_itself_across_runs() {
        let req = request("distance:20:80:3", Mode::Both);
        let a = evaluate(&req).unwrap();
        let b = evaluate(&req).unwrap();
        assert_eq!(a, b, "same request must give bit-identical rows");
        for row in &a {
            let (p, m, ci) = (
                row.p_sc_analytic.unwrap(),
                row.p_sc_mc.unwrap(),
                row.mc_ci.unwrap(),
            );
            assert!((p - m).abs() <= 5.0 * ci.max(1e-3), "p={p} m={m} ci={ci}");
        }
    }

    #[test]
    fn mc_mode_fills_kpi_columns_from_sessions() {
        let rows = evaluate(&request("distance:30:60:2", Mode::Mc)).unwrap();
        for row in &rows {
            assert!(row.p_sc_analytic.is_none());
            assert!(row.p_sc_mc.is_some());
            let n = row.n_tx_mean.unwrap();
            assert!(n > 0.0 && n <= 7.0);
            assert!(row.delay_s.unwrap() >= 0.0);
            assert!(row.energy_j.unwrap() > 0.0);
            assert!(row.lifetime_s.unwrap() > 0.0);
        }
    }

    #[test]
    fn sinr_sweep_interprets_values_as_decibels() {
        let rows = evaluate(&request("sinr_threshold:0:9:4", Mode::Analytic)).unwrap();
        for pair in rows.windows(2) {
            assert!(
                pair[0].p_sc_analytic.unwrap() > pair[1].p_sc_analytic.unwrap(),
                "success must fall as the threshold rises"
            );
        }
        // 0 dB is a threshold of 1, not 0: success stays well below 1.
        assert!(rows[0].p_sc_analytic.unwrap() < 0.95);
    }

    #[test]
    fn device_density_sweep_scales_the_interferers() {
        let rows = evaluate(&request("device_density:1e-4:1e-1:4:log", Mode::Analytic)).unwrap();
        for pair in rows.windows(2) {
            assert!(pair[0].p_sc_analytic.unwrap() > pair[1].p_sc_analytic.unwrap());
        }
        let mut single_class = request("device_density:1e-4:1e-1:4:log", Mode::Analytic);
        single_class.scenario.classes.truncate(1);
        assert!(matches!(
            evaluate(&single_class),
            Err(CliError::Input(_))
        ));
    }

    #[test]
    fn ap_count_sweep_uses_mrc_prefixes() {
        let mut req = request("ap_count:1:3:3", Mode::Analytic);
        req.mrc = Some("50,75,100".parse().unwrap());
        req.base_distance = 50.0;
        let rows = evaluate(&req).unwrap();
        let p: Vec<f64> = rows.iter().map(|r| r.p_sc_mrc.unwrap()).collect();
        assert!(p[0] < p[1] && p[1] < p[2], "more APs must help: {p:?}");
        // Non-mrc columns sit at the base distance and stay constant.
        assert_eq!(rows[0].p_sc_analytic, rows[2].p_sc_analytic);

        req.mrc = Some("50,75".parse().unwrap());
        assert!(matches!(evaluate(&req), Err(CliError::Input(_))));
        req.mrc = None;
        assert!(matches!(evaluate(&req), Err(CliError::Input(_))));
    }

    #[test]
    fn mrc_column_appears_in_mc_mode_too() {
        let mut req = request("distance:40:80:2", Mode::Mc);
        req.mrc = Some("40,60,80".parse().unwrap());
        req.sim.trials = 1_000;
        let rows = evaluate(&req).unwrap();
        for row in &rows {
            let p = row.p_sc_mrc.unwrap();
            assert!((0.0..=1.0).contains(&p));
        }
    }

    #[test]
    fn zero_energy_scenario_is_a_numerical_failure() {
        let mut req = request("distance:10:50:2", Mode::Analytic);
        req.scenario.energy.circuit_power = 0.0;
        req.scenario.energy.pa_overhead = 0.0;
        req.scenario.energy.rx_power = 0.0;
        req.scenario.energy.active_time = 0.0;
        req.scenario.energy.ack_time = 0.0;
        assert!(matches!(evaluate(&req), Err(CliError::Numerical(_))));
    }

    #[test]
    fn out_of_range_class_index_is_an_input_error() {
        let mut req = request("distance:10:50:2", Mode::Analytic);
        req.class_index = 5;
        assert!(matches!(evaluate(&req), Err(CliError::Input(_))));
    }
}
