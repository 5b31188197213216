//! Aggregate cost, energy and comfort metrics of a run.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{ScenarioResult, StepRecord};
use crate::powerflow::PowerFlows;
use crate::time::STEP_HOURS;

pub const SCHEMA_VERSION: u32 = 1;

/// Comfort margins of the time-in-target curve, °C.
pub const TIME_IN_TARGET_MARGINS: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

/// Percentage of steps per zone (outer) and margin (inner) with
/// `t_lb − m ≤ t_op ≤ t_ub + m`.
pub fn time_in_target(records: &[StepRecord], n_zones: usize, margins: &[f64]) -> Vec<Vec<f64>> {
    (0..n_zones)
        .map(|z| {
            margins
                .iter()
                .map(|&m| {
                    if records.is_empty() {
                        return 100.0;
                    }
                    let inside = records
                        .iter()
                        .filter(|r| r.band.lb - m <= r.t_op[z] && r.t_op[z] <= r.band.ub + m)
                        .count();
                    100.0 * inside as f64 / records.len() as f64
                })
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostSummary {
    pub buy_cad_per_day: f64,
    pub sell_cad_per_day: f64,
    pub net_cad_per_day: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeInTarget {
    pub margins_c: Vec<f64>,
    /// Percent of metric steps per zone, one entry per margin.
    pub zones: BTreeMap<String, Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SocSummary {
    pub min_pct: f64,
    pub max_pct: f64,
    pub initial_kwh: f64,
    pub final_kwh: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatingSummary {
    /// Delivered heat over heat-pump electricity (compressor and fans).
    pub average_cop: Option<f64>,
    pub hp_heat_kwh_per_day: f64,
    pub hp_electricity_kwh_per_day: f64,
    pub baseboard_kwh_per_day: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentificationSummary {
    pub zone: String,
    pub validation_rmse_c: f64,
    pub validation_within_2c_pct: f64,
    pub condition: f64,
}

/// Contents of `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub schema_version: u32,
    pub scenario: String,
    pub seed: u64,
    pub days: usize,
    pub warmup_days: usize,
    pub metric_steps: usize,
    pub cost: CostSummary,
    /// Keys `E_pv_h`, `E_pv_b`, `E_pv_g`, `E_b_h`, `E_b_g`, `E_g_h`, `E_g_b`.
    pub energy_kwh_per_day: BTreeMap<String, f64>,
    pub load_kwh_per_day: f64,
    pub pv_kwh_per_day: f64,
    pub time_in_target: TimeInTarget,
    /// Largest distance outside the comfort band per zone, °C.
    pub max_excursion_c: BTreeMap<String, f64>,
    pub soc: SocSummary,
    pub heating: HeatingSummary,
    pub identification: Vec<IdentificationSummary>,
    pub solves: usize,
    pub objective_evaluations: usize,
}

impl Summary {
    /// Daily energy on one channel by its `p_*` name.
    pub fn energy(&self, channel: &str) -> f64 {
        self.energy_kwh_per_day[&energy_key(channel)]
    }
}

fn energy_key(channel: &str) -> String {
    format!("E_{}", channel.trim_start_matches("p_"))
}

pub(crate) fn summarize(result: &ScenarioResult) -> Summary {
    let recs = result.metric_records();
    let days = result.metric_days().max(f64::MIN_POSITIVE);
    let per_day = |f: &dyn Fn(&StepRecord) -> f64| recs.iter().map(f).sum::<f64>() / days;

    let buy = per_day(&|r| r.c_buy * r.flows.grid_import() * STEP_HOURS) / 100.0;
    let sell = per_day(&|r| r.c_sell * r.flows.grid_export() * STEP_HOURS) / 100.0;

    let mut energy = BTreeMap::new();
    for (c, name) in PowerFlows::CHANNELS.iter().enumerate() {
        energy.insert(energy_key(name), per_day(&|r| r.flows.channels()[c] * STEP_HOURS));
    }

    let nz = result.n_zones;
    let tit = time_in_target(recs, nz, &TIME_IN_TARGET_MARGINS);
    let mut zones = BTreeMap::new();
    let mut excursion = BTreeMap::new();
    for z in 0..nz {
        let name = result.zone_names[z].clone();
        zones.insert(name.clone(), tit[z].clone());
        let worst = recs
            .iter()
            .map(|r| (r.t_op[z] - r.band.ub).max(r.band.lb - r.t_op[z]).max(0.0))
            .fold(0.0, f64::max);
        excursion.insert(name, worst);
    }

    let heating_steps = recs.iter().filter(|r| r.q_hp > 0.0);
    let (q, p) = heating_steps.fold((0.0, 0.0), |(q, p), r| (q + r.q_hp, p + r.p_hp + r.p_fan));
    let soc = |f: fn(f64, f64) -> f64, init| result.records.iter().map(|r| r.soc).fold(init, f);

    Summary {
        schema_version: SCHEMA_VERSION,
        scenario: result.scenario.name().to_string(),
        seed: result.seed,
        days: result.days,
        warmup_days: result.warmup_days,
        metric_steps: recs.len(),
        cost: CostSummary {
            buy_cad_per_day: buy,
            sell_cad_per_day: sell,
            net_cad_per_day: buy - sell,
        },
        energy_kwh_per_day: energy,
        load_kwh_per_day: per_day(&|r| r.flows.p_load * STEP_HOURS),
        pv_kwh_per_day: per_day(&|r| r.flows.p_pv * STEP_HOURS),
        time_in_target: TimeInTarget {
            margins_c: TIME_IN_TARGET_MARGINS.to_vec(),
            zones,
        },
        max_excursion_c: excursion,
        soc: SocSummary {
            min_pct: soc(f64::min, f64::INFINITY),
            max_pct: soc(f64::max, f64::NEG_INFINITY),
            initial_kwh: result.initial_energy_kwh,
            final_kwh: result.final_energy_kwh,
        },
        heating: HeatingSummary {
            average_cop: (p > 0.0).then(|| q / p),
            hp_heat_kwh_per_day: per_day(&|r| r.q_hp * STEP_HOURS),
            hp_electricity_kwh_per_day: per_day(&|r| (r.p_hp + r.p_fan) * STEP_HOURS),
            baseboard_kwh_per_day: per_day(&|r| r.p_bb * STEP_HOURS),
        },
        identification: result
            .identification
            .iter()
            .map(|f| IdentificationSummary {
                zone: f.zone.clone(),
                validation_rmse_c: f.validation_rmse,
                validation_within_2c_pct: 100.0 * f.validation_within_2c,
                condition: f.condition,
            })
            .collect(),
        solves: result.solves,
        objective_evaluations: result.evaluations,
    }
}
