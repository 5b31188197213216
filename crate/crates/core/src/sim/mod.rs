//! Closed-loop scenario runner: the controller plans on identified models
//! and forecasts while the RC plant evolves under the actual disturbances.

pub mod config;
pub mod metrics;
pub mod report;

use serde::{Deserialize, Serialize};

pub use config::{LoadConfig, RunConfig, Scenario, ScenarioSetup, TariffConfig};
pub use metrics::{time_in_target, Summary, TIME_IN_TARGET_MARGINS};
pub use report::{emit_report, write_flows_csv, write_models_json, write_summary_json, write_timeseries_csv};

use crate::building::{identify_lti, state_from_temps, RcPlantModel, ZoneFit, ZoneThermalState};
use crate::building::plant_step;
use crate::building::PlantInputs;
use crate::control::{
    dispatch, solve_mpc, ComfortBand, DecisionPlan, HorizonData, HorizonProblem, Layout,
};
use crate::der::{battery_step, pv_power, BatteryState};
use crate::heating::{HeatingSystem, MAX_ZONES};
use crate::loads::{build_load_profile, perturb_internal_gains, LoadProfile};
use crate::powerflow::PowerFlows;
use crate::time::{hour_of_day, step_time_h, STEPS_PER_DAY, STEP_HOURS};
use crate::weather::{
    load_weather, make_forecast, synthesize_weather, ForecastNoiseSpec, SolarGainFactorTable, WeatherSeries,
};
use crate::{Error, Result};

/// Seed offsets of the independent random streams of a run.
mod stream {
    pub const FORECAST_1H: u64 = 0x1001;
    pub const FORECAST_6H: u64 = 0x1006;
    pub const INTERNAL_GAIN: u64 = 0x2000;
    pub const IDENTIFICATION: u64 = 0x3000;
    pub const OPTIMIZER: u64 = 0x4000;
}

/// Telemetry of one simulated step. Temperatures and SOC are at the end of
/// the step; comfort bounds apply at that instant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub time_h: f64,
    pub t_ext: f64,
    pub t_op: [f64; MAX_ZONES],
    pub band: ComfortBand,
    pub soc: f64,
    pub c_buy: f64,
    pub c_sell: f64,
    pub flows: PowerFlows,
    pub p_elec: f64,
    pub p_hp: f64,
    pub p_fan: f64,
    pub p_bb: f64,
    pub q_hp: f64,
    pub q_bb: f64,
    pub plr_ou: f64,
    /// Weighted objective of the plan this step came from.
    pub objective: f64,
}

/// Telemetry and aggregates of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioResult {
    pub scenario: Scenario,
    pub seed: u64,
    pub days: usize,
    pub warmup_days: usize,
    pub n_zones: usize,
    pub zone_names: Vec<String>,
    pub records: Vec<StepRecord>,
    pub identification: Vec<ZoneFit>,
    pub initial_energy_kwh: f64,
    pub final_energy_kwh: f64,
    pub solves: usize,
    pub evaluations: usize,
}

impl ScenarioResult {
    /// First step counted in the metrics.
    pub fn metric_start(&self) -> usize {
        self.warmup_days * STEPS_PER_DAY
    }

    pub fn metric_records(&self) -> &[StepRecord] {
        &self.records[self.metric_start().min(self.records.len())..]
    }

    pub fn metric_days(&self) -> f64 {
        self.metric_records().len() as f64 / STEPS_PER_DAY as f64
    }

    pub fn summary(&self) -> Summary {
        metrics::summarize(self)
    }
}

/// Disturbances over the whole run, padded for the last horizon.
struct Disturbances {
    actual: WeatherSeries,
    fc_1h: WeatherSeries,
    fc_6h: WeatherSeries,
    loads: LoadProfile,
    q_ig_forecast: Vec<[f64; 3]>,
}

fn mix(seed: u64, stream: u64) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ stream
}

fn weather_for_run(cfg: &RunConfig, n: usize) -> Result<WeatherSeries> {
    let mut w = match &cfg.weather_file {
        Some(path) => load_weather(path)?,
        None => synthesize_weather(n.div_ceil(STEPS_PER_DAY), cfg.seed, &cfg.climate)?,
    };
    let needed = cfg.days * STEPS_PER_DAY;
    if w.len() < needed {
        return Err(Error::Config(format!(
            "weather covers {} steps but the run needs {needed}",
            w.len()
        )));
    }
    // The last prediction horizons look past the run; hold the final sample.
    while w.len() < n {
        let last = w.len() - 1;
        w.t_ext.push(w.t_ext[last]);
        w.si_tilt.push(w.si_tilt[last]);
        w.si_south.push(w.si_south[last]);
        w.t_gnd.push(w.t_gnd[last]);
    }
    w.window(0, n)
}

fn disturbances(cfg: &RunConfig, n: usize) -> Result<Disturbances> {
    let actual = weather_for_run(cfg, n)?;
    let lc = &cfg.loads;
    let mut loads = build_load_profile(&lc.appliances, &lc.occupancy, &lc.base_load, n.div_ceil(STEPS_PER_DAY))?;
    loads.p_elec.truncate(n);
    loads.q_ig.truncate(n);
    let (spec_1h, spec_6h) = if cfg.forecast_noise {
        (
            ForecastNoiseSpec::one_hour_ahead(mix(cfg.seed, stream::FORECAST_1H)),
            ForecastNoiseSpec::six_hours_ahead(mix(cfg.seed, stream::FORECAST_6H)),
        )
    } else {
        (ForecastNoiseSpec::noiseless(0), ForecastNoiseSpec::noiseless(0))
    };
    let perturbed = perturb_internal_gains(&loads, spec_1h.internal_gain_pct_std, mix(cfg.seed, stream::INTERNAL_GAIN))?;
    Ok(Disturbances {
        fc_1h: make_forecast(&actual, &spec_1h)?,
        fc_6h: make_forecast(&actual, &spec_6h)?,
        actual,
        q_ig_forecast: perturbed.q_ig,
        loads,
    })
}

/// Identifies one prediction model per zone on a separate excitation
/// experiment with its own weather.
pub fn identify_models(cfg: &RunConfig, plant: &RcPlantModel) -> Result<Vec<ZoneFit>> {
    let ex = &cfg.excitation;
    let n = ex.train_steps + ex.validation_steps + 1;
    let weather = synthesize_weather(n.div_ceil(STEPS_PER_DAY), mix(cfg.seed, stream::IDENTIFICATION), &cfg.climate)?;
    let lc = &cfg.loads;
    let loads = build_load_profile(&lc.appliances, &lc.occupancy, &lc.base_load, n.div_ceil(STEPS_PER_DAY))?;
    identify_lti(plant, &weather, &loads.q_ig, ex)
}

struct Context<'a> {
    cfg: &'a RunConfig,
    setup: ScenarioSetup,
    layout: Layout,
    heating: HeatingSystem,
    dist: Disturbances,
    q_sg_actual: Vec<Vec<f64>>,
    q_sg_1h: Vec<[f64; 3]>,
    q_sg_6h: Vec<[f64; 3]>,
}

impl Context<'_> {
    fn pv(&self, si: f64) -> Result<f64> {
        if self.setup.pv_enabled {
            pv_power(si, &self.cfg.pv)
        } else {
            Ok(0.0)
        }
    }

    fn horizon_data(&self, k0: usize) -> Result<HorizonData> {
        let l = self.layout.horizon();
        let tariff = &self.setup.tariff;
        let d = &self.dist;
        let mut h = HorizonData::default();
        for j in 0..l {
            let k = k0 + j;
            // One-hour-ahead statistics for the first hour, six-hour beyond.
            let (fc, q_sg) = if j < self.layout.block_len {
                (&d.fc_1h, &self.q_sg_1h)
            } else {
                (&d.fc_6h, &self.q_sg_6h)
            };
            let t = step_time_h(k);
            h.t_ext.push(fc.t_ext[k]);
            h.t_gnd.push(fc.t_gnd[k]);
            h.q_sg.push(q_sg[k]);
            h.q_ig.push(d.q_ig_forecast[k]);
            h.p_pv.push(self.pv(fc.si_tilt[k])?);
            h.p_elec.push(d.loads.p_elec[k]);
            h.c_buy.push(tariff.buy_price(t));
            h.c_sell.push(tariff.sell_price(t));
            h.hour.push(hour_of_day(t));
            h.comfort.push(self.cfg.comfort.at(step_time_h(k + 1)));
        }
        Ok(h)
    }
}

fn solar_array(plant: &RcPlantModel, w: &WeatherSeries, table: &SolarGainFactorTable) -> Vec<[f64; 3]> {
    (0..w.len())
        .map(|k| {
            let g = plant.solar_gains(w.si_south[k], hour_of_day(step_time_h(k)), table);
            let mut a = [0.0; 3];
            a[..g.len()].copy_from_slice(&g);
            a
        })
        .collect()
}

/// Runs one scenario in closed loop.
pub fn run_scenario(cfg: &RunConfig) -> Result<ScenarioResult> {
    cfg.validate()?;
    let plant = cfg.envelope.to_plant();
    plant.validate()?;
    let nz = plant.n_zones();
    if nz != cfg.heating.n_zones() || nz > MAX_ZONES {
        return Err(Error::Config("heating system and envelope disagree on the zone count".into()));
    }
    let fits = identify_models(cfg, &plant)?;
    let models: Vec<_> = fits.iter().map(|f| f.model.clone()).collect();

    let n_steps = cfg.days * STEPS_PER_DAY;
    let layout = Layout::new(nz, cfg.mpc.n_blocks);
    let l = layout.horizon();
    let dist = disturbances(cfg, n_steps + l + 1)?;
    let table = SolarGainFactorTable::default();
    let ctx = Context {
        cfg,
        setup: cfg.setup(),
        layout,
        heating: cfg.heating.clone(),
        q_sg_actual: (0..dist.actual.len())
            .map(|k| plant.solar_gains(dist.actual.si_south[k], hour_of_day(step_time_h(k)), &table))
            .collect(),
        q_sg_1h: solar_array(&plant, &dist.fc_1h, &table),
        q_sg_6h: solar_array(&plant, &dist.fc_6h, &table),
        dist,
    };

    let mut state = ZoneThermalState::uniform(nz, cfg.initial_temp);
    let mut battery = BatteryState::new(ctx.setup.battery, cfg.initial_soc)?;
    let initial_energy = battery.e_b;
    let mut records = Vec::with_capacity(n_steps);
    let mut warm: Option<DecisionPlan> = None;
    let mut opts = cfg.mpc.clone();
    let apply = cfg.mpc.apply_steps;
    let (mut solves, mut evaluations) = (0, 0);

    for k0 in (0..n_steps).step_by(apply) {
        let x0 = (0..nz).map(|z| state_from_temps(state.t_air[z], state.t_op(z))).collect();
        let data = ctx.horizon_data(k0).map_err(|e| Error::at_step(k0, e))?;
        let mut problem = HorizonProblem::new(
            layout,
            models.clone(),
            x0,
            ctx.heating.clone(),
            battery,
            ctx.setup.mode,
            cfg.rules,
            ctx.setup.weights.clone(),
            ctx.setup.bounds,
            data,
        )
        .map_err(|e| Error::at_step(k0, e))?;
        opts.optimizer.seed = mix(cfg.seed, stream::OPTIMIZER) ^ k0 as u64;
        let sol = solve_mpc(&mut problem, warm.as_ref(), &opts).map_err(|e| Error::at_step(k0, e))?;
        solves += 1;
        evaluations += sol.evaluations;

        for k in k0..(k0 + apply).min(n_steps) {
            let rec = apply_step(&ctx, &plant, &mut state, &mut battery, &sol.plan, k - k0, k)
                .map_err(|e| Error::at_step(k, e))?;
            records.push(StepRecord {
                objective: sol.objective,
                ..rec
            });
        }
        warm = Some(sol.plan.shifted(&layout, apply).clamped(&layout, &ctx.setup.bounds));
    }

    Ok(ScenarioResult {
        scenario: cfg.scenario,
        seed: cfg.seed,
        days: cfg.days,
        warmup_days: cfg.warmup_days,
        n_zones: nz,
        zone_names: fits.iter().map(|f| f.zone.clone()).collect(),
        records,
        identification: fits,
        initial_energy_kwh: initial_energy,
        final_energy_kwh: battery.e_b,
        solves,
        evaluations,
    })
}

/// Applies step `j` of `plan` to the plant at absolute step `k`.
fn apply_step(
    ctx: &Context,
    plant: &RcPlantModel,
    state: &mut ZoneThermalState,
    battery: &mut BatteryState,
    plan: &DecisionPlan,
    j: usize,
    k: usize,
) -> Result<StepRecord> {
    let nz = plant.n_zones();
    let vars = &plan.blocks[ctx.layout.block_of_step(j)];
    let w = &ctx.dist.actual;
    let t = step_time_h(k);
    let heat = ctx.heating.operate(&vars.plr, &vars.f_bb, w.t_ext[k])?;
    let p_elec = ctx.dist.loads.p_elec[k];
    let p_load = p_elec + heat.p_total();
    let p_pv = ctx.pv(w.si_tilt[k])?;
    let flows = dispatch(
        ctx.setup.mode,
        battery,
        p_pv,
        p_load,
        hour_of_day(t),
        vars.p_b,
        vars.f_pv_h,
        vars.f_b_h,
        &ctx.cfg.rules,
        STEP_HOURS,
    );
    *battery = battery_step(battery, flows.p_b, STEP_HOURS)?;
    let q_ig = &ctx.dist.loads.q_ig[k][..nz];
    *state = plant_step(
        plant,
        state,
        &PlantInputs {
            q_hp: &heat.q_hp[..nz],
            q_bb: &heat.q_bb[..nz],
            q_sg: &ctx.q_sg_actual[k],
            q_ig,
            t_ext: w.t_ext[k],
            t_gnd: w.t_gnd[k],
        },
    )?;
    let mut t_op = [f64::NAN; MAX_ZONES];
    for (z, v) in t_op.iter_mut().enumerate().take(nz) {
        *v = state.t_op(z);
    }
    let tariff = &ctx.setup.tariff;
    Ok(StepRecord {
        step: k,
        time_h: t,
        t_ext: w.t_ext[k],
        t_op,
        band: ctx.cfg.comfort.at(step_time_h(k + 1)),
        soc: battery.soc(),
        c_buy: tariff.buy_price(t),
        c_sell: tariff.sell_price(t),
        flows,
        p_elec,
        p_hp: heat.p_hp_ou,
        p_fan: heat.p_fan,
        p_bb: heat.p_bb,
        q_hp: heat.q_hp[..nz].iter().sum(),
        q_bb: heat.q_bb[..nz].iter().sum(),
        plr_ou: heat.plr_ou,
        objective: f64::NAN,
    })
}
