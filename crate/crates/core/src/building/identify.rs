//! Least-squares identification of per-zone LTI models from pulse-excited
//! plant records.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::lti::{input, state_from_temps, Inputs, LtiZoneModel, N_INPUTS, N_STATES};
use super::plant::{plant_step, PlantInputs, RcPlantModel, ZoneThermalState};
use crate::heating::{default_bb_rated, HpRatings};
use crate::time::{hour_of_day, step_time_h, STEPS_PER_DAY};
use crate::weather::{SolarGainFactorTable, WeatherSeries};
use crate::zone::Zone;
use crate::{Error, Result};

/// 50 % duty-cycle pulse trains applied to every zone in phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExcitationConfig {
    pub hp_amplitude: Vec<f64>,
    pub bb_amplitude: Vec<f64>,
    pub hp_period_h: f64,
    pub bb_period_h: f64,
    pub train_steps: usize,
    pub validation_steps: usize,
    pub initial_temp: f64,
    /// Largest accepted condition number of the column-scaled regressor.
    pub max_condition: f64,
}

impl Default for ExcitationConfig {
    fn default() -> Self {
        ExcitationConfig {
            hp_amplitude: HpRatings::default().q_in_rated,
            bb_amplitude: default_bb_rated(),
            hp_period_h: 10.0,
            bb_period_h: 14.0,
            train_steps: 28 * STEPS_PER_DAY,
            validation_steps: 7 * STEPS_PER_DAY,
            initial_temp: 20.0,
            max_condition: 1e8,
        }
    }
}

impl ExcitationConfig {
    fn pulse(period_h: f64, t_h: f64) -> f64 {
        if (t_h / period_h).fract() < 0.5 {
            1.0
        } else {
            0.0
        }
    }

    pub fn hp_at(&self, zone: usize, k: usize) -> f64 {
        self.hp_amplitude[zone] * Self::pulse(self.hp_period_h, step_time_h(k))
    }

    pub fn bb_at(&self, zone: usize, k: usize) -> f64 {
        self.bb_amplitude[zone] * Self::pulse(self.bb_period_h, step_time_h(k))
    }
}

/// Fit quality of one zone model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZoneFit {
    pub zone: String,
    pub model: LtiZoneModel,
    /// One-step-ahead RMS error of T_op on the training window, °C.
    pub train_rmse: f64,
    /// Free-run RMS error of T_op on the validation window, °C.
    pub validation_rmse: f64,
    /// Share of validation steps with |T_op error| ≤ 2 °C.
    pub validation_within_2c: f64,
    pub condition: f64,
}

/// Plant records used for fitting and validation.
#[derive(Debug, Clone)]
pub struct PlantRecord {
    /// `states[k]` is the state at the start of step `k`; one extra entry at the end.
    pub states: Vec<ZoneThermalState>,
    /// `inputs[k][zone]` in LTI input order.
    pub inputs: Vec<Vec<Inputs>>,
}

/// Simulates the plant under the excitation pulses.
pub fn record_excitation(
    plant: &RcPlantModel,
    weather: &WeatherSeries,
    q_ig: &[[f64; 3]],
    cfg: &ExcitationConfig,
) -> Result<PlantRecord> {
    let n = plant.n_zones();
    let steps = cfg.train_steps + cfg.validation_steps;
    if n > 3 || cfg.hp_amplitude.len() != n || cfg.bb_amplitude.len() != n {
        return Err(Error::Dimension("excitation amplitudes must match the plant zones".into()));
    }
    if weather.len() < steps || q_ig.len() < steps {
        return Err(Error::Dimension(format!("identification needs {steps} steps of weather and loads")));
    }
    if !(cfg.hp_period_h > 0.0 && cfg.bb_period_h > 0.0) || cfg.train_steps == 0 {
        return Err(Error::Config("excitation periods and training length must be positive".into()));
    }
    let table = SolarGainFactorTable::default();
    let mut state = ZoneThermalState::uniform(n, cfg.initial_temp);
    let mut states = Vec::with_capacity(steps + 1);
    let mut inputs = Vec::with_capacity(steps);
    states.push(state.clone());
    for k in 0..steps {
        let q_hp: Vec<f64> = (0..n).map(|z| cfg.hp_at(z, k)).collect();
        let q_bb: Vec<f64> = (0..n).map(|z| cfg.bb_at(z, k)).collect();
        let q_sg = plant.solar_gains(weather.si_south[k], hour_of_day(step_time_h(k)), &table);
        let ig = &q_ig[k][..n];
        let u = PlantInputs {
            q_hp: &q_hp,
            q_bb: &q_bb,
            q_sg: &q_sg,
            q_ig: ig,
            t_ext: weather.t_ext[k],
            t_gnd: weather.t_gnd[k],
        };
        inputs.push(
            (0..n)
                .map(|z| {
                    let mut row = [0.0; N_INPUTS];
                    row[input::Q_HP] = q_hp[z];
                    row[input::Q_BB] = q_bb[z];
                    row[input::T_EXT] = weather.t_ext[k];
                    row[input::Q_SG] = q_sg[z];
                    row[input::Q_IG] = ig[z];
                    row[input::T_GND] = weather.t_gnd[k];
                    row
                })
                .collect(),
        );
        state = plant_step(plant, &state, &u)?;
        states.push(state.clone());
    }
    Ok(PlantRecord { states, inputs })
}

fn zone_state(s: &ZoneThermalState, z: usize) -> [f64; N_STATES] {
    state_from_temps(s.t_air[z], s.t_op(z))
}

/// One-step least-squares fit of `x(k+1) = A x(k) + B u(k)` for one zone over
/// steps `range`.
pub fn fit_zone(record: &PlantRecord, zone: usize, range: std::ops::Range<usize>, max_condition: f64) -> Result<(LtiZoneModel, f64)> {
    let nreg = N_STATES + N_INPUTS;
    let rows = range.len();
    let mut phi = DMatrix::<f64>::zeros(rows, nreg);
    let mut y = DMatrix::<f64>::zeros(rows, N_STATES);
    for (r, k) in range.enumerate() {
        let x = zone_state(&record.states[k], zone);
        let x1 = zone_state(&record.states[k + 1], zone);
        for j in 0..N_STATES {
            phi[(r, j)] = x[j];
            y[(r, j)] = x1[j];
        }
        for j in 0..N_INPUTS {
            phi[(r, N_STATES + j)] = record.inputs[k][zone][j];
        }
    }
    let scale: Vec<f64> = (0..nreg)
        .map(|j| {
            let nrm = phi.column(j).norm();
            if nrm > 0.0 {
                nrm
            } else {
                1.0
            }
        })
        .collect();
    for (j, s) in scale.iter().enumerate() {
        phi.column_mut(j).scale_mut(1.0 / s);
    }
    let svd = phi.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !(condition <= max_condition) {
        return Err(Error::RankDeficient {
            zone: Zone::ALL.get(zone).map_or_else(|| zone.to_string(), |z| z.name().to_string()),
            condition,
        });
    }
    let theta = svd.solve(&y, 0.0).map_err(|e| Error::Solver(e.to_string()))?;
    let mut a = [[0.0; N_STATES]; N_STATES];
    let mut b = [[0.0; N_INPUTS]; N_STATES];
    for i in 0..N_STATES {
        for j in 0..N_STATES {
            a[i][j] = theta[(j, i)] / scale[j];
        }
        for j in 0..N_INPUTS {
            b[i][j] = theta[(N_STATES + j, i)] / scale[N_STATES + j];
        }
    }
    Ok((LtiZoneModel::new(a, b), condition))
}

/// Free-run T_op residuals (model − plant) of one zone over `range`.
pub fn free_run_residuals(record: &PlantRecord, zone: usize, model: &LtiZoneModel, range: std::ops::Range<usize>) -> Vec<f64> {
    let mut x = zone_state(&record.states[range.start], zone);
    range
        .map(|k| {
            x = model.step(x, &record.inputs[k][zone]);
            model.t_op(x) - record.states[k + 1].t_op(zone)
        })
        .collect()
}

fn rms(v: &[f64]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        (v.iter().map(|e| e * e).sum::<f64>() / v.len() as f64).sqrt()
    }
}

/// Identifies one LTI model per zone: fit on the training window, free-run
/// validation on the withheld window that follows it.
pub fn identify_lti(
    plant: &RcPlantModel,
    weather: &WeatherSeries,
    q_ig: &[[f64; 3]],
    cfg: &ExcitationConfig,
) -> Result<Vec<ZoneFit>> {
    plant.validate()?;
    let record = record_excitation(plant, weather, q_ig, cfg)?;
    let train = 0..cfg.train_steps;
    let valid = cfg.train_steps..cfg.train_steps + cfg.validation_steps;
    (0..plant.n_zones())
        .map(|z| {
            let (model, condition) = fit_zone(&record, z, train.clone(), cfg.max_condition)?;
            let one_step: Vec<f64> = train
                .clone()
                .map(|k| {
                    let x = model.step(zone_state(&record.states[k], z), &record.inputs[k][z]);
                    model.t_op(x) - record.states[k + 1].t_op(z)
                })
                .collect();
            let residuals = free_run_residuals(&record, z, &model, valid.clone());
            let within = if residuals.is_empty() {
                1.0
            } else {
                residuals.iter().filter(|e| e.abs() <= 2.0).count() as f64 / residuals.len() as f64
            };
            Ok(ZoneFit {
                zone: Zone::ALL.get(z).map_or_else(|| z.to_string(), |zz| zz.name().to_string()),
                train_rmse: rms(&one_step),
                validation_rmse: rms(&residuals),
                validation_within_2c: within,
                condition,
                model,
            })
        })
        .collect()
}
