//! Exhaustive grid search used as a reference for the optimizer.

use rand::Rng;

use super::comfort::ComfortBand;
use super::objective::{HorizonData, HorizonProblem, ObjectiveWeights};
use super::plan::{DecisionPlan, Layout, VarBounds};
use super::rules::{RoutingMode, RuleConfig};
use crate::building::lti::{input, state_from_temps, LtiZoneModel, N_INPUTS, N_STATES};
use crate::der::{BatterySpec, BatteryState};
use crate::heating::{default_bb_rated, HeatingSystem, HpRatings, MAX_ZONES};
use crate::optim::BoxObjective;
use crate::time::STEP_HOURS;
use crate::weather::channel_rng;
use crate::{Error, Result};

/// Default guard on the number of grid points.
pub const MAX_GRID_POINTS: usize = 390_625;

/// Minimum of the objective over an evenly spaced grid with `levels` values
/// per free variable (fixed variables keep their bound).
pub fn oracle_best(problem: &mut HorizonProblem, levels: usize, max_points: usize) -> Result<(f64, DecisionPlan)> {
    if levels < 2 {
        return Err(Error::Config("grid needs at least two levels".into()));
    }
    let (lo, hi) = problem.bound_vectors();
    let free: Vec<usize> = (0..lo.len()).filter(|&i| hi[i] > lo[i]).collect();
    let points = (levels as u128).checked_pow(free.len() as u32).unwrap_or(u128::MAX);
    if points > max_points as u128 {
        return Err(Error::Config(format!("grid of {points} points exceeds the limit of {max_points}")));
    }
    let grid = |i: usize, level: usize| lo[i] + (hi[i] - lo[i]) * level as f64 / (levels - 1) as f64;
    let mut x = lo.clone();
    let mut counter = vec![0usize; free.len()];
    let mut best: Option<(f64, Vec<f64>)> = None;
    loop {
        for (c, &i) in counter.iter().zip(&free) {
            x[i] = grid(i, *c);
        }
        let f = problem.value(&x);
        if !f.is_finite() {
            return Err(Error::Solver("objective is not finite".into()));
        }
        if best.as_ref().is_none_or(|(bf, _)| f < *bf) {
            best = Some((f, x.clone()));
        }
        let mut pos = 0;
        loop {
            if pos == counter.len() {
                let (f, x) = best.expect("at least one grid point");
                return Ok((f, DecisionPlan::from_vec(&problem.layout, &x)));
            }
            counter[pos] += 1;
            if counter[pos] < levels {
                break;
            }
            counter[pos] = 0;
            pos += 1;
        }
    }
}

/// Random synthetic problem with `n_zones` zones and `n_blocks` hourly
/// blocks: stable two-node zone models, a cold day, random prices, PV,
/// load and starting SOC.
pub fn random_problem(seed: u64, n_zones: usize, n_blocks: usize, mode: RoutingMode) -> Result<HorizonProblem> {
    let mut rng = channel_rng(seed, 0x0c1e);
    let layout = Layout::new(n_zones, n_blocks);
    let l = layout.horizon();
    let dt = STEP_HOURS;
    let mut models = Vec::with_capacity(n_zones);
    let mut x0 = Vec::with_capacity(n_zones);
    for _ in 0..n_zones {
        let c_air = rng.gen_range(0.3..0.8);
        let c_mass = rng.gen_range(3.0..8.0);
        let g_am = rng.gen_range(0.3..0.8);
        let g_ao = rng.gen_range(0.03..0.08);
        let g_mo = rng.gen_range(0.01..0.04);
        let a = [
            [1.0 - (g_am + g_ao) * dt / c_air, g_am * dt / c_air],
            [g_am * dt / c_mass, 1.0 - (g_am + g_mo) * dt / c_mass],
        ];
        let mut b = [[0.0; N_INPUTS]; N_STATES];
        b[0][input::Q_HP] = dt / c_air;
        b[0][input::Q_BB] = 0.6 * dt / c_air;
        b[1][input::Q_BB] = 0.4 * dt / c_mass;
        b[0][input::T_EXT] = g_ao * dt / c_air;
        b[1][input::T_EXT] = g_mo * dt / c_mass;
        b[0][input::Q_SG] = 0.3 * dt / c_air;
        b[1][input::Q_SG] = 0.7 * dt / c_mass;
        b[0][input::Q_IG] = dt / c_air;
        models.push(LtiZoneModel::new(a, b));
        let t_air = rng.gen_range(21.5..23.5);
        x0.push(state_from_temps(t_air, t_air - rng.gen_range(0.0..0.5)));
    }
    let base = HpRatings::default();
    let heating = HeatingSystem {
        hp: HpRatings {
            q_in_rated: base.q_in_rated[..n_zones].to_vec(),
            ..base
        },
        bb_rated: default_bb_rated()[..n_zones].to_vec(),
    };
    let battery = BatteryState::new(BatterySpec::default(), rng.gen_range(20.0..80.0))?;
    let prices = [6.5, 9.4, 13.2];
    let block_price: Vec<f64> = (0..n_blocks).map(|_| prices[rng.gen_range(0..3)]).collect();
    let t_ext = rng.gen_range(-28.0..4.0);
    let pv_peak = rng.gen_range(0.0..2.8);
    let band = ComfortBand {
        lb: 22.5,
        set: 23.0,
        ub: 23.5,
    };
    let mut data = HorizonData::default();
    for k in 0..l {
        let price = block_price[k / layout.block_len];
        data.t_ext.push(t_ext + 0.5 * (k as f64 / l as f64));
        data.t_gnd.push(6.0);
        data.q_sg.push([rng.gen_range(0.0..0.3); MAX_ZONES]);
        data.q_ig.push([0.1; MAX_ZONES]);
        data.p_pv.push(pv_peak * (std::f64::consts::PI * (k as f64 + 0.5) / l as f64).sin());
        data.p_elec.push(rng.gen_range(0.5..1.5));
        data.c_buy.push(price);
        data.c_sell.push(price);
        data.hour.push(10.0 + k as f64 * dt);
        data.comfort.push(band);
    }
    HorizonProblem::new(
        layout,
        models,
        x0,
        heating,
        battery,
        mode,
        RuleConfig::default(),
        ObjectiveWeights::default(),
        VarBounds::default(),
        data,
    )
}

/// One-zone, two-block instance with the battery-to-house fraction fixed,
/// leaving four free variables per block (5⁸ grid points at five levels).
pub fn tiny_problem(seed: u64) -> Result<HorizonProblem> {
    let mut p = random_problem(seed, 1, 2, RoutingMode::Optimized)?;
    p.bounds.f_b_h = (0.6, 0.6);
    Ok(p)
}
