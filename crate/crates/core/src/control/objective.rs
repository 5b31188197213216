//! Receding-horizon objective over a blocked plan.
//!
//! Zone temperatures are linear in block-constant heat inputs, so the
//! evaluator precomputes each zone's free response and its response to a
//! unit input held for one block. A cached evaluation lets the optimizer
//! price a single-variable change by recomputing only what it touches.

use serde::{Deserialize, Serialize};

use super::comfort::{tracking_error, ComfortBand};
use super::plan::{DecisionPlan, Layout, VarBounds, VarKind};
use super::rules::{dispatch, RoutingMode, RuleConfig};
use crate::building::lti::{input, LtiZoneModel, N_INPUTS, N_STATES};
use crate::der::BatteryState;
use crate::heating::{hp_rated_at, HeatingOutput, HeatingSystem, MAX_ZONES};
use crate::optim::BoxObjective;
use crate::time::STEP_HOURS;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SocUnits {
    #[default]
    Percent,
    Kwh,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ObjectiveWeights {
    pub w1: f64,
    pub w2: f64,
    pub w3: f64,
    pub w4: Vec<f64>,
    pub w5: Vec<f64>,
    pub soc_units: SocUnits,
    /// Hours per step applied to price × power products.
    pub dk_h: f64,
    /// Apply `dk_h` to the SOC-change term too, keeping its ratio to the
    /// price terms as in the unscaled objective.
    pub soc_term_dk: bool,
}

impl Default for ObjectiveWeights {
    fn default() -> Self {
        ObjectiveWeights {
            w1: 1.5,
            w2: 1.0,
            w3: 5.0,
            w4: vec![3.2; 3],
            w5: vec![0.08, 0.05, 0.08],
            soc_units: SocUnits::Percent,
            dk_h: STEP_HOURS,
            soc_term_dk: true,
        }
    }
}

impl ObjectiveWeights {
    /// Weights without a sell incentive.
    pub fn base_case() -> Self {
        ObjectiveWeights {
            w2: 0.0,
            ..Self::default()
        }
    }

    pub fn validate(&self, n_zones: usize) -> Result<()> {
        let all = [self.w1, self.w2, self.w3].into_iter().chain(self.w4.iter().copied()).chain(self.w5.iter().copied());
        if all.clone().any(|w| !(w >= 0.0) || !w.is_finite()) {
            return Err(Error::Config("objective weights must be finite and non-negative".into()));
        }
        if self.w4.len() < n_zones || self.w5.len() < n_zones || !(self.dk_h > 0.0) {
            return Err(Error::Config("one comfort weight per zone and a positive step length required".into()));
        }
        Ok(())
    }
}

/// Forecasts, prices and comfort bands over the prediction horizon. Entry
/// `k` describes step `k`; `comfort[k]` applies to the temperature at the
/// end of step `k`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct HorizonData {
    pub t_ext: Vec<f64>,
    pub t_gnd: Vec<f64>,
    pub q_sg: Vec<[f64; MAX_ZONES]>,
    pub q_ig: Vec<[f64; MAX_ZONES]>,
    pub p_pv: Vec<f64>,
    /// Non-heating electrical load, kW.
    pub p_elec: Vec<f64>,
    pub c_buy: Vec<f64>,
    pub c_sell: Vec<f64>,
    pub hour: Vec<f64>,
    pub comfort: Vec<ComfortBand>,
}

impl HorizonData {
    fn check_len(&self, l: usize) -> Result<()> {
        let lens = [
            self.t_ext.len(),
            self.t_gnd.len(),
            self.q_sg.len(),
            self.q_ig.len(),
            self.p_pv.len(),
            self.p_elec.len(),
            self.c_buy.len(),
            self.c_sell.len(),
            self.hour.len(),
            self.comfort.len(),
        ];
        if lens.iter().any(|&n| n != l) {
            return Err(Error::Dimension(format!("horizon data must have {l} steps")));
        }
        Ok(())
    }
}

/// Objective terms, each already weighted.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ObjectiveBreakdown {
    pub buy: f64,
    pub sell: f64,
    pub soc: f64,
    pub bound: f64,
    pub setpoint: f64,
}

impl ObjectiveBreakdown {
    pub fn total(&self) -> f64 {
        self.buy - self.sell + self.soc + self.bound + self.setpoint
    }
}

/// One horizon optimization problem.
#[derive(Debug, Clone)]
pub struct HorizonProblem {
    pub layout: Layout,
    pub models: Vec<LtiZoneModel>,
    pub x0: Vec<[f64; N_STATES]>,
    pub heating: HeatingSystem,
    pub battery0: BatteryState,
    pub mode: RoutingMode,
    pub rules: RuleConfig,
    pub weights: ObjectiveWeights,
    pub bounds: VarBounds,
    pub data: HorizonData,
    q_rated: Vec<f64>,
    p_rated: Vec<f64>,
    free: Vec<Vec<f64>>,
    imp_hp: Vec<Vec<f64>>,
    blk_hp: Vec<Vec<f64>>,
    blk_bb: Vec<Vec<f64>>,
    cache: Option<Cache>,
}

#[derive(Debug, Clone)]
struct Cache {
    x: Vec<f64>,
    total: f64,
    buy: Vec<f64>,
    sell: Vec<f64>,
    soc_pen: Vec<f64>,
    /// Battery energy at the start of each step; one extra entry.
    e_b: Vec<f64>,
    p_load: Vec<f64>,
    limited: Vec<bool>,
    temps: Vec<Vec<f64>>,
    bound_sq: Vec<f64>,
    set_sum: Vec<f64>,
}

/// Per-step outcome of the economic part.
struct StepEcon {
    buy: f64,
    sell: f64,
    soc_pen: f64,
    e_next: f64,
}

impl HorizonProblem {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        layout: Layout,
        models: Vec<LtiZoneModel>,
        x0: Vec<[f64; N_STATES]>,
        heating: HeatingSystem,
        battery0: BatteryState,
        mode: RoutingMode,
        rules: RuleConfig,
        weights: ObjectiveWeights,
        bounds: VarBounds,
        data: HorizonData,
    ) -> Result<Self> {
        let nz = layout.n_zones;
        let l = layout.horizon();
        if nz == 0 || nz > MAX_ZONES || models.len() != nz || x0.len() != nz || heating.n_zones() != nz {
            return Err(Error::Dimension(format!("problem needs {nz} zone models, states and heating units")));
        }
        data.check_len(l)?;
        heating.validate()?;
        weights.validate(nz)?;
        bounds.validate()?;

        let (q_rated, p_rated): (Vec<f64>, Vec<f64>) = data.t_ext.iter().map(|&t| hp_rated_at(t, 20.0, &heating.hp)).unzip();
        let mut free = Vec::with_capacity(nz);
        let mut imp_hp = Vec::with_capacity(nz);
        let mut imp_bb = Vec::with_capacity(nz);
        for (z, m) in models.iter().enumerate() {
            let mut x = x0[z];
            free.push(
                (0..l)
                    .map(|k| {
                        let mut u = [0.0; N_INPUTS];
                        u[input::T_EXT] = data.t_ext[k];
                        u[input::Q_SG] = data.q_sg[k][z];
                        u[input::Q_IG] = data.q_ig[k][z];
                        u[input::T_GND] = data.t_gnd[k];
                        x = m.step(x, &u);
                        m.t_op(x)
                    })
                    .collect(),
            );
            imp_hp.push(impulse(m, input::Q_HP, l));
            imp_bb.push(impulse(m, input::Q_BB, l));
        }
        let blk_hp = imp_hp.iter().map(|h| block_response(h, layout.block_len)).collect();
        let blk_bb = imp_bb.iter().map(|h| block_response(h, layout.block_len)).collect();
        Ok(HorizonProblem {
            layout,
            models,
            x0,
            heating,
            battery0,
            mode,
            rules,
            weights,
            bounds,
            data,
            q_rated,
            p_rated,
            free,
            imp_hp,
            blk_hp,
            blk_bb,
            cache: None,
        })
    }

    pub fn horizon(&self) -> usize {
        self.layout.horizon()
    }

    fn heat(&self, x: &[f64], k: usize) -> HeatingOutput {
        let nz = self.layout.n_zones;
        let b = self.layout.block_of_step(k);
        let plr = &x[self.layout.plr(b, 0)..self.layout.plr(b, 0) + nz];
        let f_bb = &x[self.layout.f_bb(b, 0)..self.layout.f_bb(b, 0) + nz];
        self.heating.operate_rated(plr, f_bb, self.q_rated[k], self.p_rated[k])
    }

    #[inline]
    fn econ(&self, x: &[f64], k: usize, e_b: f64, p_load: f64) -> StepEcon {
        let b = self.layout.block_of_step(k);
        let battery = BatteryState {
            e_b,
            spec: self.battery0.spec,
        };
        let d = &self.data;
        let f = dispatch(
            self.mode,
            &battery,
            d.p_pv[k],
            p_load,
            d.hour[k],
            x[self.layout.p_b(b)],
            x[self.layout.f_pv_h(b)],
            x[self.layout.f_b_h(b)],
            &self.rules,
            STEP_HOURS,
        );
        let w = &self.weights;
        let next = battery.advanced(f.p_b, STEP_HOURS);
        let change = match w.soc_units {
            SocUnits::Percent => (next.soc() - battery.soc()).abs(),
            SocUnits::Kwh => (next.e_b - e_b).abs(),
        };
        StepEcon {
            buy: w.w1 * d.c_buy[k] * f.grid_import() * w.dk_h,
            sell: w.w2 * d.c_sell[k] * f.grid_export() * w.dk_h,
            soc_pen: w.w3 * change * if w.soc_term_dk { w.dk_h } else { 1.0 },
            e_next: next.e_b,
        }
    }

    fn comfort_terms(&self, temps: &[f64], from: usize) -> (f64, f64) {
        let mut bound_sq = 0.0;
        let mut set_sum = 0.0;
        for (t, band) in temps[from..].iter().zip(&self.data.comfort[from..]) {
            let (e_set, e_bound) = tracking_error(*t, band);
            bound_sq += e_bound * e_bound;
            set_sum += e_set;
        }
        (bound_sq, set_sum)
    }

    fn comfort_value(&self, z: usize, bound_sq: f64, set_sum: f64) -> f64 {
        self.weights.w4[z] * bound_sq.sqrt() + self.weights.w5[z] * set_sum
    }

    fn full(&self, x: &[f64]) -> Cache {
        let l = self.horizon();
        let nz = self.layout.n_zones;
        let lay = &self.layout;
        let mut c = Cache {
            x: x.to_vec(),
            total: 0.0,
            buy: vec![0.0; l],
            sell: vec![0.0; l],
            soc_pen: vec![0.0; l],
            e_b: vec![0.0; l + 1],
            p_load: vec![0.0; l],
            limited: vec![false; l],
            temps: self.free.clone(),
            bound_sq: vec![0.0; nz],
            set_sum: vec![0.0; nz],
        };
        c.e_b[0] = self.battery0.e_b;
        let mut heat_out = Vec::with_capacity(l);
        for k in 0..l {
            let h = self.heat(x, k);
            c.limited[k] = h.f_capacity < 1.0;
            c.p_load[k] = self.data.p_elec[k] + h.p_total();
            let s = self.econ(x, k, c.e_b[k], c.p_load[k]);
            c.buy[k] = s.buy;
            c.sell[k] = s.sell;
            c.soc_pen[k] = s.soc_pen;
            c.e_b[k + 1] = s.e_next;
            heat_out.push(h);
        }
        for z in 0..nz {
            let temps = &mut c.temps[z];
            for b in 0..lay.n_blocks {
                let q_hp = x[lay.plr(b, z)] * self.heating.hp.q_in_rated[z];
                let q_bb = x[lay.f_bb(b, z)] * self.heating.bb_rated[z];
                let start = b * lay.block_len;
                for k in start..l {
                    temps[k] += self.blk_hp[z][k - start] * q_hp + self.blk_bb[z][k - start] * q_bb;
                }
            }
            for j in (0..l).filter(|&j| c.limited[j]) {
                let b = lay.block_of_step(j);
                let dq = heat_out[j].q_hp[z] - x[lay.plr(b, z)] * self.heating.hp.q_in_rated[z];
                for k in j..l {
                    temps[k] += self.imp_hp[z][k - j] * dq;
                }
            }
            let (bsq, ss) = self.comfort_terms(&c.temps[z], 0);
            c.bound_sq[z] = bsq;
            c.set_sum[z] = ss;
        }
        c.total = self.sum_terms(&c);
        c
    }

    fn sum_terms(&self, c: &Cache) -> f64 {
        self.breakdown_of(c).total()
    }

    fn breakdown_of(&self, c: &Cache) -> ObjectiveBreakdown {
        let nz = self.layout.n_zones;
        ObjectiveBreakdown {
            buy: c.buy.iter().sum(),
            sell: c.sell.iter().sum(),
            soc: c.soc_pen.iter().sum(),
            bound: (0..nz).map(|z| self.weights.w4[z] * c.bound_sq[z].sqrt()).sum(),
            setpoint: (0..nz).map(|z| self.weights.w5[z] * c.set_sum[z]).sum(),
        }
    }

    /// Objective value of a plan.
    pub fn objective(&self, plan: &DecisionPlan) -> Result<f64> {
        Ok(self.breakdown(plan)?.total())
    }

    /// Weighted objective terms of a plan.
    pub fn breakdown(&self, plan: &DecisionPlan) -> Result<ObjectiveBreakdown> {
        let x = plan.to_vec();
        if x.len() != self.layout.dim() {
            return Err(Error::Dimension("plan does not match the horizon layout".into()));
        }
        let c = self.full(&x);
        let b = self.breakdown_of(&c);
        if !b.total().is_finite() {
            return Err(Error::Solver("objective is not finite".into()));
        }
        Ok(b)
    }

    /// Predicted operative temperatures of every zone under a plan.
    pub fn predicted_temps(&self, plan: &DecisionPlan) -> Vec<Vec<f64>> {
        self.full(&plan.to_vec()).temps
    }

    /// Change of the objective when only variable `i` of the cached point
    /// changes to `v`.
    fn delta_cached(&self, c: &Cache, i: usize, v: f64) -> f64 {
        let lay = &self.layout;
        let l = self.horizon();
        let b = lay.block_of_var(i);
        let start = b * lay.block_len;
        let end = start + lay.block_len;
        let kind = lay.kind(i);
        let mut x = c.x.clone();
        x[i] = v;

        let heating_var = matches!(kind, VarKind::Plr(_) | VarKind::Bb(_));
        let mut new_load = Vec::new();
        if heating_var {
            new_load.reserve(lay.block_len);
            for k in start..end {
                let h = self.heat(&x, k);
                if h.f_capacity < 1.0 || c.limited[k] {
                    return self.full(&x).total - c.total;
                }
                new_load.push(self.data.p_elec[k] + h.p_total());
            }
        }
        let load_at = |k: usize| {
            if heating_var && (start..end).contains(&k) {
                new_load[k - start]
            } else {
                c.p_load[k]
            }
        };

        let mut delta = 0.0;
        let battery_path_changes = self.mode == RoutingMode::Rules || kind == VarKind::Battery;
        let econ_end = if battery_path_changes { l } else { end };
        let mut e = c.e_b[start];
        for k in start..econ_end {
            let s = self.econ(&x, k, e, load_at(k));
            delta += (s.buy - c.buy[k]) - (s.sell - c.sell[k]) + (s.soc_pen - c.soc_pen[k]);
            e = s.e_next;
        }

        if heating_var {
            let (z, dq, resp) = match kind {
                VarKind::Plr(z) => (z, (v - c.x[i]) * self.heating.hp.q_in_rated[z], &self.blk_hp[z]),
                VarKind::Bb(z) => (z, (v - c.x[i]) * self.heating.bb_rated[z], &self.blk_bb[z]),
                _ => unreachable!(),
            };
            let old_t = &c.temps[z][start..];
            let new_t: Vec<f64> = old_t.iter().enumerate().map(|(m, t)| t + resp[m] * dq).collect();
            let (old_bsq, old_ss) = self.comfort_terms(&c.temps[z], start);
            let mut bsq = 0.0;
            let mut ss = 0.0;
            for (t, band) in new_t.iter().zip(&self.data.comfort[start..]) {
                let (e_set, e_bound) = tracking_error(*t, band);
                bsq += e_bound * e_bound;
                ss += e_set;
            }
            let before = self.comfort_value(z, c.bound_sq[z], c.set_sum[z]);
            let after = self.comfort_value(z, (c.bound_sq[z] - old_bsq + bsq).max(0.0), c.set_sum[z] - old_ss + ss);
            delta += after - before;
        }
        delta
    }

    /// Box bounds as flat vectors.
    pub fn bound_vectors(&self) -> (Vec<f64>, Vec<f64>) {
        self.bounds.vectors(&self.layout)
    }
}

impl BoxObjective for HorizonProblem {
    fn dim(&self) -> usize {
        self.layout.dim()
    }

    fn value(&mut self, x: &[f64]) -> f64 {
        let c = self.full(x);
        let total = c.total;
        self.cache = Some(c);
        total
    }

    fn delta(&mut self, x: &[f64], i: usize, v: f64) -> f64 {
        let stale = self.cache.as_ref().is_none_or(|c| c.x != x);
        if stale {
            self.value(x);
        }
        let c = self.cache.as_ref().expect("cache populated");
        self.delta_cached(c, i, v)
    }
}

/// `C A^m B[:, input]` for `m = 0 .. l`.
fn impulse(m: &LtiZoneModel, input: usize, l: usize) -> Vec<f64> {
    let mut x = [m.b[0][input], m.b[1][input]];
    (0..l)
        .map(|_| {
            let y = m.t_op(x);
            x = m.step_free(x);
            y
        })
        .collect()
}

/// Response to a unit input held for `block_len` steps starting at step 0.
fn block_response(imp: &[f64], block_len: usize) -> Vec<f64> {
    let mut acc = 0.0;
    (0..imp.len())
        .map(|m| {
            acc += imp[m];
            if m >= block_len {
                acc -= imp[m - block_len];
            }
            acc
        })
        .collect()
}
