//! Per-step energy dispatch: optimized fractions or the rule-based baseline.

use serde::{Deserialize, Serialize};

use crate::der::{clamp_power, max_feasible_power, BatteryState, Direction};
use crate::powerflow::{route, PowerFlows};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoutingMode {
    /// Battery power and split fractions come from the plan.
    Optimized,
    /// Fixed priority rules; only battery discharge comes from the plan.
    Rules,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RuleConfig {
    /// Before this hour PV charges the battery ahead of the house.
    pub morning_end_h: f64,
}

impl Default for RuleConfig {
    fn default() -> Self {
        RuleConfig { morning_end_h: 12.0 }
    }
}

/// Baseline routing. In the morning PV charges the battery first, then
/// feeds the house; later it feeds the house first and charges with the
/// surplus. The battery never charges from the grid and discharges only to
/// the house, by at most the requested `-p_b_request`.
pub fn rule_based_step(
    battery: &BatteryState,
    p_pv: f64,
    p_load: f64,
    hour: f64,
    p_b_request: f64,
    rules: &RuleConfig,
    dt_h: f64,
) -> PowerFlows {
    let charge_cap = max_feasible_power(battery, Direction::Charge, dt_h);
    let (p_pv_h, p_pv_b) = if hour < rules.morning_end_h {
        let b = p_pv.min(charge_cap);
        ((p_pv - b).min(p_load), b)
    } else {
        let h = p_pv.min(p_load);
        (h, (p_pv - h).min(charge_cap))
    };
    let p_pv_g = (p_pv - p_pv_h - p_pv_b).max(0.0);
    let residual = (p_load - p_pv_h).max(0.0);
    let p_b_h = if p_pv_b <= 0.0 && p_b_request < 0.0 {
        (-p_b_request)
            .min(max_feasible_power(battery, Direction::Discharge, dt_h))
            .min(residual)
    } else {
        0.0
    };
    let p_b = if p_pv_b > 0.0 { p_pv_b } else { -p_b_h };
    PowerFlows {
        p_pv,
        p_b,
        p_load,
        p_pv_h,
        p_pv_b,
        p_pv_g,
        p_b_h,
        p_b_g: 0.0,
        p_g_h: (residual - p_b_h).max(0.0),
        p_g_b: 0.0,
        f_b_h: if p_b_h > 0.0 { 1.0 } else { 0.0 },
    }
}

/// Flows for one step under either routing mode. The battery power in the
/// result (`p_b`) is already clamped to what the battery accepts.
#[allow(clippy::too_many_arguments)]
#[inline]
pub fn dispatch(
    mode: RoutingMode,
    battery: &BatteryState,
    p_pv: f64,
    p_load: f64,
    hour: f64,
    p_b: f64,
    f_pv_h: f64,
    f_b_h: f64,
    rules: &RuleConfig,
    dt_h: f64,
) -> PowerFlows {
    match mode {
        RoutingMode::Optimized => route(p_pv, clamp_power(battery, p_b, dt_h), p_load, f_pv_h, f_b_h),
        RoutingMode::Rules => rule_based_step(battery, p_pv, p_load, hour, p_b.min(0.0), rules, dt_h),
    }
}
