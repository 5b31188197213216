//! Routing of power among PV, battery, house and grid.

use serde::{Deserialize, Serialize};

/// The seven source-to-sink channels plus the routing inputs. All channels
/// are non-negative kW.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PowerFlows {
    pub p_pv: f64,
    pub p_b: f64,
    pub p_load: f64,
    pub p_pv_h: f64,
    pub p_pv_b: f64,
    pub p_pv_g: f64,
    pub p_b_h: f64,
    pub p_b_g: f64,
    pub p_g_h: f64,
    pub p_g_b: f64,
    /// Battery-to-house fraction after the residual-load cap.
    pub f_b_h: f64,
}

impl PowerFlows {
    pub const CHANNELS: [&'static str; 7] = ["p_pv_h", "p_pv_b", "p_pv_g", "p_b_h", "p_b_g", "p_g_h", "p_g_b"];

    pub fn channels(&self) -> [f64; 7] {
        [self.p_pv_h, self.p_pv_b, self.p_pv_g, self.p_b_h, self.p_b_g, self.p_g_h, self.p_g_b]
    }

    pub fn grid_import(&self) -> f64 {
        self.p_g_h + self.p_g_b
    }

    pub fn grid_export(&self) -> f64 {
        self.p_pv_g + self.p_b_g
    }
}

/// Splits PV and battery power among the house, battery and grid.
///
/// `p_b` is positive when charging. Requires `p_pv >= 0`, `p_load >= 0` and
/// both fractions in `[0, 1]`.
pub fn route(p_pv: f64, p_b: f64, p_load: f64, f_pv_h: f64, f_b_h: f64) -> PowerFlows {
    let p_pv_h = (p_pv * f_pv_h).min(p_load);
    let p_pv_b = if p_b > 0.0 { (p_pv * (1.0 - f_pv_h)).min(p_b) } else { 0.0 };
    let p_pv_g = (p_pv - p_pv_h - p_pv_b).max(0.0);
    let (p_b_h, f_b_h) = if p_b < 0.0 {
        let p = (-p_b * f_b_h).min(p_load - p_pv_h);
        (p, p / -p_b)
    } else {
        (0.0, f_b_h)
    };
    let p_b_g = if p_b < 0.0 { (-p_b - p_b_h).max(0.0) } else { 0.0 };
    let p_g_h = (p_load - p_pv_h - p_b_h).max(0.0);
    let p_g_b = if p_b > 0.0 { (p_b - p_pv_b).max(0.0) } else { 0.0 };
    PowerFlows {
        p_pv,
        p_b,
        p_load,
        p_pv_h,
        p_pv_b,
        p_pv_g,
        p_b_h,
        p_b_g,
        p_g_h,
        p_g_b,
        f_b_h,
    }
}
