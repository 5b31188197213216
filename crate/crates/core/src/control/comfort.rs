//! Comfort bounds, setpoint and tracking errors.

use serde::{Deserialize, Serialize};

use crate::time::hour_of_day;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComfortBand {
    pub lb: f64,
    pub set: f64,
    pub ub: f64,
}

impl ComfortBand {
    fn lerp(a: ComfortBand, b: ComfortBand, f: f64) -> ComfortBand {
        ComfortBand {
            lb: a.lb + (b.lb - a.lb) * f,
            set: a.set + (b.set - a.set) * f,
            ub: a.ub + (b.ub - a.ub) * f,
        }
    }
}

/// Day and night comfort bands with linear ramps between them. The ramp
/// into the day band ends at `day_start_h`; the ramp into the night band
/// starts at `day_end_h`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ComfortSchedule {
    pub day_start_h: f64,
    pub day_end_h: f64,
    pub ramp_h: f64,
    pub day: ComfortBand,
    pub night: ComfortBand,
}

impl Default for ComfortSchedule {
    fn default() -> Self {
        ComfortSchedule {
            day_start_h: 7.0,
            day_end_h: 22.0,
            ramp_h: 0.5,
            day: ComfortBand {
                lb: 22.5,
                set: 23.0,
                ub: 23.5,
            },
            night: ComfortBand {
                lb: 20.0,
                set: 21.5,
                ub: 23.5,
            },
        }
    }
}

impl ComfortSchedule {
    pub fn validate(&self) -> Result<()> {
        let ordered = |b: &ComfortBand| b.lb < b.set && b.set < b.ub;
        let times = 0.0 <= self.day_start_h - self.ramp_h
            && self.day_start_h < self.day_end_h
            && self.day_end_h + self.ramp_h <= 24.0
            && self.ramp_h >= 0.0;
        if ordered(&self.day) && ordered(&self.night) && times {
            Ok(())
        } else {
            Err(Error::Config("comfort bands must satisfy lb < set < ub within one day".into()))
        }
    }

    /// Band at simulation time `t_h` hours.
    pub fn at(&self, t_h: f64) -> ComfortBand {
        let h = hour_of_day(t_h);
        let ramp_in = self.day_start_h - self.ramp_h;
        if h >= self.day_start_h && h < self.day_end_h {
            self.day
        } else if self.ramp_h > 0.0 && h >= ramp_in && h < self.day_start_h {
            ComfortBand::lerp(self.night, self.day, (h - ramp_in) / self.ramp_h)
        } else if self.ramp_h > 0.0 && h >= self.day_end_h && h < self.day_end_h + self.ramp_h {
            ComfortBand::lerp(self.day, self.night, (h - self.day_end_h) / self.ramp_h)
        } else {
            self.night
        }
    }
}

/// `(e_set, e_bound)` for one operative temperature.
#[inline]
pub fn tracking_error(t_op: f64, band: &ComfortBand) -> (f64, f64) {
    let e_set = (t_op - band.set).abs();
    let e_bound = (t_op - band.ub).max(0.0) + (band.lb - t_op).max(0.0);
    (e_set, e_bound)
}

/// Setpoint and bound errors along a trajectory.
pub fn tracking_errors(t_op: &[f64], bands: &[ComfortBand]) -> Result<(Vec<f64>, Vec<f64>)> {
    if t_op.len() != bands.len() {
        return Err(Error::Dimension("temperature and comfort trajectories differ in length".into()));
    }
    Ok(t_op.iter().zip(bands).map(|(t, b)| tracking_error(*t, b)).unzip())
}
