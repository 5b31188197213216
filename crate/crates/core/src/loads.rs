//! Scheduled non-HVAC electrical load and the internal heat gains it causes.

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::time::{hour_of_day, step_time_h, STEPS_PER_DAY, STEPS_PER_HOUR};
use crate::weather::{channel, channel_rng};
use crate::zone::Zone;
use crate::{Error, Result};

/// One scheduled appliance. The JSON form is
/// `{name, kw, gain_frac, zone, start_h, dur_h}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApplianceSpec {
    pub name: String,
    /// Rated electrical power, kW.
    pub kw: f64,
    /// Fraction of the electrical power released as convective heat.
    pub gain_frac: f64,
    pub zone: Zone,
    /// Daily start hour in `[0, 24)`.
    pub start_h: f64,
    /// Daily on-duration, hours. Intervals may wrap past midnight.
    pub dur_h: f64,
}

impl ApplianceSpec {
    fn new(name: &str, watts: f64, gain_pct: f64, start_h: f64, dur_h: f64) -> Self {
        ApplianceSpec {
            name: name.to_string(),
            kw: watts / 1000.0,
            gain_frac: gain_pct / 100.0,
            zone: Zone::LK,
            start_h,
            dur_h,
        }
    }

    pub fn is_on(&self, hour: f64) -> bool {
        in_daily_interval(hour, self.start_h, self.dur_h)
    }
}

fn in_daily_interval(hour: f64, start_h: f64, dur_h: f64) -> bool {
    if dur_h >= 24.0 {
        return true;
    }
    let since = (hour - start_h).rem_euclid(24.0);
    since < dur_h
}

/// Default appliance schedule: continuous refrigerator, morning laundry,
/// evening oven and dishwasher. All heat gains enter the living-kitchen zone.
pub fn default_appliances() -> Vec<ApplianceSpec> {
    vec![
        ApplianceSpec::new("clothes_washer", 1780.0, 85.0, 9.0, 1.0),
        ApplianceSpec::new("dryer", 5300.0, 15.0, 10.0, 1.0),
        ApplianceSpec::new("dishwasher", 890.0, 65.0, 20.0, 1.0),
        ApplianceSpec::new("refrigerator", 720.0, 100.0, 0.0, 24.0),
        ApplianceSpec::new("oven", 2200.0, 50.0, 18.0, 1.0),
    ]
}

/// Lighting, hot water, ventilation and inverter draw, not counted as heat gain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaseLoad {
    pub night_kw: f64,
    pub day_kw: f64,
    pub day_start_h: f64,
    pub day_end_h: f64,
}

impl BaseLoad {
    pub fn constant(kw: f64) -> Self {
        BaseLoad {
            night_kw: kw,
            day_kw: kw,
            day_start_h: 7.0,
            day_end_h: 22.0,
        }
    }

    pub fn at(&self, hour: f64) -> f64 {
        if hour >= self.day_start_h && hour < self.day_end_h {
            self.day_kw
        } else {
            self.night_kw
        }
    }
}

impl Default for BaseLoad {
    fn default() -> Self {
        BaseLoad {
            night_kw: 0.25,
            day_kw: 0.55,
            day_start_h: 7.0,
            day_end_h: 22.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OccupancyInterval {
    pub zone: Zone,
    pub start_h: f64,
    pub dur_h: f64,
}

/// Occupant heat gain per occupied zone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OccupancySchedule {
    pub gain_kw: f64,
    pub intervals: Vec<OccupancyInterval>,
}

impl OccupancySchedule {
    pub fn none() -> Self {
        OccupancySchedule {
            gain_kw: 0.0,
            intervals: Vec::new(),
        }
    }
}

impl Default for OccupancySchedule {
    /// Bedrooms occupied 22:00–08:00, living-kitchen 08:00–22:00.
    fn default() -> Self {
        let iv = |zone, start_h, dur_h| OccupancyInterval { zone, start_h, dur_h };
        OccupancySchedule {
            gain_kw: 0.1,
            intervals: vec![iv(Zone::B1, 22.0, 10.0), iv(Zone::B2, 22.0, 10.0), iv(Zone::LK, 8.0, 14.0)],
        }
    }
}

/// Per-step non-HVAC electrical load and per-zone internal gains, kW.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadProfile {
    pub p_elec: Vec<f64>,
    /// Indexed `[step][zone index]`.
    pub q_ig: Vec<[f64; 3]>,
}

impl LoadProfile {
    pub fn len(&self) -> usize {
        self.p_elec.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p_elec.is_empty()
    }
}

fn validate_appliances(appliances: &[ApplianceSpec]) -> Result<()> {
    for a in appliances {
        if !(a.kw > 0.0) {
            return Err(Error::Config(format!("appliance `{}`: rated power must be > 0", a.name)));
        }
        if !(0.0..=1.0).contains(&a.gain_frac) {
            return Err(Error::Config(format!("appliance `{}`: gain fraction outside [0, 1]", a.name)));
        }
        if !(0.0..24.0).contains(&a.start_h) || !(a.dur_h > 0.0 && a.dur_h <= 24.0) {
            return Err(Error::Config(format!("appliance `{}`: interval outside the day", a.name)));
        }
    }
    for (i, a) in appliances.iter().enumerate() {
        for b in &appliances[i + 1..] {
            if a.name != b.name {
                continue;
            }
            // Two daily intervals overlap iff either start lies inside the other.
            let overlap = in_daily_interval(b.start_h, a.start_h, a.dur_h)
                || in_daily_interval(a.start_h, b.start_h, b.dur_h);
            if overlap {
                return Err(Error::Config(format!(
                    "appliance `{}` has overlapping duplicate entries",
                    a.name
                )));
            }
        }
    }
    Ok(())
}

/// Builds the per-step load profile for `days` days.
pub fn build_load_profile(
    appliances: &[ApplianceSpec],
    occupancy: &OccupancySchedule,
    base_load: &BaseLoad,
    days: usize,
) -> Result<LoadProfile> {
    validate_appliances(appliances)?;
    if occupancy.gain_kw < 0.0 || base_load.day_kw < 0.0 || base_load.night_kw < 0.0 {
        return Err(Error::Config("negative base load or occupant gain".into()));
    }
    let n = days * STEPS_PER_DAY;
    let mut profile = LoadProfile {
        p_elec: Vec::with_capacity(n),
        q_ig: Vec::with_capacity(n),
    };
    for k in 0..n {
        let h = hour_of_day(step_time_h(k));
        let mut p = base_load.at(h);
        let mut q = [0.0; 3];
        for a in appliances.iter().filter(|a| a.is_on(h)) {
            p += a.kw;
            q[a.zone.index()] += a.kw * a.gain_frac;
        }
        for occ in &occupancy.intervals {
            if in_daily_interval(h, occ.start_h, occ.dur_h) {
                q[occ.zone.index()] += occupancy.gain_kw;
            }
        }
        profile.p_elec.push(p);
        profile.q_ig.push(q);
    }
    Ok(profile)
}

/// Scales internal gains by an hourly Gaussian factor per zone. `pct_std` is
/// the approximate maximum deviation, taken as three standard deviations.
pub fn perturb_internal_gains(profile: &LoadProfile, pct_std: f64, seed: u64) -> Result<LoadProfile> {
    if !(pct_std >= 0.0) {
        return Err(Error::Config("internal gain deviation must be >= 0".into()));
    }
    if pct_std == 0.0 {
        return Ok(profile.clone());
    }
    let hours = profile.len().div_ceil(STEPS_PER_HOUR);
    let factors = Zone::ALL.map(|z| internal_gain_factors(pct_std, seed, z, hours));
    let q_ig = profile
        .q_ig
        .iter()
        .enumerate()
        .map(|(k, q)| {
            let h = k / STEPS_PER_HOUR;
            [
                (q[0] * factors[0][h]).max(0.0),
                (q[1] * factors[1][h]).max(0.0),
                (q[2] * factors[2][h]).max(0.0),
            ]
        })
        .collect();
    Ok(LoadProfile {
        p_elec: profile.p_elec.clone(),
        q_ig,
    })
}

/// The hourly multiplicative factors `perturb_internal_gains` draws for one zone.
pub fn internal_gain_factors(pct_std: f64, seed: u64, zone: Zone, hours: usize) -> Vec<f64> {
    if pct_std == 0.0 {
        return vec![1.0; hours];
    }
    let dist = Normal::new(0.0, pct_std / 3.0).expect("valid std");
    let mut rng = channel_rng(seed, channel::INTERNAL_GAIN + zone.index() as u64);
    (0..hours).map(|_| 1.0 + dist.sample(&mut rng)).collect()
}
