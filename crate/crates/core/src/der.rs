//! Rooftop PV and home battery.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const SNAP: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PvSpec {
    pub area: f64,
    pub eta_pv: f64,
    pub tau_alpha_n: f64,
    pub eta_ri: f64,
}

impl Default for PvSpec {
    fn default() -> Self {
        PvSpec {
            area: 32.7,
            eta_pv: 0.1488,
            tau_alpha_n: 0.74,
            eta_ri: 0.78,
        }
    }
}

impl PvSpec {
    pub fn validate(&self) -> Result<()> {
        let unit = |x: f64| x > 0.0 && x <= 1.0;
        if self.area > 0.0 && unit(self.eta_pv) && unit(self.tau_alpha_n) && unit(self.eta_ri) {
            Ok(())
        } else {
            Err(Error::Config("PV efficiencies must be in (0, 1] and area > 0".into()))
        }
    }

    /// kW per W/m² of plane-of-array irradiance.
    pub fn kw_per_irradiance(&self) -> f64 {
        self.eta_pv * self.area * self.tau_alpha_n * self.eta_ri / 1000.0
    }
}

/// PV output in kW for an irradiance in W/m².
pub fn pv_power(si: f64, spec: &PvSpec) -> Result<f64> {
    if si.is_nan() || si < 0.0 {
        return Err(Error::OutOfRange(format!("irradiance {si} must be >= 0")));
    }
    Ok(spec.eta_pv * si * spec.area * spec.tau_alpha_n * spec.eta_ri / 1000.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BatteryMode {
    /// Efficiency multiplies the power for both charge and discharge.
    #[default]
    Literal,
    /// Discharge draws `|p| / eta` from storage.
    Physical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BatterySpec {
    pub e_max: f64,
    pub eta: f64,
    pub soc_min: f64,
    pub soc_max: f64,
    pub p_rated: f64,
    pub mode: BatteryMode,
}

impl Default for BatterySpec {
    fn default() -> Self {
        BatterySpec {
            e_max: 13.5,
            eta: 0.95,
            soc_min: 10.0,
            soc_max: 90.0,
            p_rated: 5.0,
            mode: BatteryMode::Literal,
        }
    }
}

impl BatterySpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.e_max > 0.0 && self.eta > 0.0 && self.eta <= 1.0 && self.p_rated >= 0.0) {
            return Err(Error::Config("battery capacity, efficiency or rating invalid".into()));
        }
        if !(0.0 <= self.soc_min && self.soc_min <= self.soc_max && self.soc_max <= 100.0) {
            return Err(Error::Config("battery SOC limits must satisfy 0 <= min <= max <= 100".into()));
        }
        Ok(())
    }

    pub fn e_min(&self) -> f64 {
        self.e_max * self.soc_min / 100.0
    }

    pub fn e_upper(&self) -> f64 {
        self.e_max * self.soc_max / 100.0
    }

    /// Stored-energy change for a signed power held over `dt_h`.
    pub fn delta_energy(&self, p_b: f64, dt_h: f64) -> f64 {
        match self.mode {
            BatteryMode::Physical if p_b < 0.0 => p_b / self.eta * dt_h,
            _ => p_b * self.eta * dt_h,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BatteryState {
    pub e_b: f64,
    pub spec: BatterySpec,
}

impl BatteryState {
    pub fn new(spec: BatterySpec, soc: f64) -> Result<Self> {
        spec.validate()?;
        let state = BatteryState {
            e_b: spec.e_max * soc / 100.0,
            spec,
        };
        state.check_bounds()?;
        Ok(state)
    }

    pub fn soc(&self) -> f64 {
        100.0 * self.e_b / self.spec.e_max
    }

    /// State after holding `p_b` for `dt_h`, without rating or bound
    /// checks. Energies within a relative 1e-9 of a bound snap onto it.
    #[inline]
    pub fn advanced(&self, p_b: f64, dt_h: f64) -> BatteryState {
        let mut e_b = self.e_b + self.spec.delta_energy(p_b, dt_h);
        let (lo, hi) = (self.spec.e_min(), self.spec.e_upper());
        if (e_b - lo).abs() <= SNAP * self.spec.e_max {
            e_b = lo;
        } else if (e_b - hi).abs() <= SNAP * self.spec.e_max {
            e_b = hi;
        }
        BatteryState { e_b, spec: self.spec }
    }

    fn check_bounds(&self) -> Result<()> {
        let soc = self.soc();
        if soc < self.spec.soc_min - SNAP || soc > self.spec.soc_max + SNAP {
            return Err(Error::SocBounds {
                soc,
                min: self.spec.soc_min,
                max: self.spec.soc_max,
            });
        }
        Ok(())
    }
}

/// Advances the battery by one step of signed power (charge positive).
pub fn battery_step(state: &BatteryState, p_b: f64, dt_h: f64) -> Result<BatteryState> {
    if !p_b.is_finite() || p_b.abs() > state.spec.p_rated * (1.0 + SNAP) {
        return Err(Error::OutOfRange(format!(
            "battery power {p_b} exceeds rating {}",
            state.spec.p_rated
        )));
    }
    let next = state.advanced(p_b, dt_h);
    next.check_bounds()?;
    Ok(next)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Charge,
    Discharge,
}

/// Largest power magnitude in `direction` that keeps SOC within bounds
/// after one step.
pub fn max_feasible_power(state: &BatteryState, direction: Direction, dt_h: f64) -> f64 {
    let s = &state.spec;
    let p = match direction {
        Direction::Charge => (s.e_upper() - state.e_b) / (s.eta * dt_h),
        Direction::Discharge => {
            let room = state.e_b - s.e_min();
            match s.mode {
                BatteryMode::Literal => room / (s.eta * dt_h),
                BatteryMode::Physical => room * s.eta / dt_h,
            }
        }
    };
    p.clamp(0.0, s.p_rated)
}

/// Clamps a requested signed power to what the battery can accept this step.
pub fn clamp_power(state: &BatteryState, p_b: f64, dt_h: f64) -> f64 {
    if p_b > 0.0 {
        p_b.min(max_feasible_power(state, Direction::Charge, dt_h))
    } else if p_b < 0.0 {
        p_b.max(-max_feasible_power(state, Direction::Discharge, dt_h))
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::time::STEP_HOURS;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn pv_examples() {
        let s = PvSpec::default();
        assert_eq!(pv_power(0.0, &s).unwrap(), 0.0);
        let p = pv_power(1000.0, &s).unwrap();
        assert_relative_eq!(p, 0.1488 * 32.7 * 0.74 * 0.78, max_relative = 1e-12);
        assert!((p - 2.8085).abs() < 1e-4);
        assert_relative_eq!(pv_power(600.0, &s).unwrap(), 2.0 * pv_power(300.0, &s).unwrap(), max_relative = 1e-12);
        assert!(pv_power(-1.0, &s).is_err());
    }

    #[test]
    fn soc_and_energy_steps() {
        let spec = BatterySpec::default();
        let b = BatteryState::new(spec, 50.0).unwrap();
        assert_relative_eq!(b.e_b, 6.75);
        let up = battery_step(&b, 5.0, STEP_HOURS).unwrap();
        assert_relative_eq!(up.e_b - b.e_b, 0.296875, max_relative = 1e-12);
        let down = battery_step(&b, -5.0, STEP_HOURS).unwrap();
        assert_relative_eq!(down.e_b - b.e_b, -0.296875, max_relative = 1e-12);
        let phys = BatteryState::new(BatterySpec { mode: BatteryMode::Physical, ..spec }, 50.0).unwrap();
        let down = battery_step(&phys, -5.0, STEP_HOURS).unwrap();
        assert_relative_eq!(down.e_b - phys.e_b, -5.0 / 0.95 * STEP_HOURS, max_relative = 1e-12);
    }

    #[test]
    fn bound_violations_rejected() {
        let b = BatteryState::new(BatterySpec::default(), 89.5).unwrap();
        assert!(matches!(battery_step(&b, 5.0, STEP_HOURS), Err(Error::SocBounds { .. })));
        assert!(battery_step(&b, 6.0, STEP_HOURS).is_err());
        assert!(BatteryState::new(BatterySpec::default(), 95.0).is_err());
    }

    #[test]
    fn feasible_power_examples() {
        let spec = BatterySpec::default();
        let full = BatteryState::new(spec, 90.0).unwrap();
        assert_eq!(max_feasible_power(&full, Direction::Charge, STEP_HOURS), 0.0);
        let empty = BatteryState::new(spec, 10.0).unwrap();
        assert_eq!(max_feasible_power(&empty, Direction::Discharge, STEP_HOURS), 0.0);
        let near = BatteryState::new(spec, 89.0).unwrap();
        let cap = max_feasible_power(&near, Direction::Charge, STEP_HOURS);
        assert_relative_eq!(cap, 0.01 * 13.5 / (0.95 * 0.0625), max_relative = 1e-9);
        assert!((cap - 2.2737).abs() < 1e-4);
        let next = battery_step(&near, cap, STEP_HOURS).unwrap();
        assert_eq!(next.soc(), 90.0);
    }

    proptest! {
        #[test]
        fn clamped_steps_stay_in_bounds(
            soc0 in 10.0f64..=90.0,
            powers in proptest::collection::vec(-5.0f64..=5.0, 1..200),
            physical in any::<bool>(),
        ) {
            let mode = if physical { BatteryMode::Physical } else { BatteryMode::Literal };
            let mut b = BatteryState::new(BatterySpec { mode, ..BatterySpec::default() }, soc0).unwrap();
            for p in powers {
                let p = clamp_power(&b, p, STEP_HOURS);
                b = battery_step(&b, p, STEP_HOURS).unwrap();
                prop_assert!(b.soc() >= 10.0 && b.soc() <= 90.0);
            }
        }

        #[test]
        fn literal_mode_reversible(soc0 in 30.0f64..=70.0, p in 0.0f64..=5.0) {
            let b = BatteryState::new(BatterySpec::default(), soc0).unwrap();
            let up = battery_step(&b, p, STEP_HOURS).unwrap();
            let back = battery_step(&up, -p, STEP_HOURS).unwrap();
            prop_assert!((back.e_b - b.e_b).abs() <= 1e-12);
        }

        #[test]
        fn pv_proportional(si in 0.0f64..1200.0, k in 0.1f64..3.0) {
            let s = PvSpec::default();
            let scaled = PvSpec { area: s.area * k, ..s };
            let a = pv_power(si, &scaled).unwrap();
            let b = k * pv_power(si, &s).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
        }
    }
}
