//! Time-of-use buy prices and feed-in sell prices.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::time::{day_index, hour_of_day};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DayOfWeek {
    Monday,
    Tuesday,
    Wednesday,
    Thursday,
    Friday,
    Saturday,
    Sunday,
}

impl DayOfWeek {
    const ORDER: [DayOfWeek; 7] = [
        DayOfWeek::Monday,
        DayOfWeek::Tuesday,
        DayOfWeek::Wednesday,
        DayOfWeek::Thursday,
        DayOfWeek::Friday,
        DayOfWeek::Saturday,
        DayOfWeek::Sunday,
    ];

    pub fn plus_days(self, days: usize) -> DayOfWeek {
        let i = Self::ORDER.iter().position(|&d| d == self).unwrap_or(0);
        Self::ORDER[(i + days) % 7]
    }

    pub fn class(self) -> DowClass {
        match self {
            DayOfWeek::Saturday | DayOfWeek::Sunday => DowClass::Weekend,
            _ => DowClass::Weekday,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DowClass {
    Weekday,
    Weekend,
}

/// A price band `[start_h, end_h)` for one day class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriceBand {
    pub dow_class: DowClass,
    pub start_h: f64,
    pub end_h: f64,
    pub cents_per_kwh: f64,
}

/// Which sell prices apply.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SellPolicy {
    SameAsBuy,
    Zero,
    Bands(Vec<PriceBand>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TariffSchedule {
    pub buy: Vec<PriceBand>,
    pub sell: SellPolicy,
    pub start_day: DayOfWeek,
}

fn band(dow_class: DowClass, start_h: f64, end_h: f64, cents_per_kwh: f64) -> PriceBand {
    PriceBand {
        dow_class,
        start_h,
        end_h,
        cents_per_kwh,
    }
}

/// Ontario winter time-of-use bands.
pub fn ontario_tou() -> Vec<PriceBand> {
    use DowClass::*;
    vec![
        band(Weekday, 0.0, 7.0, 6.5),
        band(Weekday, 7.0, 11.0, 13.2),
        band(Weekday, 11.0, 17.0, 9.4),
        band(Weekday, 17.0, 19.0, 13.2),
        band(Weekday, 19.0, 24.0, 6.5),
        band(Weekend, 0.0, 24.0, 6.5),
    ]
}

impl Default for TariffSchedule {
    fn default() -> Self {
        TariffSchedule {
            buy: ontario_tou(),
            sell: SellPolicy::SameAsBuy,
            start_day: DayOfWeek::Saturday,
        }
    }
}

/// JSON override file: `{"buy": [...], "sell": [...]}` with optional `sell`
/// and `start_day`.
#[derive(Debug, Deserialize)]
struct TariffFile {
    buy: Vec<PriceBand>,
    #[serde(default)]
    sell: Option<Vec<PriceBand>>,
    #[serde(default)]
    start_day: Option<DayOfWeek>,
}

fn validate_bands(bands: &[PriceBand], what: &str, allow_zero: bool) -> Result<()> {
    for class in [DowClass::Weekday, DowClass::Weekend] {
        let mut b: Vec<&PriceBand> = bands.iter().filter(|b| b.dow_class == class).collect();
        b.sort_by(|x, y| x.start_h.total_cmp(&y.start_h));
        let mut t = 0.0;
        for p in &b {
            let price_ok = if allow_zero { p.cents_per_kwh >= 0.0 } else { p.cents_per_kwh > 0.0 };
            if p.start_h != t || p.end_h <= p.start_h || !price_ok {
                return Err(Error::Config(format!("{what} bands for {class:?} do not partition the day")));
            }
            t = p.end_h;
        }
        if t != 24.0 {
            return Err(Error::Config(format!("{what} bands for {class:?} do not cover 24 h")));
        }
    }
    Ok(())
}

fn lookup(bands: &[PriceBand], class: DowClass, hour: f64) -> f64 {
    bands
        .iter()
        .find(|b| b.dow_class == class && hour >= b.start_h && hour < b.end_h)
        .map_or(0.0, |b| b.cents_per_kwh)
}

impl TariffSchedule {
    pub fn with_sell(mut self, sell: SellPolicy) -> Self {
        self.sell = sell;
        self
    }

    pub fn validate(&self) -> Result<()> {
        validate_bands(&self.buy, "buy", false)?;
        if let SellPolicy::Bands(b) = &self.sell {
            validate_bands(b, "sell", true)?;
        }
        Ok(())
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let f: TariffFile = serde_json::from_str(s)?;
        let t = TariffSchedule {
            buy: f.buy,
            sell: f.sell.map_or(SellPolicy::SameAsBuy, SellPolicy::Bands),
            start_day: f.start_day.unwrap_or(DayOfWeek::Saturday),
        };
        t.validate()?;
        Ok(t)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    fn class_at(&self, t_h: f64) -> DowClass {
        self.start_day.plus_days(day_index(t_h).max(0) as usize).class()
    }

    /// Buy price at simulation time `t_h` hours, ¢/kWh.
    pub fn buy_price(&self, t_h: f64) -> f64 {
        lookup(&self.buy, self.class_at(t_h), hour_of_day(t_h))
    }

    /// Sell price at simulation time `t_h` hours, ¢/kWh.
    pub fn sell_price(&self, t_h: f64) -> f64 {
        match &self.sell {
            SellPolicy::SameAsBuy => self.buy_price(t_h),
            SellPolicy::Zero => 0.0,
            SellPolicy::Bands(b) => lookup(b, self.class_at(t_h), hour_of_day(t_h)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::time::{step_time_h, STEPS_PER_DAY, STEP_HOURS};

    fn weekday(h: f64) -> f64 {
        48.0 + h
    }

    #[test]
    fn band_lookups() {
        let t = TariffSchedule::default();
        assert_eq!(t.buy_price(weekday(8.0)), 13.2);
        assert_eq!(t.buy_price(weekday(12.0)), 9.4);
        assert_eq!(t.buy_price(12.0), 6.5);
        assert_eq!(t.buy_price(weekday(18.0)), 13.2);
        assert_eq!(t.sell_price(weekday(18.0)), 13.2);
        assert_eq!(t.sell_price(weekday(3.0)), 6.5);
        assert_eq!(t.buy_price(weekday(7.0)), 13.2);
        assert_eq!(t.buy_price(weekday(7.0) - 1e-9), 6.5);
        assert_eq!(t.buy_price(weekday(19.0)), 6.5);
        let base = t.with_sell(SellPolicy::Zero);
        for k in 0..(7 * STEPS_PER_DAY) {
            assert_eq!(base.sell_price(step_time_h(k)), 0.0);
        }
    }

    #[test]
    fn week_calendar() {
        let t = TariffSchedule::default();
        let classes: Vec<DowClass> = (0..7).map(|d| t.class_at(24.0 * d as f64 + 1.0)).collect();
        use DowClass::*;
        assert_eq!(classes, vec![Weekend, Weekend, Weekday, Weekday, Weekday, Weekday, Weekday]);
    }

    #[test]
    fn weekday_integral() {
        let t = TariffSchedule::default();
        let integral: f64 = (0..STEPS_PER_DAY).map(|k| t.buy_price(weekday(k as f64 * STEP_HOURS)) * STEP_HOURS).sum();
        let oracle = 4.0 * 13.2 + 2.0 * 13.2 + 6.0 * 9.4 + 7.0 * 6.5 + 5.0 * 6.5;
        assert!((integral - oracle).abs() < 1e-9);
        let weekend: f64 = (0..STEPS_PER_DAY).map(|k| t.buy_price(k as f64 * STEP_HOURS) * STEP_HOURS).sum();
        assert!((weekend - 24.0 * 6.5).abs() < 1e-9);
    }

    #[test]
    fn json_override() {
        let json = r#"{"buy": [
            {"dow_class": "weekday", "start_h": 0, "end_h": 24, "cents_per_kwh": 10},
            {"dow_class": "weekend", "start_h": 0, "end_h": 24, "cents_per_kwh": 5}
        ], "start_day": "monday"}"#;
        let t = TariffSchedule::from_json_str(json).unwrap();
        assert_eq!(t.buy_price(3.0), 10.0);
        assert_eq!(t.sell_price(24.0 * 5.0 + 1.0), 5.0);
        let gap = r#"{"buy": [
            {"dow_class": "weekday", "start_h": 0, "end_h": 12, "cents_per_kwh": 10},
            {"dow_class": "weekend", "start_h": 0, "end_h": 24, "cents_per_kwh": 5}
        ]}"#;
        assert!(TariffSchedule::from_json_str(gap).is_err());
    }
}
