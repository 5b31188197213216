//! Run configuration and per-scenario setup.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::building::{EnvelopeSpec, ExcitationConfig};
use crate::control::{ComfortSchedule, MpcConfig, ObjectiveWeights, RoutingMode, RuleConfig, VarBounds};
use crate::der::{BatterySpec, PvSpec};
use crate::heating::HeatingSystem;
use crate::loads::{default_appliances, ApplianceSpec, BaseLoad, OccupancySchedule};
use crate::tariff::{ontario_tou, DayOfWeek, PriceBand, SellPolicy, TariffSchedule};
use crate::weather::ClimateParams;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    /// MPC heating and battery discharge with rule-based PV and charging.
    Base,
    /// Full MPC over heating, battery and routing, with feed-in revenue.
    Case1,
    /// MPC heating only: no PV, no battery, no export revenue.
    ComfortOnly,
}

impl Scenario {
    pub const ALL: [Scenario; 3] = [Scenario::Base, Scenario::Case1, Scenario::ComfortOnly];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Base => "base",
            Scenario::Case1 => "case1",
            Scenario::ComfortOnly => "comfort_only",
        }
    }
}

impl std::str::FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown scenario `{s}` (expected base, case1 or comfort_only)")))
    }
}

impl std::fmt::Display for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Household electrical loads and internal gains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LoadConfig {
    pub appliances: Vec<ApplianceSpec>,
    pub occupancy: OccupancySchedule,
    pub base_load: BaseLoad,
}

impl Default for LoadConfig {
    fn default() -> Self {
        LoadConfig {
            appliances: default_appliances(),
            occupancy: OccupancySchedule::default(),
            base_load: BaseLoad::default(),
        }
    }
}

/// Buy bands and the feed-in rate used when export is paid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TariffConfig {
    pub buy: Vec<PriceBand>,
    /// Feed-in bands; `None` pays the buy price.
    pub sell: Option<Vec<PriceBand>>,
    pub start_day: DayOfWeek,
}

impl Default for TariffConfig {
    fn default() -> Self {
        TariffConfig {
            buy: ontario_tou(),
            sell: None,
            start_day: DayOfWeek::Saturday,
        }
    }
}

/// Everything a closed-loop run needs. Every field has a default, so a JSON
/// config only lists what it overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: Scenario,
    /// Simulated days including the warm-up.
    pub days: usize,
    pub warmup_days: usize,
    pub seed: u64,
    /// Weather CSV; a synthetic series is generated when absent.
    pub weather_file: Option<PathBuf>,
    pub climate: ClimateParams,
    pub envelope: EnvelopeSpec,
    pub heating: HeatingSystem,
    /// Lets a run switch all heating off.
    pub heating_enabled: bool,
    pub pv: PvSpec,
    pub battery: BatterySpec,
    /// Lower SOC limit of the rule-based scenario, %.
    pub base_soc_min: f64,
    pub initial_soc: f64,
    pub initial_temp: f64,
    pub tariff: TariffConfig,
    pub loads: LoadConfig,
    pub comfort: ComfortSchedule,
    /// Case I weights; the base case uses them without a sell incentive.
    pub weights: ObjectiveWeights,
    pub mpc: MpcConfig,
    pub rules: RuleConfig,
    pub excitation: ExcitationConfig,
    /// Feed the controller noisy forecasts instead of the actual disturbances.
    pub forecast_noise: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            scenario: Scenario::Case1,
            days: 8,
            warmup_days: 1,
            seed: 42,
            weather_file: None,
            climate: ClimateParams::default(),
            envelope: EnvelopeSpec::default(),
            heating: HeatingSystem::default(),
            heating_enabled: true,
            pv: PvSpec::default(),
            battery: BatterySpec::default(),
            base_soc_min: 50.0,
            initial_soc: 50.0,
            initial_temp: 21.5,
            tariff: TariffConfig::default(),
            loads: LoadConfig::default(),
            comfort: ComfortSchedule::default(),
            weights: ObjectiveWeights::default(),
            mpc: MpcConfig::default(),
            rules: RuleConfig::default(),
            excitation: ExcitationConfig::default(),
            forecast_noise: true,
        }
    }
}

impl RunConfig {
    pub fn for_scenario(scenario: Scenario) -> Self {
        RunConfig {
            scenario,
            ..Self::default()
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.days < 2 || self.warmup_days == 0 || self.warmup_days >= self.days {
            return Err(Error::Config("need days >= 2 and 1 <= warm-up days < days".into()));
        }
        if !self.initial_temp.is_finite() {
            return Err(Error::Config("initial temperature must be finite".into()));
        }
        self.heating.validate()?;
        self.pv.validate()?;
        self.battery.validate()?;
        self.comfort.validate()?;
        self.mpc.validate()?;
        self.weights.validate(self.heating.n_zones())?;
        let setup = self.setup();
        setup.battery.validate()?;
        let (lo, hi) = (setup.battery.soc_min, setup.battery.soc_max);
        if !(lo..=hi).contains(&self.initial_soc) {
            return Err(Error::Config(format!("initial SOC {} outside [{lo}, {hi}]%", self.initial_soc)));
        }
        setup.tariff.validate()
    }

    /// Scenario-specific settings derived from the config.
    pub fn setup(&self) -> ScenarioSetup {
        let sell_paid = match &self.tariff.sell {
            Some(bands) => SellPolicy::Bands(bands.clone()),
            None => SellPolicy::SameAsBuy,
        };
        let tariff = |sell| TariffSchedule {
            buy: self.tariff.buy.clone(),
            sell,
            start_day: self.tariff.start_day,
        };
        let mut bounds = VarBounds {
            p_b: (-self.battery.p_rated, self.battery.p_rated),
            ..VarBounds::default()
        };
        if !self.heating_enabled {
            bounds.plr = (0.0, 0.0);
            bounds.f_bb = (0.0, 0.0);
        }
        match self.scenario {
            Scenario::Case1 => ScenarioSetup {
                mode: RoutingMode::Optimized,
                bounds,
                weights: self.weights.clone(),
                battery: self.battery,
                tariff: tariff(sell_paid),
                pv_enabled: true,
            },
            Scenario::Base => ScenarioSetup {
                mode: RoutingMode::Rules,
                bounds: VarBounds {
                    p_b: (-self.battery.p_rated, 0.0),
                    f_pv_h: (0.0, 0.0),
                    f_b_h: (0.0, 0.0),
                    ..bounds
                },
                weights: ObjectiveWeights {
                    w2: 0.0,
                    ..self.weights.clone()
                },
                battery: BatterySpec {
                    soc_min: self.base_soc_min,
                    ..self.battery
                },
                tariff: tariff(SellPolicy::Zero),
                pv_enabled: true,
            },
            Scenario::ComfortOnly => ScenarioSetup {
                mode: RoutingMode::Optimized,
                bounds: VarBounds {
                    p_b: (0.0, 0.0),
                    f_pv_h: (0.0, 0.0),
                    f_b_h: (0.0, 0.0),
                    ..bounds
                },
                weights: self.weights.clone(),
                battery: self.battery,
                tariff: tariff(SellPolicy::Zero),
                pv_enabled: false,
            },
        }
    }
}

/// Controller and plant settings that differ between scenarios.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSetup {
    pub mode: RoutingMode,
    pub bounds: VarBounds,
    pub weights: ObjectiveWeights,
    pub battery: BatterySpec,
    pub tariff: TariffSchedule,
    pub pv_enabled: bool,
}
