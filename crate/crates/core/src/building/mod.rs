//! Thermal plant of the house and the identified prediction models.

pub mod identify;
pub mod lti;
pub mod plant;

pub use identify::{identify_lti, ExcitationConfig, ZoneFit};
pub use lti::{predict, state_from_temps, LtiZoneModel};
pub use plant::{plant_step, Coupling, EnvelopeSpec, PlantInputs, RcPlantModel, Window, ZoneParams, ZoneThermalState};

use crate::weather::SolarGainFactorTable;

/// Solar heat gain through a zone's windows, kW. Each façade sees the south
/// façade irradiance scaled by its relative factor at that hour.
pub fn zone_solar_gain(si_south: f64, hour: f64, windows: &[Window], g_value: f64, table: &SolarGainFactorTable) -> f64 {
    windows
        .iter()
        .map(|w| si_south * table.factor(hour, w.facade) * w.area * g_value)
        .sum::<f64>()
        / 1000.0
}
