//! Two-node (air, mass) RC thermal network per zone with air-to-air
//! couplings through interior walls.

use serde::{Deserialize, Serialize};

use crate::time::STEP_HOURS;
use crate::zone::Facade;
use crate::{Error, Result};

/// Fraction of each heat source that lands on the air node; the rest goes
/// to the mass node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AirFractions {
    pub hp: f64,
    pub bb: f64,
    pub solar: f64,
    pub internal: f64,
}

impl Default for AirFractions {
    fn default() -> Self {
        AirFractions {
            hp: 0.9,
            bb: 0.6,
            solar: 0.3,
            internal: 0.6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub facade: Facade,
    pub area: f64,
}

/// Lumped parameters of one zone. Capacities in kWh/K, conductances in kW/K.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZoneParams {
    pub floor_area: f64,
    pub c_air: f64,
    pub c_mass: f64,
    /// Air node to outdoors (glazing and infiltration).
    pub g_air_out: f64,
    /// Mass node to outdoors (opaque walls and ceiling).
    pub g_mass_out: f64,
    /// Mass node to ground (slab and soil).
    pub g_mass_gnd: f64,
    pub g_air_mass: f64,
    pub air_fractions: AirFractions,
    pub windows: Vec<Window>,
}

/// Air-to-air conductance between zones `a` and `b`, kW/K.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coupling {
    pub a: usize,
    pub b: usize,
    pub g: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RcPlantModel {
    pub zones: Vec<ZoneParams>,
    pub couplings: Vec<Coupling>,
    pub g_value: f64,
    pub dt_h: f64,
}

/// Construction data the default plant parameters are derived from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnvelopeSpec {
    pub height_m: f64,
    pub floor_area: [f64; 3],
    /// Exterior wall length per zone, m.
    pub exterior_wall_len: [f64; 3],
    /// Interior wall lengths shared by B1–LK and B2–LK, m.
    pub interior_wall_len: [f64; 2],
    pub windows: [Vec<Window>; 3],
    pub roof_rsi: f64,
    pub wall_rsi: f64,
    pub interior_wall_rsi: f64,
    pub slab_rsi: f64,
    /// Soil resistance added below the slab, m²K/W.
    pub soil_rsi: f64,
    pub window_u: f64,
    pub ach_natural: f64,
    /// Air node heat capacity as a multiple of the air volume's capacity.
    pub air_capacity_multiplier: f64,
    pub mass_kwh_per_k_m2: f64,
    /// Interior surface heat-transfer coefficient times surface/floor ratio, W/m²K.
    pub air_mass_w_per_k_m2: f64,
    pub g_value: f64,
    pub air_fractions: AirFractions,
}

fn win(facade: Facade, area: f64) -> Window {
    Window { facade, area }
}

impl Default for EnvelopeSpec {
    fn default() -> Self {
        // 9.5 m × 7.5 m footprint: LK spans the west side, B1 is the
        // south-east corner and B2 the north-east corner.
        EnvelopeSpec {
            height_m: 3.048,
            floor_area: [18.0, 15.75, 37.5],
            exterior_wall_len: [8.5, 8.0, 17.5],
            interior_wall_len: [4.0, 3.5],
            windows: [
                vec![win(Facade::S, 5.49), win(Facade::E, 4.80)],
                vec![win(Facade::E, 4.29), win(Facade::N, 5.49)],
                vec![win(Facade::N, 3.75), win(Facade::W, 9.15), win(Facade::S, 6.10)],
            ],
            roof_rsi: 6.897,
            wall_rsi: 3.003,
            interior_wall_rsi: 0.513,
            slab_rsi: 0.319,
            soil_rsi: 1.5,
            window_u: 1.57,
            ach_natural: 0.125,
            air_capacity_multiplier: 5.0,
            mass_kwh_per_k_m2: 0.1,
            air_mass_w_per_k_m2: 9.0,
            g_value: 0.376,
            air_fractions: AirFractions::default(),
        }
    }
}

impl EnvelopeSpec {
    /// Derives lumped RC parameters from areas and thermal resistances.
    pub fn to_plant(&self) -> RcPlantModel {
        let h = self.height_m;
        let zones = (0..3)
            .map(|z| {
                let floor = self.floor_area[z];
                let volume = floor * h;
                let window_area: f64 = self.windows[z].iter().map(|w| w.area).sum();
                let wall_area = (self.exterior_wall_len[z] * h - window_area).max(0.0);
                // Air: 1.2 kJ/m³K; infiltration: 0.335 W per m³/h per K.
                let g_air_out = (self.window_u * window_area + 0.335 * self.ach_natural * volume) / 1000.0;
                let g_mass_out = (wall_area / self.wall_rsi + floor / self.roof_rsi) / 1000.0;
                ZoneParams {
                    floor_area: floor,
                    c_air: volume * 1.2 * self.air_capacity_multiplier / 3600.0,
                    c_mass: self.mass_kwh_per_k_m2 * floor,
                    g_air_out,
                    g_mass_out,
                    g_mass_gnd: floor / (self.slab_rsi + self.soil_rsi) / 1000.0,
                    g_air_mass: self.air_mass_w_per_k_m2 * floor / 1000.0,
                    air_fractions: self.air_fractions,
                    windows: self.windows[z].clone(),
                }
            })
            .collect();
        let couplings = [(0, 2), (1, 2)]
            .iter()
            .zip(self.interior_wall_len)
            .map(|(&(a, b), len)| Coupling {
                a,
                b,
                g: len * h / self.interior_wall_rsi / 1000.0,
            })
            .collect();
        RcPlantModel {
            zones,
            couplings,
            g_value: self.g_value,
            dt_h: STEP_HOURS,
        }
    }
}

impl Default for RcPlantModel {
    fn default() -> Self {
        EnvelopeSpec::default().to_plant()
    }
}

/// Node temperatures of every zone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZoneThermalState {
    pub t_air: Vec<f64>,
    pub t_mass: Vec<f64>,
}

impl ZoneThermalState {
    pub fn uniform(n_zones: usize, t: f64) -> Self {
        ZoneThermalState {
            t_air: vec![t; n_zones],
            t_mass: vec![t; n_zones],
        }
    }

    pub fn n_zones(&self) -> usize {
        self.t_air.len()
    }

    /// Operative temperature: mean of air and mass-node temperatures.
    pub fn t_op(&self, zone: usize) -> f64 {
        0.5 * (self.t_air[zone] + self.t_mass[zone])
    }
}

/// Heat inputs and boundary conditions for one plant step. Per-zone slices
/// in kW.
#[derive(Debug, Clone, Copy)]
pub struct PlantInputs<'a> {
    pub q_hp: &'a [f64],
    pub q_bb: &'a [f64],
    pub q_sg: &'a [f64],
    pub q_ig: &'a [f64],
    pub t_ext: f64,
    pub t_gnd: f64,
}

impl RcPlantModel {
    pub fn n_zones(&self) -> usize {
        self.zones.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.zones.len();
        if n == 0 {
            return Err(Error::Config("plant needs at least one zone".into()));
        }
        for z in &self.zones {
            let positive = z.c_air > 0.0 && z.c_mass > 0.0 && z.g_air_mass > 0.0;
            let nonneg = z.g_air_out >= 0.0 && z.g_mass_out >= 0.0 && z.g_mass_gnd >= 0.0;
            let f = z.air_fractions;
            let fractions = [f.hp, f.bb, f.solar, f.internal].iter().all(|x| (0.0..=1.0).contains(x));
            if !(positive && nonneg && fractions) {
                return Err(Error::Config("zone capacities and conductances must be positive".into()));
            }
        }
        for c in &self.couplings {
            if c.a >= n || c.b >= n || c.a == c.b || !(c.g > 0.0) {
                return Err(Error::Config(format!("invalid coupling {}–{}", c.a, c.b)));
            }
        }
        if !(self.dt_h > 0.0) {
            return Err(Error::Config("plant step must be positive".into()));
        }
        Ok(())
    }

    /// Copy of the plant with all interior couplings removed.
    pub fn uncoupled(&self) -> Self {
        RcPlantModel {
            couplings: Vec::new(),
            ..self.clone()
        }
    }

    /// Solar gain through each zone's windows, kW.
    pub fn solar_gains(&self, si_south: f64, hour: f64, table: &crate::weather::SolarGainFactorTable) -> Vec<f64> {
        self.zones
            .iter()
            .map(|z| super::zone_solar_gain(si_south, hour, &z.windows, self.g_value, table))
            .collect()
    }
}

/// Advances the plant by one explicit-Euler step.
pub fn plant_step(plant: &RcPlantModel, state: &ZoneThermalState, u: &PlantInputs) -> Result<ZoneThermalState> {
    let n = plant.n_zones();
    let lens = [state.t_air.len(), state.t_mass.len(), u.q_hp.len(), u.q_bb.len(), u.q_sg.len(), u.q_ig.len()];
    if lens.iter().any(|&l| l != n) {
        return Err(Error::Dimension(format!("plant has {n} zones")));
    }
    let finite = [u.q_hp, u.q_bb, u.q_sg, u.q_ig, &state.t_air, &state.t_mass]
        .iter()
        .all(|s| s.iter().all(|v| v.is_finite()))
        && u.t_ext.is_finite()
        && u.t_gnd.is_finite();
    if !finite {
        return Err(Error::NonFinite("plant input or state".into()));
    }

    let mut q_air = vec![0.0; n];
    let mut q_mass = vec![0.0; n];
    for (i, z) in plant.zones.iter().enumerate() {
        let f = z.air_fractions;
        let (ta, tm) = (state.t_air[i], state.t_mass[i]);
        let to_air = f.hp * u.q_hp[i] + f.bb * u.q_bb[i] + f.solar * u.q_sg[i] + f.internal * u.q_ig[i];
        let total = u.q_hp[i] + u.q_bb[i] + u.q_sg[i] + u.q_ig[i];
        let exchange = z.g_air_mass * (tm - ta);
        q_air[i] = to_air + exchange - z.g_air_out * (ta - u.t_ext);
        q_mass[i] = (total - to_air) - exchange - z.g_mass_out * (tm - u.t_ext) - z.g_mass_gnd * (tm - u.t_gnd);
    }
    for c in &plant.couplings {
        let q = c.g * (state.t_air[c.a] - state.t_air[c.b]);
        q_air[c.a] -= q;
        q_air[c.b] += q;
    }
    let dt = plant.dt_h;
    Ok(ZoneThermalState {
        t_air: (0..n).map(|i| state.t_air[i] + dt * q_air[i] / plant.zones[i].c_air).collect(),
        t_mass: (0..n).map(|i| state.t_mass[i] + dt * q_mass[i] / plant.zones[i].c_mass).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn zeros(n: usize) -> Vec<f64> {
        vec![0.0; n]
    }

    #[test]
    fn equilibrium_is_fixed_point() {
        let p = RcPlantModel::default();
        let s = ZoneThermalState::uniform(3, 20.0);
        let z = zeros(3);
        let u = PlantInputs {
            q_hp: &z,
            q_bb: &z,
            q_sg: &z,
            q_ig: &z,
            t_ext: 20.0,
            t_gnd: 20.0,
        };
        assert_eq!(plant_step(&p, &s, &u).unwrap(), s);
    }

    #[test]
    fn one_kw_into_lossless_air_node() {
        let mut p = RcPlantModel::default().uncoupled();
        for z in &mut p.zones {
            z.c_air = 0.5;
            z.g_air_out = 0.0;
            z.air_fractions.hp = 1.0;
        }
        let s = ZoneThermalState::uniform(3, 20.0);
        let z = zeros(3);
        let q = [1.0, 0.0, 0.0];
        let u = PlantInputs {
            q_hp: &q,
            q_bb: &z,
            q_sg: &z,
            q_ig: &z,
            t_ext: 20.0,
            t_gnd: 20.0,
        };
        let next = plant_step(&p, &s, &u).unwrap();
        assert!((next.t_air[0] - 20.125).abs() < 1e-12);
        assert_eq!(next.t_air[1], 20.0);
    }

    #[test]
    fn cold_outside_cools_every_zone() {
        let p = RcPlantModel::default();
        let s = ZoneThermalState::uniform(3, 21.0);
        let z = zeros(3);
        let u = PlantInputs {
            q_hp: &z,
            q_bb: &z,
            q_sg: &z,
            q_ig: &z,
            t_ext: -20.0,
            t_gnd: -20.0,
        };
        let next = plant_step(&p, &s, &u).unwrap();
        for i in 0..3 {
            assert!(next.t_op(i) < s.t_op(i));
            assert!(next.t_air[i] < 21.0 && next.t_mass[i] < 21.0);
        }
        let nan = [f64::NAN, 0.0, 0.0];
        assert!(plant_step(&p, &s, &PlantInputs { q_hp: &nan, ..u }).is_err());
    }

    #[test]
    fn default_parameters_are_valid() {
        let p = RcPlantModel::default();
        p.validate().unwrap();
        let ua: f64 = p.zones.iter().map(|z| z.g_air_out + z.g_mass_out).sum();
        assert!(ua > 0.05 && ua < 0.2, "envelope UA {ua} kW/K");
        for z in &p.zones {
            let stiff = p.dt_h * (z.g_air_mass + z.g_air_out + 0.05) / z.c_air;
            assert!(stiff < 1.0);
        }
    }

    proptest! {
        #[test]
        fn energy_balance(
            ta in proptest::array::uniform3(10.0f64..30.0),
            tm in proptest::array::uniform3(10.0f64..30.0),
            q in proptest::array::uniform3(0.0f64..5.0),
            t_ext in -25.0f64..10.0,
            t_gnd in 0.0f64..10.0,
        ) {
            let p = RcPlantModel::default();
            let s = ZoneThermalState { t_air: ta.to_vec(), t_mass: tm.to_vec() };
            let sg = [0.3, 0.1, 0.5];
            let ig = [0.1, 0.1, 0.2];
            let u = PlantInputs { q_hp: &q, q_bb: &q, q_sg: &sg, q_ig: &ig, t_ext, t_gnd };
            let next = plant_step(&p, &s, &u).unwrap();
            let stored: f64 = (0..3)
                .map(|i| p.zones[i].c_air * (next.t_air[i] - ta[i]) + p.zones[i].c_mass * (next.t_mass[i] - tm[i]))
                .sum();
            let mut inflow = 0.0;
            let mut loss = 0.0;
            for i in 0..3 {
                let z = &p.zones[i];
                inflow += 2.0 * q[i] + sg[i] + ig[i];
                loss += z.g_air_out * (ta[i] - t_ext) + z.g_mass_out * (tm[i] - t_ext) + z.g_mass_gnd * (tm[i] - t_gnd);
            }
            let expected = p.dt_h * (inflow - loss);
            prop_assert!((stored - expected).abs() <= 1e-9 * expected.abs().max(1.0));
        }

        #[test]
        fn free_response_contracts(ta in proptest::array::uniform3(-10.0f64..40.0), tm in proptest::array::uniform3(-10.0f64..40.0)) {
            let p = RcPlantModel::default();
            let mut s = ZoneThermalState { t_air: ta.to_vec(), t_mass: tm.to_vec() };
            let z = [0.0; 3];
            let u = PlantInputs { q_hp: &z, q_bb: &z, q_sg: &z, q_ig: &z, t_ext: 5.0, t_gnd: 5.0 };
            let dev = |s: &ZoneThermalState| s.t_air.iter().chain(&s.t_mass).map(|t| (t - 5.0).abs()).fold(0.0, f64::max);
            let d0 = dev(&s);
            for _ in 0..50 {
                s = plant_step(&p, &s, &u).unwrap();
            }
            prop_assert!(dev(&s) <= d0 + 1e-12);
        }
    }
}
