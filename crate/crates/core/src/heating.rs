//! Multi-split air-to-air heat pump (one outdoor unit, one indoor fan unit
//! per zone) and electric baseboards.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// BTU/h → kW.
pub const BTU_H_TO_KW: f64 = 0.000293071;

/// Maximum zone count handled by the fixed-size heating outputs.
pub const MAX_ZONES: usize = 3;

/// Heat-pump ratings and the outdoor-temperature derating model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HpRatings {
    /// Rated heating capacity of each indoor fan unit, kW.
    pub q_in_rated: Vec<f64>,
    /// Outdoor-unit heating capacity at the nominal outdoor temperature, kW.
    pub q_hp_rated_nominal: f64,
    /// Nameplate electrical input of the outdoor unit, kW.
    pub p_hp_rated_nominal: f64,
    /// Indoor fan power per running indoor unit, kW.
    pub fan_kw: f64,
    /// Rated COP at `cop_anchor_t`.
    pub cop_anchor: f64,
    pub cop_anchor_t: f64,
    /// Rated COP gained per °C of outdoor temperature.
    pub cop_slope: f64,
    /// Outdoor temperature at which capacity equals `q_hp_rated_nominal`, °C.
    pub nominal_t: f64,
    /// Relative capacity change per °C.
    pub capacity_slope: f64,
    pub capacity_factor_min: f64,
    pub capacity_factor_max: f64,
    /// Outdoor temperatures are clamped to this domain, °C.
    pub t_ext_domain: (f64, f64),
    /// Report zero outdoor-unit power when the unit is off instead of the
    /// part-load curve's intercept.
    pub zero_standby: bool,
}

impl Default for HpRatings {
    fn default() -> Self {
        HpRatings {
            q_in_rated: vec![8700.0 * BTU_H_TO_KW, 8700.0 * BTU_H_TO_KW, 13600.0 * BTU_H_TO_KW],
            q_hp_rated_nominal: 45000.0 * BTU_H_TO_KW,
            p_hp_rated_nominal: 7.2,
            fan_kw: 0.03,
            cop_anchor: 2.85,
            cop_anchor_t: -8.33,
            cop_slope: 0.02,
            nominal_t: 8.33,
            capacity_slope: 0.011,
            capacity_factor_min: 0.5,
            capacity_factor_max: 1.1,
            t_ext_domain: (-30.0, 20.0),
            zero_standby: true,
        }
    }
}

impl HpRatings {
    pub fn n_zones(&self) -> usize {
        self.q_in_rated.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.q_in_rated.is_empty() || self.q_in_rated.len() > MAX_ZONES {
            return Err(Error::Config(format!("between 1 and {MAX_ZONES} indoor units required")));
        }
        let positive = self.q_in_rated.iter().all(|&q| q > 0.0)
            && self.q_hp_rated_nominal > 0.0
            && self.p_hp_rated_nominal > 0.0
            && self.cop_anchor > 0.0
            && self.fan_kw >= 0.0
            && self.cop_slope >= 0.0;
        if !positive {
            return Err(Error::Config("heat-pump ratings must be positive".into()));
        }
        let (lo, _) = self.t_ext_domain;
        if self.cop_at(lo) <= 0.0 {
            return Err(Error::Config("rated COP must stay positive over the outdoor domain".into()));
        }
        Ok(())
    }

    /// Rated COP at an outdoor temperature (clamped to the domain).
    pub fn cop_at(&self, t_ext: f64) -> f64 {
        let t = t_ext.clamp(self.t_ext_domain.0, self.t_ext_domain.1);
        self.cop_anchor + self.cop_slope * (t - self.cop_anchor_t)
    }
}

/// Rated outdoor-unit capacity and electrical input at the given outdoor
/// temperature. Capacity derates linearly around the nominal point and the
/// input power follows from a rated COP that is linear in outdoor
/// temperature. The indoor temperature has no effect in this model.
pub fn hp_rated_at(t_ext: f64, _t_in: f64, ratings: &HpRatings) -> (f64, f64) {
    let t = t_ext.clamp(ratings.t_ext_domain.0, ratings.t_ext_domain.1);
    let factor = (1.0 + ratings.capacity_slope * (t - ratings.nominal_t))
        .clamp(ratings.capacity_factor_min, ratings.capacity_factor_max);
    let q = ratings.q_hp_rated_nominal * factor;
    (q, q / ratings.cop_at(t))
}

/// Total capacity demanded by the indoor units, kW.
pub fn hp_demand(plr_in_demand: &[f64], ratings: &HpRatings) -> Result<f64> {
    if plr_in_demand.len() != ratings.n_zones() {
        return Err(Error::Dimension(format!(
            "{} part-load ratios for {} indoor units",
            plr_in_demand.len(),
            ratings.n_zones()
        )));
    }
    check_fractions("indoor part-load ratio", plr_in_demand)?;
    Ok(demand_unchecked(plr_in_demand, &ratings.q_in_rated))
}

fn demand_unchecked(plr: &[f64], q_in_rated: &[f64]) -> f64 {
    plr.iter().zip(q_in_rated).map(|(p, q)| p * q).sum()
}

fn check_fractions(what: &str, values: &[f64]) -> Result<()> {
    match values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        Some(v) => Err(Error::OutOfRange(format!("{what} {v} outside [0, 1]"))),
        None => Ok(()),
    }
}

/// Fraction of rated electrical input drawn at an outdoor-unit part-load
/// ratio. The two branches do not meet at 0.4.
pub fn part_load_power_fraction(plr_ou: f64) -> f64 {
    if plr_ou >= 0.4 {
        0.124 + 1.124 * plr_ou
    } else {
        0.0109 + plr_ou * (0.9863 + plr_ou * (-2.3784 + plr_ou * 4.8146))
    }
}

/// Outdoor unit operating state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutdoorUnit {
    pub plr_ou: f64,
    pub q_hp_ou: f64,
    pub p_hp_ou: f64,
}

/// Outdoor-unit part-load ratio, delivered capacity and electrical input.
pub fn hp_outdoor(q_demand: f64, q_rated: f64, p_rated: f64) -> Result<OutdoorUnit> {
    if !(q_rated > 0.0) {
        return Err(Error::OutOfRange("rated outdoor capacity must be > 0".into()));
    }
    if q_demand < 0.0 || p_rated < 0.0 {
        return Err(Error::OutOfRange("negative demand or rated power".into()));
    }
    let plr_ou = (q_demand / q_rated).min(1.0);
    Ok(OutdoorUnit {
        plr_ou,
        q_hp_ou: q_rated * plr_ou,
        p_hp_ou: p_rated * part_load_power_fraction(plr_ou),
    })
}

/// Indoor-unit apportionment when demand exceeds outdoor capacity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Apportioned {
    pub f_capacity: f64,
    pub plr_in: Vec<f64>,
    pub q_hp: Vec<f64>,
}

pub fn hp_apportion(plr_in_demand: &[f64], q_demand: f64, q_rated: f64, ratings: &HpRatings) -> Apportioned {
    let f_capacity = capacity_factor(q_demand, q_rated);
    let plr_in: Vec<f64> = plr_in_demand.iter().map(|p| p * f_capacity).collect();
    let q_hp = plr_in.iter().zip(&ratings.q_in_rated).map(|(p, q)| p * q).collect();
    Apportioned {
        f_capacity,
        plr_in,
        q_hp,
    }
}

fn capacity_factor(q_demand: f64, q_rated: f64) -> f64 {
    if q_demand <= q_rated {
        1.0
    } else {
        q_rated / q_demand
    }
}

/// Baseboard heat and electrical power per zone (unity efficiency).
pub fn bb_power(f_bb: &[f64], bb_rated: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    if f_bb.len() != bb_rated.len() {
        return Err(Error::Dimension("baseboard fractions vs ratings".into()));
    }
    check_fractions("baseboard fraction", f_bb)?;
    let q: Vec<f64> = f_bb.iter().zip(bb_rated).map(|(f, r)| f * r).collect();
    Ok((q.clone(), q))
}

/// Default baseboard ratings for B1, B2 and LK, kW.
pub fn default_bb_rated() -> Vec<f64> {
    vec![2.25, 2.00, 4.25]
}

/// The heat pump and baseboards of a house.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatingSystem {
    pub hp: HpRatings,
    pub bb_rated: Vec<f64>,
}

impl Default for HeatingSystem {
    fn default() -> Self {
        HeatingSystem {
            hp: HpRatings::default(),
            bb_rated: default_bb_rated(),
        }
    }
}

/// Everything the heating system does in one step.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct HeatingOutput {
    pub plr_ou: f64,
    pub f_capacity: f64,
    pub q_hp_ou: f64,
    pub p_hp_ou: f64,
    pub p_fan: f64,
    pub plr_in: [f64; MAX_ZONES],
    pub q_hp: [f64; MAX_ZONES],
    pub q_bb: [f64; MAX_ZONES],
    pub p_bb: f64,
}

impl HeatingOutput {
    /// Total electrical draw of the heating system, kW.
    pub fn p_total(&self) -> f64 {
        self.p_hp_ou + self.p_fan + self.p_bb
    }
}

impl HeatingSystem {
    pub fn n_zones(&self) -> usize {
        self.hp.n_zones()
    }

    pub fn validate(&self) -> Result<()> {
        self.hp.validate()?;
        if self.bb_rated.len() != self.hp.n_zones() || self.bb_rated.iter().any(|&b| b < 0.0) {
            return Err(Error::Config("one non-negative baseboard rating per zone required".into()));
        }
        Ok(())
    }

    /// Evaluates the heating system for demanded indoor part-load ratios and
    /// baseboard fractions, checking their ranges.
    pub fn operate(&self, plr_in_demand: &[f64], f_bb: &[f64], t_ext: f64) -> Result<HeatingOutput> {
        let nz = self.n_zones();
        if plr_in_demand.len() != nz || f_bb.len() != nz {
            return Err(Error::Dimension(format!("expected {nz} zone values")));
        }
        check_fractions("indoor part-load ratio", plr_in_demand)?;
        check_fractions("baseboard fraction", f_bb)?;
        if !t_ext.is_finite() {
            return Err(Error::NonFinite("outdoor temperature".into()));
        }
        let (q_rated, p_rated) = hp_rated_at(t_ext, 20.0, &self.hp);
        Ok(self.operate_rated(plr_in_demand, f_bb, q_rated, p_rated))
    }

    /// Unchecked evaluation with precomputed outdoor-unit ratings; inputs
    /// must already lie in `[0, 1]`.
    pub fn operate_rated(&self, plr_in_demand: &[f64], f_bb: &[f64], q_rated: f64, p_rated: f64) -> HeatingOutput {
        let hp = &self.hp;
        let q_demand = demand_unchecked(plr_in_demand, &hp.q_in_rated);
        let plr_ou = (q_demand / q_rated).min(1.0);
        let f_capacity = capacity_factor(q_demand, q_rated);
        let mut out = HeatingOutput {
            plr_ou,
            f_capacity,
            q_hp_ou: q_rated * plr_ou,
            p_hp_ou: if plr_ou == 0.0 && hp.zero_standby {
                0.0
            } else {
                p_rated * part_load_power_fraction(plr_ou)
            },
            ..HeatingOutput::default()
        };
        for z in 0..plr_in_demand.len() {
            let plr = plr_in_demand[z] * f_capacity;
            out.plr_in[z] = plr;
            out.q_hp[z] = plr * hp.q_in_rated[z];
            if plr > 0.0 {
                out.p_fan += hp.fan_kw;
            }
            out.q_bb[z] = f_bb[z] * self.bb_rated[z];
            out.p_bb += out.q_bb[z];
        }
        out
    }
}
