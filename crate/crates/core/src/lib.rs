//! Centralized model-predictive comfort and energy management for a
//! three-zone house heated by a multi-split heat pump and electric
//! baseboards, with rooftop PV, a home battery and a two-way grid connection.
//!
//! The crate contains the physical plant (an RC thermal network), the
//! identified linear prediction models used by the controller, the heating,
//! PV, battery, routing and tariff models, the receding-horizon controller
//! with its rule-based baseline, and a closed-loop scenario runner.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod building;
pub mod control;
pub mod der;
pub mod error;
pub mod heating;
pub mod loads;
pub mod optim;
pub mod powerflow;
pub mod sim;
pub mod tariff;
pub mod time;
pub mod weather;
pub mod zone;

pub use error::{Error, Result};
