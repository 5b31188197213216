use serde::{Deserialize, Serialize};
use std::fmt;

/// Conditioned zones of the house.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Zone {
    /// Primary bedroom.
    B1,
    /// Secondary bedroom.
    B2,
    /// Living room and kitchen.
    LK,
}

impl Zone {
    pub const ALL: [Zone; 3] = [Zone::B1, Zone::B2, Zone::LK];

    pub fn index(self) -> usize {
        match self {
            Zone::B1 => 0,
            Zone::B2 => 1,
            Zone::LK => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Zone::B1 => "B1",
            Zone::B2 => "B2",
            Zone::LK => "LK",
        }
    }
}

impl fmt::Display for Zone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Vertical façade orientation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Facade {
    N,
    E,
    S,
    W,
}

impl Facade {
    pub const ALL: [Facade; 4] = [Facade::N, Facade::E, Facade::S, Facade::W];
}
