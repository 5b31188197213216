//! Hourly-blocked decision plans.

use serde::{Deserialize, Serialize};

use crate::time::STEPS_PER_HOUR;
use crate::{Error, Result};

/// Control values held constant over one block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockVars {
    pub plr: Vec<f64>,
    pub f_bb: Vec<f64>,
    pub p_b: f64,
    pub f_pv_h: f64,
    pub f_b_h: f64,
}

/// Variable layout of one block in the flat decision vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layout {
    pub n_zones: usize,
    pub n_blocks: usize,
    pub block_len: usize,
}

impl Layout {
    pub fn new(n_zones: usize, n_blocks: usize) -> Self {
        Layout {
            n_zones,
            n_blocks,
            block_len: STEPS_PER_HOUR,
        }
    }

    pub fn per_block(&self) -> usize {
        2 * self.n_zones + 3
    }

    pub fn dim(&self) -> usize {
        self.per_block() * self.n_blocks
    }

    pub fn horizon(&self) -> usize {
        self.block_len * self.n_blocks
    }

    pub fn plr(&self, block: usize, zone: usize) -> usize {
        block * self.per_block() + zone
    }

    pub fn f_bb(&self, block: usize, zone: usize) -> usize {
        block * self.per_block() + self.n_zones + zone
    }

    pub fn p_b(&self, block: usize) -> usize {
        block * self.per_block() + 2 * self.n_zones
    }

    pub fn f_pv_h(&self, block: usize) -> usize {
        self.p_b(block) + 1
    }

    pub fn f_b_h(&self, block: usize) -> usize {
        self.p_b(block) + 2
    }

    pub fn block_of_var(&self, var: usize) -> usize {
        var / self.per_block()
    }

    pub fn block_of_step(&self, k: usize) -> usize {
        k / self.block_len
    }
}

/// What a flat-vector index controls.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Plr(usize),
    Bb(usize),
    Battery,
    PvToHouse,
    BatteryToHouse,
}

impl Layout {
    pub fn kind(&self, var: usize) -> VarKind {
        let j = var % self.per_block();
        let nz = self.n_zones;
        if j < nz {
            VarKind::Plr(j)
        } else if j < 2 * nz {
            VarKind::Bb(j - nz)
        } else if j == 2 * nz {
            VarKind::Battery
        } else if j == 2 * nz + 1 {
            VarKind::PvToHouse
        } else {
            VarKind::BatteryToHouse
        }
    }
}

/// Box bounds of each variable kind.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarBounds {
    pub plr: (f64, f64),
    pub f_bb: (f64, f64),
    pub p_b: (f64, f64),
    pub f_pv_h: (f64, f64),
    pub f_b_h: (f64, f64),
}

impl Default for VarBounds {
    fn default() -> Self {
        VarBounds {
            plr: (0.0, 1.0),
            f_bb: (0.0, 1.0),
            p_b: (-5.0, 5.0),
            f_pv_h: (0.0, 1.0),
            f_b_h: (0.0, 1.0),
        }
    }
}

impl VarBounds {
    fn of(&self, kind: VarKind) -> (f64, f64) {
        match kind {
            VarKind::Plr(_) => self.plr,
            VarKind::Bb(_) => self.f_bb,
            VarKind::Battery => self.p_b,
            VarKind::PvToHouse => self.f_pv_h,
            VarKind::BatteryToHouse => self.f_b_h,
        }
    }

    pub fn vectors(&self, layout: &Layout) -> (Vec<f64>, Vec<f64>) {
        (0..layout.dim()).map(|i| self.of(layout.kind(i))).unzip()
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.plr, self.f_bb, self.f_pv_h, self.f_b_h];
        let unit = all.iter().all(|&(lo, hi)| 0.0 <= lo && lo <= hi && hi <= 1.0);
        if unit && self.p_b.0 <= self.p_b.1 {
            Ok(())
        } else {
            Err(Error::Config("decision bounds must be ordered and fractions within [0, 1]".into()))
        }
    }
}

/// Cold-start values of each variable kind.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialGuess {
    pub plr: f64,
    pub f_bb: f64,
    pub p_b: f64,
    pub f_pv_h: f64,
    pub f_b_h: f64,
}

impl Default for InitialGuess {
    fn default() -> Self {
        InitialGuess {
            plr: 0.2,
            f_bb: 0.1,
            p_b: 0.0,
            f_pv_h: 0.3,
            f_b_h: 0.6,
        }
    }
}

/// A blocked plan over the prediction horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionPlan {
    pub blocks: Vec<BlockVars>,
}

impl DecisionPlan {
    pub fn from_vec(layout: &Layout, x: &[f64]) -> Self {
        let blocks = (0..layout.n_blocks)
            .map(|b| BlockVars {
                plr: (0..layout.n_zones).map(|z| x[layout.plr(b, z)]).collect(),
                f_bb: (0..layout.n_zones).map(|z| x[layout.f_bb(b, z)]).collect(),
                p_b: x[layout.p_b(b)],
                f_pv_h: x[layout.f_pv_h(b)],
                f_b_h: x[layout.f_b_h(b)],
            })
            .collect();
        DecisionPlan { blocks }
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.blocks
            .iter()
            .flat_map(|b| {
                b.plr
                    .iter()
                    .chain(&b.f_bb)
                    .copied()
                    .chain([b.p_b, b.f_pv_h, b.f_b_h])
            })
            .collect()
    }

    pub fn initial(layout: &Layout, guess: &InitialGuess) -> Self {
        DecisionPlan {
            blocks: vec![
                BlockVars {
                    plr: vec![guess.plr; layout.n_zones],
                    f_bb: vec![guess.f_bb; layout.n_zones],
                    p_b: guess.p_b,
                    f_pv_h: guess.f_pv_h,
                    f_b_h: guess.f_b_h,
                };
                layout.n_blocks
            ],
        }
    }

    /// Per-step trajectory: entry `k` holds the block active at step `k`.
    pub fn expand(&self, block_len: usize) -> Vec<&BlockVars> {
        self.blocks
            .iter()
            .flat_map(|b| std::iter::repeat_n(b, block_len))
            .collect()
    }

    /// Plan for a solve `steps` later: each new block averages the old
    /// per-step values it now covers, holding the last block.
    pub fn shifted(&self, layout: &Layout, steps: usize) -> Self {
        let old = self.to_vec();
        let pb = layout.per_block();
        let n = layout.n_blocks;
        let l = layout.block_len;
        let mut x = vec![0.0; old.len()];
        for b in 0..n {
            for k in 0..l {
                let src = ((b * l + k + steps) / l).min(n - 1);
                for j in 0..pb {
                    x[b * pb + j] += old[src * pb + j] / l as f64;
                }
            }
        }
        DecisionPlan::from_vec(layout, &x)
    }

    /// Projects every value into the box.
    pub fn clamped(&self, layout: &Layout, bounds: &VarBounds) -> Self {
        let (lo, hi) = bounds.vectors(layout);
        let x: Vec<f64> = self
            .to_vec()
            .iter()
            .enumerate()
            .map(|(i, v)| v.clamp(lo[i], hi[i]))
            .collect();
        DecisionPlan::from_vec(layout, &x)
    }
}
