//! Comfort schedule, objective, receding-horizon solver, rule-based
//! baseline and a brute-force reference optimizer.

pub mod comfort;
pub mod objective;
pub mod oracle;
pub mod plan;
pub mod rules;

use serde::{Deserialize, Serialize};

pub use comfort::{tracking_error, tracking_errors, ComfortBand, ComfortSchedule};
pub use objective::{HorizonData, HorizonProblem, ObjectiveBreakdown, ObjectiveWeights, SocUnits};
pub use oracle::oracle_best;
pub use plan::{DecisionPlan, InitialGuess, Layout, VarBounds};
pub use rules::{dispatch, rule_based_step, RoutingMode, RuleConfig};

use crate::optim::{minimize_box, MinimizeOptions};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MpcConfig {
    /// Prediction horizon in hourly blocks.
    pub n_blocks: usize,
    /// Steps of each plan applied before the next solve.
    pub apply_steps: usize,
    pub optimizer: MinimizeOptions,
    pub initial: InitialGuess,
}

impl Default for MpcConfig {
    fn default() -> Self {
        MpcConfig {
            n_blocks: 8,
            apply_steps: 4,
            optimizer: MinimizeOptions::default(),
            initial: InitialGuess::default(),
        }
    }
}

impl MpcConfig {
    pub fn validate(&self) -> Result<()> {
        let block = crate::time::STEPS_PER_HOUR;
        if self.n_blocks == 0 || self.apply_steps == 0 || !block.is_multiple_of(self.apply_steps) {
            return Err(Error::Config("control horizon must divide the hourly block".into()));
        }
        Ok(())
    }
}

/// Outcome of one horizon solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MpcSolution {
    pub plan: DecisionPlan,
    pub objective: f64,
    pub iterations: usize,
    pub evaluations: usize,
}

/// Minimizes the horizon objective from the warm start (or the cold-start
/// guess) and returns the best plan found.
pub fn solve_mpc(problem: &mut HorizonProblem, warm_start: Option<&DecisionPlan>, cfg: &MpcConfig) -> Result<MpcSolution> {
    cfg.validate()?;
    let layout = problem.layout;
    let start = match warm_start {
        Some(p) if p.blocks.len() == layout.n_blocks => p.clone(),
        Some(_) => return Err(Error::Dimension("warm start does not match the horizon".into())),
        None => DecisionPlan::initial(&layout, &cfg.initial),
    };
    let (lo, hi) = problem.bound_vectors();
    let r = minimize_box(problem, &start.to_vec(), &lo, &hi, &cfg.optimizer)?;
    Ok(MpcSolution {
        plan: DecisionPlan::from_vec(&layout, &r.x),
        objective: r.f,
        iterations: r.iterations,
        evaluations: r.evaluations,
    })
}
