//! Gradient-descent driver and the two applications built on it: planning
//! with a tunable time window and mining a time interval from data.

pub mod descent;
pub mod grid;
pub mod mining;
pub mod planning;

pub use descent::{gradient_descent, logit, sorted_interval, DescentConfig};
pub use grid::{grid_eval, linspace};
pub use mining::{generate_dataset, mine_interval, mining_objective, DatasetGen, MiningConfig, MiningResult};
pub use planning::{plan_trajectory, planning_objective, rollout_single_integrator, PlanResult, PlannerConfig, Region};
