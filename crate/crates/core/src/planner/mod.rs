//! Makespan-optimal planning by iterative deepening on the horizon.

mod brute;
mod compiled;
mod search;

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use crate::analysis::GroundMission;
use crate::model::Plan;

pub use brute::{brute_force_plan, brute_force_plan_unguarded, OracleError};
use compiled::{Compiled, INF};
use search::Search;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlannerConfig {
    pub max_horizon: usize,
    pub timeout_ms: u64,
    /// Tie-break permutation; 0 keeps declaration and canonical order.
    pub seed: u64,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig {
            max_horizon: 64,
            timeout_ms: 60_000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PlanOutcome {
    Solved(Plan),
    /// No plan with horizon at most this value exists.
    InfeasibleUpTo(usize),
    Timeout(Option<Plan>),
}

fn bound(c: &Compiled, max_horizon: usize) -> usize {
    let mut lb = 0usize;
    for ob in c.goals.iter().chain(&c.visits) {
        let best = ob
            .agents
            .iter()
            .map(|&a| c.dist(a, ob, c.init[a]))
            .min()
            .unwrap_or(INF);
        if best == INF {
            return max_horizon + 1;
        }
        lb = lb.max(best as usize);
    }
    lb
}

/// Admissible lower bound on the makespan: the farthest goal or visit
/// location, each measured from its closest eligible agent.
/// Returns `max_horizon + 1` when some obligation is unreachable.
pub fn lower_bound(gm: &GroundMission, max_horizon: usize) -> usize {
    bound(&Compiled::new(gm), max_horizon)
}

fn to_plan(c: &Compiled, path: &[Vec<u16>]) -> Plan {
    let traj: BTreeMap<String, Vec<_>> = c
        .names
        .iter()
        .enumerate()
        .map(|(a, name)| {
            (
                name.clone(),
                path.iter().map(|p| c.locs[p[a] as usize]).collect(),
            )
        })
        .collect();
    Plan {
        horizon: path.len() - 1,
        traj,
    }
}

/// Shortest plan satisfying every ground constraint.
///
/// An initial configuration that already breaks a capacity, avoid or support
/// rule yields `InfeasibleUpTo(0)`.
pub fn plan(gm: &GroundMission, cfg: &PlannerConfig) -> PlanOutcome {
    let deadline = Instant::now() + Duration::from_millis(cfg.timeout_ms);
    let c = Compiled::new(gm);
    if !c.state_ok(&c.init) {
        return PlanOutcome::InfeasibleUpTo(0);
    }
    let lb = bound(&c, cfg.max_horizon);
    if lb > cfg.max_horizon {
        return PlanOutcome::InfeasibleUpTo(cfg.max_horizon);
    }
    let mut search = Search::new(&c, cfg.seed, deadline);
    for horizon in lb..=cfg.max_horizon {
        if Instant::now() >= deadline {
            return PlanOutcome::Timeout(None);
        }
        match search.run(horizon) {
            Ok(Some(path)) => return PlanOutcome::Solved(to_plan(&c, &path)),
            Ok(None) => {}
            Err(_) => return PlanOutcome::Timeout(None),
        }
    }
    PlanOutcome::InfeasibleUpTo(cfg.max_horizon)
}
