//! Exhaustive breadth-first search over joint states, for cross-checking.

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use super::PlanOutcome;
use crate::analysis::{GroundConstraint, GroundMission};
use crate::model::{successors, Location, Plan};

pub const MAX_LOCATIONS: usize = 12;
pub const MAX_AGENTS: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("instance too large for exhaustive search: {locations} locations, {agents} agents (limit {MAX_LOCATIONS} and {MAX_AGENTS})")]
    InstanceTooLarge { locations: usize, agents: usize },
}

/// Like [`brute_force_plan_unguarded`], but refuses instances with more than
/// 12 locations or 3 agents.
pub fn brute_force_plan(
    gm: &GroundMission,
    max_horizon: usize,
) -> Result<PlanOutcome, OracleError> {
    let locations = gm.graph.node_count() + gm.graph.edge_count();
    let agents = gm.agents.len();
    if locations > MAX_LOCATIONS || agents > MAX_AGENTS {
        return Err(OracleError::InstanceTooLarge { locations, agents });
    }
    Ok(brute_force_plan_unguarded(gm, max_horizon))
}

/// Two agents may not trade places in one step; they would meet on the road.
fn no_swap(from: &[Location], to: &[Location]) -> bool {
    for i in 0..from.len() {
        for j in i + 1..from.len() {
            if from[i] != to[i] && from[i] == to[j] && from[j] == to[i] {
                return false;
            }
        }
    }
    true
}

type State = (Vec<Location>, Vec<bool>);

struct Rules<'g> {
    gm: &'g GroundMission,
    names: Vec<&'g str>,
}

impl Rules<'_> {
    fn at(&self, s: &[Location], name: &str) -> Location {
        s[self
            .names
            .iter()
            .position(|n| *n == name)
            .expect("declared agent")]
    }

    fn legal(&self, s: &[Location]) -> bool {
        let mut count: BTreeMap<Location, u32> = BTreeMap::new();
        for l in s {
            *count.entry(*l).or_default() += 1;
        }
        if count.iter().any(|(l, n)| *n > self.gm.graph.capacity(*l)) {
            return false;
        }
        self.gm.ground.iter().all(|g| match g {
            GroundConstraint::NodeAvoid { .. } | GroundConstraint::EdgeAvoid { .. } => {
                let (l, agents) = g.target().expect("avoid target");
                agents.iter().all(|a| self.at(s, a) != l)
            }
            GroundConstraint::NodeSupportedFrom { node, from } => {
                let (n1, n2) = (Location::Node(*node), Location::Node(*from));
                (0..s.len()).all(|i| s[i] != n1 || (0..s.len()).any(|j| j != i && s[j] == n2))
            }
            GroundConstraint::Support {
                unit1,
                node1,
                unit2,
                node2,
            } => {
                self.at(s, unit1) != Location::Node(*node1)
                    || self.at(s, unit2) == Location::Node(*node2)
            }
            _ => true,
        })
    }

    fn visits(&self) -> Vec<(Location, &[String])> {
        self.gm
            .ground
            .iter()
            .filter(|g| {
                matches!(
                    g,
                    GroundConstraint::NodeVisit { .. } | GroundConstraint::EdgeVisit { .. }
                )
            })
            .map(|g| g.target().expect("visit target"))
            .collect()
    }

    fn mark(&self, s: &[Location], done: &[bool]) -> Vec<bool> {
        self.visits()
            .iter()
            .zip(done)
            .map(|((l, agents), &d)| d || agents.iter().any(|a| self.at(s, a) == *l))
            .collect()
    }

    fn finished(&self, s: &State) -> bool {
        s.1.iter().all(|&d| d)
            && self.gm.ground.iter().all(|g| match g {
                GroundConstraint::NodeGoal { node, agents } => agents
                    .iter()
                    .any(|a| self.at(&s.0, a) == Location::Node(*node)),
                _ => true,
            })
    }
}

/// Minimal-horizon plan by layered search over (positions, visits done).
///
/// A joint state first reached at step `t` stays reachable at every later
/// step by waiting, so each state is expanded once.
pub fn brute_force_plan_unguarded(gm: &GroundMission, max_horizon: usize) -> PlanOutcome {
    let rules = Rules {
        gm,
        names: gm.agents.iter().map(|a| a.name.as_str()).collect(),
    };
    let init: Vec<Location> = gm.agents.iter().map(|a| a.init).collect();
    if !rules.legal(&init) {
        return PlanOutcome::InfeasibleUpTo(0);
    }
    let start: State = (
        init.clone(),
        rules.mark(&init, &vec![false; rules.visits().len()]),
    );
    let mut parent: HashMap<State, Option<State>> = HashMap::new();
    parent.insert(start.clone(), None);
    let mut layer = vec![start];

    for t in 0..=max_horizon {
        if let Some(done) = layer.iter().find(|s| rules.finished(s)) {
            let mut states = vec![done.clone()];
            while let Some(Some(p)) = parent.get(states.last().expect("non-empty")) {
                states.push(p.clone());
            }
            states.reverse();
            let traj = gm
                .agents
                .iter()
                .enumerate()
                .map(|(i, a)| (a.name.clone(), states.iter().map(|s| s.0[i]).collect()))
                .collect();
            return PlanOutcome::Solved(Plan { horizon: t, traj });
        }
        if t == max_horizon {
            break;
        }
        let mut next_layer = Vec::new();
        for s in &layer {
            let options: Vec<Vec<Location>> =
                s.0.iter()
                    .map(|&l| successors(l, &gm.graph).expect("declared location"))
                    .collect();
            let mut choice = vec![0usize; options.len()];
            loop {
                let joint: Vec<Location> =
                    choice.iter().zip(&options).map(|(&i, o)| o[i]).collect();
                if no_swap(&s.0, &joint) && rules.legal(&joint) {
                    let done = rules.mark(&joint, &s.1);
                    let ns = (joint, done);
                    if !parent.contains_key(&ns) {
                        parent.insert(ns.clone(), Some(s.clone()));
                        next_layer.push(ns);
                    }
                }
                // odometer increment over the cartesian product
                let mut k = 0;
                while k < choice.len() {
                    choice[k] += 1;
                    if choice[k] < options[k].len() {
                        break;
                    }
                    choice[k] = 0;
                    k += 1;
                }
                if k == choice.len() {
                    break;
                }
            }
        }
        layer = next_layer;
    }
    PlanOutcome::InfeasibleUpTo(max_horizon)
}
