//! Checks a plan against ground constraints and movement rules.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Serialize, Serializer};

use crate::analysis::{GroundConstraint, GroundMission};
use crate::model::{Location, Plan};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum ViolationKind {
    BadInit,
    IllegalMove,
    CapacityExceeded,
    GoalUnsatisfied,
    VisitUnsatisfied,
    AvoidViolated,
    SupportViolated,
    HorizonMismatch,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

fn ser_location<S: Serializer>(loc: &Option<Location>, s: S) -> Result<S::Ok, S::Error> {
    match loc {
        Some(l) => s.serialize_some(&l.to_string()),
        None => s.serialize_none(),
    }
}

/// One broken rule. Serializes with keys in field order; locations use the
/// plan-file encoding (`n:9`, `e:8-9`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub agent: Option<String>,
    #[serde(serialize_with = "ser_location")]
    pub location: Option<Location>,
    pub timestep: Option<usize>,
    pub constraint_index: Option<usize>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind)?;
        if let Some(t) = self.timestep {
            write!(f, " t={}", t)?;
        }
        if let Some(a) = &self.agent {
            write!(f, " agent={}", a)?;
        }
        if let Some(l) = &self.location {
            write!(f, " at {}", l)?;
        }
        write!(f, ": {}", self.message)
    }
}

struct Collector<'g> {
    gm: &'g GroundMission,
    out: Vec<Violation>,
}

impl Collector<'_> {
    fn push(
        &mut self,
        kind: ViolationKind,
        agent: Option<&str>,
        location: Option<Location>,
        timestep: Option<usize>,
        constraint_index: Option<usize>,
        message: String,
    ) {
        self.out.push(Violation {
            kind,
            agent: agent.map(str::to_string),
            location,
            timestep,
            constraint_index,
            message,
        });
    }

    fn finish(mut self) -> Vec<Violation> {
        let order: BTreeMap<&str, usize> = self
            .gm
            .agents
            .iter()
            .enumerate()
            .map(|(i, a)| (a.name.as_str(), i))
            .collect();
        let agent_rank = |a: &Option<String>| match a {
            Some(name) => (
                0,
                order.get(name.as_str()).copied().unwrap_or(usize::MAX),
                name.clone(),
            ),
            None => (1, 0, String::new()),
        };
        // missing timesteps sort last
        self.out.sort_by(|x, y| {
            let tx = (x.timestep.is_none(), x.timestep);
            let ty = (y.timestep.is_none(), y.timestep);
            tx.cmp(&ty)
                .then_with(|| agent_rank(&x.agent).cmp(&agent_rank(&y.agent)))
                .then_with(|| x.kind.cmp(&y.kind))
                .then_with(|| x.constraint_index.cmp(&y.constraint_index))
                .then_with(|| x.location.cmp(&y.location))
                .then_with(|| x.message.cmp(&y.message))
        });
        self.out.dedup();
        self.out
    }
}

/// Every violation of `p` against `gm`, in canonical order.
///
/// Malformed plans (missing agents, wrong lengths) are reported as
/// violations; the checks that can still run on the remaining data do run.
pub fn validate(p: &Plan, gm: &GroundMission) -> Vec<Violation> {
    use ViolationKind::*;
    let mut c = Collector {
        gm,
        out: Vec::new(),
    };
    let g = &gm.graph;
    let horizon = p.horizon;
    let expected_len = horizon + 1;

    for a in &gm.agents {
        match p.traj.get(&a.name) {
            None => c.push(
                HorizonMismatch,
                Some(&a.name),
                None,
                None,
                None,
                format!("no trajectory for agent `{}`", a.name),
            ),
            Some(tr) if tr.len() != expected_len => c.push(
                HorizonMismatch,
                Some(&a.name),
                None,
                None,
                None,
                format!(
                    "trajectory has {} entries but horizon {} needs {}",
                    tr.len(),
                    horizon,
                    expected_len
                ),
            ),
            Some(_) => {}
        }
    }
    for name in p.traj.keys() {
        if gm.agent_index(name).is_none() {
            c.push(
                HorizonMismatch,
                Some(name),
                None,
                None,
                None,
                format!("trajectory for undeclared agent `{}`", name),
            );
        }
    }

    // Positions per agent, truncated to the horizon.
    let trajs: Vec<(&str, &[Location])> = gm
        .agents
        .iter()
        .filter_map(|a| {
            p.traj
                .get(&a.name)
                .map(|tr| (a.name.as_str(), &tr[..tr.len().min(expected_len)]))
        })
        .collect();
    let loc = |name: &str, t: usize| -> Option<Location> {
        trajs
            .iter()
            .find(|(n, _)| *n == name)
            .and_then(|(_, tr)| tr.get(t).copied())
    };

    for a in &gm.agents {
        let Some(tr) = trajs.iter().find(|(n, _)| *n == a.name).map(|(_, tr)| *tr) else {
            continue;
        };
        if let Some(&first) = tr.first() {
            if first != a.init {
                c.push(
                    BadInit,
                    Some(&a.name),
                    Some(first),
                    Some(0),
                    None,
                    format!("starts at {} but its initial location is {}", first, a.init),
                );
            } else if !g.contains(first) {
                c.push(
                    BadInit,
                    Some(&a.name),
                    Some(first),
                    Some(0),
                    None,
                    format!("initial location {} is not in the graph", first),
                );
            }
        }
        for t in 1..tr.len() {
            let (prev, next) = (tr[t - 1], tr[t]);
            if !g.contains(next) {
                c.push(
                    IllegalMove,
                    Some(&a.name),
                    Some(next),
                    Some(t),
                    None,
                    format!("{} is not in the graph", next),
                );
                continue;
            }
            let legal = g
                .successors(prev)
                .map(|s| s.contains(&next))
                .unwrap_or(false);
            // a step out of an undeclared location was already reported
            if !legal && g.contains(prev) {
                c.push(
                    IllegalMove,
                    Some(&a.name),
                    Some(next),
                    Some(t),
                    None,
                    format!("cannot move from {} to {} in one step", prev, next),
                );
            }
        }
    }

    // Agents may not trade places in one step.
    for (i, (a, ta)) in trajs.iter().enumerate() {
        for (b, tb) in &trajs[i + 1..] {
            for t in 1..ta.len().min(tb.len()) {
                if ta[t] != ta[t - 1] && ta[t] == tb[t - 1] && tb[t] == ta[t - 1] {
                    for (who, other) in [(a, b), (b, a)] {
                        let at = if who == a { ta[t] } else { tb[t] };
                        c.push(
                            IllegalMove,
                            Some(who),
                            Some(at),
                            Some(t),
                            None,
                            format!(
                                "{} and {} swap places between {} and {}",
                                who,
                                other,
                                ta[t - 1],
                                ta[t]
                            ),
                        );
                    }
                }
            }
        }
    }

    for t in 0..=horizon {
        let mut count: BTreeMap<Location, usize> = BTreeMap::new();
        for (_, tr) in &trajs {
            if let Some(&l) = tr.get(t) {
                *count.entry(l).or_default() += 1;
            }
        }
        for (l, n) in count {
            if !g.contains(l) {
                continue;
            }
            let cap = g.capacity(l) as usize;
            if n > cap {
                c.push(
                    CapacityExceeded,
                    None,
                    Some(l),
                    Some(t),
                    None,
                    format!("{} agents at {} with capacity {}", n, l, cap),
                );
            }
        }
    }

    for (ci, gc) in gm.ground.iter().enumerate() {
        match gc {
            GroundConstraint::NodeGoal { node, agents } => {
                let l = Location::Node(*node);
                if !agents.iter().any(|a| loc(a, horizon) == Some(l)) {
                    c.push(
                        GoalUnsatisfied,
                        None,
                        Some(l),
                        Some(horizon),
                        Some(ci),
                        format!(
                            "none of [{}] is at {} at the final timestep",
                            agents.join(", "),
                            l
                        ),
                    );
                }
            }
            GroundConstraint::NodeVisit { agents, .. }
            | GroundConstraint::EdgeVisit { agents, .. } => {
                let (l, _) = gc.target().expect("visit has a target");
                let seen = agents
                    .iter()
                    .any(|a| (0..=horizon).any(|t| loc(a, t) == Some(l)));
                if !seen {
                    c.push(
                        VisitUnsatisfied,
                        None,
                        Some(l),
                        None,
                        Some(ci),
                        format!("none of [{}] ever visits {}", agents.join(", "), l),
                    );
                }
            }
            GroundConstraint::NodeAvoid { agents, .. }
            | GroundConstraint::EdgeAvoid { agents, .. } => {
                let (l, _) = gc.target().expect("avoid has a target");
                for a in agents {
                    for t in 0..=horizon {
                        if loc(a, t) == Some(l) {
                            c.push(
                                AvoidViolated,
                                Some(a),
                                Some(l),
                                Some(t),
                                Some(ci),
                                format!("{} must avoid {}", a, l),
                            );
                        }
                    }
                }
            }
            GroundConstraint::NodeSupportedFrom { node, from } => {
                let (n1, n2) = (Location::Node(*node), Location::Node(*from));
                for t in 0..=horizon {
                    for (a, _) in &trajs {
                        if loc(a, t) != Some(n1) {
                            continue;
                        }
                        let supported = trajs.iter().any(|(b, _)| b != a && loc(b, t) == Some(n2));
                        if !supported {
                            c.push(
                                SupportViolated,
                                Some(a),
                                Some(n1),
                                Some(t),
                                Some(ci),
                                format!("{} is at {} with no other agent at {}", a, n1, n2),
                            );
                        }
                    }
                }
            }
            GroundConstraint::Support {
                unit1,
                node1,
                unit2,
                node2,
            } => {
                let (n1, n2) = (Location::Node(*node1), Location::Node(*node2));
                for t in 0..=horizon {
                    if loc(unit1, t) == Some(n1) && loc(unit2, t) != Some(n2) {
                        c.push(
                            SupportViolated,
                            Some(unit1),
                            Some(n1),
                            Some(t),
                            Some(ci),
                            format!("{} is at {} but {} is not at {}", unit1, n1, unit2, n2),
                        );
                    }
                }
            }
        }
    }

    c.finish()
}

/// Violations as a JSON array.
pub fn violations_to_json(v: &[Violation]) -> String {
    serde_json::to_string_pretty(v).expect("violations serialize")
}
