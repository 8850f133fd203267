//! PDDL3 export.
//!
//! Waiting is not an action here, so a PDDL plan length counts moves only.
//! The export is meant for satisficing planners; it does not preserve the
//! native makespan.

use std::collections::BTreeSet;
use std::fmt::Write;

use crate::analysis::{GroundConstraint, GroundMission};
use crate::model::Location;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PddlPair {
    pub domain_text: String,
    pub problem_text: String,
}

const DOMAIN: &str = "\
(define (domain ortacplus)
  (:requirements :strips :typing :equality :numeric-fluents :constraints :universal-preconditions :existential-preconditions)
  (:types
    agent location - object
    node edge - location
  )
  (:predicates
    (at ?a - agent ?l - location)
    (adjacent ?l1 ?l2 - location)
  )
  (:functions
    (occupancy ?l - location)
    (capacity ?l - location)
  )
  (:action move
    :parameters (?a - agent ?from ?to - location)
    :precondition (and (at ?a ?from) (adjacent ?from ?to) (< (occupancy ?to) (capacity ?to)))
    :effect (and (not (at ?a ?from)) (at ?a ?to) (decrease (occupancy ?from) 1) (increase (occupancy ?to) 1))
  )
)
";

const RESERVED: &[&str] = &[
    "agent", "location", "object", "node", "edge", "either", "and", "or", "not", "at", "adjacent",
    "exists", "forall", "imply", "always", "sometime",
];

/// The domain is the same for every mission.
pub fn emit_domain(_gm: &GroundMission) -> String {
    DOMAIN.to_string()
}

pub fn location_name(l: Location) -> String {
    match l {
        Location::Node(n) => format!("n{}", n),
        Location::Edge(e) => {
            let (u, v) = e.endpoints();
            format!("e{}-{}", u, v)
        }
    }
}

fn sanitize(name: &str) -> String {
    let mut s: String = name
        .chars()
        .map(|c| {
            let c = c.to_ascii_lowercase();
            if c.is_ascii_lowercase() || c.is_ascii_digit() || c == '-' {
                c
            } else {
                '-'
            }
        })
        .collect();
    if !s.starts_with(|c: char| c.is_ascii_lowercase()) {
        s.insert_str(0, "a-");
    }
    s
}

/// PDDL identifiers for the agents, in declaration order, and the header
/// lines recording every rename.
fn agent_names(gm: &GroundMission) -> (Vec<String>, Vec<String>) {
    let mut taken: BTreeSet<String> = gm.graph.locations().map(location_name).collect();
    taken.extend(RESERVED.iter().map(|s| s.to_string()));
    let mut names = Vec::new();
    let mut header = Vec::new();
    for a in &gm.agents {
        let base = sanitize(&a.name);
        let mut candidate = base.clone();
        let mut k = 2;
        while taken.contains(&candidate) {
            candidate = format!("{}-{}", base, k);
            k += 1;
        }
        taken.insert(candidate.clone());
        if candidate != a.name {
            header.push(format!("; agent {} -> {}", a.name, candidate));
        }
        names.push(candidate);
    }
    (names, header)
}

pub fn emit_problem(gm: &GroundMission) -> String {
    let (names, header) = agent_names(gm);
    let pname = |agent: &str| names[gm.agent_index(agent).expect("resolved agent")].clone();
    let mut out = String::new();
    for h in &header {
        let _ = writeln!(out, "{}", h);
    }
    out.push_str("(define (problem mission)\n  (:domain ortacplus)\n  (:objects\n");
    if !names.is_empty() {
        let _ = writeln!(out, "    {} - agent", names.join(" "));
    }
    let nodes: Vec<String> = gm
        .graph
        .nodes()
        .map(|n| location_name(Location::Node(n)))
        .collect();
    if !nodes.is_empty() {
        let _ = writeln!(out, "    {} - node", nodes.join(" "));
    }
    let edges: Vec<String> = gm
        .graph
        .edges()
        .map(|e| location_name(Location::Edge(e)))
        .collect();
    if !edges.is_empty() {
        let _ = writeln!(out, "    {} - edge", edges.join(" "));
    }
    out.push_str("  )\n  (:init\n");
    for (a, name) in gm.agents.iter().zip(&names) {
        let _ = writeln!(out, "    (at {} {})", name, location_name(a.init));
    }
    for l in gm.graph.locations() {
        for s in gm.graph.successors(l).expect("declared location") {
            if s != l {
                let _ = writeln!(
                    out,
                    "    (adjacent {} {})",
                    location_name(l),
                    location_name(s)
                );
            }
        }
    }
    for l in gm.graph.locations() {
        let k = gm.agents.iter().filter(|a| a.init == l).count();
        let _ = writeln!(out, "    (= (occupancy {}) {})", location_name(l), k);
    }
    for l in gm.graph.locations() {
        let _ = writeln!(
            out,
            "    (= (capacity {}) {})",
            location_name(l),
            gm.graph.capacity(l)
        );
    }
    out.push_str("  )\n");

    let mut goals = Vec::new();
    let mut constraints = Vec::new();
    for g in &gm.ground {
        match g {
            GroundConstraint::NodeGoal { node, agents } => {
                let alts: Vec<String> =
                    agents.iter().map(|a| format!("(= ?a {})", pname(a))).collect();
                goals.push(format!(
                    "(exists (?a - agent) (and (or {}) (at ?a {})))",
                    alts.join(" "),
                    location_name(Location::Node(*node))
                ));
            }
            GroundConstraint::NodeVisit { agents, .. } | GroundConstraint::EdgeVisit { agents, .. } => {
                let (l, _) = g.target().expect("visit target");
                let alts: Vec<String> = agents
                    .iter()
                    .map(|a| format!("(at {} {})", pname(a), location_name(l)))
                    .collect();
                constraints.push(format!("(sometime (or {}))", alts.join(" ")));
            }
            GroundConstraint::NodeAvoid { agents, .. } | GroundConstraint::EdgeAvoid { agents, .. } => {
                let (l, _) = g.target().expect("avoid target");
                let nots: Vec<String> = agents
                    .iter()
                    .map(|a| format!("(not (at {} {}))", pname(a), location_name(l)))
                    .collect();
                constraints.push(format!("(always (and {}))", nots.join(" ")));
            }
            GroundConstraint::NodeSupportedFrom { node, from } => constraints.push(format!(
                "(always (forall (?a - agent) (imply (at ?a {}) (exists (?b - agent) (and (not (= ?b ?a)) (at ?b {}))))))",
                location_name(Location::Node(*node)),
                location_name(Location::Node(*from))
            )),
            GroundConstraint::Support {
                unit1,
                node1,
                unit2,
                node2,
            } => constraints.push(format!(
                "(always (imply (at {} {}) (at {} {})))",
                pname(unit1),
                location_name(Location::Node(*node1)),
                pname(unit2),
                location_name(Location::Node(*node2))
            )),
        }
    }
    if goals.is_empty() {
        out.push_str("  (:goal (and ))\n");
    } else {
        out.push_str("  (:goal (and\n");
        for g in &goals {
            let _ = writeln!(out, "    {}", g);
        }
        out.push_str("  ))\n");
    }
    if !constraints.is_empty() {
        out.push_str("  (:constraints (and\n");
        for c in &constraints {
            let _ = writeln!(out, "    {}", c);
        }
        out.push_str("  ))\n");
    }
    out.push_str(")\n");
    out
}

pub fn emit(gm: &GroundMission) -> PddlPair {
    PddlPair {
        domain_text: emit_domain(gm),
        problem_text: emit_problem(gm),
    }
}

/// True if parentheses balance, ignoring `;` comments.
pub fn balanced(text: &str) -> bool {
    let mut depth: i64 = 0;
    for line in text.lines() {
        for c in line.split(';').next().unwrap_or("").chars() {
            match c {
                '(' => depth += 1,
                ')' => {
                    depth -= 1;
                    if depth < 0 {
                        return false;
                    }
                }
                _ => {}
            }
        }
    }
    depth == 0
}
