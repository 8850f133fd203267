#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;
use std::path::PathBuf;

use ortacplus::analysis::{check_static, Checked, GroundMission};
use ortacplus::model::{Location, Plan};
use ortacplus::parser::parse_mission;
use rand::seq::SliceRandom;
use rand::Rng;

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub fn golden_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name)
}

pub fn fixture(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name)).unwrap()
}

pub const FIXTURES: &[&str] = &[
    "goma.ortac",
    "path.ortac",
    "ontology.ortac",
    "swap.ortac",
    "corridor.ortac",
];

pub fn checked(text: &str) -> Checked {
    let parsed = parse_mission(text).unwrap_or_else(|e| panic!("{:?}\n{}", e, text));
    check_static(&parsed.mission).unwrap_or_else(|e| panic!("{:?}\n{}", e, text))
}

pub fn ground(text: &str) -> GroundMission {
    checked(text).ground
}

fn loc_text(l: Loc) -> String {
    match l {
        Loc::Node(n) => n.to_string(),
        Loc::Edge(u, v) => format!("({}, {})", u, v),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Loc {
    Node(u32),
    Edge(u32, u32),
}

impl Loc {
    pub fn to_location(self) -> Location {
        match self {
            Loc::Node(n) => Location::node(n),
            Loc::Edge(u, v) => Location::edge(u, v),
        }
    }
}

/// Small random road graph, written out as source text.
pub struct RandomGraph {
    pub nodes: u32,
    pub edges: Vec<(u32, u32)>,
    pub capacity: BTreeMap<Loc, u32>,
    pub width: BTreeMap<(u32, u32), i64>,
}

impl RandomGraph {
    pub fn generate(rng: &mut impl Rng, max_nodes: u32, max_edges: usize) -> Self {
        let nodes = rng.gen_range(2..=max_nodes);
        let mut pairs: Vec<(u32, u32)> = (1..=nodes)
            .flat_map(|u| (u + 1..=nodes).map(move |v| (u, v)))
            .collect();
        pairs.shuffle(rng);
        let m = rng.gen_range(1..=max_edges.min(pairs.len()));
        let mut edges: Vec<(u32, u32)> = pairs[..m].to_vec();
        edges.sort();
        let mut capacity = BTreeMap::new();
        for l in Self::locs_of(nodes, &edges) {
            if rng.gen_bool(0.15) {
                capacity.insert(l, 2);
            }
        }
        let mut width = BTreeMap::new();
        for &e in &edges {
            if rng.gen_bool(0.8) {
                width.insert(e, rng.gen_range(4..16));
            }
        }
        RandomGraph {
            nodes,
            edges,
            capacity,
            width,
        }
    }

    fn locs_of(nodes: u32, edges: &[(u32, u32)]) -> Vec<Loc> {
        (1..=nodes)
            .map(Loc::Node)
            .chain(edges.iter().map(|&(u, v)| Loc::Edge(u, v)))
            .collect()
    }

    pub fn locs(&self) -> Vec<Loc> {
        Self::locs_of(self.nodes, &self.edges)
    }

    pub fn capacity(&self, l: Loc) -> u32 {
        self.capacity.get(&l).copied().unwrap_or(1)
    }

    pub fn text(&self) -> String {
        let mut s = format!("graph {{\n  nodes {{ 1..{} }}\n", self.nodes);
        for n in 1..=self.nodes {
            if let Some(c) = self.capacity.get(&Loc::Node(n)) {
                let _ = writeln!(s, "  node {} {{ capacity: {} }}", n, c);
            }
        }
        for &(u, v) in &self.edges {
            let mut props = Vec::new();
            if let Some(c) = self.capacity.get(&Loc::Edge(u, v)) {
                props.push(format!("capacity: {}", c));
            }
            if let Some(w) = self.width.get(&(u, v)) {
                props.push(format!("width: {}", w));
            }
            let _ = writeln!(s, "  edge ({}, {}) {{ {} }}", u, v, props.join(", "));
        }
        s.push_str("}\n");
        s
    }

    pub fn total_capacity(&self) -> usize {
        self.locs().iter().map(|&l| self.capacity(l) as usize).sum()
    }

    /// Random initial locations that respect capacities.
    pub fn place(&self, rng: &mut impl Rng, agents: usize) -> Vec<Loc> {
        assert!(agents <= self.total_capacity());
        let locs = self.locs();
        let mut used: BTreeMap<Loc, u32> = BTreeMap::new();
        let mut out = Vec::new();
        while out.len() < agents {
            let l = *locs.choose(rng).unwrap();
            if used.get(&l).copied().unwrap_or(0) < self.capacity(l) {
                *used.entry(l).or_default() += 1;
                out.push(l);
            }
        }
        out
    }
}

fn subset(rng: &mut impl Rng, names: &[String]) -> Vec<String> {
    loop {
        let s: Vec<String> = names
            .iter()
            .filter(|_| rng.gen_bool(0.5))
            .cloned()
            .collect();
        if !s.is_empty() {
            return s;
        }
    }
}

fn list(items: &[String]) -> String {
    if items.len() == 1 {
        items[0].clone()
    } else {
        format!("[{}]", items.join(", "))
    }
}

/// A planner benchmark instance: at most `max_nodes` nodes, `max_edges`
/// edges, 3 agents and 3 constraints drawn from all seven predicates.
pub fn random_instance(rng: &mut impl Rng, max_nodes: u32, max_edges: usize) -> String {
    let g = RandomGraph::generate(rng, max_nodes, max_edges);
    let k = rng.gen_range(1..=3).min(g.total_capacity());
    let names: Vec<String> = (1..=k).map(|i| format!("a{}", i)).collect();
    let init = g.place(rng, k);
    let mut s = g.text();
    for (n, l) in names.iter().zip(&init) {
        let _ = writeln!(s, "agent {} {{ init: {} }}", n, loc_text(*l));
    }
    s.push_str("constraints {\n");
    let nodes: Vec<u32> = (1..=g.nodes).collect();
    for _ in 0..rng.gen_range(0..=3) {
        let n1 = *nodes.choose(rng).unwrap();
        let n2 = *nodes.choose(rng).unwrap();
        let e = *g.edges.choose(rng).unwrap();
        let e = format!("({}, {})", e.0, e.1);
        let who = list(&subset(rng, &names));
        let line = match rng.gen_range(0..7) {
            0 => format!("node_goal({}, {})", n1, who),
            1 => format!("node_visit({}, {})", n1, who),
            2 => format!("edge_visit({}, {})", e, who),
            3 => format!("node_avoid({}, {})", n1, who),
            4 => format!("edge_avoid({}, {})", e, who),
            5 => format!("node_supported_from({}, {})", n1, n2),
            _ => format!(
                "support({}, {}, {}, {})",
                names.choose(rng).unwrap(),
                n1,
                names.choose(rng).unwrap(),
                n2
            ),
        };
        let _ = writeln!(s, "  {}", line);
    }
    s.push_str("}\n");
    s
}

/// Random trajectories: each agent starts at its initial location and
/// takes random legal steps, with the occasional illegal jump.
pub fn random_plan(rng: &mut impl Rng, gm: &GroundMission, horizon: usize, jump: f64) -> Plan {
    let all: Vec<Location> = gm.graph.locations().collect();
    let mut traj = BTreeMap::new();
    for a in &gm.agents {
        let mut tr = vec![a.init];
        for _ in 0..horizon {
            let here = *tr.last().unwrap();
            let next = if rng.gen_bool(jump) {
                *all.choose(rng).unwrap()
            } else {
                *gm.graph.successors(here).unwrap().choose(rng).unwrap()
            };
            tr.push(next);
        }
        traj.insert(a.name.clone(), tr);
    }
    Plan { horizon, traj }
}

// ---------------------------------------------------------------------------
// Missions with tag and filter selectors, plus a direct evaluator that works
// on the unexpanded constraints.

pub const TAGS: &[&str] = &["UGV", "wheeled", "VBCI", "tracked", "UAV"];
pub const ONTOLOGY: &str =
    "ontology {\n  UGV {\n    wheeled {\n      VBCI\n    }\n    tracked\n  }\n  UAV\n}\n";

fn parent(tag: &str) -> Option<&'static str> {
    match tag {
        "wheeled" | "tracked" => Some("UGV"),
        "VBCI" => Some("wheeled"),
        _ => None,
    }
}

pub fn is_a(tag: &str, query: &str) -> bool {
    let mut t = Some(tag);
    while let Some(x) = t {
        if x == query {
            return true;
        }
        t = parent(x);
    }
    false
}

#[derive(Debug, Clone)]
pub enum Who {
    Names(Vec<String>),
    Tag(&'static str),
}

#[derive(Debug, Clone)]
pub enum Where {
    Nodes(Vec<u32>),
    Edges(Vec<(u32, u32)>),
    /// Edges with `width < k`.
    Narrow(i64),
}

#[derive(Debug, Clone)]
pub enum Gen {
    Goal(Where, Who),
    Visit(Where, Who),
    Avoid(Where, Who),
    SupportedFrom(Where, u32),
    Support(String, u32, String, u32),
}

pub struct RichMission {
    pub graph: RandomGraph,
    pub agents: Vec<(String, Loc, &'static str)>,
    pub constraints: Vec<Gen>,
}

impl RichMission {
    pub fn generate(rng: &mut impl Rng) -> Self {
        let graph = RandomGraph::generate(rng, 7, 9);
        let k = rng.gen_range(1..=4).min(graph.total_capacity());
        let init = graph.place(rng, k);
        let agents: Vec<(String, Loc, &'static str)> = (0..k)
            .map(|i| {
                (
                    format!("u{}", i + 1),
                    init[i],
                    *TAGS[1..].choose(rng).unwrap(),
                )
            })
            .collect();
        let mut m = RichMission {
            graph,
            agents,
            constraints: Vec::new(),
        };
        for _ in 0..rng.gen_range(1..=5) {
            let c = m.random_constraint(rng);
            m.constraints.push(c);
        }
        m
    }

    fn names(&self) -> Vec<String> {
        self.agents.iter().map(|a| a.0.clone()).collect()
    }

    fn random_who(&self, rng: &mut impl Rng) -> Who {
        if rng.gen_bool(0.4) {
            let tag = *TAGS.choose(rng).unwrap();
            if self.agents.iter().any(|a| is_a(a.2, tag)) {
                return Who::Tag(tag);
            }
        }
        Who::Names(subset(rng, &self.names()))
    }

    fn random_nodes(&self, rng: &mut impl Rng) -> Where {
        let mut ns: Vec<u32> = (1..=self.graph.nodes)
            .filter(|_| rng.gen_bool(0.3))
            .collect();
        if ns.is_empty() {
            ns.push(rng.gen_range(1..=self.graph.nodes));
        }
        ns.shuffle(rng);
        Where::Nodes(ns)
    }

    fn random_edges(&self, rng: &mut impl Rng) -> Where {
        if rng.gen_bool(0.3) {
            let k = rng.gen_range(5..14);
            if self.graph.width.values().any(|&w| w < k) {
                return Where::Narrow(k);
            }
        }
        let mut es: Vec<(u32, u32)> = self
            .graph
            .edges
            .iter()
            .copied()
            .filter(|_| rng.gen_bool(0.4))
            .collect();
        if es.is_empty() {
            es.push(*self.graph.edges.choose(rng).unwrap());
        }
        es.shuffle(rng);
        Where::Edges(es)
    }

    fn random_constraint(&self, rng: &mut impl Rng) -> Gen {
        let n = |rng: &mut _| rand::Rng::gen_range(rng, 1..=self.graph.nodes);
        let name = |rng: &mut _| self.names().choose(rng).unwrap().clone();
        match rng.gen_range(0..7) {
            0 => Gen::Goal(self.random_nodes(rng), self.random_who(rng)),
            1 => Gen::Visit(self.random_nodes(rng), self.random_who(rng)),
            2 => Gen::Visit(self.random_edges(rng), self.random_who(rng)),
            3 => Gen::Avoid(self.random_nodes(rng), self.random_who(rng)),
            4 => Gen::Avoid(self.random_edges(rng), self.random_who(rng)),
            5 => Gen::SupportedFrom(self.random_nodes(rng), n(rng)),
            _ => Gen::Support(name(rng), n(rng), name(rng), n(rng)),
        }
    }

    fn who_text(w: &Who, singleton_sugar: bool) -> String {
        match w {
            Who::Names(ns) if singleton_sugar => list(ns),
            Who::Names(ns) => format!("[{}]", ns.join(", ")),
            Who::Tag(t) => format!("\"{}\"", t),
        }
    }

    fn where_text(w: &Where, singleton_sugar: bool) -> String {
        let items: Vec<String> = match w {
            Where::Nodes(ns) => ns.iter().map(|n| n.to_string()).collect(),
            Where::Edges(es) => es.iter().map(|(u, v)| format!("({}, {})", u, v)).collect(),
            Where::Narrow(k) => return format!("\"width < {}\"", k),
        };
        if singleton_sugar {
            list(&items)
        } else {
            format!("[{}]", items.join(", "))
        }
    }

    /// Source text. With `singleton_sugar`, one-element lists are written bare.
    pub fn text(&self, singleton_sugar: bool) -> String {
        let mut s = self.graph.text();
        s.push_str(ONTOLOGY);
        for (n, l, tag) in &self.agents {
            let _ = writeln!(s, "agent {} {{ init: {}, kind: {} }}", n, loc_text(*l), tag);
        }
        s.push_str("constraints {\n");
        for c in &self.constraints {
            let (w, h) = (Self::where_text, Self::who_text);
            let line = match c {
                Gen::Goal(l, a) => {
                    let p = if matches!(l, Where::Nodes(_)) {
                        "node_goal"
                    } else {
                        unreachable!()
                    };
                    format!(
                        "{}({}, {})",
                        p,
                        w(l, singleton_sugar),
                        h(a, singleton_sugar)
                    )
                }
                Gen::Visit(l, a) => {
                    let p = if matches!(l, Where::Nodes(_)) {
                        "node_visit"
                    } else {
                        "edge_visit"
                    };
                    format!(
                        "{}({}, {})",
                        p,
                        w(l, singleton_sugar),
                        h(a, singleton_sugar)
                    )
                }
                Gen::Avoid(l, a) => {
                    let p = if matches!(l, Where::Nodes(_)) {
                        "node_avoid"
                    } else {
                        "edge_avoid"
                    };
                    format!(
                        "{}({}, {})",
                        p,
                        w(l, singleton_sugar),
                        h(a, singleton_sugar)
                    )
                }
                Gen::SupportedFrom(l, from) => {
                    format!("node_supported_from({}, {})", w(l, singleton_sugar), from)
                }
                Gen::Support(u1, n1, u2, n2) => format!("support({}, {}, {}, {})", u1, n1, u2, n2),
            };
            let _ = writeln!(s, "  {}", line);
        }
        s.push_str("}\n");
        s
    }

    fn resolve_who(&self, w: &Who) -> Vec<String> {
        match w {
            Who::Names(ns) => ns.clone(),
            Who::Tag(t) => self
                .agents
                .iter()
                .filter(|a| is_a(a.2, t))
                .map(|a| a.0.clone())
                .collect(),
        }
    }

    fn resolve_where(&self, w: &Where) -> Vec<Location> {
        match w {
            Where::Nodes(ns) => ns.iter().map(|&n| Location::node(n)).collect(),
            Where::Edges(es) => es.iter().map(|&(u, v)| Location::edge(u, v)).collect(),
            Where::Narrow(k) => self
                .graph
                .width
                .iter()
                .filter(|(_, w)| **w < *k)
                .map(|(&(u, v), _)| Location::edge(u, v))
                .collect(),
        }
    }

    /// Whether each constraint holds on `p`, evaluated without expansion.
    pub fn direct_verdicts(&self, p: &Plan) -> Vec<bool> {
        let at = |a: &str, t: usize| p.traj.get(a).and_then(|tr| tr.get(t)).copied();
        let ts = 0..=p.horizon;
        let everyone: Vec<String> = self.names();
        self.constraints
            .iter()
            .map(|c| match c {
                Gen::Goal(l, w) => {
                    let who = self.resolve_who(w);
                    self.resolve_where(l)
                        .iter()
                        .all(|&x| who.iter().any(|a| at(a, p.horizon) == Some(x)))
                }
                Gen::Visit(l, w) => {
                    let who = self.resolve_who(w);
                    self.resolve_where(l)
                        .iter()
                        .all(|&x| who.iter().any(|a| ts.clone().any(|t| at(a, t) == Some(x))))
                }
                Gen::Avoid(l, w) => {
                    let who = self.resolve_who(w);
                    self.resolve_where(l)
                        .iter()
                        .all(|&x| who.iter().all(|a| ts.clone().all(|t| at(a, t) != Some(x))))
                }
                Gen::SupportedFrom(l, from) => {
                    let n2 = Location::node(*from);
                    self.resolve_where(l).iter().all(|&n1| {
                        ts.clone().all(|t| {
                            everyone.iter().all(|a| {
                                at(a, t) != Some(n1)
                                    || everyone.iter().any(|b| b != a && at(b, t) == Some(n2))
                            })
                        })
                    })
                }
                Gen::Support(u1, n1, u2, n2) => ts.clone().all(|t| {
                    at(u1, t) != Some(Location::node(*n1)) || at(u2, t) == Some(Location::node(*n2))
                }),
            })
            .collect()
    }

    pub fn agent_count(&self) -> usize {
        self.agents.len()
    }
}

/// Per source constraint: no violation refers to any of its ground constraints.
pub fn verdicts_from_validator(
    checked: &Checked,
    constraints: usize,
    violations: &[ortacplus::validator::Violation],
) -> Vec<bool> {
    let bad: BTreeSet<usize> = violations
        .iter()
        .filter_map(|v| v.constraint_index)
        .map(|gi| checked.origins[gi])
        .collect();
    (0..constraints).map(|i| !bad.contains(&i)).collect()
}

// ---------------------------------------------------------------------------
// Missions for round-trip tests: every syntactic feature, no semantic checks.

fn random_filter(rng: &mut impl Rng, depth: u32) -> String {
    if depth == 0 || rng.gen_bool(0.4) {
        return match rng.gen_range(0..6) {
            0 => format!("width < {}", rng.gen_range(1..20)),
            1 => format!("width >= {}.5", rng.gen_range(0..20)),
            2 => format!("lanes != {}", rng.gen_range(1..4)),
            3 => "surface == 'paved'".to_string(),
            4 => format!("alt > -{}", rng.gen_range(1..50)),
            _ => TAGS.choose(rng).unwrap().to_string(),
        };
    }
    match rng.gen_range(0..3) {
        0 => format!(
            "({} and {})",
            random_filter(rng, depth - 1),
            random_filter(rng, depth - 1)
        ),
        1 => format!(
            "{} or {}",
            random_filter(rng, depth - 1),
            random_filter(rng, depth - 1)
        ),
        _ => format!("not {}", random_filter(rng, depth - 1)),
    }
}

fn random_value(rng: &mut impl Rng) -> String {
    match rng.gen_range(0..5) {
        0 => rng.gen_range(-20..100).to_string(),
        1 => format!("{}.25", rng.gen_range(0..30)),
        2 => "\"paved \\\"road\\\"\"".to_string(),
        3 => TAGS.choose(rng).unwrap().to_string(),
        _ => "\"dirt\"".to_string(),
    }
}

pub fn random_syntax_mission(rng: &mut impl Rng) -> String {
    let g = RandomGraph::generate(rng, 9, 12);
    let mut s = String::from("graph {\n");
    // nodes as scattered ranges and singletons
    let mut n = 1;
    let mut parts = Vec::new();
    while n <= g.nodes {
        let len = rng.gen_range(1..=3).min(g.nodes - n + 1);
        parts.push(if len == 1 {
            n.to_string()
        } else {
            format!("{}..{}", n, n + len - 1)
        });
        n += len;
    }
    parts.shuffle(rng);
    let _ = writeln!(s, "  nodes {{ {} }}", parts.join(", "));
    for n in 1..=g.nodes {
        if rng.gen_bool(0.3) {
            let _ = writeln!(
                s,
                "  node {} {{ capacity: {}, alt: {} }}",
                n,
                rng.gen_range(1..4),
                random_value(rng)
            );
        }
    }
    for &(u, v) in &g.edges {
        let (a, b) = if rng.gen_bool(0.5) { (u, v) } else { (v, u) };
        let mut props = Vec::new();
        for (k, p) in [("width", 0.7), ("lanes", 0.3), ("surface", 0.3)] {
            if rng.gen_bool(p) {
                props.push(format!("{}: {}", k, random_value(rng)));
            }
        }
        let _ = writeln!(s, "  edge ({}, {}) {{ {} }}", a, b, props.join(", "));
    }
    s.push_str("}\n");
    if rng.gen_bool(0.7) {
        s.push_str(ONTOLOGY);
    }
    let k = rng.gen_range(0..=4).min(g.total_capacity());
    let names: Vec<String> = (1..=k).map(|i| format!("unit_{}", i)).collect();
    for (name, l) in names.iter().zip(g.place(rng, k)) {
        if rng.gen_bool(0.5) {
            let _ = writeln!(
                s,
                "agent {} {{ init: {}, kind: {}, speed: {} }}",
                name,
                loc_text(l),
                TAGS.choose(rng).unwrap(),
                random_value(rng)
            );
        } else {
            let _ = writeln!(s, "agent {} {{ init: {} }}", name, loc_text(l));
        }
    }
    s.push_str("constraints {\n");
    if !names.is_empty() {
        for _ in 0..rng.gen_range(0..6) {
            let n1 = rng.gen_range(1..=g.nodes);
            let (u, v) = *g.edges.choose(rng).unwrap();
            let who = match rng.gen_range(0..3) {
                0 => list(&subset(rng, &names)),
                1 => format!("\"{}\"", TAGS.choose(rng).unwrap()),
                _ => format!("\"{}\"", random_filter(rng, 2)),
            };
            let edges = match rng.gen_range(0..3) {
                0 => format!("({}, {})", v, u),
                1 => format!("\"{}\"", random_filter(rng, 2)),
                _ => format!("[({}, {}), ({}, {})]", u, v, u, v),
            };
            let line = match rng.gen_range(0..7) {
                0 => format!("node_goal([{}, {}], {})", n1, g.nodes, who),
                1 => format!("node_visit({}, {})", n1, who),
                2 => format!("edge_visit({}, {})", edges, who),
                3 => format!("node_avoid(\"{}\", {})", random_filter(rng, 1), who),
                4 => format!("edge_avoid({}, {})", edges, who),
                5 => format!("node_supported_from([{}], {})", n1, g.nodes),
                _ => format!(
                    "support({}, {}, {}, {})",
                    names.choose(rng).unwrap(),
                    n1,
                    names.choose(rng).unwrap(),
                    g.nodes
                ),
            };
            let _ = writeln!(s, "  {}", line);
        }
    }
    s.push_str("}\n");
    s
}

// ---------------------------------------------------------------------------
// Single-point plan mutations with the violation kind each must produce.

use ortacplus::analysis::GroundConstraint;
use ortacplus::validator::ViolationKind;

pub struct Mutation {
    pub expected: ViolationKind,
    pub plan: Plan,
    pub note: String,
}

fn occupants(p: &Plan, t: usize, l: Location, except: &str) -> Vec<String> {
    p.traj
        .iter()
        .filter(|(a, tr)| a.as_str() != except && tr[t] == l)
        .map(|(a, _)| a.clone())
        .collect()
}

fn set(p: &Plan, a: &str, t: usize, l: Location) -> Plan {
    let mut q = p.clone();
    q.traj.get_mut(a).unwrap()[t] = l;
    q
}

/// Tries to build one mutation of the given class; `None` when the chosen
/// agent and timestep give nothing to mutate.
fn try_mutation(
    rng: &mut impl Rng,
    gm: &GroundMission,
    p: &Plan,
    class: usize,
) -> Option<Mutation> {
    let all: Vec<Location> = gm.graph.locations().collect();
    let names: Vec<&String> = p.traj.keys().collect();
    let a = names.choose(rng)?.as_str();
    let tr = &p.traj[a];
    let horizon = p.horizon;
    let mutate = |expected, plan, note: String| {
        Some(Mutation {
            expected,
            plan,
            note,
        })
    };
    match class {
        0 => {
            if horizon == 0 {
                return None;
            }
            let t = rng.gen_range(1..=horizon);
            let succ = gm.graph.successors(tr[t - 1]).unwrap();
            let l = *all
                .iter()
                .filter(|l| !succ.contains(l))
                .collect::<Vec<_>>()
                .choose(rng)?;
            mutate(
                ViolationKind::IllegalMove,
                set(p, a, t, *l),
                format!("{} jumps to {} at {}", a, l, t),
            )
        }
        1 => {
            let t = rng.gen_range(1..=horizon.max(1)).min(horizon);
            let full: Vec<Location> = all
                .iter()
                .copied()
                .filter(|&l| {
                    l != tr[t] && occupants(p, t, l, a).len() as u32 >= gm.graph.capacity(l)
                })
                .collect();
            let l = *full.choose(rng)?;
            mutate(
                ViolationKind::CapacityExceeded,
                set(p, a, t, l),
                format!("{} crowds {} at {}", a, l, t),
            )
        }
        2 => {
            let avoided: Vec<Location> = gm.avoided_by(a).into_iter().collect();
            let l = *avoided.choose(rng)?;
            let t = rng.gen_range(0..=horizon);
            mutate(
                ViolationKind::AvoidViolated,
                set(p, a, t, l),
                format!("{} enters {} at {}", a, l, t),
            )
        }
        3 => {
            let l = *all
                .iter()
                .filter(|&&l| l != tr[0])
                .collect::<Vec<_>>()
                .choose(rng)?;
            mutate(
                ViolationKind::BadInit,
                set(p, a, 0, *l),
                format!("{} starts at {}", a, l),
            )
        }
        4 => {
            let mut q = p.clone();
            if rng.gen_bool(0.5) {
                q.traj.get_mut(a).unwrap().pop();
                if q.traj[a].is_empty() {
                    q.traj.remove(a);
                }
                mutate(
                    ViolationKind::HorizonMismatch,
                    q,
                    format!("{} trajectory truncated", a),
                )
            } else {
                let last = *tr.last().unwrap();
                q.traj.get_mut(a).unwrap().push(last);
                mutate(
                    ViolationKind::HorizonMismatch,
                    q,
                    format!("{} trajectory extended", a),
                )
            }
        }
        5 => {
            // the only agent holding a goal node steps back to where it came from
            if horizon == 0 {
                return None;
            }
            let goals: Vec<(Location, Vec<String>)> = gm
                .ground
                .iter()
                .filter(|g| matches!(g, GroundConstraint::NodeGoal { .. }))
                .map(|g| {
                    let (l, who) = g.target().unwrap();
                    (
                        l,
                        who.iter()
                            .filter(|w| p.loc(w, horizon) == Some(l))
                            .cloned()
                            .collect(),
                    )
                })
                .filter(|(_, holders): &(Location, Vec<String>)| holders.len() == 1)
                .collect();
            let (l, holders) = goals.choose(rng)?;
            let h = &holders[0];
            let prev = p.traj[h][horizon - 1];
            if prev == *l {
                return None;
            }
            mutate(
                ViolationKind::GoalUnsatisfied,
                set(p, h, horizon, prev),
                format!("{} leaves goal {}", h, l),
            )
        }
        _ => {
            // the only supporter leaves its post while someone is covered
            let pairs: Vec<(Location, Location)> = gm
                .ground
                .iter()
                .filter_map(|g| match g {
                    GroundConstraint::NodeSupportedFrom { node, from } => {
                        Some((Location::Node(*node), Location::Node(*from)))
                    }
                    _ => None,
                })
                .collect();
            let (n1, n2) = *pairs.choose(rng)?;
            let t = (0..=horizon)
                .filter(|&t| p.traj.values().any(|tr| tr[t] == n1))
                .collect::<Vec<_>>()
                .choose(rng)
                .copied()?;
            let supporters = occupants(p, t, n2, "");
            if supporters.len() != 1 || p.traj[&supporters[0]][t] == n1 {
                return None;
            }
            let b = &supporters[0];
            let elsewhere = gm
                .graph
                .successors(n2)
                .unwrap()
                .into_iter()
                .find(|&l| l != n2 && l != n1)?;
            mutate(
                ViolationKind::SupportViolated,
                set(p, b, t, elsewhere),
                format!("{} leaves {} at {}", b, n2, t),
            )
        }
    }
}

pub const MUTATION_CLASSES: usize = 7;

/// `n` mutations of a valid plan, cycling through the classes that apply.
pub fn mutations(rng: &mut impl Rng, gm: &GroundMission, p: &Plan, n: usize) -> Vec<Mutation> {
    let mut out = Vec::new();
    let mut misses = 0;
    while out.len() < n && misses < 100 * n {
        let class = rng.gen_range(0..MUTATION_CLASSES);
        match try_mutation(rng, gm, p, class) {
            Some(m) => out.push(m),
            None => misses += 1,
        }
    }
    out
}
