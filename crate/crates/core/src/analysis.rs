//! Selector resolution, list expansion and static checks.
//!
//! A constraint whose first argument names several locations stands for one
//! constraint per location; the agent argument stays a set. After this pass
//! every constraint mentions concrete locations and a non-empty list of agents.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use crate::filter::FilterError;
use crate::model::{
    matches, Agent, AttrValue, Constraint, EdgeId, Graph, Location, LocationKind, Mission, NodeId,
    Ontology, Selector,
};
use crate::parser::Severity;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroundConstraint {
    NodeGoal {
        node: NodeId,
        agents: Vec<String>,
    },
    NodeVisit {
        node: NodeId,
        agents: Vec<String>,
    },
    EdgeVisit {
        edge: EdgeId,
        agents: Vec<String>,
    },
    NodeAvoid {
        node: NodeId,
        agents: Vec<String>,
    },
    EdgeAvoid {
        edge: EdgeId,
        agents: Vec<String>,
    },
    NodeSupportedFrom {
        node: NodeId,
        from: NodeId,
    },
    Support {
        unit1: String,
        node1: NodeId,
        unit2: String,
        node2: NodeId,
    },
}

impl GroundConstraint {
    pub fn predicate_name(&self) -> &'static str {
        match self {
            GroundConstraint::NodeGoal { .. } => "node_goal",
            GroundConstraint::NodeVisit { .. } => "node_visit",
            GroundConstraint::EdgeVisit { .. } => "edge_visit",
            GroundConstraint::NodeAvoid { .. } => "node_avoid",
            GroundConstraint::EdgeAvoid { .. } => "edge_avoid",
            GroundConstraint::NodeSupportedFrom { .. } => "node_supported_from",
            GroundConstraint::Support { .. } => "support",
        }
    }

    /// The location a goal/visit/avoid constraint is about, and its agent set.
    pub fn target(&self) -> Option<(Location, &[String])> {
        match self {
            GroundConstraint::NodeGoal { node, agents }
            | GroundConstraint::NodeVisit { node, agents }
            | GroundConstraint::NodeAvoid { node, agents } => Some((Location::Node(*node), agents)),
            GroundConstraint::EdgeVisit { edge, agents }
            | GroundConstraint::EdgeAvoid { edge, agents } => Some((Location::Edge(*edge), agents)),
            _ => None,
        }
    }

    fn to_constraint(&self) -> Constraint {
        let agents = |a: &[String]| Selector::Agents(a.to_vec());
        match self {
            GroundConstraint::NodeGoal { node, agents: a } => Constraint::NodeGoal {
                nodes: Selector::Nodes(vec![*node]),
                agents: agents(a),
            },
            GroundConstraint::NodeVisit { node, agents: a } => Constraint::NodeVisit {
                nodes: Selector::Nodes(vec![*node]),
                agents: agents(a),
            },
            GroundConstraint::NodeAvoid { node, agents: a } => Constraint::NodeAvoid {
                nodes: Selector::Nodes(vec![*node]),
                agents: agents(a),
            },
            GroundConstraint::EdgeVisit { edge, agents: a } => Constraint::EdgeVisit {
                edges: Selector::Edges(vec![*edge]),
                agents: agents(a),
            },
            GroundConstraint::EdgeAvoid { edge, agents: a } => Constraint::EdgeAvoid {
                edges: Selector::Edges(vec![*edge]),
                agents: agents(a),
            },
            GroundConstraint::NodeSupportedFrom { node, from } => Constraint::NodeSupportedFrom {
                nodes: Selector::Nodes(vec![*node]),
                from: *from,
            },
            GroundConstraint::Support {
                unit1,
                node1,
                unit2,
                node2,
            } => Constraint::Support {
                unit1: unit1.clone(),
                node1: *node1,
                unit2: unit2.clone(),
                node2: *node2,
            },
        }
    }
}

/// Canonical one-line form, e.g. `node_goal(11, [c1, c2])`.
impl fmt::Display for GroundConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = self.predicate_name();
        match self {
            GroundConstraint::NodeSupportedFrom { node, from } => {
                write!(f, "{}({}, {})", name, node, from)
            }
            GroundConstraint::Support {
                unit1,
                node1,
                unit2,
                node2,
            } => write!(f, "{}({}, {}, {}, {})", name, unit1, node1, unit2, node2),
            _ => {
                let (loc, agents) = self.target().expect("located constraint");
                write!(
                    f,
                    "{}({}, [{}])",
                    name,
                    loc.source_form(),
                    agents.join(", ")
                )
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundMission {
    pub graph: Graph,
    pub agents: Vec<Agent>,
    pub ground: Vec<GroundConstraint>,
}

impl GroundMission {
    pub fn agent_index(&self, name: &str) -> Option<usize> {
        self.agents.iter().position(|a| a.name == name)
    }

    /// An equivalent mission whose constraints are already explicit.
    pub fn to_mission(&self) -> Mission {
        Mission {
            graph: self.graph.clone(),
            ontology: Ontology::new(),
            agents: self.agents.clone(),
            constraints: self
                .ground
                .iter()
                .map(GroundConstraint::to_constraint)
                .collect(),
        }
    }

    /// Locations agent `name` must never occupy.
    pub fn avoided_by(&self, name: &str) -> BTreeSet<Location> {
        self.ground
            .iter()
            .filter(|g| {
                matches!(
                    g,
                    GroundConstraint::NodeAvoid { .. } | GroundConstraint::EdgeAvoid { .. }
                )
            })
            .filter_map(|g| g.target())
            .filter(|(_, agents)| agents.iter().any(|a| a == name))
            .map(|(loc, _)| loc)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DiagCode {
    UnknownLocation,
    UnknownAgent,
    UnknownTag,
    EmptySelector,
    InitCapacityExceeded,
    TypeMismatchInFilter,
    GoalUnreachableStatic,
    MissingAttribute,
    AutoRegisteredTag,
}

impl fmt::Display for DiagCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// What a diagnostic is about, so front ends can point at source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subject {
    Agent(usize),
    Constraint(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StaticDiagnostic {
    pub severity: Severity,
    pub code: DiagCode,
    pub message: String,
    pub subject: Option<Subject>,
}

impl StaticDiagnostic {
    fn error(code: DiagCode, message: impl Into<String>) -> Self {
        StaticDiagnostic {
            severity: Severity::Error,
            code,
            message: message.into(),
            subject: None,
        }
    }

    fn warning(code: DiagCode, message: impl Into<String>) -> Self {
        StaticDiagnostic {
            severity: Severity::Warning,
            code,
            ..Self::error(code, message)
        }
    }

    fn about(mut self, subject: Option<Subject>) -> Self {
        if self.subject.is_none() {
            self.subject = subject;
        }
        self
    }
}

impl fmt::Display for StaticDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [{}] {}", self.severity, self.code, self.message)
    }
}

/// Resolves selectors against one mission.
///
/// Tags carried by agents or locations but absent from the declared ontology
/// are added as roots, with a warning each.
pub struct Resolver<'m> {
    mission: &'m Mission,
    ontology: Ontology,
    warned_missing: BTreeSet<String>,
    warnings: Vec<StaticDiagnostic>,
    subject: Option<Subject>,
}

impl<'m> Resolver<'m> {
    pub fn new(mission: &'m Mission) -> Self {
        let mut ontology = mission.ontology.clone();
        let mut warnings = Vec::new();
        let graph_attrs = mission
            .graph
            .locations()
            .filter_map(|l| mission.graph.attrs(l))
            .flat_map(|a| a.values());
        let agent_attrs = mission.agents.iter().flat_map(|a| a.attrs.values());
        for v in agent_attrs.chain(graph_attrs) {
            if let AttrValue::Tag(t) = v {
                if !ontology.contains(t) {
                    ontology.add_root(t.clone()).expect("fresh tag");
                    warnings.push(StaticDiagnostic::warning(
                        DiagCode::AutoRegisteredTag,
                        format!(
                            "tag `{}` is not in the ontology; treating it as a root tag",
                            t
                        ),
                    ));
                }
            }
        }
        Resolver {
            mission,
            ontology,
            warned_missing: BTreeSet::new(),
            warnings,
            subject: None,
        }
    }

    pub fn ontology(&self) -> &Ontology {
        &self.ontology
    }

    pub fn warnings(&self) -> &[StaticDiagnostic] {
        &self.warnings
    }

    pub fn into_warnings(self) -> Vec<StaticDiagnostic> {
        self.warnings
    }

    fn filter_error(e: FilterError) -> StaticDiagnostic {
        match e {
            FilterError::UnknownTag(t) => {
                StaticDiagnostic::error(DiagCode::UnknownTag, format!("unknown tag `{}`", t))
            }
            other => StaticDiagnostic::error(DiagCode::TypeMismatchInFilter, other.to_string()),
        }
    }

    fn tag_known(&self, t: &str) -> Result<(), FilterError> {
        if self.ontology.contains(t) {
            Ok(())
        } else {
            Err(FilterError::UnknownTag(t.to_string()))
        }
    }

    /// Agents named by a selector, in declaration order.
    pub fn agents(&mut self, sel: &Selector) -> Result<Vec<String>, StaticDiagnostic> {
        let agents = &self.mission.agents;
        let picked: BTreeSet<usize> = match sel {
            Selector::Agents(names) => {
                let mut idx = BTreeSet::new();
                for n in names {
                    match agents.iter().position(|a| &a.name == n) {
                        Some(i) => {
                            idx.insert(i);
                        }
                        None => {
                            return Err(StaticDiagnostic::error(
                                DiagCode::UnknownAgent,
                                format!("unknown agent `{}`", n),
                            ))
                        }
                    }
                }
                idx
            }
            Selector::Tag(t) => {
                self.tag_known(t).map_err(Self::filter_error)?;
                let mut idx = BTreeSet::new();
                for (i, a) in agents.iter().enumerate() {
                    if matches(a, t, &self.ontology).expect("tag checked") {
                        idx.insert(i);
                    }
                }
                idx
            }
            Selector::Filter(expr) => {
                let mut idx = BTreeSet::new();
                let mut missing = BTreeSet::new();
                for (i, a) in agents.iter().enumerate() {
                    let has_tag = |t: &str| {
                        self.tag_known(t)?;
                        Ok(matches(a, t, &self.ontology).expect("tag checked"))
                    };
                    if expr
                        .eval(&a.attrs, &has_tag, &mut missing)
                        .map_err(Self::filter_error)?
                    {
                        idx.insert(i);
                    }
                }
                idx
            }
            Selector::Nodes(_) | Selector::Edges(_) => {
                return Err(StaticDiagnostic::error(
                    DiagCode::UnknownAgent,
                    "expected agents, found locations",
                ))
            }
        };
        if picked.is_empty() {
            return Err(StaticDiagnostic::error(
                DiagCode::EmptySelector,
                format!("agent selector {} matches no agent", describe(sel)),
            ));
        }
        Ok(picked.into_iter().map(|i| agents[i].name.clone()).collect())
    }

    /// Locations named by a selector. Explicit lists keep their order
    /// (duplicates dropped); queries return canonical order.
    pub fn locations(
        &mut self,
        sel: &Selector,
        kind: LocationKind,
    ) -> Result<Vec<Location>, StaticDiagnostic> {
        let graph = &self.mission.graph;
        let explicit = |locs: Vec<Location>, found: LocationKind| {
            if found != kind {
                return Err(StaticDiagnostic::error(
                    DiagCode::UnknownLocation,
                    format!("expected {} list, found {} list", kind, found),
                ));
            }
            let mut out: Vec<Location> = Vec::new();
            for l in locs {
                if !graph.contains(l) {
                    return Err(StaticDiagnostic::error(
                        DiagCode::UnknownLocation,
                        format!("{} {} is not declared", kind, l.source_form()),
                    ));
                }
                if !out.contains(&l) {
                    out.push(l);
                }
            }
            Ok(out)
        };
        let out = match sel {
            Selector::Nodes(ns) => explicit(
                ns.iter().map(|&n| Location::Node(n)).collect(),
                LocationKind::Node,
            )?,
            Selector::Edges(es) => explicit(
                es.iter().map(|&e| Location::Edge(e)).collect(),
                LocationKind::Edge,
            )?,
            Selector::Tag(t) => {
                self.tag_known(t).map_err(Self::filter_error)?;
                let ont = &self.ontology;
                graph
                    .locations_of_kind(kind)
                    .into_iter()
                    .filter(|&l| {
                        graph.attrs(l).is_some_and(|a| {
                            a.values().any(
                                |v| matches!(v, AttrValue::Tag(x) if ont.descendant_or_equal(x, t)),
                            )
                        })
                    })
                    .collect()
            }
            Selector::Filter(expr) => {
                let mut out = Vec::new();
                let mut missing = BTreeSet::new();
                let empty = Default::default();
                for l in graph.locations_of_kind(kind) {
                    let attrs = graph.attrs(l).unwrap_or(&empty);
                    let has_tag = |t: &str| {
                        self.tag_known(t)?;
                        Ok(attrs.values().any(|v| {
                            matches!(v, AttrValue::Tag(x) if self.ontology.descendant_or_equal(x, t))
                        }))
                    };
                    if expr
                        .eval(attrs, &has_tag, &mut missing)
                        .map_err(Self::filter_error)?
                    {
                        out.push(l);
                    }
                }
                for attr in missing {
                    if self.warned_missing.insert(attr.clone()) {
                        self.warnings.push(
                            StaticDiagnostic::warning(
                                DiagCode::MissingAttribute,
                                format!(
                                    "some {}s have no `{}` attribute; they do not match",
                                    kind, attr
                                ),
                            )
                            .about(self.subject),
                        );
                    }
                }
                out
            }
            Selector::Agents(_) => {
                return Err(StaticDiagnostic::error(
                    DiagCode::UnknownLocation,
                    format!("expected {} list, found agent list", kind),
                ))
            }
        };
        if out.is_empty() {
            return Err(StaticDiagnostic::error(
                DiagCode::EmptySelector,
                format!("{} selector {} matches nothing", kind, describe(sel)),
            ));
        }
        Ok(out)
    }

    fn node(&self, n: NodeId) -> Result<NodeId, StaticDiagnostic> {
        if self.mission.graph.contains(Location::Node(n)) {
            Ok(n)
        } else {
            Err(StaticDiagnostic::error(
                DiagCode::UnknownLocation,
                format!("node {} is not declared", n),
            ))
        }
    }

    fn agent_name(&self, name: &str) -> Result<String, StaticDiagnostic> {
        if self.mission.agent(name).is_some() {
            Ok(name.to_string())
        } else {
            Err(StaticDiagnostic::error(
                DiagCode::UnknownAgent,
                format!("unknown agent `{}`", name),
            ))
        }
    }

    /// One ground constraint per element of the first (location) argument.
    pub fn and_expand(
        &mut self,
        c: &Constraint,
    ) -> Result<Vec<GroundConstraint>, StaticDiagnostic> {
        let node_of = |l: Location| match l {
            Location::Node(n) => n,
            Location::Edge(_) => unreachable!("node selector yielded an edge"),
        };
        let edge_of = |l: Location| match l {
            Location::Edge(e) => e,
            Location::Node(_) => unreachable!("edge selector yielded a node"),
        };
        Ok(match c {
            Constraint::NodeGoal { nodes, agents }
            | Constraint::NodeVisit { nodes, agents }
            | Constraint::NodeAvoid { nodes, agents } => {
                let locs = self.locations(nodes, LocationKind::Node)?;
                let agents = self.agents(agents)?;
                locs.into_iter()
                    .map(|l| {
                        let (node, agents) = (node_of(l), agents.clone());
                        match c {
                            Constraint::NodeGoal { .. } => {
                                GroundConstraint::NodeGoal { node, agents }
                            }
                            Constraint::NodeVisit { .. } => {
                                GroundConstraint::NodeVisit { node, agents }
                            }
                            _ => GroundConstraint::NodeAvoid { node, agents },
                        }
                    })
                    .collect()
            }
            Constraint::EdgeVisit { edges, agents } | Constraint::EdgeAvoid { edges, agents } => {
                let locs = self.locations(edges, LocationKind::Edge)?;
                let agents = self.agents(agents)?;
                locs.into_iter()
                    .map(|l| {
                        let (edge, agents) = (edge_of(l), agents.clone());
                        match c {
                            Constraint::EdgeVisit { .. } => {
                                GroundConstraint::EdgeVisit { edge, agents }
                            }
                            _ => GroundConstraint::EdgeAvoid { edge, agents },
                        }
                    })
                    .collect()
            }
            Constraint::NodeSupportedFrom { nodes, from } => {
                let locs = self.locations(nodes, LocationKind::Node)?;
                let from = self.node(*from)?;
                locs.into_iter()
                    .map(|l| GroundConstraint::NodeSupportedFrom {
                        node: node_of(l),
                        from,
                    })
                    .collect()
            }
            Constraint::Support {
                unit1,
                node1,
                unit2,
                node2,
            } => vec![GroundConstraint::Support {
                unit1: self.agent_name(unit1)?,
                node1: self.node(*node1)?,
                unit2: self.agent_name(unit2)?,
                node2: self.node(*node2)?,
            }],
        })
    }
}

fn describe(sel: &Selector) -> String {
    match sel {
        Selector::Agents(a) => format!("[{}]", a.join(", ")),
        Selector::Nodes(n) => format!(
            "[{}]",
            n.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(", ")
        ),
        Selector::Edges(e) => format!(
            "[{}]",
            e.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(", ")
        ),
        Selector::Tag(t) => format!("\"{}\"", t),
        Selector::Filter(f) => format!("\"{}\"", f),
    }
}

pub fn resolve_agent_selector(
    sel: &Selector,
    m: &Mission,
) -> Result<Vec<String>, StaticDiagnostic> {
    Resolver::new(m).agents(sel)
}

pub fn resolve_location_selector(
    sel: &Selector,
    m: &Mission,
    kind: LocationKind,
) -> Result<Vec<Location>, StaticDiagnostic> {
    Resolver::new(m).locations(sel, kind)
}

pub fn and_expand(c: &Constraint, m: &Mission) -> Result<Vec<GroundConstraint>, StaticDiagnostic> {
    Resolver::new(m).and_expand(c)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checked {
    pub ground: GroundMission,
    /// Index of the source constraint for each ground constraint.
    pub origins: Vec<usize>,
    pub warnings: Vec<StaticDiagnostic>,
}

/// Resolves every constraint and runs the static sanity checks.
///
/// On failure the returned list holds every error and warning found.
pub fn check_static(m: &Mission) -> Result<Checked, Vec<StaticDiagnostic>> {
    let mut resolver = Resolver::new(m);
    let mut errors = Vec::new();

    for (i, a) in m.agents.iter().enumerate() {
        if !m.graph.contains(a.init) {
            errors.push(
                StaticDiagnostic::error(
                    DiagCode::UnknownLocation,
                    format!(
                        "agent `{}` starts at undeclared location {}",
                        a.name,
                        a.init.source_form()
                    ),
                )
                .about(Some(Subject::Agent(i))),
            );
        }
    }

    let mut at_init: BTreeMap<Location, Vec<usize>> = BTreeMap::new();
    for (i, a) in m.agents.iter().enumerate() {
        at_init.entry(a.init).or_default().push(i);
    }
    for (loc, who) in &at_init {
        if !m.graph.contains(*loc) {
            continue;
        }
        let cap = m.graph.capacity(*loc) as usize;
        if who.len() > cap {
            let names: Vec<&str> = who.iter().map(|&i| m.agents[i].name.as_str()).collect();
            errors.push(
                StaticDiagnostic::error(
                    DiagCode::InitCapacityExceeded,
                    format!(
                        "{} agents start at {} but its capacity is {} ({})",
                        who.len(),
                        loc.source_form(),
                        cap,
                        names.join(", ")
                    ),
                )
                .about(Some(Subject::Agent(who[cap]))),
            );
        }
    }

    let mut ground = Vec::new();
    let mut origins = Vec::new();
    for (i, c) in m.constraints.iter().enumerate() {
        resolver.subject = Some(Subject::Constraint(i));
        match resolver.and_expand(c) {
            Ok(gs) => {
                origins.extend(std::iter::repeat_n(i, gs.len()));
                ground.extend(gs);
            }
            Err(d) => errors.push(d.about(Some(Subject::Constraint(i)))),
        }
    }
    let mut warnings = resolver.into_warnings();

    if !errors.is_empty() {
        errors.extend(warnings);
        return Err(errors);
    }

    let gm = GroundMission {
        graph: m.graph.clone(),
        agents: m.agents.clone(),
        ground,
    };
    for (g, &origin) in gm.ground.iter().zip(&origins) {
        if let GroundConstraint::NodeGoal { node, agents } = g {
            let goal = Location::Node(*node);
            let reachable = agents.iter().any(|name| {
                let a = gm
                    .agents
                    .iter()
                    .find(|a| &a.name == name)
                    .expect("resolved");
                reachable_avoiding(&gm.graph, a.init, goal, &gm.avoided_by(name))
            });
            if !reachable {
                warnings.push(
                    StaticDiagnostic::warning(
                        DiagCode::GoalUnreachableStatic,
                        format!(
                            "no agent in [{}] can reach node {} without entering a location it must avoid",
                            agents.join(", "),
                            node
                        ),
                    )
                    .about(Some(Subject::Constraint(origin))),
                );
            }
        }
    }

    Ok(Checked {
        ground: gm,
        origins,
        warnings,
    })
}

fn reachable_avoiding(g: &Graph, from: Location, to: Location, avoid: &BTreeSet<Location>) -> bool {
    if avoid.contains(&from) || avoid.contains(&to) {
        return false;
    }
    let mut seen = BTreeSet::from([from]);
    let mut queue = VecDeque::from([from]);
    while let Some(l) = queue.pop_front() {
        if l == to {
            return true;
        }
        for s in g.successors(l).unwrap_or_default() {
            if !avoid.contains(&s) && seen.insert(s) {
                queue.push_back(s);
            }
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_mission;

    fn mission(text: &str) -> Mission {
        parse_mission(text).unwrap().mission
    }

    const FLEET: &str = r#"
        graph {
            nodes { 1..14 }
            edge (1, 2) { width: 8 }
            edge (2, 3) { width: 12 }
            edge (3, 4) {}
        }
        ontology { UGV { wheeled tracked } UAV }
        agent agent1 { init: 1, kind: wheeled, vehicle: "VBCI" }
        agent agent2 { init: 2, kind: tracked, vehicle: "VAB" }
        agent agent3 { init: 3, kind: UAV }
    "#;

    #[test]
    fn tag_query_uses_hierarchy() {
        let m = mission(FLEET);
        let got = resolve_agent_selector(&Selector::Tag("UGV".into()), &m).unwrap();
        assert_eq!(got, vec!["agent1", "agent2"]);
        let got = resolve_agent_selector(&Selector::Agents(vec!["agent2".into()]), &m).unwrap();
        assert_eq!(got, vec!["agent2"]);
    }

    #[test]
    fn explicit_agents_are_declaration_ordered_and_checked() {
        let m = mission(FLEET);
        let sel = Selector::Agents(vec!["agent3".into(), "agent1".into(), "agent3".into()]);
        assert_eq!(
            resolve_agent_selector(&sel, &m).unwrap(),
            vec!["agent1", "agent3"]
        );
        let err = resolve_agent_selector(&Selector::Agents(vec!["ghost".into()]), &m).unwrap_err();
        assert_eq!(err.code, DiagCode::UnknownAgent);
        let err = resolve_agent_selector(&Selector::Tag("UUV".into()), &m).unwrap_err();
        assert_eq!(err.code, DiagCode::UnknownTag);
    }

    #[test]
    fn agent_filter_matches_brute_force() {
        let m = mission(FLEET);
        let expr = crate::filter::parse_filter("vehicle == \"VBCI\"").unwrap();
        let got = resolve_agent_selector(&Selector::Filter(expr), &m).unwrap();
        let expected: Vec<String> = m
            .agents
            .iter()
            .filter(|a| a.attrs.get("vehicle") == Some(&AttrValue::Text("VBCI".into())))
            .map(|a| a.name.clone())
            .collect();
        assert_eq!(got, expected);
    }

    #[test]
    fn numeric_filter_on_text_attribute_is_error() {
        let m = mission(FLEET);
        let expr = crate::filter::parse_filter("vehicle < 3").unwrap();
        let err = resolve_agent_selector(&Selector::Filter(expr), &m).unwrap_err();
        assert_eq!(err.code, DiagCode::TypeMismatchInFilter);
    }

    #[test]
    fn width_filter_over_edges() {
        let m = mission(FLEET);
        let expr = crate::filter::parse_filter("width < 10").unwrap();
        let mut r = Resolver::new(&m);
        let got = r
            .locations(&Selector::Filter(expr), LocationKind::Edge)
            .unwrap();
        assert_eq!(got, vec![Location::edge(1, 2)]);
        assert_eq!(r.warnings().len(), 1);
        assert_eq!(r.warnings()[0].code, DiagCode::MissingAttribute);

        let expr = crate::filter::parse_filter("width < 10").unwrap();
        let err =
            resolve_location_selector(&Selector::Filter(expr), &m, LocationKind::Node).unwrap_err();
        assert_eq!(err.code, DiagCode::EmptySelector);
    }

    #[test]
    fn explicit_locations() {
        let m = mission(FLEET);
        let got =
            resolve_location_selector(&Selector::Nodes(vec![NodeId(14)]), &m, LocationKind::Node)
                .unwrap();
        assert_eq!(got, vec![Location::node(14)]);
        let err =
            resolve_location_selector(&Selector::Nodes(vec![NodeId(15)]), &m, LocationKind::Node)
                .unwrap_err();
        assert_eq!(err.code, DiagCode::UnknownLocation);
        let err =
            resolve_location_selector(&Selector::Nodes(vec![NodeId(1)]), &m, LocationKind::Edge)
                .unwrap_err();
        assert_eq!(err.code, DiagCode::UnknownLocation);
    }

    #[test]
    fn expansion_distributes_first_list() {
        let m = mission(
            "graph { nodes {1..14} } agent c1 { init: 1 } agent c2 { init: 2 }
             constraints { node_goal([11, 14], [c1, c2]) node_goal(14, c1) node_avoid([], c1) }",
        );
        let g = and_expand(&m.constraints[0], &m).unwrap();
        let both = vec!["c1".to_string(), "c2".to_string()];
        assert_eq!(
            g,
            vec![
                GroundConstraint::NodeGoal {
                    node: NodeId(11),
                    agents: both.clone()
                },
                GroundConstraint::NodeGoal {
                    node: NodeId(14),
                    agents: both
                },
            ]
        );
        assert_eq!(g[0].to_string(), "node_goal(11, [c1, c2])");
        let g = and_expand(&m.constraints[1], &m).unwrap();
        assert_eq!(
            g,
            vec![GroundConstraint::NodeGoal {
                node: NodeId(14),
                agents: vec!["c1".into()]
            }]
        );
        let err = and_expand(&m.constraints[2], &m).unwrap_err();
        assert_eq!(err.code, DiagCode::EmptySelector);
    }

    #[test]
    fn check_reports_init_capacity() {
        let base = "graph { nodes {9} NODE } agent a { init: 9 } agent b { init: 9 }";
        let ok = mission(&base.replace("NODE", "node 9 { capacity: 2 }"));
        assert!(check_static(&ok).is_ok());
        let bad = mission(&base.replace("NODE", ""));
        let errs = check_static(&bad).unwrap_err();
        assert_eq!(errs[0].code, DiagCode::InitCapacityExceeded);
        assert_eq!(errs[0].subject, Some(Subject::Agent(1)));
    }

    #[test]
    fn check_flags_undeclared_init() {
        let m = mission("graph { nodes {1} } agent u1 { init: 99 }");
        let errs = check_static(&m).unwrap_err();
        assert_eq!(errs[0].code, DiagCode::UnknownLocation);
    }

    #[test]
    fn goal_behind_avoid_warns() {
        let m = mission(
            "graph { nodes {1..3} edge (1,2) {} edge (2,3) {} } agent u { init: 1 }
             constraints { node_goal(3, u) node_avoid(3, u) }",
        );
        let checked = check_static(&m).unwrap();
        assert!(checked
            .warnings
            .iter()
            .any(|w| w.code == DiagCode::GoalUnreachableStatic
                && w.subject == Some(Subject::Constraint(0))));
        // BFS oracle: with node 2 avoided instead, node 3 is also cut off
        let m = mission(
            "graph { nodes {1..3} edge (1,2) {} edge (2,3) {} } agent u { init: 1 }
             constraints { node_goal(3, u) node_avoid(2, u) }",
        );
        assert!(check_static(&m)
            .unwrap()
            .warnings
            .iter()
            .any(|w| w.code == DiagCode::GoalUnreachableStatic));
    }

    #[test]
    fn unknown_agent_tags_become_roots() {
        let m = mission("graph { nodes {1} } agent a { init: 1, kind: company } constraints { node_goal(1, \"company\") }");
        let checked = check_static(&m).unwrap();
        assert!(checked
            .warnings
            .iter()
            .any(|w| w.code == DiagCode::AutoRegisteredTag));
        assert_eq!(
            checked.ground.ground,
            vec![GroundConstraint::NodeGoal {
                node: NodeId(1),
                agents: vec!["a".into()]
            }]
        );
    }

    #[test]
    fn check_is_idempotent() {
        let m = mission(
            r#"graph { nodes {1..4} edge (1,2) { width: 3 } edge (2,3) {} edge (3,4) { width: 30 } }
               ontology { UGV { wheeled } }
               agent a { init: 1, kind: wheeled } agent b { init: 4 }
               constraints {
                 node_goal([3, 2], "UGV")
                 edge_avoid("width < 10", [a, b])
                 node_supported_from([2, 3], 4)
                 support(a, 2, b, 4)
               }"#,
        );
        let once = check_static(&m).unwrap().ground;
        let twice = check_static(&once.to_mission()).unwrap().ground;
        assert_eq!(once, twice);
    }

    #[test]
    fn support_references_are_checked() {
        let m = mission("graph { nodes {1,2} } agent a { init: 1 } constraints { support(a, 1, zz, 2) support(a, 1, a, 7) }");
        let errs = check_static(&m).unwrap_err();
        assert_eq!(errs[0].code, DiagCode::UnknownAgent);
        assert_eq!(errs[1].code, DiagCode::UnknownLocation);
        assert_eq!(errs[1].subject, Some(Subject::Constraint(1)));
    }
}
