//! Core mission types: the road graph, agents and their attributes, the tag
//! ontology, unresolved constraints, and plans.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::filter::FilterExpr;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("invalid edge ({0}, {0}): self-loops are not allowed")]
    InvalidEdge(u32),
    #[error("unknown location {0}")]
    UnknownLocation(String),
    #[error("unknown tag `{0}`")]
    UnknownTag(String),
    #[error("capacity of {0} must be at least 1")]
    ZeroCapacity(String),
    #[error("tag `{0}` is already declared")]
    DuplicateTag(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// An undirected edge, always stored with the smaller endpoint first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeId {
    lo: NodeId,
    hi: NodeId,
}

impl EdgeId {
    pub fn new(u: NodeId, v: NodeId) -> Result<Self, ModelError> {
        normalize_edge(u, v)
    }

    pub fn endpoints(&self) -> (NodeId, NodeId) {
        (self.lo, self.hi)
    }

    pub fn touches(&self, n: NodeId) -> bool {
        self.lo == n || self.hi == n
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.lo, self.hi)
    }
}

pub fn normalize_edge(u: NodeId, v: NodeId) -> Result<EdgeId, ModelError> {
    if u == v {
        return Err(ModelError::InvalidEdge(u.0));
    }
    Ok(EdgeId {
        lo: u.min(v),
        hi: u.max(v),
    })
}

/// Where an agent can stand: on a node or somewhere along an edge.
///
/// The derived ordering (all nodes before all edges) is the canonical
/// location order used throughout the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Location {
    Node(NodeId),
    Edge(EdgeId),
}

impl Location {
    pub fn node(id: u32) -> Self {
        Location::Node(NodeId(id))
    }

    /// Panics on a self-loop; meant for literals in tests and fixtures.
    pub fn edge(u: u32, v: u32) -> Self {
        Location::Edge(normalize_edge(NodeId(u), NodeId(v)).expect("self-loop edge literal"))
    }

    /// Source-language spelling: `9` or `(8, 9)`.
    pub fn source_form(&self) -> String {
        match self {
            Location::Node(n) => n.to_string(),
            Location::Edge(e) => e.to_string(),
        }
    }
}

/// Plan-file encoding: `n:9` / `e:8-9`.
impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Node(n) => write!(f, "n:{}", n.0),
            Location::Edge(e) => write!(f, "e:{}-{}", e.lo.0, e.hi.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("malformed location `{0}` (expected `n:<id>` or `e:<u>-<v>`)")]
pub struct LocationParseError(pub String);

impl FromStr for Location {
    type Err = LocationParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || LocationParseError(s.to_string());
        if let Some(rest) = s.strip_prefix("n:") {
            let id = rest.parse::<u32>().map_err(|_| bad())?;
            Ok(Location::Node(NodeId(id)))
        } else if let Some(rest) = s.strip_prefix("e:") {
            let (u, v) = rest.split_once('-').ok_or_else(bad)?;
            let u = u.parse::<u32>().map_err(|_| bad())?;
            let v = v.parse::<u32>().map_err(|_| bad())?;
            normalize_edge(NodeId(u), NodeId(v))
                .map(Location::Edge)
                .map_err(|_| bad())
        } else {
            Err(bad())
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum AttrValue {
    Number(f64),
    Text(String),
    Tag(String),
}

pub type Attributes = BTreeMap<String, AttrValue>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LocationKind {
    Node,
    Edge,
}

impl fmt::Display for LocationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LocationKind::Node => "node",
            LocationKind::Edge => "edge",
        })
    }
}

/// Undirected road graph with per-location capacities and attributes.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Graph {
    nodes: BTreeSet<NodeId>,
    edges: BTreeSet<EdgeId>,
    incident: BTreeMap<NodeId, BTreeSet<EdgeId>>,
    capacity: BTreeMap<Location, u32>,
    attrs: BTreeMap<Location, Attributes>,
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns false if the node was already present.
    pub fn add_node(&mut self, n: NodeId) -> bool {
        self.incident.entry(n).or_default();
        self.nodes.insert(n)
    }

    /// Both endpoints must already be declared. Returns Ok(false) on a duplicate.
    pub fn add_edge(&mut self, e: EdgeId) -> Result<bool, ModelError> {
        let (u, v) = e.endpoints();
        for n in [u, v] {
            if !self.nodes.contains(&n) {
                return Err(ModelError::UnknownLocation(n.to_string()));
            }
        }
        if !self.edges.insert(e) {
            return Ok(false);
        }
        self.incident.entry(u).or_default().insert(e);
        self.incident.entry(v).or_default().insert(e);
        Ok(true)
    }

    pub fn set_capacity(&mut self, loc: Location, cap: u32) -> Result<(), ModelError> {
        self.require(loc)?;
        if cap == 0 {
            return Err(ModelError::ZeroCapacity(loc.source_form()));
        }
        self.capacity.insert(loc, cap);
        Ok(())
    }

    pub fn set_attr(
        &mut self,
        loc: Location,
        name: impl Into<String>,
        value: AttrValue,
    ) -> Result<(), ModelError> {
        self.require(loc)?;
        self.attrs
            .entry(loc)
            .or_default()
            .insert(name.into(), value);
        Ok(())
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes.iter().copied()
    }

    pub fn edges(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.edges.iter().copied()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// All locations in canonical order (nodes, then edges).
    pub fn locations(&self) -> impl Iterator<Item = Location> + '_ {
        self.nodes
            .iter()
            .map(|&n| Location::Node(n))
            .chain(self.edges.iter().map(|&e| Location::Edge(e)))
    }

    pub fn locations_of_kind(&self, kind: LocationKind) -> Vec<Location> {
        match kind {
            LocationKind::Node => self.nodes.iter().map(|&n| Location::Node(n)).collect(),
            LocationKind::Edge => self.edges.iter().map(|&e| Location::Edge(e)).collect(),
        }
    }

    pub fn contains(&self, loc: Location) -> bool {
        match loc {
            Location::Node(n) => self.nodes.contains(&n),
            Location::Edge(e) => self.edges.contains(&e),
        }
    }

    fn require(&self, loc: Location) -> Result<(), ModelError> {
        if self.contains(loc) {
            Ok(())
        } else {
            Err(ModelError::UnknownLocation(loc.source_form()))
        }
    }

    /// Capacity of a location; 1 unless set explicitly.
    pub fn capacity(&self, loc: Location) -> u32 {
        self.capacity.get(&loc).copied().unwrap_or(1)
    }

    pub fn explicit_capacity(&self, loc: Location) -> Option<u32> {
        self.capacity.get(&loc).copied()
    }

    pub fn attrs(&self, loc: Location) -> Option<&Attributes> {
        self.attrs.get(&loc)
    }

    pub fn incident_edges(&self, n: NodeId) -> impl Iterator<Item = EdgeId> + '_ {
        self.incident.get(&n).into_iter().flatten().copied()
    }

    /// Locations reachable in one timestep, including staying put.
    /// Sorted in canonical order.
    pub fn successors(&self, loc: Location) -> Result<Vec<Location>, ModelError> {
        self.require(loc)?;
        let mut out = vec![loc];
        match loc {
            Location::Node(n) => out.extend(self.incident_edges(n).map(Location::Edge)),
            Location::Edge(e) => {
                let (u, v) = e.endpoints();
                out.push(Location::Node(u));
                out.push(Location::Node(v));
            }
        }
        out.sort();
        Ok(out)
    }
}

pub fn successors(loc: Location, g: &Graph) -> Result<Vec<Location>, ModelError> {
    g.successors(loc)
}

/// A forest of tags. A tag matches any query naming itself or one of its ancestors.
///
/// Children can only be attached under an existing parent and must be new, so
/// the parent relation is acyclic by construction.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Ontology {
    tags: BTreeSet<String>,
    parent: BTreeMap<String, String>,
}

impl Ontology {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_root(&mut self, tag: impl Into<String>) -> Result<(), ModelError> {
        let tag = tag.into();
        if self.tags.contains(&tag) {
            return Err(ModelError::DuplicateTag(tag));
        }
        self.tags.insert(tag);
        Ok(())
    }

    pub fn add_child(&mut self, parent: &str, child: impl Into<String>) -> Result<(), ModelError> {
        let child = child.into();
        if !self.tags.contains(parent) {
            return Err(ModelError::UnknownTag(parent.to_string()));
        }
        if self.tags.contains(&child) {
            return Err(ModelError::DuplicateTag(child));
        }
        self.tags.insert(child.clone());
        self.parent.insert(child, parent.to_string());
        Ok(())
    }

    pub fn contains(&self, tag: &str) -> bool {
        self.tags.contains(tag)
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    pub fn tags(&self) -> impl Iterator<Item = &str> {
        self.tags.iter().map(String::as_str)
    }

    pub fn parent(&self, tag: &str) -> Option<&str> {
        self.parent.get(tag).map(String::as_str)
    }

    pub fn roots(&self) -> Vec<&str> {
        self.tags
            .iter()
            .filter(|t| !self.parent.contains_key(*t))
            .map(String::as_str)
            .collect()
    }

    pub fn children(&self, tag: &str) -> Vec<&str> {
        self.parent
            .iter()
            .filter(|(_, p)| p.as_str() == tag)
            .map(|(c, _)| c.as_str())
            .collect()
    }

    /// True iff `tag` equals `ancestor` or lies somewhere below it.
    pub fn descendant_or_equal(&self, tag: &str, ancestor: &str) -> bool {
        let mut cur = Some(tag);
        while let Some(t) = cur {
            if t == ancestor {
                return true;
            }
            cur = self.parent(t);
        }
        false
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Agent {
    pub name: String,
    pub init: Location,
    pub attrs: Attributes,
}

impl Agent {
    pub fn new(name: impl Into<String>, init: Location) -> Self {
        Agent {
            name: name.into(),
            init,
            attrs: Attributes::new(),
        }
    }

    pub fn with_attr(mut self, key: impl Into<String>, value: AttrValue) -> Self {
        self.attrs.insert(key.into(), value);
        self
    }

    pub fn tags(&self) -> impl Iterator<Item = &str> {
        self.attrs.values().filter_map(|v| match v {
            AttrValue::Tag(t) => Some(t.as_str()),
            _ => None,
        })
    }
}

/// Does any tag carried by `agent` fall under `tag` in the ontology?
pub fn matches(agent: &Agent, tag: &str, ont: &Ontology) -> Result<bool, ModelError> {
    if !ont.contains(tag) {
        return Err(ModelError::UnknownTag(tag.to_string()));
    }
    Ok(agent.tags().any(|t| ont.descendant_or_equal(t, tag)))
}

/// How a constraint argument names its objects, before resolution.
#[derive(Debug, Clone, PartialEq)]
pub enum Selector {
    Agents(Vec<String>),
    Nodes(Vec<NodeId>),
    Edges(Vec<EdgeId>),
    Tag(String),
    Filter(FilterExpr),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Constraint {
    NodeGoal {
        nodes: Selector,
        agents: Selector,
    },
    NodeVisit {
        nodes: Selector,
        agents: Selector,
    },
    EdgeVisit {
        edges: Selector,
        agents: Selector,
    },
    NodeAvoid {
        nodes: Selector,
        agents: Selector,
    },
    EdgeAvoid {
        edges: Selector,
        agents: Selector,
    },
    NodeSupportedFrom {
        nodes: Selector,
        from: NodeId,
    },
    Support {
        unit1: String,
        node1: NodeId,
        unit2: String,
        node2: NodeId,
    },
}

impl Constraint {
    pub fn predicate_name(&self) -> &'static str {
        match self {
            Constraint::NodeGoal { .. } => "node_goal",
            Constraint::NodeVisit { .. } => "node_visit",
            Constraint::EdgeVisit { .. } => "edge_visit",
            Constraint::NodeAvoid { .. } => "node_avoid",
            Constraint::EdgeAvoid { .. } => "edge_avoid",
            Constraint::NodeSupportedFrom { .. } => "node_supported_from",
            Constraint::Support { .. } => "support",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Mission {
    pub graph: Graph,
    pub ontology: Ontology,
    pub agents: Vec<Agent>,
    pub constraints: Vec<Constraint>,
}

impl Mission {
    pub fn agent(&self, name: &str) -> Option<&Agent> {
        self.agents.iter().find(|a| a.name == name)
    }
}

/// Per-agent trajectories over timesteps `0..=horizon`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plan {
    pub horizon: usize,
    pub traj: BTreeMap<String, Vec<Location>>,
}

impl Plan {
    pub fn loc(&self, agent: &str, t: usize) -> Option<Location> {
        self.traj.get(agent).and_then(|tr| tr.get(t)).copied()
    }
}
