//! Mission file front end: lexer, recursive-descent parser and canonical printer.
//!
//! Sections (`graph`, `ontology`, `agent`, `constraints`) may appear in any
//! order and may be repeated. Selectors are left unresolved; the analysis
//! pass resolves them against the finished mission.

pub mod lexer;
mod printer;

use std::collections::btree_map::Entry;
use std::collections::BTreeSet;
use std::fmt;

use crate::filter::parse_filter;
use crate::model::{
    normalize_edge, Agent, AttrValue, Attributes, Constraint, EdgeId, Graph, Location, Mission,
    ModelError, NodeId, Ontology, Selector,
};
use lexer::{tokenize, Keyword, Token, TokenKind};

pub use printer::print_mission;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SourceSpan {
    pub line: usize,
    pub column: usize,
    pub length: usize,
}

impl SourceSpan {
    pub const START: SourceSpan = SourceSpan {
        line: 1,
        column: 1,
        length: 0,
    };
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseErrorKind {
    Lexical,
    Syntax,
    Duplicate,
    Overflow,
    Reference,
}

impl ParseErrorKind {
    pub fn code(self) -> &'static str {
        match self {
            ParseErrorKind::Lexical => "lexical",
            ParseErrorKind::Syntax => "syntax",
            ParseErrorKind::Duplicate => "duplicate",
            ParseErrorKind::Overflow => "overflow",
            ParseErrorKind::Reference => "reference",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseDiagnostic {
    pub severity: Severity,
    pub kind: ParseErrorKind,
    pub span: SourceSpan,
    pub message: String,
}

impl ParseDiagnostic {
    pub fn error(kind: ParseErrorKind, span: SourceSpan, message: impl Into<String>) -> Self {
        ParseDiagnostic {
            severity: Severity::Error,
            kind,
            span,
            message: message.into(),
        }
    }
}

impl fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}:{}: {}",
            self.severity, self.span.line, self.span.column, self.message
        )
    }
}

/// Where each agent and constraint came from, indexed like the mission's vectors.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SourceMap {
    pub agents: Vec<SourceSpan>,
    pub constraints: Vec<SourceSpan>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedMission {
    pub mission: Mission,
    pub source_map: SourceMap,
    pub warnings: Vec<ParseDiagnostic>,
}

pub fn parse_mission(text: &str) -> Result<ParsedMission, Vec<ParseDiagnostic>> {
    let tokens = tokenize(text)?;
    let end = end_span(text);
    let mut p = Parser {
        tokens,
        pos: 0,
        end,
        errors: Vec::new(),
        warnings: Vec::new(),
        builder: Builder::default(),
    };
    if let Err(d) = p.mission() {
        p.errors.push(d);
    }
    let Parser {
        errors,
        warnings,
        builder,
        ..
    } = p;
    let (mut errors, mut warnings) = (errors, warnings);
    let (mission, source_map) = builder.finish(&mut errors, &mut warnings);
    if errors.is_empty() {
        Ok(ParsedMission {
            mission,
            source_map,
            warnings,
        })
    } else {
        Err(errors)
    }
}

fn end_span(text: &str) -> SourceSpan {
    let mut line = 1;
    let mut column = 1;
    for c in text.chars() {
        if c == '\n' {
            line += 1;
            column = 1;
        } else {
            column += 1;
        }
    }
    SourceSpan {
        line,
        column,
        length: 0,
    }
}

#[derive(Debug, Clone)]
struct Prop {
    key: String,
    value: AttrValue,
    span: SourceSpan,
}

#[derive(Debug, Clone)]
enum Arg {
    Int(u64, SourceSpan),
    Pair(u64, u64, SourceSpan),
    Ident(String, SourceSpan),
    Str(String, SourceSpan),
    List(Vec<Arg>, SourceSpan),
}

impl Arg {
    fn span(&self) -> SourceSpan {
        match self {
            Arg::Int(_, s)
            | Arg::Pair(_, _, s)
            | Arg::Ident(_, s)
            | Arg::Str(_, s)
            | Arg::List(_, s) => *s,
        }
    }

    fn describe(&self) -> &'static str {
        match self {
            Arg::Int(..) => "a node",
            Arg::Pair(..) => "an edge",
            Arg::Ident(..) => "an identifier",
            Arg::Str(..) => "a string",
            Arg::List(..) => "a list",
        }
    }
}

/// Accumulates declarations; cross-section checks happen in `finish`.
#[derive(Default)]
struct Builder {
    nodes: Vec<(NodeId, SourceSpan)>,
    node_blocks: Vec<(NodeId, Vec<Prop>, SourceSpan)>,
    edges: Vec<(EdgeId, Vec<Prop>, SourceSpan)>,
    ontology: Ontology,
    agents: Vec<(Agent, SourceSpan)>,
    constraints: Vec<(Constraint, SourceSpan)>,
    post_attrs: Vec<(String, Option<String>, AttrValue, SourceSpan)>,
}

impl Builder {
    fn finish(
        self,
        errors: &mut Vec<ParseDiagnostic>,
        warnings: &mut Vec<ParseDiagnostic>,
    ) -> (Mission, SourceMap) {
        let mut graph = Graph::new();
        for (n, span) in &self.nodes {
            if !graph.add_node(*n) {
                errors.push(ParseDiagnostic::error(
                    ParseErrorKind::Duplicate,
                    *span,
                    format!("node {} declared twice", n),
                ));
            }
        }
        let mut seen_blocks = BTreeSet::new();
        for (n, _, span) in &self.node_blocks {
            if !seen_blocks.insert(*n) {
                errors.push(ParseDiagnostic::error(
                    ParseErrorKind::Duplicate,
                    *span,
                    format!("node {} has more than one property block", n),
                ));
            }
            if graph.add_node(*n) {
                warnings.push(ParseDiagnostic {
                    severity: Severity::Warning,
                    kind: ParseErrorKind::Reference,
                    span: *span,
                    message: format!(
                        "node {} is not listed in any `nodes` block; declaring it here",
                        n
                    ),
                });
            }
        }
        for (e, _, span) in &self.edges {
            match graph.add_edge(*e) {
                Ok(true) => {}
                Ok(false) => errors.push(ParseDiagnostic::error(
                    ParseErrorKind::Duplicate,
                    *span,
                    format!("edge {} declared twice", e),
                )),
                Err(ModelError::UnknownLocation(n)) => errors.push(ParseDiagnostic::error(
                    ParseErrorKind::Reference,
                    *span,
                    format!("edge {} uses undeclared node {}", e, n),
                )),
                Err(other) => errors.push(ParseDiagnostic::error(
                    ParseErrorKind::Reference,
                    *span,
                    other.to_string(),
                )),
            }
        }
        let located = self
            .node_blocks
            .iter()
            .map(|(n, props, _)| (Location::Node(*n), props))
            .chain(
                self.edges
                    .iter()
                    .map(|(e, props, _)| (Location::Edge(*e), props)),
            );
        for (loc, props) in located {
            if !graph.contains(loc) {
                continue;
            }
            for prop in props {
                let res = if prop.key == "capacity" {
                    match prop.value {
                        AttrValue::Number(x)
                            if x >= 1.0 && x.fract() == 0.0 && x <= u32::MAX as f64 =>
                        {
                            graph.set_capacity(loc, x as u32)
                        }
                        _ => Err(ModelError::ZeroCapacity(loc.source_form())),
                    }
                } else {
                    graph.set_attr(loc, prop.key.clone(), prop.value.clone())
                };
                if let Err(e) = res {
                    let msg = match e {
                        ModelError::ZeroCapacity(l) => {
                            format!("capacity of {} must be a positive integer", l)
                        }
                        other => other.to_string(),
                    };
                    errors.push(ParseDiagnostic::error(
                        ParseErrorKind::Syntax,
                        prop.span,
                        msg,
                    ));
                }
            }
        }

        let mut agents: Vec<Agent> = Vec::new();
        let mut agent_spans = Vec::new();
        for (a, span) in self.agents {
            if agents.iter().any(|b| b.name == a.name) {
                errors.push(ParseDiagnostic::error(
                    ParseErrorKind::Duplicate,
                    span,
                    format!("agent `{}` declared twice", a.name),
                ));
                continue;
            }
            agents.push(a);
            agent_spans.push(span);
        }
        for (name, key, value, span) in self.post_attrs {
            let Some(agent) = agents.iter_mut().find(|a| a.name == name) else {
                errors.push(ParseDiagnostic::error(
                    ParseErrorKind::Reference,
                    span,
                    format!("attribute() on undeclared agent `{}`", name),
                ));
                continue;
            };
            let key = key.unwrap_or_else(|| next_tag_key(&agent.attrs));
            if agent.attrs.contains_key(&key) {
                errors.push(ParseDiagnostic::error(
                    ParseErrorKind::Duplicate,
                    span,
                    format!("agent `{}` already has attribute `{}`", name, key),
                ));
                continue;
            }
            agent.attrs.insert(key, value);
        }

        let (constraints, constraint_spans) = self.constraints.into_iter().unzip();
        (
            Mission {
                graph,
                ontology: self.ontology,
                agents,
                constraints,
            },
            SourceMap {
                agents: agent_spans,
                constraints: constraint_spans,
            },
        )
    }
}

/// Key used for anonymous tag attributes: `tag1`, `tag2`, ...
fn next_tag_key(attrs: &Attributes) -> String {
    (1..)
        .map(|i| format!("tag{}", i))
        .find(|k| !attrs.contains_key(k))
        .expect("unbounded key space")
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Expect {
    Nodes,
    Edges,
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    end: SourceSpan,
    errors: Vec<ParseDiagnostic>,
    warnings: Vec<ParseDiagnostic>,
    builder: Builder,
}

type PResult<T> = Result<T, ParseDiagnostic>;

impl Parser {
    fn peek(&self) -> Option<&TokenKind> {
        self.tokens.get(self.pos).map(|t| &t.kind)
    }

    fn span(&self) -> SourceSpan {
        self.tokens
            .get(self.pos)
            .map(|t| t.span)
            .unwrap_or(self.end)
    }

    fn unexpected(&self, expected: &str) -> ParseDiagnostic {
        let found = match self.peek() {
            Some(k) => k.describe(),
            None => "end of input".to_string(),
        };
        ParseDiagnostic::error(
            ParseErrorKind::Syntax,
            self.span(),
            format!("expected {}, found {}", expected, found),
        )
    }

    fn eat(&mut self, kind: &TokenKind) -> bool {
        if self.peek() == Some(kind) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, kind: TokenKind) -> PResult<SourceSpan> {
        let span = self.span();
        if self.eat(&kind) {
            Ok(span)
        } else {
            Err(self.unexpected(&format!("`{}`", kind)))
        }
    }

    fn expect_keyword(&mut self, k: Keyword) -> PResult<()> {
        if self.eat(&TokenKind::Keyword(k)) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{}`", k.as_str())))
        }
    }

    fn ident(&mut self, what: &str) -> PResult<(String, SourceSpan)> {
        match self.peek() {
            Some(TokenKind::Ident(s)) => {
                let s = s.clone();
                let span = self.span();
                self.pos += 1;
                Ok((s, span))
            }
            _ => Err(self.unexpected(what)),
        }
    }

    fn int(&mut self) -> PResult<(u64, SourceSpan)> {
        match self.peek() {
            Some(TokenKind::Int(n)) => {
                let n = *n;
                let span = self.span();
                self.pos += 1;
                Ok((n, span))
            }
            _ => Err(self.unexpected("an integer")),
        }
    }

    fn node_id(&mut self) -> PResult<(NodeId, SourceSpan)> {
        let (n, span) = self.int()?;
        Ok((to_node(n, span)?, span))
    }

    fn mission(&mut self) -> PResult<()> {
        while let Some(kind) = self.peek() {
            match kind {
                TokenKind::Keyword(Keyword::Graph) => self.graph_section()?,
                TokenKind::Keyword(Keyword::Ontology) => self.ontology_section()?,
                TokenKind::Keyword(Keyword::Agent) => self.agent_decl()?,
                TokenKind::Keyword(Keyword::Constraints) => self.constraints_section()?,
                _ => return Err(self.unexpected("`graph`, `ontology`, `agent` or `constraints`")),
            }
        }
        Ok(())
    }

    fn graph_section(&mut self) -> PResult<()> {
        self.expect_keyword(Keyword::Graph)?;
        self.expect(TokenKind::LBrace)?;
        loop {
            match self.peek() {
                Some(TokenKind::RBrace) => {
                    self.pos += 1;
                    return Ok(());
                }
                Some(TokenKind::Keyword(Keyword::Nodes)) => {
                    self.pos += 1;
                    self.expect(TokenKind::LBrace)?;
                    loop {
                        self.node_range()?;
                        if !self.eat(&TokenKind::Comma) {
                            break;
                        }
                    }
                    self.expect(TokenKind::RBrace)?;
                }
                Some(TokenKind::Keyword(Keyword::Node)) => {
                    self.pos += 1;
                    let (n, span) = self.node_id()?;
                    self.expect(TokenKind::LBrace)?;
                    let props = self.prop_list()?;
                    self.expect(TokenKind::RBrace)?;
                    self.builder.node_blocks.push((n, props, span));
                }
                Some(TokenKind::Keyword(Keyword::Edge)) => {
                    let span = self.span();
                    self.pos += 1;
                    let e = self.edge_ref()?;
                    self.expect(TokenKind::LBrace)?;
                    let props = self.prop_list()?;
                    self.expect(TokenKind::RBrace)?;
                    self.builder.edges.push((e, props, span));
                }
                _ => return Err(self.unexpected("`nodes`, `node`, `edge` or `}`")),
            }
        }
    }

    fn node_range(&mut self) -> PResult<()> {
        let (lo, span) = self.node_id()?;
        if self.eat(&TokenKind::DotDot) {
            let (hi, hi_span) = self.node_id()?;
            if hi < lo {
                return Err(ParseDiagnostic::error(
                    ParseErrorKind::Syntax,
                    hi_span,
                    format!("empty node range {}..{}", lo, hi),
                ));
            }
            if hi.0 - lo.0 >= 1_000_000 {
                return Err(ParseDiagnostic::error(
                    ParseErrorKind::Overflow,
                    hi_span,
                    "node range too large",
                ));
            }
            for n in lo.0..=hi.0 {
                self.builder.nodes.push((NodeId(n), span));
            }
        } else {
            self.builder.nodes.push((lo, span));
        }
        Ok(())
    }

    fn edge_ref(&mut self) -> PResult<EdgeId> {
        self.expect(TokenKind::LParen)?;
        let (u, span) = self.node_id()?;
        self.expect(TokenKind::Comma)?;
        let (v, _) = self.node_id()?;
        self.expect(TokenKind::RParen)?;
        normalize_edge(u, v)
            .map_err(|e| ParseDiagnostic::error(ParseErrorKind::Syntax, span, e.to_string()))
    }

    fn loc_ref(&mut self) -> PResult<Location> {
        if self.peek() == Some(&TokenKind::LParen) {
            Ok(Location::Edge(self.edge_ref()?))
        } else {
            Ok(Location::Node(self.node_id()?.0))
        }
    }

    fn prop_key(&mut self) -> PResult<(String, SourceSpan)> {
        let span = self.span();
        match self.peek() {
            Some(TokenKind::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok((s, span))
            }
            Some(TokenKind::Keyword(Keyword::Capacity)) => {
                self.pos += 1;
                Ok(("capacity".to_string(), span))
            }
            _ => Err(self.unexpected("a property name")),
        }
    }

    fn prop_list(&mut self) -> PResult<Vec<Prop>> {
        let mut props: Vec<Prop> = Vec::new();
        if self.peek() == Some(&TokenKind::RBrace) {
            return Ok(props);
        }
        loop {
            let prop = self.prop()?;
            if props.iter().any(|p| p.key == prop.key) {
                self.errors.push(ParseDiagnostic::error(
                    ParseErrorKind::Duplicate,
                    prop.span,
                    format!("property `{}` given twice", prop.key),
                ));
            } else {
                props.push(prop);
            }
            if !self.eat(&TokenKind::Comma) {
                return Ok(props);
            }
        }
    }

    fn prop(&mut self) -> PResult<Prop> {
        let (key, span) = self.prop_key()?;
        self.expect(TokenKind::Colon)?;
        let value = self.value()?;
        Ok(Prop { key, value, span })
    }

    fn value(&mut self) -> PResult<AttrValue> {
        let negative = self.eat(&TokenKind::Minus);
        let sign = if negative { -1.0 } else { 1.0 };
        let v = match self.peek() {
            Some(TokenKind::Int(n)) => AttrValue::Number(sign * *n as f64),
            Some(TokenKind::Decimal(x)) => AttrValue::Number(sign * *x),
            Some(TokenKind::Str(s)) if !negative => AttrValue::Text(s.clone()),
            Some(TokenKind::Ident(s)) if !negative => AttrValue::Tag(s.clone()),
            _ => return Err(self.unexpected("a value")),
        };
        self.pos += 1;
        Ok(v)
    }

    fn ontology_section(&mut self) -> PResult<()> {
        self.expect_keyword(Keyword::Ontology)?;
        self.expect(TokenKind::LBrace)?;
        while !self.eat(&TokenKind::RBrace) {
            self.onto_node(None)?;
        }
        Ok(())
    }

    fn onto_node(&mut self, parent: Option<&str>) -> PResult<()> {
        let (tag, span) = self.ident("a tag name or `}`")?;
        let res = match parent {
            None => self.builder.ontology.add_root(tag.clone()),
            Some(p) => self.builder.ontology.add_child(p, tag.clone()),
        };
        if let Err(e) = res {
            self.errors.push(ParseDiagnostic::error(
                ParseErrorKind::Duplicate,
                span,
                e.to_string(),
            ));
        }
        if self.eat(&TokenKind::LBrace) {
            while !self.eat(&TokenKind::RBrace) {
                self.onto_node(Some(&tag))?;
            }
        }
        Ok(())
    }

    fn agent_decl(&mut self) -> PResult<()> {
        self.expect_keyword(Keyword::Agent)?;
        let (name, span) = self.ident("an agent name")?;
        self.expect(TokenKind::LBrace)?;
        self.expect_keyword(Keyword::Init)?;
        self.expect(TokenKind::Colon)?;
        let init = self.loc_ref()?;
        let mut agent = Agent::new(name, init);
        while self.eat(&TokenKind::Comma) {
            let prop = self.prop()?;
            match agent.attrs.entry(prop.key) {
                Entry::Occupied(e) => self.errors.push(ParseDiagnostic::error(
                    ParseErrorKind::Duplicate,
                    prop.span,
                    format!("property `{}` given twice", e.key()),
                )),
                Entry::Vacant(e) => {
                    e.insert(prop.value);
                }
            }
        }
        self.expect(TokenKind::RBrace)?;
        self.builder.agents.push((agent, span));
        Ok(())
    }

    fn constraints_section(&mut self) -> PResult<()> {
        self.expect_keyword(Keyword::Constraints)?;
        self.expect(TokenKind::LBrace)?;
        while !self.eat(&TokenKind::RBrace) {
            self.predicate()?;
        }
        Ok(())
    }

    fn arg(&mut self) -> PResult<Arg> {
        let span = self.span();
        match self.peek() {
            Some(TokenKind::Int(_)) => {
                let (n, span) = self.int()?;
                Ok(Arg::Int(n, span))
            }
            Some(TokenKind::LParen) => {
                self.pos += 1;
                let (u, _) = self.int()?;
                self.expect(TokenKind::Comma)?;
                let (v, _) = self.int()?;
                self.expect(TokenKind::RParen)?;
                Ok(Arg::Pair(u, v, span))
            }
            Some(TokenKind::Ident(_)) => {
                let (s, span) = self.ident("an identifier")?;
                Ok(Arg::Ident(s, span))
            }
            Some(TokenKind::Str(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(Arg::Str(s, span))
            }
            Some(TokenKind::LBracket) => {
                self.pos += 1;
                let mut items = Vec::new();
                if !self.eat(&TokenKind::RBracket) {
                    loop {
                        items.push(self.arg()?);
                        if self.eat(&TokenKind::RBracket) {
                            break;
                        }
                        self.expect(TokenKind::Comma)?;
                    }
                }
                Ok(Arg::List(items, span))
            }
            _ => Err(self.unexpected("an argument")),
        }
    }

    fn predicate(&mut self) -> PResult<()> {
        let (name, span) = self.ident("a predicate name or `}`")?;
        self.expect(TokenKind::LParen)?;
        let mut args = Vec::new();
        if !self.eat(&TokenKind::RParen) {
            loop {
                args.push(self.arg()?);
                if self.eat(&TokenKind::RParen) {
                    break;
                }
                self.expect(TokenKind::Comma)?;
            }
        }
        let arity = |n: &[usize]| -> PResult<()> {
            if n.contains(&args.len()) {
                Ok(())
            } else {
                let want = n
                    .iter()
                    .map(|k| k.to_string())
                    .collect::<Vec<_>>()
                    .join(" or ");
                Err(ParseDiagnostic::error(
                    ParseErrorKind::Syntax,
                    span,
                    format!("`{}` takes {} arguments, got {}", name, want, args.len()),
                ))
            }
        };
        let c = match name.as_str() {
            "node_goal" | "node_visit" | "node_avoid" | "edge_visit" | "edge_avoid" => {
                arity(&[2])?;
                let expect = if name.starts_with("node") {
                    Expect::Nodes
                } else {
                    Expect::Edges
                };
                let locs = location_selector(&args[0], expect)?;
                let agents = agent_selector(&args[1])?;
                match name.as_str() {
                    "node_goal" => Constraint::NodeGoal {
                        nodes: locs,
                        agents,
                    },
                    "node_visit" => Constraint::NodeVisit {
                        nodes: locs,
                        agents,
                    },
                    "node_avoid" => Constraint::NodeAvoid {
                        nodes: locs,
                        agents,
                    },
                    "edge_visit" => Constraint::EdgeVisit {
                        edges: locs,
                        agents,
                    },
                    _ => Constraint::EdgeAvoid {
                        edges: locs,
                        agents,
                    },
                }
            }
            "node_supported_from" => {
                arity(&[2])?;
                Constraint::NodeSupportedFrom {
                    nodes: location_selector(&args[0], Expect::Nodes)?,
                    from: single_node(&args[1])?,
                }
            }
            "support" => {
                arity(&[4])?;
                Constraint::Support {
                    unit1: single_ident(&args[0])?,
                    node1: single_node(&args[1])?,
                    unit2: single_ident(&args[2])?,
                    node2: single_node(&args[3])?,
                }
            }
            "agent_define" => {
                arity(&[2, 3])?;
                let name = single_ident(&args[0])?;
                let init = match &args[1] {
                    Arg::Int(n, s) => Location::Node(to_node(*n, *s)?),
                    Arg::Pair(u, v, s) => Location::Edge(to_edge(*u, *v, *s)?),
                    other => return Err(wrong_arg(other, "an initial node or edge")),
                };
                let mut agent = Agent::new(name, init);
                if let Some(tags) = args.get(2) {
                    let tags = match tags {
                        Arg::List(items, _) => items.clone(),
                        single => vec![single.clone()],
                    };
                    for t in &tags {
                        let tag = single_ident(t)?;
                        let key = next_tag_key(&agent.attrs);
                        agent.attrs.insert(key, AttrValue::Tag(tag));
                    }
                }
                self.builder.agents.push((agent, span));
                return Ok(());
            }
            "attribute" => {
                arity(&[2, 3])?;
                let agent = single_ident(&args[0])?;
                let (key, value) = if args.len() == 2 {
                    (None, AttrValue::Tag(single_ident(&args[1])?))
                } else {
                    let key = single_ident(&args[1])?;
                    let value = match &args[2] {
                        Arg::Int(n, _) => AttrValue::Number(*n as f64),
                        Arg::Ident(s, _) => AttrValue::Tag(s.clone()),
                        Arg::Str(s, _) => AttrValue::Text(s.clone()),
                        other => return Err(wrong_arg(other, "an attribute value")),
                    };
                    (Some(key), value)
                };
                self.builder.post_attrs.push((agent, key, value, span));
                return Ok(());
            }
            _ => {
                return Err(ParseDiagnostic::error(
                    ParseErrorKind::Syntax,
                    span,
                    format!("unknown predicate `{}`", name),
                ))
            }
        };
        self.builder.constraints.push((c, span));
        Ok(())
    }
}

fn to_node(n: u64, span: SourceSpan) -> PResult<NodeId> {
    u32::try_from(n).map(NodeId).map_err(|_| {
        ParseDiagnostic::error(
            ParseErrorKind::Overflow,
            span,
            format!("node id {} does not fit in 32 bits", n),
        )
    })
}

fn to_edge(u: u64, v: u64, span: SourceSpan) -> PResult<EdgeId> {
    let (u, v) = (to_node(u, span)?, to_node(v, span)?);
    normalize_edge(u, v)
        .map_err(|e| ParseDiagnostic::error(ParseErrorKind::Syntax, span, e.to_string()))
}

fn wrong_arg(arg: &Arg, expected: &str) -> ParseDiagnostic {
    ParseDiagnostic::error(
        ParseErrorKind::Syntax,
        arg.span(),
        format!("expected {}, found {}", expected, arg.describe()),
    )
}

fn single_ident(arg: &Arg) -> PResult<String> {
    match arg {
        Arg::Ident(s, _) => Ok(s.clone()),
        other => Err(wrong_arg(other, "an agent name")),
    }
}

fn single_node(arg: &Arg) -> PResult<NodeId> {
    match arg {
        Arg::Int(n, s) => to_node(*n, *s),
        other => Err(wrong_arg(other, "a node")),
    }
}

/// Quoted arguments are filter expressions when they parse as one; a filter
/// that is a single bare word is a tag query, and anything else is taken as a tag name.
fn string_selector(s: &str) -> Selector {
    match parse_filter(s) {
        Ok(crate::filter::FilterExpr::Tag(t)) => Selector::Tag(t),
        Ok(e) => Selector::Filter(e),
        Err(_) => Selector::Tag(s.to_string()),
    }
}

fn location_selector(arg: &Arg, expect: Expect) -> PResult<Selector> {
    match arg {
        Arg::Int(n, s) => Ok(Selector::Nodes(vec![to_node(*n, *s)?])),
        Arg::Pair(u, v, s) => Ok(Selector::Edges(vec![to_edge(*u, *v, *s)?])),
        Arg::Str(s, _) => Ok(string_selector(s)),
        Arg::List(items, span) => {
            if items.is_empty() {
                return Ok(match expect {
                    Expect::Nodes => Selector::Nodes(Vec::new()),
                    Expect::Edges => Selector::Edges(Vec::new()),
                });
            }
            if items.iter().all(|a| matches!(a, Arg::Int(..))) {
                let nodes = items
                    .iter()
                    .map(|a| match a {
                        Arg::Int(n, s) => to_node(*n, *s),
                        _ => unreachable!(),
                    })
                    .collect::<PResult<Vec<_>>>()?;
                Ok(Selector::Nodes(nodes))
            } else if items.iter().all(|a| matches!(a, Arg::Pair(..))) {
                let edges = items
                    .iter()
                    .map(|a| match a {
                        Arg::Pair(u, v, s) => to_edge(*u, *v, *s),
                        _ => unreachable!(),
                    })
                    .collect::<PResult<Vec<_>>>()?;
                Ok(Selector::Edges(edges))
            } else {
                Err(ParseDiagnostic::error(
                    ParseErrorKind::Syntax,
                    *span,
                    "a location list must contain only nodes or only edges",
                ))
            }
        }
        Arg::Ident(..) => Err(wrong_arg(arg, "a node, an edge, a list or a quoted filter")),
    }
}

fn agent_selector(arg: &Arg) -> PResult<Selector> {
    match arg {
        Arg::Ident(s, _) => Ok(Selector::Agents(vec![s.clone()])),
        Arg::Str(s, _) => Ok(string_selector(s)),
        Arg::List(items, _) => items
            .iter()
            .map(single_ident)
            .collect::<PResult<Vec<_>>>()
            .map(Selector::Agents),
        other => Err(wrong_arg(
            other,
            "an agent, a list of agents or a quoted filter",
        )),
    }
}
