use std::fmt::Write;

use crate::filter::format_number;
use crate::model::{
    AttrValue, Attributes, Constraint, Location, Mission, NodeId, Ontology, Selector,
};

/// Canonical source text for a mission. Parsing the output yields an equal mission.
pub fn print_mission(m: &Mission) -> String {
    let mut out = String::new();
    print_graph(m, &mut out);
    print_ontology(&m.ontology, &mut out);
    for a in &m.agents {
        let _ = write!(out, "agent {} {{ init: {}", a.name, a.init.source_form());
        for (k, v) in &a.attrs {
            let _ = write!(out, ", {}: {}", k, value(v));
        }
        out.push_str(" }\n");
    }
    out.push_str("constraints {\n");
    for c in &m.constraints {
        let _ = writeln!(out, "  {}", constraint(c));
    }
    out.push_str("}\n");
    out
}

fn print_graph(m: &Mission, out: &mut String) {
    out.push_str("graph {\n");
    let nodes: Vec<NodeId> = m.graph.nodes().collect();
    if !nodes.is_empty() {
        let mut ranges = Vec::new();
        let mut i = 0;
        while i < nodes.len() {
            let mut j = i;
            while j + 1 < nodes.len() && nodes[j + 1].0 == nodes[j].0 + 1 {
                j += 1;
            }
            ranges.push(if j > i {
                format!("{}..{}", nodes[i], nodes[j])
            } else {
                nodes[i].to_string()
            });
            i = j + 1;
        }
        let _ = writeln!(out, "  nodes {{ {} }}", ranges.join(", "));
    }
    for n in nodes {
        let loc = Location::Node(n);
        let props = props(m.graph.explicit_capacity(loc), m.graph.attrs(loc));
        if !props.is_empty() {
            let _ = writeln!(out, "  node {} {{ {} }}", n, props);
        }
    }
    for e in m.graph.edges() {
        let loc = Location::Edge(e);
        let props = props(m.graph.explicit_capacity(loc), m.graph.attrs(loc));
        if props.is_empty() {
            let _ = writeln!(out, "  edge {} {{}}", e);
        } else {
            let _ = writeln!(out, "  edge {} {{ {} }}", e, props);
        }
    }
    out.push_str("}\n");
}

fn props(capacity: Option<u32>, attrs: Option<&Attributes>) -> String {
    let mut parts = Vec::new();
    if let Some(c) = capacity {
        parts.push(format!("capacity: {}", c));
    }
    for (k, v) in attrs.into_iter().flatten() {
        parts.push(format!("{}: {}", k, value(v)));
    }
    parts.join(", ")
}

fn print_ontology(o: &Ontology, out: &mut String) {
    fn node(o: &Ontology, tag: &str, depth: usize, out: &mut String) {
        let indent = "  ".repeat(depth);
        let children = o.children(tag);
        if children.is_empty() {
            let _ = writeln!(out, "{}{}", indent, tag);
        } else {
            let _ = writeln!(out, "{}{} {{", indent, tag);
            for c in children {
                node(o, c, depth + 1, out);
            }
            let _ = writeln!(out, "{}}}", indent);
        }
    }
    out.push_str("ontology {\n");
    for r in o.roots() {
        node(o, r, 1, out);
    }
    out.push_str("}\n");
}

pub(crate) fn quote(s: &str) -> String {
    let mut q = String::with_capacity(s.len() + 2);
    q.push('"');
    for c in s.chars() {
        match c {
            '"' => q.push_str("\\\""),
            '\\' => q.push_str("\\\\"),
            '\n' => q.push_str("\\n"),
            '\t' => q.push_str("\\t"),
            c => q.push(c),
        }
    }
    q.push('"');
    q
}

fn value(v: &AttrValue) -> String {
    match v {
        AttrValue::Number(x) => format_number(*x),
        AttrValue::Text(s) => quote(s),
        AttrValue::Tag(t) => t.clone(),
    }
}

fn list<T>(items: &[T], f: impl Fn(&T) -> String) -> String {
    if items.len() == 1 {
        f(&items[0])
    } else {
        format!("[{}]", items.iter().map(f).collect::<Vec<_>>().join(", "))
    }
}

fn selector(s: &Selector) -> String {
    match s {
        Selector::Agents(a) => list(a, |x| x.clone()),
        Selector::Nodes(n) => list(n, |x| x.to_string()),
        Selector::Edges(e) => list(e, |x| x.to_string()),
        Selector::Tag(t) => quote(t),
        Selector::Filter(f) => quote(&f.to_string()),
    }
}

fn constraint(c: &Constraint) -> String {
    let name = c.predicate_name();
    match c {
        Constraint::NodeGoal { nodes, agents }
        | Constraint::NodeVisit { nodes, agents }
        | Constraint::NodeAvoid { nodes, agents } => {
            format!("{}({}, {})", name, selector(nodes), selector(agents))
        }
        Constraint::EdgeVisit { edges, agents } | Constraint::EdgeAvoid { edges, agents } => {
            format!("{}({}, {})", name, selector(edges), selector(agents))
        }
        Constraint::NodeSupportedFrom { nodes, from } => {
            format!("{}({}, {})", name, selector(nodes), from)
        }
        Constraint::Support {
            unit1,
            node1,
            unit2,
            node2,
        } => format!("{}({}, {}, {}, {})", name, unit1, node1, unit2, node2),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_mission;

    #[test]
    fn empty_mission_skeleton() {
        assert_eq!(
            print_mission(&Mission::default()),
            "graph {\n}\nontology {\n}\nconstraints {\n}\n"
        );
        let back = parse_mission(&print_mission(&Mission::default())).unwrap();
        assert_eq!(back.mission, Mission::default());
    }

    #[test]
    fn edges_print_in_canonical_order() {
        let m = parse_mission("graph { nodes {8, 9} edge (9, 8) {} }")
            .unwrap()
            .mission;
        let text = print_mission(&m);
        assert!(text.contains("  edge (8, 9) {}\n"), "{}", text);
        assert!(text.contains("  nodes { 8..9 }\n"));
    }

    #[test]
    fn round_trip_small() {
        let src = r#"
            graph { nodes {1..4, 7} node 4 { capacity: 2, label: "gate \"A\"" } edge (1,2) { width: 8.5 } edge (2,4) {} }
            ontology { UGV { wheeled tracked } UAV }
            agent a { init: 1, kind: wheeled, alt: -3 }
            agent b { init: (1, 2) }
            constraints {
                node_goal([4, 2], [a, b])
                edge_avoid("width < 10 and not tracked", "UGV")
                node_supported_from([4], 1)
                support(a, 2, b, 1)
                edge_visit([], a)
            }
        "#;
        let m = parse_mission(src).unwrap().mission;
        let printed = print_mission(&m);
        let again = parse_mission(&printed).unwrap().mission;
        assert_eq!(m, again, "{}", printed);
        assert_eq!(printed, print_mission(&again));
    }
}
