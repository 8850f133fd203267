use std::collections::{HashMap, VecDeque};

use crate::analysis::{GroundConstraint, GroundMission};
use crate::model::Location;

pub(crate) const INF: u16 = u16::MAX;

/// A goal or visit obligation: some agent in `agents` must be at `target`.
#[derive(Debug, Clone)]
pub(crate) struct Obligation {
    pub loc: u16,
    /// Index into `Compiled::targets`.
    pub target: usize,
    pub agents: Vec<usize>,
}

/// Index-based form of a ground mission used by the search.
#[derive(Debug, Clone)]
pub(crate) struct Compiled {
    pub locs: Vec<Location>,
    pub succ: Vec<Vec<u16>>,
    pub cap: Vec<u32>,
    pub names: Vec<String>,
    pub init: Vec<u16>,
    /// `avoid[a][l]`: agent `a` may never occupy `l`.
    pub avoid: Vec<Vec<bool>>,
    pub goals: Vec<Obligation>,
    pub visits: Vec<Obligation>,
    /// (supported node, support node)
    pub supported_from: Vec<(u16, u16)>,
    /// (unit1, node1, unit2, node2)
    pub supports: Vec<(usize, u16, usize, u16)>,
    pub targets: Vec<u16>,
    /// `dist[a][k][l]`: steps from `l` to `targets[k]` for agent `a`, never
    /// entering a location `a` avoids.
    pub dist: Vec<Vec<Vec<u16>>>,
}

impl Compiled {
    pub fn new(gm: &GroundMission) -> Self {
        let locs: Vec<Location> = gm.graph.locations().collect();
        let index: HashMap<Location, u16> = locs
            .iter()
            .enumerate()
            .map(|(i, &l)| (l, i as u16))
            .collect();
        let succ = locs
            .iter()
            .map(|&l| {
                gm.graph
                    .successors(l)
                    .expect("declared location")
                    .into_iter()
                    .map(|s| index[&s])
                    .collect()
            })
            .collect();
        let cap = locs.iter().map(|&l| gm.graph.capacity(l)).collect();
        let names: Vec<String> = gm.agents.iter().map(|a| a.name.clone()).collect();
        let agent = |n: &str| names.iter().position(|x| x == n).expect("resolved agent");
        let init = gm.agents.iter().map(|a| index[&a.init]).collect();

        let mut avoid = vec![vec![false; locs.len()]; names.len()];
        let mut goals = Vec::new();
        let mut visits = Vec::new();
        let mut supported_from = Vec::new();
        let mut supports = Vec::new();
        let mut targets: Vec<u16> = Vec::new();
        let mut target_of = |l: u16| match targets.iter().position(|&t| t == l) {
            Some(k) => k,
            None => {
                targets.push(l);
                targets.len() - 1
            }
        };
        for g in &gm.ground {
            match g {
                GroundConstraint::NodeAvoid { .. } | GroundConstraint::EdgeAvoid { .. } => {
                    let (l, agents) = g.target().expect("avoid target");
                    for a in agents {
                        avoid[agent(a)][index[&l] as usize] = true;
                    }
                }
                GroundConstraint::NodeGoal { .. }
                | GroundConstraint::NodeVisit { .. }
                | GroundConstraint::EdgeVisit { .. } => {
                    let (l, agents) = g.target().expect("obligation target");
                    let loc = index[&l];
                    let ob = Obligation {
                        loc,
                        target: target_of(loc),
                        agents: agents.iter().map(|a| agent(a)).collect(),
                    };
                    if matches!(g, GroundConstraint::NodeGoal { .. }) {
                        goals.push(ob);
                    } else {
                        visits.push(ob);
                    }
                }
                GroundConstraint::NodeSupportedFrom { node, from } => supported_from
                    .push((index[&Location::Node(*node)], index[&Location::Node(*from)])),
                GroundConstraint::Support {
                    unit1,
                    node1,
                    unit2,
                    node2,
                } => supports.push((
                    agent(unit1),
                    index[&Location::Node(*node1)],
                    agent(unit2),
                    index[&Location::Node(*node2)],
                )),
            }
        }

        let mut c = Compiled {
            locs,
            succ,
            cap,
            names,
            init,
            avoid,
            goals,
            visits,
            supported_from,
            supports,
            targets,
            dist: Vec::new(),
        };
        c.dist = (0..c.names.len())
            .map(|a| {
                c.targets
                    .iter()
                    .map(|&t| c.bfs_from(t, &c.avoid[a]))
                    .collect()
            })
            .collect();
        c
    }

    fn bfs_from(&self, start: u16, blocked: &[bool]) -> Vec<u16> {
        let mut d = vec![INF; self.locs.len()];
        if blocked[start as usize] {
            return d;
        }
        d[start as usize] = 0;
        let mut q = VecDeque::from([start]);
        while let Some(l) = q.pop_front() {
            let next = d[l as usize] + 1;
            for &s in &self.succ[l as usize] {
                if !blocked[s as usize] && d[s as usize] == INF {
                    d[s as usize] = next;
                    q.push_back(s);
                }
            }
        }
        d
    }

    pub fn agent_count(&self) -> usize {
        self.names.len()
    }

    pub fn dist(&self, a: usize, ob: &Obligation, l: u16) -> u16 {
        self.dist[a][ob.target][l as usize]
    }

    /// Capacity, avoid and support rules hold for one joint configuration.
    pub fn state_ok(&self, pos: &[u16]) -> bool {
        let mut count = vec![0u32; self.locs.len()];
        for (a, &l) in pos.iter().enumerate() {
            count[l as usize] += 1;
            if self.avoid[a][l as usize] {
                return false;
            }
        }
        if count.iter().zip(&self.cap).any(|(n, c)| n > c) {
            return false;
        }
        self.support_ok(pos)
    }

    pub fn support_ok(&self, pos: &[u16]) -> bool {
        for &(n1, n2) in &self.supported_from {
            for (a, &l) in pos.iter().enumerate() {
                if l == n1 && !pos.iter().enumerate().any(|(b, &m)| b != a && m == n2) {
                    return false;
                }
            }
        }
        self.supports
            .iter()
            .all(|&(u1, n1, u2, n2)| pos[u1] != n1 || pos[u2] == n2)
    }
}
