//! Depth-first search over joint moves for a fixed horizon.
//!
//! Agents are assigned one at a time within each timestep; partial
//! assignments are cut as soon as a capacity, avoid or support rule fails or
//! an obligation can no longer be met in the time left.

use std::collections::HashMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::compiled::{Compiled, Obligation};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Aborted;

const CHECK_EVERY: u64 = 1024;

pub(crate) struct Search<'c> {
    c: &'c Compiled,
    /// Joint state -> largest number of remaining steps known to fail.
    ///
    /// Waiting is always legal and keeps every rule satisfied, so failing
    /// with `r` steps left implies failing with any smaller number.
    memo: HashMap<Vec<u16>, u16>,
    deadline: Instant,
    nodes: u64,
    tie: Vec<Vec<u64>>,
    closes_goal: Vec<Vec<usize>>,
    closes_visit: Vec<Vec<usize>>,
    closes_support: Vec<Vec<usize>>,
    /// Goal indices grouped by node.
    goal_nodes: Vec<Vec<usize>>,
    /// (agent, visit, goal) where the agent is the only one able to do both.
    chained: Vec<(usize, usize, usize)>,
}

fn last_agent(agents: &[usize]) -> usize {
    agents.iter().copied().max().expect("non-empty agent set")
}

impl<'c> Search<'c> {
    pub fn new(c: &'c Compiled, seed: u64, deadline: Instant) -> Self {
        let n = c.agent_count();
        let tie = if seed == 0 {
            vec![vec![0; c.locs.len()]; n]
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..n)
                .map(|_| (0..c.locs.len()).map(|_| rng.gen()).collect())
                .collect()
        };
        let mut closes_goal = vec![Vec::new(); n];
        for (i, g) in c.goals.iter().enumerate() {
            closes_goal[last_agent(&g.agents)].push(i);
        }
        let mut closes_visit = vec![Vec::new(); n];
        for (i, v) in c.visits.iter().enumerate() {
            closes_visit[last_agent(&v.agents)].push(i);
        }
        let mut closes_support = vec![Vec::new(); n];
        for (i, &(u1, _, u2, _)) in c.supports.iter().enumerate() {
            closes_support[u1.max(u2)].push(i);
        }
        let mut by_node: Vec<(u16, Vec<usize>)> = Vec::new();
        for (i, g) in c.goals.iter().enumerate() {
            match by_node.iter_mut().find(|(l, _)| *l == g.loc) {
                Some((_, v)) => v.push(i),
                None => by_node.push((g.loc, vec![i])),
            }
        }
        let mut chained = Vec::new();
        for (vi, v) in c.visits.iter().enumerate() {
            for (gi, g) in c.goals.iter().enumerate() {
                if let ([a], [b]) = (v.agents.as_slice(), g.agents.as_slice()) {
                    if a == b {
                        chained.push((*a, vi, gi));
                    }
                }
            }
        }
        Search {
            c,
            memo: HashMap::new(),
            deadline,
            nodes: 0,
            tie,
            closes_goal,
            closes_visit,
            closes_support,
            goal_nodes: by_node.into_iter().map(|(_, v)| v).collect(),
            chained,
        }
    }

    /// Trajectory of joint positions for `horizon` steps, if one exists.
    pub fn run(&mut self, horizon: usize) -> Result<Option<Vec<Vec<u16>>>, Aborted> {
        let init = self.c.init.clone();
        let visited = self.mark_visits(&init, &vec![false; self.c.visits.len()]);
        let r = u16::try_from(horizon).unwrap_or(u16::MAX - 1);
        let mut path = Vec::new();
        if self.dfs(r, &init, &visited, &mut path)? {
            path.push(init);
            path.reverse();
            Ok(Some(path))
        } else {
            Ok(None)
        }
    }

    fn tick(&mut self) -> Result<(), Aborted> {
        self.nodes += 1;
        if self.nodes.is_multiple_of(CHECK_EVERY) && Instant::now() >= self.deadline {
            return Err(Aborted);
        }
        Ok(())
    }

    fn mark_visits(&self, pos: &[u16], visited: &[bool]) -> Vec<bool> {
        self.c
            .visits
            .iter()
            .zip(visited)
            .map(|(v, &done)| done || v.agents.iter().any(|&a| pos[a] == v.loc))
            .collect()
    }

    fn reachable(&self, ob: &Obligation, pos: &[u16], r: u16) -> bool {
        ob.agents.iter().any(|&a| self.c.dist(a, ob, pos[a]) <= r)
    }

    /// Admissible test: can every outstanding obligation still be met in `r` steps?
    fn bounds_ok(&self, pos: &[u16], visited: &[bool], r: u16) -> bool {
        let c = self.c;
        for (v, &done) in c.visits.iter().zip(visited) {
            if !done && !self.reachable(v, pos, r) {
                return false;
            }
        }
        if !c.goals.iter().all(|g| self.reachable(g, pos, r)) {
            return false;
        }
        for &(a, vi, gi) in &self.chained {
            if visited[vi] {
                continue;
            }
            let (v, g) = (&c.visits[vi], &c.goals[gi]);
            let d = c.dist(a, v, pos[a]) as u32 + c.dist(a, g, v.loc) as u32;
            if d > r as u32 {
                return false;
            }
        }
        if self.goal_nodes.len() > 1 {
            return self.goal_matching(pos, r);
        }
        true
    }

    /// Distinct goal nodes need distinct agents at the final step.
    fn goal_matching(&self, pos: &[u16], r: u16) -> bool {
        let c = self.c;
        let eligible: Vec<Vec<usize>> = self
            .goal_nodes
            .iter()
            .map(|group| {
                let mut agents: Vec<usize> = group
                    .iter()
                    .flat_map(|&gi| {
                        let g = &c.goals[gi];
                        g.agents
                            .iter()
                            .copied()
                            .filter(move |&a| c.dist(a, g, pos[a]) <= r)
                    })
                    .collect();
                agents.sort_unstable();
                agents.dedup();
                agents
            })
            .collect();
        let mut owner: Vec<Option<usize>> = vec![None; c.agent_count()];
        fn augment(
            u: usize,
            eligible: &[Vec<usize>],
            seen: &mut [bool],
            owner: &mut [Option<usize>],
        ) -> bool {
            for &a in &eligible[u] {
                if seen[a] {
                    continue;
                }
                seen[a] = true;
                if owner[a].is_none_or(|w| augment(w, eligible, seen, owner)) {
                    owner[a] = Some(u);
                    return true;
                }
            }
            false
        }
        (0..eligible.len()).all(|u| {
            let mut seen = vec![false; c.agent_count()];
            augment(u, &eligible, &mut seen, &mut owner)
        })
    }

    fn key(pos: &[u16], visited: &[bool]) -> Vec<u16> {
        let mut k = pos.to_vec();
        for chunk in visited.chunks(16) {
            k.push(
                chunk
                    .iter()
                    .enumerate()
                    .fold(0u16, |acc, (i, &b)| acc | ((b as u16) << i)),
            );
        }
        k
    }

    /// Candidate next locations per agent, best first.
    ///
    /// Each open obligation is assigned to its closest eligible agent, which
    /// then prefers moves that approach it; other agents prefer to wait.
    fn candidates(&self, pos: &[u16], visited: &[bool]) -> Vec<Vec<u16>> {
        let c = self.c;
        let n = c.agent_count();
        let mut target: Vec<Option<(&Obligation, u16)>> = vec![None; n];
        let open_visits = c
            .visits
            .iter()
            .zip(visited)
            .filter(|(_, &d)| !d)
            .map(|(v, _)| v);
        for (phase, ob) in open_visits
            .map(|v| (0, v))
            .chain(c.goals.iter().map(|g| (1, g)))
        {
            let best = ob
                .agents
                .iter()
                .map(|&a| (c.dist(a, ob, pos[a]), self.tie[a][ob.loc as usize], a))
                .min()
                .expect("non-empty agent set");
            let (d, _, a) = best;
            let better = match target[a] {
                None => true,
                // a visit target is kept over any goal
                Some((_, cur)) => phase == 0 && d < cur,
            };
            if better {
                target[a] = Some((ob, d));
            }
        }
        (0..n)
            .map(|a| {
                let here = pos[a];
                let mut opts: Vec<u16> = c.succ[here as usize]
                    .iter()
                    .copied()
                    .filter(|&l| !c.avoid[a][l as usize])
                    .collect();
                match target[a] {
                    Some((ob, _)) => {
                        opts.sort_by_key(|&l| (c.dist(a, ob, l), self.tie[a][l as usize], l))
                    }
                    None => opts.sort_by_key(|&l| (l != here, self.tie[a][l as usize], l)),
                }
                opts
            })
            .collect()
    }

    fn dfs(
        &mut self,
        r: u16,
        pos: &[u16],
        visited: &[bool],
        path: &mut Vec<Vec<u16>>,
    ) -> Result<bool, Aborted> {
        if !self.bounds_ok(pos, visited, r) {
            return Ok(false);
        }
        if r == 0 {
            // bounds with zero steps left: every visit done, every goal occupied
            return Ok(true);
        }
        let key = Self::key(pos, visited);
        if self.memo.get(&key).is_some_and(|&failed| failed >= r) {
            return Ok(false);
        }
        let order = self.candidates(pos, visited);
        let mut step = Step {
            r,
            pos,
            visited,
            order: &order,
            next: vec![0; pos.len()],
            count: vec![0; self.c.locs.len()],
        };
        let found = self.assign(0, &mut step, path)?;
        if !found {
            let e = self.memo.entry(key).or_insert(0);
            *e = (*e).max(r);
        }
        Ok(found)
    }

    fn assign(
        &mut self,
        a: usize,
        s: &mut Step<'_>,
        path: &mut Vec<Vec<u16>>,
    ) -> Result<bool, Aborted> {
        let c = self.c;
        if a == s.next.len() {
            if !c.support_ok(&s.next) {
                return Ok(false);
            }
            let next = s.next.clone();
            let visited = self.mark_visits(&next, s.visited);
            if self.dfs(s.r - 1, &next, &visited, path)? {
                path.push(next);
                return Ok(true);
            }
            return Ok(false);
        }
        for i in 0..s.order[a].len() {
            let l = s.order[a][i];
            if s.count[l as usize] >= c.cap[l as usize] {
                continue;
            }
            self.tick()?;
            s.next[a] = l;
            s.count[l as usize] += 1;
            if self.partial_ok(a, s) && self.assign(a + 1, s, path)? {
                return Ok(true);
            }
            s.count[l as usize] -= 1;
        }
        Ok(false)
    }

    /// Rules that can be decided once agents `0..=a` have moved.
    fn partial_ok(&self, a: usize, s: &Step<'_>) -> bool {
        let c = self.c;
        let left = s.r - 1;
        let next = &s.next;
        // two agents trading places would cross on the road
        let here = s.pos[a];
        if next[a] != here && (0..a).any(|b| s.pos[b] == next[a] && next[b] == here) {
            return false;
        }
        for &i in &self.closes_support[a] {
            let (u1, n1, u2, n2) = c.supports[i];
            if next[u1] == n1 && next[u2] != n2 {
                return false;
            }
        }
        for &(n1, n2) in &c.supported_from {
            if next[a] != n1 {
                continue;
            }
            let helped = (0..next.len()).any(|b| {
                b != a
                    && if b < a {
                        next[b] == n2
                    } else {
                        !c.avoid[b][n2 as usize] && c.succ[s.pos[b] as usize].contains(&n2)
                    }
            });
            if !helped {
                return false;
            }
        }
        for &gi in &self.closes_goal[a] {
            if !self.reachable(&c.goals[gi], next, left) {
                return false;
            }
        }
        for &vi in &self.closes_visit[a] {
            if !s.visited[vi] && !self.reachable(&c.visits[vi], next, left) {
                return false;
            }
        }
        true
    }
}

struct Step<'a> {
    r: u16,
    pos: &'a [u16],
    visited: &'a [bool],
    order: &'a [Vec<u16>],
    next: Vec<u16>,
    count: Vec<u32>,
}
