//! The starting area: a growing set of nodes laid out before the rest.

use crate::graph::Topology;

#[derive(Clone, Debug, PartialEq)]
pub struct StartingArea {
    flags: Vec<bool>,
    members: Vec<usize>,
    /// Number of expansions so far.
    pub generation: u32,
}

impl StartingArea {
    /// The highest-degree node and everything within `hops` of it.
    pub fn seed(topology: &Topology, hops: usize) -> Self {
        let mut a = StartingArea {
            flags: vec![false; topology.node_count()],
            members: Vec::new(),
            generation: 0,
        };
        for (v, _) in topology.hops_within(topology.max_degree_node(), hops) {
            a.insert(v);
        }
        a
    }

    pub fn from_members(n: usize, members: impl IntoIterator<Item = usize>) -> Self {
        let mut a = StartingArea {
            flags: vec![false; n],
            members: Vec::new(),
            generation: 0,
        };
        for v in members {
            a.insert(v);
        }
        a
    }

    fn insert(&mut self, v: usize) -> bool {
        if self.flags[v] {
            return false;
        }
        self.flags[v] = true;
        self.members.push(v);
        true
    }

    pub fn contains(&self, v: usize) -> bool {
        self.flags[v]
    }

    pub fn flags(&self) -> &[bool] {
        &self.flags
    }

    /// Members in order of insertion.
    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.members.len() == self.flags.len()
    }

    /// Adds every node within `hops` of the area. Returns the new nodes
    /// with their hop distance from the old area, nearest first.
    pub fn expand(&mut self, topology: &Topology, hops: usize) -> Vec<(usize, usize)> {
        let n = self.flags.len();
        let mut dist = vec![usize::MAX; n];
        let mut frontier: Vec<usize> = self.members.clone();
        for &v in &frontier {
            dist[v] = 0;
        }
        let mut added = Vec::new();
        for h in 1..=hops {
            let mut next = Vec::new();
            for &u in &frontier {
                for &w in topology.neighbors(u) {
                    if dist[w] == usize::MAX {
                        dist[w] = h;
                        next.push(w);
                    }
                }
            }
            next.sort_unstable();
            added.extend(next.iter().map(|&v| (v, h)));
            frontier = next;
        }
        for &(v, _) in &added {
            self.insert(v);
        }
        self.generation += 1;
        added
    }
}
