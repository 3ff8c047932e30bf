//! Network topologies and graph distances.
//!
//! Node ids are dense integers `0..n`; every matrix in the crate is indexed
//! by them directly.

mod distance;
pub(crate) mod io;

use std::collections::{HashSet, VecDeque};

pub use distance::{
    all_pairs_graph_distance, build_distance_model, shortest_path_matrix, DistanceModel,
    SquareMatrix,
};
pub use io::{format_topology, parse_topology, read_topology, write_topology};

use crate::error::{Error, Result};
use crate::geometry::Point;

/// Largest topology the dense-matrix backends accept.
pub const MAX_NODES: usize = 20_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    /// Received signal strength over this link, dBm.
    pub rssi_dbm: f64,
}

/// An immutable, connected, undirected network.
#[derive(Clone, Debug, PartialEq)]
pub struct Topology {
    n: usize,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<usize>>,
    true_positions: Option<Vec<Point>>,
    boundary_truth: Option<Vec<bool>>,
}

impl Topology {
    pub fn new(
        n: usize,
        edges: Vec<Edge>,
        true_positions: Option<Vec<Point>>,
        boundary_truth: Option<Vec<bool>>,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::Degenerate("topology has no nodes".into()));
        }
        let mut seen = HashSet::with_capacity(edges.len());
        let mut adjacency = vec![Vec::new(); n];
        for e in &edges {
            if e.u >= n || e.v >= n {
                let id = if e.u >= n { e.u } else { e.v };
                return Err(Error::InvalidTopology(format!(
                    "edge references unknown node id {id}"
                )));
            }
            if e.u == e.v {
                return Err(Error::InvalidTopology(format!("self-loop on node {}", e.u)));
            }
            if !seen.insert((e.u.min(e.v), e.u.max(e.v))) {
                return Err(Error::InvalidTopology(format!(
                    "duplicate edge {} {}",
                    e.u, e.v
                )));
            }
            if !e.rssi_dbm.is_finite() {
                return Err(Error::InvalidTopology(format!(
                    "edge {} {} has non-finite rssi",
                    e.u, e.v
                )));
            }
            adjacency[e.u].push(e.v);
            adjacency[e.v].push(e.u);
        }
        if let Some(pos) = &true_positions {
            if pos.len() != n {
                return Err(Error::InvalidTopology(format!(
                    "true positions cover {} of {n} nodes",
                    pos.len()
                )));
            }
        }
        if let Some(flags) = &boundary_truth {
            if flags.len() != n {
                return Err(Error::InvalidTopology(format!(
                    "boundary labels cover {} of {n} nodes",
                    flags.len()
                )));
            }
        }
        let topo = Topology {
            n,
            edges,
            adjacency,
            true_positions,
            boundary_truth,
        };
        if let Some(unreachable) = topo.first_unreachable() {
            return Err(Error::Disconnected {
                from: 0,
                unreachable,
            });
        }
        Ok(topo)
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn average_degree(&self) -> f64 {
        2.0 * self.edges.len() as f64 / self.n as f64
    }

    pub fn true_positions(&self) -> Option<&[Point]> {
        self.true_positions.as_deref()
    }

    pub fn boundary_truth(&self) -> Option<&[bool]> {
        self.boundary_truth.as_deref()
    }

    pub fn with_boundary_truth(mut self, flags: Vec<bool>) -> Result<Self> {
        if flags.len() != self.n {
            return Err(Error::InvalidTopology(format!(
                "boundary labels cover {} of {} nodes",
                flags.len(),
                self.n
            )));
        }
        self.boundary_truth = Some(flags);
        Ok(self)
    }

    /// Hop distances from `src`, cut off at `max_hops` (`None` beyond it).
    pub fn hops_within(&self, src: usize, max_hops: usize) -> Vec<(usize, usize)> {
        let mut dist = vec![usize::MAX; self.n];
        let mut out = Vec::new();
        let mut queue = VecDeque::new();
        dist[src] = 0;
        queue.push_back(src);
        while let Some(u) = queue.pop_front() {
            out.push((u, dist[u]));
            if dist[u] == max_hops {
                continue;
            }
            for &w in &self.adjacency[u] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        out
    }

    /// Node with the highest degree, ties broken by the smallest id.
    pub fn max_degree_node(&self) -> usize {
        (0..self.n)
            .max_by(|&a, &b| self.degree(a).cmp(&self.degree(b)).then(b.cmp(&a)))
            .unwrap_or(0)
    }

    fn first_unreachable(&self) -> Option<usize> {
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for &w in &self.adjacency[u] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.iter().position(|s| !s)
    }
}

/// Connected components of an arbitrary edge list, as a component label per node.
/// Labels are assigned in order of each component's smallest node id.
pub fn component_labels(n: usize, edges: &[(usize, usize)]) -> Vec<usize> {
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in edges {
        adj[u].push(v);
        adj[v].push(u);
    }
    let mut label = vec![usize::MAX; n];
    let mut next = 0;
    for s in 0..n {
        if label[s] != usize::MAX {
            continue;
        }
        label[s] = next;
        let mut stack = vec![s];
        while let Some(u) = stack.pop() {
            for &w in &adj[u] {
                if label[w] == usize::MAX {
                    label[w] = next;
                    stack.push(w);
                }
            }
        }
        next += 1;
    }
    label
}
