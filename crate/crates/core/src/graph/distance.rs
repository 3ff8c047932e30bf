use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use super::Topology;
use crate::error::{Error, Result};

/// Dense row-major `n × n` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SquareMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn filled(n: usize, value: f64) -> Self {
        SquareMatrix {
            n,
            data: vec![value; n * n],
        }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        SquareMatrix { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    /// Maximum over `i < j`.
    pub fn max_off_diagonal(&self) -> f64 {
        let mut best = f64::NEG_INFINITY;
        for i in 0..self.n {
            for &v in &self.row(i)[i + 1..] {
                best = best.max(v);
            }
        }
        best
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> SquareMatrix {
        SquareMatrix {
            n: self.n,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }
}

#[derive(Clone, Copy, PartialEq)]
struct HeapEntry {
    dist: f64,
    node: usize,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on distance
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// All-pairs shortest paths over a raw edge list: BFS per source when
/// `weights` is `None`, Dijkstra per source otherwise.
pub fn shortest_path_matrix(
    n: usize,
    edges: &[(usize, usize)],
    weights: Option<&[f64]>,
) -> Result<SquareMatrix> {
    if let Some(w) = weights {
        if w.len() != edges.len() {
            return Err(Error::InvalidParam(format!(
                "{} edge weights for {} edges",
                w.len(),
                edges.len()
            )));
        }
        if let Some((i, bad)) = w.iter().enumerate().find(|(_, &x)| !(x > 0.0 && x.is_finite())) {
            return Err(Error::InvalidParam(format!(
                "edge {i} has non-positive length {bad}"
            )));
        }
    }
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (idx, &(u, v)) in edges.iter().enumerate() {
        let w = weights.map_or(1.0, |w| w[idx]);
        adj[u].push((v, w));
        adj[v].push((u, w));
    }

    let mut out = SquareMatrix::filled(n, f64::INFINITY);
    let mut row = vec![f64::INFINITY; n];
    let mut queue = VecDeque::new();
    let mut heap = BinaryHeap::new();
    for src in 0..n {
        row.fill(f64::INFINITY);
        row[src] = 0.0;
        if weights.is_none() {
            queue.push_back(src);
            while let Some(u) = queue.pop_front() {
                for &(w, _) in &adj[u] {
                    if row[w].is_infinite() {
                        row[w] = row[u] + 1.0;
                        queue.push_back(w);
                    }
                }
            }
        } else {
            heap.push(HeapEntry { dist: 0.0, node: src });
            while let Some(HeapEntry { dist, node }) = heap.pop() {
                if dist > row[node] {
                    continue;
                }
                for &(w, len) in &adj[node] {
                    let cand = dist + len;
                    if cand < row[w] {
                        row[w] = cand;
                        heap.push(HeapEntry { dist: cand, node: w });
                    }
                }
            }
        }
        if let Some(unreachable) = row.iter().position(|d| d.is_infinite()) {
            return Err(Error::Disconnected {
                from: src,
                unreachable,
            });
        }
        out.data[src * n..(src + 1) * n].copy_from_slice(&row);
    }
    // Dijkstra rows are computed independently; mirror the upper triangle so
    // the result is exactly symmetric.
    for i in 0..n {
        for j in i + 1..n {
            let v = out.get(i, j);
            out.set(j, i, v);
        }
    }
    Ok(out)
}

/// Shortest-path distances between every node pair; hop counts when
/// `edge_weights` is `None`, summed edge lengths otherwise.
pub fn all_pairs_graph_distance(
    topology: &Topology,
    edge_weights: Option<&[f64]>,
) -> Result<SquareMatrix> {
    let edges: Vec<(usize, usize)> = topology.edges().iter().map(|e| (e.u, e.v)).collect();
    shortest_path_matrix(topology.node_count(), &edges, edge_weights)
}

/// Graph distances together with the ideal spring lengths and stiffnesses
/// derived from them.
#[derive(Clone, Debug)]
pub struct DistanceModel {
    /// Graph distances.
    pub d: SquareMatrix,
    /// Ideal spring lengths, drawing units.
    pub l: SquareMatrix,
    /// Spring stiffnesses.
    pub k: SquareMatrix,
    /// Side length of the drawing frame.
    pub l0: f64,
    /// Stiffness scale constant.
    pub k_scale: f64,
}

impl DistanceModel {
    pub fn node_count(&self) -> usize {
        self.d.dim()
    }

    /// Mean ideal length over all node pairs.
    pub fn mean_ideal_length(&self) -> f64 {
        let n = self.node_count();
        let mut sum = 0.0;
        for i in 0..n {
            sum += self.l.row(i)[i + 1..].iter().sum::<f64>();
        }
        sum / (n * (n - 1) / 2) as f64
    }
}

/// `l_ij = l0 · d_ij / max d`, `k_ij = k_scale / d_ij²`.
pub fn build_distance_model(d: SquareMatrix, l0: f64, k_scale: f64) -> Result<DistanceModel> {
    let n = d.dim();
    if n < 2 {
        return Err(Error::Degenerate(format!("{n} node(s)")));
    }
    if !(l0 > 0.0 && l0.is_finite()) {
        return Err(Error::InvalidParam(format!("frame side must be positive, got {l0}")));
    }
    if !(k_scale > 0.0 && k_scale.is_finite()) {
        return Err(Error::InvalidParam(format!(
            "stiffness scale must be positive, got {k_scale}"
        )));
    }
    for i in 0..n {
        if d.get(i, i) != 0.0 {
            return Err(Error::InvalidParam(format!("d[{i}][{i}] is not zero")));
        }
        for j in i + 1..n {
            let v = d.get(i, j);
            if v != d.get(j, i) {
                return Err(Error::InvalidParam(format!("d is not symmetric at ({i}, {j})")));
            }
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParam(format!("d[{i}][{j}] = {v} is not positive")));
            }
        }
    }
    let diameter = d.max_off_diagonal();
    let unit = l0 / diameter;
    let l = d.map(|v| unit * v);
    let k = SquareMatrix::from_fn(n, |i, j| {
        if i == j {
            0.0
        } else {
            let dij = d.get(i, j);
            k_scale / (dij * dij)
        }
    });
    Ok(DistanceModel {
        d,
        l,
        k,
        l0,
        k_scale,
    })
}
