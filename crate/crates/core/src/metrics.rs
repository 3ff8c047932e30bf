//! Boundary detection on a finished layout and scoring against ground truth.

use crate::boundary::{alpha_shape_boundary, BoundaryLabeling};
use crate::error::{Error, Result};
use crate::graph::Topology;
use crate::layout::{Layout, TraceHook};

/// Default alpha as a multiple of the mean layout edge length.
pub const DEFAULT_DETECT_ALPHA_FACTOR: f64 = 1.5;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl ConfusionCounts {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Score {
    pub counts: ConfusionCounts,
    pub sensitivity: f64,
    pub specificity: f64,
    /// Same as sensitivity.
    pub tpr: f64,
    pub fnr: f64,
}

/// Mean Euclidean length of the topology's edges in `layout`.
pub fn mean_edge_length(layout: &Layout, topology: &Topology) -> f64 {
    let edges = topology.edges();
    if edges.is_empty() {
        return 0.0;
    }
    edges
        .iter()
        .map(|e| layout.positions[e.u].dist(layout.positions[e.v]))
        .sum::<f64>()
        / edges.len() as f64
}

/// Alpha-shape boundary of the layout, with alpha scaled to its mean edge
/// length.
pub fn detect_boundary(layout: &Layout, topology: &Topology, alpha_factor: f64) -> BoundaryLabeling {
    let alpha = alpha_factor * mean_edge_length(layout, topology);
    alpha_shape_boundary(&layout.positions, alpha, false)
}

/// Confusion counts and rates. A rate whose denominator is empty is 1.0.
pub fn score(pred: &BoundaryLabeling, truth: &BoundaryLabeling) -> Result<Score> {
    if pred.len() != truth.len() {
        return Err(Error::UniverseMismatch {
            left: pred.len(),
            right: truth.len(),
        });
    }
    let mut c = ConfusionCounts::default();
    for (&p, &t) in pred.flags.iter().zip(&truth.flags) {
        match (p, t) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, false) => c.tn += 1,
            (false, true) => c.fn_ += 1,
        }
    }
    let rate = |num: usize, den: usize| if den == 0 { 1.0 } else { num as f64 / den as f64 };
    let sensitivity = rate(c.tp, c.tp + c.fn_);
    Ok(Score {
        counts: c,
        sensitivity,
        specificity: rate(c.tn, c.tn + c.fp),
        tpr: sensitivity,
        fnr: if c.tp + c.fn_ == 0 {
            0.0
        } else {
            c.fn_ as f64 / (c.tp + c.fn_) as f64
        },
    })
}

/// Scores intermediate layouts of a run against a fixed truth.
pub struct ScoreHook<'a> {
    pub topology: &'a Topology,
    pub truth: &'a BoundaryLabeling,
    pub alpha_factor: f64,
}

impl TraceHook for ScoreHook<'_> {
    fn score(&mut self, layout: &Layout) -> Option<(f64, f64)> {
        let pred = detect_boundary(layout, self.topology, self.alpha_factor);
        score(&pred, self.truth)
            .ok()
            .map(|s| (s.sensitivity, s.specificity))
    }
}
