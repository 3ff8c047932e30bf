//! Stable-status ratio of a layout against reference edge lengths.

use crate::error::{Error, Result};
use crate::layout::Layout;
use crate::graph::Topology;

/// Edge-length fit of a layout plus the knobs that decide when it counts as
/// stable.
#[derive(Clone, Debug, PartialEq)]
pub struct StabilityState {
    /// Mean signed edge-length error after rescaling.
    pub me: f64,
    /// Standard deviation of the edge-length errors.
    pub sigma: f64,
    /// Mean absolute error over `sigma`; 0 when `sigma` is 0.
    pub r: f64,
    /// Rounds between checks.
    pub tt: u64,
    pub epsilon_r: f64,
    /// Checks without improvement before the layout counts as stable.
    pub stall_window: u32,
}

impl Default for StabilityState {
    fn default() -> Self {
        StabilityState {
            me: 0.0,
            sigma: 0.0,
            r: 0.0,
            tt: 100,
            epsilon_r: 0.1,
            stall_window: 3,
        }
    }
}

/// Fit of layout edge lengths to `reference_lengths` (one per topology
/// edge), over edges with both ends in `scope` (all edges when `None`).
/// Layout lengths are first rescaled by the least-squares factor.
pub fn stability_ratio(
    layout: &Layout,
    topology: &Topology,
    reference_lengths: &[f64],
    scope: Option<&[bool]>,
) -> Result<StabilityState> {
    if reference_lengths.len() != topology.edge_count() {
        return Err(Error::InvalidParam(format!(
            "{} reference lengths for {} edges",
            reference_lengths.len(),
            topology.edge_count()
        )));
    }
    let pairs: Vec<(f64, f64)> = topology
        .edges()
        .iter()
        .zip(reference_lengths)
        .filter(|(e, _)| scope.is_none_or(|s| s[e.u] && s[e.v]))
        .map(|(e, &l)| (layout.positions[e.u].dist(layout.positions[e.v]), l))
        .collect();
    if pairs.is_empty() {
        return Err(Error::NoEdgesInScope);
    }
    let cnt = pairs.len() as f64;
    let (num, den) = pairs
        .iter()
        .fold((0.0, 0.0), |(a, b), &(lh, l)| (a + lh * l, b + lh * lh));
    let c = if den > 0.0 { num / den } else { 0.0 };
    let diffs: Vec<f64> = pairs.iter().map(|&(lh, l)| c * lh - l).collect();
    let me = diffs.iter().sum::<f64>() / cnt;
    let sigma = (diffs.iter().map(|d| (d - me) * (d - me)).sum::<f64>() / cnt).sqrt();
    let mae = diffs.iter().map(|d| d.abs()).sum::<f64>() / cnt;
    let r = if sigma > 0.0 { mae / sigma } else { 0.0 };
    Ok(StabilityState {
        me,
        sigma,
        r,
        ..StabilityState::default()
    })
}

/// Tracks whether `r` keeps improving by a relative margin.
#[derive(Clone, Debug)]
pub struct StallTracker {
    best: f64,
    stalls: u32,
    window: u32,
    margin: f64,
}

impl StallTracker {
    pub fn new(window: u32, margin: f64) -> Self {
        StallTracker {
            best: f64::INFINITY,
            stalls: 0,
            window,
            margin,
        }
    }

    /// Records a check; `true` once `window` checks in a row failed to
    /// improve on the best value by the margin.
    pub fn observe(&mut self, r: f64) -> bool {
        if r < self.best * (1.0 - self.margin) || self.best.is_infinite() {
            self.best = r;
            self.stalls = 0;
        } else {
            self.stalls += 1;
        }
        self.stalls >= self.window
    }

    pub fn reset(&mut self) {
        self.best = f64::INFINITY;
        self.stalls = 0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;
    use crate::graph::Edge;

    fn path(n: usize) -> Topology {
        let edges = (1..n)
            .map(|v| Edge {
                u: v - 1,
                v,
                rssi_dbm: -50.0,
            })
            .collect();
        Topology::new(n, edges, None, None).unwrap()
    }

    #[test]
    fn proportional_lengths_give_zero() {
        let t = path(4);
        let l = Layout::new(
            vec![
                Point::new(0.0, 0.0),
                Point::new(2.0, 0.0),
                Point::new(2.0, 4.0),
                Point::new(8.0, 4.0),
            ],
            10.0,
            10.0,
        );
        let s = stability_ratio(&l, &t, &[1.0, 2.0, 3.0], None).unwrap();
        assert!(s.me.abs() < 1e-12 && s.r == 0.0 || s.sigma < 1e-12);
    }

    #[test]
    fn symmetric_unit_errors() {
        let t = path(3);
        let l = Layout::new(
            vec![Point::new(0.0, 0.0), Point::new(5.0, 0.0), Point::new(10.0, 0.0)],
            10.0,
            10.0,
        );
        let s = stability_ratio(&l, &t, &[4.0, 6.0], None).unwrap();
        assert!(s.me.abs() < 1e-12);
        assert!((s.sigma - 1.0).abs() < 1e-12);
        assert!((s.r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empty_scope_is_an_error() {
        let t = path(3);
        let l = Layout::random(3, 10.0, 10.0, 0);
        let err = stability_ratio(&l, &t, &[1.0, 1.0], Some(&[true, false, true])).unwrap_err();
        assert_eq!(err.to_string(), "no edges in scope");
    }

    #[test]
    fn stall_needs_a_full_window() {
        let mut s = StallTracker::new(3, 0.01);
        assert!(!s.observe(1.0));
        assert!(!s.observe(0.5));
        assert!(!s.observe(0.499));
        assert!(!s.observe(0.498));
        assert!(s.observe(0.497));
    }
}
