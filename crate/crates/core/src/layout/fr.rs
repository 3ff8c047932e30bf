//! Fruchterman-Reingold force-directed placement.
//!
//! Attraction `f_a(d) = d²/k_a` acts along edges, repulsion
//! `f_r(d) = k_r²/d` acts between every pair. All nodes move together each
//! iteration by at most the displacement scale `s`, which shrinks as
//! `s ← s·(1 − it/max_iteration)`.

use super::{separation, Budget, Layout, RunTrace, Termination, TraceHook, Tracer};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::graph::Topology;

#[derive(Clone, Debug, PartialEq)]
pub struct FrParams {
    /// Attraction multiplier `a`.
    pub a: f64,
    /// Repulsion multiplier `r`.
    pub r_mult: f64,
    pub width: f64,
    pub height: f64,
    pub max_iteration: u64,
    /// Stop once the displacement scale drops below this.
    pub epsilon: f64,
    pub budget: Budget,
    pub rng_seed: u64,
}

impl Default for FrParams {
    fn default() -> Self {
        FrParams {
            a: 0.75,
            r_mult: 0.75,
            width: 600.0,
            height: 600.0,
            max_iteration: 1000,
            epsilon: 1e-6,
            budget: Budget::secs(60.0),
            rng_seed: 0,
        }
    }
}

impl FrParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("a", self.a),
            ("r_mult", self.r_mult),
            ("width", self.width),
            ("height", self.height),
            ("epsilon", self.epsilon),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParam(format!("{name} must be positive, got {v}")));
            }
        }
        if self.max_iteration == 0 {
            return Err(Error::InvalidParam("max_iteration must be positive".into()));
        }
        Ok(())
    }

    /// `(k_a, k_r)` for an `n`-node graph.
    pub fn constants(&self, n: usize) -> (f64, f64) {
        let base = (self.width * self.height / n as f64).sqrt();
        (self.a * base, self.r_mult * base)
    }
}

/// Displacement scale after `it` iterations.
pub fn displacement_scale(width: f64, max_iteration: u64, it: u64) -> f64 {
    let mut s = width / 10.0;
    for j in 1..=it {
        s *= 1.0 - j as f64 / max_iteration as f64;
    }
    s
}

/// Potential whose negative gradient is the FR force field:
/// `Σ_edges d³/(3k_a) − Σ_pairs k_r² ln d`.
pub fn fr_energy(layout: &Layout, topology: &Topology, k_a: f64, k_r: f64) -> f64 {
    let p = &layout.positions;
    let jitter = 1e-6 * layout.width;
    let mut e = 0.0;
    for edge in topology.edges() {
        let (_, d) = separation(edge.u, edge.v, p[edge.u], p[edge.v], jitter);
        e += d * d * d / (3.0 * k_a);
    }
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            let (_, d) = separation(i, j, p[i], p[j], jitter);
            e -= k_r * k_r * d.ln();
        }
    }
    e
}

pub fn fr_layout(
    topology: &Topology,
    params: &FrParams,
    hook: &mut dyn TraceHook,
) -> Result<(Layout, RunTrace)> {
    params.validate()?;
    let n = topology.node_count();
    let (w, h) = (params.width, params.height);
    let init = Layout::random(n, w, h, params.rng_seed);
    let (k_a, k_r) = params.constants(n);
    let jitter = 1e-6 * w;
    let mut pos = init.positions;
    let mut disp = vec![Point::default(); n];
    let mut s = w / 10.0;
    let mut it: u64 = 0;
    let energy = |pos: &[Point]| fr_energy(&Layout::new(pos.to_vec(), w, h), topology, k_a, k_r);

    let mut tracer = Tracer::start(params.budget, hook);
    tracer.sample(&pos, (w, h), energy(&pos), 0);
    let term = loop {
        if s < params.epsilon {
            break Termination::Epsilon;
        }
        if tracer.exhausted(it) {
            break Termination::Budget;
        }
        disp.iter_mut().for_each(|d| *d = Point::default());
        for i in 0..n {
            for j in i + 1..n {
                let (d, r) = separation(i, j, pos[i], pos[j], jitter);
                let f = d * (k_r * k_r / (r * r));
                disp[i] = disp[i] + f;
                disp[j] = disp[j] - f;
            }
        }
        for e in topology.edges() {
            let (d, r) = separation(e.u, e.v, pos[e.u], pos[e.v], jitter);
            let f = d * (r / k_a);
            disp[e.u] = disp[e.u] - f;
            disp[e.v] = disp[e.v] + f;
        }
        for (p, d) in pos.iter_mut().zip(&disp) {
            let len = d.norm();
            if len > 0.0 {
                *p = *p + *d * (len.min(s) / len);
            }
            p.x = p.x.clamp(-w / 2.0, w / 2.0);
            p.y = p.y.clamp(-h / 2.0, h / 2.0);
        }
        it += 1;
        s *= 1.0 - it as f64 / params.max_iteration as f64;
        if tracer.due() {
            tracer.sample(&pos, (w, h), energy(&pos), it);
        }
    };
    let e = energy(&pos);
    let trace = tracer.finish(&pos, (w, h), e, it, term);
    Ok((Layout::new(pos, w, h), trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Edge;
    use crate::layout::NoHook;

    fn pair() -> Topology {
        Topology::new(
            2,
            vec![Edge {
                u: 0,
                v: 1,
                rssi_dbm: -40.0,
            }],
            None,
            None,
        )
        .unwrap()
    }

    #[test]
    fn two_nodes_settle_at_force_balance() {
        let t = pair();
        let params = FrParams::default();
        let (k_a, _) = params.constants(2);
        let (l, trace) = fr_layout(&t, &params, &mut NoHook).unwrap();
        let d = l.positions[0].dist(l.positions[1]);
        assert!((d - k_a).abs() < 1e-3 * k_a, "{d} vs {k_a}");
        assert_eq!(trace.terminated_by, Termination::Epsilon);
    }

    #[test]
    fn scale_schedule_matches_product() {
        let mut s = 60.0;
        for it in 1..=50u64 {
            s *= 1.0 - it as f64 / 1000.0;
            assert!((displacement_scale(600.0, 1000, it) - s).abs() < 1e-12);
        }
        assert_eq!(displacement_scale(600.0, 1000, 0), 60.0);
    }
}
