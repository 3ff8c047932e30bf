//! Kamada-Kawai spring embedding.
//!
//! The energy is `E = Σ_{i<j} ½ k_ij (|p_i − p_j| − l_ij)²`. Each step picks
//! the node with the largest gradient norm `Δ_m` and moves it by 2×2
//! Newton-Raphson iterations with every other node held fixed.

use super::{separation, Budget, Layout, NoHook, RunTrace, Termination, TraceHook, Tracer};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::graph::{DistanceModel, Topology};

/// Coincident-node offset as a fraction of the frame side.
pub const JITTER_FRACTION: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct KkParams {
    /// Stiffness scale constant `K`.
    pub k_scale: f64,
    /// Drawing frame side `L0`.
    pub l0: f64,
    /// Stop once every `Δ_m` is at or below this.
    pub epsilon: f64,
    /// Stop once the energy drops below this.
    pub energy_stop: f64,
    pub budget: Budget,
    /// Seed of the initial random placement.
    pub rng_seed: u64,
    /// Newton iterations allowed per node update.
    pub newton_cap: usize,
}

impl Default for KkParams {
    fn default() -> Self {
        KkParams {
            k_scale: 1.0,
            l0: 600.0,
            epsilon: 1e-2,
            energy_stop: 1.0,
            budget: Budget::secs(60.0),
            rng_seed: 0,
            newton_cap: 50,
        }
    }
}

impl KkParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("K", self.k_scale),
            ("L0", self.l0),
            ("epsilon", self.epsilon),
            ("energy_stop", self.energy_stop),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParam(format!("{name} must be positive, got {v}")));
            }
        }
        if self.newton_cap == 0 {
            return Err(Error::InvalidParam("newton_cap must be positive".into()));
        }
        Ok(())
    }
}

/// Gradient and Hessian of the energy with respect to one node's position.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct Local {
    pub g: Point,
    pub hxx: f64,
    pub hxy: f64,
    pub hyy: f64,
}

impl Local {
    /// Solves `H δ = -g`; `None` when `H` is numerically singular.
    fn newton_step(&self) -> Option<Point> {
        let det = self.hxx * self.hyy - self.hxy * self.hxy;
        let scale = (self.hxx.abs() + self.hyy.abs() + 2.0 * self.hxy.abs()).powi(2);
        if !(det.abs() > 1e-12 * scale) {
            return None;
        }
        let s = Point::new(
            (-self.hyy * self.g.x + self.hxy * self.g.y) / det,
            (self.hxy * self.g.x - self.hxx * self.g.y) / det,
        );
        s.is_finite().then_some(s)
    }
}

/// Incremental KK state: per-node gradients and the total energy are kept
/// current as nodes move, so a move costs O(n).
///
/// Only `active` nodes move and contribute springs to the gradients. Each
/// node carries a stiffness multiplier `scale` (a node's own springs are
/// stiffened by it when it moves) and, in symmetric mode, also acts as a
/// partner weight on every spring touching it.
pub(crate) struct KkEngine<'m> {
    model: &'m DistanceModel,
    report: Option<&'m DistanceModel>,
    pub pos: Vec<Point>,
    active: Vec<bool>,
    active_list: Vec<usize>,
    grad: Vec<Point>,
    weight: Vec<f64>,
    scale: Vec<f64>,
    symmetric: bool,
    energy: f64,
    jitter: f64,
    mean_l: f64,
    moves_since_refresh: usize,
    pub updates: u64,
}

impl<'m> KkEngine<'m> {
    pub fn new(model: &'m DistanceModel, pos: Vec<Point>) -> Self {
        let n = model.node_count();
        assert_eq!(pos.len(), n, "layout and model sizes differ");
        let mut e = KkEngine {
            model,
            report: None,
            pos,
            active: vec![true; n],
            active_list: (0..n).collect(),
            grad: vec![Point::default(); n],
            weight: vec![1.0; n],
            scale: vec![1.0; n],
            symmetric: false,
            energy: 0.0,
            jitter: JITTER_FRACTION * model.l0,
            mean_l: model.mean_ideal_length(),
            moves_since_refresh: 0,
            updates: 0,
        };
        e.refresh();
        e
    }

    /// Reports energy under `report` instead of the driving model.
    pub fn with_report_model(mut self, report: &'m DistanceModel) -> Self {
        assert_eq!(report.node_count(), self.model.node_count());
        self.report = Some(report);
        self.energy = self.full_energy();
        self
    }

    pub fn model(&self) -> &DistanceModel {
        self.model
    }

    pub fn n(&self) -> usize {
        self.pos.len()
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn active_nodes(&self) -> &[usize] {
        &self.active_list
    }

    pub fn set_active(&mut self, flags: &[bool]) {
        self.active.copy_from_slice(flags);
        self.active_list = (0..self.n()).filter(|&i| flags[i]).collect();
        self.refresh_gradients();
    }

    pub fn set_symmetric(&mut self, symmetric: bool) {
        self.symmetric = symmetric;
        for v in 0..self.n() {
            self.weight[v] = if symmetric { self.scale[v] } else { 1.0 };
        }
        self.refresh_gradients();
    }

    /// Sets node `v`'s stiffness multiplier.
    pub fn set_scale(&mut self, v: usize, m: f64) {
        self.scale[v] = m;
        if self.symmetric {
            let dw = m - self.weight[v];
            self.weight[v] = m;
            if dw != 0.0 && self.active[v] {
                for &j in &self.active_list {
                    if j != v {
                        let t = self.pair_force(j, v, self.pos[v]);
                        self.grad[j] = self.grad[j] + t * dw;
                    }
                }
            }
        }
    }

    /// Gradient norm of node `v` without its stiffness multiplier.
    pub fn base_delta(&self, v: usize) -> f64 {
        self.grad[v].norm()
    }

    /// `Δ_v`, including node `v`'s stiffness multiplier.
    pub fn delta(&self, v: usize) -> f64 {
        self.scale[v] * self.grad[v].norm()
    }

    /// Active node with the largest `Δ`, smallest id on ties.
    pub fn max_delta(&self) -> (usize, f64) {
        let mut best = (usize::MAX, f64::NEG_INFINITY);
        for &v in &self.active_list {
            let d = self.delta(v);
            if d > best.1 {
                best = (v, d);
            }
        }
        best
    }

    pub fn refresh(&mut self) {
        self.refresh_gradients();
        self.energy = self.full_energy();
        self.moves_since_refresh = 0;
    }

    fn refresh_gradients(&mut self) {
        for idx in 0..self.active_list.len() {
            let v = self.active_list[idx];
            self.grad[v] = self.local(v).g;
        }
        for v in 0..self.n() {
            if !self.active[v] {
                self.grad[v] = Point::default();
            }
        }
    }

    fn full_energy(&self) -> f64 {
        let m = self.report.unwrap_or(self.model);
        let n = self.n();
        let mut e = 0.0;
        for i in 0..n {
            let (krow, lrow) = (m.k.row(i), m.l.row(i));
            for j in i + 1..n {
                let (_, r) = separation(i, j, self.pos[i], self.pos[j], self.jitter);
                let s = r - lrow[j];
                e += 0.5 * krow[j] * s * s;
            }
        }
        e
    }

    /// Unweighted spring force on `j` from a partner `v` sitting at `pv`.
    #[inline]
    fn pair_force(&self, j: usize, v: usize, pv: Point) -> Point {
        let (d, r) = separation(j, v, self.pos[j], pv, self.jitter);
        d * (self.model.k.get(j, v) * (1.0 - self.model.l.get(j, v) / r))
    }

    /// Gradient and Hessian for node `i` over its active partners.
    pub fn local(&self, i: usize) -> Local {
        let (krow, lrow) = (self.model.k.row(i), self.model.l.row(i));
        let pi = self.pos[i];
        let mut out = Local::default();
        for &j in &self.active_list {
            if j == i {
                continue;
            }
            let (d, r) = separation(i, j, pi, self.pos[j], self.jitter);
            let k = krow[j] * self.weight[j];
            let l = lrow[j];
            out.g = out.g + d * (k * (1.0 - l / r));
            let lr3 = k * l / (r * r * r);
            out.hxx += k - lr3 * d.y * d.y;
            out.hxy += lr3 * d.x * d.y;
            out.hyy += k - lr3 * d.x * d.x;
        }
        out
    }

    /// Energy of node `i`'s springs to its active partners with `i` at `p`.
    fn local_energy(&self, i: usize, p: Point) -> f64 {
        let (krow, lrow) = (self.model.k.row(i), self.model.l.row(i));
        let mut e = 0.0;
        for &j in &self.active_list {
            if j != i {
                let (_, r) = separation(i, j, p, self.pos[j], self.jitter);
                let s = r - lrow[j];
                e += krow[j] * self.weight[j] * s * s;
            }
        }
        0.5 * e
    }

    /// Newton iterations on node `i` until its `Δ` is at most `epsilon` or
    /// `cap` steps are taken. A step that is singular or raises the node's
    /// energy is replaced by a short gradient step. Returns the number of
    /// steps.
    pub fn newton(&mut self, i: usize, epsilon: f64, cap: usize) -> usize {
        let start = self.pos[i];
        let s = self.scale[i];
        let mut loc = self.local(i);
        let mut steps = 0;
        while steps < cap && s * loc.g.norm() > epsilon {
            let here = self.pos[i];
            let e0 = self.local_energy(i, here);
            let step = match loc.newton_step() {
                Some(st) if self.local_energy(i, here + st) <= e0 * (1.0 + 1e-12) => st,
                _ => {
                    let gn = loc.g.norm();
                    let mut len = (s * gn).min(self.mean_l / 10.0);
                    let mut st = loc.g * (-len / gn);
                    let mut tries = 0;
                    while self.local_energy(i, here + st) >= e0 && tries < 60 {
                        len *= 0.5;
                        st = loc.g * (-len / gn);
                        tries += 1;
                    }
                    if tries == 60 {
                        break;
                    }
                    st
                }
            };
            self.pos[i] = self.pos[i] + step;
            steps += 1;
            loc = self.local(i);
        }
        self.grad[i] = loc.g;
        if steps > 0 {
            self.propagate(i, start);
        }
        steps
    }

    /// Moves node `i` to `to` and updates the cached state.
    pub fn place(&mut self, i: usize, to: Point) {
        let from = self.pos[i];
        self.pos[i] = to;
        if self.active[i] {
            self.grad[i] = self.local(i).g;
        }
        self.propagate(i, from);
    }

    /// Updates the other nodes' gradients and the energy after node `i`
    /// moved away from `from`.
    fn propagate(&mut self, i: usize, from: Point) {
        let to = self.pos[i];
        let rep = self.report.unwrap_or(self.model);
        let (kr, lr) = (rep.k.row(i), rep.l.row(i));
        let (km, lm) = (self.model.k.row(i), self.model.l.row(i));
        let wi = self.weight[i];
        let moving_active = self.active[i];
        let mut de = 0.0;
        for j in 0..self.pos.len() {
            if j == i {
                continue;
            }
            let pj = self.pos[j];
            let (d0, r0) = separation(j, i, pj, from, self.jitter);
            let (d1, r1) = separation(j, i, pj, to, self.jitter);
            let (s0, s1) = (r0 - lr[j], r1 - lr[j]);
            de += 0.5 * kr[j] * (s1 * s1 - s0 * s0);
            if moving_active && self.active[j] {
                let k = km[j] * wi;
                let l = lm[j];
                let df = d1 * (1.0 - l / r1) - d0 * (1.0 - l / r0);
                self.grad[j] = self.grad[j] + df * k;
            }
        }
        self.energy += de;
        self.moves_since_refresh += 1;
        if self.moves_since_refresh >= 16 * self.pos.len() {
            self.refresh();
        }
    }
}

/// Energy of `layout` under `model`, by direct summation over pairs.
pub fn kk_energy(layout: &Layout, model: &DistanceModel) -> f64 {
    let n = layout.len();
    let jitter = JITTER_FRACTION * model.l0;
    let mut e = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let (_, r) = separation(i, j, layout.positions[i], layout.positions[j], jitter);
            let s = r - model.l.get(i, j);
            e += 0.5 * model.k.get(i, j) * s * s;
        }
    }
    e
}

/// `(∂E/∂x_m, ∂E/∂y_m, Δ_m)` with all other nodes fixed.
pub fn kk_gradient_and_delta(m: usize, layout: &Layout, model: &DistanceModel) -> (f64, f64, f64) {
    let jitter = JITTER_FRACTION * model.l0;
    let pm = layout.positions[m];
    let (mut gx, mut gy) = (0.0, 0.0);
    for (j, &pj) in layout.positions.iter().enumerate() {
        if j == m {
            continue;
        }
        let (d, r) = separation(m, j, pm, pj, jitter);
        let c = model.k.get(m, j) * (1.0 - model.l.get(m, j) / r);
        gx += c * d.x;
        gy += c * d.y;
    }
    (gx, gy, gx.hypot(gy))
}

/// One Newton-Raphson displacement `(δx, δy)` for node `m`, or `None` when
/// its Hessian is singular.
pub fn kk_newton_step(m: usize, layout: &Layout, model: &DistanceModel) -> Option<(f64, f64)> {
    let eng = KkEngine::new(model, layout.positions.clone());
    eng.local(m).newton_step().map(|p| (p.x, p.y))
}

/// Position node `m` reaches after Newton-Raphson updates with every other
/// node fixed. A node already at `Δ_m ≤ epsilon` stays where it is.
pub fn kk_newton_update(m: usize, layout: &Layout, model: &DistanceModel, epsilon: f64) -> Point {
    let mut eng = KkEngine::new(model, layout.positions.clone());
    eng.newton(m, epsilon, KkParams::default().newton_cap);
    eng.pos[m]
}

/// Plain Kamada-Kawai from a random placement seeded by `params.rng_seed`.
pub fn kk_layout(
    topology: &Topology,
    model: &DistanceModel,
    params: &KkParams,
    hook: &mut dyn TraceHook,
) -> Result<(Layout, RunTrace)> {
    if topology.node_count() != model.node_count() {
        return Err(Error::InvalidParam(format!(
            "model has {} nodes, topology {}",
            model.node_count(),
            topology.node_count()
        )));
    }
    let init = Layout::random(model.node_count(), params.l0, params.l0, params.rng_seed);
    kk_layout_from(model, init, params, hook)
}

/// Plain Kamada-Kawai from a given starting layout.
pub fn kk_layout_from(
    model: &DistanceModel,
    initial: Layout,
    params: &KkParams,
    hook: &mut dyn TraceHook,
) -> Result<(Layout, RunTrace)> {
    kk_layout_reporting(model, None, initial, params, hook)
}

/// As [`kk_layout_from`], with trace energies evaluated under `report`.
pub fn kk_layout_reporting(
    model: &DistanceModel,
    report: Option<&DistanceModel>,
    initial: Layout,
    params: &KkParams,
    hook: &mut dyn TraceHook,
) -> Result<(Layout, RunTrace)> {
    params.validate()?;
    if initial.len() != model.node_count() {
        return Err(Error::InvalidParam("initial layout size differs from model".into()));
    }
    let frame = (initial.width, initial.height);
    let mut eng = KkEngine::new(model, initial.positions);
    if let Some(r) = report {
        eng = eng.with_report_model(r);
    }
    let mut tracer = Tracer::start(params.budget, hook);
    tracer.sample(&eng.pos, frame, eng.energy(), 0);
    let term = loop {
        if tracer.exhausted(eng.updates) {
            break Termination::Budget;
        }
        if eng.energy() < params.energy_stop {
            break Termination::Energy;
        }
        let (m, dm) = eng.max_delta();
        if dm <= params.epsilon {
            eng.refresh();
            if eng.max_delta().1 <= params.epsilon {
                break Termination::Epsilon;
            }
            continue;
        }
        tracer.hook().on_select(m);
        eng.newton(m, params.epsilon, params.newton_cap);
        eng.updates += 1;
        if tracer.energy(eng.energy()) {
            break Termination::Hook;
        }
        if tracer.due() {
            tracer.sample(&eng.pos, frame, eng.energy(), eng.updates);
        }
    };
    eng.refresh();
    let trace = tracer.finish(&eng.pos, frame, eng.energy(), eng.updates, term);
    Ok((Layout::new(eng.pos, frame.0, frame.1), trace))
}

/// Convenience wrapper without a hook.
pub fn kk_layout_quiet(
    topology: &Topology,
    model: &DistanceModel,
    params: &KkParams,
) -> Result<(Layout, RunTrace)> {
    kk_layout(topology, model, params, &mut NoHook)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_distance_model, SquareMatrix};

    fn two_node_model(l: f64) -> DistanceModel {
        let d = SquareMatrix::from_fn(2, |i, j| if i == j { 0.0 } else { 1.0 });
        build_distance_model(d, l, 1.0).unwrap()
    }

    fn two(a: Point, b: Point) -> Layout {
        Layout::new(vec![a, b], 600.0, 600.0)
    }

    #[test]
    fn energy_zero_at_rest_length() {
        let m = two_node_model(5.0);
        let l = two(Point::new(0.0, 0.0), Point::new(3.0, 4.0));
        assert!(kk_energy(&l, &m).abs() < 1e-12);
    }

    #[test]
    fn energy_half_for_unit_stretch() {
        let m = two_node_model(5.0);
        let l = two(Point::new(0.0, 0.0), Point::new(6.0, 0.0));
        assert!((kk_energy(&l, &m) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn delta_zero_at_minimum() {
        let m = two_node_model(5.0);
        let l = two(Point::new(1.0, 1.0), Point::new(4.0, 5.0));
        assert!(kk_gradient_and_delta(0, &l, &m).2 < 1e-12);
    }

    #[test]
    fn newton_gate_leaves_settled_node() {
        let m = two_node_model(5.0);
        let l = two(Point::new(0.0, 0.0), Point::new(5.0 + 1e-3, 0.0));
        assert_eq!(kk_newton_update(1, &l, &m, 1e-2), l.positions[1]);
    }

    #[test]
    fn two_nodes_settle_at_ideal_length_from_any_start() {
        let m = two_node_model(100.0);
        for start in [0.001, 1.0, 50.0, 99.0, 101.0, 400.0, 5000.0] {
            let l = two(Point::new(0.0, 0.0), Point::new(start * 0.6, start * 0.8));
            let p = kk_newton_update(1, &l, &m, 1e-9);
            assert!((p.norm() - 100.0).abs() < 1e-4, "start {start}: {}", p.norm());
        }
    }

    #[test]
    fn coincident_nodes_do_not_produce_nan() {
        let m = two_node_model(10.0);
        let l = two(Point::new(2.0, 2.0), Point::new(2.0, 2.0));
        let (gx, gy, d) = kk_gradient_and_delta(0, &l, &m);
        assert!(gx.is_finite() && gy.is_finite() && d > 0.0);
        let p = kk_newton_update(0, &l, &m, 1e-9);
        assert!(p.is_finite());
        assert!((p.dist(Point::new(2.0, 2.0)) - 10.0).abs() < 1e-4);
    }

    #[test]
    fn incremental_state_matches_recomputation() {
        let d = SquareMatrix::from_fn(6, |i, j| (i as f64 - j as f64).abs());
        let m = build_distance_model(d, 600.0, 1.0).unwrap();
        let l = Layout::random(6, 600.0, 600.0, 3);
        let mut eng = KkEngine::new(&m, l.positions.clone());
        for v in [2, 0, 5, 2, 3] {
            eng.newton(v, 1e-3, 3);
        }
        let now = Layout::new(eng.pos.clone(), 600.0, 600.0);
        assert!((eng.energy() - kk_energy(&now, &m)).abs() < 1e-9 * eng.energy().max(1.0));
        for v in 0..6 {
            let (_, _, dv) = kk_gradient_and_delta(v, &now, &m);
            assert!((eng.delta(v) - dv).abs() < 1e-9 * dv.max(1.0));
        }
    }

    #[test]
    fn zero_budget_returns_initial_layout() {
        let d = SquareMatrix::from_fn(3, |i, j| if i == j { 0.0 } else { 1.0 });
        let m = build_distance_model(d, 600.0, 1.0).unwrap();
        let init = Layout::random(3, 600.0, 600.0, 1);
        let params = KkParams {
            budget: Budget::secs(0.0),
            ..KkParams::default()
        };
        let (out, trace) = kk_layout_from(&m, init.clone(), &params, &mut NoHook).unwrap();
        assert_eq!(out, init);
        assert_eq!(trace.terminated_by, Termination::Budget);
    }
}
