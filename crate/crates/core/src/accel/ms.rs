//! Multi-node selection: each refill queues the top-k nodes by `Δ`, keeping
//! queued nodes more than a few hops apart, and the queue is rebuilt after
//! `√n` selections.

use std::collections::VecDeque;

use super::area::StartingArea;
use super::decay::{normalized_change, update_decaying_stiffness, DecayState};
use crate::error::{Error, Result};
use crate::graph::{DistanceModel, Topology};
use crate::layout::kk::{KkEngine, KkParams};
use crate::layout::{Layout, RunTrace, Termination, TraceHook, Tracer};

#[derive(Clone, Debug, PartialEq)]
pub struct MsOptions {
    /// Share of the active nodes queued per refill, in percent.
    pub k_percent: f64,
    /// Nodes within this many hops of a queued node are not queued.
    pub hop_radius: usize,
}

impl Default for MsOptions {
    fn default() -> Self {
        MsOptions {
            k_percent: 5.0,
            hop_radius: 3,
        }
    }
}

impl MsOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.k_percent > 0.0 && self.k_percent <= 100.0) {
            return Err(Error::InvalidParam(format!(
                "k_percent must lie in (0, 100], got {}",
                self.k_percent
            )));
        }
        Ok(())
    }
}

/// Queue length for `active` nodes at `k_percent`, at least 1.
pub fn selection_count(active: usize, k_percent: f64) -> usize {
    ((k_percent / 100.0 * active as f64).round() as usize).max(1)
}

/// Selections between queue rebuilds.
pub fn rebuild_interval(active: usize) -> usize {
    ((active as f64).sqrt().ceil() as usize).max(1)
}

pub(crate) struct Selector {
    queue: VecDeque<usize>,
    since_rebuild: usize,
    stamp: Vec<u32>,
    epoch: u32,
    pub refills: u64,
}

impl Selector {
    pub fn new(n: usize) -> Self {
        Selector {
            queue: VecDeque::new(),
            since_rebuild: 0,
            stamp: vec![0; n],
            epoch: 0,
            refills: 0,
        }
    }

    pub fn reset(&mut self) {
        self.queue.clear();
        self.since_rebuild = 0;
    }

    fn refill(&mut self, eng: &KkEngine, topology: &Topology, opts: &MsOptions, epsilon: f64) {
        self.queue.clear();
        self.since_rebuild = 0;
        self.refills += 1;
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.epoch = 1;
        }
        let active = eng.active_nodes();
        let k = selection_count(active.len(), opts.k_percent);
        let mut cand: Vec<(f64, usize)> = active
            .iter()
            .map(|&v| (eng.delta(v), v))
            .filter(|&(d, _)| d > epsilon)
            .collect();
        cand.sort_unstable_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        for (_, v) in cand {
            if self.queue.len() == k {
                break;
            }
            if self.stamp[v] == self.epoch {
                continue;
            }
            self.queue.push_back(v);
            if opts.hop_radius > 0 {
                for (w, _) in topology.hops_within(v, opts.hop_radius) {
                    self.stamp[w] = self.epoch;
                }
            } else {
                self.stamp[v] = self.epoch;
            }
        }
    }

    /// Next node to update, or `None` when no active node exceeds `epsilon`
    /// even after a full state refresh.
    pub fn next(
        &mut self,
        eng: &mut KkEngine,
        topology: &Topology,
        opts: &MsOptions,
        epsilon: f64,
    ) -> Option<usize> {
        if self.queue.is_empty() || self.since_rebuild >= rebuild_interval(eng.active_nodes().len()) {
            self.refill(eng, topology, opts, epsilon);
            if self.queue.is_empty() {
                eng.refresh();
                self.refill(eng, topology, opts, epsilon);
            }
        }
        let v = self.queue.pop_front()?;
        self.since_rebuild += 1;
        Some(v)
    }
}

/// Largest undecayed `Δ` over the active nodes.
pub(crate) fn max_base_delta(eng: &KkEngine) -> f64 {
    eng.active_nodes()
        .iter()
        .map(|&v| eng.base_delta(v))
        .fold(0.0, f64::max)
}

/// Newton-updates `v`, then decays its stiffness when `decay` is given.
pub(crate) fn update_node(
    eng: &mut KkEngine,
    v: usize,
    params: &KkParams,
    decay: Option<&mut DecayState>,
) {
    let z = decay
        .as_ref()
        .map(|_| normalized_change(eng.base_delta(v), max_base_delta(eng)));
    eng.newton(v, params.epsilon, params.newton_cap);
    eng.updates += 1;
    if let (Some(d), Some(z)) = (decay, z) {
        let m = update_decaying_stiffness(d, v, z);
        eng.set_scale(v, m);
    }
}

/// KK-MS from a random placement seeded by `params.rng_seed`.
#[allow(clippy::too_many_arguments)]
pub fn kk_ms_layout(
    topology: &Topology,
    model: &DistanceModel,
    opts: &MsOptions,
    params: &KkParams,
    decay: Option<&mut DecayState>,
    area: Option<&StartingArea>,
    hook: &mut dyn TraceHook,
) -> Result<(Layout, RunTrace)> {
    let init = Layout::random(model.node_count(), params.l0, params.l0, params.rng_seed);
    kk_ms_layout_from(topology, model, init, opts, params, decay, area, hook)
}

/// KK-MS from a given starting layout. Only `area` members move when an
/// area is given.
#[allow(clippy::too_many_arguments)]
pub fn kk_ms_layout_from(
    topology: &Topology,
    model: &DistanceModel,
    initial: Layout,
    opts: &MsOptions,
    params: &KkParams,
    mut decay: Option<&mut DecayState>,
    area: Option<&StartingArea>,
    hook: &mut dyn TraceHook,
) -> Result<(Layout, RunTrace)> {
    params.validate()?;
    opts.validate()?;
    let n = model.node_count();
    if topology.node_count() != n || initial.len() != n {
        return Err(Error::InvalidParam("topology, model and layout sizes differ".into()));
    }
    if let Some(d) = decay.as_ref() {
        if d.m.len() != n || d.t.len() != n {
            return Err(Error::InvalidParam("decay state size differs from topology".into()));
        }
    }
    let frame = (initial.width, initial.height);
    let mut eng = KkEngine::new(model, initial.positions);
    if let Some(a) = area {
        eng.set_active(a.flags());
    }
    if let Some(d) = decay.as_ref() {
        for v in 0..n {
            eng.set_scale(v, d.m[v]);
        }
    }
    let mut sel = Selector::new(n);
    let mut tracer = Tracer::start(params.budget, hook);
    tracer.sample(&eng.pos, frame, eng.energy(), 0);
    let term = loop {
        if tracer.exhausted(eng.updates) {
            break Termination::Budget;
        }
        if eng.energy() < params.energy_stop {
            break Termination::Energy;
        }
        let Some(v) = sel.next(&mut eng, topology, opts, params.epsilon) else {
            break Termination::Epsilon;
        };
        tracer.hook().on_select(v);
        update_node(&mut eng, v, params, decay.as_deref_mut());
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
