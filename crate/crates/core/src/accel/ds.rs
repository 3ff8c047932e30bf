//! KK-MS-DS: lay out a small starting area around the best-connected node,
//! grow it outward whenever it stops improving, and finish with a
//! fine-tuning pass over the whole network.

use super::area::StartingArea;
use super::decay::DecayState;
use super::fspl::FsplParams;
use super::ms::{selection_count, update_node, MsOptions, Selector};
use super::ss::{fspl_edge_lengths, hop_model, kk_ss_model};
use super::stability::{stability_ratio, StabilityState, StallTracker};
use crate::error::{Error, Result};
use crate::geometry::{centroid, Point};
use crate::graph::{DistanceModel, Topology};
use crate::layout::kk::{KkEngine, KkParams};
use crate::layout::{Layout, RunTrace, Termination, TraceHook, Tracer};
use crate::rng::hash_unit;

/// Graph distance used for the spring model.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DistanceMode {
    Hops,
    SignalStrength,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DsOptions {
    pub mode: DistanceMode,
    pub k_percent: f64,
    pub hop_radius: usize,
    /// Radius of the initial area around the start node.
    pub seed_hops: usize,
    /// Hops added to the area per expansion.
    pub expand_hops: usize,
    /// Relative improvement of `r` that resets the stall count.
    pub stall_margin: f64,
    /// Rounds between checks while fine-tuning.
    pub fine_tune_tt: u64,
    /// New nodes inherit the largest stiffness among their area neighbours
    /// instead of 1.0.
    pub neighbor_max_stiffness: bool,
    /// Decayed stiffness also weakens a node's springs as seen by its
    /// partners.
    pub symmetric_stiffness: bool,
}

impl Default for DsOptions {
    fn default() -> Self {
        DsOptions {
            mode: DistanceMode::SignalStrength,
            k_percent: 5.0,
            hop_radius: 3,
            seed_hops: 2,
            expand_hops: 2,
            stall_margin: 0.01,
            fine_tune_tt: 10,
            neighbor_max_stiffness: false,
            symmetric_stiffness: false,
        }
    }
}

/// Result of a KK-MS-DS run with its growth history.
#[derive(Clone, Debug)]
pub struct DsOutcome {
    pub layout: Layout,
    pub trace: RunTrace,
    /// Area size at the start and after each expansion.
    pub area_sizes: Vec<usize>,
    /// Updates performed before fine-tuning began, if it began.
    pub fine_tune_from: Option<u64>,
    /// Smallest decayed stiffness seen outside `[0, 1]`, if any.
    pub stiffness_violation: Option<f64>,
}

pub fn kk_ms_ds_layout(
    topology: &Topology,
    fspl: &FsplParams,
    params: &KkParams,
    stability: &StabilityState,
    decay: &DecayState,
    hook: &mut dyn TraceHook,
) -> Result<(Layout, RunTrace)> {
    let out = kk_ms_ds_run(
        topology,
        fspl,
        params,
        stability,
        decay,
        &DsOptions::default(),
        None,
        hook,
    )?;
    Ok((out.layout, out.trace))
}

/// Full KK-MS-DS run. Trace energies use `report` when given, else the
/// driving model.
#[allow(clippy::too_many_arguments)]
pub fn kk_ms_ds_run(
    topology: &Topology,
    fspl: &FsplParams,
    params: &KkParams,
    stability: &StabilityState,
    decay: &DecayState,
    opts: &DsOptions,
    report: Option<&DistanceModel>,
    hook: &mut dyn TraceHook,
) -> Result<DsOutcome> {
    params.validate()?;
    let model = match opts.mode {
        DistanceMode::SignalStrength => kk_ss_model(topology, fspl, params.l0, params.k_scale)?,
        DistanceMode::Hops => hop_model(topology, params.l0, params.k_scale)?,
    };
    ds_with_model(topology, &model, fspl, params, stability, decay, opts, report, hook)
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn ds_with_model(
    topology: &Topology,
    model: &DistanceModel,
    fspl: &FsplParams,
    params: &KkParams,
    stability: &StabilityState,
    decay: &DecayState,
    opts: &DsOptions,
    report: Option<&DistanceModel>,
    hook: &mut dyn TraceHook,
) -> Result<DsOutcome> {
    let n = topology.node_count();
    if !(stability.epsilon_r > 0.0) || stability.tt == 0 || opts.fine_tune_tt == 0 {
        return Err(Error::InvalidParam("stability thresholds must be positive".into()));
    }
    let ms = MsOptions {
        k_percent: opts.k_percent,
        hop_radius: opts.hop_radius,
    };
    ms.validate()?;
    let refs = fspl_edge_lengths(topology, fspl);
    let frame = (params.l0, params.l0);

    let mut area = StartingArea::seed(topology, opts.seed_hops);
    let mut dec = DecayState {
        m: vec![1.0; n],
        t: vec![0; n],
        ..decay.clone()
    };
    let init = Layout::random(n, params.l0, params.l0, params.rng_seed);
    let mut eng = KkEngine::new(model, init.positions);
    if let Some(r) = report {
        eng = eng.with_report_model(r);
    }
    eng.set_symmetric(opts.symmetric_stiffness);
    eng.set_active(area.flags());

    let mut sel = Selector::new(n);
    let mut stall = StallTracker::new(stability.stall_window, opts.stall_margin);
    let mut growing = true;
    let mut rounds: u64 = 0;
    let mut area_sizes = vec![area.len()];
    let mut fine_tune_from = None;
    let mut violation: Option<f64> = None;

    let mut tracer = Tracer::start(params.budget, hook);
    tracer.sample(&eng.pos, frame, eng.energy(), 0);
    let term = 'run: loop {
        let k = selection_count(eng.active_nodes().len(), opts.k_percent);
        let mut converged = false;
        for _ in 0..k {
            if tracer.exhausted(eng.updates) {
                break 'run Termination::Budget;
            }
            if eng.energy() < params.energy_stop {
                break 'run Termination::Energy;
            }
            let Some(v) = sel.next(&mut eng, topology, &ms, params.epsilon) else {
                converged = true;
                break;
            };
            tracer.hook().on_select(v);
            update_node(&mut eng, v, params, growing.then_some(&mut dec));
            let m = dec.m[v];
            if !(0.0..=1.0).contains(&m) {
                violation = Some(violation.map_or(m, |x: f64| x.min(m)));
            }
            if tracer.energy(eng.energy()) {
                break 'run Termination::Hook;
            }
            if tracer.due() {
                tracer.sample(&eng.pos, frame, eng.energy(), eng.updates);
            }
        }
        rounds += 1;
        let tt = if growing { stability.tt } else { opts.fine_tune_tt };
        if !(converged || rounds.is_multiple_of(tt)) {
            continue;
        }
        let layout = Layout::new(eng.pos.clone(), frame.0, frame.1);
        let scope = if growing { Some(area.flags()) } else { None };
        let r = match stability_ratio(&layout, topology, &refs, scope) {
            Ok(s) => s.r,
            Err(Error::NoEdgesInScope) => 0.0,
            Err(e) => return Err(e),
        };
        let stalled = stall.observe(r);
        if !(converged || stalled || r < stability.epsilon_r) {
            continue;
        }
        if !growing {
            break if converged {
                Termination::Epsilon
            } else {
                Termination::Stable
            };
        }
        if area.is_full() {
            growing = false;
            fine_tune_from = Some(eng.updates);
            for v in 0..n {
                eng.set_scale(v, 1.0);
            }
        } else {
            grow(&mut area, &mut eng, &mut dec, topology, opts, params.rng_seed);
            area_sizes.push(area.len());
        }
        sel.reset();
        stall.reset();
        rounds = 0;
    };
    eng.refresh();
    let trace = tracer.finish(&eng.pos, frame, eng.energy(), eng.updates, term);
    Ok(DsOutcome {
        layout: Layout::new(eng.pos, frame.0, frame.1),
        trace,
        area_sizes,
        fine_tune_from,
        stiffness_violation: violation,
    })
}

/// Expands the area, places the new nodes just outside it and resets the
/// decaying stiffness.
fn grow(
    area: &mut StartingArea,
    eng: &mut KkEngine,
    dec: &mut DecayState,
    topology: &Topology,
    opts: &DsOptions,
    seed: u64,
) {
    let old: Vec<usize> = area.members().to_vec();
    let hub = centroid(old.iter().map(|&v| eng.pos[v])).unwrap_or_default();
    let old_m: Vec<f64> = dec.m.clone();
    let was_member: Vec<bool> = area.flags().to_vec();
    let added = area.expand(topology, opts.expand_hops);
    let generation = area.generation as u64;
    let mut placed: Vec<bool> = (0..topology.node_count()).map(|v| area.contains(v)).collect();
    for &(v, _) in &added {
        placed[v] = false;
    }
    for &(v, _) in &added {
        let nbrs: Vec<usize> = topology
            .neighbors(v)
            .iter()
            .copied()
            .filter(|&w| placed[w])
            .collect();
        let c = centroid(nbrs.iter().map(|&w| eng.pos[w])).unwrap_or(hub);
        let len = if nbrs.is_empty() {
            eng.model().mean_ideal_length()
        } else {
            nbrs.iter().map(|&w| eng.model().l.get(v, w)).sum::<f64>() / nbrs.len() as f64
        };
        let out = c - hub;
        let th = if out.norm() > 1e-9 * len {
            let wobble = (hash_unit(seed, v as u64, generation) - 0.5) * std::f64::consts::FRAC_PI_2;
            out.y.atan2(out.x) + wobble
        } else {
            hash_unit(seed ^ 1, v as u64, generation) * std::f64::consts::TAU
        };
        eng.place(v, c + Point::new(th.cos(), th.sin()) * len);
        placed[v] = true;
    }
    for &v in &old {
        dec.m[v] = dec.rested_value;
    }
    for &(v, _) in &added {
        dec.m[v] = if opts.neighbor_max_stiffness {
            topology
                .neighbors(v)
                .iter()
                .filter(|&&w| was_member[w])
                .map(|&w| old_m[w])
                .fold(0.0, f64::max)
        } else {
            1.0
        };
    }
    eng.set_active(area.flags());
    for v in 0..topology.node_count() {
        eng.set_scale(v, dec.m[v]);
    }
}
