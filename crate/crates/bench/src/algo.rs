//! Uniform entry point over every layout algorithm.

use std::fmt;
use std::str::FromStr;

use kkboundary::accel::ds::{kk_ms_ds_run, DsOptions};
use kkboundary::accel::{hop_model, kk_ms_layout, kk_ss_model, DecayState, DistanceMode, FsplParams, MsOptions, StabilityState};
use kkboundary::layout::dh::{dh_layout, DhParams};
use kkboundary::layout::fr::{fr_layout, FrParams};
use kkboundary::layout::kk::{kk_layout, kk_layout_reporting, KkParams};
use kkboundary::{Budget, Layout, Result, RunTrace, Topology, TraceHook};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    Kk,
    Fr,
    Dh,
    KkSs,
    KkMs,
    KkMsDs,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::Kk,
        Algorithm::Fr,
        Algorithm::Dh,
        Algorithm::KkSs,
        Algorithm::KkMs,
        Algorithm::KkMsDs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Kk => "kk",
            Algorithm::Fr => "fr",
            Algorithm::Dh => "dh",
            Algorithm::KkSs => "kk-ss",
            Algorithm::KkMs => "kk-ms",
            Algorithm::KkMsDs => "kk-ms-ds",
        }
    }

    /// Whether the algorithm minimizes a Kamada-Kawai energy.
    pub fn is_kk_family(self) -> bool {
        !matches!(self, Algorithm::Fr | Algorithm::Dh)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| format!("unknown algorithm {s:?}"))
    }
}

/// Settings shared by every algorithm in a run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunSettings {
    pub budget: Budget,
    pub seed: u64,
    /// Queue share for kk-ms, percent.
    pub k_percent: f64,
    pub epsilon_r: f64,
    /// Frame side.
    pub l0: f64,
    pub fspl: FsplParams,
    pub ds_mode: DistanceMode,
    /// Report KK-family energies under the hop-count model.
    pub report_hops: bool,
}

impl Default for RunSettings {
    fn default() -> Self {
        RunSettings {
            budget: Budget::secs(60.0),
            seed: 0,
            k_percent: 5.0,
            epsilon_r: 0.1,
            l0: 600.0,
            fspl: FsplParams::default(),
            ds_mode: DistanceMode::SignalStrength,
            report_hops: false,
        }
    }
}

impl RunSettings {
    pub fn kk_params(&self) -> KkParams {
        KkParams {
            l0: self.l0,
            budget: self.budget,
            rng_seed: self.seed,
            ..KkParams::default()
        }
    }
}

pub fn run_algorithm(
    topology: &Topology,
    algo: Algorithm,
    s: &RunSettings,
    hook: &mut dyn TraceHook,
) -> Result<(Layout, RunTrace)> {
    let kk = s.kk_params();
    match algo {
        Algorithm::Kk => {
            let m = hop_model(topology, s.l0, kk.k_scale)?;
            kk_layout(topology, &m, &kk, hook)
        }
        Algorithm::KkSs => {
            let m = kk_ss_model(topology, &s.fspl, s.l0, kk.k_scale)?;
            let hops = if s.report_hops {
                Some(hop_model(topology, s.l0, kk.k_scale)?)
            } else {
                None
            };
            let init = Layout::random(topology.node_count(), s.l0, s.l0, s.seed);
            kk_layout_reporting(&m, hops.as_ref(), init, &kk, hook)
        }
        Algorithm::KkMs => {
            let m = hop_model(topology, s.l0, kk.k_scale)?;
            let opts = MsOptions {
                k_percent: s.k_percent,
                ..MsOptions::default()
            };
            kk_ms_layout(topology, &m, &opts, &kk, None, None, hook)
        }
        Algorithm::KkMsDs => {
            let hops = if s.report_hops && s.ds_mode != DistanceMode::Hops {
                Some(hop_model(topology, s.l0, kk.k_scale)?)
            } else {
                None
            };
            let stability = StabilityState {
                epsilon_r: s.epsilon_r,
                ..StabilityState::default()
            };
            let opts = DsOptions {
                mode: s.ds_mode,
                ..DsOptions::default()
            };
            let out = kk_ms_ds_run(
                topology,
                &s.fspl,
                &kk,
                &stability,
                &DecayState::new(topology.node_count()),
                &opts,
                hops.as_ref(),
                hook,
            )?;
            Ok((out.layout, out.trace))
        }
        Algorithm::Fr => {
            let p = FrParams {
                width: s.l0,
                height: s.l0,
                budget: s.budget,
                rng_seed: s.seed,
                ..FrParams::default()
            };
            fr_layout(topology, &p, hook)
        }
        Algorithm::Dh => {
            let p = DhParams {
                budget: s.budget,
                rng_seed: s.seed,
                ..DhParams::for_frame(s.l0, s.l0)
            };
            dh_layout(topology, &p, hook)
        }
    }
}
