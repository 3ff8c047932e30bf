//! Davidson-Harel simulated annealing.
//!
//! Energy is `Σ_{i<j} d_a(y) + d_r(y)` with `d_a(y) = y²`,
//! `d_r(y) = 1/(y+1)²` and `y` the pair distance. Each trial moves a random
//! node to a random point on a circle of radius `r_disk` around it and is
//! accepted by the Metropolis rule.

use rand::Rng as _;

use super::{Budget, Layout, RunTrace, Termination, TraceHook, Tracer};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::graph::Topology;
use crate::rng::{derive, rng};

#[derive(Clone, Debug, PartialEq)]
pub struct DhParams {
    pub width: f64,
    pub height: f64,
    pub t_initial: f64,
    /// Cooling constant, `T ← t_c·T` per temperature.
    pub t_c: f64,
    pub disk_radius: f64,
    /// Disk shrink constant, `r ← r_c·r` per temperature.
    pub r_c: f64,
    pub boltzmann_k: f64,
    /// Trials per temperature, as a multiple of the node count.
    pub itmax_factor: u64,
    /// Stop once the temperature drops below this.
    pub epsilon: f64,
    pub budget: Budget,
    pub rng_seed: u64,
}

impl Default for DhParams {
    fn default() -> Self {
        DhParams::for_frame(600.0, 600.0)
    }
}

impl DhParams {
    pub fn for_frame(width: f64, height: f64) -> Self {
        DhParams {
            width,
            height,
            t_initial: 0.3 * width,
            t_c: 0.95,
            disk_radius: width / 10.0,
            r_c: 0.95,
            boltzmann_k: 1.0,
            itmax_factor: 20,
            epsilon: 1e-3,
            budget: Budget::secs(60.0),
            rng_seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("width", self.width),
            ("height", self.height),
            ("t_initial", self.t_initial),
            ("disk_radius", self.disk_radius),
            ("boltzmann_k", self.boltzmann_k),
            ("epsilon", self.epsilon),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParam(format!("{name} must be positive, got {v}")));
            }
        }
        for (name, v) in [("t_c", self.t_c), ("r_c", self.r_c)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidParam(format!("{name} must lie in (0, 1), got {v}")));
            }
        }
        if self.itmax_factor == 0 {
            return Err(Error::InvalidParam("itmax_factor must be positive".into()));
        }
        Ok(())
    }
}

#[inline]
fn pair_energy(y: f64) -> f64 {
    y * y + 1.0 / ((y + 1.0) * (y + 1.0))
}

/// Energy of a layout by direct summation over pairs.
pub fn dh_energy(positions: &[Point]) -> f64 {
    let mut e = 0.0;
    for i in 0..positions.len() {
        for j in i + 1..positions.len() {
            e += pair_energy(positions[i].dist(positions[j]));
        }
    }
    e
}

/// Metropolis acceptance probability `exp(−ΔE/(k·T))`, 1 for downhill moves.
pub fn acceptance_probability(delta_e: f64, boltzmann_k: f64, temperature: f64) -> f64 {
    if delta_e <= 0.0 {
        1.0
    } else {
        (-delta_e / (boltzmann_k * temperature)).exp()
    }
}

/// Energy change from moving node `i` to `to`.
fn move_delta(positions: &[Point], i: usize, to: Point) -> f64 {
    let from = positions[i];
    let mut de = 0.0;
    for (j, &pj) in positions.iter().enumerate() {
        if j != i {
            de += pair_energy(to.dist(pj)) - pair_energy(from.dist(pj));
        }
    }
    de
}

pub fn dh_layout(
    topology: &Topology,
    params: &DhParams,
    hook: &mut dyn TraceHook,
) -> Result<(Layout, RunTrace)> {
    dh_layout_observed(topology, params, hook, |_, _| {})
}

/// As [`dh_layout`], calling `on_accept(positions, energy)` after every
/// accepted move.
pub fn dh_layout_observed(
    topology: &Topology,
    params: &DhParams,
    hook: &mut dyn TraceHook,
    mut on_accept: impl FnMut(&[Point], f64),
) -> Result<(Layout, RunTrace)> {
    params.validate()?;
    let n = topology.node_count();
    let frame = (params.width, params.height);
    let mut pos = Layout::random(n, params.width, params.height, params.rng_seed).positions;
    let mut r = rng(derive(params.rng_seed, 0xd4));
    let mut energy = dh_energy(&pos);
    let mut t = params.t_initial;
    let mut disk = params.disk_radius;
    let itmax = params.itmax_factor * n as u64;
    let mut trials: u64 = 0;

    let mut tracer = Tracer::start(params.budget, hook);
    tracer.sample(&pos, frame, energy, 0);
    let term = 'outer: loop {
        if t < params.epsilon {
            break Termination::Epsilon;
        }
        for _ in 0..itmax {
            if tracer.exhausted(trials) {
                break 'outer Termination::Budget;
            }
            let i = r.gen_range(0..n);
            let angle = r.gen::<f64>() * std::f64::consts::TAU;
            let cand = pos[i] + Point::new(angle.cos(), angle.sin()) * disk;
            let de = move_delta(&pos, i, cand);
            let accept = de <= 0.0 || {
                let phi: f64 = r.gen();
                phi <= acceptance_probability(de, params.boltzmann_k, t)
            };
            trials += 1;
            if accept {
                pos[i] = cand;
                energy += de;
                on_accept(&pos, energy);
            }
            if trials.is_multiple_of(64) && tracer.due() {
                tracer.sample(&pos, frame, energy, trials);
            }
        }
        energy = dh_energy(&pos);
        t *= params.t_c;
        disk *= params.r_c;
    };
    let trace = tracer.finish(&pos, frame, energy, trials, term);
    Ok((Layout::new(pos, frame.0, frame.1), trace))
}
