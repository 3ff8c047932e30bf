//! Energy races: how long each algorithm takes to first reach a target
//! energy.

use kkboundary::{Error, Result, Topology, TraceHook};

use crate::algo::{run_algorithm, Algorithm, RunSettings};

#[derive(Clone, Debug, PartialEq)]
pub struct RaceResult {
    pub target_energy: f64,
    pub time_a_ms: f64,
    pub time_b_ms: f64,
    /// `time_a / time_b`.
    pub ratio: f64,
    pub iterations_a: u64,
    pub iterations_b: u64,
    pub final_energy_a: f64,
    pub final_energy_b: f64,
    /// The algorithm never reached the target; its time is the budget.
    pub censored_a: bool,
    pub censored_b: bool,
}

/// Energies within a relative `1e-9` of the target count as reaching it, so
/// that a final exact recomputation does not hide the crossing.
fn reached(energy: f64, target: f64) -> bool {
    energy <= target + 1e-9 * target.abs()
}

/// Records every new running minimum of the energy.
#[derive(Default)]
struct MinimaLog {
    steps: Vec<(f64, f64)>,
    count: u64,
}

impl TraceHook for MinimaLog {
    fn on_energy(&mut self, elapsed_ms: f64, energy: f64) -> bool {
        self.count += 1;
        if self.steps.last().is_none_or(|&(_, e)| energy < e) {
            self.steps.push((elapsed_ms, energy));
        }
        false
    }
}

impl MinimaLog {
    fn first_at_or_below(&self, target: f64) -> Option<(f64, u64)> {
        self.steps
            .iter()
            .find(|&&(_, e)| reached(e, target))
            .map(|&(t, _)| (t, self.count))
    }
}

/// Stops the run at the first energy at or below the target.
struct Finish {
    target: f64,
    hit: Option<f64>,
}

impl TraceHook for Finish {
    fn on_energy(&mut self, elapsed_ms: f64, energy: f64) -> bool {
        if reached(energy, self.target) {
            self.hit = Some(elapsed_ms);
            true
        } else {
            false
        }
    }
}

/// Runs `a` to its budget, then `b` until it reaches the target energy.
/// The target defaults to the energy `a` holds at the end of its budget.
pub fn energy_race(
    topology: &Topology,
    a: Algorithm,
    b: Algorithm,
    target_energy: Option<f64>,
    settings: &RunSettings,
) -> Result<RaceResult> {
    for algo in [a, b] {
        if !algo.is_kk_family() {
            return Err(Error::InvalidParam(format!(
                "{algo} does not report per-update energies"
            )));
        }
    }
    if target_energy == Some(f64::INFINITY) {
        return Ok(RaceResult {
            target_energy: f64::INFINITY,
            time_a_ms: 0.0,
            time_b_ms: 0.0,
            ratio: 1.0,
            iterations_a: 0,
            iterations_b: 0,
            final_energy_a: f64::NAN,
            final_energy_b: f64::NAN,
            censored_a: false,
            censored_b: false,
        });
    }
    let budget_ms = settings.budget.wall.as_secs_f64() * 1e3;
    let mut log = MinimaLog::default();
    let (_, trace_a) = run_algorithm(topology, a, settings, &mut log)?;
    let target = target_energy.unwrap_or(trace_a.final_energy());
    let (time_a, censored_a) = match log.first_at_or_below(target) {
        Some((t, _)) => (t, false),
        None if reached(trace_a.samples[0].energy, target) => (0.0, false),
        None => (budget_ms, true),
    };

    let mut fin = Finish { target, hit: None };
    let (_, trace_b) = run_algorithm(topology, b, settings, &mut fin)?;
    let (time_b, censored_b) = match fin.hit {
        Some(t) => (t, false),
        None if reached(trace_b.samples[0].energy, target) => (0.0, false),
        None => (budget_ms, true),
    };
    let ratio = match (time_a, time_b) {
        (0.0, 0.0) => 1.0,
        (_, 0.0) => f64::INFINITY,
        (x, y) => x / y,
    };
    Ok(RaceResult {
        target_energy: target,
        time_a_ms: time_a,
        time_b_ms: time_b,
        ratio,
        iterations_a: trace_a.iterations,
        iterations_b: trace_b.iterations,
        final_energy_a: trace_a.final_energy(),
        final_energy_b: trace_b.final_energy(),
        censored_a,
        censored_b,
    })
}
