//! Layouts, run traces and the three classical engines.

pub mod dh;
pub mod fr;
pub mod kk;

use std::fmt::{self, Write as _};
use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::rng::{hash_unit, rng};

/// Node positions inside a drawing frame centred on the origin.
#[derive(Clone, Debug, PartialEq)]
pub struct Layout {
    pub positions: Vec<Point>,
    pub width: f64,
    pub height: f64,
}

impl Layout {
    pub fn new(positions: Vec<Point>, width: f64, height: f64) -> Self {
        Layout {
            positions,
            width,
            height,
        }
    }

    /// Uniformly random positions in `[-w/2, w/2] × [-h/2, h/2]`.
    pub fn random(n: usize, width: f64, height: f64, seed: u64) -> Self {
        let mut r = rng(seed);
        let positions = (0..n)
            .map(|_| {
                Point::new(
                    (r.gen::<f64>() - 0.5) * width,
                    (r.gen::<f64>() - 0.5) * height,
                )
            })
            .collect();
        Layout::new(positions, width, height)
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.positions.iter().all(|p| p.is_finite())
    }

    /// Applies `p -> scale · rotate(p, theta) + shift` to every position.
    pub fn transformed(&self, scale: f64, theta: f64, shift: Point) -> Layout {
        Layout {
            positions: self
                .positions
                .iter()
                .map(|&p| p.rotate(theta) * scale + shift)
                .collect(),
            width: self.width * scale,
            height: self.height * scale,
        }
    }
}

/// Stand-in separation for two nodes at the same position: a tiny offset
/// derived from the pair ids, antisymmetric in `(i, j)`.
pub fn coincident_offset(i: usize, j: usize, magnitude: f64) -> Point {
    let (a, b) = (i.min(j) as u64, i.max(j) as u64);
    let th = hash_unit(0x6a09_e667_f3bc_c908, a, b) * std::f64::consts::TAU;
    let u = Point::new(th.cos(), th.sin()) * magnitude;
    if i < j {
        u
    } else {
        u * -1.0
    }
}

/// `p_i - p_j`, replaced by a deterministic offset when the two coincide.
#[inline]
pub(crate) fn separation(i: usize, j: usize, pi: Point, pj: Point, jitter: f64) -> (Point, f64) {
    let d = pi - pj;
    let r = d.norm();
    if r > 0.0 {
        (d, r)
    } else {
        let o = coincident_offset(i, j, jitter);
        (o, o.norm())
    }
}

/// Stopping budget for a layout run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Budget {
    pub wall: Duration,
    /// Optional cap on engine iterations, for hardware-independent runs.
    pub max_iterations: Option<u64>,
}

impl Budget {
    pub fn secs(secs: f64) -> Self {
        Budget {
            wall: Duration::from_secs_f64(secs.max(0.0)),
            max_iterations: None,
        }
    }

    pub fn iterations(self, n: u64) -> Self {
        Budget {
            max_iterations: Some(n),
            ..self
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    Budget,
    Energy,
    Epsilon,
    Stable,
    /// A trace hook asked the run to stop.
    Hook,
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Termination::Budget => "budget",
            Termination::Energy => "energy",
            Termination::Epsilon => "epsilon",
            Termination::Stable => "stable",
            Termination::Hook => "hook",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceSample {
    pub elapsed_ms: f64,
    pub energy: f64,
    /// `NaN` when no scorer was attached.
    pub sensitivity: f64,
    pub specificity: f64,
    pub iterations: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunTrace {
    pub samples: Vec<TraceSample>,
    pub terminated_by: Termination,
    pub iterations: u64,
}

impl RunTrace {
    pub fn last(&self) -> &TraceSample {
        self.samples.last().expect("trace always has a final sample")
    }

    pub fn final_energy(&self) -> f64 {
        self.last().energy
    }

    pub fn elapsed_ms(&self) -> f64 {
        self.last().elapsed_ms
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("elapsed_ms,energy,sensitivity,specificity\n");
        for s in &self.samples {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                s.elapsed_ms, s.energy, s.sensitivity, s.specificity
            );
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_csv())?;
        Ok(())
    }

    /// Parses the sample rows of a trace CSV. Termination and iteration
    /// counts are not part of the file.
    pub fn parse_csv(text: &str) -> Result<Vec<TraceSample>> {
        let mut lines = text.lines();
        let parse_err = |line: usize, msg: String| Error::Parse {
            path: "trace".into(),
            line,
            msg,
        };
        match lines.next() {
            Some("elapsed_ms,energy,sensitivity,specificity") => {}
            _ => return Err(parse_err(1, "bad trace header".into())),
        }
        lines
            .enumerate()
            .map(|(i, l)| {
                let v: Vec<f64> = l
                    .split(',')
                    .map(str::parse)
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|e| parse_err(i + 2, format!("{e}")))?;
                if v.len() != 4 {
                    return Err(parse_err(i + 2, "expected 4 columns".into()));
                }
                Ok(TraceSample {
                    elapsed_ms: v[0],
                    energy: v[1],
                    sensitivity: v[2],
                    specificity: v[3],
                    iterations: 0,
                })
            })
            .collect()
    }
}

/// Observer attached to a layout run.
pub trait TraceHook {
    /// Sensitivity and specificity of an intermediate layout.
    fn score(&mut self, _layout: &Layout) -> Option<(f64, f64)> {
        None
    }

    /// A node was picked for a position update.
    fn on_select(&mut self, _node: usize) {}

    /// Energy after an update; returning `true` stops the run.
    fn on_energy(&mut self, _elapsed_ms: f64, _energy: f64) -> bool {
        false
    }
}

/// Hook that observes nothing.
pub struct NoHook;

impl TraceHook for NoHook {}

/// Interval between periodic trace samples.
pub const SAMPLE_INTERVAL_MS: f64 = 100.0;

/// Wall-clock bookkeeping shared by the engines.
pub(crate) struct Tracer<'h> {
    start: Instant,
    budget: Budget,
    next_sample_ms: f64,
    samples: Vec<TraceSample>,
    hook: &'h mut dyn TraceHook,
}

impl<'h> Tracer<'h> {
    pub fn start(budget: Budget, hook: &'h mut dyn TraceHook) -> Self {
        Tracer {
            start: Instant::now(),
            budget,
            next_sample_ms: 0.0,
            samples: Vec::new(),
            hook,
        }
    }

    pub fn elapsed_ms(&self) -> f64 {
        self.start.elapsed().as_secs_f64() * 1e3
    }

    pub fn exhausted(&self, iterations: u64) -> bool {
        self.budget.max_iterations.is_some_and(|m| iterations >= m)
            || self.start.elapsed() >= self.budget.wall
    }

    pub fn due(&self) -> bool {
        self.elapsed_ms() >= self.next_sample_ms
    }

    pub fn hook(&mut self) -> &mut dyn TraceHook {
        self.hook
    }

    /// Forwards an energy reading to the hook; `true` means stop.
    pub fn energy(&mut self, energy: f64) -> bool {
        let t = self.elapsed_ms();
        self.hook.on_energy(t, energy)
    }

    pub fn sample(&mut self, positions: &[Point], frame: (f64, f64), energy: f64, iterations: u64) {
        let layout = Layout::new(positions.to_vec(), frame.0, frame.1);
        let (sens, spec) = self.hook.score(&layout).unwrap_or((f64::NAN, f64::NAN));
        let mut t = self.elapsed_ms();
        if let Some(prev) = self.samples.last() {
            if t <= prev.elapsed_ms {
                t = prev.elapsed_ms + 1e-6;
            }
        }
        self.samples.push(TraceSample {
            elapsed_ms: t,
            energy,
            sensitivity: sens,
            specificity: spec,
            iterations,
        });
        while self.next_sample_ms <= t {
            self.next_sample_ms += SAMPLE_INTERVAL_MS;
        }
    }

    pub fn finish(
        mut self,
        positions: &[Point],
        frame: (f64, f64),
        energy: f64,
        iterations: u64,
        terminated_by: Termination,
    ) -> RunTrace {
        self.sample(positions, frame, energy, iterations);
        RunTrace {
            samples: self.samples,
            terminated_by,
            iterations,
        }
    }
}

pub fn format_layout(layout: &Layout) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "LAYOUT {}", layout.len());
    for (i, p) in layout.positions.iter().enumerate() {
        let _ = writeln!(out, "POS {i} {} {}", p.x, p.y);
    }
    out
}

pub fn write_layout(layout: &Layout, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, format_layout(layout))?;
    Ok(())
}

pub fn read_layout(path: impl AsRef<Path>) -> Result<Layout> {
    let path = path.as_ref();
    parse_layout(&fs::read_to_string(path)?, path)
}

/// Parses a layout file. The frame is taken as the bounding square of the
/// positions, since the file format does not carry it.
pub fn parse_layout(text: &str, origin: &Path) -> Result<Layout> {
    let err = |line: usize, msg: String| Error::Parse {
        path: origin.to_path_buf(),
        line,
        msg,
    };
    let mut positions: Vec<Option<Point>> = Vec::new();
    let mut header = false;
    for (idx, raw) in text.lines().enumerate() {
        let ln = idx + 1;
        let toks: Vec<&str> = raw.split('#').next().unwrap_or("").split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        match (toks[0], header) {
            ("LAYOUT", false) if toks.len() == 2 => {
                let n: usize = toks[1].parse().map_err(|_| err(ln, "bad node count".into()))?;
                positions = vec![None; n];
                header = true;
            }
            ("POS", true) if toks.len() == 4 => {
                let id: usize = toks[1].parse().map_err(|_| err(ln, "bad node id".into()))?;
                if id >= positions.len() {
                    return Err(err(ln, format!("unknown node id {id}")));
                }
                let x: f64 = toks[2].parse().map_err(|_| err(ln, "bad x".into()))?;
                let y: f64 = toks[3].parse().map_err(|_| err(ln, "bad y".into()))?;
                if positions[id].replace(Point::new(x, y)).is_some() {
                    return Err(err(ln, format!("duplicate POS {id}")));
                }
            }
            _ => return Err(err(ln, format!("unexpected line {raw:?}"))),
        }
    }
    if !header {
        return Err(err(1, "missing LAYOUT header".into()));
    }
    let last = text.lines().count();
    let positions: Vec<Point> = positions
        .into_iter()
        .enumerate()
        .map(|(i, p)| p.ok_or_else(|| err(last, format!("missing POS for node {i}"))))
        .collect::<Result<_>>()?;
    let side = positions
        .iter()
        .fold(0.0f64, |m, p| m.max(2.0 * p.x.abs()).max(2.0 * p.y.abs()));
    Ok(Layout::new(positions, side, side))
}
