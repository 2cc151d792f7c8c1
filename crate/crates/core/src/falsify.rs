//! Noise-injection falsification: seeded noise signals on one feedback
//! channel, tolerable-bound search, initial-condition sweeps and random
//! robustness-minimizing search.

use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::control::Feedback;
use crate::error::{Error, Result};
use crate::math;
use crate::sim::{simulate, Flight, Scenario};
use crate::specs::SpecId;

/// A feedback channel the falsifier can disturb.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    U,
    Y,
    Phi,
    Psi,
    X,
    H,
    Theta,
    Q,
}

impl Channel {
    pub const ALL: [Channel; 8] = [
        Channel::U,
        Channel::Y,
        Channel::Phi,
        Channel::Psi,
        Channel::X,
        Channel::H,
        Channel::Theta,
        Channel::Q,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Channel::U => "u",
            Channel::Y => "y",
            Channel::Phi => "phi",
            Channel::Psi => "psi",
            Channel::X => "x",
            Channel::H => "h",
            Channel::Theta => "theta",
            Channel::Q => "q",
        }
    }

    pub fn from_name(s: &str) -> Option<Channel> {
        Channel::ALL.into_iter().find(|c| c.name() == s)
    }

    /// Bounds on `x` and `h` are fractions of the distance to the threshold
    /// and of the height above the touchdown zone.
    pub fn is_relative(self) -> bool {
        matches!(self, Channel::X | Channel::H)
    }

    pub fn unit(self) -> &'static str {
        match self {
            Channel::U => "m/s",
            Channel::Y => "m",
            Channel::Phi | Channel::Psi | Channel::Theta => "deg",
            Channel::Q => "deg/s",
            Channel::X | Channel::H => "fraction",
        }
    }

    fn slot(self, fb: &mut Feedback) -> &mut f64 {
        match self {
            Channel::U => &mut fb.u,
            Channel::Y => &mut fb.y,
            Channel::Phi => &mut fb.phi,
            Channel::Psi => &mut fb.psi,
            Channel::X => &mut fb.x,
            Channel::H => &mut fb.h,
            Channel::Theta => &mut fb.theta,
            Channel::Q => &mut fb.q,
        }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Piecewise-constant disturbance over the monitored window.
///
/// Control point `i` of `n` covers distances in
/// `(x0 (1 - (i + 1) / n), x0 (1 - i / n)]`; the last one also covers
/// everything past the threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSignal {
    pub channel: Channel,
    pub bound: f64,
    pub values: Vec<f64>,
}

impl NoiseSignal {
    pub fn zero(channel: Channel, n_points: usize) -> Self {
        NoiseSignal {
            channel,
            bound: 0.0,
            values: alloc::vec![0.0; n_points],
        }
    }

    /// Control-point value in effect at distance `x`.
    pub fn value_at(&self, x: f64, x0: f64) -> f64 {
        let n = self.values.len();
        if n == 0 {
            return 0.0;
        }
        let pos = math::floor((x0 - x) / x0 * n as f64);
        let i = if pos < 0.0 { 0 } else { (pos as usize).min(n - 1) };
        self.values[i]
    }

    /// Additive disturbance for feedback `fb`, scaling relative channels.
    pub fn offset(&self, fb: &Feedback, x0: f64, field_elevation: f64) -> f64 {
        let v = self.value_at(fb.x, x0);
        match self.channel {
            Channel::X => v * fb.x,
            Channel::H => v * (fb.h - field_elevation),
            _ => v,
        }
    }

    pub fn apply(&self, fb: &mut Feedback, x0: f64, field_elevation: f64) {
        let d = self.offset(fb, x0, field_elevation);
        *self.channel.slot(fb) += d;
    }

    /// Every control point lies in `[-bound, bound]`.
    pub fn is_admissible(&self, bound: f64) -> bool {
        self.values.iter().all(|v| v.abs() <= bound)
    }
}

/// Control points i.i.d. uniform in `[-bound, bound]`.
pub fn sample_noise<R: Rng + ?Sized>(channel: Channel, bound: f64, n_points: usize, rng: &mut R) -> Result<NoiseSignal> {
    if !(bound >= 0.0) || !bound.is_finite() {
        return Err(Error::InvalidArg("noise bound must be finite and non-negative"));
    }
    if n_points == 0 {
        return Err(Error::InvalidArg("noise needs at least one control point"));
    }
    let values = (0..n_points)
        .map(|_| bound * (2.0 * rng.random::<f64>() - 1.0))
        .collect();
    Ok(NoiseSignal { channel, bound, values })
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic seed for one stream, independent of evaluation order.
pub fn derive_seed(base: u64, stream: u64, i: u64, j: u64) -> u64 {
    splitmix(splitmix(splitmix(base ^ splitmix(stream)) ^ i) ^ j.wrapping_mul(0xD6E8_FEB8_6659_FD93))
}

/// Condensed result of one run, compared bit-exactly on replay.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    /// Seed of the run's perception and sensor noise.
    pub seed: u64,
    pub falsified: bool,
    pub robustness: f64,
    /// Each requirement held until release (false for all when never released).
    pub spec_holds: [bool; 5],
    pub first_violation: Option<SpecId>,
    pub released: bool,
    pub perception_valid: bool,
    pub diverged: bool,
    pub deviation_at_x0: Option<(f64, f64)>,
}

impl Evaluation {
    pub fn from_flight(flight: &Flight, seed: u64) -> Self {
        let diverged = flight.diverged.is_some();
        let released = flight
            .verdict
            .as_ref()
            .is_some_and(|v| v.release_index.is_some());
        let mut spec_holds = [false; 5];
        let mut first_violation = None;
        if let Some(v) = &flight.verdict {
            if released && !diverged {
                spec_holds = v.spec_holds;
            }
            first_violation = v.first_violation.map(|(id, _)| id);
        }
        Evaluation {
            seed,
            falsified: !flight.satisfied(),
            robustness: flight.robustness(),
            spec_holds,
            first_violation,
            released,
            perception_valid: flight.perception_valid,
            diverged,
            deviation_at_x0: flight.deviation_at_x0,
        }
    }
}

/// One reproducible noisy run: the disturbance, the offsets and the sensor seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub noise: Option<NoiseSignal>,
    pub dy: f64,
    pub dh: f64,
    pub seed: u64,
}

pub fn evaluate(scenario: &Scenario, candidate: &Candidate) -> Result<Evaluation> {
    let s = scenario.with_offsets(candidate.dy, candidate.dh).with_seed(candidate.seed);
    let flight = simulate(&s, candidate.noise.as_ref())?;
    Ok(Evaluation::from_flight(&flight, candidate.seed))
}

/// Re-runs a stored candidate.
pub fn replay(scenario: &Scenario, candidate: &Candidate) -> Result<Evaluation> {
    evaluate(scenario, candidate)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelSearch {
    /// Bound step of the linear ramp.
    pub increment: f64,
    /// Largest physically meaningful bound; the search stops there.
    pub cap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FalsifierConfig {
    pub seed: u64,
    /// Noise draws per bound.
    pub budget: usize,
    /// Control points per noise signal.
    pub control_points: usize,
    /// Indexed by [`Channel::index`].
    pub channels: [ChannelSearch; 8],
    /// Refine the bound between the last clean and the first falsified step.
    pub bisect: bool,
    pub bisect_steps: usize,
}

impl Default for FalsifierConfig {
    fn default() -> Self {
        let c = |increment, cap| ChannelSearch { increment, cap };
        FalsifierConfig {
            seed: 0,
            budget: 5,
            control_points: 5,
            channels: [
                c(0.5, 50.0),
                c(0.5, 100.0),
                c(0.5, 60.0),
                c(0.25, 60.0),
                c(0.01, 1.0),
                c(0.01, 1.0),
                c(0.25, 45.0),
                c(0.5, 100.0),
            ],
            bisect: false,
            bisect_steps: 6,
        }
    }
}

impl FalsifierConfig {
    pub fn validate(&self) -> Result<()> {
        if self.budget == 0 || self.control_points == 0 {
            return Err(Error::Config("falsifier budget and control points must be positive"));
        }
        if self.channels.iter().any(|c| !(c.increment > 0.0 && c.cap >= c.increment)) {
            return Err(Error::Config("channel increments must be positive and below the cap"));
        }
        Ok(())
    }

    pub fn search(&self, channel: Channel) -> ChannelSearch {
        self.channels[channel.index()]
    }
}

const BISECT_STREAM: u64 = 1 << 32;

/// Seed of draw `draw` at ramp step `step` of a channel's search.
pub fn draw_seed(base: u64, channel: Channel, step: u64, draw: u64) -> u64 {
    derive_seed(base, 0x7013_0000 + channel.index() as u64, step, draw)
}

/// Candidate for one search draw: the noise and the sensor stream both
/// derive from the draw seed.
pub fn draw_candidate(channel: Channel, bound: f64, n_points: usize, seed: u64) -> Result<Candidate> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = sample_noise(channel, bound, n_points, &mut rng)?;
    Ok(Candidate {
        noise: Some(noise),
        dy: 0.0,
        dh: 0.0,
        seed: derive_seed(seed, 0x5E45, 0, 0),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub step: u64,
    pub draw: u64,
    pub bound: f64,
    pub candidate: Candidate,
    pub evaluation: Evaluation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToleranceResult {
    pub channel: Channel,
    pub seed: u64,
    pub increment: f64,
    /// Largest bound at which no draw falsified the approach.
    pub tolerable_bound: f64,
    /// The cap was reached without a counterexample.
    pub exhausted: bool,
    /// Requirement violated first in the counterexample.
    pub first_failed: Option<SpecId>,
    pub counterexample: Option<Counterexample>,
    pub simulations: usize,
}

fn scan_bound(
    scenario: &Scenario,
    cfg: &FalsifierConfig,
    channel: Channel,
    bound: f64,
    step: u64,
    sims: &mut usize,
) -> Result<Option<Counterexample>> {
    for draw in 0..cfg.budget as u64 {
        let candidate = draw_candidate(channel, bound, cfg.control_points, draw_seed(cfg.seed, channel, step, draw))?;
        let evaluation = evaluate(scenario, &candidate)?;
        *sims += 1;
        if evaluation.falsified {
            return Ok(Some(Counterexample {
                step,
                draw,
                bound,
                candidate,
                evaluation,
            }));
        }
    }
    Ok(None)
}

/// Linear ramp of the noise bound on one channel, `budget` draws per bound.
///
/// Returns with `exhausted` set when the channel cap passes without a
/// counterexample; that is a finding, not an error.
pub fn tolerance_search(scenario: &Scenario, channel: Channel, cfg: &FalsifierConfig) -> Result<ToleranceResult> {
    cfg.validate()?;
    let search = cfg.search(channel);
    let mut sims = 0usize;
    let mut step = 1u64;
    let mut found = None;
    loop {
        let bound = step as f64 * search.increment;
        if bound > search.cap * (1.0 + 1e-12) {
            break;
        }
        if let Some(cex) = scan_bound(scenario, cfg, channel, bound, step, &mut sims)? {
            found = Some(cex);
            break;
        }
        step += 1;
    }
    let Some(mut cex) = found else {
        return Ok(ToleranceResult {
            channel,
            seed: cfg.seed,
            increment: search.increment,
            tolerable_bound: (step - 1) as f64 * search.increment,
            exhausted: true,
            first_failed: None,
            counterexample: None,
            simulations: sims,
        });
    };
    let mut lo = (cex.step - 1) as f64 * search.increment;
    if cfg.bisect {
        let mut hi = cex.bound;
        for k in 0..cfg.bisect_steps as u64 {
            let mid = 0.5 * (lo + hi);
            match scan_bound(scenario, cfg, channel, mid, BISECT_STREAM + k, &mut sims)? {
                Some(c) => {
                    hi = mid;
                    cex = c;
                }
                None => lo = mid,
            }
        }
    }
    Ok(ToleranceResult {
        channel,
        seed: cfg.seed,
        increment: search.increment,
        tolerable_bound: lo,
        exhausted: false,
        first_failed: cex.evaluation.first_violation,
        counterexample: Some(cex),
        simulations: sims,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepConfig {
    pub dy_range: (f64, f64),
    pub dh_range: (f64, f64),
    /// Cells along dy and along dh.
    pub grid: (usize, usize),
    pub seed: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            dy_range: (-10.0, 10.0),
            dh_range: (-10.0, 10.0),
            grid: (21, 21),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellSpec {
    pub i: usize,
    pub j: usize,
    pub dy: f64,
    pub dh: f64,
    pub seed: u64,
}

fn grid_value(range: (f64, f64), n: usize, i: usize) -> f64 {
    if i + 1 == n {
        range.1
    } else {
        range.0 + (range.1 - range.0) * i as f64 / (n - 1) as f64
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        let finite = [self.dy_range.0, self.dy_range.1, self.dh_range.0, self.dh_range.1]
            .iter()
            .all(|v| v.is_finite());
        if !finite || !(self.dy_range.0 <= self.dy_range.1 && self.dh_range.0 <= self.dh_range.1) {
            return Err(Error::InvalidArg("sweep ranges must be finite and ordered"));
        }
        if self.grid.0 < 2 || self.grid.1 < 2 {
            return Err(Error::InvalidArg("sweep grid must be at least 2 x 2"));
        }
        Ok(())
    }

    /// Cells in row-major order (dh outer, dy inner).
    pub fn cells(&self) -> Result<Vec<CellSpec>> {
        self.validate()?;
        let (nx, ny) = self.grid;
        let mut out = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                out.push(CellSpec {
                    i,
                    j,
                    dy: grid_value(self.dy_range, nx, i),
                    dh: grid_value(self.dh_range, ny, j),
                    seed: derive_seed(self.seed, 0xCE11, i as u64, j as u64),
                });
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub i: usize,
    pub j: usize,
    pub dy_req: f64,
    pub dh_req: f64,
    pub dy_at_x0: f64,
    pub dh_at_x0: f64,
    pub spec_holds: [bool; 5],
    pub perception_valid: bool,
    pub overall: bool,
    pub robustness: f64,
    pub diverged: bool,
}

pub fn evaluate_cell(scenario: &Scenario, cell: &CellSpec) -> Result<Cell> {
    let e = evaluate(
        scenario,
        &Candidate {
            noise: None,
            dy: cell.dy,
            dh: cell.dh,
            seed: cell.seed,
        },
    )?;
    let (dy_at_x0, dh_at_x0) = e.deviation_at_x0.unwrap_or((f64::NAN, f64::NAN));
    Ok(Cell {
        i: cell.i,
        j: cell.j,
        dy_req: cell.dy,
        dh_req: cell.dh,
        dy_at_x0,
        dh_at_x0,
        spec_holds: e.spec_holds,
        perception_valid: e.perception_valid,
        overall: e.spec_holds.iter().all(|h| *h) && e.perception_valid,
        robustness: e.robustness,
        diverged: e.diverged,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SatisfactionMap {
    pub nx: usize,
    pub ny: usize,
    /// Row-major, dh outer.
    pub cells: Vec<Cell>,
}

impl SatisfactionMap {
    /// Assembles cells evaluated in any order.
    pub fn from_cells(nx: usize, ny: usize, mut cells: Vec<Cell>) -> Result<Self> {
        if cells.len() != nx * ny {
            return Err(Error::InvalidArg("cell count does not match the grid"));
        }
        cells.sort_by_key(|c| (c.j, c.i));
        Ok(SatisfactionMap { nx, ny, cells })
    }

    pub fn cell(&self, i: usize, j: usize) -> Option<&Cell> {
        if i < self.nx && j < self.ny {
            self.cells.get(j * self.nx + i)
        } else {
            None
        }
    }

    pub fn satisfied_count(&self) -> usize {
        self.cells.iter().filter(|c| c.overall).count()
    }
}

/// Sequential initial-condition sweep.
pub fn ic_sweep(scenario: &Scenario, cfg: &SweepConfig) -> Result<SatisfactionMap> {
    let cells = cfg
        .cells()?
        .iter()
        .map(|c| evaluate_cell(scenario, c))
        .collect::<Result<Vec<_>>>()?;
    SatisfactionMap::from_cells(cfg.grid.0, cfg.grid.1, cells)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomSearch {
    pub seed: u64,
    pub budget: usize,
    pub control_points: usize,
    /// Also draw the initial offsets uniformly from these ranges.
    pub offsets: Option<((f64, f64), (f64, f64))>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FalsificationReport {
    pub seed: u64,
    pub falsified: bool,
    pub min_robustness: f64,
    pub spec_holds: [bool; 5],
    /// Lowest-robustness run found.
    pub best: Candidate,
    pub best_evaluation: Evaluation,
    /// Robustness of every explored run, in order.
    pub explored: Vec<f64>,
    pub simulations: usize,
}

/// Uniform random search over noise on one of `bounds`' channels per run,
/// keeping the least robust run.
pub fn falsify_random(scenario: &Scenario, bounds: &[(Channel, f64)], search: &RandomSearch) -> Result<FalsificationReport> {
    if search.budget == 0 {
        return Err(Error::InvalidArg("random search needs a budget of at least one run"));
    }
    let mut best: Option<(Candidate, Evaluation)> = None;
    let mut explored = Vec::with_capacity(search.budget);
    for k in 0..search.budget as u64 {
        let seed = derive_seed(search.seed, 0xF015, k, 0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = if bounds.is_empty() {
            None
        } else {
            let (channel, bound) = bounds[rng.random_range(0..bounds.len())];
            Some(sample_noise(channel, bound, search.control_points, &mut rng)?)
        };
        let (dy, dh) = match search.offsets {
            Some((ry, rh)) => (
                ry.0 + (ry.1 - ry.0) * rng.random::<f64>(),
                rh.0 + (rh.1 - rh.0) * rng.random::<f64>(),
            ),
            None => (scenario.scenario.dy, scenario.scenario.dh),
        };
        let candidate = Candidate {
            noise,
            dy,
            dh,
            seed: derive_seed(seed, 0x5E45, 0, 0),
        };
        let e = evaluate(scenario, &candidate)?;
        explored.push(e.robustness);
        if best.as_ref().map_or(true, |(_, b)| e.robustness < b.robustness) {
            best = Some((candidate, e));
        }
    }
    let (best, best_evaluation) = best.expect("budget is positive");
    Ok(FalsificationReport {
        seed: search.seed,
        falsified: best_evaluation.falsified,
        min_robustness: best_evaluation.robustness,
        spec_holds: best_evaluation.spec_holds,
        best,
        best_evaluation,
        explored,
        simulations: search.budget,
    })
}
