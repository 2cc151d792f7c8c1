//! Command-line interface.
//!
//! Exit status: 0 on success, 1 when the approach requirements are
//! falsified (`simulate`, `monitor-trace`), 2 on usage, configuration or
//! input errors.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use autoland_core::airframe::trim;
use autoland_core::falsify::Channel;
use autoland_core::specs::{eval_final_approach, SpecSample};
use autoland_core::trace::compute_error_stats;
use autoland_core::{simulate, FeedbackSource, SpecId, SpecVerdict};
use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::config::Config;
use crate::report::{self, SweepSummary};
use crate::trace_io::{load_trace, save_trace};
use crate::{parallel, svg, Error};

#[derive(Debug, Parser)]
#[command(name = "autoland", version, about = "Simulate, monitor and falsify vision-based automatic landings")]
struct Cli {
    /// JSON configuration file; omitted sections use defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for sensor noise, falsifier draws and sweep cells.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "autoland-out")]
    out: PathBuf,
    /// State feedback source: ground_truth, vision or vision_baro.
    #[arg(long, global = true)]
    feedback: Option<FeedbackSource>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the trim state and input.
    Trim {
        /// Airspeed, m/s. Defaults to the autopilot's desired speed.
        #[arg(long)]
        speed: Option<f64>,
        /// Descent angle, deg. Defaults to the glideslope angle.
        #[arg(long, allow_hyphen_values = true)]
        gamma: Option<f64>,
    },
    /// Fly one approach and write its trace and verdict.
    Simulate {
        /// Lateral offset held before the monitored window, m.
        #[arg(long, allow_hyphen_values = true)]
        dy: Option<f64>,
        /// Vertical offset held before the monitored window, m.
        #[arg(long, allow_hyphen_values = true)]
        dh: Option<f64>,
    },
    /// Check the approach requirements on a trace CSV.
    MonitorTrace {
        /// Trace file, full or minimal layout.
        trace: PathBuf,
    },
    /// Tolerable noise bound per feedback channel.
    FalsifyNoise {
        /// Comma-separated channels (default: all).
        #[arg(long, value_delimiter = ',')]
        channels: Vec<String>,
        /// Refine each bound by bisection.
        #[arg(long)]
        bisect: bool,
    },
    /// Satisfaction map over initial lateral and vertical offsets.
    SweepIc {
        /// Cells per axis, overriding the configured grid.
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Estimation error statistics of a trace, or of a fresh vision run.
    Stats {
        trace: Option<PathBuf>,
    },
    /// Print the effective configuration as JSON.
    ShowConfig,
}

#[derive(Debug, Serialize)]
struct VerdictSummary {
    holds: bool,
    robustness: f64,
    spec_holds: [bool; 5],
    spec_robustness: [f64; 5],
    release_time: Option<f64>,
    first_violation: Option<SpecId>,
}

impl VerdictSummary {
    fn of(v: &SpecVerdict) -> Self {
        VerdictSummary {
            holds: v.holds,
            robustness: v.robustness,
            spec_holds: v.spec_holds,
            spec_robustness: v.spec_robustness,
            release_time: v.release_time,
            first_violation: v.first_violation.map(|(id, _)| id),
        }
    }
}

#[derive(Debug, Serialize)]
struct SimulationReport {
    seed: u64,
    feedback: FeedbackSource,
    dy: f64,
    dh: f64,
    satisfied: bool,
    diverged: Option<(f64, &'static str)>,
    perception_valid: bool,
    invalid_frames: usize,
    deviation_at_x0: Option<(f64, f64)>,
    verdict: Option<VerdictSummary>,
}

fn out_dir(dir: &Path) -> Result<&Path, Error> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    Ok(dir)
}

fn write_text(path: &Path, text: &str) -> Result<(), Error> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn load_config(cli: &Cli) -> Result<Config, Error> {
    let mut c = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    if let Some(seed) = cli.seed {
        c = c.with_seed(seed);
    }
    if let Some(f) = cli.feedback {
        c.scenario.scenario.feedback = f;
    }
    c.validate()?;
    Ok(c)
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn execute(cli: &Cli) -> Result<i32, Error> {
    let cfg = load_config(cli)?;
    match &cli.command {
        Command::ShowConfig => {
            println!("{}", cfg.to_json());
            Ok(0)
        }
        Command::Trim { speed, gamma } => {
            let g = &cfg.scenario.gains.longitudinal;
            let speed = speed.unwrap_or(g.u_des);
            let gamma = gamma.unwrap_or(g.gamma);
            let (state, input) = trim(&cfg.scenario.airframe, speed, -gamma)?;
            println!("trim at {speed} m/s, flight path {:+} deg", -gamma);
            println!(
                "  u {:.4} m/s  w {:.4} m/s  theta {:.4} deg  alpha {:.4} deg",
                state.u,
                state.w,
                state.theta,
                state.w.atan2(state.u).to_degrees()
            );
            println!("  thrust {:.2} N  elevator {:.4} deg", input.delta_t, input.delta_e);
            Ok(0)
        }
        Command::Simulate { dy, dh } => {
            let c = &cfg.scenario.scenario;
            let scenario = cfg.scenario.clone().with_offsets(dy.unwrap_or(c.dy), dh.unwrap_or(c.dh));
            let flight = simulate(&scenario, None)?;
            let dir = out_dir(&cli.out)?;
            save_trace(&dir.join("trace.csv"), &flight.trace, flight.verdict.as_ref())?;
            let sc = &scenario.scenario;
            let summary = SimulationReport {
                seed: sc.seed,
                feedback: sc.feedback,
                dy: sc.dy,
                dh: sc.dh,
                satisfied: flight.satisfied(),
                diverged: flight.diverged,
                perception_valid: flight.perception_valid,
                invalid_frames: flight.invalid_frames,
                deviation_at_x0: flight.deviation_at_x0,
                verdict: flight.verdict.as_ref().map(VerdictSummary::of),
            };
            report::write_json(&dir.join("verdict.json"), &summary)?;
            let samples = flight.trace.spec_samples();
            if !samples.is_empty() {
                write_text(&dir.join("approach.svg"), &svg::approach_cones(&samples, &scenario.specs))?;
            }
            match &flight.verdict {
                Some(v) => println!("{}", report::verdict_text(v)),
                None => println!("monitored window never reached"),
            }
            if let Some((t, cause)) = flight.diverged {
                println!("  simulation diverged at t = {t:.2} s: {cause}");
            }
            if !flight.perception_valid {
                println!("  perception dropped {} frames", flight.invalid_frames);
            }
            println!("trace written to {}", dir.join("trace.csv").display());
            Ok(if flight.satisfied() { 0 } else { 1 })
        }
        Command::MonitorTrace { trace } => {
            let table = load_trace(trace)?;
            let samples = table.spec_samples()?;
            let verdict = eval_final_approach(&samples, &cfg.scenario.specs)?;
            let dir = out_dir(&cli.out)?;
            write_margins(&dir.join("margins.csv"), &samples, &verdict)?;
            report::write_json(&dir.join("verdict.json"), &VerdictSummary::of(&verdict))?;
            write_text(&dir.join("approach.svg"), &svg::approach_cones(&samples, &cfg.scenario.specs))?;
            println!("{}", report::verdict_text(&verdict));
            if let Some((holds, rob)) = table.embedded_verdict() {
                let same = holds == verdict.holds && rob.to_bits() == verdict.robustness.to_bits();
                println!(
                    "embedded verdict: {} (robustness {rob:.4}), {}",
                    if holds { "satisfied" } else { "falsified" },
                    if same { "reproduced" } else { "differs" }
                );
            }
            Ok(if verdict.holds { 0 } else { 1 })
        }
        Command::FalsifyNoise { channels, bisect } => {
            let channels = if channels.is_empty() {
                Channel::ALL.to_vec()
            } else {
                channels
                    .iter()
                    .map(|n| Channel::from_name(n).ok_or_else(|| Error::Config(format!("unknown channel `{n}`"))))
                    .collect::<Result<Vec<_>, _>>()?
            };
            let mut fcfg = cfg.falsifier;
            fcfg.bisect |= *bisect;
            let results = parallel::tolerance_searches(&cfg.scenario, &channels, &fcfg)?;
            let dir = out_dir(&cli.out)?;
            report::write_json(&dir.join("tolerance.json"), &results)?;
            print!("{}", report::tolerance_table(&results));
            Ok(0)
        }
        Command::SweepIc { grid } => {
            let mut scfg = cfg.sweep;
            if let Some(n) = grid {
                scfg.grid = (*n, *n);
            }
            let map = parallel::ic_sweep(&cfg.scenario, &scfg)?;
            let dir = out_dir(&cli.out)?;
            let path = dir.join("map.csv");
            let file = std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
            report::write_map_csv(std::io::BufWriter::new(file), &map).map_err(|e| Error::Config(e.to_string()))?;
            report::write_json(&dir.join("map.json"), &map)?;
            let title = format!("{} feedback", cfg.scenario.scenario.feedback.name());
            write_text(&dir.join("map.svg"), &svg::satisfaction_scatter(&map, &title))?;
            write_text(&dir.join("specs.svg"), &svg::spec_panels(&map))?;
            println!("{}", SweepSummary::of(&map).render());
            Ok(0)
        }
        Command::Stats { trace } => {
            let flight_trace = match trace {
                Some(p) => load_trace(p)?.into_flight_trace()?,
                None => {
                    let mut s = cfg.scenario.clone();
                    if !s.scenario.feedback.uses_vision() {
                        s.scenario.feedback = FeedbackSource::Vision;
                    }
                    simulate(&s, None)?.trace
                }
            };
            let st = compute_error_stats(&flight_trace)?;
            let dir = out_dir(&cli.out)?;
            report::write_json(&dir.join("stats.json"), &st)?;
            println!("{}", report::stats_text(&st));
            Ok(0)
        }
    }
}

fn write_margins(path: &Path, samples: &[SpecSample], v: &SpecVerdict) -> Result<(), Error> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(std::io::BufWriter::new(file));
    let fail = |e: csv::Error| Error::Config(e.to_string());
    w.write_record(["time", "x", "y", "h_agl", "phi1", "phi2", "phi3", "phi4", "phi5"])
        .map_err(fail)?;
    for (s, r) in samples.iter().zip(&v.robustness_signal) {
        let mut row = vec![s.time.to_string(), s.x.to_string(), s.y.to_string(), s.h_agl.to_string()];
        row.extend(r.iter().map(|m| m.to_string()));
        w.write_record(&row).map_err(fail)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
