//! Result files and text summaries.

use std::fmt::Write as _;
use std::io::Write;

use autoland_core::falsify::{Channel, SatisfactionMap, ToleranceResult};
use autoland_core::trace::ErrorStats;
use autoland_core::{SpecId, SpecVerdict};
use serde::Serialize;

pub const MAP_COLUMNS: [&str; 11] = [
    "dy_req",
    "dh_req",
    "dy_at_x0",
    "dh_at_x0",
    "phi1",
    "phi2",
    "phi3",
    "phi4",
    "phi5",
    "overall",
    "perception_valid",
];

/// Flat per-cell CSV of a satisfaction map.
pub fn write_map_csv<W: Write>(out: W, map: &SatisfactionMap) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(MAP_COLUMNS)?;
    for c in &map.cells {
        let mut row = vec![
            c.dy_req.to_string(),
            c.dh_req.to_string(),
            c.dy_at_x0.to_string(),
            c.dh_at_x0.to_string(),
        ];
        row.extend(c.spec_holds.iter().map(|h| h.to_string()));
        row.push(c.overall.to_string());
        row.push(c.perception_valid.to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Mean `|offset|` over cells failing and over cells passing one requirement,
/// using the requested lateral offset for `lateral` and the vertical one otherwise.
pub fn failure_extremity(map: &SatisfactionMap, spec: SpecId, lateral: bool) -> (Option<f64>, Option<f64>) {
    let mean = |it: Vec<f64>| (!it.is_empty()).then(|| it.iter().sum::<f64>() / it.len() as f64);
    let pick = |c: &autoland_core::falsify::Cell| if lateral { c.dy_req.abs() } else { c.dh_req.abs() };
    let (fail, pass): (Vec<_>, Vec<_>) = map.cells.iter().partition(|c| !c.spec_holds[spec.index()]);
    (mean(fail.iter().map(|c| pick(c)).collect()), mean(pass.iter().map(|c| pick(c)).collect()))
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepSummary {
    pub cells: usize,
    pub satisfied: usize,
    pub per_spec_satisfied: [usize; 5],
    pub perception_invalid: usize,
    pub diverged: usize,
}

impl SweepSummary {
    pub fn of(map: &SatisfactionMap) -> Self {
        let mut per_spec = [0; 5];
        for c in &map.cells {
            for (n, h) in per_spec.iter_mut().zip(c.spec_holds) {
                *n += h as usize;
            }
        }
        SweepSummary {
            cells: map.cells.len(),
            satisfied: map.satisfied_count(),
            per_spec_satisfied: per_spec,
            perception_invalid: map.cells.iter().filter(|c| !c.perception_valid).count(),
            diverged: map.cells.iter().filter(|c| c.diverged).count(),
        }
    }

    pub fn render(&self) -> String {
        let mut s = format!("satisfied {}/{}", self.satisfied, self.cells);
        for id in SpecId::ALL {
            let _ = write!(s, "  {id} {}", self.per_spec_satisfied[id.index()]);
        }
        let _ = write!(s, "  perception-invalid {}  diverged {}", self.perception_invalid, self.diverged);
        s
    }
}

fn bound_text(channel: Channel, b: f64) -> String {
    match channel {
        Channel::X => format!("[-{:.0}% x, {:.0}% x]", b * 100.0, b * 100.0),
        Channel::H => format!("[-{:.0}% h_agl, {:.0}% h_agl]", b * 100.0, b * 100.0),
        _ => format!("[-{b}, {b}]"),
    }
}

/// Plain-text table of tolerable noise bounds.
pub fn tolerance_table(results: &[ToleranceResult]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:<7} {:<26} {:<9} {:<12} {:>5}", "state", "tolerable bound", "unit", "first failed", "runs");
    for r in results {
        let failed = match (r.exhausted, r.first_failed) {
            (true, _) => "none (cap)".to_string(),
            (false, Some(id)) => id.to_string(),
            (false, None) => "-".to_string(),
        };
        let bound = if r.exhausted {
            format!(">= {}", bound_text(r.channel, r.tolerable_bound))
        } else {
            bound_text(r.channel, r.tolerable_bound)
        };
        let _ = writeln!(
            s,
            "{:<7} {:<26} {:<9} {:<12} {:>5}",
            r.channel.name(),
            bound,
            r.channel.unit(),
            failed,
            r.simulations
        );
    }
    s
}

pub fn verdict_text(v: &SpecVerdict) -> String {
    let mut s = format!(
        "{} (robustness {:.4})",
        if v.holds { "satisfied" } else { "falsified" },
        v.robustness
    );
    for id in SpecId::ALL {
        let _ = write!(
            s,
            "\n  {id}: {} (min normalized margin {:.4})",
            if v.spec_holds[id.index()] { "holds" } else { "violated" },
            v.spec_robustness[id.index()]
        );
    }
    match v.release_time {
        Some(t) => {
            let _ = write!(s, "\n  end of approach at t = {t:.2} s");
        }
        None => s.push_str("\n  end-of-approach height never reached"),
    }
    if let Some((id, k)) = v.first_violation {
        let _ = write!(s, "\n  first violation: {id} at sample {k}");
    }
    s
}

pub fn stats_text(st: &ErrorStats) -> String {
    let mut s = format!("{:<6} {:>10} {:>10}\n", "state", "mean", "std");
    for (name, c) in [
        ("x", st.x),
        ("y", st.y),
        ("h", st.h),
        ("theta", st.theta),
        ("phi", st.phi),
        ("psi", st.psi),
    ] {
        let _ = writeln!(s, "{name:<6} {:>10.4} {:>10.4}", c.mean, c.std);
    }
    let _ = write!(s, "({} estimates)", st.samples);
    s
}

pub fn write_json<T: Serialize>(path: &std::path::Path, value: &T) -> Result<(), crate::Error> {
    let text = serde_json::to_string_pretty(value).map_err(|e| crate::Error::Config(e.to_string()))?;
    std::fs::write(path, text + "\n").map_err(|e| crate::Error::io(path, e))
}
