//! Recorded closed-loop flights and estimate-versus-truth error statistics.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::airframe::{AircraftState, ControlInput};
use crate::control::Feedback;
use crate::error::{Error, Result};
use crate::math;
use crate::perception::PoseEstimate;
use crate::specs::SpecSample;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceSample {
    pub time: f64,
    pub state: AircraftState,
    pub input: ControlInput,
    /// Values the autopilot actually consumed.
    pub feedback: Feedback,
    pub estimate: Option<PoseEstimate>,
    /// Raw requirement margins; present only inside the monitored window.
    pub margins: Option<[f64; 5]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlightTrace {
    pub dt: f64,
    /// m MSL
    pub field_elevation: f64,
    /// Start of the monitored window, m before the threshold.
    pub x0: f64,
    pub samples: Vec<TraceSample>,
}

impl FlightTrace {
    pub fn new(dt: f64, field_elevation: f64, x0: f64) -> Self {
        FlightTrace {
            dt,
            field_elevation,
            x0,
            samples: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn spec_sample(&self, s: &TraceSample) -> SpecSample {
        SpecSample {
            time: s.time,
            u: s.state.u,
            v: s.state.v,
            w: s.state.w,
            x: s.state.x,
            y: s.state.y,
            h_agl: s.state.h - self.field_elevation,
        }
    }

    /// Samples of the monitored window, in the form the requirements read.
    pub fn spec_samples(&self) -> Vec<SpecSample> {
        self.samples
            .iter()
            .filter(|s| s.margins.is_some())
            .map(|s| self.spec_sample(s))
            .collect()
    }
}

/// Mean and standard deviation of one error channel.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ChannelStats {
    pub mean: f64,
    pub std: f64,
}

/// Absolute estimate errors over the samples that carry a valid estimate.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ErrorStats {
    pub x: ChannelStats,
    pub y: ChannelStats,
    pub h: ChannelStats,
    pub theta: ChannelStats,
    pub phi: ChannelStats,
    pub psi: ChannelStats,
    pub samples: usize,
}

fn stats(values: &[f64]) -> ChannelStats {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    ChannelStats {
        mean,
        std: math::sqrt(var.max(0.0)),
    }
}

/// Population statistics of `|estimate - truth|` per channel. Heading
/// differences are wrapped to `[-180, 180)` first.
pub fn compute_error_stats(trace: &FlightTrace) -> Result<ErrorStats> {
    let mut cols: [Vec<f64>; 6] = Default::default();
    for s in &trace.samples {
        let Some(e) = s.estimate.filter(|e| e.valid) else {
            continue;
        };
        let t = &s.state;
        let errs = [
            e.x - t.x,
            e.y - t.y,
            e.h - t.h,
            e.theta - t.theta,
            e.phi - t.phi,
            math::wrap_deg(e.psi - t.psi),
        ];
        for (c, v) in cols.iter_mut().zip(errs) {
            c.push(v.abs());
        }
    }
    if cols[0].is_empty() {
        return Err(Error::NoEstimates);
    }
    Ok(ErrorStats {
        x: stats(&cols[0]),
        y: stats(&cols[1]),
        h: stats(&cols[2]),
        theta: stats(&cols[3]),
        phi: stats(&cols[4]),
        psi: stats(&cols[5]),
        samples: cols[0].len(),
    })
}
