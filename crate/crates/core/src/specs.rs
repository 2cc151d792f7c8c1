//! Stabilized-approach requirements and the final-approach until-formula,
//! with boolean and quantitative semantics over sampled traces.
//!
//! Each atomic requirement yields a signed margin: positive when it holds
//! with room to spare, negative when violated, zero on the boundary. The
//! boolean verdict treats a zero margin as satisfied. Robustness divides
//! each margin by a fixed positive scale (the half-width of its admissible
//! band) so that speeds and distances aggregate without unit bias.

use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::tan_deg;

/// Identifies one of the five approach requirements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SpecId {
    /// Longitudinal speed near `u_c V_so`.
    Phi1,
    /// Lateral speed near zero.
    Phi2,
    /// Descent rate between zero and a multiple of the glideslope rate.
    Phi3,
    /// Inside the lateral cone around the extended centerline.
    Phi4,
    /// Inside the vertical cone around the glideslope.
    Phi5,
}

impl SpecId {
    pub const ALL: [SpecId; 5] = [SpecId::Phi1, SpecId::Phi2, SpecId::Phi3, SpecId::Phi4, SpecId::Phi5];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            SpecId::Phi1 => "phi1",
            SpecId::Phi2 => "phi2",
            SpecId::Phi3 => "phi3",
            SpecId::Phi4 => "phi4",
            SpecId::Phi5 => "phi5",
        }
    }
}

impl fmt::Display for SpecId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SpecParams {
    pub u_c: f64,
    /// m/s
    pub u_l: f64,
    pub u_u: f64,
    pub delta_v: f64,
    /// Glideslope angle, deg.
    pub alpha: f64,
    /// m/s
    pub w_l: f64,
    /// Dimensionless multiple of the glideslope descent rate.
    pub w_u: f64,
    /// m
    pub d_r: f64,
    /// deg
    pub beta: f64,
    /// m
    pub d: f64,
    pub t_range: f64,
    /// deg
    pub alpha_h: f64,
    /// End-of-approach height above the field, m.
    pub h_f: f64,
    /// Landing-configuration stall speed, m/s. No default; must be configured.
    pub v_so: Option<f64>,
}

impl Default for SpecParams {
    fn default() -> Self {
        SpecParams {
            u_c: 1.3,
            u_l: 2.6,
            u_u: 5.1,
            delta_v: 1.51,
            alpha: 3.0,
            w_l: 0.0,
            w_u: 2.0,
            d_r: 3048.0,
            beta: 2.0,
            d: 305.0,
            t_range: 305.0,
            alpha_h: 0.7,
            h_f: 5.0,
            v_so: None,
        }
    }
}

impl SpecParams {
    pub fn validate(&self) -> Result<()> {
        let non_neg = [self.u_l, self.u_u, self.delta_v, self.d_r, self.d, self.t_range];
        if non_neg.iter().any(|v| !(*v >= 0.0)) {
            return Err(Error::Config("spec bounds must be non-negative"));
        }
        if !(self.alpha_h < self.alpha) {
            return Err(Error::Config("glideslope band must be narrower than the glideslope angle"));
        }
        if !(self.h_f > 0.0) {
            return Err(Error::Config("end-of-approach height must be positive"));
        }
        if let Some(v) = self.v_so {
            if !(v > 0.0) {
                return Err(Error::Config("stall speed must be positive"));
            }
        }
        Ok(())
    }

    pub fn stall_speed(&self) -> Result<f64> {
        self.v_so.ok_or(Error::Config("stall speed V_so is not configured"))
    }

    /// Positive normalizing scale for each requirement's margin.
    pub fn scales(&self) -> Result<[f64; 5]> {
        let v_so = self.stall_speed()?;
        let nominal_u = self.u_c * v_so;
        let raw = [
            0.5 * (self.u_l + self.u_u),
            self.delta_v,
            0.5 * (self.w_u * tan_deg(self.alpha) * nominal_u - self.w_l),
            self.d_r * tan_deg(self.beta),
            0.5 * ((self.d + self.t_range) * tan_deg(self.alpha + self.alpha_h)
                - (self.d - self.t_range) * tan_deg(self.alpha - self.alpha_h)),
        ];
        Ok(raw.map(|s| if s > 0.0 && s.is_finite() { s } else { 1.0 }))
    }
}

/// The kinematic quantities the requirements read.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SpecSample {
    pub time: f64,
    pub u: f64,
    pub v: f64,
    pub w: f64,
    pub x: f64,
    pub y: f64,
    /// Height above the field, m.
    pub h_agl: f64,
}

pub fn eval_phi1(s: &SpecSample, p: &SpecParams) -> Result<f64> {
    let target = p.u_c * p.stall_speed()?;
    Ok((s.u - (target - p.u_l)).min((target + p.u_u) - s.u))
}

pub fn eval_phi2(s: &SpecSample, p: &SpecParams) -> f64 {
    p.delta_v - s.v.abs()
}

pub fn eval_phi3(s: &SpecSample, p: &SpecParams) -> f64 {
    (s.w - p.w_l).min(p.w_u * tan_deg(p.alpha) * s.u - s.w)
}

pub fn eval_phi4(s: &SpecSample, p: &SpecParams) -> f64 {
    (s.x + p.d_r) * tan_deg(p.beta) - s.y.abs()
}

pub fn eval_phi5(s: &SpecSample, p: &SpecParams) -> f64 {
    let lower = (s.x + p.d - p.t_range) * tan_deg(p.alpha - p.alpha_h);
    let upper = (s.x + p.d + p.t_range) * tan_deg(p.alpha + p.alpha_h);
    (s.h_agl - lower).min(upper - s.h_agl)
}

/// Raw margins of all five requirements.
pub fn margins(s: &SpecSample, p: &SpecParams) -> Result<[f64; 5]> {
    Ok([
        eval_phi1(s, p)?,
        eval_phi2(s, p),
        eval_phi3(s, p),
        eval_phi4(s, p),
        eval_phi5(s, p),
    ])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecVerdict {
    /// Per-sample boolean signal of each requirement.
    pub holds_signal: Vec<[bool; 5]>,
    /// Per-sample normalized margins.
    pub robustness_signal: Vec<[f64; 5]>,
    /// Whether each requirement held at every sample before the release
    /// (over the whole trace when the approach never ended).
    pub spec_holds: [bool; 5],
    /// Smallest normalized margin of each requirement over the same span.
    pub spec_robustness: [f64; 5],
    /// Boolean verdict of the until-formula.
    pub holds: bool,
    /// Normalized robustness of the until-formula.
    pub robustness: f64,
    /// First sample with `h_agl <= h_f`.
    pub release_index: Option<usize>,
    pub release_time: Option<f64>,
    /// Earliest violated requirement before the release and its sample index.
    pub first_violation: Option<(SpecId, usize)>,
}

impl SpecVerdict {
    pub fn failed_specs(&self) -> impl Iterator<Item = SpecId> + '_ {
        SpecId::ALL.into_iter().filter(|id| !self.spec_holds[id.index()])
    }
}

/// Evaluates `(Phi1 & ... & Phi5) U (h_agl <= h_f)` with strict-past until
/// on the sampled trace.
pub fn eval_final_approach(trace: &[SpecSample], p: &SpecParams) -> Result<SpecVerdict> {
    if trace.is_empty() {
        return Err(Error::EmptyTrace);
    }
    if trace.windows(2).any(|w| !(w[1].time > w[0].time)) {
        return Err(Error::InvalidArg("trace time must be strictly increasing"));
    }
    let scales = p.scales()?;
    let mut holds_signal = Vec::with_capacity(trace.len());
    let mut robustness_signal = Vec::with_capacity(trace.len());
    for s in trace {
        let m = margins(s, p)?;
        holds_signal.push(m.map(|v| v >= 0.0));
        let mut r = [0.0; 5];
        for i in 0..5 {
            r[i] = m[i] / scales[i];
        }
        robustness_signal.push(r);
    }

    let release_index = trace.iter().position(|s| s.h_agl <= p.h_f);
    let mut robustness = f64::NEG_INFINITY;
    let mut prefix_min = f64::INFINITY;
    for (k, s) in trace.iter().enumerate() {
        let release = (p.h_f - s.h_agl) / p.h_f;
        robustness = robustness.max(release.min(prefix_min));
        let here = robustness_signal[k].iter().copied().fold(f64::INFINITY, f64::min);
        prefix_min = prefix_min.min(here);
    }

    let span = release_index.unwrap_or(trace.len());
    let mut spec_holds = [true; 5];
    let mut spec_robustness = [f64::INFINITY; 5];
    let mut first_violation = None;
    for j in 0..span {
        for id in SpecId::ALL {
            let i = id.index();
            spec_holds[i] &= holds_signal[j][i];
            spec_robustness[i] = spec_robustness[i].min(robustness_signal[j][i]);
        }
        if first_violation.is_none() {
            // Among simultaneous violations report the deepest.
            let worst = SpecId::ALL
                .into_iter()
                .filter(|id| !holds_signal[j][id.index()])
                .min_by(|a, b| {
                    robustness_signal[j][a.index()].total_cmp(&robustness_signal[j][b.index()])
                });
            if let Some(id) = worst {
                first_violation = Some((id, j));
            }
        }
    }
    let holds = release_index.is_some() && spec_holds.iter().all(|h| *h);

    Ok(SpecVerdict {
        holds_signal,
        robustness_signal,
        spec_holds,
        spec_robustness,
        holds,
        robustness,
        release_index,
        release_time: release_index.map(|k| trace[k].time),
        first_violation,
    })
}
