//! Minimal SVG plots: satisfaction maps and approach cones.

use std::fmt::Write as _;

use autoland_core::falsify::SatisfactionMap;
use autoland_core::specs::{SpecParams, SpecSample};
use autoland_core::SpecId;

const PASS: &str = "#2e8b57";
const FAIL: &str = "#d62728";

/// Linear map from data to pixels.
#[derive(Clone, Copy)]
struct Axis {
    lo: f64,
    hi: f64,
    px_lo: f64,
    px_hi: f64,
}

impl Axis {
    fn new(lo: f64, hi: f64, px_lo: f64, px_hi: f64) -> Self {
        let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 1.0, lo + 1.0) };
        Axis { lo, hi, px_lo, px_hi }
    }

    fn at(&self, v: f64) -> f64 {
        self.px_lo + (v - self.lo) / (self.hi - self.lo) * (self.px_hi - self.px_lo)
    }
}

fn extent(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if lo.is_finite() {
        let pad = 0.05 * (hi - lo).max(1.0);
        (lo - pad, hi + pad)
    } else {
        (-1.0, 1.0)
    }
}

fn frame(s: &mut String, x: Axis, y: Axis, title: &str, xlabel: &str, ylabel: &str) {
    let _ = write!(
        s,
        r#"<rect x="{:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="none" stroke="black"/>"#,
        x.px_lo,
        y.px_hi,
        x.px_hi - x.px_lo,
        y.px_lo - y.px_hi
    );
    let _ = write!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="13">{title}</text>"#,
        0.5 * (x.px_lo + x.px_hi),
        y.px_hi - 8.0
    );
    let _ = write!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="11">{xlabel}</text>"#,
        0.5 * (x.px_lo + x.px_hi),
        y.px_lo + 30.0
    );
    let _ = write!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="11" transform="rotate(-90 {:.1} {:.1})">{ylabel}</text>"#,
        x.px_lo - 34.0,
        0.5 * (y.px_lo + y.px_hi),
        x.px_lo - 34.0,
        0.5 * (y.px_lo + y.px_hi)
    );
    for (v, px) in [(x.lo, x.px_lo), (x.hi, x.px_hi)] {
        let _ = write!(s, r#"<text x="{px:.1}" y="{:.1}" text-anchor="middle" font-size="10">{v:.1}</text>"#, y.px_lo + 14.0);
    }
    for (v, py) in [(y.lo, y.px_lo), (y.hi, y.px_hi)] {
        let _ = write!(s, r#"<text x="{:.1}" y="{py:.1}" text-anchor="end" font-size="10">{v:.1}</text>"#, x.px_lo - 4.0);
    }
}

fn document(width: f64, height: f64, body: &str) -> String {
    format!(
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}"><rect width="100%" height="100%" fill="white"/>{body}</svg>
"#
    )
}

/// Realized deviations at the start of the monitored window, colored by the overall verdict.
pub fn satisfaction_scatter(map: &SatisfactionMap, title: &str) -> String {
    let (xl, xh) = extent(map.cells.iter().map(|c| c.dy_at_x0));
    let (yl, yh) = extent(map.cells.iter().map(|c| c.dh_at_x0));
    let x = Axis::new(xl, xh, 70.0, 470.0);
    let y = Axis::new(yl, yh, 430.0, 40.0);
    let mut s = String::new();
    frame(&mut s, x, y, title, "lateral deviation at x0 (m)", "vertical deviation at x0 (m)");
    for c in &map.cells {
        if !(c.dy_at_x0.is_finite() && c.dh_at_x0.is_finite()) {
            continue;
        }
        let color = if c.overall { PASS } else { FAIL };
        let _ = write!(
            s,
            r#"<circle cx="{:.1}" cy="{:.1}" r="3.5" fill="{color}"><title>dy {} dh {}</title></circle>"#,
            x.at(c.dy_at_x0),
            y.at(c.dh_at_x0),
            c.dy_req,
            c.dh_req
        );
    }
    document(520.0, 480.0, &s)
}

/// One grid panel per requirement over the requested offsets.
pub fn spec_panels(map: &SatisfactionMap) -> String {
    let (xl, xh) = extent(map.cells.iter().map(|c| c.dy_req));
    let (yl, yh) = extent(map.cells.iter().map(|c| c.dh_req));
    let cw = 260.0 / map.nx.max(1) as f64;
    let ch = 260.0 / map.ny.max(1) as f64;
    let mut s = String::new();
    for id in SpecId::ALL {
        let k = id.index() as f64;
        let left = 60.0 + k * 320.0;
        let x = Axis::new(xl, xh, left, left + 260.0);
        let y = Axis::new(yl, yh, 320.0, 60.0);
        frame(&mut s, x, y, id.name(), "dy (m)", "dh (m)");
        for c in &map.cells {
            let color = if c.spec_holds[id.index()] { PASS } else { FAIL };
            let _ = write!(
                s,
                r#"<rect x="{:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="{color}"/>"#,
                x.at(c.dy_req) - 0.45 * cw,
                y.at(c.dh_req) - 0.45 * ch,
                0.9 * cw,
                0.9 * ch
            );
        }
    }
    document(1640.0, 370.0, &s)
}

fn polyline(s: &mut String, pts: impl Iterator<Item = (f64, f64)>, color: &str, dash: bool) {
    let pts: Vec<String> = pts.map(|(a, b)| format!("{a:.1},{b:.1}")).collect();
    let _ = write!(
        s,
        r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"{}/>"#,
        pts.join(" "),
        if dash { r#" stroke-dasharray="5,4""# } else { "" }
    );
}

/// Lateral and vertical approach cones with the flown path.
pub fn approach_cones(samples: &[SpecSample], specs: &SpecParams) -> String {
    let tan = |d: f64| d.to_radians().tan();
    let (xl, xh) = extent(samples.iter().map(|s| s.x));
    let mut s = String::new();
    let xa = Axis::new(xh, xl, 70.0, 570.0);
    let lat = |x: f64| (x + specs.d_r) * tan(specs.beta);
    let low = |x: f64| (x + specs.d - specs.t_range) * tan(specs.alpha - specs.alpha_h);
    let high = |x: f64| (x + specs.d + specs.t_range) * tan(specs.alpha + specs.alpha_h);
    let grid: Vec<f64> = (0..=50).map(|k| xl + (xh - xl) * k as f64 / 50.0).collect();

    let ymax = samples.iter().map(|p| p.y.abs()).fold(0.0, f64::max).max(10.0) * 1.3;
    let ya = Axis::new(-ymax, ymax, 330.0, 50.0);
    frame(&mut s, xa, ya, "lateral", "distance to threshold (m)", "y (m)");
    for sign in [1.0, -1.0] {
        polyline(
            &mut s,
            grid.iter().map(|x| (xa.at(*x), ya.at((sign * lat(*x)).clamp(-ymax, ymax)))),
            "gray",
            true,
        );
    }
    polyline(&mut s, samples.iter().map(|p| (xa.at(p.x), ya.at(p.y))), "#1f77b4", false);

    let hmax = samples.iter().map(|p| p.h_agl).chain(grid.iter().map(|x| high(*x))).fold(0.0, f64::max) * 1.05;
    let ha = Axis::new(0.0, hmax, 710.0, 430.0);
    frame(&mut s, xa, ha, "vertical", "distance to threshold (m)", "height above field (m)");
    polyline(&mut s, grid.iter().map(|x| (xa.at(*x), ha.at(low(*x).max(0.0)))), "gray", true);
    polyline(&mut s, grid.iter().map(|x| (xa.at(*x), ha.at(high(*x)))), "gray", true);
    polyline(&mut s, samples.iter().map(|p| (xa.at(p.x), ha.at(p.h_agl))), "#1f77b4", false);
    document(620.0, 760.0, &s)
}
