//! Trace CSV files.
//!
//! A file starts with `# autoland-trace v1` and `# key: value` metadata
//! lines, followed by a header row and one row per sample. Floats are
//! written with `Display`, which round-trips exactly. External traces may
//! carry only `time` (or `t`), `u`, `v`, `w`, `x`, `y` and `h_agl`; such
//! traces can be monitored but not replayed as flights.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use autoland_core::perception::PoseEstimate;
use autoland_core::specs::SpecSample;
use autoland_core::trace::{FlightTrace, TraceSample};
use autoland_core::{AircraftState, ControlInput, Feedback, SpecVerdict};

use crate::Error;

pub const MAGIC: &str = "# autoland-trace v1";

const STATE: [&str; 13] = ["time", "u", "v", "w", "p", "q", "r", "phi", "theta", "psi", "x", "y", "h"];
const INPUT: [&str; 4] = ["delta_t", "delta_e", "delta_a", "delta_r"];
const FEEDBACK: [&str; 8] = ["fb_u", "fb_q", "fb_x", "fb_y", "fb_h", "fb_theta", "fb_phi", "fb_psi"];
const ESTIMATE: [&str; 8] = ["est_x", "est_y", "est_h", "est_theta", "est_phi", "est_psi", "est_rms", "est_valid"];
const MARGINS: [&str; 5] = ["phi1", "phi2", "phi3", "phi4", "phi5"];

/// Every column a full trace file carries, in file order.
pub fn full_columns() -> Vec<&'static str> {
    let mut c = STATE.to_vec();
    c.push("h_agl");
    c.extend(INPUT);
    c.extend(FEEDBACK);
    c.extend(ESTIMATE);
    c.extend(MARGINS);
    c
}

#[derive(Debug, Clone, PartialEq)]
pub enum TraceRows {
    Full(Vec<TraceSample>),
    Minimal(Vec<SpecSample>),
}

/// A loaded trace file.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceTable {
    pub meta: BTreeMap<String, String>,
    pub rows: TraceRows,
}

impl TraceTable {
    pub fn len(&self) -> usize {
        match &self.rows {
            TraceRows::Full(r) => r.len(),
            TraceRows::Minimal(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn meta_f64(&self, key: &str) -> Option<f64> {
        self.meta.get(key).and_then(|v| v.parse().ok())
    }

    /// Verdict stored by the writer, if any.
    pub fn embedded_verdict(&self) -> Option<(bool, f64)> {
        let holds = self.meta.get("holds")?.parse().ok()?;
        Some((holds, self.meta_f64("robustness")?))
    }

    fn field_elevation(&self) -> Result<f64, Error> {
        self.meta_f64("field_elevation")
            .ok_or_else(|| Error::Schema("field_elevation (metadata)".into()))
    }

    pub fn into_flight_trace(self) -> Result<FlightTrace, Error> {
        let field = self.field_elevation()?;
        let dt = self.meta_f64("dt").ok_or_else(|| Error::Schema("dt (metadata)".into()))?;
        let x0 = self.meta_f64("x0").ok_or_else(|| Error::Schema("x0 (metadata)".into()))?;
        match self.rows {
            TraceRows::Full(samples) => Ok(FlightTrace {
                dt,
                field_elevation: field,
                x0,
                samples,
            }),
            TraceRows::Minimal(_) => Err(Error::Schema("p".into())),
        }
    }

    /// Samples the approach monitor reads: the monitored window of a full
    /// trace, every row of a minimal one.
    pub fn spec_samples(&self) -> Result<Vec<SpecSample>, Error> {
        match &self.rows {
            TraceRows::Minimal(r) => Ok(r.clone()),
            TraceRows::Full(samples) => {
                let field = self.field_elevation()?;
                let trace = FlightTrace {
                    dt: self.meta_f64("dt").unwrap_or(0.0),
                    field_elevation: field,
                    x0: self.meta_f64("x0").unwrap_or(f64::INFINITY),
                    samples: samples.clone(),
                };
                if samples.iter().any(|s| s.margins.is_some()) {
                    Ok(trace.spec_samples())
                } else {
                    Ok(samples
                        .iter()
                        .filter(|s| s.state.x < trace.x0)
                        .map(|s| trace.spec_sample(s))
                        .collect())
                }
            }
        }
    }
}

fn push_f64(row: &mut Vec<String>, v: f64) {
    row.push(format!("{v}"));
}

fn row_of(trace: &FlightTrace, s: &TraceSample) -> Vec<String> {
    let mut row = Vec::with_capacity(40);
    let st = &s.state;
    for v in [s.time, st.u, st.v, st.w, st.p, st.q, st.r, st.phi, st.theta, st.psi, st.x, st.y, st.h] {
        push_f64(&mut row, v);
    }
    push_f64(&mut row, st.h - trace.field_elevation);
    let i = &s.input;
    for v in [i.delta_t, i.delta_e, i.delta_a, i.delta_r] {
        push_f64(&mut row, v);
    }
    let f = &s.feedback;
    for v in [f.u, f.q, f.x, f.y, f.h, f.theta, f.phi, f.psi] {
        push_f64(&mut row, v);
    }
    match &s.estimate {
        Some(e) => {
            for v in [e.x, e.y, e.h, e.theta, e.phi, e.psi, e.reprojection_rms] {
                push_f64(&mut row, v);
            }
            row.push(e.valid.to_string());
        }
        None => row.extend(std::iter::repeat_n(String::new(), ESTIMATE.len())),
    }
    match &s.margins {
        Some(m) => m.iter().for_each(|v| push_f64(&mut row, *v)),
        None => row.extend(std::iter::repeat_n(String::new(), MARGINS.len())),
    }
    row
}

/// Writes a flight trace; `verdict` is stored in the metadata when given.
pub fn write_trace<W: Write>(out: W, trace: &FlightTrace, verdict: Option<&SpecVerdict>) -> Result<(), csv::Error> {
    let mut head = String::new();
    writeln!(head, "{MAGIC}").unwrap();
    writeln!(head, "# dt: {}", trace.dt).unwrap();
    writeln!(head, "# field_elevation: {}", trace.field_elevation).unwrap();
    writeln!(head, "# x0: {}", trace.x0).unwrap();
    if let Some(v) = verdict {
        writeln!(head, "# holds: {}", v.holds).unwrap();
        writeln!(head, "# robustness: {}", v.robustness).unwrap();
    }
    let mut out = out;
    out.write_all(head.as_bytes())?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(full_columns())?;
    for s in &trace.samples {
        w.write_record(row_of(trace, s))?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_trace(path: &Path, trace: &FlightTrace, verdict: Option<&SpecVerdict>) -> Result<(), Error> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_trace(std::io::BufWriter::new(file), trace, verdict).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Config(format!("{other:?}")),
    })
}

pub fn load_trace(path: &Path) -> Result<TraceTable, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_trace(&text)
}

struct Columns {
    index: BTreeMap<String, usize>,
}

impl Columns {
    fn get(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    fn require(&self, name: &str) -> Result<usize, Error> {
        self.get(name).ok_or_else(|| Error::Schema(name.to_string()))
    }
}

fn parse_field(record: &csv::StringRecord, col: usize, name: &str, line: u64) -> Result<Option<f64>, Error> {
    let raw = record.get(col).unwrap_or("");
    if raw.is_empty() {
        return Ok(None);
    }
    raw.parse().map(Some).map_err(|_| Error::Parse {
        line,
        message: format!("column `{name}`: `{raw}` is not a number"),
    })
}

fn number(record: &csv::StringRecord, col: usize, name: &str, line: u64) -> Result<f64, Error> {
    parse_field(record, col, name, line)?.ok_or_else(|| Error::Parse {
        line,
        message: format!("column `{name}` is empty"),
    })
}

/// Parses trace text in either the full or the minimal layout.
pub fn parse_trace(text: &str) -> Result<TraceTable, Error> {
    let mut meta = BTreeMap::new();
    for line in text.lines().take_while(|l| l.trim_start().starts_with('#')) {
        if let Some((k, v)) = line.trim_start_matches('#').split_once(':') {
            meta.insert(k.trim().to_string(), v.trim().to_string());
        }
    }
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let csv_err = |e: csv::Error| Error::Parse {
        line: e.position().map_or(0, |p| p.line()),
        message: match e.kind() {
            csv::ErrorKind::UnequalLengths { expected_len, len, .. } => {
                format!("expected {expected_len} fields, found {len}")
            }
            _ => e.to_string(),
        },
    };
    let header = reader.headers().map_err(csv_err)?.clone();
    let cols = Columns {
        index: header.iter().enumerate().map(|(i, h)| (h.to_string(), i)).collect(),
    };
    let full = ["p", "delta_t", "fb_u"].iter().any(|c| cols.get(c).is_some());

    if !full {
        let time = cols.get("time").or(cols.get("t")).ok_or_else(|| Error::Schema("time".into()))?;
        let mut named = [0usize; 5];
        for (slot, n) in named.iter_mut().zip(["u", "v", "w", "x", "y"]) {
            *slot = cols.require(n)?;
        }
        let [u, v, w, x, y] = named;
        let h_agl = cols.get("h_agl");
        let h = cols.get("h");
        let field = meta.get("field_elevation").and_then(|v: &String| v.parse::<f64>().ok());
        if h_agl.is_none() && (h.is_none() || field.is_none()) {
            return Err(Error::Schema("h_agl".into()));
        }
        let mut rows = Vec::new();
        for rec in reader.records() {
            let rec = rec.map_err(csv_err)?;
            let line = rec.position().map_or(0, |p| p.line());
            let height = match h_agl {
                Some(c) => number(&rec, c, "h_agl", line)?,
                None => number(&rec, h.unwrap(), "h", line)? - field.unwrap(),
            };
            rows.push(SpecSample {
                time: number(&rec, time, "time", line)?,
                u: number(&rec, u, "u", line)?,
                v: number(&rec, v, "v", line)?,
                w: number(&rec, w, "w", line)?,
                x: number(&rec, x, "x", line)?,
                y: number(&rec, y, "y", line)?,
                h_agl: height,
            });
        }
        return Ok(TraceTable {
            meta,
            rows: TraceRows::Minimal(rows),
        });
    }

    let required: Vec<(usize, &str)> = STATE
        .iter()
        .chain(INPUT.iter())
        .chain(FEEDBACK.iter())
        .map(|n| cols.require(n).map(|c| (c, *n)))
        .collect::<Result<_, _>>()?;
    let estimate: Option<Vec<(usize, &str)>> = ESTIMATE
        .iter()
        .map(|n| cols.get(n).map(|c| (c, *n)))
        .collect();
    let margins: Option<Vec<(usize, &str)>> = MARGINS.iter().map(|n| cols.get(n).map(|c| (c, *n))).collect();

    let mut samples = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map_or(0, |p| p.line());
        let mut v = [0.0; 25];
        for (k, (c, n)) in required.iter().enumerate() {
            v[k] = number(&rec, *c, n, line)?;
        }
        let state = AircraftState::from_array(v[1..13].try_into().unwrap());
        let input = ControlInput {
            delta_t: v[13],
            delta_e: v[14],
            delta_a: v[15],
            delta_r: v[16],
        };
        let feedback = Feedback {
            u: v[17],
            q: v[18],
            x: v[19],
            y: v[20],
            h: v[21],
            theta: v[22],
            phi: v[23],
            psi: v[24],
        };
        let estimate = match &estimate {
            None => None,
            Some(cols) => {
                let (valid_col, _) = cols[7];
                let valid = rec.get(valid_col).unwrap_or("");
                if valid.is_empty() {
                    None
                } else {
                    let mut e = [0.0; 7];
                    for (k, (c, n)) in cols[..7].iter().enumerate() {
                        e[k] = number(&rec, *c, n, line)?;
                    }
                    Some(PoseEstimate {
                        x: e[0],
                        y: e[1],
                        h: e[2],
                        theta: e[3],
                        phi: e[4],
                        psi: e[5],
                        reprojection_rms: e[6],
                        valid: valid.parse().map_err(|_| Error::Parse {
                            line,
                            message: format!("column `est_valid`: `{valid}` is not a boolean"),
                        })?,
                    })
                }
            }
        };
        let margins = match &margins {
            None => None,
            Some(cols) => {
                let vals = cols
                    .iter()
                    .map(|(c, n)| parse_field(&rec, *c, n, line))
                    .collect::<Result<Vec<_>, _>>()?;
                if vals.iter().all(|v| v.is_none()) {
                    None
                } else {
                    let mut m = [0.0; 5];
                    for (k, val) in vals.into_iter().enumerate() {
                        m[k] = val.ok_or_else(|| Error::Parse {
                            line,
                            message: format!("column `{}` is empty", MARGINS[k]),
                        })?;
                    }
                    Some(m)
                }
            }
        };
        samples.push(TraceSample {
            time: v[0],
            state,
            input,
            feedback,
            estimate,
            margins,
        });
    }
    Ok(TraceTable {
        meta,
        rows: TraceRows::Full(samples),
    })
}
