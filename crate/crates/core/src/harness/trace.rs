//! Line-delimited JSON traces and replay verification.
//!
//! The first line is a [`TraceHeader`]; every following line is one
//! [`TraceRecord`]. Readers reject any `format_version` other than
//! [`FORMAT_VERSION`].

use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::episode::{play_episode, TraceLevel, TraceRecord};
use crate::dynamics::DroneParams;
use crate::error::{Error, Result};
use crate::policies::PolicySpec;
use crate::tasks::TaskSpec;

pub const FORMAT_VERSION: u32 = 1;

/// Tolerance on every replayed state component.
pub const REPLAY_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceHeader {
    pub format_version: u32,
    pub spec: TaskSpec,
    pub drone: DroneParams,
    pub red: String,
    pub blue: String,
    pub master_seed: u64,
    pub episode: u64,
    pub verbosity: TraceLevel,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trace {
    pub header: TraceHeader,
    pub records: Vec<TraceRecord>,
}

impl Trace {
    pub fn write_to(&self, out: &mut impl Write) -> Result<()> {
        writeln!(out, "{}", json(&self.header)?)?;
        for r in &self.records {
            writeln!(out, "{}", json(r)?)?;
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        self.write_to(&mut buf)?;
        Ok(buf)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_to(&mut f)?;
        f.flush()?;
        Ok(())
    }

    pub fn read_from(input: impl BufRead) -> Result<Self> {
        let mut lines = input.lines();
        let first = lines.next().ok_or(Error::TraceParse { line: 1, message: "empty trace".into() })??;
        let raw: serde_json::Value =
            serde_json::from_str(&first).map_err(|e| Error::TraceParse { line: 1, message: e.to_string() })?;
        let found = raw.get("format_version").and_then(|v| v.as_u64()).ok_or(Error::TraceParse {
            line: 1,
            message: "header has no format_version".into(),
        })?;
        if found != u64::from(FORMAT_VERSION) {
            return Err(Error::TraceVersion { found: found as u32, expected: FORMAT_VERSION });
        }
        let header: TraceHeader =
            serde_json::from_value(raw).map_err(|e| Error::TraceParse { line: 1, message: e.to_string() })?;
        let mut records = Vec::new();
        for (k, line) in lines.enumerate() {
            let line = line?;
            let record: TraceRecord =
                serde_json::from_str(&line).map_err(|e| Error::TraceParse { line: k + 2, message: e.to_string() })?;
            records.push(record);
        }
        Ok(Trace { header, records })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path)
            .map_err(|e| Error::config(format!("cannot open trace {}: {e}", path.display())))?;
        Self::read_from(std::io::BufReader::new(f))
    }
}

fn json<T: Serialize>(v: &T) -> Result<String> {
    serde_json::to_string(v).map_err(|e| Error::Contract(format!("trace serialization: {e}")))
}

/// First state component that differs between a trace and its replay.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Divergence {
    pub step: u32,
    pub field: String,
    pub recorded: f64,
    pub replayed: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplayReport {
    pub steps_checked: usize,
    pub divergence: Option<Divergence>,
}

impl ReplayReport {
    pub fn ok(&self) -> bool {
        self.divergence.is_none()
    }
}

/// Re-simulate a full-verbosity trace from its seed and compare every step.
pub fn replay(trace: &Trace) -> Result<ReplayReport> {
    let h = &trace.header;
    if h.verbosity != TraceLevel::Full {
        return Err(Error::config("replay needs a trace recorded with full verbosity"));
    }
    let red: PolicySpec = h.red.parse()?;
    let blue: PolicySpec = h.blue.parse()?;
    let fresh = play_episode(&h.spec, &h.drone, &red, &blue, h.master_seed, h.episode, TraceLevel::Full)?;
    let mut checked = 0;
    for (k, want) in trace.records.iter().enumerate() {
        let Some(got) = fresh.records.get(k) else {
            return Ok(ReplayReport {
                steps_checked: checked,
                divergence: Some(Divergence { step: want.step, field: "episode length".into(), recorded: want.step as f64, replayed: k as f64 }),
            });
        };
        if let Some(d) = compare(want, got) {
            return Ok(ReplayReport { steps_checked: checked, divergence: Some(d) });
        }
        checked += 1;
    }
    if fresh.records.len() != trace.records.len() {
        let step = fresh.records.get(trace.records.len()).map_or(0, |r| r.step);
        return Ok(ReplayReport {
            steps_checked: checked,
            divergence: Some(Divergence {
                step,
                field: "episode length".into(),
                recorded: trace.records.len() as f64,
                replayed: fresh.records.len() as f64,
            }),
        });
    }
    Ok(ReplayReport { steps_checked: checked, divergence: None })
}

fn compare(want: &TraceRecord, got: &TraceRecord) -> Option<Divergence> {
    let step = want.step;
    let diverge = |field: String, a: f64, b: f64| Divergence { step, field, recorded: a, replayed: b };
    if want.step != got.step {
        return Some(diverge("step".into(), want.step as f64, got.step as f64));
    }
    let mut pairs: Vec<(String, f64, f64)> = Vec::new();
    for (i, (a, b)) in want.drones.iter().zip(&got.drones).enumerate() {
        let groups: [(&str, &[f64], &[f64]); 4] = [
            ("position", &a.position, &b.position),
            ("velocity", &a.velocity, &b.velocity),
            ("orientation", &a.orientation, &b.orientation),
            ("angular_velocity", &a.angular_velocity, &b.angular_velocity),
        ];
        for (name, xs, ys) in groups {
            for (c, (x, y)) in xs.iter().zip(ys).enumerate() {
                pairs.push((format!("drones[{i}].{name}[{c}]"), *x, *y));
            }
        }
    }
    match (&want.ball, &got.ball) {
        (Some(a), Some(b)) => {
            for (c, (x, y)) in a.position.iter().zip(&b.position).enumerate() {
                pairs.push((format!("ball.position[{c}]"), *x, *y));
            }
            for (c, (x, y)) in a.velocity.iter().zip(&b.velocity).enumerate() {
                pairs.push((format!("ball.velocity[{c}]"), *x, *y));
            }
        }
        (None, None) => {}
        (a, b) => return Some(diverge("ball presence".into(), a.is_some() as u8 as f64, b.is_some() as u8 as f64)),
    }
    if want.drones.len() != got.drones.len() {
        return Some(diverge("drone count".into(), want.drones.len() as f64, got.drones.len() as f64));
    }
    pairs
        .into_iter()
        .find(|(_, x, y)| !((x - y).abs() <= REPLAY_TOLERANCE))
        .map(|(field, x, y)| diverge(field, x, y))
}
