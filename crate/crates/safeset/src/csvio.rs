//! Flat CSV recordings, collision sidecars and state exports.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use safeset_core::ingest::{AgentType, CollisionEvent, Dataset, IngestError, RawSample};
use safeset_core::StateTrajectory;
use thiserror::Error;

/// Logical sample fields, in output column order.
pub const FIELDS: [&str; 14] = [
    "recording_id",
    "trajectory_id",
    "frame",
    "time",
    "agent_id",
    "agent_type",
    "x",
    "y",
    "vx",
    "vy",
    "length",
    "width",
    "lane_id",
    "sv_flag",
];

/// Fields that may be missing from the header.
const OPTIONAL: [&str; 2] = ["recording_id", "lane_id"];

#[derive(Debug, Error)]
pub enum CsvError {
    #[error("missing column {0}")]
    MissingColumn(String),
    #[error("line {line}: {reason}")]
    MalformedRow { line: u64, reason: String },
    #[error("unknown field {0} in column map")]
    UnknownField(String),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Logical field name to header name. Unmapped fields use their own name.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ColumnMap(BTreeMap<String, String>);

impl ColumnMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Parses repeated `field=header` flags.
    pub fn from_flags<S: AsRef<str>>(flags: &[S]) -> Result<Self, CsvError> {
        let mut map = Self::new();
        for f in flags {
            let f = f.as_ref();
            let (k, v) = f.split_once('=').ok_or_else(|| CsvError::UnknownField(f.to_string()))?;
            map.insert(k.trim(), v.trim())?;
        }
        Ok(map)
    }

    pub fn insert(&mut self, field: &str, header: &str) -> Result<(), CsvError> {
        if !FIELDS.contains(&field) {
            return Err(CsvError::UnknownField(field.to_string()));
        }
        self.0.insert(field.to_string(), header.to_string());
        Ok(())
    }

    pub fn header_for<'a>(&'a self, field: &'a str) -> &'a str {
        self.0.get(field).map_or(field, String::as_str)
    }

    pub fn entries(&self) -> &BTreeMap<String, String> {
        &self.0
    }
}

impl From<BTreeMap<String, String>> for ColumnMap {
    fn from(m: BTreeMap<String, String>) -> Self {
        Self(m)
    }
}

fn malformed(line: u64, reason: impl Into<String>) -> CsvError {
    CsvError::MalformedRow { line, reason: reason.into() }
}

fn parse_bool(s: &str) -> Option<bool> {
    match s.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" => Some(true),
        "0" | "false" | "no" | "" => Some(false),
        _ => None,
    }
}

/// Parses sample rows. Row order is preserved.
pub fn parse_samples<R: Read>(reader: R, columns: &ColumnMap) -> Result<Vec<RawSample>, CsvError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let mut index: BTreeMap<&str, Option<usize>> = BTreeMap::new();
    for field in FIELDS {
        let name = columns.header_for(field);
        let pos = headers.iter().position(|h| h == name);
        if pos.is_none() && !OPTIONAL.contains(&field) {
            return Err(CsvError::MissingColumn(name.to_string()));
        }
        index.insert(field, pos);
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let get = |field: &str| index[field].and_then(|i| rec.get(i)).unwrap_or("");
        let num = |field: &str| -> Result<f64, CsvError> {
            get(field).parse::<f64>().map_err(|_| malformed(line, format!("{field} is not a number")))
        };
        let frame = get("frame").parse::<u64>().map_err(|_| malformed(line, "frame is not a non-negative integer"))?;
        let agent_type = get("agent_type")
            .parse::<AgentType>()
            .map_err(|_| malformed(line, format!("unknown agent type {:?}", get("agent_type"))))?;
        let lane = get("lane_id");
        let lane_id = if lane.is_empty() {
            None
        } else {
            Some(lane.parse::<i64>().map_err(|_| malformed(line, "lane_id is not an integer"))?)
        };
        let sv_flag = parse_bool(get("sv_flag")).ok_or_else(|| malformed(line, "sv_flag is not a boolean"))?;
        out.push(RawSample {
            recording_id: get("recording_id").to_string(),
            trajectory_id: get("trajectory_id").to_string(),
            frame,
            time: num("time")?,
            agent_id: get("agent_id").to_string(),
            agent_type,
            x: num("x")?,
            y: num("y")?,
            vx: num("vx")?,
            vy: num("vy")?,
            length: num("length")?,
            width: num("width")?,
            lane_id,
            sv_flag,
        });
    }
    Ok(out)
}

/// Writes samples with the canonical header.
pub fn write_samples<W: Write>(writer: W, samples: &[RawSample]) -> Result<(), CsvError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(FIELDS)?;
    for s in samples {
        w.write_record([
            s.recording_id.clone(),
            s.trajectory_id.clone(),
            s.frame.to_string(),
            s.time.to_string(),
            s.agent_id.clone(),
            s.agent_type.as_str().to_string(),
            s.x.to_string(),
            s.y.to_string(),
            s.vx.to_string(),
            s.vy.to_string(),
            s.length.to_string(),
            s.width.to_string(),
            s.lane_id.map(|l| l.to_string()).unwrap_or_default(),
            u8::from(s.sv_flag).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a `trajectory_id,frame` sidecar.
pub fn parse_collisions<R: Read>(reader: R) -> Result<Vec<CollisionEvent>, CsvError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name).ok_or_else(|| CsvError::MissingColumn(name.to_string()));
    let (ti, fi) = (col("trajectory_id")?, col("frame")?);
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let frame = rec
            .get(fi)
            .unwrap_or("")
            .parse::<u64>()
            .map_err(|_| malformed(line, "frame is not a non-negative integer"))?;
        out.push(CollisionEvent { trajectory_id: rec.get(ti).unwrap_or("").to_string(), frame });
    }
    Ok(out)
}

pub fn write_collisions<W: Write>(writer: W, events: &[CollisionEvent]) -> Result<(), CsvError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["trajectory_id", "frame"])?;
    for e in events {
        w.write_record([e.trajectory_id.as_str(), &e.frame.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a recording and its optional collision sidecar into a validated
/// dataset.
pub fn read_dataset(path: &Path, columns: &ColumnMap, collisions: Option<&Path>) -> Result<Dataset, CsvError> {
    let samples = parse_samples(File::open(path)?, columns)?;
    let events = match collisions {
        Some(p) => parse_collisions(File::open(p)?)?,
        None => Vec::new(),
    };
    Ok(Dataset::new(samples, events)?)
}

/// Writes a dataset and, when it has events, its sidecar.
pub fn write_dataset(path: &Path, collisions: Option<&Path>, d: &Dataset) -> Result<(), CsvError> {
    write_samples(File::create(path)?, d.samples())?;
    if let Some(p) = collisions {
        write_collisions(File::create(p)?, d.collision_events())?;
    }
    Ok(())
}

/// One row per state: trajectory, frame, time, the unsafe flag and the
/// state values under `names`.
pub fn write_states<W: Write>(writer: W, names: &[String], ts: &[StateTrajectory]) -> Result<(), CsvError> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["trajectory_id".to_string(), "frame".into(), "time".into(), "unsafe".into()];
    header.extend(names.iter().cloned());
    w.write_record(&header)?;
    for t in ts {
        for s in &t.states {
            let mut row = vec![s.trajectory_id.clone(), s.frame.to_string(), s.time.to_string(), u8::from(s.is_unsafe).to_string()];
            row.extend(s.values.iter().map(f64::to_string));
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// One row per point with `names` as header.
pub fn write_points<W: Write>(writer: W, names: &[String], points: &[Vec<f64>]) -> Result<(), CsvError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(names)?;
    for p in points {
        w.write_record(p.iter().map(f64::to_string))?;
    }
    w.flush()?;
    Ok(())
}
