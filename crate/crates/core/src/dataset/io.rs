//! CSV and JSON readers/writers for recordings, labels and manifests.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{ImuSample, Leg, RepEvents, SegmentationLabels, TrialMeta, TrialRecording, Updrs};
use crate::error::{Error, Result};

pub const TRIAL_HEADER: [&str; 10] = ["t", "ax", "ay", "az", "gx", "gy", "gz", "mx", "my", "mz"];
pub const LABELS_HEADER: [&str; 4] = ["r", "t_start", "t_peak", "t_end"];

pub(crate) fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::io(path, e))
}

pub(crate) fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

pub(crate) fn parse_err(path: &Path, line: u64, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn csv_reader(path: &Path, expected: &[&str]) -> Result<csv::Reader<BufReader<File>>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(open(path)?);
    let header = rdr
        .headers()
        .map_err(|e| parse_err(path, 1, e.to_string()))?;
    if header.iter().ne(expected.iter().copied()) {
        return Err(parse_err(
            path,
            1,
            format!(
                "expected header `{}`, found `{}`",
                expected.join(","),
                header.iter().collect::<Vec<_>>().join(",")
            ),
        ));
    }
    Ok(rdr)
}

fn parse_fields<const N: usize>(path: &Path, record: &csv::StringRecord) -> Result<[f64; N]> {
    let line = record.position().map_or(0, |p| p.line());
    if record.len() != N {
        return Err(parse_err(
            path,
            line,
            format!("expected {N} fields, found {}", record.len()),
        ));
    }
    let mut out = [0.0; N];
    for (slot, field) in out.iter_mut().zip(record.iter()) {
        *slot = field
            .parse()
            .map_err(|_| parse_err(path, line, format!("`{field}` is not a number")))?;
    }
    Ok(out)
}

/// Reads a trial CSV (`t,ax,ay,az,gx,gy,gz,mx,my,mz`).
pub fn load_trial(path: impl AsRef<Path>, meta: TrialMeta) -> Result<TrialRecording> {
    let path = path.as_ref();
    let mut rdr = csv_reader(path, &TRIAL_HEADER)?;
    let mut samples = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(path, line, e.to_string())
        })?;
        let v: [f64; 10] = parse_fields(path, &record)?;
        samples.push(ImuSample {
            t: v[0],
            acc: [v[1], v[2], v[3]],
            gyr: [v[4], v[5], v[6]],
            mag: [v[7], v[8], v[9]],
        });
    }
    TrialRecording::new(meta, samples)
}

/// Writes a recording in the trial CSV schema. Values use the shortest
/// representation that parses back to the same `f64`.
pub fn write_trial(path: impl AsRef<Path>, recording: &TrialRecording) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    writeln!(w, "{}", TRIAL_HEADER.join(",")).map_err(io)?;
    for s in recording.samples() {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{}",
            s.t, s.acc[0], s.acc[1], s.acc[2], s.gyr[0], s.gyr[1], s.gyr[2], s.mag[0], s.mag[1], s.mag[2]
        )
        .map_err(io)?;
    }
    w.flush().map_err(io)
}

/// Reads a labels CSV (`r,t_start,t_peak,t_end`). Rows must be numbered
/// 1, 2, ... in order. Trials with fewer than ten repetitions are accepted;
/// check [`SegmentationLabels::is_short`].
pub fn load_labels(path: impl AsRef<Path>) -> Result<SegmentationLabels> {
    let path = path.as_ref();
    let mut rdr = csv_reader(path, &LABELS_HEADER)?;
    let mut reps = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(path, line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let v: [f64; 4] = parse_fields(path, &record)?;
        let expected = reps.len() + 1;
        if v[0] != expected as f64 {
            return Err(parse_err(
                path,
                line,
                format!("repetition index {} out of sequence, expected {expected}", v[0]),
            ));
        }
        reps.push(RepEvents::new(v[1], v[2], v[3]));
    }
    let labels = SegmentationLabels::new(reps)?;
    if labels.is_short() {
        log::warn!(
            "{}: only {} repetitions labelled",
            path.display(),
            labels.len()
        );
    }
    Ok(labels)
}

pub fn write_labels(path: impl AsRef<Path>, labels: &SegmentationLabels) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    writeln!(w, "{}", LABELS_HEADER.join(",")).map_err(io)?;
    for (i, r) in labels.reps().iter().enumerate() {
        writeln!(w, "{},{},{},{}", i + 1, r.start, r.peak, r.end).map_err(io)?;
    }
    w.flush().map_err(io)
}

/// One manifest row: trial metadata plus the files that hold its data.
/// Relative paths are resolved against the manifest's directory on load.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifestEntry {
    pub meta: TrialMeta,
    pub recording: PathBuf,
    pub labels: Option<PathBuf>,
}

#[derive(Serialize, Deserialize)]
struct RawEntry {
    trial_id: String,
    patient_id: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    session: String,
    leg: Leg,
    updrs: f64,
    #[serde(default = "super::default_sample_rate")]
    sample_rate: f64,
    recording: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<PathBuf>,
}

pub fn load_manifest(path: impl AsRef<Path>) -> Result<Vec<ManifestEntry>> {
    let path = path.as_ref();
    let raw: Vec<RawEntry> = serde_json::from_reader(open(path)?)?;
    let base = path.parent().unwrap_or_else(|| Path::new(""));
    let mut ids = std::collections::HashSet::new();
    raw.into_iter()
        .map(|r| {
            if !ids.insert(r.trial_id.clone()) {
                return Err(Error::Validation(format!(
                    "duplicate trial id `{}` in manifest",
                    r.trial_id
                )));
            }
            let meta = TrialMeta {
                trial_id: r.trial_id,
                patient_id: r.patient_id,
                session: r.session,
                leg: r.leg,
                updrs: Updrs::from_f64(r.updrs)?,
                sample_rate: r.sample_rate,
            };
            meta.validate()?;
            Ok(ManifestEntry {
                meta,
                recording: base.join(r.recording),
                labels: r.labels.map(|l| base.join(l)),
            })
        })
        .collect()
}

/// Writes a manifest; entry paths are stored as given.
pub fn write_manifest(path: impl AsRef<Path>, entries: &[ManifestEntry]) -> Result<()> {
    let path = path.as_ref();
    let raw: Vec<RawEntry> = entries
        .iter()
        .map(|e| RawEntry {
            trial_id: e.meta.trial_id.clone(),
            patient_id: e.meta.patient_id.clone(),
            session: e.meta.session.clone(),
            leg: e.meta.leg,
            updrs: e.meta.updrs.value(),
            sample_rate: e.meta.sample_rate,
            recording: e.recording.clone(),
            labels: e.labels.clone(),
        })
        .collect();
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, &raw)?;
    writeln!(w).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}
