//! Tabular outputs: feature tables, left/right differences, spectra, heatmap
//! matrices, CDF points and the score histogram.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use crate::dataset::io::{create, open, parse_err};
use crate::dataset::{Leg, TrialMeta, Updrs};
use crate::error::{Error, Result};
use crate::features::{lr_differences, AmplitudeSpectrum, LrFeatures};
use crate::ml::{ErrorCdf, Feature, FeatureMatrix};
use crate::pipeline::TrialAnalysis;

const META_COLUMNS: [&str; 5] = ["trial_id", "patient_id", "session", "leg", "updrs"];

/// Header of the per-trial feature table.
pub fn features_header() -> Vec<String> {
    META_COLUMNS
        .iter()
        .map(|s| s.to_string())
        .chain(Feature::ALL.iter().map(|f| f.name().to_string()))
        .collect()
}

fn finish<W: Write>(w: csv::Writer<W>, path: &Path) -> Result<()> {
    w.into_inner()
        .map_err(|e| Error::io(path, e.into_error()))?
        .flush()
        .map_err(|e| Error::io(path, e))
}

pub fn write_features_csv(path: impl AsRef<Path>, analyses: &[TrialAnalysis]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(features_header())?;
    for a in analyses {
        let m = &a.meta;
        let mut rec = vec![
            m.trial_id.clone(),
            m.patient_id.clone(),
            m.session.clone(),
            m.leg.to_string(),
            m.updrs.to_string(),
        ];
        rec.extend(a.feature_vector().iter().map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    finish(w, path)
}

/// One row of a feature table read back from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub meta: TrialMeta,
    pub values: Vec<f64>,
}

pub fn read_features_csv(path: impl AsRef<Path>) -> Result<Vec<FeatureRow>> {
    let path = path.as_ref();
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(open(path)?);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| parse_err(path, 1, e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    if header != features_header() {
        return Err(parse_err(path, 1, "unexpected feature table header"));
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let bad = |m: String| parse_err(path, line, m);
        let leg: Leg = rec[3].parse().map_err(|e: Error| bad(e.to_string()))?;
        let updrs = rec[4]
            .parse::<f64>()
            .map_err(|_| bad(format!("`{}` is not a number", &rec[4])))
            .and_then(|v| Updrs::from_f64(v).map_err(|e| bad(e.to_string())))?;
        let values = rec
            .iter()
            .skip(META_COLUMNS.len())
            .map(|f| f.parse::<f64>().map_err(|_| bad(format!("`{f}` is not a number"))))
            .collect::<Result<Vec<_>>>()?;
        let mut meta = TrialMeta::new(&rec[0], &rec[1], leg, updrs);
        meta.session = rec[2].to_string();
        out.push(FeatureRow { meta, values });
    }
    Ok(out)
}

pub fn matrix_from_rows(rows: &[FeatureRow]) -> Result<FeatureMatrix> {
    FeatureMatrix::with_ids(
        Feature::ALL.iter().map(|f| f.name().to_string()).collect(),
        rows.iter().map(|r| r.meta.trial_id.clone()).collect(),
        rows.iter().map(|r| r.values.clone()).collect(),
        rows.iter().map(|r| r.meta.updrs).collect(),
    )
}

/// Left/right comparison of one patient session.
#[derive(Debug, Clone, PartialEq)]
pub struct LrRow {
    pub patient_id: String,
    pub session: String,
    pub left: String,
    pub right: String,
    pub features: LrFeatures,
}

/// Pairs left and right trials sharing patient and session. Pairs whose
/// repetition counts differ are returned as errors.
pub fn pair_left_right(analyses: &[TrialAnalysis]) -> (Vec<LrRow>, Vec<(String, Error)>) {
    let mut groups: BTreeMap<(&str, &str), (Option<&TrialAnalysis>, Option<&TrialAnalysis>)> = BTreeMap::new();
    for a in analyses {
        let e = groups
            .entry((a.meta.patient_id.as_str(), a.meta.session.as_str()))
            .or_default();
        match a.meta.leg {
            Leg::Left => e.0 = Some(a),
            Leg::Right => e.1 = Some(a),
        }
    }
    let mut rows = Vec::new();
    let mut errors = Vec::new();
    for ((patient, session), pair) in groups {
        if let (Some(l), Some(r)) = pair {
            match lr_differences(&l.repetitions, &r.repetitions) {
                Ok(features) => rows.push(LrRow {
                    patient_id: patient.to_string(),
                    session: session.to_string(),
                    left: l.meta.trial_id.clone(),
                    right: r.meta.trial_id.clone(),
                    features,
                }),
                Err(e) => errors.push((format!("{patient}/{session}"), e)),
            }
        }
    }
    (rows, errors)
}

pub fn write_lr_csv(path: impl AsRef<Path>, rows: &[LrRow]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record([
        "patient_id",
        "session",
        "left_trial",
        "right_trial",
        "reps",
        "mean_D_Theta",
        "mean_D_Omega",
        "D_Theta",
        "D_Omega",
    ])?;
    let join = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";");
    for r in rows {
        w.write_record([
            r.patient_id.clone(),
            r.session.clone(),
            r.left.clone(),
            r.right.clone(),
            r.features.d_theta.len().to_string(),
            r.features.mean_d_theta.to_string(),
            r.features.mean_d_omega.to_string(),
            join(&r.features.d_theta),
            join(&r.features.d_omega),
        ])?;
    }
    finish(w, path)
}

/// One-sided spectrum as `bin_hz,amplitude`.
pub fn write_spectrum_csv(path: impl AsRef<Path>, spectrum: &AmplitudeSpectrum) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(["bin_hz", "amplitude"])?;
    for (f, a) in spectrum.one_sided() {
        w.write_record([f.to_string(), a.to_string()])?;
    }
    finish(w, path)
}

/// Frequency grid shared by all heatmap rows: `0, 1/bins_per_hz, ...,
/// max_hz`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatmapGrid {
    pub max_hz: f64,
    pub bins_per_hz: u32,
}

impl Default for HeatmapGrid {
    fn default() -> Self {
        HeatmapGrid {
            max_hz: 5.0,
            bins_per_hz: 20,
        }
    }
}

impl HeatmapGrid {
    pub fn bins(&self) -> Vec<f64> {
        let per = f64::from(self.bins_per_hz.max(1));
        let n = (self.max_hz * per).round() as usize;
        (0..=n).map(|k| k as f64 / per).collect()
    }
}

/// One-sided amplitude interpolated at `f`; zero beyond the Nyquist bin.
fn amplitude_at(one_sided: &[(f64, f64)], f: f64) -> f64 {
    let i = one_sided.partition_point(|p| p.0 <= f);
    if i == 0 {
        return one_sided.first().map_or(0.0, |p| p.1);
    }
    if i >= one_sided.len() {
        return if f == one_sided[i - 1].0 { one_sided[i - 1].1 } else { 0.0 };
    }
    let (a, b) = (one_sided[i - 1], one_sided[i]);
    a.1 + (f - a.0) / (b.0 - a.0) * (b.1 - a.1)
}

/// Spectrum matrix with one row per trial, ordered by UPDRS score then trial
/// id. A separator row with empty cells precedes each new score group.
pub fn write_heatmap_csv<'a, I>(path: impl AsRef<Path>, rows: I, grid: &HeatmapGrid) -> Result<()>
where
    I: IntoIterator<Item = (&'a TrialMeta, &'a AmplitudeSpectrum)>,
{
    let path = path.as_ref();
    let mut rows: Vec<_> = rows.into_iter().collect();
    rows.sort_by(|a, b| a.0.updrs.cmp(&b.0.updrs).then_with(|| a.0.trial_id.cmp(&b.0.trial_id)));
    let bins = grid.bins();
    let mut w = csv::Writer::from_writer(create(path)?);
    let mut header = vec!["trial_id".to_string(), "updrs".to_string()];
    header.extend(bins.iter().map(|f| f.to_string()));
    w.write_record(&header)?;
    let mut last: Option<Updrs> = None;
    for (meta, spectrum) in rows {
        if last.is_some_and(|l| l != meta.updrs) {
            w.write_record(vec![String::new(); header.len()])?;
        }
        last = Some(meta.updrs);
        let one = spectrum.one_sided();
        let mut rec = vec![meta.trial_id.clone(), meta.updrs.to_string()];
        rec.extend(bins.iter().map(|&f| amplitude_at(&one, f).to_string()));
        w.write_record(&rec)?;
    }
    finish(w, path)
}

pub fn write_cdf_csv(path: impl AsRef<Path>, cdf: &ErrorCdf) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(["abs_error", "fraction"])?;
    for (g, f) in cdf.grid.iter().zip(&cdf.fraction) {
        w.write_record([g.to_string(), f.to_string()])?;
    }
    finish(w, path)
}

/// Count of trials per score over the whole half-step grid.
pub fn updrs_histogram<'a>(scores: impl IntoIterator<Item = &'a Updrs>) -> Vec<(Updrs, usize)> {
    let mut counts: BTreeMap<Updrs, usize> = Updrs::grid().map(|u| (u, 0)).collect();
    for s in scores {
        *counts.entry(*s).or_default() += 1;
    }
    counts.into_iter().collect()
}

pub fn write_histogram_csv(path: impl AsRef<Path>, histogram: &[(Updrs, usize)]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(["updrs", "count"])?;
    for (u, c) in histogram {
        w.write_record([u.to_string(), c.to_string()])?;
    }
    finish(w, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn amplitude_interpolation() {
        let one = vec![(0.0, 1.0), (0.5, 3.0), (1.0, 5.0)];
        assert_eq!(amplitude_at(&one, 0.25), 2.0);
        assert_eq!(amplitude_at(&one, 1.0), 5.0);
        assert_eq!(amplitude_at(&one, 1.5), 0.0);
    }

    #[test]
    fn histogram_covers_grid() {
        let s = [Updrs::from_f64(1.5).unwrap(), Updrs::from_f64(1.5).unwrap()];
        let h = updrs_histogram(&s);
        assert_eq!(h.len(), 9);
        assert_eq!(h[3].1, 2);
        assert_eq!(h.iter().map(|p| p.1).sum::<usize>(), 2);
    }
}
