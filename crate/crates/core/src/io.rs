//! Dataset ingestion and result serialization.
//!
//! Two dataset formats are accepted:
//!
//! * **Wide CSV** (any extension other than `.json`). The header row is
//!   `video,content,<subject>...`; each following row holds a video label, a
//!   content label and one cell per subject. An empty cell or `*` marks a
//!   missing score.
//! * **Long-form JSON** (`.json`). `{"records": [{"video", "subject",
//!   "content", "score"}, ...]}`; a missing record is a missing score.
//!   Optional `videos`, `subjects` and `contents` label lists fix the index
//!   order; otherwise labels are indexed in order of first appearance.
//!
//! Numbers are written in shortest round-trip form, so a saved matrix loads
//! back bit-identical. Unbounded confidence half-widths are written as the
//! string `"inf"`.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::baselines::{BaselineOutput, RejectionResult};
use crate::error::{Error, Result};
use crate::harness::{ExperimentReport, MethodId, Units};
use crate::matrix::{Labels, ScoreMatrix};
use crate::model::ModelParams;
use crate::solver::{HalfWidth, ParamEstimates, SolverConfig};

fn is_json(path: &Path) -> bool {
    path.extension()
        .is_some_and(|ext| ext.eq_ignore_ascii_case("json"))
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write(path: &Path, contents: &[u8]) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Assigns dense indices to labels in order of first appearance.
#[derive(Default)]
struct Interner {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

impl Interner {
    fn intern(&mut self, name: &str) -> usize {
        if let Some(&i) = self.index.get(name) {
            return i;
        }
        let i = self.names.len();
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), i);
        i
    }
}

/// Loads a dataset, choosing the format from the file extension.
pub fn load_dataset(path: impl AsRef<Path>) -> Result<ScoreMatrix> {
    let path = path.as_ref();
    let text = read(path)?;
    if is_json(path) {
        parse_long_json(path, &text)
    } else {
        parse_wide_csv(path, &text)
    }
}

fn parse_wide_csv(path: &Path, text: &str) -> Result<ScoreMatrix> {
    let parse_err = |line: usize, field: &str, reason: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        field: field.to_string(),
        reason,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let mut records = reader.records();
    let header = match records.next() {
        Some(h) => h.map_err(|e| parse_err(1, "header", e.to_string()))?,
        None => return Err(parse_err(1, "header", "empty file".into())),
    };
    if header.len() < 3 {
        return Err(parse_err(
            1,
            "header",
            "expected video, content and at least one subject column".into(),
        ));
    }
    let subjects: Vec<String> = header.iter().skip(2).map(str::to_string).collect();
    let mut seen = HashMap::new();
    for (k, name) in subjects.iter().enumerate() {
        if name.is_empty() {
            return Err(parse_err(
                1,
                &format!("column {}", k + 3),
                "empty subject label".into(),
            ));
        }
        if seen.insert(name.as_str(), k).is_some() {
            return Err(parse_err(1, name, "duplicate subject label".into()));
        }
    }

    let mut videos = Vec::new();
    let mut video_index = HashMap::new();
    let mut contents = Interner::default();
    let mut content_of = Vec::new();
    let mut scores = Vec::new();
    let mut present = Vec::new();
    for record in records {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_err(line, "record", e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.iter().all(str::is_empty) {
            continue;
        }
        if record.len() != subjects.len() + 2 {
            return Err(parse_err(
                line,
                "record",
                format!(
                    "expected {} fields, found {}",
                    subjects.len() + 2,
                    record.len()
                ),
            ));
        }
        let video = &record[0];
        if video.is_empty() {
            return Err(parse_err(line, "video", "empty video label".into()));
        }
        if video_index
            .insert(video.to_string(), videos.len())
            .is_some()
        {
            return Err(parse_err(
                line,
                "video",
                format!("duplicate video label {video:?}"),
            ));
        }
        videos.push(video.to_string());
        if record[1].is_empty() {
            return Err(parse_err(line, "content", "empty content label".into()));
        }
        content_of.push(contents.intern(&record[1]));
        for (cell, subject) in record.iter().skip(2).zip(&subjects) {
            if cell.is_empty() || cell == "*" {
                scores.push(0.0);
                present.push(false);
                continue;
            }
            let x: f64 = cell
                .parse()
                .map_err(|_| parse_err(line, subject, format!("invalid score {cell:?}")))?;
            if !x.is_finite() {
                return Err(parse_err(
                    line,
                    subject,
                    format!("non-finite score {cell:?}"),
                ));
            }
            scores.push(x);
            present.push(true);
        }
    }
    if videos.is_empty() {
        return Err(parse_err(2, "record", "no video rows".into()));
    }
    let labels = Labels {
        videos: videos.clone(),
        subjects: subjects.clone(),
        contents: contents.names,
    };
    build(
        videos.len(),
        subjects.len(),
        scores,
        present,
        content_of,
        labels,
    )
}

/// Validates shape and coverage, reporting labels instead of indices.
fn build(
    videos: usize,
    subjects: usize,
    scores: Vec<f64>,
    present: Vec<bool>,
    content_of: Vec<usize>,
    labels: Labels,
) -> Result<ScoreMatrix> {
    for e in 0..videos {
        if !present[e * subjects..(e + 1) * subjects].iter().any(|&p| p) {
            return Err(Error::InvariantViolation(format!(
                "video {:?} has no present scores",
                labels.videos[e]
            )));
        }
    }
    for s in 0..subjects {
        if !(0..videos).any(|e| present[e * subjects + s]) {
            return Err(Error::InvariantViolation(format!(
                "subject {:?} has no present scores",
                labels.subjects[s]
            )));
        }
    }
    ScoreMatrix::new(videos, subjects, scores, present, content_of)?.with_labels(labels)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub video: String,
    pub subject: String,
    pub content: String,
    pub score: f64,
}

/// Long-form dataset. The optional label lists fix the index order; labels
/// not listed are numbered in order of first appearance among the records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LongDataset {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub videos: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub subjects: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub contents: Vec<String>,
    pub records: Vec<ScoreRecord>,
}

fn parse_long_json(path: &Path, text: &str) -> Result<ScoreMatrix> {
    let doc: LongDataset = serde_json::from_str(text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        field: "document".into(),
        reason: e.to_string(),
    })?;
    let parse_err = |record: usize, field: &str, reason: String| Error::Parse {
        path: path.to_path_buf(),
        line: record + 1,
        field: field.to_string(),
        reason,
    };
    let mut videos = Interner::default();
    let mut subjects = Interner::default();
    let mut contents = Interner::default();
    for (interner, names) in [
        (&mut videos, &doc.videos),
        (&mut subjects, &doc.subjects),
        (&mut contents, &doc.contents),
    ] {
        for name in names {
            interner.intern(name);
        }
    }
    let mut content_of: Vec<Option<usize>> = vec![None; videos.names.len()];
    let mut cells: Vec<(usize, usize, f64)> = Vec::with_capacity(doc.records.len());
    for (i, r) in doc.records.iter().enumerate() {
        let e = videos.intern(&r.video);
        let s = subjects.intern(&r.subject);
        let c = contents.intern(&r.content);
        if e == content_of.len() {
            content_of.push(None);
        }
        if content_of[e].is_none() {
            content_of[e] = Some(c);
        } else if content_of[e] != Some(c) {
            return Err(parse_err(
                i,
                "content",
                format!("video {:?} listed under two contents", r.video),
            ));
        }
        if !r.score.is_finite() {
            return Err(parse_err(i, "score", "non-finite score".into()));
        }
        cells.push((e, s, r.score));
    }
    if cells.is_empty() {
        return Err(parse_err(0, "records", "no score records".into()));
    }
    let (n_v, n_s) = (videos.names.len(), subjects.names.len());
    let mut scores = vec![0.0; n_v * n_s];
    let mut present = vec![false; n_v * n_s];
    for (i, &(e, s, x)) in cells.iter().enumerate() {
        if present[e * n_s + s] {
            return Err(parse_err(
                i,
                "subject",
                format!(
                    "duplicate score for video {:?}, subject {:?}",
                    videos.names[e], subjects.names[s]
                ),
            ));
        }
        present[e * n_s + s] = true;
        scores[e * n_s + s] = x;
    }
    let content_of = content_of
        .iter()
        .enumerate()
        .map(|(e, c)| {
            c.ok_or_else(|| {
                Error::InvariantViolation(format!("video {:?} has no scores", videos.names[e]))
            })
        })
        .collect::<Result<Vec<usize>>>()?;
    let labels = Labels {
        videos: videos.names,
        subjects: subjects.names,
        contents: contents.names,
    };
    build(n_v, n_s, scores, present, content_of, labels)
}

fn labels_of(m: &ScoreMatrix) -> Labels {
    m.labels()
        .cloned()
        .unwrap_or_else(|| Labels::numbered(m.videos(), m.subjects(), m.contents()))
}

/// Writes a dataset; `.json` paths get the long form, anything else wide CSV.
pub fn save_dataset(m: &ScoreMatrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = if is_json(path) {
        let mut s = serde_json::to_string_pretty(&to_long(m))?;
        s.push('\n');
        s.into_bytes()
    } else {
        wide_csv_bytes(m)?
    };
    write(path, &bytes)
}

pub fn to_long(m: &ScoreMatrix) -> LongDataset {
    let labels = labels_of(m);
    let records = m
        .observations()
        .map(|(e, s, x)| ScoreRecord {
            video: labels.videos[e].clone(),
            subject: labels.subjects[s].clone(),
            content: labels.contents[m.content_of(e)].clone(),
            score: x,
        })
        .collect();
    LongDataset {
        videos: labels.videos,
        subjects: labels.subjects,
        contents: labels.contents,
        records,
    }
}

fn wide_csv_bytes(m: &ScoreMatrix) -> Result<Vec<u8>> {
    let labels = labels_of(m);
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::InvariantViolation(format!("csv encoding failed: {e}"));
    let mut header = vec!["video".to_string(), "content".to_string()];
    header.extend(labels.subjects.iter().cloned());
    w.write_record(&header).map_err(csv_err)?;
    for e in 0..m.videos() {
        let mut row = vec![
            labels.videos[e].clone(),
            labels.contents[m.content_of(e)].clone(),
        ];
        row.extend((0..m.subjects()).map(|s| match m.get(e, s) {
            Some(x) => format!("{x}"),
            None => "*".to_string(),
        }));
        w.write_record(&row).map_err(csv_err)?;
    }
    w.into_inner()
        .map_err(|e| Error::InvariantViolation(format!("csv encoding failed: {e}")))
}

pub fn load_params(path: impl AsRef<Path>) -> Result<ModelParams> {
    let path = path.as_ref();
    let p: ModelParams = serde_json::from_str(&read(path)?)?;
    p.validate()?;
    Ok(p)
}

pub fn save_params(p: &ModelParams, path: impl AsRef<Path>) -> Result<()> {
    write_json(p, path.as_ref())
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    write(path, s.as_bytes())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoResult {
    pub video: String,
    pub content: String,
    pub score: f64,
    pub ci_halfwidth: HalfWidth,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectResult {
    pub subject: String,
    pub bias: f64,
    pub bias_ci_halfwidth: HalfWidth,
    pub inconsistency: f64,
    pub inconsistency_ci_halfwidth: HalfWidth,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContentResult {
    pub content: String,
    pub ambiguity: f64,
    pub ambiguity_ci_halfwidth: HalfWidth,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverSummary {
    pub iterations: usize,
    pub converged: bool,
    pub final_delta_x: f64,
    pub fallback_updates: usize,
}

/// Everything a recovery run produces, in a stable layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultFile {
    pub method: MethodId,
    pub units: Units,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub config: Option<SolverConfig>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub solver: Option<SolverSummary>,
    pub videos: Vec<VideoResult>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub subjects: Option<Vec<SubjectResult>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub contents: Option<Vec<ContentResult>>,
}

impl ResultFile {
    pub fn from_estimates(m: &ScoreMatrix, est: &ParamEstimates, cfg: &SolverConfig) -> Self {
        let labels = labels_of(m);
        let (p, ci) = (&est.params, &est.ci_halfwidth);
        ResultFile {
            method: MethodId::Mle,
            units: Units::Score,
            config: Some(*cfg),
            solver: Some(SolverSummary {
                iterations: est.iterations_used,
                converged: est.converged,
                final_delta_x: est.final_delta_x,
                fallback_updates: est.fallback_updates,
            }),
            videos: video_results(m, &labels, &p.x, &ci.x),
            subjects: Some(
                (0..m.subjects())
                    .map(|s| SubjectResult {
                        subject: labels.subjects[s].clone(),
                        bias: p.b[s],
                        bias_ci_halfwidth: ci.b[s],
                        inconsistency: p.v[s],
                        inconsistency_ci_halfwidth: ci.v[s],
                    })
                    .collect(),
            ),
            contents: Some(
                (0..m.contents())
                    .map(|c| ContentResult {
                        content: labels.contents[c].clone(),
                        ambiguity: p.a[c],
                        ambiguity_ci_halfwidth: ci.a[c],
                    })
                    .collect(),
            ),
        }
    }

    pub fn from_baseline(m: &ScoreMatrix, method: MethodId, out: &BaselineOutput) -> Self {
        let labels = labels_of(m);
        ResultFile {
            method,
            units: method.units(),
            config: None,
            solver: None,
            videos: video_results(m, &labels, &out.scores, &out.ci_halfwidth),
            subjects: None,
            contents: None,
        }
    }
}

fn video_results(
    m: &ScoreMatrix,
    labels: &Labels,
    scores: &[f64],
    ci: &[HalfWidth],
) -> Vec<VideoResult> {
    (0..m.videos())
        .map(|e| VideoResult {
            video: labels.videos[e].clone(),
            content: labels.contents[m.content_of(e)].clone(),
            score: scores[e],
            ci_halfwidth: ci[e],
        })
        .collect()
}

pub fn save_results(results: &ResultFile, path: impl AsRef<Path>) -> Result<()> {
    write_json(results, path.as_ref())
}

pub fn load_results(path: impl AsRef<Path>) -> Result<ResultFile> {
    let path = path.as_ref();
    Ok(serde_json::from_str(&read(path)?)?)
}

/// Subject screening output with labels attached.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RejectionFile {
    pub rejected: Vec<String>,
    pub subjects: Vec<String>,
    pub p: Vec<usize>,
    pub q: Vec<usize>,
}

impl RejectionFile {
    pub fn new(m: &ScoreMatrix, r: &RejectionResult) -> Self {
        let labels = labels_of(m);
        RejectionFile {
            rejected: r
                .rejected
                .iter()
                .map(|&s| labels.subjects[s].clone())
                .collect(),
            subjects: labels.subjects,
            p: r.p.clone(),
            q: r.q.clone(),
        }
    }
}

pub fn save_rejection(file: &RejectionFile, path: impl AsRef<Path>) -> Result<()> {
    write_json(file, path.as_ref())
}

/// One row of exported plot data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotRow {
    pub method: MethodId,
    pub condition: f64,
    pub rmse_mean: f64,
    pub rmse_std: f64,
    pub repetitions: usize,
    pub dropped: usize,
}

const PLOT_HEADER: [&str; 6] = [
    "method",
    "condition",
    "rmse_mean",
    "rmse_std",
    "repetitions",
    "dropped",
];

/// Flattens reports into rows sorted by method, then condition.
pub fn plot_rows(reports: &[ExperimentReport]) -> Vec<PlotRow> {
    let mut rows: Vec<PlotRow> = reports
        .iter()
        .flat_map(|r| {
            (0..r.condition_axis.len()).map(move |i| PlotRow {
                method: r.method,
                condition: r.condition_axis[i],
                rmse_mean: r.rmse_mean[i],
                rmse_std: r.rmse_std[i],
                repetitions: r.repetitions[i],
                dropped: r.dropped[i],
            })
        })
        .collect();
    rows.sort_by(|a, b| {
        a.method
            .cmp(&b.method)
            .then(a.condition.total_cmp(&b.condition))
    });
    rows
}

/// Writes `method,condition,rmse_mean,rmse_std,repetitions,dropped` CSV.
pub fn export_plot_data(reports: &[ExperimentReport], path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::InvariantViolation(format!("csv encoding failed: {e}"));
    w.write_record(PLOT_HEADER).map_err(csv_err)?;
    for row in plot_rows(reports) {
        w.serialize(row).map_err(csv_err)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::InvariantViolation(format!("csv encoding failed: {e}")))?;
    write(path.as_ref(), &bytes)
}

pub fn read_plot_data(path: impl AsRef<Path>) -> Result<Vec<PlotRow>> {
    let path = path.as_ref();
    let text = read(path)?;
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    reader
        .deserialize()
        .enumerate()
        .map(|(i, row)| {
            row.map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                line: i + 2,
                field: "row".into(),
                reason: e.to_string(),
            })
        })
        .collect()
}
