//! Raw opinion-score matrices.
//!
//! A [`ScoreMatrix`] holds an `E x S` grid of scores (videos by subjects), a
//! presence mask for selective sampling, and the video to content map. All
//! indices are zero-based. Construction enforces that every video and every
//! subject has at least one present score and that every content is used.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Optional human-readable names carried alongside a matrix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Labels {
    pub videos: Vec<String>,
    pub subjects: Vec<String>,
    pub contents: Vec<String>,
}

impl Labels {
    /// Default labels `v0.., s0.., c0..`.
    pub fn numbered(videos: usize, subjects: usize, contents: usize) -> Self {
        Labels {
            videos: (0..videos).map(|e| format!("v{e}")).collect(),
            subjects: (0..subjects).map(|s| format!("s{s}")).collect(),
            contents: (0..contents).map(|c| format!("c{c}")).collect(),
        }
    }
}

/// Which axis a per-row or per-column statistic runs along.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    /// One value per video (statistic over that video's subjects).
    Video,
    /// One value per subject (statistic over that subject's videos).
    Subject,
}

#[derive(Debug, Clone)]
pub struct ScoreMatrix {
    videos: usize,
    subjects: usize,
    contents: usize,
    scores: Vec<f64>,
    present: Vec<bool>,
    // Cells that held a real score at construction; masking keeps their value.
    filled: Vec<bool>,
    content_of: Vec<usize>,
    labels: Option<Labels>,
}

/// Two matrices are equal when their shapes, masks, content maps, labels and
/// present scores agree; values hidden behind the mask are ignored.
impl PartialEq for ScoreMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.videos == other.videos
            && self.subjects == other.subjects
            && self.present == other.present
            && self.content_of == other.content_of
            && self.labels == other.labels
            && self
                .scores
                .iter()
                .zip(&other.scores)
                .zip(&self.present)
                .all(|((a, b), &p)| !p || a.to_bits() == b.to_bits())
    }
}

impl ScoreMatrix {
    /// Builds a matrix from row-major `scores` and `present` of length `E*S`.
    ///
    /// Values at masked positions are ignored and stored as `0.0`.
    pub fn new(
        videos: usize,
        subjects: usize,
        scores: Vec<f64>,
        present: Vec<bool>,
        content_of: Vec<usize>,
    ) -> Result<Self> {
        if videos == 0 || subjects == 0 {
            return Err(Error::InvariantViolation(format!(
                "matrix must have at least one video and one subject, got {videos}x{subjects}"
            )));
        }
        let cells = videos * subjects;
        if scores.len() != cells || present.len() != cells {
            return Err(Error::InvariantViolation(format!(
                "expected {cells} cells, got {} scores and {} mask entries",
                scores.len(),
                present.len()
            )));
        }
        if content_of.len() != videos {
            return Err(Error::InvariantViolation(format!(
                "content map has {} entries for {videos} videos",
                content_of.len()
            )));
        }
        let contents = content_of.iter().max().map_or(0, |&c| c + 1);
        let mut used = vec![false; contents];
        for &c in &content_of {
            used[c] = true;
        }
        if let Some(c) = used.iter().position(|&u| !u) {
            return Err(Error::InvariantViolation(format!(
                "content {c} has no videos"
            )));
        }

        let mut scores = scores;
        for (i, (score, &p)) in scores.iter_mut().zip(&present).enumerate() {
            if !p {
                *score = 0.0;
            } else if !score.is_finite() {
                return Err(Error::InvariantViolation(format!(
                    "non-finite score at video {}, subject {}",
                    i / subjects,
                    i % subjects
                )));
            }
        }

        let m = ScoreMatrix {
            videos,
            subjects,
            contents,
            scores,
            filled: present.clone(),
            present,
            content_of,
            labels: None,
        };
        m.check_coverage()?;
        Ok(m)
    }

    /// Builds a fully-present matrix from rows of scores.
    pub fn from_rows(rows: &[Vec<f64>], content_of: Vec<usize>) -> Result<Self> {
        let subjects = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != subjects) {
            return Err(Error::InvariantViolation("ragged score rows".into()));
        }
        let scores: Vec<f64> = rows.iter().flatten().copied().collect();
        let present = vec![true; scores.len()];
        Self::new(rows.len(), subjects, scores, present, content_of)
    }

    /// Builds a matrix from rows where `None` marks a missing score.
    pub fn from_optional_rows(rows: &[Vec<Option<f64>>], content_of: Vec<usize>) -> Result<Self> {
        let subjects = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != subjects) {
            return Err(Error::InvariantViolation("ragged score rows".into()));
        }
        let present: Vec<bool> = rows.iter().flatten().map(Option::is_some).collect();
        let scores: Vec<f64> = rows.iter().flatten().map(|x| x.unwrap_or(0.0)).collect();
        Self::new(rows.len(), subjects, scores, present, content_of)
    }

    /// Attaches labels; their lengths must match the matrix shape.
    pub fn with_labels(mut self, labels: Labels) -> Result<Self> {
        if labels.videos.len() != self.videos
            || labels.subjects.len() != self.subjects
            || labels.contents.len() != self.contents
        {
            return Err(Error::InvariantViolation(format!(
                "labels shape {}x{}x{} does not match matrix {}x{}x{}",
                labels.videos.len(),
                labels.subjects.len(),
                labels.contents.len(),
                self.videos,
                self.subjects,
                self.contents
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    fn check_coverage(&self) -> Result<()> {
        for e in 0..self.videos {
            if self.row_count(e) == 0 {
                return Err(Error::InvariantViolation(format!(
                    "video {} has no present scores",
                    self.video_name(e)
                )));
            }
        }
        for s in 0..self.subjects {
            if self.column_count(s) == 0 {
                return Err(Error::InvariantViolation(format!(
                    "subject {} has no present scores",
                    self.subject_name(s)
                )));
            }
        }
        Ok(())
    }

    pub fn videos(&self) -> usize {
        self.videos
    }

    pub fn subjects(&self) -> usize {
        self.subjects
    }

    pub fn contents(&self) -> usize {
        self.contents
    }

    pub fn labels(&self) -> Option<&Labels> {
        self.labels.as_ref()
    }

    pub fn content_of(&self, video: usize) -> usize {
        self.content_of[video]
    }

    pub fn content_map(&self) -> &[usize] {
        &self.content_of
    }

    pub fn video_name(&self, e: usize) -> String {
        self.labels
            .as_ref()
            .map_or_else(|| format!("#{e}"), |l| l.videos[e].clone())
    }

    pub fn subject_name(&self, s: usize) -> String {
        self.labels
            .as_ref()
            .map_or_else(|| format!("#{s}"), |l| l.subjects[s].clone())
    }

    #[inline]
    pub fn is_present(&self, e: usize, s: usize) -> bool {
        self.present[e * self.subjects + s]
    }

    /// The score at `(e, s)`, or `None` if missing.
    #[inline]
    pub fn get(&self, e: usize, s: usize) -> Option<f64> {
        let i = e * self.subjects + s;
        self.present[i].then(|| self.scores[i])
    }

    pub fn mask(&self) -> &[bool] {
        &self.present
    }

    /// Present `(subject, score)` pairs of one video.
    pub fn row(&self, e: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let start = e * self.subjects;
        self.scores[start..start + self.subjects]
            .iter()
            .zip(&self.present[start..start + self.subjects])
            .enumerate()
            .filter_map(|(s, (&x, &p))| p.then_some((s, x)))
    }

    /// Present `(video, score)` pairs of one subject.
    pub fn column(&self, s: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (0..self.videos).filter_map(move |e| self.get(e, s).map(|x| (e, x)))
    }

    /// Every present `(video, subject, score)` triple in row-major order.
    pub fn observations(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.videos).flat_map(move |e| self.row(e).map(move |(s, x)| (e, s, x)))
    }

    pub fn row_count(&self, e: usize) -> usize {
        let start = e * self.subjects;
        self.present[start..start + self.subjects]
            .iter()
            .filter(|&&p| p)
            .count()
    }

    pub fn column_count(&self, s: usize) -> usize {
        (0..self.videos).filter(|&e| self.is_present(e, s)).count()
    }

    pub fn present_count(&self) -> usize {
        self.present.iter().filter(|&&p| p).count()
    }

    pub fn is_full(&self) -> bool {
        self.present.iter().all(|&p| p)
    }

    /// Returns a copy with every present score passed through `f(e, s, x)`.
    /// The mask and content map are unchanged.
    pub fn map_present(&self, mut f: impl FnMut(usize, usize, f64) -> f64) -> Result<Self> {
        let mut out = self.clone();
        for e in 0..self.videos {
            for s in 0..self.subjects {
                let i = e * self.subjects + s;
                if out.present[i] {
                    out.scores[i] = f(e, s, out.scores[i]);
                }
            }
        }
        if let Some(i) = out
            .scores
            .iter()
            .zip(&out.present)
            .position(|(x, &p)| p && !x.is_finite())
        {
            return Err(Error::InvariantViolation(format!(
                "non-finite score at video {}, subject {}",
                i / self.subjects,
                i % self.subjects
            )));
        }
        Ok(out)
    }

    /// Returns a copy with a new presence mask; fails if coverage breaks.
    ///
    /// Masked cells keep their score, so a later call may unmask them again.
    /// Cells that were missing when the matrix was built cannot be unmasked.
    pub fn with_mask(&self, present: Vec<bool>) -> Result<Self> {
        if present.len() != self.present.len() {
            return Err(Error::LengthMismatch {
                left: present.len(),
                right: self.present.len(),
            });
        }
        if let Some(i) = present
            .iter()
            .zip(&self.filled)
            .position(|(&p, &f)| p && !f)
        {
            return Err(Error::InvariantViolation(format!(
                "cannot unmask missing cell at video {}, subject {}",
                i / self.subjects,
                i % self.subjects
            )));
        }
        let mut out = self.clone();
        out.present = present;
        out.check_coverage()?;
        Ok(out)
    }

    /// Keeps only the listed subject columns, in the given order.
    pub fn select_subjects(&self, keep: &[usize]) -> Result<Self> {
        if keep.is_empty() {
            return Err(Error::InvariantViolation("no subjects selected".into()));
        }
        if let Some(&s) = keep.iter().find(|&&s| s >= self.subjects) {
            return Err(Error::InvariantViolation(format!(
                "subject index {s} out of range for {} subjects",
                self.subjects
            )));
        }
        let n = keep.len();
        let mut scores = Vec::with_capacity(self.videos * n);
        let mut present = Vec::with_capacity(self.videos * n);
        let mut filled = Vec::with_capacity(self.videos * n);
        for e in 0..self.videos {
            for &s in keep {
                let i = e * self.subjects + s;
                scores.push(self.scores[i]);
                present.push(self.present[i]);
                filled.push(self.filled[i]);
            }
        }
        let out = ScoreMatrix {
            videos: self.videos,
            subjects: n,
            contents: self.contents,
            scores,
            present,
            filled,
            content_of: self.content_of.clone(),
            labels: self.labels.as_ref().map(|l| Labels {
                videos: l.videos.clone(),
                subjects: keep.iter().map(|&s| l.subjects[s].clone()).collect(),
                contents: l.contents.clone(),
            }),
        };
        out.check_coverage()?;
        Ok(out)
    }
}
