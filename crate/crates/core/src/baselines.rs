//! Traditional score recovery: plain MOS, z-scoring, and BT.500 subject
//! rejection, plus the SR-MOS and ZS-SR-MOS pipelines built from them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{Axis, ScoreMatrix};
use crate::moments::{central_moment, means};
use crate::solver::{HalfWidth, Z_95};

/// Per-video scores with 95% confidence half-widths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineOutput {
    pub scores: Vec<f64>,
    pub ci_halfwidth: Vec<HalfWidth>,
}

/// Outcome of BT.500 screening.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RejectionResult {
    /// Rejected subject indices, ascending.
    pub rejected: Vec<usize>,
    /// Per subject: number of videos scored at or above `mu + eps * sigma`.
    pub p: Vec<usize>,
    /// Per subject: number of videos scored at or below `mu - eps * sigma`.
    pub q: Vec<usize>,
}

/// Mean opinion score per video with a normal-approximation interval.
///
/// The interval uses the sample (n - 1) standard deviation and is unbounded
/// for videos with fewer than two scores.
pub fn mos(m: &ScoreMatrix) -> BaselineOutput {
    let (mu_e, _) = means(m);
    let ci_halfwidth = (0..m.videos())
        .map(|e| {
            let n = m.row_count(e);
            if n < 2 {
                return HalfWidth::Unbounded;
            }
            let ss: f64 = m.row(e).map(|(_, x)| (x - mu_e[e]).powi(2)).sum();
            let sd = (ss / (n - 1) as f64).sqrt();
            HalfWidth::Finite(Z_95 * sd / (n as f64).sqrt())
        })
        .collect();
    BaselineOutput {
        scores: mu_e,
        ci_halfwidth,
    }
}

/// Standardizes every subject column to zero mean and unit population std.
pub fn zscore(m: &ScoreMatrix) -> Result<ScoreMatrix> {
    let (_, mu_s) = means(m);
    let sigma_s: Vec<f64> = central_moment(m, 2, Axis::Subject)
        .into_iter()
        .map(f64::sqrt)
        .collect();
    if let Some(s) = sigma_s.iter().position(|&sd| sd == 0.0) {
        return Err(Error::ZeroVariance { subject: s });
    }
    m.map_present(|_, s, x| (x - mu_s[s]) / sigma_s[s])
}

/// BT.500 subject screening.
///
/// Videos with zero spread are skipped, and the rejection fraction for each
/// subject is taken over that subject's present scores.
pub fn subject_rejection(m: &ScoreMatrix) -> RejectionResult {
    let subjects = m.subjects();
    let (mu_e, _) = means(m);
    let m2 = central_moment(m, 2, Axis::Video);
    let m4 = central_moment(m, 4, Axis::Video);
    let mut p = vec![0usize; subjects];
    let mut q = vec![0usize; subjects];
    for e in 0..m.videos() {
        if m2[e] == 0.0 {
            continue;
        }
        let kurtosis = m4[e] / (m2[e] * m2[e]);
        let eps = if (2.0..=4.0).contains(&kurtosis) {
            2.0
        } else {
            20f64.sqrt()
        };
        let sigma = m2[e].sqrt();
        for (s, x) in m.row(e) {
            if x >= mu_e[e] + eps * sigma {
                p[s] += 1;
            }
            if x <= mu_e[e] - eps * sigma {
                q[s] += 1;
            }
        }
    }
    let rejected = (0..subjects)
        .filter(|&s| {
            let total = p[s] + q[s];
            let frac = total as f64 / m.column_count(s) as f64;
            frac >= 0.05 && {
                let skew = (p[s] as f64 - q[s] as f64) / total as f64;
                skew.abs() < 0.3
            }
        })
        .collect();
    RejectionResult { rejected, p, q }
}

fn without_rejected(m: &ScoreMatrix, rejected: &[usize]) -> Result<ScoreMatrix> {
    if rejected.is_empty() {
        return Ok(m.clone());
    }
    let keep: Vec<usize> = (0..m.subjects())
        .filter(|s| rejected.binary_search(s).is_err())
        .collect();
    if keep.is_empty() {
        return Err(Error::EmptyAfterRejection { video: 0 });
    }
    if let Some(video) = (0..m.videos()).find(|&e| keep.iter().all(|&s| !m.is_present(e, s))) {
        return Err(Error::EmptyAfterRejection { video });
    }
    m.select_subjects(&keep)
}

/// MOS after dropping the subjects rejected by [`subject_rejection`].
pub fn sr_mos(m: &ScoreMatrix) -> Result<BaselineOutput> {
    let rejection = subject_rejection(m);
    Ok(mos(&without_rejected(m, &rejection.rejected)?))
}

/// Z-score, screen, then average. The output is in z-score units.
pub fn zs_sr_mos(m: &ScoreMatrix) -> Result<BaselineOutput> {
    let z = zscore(m)?;
    let rejection = subject_rejection(&z);
    Ok(mos(&without_rejected(&z, &rejection.rejected)?))
}
