//! Descriptive statistics over present scores.
//!
//! Every statistic here uses population normalization (divide by the number
//! of present entries) and skips missing cells.

use crate::matrix::{Axis, ScoreMatrix};

/// Per-video and per-subject means and spreads of a matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Moments {
    pub mu_e: Vec<f64>,
    pub mu_s: Vec<f64>,
    pub sigma_e: Vec<f64>,
    pub sigma_s: Vec<f64>,
    pub sigma_c: Vec<f64>,
}

impl Moments {
    pub fn of(m: &ScoreMatrix) -> Self {
        let (mu_e, mu_s) = means(m);
        let sigma_e = central_moment(m, 2, Axis::Video)
            .into_iter()
            .map(f64::sqrt)
            .collect();
        let sigma_s = central_moment(m, 2, Axis::Subject)
            .into_iter()
            .map(f64::sqrt)
            .collect();
        let sigma_c = sigma_c(m, &mu_s);
        Moments {
            mu_e,
            mu_s,
            sigma_e,
            sigma_s,
            sigma_c,
        }
    }
}

/// Mean of present scores per video and per subject.
pub fn means(m: &ScoreMatrix) -> (Vec<f64>, Vec<f64>) {
    let mut row_sum = vec![0.0; m.videos()];
    let mut row_n = vec![0usize; m.videos()];
    let mut col_sum = vec![0.0; m.subjects()];
    let mut col_n = vec![0usize; m.subjects()];
    for (e, s, x) in m.observations() {
        row_sum[e] += x;
        row_n[e] += 1;
        col_sum[s] += x;
        col_n[s] += 1;
    }
    let mu_e = row_sum
        .iter()
        .zip(&row_n)
        .map(|(&t, &n)| t / n as f64)
        .collect();
    let mu_s = col_sum
        .iter()
        .zip(&col_n)
        .map(|(&t, &n)| t / n as f64)
        .collect();
    (mu_e, mu_s)
}

/// `n`-th central moment per video or per subject.
///
/// # Panics
///
/// Panics if `n == 0`.
pub fn central_moment(m: &ScoreMatrix, n: u32, axis: Axis) -> Vec<f64> {
    assert!(n >= 1, "central moment order must be positive");
    let (mu_e, mu_s) = means(m);
    let (len, mu) = match axis {
        Axis::Video => (m.videos(), &mu_e),
        Axis::Subject => (m.subjects(), &mu_s),
    };
    let mut acc = vec![0.0; len];
    let mut count = vec![0usize; len];
    for (e, s, x) in m.observations() {
        let k = match axis {
            Axis::Video => e,
            Axis::Subject => s,
        };
        acc[k] += (x - mu[k]).powi(n as i32);
        count[k] += 1;
    }
    acc.iter()
        .zip(&count)
        .map(|(&t, &c)| t / c as f64)
        .collect()
}

/// Per-content RMS deviation of scores from their subject means.
pub fn sigma_c(m: &ScoreMatrix, mu_s: &[f64]) -> Vec<f64> {
    let mut acc = vec![0.0; m.contents()];
    let mut count = vec![0usize; m.contents()];
    for (e, s, x) in m.observations() {
        let c = m.content_of(e);
        acc[c] += (x - mu_s[s]).powi(2);
        count[c] += 1;
    }
    acc.iter()
        .zip(&count)
        .map(|(&t, &n)| (t / n as f64).sqrt())
        .collect()
}
