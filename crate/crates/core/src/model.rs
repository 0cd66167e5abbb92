//! The generative opinion-score model and its log-likelihood.
//!
//! Each present score is modeled as
//!
//! ```text
//! X[e,s] ~ N(x[e] + b[s], v[s]^2 + a[c(e)]^2)
//! ```
//!
//! with `x` the per-video quality, `b` and `v` the per-subject bias and
//! inconsistency, and `a` the per-content ambiguity. The log-likelihood drops
//! the constant `-0.5 * ln(2 pi)` per observation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::ScoreMatrix;

/// The unknowns of the model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Quality of each video, in score units.
    pub x: Vec<f64>,
    /// Bias of each subject, in score units.
    pub b: Vec<f64>,
    /// Inconsistency (standard deviation) of each subject.
    pub v: Vec<f64>,
    /// Ambiguity (standard deviation) of each content.
    pub a: Vec<f64>,
}

impl ModelParams {
    /// Checks finiteness, non-negative spreads, and (optionally) shape.
    pub fn validate(&self) -> Result<()> {
        let all = self.x.iter().chain(&self.b).chain(&self.v).chain(&self.a);
        if all.clone().any(|p| !p.is_finite()) {
            return Err(Error::InvariantViolation(
                "model parameters must be finite".into(),
            ));
        }
        if self.v.iter().chain(&self.a).any(|&p| p < 0.0) {
            return Err(Error::InvariantViolation(
                "subject inconsistency and content ambiguity must be non-negative".into(),
            ));
        }
        Ok(())
    }

    pub fn check_shape(&self, m: &ScoreMatrix) -> Result<()> {
        let expect = (m.videos(), m.subjects(), m.subjects(), m.contents());
        let got = (self.x.len(), self.b.len(), self.v.len(), self.a.len());
        if got != expect {
            return Err(Error::InvariantViolation(format!(
                "parameter shape (x={}, b={}, v={}, a={}) does not match matrix (E={}, S={}, C={})",
                got.0, got.1, got.2, got.3, expect.0, expect.1, expect.3
            )));
        }
        Ok(())
    }

    /// Total observation variance `v[s]^2 + a[c]^2`.
    #[inline]
    pub fn variance(&self, s: usize, c: usize) -> f64 {
        self.v[s] * self.v[s] + self.a[c] * self.a[c]
    }
}

/// One vector per parameter family, shaped like [`ModelParams`].
///
/// Used for gradients and for the diagonal of the Hessian.
#[derive(Debug, Clone, PartialEq)]
pub struct PerFamily {
    pub x: Vec<f64>,
    pub b: Vec<f64>,
    pub v: Vec<f64>,
    pub a: Vec<f64>,
}

impl PerFamily {
    pub fn zeros(videos: usize, subjects: usize, contents: usize) -> Self {
        PerFamily {
            x: vec![0.0; videos],
            b: vec![0.0; subjects],
            v: vec![0.0; subjects],
            a: vec![0.0; contents],
        }
    }

    /// Largest absolute entry across all four families.
    pub fn max_abs(&self) -> f64 {
        self.x
            .iter()
            .chain(&self.b)
            .chain(&self.v)
            .chain(&self.a)
            .fold(0.0, |acc, g| acc.max(g.abs()))
    }
}

/// Iterates present observations together with their residual
/// `x[e,s] - x[e] - b[s]` and total variance, failing on zero variance.
fn for_each_term(
    m: &ScoreMatrix,
    p: &ModelParams,
    mut f: impl FnMut(usize, usize, usize, f64, f64),
) -> Result<()> {
    p.check_shape(m)?;
    for (e, s, score) in m.observations() {
        let c = m.content_of(e);
        let var = p.variance(s, c);
        if var <= 0.0 {
            return Err(Error::DegenerateVariance {
                video: e,
                subject: s,
            });
        }
        f(e, s, c, score - p.x[e] - p.b[s], var);
    }
    Ok(())
}

/// Log-likelihood of the present scores, constant terms omitted.
pub fn log_likelihood(m: &ScoreMatrix, p: &ModelParams) -> Result<f64> {
    let mut total = 0.0;
    for_each_term(m, p, |_, _, _, r, var| {
        total += -0.5 * var.ln() - 0.5 * r * r / var;
    })?;
    Ok(total)
}

/// First-order partial derivatives of the log-likelihood.
pub fn gradient(m: &ScoreMatrix, p: &ModelParams) -> Result<PerFamily> {
    let mut g = PerFamily::zeros(m.videos(), m.subjects(), m.contents());
    for_each_term(m, p, |e, s, c, r, var| {
        let w = 1.0 / var;
        g.x[e] += r * w;
        g.b[s] += r * w;
        let spread = -w + r * r * w * w;
        g.v[s] += p.v[s] * spread;
        g.a[c] += p.a[c] * spread;
    })?;
    Ok(g)
}

/// Diagonal second-order partial derivatives of the log-likelihood.
pub fn curvature(m: &ScoreMatrix, p: &ModelParams) -> Result<PerFamily> {
    let mut h = PerFamily::zeros(m.videos(), m.subjects(), m.contents());
    for_each_term(m, p, |e, s, c, r, var| {
        let w = 1.0 / var;
        let w2 = w * w;
        let w4 = w2 * w2;
        let (v2, a2) = (p.v[s] * p.v[s], p.a[c] * p.a[c]);
        let r2 = r * r;
        h.x[e] -= w;
        h.b[s] -= w;
        h.v[s] += -(a2 - v2) * w2 + r2 * (a2 * a2 - 2.0 * a2 * v2 - 3.0 * v2 * v2) * w4;
        h.a[c] += -(v2 - a2) * w2 + r2 * (v2 * v2 - 2.0 * v2 * a2 - 3.0 * a2 * a2) * w4;
    })?;
    Ok(h)
}
