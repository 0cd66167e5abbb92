//! Damped Newton-Raphson estimation of the model parameters.
//!
//! Every iteration updates the four parameter families in a fixed order:
//! subject biases, subject inconsistencies, content ambiguities, then video
//! qualities. Each family's Newton target is computed from the freshest
//! state (the families updated earlier in the same iteration) and blended
//! into the current value as `(1 - alpha) * old + alpha * new`.
//!
//! The likelihood only sees `x[e] + b[s]`, so it is flat along
//! `(x + d, b - d)`. A [`Gauge`] projection after every iteration pins that
//! direction down.

use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::matrix::ScoreMatrix;
use crate::model::{curvature, ModelParams};
use crate::moments::{self, Moments};

/// Two-sided 95% standard normal quantile.
pub const Z_95: f64 = 1.96;

/// How the flat `(x + d, b - d)` direction is resolved.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Gauge {
    /// Subject biases average to zero.
    #[default]
    ZeroMeanBias,
    /// The first video's quality equals its MOS.
    #[serde(rename = "fix-first-video")]
    FixFirstVideoToMos,
    /// No projection; the flat direction is left wherever the updates put it.
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Refresh rate in `(0, 1]`.
    pub alpha: f64,
    /// Stop once the Euclidean change of `x` over one iteration drops below this.
    pub stop_threshold: f64,
    pub max_iterations: usize,
    pub gauge: Gauge,
    /// Lower clamp applied to every `v[s]` and `a[c]`.
    pub variance_floor: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            alpha: 0.1,
            stop_threshold: 1e-9,
            max_iterations: 10_000,
            gauge: Gauge::ZeroMeanBias,
            variance_floor: 1e-8,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "alpha must lie in (0, 1], got {}",
                self.alpha
            )));
        }
        if !(self.stop_threshold > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "stop threshold must be positive, got {}",
                self.stop_threshold
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig(
                "max iterations must be at least 1".into(),
            ));
        }
        if !(self.variance_floor > 0.0 && self.variance_floor.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "variance floor must be positive, got {}",
                self.variance_floor
            )));
        }
        Ok(())
    }
}

/// Half-width of a confidence interval.
///
/// Serialized as a number, or as the string `"inf"` when unbounded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HalfWidth {
    Finite(f64),
    /// The interval has no finite bound (non-negative curvature, or too few samples).
    Unbounded,
}

impl HalfWidth {
    /// `z / sqrt(information)`, unbounded unless the information is positive.
    pub fn from_information(information: f64) -> Self {
        if information > 0.0 && information.is_finite() {
            HalfWidth::Finite(Z_95 / information.sqrt())
        } else {
            HalfWidth::Unbounded
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            HalfWidth::Finite(h) => Some(h),
            HalfWidth::Unbounded => None,
        }
    }

    pub fn is_unbounded(self) -> bool {
        matches!(self, HalfWidth::Unbounded)
    }
}

impl fmt::Display for HalfWidth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HalfWidth::Finite(h) => write!(f, "{h}"),
            HalfWidth::Unbounded => f.write_str("inf"),
        }
    }
}

impl Serialize for HalfWidth {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            HalfWidth::Finite(h) => serializer.serialize_f64(*h),
            HalfWidth::Unbounded => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for HalfWidth {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct HalfWidthVisitor;

        impl Visitor<'_> for HalfWidthVisitor {
            type Value = HalfWidth;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a finite number or the string \"inf\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<HalfWidth, E> {
                Ok(HalfWidth::Finite(v))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<HalfWidth, E> {
                Ok(HalfWidth::Finite(v as f64))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<HalfWidth, E> {
                Ok(HalfWidth::Finite(v as f64))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<HalfWidth, E> {
                if v == "inf" {
                    Ok(HalfWidth::Unbounded)
                } else {
                    Err(E::invalid_value(de::Unexpected::Str(v), &self))
                }
            }
        }

        deserializer.deserialize_any(HalfWidthVisitor)
    }
}

/// Confidence half-widths, shaped like [`ModelParams`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamHalfWidths {
    pub x: Vec<HalfWidth>,
    pub b: Vec<HalfWidth>,
    pub v: Vec<HalfWidth>,
    pub a: Vec<HalfWidth>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamEstimates {
    pub params: ModelParams,
    pub ci_halfwidth: ParamHalfWidths,
    pub iterations_used: usize,
    pub converged: bool,
    pub final_delta_x: f64,
    /// Scalar `v`/`a` updates that fell back to variance scoring because the
    /// Newton step was unusable (non-negative curvature or a non-positive target).
    pub fallback_updates: usize,
}

/// Starting point: MOS for `x`, zero bias, subject and content spreads for `v` and `a`.
pub fn initialize(m: &ScoreMatrix, variance_floor: f64) -> ModelParams {
    let Moments {
        mu_e,
        sigma_s,
        sigma_c,
        ..
    } = Moments::of(m);
    ModelParams {
        x: mu_e,
        b: vec![0.0; m.subjects()],
        v: sigma_s.into_iter().map(|v| v.max(variance_floor)).collect(),
        a: sigma_c.into_iter().map(|a| a.max(variance_floor)).collect(),
    }
}

/// Moves `p` along the flat direction according to `mode`.
pub fn gauge_fix(p: &ModelParams, mode: Gauge, mu_e: &[f64]) -> ModelParams {
    let mut out = p.clone();
    apply_gauge(&mut out, mode, mu_e);
    out
}

fn apply_gauge(p: &mut ModelParams, mode: Gauge, mu_e: &[f64]) {
    let shift = match mode {
        Gauge::ZeroMeanBias => p.b.iter().sum::<f64>() / p.b.len() as f64,
        Gauge::FixFirstVideoToMos => mu_e[0] - p.x[0],
        Gauge::None => return,
    };
    if shift == 0.0 {
        return;
    }
    p.x.iter_mut().for_each(|x| *x += shift);
    p.b.iter_mut().for_each(|b| *b -= shift);
}

/// One full damped Newton iteration followed by the gauge projection.
///
/// Returns the updated parameters and the number of scalar `v`/`a` updates
/// that used the variance-scoring fallback.
pub fn newton_step(
    m: &ScoreMatrix,
    p: &ModelParams,
    cfg: &SolverConfig,
) -> Result<(ModelParams, usize)> {
    cfg.validate()?;
    p.check_shape(m)?;
    let (mu_e, _) = moments::means(m);
    let mut next = p.clone();
    let fallbacks = step_in_place(m, &mut next, cfg, &mu_e)?;
    Ok((next, fallbacks))
}

fn weight(m: &ScoreMatrix, p: &ModelParams, e: usize, s: usize) -> Result<f64> {
    let var = p.variance(s, m.content_of(e));
    if var > 0.0 {
        Ok(1.0 / var)
    } else {
        Err(Error::DegenerateVariance {
            video: e,
            subject: s,
        })
    }
}

/// Accumulated derivative terms for one spread parameter (`v[s]` or `a[c]`).
#[derive(Debug, Clone, Copy, Default)]
struct SpreadTerms {
    /// First derivative of the log-likelihood.
    grad: f64,
    /// Observed second derivative.
    hess: f64,
    /// `sum(w^2 * r^2 - w)`: score of the variance `tau = value^2`, times 2.
    excess: f64,
    /// `sum(w^2)`: expected information of `tau`, times 2.
    info: f64,
}

impl SpreadTerms {
    #[inline]
    fn add(&mut self, value: f64, other2: f64, w: f64, r2: f64) {
        let own2 = value * value;
        let w2 = w * w;
        self.grad += -w * value + w2 * value * r2;
        self.hess += -w2 * (other2 - own2)
            + w2 * w2 * r2 * (other2 * other2 - 2.0 * other2 * own2 - 3.0 * own2 * own2);
        self.excess += w2 * r2 - w;
        self.info += w2;
    }
}

/// Damped update of one spread parameter.
///
/// Uses the Newton target when the observed curvature is negative and the
/// target stays positive. Otherwise the Newton step either points away from
/// the maximum or jumps across zero, and the target comes from one
/// Fisher-scoring step on the variance `value^2` instead. Returns `false`
/// when the fallback was used.
fn damped_spread_update(value: &mut f64, t: &SpreadTerms, cfg: &SolverConfig) -> bool {
    let newton = *value - t.grad / t.hess;
    let use_newton = t.hess < 0.0 && newton > 0.0;
    let target = if use_newton {
        newton
    } else {
        (*value * *value + t.excess / t.info).max(0.0).sqrt()
    };
    *value = ((1.0 - cfg.alpha) * *value + cfg.alpha * target).max(cfg.variance_floor);
    use_newton
}

fn step_in_place(
    m: &ScoreMatrix,
    p: &mut ModelParams,
    cfg: &SolverConfig,
    mu_e: &[f64],
) -> Result<usize> {
    let (videos, subjects, contents) = (m.videos(), m.subjects(), m.contents());
    let alpha = cfg.alpha;
    let mut fallbacks = 0;

    // Subject bias.
    let mut num = vec![0.0; subjects];
    let mut den = vec![0.0; subjects];
    for (e, s, score) in m.observations() {
        let w = weight(m, p, e, s)?;
        num[s] += w * (score - p.x[e]);
        den[s] += w;
    }
    for s in 0..subjects {
        let target = num[s] / den[s];
        p.b[s] = (1.0 - alpha) * p.b[s] + alpha * target;
    }

    // Subject inconsistency.
    let mut terms = vec![SpreadTerms::default(); subjects];
    for (e, s, score) in m.observations() {
        let c = m.content_of(e);
        let w = weight(m, p, e, s)?;
        let r2 = (score - p.x[e] - p.b[s]).powi(2);
        terms[s].add(p.v[s], p.a[c] * p.a[c], w, r2);
    }
    for (v, t) in p.v.iter_mut().zip(&terms) {
        if !damped_spread_update(v, t, cfg) {
            fallbacks += 1;
        }
    }

    // Content ambiguity.
    let mut terms = vec![SpreadTerms::default(); contents];
    for (e, s, score) in m.observations() {
        let c = m.content_of(e);
        let w = weight(m, p, e, s)?;
        let r2 = (score - p.x[e] - p.b[s]).powi(2);
        terms[c].add(p.a[c], p.v[s] * p.v[s], w, r2);
    }
    for (a, t) in p.a.iter_mut().zip(&terms) {
        if !damped_spread_update(a, t, cfg) {
            fallbacks += 1;
        }
    }

    // Video quality.
    let mut num = vec![0.0; videos];
    let mut den = vec![0.0; videos];
    for (e, s, score) in m.observations() {
        let w = weight(m, p, e, s)?;
        num[e] += w * (score - p.b[s]);
        den[e] += w;
    }
    for e in 0..videos {
        let target = num[e] / den[e];
        p.x[e] = (1.0 - alpha) * p.x[e] + alpha * target;
    }

    apply_gauge(p, cfg.gauge, mu_e);
    Ok(fallbacks)
}

/// Runs the estimator to convergence (or the iteration cap) and attaches
/// confidence intervals.
pub fn solve(m: &ScoreMatrix, cfg: &SolverConfig) -> Result<ParamEstimates> {
    solve_observed(m, cfg, |_, _| {})
}

/// Like [`solve`], calling `observer(iteration, params)` after every iteration.
pub fn solve_observed(
    m: &ScoreMatrix,
    cfg: &SolverConfig,
    mut observer: impl FnMut(usize, &ModelParams),
) -> Result<ParamEstimates> {
    cfg.validate()?;
    let (mu_e, _) = moments::means(m);
    let mut p = initialize(m, cfg.variance_floor);
    apply_gauge(&mut p, cfg.gauge, &mu_e);

    let mut converged = false;
    let mut iterations_used = 0;
    let mut final_delta_x = f64::INFINITY;
    let mut fallback_updates = 0;
    let mut prev_x = p.x.clone();
    for iteration in 1..=cfg.max_iterations {
        prev_x.copy_from_slice(&p.x);
        fallback_updates += step_in_place(m, &mut p, cfg, &mu_e)?;
        observer(iteration, &p);
        iterations_used = iteration;
        final_delta_x =
            p.x.iter()
                .zip(&prev_x)
                .map(|(x, x0)| (x - x0) * (x - x0))
                .sum::<f64>()
                .sqrt();
        if final_delta_x < cfg.stop_threshold {
            converged = true;
            break;
        }
    }

    let ci_halfwidth = confidence_intervals(m, &p)?;
    Ok(ParamEstimates {
        params: p,
        ci_halfwidth,
        iterations_used,
        converged,
        final_delta_x,
        fallback_updates,
    })
}

/// 95% half-widths `1.96 / sqrt(-d2L/dtheta2)` for every scalar parameter.
pub fn confidence_intervals(m: &ScoreMatrix, p: &ModelParams) -> Result<ParamHalfWidths> {
    let h = curvature(m, p)?;
    let widths = |d: &[f64]| -> Vec<HalfWidth> {
        d.iter().map(|&c| HalfWidth::from_information(-c)).collect()
    };
    Ok(ParamHalfWidths {
        x: widths(&h.x),
        b: widths(&h.b),
        v: widths(&h.v),
        a: widths(&h.a),
    })
}
