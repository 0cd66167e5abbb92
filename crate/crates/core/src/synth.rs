//! Seeded synthetic data and the degradation processes used in experiments.
//!
//! All randomness comes from [`ChaCha8Rng`] seeded with
//! `ChaCha8Rng::seed_from_u64(seed)`. Distinct purposes within one seed use
//! distinct ChaCha streams, so results are reproducible across platforms.

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::ScoreMatrix;
use crate::model::ModelParams;

/// Maximum number of redraws when a subsample leaves a row or column empty.
pub const SUBSAMPLE_ATTEMPTS: usize = 100;

/// Deterministic generator for `seed`, on ChaCha stream `stream`.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Contiguous, near-equal content blocks: video `e` gets content `e * C / E`.
pub fn contiguous_contents(videos: usize, contents: usize) -> Vec<usize> {
    (0..videos).map(|e| e * contents / videos).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub true_params: ModelParams,
    pub content_of: Vec<usize>,
    pub seed: u64,
}

impl GeneratorSpec {
    /// Spec with contiguous content blocks.
    pub fn new(true_params: ModelParams, seed: u64) -> Self {
        let content_of = contiguous_contents(true_params.x.len(), true_params.a.len());
        GeneratorSpec {
            true_params,
            content_of,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let p = &self.true_params;
        p.validate()?;
        if p.x.is_empty() || p.b.is_empty() || p.a.is_empty() {
            return Err(Error::InvariantViolation(
                "generator needs at least one video, subject and content".into(),
            ));
        }
        if p.b.len() != p.v.len() {
            return Err(Error::InvariantViolation(
                "bias and inconsistency vectors differ in length".into(),
            ));
        }
        if self.content_of.len() != p.x.len() {
            return Err(Error::InvariantViolation(
                "content map length differs from the number of videos".into(),
            ));
        }
        let mut used = vec![false; p.a.len()];
        for &c in &self.content_of {
            *used
                .get_mut(c)
                .ok_or_else(|| Error::InvariantViolation(format!("content {c} out of range")))? =
                true;
        }
        if used.iter().any(|&u| !u) {
            return Err(Error::InvariantViolation(
                "every content needs a video".into(),
            ));
        }
        Ok(())
    }
}

/// Ranges for drawing ground-truth parameters uniformly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamRanges {
    pub x: (f64, f64),
    pub b: (f64, f64),
    pub v: (f64, f64),
    pub a: (f64, f64),
}

impl Default for ParamRanges {
    /// Heterogeneous subjects on a 1..5 quality scale.
    fn default() -> Self {
        ParamRanges {
            x: (1.0, 5.0),
            b: (-1.0, 1.0),
            v: (0.2, 1.0),
            a: (0.1, 0.8),
        }
    }
}

/// Draws ground-truth parameters uniformly from `ranges`.
pub fn draw_params(
    videos: usize,
    subjects: usize,
    contents: usize,
    ranges: &ParamRanges,
    seed: u64,
) -> ModelParams {
    let mut rng = rng_for(seed, 1);
    let mut draw = |n: usize, (lo, hi): (f64, f64)| -> Vec<f64> {
        (0..n)
            .map(|_| lo + (hi - lo) * rng.random::<f64>())
            .collect()
    };
    let x = draw(videos, ranges.x);
    let b = draw(subjects, ranges.b);
    let v = draw(subjects, ranges.v);
    let a = draw(contents, ranges.a);
    ModelParams { x, b, v, a }
}

/// Samples a full matrix from the model.
///
/// For each cell in row-major order two standard normals `n1`, `n2` are drawn
/// and the score is `x[e] + b[s] + v[s] * n1 + a[c(e)] * n2`.
pub fn generate(spec: &GeneratorSpec) -> Result<ScoreMatrix> {
    spec.validate()?;
    let p = &spec.true_params;
    let (videos, subjects) = (p.x.len(), p.b.len());
    let mut rng = rng_for(spec.seed, 0);
    let mut scores = Vec::with_capacity(videos * subjects);
    for e in 0..videos {
        let c = spec.content_of[e];
        for s in 0..subjects {
            let n1: f64 = rng.sample(StandardNormal);
            let n2: f64 = rng.sample(StandardNormal);
            scores.push(p.x[e] + (p.b[s] + p.v[s] * n1) + p.a[c] * n2);
        }
    }
    ScoreMatrix::new(
        videos,
        subjects,
        scores,
        vec![true; videos * subjects],
        spec.content_of.clone(),
    )
}

/// Scrambles the listed subjects: each one's present scores are shuffled
/// across that subject's present positions.
pub fn corrupt_subjects(m: &ScoreMatrix, subjects: &[usize], seed: u64) -> Result<ScoreMatrix> {
    if let Some(&s) = subjects.iter().find(|&&s| s >= m.subjects()) {
        return Err(Error::InvariantViolation(format!(
            "subject {s} out of range for {} subjects",
            m.subjects()
        )));
    }
    let mut order = subjects.to_vec();
    order.sort_unstable();
    order.dedup();
    let mut rng = rng_for(seed, 0);
    let mut shuffled: Vec<Vec<f64>> = Vec::with_capacity(order.len());
    for &s in &order {
        let mut col: Vec<f64> = m.column(s).map(|(_, x)| x).collect();
        col.shuffle(&mut rng);
        shuffled.push(col);
    }
    let mut cursor = vec![0usize; order.len()];
    // Cells are visited row-major, so each column is consumed top to bottom.
    m.map_present(|_, s, x| match order.binary_search(&s) {
        Ok(k) => {
            let value = shuffled[k][cursor[k]];
            cursor[k] += 1;
            value
        }
        Err(_) => x,
    })
}

/// Picks `count` distinct subjects uniformly at random, ascending.
pub fn choose_subjects(subjects: usize, count: usize, seed: u64) -> Result<Vec<usize>> {
    if count > subjects {
        return Err(Error::InvariantViolation(format!(
            "cannot choose {count} of {subjects} subjects"
        )));
    }
    let mut rng = rng_for(seed, 2);
    let mut chosen = index::sample(&mut rng, subjects, count).into_vec();
    chosen.sort_unstable();
    Ok(chosen)
}

/// Replaces each present score, with probability `prob`, by a uniform draw
/// from the integers 1..=5.
pub fn corrupt_random(m: &ScoreMatrix, prob: f64, seed: u64) -> Result<ScoreMatrix> {
    if !(0.0..=1.0).contains(&prob) {
        return Err(Error::InvalidConfig(format!(
            "corruption probability must lie in [0, 1], got {prob}"
        )));
    }
    let mut rng = rng_for(seed, 0);
    m.map_present(|_, _, x| {
        // Draw both values unconditionally so the stream layout is fixed.
        let hit = rng.random::<f64>() < prob;
        let replacement = rng.random_range(1..=5) as f64;
        if hit {
            replacement
        } else {
            x
        }
    })
}

/// Keeps each present score independently with probability `keep_prob`.
///
/// If a draw empties a video or a subject, it is redrawn with seed
/// `seed + attempt`, up to [`SUBSAMPLE_ATTEMPTS`] times.
pub fn subsample(m: &ScoreMatrix, keep_prob: f64, seed: u64) -> Result<ScoreMatrix> {
    if !(keep_prob > 0.0 && keep_prob <= 1.0) {
        return Err(Error::InvalidConfig(format!(
            "keep probability must lie in (0, 1], got {keep_prob}"
        )));
    }
    if keep_prob == 1.0 {
        return Ok(m.clone());
    }
    for attempt in 0..SUBSAMPLE_ATTEMPTS {
        let mut rng = rng_for(seed.wrapping_add(attempt as u64), 0);
        let mask: Vec<bool> = m
            .mask()
            .iter()
            .map(|&p| {
                let keep = rng.random::<f64>() < keep_prob;
                p && keep
            })
            .collect();
        if let Ok(out) = m.with_mask(mask) {
            return Ok(out);
        }
    }
    Err(Error::CoverageUnattainable {
        attempts: SUBSAMPLE_ATTEMPTS,
    })
}

/// Keeps a uniformly random subset of `n_keep` subject columns, in their
/// original order.
pub fn subsample_subjects(m: &ScoreMatrix, n_keep: usize, seed: u64) -> Result<ScoreMatrix> {
    if n_keep == 0 || n_keep > m.subjects() {
        return Err(Error::InvalidConfig(format!(
            "cannot keep {n_keep} of {} subjects",
            m.subjects()
        )));
    }
    let mut rng = rng_for(seed, 0);
    let mut keep = index::sample(&mut rng, m.subjects(), n_keep).into_vec();
    keep.sort_unstable();
    m.select_subjects(&keep)
}
