//! Shared fixtures and oracles for the integration tests.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use subjective_core::synth::{self, ParamRanges};
use subjective_core::{GeneratorSpec, ModelParams, ScoreMatrix};

/// Central-difference step used by the derivative oracles.
pub const FD_STEP: f64 = 1e-5;

/// Relative error with a floor of 1 in the denominator, so that entries
/// near zero are compared absolutely.
pub fn rel_err(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / 1f64.max(analytic.abs()).max(numeric.abs())
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random instance with spreads in [0.1, 2]. Each cell is missing with
/// probability `missing`, redrawn until every row and column has a score.
pub fn random_instance(
    videos: usize,
    subjects: usize,
    contents: usize,
    missing: f64,
    seed: u64,
) -> (ScoreMatrix, ModelParams) {
    let mut rng = rng(seed);
    let content_of: Vec<usize> = (0..videos)
        .map(|e| {
            if e < contents {
                e
            } else {
                rng.random_range(0..contents)
            }
        })
        .collect();
    let params = ModelParams {
        x: (0..videos).map(|_| rng.random_range(1.0..5.0)).collect(),
        b: (0..subjects).map(|_| rng.random_range(-1.0..1.0)).collect(),
        v: (0..subjects).map(|_| rng.random_range(0.1..2.0)).collect(),
        a: (0..contents).map(|_| rng.random_range(0.1..2.0)).collect(),
    };
    loop {
        let scores: Vec<f64> = (0..videos * subjects)
            .map(|_| rng.random_range(0.0..6.0))
            .collect();
        let present: Vec<bool> = (0..videos * subjects)
            .map(|_| rng.random::<f64>() >= missing)
            .collect();
        if let Ok(m) = ScoreMatrix::new(videos, subjects, scores, present, content_of.clone()) {
            return (m, params);
        }
    }
}

/// Synthetic dataset with heterogeneous subjects and its ground truth.
pub fn heterogeneous(
    videos: usize,
    subjects: usize,
    contents: usize,
    seed: u64,
) -> (ScoreMatrix, ModelParams) {
    let truth = synth::draw_params(videos, subjects, contents, &ParamRanges::default(), seed);
    let m = synth::generate(&GeneratorSpec::new(truth.clone(), seed)).unwrap();
    (m, truth)
}

/// The paper's typical scenario: 200 videos, 30 subjects, 20 contents.
pub fn typical(seed: u64) -> (ScoreMatrix, ModelParams) {
    heterogeneous(200, 30, 20, seed)
}

pub fn family(p: &ModelParams, k: usize) -> &Vec<f64> {
    match k {
        0 => &p.x,
        1 => &p.b,
        2 => &p.v,
        _ => &p.a,
    }
}

pub fn family_mut(p: &mut ModelParams, k: usize) -> &mut Vec<f64> {
    match k {
        0 => &mut p.x,
        1 => &mut p.b,
        2 => &mut p.v,
        _ => &mut p.a,
    }
}

/// `p` with entry `i` of family `k` shifted by `delta`.
pub fn nudged(p: &ModelParams, k: usize, i: usize, delta: f64) -> ModelParams {
    let mut q = p.clone();
    family_mut(&mut q, k)[i] += delta;
    q
}

pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
