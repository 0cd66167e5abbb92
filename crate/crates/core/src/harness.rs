//! Seeded experiments comparing recovery methods under data degradation.
//!
//! Each experiment degrades the full dataset once per (condition,
//! repetition), runs every method on the degraded copy, and reports the RMSE
//! against a reference: by default the method's own output on the unaltered
//! data, or the true qualities when they are known.
//!
//! Repetition `r` uses seed `base + r` for every condition and every method,
//! so methods are compared on identical degraded matrices. Repetitions run in
//! parallel; results are gathered in repetition order.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines;
use crate::error::{Error, Result};
use crate::matrix::ScoreMatrix;
use crate::solver::{self, SolverConfig};
use crate::synth;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum MethodId {
    #[serde(rename = "mos")]
    Mos,
    #[serde(rename = "sr-mos")]
    SrMos,
    #[serde(rename = "zs-sr-mos")]
    ZsSrMos,
    #[serde(rename = "mle")]
    Mle,
}

impl MethodId {
    pub const ALL: [MethodId; 4] = [
        MethodId::Mos,
        MethodId::SrMos,
        MethodId::ZsSrMos,
        MethodId::Mle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MethodId::Mos => "mos",
            MethodId::SrMos => "sr-mos",
            MethodId::ZsSrMos => "zs-sr-mos",
            MethodId::Mle => "mle",
        }
    }

    pub fn units(self) -> Units {
        match self {
            MethodId::ZsSrMos => Units::ZScore,
            _ => Units::Score,
        }
    }
}

impl fmt::Display for MethodId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MethodId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MethodId::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown method {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Units {
    Score,
    ZScore,
}

/// What an RMSE is measured against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReferenceKind {
    /// The method's own recovery on the unaltered full dataset.
    Benchmark,
    /// Known true video qualities.
    GroundTruth,
}

/// Experiment family and its condition axis.
#[derive(Debug, Clone, PartialEq)]
pub enum Condition {
    /// Random subsets of this many subjects.
    SubjectCount(Vec<usize>),
    /// This many randomly chosen subjects get their scores scrambled.
    CorruptedSubjects(Vec<usize>),
    /// Each score replaced by a random 1..5 category with this probability.
    RandomCorruption(Vec<f64>),
    /// Each score kept with this probability.
    KeepProbability(Vec<f64>),
}

impl Condition {
    pub fn kind(&self) -> &'static str {
        match self {
            Condition::SubjectCount(_) => "convergence",
            Condition::CorruptedSubjects(_) => "subject-corruption",
            Condition::RandomCorruption(_) => "random-corruption",
            Condition::KeepProbability(_) => "selective-sampling",
        }
    }

    fn len(&self) -> usize {
        match self {
            Condition::SubjectCount(v) | Condition::CorruptedSubjects(v) => v.len(),
            Condition::RandomCorruption(v) | Condition::KeepProbability(v) => v.len(),
        }
    }

    fn requested(&self, i: usize) -> f64 {
        match self {
            Condition::SubjectCount(v) | Condition::CorruptedSubjects(v) => v[i] as f64,
            Condition::RandomCorruption(v) | Condition::KeepProbability(v) => v[i],
        }
    }

    fn validate(&self, m: &ScoreMatrix) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        match self {
            Condition::SubjectCount(v) => {
                if let Some(n) = v.iter().find(|&&n| n == 0 || n > m.subjects()) {
                    return bad(format!("subject count {n} outside [1, {}]", m.subjects()));
                }
            }
            Condition::CorruptedSubjects(v) => {
                if let Some(n) = v.iter().find(|&&n| n > m.subjects()) {
                    return bad(format!("cannot corrupt {n} of {} subjects", m.subjects()));
                }
            }
            Condition::RandomCorruption(v) => {
                if let Some(p) = v.iter().find(|p| !(0.0..=1.0).contains(*p)) {
                    return bad(format!("corruption probability {p} outside [0, 1]"));
                }
            }
            Condition::KeepProbability(v) => {
                if let Some(p) = v.iter().find(|&&p| !(p > 0.0 && p <= 1.0)) {
                    return bad(format!("keep probability {p} outside (0, 1]"));
                }
            }
        }
        Ok(())
    }

    fn degrade(&self, m: &ScoreMatrix, i: usize, seed: u64) -> Result<ScoreMatrix> {
        match self {
            Condition::SubjectCount(v) => synth::subsample_subjects(m, v[i], seed),
            Condition::CorruptedSubjects(v) => {
                let chosen = synth::choose_subjects(m.subjects(), v[i], seed)?;
                synth::corrupt_subjects(m, &chosen, seed)
            }
            Condition::RandomCorruption(v) => synth::corrupt_random(m, v[i], seed),
            Condition::KeepProbability(v) => synth::subsample(m, v[i], seed),
        }
    }
}

/// RMSE statistics of one method across a condition axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub method: MethodId,
    pub kind: String,
    pub units: Units,
    pub reference: ReferenceKind,
    /// Condition values as requested (count or probability).
    pub requested: Vec<f64>,
    /// Reported axis: the requested value, or the realized mean number of
    /// present scores for selective sampling.
    pub condition_axis: Vec<f64>,
    /// Mean RMSE over successful repetitions (NaN if none succeeded).
    pub rmse_mean: Vec<f64>,
    /// Sample standard deviation of the RMSE (0 with fewer than two values).
    pub rmse_std: Vec<f64>,
    /// Successful repetitions per condition.
    pub repetitions: Vec<usize>,
    /// Failed repetitions per condition.
    pub dropped: Vec<usize>,
    /// Per condition, per repetition RMSE; `None` for a dropped repetition.
    pub samples: Vec<Vec<Option<f64>>>,
    pub seed: u64,
}

/// Root-mean-squared difference of two equal-length vectors.
pub fn rmse(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let ss: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    Ok((ss / a.len() as f64).sqrt())
}

/// Per-video quality scores recovered by `method`.
pub fn recover(m: &ScoreMatrix, method: MethodId, cfg: &SolverConfig) -> Result<Vec<f64>> {
    Ok(match method {
        MethodId::Mos => baselines::mos(m).scores,
        MethodId::SrMos => baselines::sr_mos(m)?.scores,
        MethodId::ZsSrMos => baselines::zs_sr_mos(m)?.scores,
        MethodId::Mle => solver::solve(m, cfg)?.params.x,
    })
}

/// The method's own recovery on the unaltered dataset.
pub fn benchmark(m: &ScoreMatrix, method: MethodId, cfg: &SolverConfig) -> Result<Vec<f64>> {
    recover(m, method, cfg)
}

/// A configured experiment over one dataset.
#[derive(Debug, Clone)]
pub struct Experiment<'a> {
    data: &'a ScoreMatrix,
    methods: Vec<MethodId>,
    reps: usize,
    seed: u64,
    solver: SolverConfig,
    truth: Option<Vec<f64>>,
}

impl<'a> Experiment<'a> {
    /// 100 repetitions, seed 0, default solver settings, benchmark reference.
    pub fn new(data: &'a ScoreMatrix, methods: &[MethodId]) -> Self {
        let mut methods = methods.to_vec();
        methods.sort_unstable();
        methods.dedup();
        Experiment {
            data,
            methods,
            reps: 100,
            seed: 0,
            solver: SolverConfig::default(),
            truth: None,
        }
    }

    pub fn reps(mut self, reps: usize) -> Self {
        self.reps = reps;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn solver(mut self, cfg: SolverConfig) -> Self {
        self.solver = cfg;
        self
    }

    /// Measure score-unit methods against known true qualities.
    ///
    /// ZS-SR-MOS works in z-units and keeps its own benchmark.
    pub fn ground_truth(mut self, x: Vec<f64>) -> Self {
        self.truth = Some(x);
        self
    }

    fn reference(&self, method: MethodId) -> Result<(ReferenceKind, Vec<f64>)> {
        match (&self.truth, method.units()) {
            (Some(x), Units::Score) => Ok((ReferenceKind::GroundTruth, x.clone())),
            _ => Ok((
                ReferenceKind::Benchmark,
                benchmark(self.data, method, &self.solver)?,
            )),
        }
    }

    pub fn run(&self, condition: &Condition) -> Result<Vec<ExperimentReport>> {
        if self.reps == 0 {
            return Err(Error::InvalidConfig(
                "repetitions must be at least 1".into(),
            ));
        }
        if self.methods.is_empty() {
            return Err(Error::InvalidConfig("no methods selected".into()));
        }
        if let Some(x) = &self.truth {
            if x.len() != self.data.videos() {
                return Err(Error::LengthMismatch {
                    left: x.len(),
                    right: self.data.videos(),
                });
            }
        }
        self.solver.validate()?;
        condition.validate(self.data)?;

        let references = self
            .methods
            .iter()
            .map(|&method| self.reference(method))
            .collect::<Result<Vec<_>>>()?;

        let n_cond = condition.len();
        // outcomes[i][r] = (present count, per-method rmse) for condition i, repetition r
        let outcomes: Vec<Vec<(Option<usize>, Vec<Option<f64>>)>> = (0..n_cond)
            .map(|i| {
                (0..self.reps)
                    .into_par_iter()
                    .map(|r| self.repetition(condition, i, r, &references))
                    .collect()
            })
            .collect();

        let reports = self
            .methods
            .iter()
            .enumerate()
            .map(|(k, &method)| {
                let mut report = ExperimentReport {
                    method,
                    kind: condition.kind().to_string(),
                    units: method.units(),
                    reference: references[k].0,
                    requested: (0..n_cond).map(|i| condition.requested(i)).collect(),
                    condition_axis: Vec::with_capacity(n_cond),
                    rmse_mean: Vec::with_capacity(n_cond),
                    rmse_std: Vec::with_capacity(n_cond),
                    repetitions: Vec::with_capacity(n_cond),
                    dropped: Vec::with_capacity(n_cond),
                    samples: Vec::with_capacity(n_cond),
                    seed: self.seed,
                };
                for (i, reps) in outcomes.iter().enumerate() {
                    let samples: Vec<Option<f64>> = reps.iter().map(|(_, v)| v[k]).collect();
                    let ok: Vec<f64> = samples.iter().flatten().copied().collect();
                    let (mean, std) = mean_std(&ok);
                    let axis = match condition {
                        Condition::KeepProbability(_) => {
                            let counts: Vec<f64> = reps
                                .iter()
                                .filter_map(|(n, _)| n.map(|n| n as f64))
                                .collect();
                            mean_std(&counts).0
                        }
                        _ => condition.requested(i),
                    };
                    report.condition_axis.push(axis);
                    report.rmse_mean.push(mean);
                    report.rmse_std.push(std);
                    report.repetitions.push(ok.len());
                    report.dropped.push(samples.len() - ok.len());
                    report.samples.push(samples);
                }
                report
            })
            .collect();
        Ok(reports)
    }

    fn repetition(
        &self,
        condition: &Condition,
        i: usize,
        r: usize,
        references: &[(ReferenceKind, Vec<f64>)],
    ) -> (Option<usize>, Vec<Option<f64>>) {
        let seed = self.seed.wrapping_add(r as u64);
        let degraded = match condition.degrade(self.data, i, seed) {
            Ok(m) => m,
            Err(_) => return (None, vec![None; self.methods.len()]),
        };
        let rmses = self
            .methods
            .iter()
            .zip(references)
            .map(|(&method, (_, reference))| {
                recover(&degraded, method, &self.solver)
                    .and_then(|x| rmse(&x, reference))
                    .ok()
            })
            .collect();
        (Some(degraded.present_count()), rmses)
    }
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// RMSE against each method's benchmark as the number of subjects grows.
pub fn run_convergence(
    m: &ScoreMatrix,
    methods: &[MethodId],
    subject_counts: &[usize],
    reps: usize,
    seed: u64,
    cfg: &SolverConfig,
) -> Result<Vec<ExperimentReport>> {
    Experiment::new(m, methods)
        .reps(reps)
        .seed(seed)
        .solver(*cfg)
        .run(&Condition::SubjectCount(subject_counts.to_vec()))
}

/// RMSE as a function of the number of scrambled subjects.
pub fn run_subject_corruption(
    m: &ScoreMatrix,
    methods: &[MethodId],
    corrupt_counts: &[usize],
    reps: usize,
    seed: u64,
    cfg: &SolverConfig,
) -> Result<Vec<ExperimentReport>> {
    Experiment::new(m, methods)
        .reps(reps)
        .seed(seed)
        .solver(*cfg)
        .run(&Condition::CorruptedSubjects(corrupt_counts.to_vec()))
}

/// RMSE as a function of the random score replacement probability.
pub fn run_random_corruption(
    m: &ScoreMatrix,
    methods: &[MethodId],
    probs: &[f64],
    reps: usize,
    seed: u64,
    cfg: &SolverConfig,
) -> Result<Vec<ExperimentReport>> {
    Experiment::new(m, methods)
        .reps(reps)
        .seed(seed)
        .solver(*cfg)
        .run(&Condition::RandomCorruption(probs.to_vec()))
}

/// RMSE as a function of the per-score keep probability.
pub fn run_selective_sampling(
    m: &ScoreMatrix,
    methods: &[MethodId],
    keep_probs: &[f64],
    reps: usize,
    seed: u64,
    cfg: &SolverConfig,
) -> Result<Vec<ExperimentReport>> {
    Experiment::new(m, methods)
        .reps(reps)
        .seed(seed)
        .solver(*cfg)
        .run(&Condition::KeepProbability(keep_probs.to_vec()))
}
