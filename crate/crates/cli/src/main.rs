//! `subjective`: recover quality scores from raw opinion scores, screen
//! subjects, synthesize and degrade datasets, and run RMSE experiments.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use subjective_core::harness::{self, Condition, Experiment};
use subjective_core::io::{self, RejectionFile, ResultFile};
use subjective_core::synth::{self, GeneratorSpec, ParamRanges};
use subjective_core::{baselines, solve, Error, Gauge, MethodId, ScoreMatrix, SolverConfig};

#[derive(Parser)]
#[command(name = "subjective", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Recover per-video quality scores with one method.
    Recover(RecoverArgs),
    /// Screen subjects with the BT.500 outlier test.
    Reject {
        dataset: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sample a dataset from the generative model.
    Synth(SynthArgs),
    /// Degrade a dataset by scrambling subjects or replacing scores.
    Corrupt(CorruptArgs),
    /// Run a repeated RMSE experiment and write plot data.
    Experiment(ExperimentArgs),
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
    #[arg(long, default_value_t = 1e-9)]
    stop_threshold: f64,
    #[arg(long, default_value_t = 10_000)]
    max_iter: usize,
    #[arg(long, value_enum, default_value_t = GaugeArg::ZeroMeanBias)]
    gauge: GaugeArg,
}

impl SolverArgs {
    fn config(&self) -> SolverConfig {
        SolverConfig {
            alpha: self.alpha,
            stop_threshold: self.stop_threshold,
            max_iterations: self.max_iter,
            gauge: match self.gauge {
                GaugeArg::ZeroMeanBias => Gauge::ZeroMeanBias,
                GaugeArg::FixFirstVideo => Gauge::FixFirstVideoToMos,
                GaugeArg::None => Gauge::None,
            },
            ..SolverConfig::default()
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum GaugeArg {
    ZeroMeanBias,
    FixFirstVideo,
    None,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Mos,
    SrMos,
    ZsSrMos,
    Mle,
}

impl From<MethodArg> for MethodId {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Mos => MethodId::Mos,
            MethodArg::SrMos => MethodId::SrMos,
            MethodArg::ZsSrMos => MethodId::ZsSrMos,
            MethodArg::Mle => MethodId::Mle,
        }
    }
}

#[derive(Args)]
struct RecoverArgs {
    dataset: PathBuf,
    #[arg(long, value_enum)]
    method: MethodArg,
    #[command(flatten)]
    solver: SolverArgs,
    /// Exit with status 4 if the solver hits the iteration cap.
    #[arg(long)]
    require_convergence: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    subjects: usize,
    #[arg(long)]
    videos: usize,
    #[arg(long)]
    contents: usize,
    #[arg(long)]
    seed: u64,
    /// Ground-truth parameters (JSON); drawn at random when absent.
    #[arg(long)]
    params: Option<PathBuf>,
    /// Also write the ground-truth parameters used.
    #[arg(long)]
    params_out: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum CorruptMode {
    Subjects,
    Random,
}

#[derive(Args)]
struct CorruptArgs {
    dataset: PathBuf,
    #[arg(long, value_enum)]
    mode: CorruptMode,
    /// Number of subjects to scramble (`--mode subjects`).
    #[arg(long, required_if_eq("mode", "subjects"), conflicts_with = "prob")]
    count: Option<usize>,
    /// Replacement probability (`--mode random`).
    #[arg(long, required_if_eq("mode", "random"))]
    prob: Option<f64>,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Convergence,
    SubjectCorruption,
    RandomCorruption,
    SelectiveSampling,
}

#[derive(Args)]
struct ExperimentArgs {
    dataset: PathBuf,
    #[arg(long, value_enum)]
    kind: Kind,
    #[arg(
        long,
        value_enum,
        value_delimiter = ',',
        default_value = "mos,sr-mos,zs-sr-mos,mle"
    )]
    methods: Vec<MethodArg>,
    #[arg(long, default_value_t = 100)]
    reps: usize,
    #[arg(long)]
    seed: u64,
    /// Condition values: subject counts, or probabilities for the
    /// corruption and sampling kinds. Defaults depend on the kind.
    #[arg(long, value_delimiter = ',')]
    conditions: Option<Vec<f64>>,
    /// Ground-truth parameters (JSON); score-unit methods are then measured
    /// against the true qualities instead of their own benchmark.
    #[arg(long)]
    truth: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long)]
    out: PathBuf,
}

enum Failure {
    Core(Error),
    Usage(String),
    NotConverged { iterations: usize, delta_x: f64 },
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Core(e) if e.is_numerical() => 3,
            Failure::Core(_) | Failure::Usage(_) => 2,
            Failure::NotConverged { .. } => 4,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            match &failure {
                Failure::Core(e) => eprintln!("error: {e}"),
                Failure::Usage(msg) => eprintln!("error: {msg}"),
                Failure::NotConverged {
                    iterations,
                    delta_x,
                } => eprintln!(
                    "error: solver did not converge after {iterations} iterations (last step {delta_x:e})"
                ),
            }
            ExitCode::from(failure.exit_code())
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Recover(args) => recover(args),
        Command::Reject { dataset, out } => {
            let m = io::load_dataset(&dataset)?;
            let r = baselines::subject_rejection(&m);
            io::save_rejection(&RejectionFile::new(&m, &r), &out)?;
            Ok(())
        }
        Command::Synth(args) => synthesize(args),
        Command::Corrupt(args) => corrupt(args),
        Command::Experiment(args) => experiment(args),
    }
}

fn recover(args: RecoverArgs) -> Result<(), Failure> {
    let m = io::load_dataset(&args.dataset)?;
    let method = MethodId::from(args.method);
    let result = match method {
        MethodId::Mle => {
            let cfg = args.solver.config();
            let est = solve(&m, &cfg)?;
            let file = ResultFile::from_estimates(&m, &est, &cfg);
            if args.require_convergence && !est.converged {
                io::save_results(&file, &args.out)?;
                return Err(Failure::NotConverged {
                    iterations: est.iterations_used,
                    delta_x: est.final_delta_x,
                });
            }
            file
        }
        MethodId::Mos => ResultFile::from_baseline(&m, method, &baselines::mos(&m)),
        MethodId::SrMos => ResultFile::from_baseline(&m, method, &baselines::sr_mos(&m)?),
        MethodId::ZsSrMos => ResultFile::from_baseline(&m, method, &baselines::zs_sr_mos(&m)?),
    };
    io::save_results(&result, &args.out)?;
    Ok(())
}

fn synthesize(args: SynthArgs) -> Result<(), Failure> {
    let truth = match &args.params {
        Some(path) => {
            let p = io::load_params(path)?;
            let shape = (p.x.len(), p.b.len(), p.a.len());
            if shape != (args.videos, args.subjects, args.contents) {
                return Err(Failure::Usage(format!(
                    "{} holds {} videos, {} subjects and {} contents, but {}, {} and {} were requested",
                    path.display(),
                    shape.0,
                    shape.1,
                    shape.2,
                    args.videos,
                    args.subjects,
                    args.contents
                )));
            }
            p
        }
        None => synth::draw_params(
            args.videos,
            args.subjects,
            args.contents,
            &ParamRanges::default(),
            args.seed,
        ),
    };
    let m = synth::generate(&GeneratorSpec::new(truth.clone(), args.seed))?;
    io::save_dataset(&m, &args.out)?;
    if let Some(path) = &args.params_out {
        io::save_params(&truth, path)?;
    }
    Ok(())
}

fn corrupt(args: CorruptArgs) -> Result<(), Failure> {
    let m = io::load_dataset(&args.dataset)?;
    let out = match (args.mode, args.count, args.prob) {
        (CorruptMode::Subjects, Some(count), _) => {
            let chosen = synth::choose_subjects(m.subjects(), count, args.seed)?;
            synth::corrupt_subjects(&m, &chosen, args.seed)?
        }
        (CorruptMode::Random, _, Some(prob)) => synth::corrupt_random(&m, prob, args.seed)?,
        (CorruptMode::Subjects, None, _) => {
            return Err(Failure::Usage("--mode subjects needs --count".into()))
        }
        (CorruptMode::Random, _, None) => {
            return Err(Failure::Usage("--mode random needs --prob".into()))
        }
    };
    io::save_dataset(&out, &args.out)?;
    Ok(())
}

fn default_conditions(kind: Kind, m: &ScoreMatrix) -> Vec<f64> {
    let subjects = m.subjects();
    match kind {
        Kind::Convergence => {
            let mut counts: Vec<f64> = (1..=8)
                .map(|k| (k * subjects).div_ceil(8).max(1) as f64)
                .collect();
            counts.dedup();
            counts
        }
        Kind::SubjectCorruption => (0..=subjects.min(10)).map(|n| n as f64).collect(),
        Kind::RandomCorruption => (0..=5).map(|k| k as f64 / 10.0).collect(),
        Kind::SelectiveSampling => (3..=10).rev().map(|k| k as f64 / 10.0).collect(),
    }
}

fn counts(values: &[f64]) -> Result<Vec<usize>, Failure> {
    values
        .iter()
        .map(|&v| {
            if v >= 0.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                Err(Failure::Usage(format!("condition {v} is not a count")))
            }
        })
        .collect()
}

fn experiment(args: ExperimentArgs) -> Result<(), Failure> {
    let m = io::load_dataset(&args.dataset)?;
    let values = args
        .conditions
        .clone()
        .unwrap_or_else(|| default_conditions(args.kind, &m));
    let condition = match args.kind {
        Kind::Convergence => Condition::SubjectCount(counts(&values)?),
        Kind::SubjectCorruption => Condition::CorruptedSubjects(counts(&values)?),
        Kind::RandomCorruption => Condition::RandomCorruption(values),
        Kind::SelectiveSampling => Condition::KeepProbability(values),
    };
    let methods: Vec<MethodId> = args.methods.iter().map(|&m| m.into()).collect();
    let mut exp = Experiment::new(&m, &methods)
        .reps(args.reps)
        .seed(args.seed)
        .solver(args.solver.config());
    if let Some(path) = &args.truth {
        exp = exp.ground_truth(io::load_params(path)?.x);
    }
    let reports: Vec<harness::ExperimentReport> = exp.run(&condition)?;
    io::export_plot_data(&reports, &args.out)?;
    Ok(())
}
