//! `levgen` - train populations of tile-level generators under multiple
//! objectives, sample levels from checkpoints, and compute quality
//! indicators over finished runs.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use levgen_core::experiment::{
    indicators_report, report_text, run_experiment, sample_from_checkpoint, ExperimentConfig,
};
use levgen_core::level::{parse_level, TileVocabulary};
use levgen_core::metrics::ObjectiveMode;
use levgen_core::sim::{render_with_trace, simulate, trace_csv};

#[derive(Parser)]
#[command(name = "levgen", version, about, long_about = None)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the training experiment (all trials of one objective mode).
    Train(TrainArgs),
    /// Decode levels from a checkpoint and render their playtraces.
    Sample(SampleArgs),
    /// Simulate a level text file and render the trace over it.
    Render(RenderArgs),
    /// Compute HV/CPF/knee reports over finished run directories.
    Indicators(IndicatorArgs),
    /// Print a plain-text summary of finished runs.
    Report(ReportArgs),
}

#[derive(Args)]
struct TrainArgs {
    /// Config file (`key = value` lines); flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Objective mode: P, P+PD, P+CD or P+PD+CD.
    #[arg(long)]
    mode: Option<String>,
    /// Directory of level text files to train on.
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Vocabulary mapping file (defaults to the built-in alphabet).
    #[arg(long)]
    vocab: Option<PathBuf>,
    /// Output directory; one `trial_NN` subdirectory per trial.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    trials: Option<usize>,
    /// Master seed; trial seeds derive from it.
    #[arg(long)]
    seed: Option<u64>,
    /// Use the desk-scale profile as the base configuration.
    #[arg(long)]
    desk: bool,
    #[arg(long)]
    lambda: Option<usize>,
    #[arg(long)]
    generations: Option<usize>,
    #[arg(long)]
    warm_epochs: Option<usize>,
    #[arg(long)]
    batch: Option<usize>,
    #[arg(long)]
    eval_samples: Option<usize>,
    #[arg(long)]
    z_dim: Option<usize>,
    #[arg(long)]
    pattern_k: Option<usize>,
    #[arg(long)]
    height: Option<usize>,
    #[arg(long)]
    width: Option<usize>,
    #[arg(long)]
    d_iters: Option<usize>,
    #[arg(long)]
    g_iters: Option<usize>,
    /// Comma separated hidden layer sizes, e.g. `256,256`.
    #[arg(long)]
    g_hidden: Option<String>,
    #[arg(long)]
    d_hidden: Option<String>,
    #[arg(long)]
    g_lr: Option<f64>,
    #[arg(long)]
    g_wd: Option<f64>,
    #[arg(long)]
    d_lr: Option<f64>,
    #[arg(long)]
    d_wd: Option<f64>,
    #[arg(long)]
    beta1: Option<f64>,
    #[arg(long)]
    beta2: Option<f64>,
    /// CPF coverage radius recorded with the run.
    #[arg(long)]
    theta: Option<f64>,
}

#[derive(Args)]
struct SampleArgs {
    /// Model checkpoint JSON.
    #[arg(long)]
    checkpoint: PathBuf,
    /// How many levels to decode.
    #[arg(long, default_value_t = 10)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    vocab: Option<PathBuf>,
}

#[derive(Args)]
struct RenderArgs {
    /// Level text file.
    level: PathBuf,
    #[arg(long)]
    vocab: Option<PathBuf>,
    /// Also write the trace as `step,x,y` CSV.
    #[arg(long)]
    trace_csv: Option<PathBuf>,
    /// Write the render here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct IndicatorArgs {
    /// Finished run directories (each holding objectives.csv).
    #[arg(required = true)]
    runs: Vec<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0.1)]
    theta: f64,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(required = true)]
    runs: Vec<PathBuf>,
}

fn load_vocab_arg(path: &Option<PathBuf>) -> Result<TileVocabulary> {
    match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .with_context(|| format!("reading vocabulary {}", p.display()))?;
            Ok(TileVocabulary::parse(&text)?)
        }
        None => Ok(TileVocabulary::default_alphabet()),
    }
}

fn train(args: TrainArgs) -> Result<()> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::load(path)
            .with_context(|| format!("loading config {}", path.display()))?,
        None if args.desk => ExperimentConfig::desk(),
        None => ExperimentConfig::default(),
    };
    if args.desk && args.config.is_some() {
        bail!("--desk belongs in the config file when --config is used (desk = true)");
    }
    if let Some(mode) = &args.mode {
        cfg.mode = ObjectiveMode::parse(mode)
            .with_context(|| format!("unknown mode {mode:?} (use P, P+PD, P+CD, P+PD+CD)"))?;
    }
    if let Some(v) = args.corpus {
        cfg.corpus_dir = v;
    }
    if let Some(v) = args.vocab {
        cfg.vocab_path = Some(v);
    }
    if let Some(v) = args.out {
        cfg.out_dir = v;
    }
    if let Some(v) = args.trials {
        cfg.trials = v;
    }
    if let Some(v) = args.seed {
        cfg.master_seed = v;
    }
    if let Some(v) = args.theta {
        cfg.theta = v;
    }
    let t = &mut cfg.train;
    macro_rules! set {
        ($field:ident) => {
            if let Some(v) = args.$field {
                t.$field = v;
            }
        };
    }
    set!(lambda);
    set!(generations);
    set!(warm_epochs);
    set!(batch);
    set!(eval_samples);
    set!(z_dim);
    set!(pattern_k);
    set!(height);
    set!(width);
    set!(d_iters);
    set!(g_iters);
    set!(g_lr);
    set!(g_wd);
    set!(d_lr);
    set!(d_wd);
    set!(beta1);
    set!(beta2);
    if let Some(dims) = &args.g_hidden {
        cfg.apply("g_hidden", dims)?;
    }
    if let Some(dims) = &args.d_hidden {
        cfg.apply("d_hidden", dims)?;
    }

    print!("{}", cfg.echo());
    println!("---");
    let artifacts = run_experiment(&cfg)?;
    for dir in &artifacts.trial_dirs {
        println!("trial finished: {}", dir.display());
    }
    Ok(())
}

fn sample(args: SampleArgs) -> Result<()> {
    let vocab = load_vocab_arg(&args.vocab)?;
    let written =
        sample_from_checkpoint(&args.checkpoint, &vocab, args.count, args.seed, &args.out)?;
    println!("wrote {} files to {}", written.len(), args.out.display());
    Ok(())
}

fn render(args: RenderArgs) -> Result<()> {
    let vocab = load_vocab_arg(&args.vocab)?;
    let text = std::fs::read_to_string(&args.level)
        .with_context(|| format!("reading level {}", args.level.display()))?;
    let level = parse_level(&text, &vocab)?;
    let result = simulate(&level, &vocab);
    let render = render_with_trace(&level, &vocab, &result.trace);
    if let Some(path) = &args.trace_csv {
        std::fs::write(path, trace_csv(&result.trace))
            .with_context(|| format!("writing {}", path.display()))?;
    }
    match &args.out {
        Some(path) => std::fs::write(path, render)
            .with_context(|| format!("writing {}", path.display()))?,
        None => {
            println!("{render}");
            println!(
                "completed: {}  progress: {}/{}",
                result.completed,
                result.progress,
                level.width() - 1
            );
        }
    }
    Ok(())
}

fn indicators(args: IndicatorArgs) -> Result<()> {
    let report = indicators_report(&args.runs, &args.out, args.theta)?;
    println!(
        "pseudo front: {} points from {} runs",
        report.reference.points.len(),
        report.per_run.len()
    );
    for (mode, (hv, _)) in &report.means {
        if let Some(last) = hv.last() {
            println!("mean final HV {mode}: {last:.4}");
        }
    }
    println!("reports written to {}", args.out.display());
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::Train(args) => train(args),
        Command::Sample(args) => sample(args),
        Command::Render(args) => render(args),
        Command::Indicators(args) => indicators(args),
        Command::Report(args) => {
            let text = report_text(&args.runs)?;
            print!("{text}");
            Ok(())
        }
    }
}
