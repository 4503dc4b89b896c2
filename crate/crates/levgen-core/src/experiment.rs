//! Experiment orchestration: configuration, the training loop, artifact
//! persistence, and the indicator/report pipelines behind the CLI.
//!
//! A run directory (one trial) contains:
//!
//! * `config.txt`      - the effective configuration, round-trip parseable;
//! * `objectives.csv`  - one row per population member per generation
//!                       (generation 0 is the warm-started population);
//! * `checkpoints/`    - JSON model files for the final population;
//! * `manifest.json`   - the final Pareto set with objective values and
//!                       evaluation seeds, referencing the checkpoints;
//! * `samples/`        - level text files and trace renders for each
//!                       manifest member.
//!
//! Everything downstream (`indicators`, `report`) is derived from these
//! files alone, so runs can be analyzed long after they finished.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gan::{
    eval_seed_for, evaluate_generator, refresh_discriminator, sample_levels, variation,
    warm_start, EncodedCorpus, GanError, Lineage, PopulationMember, TrainConfig,
};
use crate::indicators::{
    build_pseudo_pf, cpf, hv_history, normalize, IndicatorError, ReferenceFront,
};
use crate::level::{parse_level, serialize_level, Level, LevelError, TileVocabulary};
use crate::metrics::{Evaluation, ObjectiveMode};
use crate::moea::{knee_point, nondominated_sort, sde_survival_select, MoeaError, SelectionCandidate};
use crate::neural::{Checkpoint, NeuralError};
use crate::rng;
use crate::sim::{render_with_trace, simulate, trace_csv};

pub const NADIR: [f64; 3] = [1.1, 1.1, 1.1];
const ARTIFACT_SAMPLES: usize = 2;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("config: {0}")]
    Config(String),
    #[error("io on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Gan(#[from] GanError),
    #[error(transparent)]
    Level(#[from] LevelError),
    #[error(transparent)]
    Neural(#[from] NeuralError),
    #[error(transparent)]
    Indicator(#[from] IndicatorError),
    #[error(transparent)]
    Moea(#[from] MoeaError),
    #[error("member {member} produced a non-finite objective; diagnostics at {dump}")]
    NonFiniteObjective { member: u64, dump: PathBuf },
    #[error("missing run log {0}")]
    MissingLogs(PathBuf),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ExperimentError + '_ {
    move |source| ExperimentError::Io { path: path.to_path_buf(), source }
}

/// Everything a `train` invocation needs. `trials` independent trials run
/// with per-trial seeds derived from the master seed, so trial `i` of two
/// modes shares its stream of training data.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub train: TrainConfig,
    pub corpus_dir: PathBuf,
    /// Vocabulary mapping file; `None` uses the built-in alphabet.
    pub vocab_path: Option<PathBuf>,
    pub mode: ObjectiveMode,
    pub trials: usize,
    pub master_seed: u64,
    pub out_dir: PathBuf,
    /// CPF coverage radius.
    pub theta: f64,
    pub desk: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            train: TrainConfig::default(),
            corpus_dir: PathBuf::from("data/corpus"),
            vocab_path: None,
            mode: ObjectiveMode::PPdCd,
            trials: 1,
            master_seed: 42,
            out_dir: PathBuf::from("runs/out"),
            theta: 0.1,
            desk: false,
        }
    }
}

impl ExperimentConfig {
    /// Desk-scale starting point: small population, short run, bundled
    /// corpus defaults.
    pub fn desk() -> Self {
        Self { train: TrainConfig::desk_profile(), desk: true, ..Self::default() }
    }

    /// Parses the flat `key = value` format. Unknown keys are errors.
    /// A `desk = true` line swaps in the desk profile before any other
    /// training key is applied, regardless of where it appears.
    pub fn parse(text: &str) -> Result<Self, ExperimentError> {
        let mut pairs = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ExperimentError::Config(format!(
                    "line {}: expected `key = value`, got {line:?}",
                    lineno + 1
                )));
            };
            pairs.push((key.trim().to_string(), value.trim().to_string()));
        }
        let desk = pairs
            .iter()
            .find(|(k, _)| k == "desk")
            .map(|(_, v)| parse_bool(v))
            .transpose()?
            .unwrap_or(false);
        let mut cfg = if desk { Self::desk() } else { Self::default() };
        for (key, value) in pairs {
            cfg.apply(&key, &value)?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ExperimentError> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        Self::parse(&text)
    }

    /// Applies one `key = value` override.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<(), ExperimentError> {
        let bad = |what: &str| {
            ExperimentError::Config(format!("invalid value {value:?} for key {what}"))
        };
        match key {
            "mode" => {
                self.mode = ObjectiveMode::parse(value).ok_or_else(|| {
                    ExperimentError::Config(format!(
                        "mode must be one of P, P+PD, P+CD, P+PD+CD; got {value:?}"
                    ))
                })?;
            }
            "corpus" => self.corpus_dir = PathBuf::from(value),
            "vocab" => {
                self.vocab_path =
                    if value.is_empty() { None } else { Some(PathBuf::from(value)) }
            }
            "out" => self.out_dir = PathBuf::from(value),
            "trials" => self.trials = value.parse().map_err(|_| bad("trials"))?,
            "seed" => self.master_seed = value.parse().map_err(|_| bad("seed"))?,
            "theta" => self.theta = value.parse().map_err(|_| bad("theta"))?,
            "desk" => self.desk = parse_bool(value)?,
            "lambda" => self.train.lambda = value.parse().map_err(|_| bad("lambda"))?,
            "generations" => {
                self.train.generations = value.parse().map_err(|_| bad("generations"))?
            }
            "warm_epochs" => {
                self.train.warm_epochs = value.parse().map_err(|_| bad("warm_epochs"))?
            }
            "d_iters" => self.train.d_iters = value.parse().map_err(|_| bad("d_iters"))?,
            "g_iters" => self.train.g_iters = value.parse().map_err(|_| bad("g_iters"))?,
            "batch" => self.train.batch = value.parse().map_err(|_| bad("batch"))?,
            "eval_samples" => {
                self.train.eval_samples = value.parse().map_err(|_| bad("eval_samples"))?
            }
            "z_dim" => self.train.z_dim = value.parse().map_err(|_| bad("z_dim"))?,
            "pattern_k" => self.train.pattern_k = value.parse().map_err(|_| bad("pattern_k"))?,
            "height" => self.train.height = value.parse().map_err(|_| bad("height"))?,
            "width" => self.train.width = value.parse().map_err(|_| bad("width"))?,
            "g_hidden" => self.train.g_hidden = parse_dims(value).ok_or_else(|| bad("g_hidden"))?,
            "d_hidden" => self.train.d_hidden = parse_dims(value).ok_or_else(|| bad("d_hidden"))?,
            "g_lr" => self.train.g_lr = value.parse().map_err(|_| bad("g_lr"))?,
            "g_wd" => self.train.g_wd = value.parse().map_err(|_| bad("g_wd"))?,
            "d_lr" => self.train.d_lr = value.parse().map_err(|_| bad("d_lr"))?,
            "d_wd" => self.train.d_wd = value.parse().map_err(|_| bad("d_wd"))?,
            "beta1" => self.train.beta1 = value.parse().map_err(|_| bad("beta1"))?,
            "beta2" => self.train.beta2 = value.parse().map_err(|_| bad("beta2"))?,
            other => {
                return Err(ExperimentError::Config(format!("unknown config key {other:?}")))
            }
        }
        Ok(())
    }

    /// Effective configuration in the same format [`parse`](Self::parse)
    /// reads; this is what run directories store.
    pub fn echo(&self) -> String {
        let t = &self.train;
        let mut s = String::new();
        let _ = writeln!(s, "mode = {}", self.mode);
        let _ = writeln!(s, "corpus = {}", self.corpus_dir.display());
        let _ = writeln!(
            s,
            "vocab = {}",
            self.vocab_path.as_ref().map(|p| p.display().to_string()).unwrap_or_default()
        );
        let _ = writeln!(s, "out = {}", self.out_dir.display());
        let _ = writeln!(s, "trials = {}", self.trials);
        let _ = writeln!(s, "seed = {}", self.master_seed);
        let _ = writeln!(s, "theta = {}", self.theta);
        let _ = writeln!(s, "desk = {}", self.desk);
        let _ = writeln!(s, "lambda = {}", t.lambda);
        let _ = writeln!(s, "generations = {}", t.generations);
        let _ = writeln!(s, "warm_epochs = {}", t.warm_epochs);
        let _ = writeln!(s, "d_iters = {}", t.d_iters);
        let _ = writeln!(s, "g_iters = {}", t.g_iters);
        let _ = writeln!(s, "batch = {}", t.batch);
        let _ = writeln!(s, "eval_samples = {}", t.eval_samples);
        let _ = writeln!(s, "z_dim = {}", t.z_dim);
        let _ = writeln!(s, "pattern_k = {}", t.pattern_k);
        let _ = writeln!(s, "height = {}", t.height);
        let _ = writeln!(s, "width = {}", t.width);
        let _ = writeln!(s, "g_hidden = {}", join_dims(&t.g_hidden));
        let _ = writeln!(s, "d_hidden = {}", join_dims(&t.d_hidden));
        let _ = writeln!(s, "g_lr = {}", t.g_lr);
        let _ = writeln!(s, "g_wd = {}", t.g_wd);
        let _ = writeln!(s, "d_lr = {}", t.d_lr);
        let _ = writeln!(s, "d_wd = {}", t.d_wd);
        let _ = writeln!(s, "beta1 = {}", t.beta1);
        let _ = writeln!(s, "beta2 = {}", t.beta2);
        s
    }
}

fn parse_bool(v: &str) -> Result<bool, ExperimentError> {
    match v {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(ExperimentError::Config(format!("expected a boolean, got {v:?}"))),
    }
}

fn parse_dims(v: &str) -> Option<Vec<usize>> {
    let dims: Result<Vec<usize>, _> = v.split(',').map(|p| p.trim().parse()).collect();
    dims.ok().filter(|d: &Vec<usize>| !d.is_empty())
}

fn join_dims(dims: &[usize]) -> String {
    dims.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(",")
}

/// Loads the vocabulary named by the config, or the default alphabet.
pub fn load_vocab(cfg: &ExperimentConfig) -> Result<TileVocabulary, ExperimentError> {
    match &cfg.vocab_path {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(io_err(path))?;
            Ok(TileVocabulary::parse(&text)?)
        }
        None => Ok(TileVocabulary::default_alphabet()),
    }
}

/// Reads every `*.txt` in the corpus directory, sorted by file name.
pub fn load_corpus(
    dir: &Path,
    vocab: &TileVocabulary,
) -> Result<Vec<Level>, ExperimentError> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(io_err(dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "txt"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(ExperimentError::Config(format!(
            "no .txt level files in {}",
            dir.display()
        )));
    }
    paths
        .iter()
        .map(|p| {
            let text = fs::read_to_string(p).map_err(io_err(p))?;
            parse_level(&text, vocab).map_err(|e| {
                ExperimentError::Config(format!("{}: {e}", p.display()))
            })
        })
        .collect()
}

/// Final Pareto set of one trial, as persisted in `manifest.json`.
#[derive(Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub mode: String,
    pub trial_index: usize,
    pub trial_seed: u64,
    pub master_seed: u64,
    pub entries: Vec<ManifestEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: u64,
    pub lineage: String,
    pub born: usize,
    pub checkpoint: String,
    pub eval_seed: u64,
    pub f_p: f64,
    pub f_pd: f64,
    pub f_cd: f64,
    pub raw_p: f64,
    pub raw_pd: f64,
    pub raw_cd: f64,
}

/// In-memory record of one finished trial.
pub struct TrialSummary {
    pub trial_index: usize,
    pub mode: ObjectiveMode,
    pub dir: PathBuf,
    /// Objective triples of the population at each generation `0..=T`.
    pub per_generation: Vec<Vec<[f64; 3]>>,
}

pub struct RunArtifacts {
    pub trial_dirs: Vec<PathBuf>,
    pub summaries: Vec<TrialSummary>,
}

fn csv_row(generation: usize, m: &PopulationMember) -> String {
    let e = m.evaluation();
    format!(
        "{},{},{},{},{},{},{},{},{}\n",
        generation,
        m.id,
        m.lineage,
        e.vector.f_p,
        e.vector.f_pd,
        e.vector.f_cd,
        e.raw_p,
        e.raw_pd,
        e.raw_cd
    )
}

fn evaluate_members(
    members: &mut [PopulationMember],
    vocab: &TileVocabulary,
    train: &TrainConfig,
    trial_seed: u64,
) -> Result<(), GanError> {
    let evals: Result<Vec<Evaluation>, GanError> = members
        .par_iter()
        .map(|m| evaluate_generator(&m.generator, vocab, train, eval_seed_for(trial_seed, m.id)))
        .collect();
    for (m, e) in members.iter_mut().zip(evals?) {
        m.eval = Some(e);
    }
    Ok(())
}

fn check_finite(
    members: &[PopulationMember],
    dir: &Path,
) -> Result<(), ExperimentError> {
    for m in members {
        let e = m.evaluation();
        if !e.vector.is_finite() || !e.raw_p.is_finite() || !e.raw_pd.is_finite() || !e.raw_cd.is_finite()
        {
            let dump = dir.join("diagnostic.txt");
            let text = format!(
                "non-finite objective\nmember = {}\nlineage = {}\nborn = {}\nraw = ({}, {}, {})\nvector = ({}, {}, {})\n",
                m.id, m.lineage, m.born, e.raw_p, e.raw_pd, e.raw_cd,
                e.vector.f_p, e.vector.f_pd, e.vector.f_cd
            );
            fs::write(&dump, text).map_err(io_err(&dump))?;
            return Err(ExperimentError::NonFiniteObjective { member: m.id, dump });
        }
    }
    Ok(())
}

/// Runs one trial end to end and writes its artifacts.
pub fn run_trial(
    cfg: &ExperimentConfig,
    vocab: &TileVocabulary,
    corpus: &EncodedCorpus,
    trial_index: usize,
) -> Result<TrialSummary, ExperimentError> {
    let dir = cfg.out_dir.join(format!("trial_{trial_index:02}"));
    fs::create_dir_all(dir.join("checkpoints")).map_err(io_err(&dir))?;
    fs::create_dir_all(dir.join("samples")).map_err(io_err(&dir))?;
    let config_path = dir.join("config.txt");
    fs::write(&config_path, cfg.echo()).map_err(io_err(&config_path))?;

    let trial_seed = rng::derive_seed(cfg.master_seed, &[rng::TAG_TRIAL, trial_index as u64]);
    let train = &cfg.train;

    let mut warm_rng = rng::stream(trial_seed, &[rng::TAG_WARM]);
    let (generators, mut d) = warm_start(corpus, train, vocab.len(), &mut warm_rng)?;

    let mut members: Vec<PopulationMember> = generators
        .into_iter()
        .enumerate()
        .map(|(i, generator)| PopulationMember {
            id: i as u64,
            lineage: Lineage::Init,
            born: 0,
            generator,
            eval: None,
        })
        .collect();
    let mut next_id = members.len() as u64;
    evaluate_members(&mut members, vocab, train, trial_seed)?;
    check_finite(&members, &dir)?;

    let mut csv = String::from("generation,member_id,lineage,f_P,f_PD,f_CD,P,PD,CD\n");
    for m in &members {
        csv.push_str(&csv_row(0, m));
    }
    let mut per_generation =
        vec![members.iter().map(|m| m.evaluation().vector.as_array()).collect::<Vec<_>>()];

    for t in 1..=train.generations {
        let mut dref_rng = rng::stream(trial_seed, &[rng::TAG_DREF, t as u64]);
        refresh_discriminator(&mut d, corpus, &members, train, &mut dref_rng)?;

        let mut offspring = variation(&members, &d.params, train, trial_seed, t, &mut next_id)?;
        evaluate_members(&mut offspring, vocab, train, trial_seed)?;
        check_finite(&offspring, &dir)?;

        let mut pool = members;
        pool.extend(offspring);
        let candidates: Vec<SelectionCandidate> = pool
            .iter()
            .map(|m| SelectionCandidate { objectives: m.evaluation().vector, born: m.born })
            .collect();
        let chosen = sde_survival_select(&candidates, train.lambda, cfg.mode)?;
        let mut keep = vec![false; pool.len()];
        for &i in &chosen {
            keep[i] = true;
        }
        members = pool
            .into_iter()
            .zip(keep)
            .filter_map(|(m, k)| k.then_some(m))
            .collect();

        for m in &members {
            csv.push_str(&csv_row(t, m));
        }
        per_generation.push(members.iter().map(|m| m.evaluation().vector.as_array()).collect());
    }

    let csv_path = dir.join("objectives.csv");
    fs::write(&csv_path, csv).map_err(io_err(&csv_path))?;

    // checkpoints for every survivor; manifest lists the final Pareto set
    for m in &members {
        let path = dir.join("checkpoints").join(format!("member_{:06}.json", m.id));
        let note = format!("eval_seed={}", eval_seed_for(trial_seed, m.id));
        Checkpoint::from_params(&m.generator, train.height, train.width, vocab.len(), note)
            .save(&path)?;
    }

    let final_objs: Vec<_> = members.iter().map(|m| m.evaluation().vector).collect();
    let front0 = nondominated_sort(&final_objs, cfg.mode).remove(0);
    let entries: Vec<ManifestEntry> = front0
        .iter()
        .map(|&i| {
            let m = &members[i];
            let e = m.evaluation();
            ManifestEntry {
                id: m.id,
                lineage: m.lineage.to_string(),
                born: m.born,
                checkpoint: format!("checkpoints/member_{:06}.json", m.id),
                eval_seed: eval_seed_for(trial_seed, m.id),
                f_p: e.vector.f_p,
                f_pd: e.vector.f_pd,
                f_cd: e.vector.f_cd,
                raw_p: e.raw_p,
                raw_pd: e.raw_pd,
                raw_cd: e.raw_cd,
            }
        })
        .collect();
    let manifest = Manifest {
        mode: cfg.mode.to_string(),
        trial_index,
        trial_seed,
        master_seed: cfg.master_seed,
        entries,
    };
    let manifest_path = dir.join("manifest.json");
    fs::write(&manifest_path, serde_json::to_string_pretty(&manifest)?)
        .map_err(io_err(&manifest_path))?;

    // a few sampled levels with trace renders per Pareto member
    for &i in &front0 {
        let m = &members[i];
        let sample_seed = rng::derive_seed(trial_seed, &[rng::TAG_SAMPLE, m.id]);
        let levels = sample_levels(&m.generator, vocab, train, sample_seed, ARTIFACT_SAMPLES)?;
        for (s, level) in levels.iter().enumerate() {
            write_level_artifacts(
                &dir.join("samples"),
                &format!("member_{:06}_level_{s}", m.id),
                level,
                vocab,
            )?;
        }
    }

    Ok(TrialSummary { trial_index, mode: cfg.mode, dir, per_generation })
}

fn write_level_artifacts(
    dir: &Path,
    stem: &str,
    level: &Level,
    vocab: &TileVocabulary,
) -> Result<(), ExperimentError> {
    let text = serialize_level(level, vocab)?;
    let result = simulate(level, vocab);
    let path = dir.join(format!("{stem}.txt"));
    fs::write(&path, &text).map_err(io_err(&path))?;
    let path = dir.join(format!("{stem}.trace.csv"));
    fs::write(&path, trace_csv(&result.trace)).map_err(io_err(&path))?;
    let path = dir.join(format!("{stem}.render.txt"));
    fs::write(&path, render_with_trace(level, vocab, &result.trace)).map_err(io_err(&path))?;
    Ok(())
}

/// Runs all configured trials.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunArtifacts, ExperimentError> {
    let vocab = load_vocab(cfg)?;
    let levels = load_corpus(&cfg.corpus_dir, &vocab)?;
    let corpus = EncodedCorpus::encode(&levels, &vocab, &cfg.train)?;
    fs::create_dir_all(&cfg.out_dir).map_err(io_err(&cfg.out_dir))?;

    let mut summaries = Vec::new();
    for trial in 0..cfg.trials {
        summaries.push(run_trial(cfg, &vocab, &corpus, trial)?);
    }
    Ok(RunArtifacts {
        trial_dirs: summaries.iter().map(|s| s.dir.clone()).collect(),
        summaries,
    })
}

/// Loaded view of a finished trial directory.
pub struct RunLog {
    pub dir: PathBuf,
    pub mode: ObjectiveMode,
    pub trial_label: String,
    pub per_generation: Vec<Vec<[f64; 3]>>,
}

/// Reads `objectives.csv` and `manifest.json` back from a run directory.
pub fn load_run(dir: &Path) -> Result<RunLog, ExperimentError> {
    let csv_path = dir.join("objectives.csv");
    let text = fs::read_to_string(&csv_path)
        .map_err(|_| ExperimentError::MissingLogs(csv_path.clone()))?;
    let manifest_path = dir.join("manifest.json");
    let manifest: Manifest = serde_json::from_str(
        &fs::read_to_string(&manifest_path)
            .map_err(|_| ExperimentError::MissingLogs(manifest_path.clone()))?,
    )?;
    let mode = ObjectiveMode::parse(&manifest.mode)
        .ok_or_else(|| ExperimentError::Config(format!("bad mode in {}", manifest_path.display())))?;

    let mut per_generation: Vec<Vec<[f64; 3]>> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 || line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 9 {
            return Err(ExperimentError::Config(format!(
                "{}: row {i} has {} fields",
                csv_path.display(),
                fields.len()
            )));
        }
        let parse = |s: &str| {
            s.parse::<f64>().map_err(|_| {
                ExperimentError::Config(format!("{}: bad number {s:?}", csv_path.display()))
            })
        };
        let generation: usize = fields[0]
            .parse()
            .map_err(|_| ExperimentError::Config(format!("bad generation {:?}", fields[0])))?;
        if per_generation.len() <= generation {
            per_generation.resize(generation + 1, Vec::new());
        }
        per_generation[generation].push([parse(fields[3])?, parse(fields[4])?, parse(fields[5])?]);
    }
    Ok(RunLog {
        dir: dir.to_path_buf(),
        mode,
        trial_label: dir.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
        per_generation,
    })
}

/// Indicator pipeline output.
pub struct IndicatorReport {
    pub reference: ReferenceFront,
    /// `(trial_label, mode, hv_series, cpf_series)` per run.
    pub per_run: Vec<(String, ObjectiveMode, Vec<f64>, Vec<f64>)>,
    /// Mean HV/CPF per mode per generation.
    pub means: BTreeMap<String, (Vec<f64>, Vec<f64>)>,
    /// `(trial_label, mode, knee f_P/f_PD/f_CD)` per run.
    pub knees: Vec<(String, ObjectiveMode, [f64; 3])>,
}

/// Computes HV/CPF series and knee points for a set of finished runs on a
/// shared pseudo reference front, then writes the report CSVs and the mean
/// HV chart into `out_dir`.
pub fn indicators_report(
    run_dirs: &[PathBuf],
    out_dir: &Path,
    theta: f64,
) -> Result<IndicatorReport, ExperimentError> {
    let runs: Vec<RunLog> = run_dirs.iter().map(|d| load_run(d)).collect::<Result<_, _>>()?;
    if runs.is_empty() {
        return Err(ExperimentError::Config("no run directories given".into()));
    }

    let history: Vec<[f64; 3]> =
        runs.iter().flat_map(|r| r.per_generation.iter().flatten().copied()).collect();
    let reference = build_pseudo_pf(&history)?;

    let mut per_run = Vec::new();
    for run in &runs {
        let hv = hv_history(&run.per_generation, &reference.bounds, &NADIR)?;
        let cpf_series: Vec<f64> = run
            .per_generation
            .iter()
            .map(|pop| {
                let normalized: Vec<[f64; 3]> =
                    pop.iter().map(|&p| normalize(p, &reference.bounds)).collect();
                cpf(&normalized, &reference, theta)
            })
            .collect::<Result<_, _>>()?;
        per_run.push((run.trial_label.clone(), run.mode, hv, cpf_series));
    }

    // cross-trial means per mode and generation
    let mut means: BTreeMap<String, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for mode in ObjectiveMode::ALL {
        let series: Vec<&(String, ObjectiveMode, Vec<f64>, Vec<f64>)> =
            per_run.iter().filter(|(_, m, _, _)| *m == mode).collect();
        if series.is_empty() {
            continue;
        }
        let gens = series.iter().map(|(_, _, hv, _)| hv.len()).min().unwrap_or(0);
        let mut hv_mean = vec![0.0; gens];
        let mut cpf_mean = vec![0.0; gens];
        for (_, _, hv, cp) in &series {
            for g in 0..gens {
                hv_mean[g] += hv[g] / series.len() as f64;
                cpf_mean[g] += cp[g] / series.len() as f64;
            }
        }
        means.insert(mode.name().to_string(), (hv_mean, cpf_mean));
    }

    // knee point of each run's final front, in normalized 3-objective space
    let mut knees = Vec::new();
    for run in &runs {
        let Some(final_pop) = run.per_generation.last() else { continue };
        let normalized: Vec<Vec<f64>> = final_pop
            .iter()
            .map(|&p| normalize(p, &reference.bounds).to_vec())
            .filter(|p| p.iter().zip(&NADIR).all(|(x, n)| x <= n))
            .collect();
        if normalized.is_empty() {
            log::warn!("{}: final population entirely beyond the nadir", run.dir.display());
            continue;
        }
        let keep = front_of(&normalized);
        let front: Vec<Vec<f64>> = keep.iter().map(|&i| normalized[i].clone()).collect();
        let knee_local = knee_point(&front, &NADIR)?;
        // map back to the raw objective triple
        let target = &front[knee_local];
        let raw = final_pop
            .iter()
            .find(|&&p| normalize(p, &reference.bounds).to_vec() == *target)
            .copied()
            .unwrap_or([f64::NAN; 3]);
        knees.push((run.trial_label.clone(), run.mode, raw));
    }

    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let mut csv = String::from("trial,generation,HV,CPF,mode\n");
    for (label, mode, hv, cp) in &per_run {
        for (g, (h, c)) in hv.iter().zip(cp).enumerate() {
            let _ = writeln!(csv, "{label},{g},{h},{c},{mode}");
        }
    }
    let path = out_dir.join("indicators.csv");
    fs::write(&path, csv).map_err(io_err(&path))?;

    let mut csv = String::from("mode,generation,mean_HV,mean_CPF\n");
    for (mode, (hv, cp)) in &means {
        for (g, (h, c)) in hv.iter().zip(cp).enumerate() {
            let _ = writeln!(csv, "{mode},{g},{h},{c}");
        }
    }
    let path = out_dir.join("indicators_mean.csv");
    fs::write(&path, csv).map_err(io_err(&path))?;

    let mut csv = String::from("trial,mode,f_P,f_PD,f_CD\n");
    for (label, mode, k) in &knees {
        let _ = writeln!(csv, "{label},{mode},{},{},{}", k[0], k[1], k[2]);
    }
    let path = out_dir.join("knee_points.csv");
    fs::write(&path, csv).map_err(io_err(&path))?;

    let svg = hv_chart_svg(&means);
    let path = out_dir.join("hv_curves.svg");
    fs::write(&path, svg).map_err(io_err(&path))?;

    Ok(IndicatorReport { reference, per_run, means, knees })
}

fn front_of(points: &[Vec<f64>]) -> Vec<usize> {
    let strictly_dominates = |a: &[f64], b: &[f64]| {
        a.iter().zip(b).all(|(x, y)| x <= y) && a.iter().zip(b).any(|(x, y)| x < y)
    };
    (0..points.len())
        .filter(|&i| {
            !points.iter().enumerate().any(|(j, q)| {
                j != i && (strictly_dominates(q, &points[i]) || (j < i && q == &points[i]))
            })
        })
        .collect()
}

const SVG_COLORS: [&str; 4] = ["#000000", "#d62728", "#2ca02c", "#1f77b4"];

/// Static line chart of mean HV per mode over generations.
fn hv_chart_svg(means: &BTreeMap<String, (Vec<f64>, Vec<f64>)>) -> String {
    let (w, h, ml, mb) = (640.0, 400.0, 60.0, 40.0);
    let plot_w = w - ml - 20.0;
    let plot_h = h - mb - 20.0;
    let max_gen = means.values().map(|(hv, _)| hv.len()).max().unwrap_or(1).max(2) - 1;
    let max_hv = means
        .values()
        .flat_map(|(hv, _)| hv.iter().copied())
        .fold(f64::EPSILON, f64::max);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">"
    );
    let _ = writeln!(svg, "<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>");
    let _ = writeln!(
        svg,
        "<line x1=\"{ml}\" y1=\"20\" x2=\"{ml}\" y2=\"{}\" stroke=\"black\"/>",
        20.0 + plot_h
    );
    let _ = writeln!(
        svg,
        "<line x1=\"{ml}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>",
        20.0 + plot_h,
        ml + plot_w,
        20.0 + plot_h
    );
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">generation</text>",
        ml + plot_w / 2.0,
        h - 8.0
    );
    let _ = writeln!(
        svg,
        "<text x=\"14\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 14 {})\">mean HV</text>",
        20.0 + plot_h / 2.0,
        20.0 + plot_h / 2.0
    );
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"{}\" font-size=\"10\">0</text><text x=\"{}\" y=\"14\" font-size=\"10\">{max_hv:.3}</text>",
        ml - 14.0,
        20.0 + plot_h,
        ml - 40.0
    );

    for (i, (mode, (hv, _))) in means.iter().enumerate() {
        let color = SVG_COLORS[i % SVG_COLORS.len()];
        let pts: Vec<String> = hv
            .iter()
            .enumerate()
            .map(|(g, v)| {
                let x = ml + plot_w * g as f64 / max_gen as f64;
                let y = 20.0 + plot_h * (1.0 - v / max_hv);
                format!("{x:.1},{y:.1}")
            })
            .collect();
        let _ = writeln!(
            svg,
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>",
            pts.join(" ")
        );
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\" font-size=\"11\" fill=\"{color}\">{mode}</text>",
            ml + plot_w + 2.0 - 55.0,
            30.0 + 14.0 * i as f64
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// Decodes `count` levels from a checkpoint and writes level text, trace
/// CSV and trace render files into `out_dir`.
pub fn sample_from_checkpoint(
    checkpoint_path: &Path,
    vocab: &TileVocabulary,
    count: usize,
    seed: u64,
    out_dir: &Path,
) -> Result<Vec<PathBuf>, ExperimentError> {
    let ck = Checkpoint::load(checkpoint_path)?;
    if ck.vocab_size != vocab.len() {
        return Err(ExperimentError::Config(format!(
            "checkpoint was trained with a vocabulary of {} entries, this one has {}",
            ck.vocab_size,
            vocab.len()
        )));
    }
    let params = ck.to_params()?;
    let train = TrainConfig {
        z_dim: params.in_dim(),
        height: ck.height,
        width: ck.width,
        ..TrainConfig::default()
    };
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let levels = sample_levels(&params, vocab, &train, seed, count)?;
    let mut written = Vec::new();
    for (i, level) in levels.iter().enumerate() {
        write_level_artifacts(out_dir, &format!("level_{i:03}"), level, vocab)?;
        written.push(out_dir.join(format!("level_{i:03}.txt")));
        written.push(out_dir.join(format!("level_{i:03}.trace.csv")));
        written.push(out_dir.join(format!("level_{i:03}.render.txt")));
    }
    Ok(written)
}

/// Plain-text summary of finished runs for the `report` subcommand.
pub fn report_text(run_dirs: &[PathBuf]) -> Result<String, ExperimentError> {
    let mut out = String::new();
    for dir in run_dirs {
        let run = load_run(dir)?;
        let manifest: Manifest =
            serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).map_err(
                |_| ExperimentError::MissingLogs(dir.join("manifest.json")),
            )?)?;
        let generations = run.per_generation.len().saturating_sub(1);
        let final_pop = run.per_generation.last().cloned().unwrap_or_default();
        let _ = writeln!(out, "run {}", dir.display());
        let _ = writeln!(out, "  mode            {}", run.mode);
        let _ = writeln!(out, "  generations     {generations}");
        let _ = writeln!(out, "  population      {}", final_pop.len());
        let _ = writeln!(out, "  pareto set      {}", manifest.entries.len());
        if !final_pop.is_empty() {
            let best = |k: usize| {
                final_pop.iter().map(|p| p[k]).fold(f64::INFINITY, f64::min)
            };
            let _ = writeln!(
                out,
                "  best f_P / f_PD / f_CD   {} / {} / {}",
                best(0),
                best(1),
                best(2)
            );
        }
        for e in &manifest.entries {
            let _ = writeln!(
                out,
                "    member {:>4}  lineage {:<12} f_P {:.4} f_PD {:.4} f_CD {:.4}",
                e.id, e.lineage, e.f_p, e.f_pd, e.f_cd
            );
        }
    }
    Ok(out)
}
