//! Multi-objective evolutionary training of tile-level generators.
//!
//! A population of small dense GAN generators is trained against a level
//! corpus, then evolved under three simultaneously minimized objectives:
//! transformed playability, playtrace diversity and tile-pattern diversity.
//! Survival selection keeps a Pareto set of generators rather than a single
//! compromise, and the indicator pipeline (hypervolume, front coverage,
//! knee points) measures how well a run spans the objective space.
//!
//! Modules, bottom up:
//!
//! * [`level`] - tile grids, text I/O, one-hot encoding, pattern counts;
//! * [`sim`] - deterministic platformer agent producing playtraces;
//! * [`metrics`] - DTW, tile-pattern JS divergence, the P/PD/CD metrics
//!   and their minimization transforms;
//! * [`neural`] - dense nets, hand-derived gradients, Adam, checkpoints;
//! * [`gan`] - shared-discriminator population training and mutation;
//! * [`moea`] - dominance, non-dominated sorting, SDE survival selection,
//!   knee points;
//! * [`indicators`] - exact hypervolume, pseudo reference fronts, CPF;
//! * [`experiment`] - configuration, the generation loop, run artifacts,
//!   and the indicator/report pipelines.

pub mod experiment;
pub mod gan;
pub mod indicators;
pub mod level;
pub mod metrics;
pub mod moea;
pub mod neural;
pub mod rng;
pub mod sim;

pub use experiment::{ExperimentConfig, RunArtifacts};
pub use gan::{PopulationMember, TrainConfig};
pub use level::{Level, PatternDistribution, TileCategory, TileVocabulary};
pub use metrics::{Evaluation, ObjectiveMode, ObjectiveVector};
pub use neural::{AdamState, MlpParams, NoiseBatch};
pub use sim::{Playtrace, SimResult};
