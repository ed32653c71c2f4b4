//! Monte Carlo oracle: single episodes, payoff estimates, and generational
//! population dynamics.

use serde::{Deserialize, Serialize};

mod drift;
mod episode;
mod estimate;
mod evolve;

pub use drift::{drift_experiment, sign_test_p_value, DriftSummary, TrialOutcome, MIN_TRIALS};
pub use episode::{run_episode, substream, EpisodeConfig, EpisodeOutcome};
pub use estimate::{estimate_v, Estimate, MIN_REPLICATIONS};
pub use evolve::{
    evolve, Event, EventKind, GenerationRecord, Grouping, MutationKernel, SimConfig, SimTrace,
    UpdateRule,
};

/// How players react to what they observe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Semantics {
    /// Intending cooperators assume their own contribution went through and
    /// withdraw for good once their tolerance is exceeded.
    #[default]
    #[value(alias = "paper_absorbing")]
    PaperAbsorbing,
    /// Every player counts the realized cooperators among the others each
    /// round; cooperation can restart.
    Literal,
}
