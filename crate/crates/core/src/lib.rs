//! Repeated public goods games with conditional cooperators and behavioural
//! mistakes: closed-form payoffs, stability analysis, and Monte Carlo
//! simulation.

pub mod analytic;
pub mod binomial;
pub mod cli;
pub mod error;
pub mod exact;
pub mod game;
pub mod roots;
pub mod sim;
pub mod stability;
pub mod validate;

pub use analytic::{Case, DiscriminantInputs, FocalContext, Mode};
pub use error::{Error, Result};
pub use game::{Action, EnvParams, GameParams, PopulationProfile, Scenario, StrategyId};
pub use stability::{StabilityVerdict, SweepTable, ThresholdBand, Verdict};
