use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::episode::substream;
use super::evolve::{evolve, SimConfig};
use crate::binomial;
use crate::error::{domain, Result};

pub const MIN_TRIALS: usize = 30;

/// Per-seed outcome of the paired runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub seed: u64,
    /// Generation at which defectors first held half the population.
    pub takeover_errorfree: Option<u64>,
    pub takeover_noisy: Option<u64>,
    /// Final frequency of the hardest conditional cooperator.
    pub hardest_final_errorfree: f64,
    pub hardest_final_noisy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftSummary {
    pub trials: usize,
    pub epsilon: f64,
    pub takeover_fraction_errorfree: f64,
    pub takeover_fraction_noisy: f64,
    pub mean_takeover_time_errorfree: Option<f64>,
    pub mean_takeover_time_noisy: Option<f64>,
    /// Seeds where only the error-free run was taken over.
    pub errorfree_only: usize,
    /// Seeds where only the noisy run was taken over.
    pub noisy_only: usize,
    /// One-sided exact McNemar p-value for "more takeovers without errors".
    pub p_value: f64,
    pub outcomes: Vec<TrialOutcome>,
}

impl DriftSummary {
    pub fn significant(&self, level: f64) -> bool {
        self.takeover_fraction_errorfree > self.takeover_fraction_noisy && self.p_value < level
    }
}

/// `P(X >= successes)` for `X ~ Bin(trials, 1/2)`.
pub fn sign_test_p_value(successes: usize, trials: usize) -> f64 {
    if trials == 0 {
        return 1.0;
    }
    binomial::upper_tail(trials as u32, successes as u32, 0.5).min(1.0)
}

/// Runs `trials` seed-paired evolutions of `cfg` with mistakes switched off
/// and at `cfg.env.epsilon`, and compares how often defectors reach half of
/// the population.
pub fn drift_experiment(cfg: &SimConfig, trials: usize) -> Result<DriftSummary> {
    if trials < MIN_TRIALS {
        return Err(domain(format!("trials={trials} must be at least {MIN_TRIALS}")));
    }
    let epsilon = cfg.env.epsilon();
    if epsilon == 0.0 {
        return Err(domain("the contrasted mistake rate must be positive"));
    }
    cfg.validate()?;
    let n = cfg.params.n();
    let mut errorfree = cfg.clone();
    errorfree.env = cfg.env.with_epsilon(0.0)?;
    let mut seeder = substream(cfg.seed, u64::MAX - 1);
    let seeds: Vec<u64> = (0..trials).map(|_| seeder.gen()).collect();

    let outcomes = seeds
        .par_iter()
        .map(|seed| {
            let mut a = errorfree.clone();
            a.seed = *seed;
            let mut b = cfg.clone();
            b.seed = *seed;
            let ta = evolve(&a)?;
            let tb = evolve(&b)?;
            Ok(TrialOutcome {
                seed: *seed,
                takeover_errorfree: ta.first_reaching(n, 0.5),
                takeover_noisy: tb.first_reaching(n, 0.5),
                hardest_final_errorfree: ta.final_frequencies()[(n - 1) as usize],
                hardest_final_noisy: tb.final_frequencies()[(n - 1) as usize],
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let times = |f: fn(&TrialOutcome) -> Option<u64>| -> Vec<f64> {
        outcomes.iter().filter_map(f).map(|g| g as f64).collect()
    };
    let mean = |v: Vec<f64>| (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64);
    let ef = times(|o| o.takeover_errorfree);
    let ny = times(|o| o.takeover_noisy);
    let errorfree_only = outcomes
        .iter()
        .filter(|o| o.takeover_errorfree.is_some() && o.takeover_noisy.is_none())
        .count();
    let noisy_only = outcomes
        .iter()
        .filter(|o| o.takeover_errorfree.is_none() && o.takeover_noisy.is_some())
        .count();
    Ok(DriftSummary {
        trials,
        epsilon,
        takeover_fraction_errorfree: ef.len() as f64 / trials as f64,
        takeover_fraction_noisy: ny.len() as f64 / trials as f64,
        mean_takeover_time_errorfree: mean(ef),
        mean_takeover_time_noisy: mean(ny),
        errorfree_only,
        noisy_only,
        p_value: sign_test_p_value(errorfree_only, errorfree_only + noisy_only),
        outcomes,
    })
}
