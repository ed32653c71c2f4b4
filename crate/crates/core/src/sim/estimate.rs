use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::episode::{substream, Group};
use super::Semantics;
use crate::error::{domain, Result};
use crate::game::{EnvParams, GameParams, StrategyId};

pub const MIN_REPLICATIONS: u64 = 1000;
const CHUNK: u64 = 4096;
/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

/// Monte Carlo estimate of a focal player's expected total payoff.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    /// Half-width of the 95% normal confidence interval.
    pub half_width: f64,
    pub replications: u64,
    /// Sample mean of the episode length in rounds.
    pub mean_rounds: f64,
    pub rounds_std_error: f64,
}

impl Estimate {
    /// `(value - mean) / std_error`.
    pub fn z_score(&self, value: f64) -> f64 {
        (value - self.mean) / self.std_error
    }

    pub fn brackets(&self, value: f64, standard_errors: f64) -> bool {
        (value - self.mean).abs() <= standard_errors * self.std_error
    }
}

/// Running mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Moments {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    pub(crate) fn push(&mut self, x: f64) {
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (x - self.mean);
    }

    pub(crate) fn merge(self, other: Moments) -> Moments {
        if self.count == 0 {
            return other;
        }
        if other.count == 0 {
            return self;
        }
        let count = self.count + other.count;
        let d = other.mean - self.mean;
        let w = other.count as f64 / count as f64;
        Moments {
            count,
            mean: self.mean + d * w,
            m2: self.m2 + other.m2 + d * d * self.count as f64 * w,
        }
    }

    pub(crate) fn mean(&self) -> f64 {
        self.mean
    }

    pub(crate) fn std_error(&self) -> f64 {
        if self.count < 2 {
            return f64::NAN;
        }
        (self.m2 / (self.count - 1) as f64 / self.count as f64).sqrt()
    }
}

/// Plays `replications` independent episodes of `focal` among `n-1`
/// incumbents. Episode `i` draws from substream `i` of `seed`, and chunks are
/// merged in a fixed order, so results do not depend on the thread count.
pub fn estimate_v(
    incumbent: StrategyId,
    focal: StrategyId,
    params: &GameParams,
    env: &EnvParams,
    replications: u64,
    semantics: Semantics,
    seed: u64,
) -> Result<Estimate> {
    if replications < MIN_REPLICATIONS {
        return Err(domain(format!(
            "replications={replications} must be at least {MIN_REPLICATIONS}"
        )));
    }
    let n = params.n();
    let mut members = vec![incumbent; n as usize];
    members[0] = focal;
    let group = Group::new(&members, params, env, semantics)?;

    let chunks = replications.div_ceil(CHUNK);
    let partial: Vec<(Moments, Moments)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut payoff = Moments::default();
            let mut rounds = Moments::default();
            let mut buf = vec![0.0; n as usize];
            for i in c * CHUNK..((c + 1) * CHUNK).min(replications) {
                let mut rng = substream(seed, i);
                buf.fill(0.0);
                let r = group.play(&mut rng, &mut buf);
                payoff.push(buf[0]);
                rounds.push(r as f64);
            }
            (payoff, rounds)
        })
        .collect();
    let (payoff, rounds) = partial
        .into_iter()
        .fold((Moments::default(), Moments::default()), |(a, b), (c, d)| (a.merge(c), b.merge(d)));
    let se = payoff.std_error();
    Ok(Estimate {
        mean: payoff.mean(),
        std_error: se,
        half_width: Z95 * se,
        replications,
        mean_rounds: rounds.mean(),
        rounds_std_error: rounds.std_error(),
    })
}
