use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Semantics;
use crate::error::{domain, Result};
use crate::game::{EnvParams, GameParams, StrategyId};

/// One repeated-game episode for a fixed group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpisodeConfig {
    pub members: Vec<StrategyId>,
    pub params: GameParams,
    pub env: EnvParams,
    #[serde(default)]
    pub semantics: Semantics,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeOutcome {
    /// Undiscounted per-member payoff totals, in member order.
    pub payoffs: Vec<f64>,
    pub rounds: u64,
}

/// Seeded generator for substream `stream` of `seed`.
pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn run_episode(cfg: &EpisodeConfig) -> Result<EpisodeOutcome> {
    let group = Group::new(&cfg.members, &cfg.params, &cfg.env, cfg.semantics)?;
    let mut rng = substream(cfg.seed, 0);
    let mut payoffs = vec![0.0; cfg.members.len()];
    let rounds = group.play(&mut rng, &mut payoffs);
    Ok(EpisodeOutcome { payoffs, rounds })
}

/// Validated group ready to be played repeatedly.
#[derive(Debug, Clone)]
pub(crate) struct Group {
    ks: Vec<u32>,
    n: u32,
    b_share: f64,
    c: f64,
    epsilon: f64,
    ln_delta: f64,
    semantics: Semantics,
    /// Members that cooperate no matter what, which prevents absorption.
    unconditional: u64,
    opening: u64,
}

impl Group {
    pub(crate) fn new(
        members: &[StrategyId],
        params: &GameParams,
        env: &EnvParams,
        semantics: Semantics,
    ) -> Result<Self> {
        let n = params.n();
        if members.len() != n as usize {
            return Err(domain(format!("group has {} members, expected n={n}", members.len())));
        }
        if let Some(m) = members.iter().find(|m| m.k() > n) {
            return Err(domain(format!("k out of range: {m} for n={n}")));
        }
        env.require_finite_horizon()?;
        let ks: Vec<u32> = members.iter().map(|m| m.k()).collect();
        let mask = |pred: &dyn Fn(u32) -> bool| {
            ks.iter().enumerate().filter(|(_, k)| pred(**k)).fold(0u64, |acc, (i, _)| acc | (1 << i))
        };
        Ok(Self {
            n,
            b_share: params.b() / f64::from(n),
            c: params.c(),
            epsilon: env.epsilon(),
            ln_delta: env.delta().ln(),
            semantics,
            unconditional: mask(&|k| k == 0),
            opening: mask(&|k| k < n),
            ks,
        })
    }

    /// Number of rounds: geometric with continuation probability `delta`.
    fn draw_rounds<R: Rng>(&self, rng: &mut R) -> u64 {
        let u: f64 = 1.0 - rng.gen::<f64>();
        let extra = (u.ln() / self.ln_delta).floor();
        if extra.is_finite() && extra < 1e18 {
            1 + extra as u64
        } else {
            u64::MAX
        }
    }

    /// Plays one episode, adding each member's total to `payoffs`.
    pub(crate) fn play<R: Rng>(&self, rng: &mut R, payoffs: &mut [f64]) -> u64 {
        let rounds = self.draw_rounds(rng);
        let mut intend = self.opening;
        for round in 0..rounds {
            let frozen = self.semantics == Semantics::PaperAbsorbing
                && self.epsilon == 0.0
                && intend == self.unconditional;
            if intend == 0 || frozen {
                // Nothing changes any more: either nobody intends to cooperate,
                // or only error-free unconditional cooperators are left.
                if intend != 0 {
                    self.settle_unconditional(intend, rounds - round, payoffs);
                }
                break;
            }
            let mut realized = intend;
            if self.epsilon > 0.0 {
                let mut bits = intend;
                while bits != 0 {
                    let i = bits.trailing_zeros();
                    bits &= bits - 1;
                    if rng.gen::<f64>() < self.epsilon {
                        realized &= !(1u64 << i);
                    }
                }
            }
            let total = realized.count_ones();
            let pot = self.b_share * f64::from(total);
            for (i, p) in payoffs.iter_mut().enumerate() {
                let own = (realized >> i) & 1 == 1;
                *p += if own { pot - self.c } else { pot };
            }
            intend = self.next(intend, realized, total);
        }
        rounds
    }

    fn settle_unconditional(&self, intend: u64, remaining: u64, payoffs: &mut [f64]) {
        let pot = self.b_share * f64::from(intend.count_ones());
        let r = remaining as f64;
        for (i, p) in payoffs.iter_mut().enumerate() {
            let own = (intend >> i) & 1 == 1;
            *p += r * if own { pot - self.c } else { pot };
        }
    }

    fn next(&self, intend: u64, realized: u64, total: u32) -> u64 {
        let mut out = 0u64;
        for (i, &k) in self.ks.iter().enumerate() {
            let bit = 1u64 << i;
            let keeps = match self.semantics {
                Semantics::PaperAbsorbing => {
                    if k == 0 {
                        true
                    } else if k >= self.n || intend & bit == 0 {
                        false
                    } else {
                        // The player assumes its own contribution went through.
                        total.saturating_sub(1) >= k
                    }
                }
                Semantics::Literal => {
                    let others = total - u32::from(realized & bit != 0);
                    k < self.n && others >= k
                }
            };
            if keeps {
                out |= bit;
            }
        }
        out
    }
}
