use std::collections::BTreeMap;
use std::io::Write;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::episode::{substream, Group};
use super::Semantics;
use crate::error::{domain, Result};
use crate::game::{EnvParams, GameParams, StrategyId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum UpdateRule {
    /// Every agent compares itself with a random other agent and copies it
    /// with Fermi probability `1 / (1 + exp(-s (pi_other - pi_self)))`.
    #[default]
    Imitation,
    /// `N` birth-death events per generation; parents are chosen with
    /// fitness `exp(s pi)` and replace a uniformly random agent.
    Moran,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum MutationKernel {
    /// Uniform over `T_0 ..= T_n`.
    #[default]
    Uniform,
    /// Uniform over the cooperators `T_0 ..= T_{n-1}`.
    #[value(alias = "cooperators_only")]
    CooperatorsOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Grouping {
    /// Random partition of the population into `N/n` groups.
    #[default]
    Partition,
    /// Every agent plays once as focal player with `n-1` co-members drawn
    /// without replacement from the rest; only the focal payoff counts.
    #[value(alias = "with_replacement")]
    WithReplacement,
}

fn default_episodes() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub population: usize,
    pub params: GameParams,
    pub env: EnvParams,
    #[serde(default)]
    pub update: UpdateRule,
    pub selection: f64,
    pub mutation_rate: f64,
    #[serde(default)]
    pub kernel: MutationKernel,
    pub generations: u64,
    #[serde(default = "default_episodes")]
    pub episodes_per_generation: u32,
    pub seed: u64,
    #[serde(default)]
    pub semantics: Semantics,
    /// Initial counts per strategy index; defaults to all `T_{n-1}`.
    #[serde(default)]
    pub initial: Option<BTreeMap<u32, usize>>,
    #[serde(default)]
    pub grouping: Grouping,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let n = self.params.n() as usize;
        self.env.require_finite_horizon()?;
        if self.population < n {
            return Err(domain(format!("population {} is smaller than the group size {n}", self.population)));
        }
        if self.grouping == Grouping::Partition && !self.population.is_multiple_of(n) {
            return Err(domain(format!(
                "population {} is not divisible by the group size {n}",
                self.population
            )));
        }
        if !(0.0..=1.0).contains(&self.mutation_rate) {
            return Err(domain(format!("mutation rate {} must lie in [0, 1]", self.mutation_rate)));
        }
        if !(self.selection.is_finite() && self.selection >= 0.0) {
            return Err(domain(format!("selection intensity {} must be finite and non-negative", self.selection)));
        }
        if self.episodes_per_generation == 0 {
            return Err(domain("episodes_per_generation must be at least 1"));
        }
        if let Some(init) = &self.initial {
            if let Some(k) = init.keys().find(|k| **k as usize > n) {
                return Err(domain(format!("k out of range: initial strategy {k} exceeds n={n}")));
            }
            let total: usize = init.values().sum();
            if total != self.population {
                return Err(domain(format!(
                    "initial counts sum to {total}, population is {}",
                    self.population
                )));
            }
        }
        Ok(())
    }

    fn initial_agents(&self) -> Vec<u32> {
        match &self.initial {
            Some(init) => init.iter().flat_map(|(k, c)| std::iter::repeat_n(*k, *c)).collect(),
            None => vec![self.params.n() - 1; self.population],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    /// A strategy occupies the whole population.
    Fixation,
    /// A strategy's frequency reaches one half from below.
    Invasion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub generation: u64,
    pub kind: EventKind,
    pub strategy: StrategyId,
}

/// Population state at the start of a generation and the payoffs it earned.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub generation: u64,
    /// Agent counts for `T_0 ..= T_n`.
    pub counts: Vec<usize>,
    /// Mean payoff per strategy, `None` when the strategy is absent.
    pub mean_payoffs: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimTrace {
    pub population: usize,
    pub records: Vec<GenerationRecord>,
    pub events: Vec<Event>,
    /// Counts after the last generation's update.
    pub final_counts: Vec<usize>,
}

impl SimTrace {
    pub const CSV_HEADER: &'static str = "generation,k,frequency,mean_payoff";

    pub fn frequencies(&self, generation: usize) -> Vec<f64> {
        let total = self.population as f64;
        self.records[generation].counts.iter().map(|c| *c as f64 / total).collect()
    }

    pub fn final_frequencies(&self) -> Vec<f64> {
        let total = self.population as f64;
        self.final_counts.iter().map(|c| *c as f64 / total).collect()
    }

    /// First generation (counting the final state as `records.len()`) at
    /// which strategy `k` holds at least `share` of the population.
    pub fn first_reaching(&self, k: u32, share: f64) -> Option<u64> {
        let need = share * self.population as f64;
        self.records
            .iter()
            .map(|r| (r.generation, r.counts[k as usize]))
            .chain(std::iter::once((self.records.len() as u64, self.final_counts[k as usize])))
            .find(|(_, c)| *c as f64 >= need)
            .map(|(g, _)| g)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{}", Self::CSV_HEADER)?;
        let total = self.population as f64;
        for r in &self.records {
            for (k, (c, m)) in r.counts.iter().zip(&r.mean_payoffs).enumerate() {
                let m = m.map(|v| v.to_string()).unwrap_or_default();
                writeln!(out, "{},{k},{},{m}", r.generation, *c as f64 / total)?;
            }
        }
        Ok(())
    }
}

fn counts_of(agents: &[u32], n: u32) -> Vec<usize> {
    let mut counts = vec![0; n as usize + 1];
    for a in agents {
        counts[*a as usize] += 1;
    }
    counts
}

/// Runs the generational dynamics. Identical configurations give identical
/// traces regardless of the thread count.
pub fn evolve(cfg: &SimConfig) -> Result<SimTrace> {
    cfg.validate()?;
    let n = cfg.params.n();
    let size = cfg.population;
    let mut agents = cfg.initial_agents();
    let mut control = substream(cfg.seed, u64::MAX);
    let mut records = Vec::with_capacity(cfg.generations as usize);
    let mut events = Vec::new();
    let mut counts = counts_of(&agents, n);
    let groups_per_rep = match cfg.grouping {
        Grouping::Partition => (size / n as usize) as u64,
        Grouping::WithReplacement => size as u64,
    };

    for generation in 0..cfg.generations {
        let payoffs = generation_payoffs(cfg, &agents, generation, groups_per_rep, &mut control)?;
        let mut sums = vec![0.0; n as usize + 1];
        for (a, p) in agents.iter().zip(&payoffs) {
            sums[*a as usize] += p;
        }
        let mean_payoffs =
            sums.iter().zip(&counts).map(|(s, c)| (*c > 0).then(|| s / *c as f64)).collect();
        records.push(GenerationRecord { generation, counts: counts.clone(), mean_payoffs });

        let mut next = match cfg.update {
            UpdateRule::Imitation => imitate(&agents, &payoffs, cfg.selection, &mut control),
            UpdateRule::Moran => moran(&agents, &payoffs, cfg.selection, &mut control),
        };
        mutate(&mut next, cfg, &mut control);
        let new_counts = counts_of(&next, n);
        for k in 0..=n as usize {
            let (before, after) = (counts[k], new_counts[k]);
            let strategy = StrategyId::unchecked(k as u32);
            if 2 * before < size && 2 * after >= size {
                events.push(Event { generation: generation + 1, kind: EventKind::Invasion, strategy });
            }
            if before < size && after == size {
                events.push(Event { generation: generation + 1, kind: EventKind::Fixation, strategy });
            }
        }
        agents = next;
        counts = new_counts;
    }
    Ok(SimTrace { population: size, records, events, final_counts: counts })
}

/// Average payoff per agent over `episodes_per_generation` group draws.
fn generation_payoffs(
    cfg: &SimConfig,
    agents: &[u32],
    generation: u64,
    groups_per_rep: u64,
    control: &mut ChaCha8Rng,
) -> Result<Vec<f64>> {
    let n = cfg.params.n() as usize;
    let size = agents.len();
    let mut totals = vec![0.0; size];
    for rep in 0..u64::from(cfg.episodes_per_generation) {
        // Each group lists agent indices; the first `scored` members are paid.
        let (groups, scored): (Vec<Vec<usize>>, usize) = match cfg.grouping {
            Grouping::Partition => {
                let mut order: Vec<usize> = (0..size).collect();
                order.shuffle(control);
                (order.chunks(n).map(<[usize]>::to_vec).collect(), n)
            }
            Grouping::WithReplacement => {
                let groups = (0..size)
                    .map(|focal| {
                        let mut g = Vec::with_capacity(n);
                        g.push(focal);
                        for idx in rand::seq::index::sample(control, size - 1, n - 1) {
                            g.push(if idx >= focal { idx + 1 } else { idx });
                        }
                        g
                    })
                    .collect();
                (groups, 1)
            }
        };
        let stream_base = 1 + (generation * u64::from(cfg.episodes_per_generation) + rep) * groups_per_rep;
        let results: Vec<Vec<f64>> = groups
            .par_iter()
            .with_min_len(4)
            .enumerate()
            .map(|(gi, g)| {
                let members: Vec<StrategyId> =
                    g.iter().map(|a| StrategyId::unchecked(agents[*a])).collect();
                let group = Group::new(&members, &cfg.params, &cfg.env, cfg.semantics)?;
                let mut rng = substream(cfg.seed, stream_base + gi as u64);
                let mut pay = vec![0.0; n];
                group.play(&mut rng, &mut pay);
                Ok(pay)
            })
            .collect::<Result<_>>()?;
        for (g, pay) in groups.iter().zip(&results) {
            for (a, p) in g.iter().zip(pay).take(scored) {
                totals[*a] += p;
            }
        }
    }
    let reps = f64::from(cfg.episodes_per_generation);
    Ok(totals.into_iter().map(|t| t / reps).collect())
}

fn fermi(selection: f64, gain: f64) -> f64 {
    1.0 / (1.0 + (-selection * gain).exp())
}

fn imitate(agents: &[u32], payoffs: &[f64], selection: f64, rng: &mut ChaCha8Rng) -> Vec<u32> {
    let size = agents.len();
    (0..size)
        .map(|i| {
            let j = {
                let r = rng.gen_range(0..size - 1);
                if r >= i { r + 1 } else { r }
            };
            if rng.gen::<f64>() < fermi(selection, payoffs[j] - payoffs[i]) {
                agents[j]
            } else {
                agents[i]
            }
        })
        .collect()
}

fn moran(agents: &[u32], payoffs: &[f64], selection: f64, rng: &mut ChaCha8Rng) -> Vec<u32> {
    let mut agents = agents.to_vec();
    let mut pay = payoffs.to_vec();
    let size = agents.len();
    for _ in 0..size {
        let top = pay.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let fitness: Vec<f64> = pay.iter().map(|p| (selection * (p - top)).exp()).collect();
        let total: f64 = fitness.iter().sum();
        let mut pick = rng.gen::<f64>() * total;
        let mut parent = size - 1;
        for (i, f) in fitness.iter().enumerate() {
            if pick < *f {
                parent = i;
                break;
            }
            pick -= f;
        }
        let dead = rng.gen_range(0..size);
        agents[dead] = agents[parent];
        pay[dead] = pay[parent];
    }
    agents
}

fn mutate(agents: &mut [u32], cfg: &SimConfig, rng: &mut ChaCha8Rng) {
    if cfg.mutation_rate == 0.0 {
        return;
    }
    let n = cfg.params.n();
    let top = match cfg.kernel {
        MutationKernel::Uniform => n,
        MutationKernel::CooperatorsOnly => n - 1,
    };
    for a in agents.iter_mut() {
        if rng.gen::<f64>() < cfg.mutation_rate {
            *a = rng.gen_range(0..=top);
        }
    }
}
