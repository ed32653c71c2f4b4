//! Stage-game primitives: parameters, strategies, one-shot payoffs with and
//! without trembling-hand mistakes, and the binomial masses that weight them.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::binomial;
use crate::error::{domain, Error, Result};

/// Largest group size supported; binomial coefficients stay exact-ish and
/// group membership fits a `u64` bitmask.
pub const MAX_GROUP_SIZE: u32 = 64;

/// Group size and public-goods constants.
///
/// Construction enforces `n >= 2` and `0 < b/n < c < b`: defection dominates
/// the one-shot game while full cooperation is efficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGameParams", into = "RawGameParams")]
pub struct GameParams {
    n: u32,
    b: f64,
    c: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGameParams {
    n: u32,
    b: f64,
    c: f64,
}

impl TryFrom<RawGameParams> for GameParams {
    type Error = Error;
    fn try_from(raw: RawGameParams) -> Result<Self> {
        GameParams::new(raw.n, raw.b, raw.c)
    }
}

impl From<GameParams> for RawGameParams {
    fn from(p: GameParams) -> Self {
        RawGameParams { n: p.n, b: p.b, c: p.c }
    }
}

impl GameParams {
    pub fn new(n: u32, b: f64, c: f64) -> Result<Self> {
        if !(2..=MAX_GROUP_SIZE).contains(&n) {
            return Err(domain(format!("group size n={n} must lie in [2, {MAX_GROUP_SIZE}]")));
        }
        if !(b.is_finite() && c.is_finite()) {
            return Err(domain("b and c must be finite"));
        }
        let share = b / f64::from(n);
        if !(0.0 < share && share < c && c < b) {
            return Err(domain(format!(
                "payoff constants violate 0 < b/n < c < b (n={n}, b={b}, c={c})"
            )));
        }
        Ok(Self { n, b, c })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// Per-member return of one contribution, `b/n`.
    pub fn share(&self) -> f64 {
        self.b / f64::from(self.n)
    }

    /// The unconditional defector `T_n` for this group size.
    pub fn defector(&self) -> StrategyId {
        StrategyId(self.n)
    }

    /// The hardest conditional cooperator `T_{n-1}`.
    pub fn hardest(&self) -> StrategyId {
        StrategyId(self.n - 1)
    }

    pub fn strategy(&self, k: u32) -> Result<StrategyId> {
        StrategyId::new(k, self.n)
    }

    /// All strategies `T_0 ..= T_n`.
    pub fn strategies(&self) -> impl Iterator<Item = StrategyId> {
        (0..=self.n).map(StrategyId)
    }
}

/// Continuation probability and mistake rate.
///
/// `delta = 1` is representable; operations that cannot handle the limit
/// reject it themselves. Mistakes only ever turn an intended cooperation into
/// a defection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawEnvParams", into = "RawEnvParams")]
pub struct EnvParams {
    delta: f64,
    epsilon: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEnvParams {
    delta: f64,
    epsilon: f64,
}

impl TryFrom<RawEnvParams> for EnvParams {
    type Error = Error;
    fn try_from(raw: RawEnvParams) -> Result<Self> {
        EnvParams::new(raw.delta, raw.epsilon)
    }
}

impl From<EnvParams> for RawEnvParams {
    fn from(e: EnvParams) -> Self {
        RawEnvParams { delta: e.delta, epsilon: e.epsilon }
    }
}

impl EnvParams {
    pub fn new(delta: f64, epsilon: f64) -> Result<Self> {
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(domain(format!("continuation probability delta={delta} must lie in (0, 1]")));
        }
        check_epsilon(epsilon)?;
        Ok(Self { delta, epsilon })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        Self::new(self.delta, epsilon)
    }

    pub fn with_delta(&self, delta: f64) -> Result<Self> {
        Self::new(delta, self.epsilon)
    }

    /// Errors unless the game ends almost surely.
    pub fn require_finite_horizon(&self) -> Result<()> {
        if self.delta >= 1.0 {
            return Err(crate::error::divergence(
                "delta = 1 gives an infinite expected horizon for this operation",
            ));
        }
        Ok(())
    }
}

pub(crate) fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(0.0..1.0).contains(&epsilon) {
        return Err(domain(format!("mistake rate epsilon={epsilon} must lie in [0, 1)")));
    }
    Ok(())
}

/// The canonical flat JSON form `{"n","b","c","delta","epsilon"}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub n: u32,
    pub b: f64,
    pub c: f64,
    pub delta: f64,
    pub epsilon: f64,
}

impl Scenario {
    pub fn from_parts(params: &GameParams, env: &EnvParams) -> Self {
        Self {
            n: params.n(),
            b: params.b(),
            c: params.c(),
            delta: env.delta(),
            epsilon: env.epsilon(),
        }
    }

    pub fn split(&self) -> Result<(GameParams, EnvParams)> {
        Ok((GameParams::new(self.n, self.b, self.c)?, EnvParams::new(self.delta, self.epsilon)?))
    }
}

/// Tolerance index `k` of the conditional cooperator `T_k`: cooperate next
/// round iff at least `k` of the other `n-1` members cooperated this round.
/// `T_0` always cooperates, `T_n` never does.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StrategyId(u32);

impl StrategyId {
    pub fn new(k: u32, n: u32) -> Result<Self> {
        if k > n {
            return Err(domain(format!("k out of range: k={k} exceeds group size n={n}")));
        }
        Ok(Self(k))
    }

    /// Constructs without a range check; callers validate against `n` later.
    pub const fn unchecked(k: u32) -> Self {
        Self(k)
    }

    pub fn k(self) -> u32 {
        self.0
    }

    pub fn is_defector(self, n: u32) -> bool {
        self.0 >= n
    }

    /// Whether this strategy keeps cooperating after `defections` defections
    /// among the other `n-1` members.
    pub fn tolerates(self, defections: u32, n: u32) -> bool {
        self.0 == 0 || (self.0 < n && defections + self.0 < n)
    }

    /// The largest number of observed defections this strategy tolerates, or
    /// `None` for the defector. `T_0` tolerates everything.
    pub fn max_tolerated(self, n: u32) -> Option<u32> {
        match self.0 {
            0 => Some(n),
            k if k < n => Some(n - 1 - k),
            _ => None,
        }
    }
}

impl fmt::Display for StrategyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "T_{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Action {
    #[serde(rename = "C")]
    Cooperate,
    #[serde(rename = "D")]
    Defect,
}

/// Strategy frequencies; non-negative and summing to one within `1e-12`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BTreeMap<StrategyId, f64>", into = "BTreeMap<StrategyId, f64>")]
pub struct PopulationProfile {
    weights: BTreeMap<StrategyId, f64>,
}

impl TryFrom<BTreeMap<StrategyId, f64>> for PopulationProfile {
    type Error = Error;
    fn try_from(weights: BTreeMap<StrategyId, f64>) -> Result<Self> {
        Self::new(weights)
    }
}

impl From<PopulationProfile> for BTreeMap<StrategyId, f64> {
    fn from(p: PopulationProfile) -> Self {
        p.weights
    }
}

impl PopulationProfile {
    pub fn new(weights: BTreeMap<StrategyId, f64>) -> Result<Self> {
        if weights.values().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(domain("population frequencies must be finite and non-negative"));
        }
        let total: f64 = weights.values().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(domain(format!("population frequencies sum to {total}, not 1")));
        }
        Ok(Self { weights })
    }

    pub fn monomorphic(k: StrategyId) -> Self {
        Self { weights: BTreeMap::from([(k, 1.0)]) }
    }

    /// Incumbent at `1 - mu`, mutant at `mu`.
    pub fn with_mutant(incumbent: StrategyId, mutant: StrategyId, mu: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&mu) {
            return Err(domain(format!("mutant share mu={mu} must lie in [0, 1]")));
        }
        let mut weights = BTreeMap::new();
        *weights.entry(incumbent).or_insert(0.0) += 1.0 - mu;
        *weights.entry(mutant).or_insert(0.0) += mu;
        Self::new(weights)
    }

    pub fn frequency(&self, k: StrategyId) -> f64 {
        self.weights.get(&k).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (StrategyId, f64)> + '_ {
        self.weights.iter().map(|(k, w)| (*k, *w))
    }
}

fn check_co_cooperators(j: u32, n: u32) -> Result<()> {
    if j >= n {
        return Err(domain(format!("co-cooperator count j={j} must lie in [0, {}]", n - 1)));
    }
    Ok(())
}

/// One-shot payoff with `j` cooperators among the other `n-1` members:
/// `b(j+1)/n - c` for cooperation and `b j/n` for defection.
pub fn oneshot_payoff(action: Action, j: u32, params: &GameParams) -> Result<f64> {
    check_co_cooperators(j, params.n)?;
    let (b, c, n) = (params.b, params.c, f64::from(params.n));
    let j = f64::from(j);
    Ok(match action {
        Action::Cooperate => b * (j + 1.0) / n - c,
        Action::Defect => b * j / n,
    })
}

/// Probability that exactly `q` of `j` intending cooperators make a mistake,
/// `C(j,q) eps^q (1-eps)^(j-q)`.
pub fn mistake_pmf(j: u32, q: u32, epsilon: f64) -> Result<f64> {
    if q > j {
        return Err(domain(format!("mistake count q={q} exceeds cooperator count j={j}")));
    }
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(domain(format!("probability {epsilon} outside [0, 1]")));
    }
    Ok(binomial::pmf(j, q, epsilon))
}

/// Probability that `j` of the `n-1` co-members follow the strategy whose
/// population frequency is `p`.
pub fn group_comp_pmf(j: u32, p: f64, n: u32) -> Result<f64> {
    if n < 2 {
        return Err(domain(format!("group size n={n} must be at least 2")));
    }
    check_co_cooperators(j, n)?;
    if !(0.0..=1.0).contains(&p) {
        return Err(domain(format!("frequency p={p} outside [0, 1]")));
    }
    Ok(binomial::pmf(n - 1, j, p))
}

/// Expected one-shot payoff when the `j` intending co-cooperators (and the
/// focal player, if it intends to cooperate) each defect by mistake with
/// probability `epsilon`.
///
/// The binomial expectation collapses to
/// `(1-eps)(b(1 + j(1-eps))/n - c) + eps * b j(1-eps)/n` for cooperation and
/// `b j(1-eps)/n` for defection.
pub fn oneshot_payoff_err(action: Action, j: u32, params: &GameParams, epsilon: f64) -> Result<f64> {
    check_co_cooperators(j, params.n)?;
    check_epsilon(epsilon)?;
    let (b, c, n) = (params.b, params.c, f64::from(params.n));
    let keep = 1.0 - epsilon;
    let others = f64::from(j) * keep;
    Ok(match action {
        Action::Cooperate => keep * (b * (1.0 + others) / n - c) + epsilon * (b * others / n),
        Action::Defect => b * others / n,
    })
}

/// `F(C|n-1) / F(D|n-1) = (n/(n-1))(1 - c/b)`, which is independent of the
/// mistake rate and strictly inside `(0, 1)`.
pub fn coop_defect_ratio(params: &GameParams) -> f64 {
    let n = f64::from(params.n);
    n / (n - 1.0) * (1.0 - params.c / params.b)
}

/// The level `Delta` must exceed for `T_k` to repel a defector: `1 - ratio`.
pub fn stability_threshold(params: &GameParams) -> f64 {
    1.0 - coop_defect_ratio(params)
}
