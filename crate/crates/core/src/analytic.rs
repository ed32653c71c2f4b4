//! Repeated-game values for a focal player in an (almost) homogeneous group.
//!
//! Closed forms follow the absorbing-breakdown convention: every intending
//! cooperator sees the group's realized defection count `d` (a player cannot
//! tell its own mistake from another member's defection), a conditional
//! cooperator whose tolerance is exceeded defects for the rest of the
//! episode, and a breakdown of the incumbents ends all cooperation except
//! for a softer focal player's solitary rounds. `Mode::Exact` instead
//! evaluates the literal observation dynamics, see [`crate::exact`].
//!
//! Denominators are written as `(1 - delta) + delta * P(leave)` with the
//! leaving probability summed directly over the binomial tail, so values stay
//! accurate for tiny mistake rates and at `delta = 1`.

use serde::{Deserialize, Serialize};

use crate::binomial;
use crate::error::{divergence, domain, Result};
use crate::exact;
use crate::game::{
    group_comp_pmf, oneshot_payoff, oneshot_payoff_err, Action, EnvParams,
    GameParams, StrategyId,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Closed forms under the absorbing-breakdown convention.
    #[default]
    Paper,
    /// Literal per-player observation, solved as a finite Markov chain.
    Exact,
}

/// The (incumbent, focal) configurations for which closed forms exist.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Case {
    /// (a) `T_{n-1}` among `T_{n-1}`.
    HardestHomogeneous,
    /// (b) `T_n` among `T_{n-1}`.
    DefectorAmongHardest,
    /// (c) `T_{k'}`, `k' < n-1`, among `T_{n-1}`.
    SofterAmongHardest,
    /// (d) `T_k` among `T_k`, `k < n-1`.
    Homogeneous,
    /// (e) `T_n` among `T_k`, `k < n-1`.
    DefectorAmongTolerant,
    /// (f) `T_{k'}` among `T_k` with `k < k' < n`.
    HarderMutant,
    /// (g) `T_{k'}` among `T_k` with `k' < k < n-1`.
    SofterMutant,
}

impl Case {
    pub const ALL: [Case; 7] = [
        Case::HardestHomogeneous,
        Case::DefectorAmongHardest,
        Case::SofterAmongHardest,
        Case::Homogeneous,
        Case::DefectorAmongTolerant,
        Case::HarderMutant,
        Case::SofterMutant,
    ];

    pub fn letter(self) -> char {
        match self {
            Case::HardestHomogeneous => 'a',
            Case::DefectorAmongHardest => 'b',
            Case::SofterAmongHardest => 'c',
            Case::Homogeneous => 'd',
            Case::DefectorAmongTolerant => 'e',
            Case::HarderMutant => 'f',
            Case::SofterMutant => 'g',
        }
    }
}

/// A single focal player facing `n-1` identical incumbents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FocalContext {
    pub incumbent: StrategyId,
    pub focal: StrategyId,
    #[serde(default)]
    pub mode: Mode,
}

impl FocalContext {
    pub fn new(incumbent: StrategyId, focal: StrategyId, mode: Mode) -> Self {
        Self { incumbent, focal, mode }
    }

    pub fn paper(incumbent: StrategyId, focal: StrategyId) -> Self {
        Self::new(incumbent, focal, Mode::Paper)
    }

    pub fn case(&self, n: u32) -> Result<Case> {
        let (k, f) = (self.incumbent.k(), self.focal.k());
        if k >= n {
            return Err(domain(format!(
                "incumbents must be conditional cooperators: k={k} must be below n={n}"
            )));
        }
        if f > n {
            return Err(domain(format!("k out of range: focal k={f} exceeds n={n}")));
        }
        let hardest = n - 1;
        Ok(match (k == hardest, f) {
            (true, f) if f == hardest => Case::HardestHomogeneous,
            (true, f) if f == n => Case::DefectorAmongHardest,
            (true, _) => Case::SofterAmongHardest,
            (false, f) if f == k => Case::Homogeneous,
            (false, f) if f == n => Case::DefectorAmongTolerant,
            (false, f) if f > k => Case::HarderMutant,
            (false, _) => Case::SofterMutant,
        })
    }
}

fn require_below_one(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(divergence(format!(
            "delta={delta}: error-free repeated payoffs need 0 < delta < 1"
        )));
    }
    Ok(())
}

/// Error-free repeated-game payoff for the incumbent type `T_k` or the
/// defector `T_n`, with `j` cooperating (`T_k`) co-members and the rest
/// defectors. Breakdown continues with `F(D|0) = 0` forever.
pub fn v_errorfree(
    focal: StrategyId,
    incumbent: StrategyId,
    j: u32,
    params: &GameParams,
    delta: f64,
) -> Result<f64> {
    require_below_one(delta)?;
    let n = params.n();
    let k = incumbent.k();
    if k >= n {
        return Err(domain(format!("incumbent k={k} must be a conditional cooperator")));
    }
    let cont = delta / (1.0 - delta);
    let breakdown = oneshot_payoff(Action::Defect, 0, params)?;
    if focal == incumbent {
        let fc = oneshot_payoff(Action::Cooperate, j, params)?;
        // j > k and j = k are listed separately but pay the same.
        Ok(if j >= k { fc / (1.0 - delta) } else { fc + cont * breakdown })
    } else if focal.is_defector(n) {
        let fd = oneshot_payoff(Action::Defect, j, params)?;
        Ok(if j > k { fd / (1.0 - delta) } else { fd + cont * breakdown })
    } else {
        Err(domain(format!(
            "error-free value is defined for the incumbent T_{k} or the defector T_{n}, not {focal}"
        )))
    }
}

/// Discounted-by-continuation total payoff of `members[focal]` when nobody
/// makes mistakes. Conditional cooperators open with cooperation; the
/// deterministic intention sequence is followed until it cycles.
pub fn errorfree_group_value(
    members: &[StrategyId],
    focal: usize,
    params: &GameParams,
    delta: f64,
) -> Result<f64> {
    require_below_one(delta)?;
    let n = params.n();
    if members.len() != n as usize {
        return Err(domain(format!("group has {} members, expected n={n}", members.len())));
    }
    if focal >= members.len() {
        return Err(domain(format!("focal index {focal} out of range")));
    }
    if let Some(m) = members.iter().find(|m| m.k() > n) {
        return Err(domain(format!("k out of range: {m} for n={n}")));
    }
    let (b, c, nf) = (params.b(), params.c(), f64::from(n));

    let mut state: u64 = members
        .iter()
        .enumerate()
        .filter(|(_, m)| !m.is_defector(n))
        .fold(0, |acc, (i, _)| acc | (1 << i));
    let mut seen: Vec<u64> = Vec::new();
    let mut rewards: Vec<f64> = Vec::new();
    let start = loop {
        if let Some(pos) = seen.iter().position(|s| *s == state) {
            break pos;
        }
        if seen.len() > 4096 {
            return Err(domain("error-free dynamics did not cycle within 4096 rounds"));
        }
        let total = state.count_ones();
        let own = (state >> focal) & 1 == 1;
        let reward = b * f64::from(total) / nf - if own { c } else { 0.0 };
        seen.push(state);
        rewards.push(reward);
        state = members.iter().enumerate().fold(0, |acc, (i, m)| {
            let cooperated = (state >> i) & 1;
            let observed = total - cooperated as u32;
            if !m.is_defector(n) && observed >= m.k() {
                acc | (1 << i)
            } else {
                acc
            }
        });
    };

    let mut value = 0.0;
    let mut weight = 1.0;
    for r in &rewards[..start] {
        value += weight * r;
        weight *= delta;
    }
    let period = rewards.len() - start;
    let mut cycle = 0.0;
    let mut w = 1.0;
    for r in &rewards[start..] {
        cycle += w * r;
        w *= delta;
    }
    Ok(value + weight * cycle / (1.0 - delta.powi(period as i32)))
}

/// Expected error-free payoff `W` of `focal` in a population of
/// `(1 - mu)` incumbents and `mu` mutants, where co-members are drawn
/// binomially and `j` counts incumbent-type co-members.
pub fn w_errorfree(
    focal: StrategyId,
    incumbent: StrategyId,
    mutant: StrategyId,
    mu: f64,
    params: &GameParams,
    delta: f64,
) -> Result<f64> {
    require_below_one(delta)?;
    let n = params.n();
    if focal != incumbent && focal != mutant {
        return Err(domain(format!("focal {focal} is neither incumbent {incumbent} nor mutant {mutant}")));
    }
    if !(0.0..1.0).contains(&mu) {
        return Err(domain(format!("mutant share mu={mu} must lie in [0, 1)")));
    }
    for s in [incumbent, mutant] {
        params.strategy(s.k())?;
    }
    let mut total = 0.0;
    for j in 0..n {
        let weight = group_comp_pmf(j, 1.0 - mu, n)?;
        if weight == 0.0 {
            continue;
        }
        let mut members = Vec::with_capacity(n as usize);
        members.push(focal);
        members.extend(std::iter::repeat_n(incumbent, j as usize));
        members.extend(std::iter::repeat_n(mutant, (n - 1 - j) as usize));
        total += weight * errorfree_group_value(&members, 0, params, delta)?;
    }
    Ok(total)
}

/// Expected total payoff of the focal player under mistakes.
///
/// `epsilon = 0` falls back to the deterministic error-free dynamics (and so
/// needs `delta < 1`). For `epsilon > 0` the closed forms accept `delta = 1`
/// whenever they stay finite.
pub fn v_err(ctx: &FocalContext, params: &GameParams, env: &EnvParams) -> Result<f64> {
    let n = params.n();
    let case = ctx.case(n)?;
    if ctx.mode == Mode::Exact {
        return exact::literal_value(ctx.incumbent, ctx.focal, params, env);
    }
    let (delta, eps) = (env.delta(), env.epsilon());
    if eps == 0.0 {
        let mut members = vec![ctx.incumbent; n as usize];
        members[0] = ctx.focal;
        return errorfree_group_value(&members, 0, params, delta);
    }

    let k = ctx.incumbent.k();
    let f = ctx.focal.k();
    let fc = oneshot_payoff_err(Action::Cooperate, n - 1, params, eps)?;
    match case {
        Case::HardestHomogeneous | Case::Homogeneous => {
            solve(fc, homogeneous_breakdown(k, n, eps), delta)
        }
        Case::DefectorAmongHardest => oneshot_payoff_err(Action::Defect, n - 1, params, eps),
        Case::DefectorAmongTolerant => defector_value(k, params, env),
        Case::HarderMutant => {
            // Focal withdraws first; it then free-rides as a defector until the
            // incumbents break down.
            let focal_limit = n - 1 - f;
            let inc_limit = ctx.incumbent.max_tolerated(n).unwrap_or(n);
            let to_defector = binomial::range_prob(n, focal_limit + 1, inc_limit, eps);
            let leave = binomial::upper_tail(n, focal_limit + 1, eps);
            let as_defector = defector_value(k, params, env)?;
            solve(fc + delta * to_defector * as_defector, leave, delta)
        }
        Case::SofterAmongHardest | Case::SofterMutant => {
            // Incumbents break down first; the focal may cooperate alone.
            let inc_limit = n - 1 - k;
            let focal_limit = ctx.focal.max_tolerated(n).unwrap_or(0);
            let solitary = binomial::range_prob(n, inc_limit + 1, focal_limit, eps);
            let leave = binomial::upper_tail(n, inc_limit + 1, eps);
            let alone = solitary_value(ctx.focal, params, env)?;
            solve(fc + delta * solitary * alone, leave, delta)
        }
    }
}

/// Probability that a homogeneous `T_k` group breaks down after a round:
/// either more than `n-k-1` co-member mistakes, or exactly `n-k-1` plus the
/// focal player's own. `T_0` never breaks down.
fn homogeneous_breakdown(k: u32, n: u32, eps: f64) -> f64 {
    if k == 0 {
        return 0.0;
    }
    let edge = n - 1 - k;
    eps * binomial::pmf(n - 1, edge, eps) + binomial::upper_tail(n - 1, edge + 1, eps)
}

/// `T_n` among `T_k`: free-rides while the co-members' mistakes plus its own
/// defection stay within tolerance.
fn defector_value(k: u32, params: &GameParams, env: &EnvParams) -> Result<f64> {
    let n = params.n();
    let fd = oneshot_payoff_err(Action::Defect, n - 1, params, env.epsilon())?;
    let leave = if k == 0 {
        0.0
    } else {
        binomial::upper_tail(n - 1, n - 1 - k, env.epsilon())
    };
    solve(fd, leave, env.delta())
}

/// Payoff of cooperating alone after the incumbents have withdrawn: one round
/// for any `T_{k'}` with `k' >= 1`, forever for the unconditional `T_0`.
fn solitary_value(focal: StrategyId, params: &GameParams, env: &EnvParams) -> Result<f64> {
    let alone = oneshot_payoff_err(Action::Cooperate, 0, params, env.epsilon())?;
    if focal.k() == 0 {
        solve(alone, 0.0, env.delta())
    } else {
        Ok(alone)
    }
}

fn solve(numerator: f64, leave: f64, delta: f64) -> Result<f64> {
    let denom = (1.0 - delta) + delta * leave;
    if !(denom > 0.0 && denom.is_finite()) {
        return Err(divergence(format!(
            "repeated-game denominator {denom} is not positive (delta={delta}, leave probability={leave})"
        )));
    }
    Ok(numerator / denom)
}

/// Softer mutant among `T_{n-1}` incumbents with the solitary round weighted
/// by co-member mistakes only, `sum_{q=1}^{n-k'-1} psi(n-1, q, eps)`.
///
/// This variant ignores the focal player's own mistake when deciding whether
/// the solitary round happens. The simulator's absorbing semantics reject it
/// in favour of the whole-group count used by [`v_err`]; it is kept so the
/// difference can be reported.
pub fn softer_among_hardest_others_only(
    focal: StrategyId,
    params: &GameParams,
    env: &EnvParams,
) -> Result<f64> {
    let n = params.n();
    let f = focal.k();
    if f + 1 >= n {
        return Err(domain(format!("focal k'={f} must be below n-1={}", n - 1)));
    }
    let (delta, eps) = (env.delta(), env.epsilon());
    let fc = oneshot_payoff_err(Action::Cooperate, n - 1, params, eps)?;
    let solitary = binomial::range_prob(n - 1, 1, n - 1 - f, eps);
    let alone = oneshot_payoff_err(Action::Cooperate, 0, params, eps)?;
    let leave = -(f64::from(n) * (-eps).ln_1p()).exp_m1();
    solve(fc + delta * solitary * alone, leave, delta)
}

/// Inputs of the stability discriminant `Delta(eps; k)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscriminantInputs {
    pub epsilon: f64,
    pub k: u32,
    pub delta: f64,
    pub n: u32,
}

impl DiscriminantInputs {
    pub fn new(epsilon: f64, k: u32, delta: f64, n: u32) -> Result<Self> {
        if n < 2 {
            return Err(domain(format!("group size n={n} must be at least 2")));
        }
        if !(0 < k && k < n) {
            return Err(domain(format!("k={k} must satisfy 0 < k < n={n}")));
        }
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(domain(format!("epsilon={epsilon} must lie in (0, 1)")));
        }
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(domain(format!("delta={delta} must lie in (0, 1]")));
        }
        Ok(Self { epsilon, k, delta, n })
    }
}

/// `Delta(eps; k) = delta (1-eps) psi(n-1, n-k-1, eps) / (1 - delta sum_{q<=n-k-2} psi(n-1, q, eps))`.
///
/// `T_k` repels a single defector exactly when this exceeds
/// [`crate::game::stability_threshold`].
pub fn delta_ratio(inp: &DiscriminantInputs) -> Result<f64> {
    let DiscriminantInputs { epsilon: eps, k, delta, n } = *inp;
    if k == n - 1 {
        return Ok(delta * (1.0 - eps).powi(n as i32));
    }
    let edge = n - 1 - k;
    let numer = delta * (1.0 - eps) * binomial::pmf(n - 1, edge, eps);
    let denom = (1.0 - delta) + delta * binomial::upper_tail(n - 1, edge, eps);
    if !(denom > 0.0) {
        return Err(divergence(format!("discriminant denominator {denom} is not positive")));
    }
    Ok(numer / denom)
}

/// `Delta` at `delta = 1`, written with odds `eps/(1-eps)` so it stays
/// accurate near both ends of the unit interval.
pub fn delta_ratio_limit(epsilon: f64, k: u32, n: u32) -> Result<f64> {
    let _ = DiscriminantInputs::new(epsilon, k, 1.0, n)?;
    let odds = epsilon / (1.0 - epsilon);
    let edge = n - 1 - k;
    let denom: f64 = (0..=k)
        .map(|q| binomial::choose(n - 1, edge + q) * odds.powi(q as i32))
        .sum();
    Ok((1.0 - epsilon) * binomial::choose(n - 1, edge) / denom)
}

/// The split `Delta = delta / (D1 + D2)`, with
/// `D1 = (1-delta) eps^-(n-k-1) (1-eps)^-(k+1) / C(n-1, n-k-1)` and
/// `D2 = delta sum_{q=0}^{k} C(n-1, n-k-1+q)/C(n-1, n-k-1) eps^q (1-eps)^-(q+1)`.
pub fn d_decomposition(inp: &DiscriminantInputs) -> Result<(f64, f64)> {
    let DiscriminantInputs { epsilon: eps, k, delta, n } = *inp;
    let edge = n - 1 - k;
    let base = binomial::choose(n - 1, edge);
    let ln_eps = eps.ln();
    let ln_keep = (-eps).ln_1p();
    let d1 = if delta == 1.0 {
        0.0
    } else {
        let ln = (1.0 - delta).ln() - base.ln() - f64::from(edge) * ln_eps - f64::from(k + 1) * ln_keep;
        ln.exp()
    };
    let d2 = delta
        * (0..=k)
            .map(|q| {
                let q_f = f64::from(q);
                binomial::choose(n - 1, edge + q) / base * (q_f * ln_eps - (q_f + 1.0) * ln_keep).exp()
            })
            .sum::<f64>();
    Ok((d1, d2))
}

/// `D1 + D2`, the reciprocal of `Delta / delta`.
pub fn d_total(inp: &DiscriminantInputs) -> Result<f64> {
    let (d1, d2) = d_decomposition(inp)?;
    Ok(d1 + d2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p10() -> GameParams {
        GameParams::new(10, 10.0, 5.0).unwrap()
    }

    fn env(delta: f64, eps: f64) -> EnvParams {
        EnvParams::new(delta, eps).unwrap()
    }

    fn s(k: u32) -> StrategyId {
        StrategyId::unchecked(k)
    }

    #[test]
    fn case_dispatch() {
        let n = 10;
        let c = |i, f| FocalContext::paper(s(i), s(f)).case(n).unwrap();
        assert_eq!(c(9, 9), Case::HardestHomogeneous);
        assert_eq!(c(9, 10), Case::DefectorAmongHardest);
        assert_eq!(c(9, 0), Case::SofterAmongHardest);
        assert_eq!(c(5, 5), Case::Homogeneous);
        assert_eq!(c(5, 10), Case::DefectorAmongTolerant);
        assert_eq!(c(5, 9), Case::HarderMutant);
        assert_eq!(c(5, 2), Case::SofterMutant);
        assert!(FocalContext::paper(s(10), s(9)).case(n).is_err());
        assert!(FocalContext::paper(s(9), s(11)).case(n).is_err());
    }

    #[test]
    fn errorfree_values() {
        let p = p10();
        assert!((v_errorfree(s(9), s(9), 9, &p, 0.9).unwrap() - 50.0).abs() < 1e-12);
        assert!((v_errorfree(s(10), s(9), 9, &p, 0.9).unwrap() - 9.0).abs() < 1e-12);
        assert!((v_errorfree(s(9), s(9), 3, &p, 0.9).unwrap() + 1.0).abs() < 1e-12);
        assert!(v_errorfree(s(9), s(9), 9, &p, 1.0).is_err());
        assert!(v_errorfree(s(4), s(9), 9, &p, 0.9).is_err());
    }

    #[test]
    fn group_evaluator_matches_two_type_formula() {
        let p = GameParams::new(6, 4.0, 1.5).unwrap();
        for k in 0..6 {
            for j in 0..6 {
                let mut members = vec![s(k); 1 + j as usize];
                members.extend(vec![s(6); 5 - j as usize]);
                let tk = errorfree_group_value(&members, 0, &p, 0.8).unwrap();
                assert_eq!(tk, v_errorfree(s(k), s(k), j, &p, 0.8).unwrap(), "T_k k={k} j={j}");
                members[0] = s(6);
                let tn = errorfree_group_value(&members, 0, &p, 0.8).unwrap();
                assert_eq!(tn, v_errorfree(s(6), s(k), j, &p, 0.8).unwrap(), "T_n k={k} j={j}");
            }
        }
    }

    #[test]
    fn w_errorfree_homogeneous() {
        let p = p10();
        let hardest = w_errorfree(s(9), s(9), s(10), 0.0, &p, 0.9).unwrap();
        assert!((hardest - 50.0).abs() < 1e-12);
        assert!((w_errorfree(s(10), s(9), s(10), 0.0, &p, 0.9).unwrap() - 9.0).abs() < 1e-12);
        assert_eq!(w_errorfree(s(7), s(9), s(7), 0.0, &p, 0.9).unwrap(), hardest);
        // Conditional cooperators stay indistinguishable at every mutant share.
        for mu in [0.1, 0.5, 0.9] {
            let a = w_errorfree(s(9), s(9), s(7), mu, &p, 0.9).unwrap();
            let b = w_errorfree(s(7), s(9), s(7), mu, &p, 0.9).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn closed_form_examples() {
        let p = p10();
        let e = env(0.9, 0.05);
        let v = |i, f| v_err(&FocalContext::paper(s(i), s(f)), &p, &e).unwrap();
        assert!((v(9, 9) - 4.75 / (1.0 - 0.9 * 0.95f64.powi(10))).abs() < 1e-12);
        assert!((v(9, 9) - 10.3006).abs() < 1e-4);
        assert!((v(9, 10) - 8.55).abs() < 1e-12);
        // Solitary round weighted by the whole-group mistake count psi(n, 1).
        let psi_n1 = 10.0 * 0.05 * 0.95f64.powi(9);
        let expect = (4.75 + psi_n1 * 0.9 * 0.95 * (1.0 - 5.0)) / (1.0 - 0.9 * 0.95f64.powi(10));
        assert!((v(9, 8) - expect).abs() < 1e-12);
        assert!((v(9, 8) - 7.963_524).abs() < 1e-6);
    }

    #[test]
    fn others_only_variant_value() {
        let p = p10();
        let e = env(0.9, 0.05);
        let v = softer_among_hardest_others_only(s(8), &p, &e).unwrap();
        assert!((v - 8.086_529).abs() < 1e-6);
        assert!(softer_among_hardest_others_only(s(9), &p, &e).is_err());
    }

    #[test]
    fn delta_one_is_limit_safe() {
        let p = p10();
        let e = env(1.0, 0.05);
        for (i, f) in [(9, 9), (9, 10), (9, 5), (5, 5), (5, 10), (5, 7), (5, 2)] {
            let v = v_err(&FocalContext::paper(s(i), s(f)), &p, &e).unwrap();
            assert!(v.is_finite(), "({i},{f}) -> {v}");
        }
        // The unconditional cooperator keeps paying the solitary cost forever.
        assert!(v_err(&FocalContext::paper(s(5), s(0)), &p, &e).is_err());
        assert!(v_err(&FocalContext::paper(s(9), s(9)), &p, &env(1.0, 0.0)).is_err());
    }

    #[test]
    fn discriminant_examples() {
        let inp = DiscriminantInputs::new(0.05, 9, 0.9, 10).unwrap();
        assert!((delta_ratio(&inp).unwrap() - 0.538_863).abs() < 1e-6);
        assert!((delta_ratio_limit(0.05, 9, 10).unwrap() - 0.598_737).abs() < 1e-6);
        assert!((delta_ratio_limit(0.5, 1, 3).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let (d1, d2) = d_decomposition(&inp).unwrap();
        assert!(d1 > 0.0 && d2 > 0.0);
        assert!((0.9 / (d1 + d2) - 0.538_863).abs() < 1e-6);
        let (d1, _) = d_decomposition(&DiscriminantInputs::new(0.3, 4, 1.0, 10).unwrap()).unwrap();
        assert_eq!(d1, 0.0);
        assert!(DiscriminantInputs::new(0.0, 4, 0.9, 10).is_err());
        assert!(DiscriminantInputs::new(0.5, 10, 0.9, 10).is_err());
        assert!(DiscriminantInputs::new(0.5, 0, 0.9, 10).is_err());
    }

    #[test]
    fn discriminant_limits() {
        for k in 1..9 {
            let hi = delta_ratio(&DiscriminantInputs::new(1e-9, k, 1.0, 10).unwrap()).unwrap();
            let lo = delta_ratio(&DiscriminantInputs::new(1.0 - 1e-9, k, 1.0, 10).unwrap()).unwrap();
            assert!((hi - 1.0).abs() < 1e-6, "k={k} hi={hi}");
            assert!(lo < 1e-6, "k={k} lo={lo}");
        }
    }
}
