//! Self-check suite comparing closed forms with brute-force enumeration and
//! the Monte Carlo simulator.

use serde::{Deserialize, Serialize};

use crate::analytic::{self, Case, DiscriminantInputs, FocalContext};
use crate::error::Result;
use crate::game::{
    coop_defect_ratio, oneshot_payoff_err, Action, EnvParams, GameParams, StrategyId,
};
use crate::sim::{estimate_v, Semantics};
use crate::stability::{self, Verdict};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), passed, detail: detail.into() }
    }
}

/// Expected one-shot payoff by summing over all `2^j` (or `2^(j+1)`)
/// mistake patterns.
pub fn brute_force_oneshot(action: Action, j: u32, params: &GameParams, epsilon: f64) -> f64 {
    let own_intends = action == Action::Cooperate;
    let players = j + u32::from(own_intends);
    let (b, c, n) = (params.b(), params.c(), f64::from(params.n()));
    let mut total = 0.0;
    for pattern in 0u64..(1 << players) {
        let mut prob = 1.0;
        let mut coops = 0;
        for i in 0..players {
            if (pattern >> i) & 1 == 1 {
                prob *= epsilon;
            } else {
                prob *= 1.0 - epsilon;
                coops += 1;
            }
        }
        let own = own_intends && pattern & 1 == 0;
        total += prob * (b * f64::from(coops) / n - if own { c } else { 0.0 });
    }
    total
}

/// One representative `(incumbent, focal)` pair per closed-form case.
pub fn representative_pairs(n: u32) -> Vec<(Case, StrategyId, StrategyId)> {
    let s = StrategyId::unchecked;
    let mid = n / 2;
    let hard = n - 1;
    vec![
        (Case::HardestHomogeneous, s(hard), s(hard)),
        (Case::DefectorAmongHardest, s(hard), s(n)),
        (Case::SofterAmongHardest, s(hard), s(hard - 1)),
        (Case::Homogeneous, s(mid), s(mid)),
        (Case::DefectorAmongTolerant, s(mid), s(n)),
        (Case::HarderMutant, s(mid), s(hard)),
        (Case::SofterMutant, s(mid), s(mid - 1)),
    ]
}

fn monte_carlo_checks(
    ns: &[u32],
    envs: &[(f64, f64)],
    replications: u64,
    seed: u64,
) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for &n in ns {
        let params = GameParams::new(n, f64::from(n), 0.5 * f64::from(n))?;
        for &(delta, eps) in envs {
            let env = EnvParams::new(delta, eps)?;
            for (case, inc, focal) in representative_pairs(n) {
                let value = analytic::v_err(&FocalContext::paper(inc, focal), &params, &env)?;
                let est = estimate_v(inc, focal, &params, &env, replications, Semantics::PaperAbsorbing, seed)?;
                let z = est.z_score(value);
                out.push(Check::new(
                    format!("monte carlo ({}) n={n} delta={delta} eps={eps}", case.letter()),
                    z.abs() <= 3.0,
                    format!("closed form {value:.6}, estimate {:.6} +/- {:.6}, z = {z:.2}", est.mean, est.std_error),
                ));
            }
        }
    }
    Ok(out)
}

/// Runs the suite. `quick` trims the Monte Carlo grid and replication count.
pub fn run_suite(quick: bool) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let p10 = GameParams::new(10, 10.0, 5.0)?;
    let s = StrategyId::unchecked;

    let small = GameParams::new(8, 6.0, 2.5)?;
    let mut worst: f64 = 0.0;
    for j in 0..8 {
        for eps in [0.0, 0.01, 0.2, 0.7] {
            for a in [Action::Cooperate, Action::Defect] {
                let closed = oneshot_payoff_err(a, j, &small, eps)?;
                worst = worst.max((closed - brute_force_oneshot(a, j, &small, eps)).abs());
            }
        }
    }
    checks.push(Check::new("one-shot payoff vs enumeration", worst < 1e-12, format!("max error {worst:.2e}")));

    let mut worst: f64 = 0.0;
    for eps in [0.001, 0.05, 0.3, 0.9] {
        let r = oneshot_payoff_err(Action::Cooperate, 9, &p10, eps)?
            / oneshot_payoff_err(Action::Defect, 9, &p10, eps)?;
        worst = worst.max((r - coop_defect_ratio(&p10)).abs());
    }
    checks.push(Check::new("cooperation/defection ratio identity", worst < 1e-12, format!("max error {worst:.2e}")));

    let env = EnvParams::new(0.9, 0.05)?;
    for (inc, focal, expect) in [(9, 9, 10.300_632), (9, 10, 8.55), (9, 8, 7.963_524)] {
        let v = analytic::v_err(&FocalContext::paper(s(inc), s(focal)), &p10, &env)?;
        checks.push(Check::new(
            format!("closed form T_{focal} among T_{inc}"),
            (v - expect).abs() < 1e-6,
            format!("{v:.6} vs {expect}"),
        ));
    }

    let mut worst: f64 = 0.0;
    for k in 1..10 {
        for eps in [0.01, 0.2, 0.6] {
            for delta in [0.8, 0.95, 1.0] {
                let inp = DiscriminantInputs::new(eps, k, delta, 10)?;
                let (d1, d2) = analytic::d_decomposition(&inp)?;
                let direct = analytic::delta_ratio(&inp)?;
                worst = worst.max((delta / (d1 + d2) - direct).abs());
            }
        }
    }
    checks.push(Check::new("D1 + D2 reconstruction", worst < 1e-10, format!("max error {worst:.2e}")));

    let band = stability::ess_epsilon_band(s(9), &p10, 0.9)?;
    let closed = 1.0 - (4.0 / (9.0 * 0.9f64)).powf(0.1);
    checks.push(Check::new(
        "hardest band edge",
        band.eps_lower == 0.0 && (band.eps_upper - closed).abs() < 1e-10,
        format!("({}, {}) vs (0, {closed})", band.eps_lower, band.eps_upper),
    ));

    let v0 = stability::classify(s(9), &p10, &EnvParams::new(0.9, 0.0)?)?;
    let v1 = stability::classify(s(5), &p10, &EnvParams::new(0.9, 0.0)?)?;
    let v2 = stability::classify(s(9), &p10, &env)?;
    checks.push(Check::new(
        "stability verdicts",
        v0.verdict == Verdict::NeutrallyStable
            && v1.verdict == Verdict::Unstable
            && v2.verdict == Verdict::EvolutionarilyStable,
        format!("{:?}, {:?}, {:?}", v0.verdict, v1.verdict, v2.verdict),
    ));

    let p4 = GameParams::new(4, 4.0, 2.0)?;
    let e4 = EnvParams::new(0.85, 0.1)?;
    let exact = analytic::v_err(&FocalContext::new(s(2), s(2), analytic::Mode::Exact), &p4, &e4)?;
    let reps = if quick { 20_000 } else { 100_000 };
    let est = estimate_v(s(2), s(2), &p4, &e4, reps, Semantics::Literal, 7)?;
    checks.push(Check::new(
        "literal evaluator vs literal simulation",
        est.brackets(exact, 3.0),
        format!("exact {exact:.6}, estimate {:.6} +/- {:.6}", est.mean, est.std_error),
    ));

    if quick {
        checks.extend(monte_carlo_checks(&[10], &[(0.9, 0.05)], 20_000, 1)?);
    } else {
        let envs: Vec<(f64, f64)> = [0.8, 0.95]
            .iter()
            .flat_map(|d| [0.02, 0.05, 0.1].map(|e| (*d, e)))
            .collect();
        checks.extend(monte_carlo_checks(&[4, 10], &envs, 100_000, 1)?);
    }
    Ok(checks)
}
