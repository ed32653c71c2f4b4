//! Literal-observation evaluator for a single focal player among identical
//! incumbents.
//!
//! Every player counts the realized cooperators among the other `n-1`
//! members, so a player whose own cooperation failed sees one more
//! cooperator than a player who cooperated successfully. Breakdown is not
//! absorbing: a lucky round can restart cooperation. Incumbents are
//! exchangeable, so the state is (focal intends C, number of incumbents
//! intending C) and the value solves `(I - delta P) V = R`.

use nalgebra::{DMatrix, DVector};

use crate::binomial;
use crate::error::{domain, Result};
use crate::game::{EnvParams, GameParams, StrategyId};

/// Whether a `T_k` player intends to cooperate after seeing `others`
/// realized cooperators among its co-members.
pub(crate) fn next_intention(k: u32, others: u32, n: u32) -> bool {
    k < n && others >= k
}

/// Expected total payoff of `focal` among `n-1` copies of `incumbent` under
/// literal observation. Needs `delta < 1`.
pub fn literal_value(
    incumbent: StrategyId,
    focal: StrategyId,
    params: &GameParams,
    env: &EnvParams,
) -> Result<f64> {
    env.require_finite_horizon()?;
    let n = params.n();
    let (ki, kf) = (incumbent.k(), focal.k());
    if ki > n || kf > n {
        return Err(domain(format!("k out of range: incumbent {incumbent}, focal {focal}, n={n}")));
    }
    let (b, c, nf) = (params.b(), params.c(), f64::from(n));
    let (delta, eps) = (env.delta(), env.epsilon());
    let inc = (n - 1) as usize;
    let states = 2 * (inc + 1);
    let index = |f: bool, a: usize| usize::from(f) * (inc + 1) + a;

    let mut system = DMatrix::<f64>::identity(states, states);
    let mut reward = DVector::<f64>::zeros(states);
    for f in [false, true] {
        for a in 0..=inc {
            let row = index(f, a);
            let focal_outcomes: &[(bool, f64)] =
                if f { &[(true, 1.0 - eps), (false, eps)] } else { &[(false, 1.0)] };
            for &(fr, pf) in focal_outcomes {
                if pf == 0.0 {
                    continue;
                }
                for r in 0..=a as u32 {
                    let pr = pf * binomial::pmf(a as u32, r, 1.0 - eps);
                    if pr == 0.0 {
                        continue;
                    }
                    let total = r + u32::from(fr);
                    reward[row] += pr * (b * f64::from(total) / nf - if fr { c } else { 0.0 });
                    let from_coop = if next_intention(ki, total.saturating_sub(1), n) { r } else { 0 };
                    let from_def =
                        if next_intention(ki, total, n) { n - 1 - r } else { 0 };
                    let a_next = (from_coop + from_def) as usize;
                    let f_next = next_intention(kf, total - u32::from(fr), n);
                    system[(row, index(f_next, a_next))] -= delta * pr;
                }
            }
        }
    }
    let solution = system
        .lu()
        .solve(&reward)
        .ok_or_else(|| domain("literal-observation system is singular"))?;
    let start = index(kf < n, if ki < n { inc } else { 0 });
    Ok(solution[start])
}
