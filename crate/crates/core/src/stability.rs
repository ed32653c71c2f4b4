//! Stability of monomorphic conditional-cooperator populations, the mistake
//! rate bands in which they are evolutionarily stable, and `Delta` sweeps.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{self, DiscriminantInputs, FocalContext};
use crate::error::{domain, Error, Result};
use crate::game::{stability_threshold, EnvParams, GameParams, StrategyId};
use crate::roots;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    EvolutionarilyStable,
    NeutrallyStable,
    Unstable,
}

/// Payoff gap `W_incumbent - W_invader` against one candidate invader.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub invader: StrategyId,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityVerdict {
    pub k: StrategyId,
    pub verdict: Verdict,
    pub witnesses: Vec<Witness>,
}

impl StabilityVerdict {
    fn from_witnesses(k: StrategyId, witnesses: Vec<Witness>) -> Self {
        let verdict = if witnesses.iter().any(|w| w.gap < 0.0) {
            Verdict::Unstable
        } else if witnesses.iter().any(|w| w.gap == 0.0) {
            Verdict::NeutrallyStable
        } else {
            Verdict::EvolutionarilyStable
        };
        Self { k, verdict, witnesses }
    }

    /// Strategies that strictly out-earn the incumbent.
    pub fn invaders(&self) -> impl Iterator<Item = StrategyId> + '_ {
        self.witnesses.iter().filter(|w| w.gap < 0.0).map(|w| w.invader)
    }

    pub fn gap_against(&self, invader: StrategyId) -> Option<f64> {
        self.witnesses.iter().find(|w| w.invader == invader).map(|w| w.gap)
    }
}

fn check_conditional(k: StrategyId, n: u32) -> Result<()> {
    if !(1..n).contains(&k.k()) {
        return Err(domain(format!("k out of range: {k} must satisfy 1 <= k <= n-1 = {}", n - 1)));
    }
    Ok(())
}

/// Compares the incumbent `T_k` against each of the other `n` strategies as
/// a single mutant. Ties at `epsilon = 0` are exact.
pub fn classify(k: StrategyId, params: &GameParams, env: &EnvParams) -> Result<StabilityVerdict> {
    let n = params.n();
    check_conditional(k, n)?;
    let mut witnesses = Vec::with_capacity(n as usize);
    if env.epsilon() == 0.0 {
        let delta = env.delta();
        let own = analytic::w_errorfree(k, k, k, 0.0, params, delta)?;
        for m in params.strategies().filter(|m| *m != k) {
            let theirs = analytic::w_errorfree(m, k, m, 0.0, params, delta)?;
            witnesses.push(Witness { invader: m, gap: own - theirs });
        }
    } else {
        let own = analytic::v_err(&FocalContext::paper(k, k), params, env)?;
        for m in params.strategies().filter(|m| *m != k) {
            let theirs = analytic::v_err(&FocalContext::paper(k, m), params, env)?;
            witnesses.push(Witness { invader: m, gap: own - theirs });
        }
    }
    Ok(StabilityVerdict::from_witnesses(k, witnesses))
}

/// `delta* = (c - b/n) / (b - b/n)`: above it the error-free `T_{n-1}`
/// population repels the defector.
pub fn min_delta_for_stability(params: &GameParams) -> f64 {
    let share = params.share();
    (params.c() - share) / (params.b() - share)
}

/// Mistake rates `(eps_lower, eps_upper)` where `T_k` is evolutionarily
/// stable at continuation probability `delta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdBand {
    pub k: StrategyId,
    pub eps_lower: f64,
    pub eps_upper: f64,
    pub delta: f64,
    pub empty: bool,
}

impl ThresholdBand {
    fn empty(k: StrategyId, delta: f64) -> Self {
        Self { k, eps_lower: 0.0, eps_upper: 0.0, delta, empty: true }
    }

    pub fn midpoint(&self) -> Option<f64> {
        (!self.empty).then_some(0.5 * (self.eps_lower + self.eps_upper))
    }

    pub fn contains(&self, epsilon: f64) -> bool {
        !self.empty && self.eps_lower < epsilon && epsilon < self.eps_upper
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(domain(format!("delta={delta} must lie in (0, 1]")));
    }
    Ok(())
}

/// `Delta(eps; k)`, using the limit form at `delta = 1`.
pub fn discriminant(epsilon: f64, k: u32, delta: f64, n: u32) -> Result<f64> {
    if delta == 1.0 && k + 1 < n {
        analytic::delta_ratio_limit(epsilon, k, n)
    } else {
        analytic::delta_ratio(&DiscriminantInputs::new(epsilon, k, delta, n)?)
    }
}

const SCAN_POINTS: usize = 1024;
const SCAN_LOGIT: f64 = 28.0;

/// Band of mistake rates where `Delta(eps; k)` exceeds `1 - ratio`.
///
/// Brackets come from a logit-spaced scan (plus the peak of `Delta` when it
/// is interior); each edge is then bisected to full floating-point
/// precision. More than one positive stretch is reported as a numeric error.
pub fn ess_epsilon_band(k: StrategyId, params: &GameParams, delta: f64) -> Result<ThresholdBand> {
    let n = params.n();
    check_conditional(k, n)?;
    check_delta(delta)?;
    let threshold = stability_threshold(params);
    let g = |eps: f64| discriminant(eps, k.k(), delta, n).map(|d| d - threshold);

    let mut grid = roots::logistic_grid(SCAN_POINTS, -SCAN_LOGIT, SCAN_LOGIT);
    if delta < 1.0 {
        if let Some(peak) = epsilon_star(k, delta, n)? {
            grid.push(peak);
            grid.sort_by(f64::total_cmp);
            grid.dedup();
        }
    }
    let values = grid.iter().map(|e| g(*e)).collect::<Result<Vec<_>>>()?;

    let mut stretches: Vec<(usize, usize)> = Vec::new();
    let mut open: Option<usize> = None;
    for (i, v) in values.iter().enumerate() {
        match (open, *v > 0.0) {
            (None, true) => open = Some(i),
            (Some(s), false) => {
                stretches.push((s, i - 1));
                open = None;
            }
            _ => {}
        }
    }
    if let Some(s) = open {
        stretches.push((s, values.len() - 1));
    }
    let (first, last) = match stretches.as_slice() {
        [] => return Ok(ThresholdBand::empty(k, delta)),
        [one] => *one,
        _ => {
            return Err(Error::Numeric {
                message: format!("{} separate stability stretches found for {k}", stretches.len()),
                iterations: 0,
                lo: grid[stretches[0].0],
                hi: grid[stretches[stretches.len() - 1].1],
            })
        }
    };
    if last == values.len() - 1 {
        return Err(Error::Numeric {
            message: format!("stability condition still holds at eps={} for {k}", grid[last]),
            iterations: 0,
            lo: grid[first],
            hi: grid[last],
        });
    }
    let root = |lo: f64, hi: f64| {
        roots::bisect(|e| g(e).unwrap_or(f64::NAN), lo, hi, 0.0)
    };
    let eps_lower = if first == 0 { 0.0 } else { root(grid[first - 1], grid[first])? };
    let eps_upper = root(grid[last], grid[last + 1])?;
    Ok(ThresholdBand { k, eps_lower, eps_upper, delta, empty: false })
}

/// Interior minimiser of `D1 + D2` (the peak of `Delta(.; k)`), or `None`
/// for the hardest strategy, whose `Delta` decreases from `eps = 0`.
pub fn epsilon_star(k: StrategyId, delta: f64, n: u32) -> Result<Option<f64>> {
    if n < 2 {
        return Err(domain(format!("group size n={n} must be at least 2")));
    }
    check_conditional(k, n)?;
    if !(delta > 0.0 && delta < 1.0) {
        return Err(domain(format!("delta={delta} must lie in (0, 1)")));
    }
    if k.k() == n - 1 {
        return Ok(None);
    }
    let total = |t: f64| {
        let eps = 1.0 / (1.0 + (-t).exp());
        DiscriminantInputs::new(eps, k.k(), delta, n)
            .and_then(|inp| analytic::d_total(&inp))
            .map(f64::ln)
            .unwrap_or(f64::INFINITY)
    };
    let t = roots::golden_section_min(total, -SCAN_LOGIT, SCAN_LOGIT, 1e-12)?;
    if t <= -SCAN_LOGIT + 1e-6 || t >= SCAN_LOGIT - 1e-6 {
        return Err(Error::Numeric {
            message: format!("minimiser of D1+D2 for {k} sits on the search boundary"),
            iterations: roots::MAX_ITERATIONS,
            lo: -SCAN_LOGIT,
            hi: SCAN_LOGIT,
        });
    }
    Ok(Some(1.0 / (1.0 + (-t).exp())))
}

/// Single-crossing check between `Delta(.; k)` and `Delta(.; k+1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossingCheck {
    pub k: StrategyId,
    pub crossings: usize,
    /// Grid location of the first crossing, if any.
    pub at: Option<f64>,
    /// Whether `Delta(.; k+1)` is decreasing at the crossing.
    pub descending: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandOrderingReport {
    pub delta: f64,
    pub threshold: f64,
    /// Bands for `k = n-1` down to `1`.
    pub bands: Vec<ThresholdBand>,
    pub upper_increasing: bool,
    pub lower_increasing: bool,
    pub crossings: Vec<CrossingCheck>,
    pub single_crossing: bool,
    pub any_nonempty: bool,
    pub ordered: bool,
}

pub const ORDERING_GRID_POINTS: usize = 10_000;

fn strictly_increasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[0] < w[1])
}

/// Computes every band and checks that both edges grow as `k` decreases
/// (with `eps_lower = 0` for the hardest strategy) and that consecutive
/// `Delta` curves cross once, on the descending branch of the higher curve.
/// At `delta = 1` the curves are nested and no crossing is expected.
pub fn band_ordering_report(params: &GameParams, delta: f64) -> Result<BandOrderingReport> {
    check_delta(delta)?;
    let n = params.n();
    let bands = (1..n)
        .rev()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|k| ess_epsilon_band(StrategyId::unchecked(k), params, delta))
        .collect::<Result<Vec<_>>>()?;
    let nonempty: Vec<&ThresholdBand> = bands.iter().filter(|b| !b.empty).collect();
    let uppers: Vec<f64> = nonempty.iter().map(|b| b.eps_upper).collect();
    let lowers: Vec<f64> = nonempty.iter().map(|b| b.eps_lower).collect();
    let hardest_ok = nonempty.first().is_none_or(|b| b.k.k() != n - 1 || b.eps_lower == 0.0);
    let lower_increasing = hardest_ok
        && if delta < 1.0 {
            strictly_increasing(&lowers)
        } else {
            lowers.iter().all(|l| *l == 0.0)
        };

    let grid = roots::linear_grid(ORDERING_GRID_POINTS, 1e-4, 1.0 - 1e-4);
    let curves: Vec<Vec<f64>> = (1..n)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|k| grid.iter().map(|e| discriminant(*e, k, delta, n)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    let mut crossings = Vec::new();
    for k in 1..n - 1 {
        let (lower, higher) = (&curves[(k - 1) as usize], &curves[k as usize]);
        let diff: Vec<f64> = lower.iter().zip(higher).map(|(a, b)| a - b).collect();
        let changes = roots::sign_changes(&diff);
        let at = changes.first().map(|i| grid[*i]);
        let descending = changes.first().is_some_and(|i| higher[*i + 1] < higher[*i]);
        crossings.push(CrossingCheck { k: StrategyId::unchecked(k), crossings: changes.len(), at, descending });
    }
    let single_crossing = if delta < 1.0 {
        crossings.iter().all(|c| c.crossings == 1 && c.descending)
    } else {
        crossings.iter().all(|c| c.crossings == 0)
    };
    let upper_increasing = strictly_increasing(&uppers);
    Ok(BandOrderingReport {
        delta,
        threshold: stability_threshold(params),
        any_nonempty: !nonempty.is_empty(),
        ordered: upper_increasing && lower_increasing && single_crossing,
        bands,
        upper_increasing,
        lower_increasing,
        crossings,
        single_crossing,
    })
}

/// `Delta` evaluated over a `(delta, k, eps)` grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub n: u32,
    pub deltas: Vec<f64>,
    pub ks: Vec<u32>,
    pub epsilons: Vec<f64>,
    /// `values[d][k][e]` follows the order of `deltas`, `ks` and `epsilons`.
    pub values: Vec<Vec<Vec<f64>>>,
    /// `1 - ratio` when payoff constants were supplied.
    pub threshold: Option<f64>,
}

pub const DEFAULT_GRID_POINTS: usize = 1000;

/// Evenly spaced grid on `[1e-4, 1 - 1e-4]`; the open ends are excluded since
/// `D1` diverges there.
pub fn default_epsilon_grid(points: usize) -> Vec<f64> {
    roots::linear_grid(points, 1e-4, 1.0 - 1e-4)
}

pub fn sweep_delta_curves(
    n: u32,
    deltas: &[f64],
    ks: &[u32],
    epsilons: &[f64],
    params: Option<&GameParams>,
) -> Result<SweepTable> {
    if n < 2 {
        return Err(domain(format!("group size n={n} must be at least 2")));
    }
    if let Some(p) = params {
        if p.n() != n {
            return Err(domain(format!("payoff constants are for n={}, sweep uses n={n}", p.n())));
        }
    }
    for d in deltas {
        check_delta(*d)?;
    }
    if let Some(k) = ks.iter().find(|k| !(1..n).contains(*k)) {
        return Err(domain(format!("k out of range: {k} must lie in [1, {}]", n - 1)));
    }
    if epsilons.is_empty() || !strictly_increasing(epsilons) {
        return Err(domain("epsilon grid must be non-empty and strictly increasing"));
    }
    if epsilons[0] <= 0.0 || epsilons[epsilons.len() - 1] >= 1.0 {
        return Err(domain("epsilon grid must lie inside (0, 1)"));
    }
    let values = deltas
        .par_iter()
        .map(|d| {
            ks.par_iter()
                .map(|k| epsilons.iter().map(|e| discriminant(*e, *k, *d, n)).collect::<Result<Vec<_>>>())
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepTable {
        n,
        deltas: deltas.to_vec(),
        ks: ks.to_vec(),
        epsilons: epsilons.to_vec(),
        values,
        threshold: params.map(stability_threshold),
    })
}

impl SweepTable {
    pub const CSV_HEADER: &'static str = "delta,k,epsilon,Delta,threshold";

    pub fn curve(&self, delta_index: usize, k: u32) -> Option<&[f64]> {
        let ki = self.ks.iter().position(|x| *x == k)?;
        self.values.get(delta_index).map(|d| d[ki].as_slice())
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{}", Self::CSV_HEADER)?;
        let threshold = self.threshold.map(|t| t.to_string()).unwrap_or_default();
        for (d, per_k) in self.deltas.iter().zip(&self.values) {
            for (k, curve) in self.ks.iter().zip(per_k) {
                for (e, v) in self.epsilons.iter().zip(curve) {
                    writeln!(out, "{d},{k},{e},{v},{threshold}")?;
                }
            }
        }
        Ok(())
    }

    /// A gnuplot script drawing one panel per `delta` from the CSV at `csv_path`.
    pub fn gnuplot_script(&self, csv_path: &str) -> String {
        let mut s = String::new();
        s.push_str("set datafile separator ','\nset key off\nset xlabel 'epsilon'\nset ylabel 'Delta'\n");
        s.push_str(&format!("set multiplot layout 1,{}\n", self.deltas.len().max(1)));
        for d in &self.deltas {
            s.push_str(&format!("set title 'delta = {d}'\nplot "));
            let mut parts: Vec<String> = self
                .ks
                .iter()
                .map(|k| {
                    format!("'{csv_path}' using ($1=={d} && $2=={k} ? $3 : 1/0):4 with lines")
                })
                .collect();
            if let Some(t) = self.threshold {
                parts.push(format!("{t} with lines dashtype 2"));
            }
            s.push_str(&parts.join(", \\\n     "));
            s.push('\n');
        }
        s.push_str("unset multiplot\n");
        s
    }
}
