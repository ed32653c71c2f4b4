//! Python bindings for `pgg_evo`.

use pgg_evo::analytic::{self, DiscriminantInputs, FocalContext, Mode};
use pgg_evo::sim::{self, Semantics, SimConfig};
use pgg_evo::stability::{self, Verdict};
use pgg_evo::{game, EnvParams, Error, GameParams, StrategyId};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn to_py(err: Error) -> PyErr {
    match err {
        Error::Domain(_) | Error::Config(_) | Error::Json(_) => PyValueError::new_err(err.to_string()),
        _ => PyRuntimeError::new_err(err.to_string()),
    }
}

fn game_params(n: u32, b: f64, c: f64) -> PyResult<GameParams> {
    GameParams::new(n, b, c).map_err(to_py)
}

fn env_params(delta: f64, epsilon: f64) -> PyResult<EnvParams> {
    EnvParams::new(delta, epsilon).map_err(to_py)
}

fn strategy(k: u32, n: u32) -> PyResult<StrategyId> {
    StrategyId::new(k, n).map_err(to_py)
}

fn parse_mode(mode: &str) -> PyResult<Mode> {
    match mode {
        "paper" => Ok(Mode::Paper),
        "exact" => Ok(Mode::Exact),
        other => Err(PyValueError::new_err(format!("unknown mode {other:?}"))),
    }
}

fn parse_semantics(semantics: &str) -> PyResult<Semantics> {
    match semantics {
        "paper_absorbing" | "paper-absorbing" => Ok(Semantics::PaperAbsorbing),
        "literal" => Ok(Semantics::Literal),
        other => Err(PyValueError::new_err(format!("unknown semantics {other:?}"))),
    }
}

/// Expected total payoff of `T_focal_k` among `n-1` copies of `T_incumbent_k`.
#[pyfunction]
#[pyo3(signature = (n, b, c, delta, epsilon, incumbent_k, focal_k, mode = "paper"))]
#[allow(clippy::too_many_arguments)]
fn payoff(
    n: u32,
    b: f64,
    c: f64,
    delta: f64,
    epsilon: f64,
    incumbent_k: u32,
    focal_k: u32,
    mode: &str,
) -> PyResult<f64> {
    let ctx = FocalContext::new(strategy(incumbent_k, n)?, strategy(focal_k, n)?, parse_mode(mode)?);
    analytic::v_err(&ctx, &game_params(n, b, c)?, &env_params(delta, epsilon)?).map_err(to_py)
}

#[pyfunction]
fn delta_ratio(epsilon: f64, k: u32, delta: f64, n: u32) -> PyResult<f64> {
    stability::discriminant(epsilon, k, delta, n).map_err(to_py)
}

#[pyfunction]
fn d_decomposition(epsilon: f64, k: u32, delta: f64, n: u32) -> PyResult<(f64, f64)> {
    let inp = DiscriminantInputs::new(epsilon, k, delta, n).map_err(to_py)?;
    analytic::d_decomposition(&inp).map_err(to_py)
}

#[pyfunction]
fn stability_threshold(n: u32, b: f64, c: f64) -> PyResult<f64> {
    Ok(game::stability_threshold(&game_params(n, b, c)?))
}

#[pyfunction]
fn min_delta_for_stability(n: u32, b: f64, c: f64) -> PyResult<f64> {
    Ok(stability::min_delta_for_stability(&game_params(n, b, c)?))
}

/// Returns `{"k", "verdict", "gaps"}` where `gaps` maps invader index to
/// the incumbent's payoff advantage.
#[pyfunction]
fn classify<'py>(
    py: Python<'py>,
    n: u32,
    b: f64,
    c: f64,
    delta: f64,
    epsilon: f64,
    k: u32,
) -> PyResult<Bound<'py, PyDict>> {
    let v = stability::classify(strategy(k, n)?, &game_params(n, b, c)?, &env_params(delta, epsilon)?)
        .map_err(to_py)?;
    let verdict = match v.verdict {
        Verdict::EvolutionarilyStable => "evolutionarily_stable",
        Verdict::NeutrallyStable => "neutrally_stable",
        Verdict::Unstable => "unstable",
    };
    let gaps = PyDict::new(py);
    for w in &v.witnesses {
        gaps.set_item(w.invader.k(), w.gap)?;
    }
    let out = PyDict::new(py);
    out.set_item("k", k)?;
    out.set_item("verdict", verdict)?;
    out.set_item("gaps", gaps)?;
    Ok(out)
}

/// `(eps_lower, eps_upper)` of the stability band, or `None` when empty.
#[pyfunction]
fn band(n: u32, b: f64, c: f64, delta: f64, k: u32) -> PyResult<Option<(f64, f64)>> {
    let band = stability::ess_epsilon_band(strategy(k, n)?, &game_params(n, b, c)?, delta).map_err(to_py)?;
    Ok((!band.empty).then_some((band.eps_lower, band.eps_upper)))
}

/// `values[d][k_index][e]` for every delta, k and epsilon given.
#[pyfunction]
fn sweep(n: u32, deltas: Vec<f64>, ks: Vec<u32>, epsilons: Vec<f64>) -> PyResult<Vec<Vec<Vec<f64>>>> {
    let table = stability::sweep_delta_curves(n, &deltas, &ks, &epsilons, None).map_err(to_py)?;
    Ok(table.values)
}

/// Monte Carlo estimate as `{"mean", "std_error", "half_width", "replications"}`.
#[pyfunction]
#[pyo3(signature = (n, b, c, delta, epsilon, incumbent_k, focal_k, replications, seed, semantics = "paper_absorbing"))]
#[allow(clippy::too_many_arguments)]
fn estimate_v<'py>(
    py: Python<'py>,
    n: u32,
    b: f64,
    c: f64,
    delta: f64,
    epsilon: f64,
    incumbent_k: u32,
    focal_k: u32,
    replications: u64,
    seed: u64,
    semantics: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let params = game_params(n, b, c)?;
    let env = env_params(delta, epsilon)?;
    let (inc, focal, sem) = (strategy(incumbent_k, n)?, strategy(focal_k, n)?, parse_semantics(semantics)?);
    let est = py
        .detach(|| sim::estimate_v(inc, focal, &params, &env, replications, sem, seed))
        .map_err(to_py)?;
    let out = PyDict::new(py);
    out.set_item("mean", est.mean)?;
    out.set_item("std_error", est.std_error)?;
    out.set_item("half_width", est.half_width)?;
    out.set_item("replications", est.replications)?;
    Ok(out)
}

/// Runs the evolutionary dynamics for a JSON configuration and returns the
/// trace as JSON. With `trials`, runs the paired drift experiment instead.
#[pyfunction]
#[pyo3(signature = (config_json, trials = None))]
fn simulate(py: Python<'_>, config_json: &str, trials: Option<usize>) -> PyResult<String> {
    let cfg: SimConfig = serde_json::from_str(config_json).map_err(|e| to_py(e.into()))?;
    py.detach(|| match trials {
        Some(t) => sim::drift_experiment(&cfg, t).and_then(|s| Ok(serde_json::to_string(&s)?)),
        None => sim::evolve(&cfg).and_then(|s| Ok(serde_json::to_string(&s)?)),
    })
    .map_err(to_py)
}

#[pymodule]
fn pggevo(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(payoff, m)?)?;
    m.add_function(wrap_pyfunction!(delta_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(d_decomposition, m)?)?;
    m.add_function(wrap_pyfunction!(stability_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(min_delta_for_stability, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(band, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_v, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    Ok(())
}
