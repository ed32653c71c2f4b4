//! Closed forms checked against independent oracles: enumeration, a small
//! value-iteration of the absorbing chain, and simulation.

use pgg_evo::analytic::{self, errorfree_group_value, DiscriminantInputs, FocalContext, Mode};
use pgg_evo::game::{oneshot_payoff_err, stability_threshold, Action};
use pgg_evo::sim::{self, Grouping, MutationKernel, Semantics, SimConfig, UpdateRule};
use pgg_evo::stability::{self, classify, ess_epsilon_band, Verdict};
use pgg_evo::{EnvParams, GameParams, StrategyId};
use proptest::prelude::*;

fn s(k: u32) -> StrategyId {
    StrategyId::unchecked(k)
}

fn enumerate_oneshot(own: bool, j: u32, n: u32, b: f64, c: f64, eps: f64) -> f64 {
    let players = j + u32::from(own);
    let mut total = 0.0;
    for mask in 0u32..(1 << players) {
        let slips = mask.count_ones();
        let prob = eps.powi(slips as i32) * (1.0 - eps).powi((players - slips) as i32);
        let coops = players - slips;
        let own_paid = own && mask & 1 == 0;
        total += prob * (b * f64::from(coops) / f64::from(n) - if own_paid { c } else { 0.0 });
    }
    total
}

/// Value iteration on (focal intends C, incumbents intending C) with
/// absorbing defection: an intending cooperator continues iff the realized
/// cooperators other than itself number at least its threshold.
fn absorbing_chain_value(inc: u32, focal: u32, n: u32, b: f64, c: f64, delta: f64, eps: f64) -> f64 {
    let m = (n - 1) as usize;
    let start_f = focal < n;
    let mut v = vec![[0.0f64; 2]; m + 1];
    let pmf = |a: usize, r: usize| {
        let mut coef = 1.0;
        for i in 0..r {
            coef = coef * (a - i) as f64 / (i + 1) as f64;
        }
        coef * (1.0 - eps).powi(r as i32) * eps.powi((a - r) as i32)
    };
    for _ in 0..5000 {
        let mut next = vec![[0.0f64; 2]; m + 1];
        for a in 0..=m {
            for f in [false, true] {
                let mut val = 0.0;
                let focal_draws: Vec<(bool, f64)> =
                    if f { vec![(true, 1.0 - eps), (false, eps)] } else { vec![(false, 1.0)] };
                for (fc, pf) in focal_draws {
                    for r in 0..=a {
                        let p = pf * pmf(a, r);
                        let total = r + usize::from(fc);
                        let pay = b * total as f64 / f64::from(n) - if fc { c } else { 0.0 };
                        let inc_next = if a > 0 && total.saturating_sub(1) >= inc as usize { a } else { 0 };
                        let f_next = f && total.saturating_sub(1) >= focal as usize;
                        val += p * (pay + delta * v[inc_next][usize::from(f_next)]);
                    }
                }
                next[a][usize::from(f)] = val;
            }
        }
        v = next;
    }
    v[m][usize::from(start_f)]
}

#[test]
fn enumeration_matches_closed_one_shot_payoffs() {
    for n in [2u32, 5, 13] {
        let p = GameParams::new(n, 2.0 * f64::from(n), 3.0).unwrap();
        for j in 0..n.min(13) {
            for eps in [0.0, 0.003, 0.25, 0.5, 0.97] {
                for (own, a) in [(true, Action::Cooperate), (false, Action::Defect)] {
                    let closed = oneshot_payoff_err(a, j, &p, eps).unwrap();
                    let brute = enumerate_oneshot(own, j, n, p.b(), p.c(), eps);
                    assert!((closed - brute).abs() < 1e-12 * brute.abs().max(1.0), "n={n} j={j} eps={eps} {a:?}: {closed} vs {brute}");
                }
            }
        }
    }
}

#[test]
fn worked_examples() {
    let p = GameParams::new(10, 10.0, 5.0).unwrap();
    let env = EnvParams::new(0.9, 0.05).unwrap();
    let v = |i, f| analytic::v_err(&FocalContext::paper(s(i), s(f)), &p, &env).unwrap();
    assert!((v(9, 9) - 10.300_632).abs() < 1e-6);
    assert!((v(9, 10) - 8.55).abs() < 1e-9);
    assert!((v(9, 8) - 7.963_524).abs() < 1e-6);
    let ratio = analytic::delta_ratio(&DiscriminantInputs::new(0.05, 9, 0.9, 10).unwrap()).unwrap();
    assert!((ratio - 0.538_863).abs() < 1e-6);
    assert!((stability_threshold(&p) - 0.444_444).abs() < 1e-6);
}

#[test]
fn simulation_rejects_the_others_only_solitary_round() {
    let p = GameParams::new(10, 10.0, 5.0).unwrap();
    let env = EnvParams::new(0.9, 0.05).unwrap();
    let chosen = analytic::v_err(&FocalContext::paper(s(9), s(8)), &p, &env).unwrap();
    let variant = analytic::softer_among_hardest_others_only(s(8), &p, &env).unwrap();
    assert!((variant - 8.086_529).abs() < 1e-6);
    let est = sim::estimate_v(s(9), s(8), &p, &env, 400_000, Semantics::PaperAbsorbing, 99).unwrap();
    assert!(est.z_score(chosen).abs() <= 3.0, "chosen form z={}", est.z_score(chosen));
    assert!(est.z_score(variant).abs() > 3.0, "variant z={}", est.z_score(variant));
}

#[test]
fn episode_lengths_are_geometric() {
    let p = GameParams::new(4, 4.0, 2.0).unwrap();
    for delta in [0.5, 0.9] {
        let env = EnvParams::new(delta, 0.1).unwrap();
        let est = sim::estimate_v(s(3), s(4), &p, &env, 100_000, Semantics::PaperAbsorbing, 5).unwrap();
        let expect = 1.0 / (1.0 - delta);
        let z = (est.mean_rounds - expect) / est.rounds_std_error;
        assert!(z.abs() <= 3.0, "delta={delta}: mean rounds {} vs {expect}", est.mean_rounds);
    }
}

#[test]
fn literal_evaluator_matches_literal_simulation() {
    let p = GameParams::new(5, 5.0, 2.0).unwrap();
    let env = EnvParams::new(0.85, 0.08).unwrap();
    for (inc, focal) in [(3, 3), (3, 5), (2, 4), (2, 0), (0, 0)] {
        let exact = analytic::v_err(&FocalContext::new(s(inc), s(focal), Mode::Exact), &p, &env).unwrap();
        let est = sim::estimate_v(s(inc), s(focal), &p, &env, 100_000, Semantics::Literal, 17).unwrap();
        assert!(est.brackets(exact, 3.0), "T_{focal} among T_{inc}: {exact} vs {} +/- {}", est.mean, est.std_error);
    }
}

#[test]
fn simulation_is_thread_count_invariant() {
    let p = GameParams::new(6, 6.0, 2.5).unwrap();
    let env = EnvParams::new(0.9, 0.05).unwrap();
    let cfg = SimConfig {
        population: 36,
        params: p,
        env,
        update: UpdateRule::Moran,
        selection: 0.5,
        mutation_rate: 0.01,
        kernel: MutationKernel::Uniform,
        generations: 40,
        episodes_per_generation: 2,
        seed: 3,
        semantics: Semantics::PaperAbsorbing,
        initial: None,
        grouping: Grouping::Partition,
    };
    let run = |threads| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            (
                sim::evolve(&cfg).unwrap(),
                sim::estimate_v(s(5), s(4), &p, &env, 10_000, Semantics::PaperAbsorbing, 8).unwrap(),
            )
        })
    };
    assert_eq!(run(1), run(3));
}

#[test]
fn mistakes_above_every_band_let_defectors_take_over() {
    let p = GameParams::new(10, 10.0, 5.0).unwrap();
    let delta = 0.9;
    let widest = (1..10).map(|k| ess_epsilon_band(s(k), &p, delta).unwrap().eps_upper).fold(0.0, f64::max);
    let eps = 2.0 * widest;
    let cfg = SimConfig {
        population: 100,
        params: p,
        env: EnvParams::new(delta, eps).unwrap(),
        update: UpdateRule::Imitation,
        selection: 1.0,
        mutation_rate: 1e-3,
        kernel: MutationKernel::Uniform,
        generations: 1000,
        episodes_per_generation: 2,
        seed: 12,
        semantics: Semantics::PaperAbsorbing,
        initial: None,
        grouping: Grouping::Partition,
    };
    let trace = sim::evolve(&cfg).unwrap();
    assert!(trace.final_frequencies()[10] > 0.5, "final {:?}", trace.final_counts);
}

#[test]
fn drift_experiment_needs_enough_noisy_trials() {
    let cfg = SimConfig {
        population: 20,
        params: GameParams::new(10, 10.0, 5.0).unwrap(),
        env: EnvParams::new(0.9, 0.03).unwrap(),
        update: UpdateRule::Imitation,
        selection: 1.0,
        mutation_rate: 1e-3,
        kernel: MutationKernel::Uniform,
        generations: 10,
        episodes_per_generation: 1,
        seed: 1,
        semantics: Semantics::PaperAbsorbing,
        initial: None,
        grouping: Grouping::Partition,
    };
    assert!(sim::drift_experiment(&cfg, 0).is_err());
    assert!(sim::drift_experiment(&cfg, 29).is_err());
    let errorfree = SimConfig { env: EnvParams::new(0.9, 0.0).unwrap(), ..cfg };
    assert!(sim::drift_experiment(&errorfree, 30).is_err());
    assert!((sim::sign_test_p_value(5, 5) - 1.0 / 32.0).abs() < 1e-15);
}

#[test]
fn small_group_band_ordering_matches_a_grid_scan() {
    let p = GameParams::new(3, 3.0, 1.2).unwrap();
    let delta = 0.99;
    let thr = stability_threshold(&p);
    let grid: Vec<f64> = (1..200_000).map(|i| f64::from(i) / 200_000.0).collect();
    let mut previous_upper = 0.0;
    for k in [2u32, 1] {
        let band = ess_epsilon_band(s(k), &p, delta).unwrap();
        let inside: Vec<f64> = grid
            .iter()
            .copied()
            .filter(|e| analytic::delta_ratio(&DiscriminantInputs::new(*e, k, delta, 3).unwrap()).unwrap() > thr)
            .collect();
        assert!(!inside.is_empty() && !band.empty);
        let step = 1.0 / 200_000.0;
        assert!((inside[0] - band.eps_lower).abs() <= step || (k == 2 && band.eps_lower == 0.0));
        assert!((inside[inside.len() - 1] - band.eps_upper).abs() <= step);
        assert!(band.eps_upper > previous_upper);
        previous_upper = band.eps_upper;
    }
}

#[test]
fn limit_curves_are_ordered_and_decreasing() {
    let grid: Vec<f64> = (1..10_000).map(|i| f64::from(i) / 10_000.0).collect();
    let n = 10;
    let curves: Vec<Vec<f64>> = (1..n)
        .map(|k| grid.iter().map(|e| analytic::delta_ratio_limit(*e, k, n).unwrap()).collect())
        .collect();
    for (k, c) in curves.iter().enumerate() {
        assert!(c.windows(2).all(|w| w[1] < w[0]), "T_{} not decreasing", k + 1);
    }
    for k in 1..curves.len() {
        assert!(curves[k].iter().zip(&curves[k - 1]).all(|(hi, lo)| hi < lo), "T_{} not below T_{k}", k + 1);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn closed_forms_match_the_absorbing_chain(
        n in 2u32..=7,
        inc_pick in 0u32..100,
        focal_pick in 0u32..100,
        delta in 0.05f64..0.95,
        eps in 0.001f64..0.5,
    ) {
        let inc = inc_pick % n;
        let focal = focal_pick % (n + 1);
        let p = GameParams::new(n, 2.0 * f64::from(n), 3.0).unwrap_or_else(|_| GameParams::new(n, f64::from(n), 1.5).unwrap());
        let env = EnvParams::new(delta, eps).unwrap();
        let closed = analytic::v_err(&FocalContext::paper(s(inc), s(focal)), &p, &env).unwrap();
        let chain = absorbing_chain_value(inc, focal, n, p.b(), p.c(), delta, eps);
        prop_assert!((closed - chain).abs() <= 1e-9 * chain.abs().max(1.0), "T_{} among T_{}: {} vs {}", focal, inc, closed, chain);
    }

    #[test]
    fn vanishing_error_recovers_the_errorfree_game(
        n in 2u32..=10,
        inc_pick in 0u32..100,
        focal_pick in 0u32..100,
        delta in 0.05f64..0.95,
    ) {
        let inc = inc_pick % n;
        let focal = focal_pick % (n + 1);
        let p = GameParams::new(n, 2.0 * f64::from(n), 3.0).unwrap_or_else(|_| GameParams::new(n, f64::from(n), 1.5).unwrap());
        let mut members = vec![s(focal)];
        members.extend(std::iter::repeat_n(s(inc), n as usize - 1));
        let errorfree = errorfree_group_value(&members, 0, &p, delta).unwrap();
        let at_zero = analytic::v_err(&FocalContext::paper(s(inc), s(focal)), &p, &EnvParams::new(delta, 0.0).unwrap()).unwrap();
        prop_assert!((at_zero - errorfree).abs() <= 1e-12 * errorfree.abs().max(1.0));
        let tiny = analytic::v_err(&FocalContext::paper(s(inc), s(focal)), &p, &EnvParams::new(delta, 1e-12).unwrap()).unwrap();
        prop_assert!((tiny - errorfree).abs() <= 1e-6 * errorfree.abs().max(1.0), "{} vs {}", tiny, errorfree);
    }

    #[test]
    fn discriminant_sign_decides_defector_invasion(
        n in 2u32..=15,
        k_pick in 0u32..100,
        delta in 0.05f64..0.999,
        eps in 0.0005f64..0.9,
    ) {
        let k = 1 + k_pick % (n - 1).max(1);
        prop_assume!(k < n);
        let p = GameParams::new(n, 10.0, 10.0 * 0.5 + 10.0 / f64::from(n) * 0.5).unwrap();
        let env = EnvParams::new(delta, eps).unwrap();
        let ratio = analytic::delta_ratio(&DiscriminantInputs::new(eps, k, delta, n).unwrap()).unwrap();
        let margin = ratio - stability_threshold(&p);
        prop_assume!(margin.abs() > 1e-9);
        let own = analytic::v_err(&FocalContext::paper(s(k), s(k)), &p, &env).unwrap();
        let defector = analytic::v_err(&FocalContext::paper(s(k), s(n)), &p, &env).unwrap();
        prop_assert_eq!(own > defector, margin > 0.0);
        prop_assert!(ratio >= 0.0 && ratio <= delta);
        for f in k + 1..n {
            let harder = analytic::v_err(&FocalContext::paper(s(k), s(f)), &p, &env).unwrap();
            prop_assert_eq!(own > harder, margin > 0.0, "harder mutant T_{}", f);
        }
    }

    #[test]
    fn classification_follows_the_bands(
        k in 1u32..10,
        delta in 0.85f64..0.999,
        t in 0.0f64..1.0,
    ) {
        let p = GameParams::new(10, 10.0, 5.0).unwrap();
        let band = ess_epsilon_band(s(k), &p, delta).unwrap();
        prop_assume!(!band.empty);
        let eps = band.eps_lower + (band.eps_upper - band.eps_lower) * (0.02 + 0.96 * t);
        let v = classify(s(k), &p, &EnvParams::new(delta, eps).unwrap()).unwrap();
        prop_assert_eq!(v.verdict, Verdict::EvolutionarilyStable);
        let above = band.eps_upper + (1.0 - band.eps_upper) * 0.5 * t + 1e-6;
        let v = classify(s(k), &p, &EnvParams::new(delta, above.min(0.999)).unwrap()).unwrap();
        prop_assert!(v.gap_against(p.defector()).unwrap() <= 0.0);
    }

    #[test]
    fn band_edges_are_roots(k in 1u32..10, delta in 0.8f64..1.0) {
        let p = GameParams::new(10, 10.0, 5.0).unwrap();
        let band = ess_epsilon_band(s(k), &p, delta).unwrap();
        prop_assume!(!band.empty);
        for edge in [band.eps_lower, band.eps_upper] {
            if edge > 0.0 {
                let g = stability::discriminant(edge, k, delta, 10).unwrap() - stability_threshold(&p);
                prop_assert!(g.abs() < 1e-9, "edge {} gives {}", edge, g);
            }
        }
    }

    #[test]
    fn discriminant_identities(n in 2u32..=30, k_pick in 0u32..100, delta in 0.01f64..=1.0, eps in 1e-6f64..0.999) {
        let k = 1 + k_pick % (n - 1);
        let inp = DiscriminantInputs::new(eps, k, delta, n).unwrap();
        let direct = analytic::delta_ratio(&inp).unwrap();
        let (d1, d2) = analytic::d_decomposition(&inp).unwrap();
        prop_assert!((delta / (d1 + d2) - direct).abs() <= 1e-10 * direct.max(1e-300).max(1.0));
        if k == n - 1 {
            prop_assert!((direct - delta * (1.0 - eps).powi(n as i32)).abs() <= 1e-15);
        }
        let unit = analytic::delta_ratio(&DiscriminantInputs::new(eps, k, 1.0, n).unwrap()).unwrap();
        prop_assert!((unit - analytic::delta_ratio_limit(eps, k, n).unwrap()).abs() <= 1e-12);
    }
}
