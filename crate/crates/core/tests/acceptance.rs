//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::time::{Duration, Instant};

use rand::Rng;
use semival::{
    approximate_semivalue, check_robustness, coalition_weight, curve_from_profile,
    delta_single_replication, exact_payoffs_all, fast_banzhaf, fast_shapley, generate_facility_game,
    induce_replication, perturbation_gain_bound, perturbed_coverage_replicas,
    shapley_weight_properties, subsets, total_payoff_curve, Budget,
    Coalition, FacilityLayout, GameSpec, ReplicationScenario, RobustnessMode, SizeDistribution,
    WeightScheme,
};

use common::*;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn example_two_reproduction() -> Outcome {
    let g = GameSpec::cardinality(&[0.0, 3.0, 5.0, 6.0]).map_err(err)?;
    let sh = total_payoff_curve(&g, &WeightScheme::Shapley, 0, 1).map_err(err)?;
    let bz = total_payoff_curve(&g, &WeightScheme::Banzhaf, 0, 1).map_err(err)?;
    let checks = [
        ("Shapley φ", sh[0], 2.0),
        ("Banzhaf φ", bz[0], 2.0),
        ("Shapley φ^tot(1)", sh[1], 7.0 / 3.0),
        ("Banzhaf φ^tot(1)", bz[1], 2.0),
    ];
    let mut worst = 0.0f64;
    for (name, got, want) in checks {
        let diff = (got - want).abs();
        ensure(diff <= 1e-12, || format!("{name} = {got}, expected {want}"))?;
        worst = worst.max(diff);
    }
    Ok(format!("max deviation {worst:.1e}"))
}

fn single_replication_deltas() -> Outcome {
    let start = Instant::now();
    let mut r = rng(101);
    let mut min_delta = f64::INFINITY;
    let mut worst_gap = 0.0f64;
    let mut worst_banzhaf = 0.0f64;
    for t in 0..100 {
        let n = r.gen_range(2..=10);
        let g = submodular_table(n, 1000 + t);
        ensure(g.verify_submodularity().map_err(err)?.holds, || format!("game {t} is not submodular"))?;
        for i in 0..n {
            let d = delta_single_replication(&g, &WeightScheme::Shapley, i).map_err(err)?;
            let curve = total_payoff_curve(&g, &WeightScheme::Shapley, i, 1).map_err(err)?;
            worst_gap = worst_gap.max((d - (curve[1] - curve[0])).abs());
            min_delta = min_delta.min(d);
            let b = delta_single_replication(&g, &WeightScheme::Banzhaf, i).map_err(err)?;
            worst_banzhaf = worst_banzhaf.max(b.abs());
        }
    }
    let elapsed = start.elapsed();
    ensure(min_delta >= -1e-12, || format!("Shapley delta {min_delta} is negative"))?;
    ensure(worst_gap <= 1e-9, || format!("delta differs from curve by {worst_gap}"))?;
    ensure(worst_banzhaf <= 1e-9, || format!("Banzhaf delta {worst_banzhaf}"))?;
    ensure(elapsed < Duration::from_secs(10), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "min Shapley delta {min_delta:.3e}, max curve gap {worst_gap:.1e}, {elapsed:.2?}"
    ))
}

fn replica_sum_equivalence() -> Outcome {
    let mut r = rng(202);
    let mut worst = 0.0f64;
    let mut cases = 0;
    for t in 0..50 {
        let n = r.gen_range(2..=8);
        let k = r.gen_range(0..=(16 - n).min(8));
        let i = r.gen_range(0..n);
        let g = match t % 3 {
            0 => submodular_table(n, 2000 + t),
            1 => random_table(n, 2000 + t),
            _ => GameSpec::facility(random_matrix(n, 4, 9, 2000 + t)).map_err(err)?,
        };
        let mut alpha: Vec<f64> = (0..n).map(|_| r.gen_range(0.0..1.0)).collect();
        let total: f64 = alpha.iter().sum();
        alpha.iter_mut().for_each(|a| *a /= total);
        let custom = WeightScheme::custom(alpha).map_err(err)?;

        let scenario = ReplicationScenario::new(g.clone(), i, k).map_err(err)?;
        let induced = induce_replication(&scenario).map_err(err)?;
        let values = induced.value_table().map_err(err)?;
        let m = n + k;
        for scheme in WeightScheme::BUILT_IN.into_iter().chain([custom]) {
            let curve = total_payoff_curve(&g, &scheme, i, k).map_err(err)?;
            let mut direct = 0.0;
            for r_id in scenario.identities() {
                let others = Coalition::grand(m).without(r_id);
                for s in subsets(others) {
                    let w = coalition_weight(&scheme, s.len(), m).map_err(err)?;
                    direct += w * (values[s.with(r_id).index()] - values[s.index()]);
                }
            }
            let diff = (curve[k] - direct).abs();
            ensure(diff <= 1e-9, || format!("game {t}, {scheme}, k={k}: {} vs {direct}", curve[k]))?;
            worst = worst.max(diff);
            cases += 1;
        }
    }
    Ok(format!("{cases} (game, scheme) pairs, max deviation {worst:.1e}"))
}

fn robustness_verdicts() -> Outcome {
    let start = Instant::now();
    let mut worst_property = 0.0f64;
    for n in 2..=20 {
        let sh = check_robustness(&WeightScheme::Shapley, n, 50, RobustnessMode::IffCondition).map_err(err)?;
        ensure(!sh.robust, || format!("Shapley reported robust at n={n}"))?;
        for scheme in [WeightScheme::Banzhaf, WeightScheme::LeaveOneOut, WeightScheme::RobustShapley] {
            let v = check_robustness(&scheme, n, 50, RobustnessMode::IffCondition).map_err(err)?;
            ensure(v.robust, || format!("{scheme} not robust at n={n}: {:?}", v.violations.first()))?;
        }
        let props = shapley_weight_properties(n, 50).map_err(err)?;
        ensure(props.sums_to_one && props.prefix_monotone && props.increments_diminishing, || {
            format!("weight properties fail at n={n}: {props:?}")
        })?;
        worst_property = worst_property.max(props.max_abs_violation);
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(5), || format!("took {elapsed:?}"))?;
    Ok(format!("n=2..20, k≤50; max property deviation {worst_property:.1e}, {elapsed:.2?}"))
}

fn facility_convergence() -> Outcome {
    let m = generate_facility_game(10, 10, FacilityLayout::UniformInt { low: 0, high: 20 }, 0).map_err(err)?;
    let g = GameSpec::facility(m.clone()).map_err(err)?;
    let mut failures = Vec::new();
    let mut worst_gap = 0.0f64;
    let mut worst_banzhaf = 0.0f64;
    for i in 0..10 {
        let z = g.average_marginal_profile(i).map_err(err)?.z;
        let v_i = g.evaluate(Coalition::singleton(i)).map_err(err)?;

        let sh = curve_from_profile(&z, &WeightScheme::Shapley, 500).map_err(err)?;
        // Independent replica total at k = 500 from the closed-form solver.
        let replicated = m.with_replicas(i, 500).map_err(err)?;
        let phi = fast_shapley(&replicated);
        let fast_total: f64 = phi[i] + phi[10..].iter().sum::<f64>();
        if (fast_total - sh[500]).abs() > 1e-9 {
            failures.push(format!("player {i}: closed-form total {fast_total} vs curve {}", sh[500]));
        }
        if let Some(k) = (0..500).find(|&k| sh[k + 1] < sh[k] - 1e-12) {
            failures.push(format!("player {i}: Shapley curve decreases at k={k}"));
        }
        let gap = (sh[500] - v_i).abs();
        worst_gap = worst_gap.max(gap);
        if gap >= 1e-3 {
            failures.push(format!("player {i}: |φ^tot(500) - v({{i}})| = {gap:.4}"));
        }

        let bz = curve_from_profile(&z, &WeightScheme::Banzhaf, 60).map_err(err)?;
        if bz[1] != bz[0] {
            failures.push(format!("player {i}: Banzhaf φ^tot(1) = {} ≠ φ^tot(0) = {}", bz[1], bz[0]));
        }
        worst_banzhaf = worst_banzhaf.max(bz[60]);
        if bz[60] >= 1e-3 {
            failures.push(format!("player {i}: Banzhaf φ^tot(60) = {}", bz[60]));
        }
    }
    let summary = format!("max Shapley gap at k=500 {worst_gap:.4}, max Banzhaf φ^tot(60) {worst_banzhaf:.1e}");
    if failures.is_empty() {
        Ok(summary)
    } else {
        Err(format!("{summary}; {}", failures.join("; ")))
    }
}

fn facility_closed_forms() -> Outcome {
    let mut r = rng(606);
    let mut worst = 0.0f64;
    for t in 0..200 {
        let n = r.gen_range(1..=12);
        let d = r.gen_range(1..=8);
        let max = if t % 2 == 0 { 3 } else { 20 };
        let m = random_matrix(n, d, max, 6000 + t);
        let g = GameSpec::facility(m.clone()).map_err(err)?;
        let sh = max_abs_diff(&fast_shapley(&m), &exact_payoffs_all(&g, &WeightScheme::Shapley).map_err(err)?);
        let bz = max_abs_diff(&fast_banzhaf(&m), &exact_payoffs_all(&g, &WeightScheme::Banzhaf).map_err(err)?);
        ensure(sh <= 1e-9 && bz <= 1e-9, || format!("instance {t} ({n}x{d}): shapley {sh}, banzhaf {bz}"))?;
        worst = worst.max(sh).max(bz);
    }
    let big = generate_facility_game(100, 100, FacilityLayout::UniformInt { low: 0, high: 20 }, 7).map_err(err)?;
    let start = Instant::now();
    let sh = fast_shapley(&big);
    let bz = fast_banzhaf(&big);
    let elapsed = start.elapsed();
    ensure(sh.iter().chain(&bz).all(|v| v.is_finite()), || "non-finite output at n=100".to_string())?;
    ensure(elapsed < Duration::from_secs(1), || format!("n=100, d=100 took {elapsed:?}"))?;
    Ok(format!("200 instances, max deviation {worst:.1e}; n=d=100 in {elapsed:.2?}"))
}

fn binomial_identity() -> Outcome {
    let mut worst = 0.0f64;
    for n in 0..=60usize {
        for m in 0..=n {
            let lhs: f64 = (0..=m)
                .map(|k| semival::combinatorics::binomial(m, k) / semival::combinatorics::binomial(n, k))
                .sum();
            let rhs = (n + 1) as f64 / (n + 1 - m) as f64;
            let diff = (lhs - rhs).abs();
            ensure(diff <= 1e-9, || format!("m={m}, n={n}: {lhs} vs {rhs}"))?;
            worst = worst.max(diff);
        }
    }
    Ok(format!("0 ≤ m ≤ n ≤ 60, max deviation {worst:.1e}"))
}

fn sampler_checks() -> Outcome {
    let mut r = rng(808);
    let mut worst_exact = 0.0f64;
    for t in 0..20 {
        let n = r.gen_range(1..=10);
        let g = if t % 2 == 0 { random_table(n, 8000 + t) } else { submodular_table(n, 8000 + t) };
        for scheme in WeightScheme::BUILT_IN {
            let est = approximate_semivalue(&g, &scheme, Budget::Exhaustive, &SizeDistribution::Uniform, 0)
                .map_err(err)?;
            let exact = exact_payoffs_all(&g, &scheme).map_err(err)?;
            worst_exact = worst_exact.max(max_abs_diff(&est.phi_hat, &exact));
        }
    }
    ensure(worst_exact <= 1e-9, || format!("exact-means deviation {worst_exact}"))?;

    let m = generate_facility_game(8, 10, FacilityLayout::UniformInt { low: 0, high: 20 }, 88).map_err(err)?;
    let g = GameSpec::facility(m).map_err(err)?;
    let exact = exact_payoffs_all(&g, &WeightScheme::Shapley).map_err(err)?;
    let runs = 1000;
    let norm = exact.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut mean_rel = Vec::new();
    let mut worst_z = 0.0f64;
    for budget in [64, 128] {
        let mut sum = vec![0.0; 8];
        let mut sum_sq = vec![0.0; 8];
        let mut rel = 0.0;
        for seed in 0..runs {
            let est = approximate_semivalue(&g, &WeightScheme::Shapley, Budget::Draws(budget), &SizeDistribution::Uniform, seed)
                .map_err(err)?;
            for (i, x) in est.phi_hat.iter().enumerate() {
                sum[i] += x;
                sum_sq[i] += x * x;
            }
            let prime = est.phi_prime.expect("reconciled");
            rel += prime.iter().zip(&exact).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt() / norm;
        }
        if budget == 64 {
            let rf = runs as f64;
            for i in 0..8 {
                let mean = sum[i] / rf;
                let var = (sum_sq[i] - rf * mean * mean) / (rf - 1.0);
                let se = (var / rf).sqrt();
                let z = (mean - exact[i]).abs() / se;
                ensure(z <= 3.0, || format!("player {i}: mean {mean} vs exact {}, {z:.2} standard errors", exact[i]))?;
                worst_z = worst_z.max(z);
            }
        }
        mean_rel.push(rel / runs as f64);
    }
    ensure(mean_rel[1] <= mean_rel[0], || {
        format!("mean relative error {} at 128 exceeds {} at 64", mean_rel[1], mean_rel[0])
    })?;
    Ok(format!(
        "exact-means deviation {worst_exact:.1e}; worst bias {worst_z:.2} SE; mean rel error {:.4} (64) vs {:.4} (128)",
        mean_rel[0], mean_rel[1]
    ))
}

fn perturbation_bound() -> Outcome {
    let mut r = rng(909);
    let mut worst_slack = f64::INFINITY;
    let mut cases = 0;
    for t in 0..40 {
        let n = r.gen_range(2..=6);
        let k = r.gen_range(1..=12 - n);
        let i = r.gen_range(0..n);
        let epsilon = r.gen_range(0.01..0.5);
        let private = epsilon * r.gen_range(0.2..=1.0);
        let cov = coverage_with_private(n, i, private, 9000 + t);
        let scenario = ReplicationScenario::new(GameSpec::coverage(cov.clone()).map_err(err)?, i, k).map_err(err)?;
        let perturbed = perturbed_coverage_replicas(&cov, i, k, epsilon).map_err(err)?;
        for scheme in WeightScheme::BUILT_IN {
            let (gain, bound) = perturbation_gain_bound(&scenario, epsilon, &perturbed, &scheme).map_err(err)?;
            ensure(gain <= bound + 1e-9, || format!("case {t}, {scheme}: gain {gain} > {bound}"))?;
            worst_slack = worst_slack.min(bound - gain);
            cases += 1;
        }
    }
    Ok(format!("{cases} (scenario, scheme) pairs, min slack {worst_slack:.3e}"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("1 example-2 reproduction", example_two_reproduction),
        ("2 single-replication deltas", single_replication_deltas),
        ("3 weight-based totals equal replica sums", replica_sum_equivalence),
        ("4 robustness verdicts and Shapley weight properties", robustness_verdicts),
        ("5 facility convergence", facility_convergence),
        ("6 facility closed forms", facility_closed_forms),
        ("7 binomial identity", binomial_identity),
        ("8 sampler", sampler_checks),
        ("9 perturbation bound", perturbation_bound),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {name}: {detail}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
