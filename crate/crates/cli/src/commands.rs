use std::time::Instant;

use anyhow::{bail, Context};
use clap::Args;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use semival::{
    approximate_semivalue, check_robustness, curve_from_profile, exact_payoffs_all, fast_banzhaf,
    fast_shapley, generate_facility_game, limit_from_profile, shapley_weight_properties, Budget,
    Error, FacilityLayout, GameSpec, RobustnessMode, SizeDistribution, UtilityMatrix, WeightScheme,
};

use crate::config::Format;
use crate::output::Output;
use crate::source::GameArgs;

pub struct Outcome {
    pub output: Output,
    pub echo: Value,
    /// Set when a requested check failed; the output is still written.
    pub failed: Option<String>,
}

#[derive(Args, Serialize, Deserialize)]
pub struct SweepArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub source: GameArgs,

    /// Replicating player (default 0).
    #[arg(long)]
    pub player: Option<usize>,

    /// Weight scheme; repeat for several (default shapley and banzhaf).
    #[arg(long = "scheme")]
    pub schemes: Option<Vec<WeightScheme>>,

    /// Largest replica count (default 50).
    #[arg(long)]
    pub k_max: Option<usize>,
}

pub fn sweep(args: SweepArgs, seed: u64) -> anyhow::Result<Outcome> {
    let (game, source) = args.source.build(seed, 10)?;
    let player = args.player.unwrap_or(0);
    let schemes = args.schemes.unwrap_or_else(|| vec![WeightScheme::Shapley, WeightScheme::Banzhaf]);
    let k_max = args.k_max.unwrap_or(50);
    let z = game.average_marginal_profile(player)?.z;

    let mut out = Output::new(&["k", "scheme", "phi_tot", "limit"], Format::Csv);
    for scheme in &schemes {
        let curve = curve_from_profile(&z, scheme, k_max).with_context(|| format!("scheme {scheme}"))?;
        let limit = match limit_from_profile(&z, scheme) {
            Ok((limit, _)) => Some(limit),
            Err(Error::NotDerived(_)) => None,
            Err(e) => return Err(e.into()),
        };
        for (k, phi_tot) in curve.iter().enumerate() {
            out.push(json!({ "k": k, "scheme": scheme, "phi_tot": phi_tot, "limit": limit }))?;
        }
    }
    Ok(Outcome {
        output: out,
        echo: json!({ "source": source, "player": player, "schemes": schemes, "k_max": k_max }),
        failed: None,
    })
}

#[derive(Args, Serialize, Deserialize)]
pub struct RobustnessArgs {
    /// Number of players (default 20).
    #[arg(long)]
    pub n: Option<usize>,

    /// Largest replica count (default 50).
    #[arg(long)]
    pub k_max: Option<usize>,

    /// Weight scheme; repeat for several (default the four built-in ones).
    #[arg(long = "scheme")]
    pub schemes: Option<Vec<WeightScheme>>,

    /// iff-condition (default), monotone-decrease or monotone-increase.
    #[arg(long)]
    pub mode: Option<RobustnessMode>,

    /// Exit with status 1 unless every scheme is robust.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub require_robust: Option<bool>,
}

pub fn robustness(args: RobustnessArgs) -> anyhow::Result<Outcome> {
    let n = args.n.unwrap_or(20);
    let k_max = args.k_max.unwrap_or(50);
    let schemes = args.schemes.unwrap_or_else(|| WeightScheme::BUILT_IN.to_vec());
    let mode = args.mode.unwrap_or(RobustnessMode::IffCondition);
    let require = args.require_robust.unwrap_or(false);

    let mut out = Output::new(&["scheme", "n", "k_max", "mode", "robust", "violations"], Format::Json);
    let mut verdicts = Vec::new();
    for scheme in &schemes {
        let v = check_robustness(scheme, n, k_max, mode).with_context(|| format!("scheme {scheme}"))?;
        out.push(json!({
            "scheme": scheme,
            "n": n,
            "k_max": k_max,
            "mode": mode,
            "robust": v.robust,
            "violations": v.violations.len(),
        }))?;
        verdicts.push(v);
    }
    let not_robust: Vec<String> = verdicts.iter().filter(|v| !v.robust).map(|v| v.scheme.to_string()).collect();
    out.extra("verdicts", &verdicts)?;
    out.extra("shapley_weight_properties", shapley_weight_properties(n, k_max)?)?;
    Ok(Outcome {
        output: out,
        echo: json!({ "n": n, "k_max": k_max, "schemes": schemes, "mode": mode, "require_robust": require }),
        failed: (require && !not_robust.is_empty()).then(|| format!("not robust: {}", not_robust.join(", "))),
    })
}

#[derive(Args, Serialize, Deserialize)]
pub struct BenchArgs {
    /// Facility counts, comma separated (default 10,15,20,50,100).
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<usize>>,

    /// Customers per game (default 10).
    #[arg(long)]
    pub customers: Option<usize>,

    /// Largest n for naive enumeration (default 20).
    #[arg(long)]
    pub naive_max: Option<usize>,
}

pub fn facility_bench(args: BenchArgs, seed: u64) -> anyhow::Result<Outcome> {
    let sizes = args.sizes.unwrap_or_else(|| vec![10, 15, 20, 50, 100]);
    let customers = args.customers.unwrap_or(10);
    let naive_max = args.naive_max.unwrap_or(20);
    let layout = FacilityLayout::UniformInt { low: 0, high: 20 };
    if sizes.is_empty() {
        bail!("`sizes` must list at least one facility count");
    }

    let columns = &["n", "method", "value_kind", "seconds", "max_abs_diff", "total", "status"];
    let mut out = Output::new(columns, Format::Csv);
    for &n in &sizes {
        let m = generate_facility_game(n, customers, layout, seed)?;
        let kinds: [(WeightScheme, fn(&UtilityMatrix) -> Vec<f64>); 2] =
            [(WeightScheme::Shapley, fast_shapley), (WeightScheme::Banzhaf, fast_banzhaf)];
        for (scheme, solver) in kinds {
            let start = Instant::now();
            let fast = solver(&m);
            let fast_secs = start.elapsed().as_secs_f64();

            let mut diff = None;
            if n <= naive_max {
                let game = GameSpec::facility(m.clone())?;
                let start = Instant::now();
                let naive = exact_payoffs_all(&game, &scheme)?;
                let secs = start.elapsed().as_secs_f64();
                diff = Some(fast.iter().zip(&naive).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
                out.push(json!({
                    "n": n, "method": "naive", "value_kind": scheme, "seconds": secs,
                    "total": naive.iter().sum::<f64>(), "status": "ok",
                }))?;
            } else {
                out.push(json!({ "n": n, "method": "naive", "value_kind": scheme, "status": "skipped" }))?;
            }
            out.push(json!({
                "n": n, "method": "fast", "value_kind": scheme, "seconds": fast_secs,
                "max_abs_diff": diff, "total": fast.iter().sum::<f64>(), "status": "ok",
            }))?;
        }
    }
    Ok(Outcome {
        output: out,
        echo: json!({ "sizes": sizes, "customers": customers, "naive_max": naive_max, "layout": layout }),
        failed: None,
    })
}

fn parse_q(s: &str) -> Result<SizeDistribution, String> {
    if s == "uniform" {
        return Ok(SizeDistribution::Uniform);
    }
    s.split(',')
        .map(|w| w.trim().parse::<f64>().map_err(|_| format!("size weight {w:?} is not a number")))
        .collect::<Result<Vec<_>, _>>()
        .map(SizeDistribution::Weights)
}

#[derive(Args, Serialize, Deserialize)]
pub struct SampleArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub source: GameArgs,

    /// Weight scheme (default shapley).
    #[arg(long)]
    pub scheme: Option<WeightScheme>,

    /// Draws per run, or "exhaustive" (default 128).
    #[arg(long)]
    pub budget: Option<Budget>,

    /// Size distribution: "uniform" (default) or comma-separated weights for sizes 0..=N.
    #[arg(long, value_parser = parse_q)]
    pub q: Option<SizeDistribution>,

    /// Number of runs, seeded seed, seed+1, ... (default 1).
    #[arg(long)]
    pub runs: Option<usize>,
}

pub fn sample_eval(args: SampleArgs, seed: u64) -> anyhow::Result<Outcome> {
    let (game, source) = args.source.build(seed, 8)?;
    let scheme = args.scheme.unwrap_or(WeightScheme::Shapley);
    let budget = args.budget.unwrap_or(Budget::Draws(128));
    let q = args.q.unwrap_or(SizeDistribution::Uniform);
    let runs = args.runs.unwrap_or(1);
    if runs == 0 {
        bail!("`runs` must be at least 1");
    }
    let exact = exact_payoffs_all(&game, &scheme)?;

    let mut out = Output::new(&["seed", "player", "exact", "phi_hat", "phi_prime", "rel_error"], Format::Csv);
    let mut run_means = Vec::with_capacity(runs);
    for r in 0..runs {
        let run_seed = seed.wrapping_add(r as u64);
        let est = approximate_semivalue(&game, &scheme, budget, &q, run_seed)
            .with_context(|| format!("run {r} (seed {run_seed})"))?;
        let prime = est.phi_prime.as_deref().context("estimates were not reconciled")?;
        let mut total = 0.0;
        for (i, &e) in exact.iter().enumerate() {
            let err = relative_error(prime[i], e);
            total += err;
            out.push(json!({
                "seed": run_seed, "player": i, "exact": e,
                "phi_hat": est.phi_hat[i], "phi_prime": prime[i], "rel_error": err,
            }))?;
        }
        run_means.push(total / exact.len() as f64);
    }
    let mean = run_means.iter().sum::<f64>() / runs as f64;
    let std = if runs > 1 {
        (run_means.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (runs - 1) as f64).sqrt()
    } else {
        0.0
    };
    out.extra("aggregate", json!({ "runs": runs, "mean_rel_error": mean, "std_rel_error": std }))?;
    Ok(Outcome {
        output: out,
        echo: json!({ "source": source, "scheme": scheme, "budget": budget, "q": q, "runs": runs }),
        failed: None,
    })
}

/// Relative error, falling back to absolute error when the exact value is zero.
fn relative_error(estimate: f64, exact: f64) -> f64 {
    let diff = (estimate - exact).abs();
    if exact.abs() > 1e-12 {
        diff / exact.abs()
    } else {
        diff
    }
}

#[derive(Args, Serialize, Deserialize)]
pub struct VerifyArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub source: GameArgs,

    /// Replica players to check for redundancy, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub replicas: Option<Vec<usize>>,
}

pub fn verify(args: VerifyArgs, seed: u64) -> anyhow::Result<Outcome> {
    let (game, source) = args.source.build(seed, 10)?;
    let mut out = Output::new(&["check", "holds", "witness"], Format::Json);
    let mut failed = Vec::new();

    let sub = game.verify_submodularity()?;
    if !sub.holds {
        failed.push("submodularity");
    }
    out.push(json!({ "check": "submodularity", "holds": sub.holds, "witness": sub.witness }))?;
    if let Some(replicas) = &args.replicas {
        let red = game.verify_replication_redundancy(replicas)?;
        if !red.holds {
            failed.push("redundancy");
        }
        out.push(json!({ "check": "redundancy", "holds": red.holds, "witness": red.witness }))?;
    }
    Ok(Outcome {
        output: out,
        echo: json!({ "source": source, "replicas": args.replicas }),
        failed: (!failed.is_empty()).then(|| failed.join(", ")),
    })
}
