//! Monte-Carlo semivalue estimation from one shared batch of sampled
//! coalitions.
//!
//! Every sampled coalition feeds the per-size mean `U_c` and, for each of its
//! members `i`, the conditional mean `Ū_i(c)`. Since
//! `z_i(c) = Ū_i(c+1) - (N U_c - c Ū_i(c)) / (N - c)`, the same batch yields
//! unbiased estimates for every player and every semivalue.
//!
//! Draws use systematic sampling over sizes (one uniform offset through the
//! cumulative distribution of `q`) and, within a size, consecutive chunks of
//! fresh uniform permutations. Each drawn coalition is uniform among those of
//! its size, and small budgets still reach every player at every size.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coalition::Coalition;
use crate::error::{Error, MissingCell, Result};
use crate::game::GameSpec;
use crate::semivalue::{importance_weights, WeightScheme};

/// Distribution `q(c)` over coalition sizes `c = 0..=N`.
#[derive(Clone, Debug, PartialEq)]
pub enum SizeDistribution {
    /// Uniform over `1..=N-1`; over `0..=N` when `N < 2`.
    Uniform,
    /// Unnormalized non-negative weights, one per size `0..=N`.
    Weights(Vec<f64>),
}

impl SizeDistribution {
    pub fn probabilities(&self, n: usize) -> Result<Vec<f64>> {
        let raw = match self {
            SizeDistribution::Uniform => {
                let (lo, hi) = if n < 2 { (0, n) } else { (1, n - 1) };
                (0..=n).map(|c| if (lo..=hi).contains(&c) { 1.0 } else { 0.0 }).collect()
            }
            SizeDistribution::Weights(w) => {
                if w.len() != n + 1 {
                    return Err(Error::InvalidArgument(format!(
                        "size distribution needs {} weights for sizes 0..={n}, got {}",
                        n + 1,
                        w.len()
                    )));
                }
                if w.iter().any(|x| !x.is_finite() || *x < 0.0) {
                    return Err(Error::InvalidArgument(
                        "size weights must be finite and non-negative".to_string(),
                    ));
                }
                w.clone()
            }
        };
        let total: f64 = raw.iter().sum();
        if !(total > 0.0) {
            return Err(Error::InvalidArgument("size weights sum to zero".to_string()));
        }
        Ok(raw.into_iter().map(|x| x / total).collect())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum SizeDistributionRepr {
    Named(String),
    Weights(Vec<f64>),
}

impl Serialize for SizeDistribution {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            SizeDistribution::Uniform => SizeDistributionRepr::Named("uniform".to_string()),
            SizeDistribution::Weights(w) => SizeDistributionRepr::Weights(w.clone()),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SizeDistribution {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        match SizeDistributionRepr::deserialize(deserializer)? {
            SizeDistributionRepr::Named(s) if s == "uniform" => Ok(SizeDistribution::Uniform),
            SizeDistributionRepr::Named(s) => Err(serde::de::Error::custom(format!(
                "unknown size distribution {s:?}; expected \"uniform\" or a weight list"
            ))),
            SizeDistributionRepr::Weights(w) => Ok(SizeDistribution::Weights(w)),
        }
    }
}

/// Number of sampled coalitions, or every coalition exactly once.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Budget {
    Draws(usize),
    Exhaustive,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum BudgetRepr {
    Draws(usize),
    Named(String),
}

impl Serialize for Budget {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match *self {
            Budget::Draws(t) => BudgetRepr::Draws(t),
            Budget::Exhaustive => BudgetRepr::Named("exhaustive".to_string()),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Budget {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        match BudgetRepr::deserialize(deserializer)? {
            BudgetRepr::Draws(t) => Ok(Budget::Draws(t)),
            BudgetRepr::Named(s) if s == "exhaustive" => Ok(Budget::Exhaustive),
            BudgetRepr::Named(s) => Err(serde::de::Error::custom(format!(
                "unknown budget {s:?}; expected a count or \"exhaustive\""
            ))),
        }
    }
}

impl std::str::FromStr for Budget {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "exhaustive" {
            return Ok(Budget::Exhaustive);
        }
        s.parse()
            .map(Budget::Draws)
            .map_err(|_| Error::InvalidArgument(format!("budget {s:?} is neither a count nor \"exhaustive\"")))
    }
}

/// Sampler configuration file: `{"budget": 128, "q": "uniform", "seed": 7}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub budget: Budget,
    #[serde(default = "default_q")]
    pub q: SizeDistribution,
    #[serde(default)]
    pub seed: u64,
}

fn default_q() -> SizeDistribution {
    SizeDistribution::Uniform
}

/// Sampled coalitions with their values and running means.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleBatch {
    n_players: usize,
    samples: Vec<(Coalition, f64)>,
    size_sum: Vec<f64>,
    size_count: Vec<usize>,
    /// `player_sum[i][c]`: total value of sampled size-`c` coalitions containing `i`.
    player_sum: Vec<Vec<f64>>,
    player_count: Vec<Vec<usize>>,
}

impl SampleBatch {
    fn new(n_players: usize, samples: Vec<(Coalition, f64)>) -> Self {
        let mut batch = SampleBatch {
            n_players,
            samples: Vec::new(),
            size_sum: vec![0.0; n_players + 1],
            size_count: vec![0; n_players + 1],
            player_sum: vec![vec![0.0; n_players + 1]; n_players],
            player_count: vec![vec![0; n_players + 1]; n_players],
        };
        for &(s, v) in &samples {
            let c = s.len();
            batch.size_sum[c] += v;
            batch.size_count[c] += 1;
            for i in s.members() {
                batch.player_sum[i][c] += v;
                batch.player_count[i][c] += 1;
            }
        }
        batch.samples = samples;
        batch
    }

    pub fn n_players(&self) -> usize {
        self.n_players
    }

    pub fn samples(&self) -> &[(Coalition, f64)] {
        &self.samples
    }

    /// `U[c]`, the mean value of sampled size-`c` coalitions.
    pub fn size_mean(&self, c: usize) -> Option<f64> {
        let count = *self.size_count.get(c)?;
        (count > 0).then(|| self.size_sum[c] / count as f64)
    }

    pub fn size_count(&self, c: usize) -> usize {
        self.size_count.get(c).copied().unwrap_or(0)
    }

    /// `Ū_i(c)`, the mean value of sampled size-`c` coalitions containing `i`.
    pub fn player_mean(&self, player: usize, c: usize) -> Option<f64> {
        let count = *self.player_count.get(player)?.get(c)?;
        (count > 0).then(|| self.player_sum[player][c] / count as f64)
    }

    pub fn hits(&self, player: usize, c: usize) -> usize {
        self.player_count
            .get(player)
            .and_then(|row| row.get(c))
            .copied()
            .unwrap_or(0)
    }
}

/// Draws a batch. With [`Budget::Draws`], `v(∅)` and `v(N)` are appended to
/// the sampled coalitions; with [`Budget::Exhaustive`] every coalition is
/// evaluated exactly once and `q` is ignored.
pub fn draw_samples(game: &GameSpec, budget: Budget, q: &SizeDistribution, seed: u64) -> Result<SampleBatch> {
    let n = game.n_players();
    let coalitions: Vec<Coalition> = match budget {
        Budget::Exhaustive => {
            game.check_enumerable()?;
            (0..1u64 << n).map(Coalition::from_bits).collect()
        }
        Budget::Draws(0) => {
            return Err(Error::InvalidArgument("sample budget must be at least 1".to_string()));
        }
        Budget::Draws(t) => {
            let probs = q.probabilities(n)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut drawn = Vec::with_capacity(t + 2);
            for (c, count) in systematic_counts(&probs, t, &mut rng).into_iter().enumerate() {
                draw_of_size(n, c, count, &mut rng, &mut drawn);
            }
            drawn.push(Coalition::EMPTY);
            drawn.push(game.grand());
            drawn
        }
    };
    let samples = coalitions
        .into_par_iter()
        .map(|s| (s, game.value(s)))
        .collect();
    Ok(SampleBatch::new(n, samples))
}

/// How many of `t` draws land on each size under systematic sampling.
fn systematic_counts(probs: &[f64], t: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let offset: f64 = rng.gen();
    let mut counts = vec![0; probs.len()];
    let mut cdf = 0.0;
    let mut c = 0;
    let last = probs.iter().rposition(|p| *p > 0.0).unwrap_or(0);
    for j in 0..t {
        let x = (j as f64 + offset) / t as f64;
        while c < last && cdf + probs[c] <= x {
            cdf += probs[c];
            c += 1;
        }
        counts[c] += 1;
    }
    counts
}

/// Appends `count` coalitions of size `c`, each a window of `c` consecutive
/// positions of a uniform permutation; a permutation is reshuffled after its
/// windows have covered every position.
fn draw_of_size(n: usize, c: usize, count: usize, rng: &mut ChaCha8Rng, out: &mut Vec<Coalition>) {
    if c == 0 || c == n {
        let s = if c == 0 { Coalition::EMPTY } else { Coalition::grand(n) };
        out.extend(std::iter::repeat(s).take(count));
        return;
    }
    let windows = n.div_ceil(c);
    let mut perm: Vec<usize> = (0..n).collect();
    for j in 0..count {
        let w = j % windows;
        if w == 0 {
            perm.shuffle(rng);
        }
        out.push((0..c).map(|t| perm[(w * c + t) % n]).collect());
    }
}

/// Per-player estimates and the total-payoff estimate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EstimateSet {
    pub phi_hat: Vec<f64>,
    pub phi_all: f64,
    /// Set once the estimates are reconciled with `phi_all`.
    pub phi_prime: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PlayerEstimate {
    pub player: usize,
    pub phi_hat: f64,
    pub phi_prime: Option<f64>,
}

impl EstimateSet {
    pub fn per_player(&self) -> Vec<PlayerEstimate> {
        self.phi_hat
            .iter()
            .enumerate()
            .map(|(i, &phi_hat)| PlayerEstimate {
                player: i,
                phi_hat,
                phi_prime: self.phi_prime.as_ref().map(|p| p[i]),
            })
            .collect()
    }
}

/// `φ̂_i = Σ_c α_c (N/(N-c)) [((N-c)/N) Ū_i(c+1) + (c/N) Ū_i(c) - U_c]` and
/// `φ̂_all = N Σ_c α_c (U_{c+1} - U_c)`, over sizes with `α_c > 0`.
pub fn estimate_payoffs(batch: &SampleBatch, scheme: &WeightScheme) -> Result<EstimateSet> {
    let n = batch.n_players;
    let alpha = importance_weights(scheme, n)?.alpha;
    let nf = n as f64;

    let mut missing = Vec::new();
    let need_size = |c: usize, missing: &mut Vec<MissingCell>| {
        if batch.size_count(c) == 0 && !missing.iter().any(|m: &MissingCell| m.size == c && m.player.is_none()) {
            missing.push(MissingCell { size: c, player: None });
        }
    };
    for (c, &a) in alpha.iter().enumerate() {
        if a > 0.0 {
            need_size(c, &mut missing);
            need_size(c + 1, &mut missing);
        }
    }
    for i in 0..n {
        for (c, &a) in alpha.iter().enumerate() {
            if a <= 0.0 {
                continue;
            }
            for size in [c, c + 1] {
                if size > 0
                    && batch.hits(i, size) == 0
                    && !missing.contains(&MissingCell { size, player: Some(i) })
                {
                    missing.push(MissingCell { size, player: Some(i) });
                }
            }
        }
    }
    if !missing.is_empty() {
        missing.sort_by_key(|m| (m.size, m.player.map_or(0, |p| p + 1)));
        return Err(Error::Uncovered(missing));
    }

    let u = |c: usize| batch.size_mean(c).expect("coverage checked");
    let ubar = |i: usize, c: usize| batch.player_mean(i, c).expect("coverage checked");
    let phi_hat = (0..n)
        .map(|i| {
            let mut total = 0.0;
            for (c, &a) in alpha.iter().enumerate() {
                if a <= 0.0 {
                    continue;
                }
                let cf = c as f64;
                let rest = nf - cf;
                let with_i = if c == 0 { 0.0 } else { cf / nf * ubar(i, c) };
                total += a * (nf / rest) * (rest / nf * ubar(i, c + 1) + with_i - u(c));
            }
            total
        })
        .collect();
    let phi_all = nf
        * alpha
            .iter()
            .enumerate()
            .filter(|(_, a)| **a > 0.0)
            .map(|(c, a)| a * (u(c + 1) - u(c)))
            .sum::<f64>();
    Ok(EstimateSet {
        phi_hat,
        phi_all,
        phi_prime: None,
    })
}

/// `Δ_ij = φ̂_i - φ̂_j`.
pub fn pairwise_differences(phi_hat: &[f64]) -> Vec<Vec<f64>> {
    phi_hat
        .iter()
        .map(|a| phi_hat.iter().map(|b| a - b).collect())
        .collect()
}

/// Projects onto `Σ_i φ'_i = φ̂_all` while keeping the pairwise gaps:
/// `φ'_i = (1/N) Σ_j Δ_ij + φ̂_all / N`.
pub fn reconcile_feasibility(estimates: &EstimateSet, pairwise: &[Vec<f64>]) -> Result<Vec<f64>> {
    let n = estimates.phi_hat.len();
    if pairwise.len() != n || pairwise.iter().any(|row| row.len() != n) {
        return Err(Error::InvalidArgument(format!(
            "pairwise differences must be a {n}x{n} matrix"
        )));
    }
    let nf = n as f64;
    Ok(pairwise
        .iter()
        .map(|row| row.iter().sum::<f64>() / nf + estimates.phi_all / nf)
        .collect())
}

/// Draw, estimate and reconcile in one step.
pub fn approximate_semivalue(
    game: &GameSpec,
    scheme: &WeightScheme,
    budget: Budget,
    q: &SizeDistribution,
    seed: u64,
) -> Result<EstimateSet> {
    let batch = draw_samples(game, budget, q, seed)?;
    let mut estimates = estimate_payoffs(&batch, scheme)?;
    let pairwise = pairwise_differences(&estimates.phi_hat);
    estimates.phi_prime = Some(reconcile_feasibility(&estimates, &pairwise)?);
    Ok(estimates)
}
