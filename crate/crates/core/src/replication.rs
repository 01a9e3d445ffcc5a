//! Replication manipulation: a player acting as `k + 1` identities that each
//! hold a copy of its resource.
//!
//! Throughout, `k` is the number of added replicas. The attacker's total
//! payoff over its `k + 1` identities is `φ^tot(k) = Σ_c α_c^k z_i(c)` with
//! `α_c^k = (k+1) C(N-1, c) w(c, N+k)`, where `z_i` is taken on the base game.

use rayon::prelude::*;
use serde::Serialize;

use crate::coalition::{subsets, Coalition};
use crate::combinatorics::{binomial, binomial_ratio, pow2};
use crate::error::{Error, Result};
use crate::game::{check_cap, CoverageGame, GameSpec, Valuation};
use crate::semivalue::{exact_payoffs_all, importance_weights, robust_shapley_gamma, WeightScheme};

/// Tolerance on prefix sums of importance weights.
pub const PREFIX_TOLERANCE: f64 = 1e-12;

/// Tolerance of the single-replication delta against the curve.
pub const DELTA_TOLERANCE: f64 = 1e-9;

/// Tolerance of the finite-`k` convergence check in [`limit_total_payoff`].
pub const LIMIT_TOLERANCE: f64 = 1e-3;

/// A base game, the malicious player `i` and the number of added replicas.
#[derive(Clone, Debug)]
pub struct ReplicationScenario {
    pub base: GameSpec,
    pub malicious: usize,
    pub k: usize,
}

impl ReplicationScenario {
    pub fn new(base: GameSpec, malicious: usize, k: usize) -> Result<Self> {
        base.check_player(malicious)?;
        Ok(ReplicationScenario { base, malicious, k })
    }

    /// Indices of the `k + 1` identities in the induced game: the original
    /// index first, then the appended replicas.
    pub fn identities(&self) -> Vec<usize> {
        let n = self.base.n_players();
        std::iter::once(self.malicious).chain(n..n + self.k).collect()
    }

    pub fn induced_players(&self) -> usize {
        self.base.n_players() + self.k
    }
}

/// Builds the replicated game on `N + k` players. Replicas occupy
/// `{i, N, ..., N+k-1}`; any non-empty set of them is worth what `i` alone is.
pub fn induce_replication(scenario: &ReplicationScenario) -> Result<GameSpec> {
    let base = &scenario.base;
    let (n, k, i) = (base.n_players(), scenario.k, scenario.malicious);
    base.check_player(i)?;
    let game = match base.valuation() {
        Valuation::Table(_) | Valuation::Synthetic(_) => {
            check_cap(n + k, base.limits().enumeration_cap)?;
            let values = base.value_table()?;
            let honest_mask = (1u64 << n) - 1;
            let extra_mask = ((1u64 << (n + k)) - 1) & !honest_mask;
            let table = (0..1u64 << (n + k))
                .map(|bits| {
                    let mut b = bits & honest_mask;
                    if bits & extra_mask != 0 {
                        b |= 1 << i;
                    }
                    values[b as usize]
                })
                .collect();
            GameSpec::table(n + k, table)?
        }
        Valuation::Facility(m) => GameSpec::facility(m.with_replicas(i, k)?)?,
        Valuation::Coverage(g) => {
            let mut sets = g.sets().to_vec();
            sets.extend(std::iter::repeat(g.sets()[i].clone()).take(k));
            GameSpec::coverage(CoverageGame::new(g.weights().to_vec(), sets)?)?
        }
    };
    Ok(game.with_limits(base.limits()))
}

/// `α_c^k` for `c = 0..n-1`; `k = 0` gives the plain importance weights.
pub fn replicated_importance_weights(scheme: &WeightScheme, n: usize, k: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InvalidArgument("player count must be positive".to_string()));
    }
    let m = n + k;
    let scale = (k + 1) as f64;
    let shrink = |c: usize| binomial_ratio(n - 1, m - 1, c);
    Ok(match scheme {
        WeightScheme::Shapley => (0..n).map(|c| scale / m as f64 * shrink(c)).collect(),
        WeightScheme::Banzhaf => (0..n)
            .map(|c| scale * binomial(n - 1, c) * pow2(1 - m as i64))
            .collect(),
        WeightScheme::LeaveOneOut => {
            if k == 0 {
                importance_weights(scheme, n)?.alpha
            } else {
                vec![0.0; n]
            }
        }
        WeightScheme::RobustShapley => (0..n)
            .map(|c| Ok(scale / m as f64 * shrink(c) * robust_shapley_gamma(m, c)?))
            .collect::<Result<_>>()?,
        WeightScheme::Custom(_) => {
            let alpha = &importance_weights(scheme, n)?.alpha;
            alpha.iter().enumerate().map(|(c, a)| scale * a * shrink(c)).collect()
        }
    })
}

/// `φ^tot(k)` for `k = 0..=k_max` from the malicious player's base profile.
pub fn total_payoff_curve(
    game: &GameSpec,
    scheme: &WeightScheme,
    player: usize,
    k_max: usize,
) -> Result<Vec<f64>> {
    let profile = game.average_marginal_profile(player)?;
    curve_from_profile(&profile.z, scheme, k_max)
}

/// `φ^tot(k) = Σ_c α_c^k z[c]` for `k = 0..=k_max`.
pub fn curve_from_profile(z: &[f64], scheme: &WeightScheme, k_max: usize) -> Result<Vec<f64>> {
    (0..=k_max)
        .into_par_iter()
        .map(|k| {
            let alpha = replicated_importance_weights(scheme, z.len(), k)?;
            Ok(alpha.iter().zip(z).map(|(a, z)| a * z).sum())
        })
        .collect()
}

/// Change in total payoff from one added replica.
///
/// For Shapley this is the direct coalition sum
/// `Σ_S |S|!(N-|S|-1)!/(N+1)! · (N-2|S|-1) · MC_i(S)`; for Banzhaf it is 0.
/// Either way the result is checked against `curve[1] - curve[0]`.
pub fn delta_single_replication(game: &GameSpec, scheme: &WeightScheme, player: usize) -> Result<f64> {
    game.check_player(player)?;
    let n = game.n_players();
    let delta = match scheme {
        WeightScheme::Shapley => {
            let values = game.value_table()?;
            let others = Coalition::grand(n).without(player);
            let mut total = 0.0;
            for s in subsets(others) {
                let c = s.len();
                let weight = 1.0 / ((n + 1) as f64 * n as f64 * binomial(n - 1, c));
                let mc = values[s.with(player).index()] - values[s.index()];
                total += weight * (n as f64 - 2.0 * c as f64 - 1.0) * mc;
            }
            total
        }
        WeightScheme::Banzhaf => 0.0,
        other => {
            return Err(Error::InvalidScheme(format!(
                "single-replication delta is defined for shapley and banzhaf, not {other}"
            )))
        }
    };
    let curve = total_payoff_curve(game, scheme, player, 1)?;
    let from_curve = curve[1] - curve[0];
    if (delta - from_curve).abs() > DELTA_TOLERANCE {
        return Err(Error::Inconsistent(format!(
            "single-replication delta {delta} disagrees with curve difference {from_curve}"
        )));
    }
    Ok(delta)
}

/// Which prefix-sum condition [`check_robustness`] tests.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RobustnessMode {
    /// `Σ_{c≤p} α_c^0 ≥ Σ_{c≤p} α_c^k` for every `k ≥ 1`: never gaining from
    /// replication on any submodular, replication-redundant game.
    IffCondition,
    /// `Σ_{c≤p} α_c^k ≥ Σ_{c≤p} α_c^{k+1}`: total payoff non-increasing in `k`.
    MonotoneDecrease,
    /// `Σ_{c≤p} α_c^{k+1} ≥ Σ_{c≤p} α_c^k`: total payoff non-decreasing in `k`.
    MonotoneIncrease,
}

impl std::str::FromStr for RobustnessMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "iff-condition" => Ok(RobustnessMode::IffCondition),
            "monotone-decrease" => Ok(RobustnessMode::MonotoneDecrease),
            "monotone-increase" => Ok(RobustnessMode::MonotoneIncrease),
            other => Err(Error::InvalidArgument(format!("unknown robustness mode {other:?}"))),
        }
    }
}

/// A failed prefix inequality `lhs ≥ rhs` at prefix `p`.
///
/// For [`RobustnessMode::IffCondition`], `lhs` is the prefix of `α^0` and
/// `rhs` that of `α^k`. For the monotone modes the pair compares `α^k` with
/// `α^{k+1}`, in the order the mode requires.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PrefixViolation {
    pub k: usize,
    pub p: usize,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RobustnessVerdict {
    pub scheme: WeightScheme,
    pub n: usize,
    pub k_max: usize,
    pub mode: RobustnessMode,
    /// Whether the mode's condition holds on the whole grid.
    pub robust: bool,
    pub violations: Vec<PrefixViolation>,
}

impl RobustnessVerdict {
    /// Recomputes every recorded violation from the weights.
    pub fn recheck(&self) -> Result<bool> {
        for v in &self.violations {
            let (a, b) = match self.mode {
                RobustnessMode::IffCondition => (0, v.k),
                RobustnessMode::MonotoneDecrease => (v.k, v.k + 1),
                RobustnessMode::MonotoneIncrease => (v.k + 1, v.k),
            };
            let lhs = prefix_sums(&replicated_importance_weights(&self.scheme, self.n, a)?)[v.p];
            let rhs = prefix_sums(&replicated_importance_weights(&self.scheme, self.n, b)?)[v.p];
            if lhs != v.lhs || rhs != v.rhs || lhs >= rhs - PREFIX_TOLERANCE {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

fn prefix_sums(alpha: &[f64]) -> Vec<f64> {
    alpha
        .iter()
        .scan(0.0, |acc, a| {
            *acc += a;
            Some(*acc)
        })
        .collect()
}

fn prefix_table(scheme: &WeightScheme, n: usize, k_max: usize) -> Result<Vec<Vec<f64>>> {
    (0..=k_max)
        .map(|k| Ok(prefix_sums(&replicated_importance_weights(scheme, n, k)?)))
        .collect()
}

/// Exhaustively checks a prefix-sum condition for `k ≤ k_max` and every prefix.
pub fn check_robustness(
    scheme: &WeightScheme,
    n: usize,
    k_max: usize,
    mode: RobustnessMode,
) -> Result<RobustnessVerdict> {
    if n < 2 || k_max < 1 {
        return Err(Error::InvalidArgument(format!(
            "robustness checks need n ≥ 2 and k_max ≥ 1, got n={n}, k_max={k_max}"
        )));
    }
    let prefixes = prefix_table(scheme, n, k_max)?;
    let mut violations = Vec::new();
    let mut compare = |k: usize, lhs: &[f64], rhs: &[f64]| {
        for p in 0..n {
            if lhs[p] < rhs[p] - PREFIX_TOLERANCE {
                violations.push(PrefixViolation {
                    k,
                    p,
                    lhs: lhs[p],
                    rhs: rhs[p],
                });
            }
        }
    };
    match mode {
        RobustnessMode::IffCondition => {
            for k in 1..=k_max {
                compare(k, &prefixes[0], &prefixes[k]);
            }
        }
        RobustnessMode::MonotoneDecrease => {
            for k in 0..k_max {
                compare(k, &prefixes[k], &prefixes[k + 1]);
            }
        }
        RobustnessMode::MonotoneIncrease => {
            for k in 0..k_max {
                compare(k, &prefixes[k + 1], &prefixes[k]);
            }
        }
    }
    Ok(RobustnessVerdict {
        scheme: scheme.clone(),
        n,
        k_max,
        mode,
        robust: violations.is_empty(),
        violations,
    })
}

/// Verdicts on the three prefix-sum properties of the replicated Shapley
/// weights over `k ≤ k_max`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeightPropertyReport {
    pub n: usize,
    pub k_max: usize,
    /// `Σ_c α_c^k = 1`.
    pub sums_to_one: bool,
    /// `Σ_{c≤p} α_c^k ≤ Σ_{c≤p} α_c^{k+1}`.
    pub prefix_monotone: bool,
    /// `Σ_{c≤p} (α_c^{k+1} - α_c^k) ≥ Σ_{c≤p} (α_c^{k+2} - α_c^{k+1})`.
    pub increments_diminishing: bool,
    /// Largest amount by which any of the three is violated; the unit-sum
    /// deviation is counted even when within tolerance.
    pub max_abs_violation: f64,
}

pub fn shapley_weight_properties(n: usize, k_max: usize) -> Result<WeightPropertyReport> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("weight properties need n ≥ 2, got {n}")));
    }
    let prefixes = prefix_table(&WeightScheme::Shapley, n, k_max)?;
    let mut worst = 0.0f64;
    let mut sums_to_one = true;
    for pk in &prefixes {
        let dev = (pk[n - 1] - 1.0).abs();
        worst = worst.max(dev);
        sums_to_one &= dev <= PREFIX_TOLERANCE;
    }
    let mut prefix_monotone = true;
    for k in 0..k_max {
        for p in 0..n {
            let shortfall = prefixes[k][p] - prefixes[k + 1][p];
            worst = worst.max(shortfall);
            prefix_monotone &= shortfall <= PREFIX_TOLERANCE;
        }
    }
    let mut increments_diminishing = true;
    for k in 0..k_max.saturating_sub(1) {
        for p in 0..n {
            let first = prefixes[k + 1][p] - prefixes[k][p];
            let second = prefixes[k + 2][p] - prefixes[k + 1][p];
            worst = worst.max(second - first);
            increments_diminishing &= second - first <= PREFIX_TOLERANCE;
        }
    }
    Ok(WeightPropertyReport {
        n,
        k_max,
        sums_to_one,
        prefix_monotone,
        increments_diminishing,
        max_abs_violation: worst,
    })
}

/// Closed-form `lim_{k→∞} φ^tot(k)` plus a finite-`k` comparison.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LimitCheck {
    pub limit: f64,
    pub k_big: usize,
    pub curve_at_k_big: f64,
    pub gap: f64,
    /// `gap < LIMIT_TOLERANCE`.
    pub converged: bool,
}

/// Closed-form limit of the total payoff from a base profile: `z[0]` for
/// Shapley, 0 for Banzhaf, leave-one-out and Robust Shapley.
pub fn limit_from_profile(z: &[f64], scheme: &WeightScheme) -> Result<(f64, usize)> {
    match scheme {
        WeightScheme::Shapley => Ok((z[0], 500)),
        WeightScheme::Banzhaf | WeightScheme::LeaveOneOut | WeightScheme::RobustShapley => Ok((0.0, 60)),
        WeightScheme::Custom(_) => Err(Error::NotDerived(scheme.to_string())),
    }
}

/// `lim_{k→∞} φ^tot_i(k)`, compared with the curve at a large finite `k`
/// (500 for Shapley, 60 otherwise). A large gap is reported, not raised.
pub fn limit_total_payoff(game: &GameSpec, scheme: &WeightScheme, player: usize) -> Result<LimitCheck> {
    let z = game.average_marginal_profile(player)?.z;
    let (limit, k_big) = limit_from_profile(&z, scheme)?;
    let alpha = replicated_importance_weights(scheme, z.len(), k_big)?;
    let curve_at_k_big: f64 = alpha.iter().zip(&z).map(|(a, z)| a * z).sum();
    let gap = (curve_at_k_big - limit).abs();
    Ok(LimitCheck {
        limit,
        k_big,
        curve_at_k_big,
        gap,
        converged: gap < LIMIT_TOLERANCE,
    })
}

/// `(actual_loss, bound)` for Robust Shapley after `k` replicas, where
/// `actual_loss = φ^tot(0) - φ^tot(k)` and
/// `bound = (1/N) Σ_c (1 - (k+1)/2^k) γ_N^c z_i(c)`.
pub fn robust_shapley_loss_bound(game: &GameSpec, player: usize, k: usize) -> Result<(f64, f64)> {
    let z = game.average_marginal_profile(player)?.z;
    let n = z.len();
    let curve = curve_from_profile(&z, &WeightScheme::RobustShapley, k)?;
    let actual = curve[0] - curve[k];
    let factor = 1.0 - (k + 1) as f64 * pow2(-(k as i64));
    let mut bound = 0.0;
    for (c, zc) in z.iter().enumerate() {
        bound += factor * robust_shapley_gamma(n, c)? * zc;
    }
    Ok((actual, bound / n as f64))
}

/// `(gain, bound)` where `gain` is the attacker's total over its `k + 1`
/// identities in `perturbed` minus the same total under exact replication,
/// and `bound = (k + 1) ε`.
///
/// Fails with an assumption violation unless, for every identity `r`,
/// `MC_r(S) = MC_i(S)` on coalitions `S` of honest players and
/// `MC_r(S) ≤ ε` on coalitions holding another identity.
pub fn perturbation_gain_bound(
    scenario: &ReplicationScenario,
    epsilon: f64,
    perturbed: &GameSpec,
    scheme: &WeightScheme,
) -> Result<(f64, f64)> {
    let (n, k, i) = (scenario.base.n_players(), scenario.k, scenario.malicious);
    if perturbed.n_players() != n + k {
        return Err(Error::InvalidArgument(format!(
            "perturbed game has {} players, expected {}",
            perturbed.n_players(),
            n + k
        )));
    }
    if !(epsilon >= 0.0) {
        return Err(Error::InvalidArgument(format!("epsilon must be non-negative, got {epsilon}")));
    }
    let tol = perturbed.limits().tolerance;
    let base_values = scenario.base.value_table()?;
    let values = perturbed.value_table()?;
    let identities = scenario.identities();
    let identity_set: Coalition = identities.iter().copied().collect();
    let honest = Coalition::grand(n).without(i);

    for &r in &identities {
        for s in subsets(Coalition::grand(n + k).difference(Coalition::singleton(r))) {
            let mc = values[s.with(r).index()] - values[s.index()];
            if s.intersection(identity_set).is_empty() {
                debug_assert!(s.is_subset_of(honest));
                let expected = base_values[s.with(i).index()] - base_values[s.index()];
                if (mc - expected).abs() > tol {
                    return Err(Error::AssumptionViolation {
                        coalition: s,
                        detail: format!(
                            "identity {r} contributes {mc} to an honest coalition, the original contributes {expected}"
                        ),
                    });
                }
            } else if mc > epsilon + tol {
                return Err(Error::AssumptionViolation {
                    coalition: s,
                    detail: format!("identity {r} contributes {mc} > ε = {epsilon} next to another identity"),
                });
            }
        }
    }

    let perturbed_phi = exact_payoffs_all(perturbed, scheme)?;
    let perturbed_total: f64 = identities.iter().map(|&r| perturbed_phi[r]).sum();
    let z = crate::game::profile_from_values(&base_values, n, i);
    let replicated_total = curve_from_profile(&z, scheme, k)?[k];
    Ok((perturbed_total - replicated_total, (k + 1) as f64 * epsilon))
}

/// An ε-perturbed replication of a coverage game.
///
/// The malicious player must own a private element `a` (covered by nobody
/// else) with weight at most `epsilon`. Identity 0 keeps the original set;
/// replica `j ≥ 1` swaps `a` for a fresh private element of equal weight.
pub fn perturbed_coverage_replicas(
    base: &CoverageGame,
    malicious: usize,
    k: usize,
    epsilon: f64,
) -> Result<GameSpec> {
    let sets = base.sets();
    if malicious >= sets.len() {
        return Err(Error::InvalidPlayer {
            player: malicious,
            n_players: sets.len(),
        });
    }
    let weights = base.weights();
    let private = sets[malicious].iter().copied().find(|&e| {
        weights[e] <= epsilon
            && sets
                .iter()
                .enumerate()
                .all(|(p, s)| p == malicious || !s.contains(&e))
    });
    let a = private.ok_or_else(|| {
        Error::InvalidArgument(format!(
            "player {malicious} owns no private element of weight ≤ {epsilon}"
        ))
    })?;
    let mut weights = weights.to_vec();
    let mut all_sets = sets.to_vec();
    for _ in 0..k {
        let fresh = weights.len();
        weights.push(weights[a]);
        let set = sets[malicious]
            .iter()
            .map(|&e| if e == a { fresh } else { e })
            .collect();
        all_sets.push(set);
    }
    GameSpec::coverage(CoverageGame::new(weights, all_sets)?)
}

/// A profile built to expose a violated robustness prefix condition.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AdversarialProbe {
    pub k: usize,
    /// Smallest prefix index `q0` whose condition fails at this `k`.
    pub p: usize,
    pub gamma: f64,
    pub epsilon: f64,
    /// Non-increasing, non-negative `z`, zero above `q0`.
    pub z: Vec<f64>,
    /// `curve[k] - curve[0]` predicted for `z`: `|δ_{q0}| ε`.
    pub expected_gain: f64,
}

impl AdversarialProbe {
    /// Values `f(c) = Σ_{j<c} z[j]` of a symmetric game realizing the profile.
    pub fn cardinality_values(&self) -> Vec<f64> {
        std::iter::once(0.0)
            .chain(self.z.iter().scan(0.0, |acc, z| {
                *acc += z;
                Some(*acc)
            }))
            .collect()
    }
}

/// Finds the first `(k, q0)` with `Σ_{c≤q0} (α_c^0 - α_c^k) < 0` and builds
/// `z = z0` below `q0`, `z[q0] = γ z0 + ε`, zero above, where
/// `γ = Σ_{c<q0} δ_c / |δ_{q0}|` and `ε = (1 - γ) z0 / 2`.
/// Returns `None` when the scheme satisfies the condition for all `k ≤ k_max`.
pub fn adversarial_profile(
    scheme: &WeightScheme,
    n: usize,
    k_max: usize,
    z0: f64,
) -> Result<Option<AdversarialProbe>> {
    if !(z0 > 0.0) {
        return Err(Error::InvalidArgument(format!("z0 must be positive, got {z0}")));
    }
    let alpha0 = replicated_importance_weights(scheme, n, 0)?;
    for k in 1..=k_max {
        let alpha = replicated_importance_weights(scheme, n, k)?;
        let delta: Vec<f64> = alpha0.iter().zip(&alpha).map(|(a, b)| a - b).collect();
        let prefix = prefix_sums(&delta);
        let Some(q0) = prefix.iter().position(|&s| s < -PREFIX_TOLERANCE) else {
            continue;
        };
        let below = if q0 == 0 { 0.0 } else { prefix[q0 - 1] };
        let magnitude = -delta[q0];
        let gamma = below / magnitude;
        let epsilon = (1.0 - gamma) * z0 / 2.0;
        let mut z = vec![0.0; n];
        z[..q0].fill(z0);
        z[q0] = gamma * z0 + epsilon;
        return Ok(Some(AdversarialProbe {
            k,
            p: q0,
            gamma,
            epsilon,
            z,
            expected_gain: magnitude * epsilon,
        }));
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::facility::UtilityMatrix;
    use crate::semivalue::coalition_weight;

    fn example_two() -> GameSpec {
        GameSpec::cardinality(&[0.0, 3.0, 5.0, 6.0]).unwrap()
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12
    }

    #[test]
    fn replicated_weight_examples() {
        let sh = replicated_importance_weights(&WeightScheme::Shapley, 3, 1).unwrap();
        for (a, b) in sh.iter().zip([0.5, 1.0 / 3.0, 1.0 / 6.0]) {
            assert!(close(*a, b));
        }
        assert_eq!(
            replicated_importance_weights(&WeightScheme::Banzhaf, 3, 1).unwrap(),
            vec![0.25, 0.5, 0.25]
        );
        assert_eq!(
            replicated_importance_weights(&WeightScheme::LeaveOneOut, 3, 1).unwrap(),
            vec![0.0; 3]
        );
    }

    #[test]
    fn replicated_weights_match_generic_definition() {
        let custom = WeightScheme::custom(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        for scheme in WeightScheme::BUILT_IN.into_iter().chain([custom]) {
            let n = 4;
            for k in 0..12 {
                let fast = replicated_importance_weights(&scheme, n, k).unwrap();
                for c in 0..n {
                    let generic = (k + 1) as f64 * binomial(n - 1, c) * coalition_weight(&scheme, c, n + k).unwrap();
                    assert!((fast[c] - generic).abs() <= 1e-14, "{scheme} k={k} c={c}");
                }
                if k == 0 {
                    assert_eq!(fast, importance_weights(&scheme, n).unwrap().alpha);
                }
            }
        }
    }

    #[test]
    fn example_two_curves() {
        let g = example_two();
        let sh = total_payoff_curve(&g, &WeightScheme::Shapley, 0, 3).unwrap();
        assert!(close(sh[0], 2.0) && close(sh[1], 7.0 / 3.0));
        assert!(sh.windows(2).all(|w| w[1] >= w[0]));
        let bz = total_payoff_curve(&g, &WeightScheme::Banzhaf, 0, 3).unwrap();
        assert!(close(bz[0], 2.0) && close(bz[1], 2.0));
        assert!(bz.windows(2).all(|w| w[1] <= w[0]));
        let loo = total_payoff_curve(&g, &WeightScheme::LeaveOneOut, 0, 3).unwrap();
        assert_eq!(&loo[1..], &[0.0; 3]);
    }

    #[test]
    fn single_replication_deltas() {
        let g = example_two();
        assert!(close(delta_single_replication(&g, &WeightScheme::Shapley, 0).unwrap(), 1.0 / 3.0));
        assert_eq!(delta_single_replication(&g, &WeightScheme::Banzhaf, 0).unwrap(), 0.0);
        let additive = GameSpec::additive(&[1.0, 4.0, 2.5, 0.5]).unwrap();
        assert!(delta_single_replication(&additive, &WeightScheme::Shapley, 1).unwrap().abs() <= 1e-12);
        assert!(delta_single_replication(&g, &WeightScheme::LeaveOneOut, 0).is_err());
    }

    #[test]
    fn induced_game_examples() {
        let g = example_two();
        let same = induce_replication(&ReplicationScenario::new(g.clone(), 0, 0).unwrap()).unwrap();
        assert_eq!(same.value_table().unwrap(), g.value_table().unwrap());

        let s = ReplicationScenario::new(g.clone(), 0, 1).unwrap();
        let induced = induce_replication(&s).unwrap();
        assert_eq!(induced.n_players(), 4);
        let all = Coalition::grand(4);
        assert_eq!(induced.evaluate(all).unwrap(), g.evaluate(Coalition::grand(3)).unwrap());
        assert_eq!(induced.evaluate(Coalition::from_bits(0b1000)).unwrap(), 3.0);
        assert!(induced.verify_replication_redundancy(&s.identities()).unwrap().holds);

        let fac = GameSpec::facility(UtilityMatrix::from_rows(vec![vec![2.0, 0.0], vec![1.0, 3.0]]).unwrap()).unwrap();
        let s = ReplicationScenario::new(fac, 1, 2).unwrap();
        let induced = induce_replication(&s).unwrap();
        match induced.valuation() {
            Valuation::Facility(m) => {
                assert_eq!(m.n_facilities(), 4);
                assert_eq!(m.row(3), &[1.0, 3.0]);
            }
            other => panic!("unexpected valuation {other:?}"),
        }
        assert_eq!(s.identities(), vec![1, 2, 3]);
        assert!(induced.verify_replication_redundancy(&s.identities()).unwrap().holds);
    }

    #[test]
    fn robustness_examples() {
        let v = check_robustness(&WeightScheme::Shapley, 3, 1, RobustnessMode::IffCondition).unwrap();
        assert!(!v.robust);
        let first = v.violations[0];
        assert_eq!((first.k, first.p), (1, 0));
        assert!(close(first.lhs, 1.0 / 3.0) && close(first.rhs, 0.5));
        assert!(v.recheck().unwrap());

        for scheme in [WeightScheme::Banzhaf, WeightScheme::RobustShapley, WeightScheme::LeaveOneOut] {
            let v = check_robustness(&scheme, 20, 50, RobustnessMode::IffCondition).unwrap();
            assert!(v.robust, "{scheme}");
            assert!(check_robustness(&scheme, 20, 50, RobustnessMode::MonotoneDecrease).unwrap().robust);
        }
        assert!(check_robustness(&WeightScheme::Shapley, 20, 50, RobustnessMode::MonotoneIncrease).unwrap().robust);
        assert!(check_robustness(&WeightScheme::Shapley, 1, 5, RobustnessMode::IffCondition).is_err());
    }

    #[test]
    fn verdict_serializes_to_documented_shape() {
        let v = check_robustness(&WeightScheme::Shapley, 2, 1, RobustnessMode::IffCondition).unwrap();
        let json: serde_json::Value = serde_json::to_value(&v).unwrap();
        assert_eq!(json["scheme"], "shapley");
        assert_eq!(json["mode"], "iff-condition");
        assert_eq!(json["robust"], false);
        assert!(json["violations"][0]["lhs"].is_number());
    }

    #[test]
    fn shapley_property_examples() {
        let r = shapley_weight_properties(20, 50).unwrap();
        assert!(r.sums_to_one && r.prefix_monotone && r.increments_diminishing);
        let trivial = shapley_weight_properties(2, 0).unwrap();
        assert!(trivial.sums_to_one && trivial.prefix_monotone && trivial.increments_diminishing);
    }

    #[test]
    fn limits() {
        let g = example_two();
        let sh = limit_total_payoff(&g, &WeightScheme::Shapley, 0).unwrap();
        assert_eq!(sh.limit, 3.0);
        assert_eq!(sh.k_big, 500);
        let bz = limit_total_payoff(&g, &WeightScheme::Banzhaf, 0).unwrap();
        assert_eq!(bz.limit, 0.0);
        assert!(bz.converged);
        assert_eq!(limit_total_payoff(&g, &WeightScheme::LeaveOneOut, 0).unwrap().curve_at_k_big, 0.0);
        let custom = WeightScheme::custom(vec![0.2, 0.3, 0.5]).unwrap();
        assert!(matches!(limit_total_payoff(&g, &custom, 0), Err(Error::NotDerived(_))));
    }

    #[test]
    fn robust_shapley_loss_examples() {
        let g = example_two();
        assert_eq!(robust_shapley_loss_bound(&g, 0, 0).unwrap(), (0.0, 0.0));
        let (actual, bound) = robust_shapley_loss_bound(&g, 0, 1).unwrap();
        assert_eq!(bound, 0.0);
        assert!(actual >= 0.0);
    }

    #[test]
    fn zero_perturbation_has_zero_gain() {
        let cov = CoverageGame::new(vec![1.0, 2.0, 0.5], vec![vec![0, 2], vec![1]]).unwrap();
        let s = ReplicationScenario::new(GameSpec::coverage(cov).unwrap(), 0, 2).unwrap();
        let induced = induce_replication(&s).unwrap();
        let (gain, bound) = perturbation_gain_bound(&s, 0.1, &induced, &WeightScheme::Shapley).unwrap();
        assert!(gain.abs() <= 1e-12);
        assert!(close(bound, 0.3));
    }

    #[test]
    fn perturbed_coverage_respects_bound() {
        let cov = CoverageGame::new(vec![1.0, 2.0, 0.1], vec![vec![0, 2], vec![0, 1]]).unwrap();
        let base = GameSpec::coverage(cov.clone()).unwrap();
        let s = ReplicationScenario::new(base, 0, 3).unwrap();
        let perturbed = perturbed_coverage_replicas(&cov, 0, 3, 0.1).unwrap();
        for scheme in WeightScheme::BUILT_IN {
            let (gain, bound) = perturbation_gain_bound(&s, 0.1, &perturbed, &scheme).unwrap();
            assert!(close(bound, 0.4));
            assert!(gain <= bound + 1e-9, "{scheme}: {gain} > {bound}");
        }
        // A tighter ε than the private element's weight is rejected.
        assert!(matches!(
            perturbation_gain_bound(&s, 0.05, &perturbed, &WeightScheme::Shapley),
            Err(Error::AssumptionViolation { .. })
        ));
        assert!(perturbed_coverage_replicas(&cov, 1, 2, 0.1).is_err());
    }

    #[test]
    fn adversarial_probe_exposes_violations() {
        let probe = adversarial_profile(&WeightScheme::Shapley, 5, 3, 2.0).unwrap().unwrap();
        assert_eq!((probe.k, probe.p), (1, 0));
        let curve = curve_from_profile(&probe.z, &WeightScheme::Shapley, probe.k).unwrap();
        assert!((curve[probe.k] - curve[0] - probe.expected_gain).abs() <= 1e-12);
        assert!(probe.expected_gain > 0.0);
        assert!(adversarial_profile(&WeightScheme::Banzhaf, 5, 10, 1.0).unwrap().is_none());
    }
}
