#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use semival::{
    coalition_weight, subsets, Coalition, CoverageGame, GameSpec, SyntheticKind, SyntheticParams,
    UtilityMatrix, WeightScheme,
};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A monotone submodular game materialized as an explicit table.
pub fn submodular_table(n: usize, seed: u64) -> GameSpec {
    let g = GameSpec::synthetic(n, SyntheticParams { kind: SyntheticKind::Submodular, seed }).unwrap();
    GameSpec::table(n, g.value_table().unwrap().into_owned()).unwrap()
}

/// Arbitrary values, including a non-zero `v(∅)`.
pub fn random_table(n: usize, seed: u64) -> GameSpec {
    let mut r = rng(seed);
    GameSpec::table(n, (0..1usize << n).map(|_| r.gen_range(-5.0..5.0)).collect()).unwrap()
}

/// Integer utilities in `0..=max`; small `max` forces ties.
pub fn random_matrix(n: usize, d: usize, max: u32, seed: u64) -> UtilityMatrix {
    let mut r = rng(seed);
    let rows = (0..n)
        .map(|_| (0..d).map(|_| r.gen_range(0..=max) as f64).collect())
        .collect();
    UtilityMatrix::from_rows(rows).unwrap()
}

/// Coverage game where player `malicious` owns a private element of weight
/// `private_weight`.
pub fn coverage_with_private(n: usize, malicious: usize, private_weight: f64, seed: u64) -> CoverageGame {
    let mut r = rng(seed);
    let shared = 2 * n;
    let mut weights: Vec<f64> = (0..shared).map(|_| r.gen_range(0.1..3.0)).collect();
    let mut sets: Vec<Vec<usize>> = (0..n)
        .map(|_| (0..shared).filter(|_| r.gen_bool(0.35)).collect())
        .collect();
    weights.push(private_weight);
    sets[malicious].push(shared);
    CoverageGame::new(weights, sets).unwrap()
}

/// `Σ_{S ⊆ N\{i}} w(|S|, N) MC_i(S)`, ascending bit-pattern order.
pub fn direct_semivalue(game: &GameSpec, scheme: &WeightScheme, player: usize) -> f64 {
    let n = game.n_players();
    let others = Coalition::grand(n).without(player);
    subsets(others)
        .map(|s| coalition_weight(scheme, s.len(), n).unwrap() * game.marginal_contribution(player, s).unwrap())
        .sum()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
