//! Characteristic-function games: valuation, marginal contributions and
//! exhaustive checks of the structural assumptions (submodularity and
//! replication redundancy) that the replication analysis relies on.

use std::borrow::Cow;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coalition::{subsets, Coalition, MAX_PLAYERS};
use crate::combinatorics::binomial;
use crate::error::{Error, Result};
use crate::facility::UtilityMatrix;

/// Default cap on `N` for anything that enumerates all `2^N` coalitions.
pub const DEFAULT_ENUMERATION_CAP: usize = 24;

/// Default absolute tolerance for assumption checks.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Limits {
    pub enumeration_cap: usize,
    pub tolerance: f64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
            tolerance: DEFAULT_TOLERANCE,
        }
    }
}

/// Weighted coverage: `v(S)` is the total weight of universe elements covered
/// by at least one member of `S`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoverageGame {
    weights: Vec<f64>,
    sets: Vec<Vec<usize>>,
    masks: Vec<Vec<u64>>,
}

impl CoverageGame {
    pub fn new(weights: Vec<f64>, sets: Vec<Vec<usize>>) -> Result<Self> {
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidGame(format!(
                "coverage weights must be finite and non-negative, got {w}"
            )));
        }
        let words = weights.len().div_ceil(64).max(1);
        let mut masks = Vec::with_capacity(sets.len());
        for (p, set) in sets.iter().enumerate() {
            let mut m = vec![0u64; words];
            for &e in set {
                if e >= weights.len() {
                    return Err(Error::InvalidGame(format!(
                        "player {p} covers element {e} outside a universe of {}",
                        weights.len()
                    )));
                }
                m[e / 64] |= 1 << (e % 64);
            }
            masks.push(m);
        }
        Ok(CoverageGame {
            weights,
            sets,
            masks,
        })
    }

    pub fn n_players(&self) -> usize {
        self.sets.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn sets(&self) -> &[Vec<usize>] {
        &self.sets
    }

    pub fn value(&self, s: Coalition) -> f64 {
        let mut covered = vec![0u64; self.masks.first().map_or(1, Vec::len)];
        for p in s.members() {
            for (c, m) in covered.iter_mut().zip(&self.masks[p]) {
                *c |= m;
            }
        }
        let mut total = 0.0;
        for (w, word) in covered.iter().enumerate() {
            let mut bits = *word;
            while bits != 0 {
                let e = w * 64 + bits.trailing_zeros() as usize;
                total += self.weights[e];
                bits &= bits - 1;
            }
        }
        total
    }
}

/// Seeded generators for synthetic games, materialized into a value table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SyntheticKind {
    /// Monotone submodular: a sum of square roots of random non-negative
    /// modular functions, `v(S) = Σ_m sqrt(Σ_{j∈S} a_mj)`.
    Submodular,
    /// Arbitrary values uniform in `[0, 1)`, with `v(∅) = 0`.
    Random,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyntheticParams {
    pub kind: SyntheticKind,
    pub seed: u64,
}

impl SyntheticParams {
    const COMPONENTS: usize = 3;

    fn materialize(&self, n: usize) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let size = 1usize << n;
        match self.kind {
            SyntheticKind::Random => {
                let mut table: Vec<f64> = (0..size).map(|_| rng.gen::<f64>()).collect();
                table[0] = 0.0;
                table
            }
            SyntheticKind::Submodular => {
                let a: Vec<Vec<f64>> = (0..Self::COMPONENTS)
                    .map(|_| (0..n).map(|_| rng.gen::<f64>()).collect())
                    .collect();
                (0..size as u64)
                    .map(|bits| {
                        let s = Coalition::from_bits(bits);
                        a.iter()
                            .map(|row| s.members().map(|j| row[j]).sum::<f64>().sqrt())
                            .sum()
                    })
                    .collect()
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticGame {
    params: SyntheticParams,
    table: Vec<f64>,
}

impl SyntheticGame {
    pub fn params(&self) -> SyntheticParams {
        self.params
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Valuation {
    /// `2^N` values in bit-pattern order.
    Table(Vec<f64>),
    Facility(UtilityMatrix),
    Coverage(CoverageGame),
    Synthetic(SyntheticGame),
}

/// A cooperative game `(N, v)`. Immutable once built.
#[derive(Clone, Debug, PartialEq)]
pub struct GameSpec {
    n_players: usize,
    valuation: Valuation,
    limits: Limits,
}

impl GameSpec {
    pub fn table(n_players: usize, values: Vec<f64>) -> Result<Self> {
        check_player_count(n_players)?;
        if n_players >= usize::BITS as usize || values.len() != 1usize << n_players {
            return Err(Error::InvalidGame(format!(
                "a {n_players}-player table needs 2^{n_players} values, got {}",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidGame(format!(
                "table value at index {i} is not finite"
            )));
        }
        Ok(Self::from_parts(n_players, Valuation::Table(values)))
    }

    pub fn facility(utilities: UtilityMatrix) -> Result<Self> {
        let n = utilities.n_facilities();
        check_player_count(n)?;
        Ok(Self::from_parts(n, Valuation::Facility(utilities)))
    }

    pub fn coverage(game: CoverageGame) -> Result<Self> {
        let n = game.n_players();
        check_player_count(n)?;
        Ok(Self::from_parts(n, Valuation::Coverage(game)))
    }

    pub fn synthetic(n_players: usize, params: SyntheticParams) -> Result<Self> {
        check_player_count(n_players)?;
        check_cap(n_players, Limits::default().enumeration_cap)?;
        let table = params.materialize(n_players);
        Ok(Self::from_parts(
            n_players,
            Valuation::Synthetic(SyntheticGame { params, table }),
        ))
    }

    /// Symmetric game `v(S) = f(|S|)`; every player's average marginal
    /// contribution profile is `z(c) = f(c+1) - f(c)`.
    pub fn cardinality(f: &[f64]) -> Result<Self> {
        let n = f.len().checked_sub(1).ok_or_else(|| {
            Error::InvalidGame("cardinality game needs f(0..=N)".to_string())
        })?;
        check_player_count(n)?;
        check_cap(n, Limits::default().enumeration_cap)?;
        let values = (0..1u64 << n)
            .map(|b| f[b.count_ones() as usize])
            .collect();
        Self::table(n, values)
    }

    /// Additive game `v(S) = Σ_{j∈S} w_j`.
    pub fn additive(weights: &[f64]) -> Result<Self> {
        let n = weights.len();
        check_player_count(n)?;
        check_cap(n, Limits::default().enumeration_cap)?;
        let values = (0..1u64 << n)
            .map(|b| Coalition::from_bits(b).members().map(|j| weights[j]).sum())
            .collect();
        Self::table(n, values)
    }

    fn from_parts(n_players: usize, valuation: Valuation) -> Self {
        GameSpec {
            n_players,
            valuation,
            limits: Limits::default(),
        }
    }

    pub fn with_limits(mut self, limits: Limits) -> Self {
        self.limits = limits;
        self
    }

    pub fn limits(&self) -> Limits {
        self.limits
    }

    pub fn n_players(&self) -> usize {
        self.n_players
    }

    pub fn valuation(&self) -> &Valuation {
        &self.valuation
    }

    pub fn grand(&self) -> Coalition {
        Coalition::grand(self.n_players)
    }

    pub fn check_player(&self, player: usize) -> Result<()> {
        if player < self.n_players {
            Ok(())
        } else {
            Err(Error::InvalidPlayer {
                player,
                n_players: self.n_players,
            })
        }
    }

    /// Fails unless all `2^N` coalitions may be enumerated.
    pub fn check_enumerable(&self) -> Result<()> {
        check_cap(self.n_players, self.limits.enumeration_cap)
    }

    /// `v(s)`.
    pub fn evaluate(&self, s: Coalition) -> Result<f64> {
        s.validate(self.n_players)?;
        Ok(self.value(s))
    }

    /// `v(s)` without validating `s`.
    pub(crate) fn value(&self, s: Coalition) -> f64 {
        match &self.valuation {
            Valuation::Table(t) => t[s.index()],
            Valuation::Synthetic(g) => g.table[s.index()],
            Valuation::Facility(m) => m.value(s),
            Valuation::Coverage(g) => g.value(s),
        }
    }

    /// `MC_i(s) = v(s ∪ {i}) - v(s)`.
    pub fn marginal_contribution(&self, player: usize, s: Coalition) -> Result<f64> {
        self.check_player(player)?;
        s.validate(self.n_players)?;
        if s.contains(player) {
            return Err(Error::PlayerInCoalition {
                player,
                coalition: s,
            });
        }
        Ok(self.value(s.with(player)) - self.value(s))
    }

    /// Values of all `2^N` coalitions in bit-pattern order. Tables are
    /// borrowed; other valuations are evaluated once, in parallel.
    pub fn value_table(&self) -> Result<Cow<'_, [f64]>> {
        self.check_enumerable()?;
        Ok(match &self.valuation {
            Valuation::Table(t) => Cow::Borrowed(t.as_slice()),
            Valuation::Synthetic(g) => Cow::Borrowed(g.table.as_slice()),
            _ => Cow::Owned(
                (0..1u64 << self.n_players)
                    .into_par_iter()
                    .map(|b| self.value(Coalition::from_bits(b)))
                    .collect(),
            ),
        })
    }

    /// Average marginal contributions `z_i(c)` by exact enumeration.
    pub fn average_marginal_profile(&self, player: usize) -> Result<MarginalProfile> {
        self.check_player(player)?;
        let values = self.value_table()?;
        Ok(MarginalProfile {
            player,
            z: profile_from_values(&values, self.n_players, player),
        })
    }

    /// Exhaustively checks `MC_i(S) ≥ MC_i(S')` for every player and every
    /// nested pair `S ⊆ S' ⊆ N \ {i}`, reporting the largest violation.
    pub fn verify_submodularity(&self) -> Result<AssumptionReport> {
        let values = self.value_table()?;
        let n = self.n_players;
        let size = 1usize << n;
        let mut worst: Option<Violation> = None;
        let mut worst_slack = self.limits.tolerance;
        let mut min_below = vec![0.0f64; size];

        for i in 0..n {
            let bit = 1usize << i;
            for (mask, slot) in min_below.iter_mut().enumerate() {
                *slot = if mask & bit != 0 {
                    f64::INFINITY
                } else {
                    values[mask | bit] - values[mask]
                };
            }
            // Subset-min transform: min_below[S'] = min over S ⊆ S' of MC_i(S).
            for j in (0..n).filter(|&j| j != i) {
                let jb = 1usize << j;
                for mask in 0..size {
                    if mask & jb != 0 && mask & bit == 0 {
                        let below = min_below[mask ^ jb];
                        if below < min_below[mask] {
                            min_below[mask] = below;
                        }
                    }
                }
            }
            for mask in (0..size).filter(|m| m & bit == 0) {
                let mc_super = values[mask | bit] - values[mask];
                let slack = mc_super - min_below[mask];
                if slack > worst_slack {
                    worst_slack = slack;
                    let superset = Coalition::from_bits(mask as u64);
                    let target = min_below[mask];
                    let subset = subsets(superset)
                        .find(|s| values[s.index() | bit] - values[s.index()] == target)
                        .expect("subset-min transform tracks an attained minimum");
                    worst = Some(Violation::Submodularity {
                        player: i,
                        subset,
                        superset,
                        mc_subset: target,
                        mc_superset: mc_super,
                    });
                }
            }
        }
        Ok(AssumptionReport::from_witness(worst))
    }

    /// Checks that no listed replica adds value to a coalition that already
    /// holds another listed replica: `MC_j(S) = 0` whenever `S ∩ R \ {j} ≠ ∅`.
    pub fn verify_replication_redundancy(&self, replicas: &[usize]) -> Result<AssumptionReport> {
        for &r in replicas {
            self.check_player(r)?;
        }
        let values = self.value_table()?;
        let replica_set: Coalition = replicas.iter().copied().collect();
        let mut worst: Option<Violation> = None;
        let mut worst_abs = self.limits.tolerance;
        for &j in replicas {
            let others = replica_set.without(j);
            for mask in 0..values.len() as u64 {
                let s = Coalition::from_bits(mask);
                if s.contains(j) || s.intersection(others).is_empty() {
                    continue;
                }
                let mc = values[s.with(j).index()] - values[s.index()];
                if mc.abs() > worst_abs {
                    worst_abs = mc.abs();
                    worst = Some(Violation::Redundancy {
                        replica: j,
                        coalition: s,
                        marginal: mc,
                    });
                }
            }
        }
        Ok(AssumptionReport::from_witness(worst))
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        serde_json::from_str::<GameFile>(s)?.try_into()
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&GameFile::from(self))?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json_string()?)?;
        Ok(())
    }
}

fn check_player_count(n: usize) -> Result<()> {
    if n == 0 || n > MAX_PLAYERS {
        Err(Error::InvalidGame(format!(
            "player count must be in 1..={MAX_PLAYERS}, got {n}"
        )))
    } else {
        Ok(())
    }
}

pub(crate) fn check_cap(n_players: usize, cap: usize) -> Result<()> {
    if n_players > cap.min(MAX_PLAYERS) {
        Err(Error::Capacity { n_players, cap })
    } else {
        Ok(())
    }
}

/// `z_i(c)` from a full value table. Sums run in ascending bit-pattern order.
pub(crate) fn profile_from_values(values: &[f64], n: usize, player: usize) -> Vec<f64> {
    let mut sums = vec![0.0; n];
    let others = Coalition::grand(n).without(player);
    for s in subsets(others) {
        sums[s.len()] += values[s.with(player).index()] - values[s.index()];
    }
    sums.iter()
        .enumerate()
        .map(|(c, total)| total / binomial(n - 1, c))
        .collect()
}

/// Per-player average marginal contributions, `z[c] = z_i(c)` for `c = 0..N-1`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MarginalProfile {
    pub player: usize,
    pub z: Vec<f64>,
}

impl MarginalProfile {
    pub fn is_non_increasing(&self, tol: f64) -> bool {
        self.z.windows(2).all(|w| w[0] >= w[1] - tol)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Violation {
    /// `MC_player(subset) < MC_player(superset)` with `subset ⊆ superset`.
    Submodularity {
        player: usize,
        subset: Coalition,
        superset: Coalition,
        mc_subset: f64,
        mc_superset: f64,
    },
    /// A replica with non-zero marginal contribution to a coalition that
    /// already holds another replica.
    Redundancy {
        replica: usize,
        coalition: Coalition,
        marginal: f64,
    },
}

impl Violation {
    /// How far the inequality is violated; always positive.
    pub fn slack(&self) -> f64 {
        match self {
            Violation::Submodularity {
                mc_subset,
                mc_superset,
                ..
            } => mc_superset - mc_subset,
            Violation::Redundancy { marginal, .. } => marginal.abs(),
        }
    }

    /// Re-evaluates the witnessed inequality on `game`.
    pub fn recheck(&self, game: &GameSpec) -> Result<f64> {
        Ok(match *self {
            Violation::Submodularity {
                player,
                subset,
                superset,
                ..
            } => {
                game.marginal_contribution(player, superset)?
                    - game.marginal_contribution(player, subset)?
            }
            Violation::Redundancy {
                replica, coalition, ..
            } => game.marginal_contribution(replica, coalition)?.abs(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AssumptionReport {
    pub holds: bool,
    pub witness: Option<Violation>,
}

impl AssumptionReport {
    fn from_witness(witness: Option<Violation>) -> Self {
        AssumptionReport {
            holds: witness.is_none(),
            witness,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct GameFile {
    n_players: usize,
    valuation: ValuationFile,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
enum ValuationFile {
    Table { values: Vec<f64> },
    Facility { utilities: Vec<Vec<f64>> },
    Coverage { weights: Vec<f64>, sets: Vec<Vec<usize>> },
    Synthetic { kind: SyntheticKind, seed: u64 },
}

impl TryFrom<GameFile> for GameSpec {
    type Error = Error;

    fn try_from(file: GameFile) -> Result<Self> {
        let game = match file.valuation {
            ValuationFile::Table { values } => GameSpec::table(file.n_players, values)?,
            ValuationFile::Facility { utilities } => {
                GameSpec::facility(UtilityMatrix::from_rows(utilities)?)?
            }
            ValuationFile::Coverage { weights, sets } => {
                GameSpec::coverage(CoverageGame::new(weights, sets)?)?
            }
            ValuationFile::Synthetic { kind, seed } => {
                GameSpec::synthetic(file.n_players, SyntheticParams { kind, seed })?
            }
        };
        if game.n_players != file.n_players {
            return Err(Error::InvalidGame(format!(
                "n_players is {} but the valuation defines {} players",
                file.n_players, game.n_players
            )));
        }
        Ok(game)
    }
}

impl From<&GameSpec> for GameFile {
    fn from(game: &GameSpec) -> Self {
        let valuation = match &game.valuation {
            Valuation::Table(values) => ValuationFile::Table {
                values: values.clone(),
            },
            Valuation::Facility(m) => ValuationFile::Facility {
                utilities: m.rows().map(<[f64]>::to_vec).collect(),
            },
            Valuation::Coverage(g) => ValuationFile::Coverage {
                weights: g.weights.clone(),
                sets: g.sets.clone(),
            },
            Valuation::Synthetic(g) => ValuationFile::Synthetic {
                kind: g.params.kind,
                seed: g.params.seed,
            },
        };
        GameFile {
            n_players: game.n_players,
            valuation,
        }
    }
}
