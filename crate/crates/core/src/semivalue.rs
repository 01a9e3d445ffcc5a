//! Semivalue weight schemes and exact payoffs via the importance-weight
//! decomposition `φ_i = Σ_c α_c z_i(c)`.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{binomial, pow2};
use crate::error::{Error, Result};
use crate::game::{profile_from_values, GameSpec};

/// A semivalue, identified by its per-size coalition weights `w(c, n)`.
#[derive(Clone, Debug, PartialEq)]
pub enum WeightScheme {
    Shapley,
    Banzhaf,
    LeaveOneOut,
    RobustShapley,
    /// Importance weights `α_c` for `c = 0..N-1`, one per coalition size.
    Custom(Vec<f64>),
}

impl WeightScheme {
    pub const BUILT_IN: [WeightScheme; 4] = [
        WeightScheme::Shapley,
        WeightScheme::Banzhaf,
        WeightScheme::LeaveOneOut,
        WeightScheme::RobustShapley,
    ];

    /// Validated custom scheme: entries finite, non-negative, summing to 1.
    pub fn custom(alpha: Vec<f64>) -> Result<Self> {
        if alpha.is_empty() {
            return Err(Error::InvalidScheme("custom weights are empty".to_string()));
        }
        if let Some(a) = alpha.iter().find(|a| !a.is_finite() || **a < 0.0) {
            return Err(Error::InvalidScheme(format!(
                "custom weight {a} is not a finite non-negative number"
            )));
        }
        let total: f64 = alpha.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidScheme(format!(
                "custom weights sum to {total}, expected 1"
            )));
        }
        Ok(WeightScheme::Custom(alpha))
    }

    pub fn name(&self) -> &'static str {
        match self {
            WeightScheme::Shapley => "shapley",
            WeightScheme::Banzhaf => "banzhaf",
            WeightScheme::LeaveOneOut => "loo",
            WeightScheme::RobustShapley => "robust-shapley",
            WeightScheme::Custom(_) => "custom",
        }
    }
}

impl fmt::Display for WeightScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightScheme::Custom(alpha) => {
                f.write_str("custom:")?;
                for (j, a) in alpha.iter().enumerate() {
                    if j > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{a}")?;
                }
                Ok(())
            }
            other => f.write_str(other.name()),
        }
    }
}

impl FromStr for WeightScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(list) = s.strip_prefix("custom:") {
            let alpha = list
                .split(',')
                .map(|a| {
                    a.trim().parse::<f64>().map_err(|e| {
                        Error::InvalidScheme(format!("bad custom weight {a:?}: {e}"))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            return WeightScheme::custom(alpha);
        }
        match s {
            "shapley" => Ok(WeightScheme::Shapley),
            "banzhaf" => Ok(WeightScheme::Banzhaf),
            "loo" => Ok(WeightScheme::LeaveOneOut),
            "robust-shapley" => Ok(WeightScheme::RobustShapley),
            other => Err(Error::InvalidScheme(format!(
                "unknown scheme {other:?}; expected shapley, banzhaf, loo, robust-shapley or custom:<α list>"
            ))),
        }
    }
}

impl Serialize for WeightScheme {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for WeightScheme {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// `γ_n^c = ⌈(n-1)/2⌉!⌊(n-1)/2⌋! / (c!(n-c-1)!)` for `c < ⌊(n-1)/2⌋`, else 1.
pub fn robust_shapley_gamma(n: usize, c: usize) -> Result<f64> {
    check_size(c, n)?;
    Ok(gamma_unchecked(n, c))
}

/// The factorial ratio equals `C(n-1, c) / C(n-1, h)`, evaluated as the
/// product of `(j+1)/(n-1-j)` for `j = c..h-1`.
fn gamma_unchecked(n: usize, c: usize) -> f64 {
    let h = (n - 1) / 2;
    (c..h).fold(1.0, |acc, j| acc * (j + 1) as f64 / (n - 1 - j) as f64)
}

fn check_size(c: usize, n: usize) -> Result<()> {
    if n == 0 || c >= n {
        Err(Error::SizeOutOfRange { size: c, n_players: n })
    } else {
        Ok(())
    }
}

/// `w(c, n)`, the weight of one coalition of size `c` among `n` players.
///
/// A custom scheme defined on `N` players is extended to `n ≥ N` players by
/// keeping its size-`c` importance fixed: `w(c, n) = α_c / C(n-1, c)` for
/// `c < N` and 0 for larger coalitions.
pub fn coalition_weight(scheme: &WeightScheme, c: usize, n: usize) -> Result<f64> {
    check_size(c, n)?;
    Ok(match scheme {
        WeightScheme::Shapley => shapley_weight(c, n),
        WeightScheme::Banzhaf => pow2(1 - n as i64),
        WeightScheme::LeaveOneOut => {
            if c == n - 1 {
                1.0
            } else {
                0.0
            }
        }
        WeightScheme::RobustShapley => gamma_unchecked(n, c) * shapley_weight(c, n),
        WeightScheme::Custom(alpha) => {
            if n < alpha.len() {
                return Err(Error::InvalidScheme(format!(
                    "custom weights for {} players cannot be applied to {n}",
                    alpha.len()
                )));
            }
            alpha.get(c).map_or(0.0, |a| a / binomial(n - 1, c))
        }
    })
}

fn shapley_weight(c: usize, n: usize) -> f64 {
    1.0 / (n as f64 * binomial(n - 1, c))
}

/// `α_c = C(n-1, c) · w(c, n)` for `c = 0..n-1`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ImportanceWeights {
    pub n_players: usize,
    pub alpha: Vec<f64>,
}

impl ImportanceWeights {
    pub fn sum(&self) -> f64 {
        self.alpha.iter().sum()
    }

    /// `Σ_c α_c z[c]`.
    pub fn apply(&self, z: &[f64]) -> f64 {
        self.alpha.iter().zip(z).map(|(a, z)| a * z).sum()
    }
}

pub fn importance_weights(scheme: &WeightScheme, n: usize) -> Result<ImportanceWeights> {
    if n == 0 {
        return Err(Error::InvalidArgument("player count must be positive".to_string()));
    }
    let alpha = match scheme {
        WeightScheme::Shapley => vec![1.0 / n as f64; n],
        WeightScheme::Custom(alpha) => {
            if alpha.len() != n {
                return Err(Error::InvalidScheme(format!(
                    "custom weights define {} players, game has {n}",
                    alpha.len()
                )));
            }
            alpha.clone()
        }
        WeightScheme::RobustShapley => (0..n).map(|c| gamma_unchecked(n, c) / n as f64).collect(),
        _ => (0..n)
            .map(|c| Ok(binomial(n - 1, c) * coalition_weight(scheme, c, n)?))
            .collect::<Result<_>>()?,
    };
    Ok(ImportanceWeights { n_players: n, alpha })
}

/// `φ_i = Σ_c α_c z_i(c)` by exact enumeration.
pub fn exact_payoff(game: &GameSpec, scheme: &WeightScheme, player: usize) -> Result<f64> {
    let weights = importance_weights(scheme, game.n_players())?;
    let profile = game.average_marginal_profile(player)?;
    Ok(weights.apply(&profile.z))
}

/// Exact payoffs of every player from one shared value table.
pub fn exact_payoffs_all(game: &GameSpec, scheme: &WeightScheme) -> Result<Vec<f64>> {
    let n = game.n_players();
    let weights = importance_weights(scheme, n)?;
    let values = game.value_table()?;
    Ok((0..n)
        .into_par_iter()
        .map(|i| weights.apply(&profile_from_values(&values, n, i)))
        .collect())
}
