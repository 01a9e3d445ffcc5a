use thiserror::Error;

use crate::coalition::Coalition;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// A `(size, player)` cell of a sample batch that an estimator needed but no
/// sample populated. `player == None` refers to the per-size mean `U[size]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub struct MissingCell {
    pub size: usize,
    pub player: Option<usize>,
}

impl std::fmt::Display for MissingCell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.player {
            Some(p) => write!(f, "(c={}, player {})", self.size, p),
            None => write!(f, "(c={}, all players)", self.size),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("player {player} is out of range for a {n_players}-player game")]
    InvalidPlayer { player: usize, n_players: usize },

    #[error("coalition {coalition} is not a subset of a {n_players}-player game")]
    InvalidCoalition {
        coalition: Coalition,
        n_players: usize,
    },

    #[error("player {player} is already a member of coalition {coalition}")]
    PlayerInCoalition { player: usize, coalition: Coalition },

    #[error("{n_players} players exceeds the exact enumeration cap of {cap}")]
    Capacity { n_players: usize, cap: usize },

    #[error("invalid game: {0}")]
    InvalidGame(String),

    #[error("invalid weight scheme: {0}")]
    InvalidScheme(String),

    #[error("coalition size {size} is out of range for {n_players} players")]
    SizeOutOfRange { size: usize, n_players: usize },

    #[error("no closed-form limit is derived for the {0} scheme")]
    NotDerived(String),

    #[error("samples leave {} required cells uncovered: {}", .0.len(), format_cells(.0))]
    Uncovered(Vec<MissingCell>),

    #[error("assumption violated at coalition {coalition}: {detail}")]
    AssumptionViolation {
        coalition: Coalition,
        detail: String,
    },

    #[error("cross-check failed: {0}")]
    Inconsistent(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn format_cells(cells: &[MissingCell]) -> String {
    const SHOWN: usize = 8;
    let mut s = cells
        .iter()
        .take(SHOWN)
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(", ");
    if cells.len() > SHOWN {
        s.push_str(&format!(", ... ({} more)", cells.len() - SHOWN));
    }
    s
}
