//! Packed coalitions of up to 63 players.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest player count representable by a [`Coalition`].
pub const MAX_PLAYERS: usize = 63;

/// A set of player indices stored as a bit pattern: player `j` is a member iff
/// bit `j` is set. The bit pattern doubles as the index into explicit value
/// tables, so coalition `{0}` is index 1 and `{0, 1}` is index 3.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Coalition(u64);

impl Coalition {
    pub const EMPTY: Coalition = Coalition(0);

    pub const fn from_bits(bits: u64) -> Self {
        Coalition(bits)
    }

    pub const fn bits(self) -> u64 {
        self.0
    }

    /// Index into a value table of length `2^N`.
    pub const fn index(self) -> usize {
        self.0 as usize
    }

    /// All players `0..n`.
    pub fn grand(n: usize) -> Self {
        assert!(n <= MAX_PLAYERS, "at most {MAX_PLAYERS} players are supported");
        Coalition(if n == 0 { 0 } else { u64::MAX >> (64 - n) })
    }

    pub fn singleton(player: usize) -> Self {
        assert!(player < MAX_PLAYERS, "player index {player} too large");
        Coalition(1 << player)
    }

    /// Builds a coalition, rejecting indices that do not fit the packed form.
    pub fn try_from_players<I: IntoIterator<Item = usize>>(players: I) -> Result<Self> {
        let mut bits = 0u64;
        for p in players {
            if p >= MAX_PLAYERS {
                return Err(Error::InvalidPlayer {
                    player: p,
                    n_players: MAX_PLAYERS,
                });
            }
            bits |= 1 << p;
        }
        Ok(Coalition(bits))
    }

    pub const fn contains(self, player: usize) -> bool {
        player < 64 && self.0 >> player & 1 == 1
    }

    pub fn with(self, player: usize) -> Self {
        Coalition(self.0 | 1 << player)
    }

    pub fn without(self, player: usize) -> Self {
        Coalition(self.0 & !(1 << player))
    }

    pub const fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub const fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub const fn is_subset_of(self, other: Coalition) -> bool {
        self.0 & !other.0 == 0
    }

    pub const fn union(self, other: Coalition) -> Self {
        Coalition(self.0 | other.0)
    }

    pub const fn intersection(self, other: Coalition) -> Self {
        Coalition(self.0 & other.0)
    }

    pub const fn difference(self, other: Coalition) -> Self {
        Coalition(self.0 & !other.0)
    }

    /// Members in ascending order.
    pub fn members(self) -> Members {
        Members(self.0)
    }

    /// Checks every member lies in `[0, n)`.
    pub fn validate(self, n_players: usize) -> Result<()> {
        if n_players >= 64 || self.0 >> n_players == 0 {
            Ok(())
        } else {
            Err(Error::InvalidCoalition {
                coalition: self,
                n_players,
            })
        }
    }
}

impl FromIterator<usize> for Coalition {
    /// Panics on indices ≥ 63; use [`Coalition::try_from_players`] for untrusted input.
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        Coalition::try_from_players(iter).expect("player index does not fit a packed coalition")
    }
}

impl fmt::Debug for Coalition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Coalition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (n, p) in self.members().enumerate() {
            if n > 0 {
                f.write_str(",")?;
            }
            write!(f, "{p}")?;
        }
        f.write_str("}")
    }
}

/// Iterator over the members of a coalition.
#[derive(Clone, Debug)]
pub struct Members(u64);

impl Iterator for Members {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let p = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(p)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.0.count_ones() as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for Members {}

/// Every subset of `mask` in ascending bit-pattern order, `∅` first.
pub fn subsets(mask: Coalition) -> impl Iterator<Item = Coalition> {
    let m = mask.0;
    let mut next = Some(0u64);
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == m { None } else { Some((cur | !m).wrapping_add(1) & m) };
        Some(Coalition(cur))
    })
}
