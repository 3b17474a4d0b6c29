use core::fmt;

use alloc::string::String;

use crate::error::{Error, Result};
use crate::MAX_PLAYERS;

/// A set of players stored as membership bits; player `i` is bit `i`.
///
/// The player count is not stored: every function that needs it takes `n`
/// explicitly, and constructors validate that no bit at or above `n` is set.
#[derive(Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Coalition(u64);

impl Coalition {
    pub const EMPTY: Coalition = Coalition(0);

    pub fn from_bits(bits: u64, n: usize) -> Result<Self> {
        check_players(n)?;
        if bits & !Self::full(n).0 != 0 {
            return Err(Error::CoalitionOutOfRange { bits, n });
        }
        Ok(Coalition(bits))
    }

    /// Unchecked constructor for bits already known to be in range.
    #[inline]
    pub const fn from_bits_unchecked(bits: u64) -> Self {
        Coalition(bits)
    }

    pub fn from_players<I: IntoIterator<Item = usize>>(players: I, n: usize) -> Result<Self> {
        check_players(n)?;
        let mut bits = 0u64;
        for p in players {
            if p >= n {
                return Err(Error::CoalitionOutOfRange { bits: bits | (1 << p.min(63)), n });
            }
            bits |= 1 << p;
        }
        Ok(Coalition(bits))
    }

    /// The grand coalition `{0, ..., n-1}`.
    #[inline]
    pub const fn full(n: usize) -> Self {
        if n >= 64 {
            Coalition(u64::MAX)
        } else {
            Coalition((1u64 << n) - 1)
        }
    }

    #[inline]
    pub const fn bits(self) -> u64 {
        self.0
    }

    #[inline]
    pub const fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    #[inline]
    pub const fn is_empty(self) -> bool {
        self.0 == 0
    }

    #[inline]
    pub const fn contains(self, player: usize) -> bool {
        self.0 >> player & 1 == 1
    }

    #[inline]
    pub const fn is_subset_of(self, other: Coalition) -> bool {
        self.0 & !other.0 == 0
    }

    #[inline]
    pub const fn union(self, other: Coalition) -> Coalition {
        Coalition(self.0 | other.0)
    }

    #[inline]
    pub const fn intersection(self, other: Coalition) -> Coalition {
        Coalition(self.0 & other.0)
    }

    #[inline]
    pub const fn difference(self, other: Coalition) -> Coalition {
        Coalition(self.0 & !other.0)
    }

    #[inline]
    pub const fn is_disjoint(self, other: Coalition) -> bool {
        self.0 & other.0 == 0
    }

    #[inline]
    pub const fn with(self, player: usize) -> Coalition {
        Coalition(self.0 | 1 << player)
    }

    /// Complement within the player set of size `n`.
    #[inline]
    pub const fn complement(self, n: usize) -> Coalition {
        Coalition(!self.0 & Self::full(n).0)
    }

    /// Members in ascending order.
    pub fn players(self) -> Players {
        Players(self.0)
    }

    /// All subsets of `self` (including the empty set and `self`), in
    /// ascending bit order.
    pub fn subsets(self) -> Subsets {
        Subsets { mask: self.0, next: Some(0) }
    }

    /// Bitstring of length `n` with player 0 as the leftmost character.
    pub fn to_bitstring(self, n: usize) -> String {
        (0..n).map(|i| if self.contains(i) { '1' } else { '0' }).collect()
    }

    pub fn parse_bitstring(s: &str) -> Result<(Self, usize)> {
        let n = s.len();
        check_players(n)?;
        let mut bits = 0u64;
        for (i, c) in s.bytes().enumerate() {
            match c {
                b'1' => bits |= 1 << i,
                b'0' => {}
                _ => return Err(Error::InvalidParameter("bitstring must contain only 0 and 1")),
            }
        }
        Ok((Coalition(bits), n))
    }
}

impl fmt::Debug for Coalition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.players()).finish()
    }
}

pub(crate) fn check_players(n: usize) -> Result<()> {
    if n == 0 || n > MAX_PLAYERS {
        return Err(Error::PlayerCount { n, max: MAX_PLAYERS });
    }
    Ok(())
}

pub struct Players(u64);

impl Iterator for Players {
    type Item = usize;

    #[inline]
    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let p = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(p)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let c = self.0.count_ones() as usize;
        (c, Some(c))
    }
}

impl ExactSizeIterator for Players {}

pub struct Subsets {
    mask: u64,
    next: Option<u64>,
}

impl Iterator for Subsets {
    type Item = Coalition;

    fn next(&mut self) -> Option<Coalition> {
        let cur = self.next?;
        // next submask in ascending order
        self.next = if cur == self.mask { None } else { Some((cur.wrapping_sub(self.mask)) & self.mask) };
        Some(Coalition(cur))
    }
}

/// All `k`-subsets of `{0, ..., n-1}` in colexicographic order, which is
/// also ascending order of the bit value.
pub fn k_subsets(n: usize, k: usize) -> KSubsets {
    let next = if k > n || n > 63 {
        None
    } else if k == 0 {
        Some(0)
    } else {
        Some((1u64 << k) - 1)
    };
    KSubsets { limit: 1u64 << n, next }
}

pub struct KSubsets {
    limit: u64,
    next: Option<u64>,
}

impl Iterator for KSubsets {
    type Item = Coalition;

    fn next(&mut self) -> Option<Coalition> {
        let cur = self.next?;
        self.next = if cur == 0 {
            None
        } else {
            // Gosper's hack
            let c = cur & cur.wrapping_neg();
            let r = cur + c;
            let nxt = (((r ^ cur) >> 2) / c) | r;
            if nxt >= self.limit {
                None
            } else {
                Some(nxt)
            }
        };
        Some(Coalition(cur))
    }
}

/// Colexicographic rank of a coalition among all subsets of the same size.
pub fn colex_rank(set: Coalition) -> usize {
    set.players()
        .enumerate()
        .map(|(i, p)| crate::combinatorics::binomial_u64(p, i + 1) as usize)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    #[test]
    fn bitstring_round_trip() {
        let c = Coalition::from_players([0, 2], 4).unwrap();
        assert_eq!(c.to_bitstring(4), "1010");
        assert_eq!(Coalition::parse_bitstring("1010").unwrap(), (c, 4));
        assert!(Coalition::parse_bitstring("10x0").is_err());
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(Coalition::from_bits(0b1000, 3).is_err());
        assert!(Coalition::from_bits(0b0111, 3).is_ok());
        assert!(Coalition::from_players([3], 3).is_err());
        assert!(Coalition::from_bits(0, 33).is_err());
    }

    #[test]
    fn subsets_enumerates_power_set() {
        let c = Coalition::from_players([1, 3, 4], 5).unwrap();
        let subs: Vec<_> = c.subsets().collect();
        assert_eq!(subs.len(), 8);
        assert!(subs.windows(2).all(|w| w[0] < w[1]));
        assert!(subs.iter().all(|s| s.is_subset_of(c)));
        assert_eq!(Coalition::EMPTY.subsets().count(), 1);
    }

    #[test]
    fn k_subsets_are_ascending_and_ranked() {
        for n in 1..=8 {
            for k in 0..=n {
                let all: Vec<_> = k_subsets(n, k).collect();
                assert_eq!(all.len() as u64, crate::combinatorics::binomial_u64(n, k));
                for (i, s) in all.iter().enumerate() {
                    assert_eq!(s.len(), k);
                    assert_eq!(colex_rank(*s), i);
                }
                assert!(all.windows(2).all(|w| w[0] < w[1]));
            }
        }
        assert_eq!(k_subsets(3, 4).count(), 0);
    }
}
