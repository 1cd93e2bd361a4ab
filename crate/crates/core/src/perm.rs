//! Permutations of `[k]`, prefix/suffix reversals, and Lehmer ranking.
//!
//! Positions and values are 1-indexed at the interface. Internally the
//! values live in a 0-indexed `Vec`, which never leaks out.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};

/// Largest length for which `k!` fits in a `u64`.
pub const MAX_RANK_LEN: usize = 20;

const FACTORIALS: [u64; MAX_RANK_LEN + 1] = {
    let mut f = [1u64; MAX_RANK_LEN + 1];
    let mut i = 1;
    while i <= MAX_RANK_LEN {
        f[i] = f[i - 1] * i as u64;
        i += 1;
    }
    f
};

/// `n!` for `n <= 20`.
pub fn factorial(n: usize) -> Option<u64> {
    FACTORIALS.get(n).copied()
}

/// A bijection on `[k]`, stored as the sequence `π(1), …, π(k)`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    values: Vec<usize>,
}

impl Permutation {
    /// Builds a permutation from its 1-indexed values, checking bijectivity.
    pub fn new(values: Vec<usize>) -> Result<Self> {
        let k = values.len();
        if k == 0 {
            return Err(Error::InvalidPermutation("length must be at least 1".into()));
        }
        let mut seen = alloc::vec![false; k];
        for &v in &values {
            if v == 0 || v > k {
                return Err(Error::InvalidPermutation(format!(
                    "value {v} is outside 1..={k}"
                )));
            }
            if core::mem::replace(&mut seen[v - 1], true) {
                return Err(Error::InvalidPermutation(format!("value {v} repeats")));
            }
        }
        Ok(Permutation { values })
    }

    pub(crate) fn from_vec_unchecked(values: Vec<usize>) -> Self {
        debug_assert!(Permutation::new(values.clone()).is_ok());
        Permutation { values }
    }

    pub fn identity(k: usize) -> Self {
        assert!(k >= 1, "identity needs k >= 1");
        Permutation {
            values: (1..=k).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// Always false; a permutation has `k >= 1`.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }

    pub fn into_values(self) -> Vec<usize> {
        self.values
    }

    /// `π(pos)` for a 1-indexed position.
    pub fn at(&self, pos: usize) -> usize {
        self.values[pos - 1]
    }

    /// `π⁻¹(value)` as a 1-indexed position.
    pub fn position_of(&self, value: usize) -> usize {
        self.values
            .iter()
            .position(|&v| v == value)
            .map(|i| i + 1)
            .expect("value outside 1..=k")
    }

    /// Inverse table: `inv[v]` is the 1-indexed position of value `v` (`inv[0]` unused).
    pub fn positions(&self) -> Vec<usize> {
        let mut inv = alloc::vec![0; self.len() + 1];
        for (i, &v) in self.values.iter().enumerate() {
            inv[v] = i + 1;
        }
        inv
    }

    pub fn is_identity(&self) -> bool {
        self.values.iter().enumerate().all(|(i, &v)| v == i + 1)
    }

    pub fn apply(&self, op: FlipOp) -> Result<Permutation> {
        let mut out = self.clone();
        out.apply_in_place(op)?;
        Ok(out)
    }

    pub fn apply_in_place(&mut self, op: FlipOp) -> Result<()> {
        op.validate(self.len())?;
        let k = self.len();
        match op.kind {
            FlipKind::Prefix => self.values[..op.len].reverse(),
            FlipKind::Suffix => self.values[k - op.len..].reverse(),
        }
        Ok(())
    }

    /// Left-to-right fold of [`Permutation::apply`].
    pub fn apply_all<'a, I>(&self, ops: I) -> Result<Permutation>
    where
        I: IntoIterator<Item = &'a FlipOp>,
    {
        let mut out = self.clone();
        for (index, op) in ops.into_iter().enumerate() {
            out.apply_in_place(*op).map_err(|e| Error::InvalidFlipAt {
                index,
                source: alloc::boxed::Box::new(e),
            })?;
        }
        Ok(out)
    }

    /// Lehmer-code rank in `[0, k!)`; the identity has rank 0.
    pub fn rank(&self) -> Result<Rank> {
        let k = self.len();
        if k > MAX_RANK_LEN {
            return Err(Error::Precondition(format!(
                "rank supports k <= {MAX_RANK_LEN}, got {k}"
            )));
        }
        Ok(Rank(lehmer_rank(self.values.iter().map(|&v| v - 1), k)))
    }

    pub fn unrank(rank: Rank, k: usize) -> Result<Permutation> {
        let total = factorial(k).filter(|_| k >= 1).ok_or(Error::RankOutOfRange {
            rank: rank.0,
            k,
        })?;
        if rank.0 >= total {
            return Err(Error::RankOutOfRange { rank: rank.0, k });
        }
        let mut buf = [0u8; MAX_RANK_LEN];
        lehmer_unrank(rank.0, &mut buf[..k]);
        Ok(Permutation {
            values: buf[..k].iter().map(|&v| v as usize + 1).collect(),
        })
    }

    /// Every permutation of `[k]` in rank order.
    pub fn all(k: usize) -> impl Iterator<Item = Permutation> {
        let total = factorial(k).expect("k too large to enumerate");
        (0..total).map(move |r| Permutation::unrank(Rank(r), k).expect("rank in range"))
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({self})")
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.values.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Parses `"2,3,4,5,1,8,6,7"`, `"2 3 4 5 1 8 6 7"`, or either wrapped in parentheses.
impl FromStr for Permutation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let trimmed = s.trim().trim_start_matches('(').trim_end_matches(')');
        let values = trimmed
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|_| Error::Parse(format!("not a positive integer: {t:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Permutation::new(values)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FlipKind {
    Prefix,
    Suffix,
}

/// A prefix or suffix reversal of `len` positions.
///
/// Canonical form: `Prefix(len)` with `2 <= len <= k`, `Suffix(len)` with
/// `2 <= len <= k - 1`. A full-length suffix reversal is `Prefix(k)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FlipOp {
    pub kind: FlipKind,
    pub len: usize,
}

impl FlipOp {
    pub const fn prefix(len: usize) -> Self {
        FlipOp {
            kind: FlipKind::Prefix,
            len,
        }
    }

    pub const fn suffix(len: usize) -> Self {
        FlipOp {
            kind: FlipKind::Suffix,
            len,
        }
    }

    pub fn is_suffix(&self) -> bool {
        self.kind == FlipKind::Suffix
    }

    pub fn is_valid_for(&self, k: usize) -> bool {
        match self.kind {
            FlipKind::Prefix => (2..=k).contains(&self.len),
            FlipKind::Suffix => self.len >= 2 && self.len < k,
        }
    }

    pub fn validate(&self, k: usize) -> Result<()> {
        if self.is_valid_for(k) {
            Ok(())
        } else {
            Err(Error::InvalidFlip {
                op: format!("{self}"),
                k,
            })
        }
    }

    /// Canonical prefix reversals for length `k`: `Prefix(2..=k)`.
    pub fn prefixes(k: usize) -> impl Iterator<Item = FlipOp> {
        (2..=k).map(FlipOp::prefix)
    }

    /// Canonical prefix and suffix reversals for length `k` (`2k - 3` of them for `k >= 2`).
    pub fn all(k: usize) -> impl Iterator<Item = FlipOp> {
        FlipOp::prefixes(k).chain((2..k).map(FlipOp::suffix))
    }

    /// Parses a space-separated sequence such as `"p4 s3 p2"`.
    pub fn parse_seq(s: &str) -> Result<Vec<FlipOp>> {
        s.split_whitespace().map(str::parse).collect()
    }
}

impl fmt::Display for FlipOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.kind {
            FlipKind::Prefix => 'p',
            FlipKind::Suffix => 's',
        };
        write!(f, "{tag}{}", self.len)
    }
}

impl FromStr for FlipOp {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Parse(format!("not a flip (expected p<len> or s<len>): {s:?}"));
        let mut chars = s.chars();
        let kind = match chars.next() {
            Some('p' | 'P') => FlipKind::Prefix,
            Some('s' | 'S') => FlipKind::Suffix,
            _ => return Err(bad()),
        };
        let len = chars.as_str().parse::<usize>().map_err(|_| bad())?;
        Ok(FlipOp { kind, len })
    }
}

/// Formats a flip sequence as `"p4 s3 p2"`.
pub fn format_ops(ops: &[FlipOp]) -> String {
    let mut out = String::new();
    for (i, op) in ops.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(&format!("{op}"));
    }
    out
}

/// The unique canonical flip taking `from` to `to`, if any.
pub fn flip_between(from: &Permutation, to: &Permutation) -> Option<FlipOp> {
    let k = from.len();
    if k != to.len() {
        return None;
    }
    let a = from.values.iter().zip(&to.values).position(|(x, y)| x != y)?;
    let b = from.values.iter().zip(&to.values).rposition(|(x, y)| x != y)?;
    let op = if a == 0 {
        FlipOp::prefix(b + 1)
    } else if b == k - 1 {
        FlipOp::suffix(k - a)
    } else {
        return None;
    };
    let reversed = from.values[a..=b]
        .iter()
        .rev()
        .eq(to.values[a..=b].iter());
    reversed.then_some(op)
}

/// Index of a permutation in Lehmer order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rank(pub u64);

/// Lehmer rank of a 0-indexed sequence of `k <= 20` distinct values.
pub(crate) fn lehmer_rank<I: IntoIterator<Item = usize>>(values: I, k: usize) -> u64 {
    let mut unused: u32 = (1u32 << k) - 1;
    let mut rank = 0u64;
    for (i, v) in values.into_iter().enumerate() {
        let smaller = (unused & ((1u32 << v) - 1)).count_ones() as u64;
        rank += smaller * FACTORIALS[k - 1 - i];
        unused &= !(1u32 << v);
    }
    rank
}

/// Inverse of [`lehmer_rank`]; writes 0-indexed values into `out`.
pub(crate) fn lehmer_unrank(mut rank: u64, out: &mut [u8]) {
    let k = out.len();
    let mut unused: u32 = (1u32 << k) - 1;
    for (i, slot) in out.iter_mut().enumerate() {
        let f = FACTORIALS[k - 1 - i];
        let mut digit = (rank / f) as u32;
        rank %= f;
        // select the digit-th set bit of `unused`
        let mut bits = unused;
        while digit > 0 {
            bits &= bits - 1;
            digit -= 1;
        }
        let v = bits.trailing_zeros();
        *slot = v as u8;
        unused &= !(1u32 << v);
    }
}
