//! Signed (burnt) permutations and the correspondence between them and the
//! singleton-free permutations of twice the length.

use alloc::format;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::perm::{factorial, lehmer_rank, Permutation};
use crate::structure::{approx_classes, PairMap};

/// Orientation of one letter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn from_i8(x: i8) -> Option<Sign> {
        match x {
            1 => Some(Sign::Plus),
            -1 => Some(Sign::Minus),
            _ => None,
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn flipped(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

/// An element of `S_d × {−1, +1}^d`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SignedPermutation {
    perm: Permutation,
    signs: Vec<Sign>,
}

impl SignedPermutation {
    pub fn new(perm: Permutation, signs: Vec<Sign>) -> Result<Self> {
        if perm.len() != signs.len() {
            return Err(Error::LengthMismatch {
                expected: perm.len(),
                got: signs.len(),
            });
        }
        Ok(SignedPermutation { perm, signs })
    }

    /// `(1, …, d)` with every sign positive.
    pub fn identity(d: usize) -> Self {
        SignedPermutation {
            perm: Permutation::identity(d),
            signs: alloc::vec![Sign::Plus; d],
        }
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn perm(&self) -> &Permutation {
        &self.perm
    }

    pub fn signs(&self) -> &[Sign] {
        &self.signs
    }

    /// Reverses the first `len` entries and negates their signs; `1 <= len <= d`.
    pub fn prefix_flip(&self, len: usize) -> Result<SignedPermutation> {
        let d = self.len();
        if len == 0 || len > d {
            return Err(Error::InvalidFlip {
                op: format!("p{len}"),
                k: d,
            });
        }
        Ok(self.flip_range(0, len))
    }

    /// Reverses the last `len` entries and negates their signs; `1 <= len <= d - 1`.
    pub fn suffix_flip(&self, len: usize) -> Result<SignedPermutation> {
        let d = self.len();
        if len == 0 || len >= d {
            return Err(Error::InvalidFlip {
                op: format!("s{len}"),
                k: d,
            });
        }
        Ok(self.flip_range(d - len, d))
    }

    fn flip_range(&self, lo: usize, hi: usize) -> SignedPermutation {
        let mut values = self.perm.values().to_vec();
        values[lo..hi].reverse();
        let mut signs = self.signs.clone();
        signs[lo..hi].reverse();
        for s in &mut signs[lo..hi] {
            *s = s.flipped();
        }
        SignedPermutation {
            perm: Permutation::from_vec_unchecked(values),
            signs,
        }
    }

    /// Sign bits, little-endian: bit `i` is set when entry `i + 1` is negative.
    pub fn sign_bits(&self) -> u64 {
        self.signs
            .iter()
            .enumerate()
            .filter(|(_, &s)| s == Sign::Minus)
            .fold(0u64, |acc, (i, _)| acc | 1 << i)
    }

    /// State index `rank · 2^d + sign_bits`; the all-positive identity is 0.
    pub fn index(&self) -> Result<u64> {
        let d = self.len();
        if d > MAX_SIGNED_LEN {
            return Err(Error::Precondition(format!(
                "signed indexing supports d <= {MAX_SIGNED_LEN}, got {d}"
            )));
        }
        let rank = lehmer_rank(self.perm.values().iter().map(|&v| v - 1), d);
        Ok((rank << d) | self.sign_bits())
    }

    pub fn from_index(index: u64, d: usize) -> Result<SignedPermutation> {
        let total = signed_state_count(d).ok_or(Error::RankOutOfRange { rank: index, k: d })?;
        if d == 0 || index >= total {
            return Err(Error::RankOutOfRange { rank: index, k: d });
        }
        let perm = Permutation::unrank(crate::perm::Rank(index >> d), d)?;
        let signs = (0..d)
            .map(|i| {
                if index >> i & 1 == 1 {
                    Sign::Minus
                } else {
                    Sign::Plus
                }
            })
            .collect();
        Ok(SignedPermutation { perm, signs })
    }

    /// Every signed permutation of length `d`, in index order.
    pub fn all(d: usize) -> impl Iterator<Item = SignedPermutation> {
        let total = signed_state_count(d).expect("d too large to enumerate");
        (0..total).map(move |i| SignedPermutation::from_index(i, d).expect("index in range"))
    }
}

/// Largest `d` with `d! · 2^d` indexable in a `u64`.
pub const MAX_SIGNED_LEN: usize = 16;

/// `d! · 2^d`.
pub fn signed_state_count(d: usize) -> Option<u64> {
    if d > MAX_SIGNED_LEN {
        return None;
    }
    factorial(d)?.checked_mul(1u64 << d)
}

impl fmt::Debug for SignedPermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({self})")
    }
}

/// `"+1 -3 +2"`
impl fmt::Display for SignedPermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (v, s)) in self.perm.values().iter().zip(&self.signs).enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            let c = if *s == Sign::Plus { '+' } else { '-' };
            write!(f, "{c}{v}")?;
        }
        Ok(())
    }
}

impl FromStr for SignedPermutation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut values = Vec::new();
        let mut signs = Vec::new();
        for tok in s.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()) {
            let (sign, digits) = if let Some(rest) = tok.strip_prefix('+') {
                (Sign::Plus, rest)
            } else if let Some(rest) = tok.strip_prefix('-').or_else(|| tok.strip_prefix('−')) {
                (Sign::Minus, rest)
            } else {
                return Err(Error::Parse(format!(
                    "signed entry needs a leading + or -: {tok:?}"
                )));
            };
            let v = digits
                .parse::<usize>()
                .map_err(|_| Error::Parse(format!("not a signed integer: {tok:?}")))?;
            values.push(v);
            signs.push(sign);
        }
        SignedPermutation::new(Permutation::new(values)?, signs)
    }
}

/// Whether every pair `{2m-1, 2m}` sits at positions `(2i-1, 2i)` for some `i`.
///
/// Pair-aligned permutations are singleton-free. The converse fails only for
/// the `2d` cyclic rotations (`d >= 2`) whose pairs wrap across the ends, such
/// as `(4,1,2,3)`: there every letter shares a single adjacency class with its
/// partner, yet the pairs straddle positions `(2i, 2i+1)` and `(2d, 1)`.
pub fn is_pair_aligned(pi: &Permutation) -> bool {
    let Ok(pm) = PairMap::new(pi.len()) else {
        return false;
    };
    pi.values().chunks(2).all(|w| pm.partner(w[1]) == w[0])
}

/// Maps a pair-aligned `π ∈ S_{2d}` to `(π*, x̂)` with
/// `π*(i) = ⌈π(2i)/2⌉` and `x̂(i) = o_{π(2i)}`.
pub fn phi_iso(pi: &Permutation) -> Result<SignedPermutation> {
    let k = pi.len();
    let pm = PairMap::new(k)?;
    if !is_pair_aligned(pi) {
        let bs = approx_classes(pi, &pm)?;
        return Err(Error::Precondition(if bs.singletons != 0 {
            format!("{pi} has {} singletons", bs.singletons)
        } else {
            format!("{pi} is singleton-free but its pairs wrap across the ends")
        }));
    }
    let d = k / 2;
    let mut values = Vec::with_capacity(d);
    let mut signs = Vec::with_capacity(d);
    for i in 1..=d {
        let v = pi.at(2 * i);
        values.push(v.div_ceil(2));
        signs.push(if pm.direction(v) > 0 {
            Sign::Plus
        } else {
            Sign::Minus
        });
    }
    SignedPermutation::new(Permutation::new(values)?, signs)
}

/// The unique pair-aligned `π ∈ S_{2d}` with `phi_iso(π) = sp`.
pub fn phi_inverse(sp: &SignedPermutation) -> Permutation {
    let d = sp.len();
    let pm = PairMap::new(2 * d).expect("2d is even");
    let mut values = alloc::vec![0; 2 * d];
    for (i, (&letter, &sign)) in sp.perm.values().iter().zip(&sp.signs).enumerate() {
        // o_v = +1 exactly when v is odd
        let v = match sign {
            Sign::Plus => 2 * letter - 1,
            Sign::Minus => 2 * letter,
        };
        values[2 * i + 1] = v;
        values[2 * i] = pm.partner(v);
    }
    Permutation::from_vec_unchecked(values)
}

/// Outcome of comparing the prefix-reversal graph on singleton-free
/// permutations of length `2d` with the burnt pancake graph on `d` letters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IsoReport {
    pub d: usize,
    /// `d! · 2^d`
    pub expected_size: u64,
    /// `|{π ∈ S_{2d} : S(π) = 0}|`
    pub singleton_free: u64,
    /// Singleton-free permutations that are not pair-aligned.
    pub unaligned: Vec<Permutation>,
    /// `|{π ∈ S_{2d} : π pair-aligned}|`
    pub aligned: u64,
    /// `phi_iso` is a bijection from the aligned set onto `S*_d`, inverted by `phi_inverse`.
    pub bijective: bool,
    /// Edges of the induced subgraph on the aligned set (counted once per unordered pair).
    pub aligned_edges: u64,
    pub signed_edges: u64,
    /// The image of the aligned induced subgraph's edge set equals the signed edge set.
    pub edges_match: bool,
    /// Edges of the induced subgraph on the full singleton-free set.
    pub singleton_free_edges: u64,
}

impl IsoReport {
    /// The isomorphism holds on the pair-aligned stratum.
    pub fn aligned_ok(&self) -> bool {
        self.aligned == self.expected_size && self.bijective && self.edges_match
    }

    /// The singleton-free stratum itself has `d! · 2^d` states and is the aligned one.
    pub fn singleton_free_ok(&self) -> bool {
        self.singleton_free == self.expected_size && self.unaligned.is_empty()
    }
}

/// Largest `d` the isomorphism check accepts (it enumerates `S_{2d}`).
pub const MAX_ISO_D: usize = 3;

/// Enumerates `S_{2d}` and compares the induced prefix-reversal subgraphs
/// with the burnt pancake graph, edge by edge.
pub fn check_isomorphism(d: usize) -> Result<IsoReport> {
    use alloc::collections::BTreeSet;
    use crate::perm::FlipOp;

    if d == 0 || d > MAX_ISO_D {
        return Err(Error::Precondition(format!(
            "isomorphism check supports 1 <= d <= {MAX_ISO_D}, got {d}"
        )));
    }
    let k = 2 * d;
    let pm = PairMap::new(k)?;
    let expected_size = signed_state_count(d).expect("small d");

    let mut free_set = BTreeSet::new();
    let mut aligned_set = BTreeSet::new();
    let mut unaligned = Vec::new();
    for pi in Permutation::all(k) {
        if approx_classes(&pi, &pm)?.singletons == 0 {
            if is_pair_aligned(&pi) {
                aligned_set.insert(pi.clone());
            } else {
                unaligned.push(pi.clone());
            }
            free_set.insert(pi);
        }
    }
    let induced_edges = |set: &BTreeSet<Permutation>| -> BTreeSet<(Permutation, Permutation)> {
        let mut edges = BTreeSet::new();
        for a in set {
            for op in FlipOp::prefixes(k) {
                let b = a.apply(op).expect("canonical flip");
                if set.contains(&b) {
                    let e = if *a < b { (a.clone(), b) } else { (b, a.clone()) };
                    edges.insert(e);
                }
            }
        }
        edges
    };

    let mut images = BTreeSet::new();
    let mut bijective = true;
    for pi in &aligned_set {
        let sp = phi_iso(pi)?;
        bijective &= phi_inverse(&sp) == *pi;
        images.insert(sp.index()?);
    }
    bijective &= images.len() as u64 == expected_size && aligned_set.len() as u64 == expected_size;

    let aligned_edges = induced_edges(&aligned_set);
    let mapped: BTreeSet<(u64, u64)> = aligned_edges
        .iter()
        .map(|(a, b)| {
            let (x, y) = (phi_iso(a)?.index()?, phi_iso(b)?.index()?);
            Ok((x.min(y), x.max(y)))
        })
        .collect::<Result<_>>()?;
    let mut signed_edges = BTreeSet::new();
    for sp in SignedPermutation::all(d) {
        let x = sp.index()?;
        for len in 1..=d {
            let y = sp.prefix_flip(len)?.index()?;
            signed_edges.insert((x.min(y), x.max(y)));
        }
    }

    Ok(IsoReport {
        d,
        expected_size,
        singleton_free: free_set.len() as u64,
        aligned: aligned_set.len() as u64,
        unaligned,
        bijective,
        aligned_edges: aligned_edges.len() as u64,
        signed_edges: signed_edges.len() as u64,
        edges_match: mapped == signed_edges && mapped.len() == aligned_edges.len(),
        singleton_free_edges: induced_edges(&free_set).len() as u64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn sp(s: &str) -> SignedPermutation {
        s.parse().unwrap()
    }

    #[test]
    fn prefix_examples() {
        assert_eq!(sp("+1 +2").prefix_flip(1).unwrap(), sp("-1 +2"));
        assert_eq!(sp("-2 +1").prefix_flip(2).unwrap(), sp("-1 +2"));
        let x = sp("+3 -1 +2");
        for len in 1..=3 {
            assert_eq!(x.prefix_flip(len).unwrap().prefix_flip(len).unwrap(), x);
        }
        assert!(x.prefix_flip(0).is_err());
        assert!(x.prefix_flip(4).is_err());
    }

    #[test]
    fn suffix_examples() {
        assert_eq!(sp("+1 +2 +3").suffix_flip(1).unwrap(), sp("+1 +2 -3"));
        assert_eq!(sp("+1 +2 +3").suffix_flip(2).unwrap(), sp("+1 -3 -2"));
        let x = sp("+3 -1 +2");
        for len in 1..3 {
            assert_eq!(x.suffix_flip(len).unwrap().suffix_flip(len).unwrap(), x);
        }
        assert!(x.suffix_flip(3).is_err());
        assert!(x.suffix_flip(0).is_err());
    }

    #[test]
    fn phi_examples() {
        for d in 1..=4 {
            let img = phi_iso(&Permutation::identity(2 * d)).unwrap();
            assert_eq!(img.perm(), &Permutation::identity(d));
            assert!(img.signs().iter().all(|&s| s == Sign::Minus));
            assert_eq!(phi_inverse(&img), Permutation::identity(2 * d));
        }
        let pi: Permutation = "2 1 4 3".parse().unwrap();
        assert_eq!(phi_iso(&pi).unwrap(), sp("+1 +2"));
        assert_eq!(phi_inverse(&sp("+1 +2")), pi);
        assert!(matches!(
            phi_iso(&"1 3 2 4".parse().unwrap()),
            Err(Error::Precondition(_))
        ));
        // singleton-free, but the pair {3,4} straddles the ends
        assert!(matches!(
            phi_iso(&"4 1 2 3".parse().unwrap()),
            Err(Error::Precondition(_))
        ));
        assert!(phi_iso(&Permutation::identity(3)).is_err());
    }

    #[test]
    fn index_round_trip() {
        for d in 1..=4 {
            let total = signed_state_count(d).unwrap();
            for i in 0..total {
                let s = SignedPermutation::from_index(i, d).unwrap();
                assert_eq!(s.index().unwrap(), i);
            }
            assert!(SignedPermutation::from_index(total, d).is_err());
        }
        assert_eq!(SignedPermutation::identity(3).index().unwrap(), 0);
        assert_eq!(sp("+1 +2 -3").sign_bits(), 0b100);
    }

    #[test]
    fn text_format() {
        let x = sp("+1 -3 +2");
        assert_eq!(alloc::format!("{x}"), "+1 -3 +2");
        assert_eq!(sp("−1 +2"), SignedPermutation::new(Permutation::identity(2), vec![Sign::Minus, Sign::Plus]).unwrap());
        assert!("1 -2".parse::<SignedPermutation>().is_err());
        assert!("+1 +1".parse::<SignedPermutation>().is_err());
    }
}
