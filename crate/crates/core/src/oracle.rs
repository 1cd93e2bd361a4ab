//! Exact single-source BFS over the four reversal graphs.
//!
//! All four graphs are vertex-transitive, so the eccentricity of the identity
//! is the diameter. Tables are dense byte arrays indexed by Lehmer rank
//! (unsigned) or `rank · 2^d + sign_bits` (signed), filled one BFS level at a
//! time.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::perm::{factorial, lehmer_rank, lehmer_unrank, Permutation};
use crate::signed::{signed_state_count, SignedPermutation};
use crate::sorter::flip_bound_x2;
use crate::structure::{sim_classes, single_class_form, CyclicForm};

/// Distance entry for a state the search has not reached yet.
pub const UNVISITED: u8 = u8::MAX;

/// Longest state the neighbour enumeration handles.
pub const MAX_STATE_LEN: usize = 16;

/// Upper bound on canonical moves from one state (`2n - 1` for signed suffix graphs).
pub const MAX_MOVES: usize = 2 * MAX_STATE_LEN;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GraphId {
    /// Prefix reversals on `S_k`.
    P,
    /// Prefix and suffix reversals on `S_k`.
    G,
    /// Signed prefix reversals on `S*_d`.
    Pstar,
    /// Signed prefix and suffix reversals on `S*_d`.
    Gstar,
}

impl GraphId {
    pub const ALL: [GraphId; 4] = [GraphId::P, GraphId::G, GraphId::Pstar, GraphId::Gstar];

    pub fn name(&self) -> &'static str {
        match self {
            GraphId::P => "P",
            GraphId::G => "G",
            GraphId::Pstar => "Pstar",
            GraphId::Gstar => "Gstar",
        }
    }

    pub fn is_signed(&self) -> bool {
        matches!(self, GraphId::Pstar | GraphId::Gstar)
    }

    pub fn has_suffix_moves(&self) -> bool {
        matches!(self, GraphId::G | GraphId::Gstar)
    }

    /// Stable byte tag used in table files.
    pub fn tag(&self) -> u8 {
        match self {
            GraphId::P => 0,
            GraphId::G => 1,
            GraphId::Pstar => 2,
            GraphId::Gstar => 3,
        }
    }

    pub fn from_tag(tag: u8) -> Option<GraphId> {
        GraphId::ALL.into_iter().find(|g| g.tag() == tag)
    }

    /// Number of vertices for size `n`, if it fits in a `u64`.
    pub fn state_count(&self, n: usize) -> Option<u64> {
        if n == 0 || n > MAX_STATE_LEN {
            return None;
        }
        if self.is_signed() {
            signed_state_count(n)
        } else {
            factorial(n)
        }
    }

    /// Canonical moves per vertex.
    pub fn degree(&self, n: usize) -> usize {
        match self {
            GraphId::P => n.saturating_sub(1),
            GraphId::G => n.saturating_sub(1) + n.saturating_sub(2),
            GraphId::Pstar => n,
            GraphId::Gstar => 2 * n - 1,
        }
    }
}

impl fmt::Display for GraphId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GraphId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "P" | "p" => Ok(GraphId::P),
            "G" | "g" => Ok(GraphId::G),
            "Pstar" | "pstar" | "P*" => Ok(GraphId::Pstar),
            "Gstar" | "gstar" | "G*" => Ok(GraphId::Gstar),
            _ => Err(Error::Parse(format!(
                "unknown graph {s:?} (expected P, G, Pstar or Gstar)"
            ))),
        }
    }
}

/// Memory allowed for one distance table (one byte per state).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    pub max_bytes: u64,
}

impl Budget {
    /// 64 MiB: admits `k <= 11` unsigned and `d <= 8` signed.
    pub const DEFAULT: Budget = Budget {
        max_bytes: 64 << 20,
    };

    pub fn check(&self, graph: GraphId, n: usize) -> Result<u64> {
        let count = graph.state_count(n);
        match count {
            Some(c) if c <= self.max_bytes => Ok(c),
            _ => Err(Error::OverBudget {
                graph: graph.name(),
                n,
                bytes: estimate_states(graph, n),
                budget: self.max_bytes,
            }),
        }
    }
}

impl Default for Budget {
    fn default() -> Self {
        Budget::DEFAULT
    }
}

fn estimate_states(graph: GraphId, n: usize) -> u128 {
    let mut c: u128 = 1;
    for i in 1..=n as u128 {
        c = c.saturating_mul(i);
        if graph.is_signed() {
            c = c.saturating_mul(2);
        }
    }
    c
}

/// Writes the indices of all canonical neighbours of state `index` into `out`
/// and returns how many there are.
pub fn neighbors(graph: GraphId, n: usize, index: u64, out: &mut [u64; MAX_MOVES]) -> usize {
    let mut perm = [0u8; MAX_STATE_LEN];
    let mut count = 0;
    if graph.is_signed() {
        let signs = (index & ((1u64 << n) - 1)) as u32;
        lehmer_unrank(index >> n, &mut perm[..n]);
        let mut emit = |lo: usize, hi: usize| {
            let mut p = perm;
            p[lo..hi].reverse();
            let s = flip_sign_bits(signs, lo, hi);
            let rank = lehmer_rank(p[..n].iter().map(|&v| v as usize), n);
            out[count] = (rank << n) | s as u64;
            count += 1;
        };
        for len in 1..=n {
            emit(0, len);
        }
        if graph.has_suffix_moves() {
            for len in 1..n {
                emit(n - len, n);
            }
        }
    } else {
        lehmer_unrank(index, &mut perm[..n]);
        let mut emit = |lo: usize, hi: usize| {
            let mut p = perm;
            p[lo..hi].reverse();
            out[count] = lehmer_rank(p[..n].iter().map(|&v| v as usize), n);
            count += 1;
        };
        for len in 2..=n {
            emit(0, len);
        }
        if graph.has_suffix_moves() {
            for len in 2..n {
                emit(n - len, n);
            }
        }
    }
    count
}

/// Sign bits after reversing and negating positions `lo..hi`.
fn flip_sign_bits(bits: u32, lo: usize, hi: usize) -> u32 {
    let width = hi - lo;
    let mask = ((1u32 << width) - 1) << lo;
    let seg = (bits & mask) >> lo;
    let rev = seg.reverse_bits() >> (32 - width);
    (bits & !mask) | ((!rev & ((1u32 << width) - 1)) << lo)
}

/// BFS distances from the identity over one graph.
#[derive(Clone, PartialEq, Eq)]
pub struct DistanceTable {
    graph: GraphId,
    n: usize,
    dist: Vec<u8>,
}

impl fmt::Debug for DistanceTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DistanceTable")
            .field("graph", &self.graph)
            .field("n", &self.n)
            .field("states", &self.dist.len())
            .finish()
    }
}

impl DistanceTable {
    /// Wraps a finished distance array, checking its length and completeness.
    pub fn from_parts(graph: GraphId, n: usize, dist: Vec<u8>) -> Result<Self> {
        let count = graph
            .state_count(n)
            .ok_or_else(|| Error::Precondition(format!("no table for {graph} n={n}")))?;
        if dist.len() as u64 != count {
            return Err(Error::LengthMismatch {
                expected: count as usize,
                got: dist.len(),
            });
        }
        if dist.first() != Some(&0) || dist.contains(&UNVISITED) {
            return Err(Error::Precondition(format!(
                "{graph} n={n} table is incomplete"
            )));
        }
        Ok(DistanceTable { graph, n, dist })
    }

    pub fn graph(&self) -> GraphId {
        self.graph
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.dist
    }

    pub fn state_count(&self) -> u64 {
        self.dist.len() as u64
    }

    pub fn at_index(&self, index: u64) -> u8 {
        self.dist[index as usize]
    }

    /// Distance from `π` to the identity in an unsigned table.
    pub fn distance(&self, pi: &Permutation) -> Result<u8> {
        if self.graph.is_signed() {
            return Err(Error::Precondition(format!(
                "{} is a signed graph; pass a signed permutation",
                self.graph
            )));
        }
        if pi.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: pi.len(),
            });
        }
        Ok(self.dist[pi.rank()?.0 as usize])
    }

    /// Distance from a signed permutation to the all-positive identity.
    pub fn distance_signed(&self, sp: &SignedPermutation) -> Result<u8> {
        if !self.graph.is_signed() {
            return Err(Error::Precondition(format!(
                "{} is an unsigned graph; pass a permutation",
                self.graph
            )));
        }
        if sp.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: sp.len(),
            });
        }
        Ok(self.dist[sp.index()? as usize])
    }

    pub fn diameter(&self) -> u8 {
        self.dist.iter().copied().max().unwrap_or(0)
    }

    /// Number of states at each distance.
    pub fn histogram(&self) -> BTreeMap<u8, u64> {
        let mut counts = [0u64; 256];
        for &d in &self.dist {
            counts[d as usize] += 1;
        }
        counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(d, &c)| (d as u8, c))
            .collect()
    }

    /// Whether every canonical move from `index` changes the distance by at most one.
    pub fn is_lipschitz_at(&self, index: u64) -> bool {
        let mut out = [0u64; MAX_MOVES];
        let here = self.at_index(index);
        let m = neighbors(self.graph, self.n, index, &mut out);
        out[..m]
            .iter()
            .all(|&nb| here.abs_diff(self.at_index(nb)) <= 1)
    }
}

/// Sequential level-synchronous BFS from the identity.
pub fn build_table(graph: GraphId, n: usize, budget: Budget) -> Result<DistanceTable> {
    let count = budget.check(graph, n)?;
    let mut dist = alloc::vec![UNVISITED; count as usize];
    dist[0] = 0;
    let mut out = [0u64; MAX_MOVES];
    let mut level = 0u8;
    loop {
        let mut grew = false;
        for index in 0..count {
            if dist[index as usize] != level {
                continue;
            }
            let m = neighbors(graph, n, index, &mut out);
            for &nb in &out[..m] {
                let slot = &mut dist[nb as usize];
                if *slot == UNVISITED {
                    *slot = level + 1;
                    grew = true;
                }
            }
        }
        if !grew {
            break;
        }
        level += 1;
        if level == UNVISITED {
            return Err(Error::Internal(format!("{graph} n={n}: depth overflow")));
        }
    }
    DistanceTable::from_parts(graph, n, dist)
        .map_err(|e| Error::Internal(format!("BFS left states unreached: {e}")))
}

/// One property checked by [`verify_lemmas`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LemmaCheck {
    pub property: String,
    pub k: usize,
    pub pass: bool,
    pub detail: String,
    /// A state exhibiting the failure, when there is one.
    pub witness: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LemmaReport {
    pub max_k: usize,
    /// `(k, f(k), h(k))`
    pub diameters: Vec<(usize, u8, u8)>,
    pub checks: Vec<LemmaCheck>,
}

impl LemmaReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// The `2k` single-class permutations (`k` for `k <= 2`): cyclic rotations of
/// `1..k` read forwards or backwards.
pub fn single_class_permutations(k: usize) -> Vec<Permutation> {
    let mut out: Vec<Permutation> = Vec::new();
    for t in 1..=k {
        let asc = (1..=k).map(|i| (t + i - 1) % k + 1).collect();
        let desc = (1..=k).map(|i| (t + k - i) % k + 1).collect();
        for p in [asc, desc] {
            let p = Permutation::from_vec_unchecked(p);
            if !out.contains(&p) {
                out.push(p);
            }
        }
    }
    out
}

/// Builds `P_k` and `G_k` tables for `k = 1..=max_k` and checks
/// `h(k) <= h(k+1)`, `h(k) <= f(k)`, `h(k) <= 3k/2 + 4`, and that every
/// single-class permutation is within 4 prefix flips of the identity.
pub fn verify_lemmas(max_k: usize, budget: Budget) -> Result<LemmaReport> {
    verify_lemmas_with(max_k, |g, k| build_table(g, k, budget))
}

/// [`verify_lemmas`] with a caller-supplied table source (cache, parallel builder).
pub fn verify_lemmas_with<F>(max_k: usize, mut table: F) -> Result<LemmaReport>
where
    F: FnMut(GraphId, usize) -> Result<DistanceTable>,
{
    if max_k == 0 {
        return Err(Error::Precondition("max_k must be at least 1".into()));
    }
    let mut diameters = Vec::new();
    let mut checks = Vec::new();
    for k in 1..=max_k {
        let p = table(GraphId::P, k)?;
        let g = table(GraphId::G, k)?;
        let (f, h) = (p.diameter(), g.diameter());
        diameters.push((k, f, h));

        checks.push(LemmaCheck {
            property: "h(k) <= f(k)".into(),
            k,
            pass: h <= f,
            detail: format!("h={h} f={f}"),
            witness: None,
        });
        checks.push(LemmaCheck {
            property: "h(k) <= 3k/2 + 4".into(),
            k,
            pass: 2 * h as usize <= 3 * k + 8,
            detail: format!("h={h} bound={}/2", 3 * k + 8),
            witness: None,
        });
        let even_bound = k % 2 == 0 && 2 * h as usize > flip_bound_x2(k);
        checks.push(LemmaCheck {
            property: "h(k) <= 3k/2 + 2 for even k".into(),
            k,
            pass: !even_bound,
            detail: format!("h={h}"),
            witness: None,
        });

        let mut worst = 0;
        let mut witness = None;
        let singles = single_class_permutations(k);
        for sigma in &singles {
            debug_assert!(sim_classes(sigma).len() == 1);
            debug_assert!(single_class_form(sigma) != CyclicForm::NotSingle);
            let dist = p.distance(sigma)?;
            if dist > worst {
                worst = dist;
            }
            if dist > 4 && witness.is_none() {
                witness = Some(format!("{sigma}"));
            }
        }
        checks.push(LemmaCheck {
            property: "single-class states within 4 prefix flips".into(),
            k,
            pass: witness.is_none(),
            detail: format!("{} states, max P-distance {worst}", singles.len()),
            witness,
        });
    }
    for w in diameters.windows(2) {
        let ((k, _, h0), (_, _, h1)) = (w[0], w[1]);
        checks.push(LemmaCheck {
            property: "h(k) <= h(k+1)".into(),
            k,
            pass: h0 <= h1,
            detail: format!("h({k})={h0} h({})={h1}", k + 1),
            witness: None,
        });
    }
    Ok(LemmaReport {
        max_k,
        diameters,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tiny_tables() {
        let g2 = build_table(GraphId::G, 2, Budget::DEFAULT).unwrap();
        assert_eq!(g2.as_bytes(), &[0, 1]);
        assert_eq!(g2.diameter(), 1);
        let g3 = build_table(GraphId::G, 3, Budget::DEFAULT).unwrap();
        assert_eq!(g3.histogram().values().sum::<u64>(), 6);
        let one = build_table(GraphId::P, 1, Budget::DEFAULT).unwrap();
        assert_eq!(one.diameter(), 0);
    }

    #[test]
    fn remark_distances() {
        let p4 = build_table(GraphId::P, 4, Budget::DEFAULT).unwrap();
        let d = |s: &str| p4.distance(&s.parse().unwrap()).unwrap();
        assert_eq!(d("2 1 4 3"), 3);
        assert_eq!(d("4 1 2 3"), 2);
        assert_eq!(d("3 2 1 4"), 1);
        assert_eq!(d("1 2 3 4"), 0);
    }

    #[test]
    fn distance_rejects_wrong_input() {
        let p4 = build_table(GraphId::P, 4, Budget::DEFAULT).unwrap();
        assert!(matches!(
            p4.distance(&Permutation::identity(5)),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(p4.distance_signed(&SignedPermutation::identity(4)).is_err());
    }

    #[test]
    fn over_budget_is_refused() {
        let err = build_table(GraphId::P, 12, Budget::DEFAULT).unwrap_err();
        assert!(matches!(err, Error::OverBudget { bytes: 479001600, .. }), "{err}");
        assert!(Budget::DEFAULT.check(GraphId::P, 11).is_ok());
        assert!(Budget::DEFAULT.check(GraphId::Pstar, 8).is_ok());
        assert!(Budget::DEFAULT.check(GraphId::Gstar, 9).is_err());
    }

    #[test]
    fn sign_bit_flips() {
        // reverse+negate positions 0..2 of [+, -, +] -> [+, -, +] reversed is [-, +] negated [+, -]
        assert_eq!(flip_sign_bits(0b010, 0, 2), 0b010);
        assert_eq!(flip_sign_bits(0b000, 0, 1), 0b001);
        assert_eq!(flip_sign_bits(0b001, 0, 3), 0b011);
        assert_eq!(flip_sign_bits(0b000, 2, 3), 0b100);
    }

    #[test]
    fn signed_neighbors_match_moves() {
        for graph in [GraphId::Pstar, GraphId::Gstar] {
            let d = 3;
            for sp in SignedPermutation::all(d) {
                let mut out = [0u64; MAX_MOVES];
                let m = neighbors(graph, d, sp.index().unwrap(), &mut out);
                let mut expect: Vec<u64> = (1..=d)
                    .map(|l| sp.prefix_flip(l).unwrap().index().unwrap())
                    .collect();
                if graph == GraphId::Gstar {
                    expect.extend((1..d).map(|l| sp.suffix_flip(l).unwrap().index().unwrap()));
                }
                assert_eq!(&out[..m], &expect[..]);
                assert_eq!(m, graph.degree(d));
            }
        }
    }

    #[test]
    fn single_class_counts() {
        assert_eq!(single_class_permutations(1).len(), 1);
        assert_eq!(single_class_permutations(2).len(), 2);
        for k in 3..=8 {
            assert_eq!(single_class_permutations(k).len(), 2 * k);
        }
    }

    #[test]
    fn lemmas_small() {
        let report = verify_lemmas(6, Budget::DEFAULT).unwrap();
        assert!(report.all_pass(), "{report:?}");
        assert_eq!(report.diameters[1], (2, 1, 1));
    }
}
