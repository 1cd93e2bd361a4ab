//! Adjacency classes (`∼`), the pairing-aware refinement (`≈`), blocks,
//! singletons and the potential `ν = (3/2)·S + 2·B`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::perm::Permutation;

/// Whether two values differ by ±1 modulo `k`.
#[inline]
pub(crate) fn values_adjacent(a: usize, b: usize, k: usize) -> bool {
    a.abs_diff(b) == 1 || (a.min(b) == 1 && a.max(b) == k)
}

/// Whether `(i, i+1)` is a π-adjacency, for `1 <= i <= k-1`.
///
/// Adjacency wraps in value (`1` and `k` are adjacent) but never in position.
pub fn is_adjacency(pi: &Permutation, i: usize) -> Result<bool> {
    let k = pi.len();
    if i == 0 || i >= k {
        return Err(Error::PositionOutOfRange {
            pos: i,
            max: k.saturating_sub(1),
        });
    }
    Ok(values_adjacent(pi.at(i), pi.at(i + 1), k))
}

/// Number of positions `i` for which `(i, i+1)` is a π-adjacency.
pub fn adjacency_count(pi: &Permutation) -> usize {
    let k = pi.len();
    pi.values()
        .windows(2)
        .filter(|w| values_adjacent(w[0], w[1], k))
        .count()
}

/// A class of `∼π`: the maximal run of positions `start..=end` chained by adjacencies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Run {
    pub start: usize,
    pub end: usize,
}

impl Run {
    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, pos: usize) -> bool {
        (self.start..=self.end).contains(&pos)
    }
}

/// `∼π` classes as position runs, left to right.
pub fn sim_runs(pi: &Permutation) -> Vec<Run> {
    let k = pi.len();
    let mut runs = Vec::new();
    let mut start = 1;
    for i in 1..k {
        if !values_adjacent(pi.at(i), pi.at(i + 1), k) {
            runs.push(Run { start, end: i });
            start = i + 1;
        }
    }
    runs.push(Run { start, end: k });
    runs
}

/// `∼π` classes as sets of values, each listed in position order.
pub fn sim_classes(pi: &Permutation) -> Vec<Vec<usize>> {
    sim_runs(pi)
        .into_iter()
        .map(|r| pi.values()[r.start - 1..r.end].to_vec())
        .collect()
}

/// The fixed matching `(1,2), (3,4), …, (k-1,k)` on `[k]`, `k` even.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairMap {
    k: usize,
}

impl PairMap {
    pub fn new(k: usize) -> Result<Self> {
        if k == 0 || k % 2 == 1 {
            return Err(Error::OddLength(k));
        }
        Ok(PairMap { k })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// `o_j = (-1)^(j+1)`: `+1` for odd `j`, `-1` for even `j`.
    pub fn direction(&self, j: usize) -> isize {
        if j % 2 == 1 {
            1
        } else {
            -1
        }
    }

    /// `φ(j) = j + o_j`.
    pub fn partner(&self, j: usize) -> usize {
        if j % 2 == 1 {
            j + 1
        } else {
            j - 1
        }
    }

    /// `j - o_j` reduced into `[k]`: the value adjacent to `j` on the side
    /// facing away from its partner.
    pub fn outward(&self, j: usize) -> usize {
        if j % 2 == 1 {
            if j == 1 {
                self.k
            } else {
                j - 1
            }
        } else if j == self.k {
            1
        } else {
            j + 1
        }
    }
}

/// The `≈π` decomposition of a permutation of even length.
///
/// Every class is a contiguous stretch of positions, so classes are stored as
/// spans over the permutation's values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockStructure {
    /// `S(π)`, the number of singletons.
    pub singletons: usize,
    /// `B(π)`, the number of blocks.
    pub blocks: usize,
    /// The values in position order.
    order: Vec<usize>,
    /// Half-open ranges into `order`, one per class, left to right.
    spans: Vec<(usize, usize)>,
    /// For each value `v`, the index into `spans` (`class_of[0]` unused).
    class_of: Vec<usize>,
}

impl BlockStructure {
    /// `2ν = 3S + 4B`, exact.
    pub fn nu_x2(&self) -> i64 {
        3 * self.singletons as i64 + 4 * self.blocks as i64
    }

    pub fn is_free(&self, value: usize) -> bool {
        let (a, b) = self.spans[self.class_of[value]];
        b - a == 1
    }

    /// The `≈π` class holding `value`, in position order.
    pub fn class_of(&self, value: usize) -> &[usize] {
        self.class(self.class_of[value])
    }

    pub fn class(&self, index: usize) -> &[usize] {
        let (a, b) = self.spans[index];
        &self.order[a..b]
    }

    pub fn class_count(&self) -> usize {
        self.spans.len()
    }

    /// Classes left to right, each in position order.
    pub fn classes(&self) -> impl Iterator<Item = &[usize]> + '_ {
        self.spans.iter().map(|&(a, b)| &self.order[a..b])
    }

    pub fn to_vecs(&self) -> Vec<Vec<usize>> {
        self.classes().map(<[usize]>::to_vec).collect()
    }

    pub fn k(&self) -> usize {
        self.order.len()
    }
}

/// Computes the `≈π` classes together with `S`, `B` and `ν`.
///
/// Within each `∼π` run, the letters whose partner lies in the same run form
/// one block; every other letter is a singleton. A run is a monotone stretch
/// of cyclically consecutive values, so only its two end letters can lack a
/// partner inside it and the block is contiguous.
pub fn approx_classes(pi: &Permutation, pm: &PairMap) -> Result<BlockStructure> {
    let k = pi.len();
    if pm.k() != k {
        return Err(Error::LengthMismatch {
            expected: pm.k(),
            got: k,
        });
    }
    let positions = pi.positions();
    let mut spans: Vec<(usize, usize)> = Vec::new();
    let mut class_of = alloc::vec![0; k + 1];
    let (mut singletons, mut blocks) = (0, 0);
    for run in sim_runs(pi) {
        let paired = |v: usize| run.contains(positions[pm.partner(v)]);
        let mut block: Option<usize> = None;
        for pos in run.start..=run.end {
            let v = pi.at(pos);
            if paired(v) {
                match block {
                    Some(idx) => {
                        debug_assert_eq!(spans[idx].1, pos - 1, "block is not contiguous in {pi}");
                        spans[idx].1 = pos;
                        class_of[v] = idx;
                    }
                    None => {
                        spans.push((pos - 1, pos));
                        blocks += 1;
                        block = Some(spans.len() - 1);
                        class_of[v] = spans.len() - 1;
                    }
                }
            } else {
                spans.push((pos - 1, pos));
                singletons += 1;
                class_of[v] = spans.len() - 1;
            }
        }
    }
    Ok(BlockStructure {
        singletons,
        blocks,
        order: pi.values().to_vec(),
        spans,
        class_of,
    })
}

/// Whether `{j}` is a `≈π` class.
pub fn is_free(pi: &Permutation, pm: &PairMap, j: usize) -> Result<bool> {
    if j == 0 || j > pi.len() {
        return Err(Error::ValueOutOfRange {
            value: j,
            k: pi.len(),
        });
    }
    Ok(approx_classes(pi, pm)?.is_free(j))
}

/// Shape of a permutation whose `∼` relation has a single class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CyclicForm {
    /// `t, t-1, …, 1, k, k-1, …, t+1`
    Descending(usize),
    /// `t+1, t+2, …, k, 1, 2, …, t`; `Ascending(k)` is the identity.
    Ascending(usize),
    NotSingle,
}

/// Classifies `σ` as one of the two single-class forms. Ascending is tested
/// first, so the overlapping cases at `k <= 2` report `Ascending`.
pub fn single_class_form(sigma: &Permutation) -> CyclicForm {
    let k = sigma.len();
    let first = sigma.at(1);
    let t = if first == 1 { k } else { first - 1 };
    let ascending = (1..=k).all(|i| sigma.at(i) == (t + i - 1) % k + 1);
    if ascending {
        return CyclicForm::Ascending(t);
    }
    let t = first;
    let descending = (1..=k).all(|i| sigma.at(i) == (t + k - i) % k + 1);
    if descending {
        CyclicForm::Descending(t)
    } else {
        CyclicForm::NotSingle
    }
}
