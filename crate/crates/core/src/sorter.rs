//! Sorting by prefix and suffix reversals within `3k/2 + 2` flips for even
//! `k` and `3k/2 + 4` for odd `k`.
//!
//! Even lengths run a greedy loop driven by the potential `ν`: every step
//! merges letters into blocks without ever splitting a pair, and pays at most
//! as many flips as the potential it releases. Once a single adjacency class
//! remains, at most four prefix flips finish the sort. Odd lengths are sorted
//! by padding with the letter `k + 1`, sorting the padded permutation, and
//! projecting the path back down.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::perm::{flip_between, FlipOp, Permutation};
use crate::structure::{
    approx_classes, sim_runs, single_class_form, BlockStructure, CyclicForm, PairMap,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StepKind {
    /// The front letter is free: join it to its partner.
    Case1,
    /// The front letter is in a block and its outward neighbour is free: grow
    /// the block by that neighbour and its partner.
    Case2,
    /// The outward neighbour heads its block: one prefix flip joins the blocks.
    Case3,
    /// The outward neighbour ends its block: a suffix flip turns it around,
    /// then a prefix flip joins the blocks.
    Case4,
    /// At most four prefix flips from a single adjacency class to the identity.
    Finish,
    /// Flips recovered by projecting a padded sort back to odd length.
    Projection,
}

impl StepKind {
    pub fn is_case(&self) -> bool {
        matches!(
            self,
            StepKind::Case1 | StepKind::Case2 | StepKind::Case3 | StepKind::Case4
        )
    }

    pub fn name(&self) -> &'static str {
        match self {
            StepKind::Case1 => "case1",
            StepKind::Case2 => "case2",
            StepKind::Case3 => "case3",
            StepKind::Case4 => "case4",
            StepKind::Finish => "finish",
            StepKind::Projection => "projection",
        }
    }
}

impl fmt::Display for StepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Potential bookkeeping for one step. Half-integers are stored doubled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ledger {
    /// `S(before) - S(after)`
    pub d_singletons: i64,
    /// `B(before) - B(after)`
    pub d_blocks: i64,
    /// `2·(ν(before) - ν(after))`
    pub d_nu_x2: i64,
    /// `2·(Δν - flips)`
    pub gain_x2: i64,
}

impl Ledger {
    fn between(before: &BlockStructure, after: &BlockStructure, flips: usize) -> Self {
        let d_nu_x2 = before.nu_x2() - after.nu_x2();
        Ledger {
            d_singletons: before.singletons as i64 - after.singletons as i64,
            d_blocks: before.blocks as i64 - after.blocks as i64,
            d_nu_x2,
            gain_x2: d_nu_x2 - 2 * flips as i64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepRecord {
    pub kind: StepKind,
    pub ops: Vec<FlipOp>,
    /// Present for case and finish steps; absent for projections, where the
    /// pairing (and so `ν`) is undefined.
    pub ledger: Option<Ledger>,
}

/// Checks a case step against its row of the case analysis, cell by cell:
///
/// | case | flips | ΔS  | ΔB   | Δν  | gain |
/// |------|-------|-----|------|-----|------|
/// | 1    | 1     | 2   | ≥ −1 | ≥ 1 | ≥ 0  |
/// | 2    | 3     | 2   | ≥ 0  | ≥ 3 | ≥ 0  |
/// | 3    | 1     | 0   | 1    | 2   | 1    |
/// | 4    | 2     | ≥ 0 | ≥ 1  | ≥ 2 | ≥ 0  |
///
/// The ΔS and ΔB cells describe the merge a case is built to perform. A step
/// can also pick up adjacencies it did not aim for, or close the whole value
/// cycle on its final merge (then the two free ends become partners); both
/// only lower `ν` further but move ΔS/ΔB off their cells. Use
/// [`check_step_contract`] for the guarantee the sorter relies on.
pub fn check_table_row(rec: &StepRecord) -> core::result::Result<(), String> {
    let Some(l) = rec.ledger else {
        return Err(format!("{} step carries no ledger", rec.kind));
    };
    let n = rec.ops.len();
    let ok = match rec.kind {
        StepKind::Case1 => {
            n == 1 && l.d_singletons == 2 && l.d_blocks >= -1 && l.d_nu_x2 >= 2 && l.gain_x2 >= 0
        }
        StepKind::Case2 => {
            n == 3 && l.d_singletons == 2 && l.d_blocks >= 0 && l.d_nu_x2 >= 6 && l.gain_x2 >= 0
        }
        StepKind::Case3 => {
            n == 1 && l.d_singletons == 0 && l.d_blocks == 1 && l.d_nu_x2 == 4 && l.gain_x2 == 2
        }
        StepKind::Case4 => {
            n == 2 && l.d_singletons >= 0 && l.d_blocks >= 1 && l.d_nu_x2 >= 4 && l.gain_x2 >= 0
        }
        StepKind::Finish | StepKind::Projection => {
            return Err(format!("{} is not a case step", rec.kind))
        }
    };
    // 0 < flips <= ν(before) - ν(after)
    let lemma = n > 0 && 2 * n as i64 <= l.d_nu_x2;
    if ok && lemma {
        Ok(())
    } else {
        Err(format!(
            "{} step violates its row: flips={n} dS={} dB={} dNu_x2={} gain_x2={}",
            rec.kind, l.d_singletons, l.d_blocks, l.d_nu_x2, l.gain_x2
        ))
    }
}

/// The per-step guarantee: the case's flip count, `0 < flips <= Δν`, and a
/// single suffix flip appearing only in (and first in) a case-4 step.
pub fn check_step_contract(rec: &StepRecord) -> core::result::Result<(), String> {
    let Some(l) = rec.ledger else {
        return Err(format!("{} step carries no ledger", rec.kind));
    };
    let n = rec.ops.len();
    let expected = match rec.kind {
        StepKind::Case1 | StepKind::Case3 => 1,
        StepKind::Case2 => 3,
        StepKind::Case4 => 2,
        StepKind::Finish | StepKind::Projection => {
            return Err(format!("{} is not a case step", rec.kind))
        }
    };
    let suffixes = rec.ops.iter().filter(|op| op.is_suffix()).count();
    let suffix_ok = match rec.kind {
        StepKind::Case4 => suffixes == 1 && rec.ops[0].is_suffix(),
        _ => suffixes == 0,
    };
    if n != expected {
        Err(format!("{} step used {n} flips, expected {expected}", rec.kind))
    } else if 2 * n as i64 > l.d_nu_x2 {
        Err(format!(
            "{} step used {n} flips but released only {}/2 potential",
            rec.kind, l.d_nu_x2
        ))
    } else if !suffix_ok {
        Err(format!("{} step has a misplaced suffix flip", rec.kind))
    } else {
        Ok(())
    }
}

/// Which of the four cases hold for `π`; exactly one must.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CaseMatch {
    pub case1: bool,
    pub case2: bool,
    pub case3: bool,
    pub case4: bool,
}

impl CaseMatch {
    pub fn evaluate(pi: &Permutation, pm: &PairMap, bs: &BlockStructure) -> Self {
        let j = pi.at(1);
        let outward = pm.outward(j);
        let j_free = bs.is_free(j);
        let out_free = bs.is_free(outward);
        let block = bs.class_of(outward);
        let both_bound = !j_free && !out_free && !block.contains(&j);
        CaseMatch {
            case1: j_free,
            case2: !j_free && out_free,
            case3: both_bound && block.first() == Some(&outward),
            case4: both_bound && block.last() == Some(&outward),
        }
    }

    pub fn count(&self) -> usize {
        [self.case1, self.case2, self.case3, self.case4]
            .iter()
            .filter(|&&b| b)
            .count()
    }
}

/// One greedy step on a permutation of even length with `ν(π) > 2`.
///
/// Returns the reached permutation `τ` and the step record, which is
/// guaranteed to satisfy [`check_step_contract`].
pub fn case_step(pi: &Permutation, pm: &PairMap) -> Result<(Permutation, StepRecord)> {
    let before = approx_classes(pi, pm)?;
    case_step_with(pi, pm, &before).map(|(tau, rec, _)| (tau, rec))
}

fn case_step_with(
    pi: &Permutation,
    pm: &PairMap,
    before: &BlockStructure,
) -> Result<(Permutation, StepRecord, BlockStructure)> {
    if before.nu_x2() <= 4 {
        return Err(Error::Precondition(format!(
            "case step needs nu > 2, got nu = {}/2 at {pi}",
            before.nu_x2()
        )));
    }
    let k = pi.len();
    let matched = CaseMatch::evaluate(pi, pm, before);
    if matched.count() != 1 {
        return Err(Error::Internal(format!(
            "{} cases match at {pi}: {matched:?}",
            matched.count()
        )));
    }
    let j = pi.at(1);
    let outward = pm.outward(j);
    let pos = pi.positions();

    let (kind, ops) = if matched.case1 {
        (StepKind::Case1, alloc::vec![FlipOp::prefix(pos[pm.partner(j)] - 1)])
    } else if matched.case2 {
        let q = pos[outward];
        let mut ops = alloc::vec![FlipOp::prefix(q - 1), FlipOp::prefix(q)];
        let mid = pi.apply_all(&ops).map_err(internal)?;
        let s = mid.position_of(pm.partner(outward));
        ops.push(FlipOp::prefix(s - 1));
        (StepKind::Case2, ops)
    } else if matched.case3 {
        (StepKind::Case3, alloc::vec![FlipOp::prefix(pos[outward] - 1)])
    } else {
        // The outward neighbour closes both its block and its adjacency run;
        // reverse from the start of that run to the end.
        let e = pos[outward];
        let run = sim_runs(pi)
            .into_iter()
            .find(|r| r.contains(e))
            .expect("every position lies in a run");
        if run.end != e {
            return Err(Error::Internal(format!(
                "letter {outward} ends its block but not its run at {pi}"
            )));
        }
        let c = run.start;
        (
            StepKind::Case4,
            alloc::vec![FlipOp::suffix(k - c + 1), FlipOp::prefix(c + k - e - 1)],
        )
    };

    let tau = pi.apply_all(&ops).map_err(internal)?;
    let after = approx_classes(&tau, pm)?;
    let rec = StepRecord {
        kind,
        ledger: Some(Ledger::between(before, &after, ops.len())),
        ops,
    };
    check_step_contract(&rec).map_err(|msg| Error::Internal(format!("{msg} at {pi}")))?;
    Ok((tau, rec, after))
}

fn internal(e: Error) -> Error {
    Error::Internal(format!("emitted an invalid flip: {e}"))
}

fn push_flip(ops: &mut Vec<FlipOp>, len: usize) {
    if len >= 2 {
        ops.push(FlipOp::prefix(len));
    }
}

/// Prefix flips taking a single-class permutation to the identity (at most 4).
///
/// `t,…,1,k,…,t+1` is flipped whole to reach `t+1,…,k,1,…,t`, which then
/// goes `→ k,…,t+1,1,…,t → t,…,1,t+1,…,k → 1,…,k`. Length-1 flips are dropped.
pub fn finish(sigma: &Permutation) -> Result<Vec<FlipOp>> {
    let k = sigma.len();
    let mut ops = Vec::with_capacity(4);
    let t = match single_class_form(sigma) {
        CyclicForm::NotSingle => {
            return Err(Error::Precondition(format!(
                "{sigma} has more than one adjacency class"
            )))
        }
        CyclicForm::Ascending(t) => t,
        CyclicForm::Descending(t) => {
            push_flip(&mut ops, k);
            t
        }
    };
    if t < k {
        push_flip(&mut ops, k - t);
        push_flip(&mut ops, k);
        push_flip(&mut ops, t);
    }
    Ok(ops)
}

/// Twice the flip budget: `3k + 4` for even `k`, `3k + 8` for odd `k`.
pub fn flip_bound_x2(k: usize) -> usize {
    if k.is_multiple_of(2) {
        3 * k + 4
    } else {
        3 * k + 8
    }
}

/// The largest whole number of flips allowed for length `k`.
pub fn flip_bound(k: usize) -> usize {
    flip_bound_x2(k) / 2
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SortTrace {
    pub k: usize,
    pub start: Permutation,
    pub steps: Vec<StepRecord>,
    pub total_flips: usize,
    /// For odd `k`: the trace of the padded permutation of length `k + 1`.
    pub padded: Option<Box<SortTrace>>,
}

impl SortTrace {
    fn new(start: Permutation, steps: Vec<StepRecord>, padded: Option<Box<SortTrace>>) -> Self {
        let total_flips = steps.iter().map(|s| s.ops.len()).sum();
        SortTrace {
            k: start.len(),
            start,
            steps,
            total_flips,
            padded,
        }
    }

    /// All flips in order.
    pub fn ops(&self) -> impl Iterator<Item = &FlipOp> + '_ {
        self.steps.iter().flat_map(|s| s.ops.iter())
    }

    /// Flips spent in case steps (before finishing).
    pub fn case_flips(&self) -> usize {
        self.steps
            .iter()
            .filter(|s| s.kind.is_case())
            .map(|s| s.ops.len())
            .sum()
    }

    /// The state reached after the case steps, i.e. where finishing begins.
    pub fn pre_finish_state(&self) -> Result<Permutation> {
        let ops: Vec<FlipOp> = self
            .steps
            .iter()
            .filter(|s| s.kind.is_case())
            .flat_map(|s| s.ops.iter().copied())
            .collect();
        self.start.apply_all(&ops)
    }

    pub fn within_bound(&self) -> bool {
        2 * self.total_flips <= flip_bound_x2(self.k)
    }

    /// Replays the flips and checks the trace reaches the identity within bound.
    pub fn validate(&self) -> Result<()> {
        let end = self.start.apply_all(self.ops())?;
        if !end.is_identity() {
            return Err(Error::Internal(format!(
                "trace from {} ends at {end}, not the identity",
                self.start
            )));
        }
        if self.total_flips != self.ops().count() {
            return Err(Error::Internal("total_flips disagrees with steps".into()));
        }
        if !self.within_bound() {
            return Err(Error::Internal(format!(
                "{} flips exceed the bound {} for k = {}",
                self.total_flips,
                flip_bound(self.k),
                self.k
            )));
        }
        Ok(())
    }
}

/// Sorts a permutation of even length: greedy case steps while `ν > 2`, then finish.
pub fn sort_even(pi: &Permutation) -> Result<SortTrace> {
    let k = pi.len();
    let pm = PairMap::new(k)?;
    let mut steps = Vec::new();
    let mut cur = pi.clone();
    let mut bs = approx_classes(&cur, &pm)?;
    // ν drops by at least 1 per step and starts at most 3k/2
    let max_steps = 3 * k / 2;
    while bs.nu_x2() > 4 {
        if steps.len() >= max_steps {
            return Err(Error::Internal(format!("no convergence from {pi}")));
        }
        let (next, rec, after) = case_step_with(&cur, &pm, &bs)?;
        steps.push(rec);
        cur = next;
        bs = after;
    }
    let ops = finish(&cur).map_err(|e| Error::Internal(format!("finish failed: {e}")))?;
    steps.push(StepRecord {
        kind: StepKind::Finish,
        ledger: Some(Ledger::between(&bs, &bs, ops.len())),
        ops,
    });
    let trace = SortTrace::new(pi.clone(), steps, None);
    trace.validate()?;
    Ok(trace)
}

/// Drops the letter `k + 1` from a permutation of length `k + 1`.
pub fn project_out_last(pi: &Permutation) -> Permutation {
    let top = pi.len();
    Permutation::from_vec_unchecked(pi.values().iter().copied().filter(|&v| v != top).collect())
}

/// Sorts any permutation. Odd `k` goes through a padded sort of length `k + 1`.
pub fn sort(pi: &Permutation) -> Result<SortTrace> {
    let k = pi.len();
    if k == 1 {
        return Ok(SortTrace::new(pi.clone(), Vec::new(), None));
    }
    if k.is_multiple_of(2) {
        return sort_even(pi);
    }
    let mut values = pi.values().to_vec();
    values.push(k + 1);
    let padded = sort_even(&Permutation::from_vec_unchecked(values))?;

    let mut ops = Vec::new();
    let mut state = padded.start.clone();
    let mut projected = pi.clone();
    for op in padded.ops() {
        state.apply_in_place(*op)?;
        let next = project_out_last(&state);
        if next == projected {
            continue;
        }
        let flip = flip_between(&projected, &next).ok_or_else(|| {
            Error::Internal(format!(
                "projections {projected} and {next} of adjacent states are not adjacent"
            ))
        })?;
        ops.push(flip);
        projected = next;
    }
    let steps = alloc::vec![StepRecord {
        kind: StepKind::Projection,
        ops,
        ledger: None,
    }];
    let trace = SortTrace::new(pi.clone(), steps, Some(Box::new(padded)));
    trace.validate()?;
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn p(s: &str) -> Permutation {
        s.parse().unwrap()
    }

    #[test]
    fn case1_example() {
        let pm = PairMap::new(8).unwrap();
        let (tau, rec) = case_step(&p("2 3 4 5 1 8 6 7"), &pm).unwrap();
        assert_eq!(rec.kind, StepKind::Case1);
        assert_eq!(rec.ops, vec![FlipOp::prefix(4)]);
        assert_eq!(tau, p("5 4 3 2 1 8 6 7"));
        let l = rec.ledger.unwrap();
        assert_eq!((l.d_singletons, l.d_blocks, l.d_nu_x2, l.gain_x2), (2, 0, 6, 4));
    }

    #[test]
    fn case4_example() {
        let pm = PairMap::new(6).unwrap();
        let (tau, rec) = case_step(&p("2 1 4 3 6 5"), &pm).unwrap();
        assert_eq!(rec.kind, StepKind::Case4);
        assert_eq!(rec.ops, vec![FlipOp::suffix(4), FlipOp::prefix(4)]);
        assert_eq!(tau, p("6 5 1 2 3 4"));
        let l = rec.ledger.unwrap();
        assert_eq!((l.d_singletons, l.d_blocks, l.d_nu_x2, l.gain_x2), (0, 1, 4, 0));
    }

    #[test]
    fn case4_cuts_at_run_start() {
        // 6 is a free letter adjacent to the block {7,8}; the suffix flip
        // starts at 6 so that adjacency survives.
        let pm = PairMap::new(8).unwrap();
        let pi = p("1 2 5 3 4 6 7 8");
        let (tau, rec) = case_step(&pi, &pm).unwrap();
        assert_eq!(rec.kind, StepKind::Case4);
        assert_eq!(rec.ops, vec![FlipOp::suffix(3), FlipOp::prefix(5)]);
        assert_eq!(tau, p("4 3 5 2 1 8 7 6"));
    }

    #[test]
    fn case2_and_case3_fire() {
        let pm = PairMap::new(6).unwrap();
        // front block {1,2}, outward letter 6 free
        let (_, rec) = case_step(&p("1 2 4 6 3 5"), &pm).unwrap();
        assert_eq!(rec.kind, StepKind::Case2);
        assert_eq!(rec.ops.len(), 3);
        // front block {2,1}, outward letter 3 heads block {3,4}
        let (tau, rec) = case_step(&p("2 1 5 6 3 4"), &pm).unwrap();
        assert_eq!(rec.kind, StepKind::Case3);
        assert_eq!(rec.ops, vec![FlipOp::prefix(4)]);
        assert_eq!(tau, p("6 5 1 2 3 4"));
    }

    #[test]
    fn case_step_rejects_single_class() {
        let pm = PairMap::new(6).unwrap();
        assert!(matches!(
            case_step(&Permutation::identity(6), &pm),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn finish_examples() {
        assert!(finish(&Permutation::identity(8)).unwrap().is_empty());

        let sigma = p("3 4 5 6 7 8 1 2");
        let ops = finish(&sigma).unwrap();
        assert_eq!(ops, vec![FlipOp::prefix(6), FlipOp::prefix(8), FlipOp::prefix(2)]);
        let path: Vec<Permutation> = ops
            .iter()
            .scan(sigma.clone(), |s, op| {
                s.apply_in_place(*op).unwrap();
                Some(s.clone())
            })
            .collect();
        assert_eq!(
            path,
            vec![p("8 7 6 5 4 3 1 2"), p("2 1 3 4 5 6 7 8"), Permutation::identity(8)]
        );

        let sigma = p("3 2 1 8 7 6 5 4");
        let ops = finish(&sigma).unwrap();
        assert_eq!(ops.len(), 4);
        assert_eq!(ops[0], FlipOp::prefix(8));
        assert!(sigma.apply_all(&ops).unwrap().is_identity());

        assert!(matches!(finish(&p("2 1 4 3 6 5")), Err(Error::Precondition(_))));
    }

    #[test]
    fn sort_examples() {
        let t = sort(&Permutation::identity(6)).unwrap();
        assert_eq!(t.total_flips, 0);

        let t = sort(&p("2 1 4 3 6 5")).unwrap();
        let kinds: Vec<_> = t.steps.iter().map(|s| s.kind).collect();
        assert_eq!(kinds, vec![StepKind::Case4, StepKind::Case3, StepKind::Finish]);
        assert_eq!(t.total_flips, 6);
        t.validate().unwrap();

        let t = sort(&Permutation::identity(1)).unwrap();
        assert_eq!((t.total_flips, t.steps.len()), (0, 0));

        let t = sort(&p("3 1 2")).unwrap();
        assert!(t.padded.is_some());
        assert_eq!(t.steps.len(), 1);
        assert_eq!(t.steps[0].kind, StepKind::Projection);
        t.validate().unwrap();
    }

    #[test]
    fn bounds() {
        assert_eq!(flip_bound(2), 5);
        assert_eq!(flip_bound(5), 11);
        assert_eq!(flip_bound(6), 11);
        assert_eq!(flip_bound(7), 14);
        assert_eq!(flip_bound(9), 17);
    }

    #[test]
    fn sort_even_rejects_odd() {
        assert!(sort_even(&Permutation::identity(5)).is_err());
    }
}
