//! Property suites shared by the `verify` command and the acceptance tests.
//!
//! Each suite folds many observations into [`Check`] rows: how many cases were
//! examined, how many failed, and the first failing state as a witness.

use pancake_core::oracle::{single_class_permutations, DistanceTable, LemmaReport};
use pancake_core::signed::IsoReport;
use pancake_core::sorter::{check_step_contract, check_table_row, finish, flip_bound_x2};
use pancake_core::structure::{adjacency_count, sim_runs};
use pancake_core::{sort, FlipKind, FlipOp, Permutation, Result, SortTrace};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Check {
    pub property: String,
    pub range: String,
    pub pass: bool,
    pub checked: u64,
    pub failures: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

impl Check {
    pub fn line(&self) -> String {
        let mut s = format!(
            "[{}] {} ({}): {} checked, {} failed",
            if self.pass { "PASS" } else { "FAIL" },
            self.property,
            self.range,
            self.checked,
            self.failures
        );
        if let Some(w) = &self.witness {
            s.push_str(&format!("; witness {w}"));
        }
        s
    }
}

/// Running count for one property.
#[derive(Debug, Clone)]
pub struct Tally {
    property: String,
    range: String,
    checked: u64,
    failures: u64,
    witness: Option<String>,
}

impl Tally {
    pub fn new(property: impl Into<String>, range: impl Into<String>) -> Self {
        Tally {
            property: property.into(),
            range: range.into(),
            checked: 0,
            failures: 0,
            witness: None,
        }
    }

    pub fn record(&mut self, ok: bool, witness: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.failures += 1;
            if self.witness.is_none() {
                self.witness = Some(witness());
            }
        }
    }

    /// Adds another tally's counts; the earlier witness wins.
    pub fn absorb(&mut self, other: &Tally) {
        self.checked += other.checked;
        self.failures += other.failures;
        if self.witness.is_none() {
            self.witness = other.witness.clone();
        }
    }

    pub fn finish(self) -> Check {
        self.check()
    }

    pub fn check(&self) -> Check {
        Check {
            pass: self.failures == 0,
            property: self.property.clone(),
            range: self.range.clone(),
            checked: self.checked,
            failures: self.failures,
            witness: self.witness.clone(),
        }
    }
}

/// The trace whose case steps actually ran: the padded one for odd `k`.
fn even_trace(t: &SortTrace) -> &SortTrace {
    t.padded.as_deref().unwrap_or(t)
}

/// `(from) --op--> (to)` given the state after the flip; flips are involutions.
fn flip_witness(after: &Permutation, op: &FlipOp) -> String {
    let from = after.apply(*op).expect("flip was just applied");
    format!("({from}) --{op}--> ({after})")
}

/// Per-permutation checks of the sorter.
#[derive(Debug, Clone)]
pub struct SortSuite {
    pub bound: Tally,
    pub contract: Tally,
    pub table_cells: Tally,
    pub adjacency_case: Tally,
    pub adjacency_all: Tally,
    pub pre_finish: Tally,
    pub geodesic: Tally,
}

impl SortSuite {
    pub fn new(range: &str) -> Self {
        let t = |p: &str| Tally::new(p, range);
        SortSuite {
            bound: t("sort reaches the identity within 3k/2+2 (even k) / 3k/2+4 (odd k)"),
            contract: t("case steps keep their flip count and release at least one unit of potential per flip"),
            table_cells: t("case steps match the literal dS/dB/dNu/gain cells of their row"),
            adjacency_case: t("no flip inside a case step lowers the adjacency count"),
            adjacency_all: t("no emitted flip lowers the adjacency count"),
            pre_finish: t("even k: case phase uses <= 3k/2-2 flips and ends in one adjacency class"),
            geodesic: t("sorter flip count >= exact G_k distance"),
        }
    }

    /// Sorts `pi` and records every property. Errors only on internal failures.
    pub fn observe(&mut self, pi: &Permutation, table: Option<&DistanceTable>) -> Result<()> {
        let trace = sort(pi)?;
        let k = pi.len();
        let flips = trace.total_flips;
        self.bound.record(trace.validate().is_ok(), || {
            format!("({pi}): {flips} flips, bound x2 {}", flip_bound_x2(k))
        });

        let even = even_trace(&trace);
        let mut state = even.start.clone();
        for step in &even.steps {
            if step.kind.is_case() {
                let contract = check_step_contract(step);
                self.contract.record(contract.is_ok(), || {
                    format!("({state}): {}", contract.clone().unwrap_err())
                });
                let row = check_table_row(step);
                self.table_cells.record(row.is_ok(), || {
                    format!("({state}): {}", row.clone().unwrap_err())
                });
            }
            for op in &step.ops {
                let before = adjacency_count(&state);
                state.apply_in_place(*op)?;
                if step.kind.is_case() {
                    let after = adjacency_count(&state);
                    self.adjacency_case
                        .record(after >= before, || flip_witness(&state, op));
                }
            }
        }

        let mut state = pi.clone();
        for op in trace.ops() {
            let before = adjacency_count(&state);
            state.apply_in_place(*op)?;
            let after = adjacency_count(&state);
            self.adjacency_all
                .record(after >= before, || flip_witness(&state, op));
        }

        if k.is_multiple_of(2) {
            let tau = trace.pre_finish_state()?;
            let case_flips = trace.case_flips();
            let ok = 2 * case_flips + 4 <= 3 * k && sim_runs(&tau).len() == 1;
            self.pre_finish.record(ok, || {
                format!("({pi}): {case_flips} case flips, reached ({tau})")
            });
        }

        if let Some(table) = table {
            let d = table.distance(pi)? as usize;
            self.geodesic.record(flips >= d, || {
                format!("({pi}): {flips} flips < distance {d}")
            });
        }
        Ok(())
    }

    /// Rows that observed at least one case.
    pub fn checks(self) -> Vec<Check> {
        [
            self.bound,
            self.contract,
            self.table_cells,
            self.adjacency_case,
            self.adjacency_all,
            self.pre_finish,
            self.geodesic,
        ]
        .into_iter()
        .filter(|t| t.checked > 0)
        .map(Tally::finish)
        .collect()
    }
}

/// Uniform permutation of `1..=k`.
pub fn random_permutation<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Permutation {
    let mut v: Vec<usize> = (1..=k).collect();
    v.shuffle(rng);
    Permutation::new(v).expect("shuffled identity")
}

/// Finishing path checks for every single-class permutation up to `max_k`.
pub fn finish_checks(max_k: usize) -> Result<Vec<Check>> {
    let range = format!("k = 2..={max_k}, all 2k single-class states");
    let mut short = Tally::new("finish uses at most 4 prefix flips", range.clone());
    let mut reaches = Tally::new("finish reaches the identity", range);
    for k in 2..=max_k {
        for sigma in single_class_permutations(k) {
            let ops = finish(&sigma)?;
            let prefix_only = ops.iter().all(|op| op.kind == FlipKind::Prefix);
            short.record(ops.len() <= 4 && prefix_only, || {
                format!("({sigma}): {}", pancake_core::perm::format_ops(&ops))
            });
            let end = sigma.apply_all(&ops)?;
            reaches.record(end.is_identity(), || format!("({sigma}) ends at ({end})"));
        }
    }
    Ok(vec![short.finish(), reaches.finish()])
}

/// Flattens the oracle's lemma report into one row per property.
pub fn lemma_checks(report: &LemmaReport) -> Vec<Check> {
    let mut rows: Vec<Tally> = Vec::new();
    for c in &report.checks {
        let idx = match rows.iter().position(|t| t.property == c.property) {
            Some(i) => i,
            None => {
                rows.push(Tally::new(
                    c.property.clone(),
                    format!("k <= {}", report.max_k),
                ));
                rows.len() - 1
            }
        };
        rows[idx].record(c.pass, || match &c.witness {
            Some(w) => format!("k={} ({w}): {}", c.k, c.detail),
            None => format!("k={}: {}", c.k, c.detail),
        });
    }
    rows.into_iter().map(Tally::finish).collect()
}

/// Rows for one isomorphism report: the literal singleton-free claim and
/// the pair-aligned correspondence.
pub fn iso_checks(r: &IsoReport) -> Vec<Check> {
    let range = format!("d = {}", r.d);
    let row = |property: &str, pass: bool, witness: Option<String>| Check {
        property: property.into(),
        range: range.clone(),
        pass,
        checked: 1,
        failures: u64::from(!pass),
        witness,
    };
    let unaligned = (!r.unaligned.is_empty()).then(|| {
        let shown: Vec<String> = r.unaligned.iter().take(4).map(|p| format!("({p})")).collect();
        format!(
            "{} singleton-free states vs {} expected; not pair-aligned: {}",
            r.singleton_free,
            r.expected_size,
            shown.join(" ")
        )
    });
    vec![
        row(
            "singleton-free stratum has d!*2^d states and maps isomorphically onto P*_d",
            r.singleton_free_ok(),
            unaligned,
        ),
        row(
            "pair-aligned stratum has d!*2^d states and phi is a bijection onto S*_d",
            r.aligned == r.expected_size && r.bijective,
            (!r.bijective).then(|| format!("{} aligned states", r.aligned)),
        ),
        row(
            "phi maps prefix-flip edges of the aligned stratum exactly onto P*_d edges",
            r.edges_match,
            (!r.edges_match).then(|| {
                format!("{} aligned edges vs {} signed edges", r.aligned_edges, r.signed_edges)
            }),
        ),
    ]
}
