//! JSON shapes and text rendering for traces and block structures.

use std::fmt::Write as _;

use pancake_core::sorter::{flip_bound, flip_bound_x2};
use pancake_core::structure::approx_classes;
use pancake_core::{BlockStructure, FlipOp, PairMap, Permutation, SortTrace, StepRecord};
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BlocksJson {
    pub classes: Vec<Vec<usize>>,
    #[serde(rename = "S")]
    pub s: usize,
    #[serde(rename = "B")]
    pub b: usize,
    pub nu_times_2: i64,
}

impl From<&BlockStructure> for BlocksJson {
    fn from(bs: &BlockStructure) -> Self {
        BlocksJson {
            classes: bs.to_vecs(),
            s: bs.singletons,
            b: bs.blocks,
            nu_times_2: bs.nu_x2(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StepJson {
    pub case: &'static str,
    pub ops: Vec<String>,
    #[serde(rename = "dS")]
    pub d_s: Option<i64>,
    #[serde(rename = "dB")]
    pub d_b: Option<i64>,
    #[serde(rename = "dNu_x2")]
    pub d_nu_x2: Option<i64>,
    pub gain_x2: Option<i64>,
}

impl From<&StepRecord> for StepJson {
    fn from(rec: &StepRecord) -> Self {
        let l = rec.ledger;
        StepJson {
            case: rec.kind.name(),
            ops: op_strings(&rec.ops),
            d_s: l.map(|l| l.d_singletons),
            d_b: l.map(|l| l.d_blocks),
            d_nu_x2: l.map(|l| l.d_nu_x2),
            gain_x2: l.map(|l| l.gain_x2),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceJson {
    pub k: usize,
    pub start: Vec<usize>,
    pub flips: Vec<String>,
    pub steps: Vec<StepJson>,
    pub total_flips: usize,
    /// `⌊2·bound⌋`, exact: `3k + 4` for even `k`, `3k + 8` for odd.
    pub bound_x2: usize,
    pub within_bound: bool,
    /// Odd `k`: the sort of the padded permutation the flips were projected from.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub padded: Option<Box<TraceJson>>,
}

impl From<&SortTrace> for TraceJson {
    fn from(t: &SortTrace) -> Self {
        TraceJson {
            k: t.k,
            start: t.start.values().to_vec(),
            flips: t.ops().map(|op| op.to_string()).collect(),
            steps: t.steps.iter().map(StepJson::from).collect(),
            total_flips: t.total_flips,
            bound_x2: flip_bound_x2(t.k),
            within_bound: t.within_bound(),
            padded: t.padded.as_deref().map(|p| Box::new(TraceJson::from(p))),
        }
    }
}

fn op_strings(ops: &[FlipOp]) -> Vec<String> {
    ops.iter().map(|op| op.to_string()).collect()
}

/// `[2] [3 4] [5] …` for even length; `(…)` plain for odd.
pub fn render_blocks(pi: &Permutation) -> String {
    let Ok(pm) = PairMap::new(pi.len()) else {
        return format!("({pi})");
    };
    let bs = approx_classes(pi, &pm).expect("pair map matches length");
    let classes: Vec<String> = bs
        .classes()
        .map(|c| {
            let inner: Vec<String> = c.iter().map(|v| v.to_string()).collect();
            format!("[{}]", inner.join(" "))
        })
        .collect();
    format!(
        "{}  S={} B={} nu={}",
        classes.join(" "),
        bs.singletons,
        bs.blocks,
        half(bs.nu_x2())
    )
}

fn half(x2: i64) -> String {
    if x2 % 2 == 0 {
        (x2 / 2).to_string()
    } else {
        format!("{}.5", x2 / 2)
    }
}

/// Human-readable trace: every intermediate state with its decomposition.
pub fn render_trace(t: &SortTrace) -> String {
    let mut out = String::new();
    if let Some(p) = &t.padded {
        let _ = writeln!(out, "odd k = {}: sorting the padded permutation ({})", t.k, p.start);
        out.push_str(&indent(&render_trace(p)));
        let _ = writeln!(out, "projected back to k = {}:", t.k);
    }
    let mut state = t.start.clone();
    let _ = writeln!(out, "start    {}", render_blocks(&state));
    for step in &t.steps {
        let ledger = match step.ledger {
            Some(l) => format!(
                "  dS={} dB={} dNu={} gain={}",
                l.d_singletons,
                l.d_blocks,
                half(l.d_nu_x2),
                half(l.gain_x2)
            ),
            None => String::new(),
        };
        let _ = writeln!(out, "{:<8} {}{ledger}", step.kind.name(), op_strings(&step.ops).join(" "));
        for op in &step.ops {
            state.apply_in_place(*op).expect("trace flips are valid");
            let _ = writeln!(out, "  {op:<5}  {}", render_blocks(&state));
        }
    }
    let _ = writeln!(
        out,
        "total    {} flips (bound {}{})",
        t.total_flips,
        flip_bound(t.k),
        if t.within_bound() { "" } else { ", EXCEEDED" }
    );
    out
}

fn indent(s: &str) -> String {
    s.lines().map(|l| format!("  | {l}\n")).collect()
}
