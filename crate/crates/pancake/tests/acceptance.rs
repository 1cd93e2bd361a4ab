//! Acceptance run: one PASS/FAIL line per criterion, all exact (no
//! tolerances). Where a literal criterion cannot hold, the literal check is
//! still run and reported, next to the guarantee that does hold.
//!
//! Exits non-zero if any criterion line fails.

use std::collections::{HashMap, VecDeque};
use std::process::ExitCode;
use std::time::Instant;

use pancake::parallel::build_table_parallel;
use pancake::verify::{finish_checks, iso_checks, random_permutation, Check, SortSuite, Tally};
use pancake_core::oracle::{
    build_table, neighbors, single_class_permutations, Budget, DistanceTable, GraphId, MAX_MOVES,
};
use pancake_core::perm::{factorial, Rank};
use pancake_core::signed::check_isomorphism;
use pancake_core::sorter::{flip_bound_x2, sort};
use pancake_core::structure::{approx_classes, sim_runs, PairMap};
use pancake_core::{flip_between, FlipOp, Permutation};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20_240_601;
const RANDOM_SAMPLES: u64 = 100_000;
const RANDOM_KS: [usize; 4] = [10, 50, 100, 200];
const LIPSCHITZ_SAMPLES: u64 = 1_000_000;

struct Report {
    lines: Vec<(String, bool)>,
}

impl Report {
    fn line(&mut self, id: &str, pass: bool, text: String) {
        let l = format!("[{}] {id:<12} {text}", if pass { "PASS" } else { "FAIL" });
        println!("{l}");
        self.lines.push((l, pass));
    }

    fn check(&mut self, id: &str, c: &Check) {
        let mut text = format!("{} ({}): {} checked, {} failed", c.property, c.range, c.checked, c.failures);
        if let Some(w) = &c.witness {
            text.push_str(&format!("; witness {}", truncate(w)));
        }
        self.line(id, c.pass, text);
    }

    fn skip(&mut self, id: &str, text: &str) {
        println!("[SKIP] {id:<12} {text}");
    }
}

fn truncate(s: &str) -> String {
    if s.chars().count() > 240 {
        format!("{}…", s.chars().take(240).collect::<String>())
    } else {
        s.to_string()
    }
}

fn table(graph: GraphId, n: usize) -> DistanceTable {
    build_table_parallel(graph, n, Budget::DEFAULT, 0).expect("table within budget")
}

/// Criteria 1 and 2 (exhaustive part) and 3 share one pass over S_2..S_9.
fn exhaustive_sorts(r: &mut Report) -> SortSuite {
    let mut suite = SortSuite::new("all of S_k, k = 2..=9");
    for k in 2..=9 {
        let g = table(GraphId::G, k);
        for pi in Permutation::all(k) {
            suite.observe(&pi, Some(&g)).expect("sorter internal error");
        }
    }
    r.check("1", &suite.bound.check());
    r.check("1-geodesic", &suite.geodesic.check());
    suite
}

fn random_sorts() -> SortSuite {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let ks: Vec<String> = RANDOM_KS.iter().map(|k| k.to_string()).collect();
    let mut suite = SortSuite::new(&format!(
        "{RANDOM_SAMPLES} random permutations each at k in {{{}}}, ChaCha8 seed {SEED}",
        ks.join(",")
    ));
    for &k in &RANDOM_KS {
        for _ in 0..RANDOM_SAMPLES {
            suite
                .observe(&random_permutation(k, &mut rng), None)
                .expect("sorter internal error");
        }
    }
    suite
}

fn criterion_2(r: &mut Report, exhaustive: &SortSuite, random: &SortSuite) {
    r.check("2", &exhaustive.table_cells.check());
    r.check("2", &random.table_cells.check());
    r.check("2-contract", &exhaustive.contract.check());
    r.check("2-contract", &random.contract.check());
    r.check("2-bound", &random.bound.check());
}

fn criterion_3(r: &mut Report) {
    let mut t = Tally::new(
        "case phase uses <= 3k/2-2 flips and reaches a single adjacency class",
        "all of S_k, even k <= 8",
    );
    for k in [2, 4, 6, 8] {
        for pi in Permutation::all(k) {
            let trace = sort(&pi).expect("sorts");
            let tau = trace.pre_finish_state().expect("replays");
            let flips = trace.case_flips();
            let one_class = sim_runs(&tau).len() == 1;
            t.record(2 * flips + 4 <= 3 * k && one_class, || {
                format!("({pi}): {flips} case flips to ({tau})")
            });
        }
    }
    r.check("3", &t.check());
}

fn criterion_4(r: &mut Report) {
    for c in finish_checks(10).expect("finish") {
        r.check("4-finish", &c);
    }
    let mut t = Tally::new(
        "single-class states are within 4 prefix flips (exact P_k distance)",
        "k = 2..=10, all 2k single-class states",
    );
    for k in 2..=10 {
        let p = table(GraphId::P, k);
        for sigma in single_class_permutations(k) {
            let d = p.distance(&sigma).expect("lookup");
            t.record(d <= 4, || format!("({sigma}) at distance {d}"));
        }
    }
    r.check("4", &t.check());
}

/// Reference BFS over explicit vectors.
fn naive_diameter(n: usize, suffixes: bool) -> u8 {
    let start: Vec<u8> = (1..=n as u8).collect();
    let mut dist = HashMap::from([(start.clone(), 0u8)]);
    let mut queue = VecDeque::from([start]);
    let mut max = 0;
    while let Some(s) = queue.pop_front() {
        let d = dist[&s];
        max = max.max(d);
        let mut next = Vec::new();
        for len in 2..=n {
            let mut t = s.clone();
            t[..len].reverse();
            next.push(t);
            if suffixes && len < n {
                let mut t = s.clone();
                t[n - len..].reverse();
                next.push(t);
            }
        }
        for t in next {
            if !dist.contains_key(&t) {
                dist.insert(t.clone(), d + 1);
                queue.push_back(t);
            }
        }
    }
    max
}

fn criterion_5(r: &mut Report) {
    let mut f = Vec::new();
    let mut h = Vec::new();
    let mut lipschitz = Tally::new(
        "|d(s) - d(m(s))| <= 1 along sampled edges",
        format!("{LIPSCHITZ_SAMPLES} random (state, move) pairs per table, P_k and G_k, k = 2..=9"),
    );
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 0x5eed);
    for k in 1..=9 {
        let tp = table(GraphId::P, k);
        let tg = table(GraphId::G, k);
        f.push(tp.diameter());
        h.push(tg.diameter());
        if k >= 2 {
            for t in [&tp, &tg] {
                let mut out = [0u64; MAX_MOVES];
                for _ in 0..LIPSCHITZ_SAMPLES {
                    let s = rng.random_range(0..t.state_count());
                    let m = neighbors(t.graph(), k, s, &mut out);
                    let nb = out[rng.random_range(0..m)];
                    let (a, b) = (t.at_index(s), t.at_index(nb));
                    lipschitz.record(a.abs_diff(b) <= 1, || {
                        format!("{} k={k}: states {s} ({a}) and {nb} ({b})", t.graph())
                    });
                }
            }
        }
    }
    let monotone = h.windows(2).all(|w| w[0] <= w[1]);
    let below_f = h.iter().zip(&f).all(|(h, f)| h <= f);
    let bounded = h.iter().enumerate().all(|(i, &h)| 2 * h as usize <= 3 * (i + 1) + 8);
    r.line(
        "5",
        monotone && below_f && bounded,
        format!(
            "h(k) <= h(k+1), h(k) <= f(k), h(k) <= 3k/2+4 for k = 1..=9: f = {f:?}, h = {h:?}"
        ),
    );

    let mut mismatches = Vec::new();
    for k in 1..=7 {
        let (nf, nh) = (naive_diameter(k, false), naive_diameter(k, true));
        if nf != f[k - 1] || nh != h[k - 1] {
            mismatches.push(format!("k={k}: naive f={nf} h={nh}"));
        }
    }
    r.line(
        "5-reference",
        mismatches.is_empty(),
        format!(
            "dense BFS diameters equal a naive hash-map BFS for k = 1..=7{}",
            if mismatches.is_empty() { String::new() } else { format!(": {}", mismatches.join("; ")) }
        ),
    );

    let seq = build_table(GraphId::G, 9, Budget::DEFAULT).expect("table");
    let par = build_table_parallel(GraphId::G, 9, Budget::DEFAULT, 3).expect("table");
    r.line(
        "5-determinism",
        seq.as_bytes() == par.as_bytes(),
        "G_9 table identical for the sequential builder and 3 parallel workers".into(),
    );
    r.check("5-lipschitz", &lipschitz.check());
}

fn criterion_6(r: &mut Report) {
    let p4 = table(GraphId::P, 4);
    let d1 = p4.distance(&"2 1 4 3".parse().unwrap()).unwrap();
    let d2 = p4.distance(&"4 1 2 3".parse().unwrap()).unwrap();
    r.line(
        "6",
        d1 == 3 && d2 == 2,
        format!("P_4 distance of (2,1,4,3) = {d1} (want 3), of (4,1,2,3) = {d2} (want 2)"),
    );
}

fn criterion_7(r: &mut Report) {
    let mut literal = Vec::new();
    let mut aligned = Vec::new();
    for d in 1..=3 {
        let rep = check_isomorphism(d).expect("d within range");
        let rows = iso_checks(&rep);
        literal.push(rows[0].clone());
        aligned.extend(rows[1..].iter().cloned());
    }
    for c in &literal {
        r.check("7", c);
    }
    let ok = aligned.iter().all(|c| c.pass);
    let failed: Vec<String> = aligned.iter().filter(|c| !c.pass).map(Check::line).collect();
    r.line(
        "7-aligned",
        ok,
        format!(
            "pair-aligned stratum: d!*2^d states, phi bijective, prefix-flip edge sets equal, d = 1..=3{}",
            if ok { String::new() } else { format!(": {}", failed.join("; ")) }
        ),
    );
}

fn criterion_8(r: &mut Report, exhaustive: &SortSuite, random: &SortSuite) {
    let mut inv = Tally::new("every canonical flip is an involution and moves the state", "all of S_k, k = 1..=7");
    let mut between = Tally::new("flip_between recovers every single flip", "all of S_k, k = 1..=7");
    let mut rank = Tally::new("rank/unrank is a bijection onto 0..k!", "k = 1..=7");
    for k in 1..=7 {
        let mut seen = vec![false; factorial(k).unwrap() as usize];
        for pi in Permutation::all(k) {
            for op in FlipOp::all(k) {
                let tau = pi.apply(op).unwrap();
                inv.record(tau != pi && tau.apply(op).unwrap() == pi, || format!("({pi}) {op}"));
                let found = flip_between(&pi, &tau);
                between.record(
                    found.is_some_and(|f| pi.apply(f).unwrap() == tau),
                    || format!("({pi}) -> ({tau})"),
                );
            }
            let r = pi.rank().unwrap().0;
            let back = Permutation::unrank(Rank(r), k).unwrap();
            rank.record(back == pi && !seen[r as usize], || format!("({pi}) rank {r}"));
            seen[r as usize] = true;
        }
        rank.record(seen.iter().all(|&s| s), || format!("k={k}: ranks not onto"));
    }

    let mut contiguous = Tally::new("blocks occupy consecutive positions", "all of S_k, k in {4,6,8}");
    let mut partner_free = Tally::new("j free implies its partner free", "all of S_k, k in {4,6,8}");
    for k in [4, 6, 8] {
        let pm = PairMap::new(k).unwrap();
        for pi in Permutation::all(k) {
            let bs = approx_classes(&pi, &pm).unwrap();
            for class in bs.classes() {
                let mut pos: Vec<usize> = class.iter().map(|&v| pi.position_of(v)).collect();
                pos.sort_unstable();
                contiguous.record(pos.windows(2).all(|w| w[1] == w[0] + 1), || {
                    format!("({pi}) class {class:?}")
                });
            }
            for j in 1..=k {
                if bs.is_free(j) {
                    partner_free.record(bs.is_free(pm.partner(j)), || format!("({pi}) j={j}"));
                }
            }
        }
    }

    let mut all_flips = exhaustive.adjacency_all.clone();
    let mut case_flips = exhaustive.adjacency_case.clone();
    all_flips.absorb(&random.adjacency_all);
    case_flips.absorb(&random.adjacency_case);

    let suites = [inv.check(), between.check(), rank.check(), contiguous.check(), partner_free.check()];
    for c in &suites {
        r.check("8", c);
    }
    let mut lit = all_flips.check();
    lit.range = "exhaustive k = 2..=9 and the random runs".into();
    r.check("8", &lit);
    let mut ok = case_flips.check();
    ok.range = "exhaustive k = 2..=9 and the random runs".into();
    r.check("8-case-steps", &ok);
}

fn main() -> ExitCode {
    // behave like a test binary when asked to list tests
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return ExitCode::SUCCESS;
    }
    let start = Instant::now();
    let mut r = Report { lines: Vec::new() };
    println!("acceptance criteria (exact; bound x2 = 3k+4 even / 3k+8 odd, e.g. k=9: {})", flip_bound_x2(9));

    let exhaustive = exhaustive_sorts(&mut r);
    let random = random_sorts();
    criterion_2(&mut r, &exhaustive, &random);
    criterion_3(&mut r);
    criterion_4(&mut r);
    criterion_5(&mut r);
    criterion_6(&mut r);
    criterion_7(&mut r);
    criterion_8(&mut r, &exhaustive, &random);
    r.skip(
        "9",
        "15k/14 lower bound, 18k/11 prior upper bound and asymptotics beyond desk scale are out of scope",
    );

    let failed = r.lines.iter().filter(|(_, p)| !p).count();
    println!(
        "acceptance: {} lines, {} passed, {failed} failed ({:.1}s)",
        r.lines.len(),
        r.lines.len() - failed,
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
