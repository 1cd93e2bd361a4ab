use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pancake_core::oracle::{verify_lemmas_with, Budget, GraphId};
use pancake_core::signed::{check_isomorphism, MAX_ISO_D};
use pancake_core::{sort, Error as CoreError, Permutation, SignedPermutation};
use pancake::cache::{resolve_cache_dir, TableCache, CACHE_DIR_ENV};
use pancake::report::{render_trace, TraceJson};
use pancake::verify::{finish_checks, iso_checks, lemma_checks, random_permutation, Check, SortSuite};
use pancake::{Origin, TableError, TableSource};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// `println!` that tolerates a closed stdout (e.g. piped into `head`).
macro_rules! say {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout().lock(), $($arg)*);
    }};
}

/// Name of the generator every random run uses; reported next to the seed.
const PRNG: &str = "ChaCha8Rng::seed_from_u64 (rand_chacha 0.9)";

#[derive(Parser)]
#[command(name = "pancake", version, about = "Sort by prefix and suffix reversals; exact BFS over pancake graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sort a permutation and print the step-by-step trace.
    Sort {
        /// e.g. "2,3,4,5,1,8,6,7" or "2 3 4 5 1 8 6 7"
        perm: String,
        #[command(flatten)]
        out: Output,
    },
    /// Diameter (and optionally the distance histogram) of a graph.
    Diameter {
        #[arg(long, default_value = "G")]
        graph: GraphArg,
        #[command(flatten)]
        size: Size,
        #[arg(long)]
        histogram: bool,
        #[command(flatten)]
        tables: Tables,
        #[command(flatten)]
        out: Output,
    },
    /// Exact distance from a state to the identity.
    Distance {
        #[arg(long, default_value = "G")]
        graph: GraphArg,
        /// Permutation, or signed permutation such as "+1 -3 +2" for Pstar/Gstar.
        state: String,
        #[command(flatten)]
        tables: Tables,
        #[command(flatten)]
        out: Output,
    },
    /// Run the property suites; exits 1 if any property fails.
    Verify {
        /// Sort every permutation of each k = 2..=max-k.
        #[arg(long)]
        exhaustive: bool,
        #[arg(long, default_value_t = 8)]
        max_k: usize,
        /// Sort random permutations of this length.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        samples: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Diameter chain, single-class distances and the finishing path up to max-k.
        #[arg(long)]
        lemmas: bool,
        #[command(flatten)]
        tables: Tables,
        #[command(flatten)]
        out: Output,
    },
    /// Check the correspondence between the singleton-free stratum and P*_d.
    Iso {
        #[arg(long)]
        d: usize,
        #[command(flatten)]
        out: Output,
    },
    /// Time sorting and table construction.
    Bench {
        #[arg(long, default_value_t = 100)]
        k: usize,
        #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also time a BFS build of G_n.
        #[arg(long)]
        bfs_n: Option<usize>,
        #[command(flatten)]
        tables: Tables,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Args)]
struct Output {
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Size {
    /// Length of unsigned permutations (P, G).
    #[arg(long)]
    k: Option<usize>,
    /// Length of signed permutations (Pstar, Gstar).
    #[arg(long)]
    d: Option<usize>,
}

#[derive(Args)]
struct Tables {
    /// Table cache directory (default: $PANCAKE_CACHE_DIR, then the user cache dir).
    #[arg(long, env = CACHE_DIR_ENV)]
    cache_dir: Option<PathBuf>,
    /// Do not read or write cached tables.
    #[arg(long)]
    no_cache: bool,
    /// Memory budget for one distance table, in MiB.
    #[arg(long, default_value_t = 64)]
    budget: u64,
    /// BFS worker threads (0 = one per core).
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

impl Tables {
    fn source(&self) -> TableSource {
        let budget = Budget {
            max_bytes: self.budget.saturating_mul(1 << 20),
        };
        let cache = if self.no_cache {
            None
        } else {
            resolve_cache_dir(self.cache_dir.as_deref()).map(TableCache::new)
        };
        TableSource {
            cache,
            budget,
            workers: self.workers,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GraphArg {
    #[value(name = "P")]
    P,
    #[value(name = "G")]
    G,
    #[value(name = "Pstar")]
    Pstar,
    #[value(name = "Gstar")]
    Gstar,
}

impl From<GraphArg> for GraphId {
    fn from(g: GraphArg) -> Self {
        match g {
            GraphArg::P => GraphId::P,
            GraphArg::G => GraphId::G,
            GraphArg::Pstar => GraphId::Pstar,
            GraphArg::Gstar => GraphId::Gstar,
        }
    }
}

/// Why a command did not succeed; maps onto the exit code.
enum Failure {
    /// A checked property does not hold (exit 1). The report is already printed.
    Property,
    /// Bad input or an unaffordable request (exit 2).
    Usage(String),
    /// A broken internal invariant (exit 3).
    Internal(String),
}

impl From<CoreError> for Failure {
    fn from(e: CoreError) -> Self {
        if e.is_internal() {
            Failure::Internal(e.to_string())
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

impl From<TableError> for Failure {
    fn from(e: TableError) -> Self {
        match e {
            TableError::Core(e) => e.into(),
            TableError::Cache(e) => Failure::Usage(e.to_string()),
        }
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Internal(format!("json: {e}"))
    }
}

type Outcome = Result<(), Failure>;

fn print_json<T: Serialize>(value: &T) -> Outcome {
    say!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn note_origin(graph: GraphId, n: usize, origin: Origin, src: &TableSource) {
    let msg = match (origin, &src.cache) {
        (Origin::Cache, Some(c)) => format!("loaded from {}", c.path(graph, n).display()),
        (Origin::Built, Some(c)) => format!("built, cached at {}", c.path(graph, n).display()),
        _ => "built".to_string(),
    };
    eprintln!("{graph} n={n}: {msg}");
}

fn cmd_sort(perm: &str, out: &Output) -> Outcome {
    let pi: Permutation = perm
        .parse()
        .map_err(|e: CoreError| Failure::Usage(format!("bad permutation {perm:?}: {e}")))?;
    let trace = sort(&pi)?;
    match out.format {
        Format::Json => print_json(&TraceJson::from(&trace))?,
        Format::Text => {
            use std::io::Write as _;
            let _ = std::io::stdout().lock().write_all(render_trace(&trace).as_bytes());
        }
    }
    // `sort` already replays the trace; a failure here would be internal.
    trace.validate()?;
    Ok(())
}

#[derive(Serialize)]
struct DiameterJson {
    graph: &'static str,
    n: usize,
    states: u64,
    diameter: u8,
    #[serde(skip_serializing_if = "Option::is_none")]
    histogram: Option<BTreeMap<u8, u64>>,
}

fn cmd_diameter(graph: GraphId, size: &Size, histogram: bool, tables: &Tables, out: &Output) -> Outcome {
    let n = match (graph.is_signed(), size.k, size.d) {
        (false, Some(k), _) => k,
        (true, _, Some(d)) => d,
        (false, None, _) => return Err(Failure::Usage(format!("{graph} needs --k"))),
        (true, _, None) => return Err(Failure::Usage(format!("{graph} needs --d"))),
    };
    if n == 0 {
        return Err(Failure::Usage("size must be at least 1".into()));
    }
    let src = tables.source();
    let (table, origin) = src.get(graph, n)?;
    note_origin(graph, n, origin, &src);
    let report = DiameterJson {
        graph: graph.name(),
        n,
        states: table.state_count(),
        diameter: table.diameter(),
        histogram: histogram.then(|| table.histogram()),
    };
    match out.format {
        Format::Json => print_json(&report)?,
        Format::Text => {
            say!("{}", report.diameter);
            if let Some(h) = &report.histogram {
                for (d, c) in h {
                    say!("{d:>4} {c}");
                }
            }
        }
    }
    Ok(())
}

fn cmd_distance(graph: GraphId, state: &str, tables: &Tables, out: &Output) -> Outcome {
    let src = tables.source();
    let bad = |e: CoreError| Failure::Usage(format!("bad state {state:?}: {e}"));
    let (n, dist) = if graph.is_signed() {
        let sp: SignedPermutation = state.parse().map_err(bad)?;
        let (table, origin) = src.get(graph, sp.len())?;
        note_origin(graph, sp.len(), origin, &src);
        (sp.len(), table.distance_signed(&sp)?)
    } else {
        let pi: Permutation = state.parse().map_err(bad)?;
        let (table, origin) = src.get(graph, pi.len())?;
        note_origin(graph, pi.len(), origin, &src);
        (pi.len(), table.distance(&pi)?)
    };
    match out.format {
        Format::Json => print_json(&serde_json::json!({
            "graph": graph.name(),
            "n": n,
            "state": state,
            "distance": dist,
        }))?,
        Format::Text => say!("{dist}"),
    }
    Ok(())
}

#[derive(Serialize)]
struct VerifyJson {
    seed: u64,
    prng: &'static str,
    checks: Vec<Check>,
    all_pass: bool,
}

fn print_checks(checks: &[Check], format: Format, seed: u64) -> Outcome {
    let all_pass = checks.iter().all(|c| c.pass);
    match format {
        Format::Json => print_json(&VerifyJson {
            seed,
            prng: PRNG,
            checks: checks.to_vec(),
            all_pass,
        })?,
        Format::Text => {
            for c in checks {
                say!("{}", c.line());
            }
            say!(
                "{} of {} properties hold",
                checks.iter().filter(|c| c.pass).count(),
                checks.len()
            );
        }
    }
    if all_pass {
        Ok(())
    } else {
        Err(Failure::Property)
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_verify(
    exhaustive: bool,
    max_k: usize,
    k: Option<usize>,
    samples: Option<u64>,
    seed: u64,
    lemmas: bool,
    tables: &Tables,
    out: &Output,
) -> Outcome {
    let random = k.is_some() || samples.is_some();
    let exhaustive = exhaustive || !(random || lemmas);
    let src = tables.source();
    let mut checks = Vec::new();

    if exhaustive {
        if !(2..=11).contains(&max_k) {
            return Err(Failure::Usage(format!("exhaustive --max-k must be in 2..=11, got {max_k}")));
        }
        let mut suite = SortSuite::new(&format!("all of S_k, k = 2..={max_k}"));
        for k in 2..=max_k {
            // the geodesic comparison is skipped where the table does not fit
            let table = match src.get(GraphId::G, k) {
                Ok((t, _)) => Some(t),
                Err(TableError::Core(CoreError::OverBudget { .. })) => None,
                Err(e) => return Err(e.into()),
            };
            for pi in Permutation::all(k) {
                suite.observe(&pi, table.as_ref())?;
            }
        }
        checks.extend(suite.checks());
    }

    if random {
        let k = k.ok_or_else(|| Failure::Usage("random mode needs --k".into()))?;
        if k < 2 {
            return Err(Failure::Usage("--k must be at least 2".into()));
        }
        let samples = samples.unwrap_or(1000);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut suite = SortSuite::new(&format!("{samples} random permutations, k = {k}, seed {seed}"));
        for _ in 0..samples {
            suite.observe(&random_permutation(k, &mut rng), None)?;
        }
        checks.extend(suite.checks());
    }

    if lemmas {
        if max_k == 0 {
            return Err(Failure::Usage("--max-k must be at least 1".into()));
        }
        let report = verify_lemmas_with(max_k, |g, n| {
            src.get(g, n).map(|(t, _)| t).map_err(|e| match e {
                TableError::Core(e) => e,
                TableError::Cache(e) => CoreError::Precondition(e.to_string()),
            })
        })?;
        checks.extend(lemma_checks(&report));
        checks.extend(finish_checks(max_k.max(2))?);
    }

    print_checks(&checks, out.format, seed)
}

fn cmd_iso(d: usize, out: &Output) -> Outcome {
    if d == 0 || d > MAX_ISO_D {
        return Err(Failure::Usage(format!(
            "iso supports 1 <= d <= {MAX_ISO_D} (edge sets are compared exhaustively), got {d}"
        )));
    }
    let report = check_isomorphism(d)?;
    print_checks(&iso_checks(&report), out.format, 0)
}

#[derive(Serialize)]
struct BenchJson {
    seed: u64,
    prng: &'static str,
    k: usize,
    samples: u64,
    total_flips: u64,
    max_flips: usize,
    sort_seconds: f64,
    sorts_per_second: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    bfs: Option<BfsBench>,
}

#[derive(Serialize)]
struct BfsBench {
    graph: &'static str,
    n: usize,
    states: u64,
    diameter: u8,
    workers: usize,
    seconds: f64,
}

fn cmd_bench(k: usize, samples: u64, seed: u64, bfs_n: Option<usize>, tables: &Tables, out: &Output) -> Outcome {
    if k < 1 {
        return Err(Failure::Usage("--k must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let perms: Vec<Permutation> = (0..samples).map(|_| random_permutation(k, &mut rng)).collect();
    let start = Instant::now();
    let (mut total, mut max) = (0u64, 0usize);
    for pi in &perms {
        let t = sort(pi)?;
        total += t.total_flips as u64;
        max = max.max(t.total_flips);
    }
    let secs = start.elapsed().as_secs_f64();

    let bfs = match bfs_n {
        None => None,
        Some(n) => {
            // always rebuild: timing a cache read is not the point
            let src = TableSource::uncached(tables.source().budget, tables.workers);
            let start = Instant::now();
            let (table, _) = src.get(GraphId::G, n)?;
            Some(BfsBench {
                graph: "G",
                n,
                states: table.state_count(),
                diameter: table.diameter(),
                workers: if tables.workers == 0 {
                    rayon::current_num_threads()
                } else {
                    tables.workers
                },
                seconds: start.elapsed().as_secs_f64(),
            })
        }
    };
    let report = BenchJson {
        seed,
        prng: PRNG,
        k,
        samples,
        total_flips: total,
        max_flips: max,
        sort_seconds: secs,
        sorts_per_second: samples as f64 / secs.max(f64::MIN_POSITIVE),
        bfs,
    };
    match out.format {
        Format::Json => print_json(&report)?,
        Format::Text => {
            say!(
                "sort k={k}: {samples} permutations in {secs:.3}s ({:.0}/s), mean {:.2} flips, max {max}",
                report.sorts_per_second,
                total as f64 / samples as f64
            );
            if let Some(b) = &report.bfs {
                say!(
                    "bfs G n={}: {} states, diameter {}, {:.3}s on {} workers",
                    b.n, b.states, b.diameter, b.seconds, b.workers
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Sort { perm, out } => cmd_sort(perm, out),
        Command::Diameter {
            graph,
            size,
            histogram,
            tables,
            out,
        } => cmd_diameter((*graph).into(), size, *histogram, tables, out),
        Command::Distance {
            graph,
            state,
            tables,
            out,
        } => cmd_distance((*graph).into(), state, tables, out),
        Command::Verify {
            exhaustive,
            max_k,
            k,
            samples,
            seed,
            lemmas,
            tables,
            out,
        } => cmd_verify(*exhaustive, *max_k, *k, *samples, *seed, *lemmas, tables, out),
        Command::Iso { d, out } => cmd_iso(*d, out),
        Command::Bench {
            k,
            samples,
            seed,
            bfs_n,
            tables,
            out,
        } => cmd_bench(*k, *samples, *seed, *bfs_n, tables, out),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Property) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(3)
        }
    }
}
