//! Level-synchronous BFS sharded over a rayon pool.
//!
//! A state gets distance `L + 1` exactly when it is unvisited at the start
//! of level `L` and has a neighbour at distance `L`; which worker writes it
//! first does not matter, so the table is identical for every worker count.

use std::sync::atomic::{AtomicBool, AtomicU8, Ordering};

use pancake_core::oracle::{neighbors, Budget, DistanceTable, GraphId, MAX_MOVES, UNVISITED};
use pancake_core::{Error, Result};
use rayon::prelude::*;

/// States handed to a worker at a time.
const CHUNK: usize = 1 << 12;

/// Builds the same table as [`pancake_core::build_table`] using `workers` threads
/// (`0` means rayon's default).
pub fn build_table_parallel(
    graph: GraphId,
    n: usize,
    budget: Budget,
    workers: usize,
) -> Result<DistanceTable> {
    let count = budget.check(graph, n)? as usize;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Internal(format!("thread pool: {e}")))?;

    let dist: Vec<AtomicU8> = (0..count).map(|_| AtomicU8::new(UNVISITED)).collect();
    dist[0].store(0, Ordering::Relaxed);

    let mut level = 0u8;
    loop {
        let grew = AtomicBool::new(false);
        pool.install(|| {
            dist.par_chunks(CHUNK).enumerate().for_each(|(c, chunk)| {
                let mut out = [0u64; MAX_MOVES];
                let base = (c * CHUNK) as u64;
                for (i, slot) in chunk.iter().enumerate() {
                    if slot.load(Ordering::Relaxed) != level {
                        continue;
                    }
                    let m = neighbors(graph, n, base + i as u64, &mut out);
                    for &nb in &out[..m] {
                        let won = dist[nb as usize]
                            .compare_exchange(UNVISITED, level + 1, Ordering::Relaxed, Ordering::Relaxed)
                            .is_ok();
                        if won {
                            grew.store(true, Ordering::Relaxed);
                        }
                    }
                }
            });
        });
        if !grew.into_inner() {
            break;
        }
        level += 1;
        if level == UNVISITED {
            return Err(Error::Internal(format!("{graph} n={n}: depth overflow")));
        }
    }

    let bytes = dist.into_iter().map(AtomicU8::into_inner).collect();
    DistanceTable::from_parts(graph, n, bytes)
        .map_err(|e| Error::Internal(format!("BFS left states unreached: {e}")))
}
