//! Std companion to `pancake-core`: parallel table builds, the on-disk table
//! cache, JSON/text reports and the verification suites behind the CLI.

pub mod cache;
pub mod parallel;
pub mod report;
pub mod verify;

use pancake_core::oracle::{Budget, DistanceTable, GraphId};

use crate::cache::{CacheError, TableCache};

/// Where a table came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    Cache,
    Built,
}

#[derive(Debug, thiserror::Error)]
pub enum TableError {
    #[error(transparent)]
    Core(#[from] pancake_core::Error),
    #[error(transparent)]
    Cache(#[from] CacheError),
}

/// Builds tables on demand, reusing and filling a cache directory if given.
#[derive(Debug, Clone)]
pub struct TableSource {
    pub cache: Option<TableCache>,
    pub budget: Budget,
    pub workers: usize,
}

impl TableSource {
    pub fn uncached(budget: Budget, workers: usize) -> Self {
        TableSource {
            cache: None,
            budget,
            workers,
        }
    }

    /// A cached table is used only if its header and checksum match; an
    /// unusable file is rebuilt and overwritten.
    pub fn get(&self, graph: GraphId, n: usize) -> Result<(DistanceTable, Origin), TableError> {
        self.budget.check(graph, n)?;
        if let Some(cache) = &self.cache {
            match cache.load(graph, n) {
                Ok(Some(t)) => return Ok((t, Origin::Cache)),
                Ok(None) => {}
                Err(CacheError::Io { path, source }) => {
                    return Err(CacheError::Io { path, source }.into())
                }
                Err(e) => eprintln!(
                    "warning: ignoring cached {graph} n={n} at {}: {e}",
                    cache.path(graph, n).display()
                ),
            }
        }
        let table = parallel::build_table_parallel(graph, n, self.budget, self.workers)?;
        if let Some(cache) = &self.cache {
            cache.store(&table)?;
        }
        Ok((table, Origin::Built))
    }
}
