#![no_std]

extern crate alloc;

pub mod error;
pub mod oracle;
pub mod perm;
pub mod signed;
pub mod sorter;
pub mod structure;

pub use error::{Error, Result};
pub use perm::{flip_between, FlipKind, FlipOp, Permutation, Rank};
pub use oracle::{build_table, verify_lemmas, Budget, DistanceTable, GraphId};
pub use signed::{phi_inverse, phi_iso, Sign, SignedPermutation};
pub use sorter::{sort, sort_even, SortTrace, StepKind, StepRecord};
pub use structure::{approx_classes, sim_classes, BlockStructure, PairMap};
