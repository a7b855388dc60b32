//! Recursive oracle identification.
//!
//! A depth-ℓ tree over the symbol set `X = {0,1}^n` carries a secret label at
//! every internal node. Querying a node requires presenting its secret; a
//! wrong key returns `FAIL`. The secret of a node is learnable only from the
//! bits of its children, so both the quantum procedure ([`find_simulate`],
//! [`find_coherent_tiny`]) and the classical baseline ([`classical_solver`])
//! recurse to the leaves. [`z_referee`] replays a query log through the
//! potential `Z = Σ_{x∈S} (log₂|A|/3)^{−d(x)}`.

mod bounds;
mod classical;
mod coherent;
mod find;
mod oracle;
mod referee;
mod spec;

pub use bounds::{lower_bound, thm3_table, LowerBound, Thm3Row};
pub use classical::{classical_solver, random_strategy, ClassicalRun};
pub use coherent::{find_coherent_tiny, CoherentReport, COHERENT_QUBIT_BUDGET};
pub use find::{
    count_queries, find_copies, find_epsilon, find_simulate, query_count_closed_form, query_count_paper, Corruption,
    FindParams, FindReport, JunkMode, LevelReport,
};
pub use oracle::{evaluate, read_log_jsonl, write_log_jsonl, Answer, QueryRecord, RecursiveOracle};
pub use referee::{z_referee, P5Group, RefereeReport, ZTracker};
pub use spec::{hadamard_family, OracleRef, RecursiveOracleSpec, SpecFile};
