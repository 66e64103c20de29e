//! Exact weighted clique decomposition.
//!
//! Decides whether an edge-weighted graph is the weighted sum of at most `k` cliques and
//! produces such cliques when it is. The pipeline removes isolated vertices, shrinks the
//! graph by collapsing large blocks of twin vertices into annotated representatives,
//! searches the kernel with LP-guided backtracking, and lifts the result back.
//!
//! ```
//! use decaf::prelude::*;
//!
//! let text = "ewcd 1 3 3\ne 0 1 2\ne 0 2 1\ne 1 2 1\n";
//! let (graph, annotations) = parse_instance(text).unwrap();
//! let run = solve(&graph, &annotations, 2, &PipelineConfig::decaf()).unwrap();
//! assert!(run.outcome.is_yes());
//! ```

pub mod bench;
pub mod cli;
pub mod gen;
pub mod instance;
pub mod io;
pub mod kernel;
pub mod lpfeas;
pub mod oracle;
pub mod pipeline;
pub mod search;

/// The commonly used types and entry points.
pub mod prelude {
    pub use crate::gen::{corpus, generate, GenSpec, PlantedInstance};
    pub use crate::instance::{AnnotatedMatrix, Rational, VertexId, WeightedGraph};
    pub use crate::io::{parse_instance, parse_solution, write_instance, write_solution, SolutionFile};
    pub use crate::kernel::{kernelize, IsolatedPolicy, KernelVariant};
    pub use crate::lpfeas::{LpMode, WeightVector};
    pub use crate::oracle::{brute_force_decide, minimal_k, verify, OracleLimits};
    pub use crate::pipeline::{solve, KernelChoice, PipelineConfig, PipelineOutcome, SRuleSet};
    pub use crate::search::{Decomposition, OutcomeKind, Signature, SolveConfig, VertexOrdering};
}
