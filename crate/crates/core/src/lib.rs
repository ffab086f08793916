//! Synthesis of decision-tree interpretations of black-box classifiers that
//! are locally Pareto-optimal in correctness and explainability.
//!
//! Phase 1 searches the tree grammar with multi-objective MCTS ([`momcts`]);
//! phase 2 ([`pipeline`]) certifies or improves each candidate with SAT
//! queries over the encoding in [`cnf`].

pub mod cnf;
pub mod dtree;
pub mod ingest;
pub mod measures;
pub mod momcts;
pub mod momdp;
pub mod oracle;
pub mod pipeline;
pub mod report;
pub mod sat;

pub use dtree::{Action, DecisionTree, FunctionSpec, Node, TreeSpace};
pub use measures::{Dataset, GoodnessTuple, PacParams, Sample};
pub use momcts::{ArchiveEntry, MctsConfig, ParetoArchive};
pub use pipeline::{run, CorrectnessSlack, PipelineConfig, RunOutput, Termination};
pub use sat::{Solver, SolverResult};
