//! Typed graphs, DPO rewriting and graduated consistency of nested graph constraints.

pub mod analysis;
pub mod anf;
pub mod classification;
pub mod condition;
pub mod consistency;
pub mod cra;
pub mod format;
pub mod graph;
pub mod matching;
pub mod morphism;
pub mod report;
pub mod rewriting;
pub mod universe;

pub use anf::{validate_anf, AnfError, AnfShape, Polarity, Quantifier};
pub use condition::{graph_satisfies, satisfies, Condition, ConditionError, Constraint};
pub use consistency::{consistency_report, is_partially_consistent, ConsistencyReport};
pub use graph::{Edge, EdgeId, EdgeType, Node, NodeId, TypeGraph, TypedGraph};
pub use matching::{enumerate_monomorphisms, MatchError};
pub use morphism::{compose, GraphMorphism, MorphismError};
pub use rewriting::{apply, apply_numbered, find_matches, track, Rule, RuleError, RewriteError, Transformation};
pub use classification::{
    classify_rule_empirical, classify_step, Classification, Counterexample, RuleStatus, RuleVerdict, StepVerdict,
};
pub use universe::{HostUniverse, SearchConfig};
pub use analysis::{
    check_depends_on_rule, criterion_direct_improve, criterion_direct_sustain, independence_table, make_check_rule,
    rule_conflicts_on_check, CriterionResult, CriterionVerdict, IndependenceTable, Overlap, OverlapKind,
};
pub use cra::{load_fixtures, CraFixtures};
