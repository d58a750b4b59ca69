//! Hybrid conditional planning over partially observable multi-valued
//! domains: belief-state semantics, a makespan-optimal branch planner, a
//! parallel tree builder with subtree reuse, a plan verifier, benchmark
//! generators and an incremental ASP emitter.

pub mod asp;
pub mod ast;
pub mod belief;
pub mod benchmarks;
pub mod engine;
pub mod error;
pub mod feasibility;
pub mod lang;
pub mod model;
pub mod plan;
pub mod seqplan;
pub mod verify;

pub use belief::{BeliefState, Knowledge};
pub use engine::{Engine, EngineConfig, RunReport};
pub use error::{AspError, BeliefError, EngineError, FeasibilityError, FormatError, GroundError, PlanError};
pub use feasibility::{AllFeasible, Checker, Feasibility, FeasibilityQuery, FeasibilityView, LookupTable};
pub use model::{GroundModel, GroundProblem};
pub use plan::{ConditionalPlan, NodeId, PlanNode, PlanStats};
pub use verify::{verify, VerifyReport};
