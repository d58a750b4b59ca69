use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroundError {
    #[error("sort {sort} used by {schema} has no objects")]
    EmptySort { sort: String, schema: String },
    #[error("no fluent instance {0}")]
    UnknownInstance(String),
    #[error("value {value} is not in the domain of {fluent}")]
    UnknownValue { fluent: String, value: String },
    #[error("inconsistent initial state: {0}")]
    InconsistentInitial(String),
    #[error("fully observable fluent {0} has no initial value")]
    UninitializedFull(String),
    #[error("goal condition `{0}` is not ground")]
    NonGroundGoal(String),
    #[error("goal condition `{0}` is not a fluent condition")]
    UnsupportedGoal(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BeliefError {
    #[error("belief state has no completion satisfying the constraints")]
    Inconsistent,
    #[error("{value} is not a possible outcome of sensing {instance}")]
    IllegalOutcome { instance: String, value: String },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FeasibilityError {
    #[error("feasibility predicate {0} is already registered")]
    Duplicate(String),
    #[error("feasibility predicate {0} is not registered")]
    UnknownPredicate(String),
    #[error("lookup table line {line}: {message}")]
    Lookup { line: usize, message: String },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PlanError {
    #[error("no plan within {max_steps} steps")]
    NoPlan { max_steps: usize },
    #[error("search explored more than {limit} (belief, depth) pairs")]
    LimitExceeded { limit: usize },
    #[error(transparent)]
    Belief(#[from] BeliefError),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error("no plan from the initial state: {0}")]
    Root(PlanError),
    #[error("no plan for task {task}: {reason}")]
    Branch { task: String, reason: PlanError },
}

#[derive(Debug, Error)]
pub enum AspError {
    #[error("solver not available: {0}")]
    SolverUnavailable(String),
    #[error("solver i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed solver output on line {line}: {text}")]
    Malformed { line: usize, text: String },
    #[error("solver failed with status {status}: {stderr}")]
    SolverFailed { status: i32, stderr: String },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormatError {
    #[error("invalid plan json: {0}")]
    Json(String),
    #[error("plan refers to unknown node {0}")]
    UnknownNode(u32),
    #[error("unknown action {0}")]
    UnknownAction(String),
    #[error("unknown sensing action {0}")]
    UnknownSensing(String),
    #[error("{value} is not a value of {instance}")]
    UnknownOutcome { instance: String, value: String },
    #[error("node {id}: {message}")]
    Malformed { id: u32, message: String },
}
