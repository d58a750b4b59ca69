//! Exhaustive replay of a conditional plan against the belief semantics.

use std::fmt;

use crate::belief::{self, BeliefState};
use crate::feasibility::Checker;
use crate::model::{Cond, GroundModel};
use crate::plan::{ConditionalPlan, NodeId, PlanNode};
use crate::seqplan::{History, PlanStep};

/// Replay stops after this many leaves.
pub const LEAF_CAP: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    UncoveredOutcome,
    PreconditionViolated,
    IllegalOutcomeEdge,
    GoalUnreached,
    CycleDetected,
    LeafCapExceeded,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// Step labels from the root to the offending node.
    pub path: Vec<String>,
    pub node: Option<NodeId>,
    pub kind: ViolationKind,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let path = if self.path.is_empty() {
            "<root>".to_string()
        } else {
            self.path.join(" ; ")
        };
        write!(f, "{:?} at {path}: {}", self.kind, self.detail)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct VerifyReport {
    pub ok: bool,
    pub branches_checked: usize,
    pub violations: Vec<Violation>,
}

struct Replay<'a> {
    model: &'a GroundModel,
    goal: &'a [Cond],
    plan: &'a ConditionalPlan,
    checker: &'a dyn Checker,
    labels: Vec<String>,
    beliefs: Vec<BeliefState>,
    steps: Vec<PlanStep>,
    leaves: usize,
    violations: Vec<Violation>,
    histories: Option<Vec<History>>,
    stop_on_first: bool,
}

impl Replay<'_> {
    fn violation(&mut self, node: Option<NodeId>, kind: ViolationKind, detail: String) {
        self.violations.push(Violation {
            path: self.labels.clone(),
            node,
            kind,
            detail,
        });
    }

    fn halted(&self) -> bool {
        (self.stop_on_first && !self.violations.is_empty())
            || self.violations.iter().any(|v| v.kind == ViolationKind::LeafCapExceeded)
    }

    fn leaf(&mut self, node: Option<NodeId>) {
        self.leaves += 1;
        if self.leaves > LEAF_CAP {
            self.violation(
                node,
                ViolationKind::LeafCapExceeded,
                format!("more than {LEAF_CAP} leaves"),
            );
            return;
        }
        let b = self.beliefs.last().expect("belief stack is never empty");
        if !belief::goal_holds(b, self.goal) {
            let unmet: Vec<String> = self
                .goal
                .iter()
                .filter(|&&c| !belief::holds_fluent(b, c))
                .map(|&c| self.model.cond_label(c))
                .collect();
            self.violation(
                node,
                ViolationKind::GoalUnreached,
                format!("unmet: {}", unmet.join(", ")),
            );
        } else if let Some(hs) = &mut self.histories {
            hs.push(History {
                beliefs: self.beliefs.clone(),
                steps: self.steps.clone(),
            });
        }
    }

    fn push(&mut self, label: String, step: PlanStep, b: BeliefState) {
        self.labels.push(label);
        self.steps.push(step);
        self.beliefs.push(b);
    }

    fn pop(&mut self) {
        self.labels.pop();
        self.steps.pop();
        self.beliefs.pop();
    }

    fn visit(&mut self, n: NodeId) {
        if self.halted() {
            return;
        }
        let model = self.model;
        let b = self.beliefs.last().expect("belief stack is never empty").clone();
        match self.plan.node(n) {
            PlanNode::Act { actions, child } => {
                let step = PlanStep::Act(actions.clone());
                let label = step.label(model);
                if actions.is_empty() {
                    self.violation(
                        Some(n),
                        ViolationKind::PreconditionViolated,
                        "empty actuation step".into(),
                    );
                    return;
                }
                if !belief::applicable(model, &b, actions, self.checker) {
                    self.violation(
                        Some(n),
                        ViolationKind::PreconditionViolated,
                        format!("{label} is not applicable"),
                    );
                    return;
                }
                let next = match belief::apply_actuation(model, &b, actions) {
                    Ok(next) => next,
                    Err(e) => {
                        self.violation(Some(n), ViolationKind::PreconditionViolated, format!("{label}: {e}"));
                        return;
                    }
                };
                self.push(label, step, next);
                match child {
                    Some(c) => self.visit(*c),
                    None => self.leaf(Some(n)),
                }
                self.pop();
            }
            PlanNode::Sense { sensing, edges } => {
                let g = model.sensing(*sensing);
                if !belief::sensing_applicable(model, &b, *sensing, self.checker) {
                    self.violation(
                        Some(n),
                        ViolationKind::PreconditionViolated,
                        format!("{} is not applicable", g.label),
                    );
                    return;
                }
                let possible = belief::outcomes(model, &b, *sensing);
                for &o in &possible {
                    if !edges.iter().any(|&(v, _)| v == o) {
                        self.violation(
                            Some(n),
                            ViolationKind::UncoveredOutcome,
                            format!("{} has no edge for {}", g.label, model.value_name(g.target, o)),
                        );
                    }
                }
                for (k, &(o, c)) in edges.iter().enumerate() {
                    let name = match model.fluent_of(g.target).domain.get(o.index()) {
                        Some(v) => v.clone(),
                        None => format!("#{}", o.0),
                    };
                    if !possible.contains(&o) || edges[..k].iter().any(|&(v, _)| v == o) {
                        self.violation(
                            Some(n),
                            ViolationKind::IllegalOutcomeEdge,
                            format!("{} edge {name} is not a distinct possible outcome", g.label),
                        );
                        continue;
                    }
                    let next = match belief::apply_sensing(model, &b, *sensing, o) {
                        Ok(next) => next,
                        Err(e) => {
                            self.violation(Some(n), ViolationKind::IllegalOutcomeEdge, e.to_string());
                            continue;
                        }
                    };
                    self.push(format!("{} -> {name}", g.label), PlanStep::Sense(*sensing, o), next);
                    self.visit(c);
                    self.pop();
                    if self.halted() {
                        return;
                    }
                }
            }
        }
    }
}

fn replay<'a>(
    model: &'a GroundModel,
    goal: &'a [Cond],
    start: &BeliefState,
    plan: &'a ConditionalPlan,
    from: Option<NodeId>,
    checker: &'a dyn Checker,
    collect: bool,
) -> Replay<'a> {
    let mut r = Replay {
        model,
        goal,
        plan,
        checker,
        labels: Vec::new(),
        beliefs: vec![start.clone()],
        steps: Vec::new(),
        leaves: 0,
        violations: Vec::new(),
        histories: collect.then(Vec::new),
        stop_on_first: collect,
    };
    if plan.has_cycle() {
        r.violation(None, ViolationKind::CycleDetected, "plan graph contains a cycle".into());
        return r;
    }
    match from {
        Some(n) => r.visit(n),
        None => {
            // Empty plan: the goal must already hold; there are no branches.
            if !belief::goal_holds(start, goal) {
                r.violation(
                    None,
                    ViolationKind::GoalUnreached,
                    "empty plan but goal does not hold".into(),
                );
            }
        }
    }
    r
}

/// Replays every contingency of `plan` from `initial`.
pub fn verify(
    model: &GroundModel,
    goal: &[Cond],
    initial: &BeliefState,
    plan: &ConditionalPlan,
    checker: &dyn Checker,
) -> VerifyReport {
    verify_from(model, goal, initial, plan, plan.root(), checker)
}

/// Replays the subplan rooted at `node` from belief `start`.
pub fn verify_from(
    model: &GroundModel,
    goal: &[Cond],
    start: &BeliefState,
    plan: &ConditionalPlan,
    node: Option<NodeId>,
    checker: &dyn Checker,
) -> VerifyReport {
    let r = replay(model, goal, start, plan, node, checker, false);
    VerifyReport {
        ok: r.violations.is_empty(),
        branches_checked: r.leaves.min(LEAF_CAP),
        violations: r.violations,
    }
}

/// One history per root-to-leaf path; none for the empty plan.
pub fn enumerate_branches(
    model: &GroundModel,
    goal: &[Cond],
    initial: &BeliefState,
    plan: &ConditionalPlan,
    checker: &dyn Checker,
) -> Result<Vec<History>, Violation> {
    let mut r = replay(model, goal, initial, plan, plan.root(), checker, true);
    match r.violations.pop() {
        Some(v) => Err(v),
        None => Ok(r.histories.unwrap_or_default()),
    }
}
