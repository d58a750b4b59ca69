//! Single-branch planning: the shortest sequence of actuation and sensing
//! steps reaching the goal, with the planner choosing sensing outcomes.

use rustc_hash::FxHashMap as HashMap;
use std::rc::Rc;

use crate::belief::{self, BeliefState};
use crate::error::PlanError;
use crate::feasibility::Checker;
use crate::model::{ActionId, Cond, GroundModel, SensingId, ValueIdx};

/// One step of a branch. The derived order (actuation before sensing,
/// then by ids) is the tie-break among otherwise equal plans.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PlanStep {
    Act(Vec<ActionId>),
    Sense(SensingId, ValueIdx),
}

impl PlanStep {
    pub fn is_sense(&self) -> bool {
        matches!(self, PlanStep::Sense(..))
    }

    pub fn label(&self, model: &GroundModel) -> String {
        match self {
            PlanStep::Act(actions) => actions
                .iter()
                .map(|&a| model.action(a).label.as_str())
                .collect::<Vec<_>>()
                .join(" + "),
            PlanStep::Sense(s, o) => {
                let g = model.sensing(*s);
                format!("{} -> {}", g.label, model.value_name(g.target, *o))
            }
        }
    }
}

/// A branch with the beliefs it passes through: `beliefs[k+1]` is the
/// result of `steps[k]` applied to `beliefs[k]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct History {
    pub beliefs: Vec<BeliefState>,
    pub steps: Vec<PlanStep>,
}

impl History {
    pub fn makespan(&self) -> usize {
        self.steps.len()
    }

    pub fn senses(&self) -> usize {
        self.steps.iter().filter(|s| s.is_sense()).count()
    }

    pub fn last_belief(&self) -> &BeliefState {
        self.beliefs.last().expect("history has at least one belief")
    }
}

/// Forces the first step to observe a given sensing outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TaskConstraint {
    pub first: Option<(SensingId, ValueIdx)>,
}

impl TaskConstraint {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn sense(s: SensingId, o: ValueIdx) -> Self {
        TaskConstraint { first: Some((s, o)) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchConfig {
    pub max_steps: usize,
    pub minimize_sensing: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            max_steps: 40,
            minimize_sensing: true,
        }
    }
}

pub const BRUTE_FORCE_LIMIT: usize = 100_000;

type Successors = Rc<Vec<(PlanStep, BeliefState)>>;

/// All steps applicable in `b` with their results, sorted by step.
/// Transitions into inconsistent beliefs are dropped. `indexed` selects
/// the precondition index for candidate actions instead of a full scan.
pub fn successors(
    model: &GroundModel,
    b: &BeliefState,
    checker: &dyn Checker,
    indexed: bool,
) -> Vec<(PlanStep, BeliefState)> {
    let candidates: Vec<ActionId> = if indexed {
        model.candidate_actions(b)
    } else {
        (0..model.actions.len() as u32).map(ActionId).collect()
    };
    let applicable: Vec<ActionId> = candidates
        .into_iter()
        .filter(|&a| belief::action_applicable(model, b, a, checker))
        .collect();

    let mut out = Vec::new();
    let mut sets = Vec::new();
    if model.concurrency {
        let mut current = Vec::new();
        concurrent_sets(model, &applicable, 0, &mut current, &mut sets);
    } else {
        sets.extend(applicable.iter().map(|&a| vec![a]));
    }
    for set in sets {
        if let Ok(nb) = belief::apply_actuation(model, b, &set) {
            out.push((PlanStep::Act(set), nb));
        }
    }
    for s in 0..model.sensings.len() as u32 {
        let s = SensingId(s);
        if !belief::sensing_applicable(model, b, s, checker) {
            continue;
        }
        for o in belief::outcomes(model, b, s) {
            if let Ok(nb) = belief::apply_sensing(model, b, s, o) {
                out.push((PlanStep::Sense(s, o), nb));
            }
        }
    }
    out.sort_by(|x, y| x.0.cmp(&y.0));
    out
}

/// Every nonempty pairwise-compatible subset, as sorted vectors in
/// lexicographic order (preorder of the subset tree).
fn concurrent_sets(
    model: &GroundModel,
    actions: &[ActionId],
    from: usize,
    current: &mut Vec<ActionId>,
    out: &mut Vec<Vec<ActionId>>,
) {
    for k in from..actions.len() {
        let a = actions[k];
        if current.iter().all(|&x| belief::compatible(model, x, a)) {
            current.push(a);
            out.push(current.clone());
            concurrent_sets(model, actions, k + 1, current, out);
            current.pop();
        }
    }
}

const UNBOUNDED: u32 = u32::MAX;

struct Search<'a> {
    model: &'a GroundModel,
    goal: &'a [Cond],
    checker: &'a dyn Checker,
    succ: HashMap<BeliefState, Successors>,
    /// Pareto sets of (remaining steps, sensing budget) known to fail,
    /// indexed by whether the belief was entered by an actuation step.
    failed: HashMap<BeliefState, [Vec<(u32, u32)>; 2]>,
}

impl<'a> Search<'a> {
    fn successors(&mut self, b: &BeliefState) -> Successors {
        if let Some(s) = self.succ.get(b) {
            return s.clone();
        }
        let s = Rc::new(successors(self.model, b, self.checker, true));
        self.succ.insert(b.clone(), s.clone());
        s
    }

    fn known_failure(&self, b: &BeliefState, last_act: bool, rem: u32, budget: u32) -> bool {
        self.failed
            .get(b)
            .is_some_and(|v| v[usize::from(last_act)].iter().any(|&(r, s)| r >= rem && s >= budget))
    }

    fn record_failure(&mut self, b: &BeliefState, last_act: bool, rem: u32, budget: u32) {
        let entry = match self.failed.get_mut(b) {
            Some(e) => &mut e[usize::from(last_act)],
            None => &mut self.failed.entry(b.clone()).or_default()[usize::from(last_act)],
        };
        entry.retain(|&(r, s)| !(r <= rem && s <= budget));
        entry.push((rem, budget));
    }

    /// Depth-first search for the lexicographically first plan of at most
    /// `rem` further steps using at most `budget` sensing steps.
    fn dfs(
        &mut self,
        b: &BeliefState,
        rem: u32,
        budget: u32,
        last_act: bool,
        steps: &mut Vec<PlanStep>,
        beliefs: &mut Vec<BeliefState>,
    ) -> bool {
        if last_act && belief::goal_holds(b, self.goal) {
            return true;
        }
        if rem == 0 || self.known_failure(b, last_act, rem, budget) {
            return false;
        }
        let succ = self.successors(b);
        for (step, nb) in succ.iter() {
            let sense = step.is_sense();
            if sense && budget == 0 {
                continue;
            }
            let nbudget = if sense && budget != UNBOUNDED {
                budget - 1
            } else {
                budget
            };
            steps.push(step.clone());
            beliefs.push(nb.clone());
            if self.dfs(nb, rem - 1, nbudget, !sense, steps, beliefs) {
                return true;
            }
            steps.pop();
            beliefs.pop();
        }
        self.record_failure(b, last_act, rem, budget);
        false
    }

    fn attempt(
        &mut self,
        start: &BeliefState,
        forced: Option<(SensingId, ValueIdx, &BeliefState)>,
        depth: u32,
        budget: u32,
    ) -> Option<History> {
        let mut steps = Vec::new();
        let mut beliefs = vec![start.clone()];
        let ok = match forced {
            None => self.dfs(start, depth, budget, true, &mut steps, &mut beliefs),
            Some((s, o, b1)) => {
                if depth == 0 || budget == 0 {
                    false
                } else {
                    steps.push(PlanStep::Sense(s, o));
                    beliefs.push(b1.clone());
                    let nbudget = if budget == UNBOUNDED { budget } else { budget - 1 };
                    self.dfs(b1, depth - 1, nbudget, false, &mut steps, &mut beliefs)
                }
            }
        };
        ok.then_some(History { beliefs, steps })
    }
}

/// Iterative deepening over makespan, then (optionally) over the sensing
/// budget at the optimal makespan. Among equally good plans the
/// lexicographically smallest step sequence wins.
pub fn find_plan(
    model: &GroundModel,
    goal: &[Cond],
    start: &BeliefState,
    constraint: TaskConstraint,
    config: SearchConfig,
    checker: &dyn Checker,
) -> Result<History, PlanError> {
    let no_plan = PlanError::NoPlan {
        max_steps: config.max_steps,
    };
    let forced_belief = match constraint.first {
        None => None,
        Some((s, o)) => {
            if !belief::sensing_applicable(model, start, s, checker) {
                return Err(no_plan);
            }
            Some((s, o, belief::apply_sensing(model, start, s, o)?))
        }
    };
    let forced = forced_belief.as_ref().map(|(s, o, b)| (*s, *o, b));
    let mut search = Search {
        model,
        goal,
        checker,
        succ: HashMap::default(),
        failed: HashMap::default(),
    };
    let max = config.max_steps.min(u32::MAX as usize - 1) as u32;
    let mut found = None;
    for depth in 0..=max {
        if let Some(h) = search.attempt(start, forced, depth, UNBOUNDED) {
            found = Some((depth, h));
            break;
        }
    }
    let (depth, best) = found.ok_or(no_plan)?;
    if config.minimize_sensing {
        let senses = best.senses() as u32;
        for budget in 0..senses {
            if let Some(h) = search.attempt(start, forced, depth, budget) {
                return Ok(h);
            }
        }
    }
    Ok(best)
}

/// Reference implementation: layered breadth-first enumeration keeping,
/// per (belief, last-step-kind), the best prefix by (sensing count,
/// lexicographic order). Fails with `LimitExceeded` past `limit` explored
/// pairs.
pub fn brute_force_plan(
    model: &GroundModel,
    goal: &[Cond],
    start: &BeliefState,
    constraint: TaskConstraint,
    config: SearchConfig,
    checker: &dyn Checker,
    limit: usize,
) -> Result<History, PlanError> {
    type Entry = (usize, Vec<PlanStep>, Vec<BeliefState>);
    let mut layer: HashMap<(BeliefState, bool), Entry> = HashMap::default();
    let mut depth = 0usize;
    match constraint.first {
        None => {
            layer.insert((start.clone(), true), (0, Vec::new(), vec![start.clone()]));
        }
        Some((s, o)) => {
            if config.max_steps == 0 || !belief::sensing_applicable(model, start, s, checker) {
                return Err(PlanError::NoPlan {
                    max_steps: config.max_steps,
                });
            }
            let b1 = belief::apply_sensing(model, start, s, o)?;
            layer.insert(
                (b1.clone(), false),
                (1, vec![PlanStep::Sense(s, o)], vec![start.clone(), b1]),
            );
            depth = 1;
        }
    }
    let better = |a: &Entry, b: &Entry| -> bool {
        if config.minimize_sensing && a.0 != b.0 {
            return a.0 < b.0;
        }
        a.1 < b.1
    };
    let mut seen: rustc_hash::FxHashSet<(BeliefState, bool)> = layer.keys().cloned().collect();
    let mut explored = layer.len();
    loop {
        let mut best: Option<&Entry> = None;
        for ((b, last_act), e) in &layer {
            if *last_act && belief::goal_holds(b, goal) && best.is_none_or(|cur| better(e, cur)) {
                best = Some(e);
            }
        }
        if let Some(e) = best {
            return Ok(History {
                beliefs: e.2.clone(),
                steps: e.1.clone(),
            });
        }
        if depth >= config.max_steps || layer.is_empty() {
            return Err(PlanError::NoPlan {
                max_steps: config.max_steps,
            });
        }
        let mut next: HashMap<(BeliefState, bool), Entry> = HashMap::default();
        for ((b, _), e) in &layer {
            for (step, nb) in successors(model, b, checker, false) {
                let key = (nb, !step.is_sense());
                if seen.contains(&key) {
                    continue;
                }
                let mut steps = e.1.clone();
                let sense = step.is_sense();
                steps.push(step);
                let mut beliefs = e.2.clone();
                beliefs.push(key.0.clone());
                let cand = (e.0 + usize::from(sense), steps, beliefs);
                match next.get(&key) {
                    Some(cur) if !better(&cand, cur) => {}
                    _ => {
                        next.insert(key, cand);
                    }
                }
            }
        }
        explored += next.len();
        if explored > limit {
            return Err(PlanError::LimitExceeded { limit });
        }
        seen.extend(next.keys().cloned());
        layer = next;
        depth += 1;
    }
}
