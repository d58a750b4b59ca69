//! Conditional plan construction: branches are planned independently (in
//! parallel when enabled) and linked at sensing nodes, with subtree reuse
//! through a cache keyed by belief equivalence.

use rustc_hash::FxHashMap as HashMap;
use std::time::{Duration, Instant};

use crate::belief::{self, equiv_key, BeliefState, EquivKey};
use crate::error::{EngineError, PlanError};
use crate::feasibility::Checker;
use crate::model::{Cond, GroundModel, SensingId, ValueIdx};
use crate::plan::{ConditionalPlan, NodeId, PlanNode, PlanStats};
use crate::seqplan::{find_plan, History, PlanStep, SearchConfig, TaskConstraint};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EngineConfig {
    pub threads: usize,
    pub max_steps: usize,
    pub minimize_sensing: bool,
    /// Link branches in task-creation order so the result does not depend
    /// on scheduling.
    pub deterministic: bool,
    /// Key the subtree cache by equivalence classes (redundancy rules).
    pub equiv_classes: bool,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            threads: 1,
            max_steps: 40,
            minimize_sensing: true,
            deterministic: true,
            equiv_classes: true,
        }
    }
}

/// A queued sub-problem: plan from `belief`, starting with `sensing`
/// observing `outcome`. The root task has neither.
#[derive(Debug, Clone)]
pub struct Task {
    pub belief: BeliefState,
    pub sensing: Option<SensingId>,
    pub outcome: Option<ValueIdx>,
    parent: Option<NodeId>,
}

impl Task {
    pub fn root(belief: BeliefState) -> Self {
        Task {
            belief,
            sensing: None,
            outcome: None,
            parent: None,
        }
    }

    pub fn describe(&self, model: &GroundModel) -> String {
        match (self.sensing, self.outcome) {
            (Some(s), Some(o)) => {
                let g = model.sensing(s);
                format!("{} observing {}", g.label, model.value_name(g.target, o))
            }
            _ => "root".to_string(),
        }
    }
}

/// A place where a subtree is hooked in.
#[derive(Debug, Clone, Copy)]
enum Attach {
    Root,
    Child(NodeId),
    Edge(NodeId, ValueIdx),
}

#[derive(Debug, Clone, Default)]
pub struct RunReport {
    pub stats: PlanStats,
    pub wallclock: Duration,
    pub task_times: Vec<Duration>,
    pub tasks: usize,
    pub cache_hits: u64,
    pub threads: usize,
    /// Beliefs at which a cached subtree was reused, with that subtree.
    pub reuses: Vec<(BeliefState, NodeId)>,
}

impl RunReport {
    /// Sum of task times over (threads × wallclock).
    pub fn efficiency(&self) -> f64 {
        let total: f64 = self.task_times.iter().map(|d| d.as_secs_f64()).sum();
        let denom = self.threads.max(1) as f64 * self.wallclock.as_secs_f64();
        if denom > 0.0 {
            total / denom
        } else {
            1.0
        }
    }
}

struct Linker<'a> {
    model: &'a GroundModel,
    equiv: bool,
    plan: ConditionalPlan,
    cache: HashMap<EquivKey, NodeId>,
    hits: u64,
    reuses: Vec<(BeliefState, NodeId)>,
}

impl<'a> Linker<'a> {
    fn key(&self, b: &BeliefState) -> EquivKey {
        equiv_key(self.model, b, self.equiv)
    }

    fn attach(&mut self, at: Attach, n: NodeId) {
        match at {
            Attach::Root => self.plan.set_root(Some(n)),
            Attach::Child(p) => {
                if let PlanNode::Act { child, .. } = self.plan.node_mut(p) {
                    *child = Some(n);
                }
            }
            Attach::Edge(p, o) => {
                if let PlanNode::Sense { edges, .. } = self.plan.node_mut(p) {
                    let pos = edges.partition_point(|&(v, _)| v < o);
                    edges.insert(pos, (o, n));
                }
            }
        }
    }

    /// Reuses a cached subtree at `at` when one exists for `b` and hooking
    /// it in keeps the graph acyclic.
    fn try_reuse(&mut self, b: &BeliefState, at: Attach) -> bool {
        let Some(&n) = self.cache.get(&self.key(b)) else {
            return false;
        };
        let owner = match at {
            Attach::Root => None,
            Attach::Child(p) | Attach::Edge(p, _) => Some(p),
        };
        if owner.is_some_and(|p| self.plan.reaches(n, p)) {
            return false;
        }
        self.attach(at, n);
        self.hits += 1;
        self.reuses.push((b.clone(), n));
        true
    }

    /// Turns a branch into nodes, stopping at the first cache hit, and
    /// returns tasks for the sensing outcomes the branch did not take.
    fn link(&mut self, task: &Task, h: &History) -> Vec<Task> {
        let mut new_tasks = Vec::new();
        let (first, mut at) = match (task.parent, task.outcome) {
            (Some(p), Some(o)) => (1, Attach::Edge(p, o)),
            _ => (0, Attach::Root),
        };
        for i in first..h.steps.len() {
            let b = &h.beliefs[i];
            if self.try_reuse(b, at) {
                return new_tasks;
            }
            let node = match &h.steps[i] {
                PlanStep::Act(actions) => PlanNode::Act {
                    actions: actions.clone(),
                    child: None,
                },
                PlanStep::Sense(s, _) => PlanNode::Sense {
                    sensing: *s,
                    edges: Vec::new(),
                },
            };
            let id = self.plan.add(node);
            self.attach(at, id);
            let key = self.key(b);
            self.cache.entry(key).or_insert(id);
            at = match &h.steps[i] {
                PlanStep::Act(_) => Attach::Child(id),
                PlanStep::Sense(s, o) => {
                    for other in belief::outcomes(self.model, b, *s) {
                        if other == *o {
                            continue;
                        }
                        let reused = match belief::apply_sensing(self.model, b, *s, other) {
                            Ok(nb) => self.try_reuse(&nb, Attach::Edge(id, other)),
                            Err(_) => false,
                        };
                        if !reused {
                            new_tasks.push(Task {
                                belief: b.clone(),
                                sensing: Some(*s),
                                outcome: Some(other),
                                parent: Some(id),
                            });
                        }
                    }
                    Attach::Edge(id, *o)
                }
            };
        }
        new_tasks
    }
}

pub struct Engine<'a> {
    model: &'a GroundModel,
    goal: &'a [Cond],
    checker: &'a dyn Checker,
    config: EngineConfig,
}

impl<'a> Engine<'a> {
    pub fn new(model: &'a GroundModel, goal: &'a [Cond], checker: &'a dyn Checker, config: EngineConfig) -> Self {
        Engine {
            model,
            goal,
            checker,
            config,
        }
    }

    fn search_config(&self) -> SearchConfig {
        SearchConfig {
            max_steps: self.config.max_steps,
            minimize_sensing: self.config.minimize_sensing,
        }
    }

    fn plan_task(&self, task: &Task) -> (Result<History, PlanError>, Duration) {
        let start = Instant::now();
        let constraint = match (task.sensing, task.outcome) {
            (Some(s), Some(o)) => TaskConstraint::sense(s, o),
            _ => TaskConstraint::none(),
        };
        let r = find_plan(
            self.model,
            self.goal,
            &task.belief,
            constraint,
            self.search_config(),
            self.checker,
        );
        (r, start.elapsed())
    }

    fn failure(&self, task: &Task, reason: PlanError) -> EngineError {
        if task.parent.is_none() {
            EngineError::Root(reason)
        } else {
            EngineError::Branch {
                task: task.describe(self.model),
                reason,
            }
        }
    }

    fn linker(&self) -> Linker<'a> {
        Linker {
            model: self.model,
            equiv: self.config.equiv_classes,
            plan: ConditionalPlan::empty(),
            cache: HashMap::default(),
            hits: 0,
            reuses: Vec::new(),
        }
    }

    pub fn build(&self, initial: &BeliefState) -> Result<ConditionalPlan, EngineError> {
        self.run(initial).map(|(p, _)| p)
    }

    /// Builds the plan and reports timings and cache use.
    pub fn run(&self, initial: &BeliefState) -> Result<(ConditionalPlan, RunReport), EngineError> {
        let start = Instant::now();
        let threads = self.config.threads.max(1);
        let (linker, task_times) = if threads == 1 {
            self.run_waves(initial, &|tasks| tasks.iter().map(|t| self.plan_task(t)).collect())?
        } else {
            self.run_parallel(initial, threads)?
        };
        let plan = linker.plan;
        let report = RunReport {
            stats: plan.stats(),
            wallclock: start.elapsed(),
            tasks: task_times.len(),
            task_times,
            cache_hits: linker.hits,
            threads,
            reuses: linker.reuses,
        };
        Ok((plan, report))
    }

    /// Plans every queued task of a wave with `plan_all`, then links the
    /// results in task order.
    #[allow(clippy::type_complexity)]
    fn run_waves(
        &self,
        initial: &BeliefState,
        plan_all: &dyn Fn(&[Task]) -> Vec<(Result<History, PlanError>, Duration)>,
    ) -> Result<(Linker<'a>, Vec<Duration>), EngineError> {
        let mut linker = self.linker();
        let mut times = Vec::new();
        let mut queue = vec![Task::root(initial.clone())];
        while !queue.is_empty() {
            let results = plan_all(&queue);
            let mut next = Vec::new();
            for (task, (r, dt)) in queue.iter().zip(results) {
                times.push(dt);
                let h = r.map_err(|e| self.failure(task, e))?;
                next.extend(linker.link(task, &h));
            }
            queue = next;
        }
        Ok((linker, times))
    }

    #[cfg(feature = "parallel")]
    fn run_parallel(&self, initial: &BeliefState, threads: usize) -> Result<(Linker<'a>, Vec<Duration>), EngineError> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("thread pool");
        if self.config.deterministic {
            return self.run_streaming(initial, &pool);
        }

        use std::sync::Mutex;
        struct Shared<'a> {
            linker: Linker<'a>,
            times: Vec<Duration>,
            error: Option<EngineError>,
        }
        let shared = Mutex::new(Shared {
            linker: self.linker(),
            times: Vec::new(),
            error: None,
        });

        fn spawn<'s, 'a: 's>(
            engine: &'s Engine<'a>,
            shared: &'s Mutex<Shared<'a>>,
            scope: &rayon::Scope<'s>,
            task: Task,
        ) {
            scope.spawn(move |scope| {
                if shared.lock().unwrap().error.is_some() {
                    return;
                }
                let (r, dt) = engine.plan_task(&task);
                let mut guard = shared.lock().unwrap();
                guard.times.push(dt);
                if guard.error.is_some() {
                    return;
                }
                match r {
                    Err(e) => guard.error = Some(engine.failure(&task, e)),
                    Ok(h) => {
                        let next = guard.linker.link(&task, &h);
                        drop(guard);
                        for t in next {
                            spawn(engine, shared, scope, t);
                        }
                    }
                }
            });
        }

        pool.install(|| {
            rayon::scope(|scope| spawn(self, &shared, scope, Task::root(initial.clone())));
        });
        let s = shared.into_inner().unwrap();
        match s.error {
            Some(e) => Err(e),
            None => Ok((s.linker, s.times)),
        }
    }

    /// Plans tasks on the pool as soon as they exist, but links results
    /// strictly in task-creation order, so the plan matches the sequential
    /// one.
    #[cfg(feature = "parallel")]
    fn run_streaming(
        &self,
        initial: &BeliefState,
        pool: &rayon::ThreadPool,
    ) -> Result<(Linker<'a>, Vec<Duration>), EngineError> {
        use std::sync::atomic::{AtomicBool, Ordering};
        use std::sync::mpsc;

        type Outcome = (Result<History, PlanError>, Duration);
        let (tx, rx) = mpsc::channel::<(usize, Outcome)>();
        let cancelled = AtomicBool::new(false);
        let mut linker = self.linker();
        let mut times = Vec::new();
        let mut tasks = vec![Task::root(initial.clone())];
        let mut results: Vec<Option<Outcome>> = vec![None];

        pool.in_place_scope(|scope| {
            let submit = |k: usize, task: Task| {
                let tx = tx.clone();
                let cancelled = &cancelled;
                scope.spawn(move |_| {
                    if cancelled.load(Ordering::Relaxed) {
                        return;
                    }
                    let _ = tx.send((k, self.plan_task(&task)));
                });
            };
            submit(0, tasks[0].clone());
            let mut next = 0;
            while next < tasks.len() {
                while results[next].is_none() {
                    let (k, r) = rx.recv().expect("planning workers outlive the scope");
                    results[k] = Some(r);
                }
                let (r, dt) = results[next].take().expect("result present");
                times.push(dt);
                let h = match r {
                    Ok(h) => h,
                    Err(e) => {
                        cancelled.store(true, Ordering::Relaxed);
                        return Err(self.failure(&tasks[next], e));
                    }
                };
                for t in linker.link(&tasks[next], &h) {
                    submit(tasks.len(), t.clone());
                    tasks.push(t);
                    results.push(None);
                }
                next += 1;
            }
            Ok(())
        })?;
        Ok((linker, times))
    }

    #[cfg(not(feature = "parallel"))]
    fn run_parallel(&self, initial: &BeliefState, _threads: usize) -> Result<(Linker<'a>, Vec<Duration>), EngineError> {
        self.run_waves(initial, &|tasks| tasks.iter().map(|t| self.plan_task(t)).collect())
    }
}
