//! Grounding: instantiate schemas over declared objects into an indexed,
//! immutable model.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use crate::ast::*;
use crate::belief::{self, BeliefState, Knowledge};
use crate::error::GroundError;
use crate::feasibility::FeasibilityQuery;
use crate::lang::cartesian;

macro_rules! id_type {
    ($name:ident, $inner:ty) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub struct $name(pub $inner);

        impl $name {
            pub fn index(self) -> usize {
                self.0 as usize
            }
        }
    };
}

id_type!(InstanceId, u32);
id_type!(ActionId, u32);
id_type!(SensingId, u32);
id_type!(QueryId, u32);
id_type!(ValueIdx, u8);

#[derive(Debug, Clone)]
pub struct FluentInfo {
    pub name: String,
    pub params: Vec<String>,
    pub domain: Vec<String>,
    pub observability: Observability,
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub fluent: usize,
    pub args: Vec<String>,
    pub label: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cond {
    Eq(InstanceId, ValueIdx),
    Neq(InstanceId, ValueIdx),
    Known(InstanceId),
    Unknown(InstanceId),
    Feasible(QueryId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Effect {
    Assign(InstanceId, ValueIdx),
    Exclude(InstanceId, ValueIdx),
}

impl Effect {
    pub fn instance(self) -> InstanceId {
        match self {
            Effect::Assign(i, _) | Effect::Exclude(i, _) => i,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GroundAction {
    pub name: String,
    pub args: Vec<String>,
    pub label: String,
    /// Fluent conditions first, feasibility conditions last.
    pub pre: Vec<Cond>,
    pub effects: Vec<Effect>,
    /// Sorted, deduplicated.
    pub writes: Vec<InstanceId>,
    /// Interned mutex tokens, sorted.
    pub mutex: Vec<u32>,
}

#[derive(Debug, Clone)]
pub struct GroundSensing {
    pub name: String,
    pub args: Vec<String>,
    pub label: String,
    pub target: InstanceId,
    pub pre: Vec<Cond>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundConstraint {
    pub literals: Vec<(InstanceId, ValueIdx)>,
    pub lower: u32,
    /// `u32::MAX` when unbounded.
    pub upper: u32,
}

#[derive(Debug, Clone)]
pub struct GroundRedundancy {
    pub target: InstanceId,
    pub guard: Vec<Cond>,
}

/// Instances linked by constraints; closure works one component at a time.
#[derive(Debug, Clone)]
pub struct Component {
    pub instances: Vec<InstanceId>,
    pub constraints: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct GroundModel {
    pub fluents: Vec<FluentInfo>,
    pub instances: Vec<Instance>,
    pub actions: Vec<GroundAction>,
    pub sensings: Vec<GroundSensing>,
    pub constraints: Vec<GroundConstraint>,
    pub redundancies: Vec<GroundRedundancy>,
    pub queries: Vec<FeasibilityQuery>,
    pub mutex_tokens: Vec<String>,
    pub concurrency: bool,
    pub components: Vec<Component>,
    /// Component of each instance, if it occurs in a constraint.
    pub component_of: Vec<Option<u32>>,
    /// Per instance: (constraint, value) for every literal on it.
    pub literals_of: Vec<Vec<(u32, ValueIdx)>>,
    /// Per instance: redundancy rules targeting it.
    pub redundancy_of: Vec<Vec<u32>>,
    instance_index: HashMap<(usize, Vec<String>), InstanceId>,
    action_index: HashMap<String, ActionId>,
    sensing_index: HashMap<String, SensingId>,
    /// Actions keyed by one Eq precondition on a fully observable fluent.
    bucketed: HashMap<(InstanceId, ValueIdx), Vec<ActionId>>,
    unbucketed: Vec<ActionId>,
    full_instances: Vec<InstanceId>,
}

#[derive(Debug, Clone)]
pub struct GroundProblem {
    pub initial: BeliefState,
    pub goal: Vec<Cond>,
}

struct Grounder<'a> {
    spec: &'a DomainSpec,
    sorts: HashMap<&'a str, &'a [String]>,
    facts: HashSet<(&'a str, Vec<&'a str>)>,
    fluent_index: HashMap<&'a str, usize>,
    instance_index: HashMap<(usize, Vec<String>), InstanceId>,
    fluents: Vec<FluentInfo>,
    queries: Vec<FeasibilityQuery>,
    query_index: HashMap<FeasibilityQuery, QueryId>,
    tokens: Vec<String>,
    token_index: HashMap<String, u32>,
}

type Binding = HashMap<String, String>;

fn subst(t: &Term, b: &Binding) -> String {
    match t {
        Term::Var(v) => b.get(v).cloned().unwrap_or_else(|| v.clone()),
        Term::Const(c) => c.clone(),
    }
}

impl<'a> Grounder<'a> {
    fn instance(&self, atom: &Atom, b: &Binding) -> Option<InstanceId> {
        let f = *self.fluent_index.get(atom.name.as_str())?;
        let args: Vec<String> = atom.args.iter().map(|t| subst(t, b)).collect();
        self.instance_index.get(&(f, args)).copied()
    }

    fn value(&self, atom: &Atom, v: &Term, b: &Binding) -> Option<ValueIdx> {
        let f = *self.fluent_index.get(atom.name.as_str())?;
        let name = subst(v, b);
        self.fluents[f]
            .domain
            .iter()
            .position(|d| *d == name)
            .map(|i| ValueIdx(i as u8))
    }

    fn query(&mut self, atom: &Atom, b: &Binding) -> QueryId {
        let q = FeasibilityQuery {
            name: atom.name.clone(),
            args: atom.args.iter().map(|t| subst(t, b)).collect(),
        };
        if let Some(id) = self.query_index.get(&q) {
            return *id;
        }
        let id = QueryId(self.queries.len() as u32);
        self.queries.push(q.clone());
        self.query_index.insert(q, id);
        id
    }

    fn token(&mut self, t: &str) -> u32 {
        if let Some(id) = self.token_index.get(t) {
            return *id;
        }
        let id = self.tokens.len() as u32;
        self.tokens.push(t.to_string());
        self.token_index.insert(t.to_string(), id);
        id
    }

    /// Grounds a condition list. `None` means the conditions are statically
    /// false under this binding; static conditions that hold vanish.
    fn conds(&mut self, conds: &[CondSpec], b: &Binding) -> Option<Vec<Cond>> {
        let mut fluent = Vec::new();
        let mut feasible = Vec::new();
        for c in conds {
            match c {
                CondSpec::Eq(a, v) => {
                    fluent.push(Cond::Eq(self.instance(a, b)?, self.value(a, v, b)?));
                }
                CondSpec::Neq(a, v) => {
                    if let (Some(i), Some(val)) = (self.instance(a, b), self.value(a, v, b)) {
                        fluent.push(Cond::Neq(i, val));
                    }
                }
                CondSpec::Known(a) => fluent.push(Cond::Known(self.instance(a, b)?)),
                CondSpec::Unknown(a) => fluent.push(Cond::Unknown(self.instance(a, b)?)),
                CondSpec::Static { atom, negated } => {
                    let args: Vec<String> = atom.args.iter().map(|t| subst(t, b)).collect();
                    let key: (&str, Vec<&str>) = (atom.name.as_str(), args.iter().map(|s| s.as_str()).collect());
                    if self.facts.contains(&key) == *negated {
                        return None;
                    }
                }
                CondSpec::TermEq(x, y) => {
                    if subst(x, b) != subst(y, b) {
                        return None;
                    }
                }
                CondSpec::TermNeq(x, y) => {
                    if subst(x, b) == subst(y, b) {
                        return None;
                    }
                }
                CondSpec::Feasible(a) => feasible.push(Cond::Feasible(self.query(a, b))),
            }
        }
        fluent.extend(feasible);
        Some(fluent)
    }

    fn bindings(&self, params: &[Param]) -> Result<Vec<(Binding, Vec<String>)>, String> {
        let mut choices = Vec::new();
        for p in params {
            let objs = self.sorts.get(p.sort.as_str()).copied().unwrap_or(&[]);
            if objs.is_empty() {
                return Err(p.sort.clone());
            }
            choices.push(objs.to_vec());
        }
        Ok(cartesian(&choices)
            .into_iter()
            .map(|args| {
                let b = params
                    .iter()
                    .zip(&args)
                    .map(|(p, a)| (p.name.clone(), a.clone()))
                    .collect();
                (b, args)
            })
            .collect())
    }

    fn guards(&mut self, schema: &str, args: &[String]) -> Vec<Cond> {
        let spec = self.spec;
        let mut out = Vec::new();
        for g in spec.guards.iter().filter(|g| g.schema == schema) {
            let b: Binding = g.vars.iter().cloned().zip(args.iter().cloned()).collect();
            out.push(Cond::Feasible(self.query(&g.query, &b)));
        }
        out
    }
}

fn label(name: &str, args: &[String]) -> String {
    if args.is_empty() {
        name.to_string()
    } else {
        format!("{name}({})", args.join(","))
    }
}

impl GroundModel {
    pub fn ground(spec: &DomainSpec) -> Result<GroundModel, GroundError> {
        let mut g = Grounder {
            spec,
            sorts: spec
                .sorts
                .iter()
                .map(|s| (s.name.as_str(), s.objects.as_slice()))
                .collect(),
            facts: spec
                .facts
                .iter()
                .map(|f| (f.relation.as_str(), f.args.iter().map(|a| a.as_str()).collect()))
                .collect(),
            fluent_index: HashMap::new(),
            instance_index: HashMap::new(),
            fluents: Vec::new(),
            queries: Vec::new(),
            query_index: HashMap::new(),
            tokens: Vec::new(),
            token_index: HashMap::new(),
        };

        // Instances, ordered by (fluent name, args).
        let mut fluent_order: Vec<&FluentDecl> = spec.fluents.iter().collect();
        fluent_order.sort_by(|a, b| a.name.cmp(&b.name));
        let mut instances = Vec::new();
        for (fi, decl) in fluent_order.iter().enumerate() {
            g.fluent_index.insert(decl.name.as_str(), fi);
            g.fluents.push(FluentInfo {
                name: decl.name.clone(),
                params: decl.params.clone(),
                domain: decl.domain.clone(),
                observability: decl.observability,
            });
            let mut choices = Vec::new();
            for p in &decl.params {
                choices.push(g.sorts.get(p.as_str()).copied().unwrap_or(&[]).to_vec());
            }
            let mut tuples = cartesian(&choices);
            tuples.sort();
            for args in tuples {
                let id = InstanceId(instances.len() as u32);
                g.instance_index.insert((fi, args.clone()), id);
                instances.push(Instance {
                    fluent: fi,
                    label: label(&decl.name, &args),
                    args,
                });
            }
        }

        let mut actions = Vec::new();
        for a in &spec.actions {
            let bindings = g.bindings(&a.params).map_err(|sort| GroundError::EmptySort {
                sort,
                schema: a.name.clone(),
            })?;
            'binding: for (b, args) in bindings {
                let Some(mut pre) = g.conds(&a.pre, &b) else {
                    continue;
                };
                pre.extend(g.guards(&a.name, &args));
                let mut effects = Vec::new();
                for e in &a.effects {
                    let (atom, v, assign) = match e {
                        EffSpec::Assign(atom, v) => (atom, v, true),
                        EffSpec::Exclude(atom, v) => (atom, v, false),
                    };
                    let (Some(i), Some(val)) = (g.instance(atom, &b), g.value(atom, v, &b)) else {
                        continue 'binding;
                    };
                    effects.push(if assign {
                        Effect::Assign(i, val)
                    } else {
                        Effect::Exclude(i, val)
                    });
                }
                effects.sort_by_key(|e| match *e {
                    Effect::Assign(i, v) => (i, 0, v),
                    Effect::Exclude(i, v) => (i, 1, v),
                });
                effects.dedup();
                if conflicting(&effects) {
                    continue;
                }
                let mut writes: Vec<InstanceId> = effects.iter().map(|e| e.instance()).collect();
                writes.dedup();
                let mut mutex: Vec<u32> = a.mutex.iter().map(|t| g.token(&subst(t, &b))).collect();
                mutex.sort_unstable();
                mutex.dedup();
                actions.push(GroundAction {
                    name: a.name.clone(),
                    label: label(&a.name, &args),
                    args,
                    pre,
                    effects,
                    writes,
                    mutex,
                });
            }
        }
        actions.sort_by(|x, y| (&x.name, &x.args).cmp(&(&y.name, &y.args)));

        let mut sensings = Vec::new();
        for s in &spec.sensings {
            let bindings = g.bindings(&s.params).map_err(|sort| GroundError::EmptySort {
                sort,
                schema: s.name.clone(),
            })?;
            for (b, args) in bindings {
                let Some(target) = g.instance(&s.target, &b) else {
                    continue;
                };
                let Some(mut pre) = g.conds(&s.pre, &b) else {
                    continue;
                };
                pre.extend(g.guards(&s.name, &args));
                sensings.push(GroundSensing {
                    name: s.name.clone(),
                    label: label(&s.name, &args),
                    args,
                    target,
                    pre,
                });
            }
        }
        sensings.sort_by(|x, y| (&x.name, &x.args).cmp(&(&y.name, &y.args)));

        let mut constraints = Vec::new();
        for c in &spec.constraints {
            let outer = g.bindings(&c.forall).map_err(|sort| GroundError::EmptySort {
                sort,
                schema: "constraint".into(),
            })?;
            for (ob, _) in outer {
                let mut literals = Vec::new();
                for lit in &c.literals {
                    let inner = g.bindings(&lit.binders).unwrap_or_default();
                    for (ib, _) in inner {
                        let mut b = ob.clone();
                        b.extend(ib);
                        if let (Some(i), Some(v)) = (g.instance(&lit.atom, &b), g.value(&lit.atom, &lit.value, &b)) {
                            literals.push((i, v));
                        }
                    }
                }
                literals.sort();
                literals.dedup();
                constraints.push(GroundConstraint {
                    literals,
                    lower: c.lower,
                    upper: c.upper.unwrap_or(u32::MAX),
                });
            }
        }

        let mut redundancies = Vec::new();
        for r in &spec.redundancies {
            let fi = g.fluent_index[r.target.name.as_str()];
            let mut params = Vec::new();
            for (t, sort) in r.target.args.iter().zip(&g.fluents[fi].params) {
                if let Term::Var(v) = t {
                    if !params.iter().any(|p: &Param| p.name == *v) {
                        params.push(Param {
                            name: v.clone(),
                            sort: sort.clone(),
                        });
                    }
                }
            }
            let Ok(bindings) = g.bindings(&params) else {
                continue;
            };
            for (b, _) in bindings {
                let Some(target) = g.instance(&r.target, &b) else {
                    continue;
                };
                let Some(guard) = g.conds(&r.guard, &b) else {
                    continue;
                };
                redundancies.push(GroundRedundancy { target, guard });
            }
        }

        Ok(GroundModel::assemble(
            g.fluents,
            instances,
            g.instance_index,
            actions,
            sensings,
            constraints,
            redundancies,
            g.queries,
            g.tokens,
            spec.concurrency,
        ))
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        fluents: Vec<FluentInfo>,
        instances: Vec<Instance>,
        instance_index: HashMap<(usize, Vec<String>), InstanceId>,
        actions: Vec<GroundAction>,
        sensings: Vec<GroundSensing>,
        constraints: Vec<GroundConstraint>,
        redundancies: Vec<GroundRedundancy>,
        queries: Vec<FeasibilityQuery>,
        mutex_tokens: Vec<String>,
        concurrency: bool,
    ) -> GroundModel {
        let n = instances.len();

        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            let mut c = x;
            while p[c] != r {
                let next = p[c];
                p[c] = r;
                c = next;
            }
            r
        }
        let mut literals_of = vec![Vec::new(); n];
        let mut constrained = vec![false; n];
        for (ci, c) in constraints.iter().enumerate() {
            for &(i, v) in &c.literals {
                literals_of[i.index()].push((ci as u32, v));
                constrained[i.index()] = true;
            }
            for w in c.literals.windows(2) {
                let (a, b) = (find(&mut parent, w[0].0.index()), find(&mut parent, w[1].0.index()));
                if a != b {
                    parent[a] = b;
                }
            }
        }
        let mut comp_by_root: BTreeMap<usize, u32> = BTreeMap::new();
        let mut components: Vec<Component> = Vec::new();
        let mut component_of = vec![None; n];
        for i in 0..n {
            if !constrained[i] {
                continue;
            }
            let r = find(&mut parent, i);
            let ci = *comp_by_root.entry(r).or_insert_with(|| {
                components.push(Component {
                    instances: Vec::new(),
                    constraints: Vec::new(),
                });
                (components.len() - 1) as u32
            });
            components[ci as usize].instances.push(InstanceId(i as u32));
            component_of[i] = Some(ci);
        }
        for (ci, c) in constraints.iter().enumerate() {
            if let Some(&(i, _)) = c.literals.first() {
                let comp = component_of[i.index()].expect("constrained instance");
                components[comp as usize].constraints.push(ci);
            } else {
                // An empty constraint is a component of its own.
                components.push(Component {
                    instances: Vec::new(),
                    constraints: vec![ci],
                });
            }
        }

        let mut redundancy_of = vec![Vec::new(); n];
        for (ri, r) in redundancies.iter().enumerate() {
            redundancy_of[r.target.index()].push(ri as u32);
        }

        let is_full = |i: InstanceId| fluents[instances[i.index()].fluent].observability == Observability::Full;
        let mut bucketed: HashMap<(InstanceId, ValueIdx), Vec<ActionId>> = HashMap::new();
        let mut unbucketed = Vec::new();
        for (ai, a) in actions.iter().enumerate() {
            let key = a.pre.iter().find_map(|c| match *c {
                Cond::Eq(i, v) if is_full(i) => Some((i, v)),
                _ => None,
            });
            match key {
                Some(k) => bucketed.entry(k).or_default().push(ActionId(ai as u32)),
                None => unbucketed.push(ActionId(ai as u32)),
            }
        }
        let full_instances = (0..n).map(|i| InstanceId(i as u32)).filter(|&i| is_full(i)).collect();

        let action_index = actions
            .iter()
            .enumerate()
            .map(|(i, a)| (a.label.clone(), ActionId(i as u32)))
            .collect();
        let sensing_index = sensings
            .iter()
            .enumerate()
            .map(|(i, s)| (s.label.clone(), SensingId(i as u32)))
            .collect();

        GroundModel {
            fluents,
            instances,
            actions,
            sensings,
            constraints,
            redundancies,
            queries,
            mutex_tokens,
            concurrency,
            components,
            component_of,
            literals_of,
            redundancy_of,
            instance_index,
            action_index,
            sensing_index,
            bucketed,
            unbucketed,
            full_instances,
        }
    }

    pub fn num_instances(&self) -> usize {
        self.instances.len()
    }

    pub fn fluent_of(&self, i: InstanceId) -> &FluentInfo {
        &self.fluents[self.instances[i.index()].fluent]
    }

    pub fn domain_size(&self, i: InstanceId) -> usize {
        self.fluent_of(i).domain.len()
    }

    pub fn is_full(&self, i: InstanceId) -> bool {
        self.fluent_of(i).observability == Observability::Full
    }

    pub fn instance_label(&self, i: InstanceId) -> &str {
        &self.instances[i.index()].label
    }

    pub fn value_name(&self, i: InstanceId, v: ValueIdx) -> &str {
        &self.fluent_of(i).domain[v.index()]
    }

    pub fn value_index(&self, i: InstanceId, name: &str) -> Option<ValueIdx> {
        self.fluent_of(i)
            .domain
            .iter()
            .position(|d| d == name)
            .map(|p| ValueIdx(p as u8))
    }

    /// Looks up `fluent(args)`.
    pub fn instance(&self, fluent: &str, args: &[&str]) -> Option<InstanceId> {
        let fi = self.fluents.iter().position(|f| f.name == fluent)?;
        let args: Vec<String> = args.iter().map(|s| s.to_string()).collect();
        self.instance_index.get(&(fi, args)).copied()
    }

    pub fn action(&self, id: ActionId) -> &GroundAction {
        &self.actions[id.index()]
    }

    pub fn sensing(&self, id: SensingId) -> &GroundSensing {
        &self.sensings[id.index()]
    }

    /// Finds a ground action by label, e.g. `dunk(p1)`.
    pub fn action_by_label(&self, label: &str) -> Option<ActionId> {
        self.action_index.get(&normalize_label(label)).copied()
    }

    pub fn sensing_by_label(&self, label: &str) -> Option<SensingId> {
        self.sensing_index.get(&normalize_label(label)).copied()
    }

    /// Actions whose indexed precondition matches `b`, in id order. Every
    /// applicable action is among them; callers still check preconditions.
    pub fn candidate_actions(&self, b: &BeliefState) -> Vec<ActionId> {
        let mut out = self.unbucketed.clone();
        for &i in &self.full_instances {
            if let Knowledge::Known(v) = b.get(i) {
                if let Some(list) = self.bucketed.get(&(i, v)) {
                    out.extend_from_slice(list);
                }
            }
        }
        out.sort_unstable();
        out
    }

    pub fn cond_label(&self, c: Cond) -> String {
        match c {
            Cond::Eq(i, v) => format!("{} = {}", self.instance_label(i), self.value_name(i, v)),
            Cond::Neq(i, v) => format!("{} != {}", self.instance_label(i), self.value_name(i, v)),
            Cond::Known(i) => format!("known {}", self.instance_label(i)),
            Cond::Unknown(i) => format!("unknown {}", self.instance_label(i)),
            Cond::Feasible(q) => format!("feasible {}", self.queries[q.index()]),
        }
    }

    /// Grounds the problem: initial belief (closed) and goal.
    pub fn ground_problem(&self, problem: &ProblemSpec) -> Result<GroundProblem, GroundError> {
        let n = self.instances.len();
        let mut slots = vec![Knowledge::Unknown { excluded: 0 }; n];
        let lookup = |atom: &Atom| -> Result<InstanceId, GroundError> {
            let args: Vec<&str> = atom.args.iter().map(|t| t.name()).collect();
            self.instance(&atom.name, &args)
                .ok_or_else(|| GroundError::UnknownInstance(atom.to_string()))
        };
        let value = |i: InstanceId, v: &str| -> Result<ValueIdx, GroundError> {
            self.value_index(i, v).ok_or_else(|| GroundError::UnknownValue {
                fluent: self.instance_label(i).to_string(),
                value: v.to_string(),
            })
        };
        for f in problem.init.iter().filter(|f| !f.negated) {
            let i = lookup(&f.atom)?;
            let v = value(i, &f.value)?;
            match slots[i.index()] {
                Knowledge::Known(w) if w != v => {
                    return Err(GroundError::InconsistentInitial(format!(
                        "{} has two initial values",
                        f.atom
                    )))
                }
                _ => slots[i.index()] = Knowledge::Known(v),
            }
        }
        for f in problem.init.iter().filter(|f| f.negated) {
            let i = lookup(&f.atom)?;
            let v = value(i, &f.value)?;
            match &mut slots[i.index()] {
                Knowledge::Known(w) if *w == v => {
                    return Err(GroundError::InconsistentInitial(format!(
                        "{} is both known and excluded to be {}",
                        f.atom, f.value
                    )))
                }
                Knowledge::Known(_) => {}
                Knowledge::Unknown { excluded } => *excluded |= 1u64 << v.0,
            }
        }
        for (idx, k) in slots.iter().enumerate() {
            let i = InstanceId(idx as u32);
            if self.is_full(i) && matches!(k, Knowledge::Unknown { .. }) {
                // A single remaining value still counts as initialized.
                let size = self.domain_size(i);
                let rem = match k {
                    Knowledge::Unknown { excluded } => size - excluded.count_ones() as usize,
                    _ => 1,
                };
                if rem != 1 {
                    return Err(GroundError::UninitializedFull(self.instance_label(i).to_string()));
                }
            }
        }
        let initial = belief::closure(self, BeliefState::from_slots(slots))
            .map_err(|e| GroundError::InconsistentInitial(e.to_string()))?;

        let mut goal = Vec::new();
        for c in &problem.goal {
            let ground_atom = |a: &Atom| -> Result<InstanceId, GroundError> {
                if a.args.iter().any(|t| t.is_var()) {
                    return Err(GroundError::NonGroundGoal(c.to_string()));
                }
                lookup(a)
            };
            let ground_value = |i: InstanceId, t: &Term| -> Result<ValueIdx, GroundError> {
                match t {
                    Term::Var(_) => Err(GroundError::NonGroundGoal(c.to_string())),
                    Term::Const(v) => value(i, v),
                }
            };
            goal.push(match c {
                CondSpec::Eq(a, v) => {
                    let i = ground_atom(a)?;
                    Cond::Eq(i, ground_value(i, v)?)
                }
                CondSpec::Neq(a, v) => {
                    let i = ground_atom(a)?;
                    Cond::Neq(i, ground_value(i, v)?)
                }
                CondSpec::Known(a) => Cond::Known(ground_atom(a)?),
                CondSpec::Unknown(a) => Cond::Unknown(ground_atom(a)?),
                other => return Err(GroundError::UnsupportedGoal(other.to_string())),
            });
        }
        Ok(GroundProblem { initial, goal })
    }
}

fn conflicting(effects: &[Effect]) -> bool {
    for (k, e) in effects.iter().enumerate() {
        for f in &effects[k + 1..] {
            match (*e, *f) {
                (Effect::Assign(i, v), Effect::Assign(j, w)) if i == j && v != w => return true,
                (Effect::Assign(i, v), Effect::Exclude(j, w)) | (Effect::Exclude(j, w), Effect::Assign(i, v))
                    if i == j && v == w =>
                {
                    return true
                }
                _ => {}
            }
        }
    }
    false
}

/// Drops whitespace so `dunk(p1, p2)` and `dunk(p1,p2)` match.
fn normalize_label(s: &str) -> String {
    s.chars().filter(|c| !c.is_whitespace()).collect()
}

impl fmt::Display for FeasibilityQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", label(&self.name, &self.args))
    }
}
