//! Belief states over ground fluent instances and their transitions.

use crate::error::BeliefError;
use crate::feasibility::Checker;
use crate::model::{ActionId, Component, Cond, Effect, GroundModel, InstanceId, SensingId, ValueIdx};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Knowledge {
    Known(ValueIdx),
    /// Bit `v` set means value `v` is ruled out.
    Unknown {
        excluded: u64,
    },
}

/// Total map from instances to knowledge. Public constructors always close
/// the state, so every value observed outside this module is closed and
/// consistent.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BeliefState {
    slots: Box<[Knowledge]>,
}

impl BeliefState {
    pub(crate) fn from_slots(slots: Vec<Knowledge>) -> Self {
        BeliefState {
            slots: slots.into_boxed_slice(),
        }
    }

    /// Builds and closes a belief from explicit knowledge.
    pub fn build(model: &GroundModel, slots: Vec<Knowledge>) -> Result<Self, BeliefError> {
        assert_eq!(slots.len(), model.num_instances(), "belief size mismatch");
        closure(model, BeliefState::from_slots(slots))
    }

    pub fn get(&self, i: InstanceId) -> Knowledge {
        self.slots[i.index()]
    }

    pub fn slots(&self) -> &[Knowledge] {
        &self.slots
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn is_known(&self, i: InstanceId) -> bool {
        matches!(self.get(i), Knowledge::Known(_))
    }

    /// Human-readable listing, one instance per entry.
    pub fn describe(&self, model: &GroundModel) -> Vec<String> {
        (0..self.slots.len())
            .map(|k| {
                let i = InstanceId(k as u32);
                match self.get(i) {
                    Knowledge::Known(v) => {
                        format!("{} = {}", model.instance_label(i), model.value_name(i, v))
                    }
                    Knowledge::Unknown { excluded } => {
                        let ex: Vec<&str> = (0..model.domain_size(i))
                            .filter(|b| excluded & (1 << b) != 0)
                            .map(|b| model.value_name(i, ValueIdx(b as u8)))
                            .collect();
                        format!("{} unknown, not {{{}}}", model.instance_label(i), ex.join(","))
                    }
                }
            })
            .collect()
    }
}

fn full_mask(size: usize) -> u64 {
    if size >= 64 {
        u64::MAX
    } else {
        (1u64 << size) - 1
    }
}

/// Values still possible for an instance, as a bit mask.
pub fn possible(model: &GroundModel, k: Knowledge, i: InstanceId) -> u64 {
    match k {
        Knowledge::Known(v) => 1 << v.0,
        Knowledge::Unknown { excluded } => full_mask(model.domain_size(i)) & !excluded,
    }
}

/// Evaluates a fluent condition; feasibility conditions go to `checker`.
pub fn holds(b: &BeliefState, c: Cond, checker: &dyn Checker) -> bool {
    match c {
        Cond::Feasible(q) => checker.feasible(q),
        other => holds_fluent(b, other),
    }
}

/// Evaluates a condition that mentions no feasibility query; those are
/// treated as false.
pub fn holds_fluent(b: &BeliefState, c: Cond) -> bool {
    match c {
        Cond::Eq(i, v) => b.get(i) == Knowledge::Known(v),
        Cond::Neq(i, v) => match b.get(i) {
            Knowledge::Known(w) => w != v,
            Knowledge::Unknown { excluded } => excluded & (1 << v.0) != 0,
        },
        Cond::Known(i) => b.is_known(i),
        Cond::Unknown(i) => !b.is_known(i),
        Cond::Feasible(_) => false,
    }
}

pub fn holds_all(b: &BeliefState, conds: &[Cond], checker: &dyn Checker) -> bool {
    conds.iter().all(|&c| holds(b, c, checker))
}

pub fn goal_holds(b: &BeliefState, goal: &[Cond]) -> bool {
    goal.iter().all(|&c| holds_fluent(b, c))
}

/// Two actions may share a step when their writes are disjoint and they
/// hold no common mutex token.
pub fn compatible(model: &GroundModel, a: ActionId, b: ActionId) -> bool {
    let (x, y) = (model.action(a), model.action(b));
    disjoint(&x.writes, &y.writes) && disjoint(&x.mutex, &y.mutex)
}

fn disjoint<T: Ord>(a: &[T], b: &[T]) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return false,
        }
    }
    true
}

pub fn action_applicable(model: &GroundModel, b: &BeliefState, a: ActionId, checker: &dyn Checker) -> bool {
    holds_all(b, &model.action(a).pre, checker)
}

/// Whether a set of actuation actions can execute together in `b`.
pub fn applicable(model: &GroundModel, b: &BeliefState, step: &[ActionId], checker: &dyn Checker) -> bool {
    if step.is_empty() || (!model.concurrency && step.len() > 1) {
        return false;
    }
    for (k, &a) in step.iter().enumerate() {
        if step[..k].contains(&a) || !action_applicable(model, b, a, checker) {
            return false;
        }
        if step[..k].iter().any(|&x| !compatible(model, x, a)) {
            return false;
        }
    }
    true
}

pub fn sensing_applicable(model: &GroundModel, b: &BeliefState, s: SensingId, checker: &dyn Checker) -> bool {
    let g = model.sensing(s);
    !b.is_known(g.target) && holds_all(b, &g.pre, checker)
}

/// Applies a concurrent step's effects, then closes the result. The
/// caller is responsible for checking applicability.
pub fn apply_actuation(model: &GroundModel, b: &BeliefState, step: &[ActionId]) -> Result<BeliefState, BeliefError> {
    let mut slots = b.slots.to_vec();
    let mut touched = Vec::new();
    for &a in step {
        for &e in &model.action(a).effects {
            match e {
                Effect::Assign(i, v) => {
                    if slots[i.index()] != Knowledge::Known(v) {
                        slots[i.index()] = Knowledge::Known(v);
                        touched.push(i);
                    }
                }
                Effect::Exclude(i, v) => match &mut slots[i.index()] {
                    Knowledge::Known(w) if *w == v => return Err(BeliefError::Inconsistent),
                    Knowledge::Known(_) => {}
                    Knowledge::Unknown { excluded } => {
                        if *excluded & (1 << v.0) == 0 {
                            *excluded |= 1 << v.0;
                            touched.push(i);
                        }
                    }
                },
            }
        }
    }
    close_touched(model, &mut slots, &touched)?;
    Ok(BeliefState::from_slots(slots))
}

/// Possible sensing outcomes in declaration order; empty when the target
/// is already known.
pub fn outcomes(model: &GroundModel, b: &BeliefState, s: SensingId) -> Vec<ValueIdx> {
    let t = model.sensing(s).target;
    match b.get(t) {
        Knowledge::Known(_) => Vec::new(),
        k => {
            let mask = possible(model, k, t);
            (0..model.domain_size(t))
                .filter(|v| mask & (1 << v) != 0)
                .map(|v| ValueIdx(v as u8))
                .collect()
        }
    }
}

pub fn apply_sensing(
    model: &GroundModel,
    b: &BeliefState,
    s: SensingId,
    o: ValueIdx,
) -> Result<BeliefState, BeliefError> {
    let t = model.sensing(s).target;
    if !outcomes(model, b, s).contains(&o) {
        let value = model
            .fluent_of(t)
            .domain
            .get(o.index())
            .cloned()
            .unwrap_or_else(|| format!("#{}", o.0));
        return Err(BeliefError::IllegalOutcome {
            instance: model.instance_label(t).to_string(),
            value,
        });
    }
    let mut slots = b.slots.to_vec();
    slots[t.index()] = Knowledge::Known(o);
    close_touched(model, &mut slots, &[t])?;
    Ok(BeliefState::from_slots(slots))
}

/// Fixpoint of single-candidate promotion, cardinality unit propagation
/// and exact per-component support pruning.
pub fn closure(model: &GroundModel, b: BeliefState) -> Result<BeliefState, BeliefError> {
    let mut slots = b.slots.into_vec();
    let all: Vec<InstanceId> = (0..slots.len()).map(|i| InstanceId(i as u32)).collect();
    close_touched(model, &mut slots, &all)?;
    // Constraints without literals are checked here since no instance
    // reaches them.
    for c in &model.constraints {
        if c.literals.is_empty() && c.lower > 0 {
            return Err(BeliefError::Inconsistent);
        }
    }
    Ok(BeliefState::from_slots(slots))
}

fn close_touched(model: &GroundModel, slots: &mut [Knowledge], touched: &[InstanceId]) -> Result<(), BeliefError> {
    let mut dirty: Vec<u32> = Vec::new();
    for &i in touched {
        promote(model, slots, i)?;
        if let Some(c) = model.component_of[i.index()] {
            dirty.push(c);
        }
    }
    dirty.sort_unstable();
    dirty.dedup();
    for c in dirty {
        close_component(model, slots, &model.components[c as usize])?;
    }
    Ok(())
}

/// Promotes an unknown with one remaining value; fails when none remain.
fn promote(model: &GroundModel, slots: &mut [Knowledge], i: InstanceId) -> Result<bool, BeliefError> {
    let k = slots[i.index()];
    if let Knowledge::Unknown { .. } = k {
        let mask = possible(model, k, i);
        match mask.count_ones() {
            0 => return Err(BeliefError::Inconsistent),
            1 => {
                slots[i.index()] = Knowledge::Known(ValueIdx(mask.trailing_zeros() as u8));
                return Ok(true);
            }
            _ => {}
        }
    }
    Ok(false)
}

fn close_component(model: &GroundModel, slots: &mut [Knowledge], comp: &Component) -> Result<(), BeliefError> {
    loop {
        let mut changed = false;
        for &i in &comp.instances {
            changed |= promote(model, slots, i)?;
        }
        for &ci in &comp.constraints {
            changed |= unit_propagate(model, slots, ci)?;
        }
        if changed {
            continue;
        }
        if !exact_support(model, slots, comp)? {
            return Ok(());
        }
    }
}

fn unit_propagate(model: &GroundModel, slots: &mut [Knowledge], ci: usize) -> Result<bool, BeliefError> {
    let c = &model.constraints[ci];
    let mut t = 0u32;
    let mut u = 0u32;
    for &(i, v) in &c.literals {
        match slots[i.index()] {
            Knowledge::Known(w) => t += u32::from(w == v),
            k => u += u32::from(possible(model, k, i) & (1 << v.0) != 0),
        }
    }
    if t > c.upper || t + u < c.lower {
        return Err(BeliefError::Inconsistent);
    }
    if u == 0 {
        return Ok(false);
    }
    let mut changed = false;
    if t == c.upper {
        for &(i, v) in &c.literals {
            if let Knowledge::Unknown { excluded } = &mut slots[i.index()] {
                if *excluded & (1 << v.0) == 0 {
                    *excluded |= 1 << v.0;
                    changed = true;
                }
            }
        }
    } else if t + u == c.lower {
        let forced: Vec<(InstanceId, ValueIdx)> = c
            .literals
            .iter()
            .copied()
            .filter(|&(i, v)| {
                let k = slots[i.index()];
                !matches!(k, Knowledge::Known(_)) && possible(model, k, i) & (1 << v.0) != 0
            })
            .collect();
        for (i, v) in forced {
            match slots[i.index()] {
                // Two forced literals on one instance cannot both hold.
                Knowledge::Known(w) if w != v => return Err(BeliefError::Inconsistent),
                Knowledge::Known(_) => {}
                Knowledge::Unknown { .. } => {
                    slots[i.index()] = Knowledge::Known(v);
                    changed = true;
                }
            }
        }
    }
    Ok(changed)
}

/// Finds, for each unknown instance in `comp`, which values occur in some
/// completion satisfying every constraint of the component, and excludes
/// the rest. Unknowns that share no constraint are solved independently.
/// Returns whether anything changed.
fn exact_support(model: &GroundModel, slots: &mut [Knowledge], comp: &Component) -> Result<bool, BeliefError> {
    let vars: Vec<InstanceId> = comp
        .instances
        .iter()
        .copied()
        .filter(|&i| !matches!(slots[i.index()], Knowledge::Known(_)))
        .collect();
    if vars.is_empty() {
        return Ok(false);
    }
    // Union-find over unknowns linked by a shared constraint.
    let mut parent: Vec<usize> = (0..vars.len()).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut first_var: Vec<(u32, usize)> = Vec::new();
    for (k, &i) in vars.iter().enumerate() {
        for &(c, _) in &model.literals_of[i.index()] {
            match first_var.iter().find(|(ci, _)| *ci == c) {
                Some(&(_, j)) => {
                    let (a, b) = (find(&mut parent, k), find(&mut parent, j));
                    parent[a] = b;
                }
                None => first_var.push((c, k)),
            }
        }
    }
    let mut changed = false;
    let mut seen_root = vec![false; vars.len()];
    for k in 0..vars.len() {
        let root = find(&mut parent, k);
        if seen_root[root] {
            continue;
        }
        seen_root[root] = true;
        let group: Vec<InstanceId> = (0..vars.len())
            .filter(|&j| find(&mut parent, j) == root)
            .map(|j| vars[j])
            .collect();
        let mut constraints: Vec<usize> = group
            .iter()
            .flat_map(|&i| model.literals_of[i.index()].iter().map(|&(c, _)| c as usize))
            .collect();
        constraints.sort_unstable();
        let total = constraints.len();
        constraints.dedup();
        // One constraint with one literal per unknown: unit propagation
        // already decided every value.
        if constraints.len() == 1 && total == group.len() {
            continue;
        }
        if constraints.is_empty() {
            continue;
        }
        changed |= support_group(model, slots, &constraints, &group)?;
    }
    Ok(changed)
}

fn support_group(
    model: &GroundModel,
    slots: &mut [Knowledge],
    constraints: &[usize],
    vars: &[InstanceId],
) -> Result<bool, BeliefError> {
    let mut search = Search::new(model, slots, constraints, vars);
    let domains: Vec<u64> = vars.iter().map(|&i| possible(model, slots[i.index()], i)).collect();
    let mut supported = vec![0u64; vars.len()];

    match search.solve(&domains) {
        None => return Err(BeliefError::Inconsistent),
        Some(sol) => mark(&mut supported, &sol),
    }
    let mut changed = false;
    for k in 0..vars.len() {
        let mut rest = domains[k] & !supported[k];
        while rest != 0 {
            let v = rest.trailing_zeros();
            rest &= rest - 1;
            if supported[k] & (1 << v) != 0 {
                continue;
            }
            let mut forced = domains.clone();
            forced[k] = 1 << v;
            match search.solve(&forced) {
                Some(sol) => {
                    mark(&mut supported, &sol);
                    rest &= !supported[k];
                }
                None => {
                    if let Knowledge::Unknown { excluded } = &mut slots[vars[k].index()] {
                        *excluded |= 1 << v;
                    }
                    changed = true;
                }
            }
        }
    }
    Ok(changed)
}

fn mark(supported: &mut [u64], sol: &[u8]) {
    for (s, &v) in supported.iter_mut().zip(sol) {
        *s |= 1 << v;
    }
}

/// Backtracking search for one completion of a component's unknowns.
struct Search {
    lower: Vec<u32>,
    upper: Vec<u32>,
    /// True literals among known instances, per local constraint.
    base_t: Vec<u32>,
    /// Per var: (local constraint, value) literals.
    lits: Vec<Vec<(usize, u8)>>,
    t: Vec<u32>,
    u: Vec<u32>,
    assignment: Vec<u8>,
}

impl Search {
    /// `constraints` must be sorted.
    fn new(model: &GroundModel, slots: &[Knowledge], constraints: &[usize], vars: &[InstanceId]) -> Self {
        let local = |c: usize| constraints.binary_search(&c).expect("constraint of the group");
        let mut base_t = vec![0u32; constraints.len()];
        for (l, &ci) in constraints.iter().enumerate() {
            for &(i, v) in &model.constraints[ci].literals {
                if slots[i.index()] == Knowledge::Known(v) {
                    base_t[l] += 1;
                }
            }
        }
        let lits = vars
            .iter()
            .map(|&i| {
                model.literals_of[i.index()]
                    .iter()
                    .map(|&(c, v)| (local(c as usize), v.0))
                    .collect()
            })
            .collect();
        Search {
            lower: constraints.iter().map(|&c| model.constraints[c].lower).collect(),
            upper: constraints.iter().map(|&c| model.constraints[c].upper).collect(),
            base_t,
            lits,
            t: Vec::new(),
            u: Vec::new(),
            assignment: vec![0; vars.len()],
        }
    }

    fn solve(&mut self, domains: &[u64]) -> Option<Vec<u8>> {
        self.t = self.base_t.clone();
        self.u = vec![0; self.lower.len()];
        for (k, lits) in self.lits.iter().enumerate() {
            for &(c, v) in lits {
                if domains[k] & (1 << v) != 0 {
                    self.u[c] += 1;
                }
            }
        }
        for c in 0..self.lower.len() {
            if self.t[c] > self.upper[c] || self.t[c] + self.u[c] < self.lower[c] {
                return None;
            }
        }
        if self.dfs(0, domains) {
            Some(self.assignment.clone())
        } else {
            None
        }
    }

    fn dfs(&mut self, k: usize, domains: &[u64]) -> bool {
        if k == domains.len() {
            return true;
        }
        let mut dom = domains[k];
        while dom != 0 {
            let v = dom.trailing_zeros() as u8;
            dom &= dom - 1;
            let mut ok = true;
            for &(c, val) in &self.lits[k] {
                if domains[k] & (1 << val) != 0 {
                    self.u[c] -= 1;
                }
                if val == v {
                    self.t[c] += 1;
                }
            }
            for &(c, _) in &self.lits[k] {
                if self.t[c] > self.upper[c] || self.t[c] + self.u[c] < self.lower[c] {
                    ok = false;
                    break;
                }
            }
            if ok {
                self.assignment[k] = v;
                if self.dfs(k + 1, domains) {
                    return true;
                }
            }
            for &(c, val) in &self.lits[k] {
                if domains[k] & (1 << val) != 0 {
                    self.u[c] += 1;
                }
                if val == v {
                    self.t[c] -= 1;
                }
            }
        }
        false
    }
}

/// Canonical key for subtree reuse. With `use_rules`, instances made
/// redundant by a firing redundancy rule are left out.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EquivKey(Vec<u8>);

impl EquivKey {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }
}

pub fn is_redundant(model: &GroundModel, b: &BeliefState, i: InstanceId) -> bool {
    model.redundancy_of[i.index()]
        .iter()
        .any(|&r| model.redundancies[r as usize].guard.iter().all(|&c| holds_fluent(b, c)))
}

pub fn equiv_key(model: &GroundModel, b: &BeliefState, use_rules: bool) -> EquivKey {
    let mut out = Vec::with_capacity(b.len() * 6);
    for (k, &slot) in b.slots.iter().enumerate() {
        let i = InstanceId(k as u32);
        if use_rules && is_redundant(model, b, i) {
            continue;
        }
        out.extend_from_slice(&(k as u32).to_le_bytes());
        match slot {
            Knowledge::Known(v) => {
                out.push(0);
                out.push(v.0);
            }
            Knowledge::Unknown { excluded } => {
                out.push(1);
                out.extend_from_slice(&excluded.to_le_bytes());
            }
        }
    }
    EquivKey(out)
}
