//! Registry of external feasibility predicates with a shared result cache.

use std::collections::{HashMap, VecDeque};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, OnceLock, RwLock};

use crate::ast::GridSpec;
use crate::error::FeasibilityError;
use crate::lang::parse_cell;
use crate::model::{GroundModel, QueryId};

pub type Evaluator = Arc<dyn Fn(&[String]) -> bool + Send + Sync>;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FeasibilityQuery {
    pub name: String,
    pub args: Vec<String>,
}

impl FeasibilityQuery {
    pub fn new(name: &str, args: &[&str]) -> Self {
        FeasibilityQuery {
            name: name.to_string(),
            args: args.iter().map(|a| a.to_string()).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CacheCounters {
    pub hits: u64,
    pub misses: u64,
    pub evaluations: u64,
}

/// Evaluators plus a per-run cache. `check` is safe to call from many
/// threads; each distinct query is evaluated at most once.
#[derive(Default)]
pub struct Feasibility {
    evaluators: HashMap<String, Evaluator>,
    cache: RwLock<HashMap<FeasibilityQuery, bool>>,
    hits: AtomicU64,
    misses: AtomicU64,
    evaluations: AtomicU64,
}

impl Feasibility {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register<F>(&mut self, name: &str, f: F) -> Result<(), FeasibilityError>
    where
        F: Fn(&[String]) -> bool + Send + Sync + 'static,
    {
        if self.evaluators.contains_key(name) {
            return Err(FeasibilityError::Duplicate(name.to_string()));
        }
        self.evaluators.insert(name.to_string(), Arc::new(f));
        Ok(())
    }

    pub fn is_registered(&self, name: &str) -> bool {
        self.evaluators.contains_key(name)
    }

    pub fn registered(&self) -> Vec<String> {
        let mut v: Vec<String> = self.evaluators.keys().cloned().collect();
        v.sort();
        v
    }

    pub fn check(&self, q: &FeasibilityQuery) -> Result<bool, FeasibilityError> {
        if let Some(&r) = self.cache.read().unwrap().get(q) {
            self.hits.fetch_add(1, Ordering::Relaxed);
            return Ok(r);
        }
        let eval = self
            .evaluators
            .get(&q.name)
            .ok_or_else(|| FeasibilityError::UnknownPredicate(q.name.clone()))?;
        let mut cache = self.cache.write().unwrap();
        // Another thread may have filled the entry while we waited.
        if let Some(&r) = cache.get(q) {
            self.hits.fetch_add(1, Ordering::Relaxed);
            return Ok(r);
        }
        self.misses.fetch_add(1, Ordering::Relaxed);
        self.evaluations.fetch_add(1, Ordering::Relaxed);
        let r = eval(&q.args);
        cache.insert(q.clone(), r);
        Ok(r)
    }

    /// Evaluates every query up front.
    pub fn precompute(&self, queries: &[FeasibilityQuery]) -> Result<(), FeasibilityError> {
        for q in queries {
            self.check(q)?;
        }
        Ok(())
    }

    pub fn cached_len(&self) -> usize {
        self.cache.read().unwrap().len()
    }

    pub fn counters(&self) -> CacheCounters {
        CacheCounters {
            hits: self.hits.load(Ordering::Relaxed),
            misses: self.misses.load(Ordering::Relaxed),
            evaluations: self.evaluations.load(Ordering::Relaxed),
        }
    }

    pub fn reset_counters(&self) {
        self.hits.store(0, Ordering::Relaxed);
        self.misses.store(0, Ordering::Relaxed);
        self.evaluations.store(0, Ordering::Relaxed);
    }

    pub fn register_always_true(&mut self) -> Result<(), FeasibilityError> {
        self.register("always_true", |_| true)
    }

    /// Registers every predicate named in a lookup table. Keys missing
    /// from the table evaluate to false.
    pub fn register_table(&mut self, table: &LookupTable) -> Result<(), FeasibilityError> {
        for name in table.names() {
            let t = table.clone();
            let n = name.clone();
            self.register(&name, move |args| t.get(&n, args).unwrap_or(false))?;
        }
        Ok(())
    }

    /// Registers `grid_path` over the given obstacle grid.
    pub fn register_grid(&mut self, grid: &GridSpec) -> Result<(), FeasibilityError> {
        let g = ObstacleGrid::from_spec(grid);
        self.register("grid_path", move |args| match args {
            [from, to] => match (parse_cell(from), parse_cell(to)) {
                (Some(a), Some(b)) => g.path_exists(a, b),
                _ => false,
            },
            _ => false,
        })
    }
}

/// Resolves a model's interned queries against a registry. Results are
/// memoized per query id, so the hot path does no hashing.
pub trait Checker: Sync {
    fn feasible(&self, q: QueryId) -> bool;
}

pub struct FeasibilityView<'a> {
    feas: &'a Feasibility,
    model: &'a GroundModel,
    memo: Vec<OnceLock<bool>>,
}

impl<'a> FeasibilityView<'a> {
    pub fn new(feas: &'a Feasibility, model: &'a GroundModel) -> Self {
        FeasibilityView {
            feas,
            model,
            memo: (0..model.queries.len()).map(|_| OnceLock::new()).collect(),
        }
    }
}

impl Checker for FeasibilityView<'_> {
    fn feasible(&self, q: QueryId) -> bool {
        *self.memo[q.index()].get_or_init(|| {
            // Unregistered predicates never hold; validation reports them.
            self.feas.check(&self.model.queries[q.index()]).unwrap_or(false)
        })
    }
}

/// Treats every feasibility condition as satisfied.
pub struct AllFeasible;

impl Checker for AllFeasible {
    fn feasible(&self, _: QueryId) -> bool {
        true
    }
}

/// Parsed `name arg ... -> true|false` records.
#[derive(Debug, Clone, Default)]
pub struct LookupTable {
    entries: HashMap<String, HashMap<Vec<String>, bool>>,
}

impl LookupTable {
    pub fn parse(text: &str) -> Result<LookupTable, FeasibilityError> {
        let mut t = LookupTable::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: &str| FeasibilityError::Lookup {
                line: i + 1,
                message: message.to_string(),
            };
            let (lhs, rhs) = line.split_once("->").ok_or_else(|| err("missing `->`"))?;
            let value = match rhs.trim() {
                "true" => true,
                "false" => false,
                _ => return Err(err("expected `true` or `false` after `->`")),
            };
            let mut words = lhs.split_whitespace();
            let name = words.next().ok_or_else(|| err("missing predicate name"))?;
            let args: Vec<String> = words.map(|w| w.to_string()).collect();
            t.entries.entry(name.to_string()).or_default().insert(args, value);
        }
        Ok(t)
    }

    pub fn names(&self) -> Vec<String> {
        let mut v: Vec<String> = self.entries.keys().cloned().collect();
        v.sort();
        v
    }

    pub fn get(&self, name: &str, args: &[String]) -> Option<bool> {
        self.entries.get(name)?.get(args).copied()
    }

    /// Every recorded key as a query, sorted.
    pub fn queries(&self) -> Vec<FeasibilityQuery> {
        let mut v: Vec<FeasibilityQuery> = self
            .entries
            .iter()
            .flat_map(|(n, m)| {
                m.keys().map(move |args| FeasibilityQuery {
                    name: n.clone(),
                    args: args.clone(),
                })
            })
            .collect();
        v.sort();
        v
    }

    pub fn len(&self) -> usize {
        self.entries.values().map(|m| m.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone)]
pub struct ObstacleGrid {
    rows: usize,
    cols: usize,
    blocked: Vec<bool>,
}

impl ObstacleGrid {
    pub fn new(rows: usize, cols: usize, blocked: &[(usize, usize)]) -> Self {
        let mut b = vec![false; rows * cols];
        for &(r, c) in blocked {
            if r < rows && c < cols {
                b[r * cols + c] = true;
            }
        }
        ObstacleGrid { rows, cols, blocked: b }
    }

    pub fn from_spec(spec: &GridSpec) -> Self {
        let cells: Vec<(usize, usize)> = spec.blocked.iter().filter_map(|c| parse_cell(c)).collect();
        Self::new(spec.rows, spec.cols, &cells)
    }

    fn free(&self, (r, c): (usize, usize)) -> bool {
        r < self.rows && c < self.cols && !self.blocked[r * self.cols + c]
    }

    /// 4-connected breadth-first reachability between free cells.
    pub fn path_exists(&self, from: (usize, usize), to: (usize, usize)) -> bool {
        if !self.free(from) || !self.free(to) {
            return false;
        }
        let mut seen = vec![false; self.rows * self.cols];
        let mut queue = VecDeque::from([from]);
        seen[from.0 * self.cols + from.1] = true;
        while let Some((r, c)) = queue.pop_front() {
            if (r, c) == to {
                return true;
            }
            let mut next = vec![(r + 1, c), (r, c + 1)];
            if r > 0 {
                next.push((r - 1, c));
            }
            if c > 0 {
                next.push((r, c - 1));
            }
            for n in next {
                if self.free(n) && !seen[n.0 * self.cols + n.1] {
                    seen[n.0 * self.cols + n.1] = true;
                    queue.push_back(n);
                }
            }
        }
        false
    }
}
