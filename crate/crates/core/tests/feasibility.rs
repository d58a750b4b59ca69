mod common;

use std::collections::HashSet;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use hcp_core::benchmarks::{KITCHEN_LITE, KITCHEN_LITE_LOOKUP};
use hcp_core::feasibility::ObstacleGrid;
use hcp_core::{EngineConfig, Feasibility, FeasibilityError, FeasibilityQuery, LookupTable};
use proptest::prelude::*;

/// Connectivity by union-find over free 4-neighbours.
fn connected(
    rows: usize,
    cols: usize,
    blocked: &HashSet<(usize, usize)>,
    a: (usize, usize),
    b: (usize, usize),
) -> bool {
    if blocked.contains(&a) || blocked.contains(&b) {
        return false;
    }
    let mut parent: Vec<usize> = (0..rows * cols).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        if p[x] != x {
            let r = find(p, p[x]);
            p[x] = r;
        }
        p[x]
    }
    for r in 0..rows {
        for c in 0..cols {
            if blocked.contains(&(r, c)) {
                continue;
            }
            for (r2, c2) in [(r + 1, c), (r, c + 1)] {
                if r2 < rows && c2 < cols && !blocked.contains(&(r2, c2)) {
                    let (x, y) = (find(&mut parent, r * cols + c), find(&mut parent, r2 * cols + c2));
                    parent[x] = y;
                }
            }
        }
    }
    find(&mut parent, a.0 * cols + a.1) == find(&mut parent, b.0 * cols + b.1)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 300, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn grid_paths_match_union_find(
        rows in 1usize..7,
        cols in 1usize..7,
        cells in prop::collection::vec((0usize..7, 0usize..7), 0..20),
        a in (0usize..7, 0usize..7),
        b in (0usize..7, 0usize..7),
    ) {
        let blocked: HashSet<(usize, usize)> = cells.into_iter().filter(|&(r, c)| r < rows && c < cols).collect();
        let (a, b) = ((a.0 % rows, a.1 % cols), (b.0 % rows, b.1 % cols));
        let list: Vec<(usize, usize)> = blocked.iter().copied().collect();
        let grid = ObstacleGrid::new(rows, cols, &list);
        prop_assert_eq!(grid.path_exists(a, b), connected(rows, cols, &blocked, a, b));
    }
}

#[test]
fn concurrent_checks_evaluate_each_query_once() {
    let calls = Arc::new(AtomicUsize::new(0));
    let mut feas = Feasibility::new();
    let seen = calls.clone();
    feas.register("slow", move |args| {
        seen.fetch_add(1, Ordering::SeqCst);
        std::thread::sleep(std::time::Duration::from_millis(2));
        args[0] != "x3"
    })
    .unwrap();
    let queries: Vec<FeasibilityQuery> = (0..8)
        .map(|k| FeasibilityQuery::new("slow", &[&format!("x{k}")]))
        .collect();
    std::thread::scope(|s| {
        for _ in 0..4 {
            s.spawn(|| {
                for q in &queries {
                    let expect = q.args[0] != "x3";
                    assert_eq!(feas.check(q).unwrap(), expect);
                }
            });
        }
    });
    assert_eq!(calls.load(Ordering::SeqCst), 8);
    let c = feas.counters();
    assert_eq!(c.evaluations, 8);
    assert_eq!(c.misses, 8);
    assert_eq!(c.hits, 4 * 8 - 8);
    assert_eq!(feas.cached_len(), 8);
}

#[test]
fn duplicate_and_unknown_predicates_are_errors() {
    let mut feas = Feasibility::new();
    feas.register_always_true().unwrap();
    assert!(matches!(
        feas.register_always_true(),
        Err(FeasibilityError::Duplicate(_))
    ));
    let q = FeasibilityQuery::new("nope", &[]);
    assert!(matches!(feas.check(&q), Err(FeasibilityError::UnknownPredicate(_))));
}

#[test]
fn lookup_table_reports_bad_lines() {
    let err = LookupTable::parse("# header\nmove a b -> true\nmove a c -> perhaps\n").unwrap_err();
    assert!(matches!(err, FeasibilityError::Lookup { line: 3, .. }), "{err}");
    let t = LookupTable::parse(KITCHEN_LITE_LOOKUP).unwrap();
    assert_eq!(t.len(), 12 + 32 + 8);
    assert_eq!(t.get("move_feasible", &["table".into(), "faucet".into()]), Some(true));
    assert_eq!(t.get("move_feasible", &["table".into(), "table".into()]), None);
}

#[test]
fn precompute_leaves_nothing_to_evaluate_during_planning() {
    let inst = common::load(KITCHEN_LITE);
    inst.feas.precompute(&inst.model.queries).unwrap();
    assert_eq!(inst.feas.counters().evaluations as usize, inst.model.queries.len());
    inst.feas.reset_counters();
    let (plan, _) = inst.run(EngineConfig::default());
    assert!(plan.stats().tree_size > 0);
    assert_eq!(inst.feas.counters().evaluations, 0);
}

#[test]
fn without_precompute_each_distinct_query_evaluates_once() {
    let inst = common::load(KITCHEN_LITE);
    let calls = Arc::new(AtomicUsize::new(0));
    // Wrap the table so every evaluator call is counted.
    let table = LookupTable::parse(KITCHEN_LITE_LOOKUP).unwrap();
    let mut feas = Feasibility::new();
    for name in table.names() {
        let (t, n, seen) = (table.clone(), name.clone(), calls.clone());
        feas.register(&name, move |args| {
            seen.fetch_add(1, Ordering::SeqCst);
            t.get(&n, args).unwrap_or(false)
        })
        .unwrap();
    }
    let view = hcp_core::FeasibilityView::new(&feas, &inst.model);
    for threads in [1, 4] {
        let config = EngineConfig {
            threads,
            ..EngineConfig::default()
        };
        hcp_core::Engine::new(&inst.model, &inst.problem.goal, &view, config)
            .build(&inst.problem.initial)
            .unwrap();
    }
    let c = feas.counters();
    assert!(c.evaluations > 0);
    assert_eq!(c.evaluations as usize, feas.cached_len());
    assert_eq!(calls.load(Ordering::SeqCst), feas.cached_len());
    assert!(feas.cached_len() <= inst.model.queries.len());
}
