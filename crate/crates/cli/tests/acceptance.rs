//! Acceptance suite: one PASS/FAIL line per criterion. Runs the `hcp`
//! binary where the criterion is about the command line, the library
//! otherwise.

use std::collections::HashSet;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use hcp_core::belief::{apply_actuation, apply_sensing, outcomes};
use hcp_core::benchmarks::{gen_bts, gen_colorball, gen_doors, KITCHEN_LITE, KITCHEN_LITE_LOOKUP};
use hcp_core::lang;
use hcp_core::model::{SensingId, ValueIdx};
use hcp_core::seqplan::{brute_force_plan, find_plan, SearchConfig, TaskConstraint, BRUTE_FORCE_LIMIT};
use hcp_core::verify::verify;
use hcp_core::{
    BeliefError, BeliefState, ConditionalPlan, Engine, EngineConfig, Feasibility, FeasibilityView, GroundModel,
    GroundProblem, Knowledge, LookupTable, PlanError, PlanNode,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde_json::Value;

/// Per-instance wallclock bound for the BTS ladder.
const BTS_WALL_LIMIT: Duration = Duration::from_secs(10);
/// Total bound for the verifier oracle suite.
const ORACLE_WALL_LIMIT: Duration = Duration::from_secs(60);
const INVARIANCE_RUNS: usize = 20;
const BELIEF_CASES: usize = 1000;
/// Forced-outcome subproblems compared per instance in the optimality check.
const SUBPROBLEMS_PER_INSTANCE: usize = 30;

type Check = fn(&Path) -> Result<String, String>;

fn main() {
    let criteria: [(u32, &str, Check); 9] = [
        (1, "bts reproduction", bts_reproduction),
        (2, "verifier oracle suite", verifier_oracle),
        (3, "sequential planner optimality", planner_optimality),
        (4, "parallelism invariance", parallelism_invariance),
        (5, "equivalence-class effect", equivalence_effect),
        (6, "hybridity", hybridity),
        (7, "feasibility cache", feasibility_cache),
        (8, "asp emission goldens", asp_goldens),
        (9, "belief brute-force equivalence", belief_equivalence),
    ];
    let mut failed = 0;
    for (id, name, check) in criteria {
        let dir = tempfile::tempdir().expect("temp dir");
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(|| check(dir.path())))
            .unwrap_or_else(|p| Err(p.downcast_ref::<String>().cloned().unwrap_or_else(|| "panicked".into())));
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {id} {name}: PASS ({detail}; {secs:.2}s)"),
            Err(detail) => {
                failed += 1;
                println!("criterion {id} {name}: FAIL ({detail}; {secs:.2}s)");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

struct Run {
    code: i32,
    stderr: String,
    wall: Duration,
}

fn hcp(args: &[&str]) -> Run {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_hcp"))
        .args(args)
        .output()
        .expect("hcp runs");
    Run {
        code: out.status.code().unwrap_or(-1),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
        wall: start.elapsed(),
    }
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).expect("write input");
    p
}

fn s(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

/// Plans `domain` with extra flags; returns the stats document and the
/// JSON plan path.
fn plan(dir: &Path, domain: &Path, tag: &str, extra: &[&str]) -> Result<(Value, PathBuf, Duration), String> {
    let out = dir.join(format!("{tag}.json"));
    let stats = dir.join(format!("{tag}.stats.json"));
    let mut args = vec![
        "plan",
        "--domain",
        s(domain),
        "--format",
        "json",
        "--out",
        s(&out),
        "--stats",
        s(&stats),
    ];
    args.extend_from_slice(extra);
    let r = hcp(&args);
    ensure(r.code == 0, || {
        format!("{tag}: plan exited {} ({})", r.code, r.stderr.trim())
    })?;
    let doc: Value =
        serde_json::from_str(&fs::read_to_string(&stats).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    Ok((doc, out, r.wall))
}

fn cli_verify(domain: &Path, plan: &Path, extra: &[&str]) -> Result<(), String> {
    let mut args = vec!["verify", "--domain", s(domain), "--plan", s(plan)];
    args.extend_from_slice(extra);
    let r = hcp(&args);
    ensure(r.code == 0, || {
        format!("verify exited {} ({})", r.code, r.stderr.trim())
    })
}

fn stat(doc: &Value, key: &str) -> u64 {
    doc[key].as_u64().unwrap_or(u64::MAX)
}

struct Instance {
    model: GroundModel,
    problem: GroundProblem,
    feas: Feasibility,
}

fn load(text: &str) -> Instance {
    let unit = lang::parse(text);
    assert!(!unit.has_errors(), "{:?}", unit.diagnostics);
    let mut feas = Feasibility::new();
    if let Some(g) = &unit.domain.grid {
        feas.register_grid(g).unwrap();
    }
    if unit
        .domain
        .feasibility_predicates()
        .iter()
        .any(|p| !feas.is_registered(p))
    {
        feas.register_table(&LookupTable::parse(KITCHEN_LITE_LOOKUP).unwrap())
            .unwrap();
    }
    let model = GroundModel::ground(&unit.domain).unwrap();
    let problem = model.ground_problem(&unit.problem).unwrap();
    Instance { model, problem, feas }
}

fn matrix() -> Vec<(String, String)> {
    let mut m: Vec<(String, String)> = (1..=12).map(|k| (format!("bts-{k}"), gen_bts(k).unwrap())).collect();
    m.push(("colorball-2-1".into(), gen_colorball(2, 1).unwrap()));
    m.push(("colorball-3-1".into(), gen_colorball(3, 1).unwrap()));
    m.push(("doors-3".into(), gen_doors(3).unwrap()));
    m.push(("doors-5".into(), gen_doors(5).unwrap()));
    m.push(("kitchen-lite".into(), KITCHEN_LITE.to_string()));
    m
}

fn bts_reproduction(dir: &Path) -> Result<String, String> {
    let mut slowest = Duration::ZERO;
    for m in 10..=17u64 {
        let domain = write(dir, &format!("bts{m}.hcp"), &gen_bts(m as usize).unwrap());
        let (doc, out, wall) = plan(dir, &domain, &format!("bts{m}"), &["--threads", "1"])?;
        let (tree, depth) = (stat(&doc, "tree_size"), stat(&doc, "max_depth"));
        ensure(tree == 2 * m - 1 && depth == m, || {
            format!("m={m}: tree {tree} depth {depth}, expected {} / {m}", 2 * m - 1)
        })?;
        ensure(wall <= BTS_WALL_LIMIT, || format!("m={m} took {wall:?}"))?;
        cli_verify(&domain, &out, &[])?;
        slowest = slowest.max(wall);
    }
    Ok(format!(
        "m=10..17 give tree 2m-1 and depth m, all verified, slowest {:.3}s <= {}s",
        slowest.as_secs_f64(),
        BTS_WALL_LIMIT.as_secs()
    ))
}

fn verifier_oracle(_: &Path) -> Result<String, String> {
    let start = Instant::now();
    let (mut plans, mut flagged, mut inapplicable) = (0, 0, 0);
    for (name, text) in matrix() {
        let inst = load(&text);
        let view = FeasibilityView::new(&inst.feas, &inst.model);
        let (p, _) = Engine::new(&inst.model, &inst.problem.goal, &view, EngineConfig::default())
            .run(&inst.problem.initial)
            .map_err(|e| format!("{name}: {e}"))?;
        let check = |q: &ConditionalPlan| verify(&inst.model, &inst.problem.goal, &inst.problem.initial, q, &view);
        let r = check(&p);
        ensure(r.ok, || {
            format!("{name}: engine output rejected: {:?}", r.violations.first())
        })?;
        plans += 1;
        for (kind, mutant) in [
            ("drop", p.mutate_drop_edge()),
            ("swap", p.mutate_swap_outcomes()),
            ("truncate", p.mutate_truncate()),
        ] {
            match mutant {
                None => inapplicable += 1,
                Some(q) => {
                    ensure(!check(&q).ok, || format!("{name}: {kind} mutation not flagged"))?;
                    flagged += 1;
                }
            }
        }
    }
    let wall = start.elapsed();
    ensure(wall <= ORACLE_WALL_LIMIT, || format!("took {wall:?}"))?;
    Ok(format!(
        "{plans} plans verified, {flagged} mutations flagged, {inapplicable} not applicable (no sensing node), {:.2}s <= {}s",
        wall.as_secs_f64(),
        ORACLE_WALL_LIMIT.as_secs()
    ))
}

/// The root problem and up to `cap - 1` forced-outcome subproblems taken
/// from the sensing edges of the engine's plan.
fn subproblems(inst: &Instance, cap: usize) -> Vec<(BeliefState, TaskConstraint)> {
    let view = FeasibilityView::new(&inst.feas, &inst.model);
    let (p, _) = Engine::new(&inst.model, &inst.problem.goal, &view, EngineConfig::default())
        .run(&inst.problem.initial)
        .expect("solvable");
    let mut out = vec![(inst.problem.initial.clone(), TaskConstraint::none())];
    let mut seen = HashSet::new();
    let mut stack: Vec<_> = p
        .root()
        .map(|r| (r, inst.problem.initial.clone()))
        .into_iter()
        .collect();
    while let Some((id, b)) = stack.pop() {
        match p.node(id) {
            PlanNode::Act { actions, child } => {
                if let Some(c) = child {
                    stack.push((*c, apply_actuation(&inst.model, &b, actions).unwrap()));
                }
            }
            PlanNode::Sense { sensing, edges } => {
                for &(o, c) in edges.iter().rev() {
                    if seen.insert((b.clone(), *sensing, o)) {
                        out.push((b.clone(), TaskConstraint::sense(*sensing, o)));
                    }
                    stack.push((c, apply_sensing(&inst.model, &b, *sensing, o).unwrap()));
                }
            }
        }
    }
    out.truncate(cap);
    out
}

fn planner_optimality(_: &Path) -> Result<String, String> {
    let (mut compared, mut skipped) = (0, 0);
    for (name, text) in matrix() {
        let inst = load(&text);
        let view = FeasibilityView::new(&inst.feas, &inst.model);
        for (start, constraint) in subproblems(&inst, SUBPROBLEMS_PER_INSTANCE) {
            for minimize_sensing in [true, false] {
                let config = SearchConfig {
                    max_steps: 40,
                    minimize_sensing,
                };
                let goal = &inst.problem.goal;
                let fast = find_plan(&inst.model, goal, &start, constraint, config, &view);
                let slow = brute_force_plan(&inst.model, goal, &start, constraint, config, &view, BRUTE_FORCE_LIMIT);
                match (fast, slow) {
                    (_, Err(PlanError::LimitExceeded { .. })) => skipped += 1,
                    (Ok(f), Ok(b)) => {
                        ensure(f.makespan() == b.makespan(), || {
                            format!("{name}: makespan {} vs brute force {}", f.makespan(), b.makespan())
                        })?;
                        ensure(!minimize_sensing || f.senses() == b.senses(), || {
                            format!("{name}: sensing {} vs brute force {}", f.senses(), b.senses())
                        })?;
                        compared += 1;
                    }
                    (f, b) => return Err(format!("{name}: {f:?} vs brute force {b:?}")),
                }
            }
        }
    }
    ensure(compared > 0, || "nothing compared".into())?;
    Ok(format!(
        "{compared} searches agree with brute force, 0 discrepancies, {skipped} over the {BRUTE_FORCE_LIMIT}-pair limit"
    ))
}

fn parallelism_invariance(dir: &Path) -> Result<String, String> {
    const FIELDS: [&str; 6] = [
        "tree_size",
        "dag_size",
        "max_depth",
        "sensing_nodes",
        "leaves",
        "cache_hits",
    ];
    for (tag, text) in [
        ("bts10", gen_bts(10).unwrap()),
        ("colorball31", gen_colorball(3, 1).unwrap()),
    ] {
        let domain = write(dir, &format!("{tag}.hcp"), &text);
        let (base, base_plan, _) = plan(dir, &domain, &format!("{tag}-t1"), &["--threads", "1"])?;
        let base_text = fs::read_to_string(&base_plan).map_err(|e| e.to_string())?;
        for run in 0..INVARIANCE_RUNS {
            let (doc, out, _) = plan(
                dir,
                &domain,
                &format!("{tag}-t8"),
                &["--threads", "8", "--deterministic", "on"],
            )?;
            for f in FIELDS {
                ensure(doc[f] == base[f], || {
                    format!("{tag} run {run}: {f} {} vs {}", doc[f], base[f])
                })?;
            }
            let text = fs::read_to_string(&out).map_err(|e| e.to_string())?;
            ensure(text == base_text, || format!("{tag} run {run}: plan differs"))?;
        }
    }
    Ok(format!(
        "bts-10 and colorball-3-1: {INVARIANCE_RUNS} runs at 8 threads match 1 thread field-for-field and byte-for-byte"
    ))
}

fn equivalence_effect(dir: &Path) -> Result<String, String> {
    let mut notes = Vec::new();
    for (tag, text, strict) in [
        ("colorball31", gen_colorball(3, 1).unwrap(), false),
        ("colorball32", gen_colorball(3, 2).unwrap(), true),
    ] {
        let domain = write(dir, &format!("{tag}.hcp"), &text);
        let (on, on_plan, _) = plan(dir, &domain, &format!("{tag}-on"), &["--equiv-classes", "on"])?;
        let (off, off_plan, _) = plan(dir, &domain, &format!("{tag}-off"), &["--equiv-classes", "off"])?;
        cli_verify(&domain, &on_plan, &[])?;
        cli_verify(&domain, &off_plan, &[])?;
        let (a, b) = (stat(&on, "dag_size"), stat(&off, "dag_size"));
        let holds = if strict { a < b } else { a <= b };
        ensure(holds, || format!("{tag}: dag {a} with classes vs {b} without"))?;
        notes.push(format!("{tag} dag {a} vs {b}"));
    }
    Ok(format!("{}; all four plans verified", notes.join(", ")))
}

fn hybridity(dir: &Path) -> Result<String, String> {
    let domain = write(dir, "kitchen.hcp", KITCHEN_LITE);
    let blocked_edge = "move_feasible table cabinet_a";
    let one_edge = KITCHEN_LITE_LOOKUP.replace(&format!("{blocked_edge} -> true"), &format!("{blocked_edge} -> false"));
    ensure(one_edge != KITCHEN_LITE_LOOKUP, || "lookup edit did not apply".into())?;
    let lookup = write(dir, "one-edge.lookup", &one_edge);
    let (_, out, _) = plan(dir, &domain, "one-edge", &["--lookup", s(&lookup)])?;
    let text = fs::read_to_string(&out).map_err(|e| e.to_string())?;
    ensure(!text.contains("goto(table,cabinet_a)"), || {
        "plan uses the blocked edge".into()
    })?;
    cli_verify(&domain, &out, &["--lookup", s(&lookup)])?;

    // The baseline plan does use that edge, so the contrast is real.
    let full = write(dir, "full.lookup", KITCHEN_LITE_LOOKUP);
    let (_, base, _) = plan(dir, &domain, "full", &["--lookup", s(&full)])?;
    let base_text = fs::read_to_string(&base).map_err(|e| e.to_string())?;
    ensure(base_text.contains("goto(table,cabinet_a)"), || {
        "baseline does not use the edge".into()
    })?;

    let mut sealed = KITCHEN_LITE_LOOKUP.to_string();
    for from in ["table", "cabinet_b", "faucet"] {
        let key = format!("move_feasible {from} cabinet_a");
        sealed = sealed.replace(&format!("{key} -> true"), &format!("{key} -> false"));
    }
    let sealed = write(dir, "sealed.lookup", &sealed);
    let r = hcp(&[
        "plan",
        "--domain",
        s(&domain),
        "--lookup",
        s(&sealed),
        "--out",
        s(&dir.join("sealed.dot")),
    ]);
    ensure(r.code == 1, || {
        format!("sealed cabinet: exit {} ({})", r.code, r.stderr.trim())
    })?;
    Ok("blocked edge avoided and plan verified; sealing cabinet_a exits 1".into())
}

fn feasibility_cache(dir: &Path) -> Result<String, String> {
    let domain = write(dir, "kitchen.hcp", KITCHEN_LITE);
    let lookup = write(dir, "kitchen.lookup", KITCHEN_LITE_LOOKUP);
    let (doc, _, _) = plan(dir, &domain, "pre", &["--lookup", s(&lookup), "--precompute"])?;
    let after_precompute = stat(&doc, "feasibility_evaluations");
    ensure(after_precompute == 0, || {
        format!("{after_precompute} evaluations after precompute")
    })?;

    // Without precompute: count raw evaluator calls per query.
    let inst = load(KITCHEN_LITE);
    let table = LookupTable::parse(KITCHEN_LITE_LOOKUP).unwrap();
    let calls = Arc::new(std::sync::Mutex::new(Vec::<(String, Vec<String>)>::new()));
    let total = Arc::new(AtomicUsize::new(0));
    let mut feas = Feasibility::new();
    for name in table.names() {
        let (t, n, log, count) = (table.clone(), name.clone(), calls.clone(), total.clone());
        feas.register(&name, move |args| {
            count.fetch_add(1, Ordering::SeqCst);
            log.lock().unwrap().push((n.clone(), args.to_vec()));
            t.get(&n, args).unwrap_or(false)
        })
        .unwrap();
    }
    let view = FeasibilityView::new(&feas, &inst.model);
    Engine::new(
        &inst.model,
        &inst.problem.goal,
        &view,
        EngineConfig {
            threads: 4,
            ..EngineConfig::default()
        },
    )
    .build(&inst.problem.initial)
    .map_err(|e| e.to_string())?;
    let log = calls.lock().unwrap();
    let distinct: HashSet<_> = log.iter().cloned().collect();
    ensure(distinct.len() == log.len(), || {
        format!("{} calls for {} queries", log.len(), distinct.len())
    })?;
    ensure(feas.counters().evaluations as usize == distinct.len(), || {
        "counter mismatch".into()
    })?;
    Ok(format!(
        "0 evaluations after precompute; {} distinct queries evaluated once each without it",
        distinct.len()
    ))
}

fn asp_goldens(dir: &Path) -> Result<String, String> {
    let bts = write(dir, "bts2.hcp", &gen_bts(2).unwrap());
    let kitchen = write(dir, "kitchen.hcp", KITCHEN_LITE);
    let mut texts = Vec::new();
    for (src, golden) in [
        (&bts, include_str!("../../core/tests/golden/bts2.lp")),
        (&kitchen, include_str!("../../core/tests/golden/kitchen-lite.lp")),
    ] {
        let out = dir.join("out.lp");
        let r = hcp(&["emit", "--domain", s(src), "--out", s(&out)]);
        ensure(r.code == 0, || format!("emit exited {}", r.code))?;
        let text = fs::read_to_string(&out).map_err(|e| e.to_string())?;
        ensure(text == golden, || format!("{} differs from golden", src.display()))?;
        texts.push(text);
    }
    let k = &texts[1];
    let families = [
        ("exogenous sensing choice", "{sense(checkFoodType,time_min)}."),
        (
            "known-value guard",
            ":- sense(checkFoodType,t+time_min), 1{requested(Val,t+time_min):dom_requested(Val)}.",
        ),
        (
            "outcome choice",
            "1{requested(Val,t+time_min):dom_requested(Val)}1 :- sense(checkFoodType,t+time_min-1).",
        ),
        ("uniqueness", ":- 2{requested(Val,t+time_min):dom_requested(Val)}."),
        ("existence", ":- {robot(Val,t+time_min):dom_robot(Val)}0."),
        ("default-compiled negatives", "-at(bowl_1,table,time_min)."),
    ];
    for (family, needle) in families {
        ensure(k.contains(needle), || format!("missing {family}: {needle}"))?;
    }
    Ok(format!(
        "both goldens byte-identical; {} rule families present",
        families.len()
    ))
}

/// Literals as (fluent, value), lower bound, optional upper bound.
type Card = (Vec<(usize, usize)>, u32, Option<u32>);

/// Random partial-fluent domain with at most three fluents and two
/// cardinality constraints, plus a random raw belief.
struct BeliefCase {
    sizes: Vec<usize>,
    cards: Vec<Card>,
    raw: Vec<Knowledge>,
}

impl BeliefCase {
    fn random(rng: &mut StdRng) -> Self {
        let sizes: Vec<usize> = (0..rng.gen_range(1..=3)).map(|_| rng.gen_range(2..=4)).collect();
        let pairs: Vec<(usize, usize)> = sizes
            .iter()
            .enumerate()
            .flat_map(|(f, &d)| (0..d).map(move |v| (f, v)))
            .collect();
        let cards = (0..rng.gen_range(0..=2))
            .map(|_| {
                let n = rng.gen_range(1..=pairs.len().min(4));
                let lits: Vec<(usize, usize)> = rand::seq::index::sample(rng, pairs.len(), n)
                    .into_iter()
                    .map(|k| pairs[k])
                    .collect();
                let lower = rng.gen_range(0..=n as u32);
                let upper = rng.gen_bool(0.7).then(|| rng.gen_range(lower..=4));
                (lits, lower, upper)
            })
            .collect();
        let raw = sizes
            .iter()
            .map(|&d| {
                if rng.gen_bool(0.25) {
                    Knowledge::Known(ValueIdx(rng.gen_range(0..d) as u8))
                } else {
                    // Two draws ANDed: each value excluded with probability 1/4.
                    let mask = (1u64 << d) - 1;
                    Knowledge::Unknown {
                        excluded: rng.gen::<u64>() & rng.gen::<u64>() & mask,
                    }
                }
            })
            .collect();
        BeliefCase { sizes, cards, raw }
    }

    fn text(&self) -> String {
        let mut t = String::from("domain random\n");
        for (f, &d) in self.sizes.iter().enumerate() {
            let vals: Vec<String> = (0..d).map(|v| format!("v{v}")).collect();
            t += &format!("fluent f{f} : {{ {} }} partial\nsense s{f} -> f{f}\n", vals.join(", "));
        }
        for (lits, lower, upper) in &self.cards {
            let body: Vec<String> = lits.iter().map(|(f, v)| format!("f{f}=v{v}")).collect();
            let head = match upper {
                Some(u) => format!("between {lower} {u}"),
                None => format!("atleast {lower}"),
            };
            t += &format!("constraint {head} {{ {} }}\n", body.join(" ; "));
        }
        t
    }

    fn worlds(&self) -> Vec<Vec<usize>> {
        let mut all: Vec<Vec<usize>> = vec![vec![]];
        for (f, &d) in self.sizes.iter().enumerate() {
            let allowed: Vec<usize> = (0..d)
                .filter(|&v| match self.raw[f] {
                    Knowledge::Known(x) => x.index() == v,
                    Knowledge::Unknown { excluded } => excluded & (1 << v) == 0,
                })
                .collect();
            all = all
                .into_iter()
                .flat_map(|w| {
                    allowed.iter().map(move |&v| {
                        let mut w = w.clone();
                        w.push(v);
                        w
                    })
                })
                .collect();
        }
        all.retain(|w| {
            self.cards.iter().all(|(lits, lower, upper)| {
                let n = lits.iter().filter(|&&(f, v)| w[f] == v).count() as u32;
                n >= *lower && upper.is_none_or(|u| n <= u)
            })
        });
        all
    }

    fn tightest(&self, worlds: &[Vec<usize>]) -> Vec<Knowledge> {
        (0..self.sizes.len())
            .map(|f| {
                let seen: u64 = worlds.iter().fold(0, |m, w| m | 1 << w[f]);
                if seen.count_ones() == 1 {
                    Knowledge::Known(ValueIdx(seen.trailing_zeros() as u8))
                } else {
                    Knowledge::Unknown {
                        excluded: ((1u64 << self.sizes[f]) - 1) & !seen,
                    }
                }
            })
            .collect()
    }
}

fn belief_equivalence(_: &Path) -> Result<String, String> {
    let mut rng = StdRng::seed_from_u64(0x5eed_b11e);
    let (mut inconsistent, mut sensed) = (0, 0);
    for case_no in 0..BELIEF_CASES {
        let case = BeliefCase::random(&mut rng);
        let unit = lang::parse(&case.text());
        let model = GroundModel::ground(&unit.domain).map_err(|e| e.to_string())?;
        let worlds = case.worlds();
        let got = BeliefState::build(&model, case.raw.clone());
        if worlds.is_empty() {
            ensure(got == Err(BeliefError::Inconsistent), || {
                format!("case {case_no}: expected inconsistency")
            })?;
            inconsistent += 1;
            continue;
        }
        let b = got.map_err(|e| format!("case {case_no}: {e}"))?;
        ensure(b.slots() == &case.tightest(&worlds)[..], || {
            format!("case {case_no}: closure differs\n{}", case.text())
        })?;
        for f in 0..case.sizes.len() {
            let sid = SensingId(f as u32);
            let seen: u64 = worlds.iter().fold(0, |m, w| m | 1 << w[f]);
            let want: Vec<ValueIdx> = if seen.count_ones() == 1 {
                Vec::new()
            } else {
                (0..case.sizes[f])
                    .filter(|v| seen & (1 << v) != 0)
                    .map(|v| ValueIdx(v as u8))
                    .collect()
            };
            ensure(outcomes(&model, &b, sid) == want, || {
                format!("case {case_no}: outcomes of f{f} differ")
            })?;
            for o in want {
                let after = apply_sensing(&model, &b, sid, o).map_err(|e| e.to_string())?;
                let narrowed: Vec<Vec<usize>> = worlds.iter().filter(|w| w[f] == o.index()).cloned().collect();
                ensure(after.slots() == &case.tightest(&narrowed)[..], || {
                    format!("case {case_no}: sensing f{f}={} differs", o.0)
                })?;
                sensed += 1;
            }
        }
    }
    Ok(format!(
        "{BELIEF_CASES} random instances agree ({inconsistent} inconsistent, {sensed} sensing updates checked)"
    ))
}
