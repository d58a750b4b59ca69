use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn hcp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hcp"))
        .args(args)
        .env_remove("HCP_SOLVER")
        .output()
        .expect("hcp runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn gen(dir: &Path, name: &str, family: &[&str]) -> PathBuf {
    let path = dir.join(name);
    let mut args = vec!["gen"];
    args.extend_from_slice(family);
    args.extend_from_slice(&["--out", p(&path)]);
    let out = hcp(&args);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    path
}

#[test]
fn gen_plan_verify_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let domain = gen(dir.path(), "bts5.hcp", &["bts", "--m", "5"]);
    let plan = dir.path().join("plan.json");
    let stats = dir.path().join("stats.json");
    let out = hcp(&[
        "plan",
        "--domain",
        p(&domain),
        "--format",
        "json",
        "--out",
        p(&plan),
        "--stats",
        p(&stats),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stderr(&out).contains("tree 9 dag 9 depth 5"));

    let doc: Value = serde_json::from_str(&fs::read_to_string(&stats).unwrap()).unwrap();
    for key in [
        "tree_size",
        "dag_size",
        "max_depth",
        "sensing_nodes",
        "leaves",
        "time_seconds",
        "cache_hits",
        "efficiency",
    ] {
        assert!(doc.get(key).is_some(), "missing {key}");
    }
    assert_eq!(doc["leaves"], 5);

    let out = hcp(&["verify", "--domain", p(&domain), "--plan", p(&plan)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok: 5 branches"));
}

#[test]
fn tampered_plan_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let domain = gen(dir.path(), "bts2.hcp", &["bts", "--m", "2"]);
    let plan = dir.path().join("plan.json");
    assert_eq!(
        code(&hcp(&[
            "plan",
            "--domain",
            p(&domain),
            "--format",
            "json",
            "--out",
            p(&plan)
        ])),
        0
    );
    let text = fs::read_to_string(&plan).unwrap();
    // Dunk the wrong package on each branch.
    let swapped = text
        .replace("dunk(p1)", "dunk(tmp)")
        .replace("dunk(p2)", "dunk(p1)")
        .replace("dunk(tmp)", "dunk(p2)");
    assert_ne!(swapped, text);
    fs::write(&plan, swapped).unwrap();
    let out = hcp(&["verify", "--domain", p(&domain), "--plan", p(&plan)]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stdout).contains("dunk"));
}

#[test]
fn plan_json_with_unknown_action_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let domain = gen(dir.path(), "bts2.hcp", &["bts", "--m", "2"]);
    let plan = dir.path().join("plan.json");
    assert_eq!(
        code(&hcp(&[
            "plan",
            "--domain",
            p(&domain),
            "--format",
            "json",
            "--out",
            p(&plan)
        ])),
        0
    );
    let text = fs::read_to_string(&plan).unwrap().replace("dunk(p2)", "dunk(p9)");
    fs::write(&plan, text).unwrap();
    assert_eq!(code(&hcp(&["verify", "--domain", p(&domain), "--plan", p(&plan)])), 2);
}

#[test]
fn dot_goes_to_stdout_by_default() {
    let dir = tempfile::tempdir().unwrap();
    let domain = gen(dir.path(), "bts3.hcp", &["bts", "--m", "3"]);
    let out = hcp(&["plan", "--domain", p(&domain)]);
    assert_eq!(code(&out), 0);
    let dot = String::from_utf8_lossy(&out.stdout);
    assert!(dot.starts_with("digraph"));
    assert_eq!(dot.matches("->").count(), 4);
}

#[test]
fn input_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.hcp");
    assert_eq!(code(&hcp(&["plan", "--domain", p(&missing)])), 2);

    let bad = dir.path().join("bad.hcp");
    fs::write(&bad, "domain d\nfluent f : { a, b } full\naction go\n  eff g := a\n").unwrap();
    let out = hcp(&["plan", "--domain", p(&bad)]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("bad.hcp:4:"), "{}", stderr(&out));

    assert_eq!(code(&hcp(&["plan", "--bogus"])), 2);
    assert_eq!(code(&hcp(&["gen", "bts", "--m", "0"])), 2);
    assert_eq!(code(&hcp(&["gen", "doors", "--n", "4"])), 2);
    let domain = gen(dir.path(), "bts2.hcp", &["bts", "--m", "2"]);
    assert_eq!(code(&hcp(&["plan", "--domain", p(&domain), "--threads", "0"])), 2);
}

#[test]
fn kitchen_needs_its_lookup_table() {
    let dir = tempfile::tempdir().unwrap();
    let lookup = dir.path().join("kitchen.lookup");
    let domain = gen(dir.path(), "kitchen.hcp", &["kitchen-lite", "--lookup-out", p(&lookup)]);
    let out = hcp(&["plan", "--domain", p(&domain)]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("move_feasible"), "{}", stderr(&out));

    let out = hcp(&["plan", "--domain", p(&domain), "--lookup", p(&lookup)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));

    fs::write(&lookup, "move_feasible table\n").unwrap();
    assert_eq!(code(&hcp(&["plan", "--domain", p(&domain), "--lookup", p(&lookup)])), 2);
}

#[test]
fn unreachable_goal_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let domain = dir.path().join("stuck.hcp");
    fs::write(
        &domain,
        "domain stuck\nfluent f : { a, b } full\naction noop\n  pre f = a\n  eff f := a\n\nproblem stuck\ninit f = a\ngoal f = b\n",
    )
    .unwrap();
    let out = hcp(&["plan", "--domain", p(&domain)]);
    assert_eq!(code(&out), 1, "{}", stderr(&out));
}

#[test]
fn separate_problem_file() {
    let dir = tempfile::tempdir().unwrap();
    let domain = dir.path().join("d.hcp");
    let problem = dir.path().join("p.hcp");
    fs::write(
        &domain,
        "domain d\nfluent f : { a, b } full\naction flip\n  eff f := b\n",
    )
    .unwrap();
    fs::write(&problem, "problem p\ninit f = a\ngoal f = b\n").unwrap();
    let out = hcp(&[
        "plan",
        "--domain",
        p(&domain),
        "--problem",
        p(&problem),
        "--format",
        "json",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(String::from_utf8_lossy(&out.stdout).contains("\"flip\""));
}

#[test]
fn emit_without_solver_still_writes_program() {
    let dir = tempfile::tempdir().unwrap();
    let domain = gen(dir.path(), "bts2.hcp", &["bts", "--m", "2"]);
    let lp = dir.path().join("bts2.lp");
    let out = hcp(&[
        "emit",
        "--domain",
        p(&domain),
        "--out",
        p(&lp),
        "--solve",
        "--solver",
        p(&dir.path().join("no-such-solver")),
    ]);
    assert_eq!(code(&out), 0);
    assert!(stderr(&out).contains("skipping solve"));
    assert!(fs::read_to_string(&lp).unwrap().contains("#program step(t)."));
}

#[test]
fn emit_respects_step_limit() {
    let dir = tempfile::tempdir().unwrap();
    let domain = gen(dir.path(), "bts2.hcp", &["bts", "--m", "2"]);
    let out = hcp(&["emit", "--domain", p(&domain), "--step-limit", "7"]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).contains("#const step_limit=7."));
}

#[test]
fn gen_writes_stdout_by_default() {
    let out = hcp(&["gen", "colorball", "--n", "2", "--balls", "1"]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("domain colorball"));
}
