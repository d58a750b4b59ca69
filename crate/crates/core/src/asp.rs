//! Emission of the three-part incremental ASP encoding (`base`, `step(t)`,
//! `check(t)`) and an optional bridge to an external solver.
//!
//! A fluent `f(x̄)` with value `v` at time `T` is the atom `f(x̄,v,T)`;
//! an excluded value is its classical negation `-f(x̄,v,T)`.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};

use crate::ast::{Atom, CondSpec, ConstraintSpec, DomainSpec, EffSpec, FluentDecl, Param, ProblemSpec, Term};
use crate::error::AspError;

/// Environment variable naming the solver binary.
pub const SOLVER_ENV: &str = "HCP_SOLVER";

const NOW: &str = "t+time_min";
const PREV: &str = "t+time_min-1";
const INIT: &str = "time_min";
const VAL: &str = "Val";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedProgram {
    pub base: String,
    pub step: String,
    pub check: String,
    pub combined: String,
}

fn join_terms(args: &[Term]) -> String {
    args.iter().map(|t| t.name()).collect::<Vec<_>>().join(",")
}

/// `name(args,extra...)`, or `name` when there is nothing inside.
fn compound(name: &str, parts: &[&str]) -> String {
    let parts: Vec<&str> = parts.iter().copied().filter(|p| !p.is_empty()).collect();
    if parts.is_empty() {
        name.to_string()
    } else {
        format!("{name}({})", parts.join(","))
    }
}

fn fluent_atom(atom: &Atom, value: &str, time: &str) -> String {
    compound(&atom.name, &[&join_terms(&atom.args), value, time])
}

fn dom(fluent: &str) -> String {
    format!("dom_{fluent}")
}

fn param_vars(params: &[Param]) -> String {
    params.iter().map(|p| p.name.as_str()).collect::<Vec<_>>().join(",")
}

fn occurrence(name: &str, params: &[Param], time: &str) -> String {
    compound(name, &[&param_vars(params), time])
}

fn sense_occurrence(name: &str, params: &[Param], time: &str) -> String {
    format!("sense({},{time})", compound(name, &[&param_vars(params)]))
}

fn sort_guards(params: &[Param]) -> Vec<String> {
    params.iter().map(|p| format!("{}({})", p.sort, p.name)).collect()
}

fn rule(head: &str, body: &[String]) -> String {
    if body.is_empty() {
        format!("{head}.\n")
    } else {
        format!("{head} :- {}.\n", body.join(", "))
    }
}

fn constraint(body: &[String]) -> String {
    format!(":- {}.\n", body.join(", "))
}

/// Generic variables `X1..Xn` and their sort guards for a fluent.
fn fluent_pattern(f: &FluentDecl) -> (Atom, Vec<String>) {
    let args: Vec<Term> = (1..=f.params.len()).map(|k| Term::Var(format!("X{k}"))).collect();
    let guards = f
        .params
        .iter()
        .enumerate()
        .map(|(k, s)| format!("{s}(X{})", k + 1))
        .collect();
    (Atom::new(&f.name, args), guards)
}

/// Body literals that hold exactly when `c` is violated at `time`.
fn violated(c: &CondSpec, time: &str) -> String {
    match c {
        CondSpec::Eq(a, v) => format!("not {}", fluent_atom(a, v.name(), time)),
        CondSpec::Neq(a, v) => format!("not {}", negated(a, v.name(), time)),
        CondSpec::Known(a) => format!("{{{}:{}({VAL})}}0", fluent_atom(a, VAL, time), dom(&a.name)),
        CondSpec::Unknown(a) => format!("1{{{}:{}({VAL})}}", fluent_atom(a, VAL, time), dom(&a.name)),
        CondSpec::Static { atom, negated } => {
            let s = compound(&atom.name, &[&join_terms(&atom.args)]);
            if *negated {
                s
            } else {
                format!("not {s}")
            }
        }
        CondSpec::TermEq(x, y) => format!("{x}!={y}"),
        CondSpec::TermNeq(x, y) => format!("{x}={y}"),
        CondSpec::Feasible(a) => format!("@{}({})!=1", a.name, join_terms(&a.args)),
    }
}

/// Body literals that hold exactly when `c` holds at `time`.
fn satisfied(c: &CondSpec, time: &str) -> String {
    match c {
        CondSpec::Eq(a, v) => fluent_atom(a, v.name(), time),
        CondSpec::Neq(a, v) => negated(a, v.name(), time),
        CondSpec::Known(a) => format!("1{{{}:{}({VAL})}}", fluent_atom(a, VAL, time), dom(&a.name)),
        CondSpec::Unknown(a) => format!("{{{}:{}({VAL})}}0", fluent_atom(a, VAL, time), dom(&a.name)),
        CondSpec::Static { atom, negated } => {
            let s = compound(&atom.name, &[&join_terms(&atom.args)]);
            if *negated {
                format!("not {s}")
            } else {
                s
            }
        }
        CondSpec::TermEq(x, y) => format!("{x}={y}"),
        CondSpec::TermNeq(x, y) => format!("{x}!={y}"),
        CondSpec::Feasible(a) => format!("@{}({})=1", a.name, join_terms(&a.args)),
    }
}

fn negated(a: &Atom, value: &str, time: &str) -> String {
    format!("-{}", fluent_atom(a, value, time))
}

/// Renames the binder variables of a cardinality literal so they stay
/// local to an aggregate element.
fn localize(atom: &Atom, value: &Term, binders: &[Param]) -> (Atom, String, Vec<String>) {
    let rename = |t: &Term| -> Term {
        match t {
            Term::Var(v) if binders.iter().any(|b| &b.name == v) => Term::Var(format!("{v}_")),
            other => other.clone(),
        }
    };
    let atom = Atom::new(&atom.name, atom.args.iter().map(rename).collect());
    let value = rename(value).name().to_string();
    let guards = binders.iter().map(|b| format!("{}({}_)", b.sort, b.name)).collect();
    (atom, value, guards)
}

fn element(lit: String, guards: &[String]) -> String {
    if guards.is_empty() {
        lit
    } else {
        format!("{lit}:{}", guards.join(","))
    }
}

/// Aggregate elements of a cardinality constraint: known-true literals, or
/// literals that are not excluded.
fn card_elements(c: &ConstraintSpec, time: &str, not_excluded: bool) -> String {
    c.literals
        .iter()
        .map(|l| {
            let (atom, value, guards) = localize(&l.atom, &l.value, &l.binders);
            let lit = if not_excluded {
                format!("not {}", negated(&atom, &value, time))
            } else {
                fluent_atom(&atom, &value, time)
            };
            element(lit, &guards)
        })
        .collect::<Vec<_>>()
        .join("; ")
}

/// Uniqueness derivation, all-but-one promotion and cardinality
/// propagation at `time`.
fn ramifications(d: &DomainSpec, time: &str, out: &mut String) {
    for f in &d.fluents {
        let (pat, guards) = fluent_pattern(f);
        let dm = dom(&f.name);
        let mut body = vec![fluent_atom(&pat, "Val1", time)];
        body.extend(guards.iter().cloned());
        body.extend([format!("{dm}({VAL})"), format!("{dm}(Val1)"), format!("{VAL}!=Val1")]);
        out.push_str(&rule(&negated(&pat, VAL, time), &body));
        let size = format!("{}_size", f.name);
        let mut body = vec![format!(
            "{size}-1{{{}:{dm}(Val1),Val1!={VAL}}}{size}-1",
            negated(&pat, "Val1", time)
        )];
        body.extend(guards.iter().cloned());
        body.push(format!("{dm}({VAL})"));
        out.push_str(&rule(&fluent_atom(&pat, VAL, time), &body));
    }
    for c in &d.constraints {
        let forall = sort_guards(&c.forall);
        for l in &c.literals {
            let value = l.value.name();
            let mut local = sort_guards(&l.binders);
            local.extend(forall.iter().cloned());
            if let Some(u) = c.upper {
                let mut body = vec![
                    format!("{u}{{{}}}", card_elements(c, time, false)),
                    format!("not {}", fluent_atom(&l.atom, value, time)),
                ];
                body.extend(local.iter().cloned());
                out.push_str(&rule(&negated(&l.atom, value, time), &body));
            }
            if c.lower > 0 {
                let mut body = vec![
                    format!("{{{}}}{}", card_elements(c, time, true), c.lower),
                    format!("not {}", negated(&l.atom, value, time)),
                ];
                body.extend(local.iter().cloned());
                out.push_str(&rule(&fluent_atom(&l.atom, value, time), &body));
            }
        }
    }
}

fn occurrence_choices(d: &DomainSpec, time: &str, out: &mut String) {
    for a in &d.actions {
        out.push_str(&rule(
            &format!("{{{}}}", occurrence(&a.name, &a.params, time)),
            &sort_guards(&a.params),
        ));
    }
    for s in &d.sensings {
        out.push_str(&rule(
            &format!("{{{}}}", sense_occurrence(&s.name, &s.params, time)),
            &sort_guards(&s.params),
        ));
    }
}

fn emit_base(d: &DomainSpec, p: &ProblemSpec) -> String {
    let mut out = String::from("#program base.\n\n% objects and static relations\n");
    for s in &d.sorts {
        let facts: Vec<String> = s.objects.iter().map(|o| format!("{}({o}).", s.name)).collect();
        let _ = writeln!(out, "{}", facts.join(" "));
    }
    for f in &d.facts {
        let _ = writeln!(out, "{}.", compound(&f.relation, &[&f.args.join(",")]));
    }
    out.push_str("\n% fluent value domains\n");
    for f in &d.fluents {
        let facts: Vec<String> = f.domain.iter().map(|v| format!("{}({v}).", dom(&f.name))).collect();
        let _ = writeln!(out, "{}", facts.join(" "));
        let _ = writeln!(out, "#const {}_size={}.", f.name, f.domain.len());
    }
    out.push_str("\n% initial state\n");
    for i in &p.init {
        let atom = if i.negated {
            negated(&i.atom, &i.value, INIT)
        } else {
            fluent_atom(&i.atom, &i.value, INIT)
        };
        let _ = writeln!(out, "{atom}.");
    }
    out.push_str("\n% state constraints\n");
    ramifications(d, INIT, &mut out);
    out.push_str("\n% possible action occurrences\n");
    occurrence_choices(d, INIT, &mut out);
    out
}

fn emit_step(d: &DomainSpec) -> String {
    let mut out = String::from("#program step(t).\n\n% inertia\n");
    for f in &d.fluents {
        let (pat, guards) = fluent_pattern(f);
        let dm = format!("{}({VAL})", dom(&f.name));
        let mut body = vec![format!("not {}", negated(&pat, VAL, NOW)), fluent_atom(&pat, VAL, PREV)];
        body.extend(guards.iter().cloned());
        body.push(dm.clone());
        out.push_str(&rule(&fluent_atom(&pat, VAL, NOW), &body));
        let mut body = vec![format!("not {}", fluent_atom(&pat, VAL, NOW)), negated(&pat, VAL, PREV)];
        body.extend(guards.iter().cloned());
        body.push(dm);
        out.push_str(&rule(&negated(&pat, VAL, NOW), &body));
    }
    out.push_str("\n% ramifications\n");
    ramifications(d, NOW, &mut out);
    out.push_str("\n% action occurrences and direct effects\n");
    occurrence_choices(d, NOW, &mut out);
    for a in &d.actions {
        let mut body = vec![occurrence(&a.name, &a.params, PREV)];
        body.extend(sort_guards(&a.params));
        for e in &a.effects {
            let head = match e {
                EffSpec::Assign(f, v) => fluent_atom(f, v.name(), NOW),
                EffSpec::Exclude(f, v) => negated(f, v.name(), NOW),
            };
            out.push_str(&rule(&head, &body));
        }
    }
    out.push_str("\n% sensing outcomes\n");
    for s in &d.sensings {
        let dm = dom(&s.target.name);
        let mut body = vec![sense_occurrence(&s.name, &s.params, PREV)];
        body.extend(sort_guards(&s.params));
        let head = format!("1{{{}:{dm}({VAL})}}1", fluent_atom(&s.target, VAL, NOW));
        out.push_str(&rule(&head, &body));
        let mut body = body.clone();
        body.insert(1, fluent_atom(&s.target, VAL, NOW));
        body.insert(2, negated(&s.target, VAL, PREV));
        out.push_str(&constraint(&body));
    }
    out
}

fn emit_check(d: &DomainSpec, p: &ProblemSpec) -> String {
    let mut out = String::from("#program check(t).\n\n% uniqueness and existence\n");
    for f in &d.fluents {
        let (pat, guards) = fluent_pattern(f);
        let elem = format!("{}:{}({VAL})", fluent_atom(&pat, VAL, NOW), dom(&f.name));
        let mut body = vec![format!("2{{{elem}}}")];
        body.extend(guards.iter().cloned());
        out.push_str(&constraint(&body));
        if f.observability == crate::ast::Observability::Full {
            let mut body = vec![format!("{{{elem}}}0")];
            body.extend(guards.iter().cloned());
            out.push_str(&constraint(&body));
        }
    }
    if !d.constraints.is_empty() {
        out.push_str("\n% cardinality constraints\n");
    }
    for c in &d.constraints {
        let forall = sort_guards(&c.forall);
        if let Some(u) = c.upper {
            let mut body = vec![format!("{}{{{}}}", u + 1, card_elements(c, NOW, false))];
            body.extend(forall.iter().cloned());
            out.push_str(&constraint(&body));
        }
        if c.lower > 0 {
            let mut body = vec![format!("{{{}}}{}", card_elements(c, NOW, true), c.lower - 1)];
            body.extend(forall.iter().cloned());
            out.push_str(&constraint(&body));
        }
    }

    out.push_str("\n% preconditions\n");
    for a in &d.actions {
        let occ = occurrence(&a.name, &a.params, NOW);
        let guards = sort_guards(&a.params);
        let mut conds: Vec<CondSpec> = a.pre.clone();
        for g in d.guards.iter().filter(|g| g.schema == a.name) {
            conds.push(CondSpec::Feasible(bind_guard(g, &a.params)));
        }
        for c in &conds {
            let mut body = vec![occ.clone(), violated(c, NOW)];
            body.extend(guards.iter().cloned());
            out.push_str(&constraint(&body));
        }
    }
    for s in &d.sensings {
        let occ = sense_occurrence(&s.name, &s.params, NOW);
        let guards = sort_guards(&s.params);
        let mut conds: Vec<CondSpec> = vec![CondSpec::Unknown(s.target.clone())];
        conds.extend(s.pre.iter().cloned());
        for g in d.guards.iter().filter(|g| g.schema == s.name) {
            conds.push(CondSpec::Feasible(bind_guard(g, &s.params)));
        }
        for c in &conds {
            let mut body = vec![occ.clone(), violated(c, NOW)];
            body.extend(guards.iter().cloned());
            out.push_str(&constraint(&body));
        }
    }

    out.push_str("\n% concurrency\n");
    for a in &d.actions {
        let occ = occurrence(&a.name, &a.params, NOW);
        let mut body = vec![occ.clone()];
        body.extend(sort_guards(&a.params));
        let _ = writeln!(out, "{}", rule("actAction(t+time_min)", &body).trim_end());
    }
    for s in &d.sensings {
        let mut body = vec![sense_occurrence(&s.name, &s.params, NOW)];
        body.extend(sort_guards(&s.params));
        let _ = writeln!(out, "{}", rule("sensAction(t+time_min)", &body).trim_end());
    }
    if !d.actions.is_empty() && !d.sensings.is_empty() {
        out.push_str(":- actAction(t+time_min), sensAction(t+time_min).\n");
    }
    if !d.sensings.is_empty() {
        let elems: Vec<String> = d
            .sensings
            .iter()
            .map(|s| element(sense_occurrence(&s.name, &s.params, NOW), &sort_guards(&s.params)))
            .collect();
        out.push_str(&constraint(&[format!("2{{{}}}", elems.join("; "))]));
    }
    if d.concurrency {
        for a in &d.actions {
            let term = compound(&a.name, &[&param_vars(&a.params)]);
            let mut body = vec![occurrence(&a.name, &a.params, NOW)];
            body.extend(sort_guards(&a.params));
            for e in &a.effects {
                let (EffSpec::Assign(f, _) | EffSpec::Exclude(f, _)) = e;
                let fl = compound(&f.name, &[&join_terms(&f.args)]);
                out.push_str(&rule(&format!("writes({fl},{term},t+time_min)"), &body));
            }
            for tok in &a.mutex {
                out.push_str(&rule(&format!("busy({tok},{term},t+time_min)"), &body));
            }
        }
        out.push_str(":- writes(F,A1,t+time_min), writes(F,A2,t+time_min), A1!=A2.\n");
        out.push_str(":- busy(K,A1,t+time_min), busy(K,A2,t+time_min), A1!=A2.\n");
    } else if !d.actions.is_empty() {
        let elems: Vec<String> = d
            .actions
            .iter()
            .map(|a| element(occurrence(&a.name, &a.params, NOW), &sort_guards(&a.params)))
            .collect();
        out.push_str(&constraint(&[format!("2{{{}}}", elems.join("; "))]));
    }
    out.push_str(":~ sensAction(t+time_min). [2@2,t]\n");

    if !d.redundancies.is_empty() {
        out.push_str("\n% equivalence classes\n");
    }
    for r in &d.redundancies {
        let decl = d.fluent(&r.target.name);
        let mut body: Vec<String> = r.guard.iter().map(|c| satisfied(c, NOW)).collect();
        if let Some(decl) = decl {
            for (t, s) in r.target.args.iter().zip(&decl.params) {
                if t.is_var() {
                    body.push(format!("{s}({t})"));
                }
            }
        }
        let target = compound(&r.target.name, &[&join_terms(&r.target.args)]);
        out.push_str(&rule(&format!("redundant({target},t+time_min)"), &body));
    }

    out.push_str("\n% goal\n");
    let body: Vec<String> = p.goal.iter().map(|c| satisfied(c, NOW)).collect();
    out.push_str(&rule("goal(t+time_min)", &body));
    out.push_str(":- query(t), not goal(t+time_min).\n");
    out
}

/// The guard's query with its variables replaced by the schema's
/// parameter names (guards bind parameters by position).
fn bind_guard(g: &crate::ast::GuardSpec, params: &[Param]) -> Atom {
    let args = g
        .query
        .args
        .iter()
        .map(|t| match t {
            Term::Var(v) => match g.vars.iter().position(|x| x == v) {
                Some(k) if k < params.len() => Term::Var(params[k].name.clone()),
                _ => t.clone(),
            },
            other => other.clone(),
        })
        .collect();
    Atom::new(&g.query.name, args)
}

/// Emits the encoding. Identical inputs give byte-identical text.
pub fn emit(domain: &DomainSpec, problem: &ProblemSpec) -> EncodedProgram {
    emit_with_limit(domain, problem, 40)
}

pub fn emit_with_limit(domain: &DomainSpec, problem: &ProblemSpec, step_limit: usize) -> EncodedProgram {
    let base = emit_base(domain, problem);
    let step = emit_step(domain);
    let check = emit_check(domain, problem);
    let mut combined = String::from("#include <incmode>.\n\n");
    let _ = writeln!(combined, "#const step_limit={step_limit}.");
    combined.push_str("#const time_min=0.\n\n");
    combined.push_str(&base);
    combined.push('\n');
    combined.push_str(&step);
    combined.push('\n');
    combined.push_str(&check);
    EncodedProgram {
        base,
        step,
        check,
        combined,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Occurrence {
    pub time: i64,
    pub name: String,
    pub args: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveOutcome {
    Satisfiable(Vec<Occurrence>),
    Unsatisfiable,
}

/// Splits `name(a,b(c),d)` into its name and top-level arguments.
fn split_atom(tok: &str) -> Option<(String, Vec<String>)> {
    let Some(open) = tok.find('(') else {
        let ok = !tok.is_empty() && tok.chars().all(|c| c.is_alphanumeric() || c == '_' || c == '-');
        return ok.then(|| (tok.to_string(), Vec::new()));
    };
    if !tok.ends_with(')') || open == 0 {
        return None;
    }
    let name = &tok[..open];
    let inner = &tok[open + 1..tok.len() - 1];
    let mut args = Vec::new();
    let (mut depth, mut start) = (0i32, 0usize);
    for (k, c) in inner.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth < 0 {
                    return None;
                }
            }
            ',' if depth == 0 => {
                args.push(inner[start..k].to_string());
                start = k + 1;
            }
            _ => {}
        }
    }
    if depth != 0 {
        return None;
    }
    args.push(inner[start..].to_string());
    if args.iter().any(|a| a.is_empty()) {
        return None;
    }
    Some((name.to_string(), args))
}

const CHATTER: &[&str] = &[
    "clingo",
    "Reading",
    "Solving",
    "Answer:",
    "Optimization",
    "OPTIMUM",
    "Models",
    "Calls",
    "Time",
    "CPU",
    "SATISFIABLE",
    "UNKNOWN",
];

/// Parses solver output: status lines, and whitespace-separated atoms.
/// Occurrence atoms are those named in `occurrence_names` or `sense`,
/// whose last argument is the time step.
pub fn parse_answer(output: &str, occurrence_names: &[String]) -> Result<SolveOutcome, AspError> {
    let mut found = Vec::new();
    for (k, line) in output.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed == "UNSATISFIABLE" {
            return Ok(SolveOutcome::Unsatisfiable);
        }
        if trimmed.is_empty() || trimmed.starts_with('%') || CHATTER.iter().any(|c| trimmed.starts_with(c)) {
            continue;
        }
        for tok in trimmed.split_whitespace() {
            let (name, mut args) = split_atom(tok.trim_start_matches('-')).ok_or_else(|| AspError::Malformed {
                line: k + 1,
                text: line.to_string(),
            })?;
            if name != "sense" && !occurrence_names.contains(&name) {
                continue;
            }
            let Some(time) = args.pop().and_then(|t| t.parse::<i64>().ok()) else {
                return Err(AspError::Malformed {
                    line: k + 1,
                    text: line.to_string(),
                });
            };
            found.push(Occurrence { time, name, args });
        }
    }
    found.sort();
    Ok(SolveOutcome::Satisfiable(found))
}

/// Resolves the solver: an explicit path, else the environment variable.
pub fn solver_path(explicit: Option<&Path>) -> Result<PathBuf, AspError> {
    let path = match explicit {
        Some(p) => p.to_path_buf(),
        None => std::env::var_os(SOLVER_ENV)
            .map(PathBuf::from)
            .ok_or_else(|| AspError::SolverUnavailable(format!("{SOLVER_ENV} is not set")))?,
    };
    if !path.is_file() {
        return Err(AspError::SolverUnavailable(format!("{} not found", path.display())));
    }
    Ok(path)
}

/// Feeds the program to an external solver on standard input and returns
/// the action and sensing occurrences of its answer set, ordered by time.
pub fn run_external(
    program: &EncodedProgram,
    domain: &DomainSpec,
    solver: Option<&Path>,
    max_steps: usize,
) -> Result<SolveOutcome, AspError> {
    let path = solver_path(solver)?;
    let text: String = program
        .combined
        .lines()
        .map(|l| {
            if l.starts_with("#const step_limit=") {
                format!("#const step_limit={max_steps}.\n")
            } else {
                format!("{l}\n")
            }
        })
        .collect();
    let mut child = Command::new(&path)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| AspError::SolverUnavailable(format!("{}: {e}", path.display())))?;
    child.stdin.take().expect("stdin is piped").write_all(text.as_bytes())?;
    let out = child.wait_with_output()?;
    let code = out.status.code().unwrap_or(-1);
    let stdout = String::from_utf8_lossy(&out.stdout);
    // Exit codes follow the common solver convention: 10 satisfiable,
    // 20 unsatisfiable, 30 optimum found.
    match code {
        0 | 10 | 30 => {
            let names: Vec<String> = domain.actions.iter().map(|a| a.name.clone()).collect();
            parse_answer(&stdout, &names)
        }
        20 => Ok(SolveOutcome::Unsatisfiable),
        _ => Err(AspError::SolverFailed {
            status: code,
            stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
        }),
    }
}
