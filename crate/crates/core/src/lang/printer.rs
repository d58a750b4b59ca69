//! Pretty-printer producing text that parses back to equal specs.

use std::fmt::Write;

use crate::ast::*;

fn join<T: std::fmt::Display>(items: &[T], sep: &str) -> String {
    items.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(sep)
}

fn params(ps: &[Param]) -> String {
    if ps.is_empty() {
        String::new()
    } else {
        let inner: Vec<String> = ps.iter().map(|p| format!("{}: {}", p.name, p.sort)).collect();
        format!("({})", inner.join(", "))
    }
}

fn binders(ps: &[Param]) -> String {
    let inner: Vec<String> = ps.iter().map(|p| format!("{} in {}", p.name, p.sort)).collect();
    inner.join(", ")
}

fn paren(items: &[String]) -> String {
    if items.is_empty() {
        String::new()
    } else {
        format!("({})", items.join(", "))
    }
}

/// Prints the domain followed by the problem. Defaults appear in their
/// compiled form (explicit initial facts).
pub fn print_unit(domain: &DomainSpec, problem: &ProblemSpec) -> String {
    let mut s = String::new();
    if let Some(n) = &domain.name {
        writeln!(s, "domain {n}").unwrap();
    }
    for sort in &domain.sorts {
        writeln!(s, "sort {} = {{ {} }}", sort.name, sort.objects.join(", ")).unwrap();
    }
    for r in &domain.relations {
        writeln!(s, "relation {}{}", r.name, paren(&r.params)).unwrap();
    }
    for f in &domain.facts {
        writeln!(s, "fact {}{}", f.relation, paren(&f.args)).unwrap();
    }
    for f in &domain.fluents {
        let obs = match f.observability {
            Observability::Full => "full",
            Observability::Partial => "partial",
        };
        writeln!(
            s,
            "fluent {}{} : {{ {} }} {obs}",
            f.name,
            paren(&f.params),
            f.domain.join(", ")
        )
        .unwrap();
    }
    for c in &domain.constraints {
        let kind = match (c.lower, c.upper) {
            (l, Some(u)) if l == u => format!("exactly {l}"),
            (0, Some(u)) => format!("atmost {u}"),
            (l, None) => format!("atleast {l}"),
            (l, Some(u)) => format!("between {l} {u}"),
        };
        let lits: Vec<String> = c
            .literals
            .iter()
            .map(|l| {
                if l.binders.is_empty() {
                    format!("{} = {}", l.atom, l.value)
                } else {
                    format!("{} = {} : {}", l.atom, l.value, binders(&l.binders))
                }
            })
            .collect();
        write!(s, "constraint {kind} {{ {} }}", lits.join("; ")).unwrap();
        if !c.forall.is_empty() {
            write!(s, " forall {}", binders(&c.forall)).unwrap();
        }
        s.push('\n');
    }
    for a in &domain.actions {
        writeln!(s, "action {}{}", a.name, params(&a.params)).unwrap();
        if !a.pre.is_empty() {
            writeln!(s, "  pre {}", join(&a.pre, ", ")).unwrap();
        }
        if !a.effects.is_empty() {
            writeln!(s, "  eff {}", join(&a.effects, ", ")).unwrap();
        }
        if !a.mutex.is_empty() {
            writeln!(s, "  mutex {}", join(&a.mutex, ", ")).unwrap();
        }
    }
    for se in &domain.sensings {
        writeln!(s, "sense {}{} -> {}", se.name, params(&se.params), se.target).unwrap();
        if !se.pre.is_empty() {
            writeln!(s, "  pre {}", join(&se.pre, ", ")).unwrap();
        }
    }
    for r in &domain.redundancies {
        writeln!(s, "redundant {} if {}", r.target, join(&r.guard, ", ")).unwrap();
    }
    for g in &domain.guards {
        writeln!(s, "feasible-guard {}{} uses {}", g.schema, paren(&g.vars), g.query).unwrap();
    }
    if let Some(g) = &domain.grid {
        write!(s, "grid {} {}", g.rows, g.cols).unwrap();
        if !g.blocked.is_empty() {
            write!(s, " blocked {{ {} }}", g.blocked.join(", ")).unwrap();
        }
        s.push('\n');
    }
    writeln!(
        s,
        "option concurrency {}",
        if domain.concurrency { "on" } else { "off" }
    )
    .unwrap();
    if let Some(n) = &problem.name {
        writeln!(s, "problem {n}").unwrap();
    }
    for f in &problem.init {
        let op = if f.negated { "!=" } else { "=" };
        writeln!(s, "init {} {op} {}", f.atom, f.value).unwrap();
    }
    if !problem.goal.is_empty() {
        writeln!(s, "goal {}", join(&problem.goal, ", ")).unwrap();
    }
    s
}
