//! Semantic checks that need grounding or the feasibility registry.

use super::{Diagnostic, Severity};
use crate::ast::{Atom, CondSpec, DomainSpec, ProblemSpec, SourceSpan, Term};
use crate::error::GroundError;
use crate::feasibility::Feasibility;
use crate::model::GroundModel;

fn error(span: SourceSpan, message: String) -> Diagnostic {
    Diagnostic {
        severity: Severity::Error,
        span,
        message,
        expected: Vec::new(),
    }
}

fn has_var(c: &CondSpec) -> bool {
    let atom_var = |a: &Atom| a.args.iter().any(Term::is_var);
    match c {
        CondSpec::Eq(a, v) | CondSpec::Neq(a, v) => atom_var(a) || v.is_var(),
        CondSpec::Known(a) | CondSpec::Unknown(a) | CondSpec::Feasible(a) => atom_var(a),
        CondSpec::Static { atom, .. } => atom_var(atom),
        CondSpec::TermEq(a, b) | CondSpec::TermNeq(a, b) => a.is_var() || b.is_var(),
    }
}

/// Where a grounding error is best reported.
fn ground_error_span(domain: &DomainSpec, problem: &ProblemSpec, e: &GroundError) -> SourceSpan {
    let first_init = || problem.init.first().map(|f| f.span.clone());
    let found = match e {
        GroundError::EmptySort { schema, .. } => domain
            .actions
            .iter()
            .find(|a| &a.name == schema)
            .map(|a| a.span.clone())
            .or_else(|| {
                domain
                    .sensings
                    .iter()
                    .find(|s| &s.name == schema)
                    .map(|s| s.span.clone())
            })
            .or_else(|| {
                domain
                    .fluents
                    .iter()
                    .find(|f| &f.name == schema)
                    .map(|f| f.span.clone())
            }),
        GroundError::UninitializedFull(label) => {
            let name = label.split('(').next().unwrap_or(label);
            domain.fluent(name).map(|f| f.span.clone())
        }
        GroundError::NonGroundGoal(_) | GroundError::UnsupportedGoal(_) => problem.goal_spans.first().cloned(),
        _ => first_init(),
    };
    found.unwrap_or_else(|| SourceSpan::new("input", 1, 1))
}

/// Reports non-ground goals, grounding failures, an inconsistent initial
/// state and, when a registry is given, unregistered feasibility predicates.
pub fn validate(domain: &DomainSpec, problem: &ProblemSpec, registry: Option<&Feasibility>) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for (k, c) in problem.goal.iter().enumerate() {
        if has_var(c) {
            let span = problem.goal_spans.get(k).cloned().unwrap_or_default();
            out.push(error(span, format!("goal condition `{c}` contains a free variable")));
        }
    }
    if let Some(reg) = registry {
        for g in &domain.guards {
            if !reg.is_registered(&g.query.name) {
                out.push(error(
                    g.span.clone(),
                    format!("feasibility predicate {} is not registered", g.query.name),
                ));
            }
        }
        let inline = domain
            .actions
            .iter()
            .map(|a| (&a.pre, &a.span))
            .chain(domain.sensings.iter().map(|s| (&s.pre, &s.span)));
        for (pre, span) in inline {
            for c in pre {
                if let CondSpec::Feasible(a) = c {
                    if !reg.is_registered(&a.name) {
                        out.push(error(
                            span.clone(),
                            format!("feasibility predicate {} is not registered", a.name),
                        ));
                    }
                }
            }
        }
    }
    if !out.is_empty() {
        return out;
    }
    match GroundModel::ground(domain) {
        Err(e) => out.push(error(ground_error_span(domain, problem, &e), e.to_string())),
        Ok(model) => {
            if let Err(e) = model.ground_problem(problem) {
                out.push(error(ground_error_span(domain, problem, &e), e.to_string()));
            }
        }
    }
    out
}
