//! Surface (ungrounded) domain and problem descriptions, as produced by the
//! parser and consumed by grounding, printing and the ASP emitter.

use std::fmt;

/// Location of a parse artifact. Spans never participate in structural
/// equality, so a reparsed pretty-print compares equal to its source.
#[derive(Debug, Clone, Default)]
pub struct SourceSpan {
    pub file: String,
    pub line: usize,
    pub column: usize,
}

impl SourceSpan {
    pub fn new(file: &str, line: usize, column: usize) -> Self {
        SourceSpan {
            file: file.to_string(),
            line,
            column,
        }
    }
}

impl PartialEq for SourceSpan {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl Eq for SourceSpan {}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.column)
    }
}

/// A variable (leading uppercase letter) or a constant symbol.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    Const(String),
}

impl Term {
    pub fn parse(s: &str) -> Term {
        if s.chars().next().is_some_and(|c| c.is_ascii_uppercase()) {
            Term::Var(s.to_string())
        } else {
            Term::Const(s.to_string())
        }
    }

    pub fn name(&self) -> &str {
        match self {
            Term::Var(s) | Term::Const(s) => s,
        }
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `name(arg, ...)`; zero-arity atoms print without parentheses.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Atom {
    pub name: String,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(name: &str, args: Vec<Term>) -> Self {
        Atom {
            name: name.to_string(),
            args,
        }
    }

    pub fn vars(&self) -> impl Iterator<Item = &str> {
        self.args.iter().filter(|t| t.is_var()).map(|t| t.name())
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            for (i, a) in self.args.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{a}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Observability {
    Full,
    Partial,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SortDecl {
    pub name: String,
    pub objects: Vec<String>,
    pub span: SourceSpan,
}

/// A static (rigid) relation over objects, fixed by `fact` lines.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationDecl {
    pub name: String,
    pub params: Vec<String>,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactDecl {
    pub relation: String,
    pub args: Vec<String>,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FluentDecl {
    pub name: String,
    pub params: Vec<String>,
    pub domain: Vec<String>,
    pub observability: Observability,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Param {
    pub name: String,
    pub sort: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CondSpec {
    Eq(Atom, Term),
    Neq(Atom, Term),
    Known(Atom),
    Unknown(Atom),
    /// A static relation test, optionally negated.
    Static {
        atom: Atom,
        negated: bool,
    },
    /// Term (in)equality between schema parameters or constants.
    TermEq(Term, Term),
    TermNeq(Term, Term),
    Feasible(Atom),
}

impl fmt::Display for CondSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CondSpec::Eq(a, v) => write!(f, "{a} = {v}"),
            CondSpec::Neq(a, v) => write!(f, "{a} != {v}"),
            CondSpec::Known(a) => write!(f, "known {a}"),
            CondSpec::Unknown(a) => write!(f, "unknown {a}"),
            CondSpec::Static { atom, negated } => {
                if *negated {
                    write!(f, "not {atom}")
                } else {
                    write!(f, "{atom}")
                }
            }
            CondSpec::TermEq(a, b) => write!(f, "{a} = {b}"),
            CondSpec::TermNeq(a, b) => write!(f, "{a} != {b}"),
            CondSpec::Feasible(a) => write!(f, "feasible {a}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EffSpec {
    Assign(Atom, Term),
    Exclude(Atom, Term),
}

impl fmt::Display for EffSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EffSpec::Assign(a, v) => write!(f, "{a} := {v}"),
            EffSpec::Exclude(a, v) => write!(f, "{a} != {v}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionSpec {
    pub name: String,
    pub params: Vec<Param>,
    pub pre: Vec<CondSpec>,
    pub effects: Vec<EffSpec>,
    pub mutex: Vec<Term>,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SensingSpec {
    pub name: String,
    pub params: Vec<Param>,
    pub target: Atom,
    pub pre: Vec<CondSpec>,
    pub span: SourceSpan,
}

/// `f(args) = v : X in sort, ...`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiteralSpec {
    pub atom: Atom,
    pub value: Term,
    pub binders: Vec<Param>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintSpec {
    pub lower: u32,
    /// `None` is unbounded.
    pub upper: Option<u32>,
    pub literals: Vec<LiteralSpec>,
    pub forall: Vec<Param>,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RedundancySpec {
    pub target: Atom,
    pub guard: Vec<CondSpec>,
    pub span: SourceSpan,
}

/// Attaches a feasibility query to every grounding of an action or
/// sensing schema. `vars` bind the schema parameters positionally.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GuardSpec {
    pub schema: String,
    pub vars: Vec<String>,
    pub query: Atom,
    pub span: SourceSpan,
}

/// Obstacle grid backing the `grid_path` evaluator. Cells are named
/// `c<row>_<col>`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridSpec {
    pub rows: usize,
    pub cols: usize,
    pub blocked: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DomainSpec {
    pub name: Option<String>,
    pub sorts: Vec<SortDecl>,
    pub relations: Vec<RelationDecl>,
    pub facts: Vec<FactDecl>,
    pub fluents: Vec<FluentDecl>,
    pub actions: Vec<ActionSpec>,
    pub sensings: Vec<SensingSpec>,
    pub constraints: Vec<ConstraintSpec>,
    pub redundancies: Vec<RedundancySpec>,
    pub guards: Vec<GuardSpec>,
    pub grid: Option<GridSpec>,
    pub concurrency: bool,
}

impl DomainSpec {
    pub fn sort(&self, name: &str) -> Option<&SortDecl> {
        self.sorts.iter().find(|s| s.name == name)
    }

    pub fn fluent(&self, name: &str) -> Option<&FluentDecl> {
        self.fluents.iter().find(|f| f.name == name)
    }

    pub fn relation(&self, name: &str) -> Option<&RelationDecl> {
        self.relations.iter().find(|r| r.name == name)
    }

    pub fn is_object(&self, name: &str) -> bool {
        self.sorts.iter().any(|s| s.objects.iter().any(|o| o == name))
    }

    /// Names of every feasibility predicate referenced by guards or inline
    /// `feasible` conditions.
    pub fn feasibility_predicates(&self) -> Vec<String> {
        let mut names: Vec<String> = self.guards.iter().map(|g| g.query.name.clone()).collect();
        let inline = self
            .actions
            .iter()
            .flat_map(|a| a.pre.iter())
            .chain(self.sensings.iter().flat_map(|s| s.pre.iter()));
        for c in inline {
            if let CondSpec::Feasible(a) = c {
                names.push(a.name.clone());
            }
        }
        names.sort();
        names.dedup();
        names
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InitFact {
    pub atom: Atom,
    pub value: String,
    /// `true` for an exclusion (`init f(x) != v`).
    pub negated: bool,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ProblemSpec {
    pub name: Option<String>,
    pub init: Vec<InitFact>,
    pub goal: Vec<CondSpec>,
    /// One span per goal condition.
    pub goal_spans: Vec<SourceSpan>,
}
