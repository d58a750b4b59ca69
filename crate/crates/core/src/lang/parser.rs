//! Two-pass parser for the line-oriented domain language.
//!
//! Pass one reads `sort`, `relation` and `fluent` lines so that every later
//! line can resolve names regardless of declaration order. Pass two reads
//! everything else in source order. Errors are collected per line; a bad
//! line is skipped and parsing resumes at the next one.

use std::collections::{HashMap, HashSet};

use super::lexer::{lex_line, Tok, Token};
use super::{Diagnostic, ParsedUnit, Severity};
use crate::ast::*;

type PResult<T> = Result<T, Diagnostic>;

/// Name, its column, arguments with their columns, and whether a
/// parenthesized list was present.
type RawAtom = (String, usize, Vec<(Term, usize)>, bool);

struct Line<'a> {
    file: &'a str,
    no: usize,
    toks: Vec<Token>,
    len: usize,
}

struct Cursor<'a> {
    toks: &'a [Token],
    pos: usize,
    file: &'a str,
    line: usize,
    end_col: usize,
}

impl<'a> Cursor<'a> {
    fn new(line: &'a Line<'a>) -> Self {
        Cursor {
            toks: &line.toks,
            pos: 0,
            file: line.file,
            line: line.no,
            end_col: line.len + 1,
        }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn peek_word(&self) -> Option<&str> {
        match self.peek() {
            Some(Tok::Word(w)) => Some(w),
            _ => None,
        }
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_col, |t| t.col)
    }

    fn span(&self) -> SourceSpan {
        SourceSpan::new(self.file, self.line, self.col())
    }

    fn span_at(&self, col: usize) -> SourceSpan {
        SourceSpan::new(self.file, self.line, col)
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn syntax(&self, expected: &[&str]) -> Diagnostic {
        let found = match self.peek() {
            Some(t) => t.describe(),
            None => "end of line".to_string(),
        };
        Diagnostic {
            severity: Severity::Error,
            span: self.span(),
            message: format!("expected {}, found {found}", expected.join(" or ")),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn eat_word(&mut self, w: &str) -> bool {
        if self.peek_word() == Some(w) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok) -> PResult<()> {
        if self.eat(&tok) {
            Ok(())
        } else {
            Err(self.syntax(&[&tok.describe()]))
        }
    }

    fn expect_keyword(&mut self, w: &str) -> PResult<()> {
        if self.eat_word(w) {
            Ok(())
        } else {
            Err(self.syntax(&[&format!("`{w}`")]))
        }
    }

    fn word(&mut self, what: &str) -> PResult<(String, usize)> {
        match self.toks.get(self.pos) {
            Some(Token { tok: Tok::Word(w), col }) => {
                self.pos += 1;
                Ok((w.clone(), *col))
            }
            _ => Err(self.syntax(&[what])),
        }
    }

    fn number(&mut self) -> PResult<u32> {
        let col = self.col();
        let (w, _) = self.word("number")?;
        w.parse::<u32>().map_err(|_| Diagnostic {
            severity: Severity::Error,
            span: self.span_at(col),
            message: format!("expected number, found `{w}`"),
            expected: vec!["number".into()],
        })
    }

    fn finish(&self) -> PResult<()> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.syntax(&["end of line"]))
        }
    }

    /// Comma-separated words inside `{ ... }`; the opening brace is consumed
    /// here.
    fn brace_list(&mut self, what: &str) -> PResult<Vec<(String, usize)>> {
        self.expect(Tok::LBrace)?;
        let mut out = Vec::new();
        if self.eat(&Tok::RBrace) {
            return Ok(out);
        }
        loop {
            out.push(self.word(what)?);
            if self.eat(&Tok::RBrace) {
                return Ok(out);
            }
            if !self.eat(&Tok::Comma) {
                return Err(self.syntax(&["`,`", "`}`"]));
            }
        }
    }

    /// Optional `( w, ... )` list.
    fn paren_list(&mut self, what: &str) -> PResult<Vec<(String, usize)>> {
        let mut out = Vec::new();
        if !self.eat(&Tok::LParen) {
            return Ok(out);
        }
        if self.eat(&Tok::RParen) {
            return Ok(out);
        }
        loop {
            out.push(self.word(what)?);
            if self.eat(&Tok::RParen) {
                return Ok(out);
            }
            if !self.eat(&Tok::Comma) {
                return Err(self.syntax(&["`,`", "`)`"]));
            }
        }
    }
}

fn semantic(span: SourceSpan, message: String) -> Diagnostic {
    Diagnostic {
        severity: Severity::Error,
        span,
        message,
        expected: Vec::new(),
    }
}

fn is_upper(s: &str) -> bool {
    s.chars().next().is_some_and(|c| c.is_ascii_uppercase())
}

/// Variables visible inside a clause, with their sorts. An open scope
/// accepts any variable (goal conditions; validation reports those).
#[derive(Default, Clone)]
struct Scope {
    vars: HashMap<String, String>,
    open: bool,
}

impl Scope {
    fn open() -> Self {
        Scope {
            vars: HashMap::new(),
            open: true,
        }
    }

    fn from_params(params: &[Param]) -> Self {
        Scope {
            vars: params.iter().map(|p| (p.name.clone(), p.sort.clone())).collect(),
            open: false,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum CondCtx {
    /// Action and sensing preconditions: everything allowed.
    Schema,
    /// Goals and redundancy guards: fluent conditions only.
    FluentOnly,
}

enum Block {
    None,
    Action(usize),
    Sense(usize),
    Broken,
}

struct RawDefault {
    atom: Atom,
    value: String,
    negated: bool,
    span: SourceSpan,
}

struct RawGuard {
    spec: GuardSpec,
}

struct Parser {
    domain: DomainSpec,
    problem: ProblemSpec,
    diags: Vec<Diagnostic>,
    sort_objects: HashMap<String, Vec<String>>,
    objects: HashSet<String>,
    fluents: HashMap<String, FluentDecl>,
    relations: HashMap<String, Vec<String>>,
    defaults: Vec<RawDefault>,
    guards: Vec<RawGuard>,
    block: Block,
}

/// Parses one or more named sources as a single unit.
pub fn parse_sources(sources: &[(&str, &str)]) -> ParsedUnit {
    let mut p = Parser {
        domain: DomainSpec::default(),
        problem: ProblemSpec::default(),
        diags: Vec::new(),
        sort_objects: HashMap::new(),
        objects: HashSet::new(),
        fluents: HashMap::new(),
        relations: HashMap::new(),
        defaults: Vec::new(),
        guards: Vec::new(),
        block: Block::None,
    };

    let mut lines = Vec::new();
    for (file, text) in sources {
        for (i, raw) in text.lines().enumerate() {
            match lex_line(raw) {
                Ok(toks) if toks.is_empty() => {}
                Ok(toks) => lines.push(Line {
                    file,
                    no: i + 1,
                    toks,
                    len: raw.chars().count(),
                }),
                Err(e) => p.diags.push(Diagnostic {
                    severity: Severity::Error,
                    span: SourceSpan::new(file, i + 1, e.col),
                    message: e.message,
                    expected: Vec::new(),
                }),
            }
        }
    }

    let keyword = |l: &Line| match &l.toks[0].tok {
        Tok::Word(w) => Some(w.clone()),
        _ => None,
    };

    for line in &lines {
        if keyword(line).as_deref() == Some("sort") {
            let mut cur = Cursor::new(line);
            if let Err(d) = p.sort_line(&mut cur) {
                p.diags.push(d);
            }
        }
    }
    for line in &lines {
        let kw = keyword(line);
        let mut cur = Cursor::new(line);
        let r = match kw.as_deref() {
            Some("relation") => p.relation_line(&mut cur),
            Some("fluent") => p.fluent_line(&mut cur),
            _ => Ok(()),
        };
        if let Err(d) = r {
            p.diags.push(d);
        }
    }
    for line in &lines {
        let mut cur = Cursor::new(line);
        let kw = keyword(line);
        if let Err(d) = p.line(&mut cur, kw.as_deref()) {
            if matches!(kw.as_deref(), Some("action") | Some("sense")) {
                p.block = Block::Broken;
            }
            p.diags.push(d);
        }
    }
    p.resolve_guards();
    p.compile_defaults();
    p.check_init();

    p.diags.sort_by(|a, b| {
        (a.span.file.as_str(), a.span.line, a.span.column).cmp(&(b.span.file.as_str(), b.span.line, b.span.column))
    });
    ParsedUnit {
        domain: p.domain,
        problem: p.problem,
        diagnostics: p.diags,
    }
}

impl Parser {
    fn line(&mut self, cur: &mut Cursor, kw: Option<&str>) -> PResult<()> {
        let Some(kw) = kw else {
            return Err(cur.syntax(&["keyword"]));
        };
        let attached = matches!(kw, "pre" | "eff" | "effect" | "mutex");
        if !attached {
            self.block = Block::None;
        }
        cur.pos = 1;
        match kw {
            "sort" | "relation" | "fluent" => Ok(()),
            "domain" => {
                let (name, _) = cur.word("domain name")?;
                cur.finish()?;
                self.domain.name = Some(name);
                Ok(())
            }
            "problem" => {
                let (name, _) = cur.word("problem name")?;
                cur.finish()?;
                self.problem.name = Some(name);
                Ok(())
            }
            "fact" => self.fact_line(cur),
            "constraint" => self.constraint_line(cur),
            "action" => self.action_line(cur),
            "sense" => self.sense_line(cur),
            "pre" | "eff" | "effect" | "mutex" => self.attached_line(cur, kw),
            "redundant" => self.redundant_line(cur),
            "feasible-guard" => self.guard_line(cur),
            "init" => self.init_line(cur),
            "default" => self.default_line(cur),
            "goal" => self.goal_line(cur),
            "option" => self.option_line(cur),
            "grid" => self.grid_line(cur),
            other => {
                cur.pos = 0;
                Err(Diagnostic {
                    expected: KEYWORDS.iter().map(|s| format!("`{s}`")).collect(),
                    ..semantic(cur.span(), format!("unknown keyword `{other}`"))
                })
            }
        }
    }

    fn sort_line(&mut self, cur: &mut Cursor) -> PResult<()> {
        cur.pos = 1;
        let (name, col) = cur.word("sort name")?;
        cur.expect(Tok::Eq)?;
        let objs = cur.brace_list("object name")?;
        cur.finish()?;
        if self.sort_objects.contains_key(&name) {
            return Err(semantic(
                cur.span_at(col),
                format!("duplicate declaration of sort {name}"),
            ));
        }
        let mut seen = HashSet::new();
        for (o, ocol) in &objs {
            if is_upper(o) {
                return Err(semantic(
                    cur.span_at(*ocol),
                    format!("object name {o} must not start with an uppercase letter"),
                ));
            }
            if !seen.insert(o.clone()) {
                return Err(semantic(
                    cur.span_at(*ocol),
                    format!("duplicate object {o} in sort {name}"),
                ));
            }
        }
        let objects: Vec<String> = objs.into_iter().map(|(o, _)| o).collect();
        self.objects.extend(objects.iter().cloned());
        self.sort_objects.insert(name.clone(), objects.clone());
        self.domain.sorts.push(SortDecl {
            name,
            objects,
            span: cur.span_at(1),
        });
        Ok(())
    }

    fn check_sort(&self, cur: &Cursor, name: &str, col: usize) -> PResult<()> {
        if self.sort_objects.contains_key(name) {
            Ok(())
        } else {
            Err(semantic(cur.span_at(col), format!("undeclared sort {name}")))
        }
    }

    fn relation_line(&mut self, cur: &mut Cursor) -> PResult<()> {
        cur.pos = 1;
        let (name, col) = cur.word("relation name")?;
        let params = cur.paren_list("sort name")?;
        cur.finish()?;
        for (s, c) in &params {
            self.check_sort(cur, s, *c)?;
        }
        if self.relations.contains_key(&name) || self.fluents.contains_key(&name) {
            return Err(semantic(cur.span_at(col), format!("duplicate declaration of {name}")));
        }
        let params: Vec<String> = params.into_iter().map(|(s, _)| s).collect();
        self.relations.insert(name.clone(), params.clone());
        self.domain.relations.push(RelationDecl {
            name,
            params,
            span: cur.span_at(1),
        });
        Ok(())
    }

    fn fluent_line(&mut self, cur: &mut Cursor) -> PResult<()> {
        cur.pos = 1;
        let (name, col) = cur.word("fluent name")?;
        let params = cur.paren_list("sort name")?;
        for (s, c) in &params {
            self.check_sort(cur, s, *c)?;
        }
        cur.expect(Tok::Colon)?;
        let mut domain: Vec<String> = Vec::new();
        loop {
            if cur.peek() == Some(&Tok::LBrace) {
                for (v, vcol) in cur.brace_list("value")? {
                    if is_upper(&v) {
                        return Err(semantic(
                            cur.span_at(vcol),
                            format!("value {v} must not start with an uppercase letter"),
                        ));
                    }
                    if domain.contains(&v) {
                        return Err(semantic(
                            cur.span_at(vcol),
                            format!("duplicate value {v} in domain of {name}"),
                        ));
                    }
                    domain.push(v);
                }
            } else {
                let (s, scol) = cur.word("`{` or sort name")?;
                self.check_sort(cur, &s, scol)?;
                for v in &self.sort_objects[&s] {
                    if domain.contains(v) {
                        return Err(semantic(
                            cur.span_at(scol),
                            format!("duplicate value {v} in domain of {name}"),
                        ));
                    }
                    domain.push(v.clone());
                }
            }
            if !cur.eat(&Tok::Bar) {
                break;
            }
        }
        let obs_col = cur.col();
        let observability = match cur.word("`full` or `partial`")?.0.as_str() {
            "full" => Observability::Full,
            "partial" => Observability::Partial,
            _ => {
                cur.pos -= 1;
                return Err(cur.syntax(&["`full`", "`partial`"]));
            }
        };
        let _ = obs_col;
        cur.finish()?;
        if domain.is_empty() {
            return Err(semantic(cur.span_at(col), format!("fluent {name} has an empty domain")));
        }
        if domain.len() > 64 {
            return Err(semantic(
                cur.span_at(col),
                format!("fluent {name} has more than 64 values"),
            ));
        }
        if self.fluents.contains_key(&name) || self.relations.contains_key(&name) {
            return Err(semantic(cur.span_at(col), format!("duplicate declaration of {name}")));
        }
        let decl = FluentDecl {
            name: name.clone(),
            params: params.into_iter().map(|(s, _)| s).collect(),
            domain,
            observability,
            span: cur.span_at(1),
        };
        self.fluents.insert(name, decl.clone());
        self.domain.fluents.push(decl);
        Ok(())
    }

    fn fact_line(&mut self, cur: &mut Cursor) -> PResult<()> {
        let (name, col) = cur.word("relation name")?;
        let args = cur.paren_list("object name")?;
        cur.finish()?;
        let Some(params) = self.relations.get(&name) else {
            return Err(semantic(cur.span_at(col), format!("undeclared relation {name}")));
        };
        if params.len() != args.len() {
            return Err(semantic(
                cur.span_at(col),
                format!(
                    "relation {name} expects {} arguments, found {}",
                    params.len(),
                    args.len()
                ),
            ));
        }
        for ((a, acol), sort) in args.iter().zip(params) {
            self.check_object(cur, a, sort, *acol)?;
        }
        self.domain.facts.push(FactDecl {
            relation: name,
            args: args.into_iter().map(|(a, _)| a).collect(),
            span: cur.span_at(1),
        });
        Ok(())
    }

    fn check_object(&self, cur: &Cursor, obj: &str, sort: &str, col: usize) -> PResult<()> {
        if !self.objects.contains(obj) {
            return Err(semantic(cur.span_at(col), format!("undeclared object {obj}")));
        }
        if !self.sort_objects[sort].iter().any(|o| o == obj) {
            return Err(semantic(
                cur.span_at(col),
                format!("object {obj} is not of sort {sort}"),
            ));
        }
        Ok(())
    }

    fn check_var(&self, cur: &Cursor, v: &str, scope: &Scope, col: usize) -> PResult<()> {
        if scope.open || scope.vars.contains_key(v) {
            Ok(())
        } else {
            Err(semantic(cur.span_at(col), format!("unbound variable {v}")))
        }
    }

    /// Reads `name` or `name(args)`; returns the raw pieces.
    fn raw_atom(&self, cur: &mut Cursor) -> PResult<RawAtom> {
        let (name, col) = cur.word("identifier")?;
        let has_parens = cur.peek() == Some(&Tok::LParen);
        let args = cur
            .paren_list("argument")?
            .into_iter()
            .map(|(a, c)| (Term::parse(&a), c))
            .collect();
        Ok((name, col, args, has_parens))
    }

    fn fluent_atom(
        &self,
        cur: &Cursor,
        name: &str,
        col: usize,
        args: Vec<(Term, usize)>,
        scope: &Scope,
    ) -> PResult<Atom> {
        let Some(decl) = self.fluents.get(name) else {
            return Err(semantic(cur.span_at(col), format!("undeclared fluent {name}")));
        };
        if decl.params.len() != args.len() {
            return Err(semantic(
                cur.span_at(col),
                format!(
                    "fluent {name} expects {} arguments, found {}",
                    decl.params.len(),
                    args.len()
                ),
            ));
        }
        for ((t, c), sort) in args.iter().zip(&decl.params) {
            match t {
                Term::Var(v) => self.check_var(cur, v, scope, *c)?,
                Term::Const(o) => self.check_object(cur, o, sort, *c)?,
            }
        }
        Ok(Atom::new(name, args.into_iter().map(|(t, _)| t).collect()))
    }

    fn static_atom(
        &self,
        cur: &Cursor,
        name: &str,
        col: usize,
        args: Vec<(Term, usize)>,
        scope: &Scope,
    ) -> PResult<Atom> {
        let Some(params) = self.relations.get(name) else {
            return Err(semantic(cur.span_at(col), format!("undeclared relation {name}")));
        };
        if params.len() != args.len() {
            return Err(semantic(
                cur.span_at(col),
                format!(
                    "relation {name} expects {} arguments, found {}",
                    params.len(),
                    args.len()
                ),
            ));
        }
        for ((t, c), sort) in args.iter().zip(params) {
            match t {
                Term::Var(v) => self.check_var(cur, v, scope, *c)?,
                Term::Const(o) => self.check_object(cur, o, sort, *c)?,
            }
        }
        Ok(Atom::new(name, args.into_iter().map(|(t, _)| t).collect()))
    }

    fn value(&self, cur: &mut Cursor, fluent: &str, scope: &Scope) -> PResult<Term> {
        let (v, col) = cur.word("value")?;
        let t = Term::parse(&v);
        match &t {
            Term::Var(name) => self.check_var(cur, name, scope, col)?,
            Term::Const(val) => {
                if !self.fluents[fluent].domain.contains(val) {
                    return Err(semantic(
                        cur.span_at(col),
                        format!("undeclared value {val} for fluent {fluent}"),
                    ));
                }
            }
        }
        Ok(t)
    }

    fn term(&self, cur: &mut Cursor, scope: &Scope) -> PResult<Term> {
        let (w, col) = cur.word("term")?;
        let t = Term::parse(&w);
        match &t {
            Term::Var(v) => self.check_var(cur, v, scope, col)?,
            Term::Const(o) => {
                if !self.objects.contains(o) {
                    return Err(semantic(cur.span_at(col), format!("undeclared object {o}")));
                }
            }
        }
        Ok(t)
    }

    fn cond(&self, cur: &mut Cursor, scope: &Scope, ctx: CondCtx) -> PResult<CondSpec> {
        let start = cur.col();
        let fluent_only = |cur: &Cursor| -> Diagnostic {
            semantic(
                cur.span_at(start),
                "only fluent conditions are allowed here".to_string(),
            )
        };
        let prefix = match cur.peek_word() {
            Some(p @ ("known" | "unknown" | "feasible" | "not")) => {
                // A prefix keyword is only a keyword when an atom follows.
                match cur.toks.get(cur.pos + 1).map(|t| &t.tok) {
                    Some(Tok::Word(_)) => Some(p.to_string()),
                    _ => None,
                }
            }
            _ => None,
        };
        if let Some(p) = prefix {
            cur.pos += 1;
            let (name, col, args, _) = self.raw_atom(cur)?;
            return match p.as_str() {
                "known" => Ok(CondSpec::Known(self.fluent_atom(cur, &name, col, args, scope)?)),
                "unknown" => Ok(CondSpec::Unknown(self.fluent_atom(cur, &name, col, args, scope)?)),
                "not" => {
                    if ctx == CondCtx::FluentOnly {
                        return Err(fluent_only(cur));
                    }
                    Ok(CondSpec::Static {
                        atom: self.static_atom(cur, &name, col, args, scope)?,
                        negated: true,
                    })
                }
                _ => {
                    if ctx == CondCtx::FluentOnly {
                        return Err(fluent_only(cur));
                    }
                    for (t, c) in &args {
                        if let Term::Var(v) = t {
                            self.check_var(cur, v, scope, *c)?;
                        }
                    }
                    Ok(CondSpec::Feasible(Atom::new(
                        &name,
                        args.into_iter().map(|(t, _)| t).collect(),
                    )))
                }
            };
        }

        let (name, col, args, has_parens) = self.raw_atom(cur)?;
        if self.fluents.contains_key(&name) {
            let atom = self.fluent_atom(cur, &name, col, args, scope)?;
            let neq = if cur.eat(&Tok::Eq) {
                false
            } else if cur.eat(&Tok::Neq) {
                true
            } else {
                return Err(cur.syntax(&["`=`", "`!=`"]));
            };
            let v = self.value(cur, &name, scope)?;
            return Ok(if neq {
                CondSpec::Neq(atom, v)
            } else {
                CondSpec::Eq(atom, v)
            });
        }
        if self.relations.contains_key(&name) {
            if ctx == CondCtx::FluentOnly {
                return Err(fluent_only(cur));
            }
            let atom = self.static_atom(cur, &name, col, args, scope)?;
            return Ok(CondSpec::Static { atom, negated: false });
        }
        if has_parens {
            return Err(semantic(
                cur.span_at(col),
                format!("undeclared fluent or relation {name}"),
            ));
        }
        // A bare term: `X != Y`.
        let lhs = Term::parse(&name);
        match (&lhs, ctx) {
            (_, CondCtx::FluentOnly) => {
                return Err(if lhs.is_var() {
                    fluent_only(cur)
                } else {
                    semantic(cur.span_at(col), format!("undeclared fluent {name}"))
                })
            }
            (Term::Var(v), _) => self.check_var(cur, v, scope, col)?,
            (Term::Const(o), _) => {
                if !self.objects.contains(o) {
                    return Err(semantic(cur.span_at(col), format!("undeclared fluent or object {o}")));
                }
            }
        }
        let neq = if cur.eat(&Tok::Eq) {
            false
        } else if cur.eat(&Tok::Neq) {
            true
        } else {
            return Err(cur.syntax(&["`=`", "`!=`"]));
        };
        let rhs = self.term(cur, scope)?;
        Ok(if neq {
            CondSpec::TermNeq(lhs, rhs)
        } else {
            CondSpec::TermEq(lhs, rhs)
        })
    }

    fn cond_list(&self, cur: &mut Cursor, scope: &Scope, ctx: CondCtx) -> PResult<Vec<(CondSpec, usize)>> {
        let mut out = Vec::new();
        loop {
            let col = cur.col();
            out.push((self.cond(cur, scope, ctx)?, col));
            if cur.at_end() {
                return Ok(out);
            }
            if !cur.eat(&Tok::Comma) {
                return Err(cur.syntax(&["`,`", "end of line"]));
            }
        }
    }

    fn params(&self, cur: &mut Cursor) -> PResult<Vec<Param>> {
        let mut out: Vec<Param> = Vec::new();
        if !cur.eat(&Tok::LParen) {
            return Ok(out);
        }
        if cur.eat(&Tok::RParen) {
            return Ok(out);
        }
        loop {
            let (name, col) = cur.word("parameter name")?;
            if !is_upper(&name) {
                return Err(semantic(
                    cur.span_at(col),
                    format!("parameter {name} must start with an uppercase letter"),
                ));
            }
            if out.iter().any(|p| p.name == name) {
                return Err(semantic(cur.span_at(col), format!("duplicate parameter {name}")));
            }
            cur.expect(Tok::Colon)?;
            let (sort, scol) = cur.word("sort name")?;
            self.check_sort(cur, &sort, scol)?;
            out.push(Param { name, sort });
            if cur.eat(&Tok::RParen) {
                return Ok(out);
            }
            if !cur.eat(&Tok::Comma) {
                return Err(cur.syntax(&["`,`", "`)`"]));
            }
        }
    }

    fn schema_name_taken(&self, name: &str) -> bool {
        self.domain.actions.iter().any(|a| a.name == name) || self.domain.sensings.iter().any(|s| s.name == name)
    }

    fn action_line(&mut self, cur: &mut Cursor) -> PResult<()> {
        let (name, col) = cur.word("action name")?;
        let params = self.params(cur)?;
        cur.finish()?;
        if self.schema_name_taken(&name) {
            return Err(semantic(cur.span_at(col), format!("duplicate declaration of {name}")));
        }
        self.domain.actions.push(ActionSpec {
            name,
            params,
            pre: Vec::new(),
            effects: Vec::new(),
            mutex: Vec::new(),
            span: cur.span_at(1),
        });
        self.block = Block::Action(self.domain.actions.len() - 1);
        Ok(())
    }

    fn sense_line(&mut self, cur: &mut Cursor) -> PResult<()> {
        let (name, col) = cur.word("sensing name")?;
        let params = self.params(cur)?;
        cur.expect(Tok::Arrow)?;
        let scope = Scope::from_params(&params);
        let (fname, fcol, args, _) = self.raw_atom(cur)?;
        let target = self.fluent_atom(cur, &fname, fcol, args, &scope)?;
        cur.finish()?;
        let decl = &self.fluents[&fname];
        if decl.observability == Observability::Full {
            return Err(semantic(
                cur.span_at(fcol),
                format!("sensing {name} targets fully observable fluent {fname}"),
            ));
        }
        if decl.domain.len() < 2 {
            return Err(semantic(
                cur.span_at(fcol),
                format!("sensing {name} targets fluent {fname} with fewer than two values"),
            ));
        }
        if self.schema_name_taken(&name) {
            return Err(semantic(cur.span_at(col), format!("duplicate declaration of {name}")));
        }
        self.domain.sensings.push(SensingSpec {
            name,
            params,
            target,
            pre: Vec::new(),
            span: cur.span_at(1),
        });
        self.block = Block::Sense(self.domain.sensings.len() - 1);
        Ok(())
    }

    fn attached_line(&mut self, cur: &mut Cursor, kw: &str) -> PResult<()> {
        match (&self.block, kw) {
            (Block::Broken, _) => Ok(()),
            (Block::None, _) => {
                cur.pos = 0;
                Err(semantic(cur.span(), format!("`{kw}` outside an action or sense block")))
            }
            (Block::Sense(i), "pre") => {
                let i = *i;
                let scope = Scope::from_params(&self.domain.sensings[i].params);
                let conds = self.cond_list(cur, &scope, CondCtx::Schema)?;
                self.domain.sensings[i].pre.extend(conds.into_iter().map(|(c, _)| c));
                Ok(())
            }
            (Block::Sense(_), _) => {
                cur.pos = 0;
                Err(semantic(cur.span(), format!("`{kw}` is not allowed in a sense block")))
            }
            (Block::Action(i), "pre") => {
                let i = *i;
                let scope = Scope::from_params(&self.domain.actions[i].params);
                let conds = self.cond_list(cur, &scope, CondCtx::Schema)?;
                self.domain.actions[i].pre.extend(conds.into_iter().map(|(c, _)| c));
                Ok(())
            }
            (Block::Action(i), "mutex") => {
                let i = *i;
                let scope = Scope::from_params(&self.domain.actions[i].params);
                let mut toks = Vec::new();
                loop {
                    let (w, col) = cur.word("mutex token")?;
                    let t = Term::parse(&w);
                    if let Term::Var(v) = &t {
                        self.check_var(cur, v, &scope, col)?;
                    }
                    toks.push(t);
                    if cur.at_end() {
                        break;
                    }
                    if !cur.eat(&Tok::Comma) {
                        return Err(cur.syntax(&["`,`", "end of line"]));
                    }
                }
                self.domain.actions[i].mutex.extend(toks);
                Ok(())
            }
            (Block::Action(i), _) => {
                let i = *i;
                let scope = Scope::from_params(&self.domain.actions[i].params);
                let mut effs = Vec::new();
                loop {
                    effs.push(self.effect(cur, &scope)?);
                    if cur.at_end() {
                        break;
                    }
                    if !cur.eat(&Tok::Comma) {
                        return Err(cur.syntax(&["`,`", "end of line"]));
                    }
                }
                self.domain.actions[i].effects.extend(effs);
                Ok(())
            }
        }
    }

    fn effect(&self, cur: &mut Cursor, scope: &Scope) -> PResult<EffSpec> {
        let (name, col, args, _) = self.raw_atom(cur)?;
        let atom = self.fluent_atom(cur, &name, col, args, scope)?;
        if cur.eat(&Tok::Assign) {
            let v = self.value(cur, &name, scope)?;
            Ok(EffSpec::Assign(atom, v))
        } else if cur.eat(&Tok::Neq) {
            if self.fluents[&name].observability == Observability::Full {
                return Err(semantic(
                    cur.span_at(col),
                    format!("exclusion effect on fully observable fluent {name}"),
                ));
            }
            let v = self.value(cur, &name, scope)?;
            Ok(EffSpec::Exclude(atom, v))
        } else {
            Err(cur.syntax(&["`:=`", "`!=`"]))
        }
    }

    fn binders(&self, cur: &mut Cursor) -> PResult<Vec<Param>> {
        let mut out: Vec<Param> = Vec::new();
        loop {
            let (v, col) = cur.word("variable")?;
            if !is_upper(&v) {
                return Err(semantic(cur.span_at(col), format!("{v} is not a variable")));
            }
            cur.expect_keyword("in")?;
            let (s, scol) = cur.word("sort name")?;
            self.check_sort(cur, &s, scol)?;
            out.push(Param { name: v, sort: s });
            if !cur.eat(&Tok::Comma) {
                return Ok(out);
            }
        }
    }

    fn constraint_line(&mut self, cur: &mut Cursor) -> PResult<()> {
        let kcol = cur.col();
        let (kind, _) = cur.word("`exactly`, `atmost`, `atleast` or `between`")?;
        let (lower, upper) = match kind.as_str() {
            "exactly" => {
                let n = cur.number()?;
                (n, Some(n))
            }
            "atmost" => (0, Some(cur.number()?)),
            "atleast" => (cur.number()?, None),
            "between" => {
                let l = cur.number()?;
                let u = cur.number()?;
                (l, Some(u))
            }
            _ => {
                cur.pos -= 1;
                return Err(cur.syntax(&["`exactly`", "`atmost`", "`atleast`", "`between`"]));
            }
        };
        // Literals are read raw first: their scope depends on the trailing
        // `forall` clause.
        struct RawLit {
            name: String,
            col: usize,
            args: Vec<(Term, usize)>,
            value: (String, usize),
            binders: Vec<Param>,
        }
        cur.expect(Tok::LBrace)?;
        let mut raws = Vec::new();
        loop {
            let (name, col, args, _) = self.raw_atom(cur)?;
            cur.expect(Tok::Eq)?;
            let value = cur.word("value")?;
            let binders = if cur.eat(&Tok::Colon) {
                self.binders(cur)?
            } else {
                Vec::new()
            };
            raws.push(RawLit {
                name,
                col,
                args,
                value,
                binders,
            });
            if cur.eat(&Tok::RBrace) {
                break;
            }
            if !cur.eat(&Tok::Semi) {
                return Err(cur.syntax(&["`;`", "`}`"]));
            }
        }
        let forall = if cur.eat_word("forall") {
            self.binders(cur)?
        } else {
            Vec::new()
        };
        cur.finish()?;

        let mut literals = Vec::new();
        let mut ground_count: u64 = 0;
        for raw in raws {
            let mut scope = Scope::from_params(&forall);
            for b in &raw.binders {
                scope.vars.insert(b.name.clone(), b.sort.clone());
            }
            let atom = self.fluent_atom(cur, &raw.name, raw.col, raw.args, &scope)?;
            let value = Term::parse(&raw.value.0);
            match &value {
                Term::Var(v) => self.check_var(cur, v, &scope, raw.value.1)?,
                Term::Const(v) => {
                    if !self.fluents[&raw.name].domain.contains(v) {
                        return Err(semantic(
                            cur.span_at(raw.value.1),
                            format!("undeclared value {v} for fluent {}", raw.name),
                        ));
                    }
                }
            }
            let mut n: u64 = 1;
            for b in &raw.binders {
                n *= self.sort_objects[&b.sort].len() as u64;
            }
            ground_count += n;
            literals.push(LiteralSpec {
                atom,
                value,
                binders: raw.binders,
            });
        }
        if let Some(u) = upper {
            if lower > u {
                return Err(semantic(
                    cur.span_at(kcol),
                    format!("constraint lower bound {lower} exceeds upper bound {u}"),
                ));
            }
        }
        if u64::from(lower) > ground_count {
            return Err(semantic(
                cur.span_at(kcol),
                format!("constraint lower bound {lower} exceeds its {ground_count} literals"),
            ));
        }
        self.domain.constraints.push(ConstraintSpec {
            lower,
            upper,
            literals,
            forall,
            span: cur.span_at(1),
        });
        Ok(())
    }

    fn redundant_line(&mut self, cur: &mut Cursor) -> PResult<()> {
        let (name, col, args, _) = self.raw_atom(cur)?;
        let Some(decl) = self.fluents.get(&name) else {
            return Err(semantic(cur.span_at(col), format!("undeclared fluent {name}")));
        };
        let mut scope = Scope::default();
        for ((t, _), sort) in args.iter().zip(&decl.params) {
            if let Term::Var(v) = t {
                scope.vars.insert(v.clone(), sort.clone());
            }
        }
        let target = self.fluent_atom(cur, &name, col, args, &scope)?;
        cur.expect_keyword("if")?;
        let guard = self.cond_list(cur, &scope, CondCtx::FluentOnly)?;
        self.domain.redundancies.push(RedundancySpec {
            target,
            guard: guard.into_iter().map(|(c, _)| c).collect(),
            span: cur.span_at(1),
        });
        Ok(())
    }

    fn guard_line(&mut self, cur: &mut Cursor) -> PResult<()> {
        let (schema, _) = cur.word("schema name")?;
        let vars = cur.paren_list("variable")?;
        cur.expect_keyword("uses")?;
        let (q, _qcol, args, _) = self.raw_atom(cur)?;
        cur.finish()?;
        for (v, c) in &vars {
            if !is_upper(v) {
                return Err(semantic(cur.span_at(*c), format!("{v} is not a variable")));
            }
        }
        let names: Vec<String> = vars.into_iter().map(|(v, _)| v).collect();
        for (t, c) in &args {
            if let Term::Var(v) = t {
                if !names.contains(v) {
                    return Err(semantic(cur.span_at(*c), format!("unbound variable {v}")));
                }
            }
        }
        self.guards.push(RawGuard {
            spec: GuardSpec {
                schema,
                vars: names,
                query: Atom::new(&q, args.into_iter().map(|(t, _)| t).collect()),
                span: cur.span_at(1),
            },
        });
        Ok(())
    }

    fn resolve_guards(&mut self) {
        for g in std::mem::take(&mut self.guards) {
            let g = g.spec;
            let arity = self
                .domain
                .actions
                .iter()
                .find(|a| a.name == g.schema)
                .map(|a| a.params.len())
                .or_else(|| {
                    self.domain
                        .sensings
                        .iter()
                        .find(|s| s.name == g.schema)
                        .map(|s| s.params.len())
                });
            match arity {
                None => self.diags.push(semantic(
                    g.span.clone(),
                    format!("feasibility guard names undeclared schema {}", g.schema),
                )),
                Some(n) if n != g.vars.len() => self.diags.push(semantic(
                    g.span.clone(),
                    format!(
                        "feasibility guard for {} binds {} parameters, schema has {n}",
                        g.schema,
                        g.vars.len()
                    ),
                )),
                Some(_) => self.domain.guards.push(g),
            }
        }
    }

    fn init_line(&mut self, cur: &mut Cursor) -> PResult<()> {
        let scope = Scope::default();
        let mut facts = Vec::new();
        loop {
            let col = cur.col();
            let (name, acol, args, _) = self.raw_atom(cur)?;
            let atom = self.fluent_atom(cur, &name, acol, args, &scope)?;
            let negated = if cur.eat(&Tok::Eq) {
                false
            } else if cur.eat(&Tok::Neq) {
                true
            } else {
                return Err(cur.syntax(&["`=`", "`!=`"]));
            };
            let vcol = cur.col();
            let value = match self.value(cur, &name, &scope)? {
                Term::Const(v) => v,
                Term::Var(v) => return Err(semantic(cur.span_at(vcol), format!("unbound variable {v}"))),
            };
            if negated && self.fluents[&name].observability == Observability::Full {
                return Err(semantic(
                    cur.span_at(acol),
                    format!("exclusion on fully observable fluent {name}"),
                ));
            }
            facts.push(InitFact {
                atom,
                value,
                negated,
                span: cur.span_at(col),
            });
            if cur.at_end() {
                break;
            }
            if !cur.eat(&Tok::Comma) {
                return Err(cur.syntax(&["`,`", "end of line"]));
            }
        }
        self.problem.init.extend(facts);
        Ok(())
    }

    fn default_line(&mut self, cur: &mut Cursor) -> PResult<()> {
        let (name, col, args, _) = self.raw_atom(cur)?;
        let Some(decl) = self.fluents.get(&name) else {
            return Err(semantic(cur.span_at(col), format!("undeclared fluent {name}")));
        };
        let mut scope = Scope::default();
        for ((t, _), sort) in args.iter().zip(&decl.params) {
            if let Term::Var(v) = t {
                scope.vars.insert(v.clone(), sort.clone());
            }
        }
        let atom = self.fluent_atom(cur, &name, col, args, &scope)?;
        let negated = if cur.eat(&Tok::Eq) {
            false
        } else if cur.eat(&Tok::Neq) {
            true
        } else {
            return Err(cur.syntax(&["`=`", "`!=`"]));
        };
        let vcol = cur.col();
        let value = match self.value(cur, &name, &Scope::default())? {
            Term::Const(v) => v,
            Term::Var(v) => return Err(semantic(cur.span_at(vcol), format!("unbound variable {v}"))),
        };
        cur.finish()?;
        if negated && self.fluents[&name].observability == Observability::Full {
            return Err(semantic(
                cur.span_at(col),
                format!("exclusion default on fully observable fluent {name}"),
            ));
        }
        self.defaults.push(RawDefault {
            atom,
            value,
            negated,
            span: cur.span_at(1),
        });
        Ok(())
    }

    /// Expands `default` lines into initial facts, one per matching ground
    /// instance that has no known initial value.
    fn compile_defaults(&mut self) {
        for d in std::mem::take(&mut self.defaults) {
            let decl = &self.fluents[&d.atom.name];
            let mut choices: Vec<Vec<String>> = Vec::new();
            for (t, sort) in d.atom.args.iter().zip(&decl.params) {
                match t {
                    Term::Const(c) => choices.push(vec![c.clone()]),
                    Term::Var(_) => choices.push(self.sort_objects[sort].clone()),
                }
            }
            for args in cartesian(&choices) {
                // Repeated variables must bind the same object.
                let mut binding: HashMap<&str, &str> = HashMap::new();
                let consistent = d.atom.args.iter().zip(&args).all(|(t, a)| match t {
                    Term::Var(v) => *binding.entry(v.as_str()).or_insert(a.as_str()) == a.as_str(),
                    Term::Const(_) => true,
                });
                if !consistent {
                    continue;
                }
                let atom = Atom::new(&d.atom.name, args.iter().map(|a| Term::Const(a.clone())).collect());
                let facts = self.problem.init.iter().filter(|f| f.atom == atom);
                let mut has_known = false;
                let mut excluded = false;
                let mut present = false;
                for f in facts {
                    if !f.negated {
                        has_known = true;
                    } else if f.value == d.value {
                        excluded = true;
                    }
                    if f.negated == d.negated && f.value == d.value {
                        present = true;
                    }
                }
                if has_known || present || (!d.negated && excluded) {
                    continue;
                }
                self.problem.init.push(InitFact {
                    atom,
                    value: d.value.clone(),
                    negated: d.negated,
                    span: d.span.clone(),
                });
            }
        }
    }

    fn check_init(&mut self) {
        let mut known: HashMap<&Atom, &InitFact> = HashMap::new();
        for f in &self.problem.init {
            if f.negated {
                continue;
            }
            if let Some(prev) = known.insert(&f.atom, f) {
                if prev.value != f.value {
                    self.diags.push(semantic(
                        f.span.clone(),
                        format!(
                            "conflicting initial values {} and {} for {}",
                            prev.value, f.value, f.atom
                        ),
                    ));
                }
            }
        }
    }

    fn goal_line(&mut self, cur: &mut Cursor) -> PResult<()> {
        let conds = self.cond_list(cur, &Scope::open(), CondCtx::FluentOnly)?;
        for (c, col) in conds {
            self.problem.goal.push(c);
            self.problem.goal_spans.push(cur.span_at(col));
        }
        Ok(())
    }

    fn option_line(&mut self, cur: &mut Cursor) -> PResult<()> {
        cur.expect_keyword("concurrency")?;
        let on = if cur.eat_word("on") {
            true
        } else if cur.eat_word("off") {
            false
        } else {
            return Err(cur.syntax(&["`on`", "`off`"]));
        };
        cur.finish()?;
        self.domain.concurrency = on;
        Ok(())
    }

    fn grid_line(&mut self, cur: &mut Cursor) -> PResult<()> {
        let rows = cur.number()? as usize;
        let cols = cur.number()? as usize;
        let mut blocked = Vec::new();
        if cur.eat_word("blocked") {
            for (cell, c) in cur.brace_list("cell name")? {
                match parse_cell(&cell) {
                    Some((r, k)) if r < rows && k < cols => blocked.push(cell),
                    _ => {
                        return Err(semantic(
                            cur.span_at(c),
                            format!("{cell} is not a cell of a {rows}x{cols} grid"),
                        ))
                    }
                }
            }
        }
        cur.finish()?;
        self.domain.grid = Some(GridSpec { rows, cols, blocked });
        Ok(())
    }
}

const KEYWORDS: &[&str] = &[
    "domain",
    "problem",
    "sort",
    "relation",
    "fact",
    "fluent",
    "constraint",
    "action",
    "sense",
    "pre",
    "eff",
    "mutex",
    "redundant",
    "feasible-guard",
    "init",
    "default",
    "goal",
    "option",
    "grid",
];

/// `c<row>_<col>` → (row, col).
pub fn parse_cell(name: &str) -> Option<(usize, usize)> {
    let rest = name.strip_prefix('c')?;
    let (r, c) = rest.split_once('_')?;
    Some((r.parse().ok()?, c.parse().ok()?))
}

/// All tuples picking one entry per position, in lexicographic position
/// order.
pub fn cartesian(choices: &[Vec<String>]) -> Vec<Vec<String>> {
    let mut out: Vec<Vec<String>> = vec![Vec::new()];
    for options in choices {
        let mut next = Vec::with_capacity(out.len() * options.len());
        for prefix in &out {
            for o in options {
                let mut p = prefix.clone();
                p.push(o.clone());
                next.push(p);
            }
        }
        out = next;
    }
    out
}
