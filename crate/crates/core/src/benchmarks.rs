//! Deterministic generators for the benchmark families, emitting domain
//! text, plus the checked-in kitchen-lite fixture.

use std::fmt::{self, Write};
use std::str::FromStr;

use thiserror::Error;

pub const KITCHEN_LITE: &str = include_str!("../fixtures/kitchen-lite.hcp");
pub const KITCHEN_LITE_LOOKUP: &str = include_str!("../fixtures/kitchen-lite.lookup");

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BenchmarkError {
    #[error("{0}")]
    InvalidSize(String),
    #[error("unknown benchmark family {0}")]
    UnknownFamily(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchmarkSpec {
    Bts { m: usize },
    Colorball { n: usize, balls: usize },
    Doors { n: usize },
    KitchenLite,
}

impl BenchmarkSpec {
    pub fn generate(&self) -> Result<String, BenchmarkError> {
        match *self {
            BenchmarkSpec::Bts { m } => gen_bts(m),
            BenchmarkSpec::Colorball { n, balls } => gen_colorball(n, balls),
            BenchmarkSpec::Doors { n } => gen_doors(n),
            BenchmarkSpec::KitchenLite => Ok(KITCHEN_LITE.to_string()),
        }
    }
}

impl fmt::Display for BenchmarkSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BenchmarkSpec::Bts { m } => write!(f, "bts-{m}"),
            BenchmarkSpec::Colorball { n, balls } => write!(f, "colorball-{n}-{balls}"),
            BenchmarkSpec::Doors { n } => write!(f, "doors-{n}"),
            BenchmarkSpec::KitchenLite => f.write_str("kitchen-lite"),
        }
    }
}

/// Accepts `bts-M`, `colorball-N-X`, `doors-N` and `kitchen-lite`.
impl FromStr for BenchmarkSpec {
    type Err = BenchmarkError;

    fn from_str(s: &str) -> Result<Self, BenchmarkError> {
        let parts: Vec<&str> = s.split('-').collect();
        let num = |p: &str| {
            p.parse::<usize>()
                .map_err(|_| BenchmarkError::InvalidSize(format!("{p} is not a size")))
        };
        match parts.as_slice() {
            ["bts", m] => Ok(BenchmarkSpec::Bts { m: num(m)? }),
            ["colorball", n, x] => Ok(BenchmarkSpec::Colorball {
                n: num(n)?,
                balls: num(x)?,
            }),
            ["doors", n] => Ok(BenchmarkSpec::Doors { n: num(n)? }),
            ["kitchen", "lite"] => Ok(BenchmarkSpec::KitchenLite),
            _ => Err(BenchmarkError::UnknownFamily(s.to_string())),
        }
    }
}

fn cell(r: usize, c: usize) -> String {
    format!("c{r}_{c}")
}

fn list(items: &[String]) -> String {
    format!("{{ {} }}", items.join(", "))
}

/// Bomb in the toilet without clogging: `m` packages, exactly one holds
/// the bomb, dunking the right one disarms it.
pub fn gen_bts(m: usize) -> Result<String, BenchmarkError> {
    if m == 0 {
        return Err(BenchmarkError::InvalidSize("bts needs at least one package".into()));
    }
    let pkgs: Vec<String> = (1..=m).map(|k| format!("p{k}")).collect();
    let mut s = String::new();
    let _ = writeln!(s, "domain bts{m}");
    let _ = writeln!(s, "sort pkg = {}", list(&pkgs));
    s.push_str(
        "fluent has_bomb(pkg) : { true, false } partial
fluent armed : { true, false } full
constraint exactly 1 { has_bomb(P)=true : P in pkg }
action dunk(P: pkg)
  pre has_bomb(P) = true
  eff armed := false
sense probe(P: pkg) -> has_bomb(P)
  pre armed = true
option concurrency off
",
    );
    let _ = writeln!(s, "\nproblem bts{m}");
    s.push_str("init armed = true\ngoal armed = false\n");
    Ok(s)
}

fn adjacency(n: usize, cells: impl Fn(usize, usize) -> bool) -> Vec<(String, String)> {
    let mut out = Vec::new();
    for r in 0..n {
        for c in 0..n {
            if !cells(r, c) {
                continue;
            }
            let mut near = Vec::new();
            if r > 0 {
                near.push((r - 1, c));
            }
            if c > 0 {
                near.push((r, c - 1));
            }
            if c + 1 < n {
                near.push((r, c + 1));
            }
            if r + 1 < n {
                near.push((r + 1, c));
            }
            for (r2, c2) in near {
                if cells(r2, c2) {
                    out.push((cell(r, c), cell(r2, c2)));
                }
            }
        }
    }
    out
}

/// An `n`×`n` grid with `balls` balls of unknown location and color. Balls
/// are observed only from their own cell and are disposed of in the box of
/// their color; all boxes stand at `c0_0`, where the agent starts.
pub fn gen_colorball(n: usize, balls: usize) -> Result<String, BenchmarkError> {
    if n == 0 || balls == 0 {
        return Err(BenchmarkError::InvalidSize(
            "colorball needs a positive grid side and ball count".into(),
        ));
    }
    let cells: Vec<String> = (0..n).flat_map(|r| (0..n).map(move |c| cell(r, c))).collect();
    let ids: Vec<String> = (1..=balls).map(|k| format!("b{k}")).collect();
    let mut s = String::new();
    let _ = writeln!(s, "domain colorball{n}_{balls}");
    let _ = writeln!(s, "sort cell = {}", list(&cells));
    let _ = writeln!(s, "sort ball = {}", list(&ids));
    s.push_str("sort col = { red, green, blue }\n");
    s.push_str("relation adj(cell, cell)\nrelation box(cell, col)\n");
    for (a, b) in adjacency(n, |_, _| true) {
        let _ = writeln!(s, "fact adj({a}, {b})");
    }
    for c in ["red", "green", "blue"] {
        let _ = writeln!(s, "fact box(c0_0, {c})");
    }
    s.push_str(
        "fluent agent : cell full
fluent hand : ball | { empty } full
fluent in(ball, cell) : { yes, no } partial
fluent color(ball) : col partial
fluent trashed(ball) : { true, false } full
constraint exactly 1 { in(B, C)=yes : C in cell ; hand=B ; trashed(B)=true } forall B in ball
action move(From: cell, To: cell)
  pre agent = From, adj(From, To)
  eff agent := To
action pickup(B: ball, C: cell)
  pre agent = C, in(B, C) = yes, hand = empty
  eff in(B, C) := no, hand := B
action trash(B: ball, C: cell, K: col)
  pre agent = C, box(C, K), hand = B, color(B) = K
  eff hand := empty, trashed(B) := true
sense look(B: ball, C: cell) -> in(B, C)
  pre agent = C
sense checkcolor(B: ball, C: cell) -> color(B)
  pre agent = C, in(B, C) = yes
redundant color(B) if trashed(B) = true
redundant in(B, C) if trashed(B) = true
option concurrency off
",
    );
    let _ = writeln!(s, "\nproblem colorball{n}_{balls}");
    s.push_str("init agent = c0_0\ninit hand = empty\n");
    for b in &ids {
        let _ = writeln!(s, "init trashed({b}) = false");
    }
    let goal: Vec<String> = ids.iter().map(|b| format!("trashed({b}) = true")).collect();
    let _ = writeln!(s, "goal {}", goal.join(", "));
    Ok(s)
}

/// An `n`×`n` grid whose odd columns are walls with exactly one hidden open
/// door each. Corridor moves are checked with `grid_path`; a door is sensed
/// from a cell next to it.
pub fn gen_doors(n: usize) -> Result<String, BenchmarkError> {
    if n < 3 || n.is_multiple_of(2) {
        return Err(BenchmarkError::InvalidSize(format!(
            "doors needs an odd side of at least 3, got {n}"
        )));
    }
    let is_wall = |c: usize| c % 2 == 1;
    let free: Vec<String> = (0..n)
        .flat_map(|r| (0..n).filter(move |&c| !is_wall(c)).map(move |c| cell(r, c)))
        .collect();
    let walls: Vec<usize> = (0..n).filter(|&c| is_wall(c)).collect();
    let doors: Vec<String> = (0..n).flat_map(|r| walls.iter().map(move |&c| cell(r, c))).collect();
    let mut s = String::new();
    let _ = writeln!(s, "domain doors{n}");
    let _ = writeln!(s, "sort free = {}", list(&free));
    let _ = writeln!(s, "sort door = {}", list(&doors));
    for &c in &walls {
        let col: Vec<String> = (0..n).map(|r| cell(r, c)).collect();
        let _ = writeln!(s, "sort wall{c} = {}", list(&col));
    }
    let blocked: Vec<String> = (0..n).flat_map(|r| walls.iter().map(move |&c| cell(r, c))).collect();
    let _ = writeln!(s, "grid {n} {n} blocked {}", list(&blocked));
    s.push_str("relation beside(free, door)\nrelation passage(free, door, free)\n");
    for r in 0..n {
        for &c in &walls {
            let (d, left, right) = (cell(r, c), cell(r, c - 1), cell(r, c + 1));
            let _ = writeln!(s, "fact beside({left}, {d})");
            let _ = writeln!(s, "fact beside({right}, {d})");
            let _ = writeln!(s, "fact passage({left}, {d}, {right})");
            let _ = writeln!(s, "fact passage({right}, {d}, {left})");
        }
    }
    s.push_str("fluent agent : free full\nfluent open(door) : { yes, no } partial\n");
    for &c in &walls {
        let _ = writeln!(s, "constraint exactly 1 {{ open(D)=yes : D in wall{c} }}");
    }
    s.push_str(
        "action move(From: free, To: free)
  pre agent = From, From != To
  eff agent := To
feasible-guard move(From, To) uses grid_path(From, To)
action pass(From: free, D: door, To: free)
  pre agent = From, passage(From, D, To), open(D) = yes
  eff agent := To
sense checkdoor(From: free, D: door) -> open(D)
  pre agent = From, beside(From, D)
option concurrency off
",
    );
    let _ = writeln!(s, "\nproblem doors{n}");
    s.push_str("init agent = c0_0\n");
    let _ = writeln!(s, "goal agent = {}", cell(n - 1, n - 1));
    Ok(s)
}
