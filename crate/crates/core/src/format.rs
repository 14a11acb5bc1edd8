//! Line-oriented text format for games, constraints and strategies.
//!
//! ```text
//! game <name>
//! actionsA: a0 a1 ...
//! actionsB: b0 b1 ...
//! states: q0 q1 ...          # the first state is initial
//! colors: c0 c1 ...
//! edge <q> <a> <b> -> <q'> : <color>
//! weight <color> <rational>
//! win safety avoid=<c,...> | win reach target=<c,...> | win buchi target=<c,...>
//! win submuller {<c,...>};{<c,...>} | win energy | win conj <i> <j> ...
//! constraint key <builtin>
//! constraint intersect <name> <constraint> <constraint> ...
//! constraint two-tape <name>
//!   states: s0 s1 ...        # the first state is initial
//!   accepting: s0 ...
//!   trans <s> <a>,<b> <a>,<b> -> <s'>     # `_` matches any action
//! end
//! strategy mealy <name>
//!   memory: m0 m1 ...
//!   init: m0
//!   act <m> -> <a>
//!   update <m> <b> -> <m'>                # `_` matches any action
//! end
//! ```
//!
//! `win` lines are numbered from 0 and `conj` refers to earlier ones; the
//! last `win` line is the game's winning condition. When several `trans`
//! patterns match, the one with the most explicit components is used.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use crate::constraint::{
    energy_constraint, energy_level_constraint, equality, first_b_then_a_sum, intersect, isolate_first_b,
    multiset_state_constraint, p1_action_sum, state_color_constraint, universal_time_aware, Constraint, StateColorMode,
    TwoTapeDfa,
};
use crate::error::{Error, Result};
use crate::game::{Arena, Letter, Rational};
use crate::strategy::MealyStrategy;
use crate::wincond::WinCond;

/// Names of the built-in key constraints accepted by `constraint key`.
pub const BUILTINS: &[&str] = &[
    "state-color-seq",
    "state-color-current",
    "multiset-state",
    "energy",
    "energy-level",
    "universal-time-aware",
    "equality",
    "p1-action-sum",
    "p1-action-sum-untimed",
    "first-b-then-a-sum",
    "isolate-first-b=<action>",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConstraintSpec {
    Builtin(String),
    TwoTape(TwoTapeDfa),
    Intersect(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintDecl {
    pub name: String,
    pub spec: ConstraintSpec,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameFile {
    pub arena: Arena,
    pub wins: Vec<WinCond>,
    pub constraints: Vec<ConstraintDecl>,
    pub strategies: Vec<(String, MealyStrategy)>,
}

impl GameFile {
    pub fn name(&self) -> &str {
        &self.arena.name
    }

    /// The game's winning condition (the last `win` line).
    pub fn win(&self) -> &WinCond {
        self.wins.last().expect("parsed games have a winning condition")
    }

    pub fn constraint(&self, name: &str) -> Result<Constraint> {
        let decl = self
            .constraints
            .iter()
            .find(|d| d.name == name)
            .ok_or_else(|| Error::Input(format!("no constraint '{name}' in game '{}'", self.name())))?;
        match &decl.spec {
            ConstraintSpec::Builtin(b) => builtin_constraint(&self.arena, b),
            ConstraintSpec::TwoTape(d) => Ok(Constraint::TwoTape(d.clone())),
            ConstraintSpec::Intersect(parts) => {
                let cs = parts.iter().map(|p| self.constraint(p)).collect::<Result<Vec<_>>>()?;
                let mut c = intersect(cs)?;
                if let Constraint::TwoTape(d) = &mut c {
                    d.name = decl.name.clone();
                }
                Ok(c)
            }
        }
    }

    pub fn strategy(&self, name: &str) -> Result<&MealyStrategy> {
        self.strategies
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, m)| m)
            .ok_or_else(|| Error::Input(format!("no strategy '{name}' in game '{}'", self.name())))
    }
}

/// Builds a named built-in constraint for `arena`.
pub fn builtin_constraint(arena: &Arena, name: &str) -> Result<Constraint> {
    let alph = arena.alphabet();
    Ok(match name {
        "state-color-seq" => state_color_constraint(arena, StateColorMode::FullSequence).into(),
        "state-color-current" => state_color_constraint(arena, StateColorMode::CurrentState).into(),
        "multiset-state" => multiset_state_constraint(arena).into(),
        "energy" => energy_constraint(arena)?.into(),
        "energy-level" => energy_level_constraint(arena)?.into(),
        "universal-time-aware" => universal_time_aware(alph).into(),
        "equality" => equality(alph).into(),
        "p1-action-sum" => p1_action_sum(true).into(),
        "p1-action-sum-untimed" => p1_action_sum(false).into(),
        "first-b-then-a-sum" => first_b_then_a_sum().into(),
        other => match other.strip_prefix("isolate-first-b=") {
            Some(b) => {
                let idx = arena
                    .actions_b
                    .iter()
                    .position(|x| x == b)
                    .ok_or_else(|| Error::Input(format!("unknown Player 2 action '{b}'")))?;
                isolate_first_b(idx).into()
            }
            None => return Err(Error::Input(format!("unknown built-in constraint '{other}'"))),
        },
    })
}

fn perr<T>(line: usize, msg: impl Into<String>) -> Result<T> {
    Err(Error::Parse { line, msg: msg.into() })
}

fn index_of(names: &[String], s: &str, what: &str, line: usize) -> Result<usize> {
    names.iter().position(|n| n == s).map_or_else(|| perr(line, format!("unknown {what} '{s}'")), Ok)
}

struct Lines<'a> {
    lines: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        let lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap().trim()))
            .filter(|(_, l)| !l.is_empty())
            .collect();
        Lines { lines, pos: 0 }
    }

    fn next(&mut self) -> Option<(usize, &'a str)> {
        let l = self.lines.get(self.pos).copied();
        self.pos += 1;
        l
    }
}

fn list_after<'a>(line: &'a str, key: &str) -> Option<Vec<&'a str>> {
    line.strip_prefix(key).map(|rest| rest.split_whitespace().collect())
}

#[derive(Default)]
struct Header {
    name: Option<String>,
    actions_a: Option<Vec<String>>,
    actions_b: Option<Vec<String>>,
    states: Option<Vec<String>>,
    colors: Option<Vec<String>>,
}

fn owned(v: Vec<&str>) -> Vec<String> {
    v.into_iter().map(String::from).collect()
}

fn require<'h>(v: &'h Option<Vec<String>>, what: &str, line: usize) -> Result<&'h Vec<String>> {
    v.as_ref().map_or_else(|| perr(line, format!("'{what}' must be declared before this line")), Ok)
}

/// Parses a game file.
pub fn parse_game(text: &str) -> Result<GameFile> {
    let mut lines = Lines::new(text);
    let mut h = Header::default();
    let mut edges: HashMap<(usize, usize, usize), (usize, usize)> = HashMap::new();
    let mut weights: HashMap<usize, Rational> = HashMap::new();
    let mut wins: Vec<WinCond> = Vec::new();
    let mut constraints: Vec<ConstraintDecl> = Vec::new();
    let mut strategies: Vec<(String, MealyStrategy)> = Vec::new();
    let mut last_line = 0;
    // arena once all edges are known; built lazily for constraint validation
    let mut arena_cache: Option<Arena> = None;

    while let Some((ln, line)) = lines.next() {
        last_line = ln;
        let mut words = line.split_whitespace();
        let head = words.next().unwrap();
        if matches!(head, "game" | "edge" | "weight") || head.ends_with(':') {
            arena_cache = None;
        }
        match head {
            "game" => {
                let name: Vec<&str> = words.collect();
                if name.len() != 1 {
                    return perr(ln, "expected 'game <name>'");
                }
                h.name = Some(name[0].to_string());
            }
            "actionsA:" => h.actions_a = Some(owned(list_after(line, "actionsA:").unwrap())),
            "actionsB:" => h.actions_b = Some(owned(list_after(line, "actionsB:").unwrap())),
            "states:" => h.states = Some(owned(list_after(line, "states:").unwrap())),
            "colors:" => h.colors = Some(owned(list_after(line, "colors:").unwrap())),
            "edge" => {
                let toks: Vec<&str> = words.collect();
                if toks.len() != 7 || toks[3] != "->" || toks[5] != ":" {
                    return perr(ln, "expected 'edge <q> <a> <b> -> <q2> : <color>'");
                }
                let q = index_of(require(&h.states, "states:", ln)?, toks[0], "state", ln)?;
                let a = index_of(require(&h.actions_a, "actionsA:", ln)?, toks[1], "Player 1 action", ln)?;
                let b = index_of(require(&h.actions_b, "actionsB:", ln)?, toks[2], "Player 2 action", ln)?;
                let t = index_of(require(&h.states, "states:", ln)?, toks[4], "state", ln)?;
                let c = index_of(require(&h.colors, "colors:", ln)?, toks[6], "color", ln)?;
                if edges.insert((q, a, b), (t, c)).is_some() {
                    return perr(ln, format!("duplicate edge for ({} {} {})", toks[0], toks[1], toks[2]));
                }
            }
            "weight" => {
                let toks: Vec<&str> = words.collect();
                if toks.len() != 2 {
                    return perr(ln, "expected 'weight <color> <rational>'");
                }
                let c = index_of(require(&h.colors, "colors:", ln)?, toks[0], "color", ln)?;
                let w: Rational = toks[1].parse().map_err(|_| Error::Parse { line: ln, msg: format!("bad rational '{}'", toks[1]) })?;
                if weights.insert(c, w).is_some() {
                    return perr(ln, format!("duplicate weight for color '{}'", toks[0]));
                }
            }
            "win" => {
                let colors = require(&h.colors, "colors:", ln)?;
                let w = parse_win(line.strip_prefix("win").unwrap().trim(), colors, &wins, ln)?;
                wins.push(w);
            }
            "constraint" => {
                let arena = match &arena_cache {
                    Some(a) => a.clone(),
                    None => {
                        let a = build_arena(&h, &edges, &weights, ln)?;
                        arena_cache = Some(a.clone());
                        a
                    }
                };
                let toks: Vec<&str> = words.collect();
                let decl = match toks.first().copied() {
                    Some("key") if toks.len() == 2 => {
                        builtin_constraint(&arena, toks[1]).map_err(|e| Error::Parse { line: ln, msg: e.to_string() })?;
                        ConstraintDecl { name: toks[1].to_string(), spec: ConstraintSpec::Builtin(toks[1].to_string()) }
                    }
                    Some("intersect") if toks.len() >= 3 => {
                        for p in &toks[2..] {
                            if !constraints.iter().any(|d| d.name == *p) {
                                return perr(ln, format!("unknown constraint '{p}'"));
                            }
                        }
                        ConstraintDecl {
                            name: toks[1].to_string(),
                            spec: ConstraintSpec::Intersect(toks[2..].iter().map(|s| s.to_string()).collect()),
                        }
                    }
                    Some("two-tape") if toks.len() == 2 => {
                        let d = parse_two_tape(&mut lines, toks[1], &arena, ln)?;
                        ConstraintDecl { name: toks[1].to_string(), spec: ConstraintSpec::TwoTape(d) }
                    }
                    _ => return perr(ln, "expected 'constraint key <builtin>', 'constraint intersect <name> <c>...' or 'constraint two-tape <name>'"),
                };
                if constraints.iter().any(|d| d.name == decl.name) {
                    return perr(ln, format!("duplicate constraint '{}'", decl.name));
                }
                constraints.push(decl);
            }
            "strategy" => {
                let toks: Vec<&str> = words.collect();
                if toks.len() != 2 || toks[0] != "mealy" {
                    return perr(ln, "expected 'strategy mealy <name>'");
                }
                let arena = build_arena(&h, &edges, &weights, ln)?;
                let m = parse_mealy(&mut lines, &arena, ln)?;
                if strategies.iter().any(|(n, _)| n == toks[1]) {
                    return perr(ln, format!("duplicate strategy '{}'", toks[1]));
                }
                strategies.push((toks[1].to_string(), m));
            }
            other => return perr(ln, format!("unknown directive '{other}'")),
        }
    }
    let arena = build_arena(&h, &edges, &weights, last_line)?;
    if wins.is_empty() {
        return perr(last_line, "missing 'win' line");
    }
    for w in &wins {
        w.validate(&arena).map_err(|e| Error::Parse { line: last_line, msg: e.to_string() })?;
    }
    Ok(GameFile { arena, wins, constraints, strategies })
}

fn build_arena(
    h: &Header,
    edges: &HashMap<(usize, usize, usize), (usize, usize)>,
    weights: &HashMap<usize, Rational>,
    ln: usize,
) -> Result<Arena> {
    let name = h.name.clone().map_or_else(|| perr(ln, "missing 'game <name>'"), Ok)?;
    let aa = require(&h.actions_a, "actionsA:", ln)?;
    let ab = require(&h.actions_b, "actionsB:", ln)?;
    let st = require(&h.states, "states:", ln)?;
    let co = require(&h.colors, "colors:", ln)?;
    let mut delta = Vec::new();
    let mut col = Vec::new();
    for q in 0..st.len() {
        for a in 0..aa.len() {
            for b in 0..ab.len() {
                match edges.get(&(q, a, b)) {
                    Some(&(t, c)) => {
                        delta.push(t);
                        col.push(c);
                    }
                    None => return perr(ln, format!("missing edge for ({} {} {})", st[q], aa[a], ab[b])),
                }
            }
        }
    }
    let w = if weights.is_empty() {
        None
    } else {
        let mut w = Vec::new();
        for (c, name) in co.iter().enumerate() {
            match weights.get(&c) {
                Some(x) => w.push(*x),
                None => return perr(ln, format!("missing weight for color '{name}'")),
            }
        }
        Some(w)
    };
    Arena::from_tables(name, aa.clone(), ab.clone(), st.clone(), 0, co.clone(), delta, col, w)
        .map_err(|e| Error::Parse { line: ln, msg: e.to_string() })
}

fn color_set(s: &str, colors: &[String], ln: usize) -> Result<BTreeSet<usize>> {
    s.split(',').filter(|x| !x.is_empty()).map(|c| index_of(colors, c, "color", ln)).collect()
}

fn parse_win(rest: &str, colors: &[String], earlier: &[WinCond], ln: usize) -> Result<WinCond> {
    let (kind, arg) = rest.split_once(char::is_whitespace).map_or((rest, ""), |(k, a)| (k, a.trim()));
    match kind {
        "safety" => match arg.strip_prefix("avoid=") {
            Some(cs) => Ok(WinCond::Safety { avoid: color_set(cs, colors, ln)? }),
            None => perr(ln, "expected 'win safety avoid=<colors>'"),
        },
        "reach" => match arg.strip_prefix("target=") {
            Some(cs) => Ok(WinCond::Reach { target: color_set(cs, colors, ln)? }),
            None => perr(ln, "expected 'win reach target=<colors>'"),
        },
        "buchi" => match arg.strip_prefix("target=") {
            Some(cs) => Ok(WinCond::Buchi { target: color_set(cs, colors, ln)? }),
            None => perr(ln, "expected 'win buchi target=<colors>'"),
        },
        "submuller" => {
            let mut family = Vec::new();
            for part in arg.split(';') {
                let inner = part.trim().strip_prefix('{').and_then(|p| p.strip_suffix('}'));
                match inner {
                    Some(cs) => family.push(color_set(cs, colors, ln)?),
                    None => return perr(ln, "expected 'win submuller {c,...};{c,...}'"),
                }
            }
            Ok(WinCond::SubMuller { family })
        }
        "energy" if arg.is_empty() => Ok(WinCond::Energy),
        "conj" => {
            let mut parts = Vec::new();
            for t in arg.split_whitespace() {
                let i: usize = t.parse().map_err(|_| Error::Parse { line: ln, msg: format!("bad win index '{t}'") })?;
                match earlier.get(i) {
                    Some(w) => parts.push(w.clone()),
                    None => return perr(ln, format!("win index {i} does not refer to an earlier win line")),
                }
            }
            if parts.is_empty() {
                return perr(ln, "conj needs at least one win index");
            }
            Ok(WinCond::Conj(parts))
        }
        _ => perr(ln, format!("unknown winning condition '{rest}'")),
    }
}

type Pattern = (Option<usize>, Option<usize>);

fn parse_pattern(s: &str, arena: &Arena, ln: usize) -> Result<Pattern> {
    let (a, b) = s.split_once(',').map_or_else(|| perr(ln, format!("expected '<a>,<b>' but found '{s}'")), Ok)?;
    let a = if a == "_" { None } else { Some(index_of(&arena.actions_a, a, "Player 1 action", ln)?) };
    let b = if b == "_" { None } else { Some(index_of(&arena.actions_b, b, "Player 2 action", ln)?) };
    Ok((a, b))
}

fn matches(p: Pattern, l: Letter) -> bool {
    p.0.is_none_or(|a| a == l.a) && p.1.is_none_or(|b| b == l.b)
}

fn specificity(p: Pattern, q: Pattern) -> usize {
    [p.0.is_some(), p.1.is_some(), q.0.is_some(), q.1.is_some()].iter().filter(|&&x| x).count()
}

fn parse_two_tape(lines: &mut Lines, name: &str, arena: &Arena, start: usize) -> Result<TwoTapeDfa> {
    let mut states: Option<Vec<String>> = None;
    let mut accepting: Vec<String> = Vec::new();
    let mut rules: Vec<(usize, usize, Pattern, Pattern, usize)> = Vec::new();
    loop {
        let Some((ln, line)) = lines.next() else { return perr(start, format!("two-tape block '{name}' lacks 'end'")) };
        if line == "end" {
            break;
        }
        if let Some(v) = list_after(line, "states:") {
            states = Some(owned(v));
        } else if let Some(v) = list_after(line, "accepting:") {
            accepting = owned(v);
        } else if let Some(rest) = line.strip_prefix("trans ") {
            let st = require(&states, "states:", ln)?;
            let toks: Vec<&str> = rest.split_whitespace().collect();
            if toks.len() != 5 || toks[3] != "->" {
                return perr(ln, "expected 'trans <s> <a>,<b> <a>,<b> -> <s2>'");
            }
            let q = index_of(st, toks[0], "automaton state", ln)?;
            let p1 = parse_pattern(toks[1], arena, ln)?;
            let p2 = parse_pattern(toks[2], arena, ln)?;
            let t = index_of(st, toks[4], "automaton state", ln)?;
            rules.push((ln, q, p1, p2, t));
        } else {
            return perr(ln, format!("unexpected line in two-tape block: '{line}'"));
        }
    }
    let st = require(&states, "states:", start)?.clone();
    let acc: Vec<bool> = {
        let mut acc = vec![false; st.len()];
        for a in &accepting {
            acc[index_of(&st, a, "automaton state", start)?] = true;
        }
        acc
    };
    let alph = arena.alphabet();
    let l = alph.num_letters();
    let mut delta = Vec::with_capacity(st.len() * l * l);
    for q in 0..st.len() {
        for x in alph.letters() {
            for y in alph.letters() {
                let mut best: Option<(usize, usize, usize)> = None;
                for &(ln, rq, p1, p2, t) in &rules {
                    if rq != q || !matches(p1, x) || !matches(p2, y) {
                        continue;
                    }
                    let sp = specificity(p1, p2);
                    match best {
                        Some((bsp, bt, bln)) if bsp == sp && bt != t => {
                            return perr(ln, format!("transition conflicts with line {bln} on state '{}' reading {x} {y}", st[q]))
                        }
                        Some((bsp, _, _)) if bsp >= sp => {}
                        _ => best = Some((sp, t, ln)),
                    }
                }
                match best {
                    Some((_, t, _)) => delta.push(t),
                    None => return perr(start, format!("two-tape '{name}': no transition from '{}' reading {x} {y}", st[q])),
                }
            }
        }
    }
    TwoTapeDfa::new(name, alph, 0, acc, delta)
        .and_then(|d| d.with_labels(st))
        .map_err(|e| Error::Parse { line: start, msg: e.to_string() })
}

fn parse_mealy(lines: &mut Lines, arena: &Arena, start: usize) -> Result<MealyStrategy> {
    let mut memory: Option<Vec<String>> = None;
    let mut init: Option<usize> = None;
    let mut act: HashMap<usize, usize> = HashMap::new();
    let mut explicit: HashMap<(usize, usize), usize> = HashMap::new();
    let mut wildcard: HashMap<usize, usize> = HashMap::new();
    loop {
        let Some((ln, line)) = lines.next() else { return perr(start, "strategy block lacks 'end'") };
        if line == "end" {
            break;
        }
        if let Some(v) = list_after(line, "memory:") {
            memory = Some(owned(v));
        } else if let Some(v) = list_after(line, "init:") {
            let mem = require(&memory, "memory:", ln)?;
            if v.len() != 1 {
                return perr(ln, "expected 'init: <m>'");
            }
            init = Some(index_of(mem, v[0], "memory state", ln)?);
        } else if let Some(rest) = line.strip_prefix("act ") {
            let mem = require(&memory, "memory:", ln)?;
            let toks: Vec<&str> = rest.split_whitespace().collect();
            if toks.len() != 3 || toks[1] != "->" {
                return perr(ln, "expected 'act <m> -> <a>'");
            }
            let m = index_of(mem, toks[0], "memory state", ln)?;
            let a = index_of(&arena.actions_a, toks[2], "Player 1 action", ln)?;
            if act.insert(m, a).is_some() {
                return perr(ln, format!("duplicate act for '{}'", toks[0]));
            }
        } else if let Some(rest) = line.strip_prefix("update ") {
            let mem = require(&memory, "memory:", ln)?;
            let toks: Vec<&str> = rest.split_whitespace().collect();
            if toks.len() != 4 || toks[2] != "->" {
                return perr(ln, "expected 'update <m> <b> -> <m2>'");
            }
            let m = index_of(mem, toks[0], "memory state", ln)?;
            let t = index_of(mem, toks[3], "memory state", ln)?;
            let dup = if toks[1] == "_" {
                wildcard.insert(m, t).is_some()
            } else {
                let b = index_of(&arena.actions_b, toks[1], "Player 2 action", ln)?;
                explicit.insert((m, b), t).is_some()
            };
            if dup {
                return perr(ln, format!("duplicate update for '{} {}'", toks[0], toks[1]));
            }
        } else {
            return perr(ln, format!("unexpected line in strategy block: '{line}'"));
        }
    }
    let mem = require(&memory, "memory:", start)?.clone();
    let init = init.map_or_else(|| perr(start, "strategy block lacks 'init:'"), Ok)?;
    let nb = arena.actions_b.len();
    let mut acts = Vec::new();
    let mut upd = Vec::new();
    for (m, label) in mem.iter().enumerate() {
        acts.push(*act.get(&m).map_or_else(|| perr(start, format!("no act for memory state '{label}'")), Ok)?);
        for b in 0..nb {
            let t = explicit.get(&(m, b)).or_else(|| wildcard.get(&m));
            upd.push(*t.map_or_else(|| perr(start, format!("no update for '{label} {}'", arena.actions_b[b])), Ok)?);
        }
    }
    MealyStrategy::new(arena.alphabet(), init, acts, upd)
        .and_then(|s| s.with_labels(mem))
        .map_err(|e| Error::Parse { line: start, msg: e.to_string() })
}

fn color_names(arena: &Arena, s: &BTreeSet<usize>) -> String {
    s.iter().map(|&c| arena.colors[c].as_str()).collect::<Vec<_>>().join(",")
}

/// Writes `wins` so that `conj` lines refer to the preceding lines.
fn write_wins(out: &mut String, arena: &Arena, wins: &[WinCond]) {
    let mut written: Vec<WinCond> = Vec::new();
    fn emit(out: &mut String, arena: &Arena, w: &WinCond, written: &mut Vec<WinCond>) -> usize {
        if let Some(i) = written.iter().position(|x| x == w) {
            return i;
        }
        let line = match w {
            WinCond::Safety { avoid } => format!("win safety avoid={}", color_names(arena, avoid)),
            WinCond::Reach { target } => format!("win reach target={}", color_names(arena, target)),
            WinCond::Buchi { target } => format!("win buchi target={}", color_names(arena, target)),
            WinCond::SubMuller { family } => {
                let sets: Vec<String> = family.iter().map(|s| format!("{{{}}}", color_names(arena, s))).collect();
                format!("win submuller {}", sets.join(";"))
            }
            WinCond::Energy => "win energy".into(),
            WinCond::Conj(ws) => {
                let idx: Vec<String> = ws.iter().map(|x| emit(out, arena, x, written).to_string()).collect();
                format!("win conj {}", idx.join(" "))
            }
        };
        let _ = writeln!(out, "{line}");
        written.push(w.clone());
        written.len() - 1
    }
    for w in wins {
        emit(out, arena, w, &mut written);
    }
    // the game's condition must come last
    if written.last() != wins.last() {
        let last = wins.last().unwrap();
        let i = written.iter().position(|x| x == last).unwrap();
        let _ = writeln!(out, "win conj {i}");
    }
}

/// Serializes a game file; [`parse_game`] reads it back to an equal value
/// (up to a trailing one-element `conj` when win lines had to be reordered).
pub fn serialize_game(g: &GameFile) -> String {
    let a = &g.arena;
    let mut out = String::new();
    let _ = writeln!(out, "game {}", a.name);
    let _ = writeln!(out, "actionsA: {}", a.actions_a.join(" "));
    let _ = writeln!(out, "actionsB: {}", a.actions_b.join(" "));
    // the initial state is listed first by construction
    let _ = writeln!(out, "states: {}", a.states.join(" "));
    let _ = writeln!(out, "colors: {}", a.colors.join(" "));
    for q in 0..a.num_states() {
        for x in 0..a.actions_a.len() {
            for y in 0..a.actions_b.len() {
                let _ = writeln!(
                    out,
                    "edge {} {} {} -> {} : {}",
                    a.states[q],
                    a.actions_a[x],
                    a.actions_b[y],
                    a.states[a.next(q, x, y)],
                    a.colors[a.color(q, x, y)]
                );
            }
        }
    }
    if let Some(ws) = a.weights() {
        for (c, w) in ws.iter().enumerate() {
            let _ = writeln!(out, "weight {} {}", a.colors[c], w);
        }
    }
    write_wins(&mut out, a, &g.wins);
    for d in &g.constraints {
        match &d.spec {
            ConstraintSpec::Builtin(b) => {
                let _ = writeln!(out, "constraint key {b}");
            }
            ConstraintSpec::Intersect(parts) => {
                let _ = writeln!(out, "constraint intersect {} {}", d.name, parts.join(" "));
            }
            ConstraintSpec::TwoTape(dfa) => write_two_tape(&mut out, a, dfa),
        }
    }
    for (name, m) in &g.strategies {
        write_mealy(&mut out, a, name, m);
    }
    out
}

fn letter_name(a: &Arena, l: Letter) -> String {
    format!("{},{}", a.actions_a[l.a], a.actions_b[l.b])
}

fn write_two_tape(out: &mut String, a: &Arena, d: &TwoTapeDfa) {
    let _ = writeln!(out, "constraint two-tape {}", d.name);
    // the initial state goes first
    let mut order: Vec<usize> = (0..d.num_states()).collect();
    order.retain(|&q| q != d.init());
    order.insert(0, d.init());
    let lab = d.labels();
    let _ = writeln!(out, "  states: {}", order.iter().map(|&q| lab[q].as_str()).collect::<Vec<_>>().join(" "));
    let acc: Vec<&str> = order.iter().filter(|&&q| d.is_accepting(q)).map(|&q| lab[q].as_str()).collect();
    let _ = writeln!(out, "  accepting: {}", acc.join(" "));
    let alph = d.alphabet();
    for &q in &order {
        let targets: Vec<(Letter, Letter, usize)> =
            alph.letters().flat_map(|x| alph.letters().map(move |y| (x, y))).map(|(x, y)| (x, y, d.next(q, x, y))).collect();
        let mut counts: HashMap<usize, usize> = HashMap::new();
        for &(_, _, t) in &targets {
            *counts.entry(t).or_default() += 1;
        }
        let default = *counts.iter().max_by_key(|&(t, c)| (*c, std::cmp::Reverse(*t))).unwrap().0;
        let _ = writeln!(out, "  trans {} _,_ _,_ -> {}", lab[q], lab[default]);
        for (x, y, t) in targets {
            if t != default {
                let _ = writeln!(out, "  trans {} {} {} -> {}", lab[q], letter_name(a, x), letter_name(a, y), lab[t]);
            }
        }
    }
    let _ = writeln!(out, "end");
}

/// A `strategy mealy` block for `m`, readable by [`parse_game`].
pub fn mealy_block(a: &Arena, name: &str, m: &MealyStrategy) -> String {
    let mut out = String::new();
    write_mealy(&mut out, a, name, m);
    out
}

fn write_mealy(out: &mut String, a: &Arena, name: &str, m: &MealyStrategy) {
    let lab = m.labels();
    let _ = writeln!(out, "strategy mealy {name}");
    let _ = writeln!(out, "  memory: {}", lab.join(" "));
    let _ = writeln!(out, "  init: {}", lab[m.init()]);
    let nb = a.actions_b.len();
    for x in 0..m.num_memory() {
        let _ = writeln!(out, "  act {} -> {}", lab[x], a.actions_a[m.action(x)]);
    }
    for x in 0..m.num_memory() {
        let first = m.update(x, 0);
        if (0..nb).all(|b| m.update(x, b) == first) {
            let _ = writeln!(out, "  update {} _ -> {}", lab[x], lab[first]);
        } else {
            for b in 0..nb {
                let _ = writeln!(out, "  update {} {} -> {}", lab[x], a.actions_b[b], lab[m.update(x, b)]);
            }
        }
    }
    let _ = writeln!(out, "end");
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "game tiny\nactionsA: a\nactionsB: b\nstates: q\ncolors: c\nedge q a b -> q : c\nwin safety avoid=\n";

    #[test]
    fn minimal_file() {
        let g = parse_game(MINIMAL).unwrap();
        assert_eq!(g.arena.num_states(), 1);
        assert_eq!(g.win(), &WinCond::Safety { avoid: BTreeSet::new() });
    }

    #[test]
    fn undeclared_color_names_line() {
        let text = MINIMAL.replace("-> q : c", "-> q : nope");
        assert!(matches!(parse_game(&text), Err(Error::Parse { line: 6, .. })));
    }

    #[test]
    fn missing_and_duplicate_edges() {
        let two = "game t\nactionsA: a\nactionsB: b0 b1\nstates: q\ncolors: c\nedge q a b0 -> q : c\nwin safety avoid=\n";
        let e = parse_game(two).unwrap_err();
        assert!(e.to_string().contains("missing edge"), "{e}");
        let dup = MINIMAL.replace("edge q a b -> q : c\n", "edge q a b -> q : c\nedge q a b -> q : c\n");
        assert!(matches!(parse_game(&dup), Err(Error::Parse { line: 7, .. })));
    }

    #[test]
    fn two_tape_and_mealy_blocks() {
        let text = "game g\nactionsA: x\nactionsB: 0 1\nstates: q\ncolors: c\nedge q x 0 -> q : c\nedge q x 1 -> q : c\nwin safety avoid=\n\
            constraint two-tape growing\n  states: q0 q1 q2\n  accepting: q0 q1\n  trans q0 _,_ _,_ -> q2\n  trans q0 _,0 _,0 -> q0\n  trans q0 _,1 _,1 -> q1\n\
            trans q1 _,_ _,_ -> q1\n  trans q2 _,_ _,_ -> q2\nend\n\
            strategy mealy s\n  memory: m0 m1\n  init: m0\n  act m0 -> x\n  act m1 -> x\n  update m0 _ -> m1\n  update m0 1 -> m0\n  update m1 _ -> m1\nend\n";
        let g = parse_game(text).unwrap();
        let c = g.constraint("growing").unwrap();
        let w = |bs: &[usize]| -> Vec<Letter> { bs.iter().map(|&b| Letter::new(0, b)).collect() };
        assert!(c.equiv(&w(&[0, 1, 0]), &w(&[0, 1, 1])));
        assert!(!c.equiv(&w(&[0, 0, 1]), &w(&[0, 1, 0])));
        let s = g.strategy("s").unwrap();
        assert_eq!(s.memory_after(&[1]), 0);
        assert_eq!(s.memory_after(&[0]), 1);
        let again = parse_game(&serialize_game(&g)).unwrap();
        assert_eq!(again, g);
    }

    #[test]
    fn conflicting_transitions() {
        let text = "game g\nactionsA: x\nactionsB: 0 1\nstates: q\ncolors: c\nedge q x 0 -> q : c\nedge q x 1 -> q : c\nwin safety avoid=\n\
            constraint two-tape bad\n  states: s t\n  accepting: s\n  trans s _,0 _,_ -> s\n  trans s _,_ _,0 -> t\n  trans s _,_ _,_ -> t\n  trans t _,_ _,_ -> t\nend\n";
        let e = parse_game(text).unwrap_err();
        assert!(e.to_string().contains("conflicts"), "{e}");
    }

    #[test]
    fn win_lines_and_weights() {
        let text = "game g\nactionsA: x\nactionsB: y\nstates: q\ncolors: r g\nedge q x y -> q : r\nweight r -1/2\nweight g 3\n\
            win submuller {r,g};{g}\nwin energy\nwin conj 0 1\nconstraint key multiset-state\nconstraint key energy\nconstraint intersect both multiset-state energy\n";
        let g = parse_game(text).unwrap();
        assert_eq!(g.wins.len(), 3);
        assert!(matches!(g.win(), WinCond::Conj(ws) if ws.len() == 2));
        assert_eq!(g.arena.weights().unwrap()[0], Rational::new(-1, 2));
        assert!(g.constraint("both").is_ok());
        assert_eq!(parse_game(&serialize_game(&g)).unwrap(), g);
        let partial = text.replace("weight g 3\n", "");
        assert!(parse_game(&partial).unwrap_err().to_string().contains("missing weight"));
    }

    #[test]
    fn unknown_builtin_rejected() {
        let text = format!("{MINIMAL}constraint key no-such-thing\n");
        assert!(matches!(parse_game(&text), Err(Error::Parse { line: 8, .. })));
    }
}
