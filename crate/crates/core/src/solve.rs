//! Solvers producing winning strategies, a brute-force strategy search, and
//! the search for maximal harmless constraints.

use std::collections::{BTreeSet, HashMap, HashSet};

use num_traits::{Signed, Zero};

use crate::constraint::{Constraint, KeyConstraint, UnionFind};
use crate::error::{input, Error, Result};
use crate::game::{words, Alphabet, Arena, History, Letter, Rational};
use crate::strategy::{enumerate_mealy, MealyStrategy};
use crate::wincond::{is_sim_strategy, verify_winning, WinCond};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Winner {
    Player1Wins,
    UnknownOrLoses,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub winner: Winner,
    pub strategy: Option<MealyStrategy>,
    /// Candidate machines examined (brute force only).
    pub examined: usize,
}

impl SolveResult {
    fn lost(examined: usize) -> Self {
        SolveResult { winner: Winner::UnknownOrLoses, strategy: None, examined }
    }
}

#[derive(Debug, Clone, Default)]
pub struct SolveOptions {
    /// Maximum credit considered by the energy solver; defaults to
    /// `|Q| · max|w| · |Q|`.
    pub energy_cap: Option<Rational>,
}

/// Solves the game in which Player 1 commits to an action before Player 2
/// answers, which Player 1 wins iff she wins the concurrent game.
///
/// Safety, reachability, Büchi and energy conditions are supported; the
/// returned strategy is positional, packaged as a Mealy machine whose memory
/// is the current arena state.
pub fn solve(arena: &Arena, w: &WinCond, opts: &SolveOptions) -> Result<SolveResult> {
    w.validate(arena)?;
    let choice = match w {
        WinCond::Safety { avoid } => safety(arena, avoid),
        WinCond::Reach { target } => reach(arena, target, &vec![true; arena.num_states()]).map(|(_, c)| c),
        WinCond::Buchi { target } => buchi(arena, target),
        WinCond::Energy => energy(arena, opts)?,
        WinCond::SubMuller { .. } | WinCond::Conj(_) => {
            return Err(Error::Unsupported("solve handles safety, reach, buchi and energy; use brute force".into()))
        }
    };
    let Some(choice) = choice else { return Ok(SolveResult::lost(0)) };
    let strategy = positional(arena, &choice)?;
    let verdict = verify_winning(arena, w, &strategy);
    if !verdict.holds {
        return Err(Error::Precondition(format!("solver produced a losing strategy: {:?}", verdict.witness)));
    }
    Ok(SolveResult { winner: Winner::Player1Wins, strategy: Some(strategy), examined: 0 })
}

/// Mealy machine playing `choice[q]` in arena state `q`, restricted to the
/// states it reaches.
pub fn positional(arena: &Arena, choice: &[usize]) -> Result<MealyStrategy> {
    let nb = arena.actions_b.len();
    let update: Vec<usize> = (0..arena.num_states()).flat_map(|q| (0..nb).map(move |b| arena.next(q, choice[q], b))).collect();
    let m = MealyStrategy::new(arena.alphabet(), arena.initial, choice.to_vec(), update)?.with_labels(arena.states.clone())?;
    Ok(m.restrict_reachable())
}

fn actions(arena: &Arena) -> (usize, usize) {
    (arena.actions_a.len(), arena.actions_b.len())
}

/// States from which Player 1 can avoid `avoid` forever, with a choice per state.
fn safety(arena: &Arena, avoid: &BTreeSet<usize>) -> Option<Vec<usize>> {
    let (na, nb) = actions(arena);
    let mut good = vec![true; arena.num_states()];
    let safe_action = |good: &[bool], q: usize| {
        (0..na).find(|&a| (0..nb).all(|b| !avoid.contains(&arena.color(q, a, b)) && good[arena.next(q, a, b)]))
    };
    loop {
        let next: Vec<bool> = (0..arena.num_states()).map(|q| good[q] && safe_action(&good, q).is_some()).collect();
        if next == good {
            break;
        }
        good = next;
    }
    if !good[arena.initial] {
        return None;
    }
    Some((0..arena.num_states()).map(|q| if good[q] { safe_action(&good, q).unwrap() } else { 0 }).collect())
}

/// Attractor to `target` edges staying inside `inside`; a state joins when
/// some action makes every answer either hit the target or move to a state
/// of lower rank. Returns the attractor and a rank-decreasing choice.
fn reach(arena: &Arena, target: &BTreeSet<usize>, inside: &[bool]) -> Option<(Vec<bool>, Vec<usize>)> {
    let (attr, choice) = attractor(arena, inside, |q, a, b, attr: &[bool]| {
        target.contains(&arena.color(q, a, b)) || attr[arena.next(q, a, b)]
    });
    attr[arena.initial].then_some((attr, choice))
}

fn attractor(arena: &Arena, inside: &[bool], ok: impl Fn(usize, usize, usize, &[bool]) -> bool) -> (Vec<bool>, Vec<usize>) {
    let (na, nb) = actions(arena);
    let n = arena.num_states();
    let mut attr = vec![false; n];
    let mut choice = vec![0; n];
    loop {
        let mut added = Vec::new();
        for q in (0..n).filter(|&q| inside[q] && !attr[q]) {
            if let Some(a) = (0..na).find(|&a| (0..nb).all(|b| ok(q, a, b, &attr))) {
                added.push((q, a));
            }
        }
        if added.is_empty() {
            return (attr, choice);
        }
        for (q, a) in added {
            attr[q] = true;
            choice[q] = a;
        }
    }
}

/// Greatest set X from which Player 1 can force a target edge back into X.
fn buchi(arena: &Arena, target: &BTreeSet<usize>) -> Option<Vec<usize>> {
    let n = arena.num_states();
    let mut x = vec![true; n];
    loop {
        let (y, choice) = attractor(arena, &x, |q, a, b, y: &[bool]| {
            let t = arena.next(q, a, b);
            (target.contains(&arena.color(q, a, b)) && x[t]) || y[t]
        });
        if y == x {
            return x[arena.initial].then_some(choice);
        }
        x = y;
    }
}

/// Minimal initial credits by value iteration; credits above the cap count
/// as infinite.
fn energy(arena: &Arena, opts: &SolveOptions) -> Result<Option<Vec<usize>>> {
    let (na, nb) = actions(arena);
    let n = arena.num_states();
    let weights = arena.weights().ok_or_else(|| Error::Input("energy condition needs weights".into()))?;
    let cap = opts.energy_cap.unwrap_or_else(|| {
        let max = weights.iter().map(|w| w.abs()).max().unwrap_or_else(Rational::zero);
        max * Rational::from_integer((n * n) as i64)
    });
    let step = |credit: &[Option<Rational>], q: usize, a: usize| -> Option<Rational> {
        let mut need = Rational::zero();
        for b in 0..nb {
            let c = credit[arena.next(q, a, b)]? - weights[arena.color(q, a, b)];
            if c > need {
                need = c;
            }
        }
        (need <= cap).then_some(need)
    };
    let best = |credit: &[Option<Rational>], q: usize| -> Option<(Rational, usize)> {
        (0..na).filter_map(|a| step(credit, q, a).map(|c| (c, a))).min_by(|x, y| x.0.cmp(&y.0).then(x.1.cmp(&y.1)))
    };
    let mut credit: Vec<Option<Rational>> = vec![Some(Rational::zero()); n];
    loop {
        let next: Vec<Option<Rational>> = (0..n).map(|q| best(&credit, q).map(|(c, _)| c)).collect();
        if next == credit {
            break;
        }
        credit = next;
    }
    if credit[arena.initial] != Some(Rational::zero()) {
        return Ok(None);
    }
    Ok(Some((0..n).map(|q| best(&credit, q).map_or(0, |(_, a)| a)).collect()))
}

/// Searches machines with at most `memory_bound` states for one that wins
/// (and is a `c`-strategy when `c` is given; key constraints are checked up
/// to `sim_horizon`). Exhaustion proves none exists within the bound.
pub fn brute_force_strategy(
    arena: &Arena,
    w: &WinCond,
    c: Option<&Constraint>,
    memory_bound: usize,
    budget: u128,
    sim_horizon: usize,
) -> Result<SolveResult> {
    w.validate(arena)?;
    let mut examined = 0;
    for m in enumerate_mealy(arena.alphabet(), memory_bound, budget)? {
        examined += 1;
        if !verify_winning(arena, w, &m).holds {
            continue;
        }
        if let Some(c) = c {
            if !is_sim_strategy(c, &m, sim_horizon).holds {
                continue;
            }
        }
        return Ok(SolveResult { winner: Winner::Player1Wins, strategy: Some(m), examined });
    }
    Ok(SolveResult::lost(examined))
}

/// How the initial classes of [`maximal_harmless`] are keyed (within each length).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Seed {
    /// By the strategy's output after the opponent part of the history.
    StrategyOutput,
    /// By the opponent part of the history.
    OpponentHistory,
}

impl std::str::FromStr for Seed {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "output" => Ok(Seed::StrategyOutput),
            "opponent" => Ok(Seed::OpponentHistory),
            other => input(format!("unknown seed '{other}' (output|opponent)")),
        }
    }
}

/// Outcome of a history in a game decided by the horizon.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Outcome {
    Win,
    Lose,
    Open,
}

struct Decider<'a> {
    arena: &'a Arena,
    w: &'a WinCond,
    /// no forbidden edge / no target edge reachable from the state
    clear: Vec<bool>,
}

impl<'a> Decider<'a> {
    fn new(arena: &'a Arena, w: &'a WinCond) -> Result<Self> {
        let colors = match w {
            WinCond::Safety { avoid } => avoid,
            WinCond::Reach { target } => target,
            _ => return Err(Error::Unsupported("maximal harmless search needs a safety or reach condition".into())),
        };
        let (na, nb) = actions(arena);
        let n = arena.num_states();
        // states that can reach an edge colored in `colors`
        let mut hits = vec![false; n];
        loop {
            let next: Vec<bool> = (0..n)
                .map(|q| {
                    hits[q]
                        || (0..na).any(|a| (0..nb).any(|b| colors.contains(&arena.color(q, a, b)) || hits[arena.next(q, a, b)]))
                })
                .collect();
            if next == hits {
                break;
            }
            hits = next;
        }
        Ok(Decider { arena, w, clear: hits.iter().map(|h| !h).collect() })
    }

    fn outcome(&self, rho: &[Letter]) -> Outcome {
        let (states, colors) = crate::game::traces(self.arena, rho).expect("letters within the alphabet");
        let q = *states.last().unwrap();
        match self.w {
            WinCond::Safety { avoid } => {
                if colors.iter().any(|c| avoid.contains(c)) {
                    Outcome::Lose
                } else if self.clear[q] {
                    Outcome::Win
                } else {
                    Outcome::Open
                }
            }
            WinCond::Reach { target } => {
                if colors.iter().any(|c| target.contains(c)) {
                    Outcome::Win
                } else if self.clear[q] {
                    Outcome::Lose
                } else {
                    Outcome::Open
                }
            }
            _ => unreachable!("checked in Decider::new"),
        }
    }
}

/// A constraint with finitely many classes below a horizon: histories of a
/// length `n < horizon` are partitioned into blocks; all histories of equal
/// length `>= horizon` are equivalent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteClassConstraint {
    pub horizon: usize,
    /// Block id of every history shorter than the horizon.
    pub class_of: HashMap<History, usize>,
    /// Blocks, each with its length and the seed labels merged into it.
    pub blocks: Vec<(usize, Vec<String>)>,
}

impl FiniteClassConstraint {
    pub fn num_classes(&self) -> usize {
        self.blocks.len()
    }

    pub fn same_class(&self, u: &[Letter], v: &[Letter]) -> bool {
        u.len() == v.len() && (u.len() >= self.horizon || self.class_of[u] == self.class_of[v])
    }

    pub fn to_constraint(&self, name: impl Into<String>) -> Constraint {
        let class_of = self.class_of.clone();
        let horizon = self.horizon;
        Constraint::Key(KeyConstraint::new(name, true, move |rho| {
            if rho.len() >= horizon {
                vec![rho.len() as i64, -1]
            } else {
                vec![rho.len() as i64, class_of[rho] as i64]
            }
        }))
    }

    pub fn describe(&self) -> String {
        let mut by_len: Vec<Vec<String>> = vec![Vec::new(); self.horizon];
        for (len, labels) in &self.blocks {
            by_len[*len].push(format!("{{{}}}", labels.join("|")));
        }
        by_len.iter().enumerate().map(|(n, bs)| format!("len{n}: {}", bs.join(" "))).collect::<Vec<_>>().join("; ")
    }
}

/// A maximal harmless constraint together with a winning strategy respecting it.
#[derive(Debug, Clone)]
pub struct HarmlessConstraint {
    pub constraint: FiniteClassConstraint,
    pub certificate: MealyStrategy,
}

#[derive(Debug, Clone)]
pub struct MaximalReport {
    pub maximal: Vec<HarmlessConstraint>,
    /// Is the relation generated by the union of all maximal constraints harmless?
    pub union_harmless: bool,
    /// The merge tree exceeded its budget; the list may be incomplete.
    pub partial: bool,
}

/// Partition of seed classes (each seed class lives at one length).
type Partition = Vec<Vec<usize>>;

fn canonical(mut p: Partition) -> Partition {
    for b in &mut p {
        b.sort_unstable();
    }
    p.sort();
    p
}

struct MergeSearch<'a> {
    arena: &'a Arena,
    decider: Decider<'a>,
    horizon: usize,
    /// seed id of every history shorter than the horizon
    seed_of: HashMap<History, usize>,
    seed_len: Vec<usize>,
    seed_label: Vec<String>,
}

impl MergeSearch<'_> {
    /// A class-to-action assignment under which the induced strategy wins by
    /// the horizon, if any.
    fn assignment(&self, p: &Partition) -> Option<Vec<usize>> {
        let mut block_of = vec![0; self.seed_len.len()];
        for (i, b) in p.iter().enumerate() {
            for &s in b {
                block_of[s] = i;
            }
        }
        let na = self.arena.actions_a.len();
        let mut g = vec![0usize; p.len()];
        loop {
            if self.wins(&|rho: &[Letter]| g[block_of[self.seed_of[rho]]], &mut Vec::new()) {
                return Some(g);
            }
            // next assignment in odometer order
            let mut i = 0;
            loop {
                if i == g.len() {
                    return None;
                }
                g[i] += 1;
                if g[i] < na {
                    break;
                }
                g[i] = 0;
                i += 1;
            }
        }
    }

    fn wins(&self, play: &dyn Fn(&[Letter]) -> usize, rho: &mut History) -> bool {
        match self.decider.outcome(rho) {
            Outcome::Win => return true,
            Outcome::Lose => return false,
            Outcome::Open if rho.len() >= self.horizon => return false,
            Outcome::Open => {}
        }
        let a = play(rho);
        (0..self.arena.actions_b.len()).all(|b| {
            rho.push(Letter::new(a, b));
            let ok = self.wins(play, rho);
            rho.pop();
            ok
        })
    }

    fn finite_class(&self, p: &Partition) -> FiniteClassConstraint {
        let mut block_of = vec![0; self.seed_len.len()];
        for (i, b) in p.iter().enumerate() {
            for &s in b {
                block_of[s] = i;
            }
        }
        let class_of = self.seed_of.iter().map(|(h, &s)| (h.clone(), block_of[s])).collect();
        let blocks = p.iter().map(|b| (self.seed_len[b[0]], b.iter().map(|&s| self.seed_label[s].clone()).collect())).collect();
        FiniteClassConstraint { horizon: self.horizon, class_of, blocks }
    }

    /// Tree-shaped machine following the assignment until the horizon, then
    /// playing action 0 forever.
    fn certificate(&self, p: &Partition, g: &[usize]) -> Result<MealyStrategy> {
        let fc = self.finite_class(p);
        let nb = self.arena.actions_b.len();
        let mut nodes: Vec<History> = vec![Vec::new()];
        let mut act = Vec::new();
        let mut update = Vec::new();
        let mut i = 0;
        while i < nodes.len() {
            let rho = nodes[i].clone();
            let a = g[fc.class_of[&rho]];
            act.push(a);
            for b in 0..nb {
                if rho.len() + 1 < self.horizon {
                    let mut next = rho.clone();
                    next.push(Letter::new(a, b));
                    nodes.push(next);
                    update.push(nodes.len() - 1);
                } else {
                    update.push(usize::MAX);
                }
            }
            i += 1;
        }
        let sink = nodes.len();
        act.push(0);
        update.extend(std::iter::repeat_n(sink, nb));
        for u in &mut update {
            if *u == usize::MAX {
                *u = sink;
            }
        }
        MealyStrategy::new(self.arena.alphabet(), 0, act, update)
    }
}

/// Explores pairwise merges of seed classes (within each length below the
/// horizon), keeping a merge iff some strategy factoring through the merged
/// classes still wins by the horizon. Returns every maximal constraint
/// reached, each with a winning certificate.
///
/// The game must be decided by round `horizon`: every history of that
/// length must already be won or lost whatever happens next.
pub fn maximal_harmless(
    arena: &Arena,
    w: &WinCond,
    s: &MealyStrategy,
    horizon: usize,
    seed: Seed,
    budget: usize,
) -> Result<MaximalReport> {
    w.validate(arena)?;
    let decider = Decider::new(arena, w)?;
    let alph = arena.alphabet();
    if let Some(h) = alph.histories(horizon).into_iter().find(|h| decider.outcome(h) == Outcome::Open) {
        let h: Vec<String> = h.iter().map(|l| l.to_string()).collect();
        return input(format!("game is not decided at horizon {horizon}: history {} is open", h.join("")));
    }
    let mut seed_ids: HashMap<(usize, Vec<usize>), usize> = HashMap::new();
    let mut seed_of = HashMap::new();
    let mut seed_len = Vec::new();
    let mut seed_label = Vec::new();
    for n in 0..horizon {
        for h in alph.histories(n) {
            let beta = crate::game::opponent_projection(&h);
            let key = match seed {
                Seed::StrategyOutput => vec![s.eval(&beta)],
                Seed::OpponentHistory => beta.clone(),
            };
            let next = seed_len.len();
            let id = *seed_ids.entry((n, key.clone())).or_insert_with(|| {
                seed_len.push(n);
                seed_label.push(match seed {
                    Seed::StrategyOutput => format!("out={}", arena.actions_a[key[0]]),
                    Seed::OpponentHistory if key.is_empty() => "ε".into(),
                    Seed::OpponentHistory => key.iter().map(|&b| arena.actions_b[b].clone()).collect::<Vec<_>>().join(""),
                });
                next
            });
            seed_of.insert(h, id);
        }
    }
    let search = MergeSearch { arena, decider, horizon, seed_of, seed_len, seed_label };
    let start: Partition = (0..search.seed_len.len()).map(|i| vec![i]).collect();
    if search.assignment(&start).is_none() {
        return Err(Error::Precondition("the seed constraint admits no winning strategy; is the strategy winning?".into()));
    }
    let mut visited: HashSet<Partition> = HashSet::new();
    let mut maximal: Vec<(Partition, Vec<usize>)> = Vec::new();
    let mut stack = vec![canonical(start)];
    let mut partial = false;
    while let Some(p) = stack.pop() {
        if !visited.insert(p.clone()) {
            continue;
        }
        if visited.len() > budget {
            partial = true;
            break;
        }
        let mut any = false;
        let mut children = Vec::new();
        for i in 0..p.len() {
            for j in i + 1..p.len() {
                if search.seed_len[p[i][0]] != search.seed_len[p[j][0]] {
                    continue;
                }
                let mut q: Partition = p.iter().enumerate().filter(|&(k, _)| k != i && k != j).map(|(_, b)| b.clone()).collect();
                q.push(p[i].iter().chain(&p[j]).copied().collect());
                let q = canonical(q);
                if search.assignment(&q).is_some() {
                    any = true;
                    children.push(q);
                }
            }
        }
        if any {
            // reverse so that the first merge is explored first
            stack.extend(children.into_iter().rev());
        } else {
            let g = search.assignment(&p).expect("visited partitions are harmless");
            maximal.push((p, g));
        }
    }
    // union of all maximal partitions, joined per seed class
    let mut uf = UnionFind::new(search.seed_len.len());
    for (p, _) in &maximal {
        for b in p {
            for &x in &b[1..] {
                uf.union(b[0], x);
            }
        }
    }
    let mut groups: HashMap<usize, Vec<usize>> = HashMap::new();
    for x in 0..search.seed_len.len() {
        groups.entry(uf.find(x)).or_default().push(x);
    }
    let union: Partition = canonical(groups.into_values().collect());
    let union_harmless = search.assignment(&union).is_some();
    let maximal = maximal
        .into_iter()
        .map(|(p, g)| {
            Ok(HarmlessConstraint { constraint: search.finite_class(&p), certificate: search.certificate(&p, &g)? })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MaximalReport { maximal, union_harmless, partial })
}

/// Is there a strategy factoring through the classes of `fc` that wins by
/// the horizon?
pub fn is_harmless_finite(arena: &Arena, w: &WinCond, fc: &FiniteClassConstraint) -> Result<bool> {
    let decider = Decider::new(arena, w)?;
    let n_blocks = fc.num_classes();
    let na = arena.actions_a.len();
    let mut g = vec![0usize; n_blocks];
    let search = |g: &[usize], rho: &mut History| -> bool {
        fn go(d: &Decider, fc: &FiniteClassConstraint, g: &[usize], nb: usize, rho: &mut History) -> bool {
            match d.outcome(rho) {
                Outcome::Win => return true,
                Outcome::Lose => return false,
                Outcome::Open if rho.len() >= fc.horizon => return false,
                Outcome::Open => {}
            }
            let a = g[fc.class_of[rho.as_slice()]];
            (0..nb).all(|b| {
                rho.push(Letter::new(a, b));
                let ok = go(d, fc, g, nb, rho);
                rho.pop();
                ok
            })
        }
        go(&decider, fc, g, arena.actions_b.len(), rho)
    };
    loop {
        if search(&g, &mut Vec::new()) {
            return Ok(true);
        }
        let mut i = 0;
        loop {
            if i == n_blocks {
                return Ok(false);
            }
            g[i] += 1;
            if g[i] < na {
                break;
            }
            g[i] = 0;
            i += 1;
        }
    }
}

/// Every opponent history up to `horizon`, for reporting.
pub fn opponent_histories(alph: Alphabet, horizon: usize) -> Vec<Vec<usize>> {
    (0..=horizon).flat_map(|n| words(alph.actions_b, n)).collect()
}
