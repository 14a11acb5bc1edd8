//! Winning conditions, winning-strategy verification, ∼-strategy checks and
//! bounded refuters for the closedness predicates.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use num_traits::Zero;

use crate::constraint::Constraint;
use crate::error::{input, Result};
use crate::game::{induced_history, Alphabet, Arena, History, Lasso, Letter, Rational};
use crate::strategy::{MealyStrategy, Strategy};

/// Symbolic winning condition over edge colors. Color sets hold indices
/// into [`Arena::colors`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WinCond {
    /// Never see a color from `avoid`.
    Safety { avoid: BTreeSet<usize> },
    /// Eventually see a color from `target`, on every run.
    Reach { target: BTreeSet<usize> },
    /// See colors from `target` infinitely often.
    Buchi { target: BTreeSet<usize> },
    /// For some set in the family, all its colors occur infinitely often.
    SubMuller { family: Vec<BTreeSet<usize>> },
    /// All prefix sums of color weights stay nonnegative.
    Energy,
    Conj(Vec<WinCond>),
}

impl WinCond {
    pub fn validate(&self, arena: &Arena) -> Result<()> {
        let check = |set: &BTreeSet<usize>| -> Result<()> {
            match set.iter().find(|&&c| c >= arena.num_colors()) {
                Some(c) => input(format!("color index {c} not in arena '{}'", arena.name)),
                None => Ok(()),
            }
        };
        match self {
            WinCond::Safety { avoid: s } | WinCond::Reach { target: s } | WinCond::Buchi { target: s } => check(s),
            WinCond::SubMuller { family } => {
                if family.is_empty() {
                    return input("sub-Muller family must be non-empty");
                }
                family.iter().try_for_each(check)
            }
            WinCond::Energy => match arena.weights() {
                Some(_) => Ok(()),
                None => input(format!("energy condition needs weights on arena '{}'", arena.name)),
            },
            WinCond::Conj(ws) => {
                if ws.is_empty() {
                    return input("empty conjunction");
                }
                ws.iter().try_for_each(|w| w.validate(arena))
            }
        }
    }

    /// Human-readable form using the arena's color names.
    pub fn describe(&self, arena: &Arena) -> String {
        let names = |s: &BTreeSet<usize>| s.iter().map(|&c| arena.colors[c].as_str()).collect::<Vec<_>>().join(",");
        match self {
            WinCond::Safety { avoid } => format!("safety avoid={}", names(avoid)),
            WinCond::Reach { target } => format!("reach target={}", names(target)),
            WinCond::Buchi { target } => format!("buchi target={}", names(target)),
            WinCond::SubMuller { family } => {
                let sets: Vec<String> = family.iter().map(|s| format!("{{{}}}", names(s))).collect();
                format!("submuller {}", sets.join(";"))
            }
            WinCond::Energy => "energy".into(),
            WinCond::Conj(ws) => {
                let parts: Vec<String> = ws.iter().map(|w| format!("({})", w.describe(arena))).collect();
                parts.join(" and ")
            }
        }
    }
}

/// Counterexample attached to a failed [`Verdict`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Witness {
    /// Opponent behavior under which the strategy's run loses.
    Opponent(Lasso<usize>),
    /// Two opponent histories with equivalent induced histories on which the
    /// strategy plays differently.
    OpponentPair(Vec<usize>, Vec<usize>),
    /// Two runs violating a closedness implication; `gamma` is an extension
    /// that works uniformly for every checked prefix, when one exists.
    RunPair { run: Lasso<Letter>, other: Lasso<Letter>, gamma: Option<History> },
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let word = |w: &[usize]| -> String {
            if w.is_empty() {
                "ε".into()
            } else {
                w.iter().map(|b| b.to_string()).collect::<Vec<_>>().join("")
            }
        };
        match self {
            Witness::Opponent(l) => write!(f, "opponent plays {l}"),
            Witness::OpponentPair(x, y) => write!(f, "opponent histories {} and {}", word(x), word(y)),
            Witness::RunPair { run, other, gamma } => {
                write!(f, "runs {run} and {other}")?;
                if let Some(g) = gamma {
                    let g: Vec<String> = g.iter().map(|l| l.to_string()).collect();
                    write!(f, " with extension {}", g.join(""))?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub holds: bool,
    pub witness: Option<Witness>,
}

impl Verdict {
    pub fn yes() -> Self {
        Verdict { holds: true, witness: None }
    }

    pub fn no(w: Witness) -> Self {
        Verdict { holds: false, witness: Some(w) }
    }
}

/// Colors seen along the run of `letters` from the arena's initial state,
/// as an ultimately periodic decomposition `(stem, cycle)`.
pub fn run_colors(arena: &Arena, run: &Lasso<Letter>) -> (Vec<usize>, Vec<usize>) {
    let (s, p) = (run.stem.len(), run.cycle.len());
    let mut q = arena.initial;
    let mut colors = Vec::new();
    let mut seen: HashMap<(usize, usize), usize> = HashMap::new();
    let mut t = 0;
    loop {
        if t >= s {
            if let Some(&t0) = seen.get(&(q, (t - s) % p)) {
                let cycle = colors.split_off(t0);
                return (colors, cycle);
            }
            seen.insert((q, (t - s) % p), t);
        }
        let l = run.at(t);
        colors.push(arena.color(q, l.a, l.b));
        q = arena.next(q, l.a, l.b);
        t += 1;
    }
}

/// Membership of an ultimately periodic run in the winning set.
pub fn run_satisfies(arena: &Arena, w: &WinCond, run: &Lasso<Letter>) -> bool {
    let (stem, cycle) = run_colors(arena, run);
    colors_satisfy(arena, w, &stem, &cycle)
}

fn colors_satisfy(arena: &Arena, w: &WinCond, stem: &[usize], cycle: &[usize]) -> bool {
    match w {
        WinCond::Safety { avoid } => !stem.iter().chain(cycle).any(|c| avoid.contains(c)),
        WinCond::Reach { target } => stem.iter().chain(cycle).any(|c| target.contains(c)),
        WinCond::Buchi { target } => cycle.iter().any(|c| target.contains(c)),
        WinCond::SubMuller { family } => {
            let inf: BTreeSet<usize> = cycle.iter().copied().collect();
            family.iter().any(|c| c.is_subset(&inf))
        }
        WinCond::Energy => {
            let Some(weights) = arena.weights() else { return false };
            let mut sum = Rational::zero();
            for &c in stem.iter().chain(cycle) {
                sum += weights[c];
                if sum < Rational::zero() {
                    return false;
                }
            }
            cycle.iter().map(|&c| weights[c]).sum::<Rational>() >= Rational::zero()
        }
        WinCond::Conj(ws) => ws.iter().all(|w| colors_satisfy(arena, w, stem, cycle)),
    }
}

/// The run induced by `s` against the opponent lasso, as a lasso of letters.
pub fn induced_lasso(s: &MealyStrategy, l: &Lasso<usize>) -> Lasso<Letter> {
    let (stem_len, p) = (l.stem.len(), l.cycle.len());
    let mut m = s.init();
    let mut letters = Vec::new();
    let mut seen: HashMap<(usize, usize), usize> = HashMap::new();
    let mut t = 0;
    loop {
        if t >= stem_len {
            let key = (m, (t - stem_len) % p);
            if let Some(&t0) = seen.get(&key) {
                let cycle = letters.split_off(t0);
                return Lasso { stem: letters, cycle };
            }
            seen.insert(key, t);
        }
        let b = l.at(t);
        letters.push(Letter::new(s.action(m), b));
        m = s.update(m, b);
        t += 1;
    }
}

/// Does the run of `s` against the opponent lasso `l` belong to the winning set?
pub fn lasso_satisfies(arena: &Arena, w: &WinCond, s: &MealyStrategy, l: &Lasso<usize>) -> bool {
    run_satisfies(arena, w, &induced_lasso(s, l))
}

/// Synchronized product of arena and strategy memory.
struct Product<'a> {
    arena: &'a Arena,
    s: &'a MealyStrategy,
    nb: usize,
}

struct Edge {
    b: usize,
    to: usize,
    color: usize,
}

impl<'a> Product<'a> {
    fn new(arena: &'a Arena, s: &'a MealyStrategy) -> Self {
        Product { arena, s, nb: arena.actions_b.len() }
    }

    fn size(&self) -> usize {
        self.arena.num_states() * self.s.num_memory()
    }

    fn init(&self) -> usize {
        self.arena.initial * self.s.num_memory() + self.s.init()
    }

    fn edges(&self, v: usize) -> impl Iterator<Item = Edge> + '_ {
        let nm = self.s.num_memory();
        let (q, m) = (v / nm, v % nm);
        let a = self.s.action(m);
        (0..self.nb).map(move |b| Edge {
            b,
            to: self.arena.next(q, a, b) * nm + self.s.update(m, b),
            color: self.arena.color(q, a, b),
        })
    }

    /// BFS from the initial node along edges accepted by `ok`; returns the
    /// parent table (`(prev, b)`) and reachability flags.
    fn bfs(&self, ok: &dyn Fn(usize) -> bool) -> (Vec<Option<(usize, usize)>>, Vec<bool>) {
        let n = self.size();
        let mut parent = vec![None; n];
        let mut seen = vec![false; n];
        let init = self.init();
        seen[init] = true;
        let mut queue = VecDeque::from([init]);
        while let Some(v) = queue.pop_front() {
            for e in self.edges(v) {
                if ok(e.color) && !seen[e.to] {
                    seen[e.to] = true;
                    parent[e.to] = Some((v, e.b));
                    queue.push_back(e.to);
                }
            }
        }
        (parent, seen)
    }

    fn path_to(parent: &[Option<(usize, usize)>], mut v: usize) -> Vec<usize> {
        let mut bs = Vec::new();
        while let Some((p, b)) = parent[v] {
            bs.push(b);
            v = p;
        }
        bs.reverse();
        bs
    }

    /// Finds a cycle inside `allowed` using only edges accepted by `ok`.
    /// Returns a node on the cycle and the opponent actions around it.
    fn find_cycle(&self, allowed: &[bool], ok: &dyn Fn(usize) -> bool) -> Option<(usize, Vec<usize>)> {
        let n = self.size();
        let mut alive = allowed.to_vec();
        let mut out_deg = vec![0usize; n];
        let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
        for v in (0..n).filter(|&v| alive[v]) {
            for e in self.edges(v) {
                if ok(e.color) && alive[e.to] {
                    out_deg[v] += 1;
                    preds[e.to].push(v);
                }
            }
        }
        let mut queue: VecDeque<usize> = (0..n).filter(|&v| alive[v] && out_deg[v] == 0).collect();
        while let Some(v) = queue.pop_front() {
            if !alive[v] {
                continue;
            }
            alive[v] = false;
            for &p in &preds[v] {
                if alive[p] {
                    out_deg[p] -= 1;
                    if out_deg[p] == 0 {
                        queue.push_back(p);
                    }
                }
            }
        }
        let start = (0..n).find(|&v| alive[v])?;
        // every live node has a live successor: walk until a node repeats
        let mut pos: HashMap<usize, usize> = HashMap::new();
        let mut walk: Vec<(usize, usize)> = Vec::new();
        let mut v = start;
        loop {
            if let Some(&i) = pos.get(&v) {
                let cycle = walk[i..].iter().map(|&(_, b)| b).collect();
                return Some((v, cycle));
            }
            pos.insert(v, walk.len());
            let e = self.edges(v).find(|e| ok(e.color) && alive[e.to]).expect("live node has a live successor");
            walk.push((v, e.b));
            v = e.to;
        }
    }

    fn lasso_witness(&self, ok_path: &dyn Fn(usize) -> bool, node: usize, cycle: Vec<usize>) -> Witness {
        let (parent, _) = self.bfs(ok_path);
        let stem = Self::path_to(&parent, node);
        Witness::Opponent(Lasso { stem, cycle })
    }
}

/// Decides whether `s` wins from the arena's initial state against every
/// opponent behavior.
pub fn verify_winning(arena: &Arena, w: &WinCond, s: &MealyStrategy) -> Verdict {
    let p = Product::new(arena, s);
    let any = |_: usize| true;
    match w {
        WinCond::Safety { avoid } => {
            let (parent, seen) = p.bfs(&|c| !avoid.contains(&c));
            for v in (0..p.size()).filter(|&v| seen[v]) {
                if let Some(e) = p.edges(v).find(|e| avoid.contains(&e.color)) {
                    let mut stem = Product::path_to(&parent, v);
                    stem.push(e.b);
                    return Verdict::no(Witness::Opponent(Lasso { stem, cycle: vec![0] }));
                }
            }
            Verdict::yes()
        }
        WinCond::Reach { target } => {
            let free = |c: usize| !target.contains(&c);
            let (_, seen) = p.bfs(&free);
            match p.find_cycle(&seen, &free) {
                Some((v, cycle)) => Verdict::no(p.lasso_witness(&free, v, cycle)),
                None => Verdict::yes(),
            }
        }
        WinCond::Buchi { target } => {
            let (_, seen) = p.bfs(&any);
            match p.find_cycle(&seen, &|c| !target.contains(&c)) {
                Some((v, cycle)) => Verdict::no(p.lasso_witness(&any, v, cycle)),
                None => Verdict::yes(),
            }
        }
        WinCond::SubMuller { family } => {
            let (_, seen) = p.bfs(&any);
            for set in losing_color_sets(arena.num_colors(), family) {
                if let Some((v, cycle)) = p.find_cycle(&seen, &|c| set.contains(&c)) {
                    return Verdict::no(p.lasso_witness(&any, v, cycle));
                }
            }
            Verdict::yes()
        }
        WinCond::Energy => verify_energy(&p),
        WinCond::Conj(ws) => ws.iter().map(|w| verify_winning(arena, w, s)).find(|v| !v.holds).unwrap_or_else(Verdict::yes),
    }
}

/// Maximal color sets `S` with `C ⊄ S` for every `C` in the family.
fn losing_color_sets(num_colors: usize, family: &[BTreeSet<usize>]) -> Vec<BTreeSet<usize>> {
    let bad: Vec<BTreeSet<usize>> = (0u64..1 << num_colors)
        .map(|mask| (0..num_colors).filter(|c| mask >> c & 1 == 1).collect::<BTreeSet<usize>>())
        .filter(|s| family.iter().all(|c| !c.is_subset(s)))
        .collect();
    bad.iter().filter(|s| !bad.iter().any(|t| t.len() > s.len() && s.is_subset(t))).cloned().collect()
}

fn verify_energy(p: &Product) -> Verdict {
    let Some(weights) = p.arena.weights() else {
        // validated conditions never reach this; report as losing on the empty play
        return Verdict::no(Witness::Opponent(Lasso { stem: vec![], cycle: vec![0] }));
    };
    let n = p.size();
    let init = p.init();
    let mut dist: Vec<Option<Rational>> = vec![None; n];
    let mut pred: Vec<Option<(usize, usize)>> = vec![None; n];
    dist[init] = Some(Rational::zero());
    let mut last_changed = None;
    for _ in 0..n {
        last_changed = None;
        for v in 0..n {
            let Some(d) = dist[v] else { continue };
            for e in p.edges(v) {
                let nd = d + weights[e.color];
                if dist[e.to].is_none_or(|old| nd < old) {
                    dist[e.to] = Some(nd);
                    pred[e.to] = Some((v, e.b));
                    last_changed = Some(e.to);
                }
            }
        }
        if last_changed.is_none() {
            break;
        }
    }
    if let Some(x) = last_changed {
        // negative cycle: walk back into it, then read it off
        let mut y = x;
        for _ in 0..n {
            y = pred[y].expect("relaxed node has a predecessor").0;
        }
        let mut cycle = Vec::new();
        let mut v = y;
        loop {
            let (u, b) = pred[v].unwrap();
            cycle.push(b);
            v = u;
            if v == y {
                break;
            }
        }
        cycle.reverse();
        let (parent, _) = p.bfs(&|_| true);
        let stem = Product::path_to(&parent, y);
        return Verdict::no(Witness::Opponent(Lasso { stem, cycle }));
    }
    if let Some(v) = (0..n).find(|&v| dist[v].is_some_and(|d| d < Rational::zero())) {
        let stem = Product::path_to(&pred, v);
        return Verdict::no(Witness::Opponent(Lasso { stem, cycle: vec![0] }));
    }
    Verdict::yes()
}

/// Does `s` play equally after equivalent induced histories?
///
/// Automaton constraints are decided exactly on the product of two copies
/// of the strategy with the automaton; other constraints are checked on all
/// opponent histories up to `horizon` (across lengths when the constraint is
/// not time-aware).
pub fn is_sim_strategy(c: &Constraint, s: &MealyStrategy, horizon: usize) -> Verdict {
    match c.as_two_tape() {
        Some(d) => {
            let nm = s.num_memory();
            let nq = d.num_states();
            let nb = s.alphabet().actions_b;
            let idx = |m: usize, m2: usize, q: usize| (m * nm + m2) * nq + q;
            let mut parent: HashMap<usize, (usize, usize, usize)> = HashMap::new();
            let start = idx(s.init(), s.init(), d.init());
            let mut seen = vec![false; nm * nm * nq];
            seen[start] = true;
            let mut queue = VecDeque::from([start]);
            while let Some(v) = queue.pop_front() {
                let (m, m2, q) = (v / (nm * nq), (v / nq) % nm, v % nq);
                let (a, a2) = (s.action(m), s.action(m2));
                if d.is_accepting(q) && a != a2 {
                    let (mut x, mut y) = (Vec::new(), Vec::new());
                    let mut u = v;
                    while let Some(&(p, b, b2)) = parent.get(&u) {
                        x.push(b);
                        y.push(b2);
                        u = p;
                    }
                    x.reverse();
                    y.reverse();
                    return Verdict::no(Witness::OpponentPair(x, y));
                }
                for b in 0..nb {
                    for b2 in 0..nb {
                        let t = idx(s.update(m, b), s.update(m2, b2), d.next(q, Letter::new(a, b), Letter::new(a2, b2)));
                        if !seen[t] {
                            seen[t] = true;
                            parent.insert(t, (v, b, b2));
                            queue.push_back(t);
                        }
                    }
                }
            }
            Verdict::yes()
        }
        None => sim_by_enumeration(c, s, horizon),
    }
}

/// Exhaustive ∼-strategy check for an arbitrary strategy up to `horizon`.
pub fn sim_by_enumeration<S: Strategy + ?Sized>(c: &Constraint, s: &S, horizon: usize) -> Verdict {
    let alph = s.alphabet();
    let mut betas = Vec::new();
    let mut hists = Vec::new();
    let mut acts = Vec::new();
    let check_group = |betas: &mut Vec<Vec<usize>>, hists: &mut Vec<History>, acts: &mut Vec<usize>| -> Option<Verdict> {
        for class in c.classes(hists) {
            if let Some(&j) = class.iter().find(|&&j| acts[j] != acts[class[0]]) {
                return Some(Verdict::no(Witness::OpponentPair(betas[class[0]].clone(), betas[j].clone())));
            }
        }
        betas.clear();
        hists.clear();
        acts.clear();
        None
    };
    for n in 0..=horizon {
        for beta in crate::game::words(alph.actions_b, n) {
            let (Ok(h), Ok(a)) = (induced_history(s, &beta), s.act(&beta)) else { continue };
            betas.push(beta);
            hists.push(h);
            acts.push(a);
        }
        if c.is_time_aware() {
            if let Some(v) = check_group(&mut betas, &mut hists, &mut acts) {
                return v;
            }
        }
    }
    check_group(&mut betas, &mut hists, &mut acts).unwrap_or_else(Verdict::yes)
}

/// Which closedness implication to refute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flavor {
    /// Equivalent at every length ⇒ same membership.
    Weak,
    /// Equivalent at infinitely many lengths ⇒ same membership.
    Plain,
    /// Every prefix of the first run extends to a history equivalent to a
    /// prefix of the second ⇒ membership transfers from first to second.
    Strong,
}

impl std::str::FromStr for Flavor {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "weak" => Ok(Flavor::Weak),
            "plain" => Ok(Flavor::Plain),
            "strong" => Ok(Flavor::Strong),
            other => input(format!("unknown closedness flavor '{other}' (weak|plain|strong)")),
        }
    }
}

/// Lassos over `alphabet` in canonical form (primitive cycle, minimal stem)
/// with `|stem| + |cycle| <= size`, ordered by size, then stem length, then
/// lexicographically.
pub fn canonical_lassos(alphabet: Alphabet, size: usize) -> Vec<Lasso<Letter>> {
    let mut out = Vec::new();
    for total in 1..=size {
        for stem_len in 0..total {
            let cycle_len = total - stem_len;
            for stem in alphabet.histories(stem_len) {
                for cycle in alphabet.histories(cycle_len) {
                    if is_primitive(&cycle) && stem.last().is_none_or(|l| l != cycle.last().unwrap()) {
                        out.push(Lasso { stem: stem.clone(), cycle });
                    }
                }
            }
        }
    }
    out
}

fn is_primitive<T: PartialEq>(w: &[T]) -> bool {
    let n = w.len();
    (1..n).filter(|d| n % d == 0).all(|d| (0..n).any(|i| w[i] != w[i % d]))
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Shared normalization of positions for two lassos.
struct PairShape {
    stem: usize,
    period: usize,
}

impl PairShape {
    fn new(x: &Lasso<Letter>, y: &Lasso<Letter>) -> Self {
        let (p, q) = (x.cycle.len(), y.cycle.len());
        PairShape { stem: x.stem.len().max(y.stem.len()), period: p / gcd(p, q) * q }
    }

    fn norm(&self, i: usize) -> usize {
        if i < self.stem {
            i
        } else {
            self.stem + (i - self.stem) % self.period
        }
    }

    fn positions(&self) -> usize {
        self.stem + self.period
    }
}

/// Does the pair `(run, other)` satisfy the premise of the given flavor?
///
/// Exact for automaton constraints. For other constraints, prefixes are
/// checked to a few periods past the stems and `gamma_bound` (one period further for
/// the plain flavor) and extensions up to length `gamma_bound`.
pub fn premise_holds(c: &Constraint, flavor: Flavor, run: &Lasso<Letter>, other: &Lasso<Letter>, gamma_bound: usize) -> bool {
    let shape = PairShape::new(run, other);
    if let Some(d) = c.as_two_tape() {
        // deterministic run of the automaton on the two runs, with positions normalized
        let mut seq = Vec::new();
        let mut seen: HashMap<(usize, usize), usize> = HashMap::new();
        let mut q = d.init();
        let mut t = 0;
        let loop_start = loop {
            let key = (q, shape.norm(t));
            if let Some(&t0) = seen.get(&key) {
                break t0;
            }
            seen.insert(key, t);
            seq.push(key);
            q = d.next(q, run.at(t), other.at(t));
            t += 1;
        };
        return match flavor {
            Flavor::Weak => seq.iter().all(|&(q, _)| d.is_accepting(q)),
            Flavor::Plain => seq[loop_start..].iter().any(|&(q, _)| d.is_accepting(q)),
            Flavor::Strong => {
                let good = extendable(d, other, &shape);
                seq.iter().all(|&(q, pos)| good[q * shape.positions() + pos])
            }
        };
    }
    let check_to = key_depth(&shape, gamma_bound);
    match flavor {
        Flavor::Weak => (0..=check_to).all(|n| c.equiv(&run.prefix(n), &other.prefix(n))),
        Flavor::Plain => {
            let far = check_to + shape.period;
            let hits: Vec<bool> = (0..=far).map(|n| c.equiv(&run.prefix(n), &other.prefix(n))).collect();
            (0..=check_to).all(|n| hits[n..].iter().any(|&h| h))
        }
        Flavor::Strong => {
            let alph = Alphabet::new(
                run.stem.iter().chain(&run.cycle).chain(&other.stem).chain(&other.cycle).map(|l| l.a).max().unwrap_or(0) + 1,
                run.stem.iter().chain(&run.cycle).chain(&other.stem).chain(&other.cycle).map(|l| l.b).max().unwrap_or(0) + 1,
            );
            strong_prefix_ok(c, alph, run, other, check_to, gamma_bound)
        }
    }
}

/// Prefix length up to which premises over key constraints are checked.
/// Counting keys drift apart linearly on non-matching runs, so a few periods
/// past the extension bound expose them.
fn key_depth(shape: &PairShape, gamma_bound: usize) -> usize {
    shape.stem + 4 * shape.period + 2 * gamma_bound
}

fn strong_prefix_ok(c: &Constraint, alph: Alphabet, run: &Lasso<Letter>, other: &Lasso<Letter>, upto: usize, gamma_bound: usize) -> bool {
    let gammas: Vec<History> = (0..=gamma_bound).flat_map(|k| alph.histories(k)).collect();
    (0..=upto).all(|n| {
        let base = run.prefix(n);
        gammas.iter().any(|g| {
            let ext: History = base.iter().chain(g).copied().collect();
            c.equiv(&ext, &other.prefix(n + g.len()))
        })
    })
}

/// States `(q, pos)` from which reading free letters on tape 1 against
/// `other` from position `pos` on tape 2 can reach an accepting state.
fn extendable(d: &crate::constraint::TwoTapeDfa, other: &Lasso<Letter>, shape: &PairShape) -> Vec<bool> {
    let np = shape.positions();
    let nq = d.num_states();
    let alph = d.alphabet();
    let mut good: Vec<bool> = (0..nq * np).map(|v| d.is_accepting(v / np)).collect();
    let mut changed = true;
    while changed {
        changed = false;
        for v in 0..nq * np {
            if good[v] {
                continue;
            }
            let (q, pos) = (v / np, v % np);
            let y = other.at(pos);
            let next_pos = shape.norm(pos + 1);
            if alph.letters().any(|x| good[d.next(q, x, y) * np + next_pos]) {
                good[v] = true;
                changed = true;
            }
        }
    }
    good
}

/// A single extension `γ` (shortest first) working for every prefix of
/// `run` checked by [`premise_holds`].
fn uniform_gamma(c: &Constraint, alph: Alphabet, run: &Lasso<Letter>, other: &Lasso<Letter>, gamma_bound: usize) -> Option<History> {
    let shape = PairShape::new(run, other);
    let upto = key_depth(&shape, gamma_bound);
    (0..=gamma_bound).flat_map(|k| alph.histories(k)).find(|g| {
        (0..=upto).all(|n| {
            let ext: History = run.prefix(n).into_iter().chain(g.iter().copied()).collect();
            c.equiv(&ext, &other.prefix(n + g.len()))
        })
    })
}

/// Does `(run, other)` violate the closedness implication of `flavor`?
/// Weak and plain flavors are symmetric, so the pair is also tried swapped.
pub fn check_pair(arena: &Arena, c: &Constraint, w: &WinCond, flavor: Flavor, run: &Lasso<Letter>, other: &Lasso<Letter>, gamma_bound: usize) -> bool {
    let (x, y) = (run_satisfies(arena, w, run), run_satisfies(arena, w, other));
    match flavor {
        Flavor::Strong => x && !y && premise_holds(c, flavor, run, other, gamma_bound),
        _ => x != y && premise_holds(c, flavor, run, other, gamma_bound),
    }
}

/// Every violating pair among canonical lassos of size `<= bound + 1`,
/// winning run first, in enumeration order.
pub fn closedness_violations(arena: &Arena, c: &Constraint, w: &WinCond, flavor: Flavor, bound: usize) -> Vec<Witness> {
    let alph = arena.alphabet();
    let lassos = canonical_lassos(alph, bound + 1);
    let (wins, loses): (Vec<&Lasso<Letter>>, Vec<&Lasso<Letter>>) = lassos.iter().partition(|l| run_satisfies(arena, w, l));
    let mut out = Vec::new();
    for r in &wins {
        for r2 in &loses {
            // the weak/plain premises are symmetric, so one orientation suffices
            if premise_holds(c, flavor, r, r2, bound) {
                let gamma = if flavor == Flavor::Strong { uniform_gamma(c, alph, r, r2, bound) } else { None };
                out.push(Witness::RunPair { run: (*r).clone(), other: (*r2).clone(), gamma });
            }
        }
    }
    out
}

/// Searches for a pair of runs violating the chosen closedness implication.
/// `holds = true` only means no violation within the bound.
pub fn refute_closedness(arena: &Arena, c: &Constraint, w: &WinCond, flavor: Flavor, bound: usize) -> Verdict {
    let alph = arena.alphabet();
    let lassos = canonical_lassos(alph, bound + 1);
    let (wins, loses): (Vec<&Lasso<Letter>>, Vec<&Lasso<Letter>>) = lassos.iter().partition(|l| run_satisfies(arena, w, l));
    for r in &wins {
        for r2 in &loses {
            if premise_holds(c, flavor, r, r2, bound) {
                let gamma = if flavor == Flavor::Strong { uniform_gamma(c, alph, r, r2, bound) } else { None };
                return Verdict::no(Witness::RunPair { run: (*r).clone(), other: (*r2).clone(), gamma });
            }
        }
    }
    Verdict::yes()
}
