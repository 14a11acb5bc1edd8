//! Constraints: equivalence relations over histories.
//!
//! Two representations are provided. A [`TwoTapeDfa`] reads the two
//! histories letter by letter in lockstep and accepts equivalent pairs; a
//! [`KeyConstraint`] maps each history to a canonical key and relates
//! histories with equal keys. Keys cover relations with infinitely many
//! classes (color multisets, energy levels).

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::sync::Arc;

use num_traits::Zero;

use crate::error::{input, Result};
use crate::game::{Alphabet, Arena, History, Letter, Rational};

/// Canonical key values; rationals are stored as normalized `(numer, denom)`.
pub type Key = Vec<i64>;

type KeyFn = Arc<dyn Fn(&[Letter]) -> Key + Send + Sync>;

/// Automaton over pairs of letters recognizing a time-aware relation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwoTapeDfa {
    pub name: String,
    alphabet: Alphabet,
    init: usize,
    accepting: Vec<bool>,
    delta: Vec<usize>,
    labels: Vec<String>,
}

impl TwoTapeDfa {
    /// `delta` is indexed by `(q * L + l1) * L + l2` with `L = |A×B|` and
    /// letters indexed by [`Alphabet::letter_index`].
    pub fn new(
        name: impl Into<String>,
        alphabet: Alphabet,
        init: usize,
        accepting: Vec<bool>,
        delta: Vec<usize>,
    ) -> Result<Self> {
        let n = accepting.len();
        let l = alphabet.num_letters();
        if n == 0 || init >= n {
            return input("two-tape automaton needs a valid initial state");
        }
        if !accepting[init] {
            return input("initial state of a two-tape automaton must be accepting (ε ∼ ε)");
        }
        if delta.len() != n * l * l {
            return input(format!("transition table must have {} entries", n * l * l));
        }
        if delta.iter().any(|&t| t >= n) {
            return input("transition target out of range");
        }
        let labels = (0..n).map(|i| format!("s{i}")).collect();
        Ok(TwoTapeDfa { name: name.into(), alphabet, init, accepting, delta, labels })
    }

    pub fn from_fn(
        name: impl Into<String>,
        alphabet: Alphabet,
        states: usize,
        init: usize,
        accepting: impl Fn(usize) -> bool,
        f: impl Fn(usize, Letter, Letter) -> usize,
    ) -> Result<Self> {
        let l = alphabet.num_letters();
        let mut delta = Vec::with_capacity(states * l * l);
        for q in 0..states {
            for i in 0..l {
                for j in 0..l {
                    delta.push(f(q, alphabet.letter(i), alphabet.letter(j)));
                }
            }
        }
        Self::new(name, alphabet, init, (0..states).map(accepting).collect(), delta)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.accepting.len() {
            return input("one label per automaton state required");
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn num_states(&self) -> usize {
        self.accepting.len()
    }

    pub fn init(&self) -> usize {
        self.init
    }

    pub fn is_accepting(&self, q: usize) -> bool {
        self.accepting[q]
    }

    pub fn num_accepting(&self) -> usize {
        self.accepting.iter().filter(|&&f| f).count()
    }

    pub fn next(&self, q: usize, x: Letter, y: Letter) -> usize {
        let l = self.alphabet.num_letters();
        self.delta[(q * l + self.alphabet.letter_index(x)) * l + self.alphabet.letter_index(y)]
    }

    /// δ⁺(u ‖ v), or `None` when the lengths differ.
    pub fn run(&self, u: &[Letter], v: &[Letter]) -> Option<usize> {
        if u.len() != v.len() {
            return None;
        }
        Some(u.iter().zip(v).fold(self.init, |q, (&x, &y)| self.next(q, x, y)))
    }

    pub fn accepts(&self, u: &[Letter], v: &[Letter]) -> bool {
        self.run(u, v).is_some_and(|q| self.accepting[q])
    }

    fn successors(&self, q: usize) -> impl Iterator<Item = usize> + '_ {
        let l = self.alphabet.num_letters();
        self.delta[q * l * l..(q + 1) * l * l].iter().copied()
    }

    fn closure(&self, start: impl IntoIterator<Item = usize>) -> BTreeSet<usize> {
        let mut seen: BTreeSet<usize> = start.into_iter().collect();
        let mut queue: VecDeque<usize> = seen.iter().copied().collect();
        while let Some(q) = queue.pop_front() {
            for n in self.successors(q) {
                if seen.insert(n) {
                    queue.push_back(n);
                }
            }
        }
        seen
    }

    pub fn reachable_states(&self) -> BTreeSet<usize> {
        self.closure([self.init])
    }
}

/// Deterministic automaton over single letters of `A×B`, without accepting
/// states: it induces the relation `u ∼ v iff δ⁺(u) = δ⁺(v)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OneTapeDfa {
    pub alphabet: Alphabet,
    pub init: usize,
    states: usize,
    delta: Vec<usize>,
}

impl OneTapeDfa {
    pub fn from_fn(alphabet: Alphabet, states: usize, init: usize, f: impl Fn(usize, Letter) -> usize) -> Result<Self> {
        if states == 0 || init >= states {
            return input("one-tape automaton needs a valid initial state");
        }
        let delta: Vec<usize> = (0..states).flat_map(|q| alphabet.letters().map(move |l| (q, l))).map(|(q, l)| f(q, l)).collect();
        if delta.iter().any(|&t| t >= states) {
            return input("transition target out of range");
        }
        Ok(OneTapeDfa { alphabet, init, states, delta })
    }

    pub fn num_states(&self) -> usize {
        self.states
    }

    pub fn next(&self, q: usize, l: Letter) -> usize {
        self.delta[q * self.alphabet.num_letters() + self.alphabet.letter_index(l)]
    }

    pub fn run(&self, u: &[Letter]) -> usize {
        u.iter().fold(self.init, |q, &l| self.next(q, l))
    }

    /// The (length-blind) relation induced by this automaton.
    pub fn relation(&self, name: impl Into<String>) -> KeyConstraint {
        let d = self.clone();
        KeyConstraint::new(name, false, move |rho| vec![d.run(rho) as i64])
    }
}

/// Relation `u ∼ v iff key(u) = key(v)` (and `|u| = |v|` when time-aware).
#[derive(Clone)]
pub struct KeyConstraint {
    pub name: String,
    pub time_aware: bool,
    key: KeyFn,
}

impl KeyConstraint {
    pub fn new(name: impl Into<String>, time_aware: bool, key: impl Fn(&[Letter]) -> Key + Send + Sync + 'static) -> Self {
        KeyConstraint { name: name.into(), time_aware, key: Arc::new(key) }
    }

    pub fn key(&self, rho: &[Letter]) -> Key {
        (self.key)(rho)
    }

    pub fn equiv(&self, u: &[Letter], v: &[Letter]) -> bool {
        if self.time_aware && u.len() != v.len() {
            return false;
        }
        self.key(u) == self.key(v)
    }
}

impl fmt::Debug for KeyConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KeyConstraint").field("name", &self.name).field("time_aware", &self.time_aware).finish()
    }
}

/// A constraint in one of the supported representations.
#[derive(Debug, Clone)]
pub enum Constraint {
    TwoTape(TwoTapeDfa),
    Key(KeyConstraint),
    Intersection(Vec<Constraint>),
}

impl Constraint {
    pub fn name(&self) -> String {
        match self {
            Constraint::TwoTape(d) => d.name.clone(),
            Constraint::Key(k) => k.name.clone(),
            Constraint::Intersection(cs) => {
                cs.iter().map(|c| c.name()).collect::<Vec<_>>().join("&")
            }
        }
    }

    /// ρ ∼ ρ′
    pub fn equiv(&self, u: &[Letter], v: &[Letter]) -> bool {
        match self {
            Constraint::TwoTape(d) => d.accepts(u, v),
            Constraint::Key(k) => k.equiv(u, v),
            Constraint::Intersection(cs) => cs.iter().all(|c| c.equiv(u, v)),
        }
    }

    pub fn is_time_aware(&self) -> bool {
        match self {
            Constraint::TwoTape(_) => true,
            Constraint::Key(k) => k.time_aware,
            Constraint::Intersection(cs) => cs.iter().any(|c| c.is_time_aware()),
        }
    }

    pub fn as_two_tape(&self) -> Option<&TwoTapeDfa> {
        match self {
            Constraint::TwoTape(d) => Some(d),
            _ => None,
        }
    }

    /// Groups `histories` into classes, preserving first-seen order.
    pub fn classes(&self, histories: &[History]) -> Vec<Vec<usize>> {
        let mut classes: Vec<Vec<usize>> = Vec::new();
        if let Constraint::Key(k) = self {
            let mut by_key: HashMap<(Option<usize>, Key), usize> = HashMap::new();
            for (i, h) in histories.iter().enumerate() {
                let len = k.time_aware.then_some(h.len());
                let slot = *by_key.entry((len, k.key(h))).or_insert_with(|| {
                    classes.push(Vec::new());
                    classes.len() - 1
                });
                classes[slot].push(i);
            }
            return classes;
        }
        for (i, h) in histories.iter().enumerate() {
            match classes.iter_mut().find(|c| self.equiv(&histories[c[0]], h)) {
                Some(c) => c.push(i),
                None => classes.push(vec![i]),
            }
        }
        classes
    }
}

impl From<TwoTapeDfa> for Constraint {
    fn from(d: TwoTapeDfa) -> Self {
        Constraint::TwoTape(d)
    }
}

impl From<KeyConstraint> for Constraint {
    fn from(k: KeyConstraint) -> Self {
        Constraint::Key(k)
    }
}

/// Number of classes among all histories of length `n`.
pub fn count_classes(c: &Constraint, alphabet: Alphabet, n: usize) -> usize {
    c.classes(&alphabet.histories(n)).len()
}

/// Time-aware restriction of the relation of a one-tape automaton, on `Q²`
/// with the diagonal as accepting set.
pub fn lift_one_tape(d: &OneTapeDfa) -> TwoTapeDfa {
    let n = d.num_states();
    TwoTapeDfa::from_fn(
        "lifted",
        d.alphabet,
        n * n,
        d.init * n + d.init,
        |q| q / n == q % n,
        |q, x, y| d.next(q / n, x) * n + d.next(q % n, y),
    )
    .expect("lift of a valid automaton is valid")
}

fn flatten(cs: Vec<Constraint>, out: &mut Vec<Constraint>) {
    for c in cs {
        match c {
            Constraint::Intersection(inner) => flatten(inner, out),
            other => out.push(other),
        }
    }
}

/// Synchronous product of two-tape automata; accepting set is the product
/// of the accepting sets.
pub fn product(a: &TwoTapeDfa, b: &TwoTapeDfa) -> Result<TwoTapeDfa> {
    if a.alphabet != b.alphabet {
        return input("cannot intersect constraints over different alphabets");
    }
    let nb = b.num_states();
    let d = TwoTapeDfa::from_fn(
        format!("{}&{}", a.name, b.name),
        a.alphabet,
        a.num_states() * nb,
        a.init * nb + b.init,
        |q| a.is_accepting(q / nb) && b.is_accepting(q % nb),
        |q, x, y| a.next(q / nb, x, y) * nb + b.next(q % nb, x, y),
    )?;
    let labels = (0..a.num_states() * nb).map(|q| format!("{}.{}", a.labels[q / nb], b.labels[q % nb])).collect();
    d.with_labels(labels)
}

/// Intersection of constraints. All-automaton inputs yield a product automaton.
pub fn intersect(cs: Vec<Constraint>) -> Result<Constraint> {
    let mut flat = Vec::new();
    flatten(cs, &mut flat);
    if flat.is_empty() {
        return input("intersection of an empty list of constraints");
    }
    if flat.len() == 1 {
        return Ok(flat.pop().unwrap());
    }
    if flat.iter().all(|c| c.as_two_tape().is_some()) {
        let mut it = flat.iter().map(|c| c.as_two_tape().unwrap());
        let first = it.next().unwrap().clone();
        let d = it.try_fold(first, |acc, d| product(&acc, d))?;
        return Ok(Constraint::TwoTape(d));
    }
    Ok(Constraint::Intersection(flat))
}

/// ρ ∼_ta ρ′ iff ρ ∼ ρ′ and |ρ| = |ρ′|.
pub fn time_aware_restriction(c: &Constraint) -> Constraint {
    match c {
        Constraint::TwoTape(d) => Constraint::TwoTape(d.clone()),
        Constraint::Key(k) => {
            let mut k = k.clone();
            k.time_aware = true;
            Constraint::Key(k)
        }
        Constraint::Intersection(cs) => Constraint::Intersection(cs.iter().map(time_aware_restriction).collect()),
    }
}

/// Every reachable accepting state stays accepting under diagonal letters.
pub fn check_suffix_closed(d: &TwoTapeDfa) -> bool {
    let alph = d.alphabet;
    d.reachable_states()
        .into_iter()
        .filter(|&q| d.is_accepting(q))
        .all(|q| alph.letters().all(|l| d.is_accepting(d.next(q, l, l))))
}

/// No accepting state is reachable through a non-accepting one.
pub fn check_perfect_recall(d: &TwoTapeDfa) -> bool {
    let rejecting: Vec<usize> = d.reachable_states().into_iter().filter(|&q| !d.is_accepting(q)).collect();
    d.closure(rejecting).into_iter().all(|q| !d.is_accepting(q))
}

/// Relates every pair of equal-length histories.
pub fn universal_time_aware(alphabet: Alphabet) -> TwoTapeDfa {
    TwoTapeDfa::from_fn("universal-time-aware", alphabet, 1, 0, |_| true, |_, _, _| 0).unwrap()
}

/// Relates each history only to itself.
pub fn equality(alphabet: Alphabet) -> TwoTapeDfa {
    TwoTapeDfa::from_fn("equality", alphabet, 2, 0, |q| q == 0, |q, x, y| if q == 0 && x == y { 0 } else { 1 })
        .unwrap()
        .with_labels(vec!["eq".into(), "fail".into()])
        .unwrap()
}

/// Which part of the state information a state-color constraint compares.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateColorMode {
    /// Same state sequence and same color sequence.
    FullSequence,
    /// Same current state and same color sequence.
    CurrentState,
}

/// Automaton for the state/color constraints.
///
/// Full-sequence mode tracks the common current state until the two
/// histories diverge in state or color (`|Q| + 1` states). Current-state
/// mode runs both histories on `Q²` with a failure sink entered on a color
/// mismatch (`|Q|² + 1` states), accepting on the diagonal.
pub fn state_color_constraint(arena: &Arena, mode: StateColorMode) -> TwoTapeDfa {
    let nq = arena.num_states();
    let alph = arena.alphabet();
    match mode {
        StateColorMode::FullSequence => {
            let fail = nq;
            let mut labels: Vec<String> = arena.states.clone();
            labels.push("fail".into());
            TwoTapeDfa::from_fn("state-color-seq", alph, nq + 1, arena.initial, |q| q != fail, |q, x, y| {
                if q == fail {
                    return fail;
                }
                let (t1, t2) = (arena.next(q, x.a, x.b), arena.next(q, y.a, y.b));
                if t1 == t2 && arena.color(q, x.a, x.b) == arena.color(q, y.a, y.b) {
                    t1
                } else {
                    fail
                }
            })
            .and_then(|d| d.with_labels(labels))
            .unwrap()
        }
        StateColorMode::CurrentState => {
            let fail = nq * nq;
            let mut labels: Vec<String> =
                (0..nq * nq).map(|p| format!("{}|{}", arena.states[p / nq], arena.states[p % nq])).collect();
            labels.push("fail".into());
            TwoTapeDfa::from_fn(
                "state-color-current",
                alph,
                nq * nq + 1,
                arena.initial * nq + arena.initial,
                |q| q != fail && q / nq == q % nq,
                |q, x, y| {
                    if q == fail {
                        return fail;
                    }
                    let (p1, p2) = (q / nq, q % nq);
                    if arena.color(p1, x.a, x.b) != arena.color(p2, y.a, y.b) {
                        return fail;
                    }
                    arena.next(p1, x.a, x.b) * nq + arena.next(p2, y.a, y.b)
                },
            )
            .and_then(|d| d.with_labels(labels))
            .unwrap()
        }
    }
}

/// Same current state and same multiset of seen colors.
pub fn multiset_state_constraint(arena: &Arena) -> KeyConstraint {
    let arena = arena.clone();
    KeyConstraint::new("multiset-state", true, move |rho| {
        let mut counts = vec![0i64; arena.num_colors() + 1];
        let mut q = arena.initial;
        for l in rho {
            counts[arena.color(q, l.a, l.b)] += 1;
            q = arena.next(q, l.a, l.b);
        }
        counts[arena.num_colors()] = q as i64;
        counts
    })
}

fn push_rational(key: &mut Key, r: Rational) {
    key.push(*r.numer());
    key.push(*r.denom());
}

/// Same time, current state, energy level, and sign pattern of all prefix
/// energy levels.
pub fn energy_constraint(arena: &Arena) -> Result<KeyConstraint> {
    energy_key(arena, true)
}

/// Same time, current state and energy level (no prefix sign pattern).
pub fn energy_level_constraint(arena: &Arena) -> Result<KeyConstraint> {
    energy_key(arena, false)
}

fn energy_key(arena: &Arena, with_signs: bool) -> Result<KeyConstraint> {
    let weights = match arena.weights() {
        Some(w) => w.to_vec(),
        None => return input(format!("energy constraint needs weights on arena '{}'", arena.name)),
    };
    let arena = arena.clone();
    let name = if with_signs { "energy" } else { "energy-level" };
    Ok(KeyConstraint::new(name, true, move |rho| {
        let mut q = arena.initial;
        let mut sum = Rational::zero();
        let mut signs = Vec::with_capacity(rho.len());
        for l in rho {
            sum += weights[arena.color(q, l.a, l.b)];
            q = arena.next(q, l.a, l.b);
            signs.push(i64::from(sum >= Rational::zero()));
        }
        let mut key = vec![rho.len() as i64, q as i64];
        push_rational(&mut key, sum);
        if with_signs {
            key.extend(signs);
        }
        key
    }))
}

/// Equal number of rounds and equal sum of Player 1 action indices.
pub fn p1_action_sum(time_aware: bool) -> KeyConstraint {
    let name = if time_aware { "p1-action-sum" } else { "p1-action-sum-untimed" };
    KeyConstraint::new(name, time_aware, |rho| vec![rho.iter().map(|l| l.a as i64).sum()])
}

/// Non-empty histories of equal length with equal value of the first
/// Player 2 action plus the later Player 1 actions; ε is its own class.
pub fn first_b_then_a_sum() -> KeyConstraint {
    KeyConstraint::new("first-b-then-a-sum", true, |rho| match rho.split_first() {
        None => vec![-1],
        Some((first, rest)) => vec![first.b as i64 + rest.iter().map(|l| l.a as i64).sum::<i64>()],
    })
}

/// Two classes: the length-1 histories whose Player 2 action is `b`, and
/// everything else (across all lengths).
pub fn isolate_first_b(b: usize) -> KeyConstraint {
    KeyConstraint::new(format!("isolate-first-b={b}"), false, move |rho| {
        vec![i64::from(rho.len() == 1 && rho[0].b == b)]
    })
}

/// Classes of the smallest suffix-closed equivalence containing the given
/// pairs, computed by union-find over every history of each length
/// `0..=horizon`. Returns, per length, a map from history to class id.
pub fn generated_classes(alphabet: Alphabet, generators: &[(History, History)], horizon: usize) -> Vec<HashMap<History, usize>> {
    let mut out = Vec::with_capacity(horizon + 1);
    for n in 0..=horizon {
        let hs = alphabet.histories(n);
        let index: HashMap<&History, usize> = hs.iter().enumerate().map(|(i, h)| (h, i)).collect();
        let mut uf = UnionFind::new(hs.len());
        for (g1, g2) in generators.iter().filter(|(g1, g2)| g1.len() == g2.len() && g1.len() <= n) {
            for w in alphabet.histories(n - g1.len()) {
                let x: History = g1.iter().chain(&w).copied().collect();
                let y: History = g2.iter().chain(&w).copied().collect();
                uf.union(index[&x], index[&y]);
            }
        }
        let mut ids = HashMap::new();
        let mut map = HashMap::new();
        for (i, h) in hs.iter().enumerate() {
            let r = uf.find(i);
            let next = ids.len();
            let id = *ids.entry(r).or_insert(next);
            map.insert(h.clone(), id);
        }
        out.push(map);
    }
    out
}

/// Disjoint-set forest with path halving.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, x: usize, y: usize) {
        let (rx, ry) = (self.find(x), self.find(y));
        if rx != ry {
            self.parent[rx.max(ry)] = rx.min(ry);
        }
    }
}
