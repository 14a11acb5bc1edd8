//! Player 1 strategies: finite-memory (Mealy) implementations and
//! function-backed strategies with an explicit horizon.

use std::collections::{BTreeSet, VecDeque};

use crate::error::{input, Error, Result};
use crate::game::Alphabet;

/// A Player 1 strategy `B* -> A`.
pub trait Strategy {
    fn alphabet(&self) -> Alphabet;

    /// The action prescribed after the opponent-history `beta`.
    fn act(&self, beta: &[usize]) -> Result<usize>;
}

impl<S: Strategy + ?Sized> Strategy for &S {
    fn alphabet(&self) -> Alphabet {
        (**self).alphabet()
    }

    fn act(&self, beta: &[usize]) -> Result<usize> {
        (**self).act(beta)
    }
}

/// Memory-aware implementation `(M, m0, σ, μ)` with `s = σ ∘ μ⁺`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MealyStrategy {
    alphabet: Alphabet,
    init: usize,
    act: Vec<usize>,
    update: Vec<usize>,
    labels: Vec<String>,
}

impl MealyStrategy {
    /// `update` is indexed by `m * |B| + b`.
    pub fn new(alphabet: Alphabet, init: usize, act: Vec<usize>, update: Vec<usize>) -> Result<Self> {
        let k = act.len();
        if k == 0 {
            return input("a Mealy strategy needs at least one memory state");
        }
        if init >= k {
            return input("initial memory state out of range");
        }
        if update.len() != k * alphabet.actions_b {
            return input(format!("update table must have {} entries", k * alphabet.actions_b));
        }
        if act.iter().any(|&a| a >= alphabet.actions_a) {
            return input("action out of range in act table");
        }
        if update.iter().any(|&m| m >= k) {
            return input("memory state out of range in update table");
        }
        let labels = (0..k).map(|i| format!("m{i}")).collect();
        Ok(MealyStrategy { alphabet, init, act, update, labels })
    }

    /// Convenience constructor; panics on out-of-range values.
    pub fn from_fn(
        actions_a: usize,
        actions_b: usize,
        memory: usize,
        init: usize,
        act: impl Fn(usize) -> usize,
        update: impl Fn(usize, usize) -> usize,
    ) -> Self {
        let alphabet = Alphabet::new(actions_a, actions_b);
        let act_t = (0..memory).map(&act).collect();
        let upd_t = (0..memory)
            .flat_map(|m| (0..actions_b).map(move |b| (m, b)))
            .map(|(m, b)| update(m, b))
            .collect();
        Self::new(alphabet, init, act_t, upd_t).expect("valid Mealy tables")
    }

    /// A one-state machine that always plays `a`.
    pub fn constant(alphabet: Alphabet, a: usize) -> Result<Self> {
        Self::new(alphabet, 0, vec![a], vec![0; alphabet.actions_b])
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.act.len() {
            return input("one label per memory state required");
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn num_memory(&self) -> usize {
        self.act.len()
    }

    pub fn init(&self) -> usize {
        self.init
    }

    /// σ(m)
    pub fn action(&self, m: usize) -> usize {
        self.act[m]
    }

    /// μ(m, b)
    pub fn update(&self, m: usize, b: usize) -> usize {
        self.update[m * self.alphabet.actions_b + b]
    }

    /// μ⁺(β)
    pub fn memory_after(&self, beta: &[usize]) -> usize {
        beta.iter().fold(self.init, |m, &b| self.update(m, b))
    }

    /// σ(μ⁺(β))
    pub fn eval(&self, beta: &[usize]) -> usize {
        self.action(self.memory_after(beta))
    }

    /// The exact set `{μ⁺(β) : β ∈ B*}`.
    pub fn reachable_memory(&self) -> BTreeSet<usize> {
        let mut seen = BTreeSet::from([self.init]);
        let mut queue = VecDeque::from([self.init]);
        while let Some(m) = queue.pop_front() {
            for b in 0..self.alphabet.actions_b {
                let n = self.update(m, b);
                if seen.insert(n) {
                    queue.push_back(n);
                }
            }
        }
        seen
    }

    /// Same behavior, restricted to reachable memory renumbered in BFS order.
    pub fn restrict_reachable(&self) -> MealyStrategy {
        let nb = self.alphabet.actions_b;
        let mut order = vec![self.init];
        let mut index = vec![usize::MAX; self.num_memory()];
        index[self.init] = 0;
        let mut i = 0;
        while i < order.len() {
            let m = order[i];
            for b in 0..nb {
                let n = self.update(m, b);
                if index[n] == usize::MAX {
                    index[n] = order.len();
                    order.push(n);
                }
            }
            i += 1;
        }
        let act = order.iter().map(|&m| self.act[m]).collect();
        let update = order
            .iter()
            .flat_map(|&m| (0..nb).map(move |b| (m, b)))
            .map(|(m, b)| index[self.update(m, b)])
            .collect();
        let labels = order.iter().map(|&m| self.labels[m].clone()).collect();
        MealyStrategy { alphabet: self.alphabet, init: 0, act, update, labels }
    }

    /// BFS-canonical with every state reachable from the initial state 0.
    fn is_canonical(&self) -> bool {
        if self.init != 0 {
            return false;
        }
        let nb = self.alphabet.actions_b;
        let mut next_fresh = 1;
        for m in 0..self.num_memory() {
            if m >= next_fresh {
                return false;
            }
            for b in 0..nb {
                let n = self.update(m, b);
                if n == next_fresh {
                    next_fresh += 1;
                } else if n > next_fresh {
                    return false;
                }
            }
        }
        next_fresh == self.num_memory()
    }

    /// No two memory states have the same future behavior.
    fn is_minimal(&self) -> bool {
        let k = self.num_memory();
        let nb = self.alphabet.actions_b;
        let mut class: Vec<usize> = self.act.clone();
        let mut count = distinct(&class);
        loop {
            let sigs: Vec<Vec<usize>> = (0..k)
                .map(|m| {
                    let mut s = vec![class[m]];
                    s.extend((0..nb).map(|b| class[self.update(m, b)]));
                    s
                })
                .collect();
            let mut uniq: Vec<&Vec<usize>> = sigs.iter().collect();
            uniq.sort();
            uniq.dedup();
            let new_class: Vec<usize> = sigs.iter().map(|s| uniq.binary_search(&s).unwrap()).collect();
            let new_count = uniq.len();
            if new_count == count {
                return count == k;
            }
            class = new_class;
            count = new_count;
        }
    }
}

fn distinct(v: &[usize]) -> usize {
    v.iter().collect::<BTreeSet<_>>().len()
}

impl Strategy for MealyStrategy {
    fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    fn act(&self, beta: &[usize]) -> Result<usize> {
        self.alphabet.check_opponent(beta)?;
        Ok(self.eval(beta))
    }
}

type EvalFn<'a> = Box<dyn Fn(&[usize]) -> Result<usize> + 'a>;

/// A strategy given by an evaluation rule, defined up to an optional horizon.
pub struct FunctionStrategy<'a> {
    alphabet: Alphabet,
    horizon: Option<usize>,
    eval: EvalFn<'a>,
}

impl<'a> FunctionStrategy<'a> {
    pub fn new(alphabet: Alphabet, horizon: Option<usize>, f: impl Fn(&[usize]) -> usize + 'a) -> Self {
        FunctionStrategy { alphabet, horizon, eval: Box::new(move |b| Ok(f(b))) }
    }

    pub fn fallible(
        alphabet: Alphabet,
        horizon: Option<usize>,
        f: impl Fn(&[usize]) -> Result<usize> + 'a,
    ) -> Self {
        FunctionStrategy { alphabet, horizon, eval: Box::new(f) }
    }

    pub fn horizon(&self) -> Option<usize> {
        self.horizon
    }
}

impl std::fmt::Debug for FunctionStrategy<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FunctionStrategy")
            .field("alphabet", &self.alphabet)
            .field("horizon", &self.horizon)
            .finish_non_exhaustive()
    }
}

impl Strategy for FunctionStrategy<'_> {
    fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    fn act(&self, beta: &[usize]) -> Result<usize> {
        if let Some(h) = self.horizon {
            if beta.len() > h {
                return Err(Error::Horizon { len: beta.len(), horizon: h });
            }
        }
        self.alphabet.check_opponent(beta)?;
        let a = (self.eval)(beta)?;
        if a >= self.alphabet.actions_a {
            return input(format!("strategy returned action {a} outside A"));
        }
        Ok(a)
    }
}

/// Number of raw `(σ, μ)` tables with exactly `k` memory states.
pub fn raw_machine_count(alphabet: Alphabet, k: usize) -> u128 {
    (alphabet.actions_a as u128).pow(k as u32) * (k as u128).pow((k * alphabet.actions_b) as u32)
}

/// Enumerates every behavior implementable with at most `memory_bound`
/// memory states, one machine per behavior.
///
/// Machines are BFS-canonical (initial state 0, all states reachable) and
/// minimal, so isomorphic or output-equivalent machines are pruned. Fails
/// with [`Error::Budget`] when the raw table count exceeds `budget`.
pub fn enumerate_mealy(
    alphabet: Alphabet,
    memory_bound: usize,
    budget: u128,
) -> Result<impl Iterator<Item = MealyStrategy>> {
    if memory_bound == 0 {
        return input("memory bound must be at least 1");
    }
    let raw: u128 = (1..=memory_bound).map(|k| raw_machine_count(alphabet, k)).sum();
    if raw > budget {
        return Err(Error::Budget(format!(
            "{raw} raw machines up to {memory_bound} memory states exceed budget {budget}"
        )));
    }
    Ok((1..=memory_bound).flat_map(move |k| machines_of_size(alphabet, k)))
}

fn machines_of_size(alphabet: Alphabet, k: usize) -> Vec<MealyStrategy> {
    let nb = alphabet.actions_b;
    let na = alphabet.actions_a;
    let cells = k * nb;
    let mut out = Vec::new();
    let mut update = vec![0usize; cells];
    loop {
        let skeleton = MealyStrategy {
            alphabet,
            init: 0,
            act: vec![0; k],
            update: update.clone(),
            labels: (0..k).map(|i| format!("m{i}")).collect(),
        };
        if skeleton.is_canonical() {
            let mut act = vec![0usize; k];
            loop {
                let mut m = skeleton.clone();
                m.act = act.clone();
                if m.is_minimal() {
                    out.push(m);
                }
                if !odometer(&mut act, na) {
                    break;
                }
            }
        }
        if !odometer(&mut update, k) {
            break;
        }
    }
    out
}

/// Advances a little-endian counter; false once it wraps around.
fn odometer(digits: &mut [usize], base: usize) -> bool {
    for d in digits.iter_mut().rev() {
        *d += 1;
        if *d < base {
            return true;
        }
        *d = 0;
    }
    false
}
