//! Uniformization constructions: turn a (winning) strategy into one that
//! plays the same action after equivalent histories.
//!
//! * [`uniformize_recall`] / [`uniformize_recall_mealy`]: feed the strategy a
//!   virtual opponent history built one action at a time. Needs a
//!   time-aware, suffix-closed, perfectly recalling constraint.
//! * [`uniformize_backtrack`]: feed the strategy the lexicographically least
//!   opponent history whose induced history is equivalent to the actual one.
//! * [`uniformize_powerset`]: finite-memory version of the previous one,
//!   tracking every (memory, automaton state) pair consistent with the play.

use std::cell::RefCell;
use std::collections::{BTreeSet, HashMap, VecDeque};

use crate::constraint::{check_perfect_recall, check_suffix_closed, Constraint, TwoTapeDfa};
use crate::error::{Error, Result};
use crate::game::{induced_history, Alphabet, History, Letter};
use crate::strategy::{MealyStrategy, Strategy};

/// Default node budget per representative search in [`uniformize_backtrack`].
pub const DEFAULT_SEARCH_BUDGET: u64 = 1_000_000;
/// Default cap on reachable subsets in [`uniformize_powerset`].
pub const DEFAULT_SUBSET_BUDGET: usize = 200_000;

fn require_recall_preconditions(c: &Constraint) -> Result<()> {
    match c.as_two_tape() {
        Some(d) => {
            if !check_suffix_closed(d) {
                return Err(Error::Precondition(format!("constraint '{}' is not suffix-closed", d.name)));
            }
            if !check_perfect_recall(d) {
                return Err(Error::Precondition(format!("constraint '{}' is not perfectly recalling", d.name)));
            }
            Ok(())
        }
        None => {
            if !c.is_time_aware() {
                return Err(Error::Precondition(format!("constraint '{}' is not time-aware", c.name())));
            }
            log::warn!("trusting suffix closure and perfect recall of constraint '{}'", c.name());
            Ok(())
        }
    }
}

/// The least `c` with `h(s, βb) ∼ h(s, βc)`.
pub fn virtual_action<S: Strategy + ?Sized>(s: &S, beta: &[usize], b: usize, c: &Constraint) -> Result<usize> {
    let mut with = beta.to_vec();
    with.push(b);
    let target = induced_history(s, &with)?;
    for cand in 0..s.alphabet().actions_b {
        *with.last_mut().unwrap() = cand;
        if c.equiv(&target, &induced_history(s, &with)?) {
            return Ok(cand);
        }
    }
    // unreachable for a reflexive constraint: cand = b qualifies
    Err(Error::Precondition(format!("constraint '{}' is not reflexive", c.name())))
}

/// `s ∘ f_s`, where `f_s(βb) = f_s(β) · c(f_s(β), b)`; see [`uniformize_recall`].
pub struct RecallStrategy<S> {
    base: S,
    constraint: Constraint,
    memo: RefCell<HashMap<Vec<usize>, Vec<usize>>>,
}

impl<S: Strategy> RecallStrategy<S> {
    /// `f_s(β)`, computed incrementally and memoized on every prefix.
    pub fn virtual_history(&self, beta: &[usize]) -> Result<Vec<usize>> {
        self.base.alphabet().check_opponent(beta)?;
        let known = (0..=beta.len()).rev().find(|&k| k == 0 || self.memo.borrow().contains_key(&beta[..k])).unwrap();
        let mut f = if known == 0 { Vec::new() } else { self.memo.borrow()[&beta[..known]].clone() };
        for k in known..beta.len() {
            let c = virtual_action(&self.base, &f, beta[k], &self.constraint)?;
            f.push(c);
            self.memo.borrow_mut().insert(beta[..=k].to_vec(), f.clone());
        }
        Ok(f)
    }

    pub fn base(&self) -> &S {
        &self.base
    }
}

impl<S: Strategy> Strategy for RecallStrategy<S> {
    fn alphabet(&self) -> Alphabet {
        self.base.alphabet()
    }

    fn act(&self, beta: &[usize]) -> Result<usize> {
        let f = self.virtual_history(beta)?;
        self.base.act(&f)
    }
}

/// Pointwise uniformization under perfect recall.
///
/// Automaton constraints are checked for suffix closure and perfect recall;
/// key constraints must be time-aware and are otherwise trusted.
pub fn uniformize_recall<S: Strategy>(s: S, c: &Constraint) -> Result<RecallStrategy<S>> {
    require_recall_preconditions(c)?;
    Ok(RecallStrategy { base: s, constraint: c.clone(), memo: RefCell::new(HashMap::new()) })
}

/// Finite-memory version of [`uniformize_recall`] on memory `M × F`.
///
/// Memory `(m, q)` stores the strategy memory after the virtual history and
/// the automaton state after reading the virtual induced history against
/// itself. Only reachable pairs are built.
pub fn uniformize_recall_mealy(m: &MealyStrategy, d: &TwoTapeDfa) -> Result<MealyStrategy> {
    require_recall_preconditions(&Constraint::TwoTape(d.clone()))?;
    let nb = m.alphabet().actions_b;
    let mut index: HashMap<(usize, usize), usize> = HashMap::new();
    let mut states = vec![(m.init(), d.init())];
    index.insert(states[0], 0);
    let mut update = Vec::new();
    let mut i = 0;
    while i < states.len() {
        let (x, q) = states[i];
        let a = m.action(x);
        for b in 0..nb {
            let c = (0..nb)
                .find(|&c| d.is_accepting(d.next(q, Letter::new(a, b), Letter::new(a, c))))
                .ok_or_else(|| Error::Precondition(format!("no virtual action from automaton state {q}")))?;
            let cv = Letter::new(a, c);
            let next = (m.update(x, c), d.next(q, cv, cv));
            let id = *index.entry(next).or_insert_with(|| {
                states.push(next);
                states.len() - 1
            });
            update.push(id);
        }
        i += 1;
    }
    let act = states.iter().map(|&(x, _)| m.action(x)).collect();
    let labels = states.iter().map(|&(x, q)| format!("{}/{}", m.labels()[x], d.labels()[q])).collect();
    MealyStrategy::new(m.alphabet(), 0, act, update)?.with_labels(labels)
}

/// `s′(β) = s(f_s(h(s′, β)))` with `f_s(ρ)` the least opponent history whose
/// induced history is equivalent to `ρ`; see [`uniformize_backtrack`].
pub struct BacktrackStrategy<S> {
    base: S,
    constraint: Constraint,
    horizon: usize,
    budget: u64,
    actions: RefCell<HashMap<Vec<usize>, usize>>,
    reps: RefCell<HashMap<History, Vec<usize>>>,
}

impl<S: Strategy> BacktrackStrategy<S> {
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Least opponent history `β` (shortlex; for time-aware constraints
    /// only `|β| = |ρ|` qualifies) with `h(s, β) ∼ ρ`.
    pub fn representative(&self, rho: &[Letter]) -> Result<Vec<usize>> {
        if let Some(r) = self.reps.borrow().get(rho) {
            return Ok(r.clone());
        }
        let lengths: Vec<usize> = if self.constraint.is_time_aware() { vec![rho.len()] } else { (0..=rho.len()).collect() };
        let mut nodes = 0u64;
        for n in lengths {
            if let Some(r) = self.search(rho, n, &mut nodes)? {
                self.reps.borrow_mut().insert(rho.to_vec(), r.clone());
                return Ok(r);
            }
        }
        Err(Error::Precondition(format!(
            "no opponent history induces a history equivalent to one of length {}; is the constraint suffix-closed?",
            rho.len()
        )))
    }

    /// Lexicographic DFS over `B^n`. Automaton constraints prune prefixes from
    /// which no accepting state is reachable in the remaining steps.
    fn search(&self, rho: &[Letter], n: usize, nodes: &mut u64) -> Result<Option<Vec<usize>>> {
        let alph = self.base.alphabet();
        let dfa = self.constraint.as_two_tape().filter(|_| n == rho.len());
        // alive[k][q]: from q after k letters, an accepting state is reachable
        let alive: Option<Vec<Vec<bool>>> = dfa.map(|d| {
            let nq = d.num_states();
            let mut alive = vec![vec![false; nq]; n + 1];
            alive[n] = (0..nq).map(|q| d.is_accepting(q)).collect();
            for k in (0..n).rev() {
                alive[k] = (0..nq).map(|q| alph.letters().any(|x| alive[k + 1][d.next(q, x, rho[k])])).collect();
            }
            alive
        });
        let mut beta = Vec::with_capacity(n);
        let mut hist: History = Vec::with_capacity(n);
        let mut dfa_states = vec![dfa.map_or(0, |d| d.init())];
        // iterative DFS: `next[k]` is the next action to try at depth k
        let mut next = vec![0usize; n + 1];
        loop {
            let k = beta.len();
            if k == n {
                let ok = match dfa {
                    Some(d) => d.is_accepting(dfa_states[k]),
                    None => self.constraint.equiv(&hist, rho),
                };
                if ok {
                    return Ok(Some(beta));
                }
            } else if next[k] < alph.actions_b {
                let b = next[k];
                next[k] += 1;
                *nodes += 1;
                if *nodes > self.budget {
                    return Err(Error::Budget(format!("representative search exceeded {} nodes", self.budget)));
                }
                let a = self.base.act(&beta)?;
                let l = Letter::new(a, b);
                if let (Some(d), Some(alive)) = (dfa, &alive) {
                    let q = d.next(dfa_states[k], l, rho[k]);
                    if !alive[k + 1][q] {
                        continue;
                    }
                    dfa_states.push(q);
                }
                beta.push(b);
                hist.push(l);
                next[k + 1] = 0;
                continue;
            }
            // backtrack
            if beta.pop().is_none() {
                return Ok(None);
            }
            hist.pop();
            if dfa.is_some() {
                dfa_states.pop();
            }
        }
    }

    /// `h(s′, β)`.
    pub fn own_history(&self, beta: &[usize]) -> Result<History> {
        induced_history(self, beta)
    }
}

impl<S: Strategy> Strategy for BacktrackStrategy<S> {
    fn alphabet(&self) -> Alphabet {
        self.base.alphabet()
    }

    fn act(&self, beta: &[usize]) -> Result<usize> {
        if beta.len() > self.horizon {
            return Err(Error::Horizon { len: beta.len(), horizon: self.horizon });
        }
        self.base.alphabet().check_opponent(beta)?;
        if let Some(&a) = self.actions.borrow().get(beta) {
            return Ok(a);
        }
        let mut rho = Vec::with_capacity(beta.len());
        for k in 0..beta.len() {
            rho.push(Letter::new(self.act(&beta[..k])?, beta[k]));
        }
        let rep = self.representative(&rho)?;
        let a = self.base.act(&rep)?;
        self.actions.borrow_mut().insert(beta.to_vec(), a);
        Ok(a)
    }
}

/// Uniformization by backtracking, defined for opponent histories up to
/// `horizon`. `budget` bounds each representative search (in DFS nodes).
///
/// Automaton constraints are checked for suffix closure. For constraints
/// that are not time-aware the representative is the shortlex-least one.
pub fn uniformize_backtrack<S: Strategy>(s: S, c: &Constraint, horizon: usize, budget: u64) -> Result<BacktrackStrategy<S>> {
    if let Some(d) = c.as_two_tape() {
        if !check_suffix_closed(d) {
            return Err(Error::Precondition(format!("constraint '{}' is not suffix-closed", d.name)));
        }
    } else {
        log::warn!("trusting suffix closure of constraint '{}'", c.name());
    }
    Ok(BacktrackStrategy {
        base: s,
        constraint: c.clone(),
        horizon,
        budget,
        actions: RefCell::new(HashMap::new()),
        reps: RefCell::new(HashMap::new()),
    })
}

type Subset = BTreeSet<(usize, usize)>;

/// Finite-memory uniformization over subsets of `M × Q`.
///
/// Only subsets reachable from `{(m0, q0)}` are built; more than `budget` of
/// them is a [`Error::Budget`].
pub fn uniformize_powerset(m: &MealyStrategy, d: &TwoTapeDfa, budget: usize) -> Result<MealyStrategy> {
    if !check_suffix_closed(d) {
        return Err(Error::Precondition(format!("constraint '{}' is not suffix-closed", d.name)));
    }
    let nb = m.alphabet().actions_b;
    let choose = |c: &Subset| -> Result<usize> {
        c.iter()
            .filter(|&&(_, q)| d.is_accepting(q))
            .map(|&(x, _)| x)
            .min()
            .map(|x| m.action(x))
            .ok_or_else(|| Error::Precondition("subset without accepting automaton state".into()))
    };
    let init: Subset = [(m.init(), d.init())].into();
    let mut index: HashMap<Subset, usize> = HashMap::from([(init.clone(), 0)]);
    let mut subsets = vec![init];
    let mut act = Vec::new();
    let mut update = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        let c = subsets[i].clone();
        let a = choose(&c)?;
        act.push((i, a));
        for b in 0..nb {
            let mut next = Subset::new();
            for &(x, q) in &c {
                let ax = m.action(x);
                for b2 in 0..nb {
                    next.insert((m.update(x, b2), d.next(q, Letter::new(a, b), Letter::new(ax, b2))));
                }
            }
            let id = match index.get(&next) {
                Some(&id) => id,
                None => {
                    if subsets.len() >= budget {
                        return Err(Error::Budget(format!("powerset construction exceeded {budget} subsets")));
                    }
                    subsets.push(next.clone());
                    index.insert(next, subsets.len() - 1);
                    queue.push_back(subsets.len() - 1);
                    subsets.len() - 1
                }
            };
            update.push((i, b, id));
        }
    }
    let n = subsets.len();
    let mut act_table = vec![0; n];
    for (i, a) in act {
        act_table[i] = a;
    }
    let mut upd_table = vec![0; n * nb];
    for (i, b, t) in update {
        upd_table[i * nb + b] = t;
    }
    let labels = subsets
        .iter()
        .map(|c| {
            let parts: Vec<String> = c.iter().map(|&(x, q)| format!("{}/{}", m.labels()[x], d.labels()[q])).collect();
            format!("{{{}}}", parts.join(","))
        })
        .collect();
    MealyStrategy::new(m.alphabet(), 0, act_table, upd_table)?.with_labels(labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraint::{equality, universal_time_aware};
    use crate::game::words;
    use crate::strategy::FunctionStrategy;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_mealy(rng: &mut ChaCha8Rng, alph: Alphabet, k: usize) -> MealyStrategy {
        let act: Vec<usize> = (0..k).map(|_| rng.gen_range(0..alph.actions_a)).collect();
        let upd: Vec<usize> = (0..k * alph.actions_b).map(|_| rng.gen_range(0..k)).collect();
        MealyStrategy::new(alph, 0, act, upd).unwrap()
    }

    #[test]
    fn virtual_action_trivial_constraints() {
        let alph = Alphabet::new(2, 3);
        let s = FunctionStrategy::new(alph, None, |b| b.iter().sum::<usize>() % 2);
        let eq: Constraint = equality(alph).into();
        let un: Constraint = universal_time_aware(alph).into();
        for beta in words(3, 2) {
            for b in 0..3 {
                assert_eq!(virtual_action(&s, &beta, b, &eq).unwrap(), b);
                assert_eq!(virtual_action(&s, &beta, b, &un).unwrap(), 0);
            }
        }
    }

    #[test]
    fn recall_trivial_constraints() {
        let alph = Alphabet::new(2, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = random_mealy(&mut rng, alph, 3);
        let id = uniformize_recall(&m, &equality(alph).into()).unwrap();
        let un = uniformize_recall(&m, &universal_time_aware(alph).into()).unwrap();
        for n in 0..=6 {
            for beta in words(2, n) {
                assert_eq!(id.act(&beta).unwrap(), m.eval(&beta));
                assert_eq!(un.act(&beta).unwrap(), m.eval(&vec![0; n]));
            }
        }
    }

    #[test]
    fn recall_virtual_history_preserves_length_and_prefix() {
        let alph = Alphabet::new(2, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let arena = crate::game::Arena::from_fn(
            "r",
            vec!["a0".into(), "a1".into()],
            vec!["b0".into(), "b1".into()],
            vec!["q0".into(), "q1".into()],
            vec!["c0".into(), "c1".into()],
            |q, a, b| ((q + a + b) % 2, (a * b) % 2),
        )
        .unwrap();
        let d = crate::constraint::state_color_constraint(&arena, crate::constraint::StateColorMode::FullSequence);
        let m = random_mealy(&mut rng, alph, 3);
        let r = uniformize_recall(&m, &d.clone().into()).unwrap();
        for n in 0..=6 {
            for beta in words(2, n) {
                let f = r.virtual_history(&beta).unwrap();
                assert_eq!(f.len(), n);
                if n > 0 {
                    assert!(f.starts_with(&r.virtual_history(&beta[..n - 1]).unwrap()));
                }
                // representative law
                let h1 = induced_history(&m, &f).unwrap();
                let h2 = induced_history(&r, &beta).unwrap();
                assert!(d.accepts(&h1, &h2));
            }
        }
    }

    #[test]
    fn recall_rejects_missing_recall() {
        let alph = Alphabet::new(1, 2);
        let two = TwoTapeDfa::from_fn("two", alph, 4, 0, |q| q == 0 || q == 2, |q, _, _| (q + 1).min(3)).unwrap();
        let m = MealyStrategy::constant(alph, 0).unwrap();
        assert!(matches!(uniformize_recall(&m, &two.clone().into()), Err(Error::Precondition(_))));
        assert!(matches!(uniformize_recall_mealy(&m, &two), Err(Error::Precondition(_))));
    }

    #[test]
    fn recall_mealy_trivial() {
        let alph = Alphabet::new(2, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let m = random_mealy(&mut rng, alph, 3);
        let out = uniformize_recall_mealy(&m, &equality(alph)).unwrap();
        for n in 0..=6 {
            for beta in words(2, n) {
                assert_eq!(out.eval(&beta), m.eval(&beta));
            }
        }
    }

    #[test]
    fn backtrack_trivial_and_horizon() {
        let alph = Alphabet::new(2, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = random_mealy(&mut rng, alph, 3);
        let id = uniformize_backtrack(&m, &equality(alph).into(), 5, DEFAULT_SEARCH_BUDGET).unwrap();
        let un = uniformize_backtrack(&m, &universal_time_aware(alph).into(), 5, DEFAULT_SEARCH_BUDGET).unwrap();
        for n in 0..=5 {
            for beta in words(2, n) {
                assert_eq!(id.act(&beta).unwrap(), m.eval(&beta));
                assert_eq!(un.act(&beta).unwrap(), m.eval(&vec![0; n]));
            }
        }
        assert!(matches!(id.act(&[0; 6]), Err(Error::Horizon { len: 6, horizon: 5 })));
    }

    #[test]
    fn backtrack_budget() {
        let alph = Alphabet::new(2, 2);
        let m = MealyStrategy::constant(alph, 0).unwrap();
        let key: Constraint = crate::constraint::KeyConstraint::new("last-b", true, |rho: &[Letter]| vec![rho.last().map_or(0, |l| l.b as i64)]).into();
        let s = uniformize_backtrack(&m, &key, 30, 10).unwrap();
        assert!(matches!(s.act(&[1; 20]), Err(Error::Budget(_))));
    }

    #[test]
    fn powerset_trivial_equality() {
        let alph = Alphabet::new(2, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..5 {
            let m = random_mealy(&mut rng, alph, 3);
            let out = uniformize_powerset(&m, &equality(alph), DEFAULT_SUBSET_BUDGET).unwrap();
            for n in 0..=6 {
                for beta in words(2, n) {
                    assert_eq!(out.eval(&beta), m.eval(&beta));
                }
            }
        }
    }

    #[test]
    fn powerset_memory_invariant() {
        let alph = Alphabet::new(2, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let arena = crate::game::Arena::from_fn(
            "r",
            vec!["a0".into(), "a1".into()],
            vec!["b0".into(), "b1".into()],
            vec!["q0".into(), "q1".into(), "q2".into()],
            vec!["c0".into(), "c1".into()],
            |q, a, b| ((q + a + 2 * b) % 3, (q + a) % 2),
        )
        .unwrap();
        let d = crate::constraint::state_color_constraint(&arena, crate::constraint::StateColorMode::CurrentState);
        for _ in 0..5 {
            let m = random_mealy(&mut rng, alph, 3);
            let out = uniformize_powerset(&m, &d, DEFAULT_SUBSET_BUDGET).unwrap();
            for n in 0..=4 {
                for bar in words(2, n) {
                    let hbar = induced_history(&out, &bar).unwrap();
                    let expected: Subset = words(2, n)
                        .iter()
                        .map(|beta| (m.memory_after(beta), d.run(&hbar, &induced_history(&m, beta).unwrap()).unwrap()))
                        .collect();
                    let label = &out.labels()[out.memory_after(&bar)];
                    let parts: Vec<String> = expected.iter().map(|&(x, q)| format!("{}/{}", m.labels()[x], d.labels()[q])).collect();
                    assert_eq!(label, &format!("{{{}}}", parts.join(",")));
                }
            }
        }
    }

    #[test]
    fn powerset_budget() {
        let alph = Alphabet::new(2, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let m = random_mealy(&mut rng, alph, 3);
        assert!(matches!(uniformize_powerset(&m, &equality(alph), 1), Err(Error::Budget(_))));
    }

    #[test]
    fn lipschitz_random_pairs() {
        let alph = Alphabet::new(2, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let un: Constraint = universal_time_aware(alph).into();
        for _ in 0..10 {
            let n = rng.gen_range(1..=5);
            let table: Vec<usize> = (0..64).map(|_| rng.gen_range(0..2)).collect();
            let flip: usize = rng.gen_range(0..2);
            let enc = |b: &[usize]| b.iter().fold(1usize, |acc, &x| acc * 2 + x) % 64;
            let s1 = FunctionStrategy::new(alph, None, |b| table[enc(b)]);
            let s2 = FunctionStrategy::new(alph, None, |b| if b.len() >= n { table[enc(b)] ^ flip ^ 1 } else { table[enc(b)] });
            let r1 = uniformize_recall(&s1, &un).unwrap();
            let r2 = uniformize_recall(&s2, &un).unwrap();
            let k1 = uniformize_backtrack(&s1, &un, 6, DEFAULT_SEARCH_BUDGET).unwrap();
            let k2 = uniformize_backtrack(&s2, &un, 6, DEFAULT_SEARCH_BUDGET).unwrap();
            for len in 0..n {
                for beta in words(2, len) {
                    assert_eq!(r1.act(&beta).unwrap(), r2.act(&beta).unwrap());
                    assert_eq!(k1.act(&beta).unwrap(), k2.act(&beta).unwrap());
                }
            }
        }
    }
}
