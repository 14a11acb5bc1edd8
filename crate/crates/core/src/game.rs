//! Arenas, histories, runs and the induced-history function.
//!
//! Actions, states and colors are referred to by their index in the arena's
//! declaration lists. The declaration order of Player 2 actions is the total
//! order used for every tie-break in the library.

use std::fmt;

use num_rational::Ratio;

use crate::error::{input, Error, Result};
use crate::strategy::Strategy;

/// Exact energy weights.
pub type Rational = Ratio<i64>;

/// One round of play: Player 1 chose `a`, Player 2 chose `b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter {
    pub a: usize,
    pub b: usize,
}

impl Letter {
    pub const fn new(a: usize, b: usize) -> Self {
        Letter { a, b }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.a, self.b)
    }
}

/// A finite sequence of action pairs.
pub type History = Vec<Letter>;

/// Sizes of the two action sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Alphabet {
    pub actions_a: usize,
    pub actions_b: usize,
}

impl Alphabet {
    pub const fn new(actions_a: usize, actions_b: usize) -> Self {
        Alphabet { actions_a, actions_b }
    }

    pub fn num_letters(&self) -> usize {
        self.actions_a * self.actions_b
    }

    pub fn letter_index(&self, l: Letter) -> usize {
        l.a * self.actions_b + l.b
    }

    pub fn letter(&self, idx: usize) -> Letter {
        Letter::new(idx / self.actions_b, idx % self.actions_b)
    }

    pub fn letters(&self) -> impl Iterator<Item = Letter> + '_ {
        (0..self.num_letters()).map(move |i| self.letter(i))
    }

    pub fn check_letter(&self, l: Letter) -> Result<()> {
        if l.a >= self.actions_a || l.b >= self.actions_b {
            return input(format!("letter {l} outside alphabet {}x{}", self.actions_a, self.actions_b));
        }
        Ok(())
    }

    pub fn check_opponent(&self, beta: &[usize]) -> Result<()> {
        match beta.iter().find(|&&b| b >= self.actions_b) {
            Some(b) => input(format!("opponent action {b} outside B (|B| = {})", self.actions_b)),
            None => Ok(()),
        }
    }

    /// All histories of length exactly `n`, in lexicographic letter order.
    pub fn histories(&self, n: usize) -> Vec<History> {
        let mut out = vec![Vec::new()];
        for _ in 0..n {
            let mut next = Vec::with_capacity(out.len() * self.num_letters());
            for h in &out {
                for l in self.letters() {
                    let mut h2 = h.clone();
                    h2.push(l);
                    next.push(h2);
                }
            }
            out = next;
        }
        out
    }
}

/// All words of length `n` over `{0..k}` in lexicographic order.
pub fn words(k: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|w| {
                (0..k).map(move |x| {
                    let mut w2 = w.clone();
                    w2.push(x);
                    w2
                })
            })
            .collect();
    }
    out
}

/// Opponent projection of a history.
pub fn opponent_projection(rho: &[Letter]) -> Vec<usize> {
    rho.iter().map(|l| l.b).collect()
}

/// A finite concurrent arena with edge colors and optional energy weights.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Arena {
    pub name: String,
    pub actions_a: Vec<String>,
    pub actions_b: Vec<String>,
    pub states: Vec<String>,
    pub initial: usize,
    pub colors: Vec<String>,
    delta: Vec<usize>,
    col: Vec<usize>,
    weights: Option<Vec<Rational>>,
}

impl Arena {
    /// Builds an arena from a total edge function `(q, a, b) -> (q', color)`.
    pub fn from_fn(
        name: impl Into<String>,
        actions_a: Vec<String>,
        actions_b: Vec<String>,
        states: Vec<String>,
        colors: Vec<String>,
        mut edge: impl FnMut(usize, usize, usize) -> (usize, usize),
    ) -> Result<Self> {
        let (na, nb, nq) = (actions_a.len(), actions_b.len(), states.len());
        let mut delta = Vec::with_capacity(nq * na * nb);
        let mut col = Vec::with_capacity(nq * na * nb);
        for q in 0..nq {
            for a in 0..na {
                for b in 0..nb {
                    let (t, c) = edge(q, a, b);
                    delta.push(t);
                    col.push(c);
                }
            }
        }
        Self::from_tables(name, actions_a, actions_b, states, 0, colors, delta, col, None)
    }

    /// Builds an arena from flat tables indexed by `(q * |A| + a) * |B| + b`.
    #[allow(clippy::too_many_arguments)]
    pub fn from_tables(
        name: impl Into<String>,
        actions_a: Vec<String>,
        actions_b: Vec<String>,
        states: Vec<String>,
        initial: usize,
        colors: Vec<String>,
        delta: Vec<usize>,
        col: Vec<usize>,
        weights: Option<Vec<Rational>>,
    ) -> Result<Self> {
        if actions_a.is_empty() || actions_b.is_empty() || states.is_empty() || colors.is_empty() {
            return input("arena needs non-empty action, state and color sets");
        }
        let n = states.len() * actions_a.len() * actions_b.len();
        if delta.len() != n || col.len() != n {
            return input(format!("edge tables must have {n} entries"));
        }
        if initial >= states.len() {
            return input("initial state out of range");
        }
        if delta.iter().any(|&t| t >= states.len()) {
            return input("edge target out of range");
        }
        if col.iter().any(|&c| c >= colors.len()) {
            return input("edge color out of range");
        }
        if let Some(w) = &weights {
            if w.len() != colors.len() {
                return input("one weight per color required");
            }
        }
        Ok(Arena {
            name: name.into(),
            actions_a,
            actions_b,
            states,
            initial,
            colors,
            delta,
            col,
            weights,
        })
    }

    pub fn with_initial(mut self, q: usize) -> Result<Self> {
        if q >= self.states.len() {
            return input("initial state out of range");
        }
        self.initial = q;
        Ok(self)
    }

    pub fn with_weights(mut self, weights: Vec<Rational>) -> Result<Self> {
        if weights.len() != self.colors.len() {
            return input("one weight per color required");
        }
        self.weights = Some(weights);
        Ok(self)
    }

    pub fn alphabet(&self) -> Alphabet {
        Alphabet::new(self.actions_a.len(), self.actions_b.len())
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_colors(&self) -> usize {
        self.colors.len()
    }

    fn idx(&self, q: usize, a: usize, b: usize) -> usize {
        (q * self.actions_a.len() + a) * self.actions_b.len() + b
    }

    pub fn next(&self, q: usize, a: usize, b: usize) -> usize {
        self.delta[self.idx(q, a, b)]
    }

    pub fn color(&self, q: usize, a: usize, b: usize) -> usize {
        self.col[self.idx(q, a, b)]
    }

    pub fn weights(&self) -> Option<&[Rational]> {
        self.weights.as_deref()
    }

    pub fn weight(&self, color: usize) -> Result<Rational> {
        match &self.weights {
            Some(w) => Ok(w[color]),
            None => input(format!("arena '{}' has no energy weights", self.name)),
        }
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s == name)
    }

    pub fn color_index(&self, name: &str) -> Option<usize> {
        self.colors.iter().position(|s| s == name)
    }

    /// Current state after reading `rho`.
    pub fn state_after(&self, rho: &[Letter]) -> usize {
        rho.iter().fold(self.initial, |q, l| self.next(q, l.a, l.b))
    }
}

/// State and color traces of a history.
///
/// The state sequence starts with the initial state, so it is one longer
/// than the color sequence.
pub fn traces(arena: &Arena, rho: &[Letter]) -> Result<(Vec<usize>, Vec<usize>)> {
    let alph = arena.alphabet();
    let mut states = Vec::with_capacity(rho.len() + 1);
    let mut colors = Vec::with_capacity(rho.len());
    let mut q = arena.initial;
    states.push(q);
    for &l in rho {
        alph.check_letter(l)?;
        colors.push(arena.color(q, l.a, l.b));
        q = arena.next(q, l.a, l.b);
        states.push(q);
    }
    Ok((states, colors))
}

/// An ultimately periodic word `stem · cycle^ω`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Lasso<T> {
    pub stem: Vec<T>,
    pub cycle: Vec<T>,
}

impl<T: Copy> Lasso<T> {
    pub fn new(stem: Vec<T>, cycle: Vec<T>) -> Result<Self> {
        if cycle.is_empty() {
            return Err(Error::Input("lasso cycle must be non-empty".into()));
        }
        Ok(Lasso { stem, cycle })
    }

    pub fn at(&self, i: usize) -> T {
        if i < self.stem.len() {
            self.stem[i]
        } else {
            self.cycle[(i - self.stem.len()) % self.cycle.len()]
        }
    }

    pub fn prefix(&self, n: usize) -> Vec<T> {
        (0..n).map(|i| self.at(i)).collect()
    }
}

impl<T: fmt::Display> fmt::Display for Lasso<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[T]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
        write!(f, "[{}]({})^w", join(&self.stem), join(&self.cycle))
    }
}

/// `h(s, beta)`: the history produced when Player 1 follows `s` against `beta`.
pub fn induced_history<S: Strategy + ?Sized>(s: &S, beta: &[usize]) -> Result<History> {
    s.alphabet().check_opponent(beta)?;
    let mut out = Vec::with_capacity(beta.len());
    for (i, &b) in beta.iter().enumerate() {
        out.push(Letter::new(s.act(&beta[..i])?, b));
    }
    Ok(out)
}

/// Length-`n` prefix of the run induced by `s` against the opponent lasso.
pub fn run_history<S: Strategy + ?Sized>(s: &S, lasso: &Lasso<usize>, n: usize) -> Result<History> {
    induced_history(s, &lasso.prefix(n))
}
