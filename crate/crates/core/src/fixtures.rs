//! Shipped example games, embedded at compile time.

use crate::error::{Error, Result};
use crate::format::{parse_game, GameFile};

/// `(name, source)` for every shipped fixture.
pub const FIXTURES: &[(&str, &str)] = &[
    ("uni-mem", include_str!("../fixtures/uni_mem.game")),
    ("growing", include_str!("../fixtures/growing.game")),
    ("weak-not-plain", include_str!("../fixtures/weak_not_plain.game")),
    ("plain-not-strong", include_str!("../fixtures/plain_not_strong.game")),
    ("no-recall", include_str!("../fixtures/no_recall.game")),
    ("untimed", include_str!("../fixtures/untimed.game")),
    ("imitation", include_str!("../fixtures/imitation.game")),
    ("two-maximal", include_str!("../fixtures/two_maximal.game")),
    ("multiset", include_str!("../fixtures/multiset.game")),
    ("energy", include_str!("../fixtures/energy.game")),
    ("multiset-energy", include_str!("../fixtures/multiset_energy.game")),
];

pub fn names() -> impl Iterator<Item = &'static str> {
    FIXTURES.iter().map(|(n, _)| *n)
}

pub fn source(name: &str) -> Option<&'static str> {
    FIXTURES.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

pub fn fixture(name: &str) -> Result<GameFile> {
    let text = source(name).ok_or_else(|| {
        Error::Input(format!("unknown fixture '{name}' (known: {})", names().collect::<Vec<_>>().join(", ")))
    })?;
    parse_game(text)
}

pub fn all() -> Vec<GameFile> {
    names().map(|n| fixture(n).expect("shipped fixtures parse")).collect()
}
