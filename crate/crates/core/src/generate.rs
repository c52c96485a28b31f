//! Seeded random arenas for tests, benchmarks and sweeps.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::arena::{Arena, ArenaBuilder, Player};
use crate::rational::{int, rat, Rational};

fn names(prefix: &str, k: usize) -> Vec<String> {
    (0..k).map(|i| format!("{prefix}{i}")).collect()
}

fn weight(rng: &mut impl Rng, w_max: i64) -> Rational {
    int(rng.gen_range(-w_max..=w_max))
}

/// Random distribution over at most `support` distinct states, with
/// probabilities that are multiples of `1/12`.
fn distribution(rng: &mut impl Rng, n: usize, support: usize) -> Vec<(usize, Rational)> {
    let mut states: Vec<usize> = (0..n).collect();
    states.shuffle(rng);
    let k = rng.gen_range(1..=support.min(n));
    let mut parts = vec![1i64; k];
    for _ in k..12 {
        parts[rng.gen_range(0..k)] += 1;
    }
    states[..k].iter().zip(parts).map(|(&s, p)| (s, rat(p, 12))).collect()
}

/// Concurrent stochastic arena with `n` states, up to `max_actions`
/// actions per side and integer weights in `[-w_max, w_max]`.
pub fn random_concurrent(rng: &mut impl Rng, n: usize, max_actions: usize, w_max: i64) -> Arena {
    let mut b = ArenaBuilder::new();
    for s in names("s", n) {
        b.add_state(&s).unwrap();
    }
    for s in 0..n {
        let ka = rng.gen_range(1..=max_actions);
        let kb = rng.gen_range(1..=max_actions);
        b.set_actions(s, names("a", ka), names("b", kb)).unwrap();
        for a in 0..ka {
            for bb in 0..kb {
                let d = distribution(rng, n, 3);
                b.set_move(s, a, bb, weight(rng, w_max), d).unwrap();
            }
        }
    }
    b.build().unwrap()
}

/// Deterministic turn-based arena: each state is owned by one player (or
/// only by `owner` when given) and has between 1 and `max_out` edges.
pub fn random_turn_based(rng: &mut impl Rng, n: usize, max_out: usize, w_max: i64, owner: Option<Player>) -> Arena {
    let mut b = ArenaBuilder::new();
    for s in names("s", n) {
        b.add_state(&s).unwrap();
    }
    for s in 0..n {
        let who = owner.unwrap_or(if rng.gen_bool(0.5) { Player::Min } else { Player::Max });
        let k = rng.gen_range(1..=max_out);
        let (ka, kb) = match who {
            Player::Min => (k, 1),
            Player::Max => (1, k),
        };
        b.set_actions(s, names("a", ka), names("b", kb)).unwrap();
        for i in 0..k {
            let (a, bb) = match who {
                Player::Min => (i, 0),
                Player::Max => (0, i),
            };
            let to = rng.gen_range(0..n);
            b.set_move(s, a, bb, weight(rng, w_max), vec![(to, int(1))]).unwrap();
        }
    }
    b.build().unwrap()
}

/// One-player stochastic arena: `owner` has up to `max_actions` actions at
/// every state, the opponent a single one.
pub fn random_mdp(rng: &mut impl Rng, n: usize, max_actions: usize, w_max: i64, owner: Player) -> Arena {
    let mut b = ArenaBuilder::new();
    for s in names("s", n) {
        b.add_state(&s).unwrap();
    }
    for s in 0..n {
        let k = rng.gen_range(1..=max_actions);
        let (ka, kb) = match owner {
            Player::Min => (k, 1),
            Player::Max => (1, k),
        };
        b.set_actions(s, names("a", ka), names("b", kb)).unwrap();
        for i in 0..k {
            let (a, bb) = match owner {
                Player::Min => (i, 0),
                Player::Max => (0, i),
            };
            let d = distribution(rng, n, 2);
            b.set_move(s, a, bb, weight(rng, w_max), d).unwrap();
        }
    }
    b.build().unwrap()
}

/// Single deterministic cycle `s0 -> s1 -> ... -> s0` with the given weights.
pub fn cycle_arena(weights: &[Rational]) -> Arena {
    assert!(!weights.is_empty());
    let n = weights.len();
    let mut b = ArenaBuilder::new();
    for s in names("s", n) {
        b.add_state(&s).unwrap();
    }
    for (s, w) in weights.iter().enumerate() {
        b.set_actions(s, names("a", 1), names("b", 1)).unwrap();
        b.set_move(s, 0, 0, w.clone(), vec![((s + 1) % n, int(1))]).unwrap();
    }
    b.build().unwrap()
}
