use num::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{Arena, Player, StationaryStrategy};
use crate::error::{Error, Result};
use crate::rational::{to_f64, Rational};

/// Markov chain induced by a pair of stationary strategies. Row `s` of
/// `transition` and `weight[s]` are the action-averaged quantities.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovChain {
    pub states: Vec<String>,
    pub transition: Vec<Vec<Rational>>,
    pub weight: Vec<Rational>,
}

impl MarkovChain {
    pub fn rows_sum_to_one(&self) -> bool {
        self.transition.iter().all(|r| r.iter().sum::<Rational>().is_one())
    }
}

fn check_pair(arena: &Arena, min: &StationaryStrategy, max: &StationaryStrategy) -> Result<()> {
    if min.owner() != Player::Min || max.owner() != Player::Max {
        return Err(Error::StrategyMismatch("expected a (Min, Max) strategy pair".into()));
    }
    min.validate(arena)?;
    max.validate(arena)
}

pub fn induced_chain(arena: &Arena, min: &StationaryStrategy, max: &StationaryStrategy) -> Result<MarkovChain> {
    check_pair(arena, min, max)?;
    let n = arena.num_states();
    let mut transition = vec![vec![Rational::zero(); n]; n];
    let mut weight = vec![Rational::zero(); n];
    for s in 0..n {
        for (a, b, m) in arena.moves(s) {
            let pa = &min.distribution(s)[a];
            let pb = &max.distribution(s)[b];
            if pa.is_zero() || pb.is_zero() {
                continue;
            }
            let joint = pa * pb;
            weight[s] += &joint * &m.weight;
            for (t, p) in &m.successors {
                transition[s][*t] += &joint * p;
            }
        }
    }
    Ok(MarkovChain {
        states: arena.states().to_vec(),
        transition,
        weight,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Step {
    pub state: usize,
    pub a: usize,
    pub b: usize,
}

/// A finite play prefix; each successor has positive probability.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FinitePlay {
    pub steps: Vec<Step>,
}

impl FinitePlay {
    pub fn weights(&self, arena: &Arena) -> Vec<Rational> {
        self.steps.iter().map(|st| arena.mv(st.state, st.a, st.b).weight.clone()).collect()
    }

    pub fn is_consistent(&self, arena: &Arena) -> bool {
        self.steps.windows(2).all(|w| {
            arena
                .mv(w[0].state, w[0].a, w[0].b)
                .successors
                .iter()
                .any(|(t, _)| *t == w[1].state)
        })
    }

    pub fn to_json(&self, arena: &Arena) -> serde_json::Value {
        self.steps
            .iter()
            .map(|st| {
                serde_json::json!({
                    "state": arena.state_name(st.state),
                    "min": arena.min_actions(st.state)[st.a],
                    "max": arena.max_actions(st.state)[st.b],
                    "weight": crate::rational::format_rational(&arena.mv(st.state, st.a, st.b).weight),
                })
            })
            .collect::<Vec<_>>()
            .into()
    }
}

fn sample(rng: &mut ChaCha8Rng, probs: impl Iterator<Item = f64>) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, p) in probs.enumerate() {
        if p <= 0.0 {
            continue;
        }
        acc += p;
        last = i;
        if u < acc {
            return i;
        }
    }
    last
}

/// Samples a play prefix of `horizon` steps from `start`. Reproducible for
/// a given seed; no global random state is touched.
pub fn simulate(
    arena: &Arena,
    min: &StationaryStrategy,
    max: &StationaryStrategy,
    start: usize,
    seed: u64,
    horizon: usize,
) -> Result<FinitePlay> {
    check_pair(arena, min, max)?;
    if horizon == 0 {
        return Err(Error::Parameter("horizon must be at least 1".into()));
    }
    if start >= arena.num_states() {
        return Err(Error::Parameter("start state out of range".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut steps = Vec::with_capacity(horizon);
    let mut s = start;
    for _ in 0..horizon {
        let a = sample(&mut rng, min.distribution(s).iter().map(to_f64));
        let b = sample(&mut rng, max.distribution(s).iter().map(to_f64));
        steps.push(Step { state: s, a, b });
        let m = arena.mv(s, a, b);
        let k = sample(&mut rng, m.successors_f64.iter().map(|(_, p)| *p));
        s = m.successors[k].0;
    }
    Ok(FinitePlay { steps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arena::{fig1_arena, ArenaBuilder};
    use crate::rational::{int, rat};

    fn always(arena: &Arena, owner: Player, k: usize) -> StationaryStrategy {
        let picks: Vec<usize> = (0..arena.num_states())
            .map(|s| k.min(arena.actions(owner, s).len() - 1))
            .collect();
        StationaryStrategy::positional(arena, owner, &picks)
    }

    #[test]
    fn fig1_always_a_chain() {
        let a = fig1_arena();
        let c = induced_chain(&a, &always(&a, Player::Min, 0), &always(&a, Player::Max, 0)).unwrap();
        assert_eq!(c.weight, vec![int(4), int(-2)]);
        assert_eq!(c.transition[0], vec![int(0), int(1)]);
        assert_eq!(c.transition[1], vec![int(1), int(0)]);
    }

    #[test]
    fn fig1_uniform_mixing() {
        let a = fig1_arena();
        let c = induced_chain(&a, &StationaryStrategy::uniform(&a, Player::Min), &always(&a, Player::Max, 0)).unwrap();
        assert_eq!(c.transition[1], vec![rat(1, 2), rat(1, 2)]);
        assert_eq!(c.weight[1], rat(-3, 2));
        assert!(c.rows_sum_to_one());
    }

    #[test]
    fn fig1_always_a_simulation() {
        let a = fig1_arena();
        let (mn, mx) = (always(&a, Player::Min, 0), always(&a, Player::Max, 0));
        let play = simulate(&a, &mn, &mx, 0, 7, 6).unwrap();
        let expect: Vec<Rational> = [4, -2, 4, -2, 4, -2].iter().map(|&w| int(w)).collect();
        assert_eq!(play.weights(&a), expect);
        assert!(play.is_consistent(&a));
        assert_eq!(play, simulate(&a, &mn, &mx, 0, 99, 6).unwrap());
    }

    #[test]
    fn same_seed_same_play() {
        let a = fig1_arena();
        let (mn, mx) = (StationaryStrategy::uniform(&a, Player::Min), always(&a, Player::Max, 0));
        let p1 = simulate(&a, &mn, &mx, 0, 42, 200).unwrap();
        let p2 = simulate(&a, &mn, &mx, 0, 42, 200).unwrap();
        assert_eq!(p1, p2);
        assert!(p1.is_consistent(&a));
        assert!(simulate(&a, &mn, &mx, 0, 1, 0).is_err());
    }

    #[test]
    fn visit_frequencies_match_stationary_distribution() {
        // x -> x w.p. 3/4, x -> y w.p. 1/4; y -> x w.p. 1/2, y -> y w.p. 1/2.
        // Stationary distribution: (2/3, 1/3).
        let mut b = ArenaBuilder::new();
        b.add_state("x").unwrap();
        b.add_state("y").unwrap();
        for s in 0..2 {
            b.set_actions(s, vec!["_".into()], vec!["_".into()]).unwrap();
        }
        b.set("x", "_", "_", int(0), &[("x", rat(3, 4)), ("y", rat(1, 4))]).unwrap();
        b.set("y", "_", "_", int(1), &[("x", rat(1, 2)), ("y", rat(1, 2))]).unwrap();
        let a = b.build().unwrap();
        let (mn, mx) = (always(&a, Player::Min, 0), always(&a, Player::Max, 0));
        let play = simulate(&a, &mn, &mx, 0, 2024, 100_000).unwrap();
        let in_x = play.steps.iter().filter(|s| s.state == 0).count() as f64 / 1e5;
        assert!((in_x - 2.0 / 3.0).abs() < 0.02, "{in_x}");
    }
}
