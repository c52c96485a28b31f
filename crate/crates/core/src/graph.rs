//! Graph views of deterministic arenas shared by the exact solvers.

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use crate::arena::{Arena, Player, StationaryStrategy};
use crate::error::{Error, Result};
use crate::rational::Rational;

/// One action pair of a deterministic arena seen as an edge.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub to: usize,
    pub weight: Rational,
}

/// Outgoing edges per state, in action order. Fails on stochastic moves.
pub fn det_edges(arena: &Arena) -> Result<Vec<Vec<Edge>>> {
    (0..arena.num_states())
        .map(|s| {
            arena
                .moves(s)
                .map(|(a, b, m)| {
                    let to = m.target().ok_or_else(|| {
                        Error::UnsupportedClass(format!(
                            "move {}|{}|{} is not deterministic",
                            arena.state_name(s),
                            arena.min_actions(s)[a],
                            arena.max_actions(s)[b]
                        ))
                    })?;
                    Ok(Edge {
                        a,
                        b,
                        to,
                        weight: m.weight.clone(),
                    })
                })
                .collect()
        })
        .collect()
}

/// Strongly connected components, sinks first.
pub fn sccs(n: usize, succ: impl Fn(usize) -> Vec<usize>) -> Vec<Vec<usize>> {
    let mut g = DiGraph::<(), ()>::with_capacity(n, n);
    let nodes: Vec<_> = (0..n).map(|_| g.add_node(())).collect();
    for s in 0..n {
        for t in succ(s) {
            g.add_edge(nodes[s], nodes[t], ());
        }
    }
    tarjan_scc(&g)
        .into_iter()
        .map(|c| {
            let mut c: Vec<usize> = c.into_iter().map(|x| x.index()).collect();
            c.sort_unstable();
            c
        })
        .collect()
}

/// Positional strategies for both players from one chosen edge per state.
/// The passive player at each state has a single action anyway.
pub fn strategies_from_edges(
    arena: &Arena,
    edges: &[Vec<Edge>],
    choice: &[usize],
) -> (StationaryStrategy, StationaryStrategy) {
    let n = arena.num_states();
    let mut min_pick = vec![0; n];
    let mut max_pick = vec![0; n];
    for s in 0..n {
        let e = &edges[s][choice[s]];
        min_pick[s] = e.a;
        max_pick[s] = e.b;
    }
    (
        StationaryStrategy::positional(arena, Player::Min, &min_pick),
        StationaryStrategy::positional(arena, Player::Max, &max_pick),
    )
}

/// The player who chooses among the edges of `s` (Min when nobody does).
pub fn chooser(arena: &Arena, s: usize) -> Player {
    arena.controller(s).unwrap_or(Player::Min)
}

pub fn require_turn_based(arena: &Arena, what: &str) -> Result<()> {
    let class = arena.classify();
    if !class.turn_based || !class.deterministic {
        return Err(Error::UnsupportedClass(format!(
            "{what} needs a deterministic turn-based arena, got a {}",
            class.describe()
        )));
    }
    Ok(())
}
