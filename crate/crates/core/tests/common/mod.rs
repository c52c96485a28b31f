//! Brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use num::{One, Zero};
use pastgames::arena::{Arena, Player};
use pastgames::graph::{chooser, det_edges, Edge};
use pastgames::rational::{pow, Rational};

/// Limits of `P^n` along each residue of `n` modulo the cycle length, for
/// the periodic sequence `cycle^ω`: entry `r` ends at `cycle[r]`.
pub fn rotation_limits(cycle: &[Rational], gamma: &Rational) -> Vec<Rational> {
    let p = cycle.len();
    let denom = Rational::one() - pow(gamma, p);
    (0..p)
        .map(|r| {
            let mut acc = Rational::zero();
            for i in 0..p {
                acc += pow(gamma, i) * &cycle[(r + p - i) % p];
            }
            acc / &denom
        })
        .collect()
}

/// Plain `Σ γ^{n-k} w_k`.
pub fn direct_sum(w: &[Rational], gamma: &Rational) -> Rational {
    let n = w.len();
    w.iter().enumerate().map(|(k, x)| pow(gamma, n - 1 - k) * x).sum()
}

/// Cycle weights of the play from `s` where every state follows `choice`.
pub fn cycle_of(edges: &[Vec<Edge>], choice: &[usize], s: usize) -> Vec<Rational> {
    let mut seen = vec![usize::MAX; edges.len()];
    let mut ws = Vec::new();
    let mut cur = s;
    while seen[cur] == usize::MAX {
        seen[cur] = ws.len();
        let e = &edges[cur][choice[cur]];
        ws.push(e.weight.clone());
        cur = e.to;
    }
    ws.split_off(seen[cur])
}

fn advance(choice: &mut [usize], states: &[usize], edges: &[Vec<Edge>]) -> bool {
    for &s in states {
        choice[s] += 1;
        if choice[s] < edges[s].len() {
            return true;
        }
        choice[s] = 0;
    }
    false
}

fn owned(arena: &Arena, edges: &[Vec<Edge>], p: Player) -> Vec<usize> {
    (0..arena.num_states())
        .filter(|&s| chooser(arena, s) == p && edges[s].len() > 1)
        .collect()
}

fn count(states: &[usize], edges: &[Vec<Edge>]) -> u128 {
    states.iter().map(|&s| edges[s].len() as u128).product()
}

/// Mean-payoff values `min_σ max_τ` over positional profiles.
pub fn mean_enumeration(arena: &Arena) -> Vec<Rational> {
    let edges = det_edges(arena).unwrap();
    let n = arena.num_states();
    let mins = owned(arena, &edges, Player::Min);
    let maxs = owned(arena, &edges, Player::Max);
    let mut choice = vec![0usize; n];
    let mut best: Vec<Option<Rational>> = vec![None; n];
    loop {
        let mut resp: Vec<Option<Rational>> = vec![None; n];
        loop {
            for (s, slot) in resp.iter_mut().enumerate() {
                let c = cycle_of(&edges, &choice, s);
                let m: Rational = c.iter().sum::<Rational>() / Rational::from_integer(c.len().into());
                if slot.as_ref().is_none_or(|x| m > *x) {
                    *slot = Some(m);
                }
            }
            if !advance(&mut choice, &maxs, &edges) {
                break;
            }
        }
        for (b, r) in best.iter_mut().zip(resp) {
            let r = r.unwrap();
            if b.as_ref().is_none_or(|x| r < *x) {
                *b = Some(r);
            }
        }
        if !advance(&mut choice, &mins, &edges) {
            break;
        }
    }
    best.into_iter().map(Option::unwrap).collect()
}

/// Strongly connected component id per node, components numbered so that
/// every edge goes to an equal or smaller id (sinks get small ids).
fn components(succ: &[Vec<usize>]) -> Vec<usize> {
    let n = succ.len();
    let mut pred = vec![Vec::new(); n];
    for (u, vs) in succ.iter().enumerate() {
        for &v in vs {
            pred[v].push(u);
        }
    }
    // Kosaraju: finishing order on the forward graph, then sweep the reverse.
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    for root in 0..n {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let mut stack = vec![(root, 0usize)];
        while let Some((u, i)) = stack.pop() {
            if i < succ[u].len() {
                stack.push((u, i + 1));
                let v = succ[u][i];
                if !seen[v] {
                    seen[v] = true;
                    stack.push((v, 0));
                }
            } else {
                order.push(u);
            }
        }
    }
    let mut comp = vec![usize::MAX; n];
    let mut next = 0;
    for &root in order.iter().rev() {
        if comp[root] != usize::MAX {
            continue;
        }
        comp[root] = next;
        let mut stack = vec![root];
        while let Some(u) = stack.pop() {
            for &v in &pred[u] {
                if comp[v] == usize::MAX {
                    comp[v] = next;
                    stack.push(v);
                }
            }
        }
        next += 1;
    }
    // Sources come out first; flip so sinks are smallest.
    comp.iter().map(|c| next - 1 - c).collect()
}

type Graph = Vec<Vec<(usize, Rational)>>;

/// Lowest liminf reachable when Min picks every edge.
fn min_response(g: &Graph) -> Vec<Rational> {
    let n = g.len();
    let succ: Vec<Vec<usize>> = g.iter().map(|es| es.iter().map(|e| e.0).collect()).collect();
    let comp = components(&succ);
    let k = comp.iter().max().map_or(0, |m| m + 1);
    let mut best: Vec<Option<Rational>> = vec![None; k];
    for u in 0..n {
        for (v, w) in &g[u] {
            if comp[*v] == comp[u] && best[comp[u]].as_ref().is_none_or(|b| w < b) {
                best[comp[u]] = Some(w.clone());
            }
        }
    }
    // Successor components have smaller ids, so process ids upward.
    let mut by_comp: Vec<Vec<usize>> = vec![Vec::new(); k];
    for u in 0..n {
        by_comp[comp[u]].push(u);
    }
    for c in 0..k {
        for &u in &by_comp[c] {
            for &(v, _) in &g[u] {
                if comp[v] != c {
                    if let Some(x) = best[comp[v]].clone() {
                        if best[c].as_ref().is_none_or(|b| x < *b) {
                            best[c] = Some(x);
                        }
                    }
                }
            }
        }
    }
    (0..n).map(|u| best[comp[u]].clone().expect("every node reaches a cycle")).collect()
}

/// Highest liminf Max can force when picking every edge.
fn max_response(g: &Graph) -> Vec<Rational> {
    let n = g.len();
    let mut ts: Vec<Rational> = g.iter().flatten().map(|e| e.1.clone()).collect();
    ts.sort();
    ts.dedup();
    let mut pred = vec![Vec::new(); n];
    for (u, es) in g.iter().enumerate() {
        for e in es {
            pred[e.0].push(u);
        }
    }
    let mut val: Vec<Option<Rational>> = vec![None; n];
    for t in ts.iter().rev() {
        let succ: Vec<Vec<usize>> = g
            .iter()
            .map(|es| es.iter().filter(|e| e.1 >= *t).map(|e| e.0).collect())
            .collect();
        let comp = components(&succ);
        let mut good: Vec<usize> = (0..n)
            .filter(|&u| succ[u].iter().any(|&v| comp[v] == comp[u]))
            .collect();
        let mut mark = vec![false; n];
        for &u in &good {
            mark[u] = true;
        }
        while let Some(v) = good.pop() {
            for &u in &pred[v] {
                if !mark[u] {
                    mark[u] = true;
                    good.push(u);
                }
            }
        }
        for u in 0..n {
            if mark[u] && val[u].is_none() {
                val[u] = Some(t.clone());
            }
        }
        if val.iter().all(Option::is_some) {
            break;
        }
    }
    val.into_iter().map(Option::unwrap).collect()
}

/// Liminf values by enumerating positional strategies of the side with
/// fewer of them and answering with a graph best response. `None` when
/// that side has more than `budget` strategies.
pub fn liminf_enumeration(arena: &Arena, budget: u128) -> Option<Vec<Rational>> {
    let edges = det_edges(arena).unwrap();
    let n = arena.num_states();
    let mins = owned(arena, &edges, Player::Min);
    let maxs = owned(arena, &edges, Player::Max);
    let (side, enumerate_min) = if count(&mins, &edges) <= count(&maxs, &edges) {
        (mins, true)
    } else {
        (maxs, false)
    };
    if count(&side, &edges) > budget {
        return None;
    }
    let mut fixed = vec![false; n];
    for &s in &side {
        fixed[s] = true;
    }
    let mut choice = vec![0usize; n];
    let mut best: Vec<Option<Rational>> = vec![None; n];
    loop {
        let g: Graph = (0..n)
            .map(|s| {
                if fixed[s] {
                    let e = &edges[s][choice[s]];
                    vec![(e.to, e.weight.clone())]
                } else {
                    edges[s].iter().map(|e| (e.to, e.weight.clone())).collect()
                }
            })
            .collect();
        let resp = if enumerate_min { max_response(&g) } else { min_response(&g) };
        for (b, r) in best.iter_mut().zip(resp) {
            let better = b.as_ref().is_none_or(|x| if enumerate_min { r < *x } else { r > *x });
            if better {
                *b = Some(r);
            }
        }
        if !advance(&mut choice, &side, &edges) {
            break;
        }
    }
    Some(best.into_iter().map(Option::unwrap).collect())
}

/// Number of positional strategies the liminf oracle would enumerate.
pub fn liminf_enumeration_size(arena: &Arena) -> u128 {
    let edges = det_edges(arena).unwrap();
    let mins = owned(arena, &edges, Player::Min);
    let maxs = owned(arena, &edges, Player::Max);
    count(&mins, &edges).min(count(&maxs, &edges))
}
