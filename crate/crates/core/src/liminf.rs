//! Liminf games on deterministic turn-based arenas and one-player
//! stochastic arenas.

use crate::arena::{Arena, Player, PlayerCount, StationaryStrategy};
use crate::error::{Error, Result};
use crate::graph::{chooser, det_edges, require_turn_based, sccs, strategies_from_edges, Edge};
use crate::par::Exec;
use crate::rational::{to_f64, Rational};
use crate::report::{Method, ValueReport, ValueVector};

/// Max's winning region for "eventually only edges of weight ≥ t" and a
/// positional witness strategy.
#[derive(Debug, Clone)]
pub struct CoBuchiSolution {
    pub threshold: Rational,
    pub winning: Vec<bool>,
    /// Chosen edge at Max states of the winning region.
    pub max_choice: Vec<Option<usize>>,
}

/// Greatest `Y` with every state satisfying "some (Max) / every (Min) edge
/// is good into `Y` or goes into `z`".
fn nu_y(arena: &Arena, edges: &[Vec<Edge>], good: &[Vec<bool>], z: &[bool]) -> Vec<bool> {
    let n = edges.len();
    let mut pred: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (s, es) in edges.iter().enumerate() {
        for (ei, e) in es.iter().enumerate() {
            pred[e.to].push((s, ei));
        }
    }
    let mut y = vec![true; n];
    let mut ok_count = vec![0usize; n];
    let mut queue = Vec::new();
    for s in 0..n {
        let ok = (0..edges[s].len()).filter(|&ei| z[edges[s][ei].to] || good[s][ei]).count();
        ok_count[s] = ok;
        let fails = match chooser(arena, s) {
            Player::Max => ok == 0,
            Player::Min => ok < edges[s].len(),
        };
        if fails {
            y[s] = false;
            queue.push(s);
        }
    }
    while let Some(t) = queue.pop() {
        for &(s, ei) in &pred[t] {
            // this edge was ok only through y[t]
            if !y[s] || z[t] || !good[s][ei] {
                continue;
            }
            ok_count[s] -= 1;
            let fails = match chooser(arena, s) {
                Player::Max => ok_count[s] == 0,
                Player::Min => true,
            };
            if fails {
                y[s] = false;
                queue.push(s);
            }
        }
    }
    y
}

/// Co-Büchi game for Max at `threshold` by the nested fixpoint
/// `μZ. νY. (good ∩ Pre(Y)) ∪ Pre(Z)`.
pub fn solve_co_buchi(arena: &Arena, edges: &[Vec<Edge>], threshold: &Rational) -> CoBuchiSolution {
    let n = edges.len();
    let good: Vec<Vec<bool>> = edges.iter().map(|es| es.iter().map(|e| e.weight >= *threshold).collect()).collect();
    let mut z = vec![false; n];
    let mut max_choice = vec![None; n];
    loop {
        let y = nu_y(arena, edges, &good, &z);
        if y == z {
            break;
        }
        for s in (0..n).filter(|&s| y[s] && !z[s] && chooser(arena, s) == Player::Max) {
            let es = &edges[s];
            let down = (0..es.len()).find(|&ei| z[es[ei].to]);
            let stay = (0..es.len()).find(|&ei| good[s][ei] && y[es[ei].to]);
            max_choice[s] = down.or(stay);
        }
        z = y;
    }
    CoBuchiSolution {
        threshold: threshold.clone(),
        winning: z,
        max_choice,
    }
}

/// Min's edge choices inside `region` (the complement of Max's co-Büchi
/// region at `threshold`) forcing infinitely many edges below it.
fn buchi_min_choice(arena: &Arena, edges: &[Vec<Edge>], threshold: &Rational, region: &[bool]) -> Vec<Option<usize>> {
    let n = edges.len();
    let hit = |s: usize, ei: usize| edges[s][ei].weight < *threshold && region[edges[s][ei].to];
    let mut rank: Vec<Option<usize>> = vec![None; n];
    let mut choice = vec![None; n];
    let mut r = 0;
    loop {
        let mut added = Vec::new();
        for s in (0..n).filter(|&s| region[s] && rank[s].is_none()) {
            let es = &edges[s];
            let lower = |ei: usize| rank[es[ei].to].is_some();
            match chooser(arena, s) {
                Player::Min => {
                    if let Some(ei) = (0..es.len()).find(|&ei| hit(s, ei)).or_else(|| (0..es.len()).find(|&ei| lower(ei))) {
                        added.push((s, Some(ei)));
                    }
                }
                Player::Max => {
                    if (0..es.len()).all(|ei| hit(s, ei) || lower(ei)) {
                        added.push((s, None));
                    }
                }
            }
        }
        if added.is_empty() {
            break;
        }
        for (s, c) in added {
            rank[s] = Some(r);
            choice[s] = c;
        }
        r += 1;
    }
    choice
}

/// Exact liminf values: the largest weight threshold from which Max wins
/// the co-Büchi game, with positional strategies for both players.
pub fn solve_liminf_det_tb(arena: &Arena) -> Result<ValueReport> {
    solve_liminf_det_tb_with(arena, Exec::default())
}

pub fn solve_liminf_det_tb_with(arena: &Arena, exec: Exec) -> Result<ValueReport> {
    require_turn_based(arena, "co-Büchi threshold solver")?;
    let edges = det_edges(arena)?;
    let n = edges.len();
    let mut thresholds: Vec<Rational> = edges.iter().flatten().map(|e| e.weight.clone()).collect();
    thresholds.sort();
    thresholds.dedup();
    thresholds.reverse();
    let exec = if n * thresholds.len() >= 4096 { exec } else { Exec::Sequential };
    let sols = exec.map(&thresholds, |t| solve_co_buchi(arena, &edges, t));
    // descending thresholds: the first win is the value
    let level: Vec<usize> = (0..n)
        .map(|s| sols.iter().position(|sol| sol.winning[s]).expect("lowest threshold wins everywhere"))
        .collect();
    let mut choice = vec![0usize; n];
    for s in 0..n {
        let k = level[s];
        choice[s] = match chooser(arena, s) {
            Player::Max => sols[k].max_choice[s].expect("winning Max state has a witness edge"),
            Player::Min => 0,
        };
    }
    // Min at value level k plays against the next threshold up, k - 1.
    for k in 1..sols.len() {
        let region: Vec<bool> = sols[k - 1].winning.iter().map(|w| !w).collect();
        if !(0..n).any(|s| level[s] == k && chooser(arena, s) == Player::Min) {
            continue;
        }
        let mc = buchi_min_choice(arena, &edges, &sols[k - 1].threshold, &region);
        for s in (0..n).filter(|&s| level[s] == k && chooser(arena, s) == Player::Min) {
            choice[s] = mc[s].expect("Min wins the Büchi game on the complement");
        }
    }
    let (strategy_min, strategy_max) = strategies_from_edges(arena, &edges, &choice);
    Ok(ValueReport {
        method: Method::CoBuchiThreshold,
        epsilon: 0.0,
        values: ValueVector::Exact(level.iter().map(|&k| thresholds[k].clone()).collect()),
        strategy_min,
        strategy_max,
        iterations: thresholds.len(),
        residual: 0.0,
        certified: true,
        lambda: None,
        gamma: None,
    })
}

/// Action pairs of `s` allowed in a sub-MDP.
type Allowed = Vec<Vec<bool>>;

/// Maximal end components of the sub-MDP on `states` using `allowed`
/// action pairs (indexed as in [`Arena::moves`]).
pub fn maximal_end_components(arena: &Arena, states: &[bool], allowed: &Allowed) -> Vec<(Vec<usize>, Allowed)> {
    let n = arena.num_states();
    let mut inside = states.to_vec();
    let mut allow = allowed.clone();
    let succ_of = |s: usize, k: usize| arena.moves(s).nth(k).unwrap().2.successors.iter().map(|(t, _)| *t).collect::<Vec<_>>();
    loop {
        let comps = sccs(n, |s| {
            if !inside[s] {
                return Vec::new();
            }
            (0..allow[s].len())
                .filter(|&k| allow[s][k])
                .flat_map(|k| succ_of(s, k))
                .filter(|&t| inside[t])
                .collect()
        });
        let mut comp_of = vec![usize::MAX; n];
        for (c, comp) in comps.iter().enumerate() {
            for &s in comp {
                comp_of[s] = c;
            }
        }
        let mut changed = false;
        for s in 0..n {
            if !inside[s] {
                continue;
            }
            for k in 0..allow[s].len() {
                if allow[s][k] && succ_of(s, k).iter().any(|&t| !inside[t] || comp_of[t] != comp_of[s]) {
                    allow[s][k] = false;
                    changed = true;
                }
            }
            if !allow[s].iter().any(|&x| x) {
                inside[s] = false;
                changed = true;
            }
        }
        if !changed {
            return comps
                .into_iter()
                .filter(|c| c.iter().all(|&s| inside[s]))
                .map(|c| {
                    let mut a: Allowed = vec![Vec::new(); n];
                    for &s in &c {
                        a[s] = allow[s].clone();
                    }
                    (c, a)
                })
                .collect();
        }
    }
}

fn weight_of(arena: &Arena, s: usize, k: usize) -> &Rational {
    &arena.moves(s).nth(k).unwrap().2.weight
}

/// Positive-probability attractor ranks towards `target` using `allowed`
/// pairs; returns the progress pair per ranked state.
fn prob_ranks(arena: &Arena, target: &[bool], allowed: &Allowed, scope: &[bool]) -> Vec<Option<usize>> {
    let n = arena.num_states();
    let mut reached = target.to_vec();
    let mut pick = vec![None; n];
    loop {
        let mut added = Vec::new();
        for s in (0..n).filter(|&s| scope[s] && !reached[s]) {
            let k = arena
                .moves(s)
                .enumerate()
                .find(|(k, (_, _, m))| allowed[s].get(*k).copied().unwrap_or(false) && m.successors.iter().any(|(t, _)| reached[*t]));
            if let Some((k, _)) = k {
                added.push((s, k));
            }
        }
        if added.is_empty() {
            return pick;
        }
        for (s, k) in added {
            reached[s] = true;
            pick[s] = Some(k);
        }
    }
}

pub const MDP_TOLERANCE: f64 = 1e-9;

/// Expected liminf values on a one-player stochastic arena via end
/// components and a reach-and-stop value iteration.
pub fn solve_liminf_mdp(arena: &Arena) -> Result<ValueReport> {
    let class = arena.classify();
    if class.players != PlayerCount::One {
        return Err(Error::UnsupportedClass(format!(
            "end-component liminf solver needs a one-player arena, got a {}",
            class.describe()
        )));
    }
    let owner = arena.sole_controller().unwrap_or(Player::Min);
    let n = arena.num_states();
    let all_states = vec![true; n];
    let all_moves: Allowed = (0..n).map(|s| vec![true; arena.moves(s).count()]).collect();
    let mecs = maximal_end_components(arena, &all_states, &all_moves);

    // EC rewards and, per EC, the states/pairs the owner should settle in.
    let mut stop: Vec<Option<f64>> = vec![None; n];
    let mut settle: Vec<Option<usize>> = vec![None; n];
    for (states, allow) in &mecs {
        let mut in_ec = vec![false; n];
        for &s in states {
            in_ec[s] = true;
        }
        let pairs: Vec<(usize, usize)> = states
            .iter()
            .flat_map(|&s| (0..allow[s].len()).filter(move |&k| allow[s][k]).map(move |k| (s, k)))
            .collect();
        let (reward, core, core_allow) = match owner {
            Player::Min => {
                let &(bs, bk) = pairs.iter().min_by(|x, y| weight_of(arena, x.0, x.1).cmp(weight_of(arena, y.0, y.1))).unwrap();
                let mut core = vec![false; n];
                core[bs] = true;
                let mut ca: Allowed = vec![Vec::new(); n];
                ca[bs] = (0..allow[bs].len()).map(|k| k == bk).collect();
                (weight_of(arena, bs, bk).clone(), core, ca)
            }
            Player::Max => {
                let mut ws: Vec<Rational> = pairs.iter().map(|&(s, k)| weight_of(arena, s, k).clone()).collect();
                ws.sort();
                ws.dedup();
                let mut found = None;
                for t in ws.iter().rev() {
                    let restricted: Allowed = (0..n)
                        .map(|s| (0..allow[s].len()).map(|k| allow[s][k] && weight_of(arena, s, k) >= t).collect())
                        .collect();
                    let inner = maximal_end_components(arena, &in_ec, &restricted);
                    if let Some((cs, ca)) = inner.into_iter().next() {
                        let mut core = vec![false; n];
                        for &s in &cs {
                            core[s] = true;
                        }
                        found = Some((t.clone(), core, ca));
                        break;
                    }
                }
                found.expect("the EC itself qualifies at its minimum weight")
            }
        };
        // inside the core keep to its pairs; elsewhere in the EC head for it
        let ranks = prob_ranks(arena, &core, allow, &in_ec);
        for &s in states {
            stop[s] = Some(to_f64(&reward));
            settle[s] = if core[s] {
                (0..core_allow[s].len()).find(|&k| core_allow[s][k])
            } else {
                ranks[s]
            };
        }
    }

    let moves_f: Vec<Vec<(f64, Vec<(usize, f64)>)>> = (0..n)
        .map(|s| arena.moves(s).map(|(_, _, m)| (m.weight_f64, m.successors_f64.clone())).collect())
        .collect();
    let bound = to_f64(&arena.max_abs_weight());
    let better = |a: f64, b: f64| if owner == Player::Max { a > b } else { a < b };
    let mut x = vec![if owner == Player::Max { -bound } else { bound }; n];
    let mut iterations = 0;
    let residual = loop {
        iterations += 1;
        let mut diff: f64 = 0.0;
        let mut next = x.clone();
        for s in 0..n {
            let mut best = stop[s];
            for (_, succ) in &moves_f[s] {
                let v: f64 = succ.iter().map(|(t, p)| p * x[*t]).sum();
                if best.is_none_or(|b| better(v, b)) {
                    best = Some(v);
                }
            }
            next[s] = best.unwrap();
            diff = diff.max((next[s] - x[s]).abs());
        }
        x = next;
        if diff <= MDP_TOLERANCE * 1e-3 {
            break diff;
        }
        if iterations >= 10_000_000 {
            return Err(Error::NonConvergence(format!("end-component value iteration stalled at residual {diff:e}")));
        }
    };

    // Where stopping is optimal, settle; elsewhere take optimal pairs that
    // make progress towards a settling state.
    let tol = |v: f64| 1e-7 * (1.0 + v.abs());
    let target: Vec<bool> = (0..n).map(|s| stop[s].is_some_and(|r| (r - x[s]).abs() <= tol(x[s]))).collect();
    let optimal: Allowed = (0..n)
        .map(|s| {
            moves_f[s]
                .iter()
                .map(|(_, succ)| {
                    let v: f64 = succ.iter().map(|(t, p)| p * x[*t]).sum();
                    (v - x[s]).abs() <= tol(x[s])
                })
                .collect()
        })
        .collect();
    let progress = prob_ranks(arena, &target, &optimal, &all_states);
    let mut picks = vec![0usize; n];
    for s in 0..n {
        let k = if target[s] { settle[s] } else { progress[s] };
        picks[s] = k.unwrap_or(0);
    }
    let pair_of = |s: usize, k: usize| {
        let (a, b, _) = arena.moves(s).nth(k).unwrap();
        (a, b)
    };
    let min_pick: Vec<usize> = (0..n).map(|s| pair_of(s, picks[s]).0).collect();
    let max_pick: Vec<usize> = (0..n).map(|s| pair_of(s, picks[s]).1).collect();
    Ok(ValueReport {
        method: Method::EndComponent,
        epsilon: MDP_TOLERANCE,
        values: ValueVector::Approx(x),
        strategy_min: StationaryStrategy::positional(arena, Player::Min, &min_pick),
        strategy_max: StationaryStrategy::positional(arena, Player::Max, &max_pick),
        iterations,
        residual,
        certified: false,
        lambda: None,
        gamma: None,
    })
}

/// Liminf values with the back-end chosen by arena class.
pub fn solve_liminf(arena: &Arena) -> Result<ValueReport> {
    let class = arena.classify();
    if class.deterministic && class.turn_based {
        solve_liminf_det_tb(arena)
    } else if class.players == PlayerCount::One {
        solve_liminf_mdp(arena)
    } else {
        Err(Error::UnsupportedClass(format!(
            "liminf games on {} arenas are out of scope: only deterministic turn-based and one-player stochastic arenas are supported",
            class.describe()
        )))
    }
}
