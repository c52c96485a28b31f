//! Mean-payoff games: exact on deterministic arenas, approximate on
//! stochastic ones, plus the mean past-discounted reduction and the
//! discounted-to-mean sweep.

use std::collections::VecDeque;
use std::io;

use num::bigint::BigInt;
use num::integer::Integer;
use num::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::arena::{Arena, Player, PlayerCount};
use crate::discounted::{solve_discounted_past_with, solve_discounted_with, DiscountedOptions};
use crate::error::{Error, Result};
use crate::graph::{chooser, det_edges, require_turn_based, sccs, strategies_from_edges, Edge};
use crate::par::Exec;
use crate::rational::{check_discount, to_f64, Rational};
use crate::report::{Method, ValueReport, ValueVector};

/// Largest `j` in the schedule `λ = 1 - 2^-j` of the approximate solver.
pub const MAX_SCHEDULE_EXPONENT: u32 = 20;
/// Cap on `horizon × edges` for the finite-horizon iteration.
pub const HORIZON_BUDGET: u128 = 20_000_000_000;

#[derive(Debug, Clone)]
pub struct MeanOptions {
    /// Accuracy target of the approximate back-end.
    pub epsilon: f64,
    pub exec: Exec,
    /// Last `j` tried in the schedule `λ = 1 - 2^-j`.
    pub max_exponent: u32,
}

impl Default for MeanOptions {
    fn default() -> Self {
        MeanOptions {
            epsilon: 1e-6,
            exec: Exec::default(),
            max_exponent: MAX_SCHEDULE_EXPONENT,
        }
    }
}

fn one_player_class(arena: &Arena) -> bool {
    let c = arena.classify();
    c.deterministic && c.players == PlayerCount::One
}

/// Minimum cycle mean inside one component, with a cycle attaining it as
/// `(state, edge index)` pairs. `None` for a component without cycles.
fn component_min_cycle(comp: &[usize], edges: &[Vec<Edge>], weight: &[Vec<Rational>]) -> Option<(Rational, Vec<(usize, usize)>)> {
    let k = comp.len();
    let mut local = vec![usize::MAX; edges.len()];
    for (i, &s) in comp.iter().enumerate() {
        local[s] = i;
    }
    let inner: Vec<(usize, usize, usize)> = comp
        .iter()
        .flat_map(|&s| {
            let local = &local;
            edges[s]
                .iter()
                .enumerate()
                .filter(move |(_, e)| local[e.to] != usize::MAX)
                .map(move |(ei, e)| (s, ei, e.to))
        })
        .collect();
    if inner.is_empty() {
        return None;
    }
    // Karp: d[j][v] = lightest walk of exactly j edges from comp[0] to v.
    let mut d: Vec<Vec<Option<Rational>>> = vec![vec![None; k]; k + 1];
    d[0][0] = Some(Rational::zero());
    for j in 0..k {
        for &(s, ei, t) in &inner {
            if let Some(x) = &d[j][local[s]] {
                let cand = x + &weight[s][ei];
                let slot = &mut d[j + 1][local[t]];
                if slot.as_ref().is_none_or(|y| cand < *y) {
                    *slot = Some(cand);
                }
            }
        }
    }
    let mu = (0..k)
        .filter_map(|v| {
            let dk = d[k][v].as_ref()?;
            (0..k)
                .filter_map(|j| {
                    d[j][v]
                        .as_ref()
                        .map(|dj| (dk - dj) / Rational::from_integer(BigInt::from(k - j)))
                })
                .max()
        })
        .min()?;
    // Potentials for w - μ, then any cycle of tight edges has mean μ.
    let mut h = vec![Rational::zero(); k];
    for _ in 0..k {
        let mut changed = false;
        for &(s, ei, t) in &inner {
            let cand = &h[local[s]] + &weight[s][ei] - &mu;
            if cand < h[local[t]] {
                h[local[t]] = cand;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let mut tight: Vec<Vec<(usize, usize)>> = vec![Vec::new(); k];
    for &(s, ei, t) in &inner {
        if &h[local[s]] + &weight[s][ei] - &mu == h[local[t]] {
            tight[local[s]].push((ei, local[t]));
        }
    }
    let cycle = find_cycle(&tight).expect("a minimum-mean cycle consists of tight edges");
    Some((mu, cycle.into_iter().map(|(v, ei)| (comp[v], ei)).collect()))
}

/// Some directed cycle as `(node, edge label)` pairs, via iterative DFS.
fn find_cycle(adj: &[Vec<(usize, usize)>]) -> Option<Vec<(usize, usize)>> {
    let n = adj.len();
    let mut color = vec![0u8; n];
    let mut via: Vec<(usize, usize)> = vec![(usize::MAX, 0); n];
    for root in 0..n {
        if color[root] != 0 {
            continue;
        }
        let mut stack = vec![(root, 0usize)];
        color[root] = 1;
        while let Some(&mut (v, ref mut i)) = stack.last_mut() {
            if *i < adj[v].len() {
                let (label, t) = adj[v][*i];
                *i += 1;
                match color[t] {
                    0 => {
                        color[t] = 1;
                        via[t] = (v, label);
                        stack.push((t, 0));
                    }
                    1 => {
                        let mut cyc = vec![(v, label)];
                        let mut u = v;
                        while u != t {
                            let (p, l) = via[u];
                            cyc.push((p, l));
                            u = p;
                        }
                        cyc.reverse();
                        return Some(cyc);
                    }
                    _ => {}
                }
            } else {
                color[v] = 2;
                stack.pop();
            }
        }
    }
    None
}

/// Optimal reachable cycle mean for Min on a deterministic arena where
/// only Min chooses. Returns values and one chosen edge per state.
fn karp_min(edges: &[Vec<Edge>], weight: &[Vec<Rational>]) -> (Vec<Rational>, Vec<usize>) {
    let n = edges.len();
    let comps = sccs(n, |s| edges[s].iter().map(|e| e.to).collect());
    let mut comp_of = vec![0; n];
    for (c, comp) in comps.iter().enumerate() {
        for &s in comp {
            comp_of[s] = c;
        }
    }
    let mut comp_val: Vec<Option<Rational>> = vec![None; comps.len()];
    let mut targets = Vec::new();
    // sinks come first, so successor components are already done
    for (c, comp) in comps.iter().enumerate() {
        let mut best = None;
        if let Some((mu, cycle)) = component_min_cycle(comp, edges, weight) {
            best = Some(mu.clone());
            targets.push((mu, c, cycle));
        }
        for &s in comp {
            for e in &edges[s] {
                let d = comp_of[e.to];
                if d != c {
                    let v = comp_val[d].clone().expect("successor component solved");
                    if best.as_ref().is_none_or(|b| v < *b) {
                        best = Some(v);
                    }
                }
            }
        }
        comp_val[c] = Some(best.expect("every state has a successor"));
    }
    let values: Vec<Rational> = (0..n).map(|s| comp_val[comp_of[s]].clone().unwrap()).collect();

    let mut pred: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (s, es) in edges.iter().enumerate() {
        for (ei, e) in es.iter().enumerate() {
            pred[e.to].push((s, ei));
        }
    }
    targets.sort_by(|x, y| x.0.cmp(&y.0).then(x.1.cmp(&y.1)));
    let mut choice: Vec<Option<usize>> = vec![None; n];
    for (_, _, cycle) in targets {
        if choice[cycle[0].0].is_some() {
            continue;
        }
        let mut queue = VecDeque::new();
        for &(s, ei) in &cycle {
            choice[s] = Some(ei);
            queue.push_back(s);
        }
        while let Some(t) = queue.pop_front() {
            for &(s, ei) in &pred[t] {
                if choice[s].is_none() {
                    choice[s] = Some(ei);
                    queue.push_back(s);
                }
            }
        }
    }
    (values, choice.into_iter().map(|c| c.expect("every state reaches a cycle")).collect())
}

/// Exact mean-payoff values on a one-player deterministic arena: the best
/// reachable cycle mean for the controlling player.
pub fn solve_mean_det_one_player(arena: &Arena) -> Result<ValueReport> {
    if !one_player_class(arena) {
        return Err(Error::UnsupportedClass(format!(
            "cycle-mean solver needs a one-player deterministic arena, got a {}",
            arena.classify().describe()
        )));
    }
    let edges = det_edges(arena)?;
    let sign = match arena.sole_controller() {
        Some(Player::Max) => -Rational::one(),
        _ => Rational::one(),
    };
    let weight: Vec<Vec<Rational>> = edges.iter().map(|es| es.iter().map(|e| &e.weight * &sign).collect()).collect();
    let (vals, choice) = karp_min(&edges, &weight);
    let (strategy_min, strategy_max) = strategies_from_edges(arena, &edges, &choice);
    Ok(exact_report(
        Method::Karp,
        vals.into_iter().map(|v| v * &sign).collect(),
        strategy_min,
        strategy_max,
        0,
    ))
}

fn exact_report(
    method: Method,
    values: Vec<Rational>,
    strategy_min: crate::arena::StationaryStrategy,
    strategy_max: crate::arena::StationaryStrategy,
    iterations: usize,
) -> ValueReport {
    ValueReport {
        method,
        epsilon: 0.0,
        values: ValueVector::Exact(values),
        strategy_min,
        strategy_max,
        iterations,
        residual: 0.0,
        certified: true,
        lambda: None,
        gamma: None,
    }
}

/// Integer weights `w·D` with `D` the common denominator.
fn integer_weights(edges: &[Vec<Edge>]) -> Result<(Vec<Vec<i128>>, BigInt)> {
    let denom = edges
        .iter()
        .flatten()
        .fold(BigInt::one(), |acc, e| acc.lcm(e.weight.denom()));
    let scaled = edges
        .iter()
        .map(|es| {
            es.iter()
                .map(|e| {
                    (e.weight.numer() * (&denom / e.weight.denom()))
                        .to_i128()
                        .ok_or_else(|| Error::Overflow("scaled weight does not fit in 128 bits".into()))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok((scaled, denom))
}

/// Nearest fraction with denominator at most `n`.
fn round_to_denominator(x: &Rational, n: usize) -> Rational {
    (1..=n)
        .map(|q| {
            let q = BigInt::from(q);
            let p = (x * Rational::from_integer(q.clone())).round().to_integer();
            Rational::new(p, q)
        })
        .min_by(|a, b| (a - x).abs().cmp(&(b - x).abs()))
        .expect("n >= 1")
}

/// Least energy progress measure; `owner` keeps the running sum of `c`
/// bounded below. `None` is ⊤ (owner loses).
fn progress_measure(arena: &Arena, edges: &[Vec<Edge>], c: &[Vec<i128>], owner: Player) -> Vec<Option<i128>> {
    let n = edges.len();
    let top = c.iter().flatten().map(|x| (-x).max(0)).max().unwrap_or(0) * n as i128;
    let mut f: Vec<Option<i128>> = vec![Some(0); n];
    let need = |f: &[Option<i128>], s: usize, ei: usize| -> Option<i128> {
        let t = f[edges[s][ei].to]?;
        let v = (t - c[s][ei]).max(0);
        (v <= top).then_some(v)
    };
    // None sorts above every finite credit
    let key = |x: Option<i128>| x.map_or(i128::MAX, |v| v);
    loop {
        let mut changed = false;
        for s in 0..n {
            let opts = (0..edges[s].len()).map(|ei| need(&f, s, ei));
            let next = if chooser(arena, s) == owner {
                opts.min_by_key(|x| key(*x)).unwrap()
            } else {
                opts.max_by_key(|x| key(*x)).unwrap()
            };
            if key(next) > key(f[s]) {
                f[s] = next;
                changed = true;
            }
        }
        if !changed {
            return f;
        }
    }
}

/// Exact values of a deterministic turn-based mean-payoff game by
/// finite-horizon iteration and rounding.
///
/// Strategies come from energy progress measures at each value threshold
/// and are certified by solving the one-player game left after fixing
/// each of them.
pub fn solve_mean_det_two_player(arena: &Arena) -> Result<ValueReport> {
    require_turn_based(arena, "finite-horizon mean-payoff solver")?;
    let edges = det_edges(arena)?;
    let n = arena.num_states();
    let (w, denom) = integer_weights(&edges)?;
    let wmax = w.iter().flatten().map(|x| x.unsigned_abs()).max().unwrap_or(0).max(1);
    let horizon = 4u128 * (n as u128).pow(3) * wmax;
    let m = edges.iter().map(Vec::len).sum::<usize>() as u128;
    if horizon.saturating_mul(m) > HORIZON_BUDGET {
        return Err(Error::Budget(format!(
            "finite-horizon iteration needs {horizon} steps over {m} edges"
        )));
    }
    let mut v = vec![0i128; n];
    let overflow = || Error::Overflow("finite-horizon value exceeds 128 bits".into());
    for _ in 0..horizon {
        let mut next = vec![0i128; n];
        for s in 0..n {
            let mut best: Option<i128> = None;
            let maximize = chooser(arena, s) == Player::Max;
            for (ei, e) in edges[s].iter().enumerate() {
                let x = w[s][ei].checked_add(v[e.to]).ok_or_else(overflow)?;
                best = Some(match best {
                    None => x,
                    Some(b) if maximize => b.max(x),
                    Some(b) => b.min(x),
                });
            }
            next[s] = best.expect("nonempty action set");
        }
        v = next;
    }
    let k = Rational::from_integer(BigInt::from(horizon));
    let scaled: Vec<Rational> = v
        .iter()
        .map(|x| round_to_denominator(&(Rational::from_integer(BigInt::from(*x)) / &k), n))
        .collect();

    let mut choice = vec![0usize; n];
    let mut levels = scaled.clone();
    levels.sort();
    levels.dedup();
    for nu in &levels {
        let (p, q) = (
            nu.numer().to_i128().ok_or_else(overflow)?,
            nu.denom().to_i128().ok_or_else(overflow)?,
        );
        let c_max: Vec<Vec<i128>> = w.iter().map(|r| r.iter().map(|x| q * x - p).collect()).collect();
        let c_min: Vec<Vec<i128>> = c_max.iter().map(|r| r.iter().map(|x| -x).collect()).collect();
        let f_max = progress_measure(arena, &edges, &c_max, Player::Max);
        let f_min = progress_measure(arena, &edges, &c_min, Player::Min);
        for s in (0..n).filter(|&s| scaled[s] == *nu) {
            let (f, c) = match chooser(arena, s) {
                Player::Max => (&f_max, &c_max),
                Player::Min => (&f_min, &c_min),
            };
            let Some(fs) = f[s] else { continue };
            if let Some(ei) = (0..edges[s].len())
                .find(|&ei| f[edges[s][ei].to].is_some_and(|t| (t - c[s][ei]).max(0) <= fs))
            {
                choice[s] = ei;
            }
        }
    }
    let (strategy_min, strategy_max) = strategies_from_edges(arena, &edges, &choice);
    let values: Vec<Rational> = scaled.into_iter().map(|x| x / Rational::from_integer(denom.clone())).collect();
    for strategy in [&strategy_max, &strategy_min] {
        let fixed = solve_mean_det_one_player(&arena.fix_strategy(strategy)?)?;
        if fixed.values.exact() != Some(&values[..]) {
            return Err(Error::NonConvergence(format!(
                "extracted {:?} strategy is not optimal",
                strategy.owner()
            )));
        }
    }
    Ok(exact_report(
        Method::ZwickPaterson,
        values,
        strategy_min,
        strategy_max,
        horizon.min(usize::MAX as u128) as usize,
    ))
}

/// `(1-λ)·Val(D_λ)` along `λ = 1 - 2^-j` until successive estimates are
/// within `ε/2`. The error claim is heuristic and the report says so.
pub fn solve_mean_stochastic_approx(arena: &Arena, opts: &MeanOptions) -> Result<ValueReport> {
    let eps = opts.epsilon;
    if !(eps > 0.0) {
        return Err(Error::Parameter(format!("epsilon must be positive, got {eps}")));
    }
    let mut prev: Option<(Vec<f64>, f64, Vec<f64>)> = None;
    let mut iterations = 0;
    for j in 1..=opts.max_exponent.min(MAX_SCHEDULE_EXPONENT) {
        let gap = Rational::new(BigInt::one(), BigInt::one() << j);
        let lambda = Rational::one() - &gap;
        let gap_f = to_f64(&gap);
        let initial = prev
            .as_ref()
            .map(|(raw, prev_gap, _)| raw.iter().map(|x| x * prev_gap / gap_f).collect());
        let d_opts = DiscountedOptions {
            initial,
            exec: opts.exec,
            ..Default::default()
        };
        let mut report = solve_discounted_with(arena, &lambda, eps / (4.0 * gap_f), &d_opts)?;
        iterations += report.iterations;
        let raw = report.values.to_f64();
        let est: Vec<f64> = raw.iter().map(|x| x * gap_f).collect();
        let done = prev
            .as_ref()
            .is_some_and(|(_, _, old)| est.iter().zip(old).all(|(a, b)| (a - b).abs() < eps / 2.0));
        if done {
            report.method = Method::BlackwellApprox;
            report.values = ValueVector::Approx(est);
            report.epsilon = eps;
            report.iterations = iterations;
            report.residual *= gap_f;
            report.certified = false;
            return Ok(report);
        }
        prev = Some((raw, gap_f, est));
    }
    Err(Error::NonConvergence(format!(
        "discount schedule exhausted at lambda = 1 - 2^-{} before estimates settled within {eps}",
        opts.max_exponent.min(MAX_SCHEDULE_EXPONENT)
    )))
}

/// Mean-payoff values with the back-end chosen by arena class.
pub fn solve_mean(arena: &Arena, opts: &MeanOptions) -> Result<ValueReport> {
    let class = arena.classify();
    if class.deterministic && class.players == PlayerCount::One {
        solve_mean_det_one_player(arena)
    } else if class.deterministic && class.turn_based {
        solve_mean_det_two_player(arena)
    } else {
        solve_mean_stochastic_approx(arena, opts)
    }
}

/// Mean past-discounted values: the mean-payoff game on the arena with
/// every weight multiplied by `1/(1-γ)`.
pub fn solve_mean_past(arena: &Arena, gamma: &Rational, opts: &MeanOptions) -> Result<ValueReport> {
    check_discount("gamma", gamma)?;
    let c = Rational::one() / (Rational::one() - gamma);
    let mut report = solve_mean(&arena.scale_weights(&c), opts)?;
    report.gamma = Some(gamma.clone());
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TauberianRow {
    pub lambda: f64,
    pub state: String,
    pub estimate: f64,
    pub reference: f64,
    pub abs_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TauberianTable {
    pub gamma: Rational,
    pub reference_method: Method,
    pub rows: Vec<TauberianRow>,
}

impl TauberianTable {
    pub fn write_csv<W: io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.rows {
            w.serialize(row).map_err(|e| Error::Parameter(format!("csv: {e}")))?;
        }
        w.flush().map_err(|e| Error::Parameter(format!("csv: {e}")))?;
        Ok(())
    }

    /// Largest error at each grid point, in grid order.
    pub fn max_errors(&self) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = Vec::new();
        for r in &self.rows {
            match out.last_mut() {
                Some((l, e)) if *l == r.lambda => *e = e.max(r.abs_error),
                _ => out.push((r.lambda, r.abs_error)),
            }
        }
        out
    }
}

/// `(1-λ)·Val(D_λP_γ)` on each grid point next to `Val(MP_γ)`. The
/// tolerance applies to the estimates, so each inner solve runs at
/// `ε/(1-λ)`.
pub fn tauberian_sweep(
    arena: &Arena,
    gamma: &Rational,
    grid: &[Rational],
    epsilon: f64,
    exec: Exec,
) -> Result<TauberianTable> {
    check_discount("gamma", gamma)?;
    for l in grid {
        check_discount("lambda", l)?;
    }
    if grid.windows(2).any(|p| p[0] >= p[1]) {
        return Err(Error::Parameter("lambda grid must be strictly increasing".into()));
    }
    let reference = solve_mean_past(
        arena,
        gamma,
        &MeanOptions {
            epsilon,
            exec: Exec::Sequential,
            ..Default::default()
        },
    )?;
    let solves = exec.map(grid, |lambda| {
        let gap = Rational::one() - lambda;
        let opts = DiscountedOptions {
            exec: Exec::Sequential,
            ..Default::default()
        };
        solve_discounted_past_with(arena, lambda, gamma, epsilon / to_f64(&gap), &opts)
            .map(|r| r.values.scaled(&gap).to_f64())
    });
    let mut rows = Vec::new();
    for (lambda, est) in grid.iter().zip(solves) {
        let est = est?;
        for (s, e) in est.iter().enumerate() {
            let r = reference.values.get_f64(s);
            rows.push(TauberianRow {
                lambda: to_f64(lambda),
                state: arena.state_name(s).to_string(),
                estimate: *e,
                reference: r,
                abs_error: (e - r).abs(),
            });
        }
    }
    Ok(TauberianTable {
        gamma: gamma.clone(),
        reference_method: reference.method,
        rows,
    })
}
