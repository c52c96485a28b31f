//! Discounted games by value iteration on the Shapley operator.

use num::One;

use crate::arena::{Arena, Player, StationaryStrategy};
use crate::error::{Error, Result};
use crate::matrix::solve_f64;
use crate::par::Exec;
use crate::rational::{check_discount, to_f64, Rational};
use crate::report::{Method, ValueReport, ValueVector};

/// Below this many states a backup sweep is cheaper than fanning out.
pub const PARALLEL_MIN_STATES: usize = 256;

#[derive(Debug, Clone)]
pub struct DiscountedOptions {
    pub max_iterations: usize,
    pub exec: Exec,
    /// Starting vector; zero when absent.
    pub initial: Option<Vec<f64>>,
}

impl Default for DiscountedOptions {
    fn default() -> Self {
        DiscountedOptions {
            max_iterations: 50_000_000,
            exec: Exec::default(),
            initial: None,
        }
    }
}

/// `q[a][b] = w(s,a,b) + λ Σ p(s'|s,a,b) v(s')`.
fn stage_matrix(arena: &Arena, s: usize, lambda: f64, v: &[f64]) -> Vec<Vec<f64>> {
    let nb = arena.max_actions(s).len();
    let mut q = vec![vec![0.0; nb]; arena.min_actions(s).len()];
    for (a, b, m) in arena.moves(s) {
        q[a][b] = m.weight_f64 + lambda * m.successors_f64.iter().map(|(t, p)| p * v[*t]).sum::<f64>();
    }
    q
}

fn backup(arena: &Arena, s: usize, lambda: f64, v: &[f64]) -> Result<f64> {
    let q = stage_matrix(arena, s, lambda, v);
    match arena.controller(s) {
        Some(Player::Min) => Ok(q.iter().map(|r| r[0]).fold(f64::INFINITY, f64::min)),
        Some(Player::Max) => Ok(q[0].iter().copied().fold(f64::NEG_INFINITY, f64::max)),
        None if q.len() == 1 && q[0].len() == 1 => Ok(q[0][0]),
        None => solve_f64(&q).map(|(val, _, _)| val),
    }
}

fn apply(arena: &Arena, lambda: f64, v: &[f64], exec: Exec) -> Result<Vec<f64>> {
    let exec = if arena.num_states() >= PARALLEL_MIN_STATES { exec } else { Exec::Sequential };
    exec.map_range(arena.num_states(), |s| backup(arena, s, lambda, v))
        .into_iter()
        .collect()
}

/// One application of the Shapley operator.
pub fn shapley_operator(arena: &Arena, lambda: &Rational, v: &[f64]) -> Result<Vec<f64>> {
    shapley_operator_with(arena, lambda, v, Exec::default())
}

pub fn shapley_operator_with(arena: &Arena, lambda: &Rational, v: &[f64], exec: Exec) -> Result<Vec<f64>> {
    check_discount("lambda", lambda)?;
    if v.len() != arena.num_states() {
        return Err(Error::Parameter(format!(
            "value vector has {} entries for {} states",
            v.len(),
            arena.num_states()
        )));
    }
    apply(arena, to_f64(lambda), v, exec)
}

fn first_within(values: impl Iterator<Item = f64>, target: f64) -> usize {
    let tol = 1e-9 * (1.0 + target.abs());
    values.enumerate().find(|(_, x)| (x - target).abs() <= tol).map_or(0, |(i, _)| i)
}

/// Optimal stage-game strategies against continuation values `v`.
/// Ties go to the first action in declaration order.
pub fn extract_strategies(
    arena: &Arena,
    lambda: f64,
    v: &[f64],
) -> Result<(StationaryStrategy, StationaryStrategy)> {
    let n = arena.num_states();
    let mut min_rows = Vec::with_capacity(n);
    let mut max_rows = Vec::with_capacity(n);
    for s in 0..n {
        let q = stage_matrix(arena, s, lambda, v);
        let (na, nb) = (q.len(), q[0].len());
        let point = |len: usize, k: usize| {
            let mut d = vec![0.0; len];
            d[k] = 1.0;
            d
        };
        match arena.controller(s) {
            Some(Player::Min) => {
                let best = q.iter().map(|r| r[0]).fold(f64::INFINITY, f64::min);
                min_rows.push(point(na, first_within(q.iter().map(|r| r[0]), best)));
                max_rows.push(vec![1.0]);
            }
            Some(Player::Max) => {
                let best = q[0].iter().copied().fold(f64::NEG_INFINITY, f64::max);
                min_rows.push(vec![1.0]);
                max_rows.push(point(nb, first_within(q[0].iter().copied(), best)));
            }
            None if na == 1 && nb == 1 => {
                min_rows.push(vec![1.0]);
                max_rows.push(vec![1.0]);
            }
            None => {
                let (_, row, col) = solve_f64(&q)?;
                min_rows.push(row);
                max_rows.push(col);
            }
        }
    }
    Ok((
        StationaryStrategy::from_f64(Player::Min, &min_rows),
        StationaryStrategy::from_f64(Player::Max, &max_rows),
    ))
}

/// Values of the discounted game with sup-norm error at most `epsilon`.
pub fn solve_discounted(arena: &Arena, lambda: &Rational, epsilon: f64) -> Result<ValueReport> {
    solve_discounted_with(arena, lambda, epsilon, &DiscountedOptions::default())
}

pub fn solve_discounted_with(
    arena: &Arena,
    lambda: &Rational,
    epsilon: f64,
    opts: &DiscountedOptions,
) -> Result<ValueReport> {
    check_discount("lambda", lambda)?;
    if !(epsilon > 0.0) {
        return Err(Error::Parameter(format!("epsilon must be positive, got {epsilon}")));
    }
    let n = arena.num_states();
    let lam = to_f64(lambda);
    let mut v = match &opts.initial {
        Some(init) if init.len() == n => init.clone(),
        Some(init) => {
            return Err(Error::Parameter(format!("initial vector has {} entries for {n} states", init.len())));
        }
        None => vec![0.0; n],
    };
    // ‖v_{k+1} - v*‖ ≤ λ/(1-λ) ‖v_{k+1} - v_k‖
    let threshold = if lam > 0.0 { epsilon * (1.0 - lam) / (2.0 * lam) } else { f64::INFINITY };
    let mut iterations = 0;
    let residual = loop {
        let next = apply(arena, lam, &v, opts.exec)?;
        iterations += 1;
        let diff = next.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        v = next;
        if diff <= threshold || diff == 0.0 {
            break diff;
        }
        if iterations >= opts.max_iterations {
            return Err(Error::NonConvergence(format!(
                "value iteration hit the cap of {} iterations with residual {diff:e} (needed {threshold:e})",
                opts.max_iterations
            )));
        }
    };
    let (strategy_min, strategy_max) = extract_strategies(arena, lam, &v)?;
    Ok(ValueReport {
        method: Method::ValueIteration,
        epsilon,
        values: ValueVector::Approx(v),
        strategy_min,
        strategy_max,
        iterations,
        residual,
        certified: true,
        lambda: Some(lambda.clone()),
        gamma: None,
    })
}

/// Values of the discounted past-discounted game: the discounted game on
/// the arena with every weight multiplied by `1/(1-γλ)`.
pub fn solve_discounted_past(arena: &Arena, lambda: &Rational, gamma: &Rational, epsilon: f64) -> Result<ValueReport> {
    solve_discounted_past_with(arena, lambda, gamma, epsilon, &DiscountedOptions::default())
}

pub fn solve_discounted_past_with(
    arena: &Arena,
    lambda: &Rational,
    gamma: &Rational,
    epsilon: f64,
    opts: &DiscountedOptions,
) -> Result<ValueReport> {
    check_discount("lambda", lambda)?;
    check_discount("gamma", gamma)?;
    let c = Rational::one() / (Rational::one() - gamma * lambda);
    let mut report = solve_discounted_with(&arena.scale_weights(&c), lambda, epsilon, opts)?;
    report.gamma = Some(gamma.clone());
    Ok(report)
}
