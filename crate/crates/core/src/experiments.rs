//! Reproductions of the counterexamples for past-discounted payoffs.

use std::io;

use num::{One, Zero};
use serde::Serialize;

use crate::arena::{Arena, Player, PlayerCount};
use crate::error::{Error, Result};
use crate::graph::det_edges;
use crate::par::Exec;
use crate::payoff::{finite_past_discounted, payoff_p, Bound, UpSeq};
use crate::rational::{check_discount, format_decimal, format_rational, int, pow, to_f64, Rational};

const ENUMERATION_BUDGET: u128 = 1 << 20;

fn csv_err(e: csv::Error) -> Error {
    Error::Parameter(format!("csv: {e}"))
}

pub fn witness_sequences() -> (UpSeq, UpSeq, UpSeq) {
    (
        UpSeq::from_ints(&[], &[2, 1, 200, 100]).unwrap(),
        UpSeq::from_ints(&[], &[200, 100, 2, 1]).unwrap(),
        UpSeq::from_ints(&[], &[200, 2, 100, 1]).unwrap(),
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanRow {
    pub gamma: Rational,
    pub p_x: Rational,
    pub p_y: Rational,
    pub p_z: Rational,
    /// `P(z) > max(P(x), P(y))`.
    pub witness: bool,
}

/// Lower past-discounted payoffs of the three witness sequences over a
/// grid of discount factors.
pub fn submixing_scan(grid: &[Rational], exec: Exec) -> Result<Vec<ScanRow>> {
    for g in grid {
        check_discount("gamma", g)?;
    }
    let (x, y, z) = witness_sequences();
    exec.map(grid, |g| {
        let p_x = payoff_p(&x, g, Bound::Lower)?;
        let p_y = payoff_p(&y, g, Bound::Lower)?;
        let p_z = payoff_p(&z, g, Bound::Lower)?;
        let witness = p_z > p_x.clone().max(p_y.clone());
        Ok(ScanRow {
            gamma: g.clone(),
            p_x,
            p_y,
            p_z,
            witness,
        })
    })
    .into_iter()
    .collect()
}

/// Columns: `gamma, p_x, p_y, p_z, witness` as decimals, then the exact
/// `p_x_exact, p_y_exact, p_z_exact`.
pub fn write_scan_csv<W: io::Write>(rows: &[ScanRow], out: W) -> Result<()> {
    #[derive(Serialize)]
    struct Line {
        gamma: String,
        p_x: String,
        p_y: String,
        p_z: String,
        witness: bool,
        p_x_exact: String,
        p_y_exact: String,
        p_z_exact: String,
    }
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(Line {
            gamma: format_decimal(&r.gamma, 6),
            p_x: format_decimal(&r.p_x, 6),
            p_y: format_decimal(&r.p_y, 6),
            p_z: format_decimal(&r.p_z, 6),
            witness: r.witness,
            p_x_exact: format_rational(&r.p_x),
            p_y_exact: format_rational(&r.p_y),
            p_z_exact: format_rational(&r.p_z),
        })
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Parameter(format!("csv: {e}")))
}

/// Min's behaviour on the unbounded-memory arena: from `s1`, the `k`-th
/// visit plays `b` some number of times and then `a` back to `s0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PumpingStrategy {
    /// `b` is played `min(k, cap)` times on the `k`-th visit.
    Capped(u64),
    /// `b` is played `k` times on the `k`-th visit.
    Unbounded,
    /// Stay on the `b` loop forever.
    AlwaysB,
}

impl PumpingStrategy {
    pub fn burn_in(self) -> usize {
        match self {
            PumpingStrategy::Capped(cap) => 10 * (cap as usize + 2),
            _ => 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PumpingRun {
    pub strategy: PumpingStrategy,
    pub gamma: Rational,
    pub weights: Vec<i64>,
    /// `P^n` for `n < horizon`, in floating point.
    pub trajectory: Vec<f64>,
    pub burn_in: usize,
    /// Minimum of the trajectory after burn-in.
    pub running_min: f64,
    /// Exact lower payoff of the generated play, when it is ultimately
    /// periodic.
    pub exact: Option<Rational>,
    /// `-2 - γ/(1-γ)`, the infimum over all strategies; not attained.
    pub infimum: Rational,
}

/// Weights of the bundled example play from `s0` under `strategy`.
fn pumping_weights(strategy: PumpingStrategy, horizon: usize) -> Vec<i64> {
    let mut w = Vec::with_capacity(horizon);
    if strategy == PumpingStrategy::AlwaysB {
        w.push(4);
        w.resize(horizon.max(1), -1);
        w.truncate(horizon);
        return w;
    }
    let mut k: u64 = 0;
    while w.len() < horizon {
        let reps = match strategy {
            PumpingStrategy::Capped(cap) => k.min(cap),
            _ => k,
        };
        w.push(4);
        for _ in 0..reps {
            w.push(-1);
        }
        w.push(-2);
        k += 1;
    }
    w.truncate(horizon);
    w
}

/// Simulates the unbounded-memory arena under `strategy` and tracks `P^n`.
pub fn pumping_run(strategy: PumpingStrategy, gamma: &Rational, horizon: usize) -> Result<PumpingRun> {
    check_discount("gamma", gamma)?;
    if horizon == 0 {
        return Err(Error::Parameter("horizon must be at least 1".into()));
    }
    let weights = pumping_weights(strategy, horizon);
    let g = to_f64(gamma);
    let mut acc = 0.0;
    let trajectory: Vec<f64> = weights
        .iter()
        .map(|&w| {
            acc = g * acc + w as f64;
            acc
        })
        .collect();
    let burn_in = strategy.burn_in().min(horizon - 1);
    let running_min = trajectory[burn_in..].iter().copied().fold(f64::INFINITY, f64::min);
    let exact = match strategy {
        PumpingStrategy::Capped(cap) => {
            let mut cycle = vec![4];
            cycle.extend(std::iter::repeat_n(-1, cap as usize));
            cycle.push(-2);
            Some(payoff_p(&UpSeq::from_ints(&[], &cycle)?, gamma, Bound::Lower)?)
        }
        PumpingStrategy::AlwaysB => Some(payoff_p(&UpSeq::from_ints(&[4], &[-1])?, gamma, Bound::Lower)?),
        PumpingStrategy::Unbounded => None,
    };
    Ok(PumpingRun {
        strategy,
        gamma: gamma.clone(),
        weights,
        trajectory,
        burn_in,
        running_min,
        exact,
        infimum: int(-2) - gamma / (Rational::one() - gamma),
    })
}

/// Columns: `n, weight, p_n, running_min` (running minimum from burn-in on,
/// empty before it).
pub fn write_pumping_csv<W: io::Write>(run: &PumpingRun, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "weight", "p_n", "running_min"]).map_err(csv_err)?;
    let mut best = f64::INFINITY;
    for (n, (wt, p)) in run.weights.iter().zip(&run.trajectory).enumerate() {
        let rm = if n >= run.burn_in {
            best = best.min(*p);
            best.to_string()
        } else {
            String::new()
        };
        w.write_record([n.to_string(), wt.to_string(), p.to_string(), rm]).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Parameter(format!("csv: {e}")))
}

/// The unbounded-memory shape: a state with a single move to a second
/// state, which has a self-loop and a move back. Returns
/// `(go weight, loop weight, return weight)`.
fn pumping_shape(arena: &Arena) -> Option<(Rational, Rational, Rational)> {
    if arena.num_states() != 2 || arena.sole_controller().is_none() {
        return None;
    }
    let edges = det_edges(arena).ok()?;
    for (p, q) in [(0, 1), (1, 0)] {
        if edges[p].len() != 1 || edges[p][0].to != q || edges[q].len() != 2 {
            continue;
        }
        let stay = edges[q].iter().find(|e| e.to == q)?;
        let back = edges[q].iter().find(|e| e.to == p)?;
        return Some((edges[p][0].weight.clone(), stay.weight.clone(), back.weight.clone()));
    }
    None
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapReport {
    pub gamma: Rational,
    pub controller: Option<Player>,
    pub strategies: usize,
    /// Best lower payoff over positional strategies, per state.
    pub positional_best: Vec<Rational>,
    /// `(cap, exact value of the capped pumping strategy from the first state)`.
    pub pumping: Vec<(u64, Rational)>,
    /// `(value - limit) / γ^cap` per cap, showing the geometric approach.
    pub rate: Vec<(u64, Option<Rational>)>,
    /// Limit of the capped values as the cap grows; an infimum, not attained.
    pub limit: Option<Rational>,
    /// `positional_best - limit` for Min, reversed for Max.
    pub gap: Option<Rational>,
}

/// Lasso followed from `start` under one edge choice per state.
fn lasso(edges: &[Vec<crate::graph::Edge>], choice: &[usize], start: usize) -> UpSeq {
    let mut seen = vec![usize::MAX; edges.len()];
    let mut ws = Vec::new();
    let mut s = start;
    while seen[s] == usize::MAX {
        seen[s] = ws.len();
        let e = &edges[s][choice[s]];
        ws.push(e.weight.clone());
        s = e.to;
    }
    let cycle = ws.split_off(seen[s]);
    UpSeq::new(ws, cycle).expect("a revisit closes a cycle")
}

/// Best positional lower past-discounted value (by enumeration) against
/// the capped pumping family on the unbounded-memory shape.
pub fn positional_gap(arena: &Arena, gamma: &Rational, caps: &[u64]) -> Result<GapReport> {
    check_discount("gamma", gamma)?;
    let class = arena.classify();
    if !class.deterministic || class.players != PlayerCount::One {
        return Err(Error::UnsupportedClass(format!(
            "positional enumeration needs a one-player deterministic arena, got a {}",
            class.describe()
        )));
    }
    let edges = det_edges(arena)?;
    let n = arena.num_states();
    let total = edges.iter().map(|e| e.len() as u128).try_fold(1u128, |acc, k| acc.checked_mul(k).filter(|&x| x <= ENUMERATION_BUDGET));
    let total = total.ok_or_else(|| Error::Budget(format!("more than {ENUMERATION_BUDGET} positional strategies")))? as usize;
    let controller = arena.sole_controller();
    let minimize = controller != Some(Player::Max);
    let mut best: Vec<Option<Rational>> = vec![None; n];
    let mut choice = vec![0usize; n];
    for _ in 0..total {
        for (s, slot) in best.iter_mut().enumerate() {
            let v = payoff_p(&lasso(&edges, &choice, s), gamma, Bound::Lower)?;
            let better = slot.as_ref().is_none_or(|b| if minimize { v < *b } else { v > *b });
            if better {
                *slot = Some(v);
            }
        }
        for s in 0..n {
            choice[s] += 1;
            if choice[s] < edges[s].len() {
                break;
            }
            choice[s] = 0;
        }
    }
    let positional_best: Vec<Rational> = best.into_iter().map(Option::unwrap).collect();

    let mut report = GapReport {
        gamma: gamma.clone(),
        controller,
        strategies: total,
        positional_best,
        pumping: Vec::new(),
        rate: Vec::new(),
        limit: None,
        gap: if total == 1 { Some(Rational::zero()) } else { None },
    };
    if let Some((go, stay, back)) = pumping_shape(arena) {
        let one = Rational::one();
        let run = &stay / (&one - gamma);
        let at_back = &back + gamma * &run;
        let at_go = &go + gamma * &at_back;
        let after_go = &stay + gamma * &at_go;
        let candidates = [run, at_back, at_go, after_go];
        let limit = if minimize {
            candidates.into_iter().min().unwrap()
        } else {
            candidates.into_iter().max().unwrap()
        };
        for &cap in caps {
            let mut cycle = vec![go.clone()];
            cycle.extend(std::iter::repeat_n(stay.clone(), cap as usize));
            cycle.push(back.clone());
            let v = payoff_p(&UpSeq::periodic(cycle)?, gamma, Bound::Lower)?;
            let gk = pow(gamma, cap as usize);
            let rate = (!gk.is_zero()).then(|| (&v - &limit) / gk);
            report.pumping.push((cap, v));
            report.rate.push((cap, rate));
        }
        let first = report.positional_best[0].clone();
        report.gap = Some(if minimize { first - &limit } else { &limit - first });
        report.limit = Some(limit);
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrefixCheck {
    pub holds: bool,
    pub with_prefix: Rational,
    pub without_prefix: Rational,
    /// The split `P^n(xy) = P^{n-m-1}(y) + γ^{n-m} P^m(x)` with `|x| = m+1`
    /// held at every tested `n`.
    pub decomposition: bool,
}

pub fn prefix_independence_check(u: &[Rational], v: &[Rational], gamma: &Rational) -> Result<PrefixCheck> {
    check_discount("gamma", gamma)?;
    let with = UpSeq::new(u.to_vec(), v.to_vec())?;
    let without = with.without_prefix();
    let with_prefix = payoff_p(&with, gamma, Bound::Lower)?;
    let without_prefix = payoff_p(&without, gamma, Bound::Lower)?;
    let mut decomposition = true;
    if !u.is_empty() {
        let m = u.len() - 1;
        let px = finite_past_discounted(u, gamma)?;
        for n in u.len()..u.len() + 2 * v.len() + 4 {
            let lhs = finite_past_discounted(&with.take(n + 1), gamma)?;
            let rhs = finite_past_discounted(&without.take(n - m), gamma)? + pow(gamma, n - m) * &px;
            decomposition &= lhs == rhs;
        }
    }
    Ok(PrefixCheck {
        holds: with_prefix == without_prefix,
        with_prefix,
        without_prefix,
        decomposition,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arena::{fig1_arena, ArenaBuilder};
    use crate::rational::rat;

    #[test]
    fn scan_reference_point() {
        let rows = submixing_scan(&[rat(1, 10)], Exec::Sequential).unwrap();
        let r = &rows[0];
        assert!((to_f64(&r.p_z) - 11.2211).abs() < 1e-3);
        assert!((to_f64(&r.p_x) - 2.4002).abs() < 1e-3);
        assert_eq!(r.p_x, r.p_y);
        assert!(r.witness);
    }

    #[test]
    fn scan_degenerate_and_grid() {
        let rows = submixing_scan(&[int(0)], Exec::Sequential).unwrap();
        assert_eq!((rows[0].p_x.clone(), rows[0].p_z.clone()), (int(1), int(1)));
        assert!(!rows[0].witness);
        let grid: Vec<Rational> = (1..10).map(|k| rat(k, 10)).collect();
        assert!(submixing_scan(&grid, Exec::Parallel).unwrap().iter().all(|r| r.witness));
        let mut buf = Vec::new();
        write_scan_csv(&rows, &mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("gamma,p_x,p_y,p_z,witness,"));
    }

    #[test]
    fn pumping_values() {
        let g = rat(1, 2);
        let run = pumping_run(PumpingStrategy::Capped(20), &g, 10_000).unwrap();
        assert!(run.running_min <= -2.999);
        assert_eq!(run.infimum, int(-3));
        let exact = to_f64(run.exact.as_ref().unwrap());
        assert!((run.running_min - exact).abs() < 1e-9);
        assert!(exact > -3.0);

        let a = pumping_run(PumpingStrategy::Capped(0), &g, 1000).unwrap();
        assert_eq!(a.exact, Some(int(0)));
        assert!(a.running_min.abs() < 1e-12);
        let b = pumping_run(PumpingStrategy::AlwaysB, &g, 1000).unwrap();
        assert_eq!(b.exact, Some(int(-2)));
        assert!((b.running_min + 2.0).abs() < 1e-12);
        assert_eq!(&b.weights[..3], &[4, -1, -1]);
    }

    #[test]
    fn pumping_minimum_closed_form() {
        // Fixed point m of the value right after the -2 step:
        // m (1 - γ^(c+2)) = -2 - γ(1-γ^c)/(1-γ) + 4γ^(c+1).
        for (c, g) in [(20u64, rat(1, 2)), (3, rat(1, 3)), (7, rat(9, 10))] {
            let one = int(1);
            let gc = g.pow(c as i32);
            let m = (int(-2) - &g * (&one - &gc) / (&one - &g) + int(4) * &gc * &g) / (&one - &gc * &g * &g);
            let run = pumping_run(PumpingStrategy::Capped(c), &g, 200).unwrap();
            assert_eq!(run.exact, Some(m));
        }
        // At γ = 1/2 and cap 20 the minimum sits at -3 + (9/4)·2^-20.
        let run = pumping_run(PumpingStrategy::Capped(20), &rat(1, 2), 200).unwrap();
        let slack = (run.exact.unwrap() + int(3)) * int(1 << 20);
        let d = slack - rat(9, 4);
        assert!(d > rat(-1, 1000) && d < rat(1, 1000));
    }

    #[test]
    fn pumping_monotone_in_cap() {
        let g = rat(1, 2);
        let mut prev = f64::INFINITY;
        for cap in [2, 4, 8, 16] {
            let r = pumping_run(PumpingStrategy::Capped(cap), &g, 5000).unwrap();
            assert!(r.running_min <= prev + 1e-12);
            assert!(r.running_min >= -3.0);
            prev = r.running_min;
        }
        let u = pumping_run(PumpingStrategy::Unbounded, &g, 3000).unwrap();
        assert!(u.exact.is_none());
        assert!(u.running_min > -3.0 - 1e-9 && u.running_min < -2.99);
    }

    #[test]
    fn fig1_gap() {
        let r = positional_gap(&fig1_arena(), &rat(1, 2), &[1, 5, 10, 20]).unwrap();
        assert_eq!(r.positional_best, vec![int(-2), int(-2)]);
        assert_eq!(r.limit, Some(int(-3)));
        assert_eq!(r.gap, Some(int(1)));
        assert!(r.pumping.windows(2).all(|p| p[1].1 <= p[0].1));
        // value - (-3) shrinks like 2^-cap
        let rates: Vec<f64> = r.rate.iter().map(|(_, c)| to_f64(c.as_ref().unwrap())).collect();
        assert!(rates.iter().all(|c| (1.0..=10.0).contains(c)));

        let z = positional_gap(&fig1_arena(), &int(0), &[3]).unwrap();
        assert_eq!(z.positional_best, vec![int(-2), int(-2)]);
        assert_eq!(z.gap, Some(int(0)));
    }

    #[test]
    fn single_strategy_gap() {
        let mut b = ArenaBuilder::new();
        b.add_state("s").unwrap();
        b.set_actions(0, vec!["a".into()], vec!["b".into()]).unwrap();
        b.set("s", "a", "b", int(3), &[("s", int(1))]).unwrap();
        let r = positional_gap(&b.build().unwrap(), &rat(1, 2), &[1]).unwrap();
        assert_eq!(r.gap, Some(int(0)));
        assert_eq!(r.positional_best, vec![int(6)]);
    }

    #[test]
    fn prefix_checks() {
        let v = [int(3), int(4), int(5)];
        let c = prefix_independence_check(&[int(1_000_000)], &v, &rat(1, 2)).unwrap();
        assert!(c.holds && c.decomposition);
        let c = prefix_independence_check(&[], &v, &rat(1, 2)).unwrap();
        assert!(c.holds && c.decomposition);
        let c = prefix_independence_check(&[int(-7), rat(1, 3), int(0)], &[int(2), int(-1)], &rat(2, 3)).unwrap();
        assert!(c.holds && c.decomposition);
    }
}
