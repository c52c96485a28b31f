//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on failure.

mod common;

use std::time::{Duration, Instant};

use num::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pastgames::arena::{fig1_arena, Arena};
use pastgames::discounted::{shapley_operator, solve_discounted, solve_discounted_past};
use pastgames::experiments::{positional_gap, pumping_run, submixing_scan, PumpingStrategy};
use pastgames::generate::{cycle_arena, random_concurrent, random_turn_based};
use pastgames::liminf::solve_liminf;
use pastgames::matrix::{matrix_value, support_enumeration_value, MatrixGame};
use pastgames::mean::{solve_mean, solve_mean_past, tauberian_sweep, MeanOptions};
use pastgames::payoff::{
    finite_past_discounted, past_discounted_prefixes, payoff_dp, payoff_mp, payoff_p, rotation_limits, Bound,
};
use pastgames::rational::{format_rational, int, pow, rat, to_f64, Rational};
use pastgames::window::{solve_window, window_product, WindowOptions, DEFAULT_STATE_CAP};
use pastgames::{Exec, UpSeq};

use common::{direct_sum, liminf_enumeration, liminf_enumeration_size, mean_enumeration};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn criterion_1() -> Outcome {
    let seq = UpSeq::from_ints(&[], &[3, 4, 5]).unwrap();
    for g in [rat(1, 10), rat(1, 2), rat(9, 10)] {
        let one = Rational::one();
        let d = &one - pow(&g, 3);
        // Ending at 3, at 4, at 5.
        let expected = vec![
            (int(3) + int(5) * &g + int(4) * &g * &g) / &d,
            (int(4) + int(3) * &g + int(5) * &g * &g) / &d,
            (int(5) + int(4) * &g + int(3) * &g * &g) / &d,
        ];
        let got = rotation_limits(&seq, &g).map_err(|e| e.to_string())?;
        ensure(got == expected, || format!("rotation limits at γ={}", format_rational(&g)))?;
        // P^n = L_{n mod 3} - γ^{n+1} L_2 exactly, so the limits are the
        // accumulation points of the prefix sums.
        for (n, p) in past_discounted_prefixes(&seq, &g, 40).iter().enumerate() {
            ensure(*p == &expected[n % 3] - pow(&g, n + 1) * &expected[2], || format!("P^{n}"))?;
        }
        ensure(payoff_p(&seq, &g, Bound::Lower).unwrap() == *expected.iter().min().unwrap(), || "lower".into())?;
        ensure(payoff_p(&seq, &g, Bound::Upper).unwrap() == *expected.iter().max().unwrap(), || "upper".into())?;
        ensure(payoff_mp(&seq, &g).unwrap() == int(4) / (&one - &g), || "MP".into())?;
        for l in [rat(1, 10), rat(1, 2), rat(9, 10)] {
            let want = (int(3) + int(4) * &l + int(5) * &l * &l) / ((&one - &g * &l) * (&one - pow(&l, 3)));
            ensure(payoff_dp(&seq, &l, &g).unwrap() == want, || "DP".into())?;
        }
    }
    let dp = payoff_dp(&seq, &rat(1, 2), &rat(1, 2)).unwrap();
    ensure(dp == rat(200, 21), || format!("DP(1/2,1/2) = {}", format_rational(&dp)))?;
    Ok("3 rotation limits × 3 γ, DP and MP exact".into())
}

fn criterion_2() -> Outcome {
    let r = &submixing_scan(&[rat(1, 10)], Exec::Sequential).map_err(|e| e.to_string())?[0];
    let (z, x, y) = (to_f64(&r.p_z), to_f64(&r.p_x), to_f64(&r.p_y));
    ensure((z - 11.2211).abs() <= 1e-3, || format!("P(z) = {z}"))?;
    ensure((x - 2.4002).abs() <= 1e-3 && (y - 2.4002).abs() <= 1e-3, || format!("P(x), P(y) = {x}, {y}"))?;
    ensure(r.p_x == r.p_y, || "P(x) != P(y)".into())?;
    let grid: Vec<Rational> = (1..=18).map(|k| rat(k, 20)).collect();
    let rows = submixing_scan(&grid, Exec::Parallel).map_err(|e| e.to_string())?;
    let bad: Vec<String> = rows.iter().filter(|r| !r.witness).map(|r| format_rational(&r.gamma)).collect();
    ensure(bad.is_empty(), || format!("no witness at γ = {}", bad.join(", ")))?;
    Ok(format!("P(z)={z:.4} P(x)=P(y)={x:.4}; witness on all {} grid points", rows.len()))
}

/// Lower payoff of `(4, -1^cap, -2)^ω` from the rotation sums written out.
fn capped_oracle(cap: usize, g: f64) -> f64 {
    let mut cycle = vec![4.0];
    cycle.extend(std::iter::repeat_n(-1.0, cap));
    cycle.push(-2.0);
    let p = cycle.len();
    (0..p)
        .map(|r| (0..p).map(|i| g.powi(i as i32) * cycle[(r + p - i) % p]).sum::<f64>() / (1.0 - g.powi(p as i32)))
        .fold(f64::INFINITY, f64::min)
}

fn criterion_3() -> Outcome {
    let g = rat(1, 2);
    let gap = positional_gap(&fig1_arena(), &g, &[20]).map_err(|e| e.to_string())?;
    ensure(gap.positional_best.iter().all(|v| *v == int(-2)), || {
        format!("positional best {:?}", gap.positional_best.iter().map(format_rational).collect::<Vec<_>>())
    })?;
    let run = pumping_run(PumpingStrategy::Capped(20), &g, 10_000).map_err(|e| e.to_string())?;
    ensure(run.running_min <= -2.999, || format!("running min {}", run.running_min))?;
    let oracle = capped_oracle(20, 0.5);
    ensure((run.running_min - oracle).abs() <= 1e-3, || format!("trajectory {} vs {oracle}", run.running_min))?;
    ensure(run.infimum == int(-3), || format!("infimum {}", format_rational(&run.infimum)))?;
    ensure(gap.limit == Some(int(-3)), || "gap limit".into())?;
    Ok(format!("positional -2, cap-20 running min {:.6}, infimum -3", run.running_min))
}

fn criterion_4() -> Outcome {
    let eps = 1e-6;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let arenas: Vec<Arena> = (0..50)
        .map(|_| {
            let n = rng.gen_range(1..=6);
            random_concurrent(&mut rng, n, 3, 10)
        })
        .collect();
    let mut worst = 0.0f64;
    for (i, a) in arenas.iter().enumerate() {
        for (l, g) in [(rat(1, 2), rat(1, 2)), (rat(9, 10), rat(1, 3))] {
            let past = solve_discounted_past(a, &l, &g, eps).map_err(|e| e.to_string())?;
            let plain = solve_discounted(a, &l, eps).map_err(|e| e.to_string())?;
            let c = 1.0 - to_f64(&(&g * &l));
            for s in 0..a.num_states() {
                let err = (past.values.get_f64(s) - plain.values.get_f64(s) / c).abs();
                worst = worst.max(err);
                ensure(err <= 2.0 * eps, || format!("arena {i} state {s}: error {err:e}"))?;
            }
        }
    }
    Ok(format!("50 arenas × 2 (λ,γ), max error {worst:.2e}"))
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut arenas = vec![fig1_arena()];
    for i in 0..40 {
        let n = 1 + i % 8;
        let owner = match i % 4 {
            0 => Some(pastgames::Player::Min),
            1 => Some(pastgames::Player::Max),
            _ => None,
        };
        arenas.push(random_turn_based(&mut rng, n, 3, 9, owner));
    }
    let opts = MeanOptions::default();
    for (i, a) in arenas.iter().enumerate() {
        let oracle = mean_enumeration(a);
        let exact = solve_mean(a, &opts).map_err(|e| e.to_string())?;
        let exact = exact.values.exact().ok_or("mean solve was not exact")?.to_vec();
        ensure(exact == oracle, || format!("arena {i}: mean solver disagrees with enumeration"))?;
        for g in [rat(1, 2), rat(1, 3), int(0)] {
            let past = solve_mean_past(a, &g, &opts).map_err(|e| e.to_string())?;
            let scaled: Vec<Rational> = past
                .values
                .exact()
                .ok_or("past solve was not exact")?
                .iter()
                .map(|v| v * (Rational::one() - &g))
                .collect();
            ensure(scaled == oracle, || format!("arena {i}, γ={}: scaled values differ", format_rational(&g)))?;
        }
    }
    Ok(format!("{} arenas × 3 γ exact", arenas.len()))
}

const WINDOW_ORACLE_BUDGET: u128 = 1 << 12;

fn criterion_6() -> Outcome {
    let g = rat(1, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let opts = WindowOptions {
        exec: Exec::Sequential,
        ..Default::default()
    };
    let mut accepted = 0;
    let mut rejected = 0;
    let mut products = 0;
    while accepted < 25 {
        let n = rng.gen_range(1..=5);
        let a = random_turn_based(&mut rng, n, 2, 3, None);
        let prods: Vec<_> = (0..=3u64).map(|ell| window_product(&a, &g, ell, DEFAULT_STATE_CAP).unwrap()).collect();
        if prods.iter().any(|p| liminf_enumeration_size(&p.arena) > WINDOW_ORACLE_BUDGET) {
            rejected += 1;
            continue;
        }
        for (ell, p) in prods.iter().enumerate() {
            let oracle = liminf_enumeration(&p.arena, WINDOW_ORACLE_BUDGET).unwrap();
            let sol = solve_window(&a, &g, ell as u64, &opts).map_err(|e| e.to_string())?;
            let got = sol.values.exact().ok_or("window values not exact")?;
            for s in 0..n {
                ensure(got[s] == oracle[p.initial(s)], || {
                    format!(
                        "arena {accepted}, ℓ={ell}, state {s}: {} vs oracle {}",
                        format_rational(&got[s]),
                        format_rational(&oracle[p.initial(s)])
                    )
                })?;
            }
            if ell == 0 {
                let lim = solve_liminf(&a).map_err(|e| e.to_string())?;
                ensure(lim.values.exact() == Some(got), || format!("arena {accepted}: ℓ=0 differs from liminf"))?;
            }
            products += p.num_states();
        }
        accepted += 1;
    }
    Ok(format!("25 arenas × ℓ∈0..=3 ({products} product states, oracle budget exceeded by {rejected} resampled arena(s))"))
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut cycles: Vec<Vec<Rational>> = vec![vec![int(3), int(4), int(5)], vec![int(-2)], vec![int(4), int(-1), int(-2)]];
    for _ in 0..5 {
        let p = rng.gen_range(1..=4);
        cycles.push((0..p).map(|_| int(rng.gen_range(-5..=5))).collect());
    }
    let grid: Vec<Rational> = [5u32, 10, 15].iter().map(|&j| Rational::one() - rat(1, 1 << j)).collect();
    let mut worst_ratio = 0.0f64;
    for c in &cycles {
        let a = cycle_arena(c);
        let w = to_f64(&a.max_abs_weight());
        for g in [rat(1, 4), rat(1, 2)] {
            let table = tauberian_sweep(&a, &g, &grid, 1e-6, Exec::Parallel).map_err(|e| e.to_string())?;
            let gf = to_f64(&g);
            for row in &table.rows {
                let bound = 10.0 * (1.0 - row.lambda) * w / ((1.0 - gf) * (1.0 - gf));
                if bound > 0.0 {
                    worst_ratio = worst_ratio.max(row.abs_error / bound);
                }
                ensure(row.abs_error <= bound, || {
                    format!("cycle {c:?}, γ={gf}, λ={}: error {:e} > {bound:e}", row.lambda, row.abs_error)
                })?;
            }
        }
    }
    Ok(format!("{} cycles × 2 γ × 3 λ, worst error/bound {worst_ratio:.3}", cycles.len()))
}

fn random_rational(rng: &mut impl Rng) -> Rational {
    rat(rng.gen_range(-50..=50), rng.gen_range(1..=9))
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for i in 0..200 {
        let n = rng.gen_range(0..=30);
        let w: Vec<Rational> = (0..=n).map(|_| random_rational(&mut rng)).collect();
        let den = rng.gen_range(1..=10);
        let g = rat(rng.gen_range(0..den), den);
        let one = Rational::one();
        let n1 = Rational::from_integer((n as i64 + 1).into());
        let lhs: Rational = (0..=n).map(|k| direct_sum(&w[..=k], &g)).sum::<Rational>() / &n1;
        let rhs: Rational = (0..=n)
            .map(|k| &w[k] * (&one - pow(&g, n + 1 - k)) / (&n1 * (&one - &g)))
            .sum();
        ensure(lhs == rhs, || format!("Cesaro identity, instance {i}"))?;
        let lib: Rational = (0..=n).map(|k| finite_past_discounted(&w[..=k], &g).unwrap()).sum::<Rational>() / &n1;
        ensure(lib == lhs, || format!("library prefix sums, instance {i}"))?;
        let tail: Rational = (0..=n).map(|k| pow(&g, n + 1 - k) * &w[k]).sum::<Rational>() / (&n1 * (&one - &g));
        let m = w.iter().map(|x| x.abs()).max().unwrap();
        let bound = m * &g / (&n1 * (&one - &g) * (&one - &g));
        ensure(tail.abs() <= bound, || format!("tail bound, instance {i}"))?;
    }
    let mut worst = f64::NEG_INFINITY;
    for l in [rat(1, 10), rat(1, 2), rat(9, 10)] {
        let lf = to_f64(&l);
        for i in 0..100 {
            let n = rng.gen_range(1..=6);
            let a = random_concurrent(&mut rng, n, 3, 10);
            let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-100.0..100.0)).collect();
            let u: Vec<f64> = (0..n).map(|_| rng.gen_range(-100.0..100.0)).collect();
            let fv = shapley_operator(&a, &l, &v).map_err(|e| e.to_string())?;
            let fu = shapley_operator(&a, &l, &u).map_err(|e| e.to_string())?;
            let lhs = fv.iter().zip(&fu).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            let dist = v.iter().zip(&u).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            worst = worst.max(lhs - lf * dist);
            ensure(lhs <= lf * dist + 1e-9 * (1.0 + dist), || format!("contraction λ={lf}, pair {i}: {lhs} > {}", lf * dist))?;
        }
    }
    Ok(format!("200 identity and tail-bound instances, 300 contraction pairs (max slack used {worst:.2e})"))
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = 0.0f64;
    for i in 0..500 {
        let r = rng.gen_range(1..=5);
        let c = rng.gen_range(1..=5);
        let entries: Vec<Vec<Rational>> = (0..r)
            .map(|_| (0..c).map(|_| rat(rng.gen_range(-20..=20), rng.gen_range(1..=6))).collect())
            .collect();
        let g = MatrixGame::new(entries).unwrap();
        let lp = matrix_value(&g, 1e-9).map_err(|e| e.to_string())?;
        let oracle = to_f64(&support_enumeration_value(&g).map_err(|e| e.to_string())?);
        let err = (lp.value - oracle).abs();
        worst = worst.max(err);
        ensure(err <= 1e-9, || format!("matrix {i}: {} vs {oracle}", lp.value))?;
        if let Some(ex) = &lp.exact {
            ensure(!ex.value.is_zero() || oracle == 0.0, || format!("matrix {i}: exact value"))?;
        }
    }
    Ok(format!("500 matrices, max deviation {worst:.1e}"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, Duration); 9] = [
        ("worked-example exactness", criterion_1, Duration::from_secs(1)),
        ("submixing counterexample", criterion_2, Duration::from_secs(1)),
        ("unbounded-memory example", criterion_3, Duration::from_secs(5)),
        ("discounted reduction", criterion_4, Duration::from_secs(60)),
        ("mean reduction", criterion_5, Duration::from_secs(30)),
        ("window reduction", criterion_6, Duration::from_secs(120)),
        ("Tauberian check", criterion_7, Duration::from_secs(30)),
        ("identity suites", criterion_8, Duration::from_secs(10)),
        ("matrix-game oracle", criterion_9, Duration::from_secs(30)),
    ];
    let mut failed = 0;
    for (i, (name, run, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let took = start.elapsed();
        let outcome = match outcome {
            Ok(msg) if took > *limit => Err(format!("{msg}; over the {}s budget", limit.as_secs())),
            other => other,
        };
        match outcome {
            Ok(msg) => println!("PASS {} {name}: {msg} ({:.2}s)", i + 1, took.as_secs_f64()),
            Err(msg) => {
                failed += 1;
                println!("FAIL {} {name}: {msg} ({:.2}s)", i + 1, took.as_secs_f64());
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
