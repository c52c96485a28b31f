mod common;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use pastgames::arena::{fig1_arena, parse_arena, serialize_arena, simulate, StationaryStrategy};
use pastgames::discounted::{solve_discounted_past_with, DiscountedOptions};
use pastgames::error::Error;
use pastgames::generate::{random_concurrent, random_mdp, random_turn_based};
use pastgames::liminf::{solve_liminf, solve_liminf_det_tb_with};
use pastgames::mean::{solve_mean_past, tauberian_sweep, MeanOptions};
use pastgames::rational::{int, rat};
use pastgames::report::Method;
use pastgames::window::{solve_window, WindowOptions};
use pastgames::{Exec, Player};

#[test]
fn bundled_arena_file_matches() {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/data/fig1.json")).unwrap();
    let a = parse_arena(&text).unwrap();
    assert_eq!(a, fig1_arena());
    assert_eq!(parse_arena(&serialize_arena(&a)).unwrap(), a);
}

#[test]
fn fig1_mean_past_report() {
    let a = fig1_arena();
    let rep = solve_mean_past(&a, &rat(1, 2), &MeanOptions::default()).unwrap();
    assert_eq!(rep.method, Method::Karp);
    assert_eq!(rep.values.exact().unwrap(), &[int(-2), int(-2)]);
    let json = rep.to_json(&a);
    assert_eq!(json["values"]["s0"], "-2/1");
    assert_eq!(json["values"]["s1"], "-2/1");
    assert_eq!(json["method"], "karp");
}

#[test]
fn fig1_window_values_fall_towards_the_infimum() {
    let a = fig1_arena();
    let g = rat(1, 2);
    let mut prev = None;
    for ell in 0..6 {
        let sol = solve_window(&a, &g, ell, &WindowOptions::default()).unwrap();
        let v = sol.values.exact().unwrap()[0].clone();
        if ell == 0 {
            assert_eq!(v, int(-2));
        }
        // Min's window value can only get lower as the window sees more
        // of the -1 loop.
        if let Some(p) = prev {
            assert!(v <= p);
        }
        assert!(v >= int(-3));
        prev = Some(v);
        let doc = sol.to_json(&a);
        assert_eq!(doc["ell"], ell);
        assert!(doc["values"].get("s0").is_some());
    }
}

#[test]
fn execution_mode_does_not_change_results() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let big = random_concurrent(&mut rng, 300, 2, 5);
    let run = |exec| {
        let opts = DiscountedOptions { exec, ..Default::default() };
        solve_discounted_past_with(&big, &rat(3, 4), &rat(1, 2), 1e-6, &opts).unwrap()
    };
    let (s, p) = (run(Exec::Sequential), run(Exec::Parallel));
    assert_eq!(s.values.to_f64(), p.values.to_f64());
    assert_eq!(s.iterations, p.iterations);
    assert_eq!(s.strategy_min, p.strategy_min);

    let tb = random_turn_based(&mut rng, 60, 3, 9, None);
    let a = solve_liminf_det_tb_with(&tb, Exec::Sequential).unwrap();
    let b = solve_liminf_det_tb_with(&tb, Exec::Parallel).unwrap();
    assert_eq!(a.values.exact(), b.values.exact());
    assert_eq!(a.strategy_max, b.strategy_max);

    let cyc = pastgames::generate::cycle_arena(&[int(1), int(-3), int(2)]);
    let grid = [rat(1, 2), rat(3, 4), rat(7, 8)];
    let t1 = tauberian_sweep(&cyc, &rat(1, 4), &grid, 1e-6, Exec::Sequential).unwrap();
    let t2 = tauberian_sweep(&cyc, &rat(1, 4), &grid, 1e-6, Exec::Parallel).unwrap();
    assert_eq!(t1.rows, t2.rows);
}

#[test]
fn liminf_on_random_arenas_matches_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut checked = 0;
    while checked < 40 {
        let n = 1 + checked % 7;
        let a = random_turn_based(&mut rng, n, 3, 5, None);
        let Some(oracle) = common::liminf_enumeration(&a, 1 << 14) else { continue };
        let rep = solve_liminf(&a).unwrap();
        assert_eq!(rep.values.exact().unwrap(), &oracle[..]);
        checked += 1;
    }
}

#[test]
fn mdp_liminf_is_bounded_by_weights() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for owner in [Player::Min, Player::Max] {
        for _ in 0..10 {
            let a = random_mdp(&mut rng, 4, 2, 5, owner);
            let rep = solve_liminf(&a).unwrap();
            assert!(!rep.certified);
            for v in rep.values.to_f64() {
                assert!((-5.0..=5.0).contains(&v));
            }
        }
    }
}

#[test]
fn simulation_is_seeded() {
    let a = fig1_arena();
    let min = StationaryStrategy::uniform(&a, Player::Min);
    let max = StationaryStrategy::uniform(&a, Player::Max);
    let p1 = simulate(&a, &min, &max, 0, 7, 50).unwrap();
    let p2 = simulate(&a, &min, &max, 0, 7, 50).unwrap();
    assert_eq!(p1.to_json(&a), p2.to_json(&a));
    assert!(p1.is_consistent(&a));
}

#[test]
fn unsupported_classes_are_reported() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let a = random_concurrent(&mut rng, 3, 2, 3);
    let concurrent = (0..20)
        .map(|_| random_concurrent(&mut rng, 3, 2, 3))
        .find(|x| x.sole_controller().is_none() && !x.classify().turn_based)
        .unwrap_or(a);
    assert!(matches!(solve_liminf(&concurrent), Err(Error::UnsupportedClass(_))));
    assert!(matches!(
        solve_window(&concurrent, &rat(1, 2), 1, &WindowOptions::default()),
        Err(Error::UnsupportedClass(_))
    ));
    assert!(matches!(solve_mean_past(&fig1_arena(), &int(1), &MeanOptions::default()), Err(Error::Parameter(_))));
}
