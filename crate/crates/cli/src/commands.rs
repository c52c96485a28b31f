use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use pastgames::arena::{parse_arena, serialize_arena, simulate, Arena, StationaryStrategy, FIG1_JSON};
use pastgames::discounted::{solve_discounted_past_with, solve_discounted_with, DiscountedOptions};
use pastgames::experiments::{
    positional_gap, prefix_independence_check, pumping_run, submixing_scan, write_pumping_csv, write_scan_csv,
    PumpingStrategy,
};
use pastgames::liminf::solve_liminf;
use pastgames::matrix::{matrix_value, MatrixGame};
use pastgames::mean::{solve_mean, solve_mean_past, tauberian_sweep, MeanOptions};
use pastgames::payoff::PayoffKind;
use pastgames::rational::{check_discount, format_decimal, format_rational, parse_rational, rat, Rational};
use pastgames::window::{solve_window, window_product, WindowOptions};
use pastgames::{Error, Exec, Player, UpSeq};

use crate::{Cli, Command, Objective, PayoffArg, Repro};

pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: if e.is_input_error() { 2 } else { 3 },
            message: format!("[{}]: {e}", e.kind()),
        }
    }
}

fn input(message: String) -> Failure {
    Failure { code: 2, message }
}

type Outcome<T> = Result<T, Failure>;

fn param(msg: String) -> Failure {
    Error::Parameter(msg).into()
}

fn discount(name: &str, text: &str) -> Outcome<Rational> {
    let x = parse_rational(text)?;
    check_discount(name, &x)?;
    Ok(x)
}

fn opt_discount(name: &str, text: Option<&String>) -> Outcome<Option<Rational>> {
    text.map(|t| discount(name, t)).transpose()
}

fn need<T>(name: &str, value: Option<T>, what: &str) -> Outcome<T> {
    value.ok_or_else(|| param(format!("--{name} is required for {what}")))
}

fn positive_f64(name: &str, text: &str) -> Outcome<f64> {
    match text.trim().parse::<f64>() {
        Ok(x) if x.is_finite() && x > 0.0 => Ok(x),
        _ => Err(param(format!("--{name} must be a positive number, got {text:?}"))),
    }
}

fn rational_list(name: &str, text: &str) -> Outcome<Vec<Rational>> {
    text.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| parse_rational(t).map_err(Failure::from))
        .collect::<Outcome<Vec<_>>>()
        .and_then(|v| if v.is_empty() { Err(param(format!("--{name} is empty"))) } else { Ok(v) })
}

fn read(path: &Path) -> Outcome<String> {
    fs::read_to_string(path).map_err(|e| input(format!("[io]: cannot read {}: {e}", path.display())))
}

fn load_arena(path: &Path) -> Outcome<Arena> {
    let text = if !path.exists() && path.file_name().is_some_and(|n| n == "fig1.json") {
        FIG1_JSON.to_string()
    } else {
        read(path)?
    };
    Ok(parse_arena(&text)?)
}

fn write_to(path: &Path, bytes: &[u8]) -> Outcome<()> {
    fs::write(path, bytes).map_err(|e| Failure {
        code: 3,
        message: format!("[io]: cannot write {}: {e}", path.display()),
    })
}

fn emit(out: Option<&PathBuf>, bytes: &[u8]) -> Outcome<()> {
    match out {
        Some(p) => write_to(p, bytes),
        None => std::io::stdout().write_all(bytes).map_err(|e| Failure {
            code: 3,
            message: format!("[io]: stdout: {e}"),
        }),
    }
}

fn json_bytes(v: &serde_json::Value) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s.into_bytes()
}

fn configure_threads(threads: Option<usize>) -> Outcome<Exec> {
    match threads {
        Some(0) => Err(param("--threads must be at least 1".into())),
        Some(1) => Ok(Exec::Sequential),
        #[cfg(feature = "parallel")]
        Some(n) => {
            // Only fails if a pool already exists, which cannot happen here.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            Ok(Exec::Parallel)
        }
        #[cfg(not(feature = "parallel"))]
        Some(_) => Ok(Exec::Sequential),
        None => Ok(Exec::Parallel),
    }
}

pub fn run(cli: Cli) -> Outcome<()> {
    let exec = configure_threads(cli.threads)?;
    let out = cli.out.as_ref();
    match cli.command {
        Command::Validate(a) => {
            let arena = load_arena(&a.arena)?;
            let doc = serde_json::json!({ "valid": true, "states": arena.num_states() });
            emit(out, &json_bytes(&doc))
        }
        Command::Classify(a) => {
            let arena = load_arena(&a.arena)?;
            let class = arena.classify();
            let controller = match arena.sole_controller() {
                Some(Player::Min) => serde_json::json!("min"),
                Some(Player::Max) => serde_json::json!("max"),
                None => serde_json::Value::Null,
            };
            let doc = serde_json::json!({
                "states": arena.num_states(),
                "turn_based": class.turn_based,
                "deterministic": class.deterministic,
                "players": class.players,
                "controller": controller,
                "description": class.describe(),
            });
            emit(out, &json_bytes(&doc))
        }
        Command::Payoff { seq, kind, lambda, gamma, ell } => {
            let lambda = opt_discount("lambda", lambda.as_ref())?;
            let gamma = opt_discount("gamma", gamma.as_ref())?;
            let what = "this payoff kind";
            let kind = match kind {
                PayoffArg::Limit => PayoffKind::Limit,
                PayoffArg::Mean => PayoffKind::Mean,
                PayoffArg::Discounted => PayoffKind::Discounted { lambda: need("lambda", lambda, what)? },
                PayoffArg::PdLower => PayoffKind::PastLower { gamma: need("gamma", gamma, what)? },
                PayoffArg::PdUpper => PayoffKind::PastUpper { gamma: need("gamma", gamma, what)? },
                PayoffArg::Window => PayoffKind::Window {
                    gamma: need("gamma", gamma, what)?,
                    ell: need("ell", ell, what)?,
                },
                PayoffArg::PdDiscounted => PayoffKind::DiscountedPast {
                    lambda: need("lambda", lambda, what)?,
                    gamma: need("gamma", gamma, what)?,
                },
                PayoffArg::PdMean => PayoffKind::MeanPast { gamma: need("gamma", gamma, what)? },
            };
            let seq = UpSeq::parse(&seq)?;
            let v = kind.evaluate(&seq)?;
            let doc = serde_json::json!({
                "sequence": seq.to_string(),
                "value": format_rational(&v),
                "decimal": format_decimal(&v, 12),
            });
            emit(out, &json_bytes(&doc))
        }
        Command::Solve { arena, objective, lambda, gamma, ell, eps, max_iterations, cap } => {
            let lambda = opt_discount("lambda", lambda.as_ref())?;
            let gamma = opt_discount("gamma", gamma.as_ref())?;
            let eps = positive_f64("eps", &eps)?;
            let what = "this objective";
            let doc = match objective {
                Objective::Discounted | Objective::PdDiscounted => {
                    let lambda = need("lambda", lambda, what)?;
                    let gamma = if objective == Objective::PdDiscounted { Some(need("gamma", gamma, what)?) } else { None };
                    let a = load_arena(&arena.arena)?;
                    let opts = DiscountedOptions { max_iterations, exec, initial: None };
                    let rep = match gamma {
                        Some(g) => solve_discounted_past_with(&a, &lambda, &g, eps, &opts)?,
                        None => solve_discounted_with(&a, &lambda, eps, &opts)?,
                    };
                    rep.to_json(&a)
                }
                Objective::Mean | Objective::PdMean => {
                    let gamma = if objective == Objective::PdMean { Some(need("gamma", gamma, what)?) } else { None };
                    let a = load_arena(&arena.arena)?;
                    let opts = MeanOptions { epsilon: eps, exec, ..Default::default() };
                    let rep = match gamma {
                        Some(g) => solve_mean_past(&a, &g, &opts)?,
                        None => solve_mean(&a, &opts)?,
                    };
                    rep.to_json(&a)
                }
                Objective::Liminf => {
                    let a = load_arena(&arena.arena)?;
                    solve_liminf(&a)?.to_json(&a)
                }
                Objective::Window => {
                    let gamma = need("gamma", gamma, what)?;
                    let ell = need("ell", ell, what)?;
                    let a = load_arena(&arena.arena)?;
                    let sol = solve_window(&a, &gamma, ell, &WindowOptions { state_cap: cap, exec })?;
                    sol.to_json(&a)
                }
            };
            emit(out, &json_bytes(&doc))
        }
        Command::WindowExpand { arena, gamma, ell, cap, mapping } => {
            let gamma = discount("gamma", &gamma)?;
            let a = load_arena(&arena.arena)?;
            let p = window_product(&a, &gamma, ell, cap)?;
            emit(out, format!("{}\n", serialize_arena(&p.arena)).as_bytes())?;
            let sidecar = mapping.or_else(|| {
                out.map(|o| {
                    let mut s = o.clone().into_os_string();
                    s.push(".mapping.json");
                    PathBuf::from(s)
                })
            });
            if let Some(path) = sidecar {
                write_to(&path, &json_bytes(&p.mapping_json(&a)))?;
            }
            Ok(())
        }
        Command::Sweep { arena, gamma, lambda_grid, eps } => {
            let gamma = discount("gamma", &gamma)?;
            let grid = rational_list("lambda-grid", &lambda_grid)?;
            for l in &grid {
                check_discount("lambda", l)?;
            }
            let eps = positive_f64("eps", &eps)?;
            let a = load_arena(&arena.arena)?;
            let table = tauberian_sweep(&a, &gamma, &grid, eps, exec)?;
            let mut buf = Vec::new();
            table.write_csv(&mut buf)?;
            emit(out, &buf)
        }
        Command::Repro { what } => repro(what, exec, out),
        Command::MatrixSolve { matrix, tol } => {
            let tol = positive_f64("tol", &tol)?;
            let g = MatrixGame::parse(&read(&matrix)?)?;
            emit(out, &json_bytes(&matrix_value(&g, tol)?.to_json()))
        }
        Command::Simulate { arena, min_strategy, max_strategy, start, horizon, seed } => {
            let a = load_arena(&arena.arena)?;
            let load = |path: &Option<PathBuf>, owner| -> Outcome<StationaryStrategy> {
                match path {
                    Some(p) => Ok(StationaryStrategy::from_json(&a, owner, &read(p)?)?),
                    None => Ok(StationaryStrategy::uniform(&a, owner)),
                }
            };
            let min = load(&min_strategy, Player::Min)?;
            let max = load(&max_strategy, Player::Max)?;
            let s0 = match &start {
                Some(name) => a
                    .state_index(name)
                    .ok_or_else(|| Failure::from(Error::Semantic(format!("unknown state id {name:?}"))))?,
                None => 0,
            };
            let play = simulate(&a, &min, &max, s0, seed, horizon)?;
            let total: Rational = play.weights(&a).iter().sum();
            let doc = serde_json::json!({
                "seed": seed,
                "start": a.state_name(s0),
                "horizon": horizon,
                "steps": play.to_json(&a),
                "total_weight": format_rational(&total),
            });
            emit(out, &json_bytes(&doc))
        }
    }
}

fn repro(what: Repro, exec: Exec, out: Option<&PathBuf>) -> Outcome<()> {
    let mut buf = Vec::new();
    match what {
        Repro::Submixing { gammas } => {
            let grid = match gammas {
                Some(text) => rational_list("gammas", &text)?,
                None => (1..=18).map(|k| rat(k, 20)).collect(),
            };
            let rows = submixing_scan(&grid, exec)?;
            write_scan_csv(&rows, &mut buf)?;
        }
        Repro::Pumping { gamma, cap, unbounded, always_b, horizon } => {
            let gamma = discount("gamma", &gamma)?;
            let strategy = if unbounded {
                PumpingStrategy::Unbounded
            } else if always_b {
                PumpingStrategy::AlwaysB
            } else {
                PumpingStrategy::Capped(cap)
            };
            let run = pumping_run(strategy, &gamma, horizon)?;
            write_pumping_csv(&run, &mut buf)?;
        }
        Repro::Prefix { prefix, cycle, gamma } => {
            let gamma = discount("gamma", &gamma)?;
            let u = if prefix.trim().is_empty() { Vec::new() } else { rational_list("prefix", &prefix)? };
            let v = rational_list("cycle", &cycle)?;
            let c = prefix_independence_check(&u, &v, &gamma)?;
            let mut w = csv::Writer::from_writer(&mut buf);
            let rows = [
                ["gamma", "with_prefix", "without_prefix", "holds", "decomposition"].map(String::from),
                [
                    format_rational(&gamma),
                    format_rational(&c.with_prefix),
                    format_rational(&c.without_prefix),
                    c.holds.to_string(),
                    c.decomposition.to_string(),
                ],
            ];
            for r in rows {
                w.write_record(&r).map_err(|e| param(format!("csv: {e}")))?;
            }
            w.flush().map_err(|e| param(format!("csv: {e}")))?;
        }
        Repro::Gap { arena, gamma, caps } => {
            let gamma = discount("gamma", &gamma)?;
            let caps = caps
                .split(',')
                .map(|t| t.trim().parse::<u64>().map_err(|_| param(format!("--caps: not a count: {t:?}"))))
                .collect::<Outcome<Vec<u64>>>()?;
            let a = load_arena(&arena)?;
            let r = positional_gap(&a, &gamma, &caps)?;
            let mut w = csv::Writer::from_writer(&mut buf);
            let mut rows: Vec<[String; 5]> = vec![["kind", "cap", "state", "value", "decimal"].map(String::from)];
            let row = |kind: &str, cap: Option<u64>, state: &str, v: &Rational| {
                [
                    kind.to_string(),
                    cap.map(|c| c.to_string()).unwrap_or_default(),
                    state.to_string(),
                    format_rational(v),
                    format_decimal(v, 9),
                ]
            };
            for (s, v) in r.positional_best.iter().enumerate() {
                rows.push(row("positional", None, a.state_name(s), v));
            }
            let first = a.state_name(0);
            for (cap, v) in &r.pumping {
                rows.push(row("pumping", Some(*cap), first, v));
            }
            for (cap, v) in &r.rate {
                if let Some(v) = v {
                    rows.push(row("rate", Some(*cap), first, v));
                }
            }
            if let Some(l) = &r.limit {
                rows.push(row("limit", None, first, l));
            }
            if let Some(g) = &r.gap {
                rows.push(row("gap", None, first, g));
            }
            for r in rows {
                w.write_record(&r).map_err(|e| param(format!("csv: {e}")))?;
            }
            w.flush().map_err(|e| param(format!("csv: {e}")))?;
        }
    }
    emit(out, &buf)
}
