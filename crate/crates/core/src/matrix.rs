//! One-shot zero-sum matrix games.
//!
//! Rows are Min's actions, columns Max's; entry `(i, j)` is what Min pays
//! Max. Games are solved as a linear program with a dense tableau simplex
//! under Bland's rule, exactly over rationals for small matrices and in
//! floating point otherwise.

use std::fmt::Debug;

use num::{Num, One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{format_rational, parse_rational, to_f64, Rational};

/// Largest dimension solved with exact rational pivoting.
pub const EXACT_LIMIT: usize = 32;
/// Largest dimension accepted by [`support_enumeration_value`].
pub const ENUMERATION_LIMIT: usize = 5;
const PIVOT_CAP: usize = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixGame {
    entries: Vec<Vec<Rational>>,
}

impl MatrixGame {
    pub fn new(entries: Vec<Vec<Rational>>) -> Result<MatrixGame> {
        let cols = entries.first().map_or(0, Vec::len);
        if entries.is_empty() || cols == 0 {
            return Err(Error::Parameter("matrix game must be nonempty".into()));
        }
        if entries.iter().any(|r| r.len() != cols) {
            return Err(Error::Parameter("matrix game rows have different lengths".into()));
        }
        Ok(MatrixGame { entries })
    }

    pub fn from_ints(rows: &[&[i64]]) -> Result<MatrixGame> {
        MatrixGame::new(
            rows.iter()
                .map(|r| r.iter().map(|&x| Rational::from_integer(x.into())).collect())
                .collect(),
        )
    }

    /// Whitespace-separated rows, one per line; `#` starts a comment.
    pub fn parse(text: &str) -> Result<MatrixGame> {
        let rows = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty())
            .map(|l| l.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty()).map(parse_rational).collect())
            .collect::<Result<Vec<Vec<Rational>>>>()?;
        MatrixGame::new(rows)
    }

    pub fn rows(&self) -> usize {
        self.entries.len()
    }

    pub fn cols(&self) -> usize {
        self.entries[0].len()
    }

    pub fn entry(&self, i: usize, j: usize) -> &Rational {
        &self.entries[i][j]
    }

    pub fn entries(&self) -> &[Vec<Rational>] {
        &self.entries
    }

    pub fn map(&self, f: impl Fn(&Rational) -> Rational) -> MatrixGame {
        MatrixGame {
            entries: self.entries.iter().map(|r| r.iter().map(&f).collect()).collect(),
        }
    }

    fn to_f64(&self) -> Vec<Vec<f64>> {
        self.entries.iter().map(|r| r.iter().map(to_f64).collect()).collect()
    }
}

/// Exact optimal strategies, present when the rational back-end ran.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactSolution {
    pub value: Rational,
    pub row_strategy: Vec<Rational>,
    pub col_strategy: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixSolution {
    pub value: f64,
    pub row_strategy: Vec<f64>,
    pub col_strategy: Vec<f64>,
    /// `max_j (xA)_j - min_i (Ay)_i` for the returned strategies.
    pub duality_gap: f64,
    pub pivots: usize,
    pub exact: Option<ExactSolution>,
}

impl MatrixSolution {
    pub fn to_json(&self) -> serde_json::Value {
        let fmt = |f: &[f64], e: Option<&Vec<Rational>>| -> Vec<String> {
            match e {
                Some(e) => e.iter().map(format_rational).collect(),
                None => f.iter().map(|x| x.to_string()).collect(),
            }
        };
        serde_json::json!({
            "value": self.value,
            "exact_value": self.exact.as_ref().map(|e| format_rational(&e.value)),
            "row_strategy": fmt(&self.row_strategy, self.exact.as_ref().map(|e| &e.row_strategy)),
            "col_strategy": fmt(&self.col_strategy, self.exact.as_ref().map(|e| &e.col_strategy)),
            "duality_gap": self.duality_gap,
            "pivots": self.pivots,
        })
    }
}

/// Ordered field the simplex runs over. `eps` is the zero threshold used
/// in sign tests: zero for exact arithmetic.
pub trait LpScalar: Num + Clone + PartialOrd + Debug {
    fn eps() -> Self;
    fn approx(&self) -> f64;
}

impl LpScalar for Rational {
    fn eps() -> Self {
        Rational::zero()
    }
    fn approx(&self) -> f64 {
        to_f64(self)
    }
}

impl LpScalar for f64 {
    fn eps() -> Self {
        1e-12
    }
    fn approx(&self) -> f64 {
        *self
    }
}

/// Value and optimal strategies `(value, row, col, pivots)` of a game whose
/// entries are all at least 1.
///
/// Solves `max Σt  s.t.  Aᵀt ≤ 1, t ≥ 0`. With optimum `z`, Min plays
/// `t/z`, Max plays the slack duals over `z`, and the value is `1/z`.
fn simplex_positive<T: LpScalar>(a: &[Vec<T>]) -> Result<(T, Vec<T>, Vec<T>, usize)> {
    let m = a.len();
    let n = a[0].len();
    let width = m + n + 1;
    // constraint j: Σ_i a[i][j] t_i + s_j = 1
    let mut tab: Vec<Vec<T>> = (0..n)
        .map(|j| {
            let mut row = vec![T::zero(); width];
            for i in 0..m {
                row[i] = a[i][j].clone();
            }
            row[m + j] = T::one();
            row[width - 1] = T::one();
            row
        })
        .collect();
    // reduced costs; last entry holds -z
    let mut obj = vec![T::zero(); width];
    for c in obj.iter_mut().take(m) {
        *c = T::one();
    }
    let mut basis: Vec<usize> = (m..m + n).collect();
    let eps = T::eps();
    let mut pivots = 0;
    loop {
        let Some(enter) = (0..m + n).find(|&k| obj[k] > eps) else { break };
        let mut leave: Option<usize> = None;
        for r in 0..n {
            if tab[r][enter] > eps {
                let ratio = tab[r][width - 1].clone() / tab[r][enter].clone();
                leave = match leave {
                    None => Some(r),
                    Some(l) => {
                        let best = tab[l][width - 1].clone() / tab[l][enter].clone();
                        if ratio < best || (ratio == best && basis[r] < basis[l]) {
                            Some(r)
                        } else {
                            Some(l)
                        }
                    }
                };
            }
        }
        let Some(leave) = leave else {
            return Err(Error::NonConvergence("matrix game LP reported unbounded".into()));
        };
        pivots += 1;
        if pivots > PIVOT_CAP {
            return Err(Error::NonConvergence(format!("simplex exceeded {PIVOT_CAP} pivots")));
        }
        let p = tab[leave][enter].clone();
        for x in tab[leave].iter_mut() {
            *x = x.clone() / p.clone();
        }
        let pivot_row = tab[leave].clone();
        for (r, row) in tab.iter_mut().enumerate() {
            if r == leave || row[enter] == T::zero() {
                continue;
            }
            let f = row[enter].clone();
            for (x, y) in row.iter_mut().zip(&pivot_row) {
                *x = x.clone() - f.clone() * y.clone();
            }
        }
        let f = obj[enter].clone();
        for (x, y) in obj.iter_mut().zip(&pivot_row) {
            *x = x.clone() - f.clone() * y.clone();
        }
        basis[leave] = enter;
    }
    let z = T::zero() - obj[width - 1].clone();
    if !(z > eps) {
        return Err(Error::NonConvergence("matrix game LP has a degenerate optimum".into()));
    }
    let mut t = vec![T::zero(); m];
    for (r, &b) in basis.iter().enumerate() {
        if b < m {
            t[b] = tab[r][width - 1].clone();
        }
    }
    let row: Vec<T> = t.into_iter().map(|x| x / z.clone()).collect();
    let col: Vec<T> = (0..n).map(|j| (T::zero() - obj[m + j].clone()) / z.clone()).collect();
    Ok((T::one() / z, row, col, pivots))
}

fn normalize(mut d: Vec<f64>) -> Vec<f64> {
    for x in d.iter_mut() {
        if *x < 0.0 {
            *x = 0.0;
        }
    }
    let total: f64 = d.iter().sum();
    if total > 0.0 {
        for x in d.iter_mut() {
            *x /= total;
        }
    }
    d
}

/// `max_j (xA)_j - min_i (Ay)_i`.
pub fn duality_gap(a: &[Vec<f64>], row: &[f64], col: &[f64]) -> f64 {
    let n = a[0].len();
    let upper = (0..n)
        .map(|j| a.iter().zip(row).map(|(r, x)| x * r[j]).sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max);
    let lower = a
        .iter()
        .map(|r| r.iter().zip(col).map(|(v, y)| v * y).sum::<f64>())
        .fold(f64::INFINITY, f64::min);
    (upper - lower).max(0.0)
}

/// Row-major float game solve used by the Shapley operator. Returns
/// `(value, row strategy, col strategy)`.
pub fn solve_f64(a: &[Vec<f64>]) -> Result<(f64, Vec<f64>, Vec<f64>)> {
    let m = a.len();
    let n = a[0].len();
    if let Some((i, j)) = pure_saddle(a) {
        let mut row = vec![0.0; m];
        let mut col = vec![0.0; n];
        row[i] = 1.0;
        col[j] = 1.0;
        return Ok((a[i][j], row, col));
    }
    let lo = a.iter().flatten().copied().fold(f64::INFINITY, f64::min);
    let hi = a.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max);
    // rescale to [1, 2] so the pivot tolerance is relative
    let span = (hi - lo).max(f64::MIN_POSITIVE);
    let shifted: Vec<Vec<f64>> = a.iter().map(|r| r.iter().map(|x| 1.0 + (x - lo) / span).collect()).collect();
    let (v, row, col, _) = simplex_positive(&shifted)?;
    Ok(((v - 1.0) * span + lo, normalize(row), normalize(col)))
}

/// First pure saddle point in row-major order, if any: an entry that is
/// the largest in its row and the smallest in its column.
fn pure_saddle(a: &[Vec<f64>]) -> Option<(usize, usize)> {
    let n = a[0].len();
    let col_min: Vec<f64> = (0..n).map(|j| a.iter().map(|r| r[j]).fold(f64::INFINITY, f64::min)).collect();
    for (i, r) in a.iter().enumerate() {
        let row_max = r.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for (j, &x) in r.iter().enumerate() {
            if x == row_max && x == col_min[j] {
                return Some((i, j));
            }
        }
    }
    None
}

/// Solves `g`, exactly when both dimensions are at most [`EXACT_LIMIT`].
/// Fails if the certified duality gap exceeds `tol`.
pub fn matrix_value(g: &MatrixGame, tol: f64) -> Result<MatrixSolution> {
    if !(tol > 0.0) {
        return Err(Error::Parameter(format!("tolerance must be positive, got {tol}")));
    }
    let af = g.to_f64();
    let sol = if g.rows() <= EXACT_LIMIT && g.cols() <= EXACT_LIMIT {
        let lo = g.entries.iter().flatten().min().expect("nonempty").clone();
        let shift = Rational::one() - &lo;
        let shifted: Vec<Vec<Rational>> = g.entries.iter().map(|r| r.iter().map(|x| x + &shift).collect()).collect();
        let (v, row, col, pivots) = simplex_positive(&shifted)?;
        let value = v - shift;
        let row_f: Vec<f64> = row.iter().map(to_f64).collect();
        let col_f: Vec<f64> = col.iter().map(to_f64).collect();
        MatrixSolution {
            value: to_f64(&value),
            duality_gap: exact_gap(g, &row, &col),
            row_strategy: row_f,
            col_strategy: col_f,
            pivots,
            exact: Some(ExactSolution {
                value,
                row_strategy: row,
                col_strategy: col,
            }),
        }
    } else {
        let (value, row, col) = solve_f64(&af)?;
        MatrixSolution {
            value,
            duality_gap: duality_gap(&af, &row, &col),
            row_strategy: row,
            col_strategy: col,
            pivots: 0,
            exact: None,
        }
    };
    if sol.duality_gap > tol {
        return Err(Error::NonConvergence(format!(
            "matrix game duality gap {} exceeds tolerance {tol}",
            sol.duality_gap
        )));
    }
    Ok(sol)
}

fn exact_gap(g: &MatrixGame, row: &[Rational], col: &[Rational]) -> f64 {
    let upper = (0..g.cols())
        .map(|j| (0..g.rows()).map(|i| &row[i] * &g.entries[i][j]).sum::<Rational>())
        .max()
        .expect("nonempty");
    let lower = g
        .entries
        .iter()
        .map(|r| r.iter().zip(col).map(|(v, y)| v * y).sum::<Rational>())
        .min()
        .expect("nonempty");
    to_f64(&(upper - lower)).max(0.0)
}

/// Unique solution of the square system `m x = rhs`, or `None` if singular.
pub(crate) fn solve_linear(mut m: Vec<Vec<Rational>>, mut rhs: Vec<Rational>) -> Option<Vec<Rational>> {
    let n = m.len();
    for c in 0..n {
        let p = (c..n).find(|&r| !m[r][c].is_zero())?;
        m.swap(c, p);
        rhs.swap(c, p);
        let inv = Rational::one() / &m[c][c];
        for x in m[c].iter_mut() {
            *x *= &inv;
        }
        rhs[c] *= &inv;
        for r in 0..n {
            if r != c && !m[r][c].is_zero() {
                let f = m[r][c].clone();
                for k in 0..n {
                    let d = &f * &m[c][k];
                    m[r][k] -= d;
                }
                let d = &f * &rhs[c];
                rhs[r] -= d;
            }
        }
    }
    Some(rhs)
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    (0u32..1 << n)
        .filter(|m| m.count_ones() as usize == k)
        .map(|m| (0..n).filter(|i| m >> i & 1 == 1).collect())
        .collect()
}

/// Exact value by enumerating square support pairs. For every `k×k`
/// submatrix it solves the equalizing systems for both players and keeps
/// the first pair of nonnegative solutions that satisfies every saddle
/// inequality.
pub fn support_enumeration_value(g: &MatrixGame) -> Result<Rational> {
    let (m, n) = (g.rows(), g.cols());
    if m > ENUMERATION_LIMIT || n > ENUMERATION_LIMIT {
        return Err(Error::Parameter(format!(
            "support enumeration supports at most {ENUMERATION_LIMIT}x{ENUMERATION_LIMIT}, got {m}x{n}"
        )));
    }
    let a = &g.entries;
    for k in 1..=m.min(n) {
        for rows in subsets(m, k) {
            for cols in subsets(n, k) {
                // Max: y on cols with (Ay)_i = v for i in rows, Σy = 1.
                let mut sys = Vec::with_capacity(k + 1);
                for &i in &rows {
                    let mut r: Vec<Rational> = cols.iter().map(|&j| a[i][j].clone()).collect();
                    r.push(-Rational::one());
                    sys.push(r);
                }
                let mut last = vec![Rational::one(); k];
                last.push(Rational::zero());
                sys.push(last);
                let mut rhs = vec![Rational::zero(); k];
                rhs.push(Rational::one());
                let Some(ysol) = solve_linear(sys, rhs) else { continue };
                // Min: x on rows with (xA)_j = v for j in cols, Σx = 1.
                let mut sys = Vec::with_capacity(k + 1);
                for &j in &cols {
                    let mut r: Vec<Rational> = rows.iter().map(|&i| a[i][j].clone()).collect();
                    r.push(-Rational::one());
                    sys.push(r);
                }
                let mut last = vec![Rational::one(); k];
                last.push(Rational::zero());
                sys.push(last);
                let mut rhs = vec![Rational::zero(); k];
                rhs.push(Rational::one());
                let Some(xsol) = solve_linear(sys, rhs) else { continue };
                let v = ysol[k].clone();
                if xsol[k] != v || ysol[..k].iter().chain(&xsol[..k]).any(Signed::is_negative) {
                    continue;
                }
                let mut y = vec![Rational::zero(); n];
                for (t, &j) in cols.iter().enumerate() {
                    y[j] = ysol[t].clone();
                }
                let mut x = vec![Rational::zero(); m];
                for (t, &i) in rows.iter().enumerate() {
                    x[i] = xsol[t].clone();
                }
                let max_ok = (0..m).all(|i| (0..n).map(|j| &a[i][j] * &y[j]).sum::<Rational>() >= v);
                let min_ok = (0..n).all(|j| (0..m).map(|i| &x[i] * &a[i][j]).sum::<Rational>() <= v);
                if max_ok && min_ok {
                    return Ok(v);
                }
            }
        }
    }
    Err(Error::NonConvergence("no equalizing support pair found".into()))
}
