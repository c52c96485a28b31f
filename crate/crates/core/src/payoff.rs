//! Exact payoff functionals on ultimately periodic weight sequences.
//!
//! A sequence `u·v^ω` is stored as a finite prefix and a nonempty cycle.
//! Every functional here is prefix-independent except the discounted ones,
//! and all of them are invariant under unrolling the cycle.

use std::collections::HashMap;
use std::fmt;

use num::{One, Zero};

use crate::error::{Error, Result};
use crate::rational::{check_discount, format_rational, parse_rational, pow, Rational};

/// Window lengths beyond this are answered with the lower past-discounted
/// payoff, which they approach geometrically.
pub const WINDOW_EXACT_LIMIT: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct UpSeq {
    prefix: Vec<Rational>,
    cycle: Vec<Rational>,
}

impl UpSeq {
    pub fn new(prefix: Vec<Rational>, cycle: Vec<Rational>) -> Result<UpSeq> {
        if cycle.is_empty() {
            return Err(Error::Parameter("the periodic part of a sequence must be nonempty".into()));
        }
        Ok(UpSeq { prefix, cycle })
    }

    pub fn periodic(cycle: Vec<Rational>) -> Result<UpSeq> {
        UpSeq::new(Vec::new(), cycle)
    }

    pub fn from_ints(prefix: &[i64], cycle: &[i64]) -> Result<UpSeq> {
        let conv = |xs: &[i64]| xs.iter().map(|&x| Rational::from_integer(x.into())).collect();
        UpSeq::new(conv(prefix), conv(cycle))
    }

    /// Parses `"u1,u2;v1,v2,v3"`. Without a `;` the whole list is the cycle.
    pub fn parse(text: &str) -> Result<UpSeq> {
        let list = |part: &str| -> Result<Vec<Rational>> {
            part.split(',')
                .map(str::trim)
                .filter(|x| !x.is_empty())
                .map(parse_rational)
                .collect()
        };
        match text.split_once(';') {
            Some((u, v)) => UpSeq::new(list(u)?, list(v)?),
            None => UpSeq::periodic(list(text)?),
        }
    }

    pub fn prefix(&self) -> &[Rational] {
        &self.prefix
    }

    pub fn cycle(&self) -> &[Rational] {
        &self.cycle
    }

    pub fn get(&self, n: usize) -> &Rational {
        if n < self.prefix.len() {
            &self.prefix[n]
        } else {
            &self.cycle[(n - self.prefix.len()) % self.cycle.len()]
        }
    }

    /// The first `n` elements.
    pub fn take(&self, n: usize) -> Vec<Rational> {
        (0..n).map(|i| self.get(i).clone()).collect()
    }

    /// Same sequence with the cycle written `times` times.
    pub fn unrolled(&self, times: usize) -> UpSeq {
        UpSeq {
            prefix: self.prefix.clone(),
            cycle: self.cycle.iter().cloned().cycle().take(self.cycle.len() * times.max(1)).collect(),
        }
    }

    pub fn without_prefix(&self) -> UpSeq {
        UpSeq {
            prefix: Vec::new(),
            cycle: self.cycle.clone(),
        }
    }

    /// Shortest prefix and shortest period describing the same sequence.
    pub fn canonical(&self) -> UpSeq {
        let mut prefix = self.prefix.clone();
        let mut cycle = self.cycle.clone();
        while let Some(last) = prefix.last() {
            if last != cycle.last().unwrap() {
                break;
            }
            prefix.pop();
            cycle.rotate_right(1);
        }
        let p = cycle.len();
        let period = (1..=p)
            .find(|&d| p % d == 0 && (d..p).all(|i| cycle[i] == cycle[i - d]))
            .unwrap_or(p);
        cycle.truncate(period);
        UpSeq { prefix, cycle }
    }

    pub fn same_sequence(&self, other: &UpSeq) -> bool {
        self.canonical() == other.canonical()
    }

    pub fn max_abs(&self) -> Rational {
        use num::Signed;
        self.prefix
            .iter()
            .chain(&self.cycle)
            .map(|x| x.abs())
            .max()
            .unwrap_or_else(Rational::zero)
    }
}

impl fmt::Display for UpSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |xs: &[Rational]| xs.iter().map(format_rational).collect::<Vec<_>>().join(",");
        write!(f, "{};{}", join(&self.prefix), join(&self.cycle))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    Lower,
    Upper,
}

/// The payoff functionals with their parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum PayoffKind {
    Limit,
    Mean,
    Discounted { lambda: Rational },
    PastLower { gamma: Rational },
    PastUpper { gamma: Rational },
    Window { gamma: Rational, ell: u64 },
    DiscountedPast { lambda: Rational, gamma: Rational },
    MeanPast { gamma: Rational },
}

impl PayoffKind {
    pub fn validate(&self) -> Result<()> {
        match self {
            PayoffKind::Limit | PayoffKind::Mean => Ok(()),
            PayoffKind::Discounted { lambda } => check_discount("lambda", lambda),
            PayoffKind::PastLower { gamma }
            | PayoffKind::PastUpper { gamma }
            | PayoffKind::Window { gamma, .. }
            | PayoffKind::MeanPast { gamma } => check_discount("gamma", gamma),
            PayoffKind::DiscountedPast { lambda, gamma } => {
                check_discount("lambda", lambda)?;
                check_discount("gamma", gamma)
            }
        }
    }

    pub fn evaluate(&self, seq: &UpSeq) -> Result<Rational> {
        match self {
            PayoffKind::Limit => Ok(payoff_l(seq)),
            PayoffKind::Mean => Ok(payoff_m(seq)),
            PayoffKind::Discounted { lambda } => payoff_d(seq, lambda),
            PayoffKind::PastLower { gamma } => payoff_p(seq, gamma, Bound::Lower),
            PayoffKind::PastUpper { gamma } => payoff_p(seq, gamma, Bound::Upper),
            PayoffKind::Window { gamma, ell } => payoff_wp(seq, gamma, *ell),
            PayoffKind::DiscountedPast { lambda, gamma } => payoff_dp(seq, lambda, gamma),
            PayoffKind::MeanPast { gamma } => payoff_mp(seq, gamma),
        }
    }
}

/// `Σ_{k=0}^{n} γ^{n-k} w_k` by Horner's rule.
pub fn finite_past_discounted(w: &[Rational], gamma: &Rational) -> Result<Rational> {
    check_discount("gamma", gamma)?;
    if w.is_empty() {
        return Err(Error::Parameter("finite past-discounted sum of an empty list".into()));
    }
    Ok(horner(w, gamma))
}

fn horner(w: &[Rational], gamma: &Rational) -> Rational {
    w.iter().fold(Rational::zero(), |acc, x| acc * gamma + x)
}

/// Every prefix sum `P^0 .. P^{n-1}` of the first `n` elements.
pub fn past_discounted_prefixes(seq: &UpSeq, gamma: &Rational, n: usize) -> Vec<Rational> {
    let mut acc = Rational::zero();
    (0..n)
        .map(|k| {
            acc = &acc * gamma + seq.get(k);
            acc.clone()
        })
        .collect()
}

/// `R_r = Σ_{i<p} γ^i v[(r-i) mod p]` for every rotation `r`, via
/// `R_{r+1} = γ R_r + (1 - γ^p) v[r+1]`.
fn rotation_sums(cycle: &[Rational], gamma: &Rational) -> Vec<Rational> {
    let p = cycle.len();
    let gp = pow(gamma, p);
    let one_minus = Rational::one() - &gp;
    let mut sums = Vec::with_capacity(p);
    let mut r0 = Rational::zero();
    for i in 0..p {
        r0 += pow(gamma, i) * &cycle[(p - i) % p];
    }
    sums.push(r0);
    for r in 1..p {
        let next = gamma * &sums[r - 1] + &one_minus * &cycle[r];
        sums.push(next);
    }
    sums
}

/// Limit of `P^n` along the positions `n` that land on `cycle[r]`, for
/// each `r`. These are the accumulation points of the sequence `P^n`.
pub fn rotation_limits(seq: &UpSeq, gamma: &Rational) -> Result<Vec<Rational>> {
    check_discount("gamma", gamma)?;
    let denom = Rational::one() - pow(gamma, seq.cycle.len());
    Ok(rotation_sums(&seq.cycle, gamma).into_iter().map(|r| r / &denom).collect())
}

/// Lower (liminf) or upper (limsup) past-discounted payoff.
pub fn payoff_p(seq: &UpSeq, gamma: &Rational, bound: Bound) -> Result<Rational> {
    let limits = rotation_limits(seq, gamma)?;
    let pick = match bound {
        Bound::Lower => limits.into_iter().min(),
        Bound::Upper => limits.into_iter().max(),
    };
    Ok(pick.expect("cycle is nonempty"))
}

pub fn payoff_d(seq: &UpSeq, lambda: &Rational) -> Result<Rational> {
    check_discount("lambda", lambda)?;
    let mut head = Rational::zero();
    let mut scale = Rational::one();
    for u in &seq.prefix {
        head += &scale * u;
        scale *= lambda;
    }
    let mut tail = Rational::zero();
    let mut lk = Rational::one();
    for v in &seq.cycle {
        tail += &lk * v;
        lk *= lambda;
    }
    // lk is now λ^{|v|}
    Ok(head + scale * tail / (Rational::one() - lk))
}

pub fn payoff_m(seq: &UpSeq) -> Rational {
    let total: Rational = seq.cycle.iter().sum();
    total / Rational::from_integer((seq.cycle.len() as i64).into())
}

pub fn payoff_l(seq: &UpSeq) -> Rational {
    seq.cycle.iter().min().cloned().expect("cycle is nonempty")
}

/// Liminf of the length-`ell+1` past-discounted window sums. Windows that
/// straddle the prefix occur finitely often and are ignored.
pub fn payoff_wp(seq: &UpSeq, gamma: &Rational, ell: u64) -> Result<Rational> {
    check_discount("gamma", gamma)?;
    if ell + 1 > WINDOW_EXACT_LIMIT {
        return payoff_p(seq, gamma, Bound::Lower);
    }
    let p = seq.cycle.len();
    let len = (ell + 1) as usize;
    let (q, rem) = (len / p, len % p);
    let sums = rotation_sums(&seq.cycle, gamma);
    let gp = pow(gamma, p);
    let gqp = pow(&gp, q);
    let full = (Rational::one() - &gqp) / (Rational::one() - &gp);
    let best = (0..p)
        .map(|r| {
            let mut partial = Rational::zero();
            let mut gi = Rational::one();
            for i in 0..rem {
                partial += &gi * &seq.cycle[(r + p * (i / p + 1) - i) % p];
                gi *= gamma;
            }
            &sums[r] * &full + &gqp * partial
        })
        .min()
        .expect("cycle is nonempty");
    Ok(best)
}

/// Discounted sum of the past-discounted sequence, `D_λ(seq) / (1 - γλ)`.
pub fn payoff_dp(seq: &UpSeq, lambda: &Rational, gamma: &Rational) -> Result<Rational> {
    check_discount("gamma", gamma)?;
    let d = payoff_d(seq, lambda)?;
    Ok(d / (Rational::one() - gamma * lambda))
}

/// Cesàro mean of the past-discounted sequence, `M(seq) / (1 - γ)`.
pub fn payoff_mp(seq: &UpSeq, gamma: &Rational) -> Result<Rational> {
    check_discount("gamma", gamma)?;
    Ok(payoff_m(seq) / (Rational::one() - gamma))
}

/// Interleaves two sequences block by block. Each schedule entry
/// `(from_x, from_y)` takes `from_x` elements of `x`, then `from_y`
/// elements of `y`; the schedule repeats forever. Relative order within
/// each input is preserved.
pub fn shuffle(x: &UpSeq, y: &UpSeq, schedule: &[(usize, usize)]) -> Result<UpSeq> {
    if schedule.is_empty() {
        return Err(Error::Parameter("shuffle schedule is empty".into()));
    }
    if let Some(i) = schedule.iter().position(|&(a, b)| a + b == 0) {
        return Err(Error::Parameter(format!("shuffle schedule entry {i} is an empty block")));
    }
    let norm = |s: &UpSeq, pos: usize| {
        if pos < s.prefix.len() {
            pos
        } else {
            s.prefix.len() + (pos - s.prefix.len()) % s.cycle.len()
        }
    };
    let mut out = Vec::new();
    let mut seen: HashMap<(usize, usize), usize> = HashMap::new();
    let (mut xp, mut yp) = (0usize, 0usize);
    loop {
        let key = (norm(x, xp), norm(y, yp));
        if let Some(&start) = seen.get(&key) {
            let cycle = out.split_off(start);
            return UpSeq::new(out, cycle);
        }
        seen.insert(key, out.len());
        for &(from_x, from_y) in schedule {
            for _ in 0..from_x {
                out.push(x.get(xp).clone());
                xp += 1;
            }
            for _ in 0..from_y {
                out.push(y.get(yp).clone());
                yp += 1;
            }
        }
        xp = norm(x, xp);
        yp = norm(y, yp);
    }
}
