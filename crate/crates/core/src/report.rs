//! Solver output shared by every back-end.

use serde::Serialize;

use crate::arena::{Arena, StationaryStrategy};
use crate::rational::{format_rational, to_f64, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ValueIteration,
    Karp,
    ZwickPaterson,
    BlackwellApprox,
    CoBuchiThreshold,
    EndComponent,
}

impl Method {
    pub fn is_exact(self) -> bool {
        matches!(self, Method::Karp | Method::ZwickPaterson | Method::CoBuchiThreshold)
    }
}

/// Per-state values, exact when the back-end is.
#[derive(Debug, Clone, PartialEq)]
pub enum ValueVector {
    Exact(Vec<Rational>),
    Approx(Vec<f64>),
}

impl ValueVector {
    pub fn len(&self) -> usize {
        match self {
            ValueVector::Exact(v) => v.len(),
            ValueVector::Approx(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get_f64(&self, s: usize) -> f64 {
        match self {
            ValueVector::Exact(v) => to_f64(&v[s]),
            ValueVector::Approx(v) => v[s],
        }
    }

    pub fn to_f64(&self) -> Vec<f64> {
        (0..self.len()).map(|s| self.get_f64(s)).collect()
    }

    pub fn exact(&self) -> Option<&[Rational]> {
        match self {
            ValueVector::Exact(v) => Some(v),
            ValueVector::Approx(_) => None,
        }
    }

    pub fn scaled(&self, c: &Rational) -> ValueVector {
        match self {
            ValueVector::Exact(v) => ValueVector::Exact(v.iter().map(|x| x * c).collect()),
            ValueVector::Approx(v) => {
                let c = to_f64(c);
                ValueVector::Approx(v.iter().map(|x| x * c).collect())
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct ValueReport {
    pub method: Method,
    /// Accuracy the values are claimed to have; zero for exact methods.
    pub epsilon: f64,
    pub values: ValueVector,
    pub strategy_min: StationaryStrategy,
    pub strategy_max: StationaryStrategy,
    pub iterations: usize,
    /// Last sup-norm step of an iterative method, zero otherwise.
    pub residual: f64,
    /// False when the error bound is heuristic.
    pub certified: bool,
    /// Discount factor of the final discounted solve, for approximations.
    pub lambda: Option<Rational>,
    pub gamma: Option<Rational>,
}

impl ValueReport {
    /// Values multiplied by `c > 0`, with tolerances scaled alike.
    pub fn scaled(mut self, c: &Rational) -> ValueReport {
        let cf = to_f64(c);
        self.values = self.values.scaled(c);
        self.epsilon *= cf;
        self.residual *= cf;
        self
    }

    pub fn to_json(&self, arena: &Arena) -> serde_json::Value {
        let values: serde_json::Map<String, serde_json::Value> = (0..self.values.len())
            .map(|s| {
                let v = match &self.values {
                    ValueVector::Exact(v) => serde_json::Value::String(format_rational(&v[s])),
                    ValueVector::Approx(v) => serde_json::json!(v[s]),
                };
                (arena.state_name(s).to_string(), v)
            })
            .collect();
        serde_json::json!({
            "method": self.method,
            "epsilon": self.epsilon,
            "values": values,
            "strategy_min": self.strategy_min.to_json(arena),
            "strategy_max": self.strategy_max.to_json(arena),
            "iterations": self.iterations,
            "residual": self.residual,
            "certified": self.certified,
            "lambda": self.lambda.as_ref().map(format_rational),
            "gamma": self.gamma.as_ref().map(format_rational),
        })
    }
}
