//! Generic sparse linear program with exact coefficients.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{Signed, Zero};

use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Min,
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmp {
    Le,
    Eq,
    Ge,
}

impl Cmp {
    pub fn symbol(self) -> &'static str {
        match self {
            Cmp::Le => "<=",
            Cmp::Eq => "=",
            Cmp::Ge => ">=",
        }
    }

    pub fn holds(self, lhs: &Rational, rhs: &Rational) -> bool {
        match self {
            Cmp::Le => lhs <= rhs,
            Cmp::Eq => lhs == rhs,
            Cmp::Ge => lhs >= rhs,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    NonNeg,
    Free,
}

/// Structured meaning of a variable, recovered from its name. Machine and job
/// numbers in names are 1-based; time slots are 0-based.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum VarKey {
    /// `y_i_j_s`: fraction of slot `s` machine `i` spends on job `j`.
    Y { i: usize, j: usize, s: u64 },
    Alpha(usize),
    Beta { i: usize, s: u64 },
    Other(String),
}

impl VarKey {
    pub fn parse(name: &str) -> VarKey {
        let parts: Vec<&str> = name.split('_').collect();
        let idx = |p: &str| p.parse::<usize>().ok().filter(|&v| v >= 1).map(|v| v - 1);
        let slot = |p: &str| p.parse::<u64>().ok();
        let canonical = |key: VarKey| (key.to_string() == name).then_some(key);
        let key = match parts.as_slice() {
            ["y", i, j, s] => idx(i)
                .zip(idx(j))
                .zip(slot(s))
                .map(|((i, j), s)| VarKey::Y { i, j, s }),
            ["alpha", j] => idx(j).map(VarKey::Alpha),
            ["beta", i, s] => idx(i).zip(slot(s)).map(|(i, s)| VarKey::Beta { i, s }),
            _ => None,
        };
        key.and_then(canonical)
            .unwrap_or_else(|| VarKey::Other(name.to_string()))
    }
}

impl fmt::Display for VarKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VarKey::Y { i, j, s } => write!(f, "y_{}_{}_{}", i + 1, j + 1, s),
            VarKey::Alpha(j) => write!(f, "alpha_{}", j + 1),
            VarKey::Beta { i, s } => write!(f, "beta_{}_{}", i + 1, s),
            VarKey::Other(name) => f.write_str(name),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variable {
    pub key: VarKey,
    pub bound: Bound,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub label: String,
    pub terms: Vec<(usize, Rational)>,
    pub cmp: Cmp,
    pub rhs: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpModel {
    pub horizon: u64,
    pub sense: Sense,
    pub vars: Vec<Variable>,
    pub objective: Vec<(usize, Rational)>,
    pub constraints: Vec<Constraint>,
}

impl LpModel {
    pub fn new(sense: Sense, horizon: u64) -> Self {
        LpModel {
            horizon,
            sense,
            vars: Vec::new(),
            objective: Vec::new(),
            constraints: Vec::new(),
        }
    }

    pub fn add_var(&mut self, key: VarKey, bound: Bound) -> usize {
        self.vars.push(Variable { key, bound });
        self.vars.len() - 1
    }

    pub fn add_constraint(
        &mut self,
        label: impl Into<String>,
        terms: Vec<(usize, Rational)>,
        cmp: Cmp,
        rhs: Rational,
    ) {
        self.constraints.push(Constraint {
            label: label.into(),
            terms,
            cmp,
            rhs,
        });
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty() && self.constraints.is_empty() && self.objective.is_empty()
    }

    /// Index of each variable by key.
    pub fn index(&self) -> BTreeMap<&VarKey, usize> {
        self.vars.iter().enumerate().map(|(k, v)| (&v.key, k)).collect()
    }

    /// Dense point from sparse values; unspecified variables are zero.
    pub fn point<'a>(&self, values: impl IntoIterator<Item = (&'a VarKey, &'a Rational)>) -> Vec<Rational> {
        let index = self.index();
        let mut x = vec![Rational::zero(); self.vars.len()];
        for (key, v) in values {
            if let Some(&k) = index.get(key) {
                x[k] = v.clone();
            }
        }
        x
    }

    pub fn objective_value(&self, x: &[Rational]) -> Rational {
        dot(&self.objective, x)
    }

    /// First violated bound or constraint, if any.
    pub fn violation(&self, x: &[Rational]) -> Option<String> {
        for (v, xv) in self.vars.iter().zip(x) {
            if v.bound == Bound::NonNeg && xv.is_negative() {
                return Some(format!("{} < 0", v.key));
            }
        }
        self.constraints.iter().find_map(|c| {
            let lhs = dot(&c.terms, x);
            (!c.cmp.holds(&lhs, &c.rhs)).then(|| format!("{} violated", c.label))
        })
    }

    pub fn is_feasible(&self, x: &[Rational]) -> bool {
        self.violation(x).is_none()
    }
}

pub(crate) fn dot(terms: &[(usize, Rational)], x: &[Rational]) -> Rational {
    terms.iter().map(|(k, c)| c * &x[*k]).sum()
}
