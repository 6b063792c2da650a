//! Two-phase primal simplex on a dense tableau over exact rationals, with
//! Bland's rule. Returns an optimal primal point together with constraint
//! duals, and [`certify`] checks the pair independently.

use num_traits::{One, Signed, Zero};

use super::model::{Bound, Cmp, LpModel, Sense};
use crate::error::{Error, Result};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub value: Rational,
    /// One entry per model variable.
    pub x: Vec<Rational>,
    /// One entry per constraint, signed so that `value = Σ duals · rhs` and
    /// the reduced costs `c - Aᵀ·duals` have the sign optimality requires.
    pub duals: Vec<Rational>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ColKind {
    Structural,
    Slack,
    Artificial,
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    basis: Vec<usize>,
    kinds: Vec<ColKind>,
    /// Reduced costs of the current phase.
    obj: Vec<Rational>,
    value: Rational,
}

enum Outcome {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn pivot(&mut self, r: usize, e: usize) {
        let p = self.rows[r][e].clone();
        if !p.is_one() {
            for v in self.rows[r].iter_mut().filter(|v| !v.is_zero()) {
                *v /= &p;
            }
            self.rhs[r] /= &p;
        }
        let support: Vec<usize> = (0..self.rows[r].len())
            .filter(|&c| !self.rows[r][c].is_zero())
            .collect();
        let (pivot_row, pivot_rhs) = (self.rows[r].clone(), self.rhs[r].clone());
        for k in 0..self.rows.len() {
            if k == r || self.rows[k][e].is_zero() {
                continue;
            }
            let a = self.rows[k][e].clone();
            for &c in &support {
                let d = &a * &pivot_row[c];
                self.rows[k][c] -= d;
            }
            self.rhs[k] -= &a * &pivot_rhs;
        }
        let d = self.obj[e].clone();
        if !d.is_zero() {
            for &c in &support {
                let t = &d * &pivot_row[c];
                self.obj[c] -= t;
            }
            self.value += &d * &pivot_rhs;
        }
        self.basis[r] = e;
    }

    /// Bland's rule: lowest-index improving column, ratio ties broken by
    /// lowest basic index.
    fn run(&mut self, allow_artificial: bool) -> Outcome {
        loop {
            let entering = (0..self.obj.len()).find(|&c| {
                self.obj[c].is_negative()
                    && (allow_artificial || self.kinds[c] != ColKind::Artificial)
            });
            let Some(e) = entering else {
                return Outcome::Optimal;
            };
            let mut leave: Option<(usize, Rational)> = None;
            for r in 0..self.rows.len() {
                let a = &self.rows[r][e];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.rhs[r] / a;
                let better = match &leave {
                    None => true,
                    Some((lr, lratio)) => {
                        ratio < *lratio || (ratio == *lratio && self.basis[r] < self.basis[*lr])
                    }
                };
                if better {
                    leave = Some((r, ratio));
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, e),
                None => return Outcome::Unbounded,
            }
        }
    }

    fn set_costs(&mut self, costs: &[Rational]) {
        self.obj = costs.to_vec();
        self.value = Rational::zero();
        for r in 0..self.rows.len() {
            let cb = &costs[self.basis[r]];
            if cb.is_zero() {
                continue;
            }
            for (c, v) in self.rows[r].iter().enumerate() {
                if !v.is_zero() {
                    self.obj[c] -= cb * v;
                }
            }
            self.value += cb * &self.rhs[r];
        }
    }
}

struct Standard {
    tableau: Tableau,
    /// Column(s) of each model variable: `(plus, minus)` for free variables.
    columns: Vec<(usize, Option<usize>)>,
    /// Identity column of each row in the starting basis.
    identity: Vec<usize>,
    flipped: Vec<bool>,
    costs: Vec<Rational>,
}

fn standardize(model: &LpModel) -> Standard {
    let mut kinds = Vec::new();
    let mut columns = Vec::with_capacity(model.vars.len());
    for v in &model.vars {
        let plus = kinds.len();
        kinds.push(ColKind::Structural);
        let minus = (v.bound == Bound::Free).then(|| {
            kinds.push(ColKind::Structural);
            kinds.len() - 1
        });
        columns.push((plus, minus));
    }
    let m = model.constraints.len();
    let mut flipped = Vec::with_capacity(m);
    let mut cmps = Vec::with_capacity(m);
    for c in &model.constraints {
        let flip = c.rhs.is_negative();
        flipped.push(flip);
        cmps.push(match (c.cmp, flip) {
            (Cmp::Le, true) => Cmp::Ge,
            (Cmp::Ge, true) => Cmp::Le,
            (cmp, _) => cmp,
        });
    }
    let mut slack_of = vec![None; m];
    for (r, cmp) in cmps.iter().enumerate() {
        if *cmp != Cmp::Eq {
            slack_of[r] = Some(kinds.len());
            kinds.push(ColKind::Slack);
        }
    }
    let mut identity = vec![0; m];
    for (r, cmp) in cmps.iter().enumerate() {
        identity[r] = match cmp {
            Cmp::Le => slack_of[r].expect("slack"),
            _ => {
                kinds.push(ColKind::Artificial);
                kinds.len() - 1
            }
        };
    }
    let ncols = kinds.len();
    let mut rows = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    for (r, c) in model.constraints.iter().enumerate() {
        let sign = if flipped[r] { -Rational::one() } else { Rational::one() };
        let mut row = vec![Rational::zero(); ncols];
        for (k, coef) in &c.terms {
            let (plus, minus) = columns[*k];
            let v = coef * &sign;
            if let Some(mc) = minus {
                row[mc] -= &v;
            }
            row[plus] += v;
        }
        match cmps[r] {
            Cmp::Le => row[slack_of[r].expect("slack")] = Rational::one(),
            Cmp::Ge => {
                row[slack_of[r].expect("surplus")] = -Rational::one();
                row[identity[r]] = Rational::one();
            }
            Cmp::Eq => row[identity[r]] = Rational::one(),
        }
        rows.push(row);
        rhs.push(&c.rhs * &sign);
    }
    let mut costs = vec![Rational::zero(); ncols];
    for (k, c) in &model.objective {
        let c = match model.sense {
            Sense::Min => c.clone(),
            Sense::Max => -c,
        };
        let (plus, minus) = columns[*k];
        if let Some(mc) = minus {
            costs[mc] -= &c;
        }
        costs[plus] += c;
    }
    Standard {
        tableau: Tableau {
            rows,
            rhs,
            basis: identity.clone(),
            kinds,
            obj: Vec::new(),
            value: Rational::zero(),
        },
        columns,
        identity,
        flipped,
        costs,
    }
}

/// Phase I. Leaves the tableau at a basic feasible point with artificials
/// driven out where possible; `false` when the model is infeasible.
fn phase_one(std: &mut Standard) -> bool {
    let t = &mut std.tableau;
    let phase1: Vec<Rational> = t
        .kinds
        .iter()
        .map(|k| match k {
            ColKind::Artificial => Rational::one(),
            _ => Rational::zero(),
        })
        .collect();
    t.set_costs(&phase1);
    if let Outcome::Unbounded = t.run(true) {
        unreachable!("phase one objective is bounded below by zero");
    }
    if t.value.is_positive() {
        return false;
    }
    for r in 0..t.rows.len() {
        if t.kinds[t.basis[r]] != ColKind::Artificial {
            continue;
        }
        if let Some(c) = (0..t.kinds.len())
            .find(|&c| t.kinds[c] != ColKind::Artificial && !t.rows[r][c].is_zero())
        {
            t.pivot(r, c);
        }
    }
    true
}

/// `true` iff the constraint system of `model` has a solution.
pub fn is_feasible(model: &LpModel) -> bool {
    phase_one(&mut standardize(model))
}

pub fn solve(model: &LpModel) -> Result<LpSolution> {
    let mut std = standardize(model);
    if !phase_one(&mut std) {
        return Err(Error::Infeasible);
    }
    let t = &mut std.tableau;
    t.set_costs(&std.costs);
    if let Outcome::Unbounded = t.run(false) {
        return Err(Error::Unbounded);
    }
    let mut col_value = vec![Rational::zero(); t.kinds.len()];
    for (r, &b) in t.basis.iter().enumerate() {
        col_value[b] = t.rhs[r].clone();
    }
    let x: Vec<Rational> = std
        .columns
        .iter()
        .map(|&(plus, minus)| match minus {
            Some(mc) => &col_value[plus] - &col_value[mc],
            None => col_value[plus].clone(),
        })
        .collect();
    let duals = std
        .identity
        .iter()
        .zip(&std.flipped)
        .map(|(&c, &flip)| {
            let y = -t.obj[c].clone();
            let y = if flip { -y } else { y };
            match model.sense {
                Sense::Min => y,
                Sense::Max => -y,
            }
        })
        .collect();
    let value = model.objective_value(&x);
    Ok(LpSolution { value, x, duals })
}

/// Checks that `sol` is primal feasible, its duals are dual feasible, and
/// both objectives agree, which together prove optimality.
pub fn certify(model: &LpModel, sol: &LpSolution) -> std::result::Result<(), String> {
    if sol.x.len() != model.vars.len() || sol.duals.len() != model.constraints.len() {
        return Err("dimension mismatch".into());
    }
    if let Some(v) = model.violation(&sol.x) {
        return Err(format!("primal: {v}"));
    }
    if model.objective_value(&sol.x) != sol.value {
        return Err("reported value differs from objective".into());
    }
    // sign of a dual for a `<=` row: nonpositive when minimizing
    let le_sign_ok = |y: &Rational| match model.sense {
        Sense::Min => !y.is_positive(),
        Sense::Max => !y.is_negative(),
    };
    for (c, y) in model.constraints.iter().zip(&sol.duals) {
        let ok = match c.cmp {
            Cmp::Le => le_sign_ok(y),
            Cmp::Ge => le_sign_ok(&-y),
            Cmp::Eq => true,
        };
        if !ok {
            return Err(format!("dual sign on {}", c.label));
        }
    }
    let mut reduced = vec![Rational::zero(); model.vars.len()];
    for (k, c) in &model.objective {
        reduced[*k] += c;
    }
    for (c, y) in model.constraints.iter().zip(&sol.duals) {
        if y.is_zero() {
            continue;
        }
        for (k, a) in &c.terms {
            reduced[*k] -= a * y;
        }
    }
    for (v, d) in model.vars.iter().zip(&reduced) {
        let ok = match (v.bound, model.sense) {
            (Bound::Free, _) => d.is_zero(),
            (Bound::NonNeg, Sense::Min) => !d.is_negative(),
            (Bound::NonNeg, Sense::Max) => !d.is_positive(),
        };
        if !ok {
            return Err(format!("reduced cost of {}", v.key));
        }
    }
    let dual_value: Rational = model
        .constraints
        .iter()
        .zip(&sol.duals)
        .map(|(c, y)| &c.rhs * y)
        .sum();
    if dual_value != sol.value {
        return Err("duality gap".into());
    }
    Ok(())
}
