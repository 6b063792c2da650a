//! Time-indexed relaxations over slots `s = 0, 1, …, T-1`.
//!
//! `y_ijs` is the fraction of slot `[s, s+1)` machine `i` spends on job `j`.
//! The stochastic objective charges each unit of `y` with
//! `(s + 1/2)/E[P_ij] + (1 - CV²[P_ij])/2`; the deterministic one with
//! `(s + 1/2)/E[P_ij] + 1/2`. Online variants drop every `y_ijs` with
//! `s < r_j`.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use super::model::{Bound, Cmp, LpModel, Sense, VarKey};
use super::solver;
use crate::error::{Error, Result};
use crate::model::Instance;
use crate::rational::{half, uint, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Primal {
    S,
    P,
    SOnline,
    POnline,
}

impl Primal {
    pub fn is_stochastic(self) -> bool {
        matches!(self, Primal::S | Primal::SOnline)
    }

    pub fn is_online(self) -> bool {
        matches!(self, Primal::SOnline | Primal::POnline)
    }

    pub fn name(self) -> &'static str {
        match self {
            Primal::S => "S",
            Primal::P => "P",
            Primal::SOnline => "S_o",
            Primal::POnline => "P_o",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DualVariant {
    D,
    DOnline,
}

impl DualVariant {
    pub fn is_online(self) -> bool {
        self == DualVariant::DOnline
    }

    pub fn name(self) -> &'static str {
        match self {
            DualVariant::D => "D",
            DualVariant::DOnline => "D_o",
        }
    }

    /// The primal program this one is the dual of.
    pub fn primal(self) -> Primal {
        match self {
            DualVariant::D => Primal::P,
            DualVariant::DOnline => Primal::POnline,
        }
    }
}

/// Sparse `y_ijs`, keyed by `(machine, job, slot)`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct YSolution {
    pub y: BTreeMap<(usize, usize, u64), Rational>,
}

impl YSolution {
    pub fn get(&self, i: usize, j: usize, s: u64) -> Rational {
        self.y.get(&(i, j, s)).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn add(&mut self, i: usize, j: usize, s: u64, v: Rational) {
        if v.is_zero() {
            return;
        }
        *self.y.entry((i, j, s)).or_insert_with(Rational::zero) += v;
    }

    /// Reads the `y` variables of a primal model point.
    pub fn from_point(model: &LpModel, x: &[Rational]) -> YSolution {
        let mut out = YSolution::default();
        for (v, val) in model.vars.iter().zip(x) {
            if let VarKey::Y { i, j, s } = v.key {
                out.add(i, j, s, val.clone());
            }
        }
        out
    }

    /// Dense point for `model`. Entries without a matching variable are
    /// reported as `Err` with their key.
    pub fn to_point(&self, model: &LpModel) -> std::result::Result<Vec<Rational>, VarKey> {
        let index = model.index();
        let mut x = vec![Rational::zero(); model.vars.len()];
        for (&(i, j, s), v) in &self.y {
            let key = VarKey::Y { i, j, s };
            match index.get(&key) {
                Some(&k) => x[k] = v.clone(),
                None => return Err(key),
            }
        }
        Ok(x)
    }

    pub fn last_slot(&self) -> Option<u64> {
        self.y.keys().map(|k| k.2).max()
    }
}

/// Start-time probabilities `x_ijt` of a policy, keyed by `(machine, job, t)`.
pub type StartDistribution = BTreeMap<(usize, usize, u64), Rational>;

/// `y_ijs = Σ_{t ≤ s} x_ijt · Pr(P_ij > s - t)`.
pub fn y_from_x(inst: &Instance, x: &StartDistribution) -> Result<YSolution> {
    let mut sums = vec![Rational::zero(); inst.len()];
    let mut y = YSolution::default();
    for (&(i, j, t), p) in x {
        if j >= inst.len() || i >= inst.machines() {
            return Err(Error::InvalidJob {
                job: j,
                reason: "start probability outside the instance".into(),
            });
        }
        let dist = inst.dist(i, j).ok_or(Error::ForbiddenPair { job: j, machine: i })?;
        sums[j] += p;
        for u in 0..dist.max_value() {
            y.add(i, j, t + u, p * dist.tail(u));
        }
    }
    for (j, sum) in sums.into_iter().enumerate() {
        if !sum.is_one() {
            return Err(Error::NotAPolicyDistribution { job: j, sum: crate::rational::fmt(&sum) });
        }
    }
    Ok(y)
}

/// Per-slot constants of one permitted pair.
struct PairCoef {
    inv_mean: Rational,
    /// `(1 - CV²)/2` or `1/2`.
    offset: Rational,
}

impl PairCoef {
    fn new(inst: &Instance, i: usize, j: usize, stochastic: bool) -> Option<PairCoef> {
        let d = inst.dist(i, j)?;
        let inv_mean = d.mean().recip();
        let offset = if stochastic {
            (Rational::one() - d.scv().expect("positive mean")) * half()
        } else {
            half()
        };
        Some(PairCoef { inv_mean, offset })
    }

    /// Completion-time charge of one unit of `y` in slot `s`.
    fn at(&self, s: u64) -> Rational {
        (uint(s) + half()) * &self.inv_mean + &self.offset
    }
}

/// LP completion time of every job from `y`.
pub fn completion_from_y(inst: &Instance, y: &YSolution, variant: Primal) -> Vec<Rational> {
    let mut out = vec![Rational::zero(); inst.len()];
    for (&(i, j, s), v) in &y.y {
        let coef = PairCoef::new(inst, i, j, variant.is_stochastic()).expect("y on permitted pair");
        out[j] += coef.at(s) * v;
    }
    out
}

/// `Σ_j w_j Σ_{i,s} y_ijs`.
pub fn weighted_mass(inst: &Instance, y: &YSolution) -> Rational {
    y.y.iter().map(|(&(_, j, _), v)| inst.weight(j) * v).sum()
}

/// Horizon under which a serial schedule always fits: the largest release
/// plus every job's longest possible duration (support maximum for the
/// stochastic programs, rounded-up mean for the deterministic ones).
pub fn default_horizon(inst: &Instance, variant: Primal) -> u64 {
    let per_job = |j: usize| -> u64 {
        (0..inst.machines())
            .filter_map(|i| inst.dist(i, j))
            .map(|d| {
                if variant.is_stochastic() {
                    d.max_value()
                } else {
                    d.mean().ceil().to_integer().try_into().expect("mean fits in u64")
                }
            })
            .max()
            .unwrap_or(0)
    };
    inst.max_release() + (0..inst.len()).map(per_job).sum::<u64>()
}

fn first_slot(inst: &Instance, j: usize, variant: Primal) -> u64 {
    if variant.is_online() {
        inst.release(j)
    } else {
        0
    }
}

/// A feasible `y` built from a serial schedule: each job on the machine
/// where it is shortest, one after another. For the stochastic programs jobs
/// start at integer times and are given their whole support; for the
/// deterministic ones mean-length blocks are packed back to back.
pub fn serial_witness(inst: &Instance, variant: Primal) -> YSolution {
    let mut cursor = vec![Rational::zero(); inst.machines()];
    let mut y = YSolution::default();
    let mut x = StartDistribution::new();
    for j in 0..inst.len() {
        let length = |i: usize| -> Option<Rational> {
            let d = inst.dist(i, j)?;
            Some(if variant.is_stochastic() { uint(d.max_value()) } else { d.mean().clone() })
        };
        let (i, len) = (0..inst.machines())
            .filter_map(|i| length(i).map(|l| (i, l)))
            .min_by(|a, b| a.1.cmp(&b.1).then(a.0.cmp(&b.0)))
            .expect("every job has a permitted machine");
        let start = crate::rational::max(cursor[i].clone(), uint(first_slot(inst, j, variant)));
        cursor[i] = &start + &len;
        if variant.is_stochastic() {
            let t: u64 = start.to_integer().try_into().expect("integer start");
            x.insert((i, j, t), Rational::one());
        } else {
            let end = &start + &len;
            let mut s = start.floor();
            while s < end {
                let lo = crate::rational::max(s.clone(), start.clone());
                let hi = std::cmp::min(&s + Rational::one(), end.clone());
                let slot: u64 = s.to_integer().try_into().expect("slot fits in u64");
                y.add(i, j, slot, hi - lo);
                s += Rational::one();
            }
        }
    }
    if variant.is_stochastic() {
        y = y_from_x(inst, &x).expect("serial starts form a policy");
    }
    y
}

fn check_horizon(inst: &Instance, variant: Primal, model: &LpModel) -> Result<()> {
    let horizon = model.horizon;
    if horizon <= inst.max_release() {
        return Err(Error::HorizonTooSmall { horizon });
    }
    let witness = serial_witness(inst, variant);
    if let Ok(x) = witness.to_point(model) {
        if model.is_feasible(&x) {
            return Ok(());
        }
    }
    if solver::is_feasible(model) {
        Ok(())
    } else {
        Err(Error::HorizonTooSmall { horizon })
    }
}

fn primal_model(inst: &Instance, variant: Primal, horizon: u64) -> LpModel {
    let stochastic = variant.is_stochastic();
    let mut model = LpModel::new(Sense::Min, horizon);
    let mut by_slot: Vec<Vec<Vec<(usize, Rational)>>> =
        vec![vec![Vec::new(); horizon as usize]; inst.machines()];
    let mut assign = Vec::with_capacity(inst.len());
    let mut lower = Vec::with_capacity(inst.len());
    for j in 0..inst.len() {
        let mut a = Vec::new();
        let mut l = Vec::new();
        for i in 0..inst.machines() {
            let Some(coef) = PairCoef::new(inst, i, j, stochastic) else { continue };
            for s in first_slot(inst, j, variant)..horizon {
                let k = model.add_var(VarKey::Y { i, j, s }, Bound::NonNeg);
                let c = coef.at(s);
                model.objective.push((k, inst.weight(j) * &c));
                by_slot[i][s as usize].push((k, Rational::one()));
                a.push((k, coef.inv_mean.clone()));
                l.push((k, c - Rational::one()));
            }
        }
        assign.push(a);
        lower.push(l);
    }
    for (i, slots) in by_slot.into_iter().enumerate() {
        for (s, terms) in slots.into_iter().enumerate() {
            if !terms.is_empty() {
                model.add_constraint(format!("cap_{}_{}", i + 1, s), terms, Cmp::Le, Rational::one());
            }
        }
    }
    for (j, terms) in assign.into_iter().enumerate() {
        model.add_constraint(format!("assign_{}", j + 1), terms, Cmp::Eq, Rational::one());
    }
    if stochastic {
        for (j, terms) in lower.into_iter().enumerate() {
            model.add_constraint(format!("lower_{}", j + 1), terms, Cmp::Ge, Rational::zero());
        }
    }
    model
}

/// Primal relaxation over slots `[0, horizon)` (`[r_j, horizon)` online).
pub fn build_primal(inst: &Instance, variant: Primal, horizon: u64) -> Result<LpModel> {
    let model = primal_model(inst, variant, horizon);
    check_horizon(inst, variant, &model)?;
    Ok(model)
}

/// Dual of the deterministic relaxation: maximize `Σ α_j - Σ β_is` subject to
/// `α_j/E[P_ij] - β_is ≤ w_j((s + 1/2)/E[P_ij] + 1/2)`.
pub fn build_dual(inst: &Instance, variant: DualVariant, horizon: u64) -> Result<LpModel> {
    let primal = variant.primal();
    check_horizon(inst, primal, &primal_model(inst, primal, horizon))?;
    let mut model = LpModel::new(Sense::Max, horizon);
    let alpha: Vec<usize> = (0..inst.len())
        .map(|j| model.add_var(VarKey::Alpha(j), Bound::Free))
        .collect();
    let beta: Vec<Vec<usize>> = (0..inst.machines())
        .map(|i| {
            (0..horizon)
                .map(|s| model.add_var(VarKey::Beta { i, s }, Bound::NonNeg))
                .collect()
        })
        .collect();
    for &a in &alpha {
        model.objective.push((a, Rational::one()));
    }
    for row in &beta {
        for &b in row {
            model.objective.push((b, -Rational::one()));
        }
    }
    for j in 0..inst.len() {
        for i in 0..inst.machines() {
            let Some(coef) = PairCoef::new(inst, i, j, false) else { continue };
            for s in first_slot(inst, j, primal)..horizon {
                model.add_constraint(
                    format!("dual_{}_{}_{}", i + 1, j + 1, s),
                    vec![(alpha[j], coef.inv_mean.clone()), (beta[i][s as usize], -Rational::one())],
                    Cmp::Le,
                    inst.weight(j) * coef.at(s),
                );
            }
        }
    }
    Ok(model)
}

/// Builds and solves a primal relaxation; `horizon` defaults to
/// [`default_horizon`].
pub fn solve_primal(
    inst: &Instance,
    variant: Primal,
    horizon: Option<u64>,
) -> Result<(LpModel, solver::LpSolution)> {
    let horizon = horizon.unwrap_or_else(|| default_horizon(inst, variant));
    let model = build_primal(inst, variant, horizon)?;
    let sol = solver::solve(&model)?;
    Ok((model, sol))
}
