//! Online-list greedy: each arriving job goes to the machine with the smallest
//! instantaneous expected increase of the objective; machines then run WSEPT.

use num_integer::Integer;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::model::{fixed_assignment_cost, Assignment, Instance};
use crate::rational::{self, Rational};

/// Instantaneous expected increase of assigning `j` to `i`, given the machine
/// of every job before `j` in `partial` (`partial.len() >= j`).
///
/// `None` stands for `+∞` (job forbidden on `i`).
pub fn incr_list(inst: &Instance, partial: &[usize], j: usize, i: usize) -> Option<Rational> {
    let e_ij = inst.mean(i, j)?;
    let mut high_mean = e_ij.clone();
    let mut low_weight = Rational::zero();
    for (k, _) in partial[..j].iter().enumerate().filter(|(_, &m)| m == i) {
        if inst.outranks(i, k, j) {
            high_mean += inst.mean(i, k).expect("assigned job is permitted");
        } else {
            low_weight += inst.weight(k);
        }
    }
    Some(inst.weight(j) * high_mean + e_ij * low_weight)
}

/// Jobs already placed on one machine, kept in WSEPT order with prefix sums so
/// an increase query costs a binary search.
#[derive(Debug, Default, Clone)]
struct Queue {
    jobs: Vec<usize>,
    prefix_mean: Vec<Rational>,
    prefix_weight: Vec<Rational>,
}

impl Queue {
    fn new() -> Self {
        Queue {
            jobs: Vec::new(),
            prefix_mean: vec![Rational::zero()],
            prefix_weight: vec![Rational::zero()],
        }
    }

    /// Number of queued jobs in `H(j, i)`. Queued jobs all precede `j`, so
    /// they form a prefix of the WSEPT order.
    fn split(&self, inst: &Instance, i: usize, j: usize) -> usize {
        self.jobs.partition_point(|&k| inst.outranks(i, k, j))
    }

    /// `(Σ_{H, k<j} E[P_ik], Σ_{L, k<j} w_k)`.
    fn sums(&self, inst: &Instance, i: usize, j: usize) -> (&Rational, Rational) {
        if self.jobs.is_empty() {
            return (&self.prefix_mean[0], Rational::zero());
        }
        let pos = self.split(inst, i, j);
        let total_w = self.prefix_weight.last().expect("nonempty prefix");
        (&self.prefix_mean[pos], total_w - &self.prefix_weight[pos])
    }

    fn insert(&mut self, inst: &Instance, i: usize, j: usize) {
        let pos = self.split(inst, i, j);
        self.jobs.insert(pos, j);
        self.prefix_mean.truncate(pos + 1);
        self.prefix_weight.truncate(pos + 1);
        for t in pos..self.jobs.len() {
            let k = self.jobs[t];
            let m = &self.prefix_mean[t] + inst.mean(i, k).expect("permitted");
            let w = &self.prefix_weight[t] + inst.weight(k);
            self.prefix_mean.push(m);
            self.prefix_weight.push(w);
        }
    }
}

/// Shared argmin loop of both greedy variants. `extra(i, j)` is added to the
/// list increase (the release-date term of the online-time variant). Ties go
/// to the lowest machine index. Returns the assignment and the attained
/// minima.
pub(crate) fn greedy_assign(
    inst: &Instance,
    extra: impl Fn(usize, usize) -> Rational,
) -> Result<(Assignment, Vec<Rational>)> {
    let mut queues = vec![Queue::new(); inst.machines()];
    let mut machine_of = Vec::with_capacity(inst.len());
    let mut minima = Vec::with_capacity(inst.len());
    for j in 0..inst.len() {
        let w_j = inst.weight(j);
        let mut best: Option<(usize, Rational)> = None;
        for (i, queue) in queues.iter().enumerate() {
            let Some(e_ij) = inst.mean(i, j) else { continue };
            let (high, low_w) = queue.sums(inst, i, j);
            let value = w_j * (high + e_ij) + e_ij * low_w + extra(i, j);
            if best.as_ref().is_none_or(|(_, b)| value < *b) {
                best = Some((i, value));
            }
        }
        let (i, value) = best.ok_or(Error::Unschedulable(j))?;
        queues[i].insert(inst, i, j);
        machine_of.push(i);
        minima.push(value);
    }
    Ok((Assignment::new(machine_of), minima))
}

/// The list greedy in fixed point: weights and means are scaled by the
/// common denominators `W` and `D` so every comparison is an exact `i128`
/// comparison. `None` when the scaled values might overflow.
fn assign_list_scaled(inst: &Instance) -> Option<(Assignment, Vec<Rational>)> {
    let weights: Vec<(i128, i128)> = (0..inst.len())
        .map(|j| rational::to_small(inst.weight(j)))
        .collect::<Option<_>>()?;
    let lcm = |a: i128, b: i128| -> Option<i128> { a.checked_mul(b / a.gcd(&b)) };
    let w_den = weights.iter().try_fold(1i128, |acc, &(_, d)| lcm(acc, d))?;
    let mut e_den = 1i128;
    let mut max_mean_sum = 0i128;
    for j in 0..inst.len() {
        let mut job_max = 0i128;
        for i in 0..inst.machines() {
            let Some(d) = inst.dist(i, j) else { continue };
            let (n, q) = d.small_mean()?;
            e_den = lcm(e_den, q)?;
            job_max = job_max.max(n / q + 1);
        }
        max_mean_sum = max_mean_sum.checked_add(job_max)?;
    }
    let w: Vec<i128> = weights
        .iter()
        .map(|&(n, d)| n.checked_mul(w_den / d))
        .collect::<Option<_>>()?;
    let w_sum = w.iter().try_fold(0i128, |acc, &x| acc.checked_add(x))?;
    // every increase is at most 2 · (Σ w') · (Σ max E) · D
    let bound = w_sum
        .checked_mul(max_mean_sum)?
        .checked_mul(e_den)?
        .checked_mul(4)?;
    if bound > i128::MAX / 4 {
        return None;
    }
    let scaled_mean = |i: usize, j: usize| -> Option<i128> {
        inst.dist(i, j).map(|d| {
            let (n, q) = d.small_mean().expect("checked above");
            n * (e_den / q)
        })
    };
    // k outranks j on i: w_k E_ij > w_j E_ik, ties to the lower index
    let outranks = |i: usize, k: usize, j: usize| -> bool {
        let (Some(e_ij), Some(e_ik)) = (scaled_mean(i, j), scaled_mean(i, k)) else {
            return false;
        };
        let (a, b) = (w[k] * e_ij, w[j] * e_ik);
        a > b || (a == b && k <= j)
    };
    struct Q {
        jobs: Vec<usize>,
        mean: Vec<i128>,
        weight: Vec<i128>,
    }
    let mut queues: Vec<Q> = (0..inst.machines())
        .map(|_| Q { jobs: Vec::new(), mean: vec![0], weight: vec![0] })
        .collect();
    let mut machine_of = Vec::with_capacity(inst.len());
    let mut minima = Vec::with_capacity(inst.len());
    for j in 0..inst.len() {
        let mut best: Option<(usize, i128)> = None;
        for (i, q) in queues.iter().enumerate() {
            let Some(e) = scaled_mean(i, j) else { continue };
            let pos = q.jobs.partition_point(|&k| outranks(i, k, j));
            let low = q.weight[q.jobs.len()] - q.weight[pos];
            let v = w[j] * (q.mean[pos] + e) + e * low;
            if best.is_none_or(|(_, b)| v < b) {
                best = Some((i, v));
            }
        }
        let (i, v) = best?;
        let q = &mut queues[i];
        let pos = q.jobs.partition_point(|&k| outranks(i, k, j));
        q.jobs.insert(pos, j);
        q.mean.truncate(pos + 1);
        q.weight.truncate(pos + 1);
        for t in pos..q.jobs.len() {
            let k = q.jobs[t];
            q.mean.push(q.mean[t] + scaled_mean(i, k).expect("permitted"));
            q.weight.push(q.weight[t] + w[k]);
        }
        machine_of.push(i);
        minima.push(Rational::new(v.into(), (w_den * e_den).into()));
    }
    Some((Assignment::new(machine_of), minima))
}

/// Runs the online-list greedy. Release dates are ignored. Returns the
/// assignment and `α_j`, the increase attained by each job.
pub fn assign_list(inst: &Instance) -> Result<(Assignment, Vec<Rational>)> {
    if let Some(out) = assign_list_scaled(inst) {
        return Ok(out);
    }
    assign_list_exact(inst)
}

/// [`assign_list`] evaluated in arbitrary-precision rationals throughout.
pub fn assign_list_exact(inst: &Instance) -> Result<(Assignment, Vec<Rational>)> {
    greedy_assign(inst, |_, _| Rational::zero())
}

/// Expected objective of the online-list greedy.
pub fn alg_list_value(inst: &Instance) -> Result<Rational> {
    let (asg, _) = assign_list(inst)?;
    fixed_assignment_cost(inst, &asg)
}
