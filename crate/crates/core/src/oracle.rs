//! Ground truth for small instances, the lower-bound family, and checkers
//! for the auxiliary identities and bounds the analysis relies on.

use std::collections::HashMap;
use std::sync::Arc;

use num_integer::Integer;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::greedy_list::alg_list_value;
use crate::greedy_time::{alg_time_estimate, modified_release, IdleMode, TimeEstimate};
use crate::lp::{self, Primal};
use crate::model::{Instance, Job, ProcDist};
use crate::rational::{self, frac, int, uint, Rational};
use crate::stats::{Accumulator, Estimate};

pub const DET_OPT_MAX_JOBS: usize = 9;
pub const DET_OPT_MAX_JOBS_WITH_RELEASES: usize = 6;
pub const STOCH_OPT_MAX_MACHINES: usize = 3;
pub const STOCH_OPT_MAX_JOBS: usize = 6;
pub const STOCH_OPT_MAX_SUPPORT: u64 = 8;

fn point_value(inst: &Instance, i: usize, j: usize) -> Option<u64> {
    inst.dist(i, j).map(|d| d.pmf()[0].0)
}

/// Best single-machine cost of the jobs in `mask`, or `None` if one of them
/// cannot run on `i`. Without releases this is Smith's order; with releases
/// every sequence is tried, each job starting as early as allowed.
fn machine_cost(inst: &Instance, i: usize, mask: usize, releases: bool) -> Option<Rational> {
    let jobs: Vec<usize> = (0..inst.len()).filter(|j| mask >> j & 1 == 1).collect();
    if jobs.iter().any(|&j| !inst.permitted(i, j)) {
        return None;
    }
    if !releases {
        let mut t = 0u64;
        let mut cost = Rational::zero();
        for j in inst.wsept_order(i, &jobs) {
            t += point_value(inst, i, j).expect("permitted");
            cost += inst.weight(j) * uint(t);
        }
        return Some(cost);
    }
    fn search(inst: &Instance, i: usize, left: &mut Vec<usize>, t: u64, acc: Rational, best: &mut Option<Rational>) {
        if left.is_empty() {
            if best.as_ref().is_none_or(|b| acc < *b) {
                *best = Some(acc);
            }
            return;
        }
        for k in 0..left.len() {
            let j = left.swap_remove(k);
            let end = t.max(inst.release(j)) + point_value(inst, i, j).expect("permitted");
            search(inst, i, left, end, &acc + inst.weight(j) * uint(end), best);
            left.push(j);
            let last = left.len() - 1;
            left.swap(k, last);
        }
    }
    let mut best = None;
    search(inst, i, &mut jobs.clone(), 0, Rational::zero(), &mut best);
    best
}

/// Optimal total weighted completion time of a deterministic instance, by
/// enumerating assignments (and, with release dates, every sequence).
pub fn det_opt(inst: &Instance) -> Result<Rational> {
    if !inst.is_deterministic() {
        return Err(Error::NotDeterministic);
    }
    let releases = inst.max_release() > 0;
    let limit = if releases { DET_OPT_MAX_JOBS_WITH_RELEASES } else { DET_OPT_MAX_JOBS };
    if inst.len() > limit {
        return Err(Error::TooLarge(format!("{} jobs, at most {limit} supported", inst.len())));
    }
    let full = (1usize << inst.len()) - 1;
    let mut best: Vec<Option<Rational>> = vec![None; full + 1];
    best[0] = Some(Rational::zero());
    for i in 0..inst.machines() {
        let cost: Vec<Option<Rational>> = (0..=full)
            .into_par_iter()
            .map(|mask| machine_cost(inst, i, mask, releases))
            .collect();
        let mut next: Vec<Option<Rational>> = vec![None; full + 1];
        for (mask, slot) in next.iter_mut().enumerate() {
            // every split of `mask` into jobs on earlier machines and on `i`
            let mut sub = mask;
            loop {
                if let (Some(a), Some(b)) = (&best[mask ^ sub], &cost[sub]) {
                    let v = a + b;
                    if slot.as_ref().is_none_or(|s| v < *s) {
                        *slot = Some(v);
                    }
                }
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & mask;
            }
        }
        best = next;
    }
    best[full].clone().ok_or(Error::Unschedulable(0))
}

#[derive(Clone, PartialEq, Eq, Hash)]
struct InfoState {
    /// Clock, capped at the last release (after it, time carries no
    /// information).
    t: u64,
    unstarted: u32,
    /// `(job, elapsed)` per machine.
    running: Vec<Option<(usize, u64)>>,
}

struct StochDp<'a> {
    inst: &'a Instance,
    allow_waits: bool,
    max_release: u64,
    memo: HashMap<InfoState, Rational>,
}

impl StochDp<'_> {
    fn released(&self, st: &InfoState, j: usize) -> bool {
        self.inst.release(j) <= st.t
    }

    fn startable(&self, st: &InfoState) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, r) in st.running.iter().enumerate() {
            if r.is_some() {
                continue;
            }
            for j in 0..self.inst.len() {
                if st.unstarted >> j & 1 == 1 && self.released(st, j) && self.inst.permitted(i, j) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    fn unfinished_weight(&self, st: &InfoState) -> Rational {
        let mut w = Rational::zero();
        for j in 0..self.inst.len() {
            if st.unstarted >> j & 1 == 1 {
                w += self.inst.weight(j);
            }
        }
        for (j, _) in st.running.iter().flatten() {
            w += self.inst.weight(*j);
        }
        w
    }

    /// Minimum expected remaining cost, charged as the unfinished weight of
    /// every future unit of time.
    fn value(&mut self, st: &InfoState) -> Rational {
        if st.unstarted == 0 && st.running.iter().all(Option::is_none) {
            return Rational::zero();
        }
        if let Some(v) = self.memo.get(st) {
            return v.clone();
        }
        let starts = self.startable(st);
        let mut best: Option<Rational> = None;
        for &(i, j) in &starts {
            let d = self.inst.dist(i, j).expect("permitted");
            let p0 = d.prob_eq(0);
            let mut next = st.clone();
            next.unstarted &= !(1 << j);
            let mut v = Rational::zero();
            if !p0.is_zero() {
                v += &p0 * self.value(&next);
            }
            next.running[i] = Some((j, 0));
            v += (Rational::one() - &p0) * self.value(&next);
            if best.as_ref().is_none_or(|b| v < *b) {
                best = Some(v);
            }
        }
        let any_running = st.running.iter().any(Option::is_some);
        let pending = (0..self.inst.len()).any(|j| st.unstarted >> j & 1 == 1 && !self.released(st, j));
        let may_advance = (any_running || pending) && (self.allow_waits || starts.is_empty());
        if may_advance {
            let v = self.unfinished_weight(st) + self.advance(st);
            if best.as_ref().is_none_or(|b| v < *b) {
                best = Some(v);
            }
        }
        let v = best.expect("some action is always available");
        self.memo.insert(st.clone(), v.clone());
        v
    }

    /// Expected value after one unit of time passes.
    fn advance(&mut self, st: &InfoState) -> Rational {
        let mut base = st.clone();
        base.t = (st.t + 1).min(self.max_release);
        let mut outcomes = vec![(Rational::one(), base)];
        for (i, r) in st.running.iter().enumerate() {
            let Some((j, e)) = *r else { continue };
            let d = self.inst.dist(i, j).expect("running job is permitted");
            let done = d.prob_eq(e + 1) / d.tail(e);
            let mut grown = Vec::with_capacity(outcomes.len() * 2);
            for (p, s) in outcomes {
                if !done.is_zero() {
                    let mut fin = s.clone();
                    fin.running[i] = None;
                    grown.push((&p * &done, fin));
                }
                let cont = Rational::one() - &done;
                if !cont.is_zero() {
                    let mut run = s;
                    run.running[i] = Some((j, e + 1));
                    grown.push((p * cont, run));
                }
            }
            outcomes = grown;
        }
        outcomes.into_iter().map(|(p, s)| p * self.value(&s)).sum()
    }
}

/// Expected cost of an optimal non-anticipatory policy that knows the job
/// set in advance. Machines may be left idle while others run
/// (`allow_waits`), which can pay off when a job prefers a busy machine.
pub fn stoch_opt_with(inst: &Instance, allow_waits: bool) -> Result<Rational> {
    let support = inst
        .jobs()
        .iter()
        .flat_map(|j| j.proc.iter().flatten())
        .map(|d| d.max_value())
        .max()
        .unwrap_or(0);
    if inst.machines() > STOCH_OPT_MAX_MACHINES
        || inst.len() > STOCH_OPT_MAX_JOBS
        || support > STOCH_OPT_MAX_SUPPORT
    {
        return Err(Error::TooLarge(format!(
            "{} machines, {} jobs, support up to {support}; limits are {STOCH_OPT_MAX_MACHINES}, \
             {STOCH_OPT_MAX_JOBS}, {STOCH_OPT_MAX_SUPPORT}",
            inst.machines(),
            inst.len()
        )));
    }
    let mut dp = StochDp {
        inst,
        allow_waits,
        max_release: inst.max_release(),
        memo: HashMap::new(),
    };
    let start = InfoState {
        t: 0,
        unstarted: ((1u64 << inst.len()) - 1) as u32,
        running: vec![None; inst.machines()],
    };
    Ok(dp.value(&start))
}

pub fn stoch_opt(inst: &Instance) -> Result<Rational> {
    stoch_opt_with(inst, true)
}

/// `lcm(1², 2², …, k²)`, the smallest machine count for the family of size `k`.
pub fn lcm_of_squares(k: usize) -> usize {
    (1..=k).fold(1, |acc, h| acc.lcm(&(h * h)))
}

/// Unit-weight, unit-time instance with jobs `(h, ℓ)` for `h = 1..k` and
/// `ℓ = 1..m/h²`; job `(h, ℓ)` runs only on machines `1..ℓ`. Jobs arrive by
/// decreasing `ℓ`, then increasing `h`.
pub fn gen_lower_bound(k: usize, m: usize) -> Result<Instance> {
    if m == 0 {
        return Err(Error::NoMachines);
    }
    if let Some(h) = (1..=k).find(|h| !m.is_multiple_of(h * h)) {
        return Err(Error::BadM { m, h });
    }
    let mut pairs: Vec<(usize, usize)> = (1..=k)
        .flat_map(|h| (1..=m / (h * h)).map(move |l| (h, l)))
        .collect();
    pairs.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    let unit = Arc::new(ProcDist::point(1));
    let jobs = pairs
        .iter()
        .map(|&(_, l)| {
            let proc = (0..m).map(|i| (i < l).then(|| unit.clone())).collect();
            Job::shared(Rational::one(), 0, proc)
        })
        .collect();
    Instance::new(m, jobs)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LowerBound {
    pub k: usize,
    pub m: usize,
    pub greedy: Rational,
    pub opt: Rational,
    pub ratio: Rational,
    /// `det_opt` agrees with the closed form, where it is tractable.
    pub opt_confirmed: Option<bool>,
}

pub const LOWER_BOUND_MAX_K: usize = 6;

/// Greedy cost against the optimum `m · Σ_{h ≤ k} 1/h` on the family of size `k`.
pub fn lower_bound_ratio(k: usize) -> Result<LowerBound> {
    if k == 0 || k > LOWER_BOUND_MAX_K {
        return Err(Error::TooLarge(format!("k = {k}, supported 1..={LOWER_BOUND_MAX_K}")));
    }
    let m = lcm_of_squares(k);
    let inst = gen_lower_bound(k, m)?;
    let greedy = alg_list_value(&inst)?;
    let harmonic: Rational = (1..=k as i64).map(|h| frac(1, h)).sum();
    let opt = uint(m as u64) * harmonic;
    let opt_confirmed = if inst.len() <= DET_OPT_MAX_JOBS {
        Some(det_opt(&inst)? == opt)
    } else {
        None
    };
    let ratio = &greedy / &opt;
    Ok(LowerBound { k, m, greedy, opt, ratio, opt_confirmed })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct B1Report {
    /// `Σ_t x_t (t + E[P])`.
    pub lhs: Rational,
    /// `Σ_s [y_s/E[P] (s + 1/2) + (1 - CV²)/2 · y_s]`.
    pub rhs: Rational,
}

impl B1Report {
    pub fn holds(&self) -> bool {
        self.lhs == self.rhs
    }
}

/// Expected completion time of a job with processing time `d` started at
/// `t` with probability `x_t`, computed directly and from its `y` profile.
pub fn check_b1(d: &ProcDist, x: &[(u64, Rational)]) -> Result<B1Report> {
    let inst = Instance::new(1, vec![Job::new(Rational::one(), 0, vec![Some(d.clone())])])?;
    let mut starts = lp::StartDistribution::new();
    for (t, p) in x {
        *starts.entry((0, 0, *t)).or_insert_with(Rational::zero) += p;
    }
    let y = lp::y_from_x(&inst, &starts)?;
    let lhs = x.iter().map(|(t, p)| p * (uint(*t) + d.mean())).sum();
    let rhs = lp::completion_from_y(&inst, &y, Primal::S).remove(0);
    Ok(B1Report { lhs, rhs })
}

/// Families of sequences `(A_k, Y_k)` with `0 ≤ A_k ≤ T`, `Y_k ≥ A_k` and
/// `E[Y_k | past] ≤ 2A_k`, stopped once `Σ Y_k ≥ T`. All parameters are
/// dyadic so the simulation is exact in floating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StoppingFamily {
    /// `A = Y = T`.
    Deterministic,
    /// `A = T`, `Y = T` or `3T` with equal probability.
    Doubling,
    /// `A = εT`; `Y = A`, or `A + A/q` with probability `q = ε/2`.
    HeavyTail { eps: f64 },
    /// `A = εT` with rare jumps (`q = ε²`) while `Σ Y < (1-ε)T`, then
    /// `A = T`, `Y = 2T`. Its expectation tends to `4T` as `ε → 0`.
    NearTight { eps: f64 },
}

/// One step: `Y = low` with probability `1 - q`, else `high`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    pub a: f64,
    pub low: f64,
    pub high: f64,
    pub q: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StoppingProcess {
    pub family: StoppingFamily,
    pub threshold: f64,
}

impl StoppingProcess {
    pub fn step(&self, sum: f64) -> Step {
        let t = self.threshold;
        let jump = |a: f64, q: f64| Step { a, low: a, high: a + a / q, q };
        match self.family {
            StoppingFamily::Deterministic => Step { a: t, low: t, high: t, q: 0.0 },
            StoppingFamily::Doubling => Step { a: t, low: t, high: 3.0 * t, q: 0.5 },
            StoppingFamily::HeavyTail { eps } => jump(eps * t, eps / 2.0),
            StoppingFamily::NearTight { eps } => {
                if sum < (1.0 - eps) * t {
                    jump(eps * t, eps * eps)
                } else {
                    Step { a: t, low: 2.0 * t, high: 2.0 * t, q: 0.0 }
                }
            }
        }
    }

    fn check(&self, s: &Step) -> Result<()> {
        let ok = s.a >= 0.0
            && s.a <= self.threshold
            && s.low >= s.a
            && s.high >= s.a
            && (0.0..=1.0).contains(&s.q)
            && (1.0 - s.q) * s.low + s.q * s.high <= 2.0 * s.a;
        if ok {
            Ok(())
        } else {
            Err(Error::HypothesisViolated(format!("{s:?} with T = {}", self.threshold)))
        }
    }

    /// One path's `Σ_{k ≤ τ} Y_k`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        const MAX_STEPS: usize = 1 << 20;
        let mut sum = 0.0;
        for _ in 0..MAX_STEPS {
            let s = self.step(sum);
            self.check(&s)?;
            let y = if s.q > 0.0 && rng.random::<f64>() < s.q { s.high } else { s.low };
            if y < s.a {
                return Err(Error::HypothesisViolated(format!("Y = {y} < A = {}", s.a)));
            }
            sum += y;
            if sum >= self.threshold {
                return Ok(sum);
            }
        }
        Err(Error::HypothesisViolated("stopping time not reached".into()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct B2Report {
    pub estimate: Estimate,
    pub bound: f64,
}

impl B2Report {
    pub fn passed(&self) -> bool {
        self.estimate.within(self.bound)
    }
}

/// Monte Carlo estimate of `E[Σ_{k ≤ τ} Y_k]` against `4T`.
pub fn check_b2(process: &StoppingProcess, trials: usize, seed: u64) -> Result<B2Report> {
    let sums: Vec<Result<f64>> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(trial as u64);
            process.sample(&mut rng)
        })
        .collect();
    let mut acc = Accumulator::default();
    for s in sums {
        acc.push(s?);
    }
    Ok(B2Report { estimate: acc.finish(), bound: 4.0 * process.threshold })
}

/// Exact `E[Σ_{k ≤ τ} Y_k] = 2 E[Σ_{k ≤ τ} A_k]` of the near-tight family
/// with `T = 1` and `ε = 1/n`.
pub fn near_tight_expectation(n: u64) -> Rational {
    let eps = frac(1, n as i64);
    let q = &eps * &eps;
    let steps = n - 1;
    let mut sum_a = Rational::zero();
    let mut survive = Rational::one();
    for k in 1..=steps {
        sum_a += &survive * &q * uint(k) * &eps;
        survive *= Rational::one() - &q;
    }
    sum_a += survive * (int(2) - &eps);
    int(2) * sum_a
}

#[derive(Debug, Clone, PartialEq)]
pub struct JobBound {
    pub job: usize,
    pub machine: usize,
    pub completion: Estimate,
    /// `4 R_ij + 2 Σ_{k→i, k∈H(j,i)} E[P_ik]`.
    pub bound: Rational,
}

impl JobBound {
    pub fn passed(&self) -> bool {
        self.completion.within(rational::to_f64(&self.bound))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JobBoundReport {
    pub jobs: Vec<JobBound>,
}

impl JobBoundReport {
    pub fn passed(&self) -> bool {
        self.jobs.iter().all(JobBound::passed)
    }
}

/// Per-job expected completion time of the online-time greedy against
/// `4 R_ij + 2 Σ_{k→i, k∈H(j,i)} E[P_ik]`, where `R_ij` is the modified
/// release used on the original instance.
pub fn check_lemma5(inst: &Instance, f: &Rational, samples: usize, seed: u64) -> Result<JobBoundReport> {
    let est = alg_time_estimate(inst, f, IdleMode::ForcedIdle, samples, seed)?;
    job_bounds(inst, f, &est)
}

/// The per-job bounds of [`check_lemma5`] against an existing estimate,
/// which must come from forced-idle runs at the same `f`.
pub fn job_bounds(inst: &Instance, f: &Rational, est: &TimeEstimate) -> Result<JobBoundReport> {
    let per_machine = est.assignment.jobs_per_machine(inst.machines());
    let mut jobs = Vec::with_capacity(inst.len());
    for j in 0..inst.len() {
        let i = est.assignment.machine(j);
        let r = modified_release(inst, j, i, f)?;
        let high: Rational = per_machine[i]
            .iter()
            .filter(|&&k| inst.outranks(i, k, j))
            .map(|&k| inst.mean(i, k).expect("assigned").clone())
            .sum();
        jobs.push(JobBound {
            job: j,
            machine: i,
            completion: est.per_job[j],
            bound: int(4) * r + int(2) * high,
        });
    }
    Ok(JobBoundReport { jobs })
}

/// Single machine with `n²` low-weight jobs that usually take no time but
/// occasionally take `n`, followed by a unit job released at time 1.
pub fn blocking_instance(n: u64) -> Instance {
    let nn = (n * n) as i64;
    let bad = Arc::new(
        ProcDist::new([(0, Rational::one() - frac(1, nn)), (n, frac(1, nn))]).expect("valid pmf"),
    );
    let mut jobs: Vec<Job> = (0..nn)
        .map(|_| Job::shared(frac(1, 100), 0, vec![Some(bad.clone())]))
        .collect();
    jobs.push(Job::new(Rational::one(), 1, vec![Some(ProcDist::point(1))]));
    Instance::new(1, jobs).expect("valid instance")
}
