//! Online-time greedy: jobs arrive at their release dates, are assigned on
//! arrival, become available on their machine only at a modified release date
//! `max{f·r_j, E[P_ij]}`, and every start is preceded by `E[P_ik]` units of
//! forced idleness.
//!
//! Two clocks appear throughout. The *original* trace runs the instance as
//! given. The *sped* trace runs it on machines of speed `f`: releases
//! `max{r_j, E[P_ij]/f}`, idleness `E[P_ik]/f`, processing `P_ik/f`. The sped
//! trace is the original compressed by `f`.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::greedy_list::greedy_assign;
use crate::model::Assignment;
use crate::model::Instance;
use crate::rational::{self, uint, Rational};
use crate::stats::{Accumulator, Estimate};

/// What precedes the actual processing of a job.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IdleMode {
    /// Idle for `E[P_ik]`, then process for `P_ik`.
    #[default]
    ForcedIdle,
    /// No idleness; process for `max{P_ik, E[P_ik]}`.
    MaxProc,
}

fn check_speed(f: &Rational) -> Result<()> {
    if *f < Rational::one() {
        return Err(Error::BadSpeed {
            f: rational::fmt(f),
            min: 1,
        });
    }
    Ok(())
}

/// `r_ij = max{f·r_j, E[P_ij]}`.
pub fn modified_release(inst: &Instance, j: usize, i: usize, f: &Rational) -> Result<Rational> {
    let e = inst.try_mean(i, j)?;
    Ok(rational::max(f * uint(inst.release(j)), e.clone()))
}

/// `r^f_ij = max{r_j, E[P_ij]/f}`, the release used on speed-`f` machines.
pub fn sped_release(inst: &Instance, j: usize, i: usize, f: &Rational) -> Result<Rational> {
    let e = inst.try_mean(i, j)?;
    Ok(rational::max(uint(inst.release(j)), e / f))
}

/// `w_j (2 r_ij + Σ_{k→i, k≤j, k∈H(j,i)} E[P_ik]) + E[P_ij] Σ_{k→i, k<j, k∈L(j,i)} w_k`
/// with `partial` giving the machines of jobs `< j`. `None` is `+∞`.
pub fn incr_time(
    inst: &Instance,
    partial: &[usize],
    j: usize,
    i: usize,
    f: &Rational,
) -> Option<Rational> {
    let r_ij = modified_release(inst, j, i, f).ok()?;
    let list = crate::greedy_list::incr_list(inst, partial, j, i)?;
    Some(list + inst.weight(j) * (r_ij * rational::int(2)))
}

/// The same increase evaluated on the speed-`f` instance from its own
/// parameters (`r^f_ij`, `E[P_ik]/f`). Equals `incr_time / f`.
pub fn incr_time_sped(
    inst: &Instance,
    partial: &[usize],
    j: usize,
    i: usize,
    f: &Rational,
) -> Option<Rational> {
    let r_f = sped_release(inst, j, i, f).ok()?;
    let e_ij = inst.mean(i, j)? / f;
    let mut high = e_ij.clone();
    let mut low_w = Rational::zero();
    for (k, _) in partial[..j].iter().enumerate().filter(|(_, &m)| m == i) {
        if inst.outranks(i, k, j) {
            high += inst.mean(i, k)? / f;
        } else {
            low_w += inst.weight(k);
        }
    }
    Some(inst.weight(j) * (r_f * rational::int(2) + high) + e_ij * low_w)
}

/// Assignment of the online-time greedy together with the attained minima
/// of [`incr_time`].
pub fn assign_time_with_increases(
    inst: &Instance,
    f: &Rational,
) -> Result<(Assignment, Vec<Rational>)> {
    check_speed(f)?;
    let two_f = f * rational::int(2);
    greedy_assign(inst, |i, j| {
        let e = inst.mean(i, j).expect("permitted");
        let r = rational::max(&two_f * uint(inst.release(j)), e * rational::int(2));
        inst.weight(j) * r
    })
}

pub fn assign_time(inst: &Instance, f: &Rational) -> Result<Assignment> {
    assign_time_with_increases(inst, f).map(|(a, _)| a)
}

/// Reference assignment computed on the speed-`f` instance with
/// [`incr_time_sped`]; quadratic, used to cross-check [`assign_time`].
pub fn assign_time_sped(inst: &Instance, f: &Rational) -> Result<Assignment> {
    check_speed(f)?;
    let mut machine_of = Vec::with_capacity(inst.len());
    for j in 0..inst.len() {
        let mut best: Option<(usize, Rational)> = None;
        for i in 0..inst.machines() {
            if let Some(v) = incr_time_sped(inst, &machine_of, j, i, f) {
                if best.as_ref().is_none_or(|(_, b)| v < *b) {
                    best = Some((i, v));
                }
            }
        }
        machine_of.push(best.ok_or(Error::Unschedulable(j))?.0);
    }
    Ok(Assignment::new(machine_of))
}

/// Drawn processing time of every permitted (job, machine) pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Realization {
    values: Vec<Vec<Option<u64>>>,
}

impl Realization {
    /// `values[j][i]`; must be `Some` exactly on permitted pairs.
    pub fn from_values(values: Vec<Vec<Option<u64>>>) -> Self {
        Realization { values }
    }

    /// Every processing time fixed to a point of the support: the point
    /// mass value for deterministic instances.
    pub fn draw<R: Rng + ?Sized>(inst: &Instance, rng: &mut R) -> Self {
        let values = inst
            .jobs()
            .iter()
            .map(|job| {
                job.proc
                    .iter()
                    .map(|d| d.as_ref().map(|d| d.sample_with(rng.random::<f64>())))
                    .collect()
            })
            .collect();
        Realization { values }
    }

    pub fn get(&self, i: usize, j: usize) -> Option<u64> {
        self.values[j][i]
    }

    /// Checks every drawn value lies in the support of its distribution.
    pub fn is_consistent(&self, inst: &Instance) -> bool {
        (0..inst.len()).all(|j| {
            (0..inst.machines()).all(|i| match (inst.dist(i, j), self.get(i, j)) {
                (Some(d), Some(v)) => d.pmf().iter().any(|(x, _)| *x == v),
                (None, None) => true,
                _ => false,
            })
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegmentKind {
    /// Nothing released on the machine.
    Wait,
    ForcedIdle(usize),
    Processing(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub kind: SegmentKind,
    pub start: Rational,
    pub end: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JobRun {
    pub machine: usize,
    /// Time the machine committed to the job (start of its forced idleness).
    pub commit: Rational,
    pub start: Rational,
    pub completion: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScheduleTrace {
    pub runs: Vec<JobRun>,
    pub machines: Vec<Vec<Segment>>,
}

impl ScheduleTrace {
    pub fn weighted_completion(&self, inst: &Instance) -> Rational {
        self.runs
            .iter()
            .enumerate()
            .map(|(j, run)| inst.weight(j) * &run.completion)
            .sum()
    }

    /// Every time multiplied by `c`.
    pub fn scaled(&self, c: &Rational) -> ScheduleTrace {
        let runs = self
            .runs
            .iter()
            .map(|r| JobRun {
                machine: r.machine,
                commit: &r.commit * c,
                start: &r.start * c,
                completion: &r.completion * c,
            })
            .collect();
        let machines = self
            .machines
            .iter()
            .map(|segs| {
                segs.iter()
                    .map(|s| Segment {
                        kind: s.kind,
                        start: &s.start * c,
                        end: &s.end * c,
                    })
                    .collect()
            })
            .collect();
        ScheduleTrace { runs, machines }
    }
}

/// One machine's jobs in priority order with their releases and idle
/// lengths; processing times are supplied per run.
struct MachinePlan {
    machine: usize,
    jobs: Vec<usize>,
    release: Vec<Rational>,
    idle: Vec<Rational>,
    /// Positions in `jobs`, by release then priority.
    by_release: Vec<usize>,
}

impl MachinePlan {
    fn build(
        inst: &Instance,
        asg: &Assignment,
        params: impl Fn(usize, usize) -> (Rational, Rational),
    ) -> Vec<MachinePlan> {
        asg.jobs_per_machine(inst.machines())
            .iter()
            .enumerate()
            .map(|(i, jobs)| {
                let jobs = inst.wsept_order(i, jobs);
                let (release, idle): (Vec<_>, Vec<_>) = jobs.iter().map(|&j| params(i, j)).unzip();
                let mut by_release: Vec<usize> = (0..jobs.len()).collect();
                by_release.sort_by(|&a, &b| release[a].cmp(&release[b]).then(a.cmp(&b)));
                MachinePlan { machine: i, jobs, release, idle, by_release }
            })
            .collect()
    }

    /// Event loop: at each idle epoch commit to the highest-priority released
    /// job; with nothing released, sleep until the next release. `proc[k]` is
    /// the processing time of `jobs[k]`.
    fn dispatch(&self, proc: &[Rational], runs: &mut [Option<JobRun>], mut segs: Option<&mut Vec<Segment>>) {
        let n = self.jobs.len();
        let mut ready = BinaryHeap::new();
        let mut next = 0;
        let mut t = Rational::zero();
        for _ in 0..n {
            if ready.is_empty() && self.release[self.by_release[next]] > t {
                let wake = self.release[self.by_release[next]].clone();
                if let Some(segs) = segs.as_deref_mut() {
                    segs.push(Segment { kind: SegmentKind::Wait, start: t, end: wake.clone() });
                }
                t = wake;
            }
            while next < n && self.release[self.by_release[next]] <= t {
                ready.push(Reverse(self.by_release[next]));
                next += 1;
            }
            let Reverse(k) = ready.pop().expect("a released job exists");
            let job = self.jobs[k];
            let start = &t + &self.idle[k];
            let end = &start + &proc[k];
            if let Some(segs) = segs.as_deref_mut() {
                if !self.idle[k].is_zero() {
                    segs.push(Segment { kind: SegmentKind::ForcedIdle(job), start: t.clone(), end: start.clone() });
                }
                segs.push(Segment { kind: SegmentKind::Processing(job), start: start.clone(), end: end.clone() });
            }
            runs[job] = Some(JobRun { machine: self.machine, commit: t, start, completion: end.clone() });
            t = end;
        }
    }
}

fn run_plans(
    inst: &Instance,
    plans: &[MachinePlan],
    proc: impl Fn(usize, usize) -> Rational,
    record: bool,
) -> ScheduleTrace {
    let mut runs = vec![None; inst.len()];
    let mut machines = Vec::with_capacity(plans.len());
    for plan in plans {
        let p: Vec<Rational> = plan.jobs.iter().map(|&j| proc(plan.machine, j)).collect();
        let mut segs = Vec::new();
        plan.dispatch(&p, &mut runs, record.then_some(&mut segs));
        machines.push(segs);
    }
    ScheduleTrace {
        runs: runs.into_iter().map(|r| r.expect("every job runs")).collect(),
        machines,
    }
}

/// Runs every machine given per-job `(release, idle, proc)` in one clock.
fn run_trace(
    inst: &Instance,
    asg: &Assignment,
    params: impl Fn(usize, usize) -> (Rational, Rational, Rational),
) -> ScheduleTrace {
    let plans = MachinePlan::build(inst, asg, |i, j| {
        let (r, idle, _) = params(i, j);
        (r, idle)
    });
    run_plans(inst, &plans, |i, j| params(i, j).2, true)
}

fn idle_and_proc(mode: IdleMode, e: &Rational, p: Rational) -> (Rational, Rational) {
    match mode {
        IdleMode::ForcedIdle => (e.clone(), p),
        IdleMode::MaxProc => (Rational::zero(), rational::max(p, e.clone())),
    }
}

/// Trace of the greedy on the original instance under realization `real`.
pub fn simulate_original(
    inst: &Instance,
    asg: &Assignment,
    real: &Realization,
    f: &Rational,
    mode: IdleMode,
) -> Result<ScheduleTrace> {
    check_speed(f)?;
    asg.validate(inst)?;
    Ok(run_trace(inst, asg, |i, j| {
        let e = inst.mean(i, j).expect("validated");
        let release = modified_release(inst, j, i, f).expect("validated");
        let p = uint(real.get(i, j).expect("realized"));
        let (idle, proc) = idle_and_proc(mode, e, p);
        (release, idle, proc)
    }))
}

/// Trace of the greedy on the speed-`f` instance under realization `real`.
pub fn simulate_time(
    inst: &Instance,
    asg: &Assignment,
    real: &Realization,
    f: &Rational,
    mode: IdleMode,
) -> Result<ScheduleTrace> {
    check_speed(f)?;
    asg.validate(inst)?;
    Ok(run_trace(inst, asg, |i, j| {
        let e = inst.mean(i, j).expect("validated") / f;
        let release = sped_release(inst, j, i, f).expect("validated");
        let p = uint(real.get(i, j).expect("realized")) / f;
        let (idle, proc) = idle_and_proc(mode, &e, p);
        (release, idle, proc)
    }))
}

/// Deterministic speed-`f` counterpart: processing times `E[P_ij]/f`,
/// releases `max{r_j, E[P_ij]/f}`, no forced idleness, same assignment as
/// [`assign_time`].
pub fn det_trace(inst: &Instance, f: &Rational) -> Result<(Assignment, ScheduleTrace)> {
    let asg = assign_time(inst, f)?;
    let trace = run_trace(inst, &asg, |i, j| {
        let e = inst.mean(i, j).expect("assigned") / f;
        let release = sped_release(inst, j, i, f).expect("assigned");
        (release, Rational::zero(), e)
    });
    Ok((asg, trace))
}

/// Exact cost of the deterministic speed-`f` counterpart.
pub fn alg_time_det(inst: &Instance, f: &Rational) -> Result<Rational> {
    let (_, trace) = det_trace(inst, f)?;
    Ok(trace.weighted_completion(inst))
}

/// Monte Carlo summary of the stochastic greedy on the original instance.
#[derive(Debug, Clone)]
pub struct TimeEstimate {
    pub assignment: Assignment,
    /// `E[Σ w_j C_j]`.
    pub total: Estimate,
    /// `E[C_j]` per job.
    pub per_job: Vec<Estimate>,
}

/// Estimates the expected objective of the online-time greedy on the
/// original instance. Replication `r` draws from ChaCha8 stream `r` of
/// `seed`, so results do not depend on thread scheduling. Deterministic
/// instances are evaluated exactly with `ci95 = 0`.
pub fn alg_time_estimate(
    inst: &Instance,
    f: &Rational,
    mode: IdleMode,
    samples: usize,
    seed: u64,
) -> Result<TimeEstimate> {
    if samples == 0 {
        return Err(Error::TooLarge("at least one sample is required".into()));
    }
    let asg = assign_time(inst, f)?;
    if inst.is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let real = Realization::draw(inst, &mut rng);
        let trace = simulate_original(inst, &asg, &real, f, mode)?;
        let total = Estimate::exact(rational::to_f64(&trace.weighted_completion(inst)));
        let per_job = trace
            .runs
            .iter()
            .map(|r| Estimate::exact(rational::to_f64(&r.completion)))
            .collect();
        return Ok(TimeEstimate {
            assignment: asg,
            total,
            per_job,
        });
    }
    let plans = MachinePlan::build(inst, &asg, |i, j| {
        let e = inst.mean(i, j).expect("assigned");
        let release = modified_release(inst, j, i, f).expect("assigned");
        let idle = match mode {
            IdleMode::ForcedIdle => e.clone(),
            IdleMode::MaxProc => Rational::zero(),
        };
        (release, idle)
    });
    let replications: Vec<Vec<f64>> = (0..samples)
        .into_par_iter()
        .map(|rep| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(rep as u64);
            let real = Realization::draw(inst, &mut rng);
            let trace = run_plans(
                inst,
                &plans,
                |i, j| {
                    let e = inst.mean(i, j).expect("assigned");
                    idle_and_proc(mode, e, uint(real.get(i, j).expect("realized"))).1
                },
                false,
            );
            let mut out: Vec<f64> = trace
                .runs
                .iter()
                .map(|r| rational::to_f64(&r.completion))
                .collect();
            out.push(rational::to_f64(&trace.weighted_completion(inst)));
            out
        })
        .collect();
    let mut total = Accumulator::default();
    let mut per_job = vec![Accumulator::default(); inst.len()];
    for rep in &replications {
        for (acc, &c) in per_job.iter_mut().zip(rep) {
            acc.push(c);
        }
        total.push(*rep.last().expect("total appended"));
    }
    Ok(TimeEstimate {
        assignment: asg,
        total: total.finish(),
        per_job: per_job.iter().map(Accumulator::finish).collect(),
    })
}
