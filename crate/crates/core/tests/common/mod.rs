#![allow(dead_code)]

use std::collections::BTreeMap;

use num_traits::One;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use stosched_core::dualfit::{DualCertificate, FeasibilityReport};
use stosched_core::generate::{random_instance, GenConfig};
use stosched_core::lp::StartDistribution;
use stosched_core::rational::int;
use stosched_core::{Assignment, Instance, Job, ProcDist, Rational};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `count` instances drawn from one seeded stream.
pub fn instances(seed: u64, count: usize, cfg: &GenConfig) -> Vec<Instance> {
    let mut rng = rng(seed);
    (0..count).map(|_| random_instance(&mut rng, cfg)).collect()
}

pub fn det_job(w: i64, r: u64, ps: &[Option<u64>]) -> Job {
    Job::new(int(w), r, ps.iter().map(|p| p.map(ProcDist::point)).collect())
}

/// Two machines; job 1 (w 1) takes 2 or 3, job 2 (w 2) takes 1 on either.
pub fn worked() -> Instance {
    Instance::new(2, vec![det_job(1, 0, &[Some(2), Some(3)]), det_job(2, 0, &[Some(1), Some(1)])]).unwrap()
}

/// Start-time distribution of the policy that runs each machine's jobs of
/// `asg` in WSEPT order, starting each as soon as it is released and the
/// machine is free.
pub fn policy_starts(inst: &Instance, asg: &Assignment) -> StartDistribution {
    let mut x = StartDistribution::new();
    for (i, jobs) in asg.jobs_per_machine(inst.machines()).iter().enumerate() {
        let mut free: BTreeMap<u64, Rational> = [(0, Rational::one())].into_iter().collect();
        for j in inst.wsept_order(i, jobs) {
            let mut start: BTreeMap<u64, Rational> = BTreeMap::new();
            for (t, p) in free {
                *start.entry(t.max(inst.release(j))).or_default() += p;
            }
            let mut done: BTreeMap<u64, Rational> = BTreeMap::new();
            for (t, p) in &start {
                x.insert((i, j, *t), p.clone());
                for (v, q) in inst.dist(i, j).unwrap().pmf() {
                    *done.entry(t + v).or_default() += p * q;
                }
            }
            free = done;
        }
    }
    x
}

/// Raises `α_j` of the tightest job just enough that its tightest constraint
/// ends at slack `-eps`; `coef(f, e)` is the factor of `α_j` in that slack.
pub fn mutate(
    inst: &Instance,
    cert: &DualCertificate,
    report: &FeasibilityReport,
    eps: &Rational,
    coef: impl Fn(&Rational, &Rational) -> Rational,
) -> (DualCertificate, (usize, usize, u64)) {
    let t = report.tightest.clone().expect("some constraint");
    let c = coef(&cert.f, inst.mean(t.machine, t.job).unwrap());
    let mut bad = cert.clone();
    bad.alpha[t.job] += (&t.slack + eps) / c;
    (bad, (t.machine, t.job, t.slot))
}

/// The mutated constraint is reported with slack exactly `-eps`.
pub fn caught(report: &FeasibilityReport, at: (usize, usize, u64), eps: &Rational) -> bool {
    report
        .violations
        .iter()
        .any(|v| (v.machine, v.job, v.slot) == at && v.slack == -eps.clone())
}
