//! Instances, processing-time distributions and WSEPT priorities.

use std::cmp::Ordering;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{self, uint, Rational};

/// Finite distribution over nonnegative integer processing times.
///
/// Probabilities are exact, strictly positive and sum to one. The support is
/// kept sorted by value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProcDist {
    pmf: Vec<(u64, Rational)>,
    mean: Rational,
    second_moment: Rational,
    /// `mean` as a machine-word fraction when it fits.
    small_mean: Option<(i128, i128)>,
}

impl ProcDist {
    pub fn new(pairs: impl IntoIterator<Item = (u64, Rational)>) -> Result<Self> {
        let mut pmf: Vec<(u64, Rational)> = pairs.into_iter().collect();
        if pmf.is_empty() {
            return Err(Error::EmptyDist);
        }
        pmf.sort_by_key(|(v, _)| *v);
        for w in pmf.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::DuplicateValue(w[0].0));
            }
        }
        if let Some((value, prob)) = pmf.iter().find(|(_, p)| !p.is_positive()) {
            return Err(Error::NonPositiveProb {
                value: *value,
                prob: rational::fmt(prob),
            });
        }
        let sum: Rational = pmf.iter().map(|(_, p)| p).sum();
        if !sum.is_one() {
            return Err(Error::ProbSum {
                sum: rational::fmt(&sum),
            });
        }
        let mean = pmf.iter().map(|(v, p)| uint(*v) * p).sum();
        let second_moment = pmf.iter().map(|(v, p)| uint(*v * *v) * p).sum();
        let small_mean = rational::to_small(&mean);
        Ok(ProcDist {
            pmf,
            mean,
            second_moment,
            small_mean,
        })
    }

    /// Deterministic processing time.
    pub fn point(value: u64) -> Self {
        ProcDist::new([(value, Rational::one())]).expect("point mass is valid")
    }

    /// Builds a distribution from `(value, numerator, denominator)` triples.
    pub fn from_fracs(pairs: &[(u64, i64, i64)]) -> Result<Self> {
        ProcDist::new(
            pairs
                .iter()
                .map(|&(v, n, d)| (v, rational::frac(n, d))),
        )
    }

    pub fn pmf(&self) -> &[(u64, Rational)] {
        &self.pmf
    }

    pub fn max_value(&self) -> u64 {
        self.pmf.last().map(|(v, _)| *v).unwrap_or(0)
    }

    pub fn is_point_mass(&self) -> bool {
        self.pmf.len() == 1
    }

    pub fn mean(&self) -> &Rational {
        &self.mean
    }

    /// `(numerator, denominator)` of the mean if both fit in `i128`.
    pub fn small_mean(&self) -> Option<(i128, i128)> {
        self.small_mean
    }

    pub fn second_moment(&self) -> &Rational {
        &self.second_moment
    }

    pub fn prob_eq(&self, value: u64) -> Rational {
        self.pmf
            .iter()
            .find(|(v, _)| *v == value)
            .map(|(_, p)| p.clone())
            .unwrap_or_else(Rational::zero)
    }

    /// `Pr(X > r)`.
    pub fn tail(&self, r: u64) -> Rational {
        self.pmf
            .iter()
            .filter(|(v, _)| *v > r)
            .map(|(_, p)| p)
            .sum()
    }

    /// Squared coefficient of variation `Var[X] / E[X]^2`.
    pub fn scv(&self) -> Result<Rational> {
        if self.mean.is_zero() {
            return Err(Error::ZeroMean);
        }
        let mean_sq = &self.mean * &self.mean;
        Ok((&self.second_moment - &mean_sq) / mean_sq)
    }

    /// Inverse-CDF sampling from a uniform draw `u` in `[0, 1)`.
    pub fn sample_with(&self, u: f64) -> u64 {
        let mut acc = 0.0;
        for (v, p) in &self.pmf {
            acc += rational::to_f64(p);
            if u < acc {
                return *v;
            }
        }
        self.max_value()
    }
}

/// `E[X]`.
pub fn expected_value(d: &ProcDist) -> Rational {
    d.mean().clone()
}

/// `Var[X] / E[X]^2`; errors with [`Error::ZeroMean`] when `E[X] = 0`.
pub fn scv(d: &ProcDist) -> Result<Rational> {
    d.scv()
}

/// A job: positive weight, integer release date and one entry per machine
/// (`None` means the job cannot run there). Entries are shared so that large
/// instances with repeated distributions stay small.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Job {
    pub weight: Rational,
    pub release: u64,
    pub proc: Vec<Option<Arc<ProcDist>>>,
}

impl Job {
    pub fn new(weight: Rational, release: u64, proc: Vec<Option<ProcDist>>) -> Self {
        Job::shared(weight, release, proc.into_iter().map(|d| d.map(Arc::new)).collect())
    }

    pub fn shared(weight: Rational, release: u64, proc: Vec<Option<Arc<ProcDist>>>) -> Self {
        Job {
            weight,
            release,
            proc,
        }
    }
}

/// Non-fatal validation finding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Warning {
    /// `E[P_ij] < 1`; analyses assume processing times scaled to at least 1.
    SmallMean { job: usize, machine: usize, mean: Rational },
}

/// Validated scheduling instance. Jobs are indexed `0..n` in arrival order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    machines: usize,
    jobs: Vec<Job>,
}

impl Instance {
    pub fn new(machines: usize, jobs: Vec<Job>) -> Result<Self> {
        if machines == 0 {
            return Err(Error::NoMachines);
        }
        let mut last_release = 0;
        for (j, job) in jobs.iter().enumerate() {
            if job.proc.len() != machines {
                return Err(Error::InvalidJob {
                    job: j,
                    reason: format!(
                        "has {} machine entries, expected {machines}",
                        job.proc.len()
                    ),
                });
            }
            if !job.weight.is_positive() {
                return Err(Error::InvalidJob {
                    job: j,
                    reason: "weight must be positive".into(),
                });
            }
            if job.release < last_release {
                return Err(Error::ReleaseOrder(j));
            }
            last_release = job.release;
            if job.proc.iter().all(Option::is_none) {
                return Err(Error::Unschedulable(j));
            }
            for (i, d) in job.proc.iter().enumerate() {
                if matches!(d, Some(d) if d.mean().is_zero()) {
                    return Err(Error::ZeroMeanPair { job: j, machine: i });
                }
            }
        }
        Ok(Instance { machines, jobs })
    }

    pub fn machines(&self) -> usize {
        self.machines
    }

    pub fn len(&self) -> usize {
        self.jobs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.jobs.is_empty()
    }

    pub fn jobs(&self) -> &[Job] {
        &self.jobs
    }

    pub fn job(&self, j: usize) -> &Job {
        &self.jobs[j]
    }

    pub fn weight(&self, j: usize) -> &Rational {
        &self.jobs[j].weight
    }

    pub fn release(&self, j: usize) -> u64 {
        self.jobs[j].release
    }

    pub fn dist(&self, i: usize, j: usize) -> Option<&ProcDist> {
        self.jobs[j].proc[i].as_deref()
    }

    pub fn permitted(&self, i: usize, j: usize) -> bool {
        self.jobs[j].proc[i].is_some()
    }

    /// `E[P_ij]`, or `None` when the pair is forbidden.
    pub fn mean(&self, i: usize, j: usize) -> Option<&Rational> {
        self.dist(i, j).map(ProcDist::mean)
    }

    pub fn try_mean(&self, i: usize, j: usize) -> Result<&Rational> {
        self.mean(i, j)
            .ok_or(Error::ForbiddenPair { job: j, machine: i })
    }

    pub fn max_release(&self) -> u64 {
        self.jobs.iter().map(|j| j.release).max().unwrap_or(0)
    }

    pub fn is_deterministic(&self) -> bool {
        self.jobs
            .iter()
            .flat_map(|j| j.proc.iter().flatten())
            .all(|d| d.is_point_mass())
    }

    pub fn warnings(&self) -> Vec<Warning> {
        let mut out = Vec::new();
        for (j, job) in self.jobs.iter().enumerate() {
            for (i, d) in job.proc.iter().enumerate() {
                if let Some(d) = d {
                    if *d.mean() < Rational::one() {
                        out.push(Warning::SmallMean {
                            job: j,
                            machine: i,
                            mean: d.mean().clone(),
                        });
                    }
                }
            }
        }
        out
    }

    /// Same instance with every release date set to zero.
    pub fn without_releases(&self) -> Instance {
        let jobs = self
            .jobs
            .iter()
            .map(|j| Job {
                release: 0,
                ..j.clone()
            })
            .collect();
        Instance {
            machines: self.machines,
            jobs,
        }
    }

    /// Same instance with every weight multiplied by `c > 0`.
    pub fn scale_weights(&self, c: &Rational) -> Instance {
        assert!(c.is_positive());
        let jobs = self
            .jobs
            .iter()
            .map(|j| Job {
                weight: &j.weight * c,
                ..j.clone()
            })
            .collect();
        Instance {
            machines: self.machines,
            jobs,
        }
    }

    /// WSEPT comparison of jobs `a` and `b` on machine `i`: `Less` means `a`
    /// goes first. Higher `w/E` first, ties by lower index. Both jobs must
    /// be permitted on `i`.
    pub fn wsept_cmp(&self, i: usize, a: usize, b: usize) -> Ordering {
        let ea = self.mean(i, a).expect("permitted pair");
        let eb = self.mean(i, b).expect("permitted pair");
        // w_a / e_a  vs  w_b / e_b, cross-multiplied
        let lhs = self.weight(a) * eb;
        let rhs = self.weight(b) * ea;
        rhs.cmp(&lhs).then(a.cmp(&b))
    }

    /// `k ∈ H(j, i)`: `k` has a strictly higher ratio on `i`, or an equal
    /// ratio and `k <= j`. Jobs forbidden on `i` are never in `H`.
    pub fn outranks(&self, i: usize, k: usize, j: usize) -> bool {
        if !self.permitted(i, k) || !self.permitted(i, j) {
            return false;
        }
        self.wsept_cmp(i, k, j) != Ordering::Greater
    }

    /// Jobs of `jobs` on machine `i`, sorted into WSEPT order.
    pub fn wsept_order(&self, i: usize, jobs: &[usize]) -> Vec<usize> {
        let mut order = jobs.to_vec();
        order.sort_by(|&a, &b| self.wsept_cmp(i, a, b));
        order
    }
}

/// Partition of the jobs into those ranked at or above `j` on a machine
/// (`high`) and the rest (`low`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrioritySplit {
    pub high: Vec<usize>,
    pub low: Vec<usize>,
}

pub fn priority_split(inst: &Instance, i: usize, j: usize) -> Result<PrioritySplit> {
    inst.try_mean(i, j)?;
    let (high, low) = (0..inst.len()).partition(|&k| inst.outranks(i, k, j));
    Ok(PrioritySplit { high, low })
}

/// Irrevocable job-to-machine map, indexed by job.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Assignment {
    pub machine_of: Vec<usize>,
}

impl Assignment {
    pub fn new(machine_of: Vec<usize>) -> Self {
        Assignment { machine_of }
    }

    pub fn machine(&self, j: usize) -> usize {
        self.machine_of[j]
    }

    /// Jobs on each machine, in index order.
    pub fn jobs_per_machine(&self, machines: usize) -> Vec<Vec<usize>> {
        let mut per = vec![Vec::new(); machines];
        for (j, &i) in self.machine_of.iter().enumerate() {
            per[i].push(j);
        }
        per
    }

    pub fn validate(&self, inst: &Instance) -> Result<()> {
        if self.machine_of.len() != inst.len() {
            return Err(Error::InvalidJob {
                job: self.machine_of.len().min(inst.len()),
                reason: "assignment does not cover every job".into(),
            });
        }
        for (j, &i) in self.machine_of.iter().enumerate() {
            if i >= inst.machines() || !inst.permitted(i, j) {
                return Err(Error::ForbiddenPair { job: j, machine: i });
            }
        }
        Ok(())
    }
}

/// Per-machine WSEPT completion times with processing times fixed to their
/// expectations. Returns `completion[j]`.
pub fn expected_completions(inst: &Instance, asg: &Assignment) -> Result<Vec<Rational>> {
    asg.validate(inst)?;
    let mut completion = vec![Rational::zero(); inst.len()];
    for (i, jobs) in asg.jobs_per_machine(inst.machines()).iter().enumerate() {
        let mut clock = Rational::zero();
        for j in inst.wsept_order(i, jobs) {
            clock += inst.try_mean(i, j)?;
            completion[j] = clock.clone();
        }
    }
    Ok(completion)
}

/// Exact expected total weighted completion time of a fixed assignment
/// sequenced by WSEPT on every machine (release dates ignored).
pub fn fixed_assignment_cost(inst: &Instance, asg: &Assignment) -> Result<Rational> {
    let completion = expected_completions(inst, asg)?;
    Ok(completion
        .iter()
        .enumerate()
        .map(|(j, c)| inst.weight(j) * c)
        .sum())
}

/// Largest squared coefficient of variation over all permitted pairs.
pub fn delta(inst: &Instance) -> Result<Rational> {
    let mut best = Rational::zero();
    for job in inst.jobs() {
        for d in job.proc.iter().flatten() {
            let v = d.scv()?;
            if v > best {
                best = v;
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, int};

    fn det_job(w: i64, ps: &[Option<u64>]) -> Job {
        Job::new(int(w), 0, ps.iter().map(|p| p.map(ProcDist::point)).collect())
    }

    #[test]
    fn expected_value_examples() {
        assert_eq!(expected_value(&ProcDist::point(1)), int(1));
        let d = ProcDist::from_fracs(&[(1, 1, 2), (3, 1, 2)]).unwrap();
        assert_eq!(expected_value(&d), int(2));
        let bad = ProcDist::from_fracs(&[(0, 99, 100), (100, 1, 100)]).unwrap();
        assert_eq!(expected_value(&bad), int(1));
    }

    #[test]
    fn scv_examples() {
        assert_eq!(scv(&ProcDist::point(5)).unwrap(), int(0));
        let d = ProcDist::from_fracs(&[(1, 1, 2), (3, 1, 2)]).unwrap();
        assert_eq!(scv(&d).unwrap(), frac(1, 4));
        let d = ProcDist::from_fracs(&[(0, 1, 2), (2, 1, 2)]).unwrap();
        assert_eq!(scv(&d).unwrap(), int(1));
        assert_eq!(scv(&ProcDist::point(0)), Err(Error::ZeroMean));
    }

    #[test]
    fn dist_validation() {
        assert!(matches!(
            ProcDist::from_fracs(&[(1, 1, 2), (2, 2, 5)]),
            Err(Error::ProbSum { .. })
        ));
        assert!(matches!(
            ProcDist::from_fracs(&[(1, 1, 1), (2, 0, 1)]),
            Err(Error::NonPositiveProb { .. })
        ));
        assert_eq!(
            ProcDist::from_fracs(&[(1, 1, 2), (1, 1, 2)]),
            Err(Error::DuplicateValue(1))
        );
        assert_eq!(ProcDist::new([]), Err(Error::EmptyDist));
    }

    #[test]
    fn tail_and_sampling() {
        let d = ProcDist::from_fracs(&[(1, 1, 3), (3, 1, 3), (4, 1, 3)]).unwrap();
        assert_eq!(d.tail(0), int(1));
        assert_eq!(d.tail(2), frac(2, 3));
        assert_eq!(d.tail(4), int(0));
        assert_eq!(d.sample_with(0.0), 1);
        assert_eq!(d.sample_with(0.5), 3);
        assert_eq!(d.sample_with(0.999), 4);
    }

    #[test]
    fn delta_examples() {
        let inst = Instance::new(1, vec![det_job(1, &[Some(2)]), det_job(1, &[Some(3)])]).unwrap();
        assert_eq!(delta(&inst).unwrap(), int(0));

        let mixed = ProcDist::from_fracs(&[(1, 1, 2), (3, 1, 2)]).unwrap();
        let inst = Instance::new(
            2,
            vec![
                Job::new(int(1), 0, vec![Some(mixed), Some(ProcDist::point(2))]),
                det_job(1, &[Some(1), None]),
            ],
        )
        .unwrap();
        assert_eq!(delta(&inst).unwrap(), frac(1, 4));

        let d = ProcDist::from_fracs(&[(0, 1, 2), (2, 1, 2)]).unwrap();
        let inst = Instance::new(1, vec![Job::new(int(1), 0, vec![Some(d)])]).unwrap();
        assert_eq!(delta(&inst).unwrap(), int(1));
    }

    #[test]
    fn instance_validation() {
        assert_eq!(
            Instance::new(2, vec![det_job(1, &[None, None])]),
            Err(Error::Unschedulable(0))
        );
        assert_eq!(Instance::new(0, vec![]), Err(Error::NoMachines));
        let mut late = det_job(1, &[Some(1)]);
        late.release = 3;
        assert_eq!(
            Instance::new(1, vec![late, det_job(1, &[Some(1)])]),
            Err(Error::ReleaseOrder(1))
        );
        assert!(matches!(
            Instance::new(1, vec![det_job(0, &[Some(1)])]),
            Err(Error::InvalidJob { .. })
        ));
        assert_eq!(
            Instance::new(1, vec![det_job(1, &[Some(0)])]),
            Err(Error::ZeroMeanPair { job: 0, machine: 0 })
        );
    }

    #[test]
    fn small_means_warn() {
        let d = ProcDist::from_fracs(&[(0, 1, 2), (1, 1, 2)]).unwrap();
        let inst = Instance::new(1, vec![Job::new(int(1), 0, vec![Some(d)])]).unwrap();
        assert_eq!(
            inst.warnings(),
            vec![Warning::SmallMean {
                job: 0,
                machine: 0,
                mean: frac(1, 2)
            }]
        );
    }

    #[test]
    fn priority_split_examples() {
        let inst = Instance::new(1, vec![det_job(2, &[Some(1)]), det_job(1, &[Some(2)])]).unwrap();
        let s = priority_split(&inst, 0, 0).unwrap();
        assert_eq!(s.high, vec![0]);
        assert_eq!(s.low, vec![1]);

        let tied = Instance::new(1, vec![det_job(1, &[Some(2)]), det_job(2, &[Some(4)])]).unwrap();
        assert_eq!(priority_split(&tied, 0, 1).unwrap().high, vec![0, 1]);
        assert_eq!(priority_split(&tied, 0, 0).unwrap().high, vec![0]);

        let single = Instance::new(1, vec![det_job(3, &[Some(1)])]).unwrap();
        let s = priority_split(&single, 0, 0).unwrap();
        assert_eq!((s.high, s.low), (vec![0], vec![]));
    }

    #[test]
    fn priority_split_forbidden() {
        let inst = Instance::new(2, vec![det_job(1, &[Some(1), None]), det_job(1, &[Some(1), Some(1)])])
            .unwrap();
        assert_eq!(
            priority_split(&inst, 1, 0),
            Err(Error::ForbiddenPair { job: 0, machine: 1 })
        );
        assert_eq!(priority_split(&inst, 1, 1).unwrap().low, vec![0]);
    }

    #[test]
    fn fixed_assignment_examples() {
        let one = Instance::new(1, vec![det_job(1, &[Some(1)])]).unwrap();
        assert_eq!(fixed_assignment_cost(&one, &Assignment::new(vec![0])).unwrap(), int(1));

        let two = Instance::new(1, vec![det_job(2, &[Some(1)]), det_job(1, &[Some(2)])]).unwrap();
        assert_eq!(fixed_assignment_cost(&two, &Assignment::new(vec![0, 0])).unwrap(), int(5));

        let worked = Instance::new(2, vec![det_job(1, &[Some(2), Some(3)]), det_job(2, &[Some(1), Some(1)])])
            .unwrap();
        assert_eq!(fixed_assignment_cost(&worked, &Assignment::new(vec![0, 1])).unwrap(), int(4));

        assert_eq!(
            fixed_assignment_cost(&one, &Assignment::new(vec![1])),
            Err(Error::ForbiddenPair { job: 0, machine: 1 })
        );
    }
}
