//! Random instances for property tests and experiments.

use std::ops::RangeInclusive;

use num_traits::One;
use rand::seq::index::sample;
use rand::Rng;

use crate::model::{Instance, Job, ProcDist};
use crate::rational::{frac, uint, Rational};

#[derive(Debug, Clone, PartialEq)]
pub struct GenConfig {
    pub machines: RangeInclusive<usize>,
    pub jobs: RangeInclusive<usize>,
    /// Support values are drawn from `0..=max_value`.
    pub max_value: u64,
    pub max_support: usize,
    /// Probability that a (job, machine) pair is forbidden. Every job keeps
    /// at least one machine.
    pub forbid_prob: f64,
    /// Releases are drawn from `0..=max_release` and sorted.
    pub max_release: u64,
    /// All processing times are point masses.
    pub deterministic: bool,
}

impl GenConfig {
    /// Sizes the exact LP solver and the stochastic DP handle quickly.
    pub fn tiny() -> Self {
        GenConfig {
            machines: 1..=2,
            jobs: 1..=4,
            max_value: 4,
            max_support: 3,
            forbid_prob: 0.2,
            max_release: 0,
            deterministic: false,
        }
    }

    pub fn small() -> Self {
        GenConfig {
            machines: 1..=3,
            jobs: 1..=8,
            max_value: 6,
            max_support: 4,
            forbid_prob: 0.2,
            max_release: 0,
            deterministic: false,
        }
    }

    pub fn with_releases(mut self, max_release: u64) -> Self {
        self.max_release = max_release;
        self
    }

    pub fn deterministic(mut self) -> Self {
        self.deterministic = true;
        self
    }
}

/// A distribution on `0..=max_value` with mean at least 1 and small-integer
/// probability ratios.
pub fn random_dist<R: Rng + ?Sized>(rng: &mut R, max_value: u64, max_support: usize, point: bool) -> ProcDist {
    let max_value = max_value.max(1);
    loop {
        let size = if point { 1 } else { rng.random_range(1..=max_support.max(1)) };
        let size = size.min(max_value as usize + 1);
        let values = sample(rng, max_value as usize + 1, size);
        let masses: Vec<u64> = (0..size).map(|_| rng.random_range(1..=3)).collect();
        let total: u64 = masses.iter().sum();
        let pairs = values
            .iter()
            .zip(&masses)
            .map(|(v, &m)| (v as u64, uint(m) / uint(total)));
        let d = ProcDist::new(pairs).expect("probabilities sum to one");
        if *d.mean() >= Rational::one() {
            return d;
        }
    }
}

pub fn random_instance<R: Rng + ?Sized>(rng: &mut R, cfg: &GenConfig) -> Instance {
    let m = rng.random_range(cfg.machines.clone());
    let n = rng.random_range(cfg.jobs.clone());
    let mut releases: Vec<u64> = (0..n).map(|_| rng.random_range(0..=cfg.max_release)).collect();
    releases.sort_unstable();
    let jobs = releases
        .into_iter()
        .map(|r| {
            let keep = rng.random_range(0..m);
            let proc = (0..m)
                .map(|i| {
                    let forbidden = i != keep && rng.random_bool(cfg.forbid_prob);
                    (!forbidden).then(|| random_dist(rng, cfg.max_value, cfg.max_support, cfg.deterministic))
                })
                .collect();
            let w = frac(rng.random_range(1..=4), rng.random_range(1..=2));
            Job::new(w, r, proc)
        })
        .collect();
    Instance::new(m, jobs).expect("generated instance is valid")
}
