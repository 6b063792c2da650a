//! Acceptance suite: one PASS/FAIL line per criterion, with its time budget.
//! Exits nonzero if any criterion fails.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_traits::{One, Zero};
use stosched_core::dualfit::{
    build_list_certificate, check_list_feasibility, check_online, check_online_certificate, check_speedf,
    check_speedf_certificate,
};
use stosched_core::generate::{random_dist, GenConfig};
use stosched_core::greedy_list::alg_list_value;
use stosched_core::greedy_time::{
    alg_time_det, alg_time_estimate, assign_time, assign_time_sped, simulate_original, simulate_time, IdleMode,
    Realization,
};
use stosched_core::lp::{default_horizon, solve_primal, Primal};
use stosched_core::model::delta;
use stosched_core::oracle::{
    check_b1, check_b2, check_lemma5, det_opt, blocking_instance, lower_bound_ratio, stoch_opt, StoppingFamily,
    StoppingProcess,
};
use stosched_core::rational::{frac, half, int, to_f64, uint};
use stosched_core::{Instance, Rational};

const MC_SAMPLES: usize = 10_000;
const F: i64 = 2;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn identity_instances() -> Vec<Instance> {
    let cfg = GenConfig { machines: 1..=4, jobs: 1..=10, max_value: 8, max_support: 5, ..GenConfig::small() };
    common::instances(1001, 200, &cfg)
}

fn release_instances() -> Vec<Instance> {
    let cfg = GenConfig { machines: 1..=4, jobs: 1..=10, max_value: 8, max_support: 5, ..GenConfig::small() };
    common::instances(1002, 100, &cfg.with_releases(8))
}

fn exact_identity() -> Outcome {
    let insts = identity_instances();
    let bad = insts
        .iter()
        .filter(|inst| {
            let cert = build_list_certificate(inst).unwrap();
            let alg = alg_list_value(inst).unwrap();
            cert.alpha_sum() != alg || cert.beta_sum() != alg
        })
        .count();
    outcome(bad == 0, format!("{} instances, {bad} mismatches", insts.len()))
}

fn certificate_feasibility() -> Outcome {
    let plain = identity_instances();
    let released = release_instances();
    let mut violations = [0usize; 4];
    let mut caught = [0usize; 4];
    let mut mutated = 0;
    for (n, inst) in plain.iter().chain(&released).enumerate() {
        let eps = [int(1), frac(1, 1000), frac(1, 1_000_000_000)][n % 3].clone();
        mutated += 1;

        let cert = build_list_certificate(inst).unwrap();
        let report = check_list_feasibility(inst, &cert);
        violations[0] += report.violations.len();
        let (bad, at) = common::mutate(inst, &cert, &report, &eps, |_, e| e.recip());
        caught[0] += common::caught(&check_list_feasibility(inst, &bad), at, &eps) as usize;

        for (k, f) in [(1, int(2)), (2, int(3))] {
            let speed = check_speedf(inst, &f).unwrap();
            violations[k] += speed.feasibility.violations.len();
            let (bad, at) = common::mutate(inst, &speed.cert, &speed.feasibility, &eps, |_, e| e.recip());
            caught[k] += common::caught(&check_speedf_certificate(inst, &bad), at, &eps) as usize;
        }

        let online = check_online(inst, &int(F)).unwrap();
        violations[3] += online.feasibility.violations.len();
        let (bad, at) = common::mutate(inst, &online.cert, &online.feasibility, &eps, |f, e| f / e);
        caught[3] += common::caught(&check_online_certificate(inst, &bad), at, &eps) as usize;
    }
    let passed = violations.iter().all(|&v| v == 0) && caught.iter().all(|&c| c == mutated);
    outcome(
        passed,
        format!(
            "{mutated} instances; violations list/f2/f3/online {violations:?}; mutations caught {caught:?} of {mutated}"
        ),
    )
}

/// Every deterministic instance with `m` machines, `n` jobs, processing
/// times in {1,2,3} and weights in {1,2}.
fn grid(m: usize, n: usize) -> impl Iterator<Item = Instance> {
    let cells = (m * n) as u32;
    (0..3u64.pow(cells)).flat_map(move |pcode| {
        (0..1u64 << n).map(move |wcode| {
            let mut c = pcode;
            let jobs = (0..n)
                .map(|j| {
                    let ps: Vec<Option<u64>> = (0..m)
                        .map(|_| {
                            let p = c % 3 + 1;
                            c /= 3;
                            Some(p)
                        })
                        .collect();
                    common::det_job(1 + ((wcode >> j) & 1) as i64, 0, &ps)
                })
                .collect();
            Instance::new(m, jobs).unwrap()
        })
    })
}

fn list_bound() -> Outcome {
    use rayon::prelude::*;
    let mut checked = 0;
    let mut exceptions = 0;
    let mut worst = Rational::zero();
    for m in 1..=2 {
        for n in 1..=4 {
            let insts: Vec<Instance> = grid(m, n).collect();
            let ratios: Vec<Rational> = insts
                .par_iter()
                .map(|inst| alg_list_value(inst).unwrap() / det_opt(inst).unwrap())
                .collect();
            checked += ratios.len();
            exceptions += ratios.iter().filter(|r| **r > int(4)).count();
            worst = ratios.into_iter().fold(worst, Rational::max);
        }
    }
    let tiny = common::instances(1003, 100, &GenConfig::tiny());
    let mut stoch_exceptions = 0;
    for inst in &tiny {
        let bound = (int(4) + int(2) * delta(inst).unwrap()) * stoch_opt(inst).unwrap();
        stoch_exceptions += (alg_list_value(inst).unwrap() > bound) as usize;
    }
    outcome(
        exceptions == 0 && stoch_exceptions == 0,
        format!(
            "grid {checked} instances, worst ratio {worst}, {exceptions} exceptions; \
             {} stochastic instances, {stoch_exceptions} exceptions",
            tiny.len()
        ),
    )
}

fn lower_bound_growth() -> Outcome {
    let ratios: Vec<Rational> = (1..=5).map(|k| lower_bound_ratio(k).unwrap().ratio).collect();
    let increasing = ratios.windows(2).all(|w| w[0] < w[1]);
    let passed = ratios[0] == int(1) && ratios[1] == frac(11, 6) && increasing && ratios.iter().all(|r| *r < int(4));
    let shown: Vec<String> = ratios.iter().map(|r| format!("{r} ({:.4})", to_f64(r))).collect();
    outcome(passed, format!("k=1..5 ratios {}", shown.join(", ")))
}

fn lp_chain() -> Outcome {
    let insts = common::instances(1004, 50, &GenConfig::tiny());
    let mut failures = Vec::new();
    for (n, inst) in insts.iter().enumerate() {
        let factor = Rational::one() + delta(inst).unwrap() * half();
        let horizon = default_horizon(inst, Primal::P).max(default_horizon(inst, Primal::S));
        let (_, zp) = solve_primal(inst, Primal::P, Some(horizon)).unwrap();
        let (_, zs) = solve_primal(inst, Primal::S, Some(horizon)).unwrap();
        let alg = alg_list_value(inst).unwrap();
        let cert = check_speedf(inst, &int(F)).unwrap();
        if zp.value > &factor * &zs.value {
            failures.push(format!("{n}: z^P > (1+Δ/2) z^S"));
        }
        if alg > int(4) * &zp.value {
            failures.push(format!("{n}: ALG > 4 z^P"));
        }
        if cert.objective > zp.value {
            failures.push(format!("{n}: certificate above z^P"));
        }
    }
    outcome(failures.is_empty(), format!("{} instances, failures {failures:?}", insts.len()))
}

fn online_chain() -> Outcome {
    let f = int(F);
    let cfg = GenConfig::small().with_releases(6);
    let mut rng = common::rng(1005);
    let mut step1_bad = 0;
    for _ in 0..100 {
        let inst = stosched_core::generate::random_instance(&mut rng, &cfg);
        let real = Realization::draw(&inst, &mut rng);
        let asg = assign_time(&inst, &f).unwrap();
        let same = asg == assign_time_sped(&inst, &f).unwrap();
        let original = simulate_original(&inst, &asg, &real, &f, IdleMode::ForcedIdle).unwrap();
        let sped = simulate_time(&inst, &asg, &real, &f, IdleMode::ForcedIdle).unwrap();
        step1_bad += (!same || sped.scaled(&f) != original) as usize;
    }

    let insts = common::instances(1006, 50, &GenConfig::tiny().with_releases(3));
    let (mut step2_bad, mut step3_bad, mut e2e_bad) = (0, 0, 0);
    let mut worst_e2e: f64 = 0.0;
    for (n, inst) in insts.iter().enumerate() {
        let est = alg_time_estimate(inst, &f, IdleMode::ForcedIdle, MC_SAMPLES, n as u64).unwrap();
        let det = alg_time_det(inst, &f).unwrap();
        let sped = est.total.scaled(1.0 / F as f64);
        step2_bad += !sped.within(6.0 * to_f64(&det)) as usize;

        let horizon = default_horizon(inst, Primal::POnline).max(default_horizon(inst, Primal::SOnline));
        let (_, zpo) = solve_primal(inst, Primal::POnline, Some(horizon)).unwrap();
        let (_, zso) = solve_primal(inst, Primal::SOnline, Some(horizon)).unwrap();
        let d = delta(inst).unwrap();
        let factor = Rational::one() + &d * half();
        step3_bad += (det > int(6) * &zpo.value || zpo.value > factor * &zso.value) as usize;

        let ceiling = to_f64(&((int(72) + int(36) * &d) * &zso.value));
        e2e_bad += !est.total.within(ceiling) as usize;
        worst_e2e = worst_e2e.max(est.total.mean / to_f64(&zso.value));
    }
    outcome(
        step1_bad + step2_bad + step3_bad + e2e_bad == 0,
        format!(
            "step1 100 pairs {step1_bad} bad; step2 {} instances x {MC_SAMPLES} reps {step2_bad} bad; \
             step3 {step3_bad} bad; end-to-end {e2e_bad} bad (largest ALG/z^So {worst_e2e:.3})",
            insts.len()
        ),
    )
}

fn appendix() -> Outcome {
    let mut rng = common::rng(1007);
    let mut b1_bad = 0;
    let mut moment_bad = 0;
    for case in 0..500u64 {
        let d = random_dist(&mut rng, 10, 5, false);
        let starts = 1 + (case % 4) as usize;
        let weights: Vec<u64> = (0..starts).map(|k| 1 + (case * 7 + k as u64) % 5).collect();
        let total: u64 = weights.iter().sum();
        let x: Vec<(u64, Rational)> = weights
            .iter()
            .enumerate()
            .map(|(k, &w)| ((case + 3 * k as u64) % 11, uint(w) / uint(total)))
            .collect();
        b1_bad += !check_b1(&d, &x).unwrap().holds() as usize;

        let tails: Vec<Rational> = (0..=d.max_value()).map(|r| d.tail(r)).collect();
        let first: Rational = tails.iter().sum();
        let second: Rational = tails.iter().enumerate().map(|(r, t)| (uint(r as u64) + half()) * t).sum();
        moment_bad += (&first != d.mean() || second != d.second_moment() * half()) as usize;
    }
    let mut families = vec![StoppingFamily::Deterministic, StoppingFamily::Doubling];
    for eps in [0.5, 0.25, 0.125, 0.0625] {
        families.push(StoppingFamily::HeavyTail { eps });
        families.push(StoppingFamily::NearTight { eps });
    }
    let mut b2_bad = 0;
    let mut worst: f64 = 0.0;
    for (k, family) in families.iter().enumerate() {
        let report = check_b2(&StoppingProcess { family: *family, threshold: 1.0 }, MC_SAMPLES, k as u64).unwrap();
        b2_bad += !report.passed() as usize;
        worst = worst.max(report.estimate.mean);
    }
    outcome(
        b1_bad + b2_bad + moment_bad == 0,
        format!(
            "start profiles 500 cases {b1_bad} bad; {} stopping families {b2_bad} bad (largest mean {worst:.3} T); \
             moment identities 500 cases {moment_bad} bad",
            families.len()
        ),
    )
}

fn per_job_bound() -> Outcome {
    let mut insts = common::instances(1008, 29, &GenConfig::small().with_releases(6));
    insts.push(blocking_instance(10));
    let mut bad = Vec::new();
    let mut blocking = String::new();
    for (n, inst) in insts.iter().enumerate() {
        let report = check_lemma5(inst, &int(F), MC_SAMPLES, n as u64).unwrap();
        for job in report.jobs.iter().filter(|j| !j.passed()) {
            bad.push((n, job.job));
        }
        if n == insts.len() - 1 {
            let good = report.jobs.last().unwrap();
            blocking = format!("blocking instance, late job {:.3} ± {:.3} vs {}", good.completion.mean, good.completion.ci95, good.bound);
        }
    }
    outcome(bad.is_empty(), format!("{} instances, violations {bad:?}; {blocking}", insts.len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, u64, fn() -> Outcome); 8] = [
        ("exact identity suite", 5, exact_identity),
        ("certificate feasibility", 30, certificate_feasibility),
        ("list bound against optima", 60, list_bound),
        ("lower-bound family", 60, lower_bound_growth),
        ("relaxation chain", 120, lp_chain),
        ("online-time chain", 600, online_chain),
        ("auxiliary identities", 60, appendix),
        ("per-job completion bound", 300, per_job_bound),
    ];
    let mut failed = 0;
    for (k, (name, budget, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = run();
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(*budget);
        let passed = out.passed && in_time;
        failed += !passed as usize;
        println!(
            "{} {}. {name}: {} [{:.2} s of {budget} s]",
            if passed { "PASS" } else { "FAIL" },
            k + 1,
            out.detail,
            elapsed.as_secs_f64()
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
