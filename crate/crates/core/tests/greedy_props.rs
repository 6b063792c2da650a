mod common;

use num_traits::{One, Zero};
use proptest::prelude::*;
use stosched_core::generate::{random_instance, GenConfig};
use stosched_core::greedy_list::{alg_list_value, assign_list, incr_list};
use stosched_core::greedy_time::{
    alg_time_det, alg_time_estimate, assign_time, assign_time_sped, assign_time_with_increases,
    modified_release, simulate_original, simulate_time, IdleMode, Realization, ScheduleTrace, SegmentKind,
};
use stosched_core::model::{expected_completions, fixed_assignment_cost};
use stosched_core::oracle::{check_lemma5, blocking_instance};
use stosched_core::rational::{frac, int, uint};
use stosched_core::{Assignment, Instance, Rational};

fn prefix(inst: &Instance, len: usize) -> Instance {
    Instance::new(inst.machines(), inst.jobs()[..len].to_vec()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn increase_is_marginal_wsept_cost(seed in any::<u64>()) {
        let cfg = GenConfig { jobs: 1..=6, ..GenConfig::small() };
        let inst = random_instance(&mut common::rng(seed), &cfg);
        let (asg, alpha) = assign_list(&inst).unwrap();
        for j in 0..inst.len() {
            let before = prefix(&inst, j);
            let base = fixed_assignment_cost(&before, &Assignment::new(asg.machine_of[..j].to_vec())).unwrap();
            let after = prefix(&inst, j + 1);
            for i in 0..inst.machines() {
                let incr = incr_list(&inst, &asg.machine_of, j, i);
                let mut placed = asg.machine_of[..j].to_vec();
                placed.push(i);
                match fixed_assignment_cost(&after, &Assignment::new(placed)) {
                    Ok(cost) => prop_assert_eq!(incr, Some(cost - &base)),
                    Err(_) => prop_assert!(incr.is_none()),
                }
            }
            prop_assert_eq!(Some(alpha[j].clone()), incr_list(&inst, &asg.machine_of, j, asg.machine(j)));
        }
    }

    #[test]
    fn machines_run_in_wsept_order(seed in any::<u64>()) {
        let inst = random_instance(&mut common::rng(seed), &GenConfig::small());
        let (asg, alpha) = assign_list(&inst).unwrap();
        let completion = expected_completions(&inst, &asg).unwrap();
        for (i, jobs) in asg.jobs_per_machine(inst.machines()).iter().enumerate() {
            for &a in jobs {
                for &b in jobs {
                    if inst.wsept_cmp(i, a, b).is_lt() {
                        prop_assert!(completion[a] <= completion[b]);
                    }
                }
            }
        }
        let total: Rational = alpha.iter().sum();
        prop_assert_eq!(total, alg_list_value(&inst).unwrap());
    }

    #[test]
    fn weight_scaling_keeps_assignments(seed in any::<u64>(), num in 1i64..20, den in 1i64..20) {
        let c = frac(num, den);
        let cfg = GenConfig::small().with_releases(5);
        let inst = random_instance(&mut common::rng(seed), &cfg);
        let scaled = inst.scale_weights(&c);
        let (asg, alpha) = assign_list(&inst).unwrap();
        let (asg_c, alpha_c) = assign_list(&scaled).unwrap();
        prop_assert_eq!(asg, asg_c);
        prop_assert_eq!(alpha.iter().map(|a| a * &c).collect::<Vec<_>>(), alpha_c);
        prop_assert_eq!(alg_list_value(&inst).unwrap() * &c, alg_list_value(&scaled).unwrap());
        let f = int(2);
        let (tasg, tinc) = assign_time_with_increases(&inst, &f).unwrap();
        let (tasg_c, tinc_c) = assign_time_with_increases(&scaled, &f).unwrap();
        prop_assert_eq!(tasg, tasg_c);
        prop_assert_eq!(tinc.iter().map(|a| a * &c).collect::<Vec<_>>(), tinc_c);
    }
}

/// Segments tile each machine's timeline, every job is processed once in one
/// piece, and the machine only waits while nothing assigned is released.
fn check_trace(inst: &Instance, asg: &Assignment, real: &Realization, f: &Rational, trace: &ScheduleTrace) {
    for (i, segs) in trace.machines.iter().enumerate() {
        let mut clock = Rational::zero();
        let mut seen = Vec::new();
        for seg in segs {
            assert_eq!(seg.start, clock, "gap on machine {i}");
            assert!(seg.end > seg.start || !matches!(seg.kind, SegmentKind::Wait));
            match seg.kind {
                SegmentKind::Wait => {
                    let pending: Vec<usize> =
                        (0..inst.len()).filter(|&j| asg.machine(j) == i && !seen.contains(&j)).collect();
                    let next = pending.iter().map(|&j| modified_release(inst, j, i, f).unwrap()).min().unwrap();
                    assert_eq!(next, seg.end, "machine {i} waited past a release");
                }
                SegmentKind::ForcedIdle(j) => {
                    assert_eq!(&(&seg.end - &seg.start), inst.mean(i, j).unwrap());
                    assert!(seg.start >= modified_release(inst, j, i, f).unwrap());
                }
                SegmentKind::Processing(j) => {
                    assert!(!seen.contains(&j), "job {j} processed twice");
                    seen.push(j);
                    assert_eq!(&seg.end - &seg.start, uint(real.get(i, j).unwrap()));
                    assert_eq!(trace.runs[j].start, seg.start);
                    assert_eq!(trace.runs[j].completion, seg.end);
                    assert_eq!(trace.runs[j].machine, i);
                }
            }
            clock = seg.end.clone();
        }
        let mut expect: Vec<usize> = (0..inst.len()).filter(|&j| asg.machine(j) == i).collect();
        seen.sort_unstable();
        expect.sort_unstable();
        assert_eq!(seen, expect);
    }
}

#[test]
fn sped_traces_scale_to_original() {
    let cfg = GenConfig::small().with_releases(6);
    let mut rng = common::rng(21);
    for case in 0..100 {
        let inst = random_instance(&mut rng, &cfg);
        let real = Realization::draw(&inst, &mut rng);
        assert!(real.is_consistent(&inst));
        let f = [int(2), int(3), frac(5, 2)][case % 3].clone();
        let asg = assign_time(&inst, &f).unwrap();
        assert_eq!(asg, assign_time_sped(&inst, &f).unwrap(), "case {case}");
        let original = simulate_original(&inst, &asg, &real, &f, IdleMode::ForcedIdle).unwrap();
        let sped = simulate_time(&inst, &asg, &real, &f, IdleMode::ForcedIdle).unwrap();
        assert_eq!(sped.scaled(&f), original, "case {case}");
        assert_eq!(sped.weighted_completion(&inst) * &f, original.weighted_completion(&inst));
        check_trace(&inst, &asg, &real, &f, &original);
    }
}

#[test]
fn max_proc_mode_never_idles_on_purpose() {
    let cfg = GenConfig::small().with_releases(4);
    let mut rng = common::rng(5);
    for _ in 0..50 {
        let inst = random_instance(&mut rng, &cfg);
        let real = Realization::draw(&inst, &mut rng);
        let f = int(2);
        let asg = assign_time(&inst, &f).unwrap();
        let trace = simulate_original(&inst, &asg, &real, &f, IdleMode::MaxProc).unwrap();
        for (i, segs) in trace.machines.iter().enumerate() {
            for seg in segs {
                assert!(!matches!(seg.kind, SegmentKind::ForcedIdle(_)));
                if let SegmentKind::Processing(j) = seg.kind {
                    let p = uint(real.get(i, j).unwrap()).max(inst.mean(i, j).unwrap().clone());
                    assert_eq!(&seg.end - &seg.start, p);
                }
            }
        }
    }
}

#[test]
fn stochastic_cost_within_six_times_deterministic() {
    let cfg = GenConfig::small().with_releases(6);
    let f = int(2);
    for (n, inst) in common::instances(31, 12, &cfg).iter().enumerate() {
        let est = alg_time_estimate(inst, &f, IdleMode::ForcedIdle, 2000, n as u64).unwrap();
        let sped = est.total.scaled(0.5);
        let det = stosched_core::rational::to_f64(&alg_time_det(inst, &f).unwrap());
        assert!(sped.within(6.0 * det), "instance {n}: {sped:?} vs 6·{det}");
    }
}

#[test]
fn per_job_completion_bound() {
    let cfg = GenConfig::small().with_releases(6);
    for (n, inst) in common::instances(41, 10, &cfg).iter().enumerate() {
        let report = check_lemma5(inst, &int(2), 2000, n as u64).unwrap();
        assert!(report.passed(), "instance {n}: {:?}", report.jobs);
    }
    let report = check_lemma5(&blocking_instance(5), &Rational::one(), 3000, 9).unwrap();
    assert!(report.passed(), "{:?}", report.jobs.last());
}

#[test]
fn estimates_are_reproducible() {
    let inst = &common::instances(51, 1, &GenConfig::small().with_releases(3))[0];
    let f = int(2);
    let a = alg_time_estimate(inst, &f, IdleMode::ForcedIdle, 500, 7).unwrap();
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let b = one.install(|| alg_time_estimate(inst, &f, IdleMode::ForcedIdle, 500, 7).unwrap());
    assert_eq!(a.total, b.total);
    assert_eq!(a.per_job, b.per_job);
    let c = alg_time_estimate(inst, &f, IdleMode::ForcedIdle, 500, 8).unwrap();
    assert!(inst.is_deterministic() || c.total != a.total);
}
