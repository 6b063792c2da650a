//! Dual certificates built from greedy runs, and their verification.
//!
//! `α_j` is the increase job `j` caused when the greedy placed it. `β_is` is
//! the weight still unfinished on machine `i` during slot `[s, s+1)` of the
//! expected-value schedule, integrated over the slot:
//! `β_is = Σ_k w_k · clamp(C_k - s, 0, 1)`. With integral completions this is
//! the unfinished weight at time `s`; in general it makes `Σ_{i,s} β_is`
//! equal the weighted completion time of the schedule exactly.
//!
//! Every check scans `s` up to the slot where `β_i·` vanishes. Beyond it
//! `β = 0` and each right-hand side grows with `s`, so the finite scan
//! covers all `s ≥ 0`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::greedy_list::assign_list;
use crate::greedy_time::{assign_time_with_increases, det_trace};
use crate::lp::{self, DualVariant, LpModel, Primal, VarKey};
use crate::model::{expected_completions, Instance};
use crate::rational::{self, half, uint, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertVariant {
    List,
    SpeedF,
    OnlineTime,
}

impl CertVariant {
    pub fn name(self) -> &'static str {
        match self {
            CertVariant::List => "list",
            CertVariant::SpeedF => "speedf",
            CertVariant::OnlineTime => "online",
        }
    }

    fn from_name(s: &str) -> Option<Self> {
        match s {
            "list" => Some(CertVariant::List),
            "speedf" => Some(CertVariant::SpeedF),
            "online" => Some(CertVariant::OnlineTime),
            _ => None,
        }
    }
}

/// Unscaled `(α, β)`. The dual point is `(α / scale.0, β / scale.1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualCertificate {
    pub variant: CertVariant,
    pub f: Rational,
    pub alpha: Vec<Rational>,
    /// `(machine, slot) → β`, zero entries omitted.
    pub beta: BTreeMap<(usize, u64), Rational>,
    pub scale: (Rational, Rational),
}

impl DualCertificate {
    pub fn beta(&self, i: usize, s: u64) -> Rational {
        self.beta.get(&(i, s)).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn alpha_sum(&self) -> Rational {
        self.alpha.iter().sum()
    }

    pub fn beta_sum(&self) -> Rational {
        self.beta.values().sum()
    }

    /// `Σ α / scale.0 - Σ β / scale.1`.
    pub fn objective(&self) -> Rational {
        self.alpha_sum() / &self.scale.0 - self.beta_sum() / &self.scale.1
    }

    /// First slot from which `β_i·` is zero, per machine.
    pub fn beta_end(&self, machines: usize) -> Vec<u64> {
        let mut end = vec![0; machines];
        for &(i, s) in self.beta.keys() {
            end[i] = end[i].max(s + 1);
        }
        end
    }

    /// The scaled point as values of a dual model's variables. Slots at or
    /// beyond the model horizon are dropped.
    pub fn to_point(&self, model: &LpModel) -> Vec<Rational> {
        let alpha = self
            .alpha
            .iter()
            .enumerate()
            .map(|(j, a)| (VarKey::Alpha(j), a / &self.scale.0));
        let beta = self
            .beta
            .iter()
            .map(|(&(i, s), b)| (VarKey::Beta { i, s }, b / &self.scale.1));
        let values: Vec<(VarKey, Rational)> = alpha.chain(beta).collect();
        model.point(values.iter().map(|(k, v)| (k, v)))
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("CERT v1\n");
        let _ = writeln!(out, "variant {}", self.variant.name());
        let _ = writeln!(out, "f {}", rational::fmt(&self.f));
        let _ = writeln!(out, "scale {} {}", rational::fmt(&self.scale.0), rational::fmt(&self.scale.1));
        for (j, a) in self.alpha.iter().enumerate() {
            let _ = writeln!(out, "alpha {} {}", j + 1, rational::fmt(a));
        }
        for (&(i, s), b) in &self.beta {
            let _ = writeln!(out, "beta {} {} {}", i + 1, s, rational::fmt(b));
        }
        out.push_str("end\n");
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let err = |line: usize, msg: &str| Error::Parse { line, msg: msg.to_string() };
        let mut lines = text.lines().enumerate().map(|(n, l)| (n + 1, l));
        match lines.next() {
            Some((_, "CERT v1")) => {}
            _ => return Err(err(1, "expected `CERT v1`")),
        }
        let q = |n: usize, t: &str| rational::parse(t).ok_or_else(|| err(n, "bad rational"));
        let idx = |n: usize, t: &str| {
            t.parse::<usize>()
                .ok()
                .filter(|&v| v >= 1)
                .map(|v| v - 1)
                .ok_or_else(|| err(n, "bad index"))
        };
        let (mut variant, mut f, mut scale) = (None, None, None);
        let mut alpha = Vec::new();
        let mut beta = BTreeMap::new();
        let mut ended = false;
        for (n, line) in lines.by_ref() {
            let t: Vec<&str> = line.split_whitespace().collect();
            match t.as_slice() {
                ["variant", v] => variant = Some(CertVariant::from_name(v).ok_or_else(|| err(n, "bad variant"))?),
                ["f", v] => f = Some(q(n, v)?),
                ["scale", a, b] => scale = Some((q(n, a)?, q(n, b)?)),
                ["alpha", j, v] => {
                    if idx(n, j)? != alpha.len() {
                        return Err(err(n, "alpha entries out of order"));
                    }
                    alpha.push(q(n, v)?);
                }
                ["beta", i, s, v] => {
                    let s = s.parse::<u64>().map_err(|_| err(n, "bad slot"))?;
                    beta.insert((idx(n, i)?, s), q(n, v)?);
                }
                ["end"] => {
                    ended = true;
                    break;
                }
                _ => return Err(err(n, "unrecognized line")),
            }
        }
        if !ended {
            return Err(err(text.lines().count(), "missing `end`"));
        }
        Ok(DualCertificate {
            variant: variant.ok_or_else(|| err(1, "missing variant"))?,
            f: f.ok_or_else(|| err(1, "missing f"))?,
            alpha,
            beta,
            scale: scale.ok_or_else(|| err(1, "missing scale"))?,
        })
    }
}

/// `Σ_k w_k · clamp(C_k - s, 0, 1)` per `(machine, slot)`.
fn integrated_beta(
    inst: &Instance,
    machine_of: &[usize],
    completion: &[Rational],
) -> BTreeMap<(usize, u64), Rational> {
    let mut beta: BTreeMap<(usize, u64), Rational> = BTreeMap::new();
    for (k, c) in completion.iter().enumerate() {
        let slots: u64 = c.ceil().to_integer().try_into().expect("completion fits in u64");
        for s in 0..slots {
            let part = rational::clamp01(c - uint(s));
            *beta.entry((machine_of[k], s)).or_insert_with(Rational::zero) += inst.weight(k) * part;
        }
    }
    beta.retain(|_, v| !v.is_zero());
    beta
}

/// Slack of one dual constraint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Slack {
    pub machine: usize,
    pub job: usize,
    pub slot: u64,
    pub slack: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FeasibilityReport {
    pub checked: usize,
    pub violations: Vec<Slack>,
    pub tightest: Option<Slack>,
    /// Tightest constraint of each job.
    pub by_job: Vec<Option<Slack>>,
}

impl FeasibilityReport {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Scans `slack(i, j, s)` over every permitted pair and
/// `s ∈ [first(j), max(first(j), beta_end[i])]`.
fn scan(
    inst: &Instance,
    first: impl Fn(usize) -> u64 + Sync,
    beta_end: &[u64],
    slack: impl Fn(usize, usize, u64) -> Rational + Sync,
) -> FeasibilityReport {
    let pairs: Vec<(usize, usize)> = (0..inst.len())
        .flat_map(|j| (0..inst.machines()).map(move |i| (i, j)))
        .filter(|&(i, j)| inst.permitted(i, j))
        .collect();
    let per_pair: Vec<(usize, Vec<Slack>, Option<Slack>)> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let lo = first(j);
            let hi = lo.max(beta_end[i]);
            let mut bad = Vec::new();
            let mut best: Option<Slack> = None;
            for s in lo..=hi {
                let v = slack(i, j, s);
                let entry = Slack { machine: i, job: j, slot: s, slack: v };
                if entry.slack.is_negative() {
                    bad.push(entry.clone());
                }
                if best.as_ref().is_none_or(|b| entry.slack < b.slack) {
                    best = Some(entry);
                }
            }
            ((hi - lo + 1) as usize, bad, best)
        })
        .collect();
    let mut report = FeasibilityReport {
        by_job: vec![None; inst.len()],
        ..FeasibilityReport::default()
    };
    for (n, bad, best) in per_pair {
        report.checked += n;
        report.violations.extend(bad);
        let Some(b) = best else { continue };
        let slot = &mut report.by_job[b.job];
        if slot.as_ref().is_none_or(|t| b.slack < t.slack) {
            *slot = Some(b.clone());
        }
        if report.tightest.as_ref().is_none_or(|t| b.slack < t.slack) {
            report.tightest = Some(b);
        }
    }
    report
}

/// Certificate of the online-list greedy: `α` its increases, `β` the
/// integrated unfinished weight of its expected-value WSEPT schedule.
/// Release dates play no role.
pub fn build_list_certificate(inst: &Instance) -> Result<DualCertificate> {
    let (asg, alpha) = assign_list(inst)?;
    let completion = expected_completions(inst, &asg)?;
    Ok(DualCertificate {
        variant: CertVariant::List,
        f: Rational::one(),
        alpha,
        beta: integrated_beta(inst, &asg.machine_of, &completion),
        scale: (rational::int(2), rational::int(2)),
    })
}

/// Checks `α_j/E[P_ij] ≤ β_is + w_j (s/E[P_ij] + 1)` for every permitted
/// pair and every `s ≥ 0`, which makes `(α/2, β/2)` feasible for the dual.
pub fn check_list_feasibility(inst: &Instance, cert: &DualCertificate) -> FeasibilityReport {
    let end = cert.beta_end(inst.machines());
    scan(inst, |_| 0, &end, |i, j, s| {
        let e = inst.mean(i, j).expect("permitted");
        let rhs = cert.beta(i, s) + inst.weight(j) * (uint(s) / e + Rational::one());
        rhs - &cert.alpha[j] / e
    })
}

#[derive(Debug, Clone)]
pub struct SpeedReport {
    pub cert: DualCertificate,
    /// The dual constraints of the original instance at `(α^f, β^f/f)`.
    pub feasibility: FeasibilityReport,
    /// Diagnostic: the same constraints with the `w_j/(2E[P_ij])` term dropped.
    pub dropped_term: FeasibilityReport,
    pub alg: Rational,
    pub objective: Rational,
}

impl SpeedReport {
    /// `objective = (f-1)/f² · ALG`.
    pub fn objective_matches(&self) -> bool {
        let f = &self.cert.f;
        self.objective == (f - Rational::one()) / (f * f) * &self.alg
    }
}

fn require_f2(f: &Rational) -> Result<()> {
    if *f < rational::int(2) {
        return Err(Error::BadSpeed { f: rational::fmt(f), min: 2 });
    }
    Ok(())
}

/// Speed-`f` certificate of the online-list greedy: `α^f = α/f` and `β^f`
/// integrated over the expected-value schedule compressed by `f`, checked as
/// `(α^f, β^f/f)` against the dual of the original instance.
pub fn check_speedf(inst: &Instance, f: &Rational) -> Result<SpeedReport> {
    require_f2(f)?;
    let (asg, alpha) = assign_list(inst)?;
    let completion = expected_completions(inst, &asg)?;
    let alg: Rational = completion.iter().enumerate().map(|(j, c)| inst.weight(j) * c).sum();
    let sped: Vec<Rational> = completion.iter().map(|c| c / f).collect();
    let cert = DualCertificate {
        variant: CertVariant::SpeedF,
        f: f.clone(),
        alpha: alpha.iter().map(|a| a / f).collect(),
        beta: integrated_beta(inst, &asg.machine_of, &sped),
        scale: (Rational::one(), f.clone()),
    };
    let feasibility = check_speedf_certificate(inst, &cert);
    let dropped_term = speedf_scan(inst, &cert, false);
    let objective = cert.objective();
    Ok(SpeedReport { cert, feasibility, dropped_term, alg, objective })
}

/// Checks `α^f_j/E[P_ij] ≤ β^f_is/f + w_j((s + 1/2)/E[P_ij] + 1/2)`, the
/// dual constraints of the original instance at `(α^f, β^f/f)`.
pub fn check_speedf_certificate(inst: &Instance, cert: &DualCertificate) -> FeasibilityReport {
    speedf_scan(inst, cert, true)
}

fn speedf_scan(inst: &Instance, cert: &DualCertificate, with_half: bool) -> FeasibilityReport {
    let end = cert.beta_end(inst.machines());
    let f = &cert.f;
    scan(inst, |_| 0, &end, |i, j, s| {
        let e = inst.mean(i, j).expect("permitted");
        let t = if with_half { uint(s) + half() } else { uint(s) };
        let rhs = cert.beta(i, s) / f + inst.weight(j) * (t / e + half());
        rhs - &cert.alpha[j] / e
    })
}

/// Certificate of the online-time greedy on the speed-`f` instance: `α^f_j`
/// the minimum increase evaluated with sped parameters, `β^f` integrated over
/// the deterministic sped run, counting each assigned job from time 0.
pub fn build_online_certificate(inst: &Instance, f: &Rational) -> Result<DualCertificate> {
    require_f2(f)?;
    let (asg, increases) = assign_time_with_increases(inst, f)?;
    let (_, trace) = det_trace(inst, f)?;
    let completion: Vec<Rational> = trace.runs.iter().map(|r| r.completion.clone()).collect();
    Ok(DualCertificate {
        variant: CertVariant::OnlineTime,
        f: f.clone(),
        alpha: increases.iter().map(|v| v / f).collect(),
        beta: integrated_beta(inst, &asg.machine_of, &completion),
        scale: (rational::int(3), rational::int(3) * f),
    })
}

#[derive(Debug, Clone)]
pub struct OnlineReport {
    pub cert: DualCertificate,
    /// `f·α^f_j/E[P_ij] ≤ β^f_is + 3f·w_j((s+1/2)/E[P_ij] + 1/2)`, `s ≥ r_j`.
    pub feasibility: FeasibilityReport,
    /// Cost of the deterministic sped run.
    pub alg_det: Rational,
    pub alpha_sum: Rational,
    pub beta_sum: Rational,
    /// `(Σα^f - Σβ^f/f)/3`, a lower bound on the online deterministic
    /// relaxation.
    pub lower_bound: Rational,
}

impl OnlineReport {
    pub fn beta_identity(&self) -> bool {
        self.beta_sum == self.alg_det
    }

    pub fn alpha_dominates(&self) -> bool {
        self.alg_det <= self.alpha_sum
    }

    pub fn passed(&self) -> bool {
        self.feasibility.is_feasible() && self.beta_identity() && self.alpha_dominates()
    }
}

pub fn check_online_certificate(inst: &Instance, cert: &DualCertificate) -> FeasibilityReport {
    let f = &cert.f;
    let three_f = rational::int(3) * f;
    let end = cert.beta_end(inst.machines());
    scan(inst, |j| inst.release(j), &end, |i, j, s| {
        let e = inst.mean(i, j).expect("permitted");
        let rhs = cert.beta(i, s) + inst.weight(j) * &three_f * ((uint(s) + half()) / e + half());
        rhs - f * &cert.alpha[j] / e
    })
}

pub fn check_online(inst: &Instance, f: &Rational) -> Result<OnlineReport> {
    let cert = build_online_certificate(inst, f)?;
    let feasibility = check_online_certificate(inst, &cert);
    let alg_det = crate::greedy_time::alg_time_det(inst, f)?;
    let alpha_sum = cert.alpha_sum();
    let beta_sum = cert.beta_sum();
    let lower_bound = (&alpha_sum - &beta_sum / f) / rational::int(3);
    Ok(OnlineReport { cert, feasibility, alg_det, alpha_sum, beta_sum, lower_bound })
}

#[derive(Debug, Clone)]
pub struct OnlineLpCheck {
    pub z_po: Rational,
    pub horizon: u64,
    /// `lower_bound ≤ z^{P_o}`.
    pub lower_bound_ok: bool,
    /// `ALG^f_D ≤ 3f/(f-1) · z^{P_o}`.
    pub ratio_ok: bool,
    /// The scaled certificate satisfies every constraint of the truncated
    /// online dual model.
    pub model_feasible: bool,
}

/// Solves the online deterministic relaxation and compares it with the
/// certificate in `report`.
pub fn online_lp_crosscheck(
    inst: &Instance,
    report: &OnlineReport,
    horizon: Option<u64>,
) -> Result<OnlineLpCheck> {
    let horizon = horizon.unwrap_or_else(|| lp::default_horizon(inst, Primal::POnline));
    let (_, sol) = lp::solve_primal(inst, Primal::POnline, Some(horizon))?;
    let dual = lp::build_dual(inst, DualVariant::DOnline, horizon)?;
    let point = report.cert.to_point(&dual);
    let f = &report.cert.f;
    let factor = rational::int(3) * f / (f - Rational::one());
    Ok(OnlineLpCheck {
        lower_bound_ok: report.lower_bound <= sol.value,
        ratio_ok: report.alg_det <= factor * &sol.value,
        model_feasible: dual.is_feasible(&point),
        z_po: sol.value,
        horizon,
    })
}
