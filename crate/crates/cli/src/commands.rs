//! One function per subcommand, each turning a config into a [`Report`].

use std::path::Path;

use num_traits::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use stosched_core::dualfit::{build_list_certificate, check_list_feasibility, check_online, check_speedf};
use stosched_core::dualfit::{online_lp_crosscheck, FeasibilityReport};
use stosched_core::generate::random_dist;
use stosched_core::greedy_list::{alg_list_value, assign_list};
use stosched_core::greedy_time::{alg_time_det, alg_time_estimate, modified_release, IdleMode};
use stosched_core::lp::{self, default_horizon, LpModel, Primal};
use stosched_core::model::{delta, expected_completions};
use stosched_core::oracle::{self, StoppingFamily, StoppingProcess};
use stosched_core::rational::{fmt, half, int, to_f64, uint};
use stosched_core::stats::Estimate;
use stosched_core::{Instance, Rational};

use crate::report::{Report, Table};
use crate::{parse_instance, CliError, Command, LpVariant, RunConfig};

/// Dense simplex tableaus beyond this many cells are not attempted by the
/// cross-checks of `list` and `verify`.
pub const LP_CELL_LIMIT: u64 = 4_000_000;

type Result<T> = std::result::Result<T, CliError>;

pub fn load(path: &Path) -> Result<Instance> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.into(), source })?;
    parse_instance(&text)
}

pub fn run(cfg: &RunConfig) -> Result<Report> {
    cfg.validate()?;
    match &cfg.command {
        Command::List { instance } => list(cfg, &load(instance)?),
        Command::Time { instance } => time(cfg, &load(instance)?),
        Command::Lp { instance, variant, export } => lp_cmd(cfg, &load(instance)?, *variant, export.as_deref()),
        Command::Verify { instance } => verify(cfg, &load(instance)?),
        Command::Oracle { instance } => oracle_cmd(cfg, &load(instance)?),
        Command::LowerBound { k } => lower_bound(*k),
        Command::Appendix => appendix(cfg),
    }
}

fn dec(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.6}")
    } else {
        "inf".into()
    }
}

fn qdec(q: &Rational) -> String {
    dec(to_f64(q))
}

fn header(r: &mut Report, cfg: &RunConfig, inst: &Instance) {
    r.field("machines", inst.machines());
    r.field("jobs", inst.len());
    r.field("f", fmt(&cfg.f));
}

fn mode_name(mode: IdleMode) -> &'static str {
    match mode {
        IdleMode::ForcedIdle => "forced-idle",
        IdleMode::MaxProc => "max-proc",
    }
}

fn feasibility_detail(rep: &FeasibilityReport) -> String {
    match (&rep.violations.first(), &rep.tightest) {
        (Some(v), _) => format!(
            "{} of {} constraints violated, first at machine {} job {} slot {}",
            rep.violations.len(),
            rep.checked,
            v.machine + 1,
            v.job + 1,
            v.slot
        ),
        (None, Some(t)) => format!("{} constraints, tightest slack {}", rep.checked, fmt(&t.slack)),
        (None, None) => "no constraints".into(),
    }
}

/// Rough tableau size of a primal relaxation: variables times rows.
fn lp_cells(inst: &Instance, variant: Primal, horizon: u64) -> u64 {
    let vars: u64 = (0..inst.len())
        .map(|j| {
            let first = if variant.is_online() { inst.release(j) } else { 0 };
            let pairs = (0..inst.machines()).filter(|&i| inst.permitted(i, j)).count() as u64;
            pairs * horizon.saturating_sub(first)
        })
        .sum();
    let rows = inst.machines() as u64 * horizon + 2 * inst.len() as u64;
    vars.saturating_mul(rows)
}

fn common_horizon(cfg: &RunConfig, inst: &Instance, a: Primal, b: Primal) -> u64 {
    cfg.horizon.unwrap_or_else(|| default_horizon(inst, a).max(default_horizon(inst, b)))
}

fn list(cfg: &RunConfig, inst: &Instance) -> Result<Report> {
    let f = &cfg.f;
    let mut r = Report::new("list");
    header(&mut r, cfg, inst);
    let (asg, alpha) = assign_list(inst)?;
    let alg = alg_list_value(inst)?;
    let d = delta(inst)?;
    let cert = build_list_certificate(inst)?;
    let speed = check_speedf(inst, f)?;
    let completion = expected_completions(inst, &asg)?;
    r.field("delta", fmt(&d));
    r.field("alg", fmt(&alg));
    r.field("alpha_sum", fmt(&cert.alpha_sum()));
    r.field("beta_sum", fmt(&cert.beta_sum()));
    r.field("dual_objective", fmt(&speed.objective));
    if inst.max_release() > 0 {
        r.field("note", "release dates are ignored by the list model");
    }

    r.check("alpha sum equals ALG", cert.alpha_sum() == alg, format!("{} vs {}", fmt(&cert.alpha_sum()), fmt(&alg)));
    r.check("beta sum equals ALG", cert.beta_sum() == alg, format!("{} vs {}", fmt(&cert.beta_sum()), fmt(&alg)));
    let list_rep = check_list_feasibility(inst, &cert);
    r.check("list certificate feasible", list_rep.is_feasible(), feasibility_detail(&list_rep));
    r.check("speed-f certificate feasible", speed.feasibility.is_feasible(), feasibility_detail(&speed.feasibility));
    r.check(
        "dual objective equals (f-1)/f^2 ALG",
        speed.objective_matches(),
        format!("{} with ALG {}", fmt(&speed.objective), fmt(&speed.alg)),
    );

    let horizon = common_horizon(cfg, inst, Primal::P, Primal::S);
    let cells = lp_cells(inst, Primal::S, horizon).max(lp_cells(inst, Primal::P, horizon));
    if cells > LP_CELL_LIMIT {
        r.skip("LP cross-checks", format!("tableau of about {cells} cells exceeds {LP_CELL_LIMIT}"));
    } else {
        let (_, zp) = lp::solve_primal(inst, Primal::P, Some(horizon))?;
        let (_, zs) = lp::solve_primal(inst, Primal::S, Some(horizon))?;
        r.field("horizon", horizon);
        r.field("z_p", fmt(&zp.value));
        r.field("z_s", fmt(&zs.value));
        let ratio = f * f / (f - Rational::one());
        let relax = Rational::one() + &d * half();
        r.check(
            "ALG <= f^2/(f-1) z^P",
            alg <= &ratio * &zp.value,
            format!("{} <= {}", fmt(&alg), fmt(&(&ratio * &zp.value))),
        );
        r.check(
            "ALG <= f^2/(f-1) (1+delta/2) z^S",
            alg <= &ratio * &relax * &zs.value,
            format!("{} <= {}", fmt(&alg), fmt(&(&ratio * &relax * &zs.value))),
        );
        r.check(
            "z^P <= (1+delta/2) z^S",
            zp.value <= &relax * &zs.value,
            format!("{} <= {}", fmt(&zp.value), fmt(&(&relax * &zs.value))),
        );
        r.check(
            "dual objective <= z^P",
            speed.objective <= zp.value,
            format!("{} <= {}", fmt(&speed.objective), fmt(&zp.value)),
        );
    }

    let mut t = Table::new("assignment", &["job", "machine", "alpha", "expected_completion"]);
    for j in 0..inst.len() {
        t.push(vec![(j + 1).to_string(), (asg.machine(j) + 1).to_string(), fmt(&alpha[j]), fmt(&completion[j])]);
    }
    r.tables.push(t);
    Ok(r)
}

fn time(cfg: &RunConfig, inst: &Instance) -> Result<Report> {
    let f = &cfg.f;
    let mut r = Report::new("time");
    header(&mut r, cfg, inst);
    r.field("mode", mode_name(cfg.mode));
    r.field("samples", cfg.samples);
    r.field("seed", cfg.seed);
    let est = alg_time_estimate(inst, f, cfg.mode, cfg.samples, cfg.seed)?;
    let det = alg_time_det(inst, f)?;
    let fl = to_f64(f);
    let sped = est.total.scaled(1.0 / fl);
    r.field("alg_det_sped", fmt(&det));
    r.field("alg_mean", dec(est.total.mean));
    r.field("alg_ci95", dec(est.total.ci95));
    r.field("alg_sped_mean", dec(sped.mean));

    let forced = cfg.mode == IdleMode::ForcedIdle;
    if forced && *f == int(2) {
        let bound = 6.0 * to_f64(&det);
        r.check(
            "sped estimate <= 6 deterministic sped cost",
            sped.within(bound),
            format!("{} <= {} + 3 x {}", dec(sped.mean), dec(bound), dec(sped.ci95)),
        );
    }
    let bounds = if forced { Some(oracle::job_bounds(inst, f, &est)?) } else { None };
    if let Some(b) = &bounds {
        let failing = b.jobs.iter().filter(|j| !j.passed()).count();
        r.check(
            "per-job completion bound",
            failing == 0,
            format!("{failing} of {} jobs above 4 R + 2 sum E[P] + 3 ci95", inst.len()),
        );
    }
    let mut t = Table::new(
        "jobs",
        &["job", "machine", "modified_release", "mean_completion", "ci95", "bound", "status"],
    );
    for j in 0..inst.len() {
        let i = est.assignment.machine(j);
        let c = &est.per_job[j];
        let (bound, status) = match &bounds {
            Some(b) => (fmt(&b.jobs[j].bound), if b.jobs[j].passed() { "PASS" } else { "FAIL" }),
            None => ("-".into(), "-"),
        };
        t.push(vec![
            (j + 1).to_string(),
            (i + 1).to_string(),
            fmt(&modified_release(inst, j, i, f)?),
            dec(c.mean),
            dec(c.ci95),
            bound,
            status.into(),
        ]);
    }
    r.tables.push(t);
    Ok(r)
}

fn lp_cmd(cfg: &RunConfig, inst: &Instance, variant: LpVariant, export: Option<&Path>) -> Result<Report> {
    let mut r = Report::new("lp");
    r.field("machines", inst.machines());
    r.field("jobs", inst.len());
    let (model, name): (LpModel, &str) = match variant {
        LpVariant::Primal(p) => {
            let h = cfg.horizon.unwrap_or_else(|| default_horizon(inst, p));
            (lp::build_primal(inst, p, h)?, p.name())
        }
        LpVariant::Dual(d) => {
            let h = cfg.horizon.unwrap_or_else(|| default_horizon(inst, d.primal()));
            (lp::build_dual(inst, d, h)?, d.name())
        }
    };
    r.field("variant", name);
    r.field("horizon", model.horizon);
    r.field("variables", model.vars.len());
    r.field("constraints", model.constraints.len());
    if let Some(path) = export {
        std::fs::write(path, lp::export_lp(&model)).map_err(|source| CliError::Io { path: path.into(), source })?;
        r.field("exported", path.display());
    }
    let sol = lp::solve_lp(&model)?;
    r.field("optimum", fmt(&sol.value));
    r.field("optimum_decimal", qdec(&sol.value));
    let cert = lp::certify(&model, &sol);
    r.check("optimality certified by duals", cert.is_ok(), cert.err().unwrap_or_else(|| "zero gap".into()));
    let mut t = Table::new("solution", &["variable", "value"]);
    for (var, x) in model.vars.iter().zip(&sol.x) {
        if !x.is_zero() {
            t.push(vec![var.key.to_string(), fmt(x)]);
        }
    }
    r.tables.push(t);
    Ok(r)
}

fn verify(cfg: &RunConfig, inst: &Instance) -> Result<Report> {
    let f = &cfg.f;
    let mut r = Report::new("verify");
    header(&mut r, cfg, inst);

    let alg = alg_list_value(inst)?;
    let cert = build_list_certificate(inst)?;
    r.field("alg_list", fmt(&alg));
    r.check("list: alpha sum equals ALG", cert.alpha_sum() == alg, fmt(&cert.alpha_sum()));
    r.check("list: beta sum equals ALG", cert.beta_sum() == alg, fmt(&cert.beta_sum()));
    let rep = check_list_feasibility(inst, &cert);
    r.check("list: (alpha/2, beta/2) feasible", rep.is_feasible(), feasibility_detail(&rep));

    let speed = check_speedf(inst, f)?;
    r.field("speedf_objective", fmt(&speed.objective));
    r.check("speed-f: feasible for the dual", speed.feasibility.is_feasible(), feasibility_detail(&speed.feasibility));
    r.check("speed-f: objective equals (f-1)/f^2 ALG", speed.objective_matches(), fmt(&speed.objective));

    let online = check_online(inst, f)?;
    r.field("alg_time_det_sped", fmt(&online.alg_det));
    r.field("online_alpha_sum", fmt(&online.alpha_sum));
    r.field("online_beta_sum", fmt(&online.beta_sum));
    r.field("online_lower_bound", fmt(&online.lower_bound));
    r.check("online: beta sum equals deterministic cost", online.beta_identity(), fmt(&online.beta_sum));
    r.check("online: alpha sum dominates deterministic cost", online.alpha_dominates(), fmt(&online.alpha_sum));
    r.check("online: certificate feasible", online.feasibility.is_feasible(), feasibility_detail(&online.feasibility));

    let horizon = cfg.horizon.unwrap_or_else(|| default_horizon(inst, Primal::POnline));
    let cells = lp_cells(inst, Primal::POnline, horizon);
    if cells > LP_CELL_LIMIT {
        r.skip("online: LP cross-checks", format!("tableau of about {cells} cells exceeds {LP_CELL_LIMIT}"));
    } else {
        let lp = online_lp_crosscheck(inst, &online, Some(horizon))?;
        r.field("z_po", fmt(&lp.z_po));
        r.check("online: lower bound <= z^P_o", lp.lower_bound_ok, format!("{} <= {}", fmt(&online.lower_bound), fmt(&lp.z_po)));
        r.check("online: ALG^f_D <= 3f/(f-1) z^P_o", lp.ratio_ok, fmt(&online.alg_det));
        r.check("online: certificate satisfies truncated dual", lp.model_feasible, format!("horizon {horizon}"));
    }
    Ok(r)
}

fn oracle_cmd(cfg: &RunConfig, inst: &Instance) -> Result<Report> {
    let mut r = Report::new("oracle");
    header(&mut r, cfg, inst);
    let d = delta(inst)?;
    let (opt, method) = if inst.is_deterministic() {
        (oracle::det_opt(inst)?, "deterministic search")
    } else {
        (oracle::stoch_opt(inst)?, "stochastic dynamic program")
    };
    r.field("method", method);
    r.field("delta", fmt(&d));
    r.field("opt", fmt(&opt));
    if inst.max_release() == 0 {
        let alg = alg_list_value(inst)?;
        let bound = (int(4) + int(2) * &d) * &opt;
        r.field("alg_list", fmt(&alg));
        r.field("ratio", ratio_text(&alg, &opt));
        r.check("ALG <= (4+2 delta) OPT", alg <= bound, format!("{} <= {}", fmt(&alg), fmt(&bound)));
        if cfg.f >= int(2) {
            let speed = check_speedf(inst, &cfg.f)?;
            let ceiling = (Rational::one() + &d * half()) * &opt;
            r.check(
                "dual objective <= (1+delta/2) OPT",
                speed.objective <= ceiling,
                format!("{} <= {}", fmt(&speed.objective), fmt(&ceiling)),
            );
        }
    } else {
        let est = alg_time_estimate(inst, &cfg.f, cfg.mode, cfg.samples, cfg.seed)?;
        let bound = to_f64(&((int(72) + int(36) * &d) * &opt));
        r.field("alg_time_mean", dec(est.total.mean));
        r.field("alg_time_ci95", dec(est.total.ci95));
        r.field("ratio", if opt.is_zero() { "inf".into() } else { dec(est.total.mean / to_f64(&opt)) });
        r.check(
            "ALG <= (72+36 delta) OPT",
            est.total.within(bound),
            format!("{} <= {} + 3 x {}", dec(est.total.mean), dec(bound), dec(est.total.ci95)),
        );
    }
    Ok(r)
}

fn ratio_text(a: &Rational, b: &Rational) -> String {
    if b.is_zero() {
        "inf".into()
    } else {
        fmt(&(a / b))
    }
}

fn lower_bound(k: usize) -> Result<Report> {
    let mut r = Report::new("lowerbound");
    r.field("k", k);
    let rows = (1..=k).map(oracle::lower_bound_ratio).collect::<stosched_core::Result<Vec<_>>>()?;
    let last = rows.last().ok_or_else(|| CliError::Config("k must be at least 1".into()))?;
    r.field("m", last.m);
    r.field("greedy", fmt(&last.greedy));
    r.field("opt", fmt(&last.opt));
    r.field("ratio", fmt(&last.ratio));
    r.field("ratio_decimal", qdec(&last.ratio));
    let increasing = rows.windows(2).all(|w| w[0].ratio < w[1].ratio);
    r.check("ratios strictly increasing", increasing, format!("{} sizes", rows.len()));
    r.check("ratios below 4", rows.iter().all(|x| x.ratio < int(4)), format!("largest {}", qdec(&last.ratio)));
    let confirmed = rows.iter().all(|x| x.opt_confirmed != Some(false));
    r.check("closed-form optimum matches search", confirmed, "where the search is tractable");
    let mut t = Table::new("family", &["k", "m", "greedy", "opt", "ratio", "ratio_decimal", "opt_searched"]);
    for x in &rows {
        let searched = match x.opt_confirmed {
            Some(true) => "match",
            Some(false) => "MISMATCH",
            None => "-",
        };
        t.push(vec![
            x.k.to_string(),
            x.m.to_string(),
            fmt(&x.greedy),
            fmt(&x.opt),
            fmt(&x.ratio),
            qdec(&x.ratio),
            searched.into(),
        ]);
    }
    r.tables.push(t);
    Ok(r)
}

fn appendix(cfg: &RunConfig) -> Result<Report> {
    const CASES: usize = 500;
    let mut r = Report::new("appendix");
    r.field("seed", cfg.seed);
    r.field("samples", cfg.samples);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut profile_bad = 0;
    let mut moment_bad = 0;
    for _ in 0..CASES {
        use rand::Rng;
        let d = random_dist(&mut rng, 10, 5, false);
        let starts = rng.random_range(1..=4);
        let weights: Vec<u64> = (0..starts).map(|_| rng.random_range(1..=5)).collect();
        let total: u64 = weights.iter().sum();
        let x: Vec<(u64, Rational)> = weights.iter().map(|&w| (rng.random_range(0..=10), uint(w) / uint(total))).collect();
        profile_bad += !oracle::check_b1(&d, &x)?.holds() as usize;

        let tails: Vec<Rational> = (0..=d.max_value()).map(|v| d.tail(v)).collect();
        let first: Rational = tails.iter().sum();
        let second: Rational = tails.iter().enumerate().map(|(v, t)| (uint(v as u64) + half()) * t).sum();
        moment_bad += (&first != d.mean() || second != d.second_moment() * half()) as usize;
    }
    r.check("start-profile completion identity", profile_bad == 0, format!("{profile_bad} of {CASES} cases differ"));
    r.check("tail-sum moment identities", moment_bad == 0, format!("{moment_bad} of {CASES} cases differ"));

    let mut families = vec![("deterministic", StoppingFamily::Deterministic, 0.0), ("doubling", StoppingFamily::Doubling, 0.0)];
    for eps in [0.5, 0.25, 0.125, 0.0625] {
        families.push(("heavy-tail", StoppingFamily::HeavyTail { eps }, eps));
        families.push(("near-tight", StoppingFamily::NearTight { eps }, eps));
    }
    let mut t = Table::new("stopped_sums", &["family", "eps", "mean", "ci95", "bound", "status"]);
    let mut bad = 0;
    for (k, (name, family, eps)) in families.into_iter().enumerate() {
        let process = StoppingProcess { family, threshold: 1.0 };
        let rep = oracle::check_b2(&process, cfg.samples, cfg.seed.wrapping_add(k as u64))?;
        bad += !rep.passed() as usize;
        let e: &Estimate = &rep.estimate;
        t.push(vec![
            name.into(),
            if eps == 0.0 { "-".into() } else { eps.to_string() },
            dec(e.mean),
            dec(e.ci95),
            dec(rep.bound),
            if rep.passed() { "PASS" } else { "FAIL" }.into(),
        ]);
    }
    r.check("stopped sums below 4T", bad == 0, format!("{bad} of {} families above", t.rows.len()));
    r.tables.push(t);
    Ok(r)
}
