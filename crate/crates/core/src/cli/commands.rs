//! The `simulate`, `billiard` and `verify` subcommands.

use std::collections::BTreeMap;
use std::path::Path;

use rand::Rng as _;
use rayon::prelude::*;
use serde_json::json;

use super::config::{config_error, RunConfig};
use super::output::{write_checks_csv, write_json, Check, OutputFormat, RunReport, Table};
use super::CliError;
use crate::billiard::{
    map_vs_oracle, orbit_caustics, poncelet_detect, run_orbit, shoot_periodic, BilliardSpec, ImpactState,
};
use crate::dynamics::{
    constraint_residuals, energy, integrate, integrate_with, project, torus_reduce, IntegrateOptions, PhaseState,
    SystemKind, SystemSpec,
};
use crate::error::Error;
use crate::lax::{
    build_lax, commutation_suite, integral_family, lax_residual, listed_pairs, peta_residual, rank_dimensions,
    IntegralFamily, LaxSize,
};
use crate::potentials::{bd_residual, delta_omega, hierarchy_eval, rosochatius_eval, RosochatiusDegree};
use crate::sampling::{point_on_ellipsoid, random_impact, random_invariant_double, random_state, rng, Rng};

/// Shared inputs of every subcommand.
pub struct Context<'a> {
    pub config: &'a RunConfig,
    pub seed: u64,
    pub out: &'a Path,
    pub format: OutputFormat,
    pub tol: BTreeMap<String, f64>,
}

impl Context<'_> {
    fn tol(&self, name: &str) -> f64 {
        self.tol[name]
    }
}

const INITIAL_TOL: f64 = 1e-6;

fn initial_state(ctx: &Context, sys: &SystemSpec) -> Result<PhaseState, CliError> {
    match &ctx.config.initial {
        Some(init) => {
            let s = PhaseState::new(init.x.clone(), init.y.clone());
            s.check_len(sys).map_err(|e| config_error("initial", e))?;
            let worst = constraint_residuals(sys, &s)?.into_iter().fold(0.0f64, |m, r| m.max(r.abs()));
            if !(worst <= INITIAL_TOL) {
                return Err(config_error("initial", format!("state is off the constraint manifold by {worst:e}")));
            }
            Ok(project(sys, &s)?)
        }
        None => Ok(random_state(&mut rng(ctx.seed), sys)?),
    }
}

/// Named integral columns for the selected family.
fn integral_columns(sys: &SystemSpec, fam: &IntegralFamily, mode: &str) -> Result<Vec<(String, f64)>, Error> {
    let grouped = mode == "grouped" || (mode == "auto" && fam.f.is_none());
    let mut out = vec![];
    if grouped {
        for (s, v) in fam.f_tilde.iter().enumerate() {
            out.push((format!("ft_{s}"), *v));
        }
        for (s, v) in fam.p_s.iter().enumerate() {
            out.push((format!("P_{s}"), *v));
        }
        for p in &fam.p_pairs {
            out.push((format!("P_{}_{}_{}", p.group, p.i, p.j), p.value));
        }
        for (s, ls) in fam.l_sk.iter().enumerate() {
            for (k, v) in ls.iter().enumerate() {
                out.push((format!("L_{s}_{}", k + 1), *v));
            }
        }
    } else {
        for (i, v) in fam.f_values()?.iter().enumerate() {
            out.push((format!("f_{i}"), *v));
        }
    }
    if let Some(g) = &fam.g {
        for (i, v) in g.iter().enumerate() {
            out.push((format!("g_{i}"), *v));
        }
    }
    if let Some(j) = fam.j {
        if sys.kind == SystemKind::Jacobi || sys.kind == SystemKind::ComplexJacobi {
            out.push(("J".into(), j));
        }
    }
    Ok(out)
}

fn rel_drift(v: f64, v0: f64) -> f64 {
    (v - v0).abs() / (1.0 + v0.abs())
}

fn dist(a: &PhaseState, b: &PhaseState) -> f64 {
    a.flat().iter().zip(b.flat()).fold(0.0f64, |m, (u, v)| m.max((u - v).abs()))
}

pub fn simulate(ctx: &Context) -> Result<RunReport, CliError> {
    let sys = ctx.config.system_spec()?;
    let mode = ctx.config.system.as_ref().map_or("auto", |s| s.integrals.as_str());
    let s0 = initial_state(ctx, &sys)?;
    let ic = &ctx.config.integrator;
    let traj = integrate_with(&sys, &s0, ic.t, ic.h, IntegrateOptions { record_every: ic.record_every, project: true })?;
    let n = s0.x.len();
    let mut names: Vec<String> = vec![];
    let mut table: Option<Table> = None;
    let mut first: Vec<f64> = vec![];
    let mut drift: Vec<f64> = vec![];
    for s in &traj {
        let cons = constraint_residuals(&sys, s)?;
        let h = energy(&sys, s)?;
        let cols = integral_columns(&sys, &integral_family(&sys, s)?, mode)?;
        let tab = table.get_or_insert_with(|| {
            names = std::iter::once("H".to_string()).chain(cols.iter().map(|c| c.0.clone())).collect();
            let header = ["t".to_string()]
                .into_iter()
                .chain((0..n).map(|i| format!("x_{i}")))
                .chain((0..n).map(|i| format!("y_{i}")))
                .chain(["F1".into(), "F2".into()])
                .chain(names.iter().cloned())
                .collect();
            Table::new(header)
        });
        let values: Vec<f64> = std::iter::once(h).chain(cols.iter().map(|c| c.1)).collect();
        if first.is_empty() {
            first = values.clone();
            drift = vec![0.0; values.len()];
        }
        for (d, (v, v0)) in drift.iter_mut().zip(values.iter().zip(&first)) {
            *d = d.max(rel_drift(*v, *v0));
        }
        let mut row = vec![s.t];
        row.extend(&s.x);
        row.extend(&s.y);
        row.push(cons.first().copied().unwrap_or(0.0));
        row.push(cons.get(1).copied().unwrap_or(0.0));
        row.extend(values);
        tab.rows.push(row);
    }
    let table = table.expect("trajectory includes the initial state");
    table.write(ctx.out, "trajectory", ctx.format)?;

    let mut checks: Vec<Check> =
        names.iter().zip(&drift).map(|(name, d)| Check::below(format!("drift.{name}"), *d, ctx.tol("drift"))).collect();
    let mut details = json!({
        "system": sys.kind.name(),
        "steps": traj.len() - 1,
        "drifts": names.iter().cloned().zip(drift.iter().copied()).collect::<BTreeMap<_, _>>(),
    });
    if let Some(period) = ic.period {
        let at = traj
            .iter()
            .min_by(|a, b| (a.t - period).abs().total_cmp(&(b.t - period).abs()))
            .expect("nonempty trajectory");
        let d = dist(at, &s0);
        details["return"] = json!({ "time": at.t, "distance": d });
        checks.push(Check::below("return", d, ctx.tol("return")));
    }
    let report = RunReport::new("simulate", ctx.seed, checks, details);
    write_json(&ctx.out.join("report.json"), &report)?;
    Ok(report)
}

fn billiard_initial(ctx: &Context, spec: &BilliardSpec) -> Result<(ImpactState, Option<f64>), CliError> {
    let b = ctx.config.billiard.as_ref().expect("billiard section checked");
    if let Some(shoot) = &b.shoot {
        let (eta, s) = shoot_periodic(spec, shoot.period, shoot.winding)?;
        return Ok((s, Some(eta)));
    }
    match (&b.x, &b.y) {
        (Some(x), Some(y)) => {
            let s = ImpactState::new(x.clone(), y.clone());
            s.validate(spec)?;
            Ok((s, None))
        }
        (None, None) => Ok((random_impact(&mut rng(ctx.seed), spec), None)),
        _ => Err(config_error("billiard", "x and y must be given together")),
    }
}

pub fn billiard(ctx: &Context) -> Result<RunReport, CliError> {
    let spec = ctx.config.billiard_spec()?;
    let b = ctx.config.billiard.as_ref().expect("billiard spec built");
    let (s0, shot_eta) = billiard_initial(ctx, &spec)?;
    let orbit = run_orbit(&spec, &s0, b.bounces)?;
    let n = spec.dim();

    let mut impacts = Table::new(
        ["k".to_string()]
            .into_iter()
            .chain((0..n).map(|i| format!("x_{i}")))
            .chain((0..n).map(|i| format!("y_{i}")))
            .chain(["J".into()])
            .collect(),
    )
    .with_int_cols(&[0]);
    for (k, s) in orbit.impacts.iter().enumerate() {
        let mut row = vec![k as f64];
        row.extend(&s.x);
        row.extend(&s.y);
        row.push(spec.joachimsthal(s));
        impacts.rows.push(row);
    }
    impacts.write(ctx.out, "impacts", ctx.format)?;

    let mut checks = vec![];
    let mut details = json!({ "dim": n, "bounces": b.bounces, "lambdas": orbit.lambdas });
    if let Some(eta) = shot_eta {
        details["shoot_eta"] = json!(eta);
    }
    if spec.is_distinct() {
        let caustics = orbit_caustics(&spec, &orbit)?;
        let m = caustics.expected_count;
        let mut lax = Table::new(
            ["k".to_string(), "det_drift".into(), "conjugation".into()]
                .into_iter()
                .chain((0..m).map(|l| format!("eta_{l}")))
                .collect(),
        )
        .with_int_cols(&[0]);
        for (k, (rep, eta)) in orbit.lax.iter().zip(&orbit.caustics).enumerate() {
            let mut row = vec![k as f64, rep.det_drift, rep.conjugation_residual];
            row.extend((0..m).map(|l| if eta.len() == m { eta[l] } else { f64::NAN }));
            lax.rows.push(row);
        }
        lax.write(ctx.out, "lax", ctx.format)?;
        let det = orbit.lax.iter().fold(0.0f64, |w, r| w.max(r.det_drift));
        checks.push(Check::below("det_drift", det, ctx.tol("det_drift")));
        checks.push(Check::below("caustic_count_mismatches", caustics.count_mismatches as f64, 0.0));
        checks.push(Check::below("caustic_drift", caustics.max_drift, ctx.tol("caustic_drift")));
        if let Some(t) = caustics.tangency_max {
            checks.push(Check::below("tangency", t, ctx.tol("tangency")));
        }
        details["caustics"] = serde_json::to_value(&caustics).map_err(|e| CliError::Io(e.to_string()))?;
    }
    if b.oracle {
        let dev = map_vs_oracle(&spec, &s0, b.bounces)?;
        let worst = dev.iter().fold(0.0f64, |w, d| w.max(*d));
        checks.push(Check::below("map_oracle", worst, ctx.tol("map_oracle")));
    }
    if let Some(p) = &b.poncelet {
        let rep = poncelet_detect(&spec, &s0, p.max_n, p.tol.min(ctx.tol("closure")))?;
        checks.push(Check {
            name: "poncelet".into(),
            value: rep.period.map_or(f64::NAN, |v| v as f64),
            threshold: p.max_n as f64,
            pass: rep.closes(),
        });
        details["poncelet"] = serde_json::to_value(&rep).map_err(|e| CliError::Io(e.to_string()))?;
    }
    let report = RunReport::new("billiard", ctx.seed, checks, details);
    write_json(&ctx.out.join("report.json"), &report)?;
    Ok(report)
}

pub const SUITES: [&str; 6] = [
    "lax-residual",
    "bracket-commutation",
    "bd-residual",
    "hierarchy-identities",
    "reduction-compatibility",
    "rank-dimension",
];

/// Observed convergence order required of the Lax residual under halving.
const MIN_ORDER: f64 = 1.8;

fn draw_states(
    seed: u64,
    count: usize,
    mut f: impl FnMut(&mut Rng) -> Result<PhaseState, Error>,
) -> Result<Vec<PhaseState>, Error> {
    let mut r = rng(seed);
    (0..count).map(|_| f(&mut r)).collect()
}

fn max_of(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, f64::max)
}

/// Spectral sample point away from the axes.
fn sample_lambda(axes: &[f64]) -> f64 {
    0.5 * axes.iter().copied().fold(f64::INFINITY, f64::min)
}

fn require_real(sys: &SystemSpec, suite: &str) -> Result<(), CliError> {
    if sys.kind.is_real_ellipsoid() {
        Ok(())
    } else {
        Err(config_error("verify.suites", format!("{suite} needs a real ellipsoid system, got {}", sys.kind.name())))
    }
}

fn suite_lax(sys: &SystemSpec, seed: u64, count: usize, tol: f64) -> Result<Vec<Check>, CliError> {
    let lam = sample_lambda(sys.axes());
    let mut sizes = vec![LaxSize::Small];
    if matches!(sys.kind, SystemKind::Jacobi | SystemKind::DoubleJacobi) {
        sizes.push(LaxSize::Big);
    }
    let mut checks = vec![];
    for (si, size) in sizes.into_iter().enumerate() {
        let states = draw_states(seed + si as u64, count, |r| {
            if size == LaxSize::Big && sys.kind == SystemKind::DoubleJacobi {
                random_invariant_double(r, sys)
            } else {
                random_state(r, sys)
            }
        })?;
        let per: Vec<(f64, f64)> = states
            .par_iter()
            .map(|s| -> Result<(f64, f64), Error> {
                build_lax(sys, s, size)?;
                let fine = lax_residual(sys, s, size, lam, 1e-5)?;
                let r1 = lax_residual(sys, s, size, lam, 2e-3)?;
                let r2 = lax_residual(sys, s, size, lam, 1e-3)?;
                Ok((fine, (r1 / r2).log2()))
            })
            .collect::<Result<_, _>>()?;
        let tag = if size == LaxSize::Big { "big" } else { "small" };
        checks.push(Check::below(format!("lax-residual.{tag}"), max_of(per.iter().map(|p| p.0)), tol));
        let order = per.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        checks.push(Check::at_least(format!("lax-residual.{tag}.order"), order, MIN_ORDER));
    }
    Ok(checks)
}

fn suite_brackets(sys: &SystemSpec, seed: u64, count: usize, tol: f64) -> Result<Vec<Check>, CliError> {
    require_real(sys, "bracket-commutation")?;
    let pairs = listed_pairs(sys);
    let states = draw_states(seed, count, |r| random_state(r, sys))?;
    let worst: Vec<f64> = states
        .par_iter()
        .map(|s| Ok(max_of(commutation_suite(sys, s, &pairs)?.into_iter().map(|r| r.value))))
        .collect::<Result<_, Error>>()?;
    Ok(vec![Check::below(format!("bracket-commutation.{}-pairs", pairs.len()), max_of(worst), tol)])
}

/// The separability identity holds on all of `R^n`; sample where the
/// Rosochatius terms stay of order one: `|x_k|` uniform in `[0.5, 1.2]`.
fn moderate_point(r: &mut Rng, n: usize) -> Vec<f64> {
    (0..n)
        .map(|_| {
            let m = 0.5 + 0.7 * r.random::<f64>();
            if r.random::<bool>() {
                m
            } else {
                -m
            }
        })
        .collect()
}

fn suite_bd(sys: &SystemSpec, seed: u64, count: usize, tol: f64) -> Result<Vec<Check>, CliError> {
    let axes = sys.axes().to_vec();
    let n = axes.len();
    let mut r = rng(seed);
    let points: Vec<Vec<f64>> = (0..count).map(|_| moderate_point(&mut r, n)).collect();
    type Pot = Box<dyn Fn(&[f64]) -> f64 + Sync>;
    let mut pots: Vec<(String, Pot)> = vec![];
    for k in 1..=4usize {
        let a = axes.clone();
        pots.push((format!("V{k}"), Box::new(move |x: &[f64]| hierarchy_eval(&a, x, k).map_or(f64::NAN, |t| t.v[k - 1]))));
    }
    if sys.spec.is_distinct() {
        for s in 0..n {
            for (tag, deg) in [("m1", RosochatiusDegree::Minus1), ("m2", RosochatiusDegree::Minus2)] {
                let a = axes.clone();
                pots.push((
                    format!("R{tag}_{s}"),
                    Box::new(move |x: &[f64]| rosochatius_eval(&a, x, s, deg).map_or(f64::NAN, |v| v.0)),
                ));
            }
        }
    }
    if sys.kind.is_real_ellipsoid() {
        let (p, a) = (sys.potential(), axes.clone());
        pots.push(("system".into(), Box::new(move |x: &[f64]| p.value(&a, x).unwrap_or(f64::NAN))));
    }
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    pots.par_iter()
        .map(|(name, v)| {
            let mut worst: f64 = 0.0;
            for x in &points {
                for &(i, j) in &pairs {
                    worst = worst.max(bd_residual(&axes, v.as_ref(), x, i, j)?.abs());
                }
            }
            Ok(Check::below(format!("bd-residual.{name}"), worst, tol))
        })
        .collect::<Result<Vec<_>, Error>>()
        .map_err(CliError::from)
}

fn suite_hierarchy(sys: &SystemSpec, seed: u64, count: usize, tol: f64) -> Result<Vec<Check>, CliError> {
    let axes = sys.axes().to_vec();
    let mut r = rng(seed);
    let points: Vec<Vec<f64>> = (0..count).map(|_| point_on_ellipsoid(&mut r, &axes, &[], 0.3)).collect();
    let lambdas = [sample_lambda(&axes), axes.iter().copied().fold(0.0, f64::max) + 1.3, -0.8];
    let worst = points
        .par_iter()
        .map(|x| {
            let mut w: f64 = 0.0;
            for k in 1..=5 {
                for &lam in &lambdas {
                    w = w.max(delta_omega(&axes, x, lam, k)?.identity_residual.abs());
                }
            }
            Ok(w)
        })
        .collect::<Result<Vec<f64>, Error>>()?;
    let mut checks = vec![Check::below("hierarchy-identities.omega", max_of(worst), tol)];
    if sys.kind.is_real_ellipsoid() {
        let states = draw_states(seed + 1, count, |r| random_state(r, sys))?;
        let peta =
            states.par_iter().map(|s| Ok(peta_residual(sys, s)?.abs())).collect::<Result<Vec<f64>, Error>>()?;
        checks.push(Check::below("hierarchy-identities.peta", max_of(peta), tol));
    }
    Ok(checks)
}

fn suite_reduction(ctx: &Context, sys: &SystemSpec, count: usize) -> Result<Vec<Check>, CliError> {
    let cs = SystemSpec::complex_jacobi(sys.spec.clone(), sys.sigma)?;
    let (t, h) = (ctx.config.integrator.t, ctx.config.integrator.h);
    let states = draw_states(ctx.seed + 5, count, |r| random_state(r, &cs))?;
    let worst = states
        .par_iter()
        .map(|z0| -> Result<f64, Error> {
            let (z, p) = z0.split_complex();
            let red = torus_reduce(&z, &p)?;
            let mu = red.mu.iter().map(|m| m.abs()).collect();
            let jr = SystemSpec::jacobi_rosochatius(sys.spec.clone(), sys.sigma, mu)?;
            let s_real = project(&jr, &PhaseState::new(red.x, red.y))?;
            let tc = integrate(&cs, z0, t, h)?;
            let tr = integrate(&jr, &s_real, t, h)?;
            let mut w: f64 = 0.0;
            for (a, b) in tc.iter().zip(&tr) {
                let (z, p) = a.split_complex();
                let r = torus_reduce(&z, &p)?;
                w = w.max(max_of(r.x.iter().zip(&b.x).chain(r.y.iter().zip(&b.y)).map(|(u, v)| (u - v).abs())));
            }
            Ok(w)
        })
        .collect::<Result<Vec<f64>, Error>>()?;
    Ok(vec![Check::below("reduction-compatibility", max_of(worst), ctx.tol("reduction"))])
}

fn suite_rank(sys: &SystemSpec, seed: u64, count: usize, fraction: f64) -> Result<Vec<Check>, CliError> {
    require_real(sys, "rank-dimension")?;
    let states = draw_states(seed, count, |r| random_state(r, sys))?;
    let reports = states.par_iter().map(|s| rank_dimensions(sys, s)).collect::<Result<Vec<_>, Error>>()?;
    let hits = reports.iter().filter(|r| r.matches()).count();
    for (i, r) in reports.iter().enumerate().filter(|(_, r)| !r.matches()) {
        log::info!("degenerate rank draw {i}: {r:?}");
    }
    let frac = if count == 0 { 1.0 } else { hits as f64 / count as f64 };
    Ok(vec![Check::at_least("rank-dimension", frac, fraction)])
}

pub fn verify(ctx: &Context, requested: Option<Vec<String>>) -> Result<RunReport, CliError> {
    let section = ctx.config.verify.as_ref();
    let suites: Vec<String> = requested
        .or_else(|| section.and_then(|v| v.suites.clone()))
        .unwrap_or_else(|| SUITES.iter().map(|s| s.to_string()).collect());
    let count = section.map_or(10, |v| v.states);
    if let Some(bad) = suites.iter().find(|s| !SUITES.contains(&s.as_str())) {
        return Err(config_error("suite", format!("unknown suite '{bad}'")));
    }
    let mut checks = vec![];
    if !suites.is_empty() {
        let sys = ctx.config.system_spec()?;
        for (idx, name) in SUITES.iter().enumerate().filter(|(_, s)| suites.iter().any(|r| r == *s)) {
            let seed = ctx.seed.wrapping_add(1000 * idx as u64);
            log::info!("running suite {name}");
            checks.extend(match *name {
                "lax-residual" => suite_lax(&sys, seed, count, ctx.tol("lax_residual"))?,
                "bracket-commutation" => suite_brackets(&sys, seed, count, ctx.tol("bracket"))?,
                "bd-residual" => suite_bd(&sys, seed, count, ctx.tol("bd_residual"))?,
                "hierarchy-identities" => suite_hierarchy(&sys, seed, count, ctx.tol("hierarchy"))?,
                "reduction-compatibility" => suite_reduction(ctx, &sys, count.min(4))?,
                _ => suite_rank(&sys, seed, count, ctx.tol("rank_fraction"))?,
            });
        }
    }
    let report = RunReport::new("verify", ctx.seed, checks, json!({ "suites": suites, "states": count }));
    write_json(&ctx.out.join("report.json"), &report)?;
    if ctx.format == OutputFormat::Csv {
        write_checks_csv(&ctx.out.join("checks.csv"), &report.checks)?;
    }
    Ok(report)
}
