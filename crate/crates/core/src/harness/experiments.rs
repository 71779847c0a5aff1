//! Experiment drivers. Each returns an [`Outcome`] holding everything the
//! results writer persists; sweeps run on a bounded rayon pool and are
//! collected in input order so output does not depend on scheduling.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{classify_regime, omega_from_symbol, overdamping_curve, symbol, threshold_j, Regime};
use crate::config::{ExperimentKind, RunConfig};
use crate::error::{Error, Result};
use crate::harness::fit::{fit_rate, fit_rate_with, FitAxis, RateFit};
use crate::harness::functional::{functional_trace, functional_x, required_trackers};
use crate::harness::initial::{check_sigma1, make_initial_data, Preparation, Profile};
use crate::harness::selftest::{self, Check};
use crate::integrators::{evolve, Sampling, Scheme, Simulation, StepperConfig, TrackedField, Tracker, Trajectory};
use crate::models::{Flux, JinXinModel, JinXinState};
use crate::plot::{Curve, PlotKind};
use crate::spectral::series::time_norm;
use crate::spectral::{Grid, SpectralField, Window};

/// One row of norms.csv.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormRow {
    pub t: f64,
    pub name: String,
    pub s: f64,
    pub p: f64,
    pub r: f64,
    pub window: String,
    pub value: f64,
}

#[derive(Clone, Debug, Default)]
pub struct Outcome {
    pub experiment: String,
    pub config_hash: String,
    pub fits: BTreeMap<String, RateFit>,
    /// Scalar results that are not fits (levels, ratios, measured rates).
    pub values: BTreeMap<String, f64>,
    pub checks: Vec<Check>,
    pub norms: Vec<NormRow>,
    pub curves: Vec<Curve>,
    pub plot: Option<(PlotKind, String)>,
    /// Extra files: name and contents.
    pub tables: Vec<(String, String)>,
    pub fields: Vec<(String, SpectralField)>,
    pub summary: String,
}

impl Outcome {
    fn new(cfg: &RunConfig) -> Result<Self> {
        Ok(Outcome {
            experiment: cfg.experiment.name().to_string(),
            config_hash: cfg.hash()?,
            ..Outcome::default()
        })
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| !c.passed)
    }

    /// Deterministic part of the outcome, written as fits.json.
    pub fn fits_json(&self) -> Result<String> {
        let checks: Vec<&Check> = self.checks.iter().filter(|c| !c.timing).collect();
        let v = serde_json::json!({
            "experiment": self.experiment,
            "config_hash": self.config_hash,
            "fits": self.fits,
            "values": self.values,
            "checks": checks,
            "passed": checks.iter().all(|c| c.passed),
        });
        Ok(serde_json::to_string_pretty(&v)? + "\n")
    }

    fn push_norms(&mut self, traj: &Trajectory, tag: &str) -> Result<()> {
        for tr in &traj.trackers {
            let name = if tag.is_empty() { tr.field.name().to_string() } else { format!("{}@{tag}", tr.field.name()) };
            for (t, value) in traj.times.iter().zip(traj.values(tr)?) {
                self.norms.push(NormRow {
                    t: *t,
                    name: name.clone(),
                    s: tr.s,
                    p: tr.p,
                    r: tr.r,
                    window: tr.window.label(),
                    value,
                });
            }
        }
        Ok(())
    }

    fn summarize(&mut self, head: String) {
        let passed = self.checks.iter().filter(|c| c.passed).count();
        self.summary = format!("{}: {head}; {passed}/{} checks passed", self.experiment, self.checks.len());
    }
}

/// Runs `cfg` with at most `jobs` worker threads.
pub fn run_experiment(cfg: &RunConfig, jobs: usize) -> Result<Outcome> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Experiment(format!("cannot start worker pool: {e}")))?;
    pool.install(|| match cfg.experiment {
        ExperimentKind::Simulate => simulate(cfg),
        ExperimentKind::EpsilonConvergence => epsilon_convergence(cfg),
        ExperimentKind::Decay => decay(cfg),
        ExperimentKind::Overdamping => overdamping(cfg),
        ExperimentKind::Spectrum => spectrum(cfg),
        ExperimentKind::Uniformity => uniformity(cfg),
        ExperimentKind::Selftest => selftest_run(cfg),
    })
}

fn relaxation_stepper(cfg: &RunConfig) -> Result<StepperConfig> {
    if cfg.stepper.scheme == Scheme::IfRk2 {
        return Err(Error::config("stepper.scheme", format!("{} needs a relaxation scheme", cfg.experiment.name())));
    }
    Ok(cfg.stepper)
}

fn fmt_eps(eps: f64) -> String {
    format!("eps={eps}")
}

fn simulate(cfg: &RunConfig) -> Result<Outcome> {
    let mut out = Outcome::new(cfg)?;
    let eps = cfg.model.eps.values()[0];
    let model = cfg.model.build(eps)?;
    let grid = cfg.grid.build(cfg.model.d)?;
    let (jx, lim) = make_initial_data(&cfg.data_with_seed(), &grid, &model.flux, &model.a, eps)?;
    let limit_only = cfg.stepper.scheme == Scheme::IfRk2;
    let trackers = if cfg.trackers.is_empty() {
        let main = if limit_only { TrackedField::LimitU } else { TrackedField::U };
        let mut t = vec![Tracker::new(main, 0.0, 2.0, Window::Full)];
        if !limit_only {
            t.push(Tracker::new(TrackedField::V, 0.0, 2.0, Window::Full));
        }
        t
    } else {
        cfg.trackers.clone()
    };
    let sim = if limit_only {
        Simulation::Limit { flux: model.flux.clone(), a: model.a.clone(), state: lim }
    } else if trackers.iter().any(|t| {
        matches!(t.field, TrackedField::LimitU | TrackedField::LimitV | TrackedField::DiffU | TrackedField::DiffV)
    }) {
        Simulation::Coupled { model, jinxin: jx, limit: lim }
    } else {
        Simulation::JinXin { model, state: jx }
    };
    let traj = evolve(sim, &cfg.stepper, &trackers)?;
    out.push_norms(&traj, "")?;
    for tr in &trackers {
        out.curves.push(Curve { name: tr.label(), x: traj.times.clone(), y: traj.values(tr)? });
    }
    out.plot = Some((PlotKind::Linear, "tracked norms".into()));
    let summary = traj.summary(&out.config_hash)?;
    out.tables.push(("summary.json".into(), serde_json::to_string_pretty(&summary)? + "\n"));
    if let Some(s) = &traj.final_jinxin {
        out.fields.push(("u".into(), s.u.clone()));
        for (i, v) in s.v.iter().enumerate() {
            out.fields.push((format!("v{i}"), v.clone()));
        }
    }
    if let Some(l) = &traj.final_limit {
        out.fields.push(("u_star".into(), l.u_star.clone()));
    }
    out.values.insert("steps".into(), traj.steps as f64);
    out.values.insert("dt".into(), traj.dt);
    out.checks.push(Check::new("run reached t_end", true, format!("{} steps", traj.steps)));
    out.summarize(format!("{} steps to t = {}", traj.steps, cfg.stepper.t_end));
    Ok(out)
}

struct EpsRun {
    eps: f64,
    traj: Trajectory,
    sup_du: f64,
    int_dv: f64,
    int_z: f64,
}

fn convergence_run(cfg: &RunConfig, eps: f64) -> Result<EpsRun> {
    let model = cfg.model.build(eps)?;
    let grid = cfg.grid.build(cfg.model.d)?;
    let (jx, lim) = make_initial_data(&cfg.data_with_seed(), &grid, &model.flux, &model.a, eps)?;
    let d = cfg.model.d as f64;
    let p = cfg.analysis.p;
    let big_j = threshold_j(eps, cfg.analysis.k0);
    let trackers = [
        Tracker::new(TrackedField::DiffU, d / p - 1.0, p, Window::Full),
        Tracker::new(TrackedField::DiffV, d / p, p, Window::Full),
        Tracker::new(TrackedField::BigZ, d / p, p, Window::Low(big_j)),
    ];
    let traj = evolve(Simulation::Coupled { model, jinxin: jx, limit: lim }, &relaxation_stepper(cfg)?, &trackers)?;
    let du = traj.values(&trackers[0])?;
    let dv = traj.values(&trackers[1])?;
    let z = traj.values(&trackers[2])?;
    Ok(EpsRun {
        eps,
        sup_du: du.iter().cloned().fold(0.0, f64::max),
        int_dv: time_norm(&traj.times, &dv, 1.0),
        int_z: time_norm(&traj.times, &z, 1.0),
        traj,
    })
}

fn epsilon_convergence(cfg: &RunConfig) -> Result<Outcome> {
    let mut out = Outcome::new(cfg)?;
    let eps_list = cfg.model.eps.values();
    let results: Vec<Result<EpsRun>> = eps_list.par_iter().map(|&e| convergence_run(cfg, e)).collect();
    let mut runs = Vec::new();
    for (e, r) in eps_list.iter().zip(results) {
        match r {
            Ok(run) => runs.push(run),
            Err(err) => out.checks.push(Check::new(format!("run at eps = {e}"), false, err.to_string())),
        }
    }
    let mut table = String::from("eps,sup_u_minus_u_star,int_v_minus_v_star,int_big_z_low\n");
    for r in &runs {
        out.push_norms(&r.traj, &fmt_eps(r.eps))?;
        table.push_str(&format!("{:e},{:.12e},{:.12e},{:.12e}\n", r.eps, r.sup_du, r.int_dv, r.int_z));
        out.values.insert(format!("sup_u_minus_u_star@{}", fmt_eps(r.eps)), r.sup_du);
        out.values.insert(format!("int_v_minus_v_star@{}", fmt_eps(r.eps)), r.int_dv);
        out.values.insert(format!("int_big_z_low@{}", fmt_eps(r.eps)), r.int_z);
    }
    out.tables.push(("epsilon.csv".into(), table));
    if !out.checks.is_empty() {
        out.summarize(format!("aborted after {} of {} runs", runs.len(), eps_list.len()));
        return Ok(out);
    }

    let eps: Vec<f64> = runs.iter().map(|r| r.eps).collect();
    let lo = eps.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = eps.iter().cloned().fold(0.0, f64::max);
    let columns: [(&str, Vec<f64>); 3] = [
        ("sup_u_minus_u_star", runs.iter().map(|r| r.sup_du).collect()),
        ("int_v_minus_v_star", runs.iter().map(|r| r.int_dv).collect()),
        ("int_big_z_low", runs.iter().map(|r| r.int_z).collect()),
    ];
    for (name, y) in &columns {
        out.curves.push(Curve { name: name.to_string(), x: eps.clone(), y: y.clone() });
        match fit_rate_with(&eps, y, [lo, hi], FitAxis::Plain, 3) {
            Ok(f) => {
                out.fits.insert(name.to_string(), f);
            }
            Err(e) => out.checks.push(Check::new(format!("fit of {name}"), false, e.to_string())),
        }
    }
    out.plot = Some((PlotKind::LogLog, "differences against eps".into()));
    let [a, b] = cfg.convergence.slope_range;
    if let Some(f) = out.fits.get("sup_u_minus_u_star").copied() {
        out.checks.push(Check::new(
            format!("slope of sup_t |u - u*| in [{a}, {b}]"),
            (a..=b).contains(&f.exponent),
            format!("{:.4} +- {:.4}", f.exponent, f.stderr),
        ));
    }
    if let Some(f) = out.fits.get("int_big_z_low").copied() {
        let m = cfg.convergence.z_slope_min;
        out.checks.push(Check::new(
            format!("slope of int |Z_low| dt >= {m}"),
            f.exponent >= m,
            format!("{:.4} +- {:.4}", f.exponent, f.stderr),
        ));
    }
    let head = out
        .fits
        .iter()
        .map(|(k, f)| format!("{k} slope {:.3}", f.exponent))
        .collect::<Vec<_>>()
        .join(", ");
    out.summarize(head);
    Ok(out)
}

/// Largest fit time before the discrete spectral gap dominates the decay.
pub fn decay_cutoff(length: f64, a: &[f64]) -> f64 {
    let amin = a.iter().cloned().fold(f64::INFINITY, f64::min);
    0.05 * (length / (2.0 * PI)).powi(2) / amin
}

fn decay_trajectory(cfg: &RunConfig, eps: f64, trackers: &[Tracker], coupled: bool) -> Result<Trajectory> {
    let model = cfg.model.build(eps)?;
    let grid = cfg.grid.build(cfg.model.d)?;
    let (jx, lim) = make_initial_data(&cfg.data_with_seed(), &grid, &model.flux, &model.a, eps)?;
    let sim = if coupled {
        Simulation::Coupled { model, jinxin: jx, limit: lim }
    } else {
        Simulation::JinXin { model, state: jx }
    };
    evolve(sim, &relaxation_stepper(cfg)?, trackers)
}

fn decay(cfg: &RunConfig) -> Result<Outcome> {
    let mut out = Outcome::new(cfg)?;
    let dc = &cfg.decay;
    let Profile::RandomSpectrum { sigma1, .. } = cfg.data.profile else {
        return Err(Error::config("data.profile", "decay needs random_spectrum data with a prescribed sigma1"));
    };
    let d = cfg.model.d;
    let p = cfg.analysis.p;
    check_sigma1(sigma1, d, p)?;
    let cutoff = decay_cutoff(cfg.grid.length, &cfg.model.a);
    if dc.window[1] > cutoff * (1.0 + 1e-12) {
        return Err(Error::config(
            "decay.window",
            format!("t_hi = {} exceeds the cutoff time {cutoff:.6} = 0.05 (L/2pi)^2 / min a_i", dc.window[1]),
        ));
    }
    if dc.window[1] > cfg.stepper.t_end * (1.0 + 1e-12) {
        return Err(Error::config("decay.window", format!("t_hi = {} exceeds t_end = {}", dc.window[1], cfg.stepper.t_end)));
    }
    let eps = cfg.model.eps.values()[0];
    let big_j = threshold_j(eps, cfg.analysis.k0);
    let dd = d as f64;
    let mut trackers = Vec::new();
    let with_r = |field, s, r| Tracker { r, ..Tracker::new(field, s, p, Window::Full) };
    for &s in &dc.sigma {
        trackers.push(with_r(TrackedField::U, s, dc.r));
        if dc.r != 1.0 {
            trackers.push(with_r(TrackedField::U, s, 1.0));
        }
        trackers.push(with_r(TrackedField::UEpsV, s, dc.r));
        if dc.difference {
            trackers.push(with_r(TrackedField::DiffU, s, dc.r));
        }
    }
    trackers.push(Tracker::new(TrackedField::U, dd / 2.0, 2.0, Window::High(big_j)));

    let mut eps_runs = vec![eps];
    if dc.difference && dc.compare_half_eps {
        eps_runs.push(eps / 2.0);
    }
    let trajs: Vec<Result<Trajectory>> = eps_runs
        .par_iter()
        .map(|&e| decay_trajectory(cfg, e, &trackers, dc.difference))
        .collect();
    let mut trajs = trajs.into_iter();
    let traj = trajs.next().unwrap()?;
    let half = trajs.next().transpose()?;
    out.push_norms(&traj, "")?;
    if let Some(h) = &half {
        out.push_norms(h, &fmt_eps(eps / 2.0))?;
    }
    out.values.insert("cutoff_time".into(), cutoff);

    let admissible_diff = |s: f64| sigma1 < s && s <= dd / p - 1.0 + 1e-12;
    let mut head = Vec::new();
    for tr in &trackers {
        let y = traj.values(tr)?;
        let key = format!("{}[s={},r={}]", tr.field.name(), tr.s, tr.r);
        let key = if tr.window == Window::Full { key } else { format!("{key}{}", tr.window.label()) };
        out.curves.push(Curve { name: key.clone(), x: traj.times.clone(), y: y.clone() });
        let fit = fit_rate(&traj.times, &y, dc.window, FitAxis::Time);
        let (target, tol) = match tr.field {
            TrackedField::U if tr.window == Window::Full && tr.r == dc.r => (Some(-(tr.s - sigma1) / 2.0), dc.tolerance),
            TrackedField::DiffU if admissible_diff(tr.s) => {
                (Some(-((tr.s - sigma1) / 2.0 + 0.5)), dc.difference_tolerance)
            }
            _ => (None, 0.0),
        };
        match fit {
            Ok(f) => {
                if let Some(target) = target {
                    out.checks.push(Check::new(
                        format!("decay exponent of {key} = {target} +- {tol}"),
                        (f.exponent - target).abs() <= tol,
                        format!("{:.4} +- {:.4}, r2 {:.4}", f.exponent, f.stderr, f.r_squared),
                    ));
                    head.push(format!("{key} {:.3} (target {target})", f.exponent));
                }
                out.fits.insert(key, f);
            }
            Err(e) => {
                if target.is_some() {
                    out.checks.push(Check::new(format!("fit of {key}"), false, e.to_string()));
                }
            }
        }
    }

    if let Some(h) = &half {
        for tr in trackers.iter().filter(|t| t.field == TrackedField::DiffU) {
            let a = traj.values(tr)?;
            let b = h.values(tr)?;
            let logs: Vec<f64> = traj
                .times
                .iter()
                .zip(a.iter().zip(&b))
                .filter(|(t, _)| **t >= dc.window[0] && **t <= dc.window[1])
                .map(|(_, (x, y))| (x / y).ln())
                .collect();
            if logs.is_empty() {
                continue;
            }
            let ratio = (logs.iter().sum::<f64>() / logs.len() as f64).exp();
            let key = format!("level_ratio_half_eps[s={},r={}]", tr.s, tr.r);
            out.values.insert(key.clone(), ratio);
            out.curves.push(Curve {
                name: format!("{}[s={},r={}]@{}", tr.field.name(), tr.s, tr.r, fmt_eps(eps / 2.0)),
                x: h.times.clone(),
                y: b,
            });
            let tol = dc.half_eps_tolerance;
            out.checks.push(Check::new(
                format!("halving eps halves the difference level within {}%", tol * 100.0),
                (ratio / 2.0 - 1.0).abs() <= tol,
                format!("level ratio {ratio:.4}"),
            ));
        }
    }
    if let Some(s) = &traj.final_jinxin {
        out.fields.push(("u".into(), s.u.clone()));
    }
    out.plot = Some((PlotKind::LogLog, "norm decay".into()));
    out.summarize(head.join(", "));
    Ok(out)
}

/// Decay rate of `(u, eps v)` for one mode and one `eps`, by a semi-log
/// fit over `window / omega`.
fn measure_rate(cfg: &RunConfig, grid: &Grid, xi: &[f64], eps: f64) -> Result<(f64, Trajectory)> {
    let od = &cfg.overdamping;
    let d = cfg.model.d;
    let model = JinXinModel::new(Flux::Zero { ncomp: 1, dim: d }, cfg.model.a.clone(), eps)?;
    let u = SpectralField::from_fn(grid, 1, |_, x| (0..d).map(|i| xi[i] * x[i]).sum::<f64>().cos());
    let state = JinXinState::new(u, vec![SpectralField::zeros(grid, 1); d], 0.0)?;
    let omega = omega_from_symbol(symbol(xi, &cfg.model.a), eps);
    let (dt, span) = if omega > 0.0 {
        (od.dt_omega / omega, [od.window[0] / omega, od.window[1] / omega])
    } else {
        (cfg.stepper.dt_max, od.window)
    };
    let admissible = crate::integrators::jinxin_admissible_dt(&model, grid.spacing(), cfg.stepper.cfl);
    let dt = dt.min(admissible);
    let steps = (span[1] / dt).ceil() as usize;
    let stepper = StepperConfig {
        scheme: relaxation_stepper(cfg)?.scheme,
        cfl: cfg.stepper.cfl,
        dt_max: dt,
        dt_min: cfg.stepper.dt_min.min(dt),
        t_end: span[1],
        sample_every: Sampling::Steps { every: (steps / 400).max(1) },
    };
    let tracker = [Tracker::new(TrackedField::UEpsV, 0.0, 2.0, Window::Full)];
    let start = state.clone();
    let traj = evolve(Simulation::JinXin { model, state }, &stepper, &tracker)?;
    if omega == 0.0 {
        // the mean mode lies outside every homogeneous block; compare
        // coefficient norms directly
        let end = traj.final_jinxin.as_ref().expect("relaxation run");
        let size = |s: &JinXinState| (s.u.l2_norm().powi(2) + s.v.iter().map(|v| (eps * v.l2_norm()).powi(2)).sum::<f64>()).sqrt();
        let rate = -(size(end) / size(&start)).ln() / span[1];
        return Ok((rate, traj));
    }
    let y = traj.values(&tracker[0])?;
    let rate = -fit_rate(&traj.times, &y, span, FitAxis::SemiLog)?.exponent;
    Ok((rate, traj))
}

fn regime_label(r: Regime) -> &'static str {
    match r {
        Regime::Low => "LOW",
        Regime::High => "HIGH",
        Regime::Transitional => "TRANSITIONAL",
    }
}

fn mode_wavenumber(cfg: &RunConfig, grid: &Grid) -> Vec<f64> {
    cfg.overdamping.mode.iter().map(|&k| k as f64 * grid.fundamental()).collect()
}

fn overdamping(cfg: &RunConfig) -> Result<Outcome> {
    let mut out = Outcome::new(cfg)?;
    let od = &cfg.overdamping;
    let grid = cfg.grid.build(cfg.model.d)?;
    let xi = mode_wavenumber(cfg, &grid);
    let s = symbol(&xi, &cfg.model.a);
    let measured: Vec<Result<(f64, Trajectory)>> =
        od.inv_eps.par_iter().map(|&ie| measure_rate(cfg, &grid, &xi, 1.0 / ie)).collect();
    let mut table = String::from("inv_eps,omega_measured,omega_analytic,regime\n");
    let mut meas = Vec::new();
    let mut analytic = Vec::new();
    for (&ie, m) in od.inv_eps.iter().zip(measured) {
        let (rate, traj) = m?;
        let eps = 1.0 / ie;
        let w = omega_from_symbol(s, eps);
        let regime = classify_regime(&xi, eps, &cfg.model.a).regime;
        table.push_str(&format!("{ie:e},{rate:.12e},{w:.12e},{}\n", regime_label(regime)));
        out.push_norms(&traj, &format!("inv_eps={ie}"))?;
        out.values.insert(format!("omega_measured@inv_eps={ie}"), rate);
        meas.push(rate);
        analytic.push(w);
    }
    out.tables.push(("overdamping.csv".into(), table));
    out.curves.push(Curve { name: "omega_measured".into(), x: od.inv_eps.clone(), y: meas.clone() });
    out.curves.push(Curve { name: "omega_analytic".into(), x: od.inv_eps.clone(), y: analytic.clone() });
    out.plot = Some((PlotKind::Overdamping, format!("decay rate against 1/eps, S = {s}")));

    if s == 0.0 {
        let worst = meas.iter().map(|r| r.abs()).fold(0.0, f64::max);
        out.checks.push(Check::at_most("S = 0 mode does not decay", worst, 1e-10));
        out.summarize(format!("max |rate| {worst:.3e}"));
        return Ok(out);
    }
    let worst = meas.iter().zip(&analytic).map(|(m, w)| ((m - w) / w).abs()).fold(0.0, f64::max);
    out.values.insert("max_relative_error".into(), worst);
    out.checks.push(Check::new(
        format!("measured omega within {}% of analytic", od.tolerance * 100.0),
        worst <= od.tolerance,
        format!("max relative error {worst:.3e} over {} values", meas.len()),
    ));
    let peak_x = 2.0 * s.sqrt();
    let peak = od.inv_eps.iter().position(|&ie| (ie - peak_x).abs() <= 1e-9 * peak_x);
    match peak {
        Some(i) => {
            let err = (meas[i] / (2.0 * s) - 1.0).abs();
            out.values.insert("omega_at_peak".into(), meas[i]);
            out.checks.push(Check::new(
                format!("omega = 2S within {}% at 1/eps = 2 sqrt(S)", od.tolerance * 100.0),
                err <= od.tolerance,
                format!("measured {:.6} vs {:.6}", meas[i], 2.0 * s),
            ));
            let argmax = (0..meas.len()).max_by(|&a, &b| meas[a].total_cmp(&meas[b])).unwrap();
            out.checks.push(Check::new(
                "measured peak at 1/eps = 2 sqrt(S)",
                argmax == i,
                format!("argmax at 1/eps = {}", od.inv_eps[argmax]),
            ));
        }
        None => out.checks.push(Check::new(
            "peak sampled",
            false,
            format!("inv_eps grid does not contain 2 sqrt(S) = {peak_x}"),
        )),
    }
    // the analytic curve is flat on the overdamped side for large 1/eps only
    // asymptotically, so compare signs where the analytic step is resolvable
    let mut shape_ok = true;
    for i in 1..meas.len() {
        let da = analytic[i] - analytic[i - 1];
        if da.abs() > 2.0 * od.tolerance * analytic[i].max(analytic[i - 1]) {
            shape_ok &= (meas[i] - meas[i - 1]).signum() == da.signum();
        }
    }
    out.checks.push(Check::new("measured monotonicity matches the analytic shape", shape_ok, ""));
    out.summarize(format!("max relative error {worst:.3e}"));
    Ok(out)
}

fn spectrum(cfg: &RunConfig) -> Result<Outcome> {
    let mut out = Outcome::new(cfg)?;
    let sc = &cfg.spectrum;
    let inv_eps = crate::harness::fit::geometric_points(sc.inv_eps_range[0], sc.inv_eps_range[1], sc.points);
    let points = overdamping_curve(sc.symbol, &inv_eps);
    out.tables.push(("spectrum.csv".into(), crate::analysis::overdamping_csv(&points)));
    out.curves.push(Curve {
        name: "omega".into(),
        x: inv_eps.clone(),
        y: points.iter().map(|p| p.omega).collect(),
    });
    out.plot = Some((PlotKind::Linear, format!("analytic decay rate, S = {}", sc.symbol)));
    let pmax = points.iter().max_by(|a, b| a.omega.total_cmp(&b.omega)).unwrap();
    out.values.insert("omega_max".into(), pmax.omega);
    out.values.insert("inv_eps_at_max".into(), pmax.inv_eps);
    let finite = points.iter().all(|p| p.omega.is_finite() && p.omega >= 0.0);
    out.checks.push(Check::new("finite nonnegative rates", finite, format!("{} points", points.len())));
    out.summarize(format!("max omega {:.6} at 1/eps = {:.4}", pmax.omega, pmax.inv_eps));
    Ok(out)
}

fn prep_label(p: &Preparation) -> String {
    match p {
        Preparation::DarcyPrepared => "darcy_prepared".into(),
        Preparation::IllPrepared { v_scale, eps_power } => format!("ill_prepared(v_scale={v_scale},eps_power={eps_power})"),
    }
}

struct UniformRun {
    label: String,
    eps: f64,
    trace: Vec<(f64, f64)>,
    initial: f64,
    terms: Vec<(String, f64)>,
    traj: Trajectory,
}

fn uniformity_run(cfg: &RunConfig, prep: Preparation, eps: f64) -> Result<UniformRun> {
    let mut data = cfg.data_with_seed();
    data.preparation = prep;
    let model = cfg.model.build(eps)?;
    let grid = cfg.grid.build(cfg.model.d)?;
    let (jx, _) = make_initial_data(&data, &grid, &model.flux, &model.a, eps)?;
    let p = cfg.analysis.p;
    let big_j = threshold_j(eps, cfg.analysis.k0);
    let trackers = required_trackers(cfg.model.d, p, big_j);
    let traj = evolve(Simulation::JinXin { model, state: jx }, &relaxation_stepper(cfg)?, &trackers)?;
    let x = functional_x(&traj, eps, p, big_j)?;
    let trace = functional_trace(&traj, eps, p, big_j)?;
    let terms = x.terms.iter().map(|t| (t.name.clone(), t.value)).collect();
    Ok(UniformRun { label: prep_label(&prep), eps, trace, initial: x.initial, terms, traj })
}

/// Largest `X(t2) / X(t1)` over `after <= t1 <= t2`.
pub fn growth_after(trace: &[(f64, f64)], after: f64) -> f64 {
    let mut lowest = f64::INFINITY;
    let mut worst: f64 = 1.0;
    for &(_, x) in trace.iter().filter(|(t, _)| *t >= after) {
        lowest = lowest.min(x);
        if lowest > 0.0 {
            worst = worst.max(x / lowest);
        }
    }
    worst
}

fn uniformity(cfg: &RunConfig) -> Result<Outcome> {
    let mut out = Outcome::new(cfg)?;
    let uc = &cfg.uniformity;
    let jobs: Vec<(Preparation, f64)> = uc
        .preparations
        .iter()
        .flat_map(|p| cfg.model.eps.values().into_iter().map(move |e| (*p, e)))
        .collect();
    let runs: Vec<Result<UniformRun>> = jobs.par_iter().map(|&(p, e)| uniformity_run(cfg, p, e)).collect();
    let runs: Vec<UniformRun> = runs.into_iter().collect::<Result<_>>()?;
    let mut table = String::from("preparation,eps,t,x,ratio\n");
    let mut head = Vec::new();
    for prep in &uc.preparations {
        let label = prep_label(prep);
        let group: Vec<&UniformRun> = runs.iter().filter(|r| r.label == label).collect();
        let mut ratios = Vec::new();
        for r in &group {
            let tag = format!("{label},{}", fmt_eps(r.eps));
            out.push_norms(&r.traj, &tag)?;
            for &(t, x) in &r.trace {
                table.push_str(&format!("{label},{:e},{t:.12e},{x:.12e},{:.12e}\n", r.eps, x / r.initial));
            }
            let last = r.trace.last().map_or(0.0, |p| p.1);
            let ratio = last / r.initial;
            ratios.push(ratio);
            out.values.insert(format!("ratio@{tag}"), ratio);
            out.values.insert(format!("x0@{tag}"), r.initial);
            for (name, v) in &r.terms {
                out.values.insert(format!("term:{name}@{tag}"), *v);
            }
            let g = growth_after(&r.trace, uc.after);
            out.values.insert(format!("growth_after@{tag}"), g - 1.0);
            out.checks.push(Check::new(
                format!("{tag}: X_p grows by at most {}% after t = {}", uc.growth * 100.0, uc.after),
                g - 1.0 <= uc.growth,
                format!("growth {:.4}", g - 1.0),
            ));
            out.curves.push(Curve {
                name: tag,
                x: r.trace.iter().map(|p| p.0).collect(),
                y: r.trace.iter().map(|p| p.1 / r.initial).collect(),
            });
        }
        let max = ratios.iter().cloned().fold(0.0, f64::max);
        let min = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        let spread = max / min;
        out.values.insert(format!("spread@{label}"), spread);
        out.checks.push(Check::new(
            format!("{label}: X_p(t_end)/X_p0 varies by less than a factor {} across eps", uc.spread),
            spread < uc.spread,
            format!("spread {spread:.4}, ratios {ratios:.4?}"),
        ));
        head.push(format!("{label} spread {spread:.3}"));
    }
    out.tables.push(("functional.csv".into(), table));
    out.plot = Some((PlotKind::LogLog, "X_p(t) / X_p0".into()));
    out.summarize(head.join(", "));
    Ok(out)
}

fn selftest_run(cfg: &RunConfig) -> Result<Outcome> {
    let mut out = Outcome::new(cfg)?;
    out.checks = selftest::run_all(cfg.seed);
    let mut table = String::from("name,passed,detail\n");
    for c in &out.checks {
        table.push_str(&format!("\"{}\",{},\"{}\"\n", c.name.replace('"', "'"), c.passed, c.detail.replace('"', "'")));
    }
    out.tables.push(("selftest.csv".into(), table));
    let n = out.checks.len();
    out.summarize(format!("{n} property checks"));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{parse_config_str, preset};

    #[test]
    fn growth_is_measured_after_the_cutoff() {
        let trace = [(0.0, 1.0), (0.5, 2.0), (1.0, 3.0), (2.0, 3.0), (4.0, 3.3)];
        assert!((growth_after(&trace, 1.0) - 1.1).abs() < 1e-12);
        assert_eq!(growth_after(&trace, 10.0), 1.0);
    }

    #[test]
    fn spectrum_peak_sits_at_two_sqrt_s() {
        let cfg = parse_config_str(
            r#"{"experiment": "spectrum", "model": {"a": [1], "eps": 1, "d": 1}, "spectrum": {"symbol": 1, "inv_eps_range": [0.5, 8], "points": 801}}"#,
        )
        .unwrap();
        let out = run_experiment(&cfg, 1).unwrap();
        assert!(out.passed());
        assert!((out.values["inv_eps_at_max"] - 2.0).abs() < 0.02);
        assert!((out.values["omega_max"] - 2.0).abs() < 1e-3);
    }

    #[test]
    fn decay_window_past_cutoff_is_rejected() {
        let mut cfg = preset("thm3-decay-1d").unwrap();
        cfg.grid.length = 20.0 * PI;
        cfg.grid.points = 64;
        let err = run_experiment(&cfg, 1).unwrap_err().to_string();
        assert!(err.contains("cutoff time 5.000000"), "{err}");
    }

    #[test]
    fn decay_needs_random_spectrum() {
        let mut cfg = preset("thm3-decay-1d").unwrap();
        cfg.data.profile = Profile::GaussianBump { width: 1.0 };
        assert!(run_experiment(&cfg, 1).is_err());
    }

    #[test]
    fn zero_symbol_mode_does_not_decay() {
        let mut cfg = preset("fig1-overdamping").unwrap();
        cfg.overdamping.mode = vec![0];
        cfg.overdamping.inv_eps = vec![0.5, 2.0];
        cfg.overdamping.window = [1.0, 3.0];
        let out = run_experiment(&cfg, 1).unwrap();
        assert!(out.passed(), "{:?}", out.checks);
    }

    #[test]
    fn small_simulation_writes_fields() {
        let cfg = parse_config_str(
            r#"{"experiment": "simulate", "model": {"a": [1], "eps": 0.5, "d": 1}, "grid": {"N": 32, "L": 6.283185307179586},
                "stepper": {"scheme": "imex_ssp2", "t_end": 0.5}}"#,
        )
        .unwrap();
        let out = run_experiment(&cfg, 2).unwrap();
        assert!(out.passed());
        assert_eq!(out.fields.len(), 2);
        assert!(!out.norms.is_empty());
        assert_eq!(out.fits_json().unwrap(), run_experiment(&cfg, 1).unwrap().fits_json().unwrap());
    }
}
