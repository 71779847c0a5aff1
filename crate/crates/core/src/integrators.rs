//! Time integration of the relaxation system and of its parabolic limit.
//!
//! The relaxation source is linear in `v`, so the implicit part of every
//! IMEX stage is an exact pointwise solve. Transport is explicit and
//! spectral. The limit equation uses an integrating factor for the
//! diffusion and explicit RK2 for the flux divergence.

use std::collections::BTreeMap;
use std::time::Instant;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::analysis::exact_linear_propagator;
use crate::error::{Error, Result};
use crate::models::jinxin::{darcy_velocity, effective_big_z, effective_z, negative_divergence};
use crate::models::{Flux, JinXinModel, JinXinState, LimitState};
use crate::spectral::field::{symbol_s, SpectralField};
use crate::spectral::besov::besov_from_blocks;
use crate::spectral::{NormSeries, Window};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    ImexEuler,
    ImexSsp2,
    /// Integrating-factor RK2; limit equation only.
    IfRk2,
    /// Mode-wise exact propagator; linear (zero-flux) relaxation only.
    ExactLinear,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum Sampling {
    /// Every `every` steps, with a uniform step that lands on `t_end`.
    Steps { every: usize },
    /// `0, t0, t0 r, t0 r^2, ..` and `t_end`; steps are clipped to land
    /// on each sample time.
    Geometric { t0: f64, ratio: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepperConfig {
    pub scheme: Scheme,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    #[serde(default = "default_dt_max")]
    pub dt_max: f64,
    #[serde(default = "default_dt_min")]
    pub dt_min: f64,
    pub t_end: f64,
    #[serde(default = "default_sampling")]
    pub sample_every: Sampling,
}

fn default_cfl() -> f64 {
    0.5
}
fn default_dt_max() -> f64 {
    0.1
}
fn default_dt_min() -> f64 {
    1e-9
}
fn default_sampling() -> Sampling {
    Sampling::Steps { every: 10 }
}

impl StepperConfig {
    pub fn new(scheme: Scheme, t_end: f64) -> Self {
        StepperConfig {
            scheme,
            cfl: default_cfl(),
            dt_max: default_dt_max(),
            dt_min: default_dt_min(),
            t_end,
            sample_every: default_sampling(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::config("stepper.cfl", format!("must lie in (0, 1], got {}", self.cfl)));
        }
        if !(self.dt_min > 0.0 && self.dt_min <= self.dt_max && self.dt_max.is_finite()) {
            return Err(Error::config("stepper.dt_min", "need 0 < dt_min <= dt_max"));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::config("stepper.t_end", "must be finite and nonnegative"));
        }
        match self.sample_every {
            Sampling::Steps { every } if every == 0 => {
                Err(Error::config("stepper.sample_every.every", "must be at least 1"))
            }
            Sampling::Geometric { t0, ratio } if !(t0 > 0.0 && ratio > 1.0) => {
                Err(Error::config("stepper.sample_every", "geometric cadence needs t0 > 0 and ratio > 1"))
            }
            _ => Ok(()),
        }
    }
}

/// Largest step allowed by the characteristic speeds `sqrt(a_i)/eps`.
pub fn jinxin_admissible_dt(model: &JinXinModel, grid_spacing: f64, cfl: f64) -> f64 {
    let amax = model.a.iter().cloned().fold(0.0, f64::max);
    cfl * model.eps * grid_spacing / amax.sqrt()
}

/// Largest step allowed by the advective speed of the limit flux at `u`.
pub fn limit_admissible_dt(flux: &Flux, u: &SpectralField, cfl: f64) -> f64 {
    if flux.is_zero() {
        return f64::INFINITY;
    }
    let phys = u.to_physical();
    let size = u.grid().size();
    let speed = flux.max_speed((0..size).map(|x| phys.iter().map(|c| c[x]).collect()));
    if speed == 0.0 {
        f64::INFINITY
    } else {
        cfl * u.grid().spacing() / speed
    }
}

fn check_cfl(dt: f64, admissible: f64) -> Result<()> {
    if !(dt > 0.0) || dt > admissible * (1.0 + 1e-12) {
        return Err(Error::Cfl { dt, admissible });
    }
    Ok(())
}

/// Solves `V = rhs + h (-a d U - V + f(U)) / eps^2` for `V`.
fn relax_solve(model: &JinXinModel, rhs: &[SpectralField], u: &SpectralField, f: &[SpectralField], h: f64) -> Vec<SpectralField> {
    let e2 = model.eps * model.eps;
    let inv = 1.0 / (e2 + h);
    rhs.iter()
        .enumerate()
        .map(|(i, r)| {
            let du = u.derivative(i);
            SpectralField::combine(&[(e2 * inv, r), (-h * model.a[i] * inv, &du), (h * inv, &f[i])]).dealiased()
        })
        .collect()
}

/// One step of the relaxation system with the given scheme.
pub fn step_jinxin(model: &JinXinModel, state: &JinXinState, dt: f64, cfg: &StepperConfig) -> Result<JinXinState> {
    check_cfl(dt, jinxin_admissible_dt(model, state.grid().spacing(), cfg.cfl))?;
    state.check_finite()?;
    let next = match cfg.scheme {
        Scheme::ImexEuler => imex_euler(model, state, dt)?,
        Scheme::ImexSsp2 => imex_ssp2(model, state, dt)?,
        Scheme::ExactLinear => exact_linear(model, state, dt)?,
        Scheme::IfRk2 => {
            return Err(Error::InvalidArgument("if_rk2 integrates the limit equation only".into()))
        }
    };
    next.check_finite()?;
    Ok(next)
}

fn imex_euler(model: &JinXinModel, s: &JinXinState, dt: f64) -> Result<JinXinState> {
    let mut u = s.u.clone();
    u.axpy(dt, &negative_divergence(&s.v));
    let u = u.dealiased();
    let f = model.flux.evaluate_field(&u)?;
    let v = relax_solve(model, &s.v, &u, &f, dt);
    Ok(JinXinState { u, v, t: s.t + dt })
}

/// Two-stage, second-order IMEX Runge-Kutta (SSP2(2,2,2)): explicit
/// tableau `[[0,0],[1,0]]`, implicit tableau `[[g,0],[1-2g,g]]`,
/// weights `1/2, 1/2`, `g = 1 - 1/sqrt 2`.
fn imex_ssp2(model: &JinXinModel, s: &JinXinState, dt: f64) -> Result<JinXinState> {
    let g = 1.0 - std::f64::consts::FRAC_1_SQRT_2;
    let h = g * dt;

    let u1 = &s.u;
    let f1 = model.flux.evaluate_field(u1)?;
    let v1 = relax_solve(model, &s.v, u1, &f1, h);
    // stage source recovered from the solve, avoiding a 1/eps^2 product
    let r1: Vec<SpectralField> = v1.iter().zip(&s.v).map(|(a, b)| SpectralField::combine(&[(1.0 / h, a), (-1.0 / h, b)])).collect();
    let t1 = negative_divergence(&v1);

    let mut u2 = s.u.clone();
    u2.axpy(dt, &t1);
    let u2 = u2.dealiased();
    let f2 = model.flux.evaluate_field(&u2)?;
    let rhs2: Vec<SpectralField> = s.v.iter().zip(&r1).map(|(v, r)| SpectralField::combine(&[(1.0, v), (dt * (1.0 - 2.0 * g), r)])).collect();
    let v2 = relax_solve(model, &rhs2, &u2, &f2, h);
    let r2: Vec<SpectralField> = v2.iter().zip(&rhs2).map(|(a, b)| SpectralField::combine(&[(1.0 / h, a), (-1.0 / h, b)])).collect();
    let t2 = negative_divergence(&v2);

    let u = SpectralField::combine(&[(1.0, &s.u), (0.5 * dt, &t1), (0.5 * dt, &t2)]).dealiased();
    let v = s
        .v
        .iter()
        .zip(r1.iter().zip(&r2))
        .map(|(v, (a, b))| SpectralField::combine(&[(1.0, v), (0.5 * dt, a), (0.5 * dt, b)]).dealiased())
        .collect();
    Ok(JinXinState { u, v, t: s.t + dt })
}

/// Wavevector with unresolved (Nyquist) axes zeroed, matching the
/// spectral derivative.
fn resolved_wavevector(grid: &crate::spectral::Grid, flat: usize) -> Vec<f64> {
    let n = grid.points_per_axis() as i64;
    let k = grid.kappa(flat);
    let idx = grid.mode_indices(flat);
    (0..grid.dim())
        .map(|i| if idx[i].abs() == n / 2 { 0.0 } else { k[i] })
        .collect()
}

fn exact_linear(model: &JinXinModel, s: &JinXinState, dt: f64) -> Result<JinXinState> {
    if !model.flux.is_zero() {
        return Err(Error::InvalidArgument("exact_linear requires the zero flux".into()));
    }
    let grid = s.grid().clone();
    let d = grid.dim();
    let eps = model.eps;
    let mut u = s.u.clone();
    let mut v = s.v.clone();
    for flat in 0..grid.size() {
        if !grid.is_retained(flat) {
            continue;
        }
        let xi = resolved_wavevector(&grid, flat);
        let p = exact_linear_propagator(&xi, eps, &model.a, dt);
        for c in 0..u.ncomp() {
            let mut w = vec![Complex64::default(); d + 1];
            w[0] = s.u.component(c)[flat];
            for i in 0..d {
                w[i + 1] = s.v[i].component(c)[flat] * eps;
            }
            let out = &p * nalgebra::DVector::from_vec(w);
            u.component_mut(c)[flat] = out[0];
            for i in 0..d {
                v[i].component_mut(c)[flat] = out[i + 1] / eps;
            }
        }
    }
    Ok(JinXinState {
        u: u.dealiased(),
        v: v.into_iter().map(SpectralField::dealiased).collect(),
        t: s.t + dt,
    })
}

/// One integrating-factor RK2 step of the limit equation:
/// `u_a = E(u + dt N(u))`, `u+ = E(u + dt/2 N(u)) + dt/2 N(u_a)` with
/// `E = exp(-S dt)` and `N = -sum d_i f_i`.
pub fn step_limit(flux: &Flux, a: &[f64], state: &LimitState, dt: f64, cfg: &StepperConfig) -> Result<LimitState> {
    check_cfl(dt, limit_admissible_dt(flux, &state.u_star, cfg.cfl))?;
    state.check_finite()?;
    let grid = state.u_star.grid().clone();
    let factor = |w: &SpectralField| w.apply_multiplier(|flat| (-symbol_s(&grid, flat, a) * dt).exp());
    let nonlinear = |w: &SpectralField| -> Result<SpectralField> {
        Ok(negative_divergence(&flux.evaluate_field(w)?).dealiased())
    };
    let u0 = &state.u_star;
    let k1 = nonlinear(u0)?;
    let ua = factor(&SpectralField::combine(&[(1.0, u0), (dt, &k1)])).dealiased();
    let ka = nonlinear(&ua)?;
    let mut next = factor(&SpectralField::combine(&[(1.0, u0), (0.5 * dt, &k1)]));
    next.axpy(0.5 * dt, &ka);
    let out = LimitState {
        u_star: next.dealiased(),
        t: state.t + dt,
    };
    out.check_finite()?;
    Ok(out)
}

/// Quantities that can be monitored along a run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrackedField {
    U,
    V,
    /// `(u, eps v)` stacked.
    UEpsV,
    SmallZ,
    BigZ,
    LimitU,
    /// Darcy velocity of the limit solution.
    LimitV,
    DiffU,
    DiffV,
}

impl TrackedField {
    pub fn name(&self) -> &'static str {
        match self {
            TrackedField::U => "u",
            TrackedField::V => "v",
            TrackedField::UEpsV => "u_eps_v",
            TrackedField::SmallZ => "z",
            TrackedField::BigZ => "big_z",
            TrackedField::LimitU => "u_star",
            TrackedField::LimitV => "v_star",
            TrackedField::DiffU => "u_minus_u_star",
            TrackedField::DiffV => "v_minus_v_star",
        }
    }

    fn needs_jinxin(&self) -> bool {
        !matches!(self, TrackedField::LimitU | TrackedField::LimitV)
            && !matches!(self, TrackedField::DiffU | TrackedField::DiffV)
    }

    fn needs_limit(&self) -> bool {
        matches!(
            self,
            TrackedField::LimitU | TrackedField::LimitV | TrackedField::DiffU | TrackedField::DiffV
        )
    }
}

/// A monitored Besov norm. Per-block `L^p` norms of `field` are stored at
/// every sample; `s`, `r` and `window` select the reported scalar.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tracker {
    pub field: TrackedField,
    pub s: f64,
    pub p: f64,
    #[serde(default = "default_r")]
    pub r: f64,
    #[serde(default = "default_window")]
    pub window: Window,
}

fn default_r() -> f64 {
    1.0
}
fn default_window() -> Window {
    Window::Full
}

impl Tracker {
    pub fn new(field: TrackedField, s: f64, p: f64, window: Window) -> Self {
        Tracker { field, s, p, r: 1.0, window }
    }

    pub fn key(&self) -> String {
        series_key(self.field, self.p)
    }

    pub fn label(&self) -> String {
        format!("{}[s={},p={},r={},{}]", self.field.name(), self.s, self.p, self.r, self.window.label())
    }
}

/// Key of the block-norm series of `field` in `L^p`.
pub fn series_key(field: TrackedField, p: f64) -> String {
    format!("{}@p{}", field.name(), p)
}

#[derive(Clone, Debug)]
pub enum Simulation {
    JinXin { model: JinXinModel, state: JinXinState },
    Limit { flux: Flux, a: Vec<f64>, state: LimitState },
    /// Both systems on one grid with a shared step, for difference fields.
    Coupled { model: JinXinModel, jinxin: JinXinState, limit: LimitState },
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub trackers: Vec<Tracker>,
    pub series: BTreeMap<String, NormSeries>,
    pub steps: usize,
    pub dt: f64,
    pub wall_time: f64,
    pub final_jinxin: Option<JinXinState>,
    pub final_limit: Option<LimitState>,
}

impl Trajectory {
    pub fn find(&self, field: TrackedField, p: f64) -> Option<&NormSeries> {
        self.series.get(&series_key(field, p))
    }

    /// Reported scalar of `tracker` at every sample.
    pub fn values(&self, tracker: &Tracker) -> Result<Vec<f64>> {
        let series = self
            .series
            .get(&tracker.key())
            .ok_or_else(|| Error::MissingTrackers(vec![tracker.key()]))?;
        Ok(series
            .rows()
            .iter()
            .map(|row| besov_from_blocks(row, series.j_min(), tracker.s, tracker.r, tracker.window).value)
            .collect())
    }

    /// `{config_hash, t, norms: {label: values}, wall_time, steps}`.
    pub fn summary(&self, config_hash: &str) -> Result<serde_json::Value> {
        let mut norms = serde_json::Map::new();
        for tr in &self.trackers {
            norms.insert(tr.label(), serde_json::to_value(self.values(tr)?)?);
        }
        Ok(serde_json::json!({
            "config_hash": config_hash,
            "t": self.times,
            "norms": norms,
            "wall_time": self.wall_time,
            "steps": self.steps,
            "dt": self.dt,
        }))
    }
}

fn sample_times(cfg: &StepperConfig) -> Vec<f64> {
    match cfg.sample_every {
        Sampling::Steps { .. } => Vec::new(),
        Sampling::Geometric { t0, ratio } => {
            let mut out = Vec::new();
            let mut t = t0;
            while t < cfg.t_end * (1.0 - 1e-12) {
                out.push(t);
                t *= ratio;
            }
            out.push(cfg.t_end);
            out
        }
    }
}

struct Sampler<'a> {
    trackers: &'a [Tracker],
    series: BTreeMap<String, NormSeries>,
}

impl<'a> Sampler<'a> {
    fn new(trackers: &'a [Tracker], scheme: &crate::spectral::DyadicScheme) -> Self {
        let mut series = BTreeMap::new();
        for t in trackers {
            series
                .entry(t.key())
                .or_insert_with(|| NormSeries::new(t.p, scheme.j_min(), scheme.num_blocks()));
        }
        Sampler { trackers, series }
    }

    fn record(&mut self, model: Option<&JinXinModel>, flux_a: (&Flux, &[f64]), jx: Option<&JinXinState>, lim: Option<&LimitState>, t: f64) -> Result<()> {
        let mut done = std::collections::BTreeSet::new();
        for tr in self.trackers {
            let key = tr.key();
            if !done.insert(key.clone()) {
                continue;
            }
            let fields = tracked_fields(tr.field, model, flux_a, jx, lim)?;
            let refs: Vec<&SpectralField> = fields.iter().collect();
            let scheme = refs[0].grid().dyadic();
            let norms = scheme.block_norms(&refs, tr.p);
            self.series.get_mut(&key).unwrap().push(t, norms)?;
        }
        Ok(())
    }
}

fn tracked_fields(field: TrackedField, model: Option<&JinXinModel>, (flux, a): (&Flux, &[f64]), jx: Option<&JinXinState>, lim: Option<&LimitState>) -> Result<Vec<SpectralField>> {
    let need_jx = || jx.ok_or_else(|| Error::InvalidArgument(format!("tracker {} needs the relaxation run", field.name())));
    let need_lim = || lim.ok_or_else(|| Error::InvalidArgument(format!("tracker {} needs the limit run", field.name())));
    Ok(match field {
        TrackedField::U => vec![need_jx()?.u.clone()],
        TrackedField::V => need_jx()?.v.clone(),
        TrackedField::UEpsV => {
            let s = need_jx()?;
            let eps = model.map_or(1.0, |m| m.eps);
            let mut out = vec![s.u.clone()];
            out.extend(s.v.iter().map(|v| v.clone().scaled(eps)));
            out
        }
        TrackedField::SmallZ => effective_z(model.unwrap(), need_jx()?),
        TrackedField::BigZ => effective_big_z(model.unwrap(), need_jx()?)?,
        TrackedField::LimitU => vec![need_lim()?.u_star.clone()],
        TrackedField::LimitV => darcy_velocity(flux, a, &need_lim()?.u_star)?,
        TrackedField::DiffU => {
            let (s, l) = (need_jx()?, need_lim()?);
            vec![SpectralField::combine(&[(1.0, &s.u), (-1.0, &l.u_star)])]
        }
        TrackedField::DiffV => {
            let (s, l) = (need_jx()?, need_lim()?);
            let vs = darcy_velocity(flux, a, &l.u_star)?;
            s.v.iter().zip(&vs).map(|(v, w)| SpectralField::combine(&[(1.0, v), (-1.0, w)])).collect()
        }
    })
}

/// Marches `sim` to `cfg.t_end`, sampling `trackers`. The step is fixed
/// per run: `min(dt_max, admissible)`, shortened only to land on sample
/// instants.
pub fn evolve(sim: Simulation, cfg: &StepperConfig, trackers: &[Tracker]) -> Result<Trajectory> {
    cfg.validate()?;
    let start = Instant::now();
    let (model, flux, a, mut jx, mut lim) = match sim {
        Simulation::JinXin { model, state } => {
            let (f, a) = (model.flux.clone(), model.a.clone());
            (Some(model), f, a, Some(state), None)
        }
        Simulation::Limit { flux, a, state } => (None, flux, a, None, Some(state)),
        Simulation::Coupled { model, jinxin, limit } => {
            jinxin.u.check_same_shape(&limit.u_star)?;
            let (f, a) = (model.flux.clone(), model.a.clone());
            (Some(model), f, a, Some(jinxin), Some(limit))
        }
    };
    for tr in trackers {
        if (tr.field.needs_jinxin() && jx.is_none()) || (tr.field.needs_limit() && lim.is_none()) {
            return Err(Error::InvalidArgument(format!("tracker {} is not available for this run", tr.field.name())));
        }
    }
    if jx.is_some() && cfg.scheme == Scheme::IfRk2 {
        return Err(Error::InvalidArgument("relaxation runs need imex_euler, imex_ssp2 or exact_linear".into()));
    }
    if jx.is_none() && cfg.scheme != Scheme::IfRk2 {
        return Err(Error::InvalidArgument("limit runs use if_rk2".into()));
    }
    let grid = jx.as_ref().map_or_else(|| lim.as_ref().unwrap().u_star.grid().clone(), |s| s.grid().clone());

    let mut admissible = f64::INFINITY;
    if let (Some(m), Some(_)) = (&model, &jx) {
        admissible = admissible.min(jinxin_admissible_dt(m, grid.spacing(), cfg.cfl));
    }
    if let Some(l) = &lim {
        // margin for growth of the advective speed along the run
        admissible = admissible.min(0.9 * limit_admissible_dt(&flux, &l.u_star, cfg.cfl));
    }
    let mut dt = cfg.dt_max.min(admissible);
    if dt < cfg.dt_min {
        return Err(Error::Cfl { dt: cfg.dt_min, admissible });
    }
    let limit_cfg = StepperConfig { scheme: Scheme::IfRk2, cfl: 1.0, ..*cfg };

    let t0 = jx.as_ref().map_or_else(|| lim.as_ref().unwrap().t, |s| s.t);
    let horizon = t0 + cfg.t_end;
    let every = match cfg.sample_every {
        Sampling::Steps { every } => {
            if cfg.t_end > 0.0 {
                let n = (cfg.t_end / dt - 1e-9).ceil().max(1.0);
                dt = cfg.t_end / n;
            }
            Some(every)
        }
        Sampling::Geometric { .. } => None,
    };
    let targets: Vec<f64> = sample_times(cfg).into_iter().map(|s| t0 + s).collect();

    let mut sampler = Sampler::new(trackers, grid.dyadic());
    let mut times = vec![t0];
    sampler.record(model.as_ref(), (&flux, &a), jx.as_ref(), lim.as_ref(), t0)?;

    let mut t = t0;
    let mut steps = 0usize;
    let mut next_target = 0usize;
    while t < horizon - 1e-12 * horizon.max(1.0) {
        let mut h = dt;
        let mut sample_now = false;
        if let Some(target) = targets.get(next_target) {
            if t + h >= target - 1e-12 * target.max(1.0) {
                h = target - t;
                sample_now = true;
                next_target += 1;
            }
        } else if every.is_some() {
            h = h.min(horizon - t);
        }
        if h <= 0.0 {
            continue;
        }
        if let (Some(m), Some(s)) = (&model, jx.as_mut()) {
            *s = step_jinxin(m, s, h, cfg)?;
        }
        if let Some(l) = lim.as_mut() {
            *l = step_limit(&flux, &a, l, h, &limit_cfg)?;
        }
        steps += 1;
        t = if sample_now { targets[next_target - 1] } else { t + h };
        if let Some(k) = every {
            let last = t >= horizon - 1e-12 * horizon.max(1.0);
            sample_now = steps % k == 0 || last;
            if last {
                t = horizon;
            }
        }
        if let Some(s) = jx.as_mut() {
            s.t = t;
        }
        if let Some(l) = lim.as_mut() {
            l.t = t;
        }
        if sample_now {
            times.push(t);
            sampler.record(model.as_ref(), (&flux, &a), jx.as_ref(), lim.as_ref(), t)?;
        }
    }
    Ok(Trajectory {
        times,
        trackers: trackers.to_vec(),
        series: sampler.series,
        steps,
        dt,
        wall_time: start.elapsed().as_secs_f64(),
        final_jinxin: jx,
        final_limit: lim,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Grid;
    use std::f64::consts::PI;

    fn cfg(scheme: Scheme) -> StepperConfig {
        StepperConfig { cfl: 1.0, ..StepperConfig::new(scheme, 1.0) }
    }

    fn linear_model(eps: f64) -> JinXinModel {
        JinXinModel::new(Flux::Zero { ncomp: 1, dim: 1 }, vec![1.0], eps).unwrap()
    }

    fn single_mode(grid: &Grid) -> JinXinState {
        let u = SpectralField::from_fn(grid, 1, |_, x| x[0].cos());
        let v = vec![SpectralField::from_fn(grid, 1, |_, x| 0.5 * x[0].sin())];
        JinXinState::new(u, v, 0.0).unwrap()
    }

    fn distance(a: &JinXinState, b: &JinXinState) -> f64 {
        let mut d = SpectralField::combine(&[(1.0, &a.u), (-1.0, &b.u)]).l2_norm().powi(2);
        for (x, y) in a.v.iter().zip(&b.v) {
            d += SpectralField::combine(&[(1.0, x), (-1.0, y)]).l2_norm().powi(2);
        }
        d.sqrt()
    }

    fn march(model: &JinXinModel, s0: &JinXinState, dt: f64, n: usize, c: &StepperConfig) -> JinXinState {
        let mut s = s0.clone();
        for _ in 0..n {
            s = step_jinxin(model, &s, dt, c).unwrap();
        }
        s
    }

    #[test]
    fn equilibrium_is_fixed_point() {
        let g = Grid::new(1, 16, 2.0 * PI).unwrap();
        let model = JinXinModel::new(Flux::Burgers1d, vec![1.0], 0.1).unwrap();
        let c = 0.3;
        let u = SpectralField::from_fn(&g, 1, |_, _| c);
        let v = vec![SpectralField::from_fn(&g, 1, |_, _| 0.5 * c * c)];
        let s0 = JinXinState::new(u, v, 0.0).unwrap();
        for scheme in [Scheme::ImexEuler, Scheme::ImexSsp2] {
            let s1 = step_jinxin(&model, &s0, 0.01, &cfg(scheme)).unwrap();
            assert!(distance(&s0, &s1) < 1e-14);
        }
    }

    #[test]
    fn ssp2_is_second_order_against_propagator() {
        let g = Grid::new(1, 8, 2.0 * PI).unwrap();
        for eps in [1.0, 0.1, 0.01] {
            let model = linear_model(eps);
            let s0 = single_mode(&g);
            let t_end = 64.0 * 2f64.powi(-6) * eps;
            let exact = march(&model, &s0, t_end / 2.0, 2, &cfg(Scheme::ExactLinear));
            let errs: Vec<f64> = (6..=10)
                .map(|k| {
                    let dt = 2f64.powi(-k) * eps;
                    let n = (t_end / dt).round() as usize;
                    distance(&march(&model, &s0, dt, n, &cfg(Scheme::ImexSsp2)), &exact)
                })
                .collect();
            for w in errs.windows(2) {
                let order = (w[0] / w[1]).log2();
                assert!(order >= 1.9, "eps={eps} errs={errs:?}");
            }
        }
    }

    #[test]
    fn imex_euler_matches_forward_euler_to_second_order() {
        let g = Grid::new(1, 16, 2.0 * PI).unwrap();
        let model = JinXinModel::new(Flux::Burgers1d, vec![1.0], 1.0).unwrap();
        let u = SpectralField::from_fn(&g, 1, |_, x| 0.1 * x[0].sin() + 0.05 * (2.0 * x[0]).cos());
        let v = vec![SpectralField::from_fn(&g, 1, |_, x| 0.08 * (x[0] + 0.3).cos())];
        let s = JinXinState::new(u, v, 0.0).unwrap();
        let (du, dv) = crate::models::jinxin_rhs(&model, &s).unwrap();
        let gap = |dt: f64| {
            let a = step_jinxin(&model, &s, dt, &cfg(Scheme::ImexEuler)).unwrap();
            let b = JinXinState {
                u: SpectralField::combine(&[(1.0, &s.u), (dt, &du)]),
                v: vec![SpectralField::combine(&[(1.0, &s.v[0]), (dt, &dv[0])])],
                t: dt,
            };
            distance(&a, &b)
        };
        let ratio = gap(1e-2) / gap(5e-3);
        assert!((ratio.log2() - 2.0).abs() < 0.1, "ratio {ratio}");
    }

    #[test]
    fn cfl_violation_names_admissible_step() {
        let g = Grid::new(1, 16, 2.0 * PI).unwrap();
        let model = linear_model(0.1);
        match step_jinxin(&model, &single_mode(&g), 1.0, &cfg(Scheme::ImexSsp2)) {
            Err(Error::Cfl { admissible, .. }) => {
                assert!((admissible - 0.1 * 2.0 * PI / 16.0).abs() < 1e-15)
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn heat_factor_is_exact_for_zero_flux() {
        let g = Grid::new(2, 16, 2.0 * PI).unwrap();
        let a = [1.0, 0.5];
        let u = SpectralField::from_fn(&g, 1, |_, x| (x[0] + 2.0 * x[1]).sin());
        let s = LimitState { u_star: u.clone(), t: 0.0 };
        let flux = Flux::Zero { ncomp: 1, dim: 2 };
        let dt = 0.3;
        let out = step_limit(&flux, &a, &s, dt, &cfg(Scheme::IfRk2)).unwrap();
        let decay = (-(1.0 + 0.5 * 4.0) * dt).exp();
        let want = u.scaled(decay);
        assert!(SpectralField::combine(&[(1.0, &out.u_star), (-1.0, &want)]).max_coeff() < 1e-16);
        let constant = LimitState { u_star: SpectralField::from_fn(&g, 2, |_, _| 0.4), t: 0.0 };
        let c1 = step_limit(&Flux::Burgers2d, &a, &constant, dt, &cfg(Scheme::IfRk2)).unwrap();
        assert!(SpectralField::combine(&[(1.0, &c1.u_star), (-1.0, &constant.u_star)]).max_coeff() < 1e-15);
    }

    #[test]
    fn limit_rk2_self_convergence() {
        let g = Grid::new(1, 64, 2.0 * PI).unwrap();
        let a = [0.5];
        let u0 = SpectralField::from_fn(&g, 1, |_, x| 0.5 * x[0].sin() + 0.2 * (2.0 * x[0]).cos());
        let run = |n: usize| {
            let dt = 1.0 / n as f64;
            let mut s = LimitState { u_star: u0.clone(), t: 0.0 };
            for _ in 0..n {
                s = step_limit(&Flux::Burgers1d, &a, &s, dt, &cfg(Scheme::IfRk2)).unwrap();
            }
            s.u_star
        };
        let reference = run(16 * 64);
        let err = |n| SpectralField::combine(&[(1.0, &run(n)), (-1.0, &reference)]).l2_norm();
        let (e1, e2, e3) = (err(16), err(32), err(64));
        assert!((e1 / e2).log2() >= 1.9 && (e2 / e3).log2() >= 1.9, "{e1} {e2} {e3}");
    }

    #[test]
    fn zero_data_tracks_zero() {
        let g = Grid::new(1, 16, 2.0 * PI).unwrap();
        let model = JinXinModel::new(Flux::Burgers1d, vec![1.0], 0.5).unwrap();
        let trackers = [
            Tracker::new(TrackedField::U, 0.0, 2.0, Window::Full),
            Tracker::new(TrackedField::BigZ, 0.5, f64::INFINITY, Window::Low(0)),
        ];
        let sim = Simulation::JinXin { model, state: JinXinState::zeros(&g, 1) };
        let traj = evolve(sim, &StepperConfig::new(Scheme::ImexSsp2, 0.5), &trackers).unwrap();
        for tr in &trackers {
            assert!(traj.values(tr).unwrap().iter().all(|&x| x == 0.0));
        }
        assert_eq!(traj.times.first(), Some(&0.0));
        assert!((traj.times.last().unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn tracked_norm_follows_propagator() {
        let g = Grid::new(1, 8, 2.0 * PI).unwrap();
        let eps = 0.5;
        let model = linear_model(eps);
        let u = SpectralField::from_fn(&g, 1, |_, x| x[0].cos());
        let s0 = JinXinState::new(u, vec![SpectralField::zeros(&g, 1)], 0.0).unwrap();
        let tr = Tracker::new(TrackedField::U, 0.0, 2.0, Window::Full);
        let mut c = StepperConfig::new(Scheme::ImexSsp2, 2.0);
        c.dt_max = 1e-3;
        c.sample_every = Sampling::Steps { every: 100 };
        let traj = evolve(Simulation::JinXin { model, state: s0 }, &c, &[tr]).unwrap();
        let vals = traj.values(&tr).unwrap();
        let norm0 = vals[0];
        for (t, v) in traj.times.iter().zip(&vals) {
            let p = exact_linear_propagator(&[1.0], eps, &[1.0], *t);
            let want = p[(0, 0)].norm() * norm0;
            assert!((v - want).abs() < 1e-6, "t={t} got {v} want {want}");
        }
    }

    #[test]
    fn heat_norm_is_monotone_and_mean_conserved() {
        let g = Grid::new(1, 32, 2.0 * PI).unwrap();
        let u = SpectralField::from_fn(&g, 1, |_, x| 0.3 + x[0].sin() + 0.5 * (3.0 * x[0]).cos());
        let tr = Tracker::new(TrackedField::LimitU, 0.0, 2.0, Window::Full);
        let mut c = StepperConfig::new(Scheme::IfRk2, 3.0);
        c.sample_every = Sampling::Geometric { t0: 0.01, ratio: 1.5 };
        let sim = Simulation::Limit { flux: Flux::Zero { ncomp: 1, dim: 1 }, a: vec![1.0], state: LimitState { u_star: u, t: 0.0 } };
        let traj = evolve(sim, &c, &[tr]).unwrap();
        let vals = traj.values(&tr).unwrap();
        assert!(vals.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-14)));
        assert!((traj.final_limit.unwrap().u_star.mean(0) - 0.3).abs() < 1e-14);
    }

    #[test]
    fn mean_is_conserved_by_imex() {
        let g = Grid::new(1, 32, 2.0 * PI).unwrap();
        let model = JinXinModel::new(Flux::Burgers1d, vec![1.0], 0.2).unwrap();
        let u = SpectralField::from_fn(&g, 1, |_, x| 0.25 + 0.2 * x[0].sin());
        let v = vec![SpectralField::from_fn(&g, 1, |_, x| 0.1 * x[0].cos())];
        let mut s = JinXinState::new(u, v, 0.0).unwrap();
        let dt = jinxin_admissible_dt(&model, g.spacing(), 0.5);
        for _ in 0..2000 {
            s = step_jinxin(&model, &s, dt, &cfg(Scheme::ImexSsp2)).unwrap();
        }
        assert!((s.u.mean(0) - 0.25).abs() < 1e-13);
    }

    #[test]
    fn odd_burgers_data_stays_odd() {
        let g = Grid::new(1, 64, 2.0 * PI).unwrap();
        let model = JinXinModel::new(Flux::Burgers1d, vec![1.0], 0.3).unwrap();
        let u = SpectralField::from_fn(&g, 1, |_, x| 0.3 * x[0].sin() + 0.1 * (2.0 * x[0]).sin());
        let v = crate::models::darcy_velocity(&model.flux, &model.a, &u).unwrap();
        let mut s = JinXinState::new(u, v, 0.0).unwrap();
        let dt = jinxin_admissible_dt(&model, g.spacing(), 0.5);
        for _ in 0..200 {
            s = step_jinxin(&model, &s, dt, &cfg(Scheme::ImexSsp2)).unwrap();
        }
        // odd in x means purely imaginary coefficients
        assert!(s.u.coeffs().iter().all(|z| z.re.abs() < 1e-10));
    }
}
