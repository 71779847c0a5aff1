//! The energy functional `X_p(t)`: eps-weighted Chemin-Lerner norms of
//! `u` and `v`, in `L^p`-based spaces below the threshold `J` and in
//! `B^{d/2}_{2,1}` above it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrators::{series_key, TrackedField, Tracker, Trajectory};
use crate::spectral::besov::besov_from_blocks;
use crate::spectral::{NormSeries, Window};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunctionalTerm {
    pub name: String,
    pub weight: f64,
    pub norm: f64,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunctionalX {
    pub eps: f64,
    pub p: f64,
    pub threshold: i32,
    pub t: f64,
    pub terms: Vec<FunctionalTerm>,
    pub total: f64,
    /// `X_{p,0}` from the first sample.
    pub initial: f64,
    pub ratio: f64,
}

/// Trackers a run must carry for the functional.
pub fn required_trackers(dim: usize, p: f64, big_j: i32) -> Vec<Tracker> {
    let d = dim as f64;
    let low = Window::Low(big_j);
    let high = Window::High(big_j);
    let mut out = vec![
        Tracker::new(TrackedField::U, d / p - 1.0, p, low),
        Tracker::new(TrackedField::V, d / p, p, low),
    ];
    out.push(Tracker::new(TrackedField::U, d / 2.0, 2.0, high));
    out.push(Tracker::new(TrackedField::V, d / 2.0, 2.0, high));
    out
}

struct Inputs<'a> {
    u_p: &'a NormSeries,
    v_p: &'a NormSeries,
    u_2: &'a NormSeries,
    v_2: &'a NormSeries,
}

fn inputs<'a>(traj: &'a Trajectory, p: f64) -> Result<Inputs<'a>> {
    let mut missing = Vec::new();
    let mut get = |f: TrackedField, p: f64| {
        let s = traj.find(f, p);
        if s.is_none() && !missing.contains(&series_key(f, p)) {
            missing.push(series_key(f, p));
        }
        s
    };
    let (u_p, v_p, u_2, v_2) = (get(TrackedField::U, p), get(TrackedField::V, p), get(TrackedField::U, 2.0), get(TrackedField::V, 2.0));
    match (u_p, v_p, u_2, v_2) {
        (Some(u_p), Some(v_p), Some(u_2), Some(v_2)) if !u_p.is_empty() => Ok(Inputs { u_p, v_p, u_2, v_2 }),
        (Some(_), Some(_), Some(_), Some(_)) => Err(Error::InvalidArgument("trajectory has no samples".into())),
        _ => Err(Error::MissingTrackers(missing)),
    }
}

/// Running `(L~^inf, L~^1)` norms in `B^{s1} cap B^{s2}` (sum of both).
fn running_pair(series: &NormSeries, s1: f64, s2: f64, window: Window) -> Vec<(f64, f64)> {
    let a = series.running_tilde_norms(s1, window);
    let b = series.running_tilde_norms(s2, window);
    a.into_iter().zip(b).map(|(x, y)| (x.0 + y.0, x.1 + y.1)).collect()
}

struct Layout {
    names: [&'static str; 8],
    weights: [f64; 8],
}

fn layout(eps: f64) -> Layout {
    Layout {
        names: [
            "u_low_linf",
            "u_low_l1",
            "u_high_linf",
            "u_high_l1",
            "v_low_linf",
            "v_low_l1",
            "v_high_linf",
            "v_high_l1",
        ],
        weights: [
            1.0,
            1.0,
            1.0 + eps,
            1.0 / eps + 1.0 / (eps * eps),
            eps * eps,
            1.0,
            eps + eps * eps,
            1.0 + 1.0 / eps,
        ],
    }
}

/// Unweighted norms of the eight terms at every sample.
fn running_norms(inp: &Inputs, dim: usize, p: f64, big_j: i32) -> Vec<[f64; 8]> {
    let d = dim as f64;
    let low = Window::Low(big_j);
    let high = Window::High(big_j);
    let u_low_inf = running_pair(inp.u_p, d / p - 1.0, d / p, low);
    let u_low_one = running_pair(inp.u_p, d / p + 1.0, d / p + 2.0, low);
    let u_high = inp.u_2.running_tilde_norms(d / 2.0, high);
    let v_low = running_pair(inp.v_p, d / p, d / p + 1.0, low);
    let v_high = inp.v_2.running_tilde_norms(d / 2.0, high);
    (0..u_high.len())
        .map(|k| {
            [
                u_low_inf[k].0,
                u_low_one[k].1,
                u_high[k].0,
                u_high[k].1,
                v_low[k].0,
                v_low[k].1,
                v_high[k].0,
                v_high[k].1,
            ]
        })
        .collect()
}

/// `X_{p,0}` from the first row of each series.
fn initial_value(inp: &Inputs, dim: usize, p: f64, eps: f64, big_j: i32) -> f64 {
    let d = dim as f64;
    let low = Window::Low(big_j);
    let high = Window::High(big_j);
    let b = |s: &NormSeries, sv: f64, w: Window| besov_from_blocks(&s.rows()[0], s.j_min(), sv, 1.0, w).value;
    b(inp.u_p, d / p - 1.0, low)
        + b(inp.u_p, d / p, low)
        + eps * eps * (b(inp.v_p, d / p, low) + b(inp.v_p, d / p + 1.0, low))
        + (1.0 + eps) * b(inp.u_2, d / 2.0, high)
        + eps * (1.0 + eps) * b(inp.v_2, d / 2.0, high)
}

fn dim_of(traj: &Trajectory) -> usize {
    traj.final_jinxin.as_ref().map_or(1, |s| s.grid().dim())
}

/// `X_p` at the final sample, with its per-term breakdown.
pub fn functional_x(traj: &Trajectory, eps: f64, p: f64, big_j: i32) -> Result<FunctionalX> {
    let inp = inputs(traj, p)?;
    let dim = dim_of(traj);
    let norms = running_norms(&inp, dim, p, big_j);
    let last = norms.last().copied().unwrap_or([0.0; 8]);
    let lay = layout(eps);
    let terms: Vec<FunctionalTerm> = (0..8)
        .map(|i| FunctionalTerm {
            name: lay.names[i].to_string(),
            weight: lay.weights[i],
            norm: last[i],
            value: lay.weights[i] * last[i],
        })
        .collect();
    let total = terms.iter().map(|t| t.value).sum();
    let initial = initial_value(&inp, dim, p, eps, big_j);
    Ok(FunctionalX {
        eps,
        p,
        threshold: big_j,
        t: *inp.u_p.times().last().unwrap(),
        terms,
        total,
        initial,
        ratio: if initial > 0.0 { total / initial } else { 0.0 },
    })
}

/// `(t, X_p(t))` at every sample.
pub fn functional_trace(traj: &Trajectory, eps: f64, p: f64, big_j: i32) -> Result<Vec<(f64, f64)>> {
    let inp = inputs(traj, p)?;
    let lay = layout(eps);
    Ok(running_norms(&inp, dim_of(traj), p, big_j)
        .into_iter()
        .zip(inp.u_p.times())
        .map(|(n, &t)| (t, n.iter().zip(&lay.weights).map(|(a, w)| a * w).sum()))
        .collect())
}
