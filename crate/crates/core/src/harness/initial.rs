//! Synthesis of initial data with controlled size and dyadic profile.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::threshold_j;
use crate::error::{Error, Result};
use crate::models::{darcy_velocity, Flux, JinXinState, LimitState};
use crate::spectral::field::lp_norm_physical;
use crate::spectral::{Grid, SpectralField};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum Profile {
    /// Periodized Gaussian centred in the box; component `c` is shifted
    /// by `c L / 8` along every axis.
    GaussianBump {
        #[serde(default = "default_width")]
        width: f64,
    },
    /// `|u^(k)| ~ |k|^-(sigma1 + d/2)` with uniform random phases on
    /// `0 < |k| <= kappa_max`, zero elsewhere.
    RandomSpectrum {
        sigma1: f64,
        seed: u64,
        /// Band edge in physical wavenumber; defaults to `2^J_eps`
        /// capped by the dealiasing limit.
        #[serde(default)]
        kappa_max: Option<f64>,
    },
    /// `cos(k . x)` with integer mode indices `k`.
    SingleMode { k: Vec<i64> },
}

fn default_width() -> f64 {
    1.0
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum Preparation {
    /// `v0 = -a d u0 + f(u0)`.
    #[default]
    DarcyPrepared,
    /// `v0_i = v_scale eps^-eps_power w0`, where `w0` is the mean-free
    /// profile of `u0` normalized to unit sup norm. No Darcy relation.
    IllPrepared {
        v_scale: f64,
        #[serde(default)]
        eps_power: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialDataSpec {
    pub profile: Profile,
    /// Sup norm of `u0`.
    pub amplitude: f64,
    #[serde(default)]
    pub preparation: Preparation,
}

impl InitialDataSpec {
    pub fn validate(&self, path: &str) -> Result<()> {
        if !(self.amplitude.is_finite() && self.amplitude >= 0.0) {
            return Err(Error::config(format!("{path}.amplitude"), "must be finite and nonnegative"));
        }
        if self.amplitude > 1.0 {
            return Err(Error::config(
                format!("{path}.amplitude"),
                "small data required: the sup norm of u0 must not exceed 1",
            ));
        }
        match &self.profile {
            Profile::GaussianBump { width } if !(*width > 0.0) => {
                return Err(Error::config(format!("{path}.profile.width"), "must be positive"));
            }
            Profile::RandomSpectrum { sigma1, kappa_max, .. } => {
                if !sigma1.is_finite() {
                    return Err(Error::config(format!("{path}.profile.sigma1"), "must be finite"));
                }
                if matches!(kappa_max, Some(k) if !(*k > 0.0)) {
                    return Err(Error::config(format!("{path}.profile.kappa_max"), "must be positive"));
                }
            }
            Profile::SingleMode { k } if k.is_empty() => {
                return Err(Error::config(format!("{path}.profile.k"), "needs one index per axis"));
            }
            _ => {}
        }
        match self.preparation {
            Preparation::IllPrepared { v_scale, eps_power } if !(v_scale.is_finite() && eps_power.is_finite()) => {
                Err(Error::config(format!("{path}.preparation"), "v_scale and eps_power must be finite"))
            }
            _ => Ok(()),
        }
    }
}

/// Admissible low-frequency regularity for the decay estimates:
/// `-d/p <= sigma1 <= d/p - 1`.
pub fn check_sigma1(sigma1: f64, d: usize, p: f64) -> Result<()> {
    let lo = -(d as f64) / p;
    let hi = d as f64 / p - 1.0;
    if sigma1 < lo - 1e-12 || sigma1 > hi + 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "sigma1 = {sigma1} outside the admissible range [-d/p, d/p - 1] = [{lo}, {hi}]"
        )));
    }
    Ok(())
}

/// Default band edge of the random spectrum.
pub fn default_band(grid: &Grid, eps: f64) -> f64 {
    let cap = grid.fundamental() * (grid.points_per_axis() / 3) as f64;
    (threshold_j(eps, 0) as f64).exp2().min(cap)
}

fn sup_norm(field: &SpectralField) -> f64 {
    lp_norm_physical(&field.to_physical(), f64::INFINITY, 1.0)
}

fn normalize_sup(field: SpectralField, target: f64) -> SpectralField {
    let m = sup_norm(&field);
    if m == 0.0 {
        field
    } else {
        field.scaled(target / m)
    }
}

fn profile_field(profile: &Profile, grid: &Grid, ncomp: usize, eps: f64) -> Result<SpectralField> {
    let d = grid.dim();
    let len = grid.length();
    Ok(match profile {
        Profile::GaussianBump { width } => SpectralField::from_fn(grid, ncomp, |c, x| {
            let shift = c as f64 * len / 8.0;
            let mut r2 = 0.0;
            for xi in x.iter().take(d) {
                // nearest periodic image of the centre
                let mut dx = (xi - 0.5 * len - shift).rem_euclid(len);
                if dx > 0.5 * len {
                    dx -= len;
                }
                r2 += dx * dx;
            }
            (-r2 / (2.0 * width * width)).exp()
        }),
        Profile::SingleMode { k } => {
            if k.len() != d {
                return Err(Error::InvalidArgument(format!("single_mode needs {d} indices, got {}", k.len())));
            }
            let flat = grid
                .flat_index(k)
                .ok_or_else(|| Error::InvalidArgument(format!("mode {k:?} not on the grid")))?;
            if !grid.is_retained(flat) {
                return Err(Error::InvalidArgument(format!("mode {k:?} lies outside the dealiased band")));
            }
            let kappa = *grid.kappa(flat);
            SpectralField::from_fn(grid, ncomp, |_, x| {
                let phase: f64 = (0..d).map(|i| kappa[i] * x[i]).sum();
                phase.cos()
            })
        }
        Profile::RandomSpectrum { sigma1, seed, kappa_max } => {
            let band = kappa_max.unwrap_or_else(|| default_band(grid, eps));
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let mut field = SpectralField::zeros(grid, ncomp);
            let expo = -(sigma1 + d as f64 / 2.0);
            for c in 0..ncomp {
                let comp = field.component_mut(c);
                for flat in 0..grid.size() {
                    let partner = grid.negated(flat);
                    let r = grid.kappa_norm(flat);
                    if partner <= flat || r == 0.0 || r > band || !grid.is_retained(flat) {
                        continue;
                    }
                    let theta: f64 = rng.random::<f64>() * std::f64::consts::TAU;
                    let z = Complex64::from_polar(r.powf(expo), theta);
                    comp[flat] = z;
                    comp[partner] = z.conj();
                }
            }
            field
        }
    })
}

/// Builds the relaxation state and the matching limit state (same `u0`).
pub fn make_initial_data(spec: &InitialDataSpec, grid: &Grid, flux: &Flux, a: &[f64], eps: f64) -> Result<(JinXinState, LimitState)> {
    spec.validate("data")?;
    let ncomp = flux.ncomp();
    let u0 = normalize_sup(profile_field(&spec.profile, grid, ncomp, eps)?.dealiased(), spec.amplitude);
    let v0 = match spec.preparation {
        Preparation::DarcyPrepared => darcy_velocity(flux, a, &u0)?,
        Preparation::IllPrepared { v_scale, eps_power } => {
            let mut w = u0.clone();
            for c in 0..ncomp {
                w.component_mut(c)[0] = Complex64::default();
            }
            let w = normalize_sup(w, 1.0).scaled(v_scale * eps.powf(-eps_power));
            vec![w; grid.dim()]
        }
    };
    let jx = JinXinState::new(u0.clone(), v0, 0.0)?;
    Ok((jx, LimitState { u_star: u0, t: 0.0 }))
}
