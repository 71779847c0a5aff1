use crate::error::{Error, Result};
use crate::models::flux::Flux;
use crate::spectral::field::SpectralField;
use crate::spectral::Grid;

/// Relaxation system with `A_i = a_i I_n` and parameter `eps`.
#[derive(Clone, Debug, PartialEq)]
pub struct JinXinModel {
    pub flux: Flux,
    pub a: Vec<f64>,
    pub eps: f64,
}

impl JinXinModel {
    pub fn new(flux: Flux, a: Vec<f64>, eps: f64) -> Result<Self> {
        check_coefficients(&flux, &a)?;
        if !(eps.is_finite() && eps > 0.0) {
            return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
        }
        Ok(JinXinModel { flux, a, eps })
    }

    pub fn with_eps(&self, eps: f64) -> Result<Self> {
        Self::new(self.flux.clone(), self.a.clone(), eps)
    }

    pub fn dim(&self) -> usize {
        self.flux.dim()
    }

    pub fn ncomp(&self) -> usize {
        self.flux.ncomp()
    }
}

pub fn check_coefficients(flux: &Flux, a: &[f64]) -> Result<()> {
    if a.len() != flux.dim() {
        return Err(Error::InvalidArgument(format!(
            "expected {} diffusion coefficients, got {}",
            flux.dim(),
            a.len()
        )));
    }
    if let Some(bad) = a.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
        return Err(Error::InvalidArgument(format!("a_i must be positive, got {bad}")));
    }
    Ok(())
}

/// One time level `(u, v_1..v_d)` of the relaxation system.
#[derive(Clone, Debug)]
pub struct JinXinState {
    pub u: SpectralField,
    pub v: Vec<SpectralField>,
    pub t: f64,
}

impl JinXinState {
    pub fn new(u: SpectralField, v: Vec<SpectralField>, t: f64) -> Result<Self> {
        if v.len() != u.grid().dim() {
            return Err(Error::InvalidArgument(format!(
                "need {} flux fields, got {}",
                u.grid().dim(),
                v.len()
            )));
        }
        for vi in &v {
            vi.check_same_shape(&u)?;
        }
        Ok(JinXinState { u, v, t })
    }

    pub fn zeros(grid: &Grid, ncomp: usize) -> Self {
        JinXinState {
            u: SpectralField::zeros(grid, ncomp),
            v: vec![SpectralField::zeros(grid, ncomp); grid.dim()],
            t: 0.0,
        }
    }

    pub fn grid(&self) -> &Grid {
        self.u.grid()
    }

    pub fn check_finite(&self) -> Result<()> {
        if !self.u.is_finite() {
            return Err(Error::Divergence { t: self.t, what: "u".into() });
        }
        for (i, vi) in self.v.iter().enumerate() {
            if !vi.is_finite() {
                return Err(Error::Divergence { t: self.t, what: format!("v_{}", i + 1) });
            }
        }
        Ok(())
    }
}

/// One time level of the limit equation.
#[derive(Clone, Debug)]
pub struct LimitState {
    pub u_star: SpectralField,
    pub t: f64,
}

impl LimitState {
    pub fn check_finite(&self) -> Result<()> {
        if !self.u_star.is_finite() {
            return Err(Error::Divergence { t: self.t, what: "u*".into() });
        }
        Ok(())
    }
}

/// `-sum_i d_i w_i`.
pub fn negative_divergence(w: &[SpectralField]) -> SpectralField {
    let mut out = w[0].derivative(0).scaled(-1.0);
    for (i, wi) in w.iter().enumerate().skip(1) {
        out.axpy(-1.0, &wi.derivative(i));
    }
    out
}

/// Time derivatives `(du/dt, dv_i/dt)` of the relaxation system.
pub fn jinxin_rhs(model: &JinXinModel, state: &JinXinState) -> Result<(SpectralField, Vec<SpectralField>)> {
    state.check_finite()?;
    let inv_eps2 = 1.0 / (model.eps * model.eps);
    let f = model.flux.evaluate_field(&state.u)?;
    let du = negative_divergence(&state.v).dealiased();
    let dv = state
        .v
        .iter()
        .enumerate()
        .map(|(i, vi)| {
            let mut r = state.u.derivative(i).scaled(-model.a[i]);
            r.axpy(-1.0, vi);
            r.axpy(1.0, &f[i]);
            r.scaled(inv_eps2).dealiased()
        })
        .collect();
    Ok((du, dv))
}

/// `sum_i a_i d_i^2 u* - sum_i d_i f_i(u*)`.
pub fn limit_rhs(flux: &Flux, a: &[f64], state: &LimitState) -> Result<SpectralField> {
    state.check_finite()?;
    let f = flux.evaluate_field(&state.u_star)?;
    let mut out = state.u_star.weighted_laplacian(a);
    out.axpy(1.0, &negative_divergence(&f));
    Ok(out.dealiased())
}

/// Darcy's law `v*_i = -a_i d_i u* + f_i(u*)`.
pub fn darcy_velocity(flux: &Flux, a: &[f64], u_star: &SpectralField) -> Result<Vec<SpectralField>> {
    let f = flux.evaluate_field(u_star)?;
    Ok(f.into_iter()
        .enumerate()
        .map(|(i, fi)| {
            let mut v = u_star.derivative(i).scaled(-a[i]);
            v.axpy(1.0, &fi);
            v.dealiased()
        })
        .collect())
}

/// `z_i = a_i d_i u + v_i`.
pub fn effective_z(model: &JinXinModel, state: &JinXinState) -> Vec<SpectralField> {
    state
        .v
        .iter()
        .enumerate()
        .map(|(i, vi)| {
            let mut z = state.u.derivative(i).scaled(model.a[i]);
            z.axpy(1.0, vi);
            z
        })
        .collect()
}

/// `Z_i = a_i d_i u + v_i - f_i(u)`: the distance to Darcy's law.
pub fn effective_big_z(model: &JinXinModel, state: &JinXinState) -> Result<Vec<SpectralField>> {
    let f = model.flux.evaluate_field(&state.u)?;
    Ok(effective_z(model, state)
        .into_iter()
        .zip(f)
        .map(|(mut z, fi)| {
            z.axpy(-1.0, &fi);
            z
        })
        .collect())
}
