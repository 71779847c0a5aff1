//! Flux functions `f_i : R^n -> R^n`, one per spatial direction.
//!
//! Every flux must vanish to second order at the origin:
//! `f_i(0) = 0` and `d f_i / d u_k (0) = 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::SpectralField;

pub const MAX_COMPONENTS: usize = 4;

/// One monomial `coefficient * prod_k u_k^{exponents[k]}` contributing to
/// component `component` of `f_direction`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Monomial {
    pub direction: usize,
    pub component: usize,
    pub exponents: Vec<u32>,
    pub coefficient: f64,
}

impl Monomial {
    fn degree(&self) -> u32 {
        self.exponents.iter().sum()
    }

    fn eval(&self, u: &[f64]) -> f64 {
        self.exponents
            .iter()
            .zip(u)
            .fold(self.coefficient, |acc, (&e, &x)| acc * x.powi(e as i32))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PolynomialFlux {
    ncomp: usize,
    dim: usize,
    terms: Vec<Monomial>,
}

impl PolynomialFlux {
    pub fn new(ncomp: usize, dim: usize, terms: Vec<Monomial>) -> Result<Self> {
        check_shape(ncomp, dim)?;
        for (i, t) in terms.iter().enumerate() {
            if t.direction >= dim || t.component >= ncomp {
                return Err(Error::InvalidFlux(format!(
                    "term {i}: direction {} / component {} out of range for d = {dim}, n = {ncomp}",
                    t.direction, t.component
                )));
            }
            if t.exponents.len() != ncomp {
                return Err(Error::InvalidFlux(format!(
                    "term {i}: expected {ncomp} exponents, got {}",
                    t.exponents.len()
                )));
            }
            if t.exponents.iter().any(|&e| e > 8) {
                return Err(Error::InvalidFlux(format!("term {i}: exponent above 8")));
            }
            if !t.coefficient.is_finite() {
                return Err(Error::InvalidFlux(format!("term {i}: non-finite coefficient")));
            }
            if t.degree() < 2 && t.coefficient != 0.0 {
                return Err(Error::InvalidFlux(format!(
                    "term {i} has degree {}: fluxes must satisfy f_i(0) = 0 and \
                     df_i/du_k(0) = 0, so constant and linear terms are not allowed",
                    t.degree()
                )));
            }
        }
        Ok(PolynomialFlux { ncomp, dim, terms })
    }

    pub fn terms(&self) -> &[Monomial] {
        &self.terms
    }
}

fn check_shape(ncomp: usize, dim: usize) -> Result<()> {
    if ncomp == 0 || ncomp > MAX_COMPONENTS {
        return Err(Error::InvalidFlux(format!(
            "component count {ncomp} outside 1..={MAX_COMPONENTS}"
        )));
    }
    if dim == 0 || dim > 2 {
        return Err(Error::InvalidFlux(format!("dimension {dim} outside 1..=2")));
    }
    Ok(())
}

/// Flux families understood by the simulator.
#[derive(Clone, Debug, PartialEq)]
pub enum Flux {
    Zero { ncomp: usize, dim: usize },
    /// `f(u) = u^2 / 2`, scalar, one direction.
    Burgers1d,
    /// `f_1(u) = u_1 u`, `f_2(u) = u_2 u`, with `u in R^2`.
    Burgers2d,
    Polynomial(PolynomialFlux),
}

impl Flux {
    /// Looks up a catalog entry by id. `terms` is used only for `polynomial`.
    pub fn from_id(id: &str, ncomp: usize, dim: usize, terms: &[Monomial]) -> Result<Self> {
        let flux = match id {
            "zero" => {
                check_shape(ncomp, dim)?;
                Flux::Zero { ncomp, dim }
            }
            "burgers1d" => Flux::Burgers1d,
            "burgers2d" => Flux::Burgers2d,
            "polynomial" => Flux::Polynomial(PolynomialFlux::new(ncomp, dim, terms.to_vec())?),
            other => {
                return Err(Error::InvalidFlux(format!(
                    "unknown flux id {other:?} (expected zero, burgers1d, burgers2d, polynomial)"
                )))
            }
        };
        if flux.ncomp() != ncomp || flux.dim() != dim {
            return Err(Error::InvalidFlux(format!(
                "{id} has n = {}, d = {}; model asks for n = {ncomp}, d = {dim}",
                flux.ncomp(),
                flux.dim()
            )));
        }
        Ok(flux)
    }

    pub fn id(&self) -> &'static str {
        match self {
            Flux::Zero { .. } => "zero",
            Flux::Burgers1d => "burgers1d",
            Flux::Burgers2d => "burgers2d",
            Flux::Polynomial(_) => "polynomial",
        }
    }

    pub fn ncomp(&self) -> usize {
        match self {
            Flux::Zero { ncomp, .. } => *ncomp,
            Flux::Burgers1d => 1,
            Flux::Burgers2d => 2,
            Flux::Polynomial(p) => p.ncomp,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Flux::Zero { dim, .. } => *dim,
            Flux::Burgers1d => 1,
            Flux::Burgers2d => 2,
            Flux::Polynomial(p) => p.dim,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Flux::Zero { .. } => true,
            Flux::Polynomial(p) => p.terms.iter().all(|t| t.coefficient == 0.0),
            _ => false,
        }
    }

    /// Evaluates all directions at one point; `out[i * n + k] = f_i(u)_k`.
    pub fn evaluate_point(&self, u: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|x| *x = 0.0);
        match self {
            Flux::Zero { .. } => {}
            Flux::Burgers1d => out[0] = 0.5 * u[0] * u[0],
            Flux::Burgers2d => {
                out[0] = u[0] * u[0];
                out[1] = u[0] * u[1];
                out[2] = u[1] * u[0];
                out[3] = u[1] * u[1];
            }
            Flux::Polynomial(p) => {
                for t in &p.terms {
                    out[t.direction * p.ncomp + t.component] += t.eval(u);
                }
            }
        }
    }

    pub fn evaluate(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim() * self.ncomp()];
        self.evaluate_point(u, &mut out);
        out
    }

    /// `jac[(i * n + k) * n + m] = d f_i,k / d u_m`. Closed form for the
    /// built-ins, central differences with `h = 1e-5 (1 + |u_m|)` otherwise.
    pub fn jacobian(&self, u: &[f64]) -> Vec<f64> {
        let n = self.ncomp();
        let d = self.dim();
        let mut jac = vec![0.0; d * n * n];
        match self {
            Flux::Zero { .. } => {}
            Flux::Burgers1d => jac[0] = u[0],
            Flux::Burgers2d => {
                // f_1 = (u1^2, u1 u2), f_2 = (u2 u1, u2^2)
                jac[0] = 2.0 * u[0];
                jac[1] = 0.0;
                jac[2] = u[1];
                jac[3] = u[0];
                jac[4] = u[1];
                jac[5] = u[0];
                jac[6] = 0.0;
                jac[7] = 2.0 * u[1];
            }
            Flux::Polynomial(_) => {
                let mut up = u.to_vec();
                let mut fp = vec![0.0; d * n];
                let mut fm = vec![0.0; d * n];
                for m in 0..n {
                    let h = 1e-5 * (1.0 + u[m].abs());
                    up[m] = u[m] + h;
                    self.evaluate_point(&up, &mut fp);
                    up[m] = u[m] - h;
                    self.evaluate_point(&up, &mut fm);
                    up[m] = u[m];
                    for row in 0..d * n {
                        jac[row * n + m] = (fp[row] - fm[row]) / (2.0 * h);
                    }
                }
            }
        }
        jac
    }

    /// Largest characteristic speed proxy `max |d f_i / d u|` over the
    /// sampled states (max absolute Jacobian entry sum per row).
    pub fn max_speed(&self, samples: impl Iterator<Item = Vec<f64>>) -> f64 {
        let n = self.ncomp();
        samples
            .map(|u| {
                let jac = self.jacobian(&u);
                jac.chunks(n).map(|row| row.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }

    /// `f_i(u)` for a spectral state; returns `d` dealiased fields of `n`
    /// components. The product is formed in physical space.
    pub fn evaluate_field(&self, u: &SpectralField) -> Result<Vec<SpectralField>> {
        let n = self.ncomp();
        let d = self.dim();
        if u.ncomp() != n || u.grid().dim() != d {
            return Err(Error::InvalidArgument(format!(
                "flux {} expects n = {n}, d = {d}; state has n = {}, d = {}",
                self.id(),
                u.ncomp(),
                u.grid().dim()
            )));
        }
        let grid = u.grid();
        if self.is_zero() {
            return Ok(vec![SpectralField::zeros(grid, n); d]);
        }
        let phys = u.clone().dealiased().to_physical();
        let size = grid.size();
        let mut out = vec![vec![0.0; size]; d * n];
        let mut point = vec![0.0; n];
        let mut val = vec![0.0; d * n];
        for x in 0..size {
            for (k, comp) in phys.iter().enumerate() {
                point[k] = comp[x];
            }
            self.evaluate_point(&point, &mut val);
            for (row, v) in val.iter().enumerate() {
                out[row][x] = *v;
            }
        }
        out.chunks(n)
            .map(|chunk| Ok(SpectralField::from_physical(grid, chunk)?.dealiased()))
            .collect()
    }
}

/// Named catalog of built-in fluxes.
pub fn builtin_fluxes() -> Vec<(&'static str, Flux)> {
    vec![
        ("burgers1d", Flux::Burgers1d),
        ("burgers2d", Flux::Burgers2d),
        ("zero", Flux::Zero { ncomp: 1, dim: 1 }),
        (
            "polynomial",
            Flux::Polynomial(
                PolynomialFlux::new(
                    1,
                    1,
                    vec![
                        Monomial { direction: 0, component: 0, exponents: vec![2], coefficient: 0.5 },
                        Monomial { direction: 0, component: 0, exponents: vec![3], coefficient: -0.25 },
                    ],
                )
                .expect("valid example polynomial"),
            ),
        ),
    ]
}
