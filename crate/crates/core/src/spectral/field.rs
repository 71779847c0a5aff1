use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::grid::{Grid, MAX_DIM};

/// Multi-component real field stored by its Fourier coefficients.
///
/// Coefficients are laid out component-major; within a component they
/// follow the grid's flat mode order.
#[derive(Clone, Debug)]
pub struct SpectralField {
    grid: Grid,
    ncomp: usize,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: &Grid, ncomp: usize) -> Self {
        assert!(ncomp > 0, "a field needs at least one component");
        SpectralField {
            grid: grid.clone(),
            ncomp,
            coeffs: vec![Complex64::default(); ncomp * grid.size()],
        }
    }

    pub fn from_coeffs(grid: &Grid, ncomp: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        if ncomp == 0 || coeffs.len() != ncomp * grid.size() {
            return Err(Error::InvalidArgument(format!(
                "expected {} coefficients for {ncomp} component(s), got {}",
                ncomp * grid.size(),
                coeffs.len()
            )));
        }
        Ok(SpectralField {
            grid: grid.clone(),
            ncomp,
            coeffs,
        })
    }

    /// Transforms point values (one slice per component) into a field.
    pub fn from_physical(grid: &Grid, values: &[Vec<f64>]) -> Result<Self> {
        if values.is_empty() || values.iter().any(|v| v.len() != grid.size()) {
            return Err(Error::InvalidArgument(format!(
                "physical data must be non-empty with {} values per component",
                grid.size()
            )));
        }
        let mut coeffs = Vec::with_capacity(values.len() * grid.size());
        for comp in values {
            let mut buf: Vec<Complex64> = comp.iter().map(|&x| Complex64::new(x, 0.0)).collect();
            grid.forward(&mut buf);
            coeffs.extend(buf);
        }
        Ok(SpectralField {
            grid: grid.clone(),
            ncomp: values.len(),
            coeffs,
        })
    }

    /// Samples `f(component, x)` on the grid and transforms.
    pub fn from_fn(grid: &Grid, ncomp: usize, f: impl Fn(usize, &[f64; MAX_DIM]) -> f64) -> Self {
        let values: Vec<Vec<f64>> = (0..ncomp)
            .map(|c| (0..grid.size()).map(|i| f(c, &grid.point(i))).collect())
            .collect();
        Self::from_physical(grid, &values).expect("sizes match by construction")
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn ncomp(&self) -> usize {
        self.ncomp
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn component(&self, c: usize) -> &[Complex64] {
        let m = self.grid.size();
        &self.coeffs[c * m..(c + 1) * m]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [Complex64] {
        let m = self.grid.size();
        &mut self.coeffs[c * m..(c + 1) * m]
    }

    /// Point values of every component (real parts of the inverse transform).
    pub fn to_physical(&self) -> Vec<Vec<f64>> {
        (0..self.ncomp)
            .map(|c| {
                let mut buf = self.component(c).to_vec();
                self.grid.inverse(&mut buf);
                buf.into_iter().map(|z| z.re).collect()
            })
            .collect()
    }

    /// Largest imaginary part after the inverse transform; zero for
    /// Hermitian-symmetric coefficients up to rounding.
    pub fn max_imag_physical(&self) -> f64 {
        (0..self.ncomp)
            .map(|c| {
                let mut buf = self.component(c).to_vec();
                self.grid.inverse(&mut buf);
                buf.iter().fold(0.0f64, |m, z| m.max(z.im.abs()))
            })
            .fold(0.0, f64::max)
    }

    /// `max_k |c(-k) - conj(c(k))|`, ignoring Nyquist modes.
    pub fn hermitian_defect(&self) -> f64 {
        let m = self.grid.size();
        let mut worst = 0.0f64;
        for c in 0..self.ncomp {
            let comp = self.component(c);
            for flat in 0..m {
                if self.grid.is_nyquist(flat) {
                    continue;
                }
                let neg = self.grid.negated(flat);
                worst = worst.max((comp[neg] - comp[flat].conj()).norm());
            }
        }
        worst
    }

    /// Zeroes every coefficient outside the 2/3-rule mask.
    pub fn dealias(&mut self) {
        let m = self.grid.size();
        for c in 0..self.ncomp {
            let comp = &mut self.coeffs[c * m..(c + 1) * m];
            for (flat, z) in comp.iter_mut().enumerate() {
                if !self.grid.is_retained(flat) {
                    *z = Complex64::default();
                }
            }
        }
    }

    pub fn dealiased(mut self) -> Self {
        self.dealias();
        self
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Multiplies every component by the real multiplier `m(flat)`.
    pub fn apply_multiplier(&self, m: impl Fn(usize) -> f64) -> Self {
        let size = self.grid.size();
        let mut out = self.clone();
        for (i, z) in out.coeffs.iter_mut().enumerate() {
            *z *= m(i % size);
        }
        out
    }

    /// Spectral derivative along `axis`: multiplication by `i kappa_axis`.
    pub fn derivative(&self, axis: usize) -> Self {
        assert!(axis < self.grid.dim(), "axis {axis} out of range");
        let size = self.grid.size();
        let mut out = self.clone();
        for (i, z) in out.coeffs.iter_mut().enumerate() {
            let flat = i % size;
            if self.grid.is_nyquist(flat) {
                *z = Complex64::default();
            } else {
                *z *= Complex64::new(0.0, self.grid.kappa(flat)[axis]);
            }
        }
        out
    }

    /// `sum_i a_i d_i^2`, i.e. multiplication by `-sum_i a_i kappa_i^2`.
    pub fn weighted_laplacian(&self, a: &[f64]) -> Self {
        let grid = self.grid.clone();
        self.apply_multiplier(|flat| -symbol_s(&grid, flat, a))
    }

    /// Mean value of component `c`.
    pub fn mean(&self, c: usize) -> f64 {
        self.component(c)[0].re
    }

    pub fn scale(&mut self, s: f64) {
        self.coeffs.iter_mut().for_each(|z| *z *= s);
    }

    pub fn scaled(mut self, s: f64) -> Self {
        self.scale(s);
        self
    }

    /// `self += s * other`.
    pub fn axpy(&mut self, s: f64, other: &SpectralField) {
        debug_assert_eq!(self.coeffs.len(), other.coeffs.len());
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b * s;
        }
    }

    /// Linear combination `sum_k w_k f_k` of fields with identical shape.
    pub fn combine(terms: &[(f64, &SpectralField)]) -> Self {
        let (w0, f0) = terms[0];
        let mut out = f0.clone().scaled(w0);
        for (w, f) in &terms[1..] {
            out.axpy(*w, f);
        }
        out
    }

    pub fn check_same_shape(&self, other: &SpectralField) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(format!(
                "{:?} vs {:?}",
                self.grid, other.grid
            )));
        }
        if self.ncomp != other.ncomp {
            return Err(Error::GridMismatch(format!(
                "component count {} vs {}",
                self.ncomp, other.ncomp
            )));
        }
        Ok(())
    }

    /// `L^2` norm on the torus via Parseval (pointwise Euclidean norm over
    /// components). The mean mode is included.
    pub fn l2_norm(&self) -> f64 {
        (self.grid.volume() * self.coeffs.iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt()
    }

    /// Largest coefficient modulus; a cheap scale for tolerances.
    pub fn max_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// Splits a field with `d * n` components into `d` fields of `n`.
    pub fn split(&self, parts: usize) -> Vec<SpectralField> {
        assert_eq!(self.ncomp % parts, 0);
        let per = self.ncomp / parts;
        let m = self.grid.size();
        (0..parts)
            .map(|p| SpectralField {
                grid: self.grid.clone(),
                ncomp: per,
                coeffs: self.coeffs[p * per * m..(p + 1) * per * m].to_vec(),
            })
            .collect()
    }

    /// Stacks fields on one grid into a single multi-component field.
    pub fn stack(fields: &[SpectralField]) -> Result<Self> {
        let first = fields
            .first()
            .ok_or_else(|| Error::InvalidArgument("nothing to stack".into()))?;
        let mut coeffs = Vec::new();
        let mut ncomp = 0;
        for f in fields {
            if f.grid != first.grid {
                return Err(Error::GridMismatch("stacked fields on different grids".into()));
            }
            coeffs.extend_from_slice(&f.coeffs);
            ncomp += f.ncomp;
        }
        Ok(SpectralField {
            grid: first.grid.clone(),
            ncomp,
            coeffs,
        })
    }
}

/// `S(kappa) = sum_i a_i kappa_i^2` at mode `flat`.
pub fn symbol_s(grid: &Grid, flat: usize, a: &[f64]) -> f64 {
    let k = grid.kappa(flat);
    (0..grid.dim()).map(|i| a[i] * k[i] * k[i]).sum()
}

/// `L^p` norm of point values with the rectangle rule; the pointwise value
/// is the Euclidean norm across components. `p = inf` gives the max.
pub fn lp_norm_physical(values: &[Vec<f64>], p: f64, cell_volume: f64) -> f64 {
    let m = values.first().map_or(0, Vec::len);
    let point = |i: usize| values.iter().map(|c| c[i] * c[i]).sum::<f64>().sqrt();
    if p.is_infinite() {
        (0..m).map(point).fold(0.0, f64::max)
    } else if p == 2.0 {
        ((0..m).map(|i| values.iter().map(|c| c[i] * c[i]).sum::<f64>()).sum::<f64>() * cell_volume)
            .sqrt()
    } else {
        ((0..m).map(|i| point(i).powf(p)).sum::<f64>() * cell_volume).powf(1.0 / p)
    }
}

/// Pointwise (dealiased) product of two single-component fields.
pub fn nonlinear_product(a: &SpectralField, b: &SpectralField) -> Result<SpectralField> {
    if a.grid() != b.grid() {
        return Err(Error::GridMismatch(format!("{:?} vs {:?}", a.grid(), b.grid())));
    }
    if a.ncomp() != 1 || b.ncomp() != 1 {
        return Err(Error::InvalidArgument(
            "nonlinear_product expects single-component fields".into(),
        ));
    }
    let pa = a.clone().dealiased().to_physical();
    let pb = b.clone().dealiased().to_physical();
    let prod: Vec<f64> = pa[0].iter().zip(&pb[0]).map(|(x, y)| x * y).collect();
    Ok(SpectralField::from_physical(a.grid(), &[prod])?.dealiased())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid1(n: usize, l: f64) -> Grid {
        Grid::new(1, n, l).unwrap()
    }

    #[test]
    fn derivative_of_sine() {
        let l = 3.0;
        let g = grid1(32, l);
        let w = 2.0 * PI / l;
        let f = SpectralField::from_fn(&g, 1, |_, x| (w * x[0]).sin());
        let df = f.derivative(0).to_physical();
        for i in 0..g.size() {
            let x = g.point(i)[0];
            assert!((df[0][i] - w * (w * x).cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn derivative_of_constant_is_zero() {
        let g = Grid::new(2, 16, 1.0).unwrap();
        let f = SpectralField::from_fn(&g, 2, |c, _| 1.5 + c as f64);
        assert!(f.derivative(0).max_coeff() < 1e-15);
        assert!(f.derivative(1).max_coeff() < 1e-15);
    }

    #[test]
    fn mixed_derivatives_commute() {
        let g = Grid::new(2, 16, 2.0).unwrap();
        let f = SpectralField::from_fn(&g, 1, |_, x| (x[0] * 3.1).sin() * (x[1] * 2.2 + 0.3).cos());
        let a = f.derivative(0).derivative(1);
        let b = f.derivative(1).derivative(0);
        for (x, y) in a.coeffs().iter().zip(b.coeffs()) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn product_with_one_is_identity() {
        let g = grid1(32, 2.0 * PI);
        let one = SpectralField::from_fn(&g, 1, |_, _| 1.0);
        let b = SpectralField::from_fn(&g, 1, |_, x| x[0].sin() + 0.3 * (4.0 * x[0]).cos());
        let p = nonlinear_product(&one, &b).unwrap();
        for (x, y) in p.coeffs().iter().zip(b.coeffs()) {
            assert!((x - y).norm() < 1e-14);
        }
    }

    #[test]
    fn product_of_modes_respects_the_mask() {
        let g = grid1(32, 2.0 * PI);
        // N/3 = 10 is the last retained index.
        let mode = |k: f64| SpectralField::from_fn(&g, 1, move |_, x| (k * x[0]).cos());
        let p = nonlinear_product(&mode(4.0), &mode(5.0)).unwrap();
        // cos 4x cos 5x = (cos x + cos 9x) / 2
        assert!((p.component(0)[1].re - 0.25).abs() < 1e-14);
        assert!((p.component(0)[9].re - 0.25).abs() < 1e-14);
        let q = nonlinear_product(&mode(6.0), &mode(5.0)).unwrap();
        // cos 11x is outside the mask
        assert!(q.component(0)[11].norm() < 1e-15);
        assert!((q.component(0)[1].re - 0.25).abs() < 1e-14);
    }

    #[test]
    fn l2_norm_matches_quadrature() {
        let g = Grid::new(2, 16, 1.7).unwrap();
        let f = SpectralField::from_fn(&g, 2, |c, x| (x[0] * 3.0 + c as f64).sin() + x[1].cos());
        let phys = f.to_physical();
        let q = lp_norm_physical(&phys, 2.0, g.cell_volume());
        assert!((q - f.l2_norm()).abs() < 1e-12 * q);
    }

    #[test]
    fn grid_mismatch_is_reported() {
        let a = SpectralField::zeros(&grid1(16, 1.0), 1);
        let b = SpectralField::zeros(&grid1(32, 1.0), 1);
        assert!(matches!(nonlinear_product(&a, &b), Err(Error::GridMismatch(_))));
    }
}
