//! Uniform periodic grids and their Fourier transforms.
//!
//! A [`Grid`] describes the torus `[0, L)^d` sampled with `N` points per
//! axis. Fourier coefficients are stored row-major over the wavevector
//! index (axis 0 slowest), using the FFT ordering `k = 0, 1, .., N/2-1,
//! -N/2, .., -1` on every axis. Coefficients are normalized as Fourier
//! series coefficients: `u(x) = sum_k c_k exp(i kappa_k . x)`.

use std::fmt;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::spectral::dyadic::DyadicScheme;

pub const MAX_DIM: usize = 3;

struct GridData {
    dim: usize,
    n: usize,
    length: f64,
    /// Physical wavevector per flat mode index.
    kappa: Vec<[f64; MAX_DIM]>,
    kappa_norm: Vec<f64>,
    /// True if every axis satisfies |k| <= N/3.
    retained: Vec<bool>,
    /// True if some axis sits on the Nyquist index -N/2.
    nyquist: Vec<bool>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    dyadic: OnceLock<DyadicScheme>,
}

/// Periodic grid on `[0, L)^d`. Cheap to clone.
#[derive(Clone)]
pub struct Grid {
    inner: Arc<GridData>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("dim", &self.inner.dim)
            .field("n", &self.inner.n)
            .field("length", &self.inner.length)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.inner.dim == other.inner.dim
                && self.inner.n == other.inner.n
                && self.inner.length == other.inner.length)
    }
}

/// Signed integer mode index for FFT position `i` on an axis of `n` points.
pub fn signed_index(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

impl Grid {
    pub fn new(dim: usize, n: usize, length: f64) -> Result<Self> {
        if dim == 0 || dim > 2 {
            return Err(Error::InvalidGrid(format!(
                "dimension {dim} not supported (1 or 2)"
            )));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "points per axis must be a power of two >= 8, got {n}"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "box length must be positive and finite, got {length}"
            )));
        }
        let total = n
            .checked_pow(dim as u32)
            .filter(|&t| t <= 1 << 26)
            .ok_or_else(|| Error::InvalidGrid(format!("grid {n}^{dim} too large")))?;

        let base = 2.0 * std::f64::consts::PI / length;
        let cutoff = (n / 3) as i64;
        let mut kappa = Vec::with_capacity(total);
        let mut kappa_norm = Vec::with_capacity(total);
        let mut retained = Vec::with_capacity(total);
        let mut nyquist = Vec::with_capacity(total);
        for flat in 0..total {
            let mut kv = [0.0; MAX_DIM];
            let mut keep = true;
            let mut nyq = false;
            let mut rest = flat;
            for axis in (0..dim).rev() {
                let i = rest % n;
                rest /= n;
                let k = signed_index(i, n);
                kv[axis] = base * k as f64;
                keep &= k.abs() <= cutoff;
                nyq |= k == -(n as i64 / 2);
            }
            kappa_norm.push(kv.iter().map(|x| x * x).sum::<f64>().sqrt());
            kappa.push(kv);
            retained.push(keep);
            nyquist.push(nyq);
        }

        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);

        Ok(Grid {
            inner: Arc::new(GridData {
                dim,
                n,
                length,
                kappa,
                kappa_norm,
                retained,
                nyquist,
                forward,
                inverse,
                dyadic: OnceLock::new(),
            }),
        })
    }

    pub fn dim(&self) -> usize {
        self.inner.dim
    }

    pub fn points_per_axis(&self) -> usize {
        self.inner.n
    }

    pub fn length(&self) -> f64 {
        self.inner.length
    }

    pub fn spacing(&self) -> f64 {
        self.inner.length / self.inner.n as f64
    }

    /// Number of grid points (= number of Fourier modes).
    pub fn size(&self) -> usize {
        self.inner.kappa.len()
    }

    /// `L^d`, the volume of the box.
    pub fn volume(&self) -> f64 {
        self.inner.length.powi(self.inner.dim as i32)
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.inner.dim as i32)
    }

    /// Smallest nonzero physical wavenumber `2 pi / L`.
    pub fn fundamental(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.inner.length
    }

    /// Largest `|kappa|` among modes kept by the 2/3 rule.
    pub fn max_retained_wavenumber(&self) -> f64 {
        self.fundamental() * (self.inner.n / 3) as f64 * (self.inner.dim as f64).sqrt()
    }

    pub fn kappa(&self, flat: usize) -> &[f64; MAX_DIM] {
        &self.inner.kappa[flat]
    }

    pub fn kappa_norm(&self, flat: usize) -> f64 {
        self.inner.kappa_norm[flat]
    }

    pub fn kappa_norms(&self) -> &[f64] {
        &self.inner.kappa_norm
    }

    pub fn is_retained(&self, flat: usize) -> bool {
        self.inner.retained[flat]
    }

    pub fn is_nyquist(&self, flat: usize) -> bool {
        self.inner.nyquist[flat]
    }

    /// Integer mode indices of a flat position.
    pub fn mode_indices(&self, flat: usize) -> [i64; MAX_DIM] {
        let n = self.inner.n;
        let mut out = [0; MAX_DIM];
        let mut rest = flat;
        for axis in (0..self.inner.dim).rev() {
            out[axis] = signed_index(rest % n, n);
            rest /= n;
        }
        out
    }

    /// Flat position of an integer wavevector, if it is representable.
    pub fn flat_index(&self, k: &[i64]) -> Option<usize> {
        let n = self.inner.n as i64;
        if k.len() != self.inner.dim {
            return None;
        }
        let mut flat = 0usize;
        for &ki in k {
            if ki < -n / 2 || ki >= n / 2 {
                return None;
            }
            flat = flat * n as usize + ki.rem_euclid(n) as usize;
        }
        Some(flat)
    }

    /// Flat position of `-k`.
    pub fn negated(&self, flat: usize) -> usize {
        let n = self.inner.n;
        let mut out = 0usize;
        let mut stride = 1usize;
        let mut rest = flat;
        for _ in 0..self.inner.dim {
            let i = rest % n;
            rest /= n;
            out += ((n - i) % n) * stride;
            stride *= n;
        }
        out
    }

    /// Physical coordinates of grid point `flat`.
    pub fn point(&self, flat: usize) -> [f64; MAX_DIM] {
        let n = self.inner.n;
        let h = self.spacing();
        let mut out = [0.0; MAX_DIM];
        let mut rest = flat;
        for axis in (0..self.inner.dim).rev() {
            out[axis] = (rest % n) as f64 * h;
            rest /= n;
        }
        out
    }

    pub fn dyadic(&self) -> &DyadicScheme {
        self.inner.dyadic.get_or_init(|| DyadicScheme::new(self))
    }

    /// In-place forward transform of one component, normalized so the
    /// result holds Fourier series coefficients.
    pub fn forward(&self, data: &mut [Complex64]) {
        self.transform(data, &self.inner.forward);
        let scale = 1.0 / data.len() as f64;
        data.iter_mut().for_each(|c| *c *= scale);
    }

    /// In-place inverse transform (coefficients to point values).
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.transform(data, &self.inner.inverse);
    }

    fn transform(&self, data: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
        let n = self.inner.n;
        debug_assert_eq!(data.len(), self.size());
        let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
        match self.inner.dim {
            1 => fft.process_with_scratch(data, &mut scratch),
            2 => {
                fft.process_with_scratch(data, &mut scratch);
                let mut t = transpose(data, n);
                fft.process_with_scratch(&mut t, &mut scratch);
                let back = transpose(&t, n);
                data.copy_from_slice(&back);
            }
            _ => unreachable!("grid dimension validated at construction"),
        }
    }
}

fn transpose(data: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::default(); data.len()];
    for i in 0..n {
        for j in 0..n {
            out[j * n + i] = data[i * n + j];
        }
    }
    out
}
