//! Time-indexed tables of dyadic block norms.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::besov::{check_exponent, lr_sum, Window};

/// Per-block `L^p` norms of one tracked quantity at increasing instants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormSeries {
    p: f64,
    j_min: i32,
    num_blocks: usize,
    times: Vec<f64>,
    /// `rows[k][j - j_min]` is `||Delta_j w(times[k])||_{L^p}`.
    rows: Vec<Vec<f64>>,
}

impl NormSeries {
    pub fn new(p: f64, j_min: i32, num_blocks: usize) -> Self {
        NormSeries {
            p,
            j_min,
            num_blocks,
            times: Vec::new(),
            rows: Vec::new(),
        }
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn j_min(&self) -> i32 {
        self.j_min
    }

    pub fn j_max(&self) -> i32 {
        self.j_min + self.num_blocks as i32 - 1
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn push(&mut self, t: f64, norms: Vec<f64>) -> Result<()> {
        if norms.len() != self.num_blocks {
            return Err(Error::InvalidArgument(format!(
                "expected {} block norms, got {}",
                self.num_blocks,
                norms.len()
            )));
        }
        if let Some(&last) = self.times.last() {
            if !(t > last) {
                return Err(Error::InvalidArgument(format!(
                    "sample times must increase strictly ({t} after {last})"
                )));
            }
        }
        if norms.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidArgument("block norms must be finite and nonnegative".into()));
        }
        self.times.push(t);
        self.rows.push(norms);
        Ok(())
    }

    /// Column of block `j` over time.
    pub fn block(&self, j: i32) -> impl Iterator<Item = f64> + '_ {
        let idx = (j - self.j_min) as usize;
        self.rows.iter().map(move |r| r[idx])
    }

    /// `||{2^{js} ||Delta_j w||_{L^rho_T(L^p)}}_j||_{l^r}` over `[0, times[upto]]`
    /// restricted to `window`. Time integrals use the trapezoid rule.
    pub fn chemin_lerner_upto(&self, upto: usize, rho: f64, s: f64, r: f64, window: Window) -> Result<f64> {
        check_exponent("rho", rho)?;
        check_exponent("r", r)?;
        if self.is_empty() || upto >= self.len() {
            return Err(Error::InvalidArgument("sample index outside the series".into()));
        }
        if rho.is_finite() && upto < 1 {
            return Err(Error::InvalidArgument(
                "time-integrated norms need at least two samples".into(),
            ));
        }
        let times = &self.times[..=upto];
        let terms = (0..self.num_blocks).filter_map(|i| {
            let j = self.j_min + i as i32;
            if !window.contains(j) {
                return None;
            }
            let col: Vec<f64> = self.rows[..=upto].iter().map(|row| row[i]).collect();
            Some((j as f64 * s).exp2() * time_norm(times, &col, rho))
        });
        Ok(lr_sum(terms.collect::<Vec<_>>().into_iter(), r))
    }

    /// Running `L~^1_t` and `L~^inf_t` norms at every sample, computed
    /// incrementally. Returns `(sup_norm, integral_norm)` per sample with
    /// `r = 1` in `j`.
    pub fn running_tilde_norms(&self, s: f64, window: Window) -> Vec<(f64, f64)> {
        let mut sup = vec![0.0f64; self.num_blocks];
        let mut integral = vec![0.0f64; self.num_blocks];
        let weights: Vec<f64> = (0..self.num_blocks)
            .map(|i| {
                let j = self.j_min + i as i32;
                if window.contains(j) {
                    (j as f64 * s).exp2()
                } else {
                    0.0
                }
            })
            .collect();
        let mut out = Vec::with_capacity(self.len());
        for k in 0..self.len() {
            for i in 0..self.num_blocks {
                let v = self.rows[k][i];
                sup[i] = sup[i].max(v);
                if k > 0 {
                    let dt = self.times[k] - self.times[k - 1];
                    integral[i] += 0.5 * dt * (v + self.rows[k - 1][i]);
                }
            }
            let s_inf: f64 = sup.iter().zip(&weights).map(|(a, w)| a * w).sum();
            let s_one: f64 = integral.iter().zip(&weights).map(|(a, w)| a * w).sum();
            out.push((s_inf, s_one));
        }
        out
    }
}

/// `L^rho(0, T)` norm of samples by the trapezoid rule (max for `rho = inf`).
pub fn time_norm(times: &[f64], values: &[f64], rho: f64) -> f64 {
    if rho.is_infinite() {
        return values.iter().copied().fold(0.0, f64::max);
    }
    let integral: f64 = times
        .windows(2)
        .zip(values.windows(2))
        .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0].powf(rho) + v[1].powf(rho)))
        .sum();
    integral.powf(1.0 / rho)
}

/// Chemin-Lerner norm over the whole series.
pub fn chemin_lerner_norm(series: &NormSeries, rho: f64, s: f64, r: f64, window: Window) -> Result<f64> {
    if series.is_empty() {
        return Err(Error::InvalidArgument("empty norm series".into()));
    }
    series.chemin_lerner_upto(series.len() - 1, rho, s, r, window)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::besov::besov_from_blocks;

    fn series_from(table: &[Vec<f64>], times: &[f64], j_min: i32) -> NormSeries {
        let mut s = NormSeries::new(2.0, j_min, table[0].len());
        for (t, row) in times.iter().zip(table) {
            s.push(*t, row.clone()).unwrap();
        }
        s
    }

    #[test]
    fn constant_series_sup_equals_instantaneous_norm() {
        let row = vec![0.0, 0.0, 1.5, 0.0];
        let s = series_from(&[row.clone(), row.clone(), row.clone()], &[0.0, 1.0, 2.0], -1);
        let cl = chemin_lerner_norm(&s, f64::INFINITY, 0.5, 1.0, Window::Full).unwrap();
        let inst = besov_from_blocks(&row, -1, 0.5, 1.0, Window::Full).value;
        assert!((cl - inst).abs() < 1e-15);
    }

    #[test]
    fn exponential_block_integrates_to_one_minus_exp() {
        let n = 4001;
        let t_end = 20.0;
        let times: Vec<f64> = (0..n).map(|k| k as f64 * t_end / (n - 1) as f64).collect();
        let table: Vec<Vec<f64>> = times.iter().map(|t| vec![0.0, (-t).exp()]).collect();
        let s = series_from(&table, &times, 2);
        let cl = chemin_lerner_norm(&s, 1.0, 1.0, 1.0, Window::Full).unwrap();
        let exact = 8.0 * (1.0 - (-t_end).exp());
        // trapezoid error ~ h^2 T / 12
        assert!((cl - exact).abs() < 8.0 * 2e-5, "{cl} vs {exact}");
    }

    #[test]
    fn one_sample_needs_sup_norm() {
        let s = series_from(&[vec![1.0]], &[0.0], 0);
        assert!(chemin_lerner_norm(&s, 1.0, 0.0, 1.0, Window::Full).is_err());
        assert!(chemin_lerner_norm(&s, f64::INFINITY, 0.0, 1.0, Window::Full).is_ok());
    }

    #[test]
    fn push_rejects_bad_rows() {
        let mut s = NormSeries::new(2.0, 0, 2);
        s.push(0.0, vec![1.0, 2.0]).unwrap();
        assert!(s.push(0.0, vec![1.0, 2.0]).is_err());
        assert!(s.push(1.0, vec![-1.0, 2.0]).is_err());
        assert!(s.push(1.0, vec![1.0]).is_err());
    }

    #[test]
    fn running_norms_match_direct_evaluation() {
        let times = [0.0, 0.5, 1.5, 2.0, 3.0];
        let table: Vec<Vec<f64>> = times
            .iter()
            .map(|&t: &f64| vec![(-t).exp(), 0.3 + 0.1 * t, (t * 0.7f64).sin().abs()])
            .collect();
        let s = series_from(&table, &times, -1);
        let running = s.running_tilde_norms(0.5, Window::Low(0));
        for k in 1..times.len() {
            let a = s.chemin_lerner_upto(k, f64::INFINITY, 0.5, 1.0, Window::Low(0)).unwrap();
            let b = s.chemin_lerner_upto(k, 1.0, 0.5, 1.0, Window::Low(0)).unwrap();
            assert!((running[k].0 - a).abs() < 1e-14);
            assert!((running[k].1 - b).abs() < 1e-14);
        }
    }
}
