//! Homogeneous Littlewood-Paley decomposition on the discrete lattice.
//!
//! Dyadic indices refer to physical wavenumbers: block `j` keeps
//! `3/4 * 2^j < |kappa| < 8/3 * 2^j`. The window `[j_min, j_max]` is the
//! smallest set of blocks that partitions every nonzero retained mode,
//! so the base cutoff `chi(2^-j_min kappa)` only sees the mean mode.

use crate::error::{Error, Result};
use crate::spectral::field::{lp_norm_physical, SpectralField};
use crate::spectral::grid::Grid;

const CHI_INNER: f64 = 0.75;
const CHI_OUTER: f64 = 4.0 / 3.0;

/// Smooth step: 1 for `s <= 0`, 0 for `s >= 1`, C-infinity in between.
pub fn smooth_step(s: f64) -> f64 {
    if s <= 0.0 {
        1.0
    } else if s >= 1.0 {
        0.0
    } else {
        let a = (-1.0 / (1.0 - s)).exp();
        let b = (-1.0 / s).exp();
        a / (a + b)
    }
}

/// Radial cutoff: 1 on `|xi| <= 3/4`, 0 on `|xi| >= 4/3`.
pub fn chi(r: f64) -> f64 {
    smooth_step((r - CHI_INNER) / (CHI_OUTER - CHI_INNER))
}

/// Annulus profile `chi(xi/2) - chi(xi)`.
pub fn phi(r: f64) -> f64 {
    chi(r / 2.0) - chi(r)
}

/// Indices `j` that may satisfy `3/4 < r 2^-j < 8/3`.
fn candidate_blocks(r: f64) -> impl Iterator<Item = i32> {
    let c = r.log2().floor() as i32;
    (c - 2)..=(c + 1)
}

#[derive(Clone, Copy, Debug, Default)]
struct ModeWeights {
    /// Up to two overlapping blocks: (j, phi(2^-j kappa)).
    blocks: [(i32, f64); 2],
    count: u8,
}

/// Cached multipliers of the decomposition for one grid.
#[derive(Clone, Debug)]
pub struct DyadicScheme {
    j_min: i32,
    j_max: i32,
    weights: Vec<ModeWeights>,
}

impl DyadicScheme {
    pub fn new(grid: &Grid) -> Self {
        let j_min = (0.75 * grid.fundamental()).log2().floor() as i32;
        let j_max = (grid.max_retained_wavenumber() / 1.5).log2().ceil() as i32;
        let weights = grid
            .kappa_norms()
            .iter()
            .map(|&r| {
                let mut w = ModeWeights::default();
                if r == 0.0 {
                    return w;
                }
                for j in candidate_blocks(r) {
                    if j < j_min || j > j_max {
                        continue;
                    }
                    let v = phi(r * (-j as f64).exp2());
                    if v > 0.0 && (w.count as usize) < w.blocks.len() {
                        w.blocks[w.count as usize] = (j, v);
                        w.count += 1;
                    }
                }
                w
            })
            .collect();
        DyadicScheme {
            j_min,
            j_max,
            weights,
        }
    }

    pub fn j_min(&self) -> i32 {
        self.j_min
    }

    pub fn j_max(&self) -> i32 {
        self.j_max
    }

    pub fn indices(&self) -> std::ops::RangeInclusive<i32> {
        self.j_min..=self.j_max
    }

    pub fn num_blocks(&self) -> usize {
        (self.j_max - self.j_min + 1) as usize
    }

    pub fn check_index(&self, j: i32) -> Result<()> {
        if j < self.j_min || j > self.j_max {
            return Err(Error::DyadicRange {
                index: j,
                min: self.j_min,
                max: self.j_max,
            });
        }
        Ok(())
    }

    /// `phi(2^-j kappa)` at mode `flat`.
    pub fn multiplier(&self, j: i32, flat: usize) -> f64 {
        let w = &self.weights[flat];
        w.blocks[..w.count as usize]
            .iter()
            .find(|(jj, _)| *jj == j)
            .map_or(0.0, |(_, v)| *v)
    }

    /// Base cutoff `chi(2^-j_min kappa)`: one on the mean mode, zero elsewhere.
    pub fn base_multiplier(&self, grid: &Grid, flat: usize) -> f64 {
        chi(grid.kappa_norm(flat) * (-self.j_min as f64).exp2())
    }

    /// Sum of all multipliers at a mode (base block included).
    pub fn partition_sum(&self, grid: &Grid, flat: usize) -> f64 {
        let w = &self.weights[flat];
        self.base_multiplier(grid, flat) + w.blocks[..w.count as usize].iter().map(|b| b.1).sum::<f64>()
    }

    /// Squared `L^2` norms of every block, via Parseval. Index `j - j_min`.
    pub fn block_l2_squared(&self, fields: &[&SpectralField]) -> Vec<f64> {
        let mut acc = vec![0.0; self.num_blocks()];
        for f in fields {
            let grid = f.grid();
            let size = grid.size();
            for c in 0..f.ncomp() {
                for (flat, z) in f.component(c).iter().enumerate() {
                    let w = &self.weights[flat];
                    if w.count == 0 {
                        continue;
                    }
                    let e = z.norm_sqr();
                    for &(j, v) in &w.blocks[..w.count as usize] {
                        acc[(j - self.j_min) as usize] += e * v * v;
                    }
                }
                debug_assert_eq!(f.component(c).len(), size);
            }
        }
        let vol = fields.first().map_or(1.0, |f| f.grid().volume());
        acc.iter_mut().for_each(|a| *a *= vol);
        acc
    }

    /// `||Delta_j w||_{L^p}` for every block, where `w` stacks the given
    /// fields as components. Index `j - j_min`.
    pub fn block_norms(&self, fields: &[&SpectralField], p: f64) -> Vec<f64> {
        if p == 2.0 {
            return self.block_l2_squared(fields).into_iter().map(f64::sqrt).collect();
        }
        self.indices()
            .map(|j| {
                let mut phys = Vec::new();
                for f in fields {
                    phys.extend(self.block_unchecked(f, j).to_physical());
                }
                let cell = fields[0].grid().cell_volume();
                lp_norm_physical(&phys, p, cell)
            })
            .collect()
    }

    fn block_unchecked(&self, field: &SpectralField, j: i32) -> SpectralField {
        field.apply_multiplier(|flat| self.multiplier(j, flat))
    }
}

/// `Delta_j field`.
pub fn dyadic_block(field: &SpectralField, j: i32) -> Result<SpectralField> {
    let scheme = field.grid().dyadic();
    scheme.check_index(j)?;
    Ok(scheme.block_unchecked(field, j))
}

/// `S_J field = sum_{j <= J-1} Delta_j field`, including the mean mode.
pub fn lowfreq_cutoff(field: &SpectralField, big_j: i32) -> Result<SpectralField> {
    let scheme = field.grid().dyadic();
    if big_j < scheme.j_min() || big_j > scheme.j_max() + 1 {
        return Err(Error::DyadicRange {
            index: big_j,
            min: scheme.j_min(),
            max: scheme.j_max() + 1,
        });
    }
    let grid = field.grid().clone();
    let scale = (-big_j as f64).exp2();
    Ok(field.apply_multiplier(|flat| chi(grid.kappa_norm(flat) * scale)))
}

/// The mean-mode part `chi(2^-j_min D) field`.
pub fn base_block(field: &SpectralField) -> SpectralField {
    let grid = field.grid().clone();
    let scheme = grid.dyadic();
    field.apply_multiplier(|flat| scheme.base_multiplier(&grid, flat))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn cutoff_profile_shape() {
        assert_eq!(chi(0.0), 1.0);
        assert_eq!(chi(0.75), 1.0);
        assert_eq!(chi(4.0 / 3.0), 0.0);
        let mut prev = 1.0;
        for i in 0..=200 {
            let r = 0.7 + i as f64 * 0.004;
            let c = chi(r);
            assert!(c <= prev + 1e-15);
            prev = c;
        }
        assert_eq!(phi(0.74), 0.0);
        assert_eq!(phi(2.7), 0.0);
        assert!((phi(1.4) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn window_covers_all_retained_modes() {
        for (dim, n, l) in [(1, 256, 2.0 * PI), (1, 64, 32.0 * PI), (2, 32, 5.0)] {
            let g = Grid::new(dim, n, l).unwrap();
            let s = g.dyadic();
            for flat in 0..g.size() {
                if g.is_retained(flat) {
                    assert!((s.partition_sum(&g, flat) - 1.0).abs() < 1e-12);
                }
            }
            // lowest block reaches the fundamental, highest reaches the mask
            assert!(8.0 / 3.0 * (s.j_min() as f64).exp2() > g.fundamental());
            assert!(0.75 * ((s.j_max() - 1) as f64).exp2() < g.max_retained_wavenumber());
        }
    }

    #[test]
    fn index_outside_window_is_rejected() {
        let g = Grid::new(1, 64, 2.0 * PI).unwrap();
        let f = SpectralField::zeros(&g, 1);
        let s = g.dyadic();
        let err = dyadic_block(&f, s.j_max() + 1).unwrap_err();
        assert!(matches!(err, Error::DyadicRange { .. }));
        assert!(lowfreq_cutoff(&f, s.j_max() + 1).is_ok());
        assert!(lowfreq_cutoff(&f, s.j_max() + 2).is_err());
    }
}
