use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::field::SpectralField;

/// Which dyadic indices enter a norm. `Low(J)` keeps `j <= J`,
/// `High(J)` keeps `j >= J - 1`; the two overlap on `J - 1` and `J`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "threshold")]
pub enum Window {
    Full,
    Low(i32),
    High(i32),
}

impl Window {
    pub fn contains(&self, j: i32) -> bool {
        match *self {
            Window::Full => true,
            Window::Low(big_j) => j <= big_j,
            Window::High(big_j) => j >= big_j - 1,
        }
    }

    pub fn label(&self) -> String {
        match self {
            Window::Full => "full".to_string(),
            Window::Low(j) => format!("low({j})"),
            Window::High(j) => format!("high({j})"),
        }
    }
}

/// Result of a Besov evaluation. `empty_window` flags a restriction that
/// selected no resolvable block (the value is then zero).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BesovValue {
    pub value: f64,
    pub empty_window: bool,
}

pub fn check_exponent(name: &str, x: f64) -> Result<()> {
    if x.is_nan() || x < 1.0 {
        return Err(Error::InvalidArgument(format!(
            "{name} must lie in [1, inf], got {x}"
        )));
    }
    Ok(())
}

/// `l^r` norm of a sequence; `r = inf` gives the max.
pub fn lr_sum(values: impl Iterator<Item = f64>, r: f64) -> f64 {
    if r.is_infinite() {
        values.fold(0.0, f64::max)
    } else if r == 1.0 {
        values.sum()
    } else {
        values.map(|v| v.powf(r)).sum::<f64>().powf(1.0 / r)
    }
}

/// Combines per-block norms (index `j - j_min`) into a Besov value.
pub fn besov_from_blocks(blocks: &[f64], j_min: i32, s: f64, r: f64, window: Window) -> BesovValue {
    let mut any = false;
    let terms = blocks.iter().enumerate().filter_map(|(i, &b)| {
        let j = j_min + i as i32;
        window.contains(j).then(|| {
            any = true;
            (j as f64 * s).exp2() * b
        })
    });
    let value = lr_sum(terms.collect::<Vec<_>>().into_iter(), r);
    BesovValue {
        value,
        empty_window: !any,
    }
}

/// `|| {2^{js} ||Delta_j f||_{L^p}}_j ||_{l^r}` over the window, mean
/// mode excluded.
pub fn besov_norm(field: &SpectralField, s: f64, p: f64, r: f64, window: Window) -> Result<BesovValue> {
    check_exponent("p", p)?;
    check_exponent("r", r)?;
    let scheme = field.grid().dyadic();
    let blocks = scheme.block_norms(&[field], p);
    let out = besov_from_blocks(&blocks, scheme.j_min(), s, r, window);
    if out.empty_window {
        log::warn!("besov window {} selects no resolvable block", window.label());
    }
    Ok(out)
}

/// Besov norm of several fields viewed as one stacked vector field.
pub fn besov_norm_stacked(fields: &[&SpectralField], s: f64, p: f64, r: f64, window: Window) -> Result<BesovValue> {
    check_exponent("p", p)?;
    check_exponent("r", r)?;
    let first = fields
        .first()
        .ok_or_else(|| Error::InvalidArgument("no fields given".into()))?;
    let scheme = first.grid().dyadic();
    let blocks = scheme.block_norms(fields, p);
    Ok(besov_from_blocks(&blocks, scheme.j_min(), s, r, window))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::dyadic::{dyadic_block, phi};
    use crate::spectral::grid::Grid;
    use std::f64::consts::PI;

    fn random_field(g: &Grid, seed: u64) -> SpectralField {
        // cheap deterministic pseudo-random trigonometric sum
        let mut x = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let mut next = || {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((x >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
        };
        let amps: Vec<(f64, f64, f64)> = (1..40).map(|k| (k as f64, next(), next())).collect();
        let l = g.length();
        SpectralField::from_fn(g, 1, move |_, p| {
            amps.iter()
                .map(|&(k, a, b)| {
                    let w = 2.0 * PI * k / l;
                    a * (w * p[0]).cos() + b * (w * p[0]).sin()
                })
                .sum::<f64>()
        })
        .dealiased()
    }

    #[test]
    fn single_block_norm_is_one_term() {
        let g = Grid::new(1, 256, 2.0 * PI).unwrap();
        // kappa = 6 sits where phi(2^-2 kappa) = phi(1.5) = 1
        assert!((phi(1.5) - 1.0).abs() < 1e-15);
        let f = SpectralField::from_fn(&g, 1, |_, x| (6.0 * x[0]).cos());
        let m = dyadic_block(&f, 2).unwrap().l2_norm();
        for r in [1.0, 2.0, f64::INFINITY] {
            let b = besov_norm(&f, 0.7, 2.0, r, Window::Full).unwrap();
            assert!((b.value - 2f64.powf(1.4) * m).abs() < 1e-12 * b.value);
        }
    }

    #[test]
    fn plancherel_ratio_bounds() {
        let g = Grid::new(1, 256, 2.0 * PI).unwrap();
        for seed in 0..5 {
            let f = random_field(&g, seed);
            let b = besov_norm(&f, 0.0, 2.0, 2.0, Window::Full).unwrap().value;
            let ratio = b / f.l2_norm();
            assert!((0.7..=1.0 + 1e-12).contains(&ratio), "ratio {ratio}");
        }
    }

    #[test]
    fn low_high_windows_overlap_on_one_boundary_pair() {
        let g = Grid::new(1, 256, 2.0 * PI).unwrap();
        let f = random_field(&g, 3);
        let big_j = 3;
        for r in [1.0, 2.0] {
            let full = besov_norm(&f, 0.5, 2.0, r, Window::Full).unwrap().value;
            let lo = besov_norm(&f, 0.5, 2.0, r, Window::Low(big_j)).unwrap().value;
            let hi = besov_norm(&f, 0.5, 2.0, r, Window::High(big_j)).unwrap().value;
            assert!(lo.powf(r) + hi.powf(r) >= full.powf(r) * (1.0 - 1e-12));
            // the overlap is exactly blocks J-1 and J
            let scheme = g.dyadic();
            let blocks = scheme.block_norms(&[&f], 2.0);
            let overlap: f64 = [big_j - 1, big_j]
                .iter()
                .map(|&j| ((j as f64) * 0.5).exp2() * blocks[(j - scheme.j_min()) as usize])
                .map(|t| t.powf(r))
                .sum();
            assert!((lo.powf(r) + hi.powf(r) - overlap - full.powf(r)).abs() < 1e-10 * full.powf(r));
        }
    }

    #[test]
    fn empty_window_is_flagged() {
        let g = Grid::new(1, 64, 2.0 * PI).unwrap();
        let f = random_field(&g, 1);
        let b = besov_norm(&f, 0.0, 2.0, 1.0, Window::Low(-40)).unwrap();
        assert!(b.empty_window);
        assert_eq!(b.value, 0.0);
    }

    #[test]
    fn bad_exponents_rejected() {
        let g = Grid::new(1, 64, 1.0).unwrap();
        let f = SpectralField::zeros(&g, 1);
        assert!(besov_norm(&f, 0.0, 0.5, 1.0, Window::Full).is_err());
        assert!(besov_norm(&f, 0.0, 2.0, f64::NAN, Window::Full).is_err());
    }
}
