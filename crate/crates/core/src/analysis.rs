//! Linear theory of the relaxation system around zero.
//!
//! Linearizing and Fourier transforming, the vector `(u^, eps v^_1, ..,
//! eps v^_d)` obeys `w' = A(xi) w` with
//!
//! ```text
//!        [ 0              -i xi_1/eps  ..  -i xi_d/eps ]
//! A(xi)= [ -i a_1 xi_1/eps  -1/eps^2                   ]
//!        [ ..                          ..              ]
//!        [ -i a_d xi_d/eps                  -1/eps^2   ]
//! ```
//!
//! whose characteristic polynomial factors as
//! `(l + 1/eps^2)^(d-1) (l^2 + l/eps^2 + S/eps^2)`, `S = sum a_i xi_i^2`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::spectral::dyadic::phi;

/// `S = sum_i a_i xi_i^2`.
pub fn symbol(xi: &[f64], a: &[f64]) -> f64 {
    xi.iter().zip(a).map(|(x, ai)| ai * x * x).sum()
}

/// `1/eps^2 - 4 S`.
pub fn discriminant(eps: f64, s: f64) -> f64 {
    1.0 / (eps * eps) - 4.0 * s
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModeSpectrum {
    pub xi: Vec<f64>,
    pub eps: f64,
    pub a: Vec<f64>,
    pub s: f64,
    /// `lambda_1..lambda_{d-1} = -1/eps^2`, then the slow and fast pair.
    pub eigenvalues: Vec<Complex64>,
}

impl ModeSpectrum {
    /// The pair `(lambda_d, lambda_{d+1})`.
    pub fn coupled_pair(&self) -> (Complex64, Complex64) {
        let n = self.eigenvalues.len();
        (self.eigenvalues[n - 2], self.eigenvalues[n - 1])
    }
}

/// Slow/fast roots of `l^2 + l/eps^2 + S/eps^2`, evaluated without
/// cancellation on either branch.
fn coupled_roots(eps: f64, s: f64) -> (Complex64, Complex64) {
    let e2 = eps * eps;
    let disc = discriminant(eps, s);
    if disc >= 0.0 {
        let q = (1.0 - 4.0 * e2 * s).max(0.0).sqrt();
        let slow = -2.0 * s / (1.0 + q);
        let fast = -(1.0 + q) / (2.0 * e2);
        (Complex64::new(slow, 0.0), Complex64::new(fast, 0.0))
    } else {
        let im = (-disc).sqrt() / (2.0 * eps);
        let re = -1.0 / (2.0 * e2);
        (Complex64::new(re, im), Complex64::new(re, -im))
    }
}

pub fn eigenvalues(xi: &[f64], eps: f64, a: &[f64]) -> ModeSpectrum {
    let d = xi.len();
    let s = symbol(xi, a);
    let mut eig = vec![Complex64::new(-1.0 / (eps * eps), 0.0); d - 1];
    let (slow, fast) = coupled_roots(eps, s);
    eig.push(slow);
    eig.push(fast);
    ModeSpectrum {
        xi: xi.to_vec(),
        eps,
        a: a.to_vec(),
        s,
        eigenvalues: eig,
    }
}

/// Decay rate `omega = -Re lambda_d` of the slow mode.
pub fn decay_rate_omega(xi: &[f64], eps: f64, a: &[f64]) -> f64 {
    omega_from_symbol(symbol(xi, a), eps)
}

/// `omega` as a function of `S`: `2S / (1 + sqrt(1 - 4 eps^2 S))` on the
/// overdamped side, `1/(2 eps^2)` on the underdamped side.
pub fn omega_from_symbol(s: f64, eps: f64) -> f64 {
    if s == 0.0 {
        return 0.0;
    }
    -coupled_roots(eps, s).0.re
}

/// `J_eps = -floor(log2 eps) + k0`.
pub fn threshold_j(eps: f64, k0: i32) -> i32 {
    -(eps.log2().floor() as i32) + k0
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Regime {
    Low,
    High,
    Transitional,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegimeLabel {
    pub regime: Regime,
    pub discriminant: f64,
    /// Dyadic index whose multiplier is largest at `|xi|`.
    pub dyadic_index: Option<i32>,
    /// Whether that index is `<= J_eps` (with `k0 = 0`).
    pub below_threshold: Option<bool>,
}

/// Index `j` maximizing `phi(2^-j r)`.
pub fn dominant_block(r: f64) -> Option<i32> {
    if !(r > 0.0 && r.is_finite()) {
        return None;
    }
    let c = r.log2().floor() as i32;
    ((c - 2)..=(c + 1)).max_by(|&a, &b| {
        phi(r * (-a as f64).exp2())
            .partial_cmp(&phi(r * (-b as f64).exp2()))
            .unwrap()
    })
}

pub fn classify_regime(xi: &[f64], eps: f64, a: &[f64]) -> RegimeLabel {
    let s = symbol(xi, a);
    let disc = discriminant(eps, s);
    let scale = (1.0 / (eps * eps)).max(4.0 * s);
    let regime = if disc.abs() <= 1e-12 * scale {
        Regime::Transitional
    } else if disc > 0.0 {
        Regime::Low
    } else {
        Regime::High
    };
    let r = xi.iter().map(|x| x * x).sum::<f64>().sqrt();
    let dyadic_index = dominant_block(r);
    RegimeLabel {
        regime,
        discriminant: disc,
        dyadic_index,
        below_threshold: dyadic_index.map(|j| j <= threshold_j(eps, 0)),
    }
}

/// `A(xi)` acting on `(u^, eps v^_1, .., eps v^_d)`.
pub fn linear_matrix(xi: &[f64], eps: f64, a: &[f64]) -> DMatrix<Complex64> {
    let d = xi.len();
    let mut m = DMatrix::from_element(d + 1, d + 1, Complex64::default());
    for i in 0..d {
        m[(0, i + 1)] = Complex64::new(0.0, -xi[i] / eps);
        m[(i + 1, 0)] = Complex64::new(0.0, -a[i] * xi[i] / eps);
        m[(i + 1, i + 1)] = Complex64::new(-1.0 / (eps * eps), 0.0);
    }
    m
}

/// `(e^{mt} cosh(dt), e^{mt} sinh(dt)/d)` for the traceless part of the
/// coupled 2x2 block, where `m = (l+ + l-)/2` and `d^2 = ((l+ - l-)/2)^2`.
fn coupled_exponentials(slow: Complex64, fast: Complex64, t: f64) -> (f64, f64) {
    let m = 0.5 * (slow.re + fast.re);
    let half = 0.5 * (slow - fast);
    // half is either real (overdamped) or purely imaginary (underdamped)
    let delta2 = half.re * half.re - half.im * half.im;
    let x = delta2 * t * t;
    if x.abs() < 1e-3 {
        let e = (m * t).exp();
        let c = 1.0 + x / 2.0 + x * x / 24.0 + x * x * x / 720.0;
        let sh = t * (1.0 + x / 6.0 + x * x / 120.0 + x * x * x / 5040.0);
        (e * c, e * sh)
    } else if delta2 > 0.0 {
        let ep = (slow.re * t).exp();
        let em = (fast.re * t).exp();
        (0.5 * (ep + em), (ep - em) / (2.0 * half.re))
    } else {
        let w = half.im.abs();
        let e = (m * t).exp();
        (e * (w * t).cos(), e * (w * t).sin() / w)
    }
}

/// `exp(t A(xi))`, assembled from the eigenstructure: the `(d-1)`-fold
/// eigenvalue `-1/eps^2` acts on `{w : b . w = 0}`, and the coupled pair
/// acts on `span{e_u, (0, c)}` with `b_i = -i xi_i / eps`,
/// `c_i = -i a_i xi_i / eps`. At the double root the formula reduces to
/// the Jordan form `e^{lt}(I + t(M - lI))`.
pub fn exact_linear_propagator(xi: &[f64], eps: f64, a: &[f64], t: f64) -> DMatrix<Complex64> {
    let d = xi.len();
    let mu = -1.0 / (eps * eps);
    let decay = (mu * t).exp();
    let s = symbol(xi, a);
    let mut p = DMatrix::from_element(d + 1, d + 1, Complex64::default());
    if s == 0.0 {
        p[(0, 0)] = Complex64::new(1.0, 0.0);
        for i in 1..=d {
            p[(i, i)] = Complex64::new(decay, 0.0);
        }
        return p;
    }
    let spec = eigenvalues(xi, eps, a);
    let (slow, fast) = spec.coupled_pair();
    let (ch, sh) = coupled_exponentials(slow, fast, t);
    // M = [[0, -S/eps^2], [1, mu]] in the basis (e_u, C); m = mu/2.
    let m = 0.5 * mu;
    let e00 = ch - m * sh;
    let e01 = -s / (eps * eps) * sh;
    let e10 = sh;
    let e11 = ch + m * sh;

    let b: Vec<Complex64> = xi.iter().map(|x| Complex64::new(0.0, -x / eps)).collect();
    let c: Vec<Complex64> = xi.iter().zip(a).map(|(x, ai)| Complex64::new(0.0, -ai * x / eps)).collect();
    let bc = Complex64::new(-s / (eps * eps), 0.0);

    p[(0, 0)] = Complex64::new(e00, 0.0);
    for l in 0..d {
        p[(l + 1, 0)] = c[l] * e10;
    }
    for k in 0..d {
        let alpha = b[k] / bc;
        p[(0, k + 1)] = alpha * e01;
        for l in 0..d {
            let kron = if l == k { 1.0 } else { 0.0 };
            p[(l + 1, k + 1)] = alpha * c[l] * e11 + (Complex64::new(kron, 0.0) - alpha * c[l]) * decay;
        }
    }
    p
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OverdampingPoint {
    pub inv_eps: f64,
    pub omega: f64,
    pub regime: Regime,
}

/// Analytic decay-rate curve `omega(1/eps)` for a fixed symbol `S`.
pub fn overdamping_curve(s: f64, inv_eps: &[f64]) -> Vec<OverdampingPoint> {
    inv_eps
        .iter()
        .map(|&ie| {
            let eps = 1.0 / ie;
            let xi = [s.sqrt()];
            OverdampingPoint {
                inv_eps: ie,
                omega: omega_from_symbol(s, eps),
                regime: classify_regime(&xi, eps, &[1.0]).regime,
            }
        })
        .collect()
}

pub fn overdamping_csv(points: &[OverdampingPoint]) -> String {
    let mut out = String::from("inv_eps,omega,regime\n");
    for p in points {
        let label = match p.regime {
            Regime::Low => "LOW",
            Regime::High => "HIGH",
            Regime::Transitional => "TRANSITIONAL",
        };
        out.push_str(&format!("{:.12e},{:.12e},{label}\n", p.inv_eps, p.omega));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn eigenvalue_examples() {
        let s = eigenvalues(&[0.0], 1.0, &[1.0]);
        let (l1, l2) = s.coupled_pair();
        assert!(close(l1, Complex64::new(0.0, 0.0), 1e-15));
        assert!(close(l2, Complex64::new(-1.0, 0.0), 1e-15));

        let s = eigenvalues(&[0.5], 1.0, &[1.0]);
        let (l1, l2) = s.coupled_pair();
        assert!(close(l1, Complex64::new(-0.5, 0.0), 1e-12));
        assert!(close(l2, Complex64::new(-0.5, 0.0), 1e-12));

        let s = eigenvalues(&[1.0, 1.0], 1.0, &[1.0, 1.0]);
        assert!(close(s.eigenvalues[0], Complex64::new(-1.0, 0.0), 1e-15));
        let r7 = 7f64.sqrt() / 2.0;
        assert!(close(s.eigenvalues[1], Complex64::new(-0.5, r7), 1e-14));
        assert!(close(s.eigenvalues[2], Complex64::new(-0.5, -r7), 1e-14));
    }

    #[test]
    fn omega_branches() {
        // peak at 1/eps = 2 sqrt(S)
        assert!((decay_rate_omega(&[1.0], 0.5, &[1.0]) - 2.0).abs() < 1e-14);
        assert!((decay_rate_omega(&[1.0], 1e-4, &[1.0]) - 1.0).abs() < 1e-6);
        assert!((decay_rate_omega(&[1.0], 1.0, &[1.0]) - 0.5).abs() < 1e-15);
        assert_eq!(decay_rate_omega(&[0.0], 0.3, &[1.0]), 0.0);
    }

    #[test]
    fn threshold_examples() {
        assert_eq!(threshold_j(0.125, 0), 3);
        assert_eq!(threshold_j(1.0, 2), 2);
        assert_eq!(threshold_j(0.1, 0), 4);
        for eps in [0.013, 0.1, 0.37, 1.0, 3.3] {
            let j = threshold_j(eps, 0);
            let p = (j as f64).exp2();
            assert!(p >= 1.0 / eps && p < 2.0 / eps);
        }
    }

    #[test]
    fn regime_examples() {
        assert_eq!(classify_regime(&[0.1], 1.0, &[1.0]).regime, Regime::Low);
        assert_eq!(classify_regime(&[10.0], 1.0, &[1.0]).regime, Regime::High);
        assert_eq!(classify_regime(&[0.5], 1.0, &[1.0]).regime, Regime::Transitional);
        let hi = eigenvalues(&[10.0], 1.0, &[1.0]);
        assert!((hi.coupled_pair().0.re + 0.5).abs() < 1e-15);
        let lbl = classify_regime(&[0.1], 0.25, &[1.0]);
        assert_eq!(lbl.below_threshold, Some(true));
        assert_eq!(classify_regime(&[64.0], 0.25, &[1.0]).below_threshold, Some(false));
    }

    #[test]
    fn propagator_at_time_zero_is_identity() {
        let p = exact_linear_propagator(&[0.7, -1.2], 0.3, &[1.0, 2.0], 0.0);
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((p[(i, j)] - Complex64::new(want, 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn zero_frequency_decouples() {
        let t = 0.8;
        let eps = 0.5;
        let p = exact_linear_propagator(&[0.0, 0.0], eps, &[1.0, 1.0], t);
        assert!((p[(0, 0)].re - 1.0).abs() < 1e-15);
        for i in 1..3 {
            assert!((p[(i, i)].re - (-t / (eps * eps)).exp()).abs() < 1e-15);
        }
        assert!(p[(0, 1)].norm() == 0.0 && p[(1, 2)].norm() == 0.0);
    }

    #[test]
    fn propagator_matches_matrix_exponential() {
        let cases: [(&[f64], f64, &[f64], f64); 5] = [
            (&[1.0], 1.0, &[1.0], 2.0),
            (&[0.5], 1.0, &[1.0], 1.5),
            (&[3.0], 0.2, &[1.0], 0.05),
            (&[0.7, -1.3], 0.4, &[1.0, 2.5], 0.3),
            (&[0.2, 0.1], 0.9, &[0.5, 1.0], 1.0),
        ];
        for (xi, eps, a, t) in cases {
            let want = (linear_matrix(xi, eps, a) * Complex64::new(t, 0.0)).exp();
            let got = exact_linear_propagator(xi, eps, a, t);
            let err = (&want - &got).iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(err < 1e-10, "xi={xi:?} eps={eps} err={err}");
        }
    }

    #[test]
    fn eigenvalues_are_characteristic_roots() {
        for (xi, eps, a) in [(vec![0.3], 0.7, vec![1.0]), (vec![1.1, -0.4], 0.25, vec![2.0, 0.5])] {
            let m = linear_matrix(&xi, eps, &a);
            let norm = m.iter().map(|z| z.norm()).fold(0.0, f64::max) * m.nrows() as f64;
            for l in eigenvalues(&xi, eps, &a).eigenvalues {
                let shifted = &m - DMatrix::from_diagonal_element(m.nrows(), m.nrows(), l);
                let det = shifted.determinant().norm();
                assert!(det <= 1e-8 * (1.0 + norm.powi(xi.len() as i32 + 1)), "det={det}");
            }
        }
    }

    #[test]
    fn overdamping_csv_has_header() {
        let pts = overdamping_curve(1.0, &[0.5, 2.0, 8.0]);
        let csv = overdamping_csv(&pts);
        assert!(csv.starts_with("inv_eps,omega,regime\n"));
        assert_eq!(pts[1].regime, Regime::Transitional);
        assert!((pts[1].omega - 2.0).abs() < 1e-14);
    }
}
