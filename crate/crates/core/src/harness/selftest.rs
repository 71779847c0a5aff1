//! Property suites and closed-form oracles. The propagator checks build
//! the linear matrix and the reference ODE solution here, without going
//! through the analysis module's internals.

use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::{eigenvalues, exact_linear_propagator};
use crate::integrators::{step_jinxin, step_limit, Scheme, StepperConfig};
use crate::models::{Flux, JinXinModel, JinXinState, LimitState};
use crate::spectral::dyadic::{dyadic_block, phi};
use crate::spectral::field::lp_norm_physical;
use crate::spectral::{nonlinear_product, Grid, SpectralField};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    /// Wall-clock checks; kept out of fits.json so reruns compare equal.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub timing: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check { name: name.into(), passed, detail: detail.into(), timing: false }
    }

    pub fn runtime(name: impl Into<String>, secs: f64, bound: f64) -> Self {
        Check { timing: true, ..Check::new(name, secs <= bound, format!("{secs:.2} s")) }
    }

    /// `value <= bound`.
    pub fn at_most(name: &str, value: f64, bound: f64) -> Self {
        Check::new(name, value <= bound, format!("{value:.3e} <= {bound:.1e}"))
    }
}

fn random_field(grid: &Grid, rng: &mut ChaCha8Rng, ncomp: usize) -> SpectralField {
    let mut f = SpectralField::zeros(grid, ncomp);
    for c in 0..ncomp {
        let comp = f.component_mut(c);
        for flat in 0..grid.size() {
            let partner = grid.negated(flat);
            if partner < flat || !grid.is_retained(flat) {
                continue;
            }
            let z = Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
            if partner == flat {
                comp[flat] = Complex64::new(z.re, 0.0);
            } else {
                comp[flat] = z;
                comp[partner] = z.conj();
            }
        }
    }
    f
}

/// Same coefficients on a grid `factor` times finer, for sup norms
/// that are closer to the continuous ones.
fn refine(field: &SpectralField, factor: usize) -> SpectralField {
    let g = field.grid();
    let fine = Grid::new(g.dim(), g.points_per_axis() * factor, g.length()).expect("finer grid is valid");
    let mut out = SpectralField::zeros(&fine, field.ncomp());
    for c in 0..field.ncomp() {
        for flat in 0..g.size() {
            if let Some(t) = fine.flat_index(&g.mode_indices(flat)[..g.dim()]) {
                out.component_mut(c)[t] = field.component(c)[flat];
            }
        }
    }
    out
}

fn sup(field: &SpectralField) -> f64 {
    lp_norm_physical(&field.to_physical(), f64::INFINITY, 1.0)
}

/// Partition of unity, block disjointness, Bernstein ratios and
/// Hermitian symmetry on `N = 256`, `d = 1`.
pub fn spectral_suite(seed: u64) -> Vec<Check> {
    let start = Instant::now();
    let mut out = Vec::new();
    let grid = Grid::new(1, 256, 2.0 * std::f64::consts::PI).unwrap();
    let grid2 = Grid::new(2, 64, 10.0).unwrap();

    let mut partition = 0.0f64;
    let mut overlap = 0.0f64;
    for g in [&grid, &grid2] {
        let scheme = g.dyadic();
        for flat in 0..g.size() {
            if !g.is_retained(flat) {
                continue;
            }
            partition = partition.max((scheme.partition_sum(g, flat) - 1.0).abs());
            for j in scheme.indices() {
                for k in (j + 2)..=scheme.j_max() {
                    overlap = overlap.max(scheme.multiplier(j, flat) * scheme.multiplier(k, flat));
                }
            }
        }
    }
    out.push(Check::at_most("partition of unity", partition, 1e-12));
    out.push(Check::at_most("block disjointness", overlap, 1e-12));

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scheme = grid.dyadic();
    let (mut lo2, mut hi2, mut hi_inf, mut cs) = (f64::INFINITY, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..50 {
        let u = random_field(&grid, &mut rng, 1);
        for j in scheme.indices().skip(1) {
            let b = dyadic_block(&u, j).unwrap();
            let n2 = b.l2_norm();
            if n2 < 1e-12 {
                continue;
            }
            let scale = (j as f64).exp2();
            let r = b.derivative(0).l2_norm() / (scale * n2);
            lo2 = lo2.min(r);
            hi2 = hi2.max(r);
            let fine = refine(&b, 4);
            hi_inf = hi_inf.max(sup(&fine.derivative(0)) / (scale * sup(&fine)));
            // Cauchy-Schwarz over the modes in the annulus
            let modes = (0..grid.size()).filter(|&f| scheme.multiplier(j, f) > 0.0).count() as f64;
            cs = cs.max(sup(&b) / ((modes / grid.volume()).sqrt() * n2));
        }
    }
    out.push(Check::new(
        "Bernstein L2 ratio in [3/4, 8/3]",
        lo2 >= 0.75 - 1e-12 && hi2 <= 8.0 / 3.0 + 1e-12,
        format!("observed [{lo2:.4}, {hi2:.4}]"),
    ));
    // 1D Bernstein for trigonometric polynomials; 1.02 absorbs sampling
    out.push(Check::at_most("Bernstein Linf ratio <= 8/3", hi_inf, 8.0 / 3.0 * 1.02));
    out.push(Check::at_most("Linf <= (M/V)^(1/2) L2 per block", cs, 1.0 + 1e-12));

    let u = random_field(&grid, &mut rng, 1);
    let v = random_field(&grid, &mut rng, 1);
    let model = JinXinModel::new(Flux::Burgers1d, vec![1.0], 0.3).unwrap();
    let state = JinXinState::new(u.clone().scaled(0.1), vec![v.clone().scaled(0.1)], 0.0).unwrap();
    let cfg = StepperConfig::new(Scheme::ImexSsp2, 1.0);
    let stepped = step_jinxin(&model, &state, 1e-3, &cfg).unwrap();
    let produced = [
        nonlinear_product(&u, &v).unwrap(),
        u.derivative(0),
        dyadic_block(&u, 3).unwrap(),
        stepped.u.clone(),
        stepped.v[0].clone(),
    ];
    let herm = produced.iter().map(|f| f.hermitian_defect() / f.max_coeff().max(1e-300)).fold(0.0, f64::max);
    out.push(Check::at_most("Hermitian symmetry preserved", herm, 1e-12));
    let secs = start.elapsed().as_secs_f64();
    out.push(Check::runtime("spectral suite runtime <= 10 s", secs, 10.0));
    out
}

/// `A(xi)` on `(u, eps v)`, assembled independently of the analyzer.
fn oracle_matrix(xi: &[f64], eps: f64, a: &[f64]) -> DMatrix<Complex64> {
    let d = xi.len();
    DMatrix::from_fn(d + 1, d + 1, |r, c| match (r, c) {
        (0, 0) => Complex64::default(),
        (0, c) => Complex64::new(0.0, -xi[c - 1] / eps),
        (r, 0) => Complex64::new(0.0, -a[r - 1] * xi[r - 1] / eps),
        (r, c) if r == c => Complex64::new(-1.0 / (eps * eps), 0.0),
        _ => Complex64::default(),
    })
}

fn inf_norm(m: &DMatrix<Complex64>) -> f64 {
    m.row_iter().map(|r| r.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

/// Classical RK4 on `w' = A w` from the identity, step `h <= 0.01/|A|`.
fn rk4_exponential(m: &DMatrix<Complex64>, t: f64) -> DMatrix<Complex64> {
    let n = m.nrows();
    let steps = ((t * inf_norm(m)) / 0.01).ceil().max(1.0) as usize;
    let h = Complex64::new(t / steps as f64, 0.0);
    let half = h * 0.5;
    let mut w = DMatrix::<Complex64>::identity(n, n);
    for _ in 0..steps {
        let k1 = m * &w;
        let k2 = m * (&w + &k1 * half);
        let k3 = m * (&w + &k2 * half);
        let k4 = m * (&w + &k3 * h);
        w += (k1 + k2 * Complex64::new(2.0, 0.0) + k3 * Complex64::new(2.0, 0.0) + k4) * (h / 6.0);
    }
    w
}

fn max_abs_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

struct Case {
    xi: Vec<f64>,
    eps: f64,
    a: Vec<f64>,
}

fn random_case(rng: &mut ChaCha8Rng) -> Case {
    let d = if rng.random::<bool>() { 1 } else { 2 };
    Case {
        xi: (0..d).map(|_| rng.random_range(-5.0..5.0)).collect(),
        eps: 10f64.powf(rng.random_range(-1.3..0.3)),
        a: (0..d).map(|_| rng.random_range(0.2..3.0)).collect(),
    }
}

/// Characteristic-polynomial residuals, semigroup property and RK4
/// agreement of the exact propagator.
pub fn propagator_suite(seed: u64) -> Vec<Check> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();

    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let c = random_case(&mut rng);
        let m = oracle_matrix(&c.xi, c.eps, &c.a);
        let n = m.nrows();
        let scale = 1.0 + inf_norm(&m).powi(n as i32);
        for l in eigenvalues(&c.xi, c.eps, &c.a).eigenvalues {
            let det = (&m - DMatrix::from_diagonal_element(n, n, l)).determinant().norm();
            worst = worst.max(det / scale);
        }
    }
    out.push(Check::at_most("characteristic residual / (1 + |A|^(d+1))", worst, 1e-8));

    let mut semigroup = 0.0f64;
    let mut cases: Vec<Case> = (0..200).map(|_| random_case(&mut rng)).collect();
    cases.push(Case { xi: vec![0.5], eps: 1.0, a: vec![1.0] });
    cases.push(Case { xi: vec![0.3, 0.4], eps: 1.0, a: vec![1.0, 1.0] });
    for c in &cases {
        let (t, s) = (rng.random_range(0.0..2.0) * c.eps * c.eps, rng.random_range(0.0..2.0) * c.eps * c.eps);
        let lhs = exact_linear_propagator(&c.xi, c.eps, &c.a, t + s);
        let rhs = exact_linear_propagator(&c.xi, c.eps, &c.a, t) * exact_linear_propagator(&c.xi, c.eps, &c.a, s);
        semigroup = semigroup.max(max_abs_diff(&lhs, &rhs));
    }
    let defective = {
        let p = |t| exact_linear_propagator(&[0.5], 1.0, &[1.0], t);
        max_abs_diff(&p(3.0), &(p(1.0) * p(2.0)))
    };
    out.push(Check::at_most("semigroup P(t+s) = P(t)P(s)", semigroup.max(defective), 1e-9));

    let mut ode = 0.0f64;
    for c in cases.iter().rev().take(100) {
        let m = oracle_matrix(&c.xi, c.eps, &c.a);
        let t = (20.0 / inf_norm(&m)).min(2.0);
        ode = ode.max(max_abs_diff(&rk4_exponential(&m, t), &exact_linear_propagator(&c.xi, c.eps, &c.a, t)));
    }
    out.push(Check::at_most("RK4 dense ODE agreement", ode, 1e-8));
    let secs = start.elapsed().as_secs_f64();
    out.push(Check::runtime("propagator suite runtime <= 30 s", secs, 30.0));
    out
}

fn state_distance(a: &JinXinState, b: &JinXinState) -> f64 {
    let mut d = SpectralField::combine(&[(1.0, &a.u), (-1.0, &b.u)]).l2_norm().powi(2);
    for (x, y) in a.v.iter().zip(&b.v) {
        d += SpectralField::combine(&[(1.0, x), (-1.0, y)]).l2_norm().powi(2);
    }
    d.sqrt()
}

/// Observed orders `log2(e_k / e_{k+1})` of imex_ssp2 on one linear mode
/// against the exact propagator, `dt = 2^-6 .. 2^-10 eps`, horizon `eps`.
pub fn imex_orders(eps: f64) -> Vec<f64> {
    let grid = Grid::new(1, 8, 2.0 * std::f64::consts::PI).unwrap();
    let model = JinXinModel::new(Flux::Zero { ncomp: 1, dim: 1 }, vec![1.0], eps).unwrap();
    let u = SpectralField::from_fn(&grid, 1, |_, x| x[0].cos());
    let v = SpectralField::from_fn(&grid, 1, |_, x| 0.5 * x[0].sin());
    let s0 = JinXinState::new(u, vec![v], 0.0).unwrap();
    let cfg = StepperConfig { cfl: 1.0, ..StepperConfig::new(Scheme::ImexSsp2, eps) };
    let exact = {
        let mut s = s0.clone();
        for _ in 0..2 {
            s = step_jinxin(&model, &s, eps / 2.0, &StepperConfig { scheme: Scheme::ExactLinear, ..cfg }).unwrap();
        }
        s
    };
    let errs: Vec<f64> = (6..=10)
        .map(|k| {
            let n = 1usize << k;
            let dt = eps / n as f64;
            let mut s = s0.clone();
            for _ in 0..n {
                s = step_jinxin(&model, &s, dt, &cfg).unwrap();
            }
            state_distance(&s, &exact)
        })
        .collect();
    errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

/// Self-convergence orders of if_rk2 on 1D Burgers against a run with
/// `dt/64` of the coarsest step.
pub fn limit_orders() -> Vec<f64> {
    let grid = Grid::new(1, 64, 2.0 * std::f64::consts::PI).unwrap();
    let u0 = SpectralField::from_fn(&grid, 1, |_, x| 0.5 * x[0].sin() + 0.2 * (2.0 * x[0]).cos());
    let cfg = StepperConfig { cfl: 1.0, ..StepperConfig::new(Scheme::IfRk2, 1.0) };
    let run = |n: usize| {
        let mut s = LimitState { u_star: u0.clone(), t: 0.0 };
        for _ in 0..n {
            s = step_limit(&Flux::Burgers1d, &[0.5], &s, 1.0 / n as f64, &cfg).unwrap();
        }
        s.u_star
    };
    let reference = run(16 * 64);
    let errs: Vec<f64> = [16, 32, 64]
        .iter()
        .map(|&n| SpectralField::combine(&[(1.0, &run(n)), (-1.0, &reference)]).l2_norm())
        .collect();
    errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

pub fn integrator_suite() -> Vec<Check> {
    let start = Instant::now();
    let mut out = Vec::new();
    for eps in [1.0, 0.1, 0.01] {
        let orders = imex_orders(eps);
        let min = orders.iter().cloned().fold(f64::INFINITY, f64::min);
        out.push(Check::new(format!("imex_ssp2 order >= 1.9 at eps = {eps}"), min >= 1.9, format!("orders {orders:.3?}")));
    }
    let orders = limit_orders();
    let min = orders.iter().cloned().fold(f64::INFINITY, f64::min);
    out.push(Check::new("if_rk2 self-convergence order >= 1.9", min >= 1.9, format!("orders {orders:.3?}")));
    let secs = start.elapsed().as_secs_f64();
    out.push(Check::runtime("integrator suite runtime <= 120 s", secs, 120.0));
    out
}

/// Mean of `u` after `10^4` steps of each system.
pub fn conservation_suite() -> Vec<Check> {
    let grid = Grid::new(1, 32, 2.0 * std::f64::consts::PI).unwrap();
    let mean = 0.2;
    let u0 = SpectralField::from_fn(&grid, 1, |_, x| mean + 0.2 * x[0].sin() + 0.1 * (3.0 * x[0]).cos());
    let model = JinXinModel::new(Flux::Burgers1d, vec![1.0], 0.5).unwrap();
    let mut s = JinXinState::new(u0.clone(), vec![SpectralField::zeros(&grid, 1)], 0.0).unwrap();
    let cfg = StepperConfig::new(Scheme::ImexSsp2, 1.0);
    let dt = crate::integrators::jinxin_admissible_dt(&model, grid.spacing(), cfg.cfl);
    let mut l = LimitState { u_star: u0, t: 0.0 };
    let lcfg = StepperConfig::new(Scheme::IfRk2, 1.0);
    for _ in 0..10_000 {
        s = step_jinxin(&model, &s, dt, &cfg).unwrap();
        l = step_limit(&Flux::Burgers1d, &[1.0], &l, dt, &lcfg).unwrap();
    }
    vec![
        Check::at_most("mean drift of u over 1e4 imex steps", (s.u.mean(0) - mean).abs(), 1e-13),
        Check::at_most("mean drift of u* over 1e4 if_rk2 steps", (l.u_star.mean(0) - mean).abs(), 1e-13),
    ]
}

/// Peak of the dyadic profile sits where `phi = 1`.
fn profile_check() -> Check {
    let ok = (phi(1.4) - 1.0).abs() < 1e-15 && phi(0.7) == 0.0 && phi(2.7) == 0.0;
    Check::new("dyadic profile support [3/4, 8/3]", ok, "phi(1.4) = 1, zero outside")
}

pub fn run_all(seed: u64) -> Vec<Check> {
    let mut out = vec![profile_check()];
    out.extend(spectral_suite(seed));
    out.extend(propagator_suite(seed));
    out.extend(integrator_suite());
    out.extend(conservation_suite());
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rk4_oracle_matches_scalar_exponential() {
        let m = DMatrix::from_element(1, 1, Complex64::new(-2.0, 1.0));
        let w = rk4_exponential(&m, 1.5);
        let want = (Complex64::new(-2.0, 1.0) * 1.5).exp();
        assert!((w[(0, 0)] - want).norm() < 1e-10);
    }

    #[test]
    fn refine_keeps_values() {
        let g = Grid::new(1, 16, 2.0 * std::f64::consts::PI).unwrap();
        let f = SpectralField::from_fn(&g, 1, |_, x| (2.0 * x[0]).sin());
        let r = refine(&f, 4);
        assert!((sup(&r) - 1.0).abs() < 1e-12);
        assert!((r.l2_norm() - f.l2_norm()).abs() < 1e-12);
    }

    #[test]
    fn suites_pass() {
        for c in spectral_suite(1).into_iter().chain(propagator_suite(1)).chain(conservation_suite()) {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }
}
