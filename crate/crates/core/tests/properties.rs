use std::f64::consts::PI;

use proptest::prelude::*;

use relaxlab_core::analysis::{eigenvalues, exact_linear_propagator};
use relaxlab_core::config::{parse_config_str, preset, PRESETS};
use relaxlab_core::harness::{fit_rate, FitAxis};
use relaxlab_core::spectral::container::{decode_field, encode_field};
use relaxlab_core::spectral::{besov_norm, Grid, SpectralField, Window};

fn field_from(grid: &Grid, amps: &[(f64, f64)]) -> SpectralField {
    SpectralField::from_fn(grid, 1, |_, x| {
        amps.iter()
            .enumerate()
            .map(|(k, (a, b))| a * ((k + 1) as f64 * x[0]).cos() + b * ((k + 1) as f64 * x[0]).sin())
            .sum()
    })
}

fn amps() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1..20)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn besov_norm_is_a_norm(a in amps(), b in amps(), c in -3.0..3.0f64, s in -1.0..2.0f64, p in prop::sample::select(vec![1.0, 2.0, 4.0, f64::INFINITY])) {
        let g = Grid::new(1, 64, 2.0 * PI).unwrap();
        let (f, h) = (field_from(&g, &a), field_from(&g, &b));
        let n = |x: &SpectralField| besov_norm(x, s, p, 1.0, Window::Full).unwrap().value;
        let sum = SpectralField::combine(&[(1.0, &f), (1.0, &h)]);
        prop_assert!(n(&sum) <= (n(&f) + n(&h)) * (1.0 + 1e-12) + 1e-14);
        let scaled = f.clone().scaled(c);
        prop_assert!((n(&scaled) - c.abs() * n(&f)).abs() <= 1e-10 * (1.0 + n(&f)));
    }

    #[test]
    fn window_split_bounds_the_full_norm(a in amps(), big_j in -1i32..5) {
        let g = Grid::new(1, 64, 2.0 * PI).unwrap();
        let f = field_from(&g, &a);
        let n = |w| besov_norm(&f, 0.5, 2.0, 1.0, w).unwrap().value;
        let full = n(Window::Full);
        prop_assert!(full <= n(Window::Low(big_j)) + n(Window::High(big_j)) + 1e-12);
        prop_assert!(n(Window::Low(big_j)) <= full + 1e-12);
    }

    #[test]
    fn container_round_trip(a in amps()) {
        let g = Grid::new(1, 64, 2.0 * PI).unwrap();
        let f = field_from(&g, &a);
        let bytes = encode_field(&f);
        let back = decode_field(&bytes).unwrap();
        prop_assert_eq!(back.coeffs(), f.coeffs());
    }

    #[test]
    fn propagator_keeps_the_slow_mode_bounded(xi in 0.01..20.0f64, eps in 1e-3..2.0f64, t in 0.0..5.0f64) {
        let p = exact_linear_propagator(&[xi], eps, &[1.0], t);
        prop_assert!(p.iter().all(|z| z.re.is_finite() && z.im.is_finite()));
        let spec = eigenvalues(&[xi], eps, &[1.0]);
        prop_assert!(spec.eigenvalues.iter().all(|l| l.re <= 1e-12));
    }

    #[test]
    fn fit_recovers_power_laws(e in -2.0..0.5f64, c in 0.1..10.0f64) {
        let t: Vec<f64> = (0..40).map(|k| 1.2f64.powi(k)).collect();
        let y: Vec<f64> = t.iter().map(|t| c * (1.0 + t).powf(e)).collect();
        let f = fit_rate(&t, &y, [1.0, 1e4], FitAxis::Time).unwrap();
        prop_assert!((f.exponent - e).abs() < 1e-10);
        prop_assert!((0.0..=1.0).contains(&f.r_squared));
    }

    #[test]
    fn random_json_never_panics(text in "\\PC{0,200}") {
        let _ = parse_config_str(&text);
    }
}

#[test]
fn presets_round_trip() {
    for name in PRESETS {
        let cfg = preset(name).unwrap();
        assert_eq!(parse_config_str(&serde_json::to_string(&cfg).unwrap()).unwrap(), cfg);
    }
}
