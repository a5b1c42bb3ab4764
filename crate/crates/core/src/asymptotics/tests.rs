use super::*;
use crate::geometry::{Bump, ModelGeometry, Point, Sphere, Torus};
use num_complex::Complex64;
use std::f64::consts::PI;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn fs() -> ModelGeometry {
    ModelGeometry::Sphere(Sphere::fubini_study(1))
}

#[test]
fn synthetic_polynomial_is_recovered() {
    let samples: Vec<(u32, f64)> = (2..9).map(|k| (k, 3.0 * k as f64 + 5.0)).collect();
    let fit = fit_expansion(&samples, 1, None).unwrap();
    assert!((fit.coefficients[0] - 3.0).abs() < 1e-10);
    assert!((fit.coefficients[1] - 5.0).abs() < 1e-10);
    assert!(fit.coefficients[2].abs() < 1e-10);
    assert!(fit.residual < 1e-10);
}

#[test]
fn expansion_needs_five_k_values_and_positive_leading_term() {
    let few: Vec<(u32, f64)> = (1..5).map(|k| (k, k as f64)).collect();
    assert!(matches!(fit_expansion(&few, 1, None), Err(crate::Error::InsufficientData(_))));
    let negative: Vec<(u32, f64)> = (1..8).map(|k| (k, 100.0 - k as f64)).collect();
    assert!(matches!(fit_expansion(&negative, 1, None), Err(crate::Error::Fit(_))));
}

#[test]
fn fubini_study_leading_coefficient() {
    let family = FrameFamily::build(&fs(), &k_range(8, 24, 4)).unwrap();
    for p in [Point::chart0(0.0, 0.0), Point::chart0(0.7, -0.4), Point::new(1, c(0.2, 0.1))] {
        let fit = fit_expansion_at(&family, &p).unwrap();
        let b0 = 1.0 / (2.0 * PI);
        assert!((fit.coefficients[0] - b0).abs() < 1e-10);
        assert!(fit.relative_deviation.unwrap() < 1e-9);
        // P_k = (k + 1)/2π, so b_1 = 1/2π as well.
        assert!((fit.coefficients[1] - b0).abs() < 1e-8);
    }
}

#[test]
fn torus_leading_coefficient() {
    let geom = ModelGeometry::Torus(Torus::default());
    let family = FrameFamily::build(&geom, &k_range(8, 24, 4)).unwrap();
    let fit = fit_expansion_at(&family, &Point::chart0(0.3, 0.6)).unwrap();
    assert!(fit.relative_deviation.unwrap() < 1e-4, "{fit:?}");
}

#[test]
fn perturbed_sphere_leading_coefficient_at_bump_center() {
    let b = Bump { chart: 0, center: [0.2, 0.1], amplitude: 0.05, radius: 0.8 };
    let geom = ModelGeometry::Sphere(Sphere::new(1, vec![b], None, 1.0).unwrap());
    let family = FrameFamily::build(&geom, &k_range(8, 48, 8)).unwrap();
    let fit = fit_expansion_at(&family, &Point::chart0(0.2, 0.1)).unwrap();
    assert!(fit.relative_deviation.unwrap() < 0.02, "{fit:?}");
    assert!(fit.coefficients[0] > 0.0);
}

fn normalized_sphere() -> ModelGeometry {
    // Θ = R^L/2 makes λ = 1 in normal coordinates.
    ModelGeometry::Sphere(Sphere::new(1, vec![], None, 0.5).unwrap())
}

#[test]
fn phase_vanishes_on_diagonal_and_is_symmetric() {
    let family = FrameFamily::build(&fs(), &k_range(8, 32, 8)).unwrap();
    let x = Point::chart0(0.3, 0.2);
    let y = Point::chart0(-0.1, 0.25);
    assert_eq!(extract_phase(&family, &x, &x).unwrap().imag_psi, 0.0);
    let a = extract_phase(&family, &x, &y).unwrap();
    let b = extract_phase(&family, &y, &x).unwrap();
    assert!(a.imag_psi > 0.0);
    assert!((a.imag_psi - b.imag_psi).abs() < 1e-10);
    // Exact value on the round sphere: ½ log(1 + |z − w|²/|1 + z w̄|²).
    let (z, w) = (x.z, y.z);
    let exact = 0.5 * (1.0 + (z - w).norm_sqr() / (1.0 + z * w.conj()).norm_sqr()).ln();
    assert!((a.imag_psi - exact).abs() < 1e-10);
}

#[test]
fn phase_matches_second_order_taylor_value() {
    let geom = normalized_sphere();
    let family = FrameFamily::build(&geom, &k_range(16, 64, 8)).unwrap();
    let y = Point::chart0(0.0, 0.0);
    let nf = geom.normal_coordinates(&y).unwrap();
    assert!((nf.lambda() - 1.0).abs() < 1e-15);
    let x = nf.to_chart(c(0.1, 0.0));
    let probe = extract_phase(&family, &x, &y).unwrap();
    assert!((probe.taylor_reference - 0.01).abs() < 1e-12);
    assert!((probe.imag_psi - 0.01).abs() < 0.15 * 0.01, "{probe:?}");
}

#[test]
fn overlapping_supports_are_rejected() {
    let family = FrameFamily::build(&fs(), &[4, 5]).unwrap();
    let a = Support::new(0, c(0.0, 0.0), 0.3);
    let b = Support::new(0, c(0.4, 0.0), 0.3);
    assert!(matches!(offdiagonal_decay(&family, &a, &b, 0.1), Err(crate::Error::Precondition(_))));
}

#[test]
fn decay_rate_grows_with_separation() {
    let family = FrameFamily::build(&fs(), &k_range(8, 40, 4)).unwrap();
    let chi = Support::new(0, c(0.0, 0.0), 0.1);
    let mut last = 0.0;
    for d in [0.5, 1.0, 2.0] {
        let chi1 = Support::new(0, c(0.2 + d, 0.0), 0.1);
        let r = offdiagonal_decay(&family, &chi, &chi1, 0.2).unwrap();
        assert!(r.alpha > last, "{d}: {r:?}");
        assert!(r.decreasing_beyond(16));
        last = r.alpha;
    }
}

fn region() -> GapRegion {
    GapRegion::disc(0, c(0.0, 0.0), 0.8)
}

#[test]
fn gap_of_antiholomorphic_bump_has_small_exponent() {
    let family = FrameFamily::build(&fs(), &k_range(8, 32, 8)).unwrap();
    let s = TestSection { center: c(0.0, 0.0), radius: 0.6, coeffs: [c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)] };
    let est = gap_estimate(&family, &region(), &[s]).unwrap();
    assert!(est.rho.iter().all(|r| r.is_finite() && *r > 0.0));
    assert!(est.exponent <= 1.0, "{est:?}");
}

#[test]
fn gap_ratio_is_scale_invariant_and_deterministic() {
    let family = FrameFamily::build(&fs(), &[8, 12]).unwrap();
    let sections = TestSection::generate(&region(), 3, 42);
    let a = gap_estimate(&family, &region(), &sections).unwrap();
    let scaled: Vec<TestSection> = sections.iter().map(|s| s.scaled(c(7.0, 0.0))).collect();
    let b = gap_estimate(&family, &region(), &scaled).unwrap();
    for (x, y) in a.rho.iter().zip(&b.rho) {
        assert!((x - y).abs() < 1e-12 * x);
    }
    let again = gap_estimate(&family, &region(), &TestSection::generate(&region(), 3, 42)).unwrap();
    assert_eq!(again.rho, a.rho);
}

#[test]
fn cut_off_holomorphic_section_has_small_complement() {
    let k = 24;
    let frame = crate::hilbert::BergmanFrame::build(&fs(), k).unwrap();
    // The weighted constant section restricted to |z| < 1 misses a fraction
    // 2^{−k−1} of its mass.
    let r = GapRegion::disc(0, c(0.0, 0.0), 1.0);
    let rule = crate::geometry::QuadratureRule::disc(0, r.center, r.radius, 64, 16);
    let section = |p: &Point| frame.eval(p).unwrap()[0];
    let norm = crate::hilbert::weighted_norm_sq(frame.geometry(), &rule, section).sqrt();
    let coeffs = frame.project(&rule, section).unwrap();
    let perp = (norm * norm - coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>()).max(0.0).sqrt();
    assert!(perp / norm < 1e-3, "{}", perp / norm);
}

#[test]
fn all_holomorphic_sections_is_a_generator_error() {
    let family = FrameFamily::build(&fs(), &[4, 5]).unwrap();
    let zero = TestSection { center: c(0.0, 0.0), radius: 0.5, coeffs: [c(0.0, 0.0); 6] };
    assert!(matches!(gap_estimate(&family, &region(), &[zero]), Err(crate::Error::Generator)));
}
