use num_complex::Complex64;
use std::f64::consts::PI;

use super::*;
use crate::geometry::{ModelGeometry, Point, Sphere};
use crate::hilbert::BergmanFrame;

fn probe_points() -> Vec<Point> {
    vec![Point::chart0(0.4, 0.1), Point::chart0(-0.7, 0.5), Point::chart0(1.3, -0.2), Point::new(1, Complex64::new(0.2, 0.3))]
}

#[test]
fn admissible_orders_follow_threshold() {
    assert_eq!(admissible_orders(4, 1, 0.5), vec![2, 3, 4]);
    assert_eq!(admissible_orders(4, 1, 1e-9), vec![0, 1, 2, 3, 4]);
    assert_eq!(admissible_orders(4, 1, 0.75), vec![3, 4]);
}

#[test]
fn skoda_thresholds_match_for_half_pole() {
    let w = SingularWeight::at_origin(1, 0.5).unwrap();
    let r = skoda_check(&w, 4, &probe_points()).unwrap();
    assert_eq!(r.accepted, vec![2, 3, 4]);
    assert!(r.thresholds_match);
    assert!(!r.truncation_warning);
    assert!(r.max_relative_discrepancy < 1e-9, "{}", r.max_relative_discrepancy);
}

#[test]
fn skoda_thresholds_match_across_tau() {
    for (k, tau) in [(3, 0.3), (5, 0.9), (6, 0.25), (8, 0.6)] {
        let w = SingularWeight::at_origin(1, tau).unwrap();
        let r = skoda_check(&w, k, &probe_points()).unwrap();
        assert!(r.thresholds_match, "k {k} tau {tau}: {:?} vs {:?}", r.accepted, r.admissible);
        assert!(r.max_relative_discrepancy < 1e-9, "k {k} tau {tau}: {}", r.max_relative_discrepancy);
    }
}

#[test]
fn tiny_pole_recovers_smooth_kernel() {
    let k = 4;
    let w = SingularWeight::at_origin(1, 1e-9).unwrap();
    let mf = MultiplierFrame::build(&w, k).unwrap();
    assert_eq!(mf.dimension(), 5);
    let smooth = BergmanFrame::build(&ModelGeometry::Sphere(Sphere::fubini_study(1)), k).unwrap();
    for p in probe_points() {
        let a = mf.kernel(&p).unwrap();
        let b = smooth.bergman_function(&p).unwrap();
        assert!((a - b).abs() < 1e-6 * b, "{p:?}: {a} vs {b}");
    }
}

#[test]
fn refinement_separates_admissible_from_borderline() {
    let (k, m, tau) = (4, 1, 0.5);
    let mesh = GradedMesh::new(POLE_CUTOFF, NODES_PER_SHELL);
    let refined = GradedMesh::new(REFINED_CUTOFF, NODES_PER_SHELL);
    for v in admissible_orders(k, m, tau) {
        let c = classify_candidate(k, m, tau, v, &mesh, &refined);
        assert!(c.integrable);
        let change = (c.log_norm_refined - c.log_norm).exp() - 1.0;
        assert!(change.abs() < 1e-6, "v {v}: {change}");
    }
    let v = (k as f64 * tau).ceil() as i64 - 1;
    let c = classify_candidate(k, m, tau, v, &mesh, &refined);
    assert!(!c.integrable);
    assert!(c.log_norm_refined - c.log_norm > 10f64.ln(), "{c:?}");
}

#[test]
fn closed_form_norms_agree_with_graded_quadrature() {
    let (k, m, tau) = (5, 1, 0.3);
    let mesh = GradedMesh::new(POLE_CUTOFF, NODES_PER_SHELL);
    for v in admissible_orders(k, m, tau) {
        let (a, b) = beta_exponents(k, m, tau, v);
        let quad = log_radial_integral(&mesh, a, b, true) + (2.0 * PI * m as f64).ln();
        let exact = (2.0 * PI * m as f64).ln() + crate::hilbert::ln_beta(a + 1.0, b + 1.0);
        assert!((quad - exact).abs() < 1e-10, "v {v}: {quad} vs {exact}");
    }
}

#[test]
fn trace_of_multiplier_kernel_is_its_dimension() {
    let w = SingularWeight::at_origin(1, 0.6).unwrap();
    let k = 7;
    let mf = MultiplierFrame::build(&w, k).unwrap();
    let rule = GradedMesh::new(POLE_CUTOFF, NODES_PER_SHELL).rule(2 * k as usize + 8);
    let geom = w.geometry();
    let tr: f64 = rule
        .nodes
        .iter()
        .filter(|n| n.z.norm() > 0.0)
        .map(|n| {
            let p = Point::new(n.chart, n.z);
            n.weight * geom.volume_density(&p) * mf.kernel(&p).unwrap()
        })
        .sum();
    assert!((tr - mf.dimension() as f64).abs() < 1e-6, "{tr}");
}

#[test]
fn pole_is_rejected_and_negative_orders_excluded() {
    let w = SingularWeight::at_origin(1, 0.4).unwrap();
    let mf = MultiplierFrame::build(&w, 3).unwrap();
    assert!(matches!(mf.kernel(&Point::chart0(0.0, 0.0)), Err(crate::Error::Pole(_))));
    let r = skoda_check(&w, 3, &probe_points()).unwrap();
    let inv = r.candidates.iter().find(|c| c.order == -1).unwrap();
    assert!(!inv.integrable);
    assert!(skoda_check(&w, 3, &[Point::chart0(0.01, 0.0)]).is_err());
}

#[test]
fn multiplier_dimension_is_monotone_in_tau() {
    let k = 6;
    let dims: Vec<usize> = [0.05, 0.2, 0.4, 0.6, 0.8, 0.95]
        .iter()
        .map(|&t| MultiplierFrame::build(&SingularWeight::at_origin(1, t).unwrap(), k).unwrap().dimension())
        .collect();
    assert!(dims.windows(2).all(|w| w[1] <= w[0]), "{dims:?}");
}

#[test]
fn rotated_pole_matches_origin_model() {
    let k = 5;
    let pole = Point::chart0(0.6, -0.3);
    let w = SingularWeight::new(1, 0.5, pole).unwrap();
    let w0 = SingularWeight::at_origin(1, 0.5).unwrap();
    let mf = MultiplierFrame::build(&w, k).unwrap();
    let mf0 = MultiplierFrame::build(&w0, k).unwrap();
    assert!(mf.kernel(&pole).is_err());
    for p in probe_points() {
        let a = mf.kernel(&p).unwrap();
        let b = mf0.kernel(&w.to_model(&p)).unwrap();
        assert!((a - b).abs() < 1e-12 * b);
    }
    assert!(w.distance_to_pole(&pole) < 1e-12);
}

#[test]
fn multiplier_kernel_leading_term_off_pole() {
    let w = SingularWeight::at_origin(1, 0.5).unwrap();
    let ks: Vec<u32> = (8..=40).step_by(4).collect();
    let r = singular_expansion_check(&w, &ks, &[Point::chart0(0.8, 0.2), Point::chart0(1.5, 0.0)]).unwrap();
    assert!((r.reference - 0.25 / PI).abs() < 1e-15);
    assert!(r.max_relative_deviation < 0.03, "{}", r.max_relative_deviation);
}

#[test]
fn big_bound_near_pole() {
    let w = SingularWeight::at_origin(1, 0.5).unwrap();
    let ks: Vec<u32> = (8..=48).step_by(4).collect();
    let r = big_bound_check(&w, &ks, &PoleAnnulus { r0: 0.05, r1: 0.3 }).unwrap();
    assert!(r.inequality_holds);
    assert!(r.exponent > 0.9 && r.exponent < 1.1, "{}", r.exponent);
}

#[test]
fn spectral_gap_on_annulus_away_from_pole() {
    use crate::asymptotics::{gap_estimate, GapRegion, TestSection};
    let w = SingularWeight::at_origin(1, 0.5).unwrap();
    let ks: Vec<u32> = (8..=32).step_by(8).collect();
    let (_, family) = multiplier_family(&w, &ks).unwrap();
    let region = GapRegion::annulus(0, Complex64::new(0.0, 0.0), 0.3, 1.0);
    let sections = TestSection::generate(&region, 4, 7);
    for s in &sections {
        assert!((s.center.norm() - s.radius) >= 0.3 - 1e-12 && s.center.norm() + s.radius <= 1.0 + 1e-12);
    }
    let est = gap_estimate(&family, &region, &sections).unwrap();
    assert!(est.rho.iter().all(|r| r.is_finite() && *r > 0.0), "{est:?}");
    assert!(est.residual < 0.2, "{est:?}");
}
