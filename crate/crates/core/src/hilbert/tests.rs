use super::*;
use crate::geometry::{Bump, ModelGeometry, Point, QuadratureRule, Sphere, Torus};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn fs(m: u32) -> ModelGeometry {
    ModelGeometry::Sphere(Sphere::fubini_study(m))
}

fn torus() -> ModelGeometry {
    ModelGeometry::Torus(Torus::default())
}

fn perturbed() -> ModelGeometry {
    let b = Bump { chart: 0, center: [0.3, 0.1], amplitude: 0.05, radius: 0.7 };
    ModelGeometry::Sphere(Sphere::new(1, vec![b], None, 1.0).unwrap())
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

fn random_point(rng: &mut ChaCha8Rng) -> Point {
    let r = rng.gen_range(0.0..1.0f64).sqrt();
    Point::new(rng.gen_range(0..2), Complex64::from_polar(r, rng.gen_range(0.0..2.0 * PI)))
}

#[test]
fn sphere_gram_matches_beta_integrals() {
    let k = 2;
    let geom = fs(1);
    let basis = WeightedSectionBasis::standard(&geom, k).unwrap();
    let g = assemble_gram(&basis, &geom.quadrature(k).unwrap()).unwrap();
    let BasisKind::Monomials { log_scale, .. } = &basis.kind else { panic!() };
    for j in 0..=2usize {
        let oracle = 2.0 * PI * factorial(j as u32) * factorial(k - j as u32) / factorial(k + 1);
        let raw = g[(j, j)].re * (-2.0 * log_scale[j]).exp();
        assert!((raw - oracle).abs() < 1e-12 * oracle, "{j}: {raw} vs {oracle}");
        for i in 0..=2usize {
            if i != j {
                assert!(g[(i, j)].norm() < 1e-12);
            }
        }
    }
    let closed = basis.closed_form_gram().unwrap();
    assert!((&g - &closed).camax() < 1e-12);
}

#[test]
fn gram_is_exactly_hermitian() {
    let geom = perturbed();
    let basis = WeightedSectionBasis::standard(&geom, 4).unwrap();
    let g = assemble_gram(&basis, &geom.quadrature(4).unwrap()).unwrap();
    assert_eq!(g, g.adjoint());
}

#[test]
fn torus_theta_basis_is_orthonormal_on_grid() {
    let geom = torus();
    let basis = WeightedSectionBasis::standard(&geom, 3).unwrap();
    let g = assemble_gram(&basis, &QuadratureRule::torus(64)).unwrap();
    for i in 0..3 {
        assert!((g[(i, i)].re - 1.0).abs() < 1e-10);
        for j in 0..3 {
            if i != j {
                assert!(g[(i, j)].norm() < 1e-10, "{i}{j}: {}", g[(i, j)]);
            }
        }
    }
}

#[test]
fn orthonormalize_identity_and_diagonal() {
    let (c0, _) = orthonormalize(&DMatrix::identity(3, 3)).unwrap();
    assert_eq!(c0, DMatrix::identity(3, 3));
    let g = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(4.0, 0.0), c(9.0, 0.0)]));
    let (c1, _) = orthonormalize(&g).unwrap();
    assert!((c1[(0, 0)] - c(0.5, 0.0)).norm() < 1e-15);
    assert!((c1[(1, 1)] - c(1.0 / 3.0, 0.0)).norm() < 1e-15);
    assert_eq!(c1[(0, 1)], c(0.0, 0.0));
    assert_eq!(c1[(1, 0)], c(0.0, 0.0));
}

#[test]
fn rank_deficiency_lists_directions() {
    let v = nalgebra::DVector::from_vec(vec![c(1.0, 0.0), c(0.0, 1.0), c(2.0, 0.0)]);
    let mut g = &v * v.adjoint();
    g[(0, 0)] += c(1.0, 0.0);
    match orthonormalize(&g) {
        Err(Error::Rank(dirs)) => assert_eq!(dirs, vec![2]),
        other => panic!("{other:?}"),
    }
}

#[test]
fn ill_conditioned_gram_is_rejected() {
    let g = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.0, 0.0), c(3e-13, 0.0)]));
    assert!(matches!(orthonormalize(&g), Err(Error::IllConditioned { .. })));
}

fn hermitian_pd(entries: &[f64]) -> DMatrix<Complex64> {
    let n = 10;
    let a = DMatrix::from_fn(n, n, |i, j| c(entries[2 * (i * n + j)], entries[2 * (i * n + j) + 1]));
    &a * a.adjoint() + DMatrix::identity(n, n) * c(0.5, 0.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn orthonormalize_random_hermitian(entries in prop::collection::vec(-1.0f64..1.0, 200)) {
        let g = hermitian_pd(&entries);
        let (cm, _) = orthonormalize(&g).unwrap();
        let id = &cm * &g * cm.adjoint();
        prop_assert!((id - DMatrix::<Complex64>::identity(10, 10)).camax() < 1e-10);
        for i in 0..10 {
            prop_assert!(cm[(i, i)].re > 0.0 && cm[(i, i)].im == 0.0);
            for j in (i + 1)..10 {
                prop_assert_eq!(cm[(i, j)], c(0.0, 0.0));
            }
        }
        let (again, _) = orthonormalize(&g).unwrap();
        prop_assert_eq!(again, cm);
    }

    #[test]
    fn kernel_is_hermitian_symmetric(
        ax in -2.0f64..2.0, ay in -2.0f64..2.0, bx in -2.0f64..2.0, by in -2.0f64..2.0,
        ca in 0usize..2, cb in 0usize..2,
    ) {
        let frame = BergmanFrame::build(&perturbed(), 3).unwrap();
        let x = Point::new(ca, c(ax, ay));
        let y = Point::new(cb, c(bx, by));
        prop_assume!(x.z.norm() > 1e-3 && y.z.norm() > 1e-3);
        let kxy = frame.bergman_kernel(&x, &y).unwrap();
        let kyx = frame.bergman_kernel(&y, &x).unwrap();
        prop_assert!((kxy.value - kyx.value.conj()).norm() < 1e-10);
        prop_assert_eq!(kxy.charts, (ca, cb));
        let kxx = frame.bergman_kernel(&x, &x).unwrap().value;
        prop_assert!(kxx.im.abs() < 1e-14 && kxx.re >= 0.0);
    }
}

#[test]
fn bergman_function_is_chart_independent() {
    let geom = fs(1);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for k in [1u32, 5, 12, 30] {
        let frame = BergmanFrame::build(&geom, k).unwrap();
        for _ in 0..20 {
            let z = Complex64::from_polar(rng.gen_range(0.2..3.0), rng.gen_range(0.0..2.0 * PI));
            let a = frame.bergman_function(&Point::new(0, z)).unwrap();
            let b = frame.bergman_function(&Point::new(1, z.inv())).unwrap();
            assert!((a - b).abs() < 1e-9 * a, "k={k}: {a} vs {b}");
        }
    }
}

#[test]
fn fubini_study_bergman_function_is_constant() {
    let geom = fs(1);
    let k = 10;
    let frame = BergmanFrame::build(&geom, k).unwrap();
    assert_eq!(frame.path, GramPath::ClosedForm);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let vals: Vec<f64> = (0..200).map(|_| frame.bergman_function(&random_point(&mut rng)).unwrap()).collect();
    let mean = vals.iter().sum::<f64>() / vals.len() as f64;
    let spread = vals.iter().cloned().fold(f64::MIN, f64::max) - vals.iter().cloned().fold(f64::MAX, f64::min);
    assert!(spread < 1e-8 * mean);
    let expected = (k + 1) as f64 / geom.volume();
    assert!((mean - expected).abs() < 1e-10 * expected);
}

#[test]
fn torus_bergman_function_is_nearly_constant() {
    // Only the 1/k-lattice translations lift to L^k, so P_k is constant up to
    // terms of size e^{−πk/2}.
    let geom = torus();
    for k in [4u32, 9, 16] {
        let frame = BergmanFrame::build(&geom, k).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(k as u64);
        for _ in 0..50 {
            let p = Point::new(rng.gen_range(0..2), c(rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)));
            let v = frame.bergman_function(&p).unwrap();
            let expected = k as f64 / (2.0 * PI);
            let tol = 4.0 * (-PI * k as f64 / 2.0).exp();
            assert!((v - expected).abs() < tol * expected, "k={k}: {v}");
        }
    }
}

#[test]
fn weighted_representatives_satisfy_cocycle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for geom in [fs(2), perturbed(), torus()] {
        let k = 3;
        let basis = WeightedSectionBasis::standard(&geom, k).unwrap();
        for _ in 0..50 {
            let p = Point::new(0, Complex64::from_polar(rng.gen_range(0.3..2.0), rng.gen_range(0.0..2.0 * PI)));
            let q = geom.to_chart(&p, 1).unwrap();
            let lg = geom.log_transition_factor(&p, 1).unwrap();
            let phase = Complex64::from_polar(1.0, k as f64 * lg.im);
            let (a, b) = (basis.weighted(&p).unwrap(), basis.weighted(&q).unwrap());
            for (x, y) in a.iter().zip(&b) {
                assert!((x * phase - y).norm() < 1e-8 * (1.0 + x.norm()), "{x} {y}");
            }
        }
    }
}

#[test]
fn reproducing_property() {
    let geom = perturbed();
    let k = 4;
    let frame = BergmanFrame::build(&geom, k).unwrap();
    assert_eq!(frame.path, GramPath::Quadrature);
    let rule = geom.quadrature(k).unwrap();
    let x = Point::new(0, c(0.4, -0.2));
    let target = frame.eval(&x).unwrap()[0];
    let mut acc = c(0.0, 0.0);
    for node in &rule.nodes {
        let y = Point::new(node.chart, node.z);
        let w = node.weight * geom.volume_density(&y);
        acc += frame.bergman_kernel(&x, &y).unwrap().value * frame.eval(&y).unwrap()[0] * w;
    }
    assert!((acc - target).norm() < 1e-9, "{acc} vs {target}");
}

#[test]
fn frame_is_orthonormal_under_quadrature() {
    let geom = perturbed();
    let k = 5;
    let frame = BergmanFrame::build(&geom, k).unwrap();
    let g = assemble_gram(&frame.basis, &geom.quadrature(k).unwrap()).unwrap();
    let id = &frame.coeffs * g * frame.coeffs.adjoint();
    assert!((id - DMatrix::<Complex64>::identity(6, 6)).camax() < 1e-10);
}

#[test]
fn trace_of_bergman_function_is_dimension() {
    let geom = perturbed();
    let k = 6;
    let frame = BergmanFrame::build(&geom, k).unwrap();
    let rule = geom.quadrature(k).unwrap();
    let total: f64 = rule
        .nodes
        .iter()
        .map(|n| {
            let p = Point::new(n.chart, n.z);
            n.weight * geom.volume_density(&p) * frame.bergman_function(&p).unwrap()
        })
        .sum();
    assert!((total - 7.0).abs() < 1e-9);
}

#[test]
fn localized_kernel_matches_kernel() {
    let frame = BergmanFrame::build(&torus(), 5).unwrap();
    let lk = frame.localized_kernel(0, 1);
    let (x, y) = (c(0.2, 0.7), c(1.5, 1.1));
    let direct = frame.bergman_kernel(&Point::new(0, x), &Point::new(1, y)).unwrap().value;
    assert_eq!(lk.eval(x, y).unwrap(), direct);
}

#[test]
fn portable_json_round_trips_exactly() {
    let spec = crate::geometry::ModelSpec {
        perturbations: vec![Bump { chart: 0, center: [0.1, 0.0], amplitude: 0.02, radius: 0.5 }],
        ..crate::geometry::ModelSpec::sphere()
    };
    let frame = BergmanFrame::from_spec(&spec, 3).unwrap();
    let back = BergmanFrame::from_json(&frame.to_json(&spec).unwrap()).unwrap();
    assert_eq!(back.coeffs, frame.coeffs);
    assert_eq!(back.basis, frame.basis);
}

#[test]
fn closed_form_and_quadrature_frames_agree() {
    let geom = fs(2);
    let a = BergmanFrame::build_with(&geom, 6, GramMode::Auto, None).unwrap();
    let b = BergmanFrame::build_with(&geom, 6, GramMode::Quadrature, None).unwrap();
    assert_eq!(a.path, GramPath::ClosedForm);
    assert!((&a.coeffs - &b.coeffs).camax() < 1e-10);
}

#[test]
fn projecting_a_frame_element_gives_unit_vector() {
    let geom = perturbed();
    let k = 5;
    let frame = BergmanFrame::build(&geom, k).unwrap();
    let rule = geom.quadrature(k).unwrap();
    let coeffs = frame.project(&rule, |p| frame.eval(p).unwrap()[3]).unwrap();
    for (j, cj) in coeffs.iter().enumerate() {
        let e = if j == 3 { 1.0 } else { 0.0 };
        assert!((cj - c(e, 0.0)).norm() < 1e-10, "{j}: {cj}");
    }
}

#[test]
fn projection_of_antiholomorphic_data_matches_beta_oracle() {
    let geom = fs(1);
    let k = 5;
    let frame = BergmanFrame::build(&geom, k).unwrap();
    let rule = geom.quadrature(k).unwrap();
    let weighted = |p: &Point, w: Complex64| weighted_from_frame(&geom, k, p, w).unwrap();
    // conj(z) pairs with no monomial.
    let coeffs = frame.project(&rule, |p| weighted(p, p.z.conj())).unwrap();
    assert!(coeffs.iter().all(|cj| cj.norm() < 1e-10));
    // conj(z)·z² pairs only with z, through ∫|z|⁴ e^{−2kφ} dv = 2π·2!·3!/6!.
    let coeffs = frame.project(&rule, |p| weighted(p, p.z.conj() * p.z * p.z)).unwrap();
    let nu1 = (2.0 * PI * factorial(1) * factorial(4) / factorial(6)).sqrt().recip();
    let oracle = nu1 * 2.0 * PI * factorial(2) * factorial(3) / factorial(6);
    for (j, cj) in coeffs.iter().enumerate() {
        let e = if j == 1 { oracle } else { 0.0 };
        assert!((cj - c(e, 0.0)).norm() < 1e-10, "{j}: {cj} vs {e}");
    }
}

#[test]
fn projection_kills_orthogonal_complement() {
    let geom = perturbed();
    let k = 3;
    let frame = BergmanFrame::build(&geom, k).unwrap();
    let rule = geom.quadrature(k).unwrap();
    let data = |p: &Point| weighted_from_frame(&geom, k, p, c(1.0, 0.0) + p.z.conj()).unwrap();
    let coeffs = frame.project(&rule, data).unwrap();
    let residual = |p: &Point| data(p) - frame.reconstruct(&coeffs, p).unwrap();
    let again = frame.project(&rule, residual).unwrap();
    assert!(again.iter().all(|cj| cj.norm() < 1e-10), "{again:?}");
}

#[test]
fn refinement_disagreement_is_a_resolution_error() {
    let geom = fs(1);
    let k = 2;
    let frame = BergmanFrame::build(&geom, k).unwrap();
    let coarse = QuadratureRule::disc(0, c(0.0, 0.0), 1.0, 4, 8);
    let fine = QuadratureRule::disc(0, c(0.0, 0.0), 1.0, 40, 80);
    let wiggly = |p: &Point| Complex64::from_polar(1.0, 40.0 * p.z.re);
    assert!(matches!(frame.project_refined(&coarse, &fine, wiggly), Err(Error::Resolution { .. })));
    let smooth = |p: &Point| frame.eval(p).unwrap()[1];
    let mid = QuadratureRule::disc(0, c(0.0, 0.0), 1.0, 30, 60);
    assert!(frame.project_refined(&mid, &fine, smooth).is_ok());
}

fn bump(z: Complex64) -> f64 {
    let r2 = z.norm_sqr();
    if r2 >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - r2)).exp()
    }
}

#[test]
fn dbar_of_holomorphic_data_vanishes() {
    let geom = fs(1);
    let rule = QuadratureRule::disc(0, c(0.0, 0.0), 0.8, 12, 24);
    let norm = dbar_norm(&geom, &rule, |p| {
        Ok(dbar_apply(|z| z * z * z + z.powi(5), p.z, 1e-3) * (-3.0 * geom.weight(p)?).exp())
    })
    .unwrap();
    assert!(norm < 1e-12, "{norm}");
}

#[test]
fn dbar_matches_analytic_derivative() {
    // ∂_z̄ (z̄ β(|z|²)) = β + |z|² β' with β(s) = e^{−1/(1−s)}.
    let f = |z: Complex64| z.conj() * bump(z);
    for z in [c(0.1, 0.2), c(-0.4, 0.3), c(0.6, -0.5)] {
        let s = z.norm_sqr();
        let beta = bump(z);
        let dbeta = -beta / ((1.0 - s) * (1.0 - s));
        let exact = beta + s * dbeta;
        let fd = dbar_apply(f, z, 1e-4);
        assert!((fd - c(exact, 0.0)).norm() < 1e-6, "{z}: {fd} vs {exact}");
    }
}

#[test]
fn dbar_norm_is_homogeneous() {
    let geom = perturbed();
    let k = 4;
    let rule = QuadratureRule::disc(0, c(0.1, 0.0), 0.9, 16, 32);
    let form = |p: &Point| -> Result<Complex64> {
        let f = |z: Complex64| z.conj() * bump(z - c(0.1, 0.0)) * (-(k as f64) * geom.weight(&Point::new(0, z)).unwrap()).exp();
        dbar_weighted(&geom, k, 0, f, p.z, 1e-4)
    };
    let n1 = dbar_norm(&geom, &rule, form).unwrap();
    let scale = c(-2.0, 1.5);
    let n2 = dbar_norm(&geom, &rule, |p| Ok(form(p)? * scale)).unwrap();
    assert!(n1 > 0.0);
    assert!((n2 - scale.norm() * n1).abs() < 1e-12 * n2);
}

#[test]
fn twisted_dbar_of_weighted_holomorphic_data_vanishes() {
    let geom = perturbed();
    let k = 6;
    for z in [c(0.2, 0.1), c(-0.5, 0.4)] {
        let v = |w: Complex64| w * w * (-(k as f64) * geom.weight(&Point::new(0, w)).unwrap()).exp();
        let d = dbar_weighted(&geom, k, 0, v, z, 1e-4).unwrap();
        assert!(d.norm() < 1e-7, "{d}");
    }
}
