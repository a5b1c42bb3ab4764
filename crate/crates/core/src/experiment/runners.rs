use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::time::Instant;

use super::cache::{digest, FrameCache};
use super::output::Curve;
use super::{Assertion, ExperimentConfig, ExperimentId, ExperimentReport};
use crate::asymptotics::{
    extract_phase, fit_expansion_at, gap_estimate, offdiagonal_decay, FrameFamily, GapRegion, Support, TestSection,
};
use crate::error::{Error, Result};
use crate::geometry::{ModelGeometry, ModelSpec, Point};
use crate::kodaira::{curvature_diagnostic, immersion_check, injectivity_scan, sample_pairs};
use crate::peaks::{peak_limit, peak_limit_without_gaussian, peak_section, verify_peak_lemmas, CutoffProfile};
use crate::singular::{
    big_bound_check, multiplier_family, singular_expansion_check, skoda_check, MultiplierFrame, PoleAnnulus,
    SingularWeight,
};

/// Seeded sample points: uniform in `t = |z|²/(1+|z|²)` away from the poles
/// of the chart on the sphere, uniform on the fundamental domain of the torus.
pub fn sample_points(geometry: &ModelGeometry, count: usize, seed: u64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| match geometry {
            ModelGeometry::Sphere(_) => {
                let t: f64 = rng.gen_range(0.02..0.98);
                let z = Complex64::from_polar((t / (1.0 - t)).sqrt(), rng.gen_range(0.0..TAU));
                geometry.canonical(&Point::new(0, z))
            }
            ModelGeometry::Torus(_) => Point::chart0(rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)),
        })
        .collect()
}

#[derive(Default)]
struct Outcome {
    frame_hashes: Vec<String>,
    constants: BTreeMap<String, f64>,
    assertions: Vec<Assertion>,
    curves: Vec<Curve>,
    warnings: Vec<String>,
}

impl Outcome {
    fn constant(&mut self, name: &str, v: f64) {
        self.constants.insert(name.into(), v);
    }
}

/// Runs an experiment on a pool of `config.workers` threads.
pub fn run(config: &ExperimentConfig, cache: &FrameCache) -> Result<ExperimentReport> {
    config.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = config.workers {
        builder = builder.num_threads(w);
    }
    let pool = builder.build().map_err(|e| Error::Config(e.to_string()))?;
    pool.install(|| run_in(config, cache))
}

/// Runs an experiment on the current thread pool.
pub fn run_in(config: &ExperimentConfig, cache: &FrameCache) -> Result<ExperimentReport> {
    config.validate()?;
    let start = Instant::now();
    let o = match config.experiment {
        ExperimentId::Expansion => expansion(config, cache)?,
        ExperimentId::Phase => phase(config, cache)?,
        ExperimentId::Decay => decay(config, cache)?,
        ExperimentId::Gap => gap(config, cache)?,
        ExperimentId::Peaks => peaks(config, cache)?,
        ExperimentId::Immersion => immersion(config, cache)?,
        ExperimentId::Injectivity => injectivity(config, cache)?,
        ExperimentId::SingularSkoda => singular_skoda(config)?,
        ExperimentId::SingularBig => singular_big(config)?,
    };
    Ok(ExperimentReport {
        config: config.clone(),
        model_hash: config.model.hash(),
        frame_hashes: o.frame_hashes,
        constants: o.constants,
        assertions: o.assertions,
        curves: o.curves,
        warnings: o.warnings,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

fn family(config: &ExperimentConfig, cache: &FrameCache, o: &mut Outcome) -> Result<(ModelGeometry, FrameFamily)> {
    let (family, hashes, warnings) = cache.family(&config.model, &config.ks)?;
    o.frame_hashes = hashes;
    o.warnings.extend(warnings);
    Ok((ModelGeometry::from_spec(&config.model)?, family))
}

fn expansion(config: &ExperimentConfig, cache: &FrameCache) -> Result<Outcome> {
    let mut o = Outcome::default();
    let (geom, family) = family(config, cache, &mut o)?;
    let points = sample_points(&geom, config.samples.unwrap_or(20), config.seed);
    let fits = points.par_iter().map(|p| fit_expansion_at(&family, p)).collect::<Result<Vec<_>>>()?;
    let mut values = Curve::new("bergman-function", &["k", "P_k", "point"]);
    for (i, p) in points.iter().enumerate() {
        for f in &family.frames {
            values.push(vec![f.k() as f64, f.bergman_function(p)?, i as f64]);
        }
    }
    let mut table = Curve::new("expansion-fit", &["point", "b0", "b1", "b2", "reference", "relative_deviation", "residual"]);
    let mut worst = 0.0f64;
    for (i, f) in fits.iter().enumerate() {
        let dev = f.relative_deviation.unwrap_or(f64::INFINITY);
        worst = worst.max(dev);
        let [b0, b1, b2] = f.coefficients;
        table.push(vec![i as f64, b0, b1, b2, f.reference.unwrap_or(f64::NAN), dev, f.residual]);
    }
    o.constant("max_relative_deviation", worst);
    o.constant("max_residual", fits.iter().map(|f| f.residual).fold(0.0, f64::max));
    o.assertions.push(Assertion::at_most("leading-coefficient", "b0 equals (2π)^-1 |det R^L|", worst, config.tolerances.leading));
    o.curves = vec![values, table];
    Ok(o)
}

fn phase(config: &ExperimentConfig, cache: &FrameCache) -> Result<Outcome> {
    let mut o = Outcome::default();
    let (geom, family) = family(config, cache, &mut o)?;
    let bases = [Point::chart0(0.0, 0.0), Point::chart0(0.3, -0.2), Point::chart0(-0.5, 0.4)];
    let mut tasks = Vec::new();
    for (b, y) in bases.iter().enumerate() {
        for (j, d) in [0.05, 0.1, 0.2].into_iter().enumerate() {
            tasks.push((b, *y, d, Complex64::from_polar(d, 0.7 + 2.1 * j as f64)));
        }
    }
    let probes = tasks
        .par_iter()
        .map(|(_, y, _, zp)| {
            let nf = geom.normal_coordinates_third_order(y)?;
            extract_phase(&family, &nf.to_chart(*zp), y)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut curve = Curve::new("phase", &["distance", "imag_psi", "taylor", "base"]);
    let (mut worst, mut min_psi) = (0.0f64, f64::INFINITY);
    for ((b, _, d, _), p) in tasks.iter().zip(&probes) {
        curve.push(vec![*d, p.imag_psi, p.taylor_reference, *b as f64]);
        worst = worst.max((p.imag_psi - p.taylor_reference).abs() / p.taylor_reference);
        min_psi = min_psi.min(p.imag_psi);
    }
    let diagonal = bases
        .iter()
        .map(|y| extract_phase(&family, y, y).map(|p| p.imag_psi.abs()))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    o.constant("max_relative_taylor_deviation", worst);
    o.constant("min_imag_psi", min_psi);
    o.constant("max_diagonal_imag_psi", diagonal);
    o.assertions.push(Assertion::at_most("taylor-match", "Im Ψ agrees with λ|z-w|^2 near the diagonal", worst, config.tolerances.phase));
    o.assertions.push(Assertion::at_least("nonnegative", "Im Ψ >= 0", min_psi, 0.0));
    o.assertions.push(Assertion::at_most("diagonal-zero", "Ψ(x, x) = 0", diagonal, 1e-10));
    o.curves = vec![curve];
    Ok(o)
}

/// Supports of radius 0.1 on the real axis of chart 0 with gap 0.5.
pub(crate) fn decay_supports() -> (Support, Support) {
    let c = |x| Complex64::new(x, 0.0);
    (Support::new(0, c(-0.35), 0.1), Support::new(0, c(0.35), 0.1))
}

fn decay(config: &ExperimentConfig, cache: &FrameCache) -> Result<Outcome> {
    let mut o = Outcome::default();
    let (_, family) = family(config, cache, &mut o)?;
    let (chi, chi1) = decay_supports();
    let r = offdiagonal_decay(&family, &chi, &chi1, 0.5)?;
    let mut curve = Curve::new("decay", &["k", "sup"]);
    for (k, s) in r.ks.iter().zip(&r.sup) {
        curve.push(vec![*k as f64, *s]);
    }
    let orders = -r.ratio.log10();
    o.constant("separation", r.separation);
    o.constant("alpha", r.alpha);
    o.constant("orders_of_magnitude", orders);
    o.assertions.push(Assertion::at_least("orders-drop", "sup |P_k| is O(k^-∞) between disjoint supports", orders, config.tolerances.decay_orders));
    o.assertions.push(Assertion::at_least("positive-rate", "fitted exponential rate is positive", r.alpha, f64::MIN_POSITIVE));
    o.assertions.push(Assertion::holds("decreasing", "s_k strictly decreasing beyond k = 16", r.decreasing_beyond(16)));
    o.curves = vec![curve];
    Ok(o)
}

fn singular_weight(config: &ExperimentConfig) -> Result<(SingularWeight, PoleAnnulus)> {
    let s = config.singular.as_ref().ok_or_else(|| Error::Config("missing [singular] table".into()))?;
    let w = SingularWeight::new(config.model.degree, s.tau, s.pole_point())?;
    Ok((w, PoleAnnulus { r0: s.annulus[0], r1: s.annulus[1] }))
}

fn multiplier_hashes(weight: &SingularWeight, frames: &[MultiplierFrame]) -> Result<Vec<String>> {
    let spec = ModelSpec { degree: weight.degree, pole: Some(weight.tau), ..ModelSpec::sphere() };
    frames.iter().map(|f| Ok(digest(&f.frame.to_json(&spec)?))).collect()
}

fn gap(config: &ExperimentConfig, cache: &FrameCache) -> Result<Outcome> {
    let mut o = Outcome::default();
    let (family, region) = if config.singular.is_some() {
        let (w, k) = singular_weight(config)?;
        let (frames, family) = multiplier_family(&w, &config.ks)?;
        o.frame_hashes = multiplier_hashes(&w, &frames)?;
        (family, GapRegion::annulus(0, Complex64::new(0.0, 0.0), k.r0, k.r1))
    } else {
        let (_, family) = family(config, cache, &mut o)?;
        (family, GapRegion::disc(0, Complex64::new(0.0, 0.0), 0.8))
    };
    let sections = TestSection::generate(&region, config.samples.unwrap_or(6), config.seed);
    let est = gap_estimate(&family, &region, &sections)?;
    let mut curve = Curve::new("gap", &["k", "rho"]);
    for (k, r) in est.ks.iter().zip(&est.rho) {
        curve.push(vec![*k as f64, *r]);
    }
    o.constant("constant", est.constant);
    o.constant("exponent", est.exponent);
    o.constant("residual", est.residual);
    o.constant("skipped", est.skipped as f64);
    let finite = est.rho.iter().all(|r| r.is_finite()) && est.constant.is_finite() && est.exponent.is_finite();
    o.assertions.push(Assertion::holds("finite-constants", "(C, N) of the small spectral gap exist", finite));
    o.assertions.push(Assertion::at_most("fit-residual", "log-log fit of ρ_k is a power law", est.residual, config.tolerances.gap_residual));
    o.curves = vec![curve];
    Ok(o)
}

fn peak_points(geom: &ModelGeometry) -> Vec<Point> {
    match geom {
        ModelGeometry::Sphere(_) => vec![Point::chart0(0.0, 0.0), Point::chart0(0.3, 0.0), Point::chart0(1.0, 1.0)],
        ModelGeometry::Torus(_) => vec![Point::chart0(0.5, 0.5), Point::chart0(0.0, 0.0), Point::chart0(0.5, 0.0)],
    }
}

fn peaks(config: &ExperimentConfig, cache: &FrameCache) -> Result<Outcome> {
    let mut o = Outcome::default();
    let (geom, family) = family(config, cache, &mut o)?;
    let chi = CutoffProfile::default();
    let points = peak_points(&geom);
    let report = verify_peak_lemmas(&family, &points, &chi)?;
    let mut rows = Curve::new("peak-inequalities", &["k", "measured", "bound", "point", "family"]);
    for (fi, f) in report.families.iter().enumerate() {
        for &(p, k, m, b) in &f.rows {
            rows.push(vec![k as f64, m, b, p as f64, fi as f64]);
        }
        if !f.skipped {
            o.assertions.push(Assertion::holds(&format!("family-{}", f.name), "peak-section inequality holds from k0 on", f.pass_from(report.k0.unwrap_or(report.ks[0]))));
        }
    }
    o.constant("c0", report.c0);
    o.constant("c1", report.c1);
    o.constant("k0", report.k0.map_or(f64::INFINITY, f64::from));
    o.constant("exterior_exponent", report.exterior_exponent);
    o.assertions.push(Assertion::at_most("uniform-k0", "every family holds for k >= 16", o.constants["k0"], 16.0));

    let p = points[1];
    let frames = [32u32, 64]
        .par_iter()
        .map(|&k| {
            let (f, _, _) = cache.family(&config.model, &[k])?;
            peak_section(&f.frames[0], &p, &chi).map(|s| s.value.re)
        })
        .collect::<Result<Vec<_>>>()?;
    let extrapolated = 2.0 * frames[1] - frames[0];
    let nf = geom.normal_coordinates(&p)?;
    let limit = peak_limit(geom.det_curvature(&p)?, nf.lambda(), &chi);
    let literal = peak_limit_without_gaussian(geom.det_curvature(&p)?, &chi);
    let dev = (extrapolated - limit).abs() / limit;
    o.constant("peak_value_k32", frames[0]);
    o.constant("peak_value_k64", frames[1]);
    o.constant("peak_extrapolated", extrapolated);
    o.constant("peak_limit", limit);
    o.constant("peak_limit_without_gaussian", literal);
    o.assertions.push(Assertion::at_most("peak-limit", "u_k(p) tends to the Gaussian-weighted cutoff integral", dev, config.tolerances.peak_limit));
    o.curves = vec![rows];
    Ok(o)
}

/// Smallest `k` from which the Kodaira map is expected to embed the model.
fn embedding_k(geom: &ModelGeometry) -> u32 {
    match geom {
        ModelGeometry::Sphere(_) => 1,
        ModelGeometry::Torus(_) => 3,
    }
}

fn immersion(config: &ExperimentConfig, cache: &FrameCache) -> Result<Outcome> {
    let mut o = Outcome::default();
    let (geom, family) = family(config, cache, &mut o)?;
    let points = sample_points(&geom, config.samples.unwrap_or(200), config.seed);
    let mut curve = Curve::new("immersion", &["k", "min_fs_singular_value", "full_rank_fraction"]);
    for f in &family.frames {
        let certs = points.par_iter().map(|p| immersion_check(f, p)).collect::<Result<Vec<_>>>()?;
        let full = certs.iter().filter(|c| c.full_rank).count();
        let min_sv = certs.iter().map(|c| c.fs_min_singular_value).fold(f64::INFINITY, f64::min);
        let k = f.k();
        curve.push(vec![k as f64, min_sv, full as f64 / certs.len() as f64]);
        o.constant(&format!("min_fs_singular_value_k{k}"), min_sv);
        if k >= embedding_k(&geom) {
            o.assertions.push(Assertion::at_least(&format!("full-rank-k{k}"), "Φ_k is an immersion", full as f64, certs.len() as f64));
        } else if k == 1 && matches!(geom, ModelGeometry::Torus(_)) {
            o.assertions.push(Assertion::at_most("constant-map-k1", "a single section gives a constant map", full as f64, 0.0));
        }
    }
    o.curves = vec![curve];
    Ok(o)
}

fn injectivity(config: &ExperimentConfig, cache: &FrameCache) -> Result<Outcome> {
    let mut o = Outcome::default();
    let (geom, family) = family(config, cache, &mut o)?;
    let count = config.samples.unwrap_or(1000);
    let mut curve = Curve::new("injectivity", &["source_distance", "image_distance", "k"]);
    for f in &family.frames {
        let k = f.k();
        let pairs = sample_pairs(&geom, k, count, config.seed)?;
        let scan = injectivity_scan(f, &pairs)?;
        for r in &scan.results {
            curve.push(vec![r.source_distance, r.image_distance, k as f64]);
        }
        o.constant(&format!("violations_k{k}"), scan.violations as f64);
        o.constant(&format!("consistency_k{k}"), scan.consistency);
        if k >= embedding_k(&geom) {
            o.assertions.push(Assertion::at_most(&format!("injective-k{k}"), "Φ_k separates points", scan.violations as f64, 0.0));
        } else if k == 1 && matches!(geom, ModelGeometry::Torus(_)) {
            o.assertions.push(Assertion::at_least("collisions-k1", "a single section separates no points", scan.violations as f64, count as f64));
        }
    }
    let (case2, _, _) = cache.family(&config.model, &[16, 32, 48, 64])?;
    let y = match geom {
        ModelGeometry::Sphere(_) => Point::chart0(0.1, 0.2),
        ModelGeometry::Torus(_) => Point::chart0(0.4, 0.3),
    };
    let r = curvature_diagnostic(&case2, &y, Complex64::new(1.0, 1.0), 1.0, 21)?;
    let mut c2 = Curve::new("case-two", &["k", "scaled_second_derivative", "hessian_term", "first_derivative"]);
    for (i, k) in r.ks.iter().enumerate() {
        c2.push(vec![*k as f64, r.scaled_second_derivative[i], r.hessian_term[i], r.first_derivative[i]]);
    }
    let hessian_max = r.hessian_term.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    o.constant("case_two_negative_bound", r.negative_bound);
    o.constant("case_two_predicted", r.predicted);
    o.assertions.push(Assertion::at_least("case-two-negative", "scaled f_k'' is strictly negative on the 1/k scale", r.negative_bound, f64::MIN_POSITIVE));
    o.assertions.push(Assertion::at_most("case-two-hessian", "phase Hessian term is negative", hessian_max, -f64::MIN_POSITIVE));
    o.assertions.push(Assertion::holds(
        "case-two-first-derivative",
        "first-derivative term decays in k",
        r.first_derivative.windows(2).all(|w| w[1] < w[0]),
    ));
    o.curves = vec![curve, c2];
    Ok(o)
}

/// Points of the annulus `K` around the pole, mapped back from model coordinates.
fn annulus_points(weight: &SingularWeight, k: &PoleAnnulus, count: usize) -> Vec<Point> {
    let (a0, a1) = match weight.pole.chart {
        0 => (weight.pole.z, Complex64::new(1.0, 0.0)),
        _ => (Complex64::new(1.0, 0.0), weight.pole.z),
    };
    k.samples(count)
        .into_iter()
        .map(|q| {
            // Inverse of the unitary map [z0 : z1] -> [a1 z0 - a0 z1 : ā0 z0 + ā1 z1].
            let (u0, u1) = (q.z, Complex64::new(1.0, 0.0));
            let n = a0.norm_sqr() + a1.norm_sqr();
            let z0 = (a1.conj() * u0 + a0 * u1) / n;
            let z1 = (-a0.conj() * u0 + a1 * u1) / n;
            if z1.norm() >= z0.norm() {
                Point::new(0, z0 / z1)
            } else {
                Point::new(1, z1 / z0)
            }
        })
        .collect()
}

fn singular_skoda(config: &ExperimentConfig) -> Result<Outcome> {
    let mut o = Outcome::default();
    let (w, _) = singular_weight(config)?;
    let points: Vec<Point> = annulus_points(&w, &PoleAnnulus { r0: 0.05, r1: 3.0 }, config.samples.unwrap_or(50));
    let reports = config.ks.par_iter().map(|&k| skoda_check(&w, k, &points)).collect::<Result<Vec<_>>>()?;
    let mut table = Curve::new("admissibility", &["k", "threshold", "m_k", "accepted", "max_relative_discrepancy"]);
    let mut worst = 0.0f64;
    let mut all_match = true;
    let mut truncated = false;
    for r in &reports {
        let threshold = r.admissible.first().map_or(f64::NAN, |&v| v as f64);
        table.push(vec![r.k as f64, threshold, r.admissible.len() as f64, r.accepted.len() as f64, r.max_relative_discrepancy]);
        worst = worst.max(r.max_relative_discrepancy);
        all_match &= r.thresholds_match;
        truncated |= r.truncation_warning;
    }
    let frames = config.ks.iter().map(|&k| MultiplierFrame::build(&w, k)).collect::<Result<Vec<_>>>()?;
    o.frame_hashes = multiplier_hashes(&w, &frames)?;
    o.constant("max_relative_discrepancy", worst);
    o.assertions.push(Assertion::at_most("skoda-identity", "P_{k,M∖Σ} = P_{k,I} off the pole", worst, config.tolerances.skoda));
    o.assertions.push(Assertion::holds("thresholds", "integrable orders are exactly v > kτ - 1", all_match));
    o.assertions.push(Assertion::holds("enumeration-window", "no candidate near the edge of the Laurent window is close to integrable", !truncated));
    o.curves = vec![table];
    Ok(o)
}

fn singular_big(config: &ExperimentConfig) -> Result<Outcome> {
    let mut o = Outcome::default();
    let (w, k) = singular_weight(config)?;
    let big = big_bound_check(&w, &config.ks, &k)?;
    let points = annulus_points(&w, &k, config.samples.unwrap_or(8));
    let exp = singular_expansion_check(&w, &config.ks, &points)?;
    let (frames, _) = multiplier_family(&w, &config.ks)?;
    o.frame_hashes = multiplier_hashes(&w, &frames)?;
    let mut curve = Curve::new("multiplier-integral", &["k", "integral", "dimension", "m_k"]);
    for i in 0..big.ks.len() {
        curve.push(vec![big.ks[i] as f64, big.integrals[i], big.dimensions[i] as f64, big.multiplier_dimensions[i] as f64]);
    }
    let mut fits = Curve::new("multiplier-expansion", &["point", "b0", "b1", "b2", "relative_deviation"]);
    for (i, f) in exp.fits.iter().enumerate() {
        let [b0, b1, b2] = f.coefficients;
        fits.push(vec![i as f64, b0, b1, b2, f.relative_deviation.unwrap_or(f64::NAN)]);
    }
    o.constant("exponent", big.exponent);
    o.constant("constant", big.constant);
    o.constant("leading_reference", exp.reference);
    o.constant("max_relative_deviation", exp.max_relative_deviation);
    o.constant("leading_reference_over_fs", exp.reference * 2.0 * PI);
    o.assertions.push(Assertion::holds("dimension-bound", "dim H^0(L^k) >= ∫_K P_{k,I} dv", big.inequality_holds));
    o.assertions.push(Assertion::at_most(
        "growth-exponent",
        "∫_K P_{k,I} dv grows like k^n",
        (big.exponent - 1.0).abs(),
        config.tolerances.exponent_window,
    ));
    o.assertions.push(Assertion::at_most(
        "leading-off-pole",
        "b0 equals (2π)^-1 det R^L of the smooth part",
        exp.max_relative_deviation,
        config.tolerances.singular_leading,
    ));
    o.curves = vec![curve, fits];
    Ok(o)
}
