use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::weight::beta_exponents;
use crate::geometry::{gauss_legendre_on, QuadNode, QuadratureRule};
use num_complex::Complex64;

/// Innermost excluded radius around the pole (and, in `1 − t`, around the
/// antipode) for the standard graded mesh.
pub const POLE_CUTOFF: f64 = 1e-6;
/// Cutoff radius of the refined mesh.
pub const REFINED_CUTOFF: f64 = 1e-100;
pub const NODES_PER_SHELL: usize = 20;

/// Radial mesh in `t = |z|²/(1+|z|²)`: decade shells from `t_c = radius²`
/// up to `½`, mirrored in `1 − t`.
#[derive(Clone, Debug, PartialEq)]
pub struct GradedMesh {
    pub cutoff_t: f64,
    /// Shells adjacent to `t = 0`, innermost first, as `(t, w)` node lists.
    pub pole_shells: Vec<Vec<(f64, f64)>>,
    /// Shells adjacent to `t = 1`, innermost first, nodes given in `u = 1 − t`.
    pub antipode_shells: Vec<Vec<(f64, f64)>>,
}

impl GradedMesh {
    pub fn new(radius: f64, per_shell: usize) -> Self {
        let tc = radius * radius;
        let mut edges = vec![tc];
        while *edges.last().unwrap() * 10.0 < 0.5 {
            let e = *edges.last().unwrap() * 10.0;
            edges.push(e);
        }
        edges.push(0.5);
        let pole_shells: Vec<Vec<(f64, f64)>> =
            edges.windows(2).map(|e| gauss_legendre_on(per_shell, e[0], e[1])).collect();
        let antipode_shells = pole_shells.clone();
        Self { cutoff_t: tc, pole_shells, antipode_shells }
    }

    /// Chart-0 polar rule with `n_angles` equispaced angles.
    pub fn rule(&self, n_angles: usize) -> QuadratureRule {
        let dtheta = 2.0 * PI / n_angles as f64;
        let mut nodes = Vec::new();
        let mut push = |r: f64, area: f64| {
            for l in 0..n_angles {
                let z = Complex64::from_polar(r, dtheta * l as f64);
                nodes.push(QuadNode { chart: 0, z, weight: area });
            }
        };
        for &(t, w) in self.pole_shells.iter().flatten() {
            push((t / (1.0 - t)).sqrt(), 0.5 * w * dtheta / ((1.0 - t) * (1.0 - t)));
        }
        for &(u, w) in self.antipode_shells.iter().flatten() {
            push(((1.0 - u) / u).sqrt(), 0.5 * w * dtheta / (u * u));
        }
        QuadratureRule { id: format!("graded-{:e}", self.cutoff_t), order: n_angles, nodes }
    }
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY || m == f64::INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// `log ∫_shell t^a (1−t)^b dt`; antipode shells pass the exponents swapped.
fn log_shell_mass(shell: &[(f64, f64)], a: f64, b: f64) -> f64 {
    let terms: Vec<f64> = shell.iter().map(|&(t, w)| w.ln() + a * t.ln() + b * (-t).ln_1p()).collect();
    log_sum_exp(&terms)
}

/// Integrability verdict for one monomial candidate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateReport {
    pub order: i64,
    /// Mass of the innermost shell over the next one, at the pole and at the
    /// antipode. A ratio of at least 1 means the mass does not decay.
    pub pole_shell_ratio: f64,
    pub antipode_shell_ratio: f64,
    pub integrable: bool,
    /// `log ‖z^v‖²` on the standard and the refined mesh; the analytic inner
    /// tails are added only for integrable candidates.
    pub log_norm: f64,
    pub log_norm_refined: f64,
}

const DIVERGENCE_RATIO: f64 = 1.0 - 1e-9;

/// `log ∫ t^a (1−t)^b dt` over the mesh (plus tails when `with_tails`).
pub fn log_radial_integral(mesh: &GradedMesh, a: f64, b: f64, with_tails: bool) -> f64 {
    let mut logs: Vec<f64> = mesh.pole_shells.iter().map(|s| log_shell_mass(s, a, b)).collect();
    logs.extend(mesh.antipode_shells.iter().map(|s| log_shell_mass(s, b, a)));
    if with_tails {
        let tc = mesh.cutoff_t;
        logs.push((a + 1.0) * tc.ln() - (a + 1.0).ln());
        logs.push((b + 1.0) * tc.ln() - (b + 1.0).ln());
    }
    log_sum_exp(&logs)
}

/// Classifies `z^v` on the punctured sphere by the decay of its shell masses
/// towards the pole and towards the antipode.
pub fn classify_candidate(k: u32, m: u32, tau: f64, v: i64, mesh: &GradedMesh, refined: &GradedMesh) -> CandidateReport {
    let (a, b) = beta_exponents(k, m, tau, v);
    let ratio = |shells: &[Vec<(f64, f64)>], a: f64, b: f64| {
        (log_shell_mass(&shells[0], a, b) - log_shell_mass(&shells[1], a, b)).exp()
    };
    let pole_shell_ratio = ratio(&mesh.pole_shells, a, b);
    let antipode_shell_ratio = ratio(&mesh.antipode_shells, b, a);
    let integrable = pole_shell_ratio < DIVERGENCE_RATIO && antipode_shell_ratio < DIVERGENCE_RATIO;
    let scale = (2.0 * PI * m as f64).ln();
    CandidateReport {
        order: v,
        pole_shell_ratio,
        antipode_shell_ratio,
        integrable,
        log_norm: scale + log_radial_integral(mesh, a, b, integrable),
        log_norm_refined: scale + log_radial_integral(refined, a, b, integrable),
    }
}
