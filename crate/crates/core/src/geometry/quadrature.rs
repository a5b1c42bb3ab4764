use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// One quadrature node; `weight` integrates Lebesgue measure in the chart.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadNode {
    pub chart: usize,
    pub z: Complex64,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    pub id: String,
    pub order: usize,
    pub nodes: Vec<QuadNode>,
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` (Newton on the three-term
/// recurrence).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut t = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, t);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * t * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 0 { 1.0 } else if n == 1 { t } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (t * p - pm1) / (t * t - 1.0);
            let dt = p / dp;
            t -= dt;
            if dt.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -t;
        x[n - 1 - i] = t;
        let wi = 2.0 / ((1.0 - t * t) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Gauss–Legendre rule mapped to `[a, b]`.
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(n);
    let h = 0.5 * (b - a);
    x.iter().zip(&w).map(|(&xi, &wi)| (a + h * (xi + 1.0), h * wi)).collect()
}

impl QuadratureRule {
    /// Chart-0 rule for the sphere: `t = |z|²/(1+|z|²)` is integrated by
    /// Gauss–Legendre with `resolution` nodes and the angle by `2·resolution`
    /// equispaced nodes. Exact for `|z|^{2j}(1+|z|²)^{−k−2}` whenever
    /// `k < 2·resolution`.
    pub fn sphere(resolution: usize) -> Self {
        let nt = 2 * resolution;
        let radial = gauss_legendre_on(resolution, 0.0, 1.0);
        Self::polar_t(&format!("sphere-gl{resolution}"), resolution, &radial, nt)
    }

    /// Polar rule in the variable `t = r²/(1+r²)` from explicit radial nodes.
    pub fn polar_t(id: &str, order: usize, radial: &[(f64, f64)], n_angles: usize) -> Self {
        let dtheta = 2.0 * PI / n_angles as f64;
        let mut nodes = Vec::with_capacity(radial.len() * n_angles);
        for &(t, wt) in radial {
            let r = (t / (1.0 - t)).sqrt();
            let area = 0.5 * wt * dtheta / ((1.0 - t) * (1.0 - t));
            for l in 0..n_angles {
                let th = dtheta * l as f64;
                nodes.push(QuadNode { chart: 0, z: Complex64::from_polar(r, th), weight: area });
            }
        }
        Self { id: id.to_string(), order, nodes }
    }

    /// Uniform `n × n` grid on the unit fundamental domain of the torus.
    pub fn torus(n: usize) -> Self {
        let h = 1.0 / n as f64;
        let mut nodes = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                nodes.push(QuadNode {
                    chart: 0,
                    z: Complex64::new(i as f64 * h, j as f64 * h),
                    weight: h * h,
                });
            }
        }
        Self { id: format!("torus-grid{n}"), order: n, nodes }
    }

    /// Polar Gauss–Legendre rule on a disc `|z − c| < radius` of one chart.
    pub fn disc(chart: usize, center: Complex64, radius: f64, n_r: usize, n_theta: usize) -> Self {
        let dtheta = 2.0 * PI / n_theta as f64;
        let mut nodes = Vec::with_capacity(n_r * n_theta);
        for (r, wr) in gauss_legendre_on(n_r, 0.0, radius) {
            for l in 0..n_theta {
                let th = dtheta * (l as f64 + 0.5);
                nodes.push(QuadNode {
                    chart,
                    z: center + Complex64::from_polar(r, th),
                    weight: wr * r * dtheta,
                });
            }
        }
        Self { id: format!("disc-{n_r}x{n_theta}"), order: n_r, nodes }
    }

    /// Polar rule on the annulus `r0 < |z − c| < r1`.
    pub fn annulus(chart: usize, center: Complex64, r0: f64, r1: f64, n_r: usize, n_theta: usize) -> Self {
        let dtheta = 2.0 * PI / n_theta as f64;
        let mut nodes = Vec::with_capacity(n_r * n_theta);
        for (r, wr) in gauss_legendre_on(n_r, r0, r1) {
            for l in 0..n_theta {
                let th = dtheta * (l as f64 + 0.5);
                nodes.push(QuadNode {
                    chart,
                    z: center + Complex64::from_polar(r, th),
                    weight: wr * r * dtheta,
                });
            }
        }
        Self { id: format!("annulus-{n_r}x{n_theta}"), order: n_r, nodes }
    }

    pub fn integrate<F: Fn(&QuadNode) -> f64>(&self, f: F) -> f64 {
        self.nodes.iter().map(|n| n.weight * f(n)).sum()
    }
}
