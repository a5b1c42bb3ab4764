use serde::{Deserialize, Serialize};

use crate::geometry::gauss_legendre_on;

fn psi(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-1.0 / x).exp()
    }
}

fn dpsi(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        psi(x) / (x * x)
    }
}

/// Smooth step `S(x) = ψ(x) / (ψ(x) + ψ(1 − x))` with `ψ(x) = e^{−1/x}`.
pub fn smoothstep(x: f64) -> f64 {
    let (a, b) = (psi(x), psi(1.0 - x));
    a / (a + b)
}

pub fn smoothstep_derivative(x: f64) -> f64 {
    let (a, b) = (psi(x), psi(1.0 - x));
    let (da, db) = (dpsi(x), -dpsi(1.0 - x));
    (da * b - a * db) / ((a + b) * (a + b))
}

/// Even cutoff equal to 1 on `[−inner, inner]` and supported in `[−outer, outer]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutoffProfile {
    pub inner: f64,
    pub outer: f64,
}

impl Default for CutoffProfile {
    fn default() -> Self {
        Self { inner: 0.5, outer: 1.0 }
    }
}

impl CutoffProfile {
    pub fn new(inner: f64, outer: f64) -> crate::Result<Self> {
        if !(0.0 < inner && inner < outer) {
            return Err(crate::Error::Config(format!("cutoff needs 0 < inner < outer, got {inner}, {outer}")));
        }
        Ok(Self { inner, outer })
    }

    pub fn value(&self, t: f64) -> f64 {
        let a = t.abs();
        if a <= self.inner {
            1.0
        } else if a >= self.outer {
            0.0
        } else {
            smoothstep((self.outer - a) / (self.outer - self.inner))
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        let a = t.abs();
        if a <= self.inner || a >= self.outer {
            return 0.0;
        }
        let w = self.outer - self.inner;
        -t.signum() * smoothstep_derivative((self.outer - a) / w) / w
    }

    /// Composite Gauss–Legendre nodes on `[−outer, outer]`, split at the
    /// plateau edges where the profile is not analytic.
    pub fn nodes(&self, per_piece: usize) -> Vec<(f64, f64)> {
        let (a, b) = (self.inner, self.outer);
        let mut out = gauss_legendre_on(per_piece, -b, -a);
        out.extend(gauss_legendre_on(per_piece, -a, a));
        out.extend(gauss_legendre_on(per_piece, a, b));
        out
    }

    /// `∫ e^{−λt²} χ(t) dt`.
    pub fn gaussian_integral(&self, lambda: f64) -> f64 {
        self.nodes(40).iter().map(|&(t, w)| w * (-lambda * t * t).exp() * self.value(t)).sum()
    }

    /// `∫ χ(t) dt`.
    pub fn integral(&self) -> f64 {
        self.gaussian_integral(0.0)
    }
}
