use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::hilbert::BergmanFrame;

/// `P_k(x)` below this counts as a base point.
pub const BASE_POINT_FLOOR: f64 = 1e-280;

/// Unit homogeneous coordinates whose first nonzero entry is real positive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectivePoint {
    pub coords: Vec<Complex64>,
}

impl ProjectivePoint {
    pub fn normalize(coords: &[Complex64]) -> Result<Self> {
        let lead = coords
            .iter()
            .find(|c| c.norm() > 0.0)
            .ok_or_else(|| Error::BasePoint("zero coordinate vector".into()))?;
        let norm = coords.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if lead.im == 0.0 && lead.re > 0.0 && (norm - 1.0).abs() <= 4.0 * f64::EPSILON {
            return Ok(Self { coords: coords.to_vec() });
        }
        let phase = lead.conj() / lead.norm();
        let scaled: Vec<Complex64> = coords.iter().map(|c| c * phase).collect();
        let norm = scaled.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let mut out: Vec<Complex64> = scaled.iter().map(|c| c / norm).collect();
        // The leading entry is real by construction; drop rounding residue.
        if let Some(l) = out.iter_mut().find(|c| c.norm() > 0.0) {
            l.im = 0.0;
        }
        Ok(Self { coords: out })
    }

    pub fn inner(&self, other: &Self) -> Complex64 {
        self.coords.iter().zip(&other.coords).map(|(a, b)| a * b.conj()).sum()
    }

    /// Fubini–Study distance `arccos |⟨u, v⟩|`, evaluated as an angle between
    /// `|⟨u, v⟩|` and the length of the orthogonal remainder.
    pub fn distance(&self, other: &Self) -> f64 {
        let ip = other.inner(self);
        let rem: f64 = self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (b - ip * a).norm_sqr())
            .sum::<f64>()
            .sqrt();
        rem.atan2(ip.norm())
    }
}

/// `Φ_k(x) = [f_1(x) : … : f_{d_k}(x)]`.
pub fn kodaira_map(frame: &BergmanFrame, x: &Point) -> Result<ProjectivePoint> {
    let c = frame.eval(x)?;
    let p: f64 = c.iter().map(|v| v.norm_sqr()).sum();
    if !(p >= BASE_POINT_FLOOR) {
        return Err(Error::BasePoint(format!("{x:?} (P_k = {p:e})")));
    }
    ProjectivePoint::normalize(&c)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImmersionCertificate {
    pub point: Point,
    pub k: u32,
    /// Index of the coordinate the affine chart divides by.
    pub pivot: Option<usize>,
    /// Singular values of the real Jacobian of the affine chart.
    pub singular_values: Vec<f64>,
    pub min_singular_value: f64,
    /// Smallest singular value of the differential measured in the
    /// Fubini–Study metric.
    pub fs_min_singular_value: f64,
    pub full_rank: bool,
}

pub const RANK_TOLERANCE: f64 = 1e-8;
const STEP: f64 = 1e-4;

fn richardson<F: Fn(f64) -> Result<Vec<Complex64>>>(f: F) -> Result<Vec<Complex64>> {
    let d = |h: f64| -> Result<Vec<Complex64>> {
        let (a, b) = (f(h)?, f(-h)?);
        Ok(a.iter().zip(&b).map(|(x, y)| (x - y) / (2.0 * h)).collect())
    };
    let (d1, d2) = (d(STEP)?, d(STEP / 2.0)?);
    Ok(d1.iter().zip(&d2).map(|(a, b)| (b * 4.0 - a) / 3.0).collect())
}

fn real_singular_values(cols: &[Vec<Complex64>]) -> Vec<f64> {
    let rows = cols.first().map_or(0, |c| 2 * c.len());
    if rows == 0 {
        return vec![];
    }
    let m = DMatrix::from_fn(rows, cols.len(), |i, j| {
        let c = cols[j][i / 2];
        if i % 2 == 0 {
            c.re
        } else {
            c.im
        }
    });
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Rank of the differential of `Φ_k` at `x`, from central differences with
/// one Richardson step.
pub fn immersion_check(frame: &BergmanFrame, x: &Point) -> Result<ImmersionCertificate> {
    let c0 = frame.eval(x)?;
    let p: f64 = c0.iter().map(|v| v.norm_sqr()).sum();
    if !(p >= BASE_POINT_FLOOR) {
        return Err(Error::BasePoint(format!("{x:?}")));
    }
    let d = c0.len();
    let at = |dz: Complex64| frame.eval(&Point::new(x.chart, x.z + dz));
    let dirs = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)];

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| c0[b].norm().total_cmp(&c0[a].norm()));
    let mut affine = None;
    for &pivot in &order {
        let chart = |dz: Complex64| -> Result<Vec<Complex64>> {
            let c = at(dz)?;
            if c[pivot].norm() == 0.0 {
                return Err(Error::Numerics("pivot vanished".into()));
            }
            Ok((0..d).filter(|&j| j != pivot).map(|j| c[j] / c[pivot]).collect())
        };
        let cols: Result<Vec<Vec<Complex64>>> = dirs.iter().map(|&e| richardson(|h| chart(e * h))).collect();
        if let Ok(cols) = cols {
            if cols.iter().flatten().all(|v| v.re.is_finite() && v.im.is_finite()) {
                affine = Some((pivot, cols));
                break;
            }
        }
    }
    let (pivot, cols) = affine.ok_or_else(|| Error::Numerics(format!("no usable affine chart at {x:?}")))?;
    let singular_values = real_singular_values(&cols);

    // Fubini–Study speed: derivative of the unit representative with the
    // component along the point itself removed.
    let norm = p.sqrt();
    let u: Vec<Complex64> = c0.iter().map(|c| c / norm).collect();
    let fs_cols: Vec<Vec<Complex64>> = dirs
        .iter()
        .map(|&e| {
            let dc = richardson(|h| at(e * h))?;
            let dv: Vec<Complex64> = dc.iter().map(|c| c / norm).collect();
            let ip: Complex64 = dv.iter().zip(&u).map(|(a, b)| a * b.conj()).sum();
            Ok(dv.iter().zip(&u).map(|(a, b)| a - ip * b).collect())
        })
        .collect::<Result<_>>()?;
    let fs = real_singular_values(&fs_cols);

    let smax = singular_values.first().copied().unwrap_or(0.0);
    let min_singular_value = if singular_values.len() == 2 { singular_values[1] } else { 0.0 };
    let full_rank = singular_values.len() == 2 && min_singular_value > RANK_TOLERANCE * smax;
    Ok(ImmersionCertificate {
        point: *x,
        k: frame.k(),
        pivot: Some(pivot).filter(|_| d > 1),
        singular_values,
        min_singular_value,
        fs_min_singular_value: if fs.len() >= 2 { fs[1] } else { 0.0 },
        full_rank,
    })
}
