//! Gram assembly and orthonormalization.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use super::basis::WeightedSectionBasis;
use crate::error::{Error, Result};
use crate::geometry::{Point, QuadratureRule};

/// Largest condition number accepted before orthonormalizing.
pub const CONDITION_CAP: f64 = 1e12;

const CHUNK: usize = 512;

/// `G_ij = Σ_n w_n b̃_i(x_n) conj(b̃_j(x_n))` with volume weights `w_n`.
///
/// Nodes are split into fixed chunks whose partial sums are added in order,
/// so the result does not depend on the number of worker threads.
pub fn assemble_gram(basis: &WeightedSectionBasis, rule: &QuadratureRule) -> Result<DMatrix<Complex64>> {
    let n = basis.len();
    let weights = basis.geometry.volume_weights(rule);
    let partials: Vec<Result<DMatrix<Complex64>>> = rule
        .nodes
        .par_chunks(CHUNK)
        .zip(weights.par_chunks(CHUNK))
        .map(|(nodes, ws)| {
            let mut g = DMatrix::<Complex64>::zeros(n, n);
            let mut v = vec![Complex64::new(0.0, 0.0); n];
            for (node, &w) in nodes.iter().zip(ws) {
                basis.eval_weighted(&Point::new(node.chart, node.z), &mut v)?;
                for j in 0..n {
                    let cj = v[j].conj() * w;
                    for i in 0..n {
                        g[(i, j)] += v[i] * cj;
                    }
                }
            }
            Ok(g)
        })
        .collect();
    let mut g = DMatrix::<Complex64>::zeros(n, n);
    for p in partials {
        g += p?;
    }
    if g.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::Numerics("non-finite Gram entry".into()));
    }
    Ok(hermitian_part(&g))
}

pub fn hermitian_part(g: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    (g + g.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Ratio of extreme eigenvalues of a Hermitian matrix (infinite if singular).
pub fn condition_number(g: &DMatrix<Complex64>) -> f64 {
    if g.is_empty() {
        return 1.0;
    }
    let ev = g.clone().symmetric_eigenvalues();
    let max = ev.iter().cloned().fold(f64::MIN, f64::max);
    let min = ev.iter().cloned().fold(f64::MAX, f64::min);
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Cholesky factor `G = L L*` with positive diagonal. Pivots that collapse
/// relative to the largest diagonal entry are reported as a rank error.
pub fn cholesky_lower(g: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    let n = g.nrows();
    let scale = (0..n).map(|i| g[(i, i)].re).fold(0.0, f64::max);
    let tol = 1e-13 * scale.max(f64::MIN_POSITIVE);
    let mut l = DMatrix::<Complex64>::zeros(n, n);
    let mut deficient = Vec::new();
    for j in 0..n {
        let mut d = g[(j, j)].re;
        for m in 0..j {
            d -= l[(j, m)].norm_sqr();
        }
        if !(d > tol) {
            deficient.push(j);
            continue;
        }
        let djj = d.sqrt();
        l[(j, j)] = Complex64::new(djj, 0.0);
        for i in (j + 1)..n {
            let mut s = g[(i, j)];
            for m in 0..j {
                s -= l[(i, m)] * l[(j, m)].conj();
            }
            l[(i, j)] = s / djj;
        }
    }
    if deficient.is_empty() {
        Ok(l)
    } else {
        Err(Error::Rank(deficient))
    }
}

/// Inverse of a lower-triangular matrix with nonzero diagonal.
pub fn invert_lower(l: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let n = l.nrows();
    let mut c = DMatrix::<Complex64>::zeros(n, n);
    for j in 0..n {
        c[(j, j)] = l[(j, j)].inv();
        for i in (j + 1)..n {
            let mut s = Complex64::new(0.0, 0.0);
            for m in j..i {
                s += l[(i, m)] * c[(m, j)];
            }
            c[(i, j)] = -s / l[(i, i)];
        }
    }
    c
}

/// Lower-triangular `C` with `C G C* = I`, after checking conditioning.
pub fn orthonormalize(g: &DMatrix<Complex64>) -> Result<(DMatrix<Complex64>, f64)> {
    let g = hermitian_part(g);
    let l = cholesky_lower(&g)?;
    let cond = condition_number(&g);
    if !(cond <= CONDITION_CAP) {
        return Err(Error::IllConditioned { condition: cond, cap: CONDITION_CAP });
    }
    Ok((invert_lower(&l), cond))
}
