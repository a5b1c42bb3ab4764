//! Spaces of holomorphic sections, Gram matrices and Bergman kernels.

mod basis;
mod frame;
mod gram;
mod projection;
#[cfg(test)]
mod tests;

pub use basis::{closed_form_log_norm_sq, ln_beta, BasisKind, WeightedSectionBasis};
pub use frame::{BergmanFrame, GramMode, GramPath, KernelValue, LocalizedKernel};
pub use gram::{
    assemble_gram, cholesky_lower, condition_number, hermitian_part, invert_lower, orthonormalize, CONDITION_CAP,
};
pub use projection::{dbar_apply, dbar_norm, dbar_weighted, weighted_from_frame, weighted_norm_sq, REFINEMENT_TOLERANCE};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ModelGeometry, ModelSpec};

/// Frame coefficients in a platform-independent text form.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PortableFrame {
    pub model: ModelSpec,
    pub model_hash: String,
    pub k: u32,
    pub path: GramPath,
    pub rule_id: String,
    pub condition: f64,
    pub size: usize,
    /// Row-major `[re, im]` pairs written with 17 significant digits.
    pub coeffs: Vec<[String; 2]>,
}

fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

impl BergmanFrame {
    pub fn to_portable(&self, model: &ModelSpec) -> PortableFrame {
        let n = self.len();
        let mut coeffs = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let c = self.coeffs[(i, j)];
                coeffs.push([fmt17(c.re), fmt17(c.im)]);
            }
        }
        PortableFrame {
            model: model.clone(),
            model_hash: model.hash(),
            k: self.k(),
            path: self.path,
            rule_id: self.rule_id.clone(),
            condition: self.condition,
            size: n,
            coeffs,
        }
    }

    pub fn to_json(&self, model: &ModelSpec) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_portable(model))?)
    }

    pub fn from_portable(p: &PortableFrame) -> Result<Self> {
        if p.model.hash() != p.model_hash {
            return Err(Error::Config("frame file does not match its model hash".into()));
        }
        let geometry = ModelGeometry::from_spec(&p.model)?;
        let basis = WeightedSectionBasis::standard(&geometry, p.k)?;
        if basis.len() != p.size || p.coeffs.len() != p.size * p.size {
            return Err(Error::Config("frame file has the wrong size".into()));
        }
        let parse = |s: &str| s.parse::<f64>().map_err(|e| Error::Config(format!("bad coefficient {s}: {e}")));
        let mut coeffs = DMatrix::zeros(p.size, p.size);
        for (idx, [re, im]) in p.coeffs.iter().enumerate() {
            coeffs[(idx / p.size, idx % p.size)] = Complex64::new(parse(re)?, parse(im)?);
        }
        Ok(Self { basis, coeffs, path: p.path, rule_id: p.rule_id.clone(), condition: p.condition })
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_portable(&serde_json::from_str(s)?)
    }
}
