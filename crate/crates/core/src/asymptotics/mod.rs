//! Large-`k` behaviour of Bergman kernels: expansion coefficients, phase,
//! off-diagonal decay and the spectral gap of ∂̄.

mod decay;
mod expansion;
mod gap;
mod phase;
#[cfg(test)]
mod tests;

pub use decay::{offdiagonal_decay, DecayReport, Support};
pub use expansion::{fit_expansion, fit_expansion_at, fit_power_law, ExpansionFit, LinearFit};
pub use gap::{gap_estimate, gap_ratio_parts, GapEstimate, GapRegion, TestSection};
pub use phase::{extract_phase, PhaseProbe, UNDERFLOW_FLOOR};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::ModelGeometry;
use crate::hilbert::BergmanFrame;

/// Frames of one model for several powers `k`, in increasing order of `k`.
#[derive(Clone, Debug)]
pub struct FrameFamily {
    pub frames: Vec<BergmanFrame>,
}

impl FrameFamily {
    /// Builds the frames in parallel; the order of `ks` is preserved.
    pub fn build(geometry: &ModelGeometry, ks: &[u32]) -> Result<Self> {
        let mut ks = ks.to_vec();
        ks.sort_unstable();
        ks.dedup();
        let frames = ks
            .par_iter()
            .map(|&k| BergmanFrame::build(geometry, k))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { frames })
    }

    pub fn from_frames(mut frames: Vec<BergmanFrame>) -> Result<Self> {
        frames.sort_by_key(|f| f.k());
        if frames.windows(2).any(|w| w[0].k() == w[1].k()) {
            return Err(Error::Config("repeated k in frame family".into()));
        }
        Ok(Self { frames })
    }

    pub fn ks(&self) -> Vec<u32> {
        self.frames.iter().map(|f| f.k()).collect()
    }

    pub fn geometry(&self) -> Option<&ModelGeometry> {
        self.frames.first().map(|f| f.geometry())
    }
}

/// `k_0, k_0 + step, …, k_1`.
pub fn k_range(k0: u32, k1: u32, step: u32) -> Vec<u32> {
    (k0..=k1).step_by(step.max(1) as usize).collect()
}
