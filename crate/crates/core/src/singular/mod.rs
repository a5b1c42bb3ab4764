//! A singular metric on the sphere with one logarithmic pole: multiplier
//! Bergman kernels and the sections that extend across the pole.
//!
//! The square-integrable sections over the punctured sphere are enumerated
//! from Laurent monomials `z^v` with `−3 ≤ v ≤ km + 3`. Outside this window
//! the weighted norm diverges by a power of `|z|` at the pole or at the
//! antipode, so no integrable candidate is lost.

mod integrability;
mod kernel;
mod weight;
#[cfg(test)]
mod tests;

pub use integrability::{
    classify_candidate, log_radial_integral, CandidateReport, GradedMesh, NODES_PER_SHELL, POLE_CUTOFF, REFINED_CUTOFF,
};
pub use kernel::{
    big_bound_check, multiplier_family, multiplier_kernel, singular_expansion_check, skoda_check, BigBoundReport,
    MultiplierFrame, PoleAnnulus, SingularExpansionReport, SkodaReport, POLE_CLEARANCE,
};
pub use weight::{admissible_orders, beta_exponents, SingularWeight};
