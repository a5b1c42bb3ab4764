//! Peak sections concentrated at a point and the estimates they satisfy.

mod cutoff;
mod lemmas;
mod section;

pub use cutoff::{smoothstep, smoothstep_derivative, CutoffProfile};
pub use lemmas::{
    measure_point, peak_limit, peak_limit_without_gaussian, verify_peak_lemmas, InequalityFamily, LemmaReport,
    PeakMeasurement, REGION_RADIUS,
};
pub use section::{directional_peak_section, peak_section, PeakContext, PeakKind, PeakSection, MAX_SUPPORT_RADIUS};
