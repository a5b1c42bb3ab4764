//! The Kodaira map into projective space: immersion and injectivity.

mod projective;
mod separation;

pub use projective::{
    immersion_check, kodaira_map, ImmersionCertificate, ProjectivePoint, BASE_POINT_FLOOR, RANK_TOLERANCE,
};
pub use separation::{
    base_point_sweep, curvature_diagnostic, embedding_threshold, injectivity_scan, sample_pairs, separation_probe,
    CurvatureReport, PairResult, SamplePair, ScanReport, SeparationProbe, Stratum, COLLISION_TOLERANCE,
};
