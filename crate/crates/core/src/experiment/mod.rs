//! Experiment configs, the catalog, the runner and the acceptance suite.

mod cache;
mod output;
mod runners;
mod suite;
#[cfg(test)]
mod tests;

pub use cache::{FrameCache, CACHE_ENV};
pub use output::{format17, write_outputs, Curve};
pub use runners::{run, run_in, sample_points};
pub use suite::{criterion, verify_all, CriterionResult, Profile, SuiteReport, CRITERIA};

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geometry::{ModelSpec, Point};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentId {
    Expansion,
    Phase,
    Decay,
    Gap,
    Peaks,
    Immersion,
    Injectivity,
    SingularSkoda,
    SingularBig,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 9] = [
        Self::Expansion,
        Self::Phase,
        Self::Decay,
        Self::Gap,
        Self::Peaks,
        Self::Immersion,
        Self::Injectivity,
        Self::SingularSkoda,
        Self::SingularBig,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Expansion => "expansion",
            Self::Phase => "phase",
            Self::Decay => "decay",
            Self::Gap => "gap",
            Self::Peaks => "peaks",
            Self::Immersion => "immersion",
            Self::Injectivity => "injectivity",
            Self::SingularSkoda => "singular-skoda",
            Self::SingularBig => "singular-big",
        }
    }

    pub fn summary(&self) -> &'static str {
        match self {
            Self::Expansion => "fit P_k(x) = b0 k + b1 + b2/k and compare b0 with (2π)^-1 det R^L",
            Self::Phase => "Im Ψ from the decay of the normalized off-diagonal kernel against λ|z-w|^2",
            Self::Decay => "sup of the kernel between disjoint supports as k grows",
            Self::Gap => "small spectral gap ‖(I-P_k)u‖ <= C k^N ‖∂̄u‖ on a disc or an annulus",
            Self::Peaks => "peak sections: inequality families and the limit value at the base point",
            Self::Immersion => "rank of the differential of the Kodaira map",
            Self::Injectivity => "separation of points by the Kodaira map and the near-diagonal curvature test",
            Self::SingularSkoda => "L^2 sections on the punctured sphere against the multiplier space",
            Self::SingularBig => "leading term off the pole and the dimension bound for the multiplier kernel",
        }
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment `{s}`")))
    }
}

/// One catalog line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub id: ExperimentId,
    pub summary: String,
    pub default_model: ModelSpec,
    pub default_ks: Vec<u32>,
}

pub fn list_experiments() -> Vec<CatalogEntry> {
    ExperimentId::ALL
        .iter()
        .map(|&id| {
            let c = ExperimentConfig::default_for(id);
            CatalogEntry { id, summary: id.summary().into(), default_model: c.model, default_ks: c.ks }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Relative error of the fitted leading coefficient.
    #[serde(default = "tol::leading")]
    pub leading: f64,
    #[serde(default = "tol::phase")]
    pub phase: f64,
    /// Orders of magnitude the off-diagonal sup must lose over the sweep.
    #[serde(default = "tol::decay_orders")]
    pub decay_orders: f64,
    /// Residual of the log-log fit of the gap ratio.
    #[serde(default = "tol::gap_residual")]
    pub gap_residual: f64,
    #[serde(default = "tol::peak_limit")]
    pub peak_limit: f64,
    #[serde(default = "tol::skoda")]
    pub skoda: f64,
    #[serde(default = "tol::singular_leading")]
    pub singular_leading: f64,
    /// Half width of the window around 1 for the growth exponent.
    #[serde(default = "tol::exponent_window")]
    pub exponent_window: f64,
}

mod tol {
    pub fn leading() -> f64 {
        0.02
    }
    pub fn phase() -> f64 {
        0.15
    }
    pub fn decay_orders() -> f64 {
        6.0
    }
    pub fn gap_residual() -> f64 {
        0.2
    }
    pub fn peak_limit() -> f64 {
        0.1
    }
    pub fn skoda() -> f64 {
        1e-9
    }
    pub fn singular_leading() -> f64 {
        0.03
    }
    pub fn exponent_window() -> f64 {
        0.1
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            leading: tol::leading(),
            phase: tol::phase(),
            decay_orders: tol::decay_orders(),
            gap_residual: tol::gap_residual(),
            peak_limit: tol::peak_limit(),
            skoda: tol::skoda(),
            singular_leading: tol::singular_leading(),
            exponent_window: tol::exponent_window(),
        }
    }
}

impl Tolerances {
    fn values(&self) -> [(&'static str, f64); 8] {
        [
            ("leading", self.leading),
            ("phase", self.phase),
            ("decay_orders", self.decay_orders),
            ("gap_residual", self.gap_residual),
            ("peak_limit", self.peak_limit),
            ("skoda", self.skoda),
            ("singular_leading", self.singular_leading),
            ("exponent_window", self.exponent_window),
        ]
    }
}

/// Pole data for the singular experiments.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SingularSpec {
    pub tau: f64,
    /// Chart-0 coordinate of the pole.
    #[serde(default)]
    pub pole: [f64; 2],
    /// Radii `r0 < r1` of the annulus `K` around the pole, in model coordinates.
    #[serde(default = "default_annulus")]
    pub annulus: [f64; 2],
}

fn default_annulus() -> [f64; 2] {
    [0.3, 1.0]
}

impl SingularSpec {
    pub fn pole_point(&self) -> Point {
        Point::chart0(self.pole[0], self.pole[1])
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentId,
    pub model: ModelSpec,
    pub ks: Vec<u32>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub seed: u64,
    /// Directory receiving the JSON summary and the curve files.
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Size of the worker pool; the machine's parallelism when absent.
    #[serde(default)]
    pub workers: Option<usize>,
    /// Number of sample points or pairs; experiment default when absent.
    #[serde(default)]
    pub samples: Option<usize>,
    #[serde(default)]
    pub singular: Option<SingularSpec>,
}

fn range(k0: u32, k1: u32, step: u32) -> Vec<u32> {
    (k0..=k1).step_by(step as usize).collect()
}

impl ExperimentConfig {
    /// The configuration the catalog ships for an experiment.
    pub fn default_for(id: ExperimentId) -> Self {
        let sphere = ModelSpec::sphere();
        let (model, ks, singular) = match id {
            ExperimentId::Expansion => (sphere, range(8, 48, 4), None),
            ExperimentId::Phase => (ModelSpec { theta_scale: 0.5, ..sphere }, range(16, 64, 8), None),
            ExperimentId::Decay => (sphere, range(8, 40, 4), None),
            ExperimentId::Gap => (sphere, range(8, 32, 8), None),
            ExperimentId::Peaks => (sphere, vec![16, 24, 32, 48], None),
            ExperimentId::Immersion => (sphere, vec![2, 4, 8, 16], None),
            ExperimentId::Injectivity => (sphere, vec![2, 4, 8, 16], None),
            ExperimentId::SingularSkoda => (sphere, range(1, 16, 1), Some(SingularSpec { tau: 0.5, pole: [0.0; 2], annulus: default_annulus() })),
            ExperimentId::SingularBig => (sphere, range(8, 48, 4), Some(SingularSpec { tau: 0.5, pole: [0.0; 2], annulus: default_annulus() })),
        };
        Self {
            experiment: id,
            model,
            ks,
            tolerances: Tolerances::default(),
            seed: 0,
            output: None,
            workers: None,
            samples: None,
            singular,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let c: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.ks.is_empty() || self.ks[0] == 0 || self.ks.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config(format!("k-list {:?} must be positive and strictly increasing", self.ks)));
        }
        for (name, v) in self.tolerances.values() {
            if !(v > 0.0) {
                return Err(Error::Config(format!("tolerance `{name}` must be positive")));
            }
        }
        if self.workers == Some(0) {
            return Err(Error::Config("worker count must be positive".into()));
        }
        let singular = matches!(self.experiment, ExperimentId::SingularSkoda | ExperimentId::SingularBig);
        if singular && self.singular.is_none() {
            return Err(Error::Config(format!("`{}` needs a [singular] table", self.experiment)));
        }
        if let Some(s) = &self.singular {
            if !(s.annulus[0] > 0.0 && s.annulus[1] > s.annulus[0]) {
                return Err(Error::Config(format!("invalid annulus {:?}", s.annulus)));
            }
        }
        Ok(())
    }

    /// Applies `key=value` with a dotted key; the value is read as a TOML
    /// value and falls back to a string.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (key, raw) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override `{assignment}` is not key=value")))?;
        let value = match toml::from_str::<toml::Table>(&format!("v = {}", raw.trim())) {
            Ok(mut t) => t.remove("v").expect("parsed key"),
            Err(_) => toml::Value::String(raw.trim().to_string()),
        };
        let mut root = toml::Value::try_from(&*self).map_err(|e| Error::Config(e.to_string()))?;
        let mut node = &mut root;
        let parts: Vec<&str> = key.trim().split('.').collect();
        for (i, part) in parts.iter().enumerate() {
            let table = node
                .as_table_mut()
                .ok_or_else(|| Error::Config(format!("`{key}` does not name a table entry")))?;
            if i + 1 == parts.len() {
                table.insert(part.to_string(), value.clone());
                break;
            }
            node = table.entry(part.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        }
        let updated: Self = root.try_into().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        updated.validate()?;
        *self = updated;
        Ok(())
    }
}

/// One checked assertion; `invariant` names the property it certifies.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub name: String,
    pub invariant: String,
    pub passed: bool,
    pub measured: f64,
    pub bound: f64,
}

impl Assertion {
    pub fn at_most(name: &str, invariant: &str, measured: f64, bound: f64) -> Self {
        Self { name: name.into(), invariant: invariant.into(), passed: measured <= bound, measured, bound }
    }

    pub fn at_least(name: &str, invariant: &str, measured: f64, bound: f64) -> Self {
        Self { name: name.into(), invariant: invariant.into(), passed: measured >= bound, measured, bound }
    }

    pub fn holds(name: &str, invariant: &str, passed: bool) -> Self {
        let v = if passed { 1.0 } else { 0.0 };
        Self { name: name.into(), invariant: invariant.into(), passed, measured: v, bound: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub model_hash: String,
    /// Digest of each frame's portable encoding, in the order of `config.ks`.
    pub frame_hashes: Vec<String>,
    pub constants: BTreeMap<String, f64>,
    pub assertions: Vec<Assertion>,
    pub curves: Vec<Curve>,
    /// Cache repairs and other non-fatal events.
    pub warnings: Vec<String>,
    pub wall_time_s: f64,
}

impl ExperimentReport {
    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.passed)
    }

    /// The report without timing, for reproducibility comparisons.
    pub fn without_timing(&self) -> Self {
        Self { wall_time_s: 0.0, warnings: Vec::new(), ..self.clone() }
    }
}
