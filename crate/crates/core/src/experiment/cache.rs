use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::asymptotics::FrameFamily;
use crate::error::{Error, Result};
use crate::geometry::{ModelGeometry, ModelSpec};
use crate::hilbert::BergmanFrame;

/// Environment variable naming the frame cache directory.
pub const CACHE_ENV: &str = "BERGMAN_CACHE_DIR";

const MANIFEST: &str = "manifest.json";

/// Short hex digest of a text.
pub(crate) fn digest(text: &str) -> String {
    Sha256::digest(text.as_bytes()).iter().take(12).map(|b| format!("{b:02x}")).collect()
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
struct Manifest {
    /// Model hash to model description.
    models: BTreeMap<String, ModelSpec>,
    /// Frame file name to the digest of its contents.
    frames: BTreeMap<String, String>,
}

/// Directory of portable frame files keyed by (model hash, k, resolution).
/// Each key is written once; a file whose digest disagrees with the
/// manifest is purged and rebuilt.
#[derive(Clone, Debug)]
pub struct FrameCache {
    dir: PathBuf,
}

enum Lookup {
    Hit(BergmanFrame, String),
    Miss,
    Corrupt(String),
}

impl FrameCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    /// `$BERGMAN_CACHE_DIR`, or `.bergman-cache` in the working directory.
    pub fn from_env() -> Self {
        Self::new(std::env::var_os(CACHE_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from(".bergman-cache")))
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn key(spec: &ModelSpec, k: u32) -> String {
        let res = spec.resolution.map_or_else(|| "auto".to_string(), |r| format!("r{r}"));
        format!("{}-k{k}-{res}.json", spec.hash())
    }

    fn manifest(&self, warnings: &mut Vec<String>) -> Manifest {
        let path = self.dir.join(MANIFEST);
        match fs::read_to_string(&path) {
            Err(_) => Manifest::default(),
            Ok(text) => serde_json::from_str(&text).unwrap_or_else(|e| {
                warnings.push(format!("unreadable cache manifest ({e}); rebuilding the cache"));
                Manifest::default()
            }),
        }
    }

    fn lookup(&self, manifest: &Manifest, spec: &ModelSpec, k: u32) -> Lookup {
        let name = Self::key(spec, k);
        let Ok(text) = fs::read_to_string(self.dir.join(&name)) else {
            return Lookup::Miss;
        };
        let d = digest(&text);
        if manifest.frames.get(&name) != Some(&d) {
            return Lookup::Corrupt(format!("cached frame {name} does not match the manifest; rebuilt"));
        }
        match BergmanFrame::from_json(&text) {
            Ok(f) if f.k() == k => Lookup::Hit(f, d),
            Ok(_) => Lookup::Corrupt(format!("cached frame {name} holds the wrong k; rebuilt")),
            Err(e) => Lookup::Corrupt(format!("cached frame {name} is unreadable ({e}); rebuilt")),
        }
    }

    fn write_atomic(&self, name: &str, text: &str) -> Result<()> {
        let tmp = self.dir.join(format!("{name}.tmp"));
        fs::write(&tmp, text)?;
        fs::rename(&tmp, self.dir.join(name))?;
        Ok(())
    }

    /// Frames for every `k`, loaded when cached and built otherwise, with
    /// the digests of their portable encodings and any repair warnings.
    pub fn family(&self, spec: &ModelSpec, ks: &[u32]) -> Result<(FrameFamily, Vec<String>, Vec<String>)> {
        let geometry = ModelGeometry::from_spec(spec)?;
        fs::create_dir_all(&self.dir)?;
        let mut warnings = Vec::new();
        let mut manifest = self.manifest(&mut warnings);
        let found: Vec<(u32, Lookup)> = ks.par_iter().map(|&k| (k, self.lookup(&manifest, spec, k))).collect();
        for (_, l) in &found {
            if let Lookup::Corrupt(w) = l {
                warnings.push(w.clone());
            }
        }
        let built: Vec<(BergmanFrame, String, bool)> = found
            .into_par_iter()
            .map(|(k, l)| match l {
                Lookup::Hit(f, d) => Ok((f, d, false)),
                Lookup::Miss | Lookup::Corrupt(_) => {
                    let f = BergmanFrame::build_with(&geometry, k, crate::hilbert::GramMode::Auto, spec.resolution)?;
                    let text = f.to_json(spec)?;
                    Ok((f, text, true))
                }
            })
            .collect::<Result<_>>()?;
        let mut frames = Vec::with_capacity(built.len());
        let mut digests = Vec::with_capacity(built.len());
        let mut dirty = false;
        for (frame, text_or_digest, fresh) in built {
            let d = if fresh {
                let name = Self::key(spec, frame.k());
                self.write_atomic(&name, &text_or_digest)?;
                let d = digest(&text_or_digest);
                manifest.frames.insert(name, d.clone());
                dirty = true;
                d
            } else {
                text_or_digest
            };
            digests.push(d);
            frames.push(frame);
        }
        if dirty || !manifest.models.contains_key(&spec.hash()) {
            manifest.models.insert(spec.hash(), spec.clone());
            self.write_atomic(MANIFEST, &serde_json::to_string_pretty(&manifest)?)?;
        }
        Ok((FrameFamily::from_frames(frames)?, digests, warnings))
    }

    /// Removes every cached frame and the manifest; returns the number of
    /// files removed.
    pub fn clean(&self) -> Result<usize> {
        let entries = match fs::read_dir(&self.dir) {
            Ok(e) => e,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(0),
            Err(e) => return Err(Error::Io(e)),
        };
        let mut removed = 0;
        for entry in entries {
            let path = entry?.path();
            let is_cache_file = path.extension().is_some_and(|e| e == "json" || e == "tmp");
            if path.is_file() && is_cache_file {
                fs::remove_file(&path)?;
                removed += 1;
            }
        }
        Ok(removed)
    }
}
