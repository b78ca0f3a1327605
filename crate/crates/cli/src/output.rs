use std::fs;
use std::path::{Path, PathBuf};

use gdp_core::model::{DerivedConstants, ModelParameters, WaveParameters};
use gdp_core::profile::{integrate_profile, ProfileOptions, ProfileSolution};
use serde::{Deserialize, Serialize};

use crate::config::hex_digest;
use crate::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub struct OutDir {
    root: PathBuf,
}

fn io(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(root).map_err(|e| io(root, e))?;
        Ok(Self { root: root.to_path_buf() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn json<T: Serialize>(&self, name: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).expect("serialisable output");
        text.push('\n');
        write_atomic(&self.path(name), text.as_bytes())
    }

    pub fn csv<T: Serialize>(&self, name: &str, rows: impl IntoIterator<Item = T>) -> Result<(), CliError> {
        let path = self.path(name);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
        }
        let mut w = csv::Writer::from_path(&path).map_err(|e| io(&path, e))?;
        for row in rows {
            w.serialize(row).map_err(|e| io(&path, e))?;
        }
        w.flush().map_err(|e| io(&path, e))
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    }
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes).map_err(|e| io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| io(path, e))
}

#[derive(Serialize, Deserialize)]
struct CachedProfile {
    eta: Vec<f64>,
    omega: Vec<f64>,
}

/// Profile for one wave. Fresh integrations are rebuilt from their stored
/// samples too, so cached and uncached runs give identical numbers.
pub fn load_profile(
    cache: Option<&Path>,
    params: &ModelParameters,
    derived: &DerivedConstants,
    wave: &WaveParameters,
    opts: &ProfileOptions,
) -> Result<ProfileSolution, CliError> {
    let key = serde_json::to_string(&(VERSION, params, wave.amplitude, opts)).expect("serialisable key");
    let file = cache.map(|dir| dir.join(format!("profile-{}.json", &hex_digest(key.as_bytes())[..16])));
    if let Some(f) = &file {
        if let Ok(text) = fs::read_to_string(f) {
            if let Ok(c) = serde_json::from_str::<CachedProfile>(&text) {
                return Ok(ProfileSolution::from_samples(wave, derived, c.eta, c.omega)?);
            }
        }
    }
    let fresh = integrate_profile(wave, derived, opts)?;
    let c = CachedProfile { eta: fresh.eta_grid, omega: fresh.omega_values };
    if let Some(f) = &file {
        write_atomic(f, serde_json::to_string(&c).expect("serialisable profile").as_bytes())?;
    }
    Ok(ProfileSolution::from_samples(wave, derived, c.eta, c.omega)?)
}
