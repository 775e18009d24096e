//! Path dumps: raw little-endian `f64` samples plus a JSON sidecar.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{GaussianPath, Method, GENERATOR};
use crate::covariance::CovarianceModel;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSidecar {
    pub n: usize,
    pub seed: u64,
    pub method: Method,
    pub generator: String,
    #[serde(flatten)]
    pub model: CovarianceModel,
}

fn sidecar_path(bin: &Path) -> PathBuf {
    let mut p = bin.as_os_str().to_owned();
    p.push(".json");
    PathBuf::from(p)
}

/// Writes `path.samples` to `bin` and the sidecar to `bin` + `.json`.
pub fn write_path(path: &GaussianPath, bin: &Path) -> Result<()> {
    let bytes: Vec<u8> = path.samples.iter().flat_map(|x| x.to_le_bytes()).collect();
    fs::write(bin, bytes)?;
    let sidecar = PathSidecar {
        n: path.len(),
        seed: path.seed,
        method: path.method,
        generator: GENERATOR.to_string(),
        model: path.model.clone(),
    };
    fs::write(sidecar_path(bin), serde_json::to_string_pretty(&sidecar)? + "\n")?;
    Ok(())
}

pub fn read_path(bin: &Path) -> Result<GaussianPath> {
    let sidecar: PathSidecar = serde_json::from_slice(&fs::read(sidecar_path(bin))?)?;
    let bytes = fs::read(bin)?;
    if bytes.len() != 8 * sidecar.n {
        return Err(Error::Io(format!(
            "{}: expected {} bytes, found {}",
            bin.display(),
            8 * sidecar.n,
            bytes.len()
        )));
    }
    let samples = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    Ok(GaussianPath { samples, model: sidecar.model, seed: sidecar.seed, method: sidecar.method })
}
