use std::path::{Path, PathBuf};

use hardyliou::occupation::{Trajectory, DEFAULT_MARGIN};
use hardyliou::HardyError;
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: HardyError },
}

/// A trajectory loaded from CSV with the SHA-256 digest of the file bytes.
#[derive(Debug)]
pub struct Ingested {
    pub trajectory: Trajectory,
    pub digest: String,
}

pub fn ingest_trajectory(path: &Path) -> Result<Ingested, IngestError> {
    let bytes = std::fs::read(path).map_err(|source| IngestError::Read {
        path: path.to_owned(),
        source,
    })?;
    let trajectory = Trajectory::read_csv(bytes.as_slice(), DEFAULT_MARGIN).map_err(|source| {
        IngestError::Parse {
            path: path.to_owned(),
            source,
        }
    })?;
    Ok(Ingested {
        trajectory,
        digest: hex::encode(Sha256::digest(&bytes)),
    })
}

pub fn ingest_trajectories(paths: &[PathBuf]) -> Result<Vec<Ingested>, IngestError> {
    paths.iter().map(|p| ingest_trajectory(p)).collect()
}
