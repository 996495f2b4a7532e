//! Versioned JSON checkpoint of a chain, including the RNG state.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Chain, ChainState, SseHamiltonian};
use crate::error::{Error, Result};
use crate::lattice::Lattice;

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub manifest_sha256: Option<String>,
    pub state: ChainState,
}

impl Checkpoint {
    pub fn of(chain: &Chain, manifest_sha256: Option<String>) -> Self {
        Self {
            version: CHECKPOINT_VERSION,
            manifest_sha256,
            state: chain.state.clone(),
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_vec(self)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let ck: Checkpoint = serde_json::from_slice(&std::fs::read(path)?)?;
        if ck.version != CHECKPOINT_VERSION {
            return Err(Error::Checkpoint(format!(
                "unsupported checkpoint version {} (expected {CHECKPOINT_VERSION})",
                ck.version
            )));
        }
        Ok(ck)
    }

    /// Rebuild the chain; the Hamiltonian and lattice come from the manifest.
    pub fn resume(self, ham: SseHamiltonian, lat: Option<Lattice>) -> Result<Chain> {
        Chain::restore(ham, lat, self.state)
    }
}
