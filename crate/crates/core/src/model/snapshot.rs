//! Versioned model snapshot files.
//!
//! ```text
//! AQUASERIES-LSTM-v1\n
//! <compact JSON manifest>\n
//! <param_count little-endian f64 values>
//! ```

use serde::{Deserialize, Serialize};

use super::{LstmModel, ModelError, Standardizer, TrainConfig};

pub const SNAPSHOT_MAGIC: &str = "AQUASERIES-LSTM-v1";

/// Largest dimension accepted when decoding untrusted snapshots.
const MAX_DIM: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnapshotManifest {
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub dropout_rate: f64,
    pub seed: u64,
    pub config: TrainConfig,
    pub feature_names: Vec<String>,
    pub feature_scaling: Standardizer,
    pub target_scaling: Standardizer,
    pub param_count: usize,
    pub blocks: Vec<(String, usize)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelSnapshot {
    pub manifest: SnapshotManifest,
    pub model: LstmModel,
}

impl ModelSnapshot {
    pub fn new(
        model: LstmModel,
        config: TrainConfig,
        feature_names: Vec<String>,
        feature_scaling: Standardizer,
        target_scaling: Standardizer,
    ) -> Self {
        let manifest = SnapshotManifest {
            input_dim: model.input_dim(),
            hidden_dim: model.hidden_dim(),
            dropout_rate: model.dropout_rate(),
            seed: config.seed,
            config,
            feature_names,
            feature_scaling,
            target_scaling,
            param_count: model.params().len(),
            blocks: model.blocks().into_iter().map(|(n, r)| (n, r.len())).collect(),
        };
        ModelSnapshot { manifest, model }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.model.params().len() * 8 + 1024);
        out.extend_from_slice(SNAPSHOT_MAGIC.as_bytes());
        out.push(b'\n');
        out.extend(serde_json::to_vec(&self.manifest).expect("manifest serializes"));
        out.push(b'\n');
        for p in self.model.params() {
            out.extend_from_slice(&p.to_le_bytes());
        }
        out
    }

    /// Decodes and validates a snapshot. Never panics on malformed input.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self, ModelError> {
        let bad = |m: &str| ModelError::Snapshot(m.to_string());
        let rest = bytes
            .strip_prefix(SNAPSHOT_MAGIC.as_bytes())
            .and_then(|r| r.strip_prefix(b"\n"))
            .ok_or_else(|| bad("missing AQUASERIES-LSTM-v1 header"))?;
        let newline = rest.iter().position(|&b| b == b'\n').ok_or_else(|| bad("unterminated manifest"))?;
        let manifest: SnapshotManifest =
            serde_json::from_slice(&rest[..newline]).map_err(|e| ModelError::Snapshot(e.to_string()))?;
        let body = &rest[newline + 1..];

        let (i, h) = (manifest.input_dim, manifest.hidden_dim);
        if i == 0 || h == 0 || i > MAX_DIM || h > MAX_DIM {
            return Err(bad("dimensions out of range"));
        }
        let count = LstmModel::checked_param_count(i, h).ok_or_else(|| bad("dimensions overflow"))?;
        if manifest.param_count != count {
            return Err(bad("param_count does not match dimensions"));
        }
        if count.checked_mul(8) != Some(body.len()) {
            return Err(bad("weight section length does not match param_count"));
        }
        if manifest.feature_names.len() != i
            || manifest.feature_scaling.mean.len() != i
            || manifest.feature_scaling.std.len() != i
            || manifest.target_scaling.mean.len() != 1
            || manifest.target_scaling.std.len() != 1
        {
            return Err(bad("feature metadata does not match input_dim"));
        }
        let params: Vec<f64> = body
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect();
        if params.iter().any(|p| !p.is_finite()) {
            return Err(bad("non-finite weight"));
        }
        let model = LstmModel::from_params(i, h, manifest.dropout_rate, params)?;
        let expected_blocks: Vec<(String, usize)> = model.blocks().into_iter().map(|(n, r)| (n, r.len())).collect();
        if manifest.blocks != expected_blocks {
            return Err(bad("block layout mismatch"));
        }
        Ok(ModelSnapshot { manifest, model })
    }
}
