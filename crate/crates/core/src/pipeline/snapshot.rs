//! Trained-model snapshots.
//!
//! JSON with shortest round-trip float formatting, so a save/load cycle
//! reproduces every parameter bit-exactly.

use crate::error::{Error, Result};
use crate::model::{ModelParams, SpectralConfig};
use crate::scalar::Scalar;
use crate::spectral::Kernel;
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::Path;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound(
    serialize = "F: Scalar",
    deserialize = "F: Scalar"
))]
pub struct ModelSnapshot<F> {
    pub kernel: Kernel,
    pub spectral: SpectralConfig,
    pub params: ModelParams<F>,
}

pub fn snapshot_json<F: Scalar>(snapshot: &ModelSnapshot<F>) -> String {
    serde_json::to_string_pretty(snapshot).expect("snapshot serialize")
}

pub fn snapshot_from_json<F: Scalar>(text: &str) -> Result<ModelSnapshot<F>> {
    let snapshot: ModelSnapshot<F> = serde_json::from_str(text)
        .map_err(|e| Error::invalid(format!("corrupt model snapshot: {e}")))?;
    snapshot.params.check_consistent()?;
    Ok(snapshot)
}

pub fn save_snapshot<F: Scalar>(path: &Path, snapshot: &ModelSnapshot<F>) -> Result<()> {
    fs::write(path, snapshot_json(snapshot)).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_snapshot<F: Scalar>(path: &Path) -> Result<ModelSnapshot<F>> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    snapshot_from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{init_params, ModelGeometry};
    use crate::rng::RngStreams;

    #[test]
    fn snapshot_round_trips_bit_exactly() {
        let geometry = ModelGeometry {
            n_nodes: 5,
            scale_count: 2,
            hidden_widths: vec![6, 3],
            n_classes: 2,
            biases: false,
        };
        let params =
            init_params::<f64>(&geometry, 2.5, &mut RngStreams::new(17).stream("init")).unwrap();
        let snapshot = ModelSnapshot {
            kernel: Kernel::SxExp,
            spectral: SpectralConfig::default(),
            params,
        };
        let text = snapshot_json(&snapshot);
        let back: ModelSnapshot<f64> = snapshot_from_json(&text).unwrap();
        assert_eq!(back.params, snapshot.params);
    }

    #[test]
    fn corrupt_snapshot_rejected() {
        assert!(snapshot_from_json::<f64>("{\"not\": \"a snapshot\"}").is_err());
    }
}
