//! Checkpoint directory: `config.json` (configuration snapshot and encoder
//! description), `weights.bin` (little-endian f64 tensors) and
//! `history.csv` (epoch, loss, accuracy, precision, recall, f1, lr).

use std::fs;
use std::io::Write;
use std::path::Path;

use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use super::{FemConfig, FemError, FemModel, FemNetwork, TrainHistory};
use crate::encoder::{EncoderSpec, TruncationPolicy};

const MAGIC: &[u8; 4] = b"FEMW";
const WEIGHTS_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointMeta {
    pub encoder: EncoderSpec,
    pub input_dim: usize,
    pub hidden_size: usize,
    pub dropout_rate: f64,
    pub truncation: TruncationPolicy,
    pub config: FemConfig,
    #[serde(default)]
    pub best_epoch: Option<usize>,
}

fn ck<E: std::fmt::Display>(context: &str) -> impl FnOnce(E) -> FemError + '_ {
    move |e| FemError::Checkpoint(format!("{context}: {e}"))
}

fn encode_weights(network: &FemNetwork) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&WEIGHTS_VERSION.to_le_bytes());
    out.extend_from_slice(&(network.input_dim() as u32).to_le_bytes());
    out.extend_from_slice(&(network.hidden_size() as u32).to_le_bytes());
    for tensor in network.params.tensors() {
        out.extend_from_slice(&(tensor.len() as u64).to_le_bytes());
        for v in tensor {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

fn decode_weights(bytes: &[u8], dropout_rate: f64) -> Result<FemNetwork, FemError> {
    let bad = |m: &str| FemError::Checkpoint(format!("weights.bin: {m}"));
    let mut pos = 0usize;
    let mut take = |n: usize| -> Result<&[u8], FemError> {
        let chunk = bytes.get(pos..pos + n).ok_or_else(|| bad("truncated"))?;
        pos += n;
        Ok(chunk)
    };
    if take(4)? != MAGIC {
        return Err(bad("bad magic"));
    }
    let u32_at = |b: &[u8]| u32::from_le_bytes(b.try_into().unwrap());
    if u32_at(take(4)?) != WEIGHTS_VERSION {
        return Err(bad("unsupported version"));
    }
    let input_dim = u32_at(take(4)?) as usize;
    let hidden = u32_at(take(4)?) as usize;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
    let mut network = FemNetwork::new(input_dim, hidden, dropout_rate, &mut rng);
    for tensor in network.params.tensors_mut() {
        let len = u64::from_le_bytes(take(8)?.try_into().unwrap()) as usize;
        if len != tensor.len() {
            return Err(bad("tensor size does not match header"));
        }
        for v in tensor.iter_mut() {
            *v = f64::from_le_bytes(take(8)?.try_into().unwrap());
        }
    }
    if take(1).is_ok() {
        return Err(bad("trailing bytes"));
    }
    Ok(network)
}

pub fn write_history_csv<W: Write>(history: &TrainHistory, writer: W) -> Result<(), FemError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["epoch", "loss", "accuracy", "precision", "recall", "f1", "lr"])
        .map_err(ck("history.csv"))?;
    for e in &history.epochs {
        w.write_record([
            e.epoch.to_string(),
            e.loss.to_string(),
            e.accuracy.to_string(),
            e.precision.to_string(),
            e.recall.to_string(),
            e.f1.to_string(),
            e.lr.to_string(),
        ])
        .map_err(ck("history.csv"))?;
    }
    w.flush().map_err(ck("history.csv"))
}

pub fn save_checkpoint(
    dir: impl AsRef<Path>,
    model: &FemModel,
    config: &FemConfig,
    history: &TrainHistory,
    best_epoch: Option<usize>,
) -> Result<(), FemError> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(ck("create checkpoint dir"))?;
    let meta = CheckpointMeta {
        encoder: model.encoder.spec(),
        input_dim: model.network.input_dim(),
        hidden_size: model.network.hidden_size(),
        dropout_rate: model.network.dropout_rate,
        truncation: model.truncation,
        config: config.clone(),
        best_epoch,
    };
    let json = serde_json::to_string_pretty(&meta).map_err(ck("config.json"))?;
    fs::write(dir.join("config.json"), json + "\n").map_err(ck("config.json"))?;
    fs::write(dir.join("weights.bin"), encode_weights(&model.network)).map_err(ck("weights.bin"))?;
    let file = fs::File::create(dir.join("history.csv")).map_err(ck("history.csv"))?;
    write_history_csv(history, file)
}

/// Rebuilds the model (including its encoder) from a checkpoint directory.
pub fn load_checkpoint(dir: impl AsRef<Path>) -> Result<(FemModel, CheckpointMeta), FemError> {
    let dir = dir.as_ref();
    let text = fs::read_to_string(dir.join("config.json")).map_err(ck("config.json"))?;
    let meta: CheckpointMeta = serde_json::from_str(&text).map_err(ck("config.json"))?;
    let bytes = fs::read(dir.join("weights.bin")).map_err(ck("weights.bin"))?;
    let network = decode_weights(&bytes, meta.dropout_rate)?;
    if network.input_dim() != meta.input_dim || network.hidden_size() != meta.hidden_size {
        return Err(FemError::Checkpoint("weights do not match config.json".into()));
    }
    let encoder = meta.encoder.build()?;
    if encoder.dim() != meta.input_dim {
        return Err(FemError::DimensionMismatch(format!(
            "encoder produces {} values, checkpoint expects {}",
            encoder.dim(),
            meta.input_dim
        )));
    }
    Ok((
        FemModel {
            encoder,
            network,
            truncation: meta.truncation,
        },
        meta,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoder::HashingEncoder;
    use crate::fem::EpochRecord;
    use std::sync::Arc;

    #[test]
    fn save_then_load_restores_weights() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = FemConfig::new(2);
        cfg.hidden_size = 3;
        let model = FemModel::init(Arc::new(HashingEncoder::new(6)), &cfg);
        let history = TrainHistory {
            epochs: vec![EpochRecord {
                epoch: 1,
                train_loss: 0.7,
                loss: 0.69,
                accuracy: 0.5,
                precision: 0.5,
                recall: 1.0,
                f1: 2.0 / 3.0,
                lr: 1e-5,
            }],
            lr_trace: vec![1e-5],
        };
        save_checkpoint(dir.path(), &model, &cfg, &history, Some(1)).unwrap();
        let (loaded, meta) = load_checkpoint(dir.path()).unwrap();
        assert_eq!(loaded.network, model.network);
        assert_eq!(meta.config, cfg);
        assert_eq!(meta.best_epoch, Some(1));
        let csv = fs::read_to_string(dir.path().join("history.csv")).unwrap();
        assert!(csv.starts_with("epoch,loss,accuracy,precision,recall,f1,lr\n1,0.69,"));
    }

    #[test]
    fn corrupted_weights_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = FemConfig {
            hidden_size: 2,
            ..FemConfig::new(1)
        };
        let model = FemModel::init(Arc::new(HashingEncoder::new(4)), &cfg);
        save_checkpoint(dir.path(), &model, &cfg, &TrainHistory::default(), None).unwrap();
        let path = dir.path().join("weights.bin");
        let mut bytes = fs::read(&path).unwrap();
        bytes.truncate(bytes.len() - 3);
        fs::write(&path, bytes).unwrap();
        assert!(matches!(load_checkpoint(dir.path()), Err(FemError::Checkpoint(_))));
    }
}
