use std::path::Path;

use candle_core::{DType, Device, Tensor};
use candle_nn::VarBuilder;
use candle_transformers::models::bert::{BertModel, Config};
use tokenizers::Tokenizer as HfTokenizer;

use super::{EncoderError, EncoderSpec, SegmentEncoder, Tokenizer};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pooling {
    /// Representation at the sequence-start (`[CLS]`) position.
    SequenceStart,
    Mean,
}

/// Pretrained BERT-family encoder running inference on the CPU. Weights are
/// frozen.
pub struct TransformerEncoder {
    model: BertModel,
    tokenizer: HfTokenizer,
    name: String,
    dim: usize,
    max_tokens: usize,
    pooling: Pooling,
    cls_id: u32,
    sep_id: u32,
    unk_id: u32,
}

fn backend<E: std::fmt::Display>(e: E) -> EncoderError {
    EncoderError::Backend(e.to_string())
}

impl TransformerEncoder {
    /// Loads `config.json`, `model.safetensors` and `tokenizer.json` from `dir`.
    pub fn load(dir: &Path, name: &str, pooling: Pooling, max_tokens: usize) -> Result<Self, EncoderError> {
        let config_text = std::fs::read_to_string(dir.join("config.json"))
            .map_err(|e| EncoderError::Config(format!("{}: {e}", dir.display())))?;
        let config: Config = serde_json::from_str(&config_text).map_err(backend)?;
        let tokenizer = HfTokenizer::from_file(dir.join("tokenizer.json")).map_err(backend)?;
        let device = Device::Cpu;
        // SAFETY: the weights file is not modified while mapped.
        let vb = unsafe {
            VarBuilder::from_mmaped_safetensors(&[dir.join("model.safetensors")], DType::F32, &device)
                .map_err(backend)?
        };
        let model = BertModel::load(vb, &config).map_err(backend)?;
        Self::from_parts(model, tokenizer, &config, name, pooling, max_tokens)
    }

    pub fn from_parts(
        model: BertModel,
        tokenizer: HfTokenizer,
        config: &Config,
        name: &str,
        pooling: Pooling,
        max_tokens: usize,
    ) -> Result<Self, EncoderError> {
        let id = |t: &str| {
            tokenizer
                .token_to_id(t)
                .ok_or_else(|| EncoderError::Config(format!("tokenizer has no {t} token")))
        };
        let (cls_id, sep_id, unk_id) = (id("[CLS]")?, id("[SEP]")?, id("[UNK]")?);
        // Two positions are taken by [CLS] and [SEP].
        let limit = config.max_position_embeddings.saturating_sub(2);
        Ok(TransformerEncoder {
            model,
            tokenizer,
            name: name.to_string(),
            dim: config.hidden_size,
            max_tokens: max_tokens.min(limit).max(1),
            pooling,
            cls_id,
            sep_id,
            unk_id,
        })
    }
}

impl Tokenizer for TransformerEncoder {
    fn tokenize(&self, text: &str) -> Result<Vec<String>, EncoderError> {
        let encoding = self.tokenizer.encode(text, false).map_err(backend)?;
        Ok(encoding.get_tokens().to_vec())
    }
}

impl SegmentEncoder for TransformerEncoder {
    fn dim(&self) -> usize {
        self.dim
    }

    fn max_tokens(&self) -> usize {
        self.max_tokens
    }

    fn encode_tokens(&self, tokens: &[String]) -> Result<Vec<f64>, EncoderError> {
        let mut ids = Vec::with_capacity(tokens.len() + 2);
        ids.push(self.cls_id);
        ids.extend(
            tokens
                .iter()
                .map(|t| self.tokenizer.token_to_id(t).unwrap_or(self.unk_id)),
        );
        ids.push(self.sep_id);
        let n = ids.len();

        let device = &self.model.device;
        let input = Tensor::new(ids.as_slice(), device)
            .and_then(|t| t.unsqueeze(0))
            .map_err(backend)?;
        let types = input.zeros_like().map_err(backend)?;
        let hidden = self.model.forward(&input, &types, None).map_err(backend)?;
        let pooled = match self.pooling {
            Pooling::SequenceStart => hidden.get(0).and_then(|h| h.get(0)),
            Pooling::Mean => hidden.get(0).and_then(|h| h.sum(0)).and_then(|s| s / n as f64),
        }
        .map_err(backend)?;
        let values: Vec<f32> = pooled.to_vec1().map_err(backend)?;
        Ok(values.into_iter().map(f64::from).collect())
    }

    fn spec(&self) -> EncoderSpec {
        EncoderSpec::Transformer {
            model: self.name.clone(),
            mean_pooling: self.pooling == Pooling::Mean,
            max_tokens: self.max_tokens,
        }
    }
}
