//! Run configuration: one TOML file, overridable by command-line flags.
//!
//! ```toml
//! schema_version = 1
//! seed = 7
//! output = "runs/water"
//!
//! [data]
//! corpus = "data/water.jsonl"
//!
//! [split]
//! train_fraction = 0.8
//! val_fraction = 0.1
//! test_fraction = 0.1
//!
//! [encoder]
//! backend = "hashing"
//! dim = 64
//!
//! [fem]
//! hidden_size = 32
//! epochs = 40
//!
//! [augmentation]
//! frames = ["political", "semantic", "economic", "human-interest"]
//! cache_dir = "cache/completions"
//! ```
//!
//! Relative paths in the file are resolved against the file's directory.

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use femkit::augmentation::AugmentSettings;
use femkit::corpus::SplitSpec;
use femkit::encoder::EncoderSpec;
use femkit::fem::FemConfig;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ClientKind {
    Mock,
    Http,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataPaths {
    /// Articles (JSONL) fed to `augment`.
    pub articles: Option<PathBuf>,
    /// Corpus split into train/validation/test with `[split]`.
    pub corpus: Option<PathBuf>,
    /// Explicit splits; take precedence over `corpus`.
    pub train: Option<PathBuf>,
    pub val: Option<PathBuf>,
    pub test: Option<PathBuf>,
    pub checkpoint: Option<PathBuf>,
}

impl DataPaths {
    fn resolve(&mut self, base: &Path) {
        for p in [
            &mut self.articles,
            &mut self.corpus,
            &mut self.train,
            &mut self.val,
            &mut self.test,
            &mut self.checkpoint,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }

    fn check_exist(&self) -> Result<(), CliError> {
        for p in [
            &self.articles,
            &self.corpus,
            &self.train,
            &self.val,
            &self.test,
            &self.checkpoint,
        ]
        .into_iter()
        .flatten()
        {
            if !p.exists() {
                return Err(CliError::usage(format!("input path {} does not exist", p.display())));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct AugmentExtras {
    cache_dir: Option<PathBuf>,
    prompts_dir: Option<PathBuf>,
    review_fraction: Option<f64>,
    client: Option<ClientKind>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    schema_version: Option<u32>,
    seed: Option<u64>,
    output: Option<PathBuf>,
    #[serde(default)]
    fixtures: bool,
    #[serde(default)]
    data: DataPaths,
    split: Option<toml::Table>,
    encoder: Option<EncoderSpec>,
    fem: Option<toml::Table>,
    augmentation: Option<toml::Table>,
}

/// Fully resolved configuration for one command.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub schema_version: u32,
    pub seed: u64,
    pub output: PathBuf,
    pub fixtures: bool,
    pub data: DataPaths,
    pub split: SplitSpec,
    pub encoder: EncoderSpec,
    pub fem: FemConfig,
    pub augmentation: AugmentSettings,
    pub cache_dir: Option<PathBuf>,
    pub prompts_dir: Option<PathBuf>,
    pub review_fraction: Option<f64>,
    pub client: ClientKind,
}

/// Command-line values that override the file.
#[derive(Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
    pub client: Option<ClientKind>,
    pub data: DataPaths,
    pub default_output: PathBuf,
}

/// Applies `user` keys over the serialized `base`, then deserializes.
fn overlay<T: Serialize + DeserializeOwned>(base: &T, user: Option<toml::Table>, section: &str) -> Result<T, CliError> {
    let mut table = toml::Table::try_from(base).map_err(|e| CliError::internal(format!("[{section}]: {e}")))?;
    if let Some(user) = user {
        if user.contains_key("seed") {
            return Err(CliError::usage(format!(
                "[{section}] must not set seed; use the top-level seed"
            )));
        }
        table.extend(user);
    }
    T::deserialize(toml::Value::Table(table)).map_err(|e| CliError::usage(format!("[{section}]: {e}")))
}

fn read_file(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::usage(format!("config {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::usage(format!("config {}: {e}", path.display())))
}

impl RunConfig {
    pub fn load(path: Option<&Path>, overrides: Overrides) -> Result<RunConfig, CliError> {
        let (mut file, base) = match path {
            Some(p) => (read_file(p)?, p.parent().map(Path::to_path_buf).unwrap_or_default()),
            None => (FileConfig::default(), PathBuf::new()),
        };
        let version = file.schema_version.unwrap_or(SCHEMA_VERSION);
        if version != SCHEMA_VERSION {
            return Err(CliError::usage(format!(
                "config schema_version {version} is not supported"
            )));
        }
        file.data.resolve(&base);
        let resolve = |p: PathBuf| if p.is_relative() { base.join(p) } else { p };

        let seed = overrides
            .seed
            .or(file.seed)
            .ok_or_else(|| CliError::usage("a seed is required (--seed or `seed` in the config)"))?;

        let mut data = file.data;
        let o = overrides.data;
        // Data named on the command line replaces the file's choice of
        // single corpus versus explicit splits.
        if o.corpus.is_some() && o.train.is_none() {
            data.train = None;
            data.val = None;
            data.test = None;
        } else if o.train.is_some() {
            data.corpus = None;
        }
        data.articles = o.articles.or(data.articles);
        data.corpus = o.corpus.or(data.corpus);
        data.train = o.train.or(data.train);
        data.val = o.val.or(data.val);
        data.test = o.test.or(data.test);
        data.checkpoint = o.checkpoint.or(data.checkpoint);
        data.check_exist()?;

        let split = overlay(&SplitSpec::new(seed), file.split, "split")?;
        split.validate()?;
        let fem = overlay(&FemConfig::new(seed), file.fem, "fem")?;
        fem.validate()?;

        let aug_table = file.augmentation.unwrap_or_default();
        let extras: AugmentExtras = {
            let mut t = toml::Table::new();
            for key in ["cache_dir", "prompts_dir", "review_fraction", "client"] {
                if let Some(v) = aug_table.get(key) {
                    t.insert(key.into(), v.clone());
                }
            }
            AugmentExtras::deserialize(toml::Value::Table(t))
                .map_err(|e| CliError::usage(format!("[augmentation]: {e}")))?
        };
        let settings_table: toml::Table = aug_table
            .into_iter()
            .filter(|(k, _)| !matches!(k.as_str(), "cache_dir" | "prompts_dir" | "review_fraction" | "client"))
            .collect();
        let mut augmentation = overlay(&AugmentSettings::default(), Some(settings_table), "augmentation")?;
        augmentation.seed = seed;
        augmentation.validate()?;

        Ok(RunConfig {
            schema_version: version,
            seed,
            output: overrides
                .output
                .or(file.output.map(&resolve))
                .unwrap_or(overrides.default_output),
            fixtures: file.fixtures,
            data,
            split,
            encoder: file.encoder.unwrap_or(EncoderSpec::Hashing {
                dim: 64,
                max_tokens: 512,
            }),
            fem,
            augmentation,
            cache_dir: extras.cache_dir.map(&resolve),
            prompts_dir: extras.prompts_dir.map(&resolve),
            review_fraction: extras.review_fraction,
            client: overrides.client.or(extras.client).unwrap_or(ClientKind::Mock),
        })
    }
}
