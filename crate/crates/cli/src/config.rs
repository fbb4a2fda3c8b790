//! Run configuration: one JSON document, every field overridable by a flag.

use std::path::{Path, PathBuf};

use incivility_core::features::TfidfConfig;
use incivility_core::incivility::{BinarizationRule, SplitConfig};
use incivility_core::linmodel::TrainConfig;
use incivility_core::subtext::SubtextConfig;
use incivility_core::synthetic::SyntheticConfig;
use serde::{Deserialize, Serialize};

use crate::error::{input, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub articles: Option<PathBuf>,
    pub comments: Option<PathBuf>,
    pub annotated: Option<PathBuf>,
    /// Per-article weights written by `score`; defaults to `<out>/article_weights.jsonl`.
    pub weights: Option<PathBuf>,
    /// Article labels for `evaluate`.
    pub labels: Option<PathBuf>,
    /// Where trained models are read from; defaults to `out_dir`.
    pub model_dir: Option<PathBuf>,
    pub out_dir: PathBuf,

    pub aspect_tfidf: TfidfConfig,
    pub article_tfidf: TfidfConfig,
    pub train: TrainConfig,
    pub split: SplitConfig,
    pub binarization: BinarizationRule,
    pub subtext: SubtextConfig,
    pub synthetic: SyntheticConfig,

    /// When non-empty, articles must mention one of these to be labelled.
    pub keywords: Vec<String>,
    pub tag: String,
    /// Restrict labelling to one source; all sources when unset.
    pub source: Option<String>,
    /// Seeded uniform sample of this many articles per source before labelling.
    pub sample_per_source: Option<usize>,
    pub sample_seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            articles: None,
            comments: None,
            annotated: None,
            weights: None,
            labels: None,
            model_dir: None,
            out_dir: PathBuf::from("out"),
            aspect_tfidf: TfidfConfig::aspect(),
            article_tfidf: TfidfConfig::article(),
            train: TrainConfig::default(),
            split: SplitConfig::default(),
            binarization: BinarizationRule::default(),
            subtext: SubtextConfig::default(),
            synthetic: SyntheticConfig::default(),
            keywords: Vec::new(),
            tag: "Immigration".into(),
            source: None,
            sample_per_source: None,
            sample_seed: 0,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| input(anyhow::anyhow!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| input(anyhow::anyhow!("{}: {e}", path.display())))
    }

    /// Point every seed at `seed`.
    pub fn set_seed(&mut self, seed: u64) {
        self.split.seed = seed;
        self.train.seed = seed;
        self.subtext.lda.seed = seed;
        self.synthetic.seed = seed;
        self.sample_seed = seed;
    }

    pub fn model_dir(&self) -> &Path {
        self.model_dir.as_deref().unwrap_or(&self.out_dir)
    }

    pub fn weights_path(&self) -> PathBuf {
        self.weights
            .clone()
            .unwrap_or_else(|| self.out_dir.join("article_weights.jsonl"))
    }
}

/// Resolve a required input path, failing if unset or missing.
pub fn require_input<'a>(path: &'a Option<PathBuf>, name: &str) -> CliResult<&'a Path> {
    let path = path
        .as_deref()
        .ok_or_else(|| input(anyhow::anyhow!("no {name} path configured (use --{name})")))?;
    if !path.exists() {
        return Err(input(anyhow::anyhow!(
            "{name} file not found: {}",
            path.display()
        )));
    }
    Ok(path)
}
