//! Conversation stance classifier over (source, reply) text pairs.
//!
//! Pair features are three L2-normalized TF-IDF blocks sharing one
//! vocabulary: `[reply | source | reply ⊙ source]`. The product block lets
//! a linear model react to terms the two texts share. `ReplyOnly` keeps
//! just the first block.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{ConversationPair, PairLabel};
use crate::error::{Error, Result};
use crate::textclf::{
    check_version, load_json, save_json, LinearModel, SparseVector, TrainConfig, Vocabulary, VocabularyConfig,
    MODEL_FORMAT_VERSION,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairMode {
    ReplyOnly,
    #[default]
    Pair,
}

impl std::str::FromStr for PairMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "reply_only" | "reply-only" | "reply" => Ok(PairMode::ReplyOnly),
            "pair" => Ok(PairMode::Pair),
            other => Err(Error::param(
                "mode",
                format!("expected reply_only or pair, got `{other}`"),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairFeaturizer {
    pub vocabulary: Vocabulary,
    pub mode: PairMode,
}

impl PairFeaturizer {
    /// Fits the shared vocabulary on the reply and source texts of `pairs`.
    pub fn fit(pairs: &[ConversationPair], mode: PairMode, config: &VocabularyConfig) -> Result<Self> {
        let texts: Vec<&str> = pairs
            .iter()
            .flat_map(|p| [p.reply_text.as_str(), p.source_text.as_str()])
            .collect();
        Ok(PairFeaturizer {
            vocabulary: Vocabulary::fit(&texts, config)?,
            mode,
        })
    }

    pub fn dim(&self) -> usize {
        match self.mode {
            PairMode::ReplyOnly => self.vocabulary.len(),
            PairMode::Pair => 3 * self.vocabulary.len(),
        }
    }

    pub fn featurize(&self, source_text: &str, reply_text: &str) -> SparseVector {
        let reply = self.vocabulary.transform(reply_text);
        if self.mode == PairMode::ReplyOnly {
            return reply;
        }
        let v = self.vocabulary.len() as u32;
        let source = self.vocabulary.transform(source_text);
        let source_at: std::collections::HashMap<u32, f64> = source.iter().collect();
        let product = SparseVector::from_pairs(
            reply
                .iter()
                .filter_map(|(i, x)| source_at.get(&i).map(|&y| (i, x * y)))
                .collect(),
        )
        .normalized();
        let mut pairs: Vec<(u32, f64)> = reply.iter().collect();
        pairs.extend(source.iter().map(|(i, x)| (v + i, x)));
        pairs.extend(product.iter().map(|(i, x)| (2 * v + i, x)));
        SparseVector::from_pairs(pairs)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMetadata {
    pub training_size: usize,
    pub favor_examples: usize,
    pub oppose_examples: usize,
    pub config_hash: String,
}

/// Anything that labels a (source, reply) pair; score > 0 means Favor.
pub trait PairClassifier {
    fn predict(&self, source_text: &str, reply_text: &str) -> (PairLabel, f64);
}

/// Builds a [`PairClassifier`] from labeled pairs.
pub trait PairTrainer {
    fn train(&self, pairs: &[ConversationPair]) -> Result<Box<dyn PairClassifier>>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConversationModel {
    pub version: u32,
    pub featurizer: PairFeaturizer,
    pub model: LinearModel,
    pub metadata: ModelMetadata,
}

impl ConversationModel {
    pub fn predict_conversation(&self, source_text: &str, reply_text: &str) -> (PairLabel, f64) {
        let score = self.model.score(&self.featurizer.featurize(source_text, reply_text));
        let label = if score > 0.0 {
            PairLabel::Favor
        } else {
            PairLabel::Oppose
        };
        (label, score)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        save_json(self, path)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut model: ConversationModel = load_json(path)?;
        check_version(model.version, path)?;
        model.featurizer.vocabulary.rebuild_index();
        Ok(model)
    }
}

impl PairClassifier for ConversationModel {
    fn predict(&self, source_text: &str, reply_text: &str) -> (PairLabel, f64) {
        self.predict_conversation(source_text, reply_text)
    }
}

/// Trains on the Favor/Oppose pairs of `pairs` (Unknown labels are
/// ignored), weighting examples by inverse class frequency.
pub fn train_conversation_model(
    pairs: &[ConversationPair],
    mode: PairMode,
    vocab_config: &VocabularyConfig,
    train_config: TrainConfig,
) -> Result<ConversationModel> {
    let labeled: Vec<ConversationPair> = pairs
        .iter()
        .filter(|p| p.label != PairLabel::Unknown)
        .cloned()
        .collect();
    if labeled.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let favor = labeled.iter().filter(|p| p.label == PairLabel::Favor).count();
    let oppose = labeled.len() - favor;
    if favor == 0 {
        return Err(Error::SingleClass("oppose"));
    }
    if oppose == 0 {
        return Err(Error::SingleClass("favor"));
    }
    let featurizer = PairFeaturizer::fit(&labeled, mode, vocab_config)?;
    let features: Vec<SparseVector> = labeled
        .iter()
        .map(|p| featurizer.featurize(&p.source_text, &p.reply_text))
        .collect();
    let positive: Vec<bool> = labeled.iter().map(|p| p.label == PairLabel::Favor).collect();
    let config = TrainConfig {
        balance_classes: true,
        ..train_config
    };
    let model = LinearModel::train(&features, &positive, featurizer.dim(), config)?;
    let hash_input = serde_json::to_string(&(mode, vocab_config, config)).expect("config serializes");
    let config_hash = hex::encode(&Sha256::digest(hash_input.as_bytes())[..8]);
    Ok(ConversationModel {
        version: MODEL_FORMAT_VERSION,
        featurizer,
        model,
        metadata: ModelMetadata {
            training_size: labeled.len(),
            favor_examples: favor,
            oppose_examples: oppose,
            config_hash,
        },
    })
}

/// The linear pair model as a [`PairTrainer`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LinearPairTrainer {
    pub mode: PairMode,
    pub vocabulary: VocabularyConfig,
    pub train: TrainConfig,
}

impl PairTrainer for LinearPairTrainer {
    fn train(&self, pairs: &[ConversationPair]) -> Result<Box<dyn PairClassifier>> {
        let model = train_conversation_model(pairs, self.mode, &self.vocabulary, self.train)?;
        Ok(Box::new(model))
    }
}
