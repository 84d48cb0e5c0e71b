//! Browser bindings over the synthetic generator and the core stages.
//! Every call returns JSON so the page can stay plain JavaScript.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use serde_json::json;
use stance_core::convclf::{train_conversation_model, ConversationModel, PairMode};
use stance_core::corpus::{extract_conversations, ConversationPair, PairLabel};
use stance_core::cotrain::{cotrain, CoTrainConfig, CoTrainOutput};
use stance_core::eval::{entity_stance_report, evaluate_pairs, majority_baseline_f1};
use stance_core::graph::{
    build_user_domain_matrix, build_user_hashtag_matrix, build_user_mention_matrix, build_user_retweet_matrix,
    union_matrices, BipartiteMatrix,
};
use stance_core::synth::{generate_synthetic_corpus, SynthConfig, SyntheticCorpus};
use stance_core::textclf::{TrainConfig, VocabularyConfig};
use stance_core::weaklabel::label_conversations;
use stance_core::Result;
use wasm_bindgen::prelude::*;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct DemoSettings {
    pub users: usize,
    pub polarity: f64,
    pub seed: u64,
    /// Shared by the three co-training thresholds.
    pub theta: f64,
    pub mix_k: f64,
    pub iterations: usize,
}

impl Default for DemoSettings {
    fn default() -> Self {
        DemoSettings {
            users: 200,
            polarity: 0.8,
            seed: 7,
            theta: 0.7,
            mix_k: 0.2,
            iterations: 5,
        }
    }
}

pub struct Demo {
    synthetic: SyntheticCorpus,
    interactions: BipartiteMatrix,
    output: CoTrainOutput,
    model: Option<ConversationModel>,
}

impl Demo {
    /// Generates a corpus and co-trains on it.
    pub fn new(settings: &DemoSettings) -> Result<Self> {
        let synthetic = generate_synthetic_corpus(&SynthConfig {
            n_users: settings.users,
            polarity: settings.polarity,
            seed: settings.seed,
            ..SynthConfig::default()
        })?;
        let corpus = &synthetic.corpus;
        let h = build_user_hashtag_matrix(corpus, 250, &synthetic.seeds.hashtags())?;
        let interactions = union_matrices(&h, &build_user_retweet_matrix(corpus, 1000)?);
        let config = CoTrainConfig {
            theta_u: settings.theta,
            theta_h: settings.theta,
            theta_t: settings.theta,
            mix_k: settings.mix_k,
            max_iterations: settings.iterations,
            ..CoTrainConfig::default()
        };
        let output = cotrain(
            corpus,
            &interactions,
            &synthetic.seeds,
            &config,
            Some(&synthetic.user_stance),
        )?;
        Ok(Demo {
            synthetic,
            interactions,
            output,
            model: None,
        })
    }

    pub fn history(&self) -> serde_json::Value {
        json!({
            "users": self.synthetic.user_stance.len(),
            "tweets": self.synthetic.corpus.len(),
            "converged": self.output.converged,
            "history": self.output.history,
        })
    }

    /// Entities whose users lean one way by at least `theta_i`.
    pub fn entities(&self, theta_i: f64, top_n: usize) -> Result<serde_json::Value> {
        let corpus = &self.synthetic.corpus;
        let mut all = union_matrices(&self.interactions, &build_user_mention_matrix(corpus, 1000)?);
        all = union_matrices(&all, &build_user_domain_matrix(corpus, 1000)?);
        let report = entity_stance_report(&all, &self.output.table, theta_i, top_n)?;
        Ok(serde_json::to_value(report).expect("report serializes"))
    }

    /// Held-out gold pairs: every other labeled reply.
    fn test_pairs(&self) -> Vec<ConversationPair> {
        self.synthetic.gold_pairs.iter().step_by(2).cloned().collect()
    }

    /// Trains the reply classifier on weak labels and scores it against
    /// held-out gold pairs.
    pub fn train_classifier(&mut self, mode: PairMode) -> Result<serde_json::Value> {
        let test = self.test_pairs();
        let held_out: HashSet<String> = test.iter().map(|p| p.reply_tweet_id.clone()).collect();
        let (pairs, _) = extract_conversations(&self.synthetic.corpus);
        let (weak, stats) = label_conversations(&pairs, &self.output.table, &held_out);
        let model = train_conversation_model(&weak, mode, &VocabularyConfig::default(), TrainConfig::default())?;
        let fold = evaluate_pairs(&model, "synthetic", weak.len(), &test);
        let labels: Vec<PairLabel> = test.iter().map(|p| p.label).collect();
        let baseline = majority_baseline_f1(&labels).ok();
        self.model = Some(model);
        Ok(json!({
            "weak_pairs": weak.len(),
            "weak_coverage": stats.coverage,
            "test_pairs": test.len(),
            "f1_macro": fold.f1_macro,
            "majority_baseline": baseline,
        }))
    }

    pub fn classify(&self, source: &str, reply: &str) -> Option<serde_json::Value> {
        let model = self.model.as_ref()?;
        let (label, score) = model.predict_conversation(source, reply);
        let name = if label == PairLabel::Favor { "favor" } else { "oppose" };
        Some(json!({ "label": name, "score": score }))
    }

    /// A few held-out pairs for the page to prefill.
    pub fn examples(&self, n: usize) -> serde_json::Value {
        let rows: Vec<_> = self
            .test_pairs()
            .into_iter()
            .take(n)
            .map(|p| json!({ "source": p.source_text, "reply": p.reply_text, "gold": p.label.value() }))
            .collect();
        serde_json::Value::Array(rows)
    }
}

fn js_err(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen]
pub struct Session {
    inner: Demo,
}

#[wasm_bindgen]
impl Session {
    /// `settings` is a JSON object with any of the `DemoSettings` fields.
    #[wasm_bindgen(constructor)]
    pub fn new(settings: &str) -> std::result::Result<Session, JsError> {
        let settings: DemoSettings = serde_json::from_str(settings).map_err(js_err)?;
        Ok(Session {
            inner: Demo::new(&settings).map_err(js_err)?,
        })
    }

    pub fn history(&self) -> String {
        self.inner.history().to_string()
    }

    pub fn entities(&self, theta_i: f64, top_n: usize) -> std::result::Result<String, JsError> {
        Ok(self.inner.entities(theta_i, top_n).map_err(js_err)?.to_string())
    }

    /// `mode` is `pair` or `reply_only`.
    #[wasm_bindgen(js_name = trainClassifier)]
    pub fn train_classifier(&mut self, mode: &str) -> std::result::Result<String, JsError> {
        let mode: PairMode = mode.parse().map_err(js_err)?;
        Ok(self.inner.train_classifier(mode).map_err(js_err)?.to_string())
    }

    /// Empty string until a classifier has been trained.
    pub fn classify(&self, source: &str, reply: &str) -> String {
        self.inner
            .classify(source, reply)
            .map(|v| v.to_string())
            .unwrap_or_default()
    }

    pub fn examples(&self, n: usize) -> String {
        self.inner.examples(n).to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn demo_round_trip() {
        let mut demo = Demo::new(&DemoSettings::default()).unwrap();
        let h = demo.history();
        assert!(!h["history"].as_array().unwrap().is_empty());
        let e = demo.entities(0.7, 5).unwrap();
        assert!(!e["pro"].as_array().unwrap().is_empty());
        assert!(demo.classify("a", "b").is_none());
        let r = demo.train_classifier(PairMode::ReplyOnly).unwrap();
        assert!(r["f1_macro"].as_f64().unwrap() > 0.5, "{r}");
        let c = demo.classify("hello", "wrong").unwrap();
        assert!(c["label"] == "favor" || c["label"] == "oppose");
        assert_eq!(demo.examples(3).as_array().unwrap().len(), 3);
    }

    #[test]
    fn settings_accept_partial_json() {
        let s: DemoSettings = serde_json::from_str(r#"{"users": 40}"#).unwrap();
        assert_eq!(s.users, 40);
        assert_eq!(s.iterations, 5);
    }
}
