//! Checkpointed end-to-end runs. Each stage reads the artifacts of the
//! stages it depends on from the output directory and writes its own.
//! `manifest.json` records, per stage, a hash of the relevant configuration
//! and of every file read and written; a stage whose record still matches is
//! skipped.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::convclf::{train_conversation_model, ConversationModel, LinearPairTrainer, PairMode};
use crate::corpus::{
    extract_conversations, load_tweets, read_pairs_jsonl, write_pairs_jsonl, InputFormat, TweetCorpus,
};
use crate::cotrain::{cotrain_with, CoTrainConfig};
use crate::error::{Error, Result};
use crate::eval::{
    entity_stance_report, evaluate_pairs, group_by_event, leave_one_out_eval, majority_baseline_f1, read_gold_pairs,
    stance_cross_tab, EvalReport,
};
use crate::graph::{
    build_user_domain_matrix, build_user_hashtag_matrix, build_user_mention_matrix, build_user_retweet_matrix,
    union_matrices, BipartiteMatrix,
};
use crate::propagation::{parse_stance_label, SeedHashtagSet, Stance, StanceTable};
use crate::synth::{generate_synthetic_corpus, SynthConfig};
use crate::textclf::{TrainConfig, VocabularyConfig};
use crate::weaklabel::{label_conversations, write_weak_labels_csv};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stage {
    Synth,
    Ingest,
    BuildGraph,
    Cotrain,
    Weaklabel,
    TrainConv,
    Predict,
    Eval,
    Analyze,
}

impl Stage {
    pub const ALL: [Stage; 9] = [
        Stage::Synth,
        Stage::Ingest,
        Stage::BuildGraph,
        Stage::Cotrain,
        Stage::Weaklabel,
        Stage::TrainConv,
        Stage::Predict,
        Stage::Eval,
        Stage::Analyze,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Synth => "synth",
            Stage::Ingest => "ingest",
            Stage::BuildGraph => "build-graph",
            Stage::Cotrain => "cotrain",
            Stage::Weaklabel => "weaklabel",
            Stage::TrainConv => "train-conv",
            Stage::Predict => "predict",
            Stage::Eval => "eval",
            Stage::Analyze => "analyze",
        }
    }

    /// Upstream artifacts, as (producing stage, file name).
    fn requires(self) -> &'static [(Stage, &'static str)] {
        use Stage::*;
        match self {
            Synth | Ingest => &[],
            BuildGraph => &[(Ingest, CORPUS)],
            Cotrain => &[(Ingest, CORPUS), (BuildGraph, INTERACTIONS)],
            Weaklabel => &[(Ingest, CONVERSATIONS), (Cotrain, USER_STANCE)],
            TrainConv => &[(Weaklabel, WEAK_PAIRS)],
            Predict | Eval => &[(TrainConv, CONV_MODEL)],
            Analyze => &[
                (BuildGraph, INTERACTIONS),
                (BuildGraph, MENTIONS),
                (BuildGraph, DOMAINS),
                (Cotrain, USER_STANCE),
            ],
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Stage::ALL
            .into_iter()
            .find(|st| st.name() == s || st.name().replace('-', "_") == s)
            .ok_or_else(|| Error::param("stage", format!("unknown stage `{s}`")))
    }
}

pub const CORPUS: &str = "corpus.jsonl";
pub const CONVERSATIONS: &str = "conversations.jsonl";
pub const INGEST_STATS: &str = "ingest.json";
pub const INTERACTIONS: &str = "interactions.tsv";
pub const HASHTAGS: &str = "hashtags.tsv";
pub const RETWEETS: &str = "retweets.tsv";
pub const MENTIONS: &str = "mentions.tsv";
pub const DOMAINS: &str = "domains.tsv";
pub const USER_STANCE: &str = "user_stance.csv";
pub const LABELED_USERS: &str = "labeled_users.csv";
pub const NETWORK_ENTITIES: &str = "network_entities.csv";
pub const COTRAIN_HISTORY: &str = "cotrain_history.json";
pub const CHECKPOINTS: &str = "checkpoints";
pub const WEAK_LABELS: &str = "weak_labels.csv";
pub const WEAK_PAIRS: &str = "weak_pairs.jsonl";
pub const WEAK_STATS: &str = "weaklabel.json";
pub const CONV_MODEL: &str = "conv_model.json";
pub const PREDICTIONS: &str = "predictions.jsonl";
pub const EVAL_REPORT: &str = "eval_report.json";
pub const ENTITY_REPORT_CSV: &str = "entity_report.csv";
pub const ENTITY_REPORT_JSON: &str = "entity_report.json";
pub const CROSS_TAB: &str = "crosstab.json";
pub const SYNTH_DIR: &str = "synthetic";
pub const MANIFEST: &str = "manifest.json";
pub const LOCK: &str = ".lock";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConvConfig {
    pub vocabulary: VocabularyConfig,
    pub train: TrainConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Tweet files (JSONL or CSV, chosen by extension).
    pub input: Vec<PathBuf>,
    /// Event name for records that carry none.
    pub event: String,
    /// Seed hashtag → `pro` / `anti`.
    pub seeds: BTreeMap<String, String>,
    pub out: PathBuf,
    pub seed_rng: u64,
    pub topk_hashtags: usize,
    pub topp_retweets: usize,
    /// Column limit for the mention and domain matrices.
    pub entity_limit: usize,
    pub theta_i: f64,
    pub report_top_n: usize,
    pub mode: PairMode,
    /// Hand-labeled pairs; excluded from weak training and used by `eval`.
    pub gold: Option<PathBuf>,
    /// Known user stances (stance CSV); adds per-iteration scores to the
    /// co-training history.
    pub gold_users: Option<PathBuf>,
    /// A second stance table for the `analyze` cross-tabulation.
    pub compare_stance: Option<PathBuf>,
    /// Pairs to label in `predict`; defaults to the ingested conversations.
    pub predict_input: Option<PathBuf>,
    pub cotrain: CoTrainConfig,
    pub conv: ConvConfig,
    pub synth: SynthConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            input: Vec::new(),
            event: "default".to_string(),
            seeds: BTreeMap::new(),
            out: PathBuf::from("out"),
            seed_rng: 7,
            topk_hashtags: 250,
            topp_retweets: 1000,
            entity_limit: 1000,
            theta_i: 0.7,
            report_top_n: 25,
            mode: PairMode::Pair,
            gold: None,
            gold_users: None,
            compare_stance: None,
            predict_input: None,
            cotrain: CoTrainConfig::default(),
            conv: ConvConfig::default(),
            synth: SynthConfig::default(),
        }
    }
}

impl PipelineConfig {
    /// Reads a TOML config. Relative paths are resolved against the
    /// directory of the file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config: PipelineConfig =
            toml::from_str(&text).map_err(|e| Error::parse(path.display().to_string(), e))?;
        let base = path.parent().unwrap_or(Path::new(""));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        config.input.iter_mut().for_each(resolve);
        resolve(&mut config.out);
        for p in [
            &mut config.gold,
            &mut config.gold_users,
            &mut config.compare_stance,
            &mut config.predict_input,
        ]
        .into_iter()
        .flatten()
        {
            resolve(p);
        }
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn seed_set(&self) -> Result<SeedHashtagSet> {
        let labels = self
            .seeds
            .iter()
            .map(|(tag, label)| Ok((tag.clone(), parse_stance_label(label)?)))
            .collect::<Result<Vec<(String, Stance)>>>()?;
        SeedHashtagSet::new(labels)
    }

    /// Replaces the seeds with a `tag:pro,tag:anti` list.
    pub fn set_seeds(&mut self, spec: &str) -> Result<()> {
        let set = SeedHashtagSet::parse(spec)?;
        self.seeds = set
            .iter()
            .map(|(tag, s)| {
                (
                    tag.to_string(),
                    if s == Stance::Pro { "pro" } else { "anti" }.to_string(),
                )
            })
            .collect();
        Ok(())
    }

    /// The part of the configuration a stage's output depends on.
    fn stage_settings(&self, stage: Stage) -> serde_json::Value {
        use serde_json::json;
        match stage {
            Stage::Synth => json!({ "synth": self.synth, "seed_rng": self.seed_rng }),
            Stage::Ingest => json!({ "event": self.event }),
            Stage::BuildGraph => json!({
                "k": self.topk_hashtags,
                "p": self.topp_retweets,
                "entity_limit": self.entity_limit,
                "seeds": self.seeds,
            }),
            Stage::Cotrain => json!({ "seeds": self.seeds, "cotrain": self.cotrain }),
            Stage::Weaklabel => json!({}),
            Stage::TrainConv => json!({ "mode": self.mode, "conv": self.conv }),
            Stage::Predict => json!({}),
            Stage::Eval => json!({ "mode": self.mode, "conv": self.conv, "event": self.event }),
            Stage::Analyze => json!({ "theta_i": self.theta_i, "top_n": self.report_top_n }),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub config_hash: String,
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub stages: BTreeMap<String, StageRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageOutcome {
    pub stage: Stage,
    /// True when the manifest matched and nothing was recomputed.
    pub skipped: bool,
    pub outputs: Vec<PathBuf>,
}

/// Exclusive claim on an output directory, released on drop.
#[derive(Debug)]
pub struct DirLock {
    path: PathBuf,
}

impl DirLock {
    pub fn acquire(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let path = dir.join(LOCK);
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut f) => {
                let _ = writeln!(f, "{}", std::process::id());
                Ok(DirLock { path })
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Err(Error::Locked(dir.to_path_buf())),
            Err(e) => Err(Error::io(&path, e)),
        }
    }
}

impl Drop for DirLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let mut file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = file.read(&mut buf).map_err(|e| Error::io(path, e))?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Error::parse("json output", e))?;
    w.write_all(b"\n")
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::parse(path.display().to_string(), e))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IngestSummary {
    pub files: usize,
    pub records: usize,
    pub skipped: usize,
    pub duplicates: usize,
    pub tweets: usize,
    pub users: usize,
    pub conversations: usize,
    pub missing_reply_targets: usize,
    pub self_replies: usize,
    pub empty_text: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Prediction {
    pub source_tweet_id: String,
    pub reply_tweet_id: String,
    pub label: i8,
    pub score: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalSummary {
    /// The weakly supervised model scored on each event's gold pairs.
    pub weak: EvalReport,
    pub majority_baseline: BTreeMap<String, f64>,
    pub mean_majority_baseline: Option<f64>,
    /// Leave-one-event-out training on gold labels, when there are at
    /// least two events.
    pub supervised: Option<EvalReport>,
    pub dropped_gold_rows: usize,
}

pub struct Pipeline {
    config: PipelineConfig,
}

impl Pipeline {
    pub fn new(config: PipelineConfig) -> Self {
        Pipeline { config }
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    pub fn out(&self) -> &Path {
        &self.config.out
    }

    pub fn artifact(&self, name: &str) -> PathBuf {
        self.config.out.join(name)
    }

    pub fn manifest(&self) -> Result<Manifest> {
        let path = self.artifact(MANIFEST);
        if path.exists() {
            read_json(&path)
        } else {
            Ok(Manifest {
                version: env!("CARGO_PKG_VERSION").to_string(),
                stages: BTreeMap::new(),
            })
        }
    }

    pub fn run_stage(&self, stage: Stage) -> Result<StageOutcome> {
        let _lock = DirLock::acquire(self.out())?;
        self.run_locked(stage)
    }

    /// Ingest through analyze; eval runs only when a gold file is set.
    pub fn run_all(&self) -> Result<Vec<StageOutcome>> {
        let _lock = DirLock::acquire(self.out())?;
        let mut stages = vec![
            Stage::Ingest,
            Stage::BuildGraph,
            Stage::Cotrain,
            Stage::Weaklabel,
            Stage::TrainConv,
        ];
        if self.config.gold.is_some() {
            stages.push(Stage::Eval);
        }
        stages.push(Stage::Analyze);
        stages.into_iter().map(|s| self.run_locked(s)).collect()
    }

    fn inputs(&self, stage: Stage) -> Vec<PathBuf> {
        let c = &self.config;
        let mut paths: Vec<PathBuf> = stage.requires().iter().map(|(_, f)| self.artifact(f)).collect();
        match stage {
            Stage::Ingest => paths.extend(c.input.iter().cloned()),
            Stage::Cotrain => paths.extend(c.gold_users.iter().cloned()),
            Stage::Weaklabel => paths.extend(c.gold.iter().cloned()),
            Stage::Predict => match &c.predict_input {
                Some(p) => paths.push(p.clone()),
                None => paths.push(self.artifact(CONVERSATIONS)),
            },
            Stage::Eval => paths.extend(c.gold.iter().cloned()),
            Stage::Analyze => paths.extend(c.compare_stance.iter().cloned()),
            _ => {}
        }
        paths
    }

    fn run_locked(&self, stage: Stage) -> Result<StageOutcome> {
        for &(needs, file) in stage.requires() {
            let path = self.artifact(file);
            if !path.exists() {
                return Err(Error::MissingDependency {
                    stage: stage.name(),
                    needs: needs.name(),
                    missing: path,
                });
            }
        }
        if stage == Stage::Predict && self.config.predict_input.is_none() && !self.artifact(CONVERSATIONS).exists() {
            return Err(Error::MissingDependency {
                stage: stage.name(),
                needs: Stage::Ingest.name(),
                missing: self.artifact(CONVERSATIONS),
            });
        }
        let mut inputs = BTreeMap::new();
        for p in self.inputs(stage) {
            inputs.insert(p.display().to_string(), sha256_file(&p)?);
        }
        let settings = serde_json::to_string(&(
            env!("CARGO_PKG_VERSION"),
            stage.name(),
            self.config.stage_settings(stage),
        ))
        .expect("settings serialize");
        let config_hash = hex::encode(Sha256::digest(settings.as_bytes()));

        let mut manifest = self.manifest()?;
        if let Some(rec) = manifest.stages.get(stage.name()) {
            if rec.config_hash == config_hash && rec.inputs == inputs && self.outputs_intact(rec) {
                return Ok(StageOutcome {
                    stage,
                    skipped: true,
                    outputs: rec.outputs.keys().map(|k| self.artifact(k)).collect(),
                });
            }
        }

        let written = self.execute(stage)?;
        let mut outputs = BTreeMap::new();
        for name in &written {
            outputs.insert(name.clone(), sha256_file(&self.artifact(name))?);
        }
        manifest.version = env!("CARGO_PKG_VERSION").to_string();
        manifest.stages.insert(
            stage.name().to_string(),
            StageRecord {
                config_hash,
                inputs,
                outputs,
            },
        );
        let tmp = self.artifact(&format!("{MANIFEST}.tmp"));
        write_json(&tmp, &manifest)?;
        let path = self.artifact(MANIFEST);
        fs::rename(&tmp, &path).map_err(|e| Error::io(&path, e))?;
        Ok(StageOutcome {
            stage,
            skipped: false,
            outputs: written.iter().map(|n| self.artifact(n)).collect(),
        })
    }

    fn outputs_intact(&self, rec: &StageRecord) -> bool {
        rec.outputs
            .iter()
            .all(|(name, hash)| sha256_file(&self.artifact(name)).is_ok_and(|h| &h == hash))
    }

    /// Runs the stage and returns the written files, relative to `out`.
    fn execute(&self, stage: Stage) -> Result<Vec<String>> {
        match stage {
            Stage::Synth => self.synth(),
            Stage::Ingest => self.ingest(),
            Stage::BuildGraph => self.build_graph(),
            Stage::Cotrain => self.cotrain(),
            Stage::Weaklabel => self.weaklabel(),
            Stage::TrainConv => self.train_conv(),
            Stage::Predict => self.predict(),
            Stage::Eval => self.eval(),
            Stage::Analyze => self.analyze(),
        }
    }

    fn load_corpus(&self) -> Result<TweetCorpus> {
        load_tweets(&self.artifact(CORPUS), InputFormat::Jsonl, &self.config.event)
    }

    fn synth(&self) -> Result<Vec<String>> {
        let dir = self.artifact(SYNTH_DIR);
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        let cfg = SynthConfig {
            seed: self.config.seed_rng,
            ..self.config.synth.clone()
        };
        let s = generate_synthetic_corpus(&cfg)?;
        let file = |n: &str| format!("{SYNTH_DIR}/{n}");
        s.corpus.write_jsonl(&self.artifact(&file("tweets.jsonl")))?;
        // Every other labeled reply is held out as the gold file; the rest
        // stay available for weak labeling.
        let held_out: Vec<_> = s.gold_pairs.iter().step_by(2).cloned().collect();
        write_pairs_jsonl(&self.artifact(&file("gold_pairs.jsonl")), &held_out)?;
        let ids: Vec<String> = s.user_stance.keys().cloned().collect();
        let stances: Vec<Stance> = s.user_stance.values().copied().collect();
        let ones = vec![1.0; ids.len()];
        StanceTable::from_parts(ids, stances, ones).write_csv(&self.artifact(&file("user_stance.csv")))?;
        write_json(&self.artifact(&file("exclusive_hashtags.json")), &s.exclusive)?;

        let mut run = PipelineConfig {
            input: vec![PathBuf::from("tweets.jsonl")],
            event: cfg.events[0].clone(),
            gold: Some(PathBuf::from("gold_pairs.jsonl")),
            gold_users: Some(PathBuf::from("user_stance.csv")),
            out: PathBuf::from("run"),
            seed_rng: self.config.seed_rng,
            ..PipelineConfig::default()
        };
        run.seeds = s
            .seeds
            .iter()
            .map(|(t, st)| {
                (
                    t.to_string(),
                    if st == Stance::Pro { "pro" } else { "anti" }.to_string(),
                )
            })
            .collect();
        run.synth = cfg;
        let config_path = self.artifact(&file("config.toml"));
        fs::write(&config_path, run.to_toml()).map_err(|e| Error::io(&config_path, e))?;
        Ok([
            "tweets.jsonl",
            "gold_pairs.jsonl",
            "user_stance.csv",
            "exclusive_hashtags.json",
            "config.toml",
        ]
        .iter()
        .map(|n| file(n))
        .collect())
    }

    fn ingest(&self) -> Result<Vec<String>> {
        let c = &self.config;
        if c.input.is_empty() {
            return Err(Error::param("input", "no input files given"));
        }
        let mut tweets = Vec::new();
        let mut records = 0;
        let mut skipped = 0;
        for path in &c.input {
            let corpus = load_tweets(path, InputFormat::from_path(path), &c.event)?;
            records += corpus.stats().records;
            skipped += corpus.stats().skipped;
            tweets.extend(corpus.tweets().iter().cloned());
        }
        let loaded = tweets.len();
        let corpus = TweetCorpus::from_tweets(tweets);
        corpus.write_jsonl(&self.artifact(CORPUS))?;
        let (pairs, stats) = extract_conversations(&corpus);
        write_pairs_jsonl(&self.artifact(CONVERSATIONS), &pairs)?;
        let summary = IngestSummary {
            files: c.input.len(),
            records,
            skipped,
            duplicates: loaded - corpus.len() + (records - skipped - loaded),
            tweets: corpus.len(),
            users: corpus.users().len(),
            conversations: stats.pairs,
            missing_reply_targets: stats.missing_targets,
            self_replies: stats.self_replies,
            empty_text: stats.empty_text,
        };
        write_json(&self.artifact(INGEST_STATS), &summary)?;
        Ok(vec![CORPUS.into(), CONVERSATIONS.into(), INGEST_STATS.into()])
    }

    fn build_graph(&self) -> Result<Vec<String>> {
        let c = &self.config;
        let corpus = self.load_corpus()?;
        let seeds = c.seed_set()?;
        let h = build_user_hashtag_matrix(&corpus, c.topk_hashtags, &seeds.hashtags())?;
        let r = build_user_retweet_matrix(&corpus, c.topp_retweets)?;
        let i = union_matrices(&h, &r);
        h.write_triplets(&self.artifact(HASHTAGS))?;
        r.write_triplets(&self.artifact(RETWEETS))?;
        i.write_triplets(&self.artifact(INTERACTIONS))?;
        build_user_mention_matrix(&corpus, c.entity_limit)?.write_triplets(&self.artifact(MENTIONS))?;
        build_user_domain_matrix(&corpus, c.entity_limit)?.write_triplets(&self.artifact(DOMAINS))?;
        Ok(vec![
            HASHTAGS.into(),
            RETWEETS.into(),
            INTERACTIONS.into(),
            MENTIONS.into(),
            DOMAINS.into(),
        ])
    }

    fn cotrain(&self) -> Result<Vec<String>> {
        let c = &self.config;
        let corpus = self.load_corpus()?;
        let interactions = BipartiteMatrix::read_triplets(&self.artifact(INTERACTIONS))?;
        let seeds = c.seed_set()?;
        let gold: Option<BTreeMap<String, Stance>> = match &c.gold_users {
            Some(p) => Some(
                StanceTable::read_csv(p)?
                    .iter()
                    .filter(|(_, s, _)| s.is_known())
                    .map(|(id, s, _)| (id.to_string(), s))
                    .collect(),
            ),
            None => None,
        };
        let dir = self.artifact(CHECKPOINTS);
        if dir.exists() {
            fs::remove_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        }
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        let mut written = Vec::new();
        let out = cotrain_with(
            &corpus,
            &interactions,
            &seeds,
            &c.cotrain,
            gold.as_ref(),
            |rec, labeled| {
                let ul = format!("{CHECKPOINTS}/iter_{}_labeled.csv", rec.iteration);
                let metrics = format!("{CHECKPOINTS}/iter_{}_metrics.json", rec.iteration);
                labeled.write_csv(&self.artifact(&ul))?;
                write_json(&self.artifact(&metrics), rec)?;
                written.push(ul);
                written.push(metrics);
                Ok(())
            },
        )?;
        out.table.write_csv(&self.artifact(USER_STANCE))?;
        out.labeled.write_csv(&self.artifact(LABELED_USERS))?;
        out.entities.write_csv(&self.artifact(NETWORK_ENTITIES))?;
        write_json(
            &self.artifact(COTRAIN_HISTORY),
            &serde_json::json!({ "converged": out.converged, "history": out.history }),
        )?;
        written.extend([USER_STANCE, LABELED_USERS, NETWORK_ENTITIES, COTRAIN_HISTORY].map(String::from));
        Ok(written)
    }

    fn gold_reply_ids(&self) -> Result<HashSet<String>> {
        Ok(match &self.config.gold {
            Some(p) => read_gold_pairs(p, &self.config.event)?
                .0
                .into_iter()
                .map(|p| p.reply_tweet_id)
                .collect(),
            None => HashSet::new(),
        })
    }

    fn weaklabel(&self) -> Result<Vec<String>> {
        let pairs = read_pairs_jsonl(&self.artifact(CONVERSATIONS))?;
        let table = StanceTable::read_csv(&self.artifact(USER_STANCE))?;
        let (weak, stats) = label_conversations(&pairs, &table, &self.gold_reply_ids()?);
        write_weak_labels_csv(&self.artifact(WEAK_LABELS), &weak)?;
        write_pairs_jsonl(&self.artifact(WEAK_PAIRS), &weak)?;
        write_json(&self.artifact(WEAK_STATS), &stats)?;
        Ok(vec![WEAK_LABELS.into(), WEAK_PAIRS.into(), WEAK_STATS.into()])
    }

    fn train_conv(&self) -> Result<Vec<String>> {
        let c = &self.config;
        let pairs = read_pairs_jsonl(&self.artifact(WEAK_PAIRS))?;
        let model = train_conversation_model(&pairs, c.mode, &c.conv.vocabulary, c.conv.train)?;
        model.save(&self.artifact(CONV_MODEL))?;
        Ok(vec![CONV_MODEL.into()])
    }

    fn predict(&self) -> Result<Vec<String>> {
        let model = ConversationModel::load(&self.artifact(CONV_MODEL))?;
        let input = self
            .config
            .predict_input
            .clone()
            .unwrap_or_else(|| self.artifact(CONVERSATIONS));
        let path = self.artifact(PREDICTIONS);
        let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
        let mut w = BufWriter::new(file);
        for p in read_text_pairs(&input)? {
            let (label, score) = model.predict_conversation(&p.1, &p.2);
            let row = Prediction {
                source_tweet_id: p.0 .0,
                reply_tweet_id: p.0 .1,
                label: label.value(),
                score,
            };
            serde_json::to_writer(&mut w, &row).map_err(|e| Error::parse("prediction", e))?;
            w.write_all(b"\n").map_err(|e| Error::io(&path, e))?;
        }
        w.flush().map_err(|e| Error::io(&path, e))?;
        Ok(vec![PREDICTIONS.into()])
    }

    fn eval(&self) -> Result<Vec<String>> {
        let c = &self.config;
        let gold_path = c
            .gold
            .as_ref()
            .ok_or_else(|| Error::param("gold", "eval needs a gold pair file"))?;
        let model = ConversationModel::load(&self.artifact(CONV_MODEL))?;
        let (gold, dropped) = read_gold_pairs(gold_path, &c.event)?;
        let events = group_by_event(gold);
        let folds = events
            .iter()
            .map(|(event, pairs)| evaluate_pairs(&model, event, model.metadata.training_size, pairs))
            .collect();
        let majority_baseline: BTreeMap<String, f64> = events
            .iter()
            .filter_map(|(event, pairs)| {
                let labels: Vec<_> = pairs.iter().map(|p| p.label).collect();
                majority_baseline_f1(&labels).ok().map(|f| (event.clone(), f))
            })
            .collect();
        let mean_majority_baseline = if majority_baseline.is_empty() {
            None
        } else {
            Some(majority_baseline.values().sum::<f64>() / majority_baseline.len() as f64)
        };
        let supervised = if events.len() >= 2 {
            let trainer = LinearPairTrainer {
                mode: c.mode,
                vocabulary: c.conv.vocabulary.clone(),
                train: c.conv.train,
            };
            Some(leave_one_out_eval(&events, &trainer)?)
        } else {
            None
        };
        let summary = EvalSummary {
            weak: EvalReport::from_folds(folds),
            majority_baseline,
            mean_majority_baseline,
            supervised,
            dropped_gold_rows: dropped,
        };
        write_json(&self.artifact(EVAL_REPORT), &summary)?;
        Ok(vec![EVAL_REPORT.into()])
    }

    fn analyze(&self) -> Result<Vec<String>> {
        let c = &self.config;
        let table = StanceTable::read_csv(&self.artifact(USER_STANCE))?;
        let mut m = BipartiteMatrix::read_triplets(&self.artifact(INTERACTIONS))?;
        for extra in [MENTIONS, DOMAINS] {
            m = union_matrices(&m, &BipartiteMatrix::read_triplets(&self.artifact(extra))?);
        }
        let report = entity_stance_report(&m, &table, c.theta_i, c.report_top_n)?;
        report.write_csv(&self.artifact(ENTITY_REPORT_CSV))?;
        write_json(&self.artifact(ENTITY_REPORT_JSON), &report)?;
        let mut written = vec![ENTITY_REPORT_CSV.to_string(), ENTITY_REPORT_JSON.to_string()];
        if let Some(other) = &c.compare_stance {
            let tab = stance_cross_tab(&table, &StanceTable::read_csv(other)?);
            write_json(&self.artifact(CROSS_TAB), &tab)?;
            written.push(CROSS_TAB.into());
        }
        Ok(written)
    }
}

/// ((source id, reply id), source text, reply text) from a JSONL file of
/// pairs. Ids are optional; missing ones become the line number.
type TextPair = ((String, String), String, String);

fn read_text_pairs(path: &Path) -> Result<Vec<TextPair>> {
    #[derive(Deserialize)]
    struct Row {
        #[serde(default)]
        source_tweet_id: Option<String>,
        #[serde(default)]
        reply_tweet_id: Option<String>,
        source_text: String,
        reply_text: String,
    }
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let row: Row =
            serde_json::from_str(&line).map_err(|e| Error::parse(format!("{}:{}", path.display(), n + 1), e))?;
        out.push((
            (
                row.source_tweet_id.unwrap_or_default(),
                row.reply_tweet_id.unwrap_or_else(|| (n + 1).to_string()),
            ),
            row.source_text,
            row.reply_text,
        ));
    }
    Ok(out)
}

/// Stages in run order, for help output.
pub fn stage_names() -> BTreeSet<&'static str> {
    Stage::ALL.iter().map(|s| s.name()).collect()
}
