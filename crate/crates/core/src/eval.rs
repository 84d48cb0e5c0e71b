//! Metrics (F1-macro, Cohen's kappa), leave-one-event-out evaluation,
//! entity stance reports and stance cross-tabulation.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::convclf::{PairClassifier, PairTrainer};
use crate::corpus::{ConversationPair, LabelKind, PairLabel};
use crate::error::{Error, Result};
use crate::graph::{BipartiteMatrix, EntityKind};
use crate::propagation::{csv_field, propagate_to_entities, Stance, StanceTable};

/// Unweighted mean of per-class F1 over the classes present in `gold`.
/// A class never predicted scores 0. Predictions outside the gold classes
/// (e.g. Unknown) only lower recall.
pub fn f1_macro<T: Ord + Copy>(predictions: &[T], gold: &[T]) -> Result<f64> {
    if predictions.len() != gold.len() {
        return Err(Error::LengthMismatch {
            left: predictions.len(),
            right: gold.len(),
        });
    }
    if gold.is_empty() {
        return Err(Error::param("gold", "at least one label is required"));
    }
    let classes: BTreeSet<T> = gold.iter().copied().collect();
    let total: f64 = classes
        .iter()
        .map(|&c| {
            let mut tp = 0usize;
            let mut fp = 0usize;
            let mut fn_ = 0usize;
            for (&p, &g) in predictions.iter().zip(gold) {
                match (p == c, g == c) {
                    (true, true) => tp += 1,
                    (true, false) => fp += 1,
                    (false, true) => fn_ += 1,
                    (false, false) => {}
                }
            }
            let denom = 2 * tp + fp + fn_;
            if denom == 0 {
                0.0
            } else {
                2.0 * tp as f64 / denom as f64
            }
        })
        .sum();
    Ok(total / classes.len() as f64)
}

/// `(p0 − pe) / (1 − pe)`.
pub fn cohens_kappa(p0: f64, pe: f64) -> Result<f64> {
    if pe == 1.0 {
        return Err(Error::DegenerateChance);
    }
    Ok((p0 - pe) / (1.0 - pe))
}

/// Human annotation of a reply, as in the four-way conversation scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GoldLabel {
    Support,
    Oppose,
    Comment,
    Query,
}

impl GoldLabel {
    /// Binary task view: Support → Favor, Oppose → Oppose, others dropped.
    pub fn to_binary(self) -> Option<PairLabel> {
        match self {
            GoldLabel::Support => Some(PairLabel::Favor),
            GoldLabel::Oppose => Some(PairLabel::Oppose),
            GoldLabel::Comment | GoldLabel::Query => None,
        }
    }
}

impl std::str::FromStr for GoldLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "support" | "favor" | "agree" | "1" | "+1" => Ok(GoldLabel::Support),
            "oppose" | "deny" | "disagree" | "-1" => Ok(GoldLabel::Oppose),
            "comment" | "0" => Ok(GoldLabel::Comment),
            "query" | "queries" => Ok(GoldLabel::Query),
            other => Err(Error::parse("gold label", other)),
        }
    }
}

/// Hand-labeled pairs from JSONL. Each record needs `source_text`,
/// `reply_text` and `label` (a four-way name or -1/0/1); ids, users and
/// `event` are optional. Comment and query rows are dropped and counted.
pub fn read_gold_pairs(path: &Path, default_event: &str) -> Result<(Vec<ConversationPair>, usize)> {
    #[derive(Deserialize)]
    struct Row {
        #[serde(default)]
        source_tweet_id: Option<String>,
        #[serde(default, alias = "id", alias = "tweet_id")]
        reply_tweet_id: Option<String>,
        #[serde(default)]
        source_user: String,
        #[serde(default)]
        reply_user: String,
        source_text: String,
        reply_text: String,
        label: serde_json::Value,
        #[serde(default)]
        event: Option<String>,
    }
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut pairs = Vec::new();
    let mut dropped = 0;
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let at = || format!("{}:{}", path.display(), n + 1);
        let row: Row = serde_json::from_str(&line).map_err(|e| Error::parse(at(), e))?;
        let gold: GoldLabel = match &row.label {
            serde_json::Value::String(s) => s.parse()?,
            serde_json::Value::Number(x) => x.to_string().parse()?,
            other => return Err(Error::parse(at(), format!("unsupported label {other}"))),
        };
        let Some(label) = gold.to_binary() else {
            dropped += 1;
            continue;
        };
        let reply_id = row.reply_tweet_id.unwrap_or_else(|| format!("gold-{}", n + 1));
        pairs.push(ConversationPair {
            source_tweet_id: row.source_tweet_id.unwrap_or_default(),
            reply_tweet_id: reply_id,
            source_user: row.source_user,
            reply_user: row.reply_user,
            source_text: row.source_text,
            reply_text: row.reply_text,
            label,
            label_kind: Some(LabelKind::Gold),
            event: row.event.unwrap_or_else(|| default_event.to_string()),
        });
    }
    Ok((pairs, dropped))
}

/// Groups pairs by event, in event-name order.
pub fn group_by_event(pairs: Vec<ConversationPair>) -> Vec<(String, Vec<ConversationPair>)> {
    let mut groups: BTreeMap<String, Vec<ConversationPair>> = BTreeMap::new();
    for p in pairs {
        groups.entry(p.event.clone()).or_default().push(p);
    }
    groups.into_iter().collect()
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    /// Rows are gold, columns predictions, both ordered Favor, Oppose.
    pub counts: [[usize; 2]; 2],
}

impl Confusion {
    pub fn from_labels(predictions: &[PairLabel], gold: &[PairLabel]) -> Self {
        let idx = |l: PairLabel| match l {
            PairLabel::Favor => Some(0),
            PairLabel::Oppose => Some(1),
            PairLabel::Unknown => None,
        };
        let mut c = Confusion::default();
        for (&p, &g) in predictions.iter().zip(gold) {
            if let (Some(pi), Some(gi)) = (idx(p), idx(g)) {
                c.counts[gi][pi] += 1;
            }
        }
        c
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub event: String,
    pub n_train: usize,
    pub n_test: usize,
    pub f1_macro: Option<f64>,
    pub confusion: Confusion,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub folds: Vec<FoldResult>,
    /// Mean over the folds that produced a score.
    pub mean_f1_macro: Option<f64>,
}

impl EvalReport {
    pub fn from_folds(folds: Vec<FoldResult>) -> Self {
        let scores: Vec<f64> = folds.iter().filter_map(|f| f.f1_macro).collect();
        let mean_f1_macro = (!scores.is_empty()).then(|| scores.iter().sum::<f64>() / scores.len() as f64);
        EvalReport { folds, mean_f1_macro }
    }
}

/// Scores a trained model on labeled pairs (Unknown gold labels skipped).
pub fn evaluate_pairs(
    model: &dyn PairClassifier,
    event: &str,
    n_train: usize,
    test: &[ConversationPair],
) -> FoldResult {
    let test: Vec<&ConversationPair> = test.iter().filter(|p| p.label != PairLabel::Unknown).collect();
    let gold: Vec<PairLabel> = test.iter().map(|p| p.label).collect();
    let pred: Vec<PairLabel> = test
        .iter()
        .map(|p| model.predict(&p.source_text, &p.reply_text).0)
        .collect();
    let (f1, error) = match f1_macro(&pred, &gold) {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e.to_string())),
    };
    FoldResult {
        event: event.to_string(),
        n_train,
        n_test: test.len(),
        f1_macro: f1,
        confusion: Confusion::from_labels(&pred, &gold),
        error,
    }
}

/// Trains on the gold pairs of all events but one and tests on the held-out
/// event, once per event. A fold whose training fails (e.g. a single class)
/// records the error and the remaining folds proceed.
pub fn leave_one_out_eval(events: &[(String, Vec<ConversationPair>)], trainer: &dyn PairTrainer) -> Result<EvalReport> {
    if events.len() < 2 {
        return Err(Error::param("events", "leave-one-out needs at least two events"));
    }
    let folds = events
        .iter()
        .enumerate()
        .map(|(held, (event, test))| {
            let train: Vec<ConversationPair> = events
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != held)
                .flat_map(|(_, (_, pairs))| pairs.iter().filter(|p| p.label != PairLabel::Unknown))
                .cloned()
                .collect();
            let test_classes: BTreeSet<PairLabel> = test
                .iter()
                .map(|p| p.label)
                .filter(|&l| l != PairLabel::Unknown)
                .collect();
            let trained = if test_classes.len() < 2 {
                Err(Error::SingleClass("held-out gold"))
            } else {
                trainer.train(&train)
            };
            match trained {
                Ok(model) => evaluate_pairs(model.as_ref(), event, train.len(), test),
                Err(e) => FoldResult {
                    event: event.clone(),
                    n_train: train.len(),
                    n_test: test.len(),
                    f1_macro: None,
                    confusion: Confusion::default(),
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    Ok(EvalReport::from_folds(folds))
}

/// F1-macro of always predicting the more frequent gold class.
pub fn majority_baseline_f1(gold: &[PairLabel]) -> Result<f64> {
    let favor = gold.iter().filter(|&&g| g == PairLabel::Favor).count();
    let majority = if favor * 2 >= gold.len() {
        PairLabel::Favor
    } else {
        PairLabel::Oppose
    };
    f1_macro(&vec![majority; gold.len()], gold)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntityStanceEntry {
    pub entity: String,
    pub kind: EntityKind,
    pub stance: Stance,
    pub confidence: f64,
    pub usage: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntityStanceReport {
    pub theta: f64,
    pub pro: Vec<EntityStanceEntry>,
    pub anti: Vec<EntityStanceEntry>,
}

impl EntityStanceReport {
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        let io = |e| Error::io(path, e);
        writeln!(out, "side,kind,entity,stance,confidence,usage").map_err(io)?;
        for (side, list) in [("pro", &self.pro), ("anti", &self.anti)] {
            for e in list {
                writeln!(
                    out,
                    "{side},{},{},{},{},{}",
                    e.kind.as_str(),
                    csv_field(&e.entity),
                    e.stance.value(),
                    e.confidence,
                    e.usage
                )
                .map_err(io)?;
            }
        }
        out.flush().map_err(io)
    }

    pub fn contains(&self, stance: Stance, kind: EntityKind, id: &str) -> bool {
        let list = if stance == Stance::Pro { &self.pro } else { &self.anti };
        list.iter().any(|e| e.kind == kind && e.entity == id)
    }
}

/// One user → entity threshold pass. Entities above `theta_i` are grouped
/// by side and kind; each group keeps its `top_n` most used entities.
/// Lists are ordered by kind, then usage descending.
pub fn entity_stance_report(
    interactions: &BipartiteMatrix,
    users: &StanceTable,
    theta_i: f64,
    top_n: usize,
) -> Result<EntityStanceReport> {
    let aligned = users.aligned_to(interactions.row_ids());
    let entities = propagate_to_entities(interactions, &aligned, theta_i)?;
    let usage = interactions.col_sums();
    let mut groups: BTreeMap<(i8, EntityKind), Vec<EntityStanceEntry>> = BTreeMap::new();
    for (c, col) in interactions.col_ids().iter().enumerate() {
        let stance = entities.stance(c);
        if !stance.is_known() {
            continue;
        }
        groups
            .entry((stance.value(), col.kind))
            .or_default()
            .push(EntityStanceEntry {
                entity: col.id.clone(),
                kind: col.kind,
                stance,
                confidence: entities.confidence(c),
                usage: usage[c],
            });
    }
    let mut report = EntityStanceReport {
        theta: theta_i,
        pro: Vec::new(),
        anti: Vec::new(),
    };
    for ((side, _), mut list) in groups {
        list.sort_by(|a, b| b.usage.total_cmp(&a.usage).then_with(|| a.entity.cmp(&b.entity)));
        list.truncate(top_n);
        if side > 0 {
            report.pro.extend(list);
        } else {
            report.anti.extend(list);
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossTab {
    /// `counts[a][b]` with index 0 = +1 and 1 = −1, rows for table A.
    pub counts: [[usize; 2]; 2],
    pub row_totals: [usize; 2],
    pub col_totals: [usize; 2],
    pub total: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

/// Counts users with a known stance in both tables by their stance pair.
pub fn stance_cross_tab(a: &StanceTable, b: &StanceTable) -> CrossTab {
    let idx = |s: Stance| if s == Stance::Pro { 0 } else { 1 };
    let mut counts = [[0usize; 2]; 2];
    for (id, sa, _) in a.iter() {
        let sb = b.stance_of(id);
        if sa.is_known() && sb.is_known() {
            counts[idx(sa)][idx(sb)] += 1;
        }
    }
    let row_totals = [counts[0][0] + counts[0][1], counts[1][0] + counts[1][1]];
    let col_totals = [counts[0][0] + counts[1][0], counts[0][1] + counts[1][1]];
    let total = row_totals[0] + row_totals[1];
    CrossTab {
        counts,
        row_totals,
        col_totals,
        total,
        warning: (total == 0).then(|| "no user has a known stance in both tables".to_string()),
    }
}
