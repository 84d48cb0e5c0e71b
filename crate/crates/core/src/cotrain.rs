//! Co-training of the network view (label propagation over the user ×
//! entity matrix) and the text view (a tweet classifier aggregated per
//! user). Each iteration both views label the currently unlabeled users and
//! their most confident predictions join the labeled set.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::{extract_user_documents, TweetCorpus};
use crate::error::{Error, Result};
use crate::eval::f1_macro;
use crate::graph::BipartiteMatrix;
use crate::propagation::{seed_user_stance, NetworkPropagation, SeedHashtagSet, Stance, StanceTable, StanceVector};
use crate::textclf::{aggregate_scores, LinearModel, SparseVector, TrainConfig, Vocabulary, VocabularyConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CoTrainConfig {
    pub theta_u: f64,
    pub theta_h: f64,
    pub theta_t: f64,
    /// Fraction of each view's confident candidates added per iteration.
    pub mix_k: f64,
    pub max_iterations: usize,
    pub round_trips: usize,
    pub vocabulary: VocabularyConfig,
    pub train: TrainConfig,
}

impl Default for CoTrainConfig {
    fn default() -> Self {
        CoTrainConfig {
            theta_u: 0.7,
            theta_h: 0.7,
            theta_t: 0.7,
            mix_k: 0.2,
            max_iterations: 5,
            round_trips: 1,
            vocabulary: VocabularyConfig::default(),
            train: TrainConfig::default(),
        }
    }
}

impl CoTrainConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("theta_u", self.theta_u),
            ("theta_h", self.theta_h),
            ("theta_t", self.theta_t),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::param(name, format!("{v} is outside [0, 1]")));
            }
        }
        if !(self.mix_k > 0.0 && self.mix_k <= 1.0) {
            return Err(Error::param("mix_k", format!("{} is outside (0, 1]", self.mix_k)));
        }
        if self.max_iterations == 0 {
            return Err(Error::param("max_iterations", "must be at least 1"));
        }
        Ok(())
    }

    fn network(&self) -> NetworkPropagation {
        NetworkPropagation {
            theta_h: self.theta_h,
            theta_u: self.theta_u,
            round_trips: self.round_trips,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelSource {
    Seed,
    Network,
    Text,
}

impl LabelSource {
    pub fn as_str(self) -> &'static str {
        match self {
            LabelSource::Seed => "seed",
            LabelSource::Network => "network",
            LabelSource::Text => "text",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabeledUser {
    pub stance: Stance,
    pub confidence: f64,
    pub source: LabelSource,
}

/// Users with a training label. Entries are only ever added.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LabeledUserSet(BTreeMap<String, LabeledUser>);

impl LabeledUserSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `user` unless it is already present or `label` has no stance.
    /// Returns whether it was added.
    pub fn insert(&mut self, user: impl Into<String>, label: LabeledUser) -> bool {
        if !label.stance.is_known() {
            return false;
        }
        match self.0.entry(user.into()) {
            std::collections::btree_map::Entry::Occupied(_) => false,
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(label);
                true
            }
        }
    }

    pub fn get(&self, user: &str) -> Option<&LabeledUser> {
        self.0.get(user)
    }

    pub fn contains(&self, user: &str) -> bool {
        self.0.contains_key(user)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &LabeledUser)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn count(&self, source: LabelSource) -> usize {
        self.0.values().filter(|l| l.source == source).count()
    }

    /// Stances aligned with `ids`; unlabeled ids are unknown.
    pub fn to_vector(&self, ids: &[String]) -> StanceVector {
        let mut v = StanceVector::unknown(ids.to_vec());
        for (i, id) in ids.iter().enumerate() {
            if let Some(l) = self.0.get(id) {
                v.set(i, l.stance, l.confidence);
            }
        }
        v
    }

    pub fn write_csv(&self, path: &std::path::Path) -> Result<()> {
        use std::io::Write;
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        let mut body = String::from("user,stance,confidence,source\n");
        for (id, l) in self.iter() {
            body.push_str(&format!(
                "{},{},{},{}\n",
                crate::propagation::csv_field(id),
                l.stance.value(),
                l.confidence,
                l.source.as_str()
            ));
        }
        w.write_all(body.as_bytes())
            .and_then(|_| w.flush())
            .map_err(|e| Error::io(path, e))
    }
}

/// Proposals from both views for users outside `labeled`. Each view offers
/// its top `⌈k · n⌉` known-stance candidates by confidence (ties broken by
/// id). When the views disagree on a user the more confident one wins; an
/// exact tie drops the user. The result is sorted by user id.
pub fn add_new_labeled_examples(
    network: &StanceVector,
    text: &StanceVector,
    k: f64,
    labeled: &LabeledUserSet,
) -> Vec<(String, LabeledUser)> {
    let network_top = top_candidates(network, k, labeled, LabelSource::Network);
    let text_top = top_candidates(text, k, labeled, LabelSource::Text);
    let mut merged: BTreeMap<String, Option<LabeledUser>> = BTreeMap::new();
    for (id, proposal) in network_top.into_iter().chain(text_top) {
        match merged.get_mut(&id) {
            None => {
                merged.insert(id, Some(proposal));
            }
            Some(slot) => {
                let Some(current) = *slot else { continue };
                if current.stance == proposal.stance {
                    if proposal.confidence > current.confidence {
                        *slot = Some(proposal);
                    }
                } else if proposal.confidence > current.confidence {
                    *slot = Some(proposal);
                } else if proposal.confidence == current.confidence {
                    *slot = None;
                }
            }
        }
    }
    merged.into_iter().filter_map(|(id, l)| l.map(|l| (id, l))).collect()
}

fn top_candidates(
    view: &StanceVector,
    k: f64,
    labeled: &LabeledUserSet,
    source: LabelSource,
) -> Vec<(String, LabeledUser)> {
    let mut candidates: Vec<(&str, Stance, f64)> = view
        .iter()
        .filter(|&(id, s, _)| s.is_known() && !labeled.contains(id))
        .collect();
    candidates.sort_by(|a, b| b.2.total_cmp(&a.2).then_with(|| a.0.cmp(b.0)));
    let take = (k * candidates.len() as f64).ceil() as usize;
    candidates
        .into_iter()
        .take(take)
        .map(|(id, stance, confidence)| {
            (
                id.to_string(),
                LabeledUser {
                    stance,
                    confidence,
                    source,
                },
            )
        })
        .collect()
}

/// Combines the text view `(st, ct)` and the network view `(si, ci)`: unknown
/// when both confidences are zero, otherwise the view with the higher
/// confidence, text winning ties.
pub fn joint_stance(st: Stance, ct: f64, si: Stance, ci: f64) -> Stance {
    if ct == 0.0 && ci == 0.0 {
        Stance::Unknown
    } else if ct >= ci {
        st
    } else {
        si
    }
}

/// Applies [`joint_stance`] per user. Both vectors must share ids. The
/// confidence is the one of the view that was picked.
pub fn joint_table(text: &StanceVector, network: &StanceVector) -> StanceTable {
    assert_eq!(text.ids(), network.ids(), "views must be aligned");
    let mut out = StanceVector::unknown(text.ids().to_vec());
    for i in 0..text.len() {
        let (st, ct) = (text.stance(i), text.confidence(i));
        let (si, ci) = (network.stance(i), network.confidence(i));
        let s = joint_stance(st, ct, si, ci);
        if s.is_known() {
            out.set(i, s, if ct >= ci { ct } else { ci });
        }
    }
    out
}

/// Tweet-level features for every user, fitted once on the whole corpus.
#[derive(Debug, Clone)]
pub struct TextView {
    users: Vec<String>,
    features: Vec<Vec<SparseVector>>,
    dim: usize,
}

impl TextView {
    /// `users` fixes the output order; users without documents get no
    /// prediction.
    pub fn new(users: &[String], docs: &BTreeMap<String, Vec<String>>, config: &VocabularyConfig) -> Result<Self> {
        let all: Vec<&str> = docs.values().flatten().map(String::as_str).collect();
        let vocabulary = if all.is_empty() {
            None
        } else {
            Some(Vocabulary::fit(&all, config)?)
        };
        let features = users
            .iter()
            .map(|u| match (docs.get(u), &vocabulary) {
                (Some(d), Some(v)) => d.iter().map(|t| v.transform(t)).collect(),
                _ => Vec::new(),
            })
            .collect();
        Ok(TextView {
            users: users.to_vec(),
            features,
            dim: vocabulary.map_or(0, |v| v.len()),
        })
    }

    /// Trains on every tweet of every labeled user (labelled with the
    /// user's stance) and aggregates tweet scores per user. If the labeled
    /// users' tweets cover only one class, every user stays unknown.
    pub fn predict(&self, labeled: &LabeledUserSet, theta_t: f64, config: TrainConfig) -> Result<StanceVector> {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (u, feats) in self.users.iter().zip(&self.features) {
            if let Some(l) = labeled.get(u) {
                for x in feats {
                    xs.push(x.clone());
                    ys.push(l.stance == Stance::Pro);
                }
            }
        }
        let mut out = StanceVector::unknown(self.users.clone());
        let model = match LinearModel::train(&xs, &ys, self.dim, config) {
            Ok(m) => m,
            Err(Error::SingleClass(_) | Error::EmptyTrainingSet) => return Ok(out),
            Err(e) => return Err(e),
        };
        for (i, feats) in self.features.iter().enumerate() {
            let scores: Vec<f64> = feats.iter().map(|x| model.score(x)).collect();
            let (s, c) = aggregate_scores(&scores, theta_t);
            out.set(i, s, c);
        }
        Ok(out)
    }
}

/// Agreement of a stance table with gold labels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GoldMetrics {
    /// Share of gold users with a known stance.
    pub coverage: f64,
    /// Accuracy over covered gold users.
    pub accuracy: f64,
    /// F1-macro over all gold users; unknown counts as a wrong answer.
    pub f1_macro: f64,
}

pub fn gold_metrics(table: &StanceVector, gold: &BTreeMap<String, Stance>) -> Option<GoldMetrics> {
    let mut pred = Vec::new();
    let mut truth = Vec::new();
    for (id, &g) in gold {
        if g.is_known() {
            pred.push(table.stance_of(id));
            truth.push(g);
        }
    }
    if truth.is_empty() {
        return None;
    }
    let covered = pred.iter().filter(|s| s.is_known()).count();
    let correct = pred.iter().zip(&truth).filter(|(p, t)| p == t).count();
    Some(GoldMetrics {
        coverage: covered as f64 / truth.len() as f64,
        accuracy: if covered == 0 {
            0.0
        } else {
            correct as f64 / covered as f64
        },
        f1_macro: f1_macro(&pred, &truth).ok()?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Labeled-set size after this iteration's additions.
    pub labeled: usize,
    pub added_network: usize,
    pub added_text: usize,
    pub network_known: usize,
    pub text_known: usize,
    pub joint_known: usize,
    pub joint: Option<GoldMetrics>,
    pub network: Option<GoldMetrics>,
    pub text: Option<GoldMetrics>,
}

#[derive(Debug, Clone)]
pub struct CoTrainOutput {
    pub table: StanceTable,
    pub network: StanceVector,
    pub text: StanceVector,
    /// Entity stances from the last network pass.
    pub entities: StanceVector,
    pub labeled: LabeledUserSet,
    pub history: Vec<IterationRecord>,
    /// True when the loop stopped because nothing was added.
    pub converged: bool,
}

pub fn cotrain(
    corpus: &TweetCorpus,
    interactions: &BipartiteMatrix,
    seeds: &SeedHashtagSet,
    config: &CoTrainConfig,
    gold: Option<&BTreeMap<String, Stance>>,
) -> Result<CoTrainOutput> {
    cotrain_with(corpus, interactions, seeds, config, gold, |_, _| Ok(()))
}

/// [`cotrain`] with a callback invoked after every iteration with the
/// record and the labeled set as it stands.
pub fn cotrain_with<F>(
    corpus: &TweetCorpus,
    interactions: &BipartiteMatrix,
    seeds: &SeedHashtagSet,
    config: &CoTrainConfig,
    gold: Option<&BTreeMap<String, Stance>>,
    mut on_iteration: F,
) -> Result<CoTrainOutput>
where
    F: FnMut(&IterationRecord, &LabeledUserSet) -> Result<()>,
{
    config.validate()?;
    let users: Vec<String> = corpus.users().iter().cloned().collect();
    let matrix = interactions.reindex_rows(&users);
    if matrix.nnz() == 0 {
        return Err(Error::EmptyMatrix);
    }
    let seeded = seed_user_stance(&matrix, seeds)?;
    if !seeded.values().contains(&Stance::Pro) {
        return Err(Error::OneSidedSeeds("pro"));
    }
    if !seeded.values().contains(&Stance::Anti) {
        return Err(Error::OneSidedSeeds("anti"));
    }
    let mut labeled = LabeledUserSet::new();
    for (id, stance, confidence) in seeded.iter() {
        labeled.insert(
            id,
            LabeledUser {
                stance,
                confidence,
                source: LabelSource::Seed,
            },
        );
    }

    let docs = extract_user_documents(corpus);
    let text_view = TextView::new(&users, &docs, &config.vocabulary)?;
    let propagation = config.network();
    let mut history = Vec::new();
    let mut converged = false;
    let mut last = None;
    for iteration in 1..=config.max_iterations {
        let current = labeled.to_vector(&users);
        let clamped: Vec<(usize, Stance, f64)> = (0..current.len())
            .filter(|&i| current.stance(i).is_known())
            .map(|i| (i, current.stance(i), current.confidence(i)))
            .collect();
        let (entities, network) = propagation.run(&matrix, &current, &clamped)?;
        let text = text_view.predict(&labeled, config.theta_t, config.train)?;

        let additions = add_new_labeled_examples(&network, &text, config.mix_k, &labeled);
        let mut added_network = 0;
        let mut added_text = 0;
        for (id, l) in additions {
            if labeled.insert(id, l) {
                match l.source {
                    LabelSource::Network => added_network += 1,
                    _ => added_text += 1,
                }
            }
        }
        let joint = joint_table(&text, &network);
        let record = IterationRecord {
            iteration,
            labeled: labeled.len(),
            added_network,
            added_text,
            network_known: network.known_count(),
            text_known: text.known_count(),
            joint_known: joint.known_count(),
            joint: gold.and_then(|g| gold_metrics(&joint, g)),
            network: gold.and_then(|g| gold_metrics(&network, g)),
            text: gold.and_then(|g| gold_metrics(&text, g)),
        };
        on_iteration(&record, &labeled)?;
        history.push(record);
        last = Some((joint, network, text, entities));
        if added_network + added_text == 0 {
            converged = true;
            break;
        }
    }
    let (table, network, text, entities) = last.expect("at least one iteration");
    Ok(CoTrainOutput {
        table,
        network,
        text,
        entities,
        labeled,
        history,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Tweet;
    use crate::graph::build_user_hashtag_matrix;

    fn vec_of(entries: &[(&str, i8, f64)]) -> StanceVector {
        StanceVector::from_parts(
            entries.iter().map(|e| e.0.to_string()).collect(),
            entries.iter().map(|e| Stance::try_from(e.1).unwrap()).collect(),
            entries.iter().map(|e| e.2).collect(),
        )
    }

    #[test]
    fn joint_stance_examples() {
        use Stance::*;
        assert_eq!(joint_stance(Unknown, 0.0, Unknown, 0.0), Unknown);
        assert_eq!(joint_stance(Pro, 0.9, Anti, 0.5), Pro);
        assert_eq!(joint_stance(Pro, 0.3, Anti, 0.8), Anti);
        // ties go to text
        assert_eq!(joint_stance(Anti, 0.6, Pro, 0.6), Anti);
        assert_eq!(joint_stance(Unknown, 0.0, Pro, 0.4), Pro);
    }

    #[test]
    fn joint_stance_grid() {
        let stances = [Stance::Anti, Stance::Unknown, Stance::Pro];
        let grid: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
        for &st in &stances {
            for &si in &stances {
                for &ct in &grid {
                    for &ci in &grid {
                        let expected = match () {
                            _ if ct == 0.0 && ci == 0.0 => Stance::Unknown,
                            _ if ct >= ci => st,
                            _ => si,
                        };
                        assert_eq!(joint_stance(st, ct, si, ci), expected);
                    }
                }
            }
        }
    }

    #[test]
    fn takes_ceiling_share_of_candidates() {
        let entries: Vec<(String, i8, f64)> = (0..10).map(|i| (format!("u{i}"), 1, 0.5 + i as f64 / 100.0)).collect();
        let refs: Vec<(&str, i8, f64)> = entries.iter().map(|(a, b, c)| (a.as_str(), *b, *c)).collect();
        let network = vec_of(&refs);
        let text = StanceVector::unknown(network.ids().to_vec());
        let added = add_new_labeled_examples(&network, &text, 0.2, &LabeledUserSet::new());
        let ids: Vec<&str> = added.iter().map(|(id, _)| id.as_str()).collect();
        assert_eq!(ids, ["u8", "u9"]);
        assert!(added.iter().all(|(_, l)| l.source == LabelSource::Network));
        // 0.21 of 10 rounds up to 3
        assert_eq!(
            add_new_labeled_examples(&network, &text, 0.21, &LabeledUserSet::new()).len(),
            3
        );
    }

    #[test]
    fn conflicts_go_to_the_more_confident_view() {
        let network = vec_of(&[("a", 1, 0.9), ("b", 1, 0.5)]);
        let text = vec_of(&[("a", -1, 0.6), ("b", -1, 0.5)]);
        let added = add_new_labeled_examples(&network, &text, 1.0, &LabeledUserSet::new());
        assert_eq!(added.len(), 1);
        assert_eq!(added[0].0, "a");
        assert_eq!(added[0].1.stance, Stance::Pro);
        assert_eq!(added[0].1.source, LabelSource::Network);
    }

    #[test]
    fn no_candidates_no_additions() {
        let network = vec_of(&[("a", 1, 0.9), ("b", 0, 0.0)]);
        let text = vec_of(&[("a", -1, 0.6), ("b", 0, 0.0)]);
        let mut ul = LabeledUserSet::new();
        ul.insert(
            "a",
            LabeledUser {
                stance: Stance::Anti,
                confidence: 1.0,
                source: LabelSource::Seed,
            },
        );
        assert!(add_new_labeled_examples(&network, &text, 1.0, &ul).is_empty());
        // existing entries are never replaced
        assert!(!ul.insert(
            "a",
            LabeledUser {
                stance: Stance::Pro,
                confidence: 1.0,
                source: LabelSource::Network
            }
        ));
        assert_eq!(ul.get("a").unwrap().stance, Stance::Anti);
    }

    fn tw(id: usize, user: &str, text: &str) -> Tweet {
        Tweet::new(format!("t{id}"), user, text, None, None, None, "ev")
    }

    /// Two communities with their own hashtags and words; `seed_a` and
    /// `seed_b` are used by the first two users of each side.
    fn two_sides(per_side: usize) -> (TweetCorpus, BTreeMap<String, Stance>) {
        let mut tweets = Vec::new();
        let mut gold = BTreeMap::new();
        let mut id = 0;
        for side in ["a", "b"] {
            for u in 0..per_side {
                let user = format!("{side}{u:02}");
                gold.insert(user.clone(), if side == "a" { Stance::Pro } else { Stance::Anti });
                for j in 0..4 {
                    let tag = format!("#{side}tag{}", (u + j) % 5);
                    let seed = if u < 2 && j == 0 {
                        format!(" #seed_{side}")
                    } else {
                        String::new()
                    };
                    let text = format!("{side}word{} {side}word{} {tag}{seed}", j % 3, (u + j) % 4);
                    tweets.push(tw(id, &user, &text));
                    id += 1;
                }
            }
        }
        (TweetCorpus::from_tweets(tweets), gold)
    }

    fn seeds() -> SeedHashtagSet {
        SeedHashtagSet::parse("seed_a:pro,seed_b:anti").unwrap()
    }

    #[test]
    fn recovers_two_sides() {
        let (corpus, gold) = two_sides(12);
        let h = build_user_hashtag_matrix(&corpus, 50, &seeds().hashtags()).unwrap();
        let out = cotrain(&corpus, &h, &seeds(), &CoTrainConfig::default(), Some(&gold)).unwrap();
        let m = gold_metrics(&out.table, &gold).unwrap();
        assert_eq!(m.accuracy, 1.0);
        assert!(m.coverage > 0.9, "{m:?}");
        for w in out.history.windows(2) {
            assert!(w[1].labeled >= w[0].labeled);
        }
        assert_eq!(out.labeled.count(LabelSource::Seed), 4);
        for (id, l) in out.labeled.iter() {
            assert_eq!(l.stance, gold[id]);
        }
    }

    #[test]
    fn single_iteration_is_one_round_of_each_step() {
        let (corpus, _) = two_sides(8);
        let h = build_user_hashtag_matrix(&corpus, 50, &seeds().hashtags()).unwrap();
        let cfg = CoTrainConfig {
            max_iterations: 1,
            ..CoTrainConfig::default()
        };
        let out = cotrain(&corpus, &h, &seeds(), &cfg, None).unwrap();

        let users: Vec<String> = corpus.users().iter().cloned().collect();
        let h = h.reindex_rows(&users);
        let seeded = seed_user_stance(&h, &seeds()).unwrap();
        let mut ul = LabeledUserSet::new();
        for (id, s, c) in seeded.iter() {
            ul.insert(
                id,
                LabeledUser {
                    stance: s,
                    confidence: c,
                    source: LabelSource::Seed,
                },
            );
        }
        let clamped: Vec<_> = (0..seeded.len())
            .filter(|&i| seeded.stance(i).is_known())
            .map(|i| (i, seeded.stance(i), seeded.confidence(i)))
            .collect();
        let (_, network) = cfg.network().run(&h, &seeded, &clamped).unwrap();
        let view = TextView::new(&users, &extract_user_documents(&corpus), &cfg.vocabulary).unwrap();
        let text = view.predict(&ul, cfg.theta_t, cfg.train).unwrap();
        for (id, l) in add_new_labeled_examples(&network, &text, cfg.mix_k, &ul) {
            ul.insert(id, l);
        }
        assert_eq!(out.network, network);
        assert_eq!(out.text, text);
        assert_eq!(out.table, joint_table(&text, &network));
        assert_eq!(out.labeled, ul);
        assert_eq!(out.history.len(), 1);
    }

    #[test]
    fn stops_when_nothing_passes_thresholds() {
        // seed users share nothing with the rest, and nobody else tweets
        // text that survives min_df
        let tweets = vec![
            tw(0, "p", "#seed_a"),
            tw(1, "q", "#seed_b"),
            tw(2, "x", "#other1 lonely"),
            tw(3, "y", "#other2 words"),
        ];
        let corpus = TweetCorpus::from_tweets(tweets);
        let h = build_user_hashtag_matrix(&corpus, 10, &seeds().hashtags()).unwrap();
        let out = cotrain(&corpus, &h, &seeds(), &CoTrainConfig::default(), None).unwrap();
        assert!(out.converged);
        assert_eq!(out.history.len(), 1);
        assert_eq!(out.labeled.len(), 2);
        assert_eq!(out.labeled.count(LabelSource::Seed), 2);
    }

    #[test]
    fn full_mixing_reaches_two_hop_neighbours() {
        let tweets = vec![
            tw(0, "p", "#seed_a #x"),
            tw(1, "q", "#seed_b #y"),
            tw(2, "r", "#x"),
            tw(3, "s", "#y #z"),
            tw(4, "t", "#z"),
            tw(5, "v", "#w"),
        ];
        let corpus = TweetCorpus::from_tweets(tweets);
        let h = build_user_hashtag_matrix(&corpus, 10, &seeds().hashtags()).unwrap();
        let cfg = CoTrainConfig {
            theta_u: 0.0,
            theta_h: 0.0,
            theta_t: 0.0,
            mix_k: 1.0,
            max_iterations: 1,
            ..CoTrainConfig::default()
        };
        let out = cotrain(&corpus, &h, &seeds(), &cfg, None).unwrap();
        // r and s are two hops from a seed user; t is four hops away
        assert_eq!(out.labeled.get("r").unwrap().stance, Stance::Pro);
        assert_eq!(out.labeled.get("s").unwrap().stance, Stance::Anti);
        assert!(!out.network.stance_of("t").is_known());
        assert!(!out.network.stance_of("v").is_known());
    }

    #[test]
    fn deterministic() {
        let (corpus, gold) = two_sides(10);
        let h = build_user_hashtag_matrix(&corpus, 50, &seeds().hashtags()).unwrap();
        let a = cotrain(&corpus, &h, &seeds(), &CoTrainConfig::default(), Some(&gold)).unwrap();
        let b = cotrain(&corpus, &h, &seeds(), &CoTrainConfig::default(), Some(&gold)).unwrap();
        assert_eq!(a.table, b.table);
        assert_eq!(a.history, b.history);
    }

    #[test]
    fn input_errors() {
        let (corpus, _) = two_sides(4);
        let h = build_user_hashtag_matrix(&corpus, 50, &seeds().hashtags()).unwrap();
        let one_sided = SeedHashtagSet::parse("seed_a:pro").unwrap();
        assert!(matches!(
            cotrain(&corpus, &h, &one_sided, &CoTrainConfig::default(), None),
            Err(Error::OneSidedSeeds("anti"))
        ));
        let empty = BipartiteMatrix::empty(vec![]);
        assert!(matches!(
            cotrain(&corpus, &empty, &seeds(), &CoTrainConfig::default(), None),
            Err(Error::EmptyMatrix)
        ));
        let bad = CoTrainConfig {
            mix_k: 0.0,
            ..CoTrainConfig::default()
        };
        assert!(cotrain(&corpus, &h, &seeds(), &bad, None).is_err());
    }
}
