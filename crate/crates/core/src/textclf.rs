//! TF-IDF features, a linear logistic-loss classifier, and per-user stance
//! aggregation over a user's tweets.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::propagation::Stance;

/// Lowercases and splits on non-alphanumerics. A `#` directly before a
/// word is kept, so hashtags stay distinct terms (`#guncontrolnow`).
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    let mut hashtag = false;
    let flush = |current: &mut String, hashtag: &mut bool, tokens: &mut Vec<String>| {
        if !current.is_empty() {
            tokens.push(if *hashtag {
                format!("#{current}")
            } else {
                current.clone()
            });
        }
        current.clear();
        *hashtag = false;
    };
    for c in text.chars() {
        if c.is_alphanumeric() || (hashtag && c == '_') {
            current.extend(c.to_lowercase());
        } else {
            flush(&mut current, &mut hashtag, &mut tokens);
            hashtag = c == '#';
        }
    }
    flush(&mut current, &mut hashtag, &mut tokens);
    tokens
}

/// Sparse vector with strictly increasing indices.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SparseVector {
    pub indices: Vec<u32>,
    pub values: Vec<f64>,
}

impl SparseVector {
    pub fn from_pairs(mut pairs: Vec<(u32, f64)>) -> Self {
        pairs.sort_by_key(|&(i, _)| i);
        let mut v = SparseVector::default();
        for (i, x) in pairs {
            if v.indices.last() == Some(&i) {
                *v.values.last_mut().expect("non-empty") += x;
            } else {
                v.indices.push(i);
                v.values.push(x);
            }
        }
        v
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&x| x == 0.0)
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn dot(&self, dense: &[f64]) -> f64 {
        self.indices
            .iter()
            .zip(&self.values)
            .map(|(&i, &x)| dense[i as usize] * x)
            .sum()
    }

    /// Scales to unit L2 norm; the zero vector is left as is.
    pub fn normalized(mut self) -> Self {
        let n = self.norm();
        if n > 0.0 {
            self.values.iter_mut().for_each(|x| *x /= n);
        }
        self
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.indices.iter().copied().zip(self.values.iter().copied())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VocabularyConfig {
    pub min_df: usize,
    pub bigrams: bool,
    /// Terms never admitted to the vocabulary (e.g. seed hashtags, for
    /// leakage studies).
    #[serde(default)]
    pub exclude: BTreeSet<String>,
}

impl Default for VocabularyConfig {
    fn default() -> Self {
        VocabularyConfig {
            min_df: 2,
            bigrams: true,
            exclude: BTreeSet::new(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Vocabulary {
    terms: Vec<String>,
    document_frequency: Vec<usize>,
    idf: Vec<f64>,
    n_documents: usize,
    config: VocabularyConfig,
    #[serde(skip)]
    index: HashMap<String, u32>,
}

impl PartialEq for Vocabulary {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms
            && self.document_frequency == other.document_frequency
            && self.idf == other.idf
            && self.n_documents == other.n_documents
            && self.config == other.config
    }
}

impl Vocabulary {
    /// Keeps terms with document frequency ≥ `min_df`, indexed in
    /// lexicographic order, with smoothed IDF `ln((1+N)/(1+df)) + 1`.
    pub fn fit<S: AsRef<str>>(documents: &[S], config: &VocabularyConfig) -> Result<Self> {
        if documents.is_empty() {
            return Err(Error::NoDocuments);
        }
        let mut df: BTreeMap<String, usize> = BTreeMap::new();
        for doc in documents {
            let mut terms = doc_terms(doc.as_ref(), config.bigrams);
            terms.sort_unstable();
            terms.dedup();
            for t in terms {
                *df.entry(t).or_insert(0) += 1;
            }
        }
        let n = documents.len();
        let mut vocab = Vocabulary {
            terms: Vec::new(),
            document_frequency: Vec::new(),
            idf: Vec::new(),
            n_documents: n,
            config: config.clone(),
            index: HashMap::new(),
        };
        for (term, count) in df {
            if count >= config.min_df.max(1) && !config.exclude.contains(&term) {
                vocab.terms.push(term);
                vocab.document_frequency.push(count);
                vocab.idf.push(((1.0 + n as f64) / (1.0 + count as f64)).ln() + 1.0);
            }
        }
        vocab.rebuild_index();
        Ok(vocab)
    }

    pub(crate) fn rebuild_index(&mut self) {
        self.index = self
            .terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn n_documents(&self) -> usize {
        self.n_documents
    }

    pub fn position(&self, term: &str) -> Option<usize> {
        self.index.get(term).map(|&i| i as usize)
    }

    pub fn idf(&self, term: &str) -> Option<f64> {
        self.position(term).map(|i| self.idf[i])
    }

    pub fn document_frequency(&self, term: &str) -> Option<usize> {
        self.position(term).map(|i| self.document_frequency[i])
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    /// L2-normalized TF-IDF vector; out-of-vocabulary terms are dropped.
    pub fn transform(&self, doc: &str) -> SparseVector {
        let pairs = doc_terms(doc, self.config.bigrams)
            .into_iter()
            .filter_map(|t| self.index.get(&t).map(|&i| (i, self.idf[i as usize])))
            .collect();
        SparseVector::from_pairs(pairs).normalized()
    }

    #[cfg(test)]
    pub(crate) fn with_idf(terms: &[(&str, f64)]) -> Self {
        let mut v = Vocabulary {
            terms: terms.iter().map(|(t, _)| t.to_string()).collect(),
            document_frequency: vec![1; terms.len()],
            idf: terms.iter().map(|&(_, w)| w).collect(),
            n_documents: 1,
            config: VocabularyConfig {
                min_df: 1,
                bigrams: false,
                exclude: BTreeSet::new(),
            },
            index: HashMap::new(),
        };
        v.rebuild_index();
        v
    }
}

fn doc_terms(doc: &str, bigrams: bool) -> Vec<String> {
    let tokens = tokenize(doc);
    let mut terms = Vec::with_capacity(tokens.len() * 2);
    if bigrams {
        terms.extend(tokens.windows(2).map(|w| format!("{} {}", w[0], w[1])));
    }
    terms.extend(tokens);
    terms
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// L2 penalty on the weights (not the bias).
    pub l2: f64,
    pub epochs: usize,
    pub learning_rate: f64,
    /// Weight examples by inverse class frequency.
    pub balance_classes: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            l2: 1e-2,
            epochs: 200,
            learning_rate: 1.0,
            balance_classes: true,
        }
    }
}

/// Linear decision function `w·x + b`; positive scores predict the
/// positive class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub config: TrainConfig,
}

impl LinearModel {
    /// Minimizes the (optionally class-balanced) mean logistic loss plus an
    /// L2 penalty with full-batch Nesterov gradient descent. No sampling is involved, so training
    /// is deterministic. `positive[i]` is the class of `features[i]`.
    pub fn train(features: &[SparseVector], positive: &[bool], dim: usize, config: TrainConfig) -> Result<Self> {
        assert_eq!(features.len(), positive.len());
        if features.is_empty() {
            return Err(Error::EmptyTrainingSet);
        }
        let n_pos = positive.iter().filter(|&&p| p).count();
        let n_neg = positive.len() - n_pos;
        if n_pos == 0 {
            return Err(Error::SingleClass("negative"));
        }
        if n_neg == 0 {
            return Err(Error::SingleClass("positive"));
        }
        let n = positive.len() as f64;
        let (w_pos, w_neg) = if config.balance_classes {
            (n / (2.0 * n_pos as f64), n / (2.0 * n_neg as f64))
        } else {
            (1.0, 1.0)
        };

        // Nesterov-accelerated full-batch gradient descent; `ahead` is the
        // look-ahead point where the gradient is taken. With L2-normalized
        // blocks (at most three) and weights summing to n, the loss is
        // 1-smooth, so a unit step is stable.
        let mut weights = vec![0.0; dim + 1];
        let mut ahead = weights.clone();
        let mut prev = weights.clone();
        let mut grad = vec![0.0; dim + 1];
        for epoch in 0..config.epochs {
            grad.iter_mut().for_each(|g| *g = 0.0);
            for (x, &pos) in features.iter().zip(positive) {
                let (y, cw) = if pos { (1.0, w_pos) } else { (-1.0, w_neg) };
                let margin = y * (x.dot(&ahead[..dim]) + ahead[dim]);
                // d/ds log(1 + exp(-y s)) = -y * sigmoid(-y s)
                let g = -y * cw * sigmoid(-margin) / n;
                for (i, v) in x.iter() {
                    grad[i as usize] += g * v;
                }
                grad[dim] += g;
            }
            for j in 0..dim {
                grad[j] += config.l2 * ahead[j];
            }
            prev.copy_from_slice(&weights);
            for j in 0..=dim {
                weights[j] = ahead[j] - config.learning_rate * grad[j];
            }
            let momentum = epoch as f64 / (epoch as f64 + 3.0);
            for j in 0..=dim {
                ahead[j] = weights[j] + momentum * (weights[j] - prev[j]);
            }
        }
        let bias = weights.pop().expect("bias slot");
        Ok(LinearModel { weights, bias, config })
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn score(&self, x: &SparseVector) -> f64 {
        x.dot(&self.weights) + self.bias
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Tweet-level stance classifier: TF-IDF vocabulary plus a linear model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearTextModel {
    pub version: u32,
    pub vocabulary: Vocabulary,
    pub model: LinearModel,
}

impl LinearTextModel {
    /// Trains on pre-transformed features; `labels` are Pro/Anti stances.
    pub fn train(
        vocabulary: Vocabulary,
        features: &[SparseVector],
        labels: &[Stance],
        config: TrainConfig,
    ) -> Result<Self> {
        if labels.iter().any(|s| !s.is_known()) {
            return Err(Error::param("labels", "training labels must be pro or anti"));
        }
        let positive: Vec<bool> = labels.iter().map(|&s| s == Stance::Pro).collect();
        let model = LinearModel::train(features, &positive, vocabulary.len(), config)?;
        Ok(LinearTextModel {
            version: MODEL_FORMAT_VERSION,
            vocabulary,
            model,
        })
    }

    /// Fits a vocabulary on `docs` and trains on them.
    pub fn fit<S: AsRef<str>>(
        docs: &[S],
        labels: &[Stance],
        vocab_config: &VocabularyConfig,
        config: TrainConfig,
    ) -> Result<Self> {
        let vocabulary = Vocabulary::fit(docs, vocab_config)?;
        let features: Vec<SparseVector> = docs.iter().map(|d| vocabulary.transform(d.as_ref())).collect();
        LinearTextModel::train(vocabulary, &features, labels, config)
    }

    /// Positive means pro.
    pub fn predict_score(&self, doc: &str) -> f64 {
        self.model.score(&self.vocabulary.transform(doc))
    }

    pub fn aggregate_user_stance<S: AsRef<str>>(&self, user_docs: &[S], theta_t: f64) -> (Stance, f64) {
        let scores: Vec<f64> = user_docs.iter().map(|d| self.predict_score(d.as_ref())).collect();
        aggregate_scores(&scores, theta_t)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        save_json(self, path)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut model: LinearTextModel = load_json(path)?;
        check_version(model.version, path)?;
        model.vocabulary.rebuild_index();
        Ok(model)
    }
}

pub(crate) fn check_version(version: u32, path: &Path) -> Result<()> {
    if version == MODEL_FORMAT_VERSION {
        Ok(())
    } else {
        Err(Error::parse(
            "model file",
            format!(
                "{}: format version {version}, expected {MODEL_FORMAT_VERSION}",
                path.display()
            ),
        ))
    }
}

pub(crate) fn save_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    serde_json::to_writer(BufWriter::new(file), value).map_err(|e| Error::parse("json output", e))
}

pub(crate) fn load_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_reader(BufReader::new(file)).map_err(|e| Error::parse(path.display().to_string(), e))
}

/// Turns per-tweet scores into a user stance: pro when the share of
/// positive scores exceeds `theta_t`, otherwise anti when the share of
/// negative scores does. Zero scores count toward neither side. The
/// confidence is the winning share.
pub fn aggregate_scores(scores: &[f64], theta_t: f64) -> (Stance, f64) {
    if scores.is_empty() {
        return (Stance::Unknown, 0.0);
    }
    let m = scores.len() as f64;
    let pro = scores.iter().filter(|&&s| s > 0.0).count() as f64 / m;
    let con = scores.iter().filter(|&&s| s < 0.0).count() as f64 / m;
    if pro > theta_t {
        (Stance::Pro, pro)
    } else if con > theta_t {
        (Stance::Anti, con)
    } else {
        (Stance::Unknown, 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::seq::IndexedRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unigram(min_df: usize) -> VocabularyConfig {
        VocabularyConfig {
            min_df,
            bigrams: false,
            exclude: BTreeSet::new(),
        }
    }

    #[test]
    fn tokenizer_keeps_hashtags() {
        assert_eq!(
            tokenize("Gun-control NOW! #GunControlNow #2a_defenders x"),
            ["gun", "control", "now", "#guncontrolnow", "#2a_defenders", "x"]
        );
        assert!(tokenize("  ...  ").is_empty());
    }

    #[test]
    fn vocabulary_min_df() {
        let docs = ["a b", "a c"];
        let v = Vocabulary::fit(&docs, &unigram(1)).unwrap();
        assert_eq!(v.terms(), ["a", "b", "c"]);
        let v = Vocabulary::fit(&docs, &unigram(2)).unwrap();
        assert_eq!(v.terms(), ["a"]);
        assert!(matches!(
            Vocabulary::fit::<&str>(&[], &unigram(1)),
            Err(Error::NoDocuments)
        ));
        let with_bigrams = Vocabulary::fit(&["a b", "a b c"], &VocabularyConfig::default()).unwrap();
        assert_eq!(with_bigrams.terms(), ["a", "a b", "b"]);
        let mut excluded = unigram(1);
        excluded.exclude.insert("b".into());
        assert_eq!(Vocabulary::fit(&docs, &excluded).unwrap().terms(), ["a", "c"]);
    }

    #[test]
    fn idf_of_ubiquitous_term_is_one() {
        let docs: Vec<String> = (0..1000).map(|i| format!("the w{i}")).collect();
        let v = Vocabulary::fit(&docs, &unigram(1)).unwrap();
        assert_eq!(v.idf("the"), Some(1.0));
        assert_eq!(v.document_frequency("the"), Some(1000));
        let expected = (1001.0f64 / 2.0).ln() + 1.0;
        assert!((v.idf("w7").unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn transform_examples() {
        let v = Vocabulary::with_idf(&[("a", 1.0), ("b", 2.0)]);
        assert!(v.transform("zzz qqq").is_zero());
        let single = v.transform("b");
        assert_eq!(single.values, vec![1.0]);
        // counts [2, 1] times idf [1, 2] = [2, 2] before normalization
        let ab = v.transform("a a b");
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((ab.values[0] - h).abs() < 1e-12 && (ab.values[1] - h).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn transform_has_unit_or_zero_norm(doc in "[abcxyz ]{0,30}") {
            let v = Vocabulary::fit(&["a b c", "a x", "b y"], &unigram(1)).unwrap();
            let n = v.transform(&doc).norm();
            prop_assert!(n == 0.0 || (n - 1.0).abs() < 1e-12);
        }

        #[test]
        fn aggregate_never_below_threshold(
            scores in proptest::collection::vec(-1.0f64..1.0, 0..20),
            theta in 0.0f64..1.0,
        ) {
            let (s, c) = aggregate_scores(&scores, theta);
            if s.is_known() {
                prop_assert!(c > theta);
            } else {
                prop_assert_eq!(c, 0.0);
            }
        }
    }

    #[test]
    fn aggregation_examples() {
        let mut scores = vec![1.0; 8];
        scores.extend([-1.0, -1.0]);
        assert_eq!(aggregate_scores(&scores, 0.7), (Stance::Pro, 0.8));
        let split = [1.0, 1.0, 1.0, -1.0, -1.0, -1.0, 1.0, 1.0, -1.0, -1.0];
        assert_eq!(aggregate_scores(&split, 0.7), (Stance::Unknown, 0.0));
        assert_eq!(aggregate_scores(&[], 0.7), (Stance::Unknown, 0.0));
        // zero scores dilute both shares
        assert_eq!(aggregate_scores(&[-1.0, -1.0, 0.0], 0.7), (Stance::Unknown, 0.0));
        assert_eq!(aggregate_scores(&[-1.0, -1.0, -1.0, -1.0], 0.7), (Stance::Anti, 1.0));
    }

    fn train_docs(docs: &[&str], labels: &[Stance]) -> LinearTextModel {
        LinearTextModel::fit(docs, labels, &unigram(1), TrainConfig::default()).unwrap()
    }

    #[test]
    fn separable_pair() {
        let m = train_docs(&["love it", "hate it"], &[Stance::Pro, Stance::Anti]);
        assert!(m.predict_score("love it") > 0.0);
        assert!(m.predict_score("hate it") < 0.0);
        assert_eq!(m.predict_score("unseen words"), m.model.bias);
    }

    #[test]
    fn training_errors() {
        let v = Vocabulary::fit(&["a"], &unigram(1)).unwrap();
        let x = vec![v.transform("a")];
        assert!(matches!(
            LinearTextModel::train(v.clone(), &x, &[Stance::Pro], TrainConfig::default()),
            Err(Error::SingleClass(_))
        ));
        assert!(matches!(
            LinearTextModel::train(v, &[], &[], TrainConfig::default()),
            Err(Error::EmptyTrainingSet)
        ));
    }

    /// Two classes with disjoint topic vocabularies plus shared filler.
    fn synthetic(n: usize, seed: u64) -> (Vec<String>, Vec<Stance>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pro: Vec<String> = (0..20).map(|i| format!("pro{i}")).collect();
        let anti: Vec<String> = (0..20).map(|i| format!("anti{i}")).collect();
        let filler: Vec<String> = (0..30).map(|i| format!("w{i}")).collect();
        let mut docs = Vec::new();
        let mut labels = Vec::new();
        for i in 0..n {
            let (lex, label) = if i % 2 == 0 {
                (&pro, Stance::Pro)
            } else {
                (&anti, Stance::Anti)
            };
            let mut words: Vec<&str> = (0..2).map(|_| lex.choose(&mut rng).unwrap().as_str()).collect();
            for _ in 0..rng.random_range(2..6) {
                words.push(filler.choose(&mut rng).unwrap());
            }
            docs.push(words.join(" "));
            labels.push(label);
        }
        (docs, labels)
    }

    #[test]
    fn synthetic_corpus_is_learned() {
        let (docs, labels) = synthetic(200, 5);
        let m = LinearTextModel::fit(&docs, &labels, &unigram(1), TrainConfig::default()).unwrap();
        let correct = docs
            .iter()
            .zip(&labels)
            .filter(|(d, l)| Stance::from_sign(m.predict_score(d)) == **l)
            .count();
        assert!(correct as f64 / 200.0 >= 0.95, "accuracy {}", correct as f64 / 200.0);
        assert!(m.predict_score("pro1 pro2 pro3 pro4") > 0.0);
        assert!(m.predict_score("anti1 anti5") < 0.0);
    }

    #[test]
    fn duplication_keeps_decisions() {
        let (docs, labels) = synthetic(60, 9);
        let vocab = Vocabulary::fit(&docs, &unigram(1)).unwrap();
        let x: Vec<SparseVector> = docs.iter().map(|d| vocab.transform(d)).collect();
        let once = LinearTextModel::train(vocab.clone(), &x, &labels, TrainConfig::default()).unwrap();
        let x2: Vec<SparseVector> = x.iter().chain(&x).cloned().collect();
        let l2: Vec<Stance> = labels.iter().chain(&labels).copied().collect();
        let twice = LinearTextModel::train(vocab, &x2, &l2, TrainConfig::default()).unwrap();
        for xi in &x {
            assert_eq!(once.model.score(xi) > 0.0, twice.model.score(xi) > 0.0);
        }
    }

    #[test]
    fn label_flip_negates_predictions() {
        let (docs, labels) = synthetic(60, 3);
        let flipped: Vec<Stance> = labels.iter().map(|s| s.negate()).collect();
        let a = LinearTextModel::fit(&docs, &labels, &unigram(1), TrainConfig::default()).unwrap();
        let b = LinearTextModel::fit(&docs, &flipped, &unigram(1), TrainConfig::default()).unwrap();
        for d in docs.iter().chain([&"pro3 w1".to_string(), &"nothing".to_string()]) {
            let (sa, sb) = (a.predict_score(d), b.predict_score(d));
            assert!((sa + sb).abs() < 1e-9, "{d}: {sa} vs {sb}");
        }
    }

    #[test]
    fn deterministic_and_serializable() {
        let (docs, labels) = synthetic(40, 1);
        let a = LinearTextModel::fit(&docs, &labels, &unigram(1), TrainConfig::default()).unwrap();
        let b = LinearTextModel::fit(&docs, &labels, &unigram(1), TrainConfig::default()).unwrap();
        assert_eq!(a, b);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        a.save(&path).unwrap();
        let back = LinearTextModel::load(&path).unwrap();
        assert_eq!(back, a);
        assert_eq!(back.predict_score(&docs[0]), a.predict_score(&docs[0]));
    }
}
