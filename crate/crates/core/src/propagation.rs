//! Seed labeling from hashtags and two-step linear-threshold propagation
//! over a user × entity matrix.
//!
//! Both directions work on normalized weights: a user→entity pass divides
//! each column by its total weight, an entity→user pass divides each row by
//! its total weight. Thresholds are therefore fractions of an entity's (or a
//! user's) total interaction weight, and comparisons are strict.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{BipartiteMatrix, EntityKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(into = "i8", try_from = "i8")]
pub enum Stance {
    Anti,
    #[default]
    Unknown,
    Pro,
}

impl Stance {
    pub fn value(self) -> i8 {
        match self {
            Stance::Anti => -1,
            Stance::Unknown => 0,
            Stance::Pro => 1,
        }
    }

    pub fn from_sign(x: f64) -> Self {
        if x > 0.0 {
            Stance::Pro
        } else if x < 0.0 {
            Stance::Anti
        } else {
            Stance::Unknown
        }
    }

    pub fn negate(self) -> Self {
        match self {
            Stance::Anti => Stance::Pro,
            Stance::Unknown => Stance::Unknown,
            Stance::Pro => Stance::Anti,
        }
    }

    pub fn is_known(self) -> bool {
        self != Stance::Unknown
    }

    /// Linear threshold rule: +1 above `theta`, −1 below `-theta`, else 0.
    pub fn threshold(sum: f64, theta: f64) -> Self {
        if sum > theta {
            Stance::Pro
        } else if sum < -theta {
            Stance::Anti
        } else {
            Stance::Unknown
        }
    }
}

impl From<Stance> for i8 {
    fn from(s: Stance) -> i8 {
        s.value()
    }
}

impl TryFrom<i8> for Stance {
    type Error = String;

    fn try_from(v: i8) -> std::result::Result<Self, String> {
        match v {
            -1 => Ok(Stance::Anti),
            0 => Ok(Stance::Unknown),
            1 => Ok(Stance::Pro),
            other => Err(format!("stance must be -1, 0 or 1, got {other}")),
        }
    }
}

/// Stance and confidence per id. Confidence is zero exactly when the
/// stance is unknown.
#[derive(Debug, Clone, PartialEq)]
pub struct StanceVector {
    ids: Vec<String>,
    values: Vec<Stance>,
    confidence: Vec<f64>,
    index: HashMap<String, usize>,
}

/// Per-user final stance with confidence.
pub type StanceTable = StanceVector;

impl StanceVector {
    /// All-unknown vector over `ids`.
    pub fn unknown(ids: Vec<String>) -> Self {
        let n = ids.len();
        let index = ids.iter().enumerate().map(|(i, id)| (id.clone(), i)).collect();
        StanceVector {
            ids,
            values: vec![Stance::Unknown; n],
            confidence: vec![0.0; n],
            index,
        }
    }

    pub fn from_parts(ids: Vec<String>, values: Vec<Stance>, confidence: Vec<f64>) -> Self {
        assert_eq!(ids.len(), values.len());
        assert_eq!(ids.len(), confidence.len());
        let mut v = StanceVector::unknown(ids);
        for (i, (s, c)) in values.into_iter().zip(confidence).enumerate() {
            v.set(i, s, c);
        }
        v
    }

    /// Sets entry `i`. Unknown stances always get confidence 0.
    pub fn set(&mut self, i: usize, stance: Stance, confidence: f64) {
        debug_assert!(
            (0.0..=1.0).contains(&confidence),
            "confidence {confidence} out of range"
        );
        debug_assert!(
            !stance.is_known() || confidence > 0.0,
            "known stance needs positive confidence"
        );
        self.values[i] = stance;
        self.confidence[i] = if stance.is_known() { confidence } else { 0.0 };
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn values(&self) -> &[Stance] {
        &self.values
    }

    pub fn confidences(&self) -> &[f64] {
        &self.confidence
    }

    pub fn stance(&self, i: usize) -> Stance {
        self.values[i]
    }

    pub fn confidence(&self, i: usize) -> f64 {
        self.confidence[i]
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn get(&self, id: &str) -> Option<(Stance, f64)> {
        self.position(id).map(|i| (self.values[i], self.confidence[i]))
    }

    pub fn stance_of(&self, id: &str) -> Stance {
        self.get(id).map_or(Stance::Unknown, |(s, _)| s)
    }

    pub fn known_count(&self) -> usize {
        self.values.iter().filter(|s| s.is_known()).count()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Stance, f64)> {
        self.ids
            .iter()
            .zip(&self.values)
            .zip(&self.confidence)
            .map(|((id, &s), &c)| (id.as_str(), s, c))
    }

    /// Same stances over another id list; ids missing here become unknown.
    pub fn aligned_to(&self, ids: &[String]) -> StanceVector {
        let mut out = StanceVector::unknown(ids.to_vec());
        for (i, id) in ids.iter().enumerate() {
            if let Some((s, c)) = self.get(id) {
                out.set(i, s, c);
            }
        }
        out
    }

    /// Writes `id,stance,confidence` rows with a header.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        let io = |e| Error::io(path, e);
        writeln!(out, "id,stance,confidence").map_err(io)?;
        for (id, s, c) in self.iter() {
            writeln!(out, "{},{},{}", csv_field(id), s.value(), c).map_err(io)?;
        }
        out.flush().map_err(io)
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            id: String,
            stance: i8,
            confidence: f64,
        }
        let mut reader = csv::Reader::from_path(path).map_err(|e| Error::parse("stance csv", e))?;
        let mut ids = Vec::new();
        let mut values = Vec::new();
        let mut conf = Vec::new();
        for row in reader.deserialize::<Row>() {
            let row = row.map_err(|e| Error::parse("stance csv", e))?;
            let stance = Stance::try_from(row.stance).map_err(|e| Error::parse("stance csv", e))?;
            if !(0.0..=1.0).contains(&row.confidence) || stance.is_known() != (row.confidence > 0.0) {
                return Err(Error::parse(
                    "stance csv",
                    format!(
                        "row `{}`: confidence {} inconsistent with stance",
                        row.id, row.confidence
                    ),
                ));
            }
            ids.push(row.id);
            values.push(stance);
            conf.push(row.confidence);
        }
        Ok(StanceVector::from_parts(ids, values, conf))
    }
}

pub(crate) fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Hand-labeled hashtags, stored lowercase without `#`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedHashtagSet(BTreeMap<String, Stance>);

impl SeedHashtagSet {
    pub fn new<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, Stance)>,
        S: AsRef<str>,
    {
        let mut map = BTreeMap::new();
        for (tag, stance) in labels {
            let tag = tag.as_ref().trim().trim_start_matches('#').to_lowercase();
            if tag.is_empty() {
                return Err(Error::param("seeds", "empty hashtag"));
            }
            if !stance.is_known() {
                return Err(Error::param("seeds", format!("#{tag} must be pro or anti")));
            }
            match map.insert(tag.clone(), stance) {
                Some(prev) if prev != stance => return Err(Error::ConflictingSeed(tag)),
                _ => {}
            }
        }
        Ok(SeedHashtagSet(map))
    }

    /// Parses `#tag:pro,#other:anti` (also accepts `+1`/`-1`).
    pub fn parse(spec: &str) -> Result<Self> {
        let mut labels = Vec::new();
        for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (tag, label) = item
                .rsplit_once(':')
                .ok_or_else(|| Error::param("seeds", format!("`{item}` is not tag:label")))?;
            labels.push((tag.to_string(), parse_stance_label(label)?));
        }
        SeedHashtagSet::new(labels)
    }

    pub fn get(&self, tag: &str) -> Option<Stance> {
        self.0.get(tag).copied()
    }

    pub fn hashtags(&self) -> Vec<String> {
        self.0.keys().cloned().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Stance)> {
        self.0.iter().map(|(k, &v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn negated(&self) -> Self {
        SeedHashtagSet(self.0.iter().map(|(k, v)| (k.clone(), v.negate())).collect())
    }
}

pub fn parse_stance_label(label: &str) -> Result<Stance> {
    match label.trim().to_ascii_lowercase().as_str() {
        "pro" | "+1" | "1" | "favor" => Ok(Stance::Pro),
        "anti" | "con" | "-1" | "against" => Ok(Stance::Anti),
        other => Err(Error::param("seeds", format!("unknown stance label `{other}`"))),
    }
}

/// Seed labels for every row of `m`: the sign of the user's seed-weighted
/// hashtag sum, with confidence `|pro − anti| / (pro + anti)` over seed
/// columns.
pub fn seed_user_stance(m: &BipartiteMatrix, seeds: &SeedHashtagSet) -> Result<StanceVector> {
    if seeds.is_empty() {
        return Err(Error::NoSeeds);
    }
    let col_label: Vec<Stance> = m
        .col_ids()
        .iter()
        .map(|e| match e.kind {
            EntityKind::Hashtag => seeds.get(&e.id).unwrap_or_default(),
            _ => Stance::Unknown,
        })
        .collect();
    let mut out = StanceVector::unknown(m.row_ids().to_vec());
    for r in 0..m.n_rows() {
        let (mut pro, mut anti) = (0.0, 0.0);
        for (c, w) in m.row(r) {
            match col_label[c] {
                Stance::Pro => pro += w,
                Stance::Anti => anti += w,
                Stance::Unknown => {}
            }
        }
        let stance = Stance::from_sign(pro - anti);
        if stance.is_known() {
            out.set(r, stance, (pro - anti).abs() / (pro + anti));
        }
    }
    Ok(out)
}

fn check_fraction(name: &'static str, theta: f64) -> Result<()> {
    if (0.0..=1.0).contains(&theta) {
        Ok(())
    } else {
        Err(Error::param(name, format!("{theta} is outside [0, 1]")))
    }
}

/// User → entity pass. `users` must be aligned with the rows of `m`.
/// Returns a vector over the columns of `m` (ids as `kind:id`), with
/// confidence = agreeing weight / total column weight.
pub fn propagate_to_entities(m: &BipartiteMatrix, users: &StanceVector, theta_h: f64) -> Result<StanceVector> {
    check_fraction("theta_h", theta_h)?;
    assert_eq!(users.len(), m.n_rows(), "user vector must align with matrix rows");
    let n = m.n_cols();
    let mut total = vec![0.0; n];
    let mut signed = vec![0.0; n];
    for (r, c, w) in m.entries() {
        total[c] += w;
        signed[c] += w * f64::from(users.stance(r).value());
    }
    let stances: Vec<Stance> = (0..n)
        .map(|c| {
            if total[c] > 0.0 {
                Stance::threshold(signed[c] / total[c], theta_h)
            } else {
                Stance::Unknown
            }
        })
        .collect();
    let mut agree = vec![0.0; n];
    for (r, c, w) in m.entries() {
        if stances[c].is_known() && users.stance(r) == stances[c] {
            agree[c] += w;
        }
    }
    let ids = m.col_ids().iter().map(ToString::to_string).collect();
    let confidence = (0..n)
        .map(|c| {
            if stances[c].is_known() {
                agree[c] / total[c]
            } else {
                0.0
            }
        })
        .collect();
    Ok(StanceVector::from_parts(ids, stances, confidence))
}

/// Entity → user pass over row-normalized weights. `entities` must be
/// aligned with the columns of `m`. Confidences follow
/// [`network_confidence`].
pub fn propagate_to_users(m: &BipartiteMatrix, entities: &StanceVector, theta_u: f64) -> Result<StanceVector> {
    check_fraction("theta_u", theta_u)?;
    assert_eq!(
        entities.len(),
        m.n_cols(),
        "entity vector must align with matrix columns"
    );
    let stances: Vec<Stance> = (0..m.n_rows())
        .map(|r| {
            let (mut total, mut signed) = (0.0, 0.0);
            for (c, w) in m.row(r) {
                total += w;
                signed += w * f64::from(entities.stance(c).value());
            }
            if total > 0.0 {
                Stance::threshold(signed / total, theta_u)
            } else {
                Stance::Unknown
            }
        })
        .collect();
    let confidence = network_confidence(m, entities, &stances);
    Ok(StanceVector::from_parts(m.row_ids().to_vec(), stances, confidence))
}

/// Share of each user's edge weight that points at entities agreeing with
/// the user's stance; 0 for users with unknown stance.
pub fn network_confidence(m: &BipartiteMatrix, entities: &StanceVector, users: &[Stance]) -> Vec<f64> {
    (0..m.n_rows())
        .map(|r| {
            if !users[r].is_known() {
                return 0.0;
            }
            let (mut total, mut agree) = (0.0, 0.0);
            for (c, w) in m.row(r) {
                total += w;
                if entities.stance(c) == users[r] {
                    agree += w;
                }
            }
            if total > 0.0 {
                agree / total
            } else {
                0.0
            }
        })
        .collect()
}

/// The network view used during co-training: repeated user → entity →
/// user round-trips starting from the currently labeled users.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkPropagation {
    pub theta_h: f64,
    pub theta_u: f64,
    pub round_trips: usize,
}

impl Default for NetworkPropagation {
    fn default() -> Self {
        NetworkPropagation {
            theta_h: 0.7,
            theta_u: 0.7,
            round_trips: 1,
        }
    }
}

impl NetworkPropagation {
    /// Runs the round-trips. `labeled` (aligned with rows) seeds every
    /// round's user → entity pass; between rounds its known entries
    /// override the propagated user stances. `clamped` entries are written
    /// into the final user vector unchanged.
    pub fn run(
        &self,
        m: &BipartiteMatrix,
        labeled: &StanceVector,
        clamped: &[(usize, Stance, f64)],
    ) -> Result<(StanceVector, StanceVector)> {
        let rounds = self.round_trips.max(1);
        let mut input = labeled.clone();
        let mut result = None;
        for round in 0..rounds {
            let entities = propagate_to_entities(m, &input, self.theta_h)?;
            let mut users = propagate_to_users(m, &entities, self.theta_u)?;
            for &(i, s, c) in clamped {
                users.set(i, s, c);
            }
            if round + 1 < rounds {
                input = users.clone();
                for i in 0..labeled.len() {
                    if labeled.stance(i).is_known() {
                        input.set(i, labeled.stance(i), labeled.confidence(i));
                    }
                }
            }
            result = Some((entities, users));
        }
        Ok(result.expect("at least one round"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Entity;
    use proptest::prelude::*;

    fn matrix(rows: usize, cols: usize, cells: &[(usize, usize, f64)]) -> BipartiteMatrix {
        BipartiteMatrix::from_triplets(
            (0..rows).map(|i| format!("u{i}")).collect(),
            (0..cols).map(|i| Entity::hashtag(format!("h{i}"))).collect(),
            cells.to_vec(),
        )
    }

    fn users(values: &[i8]) -> StanceVector {
        let ids = (0..values.len()).map(|i| format!("u{i}")).collect();
        let stances: Vec<Stance> = values.iter().map(|&v| Stance::try_from(v).unwrap()).collect();
        let conf = stances.iter().map(|s| if s.is_known() { 1.0 } else { 0.0 }).collect();
        StanceVector::from_parts(ids, stances, conf)
    }

    fn entities(values: &[i8]) -> StanceVector {
        let mut v = users(values);
        v.ids = (0..values.len()).map(|i| format!("hashtag:h{i}")).collect();
        v
    }

    #[test]
    fn seed_examples() {
        let h = BipartiteMatrix::from_triplets(
            vec!["anti".into(), "split".into(), "none".into()],
            vec![
                Entity::hashtag("guncontrolnow"),
                Entity::hashtag("2ndamendment"),
                Entity::hashtag("other"),
            ],
            vec![(0, 0, 3.0), (1, 0, 2.0), (1, 1, 2.0), (2, 2, 5.0)],
        );
        let seeds = SeedHashtagSet::parse("#guncontrolnow:anti, #2ndamendment:pro").unwrap();
        let s = seed_user_stance(&h, &seeds).unwrap();
        assert_eq!(s.get("anti"), Some((Stance::Anti, 1.0)));
        assert_eq!(s.get("split"), Some((Stance::Unknown, 0.0)));
        assert_eq!(s.get("none"), Some((Stance::Unknown, 0.0)));
        assert!(matches!(
            seed_user_stance(&h, &SeedHashtagSet::default()),
            Err(Error::NoSeeds)
        ));
    }

    #[test]
    fn seed_confidence_is_margin_ratio() {
        let h = matrix(1, 2, &[(0, 0, 3.0), (0, 1, 1.0)]);
        let seeds = SeedHashtagSet::new([("h0", Stance::Pro), ("h1", Stance::Anti)]).unwrap();
        let s = seed_user_stance(&h, &seeds).unwrap();
        assert_eq!(s.get("u0"), Some((Stance::Pro, 0.5)));
    }

    #[test]
    fn seed_set_validation() {
        assert!(matches!(
            SeedHashtagSet::parse("#a:pro,#A:anti"),
            Err(Error::ConflictingSeed(t)) if t == "a"
        ));
        assert!(SeedHashtagSet::parse("#a:maybe").is_err());
        let s = SeedHashtagSet::parse("#ThankYouTrump:Pro, #iranuprising:Anti,#freeiran:-1").unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.get("thankyoutrump"), Some(Stance::Pro));
        assert_eq!(s.get("freeiran"), Some(Stance::Anti));
    }

    #[test]
    fn entity_examples() {
        // used only by +1 users
        let m = matrix(3, 1, &[(0, 0, 1.0), (1, 0, 4.0)]);
        let e = propagate_to_entities(&m, &users(&[1, 1, -1]), 0.7).unwrap();
        assert_eq!((e.stance(0), e.confidence(0)), (Stance::Pro, 1.0));

        // normalized sum 0.5 under threshold 0.7
        let m = matrix(2, 1, &[(0, 0, 1.0), (1, 0, 1.0)]);
        let e = propagate_to_entities(&m, &users(&[1, 0]), 0.7).unwrap();
        assert_eq!(e.stance(0), Stance::Unknown);
        assert_eq!(e.confidence(0), 0.0);

        // weights {2 from +1, 1 from -1}: (2-1)/3 > 0.3, confidence 2/3
        let m = matrix(2, 1, &[(0, 0, 2.0), (1, 0, 1.0)]);
        let e = propagate_to_entities(&m, &users(&[1, -1]), 0.3).unwrap();
        assert_eq!(e.stance(0), Stance::Pro);
        assert!((e.confidence(0) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(e.ids()[0], "hashtag:h0");
    }

    #[test]
    fn user_examples() {
        let m = matrix(1, 1, &[(0, 0, 5.0)]);
        let u = propagate_to_users(&m, &entities(&[1]), 0.7).unwrap();
        assert_eq!((u.stance(0), u.confidence(0)), (Stance::Pro, 1.0));

        let m = matrix(1, 2, &[(0, 0, 1.0), (0, 1, 1.0)]);
        let u = propagate_to_users(&m, &entities(&[1, -1]), 0.7).unwrap();
        assert_eq!(u.stance(0), Stance::Unknown);

        // 0.8 on a +1 entity, 0.2 on an unknown one
        let m = matrix(1, 2, &[(0, 0, 0.8), (0, 1, 0.2)]);
        let u = propagate_to_users(&m, &entities(&[1, 0]), 0.7).unwrap();
        assert_eq!(u.stance(0), Stance::Pro);

        // exactly at the threshold stays unknown
        let m = matrix(1, 2, &[(0, 0, 1.0), (0, 1, 1.0)]);
        let u = propagate_to_users(&m, &entities(&[1, 0]), 0.5).unwrap();
        assert_eq!(u.stance(0), Stance::Unknown);
        assert!(propagate_to_users(&m, &entities(&[1, 0]), 1.5).is_err());
    }

    #[test]
    fn confidence_examples() {
        let m = matrix(2, 2, &[(0, 0, 3.0), (0, 1, 1.0), (1, 0, 2.0)]);
        let ent = entities(&[1, -1]);
        let c = network_confidence(&m, &ent, &[Stance::Pro, Stance::Unknown]);
        assert_eq!(c, vec![0.75, 0.0]);
        let c = network_confidence(&m, &ent, &[Stance::Pro, Stance::Pro]);
        assert_eq!(c[1], 1.0);
    }

    #[test]
    fn isolated_users_stay_unknown() {
        let m = matrix(3, 1, &[(0, 0, 1.0)]);
        let u = propagate_to_users(&m, &entities(&[1]), 0.0).unwrap();
        assert_eq!((u.stance(1), u.confidence(1)), (Stance::Unknown, 0.0));
        assert_eq!((u.stance(2), u.confidence(2)), (Stance::Unknown, 0.0));
    }

    #[test]
    fn round_trips_and_clamping() {
        // u0 -h0- u1 -h1- u2 : a chain that needs two round-trips to reach u2
        let m = matrix(3, 2, &[(0, 0, 1.0), (1, 0, 1.0), (1, 1, 1.0), (2, 1, 1.0)]);
        let labeled = users(&[1, 0, 0]);
        let one = NetworkPropagation {
            theta_h: 0.0,
            theta_u: 0.0,
            round_trips: 1,
        };
        let (_, u) = one.run(&m, &labeled, &[]).unwrap();
        assert_eq!(u.values(), [Stance::Pro, Stance::Pro, Stance::Unknown]);
        let two = NetworkPropagation { round_trips: 2, ..one };
        let (_, u) = two.run(&m, &labeled, &[]).unwrap();
        assert_eq!(u.values(), [Stance::Pro, Stance::Pro, Stance::Pro]);

        let (_, u) = one.run(&m, &labeled, &[(0, Stance::Anti, 0.4)]).unwrap();
        assert_eq!((u.stance(0), u.confidence(0)), (Stance::Anti, 0.4));
    }

    #[test]
    fn stance_csv_round_trip() {
        let v = StanceVector::from_parts(
            vec!["a".into(), "b,c".into(), "d".into()],
            vec![Stance::Pro, Stance::Anti, Stance::Unknown],
            vec![0.25, 1.0, 0.0],
        );
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        v.write_csv(&path).unwrap();
        assert_eq!(StanceVector::read_csv(&path).unwrap(), v);
    }

    fn arb_case() -> impl Strategy<Value = (BipartiteMatrix, Vec<i8>, f64, f64)> {
        (1usize..12, 1usize..8).prop_flat_map(|(nr, nc)| {
            (
                proptest::collection::vec((0..nr, 0..nc, 1u32..6), 1..30),
                proptest::collection::vec(-1i8..=1, nr),
                0.0f64..1.0,
                0.0f64..1.0,
            )
                .prop_map(move |(cells, labels, t1, t2)| {
                    let cells: Vec<_> = cells.into_iter().map(|(r, c, w)| (r, c, f64::from(w))).collect();
                    (matrix(nr, nc, &cells), labels, t1, t2)
                })
        })
    }

    proptest! {
        #[test]
        fn sign_symmetry((m, labels, th, tu) in arb_case()) {
            let s = users(&labels);
            let neg = users(&labels.iter().map(|v| -v).collect::<Vec<_>>());
            let e = propagate_to_entities(&m, &s, th).unwrap();
            let en = propagate_to_entities(&m, &neg, th).unwrap();
            prop_assert_eq!(en.values().to_vec(), e.values().iter().map(|s| s.negate()).collect::<Vec<_>>());
            prop_assert_eq!(en.confidences(), e.confidences());
            let u = propagate_to_users(&m, &e, tu).unwrap();
            let un = propagate_to_users(&m, &en, tu).unwrap();
            prop_assert_eq!(un.values().to_vec(), u.values().iter().map(|s| s.negate()).collect::<Vec<_>>());
            prop_assert_eq!(un.confidences(), u.confidences());
        }

        #[test]
        fn raising_thresholds_only_zeroes((m, labels, lo, hi) in arb_case()) {
            let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
            let s = users(&labels);
            let e_lo = propagate_to_entities(&m, &s, lo).unwrap();
            let e_hi = propagate_to_entities(&m, &s, hi).unwrap();
            for (a, b) in e_lo.values().iter().zip(e_hi.values()) {
                prop_assert!(*b == *a || *b == Stance::Unknown);
            }
            let u_lo = propagate_to_users(&m, &e_lo, lo).unwrap();
            let u_hi = propagate_to_users(&m, &e_lo, hi).unwrap();
            for (a, b) in u_lo.values().iter().zip(u_hi.values()) {
                prop_assert!(*b == *a || *b == Stance::Unknown);
            }
        }

        #[test]
        fn confidence_zero_iff_unknown((m, labels, th, tu) in arb_case()) {
            let e = propagate_to_entities(&m, &users(&labels), th).unwrap();
            let u = propagate_to_users(&m, &e, tu).unwrap();
            for v in [&e, &u] {
                for (_, s, c) in v.iter() {
                    prop_assert_eq!(s.is_known(), c > 0.0);
                    prop_assert!((0.0..=1.0).contains(&c));
                }
            }
        }
    }
}
