//! Sparse user × entity matrices: user–hashtag (H), user–retweet (R),
//! user–mention and user–domain, plus their union (I).

use std::collections::HashMap;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{Tweet, TweetCorpus};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntityKind {
    Hashtag,
    Retweet,
    Mention,
    Url,
}

impl EntityKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EntityKind::Hashtag => "hashtag",
            EntityKind::Retweet => "retweet",
            EntityKind::Mention => "mention",
            EntityKind::Url => "url",
        }
    }
}

impl FromStr for EntityKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hashtag" => Ok(EntityKind::Hashtag),
            "retweet" => Ok(EntityKind::Retweet),
            "mention" => Ok(EntityKind::Mention),
            "url" => Ok(EntityKind::Url),
            other => Err(Error::parse("entity kind", other)),
        }
    }
}

/// A column of a bipartite matrix. Ids are namespaced by kind, so a hashtag
/// and a retweeted tweet id never collide.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Entity {
    pub kind: EntityKind,
    pub id: String,
}

impl Entity {
    pub fn new(kind: EntityKind, id: impl Into<String>) -> Self {
        Entity { kind, id: id.into() }
    }

    pub fn hashtag(id: impl Into<String>) -> Self {
        Entity::new(EntityKind::Hashtag, id)
    }
}

impl fmt::Display for Entity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.kind.as_str(), self.id)
    }
}

impl FromStr for Entity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, id) = s
            .split_once(':')
            .ok_or_else(|| Error::parse("entity", format!("`{s}` lacks a kind prefix")))?;
        Ok(Entity::new(kind.parse()?, id))
    }
}

/// Compressed sparse row matrix with user ids on rows and entities on
/// columns. Weights are strictly positive; zeros are never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteMatrix {
    rows: Vec<String>,
    cols: Vec<Entity>,
    indptr: Vec<usize>,
    indices: Vec<u32>,
    data: Vec<f64>,
}

impl BipartiteMatrix {
    /// Assembles a matrix from `(row, col, weight)` triplets. Duplicate
    /// coordinates are summed; non-positive results are dropped.
    pub fn from_triplets(rows: Vec<String>, cols: Vec<Entity>, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut indptr = vec![0; rows.len() + 1];
        let mut indices = Vec::with_capacity(triplets.len());
        let mut data: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, w) in triplets {
            debug_assert!(r < rows.len() && c < cols.len());
            if last == Some((r, c)) {
                *data.last_mut().expect("entry exists") += w;
            } else {
                indices.push(c as u32);
                data.push(w);
                indptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..rows.len() {
            indptr[i + 1] += indptr[i];
        }
        let mut m = BipartiteMatrix {
            rows,
            cols,
            indptr,
            indices,
            data,
        };
        m.drop_non_positive();
        m
    }

    /// An empty matrix over the given row ids.
    pub fn empty(rows: Vec<String>) -> Self {
        let n = rows.len();
        BipartiteMatrix {
            rows,
            cols: Vec::new(),
            indptr: vec![0; n + 1],
            indices: Vec::new(),
            data: Vec::new(),
        }
    }

    fn drop_non_positive(&mut self) {
        if self.data.iter().all(|&w| w > 0.0) {
            return;
        }
        let mut indptr = vec![0; self.rows.len() + 1];
        let mut indices = Vec::with_capacity(self.indices.len());
        let mut data = Vec::with_capacity(self.data.len());
        for r in 0..self.rows.len() {
            for k in self.indptr[r]..self.indptr[r + 1] {
                if self.data[k] > 0.0 {
                    indices.push(self.indices[k]);
                    data.push(self.data[k]);
                }
            }
            indptr[r + 1] = indices.len();
        }
        self.indptr = indptr;
        self.indices = indices;
        self.data = data;
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.cols.len()
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    pub fn row_ids(&self) -> &[String] {
        &self.rows
    }

    pub fn col_ids(&self) -> &[Entity] {
        &self.cols
    }

    pub fn row_position(&self, id: &str) -> Option<usize> {
        self.rows.iter().position(|r| r == id)
    }

    pub fn col_position(&self, entity: &Entity) -> Option<usize> {
        self.cols.iter().position(|c| c == entity)
    }

    /// Non-zero `(column, weight)` entries of row `r`, by column index.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.indptr[r]..self.indptr[r + 1];
        self.indices[span.clone()]
            .iter()
            .zip(&self.data[span])
            .map(|(&c, &w)| (c as usize, w))
    }

    /// All non-zero `(row, column, weight)` entries in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.rows.len()).flat_map(move |r| self.row(r).map(move |(c, w)| (r, c, w)))
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let span = self.indptr[r]..self.indptr[r + 1];
        match self.indices[span.clone()].binary_search(&(c as u32)) {
            Ok(k) => self.data[span.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.rows.len())
            .map(|r| self.row(r).map(|(_, w)| w).sum())
            .collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.cols.len()];
        for (&c, &w) in self.indices.iter().zip(&self.data) {
            sums[c as usize] += w;
        }
        sums
    }

    pub fn total_weight(&self) -> f64 {
        self.data.iter().sum()
    }

    /// Dense copy, for tests and small-matrix inspection only.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut dense = vec![vec![0.0; self.cols.len()]; self.rows.len()];
        for (r, c, w) in self.entries() {
            dense[r][c] = w;
        }
        dense
    }

    /// Re-expresses the matrix over `rows`. Rows absent from `rows` are
    /// dropped; ids absent from the matrix become empty rows.
    pub fn reindex_rows(&self, rows: &[String]) -> Self {
        let pos: HashMap<&str, usize> = self.rows.iter().enumerate().map(|(i, r)| (r.as_str(), i)).collect();
        let mut triplets = Vec::with_capacity(self.nnz());
        for (new_r, id) in rows.iter().enumerate() {
            if let Some(&old_r) = pos.get(id.as_str()) {
                triplets.extend(self.row(old_r).map(|(c, w)| (new_r, c, w)));
            }
        }
        BipartiteMatrix::from_triplets(rows.to_vec(), self.cols.clone(), triplets)
    }

    /// Writes a tab-separated `row_id  col_id  weight` file with a header.
    /// Column ids carry their kind prefix (`hashtag:guncontrolnow`).
    pub fn write_triplets(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        let io = |e| Error::io(path, e);
        writeln!(out, "row_id\tcol_id\tweight").map_err(io)?;
        for (r, c, w) in self.entries() {
            writeln!(out, "{}\t{}\t{}", self.rows[r], self.cols[c], w).map_err(io)?;
        }
        out.flush().map_err(io)
    }

    /// Reads a triplet file. Rows and columns are ordered by first
    /// appearance; empty rows are not representable in the format.
    pub fn read_triplets(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut rows = Vec::new();
        let mut cols = Vec::new();
        let mut row_pos: HashMap<String, usize> = HashMap::new();
        let mut col_pos: HashMap<Entity, usize> = HashMap::new();
        let mut triplets = Vec::new();
        for (lineno, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if lineno == 0 || line.is_empty() {
                continue;
            }
            let mut parts = line.split('\t');
            let (Some(r), Some(c), Some(w), None) = (parts.next(), parts.next(), parts.next(), parts.next()) else {
                return Err(Error::parse("triplet line", format!("line {}: `{line}`", lineno + 1)));
            };
            let weight: f64 = w
                .parse()
                .map_err(|e| Error::parse("triplet weight", format!("line {}: {e}", lineno + 1)))?;
            let entity: Entity = c.parse()?;
            let ri = *row_pos.entry(r.to_string()).or_insert_with(|| {
                rows.push(r.to_string());
                rows.len() - 1
            });
            let ci = *col_pos.entry(entity.clone()).or_insert_with(|| {
                cols.push(entity);
                cols.len() - 1
            });
            triplets.push((ri, ci, weight));
        }
        Ok(BipartiteMatrix::from_triplets(rows, cols, triplets))
    }
}

/// Counts `(user, entity)` co-occurrences, keeping the `limit` entities with
/// the highest total count (ties by id ascending) plus any of `force` that
/// occur in the corpus but missed the cut.
fn build_counted<'a, F>(
    corpus: &'a TweetCorpus,
    kind: EntityKind,
    limit: usize,
    force: &[String],
    entities_of: F,
) -> BipartiteMatrix
where
    F: Fn(&'a Tweet) -> Vec<&'a str>,
{
    let rows: Vec<String> = corpus.users().iter().cloned().collect();
    let user_pos: HashMap<&str, u32> = rows.iter().enumerate().map(|(i, u)| (u.as_str(), i as u32)).collect();

    let mut entity_ids: HashMap<&'a str, u32> = HashMap::new();
    let mut names: Vec<&'a str> = Vec::new();
    let mut cell_counts: HashMap<(u32, u32), u32> = HashMap::new();
    for t in corpus.tweets() {
        let mut ents = entities_of(t);
        ents.sort_unstable();
        ents.dedup();
        let u = user_pos[t.user_id.as_str()];
        for e in ents {
            let id = *entity_ids.entry(e).or_insert_with(|| {
                names.push(e);
                (names.len() - 1) as u32
            });
            *cell_counts.entry((u, id)).or_insert(0) += 1;
        }
    }

    let mut totals = vec![0u64; names.len()];
    for (&(_, e), &n) in &cell_counts {
        totals[e as usize] += u64::from(n);
    }
    let mut ranked: Vec<u32> = (0..names.len() as u32).collect();
    ranked.sort_by(|&a, &b| {
        totals[b as usize]
            .cmp(&totals[a as usize])
            .then_with(|| names[a as usize].cmp(names[b as usize]))
    });
    ranked.truncate(limit);
    for f in force {
        if let Some(&id) = entity_ids.get(f.as_str()) {
            if !ranked.contains(&id) {
                ranked.push(id);
            }
        }
    }

    let mut col_of = vec![u32::MAX; names.len()];
    for (c, &e) in ranked.iter().enumerate() {
        col_of[e as usize] = c as u32;
    }
    let cols = ranked.iter().map(|&e| Entity::new(kind, names[e as usize])).collect();
    let triplets = cell_counts
        .into_iter()
        .filter(|&((_, e), _)| col_of[e as usize] != u32::MAX)
        .map(|((u, e), n)| (u as usize, col_of[e as usize] as usize, f64::from(n)))
        .collect();
    BipartiteMatrix::from_triplets(rows, cols, triplets)
}

/// User × hashtag counts over the `k` most used hashtags. Each `force`
/// hashtag (seed hashtags) present in the corpus is appended when it falls
/// outside the top `k`. Entry (u, h) is the number of u's tweets containing h.
pub fn build_user_hashtag_matrix(corpus: &TweetCorpus, k: usize, force: &[String]) -> Result<BipartiteMatrix> {
    if k == 0 {
        return Err(Error::param("k", "must be at least 1"));
    }
    Ok(build_counted(corpus, EntityKind::Hashtag, k, force, |t| {
        t.hashtags.iter().map(String::as_str).collect()
    }))
}

/// User × retweeted-tweet counts over the `p` most retweeted tweets.
pub fn build_user_retweet_matrix(corpus: &TweetCorpus, p: usize) -> Result<BipartiteMatrix> {
    if p == 0 {
        return Err(Error::param("p", "must be at least 1"));
    }
    Ok(build_counted(corpus, EntityKind::Retweet, p, &[], |t| {
        t.retweet_of.as_deref().into_iter().collect()
    }))
}

/// User × mentioned-account counts (mentions are read from raw text).
pub fn build_user_mention_matrix(corpus: &TweetCorpus, limit: usize) -> Result<BipartiteMatrix> {
    if limit == 0 {
        return Err(Error::param("limit", "must be at least 1"));
    }
    Ok(build_counted(corpus, EntityKind::Mention, limit, &[], |t| {
        t.mentions.iter().map(String::as_str).collect()
    }))
}

/// User × URL-domain counts.
pub fn build_user_domain_matrix(corpus: &TweetCorpus, limit: usize) -> Result<BipartiteMatrix> {
    if limit == 0 {
        return Err(Error::param("limit", "must be at least 1"));
    }
    Ok(build_counted(corpus, EntityKind::Url, limit, &[], |t| {
        t.domains.iter().map(String::as_str).collect()
    }))
}

/// Column-wise concatenation over the union of both row sets. A column that
/// appears in both (same kind and id) is merged by summing its weights.
pub fn union_matrices(a: &BipartiteMatrix, b: &BipartiteMatrix) -> BipartiteMatrix {
    let mut rows = a.rows.clone();
    let mut row_pos: HashMap<String, usize> = rows.iter().enumerate().map(|(i, r)| (r.clone(), i)).collect();
    for r in &b.rows {
        if !row_pos.contains_key(r) {
            row_pos.insert(r.clone(), rows.len());
            rows.push(r.clone());
        }
    }
    let mut cols = a.cols.clone();
    let mut col_pos: HashMap<Entity, usize> = cols.iter().enumerate().map(|(i, c)| (c.clone(), i)).collect();
    let b_col: Vec<usize> = b
        .cols
        .iter()
        .map(|c| {
            *col_pos.entry(c.clone()).or_insert_with(|| {
                cols.push(c.clone());
                cols.len() - 1
            })
        })
        .collect();
    let mut triplets: Vec<(usize, usize, f64)> = a.entries().collect();
    triplets.extend(b.entries().map(|(r, c, w)| (row_pos[&b.rows[r]], b_col[c], w)));
    BipartiteMatrix::from_triplets(rows, cols, triplets)
}

/// Scales every non-empty row to sum to one.
pub fn row_normalize(m: &BipartiteMatrix) -> BipartiteMatrix {
    let mut out = m.clone();
    for r in 0..out.rows.len() {
        let span = out.indptr[r]..out.indptr[r + 1];
        let sum: f64 = out.data[span.clone()].iter().sum();
        if sum > 0.0 {
            out.data[span].iter_mut().for_each(|w| *w /= sum);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Tweet;
    use proptest::prelude::*;

    fn tagged(id: &str, user: &str, tags: &[&str]) -> Tweet {
        let text = tags.iter().map(|t| format!("#{t}")).collect::<Vec<_>>().join(" ");
        Tweet::new(id, user, text, None, None, None, "")
    }

    fn retweet(id: &str, user: &str, of: &str) -> Tweet {
        Tweet::new(id, user, "RT", None, Some(of.to_string()), None, "")
    }

    fn toy_corpus() -> TweetCorpus {
        TweetCorpus::from_tweets(vec![
            tagged("1", "u1", &["a"]),
            tagged("2", "u1", &["a"]),
            tagged("3", "u2", &["a", "b"]),
            tagged("4", "u3", &["b"]),
            tagged("5", "u3", &["b"]),
            tagged("6", "u3", &["b"]),
        ])
    }

    #[test]
    fn toy_hashtag_matrix_matches_hand_count() {
        let h = build_user_hashtag_matrix(&toy_corpus(), 2, &[]).unwrap();
        assert_eq!(h.row_ids(), ["u1", "u2", "u3"]);
        // b: 4 uses, a: 3 uses
        assert_eq!(h.col_ids(), [Entity::hashtag("b"), Entity::hashtag("a")]);
        let a = h.col_position(&Entity::hashtag("a")).unwrap();
        let b = h.col_position(&Entity::hashtag("b")).unwrap();
        let dense = h.to_dense();
        let reordered: Vec<[f64; 2]> = dense.iter().map(|r| [r[a], r[b]]).collect();
        assert_eq!(reordered, vec![[2.0, 0.0], [1.0, 1.0], [0.0, 3.0]]);
    }

    #[test]
    fn hashtag_counts_and_top_k() {
        let corpus = TweetCorpus::from_tweets(vec![
            tagged("1", "u", &["gunconrolnow"]),
            tagged("2", "u", &["gunconrolnow", "gunconrolnow"]),
            tagged("3", "v", &["x", "y", "z", "w"]),
            tagged("4", "v", &["x", "y"]),
            tagged("5", "w", &["x"]),
        ]);
        let h = build_user_hashtag_matrix(&corpus, 10, &[]).unwrap();
        let c = h.col_position(&Entity::hashtag("gunconrolnow")).unwrap();
        assert_eq!(h.get(h.row_position("u").unwrap(), c), 2.0);

        let top3 = build_user_hashtag_matrix(&corpus, 3, &[]).unwrap();
        let ids: Vec<&str> = top3.col_ids().iter().map(|e| e.id.as_str()).collect();
        // x:3, gunconrolnow:2, y:2 (tie broken by id)
        assert_eq!(ids, ["x", "gunconrolnow", "y"]);
        assert!(matches!(
            build_user_hashtag_matrix(&corpus, 0, &[]),
            Err(Error::InvalidParameter { .. })
        ));
    }

    #[test]
    fn seeds_are_force_included() {
        let h = build_user_hashtag_matrix(&toy_corpus(), 1, &["a".into(), "missing".into()]).unwrap();
        let ids: Vec<&str> = h.col_ids().iter().map(|e| e.id.as_str()).collect();
        assert_eq!(ids, ["b", "a"]);
    }

    #[test]
    fn corpus_without_hashtags_gives_zero_columns() {
        let corpus = TweetCorpus::from_tweets(vec![Tweet::new("1", "u", "plain", None, None, None, "")]);
        let h = build_user_hashtag_matrix(&corpus, 5, &[]).unwrap();
        assert_eq!(h.n_cols(), 0);
        assert_eq!(h.n_rows(), 1);
    }

    #[test]
    fn retweet_matrix_top_p() {
        let mut tweets = vec![tagged("t1", "a", &[]), tagged("t2", "a", &[]), tagged("t3", "a", &[])];
        let mut n = 0;
        for (target, count) in [("t1", 5), ("t2", 3), ("t3", 1)] {
            for i in 0..count {
                n += 1;
                tweets.push(retweet(&format!("r{n}"), &format!("u{i}"), target));
            }
        }
        let corpus = TweetCorpus::from_tweets(tweets);
        let r = build_user_retweet_matrix(&corpus, 2).unwrap();
        let ids: Vec<&str> = r.col_ids().iter().map(|e| e.id.as_str()).collect();
        assert_eq!(ids, ["t1", "t2"]);
        assert_eq!(r.total_weight(), 8.0);
        assert!(r.col_ids().iter().all(|e| e.kind == EntityKind::Retweet));

        let single = TweetCorpus::from_tweets(vec![retweet("r", "u", "t")]);
        let r = build_user_retweet_matrix(&single, 3).unwrap();
        assert_eq!(r.get(0, 0), 1.0);
    }

    #[test]
    fn union_semantics() {
        let h = BipartiteMatrix::from_triplets(
            vec!["u1".into(), "u2".into()],
            vec![Entity::hashtag("x"), Entity::hashtag("y"), Entity::hashtag("z")],
            vec![(0, 0, 1.0), (1, 2, 2.0)],
        );
        let r = BipartiteMatrix::from_triplets(
            vec!["u2".into(), "u3".into()],
            (0..5)
                .map(|i| Entity::new(EntityKind::Retweet, format!("t{i}")))
                .collect(),
            vec![(0, 0, 1.0), (1, 4, 3.0)],
        );
        let i = union_matrices(&h, &r);
        assert_eq!(i.n_cols(), 8);
        assert_eq!(i.row_ids(), ["u1", "u2", "u3"]);
        assert_eq!(i.total_weight(), h.total_weight() + r.total_weight());
        assert_eq!(i.get(1, 3), 1.0);

        let empty = BipartiteMatrix::empty(vec![]);
        assert_eq!(union_matrices(&h, &empty), h);

        // same id, different kinds: two columns
        let clash = BipartiteMatrix::from_triplets(
            vec!["u1".into()],
            vec![Entity::new(EntityKind::Mention, "x")],
            vec![(0, 0, 4.0)],
        );
        let merged = union_matrices(&h, &clash);
        assert_eq!(merged.n_cols(), 4);
    }

    #[test]
    fn row_normalize_examples() {
        let m = BipartiteMatrix::from_triplets(
            vec!["a".into(), "b".into(), "c".into()],
            vec![Entity::hashtag("x"), Entity::hashtag("y"), Entity::hashtag("z")],
            vec![(0, 0, 2.0), (0, 2, 2.0), (2, 1, 7.0)],
        );
        let n = row_normalize(&m);
        assert_eq!(
            n.to_dense(),
            vec![vec![0.5, 0.0, 0.5], vec![0.0; 3], vec![0.0, 1.0, 0.0]]
        );
    }

    #[test]
    fn triplet_file_round_trip() {
        let h = build_user_hashtag_matrix(&toy_corpus(), 5, &[]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("h.tsv");
        h.write_triplets(&path).unwrap();
        let back = BipartiteMatrix::read_triplets(&path).unwrap();
        let back = back.reindex_rows(h.row_ids());
        assert_eq!(back.nnz(), h.nnz());
        for (r, c, w) in h.entries() {
            let col = back.col_position(&h.col_ids()[c]).unwrap();
            assert_eq!(back.get(r, col), w);
        }
    }

    fn arb_matrix() -> impl Strategy<Value = BipartiteMatrix> {
        (1usize..8, 1usize..6).prop_flat_map(|(nr, nc)| {
            proptest::collection::vec((0..nr, 0..nc, 0u32..5), 0..20).prop_map(move |cells| {
                BipartiteMatrix::from_triplets(
                    (0..nr).map(|i| format!("u{i}")).collect(),
                    (0..nc).map(|i| Entity::hashtag(format!("h{i}"))).collect(),
                    cells.into_iter().map(|(r, c, w)| (r, c, f64::from(w))).collect(),
                )
            })
        })
    }

    proptest! {
        #[test]
        fn row_normalize_is_idempotent(m in arb_matrix()) {
            let once = row_normalize(&m);
            let twice = row_normalize(&once);
            for (a, b) in once.to_dense().iter().flatten().zip(twice.to_dense().iter().flatten()) {
                prop_assert!((a - b).abs() < 1e-12);
            }
            prop_assert!(m.entries().all(|(_, _, w)| w > 0.0));
        }

        #[test]
        fn union_preserves_weights(a in arb_matrix(), b in arb_matrix(), c in arb_matrix()) {
            let ab_c = union_matrices(&union_matrices(&a, &b), &c);
            let a_bc = union_matrices(&a, &union_matrices(&b, &c));
            prop_assert!((ab_c.total_weight() - (a.total_weight() + b.total_weight() + c.total_weight())).abs() < 1e-9);
            prop_assert_eq!(ab_c.n_cols(), a_bc.n_cols());
            for (ci, col) in ab_c.col_ids().iter().enumerate() {
                let cj = a_bc.col_position(col).unwrap();
                for (ri, row) in ab_c.row_ids().iter().enumerate() {
                    let rj = a_bc.row_position(row).unwrap();
                    prop_assert!((ab_c.get(ri, ci) - a_bc.get(rj, cj)).abs() < 1e-12);
                }
            }
        }
    }
}
