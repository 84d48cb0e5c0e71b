//! Tweet ingestion, text cleaning and extraction of user documents and
//! first-level source/reply conversation pairs.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tweet {
    #[serde(rename = "id")]
    pub tweet_id: String,
    #[serde(rename = "user")]
    pub user_id: String,
    pub text: String,
    /// Lowercase, without the leading `#`.
    pub hashtags: Vec<String>,
    /// Lowercase screen names mentioned in the raw text, without `@`.
    #[serde(skip)]
    pub mentions: Vec<String>,
    /// Lowercase domains of URLs in the raw text (`www.` stripped).
    #[serde(skip)]
    pub domains: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub retweet_of: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reply_to: Option<String>,
    #[serde(default)]
    pub event: String,
}

impl Tweet {
    /// Builds a tweet from raw fields. Hashtags are normalized (or
    /// extracted from the text when `hashtags` is `None`), mentions and
    /// domains are pulled out of the raw text, and self-references are
    /// cleared.
    pub fn new(
        tweet_id: impl Into<String>,
        user_id: impl Into<String>,
        text: impl Into<String>,
        hashtags: Option<Vec<String>>,
        retweet_of: Option<String>,
        reply_to: Option<String>,
        event: impl Into<String>,
    ) -> Self {
        let tweet_id = tweet_id.into();
        let text = text.into();
        let hashtags = match hashtags {
            Some(tags) => normalize_hashtags(tags),
            None => extract_hashtags(&text),
        };
        let mentions = extract_mentions(&text);
        let domains = extract_domains(&text);
        let not_self = |target: Option<String>| target.filter(|t| !t.is_empty() && *t != tweet_id);
        Tweet {
            retweet_of: not_self(retweet_of),
            reply_to: not_self(reply_to),
            user_id: user_id.into(),
            text,
            hashtags,
            mentions,
            domains,
            event: event.into(),
            tweet_id,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadStats {
    pub records: usize,
    pub skipped: usize,
    pub duplicates: usize,
}

/// An immutable, deduplicated set of tweets ordered by tweet id.
#[derive(Debug, Clone, Default)]
pub struct TweetCorpus {
    tweets: Vec<Tweet>,
    index: HashMap<String, usize>,
    users: BTreeSet<String>,
    reply_index: HashMap<String, Vec<String>>,
    missing_reply_targets: usize,
    stats: LoadStats,
}

impl TweetCorpus {
    /// Builds a corpus, keeping the first occurrence of each tweet id.
    pub fn from_tweets(tweets: impl IntoIterator<Item = Tweet>) -> Self {
        let mut seen = HashMap::new();
        let mut kept = Vec::new();
        let mut duplicates = 0;
        for tweet in tweets {
            if seen.contains_key(&tweet.tweet_id) {
                duplicates += 1;
                continue;
            }
            seen.insert(tweet.tweet_id.clone(), ());
            kept.push(tweet);
        }
        kept.sort_by(|a, b| a.tweet_id.cmp(&b.tweet_id));

        let index: HashMap<String, usize> = kept.iter().enumerate().map(|(i, t)| (t.tweet_id.clone(), i)).collect();
        let users = kept.iter().map(|t| t.user_id.clone()).collect();
        let mut reply_index: HashMap<String, Vec<String>> = HashMap::new();
        let mut missing_reply_targets = 0;
        for t in &kept {
            if let Some(target) = &t.reply_to {
                if !index.contains_key(target) {
                    missing_reply_targets += 1;
                }
                reply_index.entry(target.clone()).or_default().push(t.tweet_id.clone());
            }
        }
        let records = kept.len() + duplicates;
        TweetCorpus {
            tweets: kept,
            index,
            users,
            reply_index,
            missing_reply_targets,
            stats: LoadStats {
                records,
                skipped: 0,
                duplicates,
            },
        }
    }

    pub fn tweets(&self) -> &[Tweet] {
        &self.tweets
    }

    pub fn get(&self, tweet_id: &str) -> Option<&Tweet> {
        self.index.get(tweet_id).map(|&i| &self.tweets[i])
    }

    pub fn users(&self) -> &BTreeSet<String> {
        &self.users
    }

    pub fn len(&self) -> usize {
        self.tweets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tweets.is_empty()
    }

    /// Replies keyed by the tweet they answer. Targets absent from the
    /// corpus are still keyed here and counted by
    /// [`missing_reply_targets`](Self::missing_reply_targets).
    pub fn replies_to(&self, tweet_id: &str) -> &[String] {
        self.reply_index.get(tweet_id).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn missing_reply_targets(&self) -> usize {
        self.missing_reply_targets
    }

    pub fn stats(&self) -> LoadStats {
        self.stats
    }

    /// Writes the corpus as JSONL in the same schema [`load_tweets`] reads.
    pub fn write_jsonl(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        for t in &self.tweets {
            serde_json::to_writer(&mut out, t).map_err(|e| Error::parse("tweet", e))?;
            out.write_all(b"\n").map_err(|e| Error::io(path, e))?;
        }
        out.flush().map_err(|e| Error::io(path, e))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    Jsonl,
    Csv,
}

impl InputFormat {
    /// `.csv` selects CSV; everything else is read as JSONL.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => InputFormat::Csv,
            _ => InputFormat::Jsonl,
        }
    }
}

/// Loads tweets from a JSONL or CSV file.
///
/// Records lacking an id, user or text (or that fail to parse) are skipped
/// and counted in [`LoadStats::skipped`]. `default_event` tags records that
/// carry no `event` field.
pub fn load_tweets(path: &Path, format: InputFormat, default_event: &str) -> Result<TweetCorpus> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut records = Vec::new();
    let mut skipped = 0;
    match format {
        InputFormat::Jsonl => {
            for line in BufReader::new(file).lines() {
                let line = line.map_err(|e| Error::io(path, e))?;
                if line.trim().is_empty() {
                    continue;
                }
                match serde_json::from_str::<Value>(&line)
                    .ok()
                    .and_then(|v| tweet_from_json(&v, default_event))
                {
                    Some(t) => records.push(t),
                    None => skipped += 1,
                }
            }
        }
        InputFormat::Csv => {
            let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(file);
            let headers = reader.headers().map_err(|e| Error::parse("csv header", e))?.clone();
            for row in reader.records() {
                let tweet = row.ok().and_then(|row| {
                    let field = |names: &[&str]| {
                        names.iter().find_map(|n| {
                            headers
                                .iter()
                                .position(|h| h == *n)
                                .and_then(|i| row.get(i))
                                .map(str::to_string)
                                .filter(|s| !s.is_empty())
                        })
                    };
                    let hashtags = field(&["hashtags"]).map(|s| {
                        s.split(|c: char| c == ';' || c == ',' || c.is_whitespace())
                            .filter(|s| !s.is_empty())
                            .map(str::to_string)
                            .collect()
                    });
                    Some(Tweet::new(
                        field(&["id", "tweet_id"])?,
                        field(&["user", "user_id"])?,
                        field(&["text"])?,
                        hashtags,
                        field(&["retweet_of"]),
                        field(&["reply_to"]),
                        field(&["event"]).unwrap_or_else(|| default_event.to_string()),
                    ))
                });
                match tweet {
                    Some(t) => records.push(t),
                    None => skipped += 1,
                }
            }
        }
    }
    if records.is_empty() {
        return Err(Error::EmptyCorpus(path.to_path_buf()));
    }
    let mut corpus = TweetCorpus::from_tweets(records);
    corpus.stats.records += skipped;
    corpus.stats.skipped = skipped;
    Ok(corpus)
}

fn json_id(v: Option<&Value>) -> Option<String> {
    match v? {
        Value::String(s) if !s.is_empty() => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

fn tweet_from_json(v: &Value, default_event: &str) -> Option<Tweet> {
    let obj = v.as_object()?;
    let pick = |names: &[&str]| names.iter().find_map(|n| json_id(obj.get(*n)));
    let text = obj.get("text")?.as_str()?.to_string();
    let hashtags = match obj.get("hashtags") {
        Some(Value::Array(items)) => Some(items.iter().filter_map(|h| h.as_str().map(str::to_string)).collect()),
        Some(Value::String(s)) => Some(s.split_whitespace().map(str::to_string).collect()),
        _ => None,
    };
    Some(Tweet::new(
        pick(&["id", "tweet_id", "id_str"])?,
        pick(&["user", "user_id"])?,
        text,
        hashtags,
        pick(&["retweet_of"]),
        pick(&["reply_to"]),
        obj.get("event").and_then(Value::as_str).unwrap_or(default_event),
    ))
}

fn is_url(token: &str) -> bool {
    let lower = token.get(..8).unwrap_or(token).to_ascii_lowercase();
    lower.starts_with("http://") || lower.starts_with("https://") || lower.starts_with("www.")
}

/// Strips `@mentions`, URLs and a leading `RT` marker, collapsing
/// whitespace. Returns `None` when nothing is left.
pub fn clean_text(raw: &str) -> Option<String> {
    let kept: Vec<&str> = raw
        .split_whitespace()
        .filter(|tok| !tok.starts_with('@') && !is_url(tok))
        .skip_while(|tok| *tok == "RT")
        .collect();
    if kept.is_empty() {
        None
    } else {
        Some(kept.join(" "))
    }
}

fn is_tag_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

fn normalize_hashtags(tags: Vec<String>) -> Vec<String> {
    tags.into_iter()
        .map(|t| t.trim().trim_start_matches('#').to_lowercase())
        .filter(|t| !t.is_empty())
        .collect()
}

fn extract_prefixed(text: &str, prefix: char) -> Vec<String> {
    let mut out = Vec::new();
    let mut prev: Option<char> = None;
    for (i, c) in text.char_indices() {
        if c == prefix && !prev.is_some_and(is_tag_char) {
            let rest = &text[i + c.len_utf8()..];
            let end = rest.find(|ch: char| !is_tag_char(ch)).unwrap_or(rest.len());
            if end > 0 {
                out.push(rest[..end].to_lowercase());
            }
        }
        prev = Some(c);
    }
    out
}

/// Hashtags in `text`: `#` followed by alphanumerics or `_`, lowercased.
pub fn extract_hashtags(text: &str) -> Vec<String> {
    extract_prefixed(text, '#')
}

pub fn extract_mentions(text: &str) -> Vec<String> {
    extract_prefixed(text, '@')
}

/// Domains of URL tokens, matched at the domain level.
pub fn extract_domains(text: &str) -> Vec<String> {
    text.split_whitespace()
        .filter(|tok| is_url(tok))
        .filter_map(|tok| {
            let lower = tok.to_lowercase();
            let rest = lower
                .strip_prefix("https://")
                .or_else(|| lower.strip_prefix("http://"))
                .unwrap_or(&lower);
            let rest = rest.strip_prefix("www.").unwrap_or(rest);
            let host = rest
                .split(['/', '?', '#', ':'])
                .next()
                .unwrap_or("")
                .trim_end_matches(|c: char| !c.is_alphanumeric());
            (!host.is_empty()).then(|| host.to_string())
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "i8", try_from = "i8")]
pub enum PairLabel {
    Oppose,
    Unknown,
    Favor,
}

impl PairLabel {
    pub fn value(self) -> i8 {
        match self {
            PairLabel::Oppose => -1,
            PairLabel::Unknown => 0,
            PairLabel::Favor => 1,
        }
    }
}

impl From<PairLabel> for i8 {
    fn from(l: PairLabel) -> i8 {
        l.value()
    }
}

impl TryFrom<i8> for PairLabel {
    type Error = String;

    fn try_from(v: i8) -> std::result::Result<Self, String> {
        match v {
            -1 => Ok(PairLabel::Oppose),
            0 => Ok(PairLabel::Unknown),
            1 => Ok(PairLabel::Favor),
            other => Err(format!("pair label must be -1, 0 or 1, got {other}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelKind {
    Gold,
    Weak,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConversationPair {
    pub source_tweet_id: String,
    pub reply_tweet_id: String,
    pub source_user: String,
    pub reply_user: String,
    pub source_text: String,
    pub reply_text: String,
    pub label: PairLabel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label_kind: Option<LabelKind>,
    #[serde(default)]
    pub event: String,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConversationStats {
    pub pairs: usize,
    pub missing_targets: usize,
    pub self_replies: usize,
    pub empty_text: usize,
}

/// One pair per reply whose target is in the corpus. Self-replies and
/// pairs where either side cleans to nothing are dropped.
pub fn extract_conversations(corpus: &TweetCorpus) -> (Vec<ConversationPair>, ConversationStats) {
    let mut stats = ConversationStats::default();
    let mut pairs = Vec::new();
    for reply in corpus.tweets() {
        let Some(target) = &reply.reply_to else {
            continue;
        };
        let Some(source) = corpus.get(target) else {
            stats.missing_targets += 1;
            continue;
        };
        if source.user_id == reply.user_id {
            stats.self_replies += 1;
            continue;
        }
        let (Some(source_text), Some(reply_text)) = (clean_text(&source.text), clean_text(&reply.text)) else {
            stats.empty_text += 1;
            continue;
        };
        pairs.push(ConversationPair {
            source_tweet_id: source.tweet_id.clone(),
            reply_tweet_id: reply.tweet_id.clone(),
            source_user: source.user_id.clone(),
            reply_user: reply.user_id.clone(),
            source_text,
            reply_text,
            label: PairLabel::Unknown,
            label_kind: None,
            event: reply.event.clone(),
        });
    }
    stats.pairs = pairs.len();
    (pairs, stats)
}

pub fn write_pairs_jsonl(path: &Path, pairs: &[ConversationPair]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    for p in pairs {
        serde_json::to_writer(&mut out, p).map_err(|e| Error::parse("pair", e))?;
        out.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

/// Reads pairs written by [`write_pairs_jsonl`]. Blank lines are skipped.
pub fn read_pairs_jsonl(path: &Path) -> Result<Vec<ConversationPair>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut pairs = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let pair = serde_json::from_str(&line).map_err(|e| Error::parse(format!("{}:{}", path.display(), n + 1), e))?;
        pairs.push(pair);
    }
    Ok(pairs)
}

/// Cleaned tweet texts per user, in tweet-id order. Users whose tweets all
/// clean to nothing are absent.
pub fn extract_user_documents(corpus: &TweetCorpus) -> BTreeMap<String, Vec<String>> {
    let mut docs: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for t in corpus.tweets() {
        if let Some(text) = clean_text(&t.text) {
            docs.entry(t.user_id.clone()).or_default().push(text);
        }
    }
    docs
}
