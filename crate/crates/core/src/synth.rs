//! Planted-partition corpus generator with known user stances and reply
//! labels.
//!
//! Users split evenly into a pro community and an anti community. Every
//! ordinary hashtag, word, domain, mention and retweet is drawn from the
//! author's own community with probability `(1 + polarity) / 2` and from the
//! other one otherwise, so `polarity = 1` gives disjoint vocabularies and
//! `polarity = 0` makes the communities indistinguishable. Seed hashtags and
//! a small set of exclusive hashtags are never mixed. Reply gold labels
//! follow the communities (Favor within, Oppose across) except for a
//! `label_noise` share that is flipped; a `marker_rate` share of replies
//! carries a marker word for its gold label.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{extract_conversations, ConversationPair, LabelKind, PairLabel, Tweet, TweetCorpus};
use crate::error::{Error, Result};
use crate::propagation::{SeedHashtagSet, Stance};

pub const FAVOR_MARKERS: [&str; 4] = ["agreed", "exactly", "true", "thanks"];
pub const OPPOSE_MARKERS: [&str; 4] = ["wrong", "lies", "nonsense", "shame"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub n_users: usize,
    /// Ordinary hashtags per community.
    pub n_hashtags: usize,
    pub polarity: f64,
    pub seed: u64,
    pub tweets_per_user: usize,
    /// Hashtags only one community ever uses (besides its seed hashtag).
    pub exclusive_hashtags: usize,
    /// Share of each community that uses its seed hashtag.
    pub seed_user_fraction: f64,
    pub words_per_community: usize,
    pub shared_words: usize,
    pub words_per_tweet: usize,
    pub retweet_rate: f64,
    pub reply_rate: f64,
    /// Chance that a reply targets the other community.
    pub cross_reply_rate: f64,
    /// Share of reply gold labels flipped against the community rule.
    pub label_noise: f64,
    /// Chance that a reply carries a marker word for its gold label.
    pub marker_rate: f64,
    pub url_rate: f64,
    pub mention_rate: f64,
    pub events: Vec<String>,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_users: 200,
            n_hashtags: 20,
            polarity: 0.8,
            seed: 7,
            tweets_per_user: 6,
            exclusive_hashtags: 5,
            seed_user_fraction: 0.1,
            words_per_community: 40,
            shared_words: 60,
            words_per_tweet: 8,
            retweet_rate: 0.15,
            reply_rate: 0.3,
            cross_reply_rate: 0.5,
            label_noise: 0.1,
            marker_rate: 1.0,
            url_rate: 0.2,
            mention_rate: 0.2,
            events: vec!["synthetic".to_string()],
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_users < 4 || !self.n_users.is_multiple_of(2) {
            return Err(Error::param("n_users", "must be even and at least 4"));
        }
        if self.n_hashtags == 0 || self.words_per_community == 0 || self.tweets_per_user == 0 {
            return Err(Error::param(
                "n_hashtags",
                "vocabulary sizes and tweets per user must be positive",
            ));
        }
        if self.events.is_empty() {
            return Err(Error::param("events", "at least one event is needed"));
        }
        let fractions = [
            ("polarity", self.polarity),
            ("seed_user_fraction", self.seed_user_fraction),
            ("retweet_rate", self.retweet_rate),
            ("reply_rate", self.reply_rate),
            ("cross_reply_rate", self.cross_reply_rate),
            ("label_noise", self.label_noise),
            ("marker_rate", self.marker_rate),
            ("url_rate", self.url_rate),
            ("mention_rate", self.mention_rate),
        ];
        for (name, v) in fractions {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::param(name, format!("{v} is outside [0, 1]")));
            }
        }
        if self.retweet_rate + self.reply_rate > 1.0 {
            return Err(Error::param("reply_rate", "retweet_rate + reply_rate exceeds 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub corpus: TweetCorpus,
    pub user_stance: BTreeMap<String, Stance>,
    /// Every extracted reply pair with its gold label.
    pub gold_pairs: Vec<ConversationPair>,
    pub seeds: SeedHashtagSet,
    /// Hashtags used by one community only, seed hashtags excluded.
    pub exclusive: BTreeMap<Stance, Vec<String>>,
}

struct Community {
    stance: Stance,
    users: Vec<String>,
    hashtags: Vec<String>,
    exclusive: Vec<String>,
    words: Vec<String>,
    domains: Vec<String>,
    seed_tag: String,
}

pub fn generate_synthetic_corpus(config: &SynthConfig) -> Result<SyntheticCorpus> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let half = config.n_users / 2;
    let width = config.n_users.to_string().len();
    let make = |stance: Stance, prefix: char, offset: usize| Community {
        stance,
        users: (0..half).map(|i| format!("user{:0width$}", offset + i)).collect(),
        hashtags: (0..config.n_hashtags).map(|i| format!("{prefix}tag{i}")).collect(),
        exclusive: (0..config.exclusive_hashtags)
            .map(|i| format!("{prefix}only{i}"))
            .collect(),
        words: (0..config.words_per_community)
            .map(|i| format!("{prefix}word{i}"))
            .collect(),
        domains: (0..4).map(|i| format!("{prefix}news{i}.example")).collect(),
        seed_tag: format!("{prefix}seed"),
    };
    let sides = [make(Stance::Pro, 'p', 0), make(Stance::Anti, 'q', half)];
    let shared: Vec<String> = (0..config.shared_words).map(|i| format!("word{i}")).collect();
    let n_seed_users = ((config.seed_user_fraction * half as f64).round() as usize).clamp(1, half);
    let own_prob = (1.0 + config.polarity) / 2.0;

    // user index -> (side, position within side)
    let mut order: Vec<(usize, usize)> = (0..half).flat_map(|i| [(0, i), (1, i)]).collect();
    let mut tweets: Vec<Tweet> = Vec::with_capacity(config.n_users * config.tweets_per_user);
    let mut by_side: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    let mut noisy: BTreeSet<String> = BTreeSet::new();
    let id_width = (config.n_users * config.tweets_per_user).to_string().len();

    for round in 0..config.tweets_per_user {
        // interleave users so every round can reply to earlier rounds
        shuffle(&mut order, &mut rng);
        for &(side, pos) in &order {
            let me = &sides[side];
            let other = &sides[1 - side];
            let user = &me.users[pos];
            let pick_side = |rng: &mut ChaCha8Rng| if rng.random_bool(own_prob) { me } else { other };
            let tweet_id = format!("t{:0id_width$}", tweets.len());
            let event = config.events.choose(&mut rng).expect("events validated").clone();

            let roll: f64 = rng.random();
            if round > 0 && roll < config.retweet_rate && !tweets.is_empty() {
                let src_side = if rng.random_bool(own_prob) { side } else { 1 - side };
                if let Some(&t) = by_side[src_side].choose(&mut rng) {
                    let original = &tweets[t];
                    if original.user_id != *user && original.retweet_of.is_none() {
                        let text = format!("RT @{}: {}", original.user_id, original.text);
                        let rt = Tweet::new(
                            tweet_id,
                            user.clone(),
                            text,
                            None,
                            Some(original.tweet_id.clone()),
                            None,
                            original.event.clone(),
                        );
                        by_side[side].push(tweets.len());
                        tweets.push(rt);
                        continue;
                    }
                }
            }

            let mut words: Vec<String> = Vec::new();
            for _ in 0..config.words_per_tweet {
                let w = if rng.random_bool(0.5) {
                    pick_side(&mut rng).words.choose(&mut rng)
                } else {
                    shared.choose(&mut rng)
                };
                if let Some(w) = w {
                    words.push(w.clone());
                }
            }
            words.push(format!(
                "#{}",
                pick_side(&mut rng).hashtags.choose(&mut rng).expect("hashtags")
            ));
            if !me.exclusive.is_empty() && rng.random_bool(0.3) {
                words.push(format!("#{}", me.exclusive.choose(&mut rng).expect("exclusive")));
            }
            if pos < n_seed_users && round == 0 {
                words.push(format!("#{}", me.seed_tag));
            }
            if rng.random_bool(config.mention_rate) {
                let target = pick_side(&mut rng).users.choose(&mut rng).expect("users");
                if target != user {
                    words.push(format!("@{target}"));
                }
            }
            if rng.random_bool(config.url_rate) {
                let domain = pick_side(&mut rng).domains.choose(&mut rng).expect("domains");
                words.push(format!("https://{domain}/{}", rng.random_range(0..1000)));
            }

            let mut reply_to = None;
            let mut event = event;
            if round > 0 && roll >= config.retweet_rate && roll < config.retweet_rate + config.reply_rate {
                let cross = rng.random_bool(config.cross_reply_rate);
                let target_side = if cross { 1 - side } else { side };
                if let Some(&t) = by_side[target_side].choose(&mut rng) {
                    let target = &tweets[t];
                    if target.user_id != *user {
                        let mut label = if cross { PairLabel::Oppose } else { PairLabel::Favor };
                        if rng.random_bool(config.label_noise) {
                            label = if cross { PairLabel::Favor } else { PairLabel::Oppose };
                            noisy.insert(tweet_id.clone());
                        }
                        if rng.random_bool(config.marker_rate) {
                            let markers = if label == PairLabel::Favor {
                                &FAVOR_MARKERS
                            } else {
                                &OPPOSE_MARKERS
                            };
                            let at = rng.random_range(0..=words.len());
                            words.insert(at, markers.choose(&mut rng).expect("markers").to_string());
                        }
                        reply_to = Some(target.tweet_id.clone());
                        event = target.event.clone();
                    }
                }
            }
            let tweet = Tweet::new(tweet_id, user.clone(), words.join(" "), None, None, reply_to, event);
            by_side[side].push(tweets.len());
            tweets.push(tweet);
        }
    }

    let mut user_stance = BTreeMap::new();
    for side in &sides {
        for u in &side.users {
            user_stance.insert(u.clone(), side.stance);
        }
    }
    let corpus = TweetCorpus::from_tweets(tweets);
    let (pairs, _) = extract_conversations(&corpus);
    let gold_pairs = pairs
        .into_iter()
        .map(|mut p| {
            let same = user_stance.get(&p.source_user) == user_stance.get(&p.reply_user);
            let flip = noisy.contains(&p.reply_tweet_id);
            p.label = if same != flip {
                PairLabel::Favor
            } else {
                PairLabel::Oppose
            };
            p.label_kind = Some(LabelKind::Gold);
            p
        })
        .collect();
    let seeds = SeedHashtagSet::new([
        (sides[0].seed_tag.clone(), Stance::Pro),
        (sides[1].seed_tag.clone(), Stance::Anti),
    ])?;
    let exclusive = sides.iter().map(|s| (s.stance, s.exclusive.clone())).collect();
    Ok(SyntheticCorpus {
        corpus,
        user_stance,
        gold_pairs,
        seeds,
        exclusive,
    })
}

fn shuffle<T>(items: &mut [T], rng: &mut ChaCha8Rng) {
    use rand::seq::SliceRandom;
    items.shuffle(rng);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_user_hashtag_matrix;
    use crate::propagation::seed_user_stance;

    fn small(polarity: f64) -> SynthConfig {
        SynthConfig {
            n_users: 60,
            polarity,
            ..SynthConfig::default()
        }
    }

    #[test]
    fn reproducible_from_seed() {
        let a = generate_synthetic_corpus(&small(0.8)).unwrap();
        let b = generate_synthetic_corpus(&small(0.8)).unwrap();
        assert_eq!(a.corpus.tweets(), b.corpus.tweets());
        assert_eq!(a.gold_pairs, b.gold_pairs);
        let c = generate_synthetic_corpus(&SynthConfig { seed: 8, ..small(0.8) }).unwrap();
        assert_ne!(a.corpus.tweets(), c.corpus.tweets());
    }

    #[test]
    fn shape() {
        let s = generate_synthetic_corpus(&small(0.8)).unwrap();
        assert_eq!(s.corpus.users().len(), 60);
        assert_eq!(s.user_stance.values().filter(|&&v| v == Stance::Pro).count(), 30);
        assert_eq!(s.corpus.len(), 60 * 6);
        assert!(!s.gold_pairs.is_empty());
        assert!(s.gold_pairs.iter().all(|p| p.label != PairLabel::Unknown));
        assert!(s.corpus.tweets().iter().any(|t| t.retweet_of.is_some()));
        assert!(s.corpus.tweets().iter().any(|t| !t.domains.is_empty()));
        assert_eq!(s.seeds.len(), 2);
    }

    #[test]
    fn exclusive_and_seed_hashtags_stay_in_their_community() {
        let s = generate_synthetic_corpus(&small(0.3)).unwrap();
        for t in s.corpus.tweets() {
            let side = s.user_stance[&t.user_id];
            if t.retweet_of.is_some() {
                continue;
            }
            for h in &t.hashtags {
                if let Some(label) = s.seeds.get(h) {
                    assert_eq!(label, side);
                }
                for (&stance, tags) in &s.exclusive {
                    if tags.contains(h) {
                        assert_eq!(stance, side);
                    }
                }
            }
        }
    }

    #[test]
    fn disjoint_vocabularies_separate_perfectly() {
        let s = generate_synthetic_corpus(&small(1.0)).unwrap();
        for t in s.corpus.tweets() {
            let prefix = if s.user_stance[&t.user_id] == Stance::Pro {
                'p'
            } else {
                'q'
            };
            for h in &t.hashtags {
                assert!(h.starts_with(prefix), "{h} in {}", t.user_id);
            }
        }
        let h = build_user_hashtag_matrix(&s.corpus, 250, &s.seeds.hashtags()).unwrap();
        let seeded = seed_user_stance(&h, &s.seeds).unwrap();
        for (id, st, _) in seeded.iter() {
            if st.is_known() {
                assert_eq!(st, s.user_stance[id]);
            }
        }
    }

    #[test]
    fn noise_rate_is_respected() {
        let cfg = SynthConfig {
            n_users: 400,
            label_noise: 0.1,
            ..SynthConfig::default()
        };
        let s = generate_synthetic_corpus(&cfg).unwrap();
        let flipped = s
            .gold_pairs
            .iter()
            .filter(|p| {
                let same = s.user_stance[&p.source_user] == s.user_stance[&p.reply_user];
                (p.label == PairLabel::Favor) != same
            })
            .count();
        let rate = flipped as f64 / s.gold_pairs.len() as f64;
        assert!((0.05..0.15).contains(&rate), "{rate}");
    }

    #[test]
    fn rejects_bad_parameters() {
        for cfg in [
            small(1.5),
            small(-0.1),
            SynthConfig {
                n_users: 3,
                ..small(0.5)
            },
            SynthConfig {
                n_users: 7,
                ..small(0.5)
            },
        ] {
            assert!(generate_synthetic_corpus(&cfg).is_err());
        }
    }
}
