//! Weak Favor/Oppose labels for reply pairs from the two users' stances.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{ConversationPair, LabelKind, PairLabel};
use crate::error::{Error, Result};
use crate::propagation::{Stance, StanceTable};

/// Unknown if either stance is unknown, Oppose if they differ, Favor
/// otherwise.
pub fn weak_label(a: Stance, b: Stance) -> PairLabel {
    if !a.is_known() || !b.is_known() {
        PairLabel::Unknown
    } else if a != b {
        PairLabel::Oppose
    } else {
        PairLabel::Favor
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct WeakLabelStats {
    pub pairs: usize,
    pub favor: usize,
    pub oppose: usize,
    pub unknown: usize,
    /// Pairs dropped because their reply id is in the gold set.
    pub excluded_gold: usize,
    /// Labeled share of the pairs that were not excluded.
    pub coverage: f64,
}

/// Labels every pair not listed in `gold_reply_ids` and returns those with a
/// known label, in input order, marked as weak.
pub fn label_conversations(
    pairs: &[ConversationPair],
    stances: &StanceTable,
    gold_reply_ids: &HashSet<String>,
) -> (Vec<ConversationPair>, WeakLabelStats) {
    let mut stats = WeakLabelStats {
        pairs: pairs.len(),
        ..WeakLabelStats::default()
    };
    let mut out = Vec::new();
    for p in pairs {
        if gold_reply_ids.contains(&p.reply_tweet_id) {
            stats.excluded_gold += 1;
            continue;
        }
        let label = weak_label(stances.stance_of(&p.source_user), stances.stance_of(&p.reply_user));
        match label {
            PairLabel::Favor => stats.favor += 1,
            PairLabel::Oppose => stats.oppose += 1,
            PairLabel::Unknown => {
                stats.unknown += 1;
                continue;
            }
        }
        out.push(ConversationPair {
            label,
            label_kind: Some(LabelKind::Weak),
            ..p.clone()
        });
    }
    let considered = stats.pairs - stats.excluded_gold;
    stats.coverage = if considered == 0 {
        0.0
    } else {
        (stats.favor + stats.oppose) as f64 / considered as f64
    };
    (out, stats)
}

/// Training file for the conversation classifier, one row per pair.
pub fn write_weak_labels_csv(path: &Path, pairs: &[ConversationPair]) -> Result<()> {
    let csv_err = |e: csv::Error| Error::parse("weak label csv", e);
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record([
        "source_tweet_id",
        "reply_tweet_id",
        "source_user",
        "reply_user",
        "event",
        "source_text",
        "reply_text",
        "weak_label",
    ])
    .map_err(csv_err)?;
    for p in pairs {
        let label = p.label.value().to_string();
        w.write_record([
            p.source_tweet_id.as_str(),
            &p.reply_tweet_id,
            &p.source_user,
            &p.reply_user,
            &p.event,
            &p.source_text,
            &p.reply_text,
            &label,
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
