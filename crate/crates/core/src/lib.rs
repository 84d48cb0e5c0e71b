//! Weakly supervised stance detection for social-media users and
//! source/reply conversations.
//!
//! A few hand-labeled hashtags seed user stances; linear-threshold label
//! propagation over the user × entity graph is co-trained with a TF-IDF text
//! classifier; the resulting user stances become weak Favor/Oppose labels
//! for reply pairs, on which a conversation classifier is trained.

pub mod convclf;
pub mod corpus;
pub mod cotrain;
pub mod error;
pub mod eval;
pub mod graph;
pub mod pipeline;
pub mod propagation;
pub mod synth;
pub mod textclf;
pub mod weaklabel;

pub use error::{Error, Result};
