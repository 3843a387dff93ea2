//! Face-mask opinion analysis on tweet corpora.
//!
//! The pipeline runs in stages, each in its own module:
//!
//! * [`corpus`]: parse, clean, tokenize and filter tweets for mask terms.
//! * [`sentiment`]: lexicon-and-rules valence scoring with compound scores in `[-1, 1]`.
//! * [`demographics`]: per-user labels from annotations, name, location, timeline and follows.
//! * [`topics`]: LDA by collapsed Gibbs sampling with UMass coherence model selection.
//! * [`changepoint`]: daily sentiment series and exact penalized segmentation (PELT).

pub mod changepoint;
pub mod corpus;
pub mod demographics;
pub mod sentiment;
pub mod topics;
