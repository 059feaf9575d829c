//! Localization of a capsule endoscope within the GI tract from noisy
//! per-frame classifier labels.
//!
//! A swallowed capsule traverses esophagus, stomach, small intestine and
//! colon in that order. An upstream classifier labels each video frame with
//! one of those four stages, imperfectly. This crate treats the label stream
//! as emissions of a left-to-right hidden Markov model and recovers a
//! corrected, monotone stage sequence:
//!
//! - [`model`] — validated HMM parameters (initial distribution, bidiagonal
//!   transition matrix, emission matrix) and their log-space form.
//! - [`viterbi`] — exact offline decoding plus a brute-force oracle.
//! - [`streaming`] — the online decoder: a sliding window of Viterbi columns
//!   with first-column eviction, a lock-in floor that makes detected
//!   transitions irrevocable, and per-stage detection-delay events.
//! - [`calibrate`] — grid search for the transition/emission parameters
//!   maximizing mean per-study accuracy.
//! - [`simulate`] — synthetic studies: monotone stage segments plus
//!   confusion-matrix label noise.
//! - [`metrics`] — accuracy, MAE, R², confusion counts, delay statistics.
//! - [`io`] — the studies/decoded/events CSV formats and the TOML model file.
//!
//! All decoding is deterministic: identical inputs produce bit-identical
//! outputs. Types are immutable after construction except [`streaming::Decoder`],
//! which is single-owner and driven frame by frame.
//!
//! ```
//! use gistage_core::calibrate::build_model;
//! use gistage_core::{decode_study, DecoderConfig, StageLabel};
//!
//! let model = build_model(0.999, 0.95).unwrap();
//! let observed: Vec<StageLabel> = [0, 0, 0, 1, 0, 1, 1, 1, 2, 2, 2, 2]
//!     .iter()
//!     .map(|&i| StageLabel::from_index(i).unwrap())
//!     .collect();
//! let decoded = decode_study(&model, DecoderConfig::default(), &observed, None).unwrap();
//! assert_eq!(decoded.labels.len(), observed.len());
//! // The corrected sequence never moves backwards through the tract.
//! assert!(decoded.labels.windows(2).all(|w| w[0] <= w[1]));
//! ```

pub mod calibrate;
pub mod io;
#[cfg(test)]
pub(crate) mod testutil;
pub mod metrics;
pub mod model;
pub mod simulate;
pub mod stage;
pub mod streaming;
pub mod study;
pub mod viterbi;

pub use model::{HmmModel, LogModel, ModelError};
pub use stage::{StageLabel, STAGE_COUNT};
pub use streaming::{
    decode_study, DecodedStudy, Decoder, DecoderConfig, EmitMode, FrameDecision, TransitionEvent,
};
pub use study::Study;
pub use viterbi::{brute_force_decode, path_log_likelihood, viterbi_decode, DecodeError};
