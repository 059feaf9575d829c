//! Exact offline Viterbi decoding and a brute-force oracle for small inputs.
//!
//! All scoring happens in natural-log space. Ties are broken deterministically
//! toward the lower stage index, both at every backpointer choice and at the
//! final column argmax, so earlier-stage interpretations win.

use thiserror::Error;

use crate::model::{HmmModel, LogModel};
use crate::stage::{StageLabel, STAGE_COUNT};

/// Maximum observation length accepted by [`brute_force_decode`]
/// (the enumeration visits `4^T` state sequences).
pub const BRUTE_FORCE_MAX_LEN: usize = 12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DecodeError {
    #[error("observation sequence is empty")]
    EmptyObservations,
    #[error("no state sequence can explain the observations (all likelihoods zero at frame {frame})")]
    ImpossibleObservation { frame: usize },
    #[error("sequence lengths differ: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("sequence of length {len} exceeds the brute-force limit of {max}")]
    SequenceTooLong { len: usize, max: usize },
    #[error("invalid decoder configuration: {reason}")]
    ConfigInvalid { reason: String },
    #[error("truth labels are not monotone non-decreasing at frame {frame}")]
    TruthNotMonotone { frame: usize },
}

/// Index of the maximum entry, preferring the lower index on ties.
#[inline]
pub(crate) fn argmax_lowest(scores: &[f64; STAGE_COUNT]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

/// Most likely stage sequence for `observations` under `model`.
///
/// Returns [`DecodeError::ImpossibleObservation`] when every state sequence
/// has probability zero (for example an observation that no reachable stage
/// can emit under a zero-entry emission matrix).
#[allow(clippy::needless_range_loop)] // indexed DP over parallel lattices
pub fn viterbi_decode(
    model: &HmmModel,
    observations: &[StageLabel],
) -> Result<Vec<StageLabel>, DecodeError> {
    if observations.is_empty() {
        return Err(DecodeError::EmptyObservations);
    }
    let log = model.log();
    let len = observations.len();

    let mut scores = vec![[f64::NEG_INFINITY; STAGE_COUNT]; len];
    let mut backptr = vec![[0usize; STAGE_COUNT]; len];

    let first = observations[0].index();
    for state in 0..STAGE_COUNT {
        scores[0][state] = log.log_pi[state] + log.log_emission[state][first];
    }
    if scores[0].iter().all(|s| *s == f64::NEG_INFINITY) {
        return Err(DecodeError::ImpossibleObservation { frame: 0 });
    }

    for t in 1..len {
        let obs = observations[t].index();
        let mut any_finite = false;
        for state in 0..STAGE_COUNT {
            let mut best = f64::NEG_INFINITY;
            let mut best_prev = state;
            for prev in 0..STAGE_COUNT {
                let candidate = scores[t - 1][prev] + log.log_transition[prev][state];
                if candidate > best {
                    best = candidate;
                    best_prev = prev;
                }
            }
            let score = best + log.log_emission[state][obs];
            scores[t][state] = score;
            backptr[t][state] = best_prev;
            any_finite |= score != f64::NEG_INFINITY;
        }
        if !any_finite {
            return Err(DecodeError::ImpossibleObservation { frame: t });
        }
    }

    let mut state = argmax_lowest(&scores[len - 1]);
    let mut path = vec![StageLabel::Esophagus; len];
    path[len - 1] = StageLabel::from_index(state).unwrap();
    for t in (1..len).rev() {
        state = backptr[t][state];
        path[t - 1] = StageLabel::from_index(state).unwrap();
    }
    Ok(path)
}

/// Joint log-likelihood of a state path and an observation sequence:
/// `log pi[x_0] + sum log a[x_{t-1}][x_t] + sum log b[x_t][o_t]`.
/// Negative infinity when any factor is zero.
pub fn path_log_likelihood(
    model: &HmmModel,
    path: &[StageLabel],
    observations: &[StageLabel],
) -> Result<f64, DecodeError> {
    if path.len() != observations.len() {
        return Err(DecodeError::LengthMismatch { left: path.len(), right: observations.len() });
    }
    if observations.is_empty() {
        return Err(DecodeError::EmptyObservations);
    }
    Ok(score_path(&model.log(), path, observations))
}

fn score_path(log: &LogModel, path: &[StageLabel], observations: &[StageLabel]) -> f64 {
    let mut total = log.log_pi[path[0].index()] + log.log_emission[path[0].index()][observations[0].index()];
    for t in 1..path.len() {
        total += log.log_transition[path[t - 1].index()][path[t].index()]
            + log.log_emission[path[t].index()][observations[t].index()];
    }
    total
}

/// Independent oracle: enumerate every one of the `4^T` state sequences and
/// return the joint-likelihood argmax. Sequences are visited in lexicographic
/// order and only a strictly better score replaces the incumbent, so among
/// tied maxima the lexicographically smallest path wins — the same
/// lower-stage preference as [`viterbi_decode`].
pub fn brute_force_decode(
    model: &HmmModel,
    observations: &[StageLabel],
) -> Result<Vec<StageLabel>, DecodeError> {
    if observations.is_empty() {
        return Err(DecodeError::EmptyObservations);
    }
    let len = observations.len();
    if len > BRUTE_FORCE_MAX_LEN {
        return Err(DecodeError::SequenceTooLong { len, max: BRUTE_FORCE_MAX_LEN });
    }
    let log = model.log();

    let mut assignment = vec![StageLabel::Esophagus; len];
    let mut best_path: Option<Vec<StageLabel>> = None;
    let mut best_score = f64::NEG_INFINITY;
    loop {
        let score = score_path(&log, &assignment, observations);
        if score > best_score {
            best_score = score;
            best_path = Some(assignment.clone());
        }
        // Odometer increment in lexicographic order, most significant digit first.
        let mut pos = len;
        loop {
            if pos == 0 {
                match best_path {
                    Some(path) => return Ok(path),
                    None => {
                        return Err(DecodeError::ImpossibleObservation { frame: len - 1 });
                    }
                }
            }
            pos -= 1;
            match assignment[pos].next() {
                Some(next) => {
                    assignment[pos] = next;
                    break;
                }
                None => assignment[pos] = StageLabel::Esophagus,
            }
        }
    }
}
