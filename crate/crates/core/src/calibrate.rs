//! Grid search over transition and emission parameters.
//!
//! The searched family keeps the grid small: one shared transition diagonal
//! `d` (superdiagonal `1 - d`, colon absorbing, everything else zero) and one
//! emission correct-probability `c` (residual mass uniform over the other
//! labels). The objective is the mean of per-study accuracies, not pooled
//! frame accuracy.

use rayon::prelude::*;
use thiserror::Error;

use crate::metrics::accuracy;
use crate::model::{bidiagonal, confusion, start_in_esophagus, HmmModel};
use crate::streaming::{decode_study, DecodeError, DecoderConfig, EmitMode};
use crate::study::Study;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CalibrationError {
    #[error("grid search needs at least one study with truth labels")]
    NoLabeledStudies,
    #[error("candidate list for {name} is empty")]
    EmptyGrid { name: &'static str },
    #[error("{name} = {value} is outside the open interval (0, 1)")]
    OutOfRange { name: &'static str, value: f64 },
    #[error(transparent)]
    Decode(#[from] DecodeError),
}

/// Candidate values for the two searched parameters plus the decoding window.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub transition_diag_candidates: Vec<f64>,
    pub emission_correct_candidates: Vec<f64>,
    pub window: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            transition_diag_candidates: vec![0.9, 0.99, 0.999, 0.9999],
            emission_correct_candidates: vec![0.85, 0.90, 0.95, 0.97],
            window: 300,
        }
    }
}

impl GridSpec {
    fn validate(&self) -> Result<(), CalibrationError> {
        if self.transition_diag_candidates.is_empty() {
            return Err(CalibrationError::EmptyGrid { name: "transition-diag" });
        }
        if self.emission_correct_candidates.is_empty() {
            return Err(CalibrationError::EmptyGrid { name: "emission-correct" });
        }
        for &d in &self.transition_diag_candidates {
            check_open_unit("transition-diag", d)?;
        }
        for &c in &self.emission_correct_candidates {
            check_open_unit("emission-correct", c)?;
        }
        Ok(())
    }
}

fn check_open_unit(name: &'static str, value: f64) -> Result<(), CalibrationError> {
    if !(value > 0.0 && value < 1.0) {
        return Err(CalibrationError::OutOfRange { name, value });
    }
    Ok(())
}

/// One evaluated grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub transition_diag: f64,
    pub emission_correct: f64,
    pub mean_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationResult {
    pub best_transition_diag: f64,
    pub best_emission_correct: f64,
    pub best_mean_accuracy: f64,
    /// Every grid point, in (diag-major, correct-minor) candidate order.
    pub full_table: Vec<GridPoint>,
}

/// Model for a `(transition_diag, emission_correct)` grid point:
/// shared-diagonal left-to-right transitions, symmetric confusion emissions,
/// start pinned to the esophagus.
pub fn build_model(
    transition_diag: f64,
    emission_correct: f64,
) -> Result<HmmModel, CalibrationError> {
    check_open_unit("transition-diag", transition_diag)?;
    check_open_unit("emission-correct", emission_correct)?;
    Ok(HmmModel::new(
        start_in_esophagus(),
        bidiagonal(transition_diag),
        confusion(emission_correct),
    )
    .expect("bidiagonal/confusion construction is stochastic by construction"))
}

/// Evaluate every grid point against every labeled study and return the
/// argmax of mean per-study smoothed accuracy. Ties break toward the larger
/// diagonal, then the larger emission probability.
pub fn grid_search(
    grid: &GridSpec,
    studies: &[Study],
) -> Result<CalibrationResult, CalibrationError> {
    grid.validate()?;
    if studies.is_empty() || studies.iter().any(|s| s.truth.is_none() || s.is_empty()) {
        return Err(CalibrationError::NoLabeledStudies);
    }

    let config = DecoderConfig {
        window: grid.window,
        emit_mode: EmitMode::Smoothed,
        ..DecoderConfig::default()
    };
    config.validate()?;

    let points: Vec<(f64, f64)> = grid
        .transition_diag_candidates
        .iter()
        .flat_map(|&d| grid.emission_correct_candidates.iter().map(move |&c| (d, c)))
        .collect();

    let full_table: Vec<GridPoint> = points
        .par_iter()
        .map(|&(d, c)| {
            let model = build_model(d, c)?;
            let accuracies: Vec<f64> = studies
                .par_iter()
                .map(|study| {
                    let truth = study.truth.as_deref().unwrap();
                    let decoded = decode_study(&model, config, &study.observed, Some(truth))?;
                    Ok(accuracy(&decoded.labels, truth)
                        .expect("studies validated non-empty with matching truth"))
                })
                .collect::<Result<_, CalibrationError>>()?;
            // Summed in study order so the table is bit-identical across runs.
            let total: f64 = accuracies.iter().sum();
            Ok(GridPoint {
                transition_diag: d,
                emission_correct: c,
                mean_accuracy: total / studies.len() as f64,
            })
        })
        .collect::<Result<_, CalibrationError>>()?;

    let best = full_table
        .iter()
        .copied()
        .reduce(|incumbent, candidate| {
            let better = candidate.mean_accuracy > incumbent.mean_accuracy
                || (candidate.mean_accuracy == incumbent.mean_accuracy
                    && (candidate.transition_diag > incumbent.transition_diag
                        || (candidate.transition_diag == incumbent.transition_diag
                            && candidate.emission_correct > incumbent.emission_correct)));
            if better {
                candidate
            } else {
                incumbent
            }
        })
        .expect("grid is non-empty");

    Ok(CalibrationResult {
        best_transition_diag: best.transition_diag,
        best_emission_correct: best.emission_correct,
        best_mean_accuracy: best.mean_accuracy,
        full_table,
    })
}
