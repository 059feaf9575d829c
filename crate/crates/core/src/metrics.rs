//! Per-study and aggregate evaluation: accuracy, MAE, R², confusion counts
//! and transition-detection delays.
//!
//! Labels are treated as ordinals 0..3 for MAE and R². Aggregation averages
//! per-study values without frame weighting (per-patient means); confusion
//! counts are pooled by summation.

use thiserror::Error;

use crate::stage::{StageLabel, STAGE_COUNT};
use crate::streaming::{first_decrease, TransitionEvent};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("sequence lengths differ: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("metric input is empty")]
    Empty,
    #[error("truth labels are not monotone non-decreasing at frame {frame}")]
    TruthNotMonotone { frame: usize },
}

fn check_pair(pred: &[StageLabel], truth: &[StageLabel]) -> Result<(), MetricsError> {
    if pred.len() != truth.len() {
        return Err(MetricsError::LengthMismatch { left: pred.len(), right: truth.len() });
    }
    if pred.is_empty() {
        return Err(MetricsError::Empty);
    }
    Ok(())
}

/// Fraction of frames where `pred == truth`.
pub fn accuracy(pred: &[StageLabel], truth: &[StageLabel]) -> Result<f64, MetricsError> {
    check_pair(pred, truth)?;
    let matching = pred.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(matching as f64 / pred.len() as f64)
}

/// Mean absolute error over ordinal labels.
pub fn mae(pred: &[StageLabel], truth: &[StageLabel]) -> Result<f64, MetricsError> {
    check_pair(pred, truth)?;
    let total: u64 = pred
        .iter()
        .zip(truth)
        .map(|(p, t)| (p.index() as i64 - t.index() as i64).unsigned_abs())
        .sum();
    Ok(total as f64 / pred.len() as f64)
}

/// Coefficient of determination over ordinal labels: `1 - SS_res / SS_tot`.
/// When the truth is constant (`SS_tot == 0`): 1 if the prediction is exact,
/// 0 otherwise.
pub fn r2(pred: &[StageLabel], truth: &[StageLabel]) -> Result<f64, MetricsError> {
    check_pair(pred, truth)?;
    let n = truth.len() as f64;
    let mean: f64 = truth.iter().map(|t| t.index() as f64).sum::<f64>() / n;
    let ss_tot: f64 = truth.iter().map(|t| (t.index() as f64 - mean).powi(2)).sum();
    let ss_res: f64 = pred
        .iter()
        .zip(truth)
        .map(|(p, t)| (p.index() as f64 - t.index() as f64).powi(2))
        .sum();
    if ss_tot == 0.0 {
        return Ok(if ss_res == 0.0 { 1.0 } else { 0.0 });
    }
    Ok(1.0 - ss_res / ss_tot)
}

/// 4x4 count matrix: `counts[true][pred]` increments per frame.
pub fn confusion(
    pred: &[StageLabel],
    truth: &[StageLabel],
) -> Result<[[u64; STAGE_COUNT]; STAGE_COUNT], MetricsError> {
    if pred.len() != truth.len() {
        return Err(MetricsError::LengthMismatch { left: pred.len(), right: truth.len() });
    }
    let mut counts = [[0u64; STAGE_COUNT]; STAGE_COUNT];
    for (p, t) in pred.iter().zip(truth) {
        counts[t.index()][p.index()] += 1;
    }
    Ok(counts)
}

/// Signed detection delay per entered stage, indexed by stage
/// (index 0 is always `None`; a stage never detected stays `None`).
/// The reference point is the first frame at which the truth has reached the
/// stage or beyond, so a stage the truth skips is measured against the next
/// stage's start.
pub fn transition_delays(
    events: &[TransitionEvent],
    truth: &[StageLabel],
) -> Result<[Option<i64>; STAGE_COUNT], MetricsError> {
    if let Some(frame) = first_decrease(truth) {
        return Err(MetricsError::TruthNotMonotone { frame });
    }
    let mut delays = [None; STAGE_COUNT];
    for event in events {
        let stage = event.stage_entered;
        if let Some(true_frame) = truth.iter().position(|&t| t >= stage) {
            delays[stage.index()] = Some(event.detection_frame as i64 - true_frame as i64);
        }
    }
    Ok(delays)
}

/// Derive transition events from a label sequence alone: the detection frame
/// for a stage is the first frame labeled at that stage or beyond. Used when
/// re-evaluating a decoded file without the decoder's own event log.
pub fn detect_transitions_from_labels(labels: &[StageLabel]) -> Vec<TransitionEvent> {
    let mut events = Vec::new();
    for stage in StageLabel::ALL.iter().skip(1) {
        if let Some(frame) = labels.iter().position(|l| l >= stage) {
            events.push(TransitionEvent {
                stage_entered: *stage,
                detection_frame: frame,
                true_transition_frame: None,
                delay_frames: None,
            });
        }
    }
    events
}

/// Evaluation of one study.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyMetrics {
    pub study_id: String,
    pub accuracy: f64,
    pub mae: f64,
    pub r2: f64,
    /// `confusion[true][pred]` frame counts; totals equal the frame count.
    pub confusion: [[u64; STAGE_COUNT]; STAGE_COUNT],
    /// Signed detection delay per stage index, where detected.
    pub delays: [Option<i64>; STAGE_COUNT],
}

impl StudyMetrics {
    pub fn compute(
        study_id: impl Into<String>,
        pred: &[StageLabel],
        truth: &[StageLabel],
        events: &[TransitionEvent],
    ) -> Result<Self, MetricsError> {
        Ok(Self {
            study_id: study_id.into(),
            accuracy: accuracy(pred, truth)?,
            mae: mae(pred, truth)?,
            r2: r2(pred, truth)?,
            confusion: confusion(pred, truth)?,
            delays: transition_delays(events, truth)?,
        })
    }

    pub fn frame_count(&self) -> u64 {
        self.confusion.iter().flatten().sum()
    }
}

/// Summary statistics of a delay sample (in frames).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayStats {
    pub count: usize,
    pub mean: f64,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

impl DelayStats {
    /// None when the sample is empty. Quartiles use linear interpolation
    /// between order statistics.
    pub fn from_sample(delays: &[i64]) -> Option<DelayStats> {
        if delays.is_empty() {
            return None;
        }
        let mut sorted: Vec<f64> = delays.iter().map(|&d| d as f64).collect();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let quantile = |q: f64| -> f64 {
            let pos = q * (sorted.len() - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = pos.ceil() as usize;
            if lo == hi {
                sorted[lo]
            } else {
                sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
            }
        };
        Some(DelayStats {
            count: sorted.len(),
            mean: sorted.iter().sum::<f64>() / sorted.len() as f64,
            min: sorted[0],
            q1: quantile(0.25),
            median: quantile(0.5),
            q3: quantile(0.75),
            max: *sorted.last().unwrap(),
        })
    }
}

/// Corpus-level evaluation: unweighted per-study means, pooled confusion and
/// delay distributions. `small_intestine_delay` is the clinically relevant
/// stage-2 entry; `stage_delays` covers every transition.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateMetrics {
    pub studies: usize,
    pub mean_accuracy: f64,
    pub mean_mae: f64,
    pub mean_r2: f64,
    pub pooled_confusion: [[u64; STAGE_COUNT]; STAGE_COUNT],
    pub small_intestine_delay: Option<DelayStats>,
    pub stage_delays: [Option<DelayStats>; STAGE_COUNT],
}

/// Aggregate per-study metrics. Means are unweighted across studies
/// regardless of study length.
pub fn aggregate(study_metrics: &[StudyMetrics]) -> Result<AggregateMetrics, MetricsError> {
    if study_metrics.is_empty() {
        return Err(MetricsError::Empty);
    }
    let n = study_metrics.len() as f64;
    let mut pooled = [[0u64; STAGE_COUNT]; STAGE_COUNT];
    for metrics in study_metrics {
        for (pooled_row, row) in pooled.iter_mut().zip(&metrics.confusion) {
            for (pooled_cell, cell) in pooled_row.iter_mut().zip(row) {
                *pooled_cell += cell;
            }
        }
    }
    let stage_delays = std::array::from_fn(|stage| {
        let sample: Vec<i64> =
            study_metrics.iter().filter_map(|m| m.delays[stage]).collect();
        DelayStats::from_sample(&sample)
    });
    Ok(AggregateMetrics {
        studies: study_metrics.len(),
        mean_accuracy: study_metrics.iter().map(|m| m.accuracy).sum::<f64>() / n,
        mean_mae: study_metrics.iter().map(|m| m.mae).sum::<f64>() / n,
        mean_r2: study_metrics.iter().map(|m| m.r2).sum::<f64>() / n,
        pooled_confusion: pooled,
        small_intestine_delay: stage_delays[StageLabel::SmallIntestine.index()],
        stage_delays,
    })
}
