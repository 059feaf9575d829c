//! Metric table rendering shared by `decode` and `evaluate`, so re-evaluating
//! a decoded file reproduces the decode-time output byte for byte.

use gistage_core::metrics::{self, AggregateMetrics, StudyMetrics};
use gistage_core::StageLabel;

fn format_delay(delay: Option<i64>) -> String {
    delay.map(|d| d.to_string()).unwrap_or_else(|| "--".into())
}

pub fn render_per_study(all: &[StudyMetrics]) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<16} {:>9} {:>10} {:>8} {:>8} {:>9}\n",
        "study", "frames", "accuracy%", "MAE", "R2", "SI delay"
    ));
    for m in all {
        out.push_str(&format!(
            "{:<16} {:>9} {:>10.2} {:>8.4} {:>8.4} {:>9}\n",
            m.study_id,
            m.frame_count(),
            m.accuracy * 100.0,
            m.mae,
            m.r2,
            format_delay(m.delays[StageLabel::SmallIntestine.index()]),
        ));
    }
    out
}

pub fn render_aggregate(agg: &AggregateMetrics) -> String {
    let delay = agg
        .small_intestine_delay
        .map(|d| format!("{:.2}", d.mean))
        .unwrap_or_else(|| "--".into());
    let mut out = String::new();
    out.push_str(&format!("{} studies\n", agg.studies));
    out.push_str(&format!("{:<26} {:>9.2}\n", "Accuracy [%]", agg.mean_accuracy * 100.0));
    out.push_str(&format!("{:<26} {:>9.4}\n", "Averaged MAE", agg.mean_mae));
    out.push_str(&format!("{:<26} {:>9.4}\n", "Averaged R2-Score", agg.mean_r2));
    out.push_str(&format!("{:<26} {:>9}\n", "Average Delay (# Frames)", delay));
    out
}

/// Frame-pooled alternative: all studies concatenated into one sequence.
pub fn render_pooled(pairs: &[(Vec<StageLabel>, Vec<StageLabel>)]) -> String {
    let pred: Vec<StageLabel> = pairs.iter().flat_map(|(p, _)| p.iter().copied()).collect();
    let truth: Vec<StageLabel> = pairs.iter().flat_map(|(_, t)| t.iter().copied()).collect();
    let mut out = String::new();
    out.push_str("pooled over frames:\n");
    match (
        metrics::accuracy(&pred, &truth),
        metrics::mae(&pred, &truth),
        metrics::r2(&pred, &truth),
    ) {
        (Ok(acc), Ok(mae), Ok(r2)) => {
            out.push_str(&format!("{:<26} {:>9.2}\n", "Pooled Accuracy [%]", acc * 100.0));
            out.push_str(&format!("{:<26} {:>9.4}\n", "Pooled MAE", mae));
            out.push_str(&format!("{:<26} {:>9.4}\n", "Pooled R2-Score", r2));
        }
        _ => out.push_str("(no frames)\n"),
    }
    out
}
