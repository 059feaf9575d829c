//! File formats: the studies CSV, the decoded CSV with its sibling events
//! file, and the TOML model file.
//!
//! The CSV dialect is deliberately minimal: UTF-8, LF line endings, a
//! mandatory header, integer labels, no quoting. Parsers validate structure
//! (contiguous frame indices, consistent truth columns) and report the
//! offending line; writers emit byte-deterministic output that their parser
//! accepts unchanged.

use std::fmt::Write as _;
use std::fs;
use std::io::BufRead;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{HmmModel, ModelError};
use crate::stage::StageLabel;
use crate::streaming::{DecodeError, DecoderConfig, EmitMode, TransitionEvent};
use crate::study::Study;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    IoFailure {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: malformed row: {reason}")]
    MalformedRow { line: usize, reason: String },
    #[error("line {line}: frames of study {study:?} are not contiguous from 0")]
    NonContiguousFrames { study: String, line: usize },
    #[error("line {line}: unknown label {value:?} (expected an integer 0..=3)")]
    UnknownLabel { line: usize, value: String },
    #[error("study {study:?} has truth for some rows but not others")]
    MixedTruthPresence { study: String },
    #[error("study {study:?}: sequence lengths differ: {left} vs {right}")]
    LengthMismatch { study: String, left: usize, right: usize },
    #[error("model file: {reason}")]
    MalformedModel { reason: String },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Config(#[from] DecodeError),
}

const STUDIES_HEADER: &str = "study_id,frame_index,observed_label";
const STUDIES_HEADER_TRUTH: &str = "study_id,frame_index,observed_label,true_label";
const DECODED_HEADER: &str = "study_id,frame_index,observed_label,decoded_label";
const DECODED_HEADER_TRUTH: &str = "study_id,frame_index,observed_label,decoded_label,true_label";
const EVENTS_HEADER: &str = "study_id,stage_entered,detection_frame,true_transition_frame,delay";

fn parse_label(field: &str, line: usize) -> Result<StageLabel, FormatError> {
    field
        .parse::<usize>()
        .ok()
        .and_then(StageLabel::from_index)
        .ok_or_else(|| FormatError::UnknownLabel { line, value: field.to_string() })
}

fn parse_frame_index(field: &str, line: usize) -> Result<usize, FormatError> {
    field.parse::<usize>().map_err(|_| FormatError::MalformedRow {
        line,
        reason: format!("frame index {field:?} is not a non-negative integer"),
    })
}

/// Streams grouped by consecutive `study_id` runs while enforcing per-study
/// frame contiguity and truth-column consistency.
struct StudyBuilder {
    has_truth_column: bool,
    seen: Vec<String>,
    current: Option<PartialStudy>,
    finished: Vec<Study>,
}

struct PartialStudy {
    id: String,
    observed: Vec<StageLabel>,
    truth: Vec<StageLabel>,
    truth_present: Option<bool>,
}

impl StudyBuilder {
    fn new(has_truth_column: bool) -> Self {
        Self { has_truth_column, seen: Vec::new(), current: None, finished: Vec::new() }
    }

    fn push(
        &mut self,
        line: usize,
        id: &str,
        frame: usize,
        observed: StageLabel,
        truth: Option<StageLabel>,
    ) -> Result<(), FormatError> {
        let start_new = match &self.current {
            Some(study) => study.id != id,
            None => true,
        };
        if start_new {
            self.close();
            if self.seen.iter().any(|s| s == id) {
                // A study id resurfacing after other studies means its frames
                // cannot be contiguous.
                return Err(FormatError::NonContiguousFrames { study: id.to_string(), line });
            }
            self.seen.push(id.to_string());
            self.current = Some(PartialStudy {
                id: id.to_string(),
                observed: Vec::new(),
                truth: Vec::new(),
                truth_present: None,
            });
        }
        let study = self.current.as_mut().unwrap();
        if frame != study.observed.len() {
            return Err(FormatError::NonContiguousFrames { study: study.id.clone(), line });
        }
        if self.has_truth_column {
            let present = truth.is_some();
            match study.truth_present {
                None => study.truth_present = Some(present),
                Some(expected) if expected != present => {
                    return Err(FormatError::MixedTruthPresence { study: study.id.clone() });
                }
                Some(_) => {}
            }
            if let Some(t) = truth {
                study.truth.push(t);
            }
        }
        study.observed.push(observed);
        Ok(())
    }

    fn close(&mut self) {
        if let Some(study) = self.current.take() {
            let truth = match study.truth_present {
                Some(true) => Some(study.truth),
                _ => None,
            };
            self.finished.push(Study { id: study.id, observed: study.observed, truth });
        }
    }

    fn into_studies(mut self) -> Vec<Study> {
        self.close();
        self.finished
    }
}

/// Parse the studies CSV format from any buffered reader.
pub fn parse_studies_reader<R: BufRead>(reader: R) -> Result<Vec<Study>, FormatError> {
    let mut lines = reader.lines().enumerate();
    let header = match lines.next() {
        Some((_, line)) => line?,
        None => {
            return Err(FormatError::MalformedRow { line: 1, reason: "missing header".into() })
        }
    };
    let has_truth = match header.trim_end_matches('\r') {
        STUDIES_HEADER => false,
        STUDIES_HEADER_TRUTH => true,
        other => {
            return Err(FormatError::MalformedRow {
                line: 1,
                reason: format!("unexpected header {other:?}"),
            })
        }
    };

    let mut builder = StudyBuilder::new(has_truth);
    let expected_fields = if has_truth { 4 } else { 3 };
    for (index, line) in lines {
        let line_no = index + 1;
        let row = line?;
        let row = row.trim_end_matches('\r');
        let fields: Vec<&str> = row.split(',').collect();
        if fields.len() != expected_fields {
            return Err(FormatError::MalformedRow {
                line: line_no,
                reason: format!("expected {expected_fields} fields, found {}", fields.len()),
            });
        }
        let frame = parse_frame_index(fields[1], line_no)?;
        let observed = parse_label(fields[2], line_no)?;
        let truth = if has_truth && !fields[3].is_empty() {
            Some(parse_label(fields[3], line_no)?)
        } else {
            None
        };
        builder.push(line_no, fields[0], frame, observed, truth)?;
    }
    Ok(builder.into_studies())
}

pub fn parse_studies_csv(path: &Path) -> Result<Vec<Study>, FormatError> {
    let file = fs::File::open(path)
        .map_err(|source| FormatError::IoFailure { path: path.to_path_buf(), source })?;
    parse_studies_reader(std::io::BufReader::new(file))
}

/// Render studies to the CSV format. The truth column appears when any study
/// carries truth; studies without truth leave the field empty.
pub fn studies_to_csv(studies: &[Study]) -> String {
    let any_truth = studies.iter().any(|s| s.truth.is_some());
    let mut out = String::new();
    out.push_str(if any_truth { STUDIES_HEADER_TRUTH } else { STUDIES_HEADER });
    out.push('\n');
    for study in studies {
        for (frame, &observed) in study.observed.iter().enumerate() {
            if any_truth {
                match &study.truth {
                    Some(truth) => {
                        let _ = writeln!(out, "{},{frame},{observed},{}", study.id, truth[frame]);
                    }
                    None => {
                        let _ = writeln!(out, "{},{frame},{observed},", study.id);
                    }
                }
            } else {
                let _ = writeln!(out, "{},{frame},{observed}", study.id);
            }
        }
    }
    out
}

pub fn write_studies_csv(path: &Path, studies: &[Study]) -> Result<(), FormatError> {
    fs::write(path, studies_to_csv(studies))
        .map_err(|source| FormatError::IoFailure { path: path.to_path_buf(), source })
}

/// One decoded study: the inputs, the decoder's output labels and the
/// transition events it detected.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodedStudyData {
    pub id: String,
    pub observed: Vec<StageLabel>,
    pub decoded: Vec<StageLabel>,
    pub truth: Option<Vec<StageLabel>>,
    pub events: Vec<TransitionEvent>,
}

/// Sibling events file for a decoded CSV: `decoded.csv` -> `decoded.events.csv`.
pub fn derive_events_path(path: &Path) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("decoded");
    path.with_file_name(format!("{stem}.events.csv"))
}

pub fn decoded_to_csv(studies: &[DecodedStudyData]) -> Result<String, FormatError> {
    let any_truth = studies.iter().any(|s| s.truth.is_some());
    let mut out = String::new();
    out.push_str(if any_truth { DECODED_HEADER_TRUTH } else { DECODED_HEADER });
    out.push('\n');
    for study in studies {
        if study.decoded.len() != study.observed.len() {
            return Err(FormatError::LengthMismatch {
                study: study.id.clone(),
                left: study.observed.len(),
                right: study.decoded.len(),
            });
        }
        if let Some(truth) = &study.truth {
            if truth.len() != study.observed.len() {
                return Err(FormatError::LengthMismatch {
                    study: study.id.clone(),
                    left: study.observed.len(),
                    right: truth.len(),
                });
            }
        }
        for (frame, (&observed, &decoded)) in
            study.observed.iter().zip(&study.decoded).enumerate()
        {
            if any_truth {
                match &study.truth {
                    Some(truth) => {
                        let _ = writeln!(
                            out,
                            "{},{frame},{observed},{decoded},{}",
                            study.id, truth[frame]
                        );
                    }
                    None => {
                        let _ = writeln!(out, "{},{frame},{observed},{decoded},", study.id);
                    }
                }
            } else {
                let _ = writeln!(out, "{},{frame},{observed},{decoded}", study.id);
            }
        }
    }
    Ok(out)
}

pub fn events_to_csv(studies: &[DecodedStudyData]) -> String {
    let mut out = String::new();
    out.push_str(EVENTS_HEADER);
    out.push('\n');
    for study in studies {
        for event in &study.events {
            let true_frame =
                event.true_transition_frame.map(|t| t.to_string()).unwrap_or_default();
            let delay = event.delay_frames.map(|d| d.to_string()).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{true_frame},{delay}",
                study.id, event.stage_entered, event.detection_frame
            );
        }
    }
    out
}

/// Write the decoded CSV and its sibling events file.
pub fn write_decoded_csv(path: &Path, studies: &[DecodedStudyData]) -> Result<(), FormatError> {
    let body = decoded_to_csv(studies)?;
    fs::write(path, body)
        .map_err(|source| FormatError::IoFailure { path: path.to_path_buf(), source })?;
    let events_path = derive_events_path(path);
    fs::write(&events_path, events_to_csv(studies))
        .map_err(|source| FormatError::IoFailure { path: events_path.clone(), source })
}

/// Parse a decoded CSV. Events are not part of this file; see
/// [`parse_events_reader`] for the sibling.
pub fn parse_decoded_reader<R: BufRead>(reader: R) -> Result<Vec<DecodedStudyData>, FormatError> {
    let mut lines = reader.lines().enumerate();
    let header = match lines.next() {
        Some((_, line)) => line?,
        None => {
            return Err(FormatError::MalformedRow { line: 1, reason: "missing header".into() })
        }
    };
    let has_truth = match header.trim_end_matches('\r') {
        DECODED_HEADER => false,
        DECODED_HEADER_TRUTH => true,
        other => {
            return Err(FormatError::MalformedRow {
                line: 1,
                reason: format!("unexpected header {other:?}"),
            })
        }
    };
    let expected_fields = if has_truth { 5 } else { 4 };

    // Reuse the studies builder for structure checks, carrying the decoded
    // column alongside.
    let mut builder = StudyBuilder::new(has_truth);
    let mut decoded_columns: Vec<Vec<StageLabel>> = Vec::new();
    for (index, line) in lines {
        let line_no = index + 1;
        let row = line?;
        let row = row.trim_end_matches('\r');
        let fields: Vec<&str> = row.split(',').collect();
        if fields.len() != expected_fields {
            return Err(FormatError::MalformedRow {
                line: line_no,
                reason: format!("expected {expected_fields} fields, found {}", fields.len()),
            });
        }
        let frame = parse_frame_index(fields[1], line_no)?;
        let observed = parse_label(fields[2], line_no)?;
        let decoded = parse_label(fields[3], line_no)?;
        let truth = if has_truth && !fields[4].is_empty() {
            Some(parse_label(fields[4], line_no)?)
        } else {
            None
        };
        let was_new = builder.current.as_ref().map(|s| s.id != fields[0]).unwrap_or(true);
        builder.push(line_no, fields[0], frame, observed, truth)?;
        if was_new {
            decoded_columns.push(Vec::new());
        }
        decoded_columns.last_mut().unwrap().push(decoded);
    }
    let studies = builder.into_studies();
    Ok(studies
        .into_iter()
        .zip(decoded_columns)
        .map(|(study, decoded)| DecodedStudyData {
            id: study.id,
            observed: study.observed,
            decoded,
            truth: study.truth,
            events: Vec::new(),
        })
        .collect())
}

pub fn parse_decoded_csv(path: &Path) -> Result<Vec<DecodedStudyData>, FormatError> {
    let file = fs::File::open(path)
        .map_err(|source| FormatError::IoFailure { path: path.to_path_buf(), source })?;
    parse_decoded_reader(std::io::BufReader::new(file))
}

/// Parse an events CSV into `(study_id, event)` rows in file order.
pub fn parse_events_reader<R: BufRead>(
    reader: R,
) -> Result<Vec<(String, TransitionEvent)>, FormatError> {
    let mut lines = reader.lines().enumerate();
    match lines.next() {
        Some((_, line)) => {
            let header = line?;
            if header.trim_end_matches('\r') != EVENTS_HEADER {
                return Err(FormatError::MalformedRow {
                    line: 1,
                    reason: format!("unexpected header {header:?}"),
                });
            }
        }
        None => {
            return Err(FormatError::MalformedRow { line: 1, reason: "missing header".into() })
        }
    }
    let mut events = Vec::new();
    for (index, line) in lines {
        let line_no = index + 1;
        let row = line?;
        let row = row.trim_end_matches('\r');
        let fields: Vec<&str> = row.split(',').collect();
        if fields.len() != 5 {
            return Err(FormatError::MalformedRow {
                line: line_no,
                reason: format!("expected 5 fields, found {}", fields.len()),
            });
        }
        let stage = parse_label(fields[1], line_no)?;
        let detection_frame = parse_frame_index(fields[2], line_no)?;
        let true_transition_frame = if fields[3].is_empty() {
            None
        } else {
            Some(parse_frame_index(fields[3], line_no)?)
        };
        let delay_frames = if fields[4].is_empty() {
            None
        } else {
            Some(fields[4].parse::<i64>().map_err(|_| FormatError::MalformedRow {
                line: line_no,
                reason: format!("delay {:?} is not an integer", fields[4]),
            })?)
        };
        events.push((
            fields[0].to_string(),
            TransitionEvent {
                stage_entered: stage,
                detection_frame,
                true_transition_frame,
                delay_frames,
            },
        ));
    }
    Ok(events)
}

pub fn parse_events_csv(path: &Path) -> Result<Vec<(String, TransitionEvent)>, FormatError> {
    let file = fs::File::open(path)
        .map_err(|source| FormatError::IoFailure { path: path.to_path_buf(), source })?;
    parse_events_reader(std::io::BufReader::new(file))
}

fn default_window() -> usize {
    300
}

fn default_emit_mode() -> EmitMode {
    EmitMode::Smoothed
}

fn default_commit_confirmation() -> usize {
    1
}

/// Human-auditable model document: HMM parameters plus decoder settings,
/// stored as TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub pi: [f64; 4],
    pub transition: [[f64; 4]; 4],
    pub emission: [[f64; 4]; 4],
    #[serde(default = "default_window")]
    pub window: usize,
    #[serde(default = "default_emit_mode")]
    pub emit_mode: EmitMode,
    #[serde(default = "default_commit_confirmation")]
    pub commit_confirmation: usize,
}

impl ModelFile {
    pub fn from_parts(model: &HmmModel, config: &DecoderConfig) -> Self {
        Self {
            pi: *model.pi(),
            transition: *model.transition(),
            emission: *model.emission(),
            window: config.window,
            emit_mode: config.emit_mode,
            commit_confirmation: config.commit_confirmation,
        }
    }

    /// Parse and validate: the document must describe a valid model and a
    /// valid decoder configuration.
    pub fn parse_str(text: &str) -> Result<Self, FormatError> {
        let file: ModelFile = toml::from_str(text)
            .map_err(|e| FormatError::MalformedModel { reason: e.to_string() })?;
        file.to_model()?;
        file.decoder_config().validate()?;
        Ok(file)
    }

    pub fn load(path: &Path) -> Result<Self, FormatError> {
        let text = fs::read_to_string(path)
            .map_err(|source| FormatError::IoFailure { path: path.to_path_buf(), source })?;
        Self::parse_str(&text)
    }

    pub fn save(&self, path: &Path) -> Result<(), FormatError> {
        fs::write(path, self.to_toml_string())
            .map_err(|source| FormatError::IoFailure { path: path.to_path_buf(), source })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("model file serialization cannot fail")
    }

    pub fn to_model(&self) -> Result<HmmModel, ModelError> {
        HmmModel::new(self.pi, self.transition, self.emission)
    }

    pub fn decoder_config(&self) -> DecoderConfig {
        DecoderConfig {
            window: self.window,
            emit_mode: self.emit_mode,
            commit_confirmation: self.commit_confirmation,
            ..DecoderConfig::default()
        }
    }
}
