//! Model parameters for the left-to-right stage HMM and their validation.
//!
//! A model consists of an initial distribution `pi`, a 4x4 transition matrix
//! and a 4x4 emission matrix. The transition matrix must be left-to-right:
//! only the diagonal (stay in the current stage) and the superdiagonal
//! (advance to the next stage) may be nonzero, so the decoder can never skip
//! a stage or move backwards. Zero probabilities are kept exact and map to
//! negative infinity in log space; no epsilon smoothing is applied.

use thiserror::Error;

use crate::stage::STAGE_COUNT;

/// Tolerance for row-stochasticity checks.
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

/// Which parameter block a validation error refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixKind {
    Initial,
    Transition,
    Emission,
}

impl std::fmt::Display for MatrixKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            MatrixKind::Initial => "initial distribution",
            MatrixKind::Transition => "transition matrix",
            MatrixKind::Emission => "emission matrix",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("{matrix} row {row} sums to {sum}, expected 1 within {ROW_SUM_TOLERANCE}")]
    RowNotStochastic {
        matrix: MatrixKind,
        row: usize,
        sum: f64,
    },
    #[error(
        "transition[{row}][{col}] = {value} violates the left-to-right structure \
         (only the diagonal and superdiagonal may be nonzero)"
    )]
    StructureViolation { row: usize, col: usize, value: f64 },
    #[error("{matrix} entry [{row}][{col}] = {value} is outside [0, 1]")]
    OutOfRangeEntry {
        matrix: MatrixKind,
        row: usize,
        col: usize,
        value: f64,
    },
}

/// A validated left-to-right HMM over the four GI stages.
///
/// Construction via [`HmmModel::new`] enforces all invariants; the parameter
/// blocks are immutable afterwards, so a value of this type is always valid.
#[derive(Debug, Clone, PartialEq)]
pub struct HmmModel {
    pi: [f64; STAGE_COUNT],
    transition: [[f64; STAGE_COUNT]; STAGE_COUNT],
    emission: [[f64; STAGE_COUNT]; STAGE_COUNT],
}

impl HmmModel {
    /// Validate and build a model.
    ///
    /// Requirements: every entry in `[0, 1]`; `pi` and every row of both
    /// matrices sum to 1 within [`ROW_SUM_TOLERANCE`]; `transition[i][j] == 0`
    /// whenever `j < i` or `j > i + 1`.
    pub fn new(
        pi: [f64; STAGE_COUNT],
        transition: [[f64; STAGE_COUNT]; STAGE_COUNT],
        emission: [[f64; STAGE_COUNT]; STAGE_COUNT],
    ) -> Result<Self, ModelError> {
        check_row(MatrixKind::Initial, 0, &pi)?;
        for (i, row) in transition.iter().enumerate() {
            check_row(MatrixKind::Transition, i, row)?;
            for (j, &value) in row.iter().enumerate() {
                if (j < i || j > i + 1) && value != 0.0 {
                    return Err(ModelError::StructureViolation { row: i, col: j, value });
                }
            }
        }
        for (i, row) in emission.iter().enumerate() {
            check_row(MatrixKind::Emission, i, row)?;
        }
        Ok(Self { pi, transition, emission })
    }

    /// Build a model without validation. Test-only escape hatch for
    /// properties that deliberately construct non-stochastic parameters.
    #[cfg(test)]
    pub(crate) fn new_unchecked(
        pi: [f64; STAGE_COUNT],
        transition: [[f64; STAGE_COUNT]; STAGE_COUNT],
        emission: [[f64; STAGE_COUNT]; STAGE_COUNT],
    ) -> Self {
        Self { pi, transition, emission }
    }

    pub fn pi(&self) -> &[f64; STAGE_COUNT] {
        &self.pi
    }

    /// Row = from-stage, column = to-stage.
    pub fn transition(&self) -> &[[f64; STAGE_COUNT]; STAGE_COUNT] {
        &self.transition
    }

    /// Row = hidden stage, column = observed label.
    pub fn emission(&self) -> &[[f64; STAGE_COUNT]; STAGE_COUNT] {
        &self.emission
    }

    /// Element-wise natural logarithms of the parameters.
    pub fn log(&self) -> LogModel {
        LogModel {
            log_pi: log_vec(&self.pi),
            log_transition: self.transition.map(|row| log_vec(&row)),
            log_emission: self.emission.map(|row| log_vec(&row)),
        }
    }
}

fn check_row(matrix: MatrixKind, row: usize, values: &[f64; STAGE_COUNT]) -> Result<(), ModelError> {
    for (col, &value) in values.iter().enumerate() {
        if !(0.0..=1.0).contains(&value) || value.is_nan() {
            return Err(ModelError::OutOfRangeEntry { matrix, row, col, value });
        }
    }
    let sum: f64 = values.iter().sum();
    if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
        return Err(ModelError::RowNotStochastic { matrix, row, sum });
    }
    Ok(())
}

fn log_vec(values: &[f64; STAGE_COUNT]) -> [f64; STAGE_COUNT] {
    // ln(0) is -inf, which is exactly the sentinel we want for impossible
    // transitions/emissions.
    values.map(f64::ln)
}

/// Log-space view of a model. Probability 0 becomes `f64::NEG_INFINITY`;
/// every finite entry satisfies `entry.exp() == source` within 1e-12.
#[derive(Debug, Clone)]
pub struct LogModel {
    pub log_pi: [f64; STAGE_COUNT],
    pub log_transition: [[f64; STAGE_COUNT]; STAGE_COUNT],
    pub log_emission: [[f64; STAGE_COUNT]; STAGE_COUNT],
}

/// Left-to-right transition matrix with a shared diagonal `d`:
/// `a[i][i] = d`, `a[i][i+1] = 1 - d` for the first three stages, and
/// `a[3][3] = 1` (the colon is absorbing).
pub fn bidiagonal(diag: f64) -> [[f64; STAGE_COUNT]; STAGE_COUNT] {
    let mut a = [[0.0; STAGE_COUNT]; STAGE_COUNT];
    for i in 0..STAGE_COUNT - 1 {
        a[i][i] = diag;
        a[i][i + 1] = 1.0 - diag;
    }
    a[STAGE_COUNT - 1][STAGE_COUNT - 1] = 1.0;
    a
}

/// Symmetric confusion emission matrix: the true stage is observed with
/// probability `correct`, the remaining mass is spread uniformly over the
/// other three labels.
pub fn confusion(correct: f64) -> [[f64; STAGE_COUNT]; STAGE_COUNT] {
    let off = (1.0 - correct) / (STAGE_COUNT as f64 - 1.0);
    let mut b = [[off; STAGE_COUNT]; STAGE_COUNT];
    for (i, row) in b.iter_mut().enumerate() {
        row[i] = correct;
    }
    b
}

/// Identity emissions: the observed label always equals the true stage.
pub fn identity_emission() -> [[f64; STAGE_COUNT]; STAGE_COUNT] {
    let mut b = [[0.0; STAGE_COUNT]; STAGE_COUNT];
    for (i, row) in b.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    b
}

/// The capsule starts in the esophagus.
pub fn start_in_esophagus() -> [f64; STAGE_COUNT] {
    let mut pi = [0.0; STAGE_COUNT];
    pi[0] = 1.0;
    pi
}
