//! A study: one complete capsule transit as an ordered frame stream.

use crate::stage::StageLabel;

/// Per-frame observed labels for one study, with ground truth when known.
/// Frame `t` of the stream corresponds to index `t` in both vectors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Study {
    pub id: String,
    pub observed: Vec<StageLabel>,
    /// Ground-truth stages, same length as `observed` when present.
    pub truth: Option<Vec<StageLabel>>,
}

impl Study {
    pub fn len(&self) -> usize {
        self.observed.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observed.is_empty()
    }
}
