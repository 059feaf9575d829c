//! The four gastrointestinal stages, in anatomical order.

use std::fmt;

/// One of the four GI-tract sections a capsule passes through, encoded as an
/// ordinal label. The ordering is anatomical: the capsule can only move
/// forward through `Esophagus < Stomach < SmallIntestine < Colon`.
///
/// The same values serve as the observation alphabet: an upstream classifier
/// emits one of these labels per frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[repr(u8)]
pub enum StageLabel {
    Esophagus = 0,
    Stomach = 1,
    SmallIntestine = 2,
    Colon = 3,
}

/// Number of stages (= number of hidden states = number of observation symbols).
pub const STAGE_COUNT: usize = 4;

impl StageLabel {
    /// All stages in anatomical order.
    pub const ALL: [StageLabel; STAGE_COUNT] = [
        StageLabel::Esophagus,
        StageLabel::Stomach,
        StageLabel::SmallIntestine,
        StageLabel::Colon,
    ];

    /// Ordinal index in `0..4`.
    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    /// Stage for an ordinal index, if it is in `0..4`.
    #[inline]
    pub fn from_index(index: usize) -> Option<StageLabel> {
        StageLabel::ALL.get(index).copied()
    }

    /// The anatomically following stage, or `None` for the colon.
    pub fn next(self) -> Option<StageLabel> {
        StageLabel::from_index(self.index() + 1)
    }

    /// Human-readable name.
    pub fn name(self) -> &'static str {
        match self {
            StageLabel::Esophagus => "esophagus",
            StageLabel::Stomach => "stomach",
            StageLabel::SmallIntestine => "small intestine",
            StageLabel::Colon => "colon",
        }
    }
}

impl fmt::Display for StageLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.index())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_is_anatomical() {
        assert!(StageLabel::Esophagus < StageLabel::Stomach);
        assert!(StageLabel::Stomach < StageLabel::SmallIntestine);
        assert!(StageLabel::SmallIntestine < StageLabel::Colon);
    }

    #[test]
    fn index_round_trip() {
        for stage in StageLabel::ALL {
            assert_eq!(StageLabel::from_index(stage.index()), Some(stage));
        }
        assert_eq!(StageLabel::from_index(4), None);
    }

    #[test]
    fn next_follows_the_tract() {
        assert_eq!(StageLabel::Esophagus.next(), Some(StageLabel::Stomach));
        assert_eq!(StageLabel::Colon.next(), None);
    }
}
