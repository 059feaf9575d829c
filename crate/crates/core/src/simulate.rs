//! Synthetic study generation: monotone ground-truth stage segments with
//! confusion-matrix label noise, standing in for a per-frame classifier.
//!
//! Generation is fully deterministic: each study derives its own RNG stream
//! from `(seed, study_index)`, so corpora are reproducible and studies can be
//! generated independently (and in parallel) in any order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::model::ROW_SUM_TOLERANCE;
use crate::stage::{StageLabel, STAGE_COUNT};
use crate::study::Study;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid simulation config: {reason}")]
    ConfigInvalid { reason: String },
}

/// Optional burst noise: classifiers are typically least reliable around
/// anatomical transitions, so within `radius` frames of a true transition
/// each frame is replaced by a uniformly random wrong label with probability
/// `flip_prob` before regular emission noise applies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BurstNoise {
    pub radius: usize,
    pub flip_prob: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Inclusive (min, max) frame counts per stage, in anatomical order.
    pub stage_duration_ranges: [(usize, usize); STAGE_COUNT],
    /// Row-stochastic confusion matrix: row = true stage, column = observed.
    pub emission: [[f64; STAGE_COUNT]; STAGE_COUNT],
    pub seed: u64,
    pub studies: usize,
    pub burst: Option<BurstNoise>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            // Scaled so a typical study has well over ten thousand frames,
            // dominated by the small intestine.
            stage_duration_ranges: [(20, 100), (2000, 8000), (8000, 20000), (2000, 10000)],
            emission: crate::model::confusion(0.97),
            seed: 0,
            studies: 85,
            burst: None,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        for (stage, &(min, max)) in self.stage_duration_ranges.iter().enumerate() {
            if min == 0 || min > max {
                return Err(SimError::ConfigInvalid {
                    reason: format!("stage {stage} duration range ({min}, {max}) is invalid"),
                });
            }
        }
        for (row_ix, row) in self.emission.iter().enumerate() {
            if row.iter().any(|&p| !(0.0..=1.0).contains(&p) || p.is_nan()) {
                return Err(SimError::ConfigInvalid {
                    reason: format!("emission row {row_ix} has entries outside [0, 1]"),
                });
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(SimError::ConfigInvalid {
                    reason: format!("emission row {row_ix} sums to {sum}"),
                });
            }
        }
        if self.studies == 0 {
            return Err(SimError::ConfigInvalid { reason: "studies must be positive".into() });
        }
        if let Some(burst) = self.burst {
            if !(0.0..=1.0).contains(&burst.flip_prob) {
                return Err(SimError::ConfigInvalid {
                    reason: format!("burst flip probability {} outside [0, 1]", burst.flip_prob),
                });
            }
        }
        Ok(())
    }
}

/// splitmix64 finalizer; decorrelates per-study RNG streams.
fn sub_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(index.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn sample_row(rng: &mut ChaCha8Rng, row: &[f64; STAGE_COUNT]) -> StageLabel {
    let u: f64 = rng.gen();
    let mut cumulative = 0.0;
    for (label, &p) in row.iter().enumerate() {
        cumulative += p;
        if u < cumulative {
            return StageLabel::from_index(label).unwrap();
        }
    }
    StageLabel::Colon
}

/// Generate one study, deterministic in `(config.seed, study_index)`.
pub fn generate_study(config: &SimConfig, study_index: usize) -> Result<Study, SimError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(config.seed, study_index as u64));

    let durations: Vec<usize> = config
        .stage_duration_ranges
        .iter()
        .map(|&(min, max)| rng.gen_range(min..=max))
        .collect();
    let total: usize = durations.iter().sum();

    let mut truth = Vec::with_capacity(total);
    for (stage, &frames) in durations.iter().enumerate() {
        truth.extend(std::iter::repeat_n(StageLabel::from_index(stage).unwrap(), frames));
    }

    // Frames within the burst radius of a true transition boundary.
    let mut transition_frames = Vec::new();
    if config.burst.is_some() {
        let mut boundary = 0usize;
        for &frames in &durations[..STAGE_COUNT - 1] {
            boundary += frames;
            transition_frames.push(boundary);
        }
    }
    let in_burst = |frame: usize, radius: usize| {
        transition_frames
            .iter()
            .any(|&b| frame + radius >= b && frame < b + radius)
    };

    let observed = truth
        .iter()
        .enumerate()
        .map(|(frame, &stage)| {
            if let Some(burst) = config.burst {
                if in_burst(frame, burst.radius) && rng.gen::<f64>() < burst.flip_prob {
                    let wrong = (stage.index() + rng.gen_range(1..STAGE_COUNT)) % STAGE_COUNT;
                    return StageLabel::from_index(wrong).unwrap();
                }
            }
            sample_row(&mut rng, &config.emission[stage.index()])
        })
        .collect();

    Ok(Study {
        id: format!("sim-{study_index:03}"),
        observed,
        truth: Some(truth),
    })
}

/// Generate `config.studies` independent studies, ids `sim-000` onwards.
pub fn generate_corpus(config: &SimConfig) -> Result<Vec<Study>, SimError> {
    config.validate()?;
    (0..config.studies)
        .into_par_iter()
        .map(|index| generate_study(config, index))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{confusion, identity_emission};

    fn short_config() -> SimConfig {
        SimConfig {
            stage_duration_ranges: [(5, 20), (10, 40), (20, 60), (10, 30)],
            seed: 42,
            studies: 8,
            ..SimConfig::default()
        }
    }

    #[test]
    fn identity_emission_reproduces_the_truth() {
        let config = SimConfig { emission: identity_emission(), ..short_config() };
        let study = generate_study(&config, 0).unwrap();
        assert_eq!(Some(&study.observed), study.truth.as_ref());
    }

    #[test]
    fn truth_is_monotone_and_covers_all_stages() {
        let config = short_config();
        for index in 0..config.studies {
            let study = generate_study(&config, index).unwrap();
            let truth = study.truth.as_ref().unwrap();
            assert_eq!(truth.len(), study.observed.len());
            assert!(truth.windows(2).all(|w| w[0] <= w[1]));
            assert_eq!(truth[0], StageLabel::Esophagus);
            assert_eq!(*truth.last().unwrap(), StageLabel::Colon);
            for (stage, &(min, max)) in config.stage_duration_ranges.iter().enumerate() {
                let count = truth
                    .iter()
                    .filter(|&&s| s.index() == stage)
                    .count();
                assert!((min..=max).contains(&count), "stage {stage} has {count} frames");
            }
        }
    }

    #[test]
    fn generation_is_deterministic_per_seed_and_index() {
        let config = short_config();
        let a = generate_study(&config, 3).unwrap();
        let b = generate_study(&config, 3).unwrap();
        assert_eq!(a, b);
        let other_seed = SimConfig { seed: 43, ..short_config() };
        let c = generate_study(&other_seed, 3).unwrap();
        assert_ne!(a.observed, c.observed);
    }

    #[test]
    fn corpus_has_the_requested_studies() {
        let config = SimConfig { studies: 85, ..short_config() };
        let corpus = generate_corpus(&config).unwrap();
        assert_eq!(corpus.len(), 85);
        assert_eq!(corpus[0].id, "sim-000");
        assert_eq!(corpus[84].id, "sim-084");

        let single = generate_corpus(&SimConfig { studies: 1, ..short_config() }).unwrap();
        assert_eq!(single.len(), 1);
    }

    #[test]
    fn empirical_confusion_matches_the_configured_emission() {
        // 25k frames per stage gives per-entry standard errors well under
        // the 0.005 tolerance.
        let config = SimConfig {
            stage_duration_ranges: [(25000, 25000); STAGE_COUNT],
            emission: confusion(0.97),
            seed: 7,
            studies: 1,
            burst: None,
        };
        let study = generate_study(&config, 0).unwrap();
        let truth = study.truth.as_ref().unwrap();
        let mut counts = [[0u64; STAGE_COUNT]; STAGE_COUNT];
        let mut totals = [0u64; STAGE_COUNT];
        for (&t, &o) in truth.iter().zip(&study.observed) {
            counts[t.index()][o.index()] += 1;
            totals[t.index()] += 1;
        }
        for (row, row_counts) in counts.iter().enumerate() {
            for (col, &count) in row_counts.iter().enumerate() {
                let empirical = count as f64 / totals[row] as f64;
                assert!(
                    (empirical - config.emission[row][col]).abs() < 0.005,
                    "entry [{row}][{col}]: {empirical} vs {}",
                    config.emission[row][col]
                );
            }
        }
    }

    #[test]
    fn invalid_configs_are_rejected()  {
        let mut bad = short_config();
        bad.stage_duration_ranges[1] = (50, 10);
        assert!(matches!(generate_study(&bad, 0), Err(SimError::ConfigInvalid { .. })));

        let mut bad = short_config();
        bad.emission[2][2] = 0.5; // row no longer sums to 1
        assert!(matches!(generate_corpus(&bad), Err(SimError::ConfigInvalid { .. })));

        let bad = SimConfig { studies: 0, ..short_config() };
        assert!(matches!(generate_corpus(&bad), Err(SimError::ConfigInvalid { .. })));
    }

    #[test]
    fn burst_noise_concentrates_errors_near_transitions() {
        let config = SimConfig {
            stage_duration_ranges: [(200, 200); STAGE_COUNT],
            emission: identity_emission(),
            seed: 11,
            studies: 1,
            burst: Some(BurstNoise { radius: 10, flip_prob: 0.8 }),
        };
        let study = generate_study(&config, 0).unwrap();
        let truth = study.truth.as_ref().unwrap();
        let errors: Vec<usize> = truth
            .iter()
            .zip(&study.observed)
            .enumerate()
            .filter(|(_, (t, o))| t != o)
            .map(|(i, _)| i)
            .collect();
        assert!(!errors.is_empty());
        // Stage boundaries sit at 200, 400, 600.
        for frame in errors {
            let near = [200usize, 400, 600]
                .iter()
                .any(|&b| frame + 10 >= b && frame < b + 10);
            assert!(near, "error at frame {frame} outside every burst zone");
        }
    }
}
