//! Random instance generators shared across test modules.

use rand::rngs::StdRng;
use rand::Rng;

use crate::model::HmmModel;
use crate::stage::{StageLabel, STAGE_COUNT};

/// Random valid left-to-right model: per-row transition diagonals and
/// strictly positive emission rows, so no observation is impossible.
pub(crate) fn random_model(rng: &mut StdRng) -> HmmModel {
    let mut transition = [[0.0; STAGE_COUNT]; STAGE_COUNT];
    for i in 0..STAGE_COUNT - 1 {
        let d = rng.gen_range(0.05..0.95);
        transition[i][i] = d;
        transition[i][i + 1] = 1.0 - d;
    }
    transition[STAGE_COUNT - 1][STAGE_COUNT - 1] = 1.0;
    let mut emission = [[0.0; STAGE_COUNT]; STAGE_COUNT];
    for row in emission.iter_mut() {
        let mut sum = 0.0;
        for v in row.iter_mut() {
            *v = rng.gen_range(0.02..1.0);
            sum += *v;
        }
        for v in row.iter_mut() {
            *v /= sum;
        }
    }
    let mut pi = [0.0; STAGE_COUNT];
    let mut sum = 0.0;
    for v in pi.iter_mut() {
        *v = rng.gen_range(0.02..1.0);
        sum += *v;
    }
    for v in pi.iter_mut() {
        *v /= sum;
    }
    HmmModel::new(pi, transition, emission).unwrap()
}

pub(crate) fn random_observations(rng: &mut StdRng, len: usize) -> Vec<StageLabel> {
    (0..len)
        .map(|_| StageLabel::from_index(rng.gen_range(0..STAGE_COUNT)).unwrap())
        .collect()
}
