#![no_main]

use arbitrary::Arbitrary;
use gistage_core::calibrate::build_model;
use gistage_core::streaming::{Decoder, DecoderConfig, EmitMode};
use gistage_core::StageLabel;
use libfuzzer_sys::fuzz_target;

/// Structured input: decoder settings plus an observation stream.
#[derive(Arbitrary, Debug)]
struct StreamCase {
    window: u8,
    commit_confirmation: u8,
    lock_in: bool,
    renormalize: bool,
    diag_step: u8,
    correct_step: u8,
    observations: Vec<u8>,
}

fuzz_target!(|case: StreamCase| {
    let window = 2 + (case.window as usize % 64);
    let config = DecoderConfig {
        window,
        emit_mode: EmitMode::Smoothed,
        commit_confirmation: 1 + (case.commit_confirmation as usize % window),
        lock_in: case.lock_in,
        renormalize: case.renormalize,
    };
    // Parameters strictly inside (0, 1); emissions strictly positive, so no
    // observation is impossible and every step must succeed.
    let diag = 0.05 + 0.94 * (case.diag_step as f64 / 255.0);
    let correct = 0.05 + 0.94 * (case.correct_step as f64 / 255.0);
    let model = build_model(diag, correct).expect("parameters in range");

    let mut decoder = Decoder::new(&model, config).expect("config constructed valid");
    let mut last_floor = decoder.floor();
    let mut evicted = Vec::new();
    for &raw in case.observations.iter().take(4096) {
        let obs = StageLabel::from_index(raw as usize % 4).unwrap();
        let decision = decoder.step(obs).expect("positive emissions");
        assert!(decoder.buffer_len() <= window, "buffer exceeded the window");
        assert!(decoder.floor() >= last_floor, "lock-in floor went backwards");
        assert!(decision.instantaneous_stage >= decoder.floor().min(decision.instantaneous_stage));
        last_floor = decoder.floor();
        if let Some((frame, label)) = decision.evicted_frame_label {
            evicted.push((frame, label));
        }
    }
    let flushed = decoder.finish();
    evicted.extend(flushed);
    // Frames come out exactly once, in order.
    for (i, (frame, _)) in evicted.iter().enumerate() {
        assert_eq!(*frame, i);
    }
    // The default confirmation makes smoothed output monotone.
    if config.lock_in && config.commit_confirmation == 1 {
        assert!(
            evicted.windows(2).all(|w| w[0].1 <= w[1].1),
            "smoothed labels decreased"
        );
    }
});
