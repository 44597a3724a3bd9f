use std::collections::BTreeMap;
use std::f64::consts::PI;

use ambisep_core::{great_circle, Direction};
use ambisep_separator::{forward, perturb_target, scale_direction, Checkpoint, Mode, ModelConfig, ModelParams, Tensor};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn arb_direction() -> impl Strategy<Value = Direction> {
    (-PI..PI, 0.0..=PI).prop_map(|(a, z)| Direction::new(a, z).unwrap())
}

fn arb_mode() -> impl Strategy<Value = Mode> {
    prop_oneof![Just(Mode::Refinement), Just(Mode::Implicit), Just(Mode::Mixed)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn valid_length_is_the_smallest_admissible_length(depth in 1usize..=6, len in 1usize..100_000) {
        let cfg = ModelConfig { depth, ..ModelConfig::toy(Mode::Implicit, 1, 16000) };
        let v = cfg.valid_length(len);
        prop_assert!(v >= len);
        // admissible lengths are spaced by STRIDE^depth
        prop_assert!(v < len + 4usize.pow(depth as u32) || v == cfg.valid_length(1));
    }

    #[test]
    fn output_length_matches_any_input_length(mode in arb_mode(), depth in 1usize..=3, len in 1usize..700, seed in 0u64..100) {
        let cfg = ModelConfig { depth, channels: 4, lstm_layers: 1, ..ModelConfig::toy(mode, 1, 8000) };
        let p = ModelParams::<f32>::init(cfg, seed).unwrap();
        let c = cfg.input_channels();
        let x = Tensor::from_data(c, len, (0..c * len).map(|i| ((i * 7919) % 13) as f32 / 13.0 - 0.5).collect());
        let y = forward(&p, &x, mode.conditioned().then_some([0.2, -0.4])).unwrap();
        prop_assert_eq!(y.len(), len);
        prop_assert!(y.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn scaled_directions_lie_in_the_unit_square(d in arb_direction()) {
        let s = scale_direction(&d);
        prop_assert!((-1.0..=1.0).contains(&s.azimuth) && (-1.0..=1.0).contains(&s.zenith));
    }

    #[test]
    fn perturbed_targets_stay_in_the_window(d in arb_direction(), w in 0.0f64..30.0, seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = perturb_target(&d, w, &mut rng);
        prop_assert!(great_circle(&d, &p).to_degrees() <= w + 1e-9);
    }

    #[test]
    fn checkpoints_round_trip_exactly(mode in arb_mode(), seed in 0u64..1000) {
        let p = ModelParams::<f32>::init(ModelConfig { depth: 2, channels: 4, ..ModelConfig::toy(mode, 2, 8000) }, seed).unwrap();
        let mut bytes = Vec::new();
        Checkpoint::new(&p, seed, BTreeMap::new()).write_to(&mut bytes).unwrap();
        let back = Checkpoint::read_from(bytes.as_slice()).unwrap();
        prop_assert_eq!(back.params.values, p.values);
        prop_assert_eq!(back.params.config, p.config);
    }
}
