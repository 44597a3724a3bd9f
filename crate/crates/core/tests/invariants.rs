//! Property tests over random directions, orders and signals.

use std::f64::consts::PI;

use ambisep_core::{
    apply_beamformer, beam_pattern, convert_convention, encode_anechoic, great_circle, max_di_weights, max_re_weights, max_sdr_weights,
    sdr, si_sdr, AmbisonicsBuffer, Convention, Direction, MonoBuffer,
};
use proptest::prelude::*;

fn arb_direction() -> impl Strategy<Value = Direction> {
    (-PI..PI, 0.0..=PI).prop_map(|(a, z)| Direction::new(a, z).unwrap())
}

fn arb_signal() -> impl Strategy<Value = MonoBuffer<f64>> {
    prop::collection::vec(-1.0f64..1.0, 64..256)
        .prop_filter("non-silent", |v| v.iter().any(|x| x.abs() > 1e-3))
        .prop_map(|v| MonoBuffer::new(v, 16000).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn beam_patterns_depend_only_on_the_angle_to_the_target(t in arb_direction(), d in arb_direction(), n in 1usize..=4) {
        let pole = Direction::new(0.0, 0.0).unwrap();
        let probe = Direction::new(0.7, great_circle(&t, &d)).unwrap();
        let pairs = [
            (max_di_weights::<f64>(n, &t).unwrap(), max_di_weights::<f64>(n, &pole).unwrap()),
            (max_re_weights::<f64>(n, &t).unwrap(), max_re_weights::<f64>(n, &pole).unwrap()),
        ];
        for (w, w_pole) in &pairs {
            prop_assert!((beam_pattern(w, &d) - beam_pattern(w_pole, &probe)).abs() < 1e-9);
        }
    }

    #[test]
    fn beams_peak_at_their_target(t in arb_direction(), d in arb_direction(), n in 1usize..=4) {
        for w in [max_di_weights::<f64>(n, &t).unwrap(), max_re_weights::<f64>(n, &t).unwrap()] {
            prop_assert!(beam_pattern(&w, &d).abs() <= beam_pattern(&w, &t) + 1e-12);
        }
    }

    #[test]
    fn si_sdr_ignores_the_estimate_gain(s in arb_signal(), g in prop_oneof![1e-3f64..1e3, -1e3f64..-1e-3]) {
        let est = MonoBuffer::new(s.samples().iter().enumerate().map(|(i, v)| v + 0.1 * (i as f64).sin()).collect(), 16000).unwrap();
        let a = si_sdr(&s, &est).unwrap();
        prop_assert!((si_sdr(&s, &est.scaled(g)).unwrap() - a).abs() < 1e-9);
    }

    #[test]
    fn convention_conversion_round_trips(n in 0usize..=4, s in arb_signal(), d in arb_direction()) {
        let mix = encode_anechoic(&[(s, d)], n).unwrap();
        let there = convert_convention(&mix, Convention::AmbixSn3d);
        prop_assert_eq!(there.convention(), Convention::AmbixSn3d);
        let back = convert_convention(&there, Convention::Orthonormal);
        for (a, b) in mix.channels().iter().flatten().zip(back.channels().iter().flatten()) {
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }
    }

    #[test]
    fn encoding_is_linear(a in arb_signal(), d1 in arb_direction(), d2 in arb_direction(), n in 0usize..=3) {
        let b = MonoBuffer::new(a.samples().iter().rev().copied().collect(), 16000).unwrap();
        let both = encode_anechoic(&[(a.clone(), d1), (b.clone(), d2)], n).unwrap();
        let mut sum: AmbisonicsBuffer<f64> = encode_anechoic(&[(a, d1)], n).unwrap();
        sum.add_assign(&encode_anechoic(&[(b, d2)], n).unwrap()).unwrap();
        for (x, y) in both.channels().iter().flatten().zip(sum.channels().iter().flatten()) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn oracle_beam_recovers_a_lone_source(s in arb_signal(), d in arb_direction(), n in 1usize..=3) {
        let mix = encode_anechoic(&[(s.clone(), d)], n).unwrap();
        let w = max_sdr_weights(&mix, &s, 0.0).unwrap();
        prop_assert!(sdr(&s, &apply_beamformer(&w.weights, &mix).unwrap()).unwrap() > 80.0);
    }
}
