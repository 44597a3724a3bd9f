use ambisep_room::image::band_reflections;
use ambisep_room::{eyring_reflection, image_sources, sample_room};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn image_count_follows_the_lattice_formula(seed in 0u64..10_000, order in 0usize..=4) {
        let room = sample_room(seed, 1, 16000);
        let images = image_sources(&room, 0, order).unwrap();
        // lattice points with |i| + |j| + |k| <= N
        let n = order as i64;
        prop_assert_eq!(images.len() as i64, (2 * n + 1) * (2 * n * n + 2 * n + 3) / 3);
        prop_assert_eq!(images[0].reflection_order, 0);
        prop_assert!(images.windows(2).all(|w| w[0].reflection_order <= w[1].reflection_order));
    }

    #[test]
    fn image_gains_are_powers_of_the_wall_reflection(seed in 0u64..10_000) {
        let room = sample_room(seed, 1, 16000);
        let beta = band_reflections(&room).unwrap();
        for im in image_sources(&room, 0, 3).unwrap() {
            let bounces: i32 = im.lattice.iter().map(|i| i.abs()).sum();
            prop_assert_eq!(bounces as usize, im.reflection_order);
            for (g, b) in im.band_gains.iter().zip(&beta) {
                prop_assert!((g - b.powi(bounces)).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn eyring_reflection_inverts_the_eyring_formula(v in 10.0f64..500.0, s in 30.0f64..400.0, rt in 0.1f64..2.0) {
        let beta = eyring_reflection(v, s, rt).unwrap();
        let alpha = 1.0 - beta * beta;
        prop_assert!((0.163 * v / (-s * (1.0 - alpha).ln()) - rt).abs() < 1e-9);
    }
}
