use std::collections::BTreeSet;

use ambisep_core::{great_circle, sh_eval};
use ambisep_scene::synth::{synth_corpus, SynthOptions};
use ambisep_scene::{build_scene, build_scenes, render_scene, SceneManifest, ScenePolicy, Split, StemCorpus};
use tempfile::TempDir;

fn corpus() -> (TempDir, StemCorpus) {
    let dir = tempfile::tempdir().unwrap();
    let opts = SynthOptions { groups: [6, 2, 3], duration: 2.0, sample_rate: 8000, seed: 3, ..SynthOptions::default() };
    let corpus = synth_corpus(dir.path(), &opts).unwrap();
    (dir, corpus)
}

fn short(mut p: ScenePolicy) -> ScenePolicy {
    p.duration = 1.0;
    p
}

#[test]
fn silent_source_fraction_matches_the_policy() {
    let (_dir, corpus) = corpus();
    let policy = short(ScenePolicy::music_train(3, 1));
    let manifest = build_scenes(&corpus, &policy, 11, 10_000).unwrap();
    let silenced = manifest.scenes.iter().filter(|s| s.active_count() < s.sources.len()).count();
    let frac = silenced as f64 / manifest.scenes.len() as f64;
    assert!((frac - 0.30).abs() <= 0.02, "silent fraction {frac}");
    assert!(manifest.scenes.iter().all(|s| s.sources.len() - s.active_count() <= 1));
}

#[test]
fn single_source_scenes_are_never_silenced() {
    let (_dir, corpus) = corpus();
    let policy = short(ScenePolicy::events_train(1));
    let manifest = build_scenes(&corpus, &policy, 5, 500).unwrap();
    for s in &manifest.scenes {
        assert!(s.active_count() >= 1);
        if s.sources.len() == 1 {
            assert!(s.sources[0].active);
        }
    }
    let counts: BTreeSet<usize> = manifest.scenes.iter().map(|s| s.sources.len()).collect();
    assert_eq!(counts, (1..=4).collect());
}

#[test]
fn music_test_scenes_share_song_and_offset() {
    let (_dir, corpus) = corpus();
    let policy = short(ScenePolicy::music_test(3, 1));
    for id in 0..50 {
        let s = build_scene(&corpus, &policy, 2, id).unwrap();
        assert_eq!(s.active_count(), 3);
        let groups: BTreeSet<_> = s.sources.iter().map(|x| corpus.get(&x.stem).unwrap().group.clone()).collect();
        assert_eq!(groups.len(), 1);
        let starts: BTreeSet<_> = s.sources.iter().map(|x| x.start).collect();
        assert_eq!(starts.len(), 1);
    }
}

#[test]
fn event_test_scenes_have_two_active_sources() {
    let (_dir, corpus) = corpus();
    let policy = short(ScenePolicy::events_test(1));
    let manifest = build_scenes(&corpus, &policy, 9, 300).unwrap();
    assert!(manifest.scenes.iter().all(|s| s.active_count() >= 2));
}

#[test]
fn scenes_draw_only_from_their_split() {
    let (_dir, corpus) = corpus();
    for (policy, split) in [
        (short(ScenePolicy::music_train(2, 1)), Split::Train),
        (short(ScenePolicy { split: Split::Valid, ..ScenePolicy::music_train(2, 1) }), Split::Valid),
        (short(ScenePolicy::music_test(2, 1)), Split::Test),
    ] {
        let manifest = build_scenes(&corpus, &policy, 1, 200).unwrap();
        for s in &manifest.scenes {
            assert_eq!(s.split, split);
            assert!(s.sources.iter().all(|x| corpus.get(&x.stem).unwrap().split == split));
        }
    }
}

#[test]
fn sources_respect_minimum_separation() {
    let (_dir, corpus) = corpus();
    let policy = short(ScenePolicy::music_train(4, 1));
    let min = policy.min_separation_deg.to_radians();
    for id in 0..200 {
        let dirs = build_scene(&corpus, &policy, 4, id).unwrap().directions();
        for i in 0..dirs.len() {
            for j in i + 1..dirs.len() {
                assert!(great_circle(&dirs[i], &dirs[j]) >= min);
            }
        }
    }
}

#[test]
fn scenes_depend_only_on_seed_and_id() {
    let (_dir, corpus) = corpus();
    let policy = short(ScenePolicy::music_train(3, 2));
    let a = build_scenes(&corpus, &policy, 7, 64).unwrap();
    let b = build_scenes(&corpus, &policy, 7, 64).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.scenes[40], build_scene(&corpus, &policy, 7, 40).unwrap());
    let c = build_scenes(&corpus, &policy, 8, 64).unwrap();
    assert_ne!(a.scenes, c.scenes);

    let ra = render_scene::<f32>(&a.scenes[3], &corpus).unwrap();
    let rb = render_scene::<f32>(&b.scenes[3], &corpus).unwrap();
    assert_eq!(ra.mixture, rb.mixture);
}

#[test]
fn anechoic_mixture_is_the_sum_of_encoded_active_sources() {
    let (_dir, corpus) = corpus();
    let policy = short(ScenePolicy::music_train(3, 3));
    let manifest = build_scenes(&corpus, &policy, 21, 40).unwrap();
    let spec = manifest.scenes.iter().find(|s| s.active_count() == 2).expect("a scene with a silenced source");
    let r = render_scene::<f64>(spec, &corpus).unwrap();
    assert_eq!(r.mixture.order(), 3);
    for (slot, truth) in spec.sources.iter().zip(&r.truths) {
        if !slot.active {
            assert!(truth.samples().iter().all(|&v| v == 0.0));
        } else {
            let raw = corpus.segment(&slot.stem, slot.start, spec.samples).unwrap();
            for (a, b) in truth.samples().iter().zip(raw.samples()) {
                assert!((a - r.gain * *b as f64).abs() < 1e-12);
            }
        }
    }
    let ys: Vec<Vec<f64>> = spec.sources.iter().map(|s| sh_eval::<f64>(3, &s.direction).unwrap().into_coeffs()).collect();
    for c in 0..16 {
        for t in (0..spec.samples).step_by(37) {
            let expected: f64 = ys.iter().zip(&r.truths).map(|(y, s)| y[c] * s.samples()[t]).sum();
            assert!((r.mixture.channel(c)[t] - expected).abs() < 1e-12);
        }
    }
}

#[test]
fn manifest_round_trips_through_json() {
    let (dir, corpus) = corpus();
    let policy = short(ScenePolicy::events_train(2));
    let m = build_scenes(&corpus, &policy, 13, 20).unwrap();
    let path = dir.path().join("scenes.json");
    m.save(&path).unwrap();
    assert_eq!(SceneManifest::load(&path).unwrap(), m);
}

#[test]
fn impossible_requests_fail_cleanly() {
    let (_dir, corpus) = corpus();
    assert!(build_scene(&corpus, &short(ScenePolicy::music_test(5, 1)), 0, 0).is_err());
    let mut long = ScenePolicy::music_train(2, 1);
    long.duration = 10.0;
    assert!(build_scene(&corpus, &long, 0, 0).is_err());
    let mut bad = ScenePolicy::music_train(2, 1);
    bad.silent_fraction = 1.5;
    assert!(build_scene(&corpus, &bad, 0, 0).is_err());
}
