mod common;

use common::{random_bank, rng};
use commonbg::feedback::{detect_scene_change, update_background, SceneChangeConfig, SceneChangeStats};
use commonbg::synth::{Scenario, SynthConfig, SyntheticVideo};
use commonbg::{BackgroundBank, FeedbackConfig, ForegroundMask, Frame, PixelStateMap};
use proptest::prelude::*;
use rand::Rng;

fn random_mask(r: &mut impl Rng, n: usize) -> ForegroundMask {
    ForegroundMask::new(n, 1, (0..n).map(|_| r.random_bool(0.5) as u8).collect()).unwrap()
}

fn check_invariants(s: &PixelStateMap) {
    assert!(s.r.iter().all(|&r| r >= 35.0));
    assert!(s.t.iter().all(|&t| t >= 2.0));
    assert!(s.v.iter().all(|&v| v >= 0.0));
    assert!(s.d_min_hat.iter().all(|&d| (0.0..=1.0).contains(&d)));
}

proptest! {
    #[test]
    fn controller_invariants_survive_arbitrary_inputs(seed in any::<u64>(), steps in 1usize..150) {
        let cfg = FeedbackConfig::default();
        let n = 16;
        let mut s = PixelStateMap::new(n, 1, &cfg);
        let mut r = rng(seed);
        let mut prev = ForegroundMask::zeros(n, 1);
        for _ in 0..steps {
            let d: Vec<f64> = (0..n).map(|_| r.random_range(0.0..800.0)).collect();
            let mask = random_mask(&mut r, n);
            s.update_dmin_from_min(&d, &cfg).unwrap();
            s.update_r(&cfg);
            s.update_v(&mask, &prev, &cfg).unwrap();
            s.update_t(&mask, &cfg).unwrap();
            prev = mask;
        }
        check_invariants(&s);
    }

    #[test]
    fn background_update_is_convex(seed in any::<u64>()) {
        let mut r = rng(seed);
        let frames = random_bank(&mut r, 4, 6, 5);
        let mut bank = BackgroundBank::new(frames.clone(), 1e-10, 1e-6).unwrap();
        let test = random_bank(&mut r, 1, 6, 5).remove(0);
        let mut s = PixelStateMap::new(6, 5, &FeedbackConfig::default());
        s.t.iter_mut().for_each(|t| *t = r.random_range(2.0..40.0));
        let i = update_background(&mut bank, &test, &s, &mut r).unwrap();
        for (k, f) in bank.frames().iter().enumerate() {
            for p in 0..30 {
                let (old, new, x) = (frames[k].as_slice()[p], f.as_slice()[p], test.as_slice()[p]);
                if k == i {
                    prop_assert!(new >= old.min(x) - 1e-12 && new <= old.max(x) + 1e-12);
                    let want = old + (x - old) / s.t[p];
                    prop_assert!((new - want).abs() < 1e-9);
                } else {
                    prop_assert_eq!(new, old);
                }
            }
        }
    }
}

#[test]
fn dmin_settles_within_the_smoothing_horizon() {
    let cfg = FeedbackConfig::default();
    let mut s = PixelStateMap::new(1, 1, &cfg);
    let target = 120.0;
    let steps = ((0.01f64).ln() / (1.0 - cfg.dmin_alpha).ln()).ceil() as usize;
    for _ in 0..steps {
        s.update_dmin_from_min(&[target], &cfg).unwrap();
    }
    assert!((s.d_min[0] - target).abs() <= 0.01 * target, "d_min {}", s.d_min[0]);
    assert!((s.d_min_hat[0] - s.d_min[0] / 255.0).abs() < 1e-12);
}

#[test]
fn persistent_labels_move_t_at_nominal_rates() {
    let cfg = FeedbackConfig::default();
    let mut s = PixelStateMap::new(2, 1, &cfg);
    let mask = ForegroundMask::new(2, 1, vec![1, 0]).unwrap();
    for k in 1..=10 {
        s.update_t(&mask, &cfg).unwrap();
        assert!((s.t[0] - (16.0 + k as f64)).abs() < 1e-9);
        assert!((s.t[1] - (16.0 - 0.1 * k as f64)).abs() < 1e-9);
    }
    for _ in 0..500 {
        s.update_t(&mask, &cfg).unwrap();
    }
    assert_eq!(s.t[1], 2.0);
}

#[test]
fn blinking_pixels_accumulate_v_and_learn_faster() {
    let cfg = FeedbackConfig::default();
    let mut blink = PixelStateMap::new(1, 1, &cfg);
    let mut steady = PixelStateMap::new(1, 1, &cfg);
    let on = ForegroundMask::new(1, 1, vec![1]).unwrap();
    let off = ForegroundMask::zeros(1, 1);
    let mut prev = off.clone();
    for k in 0..10 {
        let cur = if k % 2 == 0 { on.clone() } else { off.clone() };
        blink.update_v(&cur, &prev, &cfg).unwrap();
        steady.update_v(&off, &off, &cfg).unwrap();
        prev = cur;
    }
    assert!((blink.v[0] - 10.0).abs() < 1e-12);
    assert_eq!(steady.v[0], 0.0);
    blink.update_t(&off, &cfg).unwrap();
    steady.update_t(&off, &cfg).unwrap();
    assert!(blink.t[0] < steady.t[0]);
}

fn natural_image() -> Frame {
    let v = SyntheticVideo::new(SynthConfig::new(Scenario::StaticObject, 50, 3)).unwrap();
    let c = v.config();
    v.frame(45).to_frame(c.width, c.height)
}

#[test]
fn negative_image_triggers_and_mild_changes_do_not() {
    let f = natural_image();
    let neg = Frame::new(f.width(), f.height(), f.as_slice().iter().map(|v| 255.0 - v).collect()).unwrap();
    let s = SceneChangeStats::compute(&neg, &f).unwrap();
    let cfg = SceneChangeConfig::default();
    assert!(s.maed > cfg.maed && s.mafd > cfg.mafd && s.adfv > cfg.adfv, "{s:?}");
    assert!(detect_scene_change(&neg, &f).unwrap());
    assert_eq!(
        SceneChangeStats::compute(&neg, &f).unwrap(),
        SceneChangeStats::compute(&f, &neg).unwrap()
    );

    assert!(!detect_scene_change(&f, &f).unwrap());
    assert_eq!(SceneChangeStats::compute(&f, &f).unwrap().mafd, 0.0);

    let shifted = Frame::new(f.width(), f.height(), f.as_slice().iter().map(|v| v + 5.0).collect()).unwrap();
    let s = SceneChangeStats::compute(&shifted, &f).unwrap();
    assert!((s.mafd - 5.0).abs() < 1e-12);
    assert!(!detect_scene_change(&shifted, &f).unwrap());
}

#[test]
fn scene_change_statistics_match_direct_formulas() {
    let mut r = rng(41);
    let a = random_bank(&mut r, 1, 9, 7).remove(0);
    let b = random_bank(&mut r, 1, 9, 7).remove(0);
    let s = SceneChangeStats::compute(&a, &b).unwrap();
    let diffs: Vec<f64> = a
        .as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| (x - y).abs())
        .collect();
    let n = diffs.len() as f64;
    let mean = diffs.iter().sum::<f64>() / n;
    let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / n;
    assert!((s.mafd - mean).abs() < 1e-9);
    assert!((s.adfv - var / 255.0).abs() < 1e-9);
    assert!(s.maed >= 0.0 && s.maed <= 2.0);
}
