//! Independent reference implementations shared by the integration tests.
//! None of these call into the library's numerics.

#![allow(dead_code)]

use commonbg::eval::LabelImage;
use commonbg::synth::{Scenario, SynthConfig, SyntheticVideo};
use commonbg::{BackgroundSubtractor, ConfusionCounts, Frame, PipelineConfig, StepOutcome};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_frame(rng: &mut impl Rng, w: usize, h: usize) -> Frame {
    Frame::new(w, h, (0..w * h).map(|_| rng.random_range(0.0..255.0)).collect()).unwrap()
}

pub fn random_bank(rng: &mut impl Rng, k: usize, w: usize, h: usize) -> Vec<Frame> {
    (0..k).map(|_| random_frame(rng, w, h)).collect()
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Common vector via SVD: project `bank[0]` onto the orthogonal complement
/// of the column space of the difference matrix.
pub fn svd_common_vector(bank: &[Frame]) -> Vec<f64> {
    let p = bank[0].len();
    let a0 = DMatrix::from_column_slice(p, 1, bank[0].as_slice());
    if bank.len() == 1 {
        return a0.as_slice().to_vec();
    }
    let cols: Vec<f64> = bank[1..]
        .iter()
        .flat_map(|a| a.as_slice().iter().zip(bank[0].as_slice()).map(|(x, r)| x - r))
        .collect();
    let d = DMatrix::from_column_slice(p, bank.len() - 1, &cols);
    let svd = d.svd(true, false);
    let u = svd.u.unwrap();
    let smax = svd.singular_values.max();
    let tol = smax * 1e-10 * (p.max(bank.len()) as f64);
    let mut out = a0.clone();
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s > tol && s > 0.0 {
            let ui = u.column(i);
            let c = ui.dot(&a0.column(0));
            out -= ui * c;
        }
    }
    out.as_slice().to_vec()
}

/// F-score straight from counts: `2TP / (2TP + FP + FN)`.
pub fn f_oracle(tp: u64, fp: u64, fn_: u64) -> f64 {
    if tp == 0 {
        return 0.0;
    }
    let tp = tp as f64;
    2.0 * tp / (2.0 * tp + fp as f64 + fn_ as f64)
}

/// MCC straight from counts, product under one square root.
pub fn mcc_oracle(tp: u64, tn: u64, fp: u64, fn_: u64) -> f64 {
    let (tp, tn, fp, fn_) = (tp as f64, tn as f64, fp as f64, fn_ as f64);
    let prod = (tp + fp) * (tp + fn_) * (tn + fp) * (tn + fn_);
    if prod == 0.0 {
        return 0.0;
    }
    (tp * tn - fp * fn_) / prod.sqrt()
}

/// Pixelwise counts of a 0/1 mask against a 0/1 truth.
pub fn count_binary(mask: &[u8], truth: &[u8]) -> ConfusionCounts {
    let mut c = ConfusionCounts::default();
    for (&m, &t) in mask.iter().zip(truth) {
        match (t == 1, m == 1) {
            (true, true) => c.tp += 1,
            (true, false) => c.fn_ += 1,
            (false, true) => c.fp += 1,
            (false, false) => c.tn += 1,
        }
    }
    c
}

/// Result of running the pipeline over a generated sequence.
pub struct ScenarioRun {
    pub video: SyntheticVideo,
    pub outcomes: Vec<StepOutcome>,
    /// Ground truth aligned with `outcomes`.
    pub truth: Vec<Vec<u8>>,
    pub subtractor: BackgroundSubtractor,
}

pub fn run_scenario(synth: SynthConfig, config: PipelineConfig) -> ScenarioRun {
    let video = SyntheticVideo::new(synth).unwrap();
    let (w, h) = (video.config().width, video.config().height);
    let mut subtractor = BackgroundSubtractor::new(config).unwrap();
    let mut outcomes = Vec::new();
    let mut truth = Vec::new();
    for f in video.frames() {
        if let Some(out) = subtractor.process(f.to_frame(w, h)).unwrap() {
            outcomes.push(out);
            truth.push(f.ground_truth.labels().to_vec());
        }
    }
    ScenarioRun {
        video,
        outcomes,
        truth,
        subtractor,
    }
}

/// Mean per-frame F-score over frames whose ground truth has foreground.
pub fn mean_frame_f(run: &ScenarioRun) -> (f64, usize) {
    let mut sum = 0.0;
    let mut n = 0;
    for (out, gt) in run.outcomes.iter().zip(&run.truth) {
        if gt.contains(&1) {
            let c = count_binary(out.mask.labels(), gt);
            sum += f_oracle(c.tp, c.fp, c.fn_);
            n += 1;
        }
    }
    (sum / n.max(1) as f64, n)
}

/// False-positive rate inside the dynamic region over outcomes with
/// `frame_index >= from`.
pub fn region_fp_rate(run: &ScenarioRun, from: usize) -> f64 {
    let region = run.video.dynamic_region().expect("scenario has a dynamic region");
    let mut fp = 0usize;
    let mut total = 0usize;
    for (out, gt) in run.outcomes.iter().zip(&run.truth) {
        if out.frame_index < from {
            continue;
        }
        for ((&r, &g), &m) in region.labels().iter().zip(gt).zip(out.mask.labels()) {
            if r == 1 && g == 0 {
                total += 1;
                fp += m as usize;
            }
        }
    }
    fp as f64 / total.max(1) as f64
}

pub fn synth(scenario: Scenario, length: usize, seed: u64) -> SynthConfig {
    SynthConfig::new(scenario, length, seed)
}

pub fn label_image(w: usize, h: usize, data: Vec<u8>) -> LabelImage {
    LabelImage::new(w, h, data).unwrap()
}
