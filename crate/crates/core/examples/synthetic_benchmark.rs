//! Runs the pipeline on a generated scenario and reports accuracy and speed.
//!
//! ```text
//! cargo run --release --example synthetic_benchmark -- static_object 100
//! cargo run --release --example synthetic_benchmark -- dynamic_texture 300 --no-feedback --fp-from 200
//! cargo run --release --example synthetic_benchmark -- dynamic_texture 300 --r-scale 2 --fp-from 200
//! ```

use std::time::Instant;

use commonbg::eval::accumulate_confusion;
use commonbg::eval::LabelImage;
use commonbg::synth::{Scenario, SynthConfig, SyntheticVideo};
use commonbg::{BackgroundSubtractor, PipelineConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let scenario: Scenario = args.first().map(String::as_str).unwrap_or("static_object").parse()?;
    let length: usize = args.get(1).map(|s| s.parse()).transpose()?.unwrap_or(100);
    let feedback = !args.iter().any(|a| a == "--no-feedback");
    let r_scale: Option<f64> = args
        .iter()
        .position(|a| a == "--r-scale")
        .and_then(|i| args.get(i + 1))
        .map(|s| s.parse())
        .transpose()?;
    let fp_from: usize = args
        .iter()
        .position(|a| a == "--fp-from")
        .and_then(|i| args.get(i + 1))
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(0);

    let seed: u64 = args
        .iter()
        .position(|a| a == "--seed")
        .and_then(|i| args.get(i + 1))
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(7);

    let video = SyntheticVideo::new(SynthConfig::new(scenario, length, seed))?;
    let (w, h) = (video.config().width, video.config().height);
    let region = video.dynamic_region();

    let mut config = PipelineConfig::default();
    config.feedback.enabled = feedback;
    if let Some(r) = r_scale {
        config.feedback.r_scale = r;
    }
    let mut bgs = BackgroundSubtractor::new(config)?;

    let mut f_sum = 0.0;
    let mut f_frames = 0;
    let mut region_fp = 0usize;
    let mut region_px = 0usize;
    let mut step_time = 0.0;
    let mut steps = 0;
    for sf in video.frames() {
        let gt_labels = sf.ground_truth.clone();
        let start = Instant::now();
        let outcome = bgs.process(sf.to_frame(w, h))?;
        let Some(out) = outcome else { continue };
        step_time += start.elapsed().as_secs_f64();
        steps += 1;
        if out.scene_change {
            println!("scene change at frame {}", out.frame_index);
        }
        if gt_labels.count_foreground() > 0 {
            let gt = LabelImage::new(w, h, gt_labels.to_gray8())?;
            f_sum += accumulate_confusion(&out.mask, &gt, None)?.f_score();
            f_frames += 1;
        }
        if let Some(region) = region.as_ref().filter(|_| out.frame_index >= fp_from) {
            for i in 0..w * h {
                if region.labels()[i] == 1 && gt_labels.labels()[i] == 0 {
                    region_px += 1;
                    region_fp += out.mask.labels()[i] as usize;
                }
            }
        }
    }
    println!("scenario {scenario}, feedback {feedback}, {steps} steps");
    println!("mean step time: {:.1} ms", 1e3 * step_time / steps.max(1) as f64);
    if f_frames > 0 {
        println!(
            "mean per-frame F-score over {f_frames} frames: {:.4}",
            f_sum / f_frames as f64
        );
    }
    if region_px > 0 {
        println!(
            "false-positive rate in dynamic region: {:.5}",
            region_fp as f64 / region_px as f64
        );
    }
    if let Some(m) = bgs.model() {
        let s = m.pixel_state();
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        println!(
            "mean R {:.2}, mean T {:.2}, mean v {:.3}",
            mean(&s.r),
            mean(&s.t),
            mean(&s.v)
        );
    }
    Ok(())
}
