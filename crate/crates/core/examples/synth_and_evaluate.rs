//! Scores in-memory masks without touching the file system: per-frame
//! confusion counts summed per video, then a report with category means.
//!
//! ```text
//! cargo run --release --example synth_and_evaluate
//! ```

use commonbg::eval::{accumulate_confusion, LabelImage, VideoScore};
use commonbg::synth::{Scenario, SynthConfig, SyntheticVideo};
use commonbg::{BackgroundSubtractor, ConfusionCounts, PipelineConfig, Report};

fn score(scenario: Scenario, config: &PipelineConfig) -> Result<ConfusionCounts, Box<dyn std::error::Error>> {
    let video = SyntheticVideo::new(SynthConfig::new(scenario, 150, 5).with_size(160, 120))?;
    let (w, h) = (video.config().width, video.config().height);
    let mut bgs = BackgroundSubtractor::new(config.clone())?;
    let mut total = ConfusionCounts::default();
    for sf in video.frames() {
        let gt = LabelImage::new(w, h, sf.ground_truth.to_gray8())?;
        if let Some(out) = bgs.process(sf.to_frame(w, h))? {
            total += accumulate_confusion(&out.mask, &gt, None)?;
        }
    }
    Ok(total)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut videos = Vec::new();
    for (label, feedback) in [("feedback", true), ("fixed", false)] {
        let mut config = PipelineConfig::default();
        config.feedback.enabled = feedback;
        for scenario in [
            Scenario::StaticObject,
            Scenario::IlluminationRamp,
            Scenario::IntermittentStop,
        ] {
            videos.push(VideoScore {
                category: label.to_string(),
                video: scenario.name().to_string(),
                counts: score(scenario, &config)?,
            });
        }
    }
    print!("{}", Report::new(videos)?.to_table());
    Ok(())
}
