//! Frame-to-frame change statistics around a hard cut, and the model reset
//! they trigger.
//!
//! ```text
//! cargo run --release --example scene_change
//! ```

use commonbg::feedback::{SceneChangeConfig, SceneChangeStats};
use commonbg::synth::{Scenario, SynthConfig, SyntheticVideo};
use commonbg::{BackgroundSubtractor, PipelineConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let synth = SynthConfig::new(Scenario::SceneCut, 200, 7).with_size(160, 120);
    let cut = synth.cut_frame();
    let video = SyntheticVideo::new(synth)?;
    let (w, h) = (video.config().width, video.config().height);
    let limits = SceneChangeConfig::default();
    println!(
        "thresholds: MAED > {}, MAFD > {}, ADFV > {}",
        limits.maed, limits.mafd, limits.adfv
    );

    let mut bgs = BackgroundSubtractor::new(PipelineConfig::default())?;
    let mut prev = None;
    for sf in video.frames() {
        let frame = sf.to_frame(w, h);
        if let Some(p) = &prev {
            let t = sf.index;
            if t + 3 >= cut && t <= cut + 2 {
                let s = SceneChangeStats::compute(&frame, p)?;
                println!(
                    "frame {t:>3}: MAED {:.3}  MAFD {:>6.2}  ADFV {:>6.3}",
                    s.maed, s.mafd, s.adfv
                );
            }
        }
        prev = Some(frame.clone());
        if let Some(out) = bgs.process(frame)? {
            if out.scene_change {
                println!("reset at frame {}; refilling the bank", out.frame_index);
            }
        }
    }
    let model = bgs.model().unwrap();
    println!(
        "resets: {}, refilling now: {}",
        model.reset_count(),
        model.is_refilling()
    );
    Ok(())
}
