//! Segments a generated sequence frame by frame and writes the masks.
//!
//! ```text
//! cargo run --release --example segment_synthetic -- [scenario] [out_dir]
//! ```

use std::path::PathBuf;

use commonbg::dataset::{mask_file_name, write_mask};
use commonbg::synth::{Scenario, SynthConfig, SyntheticVideo};
use commonbg::{BackgroundSubtractor, PipelineConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let scenario: Scenario = args.next().as_deref().unwrap_or("static_object").parse()?;
    let out_dir = PathBuf::from(args.next().unwrap_or_else(|| "masks".into()));
    std::fs::create_dir_all(&out_dir)?;

    let video = SyntheticVideo::new(SynthConfig::new(scenario, 80, 1).with_size(160, 120))?;
    let (w, h) = (video.config().width, video.config().height);
    let mut bgs = BackgroundSubtractor::new(PipelineConfig::default())?;

    for sf in video.frames() {
        let truth = sf.ground_truth.count_foreground();
        // None while the first bank_size frames fill the bank
        let Some(out) = bgs.process(sf.to_frame(w, h))? else {
            continue;
        };
        write_mask(&out_dir.join(mask_file_name(out.frame_index + 1)), &out.mask)?;
        if out.frame_index % 5 == 0 {
            println!(
                "frame {:>3}: raw {:>5} px, cleaned {:>5} px, truth {:>5} px",
                out.frame_index,
                out.raw.count_foreground(),
                out.mask.count_foreground(),
                truth
            );
        }
    }
    println!("masks written to {}", out_dir.display());
    Ok(())
}
