//! Segments every video of a dataset tree and scores the masks.
//!
//! ```text
//! cargo run --release --example evaluate_dataset -- <dataset_root> <results_dir> [category,...]
//! ```
//!
//! Without arguments a small two-category tree is generated in a temporary
//! directory first.

use std::path::PathBuf;

use commonbg::cli::{evaluate, run};
use commonbg::synth::{Scenario, SynthConfig, SyntheticVideo};
use commonbg::PipelineConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let scratch = tempfile::TempDir::new()?;
    let (root, results) = match args.as_slice() {
        [root, results, ..] => (PathBuf::from(root), PathBuf::from(results)),
        _ => {
            let root = scratch.path().join("dataset");
            for (category, video, scenario) in [
                ("baseline", "square", Scenario::StaticObject),
                ("baseline", "pause", Scenario::IntermittentStop),
                ("dynamicBackground", "ripple", Scenario::DynamicTexture),
            ] {
                let config = SynthConfig::new(scenario, 120, 3).with_size(160, 120);
                SyntheticVideo::new(config)?.write_to(&root.join(category).join(video))?;
            }
            (root, scratch.path().join("results"))
        }
    };
    let categories: Vec<String> = args
        .get(2)
        .map(|s| s.split(',').map(str::to_string).collect())
        .unwrap_or_default();

    let config = PipelineConfig::default();
    for s in run(&root, &results, &config, &categories)? {
        println!(
            "{}/{}: {} frames, {} masks, {} resets",
            s.category, s.video, s.frames, s.masks_written, s.resets
        );
    }
    let report = evaluate(&results, &root, &categories)?;
    println!();
    print!("{}", report.to_table());
    Ok(())
}
