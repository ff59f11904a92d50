//! Watches the pixel controllers adapt: on an oscillating patch the decision
//! threshold R climbs and the learning period T falls, while the static
//! part of the scene stays near the defaults.
//!
//! ```text
//! cargo run --release --example feedback_dynamics
//! ```

use commonbg::synth::{Scenario, SynthConfig, SyntheticVideo};
use commonbg::{BackgroundSubtractor, PipelineConfig};

fn mean_where(values: &[f64], region: &[u8], want: u8) -> f64 {
    let (s, n) = values
        .iter()
        .zip(region)
        .filter(|(_, &r)| r == want)
        .fold((0.0, 0usize), |(s, n), (v, _)| (s + v, n + 1));
    s / n.max(1) as f64
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut synth = SynthConfig::new(Scenario::DynamicTexture, 300, 1).with_size(160, 120);
    synth.object_start = usize::MAX;
    let video = SyntheticVideo::new(synth)?;
    let (w, h) = (video.config().width, video.config().height);
    let region = video.dynamic_region().expect("dynamic texture has a region");

    let mut config = PipelineConfig::default();
    config.feedback.r_scale = 2.0;
    let mut bgs = BackgroundSubtractor::new(config)?;

    println!(
        "{:>5} | {:>7} {:>7} {:>6} {:>6} | {:>7} {:>7} {:>6}",
        "frame", "R in", "R out", "T in", "T out", "v in", "v out", "FP in"
    );
    for sf in video.frames() {
        let Some(out) = bgs.process(sf.to_frame(w, h))? else {
            continue;
        };
        if out.frame_index % 20 != 0 {
            continue;
        }
        let s = bgs.model().unwrap().pixel_state();
        let labels = region.labels();
        let fp: usize = out
            .mask
            .labels()
            .iter()
            .zip(labels)
            .filter(|(&m, &r)| m == 1 && r == 1)
            .count();
        println!(
            "{:>5} | {:>7.2} {:>7.2} {:>6.2} {:>6.2} | {:>7.3} {:>7.3} {:>6}",
            out.frame_index,
            mean_where(&s.r, labels, 1),
            mean_where(&s.r, labels, 0),
            mean_where(&s.t, labels, 1),
            mean_where(&s.t, labels, 0),
            mean_where(&s.v, labels, 1),
            mean_where(&s.v, labels, 0),
            fp
        );
    }
    Ok(())
}
