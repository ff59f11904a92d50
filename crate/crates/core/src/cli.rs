//! Command implementations behind the `commonbg` binary.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::PipelineConfig;
use crate::dataset::{self, discover_videos, load_sequence, mask_file_name, numbered_files, SequenceDescriptor};
use crate::error::{Error, Result};
use crate::eval::{accumulate_confusion, ConfusionCounts, Report, VideoScore};
use crate::feedback::PixelStateMap;
use crate::pipeline::BackgroundSubtractor;
use crate::synth::{Scenario, SynthConfig, SyntheticVideo};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_IO: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "commonbg", version, about = "Common-vector background subtraction")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Segment a video directory or a whole dataset tree.
    Run(RunArgs),
    /// Score result masks against ground truth.
    Eval(EvalArgs),
    /// Generate a synthetic sequence with ground truth.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Video directory (with `input/` or bare `inNNNNNN` frames) or dataset root.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    /// TOML configuration; every key is required.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides `recompute_stride`.
    #[arg(long)]
    pub stride: Option<usize>,
    /// Only these categories of a dataset tree.
    #[arg(long, value_delimiter = ',')]
    pub categories: Vec<String>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Results directory, laid out like the dataset.
    #[arg(long)]
    pub input: PathBuf,
    /// Dataset root or a single video directory with `groundtruth/`.
    #[arg(long)]
    pub dataset: PathBuf,
    /// Where to write the CSV report.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub categories: Vec<String>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// static_object, dynamic_texture, illumination_ramp, scene_cut or intermittent_stop.
    #[arg(long)]
    pub scenario: String,
    #[arg(long, default_value_t = 100)]
    pub length: usize,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 320)]
    pub width: usize,
    #[arg(long, default_value_t = 240)]
    pub height: usize,
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::UnknownScenario(_) => EXIT_CONFIG,
        _ => EXIT_IO,
    }
}

/// Runs a parsed command, printing human-readable output to stdout.
pub fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(args) => {
            let mut config = match &args.config {
                Some(p) => PipelineConfig::from_file(p)?,
                None => PipelineConfig::default(),
            };
            if let Some(seed) = args.seed {
                config.seed = seed;
            }
            if let Some(stride) = args.stride {
                config.recompute_stride = stride;
            }
            config.validate()?;
            let summaries = run(&args.input, &args.output, &config, &args.categories)?;
            for s in &summaries {
                println!(
                    "{}/{}: {} frames, {} masks, {} resets",
                    s.category, s.video, s.frames, s.masks_written, s.resets
                );
            }
            Ok(())
        }
        Command::Eval(args) => {
            let report = evaluate(&args.input, &args.dataset, &args.categories)?;
            print!("{}", report.to_table());
            if let Some(out) = &args.output {
                if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
                    fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
                }
                fs::write(out, report.to_csv()).map_err(|e| Error::io(out, e))?;
            }
            Ok(())
        }
        Command::Synth(args) => {
            let scenario: Scenario = args.scenario.parse()?;
            let config = SynthConfig::new(scenario, args.length, args.seed).with_size(args.width, args.height);
            SyntheticVideo::new(config)?.write_to(&args.output)
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    pub category: String,
    pub video: String,
    pub frames: usize,
    pub masks_written: usize,
    pub resets: usize,
}

/// Segments one video or every video of a dataset tree. Masks of a single
/// video go straight into `output`; a dataset is mirrored as
/// `output/<category>/<video>/`.
pub fn run(input: &Path, output: &Path, config: &PipelineConfig, categories: &[String]) -> Result<Vec<RunSummary>> {
    let single = input.join("input").is_dir() || numbered_files(input, dataset::INPUT_PREFIX).is_ok();
    if single {
        let desc = SequenceDescriptor::from_dir(input)?;
        return Ok(vec![run_video(&desc, output, config)?]);
    }
    let videos = discover_videos(input, categories)?;
    if videos.is_empty() {
        return Err(Error::NoFrames(input.to_path_buf()));
    }
    videos
        .iter()
        .map(|dir| {
            let desc = SequenceDescriptor::from_dir(dir)?;
            let out = output.join(&desc.category).join(&desc.video);
            run_video(&desc, &out, config)
        })
        .collect()
}

/// Segments one sequence, writing a mask per frame after the initial bank
/// and a `stats.csv` log of the controller maps.
pub fn run_video(desc: &SequenceDescriptor, output: &Path, config: &PipelineConfig) -> Result<RunSummary> {
    fs::create_dir_all(output).map_err(|e| Error::io(output, e))?;
    let same = |a: &Path, b: &Path| matches!((a.canonicalize(), b.canonicalize()), (Ok(x), Ok(y)) if x == y);
    if same(output, &desc.input_dir) {
        return Err(Error::Config(format!(
            "output directory {} is the input directory",
            output.display()
        )));
    }
    let mut subtractor = BackgroundSubtractor::new(config.clone())?;
    let mut log = String::from("frame,r_min,r_mean,r_max,t_min,t_mean,t_max,v_min,v_mean,v_max,scene_change\n");
    let mut frames = 0;
    let mut masks_written = 0;
    for item in load_sequence(desc, config.luma)? {
        let (number, frame) = item?;
        frames += 1;
        let Some(outcome) = subtractor.process(frame)? else {
            continue;
        };
        let path = output.join(mask_file_name(number));
        dataset::write_mask(&path, &outcome.mask)?;
        masks_written += 1;
        if let Some(model) = subtractor.model() {
            log_stats(&mut log, number, model.pixel_state(), outcome.scene_change);
        }
    }
    if subtractor.model().is_none() {
        return Err(Error::InsufficientBank {
            needed: config.bank_size,
            found: frames,
        });
    }
    let log_path = output.join("stats.csv");
    fs::write(&log_path, log).map_err(|e| Error::io(&log_path, e))?;
    Ok(RunSummary {
        category: desc.category.clone(),
        video: desc.video.clone(),
        frames,
        masks_written,
        resets: subtractor.model().map_or(0, |m| m.reset_count()),
    })
}

fn log_stats(log: &mut String, number: usize, s: &PixelStateMap, scene_change: bool) {
    let stats = |xs: &[f64]| {
        let min = xs.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        (min, mean, max)
    };
    let (r0, r1, r2) = stats(&s.r);
    let (t0, t1, t2) = stats(&s.t);
    let (v0, v1, v2) = stats(&s.v);
    writeln!(
        log,
        "{number},{r0:.4},{r1:.4},{r2:.4},{t0:.4},{t1:.4},{t2:.4},{v0:.4},{v1:.4},{v2:.4},{}",
        scene_change as u8
    )
    .unwrap();
}

/// Scores one video's masks in `results` against its ground truth.
/// Returns `Ok(None)` if a mask inside the evaluated range is missing.
fn score_video(desc: &SequenceDescriptor, results: &Path) -> Result<Option<ConfusionCounts>> {
    let gt_dir = desc
        .groundtruth_dir
        .as_ref()
        .ok_or_else(|| Error::NoFrames(desc.input_dir.join("../groundtruth")))?;
    let gt_files = numbered_files(gt_dir, dataset::GT_PREFIX)?;
    let roi = desc.read_roi()?;
    let mut total = ConfusionCounts::default();
    for (number, gt_path) in gt_files {
        if let Some((first, last)) = desc.temporal_roi {
            if number < first || number > last {
                continue;
            }
        }
        let mask_path = results.join(mask_file_name(number));
        if !mask_path.is_file() {
            return Ok(None);
        }
        let mask = dataset::read_mask(&mask_path)?;
        let gt = dataset::read_label_image(&gt_path)?;
        total += accumulate_confusion(&mask, &gt, roi.as_ref())?;
    }
    Ok(Some(total))
}

/// Scores a results tree against a dataset tree (or one result directory
/// against one video directory).
pub fn evaluate(results: &Path, dataset_dir: &Path, categories: &[String]) -> Result<Report> {
    let pairs: Vec<(SequenceDescriptor, PathBuf)> = if dataset_dir.join("groundtruth").is_dir() {
        vec![(SequenceDescriptor::from_dir(dataset_dir)?, results.to_path_buf())]
    } else {
        discover_videos(dataset_dir, categories)?
            .iter()
            .map(|dir| {
                let desc = SequenceDescriptor::from_dir(dir)?;
                let out = results.join(&desc.category).join(&desc.video);
                Ok((desc, out))
            })
            .collect::<Result<_>>()?
    };
    let mut scores = Vec::new();
    let mut offending = Vec::new();
    for (desc, out) in pairs {
        match score_video(&desc, &out)? {
            Some(counts) => scores.push(VideoScore {
                category: desc.category,
                video: desc.video,
                counts,
            }),
            None => offending.push(format!("{}/{}", desc.category, desc.video)),
        }
    }
    if !offending.is_empty() {
        return Err(Error::MismatchedFrames(offending));
    }
    Report::new(scores)
}
