//! Background subtraction built on the common vector of a bank of frames.
//!
//! The background is modelled by a bank of `N` frames. Their differences span
//! a subspace; what every frame shares after removing that subspace is the
//! *common vector*. Each incoming frame is compared with every bank frame
//! through a gated sum of grey-level, edge-suppressed gradient and
//! common-vector distances, labelled foreground only when all bank frames
//! agree, and fed back into per-pixel thresholds and learning rates that
//! steer how the bank is refreshed.
//!
//! ```no_run
//! use commonbg::{BackgroundSubtractor, PipelineConfig};
//! # fn frames() -> Vec<commonbg::Frame> { unimplemented!() }
//! let mut bgs = BackgroundSubtractor::new(PipelineConfig::default())?;
//! for frame in frames() {
//!     if let Some(out) = bgs.process(frame)? {
//!         println!("frame {}: {} foreground pixels", out.frame_index, out.mask.count_foreground());
//!     }
//! }
//! # Ok::<(), commonbg::Error>(())
//! ```

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bank;
pub mod cli;
pub mod config;
pub mod cva;
pub mod dataset;
pub mod distance;
pub mod error;
pub mod eval;
pub mod feedback;
pub mod frame;
pub mod pipeline;
pub mod projector;
pub mod segmentation;
pub mod synth;

pub use bank::BackgroundBank;
pub use config::PipelineConfig;
pub use cva::{CommonVector, DiscriminativeCommonVector, OrthonormalBasis};
pub use distance::DistanceMap;
pub use error::{Error, Result};
pub use eval::{ConfusionCounts, Report};
pub use feedback::{FeedbackConfig, PixelStateMap, SceneChangeConfig};
pub use frame::Frame;
pub use pipeline::{BackgroundSubtractor, ModelState, StepOutcome};
pub use projector::DifferenceProjector;
pub use segmentation::{ForegroundMask, PostProcessConfig};
