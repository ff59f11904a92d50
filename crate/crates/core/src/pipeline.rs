//! Per-frame orchestration: bank initialization, subspace rebuilds, fused
//! distance computation, segmentation, feedback and scene-change resets.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bank::BackgroundBank;
use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::feedback::{update_background, PixelStateMap, SceneChangeStats};
use crate::frame::Frame;
use crate::segmentation::{post_process, ForegroundMask};

/// Pixels per tile in the fused vote; keeps the per-pixel accumulators in L1.
const VOTE_TILE: usize = 512;

#[derive(Clone, Debug)]
enum Phase {
    Running,
    /// Collecting frames for a fresh bank after a scene change.
    Refilling(Vec<Frame>),
}

/// Everything one video stream carries from frame to frame.
#[derive(Clone, Debug)]
pub struct ModelState {
    bank: BackgroundBank,
    pixels: PixelStateMap,
    prev_mask: ForegroundMask,
    prev_frame: Frame,
    frames_seen: usize,
    since_rebuild: usize,
    resets: usize,
    rng: ChaCha8Rng,
    phase: Phase,
}

impl ModelState {
    /// Builds the bank from exactly `bank_size` frames.
    pub fn initialize(frames: Vec<Frame>, config: &PipelineConfig) -> Result<Self> {
        config.validate()?;
        if frames.len() != config.bank_size {
            return Err(Error::InsufficientBank {
                needed: config.bank_size,
                found: frames.len(),
            });
        }
        let rng = ChaCha8Rng::seed_from_u64(config.seed);
        Self::from_bank_frames(frames, config, rng, 0, 0)
    }

    fn from_bank_frames(
        frames: Vec<Frame>,
        config: &PipelineConfig,
        rng: ChaCha8Rng,
        frames_seen: usize,
        resets: usize,
    ) -> Result<Self> {
        let prev_frame = frames.last().cloned().ok_or(Error::Empty("bank frames"))?;
        let bank = BackgroundBank::new(frames, config.drop_tol, config.tensor_eps)?;
        let (w, h) = bank.dims();
        Ok(ModelState {
            pixels: PixelStateMap::new(w, h, &config.feedback),
            prev_mask: ForegroundMask::zeros(w, h),
            prev_frame,
            frames_seen: frames_seen + config.bank_size,
            since_rebuild: 0,
            resets,
            rng,
            phase: Phase::Running,
            bank,
        })
    }

    pub fn bank(&self) -> &BackgroundBank {
        &self.bank
    }

    pub fn pixel_state(&self) -> &PixelStateMap {
        &self.pixels
    }

    pub fn prev_mask(&self) -> &ForegroundMask {
        &self.prev_mask
    }

    /// Frames consumed so far, initialization included.
    pub fn frames_seen(&self) -> usize {
        self.frames_seen
    }

    pub fn reset_count(&self) -> usize {
        self.resets
    }

    pub fn is_refilling(&self) -> bool {
        matches!(self.phase, Phase::Refilling(_))
    }

    /// Processes one frame and returns its post-processed foreground mask.
    pub fn step(&mut self, frame: &Frame, config: &PipelineConfig) -> Result<StepOutcome> {
        if frame.dims() != self.bank.dims() {
            return Err(Error::dims(self.bank.dims(), frame.dims()));
        }
        let index = self.frames_seen;
        self.frames_seen += 1;
        let (w, h) = frame.dims();

        let scene_change = config.scene_change.enabled
            && SceneChangeStats::compute(frame, &self.prev_frame)?.exceeds(&config.scene_change);
        self.prev_frame.clone_from(frame);

        if scene_change {
            self.resets += 1;
            self.phase = Phase::Refilling(vec![frame.clone()]);
        } else if let Phase::Refilling(buffer) = &mut self.phase {
            buffer.push(frame.clone());
        }
        if let Phase::Refilling(buffer) = &mut self.phase {
            if buffer.len() == config.bank_size {
                let frames = std::mem::take(buffer);
                let rng = self.rng.clone();
                let seen = self.frames_seen - config.bank_size;
                *self = Self::from_bank_frames(frames, config, rng, seen, self.resets)?;
            }
            let blank = ForegroundMask::zeros(w, h).with_frame_index(index);
            return Ok(StepOutcome {
                raw: blank.clone(),
                mask: blank,
                scene_change,
                reinitializing: true,
                frame_index: index,
            });
        }

        self.since_rebuild += 1;
        if self.bank.is_stale() && self.since_rebuild >= config.recompute_stride {
            self.bank.rebuild(config.drop_tol, config.tensor_eps)?;
            self.since_rebuild = 0;
        }

        let (counts, d_min) = self.vote(frame, config);
        let min_count = config.min_count();
        let labels = counts.iter().map(|&c| (c as usize > min_count) as u8).collect();
        let raw = ForegroundMask::new(w, h, labels)?.with_frame_index(index);
        let mask = post_process(&raw, &config.post_process);

        if config.feedback.enabled {
            let fb = &config.feedback;
            self.pixels.update_dmin_from_min(&d_min, fb)?;
            self.pixels.update_r(fb);
            self.pixels.update_v(&mask, &self.prev_mask, fb)?;
            self.pixels.update_t(&mask, fb)?;
        }
        update_background(&mut self.bank, frame, &self.pixels, &mut self.rng)?;
        self.prev_mask.clone_from(&mask);

        Ok(StepOutcome {
            raw,
            mask,
            scene_change: false,
            reinitializing: false,
            frame_index: index,
        })
    }

    /// Per pixel: how many bank frames reach the threshold, and the minimal
    /// combined distance over the bank. Equivalent to building every
    /// combined distance map, without materializing them.
    fn vote(&self, frame: &Frame, config: &PipelineConfig) -> (Vec<u32>, Vec<f64>) {
        let n = frame.len();
        let test = frame.as_slice();
        let bank = &self.bank;

        let mut dcv = vec![0.0; n];
        bank.projector().residual_into(test, &mut dcv);
        let common = bank.common().as_frame().as_slice();

        let tensor = bank.tensor();
        let test_mag = crate::distance::sobel(frame)
            .transformed(tensor)
            .expect("dims checked")
            .magnitude;
        let bg_mag = bank.mean_magnitude();

        // gmag + cva, shared by all bank frames
        let shared: Vec<f64> = (0..n)
            .map(|i| (test_mag[i] - bg_mag[i]).abs() + (dcv[i] - common[i]).abs())
            .collect();

        let gate = config.l1_gate;
        let r = &self.pixels.r;
        let mut counts = vec![0u32; n];
        let mut d_min = vec![f64::INFINITY; n];
        let mut start = 0;
        while start < n {
            let end = (start + VOTE_TILE).min(n);
            let (t, sh, rr) = (&test[start..end], &shared[start..end], &r[start..end]);
            let (c, m) = (&mut counts[start..end], &mut d_min[start..end]);
            for b in bank.frames() {
                let b = &b.as_slice()[start..end];
                let lanes = t.iter().zip(b).zip(sh).zip(rr).zip(c.iter_mut()).zip(m.iter_mut());
                for (((((&ti, &bi), &si), &ri), ci), mi) in lanes {
                    let l1 = (ti - bi).abs();
                    // branch-free `distance::gated_sum`; the gate is unpredictable on noise
                    let d = (l1 + si) * f64::from(u8::from(l1 > gate));
                    *ci += (d >= ri) as u32;
                    *mi = if d < *mi { d } else { *mi };
                }
            }
            start = end;
        }
        (counts, d_min)
    }
}

#[derive(Clone, Debug)]
pub struct StepOutcome {
    /// Output of the voting rule before post-processing.
    pub raw: ForegroundMask,
    pub mask: ForegroundMask,
    /// This frame triggered a scene-change reset.
    pub scene_change: bool,
    /// The model is collecting frames for a new bank; `mask` is empty.
    pub reinitializing: bool,
    /// Zero-based index of the frame in the stream.
    pub frame_index: usize,
}

/// Streaming front end: buffers the first `bank_size` frames, then steps.
#[derive(Clone, Debug)]
pub struct BackgroundSubtractor {
    config: PipelineConfig,
    pending: Vec<Frame>,
    model: Option<ModelState>,
}

impl BackgroundSubtractor {
    pub fn new(config: PipelineConfig) -> Result<Self> {
        config.validate()?;
        Ok(BackgroundSubtractor {
            config,
            pending: Vec::new(),
            model: None,
        })
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    pub fn model(&self) -> Option<&ModelState> {
        self.model.as_ref()
    }

    pub fn initialize(&mut self, frames: Vec<Frame>) -> Result<()> {
        self.model = Some(ModelState::initialize(frames, &self.config)?);
        self.pending.clear();
        Ok(())
    }

    pub fn step(&mut self, frame: &Frame) -> Result<StepOutcome> {
        let model = self.model.as_mut().ok_or(Error::NotInitialized)?;
        model.step(frame, &self.config)
    }

    /// Feeds one frame. Returns `None` while the initial bank is filling.
    pub fn process(&mut self, frame: Frame) -> Result<Option<StepOutcome>> {
        if self.model.is_some() {
            return self.step(&frame).map(Some);
        }
        if let Some(first) = self.pending.first() {
            first.ensure_same_dims(&frame)?;
        }
        self.pending.push(frame);
        if self.pending.len() == self.config.bank_size {
            let frames = std::mem::take(&mut self.pending);
            self.initialize(frames)?;
        }
        Ok(None)
    }
}
