//! Pixel-level feedback: the decision threshold `R`, the learning rate `T`,
//! the blink accumulator `v` and the smoothed minimal distance `d_min`,
//! plus the random background update and the scene-change trigger.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bank::BackgroundBank;
use crate::distance::{sobel, DistanceMap};
use crate::error::{Error, Result};
use crate::frame::Frame;
use crate::segmentation::ForegroundMask;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeedbackConfig {
    /// When false the controllers are frozen at their initial values.
    pub enabled: bool,
    pub r_lower: f64,
    pub r_inc_dec: f64,
    /// Scales `d_min` into the steering target of `R`; 0.1 for simple static
    /// scenes, 1 or 2 for busy ones.
    pub r_scale: f64,
    pub t_lower: f64,
    pub t_init: f64,
    /// Offset in the background branch of the `T` update.
    pub t_dec_offset: f64,
    pub v_inc: f64,
    pub v_dec: f64,
    /// Weight of the newest minimal distance in the `d_min` running mean.
    pub dmin_alpha: f64,
    /// `d_min` value mapped to 1 by the normalization.
    pub d_norm: f64,
}

impl Default for FeedbackConfig {
    fn default() -> Self {
        FeedbackConfig {
            enabled: true,
            r_lower: 35.0,
            r_inc_dec: 0.01,
            r_scale: 1.0,
            t_lower: 2.0,
            t_init: 16.0,
            t_dec_offset: 0.1,
            v_inc: 1.0,
            v_dec: 0.1,
            dmin_alpha: 0.05,
            d_norm: 255.0,
        }
    }
}

impl FeedbackConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("feedback.r_lower", self.r_lower),
            ("feedback.r_inc_dec", self.r_inc_dec),
            ("feedback.r_scale", self.r_scale),
            ("feedback.t_lower", self.t_lower),
            ("feedback.t_init", self.t_init),
            ("feedback.t_dec_offset", self.t_dec_offset),
            ("feedback.v_inc", self.v_inc),
            ("feedback.v_dec", self.v_dec),
            ("feedback.dmin_alpha", self.dmin_alpha),
            ("feedback.d_norm", self.d_norm),
        ];
        for (key, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::Config(format!("{key} must be positive, got {value}")));
            }
        }
        if self.r_inc_dec >= 1.0 {
            return Err(Error::Config("feedback.r_inc_dec must be below 1".into()));
        }
        if self.dmin_alpha > 1.0 {
            return Err(Error::Config("feedback.dmin_alpha must not exceed 1".into()));
        }
        if self.t_init < self.t_lower {
            return Err(Error::Config(
                "feedback.t_init must be at least feedback.t_lower".into(),
            ));
        }
        Ok(())
    }
}

/// Per-pixel controller state.
#[derive(Clone, Debug, PartialEq)]
pub struct PixelStateMap {
    width: usize,
    height: usize,
    pub r: Vec<f64>,
    pub t: Vec<f64>,
    pub v: Vec<f64>,
    pub d_min: Vec<f64>,
    pub d_min_hat: Vec<f64>,
}

impl PixelStateMap {
    pub fn new(width: usize, height: usize, config: &FeedbackConfig) -> Self {
        let n = width * height;
        PixelStateMap {
            width,
            height,
            r: vec![config.r_lower; n],
            t: vec![config.t_init; n],
            v: vec![0.0; n],
            d_min: vec![0.0; n],
            d_min_hat: vec![0.0; n],
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    fn check(&self, dims: (usize, usize)) -> Result<()> {
        if self.dims() != dims {
            return Err(Error::dims(self.dims(), dims));
        }
        Ok(())
    }

    /// `d_min` update from the per-pixel minimum over the bank's combined
    /// distance maps.
    pub fn update_dmin(&mut self, dists: &[DistanceMap], config: &FeedbackConfig) -> Result<()> {
        let first = dists.first().ok_or(Error::Empty("no distance maps"))?;
        self.check(first.dims())?;
        let mut d_t = first.values().to_vec();
        for d in &dists[1..] {
            self.check(d.dims())?;
            for (m, &v) in d_t.iter_mut().zip(d.values()) {
                *m = m.min(v);
            }
        }
        self.update_dmin_from_min(&d_t, config)
    }

    /// Same as [`update_dmin`](Self::update_dmin) with the per-pixel minimum
    /// already computed.
    pub fn update_dmin_from_min(&mut self, d_t: &[f64], config: &FeedbackConfig) -> Result<()> {
        if d_t.len() != self.len() {
            return Err(Error::len(self.len(), d_t.len()));
        }
        let alpha = config.dmin_alpha;
        let inv_norm = 1.0 / config.d_norm;
        for ((dm, hat), &d) in self.d_min.iter_mut().zip(&mut self.d_min_hat).zip(d_t) {
            *dm = (1.0 - alpha) * *dm + alpha * d;
            *hat = (*dm * inv_norm).min(1.0);
        }
        Ok(())
    }

    /// Nudges `R` by `r_inc_dec` of itself toward `d_min * r_scale`, floored
    /// at `r_lower`.
    pub fn update_r(&mut self, config: &FeedbackConfig) {
        let up = 1.0 + config.r_inc_dec;
        let down = 1.0 - config.r_inc_dec;
        for (r, &dm) in self.r.iter_mut().zip(&self.d_min) {
            let next = if *r < dm * config.r_scale { *r * up } else { *r * down };
            *r = next.max(config.r_lower);
        }
    }

    /// Increments `v` where the label flipped between consecutive masks and
    /// lets it decay toward zero elsewhere.
    pub fn update_v(
        &mut self,
        mask_t: &ForegroundMask,
        mask_prev: &ForegroundMask,
        config: &FeedbackConfig,
    ) -> Result<()> {
        mask_t.ensure_same_dims(mask_prev)?;
        self.check(mask_t.dims())?;
        for ((v, &f), &p) in self.v.iter_mut().zip(mask_t.labels()).zip(mask_prev.labels()) {
            let blink = (f ^ p) & !(f & p) & 1;
            if blink == 1 {
                *v += config.v_inc;
            } else {
                *v = (*v - config.v_dec).max(0.0);
            }
        }
        Ok(())
    }

    /// Foreground pixels raise `T` by `1 / (v d̂ + 1)`, background pixels lower
    /// it by `(v + 0.1) / (d̂ + 1)`; floored at `t_lower`.
    pub fn update_t(&mut self, mask_t: &ForegroundMask, config: &FeedbackConfig) -> Result<()> {
        self.check(mask_t.dims())?;
        for (((t, &f), &v), &hat) in self.t.iter_mut().zip(mask_t.labels()).zip(&self.v).zip(&self.d_min_hat) {
            let next = if f == 1 {
                *t + 1.0 / (v * hat + 1.0)
            } else {
                *t - (v + config.t_dec_offset) / (hat + 1.0)
            };
            *t = next.max(config.t_lower);
        }
        Ok(())
    }
}

/// Blends the test frame into one uniformly chosen bank frame with per-pixel
/// weight `p = 1 / T(x)`. Returns the chosen index.
pub fn update_background<R: Rng + ?Sized>(
    bank: &mut BackgroundBank,
    test: &Frame,
    state: &PixelStateMap,
    rng: &mut R,
) -> Result<usize> {
    if bank.is_empty() {
        return Err(Error::Empty("background bank"));
    }
    if bank.dims() != test.dims() {
        return Err(Error::dims(bank.dims(), test.dims()));
    }
    state.check(test.dims())?;
    let i = rng.random_range(0..bank.len());
    blend_into(bank.frame_mut(i), test, &state.t);
    Ok(i)
}

pub(crate) fn blend_into(target: &mut Frame, test: &Frame, t: &[f64]) {
    for ((b, &x), &ti) in target.as_mut_slice().iter_mut().zip(test.as_slice()).zip(t) {
        let p = 1.0 / ti;
        *b = (1.0 - p) * *b + p * x;
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneChangeConfig {
    pub enabled: bool,
    pub maed: f64,
    pub mafd: f64,
    pub adfv: f64,
}

impl Default for SceneChangeConfig {
    fn default() -> Self {
        SceneChangeConfig {
            enabled: true,
            maed: 0.1,
            mafd: 30.0,
            adfv: 2.0,
        }
    }
}

/// Frame-pair statistics used to detect a scene cut.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SceneChangeStats {
    /// Mean norm of the difference between max-normalized Sobel gradient
    /// vectors, in `[0, 2]`. Bounds the difference of normalized magnitudes
    /// from above and, unlike it, sees contrast inversions.
    pub maed: f64,
    /// Mean absolute frame difference, grey levels.
    pub mafd: f64,
    /// Variance of the absolute frame difference, divided by 255.
    pub adfv: f64,
}

impl SceneChangeStats {
    pub fn compute(frame_t: &Frame, frame_prev: &Frame) -> Result<Self> {
        frame_t.ensure_same_dims(frame_prev)?;
        let n = frame_t.len() as f64;

        let abs_diff: Vec<f64> = frame_t
            .as_slice()
            .iter()
            .zip(frame_prev.as_slice())
            .map(|(a, b)| (a - b).abs())
            .collect();
        let mafd = abs_diff.iter().sum::<f64>() / n;
        let var = abs_diff.iter().map(|d| (d - mafd) * (d - mafd)).sum::<f64>() / n;

        let edges = |f: &Frame| {
            let g = sobel(f);
            let max = g.magnitude.iter().cloned().fold(0.0, f64::max);
            let scale = if max > 0.0 { 1.0 / max } else { 0.0 };
            (g, scale)
        };
        let (ga, sa) = edges(frame_t);
        let (gb, sb) = edges(frame_prev);
        let mut edge_sum = 0.0;
        for i in 0..frame_t.len() {
            let dx = ga.gx[i] * sa - gb.gx[i] * sb;
            let dy = ga.gy[i] * sa - gb.gy[i] * sb;
            edge_sum += dx.hypot(dy);
        }
        Ok(SceneChangeStats {
            maed: edge_sum / n,
            mafd,
            adfv: var / 255.0,
        })
    }

    pub fn exceeds(&self, config: &SceneChangeConfig) -> bool {
        self.maed > config.maed && self.mafd > config.mafd && self.adfv > config.adfv
    }
}

/// True when all three frame-pair statistics exceed the default thresholds.
pub fn detect_scene_change(frame_t: &Frame, frame_prev: &Frame) -> Result<bool> {
    Ok(SceneChangeStats::compute(frame_t, frame_prev)?.exceeds(&SceneChangeConfig::default()))
}
