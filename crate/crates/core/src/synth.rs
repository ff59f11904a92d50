//! Deterministic synthetic sequences with exact ground truth.
//!
//! Every scenario shares a textured static background, per-frame Gaussian
//! sensor noise and a square object of fixed contrast moving on a bouncing
//! path. The scenarios add one difficulty each:
//!
//! * `static_object`: nothing else;
//! * `dynamic_texture`: a marked region whose 8x8 cells oscillate slowly
//!   with random phase and period;
//! * `illumination_ramp`: a slow global brightness triangle wave;
//! * `scene_cut`: the background is swapped for an unrelated one at the cut
//!   frame;
//! * `intermittent_stop`: the object halts for a while, then leaves.
//!
//! Frames are random-access: frame `t` depends only on the config and `t`.

use std::f64::consts::TAU;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::dataset::{gt_file_name, input_file_name, write_gray_png};
use crate::error::{Error, Result};
use crate::frame::Frame;
use crate::segmentation::ForegroundMask;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Scenario {
    StaticObject,
    DynamicTexture,
    IlluminationRamp,
    SceneCut,
    IntermittentStop,
}

impl Scenario {
    pub const ALL: [Scenario; 5] = [
        Scenario::StaticObject,
        Scenario::DynamicTexture,
        Scenario::IlluminationRamp,
        Scenario::SceneCut,
        Scenario::IntermittentStop,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::StaticObject => "static_object",
            Scenario::DynamicTexture => "dynamic_texture",
            Scenario::IlluminationRamp => "illumination_ramp",
            Scenario::SceneCut => "scene_cut",
            Scenario::IntermittentStop => "intermittent_stop",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| Error::UnknownScenario(s.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SynthConfig {
    pub scenario: Scenario,
    pub width: usize,
    pub height: usize,
    pub length: usize,
    pub seed: u64,
    pub noise_sigma: f64,
    pub object_size: usize,
    /// Absolute grey-level difference between object and background.
    pub contrast: f64,
    /// First frame (0-based) in which the object is visible.
    pub object_start: usize,
    pub texture_amplitude: f64,
    /// Range of per-cell oscillation periods, in frames. Periods longer than
    /// the bank keep the initial bank from covering a full cycle.
    pub texture_period: (f64, f64),
    /// Frame (0-based) at which `scene_cut` switches background; defaults to
    /// `length / 2`.
    pub cut_frame: Option<usize>,
    /// Peak offset of the `illumination_ramp` brightness wave.
    pub ramp_amplitude: f64,
    pub ramp_period: usize,
    /// Halt window of `intermittent_stop`, in frames after `object_start`.
    pub stop_after: usize,
    pub stop_duration: usize,
    /// First frame number (1-based) listed in `temporalROI.txt`.
    pub eval_start: usize,
}

impl SynthConfig {
    pub fn new(scenario: Scenario, length: usize, seed: u64) -> Self {
        SynthConfig {
            scenario,
            width: 320,
            height: 240,
            length,
            seed,
            noise_sigma: 2.0,
            object_size: 20,
            contrast: 80.0,
            object_start: 40,
            texture_amplitude: 20.0,
            texture_period: (40.0, 120.0),
            cut_frame: None,
            ramp_amplitude: 60.0,
            ramp_period: 240,
            stop_after: 30,
            stop_duration: 80,
            eval_start: 36,
        }
    }

    pub fn with_size(mut self, width: usize, height: usize) -> Self {
        self.width = width;
        self.height = height;
        self
    }

    pub fn cut_frame(&self) -> usize {
        self.cut_frame.unwrap_or(self.length / 2)
    }

    fn validate(&self) -> Result<()> {
        if self.width < 16 || self.height < 16 {
            return Err(Error::Config("synthetic frames must be at least 16x16".into()));
        }
        if self.object_size == 0 || self.object_size + 2 > self.width.min(self.height) {
            return Err(Error::Config("object_size does not fit the frame".into()));
        }
        if self.length == 0 {
            return Err(Error::Config("length must be positive".into()));
        }
        let (p0, p1) = self.texture_period;
        if !(p0 > 0.0 && p0 < p1 && p1.is_finite()) {
            return Err(Error::Config(
                "texture_period must be an increasing positive range".into(),
            ));
        }
        if self.ramp_period < 2 {
            return Err(Error::Config("ramp_period must be at least 2".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
struct TextureCell {
    phase: f64,
    period: f64,
}

const TEXTURE_CELL: usize = 8;

/// Half-width of the uniform fixed-pattern grain added to every background.
const BACKGROUND_GRAIN: f64 = 25.0;

/// A generated sequence; frames are produced on demand.
#[derive(Clone, Debug)]
pub struct SyntheticVideo {
    config: SynthConfig,
    background: Vec<f64>,
    cut_background: Vec<f64>,
    region: Option<(usize, usize, usize, usize)>,
    cells: Vec<TextureCell>,
    cells_x: usize,
    start: (f64, f64),
    velocity: (f64, f64),
}

/// One generated frame and its ground truth.
#[derive(Clone, Debug)]
pub struct SynthFrame {
    pub index: usize,
    pub pixels: Vec<u8>,
    pub ground_truth: ForegroundMask,
}

impl SynthFrame {
    pub fn to_frame(&self, width: usize, height: usize) -> Frame {
        Frame::from_gray8(width, height, &self.pixels).expect("generated frame shape")
    }
}

impl SyntheticVideo {
    pub fn new(config: SynthConfig) -> Result<Self> {
        config.validate()?;
        let (w, h) = (config.width, config.height);
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let background = make_background(w, h, &mut rng);
        let mut cut_background = make_background(w, h, &mut rng);
        cut_background.iter_mut().for_each(|v| *v = 255.0 - *v);

        let (region, cells, cells_x) = if config.scenario == Scenario::DynamicTexture {
            let rw = (w / 3).max(TEXTURE_CELL) / TEXTURE_CELL * TEXTURE_CELL;
            let rh = (h / 3).max(TEXTURE_CELL) / TEXTURE_CELL * TEXTURE_CELL;
            let (rx, ry) = (w / 16, h / 8);
            let (cx, cy) = (rw / TEXTURE_CELL, rh / TEXTURE_CELL);
            let cells = (0..cx * cy)
                .map(|_| TextureCell {
                    phase: rng.random_range(0.0..TAU),
                    period: rng.random_range(config.texture_period.0..config.texture_period.1),
                })
                .collect();
            (Some((rx, ry, rw, rh)), cells, cx)
        } else {
            (None, Vec::new(), 0)
        };

        let span_x = (w - config.object_size) as f64;
        let span_y = (h - config.object_size) as f64;
        let start = (rng.random_range(0.0..span_x), rng.random_range(0.0..span_y));
        let speed = |rng: &mut ChaCha8Rng| {
            let s = rng.random_range(1.0..3.0);
            if rng.random_bool(0.5) {
                s
            } else {
                -s
            }
        };
        let velocity = (speed(&mut rng), speed(&mut rng));

        Ok(SyntheticVideo {
            config,
            background,
            cut_background,
            region,
            cells,
            cells_x,
            start,
            velocity,
        })
    }

    pub fn config(&self) -> &SynthConfig {
        &self.config
    }

    pub fn len(&self) -> usize {
        self.config.length
    }

    pub fn is_empty(&self) -> bool {
        self.config.length == 0
    }

    /// The oscillating region of `dynamic_texture`, if any.
    pub fn dynamic_region(&self) -> Option<ForegroundMask> {
        let (rx, ry, rw, rh) = self.region?;
        let (w, h) = (self.config.width, self.config.height);
        let labels = (0..w * h)
            .map(|i| {
                let (x, y) = (i % w, i / w);
                (x >= rx && x < rx + rw && y >= ry && y < ry + rh) as u8
            })
            .collect();
        Some(ForegroundMask::new(w, h, labels).expect("region shape"))
    }

    /// Top-left corner of the object at frame `t`, if visible.
    pub fn object_position(&self, t: usize) -> Option<(usize, usize)> {
        let c = &self.config;
        if t < c.object_start {
            return None;
        }
        let mut tau = (t - c.object_start) as f64;
        if c.scenario == Scenario::IntermittentStop {
            let a = c.stop_after as f64;
            let b = a + c.stop_duration as f64;
            tau = if tau < a {
                tau
            } else if tau < b {
                a
            } else {
                tau - (b - a)
            };
        }
        let span_x = (c.width - c.object_size) as f64;
        let span_y = (c.height - c.object_size) as f64;
        let x = reflect(self.start.0 + self.velocity.0 * tau, span_x);
        let y = reflect(self.start.1 + self.velocity.1 * tau, span_y);
        Some((x.round() as usize, y.round() as usize))
    }

    /// Noise-free intensity of the background at pixel `i` and frame `t`.
    fn background_value(&self, i: usize, t: usize) -> f64 {
        let c = &self.config;
        let mut v = if c.scenario == Scenario::SceneCut && t >= c.cut_frame() {
            self.cut_background[i]
        } else {
            self.background[i]
        };
        if let Some((rx, ry, rw, rh)) = self.region {
            let (x, y) = (i % c.width, i / c.width);
            if x >= rx && x < rx + rw && y >= ry && y < ry + rh {
                let cell = &self.cells[(y - ry) / TEXTURE_CELL * self.cells_x + (x - rx) / TEXTURE_CELL];
                v += c.texture_amplitude * (TAU * t as f64 / cell.period + cell.phase).sin();
            }
        }
        if c.scenario == Scenario::IlluminationRamp {
            let p = c.ramp_period as f64;
            let phase = (t as f64 % p) / p;
            let tri = if phase < 0.5 { 2.0 * phase } else { 2.0 - 2.0 * phase };
            v += c.ramp_amplitude * tri;
        }
        v
    }

    pub fn frame(&self, t: usize) -> SynthFrame {
        let c = &self.config;
        let (w, h) = (c.width, c.height);
        let mut rng = ChaCha8Rng::seed_from_u64(c.seed ^ (t as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let noise = Normal::new(0.0, c.noise_sigma.max(0.0)).expect("finite sigma");
        let object = self.object_position(t);
        let mut pixels = Vec::with_capacity(w * h);
        let mut gt = vec![0u8; w * h];
        for (i, label) in gt.iter_mut().enumerate() {
            let (x, y) = (i % w, i / w);
            let bg = self.background_value(i, t);
            let inside =
                object.is_some_and(|(ox, oy)| x >= ox && x < ox + c.object_size && y >= oy && y < oy + c.object_size);
            let clean = if inside {
                *label = 1;
                if bg < 128.0 {
                    bg + c.contrast
                } else {
                    bg - c.contrast
                }
            } else {
                bg
            };
            let n = if c.noise_sigma > 0.0 {
                noise.sample(&mut rng)
            } else {
                0.0
            };
            pixels.push((clean + n).round().clamp(0.0, 255.0) as u8);
        }
        SynthFrame {
            index: t,
            pixels,
            ground_truth: ForegroundMask::new(w, h, gt).expect("gt shape").with_frame_index(t),
        }
    }

    pub fn frames(&self) -> impl Iterator<Item = SynthFrame> + '_ {
        (0..self.config.length).map(|t| self.frame(t))
    }

    /// Writes `input/inNNNNNN.png`, `groundtruth/gtNNNNNN.png` (1-based),
    /// `temporalROI.txt` and, for `dynamic_texture`, `dynamic_region.png`.
    pub fn write_to(&self, out_dir: &Path) -> Result<()> {
        let c = &self.config;
        let input = out_dir.join("input");
        let gt_dir = out_dir.join("groundtruth");
        for d in [&input, &gt_dir] {
            fs::create_dir_all(d).map_err(|e| Error::io(d, e))?;
        }
        for f in self.frames() {
            let number = f.index + 1;
            write_gray_png(&input.join(input_file_name(number, "png")), c.width, c.height, f.pixels)?;
            write_gray_png(
                &gt_dir.join(gt_file_name(number)),
                c.width,
                c.height,
                f.ground_truth.to_gray8(),
            )?;
        }
        let troi = out_dir.join("temporalROI.txt");
        let first = c.eval_start.clamp(1, c.length);
        fs::write(&troi, format!("{first} {}\n", c.length)).map_err(|e| Error::io(&troi, e))?;
        if let Some(region) = self.dynamic_region() {
            write_gray_png(
                &out_dir.join("dynamic_region.png"),
                c.width,
                c.height,
                region.to_gray8(),
            )?;
        }
        Ok(())
    }
}

/// Folds `x` into `[0, span]` like a ball bouncing between two walls.
fn reflect(x: f64, span: f64) -> f64 {
    if span <= 0.0 {
        return 0.0;
    }
    let period = 2.0 * span;
    let m = x.rem_euclid(period);
    if m <= span {
        m
    } else {
        period - m
    }
}

/// Smooth shading plus a few flat rectangles and fine stripes, kept inside
/// `[40, 215]` so a +-80 object never saturates far.
fn make_background(w: usize, h: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let fx = rng.random_range(0.02..0.06);
    let fy = rng.random_range(0.02..0.06);
    let (px, py) = (rng.random_range(0.0..TAU), rng.random_range(0.0..TAU));
    let mut bg: Vec<f64> = (0..w * h)
        .map(|i| {
            let (x, y) = ((i % w) as f64, (i / w) as f64);
            110.0 + 35.0 * (x * fx + px).sin() * (y * fy + py).cos()
        })
        .collect();
    for _ in 0..6 {
        let rw = rng.random_range(w / 10..w / 3);
        let rh = rng.random_range(h / 10..h / 3);
        let rx = rng.random_range(0..w - rw);
        let ry = rng.random_range(0..h - rh);
        let offset = rng.random_range(-45.0..45.0);
        let striped = rng.random_bool(0.5);
        let stripe = rng.random_range(3..7);
        for y in ry..ry + rh {
            for x in rx..rx + rw {
                let s = if striped && (x / stripe) % 2 == 0 { 20.0 } else { 0.0 };
                bg[y * w + x] += offset + s;
            }
        }
    }
    // static fine grain; gives the edge density of natural scenes
    bg.iter_mut()
        .for_each(|v| *v = (*v + rng.random_range(-BACKGROUND_GRAIN..BACKGROUND_GRAIN)).clamp(40.0, 215.0));
    bg
}
