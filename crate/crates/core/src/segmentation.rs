//! Foreground decision over the bank of distance maps, and binary
//! post-processing.

use serde::{Deserialize, Serialize};

use crate::distance::DistanceMap;
use crate::error::{Error, Result};

/// Binary per-pixel labels, 1 = foreground.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ForegroundMask {
    width: usize,
    height: usize,
    labels: Vec<u8>,
    pub frame_index: usize,
}

impl ForegroundMask {
    pub fn new(width: usize, height: usize, labels: Vec<u8>) -> Result<Self> {
        if labels.len() != width * height {
            return Err(Error::len(width * height, labels.len()));
        }
        if labels.iter().any(|&l| l > 1) {
            return Err(Error::Config("mask labels must be 0 or 1".into()));
        }
        Ok(ForegroundMask {
            width,
            height,
            labels,
            frame_index: 0,
        })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        ForegroundMask {
            width,
            height,
            labels: vec![0; width * height],
            frame_index: 0,
        }
    }

    pub fn with_frame_index(mut self, t: usize) -> Self {
        self.frame_index = t;
        self
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.labels[y * self.width + x]
    }

    pub fn count_foreground(&self) -> usize {
        self.labels.iter().filter(|&&l| l == 1).count()
    }

    /// 0/255 bytes, the on-disk convention for binary masks.
    pub fn to_gray8(&self) -> Vec<u8> {
        self.labels.iter().map(|&l| l * 255).collect()
    }

    pub fn ensure_same_dims(&self, other: &ForegroundMask) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::dims(self.dims(), other.dims()));
        }
        Ok(())
    }
}

/// Labels a pixel foreground when more than `min_count` of the bank
/// distances at that pixel reach the threshold `r[x]`. With
/// `min_count = N - 1` every bank frame must agree.
pub fn decide_foreground(dists: &[DistanceMap], r: &[f64], min_count: usize) -> Result<ForegroundMask> {
    let first = dists.first().ok_or(Error::Empty("no distance maps"))?;
    let (w, h) = first.dims();
    for d in &dists[1..] {
        if d.dims() != (w, h) {
            return Err(Error::dims((w, h), d.dims()));
        }
    }
    if r.len() != w * h {
        return Err(Error::len(w * h, r.len()));
    }
    let mut counts = vec![0usize; w * h];
    for d in dists {
        for ((c, &v), &thr) in counts.iter_mut().zip(d.values()).zip(r) {
            *c += (v >= thr) as usize;
        }
    }
    let labels = counts.into_iter().map(|c| (c > min_count) as u8).collect();
    ForegroundMask::new(w, h, labels)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PostProcessConfig {
    pub median: bool,
    /// Odd side length of the square median window.
    pub median_size: usize,
    pub opening: bool,
    /// Connected components (4-neighbourhood) smaller than this are removed;
    /// 0 disables the area filter.
    pub min_blob: usize,
}

impl Default for PostProcessConfig {
    fn default() -> Self {
        PostProcessConfig {
            median: true,
            median_size: 9,
            opening: true,
            min_blob: 15,
        }
    }
}

impl PostProcessConfig {
    pub fn disabled() -> Self {
        PostProcessConfig {
            median: false,
            median_size: 9,
            opening: false,
            min_blob: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.median && (self.median_size == 0 || self.median_size.is_multiple_of(2)) {
            return Err(Error::Config(format!(
                "post_process.median_size must be odd and positive, got {}",
                self.median_size
            )));
        }
        Ok(())
    }
}

/// Median filter, then 3x3 opening, then removal of small blobs; each stage
/// can be switched off.
pub fn post_process(mask: &ForegroundMask, config: &PostProcessConfig) -> ForegroundMask {
    let (w, h) = mask.dims();
    let mut labels = mask.labels.clone();
    if config.median {
        labels = median_filter(&labels, w, h, config.median_size);
    }
    if config.opening {
        labels = dilate3(&erode3(&labels, w, h), w, h);
    }
    if config.min_blob > 1 {
        remove_small_components(&mut labels, w, h, config.min_blob);
    }
    ForegroundMask {
        width: w,
        height: h,
        labels,
        frame_index: mask.frame_index,
    }
}

/// Binary median with a `size x size` window and replicated borders,
/// computed from an integral image of the padded mask.
pub fn median_filter(labels: &[u8], w: usize, h: usize, size: usize) -> Vec<u8> {
    let r = size / 2;
    let pw = w + 2 * r;
    let ph = h + 2 * r;
    // integral[(y * (pw + 1)) + x] = sum of padded[0..y, 0..x]
    let stride = pw + 1;
    let mut integral = vec![0u32; stride * (ph + 1)];
    for py in 0..ph {
        let sy = py.saturating_sub(r).min(h - 1);
        let mut row_sum = 0u32;
        for px in 0..pw {
            let sx = px.saturating_sub(r).min(w - 1);
            row_sum += labels[sy * w + sx] as u32;
            integral[(py + 1) * stride + px + 1] = integral[py * stride + px + 1] + row_sum;
        }
    }
    let half = (size * size / 2) as u32;
    let mut out = vec![0u8; w * h];
    for y in 0..h {
        let top = y * stride;
        let bottom = (y + size) * stride;
        for x in 0..w {
            let s = integral[bottom + x + size] + integral[top + x] - integral[top + x + size] - integral[bottom + x];
            out[y * w + x] = (s > half) as u8;
        }
    }
    out
}

fn morph3(labels: &[u8], w: usize, h: usize, erode: bool) -> Vec<u8> {
    // Separable 3x3 min/max with replicated borders.
    let mut horiz = vec![0u8; w * h];
    for y in 0..h {
        let row = &labels[y * w..][..w];
        for x in 0..w {
            let a = row[x.saturating_sub(1)];
            let b = row[x];
            let c = row[(x + 1).min(w - 1)];
            horiz[y * w + x] = if erode { a & b & c } else { a | b | c };
        }
    }
    let mut out = vec![0u8; w * h];
    for y in 0..h {
        let up = &horiz[y.saturating_sub(1) * w..][..w];
        let mid = &horiz[y * w..][..w];
        let down = &horiz[(y + 1).min(h - 1) * w..][..w];
        for x in 0..w {
            out[y * w + x] = if erode {
                up[x] & mid[x] & down[x]
            } else {
                up[x] | mid[x] | down[x]
            };
        }
    }
    out
}

pub fn erode3(labels: &[u8], w: usize, h: usize) -> Vec<u8> {
    morph3(labels, w, h, true)
}

pub fn dilate3(labels: &[u8], w: usize, h: usize) -> Vec<u8> {
    morph3(labels, w, h, false)
}

/// Clears 4-connected foreground components with fewer than `min_size`
/// pixels.
pub fn remove_small_components(labels: &mut [u8], w: usize, h: usize, min_size: usize) {
    let mut visited = vec![false; w * h];
    let mut stack = Vec::new();
    let mut component = Vec::new();
    for start in 0..w * h {
        if labels[start] == 0 || visited[start] {
            continue;
        }
        component.clear();
        visited[start] = true;
        stack.push(start);
        while let Some(i) = stack.pop() {
            component.push(i);
            let (x, y) = (i % w, i / w);
            let mut visit = |j: usize| {
                if labels[j] == 1 && !visited[j] {
                    visited[j] = true;
                    stack.push(j);
                }
            };
            if x > 0 {
                visit(i - 1);
            }
            if x + 1 < w {
                visit(i + 1);
            }
            if y > 0 {
                visit(i - w);
            }
            if y + 1 < h {
                visit(i + w);
            }
        }
        if component.len() < min_size {
            for &i in &component {
                labels[i] = 0;
            }
        }
    }
}
