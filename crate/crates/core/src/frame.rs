//! Grayscale frames stored as flat row-major vectors of `f64` intensities.

use crate::error::{Error, Result};

/// ITU-R BT.601 luma weights used when ingesting colour frames.
pub const DEFAULT_LUMA: [f64; 3] = [0.299, 0.587, 0.114];

/// A single grayscale frame flattened to a vector of `width * height`
/// intensities (grey levels, nominally 0..=255).
///
/// Values produced by the subspace arithmetic (common vectors, projections)
/// may fall outside the 8-bit range; nothing here clamps them.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Frame {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Empty("frame must have at least one pixel"));
        }
        if data.len() != width * height {
            return Err(Error::len(width * height, data.len()));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("frame contains non-finite values".into()));
        }
        Ok(Frame { width, height, data })
    }

    /// A `1 x n` frame, convenient for treating plain vectors as images.
    pub fn from_vec(data: Vec<f64>) -> Result<Self> {
        let n = data.len();
        Frame::new(n, 1, data)
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        assert!(width > 0 && height > 0);
        Frame {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Frame::filled(width, height, 0.0)
    }

    pub fn zeros_like(other: &Frame) -> Self {
        Frame::zeros(other.width, other.height)
    }

    pub fn from_gray8(width: usize, height: usize, pixels: &[u8]) -> Result<Self> {
        Frame::new(width, height, pixels.iter().map(|&p| p as f64).collect())
    }

    /// Interleaved RGB bytes to luma with the given channel weights.
    pub fn from_rgb8(width: usize, height: usize, pixels: &[u8], weights: [f64; 3]) -> Result<Self> {
        if pixels.len() != width * height * 3 {
            return Err(Error::len(width * height * 3, pixels.len()));
        }
        let data = pixels
            .chunks_exact(3)
            .map(|px| weights[0] * px[0] as f64 + weights[1] * px[1] as f64 + weights[2] * px[2] as f64)
            .collect();
        Frame::new(width, height, data)
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(width > 0 && height > 0);
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Frame { width, height, data }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub fn ensure_same_dims(&self, other: &Frame) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::dims(self.dims(), other.dims()));
        }
        Ok(())
    }

    /// Rounds and saturates to 8-bit grey levels.
    pub fn to_gray8(&self) -> Vec<u8> {
        self.data.iter().map(|v| v.round().clamp(0.0, 255.0) as u8).collect()
    }

    pub fn norm(&self) -> f64 {
        norm(&self.data)
    }
}

/// Inner product with four independent accumulators so the loop vectorizes.
#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    for (x, y) in ca.zip(cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// `y += alpha * x`
#[inline]
pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[inline]
pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
