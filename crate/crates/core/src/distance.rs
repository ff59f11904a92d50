//! Per-pixel distance maps between a test frame and the background bank.
//!
//! The combined distance adds three terms wherever the plain grey-level
//! difference exceeds a small gate:
//!
//! * `|I_t - B_i|`, the grey-level (l1) distance;
//! * the difference of edge-suppressed gradient magnitudes of the test frame
//!   and the mean background;
//! * `|DCV(I_t) - B_com|`, the distance between the test frame's
//!   discriminative common vector and the bank's common vector.
//!
//! The last two do not depend on the bank index and are computed once per
//! frame ([`FrameTerms`]).

use crate::cva::{CommonVector, DiscriminativeCommonVector};
use crate::error::{Error, Result};
use crate::frame::Frame;

/// Pixels whose l1 distance is at or below this many grey levels get a
/// combined distance of zero.
pub const DEFAULT_L1_GATE: f64 = 1.0;

/// Regularizer of the cross-projection tensor denominator.
pub const DEFAULT_TENSOR_EPS: f64 = 1e-6;

/// Nonnegative per-pixel distances in grey-level units.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceMap {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl DistanceMap {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != width * height {
            return Err(Error::len(width * height, values.len()));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Config("distance values must be finite and nonnegative".into()));
        }
        Ok(DistanceMap { width, height, values })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Horizontal and vertical derivatives plus their magnitude.
#[derive(Clone, Debug)]
pub struct GradientField {
    width: usize,
    height: usize,
    pub gx: Vec<f64>,
    pub gy: Vec<f64>,
    pub magnitude: Vec<f64>,
}

impl GradientField {
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    /// Applies the tensor per pixel: `gx' = D11 gx + D12 gy`,
    /// `gy' = D12 gx + D22 gy`, magnitude recomputed from the result.
    pub fn transformed(&self, tensor: &CrossProjectionTensor) -> Result<GradientField> {
        if self.dims() != tensor.dims() {
            return Err(Error::dims(tensor.dims(), self.dims()));
        }
        let n = self.gx.len();
        let mut gx = Vec::with_capacity(n);
        let mut gy = Vec::with_capacity(n);
        let mut magnitude = Vec::with_capacity(n);
        for i in 0..n {
            let (tx, ty) = tensor.apply(i, self.gx[i], self.gy[i]);
            gx.push(tx);
            gy.push(ty);
            magnitude.push(tx.hypot(ty));
        }
        Ok(GradientField {
            width: self.width,
            height: self.height,
            gx,
            gy,
            magnitude,
        })
    }
}

/// 3x3 Sobel derivatives with replicated borders.
pub fn sobel(frame: &Frame) -> GradientField {
    let (w, h) = frame.dims();
    let p = frame.as_slice();
    let n = w * h;
    let mut gx = vec![0.0; n];
    let mut gy = vec![0.0; n];
    for y in 0..h {
        let up = &p[y.saturating_sub(1) * w..][..w];
        let mid = &p[y * w..][..w];
        let down = &p[(y + 1).min(h - 1) * w..][..w];
        let row_x = &mut gx[y * w..][..w];
        let row_y = &mut gy[y * w..][..w];
        for x in 0..w {
            let l = x.saturating_sub(1);
            let r = (x + 1).min(w - 1);
            row_x[x] = (up[r] + 2.0 * mid[r] + down[r]) - (up[l] + 2.0 * mid[l] + down[l]);
            row_y[x] = (down[l] + 2.0 * down[x] + down[r]) - (up[l] + 2.0 * up[x] + up[r]);
        }
    }
    let magnitude = gx.iter().zip(&gy).map(|(a, b)| a.hypot(*b)).collect();
    GradientField {
        width: w,
        height: h,
        gx,
        gy,
        magnitude,
    }
}

/// Per-pixel symmetric 2x2 operator `[[D11, D12], [D12, D22]]`.
///
/// Built from the mean-background gradient `g` as the projector onto the
/// direction perpendicular to `g`, normalized by `|g|^2 + eps`. Gradient
/// components along existing background edges are annihilated; flat
/// background regions map every gradient to zero.
#[derive(Clone, Debug)]
pub struct CrossProjectionTensor {
    width: usize,
    height: usize,
    pub d11: Vec<f64>,
    pub d12: Vec<f64>,
    pub d22: Vec<f64>,
}

impl CrossProjectionTensor {
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    fn apply(&self, i: usize, gx: f64, gy: f64) -> (f64, f64) {
        (self.d11[i] * gx + self.d12[i] * gy, self.d12[i] * gx + self.d22[i] * gy)
    }
}

pub fn cross_projection_tensor(background: &GradientField, eps: f64) -> Result<CrossProjectionTensor> {
    if !(eps > 0.0) {
        return Err(Error::Config(format!("tensor eps must be positive, got {eps}")));
    }
    let n = background.gx.len();
    let mut d11 = Vec::with_capacity(n);
    let mut d12 = Vec::with_capacity(n);
    let mut d22 = Vec::with_capacity(n);
    for (&gx, &gy) in background.gx.iter().zip(&background.gy) {
        let denom = gx * gx + gy * gy + eps;
        d11.push(gy * gy / denom);
        d12.push(-gx * gy / denom);
        d22.push(gx * gx / denom);
    }
    Ok(CrossProjectionTensor {
        width: background.width,
        height: background.height,
        d11,
        d12,
        d22,
    })
}

/// Elementwise `|test - bank_frame|`.
pub fn dist_l1(test: &Frame, bank_frame: &Frame) -> Result<DistanceMap> {
    test.ensure_same_dims(bank_frame)?;
    let values = test
        .as_slice()
        .iter()
        .zip(bank_frame.as_slice())
        .map(|(a, b)| (a - b).abs())
        .collect();
    DistanceMap::new(test.width(), test.height(), values)
}

/// Edge-suppressed gradient magnitude of a frame under `tensor`.
fn transformed_magnitude(frame: &Frame, tensor: &CrossProjectionTensor) -> Result<Vec<f64>> {
    Ok(sobel(frame).transformed(tensor)?.magnitude)
}

/// `|m(test) - m(mean_bg)|` where `m` is the tensor-transformed Sobel
/// gradient magnitude.
pub fn dist_gmag(test: &Frame, mean_bg: &Frame, tensor: &CrossProjectionTensor) -> Result<DistanceMap> {
    test.ensure_same_dims(mean_bg)?;
    let mt = transformed_magnitude(test, tensor)?;
    let mb = transformed_magnitude(mean_bg, tensor)?;
    let values = mt.iter().zip(&mb).map(|(a, b)| (a - b).abs()).collect();
    DistanceMap::new(test.width(), test.height(), values)
}

/// Elementwise `|DCV(test) - B_com|`.
pub fn dist_cva(test_dcv: &DiscriminativeCommonVector, bg_common: &CommonVector) -> Result<DistanceMap> {
    let a = test_dcv.as_frame();
    let b = bg_common.as_frame();
    a.ensure_same_dims(b)?;
    let values = a
        .as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| (x - y).abs())
        .collect();
    DistanceMap::new(a.width(), a.height(), values)
}

/// `l1 + gmag + cva` where `l1 > gate`, zero elsewhere.
#[inline]
pub fn gated_sum(l1: f64, gmag: f64, cva: f64, gate: f64) -> f64 {
    if l1 > gate {
        l1 + gmag + cva
    } else {
        0.0
    }
}

/// The bank-index-independent terms of the combined distance for one test
/// frame.
#[derive(Clone, Debug)]
pub struct FrameTerms {
    pub gmag: DistanceMap,
    pub cva: DistanceMap,
}

impl FrameTerms {
    pub fn compute(
        test: &Frame,
        mean_bg: &Frame,
        tensor: &CrossProjectionTensor,
        test_dcv: &DiscriminativeCommonVector,
        bg_common: &CommonVector,
    ) -> Result<Self> {
        Ok(FrameTerms {
            gmag: dist_gmag(test, mean_bg, tensor)?,
            cva: dist_cva(test_dcv, bg_common)?,
        })
    }

    /// Combined distance of `test` to one bank frame.
    pub fn combine(&self, test: &Frame, bank_frame: &Frame, gate: f64) -> Result<DistanceMap> {
        let l1 = dist_l1(test, bank_frame)?;
        if l1.dims() != self.gmag.dims() {
            return Err(Error::dims(self.gmag.dims(), l1.dims()));
        }
        let values = l1
            .values
            .iter()
            .zip(&self.gmag.values)
            .zip(&self.cva.values)
            .map(|((&l, &g), &c)| gated_sum(l, g, c, gate))
            .collect();
        DistanceMap::new(l1.width, l1.height, values)
    }
}

/// Combined, gated distance of `test` to `bank_frame`.
pub fn combined_distance(
    test: &Frame,
    bank_frame: &Frame,
    mean_bg: &Frame,
    tensor: &CrossProjectionTensor,
    test_dcv: &DiscriminativeCommonVector,
    bg_common: &CommonVector,
) -> Result<DistanceMap> {
    FrameTerms::compute(test, mean_bg, tensor, test_dcv, bg_common)?.combine(test, bank_frame, DEFAULT_L1_GATE)
}
