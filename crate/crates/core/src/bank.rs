//! The background bank and the artifacts derived from it.

use crate::cva::{self, CommonVector, OrthonormalBasis};
use crate::distance::{cross_projection_tensor, sobel, CrossProjectionTensor};
use crate::error::{Error, Result};
use crate::frame::Frame;
use crate::projector::DifferenceProjector;

/// Bank frames are always orthogonalized against this member.
pub const REFERENCE_INDEX: usize = 0;

/// `N` background frames plus the subspace projector, common vector, mean
/// frame and gradient tensor computed from them. Mutating a frame marks it
/// dirty; [`BackgroundBank::rebuild`] folds dirty frames into the projector
/// and recomputes the rest.
#[derive(Clone, Debug)]
pub struct BackgroundBank {
    frames: Vec<Frame>,
    projector: DifferenceProjector,
    common: CommonVector,
    mean: Frame,
    tensor: CrossProjectionTensor,
    mean_magnitude: Vec<f64>,
    dirty: Vec<bool>,
    drop_tol: f64,
}

impl BackgroundBank {
    pub fn new(frames: Vec<Frame>, drop_tol: f64, tensor_eps: f64) -> Result<Self> {
        if frames.is_empty() {
            return Err(Error::InsufficientBank { needed: 1, found: 0 });
        }
        for f in &frames[1..] {
            frames[0].ensure_same_dims(f)?;
        }
        let projector = DifferenceProjector::new(&frames, drop_tol)?;
        let d = derive(&frames, &projector, tensor_eps)?;
        Ok(BackgroundBank {
            dirty: vec![false; frames.len()],
            frames,
            projector,
            common: d.common,
            mean: d.mean,
            tensor: d.tensor,
            mean_magnitude: d.mean_magnitude,
            drop_tol,
        })
    }

    pub fn rebuild(&mut self, drop_tol: f64, tensor_eps: f64) -> Result<()> {
        let dirty = self.dirty.iter().filter(|&&d| d).count();
        if drop_tol != self.drop_tol || 4 * dirty > self.frames.len() {
            self.projector = DifferenceProjector::new(&self.frames, drop_tol)?;
            self.drop_tol = drop_tol;
        } else {
            for (i, f) in self.frames.iter().enumerate() {
                if self.dirty[i] {
                    self.projector.replace(i, f.as_slice())?;
                }
            }
        }
        let d = derive(&self.frames, &self.projector, tensor_eps)?;
        self.common = d.common;
        self.mean = d.mean;
        self.tensor = d.tensor;
        self.mean_magnitude = d.mean_magnitude;
        self.dirty.iter_mut().for_each(|d| *d = false);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn dims(&self) -> (usize, usize) {
        self.frames[0].dims()
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    /// Mutable access to one frame; marks the derived artifacts stale.
    pub fn frame_mut(&mut self, i: usize) -> &mut Frame {
        self.dirty[i] = true;
        &mut self.frames[i]
    }

    pub fn is_stale(&self) -> bool {
        self.dirty.iter().any(|&d| d)
    }

    /// Projector onto the difference subspace as of the last rebuild.
    pub fn projector(&self) -> &DifferenceProjector {
        &self.projector
    }

    /// Explicit orthonormal basis of the subspace as of the last rebuild.
    /// Runs a full Gram-Schmidt; intended for inspection, not per-frame use.
    pub fn basis(&self) -> OrthonormalBasis {
        self.projector.orthonormal_basis()
    }

    pub fn common(&self) -> &CommonVector {
        &self.common
    }

    pub fn mean(&self) -> &Frame {
        &self.mean
    }

    pub fn tensor(&self) -> &CrossProjectionTensor {
        &self.tensor
    }

    /// Tensor-transformed gradient magnitude of the mean frame.
    pub fn mean_magnitude(&self) -> &[f64] {
        &self.mean_magnitude
    }
}

struct Derived {
    common: CommonVector,
    mean: Frame,
    tensor: CrossProjectionTensor,
    mean_magnitude: Vec<f64>,
}

fn derive(frames: &[Frame], projector: &DifferenceProjector, tensor_eps: f64) -> Result<Derived> {
    let common = CommonVector::from_frame(projector.common_vector());
    let mean = cva::average_vector(frames)?;
    let gradient = sobel(&mean);
    let tensor = cross_projection_tensor(&gradient, tensor_eps)?;
    let mean_magnitude = gradient.transformed(&tensor)?.magnitude;
    Ok(Derived {
        common,
        mean,
        tensor,
        mean_magnitude,
    })
}
