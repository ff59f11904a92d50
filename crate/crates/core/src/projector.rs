//! Incrementally maintained projector onto a bank's difference subspace.
//!
//! Holds the difference vectors `d_j = a_j - a_0` and their Gram matrix.
//! The projection is applied as `D (D^T D)^+ D^T x` through a pivot-dropping
//! Cholesky factor, so replacing one bank frame costs `O(kP)` instead of the
//! `O(k^2 P)` of a Gram-Schmidt rebuild. Spans and residuals agree with
//! [`crate::cva::bank_basis`] up to rounding.

use crate::cva::{self, OrthonormalBasis};
use crate::error::{Error, Result};
use crate::frame::{axpy, dot, Frame};

/// Pixels per cache tile when filling the whole Gram matrix.
const TILE: usize = 2048;

/// Relative pivot floor in the Gram domain. Residual norms below about
/// `sqrt(GRAM_RANK_TOL)` of a vector's norm cannot be resolved from inner
/// products and are treated as dependent.
const GRAM_RANK_TOL: f64 = 1e-13;

#[derive(Clone, Debug)]
pub struct DifferenceProjector {
    width: usize,
    height: usize,
    reference: Vec<f64>,
    diffs: Vec<Vec<f64>>,
    /// Row-major `m x m`, `m = diffs.len()`.
    gram: Vec<f64>,
    /// Row-major upper-triangular factor; rows of dropped vectors are unused.
    factor: Vec<f64>,
    kept: Vec<bool>,
    drop_tol: f64,
}

impl DifferenceProjector {
    /// Projector for `bank` with `bank[0]` as reference.
    pub fn new(bank: &[Frame], drop_tol: f64) -> Result<Self> {
        let first = bank.first().ok_or(Error::InsufficientBank { needed: 1, found: 0 })?;
        if !(drop_tol > 0.0) {
            return Err(Error::Config(format!("drop_tol must be positive, got {drop_tol}")));
        }
        for f in &bank[1..] {
            first.ensure_same_dims(f)?;
        }
        let reference = first.as_slice().to_vec();
        let diffs: Vec<Vec<f64>> = bank[1..]
            .iter()
            .map(|a| a.as_slice().iter().zip(&reference).map(|(x, r)| x - r).collect())
            .collect();
        let m = diffs.len();
        let mut p = DifferenceProjector {
            width: first.width(),
            height: first.height(),
            reference,
            diffs,
            gram: vec![0.0; m * m],
            factor: vec![0.0; m * m],
            kept: vec![false; m],
            drop_tol,
        };
        p.fill_gram();
        p.factorize();
        Ok(p)
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    /// Dimension of the difference subspace after dropping dependents.
    pub fn rank(&self) -> usize {
        self.kept.iter().filter(|&&k| k).count()
    }

    /// Replaces bank frame `index` and refreshes the factorization.
    pub fn replace(&mut self, index: usize, frame: &[f64]) -> Result<()> {
        let p = self.reference.len();
        if frame.len() != p {
            return Err(Error::len(p, frame.len()));
        }
        let m = self.diffs.len();
        if index > m {
            return Err(Error::Config(format!(
                "bank index {index} out of range for bank of {}",
                m + 1
            )));
        }
        if index == 0 {
            for d in &mut self.diffs {
                for ((di, r), x) in d.iter_mut().zip(&self.reference).zip(frame) {
                    *di += r - x;
                }
            }
            self.reference.copy_from_slice(frame);
            self.fill_gram();
        } else {
            let j = index - 1;
            for ((di, x), r) in self.diffs[j].iter_mut().zip(frame).zip(&self.reference) {
                *di = x - r;
            }
            for i in 0..m {
                let g = dot(&self.diffs[i], &self.diffs[j]);
                self.gram[i * m + j] = g;
                self.gram[j * m + i] = g;
            }
        }
        self.factorize();
        Ok(())
    }

    fn fill_gram(&mut self) {
        let m = self.diffs.len();
        self.gram.iter_mut().for_each(|g| *g = 0.0);
        let p = self.reference.len();
        let mut start = 0;
        while start < p {
            let end = (start + TILE).min(p);
            for i in 0..m {
                let di = &self.diffs[i][start..end];
                for j in 0..=i {
                    self.gram[i * m + j] += dot(di, &self.diffs[j][start..end]);
                }
            }
            start = end;
        }
        for i in 0..m {
            for j in 0..i {
                self.gram[j * m + i] = self.gram[i * m + j];
            }
        }
    }

    /// Cholesky `G = R^T R` in bank order, dropping a vector whose residual
    /// against the earlier kept ones is at most `drop_tol * max(1, |d_j|)`.
    fn factorize(&mut self) {
        let m = self.diffs.len();
        let (g, r) = (&self.gram, &mut self.factor);
        r.iter_mut().for_each(|x| *x = 0.0);
        for j in 0..m {
            let mut s = g[j * m + j];
            for i in 0..j {
                if !self.kept[i] {
                    continue;
                }
                let mut v = g[i * m + j];
                for l in 0..i {
                    if self.kept[l] {
                        v -= r[l * m + i] * r[l * m + j];
                    }
                }
                let rij = v / r[i * m + i];
                r[i * m + j] = rij;
                s -= rij * rij;
            }
            let gjj = g[j * m + j];
            let floor = (self.drop_tol * gjj.sqrt().max(1.0)).powi(2).max(GRAM_RANK_TOL * gjj);
            self.kept[j] = s > floor;
            if self.kept[j] {
                r[j * m + j] = s.sqrt();
            }
        }
    }

    /// Least-squares coefficients `y` with `D y` the projection of the
    /// vector whose inner products with the differences are `c`.
    fn solve(&self, c: &mut [f64]) {
        let m = self.diffs.len();
        let r = &self.factor;
        for i in 0..m {
            if !self.kept[i] {
                c[i] = 0.0;
                continue;
            }
            let mut v = c[i];
            for l in 0..i {
                if self.kept[l] {
                    v -= r[l * m + i] * c[l];
                }
            }
            c[i] = v / r[i * m + i];
        }
        for i in (0..m).rev() {
            if !self.kept[i] {
                continue;
            }
            let mut v = c[i];
            for l in i + 1..m {
                if self.kept[l] {
                    v -= r[i * m + l] * c[l];
                }
            }
            c[i] = v / r[i * m + i];
        }
    }

    /// `out = a - proj(a)`. Two projection sweeps keep the residual
    /// orthogonal to the subspace close to working precision.
    pub fn residual_into(&self, a: &[f64], out: &mut [f64]) {
        out.copy_from_slice(a);
        let mut c = vec![0.0; self.diffs.len()];
        for _ in 0..2 {
            for (ci, d) in c.iter_mut().zip(&self.diffs) {
                *ci = dot(out, d);
            }
            self.solve(&mut c);
            for (&ci, d) in c.iter().zip(&self.diffs) {
                if ci != 0.0 {
                    axpy(-ci, d, out);
                }
            }
        }
    }

    /// `a - proj(a)`.
    pub fn residual(&self, a: &Frame) -> Result<Frame> {
        if a.dims() != self.dims() {
            return Err(Error::dims(self.dims(), a.dims()));
        }
        let mut out = vec![0.0; a.len()];
        self.residual_into(a.as_slice(), &mut out);
        Frame::new(self.width, self.height, out)
    }

    /// The bank's common vector, `a_0 - proj(a_0)`.
    pub fn common_vector(&self) -> Frame {
        let mut out = vec![0.0; self.reference.len()];
        self.residual_into(&self.reference, &mut out);
        Frame::new(self.width, self.height, out).expect("projector shape")
    }

    /// Explicit orthonormal basis of the same subspace, built with modified
    /// Gram-Schmidt. Costs a full rebuild.
    pub fn orthonormal_basis(&self) -> OrthonormalBasis {
        let diffs: Vec<Frame> = self
            .diffs
            .iter()
            .map(|d| Frame::new(self.width, self.height, d.clone()).expect("projector shape"))
            .collect();
        if diffs.is_empty() {
            return OrthonormalBasis::empty(self.width, self.height, 1);
        }
        cva::gram_schmidt(&diffs, self.drop_tol).expect("validated inputs")
    }
}
