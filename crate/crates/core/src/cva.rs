//! Common vector mathematics for the insufficient-data case.
//!
//! A bank of `k` frames `a_1..a_k` is decomposed as `a_j = a_com + a_diff,j`,
//! where `a_diff,j` lies in the span of the difference vectors
//! `a_j - a_ref` and the common vector `a_com` is the part every member
//! shares. The difference subspace is orthonormalized with modified
//! Gram-Schmidt; no eigen-decomposition of the (huge) scatter matrix is
//! ever formed.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};
use crate::frame::{axpy, dot, norm, Frame};

/// Relative tolerance below which an orthogonalized difference vector is
/// considered linearly dependent and dropped.
pub const DEFAULT_DROP_TOL: f64 = 1e-10;

/// Upper bound on Gram-Schmidt passes per vector. A second pass only runs
/// when the first cancelled more than half the norm.
const MAX_ORTHO_PASSES: usize = 3;

/// Orthonormal basis `z_1..z_m` of a difference subspace, `m <= k - 1`.
#[derive(Clone, Debug)]
pub struct OrthonormalBasis {
    width: usize,
    height: usize,
    vectors: Vec<Vec<f64>>,
    source_count: usize,
}

impl OrthonormalBasis {
    /// Basis with no vectors; projection onto it is the zero map.
    pub fn empty(width: usize, height: usize, source_count: usize) -> Self {
        OrthonormalBasis {
            width,
            height,
            vectors: Vec::new(),
            source_count,
        }
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// True when every difference vector was dropped; the common vector then
    /// equals the reference frame.
    pub fn is_degenerate(&self) -> bool {
        self.is_empty()
    }

    /// Number of bank frames the basis was built from (`k`).
    pub fn source_count(&self) -> usize {
        self.source_count
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn vectors(&self) -> impl Iterator<Item = &[f64]> {
        self.vectors.iter().map(Vec::as_slice)
    }

    pub fn vector(&self, i: usize) -> Frame {
        Frame::new(self.width, self.height, self.vectors[i].clone()).expect("basis vector shape")
    }

    fn check(&self, frame: &Frame) -> Result<()> {
        if frame.dims() != self.dims() {
            return Err(Error::dims(self.dims(), frame.dims()));
        }
        Ok(())
    }

    /// `out = a - sum_i <a, z_i> z_i`, written into `out`.
    pub(crate) fn residual_into(&self, a: &[f64], out: &mut [f64]) {
        out.copy_from_slice(a);
        for z in &self.vectors {
            let c = dot(a, z);
            axpy(-c, z, out);
        }
    }

    /// Appends `v` after orthogonalizing it against the current vectors.
    /// Returns `false` when it is dropped as dependent.
    fn push_orthogonalized(&mut self, mut v: Vec<f64>, drop_tol: f64) -> bool {
        let source_norm = norm(&v);
        let mut before = source_norm;
        for _ in 0..MAX_ORTHO_PASSES {
            for z in &self.vectors {
                let c = dot(&v, z);
                axpy(-c, z, &mut v);
            }
            let after = norm(&v);
            if after > before * FRAC_1_SQRT_2 || after == 0.0 {
                break;
            }
            before = after;
        }
        let vn = norm(&v);
        if vn <= drop_tol * source_norm.max(1.0) {
            return false;
        }
        let inv = 1.0 / vn;
        v.iter_mut().for_each(|x| *x *= inv);
        self.vectors.push(v);
        true
    }
}

/// Common vector of a bank: the component orthogonal to its difference
/// subspace.
#[derive(Clone, Debug, PartialEq)]
pub struct CommonVector(Frame);

impl CommonVector {
    pub(crate) fn from_frame(frame: Frame) -> Self {
        CommonVector(frame)
    }

    pub fn as_frame(&self) -> &Frame {
        &self.0
    }

    pub fn into_frame(self) -> Frame {
        self.0
    }
}

/// A test frame with its projection onto a bank's difference subspace
/// removed.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscriminativeCommonVector(Frame);

impl DiscriminativeCommonVector {
    pub fn as_frame(&self) -> &Frame {
        &self.0
    }

    pub fn into_frame(self) -> Frame {
        self.0
    }
}

fn check_bank(bank: &[Frame], min_len: usize) -> Result<()> {
    if bank.len() < min_len {
        return Err(Error::InsufficientBank {
            needed: min_len,
            found: bank.len(),
        });
    }
    let first = &bank[0];
    for f in &bank[1..] {
        first.ensure_same_dims(f)?;
    }
    Ok(())
}

fn check_index(bank: &[Frame], ref_index: usize) -> Result<()> {
    if ref_index >= bank.len() {
        return Err(Error::Config(format!(
            "reference index {ref_index} out of range for bank of {}",
            bank.len()
        )));
    }
    Ok(())
}

/// `d_j = a_j - a_ref` for every `j != ref_index`, in bank order.
pub fn difference_vectors(bank: &[Frame], ref_index: usize) -> Result<Vec<Frame>> {
    check_bank(bank, 2)?;
    check_index(bank, ref_index)?;
    let reference = bank[ref_index].as_slice();
    bank.iter()
        .enumerate()
        .filter(|&(j, _)| j != ref_index)
        .map(|(_, a)| {
            let data = a.as_slice().iter().zip(reference).map(|(x, r)| x - r).collect();
            Frame::new(a.width(), a.height(), data)
        })
        .collect()
}

/// Orthonormalizes `diffs` in order with modified Gram-Schmidt.
///
/// A candidate whose residual norm is at most `drop_tol * max(1, |d_j|)` is
/// dropped, so the result may hold fewer than `diffs.len()` vectors. An
/// empty result is the degenerate case (all differences vanish).
pub fn gram_schmidt(diffs: &[Frame], drop_tol: f64) -> Result<OrthonormalBasis> {
    let first = diffs.first().ok_or(Error::Empty("no difference vectors"))?;
    if !(drop_tol > 0.0) {
        return Err(Error::Config(format!("drop_tol must be positive, got {drop_tol}")));
    }
    for d in &diffs[1..] {
        first.ensure_same_dims(d)?;
    }
    let mut basis = OrthonormalBasis::empty(first.width(), first.height(), diffs.len() + 1);
    for d in diffs {
        basis.push_orthogonalized(d.as_slice().to_vec(), drop_tol);
    }
    Ok(basis)
}

/// Builds the difference-subspace basis of `bank` directly, without
/// materializing the difference frames first.
pub fn bank_basis(bank: &[Frame], ref_index: usize, drop_tol: f64) -> Result<OrthonormalBasis> {
    check_bank(bank, 1)?;
    check_index(bank, ref_index)?;
    if !(drop_tol > 0.0) {
        return Err(Error::Config(format!("drop_tol must be positive, got {drop_tol}")));
    }
    let (w, h) = bank[0].dims();
    let mut basis = OrthonormalBasis::empty(w, h, bank.len());
    let reference = bank[ref_index].as_slice();
    for (j, a) in bank.iter().enumerate() {
        if j == ref_index {
            continue;
        }
        let v = a.as_slice().iter().zip(reference).map(|(x, r)| x - r).collect();
        basis.push_orthogonalized(v, drop_tol);
    }
    Ok(basis)
}

/// `sum_i <a, z_i> z_i`; the zero frame for an empty basis.
pub fn project_onto_basis(a: &Frame, basis: &OrthonormalBasis) -> Result<Frame> {
    basis.check(a)?;
    let mut out = vec![0.0; a.len()];
    for z in basis.vectors() {
        axpy(dot(a.as_slice(), z), z, &mut out);
    }
    Frame::new(a.width(), a.height(), out)
}

fn residual(a: &Frame, basis: &OrthonormalBasis) -> Result<Frame> {
    basis.check(a)?;
    let mut out = vec![0.0; a.len()];
    basis.residual_into(a.as_slice(), &mut out);
    Frame::new(a.width(), a.height(), out)
}

/// `a_com = a_ref - proj(a_ref)`.
pub fn common_vector(bank: &[Frame], basis: &OrthonormalBasis, ref_index: usize) -> Result<CommonVector> {
    check_bank(bank, 1)?;
    check_index(bank, ref_index)?;
    residual(&bank[ref_index], basis).map(CommonVector)
}

/// `a_com = a_ave - proj(a_ave)`; agrees with [`common_vector`] because the
/// average differs from any member only by an element of the difference
/// subspace.
pub fn common_vector_via_average(bank: &[Frame], basis: &OrthonormalBasis) -> Result<CommonVector> {
    let ave = average_vector(bank)?;
    residual(&ave, basis).map(CommonVector)
}

/// `a_t,com = a_t - proj(a_t)`.
pub fn discriminative_common_vector(test: &Frame, basis: &OrthonormalBasis) -> Result<DiscriminativeCommonVector> {
    residual(test, basis).map(DiscriminativeCommonVector)
}

/// Elementwise arithmetic mean of the bank.
pub fn average_vector(bank: &[Frame]) -> Result<Frame> {
    if bank.is_empty() {
        return Err(Error::Empty("average of an empty bank"));
    }
    check_bank(bank, 1)?;
    let mut sum = vec![0.0; bank[0].len()];
    for a in bank {
        for (s, x) in sum.iter_mut().zip(a.as_slice()) {
            *s += x;
        }
    }
    let inv = 1.0 / bank.len() as f64;
    sum.iter_mut().for_each(|s| *s *= inv);
    Frame::new(bank[0].width(), bank[0].height(), sum)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(data: &[f64]) -> Frame {
        Frame::from_vec(data.to_vec()).unwrap()
    }

    fn toy_bank() -> Vec<Frame> {
        vec![v(&[1.0, 1.0, 1.0]), v(&[1.0, 1.0, -1.0]), v(&[1.0, 5.0, 5.0])]
    }

    fn assert_close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= tol, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn toy_differences() {
        let d = difference_vectors(&toy_bank(), 0).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d[0].as_slice(), &[0.0, 0.0, -2.0]);
        assert_eq!(d[1].as_slice(), &[0.0, 4.0, 4.0]);
    }

    #[test]
    fn identical_frames_give_zero_difference() {
        let bank = vec![v(&[3.0, 4.0]), v(&[3.0, 4.0])];
        let d = difference_vectors(&bank, 0).unwrap();
        assert_eq!(d[0].as_slice(), &[0.0, 0.0]);
    }

    #[test]
    fn difference_errors() {
        assert!(matches!(
            difference_vectors(&[v(&[1.0])], 0),
            Err(Error::InsufficientBank { .. })
        ));
        assert!(matches!(
            difference_vectors(&[v(&[1.0]), v(&[1.0, 2.0])], 0),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(difference_vectors(&toy_bank(), 3).is_err());
    }

    #[test]
    fn toy_basis() {
        let d = difference_vectors(&toy_bank(), 0).unwrap();
        let basis = gram_schmidt(&d, DEFAULT_DROP_TOL).unwrap();
        assert_eq!(basis.len(), 2);
        assert_close(basis.vector(0).as_slice(), &[0.0, 0.0, -1.0], 1e-12);
        assert_close(basis.vector(1).as_slice(), &[0.0, 1.0, 0.0], 1e-12);
    }

    #[test]
    fn zero_difference_is_degenerate() {
        let basis = gram_schmidt(&[v(&[0.0, 0.0, 0.0])], DEFAULT_DROP_TOL).unwrap();
        assert!(basis.is_degenerate());
    }

    #[test]
    fn duplicate_difference_is_dropped() {
        let d = vec![v(&[1.0, 2.0, 0.0]), v(&[2.0, 4.0, 0.0]), v(&[0.0, 0.0, 3.0])];
        let basis = gram_schmidt(&d, DEFAULT_DROP_TOL).unwrap();
        assert_eq!(basis.len(), 2);
    }

    #[test]
    fn gram_schmidt_rejects_bad_input() {
        assert!(gram_schmidt(&[], DEFAULT_DROP_TOL).is_err());
        assert!(gram_schmidt(&[v(&[1.0])], 0.0).is_err());
    }

    #[test]
    fn toy_projection_and_common_vector() {
        let bank = toy_bank();
        let basis = bank_basis(&bank, 0, DEFAULT_DROP_TOL).unwrap();
        let p = project_onto_basis(&bank[0], &basis).unwrap();
        assert_close(p.as_slice(), &[0.0, 1.0, 1.0], 1e-12);
        let com = common_vector(&bank, &basis, 0).unwrap();
        assert_close(com.as_frame().as_slice(), &[1.0, 0.0, 0.0], 1e-12);
        let via_ave = common_vector_via_average(&bank, &basis).unwrap();
        assert_close(via_ave.as_frame().as_slice(), &[1.0, 0.0, 0.0], 1e-12);
    }

    #[test]
    fn toy_average_and_its_projection() {
        let bank = toy_bank();
        let ave = average_vector(&bank).unwrap();
        assert_close(ave.as_slice(), &[1.0, 2.33, 1.67], 0.01);
        let basis = bank_basis(&bank, 0, DEFAULT_DROP_TOL).unwrap();
        let p = project_onto_basis(&ave, &basis).unwrap();
        assert_close(p.as_slice(), &[0.0, 2.33, 1.67], 0.01);
    }

    #[test]
    fn empty_basis_projects_to_zero() {
        let basis = OrthonormalBasis::empty(3, 1, 1);
        let p = project_onto_basis(&v(&[4.0, -1.0, 2.0]), &basis).unwrap();
        assert_eq!(p.as_slice(), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn identical_bank_common_vector_is_the_frame() {
        let f = v(&[7.0, 8.0, 9.0]);
        let bank = vec![f.clone(), f.clone(), f.clone()];
        let basis = bank_basis(&bank, 0, DEFAULT_DROP_TOL).unwrap();
        assert!(basis.is_degenerate());
        assert_eq!(common_vector(&bank, &basis, 0).unwrap().as_frame(), &f);
    }

    #[test]
    fn single_frame_bank_average_is_common_vector() {
        let f = v(&[2.0, 3.0]);
        let bank = vec![f.clone()];
        let basis = bank_basis(&bank, 0, DEFAULT_DROP_TOL).unwrap();
        assert_eq!(average_vector(&bank).unwrap(), f);
        assert_eq!(common_vector_via_average(&bank, &basis).unwrap().as_frame(), &f);
    }

    #[test]
    fn dcv_of_bank_members_is_common_vector() {
        let bank = toy_bank();
        let basis = bank_basis(&bank, 0, DEFAULT_DROP_TOL).unwrap();
        for a in &bank {
            let dcv = discriminative_common_vector(a, &basis).unwrap();
            assert_close(dcv.as_frame().as_slice(), &[1.0, 0.0, 0.0], 1e-12);
        }
    }

    #[test]
    #[allow(clippy::approx_constant)]
    fn toy_separation_common_vs_average() {
        let bank = toy_bank();
        let basis = bank_basis(&bank, 0, DEFAULT_DROP_TOL).unwrap();
        let com = common_vector(&bank, &basis, 0).unwrap();
        let ave = average_vector(&bank).unwrap();
        let dist = |a: &Frame, b: &Frame| {
            a.as_slice()
                .iter()
                .zip(b.as_slice())
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt()
        };
        let com_d: Vec<f64> = bank.iter().map(|a| dist(a, com.as_frame())).collect();
        let ave_d: Vec<f64> = bank.iter().map(|a| dist(a, &ave)).collect();
        assert_close(&com_d, &[1.4142, 1.4142, 7.0711], 1e-3);
        assert_close(&ave_d, &[1.4907, 2.9814, 4.2687], 1e-3);
        assert!(com_d[2] > com_d[0]);
        assert!((com_d[0] - com_d[1]).abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let basis = bank_basis(&toy_bank(), 0, DEFAULT_DROP_TOL).unwrap();
        assert!(project_onto_basis(&v(&[1.0, 2.0]), &basis).is_err());
        assert!(discriminative_common_vector(&v(&[1.0]), &basis).is_err());
    }
}
