//! Pixel-level scoring against ground truth in the CDnet 2014 conventions.
//!
//! Ground-truth grey values: 0 static, 50 hard shadow, 85 outside ROI,
//! 170 unknown motion, 255 moving. Shadow counts as background; 85 and 170
//! are not evaluated.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::ops::{Add, AddAssign};

use crate::error::{Error, Result};
use crate::segmentation::ForegroundMask;

pub const GT_STATIC: u8 = 0;
pub const GT_SHADOW: u8 = 50;
pub const GT_OUTSIDE_ROI: u8 = 85;
pub const GT_UNKNOWN: u8 = 170;
pub const GT_MOVING: u8 = 255;

/// An 8-bit single-channel image: ground truth or a region of interest.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelImage {
    pub width: usize,
    pub height: usize,
    pub data: Vec<u8>,
}

impl LabelImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::len(width * height, data.len()));
        }
        Ok(LabelImage { width, height, data })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum GtClass {
    Positive,
    Negative,
    Ignored,
}

/// Values that are not one of the five labels are binned to the nearest
/// one, which tolerates lossy re-encodings of the ground truth.
fn classify(v: u8) -> GtClass {
    match v {
        0..=67 => GtClass::Negative,
        68..=212 => GtClass::Ignored,
        _ => GtClass::Positive,
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    pub fn_: u64,
}

impl ConfusionCounts {
    pub fn new(tp: u64, tn: u64, fp: u64, fn_: u64) -> Self {
        ConfusionCounts { tp, tn, fp, fn_ }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.tn + self.fp + self.fn_
    }

    /// `TP / (TP + FP)`, 0 when nothing was predicted positive.
    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp)
    }

    /// `TP / (TP + FN)`, 0 when there are no positives.
    pub fn recall(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }

    pub fn f_score(&self) -> f64 {
        f_score(self)
    }

    pub fn mcc(&self) -> f64 {
        mcc(self)
    }

    /// Swaps the role of the two classes.
    pub fn inverted(&self) -> Self {
        ConfusionCounts {
            tp: self.tn,
            tn: self.tp,
            fp: self.fn_,
            fn_: self.fp,
        }
    }
}

impl Add for ConfusionCounts {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        ConfusionCounts {
            tp: self.tp + o.tp,
            tn: self.tn + o.tn,
            fp: self.fp + o.fp,
            fn_: self.fn_ + o.fn_,
        }
    }
}

impl AddAssign for ConfusionCounts {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Counts one frame. Pixels with `roi == 0` or an ignore label in `gt` are
/// skipped.
pub fn accumulate_confusion(
    mask: &ForegroundMask,
    gt: &LabelImage,
    roi: Option<&LabelImage>,
) -> Result<ConfusionCounts> {
    if gt.dims() != mask.dims() {
        return Err(Error::dims(mask.dims(), gt.dims()));
    }
    if let Some(r) = roi {
        if r.dims() != mask.dims() {
            return Err(Error::dims(mask.dims(), r.dims()));
        }
    }
    let mut c = ConfusionCounts::default();
    for (i, (&m, &g)) in mask.labels().iter().zip(&gt.data).enumerate() {
        if roi.is_some_and(|r| r.data[i] == 0) {
            continue;
        }
        match (classify(g), m == 1) {
            (GtClass::Ignored, _) => {}
            (GtClass::Positive, true) => c.tp += 1,
            (GtClass::Positive, false) => c.fn_ += 1,
            (GtClass::Negative, true) => c.fp += 1,
            (GtClass::Negative, false) => c.tn += 1,
        }
    }
    Ok(c)
}

/// Harmonic mean of precision and recall; 0 in every degenerate case.
pub fn f_score(c: &ConfusionCounts) -> f64 {
    let p = c.precision();
    let r = c.recall();
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// Matthews correlation coefficient; 0 when any marginal is empty.
pub fn mcc(c: &ConfusionCounts) -> f64 {
    let (tp, tn, fp, fn_) = (c.tp as f64, c.tn as f64, c.fp as f64, c.fn_ as f64);
    let factors = [tp + fp, tp + fn_, tn + fp, tn + fn_];
    if factors.contains(&0.0) {
        return 0.0;
    }
    let den = (factors[0] * factors[1]).sqrt() * (factors[2] * factors[3]).sqrt();
    ((tp * tn - fp * fn_) / den).clamp(-1.0, 1.0)
}

#[derive(Clone, Debug, PartialEq)]
pub struct VideoScore {
    pub category: String,
    pub video: String,
    pub counts: ConfusionCounts,
}

impl VideoScore {
    pub fn f_score(&self) -> f64 {
        self.counts.f_score()
    }

    pub fn mcc(&self) -> f64 {
        self.counts.mcc()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CategoryScore {
    pub category: String,
    pub videos: usize,
    /// Unweighted mean of the per-video F-scores.
    pub f_score: f64,
    pub mcc: f64,
}

/// Per-video scores with category means and the overall mean of category
/// means.
#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub videos: Vec<VideoScore>,
    pub categories: Vec<CategoryScore>,
    pub overall_f_score: f64,
    pub overall_mcc: f64,
}

impl Report {
    pub fn new(mut videos: Vec<VideoScore>) -> Result<Self> {
        if videos.is_empty() {
            return Err(Error::Empty("no videos scored"));
        }
        videos.sort_by(|a, b| (&a.category, &a.video).cmp(&(&b.category, &b.video)));
        let mut groups: BTreeMap<&str, Vec<&VideoScore>> = BTreeMap::new();
        for v in &videos {
            groups.entry(v.category.as_str()).or_default().push(v);
        }
        let mean = |xs: &mut dyn Iterator<Item = f64>| {
            let (s, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
            s / n as f64
        };
        let categories: Vec<CategoryScore> = groups
            .into_iter()
            .map(|(name, vs)| CategoryScore {
                category: name.to_string(),
                videos: vs.len(),
                f_score: mean(&mut vs.iter().map(|v| v.f_score())),
                mcc: mean(&mut vs.iter().map(|v| v.mcc())),
            })
            .collect();
        let overall_f_score = mean(&mut categories.iter().map(|c| c.f_score));
        let overall_mcc = mean(&mut categories.iter().map(|c| c.mcc));
        Ok(Report {
            videos,
            categories,
            overall_f_score,
            overall_mcc,
        })
    }

    pub fn category(&self, name: &str) -> Option<&CategoryScore> {
        self.categories.iter().find(|c| c.category == name)
    }

    /// One row per video:
    /// `category,video,TP,TN,FP,FN,precision,recall,fscore,mcc,mcc_percent`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("category,video,TP,TN,FP,FN,precision,recall,fscore,mcc,mcc_percent\n");
        for v in &self.videos {
            let c = &v.counts;
            writeln!(
                out,
                "{},{},{},{},{},{},{:.6},{:.6},{:.6},{:.6},{:.4}",
                csv_field(&v.category),
                csv_field(&v.video),
                c.tp,
                c.tn,
                c.fp,
                c.fn_,
                c.precision(),
                c.recall(),
                c.f_score(),
                c.mcc(),
                100.0 * c.mcc()
            )
            .unwrap();
        }
        out
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        writeln!(
            out,
            "{:<24} {:<24} {:>8} {:>8} {:>8} {:>8}",
            "category", "video", "prec", "recall", "F", "MCC"
        )
        .unwrap();
        for v in &self.videos {
            writeln!(
                out,
                "{:<24} {:<24} {:>8.4} {:>8.4} {:>8.4} {:>8.4}",
                v.category,
                v.video,
                v.counts.precision(),
                v.counts.recall(),
                v.f_score(),
                v.mcc()
            )
            .unwrap();
        }
        writeln!(out).unwrap();
        writeln!(out, "{:<24} {:>6} {:>8} {:>8}", "category", "videos", "F", "MCC").unwrap();
        for c in &self.categories {
            writeln!(
                out,
                "{:<24} {:>6} {:>8.4} {:>8.4}",
                c.category, c.videos, c.f_score, c.mcc
            )
            .unwrap();
        }
        writeln!(
            out,
            "{:<24} {:>6} {:>8.4} {:>8.4}",
            "overall",
            self.videos.len(),
            self.overall_f_score,
            self.overall_mcc
        )
        .unwrap();
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mask(labels: &[u8], w: usize) -> ForegroundMask {
        ForegroundMask::new(w, labels.len() / w, labels.to_vec()).unwrap()
    }

    #[test]
    fn f_score_examples() {
        assert!((f_score(&ConfusionCounts::new(80, 0, 20, 20)) - 0.8).abs() < 1e-12);
        assert_eq!(f_score(&ConfusionCounts::new(0, 10, 5, 5)), 0.0);
        assert_eq!(f_score(&ConfusionCounts::default()), 0.0);
        assert!((f_score(&ConfusionCounts::new(40, 0, 10, 30)) - 32.0 / 48.0).abs() < 1e-12);
    }

    #[test]
    fn mcc_examples() {
        assert_eq!(mcc(&ConfusionCounts::new(50, 50, 0, 0)), 1.0);
        assert!((mcc(&ConfusionCounts::new(40, 40, 10, 10)) - 0.6).abs() < 1e-12);
        assert_eq!(mcc(&ConfusionCounts::new(0, 0, 50, 50)), -1.0);
        assert_eq!(mcc(&ConfusionCounts::new(10, 0, 0, 0)), 0.0);
    }

    #[test]
    fn perfect_and_all_positive_masks() {
        let gt = LabelImage::new(2, 2, vec![0, 255, 255, 0]).unwrap();
        let c = accumulate_confusion(&mask(&[0, 1, 1, 0], 2), &gt, None).unwrap();
        assert_eq!((c.fp, c.fn_), (0, 0));
        let gt0 = LabelImage::new(2, 2, vec![0; 4]).unwrap();
        let c = accumulate_confusion(&mask(&[1; 4], 2), &gt0, None).unwrap();
        assert_eq!(c.fp, 4);
    }

    #[test]
    fn ignore_labels_and_roi() {
        let gt = LabelImage::new(4, 1, vec![GT_SHADOW, GT_OUTSIDE_ROI, GT_UNKNOWN, GT_MOVING]).unwrap();
        let c = accumulate_confusion(&mask(&[1, 1, 1, 1], 4), &gt, None).unwrap();
        assert_eq!(c, ConfusionCounts::new(1, 0, 1, 0));
        let roi = LabelImage::new(4, 1, vec![0, 255, 255, 255]).unwrap();
        let c = accumulate_confusion(&mask(&[1, 1, 1, 1], 4), &gt, Some(&roi)).unwrap();
        assert_eq!(c, ConfusionCounts::new(1, 0, 0, 0));
    }

    #[test]
    fn dims_must_match() {
        let gt = LabelImage::new(3, 1, vec![0; 3]).unwrap();
        assert!(accumulate_confusion(&mask(&[0, 0], 2), &gt, None).is_err());
    }

    #[test]
    fn report_means() {
        // F = 0.6: tp=3, fp=2, fn=2 -> p = r = 0.6
        // F = 0.8: tp=4, fp=1, fn=1
        let v = |cat: &str, name: &str, c| VideoScore {
            category: cat.into(),
            video: name.into(),
            counts: c,
        };
        let r = Report::new(vec![
            v("a", "x", ConfusionCounts::new(3, 10, 2, 2)),
            v("a", "y", ConfusionCounts::new(4, 10, 1, 1)),
        ])
        .unwrap();
        assert!((r.category("a").unwrap().f_score - 0.7).abs() < 1e-12);
        assert!((r.overall_f_score - 0.7).abs() < 1e-12);
        let csv = r.to_csv();
        assert!(csv.starts_with("category,video,TP,TN,FP,FN,precision,recall,fscore,mcc"));
        assert_eq!(csv.lines().count(), 3);
        assert!(Report::new(vec![]).is_err());
    }
}
