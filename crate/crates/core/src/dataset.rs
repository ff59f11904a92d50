//! Image-sequence I/O in the CDnet 2014 directory layout.
//!
//! ```text
//! <root>/<category>/<video>/input/in000001.jpg
//!                          /groundtruth/gt000001.png
//!                          /ROI.bmp
//!                          /temporalROI.txt
//! ```
//!
//! Result masks are written as `bin000001.png` with values 0/255.

use std::fs;
use std::path::{Path, PathBuf};

use image::{DynamicImage, GrayImage};

use crate::error::{Error, Result};
use crate::eval::LabelImage;
use crate::frame::Frame;
use crate::segmentation::ForegroundMask;

pub const INPUT_PREFIX: &str = "in";
pub const GT_PREFIX: &str = "gt";
pub const MASK_PREFIX: &str = "bin";

const IMAGE_EXTENSIONS: [&str; 6] = ["jpg", "jpeg", "png", "pgm", "ppm", "bmp"];
const ROI_NAMES: [&str; 3] = ["ROI.bmp", "ROI.png", "ROI.jpg"];

pub fn input_file_name(number: usize, ext: &str) -> String {
    format!("{INPUT_PREFIX}{number:06}.{ext}")
}

pub fn gt_file_name(number: usize) -> String {
    format!("{GT_PREFIX}{number:06}.png")
}

pub fn mask_file_name(number: usize) -> String {
    format!("{MASK_PREFIX}{number:06}.png")
}

/// One video of a dataset.
#[derive(Clone, Debug, PartialEq)]
pub struct SequenceDescriptor {
    pub input_dir: PathBuf,
    pub groundtruth_dir: Option<PathBuf>,
    pub roi: Option<PathBuf>,
    /// Inclusive range of frame numbers to evaluate.
    pub temporal_roi: Option<(usize, usize)>,
    pub category: String,
    pub video: String,
}

impl SequenceDescriptor {
    /// Describes `<video_dir>`; accepts either a CDnet video directory or a
    /// bare directory of `inNNNNNN` frames.
    pub fn from_dir(video_dir: &Path) -> Result<Self> {
        if !video_dir.is_dir() {
            return Err(Error::io(
                video_dir,
                std::io::Error::new(std::io::ErrorKind::NotFound, "not a directory"),
            ));
        }
        let nested = video_dir.join("input");
        let input_dir = if nested.is_dir() {
            nested
        } else {
            video_dir.to_path_buf()
        };
        let groundtruth_dir = Some(video_dir.join("groundtruth")).filter(|p| p.is_dir());
        let roi = ROI_NAMES.iter().map(|n| video_dir.join(n)).find(|p| p.is_file());
        let troi_path = video_dir.join("temporalROI.txt");
        let temporal_roi = if troi_path.is_file() {
            Some(read_temporal_roi(&troi_path)?)
        } else {
            None
        };
        let name = |p: Option<&Path>| {
            p.and_then(|p| p.file_name())
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default()
        };
        let abs = video_dir.canonicalize().unwrap_or_else(|_| video_dir.to_path_buf());
        Ok(SequenceDescriptor {
            input_dir,
            groundtruth_dir,
            roi,
            temporal_roi,
            category: name(abs.parent()),
            video: name(Some(&abs)),
        })
    }

    /// Numbered input frames in order; fails on the first gap.
    pub fn frame_paths(&self) -> Result<Vec<(usize, PathBuf)>> {
        numbered_files(&self.input_dir, INPUT_PREFIX)
    }

    pub fn read_roi(&self) -> Result<Option<LabelImage>> {
        self.roi.as_deref().map(read_label_image).transpose()
    }
}

pub fn read_temporal_roi(path: &Path) -> Result<(usize, usize)> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let nums: Vec<usize> = text
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    match nums.as_slice() {
        [first, last] if first <= last => Ok((*first, *last)),
        _ => Err(Error::Config(format!(
            "{}: expected two increasing frame numbers",
            path.display()
        ))),
    }
}

/// Lists `<prefix>NNNNNN.<ext>` files in `dir`, sorted by number, and checks
/// that the numbering has no gaps.
pub fn numbered_files(dir: &Path, prefix: &str) -> Result<Vec<(usize, PathBuf)>> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut files = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let path = entry.path();
        let (Some(stem), Some(ext)) = (
            path.file_stem().and_then(|s| s.to_str()),
            path.extension().and_then(|s| s.to_str()),
        ) else {
            continue;
        };
        if !IMAGE_EXTENSIONS.contains(&ext.to_ascii_lowercase().as_str()) {
            continue;
        }
        let Some(digits) = stem.strip_prefix(prefix) else {
            continue;
        };
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            continue;
        }
        files.push((digits.parse::<usize>().expect("digits"), path));
    }
    if files.is_empty() {
        return Err(Error::NoFrames(dir.to_path_buf()));
    }
    files.sort();
    for pair in files.windows(2) {
        let (a, pa) = &pair[0];
        let (b, _) = &pair[1];
        if *b == *a {
            return Err(Error::Config(format!(
                "duplicate frame number {a} in {}",
                dir.display()
            )));
        }
        if *b != a + 1 {
            let ext = pa.extension().and_then(|e| e.to_str()).unwrap_or("png");
            return Err(Error::MissingFrame(dir.join(format!("{prefix}{:06}.{ext}", a + 1))));
        }
    }
    Ok(files)
}

/// Reads an image as grayscale `f64`. Colour images are reduced with the
/// given luma weights.
pub fn read_frame(path: &Path, luma: [f64; 3]) -> Result<Frame> {
    let img = image::open(path).map_err(|e| Error::image(path, e))?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    match img {
        DynamicImage::ImageLuma8(g) => Frame::from_gray8(w, h, g.as_raw()),
        other if !other.color().has_color() => Frame::from_gray8(w, h, other.to_luma8().as_raw()),
        other => Frame::from_rgb8(w, h, other.to_rgb8().as_raw(), luma),
    }
}

pub fn read_label_image(path: &Path) -> Result<LabelImage> {
    let img = image::open(path).map_err(|e| Error::image(path, e))?.to_luma8();
    LabelImage::new(img.width() as usize, img.height() as usize, img.into_raw())
}

pub fn write_gray_png(path: &Path, width: usize, height: usize, pixels: Vec<u8>) -> Result<()> {
    let img = GrayImage::from_raw(width as u32, height as u32, pixels).ok_or_else(|| Error::len(width * height, 0))?;
    img.save_with_format(path, image::ImageFormat::Png)
        .map_err(|e| Error::image(path, e))
}

pub fn write_mask(path: &Path, mask: &ForegroundMask) -> Result<()> {
    write_gray_png(path, mask.width(), mask.height(), mask.to_gray8())
}

pub fn read_mask(path: &Path) -> Result<ForegroundMask> {
    let img = read_label_image(path)?;
    let labels = img.data.iter().map(|&v| (v >= 128) as u8).collect();
    ForegroundMask::new(img.width, img.height, labels)
}

/// Lazily decodes a sequence's frames in order.
pub struct FrameReader {
    paths: std::vec::IntoIter<(usize, PathBuf)>,
    luma: [f64; 3],
}

impl Iterator for FrameReader {
    /// Frame number (as in the file name) and the frame.
    type Item = Result<(usize, Frame)>;

    fn next(&mut self) -> Option<Self::Item> {
        let (number, path) = self.paths.next()?;
        Some(read_frame(&path, self.luma).map(|f| (number, f)))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        self.paths.size_hint()
    }
}

/// Grayscale frames of a sequence in index order. Gaps in the numbering are
/// reported before any frame is decoded.
pub fn load_sequence(desc: &SequenceDescriptor, luma: [f64; 3]) -> Result<FrameReader> {
    Ok(FrameReader {
        paths: desc.frame_paths()?.into_iter(),
        luma,
    })
}

/// Video directories (`<root>/<category>/<video>` containing `input/`),
/// sorted, optionally restricted to the named categories.
pub fn discover_videos(root: &Path, categories: &[String]) -> Result<Vec<PathBuf>> {
    let mut videos = Vec::new();
    for cat in sorted_subdirs(root)? {
        let cat_name = cat
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        if !categories.is_empty() && !categories.contains(&cat_name) {
            continue;
        }
        for video in sorted_subdirs(&cat)? {
            if video.join("input").is_dir() {
                videos.push(video);
            }
        }
    }
    Ok(videos)
}

fn sorted_subdirs(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.is_dir() {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}
