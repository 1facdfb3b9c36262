//! IDX binary files: big-endian magic, big-endian `u32` dimensions, raw bytes.

use std::fs;
use std::path::Path;

use super::Dataset;
use crate::error::{Error, Result};
use crate::numerics::Matrix;

pub const IMAGE_MAGIC: u32 = 0x0000_0803;
pub const LABEL_MAGIC: u32 = 0x0000_0801;

/// Raw image tensor as stored on disk.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdxImages {
    pub count: usize,
    pub rows: usize,
    pub cols: usize,
    /// `count * rows * cols` bytes, image by image, row-major.
    pub pixels: Vec<u8>,
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))
}

fn be_u32(bytes: &[u8], offset: usize, path: &Path) -> Result<u32> {
    let chunk = bytes.get(offset..offset + 4).ok_or_else(|| Error::Truncated {
        path: path.to_path_buf(),
        expected: offset + 4,
        actual: bytes.len(),
    })?;
    Ok(u32::from_be_bytes(chunk.try_into().unwrap()))
}

fn check_length(bytes: &[u8], expected: usize, path: &Path) -> Result<()> {
    if bytes.len() < expected {
        return Err(Error::Truncated {
            path: path.to_path_buf(),
            expected,
            actual: bytes.len(),
        });
    }
    if bytes.len() > expected {
        return Err(Error::Data(format!(
            "{}: {} trailing bytes after the declared payload",
            path.display(),
            bytes.len() - expected
        )));
    }
    Ok(())
}

pub fn parse_idx_images(bytes: &[u8], path: &Path) -> Result<IdxImages> {
    let magic = be_u32(bytes, 0, path)?;
    if magic != IMAGE_MAGIC {
        return Err(Error::BadMagic {
            path: path.to_path_buf(),
            expected: IMAGE_MAGIC,
            found: magic,
        });
    }
    let count = be_u32(bytes, 4, path)? as usize;
    let rows = be_u32(bytes, 8, path)? as usize;
    let cols = be_u32(bytes, 12, path)? as usize;
    let payload = count * rows * cols;
    check_length(bytes, 16 + payload, path)?;
    Ok(IdxImages {
        count,
        rows,
        cols,
        pixels: bytes[16..].to_vec(),
    })
}

pub fn parse_idx_labels(bytes: &[u8], path: &Path) -> Result<Vec<u8>> {
    let magic = be_u32(bytes, 0, path)?;
    if magic != LABEL_MAGIC {
        return Err(Error::BadMagic {
            path: path.to_path_buf(),
            expected: LABEL_MAGIC,
            found: magic,
        });
    }
    let count = be_u32(bytes, 4, path)? as usize;
    check_length(bytes, 8 + count, path)?;
    Ok(bytes[8..].to_vec())
}

pub fn read_idx_images(path: impl AsRef<Path>) -> Result<IdxImages> {
    let path = path.as_ref();
    parse_idx_images(&read_file(path)?, path)
}

pub fn read_idx_labels(path: impl AsRef<Path>) -> Result<Vec<u8>> {
    let path = path.as_ref();
    parse_idx_labels(&read_file(path)?, path)
}

pub fn encode_idx_images(images: &IdxImages) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + images.pixels.len());
    out.extend_from_slice(&IMAGE_MAGIC.to_be_bytes());
    for d in [images.count, images.rows, images.cols] {
        out.extend_from_slice(&(d as u32).to_be_bytes());
    }
    out.extend_from_slice(&images.pixels);
    out
}

pub fn encode_idx_labels(labels: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&LABEL_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    out
}

pub fn write_idx_images(path: impl AsRef<Path>, images: &IdxImages) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_idx_images(images)).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

pub fn write_idx_labels(path: impl AsRef<Path>, labels: &[u8]) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_idx_labels(labels)).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

/// Loads an image/label file pair.
///
/// Pixels are divided by 255 and each image is flattened row-major. Label
/// byte values are mapped to classes in ascending numeric order and keep
/// their decimal value as class name, so MNIST digit `d` is class `d`.
pub fn load_idx(image_path: impl AsRef<Path>, label_path: impl AsRef<Path>) -> Result<Dataset> {
    let images = read_idx_images(image_path)?;
    let raw_labels = read_idx_labels(label_path)?;
    dataset_from_idx(&images, &raw_labels)
}

pub fn dataset_from_idx(images: &IdxImages, raw_labels: &[u8]) -> Result<Dataset> {
    if images.count != raw_labels.len() {
        return Err(Error::CountMismatch {
            images: images.count,
            labels: raw_labels.len(),
        });
    }
    let n = images.rows * images.cols;
    let x = Matrix::new(
        images.count,
        n,
        images.pixels.iter().map(|&p| f64::from(p) / 255.0).collect(),
    )?;
    let mut present = [false; 256];
    for &l in raw_labels {
        present[l as usize] = true;
    }
    let values: Vec<u8> = (0..=255u8).filter(|&v| present[v as usize]).collect();
    let mut class_of = [0usize; 256];
    for (j, &v) in values.iter().enumerate() {
        class_of[v as usize] = j;
    }
    let labels = raw_labels.iter().map(|&l| class_of[l as usize]).collect();
    let names = values.iter().map(|v| v.to_string()).collect();
    Dataset::with_class_names(x, labels, names)
}
