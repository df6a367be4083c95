//! Reader for the IDX binary format used by the classic handwritten-digit
//! image sets.
//!
//! Layout of an image file:
//!
//! ```text
//! [offset 0]  u32 big-endian magic  = 2051
//! [offset 4]  u32 big-endian count
//! [offset 8]  u32 big-endian rows
//! [offset 12] u32 big-endian cols
//! [offset 16] count*rows*cols unsigned bytes, one pixel each, row-major
//! ```
//!
//! A label file has magic 2049, a single u32 count, then `count` bytes of
//! labels. Pixels are scaled to `[0, 1]` by dividing by 255.

use super::{DataError, Dataset};
use std::path::Path;

const IMAGE_MAGIC: u32 = 2051;
const LABEL_MAGIC: u32 = 2049;

/// Load a paired IDX image/label file set into a [`Dataset`].
///
/// Each image becomes one flattened feature vector of `rows * cols` values in
/// `[0, 1]`. Wrong magic numbers, truncated payloads, and image/label count
/// mismatches are reported as distinct errors naming the offending file.
pub fn load_idx(images_path: &Path, labels_path: &Path) -> Result<Dataset, DataError> {
    let images_raw = read_file(images_path)?;
    let labels_raw = read_file(labels_path)?;

    let (img_dims, pixels) = parse_header(&images_raw, images_path, IMAGE_MAGIC, 3)?;
    let (lbl_dims, label_bytes) = parse_header(&labels_raw, labels_path, LABEL_MAGIC, 1)?;

    let (count, rows, cols) = (img_dims[0], img_dims[1], img_dims[2]);
    check_payload(pixels, count * rows * cols, images_path, &images_raw)?;
    check_payload(label_bytes, lbl_dims[0], labels_path, &labels_raw)?;

    if count != lbl_dims[0] {
        return Err(DataError::CountMismatch {
            images: count,
            labels: lbl_dims[0],
        });
    }

    let features: Vec<f64> = pixels[..count * rows * cols]
        .iter()
        .map(|&px| px as f64 / 255.0)
        .collect();
    let labels: Vec<usize> = label_bytes[..count].iter().map(|&b| b as usize).collect();
    let classes = labels.iter().max().map_or(0, |&m| m + 1);
    Dataset::new(features, labels, classes, rows * cols)
}

fn read_file(path: &Path) -> Result<Vec<u8>, DataError> {
    std::fs::read(path).map_err(|source| DataError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Parse the magic number and `n_dims` big-endian u32 dimensions; return the
/// dimensions and the remaining payload slice.
fn parse_header<'a>(
    raw: &'a [u8],
    path: &Path,
    expected_magic: u32,
    n_dims: usize,
) -> Result<(Vec<usize>, &'a [u8]), DataError> {
    let header_len = 4 * (1 + n_dims);
    if raw.len() < 4 {
        return Err(DataError::Truncated {
            path: path.display().to_string(),
            needed: header_len,
            found: raw.len(),
        });
    }
    let magic = u32::from_be_bytes(raw[0..4].try_into().unwrap());
    if magic != expected_magic {
        return Err(DataError::BadMagic {
            path: path.display().to_string(),
            expected: expected_magic,
            found: magic,
        });
    }
    if raw.len() < header_len {
        return Err(DataError::Truncated {
            path: path.display().to_string(),
            needed: header_len,
            found: raw.len(),
        });
    }
    let dims = (0..n_dims)
        .map(|d| {
            let at = 4 * (1 + d);
            u32::from_be_bytes(raw[at..at + 4].try_into().unwrap()) as usize
        })
        .collect();
    Ok((dims, &raw[header_len..]))
}

fn check_payload(payload: &[u8], needed: usize, path: &Path, raw: &[u8]) -> Result<(), DataError> {
    if payload.len() < needed {
        return Err(DataError::Truncated {
            path: path.display().to_string(),
            needed: needed + (raw.len() - payload.len()),
            found: raw.len(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    /// Build an in-memory IDX pair: 4 images of 2x2, labels 0,1,0,1.
    fn write_pair(
        dir: &Path,
        image_magic: u32,
        truncate_pixels: usize,
    ) -> (std::path::PathBuf, std::path::PathBuf) {
        let img = dir.join("images.idx");
        let lbl = dir.join("labels.idx");
        let mut bytes = Vec::new();
        bytes.extend_from_slice(&image_magic.to_be_bytes());
        bytes.extend_from_slice(&4u32.to_be_bytes());
        bytes.extend_from_slice(&2u32.to_be_bytes());
        bytes.extend_from_slice(&2u32.to_be_bytes());
        let pixels: Vec<u8> = (0..16).map(|i| (i * 17) as u8).collect();
        bytes.extend_from_slice(&pixels[..16 - truncate_pixels]);
        std::fs::File::create(&img)
            .unwrap()
            .write_all(&bytes)
            .unwrap();

        let mut bytes = Vec::new();
        bytes.extend_from_slice(&2049u32.to_be_bytes());
        bytes.extend_from_slice(&4u32.to_be_bytes());
        bytes.extend_from_slice(&[0, 1, 0, 1]);
        std::fs::File::create(&lbl)
            .unwrap()
            .write_all(&bytes)
            .unwrap();
        (img, lbl)
    }

    #[test]
    fn round_trips_a_valid_pair() {
        let dir = tempfile::tempdir().unwrap();
        let (img, lbl) = write_pair(dir.path(), 2051, 0);
        let data = load_idx(&img, &lbl).unwrap();
        assert_eq!(data.len(), 4);
        assert_eq!(data.feature_dim(), 4);
        assert_eq!(data.classes(), 2);
        assert_eq!(data.labels(), &[0, 1, 0, 1]);
        // Pixel 1 of image 0 is 17 -> 17/255.
        assert!((data.feature(0)[1] - 17.0 / 255.0).abs() < 1e-15);
        assert_eq!(data.feature(0)[0], 0.0);
        assert_eq!(data.feature(3)[3], 1.0); // 255/255
    }

    #[test]
    fn rejects_wrong_magic() {
        let dir = tempfile::tempdir().unwrap();
        let (img, lbl) = write_pair(dir.path(), 2051 + 1, 0);
        match load_idx(&img, &lbl).unwrap_err() {
            DataError::BadMagic {
                expected, found, ..
            } => {
                assert_eq!(expected, 2051);
                assert_eq!(found, 2052);
            }
            other => panic!("expected BadMagic, got {other:?}"),
        }
    }

    #[test]
    fn rejects_truncated_payload() {
        let dir = tempfile::tempdir().unwrap();
        let (img, lbl) = write_pair(dir.path(), 2051, 3);
        match load_idx(&img, &lbl).unwrap_err() {
            DataError::Truncated { path, .. } => assert!(path.contains("images.idx")),
            other => panic!("expected Truncated, got {other:?}"),
        }
    }

    #[test]
    fn rejects_count_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let (img, _) = write_pair(dir.path(), 2051, 0);
        // Label file advertising 3 labels.
        let lbl = dir.path().join("short_labels.idx");
        let mut bytes = Vec::new();
        bytes.extend_from_slice(&2049u32.to_be_bytes());
        bytes.extend_from_slice(&3u32.to_be_bytes());
        bytes.extend_from_slice(&[0, 1, 0]);
        std::fs::File::create(&lbl)
            .unwrap()
            .write_all(&bytes)
            .unwrap();
        match load_idx(&img, &lbl).unwrap_err() {
            DataError::CountMismatch { images, labels } => {
                assert_eq!(images, 4);
                assert_eq!(labels, 3);
            }
            other => panic!("expected CountMismatch, got {other:?}"),
        }
    }

    #[test]
    fn missing_file_is_an_io_error() {
        let dir = tempfile::tempdir().unwrap();
        let (img, _) = write_pair(dir.path(), 2051, 0);
        let err = load_idx(&img, &dir.path().join("nope.idx")).unwrap_err();
        assert!(matches!(err, DataError::Io { .. }));
    }
}
