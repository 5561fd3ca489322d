//! IDX container files (the MNIST distribution format).
//!
//! Layout is big-endian: a 4-byte magic (`0x00000803` for 3-d unsigned-byte image
//! arrays, `0x00000801` for 1-d label arrays), one `u32` per dimension, then the raw
//! bytes in row-major order.

use std::io::{Cursor, Read, Write};
use std::path::Path;

use byteorder::{BigEndian, ReadBytesExt, WriteBytesExt};
use ndarray::{Array2, Axis};

use super::{LabeledDataset, SplitRole, Target};
use crate::{Error, Result};

pub const IMAGES_MAGIC: u32 = 0x0000_0803;
pub const LABELS_MAGIC: u32 = 0x0000_0801;

#[derive(Debug, Clone, PartialEq)]
pub struct IdxImages {
    pub rows: usize,
    pub cols: usize,
    /// One image per row, pixel values scaled to `[0, 1]`.
    pub pixels: Array2<f64>,
}

fn read_u32(cur: &mut Cursor<&[u8]>, what: &str) -> Result<u32> {
    let offset = cur.position();
    cur.read_u32::<BigEndian>().map_err(|_| Error::Format {
        offset,
        message: format!("truncated header while reading {what}"),
    })
}

fn read_payload<'a>(cur: &mut Cursor<&'a [u8]>, len: usize) -> Result<&'a [u8]> {
    let start = cur.position() as usize;
    let bytes = *cur.get_ref();
    if bytes.len() - start < len {
        return Err(Error::Format {
            offset: bytes.len() as u64,
            message: format!("expected {len} payload bytes starting at {start}, file ends early"),
        });
    }
    Ok(&bytes[start..start + len])
}

fn check_magic(cur: &mut Cursor<&[u8]>, expected: u32) -> Result<()> {
    let magic = read_u32(cur, "magic number")?;
    if magic != expected {
        return Err(Error::Format {
            offset: 0,
            message: format!("bad magic number {magic:#010x}, expected {expected:#010x}"),
        });
    }
    Ok(())
}

pub fn parse_idx_images(bytes: &[u8]) -> Result<IdxImages> {
    let mut cur = Cursor::new(bytes);
    check_magic(&mut cur, IMAGES_MAGIC)?;
    let count = read_u32(&mut cur, "image count")? as usize;
    let rows = read_u32(&mut cur, "row count")? as usize;
    let cols = read_u32(&mut cur, "column count")? as usize;
    let payload = read_payload(&mut cur, count * rows * cols)?;
    let pixels = Array2::from_shape_vec(
        (count, rows * cols),
        payload.iter().map(|&b| f64::from(b) / 255.0).collect(),
    )
    .expect("payload length checked");
    Ok(IdxImages { rows, cols, pixels })
}

pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<u8>> {
    let mut cur = Cursor::new(bytes);
    check_magic(&mut cur, LABELS_MAGIC)?;
    let count = read_u32(&mut cur, "label count")? as usize;
    Ok(read_payload(&mut cur, count)?.to_vec())
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    Ok(bytes)
}

pub fn read_idx_images(path: impl AsRef<Path>) -> Result<IdxImages> {
    parse_idx_images(&read_file(path.as_ref())?)
}

pub fn read_idx_labels(path: impl AsRef<Path>) -> Result<Vec<u8>> {
    parse_idx_labels(&read_file(path.as_ref())?)
}

/// Writes `pixels` (values in `[0, 1]`) as an unsigned-byte image file.
pub fn write_idx_images<W: Write>(mut w: W, rows: usize, cols: usize, pixels: &Array2<f64>) -> Result<()> {
    if pixels.ncols() != rows * cols {
        return Err(Error::shape("idx image width", rows * cols, pixels.ncols()));
    }
    w.write_u32::<BigEndian>(IMAGES_MAGIC)?;
    w.write_u32::<BigEndian>(pixels.nrows() as u32)?;
    w.write_u32::<BigEndian>(rows as u32)?;
    w.write_u32::<BigEndian>(cols as u32)?;
    let bytes: Vec<u8> = pixels
        .iter()
        .map(|&v| (v.clamp(0.0, 1.0) * 255.0).round() as u8)
        .collect();
    w.write_all(&bytes)?;
    Ok(())
}

pub fn write_idx_labels<W: Write>(mut w: W, labels: &[u8]) -> Result<()> {
    w.write_u32::<BigEndian>(LABELS_MAGIC)?;
    w.write_u32::<BigEndian>(labels.len() as u32)?;
    w.write_all(labels)?;
    Ok(())
}

/// Reads an image/label file pair into a 10-class dataset.
pub fn load_idx(images: impl AsRef<Path>, labels: impl AsRef<Path>) -> Result<LabeledDataset> {
    let images = read_idx_images(images)?;
    let labels = read_idx_labels(labels)?;
    if labels.len() != images.pixels.nrows() {
        return Err(Error::shape("idx label count", images.pixels.nrows(), labels.len()));
    }
    let n_classes = labels.iter().copied().max().map_or(1, |m| m as usize + 1).max(10);
    LabeledDataset::new(
        images.pixels,
        Target::Classes {
            labels: labels.into_iter().map(usize::from).collect(),
            n_classes,
        },
    )
}

/// Number of leading training images held out for validation.
pub const MNIST_VALIDATION_IMAGES: usize = 5000;

/// Binary task on two digits using the official partition: test rows come from the
/// test files, and training images among the first 5,000 of the training file form
/// the validation split. Labels become 0 for `digits.0` and 1 for `digits.1`.
pub fn mnist_digits(
    train: (&IdxImages, &[u8]),
    test: (&IdxImages, &[u8]),
    digits: (u8, u8),
) -> Result<LabeledDataset> {
    if train.0.pixels.ncols() != test.0.pixels.ncols() {
        return Err(Error::shape("idx image width", train.0.pixels.ncols(), test.0.pixels.ncols()));
    }
    let mut rows_x = Vec::new();
    let mut labels = Vec::new();
    let mut roles = Vec::new();
    for (is_test, (images, image_labels)) in [(false, train), (true, test)] {
        if images.pixels.nrows() != image_labels.len() {
            return Err(Error::shape("idx label count", images.pixels.nrows(), image_labels.len()));
        }
        for (i, &label) in image_labels.iter().enumerate() {
            let class = if label == digits.0 {
                0
            } else if label == digits.1 {
                1
            } else {
                continue;
            };
            rows_x.push((is_test, i));
            labels.push(class);
            roles.push(if is_test {
                SplitRole::Test
            } else if i < MNIST_VALIDATION_IMAGES {
                SplitRole::Validation
            } else {
                SplitRole::Train
            });
        }
    }
    let train_idx: Vec<usize> = rows_x.iter().filter(|r| !r.0).map(|r| r.1).collect();
    let test_idx: Vec<usize> = rows_x.iter().filter(|r| r.0).map(|r| r.1).collect();
    let x = ndarray::concatenate(
        Axis(0),
        &[
            train.0.pixels.select(Axis(0), &train_idx).view(),
            test.0.pixels.select(Axis(0), &test_idx).view(),
        ],
    )
    .expect("equal widths");
    let mut d = LabeledDataset::new(x, Target::Classes { labels, n_classes: 2 })?;
    d.split = Some(roles);
    Ok(d)
}
