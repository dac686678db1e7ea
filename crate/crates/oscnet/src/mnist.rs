//! MNIST loading. Pixels are scaled by 1/255 here and nowhere else.

use std::path::{Path, PathBuf};

use oscnet_core::data::LabeledDataset;
use oscnet_core::Matrix;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::idx::{read_idx, IdxFile, IMAGES_MAGIC, LABELS_MAGIC};

pub const DATA_DIR_ENV: &str = "OSCNET_DATA_DIR";

pub fn dataset_from_idx(images: &IdxFile, labels: &IdxFile) -> Result<LabeledDataset> {
    if images.magic != IMAGES_MAGIC {
        return Err(Error::BadMagic { found: images.magic });
    }
    if labels.magic != LABELS_MAGIC {
        return Err(Error::BadMagic { found: labels.magic });
    }
    if images.count() != labels.count() {
        return Err(Error::CountMismatch { images: images.count(), labels: labels.count() });
    }
    let data = images.payload.iter().map(|&b| f64::from(b) / 255.0).collect();
    let features = Matrix::from_vec(images.count(), images.item_len(), data)?;
    let y: Vec<usize> = labels.payload.iter().map(|&l| usize::from(l)).collect();
    let n_classes = y.iter().max().map_or(0, |m| m + 1).max(10);
    Ok(LabeledDataset::new(features, Some(y), n_classes)?)
}

pub fn load_mnist(images_path: &Path, labels_path: &Path) -> Result<LabeledDataset> {
    dataset_from_idx(&read_idx(images_path)?, &read_idx(labels_path)?)
}

/// `OSCNET_DATA_DIR`, else the vendored subset.
pub fn default_data_dir() -> PathBuf {
    if let Some(d) = std::env::var_os(DATA_DIR_ENV) {
        return PathBuf::from(d);
    }
    let local = PathBuf::from("data/mnist-subset");
    if local.is_dir() {
        return local;
    }
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/mnist-subset")
}

/// `stem` or `stem.gz` inside `dir`.
pub fn find(dir: &Path, stem: &str) -> Result<PathBuf> {
    [dir.join(stem), dir.join(format!("{stem}.gz"))]
        .into_iter()
        .find(|p| p.is_file())
        .ok_or_else(|| Error::io(dir.join(stem), std::io::ErrorKind::NotFound.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Test,
}

impl Split {
    fn stems(self) -> (&'static str, &'static str) {
        match self {
            Split::Train => ("train-images-idx3-ubyte", "train-labels-idx1-ubyte"),
            Split::Test => ("t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte"),
        }
    }
}

pub fn split_paths(dir: &Path, split: Split) -> Result<(PathBuf, PathBuf)> {
    let (i, l) = split.stems();
    Ok((find(dir, i)?, find(dir, l)?))
}

pub fn load_split(dir: &Path, split: Split) -> Result<LabeledDataset> {
    let (i, l) = split_paths(dir, split)?;
    load_mnist(&i, &l)
}

/// SHA-256 over the files as stored on disk, in order.
pub fn sha256_files(paths: &[PathBuf]) -> Result<String> {
    let mut h = Sha256::new();
    for p in paths {
        h.update(std::fs::read(p).map_err(|e| Error::io(p, e))?);
    }
    Ok(format!("{:x}", h.finalize()))
}
