//! Model persistence.
//!
//! Layout:
//!
//! ```text
//! b"CLARIFY\0"                    8-byte magic
//! u64 LE                          header length in bytes
//! header                          JSON: format tag, intents, vocabulary in
//!                                 feature-id order, hyperparameters, corpus
//!                                 fingerprint, parameter count
//! f64 LE × parameter count        weights, feature-major, bias row last
//! ```
//!
//! Weights are stored as raw IEEE-754 bits so a reloaded model predicts
//! bit-for-bit like the saved one.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use clarify_core::corpus::IntentId;
use clarify_core::nlu::{Hyperparams, IntentModel, ModelError};
use serde::{Deserialize, Serialize};

const MAGIC: &[u8; 8] = b"CLARIFY\0";

#[derive(Debug, thiserror::Error)]
pub enum ModelFileError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{0} is not a clarify model file")]
    BadMagic(PathBuf),
    #[error("{path}: malformed header: {source}")]
    Header {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("{path}: {source}")]
    Model { path: PathBuf, source: ModelError },
}

#[derive(Serialize, Deserialize)]
struct Header {
    format: String,
    intents: Vec<IntentId>,
    vocabulary: Vec<String>,
    hyperparams: Hyperparams,
    corpus_fingerprint: u64,
    parameters: u64,
}

pub fn write_model(model: &IntentModel, mut out: impl Write) -> io::Result<()> {
    let mut vocabulary = vec![String::new(); model.vocabulary().len()];
    for (name, &id) in model.vocabulary() {
        vocabulary[id as usize] = name.clone();
    }
    let header = Header {
        format: model.format().to_owned(),
        intents: model.intents().to_vec(),
        vocabulary,
        hyperparams: *model.hyperparams(),
        corpus_fingerprint: model.corpus_fingerprint(),
        parameters: model.params().len() as u64,
    };
    let header = serde_json::to_vec(&header)?;
    out.write_all(MAGIC)?;
    out.write_all(&(header.len() as u64).to_le_bytes())?;
    out.write_all(&header)?;
    let mut buf = Vec::with_capacity(model.params().len() * 8);
    for w in model.params() {
        buf.extend_from_slice(&w.to_le_bytes());
    }
    out.write_all(&buf)?;
    out.flush()
}

pub fn save_model(model: &IntentModel, path: impl AsRef<Path>) -> Result<(), ModelFileError> {
    let path = path.as_ref();
    let io_err = |source| ModelFileError::Io {
        path: path.to_owned(),
        source,
    };
    let file = fs::File::create(path).map_err(io_err)?;
    write_model(model, io::BufWriter::new(file)).map_err(io_err)
}

pub fn load_model(path: impl AsRef<Path>) -> Result<IntentModel, ModelFileError> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|source| ModelFileError::Io {
        path: path.to_owned(),
        source,
    })?;
    read_model(&bytes, path)
}

/// Decodes a model; `path` is only used in error messages.
pub fn read_model(mut bytes: &[u8], path: &Path) -> Result<IntentModel, ModelFileError> {
    let truncated = || ModelFileError::Io {
        path: path.to_owned(),
        source: io::Error::new(io::ErrorKind::UnexpectedEof, "truncated model file"),
    };
    let mut magic = [0u8; 8];
    bytes.read_exact(&mut magic).map_err(|_| truncated())?;
    if &magic != MAGIC {
        return Err(ModelFileError::BadMagic(path.to_owned()));
    }
    let mut len = [0u8; 8];
    bytes.read_exact(&mut len).map_err(|_| truncated())?;
    let len = u64::from_le_bytes(len) as usize;
    if bytes.len() < len {
        return Err(truncated());
    }
    let (header, rest) = bytes.split_at(len);
    let header: Header = serde_json::from_slice(header).map_err(|source| ModelFileError::Header {
        path: path.to_owned(),
        source,
    })?;
    if rest.len() as u64 != header.parameters * 8 {
        return Err(truncated());
    }
    let params = rest
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    let vocabulary = header
        .vocabulary
        .into_iter()
        .enumerate()
        .map(|(id, name)| (name, id as u32))
        .collect();
    IntentModel::from_parts(
        header.format,
        header.intents,
        vocabulary,
        params,
        header.hyperparams,
        header.corpus_fingerprint,
    )
    .map_err(|source| ModelFileError::Model {
        path: path.to_owned(),
        source,
    })
}
