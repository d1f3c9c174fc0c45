//! Instance file format.
//!
//! A single JSON document:
//!
//! ```text
//! {
//!   "format": "sparsebench-instance/1",
//!   "header": { "m": 5, "n": 8, "seed": 3, "noise_std": 0.1, "has_truth": true },
//!   "byte_order": "little-endian",
//!   "a": "<base64>",       m·n f64, row-major
//!   "y": "<base64>",       m f64
//!   "x_true": "<base64>"   n f64, present iff has_truth
//! }
//! ```
//!
//! Payloads are IEEE-754 binary64 values in little-endian byte order, encoded
//! with standard base64 (with padding). Values round-trip bit-exactly.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use serde::{Deserialize, Serialize};

use super::ProblemInstance;
use crate::linalg::DenseMatrix;
use crate::{Error, Result};

pub const INSTANCE_FORMAT: &str = "sparsebench-instance/1";
const BYTE_ORDER: &str = "little-endian";

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    m: usize,
    n: usize,
    seed: u64,
    noise_std: f64,
    has_truth: bool,
}

#[derive(Debug, Serialize, Deserialize)]
struct InstanceFile {
    format: String,
    header: Header,
    byte_order: String,
    a: String,
    y: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    x_true: Option<String>,
}

fn encode(values: &[f64]) -> String {
    let bytes: Vec<u8> = values.iter().flat_map(|v| v.to_le_bytes()).collect();
    STANDARD.encode(bytes)
}

fn decode(field: &'static str, text: &str, expected: usize) -> Result<Vec<f64>> {
    let bytes = STANDARD
        .decode(text)
        .map_err(|e| Error::MalformedFile(format!("field '{field}': {e}")))?;
    if bytes.len() % 8 != 0 {
        return Err(Error::MalformedFile(format!(
            "field '{field}': {} bytes is not a whole number of f64 values",
            bytes.len()
        )));
    }
    let values: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    if values.len() != expected {
        return Err(Error::DimensionMismatch {
            context: field,
            expected,
            found: values.len(),
        });
    }
    Ok(values)
}

pub fn write_instance<W: Write>(instance: &ProblemInstance, mut writer: W) -> Result<()> {
    let file = InstanceFile {
        format: INSTANCE_FORMAT.to_string(),
        header: Header {
            m: instance.m(),
            n: instance.n(),
            seed: instance.seed(),
            noise_std: instance.noise_std(),
            has_truth: instance.x_true().is_some(),
        },
        byte_order: BYTE_ORDER.to_string(),
        a: encode(instance.a().as_slice()),
        y: encode(instance.y()),
        x_true: instance.x_true().map(encode),
    };
    serde_json::to_writer_pretty(&mut writer, &file)?;
    writer.write_all(b"\n")?;
    Ok(())
}

pub fn read_instance<R: Read>(mut reader: R) -> Result<ProblemInstance> {
    let mut text = String::new();
    reader.read_to_string(&mut text)?;
    if text.trim().is_empty() {
        return Err(Error::MalformedFile("file is empty".into()));
    }
    let file: InstanceFile =
        serde_json::from_str(&text).map_err(|e| Error::MalformedFile(e.to_string()))?;
    if file.format != INSTANCE_FORMAT {
        return Err(Error::MalformedFile(format!(
            "unsupported format '{}' (expected '{INSTANCE_FORMAT}')",
            file.format
        )));
    }
    if file.byte_order != BYTE_ORDER {
        return Err(Error::MalformedFile(format!(
            "unsupported byte order '{}'",
            file.byte_order
        )));
    }
    let Header {
        m,
        n,
        seed,
        noise_std,
        has_truth,
    } = file.header;
    if m == 0 || n == 0 {
        return Err(Error::MalformedFile(format!(
            "header dimensions must be positive, got m={m} n={n}"
        )));
    }
    let a = decode("a", &file.a, m * n)?;
    let y = decode("y", &file.y, m)?;
    let x_true = match (has_truth, file.x_true) {
        (true, Some(text)) => Some(decode("x_true", &text, n)?),
        (false, None) => None,
        (true, None) => {
            return Err(Error::MalformedFile(
                "header has_truth=true but x_true is missing".into(),
            ))
        }
        (false, Some(_)) => {
            return Err(Error::MalformedFile(
                "header has_truth=false but x_true is present".into(),
            ))
        }
    };
    let a = DenseMatrix::from_row_major(m, n, a)?;
    ProblemInstance::new(a, y, x_true, seed, noise_std)
}

pub fn save_instance(instance: &ProblemInstance, path: impl AsRef<Path>) -> Result<()> {
    let file = fs::File::create(path)?;
    write_instance(instance, std::io::BufWriter::new(file))
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<ProblemInstance> {
    read_instance(std::io::BufReader::new(fs::File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{generate_instance, GenerateParams};

    fn to_bytes(inst: &ProblemInstance) -> Vec<u8> {
        let mut buf = Vec::new();
        write_instance(inst, &mut buf).unwrap();
        buf
    }

    #[test]
    fn round_trip_is_identity() {
        let inst = generate_instance(&GenerateParams::new(5, 8, 3, 0.1, 9)).unwrap();
        let back = read_instance(&to_bytes(&inst)[..]).unwrap();
        assert_eq!(back, inst);
        assert_eq!(back.true_support(), inst.true_support());

        let no_truth =
            ProblemInstance::new(inst.a().clone(), inst.y().to_vec(), None, 1, 0.0).unwrap();
        assert_eq!(read_instance(&to_bytes(&no_truth)[..]).unwrap(), no_truth);
    }

    #[test]
    fn header_rows_disagree_with_payload() {
        let inst = generate_instance(&GenerateParams::new(4, 8, 3, 0.0, 9)).unwrap();
        let mut doc: serde_json::Value = serde_json::from_slice(&to_bytes(&inst)).unwrap();
        doc["header"]["m"] = 5.into();
        let err = read_instance(doc.to_string().as_bytes()).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { context: "a", expected: 40, found: 32 }));
    }

    #[test]
    fn empty_and_garbage_files_are_malformed() {
        assert!(matches!(read_instance(&b""[..]), Err(Error::MalformedFile(_))));
        assert!(matches!(read_instance(&b"  \n"[..]), Err(Error::MalformedFile(_))));
        assert!(matches!(read_instance(&b"{\"m\": 3}"[..]), Err(Error::MalformedFile(_))));
    }

    #[test]
    fn payload_is_little_endian_f64() {
        let a = DenseMatrix::from_row_major(1, 1, vec![1.0]).unwrap();
        let inst = ProblemInstance::new(a, vec![-2.5], None, 0, 0.0).unwrap();
        let doc: serde_json::Value = serde_json::from_slice(&to_bytes(&inst)).unwrap();
        let bytes = STANDARD.decode(doc["y"].as_str().unwrap()).unwrap();
        assert_eq!(bytes, (-2.5f64).to_le_bytes());
        assert_eq!(doc["format"], INSTANCE_FORMAT);
    }
}
