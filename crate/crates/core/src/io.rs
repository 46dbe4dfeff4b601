//! CSV and binary relation files.
//!
//! Binary layout (all little-endian):
//!
//! ```text
//! magic    "HCRL"        4 bytes
//! version  u16 = 1
//! flags    u16           bit 0 = rows are deduplicated
//! arity    u32
//! rows     u64
//! values   rows * arity  u64, row-major
//! ```

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{Relation, Value};

pub const MAGIC: &[u8; 4] = b"HCRL";
pub const VERSION: u16 = 1;
const FLAG_DEDUPLICATED: u16 = 1;
const HEADER_LEN: usize = 4 + 2 + 2 + 4 + 8;

fn relation_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "relation".to_string())
}

/// Loads a headerless CSV of unsigned integers. The result is always
/// deduplicated; with `symmetrize` and arity 2 the mirrored edges are added.
pub fn load_csv(path: impl AsRef<Path>, arity: usize, symmetrize: bool) -> Result<Relation> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let rel = read_csv(BufReader::new(file), relation_name(path), arity)?;
    finish(rel, symmetrize)
}

pub(crate) fn finish(rel: Relation, symmetrize: bool) -> Result<Relation> {
    if symmetrize {
        rel.symmetrize()
    } else {
        Ok(rel.deduplicate())
    }
}

pub fn read_csv(reader: impl BufRead, name: impl Into<String>, arity: usize) -> Result<Relation> {
    let mut data: Vec<Value> = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::Parse {
            line: lineno,
            message: e.to_string(),
        })?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != arity {
            return Err(Error::Schema(format!(
                "line {lineno}: expected {arity} fields, found {}",
                fields.len()
            )));
        }
        for field in fields {
            let v = field.trim().parse::<Value>().map_err(|e| Error::Parse {
                line: lineno,
                message: format!("{field:?}: {e}"),
            })?;
            data.push(v);
        }
    }
    Relation::new(name, arity, data)
}

pub fn write_binary(rel: &Relation, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    encode_binary(rel, &mut w).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn encode_binary(rel: &Relation, w: &mut impl Write) -> std::io::Result<()> {
    let flags = if rel.is_deduplicated() {
        FLAG_DEDUPLICATED
    } else {
        0
    };
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&flags.to_le_bytes())?;
    w.write_all(&(rel.arity() as u32).to_le_bytes())?;
    w.write_all(&(rel.len() as u64).to_le_bytes())?;
    for v in rel.data() {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn load_binary(path: impl AsRef<Path>) -> Result<Relation> {
    let path = path.as_ref();
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    decode_binary(&bytes, relation_name(path))
}

pub fn decode_binary(bytes: &[u8], name: impl Into<String>) -> Result<Relation> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::Format(format!(
            "truncated header: {} bytes, need {HEADER_LEN}",
            bytes.len()
        )));
    }
    if &bytes[0..4] != MAGIC {
        return Err(Error::Format("bad magic, expected \"HCRL\"".into()));
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let flags = u16::from_le_bytes([bytes[6], bytes[7]]);
    let arity = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let rows = u64::from_le_bytes(bytes[12..20].try_into().unwrap());
    if arity == 0 {
        return Err(Error::Format("arity 0".into()));
    }
    let expected = rows
        .checked_mul(arity as u64)
        .and_then(|n| n.checked_mul(8))
        .ok_or_else(|| Error::Format("row count overflows".into()))?;
    let payload = &bytes[HEADER_LEN..];
    if payload.len() as u64 != expected {
        return Err(Error::Format(format!(
            "payload is {} bytes, header promises {expected}",
            payload.len()
        )));
    }
    let data = payload
        .chunks_exact(8)
        .map(|c| Value::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(Relation::new(name, arity, data)?.with_flag(flags & FLAG_DEDUPLICATED != 0))
}

/// CSV → binary conversion.
pub fn convert(
    csv: impl AsRef<Path>,
    arity: usize,
    out: impl AsRef<Path>,
    symmetrize: bool,
) -> Result<Relation> {
    let rel = load_csv(csv, arity, symmetrize)?;
    write_binary(&rel, out)?;
    Ok(rel)
}

/// Loads a relation by extension: `.csv` goes through the CSV reader with the
/// given arity, everything else is read as binary.
pub fn load_any(path: impl AsRef<Path>, arity: usize, symmetrize: bool) -> Result<Relation> {
    let path = path.as_ref();
    let is_csv = path
        .extension()
        .map(|e| e.eq_ignore_ascii_case("csv"))
        .unwrap_or(false);
    if is_csv {
        return load_csv(path, arity, symmetrize);
    }
    let rel = load_binary(path)?;
    if rel.arity() != arity {
        return Err(Error::Schema(format!(
            "{}: stored arity {} but the query uses arity {arity}",
            path.display(),
            rel.arity()
        )));
    }
    if symmetrize {
        rel.symmetrize()
    } else if rel.is_deduplicated() {
        Ok(rel)
    } else {
        Ok(rel.deduplicate())
    }
}
