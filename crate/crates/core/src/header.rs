//! One-line JSON header followed by a raw little-endian payload.
//!
//! Shared by the WH3D, WHMSK and WHPS formats.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};

/// Split a file into its parsed header record and the raw payload bytes.
pub(crate) fn read<H: DeserializeOwned>(path: &Path) -> Result<(H, Vec<u8>)> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let nl = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::Header("missing header line terminator".into()))?;
    let line = std::str::from_utf8(&bytes[..nl])
        .map_err(|_| Error::Header("header is not valid UTF-8".into()))?;
    let header = serde_json::from_str(line).map_err(|e| Error::Header(e.to_string()))?;
    Ok((header, bytes[nl + 1..].to_vec()))
}

/// Write header + payload through a sibling temp file and rename into place,
/// so a failed write never leaves a partial file at `path`.
pub(crate) fn write<H: Serialize>(path: &Path, header: &H, payload: &[u8]) -> Result<()> {
    let mut line = serde_json::to_vec(header).map_err(|e| Error::Header(e.to_string()))?;
    line.push(b'\n');
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::InvalidInput(format!("{} is not a file path", path.display())))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(file_name);
    tmp_name.push(".partial");
    let tmp = path.with_file_name(tmp_name);

    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(&line)?;
        f.write_all(payload)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(Error::io(path, e));
    }
    Ok(())
}

pub(crate) fn f64s_to_le(values: &[f64], out: &mut Vec<u8>) {
    out.reserve(values.len() * 8);
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

pub(crate) fn le_to_f64s(bytes: &[u8]) -> Vec<f64> {
    bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect()
}

pub(crate) fn check_payload(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::PayloadLength { expected, found });
    }
    Ok(())
}

pub(crate) fn check_format(found: &str, want: &str, version: u32) -> Result<()> {
    if found != want {
        return Err(Error::Header(format!("format is {found:?}, expected {want:?}")));
    }
    if version != 1 {
        return Err(Error::Header(format!("unsupported {want} version {version}")));
    }
    Ok(())
}
