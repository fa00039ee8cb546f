//! Versioned on-disk container shared by dataset bundles and checkpoints.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! offset  size  field
//! 0       8     magic (e.g. b"ATISEBND")
//! 8       4     format version (u32)
//! 12      8     payload length n (u64)
//! 20      n     payload
//! 20+n    32    SHA-256 of bytes [0, 20+n)
//! ```
//!
//! Files are written to a sibling temporary path and renamed into place, so a
//! failed write never leaves a partial file at the destination.

use std::fs;
use std::io::Write;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

const HEADER_LEN: usize = 20;
const DIGEST_LEN: usize = 32;

pub(crate) struct Kind {
    pub name: &'static str,
    pub magic: [u8; 8],
    pub version: u32,
}

pub(crate) fn encode(kind: &Kind, payload: &[u8]) -> Vec<u8> {
    let mut buf = Vec::with_capacity(HEADER_LEN + payload.len() + DIGEST_LEN);
    buf.extend_from_slice(&kind.magic);
    buf.extend_from_slice(&kind.version.to_le_bytes());
    buf.extend_from_slice(&(payload.len() as u64).to_le_bytes());
    buf.extend_from_slice(payload);
    let digest = Sha256::digest(&buf);
    buf.extend_from_slice(&digest);
    buf
}

pub(crate) fn decode<'a>(kind: &Kind, bytes: &'a [u8]) -> Result<&'a [u8]> {
    let corrupt = |message: &str| Error::Corrupt {
        kind: kind.name,
        message: message.to_owned(),
    };
    if bytes.len() < HEADER_LEN + DIGEST_LEN {
        return Err(corrupt("file too short"));
    }
    if bytes[..8] != kind.magic {
        return Err(corrupt("bad magic"));
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
    if version != kind.version {
        return Err(Error::Version {
            kind: kind.name,
            found: version,
            expected: kind.version,
        });
    }
    let len = u64::from_le_bytes(bytes[12..20].try_into().unwrap());
    let expected_total = (HEADER_LEN as u64)
        .checked_add(len)
        .and_then(|n| n.checked_add(DIGEST_LEN as u64));
    if expected_total != Some(bytes.len() as u64) {
        return Err(corrupt("length does not match header (truncated?)"));
    }
    let body_end = HEADER_LEN + len as usize;
    let digest = Sha256::digest(&bytes[..body_end]);
    if digest.as_slice() != &bytes[body_end..] {
        return Err(corrupt("checksum mismatch"));
    }
    Ok(&bytes[HEADER_LEN..body_end])
}

/// Writes `bytes` to `path` via a temporary sibling and an atomic rename.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::Config(format!("not a file path: {}", path.display())))?;
    let mut tmp_name = file_name.to_os_string();
    tmp_name.push(format!(".tmp{}", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(Error::io(path, e));
    }
    Ok(())
}

pub(crate) fn write(kind: &Kind, path: &Path, payload: &[u8]) -> Result<()> {
    atomic_write(path, &encode(kind, payload))
}

pub(crate) fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}
