//! Engine snapshots in a single binary container:
//!
//! ```text
//! magic "RSVCKPT\0" | version u32 LE | header length u32 LE | JSON header
//!                   | body length u64 LE | bincode body
//! ```
//!
//! The header describes the body (grid, variant, seed, counts, SHA-256 of
//! the body) so a checkpoint can be inspected without decoding the state.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::censorship::Variant;
use crate::domain::{Micros, Timestamp};
use crate::engine::{Counters, Engine, EngineConfig};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"RSVCKPT\0";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointHeader {
    pub format_version: u32,
    pub levels: usize,
    pub grid: Vec<Micros>,
    pub variant: Variant,
    pub seed: u64,
    pub users: usize,
    pub placements: usize,
    pub counters: Counters,
    /// Latest update time over all stored entities.
    pub last_update: Option<Timestamp>,
    pub body_sha256: String,
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn header_for(engine: &Engine, body: &[u8]) -> CheckpointHeader {
    let revenue = engine.revenue_model();
    CheckpointHeader {
        format_version: FORMAT_VERSION,
        levels: engine.grid().len(),
        grid: engine.grid().levels().to_vec(),
        variant: engine.config().variant,
        seed: engine.config().seed,
        users: revenue.users().len(),
        placements: revenue.placements().len(),
        counters: *engine.counters(),
        last_update: engine.last_update(),
        body_sha256: hex(&Sha256::digest(body)),
    }
}

pub fn encode(engine: &Engine) -> Result<Vec<u8>> {
    let body = bincode::serialize(engine).map_err(|e| Error::Checkpoint(format!("encode: {e}")))?;
    let header = serde_json::to_vec(&header_for(engine, &body))?;
    let mut out = Vec::with_capacity(MAGIC.len() + 16 + header.len() + body.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(header.len() as u32).to_le_bytes());
    out.extend_from_slice(&header);
    out.extend_from_slice(&(body.len() as u64).to_le_bytes());
    out.extend_from_slice(&body);
    Ok(out)
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| {
                Error::Checkpoint(format!(
                    "truncated: {what} needs {n} bytes at offset {}",
                    self.pos
                ))
            })?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }
}

fn split(bytes: &[u8]) -> Result<(CheckpointHeader, &[u8])> {
    let mut c = Cursor { bytes, pos: 0 };
    if c.take(MAGIC.len(), "magic")? != MAGIC {
        return Err(Error::Checkpoint("not a checkpoint file".into()));
    }
    let version = u32::from_le_bytes(c.take(4, "version")?.try_into().expect("4 bytes"));
    if version != FORMAT_VERSION {
        return Err(Error::Checkpoint(format!(
            "unsupported format version {version} (this build reads {FORMAT_VERSION})"
        )));
    }
    let header_len = u32::from_le_bytes(c.take(4, "header length")?.try_into().expect("4 bytes"));
    let header: CheckpointHeader = serde_json::from_slice(c.take(header_len as usize, "header")?)
        .map_err(|e| Error::Checkpoint(format!("header: {e}")))?;
    let body_len = u64::from_le_bytes(c.take(8, "body length")?.try_into().expect("8 bytes"));
    let body_len =
        usize::try_from(body_len).map_err(|_| Error::Checkpoint("body too large".into()))?;
    let body = c.take(body_len, "body")?;
    if c.pos != bytes.len() {
        return Err(Error::Checkpoint(format!(
            "{} trailing bytes",
            bytes.len() - c.pos
        )));
    }
    if hex(&Sha256::digest(body)) != header.body_sha256 {
        return Err(Error::Checkpoint("body checksum mismatch".into()));
    }
    Ok((header, body))
}

/// Reads and verifies the header without decoding the engine state.
pub fn inspect(bytes: &[u8]) -> Result<CheckpointHeader> {
    split(bytes).map(|(h, _)| h)
}

pub fn decode(bytes: &[u8]) -> Result<Engine> {
    let (header, body) = split(bytes)?;
    let engine: Engine =
        bincode::deserialize(body).map_err(|e| Error::Checkpoint(format!("body: {e}")))?;
    engine.config().validate()?;
    if header_for(&engine, body) != header {
        return Err(Error::Checkpoint(
            "header does not describe the body".into(),
        ));
    }
    Ok(engine)
}

/// Rejects a checkpoint whose grid or variant differ from `config`.
pub fn check_compatible(header: &CheckpointHeader, config: &EngineConfig) -> Result<()> {
    if header.levels != config.grid.len() {
        return Err(Error::Checkpoint(format!(
            "grid has {} levels, checkpoint has {}",
            config.grid.len(),
            header.levels
        )));
    }
    if header.grid != config.grid.levels() {
        return Err(Error::Checkpoint(
            "grid levels differ from the checkpoint".into(),
        ));
    }
    if header.variant != config.variant {
        return Err(Error::Checkpoint(format!(
            "variant {:?} differs from the checkpoint's {:?}",
            config.variant, header.variant
        )));
    }
    Ok(())
}

pub fn save(path: &Path, engine: &Engine) -> Result<()> {
    let bytes = encode(engine)?;
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, &bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

pub fn load(path: &Path) -> Result<Engine> {
    decode(&std::fs::read(path)?)
}

/// Replaces `engine` with the checkpoint at `path`. On any error `engine`
/// is left as it was.
pub fn load_into(path: &Path, engine: &mut Engine) -> Result<()> {
    let bytes = std::fs::read(path)?;
    check_compatible(&inspect(&bytes)?, engine.config())?;
    *engine = decode(&bytes)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{AuctionEvent, FloorGrid, Spacing};
    use crate::params::HyperParams;

    fn engine(levels: usize) -> Engine {
        let grid = FloorGrid::with_zero_level(levels, 0.1, 10.0, Spacing::Geometric).unwrap();
        let mut e = Engine::new(EngineConfig::new(
            Variant::M1,
            grid,
            HyperParams::default(),
            3,
        ))
        .unwrap();
        for t in 0..50 {
            let d = e.choose_floor(&format!("u{}", t % 4), "p", t).unwrap();
            let b1 = Micros(200_000 * (t % 7 + 1));
            e.process_outcome(&AuctionEvent::from_bids(
                t,
                format!("u{}", t % 4),
                "p",
                d.floor,
                b1,
                Micros(b1.0 / 3),
            ))
            .unwrap();
        }
        e
    }

    #[test]
    fn round_trip_is_byte_identical() {
        let e = engine(8);
        let bytes = encode(&e).unwrap();
        let back = decode(&bytes).unwrap();
        assert_eq!(back, e);
        assert_eq!(encode(&back).unwrap(), bytes);
        let h = inspect(&bytes).unwrap();
        assert_eq!(
            (h.levels, h.users, h.placements, h.counters.events),
            (8, 4, 1, 50)
        );
        assert_eq!(h.last_update, Some(49));
    }

    #[test]
    fn rejects_damage_and_mismatch() {
        let e = engine(8);
        let bytes = encode(&e).unwrap();
        for cut in [0, 5, 12, 20, bytes.len() - 1] {
            assert!(decode(&bytes[..cut]).is_err(), "cut {cut}");
        }
        let mut flipped = bytes.clone();
        *flipped.last_mut().unwrap() ^= 1;
        assert!(decode(&flipped).is_err());
        let mut version = bytes.clone();
        version[8] = 9;
        assert!(decode(&version)
            .unwrap_err()
            .to_string()
            .contains("version 9"));

        let other = engine(9);
        let err = check_compatible(&inspect(&bytes).unwrap(), other.config()).unwrap_err();
        assert!(err.to_string().contains("9 levels"), "{err}");
    }
}
