//! Binary checkpoint of a network's topology, masks and optimizer moments.
//!
//! Layout (all integers and floats little-endian):
//!
//! ```text
//! "HGR1"
//! u32 version (=1), u32 n, u32 L, u32 num_skips
//! num_skips x (u32 from, u32 to)
//! f64 wavelength, f64 layer_distance, f64 pitch
//! u32 C, C x (u32 row0, u32 col0, u32 height, u32 width)
//! L x n*n f64 theta, row-major
//! u8 moments flag (0/1)
//! if 1: L x (n*n f64 first moment, n*n f64 second moment)
//! ```

use std::fs;
use std::io::Write;
use std::path::Path;

use super::forward::NetworkConfig;
use super::skip::SkipChannel;
use crate::field::{DetectorLayout, GridSpec, Padding, PhaseMask, Region};
use crate::{Error, Result};

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"HGR1";
const VERSION: u32 = 1;

/// Adam first and second moments, one array per layer.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerMoments {
    pub first: Vec<Vec<f64>>,
    pub second: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub config: NetworkConfig,
    pub moments: Option<OptimizerMoments>,
}

fn encode(config: &NetworkConfig, moments: Option<&OptimizerMoments>) -> Result<Vec<u8>> {
    config.validate()?;
    let n = config.grid.n;
    let l = config.num_layers();
    if let Some(m) = moments {
        let ok = m.first.len() == l && m.second.len() == l && m.first.iter().chain(&m.second).all(|a| a.len() == n * n);
        if !ok {
            return Err(Error::invalid("optimizer moments do not match the mask shapes"));
        }
    }
    let u32_of =
        |v: usize, what: &str| u32::try_from(v).map_err(|_| Error::invalid(format!("{what} {v} does not fit in u32")));
    let mut buf = Vec::with_capacity(64 + l * n * n * 8 * if moments.is_some() { 3 } else { 1 });
    buf.extend_from_slice(CHECKPOINT_MAGIC);
    for v in [
        VERSION,
        u32_of(n, "n")?,
        u32_of(l, "L")?,
        u32_of(config.skips.len(), "skips")?,
    ] {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    for s in &config.skips {
        buf.extend_from_slice(&u32_of(s.from, "skip")?.to_le_bytes());
        buf.extend_from_slice(&u32_of(s.to, "skip")?.to_le_bytes());
    }
    for v in [config.grid.wavelength, config.grid.layer_distance, config.grid.pitch] {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    let regions = config.detector.regions();
    buf.extend_from_slice(&u32_of(regions.len(), "C")?.to_le_bytes());
    for r in regions {
        for v in [r.row0, r.col0, r.height, r.width] {
            buf.extend_from_slice(&u32_of(v, "region")?.to_le_bytes());
        }
    }
    for mask in &config.masks {
        for t in mask.theta() {
            buf.extend_from_slice(&t.to_le_bytes());
        }
    }
    match moments {
        None => buf.push(0),
        Some(m) => {
            buf.push(1);
            for (a, b) in m.first.iter().zip(&m.second) {
                for v in a.iter().chain(b) {
                    buf.extend_from_slice(&v.to_le_bytes());
                }
            }
        }
    }
    Ok(buf)
}

/// Writes the checkpoint through a temporary file and a rename.
pub fn save_checkpoint(config: &NetworkConfig, moments: Option<&OptimizerMoments>, path: &Path) -> Result<()> {
    let bytes = encode(config, moments)?;
    let tmp = path.with_extension("tmp");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(&bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, len: usize, section: &str) -> Result<&'a [u8]> {
        if self.buf.len() - self.pos < len {
            return Err(Error::Format {
                offset: self.pos as u64,
                message: format!(
                    "truncated: missing {section} ({len} bytes needed, {} left)",
                    self.buf.len() - self.pos
                ),
            });
        }
        let out = &self.buf[self.pos..self.pos + len];
        self.pos += len;
        Ok(out)
    }

    fn u32(&mut self, section: &str) -> Result<usize> {
        let b = self.take(4, section)?;
        Ok(u32::from_le_bytes(b.try_into().expect("4 bytes")) as usize)
    }

    fn f64(&mut self, section: &str) -> Result<f64> {
        let b = self.take(8, section)?;
        Ok(f64::from_le_bytes(b.try_into().expect("8 bytes")))
    }

    fn f64s(&mut self, count: usize, section: &str) -> Result<Vec<f64>> {
        let len = count
            .checked_mul(8)
            .ok_or_else(|| self.error(format!("{section} size overflows")))?;
        let b = self.take(len, section)?;
        Ok(b.chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect())
    }

    fn error(&self, message: String) -> Error {
        Error::Format {
            offset: self.pos as u64,
            message,
        }
    }
}

pub fn decode(bytes: &[u8]) -> Result<Checkpoint> {
    let mut r = Reader { buf: bytes, pos: 0 };
    let magic = r.take(4, "magic")?;
    if magic != CHECKPOINT_MAGIC {
        return Err(Error::Format {
            offset: 0,
            message: format!("bad magic {magic:?}, expected \"HGR1\""),
        });
    }
    let version_at = r.pos;
    let version = r.u32("header")?;
    if version != VERSION as usize {
        return Err(Error::Format {
            offset: version_at as u64,
            message: format!("unsupported version {version}"),
        });
    }
    let n = r.u32("header")?;
    let l = r.u32("header")?;
    let num_skips = r.u32("header")?;
    let mut skips = Vec::new();
    for _ in 0..num_skips {
        let from = r.u32("skip channels")?;
        let to = r.u32("skip channels")?;
        skips.push(SkipChannel { from, to });
    }
    let grid_at = r.pos;
    let wavelength = r.f64("grid parameters")?;
    let layer_distance = r.f64("grid parameters")?;
    let pitch = r.f64("grid parameters")?;
    let grid = GridSpec::new(n, pitch, wavelength, layer_distance).map_err(|e| Error::Format {
        offset: grid_at as u64,
        message: e.to_string(),
    })?;
    let num_classes = r.u32("detector layout")?;
    let mut regions = Vec::new();
    for _ in 0..num_classes {
        let row0 = r.u32("detector layout")?;
        let col0 = r.u32("detector layout")?;
        let height = r.u32("detector layout")?;
        let width = r.u32("detector layout")?;
        regions.push(Region {
            row0,
            col0,
            height,
            width,
        });
    }
    let detector_end = r.pos;
    let detector = DetectorLayout::new(n, regions).map_err(|e| r.error(e.to_string()))?;
    let mut masks = Vec::with_capacity(l);
    for i in 0..l {
        let theta = r.f64s(n * n, &format!("phase mask {}", i + 1))?;
        masks.push(PhaseMask::from_theta(grid, theta).map_err(|e| r.error(e.to_string()))?);
    }
    let flag = r.take(1, "optimizer flag")?[0];
    let moments = match flag {
        0 => None,
        1 => {
            let mut first = Vec::with_capacity(l);
            let mut second = Vec::with_capacity(l);
            for i in 0..l {
                first.push(r.f64s(n * n, &format!("first moment of layer {}", i + 1))?);
                second.push(r.f64s(n * n, &format!("second moment of layer {}", i + 1))?);
            }
            Some(OptimizerMoments { first, second })
        }
        other => return Err(r.error(format!("optimizer flag must be 0 or 1, got {other}"))),
    };
    if r.pos != bytes.len() {
        return Err(r.error(format!("{} trailing bytes", bytes.len() - r.pos)));
    }
    let config = NetworkConfig {
        grid,
        feature_layers: l / 2,
        masks,
        skips,
        detector,
        padding: Padding::None,
    };
    config.validate().map_err(|e| Error::Format {
        offset: detector_end as u64,
        message: e.to_string(),
    })?;
    Ok(Checkpoint { config, moments })
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    decode(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> NetworkConfig {
        let grid = GridSpec::new(4, 36e-6, 532e-9, 0.1).unwrap();
        let masks = (0..2)
            .map(|i| PhaseMask::from_theta(grid, (0..16).map(|j| (i * 16 + j) as f64 * 0.1).collect()).unwrap())
            .collect();
        NetworkConfig::new(
            grid,
            masks,
            vec![SkipChannel { from: 0, to: 2 }],
            DetectorLayout::uniform(4, 2, 1).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn header_bytes_are_exact() {
        let bytes = encode(&tiny(), None).unwrap();
        assert_eq!(&bytes[0..4], b"HGR1");
        assert_eq!(&bytes[4..8], &1u32.to_le_bytes());
        assert_eq!(&bytes[8..12], &4u32.to_le_bytes());
        assert_eq!(&bytes[12..16], &2u32.to_le_bytes());
        assert_eq!(&bytes[16..20], &1u32.to_le_bytes());
        assert_eq!(&bytes[20..28], &[0, 0, 0, 0, 2, 0, 0, 0]);
        assert_eq!(&bytes[28..36], &532e-9f64.to_le_bytes());
        // 4 + 16 + 8 + 24 + 4 + 2*16 + 2*16*8 + 1
        assert_eq!(bytes.len(), 4 + 16 + 8 + 24 + 4 + 32 + 256 + 1);
        assert_eq!(*bytes.last().unwrap(), 0);
    }

    #[test]
    fn bad_flag_and_trailing_bytes() {
        let mut bytes = encode(&tiny(), None).unwrap();
        *bytes.last_mut().unwrap() = 7;
        assert!(matches!(decode(&bytes), Err(Error::Format { .. })));
        let mut bytes = encode(&tiny(), None).unwrap();
        bytes.push(0);
        assert!(matches!(decode(&bytes), Err(Error::Format { .. })));
    }

    #[test]
    fn version_mismatch_reports_offset() {
        let mut bytes = encode(&tiny(), None).unwrap();
        bytes[4] = 2;
        match decode(&bytes) {
            Err(Error::Format { offset, .. }) => assert_eq!(offset, 4),
            other => panic!("unexpected {other:?}"),
        }
    }
}
