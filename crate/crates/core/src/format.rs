//! SASE binary layout for embedding pools.
//!
//! All integers are little-endian:
//!
//! ```text
//! magic       4 bytes  "SASE"
//! version     u32      1
//! dim         u32
//! n_classes   u32
//! n_images    u64
//! class_names n_classes × (u32 byte length, UTF-8 bytes)
//! prototypes  n_classes × dim × f32
//! image_ids   n_images × (u32 byte length, UTF-8 bytes)
//! labels      n_images × u32
//! features    n_images × dim × f32
//! ```
//!
//! Decoding rejects trailing bytes, so a decoded file re-encodes to the same bytes.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::FormatError;
use crate::pool::EmbeddingPool;

pub const MAGIC: [u8; 4] = *b"SASE";
pub const VERSION: u32 = 1;
/// Bytes before the first class name.
pub const HEADER_LEN: usize = 4 + 4 + 4 + 4 + 8;

/// Exact size of the encoding of `pool`.
pub fn encoded_len(pool: &EmbeddingPool) -> usize {
    let strings = |xs: &[String]| xs.iter().map(|s| 4 + s.len()).sum::<usize>();
    HEADER_LEN
        + strings(pool.class_names())
        + 4 * pool.prototypes().len()
        + strings(pool.image_ids())
        + 4 * pool.labels().len()
        + 4 * pool.features().len()
}

/// Serialize a pool. Every class must have at least one image.
pub fn encode(pool: &EmbeddingPool) -> Result<Vec<u8>, FormatError> {
    pool.check_classes_populated()?;
    let mut out = Vec::with_capacity(encoded_len(pool));
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&to_u32(pool.dim(), "dim")?.to_le_bytes());
    out.extend_from_slice(&to_u32(pool.n_classes(), "n_classes")?.to_le_bytes());
    out.extend_from_slice(&(pool.n_images() as u64).to_le_bytes());
    for name in pool.class_names() {
        put_str(&mut out, name)?;
    }
    put_f32s(&mut out, pool.prototypes());
    for id in pool.image_ids() {
        put_str(&mut out, id)?;
    }
    for &label in pool.labels() {
        out.extend_from_slice(&label.to_le_bytes());
    }
    put_f32s(&mut out, pool.features());
    Ok(out)
}

/// Parse and validate a pool.
pub fn decode(bytes: &[u8]) -> Result<EmbeddingPool, FormatError> {
    let mut r = Reader { bytes, pos: 0 };
    let magic: [u8; 4] = r.take(4, "magic")?.try_into().unwrap();
    if magic != MAGIC {
        return Err(FormatError::BadMagic(magic));
    }
    let version = r.u32("version")?;
    if version != VERSION {
        return Err(FormatError::UnsupportedVersion(version));
    }
    let dim = r.u32("dim")? as usize;
    let n_classes = r.u32("n_classes")? as usize;
    let n_images =
        usize::try_from(r.u64("n_images")?).map_err(|_| FormatError::TooLarge("n_images"))?;

    let class_names = r.strings(n_classes, "class_names")?;
    let prototypes = r.f32s(n_classes, dim, "prototypes")?;
    let image_ids = r.strings(n_images, "image_ids")?;
    let labels = r.u32s(n_images, "labels")?;
    let features = r.f32s(n_images, dim, "features")?;
    if r.pos != bytes.len() {
        return Err(FormatError::TrailingBytes(bytes.len() - r.pos));
    }
    Ok(EmbeddingPool::new(
        dim,
        class_names,
        prototypes,
        image_ids,
        labels,
        features,
    )?)
}

fn to_u32(n: usize, what: &'static str) -> Result<u32, FormatError> {
    u32::try_from(n).map_err(|_| FormatError::TooLarge(what))
}

fn put_str(out: &mut Vec<u8>, s: &str) -> Result<(), FormatError> {
    out.extend_from_slice(&to_u32(s.len(), "string length")?.to_le_bytes());
    out.extend_from_slice(s.as_bytes());
    Ok(())
}

fn put_f32s(out: &mut Vec<u8>, xs: &[f32]) {
    for x in xs {
        out.extend_from_slice(&x.to_le_bytes());
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, section: &'static str) -> Result<&'a [u8], FormatError> {
        let end = self
            .pos
            .checked_add(n)
            .ok_or(FormatError::TooLarge(section))?;
        if end > self.bytes.len() {
            return Err(FormatError::Truncated {
                section,
                expected: end,
                actual: self.bytes.len(),
            });
        }
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u32(&mut self, section: &'static str) -> Result<u32, FormatError> {
        Ok(u32::from_le_bytes(self.take(4, section)?.try_into().unwrap()))
    }

    fn u64(&mut self, section: &'static str) -> Result<u64, FormatError> {
        Ok(u64::from_le_bytes(self.take(8, section)?.try_into().unwrap()))
    }

    fn strings(&mut self, n: usize, section: &'static str) -> Result<Vec<String>, FormatError> {
        // Each entry is at least 4 bytes; avoids huge allocations on hostile counts.
        let mut out = Vec::with_capacity(n.min((self.bytes.len() - self.pos) / 4));
        for index in 0..n {
            let len = self.u32(section)? as usize;
            let raw = self.take(len, section)?;
            let s = core::str::from_utf8(raw)
                .map_err(|_| FormatError::InvalidUtf8 { section, index })?;
            out.push(String::from(s));
        }
        Ok(out)
    }

    fn fixed(&mut self, rows: usize, width: usize, section: &'static str) -> Result<&'a [u8], FormatError> {
        let n = rows
            .checked_mul(width)
            .and_then(|n| n.checked_mul(4))
            .ok_or(FormatError::TooLarge(section))?;
        self.take(n, section)
    }

    fn f32s(&mut self, rows: usize, dim: usize, section: &'static str) -> Result<Vec<f32>, FormatError> {
        let raw = self.fixed(rows, dim, section)?;
        Ok(raw
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes(b.try_into().unwrap()))
            .collect())
    }

    fn u32s(&mut self, n: usize, section: &'static str) -> Result<Vec<u32>, FormatError> {
        let raw = self.fixed(n, 1, section)?;
        Ok(raw
            .chunks_exact(4)
            .map(|b| u32::from_le_bytes(b.try_into().unwrap()))
            .collect())
    }
}
