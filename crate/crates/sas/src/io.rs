//! Reading and writing SASE pool files.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use sas_core::format::{decode, encode};
use sas_core::EmbeddingPool;

use crate::error::{Error, Result};

pub fn write_pool<W: Write>(pool: &EmbeddingPool, mut sink: W) -> Result<()> {
    let bytes = encode(pool)?;
    sink.write_all(&bytes)?;
    sink.flush()?;
    Ok(())
}

pub fn read_pool<R: Read>(mut source: R) -> Result<EmbeddingPool> {
    let mut bytes = Vec::new();
    source.read_to_end(&mut bytes)?;
    Ok(decode(&bytes)?)
}

pub fn load_pool(path: &Path) -> Result<EmbeddingPool> {
    let bytes = fs::read(path).map_err(|source| Error::File {
        path: path.to_owned(),
        source,
    })?;
    Ok(decode(&bytes)?)
}

pub fn save_pool(pool: &EmbeddingPool, path: &Path) -> Result<()> {
    let bytes = encode(pool)?;
    fs::write(path, bytes).map_err(|source| Error::File {
        path: path.to_owned(),
        source,
    })
}

/// Short description of a pool: dimensions, counts and per-class histogram.
pub fn summary(pool: &EmbeddingPool) -> String {
    use std::fmt::Write as _;
    let mut out = String::new();
    let _ = writeln!(out, "dim       {}", pool.dim());
    let _ = writeln!(out, "classes   {}", pool.n_classes());
    let _ = writeln!(out, "images    {}", pool.n_images());
    let sizes = pool.class_sizes();
    let width = pool.class_names().iter().map(String::len).max().unwrap_or(0);
    let peak = sizes.iter().copied().max().unwrap_or(1).max(1);
    for (name, n) in pool.class_names().iter().zip(&sizes) {
        let bar = "#".repeat((n * 40).div_ceil(peak));
        let _ = writeln!(out, "  {name:<width$}  {n:>6}  {bar}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use sas_core::synth::{generate_pool, SyntheticSpec};

    #[test]
    fn round_trip_through_a_file() {
        let pool = generate_pool(&SyntheticSpec {
            dim: 4,
            n_classes: 3,
            per_class: 4,
            concentration: 2.0,
            duplicate_fraction: 0.0,
            seed: 1,
        })
        .unwrap()
        .pool;
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.sase");
        save_pool(&pool, &path).unwrap();
        assert_eq!(load_pool(&path).unwrap(), pool);

        let mut buf = Vec::new();
        write_pool(&pool, &mut buf).unwrap();
        assert_eq!(read_pool(&buf[..]).unwrap(), pool);
        assert_eq!(buf, std::fs::read(&path).unwrap());

        let text = summary(&pool);
        assert!(text.contains("images    12"));
        assert!(text.contains("class_002"));
    }

    #[test]
    fn missing_file_names_the_path() {
        let err = load_pool(Path::new("/nonexistent/x.sase")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/x.sase"));
    }
}
