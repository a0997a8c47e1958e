//! On-disk cache of computed zeros.
//!
//! Files are named `<family>_<k>.json` for Taylor and
//! `<family>_<k>_<gamma h>_<axis>.json` for Chebyshev, and hold
//! `[[re, im], ...]` as 35-digit decimal strings. Writes go to a temporary
//! file in the same directory followed by a rename, so readers never see a
//! partial file.

use super::ddouble::{CDd, Dd};
use super::{Axis, Family};
use crate::error::{Error, Result};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

const DIGITS: usize = 35;

#[derive(Clone, Debug)]
pub struct ZeroCache {
    dir: PathBuf,
}

/// `gamma h` rounded to ten significant digits; zeros are always computed at
/// the quantized value so that a cache file is exact for its key.
pub fn quantize_gamma_h(gamma_h: f64) -> f64 {
    format!("{gamma_h:.9e}").parse().expect("formatted float parses")
}

fn key(family: Family, k: usize, gamma_h: f64, axis: Axis) -> String {
    match family {
        Family::Taylor => format!("taylor_{k}.json"),
        Family::Chebyshev => {
            let axis = match axis {
                Axis::Real => "real",
                Axis::Imaginary => "imaginary",
            };
            format!("chebyshev_{k}_{:.9e}_{axis}.json", quantize_gamma_h(gamma_h))
        }
    }
}

impl ZeroCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        ZeroCache { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, family: Family, k: usize, gamma_h: f64, axis: Axis) -> PathBuf {
        self.dir.join(key(family, k, gamma_h, axis))
    }

    /// Cached zeros, `Ok(None)` when absent.
    pub fn load(&self, family: Family, k: usize, gamma_h: f64, axis: Axis) -> Result<Option<Vec<CDd>>> {
        let path = self.path_for(family, k, gamma_h, axis);
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(Error::io(&path, e)),
        };
        let raw: Vec<[String; 2]> = serde_json::from_str(&text)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        let parse = |s: &str| Dd::parse(s).ok_or_else(|| Error::Parse(format!("{}: bad number {s:?}", path.display())));
        let zeros = raw
            .iter()
            .map(|[re, im]| Ok(CDd::new(parse(re)?, parse(im)?)))
            .collect::<Result<Vec<_>>>()?;
        if zeros.len() != k {
            return Err(Error::Parse(format!(
                "{}: expected {k} zeros, found {}",
                path.display(),
                zeros.len()
            )));
        }
        Ok(Some(zeros))
    }

    pub fn store(&self, family: Family, k: usize, gamma_h: f64, axis: Axis, zeros: &[CDd]) -> Result<PathBuf> {
        fs::create_dir_all(&self.dir).map_err(|e| Error::io(&self.dir, e))?;
        let path = self.path_for(family, k, gamma_h, axis);
        let raw: Vec<[String; 2]> = zeros
            .iter()
            .map(|z| [z.re.to_sci_string(DIGITS), z.im.to_sci_string(DIGITS)])
            .collect();
        let text = serde_json::to_string_pretty(&raw)?;
        static COUNTER: AtomicU64 = AtomicU64::new(0);
        let tmp = self.dir.join(format!(
            ".{}.{}.{}.tmp",
            path.file_name().and_then(|n| n.to_str()).unwrap_or("zeros"),
            std::process::id(),
            COUNTER.fetch_add(1, Ordering::Relaxed)
        ));
        fs::write(&tmp, text).map_err(|e| Error::io(&tmp, e))?;
        fs::rename(&tmp, &path).map_err(|e| {
            let _ = fs::remove_file(&tmp);
            Error::io(&path, e)
        })?;
        Ok(path)
    }
}
