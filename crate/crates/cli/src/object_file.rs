//! Object files: JSON with the period length and a list of transparent
//! segments.
//!
//! ```json
//! {"period_bins": 100,
//!  "segments": [{"start": 20, "width": 10, "height": 0.5},
//!               {"start": 60, "width": 5, "height": 1.0}]}
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};
use superbunch::imaging::{default_double_slit, Slit, TemporalObject};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectFile {
    pub period_bins: usize,
    pub segments: Vec<Slit>,
}

impl ObjectFile {
    pub fn default_double_slit() -> Self {
        let object = default_double_slit();
        Self { period_bins: object.period_bins(), segments: superbunch::imaging::DEFAULT_SLITS.to_vec() }
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
        serde_json::from_str(&text).map_err(|e| CliError::ObjectFile { path: path.to_owned(), message: e.to_string() })
    }

    pub fn build(&self) -> Result<TemporalObject> {
        Ok(TemporalObject::from_slits(self.period_bins, &self.segments)?)
    }
}

/// Loads `path` (or the default double slit) and checks it against an
/// explicit `--bins`.
pub fn load(path: Option<&Path>, bins: Option<usize>) -> Result<(ObjectFile, TemporalObject)> {
    let file = match path {
        Some(p) => ObjectFile::read(p)?,
        None => ObjectFile::default_double_slit(),
    };
    if let Some(b) = bins {
        if b != file.period_bins {
            return Err(CliError::Usage(format!(
                "--bins {b} does not match the object's period of {} bins",
                file.period_bins
            )));
        }
    }
    let object = file.build()?;
    Ok((file, object))
}
