//! Output writing: JSON with fixed 17-significant-digit floats (so repeated
//! runs are byte-identical), CSV helpers, and the run manifest.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use seqtest::error::Result;

use crate::config::{RunConfig, SCHEMA_VERSION};

/// serde_json formatter printing every float with 17 significant digits.
struct Seventeen;

impl serde_json::ser::Formatter for Seventeen {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W>(&mut self, writer: &mut W, value: f32) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        write!(writer, "{value:.7e}")
    }
}

pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Seventeen);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(buf).expect("serde_json emits utf-8"))
}

/// Writes `value` as JSON wrapped with a schema_version field.
pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf> {
    #[derive(Serialize)]
    struct Versioned<'a, T> {
        schema_version: &'a str,
        #[serde(flatten)]
        payload: &'a T,
    }
    let path = dir.join(name);
    let body = to_json_string(&Versioned {
        schema_version: SCHEMA_VERSION,
        payload: value,
    })?;
    let mut f = std::fs::File::create(&path)?;
    f.write_all(body.as_bytes())?;
    f.write_all(b"\n")?;
    Ok(path)
}

pub fn write_csv(dir: &Path, name: &str, body: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<PathBuf> {
    let path = dir.join(name);
    let mut buf = Vec::new();
    body(&mut buf)?;
    std::fs::write(&path, buf)?;
    Ok(path)
}

/// Echo of the resolved configuration plus the produced files; the `verify`
/// subcommand replays a manifest and byte-compares everything it lists.
#[derive(Debug, Clone, Serialize, serde::Deserialize)]
pub struct Manifest {
    pub schema_version: String,
    pub command: String,
    pub config: RunConfig,
    pub outputs: Vec<String>,
}

impl Manifest {
    pub fn new(command: &str, config: RunConfig, outputs: Vec<String>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.to_string(),
            command: command.to_string(),
            config,
            outputs,
        }
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join("manifest.json");
        let body = to_json_string(self)?;
        std::fs::write(&path, format!("{body}\n"))?;
        Ok(path)
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let doc = std::fs::read_to_string(dir.join("manifest.json"))?;
        let m: Manifest = serde_json::from_str(&doc)?;
        if m.schema_version.split('.').next() != Some("1") {
            return Err(seqtest::Error::Config(format!(
                "unsupported manifest schema_version '{}'",
                m.schema_version
            )));
        }
        Ok(m)
    }
}

pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}
