use std::fmt;
use std::path::Path;
use std::str::FromStr;

use regen_core::{Construction, FieldSpec};

use crate::error::{Result, SimError};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CodeKind {
    Mbr,
    Msr,
}

impl fmt::Display for CodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Mbr => "mbr",
            Self::Msr => "msr",
        })
    }
}

impl FromStr for CodeKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "mbr" => Ok(Self::Mbr),
            "msr" => Ok(Self::Msr),
            other => Err(format!("unknown code family `{other}` (expected mbr or msr)")),
        }
    }
}

/// What a cluster directory holds. `theta` is the size of the coding
/// vector family: `n(n-1)/2` edges for MBR, `n` main vectors for MSR.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Manifest {
    pub version: u32,
    pub code: CodeKind,
    pub n: usize,
    pub k: usize,
    pub d: usize,
    pub alpha: usize,
    pub beta: usize,
    pub b: usize,
    pub theta: usize,
    pub field: FieldSpec,
    /// Original file length in bytes.
    pub length: usize,
    pub chunks: usize,
    /// Zero symbols appended to fill the last chunk.
    pub padding: usize,
    pub construction: Construction,
    /// MSR only: version of `aux.txt`, bumped on every repair.
    pub aux_version: Option<u64>,
}

impl Manifest {
    pub fn payload_symbols(&self) -> usize {
        self.chunks * self.b - self.padding
    }

    fn check(&self) -> std::result::Result<(), String> {
        if self.version != FORMAT_VERSION {
            return Err(format!("unsupported manifest version {}", self.version));
        }
        if self.padding >= self.b.max(1) {
            return Err(format!("padding {} must be below B = {}", self.padding, self.b));
        }
        if self.chunks * self.b < self.padding {
            return Err("chunk count too small".into());
        }
        if self.code == CodeKind::Msr && self.aux_version.is_none() {
            return Err("MSR manifest lacks aux_version".into());
        }
        Ok(())
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut map = std::collections::BTreeMap::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| SimError::format(path, format!("line {}: expected key=value", no + 1)))?;
            if map.insert(key.trim().to_string(), value.trim().to_string()).is_some() {
                return Err(SimError::format(path, format!("duplicate key `{}`", key.trim())));
            }
        }
        fn get<T: FromStr>(map: &std::collections::BTreeMap<String, String>, key: &str, path: &Path) -> Result<T>
        where
            T::Err: fmt::Display,
        {
            let raw = map
                .get(key)
                .ok_or_else(|| SimError::format(path, format!("missing key `{key}`")))?;
            raw.parse()
                .map_err(|e| SimError::format(path, format!("bad value for `{key}`: {e}")))
        }
        let m = Self {
            version: get(&map, "version", path)?,
            code: get(&map, "code", path)?,
            n: get(&map, "n", path)?,
            k: get(&map, "k", path)?,
            d: get(&map, "d", path)?,
            alpha: get(&map, "alpha", path)?,
            beta: get(&map, "beta", path)?,
            b: get(&map, "B", path)?,
            theta: get(&map, "theta", path)?,
            field: get(&map, "field", path)?,
            length: get(&map, "length", path)?,
            chunks: get(&map, "chunks", path)?,
            padding: get(&map, "padding", path)?,
            construction: get(&map, "construction", path)?,
            aux_version: if map.contains_key("aux_version") {
                Some(get(&map, "aux_version", path)?)
            } else {
                None
            },
        };
        m.check().map_err(|e| SimError::format(path, e))?;
        Ok(m)
    }
}

impl fmt::Display for Manifest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "version={}", self.version)?;
        writeln!(f, "code={}", self.code)?;
        writeln!(f, "n={}", self.n)?;
        writeln!(f, "k={}", self.k)?;
        writeln!(f, "d={}", self.d)?;
        writeln!(f, "alpha={}", self.alpha)?;
        writeln!(f, "beta={}", self.beta)?;
        writeln!(f, "B={}", self.b)?;
        writeln!(f, "theta={}", self.theta)?;
        writeln!(f, "field={}", self.field)?;
        writeln!(f, "length={}", self.length)?;
        writeln!(f, "chunks={}", self.chunks)?;
        writeln!(f, "padding={}", self.padding)?;
        writeln!(f, "construction={}", self.construction)?;
        if let Some(v) = self.aux_version {
            writeln!(f, "aux_version={v}")?;
        }
        Ok(())
    }
}
