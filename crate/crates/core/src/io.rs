//! Text file formats for mode functions and output metadata.
//!
//! Floats are written with Rust's shortest round-trip formatting, so a
//! write/read cycle reproduces every `f64` bit-for-bit.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::modes::{ModeFunction, TimeGrid};
use crate::{Error, Result, C64, CONVENTION, VERSION};

/// Provenance block attached to every exported file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Meta {
    pub config_hash: String,
    pub seed: Option<u64>,
    pub convention: String,
    pub version: String,
}

impl Meta {
    pub fn new(config_hash: impl Into<String>, seed: Option<u64>) -> Self {
        Self {
            config_hash: config_hash.into(),
            seed,
            convention: CONVENTION.to_string(),
            version: VERSION.to_string(),
        }
    }

    /// Metadata for outputs that were not produced from a config file.
    pub fn standalone() -> Self {
        Self::new("none", None)
    }

    /// `# key: value` lines for CSV headers.
    pub fn csv_header(&self) -> String {
        let seed = self.seed.map_or_else(|| "none".to_string(), |s| s.to_string());
        format!(
            "# config_hash: {}\n# seed: {}\n# convention: {}\n# version: {}\n",
            self.config_hash, seed, self.convention, self.version
        )
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// CSV with columns `t_seconds,re,im`, preceded by `#` metadata lines that
/// carry the exact grid and label.
pub fn mode_to_csv(f: &ModeFunction, meta: &Meta) -> String {
    let g = f.grid;
    let mut out = meta.csv_header();
    let _ = writeln!(out, "# label: {}", f.label);
    let _ = writeln!(out, "# grid: t0={} dt={} n_samples={}", g.t0, g.dt, g.n_samples);
    out.push_str("t_seconds,re,im\n");
    for (i, z) in f.values.iter().enumerate() {
        let _ = writeln!(out, "{},{},{}", g.time(i), z.re, z.im);
    }
    out
}

pub fn mode_from_csv(text: &str) -> Result<ModeFunction> {
    let mut label = String::from("imported");
    let mut grid: Option<TimeGrid> = None;
    let mut times = Vec::new();
    let mut values = Vec::new();
    let mut header_seen = false;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let rest = rest.trim();
            if let Some(l) = rest.strip_prefix("label:") {
                label = l.trim().to_string();
            } else if let Some(gs) = rest.strip_prefix("grid:") {
                grid = Some(parse_grid_line(gs).map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))?);
            }
            continue;
        }
        if !header_seen {
            header_seen = true;
            if line.starts_with("t_seconds") {
                continue;
            }
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 3 {
            return Err(Error::Config(format!(
                "line {}: expected 3 columns, got {}",
                lineno + 1,
                cols.len()
            )));
        }
        let parse = |s: &str| -> Result<f64> {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::Config(format!("line {}: {e}: {s:?}", lineno + 1)))
        };
        times.push(parse(cols[0])?);
        values.push(C64::new(parse(cols[1])?, parse(cols[2])?));
    }
    let grid = match grid {
        Some(g) => g,
        None => {
            if times.len() < 2 {
                return Err(Error::Config("mode CSV needs at least two rows".into()));
            }
            let dt = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
            TimeGrid::new(times[0], dt, times.len())?
        }
    };
    ModeFunction::new(grid, values, label)
}

fn parse_grid_line(s: &str) -> std::result::Result<TimeGrid, String> {
    let mut t0 = None;
    let mut dt = None;
    let mut n = None;
    for tok in s.split_whitespace() {
        let (k, v) = tok.split_once('=').ok_or_else(|| format!("bad grid token {tok:?}"))?;
        match k {
            "t0" => t0 = Some(v.parse::<f64>().map_err(|e| e.to_string())?),
            "dt" => dt = Some(v.parse::<f64>().map_err(|e| e.to_string())?),
            "n_samples" => n = Some(v.parse::<usize>().map_err(|e| e.to_string())?),
            _ => return Err(format!("unknown grid key {k:?}")),
        }
    }
    match (t0, dt, n) {
        (Some(t0), Some(dt), Some(n)) => TimeGrid::new(t0, dt, n).map_err(|e| e.to_string()),
        _ => Err("grid line needs t0, dt and n_samples".into()),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ModeEnvelope {
    format: String,
    meta: Meta,
    label: String,
    grid: TimeGrid,
    re: Vec<f64>,
    im: Vec<f64>,
}

const MODE_FORMAT: &str = "qawg.mode_function/1";

pub fn mode_to_json(f: &ModeFunction, meta: &Meta) -> Result<String> {
    let env = ModeEnvelope {
        format: MODE_FORMAT.into(),
        meta: meta.clone(),
        label: f.label.clone(),
        grid: f.grid,
        re: f.values.iter().map(|z| z.re).collect(),
        im: f.values.iter().map(|z| z.im).collect(),
    };
    Ok(serde_json::to_string_pretty(&env)?)
}

pub fn mode_from_json(text: &str) -> Result<ModeFunction> {
    let env: ModeEnvelope = serde_json::from_str(text)?;
    if env.format != MODE_FORMAT {
        return Err(Error::Config(format!("unexpected format tag {:?}", env.format)));
    }
    if env.re.len() != env.im.len() {
        return Err(Error::Config("re and im arrays differ in length".into()));
    }
    let grid = TimeGrid::new(env.grid.t0, env.grid.dt, env.grid.n_samples)?;
    let values = env.re.iter().zip(&env.im).map(|(&r, &i)| C64::new(r, i)).collect();
    ModeFunction::new(grid, values, env.label)
}

/// Load a mode function from `.json` or `.csv` by extension.
pub fn read_mode_file(path: &std::path::Path) -> Result<ModeFunction> {
    let text = std::fs::read_to_string(path)?;
    match path.extension().and_then(|e| e.to_str()) {
        Some("json") => mode_from_json(&text),
        _ => mode_from_csv(&text),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modes::{make_balanced_time_bin, WaveformParams};
    use proptest::prelude::*;

    #[test]
    fn csv_roundtrip_is_bit_exact() {
        let f = make_balanced_time_bin(&WaveformParams::experiment(), &TimeGrid::standard()).unwrap();
        let text = mode_to_csv(&f, &Meta::standalone());
        let back = mode_from_csv(&text).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn csv_without_metadata_infers_grid() {
        let text = "t_seconds,re,im\n0,1,0\n0.5,0,1\n1,0,0\n";
        let f = mode_from_csv(text).unwrap();
        assert_eq!(f.grid.n_samples, 3);
        assert_eq!(f.grid.dt, 0.5);
        assert_eq!(f.values[1], C64::new(0.0, 1.0));
    }

    #[test]
    fn csv_rejects_bad_rows() {
        assert!(mode_from_csv("t_seconds,re,im\n0,1\n1,2\n").is_err());
        assert!(mode_from_csv("t_seconds,re,im\n0,x,0\n1,2,0\n").is_err());
    }

    proptest! {
        #[test]
        fn json_roundtrip_is_bit_exact(vals in prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 2..64),
                                       t0 in -1e-6f64..1e-6, dt in 1e-12f64..1e-9) {
            let grid = TimeGrid::new(t0, dt, vals.len()).unwrap();
            let f = ModeFunction::new(grid, vals.iter().map(|&(r, i)| C64::new(r, i)).collect(), "p").unwrap();
            let back = mode_from_json(&mode_to_json(&f, &Meta::standalone()).unwrap()).unwrap();
            prop_assert_eq!(&back, &f);
            let back_csv = mode_from_csv(&mode_to_csv(&f, &Meta::standalone())).unwrap();
            prop_assert_eq!(back_csv, f);
        }
    }
}
