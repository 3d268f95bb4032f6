//! Flat `key = value` experiment configuration.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub k: usize,
    pub seed: u64,
    /// Packaged surface name or `cloud:<path>`.
    pub surface: String,
    /// Threshold for width or β.
    pub eps: f64,
    /// Closeness threshold for the half-space tests.
    pub close: f64,
    pub radii: Vec<f64>,
    pub n_lines: usize,
    pub n_dirs: usize,
    pub cloud_size: usize,
    /// Grid scale for projection measures.
    pub delta: f64,
    pub top_level: i32,
    pub bottom_level: i32,
    /// Cone aperture for extraction and shrink factor for flatness probes.
    pub gamma: f64,
    /// Number of random cases per check in `verify`.
    pub cases: usize,
    pub scales: usize,
    pub suite: String,
    pub out: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            k: 1,
            seed: 7,
            surface: "koranyi-sphere".into(),
            eps: 0.05,
            close: 0.05,
            radii: vec![0.5],
            n_lines: 10_000,
            n_dirs: 64,
            cloud_size: 1000,
            delta: 1.0 / 64.0,
            top_level: -1,
            bottom_level: -3,
            gamma: 0.5,
            cases: 1000,
            scales: 4,
            suite: "all".into(),
            out: None,
        }
    }
}

pub const CONFIG_KEYS: &[&str] = &[
    "k", "seed", "surface", "eps", "close", "radii", "n_lines", "n_dirs", "cloud_size", "delta", "top_level",
    "bottom_level", "gamma", "cases", "scales", "suite", "out",
];

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.trim().parse().map_err(|_| Error::Parse(format!("bad value for {key}: {value:?}")))
}

impl ExperimentConfig {
    /// Sets one key from its text form. Keys may use `-` or `_`.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().replace('-', "_");
        let v = value.trim();
        match key.as_str() {
            "k" => self.k = parse(&key, v)?,
            "seed" => self.seed = parse(&key, v)?,
            "surface" => self.surface = v.to_string(),
            "eps" => self.eps = parse(&key, v)?,
            "close" => self.close = parse(&key, v)?,
            "radii" => {
                self.radii = v.split(',').filter(|s| !s.trim().is_empty()).map(|s| parse(&key, s)).collect::<Result<_>>()?
            }
            "n_lines" => self.n_lines = parse(&key, v)?,
            "n_dirs" => self.n_dirs = parse(&key, v)?,
            "cloud_size" => self.cloud_size = parse(&key, v)?,
            "delta" => self.delta = parse(&key, v)?,
            "top_level" => self.top_level = parse(&key, v)?,
            "bottom_level" => self.bottom_level = parse(&key, v)?,
            "gamma" => self.gamma = parse(&key, v)?,
            "cases" => self.cases = parse(&key, v)?,
            "scales" => self.scales = parse(&key, v)?,
            "suite" => self.suite = v.to_string(),
            "out" => self.out = if v.is_empty() { None } else { Some(PathBuf::from(v)) },
            other => return Err(Error::Parse(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }

    /// Parses the text format on top of the defaults. Blank lines and lines
    /// starting with `#` are ignored.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) =
                line.split_once('=').ok_or_else(|| Error::Parse(format!("line {}: expected key = value", n + 1)))?;
            cfg.set(key, value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }

    /// Text form; floats use the shortest representation that reads back exactly.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let radii: Vec<String> = self.radii.iter().map(|r| format!("{r:?}")).collect();
        let _ = writeln!(s, "k = {}", self.k);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "surface = {}", self.surface);
        let _ = writeln!(s, "eps = {:?}", self.eps);
        let _ = writeln!(s, "close = {:?}", self.close);
        let _ = writeln!(s, "radii = {}", radii.join(","));
        let _ = writeln!(s, "n_lines = {}", self.n_lines);
        let _ = writeln!(s, "n_dirs = {}", self.n_dirs);
        let _ = writeln!(s, "cloud_size = {}", self.cloud_size);
        let _ = writeln!(s, "delta = {:?}", self.delta);
        let _ = writeln!(s, "top_level = {}", self.top_level);
        let _ = writeln!(s, "bottom_level = {}", self.bottom_level);
        let _ = writeln!(s, "gamma = {:?}", self.gamma);
        let _ = writeln!(s, "cases = {}", self.cases);
        let _ = writeln!(s, "scales = {}", self.scales);
        let _ = writeln!(s, "suite = {}", self.suite);
        let _ = writeln!(s, "out = {}", self.out.as_ref().map(|p| p.display().to_string()).unwrap_or_default());
        s
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(invalid("k must be at least 1"));
        }
        for (name, n) in [
            ("n_lines", self.n_lines),
            ("n_dirs", self.n_dirs),
            ("cloud_size", self.cloud_size),
            ("cases", self.cases),
            ("scales", self.scales),
        ] {
            if n == 0 {
                return Err(invalid(format!("{name} must be at least 1")));
            }
        }
        if self.radii.is_empty() {
            return Err(invalid("radii must not be empty"));
        }
        for (name, x) in [("eps", self.eps), ("close", self.close), ("delta", self.delta), ("gamma", self.gamma)]
            .into_iter()
            .chain(self.radii.iter().map(|r| ("radii", *r)))
        {
            if !(x > 0.0) || !x.is_finite() {
                return Err(invalid(format!("{name} must be positive and finite, got {x}")));
            }
        }
        if self.bottom_level > self.top_level {
            return Err(invalid("bottom_level must not exceed top_level"));
        }
        if self.surface.contains('\n') || self.suite.contains('\n') {
            return Err(invalid("names must be single-line"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        let mut c = ExperimentConfig::default();
        c.radii = vec![0.1, 1.0 / 3.0, 2.5];
        c.delta = 1.0 / 256.0;
        c.out = Some(PathBuf::from("/tmp/x"));
        assert_eq!(ExperimentConfig::from_text(&c.to_text()).unwrap(), c);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(ExperimentConfig::from_text("n_lines = 0").is_err());
        assert!(ExperimentConfig::from_text("colour = blue").is_err());
        assert!(ExperimentConfig::from_text("radii = 1,-2").is_err());
        assert!(ExperimentConfig::from_text("eps 3").is_err());
    }
}
