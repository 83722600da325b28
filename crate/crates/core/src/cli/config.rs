use super::CliError;
use crate::apps::BeamMode;
use crate::expr::Bindings;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

/// Keys accepted in a config file and produced by flags; parameters use
/// `param.<name>`.
pub const KEYS: [&str; 19] = [
    "f", "g", "omega", "alpha", "t0", "t1", "samples", "rtol", "atol", "out", "format", "x0", "v0", "method", "suite",
    "case", "mode", "alpha-coef", "beta-coef",
];

/// Raw settings, later layers overriding earlier ones.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings(BTreeMap<String, String>);

impl Settings {
    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<(), CliError> {
        if !KEYS.contains(&key) && !key.strip_prefix("param.").is_some_and(|p| !p.is_empty()) {
            return Err(CliError::Usage(format!("unknown setting `{key}`")));
        }
        self.0.insert(key.to_string(), value.into());
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    pub fn merge(&mut self, over: &Settings) {
        for (k, v) in &over.0 {
            self.0.insert(k.clone(), v.clone());
        }
    }

    /// Flat `key = value` lines; blank lines and `#` comments are skipped.
    pub fn parse_file_text(text: &str) -> Result<Settings, CliError> {
        let mut s = Settings::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("config line {}: expected key = value", n + 1)))?;
            s.set(k.trim(), v.trim()).map_err(|e| CliError::Usage(format!("config line {}: {e}", n + 1)))?;
        }
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Settings, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::parse_file_text(&text)
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        self.get(key)
            .map(|v| v.parse::<T>().map_err(|_| CliError::Usage(format!("invalid value `{v}` for {key}"))))
            .transpose()
    }
}

/// `k=v` from a `--param` flag.
pub fn split_param(text: &str) -> Result<(String, String), CliError> {
    match text.split_once('=') {
        Some((k, v)) if !k.trim().is_empty() => Ok((k.trim().to_string(), v.trim().to_string())),
        _ => Err(CliError::Usage(format!("--param expects name=value, got `{text}`"))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    FirstIntegral,
    Generated,
}

/// Fully resolved settings of one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: String,
    pub f: String,
    pub g: String,
    /// A number or an expression in `t`.
    pub omega: String,
    pub alpha: Option<f64>,
    pub params: Bindings,
    pub t0: f64,
    pub t1: Option<f64>,
    pub samples: usize,
    /// `None` leaves the command's own default in force.
    pub rtol: Option<f64>,
    pub atol: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
    pub x0: f64,
    pub v0: f64,
    pub method: Method,
    pub suite: Option<String>,
    pub case: Option<String>,
    pub mode: BeamMode,
    pub alpha_coef: Option<f64>,
    pub beta_coef: Option<f64>,
}

impl RunConfig {
    pub fn from_settings(command: &str, s: &Settings) -> Result<Self, CliError> {
        let mut params = Bindings::new();
        for (k, v) in &s.0 {
            if let Some(name) = k.strip_prefix("param.") {
                let value = v.parse::<f64>().map_err(|_| CliError::Usage(format!("invalid value `{v}` for parameter {name}")))?;
                params.insert(name.to_string(), value);
            }
        }
        let format = match s.get("format").unwrap_or("csv") {
            "csv" => OutputFormat::Csv,
            other => return Err(CliError::Usage(format!("unsupported format `{other}` (only csv)"))),
        };
        let method = match s.get("method").unwrap_or("first-integral") {
            "first-integral" => Method::FirstIntegral,
            "generated" => Method::Generated,
            other => return Err(CliError::Usage(format!("unknown method `{other}` (first-integral or generated)"))),
        };
        let mode = s.get("mode").unwrap_or("direct").parse::<BeamMode>().map_err(|e| CliError::Usage(e.to_string()))?;
        let cfg = RunConfig {
            command: command.to_string(),
            f: s.get("f").unwrap_or("0").to_string(),
            g: s.get("g").unwrap_or("0").to_string(),
            omega: s.get("omega").unwrap_or("1").to_string(),
            alpha: s.parse("alpha")?,
            params,
            t0: s.parse("t0")?.unwrap_or(0.0),
            t1: s.parse("t1")?,
            samples: s.parse("samples")?.unwrap_or(100),
            rtol: s.parse("rtol")?,
            atol: s.parse("atol")?,
            out: s.get("out").map(PathBuf::from),
            format,
            x0: s.parse("x0")?.unwrap_or(0.0),
            v0: s.parse("v0")?.unwrap_or(1.0),
            method,
            suite: s.get("suite").map(str::to_string),
            case: s.get("case").map(str::to_string),
            mode,
            alpha_coef: s.parse("alpha-coef")?,
            beta_coef: s.parse("beta-coef")?,
        };
        if cfg.samples < 2 {
            return Err(CliError::Usage(format!("samples must be at least 2, got {}", cfg.samples)));
        }
        if [cfg.rtol, cfg.atol].iter().flatten().any(|&t| !(t > 0.0)) {
            return Err(CliError::Usage("tolerances must be positive".into()));
        }
        Ok(cfg)
    }

    /// `(rtol, atol)`, each falling back to `default` when not given.
    pub fn tolerances(&self, default: (f64, f64)) -> (f64, f64) {
        (self.rtol.unwrap_or(default.0), self.atol.unwrap_or(default.1))
    }

    /// End of the span: `--t1`, or one period `2π` after `t0`.
    pub fn t_end(&self) -> f64 {
        self.t1.unwrap_or(self.t0 + 2.0 * PI)
    }

    /// `samples` equally spaced points over `[t0, t_end]`.
    pub fn grid(&self) -> Vec<f64> {
        let (a, b) = (self.t0, self.t_end());
        let n = self.samples;
        (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
    }
}
