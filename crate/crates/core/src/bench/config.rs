use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::mm::SolverOptions;
use crate::regularizers::{TvRegularizer, DEFAULT_BETA, DEFAULT_EPSILON};
use crate::signal_gen::{SparsityClass, SUPPORT_SIZE};

/// EM iteration budget of the M-SBL baseline. EM needs a few hundred
/// iterations to meet the relative-change stop, far more than the outer
/// loop of TV-SBL.
pub const MSBL_MAX_ITERS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    Msbl,
    TvSbl(TvRegularizer),
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Msbl => f.write_str("msbl"),
            Method::TvSbl(reg) => write!(f, "{reg}"),
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "msbl" | "m-sbl" => Ok(Method::Msbl),
            other => Ok(Method::TvSbl(other.parse()?)),
        }
    }
}

/// One algorithm column of an experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmSpec {
    pub name: String,
    pub method: Method,
    pub options: SolverOptions,
}

impl AlgorithmSpec {
    pub fn new(method: Method) -> Self {
        let options = match method {
            Method::Msbl => SolverOptions {
                max_outer_iters: MSBL_MAX_ITERS,
                ..Default::default()
            },
            Method::TvSbl(_) => SolverOptions::default(),
        };
        Self {
            name: method.to_string(),
            method,
            options,
        }
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }
}

/// `[name=]method`, e.g. `msbl`, `log-tv:1:0.01` or `lin=linear-tv:0.3`.
impl FromStr for AlgorithmSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, method) = match s.split_once('=') {
            Some((n, m)) => (Some(n.trim()), m),
            None => (None, s),
        };
        let spec = AlgorithmSpec::new(method.parse()?);
        match name {
            Some("") => Err(Error::InvalidInput(format!(
                "empty algorithm name in '{s}'"
            ))),
            Some(n) if n.contains(',') => Err(Error::InvalidInput(format!(
                "algorithm name '{n}' contains a comma"
            ))),
            Some(n) => Ok(spec.named(n)),
            None => Ok(spec),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub n: usize,
    pub m: usize,
    pub l: usize,
    pub k: usize,
    pub snr_grid_db: Vec<f64>,
    pub classes: Vec<SparsityClass>,
    pub algorithms: Vec<AlgorithmSpec>,
    pub trials: usize,
    pub master_seed: u64,
    /// Aggregated table destination; `None` means standard output.
    pub output_path: Option<PathBuf>,
    /// Per-trial records destination.
    pub records_path: Option<PathBuf>,
    /// Draw one dictionary per experiment instead of one per trial.
    pub fix_dictionary: bool,
    /// Fill the wall-time column (makes output timing dependent).
    pub record_timing: bool,
    /// Worker threads; `None` uses all cores.
    pub threads: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n: 150,
            m: 20,
            l: 5,
            k: SUPPORT_SIZE,
            snr_grid_db: vec![0.0, 5.0, 10.0, 15.0, 20.0],
            classes: SparsityClass::ALL.to_vec(),
            algorithms: vec![
                AlgorithmSpec::new(Method::Msbl),
                AlgorithmSpec::new(Method::TvSbl(TvRegularizer::Linear { beta: DEFAULT_BETA })),
                AlgorithmSpec::new(Method::TvSbl(TvRegularizer::Log {
                    beta: DEFAULT_BETA,
                    epsilon: DEFAULT_EPSILON,
                })),
            ],
            trials: 200,
            master_seed: 0,
            output_path: None,
            records_path: None,
            fix_dictionary: false,
            record_timing: false,
            threads: None,
        }
    }
}

impl ExperimentConfig {
    /// 50 trials at 0, 10 and 20 dB.
    pub fn quick() -> Self {
        Self {
            trials: 50,
            snr_grid_db: vec![0.0, 10.0, 20.0],
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidInput("trials must be at least 1".into()));
        }
        if self.snr_grid_db.is_empty() || self.snr_grid_db.iter().any(|s| !s.is_finite()) {
            return Err(Error::InvalidInput(
                "SNR grid must be non-empty and finite".into(),
            ));
        }
        if self.classes.is_empty() || self.algorithms.is_empty() {
            return Err(Error::InvalidInput(
                "need at least one class and one algorithm".into(),
            ));
        }
        if self.m == 0 || self.l == 0 || self.k != SUPPORT_SIZE || self.n < 20 {
            return Err(Error::InvalidInput(format!(
                "unsupported dimensions N = {}, M = {}, L = {}, K = {} (K must be {SUPPORT_SIZE}, N at least 20)",
                self.n, self.m, self.l, self.k
            )));
        }
        if self.threads == Some(0) {
            return Err(Error::InvalidInput("threads must be at least 1".into()));
        }
        let mut names: Vec<&str> = self.algorithms.iter().map(|a| a.name.as_str()).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidInput("algorithm names must be unique".into()));
        }
        for a in &self.algorithms {
            a.options.validate(self.n)?;
            if let Method::TvSbl(reg) = a.method {
                reg.validate()?;
            }
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| match e {
            Error::InvalidInput(message) => Error::Parse {
                path: path.to_path_buf(),
                message,
            },
            other => other,
        })
    }

    /// Parses the `key = value` format documented in the README, starting
    /// from the defaults (or the quick preset if `preset = quick` comes first).
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::InvalidInput(format!("line {}: expected 'key = value'", lineno + 1))
            })?;
            cfg.set(key.trim(), value.trim())
                .map_err(|e| Error::InvalidInput(format!("line {}: {e}", lineno + 1)))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: FromStr>(key: &str, v: &str) -> Result<T> {
            v.parse()
                .map_err(|_| Error::InvalidInput(format!("bad value '{v}' for {key}")))
        }
        match key {
            "preset" => match value {
                "quick" => *self = Self::quick(),
                "full" | "default" => *self = Self::default(),
                _ => return Err(Error::InvalidInput(format!("unknown preset '{value}'"))),
            },
            "n" => self.n = num(key, value)?,
            "m" => self.m = num(key, value)?,
            "l" => self.l = num(key, value)?,
            "k" => self.k = num(key, value)?,
            "snr" => self.snr_grid_db = parse_snr_grid(value)?,
            "classes" => {
                self.classes = split_list(value).map(str::parse).collect::<Result<_>>()?;
            }
            "algorithms" => {
                self.algorithms = split_list(value).map(str::parse).collect::<Result<_>>()?;
            }
            "trials" => self.trials = num(key, value)?,
            "seed" => self.master_seed = num(key, value)?,
            "output" => self.output_path = Some(PathBuf::from(value)),
            "records" => self.records_path = Some(PathBuf::from(value)),
            "fix_dictionary" => self.fix_dictionary = num(key, value)?,
            "record_timing" => self.record_timing = num(key, value)?,
            "threads" => self.threads = Some(num(key, value)?),
            "max_outer_iters" | "outer_tol" | "gamma_floor" | "kkt_tol" => {
                for a in self
                    .algorithms
                    .iter_mut()
                    .filter(|a| a.method != Method::Msbl)
                {
                    apply_option(&mut a.options, key, value)?;
                }
            }
            "msbl_max_iters" => {
                for a in self
                    .algorithms
                    .iter_mut()
                    .filter(|a| a.method == Method::Msbl)
                {
                    a.options.max_outer_iters = num(key, value)?;
                }
            }
            _ => return Err(Error::InvalidInput(format!("unknown key '{key}'"))),
        }
        Ok(())
    }
}

fn apply_option(opts: &mut SolverOptions, key: &str, value: &str) -> Result<()> {
    let bad = || Error::InvalidInput(format!("bad value '{value}' for {key}"));
    match key {
        "max_outer_iters" => opts.max_outer_iters = value.parse().map_err(|_| bad())?,
        "outer_tol" => opts.outer_tol = value.parse().map_err(|_| bad())?,
        "gamma_floor" => opts.gamma_floor = value.parse().map_err(|_| bad())?,
        "kkt_tol" => opts.inner.kkt_tol = value.parse().map_err(|_| bad())?,
        _ => unreachable!(),
    }
    Ok(())
}

fn split_list(value: &str) -> impl Iterator<Item = &str> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty())
}

/// A comma-separated list of values and `start:step:stop` ranges.
pub fn parse_snr_grid(value: &str) -> Result<Vec<f64>> {
    let bad = |v: &str| Error::InvalidInput(format!("bad SNR entry '{v}'"));
    let mut out = Vec::new();
    for item in split_list(value) {
        let parts: Vec<&str> = item.split(':').collect();
        match parts[..] {
            [v] => out.push(v.trim().parse().map_err(|_| bad(item))?),
            [a, s, b] => {
                let (a, s, b): (f64, f64, f64) = (
                    a.trim().parse().map_err(|_| bad(item))?,
                    s.trim().parse().map_err(|_| bad(item))?,
                    b.trim().parse().map_err(|_| bad(item))?,
                );
                if s.is_nan() || s <= 0.0 || a.is_nan() || b.is_nan() || b < a {
                    return Err(bad(item));
                }
                let count = ((b - a) / s + 1e-9).floor() as usize;
                out.extend((0..=count).map(|i| a + i as f64 * s));
            }
            _ => return Err(bad(item)),
        }
    }
    if out.is_empty() {
        return Err(Error::InvalidInput("empty SNR grid".into()));
    }
    Ok(out)
}
