//! `key = value` run configuration. Precedence: command-line flag, config file,
//! environment (thread count only), built-in default.

use std::collections::BTreeMap;
use std::path::Path;

use cavity_thermo::{CavityGeometry, SumPolicy, TailMethod};
use thiserror::Error;

/// Environment variable holding the default worker count.
pub const THREADS_ENV: &str = "CAVITY_THERMO_THREADS";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("line {line}: expected key = value, got '{text}'")]
    Syntax { line: usize, text: String },
    #[error("unknown key '{0}'")]
    UnknownKey(String),
    #[error("invalid value '{value}' for {key}: {reason}")]
    Invalid { key: String, value: String, reason: String },
}

/// Every recognised key with its default and a one-line description.
pub const KEYS: &[(&str, &str, &str)] = &[
    ("a1", "1", "edge length a1 (sets the ξ = πTa1 scale)"),
    ("a2", "1", "edge length a2"),
    ("a3", "1", "edge length a3"),
    ("xi_min", "0.01", "lower end of the ξ grid"),
    ("xi_max", "5", "upper end of the ξ grid"),
    ("points", "200", "number of grid points"),
    ("spacing", "linear", "grid spacing: linear or log"),
    ("max_shell_radius", "1024", "lattice truncation in units of the shortest edge"),
    ("rel_tol", "1e-8", "relative tolerance of lattice sums"),
    ("tail_method", "extrapolation", "none, continuum_integral or extrapolation"),
    ("image_budget", "2000000", "largest image table before the spectral route takes over"),
    ("cutoff_tolerance", "1e-12", "tolerance of the v_V, v_E solver"),
    ("csv", "sweep.csv", "CSV output path ('-' for stdout)"),
    ("json", "-", "JSON output path ('-' for stdout)"),
    ("threads", "0", "worker threads (0 = one per core)"),
    ("boundary_rows", "500", "most branch crossings given ξ±1e-6 row pairs"),
    ("oracle_block", "false", "add direct mode-sum comparisons to the sweep summary"),
    ("oracle_xi", "0.5,1,2", "ξ values used by the oracle suites"),
    ("appendix_grid", "9", "points per axis of the Appendix log grid"),
    ("k_max", "256", "Matsubara frequency truncation"),
    ("mu_truncation", "4", "smallest lattice truncation of the μ diagnostic"),
    ("m_gamma", "1", "photon mass for the massive suite"),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct XiGrid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub spacing: Spacing,
}

impl XiGrid {
    pub fn values(&self) -> Vec<f64> {
        let n = self.points;
        (0..n)
            .map(|i| {
                let f = i as f64 / (n - 1) as f64;
                if i == n - 1 {
                    return self.max;
                }
                match self.spacing {
                    Spacing::Linear => self.min + (self.max - self.min) * f,
                    Spacing::Log => self.min * (self.max / self.min).powf(f),
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub geometry: CavityGeometry,
    pub grid: XiGrid,
    pub policy: SumPolicy,
    pub cutoff_tolerance: f64,
    pub csv: String,
    pub json: String,
    pub threads: usize,
    pub boundary_rows: usize,
    pub oracle_block: bool,
    pub oracle_xi: Vec<f64>,
    pub appendix_grid: usize,
    pub k_max: u64,
    pub mu_truncation: u64,
    pub m_gamma: f64,
    /// Effective value of every key after all overrides.
    pub echo: BTreeMap<String, String>,
}

fn known(key: &str) -> bool {
    KEYS.iter().any(|(k, _, _)| *k == key)
}

/// Parses `key = value` lines; `#` starts a comment, blank lines are skipped.
pub fn parse_text(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| ConfigError::Syntax { line: i + 1, text: raw.to_string() })?;
        let k = k.trim();
        if !known(k) {
            return Err(ConfigError::UnknownKey(k.to_string()));
        }
        out.insert(k.to_string(), v.trim().to_string());
    }
    Ok(out)
}

pub fn read_file(path: &Path) -> Result<BTreeMap<String, String>, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| ConfigError::Read { path: path.display().to_string(), source })?;
    parse_text(&text)
}

fn invalid(key: &str, value: &str, reason: impl ToString) -> ConfigError {
    ConfigError::Invalid { key: key.to_string(), value: value.to_string(), reason: reason.to_string() }
}

fn num<T: std::str::FromStr>(m: &BTreeMap<String, String>, key: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    let v = &m[key];
    v.parse::<T>().map_err(|e| invalid(key, v, e))
}

fn positive(m: &BTreeMap<String, String>, key: &str) -> Result<f64, ConfigError> {
    let x: f64 = num(m, key)?;
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(invalid(key, &m[key], "must be positive"))
    }
}

/// Merges file values, flag values and the thread environment over the defaults.
pub fn resolve(
    file: &BTreeMap<String, String>,
    flags: &BTreeMap<String, String>,
    env_threads: Option<String>,
) -> Result<RunConfig, ConfigError> {
    let mut m: BTreeMap<String, String> = KEYS.iter().map(|(k, d, _)| (k.to_string(), d.to_string())).collect();
    if let Some(t) = env_threads {
        m.insert("threads".into(), t);
    }
    for (k, v) in file.iter().chain(flags.iter()) {
        if !known(k) {
            return Err(ConfigError::UnknownKey(k.clone()));
        }
        m.insert(k.clone(), v.clone());
    }

    let geometry = CavityGeometry::new(positive(&m, "a1")?, positive(&m, "a2")?, positive(&m, "a3")?)
        .map_err(|e| invalid("a1", &m["a1"], e))?;
    let spacing = match m["spacing"].as_str() {
        "linear" => Spacing::Linear,
        "log" => Spacing::Log,
        other => return Err(invalid("spacing", other, "expected linear or log")),
    };
    let grid = XiGrid { min: num(&m, "xi_min")?, max: num(&m, "xi_max")?, points: num(&m, "points")?, spacing };
    if !(grid.min >= 0.0) || !(grid.max > grid.min) || !grid.max.is_finite() {
        return Err(invalid("xi_max", &m["xi_max"], "need 0 ≤ xi_min < xi_max"));
    }
    if grid.points < 2 {
        return Err(invalid("points", &m["points"], "need at least 2"));
    }
    if spacing == Spacing::Log && grid.min == 0.0 {
        return Err(invalid("xi_min", &m["xi_min"], "log spacing needs xi_min > 0"));
    }
    let tail_method: TailMethod = m["tail_method"].parse().map_err(|e| invalid("tail_method", &m["tail_method"], e))?;
    let policy = SumPolicy {
        max_shell_radius: num(&m, "max_shell_radius")?,
        rel_tol: positive(&m, "rel_tol")?,
        tail_method,
        parallel: cfg!(feature = "parallel"),
        image_budget: num(&m, "image_budget")?,
    };
    policy.validate().map_err(|e| invalid("rel_tol", &m["rel_tol"], e))?;
    let oracle_xi = m["oracle_xi"]
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .ok()
                .filter(|x| *x > 0.0 && x.is_finite())
                .ok_or_else(|| invalid("oracle_xi", &m["oracle_xi"], "expected positive numbers separated by commas"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let oracle_block = match m["oracle_block"].as_str() {
        "true" | "1" | "yes" => true,
        "false" | "0" | "no" => false,
        other => return Err(invalid("oracle_block", other, "expected true or false")),
    };
    let k_max: u64 = num(&m, "k_max")?;
    if k_max < 8 {
        return Err(invalid("k_max", &m["k_max"], "need at least 8"));
    }
    let mu_truncation: u64 = num(&m, "mu_truncation")?;
    if mu_truncation < 1 {
        return Err(invalid("mu_truncation", &m["mu_truncation"], "need at least 1"));
    }
    Ok(RunConfig {
        geometry,
        grid,
        policy,
        cutoff_tolerance: positive(&m, "cutoff_tolerance")?,
        csv: m["csv"].clone(),
        json: m["json"].clone(),
        threads: num(&m, "threads")?,
        boundary_rows: num(&m, "boundary_rows")?,
        oracle_block,
        oracle_xi,
        appendix_grid: num(&m, "appendix_grid")?,
        k_max,
        mu_truncation,
        m_gamma: positive(&m, "m_gamma")?,
        echo: m,
    })
}
