//! Flat `key = value` experiment configuration files.

use std::path::{Path, PathBuf};

use crate::algo::Algorithm;
use crate::experiment::ExperimentConfig;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}:{line}: {msg}")]
    Parse { path: PathBuf, line: usize, msg: String },
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn list<T: std::str::FromStr>(v: &str) -> Result<Vec<T>, String>
where
    T::Err: std::fmt::Display,
{
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|e| format!("{s:?}: {e}")))
        .collect()
}

fn one<T: std::str::FromStr>(v: &str) -> Result<T, String>
where
    T::Err: std::fmt::Display,
{
    v.parse::<T>().map_err(|e| format!("{v:?}: {e}"))
}

/// Applies one `key = value` setting.
pub fn apply(config: &mut ExperimentConfig, key: &str, value: &str) -> Result<(), String> {
    match key {
        "node_counts" => config.node_counts = list(value)?,
        "degrees" => config.degrees = list(value)?,
        "seeds_per_topology" => config.seeds_per_topology = one(value)?,
        "budget_secs" => config.budget_secs = one(value)?,
        "max_iterations" => config.max_iterations = Some(one(value)?),
        "algorithms" => config.algorithms = list::<Algorithm>(value)?,
        "k_percent" => config.k_percent = list(value)?,
        "output_dir" => config.output_dir = PathBuf::from(value),
        "master_seed" | "seed" => config.master_seed = one(value)?,
        "e" => config.e = one(value)?,
        "alpha_factor" => config.alpha_factor = one(value)?,
        "workers" => config.workers = one(value)?,
        "full" => {
            if one::<bool>(value)? {
                *config = config.clone().full_grid();
            }
        }
        _ => return Err(format!("unknown key {key:?}")),
    }
    Ok(())
}

pub fn parse_config(text: &str, origin: &Path) -> Result<ExperimentConfig, ConfigError> {
    let mut config = ExperimentConfig::default();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| ConfigError::Parse {
            path: origin.to_path_buf(),
            line: i + 1,
            msg,
        };
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| err("expected key = value".into()))?;
        apply(&mut config, k.trim(), v.trim()).map_err(err)?;
    }
    config.validate()?;
    Ok(config)
}

pub fn read_config(path: impl AsRef<Path>) -> Result<ExperimentConfig, ConfigError> {
    let path = path.as_ref();
    parse_config(&std::fs::read_to_string(path)?, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_lists_and_scalars() {
        let c = parse_config(
            "# sweep\nnode_counts = 100, 200\nalgorithms=kk,fr\nbudget_secs=2.5\nseed=9\n",
            Path::new("c"),
        )
        .unwrap();
        assert_eq!(c.node_counts, vec![100, 200]);
        assert_eq!(c.algorithms, vec![Algorithm::Kk, Algorithm::Fr]);
        assert_eq!(c.budget_secs, 2.5);
        assert_eq!(c.master_seed, 9);
    }

    #[test]
    fn reports_line_numbers() {
        let e = parse_config("seed=1\nbogus=2\n", Path::new("c")).unwrap_err();
        assert_eq!(e.to_string(), "c:2: unknown key \"bogus\"");
    }

    #[test]
    fn rejects_empty_lists() {
        assert!(parse_config("degrees=\n", Path::new("c")).is_err());
    }
}
