//! Flag/config-file resolution shared by the subcommands.
//!
//! Every subcommand accepts `--config FILE` with flat `key = value` pairs;
//! explicit flags win over config values, which win over defaults. The
//! recognized keys mirror the long flag names with `-` replaced by `_`.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use grass_core::config::KvConfig;
use grass_core::graph::FeatureMode;

/// Marker for errors that should exit with the usage code instead of the
/// data code.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(UsageError(msg.into()))
}

/// Optional config layer under the explicit flags.
pub struct Layer {
    cfg: KvConfig,
}

impl Layer {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let cfg = match path {
            Some(p) => KvConfig::load(p).with_context(|| format!("reading {}", p.display()))?,
            None => KvConfig::new(),
        };
        Ok(Self { cfg })
    }

    /// Flag value, else config value, else default.
    pub fn get<T>(&self, flag: Option<T>, key: &str, default: T) -> Result<T>
    where
        T: std::str::FromStr + Clone,
    {
        if let Some(v) = flag {
            return Ok(v);
        }
        match self.cfg.get(key) {
            Some(raw) => raw
                .parse()
                .map_err(|_| usage(format!("config key {key}: cannot parse {raw:?}"))),
            None => Ok(default),
        }
    }

    pub fn get_bool(&self, flag: bool, key: &str) -> Result<bool> {
        if flag {
            return Ok(true);
        }
        self.get(None, key, false)
    }
}

/// Parses `--feature-mode` together with `--feature-seed`.
pub fn feature_mode(layer: &Layer, flag: Option<String>, seed_flag: Option<u64>) -> Result<FeatureMode> {
    let tag = layer.get(flag, "feature_mode", "custom+pe".to_string())?;
    let seed = layer.get(seed_flag, "feature_seed", 0u64)?;
    FeatureMode::from_tag(&tag, seed).ok_or_else(|| {
        usage(format!(
            "unknown feature mode {tag:?} (expected custom+pe, custom, random or node-type)"
        ))
    })
}

/// Expands instance arguments: directories become their sorted `*.cnf`
/// contents, plain files pass through.
pub fn collect_instances(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for input in inputs {
        if input.is_dir() {
            let mut found = Vec::new();
            for entry in std::fs::read_dir(input)
                .with_context(|| format!("reading directory {}", input.display()))?
            {
                let path = entry?.path();
                if path.extension().is_some_and(|e| e == "cnf") {
                    found.push(path);
                }
            }
            found.sort();
            out.extend(found);
        } else {
            out.push(input.clone());
        }
    }
    if out.is_empty() {
        return Err(usage("no instance files found"));
    }
    Ok(out)
}

/// Parses repeated `--solver name=command template` flags.
pub fn parse_solver_flags(flags: &[String]) -> Result<Vec<grass_core::runner::SolverCommand>> {
    flags
        .iter()
        .map(|raw| {
            let (name, template) = raw
                .split_once('=')
                .ok_or_else(|| usage(format!("--solver {raw:?}: expected name=command")))?;
            if !template.contains("{instance}") {
                return Err(usage(format!(
                    "--solver {name}: command template must contain {{instance}}"
                )));
            }
            Ok(grass_core::runner::SolverCommand {
                name: name.trim().to_string(),
                template: template.trim().to_string(),
            })
        })
        .collect()
}
