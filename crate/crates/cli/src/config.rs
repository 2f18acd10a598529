//! Experiment configuration: a flat `key = value` file (a TOML-compatible
//! subset: comments, bare or quoted strings, integers, floats, booleans)
//! plus command-line flags that override file values.

use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

#[derive(Debug)]
pub struct ConfigError {
    pub message: String,
    /// 1-based line of the config file, when the error is positional.
    pub line: Option<usize>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "config line {line}: {}", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

fn err(message: impl Into<String>) -> ConfigError {
    ConfigError {
        message: message.into(),
        line: None,
    }
}

/// All experiment parameters. Every numeric field has an experiment
/// default; the master seed never does.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub master_seed: u64,
    pub n_paths: Option<usize>,
    pub dt: Option<f64>,
    pub t: Option<f64>,
    pub out_dir: PathBuf,
    pub tolerance_scale: f64,
    /// write plot-ready CSV surfaces next to results.json
    pub write_csv: bool,
    /// dump simulated ensembles in the binary format
    pub write_ensembles: bool,
}

impl ExperimentConfig {
    pub fn new(experiment: impl Into<String>, master_seed: u64) -> Self {
        ExperimentConfig {
            experiment: experiment.into(),
            master_seed,
            n_paths: None,
            dt: None,
            t: None,
            out_dir: PathBuf::from("wden_out"),
            tolerance_scale: 1.0,
            write_csv: false,
            write_ensembles: false,
        }
    }
}

/// Raw key-value view of a config file.
#[derive(Debug, Default, Clone)]
pub struct RawConfig {
    pub entries: BTreeMap<String, String>,
}

pub fn parse_config_text(text: &str) -> Result<RawConfig, ConfigError> {
    let mut entries = BTreeMap::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw_line.find('#') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let Some(eq) = line.find('=') else {
            return Err(ConfigError {
                message: format!("expected `key = value`, got `{line}`"),
                line: Some(line_no),
            });
        };
        let key = line[..eq].trim();
        let mut value = line[eq + 1..].trim().to_string();
        if key.is_empty() {
            return Err(ConfigError {
                message: "empty key before `=`".into(),
                line: Some(line_no),
            });
        }
        if (value.starts_with('"') && value.ends_with('"') && value.len() >= 2)
            || (value.starts_with('\'') && value.ends_with('\'') && value.len() >= 2)
        {
            value = value[1..value.len() - 1].to_string();
        }
        if entries.insert(key.to_string(), value).is_some() {
            return Err(ConfigError {
                message: format!("duplicate key `{key}`"),
                line: Some(line_no),
            });
        }
    }
    Ok(RawConfig { entries })
}

fn parse_field<T: std::str::FromStr>(
    raw: &RawConfig,
    key: &str,
) -> Result<Option<T>, ConfigError> {
    match raw.entries.get(key) {
        None => Ok(None),
        Some(v) => v
            .parse::<T>()
            .map(Some)
            .map_err(|_| err(format!("key `{key}`: cannot parse `{v}`"))),
    }
}

/// Parsed command line.
#[derive(Debug)]
pub struct Cli {
    pub command: Command,
}

#[derive(Debug)]
pub enum Command {
    List,
    Run(ExperimentConfig),
}

pub fn parse_cli(args: &[String]) -> Result<Cli, ConfigError> {
    let mut it = args.iter().peekable();
    let Some(cmd) = it.next() else {
        return Err(err(USAGE));
    };
    match cmd.as_str() {
        "list" => Ok(Cli {
            command: Command::List,
        }),
        "run" => {
            let mut config_path: Option<PathBuf> = None;
            let mut experiment: Option<String> = None;
            let mut seed: Option<u64> = None;
            let mut paths: Option<usize> = None;
            let mut dt: Option<f64> = None;
            let mut t: Option<f64> = None;
            let mut out: Option<PathBuf> = None;
            let mut tolerance_scale: Option<f64> = None;
            let mut write_csv: Option<bool> = None;
            let mut write_ensembles: Option<bool> = None;

            fn take<'a>(
                it: &mut std::iter::Peekable<std::slice::Iter<'a, String>>,
                flag: &str,
            ) -> Result<&'a String, ConfigError> {
                it.next()
                    .ok_or_else(|| err(format!("flag {flag} needs a value")))
            }

            while let Some(arg) = it.next() {
                match arg.as_str() {
                    "--config" => config_path = Some(PathBuf::from(take(&mut it, arg)?)),
                    "--experiment" => experiment = Some(take(&mut it, arg)?.clone()),
                    "--seed" => {
                        seed = Some(take(&mut it, arg)?.parse().map_err(|_| {
                            err("flag --seed needs an unsigned integer")
                        })?)
                    }
                    "--paths" => {
                        paths = Some(take(&mut it, arg)?.parse().map_err(|_| {
                            err("flag --paths needs an unsigned integer")
                        })?)
                    }
                    "--dt" => {
                        dt = Some(take(&mut it, arg)?.parse().map_err(|_| {
                            err("flag --dt needs a positive real")
                        })?)
                    }
                    "--t" => {
                        t = Some(take(&mut it, arg)?.parse().map_err(|_| {
                            err("flag --t needs a positive real")
                        })?)
                    }
                    "--out" => out = Some(PathBuf::from(take(&mut it, arg)?)),
                    "--tolerance-scale" => {
                        tolerance_scale = Some(take(&mut it, arg)?.parse().map_err(|_| {
                            err("flag --tolerance-scale needs a positive real")
                        })?)
                    }
                    "--write-csv" => write_csv = Some(true),
                    "--write-ensembles" => write_ensembles = Some(true),
                    other => return Err(err(format!("unknown flag `{other}`\n{USAGE}"))),
                }
            }

            // file values first, flags override
            let raw = match &config_path {
                Some(p) => {
                    let text = std::fs::read_to_string(p).map_err(|e| {
                        err(format!("cannot read config {}: {e}", p.display()))
                    })?;
                    parse_config_text(&text)?
                }
                None => RawConfig::default(),
            };
            let experiment = experiment
                .or_else(|| raw.entries.get("experiment").cloned())
                .ok_or_else(|| err("no experiment named (flag --experiment or key `experiment`)"))?;
            if !crate::experiments::catalog()
                .iter()
                .any(|c| c.name == experiment)
            {
                return Err(err(format!(
                    "unknown experiment `{experiment}`; run `wden list` for the catalog"
                )));
            }
            let seed = match seed.or(parse_field::<u64>(&raw, "master_seed")?) {
                Some(s) => s,
                None => {
                    return Err(err(
                        "master_seed is required; refusing to run with an entropy default",
                    ))
                }
            };
            let mut cfg = ExperimentConfig::new(experiment, seed);
            cfg.n_paths = paths.or(parse_field(&raw, "n_paths")?);
            cfg.dt = dt.or(parse_field(&raw, "dt")?);
            cfg.t = t.or(parse_field(&raw, "t")?);
            if let Some(o) = out.or_else(|| raw.entries.get("out").map(PathBuf::from)) {
                cfg.out_dir = o;
            }
            cfg.tolerance_scale = tolerance_scale
                .or(parse_field(&raw, "tolerance_scale")?)
                .unwrap_or(1.0);
            cfg.write_csv = write_csv
                .or(parse_field(&raw, "write_csv")?)
                .unwrap_or(false);
            cfg.write_ensembles = write_ensembles
                .or(parse_field(&raw, "write_ensembles")?)
                .unwrap_or(false);
            if let Some(dt) = cfg.dt {
                if !(dt > 0.0) {
                    return Err(err("dt must be positive"));
                }
            }
            if let Some(t) = cfg.t {
                if !(t > 0.0) {
                    return Err(err("t must be positive"));
                }
            }
            if !(cfg.tolerance_scale > 0.0) {
                return Err(err("tolerance_scale must be positive"));
            }
            Ok(Cli {
                command: Command::Run(cfg),
            })
        }
        other => Err(err(format!("unknown command `{other}`\n{USAGE}"))),
    }
}

pub const USAGE: &str = "usage:
  wden list
  wden run [--config <path>] [--experiment <name>] --seed <u64>
           [--paths <n>] [--dt <x>] [--t <x>] [--out <dir>]
           [--tolerance-scale <x>] [--write-csv] [--write-ensembles]";

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flat_file() {
        let raw = parse_config_text(
            "# comment\nexperiment = sphere_heat\nmaster_seed = 42\nn_paths = 1000\ndt = 0.001 # inline\nout = \"my_out\"\n",
        )
        .unwrap();
        assert_eq!(raw.entries["experiment"], "sphere_heat");
        assert_eq!(raw.entries["out"], "my_out");
        assert_eq!(raw.entries.len(), 5);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let e = parse_config_text("a = 1\nnot a pair\n").unwrap_err();
        assert_eq!(e.line, Some(2));
        let e = parse_config_text("a = 1\na = 2\n").unwrap_err();
        assert_eq!(e.line, Some(2));
    }

    #[test]
    fn flags_override_file_values() {
        let dir = std::env::temp_dir().join("wden_cfg_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("exp.toml");
        std::fs::write(&path, "experiment = sphere_heat\nmaster_seed = 1\nn_paths = 10\n").unwrap();
        let args: Vec<String> = [
            "run",
            "--config",
            path.to_str().unwrap(),
            "--paths",
            "77",
            "--seed",
            "9",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        let cli = parse_cli(&args).unwrap();
        match cli.command {
            Command::Run(cfg) => {
                assert_eq!(cfg.experiment, "sphere_heat");
                assert_eq!(cfg.master_seed, 9);
                assert_eq!(cfg.n_paths, Some(77));
            }
            _ => panic!("expected run"),
        }
    }

    #[test]
    fn missing_seed_is_an_error() {
        let args: Vec<String> = ["run", "--experiment", "sphere_heat"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let e = parse_cli(&args).unwrap_err();
        assert!(e.message.contains("master_seed"));
    }
}
