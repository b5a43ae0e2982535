//! Parameter resolution: preset, then config file, then explicit flags.

use anyhow::{bail, Context, Result};
use clap::Args;
use cns_core::colorname::{self, ColorNameTable};
use cns_core::eval::SweepGrid;
use cns_core::ParamSet;
use std::path::PathBuf;

/// Environment variable consulted for a default table path.
pub const TABLE_ENV: &str = "CNS_TABLE";

#[derive(Args, Debug, Clone, Default)]
pub struct ParamFlags {
    /// Parameter preset: asd, ecssd, imgsal, or common (default)
    #[arg(long)]
    pub preset: Option<String>,

    /// Sample step of the threshold sweep, 1..=255
    #[arg(long)]
    pub delta: Option<u32>,

    /// Disk radius of the closing operation
    #[arg(long)]
    pub omega_c: Option<u32>,

    /// Disk radius of the reconstruction smoothing
    #[arg(long)]
    pub omega_r: Option<u32>,

    /// Saturation ratio of the intensity adjustment, (0, 0.1]
    #[arg(long)]
    pub theta_r: Option<f64>,

    /// Gamma of the intensity adjustment, [1, 3]
    #[arg(long)]
    pub theta_g: Option<f64>,

    /// Color name table file (default: $CNS_TABLE, else the built-in table)
    #[arg(long)]
    pub table: Option<PathBuf>,

    /// Cap on worker threads (default: available cores)
    #[arg(long)]
    pub threads: Option<usize>,

    /// Config file with `key = value` lines, overridden by flags
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Default, Clone)]
struct ConfigFile {
    preset: Option<String>,
    delta: Option<u32>,
    omega_c: Option<u32>,
    omega_r: Option<u32>,
    theta_r: Option<f64>,
    theta_g: Option<f64>,
    table: Option<PathBuf>,
}

fn parse_config(text: &str) -> Result<ConfigFile> {
    let mut cfg = ConfigFile::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!("config line {}: expected `key = value`", lineno + 1);
        };
        let key = key.trim();
        let value = value.trim();
        let parse = |what: &str| -> Result<f64> {
            value
                .parse::<f64>()
                .with_context(|| format!("config line {}: bad {what} value {value:?}", lineno + 1))
        };
        match key {
            "preset" => cfg.preset = Some(value.to_string()),
            "delta" => cfg.delta = Some(parse("delta")? as u32),
            "omega_c" => cfg.omega_c = Some(parse("omega_c")? as u32),
            "omega_r" => cfg.omega_r = Some(parse("omega_r")? as u32),
            "theta_r" => cfg.theta_r = Some(parse("theta_r")?),
            "theta_g" => cfg.theta_g = Some(parse("theta_g")?),
            "table" => cfg.table = Some(PathBuf::from(value)),
            other => bail!("config line {}: unknown key {other:?}", lineno + 1),
        }
    }
    Ok(cfg)
}

fn preset_named(name: &str) -> Result<ParamSet> {
    ParamSet::preset(name).ok_or_else(|| {
        anyhow::anyhow!("unknown preset {name:?} (expected asd, ecssd, imgsal, or common)")
    })
}

/// Effective parameters and table path after merging preset, config file,
/// and flags (flags win).
pub struct Settings {
    pub params: ParamSet,
    pub table_path: Option<PathBuf>,
}

pub fn resolve(flags: &ParamFlags) -> Result<Settings> {
    let config = match &flags.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("cannot read config {}", path.display()))?;
            parse_config(&text)?
        }
        None => ConfigFile::default(),
    };

    let preset_name = flags
        .preset
        .clone()
        .or(config.preset.clone())
        .unwrap_or_else(|| "common".to_string());
    let mut params = preset_named(&preset_name)?;

    if let Some(v) = config.delta {
        params.delta = v;
    }
    if let Some(v) = config.omega_c {
        params.omega_c = v;
    }
    if let Some(v) = config.omega_r {
        params.omega_r = v;
    }
    if let Some(v) = config.theta_r {
        params.theta_r = v;
    }
    if let Some(v) = config.theta_g {
        params.theta_g = v;
    }

    if let Some(v) = flags.delta {
        params.delta = v;
    }
    if let Some(v) = flags.omega_c {
        params.omega_c = v;
    }
    if let Some(v) = flags.omega_r {
        params.omega_r = v;
    }
    if let Some(v) = flags.theta_r {
        params.theta_r = v;
    }
    if let Some(v) = flags.theta_g {
        params.theta_g = v;
    }
    params.validate()?;

    let table_path = flags
        .table
        .clone()
        .or(config.table)
        .or_else(|| std::env::var_os(TABLE_ENV).map(PathBuf::from));

    Ok(Settings { params, table_path })
}

/// Loads the resolved table, warning and falling back to the built-in table
/// when none is available or the file fails to load.
pub fn load_table(settings: &Settings) -> ColorNameTable {
    match &settings.table_path {
        Some(path) => match colorname::load_table(path) {
            Ok(table) => table,
            Err(e) => {
                eprintln!(
                    "warning: failed to load color name table {}: {e}; using built-in fallback",
                    path.display()
                );
                colorname::fallback_table()
            }
        },
        None => {
            eprintln!(
                "warning: no color name table provided (--table or ${TABLE_ENV}); using built-in fallback"
            );
            colorname::fallback_table()
        }
    }
}

pub fn format_params(p: &ParamSet) -> String {
    format!(
        "delta={} omega_c={} omega_r={} theta_r={} theta_g={}",
        p.delta, p.omega_c, p.omega_r, p.theta_r, p.theta_g
    )
}

/// Parses a sweep axis spec: `name=start:step:end` or `name=v1,v2,...`.
pub fn parse_grid_spec(grid: &mut SweepGrid, spec: &str) -> Result<()> {
    let Some((name, values)) = spec.split_once('=') else {
        bail!("bad grid spec {spec:?}: expected name=start:step:end or name=v1,v2,...");
    };
    let values = if values.contains(':') {
        let parts: Vec<&str> = values.split(':').collect();
        if parts.len() != 3 {
            bail!("bad grid range {values:?}: expected start:step:end");
        }
        let start: f64 = parts[0]
            .parse()
            .with_context(|| format!("bad start in {spec:?}"))?;
        let step: f64 = parts[1]
            .parse()
            .with_context(|| format!("bad step in {spec:?}"))?;
        let end: f64 = parts[2]
            .parse()
            .with_context(|| format!("bad end in {spec:?}"))?;
        if step <= 0.0 || end < start {
            bail!("bad grid range {values:?}: need step > 0 and end >= start");
        }
        let mut out = Vec::new();
        let mut k = 0u32;
        loop {
            let v = start + step * k as f64;
            if v > end + 1e-9 {
                break;
            }
            out.push(v);
            k += 1;
        }
        out
    } else {
        values
            .split(',')
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .with_context(|| format!("bad value in {spec:?}"))
            })
            .collect::<Result<Vec<f64>>>()?
    };
    if values.is_empty() {
        bail!("grid spec {spec:?} produced no values");
    }

    let as_u32 = |vals: &[f64]| -> Result<Vec<u32>> {
        vals.iter()
            .map(|v| {
                if v.fract() != 0.0 || *v < 1.0 {
                    bail!("grid value {v} must be a positive integer for {name}");
                }
                Ok(*v as u32)
            })
            .collect()
    };
    match name.trim() {
        "delta" => grid.delta = as_u32(&values)?,
        "omega_c" => grid.omega_c = as_u32(&values)?,
        "omega_r" => grid.omega_r = as_u32(&values)?,
        "theta_r" => grid.theta_r = values,
        "theta_g" => grid.theta_g = values,
        other => bail!("unknown sweep parameter {other:?}"),
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_overridden_by_flags() {
        let cfg = parse_config("preset = imgsal\ndelta = 16 # comment\n").unwrap();
        assert_eq!(cfg.preset.as_deref(), Some("imgsal"));
        assert_eq!(cfg.delta, Some(16));

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cns.conf");
        std::fs::write(&path, "preset = imgsal\ndelta = 16\n").unwrap();
        let flags = ParamFlags {
            config: Some(path),
            delta: Some(4),
            ..Default::default()
        };
        let settings = resolve(&flags).unwrap();
        // preset from config, delta from flag, rest from the imgsal preset
        assert_eq!(settings.params.delta, 4);
        assert_eq!(settings.params.omega_c, 18);
    }

    #[test]
    fn default_preset_is_common() {
        let s = resolve(&ParamFlags::default()).unwrap();
        assert_eq!(s.params, ParamSet::common());
    }

    #[test]
    fn config_rejects_unknown_key() {
        assert!(parse_config("bogus = 1\n").is_err());
        assert!(parse_config("delta 8\n").is_err());
    }

    #[test]
    fn grid_spec_forms() {
        let mut grid = SweepGrid::default();
        parse_grid_spec(&mut grid, "omega_r=1:1:20").unwrap();
        assert_eq!(grid.omega_r, (1..=20).collect::<Vec<u32>>());
        parse_grid_spec(&mut grid, "theta_g=1.0:0.5:3.0").unwrap();
        assert_eq!(grid.theta_g, vec![1.0, 1.5, 2.0, 2.5, 3.0]);
        parse_grid_spec(&mut grid, "delta=8,16,32").unwrap();
        assert_eq!(grid.delta, vec![8, 16, 32]);
        assert!(parse_grid_spec(&mut grid, "nope=1:1:2").is_err());
        assert!(parse_grid_spec(&mut grid, "delta=0:1:2").is_err());
        assert!(parse_grid_spec(&mut grid, "delta").is_err());
    }
}
