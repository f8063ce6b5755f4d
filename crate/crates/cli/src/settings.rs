//! Pipeline settings: defaults, then the optional TOML file (SI units), then
//! command-line flags (mm and kHz).

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use serde::{Deserialize, Serialize};
use webster_core::reflectance::SurgeVariant;
use webster_core::{FcutSetting, IntervalPreset, PipelineConfig, TerminationRule};

pub const SEED_ENV: &str = "WEBSTER_INVERSE_SEED";

const KHZ: f64 = 1e3;
const MM: f64 = 1e-3;
const MM2: f64 = 1e-6;

#[derive(Debug, Clone, Default, Args)]
pub struct PipelineArgs {
    /// Key-value TOML file in SI units; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Highest valid frequency, kHz [default: last input frequency].
    #[arg(long, global = true)]
    pub f_lim: Option<f64>,
    /// Window cutoff in kHz, `auto` or `off`.
    #[arg(long, global = true)]
    pub f_cut: Option<String>,
    /// Sampling rate of the reflectance, kHz [default: 3500].
    #[arg(long, global = true)]
    pub f_sup: Option<f64>,
    /// `surge1`, `surge2` or `geometric:<entrance area in mm²>`.
    #[arg(long, global = true)]
    pub surge: Option<String>,
    /// Depth of the inverse solution, mm [default: 50].
    #[arg(long, global = true)]
    pub l_max: Option<f64>,
    /// lme, epsilon, epsilon_corrected, tdrmax(_corrected), tdr50(_corrected),
    /// quarter or `fixed:<mm>`.
    #[arg(long, global = true)]
    pub termination: Option<String>,
    /// Preset name or `lo,hi` in mm.
    #[arg(long, global = true)]
    pub interval: Option<String>,
    /// Density, kg/m³.
    #[arg(long, global = true)]
    pub rho: Option<f64>,
    /// Speed of sound, m/s.
    #[arg(long, global = true)]
    pub c: Option<f64>,
    /// Seed for random geometries [fallback: WEBSTER_INVERSE_SEED, then 0].
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub legacy_nsup: Option<u32>,
    #[arg(long, global = true)]
    pub legacy_amp_corr: bool,
    #[arg(long, global = true)]
    pub legacy_trev_add: bool,
    /// Worker threads for independent sweep items.
    #[arg(long, global = true)]
    pub parallel: Option<usize>,
}

/// Contents of `--config`. Every key is optional and in SI units.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub f_lim: Option<f64>,
    pub f_cut: Option<FcutSetting>,
    pub f_sup: Option<f64>,
    /// `surge1`, `surge2` or `geometric:<m²>`.
    pub surge: Option<String>,
    pub l_max: Option<f64>,
    pub termination: Option<TerminationRule>,
    pub interval: Option<IntervalValue>,
    pub rho: Option<f64>,
    pub c: Option<f64>,
    pub seed: Option<u64>,
    pub legacy_nsup: Option<u32>,
    pub legacy_amp_corr: Option<bool>,
    pub legacy_trev_add: Option<bool>,
    pub parallel: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum IntervalValue {
    Preset(String),
    Bounds([f64; 2]),
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedSource {
    Flag,
    ConfigFile,
    Environment,
    Default,
}

/// Everything a command needs besides its own inputs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Settings {
    pub pipeline: PipelineConfig,
    pub seed: u64,
    pub seed_source: SeedSource,
    pub parallel: Option<usize>,
    pub config_file: Option<PathBuf>,
}

fn parse_surge(s: &str, area_unit: f64) -> Result<SurgeVariant> {
    Ok(match s {
        "surge1" => SurgeVariant::Surge1,
        "surge2" => SurgeVariant::Surge2,
        _ => match s.strip_prefix("geometric:").map(str::parse::<f64>) {
            Some(Ok(a)) if a > 0.0 => SurgeVariant::Geometric { area: a * area_unit },
            _ => bail!("surge must be surge1, surge2 or geometric:<area>, got `{s}`"),
        },
    })
}

fn parse_termination_mm(s: &str) -> Result<TerminationRule> {
    if let Some(v) = s.strip_prefix("fixed:") {
        let mm: f64 = v.parse().with_context(|| format!("`{v}` is not a length in mm"))?;
        return Ok(TerminationRule::Fixed(mm * MM));
    }
    Ok(s.parse()?)
}

fn parse_interval_mm(s: &str) -> Result<[f64; 2]> {
    if let Ok(p) = s.parse::<IntervalPreset>() {
        return Ok(p.bounds());
    }
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [lo, hi] => Ok([lo.parse::<f64>()? * MM, hi.parse::<f64>()? * MM]),
        _ => bail!("interval must be a preset or `lo,hi` in mm, got `{s}`"),
    }
}

fn parse_fcut_khz(s: &str) -> Result<FcutSetting> {
    Ok(match s.parse::<FcutSetting>()? {
        FcutSetting::Hz(v) => FcutSetting::Hz(v * KHZ),
        other => other,
    })
}

impl PipelineArgs {
    pub fn resolve(&self) -> Result<Settings> {
        let file = match &self.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        let mut cfg = PipelineConfig::default();

        if let Some(v) = file.f_lim {
            cfg.f_lim = Some(v);
        }
        if let Some(v) = file.f_cut {
            cfg.f_cut = v;
        }
        if let Some(v) = file.f_sup {
            cfg.f_sup = v;
        }
        if let Some(v) = &file.surge {
            cfg.surge = parse_surge(v, 1.0)?;
        }
        if let Some(v) = file.l_max {
            cfg.l_max = v;
        }
        if let Some(v) = file.termination {
            cfg.termination = v;
        }
        match &file.interval {
            Some(IntervalValue::Preset(p)) => cfg.interval = p.parse::<IntervalPreset>()?.bounds(),
            Some(IntervalValue::Bounds(b)) => cfg.interval = *b,
            None => {}
        }
        if let Some(v) = file.rho {
            cfg.constants.rho = v;
        }
        if let Some(v) = file.c {
            cfg.constants.c = v;
        }
        cfg.legacy.n_sup = file.legacy_nsup.or(cfg.legacy.n_sup);
        cfg.legacy.amplitude_correction = file.legacy_amp_corr.unwrap_or(false);
        cfg.legacy.time_reversed_addition = file.legacy_trev_add.unwrap_or(false);

        if let Some(v) = self.f_lim {
            cfg.f_lim = Some(v * KHZ);
        }
        if let Some(v) = &self.f_cut {
            cfg.f_cut = parse_fcut_khz(v)?;
        }
        if let Some(v) = self.f_sup {
            cfg.f_sup = v * KHZ;
        }
        if let Some(v) = &self.surge {
            cfg.surge = parse_surge(v, MM2)?;
        }
        if let Some(v) = self.l_max {
            cfg.l_max = v * MM;
        }
        if let Some(v) = &self.termination {
            cfg.termination = parse_termination_mm(v)?;
        }
        if let Some(v) = &self.interval {
            cfg.interval = parse_interval_mm(v)?;
        }
        if let Some(v) = self.rho {
            cfg.constants.rho = v;
        }
        if let Some(v) = self.c {
            cfg.constants.c = v;
        }
        if self.legacy_nsup.is_some() {
            cfg.legacy.n_sup = self.legacy_nsup;
        }
        cfg.legacy.amplitude_correction |= self.legacy_amp_corr;
        cfg.legacy.time_reversed_addition |= self.legacy_trev_add;
        cfg.constants.validate()?;

        let env_seed = match std::env::var(SEED_ENV) {
            Ok(s) => Some(s.trim().parse::<u64>().with_context(|| format!("{SEED_ENV}=`{s}` is not an integer"))?),
            Err(_) => None,
        };
        let (seed, seed_source) = match (self.seed, file.seed, env_seed) {
            (Some(s), _, _) => (s, SeedSource::Flag),
            (None, Some(s), _) => (s, SeedSource::ConfigFile),
            (None, None, Some(s)) => (s, SeedSource::Environment),
            _ => (0, SeedSource::Default),
        };
        let parallel = self.parallel.or(file.parallel);
        if parallel == Some(0) {
            bail!("--parallel needs at least one thread");
        }
        Ok(Settings {
            pipeline: cfg,
            seed,
            seed_source,
            parallel,
            config_file: self.config.clone(),
        })
    }
}

/// Parse a kHz grid: comma-separated values and `start:stop:step` ranges.
pub fn parse_grid_khz(s: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let nums: Vec<f64> = part
            .split(':')
            .map(|v| v.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .with_context(|| format!("bad grid entry `{part}`"))?;
        match nums.as_slice() {
            [v] => out.push(v * KHZ),
            [start, stop, step] if *step > 0.0 && stop >= start => {
                let n = ((stop - start) / step + 1e-9).floor() as usize;
                // Index-based so that long ranges do not accumulate rounding.
                out.extend((0..=n).map(|i| (start + i as f64 * step) * KHZ));
            }
            _ => bail!("grid entry `{part}` must be a value or start:stop:step"),
        }
    }
    if out.is_empty() {
        bail!("grid `{s}` is empty");
    }
    Ok(out)
}
