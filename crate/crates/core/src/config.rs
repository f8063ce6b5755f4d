use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::calibration::fcut_model;
use crate::error::{Error, Result};
use crate::reflectance::{BlackmanWindow, Extrapolation, SurgeOptions, SurgeVariant, DEFAULT_AREA_GUESS};
use crate::signal::{fft_length_for, FrequencyGrid, PhysicalConstants};

pub const DEFAULT_F_SUP: f64 = 3.5e6;
pub const DEFAULT_L_MAX: f64 = 0.05;

/// Named length intervals for the termination search, m.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntervalPreset {
    Entrance,
    BetweenBends,
    SecondBend,
    BeyondSecondBend,
}

impl IntervalPreset {
    pub const ALL: [IntervalPreset; 4] = [
        IntervalPreset::Entrance,
        IntervalPreset::BetweenBends,
        IntervalPreset::SecondBend,
        IntervalPreset::BeyondSecondBend,
    ];

    pub fn bounds(self) -> [f64; 2] {
        match self {
            IntervalPreset::Entrance => [15e-3, 45e-3],
            IntervalPreset::BetweenBends => [10e-3, 35e-3],
            IntervalPreset::SecondBend => [5e-3, 30e-3],
            IntervalPreset::BeyondSecondBend => [3e-3, 20e-3],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            IntervalPreset::Entrance => "entrance",
            IntervalPreset::BetweenBends => "between-bends",
            IntervalPreset::SecondBend => "second-bend",
            IntervalPreset::BeyondSecondBend => "beyond-second-bend",
        }
    }
}

impl FromStr for IntervalPreset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        IntervalPreset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown interval preset `{s}`")))
    }
}

/// Cutoff of the Blackman window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FcutRepr", into = "FcutRepr")]
pub enum FcutSetting {
    /// Linear model of the highest valid frequency.
    Auto,
    /// No window.
    Off,
    Hz(f64),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum FcutRepr {
    Hz(f64),
    Text(String),
}

impl TryFrom<FcutRepr> for FcutSetting {
    type Error = Error;
    fn try_from(r: FcutRepr) -> Result<Self> {
        match r {
            FcutRepr::Hz(v) => Ok(FcutSetting::Hz(v)),
            FcutRepr::Text(s) => s.parse(),
        }
    }
}

impl From<FcutSetting> for FcutRepr {
    fn from(s: FcutSetting) -> Self {
        match s {
            FcutSetting::Hz(v) => FcutRepr::Hz(v),
            other => FcutRepr::Text(other.to_string()),
        }
    }
}

impl FromStr for FcutSetting {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(FcutSetting::Auto),
            "off" | "none" => Ok(FcutSetting::Off),
            _ => s
                .parse::<f64>()
                .map(FcutSetting::Hz)
                .map_err(|_| Error::InvalidConfig(format!("f_cut must be a number, `auto` or `off`, got `{s}`"))),
        }
    }
}

impl fmt::Display for FcutSetting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FcutSetting::Auto => write!(f, "auto"),
            FcutSetting::Off => write!(f, "off"),
            FcutSetting::Hz(v) => write!(f, "{v}"),
        }
    }
}

/// Rule selecting the depth at which the estimated area function is cut off
/// before predicting the transfer impedance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum TerminationRule {
    /// Least level error against a reference transfer impedance.
    Lme,
    Epsilon,
    EpsilonCorrected,
    Tdrmax,
    TdrmaxCorrected,
    Tdr50,
    Tdr50Corrected,
    Quarter,
    /// Fixed depth, m.
    Fixed(f64),
}

impl FromStr for TerminationRule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "lme" => TerminationRule::Lme,
            "epsilon" => TerminationRule::Epsilon,
            "epsilon_corrected" => TerminationRule::EpsilonCorrected,
            "tdrmax" => TerminationRule::Tdrmax,
            "tdrmax_corrected" => TerminationRule::TdrmaxCorrected,
            "tdr50" => TerminationRule::Tdr50,
            "tdr50_corrected" => TerminationRule::Tdr50Corrected,
            "quarter" => TerminationRule::Quarter,
            _ => {
                let v = s
                    .strip_prefix("fixed:")
                    .and_then(|v| v.parse::<f64>().ok())
                    .ok_or_else(|| Error::InvalidConfig(format!("unknown termination rule `{s}`")))?;
                TerminationRule::Fixed(v)
            }
        })
    }
}

impl TryFrom<String> for TerminationRule {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<TerminationRule> for String {
    fn from(r: TerminationRule) -> Self {
        r.to_string()
    }
}

impl fmt::Display for TerminationRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TerminationRule::Lme => "lme",
            TerminationRule::Epsilon => "epsilon",
            TerminationRule::EpsilonCorrected => "epsilon_corrected",
            TerminationRule::Tdrmax => "tdrmax",
            TerminationRule::TdrmaxCorrected => "tdrmax_corrected",
            TerminationRule::Tdr50 => "tdr50",
            TerminationRule::Tdr50Corrected => "tdr50_corrected",
            TerminationRule::Quarter => "quarter",
            TerminationRule::Fixed(v) => return write!(f, "fixed:{v}"),
        };
        f.write_str(s)
    }
}

/// Options reproducing the original integer-upsampling method.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LegacyOptions {
    /// Upsampling factor; switches the grid to `f_sup = n_sup·2·f_lim` with a
    /// zero-padded reflectance.
    pub n_sup: Option<u32>,
    pub amplitude_correction: bool,
    pub time_reversed_addition: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    /// Highest valid frequency, Hz. `None` takes it from the input spectrum.
    pub f_lim: Option<f64>,
    pub f_cut: FcutSetting,
    pub f_sup: f64,
    pub surge: SurgeVariant,
    /// Entrance area behind the first surge guess, m².
    pub area_guess: f64,
    pub l_max: f64,
    pub termination: TerminationRule,
    /// Search interval for termination lengths, m.
    pub interval: [f64; 2],
    pub constants: PhysicalConstants,
    pub legacy: LegacyOptions,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            f_lim: None,
            f_cut: FcutSetting::Auto,
            f_sup: DEFAULT_F_SUP,
            surge: SurgeVariant::Surge1,
            area_guess: DEFAULT_AREA_GUESS,
            l_max: DEFAULT_L_MAX,
            termination: TerminationRule::EpsilonCorrected,
            interval: IntervalPreset::Entrance.bounds(),
            constants: PhysicalConstants::default(),
            legacy: LegacyOptions::default(),
        }
    }
}

/// Configuration with every automatic choice made for a given spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedConfig {
    pub f_lim: f64,
    pub f_cut: Option<f64>,
    pub grid: FrequencyGrid,
    pub surge: SurgeVariant,
    pub area_guess: f64,
    pub l_max: f64,
    pub termination: TerminationRule,
    pub interval: [f64; 2],
    pub constants: PhysicalConstants,
    pub legacy: LegacyOptions,
}

impl PipelineConfig {
    pub fn resolve(&self, spectrum_f_lim: f64) -> Result<ResolvedConfig> {
        self.constants.validate()?;
        let f_lim = self.f_lim.unwrap_or(spectrum_f_lim);
        if !(f_lim > 0.0 && f_lim.is_finite()) {
            return Err(Error::InvalidConfig(format!("f_lim must be positive, got {f_lim}")));
        }
        if !(self.l_max > 0.0 && self.l_max.is_finite()) {
            return Err(Error::InvalidConfig(format!("l_max must be positive, got {}", self.l_max)));
        }
        let [lo, hi] = self.interval;
        if !(lo >= 0.0 && lo <= hi) {
            return Err(Error::InvalidConfig(format!("interval [{lo}, {hi}] is not ordered")));
        }
        let grid = match self.legacy.n_sup {
            Some(n) if n >= 1 => {
                let f_sup = n as f64 * 2.0 * f_lim;
                FrequencyGrid::with_length(f_sup, n as usize * fft_length_for(2.0 * f_lim))?
            }
            Some(n) => return Err(Error::InvalidConfig(format!("n_sup must be at least 1, got {n}"))),
            None => FrequencyGrid::new(self.f_sup)?,
        };
        if grid.f_sup / 2.0 < f_lim {
            return Err(Error::MismatchedGrid {
                half_rate_hz: grid.f_sup / 2.0,
                f_lim_hz: f_lim,
            });
        }
        let f_cut = match self.f_cut {
            FcutSetting::Auto => Some(fcut_model(f_lim)),
            FcutSetting::Off => None,
            FcutSetting::Hz(v) => Some(v),
        };
        if let Some(fc) = f_cut {
            if !(fc > 0.0 && fc <= grid.f_sup / 2.0) {
                return Err(Error::InvalidConfig(format!(
                    "f_cut {fc} Hz must lie in (0, f_sup/2 = {}]",
                    grid.f_sup / 2.0
                )));
            }
        }
        Ok(ResolvedConfig {
            f_lim,
            f_cut,
            grid,
            surge: self.surge,
            area_guess: self.area_guess,
            l_max: self.l_max,
            termination: self.termination,
            interval: self.interval,
            constants: self.constants,
            legacy: self.legacy,
        })
    }
}

impl ResolvedConfig {
    pub fn surge_options(&self) -> Result<SurgeOptions> {
        let window = self.f_cut.map(|fc| BlackmanWindow::new(fc, &self.grid)).transpose()?;
        let mut opts = SurgeOptions::new(self.surge, window, self.constants);
        opts.area_guess = self.area_guess;
        if let Some(n) = self.legacy.n_sup {
            opts.extrapolation = Extrapolation::ZeroReflectance;
            if self.legacy.amplitude_correction {
                opts.amplitude_correction = Some(n);
            }
        }
        opts.time_reversed_addition = self.legacy.time_reversed_addition;
        Ok(opts)
    }
}
