//! Geometry flags for `gen-horn` and `roundtrip`.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use webster_core::horns::{ear_canal_suite, HornSpec, Tube, UMBO_OFFSET};

const MM: f64 = 1e-3;
const MM2: f64 = 1e-6;

#[derive(Debug, Clone, Subcommand)]
pub enum HornKind {
    Uniform {
        #[arg(long)]
        area_mm2: f64,
        #[arg(long)]
        length_mm: f64,
    },
    /// `A(x) = a0·exp(flare·x)`.
    Exponential {
        #[arg(long)]
        a0_mm2: f64,
        /// Flare constant, 1/m.
        #[arg(long, allow_hyphen_values = true)]
        flare: f64,
        #[arg(long)]
        length_mm: f64,
    },
    Conical {
        #[arg(long)]
        r0_mm: f64,
        #[arg(long)]
        r1_mm: f64,
        #[arg(long)]
        length_mm: f64,
    },
    Parabolic {
        #[arg(long)]
        a0_mm2: f64,
        #[arg(long)]
        a1_mm2: f64,
        #[arg(long)]
        length_mm: f64,
    },
    TaperedParabolic {
        #[arg(long)]
        a0_mm2: f64,
        #[arg(long)]
        a1_mm2: f64,
        #[arg(long)]
        a_end_mm2: f64,
        #[arg(long)]
        taper_mm: f64,
        #[arg(long)]
        length_mm: f64,
    },
    /// Piecewise-constant tubes read from a TOML file (`[[tubes]]` with
    /// `length` and `diameter` in m).
    Stepped {
        #[arg(long)]
        tubes: PathBuf,
    },
    /// Random piecewise-constant tubes drawn from the seed.
    RandomStepped {
        #[arg(long, default_value_t = 5)]
        plateaus: usize,
    },
    /// The ten built-in ear-canal-like geometries.
    Suite,
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    /// Close the duct with an oblique eardrum wedge of this length, mm.
    #[arg(long, global = true)]
    pub oblique_mm: Option<f64>,
    /// Cross-section at the innermost corner of the wedge, mm².
    #[arg(long, global = true, default_value_t = 1.0)]
    pub tip_area_mm2: f64,
    /// Spacing of the synthetic measurement grid, Hz.
    #[arg(long, global = true, default_value_t = 100.0)]
    pub df_hz: f64,
    /// Highest synthetic frequency, kHz. Also the highest valid frequency.
    #[arg(long, global = true, default_value_t = 20.0)]
    pub f_max: f64,
    /// Distance of the medial pressure reference in front of the end, mm.
    #[arg(long, global = true, default_value_t = UMBO_OFFSET / MM)]
    pub medial_offset_mm: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TubeFile {
    tubes: Vec<Tube>,
    /// Free-form provenance note.
    #[serde(default)]
    #[allow(dead_code)]
    note: Option<String>,
}

pub fn read_tubes(path: &Path) -> Result<Vec<Tube>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let file: TubeFile = toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(file.tubes)
}

fn random_tubes(n: usize, seed: u64) -> Result<Vec<Tube>> {
    if n == 0 {
        bail!("need at least one plateau");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n)
        .map(|_| Tube {
            length: rng.random_range(2.0..8.0) * MM,
            diameter: rng.random_range(5.0..10.0) * MM,
        })
        .collect())
}

impl SynthArgs {
    fn wrap(&self, body: HornSpec) -> HornSpec {
        match self.oblique_mm {
            Some(w) => HornSpec::ObliqueEnd {
                body: Box::new(body),
                wedge: w * MM,
                tip_area: self.tip_area_mm2 * MM2,
            },
            None => body,
        }
    }

    pub fn frequencies(&self) -> Result<Vec<f64>> {
        if !(self.df_hz > 0.0 && self.f_max * 1e3 >= self.df_hz) {
            bail!("need 0 < df_hz <= f_max, got {} Hz and {} kHz", self.df_hz, self.f_max);
        }
        Ok(webster_core::horns::measurement_grid(self.df_hz, self.f_max * 1e3))
    }

    pub fn medial_offset(&self) -> f64 {
        self.medial_offset_mm * MM
    }
}

/// Named geometries for one invocation; `suite` yields ten, every other kind one.
pub fn specs(kind: &HornKind, synth: &SynthArgs, seed: u64) -> Result<Vec<(String, HornSpec)>> {
    let one = |spec: HornSpec| -> Result<Vec<(String, HornSpec)>> {
        let spec = synth.wrap(spec);
        spec.validate()?;
        Ok(vec![(spec.name().to_string(), spec)])
    };
    match kind {
        HornKind::Uniform { area_mm2, length_mm } => one(HornSpec::Uniform {
            area: area_mm2 * MM2,
            length: length_mm * MM,
        }),
        HornKind::Exponential { a0_mm2, flare, length_mm } => one(HornSpec::Exponential {
            a0: a0_mm2 * MM2,
            flare: *flare,
            length: length_mm * MM,
        }),
        HornKind::Conical { r0_mm, r1_mm, length_mm } => one(HornSpec::Conical {
            r0: r0_mm * MM,
            r1: r1_mm * MM,
            length: length_mm * MM,
        }),
        HornKind::Parabolic { a0_mm2, a1_mm2, length_mm } => one(HornSpec::Parabolic {
            a0: a0_mm2 * MM2,
            a1: a1_mm2 * MM2,
            length: length_mm * MM,
        }),
        HornKind::TaperedParabolic { a0_mm2, a1_mm2, a_end_mm2, taper_mm, length_mm } => one(HornSpec::TaperedParabolic {
            a0: a0_mm2 * MM2,
            a1: a1_mm2 * MM2,
            a_end: a_end_mm2 * MM2,
            taper: taper_mm * MM,
            length: length_mm * MM,
        }),
        HornKind::Stepped { tubes } => one(HornSpec::SteppedTubes { tubes: read_tubes(tubes)? }),
        HornKind::RandomStepped { plateaus } => one(HornSpec::SteppedTubes {
            tubes: random_tubes(*plateaus, seed)?,
        }),
        HornKind::Suite => Ok(ear_canal_suite()
            .into_iter()
            .enumerate()
            .map(|(i, s)| (format!("{i:02}_{}", s.name()), s))
            .collect()),
    }
}
