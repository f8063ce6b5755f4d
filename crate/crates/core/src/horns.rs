//! Synthetic duct geometries and their forward-model impedances.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::area::AreaFunction;
use crate::error::{Error, Result};
use crate::signal::{ImpedanceSpectrum, PhysicalConstants};
use crate::transmission::{input_impedance, transfer_impedance, LoadModel, TwoPortChain};

/// Distance of the medial pressure reference in front of the rigid end, m.
pub const UMBO_OFFSET: f64 = 3.5e-3;
/// Segment length of the fine forward model used for ground truth, m.
pub const FORWARD_MODEL_STEP: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tube {
    pub length: f64,
    pub diameter: f64,
}

impl Tube {
    pub fn area(&self) -> f64 {
        PI * self.diameter * self.diameter / 4.0
    }
}

/// Duct geometry, entrance at `x = 0`. All quantities SI (m, m², 1/m).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HornSpec {
    Uniform { area: f64, length: f64 },
    /// `A(x) = a0·exp(flare·x)`.
    Exponential { a0: f64, flare: f64, length: f64 },
    /// Radius varies linearly from `r0` to `r1`.
    Conical { r0: f64, r1: f64, length: f64 },
    /// Area varies linearly from `a0` to `a1` (radius ∝ sqrt(x + offset)).
    Parabolic { a0: f64, a1: f64, length: f64 },
    /// Parabolic from `a0` to `a1` at `length − taper`, then a raised-cosine
    /// taper down to `a_end` at the rigid end.
    TaperedParabolic { a0: f64, a1: f64, a_end: f64, taper: f64, length: f64 },
    SteppedTubes { tubes: Vec<Tube> },
    /// `body` closed by an oblique rigid plane: over the last `wedge` metres
    /// the cross-section shrinks like a circle swept by a chord, down to
    /// `tip_area` at the innermost corner.
    ObliqueEnd { body: Box<HornSpec>, wedge: f64, tip_area: f64 },
}

/// Fraction of a circle on one side of a chord that has swept the share `u`
/// of the diameter.
fn segment_fraction(u: f64) -> f64 {
    let d = (2.0 * u.clamp(0.0, 1.0) - 1.0).clamp(-1.0, 1.0);
    (d.acos() - d * (1.0 - d * d).sqrt()) / PI
}

impl HornSpec {
    pub fn length(&self) -> f64 {
        match self {
            HornSpec::Uniform { length, .. }
            | HornSpec::Exponential { length, .. }
            | HornSpec::Conical { length, .. }
            | HornSpec::Parabolic { length, .. }
            | HornSpec::TaperedParabolic { length, .. } => *length,
            HornSpec::SteppedTubes { tubes } => tubes.iter().map(|t| t.length).sum(),
            HornSpec::ObliqueEnd { body, .. } => body.length(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            HornSpec::Uniform { .. } => "uniform",
            HornSpec::Exponential { .. } => "exponential",
            HornSpec::Conical { .. } => "conical",
            HornSpec::Parabolic { .. } => "parabolic",
            HornSpec::TaperedParabolic { .. } => "tapered_parabolic",
            HornSpec::SteppedTubes { .. } => "stepped",
            HornSpec::ObliqueEnd { body, .. } => match **body {
                HornSpec::Uniform { .. } => "uniform_oblique",
                HornSpec::Exponential { .. } => "exponential_oblique",
                HornSpec::Conical { .. } => "conical_oblique",
                HornSpec::Parabolic { .. } => "parabolic_oblique",
                HornSpec::TaperedParabolic { .. } => "tapered_parabolic_oblique",
                HornSpec::SteppedTubes { .. } => "stepped_oblique",
                HornSpec::ObliqueEnd { .. } => "oblique",
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidHorn(m));
        let pos = |v: f64| v > 0.0 && v.is_finite();
        match self {
            HornSpec::Uniform { area, length } => {
                if !pos(*area) || !pos(*length) {
                    return bad(format!("uniform needs positive area/length, got {area}, {length}"));
                }
            }
            HornSpec::Exponential { a0, flare, length } => {
                if !pos(*a0) || !pos(*length) || !flare.is_finite() {
                    return bad(format!("exponential needs positive a0/length, got {a0}, {length}"));
                }
            }
            HornSpec::Conical { r0, r1, length } => {
                if !pos(*r0) || !pos(*r1) || !pos(*length) {
                    return bad("conical needs positive radii and length".into());
                }
            }
            HornSpec::Parabolic { a0, a1, length } => {
                if !pos(*a0) || !pos(*a1) || !pos(*length) {
                    return bad("parabolic needs positive areas and length".into());
                }
            }
            HornSpec::TaperedParabolic { a0, a1, a_end, taper, length } => {
                if !pos(*a0) || !pos(*a1) || !pos(*a_end) || !pos(*taper) || !pos(*length) || taper >= length {
                    return bad("tapered parabolic needs positive areas and 0 < taper < length".into());
                }
            }
            HornSpec::SteppedTubes { tubes } => {
                if tubes.is_empty() {
                    return bad("stepped tube list is empty".into());
                }
                if tubes.iter().any(|t| !pos(t.length) || !pos(t.diameter)) {
                    return bad("every tube needs positive length and diameter".into());
                }
            }
            HornSpec::ObliqueEnd { body, wedge, tip_area } => {
                body.validate()?;
                if !pos(*wedge) || *wedge >= body.length() || !pos(*tip_area) {
                    return bad("oblique end needs 0 < wedge < body length and a positive tip area".into());
                }
            }
        }
        Ok(())
    }

    /// True cross-sectional area at depth `x`.
    pub fn area_at(&self, x: f64) -> f64 {
        let len = self.length();
        let x = x.clamp(0.0, len);
        match self {
            HornSpec::Uniform { area, .. } => *area,
            HornSpec::Exponential { a0, flare, .. } => a0 * (flare * x).exp(),
            HornSpec::Conical { r0, r1, length } => {
                let r = r0 + (r1 - r0) * x / length;
                PI * r * r
            }
            HornSpec::Parabolic { a0, a1, length } => a0 + (a1 - a0) * x / length,
            HornSpec::TaperedParabolic { a0, a1, a_end, taper, length } => {
                let knee = length - taper;
                if x <= knee {
                    a0 + (a1 - a0) * x / knee
                } else {
                    let u = (x - knee) / taper;
                    a_end + (a1 - a_end) * 0.5 * (1.0 + (PI * u).cos())
                }
            }
            HornSpec::SteppedTubes { tubes } => {
                let mut start = 0.0;
                for t in tubes {
                    if x < start + t.length {
                        return t.area();
                    }
                    start += t.length;
                }
                tubes.last().map(Tube::area).unwrap_or(0.0)
            }
            HornSpec::ObliqueEnd { body, wedge, tip_area } => {
                let knee = len - wedge;
                if x <= knee {
                    body.area_at(x)
                } else {
                    let full = body.area_at(x);
                    tip_area + (full - tip_area).max(0.0) * segment_fraction((x - knee) / wedge)
                }
            }
        }
    }

    /// Piecewise-constant segments `(area, length)` describing the duct up to
    /// `depth`. Stepped tubes give one segment per tube; smooth horns use
    /// midpoint areas on pieces no longer than `max_step`.
    pub fn segments_to(&self, depth: f64, max_step: f64) -> Vec<(f64, f64)> {
        let depth = depth.min(self.length());
        let mut out = Vec::new();
        match self {
            HornSpec::SteppedTubes { tubes } => {
                let mut start = 0.0;
                for t in tubes {
                    if start >= depth {
                        break;
                    }
                    // A uniform tube is exact in one piece.
                    out.push((t.area(), t.length.min(depth - start)));
                    start += t.length;
                }
            }
            _ => {
                let n = (depth / max_step).ceil().max(1.0) as usize;
                let piece = depth / n as f64;
                out.extend((0..n).map(|i| (self.area_at((i as f64 + 0.5) * piece), piece)));
            }
        }
        out
    }
}

/// Sample the true area function on a uniform grid of step `dx`.
pub fn generate_area(spec: &HornSpec, dx: f64) -> Result<AreaFunction> {
    spec.validate()?;
    if !(dx > 0.0) {
        return Err(Error::InvalidConfig(format!("dx must be positive, got {dx}")));
    }
    let n = (spec.length() / dx + 1e-9).floor() as usize;
    let areas = (0..=n).map(|i| spec.area_at(i as f64 * dx)).collect();
    AreaFunction::from_areas(dx, areas)
}

/// Forward-model ground truth for one geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCase {
    pub spec: HornSpec,
    pub z_ec: ImpedanceSpectrum,
    pub z_trans_ref: ImpedanceSpectrum,
    /// Depth of the medial pressure reference, m.
    pub reference_depth: f64,
}

/// Input impedance of the full duct with `load` at its end, and the transfer
/// impedance to a point `medial_offset` in front of the end.
pub fn synthesize(
    spec: &HornSpec,
    frequencies: Vec<f64>,
    constants: &PhysicalConstants,
    load: &LoadModel,
    medial_offset: f64,
) -> Result<SyntheticCase> {
    spec.validate()?;
    let length = spec.length();
    if !(0.0..length).contains(&medial_offset) {
        return Err(Error::InvalidHorn(format!(
            "medial offset {medial_offset} m must lie inside the duct length {length} m"
        )));
    }
    let full = TwoPortChain::from_segments(&spec.segments_to(length, FORWARD_MODEL_STEP), frequencies.clone(), constants)?;
    let z_ec = input_impedance(&full, load)?.spectrum;
    let reference_depth = length - medial_offset;
    let part = TwoPortChain::from_segments(&spec.segments_to(reference_depth, FORWARD_MODEL_STEP), frequencies, constants)?;
    let z_trans_ref = transfer_impedance(&part, &z_ec)?;
    Ok(SyntheticCase {
        spec: spec.clone(),
        z_ec,
        z_trans_ref,
        reference_depth,
    })
}

/// Measurement-style grid `step, 2·step, …, f_max` in Hz.
pub fn measurement_grid(step: f64, f_max: f64) -> Vec<f64> {
    let n = (f_max / step + 1e-9).floor() as usize;
    (1..=n).map(|i| i as f64 * step).collect()
}

/// Length of the eardrum wedge closing every suite geometry, m. Its middle
/// sits at the medial reference point `UMBO_OFFSET` in front of the corner.
pub const SUITE_WEDGE: f64 = 2.0 * UMBO_OFFSET;
/// Cross-section left at the innermost corner of the wedge, m².
pub const SUITE_TIP_AREA: f64 = 1e-6;

/// Ear-canal body shapes (22–34 mm, 25–90 mm²) used by the round-trip
/// harness, before the eardrum wedge is attached.
pub fn suite_bodies() -> Vec<HornSpec> {
    let mm = 1e-3;
    let mm2 = 1e-6;
    vec![
        HornSpec::Uniform { area: 70.0 * mm2, length: 25.0 * mm },
        HornSpec::Uniform { area: 45.0 * mm2, length: 30.0 * mm },
        HornSpec::Exponential { a0: 40.0 * mm2, flare: 25.0, length: 28.0 * mm },
        HornSpec::Exponential { a0: 80.0 * mm2, flare: -20.0, length: 24.0 * mm },
        HornSpec::Conical { r0: 4.5 * mm, r1: 3.5 * mm, length: 26.0 * mm },
        HornSpec::Conical { r0: 3.5 * mm, r1: 4.5 * mm, length: 32.0 * mm },
        HornSpec::Parabolic { a0: 60.0 * mm2, a1: 35.0 * mm2, length: 27.0 * mm },
        HornSpec::Parabolic { a0: 35.0 * mm2, a1: 55.0 * mm2, length: 22.0 * mm },
        HornSpec::TaperedParabolic { a0: 55.0 * mm2, a1: 40.0 * mm2, a_end: 20.0 * mm2, taper: 6.0 * mm, length: 30.0 * mm },
        HornSpec::TaperedParabolic { a0: 65.0 * mm2, a1: 45.0 * mm2, a_end: 25.0 * mm2, taper: 8.0 * mm, length: 34.0 * mm },
    ]
}

/// Ten ear-canal-like geometries: the bodies of [`suite_bodies`], each
/// closed by an oblique eardrum wedge ending at a rigid innermost corner.
pub fn ear_canal_suite() -> Vec<HornSpec> {
    suite_bodies()
        .into_iter()
        .map(|body| HornSpec::ObliqueEnd {
            body: Box::new(body),
            wedge: SUITE_WEDGE,
            tip_area: SUITE_TIP_AREA,
        })
        .collect()
}
