//! One-dimensional two-port model of a duct built from lossless cylindrical
//! segments. A chain maps the medial port onto the lateral one:
//!
//! ```text
//! [p_ec]   [e11 e12] [p_d]
//! [q_ec] = [e21 e22] [q_d]
//! ```

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::area::AreaFunction;
use crate::error::{Error, Result};
use crate::signal::{ImpedanceSpectrum, PhysicalConstants};

/// Segment length used when an area function is fed to the two-port model, m.
pub const EA_MODEL_STEP: f64 = 1e-4;

const J: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoPort {
    pub e11: Complex64,
    pub e12: Complex64,
    pub e21: Complex64,
    pub e22: Complex64,
}

impl TwoPort {
    pub const IDENTITY: TwoPort = TwoPort {
        e11: Complex64 { re: 1.0, im: 0.0 },
        e12: Complex64 { re: 0.0, im: 0.0 },
        e21: Complex64 { re: 0.0, im: 0.0 },
        e22: Complex64 { re: 1.0, im: 0.0 },
    };

    /// `self · rhs`, i.e. `rhs` sits medial of `self`.
    pub fn then(&self, rhs: &TwoPort) -> TwoPort {
        TwoPort {
            e11: self.e11 * rhs.e11 + self.e12 * rhs.e21,
            e12: self.e11 * rhs.e12 + self.e12 * rhs.e22,
            e21: self.e21 * rhs.e11 + self.e22 * rhs.e21,
            e22: self.e21 * rhs.e12 + self.e22 * rhs.e22,
        }
    }

    pub fn det(&self) -> Complex64 {
        self.e11 * self.e22 - self.e12 * self.e21
    }
}

/// Transfer matrix of a lossless cylindrical duct.
pub fn segment_matrix(area: f64, length: f64, f: f64, constants: &PhysicalConstants) -> TwoPort {
    let kl = 2.0 * std::f64::consts::PI * f / constants.c * length;
    let z0 = constants.characteristic_impedance(area);
    let (s, c) = kl.sin_cos();
    TwoPort {
        e11: Complex64::new(c, 0.0),
        e12: J * (z0 * s),
        e21: J * (s / z0),
        e22: Complex64::new(c, 0.0),
    }
}

/// Split `[0, length]` of an area function into segments of `step` (the last
/// one possibly shorter), each carrying the interpolated area at its centre.
pub fn resample_segments(af: &AreaFunction, length: f64, step: f64) -> Result<Vec<(f64, f64)>> {
    if af.is_empty() {
        return Err(Error::EmptyAreaFunction);
    }
    if length > af.extent() * (1.0 + 1e-9) + 1e-12 {
        return Err(Error::TerminationBeyondArea {
            termination_m: length,
            extent_m: af.extent(),
        });
    }
    if length <= 0.0 {
        return Ok(Vec::new());
    }
    let ratio = length / step;
    let mut n_full = ratio.floor() as usize;
    // Snap lengths that are an integer number of steps up to rounding.
    if (ratio - ratio.round()).abs() < 1e-9 {
        n_full = ratio.round() as usize;
    }
    let rest = length - n_full as f64 * step;
    let mut segs: Vec<(f64, f64)> = (0..n_full)
        .map(|s| (af.area_at((s as f64 + 0.5) * step), step))
        .collect();
    if rest > 1e-9 * step {
        segs.push((af.area_at(n_full as f64 * step + rest / 2.0), rest));
    }
    Ok(segs)
}

/// Running lateral-to-medial product of segment matrices at a fixed set of
/// frequencies.
#[derive(Debug, Clone)]
pub struct ChainAccumulator {
    frequencies: Vec<f64>,
    matrices: Vec<TwoPort>,
    constants: PhysicalConstants,
    length: f64,
    reference_impedance: f64,
}

impl ChainAccumulator {
    pub fn new(frequencies: Vec<f64>, constants: PhysicalConstants) -> Self {
        let matrices = vec![TwoPort::IDENTITY; frequencies.len()];
        Self {
            frequencies,
            matrices,
            constants,
            length: 0.0,
            reference_impedance: 1.0,
        }
    }

    pub fn push_segment(&mut self, area: f64, length: f64) {
        if self.length == 0.0 {
            self.reference_impedance = self.constants.characteristic_impedance(area);
        }
        for (m, f) in self.matrices.iter_mut().zip(&self.frequencies) {
            *m = m.then(&segment_matrix(area, length, *f, &self.constants));
        }
        self.length += length;
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn matrices(&self) -> &[TwoPort] {
        &self.matrices
    }

    pub fn snapshot(&self) -> TwoPortChain {
        TwoPortChain {
            frequencies: self.frequencies.clone(),
            matrices: self.matrices.clone(),
            length: self.length,
            reference_impedance: self.reference_impedance,
        }
    }
}

/// Per-frequency transfer matrices of a cascade of duct segments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoPortChain {
    pub frequencies: Vec<f64>,
    pub matrices: Vec<TwoPort>,
    /// Total duct length, m.
    pub length: f64,
    /// Characteristic impedance of the lateral segment; scale for singularity checks.
    pub reference_impedance: f64,
}

impl TwoPortChain {
    pub fn identity(frequencies: Vec<f64>) -> Self {
        let matrices = vec![TwoPort::IDENTITY; frequencies.len()];
        Self {
            frequencies,
            matrices,
            length: 0.0,
            reference_impedance: 1.0,
        }
    }

    /// Chain of explicit `(area, length)` segments, lateral first.
    pub fn from_segments(segments: &[(f64, f64)], frequencies: Vec<f64>, constants: &PhysicalConstants) -> Result<Self> {
        let mut acc = ChainAccumulator::new(frequencies, *constants);
        for &(a, l) in segments {
            if !(a > 0.0) || !(l > 0.0) {
                return Err(Error::InvalidHorn(format!("segment needs positive area and length, got ({a}, {l})")));
            }
            acc.push_segment(a, l);
        }
        Ok(acc.snapshot())
    }

    /// Worst deviation of `det` from one across all frequencies.
    pub fn max_det_error(&self) -> f64 {
        self.matrices
            .iter()
            .map(|m| (m.det() - 1.0).norm())
            .fold(0.0, f64::max)
    }
}

/// Chain of the first `length` metres of `af`, resampled to `step`-long segments.
pub fn chain(af: &AreaFunction, length: f64, step: f64, frequencies: Vec<f64>, constants: &PhysicalConstants) -> Result<TwoPortChain> {
    let segs = resample_segments(af, length, step)?;
    TwoPortChain::from_segments(&segs, frequencies, constants)
}

/// Acoustic load at the medial port.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum LoadModel {
    RigidTermination,
    TabulatedImpedance(ImpedanceSpectrum),
}

#[derive(Debug, Clone, PartialEq)]
pub struct InputImpedance {
    pub spectrum: ImpedanceSpectrum,
    /// Frequencies where the denominator was numerically close to zero.
    pub near_singular: Vec<f64>,
}

/// Input impedance at the lateral port for a given medial load.
pub fn input_impedance(chain: &TwoPortChain, load: &LoadModel) -> Result<InputImpedance> {
    let mut values = Vec::with_capacity(chain.matrices.len());
    let mut near_singular = Vec::new();
    for (m, f) in chain.matrices.iter().zip(&chain.frequencies) {
        let (num, den) = match load {
            LoadModel::RigidTermination => (m.e11, m.e21),
            LoadModel::TabulatedImpedance(zl) => {
                let z = zl.interpolate(*f).ok_or(Error::GridMismatch {
                    lo_hz: *f,
                    hi_hz: *f,
                })?;
                (m.e11 * z + m.e12, m.e21 * z + m.e22)
            }
        };
        if den.norm() * chain.reference_impedance < 1e-12 * num.norm() {
            near_singular.push(*f);
        }
        let z = num / den;
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::NonFinite { what: "input impedance" });
        }
        values.push(z);
    }
    let spectrum = ImpedanceSpectrum::new(chain.frequencies.clone(), values)?;
    Ok(InputImpedance {
        spectrum,
        near_singular,
    })
}

/// `Z_trans = e22·Z_ec − e12`, the transfer impedance with the shunt term
/// neglected.
pub fn transfer_impedance(chain: &TwoPortChain, z_ec: &ImpedanceSpectrum) -> Result<ImpedanceSpectrum> {
    if chain.frequencies.len() != z_ec.len()
        || chain
            .frequencies
            .iter()
            .zip(z_ec.frequencies())
            .any(|(a, b)| (a - b).abs() > 1e-9 * a.abs().max(1.0))
    {
        return Err(Error::GridMismatch {
            lo_hz: z_ec.frequencies()[0],
            hi_hz: *z_ec.frequencies().last().unwrap(),
        });
    }
    let values = chain
        .matrices
        .iter()
        .zip(z_ec.values())
        .map(|(m, z)| m.e22 * z - m.e12)
        .collect();
    ImpedanceSpectrum::with_limit(z_ec.frequencies().to_vec(), values, z_ec.f_lim())
}
