//! Depth-marching inversion of the entrance TDR into an area function.
//!
//! The duct is treated as a stack of thin layers whose two-way travel time
//! equals one TDR sample, so every sample contributes one interface. At each
//! interface the leading sample of the upgoing wave, divided by the leading
//! sample of the downgoing wave, is the local pressure reflection
//! coefficient; scattering is then undone and both waves are moved one layer
//! deeper. Reported areas are decimated to `Δx = c·Δt` (two layers).

use serde::{Deserialize, Serialize};

use crate::area::AreaFunction;
use crate::error::{Error, Result};
use crate::signal::{ImpedanceSpectrum, PhysicalConstants, RealSignal};

/// Largest magnitude a reflection coefficient may take before it is clamped.
pub const K_CLAMP: f64 = 0.9999;
/// Marching stops once the wavefront has decayed below this fraction.
pub const WAVEFRONT_FLOOR: f64 = 1e-12;
/// |Z_ec| minima below this frequency are ignored for the quarter-wave length.
pub const QUARTER_WAVE_SEARCH_FROM_HZ: f64 = 500.0;

pub const EPSILON_CORRECTION: f64 = 1.8e-3;
pub const TDRMAX_CORRECTION: f64 = 0.9e-3;
pub const TDR50_CORRECTION: f64 = 4.3e-3;

/// Spatial resolution `c/f_sup` of the reconstructed area function.
pub fn spatial_step(f_sup: f64, c: f64) -> f64 {
    c / f_sup
}

/// Downgoing (`forward`) and upgoing (`backward`) pressure waves at one
/// interface, in a local time frame whose index 0 is the wavefront arrival.
/// Both are kept normalised so that `forward[0] == 1`; the accumulated
/// normalisation is tracked in `log_scale`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarchState {
    pub depth: usize,
    pub forward: Vec<f64>,
    pub backward: Vec<f64>,
    pub log_scale: f64,
}

impl MarchState {
    /// Unit impulse incident on the entrance, with the measured TDR as the
    /// upgoing response.
    pub fn from_tdr(tdr: &[f64]) -> Self {
        let mut forward = vec![0.0; tdr.len()];
        if let Some(f) = forward.first_mut() {
            *f = 1.0;
        }
        Self {
            depth: 0,
            forward,
            backward: tdr.to_vec(),
            log_scale: 0.0,
        }
    }

    /// Wavefront amplitude relative to the incident impulse.
    pub fn wavefront(&self) -> f64 {
        self.log_scale.exp() * self.forward.first().copied().unwrap_or(0.0).abs()
    }

    pub fn remaining(&self) -> usize {
        self.backward.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peel {
    pub k: f64,
    pub next_area: f64,
    pub clamped: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WavefrontLost {
    pub depth: usize,
}

/// Peel one interface off `state`: estimate its reflection coefficient,
/// return the area on the far side and advance the waves by one layer.
pub fn peel_layer(state: &mut MarchState, area: f64) -> std::result::Result<Peel, WavefrontLost> {
    let f0 = state.forward.first().copied().unwrap_or(0.0);
    if state.remaining() == 0 || !(state.wavefront() > WAVEFRONT_FLOOR) || f0 == 0.0 {
        return Err(WavefrontLost { depth: state.depth });
    }
    let raw = state.backward[0] / f0;
    let k = raw.clamp(-K_CLAMP, K_CLAMP);
    let clamped = k != raw;
    let next_area = area * (1.0 - k) / (1.0 + k);

    // Scattering at the interface solved for the medial upgoing wave `g` and
    // the transmitted downgoing wave; `g[0]` is zero by causality and drops
    // out with the one-sample re-referencing.
    let n = state.remaining();
    let inv = 1.0 / (1.0 - k);
    let mut next_forward = Vec::with_capacity(n.saturating_sub(1));
    let mut next_backward = Vec::with_capacity(n.saturating_sub(1));
    let lead = (1.0 + k) * f0;
    let norm = 1.0 / lead;
    for i in 0..n.saturating_sub(1) {
        let f = state.forward[i];
        let g_next = (state.backward[i + 1] - k * state.forward[i + 1]) * inv;
        let g = if i == 0 { 0.0 } else { (state.backward[i] - k * f) * inv };
        next_forward.push(((1.0 + k) * f - k * g) * norm);
        next_backward.push(g_next * norm);
    }
    state.log_scale += lead.abs().ln();
    state.forward = next_forward;
    state.backward = next_backward;
    state.depth += 1;
    Ok(Peel { k, next_area, clamped })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Inversion {
    pub area: AreaFunction,
    /// Reflection coefficient of every layer interface (half-step resolution).
    pub layer_k: Vec<f64>,
    /// Area `ρc/z0` of the reference medium in front of the entrance.
    pub reference_area: f64,
    /// Interfaces whose coefficient hit the clamp.
    pub clamped: Vec<usize>,
    /// Depth (m) at which the wavefront was lost, if marching stopped early.
    pub truncated_at: Option<f64>,
}

/// March the entrance TDR down to `l_max`.
pub fn invert(tdr: &RealSignal, z0: f64, constants: &PhysicalConstants, l_max: f64) -> Result<Inversion> {
    if !(l_max > 0.0) {
        return Err(Error::InvalidConfig(format!("l_max must be positive, got {l_max}")));
    }
    if !(z0 > 0.0 && z0.is_finite()) {
        return Err(Error::NonPositiveZ0 { z0 });
    }
    let dx = constants.c * tdr.dt;
    let outputs = (l_max / dx + 1e-9).floor() as usize;
    let interfaces = 2 * outputs + 1;
    let mut padded: Vec<f64> = tdr.samples.iter().take(interfaces).copied().collect();
    padded.resize(interfaces, 0.0);

    let reference_area = constants.area_from_impedance(z0);
    let mut state = MarchState::from_tdr(&padded);
    let mut area = reference_area;
    let mut layer_areas = Vec::with_capacity(interfaces);
    let mut layer_k = Vec::with_capacity(interfaces);
    let mut clamped = Vec::new();
    let mut truncated_at = None;
    for j in 0..interfaces {
        match peel_layer(&mut state, area) {
            // Repeated clamping can drive the area below the float range.
            Ok(p) if !(p.next_area >= f64::MIN_POSITIVE) => {
                truncated_at = Some(j as f64 * dx / 2.0);
                break;
            }
            Ok(p) => {
                if p.clamped {
                    clamped.push(j);
                }
                layer_k.push(p.k);
                area = p.next_area;
                layer_areas.push(area);
            }
            Err(WavefrontLost { .. }) => {
                truncated_at = Some(j as f64 * dx / 2.0);
                break;
            }
        }
    }
    // Output point `i` sits on interface `2i`; its area is the geometric mean
    // of the layers on either side.
    let areas: Vec<f64> = (0..layer_areas.len().div_ceil(2))
        .map(|i| {
            let before = if i == 0 { reference_area } else { layer_areas[2 * i - 1] };
            before.sqrt() * layer_areas[2 * i].sqrt()
        })
        .collect();
    if areas.is_empty() {
        return Err(Error::EmptyAreaFunction);
    }
    Ok(Inversion {
        area: AreaFunction::from_areas(dx, areas)?,
        layer_k,
        reference_area,
        clamped,
        truncated_at,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrectedLengths {
    pub l_epsilon: Option<f64>,
    pub l_tdrmax: Option<f64>,
    pub l_tdr50: Option<f64>,
}

/// Candidate termination lengths of an inverse solution, all in metres.
/// `None` marks a length that could not be identified in the interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TerminationReport {
    pub interval: [f64; 2],
    pub l_tdrmax: Option<f64>,
    pub l_tdr50: Option<f64>,
    pub l_epsilon: Option<f64>,
    pub l_quarter: Option<f64>,
    /// Frequency of the first |Z_ec| minimum used for `l_quarter`.
    pub f_quarter: Option<f64>,
    pub corrected: CorrectedLengths,
}

impl TerminationReport {
    pub fn all_found(&self) -> bool {
        self.l_tdrmax.is_some() && self.l_tdr50.is_some() && self.l_epsilon.is_some() && self.l_quarter.is_some()
    }
}

/// Frequency of the first local minimum of |Z| above `above_hz`.
pub fn first_impedance_minimum(z: &ImpedanceSpectrum, above_hz: f64) -> Result<f64> {
    let mags: Vec<f64> = z.values().iter().map(|v| v.norm()).collect();
    let f = z.frequencies();
    (1..mags.len().saturating_sub(1))
        .find(|&i| f[i] > above_hz && mags[i] < mags[i - 1] && mags[i] <= mags[i + 1])
        .map(|i| f[i])
        .ok_or(Error::NoMinimumFound { above_hz })
}

/// `c/(4·f_min)` with `f_min` the first |Z_ec| minimum above 500 Hz.
pub fn quarter_wave_length(z: &ImpedanceSpectrum, c: f64) -> Result<f64> {
    Ok(c / (4.0 * first_impedance_minimum(z, QUARTER_WAVE_SEARCH_FROM_HZ)?))
}

/// Identify the termination-length candidates within `interval` (m).
/// Ties resolve to the smallest depth.
pub fn termination_lengths(af: &AreaFunction, z_ec: &ImpedanceSpectrum, interval: [f64; 2], c: f64) -> Result<TerminationReport> {
    let [lo, hi] = interval;
    let idx: Vec<usize> = (0..af.k_profile.len())
        .filter(|&i| {
            let x = af.midpoint(i);
            x >= lo - 1e-12 && x <= hi + 1e-12
        })
        .collect();
    if idx.is_empty() || lo > hi {
        return Err(Error::EmptyInterval { lo, hi });
    }

    let mut i_max = idx[0];
    for &i in &idx {
        if af.k_profile[i].abs() > af.k_profile[i_max].abs() {
            i_max = i;
        }
    }
    let k_max = af.k_profile[i_max].abs();
    let l_tdrmax = Some(af.midpoint(i_max));
    // A profile without any reflection has no decay to measure.
    let l_tdr50 = idx
        .iter()
        .copied()
        .filter(|_| k_max > 0.0)
        .find(|&i| i > i_max && af.k_profile[i].abs() <= 0.5 * k_max)
        .map(|i| af.midpoint(i));

    let mut i_eps = idx[0];
    for &i in &idx {
        if af.epsilon[i] < af.epsilon[i_eps] {
            i_eps = i;
        }
    }
    let l_epsilon = Some(af.midpoint(i_eps));

    let f_quarter = first_impedance_minimum(z_ec, QUARTER_WAVE_SEARCH_FROM_HZ).ok();
    let l_quarter = f_quarter
        .map(|f| c / (4.0 * f))
        .filter(|l| *l >= lo && *l <= hi);

    let corrected = CorrectedLengths {
        l_epsilon: l_epsilon.map(|l| l - EPSILON_CORRECTION),
        l_tdrmax: l_tdrmax.map(|l| l - TDRMAX_CORRECTION),
        l_tdr50: l_tdr50.map(|l| l - TDR50_CORRECTION),
    };
    Ok(TerminationReport {
        interval,
        l_tdrmax,
        l_tdr50,
        l_epsilon,
        l_quarter,
        f_quarter,
        corrected,
    })
}
