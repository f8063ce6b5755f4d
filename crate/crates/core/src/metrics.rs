//! Level and phase errors of predicted transfer impedances, and the search
//! for the termination length with the least level error.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::area::AreaFunction;
use crate::error::{Error, Result};
use crate::signal::{ImpedanceSpectrum, PhysicalConstants};
use crate::transmission::{ChainAccumulator, EA_MODEL_STEP};

pub const BAND_LO_HZ: f64 = 1_000.0;
pub const BAND_HI_HZ: f64 = 10_000.0;
pub const BAND_STEP_HZ: f64 = 100.0;

/// `1, 1.1, …, 10` kHz.
pub fn evaluation_band() -> Vec<f64> {
    let n = ((BAND_HI_HZ - BAND_LO_HZ) / BAND_STEP_HZ).round() as usize;
    (0..=n).map(|i| BAND_LO_HZ + i as f64 * BAND_STEP_HZ).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub l_rmse: f64,
    pub theta_rmse: f64,
    /// `20·log10|Z_mod/Z_ref|` per band frequency, dB.
    pub level_errors: Vec<f64>,
    /// Principal-value phase of `Z_mod/Z_ref`, degrees.
    pub phase_errors: Vec<f64>,
    pub band: [f64; 2],
    pub n_f: usize,
}

fn sample_band(z: &ImpedanceSpectrum, band: &[f64]) -> Result<Vec<Complex64>> {
    band.iter()
        .map(|f| {
            z.interpolate(*f).ok_or(Error::GridMismatch {
                lo_hz: band[0],
                hi_hz: band[band.len() - 1],
            })
        })
        .collect()
}

/// Errors of `z_mod` against `z_ref` on the 1–10 kHz band.
pub fn rms_errors(z_mod: &ImpedanceSpectrum, z_ref: &ImpedanceSpectrum) -> Result<ErrorReport> {
    let band = evaluation_band();
    let a = sample_band(z_mod, &band)?;
    let b = sample_band(z_ref, &band)?;
    Ok(errors_from_values(&a, &b))
}

/// Errors between two value sequences already sampled on the band.
pub fn errors_from_values(z_mod: &[Complex64], z_ref: &[Complex64]) -> ErrorReport {
    let n = z_mod.len().min(z_ref.len());
    let mut level_errors = Vec::with_capacity(n);
    let mut phase_errors = Vec::with_capacity(n);
    for (m, r) in z_mod.iter().zip(z_ref) {
        let ratio = m / r;
        level_errors.push(20.0 * ratio.norm().log10());
        phase_errors.push(ratio.arg().to_degrees());
    }
    let rms = |v: &[f64]| (v.iter().map(|x| x * x).sum::<f64>() / n as f64).sqrt();
    ErrorReport {
        l_rmse: rms(&level_errors),
        theta_rmse: rms(&phase_errors),
        level_errors,
        phase_errors,
        band: [BAND_LO_HZ, BAND_HI_HZ],
        n_f: n,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LmePoint {
    pub length: f64,
    pub l_rmse: f64,
    pub theta_rmse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LmeSearch {
    pub l_lme: f64,
    pub l_rmse: f64,
    pub theta_rmse: f64,
    pub curve: Vec<LmePoint>,
}

/// Scan termination lengths in `interval` on the EA-model grid and return
/// the one with the least level error against `z_trans_ref`.
pub fn find_l_lme(
    af: &AreaFunction,
    z_ec: &ImpedanceSpectrum,
    z_trans_ref: &ImpedanceSpectrum,
    interval: [f64; 2],
    constants: &PhysicalConstants,
) -> Result<LmeSearch> {
    let [lo, hi] = interval;
    let step = EA_MODEL_STEP;
    let hi = hi.min(af.extent());
    let first = (lo / step - 1e-9).ceil().max(0.0) as usize;
    let last = (hi / step + 1e-9).floor();
    if lo > hi || last < first as f64 {
        return Err(Error::EmptyInterval { lo, hi });
    }
    let last = last as usize;

    let band = evaluation_band();
    let zec = sample_band(z_ec, &band)?;
    let zref = sample_band(z_trans_ref, &band)?;
    let mut acc = ChainAccumulator::new(band, *constants);
    for s in 0..first {
        acc.push_segment(af.area_at((s as f64 + 0.5) * step), step);
    }
    let mut curve = Vec::with_capacity(last - first + 1);
    let mut ztrans = vec![Complex64::new(0.0, 0.0); zec.len()];
    for j in first..=last {
        if j > first {
            acc.push_segment(af.area_at((j as f64 - 0.5) * step), step);
        }
        for ((out, m), z) in ztrans.iter_mut().zip(acc.matrices()).zip(&zec) {
            *out = m.e22 * z - m.e12;
        }
        let e = errors_from_values(&ztrans, &zref);
        curve.push(LmePoint {
            length: j as f64 * step,
            l_rmse: e.l_rmse,
            theta_rmse: e.theta_rmse,
        });
    }
    let best = curve
        .iter()
        .copied()
        .reduce(|b, p| if p.l_rmse < b.l_rmse { p } else { b })
        .expect("non-empty curve");
    Ok(LmeSearch {
        l_lme: best.length,
        l_rmse: best.l_rmse,
        theta_rmse: best.theta_rmse,
        curve,
    })
}

/// Median of a slice (mean of the two central values for even counts).
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) })
}
