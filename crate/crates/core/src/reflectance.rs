//! Frequency-domain reflectance at the entrance, its low-pass window, the
//! iterative adjustment of the entrance characteristic impedance ("surge"),
//! and the resulting entrance time-domain reflectance (TDR).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{amplitude_correction_legacy, inverse_real, FrequencyGrid, ImpedanceSpectrum, PhysicalConstants, RealSignal};

pub const BLACKMAN_A: f64 = 0.16;
/// Relative `z0` step below which the surge iteration is considered converged.
pub const SURGE_TOLERANCE: f64 = 1e-6;
/// Relative step still accepted (with a warning) when the cap is reached.
pub const SURGE_ACCEPT_TOLERANCE: f64 = 1e-4;
pub const SURGE_MAX_ITERATIONS: usize = 100;
/// Default entrance area behind the first `z0` guess, m².
pub const DEFAULT_AREA_GUESS: f64 = 50e-6;

/// Frequency-domain Blackman low-pass with cutoff `f_cut`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlackmanWindow {
    pub a: f64,
    pub f_cut: f64,
    pub f_sup: f64,
    pub n_fft: usize,
}

impl BlackmanWindow {
    pub fn new(f_cut: f64, grid: &FrequencyGrid) -> Result<Self> {
        if !(f_cut > 0.0 && f_cut.is_finite()) {
            return Err(Error::InvalidConfig(format!("f_cut must be positive, got {f_cut}")));
        }
        Ok(Self {
            a: BLACKMAN_A,
            f_cut,
            f_sup: grid.f_sup,
            n_fft: grid.n_fft,
        })
    }

    /// Window argument of bin `n`.
    pub fn phase(&self, n: usize) -> f64 {
        std::f64::consts::PI * n as f64 * self.f_sup / (self.n_fft as f64 * self.f_cut)
    }

    pub fn weight(&self, n: usize) -> f64 {
        blackman_weight(self.phase(n), self.a)
    }

    /// Weights of bins `0..=N/2`.
    pub fn weights(&self) -> Vec<f64> {
        (0..=self.n_fft / 2).map(|n| self.weight(n)).collect()
    }
}

/// `(1 − a + cos ℵ + a·cos 2ℵ)/2` for `0 <= ℵ <= π`, zero beyond.
pub fn blackman_weight(aleph: f64, a: f64) -> f64 {
    if aleph > std::f64::consts::PI {
        return 0.0;
    }
    // Same polynomial as above, arranged to hit 1 and 0 exactly at the ends.
    let w = (1.0 + aleph.cos()) / 2.0 - a * aleph.sin().powi(2);
    w.clamp(0.0, 1.0)
}

/// Bin-wise `R = (Z − z0)/(Z + z0)` for a possibly complex `z0`.
pub fn reflectance_from_impedance(z_ec: &[Complex64], z0: Complex64) -> Result<Vec<Complex64>> {
    z_ec.iter()
        .enumerate()
        .map(|(bin, z)| {
            let den = z + z0;
            if den.re == 0.0 && den.im == 0.0 {
                return Err(Error::PoleAtBin { bin });
            }
            Ok((z - z0) / den)
        })
        .collect()
}

/// Algebraic inverse `Z = z0·(1 + R)/(1 − R)`.
pub fn impedance_from_reflectance(r: &[Complex64], z0: Complex64) -> Vec<Complex64> {
    r.iter().map(|r| z0 * (1.0 + r) / (1.0 - r)).collect()
}

/// How the entrance characteristic impedance is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SurgeVariant {
    /// Real `z0` iterated on the mean real part of the windowed reflectance.
    Surge1,
    /// As `Surge1`, plus an imaginary part driven by the mean imaginary part.
    Surge2,
    /// `z0 = ρc/A(0)` from a known entrance area (m²).
    Geometric { area: f64 },
}

/// What the reflectance holds above the highest valid frequency.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Extrapolation {
    /// Impedance zero-padded, reflectance -1.
    ZeroImpedance,
    /// Reflectance zero-padded (the legacy upsampling scheme).
    ZeroReflectance,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurgeOptions {
    pub variant: SurgeVariant,
    pub window: Option<BlackmanWindow>,
    pub constants: PhysicalConstants,
    pub area_guess: f64,
    pub extrapolation: Extrapolation,
    /// Legacy amplitude correction factor applied to the final reflectance.
    pub amplitude_correction: Option<u32>,
    pub time_reversed_addition: bool,
}

impl SurgeOptions {
    pub fn new(variant: SurgeVariant, window: Option<BlackmanWindow>, constants: PhysicalConstants) -> Self {
        Self {
            variant,
            window,
            constants,
            area_guess: DEFAULT_AREA_GUESS,
            extrapolation: Extrapolation::ZeroImpedance,
            amplitude_correction: None,
            time_reversed_addition: false,
        }
    }
}

/// First guess `ρc/A_guess`.
pub fn initial_z0_guess(constants: &PhysicalConstants, area_guess: f64) -> f64 {
    constants.characteristic_impedance(area_guess)
}

/// One step of the real-part update `z0·(1 + m_R/m_W)`.
pub fn surge_step(z0: f64, mean_ratio: f64) -> f64 {
    z0 * (1.0 + mean_ratio)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurgeStep {
    pub iteration: usize,
    pub z0: f64,
    /// Imaginary fraction of the complex characteristic impedance (surge II).
    pub eta: f64,
    /// `m_R / m_W` at this iterate.
    pub ratio: f64,
    /// TDR sample at t = 0 for this iterate.
    pub tdr0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReflectanceState {
    /// Real part of the entrance characteristic impedance, Pa·s/m³.
    pub z0: f64,
    /// `z0·(1 + j·eta)` was used to form the reflectance (zero unless surge II).
    pub eta: f64,
    /// Final windowed reflectance on bins `0..=N/2`.
    pub r_freq: Vec<Complex64>,
    pub tdr: RealSignal,
    pub window: Option<BlackmanWindow>,
    pub surge_trace: Vec<SurgeStep>,
    pub converged: bool,
    /// Largest imaginary residue of the inverse transform relative to its peak.
    pub imag_residue: f64,
}

struct Windowed {
    spectrum: Vec<Complex64>,
    mean_re_ratio: f64,
    mean_im_ratio: f64,
    tdr0: f64,
}

fn windowed_reflectance(z: &ImpedanceSpectrum, z0: Complex64, weights: &[f64], opts: &SurgeOptions) -> Result<Windowed> {
    let mut r = reflectance_from_impedance(z.values(), z0)?;
    if opts.extrapolation == Extrapolation::ZeroReflectance {
        let f_lim = z.f_lim();
        for (val, f) in r.iter_mut().zip(z.frequencies()) {
            if *f > f_lim * (1.0 + 1e-12) {
                *val = Complex64::new(0.0, 0.0);
            }
        }
    }
    for (val, w) in r.iter_mut().zip(weights) {
        *val *= *w;
    }
    let n_bins = r.len() as f64;
    let m_w = weights.iter().sum::<f64>() / n_bins;
    let m_r = r.iter().map(|c| c.re).sum::<f64>() / n_bins;
    let m_i = r.iter().map(|c| c.im).sum::<f64>() / n_bins;
    let last = r.len() - 1;
    let n_fft = 2 * last;
    let interior: f64 = r[1..last].iter().map(|c| c.re).sum();
    let tdr0 = (r[0].re + 2.0 * interior + r[last].re) / n_fft as f64;
    Ok(Windowed {
        spectrum: r,
        mean_re_ratio: m_r / m_w,
        mean_im_ratio: m_i / m_w,
        tdr0,
    })
}

/// Adjust the entrance characteristic impedance and return the converged
/// windowed reflectance with its TDR.
///
/// `z` must cover every bin of `grid` (see
/// [`extrapolate_impedance`](crate::signal::extrapolate_impedance)).
pub fn surge_adjust(z: &ImpedanceSpectrum, grid: &FrequencyGrid, opts: &SurgeOptions) -> Result<ReflectanceState> {
    if z.len() != grid.n_bins() {
        return Err(Error::MismatchedGrid {
            half_rate_hz: grid.f_sup / 2.0,
            f_lim_hz: z.f_lim(),
        });
    }
    opts.constants.validate()?;
    let weights = match &opts.window {
        Some(w) => w.weights(),
        None => vec![1.0; grid.n_bins()],
    };

    let mut trace = Vec::new();
    let mut z0;
    let mut eta = 0.0;
    let mut converged = true;
    match opts.variant {
        SurgeVariant::Geometric { area } => {
            if !(area > 0.0) {
                return Err(Error::InvalidConfig(format!("geometric entrance area must be positive, got {area}")));
            }
            z0 = opts.constants.characteristic_impedance(area);
        }
        SurgeVariant::Surge1 | SurgeVariant::Surge2 => {
            z0 = initial_z0_guess(&opts.constants, opts.area_guess);
            if !(z0 > 0.0 && z0.is_finite()) {
                return Err(Error::NonPositiveZ0 { z0 });
            }
            let complex = opts.variant == SurgeVariant::Surge2;
            let mut last_step = f64::INFINITY;
            converged = false;
            for iteration in 0..SURGE_MAX_ITERATIONS {
                let w = windowed_reflectance(z, Complex64::new(z0, z0 * eta), &weights, opts)?;
                trace.push(SurgeStep {
                    iteration,
                    z0,
                    eta,
                    ratio: w.mean_re_ratio,
                    tdr0: w.tdr0,
                });
                let next = surge_step(z0, w.mean_re_ratio);
                if !(next > 0.0) || !next.is_finite() {
                    return Err(Error::NonPositiveZ0 { z0: next });
                }
                let mut step = (next / z0 - 1.0).abs();
                if complex {
                    let next_eta = eta + w.mean_im_ratio;
                    step = step.max((next_eta - eta).abs());
                    eta = next_eta;
                }
                z0 = next;
                last_step = step;
                if step < SURGE_TOLERANCE {
                    converged = true;
                    break;
                }
            }
            if !converged && last_step > SURGE_ACCEPT_TOLERANCE {
                return Err(Error::NoConvergence {
                    iterations: SURGE_MAX_ITERATIONS,
                    last_step,
                });
            }
        }
    }

    let final_w = windowed_reflectance(z, Complex64::new(z0, z0 * eta), &weights, opts)?;
    trace.push(SurgeStep {
        iteration: trace.len(),
        z0,
        eta,
        ratio: final_w.mean_re_ratio,
        tdr0: final_w.tdr0,
    });
    let mut r_freq = final_w.spectrum;
    if let Some(n_sup) = opts.amplitude_correction {
        r_freq = amplitude_correction_legacy(&r_freq, n_sup);
    }
    let (mut samples, imag_residue) = tdr_from_spectrum(&r_freq, grid.n_fft);
    if opts.time_reversed_addition {
        time_reversed_addition(&mut samples);
    }
    let tdr = RealSignal::new(samples, grid.dt())?;
    Ok(ReflectanceState {
        z0,
        eta,
        r_freq,
        tdr,
        window: opts.window,
        surge_trace: trace,
        converged,
        imag_residue,
    })
}

/// Inverse transform of a single-sided reflectance. Returns the real TDR and
/// the imaginary residue of a full complex transform relative to the peak.
fn tdr_from_spectrum(half: &[Complex64], n_fft: usize) -> (Vec<f64>, f64) {
    let samples = inverse_real(half, n_fft);
    // The conjugate-symmetric extension makes the transform real by
    // construction; the only imaginary content would come from the DC and
    // Nyquist bins, which are dropped.
    let peak = samples.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    let residue = (half[0].im.abs() + half[half.len() - 1].im.abs()) / n_fft as f64;
    let rel = if peak > 0.0 { residue / peak } else { 0.0 };
    (samples, rel)
}

/// Add the time-reversed negative-time half onto positive times.
pub fn time_reversed_addition(samples: &mut [f64]) {
    let n = samples.len();
    for i in 1..n / 2 {
        samples[i] += samples[n - i];
    }
}

/// Fraction of TDR energy at negative times (second half of the buffer).
pub fn noncausal_energy_fraction(tdr: &RealSignal) -> f64 {
    let n = tdr.samples.len();
    let total: f64 = tdr.samples.iter().map(|s| s * s).sum();
    if total == 0.0 {
        return 0.0;
    }
    let neg: f64 = tdr.samples[n / 2..].iter().map(|s| s * s).sum();
    neg / total
}
