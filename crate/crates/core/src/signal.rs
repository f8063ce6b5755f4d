//! Shared domain types: physical constants, the FFT frequency grid, impedance
//! spectra and real time signals, plus the spectrum extrapolation used before
//! the reflectance is formed.

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest FFT length the pipeline will use.
pub const MIN_FFT_LENGTH: usize = 1 << 12;
/// Coarsest allowed bin spacing of the synthesis grid, Hz.
pub const MAX_BIN_SPACING_HZ: f64 = 80.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    /// Speed of sound, m/s.
    pub c: f64,
    /// Fluid density, kg/m³.
    pub rho: f64,
    /// Temperature, K. Informational only.
    pub temperature: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        // Air at 308 K; the density is the dry-air value at that temperature.
        Self {
            c: 351.8,
            rho: 1.1455,
            temperature: 308.0,
        }
    }
}

impl PhysicalConstants {
    pub fn new(c: f64, rho: f64) -> Result<Self> {
        let k = Self {
            c,
            rho,
            ..Self::default()
        };
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::InvalidConfig(format!("speed of sound must be positive, got {}", self.c)));
        }
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return Err(Error::InvalidConfig(format!("density must be positive, got {}", self.rho)));
        }
        Ok(())
    }

    /// Characteristic impedance ρc/A of a duct with cross-section `area` (m²).
    pub fn characteristic_impedance(&self, area: f64) -> f64 {
        self.rho * self.c / area
    }

    /// Inverse of [`characteristic_impedance`](Self::characteristic_impedance).
    pub fn area_from_impedance(&self, z0: f64) -> f64 {
        self.rho * self.c / z0
    }
}

/// Smallest power of two `N >= 2^12` with `f_sup / N <= 80 Hz`.
pub fn fft_length_for(f_sup: f64) -> usize {
    assert!(f_sup > 0.0, "f_sup must be positive");
    let needed = (f_sup / MAX_BIN_SPACING_HZ).ceil();
    if needed <= MIN_FFT_LENGTH as f64 {
        return MIN_FFT_LENGTH;
    }
    (needed as usize).next_power_of_two()
}

/// Uniform single-sided grid `0, df, 2·df, …, f_sup/2` of an `n_fft`-point transform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    pub f_sup: f64,
    pub n_fft: usize,
}

impl FrequencyGrid {
    /// Grid at rate `f_sup` with the default FFT-length policy.
    pub fn new(f_sup: f64) -> Result<Self> {
        if !(f_sup > 0.0 && f_sup.is_finite()) {
            return Err(Error::InvalidConfig(format!("f_sup must be positive, got {f_sup}")));
        }
        Ok(Self {
            f_sup,
            n_fft: fft_length_for(f_sup),
        })
    }

    /// Grid with an explicit transform length. Used by the legacy upsampling
    /// path, where the length is an integer multiple of the base length.
    pub fn with_length(f_sup: f64, n_fft: usize) -> Result<Self> {
        if !(f_sup > 0.0 && f_sup.is_finite()) || n_fft < 2 || !n_fft.is_multiple_of(2) {
            return Err(Error::InvalidConfig(format!(
                "bad grid: f_sup = {f_sup}, n_fft = {n_fft}"
            )));
        }
        Ok(Self { f_sup, n_fft })
    }

    pub fn df(&self) -> f64 {
        self.f_sup / self.n_fft as f64
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.f_sup
    }

    /// Number of single-sided bins, `N/2 + 1`.
    pub fn n_bins(&self) -> usize {
        self.n_fft / 2 + 1
    }

    pub fn frequency(&self, bin: usize) -> f64 {
        bin as f64 * self.df()
    }

    pub fn frequencies(&self) -> Vec<f64> {
        (0..self.n_bins()).map(|n| self.frequency(n)).collect()
    }
}

/// Complex acoustic impedance (Pa·s/m³) sampled at strictly increasing
/// frequencies. `f_lim` marks the highest frequency carrying valid data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpedanceSpectrum {
    frequencies: Vec<f64>,
    values: Vec<Complex64>,
    f_lim: f64,
}

impl ImpedanceSpectrum {
    /// Spectrum whose valid band extends to the last frequency.
    pub fn new(frequencies: Vec<f64>, values: Vec<Complex64>) -> Result<Self> {
        let f_lim = frequencies.last().copied().unwrap_or(0.0);
        Self::with_limit(frequencies, values, f_lim)
    }

    pub fn with_limit(frequencies: Vec<f64>, values: Vec<Complex64>, f_lim: f64) -> Result<Self> {
        if frequencies.is_empty() {
            return Err(Error::EmptySpectrum);
        }
        if frequencies.len() != values.len() {
            return Err(Error::InvalidConfig(format!(
                "{} frequencies but {} values",
                frequencies.len(),
                values.len()
            )));
        }
        if let Some(i) = frequencies.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::NonIncreasingFrequency { index: i + 1 });
        }
        if frequencies.iter().any(|f| !f.is_finite() || *f < 0.0) {
            return Err(Error::NonFinite { what: "frequency" });
        }
        if values.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite { what: "impedance" });
        }
        let f_max = *frequencies.last().unwrap();
        if !(f_lim > 0.0) || f_lim > f_max * (1.0 + 1e-12) {
            return Err(Error::InvalidConfig(format!(
                "f_lim = {f_lim} Hz must lie in (0, {f_max}]"
            )));
        }
        Ok(Self {
            frequencies,
            values,
            f_lim,
        })
    }

    /// Spectrum defined on every single-sided bin of `grid`.
    pub fn on_grid(grid: &FrequencyGrid, values: Vec<Complex64>, f_lim: f64) -> Result<Self> {
        Self::with_limit(grid.frequencies(), values, f_lim)
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn f_lim(&self) -> f64 {
        self.f_lim
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, Complex64)> + '_ {
        self.frequencies.iter().copied().zip(self.values.iter().copied())
    }

    /// Points with frequency at or below `f_lim`.
    pub fn valid_points(&self) -> impl Iterator<Item = (f64, Complex64)> + '_ {
        let f_lim = self.f_lim;
        self.iter().take_while(move |(f, _)| *f <= f_lim * (1.0 + 1e-12))
    }

    /// Copy restricted to frequencies `<= f_lim`.
    pub fn truncated(&self, f_lim: f64) -> Result<Self> {
        let (f, v): (Vec<f64>, Vec<Complex64>) =
            self.iter().filter(|(f, _)| *f <= f_lim * (1.0 + 1e-12)).unzip();
        if f.is_empty() {
            return Err(Error::EmptySpectrum);
        }
        let lim = f_lim.min(*f.last().unwrap());
        Self::with_limit(f, v, lim)
    }

    /// Linear interpolation (real and imaginary parts separately). Returns
    /// `None` outside the sampled range.
    pub fn interpolate(&self, f: f64) -> Option<Complex64> {
        interpolate_linear(&self.frequencies, &self.values, f)
    }

    /// Value at `f` if a sample sits there (within `tol` Hz), otherwise the
    /// linear interpolant.
    pub fn value_at(&self, f: f64, tol: f64) -> Option<Complex64> {
        let idx = self.frequencies.partition_point(|x| *x < f - tol);
        if let Some(x) = self.frequencies.get(idx) {
            if (x - f).abs() <= tol {
                return Some(self.values[idx]);
            }
        }
        self.interpolate(f)
    }

    pub fn map_values(&self, f: impl Fn(f64, Complex64) -> Complex64) -> Self {
        let values = self.iter().map(|(fr, z)| f(fr, z)).collect();
        Self {
            frequencies: self.frequencies.clone(),
            values,
            f_lim: self.f_lim,
        }
    }
}

pub(crate) fn interpolate_linear(xs: &[f64], ys: &[Complex64], x: f64) -> Option<Complex64> {
    let first = *xs.first()?;
    let last = *xs.last()?;
    if x < first || x > last {
        return None;
    }
    let hi = xs.partition_point(|v| *v < x);
    if hi < xs.len() && xs[hi] == x {
        return Some(ys[hi]);
    }
    let lo = hi - 1;
    let t = (x - xs[lo]) / (xs[hi] - xs[lo]);
    Some(ys[lo] + (ys[hi] - ys[lo]) * t)
}

/// Real, uniformly sampled signal (e.g. the entrance time-domain reflectance).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealSignal {
    pub samples: Vec<f64>,
    pub dt: f64,
}

impl RealSignal {
    pub fn new(samples: Vec<f64>, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidConfig(format!("dt must be positive, got {dt}")));
        }
        if samples.iter().any(|s| !s.is_finite()) {
            return Err(Error::NonFinite { what: "signal sample" });
        }
        Ok(Self { samples, dt })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Fill every bin of `grid` from a band-limited measured spectrum.
///
/// Below the first valid frequency the first valid value is held, inside
/// the valid band values are interpolated linearly, and above `f_lim` the
/// impedance is zero-padded (which pins the reflectance there to -1).
pub fn extrapolate_impedance(z: &ImpedanceSpectrum, grid: &FrequencyGrid) -> Result<ImpedanceSpectrum> {
    let f_lim = z.f_lim();
    let half = grid.f_sup / 2.0;
    if half < f_lim * (1.0 - 1e-12) {
        return Err(Error::MismatchedGrid {
            half_rate_hz: half,
            f_lim_hz: f_lim,
        });
    }
    let (f0, z0) = z.valid_points().next().ok_or(Error::EmptySpectrum)?;
    let zero = Complex64::new(0.0, 0.0);
    let values = grid
        .frequencies()
        .into_iter()
        .map(|f| {
            if f < f0 {
                z0
            } else if f <= f_lim {
                z.interpolate(f).unwrap_or(zero)
            } else {
                zero
            }
        })
        .collect();
    ImpedanceSpectrum::on_grid(grid, values, f_lim.min(half))
}

/// Legacy amplitude correction: scale every reflectance bin by `n_sup`.
pub fn amplitude_correction_legacy(spectrum: &[Complex64], n_sup: u32) -> Vec<Complex64> {
    let s = n_sup as f64;
    spectrum.iter().map(|r| r * s).collect()
}

/// Inverse transform of a single-sided spectrum (`N/2 + 1` bins) to a real
/// `N`-point signal, building the negative-frequency half by conjugate
/// symmetry. Normalised by `1/N`.
pub fn inverse_real(half: &[Complex64], n_fft: usize) -> Vec<f64> {
    assert_eq!(half.len(), n_fft / 2 + 1, "single-sided spectrum length");
    let mut buf = vec![Complex64::new(0.0, 0.0); n_fft];
    buf[0] = Complex64::new(half[0].re, 0.0);
    for n in 1..n_fft / 2 {
        buf[n] = half[n];
        buf[n_fft - n] = half[n].conj();
    }
    buf[n_fft / 2] = Complex64::new(half[n_fft / 2].re, 0.0);
    let mut planner = FftPlanner::<f64>::new();
    planner.plan_fft_inverse(n_fft).process(&mut buf);
    let scale = 1.0 / n_fft as f64;
    buf.into_iter().map(|c| c.re * scale).collect()
}

/// Forward transform of a real signal, returning the single-sided half.
pub fn forward_real(samples: &[f64]) -> Vec<Complex64> {
    let n = samples.len();
    let mut buf: Vec<Complex64> = samples.iter().map(|s| Complex64::new(*s, 0.0)).collect();
    let mut planner = FftPlanner::<f64>::new();
    planner.plan_fft_forward(n).process(&mut buf);
    buf.truncate(n / 2 + 1);
    buf
}
