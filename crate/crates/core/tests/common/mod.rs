#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use webster_core::horns::{self, HornSpec, Tube};
use webster_core::transmission::LoadModel;
use webster_core::{FrequencyGrid, ImpedanceSpectrum, PhysicalConstants};

pub const MM: f64 = 1e-3;
pub const MM2: f64 = 1e-6;

/// Output step of the stepped-media round trips.
pub const STEP_DX: f64 = 0.5e-3;

pub fn diameter(area: f64) -> f64 {
    2.0 * (area / std::f64::consts::PI).sqrt()
}

/// Plateaus `(area, length)` with lengths on the output grid and every
/// interface reflection within `±k_max`.
pub fn random_plateaus(rng: &mut ChaCha8Rng, k_max: f64) -> Vec<(f64, f64)> {
    let n = rng.random_range(3..=6);
    let mut area = rng.random_range(30.0..90.0) * MM2;
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        if i > 0 {
            let mut k: f64 = rng.random_range(0.05..k_max);
            if rng.random_bool(0.5) {
                k = -k;
            }
            let mut next = area * (1.0 - k) / (1.0 + k);
            if !(10.0 * MM2..=150.0 * MM2).contains(&next) {
                next = area * (1.0 + k) / (1.0 - k);
            }
            area = next;
        }
        let steps = rng.random_range(4..=12);
        out.push((area, steps as f64 * STEP_DX));
    }
    out
}

pub fn stepped_spec(plateaus: &[(f64, f64)]) -> HornSpec {
    HornSpec::SteppedTubes {
        tubes: plateaus
            .iter()
            .map(|&(a, l)| Tube { length: l, diameter: diameter(a) })
            .collect(),
    }
}

/// Rigidly terminated input impedance on every bin of `grid`. The infinite
/// DC value is replaced by a large real impedance, so that `R(0) ≈ 1`.
pub fn full_band_impedance(spec: &HornSpec, grid: &FrequencyGrid, c: &PhysicalConstants) -> ImpedanceSpectrum {
    let freqs: Vec<f64> = (1..grid.n_bins()).map(|i| grid.frequency(i)).collect();
    let offset = spec.length() / 2.0;
    let case = horns::synthesize(spec, freqs, c, &LoadModel::RigidTermination, offset).unwrap();
    let mut v = vec![num_complex::Complex64::new(1e6 * case.z_ec.values()[0].norm(), 0.0)];
    v.extend_from_slice(case.z_ec.values());
    ImpedanceSpectrum::on_grid(grid, v, grid.f_sup / 2.0).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
pub type Ch = ChaCha8Rng;
