//! Browser bindings for three interactive views: horn reconstruction, the
//! Blackman window, and transfer-impedance levels at a chosen termination.
//!
//! Everything is plain `f64` arrays so the page can draw them directly.

use wasm_bindgen::prelude::*;
use webster_core::horns::{generate_area, measurement_grid, synthesize, HornSpec, UMBO_OFFSET};
use webster_core::metrics::{evaluation_band, rms_errors};
use webster_core::pipeline::{estimate, predict_ztrans};
use webster_core::reflectance::blackman_weight;
use webster_core::transmission::{LoadModel, EA_MODEL_STEP};
use webster_core::{FcutSetting, ImpedanceSpectrum, PhysicalConstants, PipelineConfig};

const MM: f64 = 1e-3;
const MM2: f64 = 1e-6;
/// Matches the default of the window shape parameter.
const BLACKMAN_A: f64 = 0.16;

fn js_err(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

/// `kind` is uniform, exponential, conical or parabolic; the area runs from
/// `a0` at the entrance to `a1` at the rigid end (uniform ignores `a1`).
fn horn(kind: &str, a0_mm2: f64, a1_mm2: f64, length_mm: f64) -> Result<HornSpec, String> {
    let (a0, a1, length) = (a0_mm2 * MM2, a1_mm2 * MM2, length_mm * MM);
    let spec = match kind {
        "uniform" => HornSpec::Uniform { area: a0, length },
        "exponential" => HornSpec::Exponential {
            a0,
            flare: (a1 / a0).ln() / length,
            length,
        },
        "conical" => HornSpec::Conical {
            r0: (a0 / std::f64::consts::PI).sqrt(),
            r1: (a1 / std::f64::consts::PI).sqrt(),
            length,
        },
        "parabolic" => HornSpec::Parabolic { a0, a1, length },
        _ => return Err(format!("unknown horn `{kind}`")),
    };
    spec.validate().map_err(|e| e.to_string())?;
    Ok(spec)
}

#[wasm_bindgen]
pub struct Reconstruction {
    x_mm: Vec<f64>,
    true_diameter_mm: Vec<f64>,
    estimated_diameter_mm: Vec<f64>,
    f_cut_hz: f64,
    l_tdrmax_mm: f64,
    l_epsilon_mm: f64,
}

#[wasm_bindgen]
impl Reconstruction {
    #[wasm_bindgen(getter)]
    pub fn x_mm(&self) -> Vec<f64> {
        self.x_mm.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn true_diameter_mm(&self) -> Vec<f64> {
        self.true_diameter_mm.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn estimated_diameter_mm(&self) -> Vec<f64> {
        self.estimated_diameter_mm.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn f_cut_hz(&self) -> f64 {
        self.f_cut_hz
    }
    /// NaN when not found.
    #[wasm_bindgen(getter)]
    pub fn l_tdrmax_mm(&self) -> f64 {
        self.l_tdrmax_mm
    }
    #[wasm_bindgen(getter)]
    pub fn l_epsilon_mm(&self) -> f64 {
        self.l_epsilon_mm
    }
}

pub fn reconstruct_native(
    kind: &str,
    a0_mm2: f64,
    a1_mm2: f64,
    length_mm: f64,
    f_lim_khz: f64,
    f_cut_khz: f64,
) -> Result<Reconstruction, String> {
    let spec = horn(kind, a0_mm2, a1_mm2, length_mm)?;
    let constants = PhysicalConstants::default();
    let case = synthesize(
        &spec,
        measurement_grid(100.0, f_lim_khz * 1e3),
        &constants,
        &LoadModel::RigidTermination,
        UMBO_OFFSET.min(spec.length() / 2.0),
    )
    .map_err(|e| e.to_string())?;
    // The browser has no threads; a lower rate keeps the page responsive.
    let cfg = PipelineConfig {
        f_cut: if f_cut_khz > 0.0 { FcutSetting::Hz(f_cut_khz * 1e3) } else { FcutSetting::Auto },
        f_sup: 1.75e6,
        ..PipelineConfig::default()
    };
    let est = estimate(&case.z_ec, &cfg).map_err(|e| e.to_string())?;
    let af = est.area();
    let x: Vec<f64> = af.positions();
    let mm = |v: Option<f64>| v.map(|v| v / MM).unwrap_or(f64::NAN);
    Ok(Reconstruction {
        true_diameter_mm: x.iter().map(|&x| 2.0 * (spec.area_at(x.min(spec.length())) / std::f64::consts::PI).sqrt() / MM).collect(),
        estimated_diameter_mm: af.diameters().iter().map(|d| d / MM).collect(),
        x_mm: x.iter().map(|x| x / MM).collect(),
        f_cut_hz: est.config.f_cut.unwrap_or(f64::NAN),
        l_tdrmax_mm: mm(est.termination.l_tdrmax),
        l_epsilon_mm: mm(est.termination.l_epsilon),
    })
}

/// Synthesize a rigid-ended horn, band-limit it at `f_lim_khz` and
/// reconstruct its diameter profile. `f_cut_khz <= 0` picks the cutoff
/// automatically.
#[wasm_bindgen]
pub fn reconstruct(
    kind: &str,
    a0_mm2: f64,
    a1_mm2: f64,
    length_mm: f64,
    f_lim_khz: f64,
    f_cut_khz: f64,
) -> Result<Reconstruction, JsError> {
    reconstruct_native(kind, a0_mm2, a1_mm2, length_mm, f_lim_khz, f_cut_khz).map_err(js_err)
}

/// Blackman weights at `frequencies_hz` for a cutoff of `f_cut_hz`.
#[wasm_bindgen]
pub fn window_weights(f_cut_hz: f64, frequencies_hz: Vec<f64>) -> Vec<f64> {
    frequencies_hz
        .iter()
        .map(|f| blackman_weight(std::f64::consts::PI * f / f_cut_hz, BLACKMAN_A))
        .collect()
}

#[wasm_bindgen]
pub struct Levels {
    frequencies_hz: Vec<f64>,
    predicted_db: Vec<f64>,
    reference_db: Vec<f64>,
    l_rmse_db: f64,
}

#[wasm_bindgen]
impl Levels {
    #[wasm_bindgen(getter)]
    pub fn frequencies_hz(&self) -> Vec<f64> {
        self.frequencies_hz.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn predicted_db(&self) -> Vec<f64> {
        self.predicted_db.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn reference_db(&self) -> Vec<f64> {
        self.reference_db.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn l_rmse_db(&self) -> f64 {
        self.l_rmse_db
    }
}

fn level_db(z: &ImpedanceSpectrum, band: &[f64]) -> Vec<f64> {
    band.iter()
        .map(|f| z.interpolate(*f).map(|v| 20.0 * v.norm().log10()).unwrap_or(f64::NAN))
        .collect()
}

pub fn ztrans_levels_native(
    kind: &str,
    a0_mm2: f64,
    a1_mm2: f64,
    length_mm: f64,
    termination_mm: f64,
) -> Result<Levels, String> {
    let spec = horn(kind, a0_mm2, a1_mm2, length_mm)?;
    let constants = PhysicalConstants::default();
    let offset = UMBO_OFFSET.min(spec.length() / 2.0);
    let case = synthesize(&spec, measurement_grid(100.0, 20e3), &constants, &LoadModel::RigidTermination, offset)
        .map_err(|e| e.to_string())?;
    let af = generate_area(&spec, EA_MODEL_STEP).map_err(|e| e.to_string())?;
    let z = predict_ztrans(&af, &case.z_ec, termination_mm * MM, &constants).map_err(|e| e.to_string())?;
    let band = evaluation_band();
    Ok(Levels {
        predicted_db: level_db(&z, &band),
        reference_db: level_db(&case.z_trans_ref, &band),
        l_rmse_db: rms_errors(&z, &case.z_trans_ref).map_err(|e| e.to_string())?.l_rmse,
        frequencies_hz: band,
    })
}

/// Transfer-impedance level over 1–10 kHz of the true area function cut at
/// `termination_mm`, against the reference at 3.5 mm before the rigid end.
#[wasm_bindgen]
pub fn ztrans_levels(kind: &str, a0_mm2: f64, a1_mm2: f64, length_mm: f64, termination_mm: f64) -> Result<Levels, JsError> {
    ztrans_levels_native(kind, a0_mm2, a1_mm2, length_mm, termination_mm).map_err(js_err)
}
