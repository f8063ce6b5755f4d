//! End-to-end processing: band-limited input impedance to area function,
//! termination lengths and predicted transfer impedance.

use serde::{Deserialize, Serialize};

use crate::area::AreaFunction;
use crate::config::{PipelineConfig, ResolvedConfig, TerminationRule};
use crate::error::{Error, Result};
use crate::horns::{synthesize, HornSpec, UMBO_OFFSET};
use crate::inverse::{invert, termination_lengths, Inversion, TerminationReport};
use crate::metrics::{find_l_lme, rms_errors, ErrorReport, LmeSearch};
use crate::reflectance::{surge_adjust, ReflectanceState};
use crate::signal::{extrapolate_impedance, ImpedanceSpectrum, PhysicalConstants};
use crate::transmission::{chain, transfer_impedance, LoadModel, EA_MODEL_STEP};

/// Conditions that leave a usable but degraded result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Warning {
    ClampedReflection { count: usize },
    WavefrontLost { depth_m: f64 },
    SurgeNotConverged { iterations: usize },
    Tdr50Absent,
    QuarterAbsent,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub config: ResolvedConfig,
    pub reflectance: ReflectanceState,
    pub inversion: Inversion,
    pub termination: TerminationReport,
    pub warnings: Vec<Warning>,
}

impl Estimate {
    pub fn area(&self) -> &AreaFunction {
        &self.inversion.area
    }

    pub fn entrance_area(&self) -> f64 {
        self.inversion.reference_area
    }
}

/// Steps I–IV: extrapolate, window, adjust `z0`, invert and locate
/// termination candidates.
pub fn estimate(z_ec: &ImpedanceSpectrum, cfg: &PipelineConfig) -> Result<Estimate> {
    let config = cfg.resolve(z_ec.f_lim())?;
    let measured = z_ec.truncated(config.f_lim)?;
    let full = extrapolate_impedance(&measured, &config.grid)?;
    let reflectance = surge_adjust(&full, &config.grid, &config.surge_options()?)?;
    let inversion = invert(&reflectance.tdr, reflectance.z0, &config.constants, config.l_max)?;
    let termination = termination_lengths(&inversion.area, &measured, config.interval, config.constants.c)?;

    let mut warnings = Vec::new();
    if !inversion.clamped.is_empty() {
        warnings.push(Warning::ClampedReflection {
            count: inversion.clamped.len(),
        });
    }
    if let Some(depth_m) = inversion.truncated_at {
        warnings.push(Warning::WavefrontLost { depth_m });
    }
    if !reflectance.converged {
        warnings.push(Warning::SurgeNotConverged {
            iterations: reflectance.surge_trace.len(),
        });
    }
    if termination.l_tdr50.is_none() {
        warnings.push(Warning::Tdr50Absent);
    }
    if termination.l_quarter.is_none() {
        warnings.push(Warning::QuarterAbsent);
    }
    Ok(Estimate {
        config,
        reflectance,
        inversion,
        termination,
        warnings,
    })
}

/// Depth selected by `rule`. `Lme` needs the reference transfer impedance.
pub fn select_termination(
    rule: TerminationRule,
    est: &Estimate,
    z_ec: &ImpedanceSpectrum,
    z_trans_ref: Option<&ImpedanceSpectrum>,
) -> Result<f64> {
    let t = &est.termination;
    let absent = |what: &'static str| Error::LengthAbsent { what };
    match rule {
        TerminationRule::Lme => {
            let r = z_trans_ref.ok_or(Error::ReferenceRequired { rule: "lme" })?;
            Ok(find_l_lme(est.area(), z_ec, r, est.config.interval, &est.config.constants)?.l_lme)
        }
        TerminationRule::Epsilon => t.l_epsilon.ok_or(absent("l_epsilon")),
        TerminationRule::EpsilonCorrected => t.corrected.l_epsilon.ok_or(absent("l_epsilon")),
        TerminationRule::Tdrmax => t.l_tdrmax.ok_or(absent("l_tdrmax")),
        TerminationRule::TdrmaxCorrected => t.corrected.l_tdrmax.ok_or(absent("l_tdrmax")),
        TerminationRule::Tdr50 => t.l_tdr50.ok_or(absent("l_tdr50")),
        TerminationRule::Tdr50Corrected => t.corrected.l_tdr50.ok_or(absent("l_tdr50")),
        TerminationRule::Quarter => t.l_quarter.ok_or(absent("l_quarter")),
        TerminationRule::Fixed(x) => Ok(x),
    }
}

/// Step V: transfer impedance of `af` cut at `length`, on the grid of `z_ec`.
pub fn predict_ztrans(
    af: &AreaFunction,
    z_ec: &ImpedanceSpectrum,
    length: f64,
    constants: &PhysicalConstants,
) -> Result<ImpedanceSpectrum> {
    if length < 0.0 {
        return Err(Error::InvalidConfig(format!("termination must be non-negative, got {length}")));
    }
    let ch = chain(af, length, EA_MODEL_STEP, z_ec.frequencies().to_vec(), constants)?;
    transfer_impedance(&ch, z_ec)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RuleOutcome {
    pub rule: TerminationRule,
    pub length: f64,
    pub l_rmse: f64,
    pub theta_rmse: f64,
}

/// Forward/inverse round trip of one synthetic geometry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundtripReport {
    pub horn: String,
    pub length: f64,
    pub reference_depth: f64,
    pub true_entrance_area: f64,
    pub estimated_entrance_area: f64,
    pub z0_true: f64,
    pub z0_estimated: f64,
    pub surge_iterations: usize,
    pub termination: TerminationReport,
    pub lme: LmeSearch,
    pub errors_at_lme: ErrorReport,
    pub rules: Vec<RuleOutcome>,
    /// Largest relative diameter deviation over `diameter_span`.
    pub max_diameter_deviation: f64,
    pub diameter_span: [f64; 2],
    pub warnings: Vec<Warning>,
}

/// Depth excluded at the rigid end when comparing diameters: the window
/// smears the terminating reflection over about half a cutoff wavelength.
pub fn diameter_span(length: f64, f_cut: Option<f64>, c: f64) -> [f64; 2] {
    let margin = f_cut.map(|fc| c / (2.0 * fc)).unwrap_or(0.0).max(1e-3);
    [1e-3, (length - margin).max(1e-3)]
}

/// Largest `|d_est/d_true − 1|` over `span`, sampled on the estimate's grid.
pub fn diameter_deviation(est: &AreaFunction, spec: &HornSpec, span: [f64; 2]) -> f64 {
    let diam = est.diameters();
    (0..est.len())
        .filter(|&i| {
            let x = est.position(i);
            x >= span[0] && x <= span[1]
        })
        .map(|i| {
            let truth = 2.0 * (spec.area_at(est.position(i)) / std::f64::consts::PI).sqrt();
            (diam[i] / truth - 1.0).abs()
        })
        .fold(0.0, f64::max)
}

/// Synthesize `spec` on `frequencies`, run the estimate and score every
/// termination rule against the reference transfer impedance.
pub fn roundtrip(spec: &HornSpec, frequencies: Vec<f64>, cfg: &PipelineConfig) -> Result<RoundtripReport> {
    let constants = cfg.constants;
    let case = synthesize(spec, frequencies, &constants, &LoadModel::RigidTermination, UMBO_OFFSET)?;
    let est = estimate(&case.z_ec, cfg)?;
    let measured = case.z_ec.truncated(est.config.f_lim)?;
    let lme = find_l_lme(est.area(), &measured, &case.z_trans_ref, est.config.interval, &constants)?;
    let errors_at_lme = rms_errors(&predict_ztrans(est.area(), &measured, lme.l_lme, &constants)?, &case.z_trans_ref)?;

    let mut rules = vec![RuleOutcome {
        rule: TerminationRule::Lme,
        length: lme.l_lme,
        l_rmse: errors_at_lme.l_rmse,
        theta_rmse: errors_at_lme.theta_rmse,
    }];
    for rule in [
        TerminationRule::Epsilon,
        TerminationRule::EpsilonCorrected,
        TerminationRule::Tdrmax,
        TerminationRule::TdrmaxCorrected,
        TerminationRule::Tdr50,
        TerminationRule::Tdr50Corrected,
        TerminationRule::Quarter,
    ] {
        let Ok(length) = select_termination(rule, &est, &measured, None) else {
            continue;
        };
        if length < 0.0 || length > est.area().extent() {
            continue;
        }
        let e = rms_errors(&predict_ztrans(est.area(), &measured, length, &constants)?, &case.z_trans_ref)?;
        rules.push(RuleOutcome {
            rule,
            length,
            l_rmse: e.l_rmse,
            theta_rmse: e.theta_rmse,
        });
    }

    let true_entrance_area = spec.area_at(0.0);
    let span = diameter_span(spec.length(), est.config.f_cut, constants.c);
    Ok(RoundtripReport {
        horn: spec.name().to_string(),
        length: spec.length(),
        reference_depth: case.reference_depth,
        true_entrance_area,
        estimated_entrance_area: est.entrance_area(),
        z0_true: constants.characteristic_impedance(true_entrance_area),
        z0_estimated: est.reflectance.z0,
        surge_iterations: est.reflectance.surge_trace.len(),
        termination: est.termination,
        lme,
        errors_at_lme,
        rules,
        max_diameter_deviation: diameter_deviation(est.area(), spec, span),
        diameter_span: span,
        warnings: est.warnings,
    })
}

impl RoundtripReport {
    pub fn outcome(&self, rule: TerminationRule) -> Option<&RuleOutcome> {
        self.rules.iter().find(|r| r.rule == rule)
    }
}
