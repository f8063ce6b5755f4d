use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;
use serde_json::json;
use webster_core::calibration::{sweep, SweepItem};
use webster_core::horns::{generate_area, synthesize};
use webster_core::inverse::TerminationReport;
use webster_core::io::{
    read_area_csv, read_impedance_csv, write_area_csv, write_impedance_csv, write_sweep_long_csv, write_sweep_matrix_csv,
};
use webster_core::metrics::median;
use webster_core::pipeline::{estimate, predict_ztrans, roundtrip, select_termination, RoundtripReport};
use webster_core::transmission::{LoadModel, EA_MODEL_STEP};
use webster_core::{ImpedanceSpectrum, TerminationRule};

use crate::horn::{specs, HornKind, SynthArgs};
use crate::settings::{parse_grid_khz, Settings};

/// Result of a command that did not fail outright.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Clean,
    /// Usable output with warnings worth a second look.
    Degraded,
}

impl Outcome {
    fn from_flag(degraded: bool) -> Self {
        if degraded {
            Outcome::Degraded
        } else {
            Outcome::Clean
        }
    }

    fn status(self) -> &'static str {
        match self {
            Outcome::Clean => "ok",
            Outcome::Degraded => "degraded",
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    Ok(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

pub fn read_impedance(path: &Path) -> Result<ImpedanceSpectrum> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    read_impedance_csv(BufReader::new(f)).with_context(|| format!("reading {}", path.display()))
}

fn write_impedance(path: &Path, z: &ImpedanceSpectrum) -> Result<()> {
    let mut w = create(path)?;
    write_impedance_csv(&mut w, z)?;
    w.flush()?;
    Ok(())
}

fn header(command: &str, settings: &Settings) -> serde_json::Value {
    json!({
        "tool": "webster",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "settings": settings,
    })
}

fn merge(mut base: serde_json::Value, extra: serde_json::Value) -> serde_json::Value {
    if let (Some(b), serde_json::Value::Object(e)) = (base.as_object_mut(), extra) {
        b.extend(e);
    }
    base
}

pub fn cmd_estimate(
    zec: &Path,
    out_dir: &Path,
    reference: Option<&Path>,
    settings: &Settings,
) -> Result<Outcome> {
    let z_ec = read_impedance(zec)?;
    let z_ref = reference.map(read_impedance).transpose()?;
    let est = estimate(&z_ec, &settings.pipeline)?;
    let measured = z_ec.truncated(est.config.f_lim)?;

    let rule = settings.pipeline.termination;
    let selected = select_termination(rule, &est, &measured, z_ref.as_ref());
    let selection = match &selected {
        Ok(length) => json!({ "rule": rule, "length_m": length }),
        Err(e) => json!({ "rule": rule, "error": { "code": e.code(), "message": e.to_string() } }),
    };
    let outcome = Outcome::from_flag(!est.warnings.is_empty() || selected.is_err());

    let mut w = create(&out_dir.join("area.csv"))?;
    write_area_csv(&mut w, est.area())?;
    w.flush()?;
    write_json(
        &out_dir.join("termination.json"),
        &json!({ "lengths": est.termination, "selected": selection }),
    )?;
    let diag = merge(
        header("estimate", settings),
        json!({
            "input": zec,
            "reference": reference,
            "resolved": est.config,
            "reflectance": {
                "z0": est.reflectance.z0,
                "eta": est.reflectance.eta,
                "entrance_area_m2": est.entrance_area(),
                "surge_iterations": est.reflectance.surge_trace.len(),
                "converged": est.reflectance.converged,
                "imag_residue": est.reflectance.imag_residue,
            },
            "inversion": {
                "points": est.area().len(),
                "dx_m": est.area().dx,
                "extent_m": est.area().extent(),
                "clamped_interfaces": est.inversion.clamped,
                "truncated_at_m": est.inversion.truncated_at,
            },
            "warnings": est.warnings,
            "status": outcome.status(),
        }),
    );
    write_json(&out_dir.join("diagnostics.json"), &diag)?;
    Ok(outcome)
}

/// Termination length stored under `rule` in an estimate's termination file.
fn length_from_report(report: &TerminationReport, rule: TerminationRule) -> Option<f64> {
    match rule {
        TerminationRule::Epsilon => report.l_epsilon,
        TerminationRule::EpsilonCorrected => report.corrected.l_epsilon,
        TerminationRule::Tdrmax => report.l_tdrmax,
        TerminationRule::TdrmaxCorrected => report.corrected.l_tdrmax,
        TerminationRule::Tdr50 => report.l_tdr50,
        TerminationRule::Tdr50Corrected => report.corrected.l_tdr50,
        TerminationRule::Quarter => report.l_quarter,
        TerminationRule::Fixed(x) => Some(x),
        TerminationRule::Lme => None,
    }
}

#[derive(Debug, Clone)]
pub enum LengthSource {
    Fixed(f64),
    /// A `termination.json` written by `estimate`; `None` takes its selection.
    File(PathBuf, Option<TerminationRule>),
}

fn resolve_length(source: &LengthSource) -> Result<(f64, serde_json::Value)> {
    match source {
        LengthSource::Fixed(x) => Ok((*x, json!({ "fixed_m": x }))),
        LengthSource::File(path, rule) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let v: serde_json::Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
            let length = match rule {
                Some(r) => {
                    let report: TerminationReport = serde_json::from_value(v["lengths"].clone())
                        .with_context(|| format!("{} has no termination lengths", path.display()))?;
                    length_from_report(&report, *r).ok_or(webster_core::Error::LengthAbsent {
                        what: "requested termination length",
                    })?
                }
                None => v["selected"]["length_m"]
                    .as_f64()
                    .ok_or(webster_core::Error::LengthAbsent { what: "selected length" })?,
            };
            let rule = rule.map(|r| json!(r)).unwrap_or_else(|| v["selected"]["rule"].clone());
            Ok((length, json!({ "file": path, "rule": rule })))
        }
    }
}

pub fn cmd_ztrans(zec: &Path, area: &Path, source: &LengthSource, out: &Path, settings: &Settings) -> Result<Outcome> {
    let mut z_ec = read_impedance(zec)?;
    if let Some(f_lim) = settings.pipeline.f_lim {
        z_ec = z_ec.truncated(f_lim)?;
    }
    let af = {
        let f = File::open(area).with_context(|| format!("opening {}", area.display()))?;
        read_area_csv(BufReader::new(f)).with_context(|| format!("reading {}", area.display()))?
    };
    let (length, from) = resolve_length(source)?;
    let z = predict_ztrans(&af, &z_ec, length, &settings.pipeline.constants)?;
    write_impedance(out, &z)?;
    let summary = merge(
        header("ztrans", settings),
        json!({ "termination_m": length, "source": from, "output": out, "points": z.frequencies().len(), "status": "ok" }),
    );
    println!("{}", serde_json::to_string(&summary)?);
    Ok(Outcome::Clean)
}

pub fn cmd_genhorn(
    kind: &HornKind,
    synth: &SynthArgs,
    load: Option<&Path>,
    out_dir: &Path,
    settings: &Settings,
) -> Result<Outcome> {
    let constants = settings.pipeline.constants;
    let load = match load {
        Some(p) => LoadModel::TabulatedImpedance(read_impedance(p)?),
        None => LoadModel::RigidTermination,
    };
    let items = specs(kind, synth, settings.seed)?;
    let suite = matches!(kind, HornKind::Suite);
    let mut written = Vec::new();
    for (id, spec) in &items {
        let dir = if suite { out_dir.join(id) } else { out_dir.to_path_buf() };
        let case = synthesize(spec, synth.frequencies()?, &constants, &load, synth.medial_offset())?;
        let mut w = create(&dir.join("area.csv"))?;
        write_area_csv(&mut w, &generate_area(spec, EA_MODEL_STEP)?)?;
        w.flush()?;
        write_impedance(&dir.join("zec.csv"), &case.z_ec)?;
        write_impedance(&dir.join("ztrans_ref.csv"), &case.z_trans_ref)?;
        write_json(
            &dir.join("horn.json"),
            &merge(
                header("gen-horn", settings),
                json!({ "id": id, "spec": spec, "reference_depth_m": case.reference_depth, "rigid": matches!(load, LoadModel::RigidTermination) }),
            ),
        )?;
        written.push(dir);
    }
    println!("{}", serde_json::to_string(&json!({ "written": written }))?);
    Ok(Outcome::Clean)
}

#[derive(Serialize)]
struct SuiteSummary {
    items: usize,
    median_l_rmse_lme_db: Option<f64>,
    median_theta_rmse_lme_deg: Option<f64>,
    median_l_rmse_epsilon_corrected_db: Option<f64>,
    max_diameter_deviation: f64,
}

fn summarise(reports: &[RoundtripReport]) -> SuiteSummary {
    let col = |f: &dyn Fn(&RoundtripReport) -> Option<f64>| -> Vec<f64> { reports.iter().filter_map(f).collect() };
    SuiteSummary {
        items: reports.len(),
        median_l_rmse_lme_db: median(&col(&|r| Some(r.errors_at_lme.l_rmse))),
        median_theta_rmse_lme_deg: median(&col(&|r| Some(r.errors_at_lme.theta_rmse))),
        median_l_rmse_epsilon_corrected_db: median(&col(&|r| {
            r.outcome(TerminationRule::EpsilonCorrected).map(|o| o.l_rmse)
        })),
        max_diameter_deviation: reports.iter().map(|r| r.max_diameter_deviation).fold(0.0, f64::max),
    }
}

pub fn cmd_roundtrip(kind: &HornKind, synth: &SynthArgs, out: Option<&Path>, settings: &Settings) -> Result<Outcome> {
    let items = specs(kind, synth, settings.seed)?;
    let mut reports = Vec::with_capacity(items.len());
    for (id, spec) in &items {
        let rep = roundtrip(spec, synth.frequencies()?, &settings.pipeline).with_context(|| format!("round trip of {id}"))?;
        reports.push(rep);
    }
    let outcome = Outcome::from_flag(reports.iter().any(|r| !r.warnings.is_empty()));
    let doc = merge(
        header("roundtrip", settings),
        json!({ "summary": summarise(&reports), "reports": reports, "status": outcome.status() }),
    );
    match out {
        Some(p) => write_json(p, &doc)?,
        None => println!("{}", serde_json::to_string_pretty(&doc)?),
    }
    Ok(outcome)
}

/// Subdirectories of `dir` holding `zec.csv` and `ztrans_ref.csv`, by name.
pub fn load_dataset(dir: &Path, interval: [f64; 2]) -> Result<Vec<SweepItem>> {
    let mut dirs: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("listing {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.join("zec.csv").is_file() && p.join("ztrans_ref.csv").is_file())
        .collect();
    dirs.sort();
    if dirs.is_empty() {
        bail!("{} holds no item directories with zec.csv and ztrans_ref.csv", dir.display());
    }
    dirs.iter()
        .map(|d| {
            Ok(SweepItem {
                id: d.file_name().unwrap_or_default().to_string_lossy().into_owned(),
                z_ec: read_impedance(&d.join("zec.csv"))?,
                z_trans_ref: read_impedance(&d.join("ztrans_ref.csv"))?,
                interval,
            })
        })
        .collect()
}

pub fn cmd_sweep(dataset: &Path, f_cut_grid: &str, f_sup_grid: &str, out_dir: &Path, settings: &Settings) -> Result<Outcome> {
    let f_cut = parse_grid_khz(f_cut_grid)?;
    let f_sup = parse_grid_khz(f_sup_grid)?;
    let items = load_dataset(dataset, settings.pipeline.interval)?;
    let f_lim = match settings.pipeline.f_lim {
        Some(f) => f,
        None => items.iter().map(|i| i.z_ec.f_lim()).fold(f64::INFINITY, f64::min),
    };
    let run = || sweep(&items, &f_cut, &f_sup, f_lim, &settings.pipeline);
    let rec = match settings.parallel {
        Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n).build()?.install(run)?,
        None => run()?,
    };

    for (name, phase) in [("l_mlme.csv", false), ("theta_mlme.csv", true)] {
        let mut w = create(&out_dir.join(name))?;
        write_sweep_matrix_csv(&mut w, &rec, phase)?;
        w.flush()?;
    }
    let mut w = create(&out_dir.join("cells.csv"))?;
    write_sweep_long_csv(&mut w, &rec)?;
    w.flush()?;

    let failed: Vec<_> = rec
        .cells
        .iter()
        .filter_map(|c| c.error.as_ref().map(|e| json!({ "item": c.item_id, "f_sup_hz": c.f_sup, "f_cut_hz": c.f_cut, "code": e })))
        .collect();
    let outcome = Outcome::from_flag(!failed.is_empty());
    let best: Vec<_> = (0..f_sup.len())
        .map(|s| json!({ "f_sup_hz": f_sup[s], "best": rec.best_f_cut(s).map(|(fc, l)| json!({ "f_cut_hz": fc, "l_mlme_db": l })) }))
        .collect();
    write_json(
        &out_dir.join("diagnostics.json"),
        &merge(
            header("sweep", settings),
            json!({
                "dataset": dataset,
                "items": items.iter().map(|i| &i.id).collect::<Vec<_>>(),
                "f_lim_hz": f_lim,
                "f_cut_grid_hz": f_cut,
                "f_sup_grid_hz": f_sup,
                "best": best,
                "failed_cells": failed,
                "status": outcome.status(),
            }),
        ),
    )?;
    Ok(outcome)
}
